"""Parameter sweeps and CSV writers for the experiment CLI."""

from __future__ import annotations

import csv
import dataclasses
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Sequence

from semalloc import baselines, optimizer
from semalloc.instance import Scenario
from semalloc.model import exact_constraint_lhs
from semalloc.scenario import RNG_ALGORITHM, ScenarioSpec, generate_scenario
from semalloc.semantics import se_percent

SCHEMES = {
    "proposed": "proposed",
    "eb": "EB-SEMC",
    "rb": "RB-SEMC",
    "trad": "Trad-SEMC",
}
RESULT_COLUMNS = (
    "scheme", "seed", "K", "T_th_s", "P_max_w", "objective",
    "se_percent", "exact_lhs", "iterations", "runtime_ms",
)
TRACE_COLUMNS = ("outer_iter", "bound", "delta_b", "relaxed_lhs", "exact_lhs", "accepted", "objective")


def parse_schemes(text: str | Sequence[str]) -> list[str]:
    items = text.split(",") if isinstance(text, str) else list(text)
    out = []
    for item in items:
        key = item.strip().lower()
        if key == "all":
            out.extend(SCHEMES)
            continue
        if key not in SCHEMES:
            raise ValueError(f"unknown scheme {item!r}; choose from {', '.join(SCHEMES)} or 'all'")
        out.append(key)
    return list(dict.fromkeys(out))


def _row(scheme, seed, scenario_k, t_th, p_max, objective, se, lhs, iterations, runtime_ms):
    return {
        "scheme": scheme,
        "seed": seed,
        "K": scenario_k,
        "T_th_s": t_th,
        "P_max_w": p_max,
        "objective": objective,
        "se_percent": se,
        "exact_lhs": lhs,
        "iterations": iterations,
        "runtime_ms": runtime_ms,
    }


def evaluate(scenario: Scenario, scheme: str, opt_cfg=optimizer.OptimizerConfig(), timing=False) -> dict:
    """Run one scheme on one scenario and return a result row."""
    cfg = scenario.config
    start = time.perf_counter()
    if scheme == "proposed":
        rep = optimizer.run(scenario, opt_cfg)
        sel, obj, iters = rep.selection, rep.objective, rep.iterations
    else:
        if scheme == "eb":
            res = baselines.eb_semc(scenario)
        elif scheme == "rb":
            res = baselines.rb_semc(scenario, seed=scenario.seed or 0)
        elif scheme == "trad":
            res = baselines.trad_semc(scenario)
        else:
            raise ValueError(f"unknown scheme {scheme!r}")
        sel, obj, iters = res.selection, res.objective, 0
    elapsed = (time.perf_counter() - start) * 1e3 if timing else None
    return _row(
        SCHEMES[scheme], scenario.seed, scenario.n_devices, cfg.time_threshold_s, cfg.max_power_w,
        obj, se_percent(sel, scenario), exact_constraint_lhs(sel, scenario), iters, elapsed,
    )


def _zero_time_rows(scenario: Scenario, schemes, p_max: float) -> list[dict]:
    return [
        _row(SCHEMES[s], scenario.seed, scenario.n_devices, 0.0, p_max, 0.0, 0.0, 0.0, 0, None)
        for s in schemes
    ]


def _time_sweep_one(spec: ScenarioSpec, t_list, schemes, opt_cfg, timing) -> list[dict]:
    base = generate_scenario(spec)
    rows = []
    for t in t_list:
        if t == 0:
            rows.extend(_zero_time_rows(base, schemes, base.config.max_power_w))
            continue
        sc = base.with_config(time_threshold_s=t)
        rows.extend(evaluate(sc, s, opt_cfg, timing) for s in schemes)
    return rows


def _power_sweep_one(spec: ScenarioSpec, p_list, t_list, opt_cfg, timing) -> list[dict]:
    base = generate_scenario(spec)
    rows = []
    for p in p_list:
        for t in t_list:
            if t == 0:
                rows.extend(_zero_time_rows(base, ["proposed"], p))
                continue
            sc = base.with_config(time_threshold_s=t, max_power_w=p)
            rows.append(evaluate(sc, "proposed", opt_cfg, timing))
    return rows


def _specs_for_seeds(spec: ScenarioSpec, seeds: Iterable[int] | None) -> list[ScenarioSpec]:
    if seeds is None:
        return [spec]
    return [dataclasses.replace(spec, seed=int(s)) for s in seeds]


def _map(fn, specs, args, jobs: int) -> list[dict]:
    if jobs <= 1 or len(specs) <= 1:
        chunks = [fn(s, *args) for s in specs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(fn, specs, *[[a] * len(specs) for a in args]))
    return [row for chunk in chunks for row in chunk]


def sort_rows(rows: list[dict]) -> list[dict]:
    return sorted(rows, key=lambda r: (r["scheme"], r["T_th_s"], r["P_max_w"], r["seed"] if r["seed"] is not None else -1))


def sweep_time_threshold(
    spec: ScenarioSpec,
    t_list: Sequence[float],
    schemes: Sequence[str] = tuple(SCHEMES),
    seeds: Iterable[int] | None = None,
    opt_cfg: optimizer.OptimizerConfig = optimizer.OptimizerConfig(),
    timing: bool = False,
    jobs: int = 1,
) -> list[dict]:
    """One row per (seed, T_th, scheme); the scenario is fixed per seed across T_th."""
    if not len(t_list):
        raise ValueError("t_list must not be empty")
    schemes = parse_schemes(schemes)
    rows = _map(_time_sweep_one, _specs_for_seeds(spec, seeds), (list(t_list), schemes, opt_cfg, timing), jobs)
    return sort_rows(rows)


def sweep_power(
    spec: ScenarioSpec,
    p_list: Sequence[float],
    t_list: Sequence[float],
    seeds: Iterable[int] | None = None,
    opt_cfg: optimizer.OptimizerConfig = optimizer.OptimizerConfig(),
    timing: bool = False,
    jobs: int = 1,
) -> list[dict]:
    """Proposed scheme over the P_max x T_th grid."""
    if not len(p_list) or not len(t_list):
        raise ValueError("p_list and t_list must not be empty")
    rows = _map(_power_sweep_one, _specs_for_seeds(spec, seeds), (list(p_list), list(t_list), opt_cfg, timing), jobs)
    return sort_rows(rows)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(rows: Iterable[dict], stream) -> None:
    stream.write(f"# rng={RNG_ALGORITHM}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in RESULT_COLUMNS])


def trace_rows(report: optimizer.SolveReport) -> list[tuple]:
    return [
        (s.outer_iter, s.bound, s.delta_b, s.relaxed_lhs, s.exact_lhs, s.accepted, s.objective)
        for s in report.trace
    ]


def write_trace(report: optimizer.SolveReport, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in trace_rows(report):
        writer.writerow([_fmt(v) for v in row])


def emit_trace(report: optimizer.SolveReport, path) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            write_trace(report, fh)
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc

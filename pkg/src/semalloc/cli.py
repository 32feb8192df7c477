"""Command-line entry point: ``semalloc <command> [options]``.

Physical inputs use the units of the reference setup: T_th in ms, bandwidth
in MHz, noise PSD in mW/Hz, power in W.  Everything is converted to SI
before it reaches the library.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from contextlib import contextmanager

from semalloc import experiments, optimizer, oracle
from semalloc.scenario import (
    ScenarioSpec,
    SpecError,
    dumps_scenario,
    generate_scenario,
    load_scenario,
    load_spec,
)
from semalloc.semantics import se_percent, write_importance_csv

log = logging.getLogger("semalloc")


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


@contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise SystemExit(f"error: cannot open {path}: {exc}")
    with fh:
        yield fh


def _channel_overrides(args) -> dict:
    changes = {}
    if args.tth is not None:
        changes["time_threshold_s"] = args.tth * 1e-3
    if args.pmax is not None:
        changes["max_power_w"] = args.pmax
    if args.bandwidth_mhz is not None:
        changes["total_bandwidth_hz"] = args.bandwidth_mhz * 1e6
    if args.ber_threshold is not None:
        changes["ber_threshold"] = args.ber_threshold
    if args.noise_psd_mw_hz is not None:
        changes["noise_psd_w_per_hz"] = args.noise_psd_mw_hz * 1e-3
        if args.noise_mode != "psd":
            changes["noise_variance_w"] = args.noise_psd_mw_hz
    if args.noise_mode == "psd":
        changes["noise_variance_w"] = None
    return changes


def _spec(args) -> ScenarioSpec:
    spec = load_spec(args.spec) if args.spec else ScenarioSpec()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.devices is not None:
        changes["n_devices"] = args.devices
    chan = _channel_overrides(args)
    if chan:
        changes["channel"] = spec.channel.replace(**chan)
    return dataclasses.replace(spec, **changes) if changes else spec


def _scenario(args):
    if args.scenario:
        sc = load_scenario(args.scenario)
        chan = _channel_overrides(args)
        return sc.with_config(**chan) if chan else sc
    return generate_scenario(_spec(args))


def _opt_cfg(args) -> optimizer.OptimizerConfig:
    return optimizer.OptimizerConfig(eps1=args.eps1, eps2=args.eps2, max_outer_iterations=args.max_iter, init=args.init)


def _seeds(args):
    if args.seeds is None:
        return None
    base = args.seed or 0
    return range(base, base + args.seeds)


def cmd_gen(args) -> int:
    with _output(args.out) as fh:
        fh.write(dumps_scenario(_scenario(args)))
    return 0


def cmd_solve(args) -> int:
    sc = _scenario(args)
    rep = optimizer.run(sc, _opt_cfg(args))
    row = experiments._row(
        "proposed", sc.seed, sc.n_devices, sc.config.time_threshold_s, sc.config.max_power_w,
        rep.objective, se_percent(rep.selection, sc), rep.exact_lhs, rep.iterations, None,
    )
    with _output(args.out) as fh:
        experiments.write_results([row], fh)
    if args.trace:
        experiments.emit_trace(rep, args.trace)
    if args.selection:
        payload = {
            "alpha": [int(a) for a in rep.selection.alpha],
            "eta": [[int(b) for b in e] for e in rep.selection.eta],
            "power_w": [float(p) for p in rep.allocation.power_w],
            "band_fraction": [float(b) for b in rep.allocation.band_fraction],
        }
        with _output(args.selection) as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    if not rep.feasible:
        log.error("solver returned an infeasible selection")
        return 1
    return 0


def cmd_sweep_time(args) -> int:
    t_list = [t * 1e-3 for t in _float_list(args.t_list)]
    rows = experiments.sweep_time_threshold(
        _spec(args), t_list, args.schemes, seeds=_seeds(args),
        opt_cfg=_opt_cfg(args), timing=args.timing, jobs=args.jobs,
    )
    with _output(args.out) as fh:
        experiments.write_results(rows, fh)
    return 0


def cmd_sweep_power(args) -> int:
    t_list = [t * 1e-3 for t in _float_list(args.t_list)]
    rows = experiments.sweep_power(
        _spec(args), _float_list(args.p_list), t_list, seeds=_seeds(args),
        opt_cfg=_opt_cfg(args), timing=args.timing, jobs=args.jobs,
    )
    with _output(args.out) as fh:
        experiments.write_results(rows, fh)
    return 0


def cmd_oracle(args) -> int:
    sc = _scenario(args)
    try:
        res = oracle.brute_force(sc)
    except oracle.InstanceTooLarge as exc:
        raise SystemExit(f"error: {exc}")
    from semalloc.model import exact_constraint_lhs

    row = experiments._row(
        "oracle", sc.seed, sc.n_devices, sc.config.time_threshold_s, sc.config.max_power_w,
        res.objective, se_percent(res.selection, sc), exact_constraint_lhs(res.selection, sc), 0, None,
    )
    with _output(args.out) as fh:
        experiments.write_results([row], fh)
    return 0


def cmd_importance(args) -> int:
    sc = _scenario(args)
    with _output(args.out) as fh:
        write_importance_csv(sc, fh)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="scenario seed (first seed for sweeps)")
    common.add_argument("--spec", help="scenario spec JSON (generation parameters or explicit triplets)")
    common.add_argument("--scenario", help="scenario JSON as written by 'gen'")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--devices", "-K", type=int, default=None, help="number of devices")
    common.add_argument("--tth", "--tth-ms", dest="tth", type=float, default=None, help="time threshold in ms")
    common.add_argument("--pmax", "--pmax-w", dest="pmax", type=float, default=None, help="power cap in W")
    common.add_argument("--bandwidth-mhz", type=float, default=None)
    common.add_argument("--ber-threshold", type=float, default=None)
    common.add_argument("--noise-psd-mw-hz", type=float, default=None, help="noise figure in mW/Hz")
    common.add_argument(
        "--noise-mode", choices=("variance", "psd"), default=None,
        help="'variance': use the noise figure directly as the SNR noise term (default); "
        "'psd': integrate the PSD over the whole band",
    )
    common.add_argument("--eps1", type=float, default=1e-6)
    common.add_argument("--eps2", type=float, default=1e-5)
    common.add_argument("--max-iter", type=int, default=200)
    common.add_argument("--init", choices=optimizer.INIT_RULES, default="all_triplets")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="semalloc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a scenario JSON")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", parents=[common], help="run the alternating solver")
    p.add_argument("--trace", help="write the bound-search trace CSV here")
    p.add_argument("--selection", help="write the selection and allocation JSON here")
    p.set_defaults(func=cmd_solve)

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--seeds", type=int, default=None, help="number of consecutive seeds to average over")
    sweep.add_argument("--t-list", default="1,2,3,4,5,6,7,8,9,10", help="comma-separated T_th values in ms")
    sweep.add_argument("--jobs", type=int, default=1)
    sweep.add_argument("--timing", action="store_true", help="fill runtime_ms (output is then not reproducible)")

    p = sub.add_parser("sweep-time", parents=[common, sweep], help="SE versus T_th for each scheme")
    p.add_argument("--schemes", default="all", help="comma-separated subset of proposed,eb,rb,trad")
    p.set_defaults(func=cmd_sweep_time)

    p = sub.add_parser("sweep-power", parents=[common, sweep], help="SE versus T_th for several power caps")
    p.add_argument("--p-list", default="0.001,0.01,0.1", help="comma-separated P_max values in W")
    p.set_defaults(func=cmd_sweep_power)

    p = sub.add_parser("oracle", parents=[common], help="exhaustive optimum of a small scenario")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("importance", parents=[common], help="dump triplet importance/recovery scores as CSV")
    p.set_defaults(func=cmd_importance)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SpecError, ValueError) as exc:
        parser.exit(2, f"error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())

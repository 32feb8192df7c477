"""Alternating user / sub-graph selection with a corrected linear bound.

Power and bandwidth are eliminated in closed form (minimum power meeting
the BER floor, bandwidth making the deadline tight), which leaves a binary
program in the user vector ``alpha`` and triplet vectors ``eta``.  The
solver alternates:

* user step: with ``eta`` fixed, the pooled bandwidth constraint is replaced
  by its linear upper approximation with right-hand side ``bound``; a
  halving search tunes ``bound`` so the chosen users still satisfy the
  exact constraint;
* sub-graph step: with ``alpha`` fixed the exact constraint is linear in
  ``eta`` and is solved directly.

Both steps are 0-1 knapsacks, solved exactly by :mod:`semalloc.knapsack`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from semalloc import model
from semalloc.instance import Allocation, Scenario, Selection
from semalloc.knapsack import KnapsackInfeasible, KnapsackInstance, solve_exact
from semalloc.semantics import total_objective

log = logging.getLogger(__name__)

INIT_RULES = ("all_triplets", "equal_split")


@dataclass(frozen=True)
class OptimizerConfig:
    eps1: float = 1e-6
    eps2: float = 1e-5
    max_outer_iterations: int = 200
    init: str = "all_triplets"

    def __post_init__(self):
        if not self.eps1 > 0 or not self.eps2 > 0:
            raise ValueError("eps1 and eps2 must be positive")
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be >= 1")
        if self.init not in INIT_RULES:
            raise ValueError(f"unknown init rule {self.init!r}; expected one of {INIT_RULES}")


@dataclass(frozen=True)
class BoundStep:
    outer_iter: int
    bound: float
    delta_b: float
    relaxed_lhs: float
    exact_lhs: float
    accepted: bool
    objective: float


@dataclass
class SolveReport:
    selection: Selection
    allocation: Allocation
    objectives: list[float]
    trace: list[BoundStep]
    iterations: int
    exact_lhs: float
    feasible: bool
    hit_iteration_cap: bool = False
    scenario_infeasible: bool = False
    relaxed_infeasible_steps: int = 0

    @property
    def objective(self) -> float:
        return self.objectives[-1]


@dataclass
class BoundSearchResult:
    alpha: np.ndarray
    bound: float
    trace: list[BoundStep] = field(default_factory=list)
    found_feasible: bool = True
    relaxed_infeasible_steps: int = 0


def delta_max(scenario: Scenario) -> float:
    """Largest possible gap between the linear and exact constraint left-hand sides."""
    cfg = scenario.config
    total = math.fsum(float(d.sizes.sum()) for d in scenario.devices)
    return model.LN2 * total / (cfg.time_threshold_s * cfg.total_bandwidth_hz)


def feasibility_prefilter(scenario: Scenario) -> frozenset[int]:
    """Devices whose minimum BER-feasible power exceeds the power cap."""
    ok = model.power_feasible(scenario)
    return frozenset(int(k) for k in np.flatnonzero(~ok))


def _device_values(eta: list[np.ndarray], scenario: Scenario) -> np.ndarray:
    return np.array(
        [math.fsum(d.values[e.astype(bool)]) for e, d in zip(eta, scenario.devices)],
        dtype=float,
    )


def solve_user_selection(
    eta: list[np.ndarray],
    bound: float,
    scenario: Scenario,
    forced_zero: frozenset[int] | None = None,
) -> tuple[np.ndarray, bool]:
    """Best user vector under the linear bandwidth constraint at ``bound``.

    Returns ``(alpha, relaxed_infeasible)``; the flag is set when the
    constant part of the constraint already exceeds ``bound``, in which case
    ``alpha`` is all zero.
    """
    cfg = scenario.config
    if forced_zero is None:
        forced_zero = feasibility_prefilter(scenario)
    scale = model.LN2 / (cfg.time_threshold_s * cfg.total_bandwidth_hz)
    bits = model.selected_bits(Selection(np.zeros(len(eta)), eta), scenario)
    constant = scale * math.fsum(bits) / scenario.c_th
    inst = KnapsackInstance(
        values=_device_values(eta, scenario),
        weights=scale * bits,
        capacity=bound - constant,
        forced_zero=forced_zero,
    )
    try:
        alpha, _ = solve_exact(inst)
    except KnapsackInfeasible:
        return np.zeros(len(eta), dtype=np.int8), True
    return alpha, False


def bound_step_count(dmax: float, eps2: float) -> int:
    """Number of halving steps the bound search performs for a given gap."""
    count, step = 0, dmax / 2
    while step >= eps2:
        count += 1
        step /= 2
    return count


def bound_search(
    eta: list[np.ndarray],
    scenario: Scenario,
    cfg: OptimizerConfig = OptimizerConfig(),
    incumbent: np.ndarray | None = None,
    outer_iter: int = 0,
    dmax: float | None = None,
) -> BoundSearchResult:
    """Halving search over the linear constraint's right-hand side.

    Each iterate is checked against the exact constraint; the best exactly
    feasible user vector seen (including ``incumbent`` when given) is
    returned.  When ``dmax`` is below ``2 * eps2`` the halving loop would be
    empty, so a single solve at ``1 + dmax / 2`` is made instead.
    """
    if dmax is None:
        dmax = delta_max(scenario)
    forced = feasibility_prefilter(scenario)
    n = scenario.n_devices

    best_alpha = None
    best_obj = -math.inf
    best_bound = math.nan
    if incumbent is not None:
        cand = Selection(incumbent, eta)
        if model.exact_constraint_lhs(cand, scenario) <= 1.0 + model.FEASIBILITY_TOL:
            best_alpha = np.asarray(incumbent, dtype=np.int8).copy()
            best_obj = total_objective(cand, scenario)

    trace: list[BoundStep] = []
    relaxed_bad = 0
    delta_b = dmax / 2
    bound = 1.0 + delta_b
    single_shot = not delta_b >= cfg.eps2
    while delta_b >= cfg.eps2 or single_shot:
        alpha, flagged = solve_user_selection(eta, bound, scenario, forced)
        relaxed_bad += flagged
        sel = Selection(alpha, eta)
        exact = model.exact_constraint_lhs(sel, scenario)
        relaxed = model.relaxed_constraint_lhs(sel, scenario)
        obj = total_objective(sel, scenario)
        accepted = exact <= 1.0
        solved_at = bound
        delta_b /= 2
        trace.append(BoundStep(outer_iter, solved_at, delta_b, relaxed, exact, accepted, obj))
        if accepted:
            if obj > best_obj:
                best_alpha, best_obj, best_bound = alpha, obj, solved_at
            bound += delta_b
        else:
            bound -= delta_b
        if single_shot:
            break

    found = best_alpha is not None
    if not found:
        best_alpha = np.zeros(n, dtype=np.int8)
    return BoundSearchResult(best_alpha, best_bound, trace, found, relaxed_bad)


def subgraph_instance(alpha: np.ndarray, scenario: Scenario) -> tuple[KnapsackInstance, list[tuple[int, int]]]:
    """Knapsack over all (device, triplet) pairs for a fixed user vector."""
    cfg = scenario.config
    scale = cfg.time_threshold_s * cfg.total_bandwidth_hz
    active_cost = 1.0 / (scale * math.log2(1.0 + scenario.c_th))
    idle_cost = model.LN2 / (scale * scenario.c_th)
    values, weights, index = [], [], []
    for k, (a, dev) in enumerate(zip(alpha, scenario.devices)):
        for n in range(dev.n_triplets):
            values.append(float(a) * dev.values[n])
            weights.append(dev.sizes[n] * (active_cost if a else idle_cost))
            index.append((k, n))
    return KnapsackInstance(np.array(values), np.array(weights), 1.0), index


def solve_subgraph_selection(alpha: np.ndarray, scenario: Scenario) -> list[np.ndarray]:
    inst, index = subgraph_instance(alpha, scenario)
    eta = [np.zeros(d.n_triplets, dtype=np.int8) for d in scenario.devices]
    if inst.n == 0:
        return eta
    x, _ = solve_exact(inst)
    for bit, (k, n) in zip(x, index):
        eta[k][n] = bit
    return eta


def initial_selection(scenario: Scenario, rule: str = "all_triplets") -> Selection:
    """Feasible starting point for the alternating solver.

    ``all_triplets``: no users, every triplet marked for sending.  If even the
    idle terms of the bandwidth constraint exceed one, triplets are dropped in
    order of increasing value density until they fit.

    ``equal_split``: the equal-bandwidth selection (every power-feasible user,
    best triplets that fit in a 1/K share), which always meets the pooled
    constraint.
    """
    if rule not in INIT_RULES:
        raise ValueError(f"unknown init rule {rule!r}")
    if rule == "equal_split":
        from semalloc.baselines import eb_semc

        if scenario.n_devices == 0:
            return Selection.empty(scenario)
        return eb_semc(scenario).selection
    sel = Selection(np.zeros(scenario.n_devices, dtype=np.int8), [np.ones(d.n_triplets, dtype=np.int8) for d in scenario.devices])
    if model.exact_constraint_lhs(sel, scenario) <= 1.0:
        return sel
    order = []
    for k, dev in enumerate(scenario.devices):
        for n in range(dev.n_triplets):
            size = dev.sizes[n]
            density = dev.values[n] / size if size > 0 else math.inf
            order.append((density, k, n))
    order.sort()
    for _, k, n in order:
        sel.eta[k][n] = 0
        if model.exact_constraint_lhs(sel, scenario) <= 1.0:
            break
    return sel


def recover_allocation(selection: Selection, scenario: Scenario) -> Allocation:
    cfg = scenario.config
    bits = model.selected_bits(selection, scenario)
    power = np.array(
        [model.required_power(int(a), scenario.c_th, d.link) for a, d in zip(selection.alpha, scenario.devices)]
    )
    band = np.array(
        [model.closed_form_bandwidth(int(a), w, cfg, scenario.c_th) for a, w in zip(selection.alpha, bits)]
    )
    assert band.sum() <= 1.0 + model.FEASIBILITY_TOL, f"bandwidth over-subscribed: {band.sum()}"
    for k, a in enumerate(selection.alpha):
        assert not a or power[k] <= cfg.max_power_w * (1.0 + model.POWER_REL_TOL), f"device {k} exceeds the power cap"
    return Allocation(power, band)


def run(scenario: Scenario, cfg: OptimizerConfig = OptimizerConfig()) -> SolveReport:
    sel = initial_selection(scenario, cfg.init)
    scenario_infeasible = model.exact_constraint_lhs(sel, scenario) > 1.0
    if scenario_infeasible:
        log.warning("idle bandwidth terms exceed the budget even with no triplets selected")
    dmax = delta_max(scenario)

    objectives = [total_objective(sel, scenario)]
    trace: list[BoundStep] = []
    relaxed_bad = 0
    iterations = 0
    hit_cap = True
    for it in range(1, cfg.max_outer_iterations + 1):
        res = bound_search(sel.eta, scenario, cfg, incumbent=sel.alpha, outer_iter=it, dmax=dmax)
        trace.extend(res.trace)
        relaxed_bad += res.relaxed_infeasible_steps
        alpha = res.alpha
        eta = solve_subgraph_selection(alpha, scenario)
        sel = Selection(alpha, eta)
        objectives.append(total_objective(sel, scenario))
        iterations = it
        if abs(objectives[-1] - objectives[-2]) <= cfg.eps1:
            hit_cap = False
            break
    if hit_cap:
        log.warning("alternating solver stopped at the iteration cap (%d)", cfg.max_outer_iterations)

    exact = model.exact_constraint_lhs(sel, scenario)
    feasible = model.is_feasible(sel, scenario)
    allocation = recover_allocation(sel, scenario) if feasible else Allocation(
        np.zeros(scenario.n_devices), np.zeros(scenario.n_devices)
    )
    return SolveReport(
        selection=sel,
        allocation=allocation,
        objectives=objectives,
        trace=trace,
        iterations=iterations,
        exact_lhs=exact,
        feasible=feasible,
        hit_iteration_cap=hit_cap,
        scenario_infeasible=scenario_infeasible,
        relaxed_infeasible_steps=relaxed_bad,
    )

"""Scenario pipeline: baselines, max-regret solves, design evaluation.

The regret of a design under scenario s is its cost with the scenario's
effective setup prices minus the best cost any design could achieve under
that scenario (the baseline).  Baselines are solved exactly before the
regret models are assembled; an approximate baseline would silently skew
every regret value built on top of it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .formulations import (ModelOptions, build_ccu, build_coupling_polytope,
                           build_nc, build_ocu, build_scenario_deterministic,
                           flow_cost_pairs)
from .instance import Instance
from .milp import Solution, solve_milp
from .model import check_feasibility

CORE_LABELS = ("eq2", "eq3", "eq4", "eq5", "eq6", "eq7")
COUPLING_LABELS = ("eq15", "eq16", "eq17", "eq18", "eq19", "eq20")


class InfeasibleScenarioError(RuntimeError):
    """A scenario's deterministic problem has no feasible design."""


class InfeasibleDesignError(ValueError):
    """A fixed design violates the flow or coupling constraints."""

    def __init__(self, violations):
        self.violations = violations
        worst = max(violations, key=lambda v: v.amount)
        super().__init__(f"design infeasible: {len(violations)} rows violated, "
                         f"worst {worst.label} by {worst.amount:.3e}")


@dataclass(frozen=True)
class ScenarioBaseline:
    """Per-scenario optima L*_s with their witness solutions."""

    values: tuple[float, ...]
    witnesses: tuple[Solution, ...]

    def __len__(self):
        return len(self.values)


def compute_baselines(inst: Instance,
                      opts: ModelOptions = ModelOptions()) -> ScenarioBaseline:
    """Solve every scenario's deterministic problem to optimality."""
    values, witnesses = [], []
    for s in range(inst.num_scenarios):
        sol = solve_milp(build_scenario_deterministic(inst, s, opts))
        if sol.status != "optimal":
            raise InfeasibleScenarioError(
                f"scenario {s} admits no feasible design")
        values.append(sol.objective)
        witnesses.append(sol)
    return ScenarioBaseline(tuple(values), tuple(witnesses))


def evaluate_design(inst: Instance, design: dict, s: int,
                    opts: ModelOptions = ModelOptions(),
                    check: bool = True) -> float:
    """Scenario-s cost of a fixed design (H/I/T plus flows, by name).

    Missing variables default to zero.  With ``check`` on, the flow rows
    and (when the design carries the hub split) the coupling rows are
    verified first; violations raise :class:`InfeasibleDesignError`.
    """
    if not (0 <= s < inst.num_scenarios):
        raise ValueError(f"scenario index {s} out of range")
    has_split = any(name.startswith("T[") or name.startswith("I[")
                    for name in design)
    if check:
        if has_split:
            probe = build_coupling_polytope(
                inst, opts, include_eq20=opts.eq20_mode == "linearized")
            labels = CORE_LABELS + COUPLING_LABELS
        else:
            probe = build_nc(inst, opts)
            labels = CORE_LABELS
        values = {name: design.get(name, 0.0) for name in probe.name_index}
        bad = check_feasibility(probe, values, labels=labels)
        if bad:
            raise InfeasibleDesignError(bad)

    eff = inst.effective_setup(s)
    cost = 0.0
    setup_var = "I" if (has_split
                        and opts.ocu_objective == "collaborative-split") else "H"
    for k in range(inst.n):
        cost += eff[k] * design.get(f"{setup_var}[{k}]", 0.0)
        if has_split:
            cost += inst.setup[k] * design.get(f"T[{k}]", 0.0)
    for name, coeff in flow_cost_pairs(inst, opts):
        v = design.get(name, 0.0)
        if v:
            cost += coeff * v
    return float(cost)


def _attach_regrets(inst: Instance, sol: Solution, baselines: ScenarioBaseline,
                    opts: ModelOptions) -> Solution:
    costs, regrets = [], []
    for s in range(inst.num_scenarios):
        cost = evaluate_design(inst, sol.values, s, opts)
        regret = cost - baselines.values[s]
        reported = sol.values[f"Rs[{s}]"]
        if abs(regret - reported) > 1e-6 * max(1.0, abs(regret)):
            raise RuntimeError(
                f"regret replay mismatch for scenario {s}: "
                f"{regret:.9g} recomputed vs {reported:.9g} reported")
        costs.append(cost)
        regrets.append(regret)
    return replace(sol, scenario_costs=costs, regrets=regrets,
                   baselines=list(baselines.values))


def solve_ccu(inst: Instance, opts: ModelOptions = ModelOptions()) -> Solution:
    """Baselines, then the max-regret model without the hub split."""
    baselines = compute_baselines(inst, opts)
    sol = solve_milp(build_ccu(inst, baselines, opts))
    if sol.status != "optimal":
        return sol
    return _attach_regrets(inst, sol, baselines, opts)


def solve_ocu(inst: Instance, opts: ModelOptions = ModelOptions()) -> Solution:
    """Baselines, then the max-regret model with the hub split rows."""
    baselines = compute_baselines(inst, opts)
    sol = solve_milp(build_ocu(inst, baselines, opts))
    if sol.status != "optimal":
        return sol
    return _attach_regrets(inst, sol, baselines, opts)


def regret_report(inst: Instance, sol: Solution) -> dict:
    """Machine-readable report for a solved regret pipeline."""
    return {
        "status": sol.status,
        "baselines": sol.baselines,
        "design": {
            "open_hubs": list(sol.open_hubs),
            "collaborative_hubs": list(sol.collaborative_hubs),
            "noncollaborative_hubs": list(sol.noncollaborative_hubs),
        },
        "scenario_costs": sol.scenario_costs,
        "regrets": sol.regrets,
        "max_regret": sol.objective,
    }

"""Model builders for the four hub-location formulations.

Naming follows the model family's own constraint numbering, which every
row label carries:

* eq2..eq7    flow balance, capacity and linking rows shared by all models
* eq10        epigraph rows of the worst-case setup-cost model (CC)
* eq12, eq13  regret definition and max-regret rows (CCU)
* eq15..eq22  collaborative/non-collaborative hub split and the big-M
              coupling rows over supply-chain pairs (OCU)

Decision variables: H[k] opens a hub, Z[i,k] is the collection flow from
origin i into hub k, Y[i,k,l] the transfer flow of commodity i across the
hub arc (k,l), X[i,l,j] the distribution flow of commodity i from hub l to
destination j.  The OCU split adds I[k] (collaborative) and T[k]
(non-collaborative) with H = I + T, plus free regret variables Rs[s], R.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance, origin_supply
from .model import BINARY, CONTINUOUS, EQ, GE, LE, LinearModel

INF = float("inf")

COUPLING_FAMILIES = ("eq16", "eq17", "eq18", "eq19", "eq20")


class FormulationError(ValueError):
    """Raised when a builder precondition is not met."""


@dataclass(frozen=True)
class ModelOptions:
    """Switches for the deliberately ambiguous parts of the formulations.

    distribution_cost
        ``standard-Clj`` prices the distribution leg hub-to-destination;
        ``literal-Cij`` prices it origin-to-destination, which makes the
        leg cost independent of the serving hub.
    ocu_objective
        ``as-written`` charges F[k]*T[k] on top of the full effective
        setup for every open hub; ``collaborative-split`` charges the
        effective setup only on collaborative hubs.
    eq20_mode
        ``linearized`` expands the product row into two big-M rows (exact
        for nonnegative flow and binary T); ``omit`` drops the family so
        its redundancy can be probed.
    big_m_mode
        ``per-constraint-tight`` derives the smallest valid deactivation
        bound per row; ``total-demand`` uses the total flow volume.
    """

    distribution_cost: str = "standard-Clj"
    ocu_objective: str = "as-written"
    eq20_mode: str = "linearized"
    big_m_mode: str = "per-constraint-tight"

    def __post_init__(self):
        checks = {
            "distribution_cost": ("literal-Cij", "standard-Clj"),
            "ocu_objective": ("as-written", "collaborative-split"),
            "eq20_mode": ("omit", "linearized"),
            "big_m_mode": ("total-demand", "per-constraint-tight"),
        }
        for name, allowed in checks.items():
            if getattr(self, name) not in allowed:
                raise FormulationError(
                    f"{name} must be one of {allowed}, got {getattr(self, name)!r}")

    def to_dict(self) -> dict:
        return {
            "distribution_cost": self.distribution_cost,
            "ocu_objective": self.ocu_objective,
            "eq20_mode": self.eq20_mode,
            "big_m_mode": self.big_m_mode,
        }


# ---------------------------------------------------------------------------
# shared pieces


def flow_cost_pairs(inst: Instance, opts: ModelOptions) -> list[tuple[str, float]]:
    """(variable name, objective coefficient) for all flow variables."""
    n, C = inst.n, inst.cost
    pairs = []
    for i in range(n):
        for k in range(n):
            pairs.append((f"Z[{i},{k}]", inst.chi * C[i, k]))
    for i in range(n):
        for k in range(n):
            for l in range(n):
                pairs.append((f"Y[{i},{k},{l}]", inst.alpha * C[k, l]))
    for i in range(n):
        for l in range(n):
            for j in range(n):
                cij = C[l, j] if opts.distribution_cost == "standard-Clj" else C[i, j]
                pairs.append((f"X[{i},{l},{j}]", inst.delta * cij))
    return pairs


def _add_flow_variables(model: LinearModel, n: int) -> None:
    for k in range(n):
        model.add_variable(f"H[{k}]", BINARY)
    for i in range(n):
        for k in range(n):
            model.add_variable(f"Z[{i},{k}]", CONTINUOUS, 0.0, INF)
    for i in range(n):
        for k in range(n):
            for l in range(n):
                model.add_variable(f"Y[{i},{k},{l}]", CONTINUOUS, 0.0, INF)
    for i in range(n):
        for l in range(n):
            for j in range(n):
                model.add_variable(f"X[{i},{l},{j}]", CONTINUOUS, 0.0, INF)


def _add_core_rows(model: LinearModel, inst: Instance) -> None:
    """Rows eq2..eq7: supply, demand, capacity, conservation, linking."""
    n, W = inst.n, inst.demand
    ix = model.name_index
    for i in range(n):
        terms = [(ix[f"Z[{i},{k}]"], 1.0) for k in range(n)]
        model.add_constraint(f"eq2[i={i}]", terms, EQ, origin_supply(inst, i))
    for i in range(n):
        for j in range(n):
            terms = [(ix[f"X[{i},{l},{j}]"], 1.0) for l in range(n)]
            model.add_constraint(f"eq3[i={i},j={j}]", terms, EQ, W[i, j])
    for k in range(n):
        terms = [(ix[f"Z[{i},{k}]"], 1.0) for i in range(n)]
        terms.append((ix[f"H[{k}]"], -inst.capacity[k]))
        model.add_constraint(f"eq4[k={k}]", terms, LE, 0.0)
    for i in range(n):
        for k in range(n):
            terms = [(ix[f"Y[{i},{k},{l}]"], 1.0) for l in range(n)]
            terms += [(ix[f"X[{i},{k},{j}]"], 1.0) for j in range(n)]
            terms += [(ix[f"Y[{i},{l},{k}]"], -1.0) for l in range(n)]
            terms.append((ix[f"Z[{i},{k}]"], -1.0))
            model.add_constraint(f"eq5[i={i},k={k}]", terms, EQ, 0.0)
    for i in range(n):
        supply = origin_supply(inst, i)
        for k in range(n):
            terms = [(ix[f"Z[{i},{k}]"], 1.0), (ix[f"H[{k}]"], -supply)]
            model.add_constraint(f"eq6[i={i},k={k}]", terms, LE, 0.0)
    for l in range(n):
        for j in range(n):
            terms = [(ix[f"X[{i},{l},{j}]"], 1.0) for i in range(n)]
            terms.append((ix[f"H[{l}]"], -float(W[:, j].sum())))
            model.add_constraint(f"eq7[l={l},j={j}]", terms, LE, 0.0)


def _cost_terms(model: LinearModel, inst: Instance, opts: ModelOptions,
                setup: np.ndarray, setup_var: str = "H") -> list[tuple[int, float]]:
    ix = model.name_index
    terms = [(ix[f"{setup_var}[{k}]"], float(setup[k])) for k in range(inst.n)]
    terms += [(ix[name], float(c)) for name, c in flow_cost_pairs(inst, opts)]
    return terms


# ---------------------------------------------------------------------------
# builders


def build_nc(inst: Instance, opts: ModelOptions = ModelOptions()) -> LinearModel:
    """Deterministic base model: eq2..eq7 with base setup costs."""
    model = LinearModel()
    _add_flow_variables(model, inst.n)
    _add_core_rows(model, inst)
    model.set_objective(_cost_terms(model, inst, opts, inst.setup))
    return model


def build_scenario_deterministic(inst: Instance, s: int,
                                 opts: ModelOptions = ModelOptions()) -> LinearModel:
    """Base model priced with the scenario-s effective setup F + sigma^s."""
    if not (0 <= s < inst.num_scenarios):
        raise FormulationError(f"scenario index {s} out of range")
    model = LinearModel()
    _add_flow_variables(model, inst.n)
    _add_core_rows(model, inst)
    model.set_objective(_cost_terms(model, inst, opts, inst.effective_setup(s)))
    return model


def build_cc(inst: Instance, opts: ModelOptions = ModelOptions()) -> LinearModel:
    """Worst-case model: minimize t subject to t >= scenario cost for all s."""
    model = LinearModel()
    _add_flow_variables(model, inst.n)
    t = model.add_variable("t", CONTINUOUS, -INF, INF)
    _add_core_rows(model, inst)
    for s in range(inst.num_scenarios):
        terms = _cost_terms(model, inst, opts, inst.effective_setup(s))
        terms.append((t, -1.0))
        model.add_constraint(f"eq10[s={s}]", terms, LE, 0.0)
    model.set_objective([(t, 1.0)])
    return model


def _baseline_values(inst: Instance, baselines) -> list[float]:
    values = getattr(baselines, "values", baselines)
    values = [float(v) for v in values]
    if len(values) != inst.num_scenarios:
        raise FormulationError(
            f"got {len(values)} baselines for {inst.num_scenarios} scenarios")
    return values


def build_ccu(inst: Instance, baselines,
              opts: ModelOptions = ModelOptions()) -> LinearModel:
    """Max-regret model: minimize R with R >= scenario cost - baseline."""
    base = _baseline_values(inst, baselines)
    model = LinearModel()
    _add_flow_variables(model, inst.n)
    for s in range(inst.num_scenarios):
        model.add_variable(f"Rs[{s}]", CONTINUOUS, -INF, INF)
    r_var = model.add_variable("R", CONTINUOUS, -INF, INF)
    _add_core_rows(model, inst)
    for s in range(inst.num_scenarios):
        terms = _cost_terms(model, inst, opts, inst.effective_setup(s))
        terms.append((model.name_index[f"Rs[{s}]"], -1.0))
        model.add_constraint(f"eq12[s={s}]", terms, EQ, base[s])
    for s in range(inst.num_scenarios):
        model.add_constraint(f"eq13[s={s}]",
                             [(r_var, 1.0), (model.name_index[f"Rs[{s}]"], -1.0)],
                             GE, 0.0)
    model.set_objective([(r_var, 1.0)])
    return model


def coupling_patterns(inst: Instance) -> dict[str, list[tuple]]:
    """Index tuples for each big-M family, expanded over all ordered pairs
    of distinct chains and deduplicated."""
    chains = [sorted(set(ch)) for ch in inst.chains]
    pairs = [(a, b) for a in range(len(chains)) for b in range(len(chains))
             if a != b]
    eq16, eq17, eq18, eq19, eq20 = set(), set(), set(), set(), set()
    for a, b in pairs:
        ca, cb = chains[a], chains[b]
        for i in ca:
            for k in cb:
                eq16.add((i, k))
            for k in cb:
                for l in cb:
                    eq20.add((i, k, l))
            for j in ca:
                for l in cb:
                    eq17.add((i, j, l))
            for k in ca:
                for l in cb:
                    eq18.add((i, k, l))
            for l in ca:
                for k in cb:
                    eq19.add((i, k, l))
    return {"eq16": sorted(eq16), "eq17": sorted(eq17), "eq18": sorted(eq18),
            "eq19": sorted(eq19), "eq20": sorted(eq20)}


def compute_big_m(inst: Instance, constraint: str, indices: tuple,
                  mode: str = "per-constraint-tight") -> float:
    """Deactivation bound M for one coupling row.

    Tight mode returns the smallest bound the flow variable can reach in a
    cycle-free feasible point: the origin supply O_i for collection and
    transfer rows, the single demand W[i, j] for distribution rows.
    """
    if constraint not in COUPLING_FAMILIES:
        raise ValueError(f"unknown coupling family {constraint!r}")
    if mode == "total-demand":
        return float(inst.demand.sum())
    if mode != "per-constraint-tight":
        raise ValueError(f"unknown big-M mode {mode!r}")
    if constraint == "eq17":
        i, j, _ = indices
        return float(inst.demand[i, j])
    i = indices[0]
    return origin_supply(inst, i)


def _add_coupling_rows(model: LinearModel, inst: Instance, opts: ModelOptions,
                       families) -> None:
    ix = model.name_index
    patterns = coupling_patterns(inst)
    if "eq15" in families:
        for k in range(inst.n):
            model.add_constraint(
                f"eq15[k={k}]",
                [(ix[f"H[{k}]"], 1.0), (ix[f"I[{k}]"], -1.0), (ix[f"T[{k}]"], -1.0)],
                EQ, 0.0)
    for i, k in patterns["eq16"] if "eq16" in families else ():
        m = compute_big_m(inst, "eq16", (i, k), opts.big_m_mode)
        model.add_constraint(f"eq16[i={i},k={k}]",
                             [(ix[f"Z[{i},{k}]"], 1.0), (ix[f"T[{k}]"], m)], LE, m)
    for i, j, l in patterns["eq17"] if "eq17" in families else ():
        m = compute_big_m(inst, "eq17", (i, j, l), opts.big_m_mode)
        model.add_constraint(f"eq17[i={i},j={j},l={l}]",
                             [(ix[f"X[{i},{l},{j}]"], 1.0), (ix[f"T[{l}]"], m)], LE, m)
    for i, k, l in patterns["eq18"] if "eq18" in families else ():
        m = compute_big_m(inst, "eq18", (i, k, l), opts.big_m_mode)
        model.add_constraint(f"eq18[i={i},k={k},l={l}]",
                             [(ix[f"Y[{i},{k},{l}]"], 1.0), (ix[f"T[{l}]"], m)], LE, m)
    for i, k, l in patterns["eq19"] if "eq19" in families else ():
        m = compute_big_m(inst, "eq19", (i, k, l), opts.big_m_mode)
        model.add_constraint(f"eq19[i={i},k={k},l={l}]",
                             [(ix[f"Y[{i},{k},{l}]"], 1.0), (ix[f"T[{k}]"], m)], LE, m)
    if "eq20" in families and opts.eq20_mode == "linearized":
        for i, k, l in patterns["eq20"]:
            m = compute_big_m(inst, "eq20", (i, k, l), opts.big_m_mode)
            y = ix[f"Y[{i},{k},{l}]"]
            model.add_constraint(f"eq20[i={i},k={k},l={l},side=k]",
                                 [(y, 1.0), (ix[f"T[{k}]"], m)], LE, m)
            model.add_constraint(f"eq20[i={i},k={k},l={l},side=l]",
                                 [(y, 1.0), (ix[f"T[{l}]"], m)], LE, m)


def _build_ocu(inst: Instance, baselines, opts: ModelOptions,
               families) -> LinearModel:
    base = _baseline_values(inst, baselines)
    model = LinearModel()
    _add_flow_variables(model, inst.n)
    for s in range(inst.num_scenarios):
        model.add_variable(f"Rs[{s}]", CONTINUOUS, -INF, INF)
    r_var = model.add_variable("R", CONTINUOUS, -INF, INF)
    for k in range(inst.n):
        model.add_variable(f"I[{k}]", BINARY)
    for k in range(inst.n):
        model.add_variable(f"T[{k}]", BINARY)
    _add_core_rows(model, inst)
    ix = model.name_index
    setup_var = "H" if opts.ocu_objective == "as-written" else "I"
    for s in range(inst.num_scenarios):
        terms = _cost_terms(model, inst, opts, inst.effective_setup(s), setup_var)
        terms += [(ix[f"T[{k}]"], float(inst.setup[k])) for k in range(inst.n)]
        terms.append((ix[f"Rs[{s}]"], -1.0))
        model.add_constraint(f"eq21[s={s}]", terms, EQ, base[s])
    for s in range(inst.num_scenarios):
        model.add_constraint(f"eq13[s={s}]",
                             [(r_var, 1.0), (ix[f"Rs[{s}]"], -1.0)], GE, 0.0)
    _add_coupling_rows(model, inst, opts, families)
    model.set_objective([(r_var, 1.0)])
    return model


def build_ocu(inst: Instance, baselines,
              opts: ModelOptions = ModelOptions()) -> LinearModel:
    """Max-regret model with the collaborative/non-collaborative hub split
    and big-M rows blocking cross-chain use of non-collaborative hubs."""
    if len(inst.chains) < 2:
        raise FormulationError(
            "at least two supply chains required for the collaboration model")
    return _build_ocu(inst, baselines, opts,
                      families=("eq15",) + COUPLING_FAMILIES)


def build_coupling_polytope(inst: Instance, opts: ModelOptions = ModelOptions(),
                            include_eq20: bool = False) -> LinearModel:
    """Flow polytope eq2..eq7 plus the hub-split rows eq15..eq19 (and
    optionally eq20), with no regret machinery and a zero objective.

    Used by redundancy probes that maximize a single flow variable under a
    fixed binary pattern.
    """
    if len(inst.chains) < 2:
        raise FormulationError(
            "at least two supply chains required for the collaboration model")
    model = LinearModel()
    _add_flow_variables(model, inst.n)
    for k in range(inst.n):
        model.add_variable(f"I[{k}]", BINARY)
    for k in range(inst.n):
        model.add_variable(f"T[{k}]", BINARY)
    _add_core_rows(model, inst)
    families = ["eq15", "eq16", "eq17", "eq18", "eq19"]
    if include_eq20:
        families.append("eq20")
    _add_coupling_rows(model, inst, opts, families)
    model.set_objective([])
    return model

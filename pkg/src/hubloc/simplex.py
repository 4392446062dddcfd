"""Dense two-phase simplex for the LP relaxations.

The solver loads a :class:`~hubloc.model.LinearModel` into an internal
standard form (nonnegative, possibly upper-bounded columns and equality
rows), runs phase 1 with artificial variables, then phase 2 with Dantzig
pricing and a Bland fallback once degeneracy stalls progress.  Free
variables are split into differences of nonnegative columns at load time.

The load step also substitutes variables whose effective bounds pin them
to a single value and turns single-variable rows into bounds.  This keeps
branch-and-bound node LPs small.  It is a pure function of the inputs, so
:func:`verify_certificate` can rebuild the identical standard form and
recheck a result's basis with independent linear algebra.

Tolerances: feasibility 1e-7, optimality 1e-7, zero pivot 1e-10.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .model import BINARY, EQ, GE, LE, LinearModel

FEAS_TOL = 1e-7
OPT_TOL = 1e-7
PIVOT_TOL = 1e-9
ZERO_PIVOT = 1e-10
BOUND_TOL = 1e-9

NB_LOWER, NB_UPPER, BASIC = 0, 1, 2

COL_SHIFT, COL_SPLIT_POS, COL_SPLIT_NEG, COL_MIRROR, COL_SLACK, COL_ART = range(6)


class SimplexError(RuntimeError):
    """Numerical breakdown: anti-cycling could not make progress in time."""


@dataclass
class LPResult:
    """Outcome of one LP solve.

    ``basis`` and ``vstatus`` describe the final standard-form basis so a
    certificate check can replay it.  ``x`` holds values for the original
    model variables (None unless optimal).
    """

    status: str
    x: np.ndarray | None
    objective: float | None
    basis: np.ndarray
    vstatus: np.ndarray
    reduced_costs: np.ndarray | None
    iterations: int
    relax_binaries: bool = True
    extra_bounds: dict | None = None


@dataclass
class StandardForm:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    ub: np.ndarray
    col_kind: np.ndarray
    col_ref: np.ndarray
    art_mask: np.ndarray
    init_basis: np.ndarray
    row_ids: list[int]
    fixed: np.ndarray
    red_lo: np.ndarray
    red_hi: np.ndarray
    eff_lo: np.ndarray
    eff_hi: np.ndarray
    infeasible_msg: str | None = None


def effective_bounds(model: LinearModel, relax_binaries: bool,
                     extra_bounds: dict | None) -> tuple[np.ndarray, np.ndarray]:
    """Variable bounds after binary relaxation and per-variable overrides."""
    lo = np.array([v.lb for v in model.variables], dtype=float)
    hi = np.array([v.ub for v in model.variables], dtype=float)
    if extra_bounds:
        for j, (l, u) in extra_bounds.items():
            lo[j] = max(lo[j], l)
            hi[j] = min(hi[j], u)
    return lo, hi


def _standardize(model: LinearModel, relax_binaries: bool,
                 extra_bounds: dict | None) -> StandardForm:
    n = model.num_variables
    lo, hi = effective_bounds(model, relax_binaries, extra_bounds)
    eff_lo, eff_hi = lo.copy(), hi.copy()

    def bad(msg):
        return StandardForm(
            A=np.zeros((0, 0)), b=np.zeros(0), c=np.zeros(0), ub=np.zeros(0),
            col_kind=np.zeros(0, int), col_ref=np.zeros(0, int),
            art_mask=np.zeros(0, bool), init_basis=np.zeros(0, int),
            row_ids=[], fixed=np.full(n, np.nan), red_lo=lo, red_hi=hi,
            eff_lo=eff_lo, eff_hi=eff_hi, infeasible_msg=msg)

    rows, rhs, rel, live = [], [], [], []
    for con in model.constraints:
        acc: dict[int, float] = {}
        for j, c in con.terms:
            acc[j] = acc.get(j, 0.0) + c
        rows.append({j: c for j, c in acc.items() if c != 0.0})
        rhs.append(con.rhs)
        rel.append(con.relation)
        live.append(True)

    fixed = np.full(n, np.nan)
    while True:
        changed = False
        for j in range(n):
            if not np.isnan(fixed[j]):
                continue
            if lo[j] > hi[j] + FEAS_TOL:
                return bad(f"empty bound interval for {model.variables[j].name}")
            if hi[j] - lo[j] <= 1e-12:
                fixed[j] = 0.5 * (lo[j] + hi[j])
                changed = True
        for i, row in enumerate(rows):
            if not live[i]:
                continue
            for j in [j for j in row if not np.isnan(fixed[j])]:
                rhs[i] -= row.pop(j) * fixed[j]
            if not row:
                r = rhs[i]
                ok = (abs(r) <= FEAS_TOL if rel[i] == EQ
                      else r >= -FEAS_TOL if rel[i] == LE else r <= FEAS_TOL)
                if not ok:
                    return bad(f"constraint {model.constraints[i].label} "
                               f"unsatisfiable after fixing")
                live[i] = False
                changed = True
            elif len(row) == 1:
                (j, a), = row.items()
                v = rhs[i] / a
                sense = rel[i] if a > 0 else {LE: GE, GE: LE, EQ: EQ}[rel[i]]
                if sense in (LE, EQ):
                    hi[j] = min(hi[j], v)
                if sense in (GE, EQ):
                    lo[j] = max(lo[j], v)
                live[i] = False
                changed = True
        if not changed:
            break

    if not relax_binaries:
        loose = [v.name for j, v in enumerate(model.variables)
                 if v.kind == BINARY and np.isnan(fixed[j])]
        if loose:
            raise ValueError(f"binary variable {loose[0]} is not fixed and "
                             f"relax_binaries is off")

    # column layout: structural (in variable order), slacks, artificials
    col_kind, col_ref, col_of = [], [], {}
    for j in range(n):
        if not np.isnan(fixed[j]):
            continue
        if lo[j] == -math.inf and hi[j] == math.inf:
            col_of[j] = len(col_kind)
            col_kind += [COL_SPLIT_POS, COL_SPLIT_NEG]
            col_ref += [j, j]
        elif lo[j] == -math.inf:
            col_of[j] = len(col_kind)
            col_kind.append(COL_MIRROR)
            col_ref.append(j)
        else:
            col_of[j] = len(col_kind)
            col_kind.append(COL_SHIFT)
            col_ref.append(j)

    row_ids = [i for i in range(len(rows)) if live[i]]
    m = len(row_ids)
    n_struct = len(col_kind)
    n_slack = sum(1 for i in row_ids if rel[i] != EQ)
    A = np.zeros((m, n_struct + n_slack))
    b = np.zeros(m)
    slack_col = n_struct
    slack_of_row = {}
    for r, i in enumerate(row_ids):
        bi = rhs[i]
        for j, a in sorted(rows[i].items()):
            k = col_of[j]
            if col_kind[k] == COL_SHIFT:
                A[r, k] = a
                bi -= a * lo[j]
            elif col_kind[k] == COL_MIRROR:
                A[r, k] = -a
                bi -= a * hi[j]
            else:
                A[r, k] = a
                A[r, k + 1] = -a
        if rel[i] != EQ:
            A[r, slack_col] = 1.0 if rel[i] == LE else -1.0
            slack_of_row[r] = slack_col
            slack_col += 1
        b[r] = bi
    col_kind += [COL_SLACK] * n_slack
    col_ref += [row_ids[r] for r in sorted(slack_of_row)]

    # flip rows to make rhs nonnegative, then pick slack or artificial basis
    init_basis = np.full(m, -1, dtype=int)
    art_rows = []
    for r in range(m):
        if b[r] < 0:
            A[r] *= -1.0
            b[r] *= -1.0
        sc = slack_of_row.get(r)
        if sc is not None and A[r, sc] == 1.0:
            init_basis[r] = sc
        else:
            art_rows.append(r)
    n_art = len(art_rows)
    if n_art:
        A = np.hstack([A, np.zeros((m, n_art))])
        for t, r in enumerate(art_rows):
            col = n_struct + n_slack + t
            A[r, col] = 1.0
            init_basis[r] = col
            col_kind.append(COL_ART)
            col_ref.append(row_ids[r])

    ncols = A.shape[1]
    col_kind = np.array(col_kind, dtype=int)
    col_ref = np.array(col_ref, dtype=int)
    art_mask = col_kind == COL_ART
    cvec = model.objective_vector()
    c = np.zeros(ncols)
    ub = np.full(ncols, math.inf)
    for k in range(ncols):
        kind, ref = col_kind[k], col_ref[k]
        if kind == COL_SHIFT:
            c[k] = cvec[ref]
            ub[k] = hi[ref] - lo[ref]
        elif kind == COL_SPLIT_POS:
            c[k] = cvec[ref]
        elif kind == COL_SPLIT_NEG:
            c[k] = -cvec[ref]
        elif kind == COL_MIRROR:
            c[k] = -cvec[ref]

    return StandardForm(A=A, b=b, c=c, ub=ub, col_kind=col_kind,
                        col_ref=col_ref, art_mask=art_mask,
                        init_basis=init_basis, row_ids=row_ids, fixed=fixed,
                        red_lo=lo, red_hi=hi, eff_lo=eff_lo, eff_hi=eff_hi)


def _iterate(T, xB, basis, status, ub, d, maxit, start_iter, allow_unbounded):
    """Run simplex pivots until optimal/unbounded; returns (outcome, iters)."""
    m, ncols = T.shape
    it = start_iter
    stall = 0
    bland = False
    while True:
        elig_lo = (status == NB_LOWER) & (d < -OPT_TOL) & (ub > 0)
        elig_up = (status == NB_UPPER) & (d > OPT_TOL) & (ub > 0)
        if not elig_lo.any() and not elig_up.any():
            return "optimal", it
        if it - start_iter >= maxit:
            raise SimplexError(
                f"numerical breakdown: no progress within {maxit} pivots")
        if bland:
            cand = np.nonzero(elig_lo | elig_up)[0]
            q = int(cand[0])
        else:
            score = np.where(elig_lo, -d, np.where(elig_up, d, -math.inf))
            q = int(np.argmax(score))
        sigma = 1.0 if status[q] == NB_LOWER else -1.0
        scol = sigma * T[:, q]

        lims = np.full(m, math.inf)
        if m:
            pos = scol > PIVOT_TOL
            np.divide(np.maximum(xB, 0.0), scol, out=lims, where=pos)
            ubB = ub[basis]
            neg = (scol < -PIVOT_TOL) & np.isfinite(ubB)
            if neg.any():
                room = np.maximum(ubB - xB, 0.0)
                lims[neg] = np.minimum(lims[neg], room[neg] / -scol[neg])
        step_basic = float(lims.min()) if m else math.inf
        step = min(step_basic, ub[q])
        if step == math.inf:
            if not allow_unbounded:
                raise SimplexError("numerical breakdown: phase-1 ray")
            return "unbounded", it

        it += 1
        stall = stall + 1 if step <= 1e-12 else 0
        if stall >= m + ncols:
            bland = True
        elif step > 1e-12:
            bland = False

        if step_basic > ub[q] + 1e-12:
            # bound flip, basis unchanged
            xB -= sigma * ub[q] * T[:, q]
            status[q] = NB_UPPER if status[q] == NB_LOWER else NB_LOWER
            continue

        achievers = np.nonzero(lims <= step + 1e-9)[0]
        if bland:
            r = int(achievers[np.argmin(basis[achievers])])
        else:
            # prefer the numerically largest pivot among the blockers
            r = int(achievers[np.argmax(np.abs(scol[achievers]))])
        p = basis[r]
        enter_val = (0.0 if status[q] == NB_LOWER else ub[q]) + sigma * step
        if enter_val < 0.0:
            enter_val = 0.0
        xB -= sigma * step * T[:, q]
        status[p] = NB_LOWER if scol[r] > 0 else NB_UPPER
        piv = T[r, q]
        if abs(piv) <= ZERO_PIVOT:
            raise SimplexError(f"numerical breakdown: pivot {piv:.2e}")
        trow = T[r] / piv
        colq = T[:, q].copy()
        T -= np.outer(colq, trow)
        T[r] = trow
        d -= d[q] * trow
        d[q] = 0.0
        xB[r] = enter_val
        basis[r] = q
        status[q] = BASIC


def _refine_basics(A, b, basis, status, ub, xB):
    """Recompute basic values from a fresh factorization of the basis.

    Tableau updates accumulate roundoff over many pivots; one direct solve
    restores the basic values to machine accuracy for the final answer.
    """
    if basis.size == 0:
        return xB
    vals = np.where(status == NB_UPPER, np.where(np.isfinite(ub), ub, 0.0), 0.0)
    vals[basis] = 0.0
    rhs = b - A @ vals
    try:
        return np.linalg.solve(A[:, basis], rhs)
    except np.linalg.LinAlgError:
        return xB


def _values_from_state(sf: StandardForm, basis, status, xB) -> np.ndarray:
    ncols = sf.A.shape[1]
    vals = np.where(status == NB_UPPER, np.where(np.isfinite(sf.ub), sf.ub, 0.0), 0.0)
    vals[basis] = xB
    x = sf.fixed.copy()
    for k in range(ncols):
        kind, ref = sf.col_kind[k], sf.col_ref[k]
        if kind == COL_SHIFT:
            x[ref] = sf.red_lo[ref] + vals[k]
        elif kind == COL_SPLIT_POS:
            x[ref] = vals[k] - vals[k + 1]
        elif kind == COL_MIRROR:
            x[ref] = sf.red_hi[ref] - vals[k]
    return x


def solve_lp(model: LinearModel, relax_binaries: bool = True,
             extra_bounds: dict | None = None,
             verbose: bool = False) -> LPResult:
    """Solve the LP (relaxation) of ``model``.

    ``extra_bounds`` maps variable index to an (lb, ub) pair intersected
    with the model bounds; branch-and-bound uses it to fix binaries.
    ``verbose`` logs one line per solve (phase sizes, pivots) to stderr.
    """
    sf = _standardize(model, relax_binaries, extra_bounds)
    ctx = dict(relax_binaries=relax_binaries,
               extra_bounds=dict(extra_bounds) if extra_bounds else None)
    if sf.infeasible_msg is not None:
        return LPResult("infeasible", None, None, np.zeros(0, int),
                        np.zeros(0, int), None, 0, **ctx)

    m, ncols = sf.A.shape
    T = sf.A.copy()
    xB = sf.b.copy()
    basis = sf.init_basis.copy()
    status = np.full(ncols, NB_LOWER, dtype=int)
    status[basis] = BASIC
    ub = sf.ub.copy()
    maxit = 50 * (m + ncols)
    iters = 0

    if sf.art_mask.any():
        c1 = sf.art_mask.astype(float)
        d = c1 - c1[basis] @ T
        _, iters = _iterate(T, xB, basis, status, ub, d, maxit, iters,
                            allow_unbounded=False)
        xB = _refine_basics(sf.A, sf.b, basis, status, ub, xB)
        infeas = float(c1[basis] @ np.maximum(xB, 0.0))
        if infeas > FEAS_TOL:
            return LPResult("infeasible", None, None, basis, status, None,
                            iters, **ctx)
        # pin artificials at zero; any still basic stay caged degenerate
        ub[sf.art_mask] = 0.0

    d = sf.c - sf.c[basis] @ T
    outcome, iters = _iterate(T, xB, basis, status, ub, d, maxit, iters,
                              allow_unbounded=True)
    if outcome == "unbounded":
        return LPResult("unbounded", None, None, basis, status, d, iters, **ctx)

    xB = _refine_basics(sf.A, sf.b, basis, status, ub, xB)
    x = _values_from_state(sf, basis, status, xB)
    objective = float(model.objective_vector() @ x)
    _self_check(model, sf, x)
    if verbose:
        print(f"lp: optimal obj={objective:.9g} rows={m} cols={ncols} "
              f"pivots={iters}", file=sys.stderr)
    return LPResult("optimal", x, objective, basis.copy(), status.copy(),
                    d.copy(), iters, **ctx)


def _self_check(model: LinearModel, sf: StandardForm, x: np.ndarray) -> None:
    for con in model.constraints:
        act = sum(c * x[j] for j, c in con.terms)
        err = (abs(act - con.rhs) if con.relation == EQ
               else act - con.rhs if con.relation == LE else con.rhs - act)
        if err > 10 * FEAS_TOL:
            raise SimplexError(
                f"numerical breakdown: residual {err:.2e} on {con.label}")


@dataclass
class CertificateReport:
    passed: bool
    failures: list[str] = field(default_factory=list)
    max_row_violation: float = 0.0
    max_bound_violation: float = 0.0
    min_reduced_cost: float = 0.0
    objective_error: float = 0.0


def verify_certificate(model: LinearModel, result: LPResult,
                       feastol: float = FEAS_TOL,
                       dualtol: float = OPT_TOL) -> CertificateReport:
    """Recheck an optimal LP result without trusting solver internals.

    Primal residuals are measured against the original rows and bounds;
    reduced costs are recomputed from the reported basis by rebuilding
    the standard form and solving ``B^T y = c_B`` afresh.
    """
    if result.status != "optimal":
        raise ValueError("certificate replay requires an optimal result")
    rep = CertificateReport(passed=True)
    x = result.x
    for con in model.constraints:
        act = sum(c * x[j] for j, c in con.terms)
        err = (abs(act - con.rhs) if con.relation == EQ
               else act - con.rhs if con.relation == LE else con.rhs - act)
        rep.max_row_violation = max(rep.max_row_violation, err)
        if err > feastol:
            rep.failures.append(f"row {con.label}: violated by {err:.3e}")
    lo, hi = effective_bounds(model, result.relax_binaries, result.extra_bounds)
    for j, var in enumerate(model.variables):
        err = max(lo[j] - x[j], x[j] - hi[j])
        rep.max_bound_violation = max(rep.max_bound_violation, err)
        if err > BOUND_TOL:
            rep.failures.append(f"bound {var.name}: violated by {err:.3e}")
    obj = float(model.objective_vector() @ x)
    rep.objective_error = abs(obj - result.objective)
    if rep.objective_error > feastol * max(1.0, abs(obj)):
        rep.failures.append(f"objective mismatch {rep.objective_error:.3e}")

    sf = _standardize(model, result.relax_binaries, result.extra_bounds)
    basis = result.basis
    if sf.infeasible_msg is None and basis.size:
        B = sf.A[:, basis]
        try:
            y = np.linalg.solve(B.T, sf.c[basis])
        except np.linalg.LinAlgError:
            rep.failures.append("singular basis matrix")
            rep.passed = False
            return rep
        d = sf.c - sf.A.T @ y
        rep.min_reduced_cost = float(d.min()) if d.size else 0.0
        for k in range(sf.A.shape[1]):
            if sf.art_mask[k] or result.vstatus[k] == BASIC:
                continue
            if result.vstatus[k] == NB_LOWER and d[k] < -dualtol:
                rep.failures.append(
                    f"reduced cost {d[k]:.3e} at lower bound (column {k})")
            elif result.vstatus[k] == NB_UPPER and d[k] > dualtol:
                rep.failures.append(
                    f"reduced cost {d[k]:.3e} at upper bound (column {k})")
    rep.passed = not rep.failures
    return rep

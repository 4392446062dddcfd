"""Differential checks against an external solver (optional).

These fuzz the LP and MILP engines against HiGHS via scipy on small random
problems with mixed bounds, free variables, and all three row relations.
They are an extra safety net on top of the enumeration oracle and skip
cleanly when scipy is not installed.
"""

import math

import numpy as np
import pytest

scipy_opt = pytest.importorskip("scipy.optimize")

from hubloc.milp import solve_by_enumeration, solve_milp
from hubloc.model import BINARY, EQ, GE, LE, LinearModel
from hubloc.simplex import solve_lp


def random_lp(rng):
    n = int(rng.integers(1, 9))
    m = int(rng.integers(0, 10))
    model = LinearModel()
    lo, hi = np.zeros(n), np.zeros(n)
    for j in range(n):
        kind = rng.integers(0, 4)
        if kind == 0:
            l, u = 0.0, math.inf
        elif kind == 1:
            l, u = -math.inf, math.inf
        elif kind == 2:
            l = float(np.round(rng.uniform(-5, 0), 2))
            u = float(np.round(rng.uniform(0, 5), 2))
        else:
            l, u = -math.inf, float(np.round(rng.uniform(0, 5), 2))
        lo[j], hi[j] = l, u
        model.add_variable(f"x{j}", lb=l, ub=u)
    A = np.round(rng.uniform(-3, 3, (m, n)) * (rng.random((m, n)) < 0.6), 2)
    b = np.round(rng.uniform(-4, 4, m), 2)
    rels = rng.integers(0, 3, m)
    for i in range(m):
        terms = [(j, A[i, j]) for j in range(n) if A[i, j] != 0]
        model.add_constraint(f"eq1[r{i}]", terms, [LE, GE, EQ][rels[i]],
                             float(b[i]))
    c = np.round(rng.uniform(-2, 2, n), 2)
    model.set_objective([(j, float(c[j])) for j in range(n)])
    return model, A, b, rels, c, lo, hi


def test_lp_agrees_with_reference_solver():
    rng = np.random.default_rng(0)
    for _ in range(80):
        model, A, b, rels, c, lo, hi = random_lp(rng)
        mine = solve_lp(model)
        A_ub, b_ub, A_eq, b_eq = [], [], [], []
        for i in range(len(b)):
            if rels[i] == 0:
                A_ub.append(A[i]); b_ub.append(b[i])
            elif rels[i] == 1:
                A_ub.append(-A[i]); b_ub.append(-b[i])
            else:
                A_eq.append(A[i]); b_eq.append(b[i])
        ref = scipy_opt.linprog(
            c, A_ub=np.array(A_ub) if A_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(A_eq) if A_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=list(zip(np.where(np.isinf(lo), None, lo),
                            np.where(np.isinf(hi), None, hi))),
            method="highs")
        ref_status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(
            ref.status, "other")
        assert mine.status == ref_status
        if mine.status == "optimal":
            assert mine.objective == pytest.approx(ref.fun, abs=1e-6, rel=1e-6)


def test_milp_agrees_with_reference_solver():
    rng = np.random.default_rng(1)
    for _ in range(40):
        n_bin = int(rng.integers(1, 6))
        n_cont = int(rng.integers(0, 5))
        n = n_bin + n_cont
        m = int(rng.integers(1, 8))
        model = LinearModel()
        for j in range(n_bin):
            model.add_variable(f"H[{j}]", BINARY)
        ubs = [1.0] * n_bin
        for j in range(n_cont):
            u = float(np.round(rng.uniform(1, 8), 2))
            ubs.append(u)
            model.add_variable(f"x{j}", lb=0.0, ub=u)
        A = np.round(rng.uniform(-3, 3, (m, n)) * (rng.random((m, n)) < 0.7), 2)
        b = np.round(rng.uniform(-2, 6, m), 2)
        rels = rng.integers(0, 3, m)
        for i in range(m):
            terms = [(j, A[i, j]) for j in range(n) if A[i, j] != 0]
            model.add_constraint(f"eq1[r{i}]", terms, [LE, GE, EQ][rels[i]],
                                 float(b[i]))
        c = np.round(rng.uniform(-3, 3, n), 2)
        model.set_objective([(j, float(c[j])) for j in range(n)])

        mine = solve_milp(model)
        oracle = solve_by_enumeration(model)
        assert mine.status == oracle.status
        if mine.status == "optimal":
            assert mine.objective == pytest.approx(oracle.objective, abs=1e-6,
                                                   rel=1e-6)

        lc = []
        for i in range(m):
            if rels[i] == 0:
                lc.append(scipy_opt.LinearConstraint(A[i], -np.inf, b[i]))
            elif rels[i] == 1:
                lc.append(scipy_opt.LinearConstraint(A[i], b[i], np.inf))
            else:
                lc.append(scipy_opt.LinearConstraint(A[i], b[i], b[i]))
        ref = scipy_opt.milp(c, constraints=lc,
                             integrality=[1] * n_bin + [0] * n_cont,
                             bounds=scipy_opt.Bounds(np.zeros(n), np.array(ubs)))
        if ref.status == 0:
            assert mine.status == "optimal"
            assert mine.objective == pytest.approx(ref.fun, abs=1e-6, rel=1e-6)
        elif ref.status == 2:
            assert mine.status == "infeasible"

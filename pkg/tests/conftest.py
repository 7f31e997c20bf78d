"""Shared helpers and independent oracles.

The oracles deliberately avoid the package's own linear algebra and LP
code: vertex enumeration uses a local Gaussian elimination, and infimal
norms are cross-checked with scipy's floating-point LP solver.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from polyamalgam.polyhedra import SemiNorm
from polyamalgam.spaces import LinearMap, MultiNormedSpace

settings.register_profile("exact", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("exact")

Q = Fraction


def qv(*xs):
    return tuple(Q(x) for x in xs)


def norm(dim, funcs):
    return SemiNorm(dim, [qv(*f) for f in funcs])


def space(dim, *levels, graded=None):
    lv = tuple(norm(dim, f) for f in levels)
    if graded is None:
        graded = True
    return MultiNormedSpace(dim, lv, graded)


def lmap(dom, cod, rows):
    return LinearMap(dom, cod, tuple(qv(*r) for r in rows))


LINF2 = [(1, 0), (0, 1)]
L12 = [(1, 1), (1, -1)]


# ---------------------------------------------------------------------------
# oracles


def gauss_solve(a, b):
    """Unique solution of the square system ``a x = b`` or None."""
    n = len(a)
    m = [list(map(Q, row)) + [Q(v)] for row, v in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return tuple(m[i][n] / m[i][i] for i in range(n))


def brute_vertices(funcs, dim, rhs=None):
    """Vertices of ``{x : <phi, x> <= b}`` by trying every ``dim``-subset of tight constraints."""
    rhs = rhs or [Q(1)] * len(funcs)
    out = set()
    for idx in itertools.combinations(range(len(funcs)), dim):
        x = gauss_solve([funcs[i] for i in idx], [rhs[i] for i in idx])
        if x is None:
            continue
        if all(sum(Q(p) * v for p, v in zip(phi, x)) <= b for phi, b in zip(funcs, rhs)):
            out.add(x)
    return out


def brute_norm_max(p_funcs, vertices):
    """``max p`` over a polytope given by its vertices."""
    return max(max(sum(Q(a) * b for a, b in zip(phi, v)) for phi in p_funcs) for v in vertices)


def float_infimal(parts, q, c):
    """``min sum w_k p_k(u_k)`` subject to ``q u = c``, by scipy's LP solver."""
    import numpy as np
    from scipy.optimize import linprog

    total = sum(p.dim for p, _ in parts)
    nparts = len(parts)
    nv = total + nparts
    cost = np.zeros(nv)
    a_ub, b_ub = [], []
    offset = 0
    for k, (p, w) in enumerate(parts):
        cost[total + k] = float(w)
        for phi in p.functionals:
            row = np.zeros(nv)
            row[offset:offset + p.dim] = [float(v) for v in phi]
            row[total + k] = -1.0
            a_ub.append(row)
            b_ub.append(0.0)
        offset += p.dim
    a_eq = np.array([[float(v) for v in row] + [0.0] * nparts for row in q])
    res = linprog(cost, A_ub=np.array(a_ub) if a_ub else None, b_ub=b_ub or None,
                  A_eq=a_eq, b_eq=[float(v) for v in c], bounds=[(None, None)] * nv,
                  method="highs")
    assert res.status == 0, res.message
    return res.fun


# ---------------------------------------------------------------------------
# strategies

small = st.integers(-3, 3).map(Q)


@st.composite
def functionals(draw, dim, count=None):
    n = draw(st.integers(1, 4)) if count is None else count
    return [tuple(draw(small) for _ in range(dim)) for _ in range(n)]


@st.composite
def kernel_free_norms(draw, dim):
    from polyamalgam.linalg import rank

    funcs = draw(functionals(dim))
    extra = [tuple(Q(1) if i == j else Q(0) for i in range(dim)) for j in range(dim)] \
        if rank(funcs, dim) < dim else []
    return SemiNorm(dim, funcs + extra)


@pytest.fixture
def rng():
    import random

    return random.Random(20240611)


# ---------------------------------------------------------------------------
# acceptance report

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

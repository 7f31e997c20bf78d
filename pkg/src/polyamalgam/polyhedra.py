"""Exact polyhedral kernel: linear programming, projection, pruning and
polyhedral semi-norms.

A polyhedral semi-norm is stored as the H-description of its unit ball,
``{x : <phi, x> <= 1 for every functional phi}``, with the functional list
closed under negation.  Its value at ``x`` is the largest ``<phi, x>``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

import cdd

from .linalg import ZERO, ONE, Vector, dot, nullspace, primitive, vec


class DimensionError(ValueError):
    """Lengths of vectors, functionals or matrices do not agree."""


class UnboundedBallError(ValueError):
    """A unit ball with a nontrivial kernel has no vertex description."""


# ---------------------------------------------------------------------------
# exact simplex


@dataclass
class _StandardResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    z: Vector = ()
    duals: Vector = ()
    ray: Vector = ()


def _pivot(tab: list[list[Fraction]], r: int, c: int) -> None:
    row = tab[r]
    p = row[c]
    if p != 1:
        row[:] = [v / p for v in row]
    for i, other in enumerate(tab):
        if i != r:
            f = other[c]
            if f:
                other[:] = [a - f * b for a, b in zip(other, row)]


def _reduced_costs(tab, basis, cost, ncols):
    out = list(cost[:ncols])
    for i, b in enumerate(basis):
        cb = cost[b]
        if cb:
            row = tab[i]
            for j in range(ncols):
                if row[j]:
                    out[j] -= cb * row[j]
    return out


def _run(tab, basis, cost, n_real) -> int | None:
    """Bland-rule simplex on ``tab``; returns an unbounded column or ``None``."""
    rhs = len(tab[0]) - 1
    while True:
        red = _reduced_costs(tab, basis, cost, n_real)
        enter = next((j for j in range(n_real) if red[j] < 0), None)
        if enter is None:
            return None
        best = None
        for i, row in enumerate(tab):
            a = row[enter]
            if a > 0:
                ratio = row[rhs] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return enter
        leave = best[1]
        _pivot(tab, leave, enter)
        basis[leave] = enter


def solve_standard(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction],
                   c: Sequence[Fraction]) -> _StandardResult:
    """Minimize ``c.z`` subject to ``a z = b`` and ``z >= 0``.

    On optimality ``duals`` is a vector ``y`` with ``c - a^T y >= 0`` and
    ``y.b = c.z``.  On infeasibility ``duals`` is a Farkas vector ``y`` with
    ``a^T y <= 0`` and ``y.b > 0``.  On unboundedness ``ray`` is a
    nonnegative ``dz`` with ``a dz = 0`` and ``c.dz < 0``.
    """
    m = len(b)
    n = len(c)
    if m == 0:
        neg = next((j for j in range(n) if Fraction(c[j]) < 0), None)
        if neg is not None:
            return _StandardResult("unbounded", ray=tuple(ONE if j == neg else ZERO for j in range(n)))
        return _StandardResult("optimal", z=(ZERO,) * n, duals=())
    signs = [ONE if Fraction(bi) >= 0 else -ONE for bi in b]
    tab: list[list[Fraction]] = []
    for i in range(m):
        s = signs[i]
        row = [s * Fraction(v) for v in a[i]]
        row += [ONE if k == i else ZERO for k in range(m)]
        row.append(s * Fraction(b[i]))
        tab.append(row)
    basis = [n + i for i in range(m)]
    total = n + m

    def duals_from(cost):
        yf = [sum((cost[basis[i]] * tab[i][n + k] for i in range(m)), ZERO) for k in range(m)]
        return tuple(signs[k] * yf[k] for k in range(m))

    # phase 1: minimize the sum of artificials
    cost1 = [ZERO] * n + [ONE] * m
    _run(tab, basis, cost1, n)
    phase1 = sum((tab[i][total] for i in range(m) if basis[i] >= n), ZERO)
    if phase1 > 0:
        return _StandardResult("infeasible", duals=duals_from(cost1))

    # drive zero-level artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if tab[i][j] != 0), None)
            if col is not None:
                _pivot(tab, i, col)
                basis[i] = col

    cost2 = [Fraction(v) for v in c] + [ZERO] * m
    enter = _run(tab, basis, cost2, n)
    if enter is not None:
        dz = [ZERO] * n
        dz[enter] = ONE
        for i in range(m):
            if basis[i] < n:
                dz[basis[i]] = -tab[i][enter]
        return _StandardResult("unbounded", ray=tuple(dz))
    z = [ZERO] * n
    for i in range(m):
        if basis[i] < n:
            z[basis[i]] = tab[i][total]
    return _StandardResult("optimal", z=tuple(z), duals=duals_from(cost2))


# ---------------------------------------------------------------------------
# H-polyhedra and linear programs


@dataclass(frozen=True)
class HPolyhedron:
    """``{x in Q^dim : <phi, x> <= b for every (phi, b)}``."""

    dim: int
    constraints: tuple[tuple[Vector, Fraction], ...] = ()

    def __post_init__(self):
        cons = tuple((vec(phi), Fraction(b)) for phi, b in self.constraints)
        for phi, _ in cons:
            if len(phi) != self.dim:
                raise DimensionError(f"constraint of length {len(phi)} in dimension {self.dim}")
        object.__setattr__(self, "constraints", cons)

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(dot(phi, x) <= b for phi, b in self.constraints)

    @cached_property
    def integer_rows(self) -> tuple[tuple[list[int], int, int], ...]:
        """Each constraint as ``(a, b, scale)``: integers equal to ``scale`` times the original."""
        out = []
        for phi, b in self.constraints:
            ints, scale = _integer_vector(tuple(phi) + (b,))
            out.append((ints[:-1], ints[-1], scale))
        return tuple(out)


@dataclass(frozen=True)
class LPResult:
    """Outcome of :func:`lp_optimize`.

    ``status`` is ``"optimum"``, ``"unbounded"`` or ``"infeasible"``.  An
    optimum carries ``value``, the attaining ``point`` and nonnegative
    ``multipliers`` (one per constraint) whose combination of constraint
    functionals equals the objective; these prove the bound.  An unbounded
    result carries a feasible ``point`` and an improving ``ray``.
    """

    status: str
    value: Fraction | None = None
    point: Vector | None = None
    ray: Vector | None = None
    multipliers: Vector | None = None


def lp_optimize(objective: Sequence[Fraction], region: HPolyhedron) -> LPResult:
    """Maximize ``<objective, x>`` over ``region`` exactly.

    The dual problem ``min b.lam`` subject to ``A^T lam = objective``,
    ``lam >= 0`` is solved by the simplex method with Bland's rule; its
    simplex multipliers are the primal optimum.  Regions with many
    constraints are first attacked by constraint generation (see
    :func:`_lp_generated`), which returns the same optimum.
    """
    phi = vec(objective)
    d = region.dim
    if len(phi) != d:
        raise DimensionError(f"objective of length {len(phi)} in dimension {d}")
    if len(region.constraints) > GENERATION_THRESHOLD * max(d, 1):
        res = _lp_generated(phi, region)
        if res is not None:
            return res
    return _lp_full(phi, region)


GENERATION_THRESHOLD = 4


def _lp_generated(phi: Vector, region: HPolyhedron) -> LPResult | None:
    """Solve on a growing subset of constraints; ``None`` means fall back.

    The dual ``min b.lam, A^T lam = phi, lam >= 0`` is kept as one tableau
    whose first ``d`` columns are the artificials, so they hold the basis
    inverse and a new constraint enters as one more column without a
    restart.  A subset optimum whose point satisfies every constraint is
    optimal for the whole region: the subset multipliers, padded with zeros,
    are dual feasible with the same value.  Otherwise the most violated
    constraints (or, while the subset problem is unbounded, those cutting
    its ray) join.

    Everything runs on integers: columns are the integer-scaled constraint
    rows, the right-hand side is ``phi`` times its common denominator, and
    each tableau row is an integer list over its own positive denominator.
    The two cost rows (auxiliary and true) ride along as extra rows.
    """
    cons = region.constraints
    rows = region.integer_rows
    d = region.dim
    n = len(cons)
    obj, obj_den = _integer_vector(phi)
    signs = [1 if v >= 0 else -1 for v in obj]
    # layout per row: d artificial entries, rhs, then one entry per added column
    tab = [[int(k == i) for k in range(d)] + [signs[i] * obj[i]] for i in range(d)]
    dens = [1] * d
    # reduced-cost rows for the auxiliary and the true objective
    cost_rows = [[0] * d + [-sum(abs(v) for v in obj)], [0] * (d + 1)]
    cost_dens = [1, 1]
    art_cost = (1, 0)
    basis = list(range(d))
    cols: list[int] = []
    rhs = d

    def add(j):
        a = [signs[k] * rows[j][0][k] for k in range(d)]
        for row in tab:
            row.append(sum(row[k] * a[k] for k in range(d) if row[k]))
        for k, cost_row in enumerate(cost_rows):
            den, art = cost_dens[k], art_cost[k]
            # reduced cost c - y.a with y = art - cost_row[:d] / den
            c = rows[j][1] * den if k == 1 else 0
            cost_row.append(c - sum((art * den - cost_row[i]) * a[i] for i in range(d)))
        cols.append(j)

    def pivot(r, c):
        if tab[r][c] < 0:
            tab[r] = [-v for v in tab[r]]
        dens[r] = tab[r][c]
        _shrink(tab, dens, r)
        pivot_row, p = tab[r], tab[r][c]
        for i in range(d):
            f = tab[i][c]
            if i != r and f:
                tab[i] = [x * p - f * y for x, y in zip(tab[i], pivot_row)]
                dens[i] *= p
                _shrink(tab, dens, i)
        for k, cost_row in enumerate(cost_rows):
            f = cost_row[c]
            if f:
                cost_rows[k] = [x * p - f * y for x, y in zip(cost_row, pivot_row)]
                cost_dens[k] *= p
                _shrink(cost_rows, cost_dens, k)
        basis[r] = c

    def run(k):
        while True:
            cost_row = cost_rows[k]
            enter = next((pos for pos in range(d + 1, d + 1 + len(cols)) if cost_row[pos] < 0), None)
            if enter is None:
                return None
            best = None
            for i, row in enumerate(tab):
                a = row[enter]
                if a > 0:
                    if best is None:
                        best = i
                        continue
                    b = tab[best]
                    mine, theirs = row[rhs] * b[enter], b[rhs] * a
                    if mine < theirs or (mine == theirs and basis[i] < basis[best]):
                        best = i
            if best is None:
                return enter
            pivot(best, enter)

    def dual_point(k):
        den, art = cost_dens[k], art_cost[k]
        return tuple(Fraction(signs[i] * (art * den - cost_rows[k][i]), den) for i in range(d))

    ranked = sorted((j for j in range(n) if rows[j][1] > 0),
                    key=lambda j: (-sum(a * o for a, o in zip(rows[j][0], obj)) / rows[j][1], j))
    for j in sorted(ranked[:2 * d]):
        add(j)
    phase = 1
    while True:
        if phase == 1:
            run(0)
            if cost_rows[0][rhs] < 0:
                direction, _ = _integer_vector(dual_point(0))
                gains = {j: Fraction(sum(a * r for a, r in zip(rows[j][0], direction)), rows[j][2])
                         for j in range(n) if j not in cols}
                worst = sorted((j for j, g in gains.items() if g > 0), key=lambda j: (-gains[j], j))
                if not worst:
                    return None
                for j in sorted(worst[:max(d, 1)]):
                    add(j)
                continue
            for i in range(d):
                if basis[i] < d:
                    pos = next((p for p in range(d + 1, d + 1 + len(cols)) if tab[i][p] != 0), None)
                    if pos is None:
                        return None
                    pivot(i, pos)
            phase = 2
        if run(1) is not None:
            return None
        point = dual_point(1)
        scaled, den = _integer_vector(point)
        excess = {}
        for j in range(n):
            a, b, scale = rows[j]
            num = sum(x * y for x, y in zip(a, scaled)) - b * den
            if num > 0:
                excess[j] = Fraction(num, scale)
        if not excess:
            full = [ZERO] * n
            for i, pos in enumerate(basis):
                j = cols[pos - d - 1]
                full[j] = Fraction(tab[i][rhs] * rows[j][2], dens[i] * obj_den)
            value = sum((full[j] * cons[j][1] for j in range(n) if full[j]), ZERO)
            return LPResult("optimum", value=value, point=point, multipliers=tuple(full))
        worst = sorted(excess, key=lambda j: (-excess[j], j))
        for j in sorted(worst[:max(d, 1)]):
            add(j)


def _shrink(tab, dens, i):
    g = gcd(dens[i], *tab[i])
    if g > 1:
        tab[i] = [x // g for x in tab[i]]
        dens[i] //= g


def _integer_vector(v: Sequence[Fraction]) -> tuple[list[int], int]:
    """``(w, den)`` with ``v = w / den`` and ``den > 0``."""
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    return [int(x * den) for x in v], den


def _lp_full(phi: Vector, region: HPolyhedron) -> LPResult:
    d = region.dim
    cons = region.constraints
    cols = [[cons[j][0][k] for j in range(len(cons))] for k in range(d)]
    bs = [b for _, b in cons]
    res = solve_standard(cols, phi, bs)
    if res.status == "optimal":
        return LPResult("optimum", value=dot(bs, res.z), point=res.duals,
                        multipliers=res.z)
    if res.status == "unbounded":
        return LPResult("infeasible")
    ray = primitive(res.duals)
    feas = solve_standard(cols, (ZERO,) * d, bs)
    if feas.status == "optimal":
        return LPResult("unbounded", point=feas.duals, ray=ray)
    return LPResult("infeasible")


def _canonical_constraint(phi: Vector, b: Fraction) -> tuple[Vector, Fraction]:
    """Scale so the functional is a primitive integer vector."""
    p = primitive(phi)
    nz = next(i for i, v in enumerate(phi) if v != 0)
    factor = p[nz] / phi[nz]
    return p, b * factor


EMPTY_CONSTRAINT = -ONE


def _empty(dim: int) -> HPolyhedron:
    return HPolyhedron(dim, (((ZERO,) * dim, EMPTY_CONSTRAINT),))


def prune_redundant(region: HPolyhedron) -> HPolyhedron:
    """Drop constraints implied by the others; the feasible set is unchanged.

    Constraints are scaled to primitive integer functionals, duplicates keep
    the tightest bound, and each remaining constraint is tested with one LP
    against the current survivors.  An empty region comes back as the single
    constraint ``0 <= -1``.
    """
    d = region.dim
    best: dict[Vector, Fraction] = {}
    order: list[Vector] = []
    for phi, b in region.constraints:
        if all(v == 0 for v in phi):
            if b < 0:
                return _empty(d)
            continue
        p, bb = _canonical_constraint(phi, b)
        if p not in best:
            order.append(p)
            best[p] = bb
        elif bb < best[p]:
            best[p] = bb
    kept = [(p, best[p]) for p in order]
    if lp_optimize((ZERO,) * d, HPolyhedron(d, kept)).status == "infeasible":
        return _empty(d)
    k = 0
    while k < len(kept):
        phi, b = kept[k]
        rest = HPolyhedron(d, kept[:k] + kept[k + 1:])
        res = lp_optimize(phi, rest)
        if res.status == "optimum" and res.value <= b:
            del kept[k]
        else:
            k += 1
    return HPolyhedron(d, kept)


def fm_project(region: HPolyhedron, eliminate: Iterable[int]) -> HPolyhedron:
    """Fourier-Motzkin projection removing the coordinates in ``eliminate``.

    Indices are 0-based.  Coordinates are eliminated in ascending order and
    the system is pruned after every step; the result lives on the remaining
    coordinates in their original order.
    """
    elim = sorted(set(eliminate))
    d = region.dim
    for e in elim:
        if not 0 <= e < d:
            raise IndexError(f"coordinate {e} out of range for dimension {d}")
    current = prune_redundant(region)
    for e in elim:
        pos, neg, zero = [], [], []
        for phi, b in current.constraints:
            (pos if phi[e] > 0 else neg if phi[e] < 0 else zero).append((phi, b))
        combined = list(zero)
        for pp, pb in pos:
            for np_, nb in neg:
                a, c = -np_[e], pp[e]
                phi = tuple(a * x + c * y for x, y in zip(pp, np_))
                combined.append((phi, a * pb + c * nb))
        current = prune_redundant(HPolyhedron(d, combined))
    keep = [k for k in range(d) if k not in elim]
    return HPolyhedron(len(keep), [
        (tuple(phi[k] for k in keep), b) for phi, b in current.constraints
    ])


# ---------------------------------------------------------------------------
# semi-norms


def _canonical_sign(phi: Vector) -> bool:
    """True when the first nonzero entry is positive."""
    for v in phi:
        if v != 0:
            return v > 0
    return False


@dataclass(frozen=True)
class SemiNorm:
    """Polyhedral semi-norm ``x -> max <phi, x>`` over a symmetric functional list.

    Negations are added when missing, zero functionals and duplicates are
    dropped, and the list is kept in descending lexicographic order so that
    equal semi-norm descriptions compare and serialize identically.
    """

    dim: int
    functionals: tuple[Vector, ...] = ()

    def __post_init__(self):
        if self.dim < 0:
            raise DimensionError("negative dimension")
        seen = set()
        for f in self.functionals:
            phi = vec(f)
            if len(phi) != self.dim:
                raise DimensionError(f"functional of length {len(phi)} in dimension {self.dim}")
            if all(v == 0 for v in phi):
                continue
            seen.add(phi)
            seen.add(tuple(-v for v in phi))
        object.__setattr__(self, "functionals", tuple(sorted(seen, reverse=True)))

    def __call__(self, x: Sequence[Fraction]) -> Fraction:
        return seminorm_eval(self, x)

    def half(self) -> tuple[Vector, ...]:
        """One representative per symmetric pair."""
        return tuple(phi for phi in self.functionals if _canonical_sign(phi))

    def unit_ball(self, radius: Fraction = ONE) -> HPolyhedron:
        return HPolyhedron(self.dim, [(phi, Fraction(radius)) for phi in self.functionals])

    def scaled(self, c: Fraction) -> "SemiNorm":
        """The semi-norm ``c * p`` for ``c >= 0``."""
        c = Fraction(c)
        if c < 0:
            raise ValueError("scale must be nonnegative")
        return SemiNorm(self.dim, [tuple(c * v for v in phi) for phi in self.functionals])

    def pulled_back(self, matrix: Sequence[Sequence[Fraction]], dim: int) -> "SemiNorm":
        """The semi-norm ``x -> p(M x)`` on ``Q^dim``."""
        from .linalg import vecmat

        return SemiNorm(dim, [vecmat(phi, matrix, dim) for phi in self.functionals])

    def pruned(self) -> "SemiNorm":
        """Same semi-norm with redundant functionals removed."""
        ball = prune_redundant(self.unit_ball())
        return SemiNorm(self.dim, [tuple(v / b for v in phi) for phi, b in ball.constraints])


def seminorm_eval(p: SemiNorm, x: Sequence[Fraction]) -> Fraction:
    if len(x) != p.dim:
        raise DimensionError(f"vector of length {len(x)} in dimension {p.dim}")
    best = ZERO
    for phi in p.functionals:
        v = dot(phi, x)
        if v > best:
            best = v
    return best


def seminorm_kernel(p: SemiNorm) -> tuple[Vector, ...]:
    """Basis of the common null space of the functionals.

    Each basis vector is scaled so that its first nonzero entry is positive.
    """
    out = []
    for v in nullspace(p.half(), p.dim):
        out.append(v if _canonical_sign(v) else tuple(-x for x in v))
    return tuple(out)


@dataclass(frozen=True)
class DominationResult:
    holds: bool
    certificate: "object"
    witness: Vector | None = None
    witness_kind: str | None = None  # "point" or "ray"


def dominates(p: SemiNorm, q: SemiNorm, c: Fraction) -> DominationResult:
    """Decide ``p(x) <= c q(x)`` for all ``x`` with one LP per functional pair.

    When it holds the certificate lists, for each representative functional
    of ``p``, nonnegative weights on the functionals of ``q`` that combine to
    it with total weight at most ``c``.  Otherwise the witness is either a
    point of the ``q``-ball where ``p`` exceeds ``c`` or a direction in the
    kernel of ``q`` where ``p`` is positive.
    """
    from .certificate import dominates_failure, dominates_leaf

    c = Fraction(c)
    if p.dim != q.dim:
        raise DimensionError(f"dimensions {p.dim} and {q.dim} differ")
    ball = q.unit_ball()
    entries = []
    for phi in p.half():
        res = lp_optimize(phi, ball)
        if res.status == "unbounded":
            cert = dominates_failure(p, q, c, phi, ray=res.ray)
            return DominationResult(False, cert, res.ray, "ray")
        if res.value > c:
            cert = dominates_failure(p, q, c, phi, point=res.point)
            return DominationResult(False, cert, res.point, "point")
        entries.append((phi, res.multipliers, res.value))
    return DominationResult(True, dominates_leaf(p, q, c, entries))


def support_value(phi: Sequence[Fraction], q: SemiNorm) -> Fraction | None:
    """``max <phi, x>`` over the unit ball of ``q``; ``None`` if unbounded."""
    res = lp_optimize(phi, q.unit_ball())
    return res.value if res.status == "optimum" else None


# ---------------------------------------------------------------------------
# double description via cddlib


def _to_fraction(v) -> Fraction:
    return Fraction(v)


def ball_generators(p: SemiNorm) -> tuple[tuple[Vector, ...], tuple[Vector, ...]]:
    """Vertices and lineality basis of the unit ball of ``p``.

    The ball is the Minkowski sum of a polytope and the kernel of ``p``.
    """
    if p.dim == 0:
        return ((),), ()
    if not p.functionals:
        lines = tuple(tuple(ONE if i == j else ZERO for j in range(p.dim)) for i in range(p.dim))
        return ((ZERO,) * p.dim,), lines
    rows = [[ONE] + [-v for v in phi] for phi in p.functionals]
    m = cdd.Matrix(rows, number_type="fraction")
    m.rep_type = cdd.RepType.INEQUALITY
    gens = cdd.Polyhedron(m).get_generators()
    lin = set(gens.lin_set)
    points, lines = [], []
    for i in range(gens.row_size):
        row = [_to_fraction(v) for v in gens[i]]
        if i in lin:
            lines.append(primitive(row[1:]))
        elif row[0] == 1:
            points.append(tuple(row[1:]))
        else:
            raise AssertionError("symmetric ball has no extreme rays")
    if not points:
        points.append((ZERO,) * p.dim)
    return tuple(sorted(set(points))), tuple(sorted(set(lines)))


def ball_vertices(p: SemiNorm) -> tuple[Vector, ...]:
    """Vertices of the unit ball, sorted lexicographically.

    Raises :class:`UnboundedBallError` when ``p`` has a nontrivial kernel.
    """
    if seminorm_kernel(p):
        raise UnboundedBallError("semi-norm has a nontrivial kernel")
    points, _ = ball_generators(p)
    return points


def hull_seminorm(dim: int, points: Iterable[Sequence[Fraction]],
                  lines: Iterable[Sequence[Fraction]] = ()) -> SemiNorm:
    """Semi-norm whose unit ball is ``conv(points) + span(lines)``.

    The point set must be symmetric and span, together with the lines, all of
    ``Q^dim``; otherwise the hull is not the ball of a semi-norm.
    """
    points = [vec(v) for v in points]
    lines = [vec(v) for v in lines if any(x != 0 for x in v)]
    if dim == 0:
        return SemiNorm(0, ())
    rows = [[ONE] + list(v) for v in points]
    line_rows = [[ZERO] + list(v) for v in lines]
    if not rows:
        rows = [[ONE] + [ZERO] * dim]
    m = cdd.Matrix(rows, number_type="fraction")
    m.rep_type = cdd.RepType.GENERATOR
    if line_rows:
        m.extend(line_rows, linear=True)
    ineq = cdd.Polyhedron(m).get_inequalities()
    if ineq.lin_set:
        raise ValueError("generators do not span the whole space")
    funcs = []
    for i in range(ineq.row_size):
        row = [_to_fraction(v) for v in ineq[i]]
        b, a = row[0], row[1:]
        if all(v == 0 for v in a):
            continue
        if b <= 0:
            raise ValueError("origin is not interior to the hull")
        funcs.append(tuple(-v / b for v in a))
    return SemiNorm(dim, funcs)

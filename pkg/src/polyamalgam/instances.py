"""Seeded random instances for the property and acceptance suites and the demo.

Every generator takes a :class:`random.Random` so runs are reproducible.
Constructions are chosen so preconditions hold by design (isometric
inclusions are restrictions, projections are non-expansive by the shape of
the norm), and the checks in the library then certify them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .linalg import ZERO, ONE
from .polyhedra import SemiNorm, seminorm_kernel
from .spaces import (
    UNBOUNDED,
    LinearMap,
    MultiNormedSpace,
    check_eps_isometric,
    operator_seminorm,
    product_space,
    quotient_by_kernel,
    subspace,
)


def rational(rng: random.Random, lo: int = -3, hi: int = 3, dens: Sequence[int] = (1, 1, 2, 3)) -> Fraction:
    return Fraction(rng.randint(lo, hi), rng.choice(dens))


def vector(rng: random.Random, dim: int, **kw) -> tuple[Fraction, ...]:
    return tuple(rational(rng, **kw) for _ in range(dim))


def nonzero_vector(rng: random.Random, dim: int, **kw):
    while True:
        v = vector(rng, dim, **kw)
        if any(v):
            return v


def invertible(rng: random.Random, dim: int):
    while True:
        m = tuple(vector(rng, dim, lo=-2, hi=2, dens=(1, 1, 2)) for _ in range(dim))
        if la.rank(m, dim) == dim:
            return m


def seminorm(rng: random.Random, dim: int, pairs: int | None = None, kernel_dim: int = 0) -> SemiNorm:
    """Random polyhedral semi-norm with a kernel of exactly ``kernel_dim``.

    At most ``pairs`` symmetric pairs are used (so at most ``2 * pairs``
    functionals).
    """
    rank = dim - kernel_dim
    if rank < 0:
        raise ValueError("kernel larger than the space")
    if rank == 0:
        return SemiNorm(dim, ())
    pairs = max(rank, pairs if pairs is not None else rng.randint(rank, min(4, rank + 2)))
    # functionals live in the annihilator of a random kernel
    basis = invertible(rng, dim)
    annihilator = basis[:rank]
    while True:
        funcs = []
        for _ in range(pairs):
            coeffs = nonzero_vector(rng, rank, lo=-2, hi=2)
            funcs.append(la.vecmat(coeffs, annihilator, dim))
        if la.rank(funcs, dim) == rank:
            return SemiNorm(dim, funcs)


def norm(rng: random.Random, dim: int, pairs: int | None = None) -> SemiNorm:
    return seminorm(rng, dim, pairs, 0)


def graded_space(rng: random.Random, dim: int, depth: int, kernel_dim: int = 0,
                 pairs: int = 3) -> MultiNormedSpace:
    """Graded space built by unions: each level adds functionals to the previous one.

    Level 0 has a kernel of dimension ``kernel_dim``; each later level adds
    one functional pair, so kernels shrink or stay.  The total number of
    functionals stays at most 8 for ``pairs <= 4 - (depth - 1)``.
    """
    first = seminorm(rng, dim, min(pairs, max(1, dim - kernel_dim)) if dim > kernel_dim else None,
                     kernel_dim)
    levels = [first]
    for _ in range(depth - 1):
        extra = nonzero_vector(rng, dim, lo=-2, hi=2) if dim else ()
        prev = levels[-1]
        levels.append(SemiNorm(dim, list(prev.functionals) + ([extra] if dim else [])))
    return MultiNormedSpace(dim, tuple(levels), graded=True)


def normed_graded_space(rng, dim, depth, pairs=3):
    return graded_space(rng, dim, depth, 0, pairs)


# ---------------------------------------------------------------------------
# subspaces and superspaces


def random_subspace(rng: random.Random, space: MultiNormedSpace, dim: int):
    """``(X, inclusion)`` for a random ``dim``-dimensional subspace with restricted norms."""
    while True:
        cols = [vector(rng, space.dim, lo=-2, hi=2, dens=(1,)) for _ in range(dim)]
        if la.rank(cols, space.dim) == dim:
            return subspace(space, cols)


@dataclass
class Superspace:
    Y: MultiNormedSpace
    inclusion: LinearMap      # X -> Y, isometric
    projection: LinearMap     # Y -> X, non-expansive, projection onto X
    complement: LinearMap     # Y -> W, non-expansive, kills X
    W: MultiNormedSpace


def superspace(rng: random.Random, X: MultiNormedSpace, extra_dim: int,
               W: MultiNormedSpace | None = None, mix: bool = True,
               change_basis: bool = True) -> Superspace:
    """``Y = X (+) W`` with ``X`` sitting isometrically and both projections non-expansive.

    Level ``i`` of ``Y`` takes the functionals of ``X_i`` and ``W_i`` plus
    mixing functionals ``(phi, chi)`` with ``phi`` a convex combination of
    ``X_i`` functionals (so the restriction to ``X`` is unchanged).  Mixing
    functionals accumulate over levels so ``Y`` stays graded when ``X`` and
    ``W`` are.  A random change of basis hides the splitting.
    """
    if W is None:
        W = graded_space(rng, extra_dim, X.depth, 0, 2) if extra_dim else \
            MultiNormedSpace(0, tuple(SemiNorm(0, ()) for _ in range(X.depth)), True)
    dx, dw = X.dim, W.dim
    dy = dx + dw
    mixing: list = []
    levels = []
    for i in range(X.depth):
        xf = X.levels[i].functionals
        funcs = [tuple(phi) + (ZERO,) * dw for phi in xf]
        funcs += [(ZERO,) * dx + tuple(chi) for chi in W.levels[i].functionals]
        if mix and xf and W.levels[i].functionals and dw:
            a, b = rng.sample(range(len(xf)), 2) if len(xf) > 1 else (0, 0)
            t = Fraction(rng.randint(0, 4), 4)
            phi = tuple(t * u + (1 - t) * v for u, v in zip(xf[a], xf[b]))
            chi = rng.choice(W.levels[i].functionals)
            mixing.append(phi + tuple(chi))
        funcs += mixing
        levels.append(SemiNorm(dy, funcs))
    Y0 = MultiNormedSpace(dy, tuple(levels), X.graded and W.graded)
    inc = la.identity(dy)[:dx]
    inc_cols = la.columns_to_matrix(inc, dy)
    proj = tuple(tuple(r) for r in la.identity(dy)[:dx])
    comp = tuple(tuple(r) for r in la.identity(dy)[dx:])
    if change_basis and dy:
        G = invertible(rng, dy)
        Ginv = la.inverse(G)
        Y = MultiNormedSpace(dy, tuple(p.pulled_back(Ginv, dy) for p in Y0.levels), Y0.graded)
        inc_cols = la.matmul(G, inc_cols, cols=dx)
        proj = la.matmul(proj, Ginv, cols=dy) if dx else proj
        comp = la.matmul(comp, Ginv, cols=dy) if dw else comp
    else:
        Y = Y0
    return Superspace(Y, LinearMap(X, Y, inc_cols), LinearMap(Y, X, proj),
                      LinearMap(Y, W, comp), W)


# ---------------------------------------------------------------------------
# maps


def _scale_to(f: LinearMap, bound: Fraction) -> LinearMap:
    worst = max((operator_seminorm(f, i, min(i, f.codomain.depth - 1)) for i in range(f.domain.depth)),
                default=ZERO)
    if worst == UNBOUNDED:
        raise ValueError("map is unbounded")
    if worst > bound and worst > 0:
        return LinearMap(f.domain, f.codomain, la.scale(f.matrix, Fraction(bound) / worst))
    return f


def bounded_map(rng: random.Random, domain: MultiNormedSpace, codomain: MultiNormedSpace,
                bound: Fraction = ONE) -> LinearMap:
    """Random map with operator semi-norm at most ``bound`` at every level.

    It factors through the level-0 quotient of the domain, whose kernel is
    the largest for graded spaces, so every level stays bounded.
    """
    if domain.dim == 0 or codomain.dim == 0:
        return LinearMap(domain, codomain, la.zeros(codomain.dim, domain.dim))
    q = quotient_by_kernel(domain, 0)
    qd = q.space.dim
    R = tuple(vector(rng, qd, lo=-2, hi=2) for _ in range(codomain.dim))
    m = la.matmul(R, q.map.matrix, cols=domain.dim) if qd else la.zeros(codomain.dim, domain.dim)
    return _scale_to(LinearMap(domain, codomain, m), Fraction(bound))


def _flag_basis(X: MultiNormedSpace):
    """Basis adapted to the nested level kernels, smallest kernel first."""
    cols: list = []
    blocks = []
    for i in reversed(range(X.depth)):
        ker = seminorm_kernel(X.levels[i])
        for v in ker:
            if la.rank(cols + [v], X.dim) > len(cols):
                cols.append(v)
        blocks.append(len(cols))
    for v in la.extend_to_basis(cols, X.dim):
        cols.append(v)
    blocks.append(len(cols))
    return cols, blocks


def kernel_preserving_automorphism(rng: random.Random, X: MultiNormedSpace, t: Fraction):
    """``I + t R`` with ``R`` preserving every level kernel (block triangular in a flag basis)."""
    cols, blocks = _flag_basis(X)
    n = X.dim
    B = la.columns_to_matrix(cols, n)
    Binv = la.inverse(B)
    U = [[ZERO] * n for _ in range(n)]
    start = 0
    block_of = []
    for b in blocks:
        block_of += [b] * (b - start)
        start = b
    for r in range(n):
        for c in range(n):
            # column c may only feed rows inside the span it belongs to
            if r < block_of[c]:
                U[r][c] = rational(rng, -2, 2)
    S = la.add(la.identity(n), la.scale(tuple(map(tuple, U)), t))
    return la.matmul(la.matmul(B, S, cols=n), Binv, cols=n)


def eps_isometry(rng: random.Random, X: MultiNormedSpace, target: Superspace | None, eps: Fraction,
                 tries: int = 12) -> LinearMap:
    """Random ``eps``-isometric embedding of ``X`` (into ``target.Y`` or ``X`` itself)."""
    eps = Fraction(eps)
    inc = target.inclusion if target is not None else LinearMap(X, X, la.identity(X.dim))
    t = Fraction(1, 2)
    for _ in range(tries):
        c = Fraction(rng.choice([1, 1, 2, 3]), 1) * eps / 4
        scale = ONE + (c if rng.random() < 0.5 else -c / (1 + c))
        S = kernel_preserving_automorphism(rng, X, t) if X.dim else ()
        M = la.scale(la.matmul(inc.matrix, S, cols=X.dim), scale) if X.dim else inc.matrix
        f = LinearMap(X, inc.codomain, M)
        if la.rank(M, X.dim) == X.dim and check_eps_isometric(f, eps).holds:
            return f
        t /= 2
    return LinearMap(X, inc.codomain, inc.matrix)


def eps_automorphism(rng: random.Random, X: MultiNormedSpace, eps: Fraction) -> LinearMap:
    """Random ``eps``-isometric automorphism of ``X`` preserving its level kernels."""
    return eps_isometry(rng, X, None, eps)


# ---------------------------------------------------------------------------
# instances shaped for each construction


@dataclass
class PushoutInstance:
    inclusion: LinearMap   # X -> Y
    e: LinearMap           # X -> A
    T: LinearMap           # Y -> Z
    pi: LinearMap          # A -> Z
    r: Fraction


def _zero(depth: int) -> MultiNormedSpace:
    return MultiNormedSpace(0, tuple(SemiNorm(0, ()) for _ in range(depth)), True)


def pushout_instance(rng: random.Random, r: Fraction, depth: int | None = None,
                     max_dim: int = 3) -> PushoutInstance:
    """Random data for the pushout: ``X`` sits in ``A`` and ``Y``, ``T`` splits as ``pi e P + T_W``.

    ``P: Y -> X`` is non-expansive and ``||T_W|| <= r - 1`` with ``T_W``
    vanishing on ``X``, so ``||T|| <= r`` and ``T`` agrees with ``pi e`` on
    ``X``.  ``r = 1`` uses the zero target.
    """
    r = Fraction(r)
    depth = depth or rng.randint(1, 2)
    dA = rng.randint(1, max_dim)
    A = graded_space(rng, dA, depth, rng.randint(0, dA - 1) if dA > 1 else 0)
    dX = rng.randint(0, min(dA, max_dim - 1))
    X, e = random_subspace(rng, A, dX)
    sup = superspace(rng, X, rng.randint(1, max_dim - dX))
    Y = sup.Y
    if r == 1:
        Z = _zero(1)
    else:
        Z = graded_space(rng, rng.randint(1, 2), 1, 0, 2)
    pi = bounded_map(rng, A, Z)
    main = pi.compose(e).compose(sup.projection)
    if r > 1 and sup.W.dim:
        tw = bounded_map(rng, sup.W, Z, r - 1).compose(sup.complement)
        T = LinearMap(Y, Z, la.add(main.matrix, tw.matrix))
    else:
        T = main
    return PushoutInstance(sup.inclusion, e, T, pi, r)


@dataclass
class ProjectiveInstance:
    inclusion: LinearMap   # E -> F
    e: LinearMap           # E -> B
    T: LinearMap           # F -> A
    pi_B: LinearMap        # B -> A
    r: Fraction


def projective_instance(rng: random.Random, delta: Fraction) -> ProjectiveInstance:
    """Graded two-level inclusion ``E`` in ``F`` (dims 1-2 in 2-3) with ``r = 1 + delta``."""
    delta = Fraction(delta)
    dE = rng.randint(1, 2)
    dF = rng.randint(max(2, dE + 1), 3)
    dB = rng.randint(max(2, dE), 3)
    B = graded_space(rng, dB, 2, rng.randint(0, 1), 2)
    E, e = random_subspace(rng, B, dE)
    sup = superspace(rng, E, dF - dE)
    A = graded_space(rng, rng.randint(1, 2), 2, 0, 2)
    pi_B = bounded_map(rng, B, A)
    T = pi_B.compose(e).compose(sup.projection)
    tw = bounded_map(rng, sup.W, A, delta).compose(sup.complement)
    T = LinearMap(sup.Y, A, la.add(T.matrix, tw.matrix))
    return ProjectiveInstance(sup.inclusion, e, T, pi_B, 1 + delta)


def isometric_inclusion(rng: random.Random, max_dim: int = 3):
    """``iota: X -> Y`` isometric, with level kernels of dimension 0-2."""
    dY = rng.randint(1, max_dim)
    depth = rng.randint(1, 3)
    Y = graded_space(rng, dY, depth, rng.randint(0, min(2, dY - 1)), 4 - depth)
    X, iota = random_subspace(rng, Y, rng.randint(1, dY))
    return iota


@dataclass
class ProductInstance:
    f0: LinearMap            # X -> product of the block spaces
    blocks: list             # block normed spaces (single level)


def product_embedding(rng: random.Random, X: MultiNormedSpace, eps: Fraction = ZERO,
                      extra: int = 1) -> ProductInstance:
    """``f0 = (J_i S_i q_i)_i`` into a product with one block per level of ``X``.

    ``q_i`` is the level-``i`` quotient map, ``S_i`` an ``eps``-isometric
    automorphism of the quotient and ``J_i`` an isometric inclusion into a
    random superspace.  Each coordinate of ``f0`` is then
    ``eps``-isometric for its level.
    """
    rows, blocks = [], []
    for i in range(X.depth):
        q = quotient_by_kernel(X, i)
        S = eps_automorphism(rng, q.space, eps) if q.space.dim else LinearMap(q.space, q.space, ())
        sup = superspace(rng, q.space, rng.randint(0, extra) if q.space.dim else max(extra, 1))
        m = la.matmul(la.matmul(sup.inclusion.matrix, S.matrix, cols=q.space.dim), q.map.matrix,
                      cols=X.dim) if q.space.dim else la.zeros(sup.Y.dim, X.dim)
        rows.extend(m)
        blocks.append(sup.Y)
    P = product_space([b.levels[0] for b in blocks])
    return ProductInstance(LinearMap(X, P, tuple(rows)), blocks)


def contraction(rng: random.Random, max_dim: int = 3) -> LinearMap:
    """Non-expansive ``T: X -> A`` between single-norm spaces."""
    dx, da = rng.randint(1, max_dim), rng.randint(1, max_dim)
    X = MultiNormedSpace(dx, (norm(rng, dx),), True)
    A = MultiNormedSpace(da, (norm(rng, da),), True)
    return bounded_map(rng, X, A)


@dataclass
class PerturbedPair:
    F: MultiNormedSpace
    basis: list
    g: LinearMap
    h: LinearMap


def perturbed_pair(rng: random.Random, F: MultiNormedSpace, W: MultiNormedSpace, basis,
                   delta: Fraction, boundary: bool = False) -> PerturbedPair:
    """Maps ``g, h: F -> W`` with ``||g(v) - h(v)||_i <= delta`` on every basis vector.

    With ``boundary`` only one basis vector is moved, by exactly ``delta``
    at its worst level.
    """
    n = F.dim
    diffs = []
    for k, _ in enumerate(basis):
        d = nonzero_vector(rng, W.dim)
        if boundary and k:
            d = (ZERO,) * W.dim
        size = max((W.levels[i](d) for i in range(W.depth)), default=ZERO)
        if size:
            d = tuple(x * Fraction(delta) / size for x in d)
            if not boundary:
                shrink = Fraction(rng.randint(1, 4), 4)
                d = tuple(x * shrink for x in d)
        diffs.append(d)
    g = tuple(vector(rng, n) for _ in range(W.dim))
    D = la.matmul(la.columns_to_matrix(diffs, W.dim), la.inverse(la.columns_to_matrix(basis, n)), cols=n)
    h = la.sub(g, D)
    return PerturbedPair(F, list(basis), LinearMap(F, W, g), LinearMap(F, W, h))


def kernel_free_pair(rng: random.Random, max_dim: int = 3):
    """Two random norms on the same space and a random square matrix."""
    d = rng.randint(1, max_dim)
    return norm(rng, d), norm(rng, d), tuple(vector(rng, d) for _ in range(d))

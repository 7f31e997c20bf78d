"""Multi-semi-normed spaces, linear maps between them, operator semi-norms,
approximate-isometry checks and quotient diagrams.

Level indices are 0-based throughout the Python API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from . import linalg as la
from .certificate import (
    Certificate,
    bind_origin,
    identity_leaf,
    injective_leaf,
    opnorm_leaf,
    opnorm_unbounded_leaf,
)
from .linalg import ZERO, ONE, Matrix, Vector
from .polyhedra import DimensionError, SemiNorm, dominates, lp_optimize, seminorm_kernel

UNBOUNDED = math.inf


class NotInjectiveError(ValueError):
    """An embedding was requested for a matrix with a nontrivial kernel."""

    def __init__(self, message: str, kernel_vector: Vector):
        super().__init__(message)
        self.kernel_vector = kernel_vector


class PreconditionError(ValueError):
    """An operation's hypothesis fails; ``certificate`` documents the failure when available."""

    def __init__(self, message: str, certificate: Certificate | None = None, witness=None):
        super().__init__(message)
        self.certificate = certificate
        self.witness = witness


@dataclass(frozen=True)
class MultiNormedSpace:
    """``Q^dim`` with an ordered list of semi-norms.

    ``blocks`` optionally records a splitting of the coordinates into
    consecutive blocks such that level ``i`` only reads block ``i``; product
    spaces with coordinate semi-norms carry it.
    """

    dim: int
    levels: tuple[SemiNorm, ...]
    graded: bool = False
    blocks: tuple[int, ...] | None = None

    def __post_init__(self):
        levels = tuple(self.levels)
        if not levels:
            raise ValueError("a space needs at least one level")
        for p in levels:
            if p.dim != self.dim:
                raise DimensionError(f"level of dimension {p.dim} in a space of dimension {self.dim}")
        object.__setattr__(self, "levels", levels)
        if self.blocks is not None:
            blocks = tuple(int(b) for b in self.blocks)
            if sum(blocks) != self.dim or len(blocks) != len(levels):
                raise DimensionError("blocks do not match the dimension and level count")
            object.__setattr__(self, "blocks", blocks)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def norm(self, x: Sequence[Fraction], i: int) -> Fraction:
        return self.levels[i](x)

    def block_range(self, i: int) -> range:
        start = sum(self.blocks[:i])
        return range(start, start + self.blocks[i])


def single_level(p: SemiNorm) -> MultiNormedSpace:
    return MultiNormedSpace(p.dim, (p,), graded=True)


def zero_space(depth: int = 1) -> MultiNormedSpace:
    return MultiNormedSpace(0, tuple(SemiNorm(0, ()) for _ in range(depth)), graded=True)


@dataclass(frozen=True)
class LinearMap:
    """Matrix of shape ``codomain.dim x domain.dim``."""

    domain: MultiNormedSpace
    codomain: MultiNormedSpace
    matrix: Matrix
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        m = la.mat(self.matrix)
        if len(m) != self.codomain.dim or any(len(r) != self.domain.dim for r in m):
            raise DimensionError(
                f"matrix shape does not match {self.codomain.dim}x{self.domain.dim}")
        object.__setattr__(self, "matrix", m)

    @property
    def rows(self) -> int:
        return self.codomain.dim

    @property
    def cols(self) -> int:
        return self.domain.dim

    def __call__(self, x: Sequence[Fraction]) -> Vector:
        return la.matvec(self.matrix, x)

    def compose(self, inner: "LinearMap") -> "LinearMap":
        """``self after inner``."""
        if inner.codomain.dim != self.domain.dim:
            raise DimensionError("maps are not composable")
        return LinearMap(inner.domain, self.codomain,
                         la.matmul(self.matrix, inner.matrix, cols=inner.cols))

    def __sub__(self, other: "LinearMap") -> "LinearMap":
        return LinearMap(self.domain, self.codomain, la.sub(self.matrix, other.matrix))

    def factor(self) -> tuple[Matrix, int, int]:
        """``(matrix, rows, cols)`` triple for identity certificates."""
        return self.matrix, self.rows, self.cols


def identity_map(space: MultiNormedSpace) -> LinearMap:
    return LinearMap(space, space, la.identity(space.dim))


# ---------------------------------------------------------------------------
# gradedness


@dataclass
class CheckResult:
    holds: bool
    certificate: Certificate
    witness: Vector | None = None


def check_graded(space: MultiNormedSpace) -> CheckResult:
    """Whether each level is dominated by the next one with constant 1."""
    children = []
    witness = None
    for i in range(space.depth - 1):
        res = dominates(space.levels[i], space.levels[i + 1], ONE)
        res.certificate.claim = f"level {i} <= level {i + 1}"
        children.append(res.certificate)
        if not res.holds and witness is None:
            witness = res.witness
    cert = Certificate.composite("graded", "levels are non-decreasing", children)
    return CheckResult(cert.holds, cert, witness)


# ---------------------------------------------------------------------------
# operator semi-norms


def _opnorm_of(m, rows, cols, dom: SemiNorm, cod: SemiNorm):
    """Least ``c`` with ``cod(M x) <= c dom(x)``, or ``None`` when unbounded."""
    value, _ = _opnorm_with_certificate(m, rows, cols, dom, cod)
    return None if value == UNBOUNDED else value


def _opnorm_with_certificate(m, rows, cols, dom: SemiNorm, cod: SemiNorm, claim: str = ""):
    pulled = cod.pulled_back(m, cols)
    ball = dom.unit_ball()
    entries = []
    best = ZERO
    best_point = None
    for phi in pulled.half():
        res = lp_optimize(phi, ball)
        if res.status == "unbounded":
            cert = opnorm_unbounded_leaf(m, rows, cols, dom.functionals, cod.functionals,
                                         phi, res.ray, claim)
            return UNBOUNDED, cert
        entries.append((phi, res.multipliers, res.value))
        if best_point is None or res.value > best:
            best, best_point = res.value, res.point
    cert = opnorm_leaf(m, rows, cols, dom.functionals, cod.functionals, best, entries,
                       best_point if best > 0 else None, claim)
    return best, cert


def operator_seminorm_certificate(f: LinearMap, i: int, j: int | None = None):
    """``(value, certificate)`` for the operator semi-norm from level ``i`` to level ``j``."""
    j = i if j is None else j
    key = ("opnorm", i, j)
    if key not in f._cache:
        f._cache[key] = _opnorm_with_certificate(
            f.matrix, f.rows, f.cols, f.domain.levels[i], f.codomain.levels[j],
            f"level {i} -> level {j}")
    return f._cache[key]


def operator_seminorm(f: LinearMap, i: int, j: int | None = None):
    """``sup ||f x||_j / ||x||_i`` as an exact rational, or ``UNBOUNDED``.

    ``UNBOUNDED`` (``math.inf``) is returned when the kernel of the domain
    level is not mapped into the kernel of the codomain level.
    """
    if not 0 <= i < f.domain.depth or not 0 <= (i if j is None else j) < f.codomain.depth:
        raise IndexError("level index out of range")
    return operator_seminorm_certificate(f, i, j)[0]


def opnorm_bound(f: LinearMap, bound: Fraction, claim: str = "",
                 levels: Sequence[int] | None = None) -> Certificate:
    """Composite certificate that ``||f||_i <= bound`` at every level."""
    bound = Fraction(bound)
    levels = range(min(f.domain.depth, f.codomain.depth)) if levels is None else levels
    children = []
    for i in levels:
        j = min(i, f.codomain.depth - 1)
        p = f.codomain.levels[j].pulled_back(f.matrix, f.cols)
        res = dominates(p, f.domain.levels[i], bound)
        cert = bind_origin(res.certificate, "p", f.matrix, f.rows, f.cols,
                           f.codomain.levels[j].functionals)
        cert.claim = f"level {i}: norm <= {bound}"
        children.append(cert)
    return Certificate.composite("opnorm-bound", claim, children)


# ---------------------------------------------------------------------------
# embeddings


def injectivity_certificate(f: LinearMap) -> Certificate:
    left = la.left_inverse(f.matrix, f.cols)
    if left is None:
        kernel = la.nullspace(f.matrix, f.cols)[0]
        return injective_leaf(f.matrix, f.rows, f.cols, kernel_vector=kernel)
    return injective_leaf(f.matrix, f.rows, f.cols, left_inverse=left)


def check_eps_isometric(f: LinearMap, eps: Fraction, levels: Sequence[int] | None = None,
                        require_injective: bool = True) -> CheckResult:
    """Check ``(1+eps)^-1 ||x||_i <= ||f x||_i <= (1+eps) ||x||_i`` at every level.

    Raises :class:`NotInjectiveError` for a matrix with a kernel.  The
    certificate holds an injectivity leaf and two domination leaves per
    level.
    """
    eps = Fraction(eps)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if f.domain.depth != f.codomain.depth:
        raise DimensionError("level counts differ")
    inj = injectivity_certificate(f)
    if require_injective and not inj.holds:
        raise NotInjectiveError("map is not injective", tuple(inj.data["kernel_vector"]))
    c = ONE + eps
    children = [inj]
    witness = None
    for i in (range(f.domain.depth) if levels is None else levels):
        cod = f.codomain.levels[i]
        dom = f.domain.levels[i]
        pulled = cod.pulled_back(f.matrix, f.cols)
        up = dominates(pulled, dom, c)
        bind_origin(up.certificate, "p", f.matrix, f.rows, f.cols, cod.functionals)
        up.certificate.claim = f"level {i}: ||f x|| <= {c} ||x||"
        down = dominates(dom, pulled, c)
        bind_origin(down.certificate, "q", f.matrix, f.rows, f.cols, cod.functionals)
        down.certificate.claim = f"level {i}: ||x|| <= {c} ||f x||"
        children += [up.certificate, down.certificate]
        for r in (up, down):
            if not r.holds and witness is None:
                witness = r.witness
    cert = Certificate.composite("eps-isometric", f"{eps}-isometric embedding", children)
    return CheckResult(cert.holds, cert, witness)


def require_isometric(f: LinearMap, eps: Fraction, what: str) -> Certificate:
    res = check_eps_isometric(f, eps)
    if not res.holds:
        raise PreconditionError(f"{what} is not {eps}-isometric", res.certificate, res.witness)
    return res.certificate


# ---------------------------------------------------------------------------
# quotients


@dataclass(frozen=True)
class Quotient:
    """Quotient of a space by the kernel of one level.

    ``map`` sends the space onto ``space`` (coordinates are the nonzero rows
    of the reduced echelon form of the level's functionals); ``section`` is a
    right inverse placing a quotient vector on the pivot coordinates.
    """

    space: MultiNormedSpace
    map: LinearMap
    section: Matrix
    pivots: tuple[int, ...]
    certificate: Certificate


def quotient_by_kernel(space: MultiNormedSpace, i: int) -> Quotient:
    p = space.levels[i]
    reduced, pivots = la.rref(p.half(), space.dim)
    qdim = len(pivots)
    qnorm = SemiNorm(qdim, [tuple(phi[k] for k in pivots) for phi in p.functionals])
    qspace = single_level(qnorm)
    qmap = LinearMap(space, qspace, reduced)
    section = tuple(
        tuple(ONE if pivots[c] == r else ZERO for c in range(qdim)) for r in range(space.dim))
    # certificate: the quotient norm pulls back to the level, and q s = id
    pulled = qnorm.pulled_back(reduced, space.dim)
    up = dominates(pulled, p, ONE)
    bind_origin(up.certificate, "p", reduced, qdim, space.dim, qnorm.functionals)
    down = dominates(p, pulled, ONE)
    bind_origin(down.certificate, "q", reduced, qdim, space.dim, qnorm.functionals)
    split = identity_leaf(
        [(ONE, [(reduced, qdim, space.dim), (section, space.dim, qdim)]),
         (-ONE, [(la.identity(qdim), qdim, qdim)])],
        qdim, qdim, "quotient map is split surjective")
    cert = Certificate.composite("quotient", f"quotient by the kernel of level {i}",
                                 [up.certificate, down.certificate, split])
    return Quotient(qspace, qmap, section, pivots, cert)


def induced_quotient_map(iota: LinearMap, i: int, eps: Fraction = ZERO):
    """Map between the level-``i`` quotients induced by an (eps-)isometry.

    Returns ``(map, dom_quotient, cod_quotient, certificate)``; the
    certificate contains the commuting square and the (eps-)isometry of the
    induced map.
    """
    eps = Fraction(eps)
    require_isometric(iota, eps, "map")
    qd = quotient_by_kernel(iota.domain, i)
    qc = quotient_by_kernel(iota.codomain, i)
    m = la.matmul(la.matmul(qc.map.matrix, iota.matrix, cols=iota.cols), qd.section,
                  cols=qd.space.dim)
    induced = LinearMap(qd.space, qc.space, m)
    square = identity_leaf(
        [(ONE, [induced.factor(), qd.map.factor()]),
         (-ONE, [qc.map.factor(), iota.factor()])],
        qc.space.dim, iota.cols, "induced map commutes with the quotient maps")
    iso = check_eps_isometric(induced, eps)
    cert = Certificate.composite("induced-quotient-map", f"level {i} quotient diagram",
                                 [qd.certificate, qc.certificate, square, iso.certificate])
    return induced, qd, qc, cert


def block_space(space: MultiNormedSpace, i: int) -> tuple[MultiNormedSpace, Matrix]:
    """Block ``i`` of a product space with its norm, and the coordinate projection."""
    rng = space.block_range(i)
    p = space.levels[i]
    norm = SemiNorm(len(rng), [tuple(phi[k] for k in rng) for phi in p.functionals])
    proj = tuple(tuple(ONE if c == r else ZERO for c in range(space.dim)) for r in rng)
    return single_level(norm), proj


def coordinate_factor(f0: LinearMap, i: int, eps: Fraction = ZERO):
    """Factor level ``i`` of a map into a product space through the level-``i`` quotient.

    The codomain must carry ``blocks`` with level ``i`` reading only block
    ``i``.  Returns ``(factor, quotient, certificate)`` where ``factor`` goes
    from the level-``i`` quotient of the domain into block ``i``; the
    certificate proves well-definedness (the kernel is killed), the
    triangle ``factor q = proj f0`` and the (eps-)isometry of the factor.
    """
    eps = Fraction(eps)
    P = f0.codomain
    if P.blocks is None:
        raise ValueError("codomain is not a product of levels")
    block, proj = block_space(P, i)
    bdim = block.dim
    qd = quotient_by_kernel(f0.domain, i)
    coord = la.matmul(proj, f0.matrix, cols=f0.cols)
    kernel = seminorm_kernel(f0.domain.levels[i])
    kmat = la.columns_to_matrix(kernel, f0.cols)
    killed = identity_leaf([(ONE, [(coord, bdim, f0.cols), (kmat, f0.cols, len(kernel))])],
                           bdim, len(kernel), "kernel of the level is mapped to zero")
    if not killed.holds:
        raise PreconditionError("coordinate map does not factor through the quotient",
                                Certificate.composite("coordinate-factor", "", [killed]))
    m = la.matmul(coord, qd.section, cols=qd.space.dim)
    factor = LinearMap(qd.space, block, m)
    triangle = identity_leaf(
        [(ONE, [factor.factor(), qd.map.factor()]), (-ONE, [(coord, bdim, f0.cols)])],
        bdim, f0.cols, "factor after quotient map equals the coordinate of f0")
    iso = check_eps_isometric(factor, eps)
    cert = Certificate.composite("coordinate-factor", f"level {i} coordinate factor",
                                 [qd.certificate, killed, triangle, iso.certificate])
    return factor, qd, cert


# ---------------------------------------------------------------------------
# constructors


def _l1_functionals(parts: Sequence[tuple[SemiNorm, Fraction]]) -> list[Vector]:
    choices = []
    for p, w in parts:
        funcs = [tuple(w * v for v in phi) for phi in p.functionals]
        choices.append(funcs or [(ZERO,) * p.dim])
    return [tuple(v for piece in combo for v in piece) for combo in product(*choices)]


def _max_functionals(parts: Sequence[tuple[SemiNorm, Fraction]]) -> list[Vector]:
    total = sum(p.dim for p, _ in parts)
    out = []
    offset = 0
    for p, w in parts:
        for phi in p.functionals:
            row = [ZERO] * total
            row[offset:offset + p.dim] = [w * v for v in phi]
            out.append(tuple(row))
        offset += p.dim
    return out


def sum_seminorm(parts: Sequence[tuple[SemiNorm, Fraction]], mode: str) -> SemiNorm:
    """Weighted l1 sum or weighted max of semi-norms on the direct sum."""
    parts = [(p, Fraction(w)) for p, w in parts]
    for _, w in parts:
        if w <= 0:
            raise ValueError("weights must be positive")
    total = sum(p.dim for p, _ in parts)
    if mode == "l1":
        return SemiNorm(total, _l1_functionals(parts))
    if mode == "max":
        return SemiNorm(total, _max_functionals(parts))
    raise ValueError(f"unknown sum mode {mode!r}")


def sum_space(parts: Sequence[tuple[MultiNormedSpace, Fraction]], mode: str) -> MultiNormedSpace:
    """Direct sum with the weighted l1 or max combination at every level."""
    depths = {s.depth for s, _ in parts}
    if len(depths) != 1:
        raise DimensionError("parts have different level counts")
    depth = depths.pop()
    levels = tuple(sum_seminorm([(s.levels[i], w) for s, w in parts], mode) for i in range(depth))
    graded = all(s.graded for s, _ in parts)
    return MultiNormedSpace(sum(s.dim for s, _ in parts), levels, graded)


def product_space(parts: Sequence[SemiNorm]) -> MultiNormedSpace:
    """Product of normed spaces whose level ``i`` is the norm of coordinate ``i``."""
    total = sum(p.dim for p in parts)
    levels = []
    offset = 0
    for p in parts:
        funcs = []
        for phi in p.functionals:
            row = [ZERO] * total
            row[offset:offset + p.dim] = phi
            funcs.append(tuple(row))
        levels.append(SemiNorm(total, funcs))
        offset += p.dim
    return MultiNormedSpace(total, tuple(levels), False, tuple(p.dim for p in parts))


def subspace(space: MultiNormedSpace, columns: Sequence[Sequence[Fraction]]):
    """Subspace spanned by independent ``columns`` with the restricted semi-norms.

    Returns ``(subspace, inclusion)``.
    """
    cols = [la.vec(c) for c in columns]
    if la.rank(cols, space.dim) != len(cols):
        raise ValueError("columns are not independent")
    m = la.columns_to_matrix(cols, space.dim)
    levels = tuple(p.pulled_back(m, len(cols)) for p in space.levels)
    sub = MultiNormedSpace(len(cols), levels, space.graded)
    return sub, LinearMap(sub, space, m)


def restrict_levels(space: MultiNormedSpace, levels: Sequence[int]) -> MultiNormedSpace:
    chosen = tuple(space.levels[i] for i in levels)
    return MultiNormedSpace(space.dim, chosen, space.graded)

"""Amalgamation constructions: pushouts, corrector amalgams, graded lifts,
projective and product extensions, and the basis perturbation constant.

Every construction returns its outputs together with a certificate of the
contract it promises.  Infimal semi-norms of the form
``c -> inf { sum_k w_k p_k(u_k) : Q u = c }`` are computed by mapping the
generators of the weighted l1-ball through ``Q`` and converting back to
facets (method ``"dd"``), or by eliminating the kernel variables of ``Q``
from the l1-ball's inequalities (method ``"fm"``).  The two routes are
independent and must produce the same facet set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .certificate import Certificate, identity_leaf
from .linalg import ZERO, ONE, Matrix
from .polyhedra import (
    HPolyhedron,
    SemiNorm,
    ball_generators,
    fm_project,
    hull_seminorm,
)
from .spaces import (
    UNBOUNDED,
    LinearMap,
    MultiNormedSpace,
    PreconditionError,
    check_eps_isometric,
    check_graded,
    operator_seminorm_certificate,
    opnorm_bound,
    require_isometric,
    single_level,
    sum_seminorm,
)

# ---------------------------------------------------------------------------
# infimal semi-norms


def _right_inverse(q: Matrix, rows: int, cols: int) -> Matrix:
    columns = []
    for j in range(rows):
        e = tuple(ONE if k == j else ZERO for k in range(rows))
        x = la.solve(q, e, cols)
        if x is None:
            raise ValueError("map is not surjective")
        columns.append(x)
    return la.columns_to_matrix(columns, cols)


def infimal_seminorm(parts: Sequence[tuple[SemiNorm, Fraction]], q: Matrix, dim: int,
                     method: str = "dd") -> SemiNorm:
    """Image of the weighted l1 sum of ``parts`` under the surjection ``q``.

    The result is ``c -> min { sum_k w_k p_k(u_k) : q u = c }``.
    """
    parts = [(p, Fraction(w)) for p, w in parts]
    total = sum(p.dim for p, _ in parts)
    if dim == 0:
        return SemiNorm(0, ())
    if method == "dd":
        points, lines = [], []
        offset = 0
        for p, w in parts:
            pts, lns = ball_generators(p)
            for v in pts:
                full = [ZERO] * total
                full[offset:offset + p.dim] = [x / w for x in v]
                points.append(la.matvec(q, full))
            for v in lns:
                full = [ZERO] * total
                full[offset:offset + p.dim] = v
                lines.append(la.matvec(q, full))
            offset += p.dim
        return hull_seminorm(dim, points, lines)
    if method == "fm":
        section = _right_inverse(q, dim, total)
        kernel = la.nullspace(q, total)
        k = len(kernel)
        kmat = la.columns_to_matrix(kernel, total)
        ell1 = sum_seminorm(parts, "l1")
        constraints = []
        for psi in ell1.functionals:
            a = la.vecmat(psi, section, dim)
            b = la.vecmat(psi, kmat, k) if k else ()
            constraints.append((a + b, ONE))
        proj = fm_project(HPolyhedron(dim + k, constraints), range(dim, dim + k))
        funcs = []
        for phi, b in proj.constraints:
            if all(v == 0 for v in phi):
                continue
            if b <= 0:
                raise ValueError("projected ball does not contain the origin in its interior")
            funcs.append(tuple(v / b for v in phi))
        return SemiNorm(dim, funcs)
    raise ValueError(f"unknown method {method!r}")


def canonical_facets(p: SemiNorm) -> frozenset:
    """Irredundant functional set of ``p``, for comparing descriptions."""
    return frozenset(p.pruned().functionals)


# ---------------------------------------------------------------------------
# pushout


@dataclass
class PushoutResult:
    C: MultiNormedSpace
    i_A: LinearMap
    i_Y: LinearMap
    pi_prime: LinearMap
    r: Fraction
    certificate: Certificate


def _depth_check(*spaces: MultiNormedSpace):
    depths = {s.depth for s in spaces}
    if len(depths) != 1:
        raise PreconditionError(f"level counts differ: {sorted(depths)}")


def pushout(inclusion: LinearMap, e: LinearMap, T: LinearMap, pi: LinearMap,
            r: Fraction, method: str = "dd", check_pre: bool = True) -> PushoutResult:
    """Amalgamate ``A`` and ``Y`` over ``X`` with the weighted infimal norm.

    ``inclusion`` embeds ``X`` isometrically into ``Y``, ``e`` embeds ``X``
    isometrically into ``A``, ``T: Y -> Z`` has norm at most ``r`` and
    ``pi: A -> Z`` is non-expansive with ``T inclusion = pi e``.  The space
    ``C`` is ``A (+) Y`` modulo ``{(e x, -x)}`` with
    ``||[(a, y)]|| = inf_x ||a - e x|| + r ||y + x||``.

    Coordinates of ``C``: ``Y`` is split along ``inclusion`` and a
    complement ``K`` of standard basis vectors, and ``[(a, y)]`` becomes
    ``(a + e s(y), t(y))`` where ``y = inclusion s(y) + K t(y)``.
    """
    r = Fraction(r)
    X, Y, A, Z = inclusion.domain, inclusion.codomain, e.codomain, T.codomain
    if e.domain.dim != X.dim or T.domain.dim != Y.dim or pi.domain.dim != A.dim \
            or pi.codomain.dim != Z.dim:
        raise PreconditionError("diagram maps do not fit together")
    _depth_check(X, Y, A)
    if r < 1:
        raise PreconditionError("r must be at least 1")
    if r == 1 and Z.dim != 0:
        raise PreconditionError("r = 1 is only admitted when the target space is zero")
    pre = []
    if check_pre:
        pre.append(require_isometric(inclusion, ZERO, "inclusion X -> Y"))
        pre.append(require_isometric(e, ZERO, "e"))
        square = identity_leaf([(ONE, [T.factor(), inclusion.factor()]),
                                (-ONE, [pi.factor(), e.factor()])],
                               Z.dim, X.dim, "T restricted to X equals pi e")
        if not square.holds:
            raise PreconditionError("commuting square T|X = pi e fails",
                                    Certificate.composite("pushout", "", [square]))
        pre.append(square)
        pi_ok = opnorm_bound(pi, ONE, "pi is non-expansive")
        if not pi_ok.holds:
            raise PreconditionError("pi is not non-expansive", pi_ok)
        t_ok = opnorm_bound(T, r, f"||T|| <= {r}")
        if not t_ok.holds:
            raise PreconditionError(f"||T|| exceeds r = {r}", t_ok)
        pre += [pi_ok, t_ok]

    dx, dy, da = X.dim, Y.dim, A.dim
    jcols = la.transpose(inclusion.matrix, dx)
    extra = la.extend_to_basis(jcols, dy)
    k = len(extra)
    basis = la.columns_to_matrix(tuple(jcols) + tuple(extra), dy)
    binv = la.inverse(basis) if dy else ()
    s_mat = binv[:dx]
    t_mat = binv[dx:]
    es = la.matmul(e.matrix, s_mat, cols=dy) if dx else la.zeros(da, dy)
    dc = da + k
    q = tuple(
        tuple(la.identity(da)[i]) + tuple(es[i]) for i in range(da)
    ) + tuple((ZERO,) * da + tuple(t_mat[i]) for i in range(k))
    levels = tuple(
        infimal_seminorm([(A.levels[i], ONE), (Y.levels[i], r)], q, dc, method)
        for i in range(A.depth)
    )
    C = MultiNormedSpace(dc, levels, A.graded and Y.graded)
    i_A = LinearMap(A, C, tuple(tuple(row) for row in la.identity(da)) + la.zeros(k, da))
    i_Y = LinearMap(Y, C, tuple(tuple(es[i]) for i in range(da)) + tuple(t_mat))
    kmat = la.columns_to_matrix(extra, dy)
    tk = la.matmul(T.matrix, kmat, cols=k) if k else la.zeros(Z.dim, 0)
    pi_prime = LinearMap(C, Z, tuple(tuple(pi.matrix[i]) + tuple(tk[i]) for i in range(Z.dim)))

    post = [
        check_eps_isometric(i_A, ZERO).certificate,
        check_eps_isometric(i_Y, r - 1).certificate,
        opnorm_bound(pi_prime, ONE, "pi' is non-expansive"),
        identity_leaf([(ONE, [i_A.factor(), e.factor()]),
                       (-ONE, [i_Y.factor(), inclusion.factor()])],
                      dc, dx, "i_A e = i_Y on X"),
        identity_leaf([(ONE, [pi_prime.factor(), i_A.factor()]), (-ONE, [pi.factor()])],
                      Z.dim, da, "pi' i_A = pi"),
        identity_leaf([(ONE, [pi_prime.factor(), i_Y.factor()]), (-ONE, [T.factor()])],
                      Z.dim, dy, "pi' i_Y = T"),
    ]
    post[0].claim = "i_A is isometric"
    post[1].claim = f"i_Y is {r - 1}-isometric"
    if C.graded:
        g = check_graded(C).certificate
        post.append(g)
    cert = Certificate.composite("pushout", f"pushout with r = {r}", pre + post)
    return PushoutResult(C, i_A, i_Y, pi_prime, r, cert)


def zero_target(depth: int = 1) -> MultiNormedSpace:
    return MultiNormedSpace(0, tuple(SemiNorm(0, ()) for _ in range(depth)), graded=True)


def amalgamate(inclusion: LinearMap, e: LinearMap, method: str = "dd",
               check_pre: bool = True) -> PushoutResult:
    """Isometric amalgam: the pushout with ``r = 1`` over the zero target."""
    Z = zero_target()
    T = LinearMap(inclusion.codomain, Z, ())
    pi = LinearMap(e.codomain, Z, ())
    return pushout(inclusion, e, T, pi, ONE, method, check_pre)


# ---------------------------------------------------------------------------
# corrector amalgam


@dataclass
class CorrectorResult:
    Z: MultiNormedSpace
    iota: LinearMap
    j: LinearMap
    eps: Fraction
    certificate: Certificate


def corrector_amalgam(f: LinearMap, eps: Fraction, method: str = "dd") -> CorrectorResult:
    """Replace an ``eps``-isometry ``f: X -> Y`` by isometries into ``X (+) Y``.

    Level ``i`` of ``Z`` is
    ``||(x, y)|| = min ||u|| + ||v|| + eps ||w||`` over ``x = u + w``,
    ``y = v - f(w)``.  Then ``iota(x) = (x, 0)`` and ``j(y) = (0, y)`` are
    isometric and ``||j f - iota|| <= eps`` at every level.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    X, Y = f.domain, f.codomain
    _depth_check(X, Y)
    pre = require_isometric(f, eps, "f")
    dx, dy = X.dim, Y.dim
    dz = dx + dy
    q = tuple(
        tuple(la.identity(dx)[i]) + (ZERO,) * dy + tuple(la.identity(dx)[i]) for i in range(dx)
    ) + tuple(
        (ZERO,) * dx + tuple(la.identity(dy)[i]) + tuple(-v for v in f.matrix[i])
        for i in range(dy)
    )
    levels = tuple(
        infimal_seminorm([(X.levels[i], ONE), (Y.levels[i], ONE), (X.levels[i], eps)],
                         q, dz, method)
        for i in range(X.depth)
    )
    Z = MultiNormedSpace(dz, levels, X.graded and Y.graded)
    iota = LinearMap(X, Z, tuple(tuple(r) for r in la.identity(dx)) + la.zeros(dy, dx))
    j = LinearMap(Y, Z, la.zeros(dx, dy) + tuple(tuple(r) for r in la.identity(dy)))
    diff = j.compose(f) - iota
    children = [
        pre,
        check_eps_isometric(iota, ZERO).certificate,
        check_eps_isometric(j, ZERO).certificate,
        opnorm_bound(diff, eps, f"||j f - iota|| <= {eps}"),
    ]
    children[1].claim = "iota is isometric"
    children[2].claim = "j is isometric"
    if Z.graded:
        children.append(check_graded(Z).certificate)
    cert = Certificate.composite("corrector", f"corrector amalgam with eps = {eps}", children)
    return CorrectorResult(Z, iota, j, eps, cert)


# ---------------------------------------------------------------------------
# basis perturbation


class UnboundedError(ValueError):
    pass


@dataclass
class BasisDelta:
    delta: Fraction
    constant: Fraction
    per_level: tuple[Fraction, ...]
    certificate: Certificate


def l1_norm(dim: int) -> SemiNorm:
    return SemiNorm(dim, [tuple(ONE if (mask >> k) & 1 else -ONE for k in range(dim))
                          for mask in range(2 ** dim)] if dim else [])


def basis_delta(F: MultiNormedSpace, basis: Sequence[Sequence[Fraction]], eps: Fraction) -> BasisDelta:
    """Perturbation radius on a basis that keeps every operator semi-norm within ``eps``.

    ``basis`` lists the basis vectors.  With ``M`` the largest operator
    semi-norm of the coordinate map from a level of ``F`` into l1, the
    result is ``delta = eps / M``: maps agreeing within ``delta`` on every
    basis vector differ by at most ``eps`` at every level.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = F.dim
    cols = [la.vec(v) for v in basis]
    if len(cols) != n or la.rank(cols, n) != n:
        raise ValueError("vectors do not form a basis")
    if n == 0:
        cert = Certificate.composite("basis-delta", "zero space", [])
        return BasisDelta(eps, ZERO, tuple(ZERO for _ in F.levels), cert)
    coords = la.inverse(la.columns_to_matrix(cols, n))
    target = single_level(l1_norm(n))
    values, children = [], []
    for i in range(F.depth):
        m = LinearMap(single_level(F.levels[i]), target, coords)
        value, cert = operator_seminorm_certificate(m, 0)
        if value == UNBOUNDED:
            raise UnboundedError(f"level {i} has a kernel; no finite radius exists")
        cert.claim = f"level {i}: coefficient l1 mass <= {value}"
        values.append(value)
        children.append(cert)
    M = max(values)
    cert = Certificate.composite("basis-delta", f"delta = {eps} / {M}", children)
    return BasisDelta(eps / M, M, tuple(values), cert)


# ---------------------------------------------------------------------------
# graded lift


@dataclass
class GradedLift:
    B: MultiNormedSpace
    pi_B: LinearMap
    i: LinearMap
    certificate: Certificate


def graded_lift(T: LinearMap, norm_X: SemiNorm | None = None) -> GradedLift:
    """Two-level space ``B = A (+) X`` through which ``T: X -> A`` factors isometrically.

    Level 0 of ``B`` is ``||a + T x||_A`` and level 1 is
    ``max(||a + T x||_A, ||x||_X)``; ``pi_B(a, x) = a + T x`` and
    ``i(x) = (0, x)``.
    """
    A = T.codomain
    if A.depth != 1:
        raise PreconditionError("target must carry a single norm")
    X = T.domain if norm_X is None else single_level(norm_X)
    if X.depth != 1:
        raise PreconditionError("source must carry a single norm")
    T = LinearMap(X, A, T.matrix)
    bound = opnorm_bound(T, ONE, "T is non-expansive")
    if not bound.holds:
        raise PreconditionError("T is not non-expansive", bound)
    da, dx = A.dim, X.dim
    pi_mat = tuple(tuple(la.identity(da)[r]) + tuple(T.matrix[r]) for r in range(da))
    norm_a = A.levels[0]
    level0 = norm_a.pulled_back(pi_mat, da + dx)
    chi = [(ZERO,) * da + tuple(phi) for phi in X.levels[0].functionals]
    level1 = SemiNorm(da + dx, list(level0.functionals) + chi)
    B = MultiNormedSpace(da + dx, (level0, level1), graded=True)
    pi_B = LinearMap(B, A, pi_mat)
    i_mat = la.zeros(da, dx) + tuple(tuple(r) for r in la.identity(dx))
    i = LinearMap(X, B, i_mat)
    top = MultiNormedSpace(da + dx, (level1,), graded=True)
    i_top = LinearMap(X, top, i_mat)
    children = [
        bound,
        identity_leaf([(ONE, [pi_B.factor(), i.factor()]), (-ONE, [T.factor()])],
                      da, dx, "pi_B i = T"),
        check_eps_isometric(i_top, ZERO).certificate,
        opnorm_bound(pi_B, ONE, "pi_B is non-expansive"),
        check_graded(B).certificate,
    ]
    children[2].claim = "i is isometric into the top level"
    cert = Certificate.composite("graded-lift", "graded lift of T", children)
    return GradedLift(B, pi_B, i, cert)


# ---------------------------------------------------------------------------
# projective extension


@dataclass
class ProjectiveExtension:
    stage: MultiNormedSpace
    bond: LinearMap
    f: LinearMap
    pi_prime: LinearMap
    certificate: Certificate
    chain: object = None


def projective_extension(inclusion: LinearMap, e: LinearMap, T: LinearMap, pi_B: LinearMap,
                         r: Fraction, chain=None, method: str = "dd") -> ProjectiveExtension:
    """Extend ``e: E -> B`` along ``E -> F`` compatibly with projections onto ``A``.

    Given ``pi_B e = T`` on ``E`` and ``||T|| <= r``, returns a new stage
    ``B'`` with an isometric bond ``B -> B'``, a projection ``pi': B' -> A``
    extending ``pi_B``, and an ``(r-1)``-isometric ``f: F -> B'`` with
    ``f`` restricted to ``E`` equal to the bonded ``e`` and ``pi' f = T``.
    When ``chain`` is given its top must be ``B`` and the new stage is
    appended to it.
    """
    r = Fraction(r)
    if r <= 1:
        raise PreconditionError("r must exceed 1")
    res = pushout(inclusion, e, T, pi_B, r, method)
    new_chain = None
    if chain is not None:
        from .fraisse import append_stage

        entry = {"op": "projective-extend", "inclusion": inclusion, "e": e.matrix,
                 "T": T, "r": r}
        new_chain = append_stage(chain, res.C, res.i_A, res.pi_prime, entry)
    children = [
        res.certificate,
        identity_leaf([(ONE, [res.i_Y.factor(), inclusion.factor()]),
                       (-ONE, [res.i_A.factor(), e.factor()])],
                      res.C.dim, inclusion.cols, "f restricted to E equals the bonded e"),
        identity_leaf([(ONE, [res.pi_prime.factor(), res.i_Y.factor()]), (-ONE, [T.factor()])],
                      T.rows, T.cols, "pi' f = T"),
    ]
    cert = Certificate.composite("projective-extension", f"projective extension with r = {r}",
                                 children)
    return ProjectiveExtension(res.C, res.i_A, res.i_Y, res.pi_prime, cert, new_chain)


# ---------------------------------------------------------------------------
# product extension


@dataclass
class ProductExtension:
    f: LinearMap
    bond: LinearMap
    chains: list
    certificate: Certificate


def product_extension(iota: LinearMap, f0: LinearMap, chains: Sequence, eps: Fraction = ZERO):
    """Extend ``f0: X -> P`` along an isometry ``iota: X -> Y`` coordinate by coordinate.

    ``P`` is the product of the chain tops with coordinate semi-norms.
    Level ``i`` of ``f0`` is factored through the level-``i`` quotient of
    ``X``; the induced quotient map of ``iota`` is then extended exactly
    through chain ``i``.  Returns ``f: Y -> P'`` into the product of the new
    tops with ``f iota = bond f0``, certified ``eps``-isometric.
    """
    from .fraisse import extend_chain
    from .spaces import coordinate_factor, induced_quotient_map, product_space

    eps = Fraction(eps)
    X, Y, P = iota.domain, iota.codomain, f0.codomain
    if f0.domain.dim != X.dim:
        raise PreconditionError("f0 and iota have different domains")
    if P.blocks is None or len(P.blocks) != len(chains):
        raise PreconditionError("codomain must be the product of the chain tops")
    common = la.nullspace([phi for p in Y.levels for phi in p.half()], Y.dim)
    if common:
        raise PreconditionError("levels of Y do not separate points; no embedding exists",
                                witness=common[0])
    pre = [require_isometric(iota, ZERO, "iota"), require_isometric(f0, ZERO, "f0")]
    new_chains, rows, bonds, children = [], [], [], []
    for i, chain in enumerate(chains):
        factor, qx, fcert = coordinate_factor(f0, i)
        induced, _, qy, icert = induced_quotient_map(iota, i)
        # the chain top and the block of P are the same normed space
        top = chain.top
        e = LinearMap(factor.domain, top, factor.matrix)
        ext = extend_chain(chain, induced, e)
        new_chains.append(ext.chain)
        rows.append(la.matmul(ext.f.matrix, qy.map.matrix, cols=Y.dim))
        bonds.append((ext.bond.matrix, ext.bond.rows, ext.bond.cols))
        children += [fcert, icert, ext.certificate]
    Pn = product_space([c.top.levels[0] for c in new_chains])
    fmat = tuple(row for block in rows for row in block)
    f = LinearMap(Y, Pn, fmat)
    bond = LinearMap(P, Pn, la.block_diag(bonds))
    children.append(identity_leaf([(ONE, [f.factor(), iota.factor()]),
                                   (-ONE, [bond.factor(), f0.factor()])],
                                  Pn.dim, X.dim, "f iota = bond f0"))
    children.append(check_eps_isometric(f, eps).certificate)
    cert = Certificate.composite("product-extension", "coordinate-wise extension", pre + children)
    return ProductExtension(f, bond, new_chains, cert)

"""Ambient chains, exact finite-stage extension, epsilon schedules and the
back-and-forth iteration.

An :class:`AmbientChain` is a finite sequence of graded spaces joined by
isometric bonds.  It grows only at the top: each extension request is an
isometric amalgam of the current top with the requested superspace, so
every extension is exact rather than approximate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg as la
from .amalgam import amalgamate, corrector_amalgam, projective_extension
from .certificate import Certificate, identity_leaf, inequality_leaf, schedule_leaf, schedule_sum
from .linalg import ZERO, ONE
from .spaces import (
    LinearMap,
    MultiNormedSpace,
    PreconditionError,
    check_eps_isometric,
    check_graded,
    identity_map,
    operator_seminorm,
    opnorm_bound,
    require_isometric,
    subspace,
)


class BudgetExceeded(RuntimeError):
    """A chain stage would exceed the dimension budget."""

    def __init__(self, message: str, certificate: Certificate | None = None):
        super().__init__(message)
        self.certificate = certificate


class ScheduleError(ValueError):
    def __init__(self, message: str, total: Fraction | None = None):
        super().__init__(message)
        self.total = total


@dataclass(frozen=True)
class AmbientChain:
    """Stages ``S_0 -> S_1 -> ...`` with isometric bonds.

    ``projections`` is either ``None`` or one non-expansive map per stage
    into a common target, compatible with the bonds.  ``log`` records, per
    added stage, the request that produced it so the chain can be replayed.
    """

    stages: tuple[MultiNormedSpace, ...]
    bonds: tuple[LinearMap, ...] = ()
    projections: tuple[LinearMap, ...] | None = None
    log: tuple[dict, ...] = ()

    def __post_init__(self):
        if len(self.bonds) != len(self.stages) - 1:
            raise ValueError("a chain needs one bond per consecutive pair of stages")
        if self.projections is not None and len(self.projections) != len(self.stages):
            raise ValueError("a chain with projections needs one per stage")

    @property
    def top(self) -> MultiNormedSpace:
        return self.stages[-1]

    @property
    def length(self) -> int:
        return len(self.stages)

    def embedding(self, k: int) -> LinearMap:
        """Composite of the bonds from stage ``k`` to the top."""
        m = identity_map(self.stages[k])
        for bond in self.bonds[k:]:
            m = bond.compose(m)
        return m


def chain_from(space: MultiNormedSpace, projection: LinearMap | None = None) -> AmbientChain:
    if not space.graded:
        raise PreconditionError("chain stages must be graded")
    return AmbientChain((space,), (), None if projection is None else (projection,), ())


def append_stage(chain: AmbientChain, stage: MultiNormedSpace, bond: LinearMap,
                 projection: LinearMap | None, entry: dict) -> AmbientChain:
    if (projection is None) != (chain.projections is None):
        raise PreconditionError("projection data must be given exactly when the chain has it")
    projections = None if projection is None else chain.projections + (projection,)
    return AmbientChain(chain.stages + (stage,), chain.bonds + (bond,), projections,
                        chain.log + (entry,))


def verify_chain(chain: AmbientChain) -> Certificate:
    """Re-derive every chain invariant from scratch."""
    children = []
    for k, stage in enumerate(chain.stages):
        g = check_graded(stage).certificate
        g.claim = f"stage {k} is graded"
        children.append(g)
    for k, bond in enumerate(chain.bonds):
        c = check_eps_isometric(bond, ZERO).certificate
        c.claim = f"bond {k} is isometric"
        children.append(c)
    if chain.projections is not None:
        for k, p in enumerate(chain.projections):
            children.append(opnorm_bound(p, ONE, f"projection {k} is non-expansive"))
        for k, bond in enumerate(chain.bonds):
            p0, p1 = chain.projections[k], chain.projections[k + 1]
            children.append(identity_leaf([(ONE, [p1.factor(), bond.factor()]),
                                           (-ONE, [p0.factor()])],
                                          p0.rows, p0.cols, f"projections commute with bond {k}"))
    return Certificate.composite("chain", f"chain of {chain.length} stages", children)


# ---------------------------------------------------------------------------
# extension


@dataclass
class ChainExtension:
    chain: AmbientChain
    bond: LinearMap
    f: LinearMap
    certificate: Certificate

    @property
    def stage(self) -> MultiNormedSpace:
        return self.chain.top


def extend_chain(chain: AmbientChain, inclusion: LinearMap, e: LinearMap,
                 method: str = "dd", dim_budget: int | None = None) -> ChainExtension:
    """Extend an isometric ``e: X -> top`` along an isometric ``inclusion: X -> Y``.

    The new top is the isometric amalgam of the old top and ``Y`` over
    ``X``; ``f: Y -> new top`` is isometric with ``f inclusion = bond e``.
    """
    if chain.projections is not None:
        raise PreconditionError("chains with projections grow by projective extension")
    if e.codomain != chain.top:
        raise PreconditionError("e does not land in the top stage")
    res = amalgamate(inclusion, e, method)
    if dim_budget is not None and res.C.dim > dim_budget:
        raise BudgetExceeded(f"new stage has dimension {res.C.dim} > {dim_budget}", res.certificate)
    entry = {"op": "extend", "inclusion": inclusion, "e": e.matrix}
    new = append_stage(chain, res.C, res.i_A, None, entry)
    children = [
        res.certificate,
        identity_leaf([(ONE, [res.i_Y.factor(), inclusion.factor()]),
                       (-ONE, [res.i_A.factor(), e.factor()])],
                      res.C.dim, inclusion.cols, "f restricted to X equals bond e"),
    ]
    cert = Certificate.composite("extend-chain", f"extension to stage {new.length - 1}", children)
    return ChainExtension(new, res.i_A, res.i_Y, cert)


def projective_extend_chain(chain: AmbientChain, inclusion: LinearMap, e: LinearMap,
                            T: LinearMap, r: Fraction, method: str = "dd"):
    """Projective extension of the top of a chain carrying projections."""
    if chain.projections is None:
        raise PreconditionError("chain has no projections")
    return projective_extension(inclusion, e, T, chain.projections[-1], r, chain, method)


def replay_chain(initial: MultiNormedSpace, log: Sequence[dict],
                 projection: LinearMap | None = None) -> AmbientChain:
    """Rebuild a chain from its first stage and construction log."""
    chain = chain_from(initial, projection)
    for entry in log:
        e = LinearMap(entry["inclusion"].domain, chain.top, entry["e"])
        if entry["op"] == "extend":
            chain = extend_chain(chain, entry["inclusion"], e).chain
        elif entry["op"] == "projective-extend":
            T = entry["T"]
            chain = projective_extend_chain(chain, entry["inclusion"], e, T, entry["r"]).chain
        else:
            raise ValueError(f"unknown chain operation {entry['op']!r}")
    return chain


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class EpsSchedule:
    eps: Fraction
    terms: tuple[Fraction, ...]

    @property
    def total(self) -> Fraction:
        return schedule_sum(self.terms)

    def certificate(self) -> Certificate:
        return schedule_leaf(self.eps, self.terms, "sum of (e_n + 2 e_n e_n+1 + e_n+1) < 2 eps")


def eps_schedule(eps: Fraction, K: int, terms: Sequence[Fraction] | None = None) -> EpsSchedule:
    """Schedule ``e_0 .. e_K``; default ``e_n = eps / 2^(n+3)``.

    The pair sum ``sum_{n<K} (e_n + 2 e_n e_{n+1} + e_{n+1})`` must be below
    ``2 eps``; a violating user schedule raises :class:`ScheduleError`
    carrying the exact sum.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ScheduleError("eps must be positive")
    if K < 1:
        raise ScheduleError("at least one round is needed")
    if terms is None:
        terms = tuple(eps / 2 ** (n + 3) for n in range(K + 1))
    else:
        terms = tuple(Fraction(t) for t in terms)
        if len(terms) < K + 1:
            raise ScheduleError(f"{K} rounds need {K + 1} terms, got {len(terms)}")
        terms = terms[:K + 1]
    if any(t <= 0 for t in terms):
        raise ScheduleError("schedule terms must be positive")
    total = schedule_sum(terms)
    if not total < 2 * eps:
        raise ScheduleError(f"schedule sum {total} is not below 2 eps = {2 * eps}", total)
    return EpsSchedule(eps, terms)


# ---------------------------------------------------------------------------
# one back-and-forth step


@dataclass
class BafargResult:
    chain: AmbientChain
    g: LinearMap
    bond: LinearMap
    route: str
    certificate: Certificate


def bafarg_step(f: LinearMap, chain: AmbientChain, embed: LinearMap, eps: Fraction,
                delta: Fraction = ZERO, mode: str = "auto", method: str = "dd",
                dim_budget: int | None = None) -> BafargResult:
    """Send ``Y`` back into the chain so that ``g f`` is within ``2 eps`` of ``X``'s embedding.

    ``f: X -> Y`` is ``eps``-isometric and ``embed: X -> top`` isometric.
    With ``mode="corrector"`` the corrector amalgam of ``f`` is amalgamated
    into the top over ``X`` and ``g`` is its ``Y``-leg.  With ``"exact"``
    (requires ``f`` isometric) ``Y`` itself is amalgamated over ``f`` so
    ``g f`` equals the embedding.  ``"auto"`` picks exact whenever ``f`` is
    certified isometric.  ``g`` is always isometric, hence ``delta``-isometric
    for any ``delta >= 0``.
    """
    eps = Fraction(eps)
    delta = Fraction(delta)
    pre = require_isometric(f, eps, "f")
    require_isometric(embed, ZERO, "embedding of X")
    if mode == "auto":
        mode = "exact" if (eps == 0 or check_eps_isometric(f, ZERO).holds) else "corrector"
    if mode == "exact":
        ext = extend_chain(chain, f, embed, method, dim_budget)
        g = ext.f
        parts = [ext.certificate]
    elif mode == "corrector":
        corr = corrector_amalgam(f, eps, method)
        ext = extend_chain(chain, corr.iota, embed, method, dim_budget)
        g = ext.f.compose(corr.j)
        parts = [corr.certificate, ext.certificate]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    target = ext.bond.compose(embed)
    diff = g.compose(f) - target
    iso = check_eps_isometric(g, delta).certificate
    iso.claim = f"g is {delta}-isometric"
    bound = opnorm_bound(diff, 2 * eps, f"||g f - id|| <= {2 * eps}")
    cert = Certificate.composite("bafarg", f"{mode} step with eps = {eps}",
                                 [pre] + parts + [iso, bound])
    return BafargResult(ext.chain, g, ext.bond, mode, cert)


# ---------------------------------------------------------------------------
# back and forth


@dataclass
class BackAndForthResult:
    chainE: AmbientChain
    chainF: AmbientChain
    fs: list[LinearMap]
    gs: list[LinearMap]
    distance: Fraction
    telescoped: Fraction
    certificate: Certificate


def _coordinates(inclusion: LinearMap, m: LinearMap, space: MultiNormedSpace) -> LinearMap:
    """Rewrite ``m`` (landing in the image of ``inclusion``) in subspace coordinates."""
    left = la.left_inverse(inclusion.matrix, inclusion.cols)
    mat = la.matmul(left, m.matrix, cols=m.cols)
    out = LinearMap(m.domain, space, mat)
    check = la.matmul(inclusion.matrix, mat, cols=m.cols)
    if check != m.matrix:
        raise PreconditionError("map does not land in the subspace")
    return out


def _span(space: MultiNormedSpace, columns) -> tuple[MultiNormedSpace, LinearMap]:
    reduced, _ = la.rref(la.transpose(la.columns_to_matrix(list(columns), space.dim), len(columns))
                         if columns else (), space.dim)
    basis = [tuple(r) for r in reduced]
    if len(basis) == space.dim:
        return space, identity_map(space)
    return subspace(space, basis)


def back_and_forth(chainE: AmbientChain, chainF: AmbientChain, embed: LinearMap, f: LinearMap,
                   schedule: EpsSchedule, rounds: int, dim_budget: int = 10,
                   enrichment: Sequence[tuple[Sequence, Sequence]] | None = None,
                   method: str = "dd") -> BackAndForthResult:
    """Alternate steps between two chains, starting from ``f: X -> top(F)``.

    ``embed: X -> top(E)`` is isometric and ``f`` is ``e_0``-isometric.
    Round ``n`` produces ``g_n: Y_n -> X_{n+1}`` and ``f_{n+1}: X_{n+1} ->
    Y_{n+1}`` and certifies

    * ``||g_n f_n - id|| <= 2 e_n`` on ``X_n``,
    * ``||f_{n+1} g_n - id|| <= 2 e_{n+1}`` on ``Y_n``,
    * ``||f_{n+1} - f_n|| <= 2 (e_n + 2 e_n e_{n+1} + e_{n+1})`` on ``X_n``.

    Afterwards a last ``g_K`` is built, the distance of ``f_K`` from ``f_0``
    on ``X_0`` is certified below the telescoped sum, and the sum is
    certified below ``4 eps``.  By default ``X_{n+1}`` and ``Y_{n+1}`` are
    the whole new top stages; ``enrichment[n] = (vectors_E, vectors_F)``
    instead spans them by the images plus the given top-stage vectors.
    """
    K = rounds
    if K < 1 or len(schedule.terms) < K + 1:
        raise ScheduleError(f"{K} rounds need {K + 1} schedule terms")
    eps_n = schedule.terms
    if f.domain != embed.domain:
        raise PreconditionError("f and the embedding have different domains")
    if f.codomain != chainF.top:
        raise PreconditionError("f does not land in the top of the second chain")
    for c in (chainE, chainF):
        if c.top.dim > dim_budget:
            raise BudgetExceeded(f"initial stage exceeds the dimension budget {dim_budget}")
    rounds_cert: list[Certificate] = [schedule.certificate()]
    head = [require_isometric(f, eps_n[0], "f_0")]

    X0 = f.domain
    startF = chainF.length - 1
    x_incl = embed                                 # X_n -> top(E)
    y_incl = identity_map(chainF.top)              # Y_n -> top(F)
    f_n = f                                        # X_n -> Y_n
    fs, gs = [f], []
    x0_into = identity_map(X0)                     # X_0 -> X_n
    step_bounds = []

    def fail(message, exc_cert=None):
        partial = Certificate.composite("back-and-forth", "partial", head + rounds_cert
                                        + ([exc_cert] if exc_cert is not None else []))
        return BudgetExceeded(message, partial)

    for n in range(K + 1):
        try:
            back = bafarg_step(f_n, chainE, x_incl, eps_n[n], method=method, dim_budget=dim_budget)
        except BudgetExceeded as exc:
            raise fail(f"round {n}: {exc}", exc.certificate) from None
        chainE = back.chain
        gs.append(back.g)
        gf = back.certificate.children[-1]
        gf.claim = f"round {n}: ||g f - id|| <= 2 e_{n}"
        if n == K:
            rounds_cert.append(Certificate.composite("round", f"closing step {n}", [back.certificate]))
            break
        # X_{n+1}
        bonded_x = back.bond.compose(x_incl)
        if enrichment is None:
            x_next_incl = identity_map(chainE.top)
        else:
            extra_e = [la.vec(v) for v in enrichment[n][0]]
            cols = list(la.transpose(back.g.matrix, back.g.cols)) + \
                list(la.transpose(bonded_x.matrix, bonded_x.cols)) + extra_e
            _, x_next_incl = _span(chainE.top, cols)
        X_next = x_next_incl.domain
        g_local = _coordinates(x_next_incl, back.g, X_next)
        x_step = _coordinates(x_next_incl, bonded_x, X_next)        # X_n -> X_{n+1}
        try:
            forth = bafarg_step(g_local, chainF, y_incl, eps_n[n + 1], method=method,
                                dim_budget=dim_budget)
        except BudgetExceeded as exc:
            raise fail(f"round {n}: {exc}", exc.certificate) from None
        chainF = forth.chain
        bonded_y = forth.bond.compose(y_incl)
        f_next_top = forth.g                                          # X_{n+1} -> top(F)
        if enrichment is None:
            y_next_incl = identity_map(chainF.top)
        else:
            extra_f = [la.vec(v) for v in enrichment[n][1]]
            cols = list(la.transpose(f_next_top.matrix, f_next_top.cols)) + \
                list(la.transpose(bonded_y.matrix, bonded_y.cols)) + extra_f
            _, y_next_incl = _span(chainF.top, cols)
        fg = forth.certificate.children[-1]
        fg.claim = f"round {n}: ||f g - id|| <= 2 e_{n + 1}"
        a, b = eps_n[n], eps_n[n + 1]
        step = 2 * (a + 2 * a * b + b)
        step_bounds.append(step)
        diff = f_next_top.compose(x_step) - bonded_y.compose(f_n)
        step_cert = opnorm_bound(diff, step, f"round {n}: ||f_{n + 1} - f_{n}|| <= {step}")
        rounds_cert.append(Certificate.composite(
            "round", f"round {n}", [back.certificate, forth.certificate, step_cert]))
        # advance
        x0_into = x_step.compose(x0_into)
        x_incl = x_next_incl
        y_incl = y_next_incl
        f_n = _coordinates(y_incl, f_next_top, y_incl.domain)
        fs.append(f_n)

    # telescoped distance between f_K and f_0 on X_0
    fK_top = y_incl.compose(f_n).compose(x0_into)
    f0_top = chainF.embedding(startF).compose(f)
    telescoped = sum(step_bounds, ZERO)
    distance = max((operator_seminorm(fK_top - f0_top, i) for i in range(X0.depth)), default=ZERO)
    final = opnorm_bound(fK_top - f0_top, telescoped, f"||f_K - f_0|| <= {telescoped}")
    total = inequality_leaf(step_bounds, 4 * schedule.eps, strict=True,
                            claim=f"telescoped sum < 4 eps = {4 * schedule.eps}")
    cert = Certificate.composite("back-and-forth", f"{K} rounds", head + rounds_cert + [final, total])
    return BackAndForthResult(chainE, chainF, fs, gs, distance, telescoped, cert)


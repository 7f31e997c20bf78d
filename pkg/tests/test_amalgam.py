import random
from fractions import Fraction as Q

import pytest

from conftest import L12, LINF2, float_infimal, lmap, norm, qv, space
from polyamalgam import instances
from polyamalgam.amalgam import (
    amalgamate,
    basis_delta,
    canonical_facets,
    corrector_amalgam,
    graded_lift,
    infimal_seminorm,
    product_extension,
    projective_extension,
    pushout,
)
from polyamalgam.certificate import verify_certificate
from polyamalgam.fraisse import chain_from
from polyamalgam.linalg import rank
from polyamalgam.spaces import (
    PreconditionError,
    check_eps_isometric,
    check_graded,
    operator_seminorm,
    product_space,
)

ABS = [(1,)]
ZERO_SPACE = space(0, [])


def zero_maps(Y, A):
    return lmap(Y, ZERO_SPACE, []), lmap(A, ZERO_SPACE, [])


# ---------------------------------------------------------------------------
# infimal semi-norms


def test_infimal_l1_of_two_lines_is_l1():
    L = norm(1, ABS)
    p = infimal_seminorm([(L, 1), (L, 1)], ((Q(1), Q(0)), (Q(0), Q(1))), 2)
    assert canonical_facets(p) == frozenset(norm(2, L12).functionals)


def test_infimal_matches_float_oracle():
    rng = random.Random(11)
    for _ in range(15):
        d1, d2 = rng.randint(1, 2), rng.randint(1, 2)
        p1, p2 = instances.norm(rng, d1), instances.seminorm(rng, d2, None, rng.randint(0, d2 - 1))
        w = Q(rng.choice([1, 3, 2]), rng.choice([1, 2]))
        dim = rng.randint(1, d1 + d2)
        while True:
            q = tuple(instances.vector(rng, d1 + d2) for _ in range(dim))
            if rank(q, d1 + d2) == dim:
                break
        dd = infimal_seminorm([(p1, 1), (p2, w)], q, dim, "dd")
        fm = infimal_seminorm([(p1, 1), (p2, w)], q, dim, "fm")
        assert canonical_facets(dd) == canonical_facets(fm)
        for _ in range(4):
            c = instances.vector(rng, dim)
            assert abs(float(dd(c)) - float_infimal([(p1, 1), (p2, w)], q, c)) < 1e-7


# ---------------------------------------------------------------------------
# pushout


def test_pushout_sup_planes_over_a_line():
    A = space(2, LINF2)
    X = space(1, ABS)
    j = lmap(X, A, [(1,), (0,)])
    res = amalgamate(j, j)
    assert res.C.dim == 3 and res.certificate.holds
    assert check_eps_isometric(res.i_A, 0).holds and check_eps_isometric(res.i_Y, 0).holds
    fm = amalgamate(j, j, method="fm")
    assert canonical_facets(res.C.levels[0]) == canonical_facets(fm.C.levels[0])


def test_pushout_over_zero_is_weighted_sum():
    A, Y, X, Z = space(1, ABS), space(1, ABS), space(0, []), space(1, ABS)
    res = pushout(lmap(X, Y, [()]), lmap(X, A, [()]), lmap(Y, Z, [(1,)]), lmap(A, Z, [(1,)]),
                  Q(3, 2))
    assert res.certificate.holds
    # ||i_Y(y)|| = r ||y|| on the nose
    assert res.C.levels[0](res.i_Y(qv(1))) == Q(3, 2)
    assert res.C.levels[0](res.i_A(qv(1))) == 1


def test_pushout_full_locus_returns_a():
    A = space(2, LINF2, L12)
    idA = lmap(A, A, [(1, 0), (0, 1)])
    res = amalgamate(idA, idA)
    assert res.C.dim == 2
    assert canonical_facets(res.C.levels[0]) == canonical_facets(A.levels[0])


def test_pushout_i_a_is_isometric_lower_bound():
    # the i_A isometry invariant on a lopsided instance
    rng = random.Random(5)
    inst = instances.pushout_instance(rng, Q(2))
    res = pushout(inst.inclusion, inst.e, inst.T, inst.pi, inst.r)
    assert res.certificate.children[-6 if not res.C.graded else -7].holds


def test_pushout_preconditions():
    A, X = space(2, LINF2), space(1, ABS)
    j = lmap(X, A, [(1,), (0,)])
    T, pi = zero_maps(A, A)
    with pytest.raises(PreconditionError):
        pushout(j, lmap(X, A, [(2,), (0,)]), T, pi, 1)
    Z = space(1, ABS)
    with pytest.raises(PreconditionError):
        pushout(j, j, lmap(A, Z, [(1, 0)]), lmap(A, Z, [(1, 0)]), 1)
    with pytest.raises(PreconditionError):
        pushout(j, j, lmap(A, Z, [(3, 0)]), lmap(A, Z, [(3, 0)]), 2)


@pytest.mark.parametrize("seed", range(6))
def test_pushout_random_dd_equals_fm(seed):
    rng = random.Random(seed)
    inst = instances.pushout_instance(rng, rng.choice([Q(1), Q(3, 2), Q(2)]))
    dd = pushout(inst.inclusion, inst.e, inst.T, inst.pi, inst.r)
    fm = pushout(inst.inclusion, inst.e, inst.T, inst.pi, inst.r, method="fm")
    assert dd.certificate.holds and fm.certificate.holds
    for a, b in zip(dd.C.levels, fm.C.levels):
        assert canonical_facets(a) == canonical_facets(b)


# ---------------------------------------------------------------------------
# corrector


def test_corrector_identity():
    X = space(2, LINF2, L12)
    res = corrector_amalgam(lmap(X, X, [(1, 0), (0, 1)]), Q(1, 4))
    assert res.certificate.holds
    diff = res.j.compose(lmap(X, X, [(1, 0), (0, 1)])) - res.iota
    assert all(operator_seminorm(diff, i) <= Q(1, 4) for i in range(2))


def test_corrector_scaling_by_hand():
    eps = Q(1, 8)
    L = space(1, ABS)
    f = lmap(L, L, [(1 + eps,)])
    res = corrector_amalgam(f, eps)
    # ||(a, b)|| = min_w |a - w| + |b + (1+eps) w| + eps |w|; the minimum sits at a breakpoint
    for a, b in [(1, 0), (0, 1), (1, -1), (2, 3), (-1, Q(9, 8))]:
        a, b = Q(a), Q(b)
        cand = [a, -b / (1 + eps), Q(0)]
        hand = min(abs(a - w) + abs(b + (1 + eps) * w) + eps * abs(w) for w in cand)
        assert res.Z.levels[0](qv(a, b)) == hand
    assert operator_seminorm(res.j.compose(f) - res.iota, 0) == eps


def test_corrector_refuses_non_isometry():
    L = space(1, ABS)
    with pytest.raises(PreconditionError) as exc:
        corrector_amalgam(lmap(L, L, [(2,)]), Q(1, 8))
    assert exc.value.witness is not None


def test_corrector_dd_equals_fm():
    X = space(1, ABS, [(2,)])
    f = lmap(X, X, [(Q(9, 8),)])
    dd = corrector_amalgam(f, Q(1, 4))
    fm = corrector_amalgam(f, Q(1, 4), "fm")
    assert dd.certificate.holds
    for a, b in zip(dd.Z.levels, fm.Z.levels):
        assert canonical_facets(a) == canonical_facets(b)


# ---------------------------------------------------------------------------
# basis delta and graded lift


def test_basis_delta_examples():
    assert basis_delta(space(1, ABS), [qv(1)], Q(1, 3)).delta == Q(1, 3)
    box = basis_delta(space(2, LINF2), [qv(1, 0), qv(0, 1)], Q(1, 4))
    assert box.constant == 2 and box.delta == Q(1, 8)
    assert basis_delta(space(2, L12), [qv(1, 0), qv(0, 1)], Q(1, 4)).delta == Q(1, 4)


def test_basis_delta_rejects_kernels():
    from polyamalgam.amalgam import UnboundedError

    with pytest.raises(UnboundedError):
        basis_delta(space(2, [(1, 0)]), [qv(1, 0), qv(0, 1)], Q(1, 4))


def test_graded_lift_examples():
    L = space(1, ABS)
    for t in (0, 1, Q(1, 2)):
        res = graded_lift(lmap(L, L, [(t,)]))
        assert res.certificate.holds and check_graded(res.B).holds
        assert verify_certificate(res.certificate).ok
    res = graded_lift(lmap(L, L, [(0,)]))
    # T = 0: the top level is max(||a||, ||x||)
    assert res.B.levels[1](qv(2, 3)) == 3


def test_graded_lift_rejects_expansive_t():
    L = space(1, ABS)
    with pytest.raises(PreconditionError):
        graded_lift(lmap(L, L, [(2,)]))


# ---------------------------------------------------------------------------
# projective and product extensions


def test_projective_extension_over_zero():
    A = space(1, ABS)
    F = space(2, LINF2)
    E = space(0, [])
    chain = chain_from(A, lmap(A, A, [(1,)]))
    res = projective_extension(lmap(E, F, [(), ()]), lmap(E, A, [()]), lmap(F, A, [(0, 0)]),
                               lmap(A, A, [(1,)]), Q(3, 2), chain)
    assert res.certificate.holds
    assert check_eps_isometric(res.f, Q(1, 2)).holds
    assert res.chain.length == 2


def test_projective_extension_requires_r_above_one():
    A = space(1, ABS)
    with pytest.raises(PreconditionError):
        projective_extension(lmap(A, A, [(1,)]), lmap(A, A, [(1,)]), lmap(A, A, [(1,)]),
                             lmap(A, A, [(1,)]), 1)


def test_projective_extension_composes():
    # an eps1-step followed by an eps2-step through a superspace of the new stage
    rng = random.Random(2)
    e1, e2 = Q(1, 10), Q(1, 4)
    inst = instances.projective_instance(rng, e1)
    first = projective_extension(inst.inclusion, inst.e, inst.T, inst.pi_B, inst.r)
    assert first.certificate.holds
    B1 = first.f.codomain
    sup = instances.superspace(rng, B1, 1)
    idB1 = lmap(B1, B1, [[int(r == c) for c in range(B1.dim)] for r in range(B1.dim)])
    T2 = first.pi_prime.compose(sup.projection)
    second = projective_extension(sup.inclusion, idB1, T2, first.pi_prime, 1 + e2)
    assert second.certificate.holds
    total = second.f.compose(sup.inclusion).compose(first.f)
    assert check_eps_isometric(total, (1 + e1) * (1 + e2) - 1).holds


def test_product_extension_diagonal():
    X = space(1, ABS, ABS, graded=False)
    Y = space(2, [(1, 0)], [(0, 1)], graded=False)
    R = space(1, ABS)
    P = product_space([R.levels[0], R.levels[0]])
    res = product_extension(lmap(X, Y, [(1,), (1,)]), lmap(X, P, [(1,), (1,)]),
                            [chain_from(R), chain_from(R)])
    assert res.certificate.holds and verify_certificate(res.certificate).ok
    assert [c.length for c in res.chains] == [2, 2]


def test_product_extension_identity():
    X = space(1, ABS)
    R = space(1, ABS)
    P = product_space([R.levels[0]])
    res = product_extension(lmap(X, X, [(1,)]), lmap(X, P, [(1,)]), [chain_from(R)])
    assert res.certificate.holds and res.f.matrix == (qv(1),)


def test_product_extension_degenerate_level():
    # level 0 of X is zero, so that coordinate factors through the zero quotient
    X = space(1, [], ABS, graded=True)
    Y = space(2, [(0, 1)], LINF2)
    R = space(1, ABS)
    P = product_space([R.levels[0], R.levels[0]])
    iota = lmap(X, Y, [(1,), (0,)])
    f0 = lmap(X, P, [(0,), (1,)])
    res = product_extension(iota, f0, [chain_from(R), chain_from(R)])
    assert res.certificate.holds

import random
from fractions import Fraction as Q

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import L12, LINF2, brute_norm_max, brute_vertices, kernel_free_norms, norm, qv
from polyamalgam.certificate import verify_certificate
from polyamalgam.polyhedra import (
    DimensionError,
    HPolyhedron,
    SemiNorm,
    UnboundedBallError,
    ball_generators,
    ball_vertices,
    dominates,
    fm_project,
    hull_seminorm,
    lp_optimize,
    prune_redundant,
    seminorm_eval,
    seminorm_kernel,
    support_value,
)
from polyamalgam.polyhedra import _lp_full


def box(dim):
    cons = []
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        cons += [(qv(*e), Q(1)), (qv(*[-v for v in e]), Q(1))]
    return HPolyhedron(dim, cons)


# ---------------------------------------------------------------------------
# lp_optimize


def test_lp_interval():
    res = lp_optimize(qv(1), HPolyhedron(1, [(qv(1), 1), (qv(-1), 1)]))
    assert (res.status, res.value, res.point) == ("optimum", 1, qv(1))


def test_lp_box():
    res = lp_optimize(qv(1, 1), box(2))
    assert res.status == "optimum" and res.value == 2 and res.point == qv(1, 1)


def test_lp_half_line_is_unbounded():
    res = lp_optimize(qv(1), HPolyhedron(1, [(qv(-1), 1)]))
    assert res.status == "unbounded" and res.ray == qv(1)


def test_lp_simplex_matches_vertex_enumeration():
    region = HPolyhedron(2, [(qv(1, 1), 1), (qv(-1, 0), 0), (qv(0, -1), 0)])
    res = lp_optimize(qv(2, -3), region)
    verts = brute_vertices([c for c, _ in region.constraints], 2, [b for _, b in region.constraints])
    assert verts == {qv(0, 0), qv(1, 0), qv(0, 1)}
    assert res.value == max(2 * x - 3 * y for x, y in verts) == 2
    assert res.point == qv(1, 0)


def test_lp_infeasible():
    res = lp_optimize(qv(1), HPolyhedron(1, [(qv(1), -1), (qv(-1), -1)]))
    assert res.status == "infeasible"


def test_lp_dimension_mismatch():
    with pytest.raises(DimensionError):
        lp_optimize(qv(1, 2), box(1))


def test_lp_multipliers_prove_the_bound():
    region = HPolyhedron(2, [(qv(1, 2), 4), (qv(3, -1), 2), (qv(-1, 0), 1), (qv(0, -1), 1)])
    res = lp_optimize(qv(1, 1), region)
    lam = res.multipliers
    assert all(v >= 0 for v in lam)
    combo = [sum(l * c[k] for l, (c, _) in zip(lam, region.constraints)) for k in range(2)]
    assert combo == [1, 1]
    assert sum(l * b for l, (_, b) in zip(lam, region.constraints)) == res.value


@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)),
                min_size=1, max_size=5),
       st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-3, 3)))
def test_lp_agrees_with_vertex_enumeration_on_bounded_regions(rows, objective):
    # intersect with a box so the region is a polytope
    cons = [(qv(*r[:2]), Q(abs(r[2]) + 1)) for r in rows] + list(box(2).constraints)
    region = HPolyhedron(2, cons)
    verts = brute_vertices([c for c, _ in cons], 2, [b for _, b in cons])
    obj = qv(*objective[:2])
    res = lp_optimize(obj, region)
    assert res.status == "optimum"
    assert res.value == max(sum(a * b for a, b in zip(obj, v)) for v in verts)
    assert region.contains(res.point)


@given(st.integers(1, 4), st.integers(0, 10_000), st.booleans())
def test_constraint_generation_matches_full_solve(dim, seed, bounded):
    # enough constraints to take the generation path; optionally leave a side open
    rng = random.Random(seed)
    cons = [(tuple(Q(rng.randint(-4, 4), rng.randint(1, 3)) for _ in range(dim)), Q(rng.randint(1, 5)))
            for _ in range(6 * dim)]
    if bounded:
        cons += list(box(dim).constraints)
    region = HPolyhedron(dim, cons)
    obj = tuple(Q(rng.randint(-3, 3), rng.randint(1, 2)) for _ in range(dim))
    got = lp_optimize(obj, region)
    want = _lp_full(obj, region)
    assert got.status == want.status
    if got.status == "optimum":
        assert got.value == want.value
        assert region.contains(got.point)
        lam = got.multipliers
        assert all(v >= 0 for v in lam)
        assert [sum(l * c[k] for l, (c, _) in zip(lam, cons)) for k in range(dim)] == list(obj)
        assert sum(l * b for l, (_, b) in zip(lam, cons)) == got.value


# ---------------------------------------------------------------------------
# fm_project and prune_redundant


def test_fm_one_step():
    region = HPolyhedron(2, [(qv(1, -1), 0), (qv(0, 1), 1)])
    out = fm_project(region, [1])
    assert out.constraints == ((qv(1), Q(1)),)


def test_fm_box():
    out = fm_project(box(2), [1])
    assert set(out.constraints) == {(qv(1), Q(1)), (qv(-1), Q(1))}


def test_fm_interval_sum():
    # x = u + w, |u| <= 1, |w| <= 1/2  ->  |x| <= 3/2
    cons = [(qv(1, -1, -1), 0), (qv(-1, 1, 1), 0), (qv(0, 1, 0), 1), (qv(0, -1, 0), 1),
            (qv(0, 0, 1), Q(1, 2)), (qv(0, 0, -1), Q(1, 2))]
    out = fm_project(HPolyhedron(3, cons), [1, 2])
    values = {c[0] * Q(1) / b for c, b in out.constraints}
    assert values == {Q(2, 3), Q(-2, 3)}


def test_prune_keeps_tightest():
    out = prune_redundant(HPolyhedron(1, [(qv(1), 1), (qv(1), 2)]))
    assert out.constraints == ((qv(1), Q(1)),)


def test_prune_box_unchanged():
    out = prune_redundant(box(2))
    assert len(out.constraints) == 4


def test_prune_random_3d_keeps_feasible_set():
    rng = random.Random(3)
    cons = [(qv(*(rng.randint(-3, 3) for _ in range(3))), Q(rng.randint(1, 4))) for _ in range(12)]
    region = HPolyhedron(3, cons + list(box(3).constraints))
    pruned = prune_redundant(region)
    assert len(pruned.constraints) <= len(region.constraints)
    for _ in range(20):
        obj = qv(*(rng.randint(-3, 3) for _ in range(3)))
        assert lp_optimize(obj, region).value == lp_optimize(obj, pruned).value


@given(st.lists(st.tuples(*[st.integers(-2, 2)] * 3), min_size=1, max_size=4),
       st.tuples(st.integers(-2, 2), st.integers(-2, 2)))
def test_fm_projection_support_values(rows, objective):
    cons = [(qv(*r[:3]), Q(1)) for r in rows] + list(box(3).constraints)
    region = HPolyhedron(3, cons)
    proj = fm_project(region, [2])
    obj = qv(*objective)
    full = lp_optimize(obj + (Q(0),), region)
    assert lp_optimize(obj, proj).value == full.value


# ---------------------------------------------------------------------------
# semi-norms


def test_seminorm_eval_examples():
    assert seminorm_eval(norm(2, LINF2), qv(Q(3, 2), -2)) == 2
    assert seminorm_eval(norm(2, L12), qv(1, 1)) == 2
    assert seminorm_eval(norm(2, L12), qv(0, 0)) == 0


def test_seminorm_eval_dimension_mismatch():
    with pytest.raises(DimensionError):
        seminorm_eval(norm(2, LINF2), qv(1))


def test_kernel_examples():
    assert seminorm_kernel(norm(2, [(1, 0)])) == (qv(0, 1),)
    assert seminorm_kernel(norm(2, LINF2)) == ()
    assert seminorm_kernel(norm(2, [(1, 1)])) == (qv(1, -1),)


def test_seminorm_symmetric_closure():
    p = norm(2, [(1, 2)])
    assert set(p.functionals) == {qv(1, 2), qv(-1, -2)}


@given(kernel_free_norms(2), st.tuples(*[st.integers(-5, 5)] * 2))
def test_seminorm_eval_zero_iff_kernel(p, x):
    x = qv(*x)
    assert (seminorm_eval(p, x) == 0) == all(v == 0 for v in x)
    assert seminorm_eval(p, x) >= 0


def test_dominates_examples():
    linf, l1 = norm(2, LINF2), norm(2, L12)
    assert dominates(linf, l1, 1).holds
    bad = dominates(l1, linf, 1)
    assert not bad.holds and bad.witness_kind == "point"
    assert l1(bad.witness) > linf(bad.witness)
    assert dominates(l1, linf, 2).holds


def test_dominates_ray_witness():
    res = dominates(norm(2, [(0, 1)]), norm(2, [(1, 0)]), 5)
    assert not res.holds and res.witness_kind == "ray"
    assert verify_certificate(res.certificate).ok


@given(kernel_free_norms(2))
def test_dominates_reflexive(p):
    res = dominates(p, p, 1)
    assert res.holds and verify_certificate(res.certificate, resolve=True).ok


@given(kernel_free_norms(2), kernel_free_norms(2))
def test_dominates_matches_vertex_oracle(p, q):
    verts = brute_vertices(list(q.functionals), 2)
    best = brute_norm_max(p.functionals, verts)
    assert dominates(p, q, best).holds
    assert not dominates(p, q, best - Q(1, 1000)).holds


def test_ball_vertices_examples():
    assert set(ball_vertices(norm(2, LINF2))) == {qv(a, b) for a in (1, -1) for b in (1, -1)}
    assert set(ball_vertices(norm(2, L12))) == {qv(1, 0), qv(-1, 0), qv(0, 1), qv(0, -1)}


def test_ball_vertices_octagon():
    # the unit ball of max(|x|,|y|, (2/3)(|x|+|y|)) is a box with cut corners
    p = SemiNorm(2, [qv(1, 0), qv(0, 1), qv(Q(2, 3), Q(2, 3)), qv(Q(2, 3), Q(-2, 3))])
    verts = set(ball_vertices(p))
    assert len(verts) == 8
    assert verts == brute_vertices(list(p.functionals), 2)


def test_ball_vertices_twice_l1_against_box_has_four():
    # the 2-scaled l1 ball contains the box, so only the box corners remain
    p = SemiNorm(2, [qv(1, 0), qv(0, 1), qv(Q(1, 2), Q(1, 2)), qv(Q(1, 2), Q(-1, 2))])
    assert len(ball_vertices(p)) == 4


def test_ball_vertices_unbounded():
    with pytest.raises(UnboundedBallError):
        ball_vertices(norm(2, [(1, 0)]))


def test_ball_generators_with_kernel():
    points, lines = ball_generators(norm(2, [(1, 0)]))
    assert len(lines) == 1 and lines[0][0] == 0


@given(kernel_free_norms(3))
def test_ball_vertices_match_brute_force(p):
    assert set(ball_vertices(p)) == brute_vertices(list(p.functionals), 3)


@given(kernel_free_norms(2), st.tuples(st.integers(-3, 3), st.integers(-3, 3)))
def test_support_values_reproduce_eval(p, phi):
    # the support function of the vertex hull equals the dual norm computed by LP
    phi = qv(*phi)
    verts = ball_vertices(p)
    assert support_value(phi, p) == max(sum(a * b for a, b in zip(phi, v)) for v in verts)


@given(kernel_free_norms(2))
def test_hull_round_trip(p):
    back = hull_seminorm(2, ball_vertices(p), ())
    assert set(back.pruned().functionals) == set(p.pruned().functionals)

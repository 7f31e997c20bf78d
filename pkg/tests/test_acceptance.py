"""The nine acceptance criteria, each at its stated sample size and exact tolerance.

Every test prints one PASS/FAIL line (also collected in the terminal
summary).  Construction certificates are replayed, and the headline
invariants are re-derived with separate calls so the check does not rest
on the construction's own bookkeeping.
"""

import filecmp
import json
import random
import subprocess
import sys
import time
from contextlib import contextmanager
from fractions import Fraction as Q

import pytest

from conftest import ACCEPTANCE_LINES
from polyamalgam import instances
from polyamalgam import linalg as la
from polyamalgam.amalgam import basis_delta, corrector_amalgam, graded_lift, projective_extension, pushout
from polyamalgam.certificate import Certificate, verify_certificate
from polyamalgam.cli import OK, install_fixture, load_fixture, run
from polyamalgam.fraisse import eps_schedule
from polyamalgam.io import Workspace
from polyamalgam.polyhedra import ball_vertices, dominates
from polyamalgam.spaces import (
    LinearMap,
    MultiNormedSpace,
    block_space,
    check_eps_isometric,
    check_graded,
    coordinate_factor,
    induced_quotient_map,
    operator_seminorm,
    single_level,
)

pytestmark = pytest.mark.acceptance


@contextmanager
def criterion(number, title):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        line = f"criterion {number}: FAIL  {title} ({type(exc).__name__}: {exc})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"criterion {number}: PASS  {title} [{time.perf_counter() - start:.1f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)


def replayed(cert):
    assert cert.holds, cert.first_failure().claim
    report = verify_certificate(cert)
    assert report.ok, report.failures[:3]


def non_expansive(f: LinearMap) -> bool:
    return all(operator_seminorm(f, i, min(i, f.codomain.depth - 1)) <= 1
               for i in range(f.domain.depth))


def same(f: LinearMap, g: LinearMap) -> bool:
    return f.matrix == g.matrix


# ---------------------------------------------------------------------------


def test_pushout_suite():
    with criterion(1, "pushout invariants on 200 instances, r in {1, 3/2, 2}"):
        rng = random.Random(101)
        for k in range(200):
            r = (Q(1), Q(3, 2), Q(2))[k % 3]
            inst = instances.pushout_instance(rng, r)
            res = pushout(inst.inclusion, inst.e, inst.T, inst.pi, r)
            replayed(res.certificate)
            assert check_eps_isometric(res.i_A, 0).holds
            assert check_eps_isometric(res.i_Y, r - 1).holds
            assert non_expansive(res.pi_prime)
            assert same(res.i_Y.compose(inst.inclusion), res.i_A.compose(inst.e))
            assert same(res.pi_prime.compose(res.i_A), inst.pi)
            assert same(res.pi_prime.compose(res.i_Y), inst.T)


def test_corrector_suite():
    with criterion(2, "corrector amalgam on 100 eps-isometries"):
        rng = random.Random(202)
        for k in range(100):
            eps = (Q(1, 10), Q(1, 4), Q(1, 2))[k % 3]
            dim = rng.randint(1, 3)
            depth = rng.randint(1, 3)
            X = instances.graded_space(rng, dim, depth, rng.randint(0, dim - 1), 4 - depth)
            extra = rng.randint(0, 3 - dim)
            target = instances.superspace(rng, X, extra) if extra else None
            f = instances.eps_isometry(rng, X, target, eps)
            res = corrector_amalgam(f, eps)
            replayed(res.certificate)
            assert check_eps_isometric(res.iota, 0).holds
            assert check_eps_isometric(res.j, 0).holds
            gap = res.j.compose(f) - res.iota
            assert all(operator_seminorm(gap, i) <= eps for i in range(depth))


def test_oracle_equivalence():
    with criterion(3, "dominates and operator semi-norm against ball vertices, 500 pairs"):
        rng = random.Random(303)
        for _ in range(500):
            p, q, m = instances.kernel_free_pair(rng)
            verts = ball_vertices(q)
            best = max(p(v) for v in verts)
            assert dominates(p, q, best).holds
            assert not dominates(p, q, best * Q(999, 1000)).holds
            f = LinearMap(single_level(q), single_level(p), m)
            assert operator_seminorm(f, 0) == max(p(la.matvec(m, v)) for v in verts)


def test_quotient_diagrams():
    with criterion(4, "induced quotient maps and coordinate factors, 100 maps"):
        rng = random.Random(404)
        for k in range(100):
            if k % 2 == 0:
                f, eps = instances.isometric_inclusion(rng), Q(0)
            else:
                eps = Q(1, 4)
                dim = rng.randint(1, 3)
                depth = rng.randint(1, 3)
                X = instances.graded_space(rng, dim, depth, rng.randint(0, min(2, dim - 1)),
                                           4 - depth)
                f = instances.eps_isometry(rng, X, None, eps)
            X = f.domain
            for i in range(X.depth):
                m, qd, qc, cert = induced_quotient_map(f, i, eps)
                replayed(cert)
                assert la.matmul(m.matrix, qd.map.matrix, cols=X.dim) == \
                    la.matmul(qc.map.matrix, f.matrix, cols=X.dim)
                if m.cols:
                    assert check_eps_isometric(m, eps).holds
            prod = instances.product_embedding(rng, X, eps)
            for i in range(X.depth):
                factor, qd, cert = coordinate_factor(prod.f0, i, eps)
                replayed(cert)
                _, proj = block_space(prod.f0.codomain, i)
                assert la.matmul(factor.matrix, qd.map.matrix, cols=X.dim) == \
                    la.matmul(proj, prod.f0.matrix, cols=X.dim)


def test_graded_lift_contract():
    with criterion(5, "graded lift of 100 non-expansive operators"):
        rng = random.Random(505)
        for _ in range(100):
            T = instances.contraction(rng)
            res = graded_lift(T)
            replayed(res.certificate)
            assert same(res.pi_B.compose(res.i), T)
            top = MultiNormedSpace(res.B.dim, (res.B.levels[1],), True)
            assert check_eps_isometric(LinearMap(T.domain, top, res.i.matrix), 0).holds
            assert non_expansive(res.pi_B)
            assert check_graded(res.B).holds


def test_projective_step():
    with criterion(6, "projective extension on 50 graded inclusions, delta in {1/10, 1/4}"):
        rng = random.Random(606)
        for k in range(50):
            delta = (Q(1, 10), Q(1, 4))[k % 2]
            inst = instances.projective_instance(rng, delta)
            res = projective_extension(inst.inclusion, inst.e, inst.T, inst.pi_B, inst.r)
            replayed(res.certificate)
            assert same(res.f.compose(inst.inclusion), res.bond.compose(inst.e))
            assert same(res.pi_prime.compose(res.f), inst.T)
            assert check_eps_isometric(res.f, inst.r - 1).holds


def _walk(cert):
    yield cert
    for c in cert.children:
        yield from _walk(c)


@pytest.mark.parametrize("fixture", ["back_and_forth_1d", "back_and_forth_2d"])
def test_back_and_forth_bound(fixture, tmp_path):
    with criterion(7, f"back and forth, eps 1/8, K = 4, {fixture}"):
        ws = Workspace(tmp_path)
        fx = load_fixture(fixture)
        install_fixture(fx, ws)
        for command in fx["commands"]:
            assert run(["--workspace", str(tmp_path), *command]) == OK
        eps, K = Q(1, 8), 4
        terms = eps_schedule(eps, K).terms
        expected = sum(2 * (terms[n] + 2 * terms[n] * terms[n + 1] + terms[n + 1]) for n in range(K))
        assert expected < 4 * eps

        cert = Certificate.from_json(json.loads(ws.path("certs", "back-and-forth-H").read_text()))
        replayed(cert)
        claims = {c.claim: c for c in _walk(cert)}
        for n in range(K):
            assert claims[f"round {n}: ||g f - id|| <= 2 e_{n}"].holds
            assert claims[f"round {n}: ||f g - id|| <= 2 e_{n + 1}"].holds
        assert claims[f"round {K}: ||g f - id|| <= 2 e_{K}"].holds
        assert claims[f"||f_K - f_0|| <= {expected}"].holds
        assert claims[f"telescoped sum < 4 eps = {4 * eps}"].holds

        proc = subprocess.run([sys.executable, "-m", "polyamalgam.cli", "--workspace", str(tmp_path),
                               "verify", "back-and-forth-H"], capture_output=True, text=True)
        assert proc.returncode == OK, proc.stdout[-2000:] + proc.stderr
        line = next(s for s in proc.stdout.splitlines() if s.startswith("telescoped sum"))
        assert Q(line.split(":")[1].split("<")[0].strip()) == expected


def test_basis_perturbation():
    with criterion(8, "basis perturbation on 100 pairs plus boundary probes"):
        rng = random.Random(808)
        for k in range(100):
            dim = rng.randint(1, 3)
            depth = rng.randint(1, 2)
            F = instances.normed_graded_space(rng, dim, depth, 3 - depth)
            W = instances.graded_space(rng, rng.randint(1, 3), depth, 0, 3 - depth)
            basis = [tuple(c) for c in la.transpose(instances.invertible(rng, dim), dim)]
            eps = (Q(1, 10), Q(1, 4), Q(1, 2))[k % 3]
            bd = basis_delta(F, basis, eps)
            replayed(bd.certificate)
            for boundary in (False, True):
                pair = instances.perturbed_pair(rng, F, W, basis, bd.delta, boundary)
                diff = pair.g - pair.h
                moved = [max(W.levels[i](la.matvec(diff.matrix, v)) for i in range(depth))
                         for v in basis]
                assert max(moved) <= bd.delta
                if boundary:
                    assert max(moved) == bd.delta
                assert all(operator_seminorm(diff, i) <= eps for i in range(depth))


def test_demo_is_deterministic(tmp_path):
    with criterion(9, "demo twice, byte-identical workspaces and output"):
        outs = []
        for name in ("a", "b"):
            proc = subprocess.run([sys.executable, "-m", "polyamalgam.cli", "--workspace",
                                   str(tmp_path / name), "demo"], capture_output=True, text=True)
            assert proc.returncode == OK, proc.stdout[-2000:] + proc.stderr
            outs.append(proc.stdout)
        assert outs[0] == outs[1]
        files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
        files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
        assert files_a == files_b and files_a
        _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b",
                                               [str(p) for p in files_a], shallow=False)
        assert not mismatch and not errors

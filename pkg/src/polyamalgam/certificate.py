"""Certificates: trees of exact rational witnesses and their verifier.

Leaves carry witnesses that are checked by direct rational arithmetic
(weighted sums of functionals, matrix products, sums of fractions); the
verifier never trusts a stored optimum.  Composite nodes hold exactly when
all of their children hold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

from .linalg import ZERO, ONE, dot, matmul, vecmat
from .rational import format_rational, parse_rational

LEAF_KINDS = {
    "dominates",
    "opnorm",
    "matrix-identity",
    "injective",
    "rational-inequality",
    "schedule-sum",
}

COMPOSITE_KINDS = {
    "graded",
    "eps-isometric",
    "opnorm-bound",
    "quotient",
    "induced-quotient-map",
    "coordinate-factor",
    "pushout",
    "corrector",
    "graded-lift",
    "projective-extension",
    "product-extension",
    "basis-delta",
    "extend-chain",
    "chain",
    "bafarg",
    "back-and-forth",
    "round",
    "bundle",
}


class UnknownKindError(ValueError):
    pass


class CertificateError(ValueError):
    """A certificate is malformed or a witness does not check."""


@dataclass
class Certificate:
    kind: str
    holds: bool
    claim: str = ""
    data: dict = field(default_factory=dict)
    children: list["Certificate"] = field(default_factory=list)

    @classmethod
    def composite(cls, kind: str, claim: str, children: Sequence["Certificate"]) -> "Certificate":
        children = list(children)
        return cls(kind, all(c.holds for c in children), claim, {}, children)

    @classmethod
    def failed(cls, kind: str, data: dict, claim: str = "") -> "Certificate":
        return cls(kind, False, claim, data)

    def first_failure(self) -> "Certificate | None":
        """The first leaf, in depth-first order, that does not hold."""
        if self.holds:
            return None
        if not self.children:
            return self
        for c in self.children:
            f = c.first_failure()
            if f is not None:
                return f
        return self

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "holds": self.holds}
        if self.claim:
            out["claim"] = self.claim
        if self.data:
            out["data"] = _encode(self.data)
        if self.children:
            out["children"] = [c.to_json() for c in self.children]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Certificate":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise CertificateError("certificate node without a kind")
        kind = obj["kind"]
        if kind not in LEAF_KINDS and kind not in COMPOSITE_KINDS:
            raise UnknownKindError(f"unknown certificate kind {kind!r}")
        return cls(
            kind,
            bool(obj.get("holds", False)),
            obj.get("claim", ""),
            _decode(obj.get("data", {})),
            [cls.from_json(c) for c in obj.get("children", [])],
        )


def _encode(x):
    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, bool):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    raise TypeError(f"cannot encode {type(x).__name__} in a certificate")


def _decode(x):
    if isinstance(x, str):
        return parse_rational(x)
    if isinstance(x, dict):
        return {k: _decode(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_decode(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# leaf builders


def _matrix_data(m, rows: int, cols: int) -> dict:
    return {"rows": rows, "cols": cols, "entries": [list(r) for r in m]}


def _weights_entries(entries) -> list:
    return [{"functional": list(phi), "weights": list(w), "value": v} for phi, w, v in entries]


def dominates_leaf(p, q, c, entries, claim: str = "") -> Certificate:
    """Leaf proving ``p <= c q``; ``entries`` are ``(phi, weights, value)`` triples."""
    data = {
        "dim": p.dim,
        "p": [list(f) for f in p.functionals],
        "q": [list(f) for f in q.functionals],
        "c": Fraction(c),
        "entries": _weights_entries(entries),
    }
    return Certificate("dominates", True, claim, data)


def dominates_failure(p, q, c, phi, point=None, ray=None, claim: str = "") -> Certificate:
    data = {
        "dim": p.dim,
        "p": [list(f) for f in p.functionals],
        "q": [list(f) for f in q.functionals],
        "c": Fraction(c),
        "functional": list(phi),
    }
    if point is not None:
        data["point"] = list(point)
    else:
        data["ray"] = list(ray)
    return Certificate("dominates", False, claim, data)


def bind_origin(cert: Certificate, side: str, matrix, rows: int, cols: int, funcs) -> Certificate:
    """Record that side ``p`` or ``q`` of a domination leaf is ``funcs`` pulled back along ``matrix``.

    The verifier then recomputes that side instead of trusting it.
    """
    cert.data[f"{side}_origin"] = {
        "map": _matrix_data(matrix, rows, cols),
        "functionals": [list(f) for f in funcs],
    }
    return cert


def opnorm_leaf(matrix, rows, cols, dom_funcs, cod_funcs, value, entries, point,
                claim: str = "") -> Certificate:
    data = {
        "map": _matrix_data(matrix, rows, cols),
        "domain": [list(f) for f in dom_funcs],
        "codomain": [list(f) for f in cod_funcs],
        "value": value,
        "entries": _weights_entries(entries),
    }
    if point is not None:
        data["point"] = list(point)
    return Certificate("opnorm", True, claim, data)


def opnorm_unbounded_leaf(matrix, rows, cols, dom_funcs, cod_funcs, phi, ray,
                          claim: str = "") -> Certificate:
    data = {
        "map": _matrix_data(matrix, rows, cols),
        "domain": [list(f) for f in dom_funcs],
        "codomain": [list(f) for f in cod_funcs],
        "functional": list(phi),
        "ray": list(ray),
    }
    return Certificate("opnorm", False, claim, data)


def identity_leaf(terms, rows: int, cols: int, claim: str = "") -> Certificate:
    """Leaf asserting ``sum(coef * A1 A2 ... Ak) == 0``.

    ``terms`` is a list of ``(coef, [(matrix, rows, cols), ...])``.
    """
    enc = []
    for coef, factors in terms:
        enc.append({"coef": Fraction(coef),
                    "factors": [_matrix_data(m, r, c) for m, r, c in factors]})
    data = {"rows": rows, "cols": cols, "terms": enc}
    try:
        residue = _identity_residue(data)
        holds = all(v == 0 for row in residue for v in row)
    except CertificateError:
        holds = False
    return Certificate("matrix-identity", holds, claim, data)


def injective_leaf(matrix, rows: int, cols: int, left_inverse=None, kernel_vector=None,
                   claim: str = "") -> Certificate:
    data = {"map": _matrix_data(matrix, rows, cols)}
    if left_inverse is not None:
        data["left_inverse"] = _matrix_data(left_inverse, cols, rows)
        return Certificate("injective", True, claim, data)
    data["kernel_vector"] = list(kernel_vector)
    return Certificate("injective", False, claim, data)


def inequality_leaf(terms, bound, strict: bool = False, claim: str = "") -> Certificate:
    """Leaf asserting ``sum(terms) <= bound`` (or ``<`` when strict)."""
    terms = [Fraction(t) for t in terms]
    total = sum(terms, ZERO)
    bound = Fraction(bound)
    holds = total < bound if strict else total <= bound
    data = {"terms": terms, "sum": total, "bound": bound, "strict": int(strict)}
    return Certificate("rational-inequality", holds, claim, data)


def schedule_sum(terms) -> Fraction:
    """``sum_n (e_n + 2 e_n e_{n+1} + e_{n+1})`` over consecutive pairs."""
    terms = [Fraction(t) for t in terms]
    return sum((a + 2 * a * b + b for a, b in zip(terms, terms[1:])), ZERO)


def schedule_leaf(eps, terms, claim: str = "") -> Certificate:
    total = schedule_sum(terms)
    eps = Fraction(eps)
    data = {"eps": eps, "terms": [Fraction(t) for t in terms], "sum": total}
    return Certificate("schedule-sum", total < 2 * eps and all(t > 0 for t in terms), claim, data)


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerifyReport:
    ok: bool
    failures: list[tuple[str, str]]
    leaves: int


def verify_certificate(cert: Certificate, resolve: bool = False) -> VerifyReport:
    """Re-check every witness exactly.

    A node verifies when its witness supports its ``holds`` flag; a composite
    additionally requires ``holds`` to equal the conjunction of its children.
    With ``resolve`` every domination LP is also solved again and its outcome
    compared.
    """
    failures: list[tuple[str, str]] = []
    count = [0]

    def visit(node: Certificate, path: str):
        label = f"{path}/{node.kind}" + (f"[{node.claim}]" if node.claim else "")
        if node.kind in COMPOSITE_KINDS:
            for i, child in enumerate(node.children):
                visit(child, f"{label}#{i}")
            expected = all(c.holds for c in node.children)
            if node.holds != expected:
                failures.append((label, "composite flag disagrees with its children"))
            return
        if node.kind not in LEAF_KINDS:
            raise UnknownKindError(f"unknown certificate kind {node.kind!r}")
        count[0] += 1
        try:
            _CHECKERS[node.kind](node, resolve)
        except (CertificateError, KeyError, TypeError, ValueError, IndexError) as exc:
            if isinstance(exc, UnknownKindError):
                raise
            failures.append((label, str(exc) or type(exc).__name__))

    visit(cert, "")
    return VerifyReport(not failures, failures, count[0])


def _require(cond: bool, message: str):
    if not cond:
        raise CertificateError(message)


def _vec(v, dim, what):
    _require(isinstance(v, list) and len(v) == dim, f"{what} has wrong length")
    return tuple(Fraction(x) for x in v)


def _max_value(funcs, x):
    best = ZERO
    for f in funcs:
        v = dot(f, x)
        if v > best:
            best = v
    return best


def _symmetric(funcs) -> bool:
    s = {tuple(f) for f in funcs}
    return all(tuple(-v for v in f) in s for f in s)


def _canonical(phi) -> bool:
    for v in phi:
        if v != 0:
            return v > 0
    return False


def _check_weight_entries(p_funcs, q_funcs, entries, bound, dim):
    """Each canonical functional of p is a nonnegative combination of q with mass <= bound."""
    _require(_symmetric(q_funcs), "dominating functional list is not symmetric")
    _require(_symmetric(p_funcs), "dominated functional list is not symmetric")
    needed = {tuple(f) for f in p_funcs if _canonical(f)}
    seen = set()
    for e in entries:
        phi = _vec(e["functional"], dim, "functional")
        w = e["weights"]
        _require(len(w) == len(q_funcs), "weight vector has wrong length")
        _require(all(x >= 0 for x in w), "negative weight")
        combo = [ZERO] * dim
        for wi, psi in zip(w, q_funcs):
            if wi:
                for k in range(dim):
                    combo[k] += wi * psi[k]
        _require(tuple(combo) == phi, "weights do not reproduce the functional")
        mass = sum(w, ZERO)
        _require(mass == e["value"], "stored value is not the weight mass")
        _require(mass <= bound, "weight mass exceeds the bound")
        seen.add(phi)
    _require(needed <= seen, "some functional has no domination entry")


def _funcs(lst, dim, what):
    return [_vec(f, dim, what) for f in lst]


def _check_dominates(node: Certificate, resolve: bool):
    d = node.data
    dim = d["dim"]
    p = _funcs(d["p"], dim, "p functional")
    q = _funcs(d["q"], dim, "q functional")
    c = d["c"]
    for side, funcs in (("p", p), ("q", q)):
        origin = d.get(f"{side}_origin")
        if origin is not None:
            m, rows, cols = _matrix(origin["map"])
            _require(cols == dim, f"{side} origin map has the wrong width")
            src = _funcs(origin["functionals"], rows, f"{side} origin functional")
            _require(_pullback_set(src, m, cols) == set(funcs),
                     f"{side} is not the pullback of its recorded origin")
    if node.holds:
        _check_weight_entries(p, q, d["entries"], c, dim)
    else:
        phi = _vec(d["functional"], dim, "functional")
        _require(phi in set(p), "witness functional is not in the dominated list")
        if "point" in d:
            x = _vec(d["point"], dim, "point")
            _require(_max_value(q, x) <= 1, "witness point lies outside the unit ball")
            _require(dot(phi, x) > c, "witness point does not violate the bound")
        else:
            r = _vec(d["ray"], dim, "ray")
            _require(all(dot(f, r) == 0 for f in q), "witness ray is not in the kernel")
            _require(dot(phi, r) > 0, "witness ray does not escape")
    if resolve:
        from .polyhedra import SemiNorm, dominates

        again = dominates(SemiNorm(dim, p), SemiNorm(dim, q), c)
        _require(again.holds == node.holds, "re-solved domination disagrees")


def _matrix(md) -> tuple[tuple, int, int]:
    rows, cols = md["rows"], md["cols"]
    entries = md["entries"]
    _require(len(entries) == rows, "matrix row count mismatch")
    for r in entries:
        _require(len(r) == cols, "matrix column count mismatch")
    return tuple(tuple(Fraction(x) for x in r) for r in entries), rows, cols


def _pullback_set(funcs, m, cols) -> set:
    pulled = [vecmat(f, m, cols) for f in funcs]
    pulled = [f for f in pulled if any(v != 0 for v in f)]
    return set(pulled) | {tuple(-v for v in f) for f in pulled}


def _check_opnorm(node: Certificate, resolve: bool):
    d = node.data
    m, rows, cols = _matrix(d["map"])
    dom = _funcs(d["domain"], cols, "domain functional")
    cod = _funcs(d["codomain"], rows, "codomain functional")
    pulled_set = sorted(_pullback_set(cod, m, cols))
    if node.holds:
        value = d["value"]
        _check_weight_entries(pulled_set, dom, d["entries"], value, cols)
        if value > 0:
            x = _vec(d["point"], cols, "attaining point")
            _require(_max_value(dom, x) <= 1, "attaining point outside the domain ball")
            _require(_max_value(pulled_set, x) == value, "attaining point does not attain")
        else:
            _require(value == 0, "negative operator semi-norm")
    else:
        r = _vec(d["ray"], cols, "ray")
        _require(all(dot(f, r) == 0 for f in dom), "ray is not in the domain kernel")
        _require(_max_value(pulled_set, r) > 0, "ray does not escape")
    if resolve:
        from .polyhedra import SemiNorm
        from .spaces import _opnorm_of

        again = _opnorm_of(m, rows, cols, SemiNorm(cols, dom), SemiNorm(rows, cod))
        if node.holds:
            _require(again == d["value"], "re-solved operator semi-norm disagrees")
        else:
            _require(again is None, "re-solved operator semi-norm is bounded")


def _identity_residue(d):
    rows, cols = d["rows"], d["cols"]
    total = [[ZERO] * cols for _ in range(rows)]
    for term in d["terms"]:
        factors = [_matrix(f) for f in term["factors"]]
        _require(bool(factors), "empty product")
        _require(factors[0][1] == rows and factors[-1][2] == cols, "product has the wrong shape")
        prod, _, pc = factors[0]
        for m, r, c in factors[1:]:
            _require(pc == r, "factors are not composable")
            prod = matmul(prod, m, cols=c)
            pc = c
        coef = term["coef"]
        for i in range(rows):
            for j in range(cols):
                total[i][j] += coef * prod[i][j]
    return total


def _check_identity(node: Certificate, resolve: bool):
    residue = _identity_residue(node.data)
    zero = all(v == 0 for row in residue for v in row)
    _require(zero == node.holds, "matrix identity residue disagrees with the claim")


def _check_injective(node: Certificate, resolve: bool):
    d = node.data
    m, rows, cols = _matrix(d["map"])
    if node.holds:
        left, lr, lc = _matrix(d["left_inverse"])
        _require(lr == cols and lc == rows, "left inverse has the wrong shape")
        prod = matmul(left, m, cols=cols)
        for i in range(cols):
            for j in range(cols):
                _require(prod[i][j] == (ONE if i == j else ZERO), "left inverse fails")
    else:
        v = _vec(d["kernel_vector"], cols, "kernel vector")
        _require(any(x != 0 for x in v), "kernel vector is zero")
        _require(all(dot(r, v) == 0 for r in m), "kernel vector is not in the kernel")


def _check_inequality(node: Certificate, resolve: bool):
    d = node.data
    total = sum((Fraction(t) for t in d["terms"]), ZERO)
    _require(total == d["sum"], "stored sum is wrong")
    ok = total < d["bound"] if d["strict"] else total <= d["bound"]
    _require(ok == node.holds, "inequality outcome disagrees with the claim")


def _check_schedule(node: Certificate, resolve: bool):
    d = node.data
    total = schedule_sum(d["terms"])
    _require(total == d["sum"], "stored schedule sum is wrong")
    ok = total < 2 * d["eps"] and all(t > 0 for t in d["terms"])
    _require(ok == node.holds, "schedule condition disagrees with the claim")


_CHECKERS = {
    "dominates": _check_dominates,
    "opnorm": _check_opnorm,
    "matrix-identity": _check_identity,
    "injective": _check_injective,
    "rational-inequality": _check_inequality,
    "schedule-sum": _check_schedule,
}

"""Command-line front end.

Exit codes: 0 when every claim holds, 1 when a claim fails (the witness is
printed as exact rationals), 2 for unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import linalg as la
from .amalgam import (
    UnboundedError,
    basis_delta,
    corrector_amalgam,
    graded_lift,
    product_extension,
    pushout,
)
from .certificate import Certificate, UnknownKindError, verify_certificate
from .fraisse import (
    BudgetExceeded,
    ScheduleError,
    back_and_forth,
    bafarg_step,
    chain_from,
    eps_schedule,
    extend_chain,
    projective_extend_chain,
)
from .io import ParseError, Workspace, decode_space, decode_vector, load_json
from .polyhedra import DimensionError, UnboundedBallError, dominates
from .rational import RationalParseError, parse_rational
from .spaces import (
    UNBOUNDED,
    LinearMap,
    NotInjectiveError,
    PreconditionError,
    check_eps_isometric,
    check_graded,
    induced_quotient_map,
    operator_seminorm_certificate,
    quotient_by_kernel,
)

OK, FAILED, BAD_INPUT = 0, 1, 2


class CommandError(Exception):
    """A claim or precondition failed; ``witness`` is printed."""

    def __init__(self, message: str, witness=None, certificate: Certificate | None = None):
        super().__init__(message)
        self.witness = witness
        self.certificate = certificate


def show(x) -> str:
    """Exact rendering: ``3/2``, ``-1``, ``(1,1)``, ``inf``."""
    if x == UNBOUNDED:
        return "inf"
    if isinstance(x, (list, tuple)):
        return "(" + ",".join(show(v) for v in x) + ")"
    return str(Fraction(x))


def _rational_arg(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except RationalParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _say(*parts) -> None:
    print(*parts)


def _emit(ws: Workspace, name: str, cert: Certificate) -> int:
    ws.put_cert(name, cert)
    _say(f"certificate {name}: {'holds' if cert.holds else 'FAILS'}")
    if not cert.holds:
        bad = cert.first_failure()
        _say(f"  failing claim: {bad.kind} [{bad.claim}]")
        w = _leaf_witness(bad)
        if w is not None:
            _say(f"  witness {show(w)}")
        return FAILED
    return OK


def _leaf_witness(leaf: Certificate):
    for key in ("point", "ray", "kernel_vector"):
        if key in leaf.data:
            return leaf.data[key]
    return None


# ---------------------------------------------------------------------------
# check


def cmd_check(args, ws: Workspace) -> int:
    kind = args.kind
    if kind == "graded":
        space = ws.space(args.objects[0])
        res = check_graded(space)
        if not res.holds:
            _say(f"not graded; witness {show(res.witness)}")
        return _emit(ws, args.out or f"check-graded-{_stem(args.objects[0])}", res.certificate)
    if kind == "eps-isometric":
        f = ws.map(args.objects[0])
        try:
            res = check_eps_isometric(f, args.eps if args.eps is not None else Fraction(0))
        except NotInjectiveError as exc:
            raise CommandError("map is not injective", exc.kernel_vector) from None
        if not res.holds:
            _say(f"not {args.eps}-isometric; witness {show(res.witness)}")
        return _emit(ws, args.out or f"check-iso-{_stem(args.objects[0])}", res.certificate)
    if kind == "dominates":
        p = ws.space(args.objects[0]).levels[args.level]
        q = ws.space(args.objects[1]).levels[args.level]
        c = args.c if args.c is not None else Fraction(1)
        res = dominates(p, q, c)
        if not res.holds:
            _say(f"p <= {c} q fails; witness {show(res.witness)}")
        name = args.out or f"check-dominates-{_stem(args.objects[0])}-{_stem(args.objects[1])}"
        return _emit(ws, name, res.certificate)
    if kind == "opnorm":
        f = ws.map(args.objects[0])
        levels = [args.level] if args.level_given else range(f.domain.depth)
        children = []
        for i in levels:
            value, cert = operator_seminorm_certificate(f, i)
            _say(f"level {i}: operator semi-norm {show(value)}")
            if args.bound is not None and value != UNBOUNDED and value > args.bound:
                cert = Certificate.failed("rational-inequality",
                                          {"terms": [value], "sum": value, "bound": args.bound,
                                           "strict": 0},
                                          f"level {i}: value {value} exceeds {args.bound}")
            children.append(cert)
        cert = Certificate.composite("opnorm-bound", f"operator semi-norm of {args.objects[0]}",
                                     children)
        return _emit(ws, args.out or f"check-opnorm-{_stem(args.objects[0])}", cert)
    raise ParseError(f"unknown check {kind!r}")


def _stem(ref: str) -> str:
    return Path(ref).stem if ref.endswith(".json") else ref


# ---------------------------------------------------------------------------
# build


def _need(args, *names):
    for n in names:
        if getattr(args, n.replace("-", "_")) is None:
            raise ParseError(f"--{n} is required for build {args.construction}")


def _put_map(ws: Workspace, name: str, f: LinearMap, dom: str, cod: str) -> None:
    ws.put_map(name, f, dom, cod)
    _say(f"map {name}: {dom} -> {cod}")


def _put_space(ws: Workspace, name: str, space) -> None:
    ws.put_space(name, space)
    _say(f"space {name}: dimension {space.dim}, {space.depth} level(s)")


def build_pushout(args, ws):
    _need(args, "inclusion", "e", "T", "pi")
    inc, e, T, pi = (ws.map(getattr(args, k)) for k in ("inclusion", "e", "T", "pi"))
    r = args.r if args.r is not None else Fraction(1)
    res = pushout(inc, e, T, pi, r)
    out = args.out
    A, Y = ws.map_names(args.e)[1], ws.map_names(args.inclusion)[1]
    Z = ws.map_names(args.pi)[1]
    _put_space(ws, out, res.C)
    _put_map(ws, f"{out}.i_A", res.i_A, A, out)
    _put_map(ws, f"{out}.i_Y", res.i_Y, Y, out)
    _put_map(ws, f"{out}.pi", res.pi_prime, out, Z)
    return res.certificate


def build_corrector(args, ws):
    _need(args, "f", "eps")
    f = ws.map(args.f)
    X, Y = ws.map_names(args.f)
    res = corrector_amalgam(f, args.eps)
    out = args.out
    _put_space(ws, out, res.Z)
    _put_map(ws, f"{out}.iota", res.iota, X, out)
    _put_map(ws, f"{out}.j", res.j, Y, out)
    return res.certificate


def build_quotient(args, ws):
    out = args.out
    if args.map is not None:
        iota = ws.map(args.map)
        induced, qd, qc, cert = induced_quotient_map(iota, args.level, args.eps or Fraction(0))
        _put_space(ws, f"{out}.domain", qd.space)
        _put_space(ws, f"{out}.codomain", qc.space)
        _put_map(ws, out, induced, f"{out}.domain", f"{out}.codomain")
        return cert
    _need(args, "space")
    space = ws.space(args.space)
    q = quotient_by_kernel(space, args.level)
    _put_space(ws, out, q.space)
    _put_map(ws, f"{out}.map", q.map, _stem(args.space), out)
    return q.certificate


def build_graded_lift(args, ws):
    _need(args, "T")
    T = ws.map(args.T)
    X, A = ws.map_names(args.T)
    res = graded_lift(T)
    out = args.out
    _put_space(ws, out, res.B)
    _put_map(ws, f"{out}.pi", res.pi_B, out, A)
    _put_map(ws, f"{out}.i", res.i, X, out)
    return res.certificate


def build_chain_init(args, ws):
    _need(args, "space")
    space = ws.space(args.space)
    projection = ws.map(args.projection) if args.projection else None
    chain = chain_from(space, projection)
    ws.put_chain(args.out, chain)
    _say(f"chain {args.out}: 1 stage")
    return check_graded(space).certificate


def _save_chain(ws, name, chain):
    ws.put_chain(name, chain)
    _say(f"chain {name}: {chain.length} stages, top dimension {chain.top.dim}")


def build_extend(args, ws):
    _need(args, "chain", "inclusion", "e")
    chain = ws.chain(args.chain)
    inc = ws.map(args.inclusion)
    e = ws.map(args.e)
    ext = extend_chain(chain, inc, e, dim_budget=args.dim_budget)
    out = args.out or args.chain
    _save_chain(ws, out, ext.chain)
    top = f"{out}.stage{ext.chain.length - 1}"
    _put_map(ws, f"{out}.f", ext.f, ws.map_names(args.inclusion)[1], top)
    return ext.certificate


def build_projective_extend(args, ws):
    _need(args, "chain", "inclusion", "e", "T", "r")
    chain = ws.chain(args.chain)
    res = projective_extend_chain(chain, ws.map(args.inclusion), ws.map(args.e),
                                  ws.map(args.T), args.r)
    out = args.out or args.chain
    _save_chain(ws, out, res.chain)
    top = f"{out}.stage{res.chain.length - 1}"
    _put_map(ws, f"{out}.f", res.f, ws.map_names(args.inclusion)[1], top)
    _put_map(ws, f"{out}.pi", res.pi_prime, top, ws.map_names(args.T)[1])
    return res.certificate


def build_bafarg(args, ws):
    _need(args, "chain", "f", "embed", "eps")
    chain = ws.chain(args.chain)
    res = bafarg_step(ws.map(args.f), chain, ws.map(args.embed), args.eps,
                      dim_budget=args.dim_budget)
    out = args.out or args.chain
    _save_chain(ws, out, res.chain)
    top = f"{out}.stage{res.chain.length - 1}"
    _put_map(ws, f"{out}.g", res.g, ws.map_names(args.f)[1], top)
    _say(f"route: {res.route}")
    return res.certificate


def _schedule(args):
    eps = args.eps
    if args.schedule is None:
        return eps_schedule(eps, args.rounds)
    doc = load_json(args.schedule)
    terms = doc.get("terms") if isinstance(doc, dict) else doc
    terms = decode_vector(terms, f"{args.schedule}:terms")
    if isinstance(doc, dict) and "eps" in doc and eps is None:
        eps = parse_rational(doc["eps"])
    return eps_schedule(eps, args.rounds, terms)


def build_back_and_forth(args, ws):
    _need(args, "chain-e", "chain-f", "embed", "f")
    if args.eps is None and args.schedule is None:
        raise ParseError("--eps or --schedule is required for build back-and-forth")
    schedule = _schedule(args)
    chainE, chainF = ws.chain(args.chain_e), ws.chain(args.chain_f)
    res = back_and_forth(chainE, chainF, ws.map(args.embed), ws.map(args.f), schedule,
                         args.rounds, dim_budget=args.dim_budget)
    out = args.out
    _save_chain(ws, f"{out}.E", res.chainE)
    _save_chain(ws, f"{out}.F", res.chainF)
    _say("stage dimensions E: " + " ".join(str(s.dim) for s in res.chainE.stages))
    _say("stage dimensions F: " + " ".join(str(s.dim) for s in res.chainF.stages))
    _say(f"||f_K - f_0|| = {show(res.distance)}")
    _say(f"telescoped bound = {show(res.telescoped)} < 4 eps = {show(4 * schedule.eps)}")
    return res.certificate


def build_product_extend(args, ws):
    _need(args, "iota", "f0", "chains")
    names = args.chains.split(",")
    chains = [ws.chain(n) for n in names]
    res = product_extension(ws.map(args.iota), ws.map(args.f0), chains, args.eps or Fraction(0))
    out = args.out
    for name, chain in zip(names, res.chains):
        _save_chain(ws, f"{out}.{name}", chain)
    _put_space(ws, f"{out}.P", res.f.codomain)
    _put_map(ws, f"{out}.f", res.f, ws.map_names(args.iota)[1], f"{out}.P")
    return res.certificate


def build_basis_delta(args, ws):
    _need(args, "space", "eps")
    space = ws.space(args.space)
    if args.basis is not None:
        doc = load_json(args.basis)
        basis = [decode_vector(v, f"{args.basis}[{k}]", space.dim) for k, v in enumerate(doc)]
    else:
        basis = list(la.identity(space.dim))
    res = basis_delta(space, basis, args.eps)
    _say(f"M = {show(res.constant)}, delta = {show(res.delta)}")
    return res.certificate


BUILDERS = {
    "pushout": build_pushout,
    "corrector": build_corrector,
    "quotient": build_quotient,
    "graded-lift": build_graded_lift,
    "chain-init": build_chain_init,
    "extend": build_extend,
    "projective-extend": build_projective_extend,
    "bafarg": build_bafarg,
    "back-and-forth": build_back_and_forth,
    "product-extend": build_product_extend,
    "basis-delta": build_basis_delta,
}


def cmd_build(args, ws: Workspace) -> int:
    if args.out is None and args.construction not in ("extend", "projective-extend", "bafarg"):
        raise ParseError(f"--out is required for build {args.construction}")
    cert = BUILDERS[args.construction](args, ws)
    name = args.cert or f"{args.construction}-{args.out or args.chain}"
    return _emit(ws, name, cert)


# ---------------------------------------------------------------------------
# verify


def _load_cert(ref: str, ws: Workspace) -> Certificate:
    path = Path(ref)
    if not path.exists():
        path = ws.path("certs", ref)
    if not path.exists():
        raise ParseError(f"no certificate {ref!r}")
    doc = load_json(path)
    try:
        return Certificate.from_json(doc)
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed certificate: {exc}", str(path)) from None


def _inequalities(cert: Certificate, out: list) -> None:
    if cert.kind == "rational-inequality":
        out.append(cert)
    for c in cert.children:
        _inequalities(c, out)


def cmd_verify(args, ws: Workspace) -> int:
    cert = _load_cert(args.certificate, ws)
    report = verify_certificate(cert, resolve=args.resolve)
    for leaf in _bounds(cert):
        rel = "<" if leaf.data.get("strict") else "<="
        _say(f"{leaf.claim}: {show(leaf.data['sum'])} {rel} {show(leaf.data['bound'])}")
    if not report.ok:
        for path, msg in report.failures:
            _say(f"FAILED {path}: {msg}")
        return FAILED
    _say(f"verified: {report.leaves} leaf claims replayed")
    if not cert.holds:
        bad = cert.first_failure()
        _say(f"the certified claim is false: {bad.kind} [{bad.claim}]")
        return FAILED
    return OK


def _bounds(cert: Certificate) -> list:
    out: list = []
    _inequalities(cert, out)
    return out


# ---------------------------------------------------------------------------
# demo


def fixture_names() -> list[str]:
    root = resources.files("polyamalgam") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_fixture(name: str) -> dict:
    root = resources.files("polyamalgam") / "fixtures"
    return json.loads((root / f"{name}.json").read_text())


def install_fixture(fixture: dict, ws: Workspace) -> None:
    """Write a fixture's spaces and maps into ``ws``.

    Maps are stored as written since some refer to chain stages that the
    fixture's commands create; they are decoded when a command uses them.
    """
    for name, doc in sorted(fixture.get("spaces", {}).items()):
        ws.put_space(name, decode_space(doc, f"spaces.{name}"))
    for name, doc in sorted(fixture.get("maps", {}).items()):
        ws.put_document("maps", name, doc)


def cmd_demo(args, ws: Workspace) -> int:
    names = args.fixtures or fixture_names()
    status = OK
    for name in names:
        fixture = load_fixture(name)
        sub = Workspace(ws.root / name)
        _say(f"== {name}: {fixture.get('description', '')}")
        install_fixture(fixture, sub)
        for command in fixture["commands"]:
            expect = OK
            if isinstance(command, dict):
                expect = command.get("expect", OK)
                command = command["argv"]
            _say("$ polyamalgam " + " ".join(command))
            code = run(["--workspace", str(sub.root)] + list(command))
            if code != expect:
                _say(f"!! expected exit {expect}, got {code}")
                status = FAILED
        for cert_path in sorted((sub.root / "certs").glob("*.json")):
            cert = Certificate.from_json(load_json(cert_path))
            report = verify_certificate(cert)
            _say(f"verify {cert_path.stem}: {'ok' if report.ok else 'FAILED'}"
                 f" ({report.leaves} leaves, holds={cert.holds})")
            expected = cert_path.stem in fixture.get("expected_failures", [])
            if not report.ok or cert.holds == expected:
                status = FAILED
    _say("demo " + ("passed" if status == OK else "FAILED"))
    return status


# ---------------------------------------------------------------------------
# entry point


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polyamalgam", description=__doc__.splitlines()[0])
    ap.add_argument("--workspace", default=".", help="workspace directory (default: .)")
    sub = ap.add_subparsers(dest="verb", required=True)

    chk = sub.add_parser("check", help="check a property and emit a certificate")
    chk.add_argument("kind", choices=["graded", "eps-isometric", "dominates", "opnorm"])
    chk.add_argument("objects", nargs="+", help="space or map names (or .json paths)")
    chk.add_argument("--eps", type=_rational_arg)
    chk.add_argument("--c", type=_rational_arg, help="domination constant (default 1)")
    chk.add_argument("--bound", type=_rational_arg, help="operator semi-norm bound")
    chk.add_argument("--level", type=int, default=None)
    chk.add_argument("--out", help="certificate name")

    b = sub.add_parser("build", help="run a construction and emit a certificate")
    b.add_argument("construction", choices=sorted(BUILDERS))
    b.add_argument("--out", help="name for the constructed object")
    b.add_argument("--cert", help="certificate name")
    for flag in ("inclusion", "e", "T", "pi", "f", "f0", "iota", "embed", "map", "space",
                 "chain", "chain-e", "chain-f", "chains", "projection", "basis"):
        b.add_argument(f"--{flag}")
    b.add_argument("--eps", type=_rational_arg)
    b.add_argument("--r", type=_rational_arg)
    b.add_argument("--level", type=int, default=0)
    b.add_argument("--rounds", type=int, default=4)
    b.add_argument("--dim-budget", type=int, default=10)
    b.add_argument("--schedule", help="JSON file with the schedule terms")

    v = sub.add_parser("verify", help="replay a certificate")
    v.add_argument("certificate", help="certificate name or path")
    v.add_argument("--resolve", action="store_true", help="also re-solve every LP")

    d = sub.add_parser("demo", help="build and verify the bundled fixtures")
    d.add_argument("fixtures", nargs="*", help="fixture names (default: all)")
    return ap


def run(argv) -> int:
    ap = parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    ws = Workspace(Path(args.workspace))
    if args.verb == "check":
        args.level_given = args.level is not None
        args.level = args.level or 0
    handler = {"check": cmd_check, "build": cmd_build, "verify": cmd_verify, "demo": cmd_demo}
    try:
        return handler[args.verb](args, ws)
    except (ParseError, RationalParseError, UnknownKindError, DimensionError, FileNotFoundError,
            IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except CommandError as exc:
        _say(f"failed: {exc}")
        if exc.witness is not None:
            _say(f"witness {show(exc.witness)}")
        return FAILED
    except PreconditionError as exc:
        _say(f"refused: {exc}")
        if exc.witness is not None:
            _say(f"witness {show(exc.witness)}")
        if exc.certificate is not None:
            ws.put_cert("refused", exc.certificate)
        return FAILED
    except NotInjectiveError as exc:
        _say(f"refused: {exc}")
        _say(f"witness {show(exc.kernel_vector)}")
        return FAILED
    except (ScheduleError, BudgetExceeded, UnboundedError, UnboundedBallError) as exc:
        _say(f"refused: {exc}")
        cert = getattr(exc, "certificate", None)
        if cert is not None:
            ws.put_cert("partial", cert)
        return FAILED


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())

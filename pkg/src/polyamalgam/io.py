"""JSON serialization and the on-disk workspace.

All rationals are written as ``"p/q"`` strings.  Documents are written in a
canonical form (sorted keys, two-space indent, trailing newline) so equal
objects always produce equal bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from .certificate import Certificate
from .fraisse import AmbientChain, replay_chain
from .polyhedra import SemiNorm
from .rational import RationalParseError, format_rational, parse_rational
from .spaces import LinearMap, MultiNormedSpace


class ParseError(ValueError):
    """Malformed input; ``where`` locates the problem."""

    def __init__(self, message: str, where: str = ""):
        super().__init__(f"{where}: {message}" if where else message)
        self.where = where


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def content_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


# ---------------------------------------------------------------------------
# encoding


def encode_vector(v) -> list[str]:
    return [format_rational(x) for x in v]


def encode_matrix(m) -> list[list[str]]:
    return [encode_vector(r) for r in m]


def encode_seminorm(p: SemiNorm) -> dict:
    return {"dim": p.dim, "functionals": encode_matrix(p.functionals)}


def encode_space(s: MultiNormedSpace) -> dict:
    out = {"dim": s.dim, "graded": s.graded, "levels": [encode_seminorm(p) for p in s.levels]}
    if s.blocks is not None:
        out["blocks"] = list(s.blocks)
    return out


def encode_map(f: LinearMap, domain=None, codomain=None) -> dict:
    """Map document; ``domain``/``codomain`` are names, or the spaces are inlined."""
    return {
        "domain": domain if domain is not None else encode_space(f.domain),
        "codomain": codomain if codomain is not None else encode_space(f.codomain),
        "matrix": encode_matrix(f.matrix),
    }


def _encode_entry(entry: dict) -> dict:
    out = {"op": entry["op"], "inclusion": encode_map(entry["inclusion"]),
           "e": encode_matrix(entry["e"])}
    if "T" in entry:
        out["T"] = encode_map(entry["T"])
        out["r"] = format_rational(entry["r"])
    return out


def encode_chain(chain: AmbientChain) -> dict:
    out = {
        "initial": encode_space(chain.stages[0]),
        "log": [_encode_entry(e) for e in chain.log],
        "stage_hashes": [content_hash(encode_space(s)) for s in chain.stages],
    }
    if chain.projections is not None:
        out["projection"] = encode_map(chain.projections[0])
    return out


# ---------------------------------------------------------------------------
# decoding


def _rational(x, where: str) -> Fraction:
    try:
        return parse_rational(x)
    except RationalParseError as exc:
        raise ParseError(str(exc), where) from None


def _int(x, where: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or x < 0:
        raise ParseError("expected a nonnegative integer", where)
    return x


def _list(x, where: str) -> list:
    if not isinstance(x, list):
        raise ParseError("expected a list", where)
    return x


def decode_vector(v, where: str, length: int | None = None) -> tuple[Fraction, ...]:
    v = _list(v, where)
    if length is not None and len(v) != length:
        raise ParseError(f"expected {length} entries, found {len(v)}", where)
    return tuple(_rational(x, f"{where}[{k}]") for k, x in enumerate(v))


def decode_seminorm(obj, where: str = "seminorm") -> SemiNorm:
    if not isinstance(obj, dict):
        raise ParseError("expected an object", where)
    d = _int(obj.get("dim"), f"{where}.dim")
    funcs = [decode_vector(f, f"{where}.functionals[{k}]", d)
             for k, f in enumerate(_list(obj.get("functionals", []), f"{where}.functionals"))]
    return SemiNorm(d, funcs)


def decode_space(obj, where: str = "space") -> MultiNormedSpace:
    if not isinstance(obj, dict):
        raise ParseError("expected an object", where)
    d = _int(obj.get("dim"), f"{where}.dim")
    levels = tuple(decode_seminorm(p, f"{where}.levels[{k}]")
                   for k, p in enumerate(_list(obj.get("levels"), f"{where}.levels")))
    if not levels:
        raise ParseError("a space needs at least one level", f"{where}.levels")
    for k, p in enumerate(levels):
        if p.dim != d:
            raise ParseError(f"level dimension {p.dim} differs from {d}", f"{where}.levels[{k}]")
    graded = obj.get("graded", False)
    if not isinstance(graded, bool):
        raise ParseError("expected true or false", f"{where}.graded")
    blocks = obj.get("blocks")
    if blocks is not None:
        blocks = tuple(_int(b, f"{where}.blocks[{k}]") for k, b in enumerate(_list(blocks, where)))
    try:
        return MultiNormedSpace(d, levels, graded, blocks)
    except ValueError as exc:
        raise ParseError(str(exc), where) from None


def decode_map(obj, resolve: Callable[[str], MultiNormedSpace] | None = None,
               where: str = "map") -> LinearMap:
    if not isinstance(obj, dict):
        raise ParseError("expected an object", where)
    spaces = []
    for key in ("domain", "codomain"):
        ref = obj.get(key)
        if isinstance(ref, dict):
            spaces.append(decode_space(ref, f"{where}.{key}"))
        elif isinstance(ref, str) and resolve is not None:
            spaces.append(resolve(ref))
        else:
            raise ParseError("expected a space name or an inline space", f"{where}.{key}")
    dom, cod = spaces
    rows = _list(obj.get("matrix"), f"{where}.matrix")
    if len(rows) != cod.dim:
        raise ParseError(f"expected {cod.dim} rows, found {len(rows)}", f"{where}.matrix")
    m = tuple(decode_vector(r, f"{where}.matrix[{k}]", dom.dim) for k, r in enumerate(rows))
    return LinearMap(dom, cod, m)


def decode_chain(obj, where: str = "chain") -> AmbientChain:
    if not isinstance(obj, dict):
        raise ParseError("expected an object", where)
    initial = decode_space(obj.get("initial"), f"{where}.initial")
    projection = None
    if "projection" in obj:
        projection = decode_map(obj["projection"], where=f"{where}.projection")
        projection = LinearMap(initial, projection.codomain, projection.matrix)
    log = []
    for k, e in enumerate(_list(obj.get("log", []), f"{where}.log")):
        w = f"{where}.log[{k}]"
        entry = {"op": e.get("op"), "inclusion": decode_map(e.get("inclusion"), where=f"{w}.inclusion")}
        inc = entry["inclusion"]
        entry["e"] = tuple(decode_vector(r, f"{w}.e[{i}]", inc.domain.dim)
                           for i, r in enumerate(_list(e.get("e"), f"{w}.e")))
        if "T" in e:
            entry["T"] = decode_map(e["T"], where=f"{w}.T")
            entry["r"] = _rational(e.get("r"), f"{w}.r")
        log.append(entry)
    chain = replay_chain(initial, log, projection)
    hashes = obj.get("stage_hashes")
    if hashes is not None:
        actual = [content_hash(encode_space(s)) for s in chain.stages]
        if list(hashes) != actual:
            bad = next(k for k, (a, b) in enumerate(zip(list(hashes) + [None] * len(actual), actual))
                       if a != b)
            raise ParseError(f"replayed stage {bad} does not match its recorded hash", where)
    return chain


def load_json(path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None


def write_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# workspace


KINDS = ("spaces", "maps", "chains", "certs")


class Workspace:
    """Directory of named spaces, maps, chains and certificates.

    ``index.json`` maps ``kind/name`` to the sha256 of the stored document.
    """

    def __init__(self, root):
        self.root = Path(root)

    def path(self, kind: str, name: str) -> Path:
        return self.root / kind / f"{name}.json"

    def _index(self) -> dict:
        p = self.root / "index.json"
        return json.loads(p.read_text()) if p.exists() else {}

    def put_document(self, kind: str, name: str, doc) -> Path:
        """Store a raw JSON document; it is validated when read back."""
        if kind not in KINDS:
            raise ValueError(f"unknown kind {kind!r}")
        return self._put(kind, name, doc)

    def _put(self, kind: str, name: str, doc) -> Path:
        text = canonical_json(doc)
        path = self.path(kind, name)
        write_atomic(path, text)
        index = self._index()
        index[f"{kind}/{name}"] = hashlib.sha256(text.encode()).hexdigest()
        write_atomic(self.root / "index.json", canonical_json(index))
        return path

    def _get(self, kind: str, name: str):
        path = self.path(kind, name)
        if not path.exists():
            raise ParseError(f"no {kind[:-1]} named {name!r}", str(path))
        return load_json(path)

    # spaces
    def put_space(self, name: str, s: MultiNormedSpace) -> Path:
        return self._put("spaces", name, encode_space(s))

    def space(self, ref: str) -> MultiNormedSpace:
        if ref.endswith(".json") and Path(ref).exists():
            return decode_space(load_json(ref), ref)
        return decode_space(self._get("spaces", ref), f"spaces/{ref}")

    # maps
    def put_map(self, name: str, f: LinearMap, domain: str, codomain: str) -> Path:
        return self._put("maps", name, encode_map(f, domain, codomain))

    def map(self, ref: str) -> LinearMap:
        if ref.endswith(".json") and Path(ref).exists():
            return decode_map(load_json(ref), self.space, ref)
        return decode_map(self._get("maps", ref), self.space, f"maps/{ref}")

    def map_names(self, ref: str) -> tuple[str, str]:
        doc = load_json(ref) if ref.endswith(".json") and Path(ref).exists() else self._get("maps", ref)
        return doc["domain"], doc["codomain"]

    # chains
    def put_chain(self, name: str, chain: AmbientChain) -> Path:
        for k, stage in enumerate(chain.stages):
            self.put_space(f"{name}.stage{k}", stage)
        return self._put("chains", name, encode_chain(chain))

    def chain(self, ref: str) -> AmbientChain:
        return decode_chain(self._get("chains", ref), f"chains/{ref}")

    # certificates
    def put_cert(self, name: str, cert: Certificate) -> Path:
        return self._put("certs", name, cert.to_json())

    def has(self, kind: str, name: str) -> bool:
        return self.path(kind, name).exists()

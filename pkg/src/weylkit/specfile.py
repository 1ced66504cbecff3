"""Plain-text metric and embedding spec files.

Example::

    # Schwarzschild exterior
    [meta]
    name = schwarzschild
    dim = 4
    signature = 3, 1

    [coords]
    t r theta phi

    [params]
    M = 1

    [ranges]
    r = 2.5, 12

    [metric]
    g 0 0 = -(1 - 2*M/r)
    g 1 1 = 1/(1 - 2*M/r)
    g 2 2 = r^2
    g 3 3 = r^2*sin(theta)^2

An embedding file replaces ``[metric]`` with ``[embedding]`` lines
``X mu = <expression>`` and may give the flat ambient metric in ``[meta]``
as ``ambient = -1, 1, 1, 1, 1`` (default all +1).  Unlisted metric entries
are zero, and ``g j i`` follows from ``g i j``.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .constructs import EmbeddingSpec
from .errors import EvalError, ParseError, SpecFileError
from .expr import CONSTANTS, FUNCTIONS, identifiers, parse, to_string
from .geometry import MetricSpec

SECTIONS = ("meta", "coords", "params", "ranges", "metric", "embedding")
_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z_0-9]*$")
_G_LINE = re.compile(r"^g\s+(\d+)\s+(\d+)\s*=")
_X_LINE = re.compile(r"^X\s+(\d+)\s*=")


class _Line:
    __slots__ = ("no", "text", "indent")

    def __init__(self, no: int, raw: str):
        body = raw.split("#", 1)[0].rstrip()
        self.no = no
        self.indent = len(body) - len(body.lstrip())
        self.text = body.strip()


def _err(msg: str, path: str, line: int, col: int = 1) -> SpecFileError:
    return SpecFileError(msg, path, line, col)


def _number(text: str, path: str, ln: _Line, col: int) -> float:
    try:
        return float(text)
    except ValueError:
        pass
    try:
        from .expr import evaluate
        return float(evaluate(parse(text), dict(CONSTANTS)))
    except (ParseError, EvalError):
        raise _err(f"expected a number, got {text!r}", path, ln.no, col) from None


def _key_value(ln: _Line, path: str) -> Tuple[str, str, int]:
    if "=" not in ln.text:
        raise _err("expected 'key = value'", path, ln.no, ln.indent + 1)
    key, value = ln.text.split("=", 1)
    vcol = ln.indent + len(key) + 2 + (len(value) - len(value.lstrip()))
    return key.strip(), value.strip(), vcol


def _expression(text: str, path: str, ln: _Line, col: int):
    try:
        return parse(text)
    except ParseError as exc:
        chars = len(text.encode("utf-8")[:exc.offset].decode("utf-8", errors="ignore"))
        raise _err(exc.message, path, ln.no, col + chars) from None


def _signature(text: str, n: int, path: str, ln: _Line, col: int) -> Tuple[int, int]:
    t = text.replace(" ", "")
    if t and set(t) <= {"+", "-"}:
        return t.count("+"), t.count("-")
    parts = [p for p in re.split(r"[,\s()]+", text) if p]
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise _err(f"signature must be 'n_plus, n_minus' or a sign string, got {text!r}", path, ln.no, col)
    return int(parts[0]), int(parts[1])


def loads_spec(text: str, path: str = "<string>") -> Union[MetricSpec, EmbeddingSpec]:
    """Parse spec-file text; errors carry ``path:line:col``."""
    sections: Dict[str, List[_Line]] = {}
    header_line: Dict[str, int] = {}
    current: Optional[str] = None
    lines = text.splitlines()
    for no, raw in enumerate(lines, start=1):
        ln = _Line(no, raw)
        if not ln.text:
            continue
        m = _HEADER.match(ln.text)
        if m:
            name = m.group(1).lower()
            if name not in SECTIONS:
                raise _err(f"unknown section [{name}]", path, no, ln.indent + 1)
            if name in sections:
                raise _err(f"duplicate section [{name}]", path, no, ln.indent + 1)
            sections[name] = []
            header_line[name] = no
            current = name
            continue
        if current is None:
            raise _err("content before the first section header", path, no, ln.indent + 1)
        sections[current].append(ln)

    end = len(lines) + 1
    for required in ("meta", "coords"):
        if required not in sections:
            raise _err(f"missing section [{required}]", path, end, 1)
    has_metric, has_emb = "metric" in sections, "embedding" in sections
    if has_metric == has_emb:
        what = "both [metric] and [embedding]" if has_metric else "missing section [metric] or [embedding]"
        raise _err(what, path, header_line.get("embedding", end), 1)

    meta: Dict[str, Tuple[str, _Line, int]] = {}
    for ln in sections["meta"]:
        key, value, col = _key_value(ln, path)
        if key in meta:
            raise _err(f"duplicate meta key {key!r}", path, ln.no, ln.indent + 1)
        meta[key] = (value, ln, col)
    for key in ("name", "dim"):
        if key not in meta:
            raise _err(f"missing meta key {key!r}", path, header_line["meta"], 1)
    name = meta["name"][0]
    dim_text, dim_ln, dim_col = meta["dim"]
    if not dim_text.isdigit():
        raise _err(f"dim must be a positive integer, got {dim_text!r}", path, dim_ln.no, dim_col)
    n = int(dim_text)

    coords: List[str] = []
    coord_lines: Dict[str, _Line] = {}
    for ln in sections["coords"]:
        for m in re.finditer(r"[^\s,]+", ln.text):
            tok = m.group(0)
            col = ln.indent + m.start() + 1
            if not _IDENT.match(tok):
                raise _err(f"invalid coordinate name {tok!r}", path, ln.no, col)
            if tok in FUNCTIONS or tok in CONSTANTS:
                raise _err(f"{tok!r} is a reserved word", path, ln.no, col)
            if tok in coord_lines:
                raise _err(f"duplicate coordinate {tok!r}", path, ln.no, col)
            coords.append(tok)
            coord_lines[tok] = ln
    if len(coords) != n:
        raise _err(f"dim mismatch: dim = {n} but {len(coords)} coordinates declared", path,
                   header_line["coords"], 1)

    params: Dict[str, float] = {}
    for ln in sections.get("params", []):
        key, value, col = _key_value(ln, path)
        if not _IDENT.match(key) or key in FUNCTIONS or key in CONSTANTS:
            raise _err(f"invalid parameter name {key!r}", path, ln.no, ln.indent + 1)
        if key in params:
            raise _err(f"duplicate parameter {key!r}", path, ln.no, ln.indent + 1)
        if key in coord_lines:
            raise _err(f"parameter {key!r} shadows a coordinate", path, ln.no, ln.indent + 1)
        params[key] = _number(value, path, ln, col)

    ranges: Dict[str, Tuple[float, float]] = {}
    for ln in sections.get("ranges", []):
        key, value, col = _key_value(ln, path)
        if key not in coord_lines:
            raise _err(f"range for unknown coordinate {key!r}", path, ln.no, ln.indent + 1)
        parts = [p.strip() for p in value.split(",")]
        if len(parts) != 2:
            raise _err("a range is 'low, high'", path, ln.no, col)
        lo, hi = (_number(p, path, ln, col) for p in parts)
        if not lo < hi:
            raise _err("range low must be below high", path, ln.no, col)
        ranges[key] = (lo, hi)

    known = set(coords) | set(params)

    def check_names(expr, ln, col):
        unknown = sorted(identifiers(expr) - known)
        if unknown:
            raise _err(f"unresolved identifier {unknown[0]!r}", path, ln.no, col)

    if has_metric:
        signature = None
        if "signature" in meta:
            sv, sln, scol = meta["signature"]
            signature = _signature(sv, n, path, sln, scol)
            if sum(signature) != n:
                raise _err(f"dim mismatch: signature {signature} does not sum to {n}", path, sln.no, scol)
        comps: Dict[Tuple[int, int], object] = {}
        seen: Dict[Tuple[int, int], _Line] = {}
        for ln in sections["metric"]:
            m = _G_LINE.match(ln.text)
            if not m:
                raise _err("expected 'g i j = <expression>'", path, ln.no, ln.indent + 1)
            i, j = int(m.group(1)), int(m.group(2))
            if i >= n or j >= n:
                raise _err(f"dim mismatch: index out of range for dim = {n}", path, ln.no, ln.indent + 1)
            if (i, j) in seen:
                raise _err(f"duplicate entry g {i} {j} (first on line {seen[(i, j)].no})", path, ln.no,
                           ln.indent + 1)
            seen[(i, j)] = ln
            rest = ln.text[m.end():]
            col = ln.indent + m.end() + 1 + (len(rest) - len(rest.lstrip()))
            expr = _expression(rest.strip(), path, ln, col)
            check_names(expr, ln, col)
            key = (min(i, j), max(i, j))
            if key in comps and to_string(comps[key]) != to_string(expr):
                raise _err(f"symmetry conflict: g {i} {j} differs from g {j} {i}", path, ln.no, ln.indent + 1)
            comps[key] = expr
        try:
            return MetricSpec(name, tuple(coords), params, comps, signature, ranges)
        except (ValueError, EvalError) as exc:
            raise _err(str(exc), path, header_line["metric"], 1) from None

    ambient = (1,) * (n + 1)
    if "ambient" in meta:
        av, aln, acol = meta["ambient"]
        vals = [p for p in re.split(r"[,\s]+", av) if p]
        try:
            ambient = tuple(int(float(v)) for v in vals)
        except ValueError:
            raise _err(f"ambient must list +1/-1 entries, got {av!r}", path, aln.no, acol) from None
        if len(ambient) != n + 1 or any(a not in (1, -1) for a in ambient):
            raise _err(f"dim mismatch: ambient needs {n + 1} entries of +1 or -1", path, aln.no, acol)
    maps: Dict[int, object] = {}
    for ln in sections["embedding"]:
        m = _X_LINE.match(ln.text)
        if not m:
            raise _err("expected 'X mu = <expression>'", path, ln.no, ln.indent + 1)
        mu = int(m.group(1))
        if mu > n:
            raise _err(f"dim mismatch: X index {mu} exceeds ambient dimension {n + 1}", path, ln.no, ln.indent + 1)
        if mu in maps:
            raise _err(f"duplicate entry X {mu}", path, ln.no, ln.indent + 1)
        rest = ln.text[m.end():]
        col = ln.indent + m.end() + 1 + (len(rest) - len(rest.lstrip()))
        expr = _expression(rest.strip(), path, ln, col)
        check_names(expr, ln, col)
        maps[mu] = expr
    missing = [mu for mu in range(n + 1) if mu not in maps]
    if missing:
        raise _err(f"dim mismatch: missing embedding map X {missing[0]}", path, header_line["embedding"], 1)
    return EmbeddingSpec(name, tuple(coords), tuple(maps[mu] for mu in range(n + 1)), ambient,
                         params, ranges)


def load_spec(path) -> Union[MetricSpec, EmbeddingSpec]:
    p = Path(path)
    return loads_spec(p.read_text(encoding="utf-8"), str(path))


def dumps_spec(spec: Union[MetricSpec, EmbeddingSpec]) -> str:
    """Inverse of :func:`loads_spec` up to formatting."""
    out = ["[meta]", f"name = {spec.name}", f"dim = {spec.dim}"]
    if isinstance(spec, MetricSpec) and spec.expected_signature is not None:
        out.append("signature = {}, {}".format(*spec.expected_signature))
    if isinstance(spec, EmbeddingSpec):
        out.append("ambient = " + ", ".join(str(a) for a in spec.ambient_diag))
    out += ["", "[coords]", " ".join(spec.coords)]
    if spec.params:
        out += ["", "[params]"] + [f"{k} = {v!r}" for k, v in spec.params.items()]
    if spec.sample_ranges:
        out += ["", "[ranges]"] + [f"{c} = {lo!r}, {hi!r}" for c, (lo, hi) in spec.sample_ranges.items()]
    if isinstance(spec, MetricSpec):
        out += ["", "[metric]"] + [f"g {i} {j} = {to_string(e)}" for (i, j), e in sorted(spec.components.items())]
    else:
        out += ["", "[embedding]"] + [f"X {mu} = {to_string(m)}" for mu, m in enumerate(spec.maps)]
    return "\n".join(out) + "\n"

"""The script DSL: emission, parsing, canonicalization, comparison.

Frozen grammar (line-oriented, UTF-8, LF):

    # surfaces to reuse: s2, s7        <- optional, first non-blank line only
    s1 = XPlane(x0=0.000000)
    s2 = ZCylinder(x0=0.500000, y0=0.500000, r=0.250000)
    c1 = Cell(region = +s1 & -s2)

Kinds and parameter names are exactly those of the Part JSON schema; floats
are emitted in 6-decimal fixed form; regions are conjunctions only.  A
surface term must be defined earlier in the text or declared in the reuse
header.  Grammar violations raise ScriptSyntaxError; undefined/duplicate
ids, non-positive radii and duplicate same-sign terms raise
ScriptSemanticError.  Both count as failures for the syntax metric.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    InconsistentExampleError,
    ScriptSemanticError,
    ScriptSyntaxError,
    UnknownSurfaceError,
)
from .geometry import (
    ALL_KINDS,
    CYLINDER_KINDS,
    MINUS,
    PARAM_NAMES,
    PLUS,
    Cell,
    Part,
    SignedSurface,
    Surface,
)
from .sequence import SplitExample

_KIND_RANK = {k: i for i, k in enumerate(ALL_KINDS)}
_ID_RE = re.compile(r"[sc]\d+")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_HEADER_PREFIX = "# surfaces to reuse:"


@dataclass(frozen=True)
class CellDef:
    """A cell definition line: region terms are (sign, surface id)."""

    id: str
    region: tuple[tuple[int, str], ...]


@dataclass(frozen=True)
class ScriptAst:
    """Parsed script: reuse header (None = no header line) plus surface and
    cell definitions in their original order.  Keeping one definition stream
    makes re-emission byte-exact even for concatenated input+completion
    scripts, where cell and surface definitions interleave."""

    reuse_header: tuple[str, ...] | None
    defs: tuple

    @property
    def surfaces(self) -> tuple[Surface, ...]:
        return tuple(d for d in self.defs if isinstance(d, Surface))

    @property
    def cells(self) -> tuple[CellDef, ...]:
        return tuple(d for d in self.defs if isinstance(d, CellDef))

    def surface_by_id(self) -> dict[str, Surface]:
        return {s.id: s for s in self.surfaces}


def make_ast(reuse_header, surfaces, cells) -> ScriptAst:
    """Ast with the canonical layout: all surfaces, then all cells."""
    return ScriptAst(reuse_header=reuse_header, defs=tuple(surfaces) + tuple(cells))


@dataclass(frozen=True)
class CompareVerdict:
    exact: bool
    structural: bool
    same_cell_count: bool


# ---------------------------------------------------------------------------
# Emission

def _fmt(v: float) -> str:
    return f"{v + 0.0:.6f}"


def _surface_line(s: Surface) -> str:
    args = ", ".join(f"{n}={_fmt(v)}" for n, v in zip(PARAM_NAMES[s.kind], s.params))
    return f"{s.id} = {s.kind}({args})"


def _cell_line(c: CellDef) -> str:
    terms = " & ".join(("+" if sign > 0 else "-") + sid for sign, sid in c.region)
    return f"{c.id} = Cell(region = {terms})"


def emit_ast(ast: ScriptAst) -> str:
    lines = []
    if ast.reuse_header is not None:
        ids = ", ".join(ast.reuse_header)
        lines.append(_HEADER_PREFIX + (" " + ids if ids else ""))
    for d in ast.defs:
        lines.append(_surface_line(d) if isinstance(d, Surface) else _cell_line(d))
    return "\n".join(lines) + "\n"


def emit(example: SplitExample, part: Part) -> tuple[str, str]:
    """Input/output script pair for a split example.

    Surfaces are renumbered s1.. in order of first reference (input cells
    first, then output), cells c1.. in sequence order; the input's header
    lists the renumbered ids of the surfaces the output must reuse.
    """
    cells = part.cell_by_id()
    unknown = [cid for cid in example.order if cid not in cells]
    if unknown:
        raise InconsistentExampleError(f"example references unknown cells {unknown}")

    new_id: dict[str, str] = {}
    new_surface: dict[str, Surface] = {}

    def renumber(cell_ids, first_index: int) -> tuple[list[Surface], list[CellDef]]:
        fresh: list[Surface] = []
        defs: list[CellDef] = []
        for k, cid in enumerate(cell_ids):
            region = []
            for term in cells[cid].region:
                sid = term.surface.id
                if sid not in new_id:
                    nid = f"s{len(new_id) + 1}"
                    new_id[sid] = nid
                    new_surface[sid] = Surface(nid, term.surface.kind, term.surface.params)
                    fresh.append(new_surface[sid])
                region.append((term.sign, new_id[sid]))
            defs.append(CellDef(f"c{first_index + k}", tuple(region)))
        return fresh, defs

    in_surfaces, in_defs = renumber(example.input_cells, 1)
    out_surfaces, out_defs = renumber(example.output_cells, len(in_defs) + 1)

    missing = [sid for sid in example.reused_surfaces if sid not in new_id]
    if missing:
        raise InconsistentExampleError(f"example references unknown surfaces {missing}")
    reused = tuple(sorted((new_id[sid] for sid in example.reused_surfaces),
                          key=lambda nid: int(nid[1:])))

    input_ast = make_ast(reused, in_surfaces, in_defs)
    output_ast = make_ast(None, out_surfaces, out_defs)
    return emit_ast(input_ast), emit_ast(output_ast)


# ---------------------------------------------------------------------------
# Parsing

class _Scanner:
    def __init__(self, line: str, lineno: int):
        self.line = line
        self.lineno = lineno
        self.pos = 0

    def fail(self, msg: str):
        raise ScriptSyntaxError(msg, self.lineno, self.pos + 1)

    def skip_ws(self):
        while self.pos < len(self.line) and self.line[self.pos] in " \t":
            self.pos += 1

    def done(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.line)

    def expect(self, lit: str):
        self.skip_ws()
        if not self.line.startswith(lit, self.pos):
            self.fail(f"expected {lit!r}")
        self.pos += len(lit)

    def match(self, lit: str) -> bool:
        self.skip_ws()
        if self.line.startswith(lit, self.pos):
            self.pos += len(lit)
            return True
        return False

    def take(self, pattern: re.Pattern, what: str) -> str:
        self.skip_ws()
        m = pattern.match(self.line, self.pos)
        if not m:
            self.fail(f"expected {what}")
        self.pos = m.end()
        return m.group()


def _parse_header(sc: _Scanner) -> tuple[str, ...]:
    ids = []
    if sc.done():
        return ()
    while True:
        tok = sc.take(_ID_RE, "surface id")
        if not tok.startswith("s"):
            sc.fail("reuse header may only list surface ids")
        ids.append(tok)
        if sc.done():
            return tuple(ids)
        sc.expect(",")


def _parse_surface(sc: _Scanner, sid: str, lineno: int) -> Surface:
    kind = sc.take(_NAME_RE, "surface kind")
    if kind not in ALL_KINDS:
        sc.fail(f"unknown surface kind {kind!r}")
    sc.expect("(")
    params = []
    for i, name in enumerate(PARAM_NAMES[kind]):
        if i:
            sc.expect(",")
        got = sc.take(_NAME_RE, f"parameter {name!r}")
        if got != name:
            sc.fail(f"expected parameter {name!r}, got {got!r}")
        sc.expect("=")
        params.append(float(sc.take(_FLOAT_RE, "number")))
    sc.expect(")")
    if not sc.done():
        sc.fail("trailing input after surface definition")
    if kind in CYLINDER_KINDS and params[2] <= 0:
        raise ScriptSemanticError(f"surface {sid}: radius must be positive", lineno)
    return Surface(sid, kind, tuple(params))


def _parse_cell(sc: _Scanner, cid: str, lineno: int, known: set[str]) -> CellDef:
    sc.expect("Cell")
    sc.expect("(")
    sc.expect("region")
    sc.expect("=")
    region: list[tuple[int, str]] = []
    seen: set[tuple[int, str]] = set()
    while True:
        sc.skip_ws()
        if sc.match("+"):
            sign = PLUS
        elif sc.match("-"):
            sign = MINUS
        else:
            sc.fail("expected signed surface term")
        sid = sc.take(_ID_RE, "surface id")
        if not sid.startswith("s"):
            sc.fail("region terms must reference surfaces")
        if sid not in known:
            raise ScriptSemanticError(
                f"cell {cid}: surface {sid} is not defined and not declared reused", lineno)
        if (sign, sid) in seen:
            raise ScriptSemanticError(f"cell {cid}: duplicate term for {sid}", lineno)
        seen.add((sign, sid))
        region.append((sign, sid))
        if not sc.match("&"):
            break
    sc.expect(")")
    if not sc.done():
        sc.fail("trailing input after cell definition")
    return CellDef(cid, tuple(region))


def parse(text: str) -> ScriptAst:
    """Parse a script (or a concatenated input+completion pair)."""
    header: tuple[str, ...] | None = None
    defs: list = []
    surface_ids: set[str] = set()
    cell_ids: set[str] = set()
    defined: set[str] = set()
    for lineno, raw_line in enumerate(text.split("\n"), start=1):
        line = raw_line.rstrip("\r")
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            stripped = line.lstrip()
            if not stripped.startswith(_HEADER_PREFIX):
                raise ScriptSyntaxError("unexpected comment line", lineno, 1)
            if header is not None or defs:
                raise ScriptSyntaxError(
                    "reuse header must be the first non-blank line", lineno, 1)
            sc = _Scanner(stripped[len(_HEADER_PREFIX):], lineno)
            header = _parse_header(sc)
            defined.update(header)
            continue
        sc = _Scanner(line, lineno)
        ident = sc.take(_ID_RE, "definition id (s<k> or c<k>)")
        sc.expect("=")
        if ident.startswith("s"):
            if ident in surface_ids:
                raise ScriptSemanticError(f"surface {ident} defined twice", lineno)
            defs.append(_parse_surface(sc, ident, lineno))
            surface_ids.add(ident)
            defined.add(ident)
        else:
            if ident in cell_ids:
                raise ScriptSemanticError(f"cell {ident} defined twice", lineno)
            defs.append(_parse_cell(sc, ident, lineno, defined))
            cell_ids.add(ident)
    return ScriptAst(reuse_header=header, defs=tuple(defs))


# ---------------------------------------------------------------------------
# Views and geometry resolution

def resolve_cells(ast: ScriptAst, extra: Sequence[Surface] = ()) -> list[Cell]:
    """Geometry cells for an ast, resolving ids against its own definitions
    plus any extra surfaces (e.g. the input side of a completion)."""
    table = {s.id: s for s in extra}
    table.update(ast.surface_by_id())
    out = []
    for c in ast.cells:
        region = []
        for sign, sid in c.region:
            if sid not in table:
                raise UnknownSurfaceError(f"cell {c.id} references undefined {sid}")
            region.append(SignedSurface(sign, table[sid]))
        out.append(Cell(c.id, tuple(region)))
    return out


def completion_view(full: ScriptAst, n_input_cells: int) -> ScriptAst:
    """Self-contained ast of the completion: the cells past the input prefix
    plus definitions of every surface they reference."""
    gen_cells = full.cells[n_input_cells:]
    table = full.surface_by_id()
    referenced: list[str] = []
    for c in gen_cells:
        for _, sid in c.region:
            if sid not in referenced:
                referenced.append(sid)
    missing = [sid for sid in referenced if sid not in table]
    if missing:
        raise UnknownSurfaceError(f"completion references undefined surfaces {missing}")
    return make_ast(None, (table[sid] for sid in referenced), gen_cells)


# ---------------------------------------------------------------------------
# Canonical form and comparison

def _quant(v: float, decimals: int) -> float:
    return round(v, decimals) + 0.0


def canonicalize(ast: ScriptAst, quantize_decimals: int = 6) -> ScriptAst:
    """Order- and numbering-independent form: surfaces merged and renumbered
    by (kind, quantized params), region terms sorted, cells sorted by
    structural signature then params, ids rewritten densely."""
    table = ast.surface_by_id()
    for c in ast.cells:
        for _, sid in c.region:
            if sid not in table:
                raise UnknownSurfaceError(f"canonicalize: {sid} is not defined")

    merged: dict[tuple, str] = {}
    keys: list[tuple] = []
    old_to_key: dict[str, tuple] = {}
    for s in ast.surfaces:
        key = (_KIND_RANK[s.kind], tuple(_quant(p, quantize_decimals) for p in s.params))
        old_to_key[s.id] = key
        if key not in merged:
            merged[key] = s.kind
            keys.append(key)
    keys.sort()
    key_to_id = {key: f"s{i + 1}" for i, key in enumerate(keys)}

    cell_entries = []
    for c in ast.cells:
        terms = set()
        for sign, sid in c.region:
            key = old_to_key[sid]
            terms.add((key[0], sign, key[1]))
        term_list = sorted(terms)
        signature = tuple((k, sg) for k, sg, _ in term_list)
        params = tuple(p for _, _, ps in term_list for p in ps)
        cell_entries.append((signature, params, term_list))
    cell_entries.sort(key=lambda e: (e[0], e[1]))

    surfaces = tuple(
        Surface(key_to_id[key], merged[key], key[1]) for key in keys
    )
    cells = tuple(
        CellDef(f"c{i + 1}", tuple((sg, key_to_id[(k, ps)]) for k, sg, ps in terms))
        for i, (_, _, terms) in enumerate(cell_entries)
    )
    header = ast.reuse_header
    if header is not None:
        hdr_ids = sorted(
            {key_to_id[old_to_key[sid]] for sid in header if sid in old_to_key},
            key=lambda nid: int(nid[1:]),
        )
        header = tuple(hdr_ids)
    return make_ast(header, surfaces, cells)


def _signature_multiset(ast: ScriptAst):
    table = ast.surface_by_id()
    sigs = []
    for c in ast.cells:
        sigs.append(tuple(sorted((_KIND_RANK[table[sid].kind], sign) for sign, sid in c.region)))
    return sorted(sigs)


def _distinct_surface_count(ast: ScriptAst) -> int:
    return len({sid for c in ast.cells for _, sid in c.region})


def compare(generated: ScriptAst, truth: ScriptAst,
            quantize_decimals: int = 6) -> CompareVerdict:
    """Verdict chain: exact implies structural implies same cell count.

    Structural equality is the cheap approximation: equal multisets of cell
    signatures (kind/sign pairs, params masked) plus equal distinct-surface
    counts.  Exact equality is byte equality of the canonical serializations.
    """
    same_count = len(generated.cells) == len(truth.cells)
    structural = (
        same_count
        and _signature_multiset(generated) == _signature_multiset(truth)
        and _distinct_surface_count(generated) == _distinct_surface_count(truth)
    )
    exact = False
    if structural:
        g = emit_ast(canonicalize(generated, quantize_decimals))
        t = emit_ast(canonicalize(truth, quantize_decimals))
        exact = g == t
    return CompareVerdict(exact=exact, structural=structural, same_cell_count=same_count)


def part_to_ast(part: Part) -> ScriptAst:
    """Whole-part script (no reuse header), used for canonical hashing."""
    return make_ast(
        None,
        part.surfaces,
        (CellDef(c.id, tuple((t.sign, t.surface.id) for t in c.region))
         for c in part.cells),
    )

import pytest

from cellforge.errors import ScriptSemanticError, ScriptSyntaxError
from cellforge.kernel import DEFAULT_KERNEL_CONFIG
from cellforge.rng import Stream
from cellforge.script import (
    CellDef,
    canonicalize,
    compare,
    completion_view,
    emit,
    emit_ast,
    make_ast,
    parse,
    part_to_ast,
)
from cellforge.sequence import build_graph, canonical_order, split_all
from cellforge.geometry import Surface

from geomfix import three_box_row, two_box_part


class TestEmit:
    def test_two_box_example(self):
        part = two_box_part()
        seq = canonical_order(build_graph(part, DEFAULT_KERNEL_CONFIG))
        ex = split_all(seq, part)[0]
        input_text, output_text = emit(ex, part)
        lines = input_text.splitlines()
        assert lines[0] == "# surfaces to reuse: s2"
        assert len([l for l in lines if l.startswith("s")]) == 6
        assert len([l for l in lines if l.startswith("c")]) == 1
        out_lines = output_text.splitlines()
        assert len([l for l in out_lines if l.startswith("s")]) == 5
        assert "+s2" in output_text and "s2 =" not in output_text

    def test_empty_reuse_header(self):
        # an input script whose surfaces are all private to the input
        part = two_box_part()
        ast = parse("# surfaces to reuse:\ns1 = XPlane(x0=0.000000)\n"
                    "s2 = XPlane(x0=1.000000)\ns3 = YPlane(y0=0.000000)\n"
                    "s4 = YPlane(y0=1.000000)\ns5 = ZPlane(z0=0.000000)\n"
                    "s6 = ZPlane(z0=1.000000)\n"
                    "c1 = Cell(region = +s1 & -s2 & +s3 & -s4 & +s5 & -s6)\n")
        assert ast.reuse_header == ()
        assert emit_ast(ast).splitlines()[0] == "# surfaces to reuse:"
        del part

    def test_round_trip_bytes(self):
        # the input script and the concatenated pair are the parse units
        part = three_box_row()
        seq = canonical_order(build_graph(part, DEFAULT_KERNEL_CONFIG))
        for ex in split_all(seq, part):
            input_text, output_text = emit(ex, part)
            assert emit_ast(parse(input_text)) == input_text
            combined = input_text + output_text
            assert emit_ast(parse(combined)) == combined


class TestParse:
    def test_minimal_script(self):
        ast = parse("s1 = XPlane(x0=0.0)\nc1 = Cell(region = +s1)\n")
        assert ast.reuse_header is None
        assert ast.surfaces[0].kind == "XPlane"
        assert ast.cells[0].region == ((1, "s1"),)

    def test_undefined_reference(self):
        with pytest.raises(ScriptSemanticError):
            parse("c1 = Cell(region = +s9)\n")

    def test_reuse_header_defines_names(self):
        ast = parse("# surfaces to reuse: s9\nc1 = Cell(region = +s9)\n")
        assert ast.cells[0].region == ((1, "s9"),)

    def test_missing_number(self):
        with pytest.raises(ScriptSyntaxError) as err:
            parse("s1 = XPlane(x0=)\n")
        assert err.value.line == 1
        assert err.value.col is not None

    def test_duplicate_definition(self):
        with pytest.raises(ScriptSemanticError):
            parse("s1 = XPlane(x0=0.0)\ns1 = XPlane(x0=1.0)\n")

    def test_duplicate_same_sign_term(self):
        with pytest.raises(ScriptSemanticError):
            parse("s1 = XPlane(x0=0.0)\nc1 = Cell(region = +s1 & +s1)\n")

    def test_opposite_sign_twice_is_legal(self):
        ast = parse("s1 = XPlane(x0=0.0)\nc1 = Cell(region = +s1 & -s1)\n")
        assert len(ast.cells[0].region) == 2

    def test_non_positive_radius(self):
        with pytest.raises(ScriptSemanticError):
            parse("s1 = ZCylinder(x0=0.0, y0=0.0, r=0.0)\n")

    def test_wrong_param_name(self):
        with pytest.raises(ScriptSyntaxError):
            parse("s1 = XPlane(y0=0.0)\n")

    def test_unknown_kind(self):
        with pytest.raises(ScriptSyntaxError):
            parse("s1 = Sphere(x0=0.0)\n")

    def test_stray_comment(self):
        with pytest.raises(ScriptSyntaxError):
            parse("# hello\ns1 = XPlane(x0=0.0)\n")

    def test_header_must_be_first(self):
        with pytest.raises(ScriptSyntaxError):
            parse("s1 = XPlane(x0=0.0)\n# surfaces to reuse: s1\n")

    def test_whitespace_tolerance(self):
        ast = parse("s1   =  XPlane( x0 = 0.5 )\nc1=Cell(region=+s1)\n")
        assert ast.surfaces[0].params == (0.5,)


class TestCanonicalize:
    def test_region_order_invariance(self):
        a = parse("s1 = XPlane(x0=0.0)\ns2 = XPlane(x0=1.0)\n"
                  "c1 = Cell(region = +s1 & -s2)\n")
        b = parse("s1 = XPlane(x0=0.0)\ns2 = XPlane(x0=1.0)\n"
                  "c1 = Cell(region = -s2 & +s1)\n")
        assert emit_ast(canonicalize(a)) == emit_ast(canonicalize(b))

    def test_quantization_merges_near_params(self):
        a = parse("s1 = XPlane(x0=0.1000000001)\nc1 = Cell(region = +s1)\n")
        b = parse("s1 = XPlane(x0=0.1)\nc1 = Cell(region = +s1)\n")
        assert emit_ast(canonicalize(a)) == emit_ast(canonicalize(b))

    def test_renumbering_invariance(self):
        a = parse("s1 = XPlane(x0=0.0)\ns2 = XPlane(x0=1.0)\ns3 = YPlane(y0=0.0)\n"
                  "s4 = YPlane(y0=1.0)\ns5 = ZPlane(z0=0.0)\ns6 = ZPlane(z0=1.0)\n"
                  "c1 = Cell(region = +s1 & -s2 & +s3 & -s4 & +s5 & -s6)\n")
        b = parse("s9 = ZPlane(z0=1.0)\ns8 = ZPlane(z0=0.0)\ns7 = YPlane(y0=1.0)\n"
                  "s2 = YPlane(y0=0.0)\ns3 = XPlane(x0=1.0)\ns4 = XPlane(x0=0.0)\n"
                  "c5 = Cell(region = -s9 & +s8 & -s7 & +s2 & -s3 & +s4)\n")
        assert emit_ast(canonicalize(a)) == emit_ast(canonicalize(b))

    def test_idempotent(self):
        ast = part_to_ast(three_box_row())
        once = canonicalize(ast)
        twice = canonicalize(once)
        assert emit_ast(once) == emit_ast(twice)


class TestCompare:
    def _box_script(self, x1=1.0):
        return parse(f"s1 = XPlane(x0=0.0)\ns2 = XPlane(x0={x1})\ns3 = YPlane(y0=0.0)\n"
                     "s4 = YPlane(y0=1.0)\ns5 = ZPlane(z0=0.0)\ns6 = ZPlane(z0=1.0)\n"
                     "c1 = Cell(region = +s1 & -s2 & +s3 & -s4 & +s5 & -s6)\n")

    def test_identity(self):
        t = self._box_script()
        v = compare(t, t)
        assert (v.exact, v.structural, v.same_cell_count) == (True, True, True)

    def test_param_only_difference(self):
        v = compare(self._box_script(2.0), self._box_script(1.0))
        assert (v.exact, v.structural, v.same_cell_count) == (False, True, True)

    def test_signature_difference(self):
        cyl = parse("s1 = ZCylinder(x0=0.5, y0=0.5, r=0.4)\ns2 = ZPlane(z0=0.0)\n"
                    "s3 = ZPlane(z0=1.0)\nc1 = Cell(region = -s1 & +s2 & -s3)\n")
        v = compare(cyl, self._box_script())
        assert (v.exact, v.structural, v.same_cell_count) == (False, False, True)

    def test_implication_chain_random(self):
        # randomized pairs: exact => structural => same count, always
        stream = Stream(2024)
        kinds = ["XPlane", "YPlane", "ZPlane"]

        def random_ast():
            n_surf = 2 + stream.randint(4)
            surfaces = tuple(
                Surface(f"s{i + 1}", kinds[stream.randint(3)],
                        (float(stream.randint(4)),))
                for i in range(n_surf)
            )
            n_cells = 1 + stream.randint(3)
            cells = []
            for c in range(n_cells):
                n_terms = 1 + stream.randint(n_surf)
                picked = set()
                terms = []
                for _ in range(n_terms):
                    sid = f"s{stream.randint(n_surf) + 1}"
                    sign = 1 if stream.randint(2) else -1
                    if (sign, sid) not in picked:
                        picked.add((sign, sid))
                        terms.append((sign, sid))
                cells.append(CellDef(f"c{c + 1}", tuple(terms)))
            return make_ast(None, surfaces, cells)

        for _ in range(300):
            v = compare(random_ast(), random_ast())
            assert not (v.exact and not v.structural)
            assert not (v.structural and not v.same_cell_count)

    def test_structural_invariant_under_renumbering(self):
        part = three_box_row()
        seq = canonical_order(build_graph(part, DEFAULT_KERNEL_CONFIG))
        ex = split_all(seq, part)[1]
        input_text, output_text = emit(ex, part)
        full = parse(input_text + output_text)
        view = completion_view(full, len(ex.input_cells))
        # rename surfaces and shuffle region order by hand
        renamed = output_text.replace("s8", "s77")
        lines = renamed.splitlines()
        full2 = parse(input_text + "\n".join(lines) + "\n")
        view2 = completion_view(full2, len(ex.input_cells))
        v = compare(view, view2)
        assert v.exact and v.structural and v.same_cell_count

"""
Tests for the case reader/writer and structural validation.

Counts for the bundled fixtures are read off their text by an independent line scan, not through
the parser, so a reader that silently drops rows fails here.
"""

import math
import os
import re
import sys
from dataclasses import replace

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from jcc.cases import bundled_cases, case_path, load_case
from jcc.netcase import (Branch, Bus, BusKind, CaseFormatError, CostCurve, Generator, Network,
                         parse_case, read_case, render, to_json, validate, with_ref)


def _block_rows(path, block):
    # Independent oracle: count the non-empty data rows between 'mpc.<block> = [' and '];'.
    rows, inside = 0, False
    with open(path) as f:
        for line in f:
            line = line.split("%", 1)[0].strip()
            if not inside:
                inside = re.match(rf"mpc\.{block}\s*=\s*\[", line) is not None
                continue
            if line.startswith("]"):
                return rows
            if line:
                rows += 1
    return rows


def _tiny(**kw):
    # Two buses, one line; the gen row and cost row are the only things the tests vary.
    gen = kw.get("gen", "2\t0\t0\t0\t0\t1\t100\t1\t100\t0;")
    cost = kw.get("cost", "2\t0\t0\t3\t0.01\t10\t0;")
    bus2 = kw.get("bus2", "2\t1\t50\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;")
    branch = kw.get("branch", "1\t2\t0\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;")
    return "\n".join([
        "function mpc = tiny", "mpc.baseMVA = 100;",
        "mpc.bus = [", "1\t3\t0\t0\t0\t0\t1\t1\t0\t0\t1\t1.1\t0.9;", bus2, "];",
        "mpc.gen = [", gen, "];",
        "mpc.branch = [", branch, "];",
        "mpc.gencost = [", cost, "];", ""])


def test_three_bus_fixture_counts():
    net = load_case("case3")
    assert net.n_bus == 3 and len(net.branches) == 3 and len(net.generators) == 2
    assert net.ref_bus == 1
    assert net.demand.tolist() == [0.0, 0.0, 150.0]
    assert net.generators[1].cost == CostCurve(0.02, 25.0, 0.0)
    assert net.branches[2].flow_limit == 90.0
    assert net.generator_labels() == ("g1@1", "g2@2")


def test_bundled_fixtures_match_line_counts_and_validate_clean():
    for name in bundled_cases():
        path = case_path(name)
        net = read_case(path)
        assert net.name == name
        assert net.n_bus == _block_rows(path, "bus"), name
        assert len(net.branches) == _block_rows(path, "branch"), name
        assert len(net.generators) == _block_rows(path, "gen"), name
        assert validate(net) == [], (name, validate(net))


def test_large_case_counts_when_bundled():
    # The 118-bus system is optional; when a copy is dropped into data/cases it must parse cleanly.
    try:
        path = case_path("case118")
    except FileNotFoundError:
        return
    net = read_case(path)
    assert net.n_bus == _block_rows(path, "bus") == 118
    assert len(net.branches) == _block_rows(path, "branch")
    assert validate(net) == []


def test_zero_branches_is_disconnected():
    text = _tiny(branch="")
    try:
        parse_case(text)
        assert False, "expected CaseFormatError"
    except CaseFormatError as e:
        assert e.code == "Disconnected"
        assert "disconnected graph" in str(e)


def test_two_ref_buses_reported():
    net = load_case("case3")
    buses = (net.buses[0], Bus(2, BusKind.REF, 0.0), net.buses[2])
    bad = replace(net, buses=buses)
    assert [v.code for v in validate(bad)] == ["DuplicateRef"]


def test_gen_bounds_reported_with_index():
    net = load_case("case3")
    gens = (net.generators[0], Generator(2, p_min=80.0, p_max=50.0, cost=CostCurve(0, 1, 0)))
    out = validate(replace(net, generators=gens))
    assert len(out) == 1
    assert out[0].code == "GenBounds" and out[0].subject == 1


def test_validate_reports_every_breach_without_raising():
    net = load_case("case3")
    branches = net.branches + (Branch(3, 9, 0.1, 50.0), Branch(2, 2, 0.0, 10.0))
    codes = [v.code for v in validate(replace(net, branches=branches))]
    # The dangling endpoint suppresses the connectivity check.
    assert codes == ["DanglingBranch", "SelfLoop", "BadReactance"], codes


def test_missing_ref_bus():
    text = _tiny().replace("1\t3\t0\t0", "1\t2\t0\t0", 1)
    try:
        parse_case(text)
        assert False, "expected CaseFormatError"
    except CaseFormatError as e:
        assert e.code == "MissingRef"


def test_dangling_branch_endpoint():
    text = _tiny(branch="1\t7\t0\t0.1\t0\t100\t0\t0\t0\t0\t1\t-360\t360;")
    try:
        parse_case(text)
        assert False, "expected CaseFormatError"
    except CaseFormatError as e:
        assert e.code == "DanglingBranch"


def test_syntax_error_carries_line_number():
    text = _tiny(gen="2\t0\t0\tabc\t0\t1\t100\t1\t100\t0;")
    try:
        parse_case(text)
        assert False, "expected CaseFormatError"
    except CaseFormatError as e:
        # header(1) baseMVA(2) bus(3..6) gen open(7) -> the gen row is line 8
        assert e.line == 8, e.line
        assert e.code == "Syntax"
        assert str(e).startswith("line 8:")


def test_unclosed_block_and_short_rows():
    text = "mpc.baseMVA = 100;\nmpc.bus = [\n1\t3\t0;\n"
    try:
        parse_case(text)
        assert False
    except CaseFormatError as e:
        assert "never closed" in str(e)
    try:
        parse_case(_tiny(gen="2\t0\t0;"))
        assert False
    except CaseFormatError as e:
        assert "at least 10" in str(e)


def test_cost_degrees():
    linear = parse_case(_tiny(cost="2\t0\t0\t2\t12\t3;"))
    assert linear.generators[0].cost == CostCurve(c2=0.0, c1=12.0, c0=3.0)
    for bad in ("2\t0\t0\t4\t1\t1\t1\t1;", "1\t0\t0\t2\t0\t0\t10\t100;"):
        try:
            parse_case(_tiny(cost=bad))
            assert False, bad
        except CaseFormatError:
            pass


def test_out_of_service_generator_and_unrated_branch():
    text = _tiny(gen="2\t0\t0\t0\t0\t1\t100\t1\t100\t0;\n2\t0\t0\t0\t0\t1\t100\t0\t60\t0;",
                 cost="2\t0\t0\t3\t0.01\t10\t0;\n2\t0\t0\t3\t0.05\t20\t0;",
                 branch="1\t2\t0\t0.1\t0\t0\t0\t0\t0\t0\t1\t-360\t360;")
    net = parse_case(text)
    assert len(net.generators) == 1
    assert net.generators[0].cost.c1 == 10.0
    assert math.isinf(net.branches[0].flow_limit)
    assert to_json(net)["branches"][0]["flow_limit"] is None


def test_render_round_trip():
    for name in bundled_cases():
        net = load_case(name)
        again = parse_case(render(net), name=net.name)
        assert again == net, name
    # A branch switched off and an unrated line survive the trip as well.
    net = load_case("case3")
    branches = (replace(net.branches[0], status=False), net.branches[1],
                replace(net.branches[2], flow_limit=math.inf))
    odd = replace(net, branches=branches)
    assert parse_case(render(odd), name=odd.name) == odd


def test_to_json_schema():
    obj = to_json(load_case("case2"))
    assert set(obj) == {"name", "base_mva", "ref_bus", "buses", "branches", "generators"}
    assert obj["buses"][0] == {"id": 1, "kind": "REF", "pd_mean": 0.0}
    assert obj["generators"][0]["cost"] == {"c2": 0.01, "c1": 10.0, "c0": 0.0}


def test_with_ref_moves_reference():
    net = with_ref(load_case("case3"), 2)
    assert net.ref_bus == 2
    assert [b.kind for b in net.buses] == [BusKind.PV, BusKind.REF, BusKind.PQ]
    assert validate(net) == []
    try:
        with_ref(net, 99)
        assert False
    except ValueError:
        pass


def test_network_vectors():
    net = load_case("case14")
    cg = net.generator_incidence()
    assert cg.shape == (len(net.generators), 14)
    assert (cg.sum(axis=1) == 1).all()
    assert net.bus_position[net.generators[1].bus] == int(cg[1].argmax())
    assert isinstance(net, Network)


if __name__ == "__main__":
    fns = [v for k, v in sorted(globals().items()) if k.startswith("test_") and callable(v)]
    passed = 0
    for fn in fns:
        try:
            fn()
            print(f"PASS  {fn.__name__}")
            passed += 1
        except AssertionError as e:
            print(f"FAIL  {fn.__name__}: {e}")
        except Exception as e:  # noqa
            print(f"ERROR {fn.__name__}: {type(e).__name__}: {e}")
    print(f"\n{passed}/{len(fns)} netcase tests passed")
    sys.exit(0 if passed == len(fns) else 1)

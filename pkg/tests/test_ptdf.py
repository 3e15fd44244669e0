"""
Tests for the PTDF matrix and DC flows.

The hand-worked triangle and two-bus cases pin the sign convention; the 14-bus comparison pins the
whole matrix against an independent angle-formulation solve (B * theta = P, theta_ref = 0).
"""

import os
import sys
from dataclasses import replace

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from jcc.cases import load_case
from jcc.netcase import with_ref
from jcc.ptdf import PtdfError, build_ptdf, flows, to_frame


def _angle_flows(net, inj):
    # Oracle: build B from scratch, pin the reference angle, solve, read flows off angle differences.
    pos = net.bus_position
    n = net.n_bus
    bbus = np.zeros((n, n))
    live = [net.branches[i] for i in net.live_branches]
    for br in live:
        i, j, b = pos[br.from_bus], pos[br.to_bus], 1.0 / br.reactance_pu
        bbus[i, i] += b
        bbus[j, j] += b
        bbus[i, j] -= b
        bbus[j, i] -= b
    keep = [k for k in range(n) if k != pos[net.ref_bus]]
    theta = np.zeros(n)
    theta[keep] = np.linalg.solve(bbus[np.ix_(keep, keep)], np.asarray(inj)[keep])
    return np.array([(theta[pos[br.from_bus]] - theta[pos[br.to_bus]]) / br.reactance_pu
                     for br in live])


def test_two_bus_signs():
    # All of the 1 MW injected at bus 2 returns to the slack against the 1->2 orientation.
    p = build_ptdf(load_case("case2"))
    assert p.slack == 1
    assert abs(p.entries[0, 1] - (-1.0)) < 1e-12
    assert p.entries[0, 0] == 0.0


def test_triangle_hand_values():
    # Equal reactances: the direct path 2->1 carries 2/3, the detour 2->3->1 carries 1/3.
    p = build_ptdf(load_case("case3"))
    col = p.entries[:, 1]                 # 1 MW at bus 2
    for got, want in zip(col, (-2 / 3, 1 / 3, -1 / 3)):
        assert abs(got - want) < 1e-12, col
    col = p.entries[:, 2]                 # 1 MW at bus 3
    for got, want in zip(col, (-1 / 3, 1 / 3, -2 / 3)):
        assert abs(got - want) < 1e-12, col


def test_slack_column_is_zero():
    for name in ("case2", "case3", "case14"):
        net = load_case(name)
        p = build_ptdf(net)
        assert (p.entries[:, net.bus_position[net.ref_bus]] == 0.0).all(), name
    moved = with_ref(load_case("case14"), 5)
    p = build_ptdf(moved)
    assert p.slack == 5
    assert (p.entries[:, moved.bus_position[5]] == 0.0).all()


def test_fourteen_bus_matches_angle_formulation():
    net = load_case("case14")
    p = build_ptdf(net)
    rng = np.random.default_rng(11)
    for _ in range(5):
        inj = rng.normal(0, 40, size=net.n_bus)
        inj -= inj.mean()                 # balanced
        diff = np.max(np.abs(flows(p, inj) - _angle_flows(net, inj)))
        assert diff <= 1e-8, diff


def test_flows_linear_and_columns():
    net = load_case("case14")
    p = build_ptdf(net)
    assert np.all(flows(p, np.zeros(net.n_bus)) == 0.0)
    for n in range(net.n_bus):
        e = np.zeros(net.n_bus)
        e[n] = 1.0
        assert np.allclose(flows(p, e), p.entries[:, n], atol=1e-15)
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=(2, net.n_bus))
    lhs = flows(p, 2.5 * x - 0.7 * y)
    rhs = 2.5 * flows(p, x) - 0.7 * flows(p, y)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, np.max(np.abs(lhs)))
    batch = flows(p, np.vstack([x, y]))
    assert batch.shape == (2, len(p.branches))
    assert np.allclose(batch[1], flows(p, y))


def test_flow_antisymmetry():
    p = build_ptdf(load_case("case14"))
    inj = np.linspace(-20, 20, 14)
    assert np.allclose(flows(p, -inj), -flows(p, inj))


def test_dimension_mismatch():
    p = build_ptdf(load_case("case3"))
    try:
        flows(p, [1.0, 2.0])
        assert False, "expected ValueError"
    except ValueError:
        pass


def test_out_of_service_branches_dropped_and_islanding_detected():
    net = load_case("case3")
    off = replace(net, branches=(replace(net.branches[0], status=False),) + net.branches[1:])
    p = build_ptdf(off)
    assert p.branches == (1, 2) and p.entries.shape == (2, 3)
    # Radial 1-3-2: all of bus 2's injection crosses 2->3 then 3->1.
    assert np.allclose(p.entries[:, 1], [1.0, -1.0])
    assert p.row_of(2) == 1
    island = replace(net, branches=(net.branches[0], replace(net.branches[1], status=False),
                                    replace(net.branches[2], status=False)))
    try:
        build_ptdf(island)
        assert False, "expected PtdfError"
    except PtdfError:
        pass


def test_frame_labels():
    net = load_case("case3")
    frame = to_frame(build_ptdf(net), net)
    assert list(frame.index) == ["1-2", "2-3", "1-3"]
    assert list(frame.columns) == ["1", "2", "3"]
    assert abs(frame.loc["1-3", "3"] + 2 / 3) < 1e-12


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
    print(f"\n{passed}/{len(fns)} ptdf tests passed")
    sys.exit(0 if passed == len(fns) else 1)

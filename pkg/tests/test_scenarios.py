"""
Tests for the uncertainty model and scenario sampling.

Monte Carlo bands below are several standard errors wide for the sample sizes used; the seeds are
fixed, so a pass is deterministic.
"""

import os
import sys

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from jcc.cases import load_case
from jcc.scenarios import (Stream, UncertaintySpec, default_spec, perturb_wind_stats, sample,
                           spec_from_json, spec_to_json, substream, to_frame, to_json, var_omega)


def _spec(**kw):
    base = dict(sigma_d=(0.0, 0.0, 4.5), wind_buses=(3,), mu_w=(20.0,), sigma_w=(8.0,), seed=7)
    base.update(kw)
    return UncertaintySpec(**base)


def test_degenerate_distribution_returns_means():
    net = load_case("case3")
    spec = _spec(sigma_d=(0.0, 0.0, 0.0), sigma_w=(0.0,))
    scen = sample(spec, net, 10, stream=(Stream.SAA, 0))
    assert np.all(scen.d == net.demand)
    assert np.all(scen.w[:, 2] == 20.0) and np.all(scen.w[:, :2] == 0.0)
    assert np.all(scen.omega == 0.0)
    assert scen.var_omega == 0.0


def test_same_stream_is_bitwise_identical():
    net = load_case("case14")
    spec = default_spec(net, wind_buses=(4, 9), mu_w=(15, 15), sigma_w=(6, 6), seed=2024)
    a = sample(spec, net, 50, stream=(Stream.SAA, 3))
    b = sample(spec, net, 50, stream=(Stream.SAA, 3))
    assert a.d.tobytes() == b.d.tobytes()
    assert a.w.tobytes() == b.w.tobytes()
    assert a.omega.tobytes() == b.omega.tobytes()
    c = sample(spec, net, 50, stream=(Stream.VALIDATION, 3))
    assert not np.array_equal(a.d, c.d)


def test_streams_are_independent_of_other_draws():
    # Drawing from one substream never moves another.
    first = substream(5, Stream.BAGGING, 2).standard_normal(4)
    substream(5, Stream.BAGGING, 1).standard_normal(1000)
    again = substream(5, Stream.BAGGING, 2).standard_normal(4)
    assert np.array_equal(first, again)
    assert not np.array_equal(first, substream(5, Stream.SAA, 2).standard_normal(4))


def test_demand_std_converges():
    net = load_case("case3")
    spec = _spec(sigma_d=(0.0, 0.0, 3.0), wind_buses=(), mu_w=(), sigma_w=())
    scen = sample(spec, net, 50_000, stream=(Stream.SAA, 1))
    std = scen.d[:, 2].std(ddof=1)
    assert 2.94 <= std <= 3.06, std
    assert np.all(scen.d[:, 0] == 0.0)


def test_wind_truncated_at_zero():
    net = load_case("case3")
    spec = _spec(mu_w=(2.0,), sigma_w=(10.0,))
    scen = sample(spec, net, 2000, stream=(Stream.SAA, 0))
    assert scen.w.min() == 0.0
    assert (scen.w[:, 2] == 0.0).any()


def test_stored_omega_matches_composition():
    net = load_case("case14")
    for mode in ("net", "load_only"):
        spec = default_spec(net, wind_buses=(4, 9, 13), mu_w=(15, 15, 15), sigma_w=(6, 6, 6),
                            seed=1, omega_composition=mode)
        scen = sample(spec, net, 200, stream=(Stream.SAA, 0))
        assert np.max(np.abs(scen.omega - scen.recompute_omega())) <= 1e-9
        s = scen[17]
        load_dev = (s.d - net.demand).sum()
        wind_dev = (s.w - scen.mu_bus).sum()
        want = load_dev - wind_dev if mode == "net" else load_dev
        assert abs(s.omega - want) <= 1e-9


def test_var_omega_sums_sources():
    assert var_omega(UncertaintySpec(sigma_d=(0.0, 0.0))) == 0.0
    assert var_omega(UncertaintySpec(sigma_d=(3.0, 4.0))) == 25.0
    both = UncertaintySpec(sigma_d=(3.0, 4.0), wind_buses=(1,), mu_w=(10.0,), sigma_w=(5.0,))
    assert var_omega(both) == 50.0
    load_only = UncertaintySpec(sigma_d=(3.0, 4.0), wind_buses=(1,), mu_w=(10.0,), sigma_w=(5.0,),
                                omega_composition="load_only")
    assert var_omega(load_only) == 25.0


def test_empirical_var_omega_within_five_percent():
    # Wind mean far above its std, so truncation is negligible.
    net = load_case("case3")
    spec = _spec(sigma_d=(0.0, 0.0, 4.5), mu_w=(50.0,), sigma_w=(5.0,))
    scen = sample(spec, net, 60_000, stream=(Stream.SAA, 9))
    emp = scen.omega.var(ddof=1)
    assert abs(emp - var_omega(spec)) <= 0.05 * var_omega(spec), (emp, var_omega(spec))


def test_perturbation_identity_and_bounds():
    spec = _spec(wind_buses=(1, 2, 3), mu_w=(10.0, 20.0, 30.0), sigma_w=(1.0, 2.0, 3.0))
    rng = np.random.default_rng(0)
    assert perturb_wind_stats(spec, rng, (1, 1), (1, 1)) == spec
    for _ in range(200):
        out = perturb_wind_stats(spec, rng)
        for m0, m1 in zip(spec.mu_w, out.mu_w):
            assert 0.8 * m0 - 1e-12 <= m1 <= 1.2 * m0 + 1e-12
        for s0, s1 in zip(spec.sigma_w, out.sigma_w):
            assert 0.8 * s0 - 1e-12 <= s1 <= 1.2 * s0 + 1e-12


def test_perturbation_mean_factor():
    spec = _spec(mu_w=(1.0,), sigma_w=(1.0,))
    rng = substream(3, Stream.WIND, 0)
    factors = [perturb_wind_stats(spec, rng).mu_w[0] for _ in range(10_000)]
    assert 0.99 <= float(np.mean(factors)) <= 1.01


def test_spec_validation():
    for bad in (dict(sigma_d=(-1.0, 0.0, 0.0)), dict(mu_w=(1.0, 2.0)), dict(omega_composition="x"),
                dict(mu_w=(-1.0,))):
        try:
            _spec(**bad)
            assert False, bad
        except ValueError:
            pass
    try:
        default_spec(load_case("case3"), wind_buses=(8,), mu_w=(1,), sigma_w=(1,))
        assert False
    except ValueError:
        pass
    try:
        sample(_spec(), load_case("case3"), 0)
        assert False
    except ValueError:
        pass


def test_default_spec_scales_demand():
    net = load_case("case14")
    spec = default_spec(net, sigma_d_frac=0.03)
    assert abs(spec.sigma_d[2] - 0.03 * 94.2) < 1e-12
    assert spec.sigma_d[0] == 0.0


def test_serialization():
    net = load_case("case3")
    spec = _spec()
    assert spec_from_json(spec_to_json(spec)) == spec
    scen = sample(spec, net, 5, stream=(Stream.SAA, 2))
    frame = to_frame(scen, net)
    assert list(frame.columns) == ["s", "omega", "d_1", "d_2", "d_3", "w_3"]
    assert len(frame) == 5
    obj = to_json(scen, net)
    assert obj["stream"] == [int(Stream.SAA), 2]
    assert np.allclose(obj["omega"], scen.omega)


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
    print(f"\n{passed}/{len(fns)} scenario tests passed")
    sys.exit(0 if passed == len(fns) else 1)

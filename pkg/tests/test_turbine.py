import json
import math

import numpy as np
import pytest

import windfeas as wf
from windfeas.synth import constant_series, make_series, random_wind
from windfeas.turbine import rebin_curve


class TestLibrary:
    def test_no16_fields(self, library):
        spec = library.get("no16")
        assert spec.hub_height_m == 134.0
        assert spec.cut_in == 3.0
        assert spec.rated_speed == 10.0
        assert spec.cut_out == 20.0
        assert spec.nominal_power_kw == 3300.0

    def test_no124_fields(self, library):
        spec = library.get("no124")
        assert spec.hub_height_m == 137.0
        assert spec.cut_in == 3.0
        assert spec.rated_speed == 10.0
        assert spec.cut_out == 25.0
        assert spec.nominal_power_kw == 3500.0

    def test_all_nine_turbines_load(self, library):
        assert library.ids() == ["no16", "no17", "no44", "no67", "no73",
                                 "no94", "no95", "no124", "no128"]
        assert library.errors == []

    def test_invalid_entry_reported_not_dropped(self, tmp_path):
        entries = [
            {"id": "good", "hub_height_m": 100, "cut_in_ms": 3,
             "rated_ms": 10, "cut_out_ms": 20, "nominal_kw": 1000,
             "curve": [[3, 0], [10, 1000], [20, 1000]]},
            {"id": "bad", "hub_height_m": 100, "cut_in_ms": 12,
             "rated_ms": 10, "cut_out_ms": 20, "nominal_kw": 1000,
             "curve": [[3, 0], [10, 1000]]},
            {"id": "incomplete", "hub_height_m": 100},
        ]
        p = tmp_path / "lib.json"
        p.write_text(json.dumps(entries))
        lib = wf.load_turbine_library(p)
        assert lib.ids() == ["good"]
        assert [e[0] for e in lib.errors] == ["bad", "incomplete"]
        assert "cut_in" in lib.errors[0][1]
        assert "missing required field" in lib.errors[1][1]

    def test_non_monotone_curve_rejected(self, tmp_path):
        entry = {"id": "x", "hub_height_m": 100, "cut_in_ms": 3,
                 "rated_ms": 10, "cut_out_ms": 20, "nominal_kw": 1000,
                 "curve": [[3, 0], [5, 100], [4, 50], [10, 1000]]}
        p = tmp_path / "lib.json"
        p.write_text(json.dumps([entry]))
        lib = wf.load_turbine_library(p)
        assert lib.turbines == []
        assert "increasing" in lib.errors[0][1]

    def test_csv_library(self, tmp_path):
        p = tmp_path / "lib.csv"
        p.write_text(
            "id,hub_height_m,cut_in_ms,rated_ms,cut_out_ms,nominal_kw,curve\n"
            'x1,100,3,10,20,1000,"3:0;6:300;10:1000;20:1000"\n')
        lib = wf.load_turbine_library(p)
        assert lib.ids() == ["x1"]
        assert lib.turbines[0].curve_speeds.tolist() == [3.0, 6.0, 10.0, 20.0]

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            wf.load_turbine_library(tmp_path / "none.json")


class TestRebinCurve:
    def test_already_on_grid_unchanged(self):
        speeds = np.arange(3.0, 20.5, 0.5)
        powers = np.linspace(0, 1000, speeds.size)
        out_s, out_p = rebin_curve(speeds, powers, 0.5)
        np.testing.assert_array_equal(out_s, speeds)
        np.testing.assert_array_equal(out_p, powers)

    def test_linear_midpoint(self):
        out_s, out_p = rebin_curve(np.array([3.0, 4.0]),
                                   np.array([0.0, 100.0]), 0.5)
        np.testing.assert_array_equal(out_s, [3.0, 3.5, 4.0])
        np.testing.assert_array_equal(out_p, [0.0, 50.0, 100.0])

    def test_reproduces_original_knots(self):
        # knots on a 1.0 grid appear in the 0.5 grid; interpolation oracle
        rng = np.random.default_rng(7)
        for _ in range(50):
            n = int(rng.integers(3, 15))
            speeds = 3.0 + np.arange(n, dtype=np.float64)
            powers = np.cumsum(rng.uniform(0, 200, n))
            out_s, out_p = rebin_curve(speeds, powers, 0.5)
            back = np.interp(speeds, out_s, out_p)
            np.testing.assert_allclose(back, powers, rtol=1e-9)

    def test_endpoint_preserved_off_grid(self):
        out_s, out_p = rebin_curve(np.array([3.0, 4.0, 4.3]),
                                   np.array([0.0, 50.0, 80.0]), 0.5)
        assert out_s[-1] == 4.3
        assert out_p[-1] == 80.0

    def test_idempotent(self):
        speeds = np.array([3.0, 4.2, 7.9, 12.0])
        powers = np.array([0.0, 120.0, 900.0, 1000.0])
        once = rebin_curve(speeds, powers, 0.5)
        twice = rebin_curve(*once, 0.5)
        np.testing.assert_array_equal(once[0], twice[0])
        np.testing.assert_array_equal(once[1], twice[1])

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            rebin_curve(np.array([3.0]), np.array([0.0]), 0.5)


class TestPowerAt:
    def test_below_cut_in(self, no16):
        assert wf.power_at(no16, 2.0) == 0.0

    def test_at_cut_in_is_zero(self, no16):
        assert wf.power_at(no16, 3.0) == 0.0

    def test_rated_region(self, no16):
        assert wf.power_at(no16, 15.0) == 3300.0
        assert wf.power_at(no16, 10.0) == 3300.0

    def test_at_and_above_cut_out(self, no16):
        assert wf.power_at(no16, 20.0) == 0.0
        assert wf.power_at(no16, 25.0) == 0.0

    def test_missing_maps_to_missing(self, no16):
        assert math.isnan(wf.power_at(no16, math.nan))

    def test_monotone_between_cut_in_and_rated(self, no16):
        v = np.linspace(3.0, 10.0, 400)
        p = np.array([wf.power_at(no16, x) for x in v])
        assert np.all(np.diff(p) >= 0)

    def test_bounded(self, library):
        rng = np.random.default_rng(13)
        for spec in library.turbines:
            v = rng.uniform(0, 40, 500)
            p = np.array([wf.power_at(spec, x) for x in v])
            assert np.all((p >= 0) & (p <= spec.nominal_power_kw))


class TestPowerSeries:
    def test_constant_rated_day(self, no16):
        wind = constant_series(12.0, 1440, height_m=no16.hub_height_m)
        ps = wf.power_series(no16, wind)
        np.testing.assert_array_equal(ps.values, 3300.0)
        assert ps.cadence_s == 60
        np.testing.assert_array_equal(ps.times, wind.times)

    def test_all_missing_day(self, no16):
        wind = make_series(np.full(1440, np.nan), height_m=134.0)
        # bypass the all-missing impute guard; construct directly
        ps = wf.power_series(no16, wind)
        assert np.isnan(ps.values).all()

    def test_elementwise_oracle(self, no16):
        rng = np.random.default_rng(19)
        wind = random_wind(rng, 500, missing=0.05)
        hub = wf.extrapolate_series(wind, no16.hub_height_m)
        ps = wf.power_series(no16, hub)
        expected = np.array([wf.power_at(no16, v) for v in hub.speed])
        np.testing.assert_array_equal(ps.values, expected)

    def test_height_mismatch_rejected(self, no16):
        wind = constant_series(12.0, 10, height_m=20.0)
        with pytest.raises(ValueError, match="hub height"):
            wf.power_series(no16, wind)

    def test_uplift_scales(self, no16):
        wind = constant_series(12.0, 10, height_m=134.0)
        ps = wf.power_series(no16, wind, uplift=1.03)
        np.testing.assert_allclose(ps.values, 3300.0 * 1.03)
        assert ps.nominal_kw == pytest.approx(3300.0 * 1.03)

    def test_gaps_carried(self, no16):
        from windfeas.synth import epoch
        t0 = epoch(2021)
        speed = np.full(30, 12.0)
        speed[10:20] = np.nan
        wind = wf.impute_short_gaps(
            make_series(speed, t0=t0, height_m=134.0), max_run=5)
        ps = wf.power_series(no16, wind)
        assert ps.gaps == wind.gaps

    def test_iter_days(self, no16):
        wind = constant_series(12.0, 2 * 1440, height_m=134.0)
        days = list(wf.power_series(no16, wind).iter_days())
        assert len(days) == 2
        assert all(len(day) == 1440 for _, day in days)


class TestSpecValidation:
    def _entry(self, **kw):
        base = dict(id="t", hub_height_m=100.0, cut_in=3.0, rated_speed=10.0,
                    cut_out=20.0, nominal_power_kw=1000.0,
                    curve_speeds=np.array([3.0, 10.0, 20.0]),
                    curve_powers=np.array([0.0, 1000.0, 1000.0]))
        base.update(kw)
        return base

    def test_valid(self):
        wf.TurbineSpec(**self._entry())

    def test_speed_ordering_enforced(self):
        with pytest.raises(ValueError, match="cut_in < rated < cut_out"):
            wf.TurbineSpec(**self._entry(cut_in=11.0))

    def test_power_above_nominal_rejected(self):
        with pytest.raises(ValueError, match="powers"):
            wf.TurbineSpec(**self._entry(
                curve_powers=np.array([0.0, 1200.0, 1000.0])))

    def test_rated_tail_must_hold_nominal(self):
        with pytest.raises(ValueError, match="rated"):
            wf.TurbineSpec(**self._entry(
                curve_powers=np.array([0.0, 1000.0, 900.0])))

import math
import warnings

import numpy as np
import pytest

import windfeas as wf
from windfeas.stability import energy_floor_kwh
from windfeas.synth import epoch, piecewise_power_day

T0 = epoch(2021)


def power_day(values, cadence_s=60, nominal=3300.0, t0=T0):
    values = np.asarray(values, dtype=np.float64)
    times = t0 + cadence_s * np.arange(values.size, dtype=np.int64)
    return wf.PowerSeries(turbine_id="t", cadence_s=cadence_s, times=times,
                          values=values, nominal_kw=nominal)


def brute_force_day(values, cadence_s, t_charge_min, t_ov_min, sigma_max,
                    floor_kwh):
    """Independent reference: enumerate, filter on the three constraints,
    earliest-start greedy; plain python throughout."""
    w = t_charge_min * 60 // cadence_s
    stride = int(round((t_charge_min - t_ov_min) * 60 / cadence_s))
    stable = []
    s = 0
    n = len(values)
    while s + w <= n:
        win = [float(x) for x in values[s:s + w]]
        if not any(math.isnan(x) for x in win):
            acc = 0.0
            for x in win:
                acc += x
            m = acc / w
            sq = 0.0
            for x in win:
                sq += (x - m) ** 2
            sd = math.sqrt(sq / w)
            e = m * t_charge_min / 60.0
            if sd <= sigma_max and e >= floor_kwh:
                stable.append((s, m, sd, e))
        s += stride
    selected = []
    last_end = None
    for item in stable:
        if last_end is None or item[0] >= last_end:
            selected.append(item)
            last_end = item[0] + w
    energy = 0.0
    for item in selected:
        energy += item[3]
    return stable, selected, energy


class TestWindowParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            wf.WindowParams(t_charge_min=21, t_ov_min=21)
        with pytest.raises(ValueError):
            wf.WindowParams(t_charge_min=21, t_ov_min=-1)
        with pytest.raises(ValueError):
            wf.WindowParams(t_charge_min=21, t_ov_min=20, sigma_max_kw=0.0)
        with pytest.raises(ValueError):
            wf.WindowParams(t_charge_min=21, t_ov_min=20,
                            min_energy_mode="sometimes")

    def test_sample_counts(self):
        params = wf.WindowParams(t_charge_min=21, t_ov_min=20)
        assert params.sample_counts(60) == (21, 1)
        params3 = wf.WindowParams.slide_one_sample(21, 180)
        assert params3.t_ov_min == 18.0
        assert params3.sample_counts(180) == (7, 1)

    def test_incompatible_stride_rejected(self):
        params = wf.WindowParams(t_charge_min=21, t_ov_min=20)
        with pytest.raises(ValueError, match="stride"):
            params.sample_counts(180)

    def test_window_not_whole_samples_rejected(self):
        params = wf.WindowParams(t_charge_min=20, t_ov_min=10)
        with pytest.raises(ValueError, match="whole"):
            params.sample_counts(180)


class TestEnumerate:
    def test_sliding_candidate_count(self):
        day = power_day(np.full(1440, 100.0))
        params = wf.WindowParams(t_charge_min=21, t_ov_min=20)
        cands = wf.enumerate_windows(day, params)
        assert len(cands) == 1420
        assert cands.start_indices[0] == 0
        assert cands.start_indices[-1] == 1419
        assert cands.start_times[-1] == T0 + 1419 * 60

    def test_disjoint_candidate_count(self):
        day = power_day(np.full(1440, 100.0))
        params = wf.WindowParams(t_charge_min=21, t_ov_min=0)
        assert len(wf.enumerate_windows(day, params)) == 68

    def test_short_day_empty_with_warning(self):
        day = power_day(np.full(10, 100.0))
        params = wf.WindowParams(t_charge_min=21, t_ov_min=20)
        with pytest.warns(UserWarning, match="shorter"):
            assert len(wf.enumerate_windows(day, params)) == 0

    def test_missing_samples_flagged_invalid(self):
        values = np.full(100, 50.0)
        values[30] = np.nan
        cands = wf.enumerate_windows(power_day(values),
                                     wf.WindowParams(21, 20))
        bad = (cands.start_indices <= 30) & (cands.start_indices + 21 > 30)
        np.testing.assert_array_equal(cands.valid, ~bad)
        assert np.isnan(cands.mean_kw[bad]).all()

    def test_multi_day_slice_rejected(self):
        series = power_day(np.full(2000, 50.0))
        with pytest.raises(ValueError, match="single-day"):
            wf.enumerate_windows(series, wf.WindowParams(21, 20))


class TestFilterStable:
    def test_constant_window_kept(self, tesla):
        day = power_day(np.full(21, 1155.0))
        params = wf.WindowParams(21, 20)
        stable = wf.filter_stable(wf.enumerate_windows(day, params), params,
                                  tesla)
        assert len(stable) == 1
        win = stable[0]
        assert win.power_std_kw == 0.0
        assert win.mean_power_kw == 1155.0
        assert win.energy_kwh == pytest.approx(1155.0 * 21 / 60)

    def test_alternating_window_rejected(self, tesla):
        values = np.tile([0.0, 3300.0], 11)[:21]
        params = wf.WindowParams(21, 20)
        cands = wf.enumerate_windows(power_day(values), params)
        assert cands.std_kw[0] == pytest.approx(np.std(values), rel=1e-12)
        assert cands.std_kw[0] > 1600.0  # half the range, roughly
        assert wf.filter_stable(cands, params, tesla) == []

    def test_zero_power_rejected_by_energy_floor(self, tesla):
        day = power_day(np.zeros(21))
        params = wf.WindowParams(21, 20)
        cands = wf.enumerate_windows(day, params)
        assert cands.std_kw[0] == 0.0
        assert wf.filter_stable(cands, params, tesla) == []

    def test_partial_charge_floor(self, tesla):
        # 5 kW for 21 min = 1.75 kWh: below one full charge, above the
        # charger's per-minute energy (100/60 kWh)
        day = power_day(np.full(21, 5.0))
        full = wf.WindowParams(21, 20, min_energy_mode="full-charge")
        part = wf.WindowParams(21, 20, min_energy_mode="partial-charge")
        assert energy_floor_kwh(full, tesla) == 35.0
        assert energy_floor_kwh(part, tesla) == pytest.approx(100.0 / 60.0)
        assert wf.filter_stable(wf.enumerate_windows(day, full), full,
                                tesla) == []
        kept = wf.filter_stable(wf.enumerate_windows(day, part), part, tesla)
        assert len(kept) == 1

    def test_matches_brute_force(self, tesla):
        rng = np.random.default_rng(43)
        params = wf.WindowParams(21, 20)
        for _ in range(30):
            values = piecewise_power_day(rng, int(rng.integers(50, 1440)),
                                         3300.0)
            day = power_day(values)
            stable = wf.filter_stable(wf.enumerate_windows(day, params),
                                      params, tesla)
            ref_stable, _, _ = brute_force_day(values, 60, 21, 20, 0.1, 35.0)
            assert [w.start_index for w in stable] == \
                [s for s, _, _, _ in ref_stable]


class TestSelectNonoverlapping:
    def _window(self, start_min, mean=100.0):
        return wf.StableWindow(start_time=T0 + start_min * 60,
                               start_index=start_min, t_charge_min=21,
                               mean_power_kw=mean, power_std_kw=0.0)

    def test_dense_chain(self):
        stable = [self._window(i) for i in range(42)]
        selected = wf.select_nonoverlapping(stable)
        assert [w.start_index for w in selected] == [0, 21]

    def test_already_disjoint_unchanged(self):
        stable = [self._window(i * 25) for i in range(5)]
        assert wf.select_nonoverlapping(stable) == stable

    def test_random_matches_reference(self):
        rng = np.random.default_rng(47)
        for _ in range(100):
            starts = np.unique(rng.integers(0, 1400,
                                            int(rng.integers(1, 200))))
            stable = [self._window(int(s)) for s in starts]
            selected = wf.select_nonoverlapping(stable)
            # independent earliest-start reference
            expect, last_end = [], -1
            for s in starts:
                if s >= last_end:
                    expect.append(int(s))
                    last_end = s + 21
            assert [w.start_index for w in selected] == expect

    def test_pairwise_disjoint(self):
        rng = np.random.default_rng(53)
        starts = np.unique(rng.integers(0, 1400, 300))
        selected = wf.select_nonoverlapping([self._window(int(s))
                                             for s in starts])
        for a, b in zip(selected, selected[1:]):
            assert a.end_time <= b.start_time

    def test_unsorted_rejected(self):
        with pytest.raises(ValueError, match="sorted"):
            wf.select_nonoverlapping([self._window(30), self._window(0)])


class TestDailyEnergyAndEvCount:
    def test_empty_selection(self):
        assert wf.daily_energy([]) == 0.0

    def test_sixty_eight_rated_windows(self):
        windows = [wf.StableWindow(start_time=T0 + i * 21 * 60, start_index=0,
                                   t_charge_min=21, mean_power_kw=3300.0,
                                   power_std_kw=0.0) for i in range(68)]
        assert wf.daily_energy(windows) == pytest.approx(78540.0, abs=1e-9)

    def test_direct_summation_oracle(self):
        rng = np.random.default_rng(59)
        windows = [wf.StableWindow(start_time=T0 + i * 2000, start_index=0,
                                   t_charge_min=21,
                                   mean_power_kw=float(rng.uniform(0, 3300)),
                                   power_std_kw=0.0) for i in range(50)]
        expected = sum(w.mean_power_kw * 0.35 for w in windows)
        assert wf.daily_energy(windows) == pytest.approx(expected, rel=1e-9)

    def test_ev_counts(self, tesla):
        assert wf.ev_count(70.0, tesla) == 2
        assert wf.ev_count(34.9, tesla) == 0
        assert wf.ev_count(78540.0, tesla) == 2244
        assert wf.ev_count(0.0, tesla) == 0

    def test_ev_count_monotone(self, tesla):
        rng = np.random.default_rng(61)
        energies = np.sort(rng.uniform(0, 1e5, 100))
        counts = [wf.ev_count(float(e), tesla) for e in energies]
        assert all(a <= b for a, b in zip(counts, counts[1:]))

    def test_negative_energy_rejected(self, tesla):
        with pytest.raises(ValueError):
            wf.ev_count(-1.0, tesla)


class TestAnalyzeDay:
    def test_constant_rated_fixture(self, tesla):
        day = power_day(np.full(1440, 3300.0))
        res = wf.analyze_day(day, wf.WindowParams(21, 20), tesla)
        assert res.n_candidates == 1420
        assert res.n_valid == 1420
        assert res.n_stable == 1420
        assert res.n_windows == 68
        assert res.total_energy_kwh == pytest.approx(78540.0, abs=1e-6)
        assert res.ev_count == 2244

    def test_all_below_cut_in(self, tesla):
        day = power_day(np.zeros(1440))
        res = wf.analyze_day(day, wf.WindowParams(21, 20), tesla)
        assert res.n_windows == 0
        assert res.total_energy_kwh == 0.0
        assert res.ev_count == 0

    def test_fully_missing_day(self, tesla):
        day = power_day(np.full(1440, np.nan))
        res = wf.analyze_day(day, wf.WindowParams(21, 20), tesla)
        assert (res.n_windows, res.total_energy_kwh, res.ev_count) == (0, 0.0, 0)
        assert res.n_valid == 0

    def test_matches_brute_force(self, tesla):
        rng = np.random.default_rng(67)
        for i in range(30):
            n = int(rng.integers(30, 1440))
            t_charge = int(rng.choice([5, 10, 21]))
            t_ov = int(rng.integers(0, t_charge))
            values = piecewise_power_day(rng, n, 3300.0)
            params = wf.WindowParams(t_charge, t_ov)
            res = wf.analyze_day(power_day(values), params, tesla)
            _, ref_sel, ref_energy = brute_force_day(
                values, 60, t_charge, t_ov, params.sigma_max_kw, 35.0)
            assert [w.start_index for w in res.windows] == \
                [s for s, _, _, _ in ref_sel]
            if ref_energy:
                assert res.total_energy_kwh == pytest.approx(ref_energy,
                                                             rel=1e-9)
            assert res.ev_count == math.floor(ref_energy / 35.0)

    def test_selected_windows_pairwise_disjoint(self, tesla):
        rng = np.random.default_rng(71)
        for _ in range(20):
            values = piecewise_power_day(rng, 1440, 3300.0)
            res = wf.analyze_day(power_day(values), wf.WindowParams(21, 20),
                                 tesla)
            wins = res.windows
            for i in range(len(wins)):
                for j in range(i + 1, len(wins)):
                    assert wins[i].end_time <= wins[j].start_time or \
                        wins[j].end_time <= wins[i].start_time

    def test_energy_equals_window_sum_exactly(self, tesla):
        rng = np.random.default_rng(73)
        values = piecewise_power_day(rng, 1440, 3300.0)
        res = wf.analyze_day(power_day(values), wf.WindowParams(21, 20),
                             tesla)
        assert res.total_energy_kwh == float(
            sum(w.energy_kwh for w in res.windows))

    def test_deterministic_serialization(self, tesla):
        rng = np.random.default_rng(79)
        values = piecewise_power_day(rng, 1440, 3300.0)
        a = wf.analyze_day(power_day(values), wf.WindowParams(21, 20), tesla)
        b = wf.analyze_day(power_day(values.copy()),
                           wf.WindowParams(21, 20), tesla)
        assert a.to_json() == b.to_json()
        assert a == b


class TestAveragingMonotonicity:
    def test_block_mean_std_never_exceeds_raw_std(self):
        rng = np.random.default_rng(83)
        for _ in range(20):
            raw = rng.uniform(0, 3300, 1440)
            for start in range(0, 1440 - 21, 63):  # aligned to 3-min grid
                window = raw[start:start + 21]
                blocks = window.reshape(7, 3).mean(axis=1)
                assert blocks.std() <= window.std() + 1e-12

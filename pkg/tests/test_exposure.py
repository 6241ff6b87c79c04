import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from cycgrowth.exposure import (ExposureError, RegionPeriodKey, RegionPopulation,
                                build_annual_indicator, build_quarterly_indicator,
                                build_robustness_indicators, read_indicator_csv,
                                read_population_csv, temporal_weight, write_indicator_csv)
from cycgrowth.gridwind import Pixel, StormFootprint
from oracles import exposure_oracle, random_exposure_instance

A = Pixel(25.0, -80.0, "FL", 100.0)
B = Pixel(25.1, -80.0, "FL", 300.0)
POP = [RegionPopulation(RegionPeriodKey("FL", 2005), 1000.0)]


def _by_key(series):
    return {(s.key.region_id, s.key.year, s.key.subperiod): s for s in series}


def test_hand_computed_quarterly_and_annual():
    fps = [StormFootprint("S1", "FL", 2005, 3, ((A, 100.0), (B, 80.0))),
           StormFootprint("S2", "FL", 2005, 9, ((A, 150.0),))]
    q = _by_key(build_quarterly_indicator(fps, POP))
    assert len(q) == 4
    assert_allclose(q[("FL", 2005, 1)].cyc, (100 * 100 + 80 * 300) / 1000)
    assert_allclose(q[("FL", 2005, 3)].cyc, 150 * 100 / 1000)
    assert q[("FL", 2005, 2)].cyc == 0.0 and q[("FL", 2005, 2)].event_count == 0
    assert_allclose(q[("FL", 2005, 1)].pop_share, 0.4)
    (a,) = build_annual_indicator(fps, POP)
    # Weighted winds: A max(100*9/12, 150*3/12) = 75, B 80*9/12 = 60.
    assert_allclose(a.cyc, (75 * 100 + 60 * 300) / 1000)
    assert a.event_count == 2
    (u,) = build_annual_indicator(fps, POP, temporal_weighting=False)
    assert_allclose(u.cyc, (150 * 100 + 80 * 300) / 1000)


def test_temporal_weight():
    assert temporal_weight(1) == 11 / 12
    assert temporal_weight(12) == 0.0
    with pytest.raises(ExposureError):
        temporal_weight(0)


def test_matches_oracle_on_random_instances():
    rng = np.random.default_rng(5)
    for _ in range(100):
        fps, pops = random_exposure_instance(rng)
        for quarterly, weighted in ((True, False), (False, True), (False, False)):
            got = (build_quarterly_indicator(fps, pops) if quarterly
                   else build_annual_indicator(fps, pops, weighted))
            ref = exposure_oracle(fps, pops, quarterly, weighted)
            assert set(_by_key(got)) == set(ref)
            for k, s in _by_key(got).items():
                assert_allclose([s.cyc, s.pop_share], ref[k][:2], rtol=1e-12, atol=0)
                assert s.event_count == ref[k][2]


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.floats(0.1, 10.0))
def test_cyc_is_linear_in_wind(seed, c):
    fps, pops = random_exposure_instance(np.random.default_rng(seed), 30, 3)
    scaled = [StormFootprint(f.storm_id, f.region_id, f.year, f.month,
                             tuple((p, w * c) for p, w in f.cells)) for f in fps]
    for a, b in zip(build_quarterly_indicator(fps, pops), build_quarterly_indicator(scaled, pops)):
        assert_allclose(b.cyc, c * a.cyc, rtol=1e-12)
        assert a.pop_share == b.pop_share


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31))
def test_weighting_never_raises_and_share_bounded(seed):
    fps, pops = random_exposure_instance(np.random.default_rng(seed), 30, 5)
    w = build_annual_indicator(fps, pops, True)
    u = build_annual_indicator(fps, pops, False)
    for a, b in zip(w, u):
        assert a.cyc <= b.cyc + 1e-12
        assert 0.0 <= a.pop_share <= 1.0
    q = build_quarterly_indicator(fps, pops)
    # Each storm is counted once per quarter it strikes in.
    assert sum(s.event_count for s in q) == len({(f.storm_id, f.region_id) for f in fps})


def test_missing_population_is_an_error():
    fp = StormFootprint("S1", "GA", 2005, 3, ((A, 100.0),))
    with pytest.raises(ExposureError, match="GA"):
        build_quarterly_indicator([fp], POP)
    with pytest.raises(ExposureError):
        RegionPopulation(RegionPeriodKey("FL", 2005), 0.0)


def test_robustness_frequency_and_csv_roundtrip(tmp_path):
    fps = [StormFootprint("S1", "FL", 2005, 3, ((A, 100.0),))]
    with pytest.raises(ExposureError):
        build_robustness_indicators(fps, POP, "monthly")
    series = build_robustness_indicators(fps, POP, "quarterly")
    write_indicator_csv(series, tmp_path / "i.csv")
    assert read_indicator_csv(tmp_path / "i.csv") == series
    (tmp_path / "p.csv").write_text("region_id,year,quarter,population\nFL,2005,,abc\n")
    with pytest.raises(ExposureError, match="row 2"):
        read_population_csv(tmp_path / "p.csv")

import itertools
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from css_skyline import fixtures as F
from css_skyline.causal_graph import graph_from_edges
from css_skyline.gain import (
    GainReport, candidate_sets, dd_gain, gn_gain, ln_gain, score, select_conditioning_set,
)
from css_skyline.partition import Partitioning, kmeans_partition, single_group
from css_skyline.preferences import PreferenceSpec
from css_skyline.tabular import DataError, Dataset, generate_sem

from test_causal_graph import small_dags


def test_preference_parse():
    p = PreferenceSpec.parse("Price:min, Commute:max,Size")
    assert p.attributes == ("Price", "Commute", "Size")
    assert p.directions == ("min", "max", "min")
    assert str(p) == "Price:min,Commute:max,Size:min"
    assert p.orientation("Price", "Commute") == -1
    with pytest.raises(ValueError):
        PreferenceSpec.parse("a:up")
    with pytest.raises(ValueError):
        PreferenceSpec.parse("a,a")
    with pytest.raises(ValueError):
        PreferenceSpec.parse("")


def test_gn_hand_traces():
    fork = gn_gain(F.negative_fork(), F.xy_min(), {"A"})
    assert fork.gain == 1
    assert fork.per_pair[("X", "Y")] == {"imp_plus": 0.0, "imp_minus": -1.0, "weight": 1.0}
    assert gn_gain(F.positive_collider(), F.xy_min(), {"C"}).gain == -1
    for g in (F.negative_fork(), F.positive_collider(), F.housing(), F.two_confounder_fork()):
        pref = PreferenceSpec.all_min(g.nodes[:2])
        assert gn_gain(g, pref, ()).gain == 0
        assert ln_gain(g, pref, ()).gain == 0


def test_ln_fig8_ranking():
    g, pref = F.two_confounder_fork(), F.xz_min()
    ab = ln_gain(g, pref, {"A", "B"}, 0.6, 0.4).gain
    a = ln_gain(g, pref, {"A"}, 0.6, 0.4).gain
    b = ln_gain(g, pref, {"B"}, 0.6, 0.4).gain
    assert ab == pytest.approx(0.2) and a == pytest.approx(0.16) and b == pytest.approx(0.06)
    assert ab > b


def test_ln_limit_matches_weighted_gn_on_collider_free():
    g, pref = F.two_confounder_fork(), F.xz_min()
    for r in range(3):
        for Z in itertools.combinations(["A", "B"], r):
            assert ln_gain(g, pref, Z, 1.0, 0.0).gain == pytest.approx(gn_gain(g, pref, Z, weighted=True).gain)


def test_ln_lambda_b_monotone():
    g, pref = F.two_confounder_fork(), F.xz_min()
    for Z in ({"A"}, {"B"}, {"A", "B"}):
        gains = [ln_gain(g, pref, Z, 0.6, lb).gain for lb in np.linspace(0.0, 0.55, 12)]
        assert all(x >= y - 1e-12 for x, y in zip(gains, gains[1:]))


def test_endpoint_in_z_skips_pair():
    rep = gn_gain(F.negative_fork(), F.xy_min(), {"X"})
    assert rep.gain == 0 and rep.per_pair[("X", "Y")] == {"skipped": True}


def test_housing_selection():
    g, pref = F.housing(), F.housing_preferences()
    for strategy in ("gnsky", "lnsky"):
        rep = select_conditioning_set(None, g, pref, strategy)
        assert "Distance_to_city_center" in rep.conditioning_set
        assert "Scenic_quality" not in rep.conditioning_set
        assert rep.beats_zero and rep.beats_preference_set


def test_all_positive_graph_says_vanilla():
    rep = select_conditioning_set(None, F.all_positive(), F.xy_min(), "lnsky")
    assert rep.gain <= 0 and not rep.beats_zero


@given(small_dags(max_nodes=5), st.sampled_from(["gnsky", "lnsky"]))
def test_select_matches_bruteforce_rescoring(g, strategy):
    pref = PreferenceSpec.all_min(g.nodes[:2])
    rep = select_conditioning_set(None, g, pref, strategy)
    subsets = [Z for r in range(1, len(g.nodes) + 1) for Z in itertools.combinations(sorted(g.nodes), r)]
    scored = [(score(Z, strategy, pref, g=g).gain, Z) for Z in subsets]
    best = max(s for s, _ in scored)
    assert rep.gain == pytest.approx(best)
    first = next(Z for s, Z in scored if s > best - 1e-12)
    assert rep.conditioning_set == first
    again = select_conditioning_set(None, g, pref, strategy)
    assert again.conditioning_set == rep.conditioning_set


@given(small_dags(max_nodes=6))
def test_empty_set_zero_gain(g):
    pref = PreferenceSpec.all_min(g.nodes[:3])
    assert gn_gain(g, pref, ()).gain == 0
    assert gn_gain(g, pref, (), weighted=True).gain == 0
    assert ln_gain(g, pref, ()).gain == 0


@given(small_dags(max_nodes=6), st.data())
def test_unit_weights_weighted_equals_unweighted(g, data):
    unit = graph_from_edges([(e.src, e.dst, 1.0 if e.weight > 0 else -1.0) for e in g.edges], nodes=g.nodes)
    pref = PreferenceSpec.all_min(unit.nodes[:2])
    Z = data.draw(st.lists(st.sampled_from(unit.nodes[2:]), unique=True))
    assert gn_gain(unit, pref, Z).gain == pytest.approx(gn_gain(unit, pref, Z, weighted=True).gain)


@given(small_dags(max_nodes=6), st.data())
def test_gain_equals_recorded_pair_sum(g, data):
    pref = PreferenceSpec.all_min(g.nodes[:3])
    Z = data.draw(st.lists(st.sampled_from(g.nodes), unique=True))
    gn = gn_gain(g, pref, Z)
    assert gn.gain == pytest.approx(sum(v["imp_plus"] - v["imp_minus"] for v in gn.per_pair.values() if "imp_plus" in v))
    ln = ln_gain(g, pref, Z)
    assert ln.gain == pytest.approx(sum(v["l_imp_plus"] - v["l_imp_minus"] for v in ln.per_pair.values() if "l_imp_plus" in v))


def test_dd_independent_near_zero():
    g = graph_from_edges([("X", "W", 1.0), ("Y", "V", 1.0)], nodes=["V", "W", "X", "Y"])
    ds = generate_sem(g, 50_000, 0)
    rep = dd_gain(ds, F.xy_min(), ["W"], kmeans_partition(ds, ["W"], 10, 0))
    assert abs(rep.gain) < 0.05


def test_dd_fork_positive_and_fig8_ranking():
    ds = generate_sem(F.negative_fork(), 50_000, 1)
    rep = dd_gain(ds, F.xy_min(), ["A"], kmeans_partition(ds, ["A"], 10, 1))
    assert rep.gain > 0.3
    ds8 = generate_sem(F.two_confounder_fork(), 100_000, 2)
    ab = dd_gain(ds8, F.xz_min(), ["A", "B"], kmeans_partition(ds8, ["A", "B"], 10, 2)).gain
    b = dd_gain(ds8, F.xz_min(), ["B"], kmeans_partition(ds8, ["B"], 10, 2)).gain
    assert ab > b


def test_dd_mixed_directions_flip():
    ds = generate_sem(F.negative_fork(), 20_000, 4)
    mm = dd_gain(ds, F.xy_min(), ["A"], single_group(ds, ["A"]))
    mx = dd_gain(ds, PreferenceSpec(("X", "Y"), ("min", "max")), ["A"], single_group(ds, ["A"]))
    assert mm.per_pair[("X", "Y")]["c_p"] == pytest.approx(-mx.per_pair[("X", "Y")]["c_p"])
    assert mm.per_pair[("X", "Y")]["c_p"] < 0


def test_dd_skips_small_and_degenerate_groups():
    ds = Dataset.from_array(["X", "Y", "Z"], np.array(
        [[1, 2, 0], [2, 1, 0], [3, 5, 0], [4, 4, 0], [1, 1, 1], [2, 2, 1], [5, 5, 2], [7, 7, 3], [7, 8, 3], [7, 9, 3]],
        dtype=float))
    groups = Partitioning("group_by", [np.arange(4), np.array([4, 5]), np.array([6]), np.array([7, 8, 9])], ("Z",))
    rep = dd_gain(ds, F.xy_min(), ["Z"], groups)
    assert rep.metadata["skipped_small_groups"] == 2
    assert rep.metadata["undefined_correlations"] == 1
    with pytest.raises(DataError):
        dd_gain(ds, F.xy_min(), ["Z"], Partitioning("group_by", [np.array([0, 1]), np.arange(2, 10)[:0]], ("Z",)))


def test_strategies_agree_on_negative_fork():
    g, pref = F.negative_fork(), F.xy_min()
    ds = generate_sem(g, 30_000, 8)
    params = {"m": 10, "seed": 8}
    for strategy in ("gnsky", "lnsky", "ddsky"):
        assert score(("A",), strategy, pref, ds, g, params).gain > 0


def test_gain_report_json():
    rep = select_conditioning_set(None, F.negative_fork(), F.xy_min(), "lnsky", {"lambda_o": 0.6, "lambda_b": 0.4})
    obj = json.loads(rep.to_json())
    assert set(obj) == {"strategy", "Z", "gain", "per_pair", "params", "beats_zero", "beats_preference_set"}
    assert obj["Z"] == ["A"] and obj["params"]["lambda_o"] == 0.6


def test_select_options():
    g, pref = F.negative_fork(), F.xy_min()
    assert candidate_sets(["b", "a", "c"], 2) == [("a",), ("b",), ("c",), ("a", "b"), ("a", "c"), ("b", "c")]
    rep = select_conditioning_set(None, g, pref, "gnsky", exclude_preferences=True, max_subset_size=1)
    assert rep.metadata["candidates"] == 1
    with pytest.raises(ValueError):
        select_conditioning_set(None, None, pref, "gnsky")
    with pytest.raises(ValueError):
        select_conditioning_set(None, g, pref, "ddsky")
    with pytest.raises(ValueError):
        select_conditioning_set(None, g, pref, "gnsky", max_subset_size=0)
    with pytest.raises(ValueError):
        score(("A",), "nope", pref, g=g)


def test_corr_magnitude_weighting():
    g, pref = F.negative_fork(), F.xy_min()
    ds = generate_sem(g, 20_000, 0)
    rep = select_conditioning_set(ds, g, pref, "gnsky", {"corr_magnitude": True})
    assert rep.gain == pytest.approx(0.5, abs=0.03)


def test_select_skips_unscorable_ddsky_candidates():
    # conditioning on a two-valued preference column leaves it constant in every group
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, 200).astype(float)
    ds = Dataset.from_array(["X", "Y", "W"], np.column_stack([x, rng.standard_normal(200), rng.standard_normal(200)]))
    rep = select_conditioning_set(ds, None, F.xy_min(), "ddsky", {"m": 2}, max_subset_size=1)
    assert rep.metadata["unscorable"] == 1
    assert rep.conditioning_set in {("W",), ("Y",)}

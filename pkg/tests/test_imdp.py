import math
import random
import string

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morphlex.core import (AlphabetConfig, Candidate, ConfigError, EmptyDataError,
                           ScoreTable)
from morphlex.imdp import (OtsuResult, RefinementState, best_explanation, build_support_index,
                           extract_lexicon, initial_scores, otsu_threshold, prefilter,
                           reduction_stats, refine_step, run_pipeline, run_refinement,
                           support_filter)

from oracles import brute_bep, brute_otsu, brute_support, random_word

HU = AlphabetConfig(frozenset("abcdefghijklmnopqrstuvwxyzáéíóöőúüű"), whitelist=frozenset("a"))


def cands(*surfaces):
    return [Candidate(s) for s in surfaces]


# -- prefilter ---------------------------------------------------------------

@pytest.mark.parametrize("token", ["Budapest", "abc123", "a" * 31, "NATO", "xСy", "kaΩ", "hAuS"])
def test_prefilter_drops(token):
    assert prefilter(cands(token), HU) == []


@pytest.mark.parametrize("token", ["ház", "a" * 30, "szép", "a"])
def test_prefilter_keeps(token):
    assert [c.surface for c in prefilter(cands(token), HU)] == [token]


def test_prefilter_min_length_with_whitelist():
    cfg = HU.replace(min_length=2)
    kept = [c.surface for c in prefilter(cands("a", "b", "ab"), cfg)]
    assert kept == ["a", "ab"]


# -- support -----------------------------------------------------------------

def test_support_example():
    index = build_support_index(cands("talo", "talossa", "talon", "taloja"))
    assert index.support("talo") == 3
    assert index.support("talossa") == 0
    assert [c.surface for c in support_filter(index, 3)] == ["talo"]
    assert len(support_filter(index, 0)) == 4


def test_support_singleton_and_m1():
    assert build_support_index(cands("talo")).support("talo") == 0
    index = build_support_index(cands("aa", "aab", "aac"))
    assert index.support("aa") == 2
    assert [c.surface for c in support_filter(index, 1)] == ["aa"]


def test_support_counts_each_container_once():
    index = build_support_index(cands("a", "aaaa"))
    assert index.support("a") == 1


def test_support_requires_dedup():
    with pytest.raises(ValueError):
        build_support_index(cands("a", "a"))


@pytest.mark.parametrize("seed", range(5))
def test_support_matches_brute_force(seed):
    rng = random.Random(seed)
    surfaces = sorted({random_word(rng, 1, 7, "abc") for _ in range(rng.randint(1, 500))})
    index = build_support_index(cands(*surfaces))
    expected = brute_support(surfaces)
    assert {s: index.support(s) for s in surfaces} == expected


# -- scoring -----------------------------------------------------------------

def test_initial_scores():
    table = initial_scores(cands("ssa", "a", "talossani"))
    assert table["ssa"] == 1 / 3 and table["a"] == 1.0 and table["talossani"] == 1 / 9
    assert table.iteration == 0
    with pytest.raises(EmptyDataError):
        initial_scores([])


def test_best_explanation_example():
    scores = ScoreTable({"talo": 0.25, "ssa": 1 / 3, "talossa": 1 / 7})
    dec = best_explanation("talossa", scores, set())
    assert dec.parts == ("talo", "ssa")
    assert dec.total_score == pytest.approx(0.583333333333, abs=1e-12)
    assert dec.total_score == brute_bep("talossa", scores.entries, set())
    assert best_explanation("talo", scores, set()) is None


def test_best_explanation_whitelist_legality():
    scores = ScoreTable({"a": 1.0, "ab": 0.5, "b": 1.0})
    assert best_explanation("ab", scores, {"a"}) is None
    assert best_explanation("ab", scores, {"a", "b"}).parts == ("a", "b")


def test_best_explanation_unknown_token():
    with pytest.raises(KeyError):
        best_explanation("x", ScoreTable({"a": 1.0}), set())


def test_best_explanation_tiebreak_shortest_first_part():
    # "abcd" = ab+cd or abc+d-less split; equal sums from ab|cd and a b|cd style
    scores = ScoreTable({"ab": 0.5, "cd": 0.5, "abc": 0.25, "bcd": 0.25,
                         "abcd": 0.25, "a": 0.75, "d": 0.75})
    dec = best_explanation("abcd", scores, {"a", "d"})
    # a+bcd = 1.0, abc+d = 1.0, ab+cd = 1.0: all tie, shortest first part wins
    assert dec.parts == ("a", "bcd")


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_best_explanation_matches_enumeration(seed):
    rng = random.Random(seed)
    pool = sorted({random_word(rng, 1, 6, "abc") for _ in range(rng.randint(1, 30))})
    scores = ScoreTable({t: rng.uniform(0.01, 1.0) / len(t) for t in pool})
    whitelist = {c for c in "abc" if rng.random() < 0.5}
    for token in pool:
        dec = best_explanation(token, scores, whitelist)
        expected = brute_bep(token, scores.entries, whitelist)
        if expected is None:
            assert dec is None
        else:
            assert dec.total_score == pytest.approx(expected, abs=1e-12)
            assert "".join(dec.parts) == token and len(dec.parts) >= 2
            assert sum(scores[p] for p in dec.parts) == pytest.approx(expected, abs=1e-12)
            assert all(len(p) > 1 or p in whitelist for p in dec.parts)


def test_empty_whitelist_never_yields_single_chars():
    rng = random.Random(3)
    pool = sorted({random_word(rng, 1, 5, "ab") for _ in range(40)})
    scores = initial_scores(pool)
    for token in pool:
        dec = best_explanation(token, scores, set())
        assert dec is None or all(len(p) > 1 for p in dec.parts)


# -- refinement --------------------------------------------------------------

def test_refine_step_penalises_composite():
    state = RefinementState.start(cands("talo", "ssa", "talossa"))
    nxt = refine_step(state, set())
    assert nxt.scores["talossa"] == pytest.approx((1 / 7) / (1 + 0.25 + 1 / 3), abs=1e-12)
    assert nxt.scores["talossa"] == pytest.approx(0.090226, abs=1e-6)
    assert nxt.scores["talo"] == 0.25
    assert nxt.iteration == 1
    assert nxt.last_max_delta == pytest.approx(1 / 7 - nxt.scores["talossa"], abs=1e-15)


def test_refine_step_equal_bep_keeps_score():
    # S_0(abab) = 1/4; whitelisted halves give BEP = 1/4 exactly only if
    # ab scores 1/8, so build the table by hand
    s0 = ScoreTable({"ab": 0.5, "abab": 0.25})
    cur = ScoreTable({"ab": 0.125, "abab": 0.25})
    nxt = refine_step(RefinementState(cur, s0), set())
    assert nxt.scores["abab"] == 0.25


def test_refine_step_is_synchronous():
    # abc's update must read the old score of ab, not the one from this round
    s0 = initial_scores(["ab", "c", "abc", "a", "b"])
    state = RefinementState(s0, s0)
    nxt = refine_step(state, {"a", "b", "c"})
    bep_abc_old = max(s0["ab"] + s0["c"], s0["a"] + s0["b"] + s0["c"])
    assert nxt.scores["abc"] == pytest.approx(s0["abc"] / (1 + bep_abc_old), abs=1e-15)


def test_run_refinement_fixed_point(latin_cfg):
    state = run_refinement(cands("talo", "kissa", "koira"), latin_cfg)
    assert state.iteration == 1 and state.stop_reason == "converged"
    assert state.scores.entries == state.initial_scores.entries


def test_run_refinement_example(latin_cfg):
    state = run_refinement(cands("talo", "ssa", "talossa"), latin_cfg)
    assert state.scores["talossa"] == pytest.approx(0.090226, abs=1e-6)
    assert state.scores["talo"] == 0.25 and state.scores["ssa"] == 1 / 3
    assert state.max_delta_history[-1] == 0.0
    assert state.iteration == 2


def test_run_refinement_infinite_epsilon(latin_cfg):
    pool = cands("ab", "cd", "abcd", "abcdab")
    state = run_refinement(pool, latin_cfg, epsilon=math.inf)
    assert state.iteration == 1


def test_run_refinement_iteration_cap(latin_cfg):
    state = run_refinement(cands("ab", "cd", "abcd"), latin_cfg, epsilon=1e-300,
                           max_iterations=1)
    assert state.iteration == 1
    with pytest.raises(ConfigError):
        run_refinement(cands("ab"), latin_cfg, max_iterations=0)
    with pytest.raises(EmptyDataError):
        run_refinement([], latin_cfg)


def _random_pool(rng, n=40):
    return sorted({random_word(rng, 1, 7, "abcd") for _ in range(n)})


@pytest.mark.parametrize("seed", range(10))
def test_scores_bounded_by_initial(seed):
    rng = random.Random(seed)
    pool = _random_pool(rng)
    cfg = AlphabetConfig(frozenset("abcd"), whitelist=frozenset("ab"))
    state = RefinementState.start(cands(*pool))
    for _ in range(5):
        state = refine_step(state, cfg.whitelist)
        for t, s in state.scores.entries.items():
            assert 0 < s <= state.initial_scores[t]
            if brute_bep(t, state.initial_scores.entries, cfg.whitelist) is None:
                assert s == state.initial_scores[t]


@pytest.mark.parametrize("seed", range(5))
def test_refine_order_independent_and_deterministic(seed):
    rng = random.Random(seed)
    pool = _random_pool(rng, 60)
    cfg = AlphabetConfig(frozenset("abcd"), whitelist=frozenset("a"))
    a = run_refinement(cands(*pool), cfg)
    shuffled = pool[:]
    rng.shuffle(shuffled)
    b = run_refinement(cands(*shuffled), cfg)
    assert a.scores.entries == b.scores.entries
    assert list(a.scores.entries.items()) == list(b.scores.entries.items())
    assert a.max_delta_history == b.max_delta_history


def test_refine_step_matches_run_refinement():
    rng = random.Random(11)
    pool = _random_pool(rng, 50)
    cfg = AlphabetConfig(frozenset("abcd"), whitelist=frozenset("b"), max_iterations=4,
                         epsilon=1e-300)
    batch = run_refinement(cands(*pool), cfg)
    state = RefinementState.start(cands(*pool))
    for _ in range(4):
        state = refine_step(state, cfg.whitelist)
    assert state.scores.entries == batch.scores.entries


# -- otsu --------------------------------------------------------------------

def test_otsu_two_clusters():
    values = [0.1, 0.1, 0.1, 0.9, 0.9]
    res = otsu_threshold(values, 256)
    assert 0.1 < res.threshold < 0.9
    assert [v >= res.threshold for v in values] == [False, False, False, True, True]


def test_otsu_two_values():
    res = otsu_threshold([0.2, 0.8], 256)
    assert 0.2 < res.threshold <= 0.8


def test_otsu_degenerate():
    with pytest.raises(EmptyDataError):
        otsu_threshold([0.5, 0.5, 0.5], 256)
    with pytest.raises(EmptyDataError):
        otsu_threshold([], 256)
    with pytest.raises(ConfigError):
        otsu_threshold([0.1, 0.2], 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=300).filter(
    lambda v: len(set(v)) >= 2), st.sampled_from([2, 3, 16, 64, 256]))
def test_otsu_matches_exhaustive(values, bins):
    res = otsu_threshold(values, bins)
    thr, var = brute_otsu(values, bins)
    assert min(values) <= res.threshold <= max(values)
    assert res.threshold == pytest.approx(thr, abs=1e-12)
    assert res.inter_class_variance == pytest.approx(var, rel=1e-9, abs=1e-18)


# -- lexicon / reduction -----------------------------------------------------

def _state(entries):
    s0 = ScoreTable({t: 1 / len(t) for t in entries})
    return RefinementState(ScoreTable(entries), s0)


def test_extract_lexicon():
    state = _state({"talo": 0.25, "ssa": 0.3333, "talossa": 0.0902})
    lex = extract_lexicon(state, OtsuResult(0.2, 256, 0.0))
    assert lex.morphemes == ("ssa", "talo") and lex.threshold_used == 0.2
    assert len(extract_lexicon(state, OtsuResult(0.01, 256, 0.0))) == 3


def test_extract_lexicon_empty_warns(caplog):
    state = _state({"talo": 0.25})
    assert len(extract_lexicon(state, OtsuResult(0.5, 256, 0.0))) == 0
    assert "empty" in caplog.text


@pytest.mark.parametrize("initial,final,percent,factor", [
    (499647, 3850, 99.23, 129.8), (281256, 5705, 97.97, 49.3), (103317, 3189, 96.91, 32.4)])
def test_reduction_stats_table(initial, final, percent, factor):
    p, f = reduction_stats(initial, final)
    assert round(p, 2) == percent and round(f, 1) == factor


def test_reduction_stats_identity_and_zero():
    assert reduction_stats(10, 10) == (0.0, 1.0)
    with pytest.raises(ZeroDivisionError):
        reduction_stats(10, 0)


# -- pipeline ----------------------------------------------------------------

def test_pipeline_separates_planted_atoms(latin_cfg):
    atoms = ["talo", "ssa", "ni", "kissa", "lla", "koira", "sta"]
    stems, affixes = atoms[:3] + ["kissa", "koira"], ["ssa", "ni", "lla", "sta"]
    composites = {s + a for s in ["talo", "kissa", "koira"] for a in affixes}
    composites |= {s + a + b for s in ["talo", "koira"] for a in affixes for b in affixes if a != b}
    raw = cands(*atoms, *sorted(composites))
    result = run_pipeline(raw, latin_cfg)
    assert set(result.lexicon.morphemes) == set(atoms)
    assert result.pool_sizes["raw"] == len(raw)
    report = result.report()
    assert report["stop_reason"] == "converged"
    assert report["pool_sizes_per_stage"]["lexicon"] == len(atoms)


def test_pipeline_empty_pool(latin_cfg):
    with pytest.raises(EmptyDataError):
        run_pipeline(cands("Budapest", "NATO"), latin_cfg)

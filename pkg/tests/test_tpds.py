import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from tracepush.systems import BUNDLED, bundled, classical_pds, load_bundle, random_tpds, seeded_random_tpds
from tracepush.tpds import (
    Config,
    Tpds,
    TpdsError,
    config,
    config_graph,
    configs_upto,
    homogeneous_class,
    is_pop_only,
    is_saturated,
    phase_bound,
    phase_search,
    reach_oracle,
    saturate,
    split_homogeneous,
    step,
    tpds_from_json,
    validate,
)
from tracepush.trace_core import OracleLimitError, class_members, full_dependence, lnf, twin_index


def grid_predicate(max_stack):
    out = {Config(0, ("c",))}
    for i in range(max_stack):
        for j in range(i + 1):
            if 1 + i + j <= max_stack:
                out.add(Config(0, ("c",) + ("a",) * i + ("b",) * j))
    return out


def test_bundled_systems_valid():
    for name in BUNDLED:
        alpha, system = bundled(name)
        assert validate(system).ok, name
    with pytest.raises(KeyError):
        bundled("nope")


def test_p1_violation(grid_alpha):
    s = Tpds(grid_alpha, 2, [(0, "a", ("b",), 1)])
    report = validate(s)
    assert not report.ok
    assert report.p1 == [(0, "a", ("b",), 1)]
    assert report.records() == [{"property": "P1", "transition": [0, "a", "b", 1]}]


def test_p2_violation(grid_alpha):
    s = Tpds(grid_alpha, 3, [(0, "a", (), 1), (1, "b", (), 2)])
    report = validate(s)
    assert report.p2 == [((0, "a", (), 1), (1, "b", (), 2))]
    fixed = s.with_transitions(s.transitions | {(0, "b", (), 1), (1, "a", (), 2)})
    assert validate(fixed).ok


def test_transition_words_normalized(grid_alpha):
    s = Tpds(grid_alpha, 1, [(0, "c", ("c", "b", "a"), 0), (0, "c", ("c", "a", "b"), 0)])
    assert s.transitions == {(0, "c", ("c", "a", "b"), 0)}
    assert s.size() == 1 + 3 + 4 * 1


def test_invalid_transitions(grid_alpha):
    with pytest.raises(TpdsError):
        Tpds(grid_alpha, 1, [(0, "a", (), 1)])
    with pytest.raises(TpdsError):
        tpds_from_json(grid_alpha, {"states": 1})


def test_json_roundtrip(twophases):
    alpha, system = twophases
    doc = json.loads(json.dumps(system.to_json()))
    assert tpds_from_json(alpha, doc) == system
    assert load_bundle({"alphabet": alpha.to_json(), "system": doc})[1] == system


def test_step_grid(grid):
    alpha, system = grid
    assert step(system, config(alpha, 0, "c")) == {config(alpha, 0, "ca"), config(alpha, 0, "cab")}
    assert step(system, Config(0, ())) == set()


def test_step_twophases(twophases):
    alpha, system = twophases
    got = step(system, config(alpha, 1, "bbbcccc"))
    assert got == {config(alpha, 1, "bbcccc"), config(alpha, 2, "bbcccc")}


def test_step_invariant_under_class_members(grid, twophases):
    for alpha, system in (grid, twophases):
        for c in sorted(reach_oracle(system, config(alpha, 0, alpha.letters[0] if system is twophases[1] else "c"), 5))[:20]:
            for m in class_members(alpha, c.stack):
                assert step(system, Config(c.state, m)) == step(system, c)


def test_grid_oracle(grid):
    alpha, system = grid
    found = reach_oracle(system, config(alpha, 0, "c"), 9)
    assert config(alpha, 0, "caaaabb") in found
    assert found == grid_predicate(9)
    assert reach_oracle(system, config(alpha, 0, "c"), 9, max_steps=0) == {config(alpha, 0, "c")}


def test_oracle_cap(grid):
    alpha, system = grid
    with pytest.raises(OracleLimitError):
        reach_oracle(system, config(alpha, 0, "c"), 9, cap=10)


def test_twophases_oracle(twophases):
    # the only run peaks at (2,[bdededec^4]), eleven letters
    alpha, system = twophases
    target = config(alpha, 3, "eeeecccc")
    assert target not in reach_oracle(system, config(alpha, 0, "a"), 10)
    assert target in reach_oracle(system, config(alpha, 0, "a"), 11)


def test_config_graph(grid):
    alpha, system = grid
    nodes, edges = config_graph(system, config(alpha, 0, "c"), 3)
    assert nodes == grid_predicate(3)
    assert (config(alpha, 0, "c"), config(alpha, 0, "ca")) in edges
    assert len(configs_upto(system, 2)) == 1 + 3 + 8


def test_split_homogeneous(grid, twophases):
    alpha, system = grid
    pops, parts = split_homogeneous(system)
    assert not pops.transitions
    assert parts[frozenset("c")].transitions == system.transitions
    assert homogeneous_class(parts[frozenset("c")]) == frozenset("c")

    alpha, system = twophases
    pops, parts = split_homogeneous(system)
    assert pops.transitions == {(1, "b", (), 1), (1, "b", (), 2), (3, "d", (), 3)}
    assert is_pop_only(pops)
    assert parts[frozenset("a")].transitions == {(0, "a", lnf(alpha, "abc"), 0), (0, "a", ("c",), 1)}
    assert parts[frozenset("b")].transitions == {(2, "b", lnf(alpha, "bde"), 2), (2, "b", ("e",), 3)}
    union = pops.transitions.union(*(p.transitions for p in parts.values()))
    assert union == system.transitions
    assert sum(len(p.transitions) for p in parts.values()) + len(pops.transitions) == len(system.transitions)


def test_pop_only_split():
    alpha, system = classical_pds("ab", 2, [(0, "a", (), 1), (1, "b", (), 0)])
    pops, parts = split_homogeneous(system)
    assert pops.transitions == system.transitions
    assert all(not p.transitions for p in parts.values())
    assert homogeneous_class(parts[frozenset("ab")]) is None


def test_is_saturated(twophases, shortcuts, grid_alpha):
    assert is_saturated(twophases[1]) == (True, None)
    ok, witness = is_saturated(shortcuts[1])
    assert not ok
    assert witness == ((0, "a", ("a", "b"), 1), (1, "a", (), 2), (0, "a", ("b",), 2))
    assert is_saturated(Tpds(grid_alpha, 1, []))[0]


def test_saturate_shortcuts(shortcuts):
    alpha, system = shortcuts
    assert alpha == full_dependence("abc")
    res = saturate(system)
    assert res.rounds == [{(1, "a", ("b",), 2), (0, "a", ("b",), 2)}, {(0, "a", (), 2)}, set()]
    assert len(res.added) == 3
    assert validate(res.system).ok
    assert is_saturated(res.system)[0]


def test_saturate_is_idempotent(twophases):
    res = saturate(twophases[1])
    assert res.system == twophases[1]
    assert res.rounds == [set()]


def _oracle_agreement(system, sat, max_stack, slack=2):
    # shortcuts skip push-then-pop detours, so the original system may need
    # a slightly taller stack to reach what the saturated one reaches
    for c in configs_upto(system, 2):
        small = reach_oracle(system, c, max_stack)
        saturated = reach_oracle(sat, c, max_stack)
        assert small <= saturated
        wide = {d for d in reach_oracle(system, c, max_stack + slack) if len(d.stack) <= max_stack}
        assert saturated == wide


def test_saturation_preserves_reachability(shortcuts):
    alpha, system = shortcuts
    _oracle_agreement(system, saturate(system).system, 6)


def test_saturation_random_systems():
    for seed in range(8):
        system = seeded_random_tpds(seed, max_states=3)
        sat = saturate(system).system
        assert validate(sat).ok
        longest = max((len(w) for _, _, w, _ in system.transitions), default=0)
        assert all(len(w) <= longest for _, _, w, _ in sat.transitions)
        _oracle_agreement(system, sat, 5)


def test_phase_search_twophases(twophases):
    alpha, system = twophases
    assert twin_index(alpha) == 5 and phase_bound(alpha) == 11
    run = phase_search(system, config(alpha, 0, "a"), config(alpha, 3, "eeeecccc"), 11, phase_bound(alpha))
    assert run is not None
    assert len(run.segments) == 4
    assert [k == "" for k in run.segments] == [False, True, False, True]
    assert run.configs[0] == config(alpha, 0, "a") and run.configs[-1] == config(alpha, 3, "eeeecccc")
    for c, d in zip(run.configs, run.configs[1:]):
        assert d in step(system, c)


def test_phase_search_unreachable(grid):
    alpha, system = grid
    assert phase_search(system, config(alpha, 0, "c"), config(alpha, 0, "cb"), 6) is None
    run = phase_search(system, config(alpha, 0, "c"), config(alpha, 0, "c"), 6)
    assert run.segments == []


def test_phase_bound_on_random_systems():
    rng = random.Random(13)
    for _ in range(4):
        system = saturate(random_tpds(rng, max_states=3)).system
        alpha = system.alphabet
        for c in configs_upto(system, 2)[:15]:
            for d in reach_oracle(system, c, 5):
                run = phase_search(system, c, d, 5, phase_bound(alpha))
                assert run is not None and len(run.segments) <= phase_bound(alpha)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_random_systems_valid(seed):
    system = seeded_random_tpds(seed)
    assert validate(system).ok
    assert system.n <= 4 and len(system.alphabet) <= 3
    assert all(len(w) <= 2 for _, _, w, _ in system.transitions)

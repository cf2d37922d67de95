import random

import pytest

from tracepush.automata import accepts_trace, empty_nfa, epsilon_nfa, is_closed, star_nfa, traces_upto, universal_nfa, word_nfa, words_nfa
from tracepush.lc_construct import (
    NotClosedError,
    first_dependent_pair,
    lift_pop,
    lift_push,
    nivat_split,
    preserve_left,
    preserve_right,
    product_rel,
    transform_rational,
)
from tracepush.trace_core import AlphabetError, DependenceAlphabet, all_traces, all_words, class_members, lnf, no_dependence
from tracepush.transducer import (
    CertificateError,
    GUARANTEED,
    NO_CERTIFICATE,
    compose,
    identity,
    invert,
    is_left_closed_bruteforce,
    pairs_upto,
    relabel,
    superword,
    trace_pair_member,
)


def trace_id_pairs(alpha, t, maxlen):
    for u in all_traces(alpha, maxlen):
        for v in all_traces(alpha, maxlen):
            assert trace_pair_member(t, u, v) == (u == v)


def closed_class_nfa(alpha, words):
    """A closed automaton for the union of the classes of the given words."""
    members = set()
    for w in words:
        members |= class_members(alpha, tuple(w))
    return words_nfa(alpha, ["".join(m) for m in members])


def product_member_oracle(alpha, k, l, t, u, v):
    """([u],[v]) in ([L(k)] x [L(l)]) . [R(t)] by splitting class members."""
    for u2 in class_members(alpha, tuple(u)):
        for i in range(len(u2) + 1):
            if not accepts_trace(k, u2[:i]):
                continue
            for v2 in class_members(alpha, tuple(v)):
                for j in range(len(v2) + 1):
                    if accepts_trace(l, v2[:j]) and trace_pair_member(t, u2[i:], v2[j:]):
                        return True
    return False


def test_lift_pop_epsilon_is_identity(grid_alpha):
    trace_id_pairs(grid_alpha, lift_pop(epsilon_nfa(grid_alpha)), 3)


def test_lift_pop_examples(grid_alpha):
    t = lift_pop(word_nfa(grid_alpha, "c"))
    assert t.certificate == GUARANTEED
    assert trace_pair_member(t, "cab", "ab")
    assert not trace_pair_member(t, "abc", "ab")


def test_lift_pop_independent_letter(grid_alpha):
    t = lift_pop(word_nfa(grid_alpha, "a"))
    # [ba] = [a][b] since a || b
    assert trace_pair_member(t, "ba", "b")
    assert not trace_pair_member(t, "ca", "c")


def test_lift_pop_rejects_unclosed(indep2):
    with pytest.raises(NotClosedError):
        lift_pop(star_nfa(indep2, "ab"))


def test_lift_push_examples(grid_alpha):
    trace_id_pairs(grid_alpha, lift_push(epsilon_nfa(grid_alpha)), 3)
    t = lift_push(word_nfa(grid_alpha, "ca"))
    assert trace_pair_member(t, "b", "cab")
    assert trace_pair_member(t, "b", "cba")
    assert not trace_pair_member(t, "b", "acb")


@pytest.mark.parametrize("name", ["grid", "chain", "indep"])
def test_lift_constructions_left_closed(name, grid_alpha, chain_alpha):
    alpha = {"grid": grid_alpha, "chain": chain_alpha, "indep": no_dependence("ab")}[name]
    a = alpha.letters[0]
    nfa = closed_class_nfa(alpha, [a, alpha.letters[-1] + a])
    assert is_left_closed_bruteforce(lift_pop(nfa), 4, stretch=0)
    assert is_left_closed_bruteforce(lift_push(nfa), 3)


def test_product_rel_trivial(grid_alpha):
    eps = epsilon_nfa(grid_alpha)
    trace_id_pairs(grid_alpha, product_rel(eps, eps, identity(grid_alpha)), 3)


def test_product_rel_requires_certificate(grid_alpha):
    bare = identity(grid_alpha).with_certificate(NO_CERTIFICATE)
    with pytest.raises(CertificateError):
        product_rel(epsilon_nfa(grid_alpha), epsilon_nfa(grid_alpha), bare)


def test_product_rel_write_block(grid_alpha):
    # ({[c]} x [ca + cab]) . Id, one push step of the grid system
    k = word_nfa(grid_alpha, "c")
    l = closed_class_nfa(grid_alpha, ["ca", "cab"])
    t = product_rel(k, l, identity(grid_alpha))
    assert trace_pair_member(t, "c", "ca")
    assert trace_pair_member(t, "cab", "caab")
    assert not trace_pair_member(t, "c", "cb")


def test_product_rel_matches_enumeration(chain_alpha):
    k = closed_class_nfa(chain_alpha, ["a", "b"])
    l = closed_class_nfa(chain_alpha, ["c", "ac"])
    for inner in (identity(chain_alpha), superword(chain_alpha).with_certificate(GUARANTEED)):
        t = product_rel(k, l, inner)
        for u in all_traces(chain_alpha, 3):
            for v in all_traces(chain_alpha, 3):
                assert trace_pair_member(t, u, v) == product_member_oracle(chain_alpha, k, l, inner, u, v)


def test_product_rel_left_closed(chain_alpha):
    k = closed_class_nfa(chain_alpha, ["a"])
    l = closed_class_nfa(chain_alpha, ["c"])
    assert is_left_closed_bruteforce(product_rel(k, l, identity(chain_alpha)), 3)


def test_preserve_left(grid_alpha):
    star = closed_class_nfa(grid_alpha, ["ab", "c"])
    res = preserve_left(identity(grid_alpha), star)
    assert traces_upto(res, 3) == traces_upto(star, 3)
    pop_c = lift_pop(word_nfa(grid_alpha, "c"))
    res = preserve_left(pop_c, universal_nfa(grid_alpha))
    assert is_closed(res)
    for u in all_traces(grid_alpha, 4):
        admits = any(m[:1] == ("c",) for m in class_members(grid_alpha, u))
        assert accepts_trace(res, u) == admits


def test_preserve_left_requires_closed_target(indep2):
    with pytest.raises(NotClosedError):
        preserve_left(identity(indep2), star_nfa(indep2, "ab"))


def test_preserve_right(grid_alpha):
    l = star_nfa(grid_alpha, "ab")
    assert traces_upto(preserve_right(identity(grid_alpha), l), 4) == traces_upto(l, 4)
    res = preserve_right(lift_push(word_nfa(grid_alpha, "ca")), word_nfa(grid_alpha, "b"))
    assert traces_upto(res, 5) == {lnf(grid_alpha, "cab")}


def test_preservation_against_enumeration():
    rng = random.Random(21)
    for _ in range(6):
        alpha = DependenceAlphabet("abc", [("a", "b"), ("b", "c")] if rng.random() < 0.5 else [("a", "c")])
        k = closed_class_nfa(alpha, [rng.choice(["a", "b", "c", "ab"]), rng.choice(["bc", "ca", ""])])
        t = lift_pop(closed_class_nfa(alpha, [rng.choice("abc")]))
        pre = preserve_left(t, k)
        assert is_closed(pre)
        post = preserve_right(t, k)
        for u in all_traces(alpha, 3):
            expected_pre = any(trace_pair_member(t, u, v) for v in traces_upto(k, 4))
            assert accepts_trace(pre, u) == expected_pre
            expected_post = any(trace_pair_member(t, x, u) for x in traces_upto(k, 4))
            assert accepts_trace(post, u) == expected_post


def test_first_dependent_pair(grid_alpha):
    assert first_dependent_pair(grid_alpha) == ("a", "c")
    assert first_dependent_pair(no_dependence("ab")) is None


def test_nivat_split_identity(dep2):
    t1, t2 = nivat_split(identity(dep2))
    recomposed = compose([invert(t1), t2])
    assert pairs_upto(recomposed, 3) == {(w, w) for w in all_words("ab", 3)}


def test_nivat_split_superword(dep2):
    sup = superword(dep2)
    t1, t2 = nivat_split(sup)
    recomposed = compose([invert(t1), t2])
    assert pairs_upto(recomposed, 3) == pairs_upto(sup, 3)
    assert is_left_closed_bruteforce(t1, 3)
    assert is_left_closed_bruteforce(t2, 3)


def test_nivat_split_needs_dependent_pair():
    with pytest.raises(AlphabetError):
        nivat_split(identity(no_dependence("ab")))


def test_transform_rational(grid_alpha):
    l = closed_class_nfa(grid_alpha, ["ab", "c"])
    assert traces_upto(transform_rational(l, identity(grid_alpha)), 4) == traces_upto(l, 4)
    assert not traces_upto(transform_rational(empty_nfa(grid_alpha), identity(grid_alpha)), 4)


def test_transform_rational_matches_enumeration(chain_alpha):
    l = closed_class_nfa(chain_alpha, ["ab", "c"])
    t = relabel(chain_alpha, {"a": "b", "b": "c", "c": "a"})
    res = transform_rational(l, t)
    sources = traces_upto(l, 4)
    for v in all_traces(chain_alpha, 3):
        assert accepts_trace(res, v) == any(trace_pair_member(t, u, v) for u in sources)


def test_transform_rational_counting():
    alpha = DependenceAlphabet("abcd", [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")])
    res = transform_rational(star_nfa(alpha, "ab"), relabel(alpha, {"a": "c", "b": "d"}))
    expected = {lnf(alpha, w) for w in all_words("cd", 8) if w.count("c") == w.count("d")}
    assert traces_upto(res, 8) == expected

"""Finite automata over a dependence alphabet.

An :class:`Nfa` keeps its transitions as ``(p, label, q)`` triples where the
label is a letter or ``""`` for an epsilon move.  States are the integers
``0 .. n-1``; constructions renumber densely in breadth-first discovery
order so that output is reproducible.
"""

from __future__ import annotations

import json
from collections import deque

from .trace_core import (
    DEFAULT_CLASS_LIMIT,
    OracleLimitError,
    first_letter_strip,
    lnf,
    minimal_letters,
)

EPS = ""


class AutomatonError(ValueError):
    pass


class Nfa:
    """Nondeterministic finite automaton, possibly with epsilon moves."""

    __slots__ = ("alphabet", "n", "initial", "final", "transitions", "deterministic", "_out", "_inn")

    def __init__(self, alphabet, n, initial, final, transitions, deterministic=False):
        self.alphabet = alphabet
        self.n = n
        self.initial = frozenset(initial)
        self.final = frozenset(final)
        self.transitions = frozenset(transitions)
        self.deterministic = deterministic
        self._out = None
        self._inn = None
        for s in self.initial | self.final:
            if not 0 <= s < n:
                raise AutomatonError(f"state {s} out of range 0..{n - 1}")
        for p, a, q in self.transitions:
            if not (0 <= p < n and 0 <= q < n):
                raise AutomatonError(f"transition {(p, a, q)} has an invalid endpoint")
            if a != EPS and a not in alphabet:
                raise AutomatonError(f"transition label {a!r} not in alphabet")

    def __repr__(self):
        return (
            f"Nfa(states={self.n}, initial={sorted(self.initial)}, final={sorted(self.final)}, "
            f"transitions={len(self.transitions)})"
        )

    @property
    def out(self):
        if self._out is None:
            out = [[] for _ in range(self.n)]
            for p, a, q in sorted(self.transitions, key=_tkey):
                out[p].append((a, q))
            self._out = out
        return self._out

    @property
    def inn(self):
        if self._inn is None:
            inn = [[] for _ in range(self.n)]
            for p, a, q in sorted(self.transitions, key=_tkey):
                inn[q].append((a, p))
            self._inn = inn
        return self._inn

    @property
    def epsilon_free(self):
        return all(a != EPS for _, a, _ in self.transitions)

    def accepts(self, word):
        return accepts(self, word)

    def __eq__(self, other):
        if not isinstance(other, Nfa):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and self.n == other.n
            and self.initial == other.initial
            and self.final == other.final
            and self.transitions == other.transitions
        )

    def __hash__(self):
        return hash((self.n, self.initial, self.final, self.transitions))


def _tkey(t):
    p, a, q = t
    return (p, a, q)


def build(alphabet, initial_keys, successors, is_final, deterministic=False):
    """Explore states reachable from ``initial_keys`` and renumber them densely.

    ``successors(key)`` yields ``(label, key)`` pairs in a deterministic order.
    """
    ids = {}
    order = []
    queue = deque()
    for k in initial_keys:
        if k not in ids:
            ids[k] = len(order)
            order.append(k)
            queue.append(k)
    trans = set()
    while queue:
        k = queue.popleft()
        p = ids[k]
        for a, k2 in successors(k):
            if k2 not in ids:
                ids[k2] = len(order)
                order.append(k2)
                queue.append(k2)
            trans.add((p, a, ids[k2]))
    init = {ids[k] for k in initial_keys}
    fin = {ids[k] for k in order if is_final(k)}
    return Nfa(alphabet, len(order), init, fin, trans, deterministic=deterministic)


# -- simple automata ----------------------------------------------------------


def empty_nfa(alphabet):
    return Nfa(alphabet, 1, {0}, (), ())


def epsilon_nfa(alphabet):
    """Automaton accepting exactly the empty word."""
    return Nfa(alphabet, 1, {0}, {0}, ())


def universal_nfa(alphabet):
    return Nfa(alphabet, 1, {0}, {0}, {(0, a, 0) for a in alphabet.letters})


def word_nfa(alphabet, word):
    word = alphabet.check_word(word)
    n = len(word) + 1
    return Nfa(alphabet, n, {0}, {n - 1}, {(i, a, i + 1) for i, a in enumerate(word)})


def words_nfa(alphabet, words):
    """Trie automaton for a finite language."""
    words = [alphabet.check_word(w) for w in words]
    nodes = {(): 0}
    trans = set()
    for w in sorted(words, key=lambda x: (len(x), alphabet.sort_key(x))):
        for i in range(len(w)):
            if w[: i + 1] not in nodes:
                nodes[w[: i + 1]] = len(nodes)
                trans.add((nodes[w[:i]], w[i], nodes[w[: i + 1]]))
    return Nfa(alphabet, len(nodes), {0}, {nodes[w] for w in words}, trans)


def star_nfa(alphabet, word):
    """Automaton for word* (a simple cycle through the initial state)."""
    word = alphabet.check_word(word)
    if not word:
        return epsilon_nfa(alphabet)
    n = len(word)
    trans = {(i, a, (i + 1) % n) for i, a in enumerate(word)}
    return Nfa(alphabet, n, {0}, {0}, trans)


# -- epsilon handling and basic queries -------------------------------------


def epsilon_closure(nfa, states):
    seen = set(states)
    stack = list(states)
    out = nfa.out
    while stack:
        p = stack.pop()
        for a, q in out[p]:
            if a == EPS and q not in seen:
                seen.add(q)
                stack.append(q)
    return frozenset(seen)


def remove_epsilon(nfa):
    """Equivalent epsilon-free automaton (trimmed); returned unchanged if already epsilon-free."""
    if nfa.epsilon_free:
        return nfa
    closures = [epsilon_closure(nfa, [p]) for p in range(nfa.n)]
    trans = set()
    final = set()
    for p in range(nfa.n):
        for r in closures[p]:
            if r in nfa.final:
                final.add(p)
            for a, q in nfa.out[r]:
                if a != EPS:
                    trans.add((p, a, q))
    return trim(Nfa(nfa.alphabet, nfa.n, nfa.initial, final, trans))


def accepts(nfa, word):
    current = epsilon_closure(nfa, nfa.initial)
    for a in word:
        nxt = {q for p in current for b, q in nfa.out[p] if b == a}
        if not nxt:
            return False
        current = epsilon_closure(nfa, nxt)
    return bool(current & nfa.final)


def accessible(nfa):
    seen = set(nfa.initial)
    stack = list(nfa.initial)
    while stack:
        p = stack.pop()
        for _, q in nfa.out[p]:
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def coaccessible(nfa):
    seen = set(nfa.final)
    stack = list(nfa.final)
    while stack:
        q = stack.pop()
        for _, p in nfa.inn[q]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


def is_empty(nfa):
    return not (accessible(nfa) & nfa.final)


def trim(nfa):
    """Restrict to useful states (accessible and co-accessible), renumbered densely."""
    useful = accessible(nfa) & coaccessible(nfa)
    if not useful:
        return empty_nfa(nfa.alphabet)
    init = sorted(nfa.initial & useful)

    def succ(p):
        return [(a, q) for a, q in nfa.out[p] if q in useful]

    return build(nfa.alphabet, init, succ, lambda p: p in nfa.final)


def _same_alphabet(a, b):
    if a.alphabet != b.alphabet:
        raise AutomatonError("automata are over different alphabets")


def intersect(a, b):
    _same_alphabet(a, b)
    a, b = remove_epsilon(a), remove_epsilon(b)

    def succ(k):
        p, q = k
        bq = {}
        for x, q2 in b.out[q]:
            bq.setdefault(x, []).append(q2)
        return [(x, (p2, q2)) for x, p2 in a.out[p] for q2 in bq.get(x, ())]

    init = sorted((p, q) for p in a.initial for q in b.initial)
    return trim(build(a.alphabet, init, succ, lambda k: k[0] in a.final and k[1] in b.final))


def union(a, b):
    """Disjoint union; initial and final sets are merged."""
    _same_alphabet(a, b)
    off = a.n
    trans = set(a.transitions) | {(p + off, x, q + off) for p, x, q in b.transitions}
    return Nfa(
        a.alphabet,
        a.n + b.n,
        a.initial | {s + off for s in b.initial},
        a.final | {s + off for s in b.final},
        trans,
    )


def union_all(alphabet, nfas):
    result = empty_nfa(alphabet)
    for x in nfas:
        result = union(result, x)
    return trim(result)


def reverse(nfa):
    return Nfa(nfa.alphabet, nfa.n, nfa.final, nfa.initial, {(q, a, p) for p, a, q in nfa.transitions})


# -- deterministic automata -------------------------------------------------------


def determinize(nfa):
    """Subset construction; the result is complete (an explicit sink if needed)."""
    letters = nfa.alphabet.letters
    start = epsilon_closure(nfa, nfa.initial)

    def succ(s):
        res = []
        for a in letters:
            nxt = {q for p in s for b, q in nfa.out[p] if b == a}
            res.append((a, epsilon_closure(nfa, nxt) if nxt else frozenset()))
        return res

    return build(nfa.alphabet, [start], succ, lambda s: bool(s & nfa.final), deterministic=True)


def minimize(dfa):
    """Minimal complete DFA (Moore partition refinement on the accessible part)."""
    if not dfa.deterministic:
        dfa = determinize(dfa)
    letters = dfa.alphabet.letters
    reach = sorted(accessible(dfa))
    delta = {}
    for p in reach:
        for a, q in dfa.out[p]:
            delta[p, a] = q
    block = {p: (1 if p in dfa.final else 0) for p in reach}
    nblocks = len(set(block.values()))
    while True:
        sig = {p: (block[p],) + tuple(block[delta[p, a]] for a in letters) for p in reach}
        ids = {}
        new_block = {}
        for p in reach:
            new_block[p] = ids.setdefault(sig[p], len(ids))
        if len(ids) == nblocks:
            block = new_block
            break
        block, nblocks = new_block, len(ids)
    (start,) = dfa.initial

    def succ(b):
        rep = rep_of[b]
        return [(a, block[delta[rep, a]]) for a in letters]

    rep_of = {}
    for p in reach:
        rep_of.setdefault(block[p], p)
    return build(dfa.alphabet, [block[start]], succ, lambda b: rep_of[b] in dfa.final, deterministic=True)


def minimal_dfa(nfa):
    return minimize(determinize(nfa))


def dfa_delta(dfa):
    return {(p, a): q for p, a, q in dfa.transitions}


def complement(nfa):
    d = minimal_dfa(nfa)
    return Nfa(d.alphabet, d.n, d.initial, set(range(d.n)) - d.final, d.transitions, deterministic=True)


def language_witness(a, b):
    """A shortest word in the symmetric difference of L(a) and L(b), or None."""
    _same_alphabet(a, b)
    da, db = minimal_dfa(a), minimal_dfa(b)
    ta, tb = dfa_delta(da), dfa_delta(db)
    (ia,), (ib,) = da.initial, db.initial
    seen = {(ia, ib): ()}
    queue = deque([(ia, ib)])
    while queue:
        p, q = queue.popleft()
        w = seen[p, q]
        if (p in da.final) != (q in db.final):
            return w
        for x in a.alphabet.letters:
            k = (ta[p, x], tb[q, x])
            if k not in seen:
                seen[k] = w + (x,)
                queue.append(k)
    return None


def languages_equal(a, b):
    return language_witness(a, b) is None


def is_subset(a, b):
    return is_empty(intersect(a, complement(b)))


# -- closure under commutation -------------------------------------------------


def is_closed(nfa):
    """True iff L(nfa) is closed under trace equivalence.

    In the minimal complete DFA states are languages, so L is closed iff
    delta(q, ab) == delta(q, ba) for every state q and independent pair (a, b).
    """
    d = minimal_dfa(nfa)
    delta = dfa_delta(d)
    alpha = nfa.alphabet
    pairs = [
        (a, b)
        for i, a in enumerate(alpha.letters)
        for b in alpha.letters[i + 1:]
        if alpha.independent(a, b)
    ]
    for q in range(d.n):
        for a, b in pairs:
            if delta[delta[q, a], b] != delta[delta[q, b], a]:
                return False
    return True


def closure_violation(nfa):
    """A pair (u, v) with u ~ v, v accepted and u rejected, or None.

    Found by searching the minimal DFA for a state q with delta(q,ab) != delta(q,ba)
    and a suffix telling the two targets apart.
    """
    d = minimal_dfa(nfa)
    delta = dfa_delta(d)
    alpha = nfa.alphabet
    (start,) = d.initial
    prefix = {start: ()}
    queue = deque([start])
    while queue:
        q = queue.popleft()
        for a in alpha.letters:
            r = delta[q, a]
            if r not in prefix:
                prefix[r] = prefix[q] + (a,)
                queue.append(r)
    for q in sorted(prefix, key=lambda s: (len(prefix[s]), prefix[s])):
        for i, a in enumerate(alpha.letters):
            for b in alpha.letters[i + 1:]:
                if not alpha.independent(a, b):
                    continue
                r1, r2 = delta[delta[q, a], b], delta[delta[q, b], a]
                if r1 == r2:
                    continue
                sub1 = Nfa(d.alphabet, d.n, {r1}, d.final, d.transitions, deterministic=True)
                sub2 = Nfa(d.alphabet, d.n, {r2}, d.final, d.transitions, deterministic=True)
                s = language_witness(sub1, sub2)
                u, v = prefix[q] + (a, b) + s, prefix[q] + (b, a) + s
                return (u, v) if accepts(nfa, v) else (v, u)
    return None


def check_diamond_nfa(nfa):
    """Structural diamond test: (p,a,q),(q,b,r) with a || b needs some (p,b,q'),(q',a,r).

    Sufficient but not necessary for closure; the automaton must be epsilon-free.
    """
    if not nfa.epsilon_free:
        raise AutomatonError("diamond check needs an epsilon-free automaton")
    alpha = nfa.alphabet
    out = nfa.out
    edges = set(nfa.transitions)
    for p in range(nfa.n):
        for a, q in out[p]:
            for b, r in out[q]:
                if not alpha.independent(a, b):
                    continue
                if not any(x == b and (q2, a, r) in edges for x, q2 in out[p]):
                    return False
    return True


# -- trace-level helpers -----------------------------------------------------------


def class_automaton(alphabet, u, limit=None):
    """Automaton accepting exactly the words equivalent to u.

    States are the suffix traces still to be emitted (normal forms), i.e. the
    downsets of u's dependence graph that have been read so far.
    """
    u = lnf(alphabet, alphabet.check_word(u))
    if limit is not None and len(u) > limit:
        raise OracleLimitError(f"word of length {len(u)} exceeds class limit {limit}")

    def succ(rest):
        res = []
        for a in sorted(minimal_letters(alphabet, rest), key=alphabet.index.__getitem__):
            res.append((a, lnf(alphabet, first_letter_strip(alphabet, rest, a))))
        return res

    return build(alphabet, [u], succ, lambda rest: not rest)


def accepts_trace(nfa, u):
    """Does L(nfa) contain some word equivalent to u?"""
    return not is_empty(intersect(nfa, class_automaton(nfa.alphabet, u)))


def words_upto(nfa, maxlen):
    """Accepted words of length <= maxlen, in length-lexicographic letter order."""
    letters = nfa.alphabet.letters
    out = []
    start = epsilon_closure(nfa, nfa.initial)
    layer = [((), start)]
    memo = {}
    for length in range(maxlen + 1):
        nxt_layer = []
        for w, s in layer:
            if s & nfa.final:
                out.append(w)
            if length == maxlen:
                continue
            for a in letters:
                key = (s, a)
                t = memo.get(key)
                if t is None:
                    nxt = {q for p in s for b, q in nfa.out[p] if b == a}
                    t = epsilon_closure(nfa, nxt) if nxt else frozenset()
                    memo[key] = t
                if t:
                    nxt_layer.append((w + (a,), t))
        layer = nxt_layer
    return out


def traces_upto(nfa, maxlen):
    """Normal forms of the traces [w] for accepted words w with |w| <= maxlen."""
    alpha = nfa.alphabet
    return {lnf(alpha, w) for w in words_upto(nfa, maxlen)}


# -- serialization --------------------------------------------------------------


def nfa_to_json(nfa):
    trans = sorted(nfa.transitions, key=_tkey)
    return {
        "states": nfa.n,
        "initial": sorted(nfa.initial),
        "final": sorted(nfa.final),
        "transitions": [[p, a, q] for p, a, q in trans],
    }


def nfa_from_json(alphabet, doc):
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        return Nfa(
            alphabet,
            int(doc["states"]),
            doc["initial"],
            doc["final"],
            [(int(p), a, int(q)) for p, a, q in doc["transitions"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise AutomatonError(f"malformed NFA document: {exc}") from exc


__all__ = [
    "EPS",
    "AutomatonError",
    "Nfa",
    "OracleLimitError",
    "DEFAULT_CLASS_LIMIT",
    "accepts",
    "accepts_trace",
    "check_diamond_nfa",
    "class_automaton",
    "closure_violation",
    "complement",
    "determinize",
    "empty_nfa",
    "epsilon_nfa",
    "intersect",
    "is_closed",
    "is_empty",
    "is_subset",
    "language_witness",
    "languages_equal",
    "minimal_dfa",
    "minimize",
    "nfa_from_json",
    "nfa_to_json",
    "remove_epsilon",
    "star_nfa",
    "traces_upto",
    "trim",
    "union",
    "union_all",
    "universal_nfa",
    "word_nfa",
    "words_nfa",
    "words_upto",
]

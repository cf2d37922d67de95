"""Trace-pushdown systems: representation, validation, semantics and saturation.

A transition (p, a, w, q) removes a first letter a of the stack trace and
puts w in front of the remainder.  Written words are stored in
lexicographic normal form, so two transitions writing equivalent words
coincide.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

from .trace_core import (
    AlphabetError,
    OracleLimitError,
    dependent_set,
    first_letter_strip,
    lnf,
    parse_word,
    twin_classes,
    twin_index,
    word_str,
)

DEFAULT_FRONTIER_CAP = 10**6


class TpdsError(ValueError):
    pass


class Config(NamedTuple):
    """A configuration: a control state and a stack trace held in normal form."""

    state: int
    stack: tuple

    def __str__(self):
        return f"({self.state},[{word_str(self.stack)}])"


def config(alphabet, state, word):
    return Config(state, lnf(alphabet, parse_word(alphabet, word)))


class Tpds:
    """Control states 0..n-1 and transitions (p, a, w, q) with w normalized."""

    __slots__ = ("alphabet", "n", "transitions", "_by_key")

    def __init__(self, alphabet, n, transitions):
        self.alphabet = alphabet
        self.n = n
        norm = set()
        for t in transitions:
            p, a, w, q = t
            if not (0 <= p < n and 0 <= q < n):
                raise TpdsError(f"transition {t} has an invalid state")
            if a not in alphabet:
                raise AlphabetError(f"unknown letter {a!r}")
            w = lnf(alphabet, alphabet.check_word(w))
            norm.add((p, a, w, q))
        self.transitions = frozenset(norm)
        self._by_key = None

    def __repr__(self):
        return f"Tpds(states={self.n}, transitions={len(self.transitions)})"

    def __eq__(self, other):
        if not isinstance(other, Tpds):
            return NotImplemented
        return (self.alphabet, self.n, self.transitions) == (other.alphabet, other.n, other.transitions)

    def __hash__(self):
        return hash((self.n, self.transitions))

    def sorted_transitions(self):
        key = self.alphabet.sort_key
        return sorted(self.transitions, key=lambda t: (t[0], key((t[1],)), len(t[2]), key(t[2]), t[3]))

    @property
    def by_key(self):
        """Transitions indexed by (source state, letter)."""
        if self._by_key is None:
            idx = {}
            for t in self.sorted_transitions():
                idx.setdefault((t[0], t[1]), []).append(t)
            self._by_key = idx
        return self._by_key

    def size(self):
        """|Q| + |A| + k |Delta| with k - 1 the longest written word."""
        k = 1 + max((len(w) for _, _, w, _ in self.transitions), default=0)
        return self.n + len(self.alphabet) + k * len(self.transitions)

    def with_transitions(self, transitions):
        return Tpds(self.alphabet, self.n, transitions)

    def to_json(self):
        return {
            "states": self.n,
            "transitions": [[p, a, _word_doc(w), q] for p, a, w, q in self.sorted_transitions()],
        }


def _word_doc(w):
    if all(len(a) == 1 for a in w):
        return "".join(w)
    return list(w)


def tpds_from_json(alphabet, doc):
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        trans = []
        for p, a, w, q in doc["transitions"]:
            trans.append((int(p), a, parse_word(alphabet, w) if w != "" else (), int(q)))
        return Tpds(alphabet, int(doc["states"]), trans)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, (TpdsError, AlphabetError)):
            raise
        raise TpdsError(f"malformed system document: {exc}") from exc


# -- validation ---------------------------------------------------------------------


@dataclass
class ValidationReport:
    p1: list = field(default_factory=list)
    p2: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.p1 and not self.p2

    def __bool__(self):
        return self.ok

    def records(self):
        """Violations as JSON-ready dicts."""
        out = [{"property": "P1", "transition": _tdoc(t)} for t in self.p1]
        out += [{"property": "P2", "first": _tdoc(s), "second": _tdoc(t)} for s, t in self.p2]
        return out


def _tdoc(t):
    p, a, w, q = t
    return [p, a, _word_doc(w), q]


def validate(system):
    """Check D(w) included in D(a) per transition and the diamond property.

    For (p,a,v,q),(q,b,w,r) with a and b independent there must be q' with
    (p,b,w,q') and (q',a,v,r).
    """
    alpha = system.alphabet
    report = ValidationReport()
    trans = system.sorted_transitions()
    for t in trans:
        _, a, w, _ = t
        if not dependent_set(alpha, w) <= alpha.D(a):
            report.p1.append(t)
    from_state = {}
    for t in trans:
        from_state.setdefault(t[0], []).append(t)
    tset = system.transitions
    for s in trans:
        p, a, v, q = s
        for t in from_state.get(q, ()):
            _, b, w, r = t
            if alpha.dependent(a, b):
                continue
            if not any((p, b, w, q2) in tset and (q2, a, v, r) in tset for q2 in range(system.n)):
                report.p2.append((s, t))
    return report


# -- semantics --------------------------------------------------------------------------


def step(system, c):
    """All one-step successors of configuration c."""
    alpha = system.alphabet
    state, stack = c
    out = set()
    seen_letters = set()
    for a in stack:
        if a in seen_letters:
            continue
        seen_letters.add(a)
        x = first_letter_strip(alpha, stack, a)
        if x is None:
            continue
        for _, _, w, q in system.by_key.get((state, a), ()):
            out.add(Config(q, lnf(alpha, w + x)))
    return out


def reach_oracle(system, c, max_stack, max_steps=None, cap=DEFAULT_FRONTIER_CAP):
    """Configurations reachable from c through runs whose stacks stay within max_stack."""
    c = Config(*c)
    seen = {c}
    frontier = [c]
    steps = 0
    while frontier and (max_steps is None or steps < max_steps):
        nxt = []
        for d in frontier:
            for e in step(system, d):
                if len(e.stack) <= max_stack and e not in seen:
                    seen.add(e)
                    nxt.append(e)
                    if len(seen) > cap:
                        raise OracleLimitError(f"oracle explored more than {cap} configurations")
        frontier = nxt
        steps += 1
    return seen


def config_graph(system, c, max_stack, cap=DEFAULT_FRONTIER_CAP):
    """Edges (d, e) of the bounded configuration graph reachable from c."""
    c = Config(*c)
    seen = {c}
    queue = deque([c])
    edges = []
    while queue:
        d = queue.popleft()
        for e in sorted(step(system, d)):
            if len(e.stack) > max_stack:
                continue
            edges.append((d, e))
            if e not in seen:
                seen.add(e)
                queue.append(e)
                if len(seen) > cap:
                    raise OracleLimitError(f"oracle explored more than {cap} configurations")
    return seen, edges


def configs_upto(system, max_stack):
    """Every configuration with stack length <= max_stack."""
    from .trace_core import all_traces

    traces = all_traces(system.alphabet, max_stack)
    return [Config(p, w) for p in range(system.n) for w in traces]


# -- homogeneous decomposition --------------------------------------------------------------


def split_homogeneous(system):
    """(pop part, {twin class: writing part}) partitioning the transitions."""
    alpha = system.alphabet
    pops = {t for t in system.transitions if not t[2]}
    parts = {}
    for cls in twin_classes(alpha):
        parts[cls] = system.with_transitions({t for t in system.transitions if t[2] and t[1] in cls})
    return system.with_transitions(pops), parts


def is_pop_only(system):
    return all(not w for _, _, w, _ in system.transitions)


def homogeneous_class(system):
    """The twin class of a nonempty push-homogeneous system, None for an empty one."""
    alpha = system.alphabet
    classes = {alpha.D(a) for _, a, _, _ in system.transitions}
    if any(not w for _, _, w, _ in system.transitions) or len(classes) > 1:
        raise TpdsError("system is not push-homogeneous")
    if not classes:
        return None
    d = classes.pop()
    return frozenset(a for a in alpha.letters if alpha.D(a) == d)


# -- saturation -------------------------------------------------------------------------------


def _shortcuts(system, transitions, pops_by_state, tset):
    alpha = system.alphabet
    for t in transitions:
        p, a, w, q = t
        for _, b, _, r in pops_by_state.get(q, ()):
            x = first_letter_strip(alpha, w, b)
            if x is None:
                continue
            new = (p, a, lnf(alpha, x), r)
            if new not in tset:
                yield t, (q, b, (), r), new


def _pops_by_state(transitions):
    pops = {}
    for t in sorted(transitions):
        if not t[2]:
            pops.setdefault(t[0], []).append(t)
    return pops


def is_saturated(system):
    """(True, None) or (False, (first, second, missing shortcut))."""
    tset = system.transitions
    for witness in _shortcuts(system, system.sorted_transitions(), _pops_by_state(tset), tset):
        return False, witness
    return True, None


@dataclass
class SaturationResult:
    system: Tpds
    rounds: list

    @property
    def added(self):
        return set().union(*self.rounds) if self.rounds else set()


def saturate(system):
    """Add shortcuts round by round until nothing changes.

    Round k+1 adds every shortcut derivable from two transitions present
    after round k.  The returned ``rounds`` lists the added sets, ending with
    the empty round that confirms the fixpoint.
    """
    current = set(system.transitions)
    rounds = []
    while True:
        snapshot = system.with_transitions(current)
        pops = _pops_by_state(current)
        new = {n for _, _, n in _shortcuts(snapshot, snapshot.sorted_transitions(), pops, current)}
        rounds.append(new)
        if not new:
            return SaturationResult(snapshot, rounds)
        current |= new


# -- phase analysis ---------------------------------------------------------------------------


def transition_kind(alphabet, t):
    """'' for a pop, otherwise the twin class of the replaced letter."""
    _, a, w, _ = t
    if not w:
        return ""
    return frozenset(b for b in alphabet.letters if alphabet.D(b) == alphabet.D(a))


@dataclass
class PhaseRun:
    configs: list
    kinds: list

    @property
    def segments(self):
        """Kinds of the maximal homogeneous segments of the run."""
        seg = []
        for k in self.kinds:
            if not seg or seg[-1] != k:
                seg.append(k)
        return seg


def phase_search(system, c, d, max_stack, max_segments=None, cap=DEFAULT_FRONTIER_CAP):
    """A run c |-* d with fewest homogeneous segments, or None.

    Breadth-first over (configuration, kind of current segment); the
    segment count is the search cost (0-1 BFS).  Runs longer than
    ``max_segments`` segments are not explored.
    """
    alpha = system.alphabet
    c, d = Config(*c), Config(*d)
    if c == d:
        return PhaseRun([c], [])
    start = (c, None)
    dist = {start: 0}
    parent = {start: None}
    dq = deque([start])
    while dq:
        node = dq.popleft()
        cfg, kind = node
        cost = dist[node]
        if cfg == d:
            return _unwind(parent, node)
        state, stack = cfg
        for b in set(stack):
            x = first_letter_strip(alpha, stack, b)
            if x is None:
                continue
            for t in system.by_key.get((state, b), ()):
                e = Config(t[3], lnf(alpha, t[2] + x))
                if len(e.stack) > max_stack:
                    continue
                k = transition_kind(alpha, t)
                nc = cost + (k != kind)
                if max_segments is not None and nc > max_segments:
                    continue
                nxt = (e, k)
                if nxt not in dist or dist[nxt] > nc:
                    dist[nxt] = nc
                    parent[nxt] = (node, t)
                    if len(dist) > cap:
                        raise OracleLimitError(f"phase search exceeded {cap} nodes")
                    if k == kind:
                        dq.appendleft(nxt)
                    else:
                        dq.append(nxt)
    return None


def _unwind(parent, node):
    configs, kinds = [], []
    while parent[node] is not None:
        prev, t = parent[node]
        configs.append(node[0])
        kinds.append(node[1])
        node = prev
    configs.append(node[0])
    configs.reverse()
    kinds.reverse()
    return PhaseRun(configs, kinds)


def phase_bound(alphabet):
    """2 TI + 1, the number of homogeneous segments a saturated system needs."""
    return 2 * twin_index(alphabet) + 1

"""Reachability relations of trace-pushdown systems as left-closed transducers.

The pipeline is: saturate the system, split it into its pop part and one
writing part per twin class, build a transducer per pair of control states
for one homogeneous segment, and chain 2 TI + 1 segments.  The chain is
kept implicit: images and preimages of automata are pushed through it one
segment at a time, and an explicit composed transducer is only built on
request.  pre* and post* then follow from the preservation functions.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .automata import (
    EPS,
    Nfa,
    build as build_nfa,
    class_automaton,
    empty_nfa,
    intersect,
    is_closed,
    is_empty as nfa_is_empty,
    minimal_dfa,
    remove_epsilon,
    traces_upto,
    trim as trim_nfa,
    union_all,
    word_nfa,
)
from .lc_construct import NotClosedError, lift_pop, preserve_left, preserve_right, product_rel
from .tpds import (
    Config,
    Tpds,
    TpdsError,
    homogeneous_class,
    is_pop_only,
    is_saturated,
    phase_bound,
    saturate,
    split_homogeneous,
    validate,
)
from .trace_core import OracleLimitError, first_letter_strip, lnf
from .transducer import (
    GUARANTEED,
    apply_left,
    apply_right,
    compose,
    empty_transducer,
    identity,
    reduce,
    trace_pair_member,
    union,
)


class PreconditionError(ValueError):
    """A system or automaton violates the precondition of an operation."""


def _check_state(system, s):
    if not 0 <= s < system.n:
        raise TpdsError(f"state {s} out of range 0..{system.n - 1}")


def pop_nfa(system, src, dst):
    """The pop transitions read as an automaton from src to dst."""
    if not is_pop_only(system):
        raise PreconditionError("system writes nonempty words")
    _check_state(system, src)
    _check_state(system, dst)
    trans = {(p, a, q) for p, a, _, q in system.transitions}
    return Nfa(system.alphabet, system.n, {src}, {dst}, trans)


def reach_pop(system, src, dst, check=False):
    """Left-closed transducer for reachability in a pop-only system.

    The words popped on the way from src to dst form a closed language K;
    the relation is (K x {eps}) . Id.
    """
    return lift_pop(pop_nfa(system, src, dst), check=check)


def reach_push_Ha(system, a, src, dst):
    """Automaton H_a with {[w] : (src,[av]) |-* (dst,[w])} = [H_a].[v] for all v.

    Reads runs backwards: state (r, c) means letter c is on top at control
    state r.  A transition (r, c, u d v, s) with u independent of d links
    (s, d) back to (r, c) through a path spelling uv.
    """
    homogeneous_class(system)
    _check_state(system, src)
    _check_state(system, dst)
    alpha = system.alphabet
    letters = alpha.letters
    edges = {}

    def add(x, label, y):
        edges.setdefault(x, []).append((label, y))

    for c in letters:
        add((dst, EPS), c, (dst, c))
    for t in system.sorted_transitions():
        r, c, w, s = t
        for d in dict.fromkeys(w):
            rest = first_letter_strip(alpha, w, d)
            if rest is None:
                continue
            if not rest:
                add((s, d), EPS, (r, c))
                continue
            prev = (s, d)
            for i, x in enumerate(rest):
                nxt = (r, c) if i == len(rest) - 1 else ("path", t, d, i)
                add(prev, x, nxt)
                prev = nxt

    raw = build_nfa(alpha, [(dst, EPS)], lambda k: edges.get(k, ()), lambda k: k == (src, a))
    return remove_epsilon(raw)


def reach_push(system, src, dst):
    """Left-closed transducer for reachability in a push-homogeneous system."""
    cls = homogeneous_class(system)
    alpha = system.alphabet
    parts = []
    if src == dst:
        parts.append(identity(alpha))
    if cls is not None:
        ident = identity(alpha)
        for a in sorted(cls, key=alpha.index.__getitem__):
            h = reach_push_Ha(system, a, src, dst)
            if nfa_is_empty(h):
                continue
            parts.append(product_rel(word_nfa(alpha, (a,)), h, ident, check=False))
    if not parts:
        return empty_transducer(alpha)
    return reduce(union(*parts)) if len(parts) > 1 else parts[0]


class SegmentTable:
    """Transducers for one homogeneous segment between every pair of states."""

    def __init__(self, system):
        self.system = system
        self.pops, self.parts = split_homogeneous(system)
        self.parts = {cls: sub for cls, sub in self.parts.items() if sub.transitions}
        self._cache = {}

    def nontrivial(self, r1, r2):
        """Segment relation minus the identity part, or None if it is empty."""
        key = (r1, r2)
        if key not in self._cache:
            self._cache[key] = self._build(r1, r2)
        return self._cache[key]

    def _build(self, r1, r2):
        alpha = self.system.alphabet
        parts = []
        if self.pops.transitions:
            nfa = pop_nfa(self.pops, r1, r2)
            if r1 != r2 or _has_nonempty_word(nfa):
                parts.append(lift_pop(nfa, check=False))
        for sub in self.parts.values():
            ident = identity(alpha)
            cls = homogeneous_class(sub)
            for a in sorted(cls, key=alpha.index.__getitem__):
                h = reach_push_Ha(sub, a, r1, r2)
                if nfa_is_empty(h):
                    continue
                parts.append(product_rel(word_nfa(alpha, (a,)), h, ident, check=False))
        if r1 != r2:
            parts = [p for p in parts if not _trivially_empty(p)]
        if not parts:
            return None
        return reduce(union(*parts)).with_certificate(GUARANTEED)

    def segment(self, r1, r2):
        """C_{r1,r2}: every run of one homogeneous subsystem from r1 to r2."""
        nt = self.nontrivial(r1, r2)
        alpha = self.system.alphabet
        if r1 == r2:
            return identity(alpha) if nt is None else reduce(union(identity(alpha), nt))
        return nt if nt is not None else empty_transducer(alpha)


def _has_nonempty_word(nfa):
    return bool(nfa.transitions)


def _trivially_empty(t):
    return not (t.final & _reach(t))


def _reach(t):
    seen = set(t.initial)
    stack = list(t.initial)
    while stack:
        p = stack.pop()
        for _, _, q in t.out[p]:
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


DEFAULT_MATERIALIZE_LIMIT = 20000


def compact(nfa):
    """Trimmed minimal DFA; equal languages give identical results."""
    return trim_nfa(minimal_dfa(nfa))


class SegmentChain:
    """Implicit transducer for Reach_{src,dst} of a saturated system.

    Stands for the union, over all state sequences src = r0, ..., rm = dst
    with m <= levels, of the compositions C_{r0,r1} o ... o C_{r(m-1),rm}.
    The composition is never built as a whole.  Images and preimages of
    automata are computed segment by segment, replacing each intermediate
    automaton by its minimal DFA; this yields the same word language as
    applying the composed transducer.  The sequence iteration stops early
    once the automata of one level equal those of the previous one.
    """

    def __init__(self, analysis, src, dst):
        self.analysis = analysis
        self.alphabet = analysis.system.alphabet
        self.src = src
        self.dst = dst
        self.certificate = GUARANTEED

    def __repr__(self):
        return f"SegmentChain(src={self.src}, dst={self.dst}, levels={self.analysis.levels})"

    def image(self, nfa):
        return self.analysis.post_images(nfa, self.src)[self.dst]

    def preimage(self, nfa):
        return self.analysis.pre_images(nfa, self.dst)[self.src]

    def contains(self, u, v):
        return trace_pair_member(self, u, v)

    def materialize(self, limit=DEFAULT_MATERIALIZE_LIMIT):
        """The composed transducer as an explicit object (may raise OracleLimitError)."""
        return self.analysis.materialize(self.src, limit)[self.dst]


class ReachAnalysis:
    """A validated system, its saturation, and the per-pair segment transducers."""

    def __init__(self, system, check=True, levels=None):
        if check:
            report = validate(system)
            if not report.ok:
                raise PreconditionError(f"system violates the tPDS conditions: {report.records()[:3]}")
        self.original = system
        self.saturation = saturate(system)
        self.system = self.saturation.system
        self.table = SegmentTable(self.system)
        self.levels = phase_bound(system.alphabet) if levels is None else levels
        self.states = range(self.system.n)
        self._materialized = {}
        self._post_cache = {}
        self._pre_cache = {}

    # one homogeneous segment applied to automata

    def _forward(self, nfa, r1, r2):
        seg = self.table.nontrivial(r1, r2)
        return None if seg is None else apply_right(nfa, seg)

    def _backward(self, nfa, r1, r2):
        seg = self.table.nontrivial(r1, r2)
        return None if seg is None else apply_left(nfa, seg)

    def post_images(self, nfa, src):
        """{r: automaton for the stacks reachable at r from {src} x L(nfa)}."""
        _check_state(self.system, src)
        start = compact(nfa)
        key = (start, src)
        if key not in self._post_cache:
            self._post_cache[key] = self._post(start, src)
        return self._post_cache[key]

    def _post(self, start, src):
        level = {}
        for r in self.states:
            parts = [start] if r == src else []
            step = self._forward(start, src, r)
            if step is not None:
                parts.append(step)
            level[r] = _union_compact(self.system.alphabet, parts)
        return self._iterate(level, self._forward, lambda r2, r: (r2, r))

    def pre_images(self, nfa, dst):
        """{r: automaton for the stacks at r that reach {dst} x L(nfa)}."""
        _check_state(self.system, dst)
        start = compact(nfa)
        key = (start, dst)
        if key not in self._pre_cache:
            self._pre_cache[key] = self._pre(start, dst)
        return self._pre_cache[key]

    def _pre(self, start, dst):
        level = {}
        for r in self.states:
            parts = [start] if r == dst else []
            step = self._backward(start, r, dst)
            if step is not None:
                parts.append(step)
            level[r] = _union_compact(self.system.alphabet, parts)
        return self._iterate(level, self._backward, lambda r2, r: (r, r2))

    def _iterate(self, level, apply, orient):
        alpha = self.system.alphabet
        for _ in range(self.levels - 1):
            nxt = {}
            for r in self.states:
                parts = [level[r]]
                for r2 in self.states:
                    if _nfa_empty(level[r2]):
                        continue
                    step = apply(level[r2], *orient(r2, r))
                    if step is not None:
                        parts.append(step)
                nxt[r] = _union_compact(alpha, parts)
            if nxt == level:
                break
            level = nxt
        return level

    def relation(self, src, dst):
        _check_state(self.system, src)
        _check_state(self.system, dst)
        return ReachRelation(self.original, src, dst, SegmentChain(self, src, dst))

    def materialize(self, src, limit=DEFAULT_MATERIALIZE_LIMIT):
        """Explicit transducers Reach_{src,r} for all r, by composition level by level."""
        if src not in self._materialized:
            self._materialized[src] = materialize_row(self.table, src, self.levels, limit)
        return self._materialized[src]


def _nfa_empty(nfa):
    return not nfa.final


def _union_compact(alphabet, parts):
    if not parts:
        return compact(empty_nfa(alphabet))
    if len(parts) == 1:
        return compact(parts[0])
    return compact(union_all(alphabet, parts))


def materialize_row(table, src, levels, limit=DEFAULT_MATERIALIZE_LIMIT):
    """Reach_{src,r} as explicit transducers, for every state r.

    level_k[r] covers runs from src to r made of at most k+1 homogeneous
    segments: level_(k+1)[r] = level_k[r] union the compositions
    level_k[r'] o C_{r',r}.  All levels are accumulated.
    """
    system = table.system
    alpha = system.alphabet
    states = range(system.n)
    level = {r: _seg_or_none(table, src, r) for r in states}
    for _ in range(levels - 1):
        nxt = {}
        for r in states:
            parts = [level[r]] if level[r] is not None else []
            for r2 in states:
                seg = table.nontrivial(r2, r)
                if level[r2] is None or seg is None:
                    continue
                parts.append(compose([level[r2], seg], limit=limit))
            nxt[r] = _union_or_none(parts, limit)
        level = nxt
    return {
        r: (level[r] if level[r] is not None else empty_transducer(alpha)).with_certificate(GUARANTEED)
        for r in states
    }


def _seg_or_none(table, r1, r2):
    nt = table.nontrivial(r1, r2)
    if r1 == r2:
        ident = identity(table.system.alphabet)
        return ident if nt is None else reduce(union(ident, nt))
    return nt


def _union_or_none(parts, limit=None):
    parts = [p for p in parts if p is not None]
    if not parts:
        return None
    if len(parts) == 1:
        return parts[0]
    res = reduce(union(*parts))
    if limit is not None and res.n > limit:
        raise OracleLimitError(f"transducer construction exceeded {limit} states")
    return res


def reach_saturated(system, src, dst, levels=None):
    """Left-closed relation Reach_{src,dst} of a saturated system (implicit transducer)."""
    ok, witness = is_saturated(system)
    if not ok:
        raise PreconditionError(f"system is not saturated: missing {witness[2]}")
    return ReachAnalysis(system, check=False, levels=levels).relation(src, dst).transducer


@dataclass
class ReachRelation:
    """Left-closed relation whose trace projection is Reach_{src,dst}."""

    system: Tpds
    src: int
    dst: int
    transducer: SegmentChain

    def contains(self, u, v):
        return trace_pair_member(self.transducer, u, v)

    def __contains__(self, pair):
        return self.contains(*pair)

    def image(self, nfa):
        return self.transducer.image(nfa)

    def preimage(self, nfa):
        return self.transducer.preimage(nfa)


def reach_relation(system, src, dst, check=True):
    """Saturate, then build the reachability relation from src to dst."""
    return ReachAnalysis(system, check).relation(src, dst)


def pre_star(system, src, dst, target, check=True, analysis=None):
    """Closed automaton for {[u] : (src,[u]) |-* (dst,[v]) for some [v] in [L(target)]}."""
    if check and not is_closed(target):
        raise NotClosedError("pre* target automaton is not closed")
    rel = (analysis or ReachAnalysis(system)).relation(src, dst)
    return preserve_left(rel.transducer, target, check=False)


def post_star(system, src, dst, source, analysis=None):
    """Automaton for {[w] : (src,[u]) |-* (dst,[w]) for some [u] in [L(source)]}."""
    rel = (analysis or ReachAnalysis(system)).relation(src, dst)
    return preserve_right(rel.transducer, source)


@dataclass
class Decision:
    reachable: bool
    src: int | None = None
    dst: int | None = None
    witness: tuple | None = None

    def __bool__(self):
        return self.reachable


def decide_reach(system, sources, targets, analysis=None, check=True):
    """Does some configuration of {p} x [L(sources[p])] reach {q} x [L(targets[q])]?

    Targets must be closed automata; then a common word of the post* automaton
    and the target witnesses a common trace.
    """
    if check:
        for q, nfa in targets.items():
            if not is_closed(nfa):
                raise NotClosedError(f"target automaton for state {q} is not closed")
    analysis = analysis or ReachAnalysis(system)
    for src in sorted(sources):
        images = analysis.post_images(sources[src], src)
        for dst in sorted(targets):
            meet = intersect(images[dst], targets[dst])
            if not nfa_is_empty(meet):
                return Decision(True, src, dst, shortest_word(meet))
    return Decision(False)


def shortest_word(nfa):
    """A shortest accepted word (length-lexicographically least), or None."""
    d = compact(nfa)
    if not d.final:
        return None
    (start,) = d.initial
    seen = {start: ()}
    queue = deque([start])
    while queue:
        p = queue.popleft()
        if p in d.final:
            return seen[p]
        for a, q in d.out[p]:
            if q not in seen:
                seen[q] = seen[p] + (a,)
                queue.append(q)
    return None


@dataclass
class OracleReport:
    checked: int
    mismatches: list

    @property
    def ok(self):
        return not self.mismatches


def oracle_mismatches(analysis, max_stack, oracle_stack=None, sources=None):
    """Compare the relation with the bounded oracle on all stacks up to max_stack.

    For every source configuration (src, [u]) and target state dst, the set of
    traces [v] with |v| <= max_stack and ([u],[v]) in Reach_{src,dst} is read
    off the image automaton of u's class (membership of ([u],[v]) holds iff
    that automaton accepts a word of [v]) and compared with the oracle run at
    stack bound ``oracle_stack``.  Mismatches are (src, u, dst, extra, missing).
    """
    from .tpds import reach_oracle
    from .trace_core import all_traces

    system = analysis.original
    alpha = system.alphabet
    oracle_stack = max_stack if oracle_stack is None else oracle_stack
    states = range(system.n)
    if sources is None:
        sources = [Config(p, u) for p in states for u in all_traces(alpha, max_stack)]
    checked = 0
    bad = []
    for c in sources:
        images = analysis.post_images(class_automaton(alpha, c.stack), c.state)
        found = reach_oracle(system, c, oracle_stack)
        for dst in states:
            got = traces_upto(images[dst], max_stack)
            exp = {d.stack for d in found if d.state == dst and len(d.stack) <= max_stack}
            checked += 1
            if got != exp:
                bad.append((c.state, c.stack, dst, sorted(got - exp), sorted(exp - got)))
    return OracleReport(checked, bad)


def config_nfa(alphabet, word):
    """Closed automaton accepting exactly the class of a word."""
    return class_automaton(alphabet, word)


# -- realizing rational languages -------------------------------------------------------------


@dataclass
class Realization:
    alphabet: object
    system: Tpds
    start: Config
    target: int
    state_letters: dict
    marker: str

    @property
    def original_letters(self):
        return [a for a in self.alphabet.letters if a not in self.state_letters.values() and a != self.marker]


def _fresh(name, taken):
    while name in taken:
        name = name + "'"
    taken.add(name)
    return name


def realize_rational(nfa):
    """A one-state tPDS whose post* from (top,[#]) restricted to old letters is [L(nfa)].

    Automaton states become new letters and # marks the bottom; all new
    letters depend on everything.  The stack holds the automaton state on
    top of the word read so far (read backwards from a final state):
    (top, #, f) starts at a final f, (top, p, q a) undoes an edge (q, a, p),
    and (top, i, eps) finishes at an initial state i.
    """
    nfa = remove_epsilon(nfa)
    alpha = nfa.alphabet
    taken = set(alpha.letters)
    names = {q: _fresh(f"s{q}", taken) for q in range(nfa.n)}
    marker = _fresh("#", taken)
    ext = alpha.extended([names[q] for q in range(nfa.n)] + [marker])
    trans = set()
    for f in nfa.final:
        trans.add((0, marker, (names[f],), 0))
    for q, a, p in nfa.transitions:
        trans.add((0, names[p], (names[q], a), 0))
    for i in nfa.initial:
        trans.add((0, names[i], (), 0))
    system = Tpds(ext, 1, trans)
    return Realization(ext, system, Config(0, (marker,)), 0, names, marker)


def restrict_nfa(nfa, letters):
    """Automaton for the words of L(nfa) using only ``letters``."""
    keep = set(letters)
    return Nfa(
        nfa.alphabet,
        nfa.n,
        nfa.initial,
        nfa.final,
        {(p, a, q) for p, a, q in nfa.transitions if a == EPS or a in keep},
    )


def singleton_nfa(alphabet, word):
    return class_automaton(alphabet, lnf(alphabet, word))


__all__ = [
    "PreconditionError",
    "ReachAnalysis",
    "ReachRelation",
    "Realization",
    "Decision",
    "SegmentTable",
    "config_nfa",
    "decide_reach",
    "pop_nfa",
    "post_star",
    "pre_star",
    "reach_pop",
    "reach_push",
    "reach_push_Ha",
    "reach_relation",
    "reach_saturated",
    "SegmentChain",
    "compact",
    "materialize_row",
    "oracle_mismatches",
    "OracleReport",
    "realize_rational",
    "restrict_nfa",
    "singleton_nfa",
]

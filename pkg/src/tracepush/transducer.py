"""Letter-pair transducers and the rational-relation toolbox.

Every transition carries a pair ``(inp, out)`` of a letter and ``""`` or of
two empty strings; a path accepts the pair of concatenated inputs and
outputs.  ``R(t)`` below means the word relation accepted by ``t`` and
``[R(t)]`` its image on traces.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

from .automata import (
    EPS,
    Nfa,
    build as build_nfa,
    class_automaton,
    epsilon_closure,
    intersect,
    is_empty as nfa_is_empty,
    remove_epsilon,
    traces_upto,
    trim as trim_nfa,
    universal_nfa,
    word_nfa,
    words_upto,
)
from .trace_core import OracleLimitError, all_words, class_members, lnf

CONSTRUCTION = "construction-guaranteed"
BRUTE_FORCE = "brute-force-verified"
UNKNOWN = "unknown"


class TransducerError(ValueError):
    pass


class CertificateError(TransducerError):
    """An operation needing a left-closed transducer got one without a certificate."""


@dataclass(frozen=True)
class LcCertificate:
    """How left-closure of a transducer's relation was established."""

    status: str = UNKNOWN
    maxlen: int | None = None

    @property
    def certified(self):
        return self.status != UNKNOWN

    def __str__(self):
        if self.status == BRUTE_FORCE:
            return f"{BRUTE_FORCE}({self.maxlen})"
        return self.status


GUARANTEED = LcCertificate(CONSTRUCTION)
NO_CERTIFICATE = LcCertificate(UNKNOWN)


class Transducer:
    __slots__ = ("alphabet", "n", "initial", "final", "transitions", "certificate", "_out", "_inn")

    def __init__(self, alphabet, n, initial, final, transitions, certificate=NO_CERTIFICATE):
        self.alphabet = alphabet
        self.n = n
        self.initial = frozenset(initial)
        self.final = frozenset(final)
        self.transitions = frozenset(transitions)
        self.certificate = certificate
        self._out = None
        self._inn = None
        for s in self.initial | self.final:
            if not 0 <= s < n:
                raise TransducerError(f"state {s} out of range 0..{n - 1}")
        for t in self.transitions:
            p, a, b, q = t
            if not (0 <= p < n and 0 <= q < n):
                raise TransducerError(f"transition {t} has an invalid endpoint")
            if len(a) + len(b) > 0 and (a and b):
                raise TransducerError(f"transition {t} violates |in.out| <= 1")
            for x in (a, b):
                if x and x not in alphabet:
                    raise TransducerError(f"transition label {x!r} not in alphabet")

    def __repr__(self):
        return (
            f"Transducer(states={self.n}, transitions={len(self.transitions)}, "
            f"certificate={self.certificate})"
        )

    @property
    def out(self):
        if self._out is None:
            out = [[] for _ in range(self.n)]
            for p, a, b, q in sorted(self.transitions):
                out[p].append((a, b, q))
            self._out = out
        return self._out

    @property
    def inn(self):
        if self._inn is None:
            inn = [[] for _ in range(self.n)]
            for p, a, b, q in sorted(self.transitions):
                inn[q].append((a, b, p))
            self._inn = inn
        return self._inn

    def with_certificate(self, certificate):
        return Transducer(self.alphabet, self.n, self.initial, self.final, self.transitions, certificate)

    def relation_equal_repr(self):
        return (self.n, self.initial, self.final, self.transitions)

    def __eq__(self, other):
        if not isinstance(other, Transducer):
            return NotImplemented
        return self.alphabet == other.alphabet and self.relation_equal_repr() == other.relation_equal_repr()

    def __hash__(self):
        return hash(self.relation_equal_repr())


def build(alphabet, initial_keys, successors, is_final, certificate=NO_CERTIFICATE, limit=None):
    """Explore from ``initial_keys`` and renumber densely; successors yield ((a, b), key).

    Raises :class:`OracleLimitError` when more than ``limit`` states appear.
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
        for (a, b), k2 in successors(k):
            if k2 not in ids:
                ids[k2] = len(order)
                order.append(k2)
                queue.append(k2)
                if limit is not None and len(order) > limit:
                    raise OracleLimitError(f"transducer construction exceeded {limit} states")
            trans.add((p, a, b, ids[k2]))
    init = {ids[k] for k in initial_keys}
    fin = {ids[k] for k in order if is_final(k)}
    return Transducer(alphabet, len(order), init, fin, trans, certificate)


# -- elementary transducers -----------------------------------------------------


def empty_transducer(alphabet, certificate=GUARANTEED):
    return Transducer(alphabet, 1, {0}, (), (), certificate)


def identity(alphabet):
    """Id on words: state 0 echoes each letter a through a private state."""
    trans = set()
    for i, a in enumerate(alphabet.letters, start=1):
        trans.add((0, a, EPS, i))
        trans.add((i, EPS, a, 0))
    return Transducer(alphabet, len(alphabet) + 1, {0}, {0}, trans, GUARANTEED)


def from_pairs_star(alphabet, pairs, certificate=NO_CERTIFICATE):
    """Transducer for {(x1, y1), ...}* where each xi, yi is a word."""
    trans = set()
    n = 1
    for x, y in pairs:
        labels = [(a, EPS) for a in x] + [(EPS, b) for b in y]
        if not labels:
            continue
        prev = 0
        for i, (a, b) in enumerate(labels):
            nxt = 0 if i == len(labels) - 1 else n
            if nxt:
                n += 1
            trans.add((prev, a, b, nxt))
            prev = nxt
    return Transducer(alphabet, n, {0}, {0}, trans, certificate)


def from_pair_sequence(alphabet, pairs, certificate=NO_CERTIFICATE):
    """Transducer for the single pair (x1...xk, y1...yk) read as a path."""
    labels = []
    for x, y in pairs:
        labels += [(a, EPS) for a in x] + [(EPS, b) for b in y]
    trans = {(i, a, b, i + 1) for i, (a, b) in enumerate(labels)}
    return Transducer(alphabet, len(labels) + 1, {0}, {len(labels)}, trans, certificate)


def concat(t1, t2):
    """R(t1) . R(t2) (componentwise product of relations)."""
    _same(t1, t2)
    off = t1.n
    trans = set(t1.transitions) | {(p + off, a, b, q + off) for p, a, b, q in t2.transitions}
    trans |= {(f, EPS, EPS, i + off) for f in t1.final for i in t2.initial}
    return Transducer(t1.alphabet, t1.n + t2.n, t1.initial, {f + off for f in t2.final}, trans)


def superword(alphabet):
    """{(a,a),(a,eps) : a in A}*: (u, v) accepted iff v is a subword of u."""
    return from_pairs_star(alphabet, [((a,), (a,)) for a in alphabet.letters] + [((a,), ()) for a in alphabet.letters])


def subword(alphabet):
    return invert(superword(alphabet))


def relabel(alphabet, mapping, certificate=NO_CERTIFICATE):
    """{(a, mapping[a]) : a}* for a letter-to-letter (or letter-to-word) mapping."""
    return from_pairs_star(
        alphabet, [((a,), tuple(w) if not isinstance(w, str) else (w,)) for a, w in mapping.items()], certificate
    )


def _same(t1, t2):
    if t1.alphabet != t2.alphabet:
        raise TransducerError("transducers are over different alphabets")


# -- queries ----------------------------------------------------------------------


def accepts_pair(t, u, v):
    """(u, v) in R(t), by search over (state, position in u, position in v)."""
    u, v = tuple(u), tuple(v)
    start = [(s, 0, 0) for s in t.initial]
    seen = set(start)
    stack = list(start)
    target = (len(u), len(v))
    while stack:
        s, i, j = stack.pop()
        if (i, j) == target and s in t.final:
            return True
        for a, b, q in t.out[s]:
            if a:
                if i < len(u) and u[i] == a:
                    k = (q, i + 1, j)
                else:
                    continue
            elif b:
                if j < len(v) and v[j] == b:
                    k = (q, i, j + 1)
                else:
                    continue
            else:
                k = (q, i, j)
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return False


def is_empty(t):
    return not (_accessible(t) & t.final)


def _accessible(t):
    seen = set(t.initial)
    stack = list(t.initial)
    while stack:
        p = stack.pop()
        for _, _, q in t.out[p]:
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def _coaccessible(t):
    seen = set(t.final)
    stack = list(t.final)
    while stack:
        q = stack.pop()
        for _, _, p in t.inn[q]:
            if p not in seen:
                seen.add(p)
                stack.append(p)
    return seen


# -- size control -----------------------------------------------------------------


def trim(t):
    useful = _accessible(t) & _coaccessible(t)
    if not useful:
        return empty_transducer(t.alphabet, t.certificate)
    init = sorted(t.initial & useful)

    def succ(p):
        return [((a, b), q) for a, b, q in t.out[p] if q in useful]

    return build(t.alphabet, init, succ, lambda p: p in t.final, t.certificate)


def _quotient(t, block):
    """Merge states with equal block id; drops (eps, eps) self-loops."""
    trans = set()
    for p, a, b, q in t.transitions:
        bp, bq = block[p], block[q]
        if a == b == EPS and bp == bq:
            continue
        trans.add((bp, a, b, bq))
    nb = max(block) + 1 if block else 1
    return Transducer(
        t.alphabet,
        nb,
        {block[s] for s in t.initial},
        {block[s] for s in t.final},
        trans,
        t.certificate,
    )


def collapse_epsilon_cycles(t):
    """Merge every strongly connected component of the (eps, eps)-edge graph."""
    eps = [[q for a, b, q in t.out[p] if a == b == EPS] for p in range(t.n)]
    comp = _scc(t.n, eps)
    return _quotient(t, comp)


def _scc(n, adj):
    """Tarjan's algorithm, iterative; returns component id per vertex."""
    index = [None] * n
    low = [0] * n
    on = [False] * n
    comp = [None] * n
    stack = []
    counter = 0
    ncomp = 0
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            recurse = False
            while i < len(adj[v]):
                w = adj[v][i]
                i += 1
                if index[w] is None:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp[w] = ncomp
                    if w == v:
                        break
                ncomp += 1
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return comp


def _bisim_blocks(n, edges, marked):
    """Coarsest partition stable under labelled successors (``edges[p]``: (label, q))."""
    block = [1 if p in marked else 0 for p in range(n)]
    count = len(set(block))
    while True:
        ids = {}
        new = [0] * n
        for p in range(n):
            sig = (block[p], frozenset((lab, block[q]) for lab, q in edges[p]))
            new[p] = ids.setdefault(sig, len(ids))
        if len(ids) == count:
            return new
        block, count = new, len(ids)


def bisimulation_reduce(t):
    """Quotient by forward then backward bisimulation; R(t) is unchanged."""
    fwd = [[((a, b), q) for a, b, q in t.out[p]] for p in range(t.n)]
    t = _quotient(t, _bisim_blocks(t.n, fwd, t.final))
    bwd = [[((a, b), p) for a, b, p in t.inn[q]] for q in range(t.n)]
    return _quotient(t, _bisim_blocks(t.n, bwd, t.initial))


def remove_epsilon_pairs(t):
    """Eliminate (eps, eps) transitions by forward closure."""
    if all(a or b for _, a, b, _ in t.transitions):
        return t
    eps = [[q for a, b, q in t.out[p] if a == b == EPS] for p in range(t.n)]
    trans = set()
    final = set()
    for p in range(t.n):
        seen = {p}
        stack = [p]
        while stack:
            r = stack.pop()
            for q in eps[r]:
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        for r in seen:
            if r in t.final:
                final.add(p)
            for a, b, q in t.out[r]:
                if a or b:
                    trans.add((p, a, b, q))
    return Transducer(t.alphabet, t.n, t.initial, final, trans, t.certificate)


def reduce(t):
    """Shrink a transducer without changing its word relation."""
    t = trim(t)
    t = collapse_epsilon_cycles(t)
    t = trim(remove_epsilon_pairs(t))
    prev = None
    while prev is None or t.n < prev:
        prev = t.n
        t = trim(bisimulation_reduce(t))
    return t


# -- rational operations ------------------------------------------------------------


def invert(t):
    """Swap input and output on every transition."""
    cert = GUARANTEED if _is_identity_shape(t) else NO_CERTIFICATE
    return Transducer(
        t.alphabet, t.n, t.initial, t.final, {(p, b, a, q) for p, a, b, q in t.transitions}, cert
    )


def _is_identity_shape(t):
    return t == identity(t.alphabet)


def compose2(t1, t2, prune=True, limit=None):
    """Binary composition R(t1) o R(t2) over reachable product states."""
    _same(t1, t2)
    # Id o R = R o Id = R on words, so the echo buffer product is avoided
    if _is_identity_shape(t1):
        return t2
    if _is_identity_shape(t2):
        return t1
    by_input = [dict() for _ in range(t2.n)]
    for p, a, b, q in t2.transitions:
        if a:
            by_input[p].setdefault(a, []).append(q)
    out1, out2 = t1.out, t2.out

    def succ(k):
        p1, p2 = k
        res = []
        for a, b, q1 in out1[p1]:
            if a:
                res.append(((a, EPS), (q1, p2)))
            elif b:
                for q2 in by_input[p2].get(b, ()):
                    res.append(((EPS, EPS), (q1, q2)))
            else:
                res.append(((EPS, EPS), (q1, p2)))
        for a, b, q2 in out2[p2]:
            if not a:
                res.append(((EPS, b), (p1, q2)))
        return res

    init = sorted((i1, i2) for i1 in t1.initial for i2 in t2.initial)
    cert = GUARANTEED if t1.certificate.certified and t2.certificate.certified else NO_CERTIFICATE
    result = build(t1.alphabet, init, succ, lambda k: k[0] in t1.final and k[1] in t2.final, cert, limit)
    return reduce(result) if prune else result


def compose(ts, prune=True, limit=None):
    """R(t1) o ... o R(tn) as a balanced fold of binary compositions."""
    ts = list(ts)
    if not ts:
        raise TransducerError("compose needs at least one transducer")
    for t in ts[1:]:
        _same(ts[0], t)
    while len(ts) > 1:
        nxt = []
        for i in range(0, len(ts) - 1, 2):
            nxt.append(compose2(ts[i], ts[i + 1], prune, limit))
        if len(ts) % 2:
            nxt.append(ts[-1])
        ts = nxt
    return ts[0]


def union(*ts):
    """Disjoint union of transducers."""
    if not ts:
        raise TransducerError("union needs at least one transducer")
    alphabet = ts[0].alphabet
    trans = set()
    init, fin = set(), set()
    off = 0
    for t in ts:
        _same(ts[0], t)
        trans |= {(p + off, a, b, q + off) for p, a, b, q in t.transitions}
        init |= {s + off for s in t.initial}
        fin |= {s + off for s in t.final}
        off += t.n
    cert = GUARANTEED if all(t.certificate.certified for t in ts) else NO_CERTIFICATE
    return Transducer(alphabet, max(off, 1), init, fin, trans, cert)


def apply_right(nfa, t):
    """NFA for L(nfa)^R(t) = {v : exists u in L(nfa) with (u, v) in R(t)}."""
    if nfa.alphabet != t.alphabet:
        raise TransducerError("automaton and transducer are over different alphabets")
    by_letter = [dict() for _ in range(nfa.n)]
    eps_moves = [[] for _ in range(nfa.n)]
    for p, a, q in nfa.transitions:
        if a:
            by_letter[p].setdefault(a, []).append(q)
        else:
            eps_moves[p].append(q)
    tout = t.out

    def succ(k):
        p, s = k
        res = [(EPS, (q, s)) for q in eps_moves[p]]
        for a, b, s2 in tout[s]:
            if a:
                for q in by_letter[p].get(a, ()):
                    res.append((EPS, (q, s2)))
            else:
                res.append((b, (p, s2)))
        return res

    init = sorted((p, s) for p in nfa.initial for s in t.initial)
    raw = build_nfa(nfa.alphabet, init, succ, lambda k: k[0] in nfa.final and k[1] in t.final)
    return remove_epsilon(trim_nfa(raw))


def apply_left(nfa, t):
    """NFA for ^R(t)L(nfa) = {u : exists v in L(nfa) with (u, v) in R(t)}."""
    return apply_right(nfa, invert(t))


def product_transducer(a1, a2):
    """Transducer with R = L(a1) x L(a2): first read a word of a1, then write one of a2."""
    if a1.alphabet != a2.alphabet:
        raise TransducerError("automata are over different alphabets")
    off = a1.n
    trans = {(p, a, EPS, q) for p, a, q in a1.transitions}
    trans |= {(p + off, EPS, a, q + off) for p, a, q in a2.transitions}
    trans |= {(f, EPS, EPS, i + off) for f in a1.final for i in a2.initial}
    return Transducer(a1.alphabet, a1.n + a2.n, a1.initial, {f + off for f in a2.final}, trans)


def input_transducer(nfa):
    """L(nfa) x {eps}."""
    return Transducer(nfa.alphabet, nfa.n, nfa.initial, nfa.final, {(p, a, EPS, q) for p, a, q in nfa.transitions})


def output_transducer(nfa):
    """{eps} x L(nfa)."""
    return Transducer(nfa.alphabet, nfa.n, nfa.initial, nfa.final, {(p, EPS, a, q) for p, a, q in nfa.transitions})


def domain_nfa(t):
    return apply_left(universal_nfa(t.alphabet), t)


def range_nfa(t):
    return apply_right(universal_nfa(t.alphabet), t)


# -- bounded enumeration and trace-level membership ----------------------------------


def image_nfa(rel, nfa):
    """Image of L(nfa) under a transducer or an implicit relation object.

    Implicit relations (such as composed reachability relations) provide
    ``image`` and ``preimage`` methods returning automata.
    """
    if isinstance(rel, Transducer):
        return apply_right(nfa, rel)
    return rel.image(nfa)


def preimage_nfa(rel, nfa):
    if isinstance(rel, Transducer):
        return apply_left(nfa, rel)
    return rel.preimage(nfa)


def image_words(t, u, maxlen):
    """Outputs v with (u, v) in R(t) and |v| <= maxlen."""
    return words_upto(image_nfa(t, word_nfa(t.alphabet, u)), maxlen)


def image_traces(t, u, maxlen):
    """Normal forms of traces y with ([u], y) in [R(t)] and |y| <= maxlen."""
    return traces_upto(image_nfa(t, class_automaton(t.alphabet, u)), maxlen)


def pairs_upto(t, maxlen, out_maxlen=None):
    """All pairs of R(t) with |u| <= maxlen and |v| <= out_maxlen (brute force)."""
    out_maxlen = maxlen if out_maxlen is None else out_maxlen
    res = set()
    for u in all_words(t.alphabet.letters, maxlen):
        for v in image_words(t, u, out_maxlen):
            res.add((u, v))
    return res


def trace_pair_member(t, u, v, limit=None):
    """([u], [v]) in [R(t)]: search the product of the two class automata with t."""
    alpha = t.alphabet
    cu = class_automaton(alpha, u, limit)
    cv = class_automaton(alpha, v, limit)
    if not isinstance(t, Transducer):
        return not nfa_is_empty(intersect(t.image(cu), cv))
    # class automata are deterministic: index by (state, letter)
    du = {(p, a): q for p, a, q in cu.transitions}
    dv = {(p, a): q for p, a, q in cv.transitions}
    start = [(i, s, j) for i in cu.initial for s in t.initial for j in cv.initial]
    seen = set(start)
    stack = list(start)
    while stack:
        i, s, j = stack.pop()
        if i in cu.final and s in t.final and j in cv.final:
            return True
        for a, b, q in t.out[s]:
            if a:
                i2 = du.get((i, a))
                if i2 is None:
                    continue
                k = (i2, q, j)
            elif b:
                j2 = dv.get((j, b))
                if j2 is None:
                    continue
                k = (i, q, j2)
            else:
                k = (i, q, j)
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return False


@dataclass
class LeftClosureResult:
    holds: bool
    maxlen: int
    counterexample: tuple | None = None

    def __bool__(self):
        return self.holds


def is_left_closed_bruteforce(t, maxlen, stretch=2, cap=6):
    """Bounded check of  u ~ u', (u', v') in R  =>  exists v ~ v' with (u, v) in R.

    Considers |u|, |u'| <= maxlen and |v'| <= maxlen + stretch.  Returns a
    :class:`LeftClosureResult`; the counterexample is the triple (u, u', v')
    found first when u', then v', then u run through length-lexicographic
    order.
    """
    if maxlen > cap:
        raise OracleLimitError(f"maxlen {maxlen} exceeds cap {cap}")
    alpha = t.alphabet
    bound = maxlen + stretch
    key = alpha.sort_key
    order = lambda w: (len(w), key(w))  # noqa: E731
    images = {}
    trace_images = {}

    def img(w):
        if w not in images:
            images[w] = sorted(image_words(t, w, bound), key=order)
        return images[w]

    def timg(w):
        if w not in trace_images:
            trace_images[w] = {lnf(alpha, v) for v in img(w)}
        return trace_images[w]

    for u2 in all_words(alpha.letters, maxlen):
        others = sorted(class_members(alpha, u2) - {u2}, key=order)
        if not others:
            continue
        for v2 in img(u2):
            nf = lnf(alpha, v2)
            for u in others:
                if nf not in timg(u):
                    return LeftClosureResult(False, maxlen, (u, u2, v2))
    return LeftClosureResult(True, maxlen)


def certify_bruteforce(t, maxlen, **kw):
    """Attach a brute-force certificate if the bounded check passes."""
    res = is_left_closed_bruteforce(t, maxlen, **kw)
    if not res:
        return t, res
    return t.with_certificate(LcCertificate(BRUTE_FORCE, maxlen)), res


# -- serialization -----------------------------------------------------------------


def transducer_to_json(t):
    return {
        "states": t.n,
        "initial": sorted(t.initial),
        "final": sorted(t.final),
        "transitions": [[p, a, b, q] for p, a, b, q in sorted(t.transitions)],
    }


def transducer_from_json(alphabet, doc, certificate=NO_CERTIFICATE):
    if isinstance(doc, str):
        doc = json.loads(doc)
    try:
        return Transducer(
            alphabet,
            int(doc["states"]),
            doc["initial"],
            doc["final"],
            [(int(p), a, b, int(q)) for p, a, b, q in doc["transitions"]],
            certificate,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise TransducerError(f"malformed transducer document: {exc}") from exc


def as_nfa_over_pairs(t):
    """Debug view: the transducer as an automaton on rendered pair labels."""
    return [(p, f"{a or 'ε'}|{b or 'ε'}", q) for p, a, b, q in sorted(t.transitions)]


__all__ = [name for name in dir() if not name.startswith("_")]
_ = (Nfa, epsilon_closure)

"""Constructions of left-closed transducers and the set transformations built on them.

A relation R on words is left-closed when u ~ u' R v' implies u R v for some
v ~ v'.  For such relations the word-level image and preimage of a closed
language represent the trace-level ones, which is what the preservation
functions below rely on.
"""

from __future__ import annotations

from .automata import EPS, is_closed, remove_epsilon
from .trace_core import AlphabetError
from .transducer import (
    GUARANTEED,
    CertificateError,
    Transducer,
    build,
    compose,
    concat,
    identity,
    image_nfa,
    output_transducer,
    preimage_nfa,
)


class NotClosedError(ValueError):
    """An automaton required to accept a commutation-closed language does not."""


def _require_closed(nfa, what="automaton", check=True):
    if check and not is_closed(nfa):
        raise NotClosedError(f"{what} is not closed under commutation")


def _require_certificate(t, what="transducer"):
    if not t.certificate.certified:
        raise CertificateError(f"{what} carries no left-closure certificate")


def lift_pop(nfa, check=True):
    """Left-closed transducer for ([L(nfa)] x {[eps]}) . Id, i.e. pairs (xy, y).

    States are triples (q, D(B), x): q an automaton state, D(B) the letters
    dependent on what has been echoed so far, x a letter waiting to be echoed
    (or ``""``).  A letter of the popped word may be read only while it is
    independent of everything already echoed.
    """
    _require_closed(nfa, "lift_pop input", check)
    nfa = remove_epsilon(nfa)
    alpha = nfa.alphabet
    letters = alpha.letters
    moves = nfa.out

    def succ(k):
        p, db, x = k
        if x:
            return [((EPS, x), (p, db | alpha.D(x), EPS))]
        res = [((a, EPS), (p, db, a)) for a in letters]
        for a, q in moves[p]:
            if a not in db:
                res.append(((a, EPS), (q, db, EPS)))
        return res

    empty = frozenset()
    init = [(i, empty, EPS) for i in sorted(nfa.initial)]
    t = build(alpha, init, succ, lambda k: k[0] in nfa.final and not k[2], GUARANTEED)
    return t


def lift_push(nfa):
    """Left-closed transducer for ({[eps]} x [L(nfa)]) . Id, i.e. pairs (y, xy)."""
    return concat(output_transducer(nfa), identity(nfa.alphabet)).with_certificate(GUARANTEED)


def product_rel(k, l, t, check=True):
    """([L(k)] x [L(l)]) . [R(t)] as lift_pop(k) o t o lift_push(l)."""
    _require_certificate(t)
    res = compose([lift_pop(k, check), t, lift_push(l)])
    return res.with_certificate(GUARANTEED)


def preserve_left(t, k, check=True):
    """Closed automaton for the trace preimage of [L(k)] under [R(t)]."""
    _require_certificate(t)
    _require_closed(k, "preserve_left target", check)
    return preimage_nfa(t, k)


def preserve_right(t, l):
    """Automaton for the trace image of [L(l)] under [R(t)]."""
    _require_certificate(t)
    return image_nfa(t, l)


def first_dependent_pair(alphabet):
    letters = alphabet.letters
    for i, a in enumerate(letters):
        for b in letters[i + 1:]:
            if alphabet.dependent(a, b):
                return a, b
    return None


def nivat_split(t):
    """Two left-closed transducers t1, t2 with [R(t)] = [R(t1)]^-1 o [R(t2)].

    The i-th transition of t (in sorted order) is coded by the word a^i b,
    where (a, b) is the first dependent pair of distinct letters.  t1 maps
    codes of runs to their inputs and t2 maps them to their outputs; codes
    live in {a, b}* where every trace has a single representative, so both
    relations are left-closed.
    """
    alpha = t.alphabet
    pair = first_dependent_pair(alpha)
    if pair is None:
        raise AlphabetError("nivat_split needs two distinct dependent letters")
    a, b = pair
    trans = sorted(t.transitions)
    n = t.n
    t1, t2 = set(), set()
    for i, (p, x, y, q) in enumerate(trans, start=1):
        code = [a] * i + [b]
        for emitted, out in ((x, t1), (y, t2)):
            steps = [(c, EPS) for c in code] + ([(EPS, emitted)] if emitted else [])
            prev = p
            for j, (c, e) in enumerate(steps):
                nxt = q if j == len(steps) - 1 else (n + i, j)
                out.add((prev, c, e, nxt))
                prev = nxt
    return _pack(t, t1), _pack(t, t2)


def _pack(t, trans):
    """Renumber tuple-named path states after the original ones."""
    names = {}
    for p, _, _, q in sorted(trans, key=repr):
        for s in (p, q):
            if not isinstance(s, int) and s not in names:
                names[s] = t.n + len(names)
    fix = lambda s: s if isinstance(s, int) else names[s]  # noqa: E731
    return Transducer(
        t.alphabet,
        t.n + len(names),
        t.initial,
        t.final,
        {(fix(p), x, y, fix(q)) for p, x, y, q in trans},
        GUARANTEED,
    )


def transform_rational(l, t, check=True):
    """Automaton for [L(l)]^[R(t)] for a closed l and any transducer t."""
    _require_closed(l, "transform_rational input", check)
    t1, t2 = nivat_split(t)
    return preserve_right(t2, preserve_left(t1, l, check=False))

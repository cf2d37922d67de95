"""Dependence alphabets, words and Mazurkiewicz traces.

Words are tuples of letter names (strings); the empty tuple is the empty
word.  A trace is stored through its lexicographic normal form, so two
traces are equal iff their normal forms are equal as tuples.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations

DEFAULT_CLASS_LIMIT = 12


class AlphabetError(ValueError):
    pass


class OracleLimitError(RuntimeError):
    """A brute-force routine was asked to go past its configured bound."""


class DependenceAlphabet:
    """Finite letter set with a reflexive, symmetric dependence relation.

    The position of a letter in ``letters`` fixes the linear order used for
    lexicographic normal forms.
    """

    __slots__ = ("letters", "index", "_dep", "_hash")

    def __init__(self, letters, dependence=()):
        letters = tuple(letters)
        if len(set(letters)) != len(letters):
            dup = sorted({a for a in letters if letters.count(a) > 1})
            raise AlphabetError(f"duplicate letters: {dup}")
        for a in letters:
            if not isinstance(a, str) or not a:
                raise AlphabetError(f"letters must be nonempty strings, got {a!r}")
        self.letters = letters
        self.index = {a: i for i, a in enumerate(letters)}
        dep = {a: {a} for a in letters}
        for pair in dependence:
            a, b = pair
            for x in (a, b):
                if x not in self.index:
                    raise AlphabetError(f"dependence pair mentions unknown letter {x!r}")
            dep[a].add(b)
            dep[b].add(a)
        self._dep = {a: frozenset(s) for a, s in dep.items()}
        self._hash = None

    # -- basic relations -------------------------------------------------

    @property
    def dependence(self):
        """All ordered dependent pairs, reflexive pairs included."""
        return frozenset((a, b) for a in self.letters for b in self._dep[a])

    def D(self, a):
        return self._dep[a]

    def dependent(self, a, b):
        return b in self._dep[a]

    def independent(self, a, b):
        return b not in self._dep[a]

    def __contains__(self, a):
        return a in self.index

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        if not isinstance(other, DependenceAlphabet):
            return NotImplemented
        return self.letters == other.letters and self._dep == other._dep

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.letters, tuple(self._dep[a] for a in self.letters)))
        return self._hash

    def __repr__(self):
        pairs = sorted(
            (a, b) for a, b in self.dependence if a != b and self.index[a] < self.index[b]
        )
        return f"DependenceAlphabet({list(self.letters)!r}, {pairs!r})"

    def check_word(self, w):
        for a in w:
            if a not in self.index:
                raise AlphabetError(f"unknown letter {a!r}")
        return tuple(w)

    def sort_key(self, w):
        return tuple(self.index[a] for a in w)

    # -- serialization ---------------------------------------------------

    def to_json(self):
        pairs = sorted(
            [a, b] for a, b in self.dependence if a != b and self.index[a] < self.index[b]
        )
        pairs.sort(key=lambda p: (self.index[p[0]], self.index[p[1]]))
        return {"letters": list(self.letters), "dependence": pairs}

    def extended(self, new_letters, depend_on_all=True):
        """Alphabet with extra letters appended; new letters depend on everything."""
        letters = self.letters + tuple(new_letters)
        pairs = [(a, b) for a, b in self.dependence]
        if depend_on_all:
            pairs += [(n, x) for n in new_letters for x in letters]
        return DependenceAlphabet(letters, pairs)


def load_alphabet(doc):
    """Build an alphabet from a dict ``{"letters": [...], "dependence": [[a, b], ...]}``,
    a JSON string, or a path to a JSON file."""
    if isinstance(doc, str):
        doc = doc.strip()
        if doc.startswith("{"):
            doc = json.loads(doc)
        else:
            with open(doc) as fh:
                doc = json.load(fh)
    try:
        letters = doc["letters"]
        pairs = doc.get("dependence", [])
    except (KeyError, TypeError, AttributeError) as exc:
        raise AlphabetError(f"malformed alphabet document: {exc}") from exc
    for p in pairs:
        if len(p) != 2:
            raise AlphabetError(f"dependence entries must be pairs, got {p!r}")
    return DependenceAlphabet(letters, [tuple(p) for p in pairs])


def full_dependence(letters):
    letters = tuple(letters)
    return DependenceAlphabet(letters, combinations(letters, 2))


def no_dependence(letters):
    return DependenceAlphabet(tuple(letters), ())


# -- structural indices ----------------------------------------------------


def dependent_set(alphabet, letters):
    """D(B): all letters dependent on some letter of ``letters``."""
    out = set()
    for a in letters:
        if a not in alphabet:
            raise AlphabetError(f"unknown letter {a!r}")
        out |= alphabet.D(a)
    return frozenset(out)


def parallel(alphabet, u, v):
    """u || v: every letter of u is independent of every letter of v."""
    bu, bv = set(u), set(v)
    return all(alphabet.independent(a, b) for a in bu for b in bv)


def twin_classes(alphabet):
    """Partition of the letters by equality of their dependent sets, in letter order."""
    classes = {}
    for a in alphabet.letters:
        classes.setdefault(alphabet.D(a), []).append(a)
    return [frozenset(c) for c in classes.values()]


def twins(alphabet, a):
    return frozenset(b for b in alphabet.letters if alphabet.D(b) == alphabet.D(a))


def twin_index(alphabet):
    return len(twin_classes(alphabet))


def dependent_set_values(alphabet):
    """All distinct sets D(B) for B a subset of the letters, D(empty) included.

    Closes {empty} under union with each D(a) instead of enumerating subsets.
    """
    generators = {alphabet.D(a) for a in alphabet.letters}
    seen = {frozenset()}
    todo = [frozenset()]
    while todo:
        s = todo.pop()
        for g in generators:
            t = s | g
            if t not in seen:
                seen.add(t)
                todo.append(t)
    return seen


def set_twin_index(alphabet):
    return len(dependent_set_values(alphabet))


def independence_number(alphabet):
    """Size of a largest set of mutually independent letters (exact search)."""
    letters = list(alphabet.letters)
    # order by degree in the independence graph so good branches come first
    indep = {a: {b for b in letters if alphabet.independent(a, b)} for a in letters}
    best = 0

    def expand(size, candidates):
        nonlocal best
        if size > best:
            best = size
        if size + len(candidates) <= best:
            return
        cand = sorted(candidates, key=lambda x: -len(indep[x] & candidates))
        while cand:
            if size + len(cand) <= best:
                return
            a = cand.pop(0)
            expand(size + 1, candidates & indep[a])
            candidates = candidates - {a}

    expand(0, set(letters))
    return best


# -- trace equivalence and normal forms -------------------------------------


def _project(w, keep):
    return tuple(a for a in w if a in keep)


def equivalent(alphabet, u, v):
    """u ~ v, decided by projections onto every dependent pair of letters."""
    u, v = tuple(u), tuple(v)
    if len(u) != len(v):
        return False
    for a in set(u) | set(v):
        if u.count(a) != v.count(a):
            return False
    letters = sorted(set(u), key=alphabet.index.__getitem__)
    for i, a in enumerate(letters):
        for b in letters[i + 1:]:
            if alphabet.dependent(a, b):
                keep = (a, b)
                if _project(u, keep) != _project(v, keep):
                    return False
    return True


def minimal_letters(alphabet, w):
    """Letters that can be moved to the front of w (as a set)."""
    blocked = set()
    out = set()
    for a in w:
        if a not in blocked and a not in out:
            out.add(a)
        blocked |= alphabet.D(a)
        if len(blocked) == len(alphabet):
            break
    return out


def first_letter_strip(alphabet, u, a):
    """Return x with [u] = [a][x], or None if a cannot be a first letter of [u]."""
    u = tuple(u)
    for i, b in enumerate(u):
        if b == a:
            return u[:i] + u[i + 1:]
        if alphabet.dependent(a, b):
            return None
    return None


def lnf(alphabet, u):
    """Lexicographic normal form: the least representative of [u] in letter order."""
    rest = list(u)
    out = []
    idx = alphabet.index
    while rest:
        blocked = set()
        best = None
        best_pos = -1
        for i, b in enumerate(rest):
            if b not in blocked and (best is None or idx[b] < idx[best]):
                best, best_pos = b, i
            blocked |= alphabet.D(b)
        out.append(best)
        del rest[best_pos]
    return tuple(out)


def class_members(alphabet, u, limit=DEFAULT_CLASS_LIMIT):
    """All words equivalent to u (exponential; refuses words longer than ``limit``)."""
    u = tuple(u)
    if len(u) > limit:
        raise OracleLimitError(f"word of length {len(u)} exceeds class limit {limit}")
    out = set()

    def rec(prefix, rest):
        if not rest:
            out.add(prefix)
            return
        for a in minimal_letters(alphabet, rest):
            rec(prefix + (a,), first_letter_strip(alphabet, rest, a))

    rec((), u)
    return out


@dataclass(frozen=True, order=False)
class Trace:
    """Trace [w] over an alphabet, held as its lexicographic normal form."""

    alphabet: DependenceAlphabet = field(compare=False, repr=False)
    nf: tuple

    @classmethod
    def of(cls, alphabet, w):
        return cls(alphabet, lnf(alphabet, alphabet.check_word(w)))

    def __len__(self):
        return len(self.nf)

    def __mul__(self, other):
        return Trace.of(self.alphabet, self.nf + other.nf)

    def strip(self, a):
        x = first_letter_strip(self.alphabet, self.nf, a)
        return None if x is None else Trace.of(self.alphabet, x)

    def __str__(self):
        return word_str(self.nf)


def word_str(w):
    """Compact rendering: plain concatenation when all letters are single characters."""
    if all(len(a) == 1 for a in w):
        return "".join(w) or "ε"
    return " ".join(w) or "ε"


def parse_word(alphabet, text):
    """Read a word given as a string of single-character letters or a JSON list."""
    if isinstance(text, (list, tuple)):
        return alphabet.check_word(text)
    text = text.strip()
    if text.startswith("["):
        return alphabet.check_word(json.loads(text))
    if text in ("", "ε", "eps"):
        return ()
    return alphabet.check_word(tuple(text))


def all_words(letters, maxlen):
    """Words over ``letters`` of length 0..maxlen in length-lexicographic order."""
    layer = [()]
    yield ()
    for _ in range(maxlen):
        layer = [w + (a,) for w in layer for a in letters]
        yield from layer


def all_traces(alphabet, maxlen):
    """Normal forms of all traces of length <= maxlen, sorted by (length, order)."""
    seen = set()
    for w in all_words(alphabet.letters, maxlen):
        if lnf(alphabet, w) == w:
            seen.add(w)
    return sorted(seen, key=lambda w: (len(w), alphabet.sort_key(w)))

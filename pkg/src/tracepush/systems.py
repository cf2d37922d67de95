"""Bundled example systems and small random-system generators."""

from __future__ import annotations

import json
import random
from importlib import resources

from .tpds import Tpds, tpds_from_json, validate
from .trace_core import DependenceAlphabet, load_alphabet

BUNDLED = ("grid", "twophases", "shortcuts")


def load_bundle(doc):
    """(alphabet, system) from a document with "alphabet" and "system" keys."""
    alphabet = load_alphabet(doc["alphabet"])
    return alphabet, tpds_from_json(alphabet, doc["system"])


def bundled(name):
    """One of the shipped example systems, by name.

    grid: one state, c -> ca and c -> cab with a, b independent; from [c]
        the reachable stacks form the grid c a^i b^j with j <= i.
    twophases: five letters, four states; reaching (3,[e^4 c^4]) from
        (0,[a]) needs two writing and two popping segments.
    shortcuts: three states under full dependence; saturation adds
        three transitions over two rounds.
    """
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled system {name!r}; choose from {BUNDLED}")
    text = resources.files(__package__).joinpath("data", f"{name}.json").read_text()
    return load_bundle(json.loads(text))


def classical_pds(letters, n, transitions):
    """A pushdown system: every pair of letters dependent."""
    from .trace_core import full_dependence

    alpha = full_dependence(letters)
    return alpha, Tpds(alpha, n, transitions)


def random_alphabet(rng, max_letters=3, min_letters=1):
    letters = "abcdefgh"[: rng.randint(min_letters, max_letters)]
    pairs = [(x, y) for i, x in enumerate(letters) for y in letters[i + 1:] if rng.random() < 0.5]
    return DependenceAlphabet(letters, pairs)


def random_tpds(rng, alphabet=None, max_states=4, max_word=2, n_transitions=None, attempts=200):
    """A random system satisfying both tPDS conditions.

    Candidate transitions respect D(w) within D(a) by construction; the
    diamond property is then repaired by adding the missing transitions,
    and drafts that do not settle quickly are discarded.
    """
    for _ in range(attempts):
        alpha = alphabet or random_alphabet(rng)
        n = rng.randint(1, max_states)
        k = n_transitions if n_transitions is not None else rng.randint(1, 2 + n)
        trans = set()
        for _ in range(k):
            p, q = rng.randrange(n), rng.randrange(n)
            a = rng.choice(alpha.letters)
            allowed = sorted(alpha.D(a), key=alpha.index.__getitem__)
            w = tuple(rng.choice(allowed) for _ in range(rng.randint(0, max_word)))
            trans.add((p, a, w, q))
        system = _repair(Tpds(alpha, n, trans))
        if system is not None and len(system.transitions) <= 4 * k + 4:
            return system
    raise RuntimeError("could not generate a valid random system")


def _repair(system, rounds=6):
    for _ in range(rounds):
        report = validate(system)
        if report.ok:
            return system
        if report.p1:
            return None
        extra = set()
        for (p, a, v, q), (_, b, w, r) in report.p2:
            extra.add((p, b, w, q))
            extra.add((q, a, v, r))
        system = system.with_transitions(system.transitions | extra)
    return system if validate(system).ok else None


def seeded_random_tpds(seed, **kw):
    return random_tpds(random.Random(seed), **kw)

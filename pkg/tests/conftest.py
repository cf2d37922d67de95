import pytest

from tracepush.systems import bundled
from tracepush.trace_core import DependenceAlphabet, full_dependence, load_alphabet, no_dependence


@pytest.fixture
def grid_alpha():
    # a, b independent; both depend on c
    return load_alphabet({"letters": ["a", "b", "c"], "dependence": [["a", "c"], ["b", "c"]]})


@pytest.fixture
def chain_alpha():
    # a || c while b depends on both (the subword counterexample alphabet)
    return DependenceAlphabet("abc", [("a", "b"), ("b", "c")])


@pytest.fixture
def indep2():
    return no_dependence("ab")


@pytest.fixture
def dep2():
    return full_dependence("ab")


@pytest.fixture
def grid():
    return bundled("grid")


@pytest.fixture
def twophases():
    return bundled("twophases")


@pytest.fixture
def shortcuts():
    return bundled("shortcuts")

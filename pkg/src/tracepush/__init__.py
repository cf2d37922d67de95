"""Reachability for pushdown systems whose stack is a Mazurkiewicz trace.

The main entry points are :class:`DependenceAlphabet` and :class:`Tpds` for
describing systems, :func:`reach_relation`, :func:`pre_star`,
:func:`post_star` and :func:`decide_reach` for analysing them, and
:func:`reach_oracle` as a bounded ground truth.
"""

from .automata import Nfa, is_closed
from .reach import ReachAnalysis, decide_reach, post_star, pre_star, reach_relation, realize_rational
from .tpds import Config, Tpds, reach_oracle, saturate, step, validate
from .trace_core import DependenceAlphabet, Trace, equivalent, lnf, load_alphabet
from .transducer import Transducer

__all__ = [
    "Config",
    "DependenceAlphabet",
    "Nfa",
    "ReachAnalysis",
    "Tpds",
    "Trace",
    "Transducer",
    "decide_reach",
    "equivalent",
    "is_closed",
    "lnf",
    "load_alphabet",
    "post_star",
    "pre_star",
    "reach_oracle",
    "reach_relation",
    "realize_rational",
    "saturate",
    "step",
    "validate",
]

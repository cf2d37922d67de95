"""Command-line front end.

Every command reads JSON files, prints JSON (sorted keys) or a short verdict,
and reports through its exit status: 0 success or true, 1 false or a
violation, 2 unreadable input, 3 a violated precondition.
"""

from __future__ import annotations

import functools
import json
import sys

import click

from . import automata, reach, tpds, transducer
from .lc_construct import NotClosedError
from .systems import BUNDLED, bundled, load_bundle
from .trace_core import AlphabetError, OracleLimitError, equivalent, lnf, load_alphabet, parse_word, word_str

EXIT_OK, EXIT_FALSE, EXIT_INPUT, EXIT_PRECONDITION = 0, 1, 2, 3

INPUT_ERRORS = (
    OSError,
    json.JSONDecodeError,
    AlphabetError,
    tpds.TpdsError,
    transducer.TransducerError,
    automata.AutomatonError,
    KeyError,
)
PRECONDITION_ERRORS = (
    NotClosedError,
    reach.PreconditionError,
    transducer.CertificateError,
    OracleLimitError,
)


class CliInputError(Exception):
    pass


def dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2)


def emit(obj, out=None):
    text = dump(obj) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def guarded(fn):
    """Map library exceptions to exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except PRECONDITION_ERRORS as exc:
            click.echo(f"precondition failed: {exc}", err=True)
            sys.exit(EXIT_PRECONDITION)
        except (CliInputError, *INPUT_ERRORS) as exc:
            click.echo(f"input error: {exc}", err=True)
            sys.exit(EXIT_INPUT)
        sys.exit(code or EXIT_OK)

    return wrapper


# -- workspace loading ------------------------------------------------------------------


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def load_workspace(alphabet_path, system_path=None, example=None):
    """(alphabet, system or None) from the given files or a bundled example."""
    if example:
        if example not in BUNDLED:
            raise CliInputError(f"unknown example {example!r}; choose from {', '.join(BUNDLED)}")
        return bundled(example)
    if system_path:
        doc = read_json(system_path)
        if "alphabet" in doc and "system" in doc:
            return load_bundle(doc)
        if not alphabet_path:
            raise CliInputError("--alphabet is required unless the system file bundles one")
        alpha = load_alphabet(read_json(alphabet_path))
        return alpha, tpds.tpds_from_json(alpha, doc)
    if not alphabet_path:
        raise CliInputError("--alphabet (or --system/--example) is required")
    return load_alphabet(read_json(alphabet_path)), None


def require_system(system):
    if system is None:
        raise CliInputError("a system is required (--system or --example)")
    return system


def parse_config(alphabet, text):
    """'3:eeeecccc' or the JSON form [3, "eeeecccc"]."""
    text = text.strip()
    if text.startswith("["):
        state, word = json.loads(text)
    else:
        state, _, word = text.partition(":")
    try:
        state = int(state)
    except ValueError as exc:
        raise CliInputError(f"bad configuration {text!r}") from exc
    return tpds.Config(state, lnf(alphabet, parse_word(alphabet, word)))


def load_nfa(alphabet, path):
    return automata.nfa_from_json(alphabet, read_json(path))


def state_nfa_pairs(alphabet, items):
    """Parse repeated 'STATE:PATH' options into {state: automaton}."""
    out = {}
    for item in items:
        state, _, path = item.partition(":")
        nfa = load_nfa(alphabet, path)
        s = int(state)
        out[s] = automata.union(out[s], nfa) if s in out else nfa
    return out


def configs_to_nfas(alphabet, configs):
    out = {}
    for c in configs:
        nfa = automata.class_automaton(alphabet, c.stack)
        out[c.state] = automata.union(out[c.state], nfa) if c.state in out else nfa
    return out


def config_doc(c):
    return [c.state, word_str(c.stack) if c.stack else ""]


def tdoc(t):
    p, a, w, q = t
    return [p, a, "".join(w) if all(len(x) == 1 for x in w) else list(w), q]


# -- option helpers -------------------------------------------------------------------------

alphabet_opt = click.option("--alphabet", "alphabet_path", type=click.Path(), help="Alphabet JSON file.")
system_opt = click.option("--system", "system_path", type=click.Path(), help="System JSON file (or bundle).")
example_opt = click.option("--example", type=str, help=f"Bundled example system: {', '.join(BUNDLED)}.")
out_opt = click.option("--out", type=click.Path(), help="Write the result here instead of stdout.")
jobs_opt = click.option("--jobs", type=int, default=1, show_default=True, help="Worker count (accepted; work runs sequentially).")
src_opt = click.option("--src", type=int, required=True, help="Source control state.")
dst_opt = click.option("--dst", type=int, required=True, help="Target control state.")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Reachability analysis for trace-pushdown systems."""


@main.command()
@alphabet_opt
@system_opt
@example_opt
@guarded
def validate(alphabet_path, system_path, example):
    """Check (P1) and the diamond property; violations as JSON lines."""
    _, system = load_workspace(alphabet_path, system_path, example)
    report = tpds.validate(require_system(system))
    for rec in report.records():
        click.echo(json.dumps(rec, sort_keys=True))
    if report.ok:
        click.echo("valid")
        return EXIT_OK
    return EXIT_FALSE


@main.command()
@alphabet_opt
@system_opt
@example_opt
@out_opt
@guarded
def saturate(alphabet_path, system_path, example, out):
    """Add shortcut transitions until the system is saturated."""
    alpha, system = load_workspace(alphabet_path, system_path, example)
    res = tpds.saturate(require_system(system))
    key = res.system.sorted_transitions
    order = {t: i for i, t in enumerate(key())}
    rounds = [
        {"round": i, "added": [tdoc(t) for t in sorted(r, key=order.__getitem__)]}
        for i, r in enumerate(res.rounds, start=1)
    ]
    doc = {"alphabet": alpha.to_json(), "system": res.system.to_json()}
    if out:
        emit(doc, out)
        emit({"rounds": rounds, "added_per_round": [len(r) for r in res.rounds]})
    else:
        emit({"rounds": rounds, "added_per_round": [len(r) for r in res.rounds], **doc})
    return EXIT_OK


@main.command("lnf")
@alphabet_opt
@example_opt
@click.argument("word")
@guarded
def lnf_cmd(alphabet_path, example, word):
    """Print the lexicographic normal form of WORD."""
    alpha, _ = load_workspace(alphabet_path, None, example)
    click.echo(word_str(lnf(alpha, parse_word(alpha, word))))
    return EXIT_OK


@main.command()
@alphabet_opt
@example_opt
@click.argument("u")
@click.argument("v")
@guarded
def equiv(alphabet_path, example, u, v):
    """Decide whether U and V denote the same trace."""
    alpha, _ = load_workspace(alphabet_path, None, example)
    same = equivalent(alpha, parse_word(alpha, u), parse_word(alpha, v))
    click.echo("true" if same else "false")
    return EXIT_OK if same else EXIT_FALSE


@main.command("check-closed")
@alphabet_opt
@click.option("--nfa", "nfa_path", type=click.Path(), required=True)
@guarded
def check_closed(alphabet_path, nfa_path):
    """Decide whether an automaton's language is closed under commutation."""
    alpha, _ = load_workspace(alphabet_path)
    nfa = load_nfa(alpha, nfa_path)
    if automata.is_closed(nfa):
        click.echo("closed")
        return EXIT_OK
    bad = automata.closure_violation(nfa)
    click.echo("not closed")
    if bad is not None:
        rejected, accepted = bad
        click.echo(dump({"accepted": word_str(accepted), "rejected": word_str(rejected)}))
    return EXIT_FALSE


@main.command("check-leftclosed")
@alphabet_opt
@click.option("--transducer", "transducer_path", type=click.Path(), required=True)
@click.option("--maxlen", type=int, default=3, show_default=True)
@click.option("--stretch", type=int, default=2, show_default=True, help="Extra output length allowed.")
@jobs_opt
@guarded
def check_leftclosed(alphabet_path, transducer_path, maxlen, stretch, jobs):
    """Bounded check of left-closure for a transducer."""
    alpha, _ = load_workspace(alphabet_path)
    t = transducer.transducer_from_json(alpha, read_json(transducer_path))
    res = transducer.is_left_closed_bruteforce(t, maxlen, stretch=stretch)
    if res:
        click.echo(f"left-closed up to length {maxlen}")
        return EXIT_OK
    u, u2, v2 = res.counterexample
    click.echo("not left-closed")
    click.echo(dump({"u": word_str(u), "u_equivalent": word_str(u2), "output": word_str(v2)}))
    return EXIT_FALSE


@main.command()
@alphabet_opt
@system_opt
@example_opt
@src_opt
@dst_opt
@click.option("--pair", nargs=2, multiple=True, help="Membership query U V (repeatable).")
@click.option("--max-states", type=int, default=reach.DEFAULT_MATERIALIZE_LIMIT, show_default=True)
@out_opt
@jobs_opt
@guarded
def relation(alphabet_path, system_path, example, src, dst, pair, max_states, out, jobs):
    """Reachability relation from SRC to DST: membership queries or the transducer."""
    alpha, system = load_workspace(alphabet_path, system_path, example)
    rel = reach.reach_relation(require_system(system), src, dst)
    if pair:
        answers = []
        for u, v in pair:
            wu, wv = parse_word(alpha, u), parse_word(alpha, v)
            answers.append({"u": word_str(wu), "v": word_str(wv), "member": rel.contains(wu, wv)})
        emit(answers, out)
        return EXIT_OK if all(a["member"] for a in answers) else EXIT_FALSE
    emit(transducer.transducer_to_json(rel.transducer.materialize(max_states)), out)
    return EXIT_OK


def _star(kind, alphabet_path, system_path, example, src, dst, nfa_path, out):
    alpha, system = load_workspace(alphabet_path, system_path, example)
    system = require_system(system)
    nfa = load_nfa(alpha, nfa_path)
    if kind == "pre":
        res = reach.pre_star(system, src, dst, nfa)
    else:
        res = reach.post_star(system, src, dst, nfa)
    emit(automata.nfa_to_json(reach.compact(res)), out)
    return EXIT_OK


@main.command()
@alphabet_opt
@system_opt
@example_opt
@src_opt
@dst_opt
@click.option("--nfa", "nfa_path", type=click.Path(), required=True, help="Closed target automaton.")
@out_opt
@jobs_opt
@guarded
def prestar(alphabet_path, system_path, example, src, dst, nfa_path, out, jobs):
    """Stacks at SRC from which DST with a stack in L(NFA) is reachable."""
    return _star("pre", alphabet_path, system_path, example, src, dst, nfa_path, out)


@main.command()
@alphabet_opt
@system_opt
@example_opt
@src_opt
@dst_opt
@click.option("--nfa", "nfa_path", type=click.Path(), required=True, help="Source automaton.")
@out_opt
@jobs_opt
@guarded
def poststar(alphabet_path, system_path, example, src, dst, nfa_path, out, jobs):
    """Stacks at DST reachable from SRC with a stack in L(NFA)."""
    return _star("post", alphabet_path, system_path, example, src, dst, nfa_path, out)


@main.command()
@alphabet_opt
@system_opt
@example_opt
@click.option("--from", "sources", multiple=True, help="Source configuration STATE:WORD (repeatable).")
@click.option("--to", "targets", multiple=True, help="Target configuration STATE:WORD (repeatable).")
@click.option("--from-nfa", "source_nfas", multiple=True, help="STATE:PATH source automaton (repeatable).")
@click.option("--to-nfa", "target_nfas", multiple=True, help="STATE:PATH closed target automaton (repeatable).")
@jobs_opt
@guarded
def decide(alphabet_path, system_path, example, sources, targets, source_nfas, target_nfas, jobs):
    """Print REACHABLE or UNREACHABLE for the given configuration sets."""
    alpha, system = load_workspace(alphabet_path, system_path, example)
    system = require_system(system)
    src = configs_to_nfas(alpha, [parse_config(alpha, s) for s in sources])
    dst = configs_to_nfas(alpha, [parse_config(alpha, s) for s in targets])
    for k, v in state_nfa_pairs(alpha, source_nfas).items():
        src[k] = automata.union(src[k], v) if k in src else v
    for k, v in state_nfa_pairs(alpha, target_nfas).items():
        dst[k] = automata.union(dst[k], v) if k in dst else v
    if not src or not dst:
        raise CliInputError("give at least one source and one target")
    verdict = reach.decide_reach(system, src, dst)
    if verdict:
        click.echo("REACHABLE")
        return EXIT_OK
    click.echo("UNREACHABLE")
    return EXIT_FALSE


@main.command()
@alphabet_opt
@system_opt
@example_opt
@click.option("--config", "start", required=True, help="Start configuration STATE:WORD.")
@click.option("--max-stack", type=int, default=8, show_default=True)
@click.option("--max-steps", type=int, default=None)
@click.option("--dot", is_flag=True, help="Emit the bounded configuration graph in DOT.")
@out_opt
@guarded
def oracle(alphabet_path, system_path, example, start, max_stack, max_steps, dot, out):
    """Configurations reachable by runs whose stacks stay within --max-stack."""
    alpha, system = load_workspace(alphabet_path, system_path, example)
    system = require_system(system)
    c = parse_config(alpha, start)
    if dot:
        nodes, edges = tpds.config_graph(system, c, max_stack)
        lines = ["digraph configs {"]
        for n in sorted(nodes, key=lambda d: (d.state, len(d.stack), alpha.sort_key(d.stack))):
            lines.append(f'  "{n}";')
        for d, e in edges:
            lines.append(f'  "{d}" -> "{e}";')
        lines.append("}")
        text = "\n".join(lines) + "\n"
        if out:
            with open(out, "w") as fh:
                fh.write(text)
        else:
            click.echo(text, nl=False)
        return EXIT_OK
    found = tpds.reach_oracle(system, c, max_stack, max_steps)
    ordered = sorted(found, key=lambda d: (d.state, len(d.stack), alpha.sort_key(d.stack)))
    emit([config_doc(d) for d in ordered], out)
    return EXIT_OK


@main.command()
@alphabet_opt
@click.option("--nfa", "nfa_path", type=click.Path(), required=True)
@out_opt
@guarded
def realize(alphabet_path, nfa_path, out):
    """Build a one-state system whose post* realizes the automaton's trace language."""
    alpha, _ = load_workspace(alphabet_path)
    res = reach.realize_rational(load_nfa(alpha, nfa_path))
    emit(
        {
            "alphabet": res.alphabet.to_json(),
            "system": res.system.to_json(),
            "start": config_doc(res.start),
            "target": res.target,
            "state_letters": {str(k): v for k, v in sorted(res.state_letters.items())},
        },
        out,
    )
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    main()

"""Batch command-line front end for order checks, closures, and reports.

Exit codes follow one convention across subcommands: 0 for a positive
result (related, equal, or plain success), 1 for a negative result,
2 for any usage, parse, or resource error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .automata import (
    Nfa,
    closure_regular,
    nfa_enumerate,
    nfa_parse,
    nfa_serialize,
    nfa_to_dot,
)
from .cfg import (
    Cfg,
    cfg_block_closure,
    cfg_enumerate,
    cfg_parse,
    cfg_priority_closure,
    cfg_to_dot,
)
from .core import (
    OrderKind,
    PriorityAlphabet,
    ResourceLimit,
    format_word,
    leq,
    parse_word,
)
from .oca import (
    AcceptMode,
    CounterOp,
    Oca,
    SimpleOca,
    oca_block_closure,
    oca_enumerate,
    oca_parse,
    oca_priority_closure,
    oca_to_dot,
    soca_closure_nfa,
)
from .oracle import compare_closure

DEFAULT_STATE_CAP = 1_000_000


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load_alphabet(path: str) -> PriorityAlphabet:
    with open(path, encoding="utf-8") as fh:
        return PriorityAlphabet.from_json(fh.read())


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _parse_simple_oca(data, alphabet: PriorityAlphabet) -> SimpleOca:
    try:
        edges = tuple(
            (src, label, CounterOp(op), dst)
            for src, label, op, dst in (tuple(e) for e in data["edges"])
        )
        return SimpleOca(
            alphabet, tuple(data["states"]), edges, data["initial"], data["final"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed simple counter automaton: {exc}") from exc


def _parse_model(kind: str, data, alphabet: PriorityAlphabet):
    if kind == "nfa":
        return nfa_parse(data, alphabet)
    if kind == "cfg":
        return cfg_parse(data, alphabet)
    if isinstance(data, dict) and data.get("simple"):
        return _parse_simple_oca(data, alphabet)
    return oca_parse(data, alphabet)


def _zeroed(alphabet: PriorityAlphabet) -> PriorityAlphabet:
    return PriorityAlphabet(tuple((a, 0) for a in alphabet.letters))


def _retag(nfa: Nfa, alphabet: PriorityAlphabet) -> Nfa:
    return Nfa(alphabet, nfa.states, nfa.edges, nfa.initial, nfa.finals)


def _as_oca(machine: SimpleOca) -> Oca:
    return Oca(
        machine.alphabet,
        machine.states,
        machine.edges,
        machine.initial,
        (machine.final,),
        AcceptMode.ZERO_COUNTER,
    )


def _oca_block(machine: Oca | SimpleOca) -> Nfa:
    if isinstance(machine, SimpleOca):
        return closure_regular(soca_closure_nfa(machine), OrderKind.BLOCK)
    return oca_block_closure(machine)


def _with_alphabet(model, alphabet: PriorityAlphabet):
    if isinstance(model, Nfa):
        return _retag(model, alphabet)
    if isinstance(model, SimpleOca):
        return SimpleOca(
            alphabet, model.states, model.edges, model.initial, model.final
        )
    if isinstance(model, Oca):
        return Oca(
            alphabet,
            model.states,
            model.edges,
            model.initial,
            model.finals,
            model.accept_mode,
        )
    return Cfg(alphabet, model.nonterminals, model.productions, model.start)


def build_closure(kind: str, order: OrderKind, model, state_cap: int) -> Nfa:
    """Closure automaton for a parsed model under the requested order."""
    alphabet = model.alphabet
    if order is OrderKind.SUBWORD:
        # The block order on an all-zero alphabet is the subword order,
        # so the subword closure rides on the block construction.
        flat = build_closure(
            kind, OrderKind.BLOCK, _with_alphabet(model, _zeroed(alphabet)), state_cap
        )
        return _retag(flat, alphabet)
    if kind == "nfa":
        return closure_regular(model, order)
    if kind == "oca":
        if order is OrderKind.BLOCK:
            return _oca_block(model)
        machine = _as_oca(model) if isinstance(model, SimpleOca) else model
        return oca_priority_closure(machine)
    if order is OrderKind.BLOCK:
        return cfg_block_closure(model, state_cap)
    return cfg_priority_closure(model, state_cap)


def _enumerate_words(kind: str, model, bound: int, counter_cap: int | None):
    if kind == "nfa":
        return nfa_enumerate(model, bound)
    if kind == "oca":
        return oca_enumerate(model, bound, counter_cap)
    return cfg_enumerate(model, bound)


def cmd_check_order(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    left = alphabet.validate_word(parse_word(args.left))
    right = alphabet.validate_word(parse_word(args.right))
    related = leq(alphabet, OrderKind(args.order), left, right)
    print("true" if related else "false")
    return 0 if related else 1


def cmd_closure(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    model = _parse_model(args.type, _load_json(args.input), alphabet)
    start = time.monotonic()
    closed = build_closure(args.type, OrderKind(args.order), model, args.state_cap)
    elapsed = time.monotonic() - start
    _write_text(args.output, _dump_json(nfa_serialize(closed)))
    if args.dot:
        _write_text(args.dot, nfa_to_dot(closed))
    print(f"states={len(closed.states)} seconds={elapsed:.3f}")
    return 0


def cmd_verify(args) -> int:
    if args.bound < 0:
        raise ValueError("bound must be nonnegative")
    dom_bound = args.dom_bound if args.dom_bound is not None else 2 * args.bound
    if dom_bound < args.bound:
        raise ValueError("dominator bound must be at least the comparison bound")
    alphabet = _load_alphabet(args.alphabet)
    model = _parse_model(args.type, _load_json(args.input), alphabet)
    closed = build_closure(args.type, OrderKind(args.order), model, args.state_cap)
    report = compare_closure(
        model,
        OrderKind(args.order),
        closed,
        args.bound,
        dom_bound,
        model_id=os.path.basename(args.input),
    )
    if args.output:
        _write_text(args.output, _dump_json(report.to_json()))
    print(
        f"equal={'true' if report.equal else 'false'} "
        f"missing={len(report.missing_words)} extra={len(report.extra_words)}"
    )
    return 0 if report.equal else 1


def cmd_enumerate(args) -> int:
    if args.bound < 0:
        raise ValueError("bound must be nonnegative")
    alphabet = _load_alphabet(args.alphabet)
    model = _parse_model(args.type, _load_json(args.input), alphabet)
    for word in _enumerate_words(args.type, model, args.bound, args.counter_cap):
        print(format_word(word))
    return 0


def cmd_render(args) -> int:
    alphabet = _load_alphabet(args.alphabet)
    model = _parse_model(args.type, _load_json(args.input), alphabet)
    if isinstance(model, Nfa):
        text = nfa_to_dot(model)
    elif isinstance(model, (Oca, SimpleOca)):
        machine = _as_oca(model) if isinstance(model, SimpleOca) else model
        text = oca_to_dot(machine)
    else:
        text = cfg_to_dot(model)
    target = args.output or args.dot
    _write_text(target, text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prioclose",
        description="Downward closures of automata and grammars under "
        "subword, priority, and block orders.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_order=True):
        p.add_argument("--alphabet", required=True, help="alphabet JSON path")
        p.add_argument(
            "--type", required=True, choices=("nfa", "oca", "cfg"), help="input kind"
        )
        p.add_argument("--input", required=True, help="model JSON path")
        if with_order:
            p.add_argument(
                "--order",
                required=True,
                choices=("subword", "priority", "block"),
                help="word order",
            )

    p = sub.add_parser("check-order", help="decide whether one word lies below another")
    p.add_argument("--alphabet", required=True, help="alphabet JSON path")
    p.add_argument(
        "--order",
        required=True,
        choices=("subword", "priority", "block"),
        help="word order",
    )
    p.add_argument("left", help="candidate smaller word, comma-separated tokens")
    p.add_argument("right", help="candidate larger word, comma-separated tokens")
    p.set_defaults(run=cmd_check_order)

    p = sub.add_parser("closure", help="construct a closure automaton")
    add_common(p)
    p.add_argument("--output", required=True, help="closure NFA JSON path")
    p.add_argument("--dot", help="optional Graphviz output path")
    p.add_argument(
        "--state-cap",
        type=int,
        default=DEFAULT_STATE_CAP,
        help="abort if an intermediate automaton exceeds this many states",
    )
    p.set_defaults(run=cmd_closure)

    p = sub.add_parser("verify", help="compare a closure against the brute oracle")
    add_common(p)
    p.add_argument("--output", help="optional report JSON path")
    p.add_argument("--bound", type=int, default=6, help="comparison length bound")
    p.add_argument(
        "--dom-bound",
        type=int,
        default=None,
        help="model enumeration depth (default: twice the bound)",
    )
    p.add_argument(
        "--state-cap",
        type=int,
        default=DEFAULT_STATE_CAP,
        help="abort if an intermediate automaton exceeds this many states",
    )
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("enumerate", help="list accepted words up to a length bound")
    add_common(p, with_order=False)
    p.add_argument("--bound", type=int, required=True, help="length bound")
    p.add_argument(
        "--counter-cap",
        type=int,
        default=None,
        help="counter ceiling for counter automata (default: derived)",
    )
    p.set_defaults(run=cmd_enumerate)

    p = sub.add_parser("render", help="write a Graphviz sketch of a model")
    add_common(p, with_order=False)
    p.add_argument("--output", help="Graphviz output path")
    p.add_argument("--dot", help="alias for --output")
    p.set_defaults(run=cmd_render)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "run", None) is cmd_render and not (args.output or args.dot):
        parser.error("render requires --output (or --dot)")
    try:
        return args.run(args)
    except ResourceLimit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

"""One-counter automata and their downward-closure constructions.

The closure NFA tracks counter values inside its state space up to a
polynomial cap; the bounded semantics used by tests and oracles caps
them explicitly instead.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .automata import (
    Nfa,
    _canonical,
    _tag,
    apply_transduction,
    closure_regular,
    nfa_for_words,
    nfa_intersect,
    nfa_union,
    priority_transducer,
)
from .core import OrderKind, PriorityAlphabet, Word, flatten


class CounterOp(str, Enum):
    INC = "inc"
    DEC = "dec"
    NOOP = "noop"
    ZERO = "zero"


class AcceptMode(str, Enum):
    ANY_COUNTER = "anyCounter"
    ZERO_COUNTER = "zeroCounter"


OcaEdge = tuple[str, str | None, CounterOp, str]


def _normalize_edges(edges, states, letters, allow_zero):
    known = set(states)
    out = []
    for src, label, op, dst in edges:
        op = CounterOp(op)
        if src not in known or dst not in known:
            raise ValueError(f"edge ({src!r}, {label!r}, {op.value}, {dst!r}) uses unknown state")
        if label is not None and label not in letters:
            raise ValueError(f"edge label {label!r} not in alphabet")
        if op is CounterOp.ZERO and not allow_zero:
            raise ValueError("zero tests are not allowed here")
        out.append((src, label, op, dst))
    return tuple(sorted(set(out), key=lambda e: (e[0], e[1] is not None, e[1] or "", e[2].value, e[3])))


@dataclass(frozen=True)
class Oca:
    """One-counter automaton; counter ops inc/dec/noop/zero per edge.

    acceptMode anyCounter accepts in a final state regardless of the
    counter; zeroCounter additionally requires counter value zero.
    """

    alphabet: PriorityAlphabet
    states: tuple[str, ...]
    edges: tuple[OcaEdge, ...]
    initial: str
    finals: tuple[str, ...]
    accept_mode: AcceptMode = AcceptMode.ANY_COUNTER

    def __post_init__(self) -> None:
        states = tuple(sorted(set(self.states)))
        if self.initial not in states:
            raise ValueError(f"initial state {self.initial!r} not in states")
        finals = tuple(sorted(set(self.finals)))
        for f in finals:
            if f not in states:
                raise ValueError(f"final state {f!r} not in states")
        edges = _normalize_edges(
            self.edges, states, set(self.alphabet.letters), allow_zero=True
        )
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "finals", finals)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "accept_mode", AcceptMode(self.accept_mode))


@dataclass(frozen=True)
class SimpleOca:
    """Counter automaton without zero tests; a single final state, and
    acceptance requires the counter to be zero there."""

    alphabet: PriorityAlphabet
    states: tuple[str, ...]
    edges: tuple[OcaEdge, ...]
    initial: str
    final: str

    def __post_init__(self) -> None:
        states = tuple(sorted(set(self.states)))
        if self.initial not in states:
            raise ValueError(f"initial state {self.initial!r} not in states")
        if self.final not in states:
            raise ValueError(f"final state {self.final!r} not in states")
        edges = _normalize_edges(
            self.edges, states, set(self.alphabet.letters), allow_zero=False
        )
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "edges", edges)


def _machine_parts(machine: Oca | SimpleOca):
    if isinstance(machine, SimpleOca):
        return (
            machine.alphabet,
            machine.states,
            machine.edges,
            machine.initial,
            (machine.final,),
            AcceptMode.ZERO_COUNTER,
        )
    return (
        machine.alphabet,
        machine.states,
        machine.edges,
        machine.initial,
        machine.finals,
        machine.accept_mode,
    )


def _oca_adjacency(edges):
    adj: dict[str, list] = {}
    for src, label, op, dst in edges:
        adj.setdefault(src, []).append((label, op, dst))
    return adj


def _counter_cap(n_states: int, length: int) -> int:
    # soundness margin: pure-drain segments of a normalized run never
    # climb more than quadratically above the letter positions
    return n_states * n_states * (length + 2) + n_states + 1


def _apply_op(op: CounterOp, counter: int, cap: int) -> int | None:
    if op is CounterOp.INC:
        return counter + 1 if counter < cap else None
    if op is CounterOp.DEC:
        return counter - 1 if counter > 0 else None
    if op is CounterOp.ZERO:
        return 0 if counter == 0 else None
    return counter


def oca_accepts_bounded(
    machine: Oca | SimpleOca, word: Iterable[str], counter_cap: int | None = None
) -> bool:
    """Whether an accepting run on the word keeps the counter <= cap."""
    word = tuple(word)
    _, states, edges, initial, finals, mode = _machine_parts(machine)
    if counter_cap is None:
        counter_cap = _counter_cap(len(states), len(word))
    adj = _oca_adjacency(edges)
    final_set = set(finals)

    def accepting(state: str, pos: int, counter: int) -> bool:
        if pos != len(word) or state not in final_set:
            return False
        return mode is AcceptMode.ANY_COUNTER or counter == 0

    start = (initial, 0, 0)
    seen = {start}
    queue = deque([start])
    while queue:
        state, pos, counter = queue.popleft()
        if accepting(state, pos, counter):
            return True
        for label, op, dst in adj.get(state, ()):
            if label is not None and (pos >= len(word) or word[pos] != label):
                continue
            nxt_counter = _apply_op(op, counter, counter_cap)
            if nxt_counter is None:
                continue
            nxt = (dst, pos if label is None else pos + 1, nxt_counter)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def oca_enumerate(
    machine: Oca | SimpleOca, bound: int, counter_cap: int | None = None
) -> list[Word]:
    """Accepted words of length <= bound, sorted by length then tokens."""
    _, states, edges, initial, finals, mode = _machine_parts(machine)
    if counter_cap is None:
        counter_cap = _counter_cap(len(states), bound)
    adj = _oca_adjacency(edges)
    final_set = set(finals)

    def close(configs: frozenset) -> frozenset:
        seen = set(configs)
        stack = list(configs)
        while stack:
            state, counter = stack.pop()
            for label, op, dst in adj.get(state, ()):
                if label is not None:
                    continue
                nxt_counter = _apply_op(op, counter, counter_cap)
                if nxt_counter is None or (dst, nxt_counter) in seen:
                    continue
                seen.add((dst, nxt_counter))
                stack.append((dst, nxt_counter))
        return frozenset(seen)

    def accepted(configs: frozenset) -> bool:
        for state, counter in configs:
            if state in final_set and (
                mode is AcceptMode.ANY_COUNTER or counter == 0
            ):
                return True
        return False

    letters = machine.alphabet.letters
    frontier: dict[Word, frozenset] = {(): close(frozenset([(initial, 0)]))}
    found: list[Word] = []
    for _ in range(bound + 1):
        for word in sorted(frontier):
            if accepted(frontier[word]):
                found.append(word)
        nxt: dict[Word, frozenset] = {}
        for word, configs in frontier.items():
            for letter in letters:
                stepped = set()
                for state, counter in configs:
                    for label, op, dst in adj.get(state, ()):
                        if label != letter:
                            continue
                        nxt_counter = _apply_op(op, counter, counter_cap)
                        if nxt_counter is not None:
                            stepped.add((dst, nxt_counter))
                if stepped:
                    nxt[word + (letter,)] = close(frozenset(stepped))
        frontier = nxt
        if not frontier:
            break
    return sorted(set(found), key=lambda w: (len(w), w))


def soca_closure_nfa(soca: SimpleOca) -> Nfa:
    """Three-mode NFA sandwiched between the language and its block closure.

    Mode 1 simulates exactly while the counter stays <= K; the increment
    crossing K switches to mode 2, which tracks it up to U = K^2+K+1 and
    may additionally run spontaneous state loops that ignore counter
    updates; a decrement from K+1 may switch to mode 3, which again
    simulates exactly below K.  Spontaneous loops store the counter they
    froze so returning cannot jump it.
    """
    k = len(soca.states)
    cap_u = k * k + k + 1

    def m1(q: str, c: int) -> str:
        return f"m1:{q}:{c}"

    def m2(q: str, c: int) -> str:
        return f"m2:{q}:{c}"

    def m3(q: str, c: int) -> str:
        return f"m3:{q}:{c}"

    def walk(q: str, anchor: str, c: int) -> str:
        return f"w:{q}:{anchor}:{c}"

    states: list[str] = []
    for q in soca.states:
        states.extend(m1(q, c) for c in range(k + 1))
        states.extend(m3(q, c) for c in range(k + 1))
        states.extend(m2(q, c) for c in range(cap_u + 1))
        for anchor in soca.states:
            states.extend(walk(q, anchor, c) for c in range(cap_u + 1))

    edges: list[tuple[str, str | None, str]] = []
    for src, label, op, dst in soca.edges:
        for c in range(k + 1):
            if op is CounterOp.INC:
                target = m1(dst, c + 1) if c < k else m2(dst, k + 1)
                edges.append((m1(src, c), label, target))
            elif op is CounterOp.DEC:
                if c > 0:
                    edges.append((m1(src, c), label, m1(dst, c - 1)))
            else:
                edges.append((m1(src, c), label, m1(dst, c)))
        for c in range(cap_u + 1):
            if op is CounterOp.INC:
                if c < cap_u:
                    edges.append((m2(src, c), label, m2(dst, c + 1)))
            elif op is CounterOp.DEC:
                if c > 0:
                    edges.append((m2(src, c), label, m2(dst, c - 1)))
                if c == k + 1:
                    # nondeterministic door into the exact final descent
                    edges.append((m2(src, c), label, m3(dst, k)))
            else:
                edges.append((m2(src, c), label, m2(dst, c)))
        for c in range(k + 1):
            if op is CounterOp.INC:
                if c < k:
                    edges.append((m3(src, c), label, m3(dst, c + 1)))
            elif op is CounterOp.DEC:
                if c > 0:
                    edges.append((m3(src, c), label, m3(dst, c - 1)))
            else:
                edges.append((m3(src, c), label, m3(dst, c)))
        # spontaneous loops read letters but ignore counter updates
        for anchor in soca.states:
            for c in range(cap_u + 1):
                edges.append((walk(src, anchor, c), label, walk(dst, anchor, c)))
    for q in soca.states:
        for c in range(cap_u + 1):
            edges.append((m2(q, c), None, walk(q, q, c)))
            edges.append((walk(q, q, c), None, m2(q, c)))

    return _canonical(
        Nfa(
            soca.alphabet,
            tuple(states),
            tuple(edges),
            m1(soca.initial, 0),
            (m1(soca.final, 0), m3(soca.final, 0)),
        )
    )


def _trim_soca(soca: SimpleOca) -> SimpleOca | None:
    """Restrict to states on some initial-to-final path, or None."""
    fwd: dict[str, set[str]] = {}
    bwd: dict[str, set[str]] = {}
    for src, _, _, dst in soca.edges:
        fwd.setdefault(src, set()).add(dst)
        bwd.setdefault(dst, set()).add(src)

    def reach(adj, start):
        seen = {start}
        stack = [start]
        while stack:
            q = stack.pop()
            for nxt in adj.get(q, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    keep = reach(fwd, soca.initial) & reach(bwd, soca.final)
    if soca.initial not in keep or soca.final not in keep:
        return None
    edges = tuple(
        e for e in soca.edges if e[0] in keep and e[3] in keep
    )
    return SimpleOca(soca.alphabet, tuple(keep), edges, soca.initial, soca.final)


def _glue_nfa(oca: Oca) -> Nfa:
    """Skeleton of zero tests with closure-approximating pieces glued in.

    Pieces are the three-mode NFAs of the zero-test-free fragments
    between zero configurations; anyCounter acceptance routes drained
    variants (a spontaneous discarding decrement at the final state)
    into one fresh global final.
    """
    alphabet = oca.alphabet
    zero_free = tuple(e for e in oca.edges if e[2] is not CounterOp.ZERO)
    zero_edges = tuple(e for e in oca.edges if e[2] is CounterOp.ZERO)

    sources = {oca.initial} | {dst for _, _, _, dst in zero_edges}
    sinks = {src for src, _, _, _ in zero_edges}
    if oca.accept_mode is AcceptMode.ZERO_COUNTER:
        sinks |= set(oca.finals)

    def skeleton(q: str) -> str:
        return f"z:{q}"

    states: list[str] = [skeleton(q) for q in oca.states]
    edges: list[tuple[str, str | None, str]] = [
        (skeleton(src), label, skeleton(dst)) for src, label, _, dst in zero_edges
    ]
    finals: list[str] = []

    pieces: list[tuple[str, SimpleOca, str | None]] = []
    for p in sorted(sources):
        for q in sorted(sinks):
            pieces.append((p, SimpleOca(alphabet, oca.states, zero_free, p, q), skeleton(q)))
    if oca.accept_mode is AcceptMode.ANY_COUNTER:
        states.append("acc")
        finals.append("acc")
        for p in sorted(sources):
            for f in oca.finals:
                drained = zero_free + ((f, None, CounterOp.DEC, f),)
                pieces.append((p, SimpleOca(alphabet, oca.states, drained, p, f), "acc"))
    else:
        finals.extend(skeleton(f) for f in oca.finals)

    for i, (entry, soca, exit_state) in enumerate(pieces):
        trimmed = _trim_soca(soca)
        if trimmed is None:
            continue
        piece = _tag(soca_closure_nfa(trimmed), f"g{i}")
        states.extend(piece.states)
        edges.extend(piece.edges)
        edges.append((skeleton(entry), None, piece.initial))
        edges.extend((f, None, exit_state) for f in piece.finals)

    return _canonical(
        Nfa(
            alphabet,
            tuple(states),
            tuple(edges),
            skeleton(oca.initial),
            tuple(finals),
        )
    )


def oca_block_closure(oca: Oca) -> Nfa:
    """NFA for the block downward closure of the OCA language."""
    return closure_regular(_glue_nfa(oca), OrderKind.BLOCK)


def _last_letter_nfa(alphabet: PriorityAlphabet, letter: str) -> Nfa:
    edges = [("s0", a, "s0") for a in alphabet.letters]
    edges.append(("s0", letter, "s1"))
    return Nfa(alphabet, ("s0", "s1"), tuple(edges), "s0", ("s1",))


def _last_letter_oca(oca: Oca, letter: str) -> Oca:
    """Product with the two-state tracker of whether the last letter
    read so far is the chosen one."""

    def name(q: str, bit: int) -> str:
        return f"{q}~{bit}"

    states = tuple(name(q, bit) for q in oca.states for bit in (0, 1))
    edges = []
    for src, label, op, dst in oca.edges:
        for bit in (0, 1):
            nxt = bit if label is None else (1 if label == letter else 0)
            edges.append((name(src, bit), label, op, name(dst, nxt)))
    return Oca(
        oca.alphabet,
        states,
        tuple(edges),
        name(oca.initial, 0),
        tuple(name(f, 1) for f in oca.finals),
        oca.accept_mode,
    )


def _with_alphabet_nfa(nfa: Nfa, alphabet: PriorityAlphabet) -> Nfa:
    return Nfa(alphabet, nfa.states, nfa.edges, nfa.initial, nfa.finals)


def _with_alphabet_oca(oca: Oca, alphabet: PriorityAlphabet) -> Oca:
    return Oca(alphabet, oca.states, oca.edges, oca.initial, oca.finals, oca.accept_mode)


def oca_priority_closure(oca: Oca) -> Nfa:
    """NFA for the priority downward closure of the OCA language.

    Per last letter: intersect with words ending in it, re-prioritize
    with the flattened alphabet, take the block closure there (guarded
    on both sides by the last-letter constraint, which the absorbing
    closure step does not preserve by itself), then map the result
    through the priority transducer of the original alphabet.
    """
    alphabet = oca.alphabet
    flat = flatten(alphabet)
    pieces: list[Nfa] = []
    for letter in alphabet.letters:
        lifted = _with_alphabet_oca(_last_letter_oca(oca, letter), flat)
        glue = nfa_intersect(_glue_nfa(lifted), _last_letter_nfa(flat, letter))
        closed = closure_regular(glue, OrderKind.BLOCK)
        closed = nfa_intersect(closed, _last_letter_nfa(flat, letter))
        retagged = _with_alphabet_nfa(closed, alphabet)
        pieces.append(apply_transduction(priority_transducer(alphabet), retagged))
    if oca_accepts_bounded(oca, (), counter_cap=len(oca.states) ** 2):
        pieces.append(nfa_for_words(alphabet, [()]))
    if not pieces:
        return nfa_for_words(alphabet, [])
    out = pieces[0]
    for piece in pieces[1:]:
        out = nfa_union(out, piece)
    return out


def oca_serialize(oca: Oca) -> dict:
    return {
        "states": list(oca.states),
        "initial": oca.initial,
        "finals": list(oca.finals),
        "acceptMode": oca.accept_mode.value,
        "edges": [[src, label, op.value, dst] for src, label, op, dst in oca.edges],
    }


def oca_parse(data: Mapping, alphabet: PriorityAlphabet) -> Oca:
    try:
        states = tuple(data["states"])
        initial = data["initial"]
        finals = tuple(data["finals"])
        mode = data["acceptMode"]
        raw_edges = data["edges"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed oca data: {exc}") from exc
    try:
        mode = AcceptMode(mode)
    except ValueError as exc:
        raise ValueError(f"unknown acceptMode {mode!r}") from exc
    edges = []
    for item in raw_edges:
        if len(item) != 4:
            raise ValueError(f"malformed edge {item!r}")
        src, label, op, dst = item
        try:
            op = CounterOp(op)
        except ValueError as exc:
            raise ValueError(f"unknown counter op {op!r}") from exc
        edges.append((src, label, op, dst))
    return Oca(alphabet, states, tuple(edges), initial, finals, mode)


def oca_to_dot(oca: Oca, name: str = "oca") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=none, label=""];']
    finals = set(oca.finals)
    for q in oca.states:
        shape = "doublecircle" if q in finals else "circle"
        lines.append(f'  "{q}" [shape={shape}];')
    lines.append(f'  __start -> "{oca.initial}";')
    for src, label, op, dst in oca.edges:
        text = label if label is not None else "&epsilon;"
        lines.append(f'  "{src}" -> "{dst}" [label="{text} / {op.value}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

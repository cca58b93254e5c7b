"""Finite automata, letter transducers, and regular downward closures.

NFAs carry their priority alphabet.  Epsilon edges use the label ``None``.
Transducers read and write at most one letter per edge; applying one to
an NFA is a plain product construction, and all three closure operators
are expressed that way.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .core import (
    OrderKind,
    PriorityAlphabet,
    ResourceLimit,
    Word,
    format_word,
)

Edge = tuple[str, str | None, str]


def _edge_key(edge: Edge) -> tuple:
    src, label, dst = edge
    return (src, label is not None, label or "", dst)


@dataclass(frozen=True)
class Nfa:
    """Nondeterministic finite automaton over a priority alphabet."""

    alphabet: PriorityAlphabet
    states: tuple[str, ...]
    edges: tuple[Edge, ...]
    initial: str
    finals: tuple[str, ...]

    def __post_init__(self) -> None:
        states = tuple(sorted(set(self.states)))
        known = set(states)
        letters = set(self.alphabet.letters)
        if self.initial not in known:
            raise ValueError(f"initial state {self.initial!r} not in states")
        finals = tuple(sorted(set(self.finals)))
        for f in finals:
            if f not in known:
                raise ValueError(f"final state {f!r} not in states")
        edges = tuple(sorted(set(self.edges), key=_edge_key))
        for src, label, dst in edges:
            if src not in known or dst not in known:
                raise ValueError(f"edge ({src!r}, {label!r}, {dst!r}) uses unknown state")
            if label is not None and label not in letters:
                raise ValueError(f"edge label {label!r} not in alphabet")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "finals", finals)
        object.__setattr__(self, "edges", edges)


@dataclass(frozen=True)
class Transducer:
    """Letter-to-letter transducer; edges consume and emit <= 1 letter."""

    alphabet: PriorityAlphabet
    states: tuple[str, ...]
    edges: tuple[tuple[str, Word, Word, str], ...]
    initial: str
    finals: tuple[str, ...]

    def __post_init__(self) -> None:
        states = tuple(sorted(set(self.states)))
        known = set(states)
        letters = set(self.alphabet.letters)
        if self.initial not in known:
            raise ValueError(f"initial state {self.initial!r} not in states")
        finals = tuple(sorted(set(self.finals)))
        for f in finals:
            if f not in known:
                raise ValueError(f"final state {f!r} not in states")
        edges = tuple(sorted(set(self.edges)))
        for src, consumed, emitted, dst in edges:
            if src not in known or dst not in known:
                raise ValueError("transducer edge uses unknown state")
            for part in (consumed, emitted):
                if len(part) > 1 or any(tok not in letters for tok in part):
                    raise ValueError(f"bad transducer edge word {part!r}")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "finals", finals)
        object.__setattr__(self, "edges", edges)


def _adjacency(nfa: Nfa) -> dict[str, list[tuple[str | None, str]]]:
    adj: dict[str, list[tuple[str | None, str]]] = {q: [] for q in nfa.states}
    for src, label, dst in nfa.edges:
        adj[src].append((label, dst))
    return adj


def _eps_closure(adj, states: Iterable[str]) -> frozenset[str]:
    seen = set(states)
    stack = list(seen)
    while stack:
        q = stack.pop()
        for label, dst in adj[q]:
            if label is None and dst not in seen:
                seen.add(dst)
                stack.append(dst)
    return frozenset(seen)


def _step(adj, states: frozenset[str], letter: str) -> frozenset[str]:
    nxt = {dst for q in states for label, dst in adj[q] if label == letter}
    return _eps_closure(adj, nxt)


def nfa_accepts(nfa: Nfa, word: Iterable[str]) -> bool:
    adj = _adjacency(nfa)
    current = _eps_closure(adj, [nfa.initial])
    for letter in word:
        current = _step(adj, current, letter)
        if not current:
            return False
    return bool(current & set(nfa.finals))


def _word_key(word: Word) -> tuple[int, Word]:
    return (len(word), word)


def nfa_enumerate(nfa: Nfa, bound: int) -> list[Word]:
    """All accepted words of length <= bound, sorted by length then tokens."""
    adj = _adjacency(nfa)
    finals = set(nfa.finals)
    letters = nfa.alphabet.letters
    frontier: dict[Word, frozenset[str]] = {(): _eps_closure(adj, [nfa.initial])}
    found: list[Word] = []
    for _ in range(bound + 1):
        for word in sorted(frontier):
            if frontier[word] & finals:
                found.append(word)
        nxt: dict[Word, frozenset[str]] = {}
        for word, states in frontier.items():
            for letter in letters:
                stepped = _step(adj, states, letter)
                if stepped:
                    nxt[word + (letter,)] = stepped
        frontier = nxt
        if not frontier:
            break
    return sorted(set(found), key=_word_key)


def _canonical(nfa: Nfa, alphabet: PriorityAlphabet | None = None) -> Nfa:
    """Rename reachable states q0..qN in BFS order, dropping the rest."""
    if alphabet is None:
        alphabet = nfa.alphabet
    adj = _adjacency(nfa)
    order: dict[str, str] = {nfa.initial: "q0"}
    queue = [nfa.initial]
    while queue:
        q = queue.pop(0)
        for label, dst in sorted(adj[q], key=lambda e: (e[0] is not None, e[0] or "", e[1])):
            if dst not in order:
                order[dst] = f"q{len(order)}"
                queue.append(dst)
    edges = tuple(
        (order[src], label, order[dst])
        for src, label, dst in nfa.edges
        if src in order and dst in order
    )
    finals = tuple(order[f] for f in nfa.finals if f in order)
    return Nfa(
        alphabet=alphabet,
        states=tuple(order.values()),
        edges=edges,
        initial="q0",
        finals=finals,
    )


def nfa_for_words(alphabet: PriorityAlphabet, words: Sequence[Iterable[str]]) -> Nfa:
    """Finite-language NFA; a spine of fresh states per word."""
    states = ["s"]
    edges: list[Edge] = []
    finals: list[str] = []
    for i, w in enumerate(words):
        prev = "s"
        for j, letter in enumerate(tuple(w)):
            cur = f"w{i}_{j}"
            states.append(cur)
            edges.append((prev, letter, cur))
            prev = cur
        finals.append(prev)
    return _canonical(
        Nfa(
            alphabet=alphabet,
            states=tuple(states),
            edges=tuple(edges),
            initial="s",
            finals=tuple(set(finals)),
        )
    )


def _tag(nfa: Nfa, tag: str) -> Nfa:
    ren = {q: f"{tag}:{q}" for q in nfa.states}
    return Nfa(
        alphabet=nfa.alphabet,
        states=tuple(ren.values()),
        edges=tuple((ren[s], l, ren[d]) for s, l, d in nfa.edges),
        initial=ren[nfa.initial],
        finals=tuple(ren[f] for f in nfa.finals),
    )


def nfa_union(a: Nfa, b: Nfa) -> Nfa:
    if a.alphabet != b.alphabet:
        raise ValueError("union requires matching alphabets")
    a, b = _tag(a, "a"), _tag(b, "b")
    states = ("u",) + a.states + b.states
    edges = a.edges + b.edges + (("u", None, a.initial), ("u", None, b.initial))
    return _canonical(
        Nfa(a.alphabet, states, edges, "u", a.finals + b.finals)
    )


def nfa_concat(a: Nfa, b: Nfa) -> Nfa:
    if a.alphabet != b.alphabet:
        raise ValueError("concat requires matching alphabets")
    a, b = _tag(a, "a"), _tag(b, "b")
    bridge = tuple((f, None, b.initial) for f in a.finals)
    return _canonical(
        Nfa(a.alphabet, a.states + b.states, a.edges + b.edges + bridge, a.initial, b.finals)
    )


def nfa_intersect(a: Nfa, b: Nfa) -> Nfa:
    if a.alphabet != b.alphabet:
        raise ValueError("intersect requires matching alphabets")
    adj_a, adj_b = _adjacency(a), _adjacency(b)

    def name(p: str, q: str) -> str:
        return f"{p}&{q}"

    start = (a.initial, b.initial)
    seen = {start}
    queue = [start]
    edges: list[Edge] = []
    while queue:
        p, q = queue.pop(0)
        moves: list[tuple[str | None, tuple[str, str]]] = []
        for label, dp in adj_a[p]:
            if label is None:
                moves.append((None, (dp, q)))
            else:
                for lb, dq in adj_b[q]:
                    if lb == label:
                        moves.append((label, (dp, dq)))
        for label, dq in adj_b[q]:
            if label is None:
                moves.append((None, (p, dq)))
        for label, pair in moves:
            edges.append((name(p, q), label, name(*pair)))
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    finals = tuple(
        name(p, q) for (p, q) in seen if p in set(a.finals) and q in set(b.finals)
    )
    return _canonical(
        Nfa(
            a.alphabet,
            tuple(name(p, q) for (p, q) in seen),
            tuple(edges),
            name(*start),
            finals,
        )
    )


def nfa_equivalent_up_to(a: Nfa, b: Nfa, bound: int) -> Word | None:
    """Shortest word accepted by exactly one of the two, up to ``bound``."""
    wa = set(nfa_enumerate(a, bound))
    wb = set(nfa_enumerate(b, bound))
    diff = wa ^ wb
    if not diff:
        return None
    return min(diff, key=_word_key)


def _determinize(nfa: Nfa) -> tuple[dict, frozenset[str], set[frozenset[str]]]:
    adj = _adjacency(nfa)
    start = _eps_closure(adj, [nfa.initial])
    letters = nfa.alphabet.letters
    trans: dict[tuple[frozenset[str], str], frozenset[str]] = {}
    seen = {start}
    queue = [start]
    while queue:
        cur = queue.pop(0)
        for letter in letters:
            nxt = _step(adj, cur, letter)
            trans[(cur, letter)] = nxt
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    finals = {s for s in seen if s & set(nfa.finals)}
    return trans, start, finals


def nfa_equivalent(a: Nfa, b: Nfa, state_cap: int = 12) -> bool:
    """Exact language equivalence via determinization.

    Refuses NFAs above ``state_cap`` states instead of risking an
    exponential blow-up; use nfa_equivalent_up_to for bounded checks.
    """
    if a.alphabet != b.alphabet:
        raise ValueError("equivalence requires matching alphabets")
    for nfa in (a, b):
        if len(nfa.states) > state_cap:
            raise ResourceLimit(
                f"nfa has {len(nfa.states)} states, cap is {state_cap}"
            )
    ta, sa, fa = _determinize(a)
    tb, sb, fb = _determinize(b)
    seen = {(sa, sb)}
    queue = [(sa, sb)]
    while queue:
        pa, pb = queue.pop(0)
        if (pa in fa) != (pb in fb):
            return False
        for letter in a.alphabet.letters:
            pair = (ta.get((pa, letter), frozenset()), tb.get((pb, letter), frozenset()))
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    return True


def subword_transducer(alphabet: PriorityAlphabet) -> Transducer:
    """Keep or drop every letter; one state."""
    edges = []
    for a in alphabet.letters:
        edges.append(("t0", (a,), (a,), "t0"))
        edges.append(("t0", (a,), (), "t0"))
    return Transducer(alphabet, ("t0",), tuple(edges), "t0", ("t0",))


def priority_transducer(alphabet: PriorityAlphabet) -> Transducer:
    """Dropped letters never outrank the next kept one; last letter kept.

    State p_r remembers the highest dropped priority since the last kept
    letter.  Keeping a letter requires it to reach that bar and resets it;
    a keep may instead jump to ``acc``, which closes the run at the final
    input position.  The drain branch emits the empty word from anything.
    """
    d = alphabet.max_assigned_priority
    states = ["start", "acc", "drain"] + [f"p{r}" for r in range(d + 1)]
    edges: list[tuple[str, Word, Word, str]] = [
        ("start", (), (), "p0"),
        ("start", (), (), "drain"),
    ]
    for a in alphabet.letters:
        s = alphabet.priority(a)
        edges.append(("drain", (a,), (), "drain"))
        for r in range(d + 1):
            if s < r:
                edges.append((f"p{r}", (a,), (), f"p{r}"))
            else:
                edges.append((f"p{r}", (a,), (), f"p{s}"))
                edges.append((f"p{r}", (a,), (a,), "p0"))
                edges.append((f"p{r}", (a,), (a,), "acc"))
    return Transducer(alphabet, tuple(states), tuple(edges), "start", ("acc", "drain"))


def block_transducer(alphabet: PriorityAlphabet) -> Transducer:
    """Drop letters block-wise: after dropping priority r, everything up
    to the next kept priority-r letter is dropped too.

    State b_r means a priority-r drop is pending; the machine must emit
    a priority-r letter to return to b_0, the only final state.
    """
    d = alphabet.max_assigned_priority
    states = [f"b{r}" for r in range(d + 1)] + ["sink"]
    edges: list[tuple[str, Word, Word, str]] = []
    for a in alphabet.letters:
        s = alphabet.priority(a)
        edges.append(("b0", (a,), (a,), "b0"))
        edges.append(("b0", (a,), (), "b0" if s == 0 else f"b{s}"))
        edges.append(("sink", (a,), (), "sink"))
        for r in range(1, d + 1):
            if s < r:
                edges.append((f"b{r}", (a,), (), f"b{r}"))
            elif s == r:
                edges.append((f"b{r}", (a,), (), f"b{r}"))
                edges.append((f"b{r}", (a,), (a,), "b0"))
            else:
                edges.append((f"b{r}", (a,), (), "sink"))
    return Transducer(alphabet, tuple(states), tuple(edges), "b0", ("b0",))


def apply_transduction(transducer: Transducer, nfa: Nfa) -> Nfa:
    """Image NFA of the language under the transducer (product states)."""
    if transducer.alphabet != nfa.alphabet:
        raise ValueError("transduction requires matching alphabets")
    t_out: dict[str, list[tuple[Word, Word, str]]] = {q: [] for q in transducer.states}
    for src, consumed, emitted, dst in transducer.edges:
        t_out[src].append((consumed, emitted, dst))
    adj = _adjacency(nfa)

    def name(tq: str, nq: str) -> str:
        return f"{tq}@{nq}"

    start = (transducer.initial, nfa.initial)
    seen = {start}
    queue = [start]
    edges: list[Edge] = []
    while queue:
        tq, nq = queue.pop(0)
        targets: list[tuple[str | None, tuple[str, str]]] = []
        for consumed, emitted, tq2 in t_out[tq]:
            label = emitted[0] if emitted else None
            if not consumed:
                targets.append((label, (tq2, nq)))
            else:
                for lb, nq2 in adj[nq]:
                    if lb == consumed[0]:
                        targets.append((label, (tq2, nq2)))
        for lb, nq2 in adj[nq]:
            if lb is None:
                targets.append((None, (tq, nq2)))
        for label, pair in targets:
            edges.append((name(tq, nq), label, name(*pair)))
            if pair not in seen:
                seen.add(pair)
                queue.append(pair)
    t_fin, n_fin = set(transducer.finals), set(nfa.finals)
    finals = tuple(name(tq, nq) for (tq, nq) in seen if tq in t_fin and nq in n_fin)
    return _canonical(
        Nfa(
            nfa.alphabet,
            tuple(name(tq, nq) for (tq, nq) in seen),
            tuple(edges),
            name(*start),
            finals,
        )
    )


# Frame configurations for the block-closure controller.  A stack of
# frames tracks one matching machine per priority level, levels strictly
# decreasing downward.
_START = "s"
_PRE = "p"
_POSTF = "kf"
_POSTM = "km"
_GAPF = "gf"
_GAPM = "gm"
_XSTART = "xs"
_XMID = "xm"
_E0 = "e0"
_E1 = "e1"

_CONTENT_MAP = {
    _START: _PRE,
    _PRE: _PRE,
    _POSTF: _POSTM,
    _POSTM: _POSTM,
    _GAPF: _GAPM,
    _GAPM: _GAPM,
}

_SEP_MAP = {
    _START: (_POSTF, _PRE),
    _PRE: (_POSTF, _PRE),
    _POSTF: (_POSTF, _POSTF),
    _POSTM: (_POSTF, _POSTF),
    _GAPF: (_POSTF, _GAPF),
    _GAPM: (_POSTF, _GAPF),
}

_ACCEPTING = {_POSTF, _POSTM, _E1}

Frame = tuple[int, str]
Stack = tuple[Frame, ...]


def _stack_name(stack: Stack) -> str:
    return "c[" + ".".join(f"{lvl}{cfg}" for lvl, cfg in stack) + "]"


def _chain_closable(frames: Stack) -> bool:
    if not frames:
        return True
    if frames[-1][1] not in _ACCEPTING:
        return False
    return all(cfg == _XMID for _, cfg in frames[:-1])


def _closure_controller(alphabet: PriorityAlphabet) -> Transducer:
    """Transducer whose image of {v} is the absorbing block cone below v.

    Stratified by the top priority p of the output word.  Within a
    stratum the stack of frames mirrors the recursive block matching:
    a frame either skips dropped material between kept separators or
    opens a sub-frame that embeds one emitted block into one input
    block.  Empty emitted blocks simply never open a frame, so the
    material they face is dropped without inspection.
    """
    d = alphabet.max_assigned_priority
    letters = [(a, alphabet.priority(a)) for a in alphabet.letters]
    edges: list[tuple[str, Word, Word, str]] = [("init", (), (), "all0")]
    states: set[str] = {"init", "all0"}
    finals: set[str] = {"all0"}
    for a, s in letters:
        if s == 0:
            edges.append(("all0", (a,), (a,), "all0"))
            edges.append(("all0", (a,), (), "all0"))

    seeds: list[Stack] = [((p, _START),) for p in range(1, d + 1)]
    seen: set[Stack] = set(seeds)
    queue: list[Stack] = list(seeds)
    for stack in seeds:
        edges.append(("init", (), (), _stack_name(stack)))

    def emit(src: Stack, letter: str | None, out: Word, dst: Stack) -> None:
        consumed: Word = (letter,) if letter is not None else ()
        edges.append((_stack_name(src), consumed, out, _stack_name(dst)))
        if dst not in seen:
            seen.add(dst)
            queue.append(dst)

    while queue:
        stack = queue.pop(0)
        k = len(stack) - 1
        top_level = stack[0][0]
        for a, s in letters:
            if s > top_level:
                continue
            j = max(i for i, (lvl, _) in enumerate(stack) if lvl >= s)
            if not _chain_closable(stack[j + 1 :]):
                continue
            level, cfg = stack[j]
            if j < k:
                # the frame below just closed; only its separator may follow
                if s != level:
                    continue
                keep_tail = stack[:j] + ((level, _POSTF),)
                drop_cfg = _GAPF if cfg == _XMID else _PRE
                emit(stack, a, (a,), keep_tail)
                emit(stack, a, (), stack[:j] + ((level, drop_cfg),))
            elif level == 0:
                emit(stack, a, (a,), stack[:j] + ((0, _E1),))
                emit(stack, a, (), stack)
            elif s < level:
                emit(stack, a, (), stack[:j] + ((level, _CONTENT_MAP[cfg]),))
            else:
                keep_cfg, drop_cfg = _SEP_MAP[cfg]
                emit(stack, a, (a,), stack[:j] + ((level, keep_cfg),))
                emit(stack, a, (), stack[:j] + ((level, drop_cfg),))
        level, cfg = stack[-1]
        if level >= 1 and cfg in (_START, _POSTF):
            opened = _XSTART if cfg == _START else _XMID
            for sub_level in range(level):
                sub: Frame = (sub_level, _START) if sub_level >= 1 else (0, _E0)
                emit(stack, None, (), stack[:-1] + ((level, opened), sub))

    for stack in seen:
        states.add(_stack_name(stack))
        if _chain_closable(stack):
            finals.add(_stack_name(stack))
    return Transducer(
        alphabet, tuple(states), tuple(edges), "init", tuple(sorted(finals))
    )


def closure_regular(nfa: Nfa, order: OrderKind) -> Nfa:
    """NFA for the downward closure of the language under the order."""
    if order is OrderKind.SUBWORD:
        return apply_transduction(subword_transducer(nfa.alphabet), nfa)
    if order is OrderKind.PRIORITY:
        return apply_transduction(priority_transducer(nfa.alphabet), nfa)
    if order is OrderKind.BLOCK:
        return apply_transduction(_closure_controller(nfa.alphabet), nfa)
    raise ValueError(f"unknown order {order!r}")


def nfa_serialize(nfa: Nfa) -> dict:
    return {
        "states": list(nfa.states),
        "initial": nfa.initial,
        "finals": list(nfa.finals),
        "edges": [[src, label, dst] for src, label, dst in nfa.edges],
    }


def nfa_parse(data: Mapping, alphabet: PriorityAlphabet) -> Nfa:
    try:
        states = tuple(data["states"])
        initial = data["initial"]
        finals = tuple(data["finals"])
        raw_edges = data["edges"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed nfa data: {exc}") from exc
    edges = []
    for item in raw_edges:
        if len(item) != 3:
            raise ValueError(f"malformed edge {item!r}")
        src, label, dst = item
        edges.append((src, label, dst))
    return Nfa(alphabet, states, tuple(edges), initial, finals)


def nfa_to_dot(nfa: Nfa, name: str = "nfa") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=none, label=""];']
    finals = set(nfa.finals)
    for q in nfa.states:
        shape = "doublecircle" if q in finals else "circle"
        lines.append(f'  "{q}" [shape={shape}];')
    lines.append(f'  __start -> "{nfa.initial}";')
    for src, label, dst in nfa.edges:
        text = label if label is not None else "&epsilon;"
        lines.append(f'  "{src}" -> "{dst}" [label="{text}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

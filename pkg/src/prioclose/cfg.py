"""Context-free grammars, Kleene grammars, and their downward closures.

The block closure of a grammar is computed in stages: normalize to a
binary normal form, single out the letter runs that can repeat around a
self-embedding nonterminal, rebuild them as starred productions of a
Kleene grammar, turn acyclic derivations of that grammar into an NFA,
and finish with the regular closure operator.  Pump ends and repeats are
extracted with small letter transducers over a marker-extended alphabet.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping

from .automata import (
    Nfa,
    Transducer,
    _adjacency,
    _canonical,
    _eps_closure,
    _step,
    apply_transduction,
    closure_regular,
    nfa_accepts,
    nfa_for_words,
    nfa_intersect,
    nfa_union,
    priority_transducer,
)
from .core import (
    OrderKind,
    PriorityAlphabet,
    ResourceLimit,
    Word,
    flatten,
)

# Kleene grammar right-hand sides are sequences of tagged items.
NT = "nt"
STAR = "star"
LIT = "t"
KItem = tuple[str, str]


def _fresh(base: str, taken: set[str]) -> str:
    name = base
    i = 2
    while name in taken:
        name = f"{base}.{i}"
        i += 1
    taken.add(name)
    return name


@dataclass(frozen=True)
class Cfg:
    """Context-free grammar over a priority alphabet.

    Right-hand sides mix nonterminals and letters; the two name spaces
    must be disjoint.  Size is measured in nonterminals throughout.
    """

    alphabet: PriorityAlphabet
    nonterminals: tuple[str, ...]
    productions: tuple[tuple[str, tuple[str, ...]], ...]
    start: str

    def __post_init__(self) -> None:
        nts = tuple(sorted(set(self.nonterminals)))
        known = set(nts)
        letters = set(self.alphabet.letters)
        clash = known & letters
        if clash:
            raise ValueError(f"nonterminals also appear as letters: {sorted(clash)}")
        if self.start not in known:
            raise ValueError(f"start symbol {self.start!r} not declared")
        prods = tuple(sorted({(lhs, tuple(rhs)) for lhs, rhs in self.productions}))
        for lhs, rhs in prods:
            if lhs not in known:
                raise ValueError(f"production head {lhs!r} not declared")
            for sym in rhs:
                if sym not in known and sym not in letters:
                    raise ValueError(f"production symbol {sym!r} unknown")
        object.__setattr__(self, "nonterminals", nts)
        object.__setattr__(self, "productions", prods)


@dataclass(frozen=True)
class KleeneGrammar:
    """Grammar whose right-hand sides may carry starred nonterminals.

    Normal form: a right-hand side is either a single letter item or a
    sequence of at most three nonterminal items, each optionally starred.
    """

    alphabet: PriorityAlphabet
    nonterminals: tuple[str, ...]
    productions: tuple[tuple[str, tuple[KItem, ...]], ...]
    start: str

    def __post_init__(self) -> None:
        nts = tuple(sorted(set(self.nonterminals)))
        known = set(nts)
        letters = set(self.alphabet.letters)
        if self.start not in known:
            raise ValueError(f"start symbol {self.start!r} not declared")
        prods = tuple(sorted({(lhs, tuple(rhs)) for lhs, rhs in self.productions}))
        for lhs, rhs in prods:
            if lhs not in known:
                raise ValueError(f"production head {lhs!r} not declared")
            kinds = [kind for kind, _ in rhs]
            if kinds == [LIT]:
                if rhs[0][1] not in letters:
                    raise ValueError(f"letter {rhs[0][1]!r} not in alphabet")
            else:
                if len(rhs) > 3 or any(kind not in (NT, STAR) for kind in kinds):
                    raise ValueError(f"right-hand side {rhs!r} not in normal form")
                for _, sym in rhs:
                    if sym not in known:
                        raise ValueError(f"item symbol {sym!r} not declared")
        object.__setattr__(self, "nonterminals", nts)
        object.__setattr__(self, "productions", prods)


@dataclass(frozen=True)
class HatAlphabet:
    """Priority alphabet extended with three priority-0 marker letters.

    ``mid`` marks the seam of a pump pair, ``left`` and ``right`` stand
    for the replaced runs on either side.  Marker tokens are chosen
    fresh against the base so nested extensions never collide.
    """

    base: PriorityAlphabet
    alphabet: PriorityAlphabet
    mid: str
    left: str
    right: str

    @classmethod
    def extend(cls, base: PriorityAlphabet) -> "HatAlphabet":
        present = set(base.letters)
        k = 0
        while True:
            suffix = "" if k == 0 else str(k)
            mid, left, right = "#" + suffix, "#L" + suffix, "#R" + suffix
            if not {mid, left, right} & present:
                break
            k += 1
        full = PriorityAlphabet(base.entries + ((mid, 0), (left, 0), (right, 0)))
        return cls(base=base, alphabet=full, mid=mid, left=left, right=right)


def _pruned(g: Cfg) -> Cfg:
    """Drop nonterminals that derive nothing or are unreachable."""
    letters = set(g.alphabet.letters)
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            if lhs in productive:
                continue
            if all(sym in letters or sym in productive for sym in rhs):
                productive.add(lhs)
                changed = True
    kept = [
        (lhs, rhs)
        for lhs, rhs in g.productions
        if lhs in productive
        and all(sym in letters or sym in productive for sym in rhs)
    ]
    reachable = {g.start}
    frontier = [g.start]
    by_head: dict[str, list[tuple[str, ...]]] = {}
    for lhs, rhs in kept:
        by_head.setdefault(lhs, []).append(rhs)
    while frontier:
        head = frontier.pop()
        for rhs in by_head.get(head, ()):
            for sym in rhs:
                if sym not in letters and sym not in reachable:
                    reachable.add(sym)
                    frontier.append(sym)
    final = [(lhs, rhs) for lhs, rhs in kept if lhs in reachable]
    return Cfg(g.alphabet, tuple(reachable), tuple(final), g.start)


def to_cnf(g: Cfg) -> tuple[Cfg, bool]:
    """Normalize to binary rules for the empty-word-free language.

    Returns the normalized grammar together with a flag telling whether
    the original language contained the empty word.  The fresh start
    symbol never occurs on a right-hand side, and useless symbols are
    pruned.  An empty language comes back as a production-free grammar.
    """
    taken = set(g.nonterminals) | set(g.alphabet.letters)
    letters = set(g.alphabet.letters)
    start = _fresh("S0", taken)
    prods: list[tuple[str, tuple[str, ...]]] = [(start, (g.start,))]
    prods.extend(g.productions)

    # Lift letters out of long rules, then binarize.
    lifted: dict[str, str] = {}
    step1: list[tuple[str, tuple[str, ...]]] = []
    for lhs, rhs in prods:
        if len(rhs) >= 2:
            new_rhs = []
            for sym in rhs:
                if sym in letters:
                    if sym not in lifted:
                        lifted[sym] = _fresh(f"T.{sym}", taken)
                        step1.append((lifted[sym], (sym,)))
                    new_rhs.append(lifted[sym])
                else:
                    new_rhs.append(sym)
            rhs = tuple(new_rhs)
        step1.append((lhs, rhs))
    step2: list[tuple[str, tuple[str, ...]]] = []
    for lhs, rhs in step1:
        while len(rhs) > 2:
            mid = _fresh(f"B.{lhs}", taken)
            step2.append((lhs, (rhs[0], mid)))
            lhs, rhs = mid, rhs[1:]
        step2.append((lhs, rhs))

    # Remove empty rules, remembering whether the start was nullable.
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in step2:
            if lhs not in nullable and all(s in nullable for s in rhs):
                nullable.add(lhs)
                changed = True
    had_empty = start in nullable
    step3: set[tuple[str, tuple[str, ...]]] = set()
    for lhs, rhs in step2:
        options = [
            ((sym,), ()) if sym in nullable and sym not in letters else ((sym,),)
            for sym in rhs
        ]
        for picks in itertools.product(*options):
            flat = tuple(s for part in picks for s in part)
            if flat:
                step3.add((lhs, flat))

    # Collapse unit chains.
    unit_next: dict[str, set[str]] = {}
    solid: dict[str, set[tuple[str, ...]]] = {}
    for lhs, rhs in step3:
        if len(rhs) == 1 and rhs[0] not in letters:
            unit_next.setdefault(lhs, set()).add(rhs[0])
        else:
            solid.setdefault(lhs, set()).add(rhs)
    heads = {lhs for lhs, _ in step3}
    final: set[tuple[str, tuple[str, ...]]] = set()
    for lhs in heads:
        seen = {lhs}
        frontier = [lhs]
        while frontier:
            cur = frontier.pop()
            for rhs in solid.get(cur, ()):
                final.add((lhs, rhs))
            for nxt in unit_next.get(cur, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)

    cnf = Cfg(g.alphabet, tuple(taken - letters), tuple(final), start)
    return _pruned(cnf), had_empty


def cfg_enumerate(g: Cfg, bound: int) -> list[Word]:
    """All derivable words of length at most ``bound``, shortest first."""
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    letters = set(g.alphabet.letters)
    yields: dict[str, set[Word]] = {nt: set() for nt in g.nonterminals}
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.productions:
            words: set[Word] = {()}
            for sym in rhs:
                options = {(sym,)} if sym in letters else yields[sym]
                words = {
                    prefix + extra
                    for prefix in words
                    for extra in options
                    if len(prefix) + len(extra) <= bound
                }
                if not words:
                    break
            new = words - yields[lhs]
            if new:
                yields[lhs] |= new
                changed = True
    return sorted(yields[g.start], key=lambda w: (len(w), w))


def cfg_intersect_regular_empty(g: Cfg, r: Nfa) -> bool:
    """Decide whether the grammar and the automaton share no word."""
    if g.alphabet != r.alphabet:
        raise ValueError("alphabet mismatch")
    cnf, had_empty = to_cnf(g)
    if had_empty and nfa_accepts(r, ()):
        return False
    adj = _adjacency(r)
    finals = set(r.finals)
    letter_moves: dict[str, list[tuple[str, str]]] = {}
    for p in r.states:
        closed = _eps_closure(adj, [p])
        seen_letters = {label for q in closed for label, _ in adj[q] if label}
        for a in seen_letters:
            for q in _step(adj, closed, a):
                letter_moves.setdefault(a, []).append((p, q))
    derivable: set[tuple[str, str, str]] = set()
    for lhs, rhs in cnf.productions:
        if len(rhs) == 1:
            for p, q in letter_moves.get(rhs[0], ()):
                derivable.add((p, lhs, q))
    binary = [(lhs, rhs) for lhs, rhs in cnf.productions if len(rhs) == 2]
    changed = True
    while changed:
        changed = False
        by_left: dict[tuple[str, str], set[str]] = {}
        for p, a, q in derivable:
            by_left.setdefault((p, a), set()).add(q)
        for lhs, (b, c) in binary:
            for p, a, m in list(derivable):
                if a != b:
                    continue
                for q in by_left.get((m, c), ()):
                    trip = (p, lhs, q)
                    if trip not in derivable:
                        derivable.add(trip)
                        changed = True
    start_closed = _eps_closure(adj, [r.initial])
    for p in start_closed:
        for q in finals:
            if (p, cnf.start, q) in derivable:
                return False
    return True


def _pump_from_cnf(cnf: Cfg, x: str, hat: HatAlphabet) -> Cfg:
    """Spine-doubled grammar for the pump pairs of ``x``, seam marked."""
    taken = set(cnf.nonterminals) | set(hat.alphabet.letters)
    spine = {y: _fresh(f"P.{y}", taken) for y in cnf.nonterminals}
    prods: list[tuple[str, tuple[str, ...]]] = [
        (lhs, rhs) for lhs, rhs in cnf.productions
    ]
    for lhs, rhs in cnf.productions:
        if len(rhs) == 2:
            a, b = rhs
            prods.append((spine[lhs], (a, spine[b])))
            prods.append((spine[lhs], (spine[a], b)))
    if x in spine:
        prods.append((spine[x], (hat.mid,)))
        start = spine[x]
    else:
        start = _fresh("P", taken)
        prods.append((start, (hat.mid,)))
    grammar = Cfg(
        hat.alphabet,
        tuple(set(cnf.nonterminals) | set(spine.values()) | {start}),
        tuple(prods),
        start,
    )
    return _pruned(grammar)


def pump_pair_grammar(g: Cfg, x: str) -> Cfg:
    """Grammar for the seam-marked words u ``#`` v with x deriving u x v.

    The input is normalized first; one marker letter separates the two
    halves of each pump, and the zero-step pump contributes the bare
    marker.
    """
    if x not in g.nonterminals:
        raise ValueError(f"nonterminal {x!r} not declared")
    hat = HatAlphabet.extend(g.alphabet)
    cnf, _ = to_cnf(g)
    return _pump_from_cnf(cnf, x, hat)


def apply_transducer_to_cfg(t: Transducer, g: Cfg) -> Cfg:
    """Image of a grammar under a letter transducer, as a grammar.

    Classic triple construction: a nonterminal per (entry state, source
    nonterminal, exit state).  The nonterminal count is at most the
    normalized source size times the squared state count.
    """
    if t.alphabet != g.alphabet:
        raise ValueError("alphabet mismatch")
    cnf, had_empty = to_cnf(g)
    states = t.states
    if not t.finals:
        return Cfg(g.alphabet, (cnf.start,), (), cnf.start)
    taken = set(g.alphabet.letters)
    trip: dict[tuple[str, str, str], str] = {}
    for p in states:
        for a in cnf.nonterminals:
            for q in states:
                trip[(p, a, q)] = _fresh(f"I.{p}.{a}.{q}", taken)
    prods: list[tuple[str, tuple[str, ...]]] = []
    eats: dict[str, list[tuple[str, Word, str]]] = {}
    spontaneous: list[tuple[str, Word, str]] = []
    for src, consumed, emitted, dst in t.edges:
        if consumed:
            eats.setdefault(consumed[0], []).append((src, emitted, dst))
        else:
            spontaneous.append((src, emitted, dst))
    for lhs, rhs in cnf.productions:
        if len(rhs) == 1:
            for src, emitted, dst in eats.get(rhs[0], ()):
                prods.append((trip[(src, lhs, dst)], emitted))
        else:
            b, c = rhs
            for p in states:
                for m in states:
                    for q in states:
                        prods.append(
                            (trip[(p, lhs, q)], (trip[(p, b, m)], trip[(m, c, q)]))
                        )
    for src, emitted, dst in spontaneous:
        for a in cnf.nonterminals:
            for q in states:
                prods.append((trip[(src, a, q)], emitted + (trip[(dst, a, q)],)))
                prods.append((trip[(q, a, dst)], (trip[(q, a, src)],) + emitted))
    finals = sorted(set(t.finals))
    start = trip[(t.initial, cnf.start, finals[0])]
    for f in finals[1:]:
        alias = trip[(t.initial, cnf.start, f)]
        prods.extend((start, rhs) for lhs, rhs in list(prods) if lhs == alias)
    if had_empty:
        for w in _empty_input_image(t):
            prods.append((start, w))
    out = Cfg(g.alphabet, tuple(trip.values()), tuple(prods), start)
    assert len(out.nonterminals) <= len(cnf.nonterminals) * len(states) ** 2
    return _pruned(out)


def _empty_input_image(t: Transducer) -> set[Word]:
    """Outputs reachable without consuming input; bails on emitting loops."""
    limit = len(t.states)
    out: set[Word] = set()
    seen = {(t.initial, ())}
    frontier: list[tuple[str, Word]] = [(t.initial, ())]
    finals = set(t.finals)
    while frontier:
        state, emitted = frontier.pop()
        if state in finals:
            out.add(emitted)
        for src, consumed, extra, dst in t.edges:
            if src != state or consumed:
                continue
            nxt = (dst, emitted + extra)
            if len(nxt[1]) > limit:
                raise ResourceLimit("transducer emits unboundedly on empty input")
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return out


def _require_flat(alphabet: PriorityAlphabet) -> None:
    for pri in range(1, alphabet.max_assigned_priority + 1):
        if len(alphabet.letters_of(pri)) > 1:
            raise ValueError(f"priority {pri} carried by more than one letter")


def _low_letters(alphabet: PriorityAlphabet, cutoff: int) -> list[str]:
    return [a for a in alphabet.letters if alphabet.priority(a) <= cutoff]


def _ends_transducer(hat: HatAlphabet, r: int, s: int) -> Transducer:
    """Replace the outermost separator runs of both halves by markers.

    The left half must have top priority exactly ``r`` (at most zero
    when r is zero); everything from the first separator to the last is
    replaced by the left marker.  Symmetrically on the right with ``s``.
    """
    alpha = hat.alphabet
    base = hat.base
    edges: list[tuple[str, Word, Word, str]] = []
    states = ["m0"]
    if r == 0:
        states += ["l0", "l1"]
        initial = "l0"
        edges.append(("l0", (), (hat.left,), "l1"))
        for a in _low_letters(base, 0):
            edges.append(("l1", (a,), (), "l1"))
        edges.append(("l1", (hat.mid,), (hat.mid,), "m0"))
    else:
        rl = base.letters_of(r)[0]
        states += ["l0", "l1", "l2"]
        initial = "l0"
        for a in _low_letters(base, r - 1):
            edges.append(("l0", (a,), (a,), "l0"))
            edges.append(("l1", (a,), (), "l1"))
            edges.append(("l2", (a,), (a,), "l2"))
        edges.append(("l0", (rl,), (hat.left,), "l1"))
        edges.append(("l0", (rl,), (hat.left,), "l2"))
        edges.append(("l1", (rl,), (), "l1"))
        edges.append(("l1", (rl,), (), "l2"))
        edges.append(("l2", (hat.mid,), (hat.mid,), "m0"))
    if s == 0:
        states += ["r1"]
        edges.append(("m0", (), (hat.right,), "r1"))
        for a in _low_letters(base, 0):
            edges.append(("r1", (a,), (), "r1"))
        finals = ("r1",)
    else:
        sl = base.letters_of(s)[0]
        states += ["r1", "r2"]
        for a in _low_letters(base, s - 1):
            edges.append(("m0", (a,), (a,), "m0"))
            edges.append(("r1", (a,), (), "r1"))
            edges.append(("r2", (a,), (a,), "r2"))
        edges.append(("m0", (sl,), (hat.right,), "r1"))
        edges.append(("m0", (sl,), (hat.right,), "r2"))
        edges.append(("r1", (sl,), (), "r1"))
        edges.append(("r1", (sl,), (), "r2"))
        finals = ("r2",)
    return Transducer(alpha, tuple(states), tuple(edges), initial, finals)


def _repeat_transducer(
    hat: HatAlphabet, r: int, s: int, side: str, with_separator: bool
) -> Transducer:
    """Pick one repeatable run from one half of a pump-pair word.

    On the picking side a run strictly between two adjacent separators
    is copied out (the closing separator too, when asked); the other
    half is only checked for its top priority.
    """
    alpha = hat.alphabet
    base = hat.base
    edges: list[tuple[str, Word, Word, str]] = []
    if side == "left":
        pick_pri, check_pri = r, s
        if pick_pri == 0:
            states = ["a", "c"]
            for x in _low_letters(base, 0):
                edges.append(("a", (x,), (), "a"))
                edges.append(("a", (x,), (x,), "c"))
                edges.append(("c", (x,), (), "c"))
            edges.append(("c", (hat.mid,), (), "d"))
        else:
            rl = base.letters_of(pick_pri)[0]
            states = ["a", "b", "c"]
            for x in _low_letters(base, pick_pri):
                edges.append(("a", (x,), (), "a"))
                edges.append(("c", (x,), (), "c"))
            for x in _low_letters(base, pick_pri - 1):
                edges.append(("b", (x,), (x,), "b"))
            edges.append(("a", (rl,), (), "b"))
            edges.append(("b", (rl,), (rl,) if with_separator else (), "c"))
            edges.append(("c", (hat.mid,), (), "d"))
        states += ["d"]
        if check_pri == 0:
            for x in _low_letters(base, 0):
                edges.append(("d", (x,), (), "d"))
            finals = ("d",)
        else:
            sl = base.letters_of(check_pri)[0]
            states += ["e"]
            for x in _low_letters(base, check_pri):
                edges.append(("d", (x,), (), "d"))
                edges.append(("e", (x,), (), "e"))
            edges.append(("d", (sl,), (), "e"))
            finals = ("e",)
        return Transducer(alpha, tuple(states), tuple(edges), "a", finals)
    pick_pri, check_pri = s, r
    if check_pri == 0:
        states = ["a"]
        for x in _low_letters(base, 0):
            edges.append(("a", (x,), (), "a"))
        edges.append(("a", (hat.mid,), (), "c"))
    else:
        rl = base.letters_of(check_pri)[0]
        states = ["a", "b"]
        for x in _low_letters(base, check_pri):
            edges.append(("a", (x,), (), "a"))
            edges.append(("b", (x,), (), "b"))
        edges.append(("a", (rl,), (), "b"))
        edges.append(("b", (hat.mid,), (), "c"))
    states += ["c"]
    if pick_pri == 0:
        states += ["e"]
        for x in _low_letters(base, 0):
            edges.append(("c", (x,), (), "c"))
            edges.append(("c", (x,), (x,), "e"))
            edges.append(("e", (x,), (), "e"))
        finals = ("e",)
    else:
        sl = base.letters_of(pick_pri)[0]
        states += ["d", "e"]
        for x in _low_letters(base, pick_pri):
            edges.append(("c", (x,), (), "c"))
            edges.append(("e", (x,), (), "e"))
        for x in _low_letters(base, pick_pri - 1):
            edges.append(("d", (x,), (x,), "d"))
        edges.append(("c", (sl,), (), "d"))
        edges.append(("d", (sl,), (sl,) if with_separator else (), "e"))
        finals = ("e",)
    return Transducer(alpha, tuple(states), tuple(edges), "a", finals)


def _with_alphabet_cfg(g: Cfg, alphabet: PriorityAlphabet) -> Cfg:
    return Cfg(alphabet, g.nonterminals, g.productions, g.start)


def _ends_alphabet(hat: HatAlphabet, r: int, s: int) -> PriorityAlphabet:
    cutoff = max(r, s, 1) - 1
    entries = tuple(
        (a, pri) for a, pri in hat.base.entries if pri <= cutoff
    ) + ((hat.mid, 0), (hat.left, 0), (hat.right, 0))
    return PriorityAlphabet(entries)


def _check_range(alphabet: PriorityAlphabet, r: int, s: int) -> None:
    p = alphabet.max_assigned_priority
    if not 0 <= r <= p or not 0 <= s <= p:
        raise ValueError(f"priorities ({r}, {s}) out of range [0, {p}]")


def ends_grammar(g: Cfg, x: str, r: int, s: int) -> Cfg:
    """Grammar for the marked outer runs of pumps at ``x``.

    Each word is the left pump half with its separator-bounded middle
    replaced by a marker, the seam marker, then the right half treated
    symmetrically.  Halves whose top priority is not exactly the
    requested one (at most zero when zero is requested) contribute
    nothing.
    """
    _check_range(g.alphabet, r, s)
    _require_flat(g.alphabet)
    if x not in g.nonterminals:
        raise ValueError(f"nonterminal {x!r} not declared")
    hat = HatAlphabet.extend(g.alphabet)
    cnf, _ = to_cnf(g)
    pump = _pump_from_cnf(cnf, x, hat)
    out = apply_transducer_to_cfg(_ends_transducer(hat, r, s), pump)
    return _pruned(_with_alphabet_cfg(out, _ends_alphabet(hat, r, s)))


def repeats_grammars(g: Cfg, x: str, r: int, s: int) -> tuple[Cfg, Cfg]:
    """Grammars for the runs repeatable on each side of pumps at ``x``.

    For a positive priority the words are a separator-free run followed
    by the closing separator; for priority zero they are the single
    letters occurring on that side.  The opposite side only filters by
    its top priority.
    """
    _check_range(g.alphabet, r, s)
    _require_flat(g.alphabet)
    if x not in g.nonterminals:
        raise ValueError(f"nonterminal {x!r} not declared")
    hat = HatAlphabet.extend(g.alphabet)
    cnf, _ = to_cnf(g)
    pump = _pump_from_cnf(cnf, x, hat)
    out = []
    for side, pri in (("left", r), ("right", s)):
        raw = apply_transducer_to_cfg(
            _repeat_transducer(hat, r, s, side, True), pump
        )
        entries = tuple((a, p) for a, p in hat.base.entries if p <= pri)
        out.append(_pruned(_with_alphabet_cfg(raw, PriorityAlphabet(entries))))
    return out[0], out[1]


def _occurrence_nfa(
    alphabet: PriorityAlphabet, first: str, second: str
) -> Nfa:
    """Words containing ``first`` somewhere before ``second``."""
    edges: list[tuple[str, str | None, str]] = []
    for a in alphabet.letters:
        edges.append(("n0", a, "n0"))
        edges.append(("n1", a, "n1"))
        edges.append(("n2", a, "n2"))
    edges.append(("n0", first, "n1"))
    edges.append(("n1", second, "n2"))
    return Nfa(alphabet, ("n0", "n1", "n2"), tuple(edges), "n0", ("n2",))


def side_alphabets(g: Cfg, x: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Letters that can recur left respectively right of pumps at ``x``."""
    if x not in g.nonterminals:
        raise ValueError(f"nonterminal {x!r} not declared")
    hat = HatAlphabet.extend(g.alphabet)
    cnf, _ = to_cnf(g)
    pump = _pump_from_cnf(cnf, x, hat)
    left = []
    right = []
    for a in g.alphabet.letters:
        if not cfg_intersect_regular_empty(
            pump, _occurrence_nfa(hat.alphabet, a, hat.mid)
        ):
            left.append(a)
        if not cfg_intersect_regular_empty(
            pump, _occurrence_nfa(hat.alphabet, hat.mid, a)
        ):
            right.append(a)
    return tuple(left), tuple(right)


def _not_just_mid_nfa(alphabet: PriorityAlphabet, mid: str) -> Nfa:
    """All words except the one-letter seam word."""
    edges: list[tuple[str, str | None, str]] = []
    for a in alphabet.letters:
        if a != mid:
            edges.append(("q0", a, "qq"))
        edges.append(("qm", a, "qq"))
        edges.append(("qq", a, "qq"))
    edges.append(("q0", mid, "qm"))
    return Nfa(alphabet, ("q0", "qm", "qq"), tuple(edges), "q0", ("q0", "qq"))


def _items(rhs: tuple[str, ...], letters: set[str]) -> tuple[KItem, ...]:
    return tuple((LIT, s) if s in letters else (NT, s) for s in rhs)


def _kleene_prune(
    alphabet: PriorityAlphabet,
    prods: list[tuple[str, tuple[KItem, ...]]],
    start: str,
) -> KleeneGrammar:
    """Starred items never block production, and dead stars are dropped."""
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in prods:
            if lhs in productive:
                continue
            if all(kind != NT or sym in productive for kind, sym in rhs):
                productive.add(lhs)
                changed = True
    cleaned: list[tuple[str, tuple[KItem, ...]]] = []
    for lhs, rhs in prods:
        if lhs not in productive:
            continue
        if any(kind == NT and sym not in productive for kind, sym in rhs):
            continue
        kept = tuple(
            (kind, sym)
            for kind, sym in rhs
            if kind != STAR or sym in productive
        )
        cleaned.append((lhs, kept))
    reachable = {start}
    frontier = [start]
    by_head: dict[str, list[tuple[KItem, ...]]] = {}
    for lhs, rhs in cleaned:
        by_head.setdefault(lhs, []).append(rhs)
    while frontier:
        head = frontier.pop()
        for rhs in by_head.get(head, ()):
            for kind, sym in rhs:
                if kind in (NT, STAR) and sym not in reachable:
                    reachable.add(sym)
                    frontier.append(sym)
    final = [(lhs, rhs) for lhs, rhs in cleaned if lhs in reachable]
    return KleeneGrammar(alphabet, tuple(reachable), tuple(final), start)


def _side_sets_from_pump(
    pump: Cfg, hat: HatAlphabet, letters: Iterable[str]
) -> tuple[tuple[str, ...], tuple[str, ...]]:
    left = []
    right = []
    for a in letters:
        if not cfg_intersect_regular_empty(
            pump, _occurrence_nfa(hat.alphabet, a, hat.mid)
        ):
            left.append(a)
        if not cfg_intersect_regular_empty(
            pump, _occurrence_nfa(hat.alphabet, hat.mid, a)
        ):
            right.append(a)
    return tuple(left), tuple(right)


def _kleene_base(cnf: Cfg, protected: frozenset[str]) -> KleeneGrammar:
    """Subword-closure step for a grammar whose letters all rank zero.

    Each nonterminal gains starred side pools for its repeatable
    letters around a copied spine.  Letters in ``protected`` keep no
    dropping alternative, so marker seams survive the closure.
    """
    letters = set(cnf.alphabet.letters)
    taken = set(cnf.nonterminals) | letters
    hat = HatAlphabet.extend(cnf.alphabet)
    cl = {x: _fresh(f"C.{x}", taken) for x in cnf.nonterminals}
    mid = {x: _fresh(f"M.{x}", taken) for x in cnf.nonterminals}
    lt = {x: _fresh(f"L.{x}", taken) for x in cnf.nonterminals}
    rt = {x: _fresh(f"R.{x}", taken) for x in cnf.nonterminals}
    prods: list[tuple[str, tuple[KItem, ...]]] = []
    for x in cnf.nonterminals:
        pump = _pump_from_cnf(cnf, x, hat)
        gl, gr = _side_sets_from_pump(pump, hat, cnf.alphabet.letters)
        for a in gl:
            prods.append((lt[x], ((LIT, a),)))
        for a in gr:
            prods.append((rt[x], ((LIT, a),)))
        prods.append((cl[x], ((STAR, lt[x]), (NT, mid[x]), (STAR, rt[x]))))
        droppable = False
        for lhs, rhs in cnf.productions:
            if lhs != x:
                continue
            if len(rhs) == 2:
                prods.append((mid[x], ((NT, cl[rhs[0]]), (NT, cl[rhs[1]]))))
            else:
                prods.append((mid[x], ((LIT, rhs[0]),)))
                droppable = droppable or rhs[0] not in protected
        if droppable:
            prods.append((mid[x], ()))
    nts = tuple(
        itertools.chain(cl.values(), mid.values(), lt.values(), rt.values())
    )
    grammar = KleeneGrammar(cnf.alphabet, nts, tuple(prods), cl[cnf.start])
    return _kleene_prune(
        grammar.alphabet, list(grammar.productions), grammar.start
    )


def _kleene(
    cnf: Cfg, protected: frozenset[str], stats: dict | None = None
) -> KleeneGrammar:
    """Recursive Kleene rebuild; see kleene_closure_grammar."""
    alpha = cnf.alphabet
    p = alpha.max_assigned_priority
    if stats is not None:
        stats["n"] = len(cnf.nonterminals)
        stats["p"] = p
        stats["pairs"] = 0
        stats["inner"] = []
    if p == 0:
        out = _kleene_base(cnf, protected)
        if stats is not None:
            stats["result"] = len(out.nonterminals)
        return out
    letters = set(alpha.letters)
    taken = set(cnf.nonterminals) | letters
    prods: list[tuple[str, tuple[KItem, ...]]] = [
        (lhs, _items(rhs, letters)) for lhs, rhs in cnf.productions
    ]
    nts: set[str] = set(cnf.nonterminals)
    z: dict[int, str] = {}
    for pri in range(p + 1):
        z[pri] = _fresh(f"Z{pri}", taken)
        nts.add(z[pri])
        if pri == 0:
            prods.append((z[0], ()))
        elif alpha.letters_of(pri):
            prods.append((z[pri], ((LIT, alpha.letters_of(pri)[0]),)))
    hat = HatAlphabet.extend(alpha)
    counter = 0
    for x in cnf.nonterminals:
        pump = _pump_from_cnf(cnf, x, hat)
        if cfg_intersect_regular_empty(
            pump, _not_just_mid_nfa(hat.alphabet, hat.mid)
        ):
            continue
        for r in range(p + 1):
            if r >= 1 and not alpha.letters_of(r):
                continue
            for s in range(p + 1):
                if s >= 1 and not alpha.letters_of(s):
                    continue
                ends_raw = apply_transducer_to_cfg(
                    _ends_transducer(hat, r, s), pump
                )
                ends_cnf, _ = to_cnf(
                    _with_alphabet_cfg(ends_raw, _ends_alphabet(hat, r, s))
                )
                if not ends_cnf.productions:
                    continue
                counter += 1
                tag = f"k{counter}"
                inner_protected = protected | {hat.mid, hat.left, hat.right}
                ends_closed = _kleene(ends_cnf, inner_protected)
                if stats is not None:
                    stats["pairs"] += 1
                    stats["inner"].append(len(ends_closed.nonterminals))
                side_starts: dict[str, str | None] = {}
                for side, pri in (("left", r), ("right", s)):
                    raw = apply_transducer_to_cfg(
                        _repeat_transducer(hat, r, s, side, False), pump
                    )
                    entries = tuple(
                        (a, q) for a, q in hat.base.entries if q <= max(pri - 1, 0)
                    )
                    run_cnf, run_empty = to_cnf(
                        _with_alphabet_cfg(raw, PriorityAlphabet(entries))
                    )
                    wrapper = _fresh(f"W{counter}.{side}", taken)
                    nts.add(wrapper)
                    have_any = False
                    if run_cnf.productions:
                        closed = _kleene(run_cnf, protected)
                        if stats is not None:
                            stats["inner"].append(len(closed.nonterminals))
                        rename = {
                            n: f"{tag}.{side}.{n}" for n in closed.nonterminals
                        }
                        nts.update(rename.values())
                        for lhs, rhs in closed.productions:
                            prods.append(
                                (
                                    rename[lhs],
                                    tuple(
                                        (k, rename[v]) if k in (NT, STAR) else (k, v)
                                        for k, v in rhs
                                    ),
                                )
                            )
                        if pri == 0:
                            prods.append((wrapper, ((NT, rename[closed.start]),)))
                        else:
                            prods.append(
                                (
                                    wrapper,
                                    ((NT, rename[closed.start]), (NT, z[pri])),
                                )
                            )
                        have_any = True
                    if pri >= 1 and run_empty:
                        prods.append((wrapper, ((NT, z[pri]),)))
                        have_any = True
                    side_starts[side] = wrapper if have_any else None
                rename = {n: f"{tag}.{n}" for n in ends_closed.nonterminals}
                nts.update(rename.values())
                for lhs, rhs in ends_closed.productions:
                    head = rename[lhs]
                    if rhs == ((LIT, hat.left),):
                        items: tuple[KItem, ...] = ((NT, z[r]),)
                        if side_starts["left"]:
                            items += ((STAR, side_starts["left"]),)
                        prods.append((head, items))
                    elif rhs == ((LIT, hat.right),):
                        items = ((NT, z[s]),)
                        if side_starts["right"]:
                            items += ((STAR, side_starts["right"]),)
                        prods.append((head, items))
                    elif rhs == ((LIT, hat.mid),):
                        for lhs2, rhs2 in cnf.productions:
                            if lhs2 == x:
                                prods.append((head, _items(rhs2, letters)))
                    else:
                        prods.append(
                            (
                                head,
                                tuple(
                                    (k, rename[v]) if k in (NT, STAR) else (k, v)
                                    for k, v in rhs
                                ),
                            )
                        )
                prods.append((x, ((NT, rename[ends_closed.start]),)))
    out = _kleene_prune(alpha, prods, cnf.start)
    if stats is not None:
        stats["result"] = len(out.nonterminals)
    return out


def kleene_closure_grammar(g: Cfg) -> KleeneGrammar:
    """Starred grammar whose acyclic derivations cover the language.

    The result derives every word of the input and nothing outside its
    block closure; repetition along derivation paths is traded for
    starred side runs, so acyclic derivations already reach everything
    needed before the regular closure step.  Requires a flat alphabet:
    each positive priority carried by exactly one letter.
    """
    _require_flat(g.alphabet)
    cnf, _ = to_cnf(g)
    return _kleene(cnf, frozenset())


def acyclic_nfa(h: KleeneGrammar, max_states: int = 1_000_000) -> Nfa:
    """Automaton for the words with a repetition-free derivation path.

    States encode the stack of open productions with their cursors in a
    preorder walk; a nonterminal already on the stack cannot be opened
    again, while starred items may open any number of children.  States
    materialize lazily, and exceeding ``max_states`` raises a resource
    error rather than thrashing.
    """
    by_head: dict[str, list[tuple[KItem, ...]]] = {}
    for lhs, rhs in h.productions:
        by_head.setdefault(lhs, []).append(rhs)
    Frame = tuple[str, int, int]

    def name(stack: tuple[Frame, ...]) -> str:
        if not stack:
            return "@i"
        return "|".join(f"{nt}^{j}^{pos}" for nt, j, pos in stack)

    def pushes(
        stack: tuple[Frame, ...], nt: str
    ) -> list[tuple[Frame, ...]]:
        if any(f[0] == nt for f in stack):
            return []
        return [stack + ((nt, j, 0),) for j in range(len(by_head.get(nt, ())))]

    states: set[str] = {"@i", "@f"}
    edges: list[tuple[str, str | None, str]] = []
    seen: set[tuple[Frame, ...]] = {()}
    frontier: list[tuple[Frame, ...]] = [()]

    def visit(src: str, label: str | None, stack: tuple[Frame, ...]) -> None:
        target = name(stack)
        edges.append((src, label, target))
        if target not in states:
            states.add(target)
        if stack not in seen:
            seen.add(stack)
            frontier.append(stack)
        if len(states) > max_states:
            raise ResourceLimit(
                f"acyclic automaton exceeded {max_states} states"
            )

    while frontier:
        stack = frontier.pop()
        src = name(stack)
        if not stack:
            for nxt in pushes((), h.start):
                visit(src, None, nxt)
            continue
        nt, j, pos = stack[-1]
        rhs = by_head[nt][j]
        if pos == len(rhs):
            if len(stack) == 1:
                edges.append((src, None, "@f"))
                continue
            pnt, pj, ppos = stack[-2]
            pkind = by_head[pnt][pj][ppos][0]
            if pkind == STAR:
                visit(src, None, stack[:-1])
            else:
                visit(src, None, stack[:-2] + ((pnt, pj, ppos + 1),))
            continue
        kind, sym = rhs[pos]
        if kind == LIT:
            visit(src, sym, stack[:-1] + ((nt, j, pos + 1),))
        elif kind == NT:
            for nxt in pushes(stack, sym):
                visit(src, None, nxt)
        else:
            visit(src, None, stack[:-1] + ((nt, j, pos + 1),))
            for nxt in pushes(stack, sym):
                visit(src, None, nxt)
    nfa = Nfa(h.alphabet, tuple(states), tuple(edges), "@i", ("@f",))
    return _canonical(nfa)


def _retag_nfa(nfa: Nfa, alphabet: PriorityAlphabet) -> Nfa:
    return Nfa(alphabet, nfa.states, nfa.edges, nfa.initial, nfa.finals)


def cfg_block_closure(g: Cfg, max_states: int = 1_000_000) -> Nfa:
    """Automaton for everything block-below some derivable word."""
    cnf, had_empty = to_cnf(g)
    pieces: list[Nfa] = []
    if had_empty:
        pieces.append(nfa_for_words(g.alphabet, [()]))
    if cnf.productions:
        flat = flatten(g.alphabet)
        kg = _kleene(_with_alphabet_cfg(cnf, flat), frozenset())
        skeleton = _retag_nfa(acyclic_nfa(kg, max_states), g.alphabet)
        pieces.append(closure_regular(skeleton, OrderKind.BLOCK))
    if not pieces:
        return nfa_for_words(g.alphabet, [])
    out = pieces[0]
    for piece in pieces[1:]:
        out = nfa_union(out, piece)
    return _canonical(out, g.alphabet)


def _ends_with_transducer(alphabet: PriorityAlphabet, letter: str) -> Transducer:
    """Identity on words whose final letter is the given one."""
    edges: list[tuple[str, Word, Word, str]] = []
    for a in alphabet.letters:
        target = "s1" if a == letter else "s0"
        edges.append(("s0", (a,), (a,), target))
        edges.append(("s1", (a,), (a,), target))
    return Transducer(alphabet, ("s0", "s1"), tuple(edges), "s0", ("s1",))


def _ends_with_nfa(alphabet: PriorityAlphabet, letter: str) -> Nfa:
    edges: list[tuple[str, str | None, str]] = []
    for a in alphabet.letters:
        target = "s1" if a == letter else "s0"
        edges.append(("s0", a, target))
        edges.append(("s1", a, target))
    return Nfa(alphabet, ("s0", "s1"), tuple(edges), "s0", ("s1",))


def cfg_priority_closure(g: Cfg, max_states: int = 1_000_000) -> Nfa:
    """Automaton for everything priority-below some derivable word.

    Words are grouped by their final letter; each group is closed in
    the block order over the flattened alphabet, clamped back to the
    group, and imaged through the priority drop transducer.  The empty
    word sits below every word, so a nonempty language contributes it.
    """
    cnf, had_empty = to_cnf(g)
    if not had_empty and not cnf.productions:
        return nfa_for_words(g.alphabet, [])
    pieces: list[Nfa] = [nfa_for_words(g.alphabet, [()])]
    if cnf.productions:
        flat = flatten(g.alphabet)
        flat_cnf = _with_alphabet_cfg(cnf, flat)
        drop = priority_transducer(g.alphabet)
        for letter in g.alphabet.letters:
            group = apply_transducer_to_cfg(
                _ends_with_transducer(flat, letter), flat_cnf
            )
            group_cnf, _ = to_cnf(group)
            if not group_cnf.productions:
                continue
            guard = _ends_with_nfa(flat, letter)
            skeleton = acyclic_nfa(_kleene(group_cnf, frozenset()), max_states)
            clamped = nfa_intersect(skeleton, guard)
            closed = closure_regular(clamped, OrderKind.BLOCK)
            closed = nfa_intersect(closed, guard)
            pieces.append(
                apply_transduction(drop, _retag_nfa(closed, g.alphabet))
            )
    out = pieces[0]
    for piece in pieces[1:]:
        out = nfa_union(out, piece)
    return _canonical(out, g.alphabet)


def cfg_serialize(g: Cfg) -> dict:
    return {
        "start": g.start,
        "nonterminals": list(g.nonterminals),
        "terminals": list(g.alphabet.letters),
        "productions": [[lhs, list(rhs)] for lhs, rhs in g.productions],
    }


def cfg_parse(data: Mapping, alphabet: PriorityAlphabet) -> Cfg:
    try:
        start = data["start"]
        nts = tuple(data["nonterminals"])
        terminals = list(data.get("terminals", alphabet.letters))
        prods = tuple(
            (lhs, tuple(rhs)) for lhs, rhs in data["productions"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed grammar data: {exc}") from exc
    unknown = [a for a in terminals if a not in alphabet]
    if unknown:
        raise ValueError(f"terminals not in alphabet: {unknown}")
    return Cfg(alphabet, nts, prods, start)


def kleene_serialize(h: KleeneGrammar) -> dict:
    return {
        "start": h.start,
        "nonterminals": list(h.nonterminals),
        "terminals": list(h.alphabet.letters),
        "productions": [
            [lhs, [{kind: sym} for kind, sym in rhs]] for lhs, rhs in h.productions
        ],
    }


def kleene_parse(data: Mapping, alphabet: PriorityAlphabet) -> KleeneGrammar:
    try:
        start = data["start"]
        nts = tuple(data["nonterminals"])
        prods = []
        for lhs, rhs in data["productions"]:
            items = []
            for item in rhs:
                ((kind, sym),) = item.items()
                if kind not in (NT, STAR, LIT):
                    raise ValueError(f"bad item kind {kind!r}")
                items.append((kind, sym))
            prods.append((lhs, tuple(items)))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ValueError(f"malformed grammar data: {exc}") from exc
    return KleeneGrammar(alphabet, nts, tuple(prods), start)


def cfg_to_dot(g: Cfg, name: str = "cfg") -> str:
    """Graphviz sketch: nonterminal nodes, one edge per body symbol."""
    letters = set(g.alphabet.letters)
    lines = [
        f"digraph {name} {{",
        "  rankdir=LR;",
        "  node [shape=box];",
        '  __start [shape=point, label=""];',
        f'  __start -> "{g.start}";',
    ]
    for idx, (lhs, rhs) in enumerate(g.productions):
        body = " ".join(rhs) if rhs else "&epsilon;"
        targets = [sym for sym in rhs if sym not in letters]
        if targets:
            for sym in targets:
                lines.append(f'  "{lhs}" -> "{sym}" [label="{body}"];')
        else:
            term = f"w{idx}"
            lines.append(f'  {term} [shape=plaintext, label="{body}"];')
            lines.append(f'  "{lhs}" -> {term};')
    lines.append("}")
    return "\n".join(lines)

"""Grammar constructions, Kleene closure, and CFG closure pipeline tests."""

import pytest

from prioclose.automata import (
    Nfa,
    Transducer,
    closure_regular,
    nfa_enumerate,
    nfa_equivalent_up_to,
    nfa_for_words,
    subword_transducer,
)
from prioclose.cfg import (
    Cfg,
    HatAlphabet,
    KleeneGrammar,
    acyclic_nfa,
    apply_transducer_to_cfg,
    cfg_block_closure,
    cfg_enumerate,
    cfg_intersect_regular_empty,
    cfg_parse,
    cfg_priority_closure,
    cfg_serialize,
    cfg_to_dot,
    ends_grammar,
    kleene_closure_grammar,
    kleene_parse,
    kleene_serialize,
    pump_pair_grammar,
    repeats_grammars,
    side_alphabets,
    to_cnf,
    _kleene,
)
from prioclose.core import (
    OrderKind,
    PriorityAlphabet,
    ResourceLimit,
    leq_block,
    parse_word,
)
from prioclose.oracle import closure_bounded

from reference import leq_block_absorbing_ref

w = parse_word

P12 = PriorityAlphabet.from_map({"1": 1, "2": 2})
AB0 = PriorityAlphabet.from_map({"a": 0, "b": 0})
AB01 = PriorityAlphabet.from_map({"a": 0, "b": 1})
AB10 = PriorityAlphabet.from_map({"a": 1, "b": 0})
ABCD0 = PriorityAlphabet.from_map({"a": 0, "b": 0, "c": 0, "d": 0})
D1 = PriorityAlphabet.from_map({"0a": 0, "1b": 1})
A1 = PriorityAlphabet.from_map({"a": 1})
HATTEST = PriorityAlphabet.from_map({"x": 0, "r": 1})


def flagship() -> Cfg:
    return Cfg(P12, ("X",), (("X", ("1", "X", "1")), ("X", ("2",))), "X")


def anbn(alphabet=AB0) -> Cfg:
    return Cfg(
        alphabet,
        ("S",),
        (("S", ("a", "S", "b")), ("S", ("a", "b"))),
        "S",
    )


def anbn_eps() -> Cfg:
    return Cfg(AB0, ("S",), (("S", ("a", "S", "b")), ("S", ())), "S")


def ring() -> Cfg:
    """X pumps ab on the left and c on the right; d sits in the middle."""
    return Cfg(
        ABCD0,
        ("X",),
        (("X", ("a", "b", "X", "c")), ("X", ("d",))),
        "X",
    )


def empty_grammar(alphabet=AB0) -> Cfg:
    return Cfg(alphabet, ("S",), (("S", ("S",)),), "S")


def pattern_nfa(alphabet, infix):
    """Sigma* infix Sigma* as a chain with loops on every state."""
    states = [f"n{i}" for i in range(len(infix) + 1)]
    edges = []
    for q in states:
        for a in alphabet.letters:
            edges.append((q, a, q))
    for i, a in enumerate(infix):
        edges.append((states[i], a, states[i + 1]))
    return Nfa(alphabet, tuple(states), tuple(edges), states[0], (states[-1],))


def identity_transducer(alphabet) -> Transducer:
    edges = tuple(("q", (a,), (a,), "q") for a in alphabet.letters)
    return Transducer(alphabet, ("q",), edges, "q", ("q",))


def derived_contexts(g: Cfg, x: str, max_len: int):
    """All (u, v) with x deriving u x v, both halves terminal and short."""
    letters = set(g.alphabet.letters)
    seen = {(x,)}
    frontier = [(x,)]
    out = set()
    while frontier:
        form = frontier.pop()
        spots = [i for i, s in enumerate(form) if s not in letters]
        if len(spots) == 1 and form[spots[0]] == x:
            out.add((form[: spots[0]], form[spots[0] + 1 :]))
        for i in spots:
            for lhs, rhs in g.productions:
                if lhs != form[i]:
                    continue
                new = form[:i] + rhs + form[i + 1 :]
                if (
                    sum(1 for t in new if t in letters) <= max_len
                    and len(new) <= max_len + 4
                    and new not in seen
                ):
                    seen.add(new)
                    frontier.append(new)
    return out


class TestNormalForm:
    def test_shapes_and_empty_flag(self):
        cnf, had_empty = to_cnf(anbn_eps())
        assert had_empty
        letters = set(AB0.letters)
        for _, rhs in cnf.productions:
            if len(rhs) == 1:
                assert rhs[0] in letters
            else:
                assert len(rhs) == 2
                assert all(s not in letters for s in rhs)
        assert cfg_enumerate(cnf, 6) == [
            w("a,b"),
            w("a,a,b,b"),
            w("a,a,a,b,b,b"),
        ]

    def test_self_loop_gives_empty_grammar(self):
        cnf, had_empty = to_cnf(empty_grammar())
        assert not had_empty
        assert cnf.productions == ()

    def test_bounded_language_preserved(self):
        for g in (flagship(), anbn(), anbn_eps(), ring()):
            cnf, had_empty = to_cnf(g)
            before = set(cfg_enumerate(g, 6))
            assert had_empty == (() in before)
            assert set(cfg_enumerate(cnf, 6)) == before - {()}

    def test_start_never_on_rhs(self):
        cnf, _ = to_cnf(flagship())
        assert all(cnf.start not in rhs for _, rhs in cnf.productions)


class TestEnumerate:
    def test_flagship(self):
        assert cfg_enumerate(flagship(), 5) == [
            w("2"),
            w("1,2,1"),
            w("1,1,2,1,1"),
        ]

    def test_empty(self):
        assert cfg_enumerate(empty_grammar(), 4) == []

    def test_closure_contains_language(self):
        g = anbn(AB01)
        closed = cfg_block_closure(g)
        assert set(cfg_enumerate(g, 6)) <= set(nfa_enumerate(closed, 6))

    def test_negative_bound_rejected(self):
        with pytest.raises(ValueError):
            cfg_enumerate(anbn(), -1)


class TestIntersectEmpty:
    def test_no_ba(self):
        assert cfg_intersect_regular_empty(anbn(), pattern_nfa(AB0, ("b", "a")))

    def test_has_ab(self):
        assert not cfg_intersect_regular_empty(
            anbn(), pattern_nfa(AB0, ("a", "b"))
        )

    def test_no_pure_a_word(self):
        aplus = Nfa(
            AB0,
            ("q0", "q1"),
            (("q0", "a", "q1"), ("q1", "a", "q1")),
            "q0",
            ("q1",),
        )
        assert cfg_intersect_regular_empty(anbn(), aplus)
        assert not any(set(u) == {"a"} for u in cfg_enumerate(anbn(), 6))

    def test_empty_word_counts(self):
        everything = Nfa(AB0, ("q",), tuple(("q", a, "q") for a in "ab"), "q", ("q",))
        assert not cfg_intersect_regular_empty(anbn_eps(), everything)

    def test_alphabet_mismatch(self):
        with pytest.raises(ValueError):
            cfg_intersect_regular_empty(anbn(), pattern_nfa(P12, ("1",)))


class TestPumpPairs:
    def test_flagship_matches_definition(self):
        pump = pump_pair_grammar(flagship(), "X")
        got = set(cfg_enumerate(pump, 7))
        expected = {
            u + ("#",) + v for u, v in derived_contexts(flagship(), "X", 6)
        }
        assert got == expected
        assert w("1,#,1") in got and ("#",) in got

    def test_no_self_embedding(self):
        g = Cfg(AB0, ("S",), (("S", ("a", "b")),), "S")
        pump = pump_pair_grammar(g, "S")
        assert cfg_enumerate(pump, 4) == [("#",)]

    def test_exactly_one_seam(self):
        pump = pump_pair_grammar(ring(), "X")
        for word in cfg_enumerate(pump, 9):
            assert word.count("#") == 1

    def test_undeclared(self):
        with pytest.raises(ValueError):
            pump_pair_grammar(flagship(), "Y")

    def test_seam_token_fresh_against_base(self):
        taken = PriorityAlphabet.from_map({"#": 0, "a": 0})
        g = Cfg(taken, ("S",), (("S", ("a", "S", "#")), ("S", ("a",))), "S")
        pump = pump_pair_grammar(g, "S")
        hat = HatAlphabet.extend(taken)
        assert hat.mid == "#1"
        words = cfg_enumerate(pump, 3)
        assert ("#1",) in words
        assert ("a", "#1", "#") in words


class TestApplyTransducer:
    def test_subword_image(self):
        out = apply_transducer_to_cfg(subword_transducer(AB0), anbn())
        got = set(cfg_enumerate(out, 4))
        want = set(closure_bounded(cfg_enumerate(anbn(), 8), OrderKind.SUBWORD, AB0, 4))
        assert got == want

    def test_identity(self):
        for g in (anbn(), flagship()):
            out = apply_transducer_to_cfg(identity_transducer(g.alphabet), g)
            assert set(cfg_enumerate(out, 6)) == set(cfg_enumerate(g, 6))

    def test_size_bound(self):
        cnf, _ = to_cnf(anbn())
        t = subword_transducer(AB0)
        out = apply_transducer_to_cfg(t, anbn())
        assert len(out.nonterminals) <= len(cnf.nonterminals) * len(t.states) ** 2

    def test_empty_input_image(self):
        out = apply_transducer_to_cfg(subword_transducer(AB0), anbn_eps())
        assert () in set(cfg_enumerate(out, 2))


class TestEndsGrammar:
    def test_flagship_both_positive(self):
        e = ends_grammar(flagship(), "X", 1, 1)
        assert cfg_enumerate(e, 5) == [w("#L,#,#R")]

    def test_flagship_unreachable_priority(self):
        e = ends_grammar(flagship(), "X", 2, 1)
        assert cfg_enumerate(e, 6) == []

    def test_seam_pattern(self):
        for r in range(3):
            for s in range(3):
                e = ends_grammar(flagship(), "X", r, s)
                for word in cfg_enumerate(e, 7):
                    assert [t for t in word if t in ("#L", "#", "#R")] == [
                        "#L",
                        "#",
                        "#R",
                    ]

    def test_zero_zero_constant(self):
        e = ends_grammar(ring(), "X", 0, 0)
        assert cfg_enumerate(e, 5) == [w("#L,#,#R")]

    def test_range_errors(self):
        with pytest.raises(ValueError):
            ends_grammar(flagship(), "X", 3, 0)
        with pytest.raises(ValueError):
            ends_grammar(flagship(), "X", 0, -1)


class TestRepeatsGrammars:
    def test_flagship(self):
        left, right = repeats_grammars(flagship(), "X", 1, 1)
        assert cfg_enumerate(left, 3) == [("1",)]
        assert cfg_enumerate(right, 3) == [("1",)]

    def test_zero_priority_letters(self):
        left, right = repeats_grammars(ring(), "X", 0, 0)
        assert cfg_enumerate(left, 2) == [("a",), ("b",)]
        assert cfg_enumerate(right, 2) == [("c",)]

    def test_no_pumps(self):
        g = Cfg(AB0, ("S",), (("S", ("a", "b")),), "S")
        left, right = repeats_grammars(g, "S", 0, 0)
        assert cfg_enumerate(left, 3) == []
        assert cfg_enumerate(right, 3) == []


class TestSideAlphabets:
    def test_one_sided(self):
        g = Cfg(
            ABCD0,
            ("X",),
            (("X", ("a", "X", "b")), ("X", ("c",))),
            "X",
        )
        assert side_alphabets(g, "X") == (("a",), ("b",))

    def test_two_pumps(self):
        g = Cfg(
            ABCD0,
            ("X",),
            (("X", ("a", "X", "a")), ("X", ("b", "X", "b")), ("X", ("c",))),
            "X",
        )
        assert side_alphabets(g, "X") == (("a", "b"), ("a", "b"))

    def test_no_self_embedding(self):
        g = Cfg(AB0, ("S",), (("S", ("a", "b")),), "S")
        assert side_alphabets(g, "S") == ((), ())


class TestKleeneGrammar:
    def test_flagship_sandwich(self):
        kg = kleene_closure_grammar(flagship())
        words = set(nfa_enumerate(acyclic_nfa(kg), 8))
        assert set(cfg_enumerate(flagship(), 8)) <= words
        dominators = cfg_enumerate(flagship(), 17)
        for u in sorted(words):
            assert any(
                leq_block_absorbing_ref(P12, u, v) for v in dominators
            ), u

    def test_all_zero_is_subword_construction(self):
        kg = kleene_closure_grammar(anbn())
        got = set(nfa_enumerate(acyclic_nfa(kg), 6))
        want = set(closure_bounded(cfg_enumerate(anbn(), 12), OrderKind.SUBWORD, AB0, 6))
        assert got == want

    def test_single_word(self):
        g = Cfg(D1, ("S",), (("S", ("0a", "1b", "0a")),), "S")
        kg = kleene_closure_grammar(g)
        words = set(nfa_enumerate(acyclic_nfa(kg), 5))
        assert w("0a,1b,0a") in words
        for u in words:
            assert leq_block(D1, u, w("0a,1b,0a"))

    def test_non_flat_rejected(self):
        twin = PriorityAlphabet.from_map({"a": 1, "b": 1})
        g = Cfg(twin, ("S",), (("S", ("a", "b")),), "S")
        with pytest.raises(ValueError):
            kleene_closure_grammar(g)

    def test_normal_form_enforced(self):
        with pytest.raises(ValueError):
            KleeneGrammar(
                AB0,
                ("S", "A"),
                (("S", (("nt", "A"), ("nt", "A"), ("nt", "A"), ("nt", "A"))),),
                "S",
            )
        with pytest.raises(ValueError):
            KleeneGrammar(
                AB0,
                ("S", "A"),
                (("S", (("t", "a"), ("nt", "A"))),),
                "S",
            )


class TestAcyclicNfa:
    def test_two_leaves(self):
        h = KleeneGrammar(
            AB0,
            ("S", "A"),
            (("S", (("nt", "A"), ("nt", "A"))), ("A", (("t", "a"),))),
            "S",
        )
        assert nfa_enumerate(acyclic_nfa(h), 4) == [("a", "a")]

    def test_star(self):
        h = KleeneGrammar(
            AB0,
            ("S", "A"),
            (("S", (("star", "A"),)), ("A", (("t", "a"),))),
            "S",
        )
        assert nfa_enumerate(acyclic_nfa(h), 3) == [
            (),
            ("a",),
            ("a", "a"),
            ("a", "a", "a"),
        ]

    def test_state_cap(self):
        kg = kleene_closure_grammar(flagship())
        with pytest.raises(ResourceLimit):
            acyclic_nfa(kg, max_states=10)


class TestBlockClosure:
    def test_flagship_pipeline(self):
        target = Nfa(
            P12,
            ("q0", "q1"),
            (("q0", "1", "q0"), ("q0", "2", "q1"), ("q1", "1", "q1")),
            "q0",
            ("q1",),
        )
        assert nfa_equivalent_up_to(cfg_block_closure(flagship()), target, 8) is None

    def test_two_letter_word(self):
        g = Cfg(AB0, ("S",), (("S", ("a", "b")),), "S")
        want = nfa_for_words(AB0, [(), ("a",), ("b",), ("a", "b")])
        assert nfa_equivalent_up_to(cfg_block_closure(g), want, 4) is None

    def test_pinned_word_closure(self):
        g = Cfg(D1, ("S",), (("S", ("0a", "1b", "0a")),), "S")
        want = nfa_for_words(
            D1,
            [w("1b"), w("0a,1b"), w("1b,0a"), w("0a,1b,0a")],
        )
        assert nfa_equivalent_up_to(cfg_block_closure(g), want, 5) is None

    def test_all_zero_matches_subword(self):
        got = cfg_block_closure(anbn())
        want = set(closure_bounded(cfg_enumerate(anbn(), 12), OrderKind.SUBWORD, AB0, 6))
        assert set(nfa_enumerate(got, 6)) == want

    def test_empty_grammar(self):
        assert nfa_enumerate(cfg_block_closure(empty_grammar()), 4) == []

    def test_empty_word_grammar(self):
        g = Cfg(AB0, ("S",), (("S", ()),), "S")
        assert nfa_enumerate(cfg_block_closure(g), 3) == [()]


class TestPriorityClosure:
    def test_flagship_matches_oracle(self):
        got = set(nfa_enumerate(cfg_priority_closure(flagship()), 7))
        want = set(
            closure_bounded(
                cfg_enumerate(flagship(), 15), OrderKind.PRIORITY, P12, 7
            )
        )
        assert got == want

    def test_empty(self):
        assert nfa_enumerate(cfg_priority_closure(empty_grammar()), 4) == []

    def test_idempotent(self):
        closed = cfg_priority_closure(flagship())
        again = closure_regular(closed, OrderKind.PRIORITY)
        assert nfa_equivalent_up_to(closed, again, 6) is None


FULL_SANDWICH = [
    Cfg(D1, ("S",), (("S", ("0a", "1b", "0a")),), "S"),
    Cfg(AB01, ("S",), (("S", ("a", "b")), ("S", ("b",))), "S"),
    Cfg(A1, ("S",), (("S", ("a", "S")), ("S", ("a",))), "S"),
    Cfg(AB0, ("S",), (("S", ("a", "S")), ("S", ("a",))), "S"),
]

CONTAINMENT_ONLY = [
    anbn(AB0),
    anbn(AB01),
    anbn(AB10),
    ring(),
]


class TestClosureInvariants:
    def test_sandwich_full(self):
        for g in FULL_SANDWICH:
            lang6 = set(cfg_enumerate(g, 6))
            mid = set(nfa_enumerate(cfg_block_closure(g), 6))
            upper = set(
                closure_bounded(cfg_enumerate(g, 10), OrderKind.BLOCK, g.alphabet, 6)
            )
            lower_closed = set(
                closure_bounded(sorted(lang6), OrderKind.BLOCK, g.alphabet, 6)
            )
            assert lang6 <= mid <= upper
            assert lower_closed == upper

    def test_sandwich_containment(self):
        for g in CONTAINMENT_ONLY:
            lang6 = set(cfg_enumerate(g, 6))
            mid = set(nfa_enumerate(cfg_block_closure(g), 6))
            assert lang6 <= mid
            dominators = cfg_enumerate(g, 26)
            for u in sorted(mid):
                assert any(
                    leq_block_absorbing_ref(g.alphabet, u, v) for v in dominators
                ), (g.start, u)

    def test_exact_bounded_equality(self):
        for g in FULL_SANDWICH + [anbn(AB01), anbn(AB10), anbn(AB0)]:
            got = set(nfa_enumerate(cfg_block_closure(g), 6))
            want = set(
                closure_bounded(cfg_enumerate(g, 12), OrderKind.BLOCK, g.alphabet, 6)
            )
            assert got == want, g.productions

    def test_seam_separates_block_order(self):
        base = PriorityAlphabet.from_map({"x": 0, "s": 1})
        hat = PriorityAlphabet.from_map({"x": 0, "s": 1, "#": 0})
        words = [()]
        for n in range(1, 5):
            fresh = []
            for u in words:
                if len(u) == n - 1:
                    fresh.extend([u + ("x",), u + ("s",)])
            words.extend(fresh)
        pairs = [(u, v) for u in words for v in words if len(u) + len(v) <= 4]
        for u, v in pairs:
            for uu, vv in pairs:
                joined = leq_block(hat, u + ("#",) + v, uu + ("#",) + vv)
                split = leq_block(base, u, uu) and leq_block(base, v, vv)
                assert joined == split, (u, v, uu, vv)

    def test_nonterminal_recurrence(self):
        from prioclose.core import flatten

        for g in (flagship(), anbn(AB01), ring()):
            flat = flatten(g.alphabet)
            cnf, _ = to_cnf(g)
            fcnf = Cfg(flat, cnf.nonterminals, cnf.productions, cnf.start)
            stats = {}
            _kleene(fcnf, frozenset(), stats)
            n = stats["n"]
            p = stats["p"]
            biggest = max(stats["inner"], default=1)
            allowed = n + n * (p + 1) ** 2 * (3 * biggest + 2) + p + 2
            assert stats["result"] <= allowed, stats

    def test_expanded_seams_dominated_by_pumps(self):
        cases = [
            (flagship(), "X", 1, 1),
            (ring(), "X", 0, 0),
        ]
        for g, x, r, s in cases:
            seam_words = cfg_enumerate(ends_grammar(g, x, r, s), 8)
            left_g, right_g = repeats_grammars(g, x, r, s)
            left_reps = cfg_enumerate(left_g, 4)
            right_reps = cfg_enumerate(right_g, 4)
            pumps = derived_contexts(g, x, 10)

            def expansions(pri, reps):
                if pri >= 1:
                    head = (g.alphabet.letters_of(pri)[0],)
                else:
                    head = ()
                out = {head}
                for first in reps:
                    out.add(head + first)
                    for second in reps:
                        out.add(head + first + second)
                return out

            for word in seam_words:
                i, j, k = word.index("#L"), word.index("#"), word.index("#R")
                for mid_l in expansions(r, left_reps):
                    for mid_r in expansions(s, right_reps):
                        u = word[:i] + mid_l + word[i + 1 : j]
                        v = word[j + 1 : k] + mid_r + word[k + 1 :]
                        if len(u) + len(v) > 6:
                            continue
                        assert any(
                            leq_block(g.alphabet, u, uu)
                            and leq_block(g.alphabet, v, vv)
                            for uu, vv in pumps
                        ), (u, v)


class TestSerialization:
    def test_cfg_round_trip(self):
        g = flagship()
        data = cfg_serialize(g)
        back = cfg_parse(data, P12)
        assert back == g

    def test_kleene_round_trip(self):
        h = kleene_closure_grammar(anbn())
        data = kleene_serialize(h)
        back = kleene_parse(data, AB0)
        assert back == h

    def test_malformed(self):
        with pytest.raises(ValueError):
            cfg_parse({"start": "S"}, AB0)
        with pytest.raises(ValueError):
            cfg_parse(
                {
                    "start": "S",
                    "nonterminals": ["S"],
                    "terminals": ["z"],
                    "productions": [],
                },
                AB0,
            )
        with pytest.raises(ValueError):
            kleene_parse(
                {
                    "start": "S",
                    "nonterminals": ["S"],
                    "productions": [["S", [{"weird": "A"}]]],
                },
                AB0,
            )

    def test_dot(self):
        text = cfg_to_dot(flagship())
        assert text.startswith("digraph")
        assert '"X"' in text

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            Cfg(AB0, ("S",), (("S", ("Q",)),), "S")
        with pytest.raises(ValueError):
            Cfg(AB0, ("S",), (), "T")
        with pytest.raises(ValueError):
            Cfg(AB0, ("a", "S"), (), "S")

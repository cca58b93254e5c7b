"""Closures of one-counter languages.

A counter machine recognizing a^n b^n is nowhere near regular, yet its
downward closure is.  The pipeline first over-approximates the machine
by a finite automaton that is still inside the closure, then closes
that automaton; machines with zero tests go through a grammar instead.
"""

from prioclose import (
    AcceptMode,
    CounterOp,
    Oca,
    OrderKind,
    PriorityAlphabet,
    SimpleOca,
    closure_regular,
    compare_closure,
    format_word,
    nfa_enumerate,
    oca_block_closure,
    oca_enumerate,
    soca_closure_nfa,
)

AB = PriorityAlphabet.from_map({"a": 0, "b": 1})
ABC = PriorityAlphabet.from_map({"a": 0, "b": 0, "c": 1})


def counting_machine() -> SimpleOca:
    """a^n b^n: push on a, guess the middle, pop on b, accept empty."""
    return SimpleOca(
        AB,
        ("push", "pop"),
        (
            ("push", "a", CounterOp.INC, "push"),
            ("push", None, CounterOp.NOOP, "pop"),
            ("pop", "b", CounterOp.DEC, "pop"),
        ),
        "push",
        "pop",
    )


def batch_machine() -> Oca:
    """a^n b^n c with the trailing c guarded by a zero test."""
    return Oca(
        ABC,
        ("fill", "drain", "done"),
        (
            ("fill", "a", CounterOp.INC, "fill"),
            ("fill", "b", CounterOp.DEC, "drain"),
            ("drain", "b", CounterOp.DEC, "drain"),
            ("drain", "c", CounterOp.ZERO, "done"),
            ("fill", "c", CounterOp.ZERO, "done"),
        ),
        "fill",
        ("done",),
        AcceptMode.ZERO_COUNTER,
    )


def main() -> None:
    simple = counting_machine()
    print("a^n b^n sample:")
    print(" ", ", ".join(format_word(v) or "ε" for v in oca_enumerate(simple, 6)))

    approx = soca_closure_nfa(simple)
    print(f"Finite over-approximation: {len(approx.states)} states.")
    closed = closure_regular(approx, OrderKind.BLOCK)
    print("Block closure up to length 5 (all of a* b+ and ε):")
    print(" ", ", ".join(format_word(u) or "ε" for u in nfa_enumerate(closed, 5)))

    print()
    machine = batch_machine()
    print("a^n b^n c sample:")
    print(" ", ", ".join(format_word(v) for v in oca_enumerate(machine, 5)))
    closed = oca_block_closure(machine)
    print("Its block closure keeps the mandatory c and frees the counts:")
    print(" ", ", ".join(format_word(u) or "ε" for u in nfa_enumerate(closed, 3)))
    report = compare_closure(machine, OrderKind.BLOCK, closed, bound=6, dom_bound=12)
    print(f"Oracle check at bound 6: equal={str(report.equal).lower()}")


if __name__ == "__main__":
    main()

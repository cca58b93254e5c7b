"""Tour of the three word orders.

Messages travel as words over an alphabet whose letters carry priorities.
A channel under congestion may drop letters, but a letter survives any
purge that only discards lower-priority traffic around it.  Three orders
capture increasingly faithful pictures of that process:

* subword: any letter can vanish;
* priority: a letter can vanish only into a gap guarded by a letter of
  the same or higher priority arriving later;
* block: the word is split at its highest-priority letters and the rule
  recurses into the spans between them.
"""

from prioclose import (
    OrderKind,
    PriorityAlphabet,
    block_decompose,
    format_word,
    leq,
    max_priority,
    parse_word,
)

ALPHABET = PriorityAlphabet.from_map(
    {"0a": 0, "0b": 0, "1a": 1, "1b": 1, "2a": 2, "2b": 2}
)


def show(u_text: str, v_text: str) -> None:
    u, v = parse_word(u_text), parse_word(v_text)
    verdicts = ", ".join(
        f"{order.value}={'yes' if leq(ALPHABET, order, u, v) else 'no'}"
        for order in (OrderKind.SUBWORD, OrderKind.PRIORITY, OrderKind.BLOCK)
    )
    print(f"  {u_text or 'ε':>24}  below  {v_text or 'ε':<44} {verdicts}")


def main() -> None:
    print("Distinguishing pairs over a six-letter, three-priority alphabet:")
    show("", "0a")
    show("", "1a")
    show("0a", "0a,0b")
    show("1b,0a", "0a,1b,0a,0a,1a,0a,0b")
    show("1b,0a", "0a,1b,0a,0a,1a,0b,0b")
    show("2a,1b,0a", "0a,2a,0a,1b,0a,0a,1a,0a,0b")
    show("1a,1b", "1a,2a,1b")
    show("1a,0a", "1a,1b,0a")

    print()
    print("The last pair is block-related but not priority-related: the")
    print("block order may drop the separator 1b because the whole span")
    print("around it stays below the matching span of the larger word,")
    print("while the priority order insists on a same-letter anchor for")
    print("every surviving position.")

    print()
    word = parse_word("0a,1b,0a,0a,1a,0a,0b")
    top = max_priority(ALPHABET, word)
    decomposition = block_decompose(ALPHABET, word, top)
    print(f"Decomposition of {format_word(word)} at priority {top}:")
    for i, block in enumerate(decomposition.blocks):
        print(f"  block {i}: {format_word(block) or 'ε'}")
        if i < len(decomposition.separators):
            print(f"  separator: {decomposition.separators[i]}")


if __name__ == "__main__":
    main()

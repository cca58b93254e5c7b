"""Transducers that rewrite a language into its downward closure.

Each order comes with a small nondeterministic transducer: feed it an
automaton for a language and the output automaton accepts every word
obtainable by dropping letters the order allows to drop.  The machines
stay tiny, linear in the number of priorities.
"""

from prioclose import (
    PriorityAlphabet,
    apply_transduction,
    block_transducer,
    format_word,
    nfa_enumerate,
    nfa_for_words,
    parse_word,
    priority_transducer,
    subword_transducer,
)

FLAT = PriorityAlphabet.from_map({"0": 0, "1": 1, "2": 2})


def main() -> None:
    d = FLAT.max_assigned_priority
    builders = [
        ("subword", subword_transducer(FLAT)),
        ("priority", priority_transducer(FLAT)),
        ("block", block_transducer(FLAT)),
    ]
    print(f"Transducer sizes for {d + 1} priorities:")
    for name, trans in builders:
        print(f"  {name:>8}: {len(trans.states)} states")

    word = parse_word("1,2,0,1")
    source = nfa_for_words(FLAT, [word])
    print()
    print(f"Everything below {format_word(word)}:")
    for name, trans in builders:
        image = apply_transduction(trans, source)
        words = [format_word(u) or "ε" for u in nfa_enumerate(image, len(word))]
        print(f"  {name:>8}: {', '.join(words)}")

    print()
    print("The subword image is the largest and the block image the")
    print("smallest: each refinement forbids more of the drops.")


if __name__ == "__main__":
    main()

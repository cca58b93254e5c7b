"""Downward closures under subword, priority, and block orders."""

from .automata import (
    Nfa,
    Transducer,
    apply_transduction,
    block_transducer,
    closure_regular,
    nfa_accepts,
    nfa_concat,
    nfa_enumerate,
    nfa_equivalent,
    nfa_equivalent_up_to,
    nfa_for_words,
    nfa_intersect,
    nfa_parse,
    nfa_serialize,
    nfa_to_dot,
    nfa_union,
    priority_transducer,
    subword_transducer,
)
from .cfg import (
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
)
from .core import (
    EMPTY_WORD,
    BlockDecomposition,
    OrderKind,
    PriorityAlphabet,
    ResourceLimit,
    Word,
    block_decompose,
    flatten,
    format_word,
    is_subword,
    leq,
    leq_block,
    leq_priority,
    max_priority,
    parse_word,
)
from .oca import (
    AcceptMode,
    CounterOp,
    Oca,
    SimpleOca,
    oca_accepts_bounded,
    oca_block_closure,
    oca_enumerate,
    oca_parse,
    oca_priority_closure,
    oca_serialize,
    oca_to_dot,
    soca_closure_nfa,
)
from .oracle import ClosureReport, closure_bounded, compare_closure, subwords_up_to

__all__ = [
    "AcceptMode",
    "BlockDecomposition",
    "Cfg",
    "ClosureReport",
    "CounterOp",
    "EMPTY_WORD",
    "HatAlphabet",
    "KleeneGrammar",
    "Nfa",
    "Oca",
    "OrderKind",
    "PriorityAlphabet",
    "ResourceLimit",
    "SimpleOca",
    "Transducer",
    "Word",
    "acyclic_nfa",
    "apply_transducer_to_cfg",
    "apply_transduction",
    "block_decompose",
    "block_transducer",
    "cfg_block_closure",
    "cfg_enumerate",
    "cfg_intersect_regular_empty",
    "cfg_parse",
    "cfg_priority_closure",
    "cfg_serialize",
    "cfg_to_dot",
    "closure_bounded",
    "closure_regular",
    "compare_closure",
    "ends_grammar",
    "flatten",
    "format_word",
    "is_subword",
    "kleene_closure_grammar",
    "kleene_parse",
    "kleene_serialize",
    "leq",
    "leq_block",
    "leq_priority",
    "max_priority",
    "nfa_accepts",
    "nfa_concat",
    "nfa_enumerate",
    "nfa_equivalent",
    "nfa_equivalent_up_to",
    "nfa_for_words",
    "nfa_intersect",
    "nfa_parse",
    "nfa_serialize",
    "nfa_to_dot",
    "nfa_union",
    "oca_accepts_bounded",
    "oca_block_closure",
    "oca_enumerate",
    "oca_parse",
    "oca_priority_closure",
    "oca_serialize",
    "oca_to_dot",
    "parse_word",
    "priority_transducer",
    "pump_pair_grammar",
    "repeats_grammars",
    "side_alphabets",
    "soca_closure_nfa",
    "subword_transducer",
    "subwords_up_to",
    "to_cnf",
]

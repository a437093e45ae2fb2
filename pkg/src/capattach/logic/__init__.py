"""First-order logic of graphs: syntax, model checking, pebble games, sentence sampling."""

from .evaluate import adjacency_matrix, eval_table, fo_eval
from .game import GamePosition, PebbleGame, duplicator_wins, is_partial_isomorphism
from .sampling import catalog, catalog_within, sample_sentences
from .syntax import (Adj, And, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or, Sentence,
                     parse_formula, parse_formulas, parse_sentence, parse_sentences, to_sexpr)

FOSentence = Sentence

__all__ = [
    "Adj", "And", "Eq", "Exists", "FOSentence", "Forall", "Formula", "GamePosition", "Iff",
    "Implies", "Not", "Or", "PebbleGame", "Sentence", "adjacency_matrix", "catalog",
    "catalog_within", "duplicator_wins", "eval_table", "fo_eval", "is_partial_isomorphism",
    "parse_formula", "parse_formulas", "parse_sentence", "parse_sentences", "sample_sentences",
    "to_sexpr",
]

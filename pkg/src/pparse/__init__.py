"""Semi-supervised dependency parsing from partial annotations.

Trains a graph-based parser on unlabeled corpora by conditional-gradient
optimization over the tree polytope, with reward vectors compiled from
universal head-dependent rules and from partial annotations written in a
Graph Fragment Language subset, plus the simulation and evaluation harness
around it (degradation, cost models, agreement, learning curves).
"""

from .constraints import (
    ArcIndex,
    ConstraintSet,
    RuleSet,
    build_gfl_vector,
    compile_gfl_constraints,
    compile_ug_vector,
    default_rules,
)
from .decoder import BACKEND, InfeasibleError, best_tree, brute_force_best_tree, right_branching
from .evaluate import agreement_matrix, learning_curve, pairwise_agreement, uas
from .features import FeatureVocabulary, build_design_matrix, extract_arc_features
from .gfl import Bracket, FragmentGraph, GflError, parse_gfl, read_gfl_file, serialize_gfl, validate
from .optimizer import (
    Model,
    TrainConfig,
    compute_gradient,
    frank_wolfe_train,
    load_model,
    objective,
    parse_corpus,
    parse_sentence,
    save_model,
    solve_ridge,
)
from .simulate import CostModel, DegradationConfig, corpus_cost, cost_curve, degrade_tree
from .treebank import Corpus, Sentence, Token, filter_by_length, read_conll, write_conll

__version__ = "0.1.0"

__all__ = [
    "ArcIndex",
    "BACKEND",
    "Bracket",
    "ConstraintSet",
    "Corpus",
    "CostModel",
    "DegradationConfig",
    "FeatureVocabulary",
    "FragmentGraph",
    "GflError",
    "InfeasibleError",
    "Model",
    "RuleSet",
    "Sentence",
    "Token",
    "TrainConfig",
    "agreement_matrix",
    "best_tree",
    "brute_force_best_tree",
    "build_design_matrix",
    "build_gfl_vector",
    "compile_gfl_constraints",
    "compile_ug_vector",
    "compute_gradient",
    "corpus_cost",
    "cost_curve",
    "default_rules",
    "degrade_tree",
    "extract_arc_features",
    "filter_by_length",
    "frank_wolfe_train",
    "learning_curve",
    "load_model",
    "objective",
    "pairwise_agreement",
    "parse_corpus",
    "parse_gfl",
    "parse_sentence",
    "read_conll",
    "read_gfl_file",
    "right_branching",
    "save_model",
    "serialize_gfl",
    "solve_ridge",
    "uas",
    "validate",
    "write_conll",
]

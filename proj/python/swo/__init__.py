"""Social-welfare optimization toolkit (Python bindings)."""

from ._core import (
    SwoError,
    brute_force_oracle,
    canonical_spec,
    dataset_facts,
    encode_german_credit,
    evaluate,
    gini_index,
    leximax_compare,
    outcome_utility,
    predict_prob,
    solve,
    train,
    welfare_gradient,
)

__version__ = "0.1.0"

__all__ = [
    "SwoError",
    "brute_force_oracle",
    "canonical_spec",
    "dataset_facts",
    "encode_german_credit",
    "evaluate",
    "gini_index",
    "leximax_compare",
    "outcome_utility",
    "predict_prob",
    "solve",
    "train",
    "welfare_gradient",
]

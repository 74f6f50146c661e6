"""Mean-deviation uncertainty measures, relations and their applications."""

from .deviation import DeviationReport, md_uncertainty, primed_operator, sd_uncertainty
from .numkit import Observable, State, eig_hermitian, kron, partial_trace
from .relations import (
    ObservableSet,
    RelationVerdict,
    entropic_lemma_check,
    product_relation,
    state_independent_bound,
    sum_relation,
    tent_max,
)

__version__ = "0.1.0"

__all__ = [
    "DeviationReport",
    "Observable",
    "ObservableSet",
    "RelationVerdict",
    "State",
    "eig_hermitian",
    "entropic_lemma_check",
    "kron",
    "md_uncertainty",
    "partial_trace",
    "primed_operator",
    "product_relation",
    "sd_uncertainty",
    "state_independent_bound",
    "sum_relation",
    "tent_max",
]

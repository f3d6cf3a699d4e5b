"""Partial actions of the integers on finite metric spaces and their entropy."""

from .core import (
    UNDEF,
    AxiomError,
    AxiomReport,
    FinitePartialSystem,
    SampledPartialSystem,
    check_axioms,
    disjoint_union,
    global_system,
    one_point,
    product,
    relabel,
    require_axioms,
    restrict,
    restrict_global,
)
from .metrics import MetricError
from .orbit import d_n, index_signature, partial_ball, signature_neighborhood
from .counting import (
    CountReport,
    count_report,
    exact_cover_count,
    exact_separated,
    exact_spanning,
    greedy_separated,
    greedy_spanning,
)

__version__ = "0.1.0"

"""Generic labelled transition systems, a lazy relational calculus, CCS,
and coinductive behavioural relations."""

from .errors import (BudgetExhausted, CcsSyntaxError, ClosednessError,
                     DomainError, LtsError, RefusedOperation, UnguardedRecursion)
from .lts import (AsyncState, LabelKind, Lts, Proc, explore, lts_from_triples,
                  show, to_dot, wbarbs, weak_reducts)
from .relcalc import Cardinality, Rel, rel_filter, rel_map, rel_par, rel_seq, rel_union

__all__ = [
    "AsyncState", "BudgetExhausted", "Cardinality", "CcsSyntaxError",
    "ClosednessError", "DomainError", "LabelKind", "Lts", "LtsError", "Proc",
    "Rel", "RefusedOperation", "UnguardedRecursion", "explore",
    "lts_from_triples", "rel_filter", "rel_map", "rel_par", "rel_seq",
    "rel_union", "show", "to_dot", "wbarbs", "weak_reducts",
]

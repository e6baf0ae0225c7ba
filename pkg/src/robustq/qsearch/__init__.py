from .contract import RobustFindOutcome, RobustFindParams, robust_find_contract, robust_find_cost
from .statevector import StateVector, grover_robust, query_distance, robustified_query
from .validate import cross_validate_backends

__all__ = [
    "RobustFindOutcome",
    "RobustFindParams",
    "StateVector",
    "cross_validate_backends",
    "grover_robust",
    "query_distance",
    "robust_find_contract",
    "robust_find_cost",
    "robustified_query",
]

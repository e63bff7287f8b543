"""Interactive Bayesian preference elicitation for multi-objective decision support."""

try:
    # Every dense matrix in this package is small (a few hundred rows at
    # most); multithreaded BLAS only adds thread-handoff overhead there, and
    # experiment replications parallelize at the process level instead.
    from threadpoolctl import threadpool_limits as _threadpool_limits

    _BLAS_SINGLE_THREAD = _threadpool_limits(limits=1)
except Exception:  # pragma: no cover - threadpoolctl is optional
    _BLAS_SINGLE_THREAD = None

__version__ = "0.1.0"

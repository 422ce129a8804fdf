import logging

import numpy as np
from scipy import linalg

from vegcast.core import ConditioningError

logger = logging.getLogger(__name__)

INITIAL_JITTER = 1e-6
MAX_JITTER = 1e-2


def jitchol(gram: np.ndarray) -> tuple[np.ndarray, float]:
    """
    Lower Cholesky factor of a Gram matrix with a relative diagonal jitter.

    The jitter starts at ``1e-6`` times the mean diagonal and is doubled on every
    failed factorisation until it exceeds ``1e-2`` times the mean diagonal.

    Parameters
    ----------
    gram : np.ndarray
        Symmetric ``(n, n)`` matrix.

    Returns
    -------
    tuple[np.ndarray, float]
        The factor and the absolute jitter that was added.

    Raises
    ------
    ConditioningError
        If the matrix cannot be factorised with the largest jitter.
    """
    gram = np.ascontiguousarray(gram)
    diag_mean = float(np.mean(np.diag(gram)))
    if not np.isfinite(diag_mean) or diag_mean <= 0.0:
        raise ConditioningError(f"Gram matrix has a non-positive or non-finite mean diagonal ({diag_mean})")

    relative = INITIAL_JITTER
    eye = np.eye(gram.shape[0])
    while relative <= MAX_JITTER:
        jitter = relative * diag_mean
        try:
            return linalg.cholesky(gram + jitter * eye, lower=True, check_finite=False), jitter
        except linalg.LinAlgError:
            logger.debug("cholesky failed with relative jitter %.1e, doubling", relative)
            relative *= 2.0
    raise ConditioningError(f"Gram matrix not positive definite even with jitter {MAX_JITTER:.0e} x mean diagonal")


def cho_solve(factor: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``A x = rhs`` given the lower Cholesky factor of ``A``."""
    return linalg.cho_solve((factor, True), rhs, check_finite=False)


def log_det(factor: np.ndarray) -> float:
    """Log determinant of ``A`` from its lower Cholesky factor."""
    return 2.0 * float(np.log(np.diag(factor)).sum())

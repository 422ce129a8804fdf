import itertools
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from vegcast.core import GPFitError, NumericalError, ReasonCode
from vegcast.utils import log_event

from .kernels import PRIMITIVES, Primitive, build_kernel, free_hyperparameters
from .model import GPModel, gp_fit

logger = logging.getLogger(__name__)

# candidates this close to the best likelihood are ranked by simplicity
TIE_NATS = 1.0
CANDIDATE_COLUMNS = ["rank", "structure", "log_marginal_likelihood", "parameter_count", "hyperparameters", "failed",
                     "detail"]


@dataclass(frozen=True)
class KernelCandidate:
    """
    One structure tried by the kernel search.

    Attributes
    ----------
    structure : str
        Structure string, e.g. ``"RBF+PERIODIC"``.
    log_marginal_likelihood : float
        Achieved log marginal likelihood, ``-inf`` when the fit failed.
    model : GPModel | None
        The fitted model (the best restart for a non-converged fit).
    failed : bool
        True when the fit raised.
    detail : str
        The failure message.
    """

    structure: str
    log_marginal_likelihood: float
    model: GPModel | None = None
    failed: bool = False
    detail: str = ""

    @property
    def parameter_count(self) -> int:
        # noise variance is shared by every candidate
        return len(free_hyperparameters(build_kernel(self.structure)))


def candidate_structures(candidate_set=PRIMITIVES) -> list[str]:
    """Every primitive, then the sum and the product of every pair of distinct primitives."""
    primitives = [Primitive.from_string(p) if isinstance(p, str) else p for p in candidate_set]
    structures = [p.value for p in primitives]
    for a, b in itertools.combinations(primitives, 2):
        structures.append(f"{a.value}+{b.value}")
        structures.append(f"{a.value}*{b.value}")
    return structures


def rank_candidates(candidates: list[KernelCandidate], tie_nats: float = TIE_NATS) -> list[KernelCandidate]:
    """
    Order candidates by descending log marginal likelihood.

    At each position the simplest candidate within ``tie_nats`` of the best
    remaining likelihood is taken, so a nested structure that only matches a
    simpler one is not preferred. Failed fits go last.
    """
    remaining = sorted([c for c in candidates if not c.failed],
                       key=lambda c: (-c.log_marginal_likelihood, c.structure))
    ranked = []
    while remaining:
        best = remaining[0].log_marginal_likelihood
        ties = [c for c in remaining if c.log_marginal_likelihood >= best - tie_nats]
        pick = min(ties, key=lambda c: (c.parameter_count, -c.log_marginal_likelihood, c.structure))
        ranked.append(pick)
        remaining.remove(pick)
    return ranked + sorted([c for c in candidates if c.failed], key=lambda c: c.structure)


def kernel_search(times, values, candidate_set=PRIMITIVES, restarts: int = 5, seed: int = 0,
                  tie_nats: float = TIE_NATS, region_id: str | None = None) -> list[KernelCandidate]:
    """
    Fit every primitive and every pairwise sum and product of distinct primitives.

    Parameters
    ----------
    times, values : array-like
        Training data as for :func:`gp_fit`.
    candidate_set : iterable, optional
        Primitives to combine.
    restarts, seed : int, optional
        Passed to every fit.
    tie_nats : float, optional
        See :func:`rank_candidates`.
    region_id : str, optional
        Region named in the log lines.

    Returns
    -------
    list[KernelCandidate]
        Ranked best first; failed fits are flagged and listed last.
    """
    candidates = []
    for structure in candidate_structures(candidate_set):
        try:
            model = gp_fit(times, values, structure, restarts=restarts, seed=seed)
            candidates.append(KernelCandidate(structure, model.log_marginal_likelihood, model))
        except GPFitError as e:
            log_event(logger, "kernel_search", region_id, ReasonCode.FIT_FAILURE, structure=structure, detail=str(e))
            if e.best_model is not None:
                candidates.append(KernelCandidate(structure, e.best_model.log_marginal_likelihood, e.best_model,
                                                  detail=str(e)))
            else:
                candidates.append(KernelCandidate(structure, -np.inf, None, failed=True, detail=str(e)))
        except NumericalError as e:
            log_event(logger, "kernel_search", region_id, ReasonCode.FIT_FAILURE, structure=structure, detail=str(e))
            candidates.append(KernelCandidate(structure, -np.inf, None, failed=True, detail=str(e)))

    ranked = rank_candidates(candidates, tie_nats)
    if ranked and not ranked[0].failed:
        log_event(logger, "kernel_search", region_id, best=ranked[0].structure,
                  lml=ranked[0].log_marginal_likelihood, candidates=len(ranked))
    return ranked


def candidates_frame(candidates: list[KernelCandidate]) -> pd.DataFrame:
    """
    One row per ranked candidate; ``hyperparameters`` lists the fitted values as
    ``name=value`` pairs in natural units.
    """
    rows = []
    for rank, c in enumerate(candidates, start=1):
        fitted = "" if c.model is None else ";".join(f"{k}={v:.6g}" for k, v in c.model.hyperparameters().items())
        rows.append([rank, c.structure, c.log_marginal_likelihood, c.parameter_count, fitted, c.failed, c.detail])
    return pd.DataFrame(rows, columns=CANDIDATE_COLUMNS)

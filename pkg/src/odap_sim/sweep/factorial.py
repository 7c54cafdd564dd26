"""Two-level factorial regression with interactions.

Factors are coded -1 (fragment on its databases) / +1 (fragment on the
product). The model holds an intercept, every main effect and every
interaction up to ``max_level`` factors. On the full factorial the columns are
orthogonal and each coefficient is the contrast ``X[:, j] @ y / 2**k``; any
other design is fitted by least squares.
"""

from dataclasses import dataclass
from itertools import combinations
import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import linalg, stats

from ..errors import ModelFitError
from ..scenario.patterns import DistributionPattern
from .stats import pooled_variance


logger = logging.getLogger(__name__)

INTERCEPT = "intercept"
DEFAULT_ALPHA = 0.05
FACTOR_COLUMNS = ["term", "coefficient_s", "std_err", "t", "p", "significant"]

Term = Tuple[str, Tuple[int, ...]]


def default_factor_names(k: int) -> List[str]:
    return [f"F{i + 1}" for i in range(k)]


def build_terms(factor_names: Sequence[str], max_level: int = 3) -> List[Term]:
    """Intercept, then mains, then 2-way, 3-way, ... each in lexicographic order."""
    terms: List[Term] = [(INTERCEPT, ())]
    for level in range(1, min(max_level, len(factor_names)) + 1):
        for combo in combinations(range(len(factor_names)), level):
            terms.append(("*".join(factor_names[i] for i in combo), combo))
    return terms


def coded_matrix(patterns: Sequence[DistributionPattern]) -> np.ndarray:
    bits = np.array([p.bits for p in patterns], dtype=bool).reshape(len(patterns), -1)
    return np.where(bits, 1.0, -1.0)


def model_matrix(coded: np.ndarray, terms: Sequence[Term]) -> np.ndarray:
    columns = [np.prod(coded[:, list(factors)], axis=1) for _, factors in terms]
    return np.column_stack(columns) if columns else np.empty((len(coded), 0))


@dataclass
class FactorModel:
    terms: List[str]
    coefficients: np.ndarray
    std_err: np.ndarray
    t: np.ndarray
    p: np.ndarray
    alpha: float
    max_level: int
    full_factorial: bool
    error_variance: float
    error_dof: int
    residuals: np.ndarray

    @property
    def significant(self) -> np.ndarray:
        return np.nan_to_num(self.p, nan=1.0) < self.alpha

    def coefficient(self, term: str) -> float:
        return float(self.coefficients[self.terms.index(term)])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "term": self.terms,
                "coefficient_s": self.coefficients,
                "std_err": self.std_err,
                "t": self.t,
                "p": self.p,
                "significant": self.significant,
            },
            columns=FACTOR_COLUMNS,
        )


def _check_rank(design: np.ndarray, names: List[str]) -> None:
    _, r, pivots = linalg.qr(design, mode="economic", pivoting=True)
    diagonal = np.abs(np.diag(r))
    tolerance = diagonal.max(initial=0.0) * max(design.shape) * np.finfo(float).eps
    rank = int((diagonal > tolerance).sum())
    if rank < design.shape[1]:
        dependent = [names[i] for i in pivots[rank:]]
        raise ModelFitError(
            f"model matrix has rank {rank} < {design.shape[1]} terms; "
            f"collinear terms: {', '.join(dependent)}"
        )


def fit_factorial_regression(
    patterns: Sequence[DistributionPattern],
    mean_responses: Sequence[float],
    max_level: int = 3,
    factor_names: Optional[Sequence[str]] = None,
    alpha: float = DEFAULT_ALPHA,
    error_variance: Optional[float] = None,
    error_dof: int = 0,
    replicates: float = 1,
) -> FactorModel:
    """Fit per-pattern mean responses.

    ``error_variance``/``error_dof`` carry the pooled replicate variance; when
    absent the residual variance of the fit is used instead.
    """
    y = np.asarray(mean_responses, dtype=float)
    if len(patterns) != len(y):
        raise ModelFitError(f"{len(patterns)} patterns but {len(y)} responses")
    if not len(y):
        raise ModelFitError("no responses to fit")
    k = patterns[0].k
    names = list(factor_names) if factor_names is not None else default_factor_names(k)
    if len(names) != k:
        raise ModelFitError(f"{len(names)} factor names for {k} factors")
    terms = build_terms(names, max_level)
    term_names = [name for name, _ in terms]
    design = model_matrix(coded_matrix(patterns), terms)
    n, p = design.shape

    ids = {pattern.pattern_id for pattern in patterns}
    full = n == 1 << k and len(ids) == n
    if full:
        coefficients = design.T @ y / n
        inverse_diag = np.full(p, 1.0 / n)
    else:
        logger.warning(
            f"⚠️ {n} patterns do not form the full 2^{k} factorial, "
            "fitting by least squares"
        )
        _check_rank(design, term_names)
        coefficients, *_ = np.linalg.lstsq(design, y, rcond=None)
        inverse_diag = np.diag(np.linalg.inv(design.T @ design))

    residuals = y - design @ coefficients
    scale = max(1.0, float(np.abs(y).max()))
    zero = np.abs(coefficients) <= 1e-9 * scale
    coefficients = np.where(zero, 0.0, coefficients)

    if error_variance is not None and error_dof > 0:
        s2, dof = float(error_variance), int(error_dof)
        variance_scale = s2 / replicates
    else:
        dof = n - p
        s2 = float(residuals @ residuals / dof) if dof > 0 else float("nan")
        variance_scale = s2

    std_err = np.sqrt(variance_scale * inverse_diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(zero, 0.0, coefficients / std_err)
    if dof <= 0:
        p_values = np.where(zero, 1.0, np.nan)
    elif s2 == 0:
        p_values = np.where(zero, 1.0, 0.0)
    else:
        p_values = np.where(zero, 1.0, 2 * stats.t.sf(np.abs(t), dof))

    return FactorModel(
        terms=term_names,
        coefficients=coefficients,
        std_err=std_err,
        t=t,
        p=p_values,
        alpha=alpha,
        max_level=max_level,
        full_factorial=full,
        error_variance=s2,
        error_dof=dof,
        residuals=residuals,
    )


def fit_from_summary(
    summary: pd.DataFrame,
    throughput_bps: float,
    max_level: int = 3,
    alpha: float = DEFAULT_ALPHA,
    factor_names: Optional[Sequence[str]] = None,
) -> FactorModel:
    """Fit the cell means of one throughput, with the pooled replicate variance."""
    cells = summary[np.isclose(summary["throughput_bps"], throughput_bps)]
    if cells.empty:
        raise ModelFitError(f"no sweep cells at throughput {throughput_bps:g} bps")
    cells = cells.sort_values("pattern_id")
    patterns = [DistributionPattern.from_bit_string(bits) for bits in cells["pattern_bits"]]
    s2, dof = pooled_variance(cells)
    return fit_factorial_regression(
        patterns,
        cells["mean_s"].to_numpy(),
        max_level=max_level,
        factor_names=factor_names,
        alpha=alpha,
        error_variance=None if dof == 0 else s2,
        error_dof=dof,
        replicates=float(cells["n"].mean()),
    )


def select_significant(
    model: FactorModel, alpha: Optional[float] = None
) -> List[Tuple[str, float]]:
    """Significant non-intercept terms with their coefficients, in term order."""
    level = model.alpha if alpha is None else alpha
    chosen = []
    for name, coefficient, p in zip(model.terms, model.coefficients, model.p):
        if name == INTERCEPT or np.isnan(p):
            continue
        if p < level:
            chosen.append((name, float(coefficient)))
    return chosen

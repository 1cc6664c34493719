"""Association contrasts, Wald ratios and cross-generation stability gaps.

Everything here consumes either raw columns or the observed view of a
dataset (child dosage, child exposure, parent outcome).  The one exception,
``oracle_wald_child``, needs the latent child outcome and is named
accordingly: it is a diagnostic, not an estimator an analyst could run.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import numpy as np

DEFAULT_WEAK_TOL = 1e-4


class EstimatorError(Exception):
    """Base class for estimation failures."""


class DegenerateInstrument(EstimatorError):
    """Instrument column has a single level or zero variance."""


class WeakInstrument(EstimatorError):
    """Gene-exposure contrast too close to zero to divide by."""


class EstimatorUnstable(EstimatorError):
    """Too many bootstrap replicates failed to produce an estimate."""


class ContrastMethod(str, Enum):
    """How a genotype-outcome association is summarized.

    ``DOSAGE_SLOPE`` regresses the outcome on allele dosage (0/1/2); the
    halving of parent-driven associations in the child's genotype is exact
    for this contrast.  ``BINARY_CARRIER`` compares carriers (dosage > 0)
    against non-carriers; the halving is then only approximate.
    """

    DOSAGE_SLOPE = "dosage"
    BINARY_CARRIER = "carrier"


def assoc_diff(
    instrument, outcome, method: ContrastMethod = ContrastMethod.DOSAGE_SLOPE
) -> float:
    """Association contrast of ``outcome`` against ``instrument``."""
    g = np.asarray(instrument, dtype=np.float64)
    y = np.asarray(outcome, dtype=np.float64)
    if g.shape != y.shape or g.ndim != 1:
        raise ValueError("instrument and outcome must be 1-D arrays of equal length")
    if method == ContrastMethod.BINARY_CARRIER:
        carrier = g > 0
        if not carrier.any() or carrier.all():
            raise DegenerateInstrument(
                "carrier contrast needs both carriers and non-carriers"
            )
        return float(y[carrier].mean() - y[~carrier].mean())
    gc = g - g.mean()
    denom = float(gc @ gc)
    if denom <= 0.0:
        raise DegenerateInstrument("instrument column has zero variance")
    return float(gc @ (y - y.mean()) / denom)


def wald(num: float, den: float, weak_tol: float = DEFAULT_WEAK_TOL) -> float:
    """Ratio of an instrument-outcome contrast to an instrument-exposure one."""
    if abs(den) < weak_tol:
        raise WeakInstrument(
            f"instrument-exposure contrast {den:.3g} is below the floor {weak_tol:g}"
        )
    return num / den


def f_mendelian(x: float) -> float:
    """Doubles a child-genotype contrast to the implied own-genotype one.

    A child carries each parental allele with probability one half, so an
    association driven by the parent's genotype shows up at half strength
    against the child's dosage.
    """
    return 2.0 * x


def f_identity(x: float) -> float:
    """No correction; useful for diagnosing how much the doubling matters."""
    return x


CORRECTIONS: dict[str, Callable[[float], float]] = {
    "mendelian": f_mendelian,
    "identity": f_identity,
}


def proxy_wald(
    observed,
    f: Callable[[float], float] = f_mendelian,
    method: ContrastMethod = ContrastMethod.DOSAGE_SLOPE,
    weak_tol: float = DEFAULT_WEAK_TOL,
) -> float:
    """Wald ratio with the parent's outcome as proxy numerator.

    ``f(contrast of Y_P on G) / (contrast of A on G)`` where G is the child
    dosage.  ``observed`` is an :class:`~proxymr.simulate.ObservedTrioData`
    or anything exposing ``d``, ``a`` and ``y_parent`` columns.
    """
    num = f(assoc_diff(observed.d, observed.y_parent, method))
    den = assoc_diff(observed.d, observed.a, method)
    return wald(num, den, weak_tol)


def oracle_wald_child(
    dataset,
    method: ContrastMethod = ContrastMethod.DOSAGE_SLOPE,
    weak_tol: float = DEFAULT_WEAK_TOL,
) -> float:
    """Latent diagnostic: the Wald ratio using the child's own outcome.

    Requires the unobserved ``y_child`` column, so it exists only as a
    simulation-side reference point for the proxy ratio.
    """
    num = assoc_diff(dataset.d_child, dataset.y_child, method)
    den = assoc_diff(dataset.d_child, dataset.a_child, method)
    return wald(num, den, weak_tol)


def stability_gaps(
    config,
    big_n: int = 10**6,
    method: ContrastMethod = ContrastMethod.DOSAGE_SLOPE,
) -> tuple[float, float]:
    """LHS minus RHS of the two cross-generation stability conditions.

    ``gap_outcome``: (child-dosage contrast on the child outcome) minus
    (parent-dosage contrast on the parent outcome).  ``gap_exposure``: the
    same with exposures.  Both vanish when the generations share structural
    equations; either one breaking identifies which estimand the proxy Wald
    ratio stops recovering.
    """
    from .simulate import oracle_associations

    assoc = oracle_associations(config, big_n=big_n, method=method)
    gap_outcome = assoc["gy_assoc"] - assoc["gpyp_assoc"]
    gap_exposure = assoc["ga_assoc"] - assoc["gpap_assoc"]
    return gap_outcome, gap_exposure


def _rows(data) -> int:
    if hasattr(data, "n"):
        return int(data.n)
    if isinstance(data, np.ndarray):
        return data.shape[0]
    if isinstance(data, (tuple, list)):
        return int(np.asarray(data[0]).shape[0])
    raise TypeError(f"cannot bootstrap over {type(data).__name__}")


def _take(data, idx: np.ndarray):
    if hasattr(data, "take") and not isinstance(data, np.ndarray):
        return data.take(idx)
    if isinstance(data, np.ndarray):
        return data[idx]
    return type(data)(np.asarray(col)[idx] for col in data)


def bootstrap_se(data, estimator, replicates: int = 500, seed: int = 0) -> float:
    """Nonparametric bootstrap standard error of a scalar estimator.

    ``data`` may be an array, a tuple of aligned columns, or any object with
    ``n`` and ``take(indices)``.  Replicates that raise an
    :class:`EstimatorError` are skipped; more than 10% of them failing
    raises :class:`EstimatorUnstable`.  Deterministic given ``seed``.
    """
    if replicates < 2:
        raise ValueError("bootstrap needs at least 2 replicates")
    n = _rows(data)
    rng = np.random.default_rng(seed)
    values: list[float] = []
    failures = 0
    for _ in range(replicates):
        idx = rng.integers(0, n, size=n)
        try:
            values.append(float(estimator(_take(data, idx))))
        except EstimatorError:
            failures += 1
    if failures > 0.1 * replicates:
        raise EstimatorUnstable(
            f"{failures} of {replicates} bootstrap replicates failed"
        )
    return float(np.std(values, ddof=1))


def partial_correlation(x, y, given: Sequence = ()) -> float:
    """Pearson correlation of ``x`` and ``y`` after regressing out ``given``.

    The workhorse for checking that simulated data respects the graph's
    d-separation verdicts.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if given:
        design = np.column_stack([np.ones_like(x)] + [np.asarray(z, np.float64) for z in given])
        x = x - design @ np.linalg.lstsq(design, x, rcond=None)[0]
        y = y - design @ np.linalg.lstsq(design, y, rcond=None)[0]
    else:
        x = x - x.mean()
        y = y - y.mean()
    return float(x @ y / np.sqrt((x @ x) * (y @ y)))


# Flat field order shared by the JSON and CSV forms of a report.
REPORT_FIELDS = [
    "n",
    "seed",
    "contrast",
    "f_used",
    "weak_tol",
    "gy_p_assoc",
    "ga_assoc",
    "proxy_wald",
    "wald_child",
    "se_gy_p_assoc",
    "se_ga_assoc",
    "se_proxy_wald",
    "oracle_parent_ate",
    "oracle_parent_ett",
    "oracle_parent_late",
    "complier_share_parent",
    "oracle_child_ate",
    "oracle_child_ett",
    "oracle_child_late",
    "complier_share_child",
    "gap_outcome",
    "gap_exposure",
    "config_digest",
]


@dataclass(frozen=True)
class EstimateReport:
    """Estimates, oracle estimands and stability gaps for one dataset."""

    n: int
    seed: int
    contrast: str
    f_used: str
    weak_tol: float
    gy_p_assoc: float
    ga_assoc: float
    proxy_wald: float
    wald_child: float
    se_gy_p_assoc: float
    se_ga_assoc: float
    se_proxy_wald: float
    oracle_parent_ate: float
    oracle_parent_ett: float
    oracle_parent_late: float
    complier_share_parent: float
    oracle_child_ate: float
    oracle_child_ett: float
    oracle_child_late: float
    complier_share_child: float
    gap_outcome: float
    gap_exposure: float
    config_digest: str

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in REPORT_FIELDS}

    def csv_row(self) -> list:
        return [getattr(self, name) for name in REPORT_FIELDS]

    @staticmethod
    def csv_header() -> list[str]:
        return list(REPORT_FIELDS)

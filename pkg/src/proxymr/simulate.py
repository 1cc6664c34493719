"""Two-generation structural-equation sampler with Mendelian transmission.

One biallelic locus with effect-allele frequency ``p``.  The modeled parent
carries dosage D_P ~ Binomial(2, p); the child receives one of the parent's
two alleles uniformly at random plus an independent mate allele drawn at
frequency ``p``, so D = transmitted + mate and cov(D, D_P) = p(1 - p).
Each generation then follows its own structural equations (linear exposure
shown; the threshold variant turns the same linear index into a binary
exposure):

    A = g0 + g1 * D + ca * U + sa * eA
    Y = b0 + b1 * A + cy * U + delta * D + pi * B + sy * eY
    B = D + eB                    (auxiliary channel, present when pi != 0)

U is a standard-normal background cause shared by exposure and outcome
within a generation; the two generations share nothing but the transmitted
allele.  Counterfactual exposures at fixed dosage and counterfactual
outcomes at fixed exposure reuse the factual noise draws, so factual values
equal counterfactuals evaluated at factual inputs by construction.

Every random column has its own counter-based stream keyed by (seed, column
tag), so a dataset is a pure function of its config and two runs with the
same seed are byte-identical.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from typing import Iterator, Mapping

import numpy as np
import pandas as pd

LINEAR = "linear"
THRESHOLD = "threshold"

PARENT = "parent"
CHILD = "child"


class MonotonicityError(ValueError):
    """Raised when a complier-average effect is requested but defiers exist."""


def derive_seed(master: int, label: object) -> int:
    """Derived 64-bit seed: first 8 bytes, little-endian, of SHA-256 of
    the ASCII string ``"{master}:{label}"``.

    Used for replicate seeds (label = replicate index) and internal oracle
    draws; the formula is fixed so independent implementations can line up
    aggregate statistics.
    """
    digest = hashlib.sha256(f"{master}:{label}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def _stream(seed: int, tag: str) -> np.random.Generator:
    # One Philox stream per column tag: counter-based, so draws for one
    # column never depend on how many draws another column consumed.
    tag_int = int.from_bytes(hashlib.sha256(tag.encode("ascii")).digest()[:8], "little")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, tag_int))))


@dataclass(frozen=True)
class GenerationParams:
    """Structural coefficients for one generation.

    ``direct_gene_outcome_coef`` (delta) injects a gene-to-outcome path that
    skips the exposure; ``aux_pathway_coef`` (pi) routes the gene through an
    auxiliary condition B instead.  Both default to zero, which keeps the
    instrument conditions true.
    """

    exposure_model: str = LINEAR
    exposure_intercept: float = 0.0
    gene_exposure_coef: float = 0.0
    confounder_exposure_coef: float = 0.0
    exposure_noise_sd: float = 1.0
    outcome_intercept: float = 0.0
    exposure_outcome_coef: float = 0.0
    confounder_outcome_coef: float = 0.0
    outcome_noise_sd: float = 1.0
    direct_gene_outcome_coef: float = 0.0
    aux_pathway_coef: float = 0.0
    allow_defiers: bool = False

    def __post_init__(self) -> None:
        if self.exposure_model not in (LINEAR, THRESHOLD):
            raise ValueError(f"unknown exposure_model {self.exposure_model!r}")
        if self.exposure_noise_sd < 0 or self.outcome_noise_sd < 0:
            raise ValueError("noise standard deviations must be >= 0")
        if (
            self.exposure_model == THRESHOLD
            and self.gene_exposure_coef < 0
            and not self.allow_defiers
        ):
            raise ValueError(
                "threshold exposure with a negative gene coefficient creates "
                "defiers; set allow_defiers=True to opt out of monotonicity"
            )


@dataclass(frozen=True)
class ScmConfig:
    """Everything needed to draw one two-generation dataset."""

    allele_freq: float
    parent: GenerationParams
    child: GenerationParams
    n: int
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.allele_freq < 1.0:
            raise ValueError("allele_freq must lie strictly between 0 and 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


@dataclass(frozen=True)
class ObservedTrioData:
    """The columns an analyst actually has: child dosage and exposure, plus
    the parent's outcome."""

    d: np.ndarray
    a: np.ndarray
    y_parent: np.ndarray

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def take(self, idx: np.ndarray) -> "ObservedTrioData":
        return ObservedTrioData(self.d[idx], self.a[idx], self.y_parent[idx])


# Columns of the full (latent-revealing) CSV export, in order.
FULL_COLUMNS = (
    "id,d_parent,d_child,transmitted,a_parent,y_parent,a_child,y_child,"
    "u_parent,u_child,a_cf_low,a_cf_high,y_cf_0,y_cf_1"
).split(",")
OBSERVED_COLUMNS = ["id", "d_child", "y_parent", "a_child"]


class TrioDataset:
    """Sampled individuals with observed and latent columns.

    Counterfactual exposures are stored per instrument level (dosage 0, 1
    and 2) for each generation; counterfactual outcomes are stored at fixed
    exposure 0 and 1.  ``observed()`` is the only sanctioned way to get an
    analyst's view; it exposes nothing latent.
    """

    def __init__(
        self,
        *,
        d_parent: np.ndarray,
        d_child: np.ndarray,
        transmitted: np.ndarray,
        a_parent: np.ndarray,
        y_parent: np.ndarray,
        a_child: np.ndarray,
        y_child: np.ndarray,
        u_parent: np.ndarray,
        u_child: np.ndarray,
        a_cf_parent: np.ndarray,
        a_cf_child: np.ndarray,
        y_cf_parent: np.ndarray,
        y_cf_child: np.ndarray,
        b_parent: np.ndarray | None = None,
        b_child: np.ndarray | None = None,
    ) -> None:
        self.d_parent = d_parent
        self.d_child = d_child
        self.transmitted = transmitted
        self.a_parent = a_parent
        self.y_parent = y_parent
        self.a_child = a_child
        self.y_child = y_child
        self.u_parent = u_parent
        self.u_child = u_child
        self.a_cf_parent = a_cf_parent  # shape (3, n): exposure at dosage 0/1/2
        self.a_cf_child = a_cf_child
        self.y_cf_parent = y_cf_parent  # shape (2, n): outcome at exposure 0/1
        self.y_cf_child = y_cf_child
        self.b_parent = b_parent
        self.b_child = b_child
        for arr in self._arrays():
            arr.setflags(write=False)

    def _arrays(self) -> Iterator[np.ndarray]:
        for value in self.__dict__.values():
            if isinstance(value, np.ndarray):
                yield value

    @property
    def n(self) -> int:
        return self.d_child.shape[0]

    def observed(self) -> ObservedTrioData:
        return ObservedTrioData(self.d_child, self.a_child, self.y_parent)

    # Graph node name -> data column, for graph/data concordance checks.
    def node_values(self, name: str) -> np.ndarray:
        columns: dict[str, np.ndarray | None] = {
            "G": self.d_child,
            "G_P": self.d_parent,
            "A": self.a_child,
            "A_P": self.a_parent,
            "Y": self.y_child,
            "Y_P": self.y_parent,
            "U": self.u_child,
            "U_P": self.u_parent,
            "B": self.b_child,
            "B_P": self.b_parent,
        }
        if name not in columns or columns[name] is None:
            raise KeyError(f"no data column for node {name!r}")
        return columns[name]

    def to_frame(self, reveal_latent: bool = False) -> pd.DataFrame:
        ids = np.arange(self.n, dtype=np.int64)
        if not reveal_latent:
            return pd.DataFrame(
                {
                    "id": ids,
                    "d_child": self.d_child,
                    "y_parent": self.y_parent,
                    "a_child": self.a_child,
                }
            )
        data = {
            "id": ids,
            "d_parent": self.d_parent,
            "d_child": self.d_child,
            "transmitted": self.transmitted,
            "a_parent": self.a_parent,
            "y_parent": self.y_parent,
            "a_child": self.a_child,
            "y_child": self.y_child,
            "u_parent": self.u_parent,
            "u_child": self.u_child,
            "a_cf_low": self.a_cf_child[0],
            "a_cf_high": self.a_cf_child[1],
            "y_cf_0": self.y_cf_child[0],
            "y_cf_1": self.y_cf_child[1],
        }
        return pd.DataFrame(data)[FULL_COLUMNS]

    def to_csv(self, path_or_buf, reveal_latent: bool = False) -> None:
        self.to_frame(reveal_latent).to_csv(path_or_buf, index=False, lineterminator="\n")


def _structural(
    params: GenerationParams,
    dosage: np.ndarray,
    u: np.ndarray,
    eps_a: np.ndarray,
    eps_y: np.ndarray,
    eps_b: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None, np.ndarray, np.ndarray]:
    p = params

    def exposure_at(level) -> np.ndarray:
        lin = (
            p.exposure_intercept
            + p.gene_exposure_coef * level
            + p.confounder_exposure_coef * u
            + p.exposure_noise_sd * eps_a
        )
        if p.exposure_model == THRESHOLD:
            return (lin > 0.0).astype(np.float64)
        return lin

    # Factual exposure is read off the counterfactual stack, which makes
    # the consistency identity A == A(D) exact by construction.
    a_cf = np.stack([exposure_at(float(g)) for g in (0, 1, 2)])
    a = a_cf[dosage.astype(np.intp), np.arange(dosage.shape[0])]

    if p.aux_pathway_coef != 0.0:
        assert eps_b is not None
        b = dosage.astype(np.float64) + eps_b
        aux = p.aux_pathway_coef * b
    else:
        b = None
        aux = 0.0

    def outcome_at(a_val) -> np.ndarray:
        return (
            p.outcome_intercept
            + p.exposure_outcome_coef * a_val
            + p.confounder_outcome_coef * u
            + p.direct_gene_outcome_coef * dosage
            + aux
            + p.outcome_noise_sd * eps_y
        )

    y = outcome_at(a)
    y_cf = np.stack([outcome_at(0.0), outcome_at(1.0)])
    return a, y, b, a_cf, y_cf


def sample_trio(config: ScmConfig) -> TrioDataset:
    """Draw a dataset of parent-child pairs from ``config``.

    D_P ~ Binomial(2, p); the transmitted allele is uniform over the
    parent's two alleles; the mate allele is an independent Bernoulli(p)
    (random mating).  Deterministic given (config, seed).
    """
    n, p, seed = config.n, config.allele_freq, config.seed

    d_parent = _stream(seed, "d_parent").binomial(2, p, size=n).astype(np.int64)
    transmitted = (
        _stream(seed, "transmitted").random(n) < d_parent / 2.0
    ).astype(np.int64)
    mate = (_stream(seed, "mate").random(n) < p).astype(np.int64)
    d_child = transmitted + mate

    u_parent = _stream(seed, "u_parent").standard_normal(n)
    u_child = _stream(seed, "u_child").standard_normal(n)

    def noises(gen: str, params: GenerationParams):
        eps_a = _stream(seed, f"eps_exposure_{gen}").standard_normal(n)
        eps_y = _stream(seed, f"eps_outcome_{gen}").standard_normal(n)
        eps_b = (
            _stream(seed, f"eps_aux_{gen}").standard_normal(n)
            if params.aux_pathway_coef != 0.0
            else None
        )
        return eps_a, eps_y, eps_b

    a_parent, y_parent, b_parent, a_cf_parent, y_cf_parent = _structural(
        config.parent, d_parent, u_parent, *noises(PARENT, config.parent)
    )
    a_child, y_child, b_child, a_cf_child, y_cf_child = _structural(
        config.child, d_child, u_child, *noises(CHILD, config.child)
    )

    return TrioDataset(
        d_parent=d_parent,
        d_child=d_child,
        transmitted=transmitted,
        a_parent=a_parent,
        y_parent=y_parent,
        a_child=a_child,
        y_child=y_child,
        u_parent=u_parent,
        u_child=u_child,
        a_cf_parent=a_cf_parent,
        a_cf_child=a_cf_child,
        y_cf_parent=y_cf_parent,
        y_cf_child=y_cf_child,
        b_parent=b_parent,
        b_child=b_child,
    )


def _generation_columns(ds: TrioDataset, generation: str):
    if generation == PARENT:
        return ds.a_parent, ds.a_cf_parent, ds.y_cf_parent
    if generation == CHILD:
        return ds.a_child, ds.a_cf_child, ds.y_cf_child
    raise ValueError(f"generation must be {PARENT!r} or {CHILD!r}")


def oracle_effects(
    config: ScmConfig, generation: str = CHILD, big_n: int = 10**6
) -> dict[str, float]:
    """Ground-truth estimands for one generation, from counterfactual draws.

    Returns ``ate`` (mean effect of moving the exposure from 0 to 1),
    ``ett`` (same, among the factually exposed), ``late`` (same, among
    compliers: individuals whose exposure switches between the low and high
    instrument levels) and ``complier_share``.

    For a linear exposure with a constant exposure-outcome coefficient every
    estimand equals that coefficient, so the linear case is returned in
    closed form.  The threshold case samples ``big_n`` individuals; it
    raises :class:`MonotonicityError` when defiers are present, since a
    complier-average effect is then undefined.
    """
    params = config.child if generation == CHILD else config.parent
    if generation not in (PARENT, CHILD):
        raise ValueError(f"generation must be {PARENT!r} or {CHILD!r}")
    if params.exposure_model == LINEAR:
        b1 = params.exposure_outcome_coef
        return {"ate": b1, "ett": b1, "late": b1, "complier_share": 1.0}

    cfg = replace(config, n=big_n, seed=derive_seed(config.seed, f"oracle-{generation}"))
    ds = sample_trio(cfg)
    a, a_cf, y_cf = _generation_columns(ds, generation)
    gain = y_cf[1] - y_cf[0]
    # Instrument contrast for complier status: carrier at one effect allele
    # (dosage 1) versus non-carrier (dosage 0).
    a_low, a_high = a_cf[0], a_cf[1]
    if np.any(a_high < a_low):
        raise MonotonicityError(
            "defiers present: complier-average effect (LATE) is undefined"
        )
    compliers = (a_high == 1.0) & (a_low == 0.0)
    treated = a == 1.0
    if not treated.any() or not compliers.any():
        raise ValueError("degenerate threshold model: no treated or no compliers")
    return {
        "ate": float(gain.mean()),
        "ett": float(gain[treated].mean()),
        "late": float(gain[compliers].mean()),
        "complier_share": float(compliers.mean()),
    }


def oracle_associations(
    config: ScmConfig, big_n: int = 10**6, method=None
) -> dict[str, float]:
    """Population-level association contrasts from a latent-complete sample.

    Keys: ``gy_assoc`` (child outcome on child dosage), ``ga_assoc`` (child
    exposure on child dosage), ``gpyp_assoc`` and ``gpap_assoc`` (parent
    outcome/exposure on the parent's own dosage) and ``gyp_assoc`` (parent
    outcome on the child's dosage).  These are the ground truths behind the
    stability gaps.
    """
    from .estimators import ContrastMethod, assoc_diff

    if method is None:
        method = ContrastMethod.DOSAGE_SLOPE
    cfg = replace(config, n=big_n, seed=derive_seed(config.seed, "oracle-assoc"))
    ds = sample_trio(cfg)
    return {
        "gy_assoc": assoc_diff(ds.d_child, ds.y_child, method),
        "ga_assoc": assoc_diff(ds.d_child, ds.a_child, method),
        "gpyp_assoc": assoc_diff(ds.d_parent, ds.y_parent, method),
        "gpap_assoc": assoc_diff(ds.d_parent, ds.a_parent, method),
        "gyp_assoc": assoc_diff(ds.d_child, ds.y_parent, method),
    }

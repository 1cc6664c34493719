"""Config-driven batch runner: replicate experiments and assemble reports.

Replicate seeds derive from the master seed by a fixed, documented hash
(:func:`proxymr.simulate.derive_seed` with the replicate index as label), so
independent implementations can line up aggregate statistics.  Reports carry
no timestamps; given a config and master seed, every emitted byte is
reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping

import numpy as np

from . import __version__
from .estimators import (
    CORRECTIONS,
    DEFAULT_WEAK_TOL,
    ContrastMethod,
    EstimateReport,
    EstimatorError,
    EstimatorUnstable,
    REPORT_FIELDS,
    assoc_diff,
    oracle_wald_child,
    stability_gaps,
    wald,
)
from .simulate import (
    CHILD,
    PARENT,
    GenerationParams,
    ScmConfig,
    TrioDataset,
    derive_seed,
    oracle_effects,
    sample_trio,
)


class ConfigError(ValueError):
    """Malformed experiment config; the message names the offending field."""


class AllReplicatesFailed(RuntimeError):
    """Every replicate of an experiment raised an estimator error."""


_GENERATION_FIELDS = {f: None for f in GenerationParams.__dataclass_fields__}
_ESTIMATOR_FIELDS = {"contrast", "f", "weak_tol", "bootstrap_replicates"}
_OUTPUT_FIELDS = {"path", "format"}
_TOP_FIELDS = {"scm", "estimator", "replicates", "master_seed", "scenario", "output"}
_SCM_FIELDS = {"allele_freq", "n", "parent", "child"}


def _reject_unknown(block: Mapping, allowed, where: str) -> None:
    for key in block:
        if key not in allowed:
            raise ConfigError(f"unknown config field: {where}{key}")


def _generation_from(block: Mapping, where: str) -> GenerationParams:
    if not isinstance(block, Mapping):
        raise ConfigError(f"config field {where[:-1]} must be an object")
    _reject_unknown(block, _GENERATION_FIELDS, where)
    try:
        return GenerationParams(**block)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad generation params at {where[:-1]}: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Simulator config plus estimator settings, replication and output."""

    scm: ScmConfig
    contrast: ContrastMethod = ContrastMethod.DOSAGE_SLOPE
    f_name: str = "mendelian"
    weak_tol: float = DEFAULT_WEAK_TOL
    bootstrap_replicates: int = 500
    replicates: int = 1
    master_seed: int = 0
    scenario: str | None = None
    out_path: str | None = None
    out_format: str = "json"

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.out_format not in ("csv", "json"):
            raise ConfigError("output format must be 'csv' or 'json'")
        if self.f_name not in CORRECTIONS:
            raise ConfigError(f"unknown correction f: {self.f_name!r}")

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "ExperimentConfig":
        if not isinstance(raw, Mapping):
            raise ConfigError("config root must be a JSON object")
        _reject_unknown(raw, _TOP_FIELDS, "")
        if "scm" not in raw:
            raise ConfigError("missing config field: scm")
        scm_raw = raw["scm"]
        if not isinstance(scm_raw, Mapping):
            raise ConfigError("config field scm must be an object")
        _reject_unknown(scm_raw, _SCM_FIELDS, "scm.")
        for required in ("allele_freq", "n"):
            if required not in scm_raw:
                raise ConfigError(f"missing config field: scm.{required}")
        parent = _generation_from(scm_raw.get("parent", {}), "scm.parent.")
        child = _generation_from(scm_raw.get("child", {}), "scm.child.")
        try:
            scm = ScmConfig(
                allele_freq=float(scm_raw["allele_freq"]),
                parent=parent,
                child=child,
                n=int(scm_raw["n"]),
                seed=0,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad scm block: {exc}") from exc

        est = raw.get("estimator", {})
        if not isinstance(est, Mapping):
            raise ConfigError("config field estimator must be an object")
        _reject_unknown(est, _ESTIMATOR_FIELDS, "estimator.")
        try:
            contrast = ContrastMethod(est.get("contrast", "dosage"))
        except ValueError as exc:
            raise ConfigError(f"bad estimator.contrast: {exc}") from exc

        output = raw.get("output", {})
        if not isinstance(output, Mapping):
            raise ConfigError("config field output must be an object")
        _reject_unknown(output, _OUTPUT_FIELDS, "output.")

        return cls(
            scm=scm,
            contrast=contrast,
            f_name=str(est.get("f", "mendelian")),
            weak_tol=float(est.get("weak_tol", DEFAULT_WEAK_TOL)),
            bootstrap_replicates=int(est.get("bootstrap_replicates", 500)),
            replicates=int(raw.get("replicates", 1)),
            master_seed=int(raw.get("master_seed", 0)),
            scenario=raw.get("scenario"),
            out_path=output.get("path"),
            out_format=str(output.get("format", "json")),
        )

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def canonical_dict(self) -> dict:
        return {
            "scm": {
                "allele_freq": self.scm.allele_freq,
                "n": self.scm.n,
                "parent": asdict(self.scm.parent),
                "child": asdict(self.scm.child),
            },
            "estimator": {
                "contrast": self.contrast.value,
                "f": self.f_name,
                "weak_tol": self.weak_tol,
                "bootstrap_replicates": self.bootstrap_replicates,
            },
            "replicates": self.replicates,
            "master_seed": self.master_seed,
            "scenario": self.scenario,
        }

    def digest(self) -> str:
        payload = json.dumps(self.canonical_dict(), sort_keys=True).encode("ascii")
        return hashlib.sha256(payload).hexdigest()


def build_estimate_report(
    dataset: TrioDataset,
    config: ScmConfig,
    *,
    contrast: ContrastMethod = ContrastMethod.DOSAGE_SLOPE,
    f_name: str = "mendelian",
    weak_tol: float = DEFAULT_WEAK_TOL,
    bootstrap_replicates: int = 500,
    seed: int = 0,
    oracle_values: dict | None = None,
    gaps: tuple[float, float] | None = None,
    big_n: int | None = None,
    config_digest: str = "",
) -> EstimateReport:
    """Estimates on the observed view plus oracle context for one dataset.

    ``oracle_values`` and ``gaps`` can be passed in when they are shared
    across replicates (they are population quantities, identical for every
    replicate of one config); otherwise they are computed here with
    ``big_n`` oracle draws.  ``bootstrap_replicates=0`` skips standard
    errors.
    """
    obs = dataset.observed()
    f = CORRECTIONS[f_name]
    gy_p = assoc_diff(obs.d, obs.y_parent, contrast)
    ga = assoc_diff(obs.d, obs.a, contrast)
    pw = wald(f(gy_p), ga, weak_tol)
    wc = oracle_wald_child(dataset, contrast, weak_tol)

    se_gy = se_ga = se_pw = float("nan")
    if bootstrap_replicates > 0:
        rng = np.random.default_rng(derive_seed(seed, "bootstrap"))
        n = obs.n
        vals = np.empty((bootstrap_replicates, 3))
        failures = 0
        kept = 0
        for _ in range(bootstrap_replicates):
            idx = rng.integers(0, n, size=n)
            try:
                b_gy = assoc_diff(obs.d[idx], obs.y_parent[idx], contrast)
                b_ga = assoc_diff(obs.d[idx], obs.a[idx], contrast)
                b_pw = wald(f(b_gy), b_ga, weak_tol)
            except EstimatorError:
                failures += 1
                continue
            vals[kept] = (b_gy, b_ga, b_pw)
            kept += 1
        if failures > 0.1 * bootstrap_replicates:
            raise EstimatorUnstable(
                f"{failures} of {bootstrap_replicates} bootstrap replicates failed"
            )
        se_gy, se_ga, se_pw = np.std(vals[:kept], axis=0, ddof=1)

    big = int(big_n) if big_n is not None else dataset.n
    if oracle_values is None:
        oracle_values = {
            gen: oracle_effects(config, gen, big_n=big) for gen in (PARENT, CHILD)
        }
    if gaps is None:
        gaps = stability_gaps(config, big_n=big, method=contrast)

    return EstimateReport(
        n=dataset.n,
        seed=seed,
        contrast=contrast.value,
        f_used=f_name,
        weak_tol=weak_tol,
        gy_p_assoc=float(gy_p),
        ga_assoc=float(ga),
        proxy_wald=float(pw),
        wald_child=float(wc),
        se_gy_p_assoc=float(se_gy),
        se_ga_assoc=float(se_ga),
        se_proxy_wald=float(se_pw),
        oracle_parent_ate=oracle_values[PARENT]["ate"],
        oracle_parent_ett=oracle_values[PARENT]["ett"],
        oracle_parent_late=oracle_values[PARENT]["late"],
        complier_share_parent=oracle_values[PARENT]["complier_share"],
        oracle_child_ate=oracle_values[CHILD]["ate"],
        oracle_child_ett=oracle_values[CHILD]["ett"],
        oracle_child_late=oracle_values[CHILD]["late"],
        complier_share_child=oracle_values[CHILD]["complier_share"],
        gap_outcome=float(gaps[0]),
        gap_exposure=float(gaps[1]),
        config_digest=config_digest,
    )


@dataclass(frozen=True)
class RunReport:
    """Per-replicate rows plus aggregates, oracle values and verdicts."""

    rows: tuple[dict, ...]
    aggregates: dict
    oracle: dict
    verdicts: tuple[dict, ...]
    config_digest: str
    master_seed: int
    replicates: int
    version: str = __version__

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config_digest": self.config_digest,
            "master_seed": self.master_seed,
            "replicates": self.replicates,
            "oracle": self.oracle,
            "aggregates": self.aggregates,
            "verdicts": list(self.verdicts),
            "rows": list(self.rows),
        }

    def to_json_bytes(self) -> bytes:
        return (json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n").encode("ascii")

    def to_csv_text(self) -> str:
        buf = io.StringIO()
        columns = ["replicate"] + REPORT_FIELDS + ["error"]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in self.rows:
            writer.writerow([row.get(col, "") for col in columns])
        return buf.getvalue()

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        raw = json.loads(text)
        return cls(
            rows=tuple(raw["rows"]),
            aggregates=raw["aggregates"],
            oracle=raw["oracle"],
            verdicts=tuple(raw.get("verdicts", [])),
            config_digest=raw["config_digest"],
            master_seed=raw["master_seed"],
            replicates=raw["replicates"],
            version=raw.get("version", "unknown"),
        )


def _json_safe(row: dict) -> dict:
    # NaN is not valid JSON; absent standard errors become null.
    return {
        k: (None if isinstance(v, float) and np.isnan(v) else v)
        for k, v in row.items()
    }


def aggregate_rows(rows) -> dict:
    """Mean and sd of every numeric field over successful rows."""
    ok = [r for r in rows if "error" not in r]
    out: dict[str, dict[str, float]] = {}
    if not ok:
        return out
    for key in ok[0]:
        values = [r[key] for r in ok]
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            arr = np.asarray(values, dtype=np.float64)
            sd = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
            out[key] = {"mean": float(np.mean(arr)), "sd": sd}
    return out


def run_experiment(config: ExperimentConfig) -> RunReport:
    """Run ``replicates`` independent draws and aggregate the estimates.

    Replicate ``i`` samples with seed ``derive_seed(master_seed, i)``.
    Estimator failures are recorded per replicate and the run continues;
    :class:`AllReplicatesFailed` is raised only when nothing succeeds.
    """
    digest = config.digest()
    oracle_cfg = replace(config.scm, seed=derive_seed(config.master_seed, "oracle"))
    oracle_values = {
        gen: oracle_effects(oracle_cfg, gen, big_n=config.scm.n)
        for gen in (PARENT, CHILD)
    }
    gaps = stability_gaps(oracle_cfg, big_n=config.scm.n, method=config.contrast)

    rows: list[dict] = []
    failed = 0
    for i in range(config.replicates):
        seed_i = derive_seed(config.master_seed, i)
        cfg = replace(config.scm, seed=seed_i)
        try:
            ds = sample_trio(cfg)
            report = build_estimate_report(
                ds,
                cfg,
                contrast=config.contrast,
                f_name=config.f_name,
                weak_tol=config.weak_tol,
                bootstrap_replicates=config.bootstrap_replicates,
                seed=seed_i,
                oracle_values=oracle_values,
                gaps=gaps,
                config_digest=digest,
            )
            rows.append(_json_safe({"replicate": i, **report.to_dict()}))
        except EstimatorError as exc:
            failed += 1
            rows.append({"replicate": i, "seed": seed_i, "error": str(exc)})
    if failed == config.replicates:
        raise AllReplicatesFailed("every replicate failed to produce an estimate")

    verdicts: tuple[dict, ...] = ()
    if config.scenario is not None:
        from .scenarios import evaluate_scenario, get_scenario

        scenario = get_scenario(config.scenario)
        report = evaluate_scenario(
            scenario,
            n=config.scm.n,
            seed=config.master_seed,
            bootstrap_replicates=max(config.bootstrap_replicates, 2),
        )
        verdicts = tuple(v.to_dict() for v in report.verdicts)

    return RunReport(
        rows=tuple(rows),
        aggregates=aggregate_rows(rows),
        oracle={
            "parent": oracle_values[PARENT],
            "child": oracle_values[CHILD],
            "gap_outcome": float(gaps[0]),
            "gap_exposure": float(gaps[1]),
        },
        verdicts=verdicts,
        config_digest=digest,
        master_seed=config.master_seed,
        replicates=config.replicates,
    )

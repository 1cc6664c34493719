import hashlib
import json

import numpy as np
import pytest

from proxymr.estimators import ContrastMethod
from proxymr.harness import (
    AllReplicatesFailed,
    ConfigError,
    ExperimentConfig,
    RunReport,
    aggregate_rows,
    build_estimate_report,
    run_experiment,
)
from proxymr.scenarios import default_config
from proxymr.simulate import derive_seed, sample_trio


def minimal_raw(n=5000, **top):
    raw = {
        "scm": {
            "allele_freq": 0.3,
            "n": n,
            "parent": {"gene_exposure_coef": 0.5, "exposure_outcome_coef": 0.3,
                       "confounder_exposure_coef": 0.4, "confounder_outcome_coef": 0.4},
            "child": {"gene_exposure_coef": 0.5, "exposure_outcome_coef": 0.3,
                      "confounder_exposure_coef": 0.4, "confounder_outcome_coef": 0.4},
        },
        "estimator": {"contrast": "dosage", "f": "mendelian", "bootstrap_replicates": 0},
        "replicates": 3,
        "master_seed": 5,
    }
    raw.update(top)
    return raw


# ------------------------------------------------------------- config I/O

def test_from_dict_minimal_defaults():
    config = ExperimentConfig.from_dict({"scm": {"allele_freq": 0.3, "n": 100}})
    assert config.replicates == 1
    assert config.contrast is ContrastMethod.DOSAGE_SLOPE
    assert config.f_name == "mendelian"
    assert config.scm.parent.gene_exposure_coef == 0.0


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda r: r.update(bogus=1), "bogus"),
        (lambda r: r["scm"].update(bogus=1), "scm.bogus"),
        (lambda r: r["scm"]["parent"].update(bogus=1), "scm.parent.bogus"),
        (lambda r: r["estimator"].update(bogus=1), "estimator.bogus"),
    ],
)
def test_unknown_fields_rejected_by_name(mutate, field):
    raw = minimal_raw()
    mutate(raw)
    with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
        ExperimentConfig.from_dict(raw)


def test_missing_required_fields():
    with pytest.raises(ConfigError, match="scm"):
        ExperimentConfig.from_dict({})
    with pytest.raises(ConfigError, match="allele_freq"):
        ExperimentConfig.from_dict({"scm": {"n": 10}})


def test_bad_values_rejected():
    raw = minimal_raw()
    raw["scm"]["allele_freq"] = 2.0
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)
    raw = minimal_raw()
    raw["estimator"]["contrast"] = "odds-ratio"
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)
    raw = minimal_raw(replicates=0)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(raw)


def test_config_load_reports_parse_errors(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        ExperimentConfig.load(str(path))
    with pytest.raises(ConfigError, match="cannot read"):
        ExperimentConfig.load(str(tmp_path / "missing.json"))


def test_digest_stable_and_sensitive():
    a = ExperimentConfig.from_dict(minimal_raw())
    b = ExperimentConfig.from_dict(minimal_raw())
    assert a.digest() == b.digest()
    c = ExperimentConfig.from_dict(minimal_raw(master_seed=6))
    assert a.digest() != c.digest()


def test_derive_seed_documented_formula():
    expected = int.from_bytes(hashlib.sha256(b"5:0").digest()[:8], "little")
    assert derive_seed(5, 0) == expected


# ------------------------------------------------------------- experiment

def test_run_experiment_rows_and_aggregates():
    config = ExperimentConfig.from_dict(minimal_raw())
    report = run_experiment(config)
    assert len(report.rows) == 3
    assert [r["replicate"] for r in report.rows] == [0, 1, 2]
    values = [r["proxy_wald"] for r in report.rows]
    assert report.aggregates["proxy_wald"]["mean"] == pytest.approx(float(np.mean(values)))
    assert report.aggregates["proxy_wald"]["sd"] == pytest.approx(float(np.std(values, ddof=1)))
    assert report.oracle["parent"]["late"] == 0.3
    assert report.config_digest == config.digest()
    for row in report.rows:
        assert row["seed"] == derive_seed(5, row["replicate"])


def test_run_experiment_deterministic_bytes():
    config = ExperimentConfig.from_dict(minimal_raw())
    a = run_experiment(config).to_json_bytes()
    b = run_experiment(config).to_json_bytes()
    assert a == b


def test_run_experiment_survives_partial_failures():
    # n=40 with a weak-instrument floor of 0.5 fails some replicates only.
    raw = minimal_raw(n=40, master_seed=4)
    raw["replicates"] = 4
    raw["estimator"]["weak_tol"] = 0.5
    report = run_experiment(ExperimentConfig.from_dict(raw))
    errors = [r for r in report.rows if "error" in r]
    ok = [r for r in report.rows if "error" not in r]
    assert errors and ok
    assert len(report.rows) == 4
    assert all("below the floor" in r["error"] for r in errors)


def test_run_experiment_all_replicates_failed():
    raw = minimal_raw(n=100)
    raw["estimator"]["weak_tol"] = 100.0
    with pytest.raises(AllReplicatesFailed):
        run_experiment(ExperimentConfig.from_dict(raw))


def test_run_experiment_attaches_scenario_verdicts():
    raw = minimal_raw(n=20_000, scenario="vaccine_exclusion")
    report = run_experiment(ExperimentConfig.from_dict(raw))
    assert report.verdicts
    assert all(v["passed"] for v in report.verdicts)


def test_run_report_json_round_trip():
    config = ExperimentConfig.from_dict(minimal_raw())
    report = run_experiment(config)
    parsed = RunReport.from_json(report.to_json_bytes().decode("ascii"))
    assert parsed.rows == report.rows
    assert parsed.config_digest == report.config_digest


def test_run_report_csv_shape():
    config = ExperimentConfig.from_dict(minimal_raw())
    text = run_experiment(config).to_csv_text()
    lines = text.strip().splitlines()
    assert lines[0].startswith("replicate,n,seed,contrast,f_used")
    assert len(lines) == 4


def test_aggregate_rows_skips_errors_and_strings():
    rows = [
        {"replicate": 0, "proxy_wald": 0.5, "contrast": "dosage"},
        {"replicate": 1, "proxy_wald": 0.7, "contrast": "dosage"},
        {"replicate": 2, "error": "boom"},
    ]
    agg = aggregate_rows(rows)
    assert agg["proxy_wald"]["mean"] == pytest.approx(0.6)
    assert "contrast" not in agg
    assert aggregate_rows([{"error": "x"}]) == {}


# ------------------------------------------------------ report assembly

def test_build_estimate_report_fields():
    cfg = default_config(n=20_000, seed=3)
    ds = sample_trio(cfg)
    report = build_estimate_report(ds, cfg, bootstrap_replicates=50, seed=3)
    d = report.to_dict()
    assert d["n"] == 20_000
    assert d["contrast"] == "dosage"
    assert abs(d["proxy_wald"] - 0.3) < 0.1
    assert d["se_proxy_wald"] > 0
    assert d["oracle_child_late"] == 0.3
    assert json.dumps(d)  # flat and serializable


def test_build_estimate_report_skips_bootstrap_when_disabled():
    cfg = default_config(n=5_000, seed=3)
    ds = sample_trio(cfg)
    report = build_estimate_report(ds, cfg, bootstrap_replicates=0, seed=3)
    assert np.isnan(report.se_proxy_wald)

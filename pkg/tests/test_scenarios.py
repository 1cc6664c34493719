import json

import pytest

from proxymr.scenarios import (
    CATALOG,
    Expectation,
    catalog_json,
    concordance_config,
    default_config,
    evaluate_scenario,
    get_scenario,
    induced_dag,
    _check,
)
from proxymr.dag import canonical_dag


EXPECTED_NAMES = {
    "baseline_mendelian",
    "vaccine_exclusion",
    "famine_reversal",
    "drifted_gene_exposure",
    "outcome_stable",
}


def test_catalog_names():
    assert set(CATALOG) == EXPECTED_NAMES


@pytest.mark.parametrize("name", sorted(EXPECTED_NAMES))
def test_dag_and_config_are_mutually_consistent(name):
    scenario = CATALOG[name]()
    assert induced_dag(scenario.config) == scenario.dag


def test_canonical_parameterization_induces_the_builtin_graph():
    assert induced_dag(concordance_config("canonical")) == canonical_dag()


def test_concordance_config_rejects_unknown_graph():
    with pytest.raises(ValueError):
        concordance_config("nonexistent")


def test_vaccine_dag_adds_only_the_parent_channel():
    baseline = CATALOG["baseline_mendelian"]()
    vaccine = CATALOG["vaccine_exclusion"]()
    extra_edges = set(vaccine.dag.edges) - set(baseline.dag.edges)
    assert extra_edges == {("G_P", "B_P"), ("B_P", "Y_P")}
    assert "B" not in vaccine.dag.node_names


def test_get_scenario_unknown_name():
    with pytest.raises(KeyError, match="unknown scenario"):
        get_scenario("nope")


def test_catalog_exports_as_json():
    parsed = json.loads(catalog_json())
    assert [entry["name"] for entry in parsed] == sorted(EXPECTED_NAMES)
    for entry in parsed:
        assert entry["dag"].startswith("node ")
        assert all({"kind", "lhs"} <= set(e) for e in entry["expectations"])


def test_expectations_reference_resolvable_quantities():
    # Every expectation must evaluate without KeyError at a tiny n.
    for name in sorted(EXPECTED_NAMES):
        report = evaluate_scenario(get_scenario(name), n=500, seed=0, bootstrap_replicates=10)
        assert len(report.verdicts) == len(get_scenario(name).expectations)


def test_baseline_passes_at_full_size():
    report = evaluate_scenario(get_scenario("baseline_mendelian"), seed=1)
    assert report.passed, "\n".join(report.lines())
    assert report.n == 10**6


def test_vaccine_passes_at_small_size():
    # Graph-only claims: sample size is irrelevant.
    report = evaluate_scenario(get_scenario("vaccine_exclusion"), n=20_000, seed=1)
    assert report.passed, "\n".join(report.lines())


def test_report_lines_and_dict_round_trip():
    report = evaluate_scenario(get_scenario("vaccine_exclusion"), n=5_000, seed=2)
    text = "\n".join(report.lines())
    assert "scenario vaccine_exclusion" in text
    assert "PASS" in text
    payload = json.loads(json.dumps(report.to_dict()))
    assert payload["passed"] is True
    assert payload["scenario"] == "vaccine_exclusion"


def test_scenario_seed_changes_the_draw():
    a = evaluate_scenario(get_scenario("baseline_mendelian"), n=2_000, seed=0,
                          bootstrap_replicates=0)
    b = evaluate_scenario(get_scenario("baseline_mendelian"), n=2_000, seed=1,
                          bootstrap_replicates=0)
    assert a.quantities["est"]["proxy_wald"] != b.quantities["est"]["proxy_wald"]


# ------------------------------------------------- expectation comparators

QUANTITIES = {
    "est": {"x": 1.0, "y": -2.0},
    "iv": {"G:A:Y": {"valid": True, "witnesses": ["A -> B"]}},
    "se": {"est.x": 0.1},
}


@pytest.mark.parametrize(
    "expectation, expected",
    [
        (Expectation("bool_is", "iv.G:A:Y.valid", rhs=True), True),
        (Expectation("bool_is", "iv.G:A:Y.valid", rhs=False), False),
        (Expectation("approx", "est.x", rhs=1.05, tol=0.1), True),
        (Expectation("approx", "est.x", rhs=1.2, tol=0.1), False),
        (Expectation("differs", "est.x", rhs="est.y", tol=2.0), True),
        (Expectation("differs", "est.x", rhs=1.05, tol=0.2), False),
        (Expectation("ratio", "est.y", rhs="est.x", target=-2.0, tol=0.01), True),
        (Expectation("ratio", "est.y", rhs="est.x", target=2.0, tol=0.01), False),
        (Expectation("sign_equal", "est.x", rhs="est.y"), False),
        (Expectation("sign_opposite", "est.x", rhs="est.y"), True),
        (Expectation("exceeds_se", "est.x", rhs=3.0), True),
        (Expectation("exceeds_se", "est.x", rhs=30.0), False),
        (Expectation("contains_path", "iv.G:A:Y.witnesses", rhs="A -> B"), True),
        (Expectation("contains_path", "iv.G:A:Y.witnesses", rhs="B -> A"), False),
    ],
)
def test_expectation_kinds(expectation, expected):
    assert _check(expectation, QUANTITIES).passed is expected


def test_unknown_expectation_kind_rejected():
    with pytest.raises(ValueError, match="unknown expectation kind"):
        _check(Expectation("no_such", "est.x", rhs=1.0), QUANTITIES)


def test_unknown_quantity_rejected():
    with pytest.raises(KeyError, match="unknown quantity"):
        _check(Expectation("approx", "est.missing", rhs=0.0, tol=1.0), QUANTITIES)


def test_default_config_shape():
    cfg = default_config(n=123, seed=9)
    assert cfg.n == 123 and cfg.seed == 9
    assert cfg.parent == cfg.child
    assert cfg.allele_freq == 0.3

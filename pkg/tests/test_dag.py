import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from proxymr.dag import (
    Dag,
    GraphError,
    Node,
    Path,
    canonical_dag,
    check_instrument,
    d_separated,
    directed_paths,
    enumerate_paths,
    path_open,
)
from proxymr.scenarios import CATALOG


# ---------------------------------------------------------------- helpers

def chain_dag():
    return Dag([("X", False), ("M", False), ("Y", False)], [("X", "M"), ("M", "Y")])


def dsep_moral(dag: Dag, x: str, y: str, given) -> bool:
    """Independent d-separation oracle: ancestral subgraph, moralize,
    drop the conditioning set, test undirected reachability."""
    given = set(given)
    anc = {x, y} | given
    frontier = list(anc)
    while frontier:
        node = frontier.pop()
        for p in dag.parents(node):
            if p not in anc:
                anc.add(p)
                frontier.append(p)
    adj = {n: set() for n in anc}
    for node in anc:
        parents = sorted(dag.parents(node))
        for p in parents:
            adj[p].add(node)
            adj[node].add(p)
        for i, p1 in enumerate(parents):
            for p2 in parents[i + 1:]:
                adj[p1].add(p2)
                adj[p2].add(p1)
    seen = {x}
    stack = [x]
    while stack:
        cur = stack.pop()
        if cur == y:
            return False
        for nxt in adj[cur]:
            if nxt not in seen and nxt not in given:
                seen.add(nxt)
                stack.append(nxt)
    return True


@st.composite
def dsep_cases(draw):
    n = draw(st.integers(min_value=3, max_value=6))
    names = [f"N{i}" for i in range(n)]
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()):
                edges.append((names[i], names[j]))
    dag = Dag([(nm, False) for nm in names], edges)
    x, y, *rest = draw(st.permutations(names))
    given = {nm for nm in rest if draw(st.booleans())}
    return dag, x, y, given


# ----------------------------------------------------------- construction

def test_rejects_cycle():
    with pytest.raises(GraphError, match="cycle"):
        Dag([("A", False), ("B", False)], [("A", "B"), ("B", "A")])


def test_rejects_self_loop():
    with pytest.raises(GraphError, match="self-loop"):
        Dag([("A", False)], [("A", "A")])


def test_rejects_duplicate_edge():
    with pytest.raises(GraphError, match="duplicate edge"):
        Dag([("A", False), ("B", False)], [("A", "B"), ("A", "B")])


def test_rejects_duplicate_labels():
    with pytest.raises(GraphError, match="duplicate node labels"):
        Dag([("A", False), ("A", True)], [])


def test_rejects_undeclared_edge_endpoint():
    with pytest.raises(GraphError, match="undeclared"):
        Dag([("A", False)], [("A", "B")])


def test_canonical_structure():
    dag = canonical_dag()
    assert set(dag.node_names) == {"G", "G_P", "A", "A_P", "Y", "Y_P", "U", "U_P"}
    assert {n.name for n in dag.nodes if n.observed} == {"G", "A", "Y_P"}
    assert set(dag.edges) == {
        ("G_P", "G"), ("G_P", "A_P"), ("A_P", "Y_P"), ("U_P", "Y_P"),
        ("G", "A"), ("U", "A"), ("A", "Y"), ("U", "Y"),
    }


# ------------------------------------------------------- path enumeration

def test_single_direct_edge_path():
    paths = enumerate_paths(canonical_dag(), "G_P", "G")
    assert [str(p) for p in paths] == ["G_P -> G"]


def test_proxy_outcome_has_one_path():
    # Derived by exhaustive enumeration on the canonical graph.
    paths = enumerate_paths(canonical_dag(), "G", "Y_P")
    assert [str(p) for p in paths] == ["G <- G_P -> A_P -> Y_P"]


def test_chain_path_has_length_two():
    paths = enumerate_paths(chain_dag(), "X", "Y")
    assert len(paths) == 1
    assert paths[0].nodes == ("X", "M", "Y")
    assert len(paths[0].forward) == 2


def test_paths_sorted_lexicographically():
    dag = Dag([(n, False) for n in "SABT"], [("S", "A"), ("S", "B"), ("A", "T"), ("B", "T")])
    paths = enumerate_paths(dag, "S", "T")
    assert [p.nodes for p in paths] == [("S", "A", "T"), ("S", "B", "T")]


def test_collider_flags():
    dag = Dag([(n, False) for n in "GAU"], [("G", "A"), ("U", "A")])
    (path,) = enumerate_paths(dag, "G", "U")
    assert path.nodes == ("G", "A", "U")
    assert path.colliders == (True,)
    assert not path.directed
    assert path.is_collider("A")


def test_path_endpoints_must_differ():
    with pytest.raises(GraphError):
        enumerate_paths(canonical_dag(), "G", "G")


def test_unknown_node_rejected():
    with pytest.raises(GraphError, match="unknown node"):
        enumerate_paths(canonical_dag(), "G", "NOPE")


# ------------------------------------------------------------ d-separation

def test_relevance_pair_connected():
    assert d_separated(canonical_dag(), "G", "A") is False


def test_blocking_the_parent_exposure_separates_the_proxy():
    assert d_separated(canonical_dag(), "G", "Y_P", {"A_P"}) is True


def test_conditioning_on_exposure_opens_collider():
    # G -> A <- U -> Y becomes open once A is conditioned on.
    assert d_separated(canonical_dag(), "G", "Y", {"A"}) is False


def test_collider_descendant_opens_path():
    dag = Dag([(n, False) for n in "XCYD"], [("X", "C"), ("Y", "C"), ("C", "D")])
    assert d_separated(dag, "X", "Y") is True
    assert d_separated(dag, "X", "Y", {"D"}) is False


def test_conditioning_set_may_not_contain_endpoints():
    with pytest.raises(GraphError):
        d_separated(canonical_dag(), "G", "A", {"G"})


@settings(max_examples=200, deadline=None)
@given(dsep_cases())
def test_dsep_symmetric(case):
    dag, x, y, given = case
    assert d_separated(dag, x, y, given) == d_separated(dag, y, x, given)


@settings(max_examples=200, deadline=None)
@given(dsep_cases())
def test_dsep_agrees_with_moral_graph_oracle(case):
    dag, x, y, given = case
    assert d_separated(dag, x, y, given) == dsep_moral(dag, x, y, given)


# ------------------------------------------------------- instrument checks

def test_child_triple_is_valid_and_causal():
    r = check_instrument(canonical_dag(), "G", "A", "Y")
    assert (r.relevance, r.exclusion, r.unconfounded, r.causal) == (True, True, True, True)
    assert r.valid


def test_parent_triple_is_valid():
    r = check_instrument(canonical_dag(), "G_P", "A_P", "Y_P")
    assert r.valid and r.causal


def test_proxy_triple_is_valid_but_non_causal():
    r = check_instrument(canonical_dag(), "G", "A_P", "Y_P")
    assert (r.relevance, r.exclusion, r.unconfounded, r.causal) == (True, True, True, False)
    assert r.valid


@pytest.mark.parametrize(
    "triple",
    [("G", "A", "Y_P"), ("G", "A_P", "Y"), ("G_P", "A", "Y_P"), ("G_P", "A_P", "Y")],
)
def test_generation_mixing_triples_invalid(triple):
    assert not check_instrument(canonical_dag(), *triple).valid


def test_ancestral_instrument_is_also_valid():
    # An ancestor of a valid instrument inherits that status: the parental
    # genotype reaches the child outcome only through G -> A.  Never usable
    # in practice (G_P is latent), but graphically sound.
    r = check_instrument(canonical_dag(), "G_P", "A", "Y")
    assert r.valid and r.causal


def test_vaccine_exclusion_violation():
    dag = CATALOG["vaccine_exclusion"]().dag
    r = check_instrument(dag, "G_P", "A_P", "Y_P")
    assert not r.exclusion and not r.valid
    assert [str(p) for p in r.exclusion_witnesses] == ["G_P -> B_P -> Y_P"]


def test_vaccine_proxy_instrument_confounded():
    dag = CATALOG["vaccine_exclusion"]().dag
    r = check_instrument(dag, "G", "A_P", "Y_P")
    assert not r.unconfounded and not r.valid
    assert [str(p) for p in r.confounding_witnesses] == ["G <- G_P -> B_P -> Y_P"]
    assert check_instrument(dag, "G", "A", "Y").valid


def test_witnesses_are_open_paths():
    dag = CATALOG["vaccine_exclusion"]().dag
    for triple in [("G_P", "A_P", "Y_P"), ("G", "A_P", "Y_P")]:
        r = check_instrument(dag, *triple)
        for paths in r.witnesses.values():
            for p in paths:
                assert path_open(dag, p)


def test_parent_failure_propagates_to_child_instrument():
    # Any open parent-side violation, with inheritance prepended, stays an
    # open path for the child's genotype, so (G, A_P, Y_P) cannot be valid
    # when (G_P, A_P, Y_P) fails exclusion or unconfoundedness.
    for name, build in CATALOG.items():
        dag = build().dag
        parent = check_instrument(dag, "G_P", "A_P", "Y_P")
        child = check_instrument(dag, "G", "A_P", "Y_P")
        if not parent.exclusion or not parent.unconfounded:
            assert not child.valid, name


def test_check_instrument_requires_distinct_nodes():
    with pytest.raises(GraphError, match="distinct"):
        check_instrument(canonical_dag(), "G", "G", "Y")


def test_directed_paths_on_canonical():
    assert [str(p) for p in directed_paths(canonical_dag(), "G", "Y")] == ["G -> A -> Y"]
    assert directed_paths(canonical_dag(), "G", "Y_P") == []


# ------------------------------------------------------------- text format

def test_text_round_trip():
    dag = canonical_dag()
    assert Dag.from_text(dag.to_text()) == dag


def test_shipped_dag_files_match_builtins(tmp_path):
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1]
    canonical = Dag.from_text((root / "dags" / "canonical.dag").read_text())
    assert canonical == canonical_dag()
    vaccine = Dag.from_text((root / "dags" / "vaccine.dag").read_text())
    assert vaccine == CATALOG["vaccine_exclusion"]().dag


def test_text_parsing_flexibility():
    text = """
    # order-insensitive; trailing comments allowed
    edge A B   # declared before its nodes
    node A observed
    node B latent
    """
    dag = Dag.from_text(text)
    assert dag.has_edge("A", "B")
    assert dag.is_observed("A") and not dag.is_observed("B")


@pytest.mark.parametrize(
    "line",
    ["node A nowhere", "edge A", "vertex A observed", "node A observed extra"],
)
def test_text_parsing_rejects_bad_lines(line):
    with pytest.raises(GraphError):
        Dag.from_text(line)

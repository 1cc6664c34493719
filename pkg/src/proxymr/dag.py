"""Causal DAGs and the graphical side of instrument validity.

Relevance, exclusion and unconfoundedness are all statements about paths.
An instrument is relevant when it is d-connected to the exposure; it
satisfies exclusion when every directed route to the outcome runs through
the exposure; and it is unconfounded when every open non-directed route to
the outcome does too.  Scenario graphs here are small (well under 14 nodes),
so every check is answered by exhaustive path enumeration, which doubles as
a witness extractor: when a condition fails, the offending paths are kept.

All checks condition on the empty set unless a conditioning set is passed;
the instrument statements assessed here are marginal ones.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping


class GraphError(ValueError):
    """Raised for malformed graphs and queries that name unknown nodes."""


@dataclass(frozen=True)
class Node:
    """A named variable with an observability flag."""

    name: str
    observed: bool = False


@dataclass(frozen=True)
class Path:
    """A simple path, possibly against edge directions.

    ``forward[i]`` is True when the edge between ``nodes[i]`` and
    ``nodes[i + 1]`` points forward along the path.  Internal node ``j``
    (i.e. ``nodes[j + 1]``) is a collider exactly when both adjacent edges
    point into it.
    """

    nodes: tuple[str, ...]
    forward: tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) < 2 or len(self.forward) != len(self.nodes) - 1:
            raise GraphError("path needs >= 2 nodes and one direction per step")

    @property
    def colliders(self) -> tuple[bool, ...]:
        """Collider flag for each internal node, in path order."""
        return tuple(
            self.forward[i] and not self.forward[i + 1]
            for i in range(len(self.nodes) - 2)
        )

    @property
    def inner(self) -> tuple[str, ...]:
        return self.nodes[1:-1]

    @property
    def directed(self) -> bool:
        """True when every step follows an edge head to tail."""
        return all(self.forward)

    def is_collider(self, name: str) -> bool:
        """Whether ``name`` sits on this path as a collider."""
        for j, inner_name in enumerate(self.inner):
            if inner_name == name:
                return self.colliders[j]
        return False

    def __str__(self) -> str:
        parts = [self.nodes[0]]
        for i, fwd in enumerate(self.forward):
            parts.append("->" if fwd else "<-")
            parts.append(self.nodes[i + 1])
        return " ".join(parts)


class Dag:
    """Immutable directed acyclic graph over named nodes.

    Nodes carry an observed/latent flag.  Parent, child and descendant sets
    are precomputed on construction; instances are safe to share across
    threads.
    """

    def __init__(
        self,
        nodes: Iterable[Node | tuple[str, bool]],
        edges: Iterable[tuple[str, str]],
    ) -> None:
        node_list = [n if isinstance(n, Node) else Node(*n) for n in nodes]
        names = [n.name for n in node_list]
        if len(set(names)) != len(names):
            raise GraphError("duplicate node labels")
        edge_list = [(str(a), str(b)) for a, b in edges]
        known = set(names)
        seen: set[tuple[str, str]] = set()
        for a, b in edge_list:
            if a == b:
                raise GraphError(f"self-loop on {a!r}")
            if a not in known or b not in known:
                raise GraphError(f"edge {a} -> {b} references an undeclared node")
            if (a, b) in seen:
                raise GraphError(f"duplicate edge {a} -> {b}")
            seen.add((a, b))

        self._nodes = tuple(node_list)
        self._edges = tuple(edge_list)
        self._edge_set = frozenset(edge_list)
        self._observed = {n.name: n.observed for n in node_list}
        self._parents: dict[str, frozenset[str]] = {}
        self._children: dict[str, frozenset[str]] = {}
        parents: dict[str, set[str]] = {name: set() for name in names}
        children: dict[str, set[str]] = {name: set() for name in names}
        for a, b in edge_list:
            parents[b].add(a)
            children[a].add(b)
        self._parents = {k: frozenset(v) for k, v in parents.items()}
        self._children = {k: frozenset(v) for k, v in children.items()}
        self._check_acyclic()
        self._descendants = {name: self._walk_descendants(name) for name in names}

    def _check_acyclic(self) -> None:
        indeg = {n.name: len(self._parents[n.name]) for n in self._nodes}
        queue = deque(name for name, d in indeg.items() if d == 0)
        done = 0
        while queue:
            name = queue.popleft()
            done += 1
            for child in self._children[name]:
                indeg[child] -= 1
                if indeg[child] == 0:
                    queue.append(child)
        if done != len(self._nodes):
            raise GraphError("graph contains a cycle")

    def _walk_descendants(self, name: str) -> frozenset[str]:
        out: set[str] = set()
        stack = list(self._children[name])
        while stack:
            cur = stack.pop()
            if cur not in out:
                out.add(cur)
                stack.extend(self._children[cur])
        return frozenset(out)

    @property
    def nodes(self) -> tuple[Node, ...]:
        return self._nodes

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    @property
    def node_names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self._nodes)

    def has_node(self, name: str) -> bool:
        return name in self._observed

    def has_edge(self, a: str, b: str) -> bool:
        return (a, b) in self._edge_set

    def is_observed(self, name: str) -> bool:
        self._require(name)
        return self._observed[name]

    def parents(self, name: str) -> frozenset[str]:
        self._require(name)
        return self._parents[name]

    def children(self, name: str) -> frozenset[str]:
        self._require(name)
        return self._children[name]

    def descendants(self, name: str) -> frozenset[str]:
        """Strict descendants of ``name`` (not including ``name`` itself)."""
        self._require(name)
        return self._descendants[name]

    def neighbors(self, name: str) -> frozenset[str]:
        self._require(name)
        return self._parents[name] | self._children[name]

    def _require(self, *names: str) -> None:
        for name in names:
            if name not in self._observed:
                raise GraphError(f"unknown node {name!r}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dag):
            return NotImplemented
        return frozenset(self._nodes) == frozenset(other._nodes) and (
            self._edge_set == other._edge_set
        )

    def __hash__(self) -> int:
        return hash((frozenset(self._nodes), self._edge_set))

    def __repr__(self) -> str:
        return f"Dag({len(self._nodes)} nodes, {len(self._edges)} edges)"

    def to_text(self) -> str:
        """Serialize to the line-oriented DAG text format."""
        lines = [
            f"node {n.name} {'observed' if n.observed else 'latent'}"
            for n in self._nodes
        ]
        lines.extend(f"edge {a} {b}" for a, b in self._edges)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Dag":
        """Parse the DAG text format.

        One declaration per line: ``node <name> observed|latent`` or
        ``edge <from> <to>``.  ``#`` starts a comment; declarations may
        appear in any order.
        """
        nodes: list[Node] = []
        edges: list[tuple[str, str]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            if tokens[0] == "node" and len(tokens) == 3:
                if tokens[2] not in ("observed", "latent"):
                    raise GraphError(
                        f"line {lineno}: node flag must be observed|latent"
                    )
                nodes.append(Node(tokens[1], tokens[2] == "observed"))
            elif tokens[0] == "edge" and len(tokens) == 3:
                edges.append((tokens[1], tokens[2]))
            else:
                raise GraphError(f"line {lineno}: cannot parse {raw.strip()!r}")
        return cls(nodes, edges)


def canonical_dag() -> Dag:
    """The built-in two-generation graph with a parental proxy outcome.

    Child genotype G, child exposure A and the parental outcome Y_P are
    observed; the parent's genotype G_P and exposure A_P, the child outcome
    Y, the child's exposure-outcome confounder U, and the latent background
    cause U_P of the parental outcome are not.  G is a valid instrument for
    the A-Y pair, G_P for A_P-Y_P, and G a valid non-causal instrument for
    A_P-Y_P.
    """
    return Dag(
        nodes=[
            Node("G", observed=True),
            Node("A", observed=True),
            Node("Y_P", observed=True),
            Node("G_P"),
            Node("A_P"),
            Node("Y"),
            Node("U"),
            Node("U_P"),
        ],
        edges=[
            ("G_P", "G"),
            ("G_P", "A_P"),
            ("A_P", "Y_P"),
            ("U_P", "Y_P"),
            ("G", "A"),
            ("U", "A"),
            ("A", "Y"),
            ("U", "Y"),
        ],
    )


def enumerate_paths(dag: Dag, x: str, y: str) -> list[Path]:
    """All simple paths between ``x`` and ``y``, ignoring edge direction.

    Paths are returned in lexicographic order of their node sequences, so
    the output is deterministic for a given graph.
    """
    dag._require(x, y)
    if x == y:
        raise GraphError("path endpoints must differ")
    out: list[Path] = []

    def extend(seq: tuple[str, ...], fwd: tuple[bool, ...], visited: frozenset[str]) -> None:
        last = seq[-1]
        for nxt in sorted(dag.neighbors(last)):
            if nxt in visited:
                continue
            step = dag.has_edge(last, nxt)
            if nxt == y:
                out.append(Path(seq + (nxt,), fwd + (step,)))
            else:
                extend(seq + (nxt,), fwd + (step,), visited | {nxt})

    extend((x,), (), frozenset({x}))
    out.sort(key=lambda p: p.nodes)
    return out


def path_open(dag: Dag, path: Path, given: Iterable[str] = ()) -> bool:
    """Whether ``path`` is open under conditioning set ``given``.

    A non-collider blocks the path when conditioned on; a collider blocks
    it unless the collider or one of its descendants is conditioned on.
    """
    gs = frozenset(given)
    colliders = path.colliders
    for j, name in enumerate(path.inner):
        if colliders[j]:
            if name not in gs and not (dag.descendants(name) & gs):
                return False
        elif name in gs:
            return False
    return True


def d_separated(dag: Dag, x: str, y: str, given: Iterable[str] = ()) -> bool:
    """True when every path between ``x`` and ``y`` is blocked by ``given``."""
    gs = frozenset(given)
    dag._require(x, y, *gs)
    if x in gs or y in gs:
        raise GraphError("endpoints may not appear in the conditioning set")
    return not any(path_open(dag, p, gs) for p in enumerate_paths(dag, x, y))


def directed_paths(dag: Dag, x: str, y: str) -> list[Path]:
    """The subset of paths from ``x`` to ``y`` that follow edge directions."""
    return [p for p in enumerate_paths(dag, x, y) if p.directed]


@dataclass(frozen=True)
class IvReport:
    """Verdict of the three instrument conditions for one (G, A, Y) triple.

    ``causal`` is True when at least one directed instrument-to-outcome path
    exists; a valid instrument with ``causal=False`` acts purely through the
    association inherited from an upstream cause (here: transmission of the
    parental genotype).
    """

    instrument: str
    exposure: str
    outcome: str
    relevance: bool
    exclusion: bool
    unconfounded: bool
    causal: bool
    exclusion_witnesses: tuple[Path, ...] = ()
    confounding_witnesses: tuple[Path, ...] = ()

    @property
    def valid(self) -> bool:
        return self.relevance and self.exclusion and self.unconfounded

    @property
    def witnesses(self) -> Mapping[str, tuple[Path, ...]]:
        out: dict[str, tuple[Path, ...]] = {}
        if self.exclusion_witnesses:
            out["exclusion"] = self.exclusion_witnesses
        if self.confounding_witnesses:
            out["unconfounded"] = self.confounding_witnesses
        return out

    def lines(self) -> list[str]:
        """Human-readable summary, one condition per line."""
        def mark(ok: bool) -> str:
            return "PASS" if ok else "FAIL"

        out = [
            f"instrument={self.instrument} exposure={self.exposure} outcome={self.outcome}",
            f"  relevance:      {mark(self.relevance)}",
            f"  exclusion:      {mark(self.exclusion)}",
        ]
        for p in self.exclusion_witnesses:
            out.append(f"    witness: {p}")
        out.append(f"  unconfounded:   {mark(self.unconfounded)}")
        for p in self.confounding_witnesses:
            out.append(f"    witness: {p}")
        out.append(f"  causal path:    {'yes' if self.causal else 'no'}")
        out.append(f"  verdict:        {'VALID' if self.valid else 'INVALID'}")
        return out


def check_instrument(dag: Dag, instrument: str, exposure: str, outcome: str) -> IvReport:
    """Decide the three instrument conditions graphically.

    Relevance: instrument and exposure are d-connected marginally.
    Exclusion: every directed instrument-to-outcome path passes through the
    exposure.  Unconfoundedness: every marginally open non-directed path
    between instrument and outcome contains the exposure as a non-collider.
    """
    dag._require(instrument, exposure, outcome)
    if len({instrument, exposure, outcome}) != 3:
        raise GraphError("instrument, exposure and outcome must be distinct")

    relevance = not d_separated(dag, instrument, exposure)
    paths = enumerate_paths(dag, instrument, outcome)
    directed = [p for p in paths if p.directed]
    exclusion_witnesses = tuple(p for p in directed if exposure not in p.inner)
    confounding_witnesses = tuple(
        p
        for p in paths
        if not p.directed
        and path_open(dag, p)
        and (exposure not in p.inner or p.is_collider(exposure))
    )
    return IvReport(
        instrument=instrument,
        exposure=exposure,
        outcome=outcome,
        relevance=relevance,
        exclusion=not exclusion_witnesses,
        unconfounded=not confounding_witnesses,
        causal=bool(directed),
        exclusion_witnesses=exclusion_witnesses,
        confounding_witnesses=confounding_witnesses,
    )

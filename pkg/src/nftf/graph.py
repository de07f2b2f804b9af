"""Directed weighted account graph built from transfers, plus its metric suite.

Conventions, chosen once and used by every function here:

* degree metrics (average, maximum) count distinct directed edges,
  in plus out; average degree is 2*edges/nodes
* density uses the directed formula edges/(nodes*(nodes-1))
* components are weak (direction ignored)
* diameter and average path length are computed on the undirected
  simple projection of the largest weak component; APL averages over
  unordered node pairs of that component
* clustering, transitivity, and assortativity are computed on the
  undirected simple projection of the whole graph; nodes of projection
  degree < 2 contribute 0 to mean clustering; transitivity is
  3*triangles / connected triples (0 when there are no triples);
  assortativity is the Pearson correlation of endpoint degrees over
  undirected edges, both orientations counted, absent when degenerate

Everything is integer/Fraction arithmetic, so equal inputs give
bit-equal outputs on any platform.
"""

import hashlib
import random
from dataclasses import dataclass
from fractions import Fraction
from math import fsum, sqrt
from typing import Iterable, Sequence

from .model import AccountId, Kind, Ledger

Adjacency = dict


@dataclass
class TransferGraph:
    """Nodes are accounts; edge (a, b) weight counts transfers a -> b."""

    nodes: set
    edges: dict

    def undirected_adjacency(self) -> Adjacency:
        """Simple undirected projection; self-loops dropped."""
        adj: Adjacency = {node: set() for node in self.nodes}
        for a, b in self.edges:
            if a != b:
                adj[a].add(b)
                adj[b].add(a)
        return adj

    def undirected_edge_count(self) -> int:
        return sum(len(nbrs) for nbrs in self.undirected_adjacency().values()) // 2

    def total_degree(self, node) -> int:
        return sum(1 for a, _ in self.edges if a == node) + sum(
            1 for _, b in self.edges if b == node
        )


@dataclass
class GraphMetrics:
    nodes: int
    edges: int
    connected_components: int
    average_degree: Fraction | None
    max_degree: int | None
    diameter: int | None
    average_path_length: Fraction | None
    density: Fraction | None
    clustering_coefficient: Fraction | None
    degree_assortativity: Fraction | None
    transitivity: Fraction | None


@dataclass
class NullModelResult:
    replicates: int
    mean_clustering: float
    std_clustering: float
    seed: int


@dataclass
class SmallWorldReport:
    observed: GraphMetrics
    null: NullModelResult
    clustering_ratio: float
    ratio_threshold: float
    verdict: bool


def build_transfer_graph(ledger: Ledger) -> TransferGraph:
    nodes: set = set()
    edges: dict = {}
    for event in ledger.events_of_kind(Kind.TRANSFER):
        key = (event.actor, event.to)
        edges[key] = edges.get(key, 0) + 1
        nodes.add(event.actor)
        nodes.add(event.to)
    return TransferGraph(nodes=nodes, edges=edges)


def _components(adj: Adjacency) -> list[set]:
    seen: set = set()
    components = []
    for start in adj:
        if start in seen:
            continue
        comp = {start}
        frontier = [start]
        seen.add(start)
        while frontier:
            node = frontier.pop()
            for nbr in adj[node]:
                if nbr not in seen:
                    seen.add(nbr)
                    comp.add(nbr)
                    frontier.append(nbr)
        components.append(comp)
    return components


def _largest(components: list[set]) -> set:
    # ties broken by smallest member id
    best = max(len(c) for c in components)
    return min((c for c in components if len(c) == best), key=min)


def _bfs_distances(adj: Adjacency, source) -> dict:
    dist = {source: 0}
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for node in frontier:
            for nbr in adj[node]:
                if nbr not in dist:
                    dist[nbr] = d
                    nxt.append(nbr)
        frontier = nxt
    return dist


def mean_local_clustering(adj: Adjacency) -> Fraction:
    """Mean over all nodes of (edges among neighbors) / C(degree, 2)."""
    if not adj:
        raise ValueError("empty adjacency")
    total = Fraction(0)
    for node, nbrs in adj.items():
        d = len(nbrs)
        if d < 2:
            continue
        ordered = list(nbrs)
        links = sum(
            1
            for i in range(d)
            for j in range(i + 1, d)
            if ordered[j] in adj[ordered[i]]
        )
        total += Fraction(2 * links, d * (d - 1))
    return total / len(adj)


def _path_metrics(adj: Adjacency, component: set) -> tuple[int | None, Fraction | None]:
    if len(component) < 2:
        return None, None
    total = 0
    diameter = 0
    for source in component:
        dist = _bfs_distances(adj, source)
        total += sum(dist.values())
        diameter = max(diameter, max(dist.values()))
    s = len(component)
    return diameter, Fraction(total, s * (s - 1))


def _assortativity(adj: Adjacency) -> Fraction | None:
    s1 = sxy = ssq = 0
    m2 = 0  # orientations counted
    for u, nbrs in adj.items():
        du = len(nbrs)
        for v in nbrs:  # each undirected edge visited twice, once per direction
            dv = len(adj[v])
            s1 += du
            sxy += du * dv
            ssq += du * du
            m2 += 1
    if m2 == 0:
        return None
    num = m2 * sxy - s1 * s1
    den = m2 * ssq - s1 * s1
    if den == 0:
        return None
    return Fraction(num, den)


def graph_metrics(g: TransferGraph) -> GraphMetrics:
    n = len(g.nodes)
    m = len(g.edges)
    if n == 0:
        return GraphMetrics(0, 0, 0, None, None, None, None, None, None, None, None)

    adj = g.undirected_adjacency()
    components = _components(adj)

    out_deg: dict = {}
    in_deg: dict = {}
    for a, b in g.edges:
        out_deg[a] = out_deg.get(a, 0) + 1
        in_deg[b] = in_deg.get(b, 0) + 1
    max_degree = max(out_deg.get(v, 0) + in_deg.get(v, 0) for v in g.nodes)

    diameter, apl = _path_metrics(adj, _largest(components))

    triples = sum(
        len(nbrs) * (len(nbrs) - 1) // 2 for nbrs in adj.values()
    )
    closed = 0  # equals 3 * triangle count
    for node, nbrs in adj.items():
        ordered = list(nbrs)
        for i in range(len(ordered)):
            for j in range(i + 1, len(ordered)):
                if ordered[j] in adj[ordered[i]]:
                    closed += 1
    transitivity = Fraction(closed, triples) if triples else Fraction(0)

    return GraphMetrics(
        nodes=n,
        edges=m,
        connected_components=len(components),
        average_degree=Fraction(2 * m, n),
        max_degree=max_degree,
        diameter=diameter,
        average_path_length=apl,
        density=Fraction(m, n * (n - 1)) if n >= 2 else None,
        clustering_coefficient=mean_local_clustering(adj),
        degree_assortativity=_assortativity(adj),
        transitivity=transitivity,
    )


def largest_component(g: TransferGraph) -> TransferGraph:
    """Induced subgraph on the largest weak component (ties: smallest member)."""
    if not g.nodes:
        raise ValueError("empty graph has no components")
    keep = _largest(_components(g.undirected_adjacency()))
    edges = {(a, b): w for (a, b), w in g.edges.items() if a in keep and b in keep}
    return TransferGraph(nodes=set(keep), edges=edges)


def _sub_seed(seed: int, replicate: int) -> int:
    digest = hashlib.sha256(f"{seed}:{replicate}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def sample_gnm(n: int, m: int, rng: random.Random) -> Adjacency:
    """Uniform undirected graph with n nodes and exactly m distinct edges."""
    max_edges = n * (n - 1) // 2
    if not 0 <= m <= max_edges:
        raise ValueError(f"m={m} out of range for n={n}")
    adj: Adjacency = {i: set() for i in range(n)}
    if m <= max_edges // 2:
        added = 0
        while added < m:
            i = rng.randrange(n)
            j = rng.randrange(n)
            if i == j or j in adj[i]:
                continue
            adj[i].add(j)
            adj[j].add(i)
            added += 1
    else:
        for i in range(n):
            adj[i] = set(range(n)) - {i}
        removed = 0
        while removed < max_edges - m:
            i = rng.randrange(n)
            j = rng.randrange(n)
            if i == j or j not in adj[i]:
                continue
            adj[i].remove(j)
            adj[j].remove(i)
            removed += 1
    return adj


def er_null_model(n: int, m: int, replicates: int, seed: int) -> NullModelResult:
    """Mean/std clustering over seeded G(n, m) samples.

    Replicate r draws from random.Random seeded with the first 8 bytes
    of sha256("{seed}:{r}"), so runs are reproducible bit-for-bit on any
    platform regardless of schedule.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if replicates < 1:
        raise ValueError("replicates must be >= 1")
    max_edges = n * (n - 1) // 2
    if not 0 <= m <= max_edges:
        raise ValueError(f"m={m} exceeds maximum {max_edges} for n={n}")

    values = []
    for r in range(replicates):
        rng = random.Random(_sub_seed(seed, r))
        adj = sample_gnm(n, m, rng)
        values.append(float(mean_local_clustering(adj)))
    mean = fsum(values) / replicates
    variance = fsum((v - mean) ** 2 for v in values) / replicates
    return NullModelResult(
        replicates=replicates,
        mean_clustering=mean,
        std_clustering=sqrt(variance),
        seed=seed,
    )


def small_world_report(
    g: TransferGraph,
    replicates: int,
    seed: int,
    ratio_threshold: float = 5.0,
) -> SmallWorldReport:
    """Observed metrics vs an equal-size G(n, m) null.

    Verdict is true iff observed clustering is at least
    ``ratio_threshold`` times the null mean and the largest component
    has a finite average path length.
    """
    if not g.edges:
        raise ValueError("graph has no edges")
    observed = graph_metrics(g)
    null = er_null_model(len(g.nodes), g.undirected_edge_count(), replicates, seed)
    obs_cc = float(observed.clustering_coefficient)
    if null.mean_clustering > 0:
        ratio = obs_cc / null.mean_clustering
    else:
        ratio = float("inf") if obs_cc > 0 else 0.0
    verdict = ratio >= ratio_threshold and observed.average_path_length is not None
    return SmallWorldReport(
        observed=observed,
        null=null,
        clustering_ratio=ratio,
        ratio_threshold=float(ratio_threshold),
        verdict=verdict,
    )


def chronological_order(ledger: Ledger) -> list:
    """Accounts by time of their first transfer event, ties by id."""
    first_seen: dict = {}
    for event in ledger.events_of_kind(Kind.TRANSFER):
        for account in (event.actor, event.to):
            if account not in first_seen or event.ts < first_seen[account]:
                first_seen[account] = event.ts
    return sorted(first_seen, key=lambda a: (first_seen[a], a))


def apl_progression(
    g: TransferGraph, order: Sequence[AccountId]
) -> list[tuple[int, Fraction]]:
    """APL of the current largest weak component while adding nodes in order.

    Each step adds one node with its induced edges; a point (k, apl) is
    recorded once the largest component has at least one edge.
    """
    if sorted(order) != sorted(g.nodes):
        raise ValueError("order is not a permutation of the graph's nodes")
    full_adj = g.undirected_adjacency()
    active: set = set()
    points: list[tuple[int, Fraction]] = []
    for k, node in enumerate(order, start=1):
        active.add(node)
        induced = {v: full_adj[v] & active for v in active}
        comp = _largest(_components(induced))
        if len(comp) < 2:
            continue
        _, apl = _path_metrics(induced, comp)
        points.append((k, apl))
    return points


def edgelist_lines(g: TransferGraph) -> list[str]:
    """Weighted edge list, "from to weight", sorted for stable output."""
    return [f"{a} {b} {w}" for (a, b), w in sorted(g.edges.items())]


def parse_edgelist(lines: Iterable[str]) -> TransferGraph:
    nodes: set = set()
    edges: dict = {}
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"bad edge line: {line!r}")
        a, b, w = parts[0], parts[1], int(parts[2])
        if w < 1 or (a, b) in edges:
            raise ValueError(f"bad edge line: {line!r}")
        edges[(a, b)] = w
        nodes.add(a)
        nodes.add(b)
    return TransferGraph(nodes=nodes, edges=edges)

"""Multigraphs, quotients, bridges and the forest of 2-edge-connected components.

The exponent ``t(G)`` computed here controls the growth in N of sums of
products of matrix entries indexed by the vertices of G: an isolated
vertex of the forest counts 1, a leaf counts 1/2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

from .errors import DomainError, ShapeError
from .partitions import Gamma, SetPartition, gamma_partition, signed_range

HalfInteger = Fraction


@dataclass(frozen=True)
class Edge:
    id: Hashable
    a: Hashable
    b: Hashable

    @property
    def is_loop(self) -> bool:
        return self.a == self.b


@dataclass(frozen=True)
class MultiGraph:
    """Finite multigraph; orientation (a -> b) is uniform over the graph."""

    vertices: tuple
    edges: tuple[Edge, ...]
    oriented: bool = False
    _adj: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise DomainError("duplicate vertex labels")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise DomainError("duplicate edge ids")
        for e in self.edges:
            if e.a not in vset or e.b not in vset:
                raise DomainError(f"edge {e.id!r} has an endpoint outside the vertex set")

    @classmethod
    def build(cls, vertices: Iterable, edges: Iterable[tuple], oriented: bool = False) -> "MultiGraph":
        """From ``(id, a, b)`` triples."""
        return cls(tuple(vertices), tuple(Edge(i, a, b) for i, a, b in edges), oriented)

    def adjacency(self) -> dict:
        """vertex -> list of (edge id, other endpoint); a loop appears twice."""
        if self._adj is None:
            adj = {v: [] for v in self.vertices}
            for e in self.edges:
                adj[e.a].append((e.id, e.b))
                adj[e.b].append((e.id, e.a))
            object.__setattr__(self, "_adj", adj)
        return self._adj

    def degree(self, v) -> int:
        return len(self.adjacency()[v])

    def edge(self, eid) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(eid)

    def components(self) -> list[list]:
        adj = self.adjacency()
        seen, comps = set(), []
        for v in self.vertices:
            if v in seen:
                continue
            seen.add(v)
            stack, comp = [v], [v]
            while stack:
                x = stack.pop()
                for _, y in adj[x]:
                    if y not in seen:
                        seen.add(y)
                        comp.append(y)
                        stack.append(y)
            comps.append(comp)
        return comps

    def to_text(self) -> str:
        lines = ["vertices " + " ".join(_fmt(v) for v in self.vertices)]
        for e in self.edges:
            tail = " oriented" if self.oriented else ""
            lines.append(f"{_fmt(e.id)} {_fmt(e.a)} {_fmt(e.b)}{tail}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MultiGraph":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not rows or rows[0][0] != "vertices":
            raise ShapeError("first line must list the vertices")
        vertices = tuple(_parse(t) for t in rows[0][1:])
        edges, flags = [], set()
        for row in rows[1:]:
            if len(row) not in (3, 4) or (len(row) == 4 and row[3] != "oriented"):
                raise ShapeError(f"bad edge line: {' '.join(row)}")
            edges.append(Edge(_parse(row[0]), _parse(row[1]), _parse(row[2])))
            flags.add(len(row) == 4)
        if len(flags) > 1:
            raise ShapeError("orientation must be uniform over the graph")
        return cls(vertices, tuple(edges), flags == {True})


def _fmt(x) -> str:
    s = str(x)
    if any(ch.isspace() for ch in s):
        raise ShapeError(f"label {s!r} contains whitespace")
    return s


def _parse(tok: str):
    try:
        return int(tok)
    except ValueError:
        return tok


def quotient(g: MultiGraph, pi: SetPartition) -> MultiGraph:
    """Identify the vertices inside each block; vertices of the result are the blocks."""
    if pi.domain != tuple(sorted(g.vertices)):
        raise DomainError("partition does not cover the vertex set exactly")
    idx = pi.index()
    edges = tuple(Edge(e.id, pi.blocks[idx[e.a]], pi.blocks[idx[e.b]]) for e in g.edges)
    return MultiGraph(pi.blocks, edges, g.oriented)


def bridges(g: MultiGraph) -> set:
    """Edge ids whose removal disconnects their component (orientation ignored)."""
    adj = g.adjacency()
    disc, low = {}, {}
    out = set()
    counter = 0
    for root in g.vertices:
        if root in disc:
            continue
        disc[root] = low[root] = counter
        counter += 1
        # frames: (vertex, edge id used to enter it, iterator over incident edges)
        stack = [(root, None, iter(adj[root]))]
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for eid, w in it:
                if eid == via or w == v:
                    continue
                if w in disc:
                    low[v] = min(low[v], disc[w])
                else:
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, eid, iter(adj[w])))
                    advanced = True
                    break
            if advanced:
                continue
            stack.pop()
            if stack:
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[v])
                if low[v] > disc[parent]:
                    out.add(via)
    return out


def two_edge_cc(g: MultiGraph) -> SetPartition:
    cut = bridges(g)
    kept = tuple(e for e in g.edges if e.id not in cut)
    return SetPartition(MultiGraph(g.vertices, kept, False).components(), g.vertices)


def forest_2ecc(g: MultiGraph) -> MultiGraph:
    """The forest F(g): one vertex per 2-edge-connected component, one edge per bridge."""
    cut = bridges(g)
    comps = two_edge_cc(g)
    idx = comps.index()
    edges = tuple(
        Edge(e.id, comps.blocks[idx[e.a]], comps.blocks[idx[e.b]]) for e in g.edges if e.id in cut
    )
    forest = MultiGraph(comps.blocks, edges, False)
    n_trees = len(forest.components())
    assert len(edges) == len(comps) - n_trees, "forest of 2-edge-connected components has a cycle"
    return forest


def t_exponent(g: MultiGraph) -> Fraction:
    forest = forest_2ecc(g)
    total = Fraction(0)
    for v in forest.vertices:
        deg = forest.degree(v)
        if deg == 0:
            total += 1
        elif deg == 1:
            total += Fraction(1, 2)
    return total


def cycle_count(g: MultiGraph) -> int:
    """Number of cycles of a 2-regular graph (a loop counts degree 2)."""
    for v in g.vertices:
        if g.degree(v) != 2:
            raise ShapeError(f"vertex {v!r} has degree {g.degree(v)}, expected 2")
    return len(g.components())


@dataclass(frozen=True)
class WordGraphs:
    gamma: Gamma
    D: MultiGraph
    G: MultiGraph


def build_word_graphs(m_vec: Sequence[int]) -> WordGraphs:
    """Graphs on ±[m]: D has oriented edges k = (γ(k), -k); G adds the edges {k, -k}.

    Edge ``k`` of D carries the deterministic factor that follows letter k.
    In G the deterministic edges are ``("D", k)`` and the random ones ``("X", k)``.
    """
    gam = gamma_partition(m_vec)
    verts = signed_range(gam.m)
    d_edges = tuple(Edge(k, gam.succ(k), -k) for k in range(1, gam.m + 1))
    g_edges = tuple(Edge(("D", k), gam.succ(k), -k) for k in range(1, gam.m + 1))
    g_edges += tuple(Edge(("X", k), k, -k) for k in range(1, gam.m + 1))
    return WordGraphs(gam, MultiGraph(verts, d_edges, True), MultiGraph(verts, g_edges, False))


@dataclass(frozen=True)
class TEdge:
    i: int
    j: int
    vi: Hashable
    vj: Hashable


@dataclass(frozen=True)
class GraphOfGraphs:
    """Member graphs glued along attachment vertices named by the T-edges."""

    members: tuple[MultiGraph, ...]
    t_edges: tuple[TEdge, ...] = ()

    def __post_init__(self):
        seen = set()
        for g in self.members:
            if seen & set(g.vertices):
                raise DomainError("member graphs must have disjoint vertex labels")
            seen |= set(g.vertices)
        for te in self.t_edges:
            for k, v in ((te.i, te.vi), (te.j, te.vj)):
                if not 0 <= k < len(self.members) or v not in set(self.members[k].vertices):
                    raise DomainError(f"attachment vertex {v!r} is not in member {k}")


def merge_by_graph(gog: GraphOfGraphs) -> tuple[MultiGraph, SetPartition]:
    """Quotient of the disjoint union by the partition generated by the attachment pairs."""
    verts = tuple(v for g in gog.members for v in g.vertices)
    # edge ids are qualified by member index so they stay unique in the union
    edges = tuple(Edge((k, e.id), e.a, e.b) for k, g in enumerate(gog.members) for e in g.edges)
    parent = {v: v for v in verts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for te in gog.t_edges:
        parent[find(te.vi)] = find(te.vj)
    groups: dict = {}
    for v in verts:
        groups.setdefault(find(v), []).append(v)
    pi_t = SetPartition(groups.values())
    union = MultiGraph(verts, edges, False)
    return quotient(union, pi_t), pi_t

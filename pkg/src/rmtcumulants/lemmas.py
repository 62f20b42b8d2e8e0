"""Exhaustive and randomised checks of the graph-order inequalities.

Each suite returns a :class:`SuiteResult` listing every violating instance,
so a failure is data rather than an exception.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator

from .graphs import (
    Edge,
    GraphOfGraphs,
    MultiGraph,
    TEdge,
    build_word_graphs,
    cycle_count,
    merge_by_graph,
    quotient,
    t_exponent,
)
from .partitions import (
    SetPartition,
    enumerate_even_partitions,
    enumerate_pairings,
    find_crossing_pairing,
    is_refinement,
    join,
    lift_pairing,
    lift_pairing_eps,
)


@dataclass
class SuiteResult:
    name: str
    checked: int = 0
    violations: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations


def compositions(m: int, r: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways of writing m as a sum of r positive integers."""
    for cuts in itertools.combinations(range(1, m), r - 1):
        bounds = (0,) + cuts + (m,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(r))


def _timed(fn: Callable[[SuiteResult], None], name: str) -> SuiteResult:
    res = SuiteResult(name)
    start = time.perf_counter()
    fn(res)
    res.seconds = time.perf_counter() - start
    return res


def gue_cycle_suite(max_m: int = 10) -> SuiteResult:
    """Single trace: the lifted pairing quotient of D has at most m/2 + 1 cycles."""

    def run(res):
        for m in range(2, max_m + 1, 2):
            dgraph = build_word_graphs((m,)).D
            for tau in enumerate_pairings(m):
                res.checked += 1
                cycles = cycle_count(quotient(dgraph, lift_pairing(tau)))
                if cycles > m // 2 + 1:
                    res.violations.append(((m,), str(tau), cycles))

    return _timed(run, "gue-cycles r=1")


def _connected_pairings(m_vec):
    wg = build_word_graphs(m_vec)
    for tau in enumerate_pairings(sum(m_vec)):
        if len(join(tau, wg.gamma.partition)) == 1:
            yield wg, tau


def gue_order_suite(rs=(2, 3), max_m: int = 8) -> SuiteResult:
    """t(D^pi_tau) <= m/2 + 2 - r for pairings tau connecting all r traces."""

    def run(res):
        for r in rs:
            for m in range(2, max_m + 1, 2):
                for m_vec in compositions(m, r):
                    for wg, tau in _connected_pairings(m_vec):
                        res.checked += 1
                        t = t_exponent(quotient(wg.D, lift_pairing(tau)))
                        if t > Fraction(m, 2) + 2 - r:
                            res.violations.append((m_vec, str(tau), t))

    return _timed(run, f"gue-order r in {tuple(rs)}")


def gue_eps_suite(rs=(1, 2, 3), max_m: int = 6) -> SuiteResult:
    """Same bound for every pattern of transpose marks."""

    def run(res):
        for r in rs:
            for m in range(2, max_m + 1, 2):
                for m_vec in compositions(m, r):
                    for wg, tau in _connected_pairings(m_vec):
                        for eps in itertools.product((False, True), repeat=m):
                            res.checked += 1
                            t = t_exponent(quotient(wg.D, lift_pairing_eps(tau, eps)))
                            if t > Fraction(m, 2) + 2 - r:
                                res.violations.append((m_vec, str(tau), eps, t))

    return _timed(run, f"gue-eps r in {tuple(rs)}")


def _split_partitions(tau: SetPartition, all_splits: bool):
    """Partitions of ±[m] with blocks A_V, -A_V for each block V of tau."""
    if not all_splits:
        yield SetPartition([b for v in tau.blocks for b in (v, tuple(-x for x in v))])
        return
    flips = [itertools.product((1, -1), repeat=len(b) - 1) for b in tau.blocks]
    for choice in itertools.product(*flips):
        out = []
        for v, signs in zip(tau.blocks, choice):
            side = (v[0],) + tuple(s * x for s, x in zip(signs, v[1:]))
            out += [side, tuple(-x for x in side)]
        yield SetPartition(out)


def wigner_split_suite(rs=(2, 3, 4), max_m: int = 8, all_splits: bool = False) -> SuiteResult:
    """t(D^pi) <= m/2 + 1 - r/2 with pi splitting each block of an even tau in two."""

    def run(res):
        for r in rs:
            for m in range(2, max_m + 1, 2):
                if r > m:
                    continue
                taus = list(enumerate_even_partitions(m))
                for m_vec in compositions(m, r):
                    wg = build_word_graphs(m_vec)
                    for tau in taus:
                        if len(join(tau, wg.gamma.partition)) != 1:
                            continue
                        for pi in _split_partitions(tau, all_splits):
                            res.checked += 1
                            t = t_exponent(quotient(wg.D, pi))
                            if t > Fraction(m, 2) + 1 - Fraction(r, 2):
                                res.violations.append((m_vec, str(tau), str(pi), t))

    label = "all splits" if all_splits else "positives together"
    return _timed(run, f"wigner-split ({label})")


def crossing_pairing_suite(max_m: int = 8, max_r: int = 4) -> SuiteResult:
    """The crossing pairing refines tau and leaves at most r/2 (rounded up) components."""

    def run(res):
        for m in range(2, max_m + 1, 2):
            taus = list(enumerate_even_partitions(m))
            for r in range(2, max_r + 1):
                if r > m:
                    continue
                limit = (r + 1) // 2
                for m_vec in compositions(m, r):
                    gam = build_word_graphs(m_vec).gamma.partition
                    for tau in taus:
                        if len(join(tau, gam)) != 1:
                            continue
                        res.checked += 1
                        sigma = find_crossing_pairing(tau, gam)
                        k = len(join(sigma, gam))
                        if not sigma.is_pairing() or not is_refinement(sigma, tau) or k > limit:
                            res.violations.append((m_vec, str(tau), str(sigma), k))

    return _timed(run, "crossing-pairing")


# -- randomised graph suites ------------------------------------------------


def random_bridgeless_graph(rng: random.Random, labels: list, max_extra: int = 3) -> MultiGraph:
    """Disjoint union of cycles with chords: every component is 2-edge-connected."""
    verts = list(labels)
    rng.shuffle(verts)
    edges = []
    eid = itertools.count()
    groups = []
    while verts:
        size = rng.randint(1, len(verts))
        groups.append(verts[:size])
        verts = verts[size:]
    for grp in groups:
        for k, v in enumerate(grp):
            edges.append(Edge(next(eid), v, grp[(k + 1) % len(grp)]))
        for _ in range(rng.randint(0, max_extra)):
            edges.append(Edge(next(eid), rng.choice(grp), rng.choice(grp)))
    return MultiGraph(tuple(labels), tuple(edges))


def random_multigraph(rng: random.Random, n_vertices: int, n_edges: int) -> MultiGraph:
    edges = [Edge(k, rng.randrange(n_vertices), rng.randrange(n_vertices)) for k in range(n_edges)]
    return MultiGraph(tuple(range(n_vertices)), tuple(edges))


def random_gog(rng: random.Random, n: int, extra_edges: int = 0) -> GraphOfGraphs:
    """n bridgeless members glued along a random tree plus ``extra_edges`` further T-edges."""
    members, start = [], 0
    for _ in range(n):
        size = rng.randint(1, 4)
        members.append(random_bridgeless_graph(rng, list(range(start, start + size))))
        start += size
    t_edges = []
    for k in range(1, n):
        j = rng.randrange(k)
        t_edges.append(TEdge(j, k, rng.choice(members[j].vertices), rng.choice(members[k].vertices)))
    for _ in range(extra_edges):
        i, j = rng.sample(range(n), 2)
        t_edges.append(TEdge(i, j, rng.choice(members[i].vertices), rng.choice(members[j].vertices)))
    return GraphOfGraphs(tuple(members), tuple(t_edges))


def tree_merge_suite(trials: int = 200, seed: int = 0) -> SuiteResult:
    """Gluing along a tree: t(G^T) = sum t(G_i) - n + 1."""
    rng = random.Random(seed)

    def run(res):
        for _ in range(trials):
            n = rng.randint(1, 6)
            gog = random_gog(rng, n)
            merged, _ = merge_by_graph(gog)
            lhs = t_exponent(merged)
            rhs = sum(t_exponent(g) for g in gog.members) - n + 1
            res.checked += 1
            if lhs != rhs:
                res.violations.append((gog, lhs, rhs))

    return _timed(run, "tree-merge identity")


def connected_merge_suite(trials: int = 200, seed: int = 1) -> SuiteResult:
    """Gluing along a connected graph with cycles: t(G^T) <= sum t(G_i) - n + 1."""
    rng = random.Random(seed)

    def run(res):
        for _ in range(trials):
            n = rng.randint(2, 6)
            gog = random_gog(rng, n, extra_edges=rng.randint(1, 3))
            merged, _ = merge_by_graph(gog)
            lhs = t_exponent(merged)
            rhs = sum(t_exponent(g) for g in gog.members) - n + 1
            res.checked += 1
            if lhs > rhs:
                res.violations.append((gog, lhs, rhs))

    return _timed(run, "connected-merge bound")


def _random_partition(rng: random.Random, items: list) -> list[list]:
    blocks: list[list] = []
    for x in items:
        k = rng.randint(0, len(blocks))
        if k == len(blocks):
            blocks.append([x])
        else:
            blocks[k].append(x)
    return blocks


def monotonicity_suite(trials: int = 500, seed: int = 2) -> SuiteResult:
    """Coarsening the vertex partition never increases t."""
    rng = random.Random(seed)

    def run(res):
        for _ in range(trials):
            g = random_multigraph(rng, rng.randint(1, 12), rng.randint(0, 20))
            fine = _random_partition(rng, list(g.vertices))
            coarse = [sum(grp, []) for grp in _random_partition(rng, fine)]
            pi, sigma = SetPartition(fine), SetPartition(coarse)
            res.checked += 1
            if t_exponent(quotient(g, sigma)) > t_exponent(quotient(g, pi)):
                res.violations.append((g, str(pi), str(sigma)))

    return _timed(run, "monotonicity")


def all_suites(max_m: int | None = None, max_r: int | None = None) -> list[SuiteResult]:
    """Every suite at its default range, optionally capped by ``max_m`` and ``max_r``."""

    def cap_m(default):
        return default if max_m is None else min(default, max_m)

    def cap_r(rs):
        return tuple(r for r in rs if max_r is None or r <= max_r)

    return [
        gue_cycle_suite(cap_m(10)),
        gue_order_suite(cap_r((2, 3)), cap_m(8)),
        gue_eps_suite(cap_r((1, 2, 3)), cap_m(6)),
        wigner_split_suite(cap_r((2, 3, 4)), cap_m(8)),
        crossing_pairing_suite(cap_m(8), 4 if max_r is None else min(4, max_r)),
        tree_merge_suite(),
        connected_merge_suite(),
        monotonicity_suite(),
    ]

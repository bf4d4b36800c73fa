"""Cluster multisets, the hierarchy test and assembly of 1-clusters."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .core2s import TwoStructure, monochromatic_subgraphs
from .moddecomp import (
    Cotree,
    check_dicograph,
    inclusion_tree_of_modules,
    iter_bits,
    one_clusters,
    strong_modules,
)


class NotDicographError(ValueError):
    def __init__(self, label: str):
        super().__init__(f"monochromatic subgraph of label {label!r} is not a di-cograph")
        self.label = label


@dataclass
class ClusterMultiset:
    """Clusters over {0..n-1} as bit sets; duplicates allowed."""

    n: int
    clusters: list[int] = field(default_factory=list)
    tags: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.tags) < len(self.clusters):
            self.tags = list(self.tags) + [""] * (len(self.clusters) - len(self.tags))
        full = (1 << self.n) - 1
        for c in self.clusters:
            if not c or c & ~full:
                raise ValueError("clusters must be nonempty subsets of the ground set")

    def __len__(self) -> int:
        return len(self.clusters)

    def add(self, cluster: int, tag: str = "") -> None:
        self.clusters.append(cluster)
        self.tags.append(tag)

    def distinct(self) -> set[int]:
        return set(self.clusters)

    def with_singletons(self) -> set[int]:
        return self.distinct() | {1 << i for i in range(self.n)}

    def multiplicities(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for c in self.clusters:
            counts[c] = counts.get(c, 0) + 1
        return counts


@dataclass
class HierarchyCheck:
    ok: bool
    overlap: tuple[int, int] | None = None
    missing: int | None = None


def check_hierarchy(C: ClusterMultiset) -> HierarchyCheck:
    """Per-element list test on clusters sorted by size.

    Each element keeps the ids of the clusters containing it, smallest
    first.  Repeatedly the element whose list starts with the smallest
    cluster is chosen; every other element of that cluster must have the
    very same list, otherwise two clusters overlap.
    """
    n = C.n
    if not C.clusters:
        return HierarchyCheck(n <= 1, missing=None if n <= 1 else 0)
    # bucket sort by cardinality, stable in input order
    buckets: list[list[int]] = [[] for _ in range(n + 1)]
    for cid, c in enumerate(C.clusters):
        buckets[c.bit_count()].append(cid)
    order = [cid for b in buckets for cid in b]
    largest = C.clusters[order[-1]]
    full = (1 << n) - 1
    if largest != full:
        return HierarchyCheck(False, missing=next(iter_bits(full & ~largest)))
    lists: list[list[int]] = [[] for _ in range(n)]
    for cid in order:
        for x in iter_bits(C.clusters[cid]):
            lists[x].append(cid)
    heads = [0] * n
    size = [c.bit_count() for c in C.clusters]
    heap = [(size[lists[i][0]], i) for i in range(n)]
    heapq.heapify(heap)
    alive = [True] * n
    while alive[0] and heads[0] < len(lists[0]):
        s_size, s = heapq.heappop(heap)
        if not alive[s] or heads[s] >= len(lists[s]) or size[lists[s][heads[s]]] != s_size:
            continue
        tail_s = lists[s][heads[s]:]
        current = tail_s[0]
        for t in iter_bits(C.clusters[current]):
            if t == s or not alive[t]:
                continue
            tail_t = lists[t][heads[t]:]
            if tail_t != tail_s:
                other = next((c for c in tail_t if c not in tail_s), None)
                if other is None:
                    other = next(c for c in tail_s if c not in tail_t)
                return HierarchyCheck(False, overlap=(C.clusters[current], C.clusters[other]))
            alive[t] = False
        heads[s] += 1
        if heads[s] < len(lists[s]):
            heapq.heappush(heap, (size[lists[s][heads[s]]], s))
    return HierarchyCheck(True)


def is_hierarchy(C: ClusterMultiset) -> bool:
    return check_hierarchy(C).ok


def is_hierarchy_naive(C: ClusterMultiset) -> bool:
    """Pairwise overlap test; V must be present."""
    full = (1 << C.n) - 1
    if C.n > 1 and full not in C.clusters:
        return False
    cs = list(C.distinct())
    for i, a in enumerate(cs):
        for b in cs[i + 1 :]:
            inter = a & b
            if inter and inter != a and inter != b:
                return False
    return True


def one_clusters_by_label(g: TwoStructure) -> dict[str, list[int]]:
    result = {}
    for label, G in monochromatic_subgraphs(g).items():
        S = strong_modules(G)
        if not check_dicograph(G, S).ok:
            raise NotDicographError(label)
        result[label] = one_clusters(G, S)
    return result


def assemble_c1(g: TwoStructure) -> ClusterMultiset:
    """Multiset union of the 1-clusters of all monochromatic subgraphs."""
    C = ClusterMultiset(g.n)
    for label, clusters in one_clusters_by_label(g).items():
        for c in clusters:
            C.add(c, label)
    return C


def inclusion_tree_of_clusters(C: ClusterMultiset | set[int], n: int | None = None) -> Cotree:
    if isinstance(C, ClusterMultiset):
        n = C.n
        family = C.with_singletons()
    else:
        if n is None:
            raise ValueError("ground-set size required")
        family = set(C) | {1 << i for i in range(n)}
    return inclusion_tree_of_modules(sorted(family), n)

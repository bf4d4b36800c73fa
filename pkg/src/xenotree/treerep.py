"""Recognition of unp 2-structures and their labeled tree representation."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core2s import TwoStructure, monochromatic_subgraphs, reversible_refinement
from .hierarchy import ClusterMultiset, check_hierarchy, inclusion_tree_of_clusters
from .moddecomp import bits_to_list, check_dicograph, iter_bits, lowest, one_clusters, prime_witness, strong_modules

LABEL_BOUND = "label-bound-exceeded"
NON_DICOGRAPH = "non-dicograph"
CLUSTER_BOUND = "cluster-bound-exceeded"
OVERLAP = "overlap"
ROOT_MISSING = "root-missing"


class TreeError(ValueError):
    """Malformed event tree."""


class NotUnpError(ValueError):
    def __init__(self, certificate: Certificate):
        super().__init__(f"2-structure is not unp: {certificate.describe()}")
        self.certificate = certificate


# --------------------------------------------------------------------------
# event trees


@dataclass(frozen=True, eq=False)
class EventNode:
    """Leaf (``name`` set) or inner node with a label pair and ordered children."""

    label: tuple[str, str] | None = None
    children: tuple[EventNode, ...] = ()
    name: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.name is not None

    @property
    def symmetric(self) -> bool:
        return self.label is not None and self.label[0] == self.label[1]

    @classmethod
    def leaf(cls, name: str) -> EventNode:
        return cls(name=str(name))

    @classmethod
    def inner(cls, label: Sequence[str], children: Iterable[EventNode]) -> EventNode:
        i, j = label
        return cls(label=(str(i), str(j)), children=tuple(children))


def _postorder(root: EventNode) -> Iterator[EventNode]:
    stack: list[tuple[EventNode, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done or node.is_leaf:
            yield node
            continue
        stack.append((node, True))
        stack.extend((c, False) for c in reversed(node.children))


class EventTree:
    """Rooted tree whose leaves are vertex names and inner nodes label pairs."""

    __slots__ = ("root",)

    def __init__(self, root: EventNode):
        self.root = root
        names = []
        for node in _postorder(root):
            if node.is_leaf:
                if node.children or node.label is not None:
                    raise TreeError("a leaf carries neither label nor children")
                names.append(node.name)
            elif len(node.children) < 2:
                raise TreeError("every inner node needs at least two children")
            elif node.label is None or len(node.label) != 2:
                raise TreeError("inner nodes need a label pair")
        if len(set(names)) != len(names):
            raise TreeError("leaf names must be distinct")

    def nodes(self) -> Iterator[EventNode]:
        return _postorder(self.root)

    def leaf_names(self) -> list[str]:
        return [v.name for v in self.nodes() if v.is_leaf]

    def inner_nodes(self) -> list[EventNode]:
        return [v for v in self.nodes() if not v.is_leaf]

    def labels(self) -> set[str]:
        return {t for v in self.inner_nodes() for t in v.label}

    def tokens(self) -> tuple:
        """Flat preorder serialization; equal tokens mean equal ordered trees."""
        out: list = []
        stack: list = [self.root]
        while stack:
            node = stack.pop()
            if isinstance(node, str):
                out.append(node)
            elif node.is_leaf:
                out.append(("leaf", node.name))
            else:
                out.append(("open", node.label))
                stack.append(")")
                stack.extend(reversed(node.children))
        return tuple(out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventTree):
            return NotImplemented
        return self.tokens() == other.tokens()

    def __hash__(self) -> int:
        return hash(self.tokens())

    def __repr__(self) -> str:
        return f"EventTree({summarize(self)})"


def summarize(T: EventTree) -> str:
    """Compact nested text such as ``(a,b)[x,(c,c)[y,z]]``."""
    parts: dict[int, str] = {}
    for node in T.nodes():
        if node.is_leaf:
            parts[id(node)] = node.name
        else:
            inner = ",".join(parts.pop(id(c)) for c in node.children)
            parts[id(node)] = f"({node.label[0]},{node.label[1]})[{inner}]"
    return parts[id(T.root)]


def normalize(T: EventTree) -> EventTree:
    """Canonical equivalent tree.

    Order nodes are oriented so that the first label is the smaller one;
    a child carrying the same label as its parent is merged into it;
    children of symmetric nodes are sorted by their smallest leaf name.
    """
    built: dict[int, tuple[EventNode, str]] = {}
    for node in T.nodes():
        if node.is_leaf:
            built[id(node)] = (node, node.name)
            continue
        i, j = node.label
        kids = [built.pop(id(c)) for c in node.children]
        if i > j:
            i, j = j, i
            kids.reverse()
        merged: list[tuple[EventNode, str]] = []
        for child, key in kids:
            if not child.is_leaf and child.label == (i, j):
                keys = [_min_leaf(c) for c in child.children]
                merged.extend(zip(child.children, keys))
            else:
                merged.append((child, key))
        if i == j:
            merged.sort(key=lambda ck: ck[1])
        key = min(k for _, k in merged)
        built[id(node)] = (EventNode.inner((i, j), (c for c, _ in merged)), key)
    return EventTree(built[id(T.root)][0])


def _min_leaf(node: EventNode) -> str:
    return min(v.name for v in _postorder(node) if v.is_leaf)


def trees_isomorphic(T1: EventTree, T2: EventTree) -> bool:
    if sorted(T1.leaf_names()) != sorted(T2.leaf_names()):
        raise TreeError("trees have different leaf sets")
    return normalize(T1).tokens() == normalize(T2).tokens()


def evaluate_tree(
    T: EventTree,
    vertices: Sequence[str] | None = None,
    alphabet: Iterable[str] = (),
) -> TwoStructure:
    """2-structure read off the lowest common ancestors of leaf pairs.

    ``vertices`` fixes the vertex order (default: sorted leaf names).
    """
    names = T.leaf_names()
    verts = list(vertices) if vertices is not None else sorted(names)
    if sorted(verts) != sorted(names):
        raise TreeError("vertex list does not match the leaves")
    pos = {v: k for k, v in enumerate(verts)}
    alpha = tuple(sorted(set(alphabet) | T.labels()))
    code = {a: k for k, a in enumerate(alpha)}
    n = len(verts)
    codes = np.full((n, n), -1, dtype=np.int32)
    below: dict[int, list[int]] = {}
    for node in T.nodes():
        if node.is_leaf:
            below[id(node)] = [pos[node.name]]
            continue
        groups = [below.pop(id(c)) for c in node.children]
        fwd, bwd = code[node.label[0]], code[node.label[1]]
        for a, left in enumerate(groups):
            rest = [x for g in groups[a + 1 :] for x in g]
            if rest:
                codes[np.ix_(left, rest)] = fwd
                codes[np.ix_(rest, left)] = bwd
        below[id(node)] = [x for g in groups for x in g]
    return TwoStructure(tuple(verts), alpha, codes)


# --------------------------------------------------------------------------
# recognition


@dataclass(frozen=True)
class Certificate:
    """Why a 2-structure was rejected; vertex sets are position bit sets."""

    kind: str
    label: str | None = None
    witness: tuple[int, ...] = ()
    clusters: tuple[int, ...] = ()
    count: int | None = None
    bound: int | None = None

    def describe(self, names: Sequence[str] | None = None) -> str:
        def show(indices):
            items = [names[i] if names else str(i) for i in indices]
            return "{" + ",".join(items) + "}"

        if self.kind in (LABEL_BOUND, CLUSTER_BOUND):
            what = "labels in rev(g)" if self.kind == LABEL_BOUND else "1-clusters"
            return f"{self.kind}: {self.count} {what} > bound {self.bound}"
        if self.kind == NON_DICOGRAPH:
            return f"{self.kind}: label {self.label} induces a prime subgraph on {show(self.witness)}"
        if self.kind == OVERLAP:
            a, b = (show(bits_to_list(c)) for c in self.clusters)
            return f"{self.kind}: clusters {a} and {b} overlap"
        if self.kind == ROOT_MISSING:
            return f"{self.kind}: the vertex set is not a cluster; the largest cluster misses {show(self.witness)}"
        return self.kind

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        def conv(indices):
            return [names[i] if names else i for i in indices]

        data: dict = {"kind": self.kind}
        if self.label is not None:
            data["label"] = self.label
        if self.witness:
            data["witness"] = conv(self.witness)
        if self.clusters:
            data["clusters"] = [conv(bits_to_list(c)) for c in self.clusters]
        if self.count is not None:
            data["count"] = self.count
            data["bound"] = self.bound
        return data


@dataclass
class Recognition:
    accepted: bool
    rev: TwoStructure
    certificate: Certificate | None = None
    clusters: ClusterMultiset | None = None
    by_label: dict[str, list[int]] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.accepted


def _label_stage(item):
    label, G = item
    S = strong_modules(G)
    check = check_dicograph(G, S)
    if not check.ok:
        return label, None, prime_witness(G, S)
    return label, one_clusters(G, S), None


def recognize_unp(g: TwoStructure, early_exit: bool = True, workers: int = 1) -> Recognition:
    """Decide whether g is unp.

    With ``early_exit`` (the default) the two counting bounds reject as
    soon as they are exceeded.  Without it the full pipeline runs so that
    a rejection always comes with a structural certificate.
    """
    n = g.n
    rev = reversible_refinement(g)
    if n == 1:
        return Recognition(True, rev, clusters=ClusterMultiset(1))
    bound = 2 * (n - 1)
    labels = rev.used_labels()
    if early_exit and len(labels) > bound:
        return Recognition(False, rev, Certificate(LABEL_BOUND, count=len(labels), bound=bound))
    graphs = list(monochromatic_subgraphs(rev).items())
    if workers > 1 and len(graphs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            stages = list(pool.map(_label_stage, graphs))
    else:
        stages = [_label_stage(item) for item in graphs]
    C = ClusterMultiset(n)
    by_label = {}
    for label, clusters, witness in stages:
        if clusters is None:
            cert = Certificate(NON_DICOGRAPH, label=label, witness=tuple(witness))
            return Recognition(False, rev, cert, by_label=by_label)
        by_label[label] = clusters
        for c in clusters:
            C.add(c, label)
    if early_exit and len(C) > bound:
        cert = Certificate(CLUSTER_BOUND, count=len(C), bound=bound)
        return Recognition(False, rev, cert, C, by_label)
    check = check_hierarchy(C)
    if not check.ok:
        if check.overlap is not None:
            cert = Certificate(OVERLAP, clusters=check.overlap)
        else:
            cert = Certificate(ROOT_MISSING, witness=(check.missing,))
        return Recognition(False, rev, cert, C, by_label)
    return Recognition(True, rev, None, C, by_label)


def is_unp(g: TwoStructure) -> bool:
    return recognize_unp(g).accepted


def build_tree_representation(g: TwoStructure, recognition: Recognition | None = None) -> EventTree:
    """Tree representation of an unp 2-structure, normalized."""
    rec = recognition if recognition is not None else recognize_unp(g)
    if not rec.accepted:
        raise NotUnpError(rec.certificate)
    n = g.n
    if n == 1:
        return EventTree(EventNode.leaf(g.vertices[0]))
    skeleton = inclusion_tree_of_clusters(rec.clusters)
    name_rank = np.empty(n, dtype=np.int64)
    name_rank[sorted(range(n), key=g.vertices.__getitem__)] = np.arange(n)
    codes = g.codes
    built: dict[int, tuple[EventNode, int]] = {}
    # children before parents
    order = list(skeleton.nodes())
    for node in reversed(order):
        if node.is_leaf:
            x = lowest(node.members)
            built[id(node)] = (EventNode.leaf(g.vertices[x]), int(name_rank[x]))
            continue
        kids = [built.pop(id(c)) for c in node.children]
        reps = [lowest(c.members) for c in node.children]
        block = codes[np.ix_(reps, reps)]
        k = len(reps)
        off = ~np.eye(k, dtype=bool)
        i, j = int(block[0, 1]), int(block[1, 0])
        if i == j:
            if not np.all(block[off] == i):
                raise AssertionError("inconsistent complete node")
            seq = sorted(range(k), key=lambda a: kids[a][1])
            label = (g.alphabet[i], g.alphabet[i])
        else:
            lo, hi = min(i, j), max(i, j)
            before = block == lo
            seq = sorted(range(k), key=lambda a: -int(before[a].sum()))
            perm = block[np.ix_(seq, seq)]
            upper = np.triu(np.ones((k, k), dtype=bool), 1)
            if not (np.all(perm[upper] == lo) and np.all(perm[upper.T] == hi)):
                raise AssertionError("inconsistent linear node")
            label = (g.alphabet[lo], g.alphabet[hi])
        key = min(kids[a][1] for a in seq)
        built[id(node)] = (EventNode.inner(label, (kids[a][0] for a in seq)), key)
    return EventTree(built[id(skeleton.root)][0])


def clusters_as_names(clusters: Iterable[int], names: Sequence[str]) -> set[frozenset[str]]:
    return {frozenset(names[i] for i in iter_bits(c)) for c in clusters}

"""Modular decomposition of digraphs and di-cograph recognition.

Vertex sets are Python ints used as bit sets (bit ``i`` = vertex ``i``).
The decomposition works top-down: a vertex set ``X`` is split into its
maximal strong modules by checking, in turn, weak connectivity (parallel),
connectivity of the complement of the symmetric part (series), a chain of
complete cuts (order), and otherwise by partition refinement (prime).
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

from .core2s import Digraph

PARALLEL = "parallel"
SERIES = "series"
ORDER = "order"
PRIME = "prime"

NODE_SYMBOL = {PARALLEL: "0", SERIES: "1", ORDER: "->1", PRIME: "prime"}


class LaminarityError(ValueError):
    """Raised when a set family is not laminar or lacks V or a singleton."""


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def bits_to_list(mask: int) -> list[int]:
    return list(iter_bits(mask))


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def lowest(mask: int) -> int:
    return (mask & -mask).bit_length() - 1


@dataclass
class CotreeNode:
    members: int
    children: list[CotreeNode] = field(default_factory=list)
    kind: str | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @property
    def size(self) -> int:
        return self.members.bit_count()


@dataclass
class Cotree:
    """Rooted tree of vertex sets; inner nodes optionally typed."""

    n: int
    root: CotreeNode

    def nodes(self) -> Iterator[CotreeNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def inner_nodes(self) -> Iterator[CotreeNode]:
        return (v for v in self.nodes() if v.children)

    def modules(self) -> list[int]:
        return [v.members for v in self.nodes()]

    def describe(self, names: Sequence[str] | None = None) -> str:
        def label(node: CotreeNode) -> str:
            if node.is_leaf:
                i = lowest(node.members)
                return names[i] if names else str(i)
            inner = ",".join(label(c) for c in node.children)
            return f"{NODE_SYMBOL.get(node.kind, '?')}({inner})"

        return label(self.root)


# --------------------------------------------------------------------------
# splitting a strong module into its maximal strong submodules


def _components(X: int, neighbours) -> list[int]:
    comps = []
    rest = X
    while rest:
        start = rest & -rest
        comp = start
        frontier = start
        while frontier:
            low = frontier & -frontier
            frontier ^= low
            new = neighbours(low.bit_length() - 1) & X & ~comp
            comp |= new
            frontier |= new
        comps.append(comp)
        rest &= ~comp
    return comps


def _weak_components(G: Digraph, X: int) -> list[int]:
    out, inn = G.out, G.inn
    return _components(X, lambda x: out[x] | inn[x])


def _co_components(G: Digraph, X: int) -> list[int]:
    out, inn = G.out, G.inn
    return _components(X, lambda x: ~(out[x] & inn[x]) & ~(1 << x))


def _order_blocks(G: Digraph, X: int) -> list[int] | None:
    """Blocks between consecutive complete cuts of X, or None if there is no cut.

    A complete cut is a prefix P with every arc P -> X\\P present and no arc
    back.  Sorting by out-degree minus in-degree inside X places every
    block before all later blocks, so only prefixes of that order need testing.
    """
    out, inn = G.out, G.inn
    verts = bits_to_list(X)
    k = len(verts)
    score = {x: (out[x] & X).bit_count() - (inn[x] & X).bit_count() for x in verts}
    verts.sort(key=lambda x: (-score[x], x))
    blocks = []
    prefix = 0
    block = 0
    within = fwd = back = 0
    for p, x in enumerate(verts, start=1):
        within += (out[x] & prefix).bit_count() + (inn[x] & prefix).bit_count()
        prefix |= 1 << x
        block |= 1 << x
        fwd += (out[x] & X).bit_count()
        back += (inn[x] & X).bit_count()
        if p < k and fwd - within == p * (k - p) and back == within:
            blocks.append(block)
            block = 0
    if not blocks:
        return None
    blocks.append(block)
    return blocks


def _distinguishes(G: Digraph, z: int, part: int) -> bool:
    o = G.out[z] & part
    i = G.inn[z] & part
    return o not in (0, part) or i not in (0, part)


def _closure(G: Digraph, X: int, S: int) -> int:
    """Smallest module of G[X] containing S."""
    while True:
        grow = 0
        for z in iter_bits(X & ~S):
            if _distinguishes(G, z, S):
                grow |= 1 << z
        if not grow:
            return S
        S |= grow


def _maximal_modules_avoiding(G: Digraph, X: int, v: int) -> list[int]:
    """Partition of X - {v} into the maximal modules of G[X] not containing v."""
    out, inn = G.out, G.inn
    parts = [X & ~(1 << v)]
    changed = True
    while changed:
        changed = False
        refined = []
        for part in parts:
            pieces = [part]
            for z in iter_bits(X & ~part):
                o, i = out[z], inn[z]
                nxt = []
                for piece in pieces:
                    for sub in (piece & o & i, piece & o & ~i, piece & ~o & i, piece & ~o & ~i):
                        if sub:
                            nxt.append(sub)
                pieces = nxt
            if len(pieces) > 1:
                changed = True
            refined.extend(pieces)
        parts = refined
    return parts


def _prime_children(G: Digraph, X: int) -> list[int]:
    """Maximal strong modules of X when G[X] has a prime quotient."""
    v = lowest(X)
    parts = _maximal_modules_avoiding(G, X, v)
    # Each part is either a child or lies inside the child containing v.
    grown = own = 1 << v
    outside = []
    for part in sorted(parts, key=lowest):
        if not part & grown:
            cand = _closure(G, X, grown | (1 << lowest(part)))
            if cand == X:
                outside.append(part)
                continue
            grown = cand
        own |= part
    return [own] + outside


def _split(G: Digraph, X: int) -> tuple[str, list[int]]:
    comps = _weak_components(G, X)
    if len(comps) > 1:
        return PARALLEL, comps
    comps = _co_components(G, X)
    if len(comps) > 1:
        return SERIES, comps
    blocks = _order_blocks(G, X)
    if blocks is not None:
        return ORDER, blocks
    return PRIME, _prime_children(G, X)


def decompose(G: Digraph) -> Cotree:
    """Typed modular decomposition tree of G.

    Children of order nodes follow the linear order; all other children are
    sorted by their smallest vertex.
    """
    n = G.n
    if n == 0:
        raise ValueError("empty digraph")
    root = CotreeNode((1 << n) - 1)
    stack = [root]
    while stack:
        node = stack.pop()
        if node.size == 1:
            continue
        kind, parts = _split(G, node.members)
        if kind != ORDER:
            parts.sort(key=lowest)
        node.kind = kind
        node.children = [CotreeNode(p) for p in parts]
        stack.extend(node.children)
    return Cotree(n, root)


def strong_modules(G: Digraph) -> list[int]:
    """All strong modules of G as bit sets, largest first."""
    mods = decompose(G).modules()
    mods.sort(key=lambda m: (-m.bit_count(), m))
    return mods


# --------------------------------------------------------------------------
# inclusion trees and node typing


def inclusion_tree_of_modules(S: Sequence[int], n: int) -> Cotree:
    """Untyped tree of a laminar family (with V and all singletons)."""
    full = (1 << n) - 1
    family = sorted(set(S), key=lambda m: (-m.bit_count(), m))
    if not family or family[0] != full:
        raise LaminarityError("the family must contain the whole vertex set")
    root = CotreeNode(full)
    owner = [root] * n
    for m in family[1:]:
        if m & ~full or not m:
            raise LaminarityError("set outside the ground set")
        parent = owner[lowest(m)]
        if m & ~parent.members:
            raise LaminarityError("family is not laminar")
        node = CotreeNode(m)
        parent.children.append(node)
        for x in iter_bits(m):
            if owner[x] is not parent:
                raise LaminarityError("family is not laminar")
            owner[x] = node
    tree = Cotree(n, root)
    for node in tree.nodes():
        if node.children:
            node.children.sort(key=lambda c: lowest(c.members))
            covered = 0
            for c in node.children:
                covered |= c.members
            if covered != node.members or len(node.children) == 1:
                raise LaminarityError("family lacks a singleton")
        elif node.size != 1:
            raise LaminarityError("family lacks a singleton")
    return tree


def _block_profile(G: Digraph, node: CotreeNode) -> tuple[list[int], list[int]]:
    """Per child: arcs leaving it to, and entering it from, its siblings."""
    out, inn = G.out, G.inn
    outs, ins = [], []
    for child in node.children:
        rest = node.members & ~child.members
        o = i = 0
        for x in iter_bits(child.members):
            o += (out[x] & rest).bit_count()
            i += (inn[x] & rest).bit_count()
        outs.append(o)
        ins.append(i)
    return outs, ins


def _node_kind(G: Digraph, node: CotreeNode) -> tuple[str, list[int] | None, int]:
    """Type, linear child order (order nodes only) and cross-child arc count."""
    outs, ins = _block_profile(G, node)
    cross = sum(outs)
    sizes = [c.size for c in node.children]
    total = sum(sizes)
    if cross == 0:
        return PARALLEL, None, 0
    if cross == sum(s * (total - s) for s in sizes):
        return SERIES, None, cross
    # at an order node outs[a] / sizes[a] is the number of later vertices
    seq = sorted(range(len(sizes)), key=lambda a: (-outs[a] / sizes[a], a))
    before = 0
    for a in seq:
        after = total - before - sizes[a]
        if outs[a] != sizes[a] * after or ins[a] != sizes[a] * before:
            return PRIME, None, cross
        before += sizes[a]
    return ORDER, seq, cross


def classify_nodes(G: Digraph, skeleton: Cotree) -> Cotree:
    """Type every inner node; order nodes get their children in linear order."""

    def copy(node: CotreeNode) -> CotreeNode:
        return CotreeNode(node.members)

    root = copy(skeleton.root)
    stack = [(skeleton.root, root)]
    while stack:
        src, dst = stack.pop()
        if not src.children:
            continue
        kind, seq, _ = _node_kind(G, src)
        kids = src.children if seq is None else [src.children[a] for a in seq]
        dst.kind = kind
        dst.children = [copy(c) for c in kids]
        stack.extend(zip(kids, dst.children))
    return Cotree(skeleton.n, root)


@dataclass
class DicographCheck:
    ok: bool
    arc_count: int
    failing: int | None = None


def check_dicograph(G: Digraph, S: Sequence[int]) -> DicographCheck:
    """Arc-sampling test: one cross-child pair per node, then an arc count.

    At each inner node one pair from two distinct children is probed.  An
    arc there means the node must be series or order; its cross-child arcs
    are then added to a running total, which must finally equal |E|.
    """
    tree = inclusion_tree_of_modules(S, G.n)
    e = 0
    for node in tree.inner_nodes():
        x = lowest(node.children[0].members)
        y = lowest(node.children[1].members)
        if G.has_arc(x, y) or G.has_arc(y, x):
            kind, _, cross = _node_kind(G, node)
            if kind not in (SERIES, ORDER):
                return DicographCheck(False, e, node.members)
            e += cross
    if e != G.arc_count():
        return DicographCheck(False, e, None)
    return DicographCheck(True, e, None)


def is_dicograph(G: Digraph, S: Sequence[int] | None = None) -> bool:
    if S is None:
        S = strong_modules(G)
    return check_dicograph(G, S).ok


def one_clusters(G: Digraph, S: Sequence[int]) -> list[int]:
    """Vertex sets of series and order nodes of a di-cograph's cotree."""
    tree = inclusion_tree_of_modules(S, G.n)
    found = []
    for node in tree.inner_nodes():
        x = lowest(node.children[0].members)
        y = lowest(node.children[1].members)
        if G.has_arc(x, y) or G.has_arc(y, x):
            found.append(node.members)
    return found


def prime_nodes(G: Digraph, S: Sequence[int]) -> list[CotreeNode]:
    tree = classify_nodes(G, inclusion_tree_of_modules(S, G.n))
    return [v for v in tree.inner_nodes() if v.kind == PRIME]


def _induced_prime(G: Digraph, verts: Sequence[int]) -> bool:
    sub = mask_of(verts)
    kind, _ = _split(G, sub)
    return kind == PRIME


def prime_witness(G: Digraph, S: Sequence[int] | None = None) -> tuple[int, ...] | None:
    """3 or 4 vertices inducing a prime subgraph, or None for a di-cograph.

    The search runs on one representative per child of a prime node, since
    the quotient there is prime and hence contains such a small witness.
    """
    from itertools import combinations

    if S is None:
        S = strong_modules(G)
    for node in prime_nodes(G, S):
        reps = [lowest(c.members) for c in node.children]
        for size in (3, 4):
            for combo in combinations(reps, size):
                if _induced_prime(G, combo):
                    return combo
    return None

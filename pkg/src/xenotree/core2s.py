"""Labeled 2-structures, their reversible refinement and monochromatic subgraphs.

A 2-structure on ``n`` vertices assigns a label to every ordered pair of
distinct vertices.  Labels are stored as indices into a sorted alphabet so
that the index order coincides with the lexicographic token order.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

#: Joins forward and backward labels into one token of the refinement.
SEPARATOR = "⁀"

NO_LABEL = -1


class StructureError(ValueError):
    """Raised when a 2-structure or digraph is malformed."""


def _bits_from_row(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


@dataclass(frozen=True, eq=False)
class TwoStructure:
    """Complete loop-free digraph with one label per ordered vertex pair."""

    vertices: tuple[str, ...]
    alphabet: tuple[str, ...]
    codes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        verts = tuple(str(v) for v in self.vertices)
        alpha = tuple(str(a) for a in self.alphabet)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "alphabet", alpha)
        n = len(verts)
        if n == 0:
            raise StructureError("a 2-structure needs at least one vertex")
        if len(set(verts)) != n:
            raise StructureError("vertex names must be distinct")
        if list(alpha) != sorted(set(alpha)):
            raise StructureError("alphabet must be sorted and free of duplicates")
        codes = np.array(self.codes, dtype=np.int32, copy=True)
        if codes.shape != (n, n):
            raise StructureError(f"label matrix must be {n}x{n}, got {codes.shape}")
        np.fill_diagonal(codes, NO_LABEL)
        off = ~np.eye(n, dtype=bool)
        if n > 1 and (codes[off].min() < 0 or codes[off].max() >= len(alpha)):
            raise StructureError("every ordered pair needs a label from the alphabet")
        codes.setflags(write=False)
        object.__setattr__(self, "codes", codes)

    # construction -----------------------------------------------------------

    @classmethod
    def from_tokens(
        cls,
        vertices: Sequence[str],
        tokens: Sequence[Sequence[str | None]],
        alphabet: Iterable[str] = (),
    ) -> TwoStructure:
        """Build from a square matrix of label tokens (diagonal ignored)."""
        n = len(vertices)
        used = {t for i, row in enumerate(tokens) for j, t in enumerate(row) if i != j}
        if None in used:
            raise StructureError("missing label for an ordered pair")
        alpha = tuple(sorted(used | set(alphabet)))
        index = {a: k for k, a in enumerate(alpha)}
        codes = np.full((n, n), NO_LABEL, dtype=np.int32)
        for i, row in enumerate(tokens):
            if len(row) != n:
                raise StructureError("label matrix must be square")
            for j, t in enumerate(row):
                if i != j:
                    codes[i, j] = index[t]
        return cls(tuple(vertices), alpha, codes)

    @classmethod
    def from_function(
        cls,
        vertices: Sequence[str],
        phi: Callable[[str, str], str],
        alphabet: Iterable[str] = (),
    ) -> TwoStructure:
        verts = list(vertices)
        tokens = [[None if x == y else phi(x, y) for y in verts] for x in verts]
        return cls.from_tokens(verts, tokens, alphabet)

    @classmethod
    def from_pairs(
        cls,
        vertices: Sequence[str],
        pairs: Mapping[tuple[str, str], str],
        default: str | None = None,
        alphabet: Iterable[str] = (),
    ) -> TwoStructure:
        """Build from an explicit pair map; unlisted pairs take ``default``."""
        verts = list(vertices)
        pos = {v: i for i, v in enumerate(verts)}
        n = len(verts)
        tokens: list[list[str | None]] = [[default] * n for _ in range(n)]
        for (x, y), lab in pairs.items():
            if x not in pos or y not in pos:
                raise StructureError(f"unknown vertex in pair ({x}, {y})")
            if x == y:
                raise StructureError(f"self-pair ({x}, {x}) is not allowed")
            tokens[pos[x]][pos[y]] = lab
        return cls.from_tokens(verts, tokens, alphabet)

    # access -----------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.vertices)

    def index(self, name: str) -> int:
        try:
            return self.vertices.index(name)
        except ValueError:
            raise StructureError(f"unknown vertex {name!r}") from None

    def phi(self, x: str, y: str) -> str:
        """Label of the ordered pair (x, y), by vertex name."""
        i, j = self.index(x), self.index(y)
        if i == j:
            raise StructureError("phi is undefined on self-pairs")
        return self.alphabet[self.codes[i, j]]

    def label_at(self, i: int, j: int) -> str:
        return self.alphabet[self.codes[i, j]]

    def used_codes(self) -> list[int]:
        off = self.codes[~np.eye(self.n, dtype=bool)]
        return sorted(int(c) for c in np.unique(off))

    def used_labels(self) -> list[str]:
        return [self.alphabet[c] for c in self.used_codes()]

    def pair_set(self, i: int, j: int) -> frozenset[str]:
        """Unordered label set {phi(xy), phi(yx)} of two vertex positions."""
        return frozenset((self.label_at(i, j), self.label_at(j, i)))

    def triple_sets(self, i: int, j: int, k: int) -> frozenset[frozenset[str]]:
        return frozenset((self.pair_set(i, j), self.pair_set(j, k), self.pair_set(i, k)))

    def token_matrix(self) -> list[list[str | None]]:
        return [
            [None if i == j else self.label_at(i, j) for j in range(self.n)]
            for i in range(self.n)
        ]

    def substructure(self, indices: Sequence[int]) -> TwoStructure:
        idx = list(indices)
        sub = self.codes[np.ix_(idx, idx)]
        return TwoStructure(tuple(self.vertices[i] for i in idx), self.alphabet, sub)

    def relabeled(self, mapping: Mapping[str, str]) -> TwoStructure:
        """Rename labels through ``mapping`` (labels not listed are kept)."""
        return TwoStructure.from_tokens(
            self.vertices,
            [[None if t is None else mapping.get(t, t) for t in row] for row in self.token_matrix()],
        )

    def with_alphabet(self, alphabet: Iterable[str]) -> TwoStructure:
        """Same labeling over an alphabet extended by ``alphabet``."""
        return TwoStructure.from_tokens(self.vertices, self.token_matrix(), set(alphabet) | set(self.alphabet))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TwoStructure):
            return NotImplemented
        return (
            self.vertices == other.vertices
            and self.alphabet == other.alphabet
            and np.array_equal(self.codes, other.codes)
        )

    def __hash__(self) -> int:
        return hash((self.vertices, self.alphabet, self.codes.tobytes()))

    def __repr__(self) -> str:
        return f"TwoStructure(n={self.n}, labels={self.used_labels()})"


class Digraph:
    """Loop-free digraph with out- and in-neighbourhoods kept as bit sets."""

    __slots__ = ("vertices", "out", "inn", "_arc_count")

    def __init__(self, vertices: Sequence[str], out: Sequence[int], inn: Sequence[int] | None = None):
        self.vertices = tuple(vertices)
        n = len(self.vertices)
        self.out = tuple(out)
        if len(self.out) != n:
            raise StructureError("one out-neighbourhood per vertex is required")
        if any((m >> i) & 1 for i, m in enumerate(self.out)):
            raise StructureError("loops are not allowed")
        if any(m >> n for m in self.out):
            raise StructureError("arc endpoint out of range")
        if inn is None:
            rows = [0] * n
            for x, m in enumerate(self.out):
                bit = 1 << x
                while m:
                    low = m & -m
                    rows[low.bit_length() - 1] |= bit
                    m ^= low
            inn = rows
        self.inn = tuple(inn)
        self._arc_count = sum(m.bit_count() for m in self.out)

    @classmethod
    def from_matrix(cls, vertices: Sequence[str], adjacency: np.ndarray) -> Digraph:
        adj = np.asarray(adjacency, dtype=bool).copy()
        np.fill_diagonal(adj, False)
        out = [_bits_from_row(r) for r in adj]
        inn = [_bits_from_row(r) for r in adj.T]
        return cls(vertices, out, inn)

    @classmethod
    def from_arcs(cls, vertices: Sequence[str], arcs: Iterable[tuple[str, str]]) -> Digraph:
        verts = list(vertices)
        pos = {v: i for i, v in enumerate(verts)}
        out = [0] * len(verts)
        for x, y in arcs:
            if x == y:
                raise StructureError(f"loop at {x!r}")
            out[pos[x]] |= 1 << pos[y]
        return cls(verts, out)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def arc_count(self) -> int:
        return self._arc_count

    def has_arc(self, i: int, j: int) -> bool:
        return bool((self.out[i] >> j) & 1)

    def arcs(self) -> set[tuple[str, str]]:
        return {
            (self.vertices[i], self.vertices[j])
            for i in range(self.n)
            for j in range(self.n)
            if self.has_arc(i, j)
        }

    def matrix(self) -> np.ndarray:
        return np.array([[self.has_arc(i, j) for j in range(self.n)] for i in range(self.n)], dtype=bool)

    def induced(self, indices: Sequence[int]) -> Digraph:
        idx = list(indices)
        return Digraph.from_matrix([self.vertices[i] for i in idx], self.matrix()[np.ix_(idx, idx)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Digraph):
            return NotImplemented
        return self.vertices == other.vertices and self.out == other.out

    def __hash__(self) -> int:
        return hash((self.vertices, self.out))

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, arcs={self._arc_count})"


def composite_token(forward: str, backward: str) -> str:
    return f"{forward}{SEPARATOR}{backward}"


def reversible_refinement(g: TwoStructure) -> TwoStructure:
    """Relabel each pair (x, y) by its forward and backward labels together."""
    n = g.n
    if n == 1:
        return TwoStructure(g.vertices, (), g.codes)
    width = len(g.alphabet)
    combined = g.codes.astype(np.int64) * width + g.codes.T
    off = ~np.eye(n, dtype=bool)
    used = np.unique(combined[off])
    tokens = [composite_token(g.alphabet[c // width], g.alphabet[c % width]) for c in used]
    order = sorted(range(len(tokens)), key=tokens.__getitem__)
    rank = np.empty(len(tokens), dtype=np.int32)
    rank[order] = np.arange(len(tokens), dtype=np.int32)
    codes = np.full((n, n), NO_LABEL, dtype=np.int32)
    codes[off] = rank[np.searchsorted(used, combined[off])]
    return TwoStructure(g.vertices, tuple(tokens[k] for k in order), codes)


def is_reversible(g: TwoStructure) -> bool:
    if g.n < 2:
        return True
    off = ~np.eye(g.n, dtype=bool)
    fwd, bwd = g.codes[off], g.codes.T[off]
    partner: dict[int, int] = {}
    for a, b in zip(fwd.tolist(), bwd.tolist()):
        if partner.setdefault(a, b) != b:
            return False
    return True


def monochromatic_subgraphs(g: TwoStructure) -> dict[str, Digraph]:
    """Map each used label to the digraph of pairs carrying that label."""
    return {g.alphabet[c]: Digraph.from_matrix(g.vertices, g.codes == c) for c in g.used_codes()}


def isomorphic_2s(g: TwoStructure, h: TwoStructure) -> bool:
    """True iff h arises from g by a bijective renaming of labels."""
    if g.vertices != h.vertices:
        raise StructureError("isomorphism test requires identical vertex lists")
    if g.n < 2:
        return True
    off = ~np.eye(g.n, dtype=bool)
    pairs = set(zip(g.codes[off].tolist(), h.codes[off].tolist()))
    return len({a for a, _ in pairs}) == len(pairs) == len({b for _, b in pairs})


def digraph_as_2s(G: Digraph, arc: str = "1", non_arc: str = "0") -> TwoStructure:
    """View a digraph as the 2-structure with labels arc/non-arc."""
    adj = G.matrix()
    n = G.n
    codes = np.where(adj, 1, 0).astype(np.int32)
    alpha = (non_arc, arc) if non_arc < arc else (arc, non_arc)
    if alpha[0] == arc:
        codes = 1 - codes
    if n < 2:
        alpha = ()
    return TwoStructure(G.vertices, alpha, codes)

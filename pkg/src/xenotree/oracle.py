"""Brute-force reference checks.

Everything here follows the definitions directly and is meant to be slow
and obviously right.  Exponential routines refuse inputs above ``MAX_N``.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .core2s import Digraph, TwoStructure, digraph_as_2s, monochromatic_subgraphs
from .moddecomp import is_dicograph

MAX_N = 20


class OracleGuardError(ValueError):
    """Raised when an exponential oracle is asked for too large an input."""


def _as_2s(g: TwoStructure | Digraph) -> TwoStructure:
    return digraph_as_2s(g) if isinstance(g, Digraph) else g


def _guard(g: TwoStructure) -> None:
    if g.n > MAX_N:
        raise OracleGuardError(f"brute force limited to {MAX_N} vertices, got {g.n}")


def is_module(g: TwoStructure, members: frozenset[int]) -> bool:
    """Every outside vertex sees all members with the same labels, both ways."""
    inside = sorted(members)
    for z in range(g.n):
        if z in members:
            continue
        if len({int(g.codes[x, z]) for x in inside}) > 1:
            return False
        if len({int(g.codes[z, x]) for x in inside}) > 1:
            return False
    return True


def enumerate_modules(g: TwoStructure | Digraph) -> set[frozenset[int]]:
    """All nonempty modules, as sets of vertex positions."""
    g = _as_2s(g)
    _guard(g)
    found = set()
    for size in range(1, g.n + 1):
        for subset in combinations(range(g.n), size):
            members = frozenset(subset)
            if is_module(g, members):
                found.add(members)
    return found


def overlaps(a: frozenset[int], b: frozenset[int]) -> bool:
    return bool(a & b) and not a <= b and not b <= a


def strong_modules_bruteforce(g: TwoStructure | Digraph) -> set[frozenset[int]]:
    mods = enumerate_modules(g)
    return {m for m in mods if not any(overlaps(m, k) for k in mods)}


def is_prime(g: TwoStructure | Digraph) -> bool:
    """True iff the only modules are the singletons and the whole set."""
    g = _as_2s(g)
    _guard(g)
    for size in range(2, g.n):
        for subset in combinations(range(g.n), size):
            if is_module(g, frozenset(subset)):
                return False
    return True


def prime_substructures(g: TwoStructure | Digraph, sizes=(3, 4)):
    """Yield vertex tuples of the given sizes that induce a prime substructure."""
    g = _as_2s(g)
    for size in sizes:
        for subset in combinations(range(g.n), size):
            if is_prime(g.substructure(subset)):
                yield subset


def unp_small(g: TwoStructure) -> bool:
    """No prime substructure on 3 or 4 vertices; triples are scanned first."""
    return next(prime_substructures(g), None) is None


def triangle_condition(g: TwoStructure) -> bool:
    """At most two distinct unordered label sets on every vertex triple."""
    for x, y, z in combinations(range(g.n), 3):
        if len(g.triple_sets(x, y, z)) > 2:
            return False
    return True


def u1_holds(g: TwoStructure, method: str = "moddecomp") -> bool:
    """Every monochromatic subgraph is a di-cograph.

    ``method="scan"`` avoids the decomposition code entirely and looks for
    a prime induced subgraph on three or four vertices instead.
    """
    graphs = monochromatic_subgraphs(g).values()
    if method == "moddecomp":
        return all(is_dicograph(G) for G in graphs)
    if method == "scan":
        return all(unp_small(digraph_as_2s(G)) for G in graphs)
    raise ValueError(f"unknown method {method!r}")


def symbolic_ultrametric(g: TwoStructure, method: str = "moddecomp") -> bool:
    return triangle_condition(g) and u1_holds(g, method)


def cross_labels_uniform(g: TwoStructure, X: frozenset[int], Y: frozenset[int]) -> bool:
    """All arcs X -> Y share a label and so do all arcs Y -> X."""
    xs, ys = sorted(X), sorted(Y)
    block = g.codes[np.ix_(xs, ys)]
    back = g.codes[np.ix_(ys, xs)]
    return len(np.unique(block)) == 1 and len(np.unique(back)) == 1

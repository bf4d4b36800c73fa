"""Seeded random event trees and perturbed instances."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .core2s import TwoStructure
from .treerep import EventNode, EventTree, evaluate_tree


@dataclass(frozen=True)
class GenSpec:
    leaves: int
    labels: int = 3
    seed: int = 0
    caterpillar: float = 0.25
    symmetric: bool = False
    perturb: float = 0.0

    def __post_init__(self) -> None:
        if self.leaves < 1:
            raise ValueError("leaf count must be at least 1")
        if self.labels < 1:
            raise ValueError("label count must be at least 1")
        if not 0.0 <= self.caterpillar <= 1.0:
            raise ValueError("shape bias must lie in [0, 1]")
        if not 0.0 <= self.perturb <= 1.0:
            raise ValueError("perturbation rate must lie in [0, 1]")


def label_names(count: int) -> list[str]:
    return [str(i) for i in range(count)]


def random_tree(spec: GenSpec, rng: random.Random | None = None) -> EventTree:
    """Split the leaf set recursively into 2-4 parts and label every split.

    With probability ``spec.caterpillar`` a split peels off a single leaf,
    which pushes the shape towards a caterpillar.
    """
    rng = rng or random.Random(spec.seed)
    width = len(str(spec.leaves - 1))
    names = [f"v{i:0{width}d}" for i in range(spec.leaves)]
    labels = label_names(spec.labels)
    groups: list[list[str]] = [names]
    plan: dict[int, tuple[list[int], tuple[str, str]]] = {}
    pending = [0]
    while pending:
        gid = pending.pop()
        leaves = groups[gid]
        if len(leaves) == 1:
            continue
        if rng.random() < spec.caterpillar:
            pick = rng.randrange(len(leaves))
            parts = [[leaves[pick]], leaves[:pick] + leaves[pick + 1 :]]
            rng.shuffle(parts)
        else:
            arity = min(rng.randint(2, 4), len(leaves))
            shuffled = leaves[:]
            rng.shuffle(shuffled)
            cuts = sorted(rng.sample(range(1, len(leaves)), arity - 1))
            bounds = [0, *cuts, len(leaves)]
            parts = [shuffled[a:b] for a, b in zip(bounds, bounds[1:])]
        i = rng.choice(labels)
        j = i if spec.symmetric else rng.choice(labels)
        kids = list(range(len(groups), len(groups) + len(parts)))
        groups.extend(parts)
        plan[gid] = (kids, (i, j))
        pending.extend(kids)
    # children always have larger ids than their parent
    nodes: dict[int, EventNode] = {}
    for gid in range(len(groups) - 1, -1, -1):
        if gid in plan:
            kids, label = plan[gid]
            nodes[gid] = EventNode.inner(label, (nodes.pop(k) for k in kids))
        else:
            nodes[gid] = EventNode.leaf(groups[gid][0])
    return EventTree(nodes[0])


def perturb(g: TwoStructure, rate: float, rng: random.Random) -> TwoStructure:
    """Relabel ceil(rate * n(n-1)) distinct ordered pairs to different labels."""
    n = g.n
    pairs = [(x, y) for x in range(n) for y in range(n) if x != y]
    count = math.ceil(rate * len(pairs))
    if count == 0:
        return g
    if len(g.alphabet) < 2:
        raise ValueError("perturbation needs at least two labels")
    codes = g.codes.copy()
    for x, y in rng.sample(pairs, count):
        old = int(codes[x, y])
        new = rng.randrange(len(g.alphabet) - 1)
        codes[x, y] = new + (new >= old)
    return TwoStructure(g.vertices, g.alphabet, codes)


def generate(spec: GenSpec) -> tuple[EventTree, TwoStructure]:
    rng = random.Random(spec.seed)
    tree = random_tree(spec, rng)
    g = evaluate_tree(tree, alphabet=label_names(spec.labels))
    if spec.perturb:
        g = perturb(g, spec.perturb, rng)
    return tree, g


def random_structure(n: int, labels: int, rng: random.Random) -> TwoStructure:
    """Uniformly random labeling of all ordered pairs."""
    alpha = label_names(labels)
    codes = np.array([[rng.randrange(labels) for _ in range(n)] for _ in range(n)], dtype=np.int32)
    return TwoStructure(tuple(f"v{i}" for i in range(n)), tuple(alpha), codes)

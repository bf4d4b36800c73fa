"""Editing a 2-structure into an unp one: ILP model, LP export, exact search.

Binary variable ``E[i, j, x, y]`` says that the edited structure labels
(x, y) with i and (y, x) with j.  The model forces one label pair per
ordered vertex pair, keeps the two directions consistent, bounds the
distinct label sets on triangles and forbids every prime 3- and 4-vertex
pattern in every colour class.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations, permutations, product

import numpy as np
from scipy import sparse

from .core2s import TwoStructure
from .treerep import recognize_unp

EDITING = "editing"
COMPLETION = "completion"
DELETION = "deletion"
MODES = (EDITING, COMPLETION, DELETION)
MODE_ALIASES = {"edit": EDITING, "complete": COMPLETION, "delete": DELETION}

STAR = "*"
EXACT_MAX_N = 5
EXACT_MAX_LABELS = 4


class EditError(ValueError):
    """Invalid editing request (mode, alphabet, guards or budget)."""


def _arcs(k: int, arcs: str) -> tuple[int, frozenset[tuple[int, int]]]:
    names = "abcd"[:k]
    pairs = frozenset((names.index(p[0]), names.index(p[1])) for p in arcs.split())
    return k, pairs


def _complement(pattern):
    k, arcs = pattern
    return k, frozenset((x, y) for x in range(k) for y in range(k) if x != y) - arcs


_D3 = _arcs(3, "ab bc")
_N = _arcs(4, "ba bc dc")

#: Prime digraphs on three vertices and the prime four-vertex digraphs
#: without a prime three-vertex subgraph, one per isomorphism class.
FORBIDDEN_PATTERNS: dict[str, tuple[int, frozenset[tuple[int, int]]]] = {
    "D3": _D3,
    "A": _arcs(3, "ab ba bc"),
    "B": _arcs(3, "ab bc cb"),
    "D3bar": _complement(_D3),
    "C3": _arcs(3, "ab bc ca"),
    "P4": _arcs(4, "ab ba bc cb cd dc"),
    "N": _N,
    "Nbar": _complement(_N),
}


def normalize_mode(mode: str) -> str:
    mode = MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise EditError(f"unknown edit mode {mode!r}")
    return mode


@dataclass
class Constraint:
    name: str
    terms: tuple[tuple[int, int], ...]
    sense: str
    rhs: int


@dataclass
class ILPModel:
    vertices: tuple[str, ...]
    alphabet: tuple[str, ...]
    mode: str
    star: str | None
    target: np.ndarray = field(repr=False)
    objective: list[tuple[int, int]] = field(default_factory=list, repr=False)
    objective_constant: int = 0
    constraints: list[Constraint] = field(default_factory=list, repr=False)
    _matrix: tuple | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def num_labels(self) -> int:
        return len(self.alphabet)

    @property
    def num_variables(self) -> int:
        return self.num_labels**2 * self.n * (self.n - 1)

    def pair_index(self, x: int, y: int) -> int:
        return x * (self.n - 1) + (y if y < x else y - 1)

    def var(self, i: int, j: int, x: int, y: int) -> int:
        L = self.num_labels
        return self.pair_index(x, y) * L * L + i * L + j

    def unpack(self, index: int) -> tuple[int, int, int, int]:
        L, n = self.num_labels, self.n
        p, rest = divmod(index, L * L)
        i, j = divmod(rest, L)
        x, r = divmod(p, n - 1)
        y = r if r < x else r + 1
        return i, j, x, y

    def var_name(self, index: int) -> str:
        i, j, x, y = self.unpack(index)
        return f"E_{i}_{j}_{x}_{y}"

    def variable_names(self) -> list[str]:
        return [self.var_name(k) for k in range(self.num_variables)]

    def constant(self, i: int, x: int, y: int) -> int:
        """1 iff the input labels (x, y) with i."""
        return int(self.target[x, y] == i)

    def matrix(self):
        """Sparse constraint matrix with lower and upper bounds per row."""
        if self._matrix is None:
            rows, cols, vals = [], [], []
            lo = np.empty(len(self.constraints))
            hi = np.empty(len(self.constraints))
            for r, con in enumerate(self.constraints):
                for v, c in con.terms:
                    rows.append(r)
                    cols.append(v)
                    vals.append(c)
                lo[r] = con.rhs if con.sense in ("=", ">=") else -np.inf
                hi[r] = con.rhs if con.sense in ("=", "<=") else np.inf
            A = sparse.csr_matrix(
                (vals, (rows, cols)), shape=(len(self.constraints), self.num_variables), dtype=np.int64
            )
            self._matrix = (A, lo, hi)
        return self._matrix


def build_ilp(d: TwoStructure, mode: str = EDITING, star: str = STAR) -> ILPModel:
    mode = normalize_mode(mode)
    if d.n < 2:
        raise EditError("editing needs at least two vertices")
    if mode != EDITING and star not in d.alphabet:
        raise EditError(f"{mode} mode needs the symbol {star!r} in the alphabet")
    n, L = d.n, len(d.alphabet)
    model = ILPModel(d.vertices, d.alphabet, mode, star if mode != EDITING else None, d.codes.copy())
    var = model.var
    pairs = [(x, y) for x in range(n) for y in range(n) if x != y]

    for x, y in pairs:
        for i in range(L):
            coef = 1 - 2 * model.constant(i, x, y)
            model.objective.extend((var(i, j, x, y), coef) for j in range(L))
    model.objective_constant = n * (n - 1)

    seen: set = set()

    def add(name, terms, sense, rhs):
        merged: dict[int, int] = {}
        for v, c in terms:
            merged[v] = merged.get(v, 0) + c
        key = (tuple(sorted((v, c) for v, c in merged.items() if c)), sense, rhs)
        if key in seen:
            return
        seen.add(key)
        model.constraints.append(Constraint(name, key[0], sense, rhs))

    def colour(i, x, y, coef=1):
        return [(var(i, j, x, y), coef) for j in range(L)]

    for x, y in pairs:
        add(f"pair_{x}_{y}", [(var(i, j, x, y), 1) for i in range(L) for j in range(L)], "=", 1)
    for x, y in pairs:
        for i in range(L):
            for j in range(L):
                add(f"sym_{i}_{j}_{x}_{y}", [(var(i, j, x, y), 1), (var(j, i, y, x), -1)], "=", 0)

    if mode == COMPLETION:
        s = d.alphabet.index(star)
        for x, y in pairs:
            i = int(d.codes[x, y])
            if i != s:
                add(f"fix_{x}_{y}", colour(i, x, y), "=", 1)
    elif mode == DELETION:
        s = d.alphabet.index(star)
        for x, y in pairs:
            i = int(d.codes[x, y])
            terms = colour(s, x, y) if i == s else colour(i, x, y) + colour(s, x, y)
            add(f"keep_{x}_{y}", terms, "=", 1)

    label_pairs = [(i, j) for i in range(L) for j in range(L)]
    tri = 0
    for x, y, z in combinations(range(n), 3):
        for p, q, r in product(label_pairs, repeat=3):
            sets = {frozenset(p), frozenset(q), frozenset(r)}
            if len(sets) == 3:
                add(f"tri_{tri}", [(var(*p, x, y), 1), (var(*q, y, z), 1), (var(*r, z, x), 1)], "<=", 2)
                tri += 1

    fsg = 0
    for k, arcs in FORBIDDEN_PATTERNS.values():
        slots = [(a, b) for a in range(k) for b in range(k) if a != b]
        for tup in permutations(range(n), k):
            for c in range(L):
                terms = []
                for a, b in slots:
                    terms += colour(c, tup[a], tup[b], 1 if (a, b) in arcs else -1)
                before = len(model.constraints)
                add(f"fsg_{fsg}", terms, "<=", len(arcs) - 1)
                fsg += len(model.constraints) - before
    return model


def encode_assignment(model: ILPModel, delta: TwoStructure) -> np.ndarray:
    """0/1 vector with E[i, j, x, y] = 1 iff delta labels (x, y), (y, x) by i, j."""
    if delta.vertices != model.vertices:
        raise EditError("assignment structure must share the model's vertex list")
    index = {a: k for k, a in enumerate(model.alphabet)}
    try:
        code = np.array([index[a] for a in delta.alphabet], dtype=np.int64)
    except KeyError as exc:
        raise EditError(f"label {exc.args[0]!r} is not in the model alphabet") from None
    vec = np.zeros(model.num_variables, dtype=np.int8)
    n = model.n
    for x in range(n):
        for y in range(n):
            if x != y:
                vec[model.var(code[delta.codes[x, y]], code[delta.codes[y, x]], x, y)] = 1
    return vec


def _as_vector(model: ILPModel, assignment) -> np.ndarray:
    if isinstance(assignment, Mapping):
        names = model.variable_names()
        missing = [v for v in names if v not in assignment]
        if missing:
            raise EditError(f"assignment misses {len(missing)} variables, e.g. {missing[0]}")
        return np.array([assignment[v] for v in names], dtype=np.int64)
    vec = np.asarray(assignment, dtype=np.int64)
    if vec.shape[0] != model.num_variables:
        raise EditError(f"assignment has {vec.shape[0]} entries, model has {model.num_variables}")
    return vec


def check_feasible(model: ILPModel, assignment) -> bool | np.ndarray:
    """Whether an assignment satisfies every constraint.

    A 2-d array is treated as a batch with one assignment per column and
    yields one boolean per column.
    """
    vec = _as_vector(model, assignment)
    if not np.isin(vec, (0, 1)).all():
        return False if vec.ndim == 1 else np.zeros(vec.shape[1], dtype=bool)
    A, lo, hi = model.matrix()
    lhs = A @ vec
    if vec.ndim == 1:
        return bool(np.all((lhs >= lo) & (lhs <= hi)))
    return np.all((lhs >= lo[:, None]) & (lhs <= hi[:, None]), axis=0)


def objective_value(model: ILPModel, assignment) -> int:
    vec = _as_vector(model, assignment)
    return model.objective_constant + sum(c * int(vec[v]) for v, c in model.objective)


def _expr(terms: Sequence[tuple[int, int]], model: ILPModel, per_line: int = 8) -> str:
    chunks = []
    for k, (v, c) in enumerate(terms):
        sign = "-" if c < 0 else "+"
        mag = "" if abs(c) == 1 else f"{abs(c)} "
        sep = "\n   " if k and k % per_line == 0 else " "
        chunks.append(f"{sep}{sign} {mag}{model.var_name(v)}")
    return "".join(chunks)


def emit_lp(model: ILPModel) -> str:
    """CPLEX LP text; the constant objective offset is given as a comment."""
    labels = " ".join(f"{k}={a}" for k, a in enumerate(model.alphabet))
    verts = " ".join(f"{k}={v}" for k, v in enumerate(model.vertices))
    lines = [
        f"\\ mode: {model.mode}",
        f"\\ labels: {labels}",
        f"\\ vertices: {verts}",
        f"\\ objective offset: {model.objective_constant} (optimum + offset = 2 * number of edits)",
        "Minimize",
        " obj:" + _expr(model.objective, model),
        "Subject To",
    ]
    for con in model.constraints:
        lines.append(f" {con.name}:{_expr(con.terms, model)} {con.sense} {con.rhs}")
    lines.append("Binary")
    names = model.variable_names()
    for k in range(0, len(names), 8):
        lines.append(" " + " ".join(names[k : k + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# exhaustive editing


class BudgetExceededError(EditError):
    pass


@dataclass(frozen=True)
class EditResult:
    cost: int
    structure: TwoStructure
    changed: tuple[tuple[str, str], ...]


def _choices(d: TwoStructure, mode: str, star: str | None) -> list[tuple[tuple[int, int], list[int]]]:
    n, L = d.n, len(d.alphabet)
    s = d.alphabet.index(star) if star is not None else None
    out = []
    for x in range(n):
        for y in range(n):
            if x == y:
                continue
            cur = int(d.codes[x, y])
            if mode == EDITING:
                alts = [c for c in range(L) if c != cur]
            elif mode == COMPLETION:
                alts = [c for c in range(L) if c != s] if cur == s else []
            else:
                alts = [s] if cur != s else []
            if alts:
                out.append(((x, y), alts))
    return out


def exact_edit(d: TwoStructure, mode: str = EDITING, max_budget: int = 4, star: str = STAR) -> EditResult:
    """Fewest relabeled ordered pairs that make d unp, by exhaustive search.

    Candidates are enumerated by increasing edit count; among the optimal
    ones the witness with the lexicographically smallest label matrix wins.
    """
    mode = normalize_mode(mode)
    if d.n > EXACT_MAX_N or len(d.alphabet) > EXACT_MAX_LABELS:
        raise EditError(
            f"exact editing is limited to n <= {EXACT_MAX_N} and <= {EXACT_MAX_LABELS} labels"
        )
    if mode != EDITING and star not in d.alphabet:
        raise EditError(f"{mode} mode needs the symbol {star!r} in the alphabet")
    star_used = star if mode != EDITING else None
    options = _choices(d, mode, star_used)
    for k in range(max_budget + 1):
        best = None
        for chosen in combinations(options, k):
            for labels in product(*(alts for _, alts in chosen)):
                codes = d.codes.copy()
                for ((x, y), _), c in zip(chosen, labels):
                    codes[x, y] = c
                h = TwoStructure(d.vertices, d.alphabet, codes)
                if recognize_unp(h).accepted:
                    key = tuple(codes.ravel().tolist())
                    if best is None or key < best[0]:
                        best = (key, h, chosen)
        if best is not None:
            _, h, chosen = best
            changed = tuple((d.vertices[x], d.vertices[y]) for (x, y), _ in chosen)
            return EditResult(k, h, changed)
    raise BudgetExceededError(f"no unp structure within {max_budget} edits")

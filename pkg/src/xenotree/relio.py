"""Relation systems and file formats.

Formats
-------
2-structure JSON::

    {"version": 1, "vertices": [...], "labels": [...],
     "default_label": "0", "pairs": [[x, y, label], ...]}

``default_label`` is optional; without it every ordered pair must be
listed.  A dense ``"matrix"`` (rows of labels, ``null`` on the diagonal)
may replace ``pairs``.  TSV lines are ``x<TAB>y<TAB>label``.

Trees are stored as nested JSON (``{"label": [i, j], "children": [...]}``
with leaves as plain strings) or as Newick with quoted ``'(i,j)'`` labels
on inner nodes.
"""

from __future__ import annotations

import json
import os
import re
import sys
from collections.abc import Iterable, Mapping, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

from .core2s import SEPARATOR, StructureError, TwoStructure
from .treerep import EventNode, EventTree, TreeError

FORMAT_VERSION = 1
BACKGROUND = "0"


class FormatError(ValueError):
    """Input that cannot be parsed or violates a format rule."""


# --------------------------------------------------------------------------
# relation systems


@dataclass(frozen=True)
class RelationSystem:
    vertices: tuple[str, ...]
    relations: Mapping[str, frozenset[tuple[str, str]]] = field(default_factory=dict)
    disjoint: bool = True

    def __post_init__(self) -> None:
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        known = set(verts)
        if len(known) != len(verts):
            raise FormatError("vertex names must be distinct")
        rels = {str(k): frozenset((str(x), str(y)) for x, y in v) for k, v in self.relations.items()}
        for name, pairs in rels.items():
            for x, y in pairs:
                if x == y:
                    raise FormatError(f"relation {name!r} contains self-pair ({x}, {x})")
                if x not in known or y not in known:
                    raise FormatError(f"relation {name!r} uses unknown vertex in ({x}, {y})")
        object.__setattr__(self, "relations", rels)

    @classmethod
    def from_pairs(
        cls,
        vertices: Sequence[str],
        relations: Mapping[str, Iterable[tuple[str, str]]],
        disjoint: bool = True,
        symmetric: Iterable[str] = (),
    ) -> RelationSystem:
        """``symmetric`` names relations whose pairs hold in both directions."""
        sym = set(symmetric)
        rels = {}
        for name, pairs in relations.items():
            ps = {(x, y) for x, y in pairs}
            if name in sym:
                ps |= {(y, x) for x, y in ps}
            rels[name] = frozenset(ps)
        return cls(tuple(vertices), rels, disjoint)


def encode_relations(rs: RelationSystem, mode: str | None = None, label_by: str = "index") -> TwoStructure:
    """Turn relations into a 2-structure.

    ``disjoint`` mode labels a pair by the relation containing it ("1", "2",
    ... or the relation name with ``label_by="name"``) and "0" otherwise.
    ``bitvector`` mode labels it with one 0/1 digit per relation, first
    relation first.
    """
    mode = mode or ("disjoint" if rs.disjoint else "bitvector")
    names = list(rs.relations)
    if mode == "disjoint":
        if label_by == "index":
            tags = [str(k + 1) for k in range(len(names))]
        elif label_by == "name":
            tags = names
            if BACKGROUND in tags:
                raise FormatError(f"relation name {BACKGROUND!r} collides with the background label")
        else:
            raise ValueError(f"unknown label_by {label_by!r}")
        owner: dict[tuple[str, str], int] = {}
        for k, name in enumerate(names):
            for pair in sorted(rs.relations[name]):
                if pair in owner:
                    other = names[owner[pair]]
                    raise FormatError(f"pair {pair} lies in both {other!r} and {name!r}")
                owner[pair] = k
        return TwoStructure.from_function(
            rs.vertices,
            lambda x, y: tags[owner[(x, y)]] if (x, y) in owner else BACKGROUND,
        )
    if mode == "bitvector":
        if not names:
            raise FormatError("bit-vector encoding needs at least one relation")
        sets = [rs.relations[name] for name in names]
        return TwoStructure.from_function(
            rs.vertices,
            lambda x, y: "".join("1" if (x, y) in s else "0" for s in sets),
        )
    raise ValueError(f"unknown encoding mode {mode!r}")


def parse_relations(text: str) -> RelationSystem:
    """Relation JSON: vertices, disjoint flag, and named relations.

    A relation is either a list of pairs or an object with ``pairs`` and an
    optional ``symmetric`` flag.
    """
    data = _load_json(text)
    try:
        vertices = [str(v) for v in data["vertices"]]
        raw = data["relations"]
    except (KeyError, TypeError) as exc:
        raise FormatError("relation file needs 'vertices' and 'relations'") from exc
    rels, sym = {}, []
    for name, spec in raw.items():
        if isinstance(spec, dict):
            pairs = spec.get("pairs", [])
            if spec.get("symmetric"):
                sym.append(name)
        else:
            pairs = spec
        rels[name] = [_pair(p) for p in pairs]
    return RelationSystem.from_pairs(vertices, rels, bool(data.get("disjoint", True)), sym)


def _pair(p) -> tuple[str, str]:
    if not isinstance(p, (list, tuple)) or len(p) != 2:
        raise FormatError(f"expected a pair, got {p!r}")
    return str(p[0]), str(p[1])


# --------------------------------------------------------------------------
# 2-structures


def _load_json(text: str):
    if not text.strip():
        raise FormatError("empty input")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc


def _check_label(label: str) -> str:
    if not isinstance(label, str):
        raise FormatError(f"labels must be strings, got {label!r}")
    if SEPARATOR in label:
        raise FormatError(f"label {label!r} contains the reserved separator {SEPARATOR!r}")
    return label


def _assemble(vertices, triples, default, alphabet, allow_separator=False) -> TwoStructure:
    verts = [str(v) for v in vertices]
    if not verts:
        raise FormatError("a 2-structure needs at least one vertex")
    if len(set(verts)) != len(verts):
        raise FormatError("duplicate vertex names")
    pos = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    check = (lambda t: t) if allow_separator else _check_label
    tokens: list[list[str | None]] = [[None] * n for _ in range(n)]
    for x, y, lab in triples:
        x, y = str(x), str(y)
        if x not in pos or y not in pos:
            raise FormatError(f"unknown vertex in pair ({x}, {y})")
        if x == y:
            raise FormatError(f"self-pair ({x}, {x}) is not allowed")
        lab = check(lab)
        prev = tokens[pos[x]][pos[y]]
        if prev is not None and prev != lab:
            raise FormatError(f"conflicting labels {prev!r} and {lab!r} for ({x}, {y})")
        tokens[pos[x]][pos[y]] = lab
    missing = [(verts[i], verts[j]) for i in range(n) for j in range(n) if i != j and tokens[i][j] is None]
    if missing:
        if default is None:
            raise FormatError(f"{len(missing)} pairs unlabeled and no default label, e.g. {missing[0]}")
        default = check(default)
        for i in range(n):
            for j in range(n):
                if i != j and tokens[i][j] is None:
                    tokens[i][j] = default
    alpha = [check(a) for a in alphabet]
    try:
        g = TwoStructure.from_tokens(verts, tokens, alpha)
    except StructureError as exc:
        raise FormatError(str(exc)) from exc
    assert sum(1 for row in g.token_matrix() for t in row if t is not None) == n * (n - 1)
    return g


def parse_structure(text: str, allow_separator: bool = False) -> TwoStructure:
    data = _load_json(text)
    if not isinstance(data, dict) or "vertices" not in data:
        raise FormatError("2-structure JSON needs a 'vertices' field")
    version = data.get("version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    verts = data["vertices"]
    if "matrix" in data:
        rows = data["matrix"]
        if len(rows) != len(verts) or any(len(r) != len(verts) for r in rows):
            raise FormatError("matrix must be square over the vertex list")
        triples = [
            (verts[i], verts[j], rows[i][j])
            for i in range(len(verts))
            for j in range(len(verts))
            if i != j and rows[i][j] is not None
        ]
    else:
        triples = []
        for entry in data.get("pairs", []):
            if not isinstance(entry, (list, tuple)) or len(entry) != 3:
                raise FormatError(f"pair entries are [x, y, label], got {entry!r}")
            triples.append(tuple(entry))
    return _assemble(verts, triples, data.get("default_label"), data.get("labels", []), allow_separator)


def dumps_structure(g: TwoStructure) -> str:
    """Deterministic JSON text listing every ordered pair in row-major order."""
    head = [
        f'  "version": {FORMAT_VERSION}',
        f'  "vertices": {json.dumps(list(g.vertices), ensure_ascii=False)}',
        f'  "labels": {json.dumps(list(g.alphabet), ensure_ascii=False)}',
    ]
    rows = [
        "    " + json.dumps([g.vertices[i], g.vertices[j], g.label_at(i, j)], ensure_ascii=False)
        for i in range(g.n)
        for j in range(g.n)
        if i != j
    ]
    pairs = '  "pairs": [\n' + ",\n".join(rows) + "\n  ]" if rows else '  "pairs": []'
    return "{\n" + ",\n".join(head + [pairs]) + "\n}\n"


def parse_tsv(text: str, default: str | None, vertices: Sequence[str] | None = None) -> TwoStructure:
    """Tab-separated ``x y label`` lines; ``#`` starts a comment."""
    triples = []
    seen: dict[str, None] = dict.fromkeys(vertices or ())
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FormatError(f"line {lineno}: expected 3 tab-separated fields")
        x, y, lab = (f.strip() for f in fields)
        if vertices is None:
            seen.setdefault(x)
            seen.setdefault(y)
        triples.append((x, y, lab))
    if not seen:
        raise FormatError("empty input")
    if default is None:
        raise FormatError("TSV input requires a default label")
    return _assemble(list(seen), triples, default, [])


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        return Path(source).read_text(encoding="utf-8")
    return source.read()


def _write_text(sink, text: str) -> None:
    if isinstance(sink, (str, os.PathLike)):
        Path(sink).write_text(text, encoding="utf-8")
    else:
        sink.write(text)


def _guess_format(source, fmt: str | None, options: tuple[str, ...]) -> str:
    if fmt:
        return fmt
    if isinstance(source, (str, os.PathLike)):
        suffix = Path(source).suffix.lower().lstrip(".")
        aliases = {"nwk": "newick", "nw": "newick", "tre": "newick", "txt": "tsv"}
        suffix = aliases.get(suffix, suffix)
        if suffix in options:
            return suffix
    return options[0]


def load_2structure(source, fmt: str | None = None, default: str | None = None) -> TwoStructure:
    """Read a 2-structure from a path or text stream (JSON or TSV)."""
    fmt = _guess_format(source, fmt, ("json", "tsv"))
    text = _read_text(source)
    if fmt == "json":
        return parse_structure(text)
    if fmt == "tsv":
        return parse_tsv(text, default)
    raise FormatError(f"unknown 2-structure format {fmt!r}")


def save_2structure(g: TwoStructure, sink) -> None:
    _write_text(sink, dumps_structure(g))


# --------------------------------------------------------------------------
# trees


@contextmanager
def _deep(depth: int):
    old = sys.getrecursionlimit()
    need = 4 * depth + 200
    if need > old:
        sys.setrecursionlimit(need)
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


def tree_to_data(T: EventTree):
    built: dict[int, object] = {}
    for node in T.nodes():
        if node.is_leaf:
            built[id(node)] = node.name
        else:
            kids = [built.pop(id(c)) for c in node.children]
            built[id(node)] = {"label": list(node.label), "children": kids}
    return built[id(T.root)]


def tree_from_data(data) -> EventTree:
    def convert(item):
        if isinstance(item, str):
            return EventNode.leaf(item)
        if not isinstance(item, dict) or "label" not in item or "children" not in item:
            raise FormatError(f"tree nodes are strings or objects with label and children, got {item!r}")
        label = item["label"]
        if not isinstance(label, list) or len(label) != 2:
            raise FormatError("inner node label must be a pair [i, j]")
        return EventNode.inner([_check_label(str(t)) for t in label], (convert(c) for c in item["children"]))

    try:
        return EventTree(convert(data))
    except TreeError as exc:
        raise FormatError(str(exc)) from exc


def dumps_tree_json(T: EventTree) -> str:
    with _deep(len(T.leaf_names())):
        return json.dumps(tree_to_data(T), ensure_ascii=False) + "\n"


def parse_tree_json(text: str) -> EventTree:
    with _deep(text.count("{") + 1):
        data = _load_json(text)
        return tree_from_data(data)


_PLAIN = re.compile(r"[^\s(),:;'\[\]]+")


def _quote(text: str) -> str:
    if _PLAIN.fullmatch(text):
        return text
    return "'" + text.replace("'", "''") + "'"


def dumps_tree_newick(T: EventTree) -> str:
    out: dict[int, str] = {}
    for node in T.nodes():
        if node.is_leaf:
            out[id(node)] = _quote(node.name)
            continue
        for t in node.label:
            if any(ch in t for ch in ",()"):
                raise FormatError(f"label {t!r} cannot be written in Newick form")
        inner = ",".join(out.pop(id(c)) for c in node.children)
        out[id(node)] = f"({inner})" + _quote(f"({node.label[0]},{node.label[1]})")
    return out[id(T.root)] + ";\n"


def _newick_tokens(text: str):
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "(),;":
            yield ch
            i += 1
        elif ch == "'":
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    raise FormatError("unterminated quoted label")
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    break
                buf.append(text[j])
                j += 1
            yield ("name", "".join(buf))
            i = j + 1
        else:
            m = _PLAIN.match(text, i)
            if not m:
                raise FormatError(f"unexpected character {ch!r} in Newick input")
            yield ("name", m.group())
            i = m.end()


def _inner_label(text: str) -> tuple[str, str]:
    if not (text.startswith("(") and text.endswith(")")) or text.count(",") != 1:
        raise FormatError(f"inner node label must look like (i,j), got {text!r}")
    i, j = text[1:-1].split(",")
    return _check_label(i.strip()), _check_label(j.strip())


def parse_tree_newick(text: str) -> EventTree:
    tokens = list(_newick_tokens(text))
    if not tokens:
        raise FormatError("empty input")
    if tokens[-1] != ";":
        raise FormatError("Newick input must end with ';'")
    tokens.pop()
    stack: list[list[EventNode]] = [[]]
    pos = 0

    def take_name():
        nonlocal pos
        if pos < len(tokens) and isinstance(tokens[pos], tuple):
            pos += 1
            return tokens[pos - 1][1]
        return None

    expect_item = True
    while pos < len(tokens):
        tok = tokens[pos]
        if tok == "(":
            if not expect_item:
                raise FormatError("missing comma before '('")
            stack.append([])
            pos += 1
        elif tok == ",":
            if expect_item or len(stack) < 2:
                raise FormatError("misplaced comma")
            expect_item = True
            pos += 1
        elif tok == ")":
            if expect_item or len(stack) < 2:
                raise FormatError("misplaced ')'")
            pos += 1
            kids = stack.pop()
            name = take_name()
            if name is None:
                raise FormatError("inner node lacks its '(i,j)' label")
            stack[-1].append(EventNode.inner(_inner_label(name), kids))
            expect_item = False
        elif tok == ";":
            raise FormatError("';' only allowed at the end")
        else:
            if not expect_item:
                raise FormatError("missing comma between nodes")
            stack[-1].append(EventNode.leaf(take_name()))
            expect_item = False
    if len(stack) != 1 or len(stack[0]) != 1:
        raise FormatError("unbalanced parentheses")
    try:
        return EventTree(stack[0][0])
    except TreeError as exc:
        raise FormatError(str(exc)) from exc


def load_tree(source, fmt: str | None = None) -> EventTree:
    fmt = _guess_format(source, fmt, ("json", "newick"))
    text = _read_text(source)
    if fmt == "json":
        return parse_tree_json(text)
    if fmt == "newick":
        return parse_tree_newick(text)
    raise FormatError(f"unknown tree format {fmt!r}")


def dumps_tree(T: EventTree, fmt: str = "json") -> str:
    if fmt == "json":
        return dumps_tree_json(T)
    if fmt == "newick":
        return dumps_tree_newick(T)
    raise FormatError(f"unknown tree format {fmt!r}")


def save_tree(T: EventTree, sink, fmt: str | None = None) -> None:
    _write_text(sink, dumps_tree(T, _guess_format(sink, fmt, ("json", "newick"))))


def read_text_arg(source) -> str:
    """Text from a path, or from stdin when ``source`` is '-' or None."""
    if source in (None, "-"):
        return sys.stdin.read()
    return _read_text(source)


__all__ = [
    "FormatError",
    "RelationSystem",
    "encode_relations",
    "parse_relations",
    "parse_structure",
    "dumps_structure",
    "parse_tsv",
    "load_2structure",
    "save_2structure",
    "load_tree",
    "save_tree",
    "dumps_tree",
    "parse_tree_json",
    "parse_tree_newick",
    "tree_to_data",
    "tree_from_data",
]

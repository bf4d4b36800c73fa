import random
from itertools import combinations, product

import numpy as np
import pytest

from structures import distinct_triangle, four_label_unp
from xenotree import oracle
from xenotree.core2s import Digraph, TwoStructure
from xenotree.editing import (
    COMPLETION,
    DELETION,
    EDITING,
    FORBIDDEN_PATTERNS,
    BudgetExceededError,
    EditError,
    build_ilp,
    check_feasible,
    emit_lp,
    encode_assignment,
    exact_edit,
    normalize_mode,
    objective_value,
)
from xenotree.treerep import is_unp


def two_label_triangle():
    return TwoStructure.from_function("abc", lambda x, y: "0" if x < y else "1")


def all_structures(vertices, alphabet):
    n = len(vertices)
    pairs = [(x, y) for x in range(n) for y in range(n) if x != y]
    for labels in product(range(len(alphabet)), repeat=len(pairs)):
        codes = np.full((n, n), -1, dtype=np.int32)
        for (x, y), c in zip(pairs, labels):
            codes[x, y] = c
        yield TwoStructure(tuple(vertices), tuple(alphabet), codes)


def brute_force_cost(d, allowed=lambda old, new: True):
    """Smallest Hamming distance from d to an unp structure, by enumeration."""
    best = None
    for h in all_structures(d.vertices, d.alphabet):
        diff = d.codes != h.codes
        if not all(allowed(int(d.codes[x, y]), int(h.codes[x, y])) for x, y in zip(*np.nonzero(diff))):
            continue
        if oracle.unp_small(h):
            cost = int(diff.sum())
            best = cost if best is None else min(best, cost)
    return best


class TestPatterns:
    def test_classes(self):
        sizes = sorted(k for k, _ in FORBIDDEN_PATTERNS.values())
        assert sizes == [3, 3, 3, 3, 3, 4, 4, 4]

    def test_patterns_are_minimal_primes(self):
        for k, arcs in FORBIDDEN_PATTERNS.values():
            G = Digraph([str(i) for i in range(k)], [sum(1 << b for a2, b in arcs if a2 == a) for a in range(k)])
            assert oracle.is_prime(G)
            assert all(not oracle.is_prime(G.induced(sub)) for sub in combinations(range(k), 3) if k == 4)


class TestModel:
    def test_counts(self):
        m = build_ilp(two_label_triangle())
        names = [c.name.split("_")[0] for c in m.constraints]
        assert m.num_variables == 6 * 2 * 2
        assert names.count("pair") == 6
        assert names.count("sym") == 6 * 2 * 2
        # three distinct unordered sets over two labels: 3! placements, 2 orientations of {0,1}
        assert names.count("tri") == 12

    def test_p4_constraint(self):
        d = TwoStructure.from_function("abcd", lambda x, y: "0")
        m = build_ilp(d)
        p4 = [c for c in m.constraints if c.name.startswith("fsg") and len(c.terms) == 12 and c.rhs == 5]
        assert p4
        for con in p4:
            coefs = sorted(c for _, c in con.terms)
            assert coefs == [-1] * 6 + [1] * 6

    def test_variable_names(self):
        m = build_ilp(two_label_triangle())
        assert m.var_name(m.var(1, 0, 2, 1)) == "E_1_0_2_1"
        assert all(m.unpack(k) == tuple(map(int, name.split("_")[1:])) for k, name in enumerate(m.variable_names()))

    def test_objective_counts_edits(self):
        d = two_label_triangle()
        m = build_ilp(d)
        assert objective_value(m, encode_assignment(m, d)) == 0
        e = TwoStructure(d.vertices, d.alphabet, np.where(d.codes >= 0, 0, -1).astype(np.int32))
        assert objective_value(m, encode_assignment(m, e)) == 2 * 3

    def test_completion_fixes_known_pairs(self):
        d = TwoStructure.from_pairs("abc", {("a", "b"): "1"}, default="*")
        m = build_ilp(d, COMPLETION)
        fixes = [c for c in m.constraints if c.name.startswith("fix")]
        assert [c.name for c in fixes] == ["fix_0_1"]
        assert not any(c.name.startswith("keep") for c in m.constraints)

    def test_deletion_keeps_or_stars(self):
        d = TwoStructure.from_pairs("abc", {("a", "b"): "1"}, default="*")
        m = build_ilp(d, DELETION)
        keeps = [c.name for c in m.constraints if c.name.startswith("keep")]
        # over {*, 1} the pair (a, b) may take any label, so its row equals pair_0_1 and is dropped
        assert len(keeps) == 5 and "keep_0_1" not in keeps

    def test_star_required(self):
        with pytest.raises(EditError):
            build_ilp(two_label_triangle(), COMPLETION)

    def test_modes(self):
        assert normalize_mode("edit") == EDITING
        with pytest.raises(EditError):
            normalize_mode("other")


class TestFeasibility:
    def test_matches_symbolic_ultrametric(self):
        d = two_label_triangle()
        m = build_ilp(d)
        candidates = list(all_structures(d.vertices, d.alphabet))
        batch = np.stack([encode_assignment(m, h) for h in candidates], axis=1)
        got = check_feasible(m, batch)
        assert list(got) == [oracle.symbolic_ultrametric(h) for h in candidates]

    def test_four_vertices_sample(self):
        rng = random.Random(2)
        d = four_label_unp()
        m = build_ilp(d)
        assert check_feasible(m, encode_assignment(m, d))
        for _ in range(300):
            codes = np.array([[rng.randrange(4) if x != y else -1 for y in range(4)] for x in range(4)], dtype=np.int32)
            h = TwoStructure(d.vertices, d.alphabet, codes)
            assert check_feasible(m, encode_assignment(m, h)) == oracle.symbolic_ultrametric(h)

    def test_mapping_and_bad_values(self):
        d = two_label_triangle()
        m = build_ilp(d)
        vec = encode_assignment(m, d)
        names = m.variable_names()
        assert check_feasible(m, dict(zip(names, vec.tolist())))
        assert not check_feasible(m, np.full(m.num_variables, 2))
        with pytest.raises(EditError):
            check_feasible(m, {names[0]: 1})
        with pytest.raises(EditError):
            check_feasible(m, vec[:-1])

    def test_foreign_labels_rejected(self):
        m = build_ilp(two_label_triangle())
        with pytest.raises(EditError):
            encode_assignment(m, two_label_triangle().relabeled({"0": "9"}))


class TestLPExport:
    def test_deterministic(self):
        d = four_label_unp()
        assert emit_lp(build_ilp(d)) == emit_lp(build_ilp(d))

    def test_sections(self):
        text = emit_lp(build_ilp(two_label_triangle()))
        for head in ("Minimize", "Subject To", "Binary", "End"):
            assert f"\n{head}\n" in text or text.endswith(f"{head}\n")

    def test_solver_optimum(self, tmp_path):
        highspy = pytest.importorskip("highspy")
        d = distinct_triangle()
        model = build_ilp(d)
        path = tmp_path / "model.lp"
        path.write_text(emit_lp(model))
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.readModel(str(path))
        h.run()
        optimum = h.getInfo().objective_function_value
        assert h.getNumCol() == model.num_variables
        assert round(optimum) + model.objective_constant == 2 * 2


class TestExactEdit:
    def test_unp_costs_nothing(self):
        result = exact_edit(four_label_unp())
        assert result.cost == 0 and result.changed == ()

    def test_distinct_triangle(self):
        d = distinct_triangle()
        result = exact_edit(d)
        assert result.cost == 2 == brute_force_cost(d)
        assert is_unp(result.structure)
        assert len(result.changed) == 2

    def test_deterministic_witness(self):
        d = distinct_triangle()
        assert exact_edit(d).structure == exact_edit(d).structure

    def test_completion_only_touches_stars(self):
        d = TwoStructure.from_function(
            "abc", lambda x, y: {("a", "b"): "1", ("b", "c"): "2", ("c", "a"): "3"}.get((x, y), "*")
        )
        result = exact_edit(d, COMPLETION)
        for x, y in result.changed:
            assert d.phi(x, y) == "*" and result.structure.phi(x, y) != "*"
        s = d.alphabet.index("*")
        assert result.cost == brute_force_cost(d, lambda old, new: old == s and new != s)

    def test_deletion_only_adds_stars(self):
        d = distinct_triangle()
        d = TwoStructure(d.vertices, ("*",) + d.alphabet, d.codes + 1)
        result = exact_edit(d, DELETION)
        for x, y in result.changed:
            assert result.structure.phi(x, y) == "*"
        assert result.cost == brute_force_cost(d, lambda old, new: new == 0)

    def test_editing_never_costs_more(self):
        rng = random.Random(4)
        for _ in range(15):
            n = 3
            codes = np.array([[rng.randrange(3) if x != y else -1 for y in range(n)] for x in range(n)], dtype=np.int32)
            d = TwoStructure(("a", "b", "c"), ("*", "1", "2"), codes)
            e = exact_edit(d, EDITING, 6).cost
            assert e <= exact_edit(d, DELETION, 6).cost
            assert e == brute_force_cost(d)

    def test_guards(self):
        big = TwoStructure.from_function("abcdef", lambda x, y: "0")
        with pytest.raises(EditError):
            exact_edit(big)
        with pytest.raises(BudgetExceededError):
            exact_edit(distinct_triangle(), max_budget=1)
        with pytest.raises(EditError):
            exact_edit(distinct_triangle(), COMPLETION)

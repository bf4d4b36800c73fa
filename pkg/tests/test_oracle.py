import pytest
from hypothesis import given

from conftest import PROPERTY_SETTINGS, event_trees, structures
from structures import distinct_triangle, four_label_unp, nonreversible_unp, overlap_example
from xenotree import oracle
from xenotree.core2s import Digraph, TwoStructure, digraph_as_2s, reversible_refinement
from xenotree.treerep import evaluate_tree


def path4():
    arcs = [("a", "b"), ("b", "c"), ("c", "d")]
    return Digraph.from_arcs("abcd", arcs + [(y, x) for x, y in arcs])


class TestModules:
    def test_trivial_modules_always_present(self):
        g = distinct_triangle()
        mods = oracle.enumerate_modules(g)
        assert mods == {frozenset({0}), frozenset({1}), frozenset({2}), frozenset({0, 1, 2})}
        assert oracle.is_prime(g)

    def test_four_label_modules(self):
        g = four_label_unp()
        # frozen from the brute-force enumeration
        names = {frozenset(g.vertices[i] for i in m) for m in oracle.strong_modules_bruteforce(g)}
        assert names == {frozenset(s) for s in ["abcd", "abc", "ac", "a", "b", "c", "d"]}

    def test_path_is_prime(self):
        assert oracle.is_prime(path4())
        assert not oracle.unp_small(digraph_as_2s(path4()))

    def test_overlaps(self):
        assert oracle.overlaps(frozenset({0, 1}), frozenset({1, 2}))
        assert not oracle.overlaps(frozenset({0, 1}), frozenset({0, 1, 2}))
        assert not oracle.overlaps(frozenset({0}), frozenset({1}))

    def test_guard(self):
        big = TwoStructure.from_function([f"v{i}" for i in range(oracle.MAX_N + 1)], lambda x, y: "a")
        with pytest.raises(oracle.OracleGuardError):
            oracle.enumerate_modules(big)
        with pytest.raises(oracle.OracleGuardError):
            oracle.is_prime(big)

    @PROPERTY_SETTINGS
    @given(structures(max_n=5))
    def test_modules_closed_under_refinement(self, g):
        assert oracle.enumerate_modules(g) == oracle.enumerate_modules(reversible_refinement(g))

    @PROPERTY_SETTINGS
    @given(structures(max_n=5))
    def test_strong_modules_are_laminar(self, g):
        strong = oracle.strong_modules_bruteforce(g)
        assert frozenset(range(g.n)) in strong
        assert all(not oracle.overlaps(a, b) for a in strong for b in strong)
        assert len(strong) <= 2 * g.n - 1


class TestConditions:
    def test_examples(self):
        assert oracle.symbolic_ultrametric(four_label_unp())
        assert oracle.symbolic_ultrametric(nonreversible_unp())
        g = overlap_example()
        assert oracle.u1_holds(g) and oracle.u1_holds(reversible_refinement(g))
        assert not oracle.triangle_condition(g)
        assert not oracle.triangle_condition(distinct_triangle())

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            oracle.u1_holds(four_label_unp(), method="nope")

    @PROPERTY_SETTINGS
    @given(structures(max_n=6, max_labels=4))
    def test_scan_agrees_with_decomposition(self, g):
        assert oracle.u1_holds(g, "scan") == oracle.u1_holds(g, "moddecomp")

    @PROPERTY_SETTINGS
    @given(structures(max_n=5, max_labels=4))
    def test_characterization(self, g):
        assert oracle.unp_small(g) == oracle.symbolic_ultrametric(reversible_refinement(g))

    @PROPERTY_SETTINGS
    @given(structures(max_n=6, max_labels=4))
    def test_triangle_transfer(self, g):
        r = reversible_refinement(g)
        assert oracle.triangle_condition(g) == oracle.triangle_condition(r)
        if oracle.triangle_condition(g):
            assert oracle.u1_holds(g) == oracle.u1_holds(r)


class TestTreeStructures:
    @PROPERTY_SETTINGS
    @given(event_trees(max_leaves=8))
    def test_trees_give_unp(self, T):
        g = evaluate_tree(T)
        assert oracle.unp_small(g)
        assert oracle.symbolic_ultrametric(g)

    @PROPERTY_SETTINGS
    @given(event_trees(max_leaves=7))
    def test_sibling_modules_see_uniform_labels(self, T):
        g = evaluate_tree(T)
        below = {}
        for v in T.nodes():
            if v.is_leaf:
                below[id(v)] = frozenset([g.index(v.name)])
                continue
            kids = [below[id(c)] for c in v.children]
            below[id(v)] = frozenset().union(*kids)
            for a, X in enumerate(kids):
                for Y in kids[a + 1 :]:
                    assert oracle.cross_labels_uniform(g, X, Y)
        mods = oracle.enumerate_modules(g)
        assert all(m in mods for m in below.values())

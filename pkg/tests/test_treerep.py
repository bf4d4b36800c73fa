import random

import pytest
from hypothesis import given

from conftest import PROPERTY_SETTINGS, event_trees, structures
from structures import (
    distinct_triangle,
    four_label_tree,
    four_label_unp,
    nonreversible_tree,
    nonreversible_unp,
    overlap_example,
)
from xenotree import oracle
from xenotree.core2s import TwoStructure, monochromatic_subgraphs, reversible_refinement
from xenotree.generate import GenSpec, generate, random_structure
from xenotree.moddecomp import bits_to_list
from xenotree.treerep import (
    CLUSTER_BOUND,
    LABEL_BOUND,
    NON_DICOGRAPH,
    OVERLAP,
    ROOT_MISSING,
    EventNode,
    EventTree,
    NotUnpError,
    TreeError,
    build_tree_representation,
    clusters_as_names,
    evaluate_tree,
    is_unp,
    normalize,
    recognize_unp,
    summarize,
    trees_isomorphic,
)

L, I = EventNode.leaf, EventNode.inner


def leaf_sets(T):
    below = {}
    for v in T.nodes():
        below[id(v)] = frozenset([v.name]) if v.is_leaf else frozenset().union(*(below[id(c)] for c in v.children))
    return sorted((below[id(v)] for v in T.inner_nodes()), key=sorted)


class TestEventTree:
    def test_summary(self):
        assert summarize(four_label_tree()) == "(1,2)[(B,1)[(B,3)[a,c],b],d]"

    def test_unary_node_rejected(self):
        with pytest.raises(TreeError):
            EventTree(I(("a", "a"), [L("x")]))

    def test_duplicate_leaf_rejected(self):
        with pytest.raises(TreeError):
            EventTree(I(("a", "a"), [L("x"), L("x")]))

    def test_equality_is_ordered(self):
        t1 = EventTree(I(("1", "2"), [L("a"), L("b")]))
        t2 = EventTree(I(("1", "2"), [L("b"), L("a")]))
        assert t1 != t2 and t1 == EventTree(I(("1", "2"), [L("a"), L("b")]))

    def test_deep_caterpillar(self):
        node = L("v0")
        for k in range(1, 3000):
            node = I(("a", "b"), [node, L(f"v{k}")])
        T = EventTree(node)
        assert len(T.leaf_names()) == 3000
        assert len(normalize(T).inner_nodes()) == 1


class TestNormalize:
    def test_orientation(self):
        T = EventTree(I(("2", "1"), [L("a"), L("b")]))
        assert summarize(normalize(T)) == "(1,2)[b,a]"

    def test_merges_equal_labels(self):
        T = EventTree(I(("1", "1"), [I(("1", "1"), [L("c"), L("a")]), L("b")]))
        assert summarize(normalize(T)) == "(1,1)[a,b,c]"

    def test_merges_reversed_order_nodes(self):
        T = EventTree(I(("1", "2"), [L("a"), I(("2", "1"), [L("c"), L("b")])]))
        assert summarize(normalize(T)) == "(1,2)[a,b,c]"

    def test_keeps_distinct_labels(self):
        assert normalize(four_label_tree()) != four_label_tree()
        assert summarize(normalize(four_label_tree())) == "(1,2)[(1,B)[b,(3,B)[c,a]],d]"

    @PROPERTY_SETTINGS
    @given(event_trees())
    def test_idempotent_and_faithful(self, T):
        N = normalize(T)
        assert normalize(N) == N
        assert evaluate_tree(N) == evaluate_tree(T)


class TestIsomorphism:
    def test_reordered_symmetric_children(self):
        t1 = EventTree(I(("0", "0"), [L("a"), I(("1", "2"), [L("b"), L("c")])]))
        t2 = EventTree(I(("0", "0"), [I(("2", "1"), [L("c"), L("b")]), L("a")]))
        assert trees_isomorphic(t1, t2)

    def test_order_matters_on_linear_nodes(self):
        t1 = EventTree(I(("1", "2"), [L("a"), L("b")]))
        t2 = EventTree(I(("1", "2"), [L("b"), L("a")]))
        assert not trees_isomorphic(t1, t2)

    def test_leaf_mismatch(self):
        with pytest.raises(TreeError):
            trees_isomorphic(EventTree(L("a")), EventTree(L("b")))


class TestEvaluate:
    def test_four_label_values(self):
        g = four_label_unp()
        assert (g.phi("a", "c"), g.phi("c", "a")) == ("B", "3")
        assert (g.phi("a", "b"), g.phi("b", "a")) == ("B", "1")
        assert (g.phi("c", "d"), g.phi("d", "c")) == ("1", "2")

    def test_triple_label_sets(self):
        g = four_label_unp()
        ix = g.index
        assert g.triple_sets(ix("a"), ix("b"), ix("c")) == {frozenset("B1"), frozenset("B3")}
        assert g.triple_sets(ix("a"), ix("c"), ix("d")) == {frozenset("B3"), frozenset("12")}

    def test_vertex_mismatch(self):
        with pytest.raises(TreeError):
            evaluate_tree(four_label_tree(), vertices="abc")

    def test_extra_alphabet(self):
        g = evaluate_tree(EventTree(I(("x", "y"), [L("p"), L("q")])), alphabet=["z"])
        assert g.alphabet == ("x", "y", "z")


class TestRecognition:
    def test_four_label_accepted(self):
        g = four_label_unp()
        rec = recognize_unp(g)
        assert rec.accepted and bool(rec)
        assert build_tree_representation(g, rec) == normalize(four_label_tree())

    def test_nonreversible_accepted(self):
        g = nonreversible_unp()
        rec = recognize_unp(g)
        assert clusters_as_names(rec.clusters.with_singletons(), g.vertices) == {
            frozenset(s) for s in ["abcd", "abc", "ac", "a", "b", "c", "d"]
        }
        T = build_tree_representation(g)
        assert T == normalize(nonreversible_tree())
        Trev = build_tree_representation(rec.rev)
        assert summarize(T).count("[") == summarize(Trev).count("[")
        assert T.leaf_names() == Trev.leaf_names()

    def test_overlap_example(self):
        g = overlap_example()
        fast = recognize_unp(g)
        assert fast.certificate.kind == LABEL_BOUND
        assert fast.certificate.count == 8 and fast.certificate.bound == 6
        full = recognize_unp(g, early_exit=False)
        assert full.certificate.kind == OVERLAP
        assert clusters_as_names(full.certificate.clusters, g.vertices) == {frozenset("ab"), frozenset("bc")}

    def test_distinct_triangle_root_missing(self):
        rec = recognize_unp(distinct_triangle())
        assert rec.certificate.kind == ROOT_MISSING

    def test_non_dicograph_witness(self):
        rng = random.Random(5)
        seen = 0
        for _ in range(300):
            g = random_structure(6, 2, rng)
            rec = recognize_unp(g, early_exit=False)
            if rec.certificate is not None and rec.certificate.kind == NON_DICOGRAPH:
                seen += 1
                G = monochromatic_subgraphs(rec.rev)[rec.certificate.label]
                assert oracle.is_prime(G.induced(rec.certificate.witness))
        assert seen > 0

    def test_single_vertex(self):
        g = TwoStructure.from_tokens(["z"], [[None]])
        assert is_unp(g)
        assert build_tree_representation(g) == EventTree(L("z"))

    def test_two_vertices(self):
        g = TwoStructure.from_pairs("ab", {("a", "b"): "x", ("b", "a"): "y"})
        assert summarize(build_tree_representation(g)) == "(x,y)[a,b]"

    def test_reject_raises_on_build(self):
        with pytest.raises(NotUnpError) as info:
            build_tree_representation(distinct_triangle())
        assert info.value.certificate.kind == ROOT_MISSING

    def test_workers_agree(self):
        for seed in range(20):
            _, g = generate(GenSpec(leaves=24, labels=4, seed=seed, perturb=0.02 * (seed % 3)))
            a, b = recognize_unp(g), recognize_unp(g, workers=4)
            assert a.accepted == b.accepted
            assert a.certificate == b.certificate

    @PROPERTY_SETTINGS
    @given(structures(min_n=1, max_n=5, max_labels=4))
    def test_matches_oracles(self, g):
        expected = oracle.unp_small(g)
        assert is_unp(g) == expected
        assert oracle.symbolic_ultrametric(g) == expected
        assert is_unp(reversible_refinement(g)) == expected
        full = recognize_unp(g, early_exit=False)
        assert full.accepted == expected

    @PROPERTY_SETTINGS
    @given(structures(min_n=3, max_n=6, max_labels=4))
    def test_certificates_are_sound(self, g):
        rec = recognize_unp(g, early_exit=False)
        if rec.accepted:
            return
        cert = rec.certificate
        assert cert.kind in (NON_DICOGRAPH, OVERLAP, ROOT_MISSING)
        if cert.kind == NON_DICOGRAPH:
            assert len(cert.witness) in (3, 4)
            assert not oracle.unp_small(g.substructure(cert.witness))
        elif cert.kind == OVERLAP:
            a, b = cert.clusters
            assert a & b and a & ~b and b & ~a
            assert a in rec.clusters.clusters and b in rec.clusters.clusters
        assert not oracle.unp_small(g)

    @PROPERTY_SETTINGS
    @given(structures(min_n=3, max_n=6, max_labels=4))
    def test_early_exits_are_rejections(self, g):
        rec = recognize_unp(g)
        if rec.certificate is not None and rec.certificate.kind in (LABEL_BOUND, CLUSTER_BOUND):
            assert rec.certificate.count > rec.certificate.bound
            assert not oracle.unp_small(g)


class TestRoundTrip:
    @PROPERTY_SETTINGS
    @given(event_trees(max_leaves=20))
    def test_rebuild(self, T):
        g = evaluate_tree(T)
        rec = recognize_unp(g)
        assert rec.accepted
        R = build_tree_representation(g, rec)
        assert R == normalize(T)
        assert evaluate_tree(R, vertices=g.vertices, alphabet=g.alphabet) == g
        assert len(rec.clusters.with_singletons()) <= 2 * g.n - 1
        assert max(rec.clusters.multiplicities().values(), default=0) <= 2

    @PROPERTY_SETTINGS
    @given(event_trees(max_leaves=12))
    def test_refinement_tree_has_same_shape(self, T):
        g = evaluate_tree(T)
        rec = recognize_unp(g)
        R1 = build_tree_representation(g, rec)
        R2 = build_tree_representation(rec.rev)
        assert leaf_sets(R1) == leaf_sets(R2)

    def test_strong_modules_are_clusters(self):
        for seed in range(30):
            T, g = generate(GenSpec(leaves=7, labels=3, seed=seed))
            rec = recognize_unp(g)
            found = {frozenset(bits_to_list(c)) for c in rec.clusters.with_singletons()}
            assert found == oracle.strong_modules_bruteforce(g)

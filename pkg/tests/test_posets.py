import random

import pytest

from refmon.errors import NotMaximal, UnknownElement
from refmon.posets import ChainTree, Poset, all_posets, posets_up_to_iso


def two_chain():
    return Poset.from_relations(["q", "p"], [("q", "p")])


def diamond():
    return Poset.from_relations(["b", "x", "y", "t"],
                                [("b", "x"), ("b", "y"), ("x", "t"), ("y", "t")])


def figure_poset():
    """The 11-element poset from the worked surgery example."""
    ids = ["*", "1", "2", "11", "b", "22", "111", "g", "m", "221", "222"]
    covers = [("1", "*"), ("2", "*"),
              ("11", "1"), ("b", "1"), ("b", "2"), ("22", "2"),
              ("111", "11"), ("g", "11"), ("g", "b"), ("m", "b"),
              ("221", "22"), ("222", "22")]
    return Poset.from_relations(ids, covers)


def test_two_chain_basics():
    p = two_chain()
    assert p.leq("q", "p") and not p.leq("p", "q")
    assert p.members(p.down_of("p")) == ["q", "p"]
    assert p.members(p.max_mask(p.down_of("p"))) == ["p"]


def test_antichain_lower_sets():
    p = Poset.antichain(["x", "y"])
    assert len(p.lower_sets()) == 4


def test_cycle_rejected():
    with pytest.raises(ValueError):
        Poset.from_relations(["a", "b"], [("a", "b"), ("b", "a")])


def test_unknown_element():
    p = two_chain()
    with pytest.raises(UnknownElement):
        p.idx("zz")
    with pytest.raises(UnknownElement):
        Poset.from_relations(["a"], [("a", "b")])


def test_figure_lower_covers():
    p = figure_poset()
    assert p.lower_covers("*") == {"1", "2"}
    assert p.lower_covers("11") == {"111", "g"}
    assert p.lower_covers("b") == {"g", "m"}


def test_chain_up_property():
    assert Poset.from_relations(["a", "b", "c"],
                                [("a", "b"), ("b", "c")]).chain_up_property()
    assert not diamond().chain_up_property()


def test_lower_sets_count_equals_antichains():
    rng = random.Random(21)
    for _ in range(40):
        n = rng.randrange(0, 7)
        ids = list(range(n))
        pairs = [(i, j) for i in ids for j in ids
                 if i < j and rng.random() < 0.4]
        p = Poset.from_relations(ids, pairs)
        assert len(p.lower_sets()) == p.antichains_count()
        # closed under union and intersection
        ls = set(p.lower_sets())
        some = list(ls)[:12]
        for a in some:
            for b in some:
                assert (a | b) in ls and (a & b) in ls


def test_chain_tree_chain():
    p = two_chain()
    ct = ChainTree(p, "p")
    assert set(ct.tree.ids) == {("p",), ("p", "q")}
    assert ct.check_properties() == []


def test_chain_tree_diamond():
    # enumerate saturated chains by hand: t; t,x; t,y; t,x,b; t,y,b
    ct = ChainTree(diamond(), "t")
    assert len(ct.tree.ids) == 5
    assert set(ct.tree.ids) == {("t",), ("t", "x"), ("t", "y"),
                                ("t", "x", "b"), ("t", "y", "b")}
    assert ct.check_properties() == []
    assert ct.tree.chain_up_property()


def test_chain_tree_figure_has_15_nodes():
    ct = ChainTree(figure_poset(), "*")
    assert len(ct.tree.ids) == 15
    assert ct.check_properties() == []


def test_chain_tree_not_maximal():
    with pytest.raises(NotMaximal):
        ChainTree(diamond(), "x")


def test_chain_tree_random_posets():
    rng = random.Random(3)
    for _ in range(25):
        n = rng.randrange(1, 8)
        ids = list(range(n))
        pairs = [(i, j) for i in ids for j in ids
                 if i < j and rng.random() < 0.35]
        p = Poset.from_relations(ids, pairs)
        for k in p.maximal_elements():
            ct = ChainTree(p, k)
            assert ct.check_properties() == []
            assert ct.tree.chain_up_property()


def test_find_isomorphism():
    p = diamond()
    q = Poset.from_relations([0, 1, 2, 3],
                             [(3, 1), (3, 2), (1, 0), (2, 0)])
    iso = p.find_isomorphism(q)
    assert iso is not None
    assert iso["b"] == 3 and iso["t"] == 0
    assert p.find_isomorphism(two_chain()) is None


def test_restricted_and_union():
    p = figure_poset()
    sub = p.restricted(p.down_of("11"))
    assert set(sub.ids) == {"11", "111", "g"}
    u = Poset.disjoint_union([two_chain(), two_chain()])
    assert u.n == 4
    assert u.leq((0, "q"), (0, "p")) and not u.leq((0, "q"), (1, "p"))


def test_all_posets_counts():
    # known counts of labeled posets on n points: 1, 1, 3, 19, 219
    assert len(all_posets(0)) == 1
    assert len(all_posets(1)) == 1
    assert len(all_posets(2)) == 3
    assert len(all_posets(3)) == 19
    assert len(all_posets(4)) == 219
    # and unlabeled: 1, 1, 2, 5, 16
    assert len(posets_up_to_iso(2)) == 2
    assert len(posets_up_to_iso(3)) == 5
    assert len(posets_up_to_iso(4)) == 16

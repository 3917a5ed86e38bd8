import random

from refmon import fixtures
from refmon.monoid import Monoid
from refmon.sampling import random_element, random_system
from refmon.surgery import collapse_sequence, maximal_decomposition, verify_pushout


def test_collapse_chain_is_trivial():
    trace = collapse_sequence(fixtures.mixed_two_chain(), "j")
    assert trace.steps == []
    assert trace.initial.n == 2
    assert trace.final_isomorphic_to_target()


def test_collapse_diamond_single_step():
    # the chain tree of a diamond has 5 nodes with one duplicated bottom;
    # one merge of the two singleton copies recovers the diamond
    trace = collapse_sequence(fixtures.diamond_mixed(), "top")
    assert trace.initial.n == 5
    assert len(trace.steps) == 1
    assert trace.final.n == 4
    assert trace.final_isomorphic_to_target()


def test_collapse_figure_tree():
    trace = collapse_sequence(fixtures.figure_tree(), "*")
    assert trace.initial.n == 15
    assert trace.final.n == 11
    assert trace.final_isomorphic_to_target()
    assert trace.initial.poset.chain_up_property()
    for step in trace.steps:
        assert step.after.validate() == []


def test_verify_pushout_reports_clean():
    trace = collapse_sequence(fixtures.figure_tree(), "*")
    for i, step in enumerate(trace.steps):
        rep = verify_pushout(step, samples=40, seed=i)
        assert rep["failures"] == []
        assert rep["checks"] == 3 * 40


def test_composite_projection_matches_tree_map():
    from refmon.posets import ChainTree
    s = fixtures.figure_tree()
    trace = collapse_sequence(s, "*")
    want = ChainTree(s.poset, "*").vertex_map()
    comp = trace.composite_vertex_map()
    onto = trace.onto_target
    for node, img in comp.items():
        assert onto[img] == want[node]


def test_maximal_decomposition_single_max_empty():
    trace = maximal_decomposition(fixtures.figure_tree())
    assert trace.steps == []
    assert trace.final_isomorphic_to_target()


def test_maximal_decomposition_vee():
    trace = maximal_decomposition(fixtures.vee())
    assert trace.initial.n == 4  # two copies of the shared bottom
    assert len(trace.steps) == 1
    assert trace.final.n == 3
    assert trace.final_isomorphic_to_target()
    rep = verify_pushout(trace.steps[0], samples=50, seed=0)
    assert rep["failures"] == []


def test_crown_projection_equalizes_in_monoid():
    trace = maximal_decomposition(fixtures.vee())
    step = trace.steps[0]
    mb = Monoid(step.before)
    ma = Monoid(step.after)
    rng = random.Random(4)
    sub = step.before.restrict(step.pair.i1)
    msub = Monoid(sub)
    for _ in range(25):
        x = random_element(msub, rng)
        coords = x.coords()
        e1 = mb.element(list(coords), coords)
        renamed = {step.pair.iso[k]: v for k, v in coords.items()}
        e2 = mb.element(list(renamed), renamed)
        assert ma.eq(mb.map_elem(step.proj, e1, ma),
                     mb.map_elem(step.proj, e2, ma))


def test_surgery_random_systems():
    rng = random.Random(77)
    for _ in range(8):
        s = random_system(rng, max_n=5)
        for k in s.poset.maximal_elements():
            trace = collapse_sequence(s, k)
            assert trace.final_isomorphic_to_target()
            assert trace.initial.poset.chain_up_property()
        trace = maximal_decomposition(s)
        assert trace.final_isomorphic_to_target()

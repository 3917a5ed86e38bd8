import random

from refmon import fixtures
from refmon.monoid import Monoid
from refmon.pierce import PierceMonoid
from refmon.posets import Poset, posets_up_to_iso
from refmon.sampling import random_system


def enumerate_trivial_elements(monoid, level):
    """All elements with unit multiplicities <= level, trivial groups."""
    out = []
    p = monoid.system.poset
    for mask in p.lower_sets():
        data = monoid.support_data(mask)
        slots = [i for i in data.idxs
                 if monoid.system.is_free[i] and (data.max_mask >> i) & 1]
        combos = [[]]
        for _ in slots:
            combos = [c + [n] for c in combos for n in range(1, level + 1)]
        for combo in combos:
            vec = [0] * data.total
            for i, n in zip(slots, combo):
                vec[data.offset[i]] = n
            out.append(monoid.make(mask, vec))
    return out


def oracle(system):
    return PierceMonoid(system.poset,
                        [x for x in system.poset.ids
                         if system.kind(x) == "free"])


def check_agreement(system, level=3):
    m = Monoid(system)
    pm = oracle(system)
    elems = enumerate_trivial_elements(m, level)
    shadows = [pm.from_monelem(e) for e in elems]
    for a, sa in zip(elems, shadows):
        for b, sb in zip(elems, shadows):
            assert m.eq(a, b) == pm.eq(sa, sb)
            got = m.add(a, b)
            assert pm.from_monelem(got) == pm.add(sa, sb)
            assert (m.leq(a, b) is not None) == pm.leq(sa, sb)


def test_pierce_two_chain_agreement():
    check_agreement(fixtures.pierce_two_chain())


def test_figure_small_restriction_agreement():
    s = fixtures.figure_tree()
    sub = s.restrict(s.poset.down_of("1"))
    check_agreement(sub, level=2)


def test_all_posets_up_to_3_all_kind_maps():
    for p in posets_up_to_iso(3):
        n = p.n
        for bits in range(1 << n):
            kinds = {x: ("free" if (bits >> i) & 1 else "reg")
                     for i, x in enumerate(p.ids)}
            s = random_system(random.Random(0), poset=p, kinds=kinds,
                              trivial_groups=True)
            check_agreement(s, level=2)


def test_random_trivial_group_systems():
    rng = random.Random(123)
    for _ in range(6):
        s = random_system(rng, max_n=5, trivial_groups=True)
        check_agreement(s, level=2)

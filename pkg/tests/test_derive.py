import pytest

from refmon import fixtures
from refmon.monoid import Monoid


def test_derive_pierce_two_chain():
    m = Monoid(fixtures.pierce_two_chain())
    derived, nats, reps = m.derive_system()
    assert derived.poset.leq("q", "p")
    assert not derived.poset.leq("p", "q")
    assert derived.kind("q") == "free" and derived.kind("p") == "free"
    assert all(derived.group(x).is_trivial for x in derived.poset.ids)
    assert m.roundtrip_check()


def test_derive_mixed_two_chain():
    m = Monoid(fixtures.mixed_two_chain())
    derived, nats, reps = m.derive_system()
    assert derived.kind("i") == "reg" and derived.kind("j") == "free"
    assert derived.group("i").torsion == (2,)
    assert derived.group("j").torsion == (2,)
    assert m.roundtrip_check()


def test_derive_group_point():
    m = Monoid(fixtures.group_point())
    derived, _, _ = m.derive_system()
    assert derived.kind("o") == "reg"
    assert derived.group("o").rank == 1 and not derived.group("o").torsion
    assert m.roundtrip_check()


@pytest.mark.parametrize("name", sorted(fixtures.builders))
def test_roundtrip_all_fixtures(name):
    m = Monoid(fixtures.builders[name]())
    assert m.roundtrip_check(), name

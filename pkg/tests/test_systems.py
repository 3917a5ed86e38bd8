import json

import pytest

from refmon import fixtures
from refmon.errors import (
    BadProjection,
    InvalidPair,
    InvalidSystem,
    NotLowerSet,
    ParseError,
)
from refmon.groups import FgGroup, GroupHom
from refmon.posets import ChainTree, Poset
from refmon.systems import (
    CompatiblePair,
    System,
    SystemHom,
    c2_decompose,
    parse_system,
    serialize_system,
    system_to_dict,
)

TRIV = FgGroup()
Z2 = FgGroup(0, (2,))


def test_fixture_validation():
    for name, build in fixtures.builders.items():
        s = build()
        assert s.validate() == [], name


def test_c2_violation_zero_map():
    # same shape as mixed_two_chain but with the zero connecting map
    poset = Poset.from_relations(["i", "j"], [("i", "j")])
    maps = {("i", "j"): GroupHom(Z2, Z2, [[0]])}
    with pytest.raises(InvalidSystem) as exc:
        System.assemble(poset, {"i": "reg", "j": "free"},
                        {"i": Z2, "j": Z2}, maps)
    assert any("(c2)" in v and "'j'" in v for v in exc.value.violations)


def test_c2_violation_minimal_free():
    poset = Poset.from_relations(["x"], [])
    with pytest.raises(InvalidSystem) as exc:
        System.assemble(poset, {"x": "free"}, {"x": Z2}, {})
    assert any("minimal free" in v for v in exc.value.violations)


def test_c1_violation_reported():
    # diamond with inconsistent translations (see diamond_mixed docstring)
    poset = Poset.from_relations(
        ["bot", "mf", "mr", "top"],
        [("bot", "mf"), ("bot", "mr"), ("mf", "top"), ("mr", "top")])
    maps = {("bot", "mf"): GroupHom(TRIV, TRIV, [], c=()),
            ("bot", "mr"): GroupHom(TRIV, Z2, [[]], c=(1,)),
            ("mf", "top"): GroupHom(TRIV, Z2, [[]], c=(1,)),
            ("mr", "top"): GroupHom(Z2, Z2, [[1]])}
    with pytest.raises(InvalidSystem) as exc:
        System.assemble(poset,
                        {"bot": "free", "mf": "free", "mr": "reg",
                         "top": "free"},
                        {"bot": TRIV, "mf": TRIV, "mr": Z2, "top": Z2}, maps)
    assert any("(c1)" in v for v in exc.value.violations)


def test_explicit_noncover_map_crosschecked():
    # a wrong explicit composite on the long pair must be rejected
    poset = Poset.from_relations(["a", "b", "c"], [("a", "b"), ("b", "c")])
    good = {("a", "b"): GroupHom(TRIV, TRIV, [], c=()),
            ("b", "c"): GroupHom(TRIV, Z2, [[]], c=(1,))}
    sys_ok = System.assemble(poset, {"a": "free", "b": "free", "c": "free"},
                             {"a": TRIV, "b": TRIV, "c": Z2}, dict(good))
    assert sys_ok.map("a", "c").c == (0,)
    bad = dict(good)
    bad[("a", "c")] = GroupHom(TRIV, Z2, [[]], c=(1,))
    with pytest.raises(InvalidSystem) as exc:
        System.assemble(poset, {"a": "free", "b": "free", "c": "free"},
                        {"a": TRIV, "b": TRIV, "c": Z2}, bad)
    assert any("(c1)" in v for v in exc.value.violations)


def test_restrict_examples():
    sysb = fixtures.mixed_two_chain()
    empty = sysb.restrict([])
    assert empty.n == 0
    only_i = sysb.restrict(["i"])
    assert only_i.n == 1 and only_i.kind("i") == "reg"
    assert only_i.group("i") == Z2
    with pytest.raises(NotLowerSet):
        sysb.restrict(["j"])
    sysd = fixtures.figure_tree()
    down11 = sysd.restrict(sysd.poset.down_of("11"))
    # computed down-set of "11" in the figure: {11, 111, g}
    assert down11.n == 3
    assert down11.validate() == []


def test_restrict_always_valid():
    for name, build in fixtures.builders.items():
        s = build()
        for mask in s.poset.lower_sets():
            assert s.restrict(mask).validate() == [], name


def test_antisymmetrize():
    t, hom = fixtures.mixed_two_chain().antisymmetrized()
    assert all(t.group(x).is_trivial for x in t.poset.ids)
    assert t.kind("i") == "reg" and t.kind("j") == "free"
    t2, _ = fixtures.group_point().antisymmetrized()
    assert t2.group("o").is_trivial
    triv, _ = fixtures.pierce_two_chain().antisymmetrized()
    assert triv == fixtures.pierce_two_chain()


def test_pullback_identity():
    s = fixtures.mixed_two_chain()
    pulled, hom = System.pullback(s, {x: x for x in s.poset.ids}, s.poset)
    assert pulled == s


def test_pullback_chain_tree():
    s = fixtures.figure_tree()
    ct = ChainTree(s.poset, "*")
    base = s.restrict(s.poset.down_of("*"))
    pulled, hom = System.pullback(base, ct.vertex_map(), ct.tree)
    assert pulled.n == 15
    assert pulled.validate() == []
    assert hom.check() == []


def test_pullback_bad_projection():
    s = fixtures.pierce_two_chain()
    # collapse both points onto one: not strictly order-preserving
    single = s.restrict(["q"])
    with pytest.raises(BadProjection):
        System.pullback(single, {"q": "q", "p": "q"}, s.poset)


def test_pullback_non_cover_bijective():
    # target chain a < b; source: chain of length 3 mapping the middle twice
    tgt_poset = Poset.from_relations(["a", "b"], [("a", "b")])
    tgt = System.assemble(tgt_poset, {"a": "free", "b": "free"},
                          {"a": TRIV, "b": TRIV},
                          {("a", "b"): GroupHom(TRIV, TRIV, [], c=())})
    src = Poset.from_relations(["x", "y", "z"], [("x", "y"), ("y", "z")])
    with pytest.raises(BadProjection):
        System.pullback(tgt, {"x": "a", "y": "a", "z": "b"}, src)


def doubled(system):
    """Disjoint union of two copies of a system."""
    p = Poset.disjoint_union([system.poset, system.poset])
    kinds = {}
    groups = {}
    maps = {}
    for tag in (0, 1):
        for x in system.poset.ids:
            kinds[(tag, x)] = system.kind(x)
            groups[(tag, x)] = system.group(x)
        for (i, j), hom in system.maps.items():
            a, b = system.poset.ids[i], system.poset.ids[j]
            maps[((tag, a), (tag, b))] = hom
    return System.assemble(p, kinds, groups, maps)


def test_crown_identity_pair():
    s = fixtures.mixed_two_chain()
    pair = CompatiblePair(s, 0, 0, {})
    crowned, proj = s.crown(pair)
    assert crowned == s


def test_crown_doubled_chain():
    s2 = doubled(fixtures.pierce_two_chain())
    iso = {(0, "q"): (1, "q"), (0, "p"): (1, "p")}
    pair = CompatiblePair(s2, [(0, "q"), (0, "p")], [(1, "q"), (1, "p")], iso)
    crowned, proj = s2.crown(pair)
    assert crowned.n == 2
    assert crowned.validate() == []
    assert proj.check() == []
    # result is a single two-chain again
    assert crowned.poset.find_isomorphism(
        fixtures.pierce_two_chain().poset) is not None


def test_crown_invalid_pair():
    s2 = doubled(fixtures.mixed_two_chain())
    with pytest.raises(InvalidPair):
        # not disjoint
        CompatiblePair(s2, [(0, "i")], [(0, "i")], {(0, "i"): (0, "i")})
    with pytest.raises(InvalidPair):
        # kind-breaking pairing
        CompatiblePair(s2, [(0, "i")], [(1, "i")], {(0, "i"): (1, "j")})


def test_c2_decompose_examples():
    sysb = fixtures.mixed_two_chain()
    j = sysb.poset.idx("j")
    got = c2_decompose(sysb, j, (1,))
    assert got == [("i", (1,))]
    assert c2_decompose(sysb, j, (0,)) == []
    # the vee-from-below example: phi from two minimal free points with
    # translations +1 and -1 into Z
    poset = Poset.from_relations(["i", "k", "j"], [("i", "j"), ("k", "j")])
    Zg = FgGroup(1)
    maps = {("i", "j"): GroupHom(TRIV, Zg, [[]], c=(1,)),
            ("k", "j"): GroupHom(TRIV, Zg, [[]], c=(-1,))}
    s = System.assemble(poset, {"i": "free", "k": "free", "j": "free"},
                        {"i": TRIV, "k": TRIV, "j": Zg}, maps)
    got = s, c2_decompose(s, s.poset.idx("j"), (-2,))
    parts = got[1]
    assert parts is not None
    total = 0
    for k_id, val in parts:
        n, _ = val
        assert n >= 1
        total += n * (1 if k_id == "i" else -1)
    assert total == -2


def test_serialize_parse_roundtrip_canonical():
    for name, build in fixtures.builders.items():
        s = build()
        text = serialize_system(s)
        again = parse_system(text)
        assert serialize_system(again) == text, name


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_system("{not json")
    with pytest.raises(ParseError):
        parse_system(json.dumps({"elements": [{"id": "a", "kind": "reg"}],
                                 "order": [["a", "zz"]]}))


def test_system_hom_identity_and_compose():
    s = fixtures.mixed_two_chain()
    ident = SystemHom.identity(s)
    assert ident.check() == []
    twice = ident.compose_with(ident)
    assert twice.vertex == ident.vertex

"""Shipped example systems.

Ten small systems used throughout the test and property suites.  They are
stored as JSON under data/ and validated on load; `builders` reconstructs
each one in code so the shipped files themselves are covered by a
round-trip test.
"""

from importlib import resources

from .groups import FgGroup, GroupHom
from .posets import Poset
from .systems import System, parse_system, serialize_system

TRIV = FgGroup()
Z = FgGroup(1)
Z2 = FgGroup(0, (2,))
Z3 = FgGroup(0, (3,))
Z4 = FgGroup(0, (4,))


def pierce_two_chain():
    """q < p, both free, trivial groups: the smallest primitive example."""
    poset = Poset.from_relations(["q", "p"], [("q", "p")])
    maps = {("q", "p"): GroupHom(TRIV, TRIV, [], c=())}
    return System.assemble(poset, {"q": "free", "p": "free"},
                           {"q": TRIV, "p": TRIV}, maps)


def mixed_two_chain():
    """i regular with Z/2 under j free with Z/2, identity connecting map."""
    poset = Poset.from_relations(["i", "j"], [("i", "j")])
    maps = {("i", "j"): GroupHom(Z2, Z2, [[1]])}
    return System.assemble(poset, {"i": "reg", "j": "free"},
                           {"i": Z2, "j": Z2}, maps)


def group_point():
    """A single regular point carrying Z."""
    poset = Poset.from_relations(["o"], [])
    return System.assemble(poset, {"o": "reg"}, {"o": Z}, {})


def figure_tree():
    """The 11-element all-free trivial-group system of the surgery example."""
    ids = ["*", "1", "2", "11", "b", "22", "111", "g", "m", "221", "222"]
    covers = [("1", "*"), ("2", "*"),
              ("11", "1"), ("b", "1"), ("b", "2"), ("22", "2"),
              ("111", "11"), ("g", "11"), ("g", "b"), ("m", "b"),
              ("221", "22"), ("222", "22")]
    poset = Poset.from_relations(ids, covers)
    kinds = {x: "free" for x in ids}
    groups = {x: TRIV for x in ids}
    maps = {pair: GroupHom(TRIV, TRIV, [], c=()) for pair in covers}
    return System.assemble(poset, kinds, groups, maps)


def free_point():
    poset = Poset.from_relations(["u"], [])
    return System.assemble(poset, {"u": "free"}, {"u": TRIV}, {})


def regular_chain():
    """Z/2 < Z/4 via doubling, both regular."""
    poset = Poset.from_relations(["lo", "hi"], [("lo", "hi")])
    maps = {("lo", "hi"): GroupHom(Z2, Z4, [[2]])}
    return System.assemble(poset, {"lo": "reg", "hi": "reg"},
                           {"lo": Z2, "hi": Z4}, maps)


def free_over_free():
    """Trivial free q under free p with Z/3 hit by the unit of q."""
    poset = Poset.from_relations(["q", "p"], [("q", "p")])
    maps = {("q", "p"): GroupHom(TRIV, Z3, [[]], c=(1,))}
    return System.assemble(poset, {"q": "free", "p": "free"},
                           {"q": TRIV, "p": Z3}, maps)


def vee():
    """Two regular maxima (Z/2 and Z/3) over one free trivial bottom."""
    poset = Poset.from_relations(["w", "l", "r"], [("w", "l"), ("w", "r")])
    maps = {("w", "l"): GroupHom(TRIV, Z2, [[]], c=(1,)),
            ("w", "r"): GroupHom(TRIV, Z3, [[]], c=(1,))}
    return System.assemble(poset, {"w": "free", "l": "reg", "r": "reg"},
                           {"w": TRIV, "l": Z2, "r": Z3}, maps)


def diamond_mixed():
    """Diamond with a free and a regular middle; Z/2 groups on the right.

    The bot->mr unit must map to 0: any composite through the trivial free
    middle kills it, so functoriality forces the zero translation.
    """
    poset = Poset.from_relations(
        ["bot", "mf", "mr", "top"],
        [("bot", "mf"), ("bot", "mr"), ("mf", "top"), ("mr", "top")])
    maps = {("bot", "mf"): GroupHom(TRIV, TRIV, [], c=()),
            ("bot", "mr"): GroupHom(TRIV, Z2, [[]], c=(0,)),
            ("mf", "top"): GroupHom(TRIV, Z2, [[]], c=(1,)),
            ("mr", "top"): GroupHom(Z2, Z2, [[1]])}
    return System.assemble(
        poset,
        {"bot": "free", "mf": "free", "mr": "reg", "top": "free"},
        {"bot": TRIV, "mf": TRIV, "mr": Z2, "top": Z2}, maps)


def rank_one_tower():
    """Regular Z below a free Z, connected by the identity."""
    poset = Poset.from_relations(["q", "p"], [("q", "p")])
    maps = {("q", "p"): GroupHom(Z, Z, [[1]])}
    return System.assemble(poset, {"q": "reg", "p": "free"},
                           {"q": Z, "p": Z}, maps)


builders = {
    "pierce_two_chain": pierce_two_chain,
    "mixed_two_chain": mixed_two_chain,
    "group_point": group_point,
    "figure_tree": figure_tree,
    "free_point": free_point,
    "regular_chain": regular_chain,
    "free_over_free": free_over_free,
    "vee": vee,
    "diamond_mixed": diamond_mixed,
    "rank_one_tower": rank_one_tower,
}


def fixture_names():
    return sorted(builders)


def load(name):
    """Load a shipped fixture from its JSON file, validating it."""
    text = resources.files("refmon").joinpath(f"data/{name}.json").read_text()
    return parse_system(text)


def all_fixtures():
    return {name: load(name) for name in fixture_names()}


def regenerate(directory):
    """Rewrite the shipped JSON files from the builders (dev helper)."""
    import pathlib
    d = pathlib.Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, build in builders.items():
        (d / f"{name}.json").write_text(serialize_system(build()))

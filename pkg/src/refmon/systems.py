"""Group-labeled poset systems and their structure-preserving maps.

A system is a finite poset with a free/regular tag per element, an abelian
group G_i per element, and for every comparable pair i < j a semigroup
homomorphism out of M_i into G_j, where M_i is G_i at a regular index and
N x G_i at a free one.  Two laws are enforced:

  (c1) the induced maps on Grothendieck groups compose functorially;
  (c2) at each free index, the images from strictly below generate the whole
       group as a semigroup (with the empty sum supplying zero).

Constructors validate eagerly: you either get a valid system or an
InvalidSystem carrying the violation report.
"""

import json

from . import intlin
from .errors import (
    BadProjection,
    InvalidPair,
    InvalidSystem,
    ParseError,
    UnknownElement,
)
from .groups import FgGroup, GroupHom, compose
from .intlin import free_c, zero_or_ge1_c
from .posets import Poset, id_sort_key

FREE = "free"
REG = "reg"

C2_BUDGET = 200_000


class System:
    __slots__ = ("poset", "is_free", "groups", "maps", "_hatdims")

    def __init__(self, poset, is_free, groups, maps):
        self.poset = poset
        self.is_free = tuple(is_free)
        self.groups = tuple(groups)
        self.maps = dict(maps)
        self._hatdims = tuple(g.dim + (1 if f else 0)
                              for g, f in zip(self.groups, self.is_free))

    # -- assembly -----------------------------------------------------------

    @classmethod
    def assemble(cls, poset, kinds, groups, maps, *, require_valid=True,
                 budget=C2_BUDGET):
        """Build from per-id data; maps may be given on covers only.

        `maps` is {(below_id, above_id): GroupHom}; missing comparable pairs
        are filled with composites along saturated chains, and any supplied
        non-cover map is cross-checked during validation.
        """
        is_free = []
        gs = []
        violations = []
        for x in poset.ids:
            kind = kinds.get(x)
            if kind not in (FREE, REG):
                violations.append(f"element {x!r}: kind must be free or reg")
                kind = REG
            is_free.append(kind == FREE)
            g = groups.get(x)
            if not isinstance(g, FgGroup):
                violations.append(f"element {x!r}: missing group")
                g = FgGroup()
            gs.append(g)
        idx_maps = {}
        for (lo, hi), hom in maps.items():
            i, j = poset.idx(lo), poset.idx(hi)
            if not (i != j and (poset.down[j] >> i) & 1):
                violations.append(f"map {lo!r}->{hi!r}: ids are not comparable")
                continue
            idx_maps[(i, j)] = hom
        if violations:
            raise InvalidSystem(violations)
        sys = cls(poset, is_free, gs, idx_maps)
        violations = sys._fill_composites() + sys.validate(budget=budget)
        if violations and require_valid:
            raise InvalidSystem(violations)
        return sys

    def _fill_composites(self):
        """Derive missing maps along saturated chains, shortest pairs first."""
        p = self.poset
        violations = []
        pairs = []
        for j in range(p.n):
            for i in p.iter_mask(p.down[j] & ~(1 << j)):
                # interval length orders derivation bottom-up
                size = bin(p.down[j] & p.up[i]).count("1")
                pairs.append((size, i, j))
        for size, i, j in sorted(pairs):
            if (i, j) in self.maps:
                continue
            mids = [m for m in p.iter_mask(p.covers_down[j])
                    if (p.down[m] >> i) & 1]
            if not mids:
                violations.append(
                    f"no map and no factorization for pair "
                    f"{p.ids[i]!r} < {p.ids[j]!r}")
                continue
            m = mids[0]
            lower = self.maps.get((i, m)) if i != m else None
            upper = self.maps.get((m, j))
            if upper is None or (i != m and lower is None):
                violations.append(
                    f"missing map on cover pair below {p.ids[j]!r}")
                continue
            self.maps[(i, j)] = upper if i == m else compose(upper, lower)
        return violations

    # -- accessors ----------------------------------------------------------

    @property
    def n(self):
        return self.poset.n

    def kind(self, x):
        return FREE if self.is_free[self.poset.idx(x)] else REG

    def group(self, x):
        return self.groups[self.poset.idx(x)]

    def map(self, lo, hi):
        return self.maps[(self.poset.idx(lo), self.poset.idx(hi))]

    def hat_dim(self, i):
        return self._hatdims[i]

    def hat_group(self, i):
        g = self.groups[i]
        if self.is_free[i]:
            return FgGroup(g.rank + 1, g.torsion)
        return g

    def hat_moduli(self, i):
        g = self.groups[i]
        if self.is_free[i]:
            return (0,) + g.moduli()
        return g.moduli()

    def hat_matrix(self, i, j):
        """The induced map on hat coordinates as a full integer matrix.

        Shape hat_dim(j) x hat_dim(i); for a free target the image sits in
        the group block, so the leading row is zero.
        """
        hom = self.maps[(i, j)]
        cols = []
        if self.is_free[i]:
            cols.append(list(hom.c))
        for col in range(self.groups[i].dim):
            cols.append([hom.h[r][col] for r in range(self.groups[j].dim)])
        rows = [[c[r] for c in cols] for r in range(self.groups[j].dim)]
        if self.is_free[j]:
            rows.insert(0, [0] * self.hat_dim(i))
        return rows

    def m_value_ok(self, i, val):
        """Is val a member of M_i?  (n >= 1 at a free index.)"""
        if self.is_free[i]:
            n, g = val
            return n >= 1 and len(g) == self.groups[i].dim
        return len(val) == self.groups[i].dim

    def apply_map(self, i, j, val):
        return self.maps[(i, j)].apply(val)

    # -- validation ---------------------------------------------------------

    def validate(self, budget=C2_BUDGET):
        """Full law check; returns a list of violations (empty when valid)."""
        p = self.poset
        out = []
        for (i, j), hom in self.maps.items():
            tag = f"map {p.ids[i]!r}->{p.ids[j]!r}"
            if hom.src != self.groups[i] or hom.dst != self.groups[j]:
                out.append(f"{tag}: group mismatch")
                continue
            if (hom.c is not None) != self.is_free[i]:
                out.append(f"{tag}: translation part must be present "
                           f"iff the source is free")
            out.extend(f"{tag}: {msg}" for msg in hom.validate())
        if out:
            return out
        # (c1): functoriality across every triple
        for k in range(p.n):
            below_k = list(p.iter_mask(p.down[k] & ~(1 << k)))
            for j in below_k:
                for i in below_k:
                    if i != j and (p.down[j] >> i) & 1:
                        direct = self.maps[(i, k)]
                        via = compose(self.maps[(j, k)], self.maps[(i, j)])
                        if direct != via:
                            out.append(
                                f"(c1) fails on {p.ids[i]!r} < {p.ids[j]!r} "
                                f"< {p.ids[k]!r}")
        # (c2): free indices are generated from below
        for i in range(p.n):
            if not self.is_free[i]:
                continue
            g = self.groups[i]
            if g.is_trivial:
                continue
            if not (p.down[i] & ~(1 << i)):
                out.append(
                    f"(c2) fails at minimal free element {p.ids[i]!r}: "
                    f"group must be trivial")
                continue
            for e in g.basis():
                for target in (e, g.neg(e)):
                    if c2_decompose(self, i, target, budget=budget) is None:
                        out.append(
                            f"(c2) fails at {p.ids[i]!r}: {target} is not a "
                            f"sum of images from below")
                        break
                else:
                    continue
                break
        return out

    # -- constructions ------------------------------------------------------

    def restrict(self, lower):
        """The restricted system on a lower set (ids, masks or iterables)."""
        mask = self._as_mask(lower)
        self.poset.require_lower(mask)
        keep = list(self.poset.iter_mask(mask))
        sub = self.poset.restricted(mask)
        kinds = {self.poset.ids[i]: (FREE if self.is_free[i] else REG)
                 for i in keep}
        groups = {self.poset.ids[i]: self.groups[i] for i in keep}
        maps = {}
        for (i, j), hom in self.maps.items():
            if (mask >> i) & 1 and (mask >> j) & 1:
                maps[(self.poset.ids[i], self.poset.ids[j])] = hom
        return System.assemble(sub, kinds, groups, maps)

    def _as_mask(self, lower):
        if isinstance(lower, int):
            return lower
        return self.poset.mask_of(lower)

    def antisymmetrized(self):
        """Same shape with every group collapsed, plus the collapsing hom."""
        trivial = FgGroup()
        kinds = {x: self.kind(x) for x in self.poset.ids}
        groups = {x: trivial for x in self.poset.ids}
        maps = {}
        for (i, j), hom in self.maps.items():
            maps[(self.poset.ids[i], self.poset.ids[j])] = GroupHom.zero_hom(
                trivial, trivial, with_c=self.is_free[i])
        target = System.assemble(self.poset, kinds, groups, maps)
        fmaps = {x: GroupHom(self.group(x), trivial, [], c=None)
                 for x in self.poset.ids}
        hom = SystemHom(self, target, {x: x for x in self.poset.ids}, fmaps)
        return target, hom

    @staticmethod
    def pullback(target, psi, source_poset):
        """Pull a system back along psi: source_poset -> target.poset.

        psi must be surjective, order-preserving, strict on chains, and
        induce bijections on lower covers; BadProjection otherwise.  Groups
        and maps are copied along psi and the result is re-validated.
        """
        tp = target.poset
        sp = source_poset
        if set(psi.keys()) != set(sp.ids):
            raise BadProjection("vertex map domain mismatch")
        if set(psi.values()) != set(tp.ids):
            raise BadProjection("vertex map is not surjective")
        for a in sp.ids:
            for b in sp.ids:
                if a != b and sp.leq(a, b):
                    if psi[a] == psi[b] or not tp.leq(psi[a], psi[b]):
                        raise BadProjection(
                            f"vertex map not strictly order-preserving on "
                            f"{a!r} < {b!r}")
        for x in sp.ids:
            img = [psi[c] for c in sp.lower_covers(x)]
            if len(set(img)) != len(img) or set(img) != tp.lower_covers(psi[x]):
                raise BadProjection(
                    f"lower covers of {x!r} do not biject with those of "
                    f"{psi[x]!r}")
        kinds = {x: target.kind(psi[x]) for x in sp.ids}
        groups = {x: target.group(psi[x]) for x in sp.ids}
        maps = {}
        for b in sp.ids:
            for a_idx in sp.iter_mask(sp.down[sp.idx(b)] & ~(1 << sp.idx(b))):
                a = sp.ids[a_idx]
                maps[(a, b)] = target.map(psi[a], psi[b])
        pulled = System.assemble(sp, kinds, groups, maps)
        fmaps = {x: GroupHom.identity(pulled.group(x)) for x in sp.ids}
        hom = SystemHom(pulled, target, dict(psi), fmaps)
        return pulled, hom

    def crown(self, pair):
        """Collapse a compatible pair into the crowned system.

        Returns (crowned_system, projection_hom); the projection identifies
        the second ideal with the first.
        """
        pair.check(self)
        p = self.poset
        keep = [x for x in p.ids if not ((pair.i2 >> p.idx(x)) & 1)]
        psi = pair.iso
        inv = {v: k for k, v in psi.items()}
        in1 = lambda x: bool((pair.i1 >> p.idx(x)) & 1)
        in12 = lambda x: bool(((pair.i1 | pair.i2) >> p.idx(x)) & 1)
        rels = []
        for a in keep:
            for b in keep:
                if a != b and p.leq(a, b):
                    rels.append((a, b))
                elif in1(a) and not in12(b) and p.lt(psi[a], b):
                    rels.append((a, b))
        try:
            new_poset = Poset.from_relations(keep, rels)
        except ValueError as e:
            raise InvalidPair(f"crowned order is not a partial order: {e}")
        kinds = {x: self.kind(x) for x in keep}
        groups = {x: self.group(x) for x in keep}
        maps = {}
        for b in keep:
            bi = new_poset.idx(b)
            for a_idx in new_poset.iter_mask(new_poset.down[bi] & ~(1 << bi)):
                a = new_poset.ids[a_idx]
                if p.lt(a, b):
                    maps[(a, b)] = self.map(a, b)
                else:
                    maps[(a, b)] = self.map(psi[a], b)
        crowned = System.assemble(new_poset, kinds, groups, maps)
        vmap = {x: (inv[x] if (pair.i2 >> p.idx(x)) & 1 else x)
                for x in p.ids}
        fmaps = {x: GroupHom.identity(self.group(x)) for x in p.ids}
        proj = SystemHom(self, crowned, vmap, fmaps)
        return crowned, proj

    # -- equality -----------------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, System) and self.poset == other.poset
                and self.is_free == other.is_free
                and self.groups == other.groups and self.maps == other.maps)

    def __hash__(self):
        return hash((self.poset, self.is_free, self.groups))

    def __repr__(self):
        kinds = {x: self.kind(x) for x in self.poset.ids}
        return f"System({self.poset!r}, kinds={kinds})"


# ---------------------------------------------------------------------------
# condition (c2): membership in the semigroup generated from below
# ---------------------------------------------------------------------------

def c2_columns(system, i):
    """Column layout for sums over strictly-lower contributions at index i.

    Returns (A, constraints, info): A has one row per coordinate of G_i, one
    column per unknown; info records which (index, part) each column means.
    """
    p = system.poset
    gi = system.groups[i]
    cols = []
    constraints = []
    info = []
    for k in sorted(p.iter_mask(p.down[i] & ~(1 << i))):
        hom = system.maps[(k, i)]
        gk = system.groups[k]
        if system.is_free[k]:
            ncol = len(cols)
            cols.append(list(hom.c))
            info.append((k, "n"))
            linked = tuple(range(ncol + 1, ncol + 1 + gk.dim))
            constraints.append(zero_or_ge1_c(linked=linked))
            for t in range(gk.dim):
                cols.append([hom.h[r][t] for r in range(gi.dim)])
                info.append((k, ("g", t)))
                constraints.append(free_c())
        else:
            for t in range(gk.dim):
                cols.append([hom.h[r][t] for r in range(gi.dim)])
                info.append((k, ("g", t)))
                constraints.append(free_c())
    A = [[c[r] for c in cols] for r in range(gi.dim)]
    return A, constraints, info


def c2_decompose(system, i, beta, budget=C2_BUDGET):
    """Express beta in G_i as a sum of images of M_k from strictly below.

    Returns [(k_id, value)] with each value in M_k, or None when beta is not
    in the semigroup image (impossible for free i in a valid system).
    """
    gi = system.groups[i]
    beta = gi.canon(beta)
    A, constraints, info = c2_columns(system, i)
    if not constraints:
        return [] if beta == gi.zero() else None
    x = intlin.feasible_constrained(A, list(beta), list(gi.moduli()),
                                    constraints, budget=budget)
    if x is None:
        return None
    p = system.poset
    by_k = {}
    for v, (k, part) in zip(x, info):
        slot = by_k.setdefault(k, [0, [0] * system.groups[k].dim])
        if part == "n":
            slot[0] = v
        else:
            slot[1][part[1]] = v
    out = []
    for k in sorted(by_k):
        n, g = by_k[k]
        gk = system.groups[k]
        if system.is_free[k]:
            if n == 0:
                continue
            out.append((p.ids[k], (n, gk.canon(g))))
        else:
            g = gk.canon(g)
            if g != gk.zero():
                out.append((p.ids[k], g))
    return out


# ---------------------------------------------------------------------------
# homomorphisms of systems
# ---------------------------------------------------------------------------

class SystemHom:
    """Order map on vertices plus per-vertex group maps, square-checked."""

    __slots__ = ("source", "target", "vertex", "gmaps")

    def __init__(self, source, target, vertex, gmaps, check=True):
        self.source = source
        self.target = target
        self.vertex = dict(vertex)
        self.gmaps = dict(gmaps)
        if check:
            bad = self.check()
            if bad:
                raise InvalidSystem(bad)

    def check(self):
        out = []
        sp, tp = self.source.poset, self.target.poset
        for x in sp.ids:
            if x not in self.vertex:
                out.append(f"vertex map misses {x!r}")
                continue
            if self.source.kind(x) != self.target.kind(self.vertex[x]):
                out.append(f"vertex map changes the kind of {x!r}")
            f = self.gmaps.get(x)
            if f is None or f.src != self.source.group(x) or \
                    f.dst != self.target.group(self.vertex[x]):
                out.append(f"group map at {x!r} missing or mistyped")
        if out:
            return out
        for a in sp.ids:
            for b in sp.ids:
                if a == b or not sp.leq(a, b):
                    continue
                if self.vertex[a] == self.vertex[b] or \
                        not tp.leq(self.vertex[a], self.vertex[b]):
                    out.append(f"vertex map not strict on {a!r} < {b!r}")
                    continue
                phi1 = self.source.map(a, b)
                phi2 = self.target.map(self.vertex[a], self.vertex[b])
                fa, fb = self.gmaps[a], self.gmaps[b]
                lhs_h = intlin.mat_mul_shaped(phi2.h, fa.h, phi2.dst.dim,
                                              phi2.src.dim, fa.src.dim)
                rhs_h = intlin.mat_mul_shaped(fb.h, phi1.h, fb.dst.dim,
                                              fb.src.dim, phi1.src.dim)
                dst = phi2.dst

                def canon_mat(mat):
                    rows = []
                    for r, row in enumerate(mat):
                        if r >= dst.rank:
                            d = dst.torsion[r - dst.rank]
                            rows.append(tuple(v % d for v in row))
                        else:
                            rows.append(tuple(row))
                    return tuple(rows)

                if canon_mat(lhs_h) != canon_mat(rhs_h):
                    out.append(f"square fails over {a!r} < {b!r} (group part)")
                if self.source.is_free[sp.idx(a)]:
                    if dst.canon(phi2.c) != fb.apply_group(phi1.c):
                        out.append(
                            f"square fails over {a!r} < {b!r} (unit part)")
        return out

    def bar_apply(self, x, val):
        """Apply the lifted map on M_x: (n, g) -> (n, f(g)) at free x."""
        f = self.gmaps[x]
        if self.source.kind(x) == FREE:
            n, g = val
            return (n, f.apply_group(g))
        return f.apply_group(val)

    def compose_with(self, earlier):
        """self o earlier."""
        assert earlier.target is self.source or earlier.target == self.source
        vertex = {x: self.vertex[v] for x, v in earlier.vertex.items()}
        gmaps = {}
        for x, f in earlier.gmaps.items():
            g2 = self.gmaps[earlier.vertex[x]]
            gmaps[x] = GroupHom(f.src, g2.dst,
                                intlin.mat_mul_shaped(g2.h, f.h, g2.dst.dim,
                                                      g2.src.dim, f.src.dim))
        return SystemHom(earlier.source, self.target, vertex, gmaps)

    @classmethod
    def identity(cls, system):
        return cls(system, system, {x: x for x in system.poset.ids},
                   {x: GroupHom.identity(system.group(x))
                    for x in system.poset.ids})


class CompatiblePair:
    """Two disjoint isomorphic lower sets that a crown may identify."""

    __slots__ = ("i1", "i2", "iso")

    def __init__(self, system, lower1, lower2, iso):
        self.i1 = system._as_mask(lower1)
        self.i2 = system._as_mask(lower2)
        self.iso = dict(iso)
        bad = self.violations(system)
        if bad:
            raise InvalidPair("; ".join(bad))

    def check(self, system):
        bad = self.violations(system)
        if bad:
            raise InvalidPair("; ".join(bad))

    def violations(self, system):
        p = system.poset
        out = []
        if not p.is_lower(self.i1):
            out.append("first set is not a lower set")
        if not p.is_lower(self.i2):
            out.append("second set is not a lower set")
        if self.i1 & self.i2:
            out.append("sets are not disjoint")
        if out:
            return out
        ids1 = set(p.members(self.i1))
        ids2 = set(p.members(self.i2))
        if set(self.iso.keys()) != ids1 or set(self.iso.values()) != ids2 or \
                len(set(self.iso.values())) != len(self.iso):
            return ["map is not a bijection between the two sets"]
        for a in ids1:
            for b in ids1:
                if p.leq(a, b) != p.leq(self.iso[a], self.iso[b]):
                    out.append(f"map is not an order isomorphism at "
                               f"({a!r}, {b!r})")
        for a in ids1:
            if system.kind(a) != system.kind(self.iso[a]):
                out.append(f"kind differs at {a!r}")
            if system.group(a) != system.group(self.iso[a]):
                out.append(f"group presentation differs at {a!r}")
        if out:
            return out
        for a in ids1:
            for b in ids1:
                if a != b and p.leq(a, b):
                    if system.map(a, b) != system.map(self.iso[a], self.iso[b]):
                        out.append(f"maps differ inside the pair on "
                                   f"{a!r} < {b!r}")
        both = self.i1 | self.i2
        for a in ids1:
            for j in p.ids:
                if (both >> p.idx(j)) & 1:
                    continue
                if p.lt(a, j) and p.lt(self.iso[a], j):
                    if system.map(a, j) != system.map(self.iso[a], j):
                        out.append(f"outside maps differ on {a!r} vs "
                                   f"{self.iso[a]!r} below {j!r}")
        return out


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------

def system_to_dict(system):
    p = system.poset
    order = sorted(p.ids, key=id_sort_key)
    elements = []
    for x in order:
        g = system.group(x)
        elements.append({"id": x, "kind": system.kind(x),
                         "group": {"rank": g.rank,
                                   "torsion": list(g.torsion)}})
    cover = sorted(p.cover_pairs(), key=lambda ab: (id_sort_key(ab[0]),
                                                    id_sort_key(ab[1])))
    maps = []
    for lo, hi in cover:
        hom = system.map(lo, hi)
        entry = {"from": lo, "to": hi, "h": [list(r) for r in hom.h]}
        if hom.c is not None:
            entry["c"] = list(hom.c)
        maps.append(entry)
    return {"elements": elements,
            "order": [[lo, hi] for lo, hi in cover],
            "maps": maps}


def serialize_system(system):
    """Canonical text form: sorted ids, covers only, two-space indent."""
    return json.dumps(system_to_dict(system), indent=2, sort_keys=True) + "\n"


def system_from_dict(data, *, require_valid=True):
    try:
        elements = data["elements"]
        order = data.get("order", [])
        map_entries = data.get("maps", [])
    except (TypeError, KeyError) as e:
        raise ParseError(f"missing top-level key: {e}")
    ids = []
    kinds = {}
    groups = {}
    for el in elements:
        try:
            x = el["id"]
            ids.append(x)
            kinds[x] = el["kind"]
            grp = el.get("group", {"rank": 0, "torsion": []})
            groups[x] = FgGroup(grp.get("rank", 0), grp.get("torsion", ()))
        except (TypeError, KeyError, AssertionError) as e:
            raise ParseError(f"bad element entry {el!r}: {e}")
    ids.sort(key=id_sort_key)
    try:
        poset = Poset.from_relations(ids, [tuple(pair) for pair in order])
    except (ValueError, UnknownElement) as e:
        raise ParseError(f"bad order relation: {e}")
    maps = {}
    for entry in map_entries:
        try:
            lo, hi = entry["from"], entry["to"]
            src = groups[lo]
            dst = groups[hi]
            c = entry.get("c")
            hom = GroupHom(src, dst, entry["h"],
                           c=tuple(c) if c is not None else None)
        except (TypeError, KeyError, AssertionError) as e:
            raise ParseError(f"bad map entry {entry!r}: {e}")
        maps[(lo, hi)] = hom
    return System.assemble(poset, kinds, groups, maps,
                           require_valid=require_valid)


def parse_system(text, *, require_valid=True):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}")
    return system_from_dict(data, require_valid=require_valid)

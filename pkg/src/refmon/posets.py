"""Finite posets, their lower sets, and the saturated-chain tree.

Lower sets are bitmasks over a fixed element ordering; all enumerations run
in that order so results are deterministic.
"""

from itertools import permutations

from .errors import NotLowerSet, NotMaximal, UnknownElement


def id_sort_key(x):
    """Total order across the id types we allow (int, str, tuple)."""
    if isinstance(x, tuple):
        return (2, tuple(id_sort_key(v) for v in x))
    if isinstance(x, str):
        return (1, x)
    return (0, x)


class Poset:
    __slots__ = ("ids", "index", "n", "down", "up", "covers_down",
                 "covers_up", "_lower_sets")

    def __init__(self, ids, down_masks):
        self.ids = tuple(ids)
        self.n = len(self.ids)
        self.index = {x: i for i, x in enumerate(self.ids)}
        assert len(self.index) == self.n, "duplicate element ids"
        self.down = tuple(down_masks)
        up = [0] * self.n
        for i in range(self.n):
            m = self.down[i]
            while m:
                j = (m & -m).bit_length() - 1
                up[j] |= 1 << i
                m &= m - 1
        self.up = tuple(up)
        cov_down = []
        for i in range(self.n):
            strict = self.down[i] & ~(1 << i)
            cov = strict
            m = strict
            while m:
                j = (m & -m).bit_length() - 1
                cov &= ~(self.down[j] & ~(1 << j))
                m &= m - 1
            cov_down.append(cov)
        self.covers_down = tuple(cov_down)
        cov_up = [0] * self.n
        for i in range(self.n):
            m = cov_down[i]
            while m:
                j = (m & -m).bit_length() - 1
                cov_up[j] |= 1 << i
                m &= m - 1
        self.covers_up = tuple(cov_up)
        self._lower_sets = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_relations(cls, ids, pairs):
        """Build from any relation list [(below, above), ...].

        The relation is closed reflexively and transitively; cycles are
        rejected.
        """
        ids = tuple(ids)
        index = {x: i for i, x in enumerate(ids)}
        n = len(ids)
        down = [1 << i for i in range(n)]
        for lo, hi in pairs:
            if lo not in index or hi not in index:
                raise UnknownElement(f"relation uses unknown id: {lo!r} < {hi!r}")
            down[index[hi]] |= 1 << index[lo]
        changed = True
        while changed:
            changed = False
            for i in range(n):
                m = down[i]
                acc = m
                while m:
                    j = (m & -m).bit_length() - 1
                    acc |= down[j]
                    m &= m - 1
                if acc != down[i]:
                    down[i] = acc
                    changed = True
        for i in range(n):
            for j in range(n):
                if i != j and (down[i] >> j) & 1 and (down[j] >> i) & 1:
                    raise ValueError(
                        f"relation has a cycle through {ids[i]!r} and {ids[j]!r}")
        return cls(ids, down)

    @classmethod
    def antichain(cls, ids):
        ids = tuple(ids)
        return cls(ids, [1 << i for i in range(len(ids))])

    # -- basic queries ------------------------------------------------------

    def idx(self, x):
        try:
            return self.index[x]
        except KeyError:
            raise UnknownElement(f"{x!r} is not an element") from None

    def leq(self, a, b):
        return bool((self.down[self.idx(b)] >> self.idx(a)) & 1)

    def lt(self, a, b):
        return a != b and self.leq(a, b)

    def full_mask(self):
        return (1 << self.n) - 1

    def members(self, mask):
        return [self.ids[i] for i in self.iter_mask(mask)]

    @staticmethod
    def iter_mask(mask):
        while mask:
            i = (mask & -mask).bit_length() - 1
            yield i
            mask &= mask - 1

    def mask_of(self, xs):
        m = 0
        for x in xs:
            m |= 1 << self.idx(x)
        return m

    def down_mask(self, i):
        return self.down[i]

    def down_of(self, x):
        return self.down[self.idx(x)]

    def lower_closure(self, mask):
        acc = mask
        for i in self.iter_mask(mask):
            acc |= self.down[i]
        return acc

    def is_lower(self, mask):
        return self.lower_closure(mask) == mask

    def require_lower(self, mask):
        if not self.is_lower(mask):
            raise NotLowerSet(f"{self.members(mask)} is not downward closed")

    def max_mask(self, mask):
        out = 0
        for i in self.iter_mask(mask):
            if not (self.up[i] & mask & ~(1 << i)):
                out |= 1 << i
        return out

    def min_mask(self, mask):
        out = 0
        for i in self.iter_mask(mask):
            if not (self.down[i] & mask & ~(1 << i)):
                out |= 1 << i
        return out

    def maximal_elements(self):
        return self.members(self.max_mask(self.full_mask()))

    def lower_covers(self, x):
        return set(self.members(self.covers_down[self.idx(x)]))

    def upper_covers(self, x):
        return set(self.members(self.covers_up[self.idx(x)]))

    def linear_extension(self):
        """Element indices, minimal first; ties by position."""
        return sorted(range(self.n), key=lambda i: (bin(self.down[i]).count("1"), i))

    # -- lower set enumeration ---------------------------------------------

    def lower_sets(self):
        """All lower sets, ordered by (size, mask value).  Cached."""
        if self._lower_sets is None:
            sets = [0]
            for i in self.linear_extension():
                need = self.down[i] & ~(1 << i)
                sets = sets + [s | (1 << i) for s in sets if s & need == need]
            self._lower_sets = tuple(
                sorted(sets, key=lambda m: (bin(m).count("1"), m)))
        return self._lower_sets

    def lower_sets_between(self, lo, hi):
        """Lower sets L with lo <= L <= hi (masks), same deterministic order."""
        lo = self.lower_closure(lo)
        if lo & ~hi:
            return []
        return [m for m in self.lower_sets() if m & lo == lo and m & ~hi == 0]

    def antichains_count(self):
        """Count antichains by brute force (independent of lower_sets)."""
        count = 0
        for m in range(1 << self.n):
            ok = True
            for i in self.iter_mask(m):
                if (self.down[i] | self.up[i]) & m & ~(1 << i):
                    ok = False
                    break
            if ok:
                count += 1
        return count

    # -- structure ----------------------------------------------------------

    def chain_up_property(self):
        """True iff every up-set is totally ordered."""
        return all(bin(c).count("1") <= 1 for c in self.covers_up)

    def restricted(self, mask):
        """Sub-poset on the elements of mask (any subset)."""
        keep = list(self.iter_mask(mask))
        ids = [self.ids[i] for i in keep]
        pos = {i: p for p, i in enumerate(keep)}
        down = []
        for i in keep:
            m = 0
            rem = self.down[i] & mask
            for j in self.iter_mask(rem):
                m |= 1 << pos[j]
            down.append(m)
        return Poset(ids, down)

    def relabeled(self, mapping):
        return Poset([mapping[x] for x in self.ids], self.down)

    @staticmethod
    def disjoint_union(posets, tags=None):
        """Union with ids tagged (tag, id) to keep them distinct."""
        if tags is None:
            tags = list(range(len(posets)))
        ids = []
        down = []
        offset = 0
        for tag, p in zip(tags, posets):
            ids.extend((tag, x) for x in p.ids)
            down.extend(m << offset for m in p.down)
            offset += p.n
        return Poset(ids, down)

    def relation_pairs(self):
        out = []
        for j in range(self.n):
            for i in self.iter_mask(self.down[j] & ~(1 << j)):
                out.append((self.ids[i], self.ids[j]))
        return out

    def cover_pairs(self):
        out = []
        for j in range(self.n):
            for i in self.iter_mask(self.covers_down[j]):
                out.append((self.ids[i], self.ids[j]))
        return out

    def __eq__(self, other):
        return (isinstance(other, Poset) and self.ids == other.ids
                and self.down == other.down)

    def __hash__(self):
        return hash((self.ids, self.down))

    def __repr__(self):
        return f"Poset({list(self.ids)}, covers={self.cover_pairs()})"

    # -- isomorphism --------------------------------------------------------

    def find_isomorphism(self, other):
        """An order isomorphism onto `other` as an id dict, or None."""
        if self.n != other.n:
            return None
        if sorted(bin(m).count("1") for m in self.down) != \
           sorted(bin(m).count("1") for m in other.down):
            return None
        sig_s = [(bin(self.down[i]).count("1"), bin(self.up[i]).count("1"))
                 for i in range(self.n)]
        sig_o = [(bin(other.down[i]).count("1"), bin(other.up[i]).count("1"))
                 for i in range(other.n)]
        order = sorted(range(self.n), key=lambda i: (sig_s[i], i))
        cands = {i: [j for j in range(other.n) if sig_o[j] == sig_s[i]]
                 for i in range(self.n)}

        assignment = {}
        used = set()

        def ok(i, j):
            for i2, j2 in assignment.items():
                a = bool((self.down[i2] >> i) & 1)
                b = bool((other.down[j2] >> j) & 1)
                if a != b:
                    return False
                a = bool((self.down[i] >> i2) & 1)
                b = bool((other.down[j] >> j2) & 1)
                if a != b:
                    return False
            return True

        def rec(pos):
            if pos == self.n:
                return True
            i = order[pos]
            for j in cands[i]:
                if j in used or not ok(i, j):
                    continue
                assignment[i] = j
                used.add(j)
                if rec(pos + 1):
                    return True
                del assignment[i]
                used.discard(j)
            return False

        if rec(0):
            return {self.ids[i]: other.ids[j] for i, j in assignment.items()}
        return None

    def canonical_key(self):
        """Isomorphism-invariant key (brute force; small posets only)."""
        assert self.n <= 7
        best = None
        for perm in permutations(range(self.n)):
            rel = []
            for j in range(self.n):
                for i in self.iter_mask(self.down[j] & ~(1 << j)):
                    rel.append((perm[i], perm[j]))
            key = tuple(sorted(rel))
            if best is None or key < best:
                best = key
        return (self.n, best)


def down_set(poset, x):
    """Principal lower set of x as a mask."""
    return poset.down_of(x)


class ChainTree:
    """The tree of saturated descending chains from a maximal element k.

    Nodes are tuples (k, c1, ..., cm) with each step a lower cover; the order
    is reverse prefix order (longer chains lie below their prefixes), and the
    projection psi sends a chain to its last element.  Every up-set of the
    tree is a chain by construction.
    """

    __slots__ = ("base", "k", "tree", "psi")

    def __init__(self, base, k):
        if k not in base.index:
            raise UnknownElement(f"{k!r} is not an element")
        ki = base.idx(k)
        if base.up[ki] & ~(1 << ki):
            raise NotMaximal(f"{k!r} is not maximal")
        nodes = []
        stack = [(k,)]
        while stack:
            node = stack.pop()
            nodes.append(node)
            last = base.idx(node[-1])
            children = sorted(base.iter_mask(base.covers_down[last]),
                              reverse=True)
            for c in children:
                stack.append(node + (base.ids[c],))
        nodes.sort(key=id_sort_key)
        pairs = []
        for node in nodes:
            for ln in range(1, len(node)):
                pairs.append((node, node[:ln]))
        self.base = base
        self.k = k
        self.tree = Poset.from_relations(nodes, pairs)
        self.psi = {node: node[-1] for node in nodes}

    def vertex_map(self):
        return dict(self.psi)

    def check_properties(self):
        """The five contract properties of the projection; [] when all hold."""
        bad = []
        t = self.tree
        base = self.base
        psi = self.psi
        if not t.chain_up_property():
            bad.append("tree is not chain-up")
        if set(psi.values()) != set(base.members(base.down_of(self.k))):
            bad.append("psi is not onto the principal lower set")
        for node in t.ids:
            # the interval [node, root] is exactly the set of prefixes
            upm = t.up[t.idx(node)]
            ups = set(t.members(upm))
            if ups != {node[:ln] for ln in range(1, len(node) + 1)}:
                bad.append(f"up-set of {node} is not its prefix chain")
            # psi strict on chains
            for other in ups:
                if other != node and not base.lt(psi[node], psi[other]):
                    bad.append(f"psi not strictly increasing above {node}")
            # cover bijection
            children = {c for c in t.ids
                        if (t.covers_down[t.idx(node)] >> t.idx(c)) & 1}
            imgs = [psi[c] for c in children]
            if len(set(imgs)) != len(imgs) or \
                    set(imgs) != base.lower_covers(psi[node]):
                bad.append(f"lower covers of {node} do not biject")
        # distinct nodes have distinct prefix-interval images
        seen = {}
        for node in t.ids:
            key = frozenset(node)
            if key in seen:
                bad.append(f"{node} and {seen[key]} share an interval image")
            seen[key] = node
        # maximal chains biject with maximal chains of base's down-set
        base_down = base.restricted(base.down_of(self.k))
        base_chains = set(map(tuple, _maximal_chains(base_down)))
        tree_chains = set()
        for chain in _maximal_chains(self.tree):
            img = tuple(psi[c] for c in chain)
            if img in tree_chains:
                bad.append(f"maximal chain image repeated: {img}")
            tree_chains.add(img)
        if tree_chains != base_chains:
            bad.append("maximal chains do not biject")
        return bad


def _maximal_chains(poset):
    """All maximal chains, each listed from top to bottom."""
    tops = [poset.idx(x) for x in poset.maximal_elements()]
    chains = []

    def extend(chain):
        last = chain[-1]
        kids = list(poset.iter_mask(poset.covers_down[last]))
        if not kids:
            chains.append([poset.ids[i] for i in chain])
            return
        for c in kids:
            extend(chain + [c])

    for t in sorted(tops):
        extend([t])
    return chains


def chain_tree(poset, k):
    return ChainTree(poset, k)


def all_posets(n):
    """Every labeled poset on range(n), as Poset objects.

    Brute force: orient each index pair (none / up / down) and keep the
    transitively closed, acyclic outcomes.  Intended for n <= 5.
    """
    assert n <= 5
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    seen = set()
    out = []

    def rec(idx, rel):
        if idx == len(pairs):
            try:
                p = Poset.from_relations(range(n), rel)
            except ValueError:
                return
            key = tuple(p.down)
            if key not in seen:
                seen.add(key)
                out.append(p)
            return
        i, j = pairs[idx]
        rec(idx + 1, rel)
        rec(idx + 1, rel + [(i, j)])
        rec(idx + 1, rel + [(j, i)])

    rec(0, [])
    return out


def posets_up_to_iso(n):
    """One representative per isomorphism class of posets on n points."""
    reps = {}
    for p in all_posets(n):
        reps.setdefault(p.canonical_key(), p)
    return [reps[k] for k in sorted(reps)]

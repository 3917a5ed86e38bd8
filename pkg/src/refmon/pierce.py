"""Independent normal form for trivial-group systems.

When every group is trivial the monoid is primitive: an element is exactly
its support lower set together with a positive multiplicity at each free
maximal element of the support.  Everything here is decided with set and
counting arithmetic only; no matrices, no congruence machinery.  The main
implementation is cross-checked against this oracle in the test and
property suites.
"""


class PierceMonoid:
    def __init__(self, poset, free_ids):
        self.poset = poset
        self.free = frozenset(free_ids)

    def zero(self):
        return (0, ())

    def elem(self, support_mask, mults):
        """Normal form: (support, sorted (index, n) at free maxima)."""
        p = self.poset
        maxm = p.max_mask(support_mask)
        out = []
        for i in p.iter_mask(maxm):
            if p.ids[i] in self.free:
                n = mults.get(i, 1)
                assert n >= 1
                out.append((i, n))
        return (support_mask, tuple(sorted(out)))

    def unit(self, x):
        p = self.poset
        return self.elem(p.down_of(x), {p.idx(x): 1})

    def free_max_mults(self, e):
        return dict(e[1])

    def add(self, a, b):
        p = self.poset
        mask = a[0] | b[0]
        ma = dict(a[1])
        mb = dict(b[1])
        out = {}
        for i in p.iter_mask(p.max_mask(mask)):
            if p.ids[i] not in self.free:
                continue
            n = ma.get(i, 0) + mb.get(i, 0)
            # a maximal element of the union is maximal in a part containing
            # it, so n >= 1 whenever i lies in either support
            out[i] = n
        return (mask, tuple(sorted(out.items())))

    def eq(self, a, b):
        return a == b

    def leq(self, a, b):
        """Is there z with a + z = b?  Pure counting over candidate supports."""
        p = self.poset
        if a[0] & ~b[0]:
            return False
        if a == b:
            return True
        ma = dict(a[1])
        mb = dict(b[1])
        need = b[0] & ~a[0]
        for c in p.lower_sets_between(need, b[0]):
            cmax = p.max_mask(c)
            ok = True
            for i, n_b in mb.items():
                n_a = ma.get(i, 0) if (a[0] >> i) & 1 else 0
                if (cmax >> i) & 1:
                    if n_b - n_a < 1:
                        ok = False
                        break
                elif (c >> i) & 1:
                    # free non-maximal coordinate of z carries nothing
                    if n_b != n_a:
                        ok = False
                        break
                else:
                    if n_b != n_a:
                        ok = False
                        break
            if ok:
                return True
        return False

    # -- converters against the main implementation -------------------------

    def from_monelem(self, x):
        mults = {}
        data = x.monoid.support_data(x.support)
        for i in data.idxs:
            if x.monoid.system.is_free[i] and (data.max_mask >> i) & 1:
                mults[i] = x.vec[data.offset[i]]
        return self.elem(x.support, mults)

    def to_monelem(self, monoid, e):
        mask, mults = e
        data = monoid.support_data(mask)
        vec = [0] * data.total
        for i, n in mults:
            vec[data.offset[i]] = n
        return monoid.make(mask, vec)

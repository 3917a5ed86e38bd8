"""Property suites over a system's monoid.

Each suite draws its own deterministically seeded cases and returns a
PropResult; the CLI and the acceptance tests both run these.  Suites that
do not apply to a system (chain-up recipes on a non-chain-up poset, the
primitive-monoid oracle when groups are nontrivial) are skipped.
"""

import random

from .monoid import FREE_ELT, REG_ELT, Monoid
from .pierce import PierceMonoid
from .sampling import random_element, random_equal_sums
from .surgery import maximal_decomposition, verify_pushout


class PropResult:
    __slots__ = ("name", "cases", "failures", "skipped")

    def __init__(self, name, cases=0, failures=None, skipped=False):
        self.name = name
        self.cases = cases
        self.failures = failures if failures is not None else []
        self.skipped = skipped

    @property
    def passed(self):
        return not self.failures

    def status(self):
        if self.skipped:
            return "SKIP"
        return "PASS" if self.passed else "FAIL"


def _rng(seed, name):
    return random.Random(f"{seed}:{name}")


def suite_defining_relations(monoid, seed, samples):
    rng = _rng(seed, "defining_relations")
    sysj = monoid.system
    p = sysj.poset
    pairs = [(i, j) for j in range(p.n)
             for i in p.iter_mask(p.down[j] & ~(1 << j))]
    res = PropResult("defining_relations")
    if not pairs:
        res.skipped = True
        return res
    for _ in range(samples):
        i, j = pairs[rng.randrange(len(pairs))]
        gi, gj = sysj.groups[i], sysj.groups[j]
        y = ((rng.randint(1, 3), _rand_g(rng, gi)) if sysj.is_free[i]
             else _rand_g(rng, gi))
        x = ((rng.randint(1, 3), _rand_g(rng, gj)) if sysj.is_free[j]
             else _rand_g(rng, gj))
        img = sysj.maps[(i, j)].apply(y)
        if sysj.is_free[j]:
            combined = (x[0], gj.add(x[1], img))
        else:
            combined = gj.add(x, img)
        lhs = monoid.add(monoid.chi(p.ids[j], x), monoid.chi(p.ids[i], y))
        rhs = monoid.chi(p.ids[j], combined)
        res.cases += 1
        if not monoid.eq(lhs, rhs):
            res.failures.append(f"relation fails at {p.ids[i]}<{p.ids[j]}")
    return res


def _rand_g(rng, g):
    return g.canon([rng.randint(-3, 3) for _ in range(g.rank)]
                   + [rng.randrange(d) for d in g.torsion])


def suite_conical(monoid, seed, samples):
    rng = _rng(seed, "conical")
    res = PropResult("conical")
    for _ in range(samples):
        x = random_element(monoid, rng)
        y = random_element(monoid, rng)
        s = monoid.add(x, y)
        res.cases += 1
        if s.support == 0 and not (x.support == 0 and y.support == 0):
            res.failures.append("nonzero pair with zero sum")
    return res


def suite_congruence(monoid, seed, samples):
    """eq is compatible with addition and blind to relation shifts."""
    rng = _rng(seed, "congruence")
    res = PropResult("congruence")
    for _ in range(samples):
        x = random_element(monoid, rng)
        data = monoid.support_data(x.support)
        if not data.ugens:
            continue
        vec = list(x.vec)
        for _ in range(2):
            g = data.ugens[rng.randrange(len(data.ugens))]
            sign = rng.choice((1, -1))
            vec = [a + sign * b for a, b in zip(vec, g)]
        nvec = [v % md if md else v for v, md in zip(vec, data.moduli)]
        try:
            y = monoid.make(x.support, nvec)
        except Exception:
            continue  # the shift may leave the representative cone
        res.cases += 1
        if not monoid.eq(x, y):
            res.failures.append("relation shift changed the class")
            continue
        z = random_element(monoid, rng)
        if not monoid.eq(monoid.add(x, z), monoid.add(y, z)):
            res.failures.append("congruence not compatible with addition")
    return res


def suite_unit_invariance(monoid, seed, samples):
    """Unit coordinates at free maxima determine the class; classification
    by support follows them."""
    rng = _rng(seed, "unit_invariance")
    res = PropResult("unit_invariance")
    sysj = monoid.system
    for _ in range(samples):
        x = random_element(monoid, rng)
        res.cases += 1
        cls = monoid.classify(x)
        data = monoid.support_data(x.support)
        has_free_max = any(sysj.is_free[j]
                           for j in sysj.poset.iter_mask(data.max_mask))
        if x.support == 0:
            continue
        if (cls == REG_ELT) == has_free_max:
            res.failures.append("support criterion mismatch")
        if cls == REG_ELT and not monoid.is_regular(x):
            res.failures.append("regular class fails 2x <= x")
        if cls == FREE_ELT and monoid.is_regular(x):
            res.failures.append("free class satisfies 2x <= x")
    return res


def suite_refine(monoid, seed, samples):
    rng = _rng(seed, "refine")
    res = PropResult("refine_totality")
    for _ in range(samples):
        x1, x2, y1, y2 = random_equal_sums(monoid, rng)
        res.cases += 1
        try:
            sq = monoid.refine(x1, x2, y1, y2)
        except Exception as e:
            res.failures.append(f"refine raised: {e}")
            continue
        if not sq.verify(x1, x2, y1, y2):
            res.failures.append("square failed verification")
    return res


def suite_chain_up(monoid, seed, samples):
    res = PropResult("chain_up_refine")
    if not monoid.system.poset.chain_up_property():
        res.skipped = True
        return res
    rng = _rng(seed, "chain_up")
    for _ in range(samples):
        x1, x2, y1, y2 = random_equal_sums(monoid, rng)
        res.cases += 1
        try:
            sq = monoid.refine_chain_up(x1, x2, y1, y2)
        except Exception as e:
            res.failures.append(f"constructive refine raised: {e}")
            continue
        if not sq.verify(x1, x2, y1, y2):
            res.failures.append("constructive square failed verification")
    return res


def suite_separativity(monoid, seed, samples):
    """2x = 2y = x + y forces x = y; probed on engineered pairs."""
    rng = _rng(seed, "separativity")
    res = PropResult("separativity")
    hits = 0
    for _ in range(samples):
        x = random_element(monoid, rng)
        y = random_element(monoid, rng) if rng.random() < 0.5 else \
            _perturb(monoid, rng, x)
        xx = monoid.add(x, x)
        yy = monoid.add(y, y)
        xy = monoid.add(x, y)
        res.cases += 1
        if monoid.eq(xx, yy) and monoid.eq(yy, xy):
            hits += 1
            if not monoid.eq(x, y):
                res.failures.append("separativity violated")
    if hits == 0:
        res.failures.append("no separativity hypothesis instances sampled")
    return res


def _perturb(monoid, rng, x):
    """Same support, slightly different coordinates."""
    data = monoid.support_data(x.support)
    vec = list(x.vec)
    if vec:
        pos = rng.randrange(len(vec))
        md = data.moduli[pos]
        if md:
            vec[pos] = (vec[pos] + rng.randrange(md)) % md
    try:
        return monoid.make(x.support, vec)
    except Exception:
        return x


def suite_unperforation(monoid, seed, samples):
    rng = _rng(seed, "unperforation")
    res = PropResult("unperforation")
    for _ in range(samples):
        x = random_element(monoid, rng)
        y = random_element(monoid, rng)
        n = rng.randint(2, 4)
        res.cases += 1
        if monoid.leq(monoid.scale(n, x), monoid.scale(n, y)) is not None:
            if monoid.leq(x, y) is None:
                res.failures.append(f"unperforation violated at n={n}")
    return res


def suite_pierce(monoid, seed, samples):
    res = PropResult("primitive_oracle")
    sysj = monoid.system
    if not all(g.is_trivial for g in sysj.groups):
        res.skipped = True
        return res
    rng = _rng(seed, "pierce")
    pm = PierceMonoid(sysj.poset,
                      [x for x in sysj.poset.ids if sysj.kind(x) == "free"])
    for _ in range(samples):
        a = random_element(monoid, rng)
        b = random_element(monoid, rng)
        sa, sb = pm.from_monelem(a), pm.from_monelem(b)
        res.cases += 1
        ok = (monoid.eq(a, b) == pm.eq(sa, sb)
              and pm.from_monelem(monoid.add(a, b)) == pm.add(sa, sb)
              and (monoid.leq(a, b) is not None) == pm.leq(sa, sb))
        if not ok:
            res.failures.append("oracle disagreement")
    return res


def suite_regular_monoid(monoid, seed, samples):
    """With no free indices every nonzero element is regular."""
    res = PropResult("regular_monoid")
    if any(monoid.system.is_free):
        res.skipped = True
        return res
    rng = _rng(seed, "regular")
    for _ in range(samples):
        x = random_element(monoid, rng)
        if x.support == 0:
            continue
        res.cases += 1
        two = monoid.add(x, x)
        if monoid.leq(two, x) is None or monoid.leq(x, two) is None:
            res.failures.append("element not regular")
    return res


def suite_ideal_lattice(monoid, seed, samples):
    """Lower sets embed bijectively and lattice-compatibly as ideals."""
    rng = _rng(seed, "ideals")
    res = PropResult("ideal_lattice")
    p = monoid.system.poset
    lowers = p.lower_sets()
    for la in lowers:
        for lb in lowers:
            res.cases += 1
            if la != lb:
                diff = (la ^ lb)
                i = next(p.iter_mask(diff))
                u = monoid.unit(p.ids[i])
                if monoid.in_ideal(u, la) == monoid.in_ideal(u, lb):
                    res.failures.append("two lower sets define one ideal")
    for _ in range(samples):
        x = random_element(monoid, rng)
        la = lowers[rng.randrange(len(lowers))]
        lb = lowers[rng.randrange(len(lowers))]
        res.cases += 1
        in_union = monoid.in_ideal(x, la | lb)
        in_inter = monoid.in_ideal(x, la & lb)
        if in_inter and not (monoid.in_ideal(x, la) and monoid.in_ideal(x, lb)):
            res.failures.append("intersection ideal too big")
        if (monoid.in_ideal(x, la) or monoid.in_ideal(x, lb)) and not in_union:
            res.failures.append("union ideal too small")
        if monoid.in_ideal(x, la) and \
                p.lower_closure(x.support) & ~la:
            res.failures.append("membership ignores support closure")
    return res


def suite_primes(monoid, seed, samples):
    res = PropResult("primes")
    rng = _rng(seed, "primes")
    finite = all(g.order() is not None for g in monoid.system.groups)
    if finite and monoid.system.n:
        primes = monoid.enumerate_primes()
        for q in primes:
            res.cases += 1
            if not monoid.is_prime(q):
                res.failures.append("family member not recognized as prime")
        for _ in range(min(samples, 30)):
            q = primes[rng.randrange(len(primes))]
            a = random_element(monoid, rng)
            b = random_element(monoid, rng)
            res.cases += 1
            if monoid.leq(q, monoid.add(a, b)) is not None:
                if monoid.leq(q, a) is None and monoid.leq(q, b) is None:
                    res.failures.append("prime fails the defining split")
    for _ in range(samples):
        x = random_element(monoid, rng)
        res.cases += 1
        if monoid.is_prime(monoid.add(x, x)) and not x.is_zero:
            data = monoid.support_data(x.support)
            frees = [j for j in monoid.system.poset.iter_mask(data.max_mask)
                     if monoid.system.is_free[j]]
            if frees:
                res.failures.append("doubled free element deemed prime")
    return res


def suite_generators(monoid, seed, samples):
    rng = _rng(seed, "generators")
    res = PropResult("generators")
    if monoid.system.n == 0:
        res.skipped = True
        return res
    for _ in range(samples):
        x = random_element(monoid, rng)
        res.cases += 1
        try:
            parts = monoid.decompose_into_generators(x)
        except Exception as e:
            res.failures.append(f"decomposition raised: {e}")
            continue
        if not monoid.eq(monoid.add_all(parts), x):
            res.failures.append("decomposition does not re-sum")
    return res


def suite_roundtrip(monoid, seed, samples):
    res = PropResult("roundtrip")
    res.cases = 1
    if not monoid.roundtrip_check():
        res.failures.append("derived system does not match")
    return res


def suite_crown_pushouts(monoid, seed, samples):
    res = PropResult("crown_pushouts")
    if monoid.system.n == 0:
        res.skipped = True
        return res
    trace = maximal_decomposition(monoid.system)
    if not trace.steps:
        res.skipped = True
        return res
    per = max(4, samples // (4 * len(trace.steps)))
    for idx, step in enumerate(trace.steps):
        rep = verify_pushout(step, samples=per, seed=f"{seed}:{idx}")
        res.cases += rep["checks"]
        res.failures.extend(rep["failures"])
    return res


ALL_SUITES = [
    suite_defining_relations,
    suite_conical,
    suite_congruence,
    suite_unit_invariance,
    suite_refine,
    suite_chain_up,
    suite_separativity,
    suite_unperforation,
    suite_pierce,
    suite_regular_monoid,
    suite_ideal_lattice,
    suite_primes,
    suite_generators,
    suite_roundtrip,
    suite_crown_pushouts,
]


def run_props(system, seed=0, samples=50, budget=None):
    monoid = Monoid(system) if budget is None else Monoid(system, budget)
    results = []
    for suite in ALL_SUITES:
        results.append(suite(monoid, seed, samples))
    return results

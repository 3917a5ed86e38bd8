"""Machine-checked surgery: from the chain tree down to the base poset.

A trace starts at a system pulled back over the saturated-chain tree (or at
a disjoint union of principal restrictions) and collapses one compatible
pair per step until the projection onto the target is a bijection.  Every
step is validated as a system, every projection as a homomorphism, and the
pushout property can be sampled on concrete elements.
"""

import random

from .errors import InternalInvariantViolation, NoValidStep
from .monoid import Monoid
from .posets import ChainTree, Poset, id_sort_key
from .systems import CompatiblePair, System, SystemHom
from .sampling import random_element


class SurgeryStep:
    __slots__ = ("before", "after", "pair", "proj")

    def __init__(self, before, after, pair, proj):
        self.before = before
        self.after = after
        self.pair = pair
        self.proj = proj

    def project_elem(self, mb, x, ma):
        return mb.map_elem(self.proj, x, ma)

    def section_elem(self, ma, w, mb):
        """Lift an element of the collapsed monoid back; a right inverse of
        the projection (the collapsed ids still exist upstairs)."""
        out = mb.zero()
        for i, hat in sorted(ma.max_rep(w).items()):
            name = ma.system.poset.ids[i]
            val = ma.split_hat(i, hat)
            out = mb.add(out, mb.chi(name, val))
        return out


class SurgeryTrace:
    __slots__ = ("initial", "steps", "final", "target", "onto_target")

    def __init__(self, initial, steps, final, target, onto_target):
        self.initial = initial
        self.steps = steps
        self.final = final
        self.target = target
        self.onto_target = onto_target  # vertex dict final -> target

    def systems(self):
        return [self.initial] + [s.after for s in self.steps]

    def composite_vertex_map(self):
        out = {x: x for x in self.initial.poset.ids}
        for step in self.steps:
            out = {x: step.proj.vertex[v] for x, v in out.items()}
        return out

    def final_isomorphic_to_target(self):
        hom = SystemHom(self.final, self.target, self.onto_target,
                        {x: _identity_gmap(self.final, x)
                         for x in self.final.poset.ids}, check=False)
        if hom.check():
            return False
        img = set(self.onto_target.values())
        if len(img) != self.final.n or img != set(self.target.poset.ids):
            return False
        # order reflection: the inverse must be order-preserving too
        inv = {v: k for k, v in self.onto_target.items()}
        tp = self.target.poset
        fp = self.final.poset
        for a in tp.ids:
            for b in tp.ids:
                if a != b and tp.leq(a, b) and not fp.leq(inv[a], inv[b]):
                    return False
        return True


def _identity_gmap(system, x):
    from .groups import GroupHom
    return GroupHom.identity(system.group(x))


def collapse_sequence(system, k, max_steps=64):
    """Collapse the chain-tree pullback at a maximal k back onto the base.

    Steps are chosen greedily: the duplicated image highest in a fixed
    linear extension first, principal down-set pairs, smallest node ids;
    candidates that fail validation are skipped, with backtracking across
    earlier choices.  NoValidStep reports a dead end (a diagnostic; the
    existence of some sequence is a theorem, the recipe here is ours).
    """
    base = system.restrict(system.poset.down_of(k))
    ct = ChainTree(system.poset, k)
    initial, onto = System.pullback(base, ct.vertex_map(), ct.tree)
    if not initial.poset.chain_up_property():
        raise InternalInvariantViolation("chain-tree pullback not chain-up")
    rank = {x: pos for pos, x in enumerate(
        reversed([base.poset.ids[i] for i in base.poset.linear_extension()]))}
    steps = _collapse(initial, dict(ct.vertex_map()), rank, max_steps)
    final = steps[-1].after if steps else initial
    psi = dict(ct.vertex_map())
    for step in steps:
        psi = {x: psi[_preimage(step, x)] for x in step.after.poset.ids}
    trace = SurgeryTrace(initial, steps, final, base, psi)
    comp = trace.composite_vertex_map()
    want = ct.vertex_map()
    for x, v in comp.items():
        if psi[v] != want[x]:
            raise InternalInvariantViolation("projection composite drifted")
    if not trace.final_isomorphic_to_target():
        raise InternalInvariantViolation("final system not isomorphic to base")
    return trace


def _preimage(step, x):
    # ids survive collapses, so the preimage of a surviving id is itself
    return x


def _collapse(current, psi, rank, max_steps):
    """DFS over candidate pair collapses until psi becomes injective."""

    def dup_pairs(sys_now, psi_now):
        byimg = {}
        for x in sys_now.poset.ids:
            byimg.setdefault(psi_now[x], []).append(x)
        cands = []
        for img, xs in byimg.items():
            if len(xs) < 2:
                continue
            xs = sorted(xs, key=id_sort_key)
            for a in range(len(xs)):
                for b in range(len(xs)):
                    if a != b:
                        cands.append((rank[img], xs[a], xs[b]))
        cands.sort(key=lambda t: (t[0], id_sort_key(t[1]), id_sort_key(t[2])))
        return cands

    def rec(sys_now, psi_now, depth):
        if len(set(psi_now.values())) == sys_now.n:
            return []
        if depth >= max_steps:
            return None
        p = sys_now.poset
        for _, u, v in dup_pairs(sys_now, psi_now):
            du = p.down_of(u)
            dv = p.down_of(v)
            if du & dv:
                continue
            mu = p.members(du)
            mv = p.members(dv)
            img_u = {psi_now[x] for x in mu}
            img_v = {psi_now[x] for x in mv}
            if len(img_u) != len(mu) or len(img_v) != len(mv) or \
                    img_u != img_v:
                continue
            byimg = {psi_now[x]: x for x in mv}
            tau = {x: byimg[psi_now[x]] for x in mu}
            try:
                pair = CompatiblePair(sys_now, du, dv, tau)
                crowned, proj = sys_now.crown(pair)
            except Exception:
                continue
            nxt_psi = {x: psi_now[x] for x in crowned.poset.ids}
            rest = rec(crowned, nxt_psi, depth + 1)
            if rest is not None:
                return [SurgeryStep(sys_now, crowned, pair, proj)] + rest
        return None

    got = rec(current, psi, 0)
    if got is None:
        raise NoValidStep("no compatible-pair collapse sequence found")
    return got


def maximal_decomposition(system):
    """From the disjoint union of all principal restrictions back to the
    system itself, merging one copy at a time along shared down-sets."""
    p = system.poset
    maxes = sorted(p.maximal_elements(), key=id_sort_key)
    parts = [system.restrict(p.down_of(k)) for k in maxes]
    tagged = Poset.disjoint_union([s.poset for s in parts])
    kinds = {}
    groups = {}
    maps = {}
    for tag, part in enumerate(parts):
        for x in part.poset.ids:
            kinds[(tag, x)] = part.kind(x)
            groups[(tag, x)] = part.group(x)
        for (i, j), hom in part.maps.items():
            a, b = part.poset.ids[i], part.poset.ids[j]
            maps[((tag, a), (tag, b))] = hom
    initial = System.assemble(tagged, kinds, groups, maps)
    psi = {(tag, x): x for tag, part in enumerate(parts)
           for x in part.poset.ids}
    current = initial
    steps = []
    for t in range(1, len(parts)):
        shared = 0
        for s in range(t):
            shared |= p.down_of(maxes[s])
        dmask = shared & p.down_of(maxes[t])
        dids = set(p.members(dmask))
        if not dids:
            continue
        cur_p = current.poset
        accum = [x for x in cur_p.ids
                 if (isinstance(x, tuple) and x[0] < t) and psi[x] in dids]
        incoming = [x for x in cur_p.ids
                    if isinstance(x, tuple) and x[0] == t and psi[x] in dids]
        byimg = {psi[x]: x for x in incoming}
        tau = {x: byimg[psi[x]] for x in accum}
        pair = CompatiblePair(current, cur_p.mask_of(accum),
                              cur_p.mask_of(incoming), tau)
        crowned, proj = current.crown(pair)
        steps.append(SurgeryStep(current, crowned, pair, proj))
        psi = {x: psi[x] for x in crowned.poset.ids}
        current = crowned
    trace = SurgeryTrace(initial, steps, current, system, psi)
    if not trace.final_isomorphic_to_target():
        raise InternalInvariantViolation(
            "decomposition did not recover the system")
    return trace


def verify_pushout(step, samples=100, seed=0):
    """Sample the coequalizer behaviour of one collapse step.

    Checks, on random elements: the projection equalizes the two ideal
    embeddings, the section is a right inverse, and elementary moves
    x + i ~ x + tau(i) are collapsed.  Returns a report dict with failures
    listed (empty on success).
    """
    rng = random.Random(seed)
    mb = Monoid(step.before)
    ma = Monoid(step.after)
    bp = step.before.poset
    sub1 = step.before.restrict(step.pair.i1)
    m1 = Monoid(sub1)
    failures = []
    checks = 0
    inv_iso = step.pair.iso

    def lift_into(m_target, elem, rename=None):
        coords = elem.coords()
        if rename:
            coords = {rename[x]: v for x, v in coords.items()}
        support = list(coords)
        return m_target.element(support, coords)

    for case in range(samples):
        x1 = random_element(m1, rng)
        e1 = lift_into(mb, x1)
        e2 = lift_into(mb, x1, rename=inv_iso)
        checks += 1
        if not ma.eq(step.project_elem(mb, e1, ma),
                     step.project_elem(mb, e2, ma)):
            failures.append(f"equalization failed on {x1!r}")
        w = random_element(ma, rng)
        checks += 1
        lifted = step.section_elem(ma, w, mb)
        if not ma.eq(step.project_elem(mb, lifted, ma), w):
            failures.append(f"section failed on {w!r}")
        x = random_element(mb, rng)
        y = random_element(m1, rng)
        move_a = mb.add(x, lift_into(mb, y))
        move_b = mb.add(x, lift_into(mb, y, rename=inv_iso))
        checks += 1
        if not ma.eq(step.project_elem(mb, move_a, ma),
                     step.project_elem(mb, move_b, ma)):
            failures.append(f"elementary move failed on {x!r} + {y!r}")
    return {"samples": samples, "checks": checks, "failures": failures}

"""Seeded random generators for posets, systems and monoid elements.

System generation works bottom-up: the connecting maps into each element are
drawn from the integer solution lattice of the functoriality constraints, so
every diamond commutes by construction.  At free elements the group is then
shrunk to the subgroup actually generated from below and the semigroup
surjectivity is re-checked; if it cannot be met the group degrades to the
trivial one, which is always admissible.
"""

import random

from . import intlin
from .groups import FgGroup, GroupHom, subgroup_presentation
from .intlin import free_c, zero_or_ge1_c
from .posets import Poset
from .systems import System

MENU = (FgGroup(0, (2,)), FgGroup(0, (3,)), FgGroup(0, (4,)), FgGroup(1, ()))


def random_poset(rng, n, p=0.4):
    ids = [f"v{i}" for i in range(n)]
    pairs = [(ids[i], ids[j]) for i in range(n) for j in range(i + 1, n)
             if rng.random() < p]
    return Poset.from_relations(ids, pairs)


def random_chain_up_poset(rng, n):
    """Random forest: each element has at most one upper cover."""
    ids = [f"v{i}" for i in range(n)]
    pairs = []
    for i in range(1, n):
        if rng.random() < 0.75:
            parent = rng.randrange(i)
            pairs.append((ids[i], ids[parent]))
    return Poset.from_relations(ids, pairs)


def _hat_dim(g, free):
    return g.dim + (1 if free else 0)


def _random_kernel_point(rng, x0, kernel, amplitude=1):
    x = list(x0)
    for k in kernel:
        t = rng.randint(-amplitude, amplitude)
        if t:
            x = [a + t * b for a, b in zip(x, k)]
    return x


def _solve_block_maps(rng, target_g, sources):
    """Random maps into target_g from the given covers, diamonds commuting.

    sources: list of (cover_key, hat_dim, src_moduli, below) where below is
    a list of (common_key, full_hat_matrix_from_that_element_into_cover).
    Returns {cover_key: block matrix (target_g.dim x hat_dim)} or None.
    """
    tdim = target_g.dim
    tmod = target_g.moduli()
    widths = [hd for _, hd, _, _ in sources]
    offsets = []
    pos = 0
    for w in widths:
        offsets.append(pos)
        pos += w
    nvars = tdim * pos

    def var(ci, r, c):
        return offsets[ci] * tdim + r * (widths[ci]) + c

    rows = []
    rhs = []
    mods = []
    # torsion consistency: d * entry vanishes in the target
    for ci, (_, hd, smod, _) in enumerate(sources):
        for c, d in enumerate(smod):
            if not d:
                continue
            for r in range(tdim):
                row = [0] * nvars
                row[var(ci, r, c)] = d
                rows.append(row)
                rhs.append(0)
                mods.append(tmod[r])
    # diamonds: common lower elements must push up equally through any cover
    by_common = {}
    for ci, (_, hd, _, below) in enumerate(sources):
        for key, hat in below:
            by_common.setdefault(key, []).append((ci, hat))
    for key, routes in by_common.items():
        for a in range(len(routes)):
            for b in range(a + 1, len(routes)):
                ci, hat1 = routes[a]
                cj, hat2 = routes[b]
                cols = len(hat1[0]) if hat1 else 0
                for col in range(cols):
                    for r in range(tdim):
                        row = [0] * nvars
                        for c in range(widths[ci]):
                            row[var(ci, r, c)] += hat1[c][col]
                        for c in range(widths[cj]):
                            row[var(cj, r, c)] -= hat2[c][col]
                        rows.append(row)
                        rhs.append(0)
                        mods.append(tmod[r])
    if not rows:
        x = [rng.randint(-2, 2) for _ in range(nvars)]
    else:
        cols_full = [list(r) for r in rows]
        extra = 0
        for i, md in enumerate(mods):
            if md:
                for r in range(len(cols_full)):
                    cols_full[r].append(md if r == i else 0)
                extra += 1
        sol = intlin.solve_with_kernel(cols_full, rhs, len(rows),
                                       nvars + extra)
        if sol is None:
            return None
        x0, kern = sol
        x = _random_kernel_point(rng, x0, kern)[:nvars]
    blocks = {}
    for ci, (key, hd, _, _) in enumerate(sources):
        mat = []
        for r in range(tdim):
            row = [x[var(ci, r, c)] for c in range(hd)]
            mat.append([v % tmod[r] if tmod[r] else max(-9, min(9, v))
                        for v in row])
        blocks[key] = mat
    return blocks


class _Draft:
    """Scratch state while a random system is being assembled."""

    def __init__(self, poset):
        self.poset = poset
        self.kind = {}
        self.group = {}
        self.hat = {}  # (i_idx, j_idx) -> group-block of the hat matrix

    def full_hat(self, i, j):
        """Hat matrix with the leading zero row when the target is free."""
        block = self.hat[(i, j)]
        src_free = self.kind[self.poset.ids[i]] == "free"
        width = self.group[self.poset.ids[i]].dim + (1 if src_free else 0)
        if self.kind[self.poset.ids[j]] == "free":
            return [[0] * width] + block
        return block


def _semigroup_covers_group(draft, j_idx, budget=60_000):
    """Does the semigroup image from below cover the whole group at j?"""
    p = draft.poset
    g = draft.group[p.ids[j_idx]]
    if g.is_trivial:
        return True
    cols = []
    constraints = []
    for k in sorted(p.iter_mask(p.down[j_idx] & ~(1 << j_idx))):
        block = draft.hat[(k, j_idx)]
        kid = p.ids[k]
        kfree = draft.kind[kid] == "free"
        gk = draft.group[kid]
        base = len(cols)
        width = gk.dim + (1 if kfree else 0)
        for c in range(width):
            cols.append([block[r][c] for r in range(g.dim)])
        if kfree:
            constraints.append(zero_or_ge1_c(
                linked=tuple(range(base + 1, base + width))))
            constraints.extend(free_c() for _ in range(width - 1))
        else:
            constraints.extend(free_c() for _ in range(width))
    if not cols:
        return False
    A = [[c[r] for c in cols] for r in range(g.dim)]
    for e in g.basis():
        for target in (e, g.neg(e)):
            try:
                got = intlin.feasible_constrained(
                    A, list(target), list(g.moduli()), constraints,
                    budget=budget)
            except intlin.ResourceLimit:
                return False
            if got is None:
                return False
    return True


def _shrink_group_at(draft, j_idx):
    """Replace the group at a free j by the subgroup generated from below."""
    p = draft.poset
    jid = p.ids[j_idx]
    g = draft.group[jid]
    gens = []
    for k in p.iter_mask(p.down[j_idx] & ~(1 << j_idx)):
        block = draft.hat[(k, j_idx)]
        for c in range(len(block[0]) if block and block[0] else 0):
            gens.append(tuple(block[r][c] for r in range(g.dim)))
    if not gens:
        draft.group[jid] = FgGroup()
        for k in p.iter_mask(p.down[j_idx] & ~(1 << j_idx)):
            draft.hat[(k, j_idx)] = []
        return
    S, incl, express = subgroup_presentation(g, gens)
    if S == g and all(express(e) is not None for e in g.basis()):
        return
    draft.group[jid] = S
    for k in p.iter_mask(p.down[j_idx] & ~(1 << j_idx)):
        block = draft.hat[(k, j_idx)]
        width = len(block[0]) if block and block[0] else 0
        new = [[0] * width for _ in range(S.dim)]
        for c in range(width):
            col = tuple(block[r][c] for r in range(g.dim))
            sc = express(col)
            assert sc is not None
            for r in range(S.dim):
                new[r][c] = sc[r]
        draft.hat[(k, j_idx)] = new


def _zero_out(draft, j_idx):
    p = draft.poset
    jid = p.ids[j_idx]
    draft.group[jid] = FgGroup()
    for k in p.iter_mask(p.down[j_idx] & ~(1 << j_idx)):
        draft.hat[(k, j_idx)] = []


def _compose_blocks(draft, c, j, i):
    """hat block of (i -> j) through the cover c, with explicit shapes."""
    p = draft.poset
    gj = draft.group[p.ids[j]]
    gc = draft.group[p.ids[c]]
    cfree = draft.kind[p.ids[c]] == "free"
    gi = draft.group[p.ids[i]]
    ifree = draft.kind[p.ids[i]] == "free"
    return intlin.mat_mul_shaped(
        draft.hat[(c, j)], draft.full_hat(i, c),
        gj.dim, gc.dim + (1 if cfree else 0), gi.dim + (1 if ifree else 0))


def random_system(rng, max_n=5, menu=MENU, poset=None, kinds=None,
                  trivial_groups=False, all_regular=False, chain_up=False,
                  retries=4):
    """A random valid system; deterministic for a fixed rng state."""
    if poset is None:
        n = rng.randint(1, max_n)
        poset = random_chain_up_poset(rng, n) if chain_up \
            else random_poset(rng, n)
    draft = _Draft(poset)
    for x in poset.ids:
        if kinds is not None and x in kinds:
            draft.kind[x] = kinds[x]
        elif all_regular:
            draft.kind[x] = "reg"
        else:
            draft.kind[x] = rng.choice(["free", "reg"])
    order = poset.linear_extension()
    for j in order:
        jid = poset.ids[j]
        covers = sorted(poset.iter_mask(poset.covers_down[j]))
        if trivial_groups:
            draft.group[jid] = FgGroup()
        else:
            draft.group[jid] = menu[rng.randrange(len(menu))]
        if draft.kind[jid] == "free" and not covers:
            draft.group[jid] = FgGroup()
        placed = False
        for _ in range(retries):
            sources = []
            for c in covers:
                cid = poset.ids[c]
                cfree = draft.kind[cid] == "free"
                gc = draft.group[cid]
                smod = ((0,) if cfree else ()) + gc.moduli()
                below = [(i, draft.full_hat(i, c))
                         for i in poset.iter_mask(
                             poset.down[c] & ~(1 << c))]
                sources.append((c, _hat_dim(gc, cfree), smod, below))
            blocks = _solve_block_maps(rng, draft.group[jid], sources)
            if blocks is None:
                continue
            for c in covers:
                draft.hat[(c, j)] = blocks[c]
            for i in poset.iter_mask(poset.down[j] & ~(1 << j)):
                if (poset.covers_down[j] >> i) & 1:
                    continue
                c = next(c for c in covers if (poset.down[c] >> i) & 1)
                draft.hat[(i, j)] = _compose_blocks(draft, c, j, i)
            if draft.kind[jid] == "free":
                _shrink_group_at(draft, j)
                # composites must be rebuilt against the shrunk group
                for i in poset.iter_mask(poset.down[j] & ~(1 << j)):
                    if (poset.covers_down[j] >> i) & 1:
                        continue
                    c = next(cc for cc in covers
                             if (poset.down[cc] >> i) & 1)
                    draft.hat[(i, j)] = _compose_blocks(draft, c, j, i)
                if not _semigroup_covers_group(draft, j):
                    continue
            placed = True
            break
        if not placed:
            _zero_out(draft, j)
    groups = dict(draft.group)
    kinds_out = dict(draft.kind)
    maps = {}
    for (i, j), block in draft.hat.items():
        iid, jid = poset.ids[i], poset.ids[j]
        gi = groups[iid]
        gj = groups[jid]
        src_free = kinds_out[iid] == "free"
        if src_free:
            c = tuple(block[r][0] for r in range(gj.dim)) if gj.dim else ()
            h = [row[1:] for row in block] if gj.dim else []
            maps[(iid, jid)] = GroupHom(gi, gj, h, c=c)
        else:
            maps[(iid, jid)] = GroupHom(gi, gj, block, c=None)
    return System.assemble(poset, kinds_out, groups, maps)


def random_element(monoid, rng, level=3):
    """Support uniform over lower sets; unit levels in 1..level; group
    coordinates uniform in torsion and bounded on free ranks."""
    supports = monoid.system.poset.lower_sets()
    mask = supports[rng.randrange(len(supports))]
    data = monoid.support_data(mask)
    vec = [0] * data.total
    sysj = monoid.system
    for i in data.idxs:
        g = sysj.groups[i]
        off = data.offset[i]
        if sysj.is_free[i]:
            maximal = bool((data.max_mask >> i) & 1)
            if maximal:
                n = rng.randint(1, level)
            else:
                n = 0 if rng.random() < 0.5 else rng.randint(1, level)
            vec[off] = n
            if n:
                _fill_group(rng, g, vec, off + 1, level)
        else:
            _fill_group(rng, g, vec, off, level)
    return monoid.make(mask, vec)


def _fill_group(rng, g, vec, off, level):
    for r in range(g.rank):
        vec[off + r] = rng.randint(-level, level)
    for t, d in enumerate(g.torsion):
        vec[off + g.rank + t] = rng.randrange(d)


def random_equal_sums(monoid, rng, planted=True, tries=60):
    """(x1, x2, y1, y2) with x1 + x2 = y1 + y2.

    Planted: draw a square of four elements and read off the row/column
    sums, so the precondition holds by construction.  Otherwise rejection
    sample two random pairs with equal sums.
    """
    if planted:
        z = [random_element(monoid, rng) for _ in range(4)]
        x1 = monoid.add(z[0], z[1])
        x2 = monoid.add(z[2], z[3])
        y1 = monoid.add(z[0], z[2])
        y2 = monoid.add(z[1], z[3])
        return x1, x2, y1, y2
    for _ in range(tries):
        x1 = random_element(monoid, rng)
        x2 = random_element(monoid, rng)
        y1 = random_element(monoid, rng)
        total = monoid.add(x1, x2)
        z = monoid.leq(y1, total)
        if z is not None:
            return x1, x2, y1, z
    return None

"""Finitely generated abelian groups in invariant-factor form.

A group is Z^rank + Z/d1 + ... + Z/dk with 2 <= d1 | d2 | ... | dk.
Elements are plain int tuples (free coordinates first, then torsion
coordinates reduced to canonical residues); this module supplies the
arithmetic, subgroup/quotient presentations and membership decisions.
"""

from . import intlin
from .intlin import mat_mul, mat_vec, smith, solve_linear


class FgGroup:
    __slots__ = ("rank", "torsion")

    def __init__(self, rank=0, torsion=()):
        torsion = tuple(int(d) for d in torsion)
        assert rank >= 0
        assert all(d >= 2 for d in torsion)
        for a, b in zip(torsion, torsion[1:]):
            assert b % a == 0, "torsion must form a divisibility chain"
        self.rank = rank
        self.torsion = torsion

    @property
    def dim(self):
        return self.rank + len(self.torsion)

    def moduli(self):
        return (0,) * self.rank + self.torsion

    @property
    def is_trivial(self):
        return self.rank == 0 and not self.torsion

    def order(self):
        """Group order, or None when infinite."""
        if self.rank:
            return None
        n = 1
        for d in self.torsion:
            n *= d
        return n

    def canon(self, coords):
        coords = tuple(coords)
        assert len(coords) == self.dim, (coords, self)
        out = list(coords[:self.rank])
        for v, d in zip(coords[self.rank:], self.torsion):
            out.append(v % d)
        return tuple(out)

    def zero(self):
        return (0,) * self.dim

    def add(self, u, v):
        return self.canon(a + b for a, b in zip(u, v))

    def neg(self, u):
        return self.canon(-a for a in u)

    def sub(self, u, v):
        return self.canon(a - b for a, b in zip(u, v))

    def scale(self, n, u):
        return self.canon(n * a for a in u)

    def basis(self):
        d = self.dim
        return [tuple(1 if i == j else 0 for j in range(d)) for i in range(d)]

    def semigroup_generators(self):
        """Generators of the whole group as a semigroup with identity.

        Free directions need both signs; each torsion generator suffices on
        its own (d-fold sums wrap to the inverse).  The trivial group keeps
        its zero so the family is nonempty.
        """
        if self.is_trivial:
            return [self.zero()]
        gens = []
        for e in self.basis()[:self.rank]:
            gens.append(e)
            gens.append(self.neg(e))
        gens.extend(self.basis()[self.rank:])
        return gens

    def elements(self, free_bound=0):
        """All elements; free coordinates range over [-free_bound, free_bound]."""
        ranges = [range(-free_bound, free_bound + 1)] * self.rank + \
                 [range(d) for d in self.torsion]
        out = [()]
        for r in ranges:
            out = [t + (v,) for t in out for v in r]
        return out

    def __eq__(self, other):
        return (isinstance(other, FgGroup) and self.rank == other.rank
                and self.torsion == other.torsion)

    def __hash__(self):
        return hash((self.rank, self.torsion))

    def __repr__(self):
        parts = ["Z"] * self.rank + [f"Z/{d}" for d in self.torsion]
        return "FgGroup(" + (" + ".join(parts) if parts else "0") + ")"


TRIVIAL = FgGroup(0, ())


class GroupHom:
    """Homomorphism out of M_src into G_dst.

    With c absent the source is the group `src` itself and the map is g -> h*g.
    With c present the source is the semigroup N x src and the map is
    (n, g) -> n*c + h*g; the same formula with n in Z is its unique extension
    to the Grothendieck group Z x src.
    """

    __slots__ = ("src", "dst", "h", "c")

    def __init__(self, src, dst, h, c=None):
        self.src = src
        self.dst = dst
        rows = []
        for r, row in enumerate(h):
            assert len(row) == src.dim
            if r >= dst.rank:
                d = dst.torsion[r - dst.rank]
                rows.append(tuple(v % d for v in row))
            else:
                rows.append(tuple(row))
        assert len(rows) == dst.dim
        self.h = tuple(rows)
        self.c = None if c is None else dst.canon(c)

    def validate(self):
        """Check the matrix respects the source torsion."""
        bad = []
        for t, d in enumerate(self.src.torsion):
            col = self.src.rank + t
            for r in range(self.dst.dim):
                v = d * self.h[r][col]
                md = 0 if r < self.dst.rank else self.dst.torsion[r - self.dst.rank]
                if (md and v % md) or (not md and v):
                    bad.append(f"torsion generator {t} of source not respected")
                    break
        return bad

    def apply_group(self, g):
        return self.dst.canon(mat_vec([list(r) for r in self.h], list(g)))

    def apply(self, x):
        """Apply to x in M_src: (n, g) when c is present, else g."""
        if self.c is None:
            return self.apply_group(x)
        n, g = x
        img = self.apply_group(g)
        return self.dst.canon(n * c + v for c, v in zip(self.c, img))

    def apply_hat(self, u):
        """Apply the Grothendieck extension to hat coordinates of the source.

        For a semigroup source the hat coordinates are (n,) + g with n in Z.
        The image always lies in G_dst (no leading coordinate added here).
        """
        if self.c is None:
            return self.apply_group(u)
        return self.apply((u[0], tuple(u[1:])))

    def is_zero(self):
        zero_c = self.c is None or all(v == 0 for v in self.c)
        return zero_c and all(all(v == 0 for v in row) for row in self.h)

    def __eq__(self, other):
        return (isinstance(other, GroupHom) and self.src == other.src
                and self.dst == other.dst and self.h == other.h
                and self.c == other.c)

    def __hash__(self):
        return hash((self.src, self.dst, self.h, self.c))

    def __repr__(self):
        c = f", c={self.c}" if self.c is not None else ""
        return f"GroupHom({self.src}->{self.dst}, h={self.h}{c})"

    @classmethod
    def zero_hom(cls, src, dst, with_c):
        h = [[0] * src.dim for _ in range(dst.dim)]
        return cls(src, dst, h, c=dst.zero() if with_c else None)

    @classmethod
    def identity(cls, g):
        h = [[1 if i == j else 0 for j in range(g.dim)] for i in range(g.dim)]
        return cls(g, g, h)


def compose(second, first):
    """second o first, where first: M_i -> G_j and second: M_j -> G_k.

    Only the group part of `second` matters: images of `first` carry no
    leading semigroup coordinate.
    """
    assert first.dst == second.src
    h = intlin.mat_mul_shaped(second.h, first.h, second.dst.dim,
                              second.src.dim, first.src.dim)
    c = None
    if first.c is not None:
        c = second.apply_group(first.c)
    return GroupHom(first.src, second.dst, h, c)


def hom_equal_on_hat(f, g):
    """Do two homs out of the same M_src agree on all of the hat group?"""
    if f.src != g.src or f.dst != g.dst:
        return False
    return f.h == g.h and f.c == g.c


def membership(group, gens, v):
    """Integer coefficients expressing v in the subgroup generated by gens.

    Returns the coefficient vector or None when v lies outside.
    """
    v = group.canon(v)
    cols = [group.canon(g) for g in gens]
    A = [[col[i] for col in cols] for i in range(group.dim)]
    return solve_linear(A, list(v), list(group.moduli()))


def quotient_presentation(group, rels):
    """Present group/<rels> in invariant-factor form.

    Returns (Q, proj, lift): proj is a (Q.dim x group.dim) matrix taking
    ambient coordinates to quotient coordinates, lift a (group.dim x Q.dim)
    matrix with proj o lift = id on Q (up to torsion).
    """
    n = group.dim
    cols = [list(group.canon(r)) for r in rels]
    for i, d in enumerate(group.moduli()):
        if d:
            col = [0] * n
            col[i] = d
            cols.append(col)
    B = [[col[i] for col in cols] for i in range(n)]
    k = len(cols)
    sd = smith(B, n, k)
    uinv = intlin.invert_unimodular(sd.U)
    free_rows = []
    tors_rows = []
    for i in range(n):
        d = sd.diag[i] if i < len(sd.diag) else 0
        if d == 0:
            free_rows.append((i, 0))
        elif d >= 2:
            tors_rows.append((i, d))
    tors_rows.sort(key=lambda p: (p[1], p[0]))
    order = free_rows + tors_rows
    Q = FgGroup(len(free_rows), tuple(d for _, d in tors_rows))
    proj = [list(sd.U[i]) for i, _ in order]
    lift = [[uinv[r][i] for i, _ in order] for r in range(n)]
    return Q, proj, lift


def quotient_hom(group, rels):
    Q, proj, _ = quotient_presentation(group, rels)
    return Q, GroupHom(group, Q, proj)


def subgroup_presentation(group, gens):
    """Present the subgroup generated by gens in invariant-factor form.

    Returns (S, incl, express): incl is a (group.dim x S.dim) matrix of the
    images of the canonical S-generators; express maps an ambient element to
    its S-coordinates, or None if it is not in the subgroup.
    """
    gens = [group.canon(g) for g in gens]
    s = len(gens)
    n = group.dim
    cols = [list(g) for g in gens]
    for i, d in enumerate(group.moduli()):
        if d:
            col = [0] * n
            col[i] = d
            cols.append(col)
    A = [[col[i] for col in cols] for i in range(n)]
    sol = intlin.solve_with_kernel(A, [0] * n, n, len(cols))
    _, kernel = sol
    lam_rels = [k[:s] for k in kernel]
    Zs = FgGroup(s, ())
    S, proj, lift = quotient_presentation(Zs, lam_rels)
    gen_mat = [[g[i] for g in gens] for i in range(n)]  # n x s
    incl = mat_mul(gen_mat, lift)                       # n x S.dim

    def express(v):
        lam = membership(group, gens, v)
        if lam is None:
            return None
        return S.canon(mat_vec(proj, lam))

    return S, incl, express

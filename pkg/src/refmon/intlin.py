"""Exact integer linear algebra.

Smith and Hermite normal forms, linear/congruence solving, and a complete
constrained integer feasibility procedure.  Everything runs on Python ints
(arbitrary precision); matrices are plain row-major lists of lists.  No
floating point anywhere.
"""

from fractions import Fraction
from math import isqrt

from .errors import ResourceLimit

DEFAULT_BUDGET = 500_000


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    if not A:
        return []
    nb = len(B[0]) if B else 0
    out = []
    for row in A:
        acc = [0] * nb
        for a, brow in zip(row, B):
            if a:
                for j, b in enumerate(brow):
                    if b:
                        acc[j] += a * b
        out.append(acc)
    return out


def mat_mul_shaped(A, B, rows, mid, cols):
    """A @ B with explicit dimensions, safe when mid or cols is zero."""
    out = [[0] * cols for _ in range(rows)]
    for i in range(rows):
        Ai = A[i]
        for t in range(mid):
            a = Ai[t]
            if a:
                Bt = B[t]
                row = out[i]
                for j in range(cols):
                    row[j] += a * Bt[j]
    return out


def mat_vec(A, x):
    return [sum(a * v for a, v in zip(row, x)) for row in A]


def transpose(A):
    return [list(col) for col in zip(*A)] if A else []


def xgcd(a, b):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0."""
    s, next_s = 1, 0
    t, next_t = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        s, next_s = next_s, s - q * next_s
        t, next_t = next_t, t - q * next_t
        g, next_g = next_g, g - q * next_g
    if g < 0:
        s, t, g = -s, -t, -g
    return g, s, t


def det(A):
    """Exact determinant by fraction-free Bareiss elimination."""
    n = len(A)
    if n == 0:
        return 1
    M = [row[:] for row in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for r in range(k + 1, n):
                if M[r][k]:
                    M[k], M[r] = M[r], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def invert_unimodular(U):
    """Inverse of a unimodular integer matrix, returned with int entries."""
    n = len(U)
    M = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(U)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col])
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [v * inv for v in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    out = []
    for row in M:
        vals = row[n:]
        assert all(v.denominator == 1 for v in vals), "matrix is not unimodular"
        out.append([int(v) for v in vals])
    return out


class SmithDecomposition:
    """U*A*V = D with U, V unimodular and D = diag(d1 | d2 | ...), dk >= 0."""

    __slots__ = ("U", "D", "V", "diag", "rank", "rows", "cols")

    def __init__(self, U, D, V, diag):
        self.U = U
        self.D = D
        self.V = V
        self.diag = diag
        self.rank = sum(1 for d in diag if d)
        self.rows = len(D)
        self.cols = len(D[0]) if D else 0


def smith(A, rows=None, cols=None):
    """Smith normal form; deterministic for a fixed input.

    Pivot selection: minimal absolute value, ties broken by (row, col), to
    control entry growth.
    """
    m = len(A) if rows is None else rows
    n = (len(A[0]) if A else 0) if cols is None else cols
    D = [list(A[i]) if i < len(A) else [0] * n for i in range(m)]
    U = identity(m)
    V = identity(n)

    def swap_rows(r, s):
        if r != s:
            D[r], D[s] = D[s], D[r]
            U[r], U[s] = U[s], U[r]

    def swap_cols(c, s):
        if c != s:
            for row in D:
                row[c], row[s] = row[s], row[c]
            for row in V:
                row[c], row[s] = row[s], row[c]

    def negate_row(r):
        D[r] = [-v for v in D[r]]
        U[r] = [-v for v in U[r]]

    t = 0
    while t < m and t < n:
        piv = None
        best = None
        for r in range(t, m):
            for c in range(t, n):
                v = abs(D[r][c])
                if v and (best is None or v < best):
                    best = v
                    piv = (r, c)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            if D[t][t] < 0:
                negate_row(t)
            d = D[t][t]
            moved = False
            for r in range(t + 1, m):
                if D[r][t]:
                    q = D[r][t] // d
                    if q:
                        D[r] = [a - q * b for a, b in zip(D[r], D[t])]
                        U[r] = [a - q * b for a, b in zip(U[r], U[t])]
                    if D[r][t]:
                        swap_rows(t, r)
                        moved = True
                        break
            if moved:
                continue
            for c in range(t + 1, n):
                if D[t][c]:
                    q = D[t][c] // d
                    if q:
                        for row in D:
                            row[c] -= q * row[t]
                        for row in V:
                            row[c] -= q * row[t]
                    if D[t][c]:
                        swap_cols(t, c)
                        moved = True
                        break
            if moved:
                continue
            break
        # enforce the divisibility chain before moving on
        d = D[t][t]
        fixed = True
        for r in range(t + 1, m):
            row = D[r]
            for c in range(t + 1, n):
                if row[c] % d:
                    D[t] = [a + b for a, b in zip(D[t], D[r])]
                    U[t] = [a + b for a, b in zip(U[t], U[r])]
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            t += 1
    diag = [D[i][i] for i in range(min(m, n))]
    return SmithDecomposition(U, D, V, diag)


def hnf_rows(rows, width):
    """Row-style Hermite basis of the lattice generated by `rows`.

    Returns (basis, pivots): echelon rows with positive pivots, entries above
    each pivot reduced into [0, pivot).  Suitable for unique coset reduction.
    """
    basis = []   # kept sorted by pivot column
    pivots = []  # pivot column per basis row

    def insert(vec):
        v = list(vec)
        j = 0
        while j < width:
            if not v[j]:
                j += 1
                continue
            if j in pivots:
                k = pivots.index(j)
                r = basis[k]
                p = r[j]
                if v[j] % p == 0:
                    q = v[j] // p
                    v = [a - q * b for a, b in zip(v, r)]
                else:
                    g, s, t = xgcd(p, v[j])
                    new = [s * a + t * b for a, b in zip(r, v)]
                    v = [(p // g) * b - (v[j] // g) * a for a, b in zip(r, v)]
                    basis[k] = new
            else:
                if v[j] < 0:
                    v = [-a for a in v]
                pos = 0
                while pos < len(pivots) and pivots[pos] < j:
                    pos += 1
                pivots.insert(pos, j)
                basis.insert(pos, v)
                return
        return

    for vec in rows:
        insert(vec)
    # back-reduce entries above pivots for a canonical basis
    for k in range(len(basis) - 1, -1, -1):
        p = basis[k][pivots[k]]
        for r in range(k):
            q = basis[r][pivots[k]] // p
            if q:
                basis[r] = [a - q * b for a, b in zip(basis[r], basis[k])]
    return basis, pivots


def coset_reduce(vec, basis, pivots):
    """Unique representative of vec modulo the lattice spanned by basis."""
    v = list(vec)
    for row, j in zip(basis, pivots):
        q = v[j] // row[j]
        if q:
            v = [a - q * b for a, b in zip(v, row)]
    return tuple(v)


def solve_with_kernel(A, b, rows=None, cols=None):
    """All integer solutions of A*x = b as (x0, kernel_basis), or None.

    kernel_basis is a list of integer vectors spanning ker(A).
    """
    m = len(A) if rows is None else rows
    n = (len(A[0]) if A else 0) if cols is None else cols
    sd = smith(A, m, n)
    c = mat_vec(sd.U, list(b))
    y = [0] * n
    for i in range(m):
        d = sd.diag[i] if i < len(sd.diag) else 0
        if d:
            if c[i] % d:
                return None
            y[i] = c[i] // d
        elif c[i]:
            return None
    x0 = mat_vec(sd.V, y)
    kernel = []
    for j in range(n):
        d = sd.diag[j] if j < len(sd.diag) else 0
        if j >= m or d == 0:
            kernel.append([sd.V[i][j] for i in range(n)])
    return x0, kernel


def solve_linear(A, b, moduli):
    """Solve A*x = b rowwise, row i exactly (modulus 0) or mod moduli[i].

    Complete: returns a witness x or None precisely when no solution exists.
    """
    m = len(b)
    n = len(A[0]) if A else 0
    cols = [list(row) for row in A]
    extra = []
    for i, md in enumerate(moduli):
        if md:
            col = [0] * m
            col[i] = md
            extra.append(col)
    full = [row[:] + [e[i] for e in extra] for i, row in enumerate(cols)]
    sol = solve_with_kernel(full, b, m, n + len(extra))
    if sol is None:
        return None
    return sol[0][:n]


# ---------------------------------------------------------------------------
# Constrained feasibility
# ---------------------------------------------------------------------------

FREE = "free"
ZERO = "zero"
GE0 = "ge0"
GE1 = "ge1"
ZERO_OR_GE1 = "zero_or_ge1"


class CoordConstraint:
    """Per-coordinate solution constraint.

    ZERO_OR_GE1 carries the indices of a linked block that must vanish
    whenever the coordinate itself is 0.
    """

    __slots__ = ("kind", "linked")

    def __init__(self, kind, linked=()):
        self.kind = kind
        self.linked = tuple(linked)

    def __repr__(self):
        if self.kind == ZERO_OR_GE1 and self.linked:
            return f"CoordConstraint({self.kind}, linked={self.linked})"
        return f"CoordConstraint({self.kind})"


def free_c():
    return CoordConstraint(FREE)


def zero_c():
    return CoordConstraint(ZERO)


def ge0_c():
    return CoordConstraint(GE0)


def ge1_c():
    return CoordConstraint(GE1)


def zero_or_ge1_c(linked=()):
    return CoordConstraint(ZERO_OR_GE1, linked)


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n):
        self.left = n

    def spend(self, k=1):
        self.left -= k
        if self.left < 0:
            raise ResourceLimit("feasibility node budget exhausted")


def _box_bound(C, d):
    """Certified box for integer solutions of C*t >= d.

    Via the slack/split reduction to a nonnegative system and the
    Borosh-Treybig bound, any solvable system has a solution whose
    coordinates are bounded by the maximal absolute minor of the augmented
    matrix; a Hadamard product over row norms dominates that minor.
    """
    bound = 1
    for row, rhs in zip(C, d):
        n2 = 2 * sum(v * v for v in row) + rhs * rhs + 1
        bound *= isqrt(n2) + 1
    return max(bound, 4)


def _ceil_div(a, b):
    return -((-a) // b)


def _floor_div(a, b):
    return a // b


def _propagate(C, d, intervals):
    """Tighten per-variable intervals using one-row implied bounds."""
    m = len(intervals)
    for _ in range(3 * m + 12):
        changed = False
        for row, rhs in zip(C, d):
            lo_sum = 0
            hi_sum = 0
            for a, (lo, hi) in zip(row, intervals):
                if a > 0:
                    lo_sum += a * lo
                    hi_sum += a * hi
                elif a < 0:
                    lo_sum += a * hi
                    hi_sum += a * lo
            if hi_sum < rhs:
                return None
            for j, a in enumerate(row):
                if not a:
                    continue
                lo, hi = intervals[j]
                rest_hi = hi_sum - (a * hi if a > 0 else a * lo)
                if a > 0:
                    nlo = _ceil_div(rhs - rest_hi, a)
                    if nlo > lo:
                        intervals[j] = (nlo, hi)
                        changed = True
                else:
                    nhi = _floor_div(rhs - rest_hi, a)
                    if nhi < hi:
                        intervals[j] = (lo, nhi)
                        changed = True
                lo, hi = intervals[j]
                if lo > hi:
                    return None
        if not changed:
            break
    return intervals


def _candidates(lo, hi):
    """Integers of [lo, hi] ordered by absolute value, positives first."""
    if lo > hi:
        return
    if lo > 0:
        yield from range(lo, hi + 1)
    elif hi < 0:
        yield from range(hi, lo - 1, -1)
    else:
        yield 0
        k = 1
        while k <= hi or -k >= lo:
            if k <= hi:
                yield k
            if -k >= lo:
                yield -k
            k += 1


def _int_feasible(C, d, budget):
    """Find t in Z^m with C*t >= d; complete.

    A unimodular change of basis (from the Smith form of C) confines the
    constraints to rank-many coordinates, so the search runs in the
    essential dimension; the remaining directions are free and set to 0.
    The box on the searched coordinates is the certified Borosh-Treybig
    style bound, so a within-box search is a complete decision.
    """
    m = len(C[0]) if C else 0
    rows = len(C)
    sd = smith(C, rows, m)
    r = sd.rank
    C2 = [[sum(C[i][k] * sd.V[k][j] for k in range(m)) for j in range(r)]
          for i in range(rows)]
    box = _box_bound(C2, d)
    intervals = [(-box, box)] * r
    s = _search(C2, d, intervals, budget)
    if s is None:
        return None
    return [sum(sd.V[k][j] * s[j] for j in range(r)) for k in range(m)]


def _search(C, d, intervals, budget):
    budget.spend()
    intervals = _propagate(C, d, list(intervals))
    if intervals is None:
        return None
    undecided = [j for j, (lo, hi) in enumerate(intervals) if lo < hi]
    if not undecided:
        t = [lo for lo, _ in intervals]
        ok = all(sum(a * v for a, v in zip(row, t)) >= rhs
                 for row, rhs in zip(C, d))
        return t if ok else None
    # branch on the tightest undecided variable; candidate values by |v|
    j = min(undecided, key=lambda k: (intervals[k][1] - intervals[k][0], k))
    lo, hi = intervals[j]
    for v in _candidates(lo, hi):
        budget.spend()
        sub = list(intervals)
        sub[j] = (v, v)
        res = _search(C, d, sub, budget)
        if res is not None:
            return res
    return None


def feasible_constrained(A, b, moduli, constraints, budget=DEFAULT_BUDGET):
    """Witness x with A*x = b (rowwise mod moduli) meeting the constraints.

    Complete decision: returns a witness, or None iff no solution exists.
    ZERO_OR_GE1 coordinates are handled by a finite case split (zero branch
    first); the residual system is parameterized by the solution lattice and
    decided by bounded branch and bound inside a certified box.

    Raises ResourceLimit when the node budget runs out; that outcome is
    never reported as None.
    """
    m = len(b)
    n = len(constraints)
    bud = _Budget(budget)
    flex = [j for j, c in enumerate(constraints) if c.kind == ZERO_OR_GE1]
    exhausted = False

    for split in range(1 << len(flex)):
        # bit 0 = zero branch (tried first: lowest index varies fastest)
        zero_cols = set()
        ge1_cols = set()
        ge0_cols = set()
        for j, c in enumerate(constraints):
            if c.kind == ZERO:
                zero_cols.add(j)
            elif c.kind == GE1:
                ge1_cols.add(j)
            elif c.kind == GE0:
                ge0_cols.add(j)
        for pos, j in enumerate(flex):
            if (split >> pos) & 1:
                ge1_cols.add(j)
            else:
                zero_cols.add(j)
                zero_cols.update(constraints[j].linked)
        keep = [j for j in range(n) if j not in zero_cols]
        b2 = list(b)
        for j in ge1_cols:
            for i in range(m):
                if A[i][j]:
                    b2[i] -= A[i][j]
        cols = [[A[i][j] for j in keep] for i in range(m)]
        extra = 0
        for i, md in enumerate(moduli):
            if md:
                for r in range(m):
                    cols[r].append(md if r == i else 0)
                extra += 1
        try:
            sol = solve_with_kernel(cols, b2, m, len(keep) + extra)
            if sol is None:
                continue
            x0, kernel = sol
            C = []
            dvec = []
            for pos, j in enumerate(keep):
                if j in ge1_cols or j in ge0_cols:
                    C.append([k[pos] for k in kernel])
                    dvec.append(-x0[pos])
            if not C:
                t = [0] * len(kernel)
            else:
                live = [any(row[c] for row in C) for c in range(len(kernel))]
                Cl = [[row[c] for c in range(len(kernel)) if live[c]] for row in C]
                tl = _int_feasible(Cl, dvec, bud)
                if tl is None:
                    continue
                t = []
                it = iter(tl)
                for c in range(len(kernel)):
                    t.append(next(it) if live[c] else 0)
        except ResourceLimit:
            exhausted = True
            continue
        xk = list(x0)
        for coef, k in zip(t, kernel):
            if coef:
                xk = [a + coef * kv for a, kv in zip(xk, k)]
        x = [0] * n
        for pos, j in enumerate(keep):
            x[j] = xk[pos] + (1 if j in ge1_cols else 0)
        _check_witness(A, b, moduli, constraints, x)
        return x
    if exhausted:
        raise ResourceLimit("feasibility budget exhausted before a decision")
    return None


def _check_witness(A, b, moduli, constraints, x):
    for i, row in enumerate(A):
        lhs = sum(a * v for a, v in zip(row, x))
        if moduli[i]:
            assert (lhs - b[i]) % moduli[i] == 0, "witness violates congruence"
        else:
            assert lhs == b[i], "witness violates equation"
    for j, c in enumerate(constraints):
        v = x[j]
        if c.kind == ZERO:
            assert v == 0
        elif c.kind == GE1:
            assert v >= 1
        elif c.kind == GE0:
            assert v >= 0
        elif c.kind == ZERO_OR_GE1:
            assert v == 0 or v >= 1
            if v == 0:
                assert all(x[k] == 0 for k in c.linked), "linked block nonzero"

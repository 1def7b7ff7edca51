"""Exact integer linear algebra over arbitrary-precision integers.

Provides Smith normal form with unimodular transforms, integer kernels
and cokernel invariants, canonical (Hermite echelon) lattices with
decidable equality and membership, and the ascending eventual-kernel
chain used by the homology zero-test. No floating point anywhere;
intermediate entries can blow up during reduction, which is why Python
integers are mandatory.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ChainLimitExceeded


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix, row-major entries."""

    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError("entry count does not match shape")

    @classmethod
    def from_rows(cls, rows):
        rows = [list(r) for r in rows]
        n = len(rows[0]) if rows else 0
        if any(len(r) != n for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), n, tuple(x for r in rows for x in r))

    @classmethod
    def identity(cls, n):
        return cls(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols, (0,) * (rows * cols))

    def get(self, i, j):
        return self.entries[i * self.cols + j]

    def row(self, i):
        return list(self.entries[i * self.cols:(i + 1) * self.cols])

    def to_rows(self):
        return [self.row(i) for i in range(self.rows)]

    def transpose(self):
        return IntMatrix(self.cols, self.rows,
                         tuple(self.get(i, j) for j in range(self.cols) for i in range(self.rows)))

    def mul(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        orows = other.to_rows()
        for i in range(self.rows):
            ri = self.row(i)
            acc = [0] * other.cols
            for k, a in enumerate(ri):
                if a:
                    rk = orows[k]
                    for j in range(other.cols):
                        acc[j] += a * rk[j]
            out.append(acc)
        return IntMatrix.from_rows(out) if out else IntMatrix.zeros(0, other.cols)

    def mul_vector(self, v):
        if len(v) != self.cols:
            raise ValueError("shape mismatch")
        return [sum(self.get(i, j) * v[j] for j in range(self.cols)) for i in range(self.rows)]

    def diagonal(self):
        return [self.get(i, i) for i in range(min(self.rows, self.cols))]


def determinant(m: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant of non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = m.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _min_abs_entry(a, t, rows, cols):
    """Position of the absolutely smallest nonzero entry in the (t,t) tail."""
    best = None
    for i in range(t, rows):
        for j in range(t, cols):
            v = a[i][j]
            if v != 0 and (best is None or abs(v) < abs(best[2])):
                best = (i, j, v)
                if abs(v) == 1:
                    return best
    return best


def smith_normal_form(m: IntMatrix):
    """Return (U, D, V) with U*m*V = D, U and V unimodular.

    D is diagonal with nonnegative entries d1 | d2 | ... . Pivots are
    chosen with minimal absolute value to curb coefficient growth;
    correctness does not depend on that choice.
    """
    r, c = m.rows, m.cols
    a = m.to_rows()
    u = IntMatrix.identity(r).to_rows()
    v = IntMatrix.identity(c).to_rows()

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row[dst] += q * row[src]
        for j in range(c):
            a[dst][j] += q * a[src][j]
        for j in range(r):
            u[dst][j] += q * u[src][j]

    def add_col(dst, src, q):
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(r, c):
        pos = _min_abs_entry(a, t, r, c)
        if pos is None:
            break
        i, j, _ = pos
        if i != t:
            swap_rows(t, i)
        if j != t:
            swap_cols(t, j)
        if a[t][t] < 0:
            negate_row(t)
        dirty = False
        for i in range(t + 1, r):
            if a[i][t] != 0:
                add_row(i, t, -(a[i][t] // a[t][t]))
                if a[i][t] != 0:
                    dirty = True
        for j in range(t + 1, c):
            if a[t][j] != 0:
                add_col(j, t, -(a[t][j] // a[t][t]))
                if a[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # divisibility: pivot must divide every remaining entry
        p = a[t][t]
        fix = None
        for i in range(t + 1, r):
            for j in range(t + 1, c):
                if a[i][j] % p != 0:
                    fix = i
                    break
            if fix is not None:
                break
        if fix is not None:
            add_row(t, fix, 1)
            continue
        t += 1

    d = IntMatrix.from_rows(a) if a else IntMatrix.zeros(0, c)
    um = IntMatrix.from_rows(u) if u else IntMatrix.zeros(0, 0)
    vm = IntMatrix.from_rows(v) if v else IntMatrix.zeros(0, 0)
    return um, d, vm


def cokernel_invariants(m: IntMatrix):
    """Invariants of Z^rows / im(m): (torsion entries > 1, free rank)."""
    _, d, _ = smith_normal_form(m)
    diag = d.diagonal()
    nonzero = [x for x in diag if x != 0]
    torsion = [x for x in nonzero if x > 1]
    return torsion, m.rows - len(nonzero)


@dataclass(frozen=True)
class Lattice:
    """Subgroup of Z^n in canonical row echelon (Hermite) form.

    The basis rows have positive pivots, entries above each pivot reduced
    into [0, pivot), and strictly increasing pivot columns. This form is
    unique for a given subgroup, so structural equality decides subgroup
    equality, which the eventual-kernel chain relies on.
    """

    ambient_dim: int
    basis: tuple

    @classmethod
    def zero(cls, ambient_dim):
        return cls(ambient_dim, ())

    @classmethod
    def full(cls, ambient_dim):
        return cls.from_vectors(ambient_dim,
                                [[1 if i == j else 0 for j in range(ambient_dim)]
                                 for i in range(ambient_dim)])

    @classmethod
    def from_vectors(cls, ambient_dim, vectors):
        rows = [list(v) for v in vectors if any(v)]
        for vec in rows:
            if len(vec) != ambient_dim:
                raise ValueError("vector of wrong length")
        pivot_row = 0
        for col in range(ambient_dim):
            # gcd-reduce the column below pivot_row to a single entry
            while True:
                live = [i for i in range(pivot_row, len(rows)) if rows[i][col] != 0]
                if not live:
                    break
                i0 = min(live, key=lambda i: abs(rows[i][col]))
                rows[pivot_row], rows[i0] = rows[i0], rows[pivot_row]
                done = True
                for i in range(pivot_row + 1, len(rows)):
                    if rows[i][col] != 0:
                        q = rows[i][col] // rows[pivot_row][col]
                        rows[i] = [x - q * y for x, y in zip(rows[i], rows[pivot_row])]
                        if rows[i][col] != 0:
                            done = False
                if done:
                    break
            if pivot_row < len(rows) and rows[pivot_row][col] != 0:
                if rows[pivot_row][col] < 0:
                    rows[pivot_row] = [-x for x in rows[pivot_row]]
                p = rows[pivot_row][col]
                for i in range(pivot_row):
                    q = rows[i][col] // p
                    if q:
                        rows[i] = [x - q * y for x, y in zip(rows[i], rows[pivot_row])]
                pivot_row += 1
        rows = [r for r in rows if any(r)]
        return cls(ambient_dim, tuple(tuple(r) for r in rows))

    @property
    def rank(self):
        return len(self.basis)

    def _pivots(self):
        out = []
        for row in self.basis:
            j = next(k for k, x in enumerate(row) if x != 0)
            out.append((j, row[j]))
        return out

    def contains(self, vector) -> bool:
        if len(vector) != self.ambient_dim:
            raise ValueError("vector of wrong length")
        v = list(vector)
        for row, (j, p) in zip(self.basis, self._pivots()):
            if v[j] % p != 0:
                return False
            q = v[j] // p
            if q:
                v = [x - q * y for x, y in zip(v, row)]
        return not any(v)


def kernel(m: IntMatrix) -> Lattice:
    """The full integer kernel {x : m*x = 0} in canonical basis."""
    if m.cols == 0:
        return Lattice.zero(0)
    if m.rows == 0:
        return Lattice.full(m.cols)
    _, d, v = smith_normal_form(m)
    diag = d.diagonal()
    rank = sum(1 for x in diag if x != 0)
    cols = []
    for j in range(m.cols):
        if j >= rank:
            cols.append([v.get(i, j) for i in range(m.cols)])
    return Lattice.from_vectors(m.cols, cols)


def preimage(m: IntMatrix, lat: Lattice) -> Lattice:
    """The lattice {z in Z^cols : m*z lies in lat}."""
    if lat.ambient_dim != m.rows:
        raise ValueError("lattice ambient dimension mismatch")
    if not lat.basis:
        return kernel(m)
    # solve m*z - B^T*t = 0 and project the kernel onto the z block
    rows = []
    for i in range(m.rows):
        rows.append(m.row(i) + [-b[i] for b in lat.basis])
    k = kernel(IntMatrix.from_rows(rows))
    return Lattice.from_vectors(m.cols, [vec[:m.cols] for vec in k.basis])


def restrict_to_zero_coords(lat: Lattice, coords) -> Lattice:
    """Sublattice of vectors whose listed coordinates all vanish."""
    coords = sorted(set(coords))
    if not coords or not lat.basis:
        return lat
    rows = [[b[c] for b in lat.basis] for c in coords]
    k = kernel(IntMatrix.from_rows(rows))
    vecs = []
    for t in k.basis:
        vecs.append([sum(t[i] * lat.basis[i][j] for i in range(len(lat.basis)))
                     for j in range(lat.ambient_dim)])
    return Lattice.from_vectors(lat.ambient_dim, vecs)


def eventual_kernel(push: IntMatrix, forbidden_coords, max_steps=None) -> Lattice:
    """Largest lattice of the chain V0 = {0}, V_{i+1} = {z : z|forbidden = 0, push*z in V_i}.

    A vector lies in the result iff iterated pushing annihilates it while
    keeping the forbidden coordinates zero at every step. Every stage is a
    saturated sublattice, so the chain stabilizes within ambient_dim + 1
    steps; the bound only guards against misuse.
    """
    if push.rows != push.cols:
        raise ValueError("push matrix must be square")
    dim = push.rows
    bound = max_steps if max_steps is not None else 4 * max(dim, 1)
    v = Lattice.zero(dim)
    for _ in range(bound + 1):
        w = restrict_to_zero_coords(preimage(push, v), forbidden_coords)
        if w == v:
            return v
        v = w
    raise ChainLimitExceeded(
        f"eventual-kernel chain not stable within {bound} steps")

"""Exact linear algebra over a number field.

MatrixK is an immutable n x n matrix of field elements.  The block LDU
factorization splits a matrix along a block composition into unit block
lower x block diagonal x unit block upper, exactly when every leading
principal minor at a block boundary is nonzero; a vanishing boundary minor
returns Absent (None) rather than pivoting, because pivoting would change
the Weyl component of the factorization.  The Bruhat cell of a matrix is
read off the rank profile of its leading submatrices, for the fixed
convention h in V^- . w . P (lower unipotent times w times upper Borel).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import Singular, ValidationError
from .numfield import FieldElement, NumberField
from .rootdata import RootSubset, WeylElement


class MatrixK:
    """Immutable square matrix with entries in one number field."""

    __slots__ = ("field", "n", "rows", "_det")

    def __init__(self, field: NumberField, rows):
        n = len(rows)
        conv = []
        for row in rows:
            if len(row) != n:
                raise ValidationError("matrix must be square")
            conv.append(tuple(x if isinstance(x, FieldElement)
                              else field.from_rational(x) for x in row))
        for row in conv:
            for x in row:
                if x.field is not field:
                    raise ValidationError("entries from a different field")
        self.field = field
        self.n = n
        self.rows = tuple(conv)
        self._det = None

    # -- constructors --

    @staticmethod
    def identity(field: NumberField, n: int) -> "MatrixK":
        return MatrixK(field, [[field.one if i == j else field.zero
                                for j in range(n)] for i in range(n)])

    @staticmethod
    def from_rational_rows(field: NumberField, rows) -> "MatrixK":
        return MatrixK(field, [[field.from_rational(Fraction(x)) for x in row]
                               for row in rows])

    # -- basics --

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __eq__(self, other):
        return (isinstance(other, MatrixK) and self.field is other.field
                and self.rows == other.rows)

    def __hash__(self):
        return hash((id(self.field), self.rows))

    def __repr__(self):
        body = "; ".join(", ".join(x.as_str() for x in row) for row in self.rows)
        return f"MatrixK[{body}]"

    def __mul__(self, other: "MatrixK") -> "MatrixK":
        if not isinstance(other, MatrixK):
            return NotImplemented
        if other.n != self.n or other.field is not self.field:
            raise ValidationError("size or field mismatch")
        z = self.field.zero
        n = self.n
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = z
                for k in range(n):
                    a = self.rows[i][k]
                    if not a.is_zero():
                        b = other.rows[k][j]
                        if not b.is_zero():
                            acc = acc + a * b
                row.append(acc)
            out.append(row)
        return MatrixK(self.field, out)

    def scale(self, c: FieldElement) -> "MatrixK":
        return MatrixK(self.field, [[c * x for x in row] for row in self.rows])

    def transpose(self) -> "MatrixK":
        return MatrixK(self.field,
                       [[self.rows[j][i] for j in range(self.n)]
                        for i in range(self.n)])

    def det(self) -> FieldElement:
        if self._det is None:
            self._det = _det_elim(self)
        return self._det

    def inverse(self) -> "MatrixK":
        n = self.n
        f = self.field
        aug = [list(self.rows[i]) + [f.one if j == i else f.zero
                                     for j in range(n)] for i in range(n)]
        for c in range(n):
            piv = next((r for r in range(c, n) if not aug[r][c].is_zero()), None)
            if piv is None:
                raise Singular("matrix is singular")
            aug[c], aug[piv] = aug[piv], aug[c]
            inv = aug[c][c].inverse()
            aug[c] = [inv * x for x in aug[c]]
            for r in range(n):
                if r != c and not aug[r][c].is_zero():
                    fct = aug[r][c]
                    aug[r] = [a - fct * b for a, b in zip(aug[r], aug[c])]
        return MatrixK(f, [row[n:] for row in aug])

    def is_monomial(self) -> bool:
        """Exactly one nonzero entry in every row and every column."""
        n = self.n
        rc = [0] * n
        cc = [0] * n
        for i in range(n):
            for j in range(n):
                if not self.rows[i][j].is_zero():
                    rc[i] += 1
                    cc[j] += 1
        return all(v == 1 for v in rc) and all(v == 1 for v in cc)

    def is_identity(self) -> bool:
        return self == MatrixK.identity(self.field, self.n)

    def submatrix(self, rows, cols) -> "MatrixK":
        sub = [[self.rows[i][j] for j in cols] for i in rows]
        return MatrixK(self.field, sub) if len(rows) == len(cols) else sub


def _det_elim(m: MatrixK) -> FieldElement:
    n = m.n
    f = m.field
    a = [list(r) for r in m.rows]
    det = f.one
    for c in range(n):
        piv = next((r for r in range(c, n) if not a[r][c].is_zero()), None)
        if piv is None:
            return f.zero
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det = det * a[c][c]
        inv = a[c][c].inverse()
        for r in range(c + 1, n):
            if not a[r][c].is_zero():
                fct = a[r][c] * inv
                for k in range(c, n):
                    a[r][k] = a[r][k] - fct * a[c][k]
    return det


def mat_mul(a: MatrixK, b: MatrixK) -> MatrixK:
    return a * b


def mat_inv(a: MatrixK) -> MatrixK:
    return a.inverse()


def mat_det(a: MatrixK) -> FieldElement:
    return a.det()


@dataclass(frozen=True)
class BlockLDU:
    """h = v_minus * levi * v_plus along the block pattern of subset."""
    v_minus: MatrixK
    levi: MatrixK
    v_plus: MatrixK
    subset: RootSubset

    def recompose(self) -> MatrixK:
        return self.v_minus * self.levi * self.v_plus


def block_ldu(h: MatrixK, subset: RootSubset) -> Optional[BlockLDU]:
    """Unique factorization h = v^- z v^+ for the block composition, when the
    leading principal minors at every block boundary are nonzero; None
    (Absent) otherwise.  No pivoting: a vanishing boundary minor is the
    answer, not an obstacle."""
    n = h.n
    if subset.n != n:
        raise ValidationError("subset size mismatch")
    f = h.field
    blocks = subset.blocks
    a = [list(r) for r in h.rows]
    vminus = [[f.one if i == j else f.zero for j in range(n)] for i in range(n)]
    # eliminate below each diagonal block, block column by block column
    for blk in blocks[:-1]:
        lo, hi = blk.start, blk.stop
        pivot = [row[lo:hi] for row in a[lo:hi]]
        inv = _invert_small(f, pivot)
        if inv is None:
            return None
        below = range(hi, n)
        for r in below:
            coefs = [a[r][lo + t] for t in range(hi - lo)]
            mult = [_dot(f, coefs, [inv[t][s] for t in range(hi - lo)])
                    for s in range(hi - lo)]
            if all(x.is_zero() for x in mult):
                continue
            for s in range(hi - lo):
                vminus[r][lo + s] = mult[s]
            for k in range(n):
                acc = a[r][k]
                for s in range(hi - lo):
                    acc = acc - mult[s] * a[lo + s][k]
                a[r][k] = acc
    # the last diagonal block must also be invertible (det h != 0 overall)
    last = blocks[-1]
    if _invert_small(f, [row[last.start:last.stop] for row in a[last.start:last.stop]]) is None:
        return None
    # now a = z * v_plus with z block diagonal, v_plus unit block upper
    levi = [[f.zero] * n for _ in range(n)]
    vplus = [[f.one if i == j else f.zero for j in range(n)] for i in range(n)]
    for blk in blocks:
        lo, hi = blk.start, blk.stop
        pivot = [row[lo:hi] for row in a[lo:hi]]
        inv = _invert_small(f, pivot)
        for i in range(lo, hi):
            for j in range(lo, hi):
                levi[i][j] = a[i][j]
        for j in range(hi, n):
            col = [a[lo + t][j] for t in range(hi - lo)]
            sol = [_dot(f, [inv[s][t] for t in range(hi - lo)], col)
                   for s in range(hi - lo)]
            for s in range(hi - lo):
                vplus[lo + s][j] = sol[s]
    out = BlockLDU(MatrixK(f, vminus), MatrixK(f, levi), MatrixK(f, vplus), subset)
    assert out.recompose() == h, "block LDU recomposition failed"
    return out


def _invert_small(field, rows):
    """Inverse of a small block given as lists, or None if singular."""
    n = len(rows)
    aug = [list(rows[i]) + [field.one if j == i else field.zero
                            for j in range(n)] for i in range(n)]
    for c in range(n):
        piv = next((r for r in range(c, n) if not aug[r][c].is_zero()), None)
        if piv is None:
            return None
        aug[c], aug[piv] = aug[piv], aug[c]
        inv = aug[c][c].inverse()
        aug[c] = [inv * x for x in aug[c]]
        for r in range(n):
            if r != c and not aug[r][c].is_zero():
                fct = aug[r][c]
                aug[r] = [a - fct * b for a, b in zip(aug[r], aug[c])]
    return [row[n:] for row in aug]


def _dot(field, xs, ys):
    acc = field.zero
    for x, y in zip(xs, ys):
        if not x.is_zero() and not y.is_zero():
            acc = acc + x * y
    return acc


def _rank(field, rows) -> int:
    if not rows or not rows[0]:
        return 0
    a = [list(r) for r in rows]
    nr, nc = len(a), len(a[0])
    rank = 0
    for c in range(nc):
        piv = next((r for r in range(rank, nr) if not a[r][c].is_zero()), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = a[rank][c].inverse()
        for r in range(rank + 1, nr):
            if not a[r][c].is_zero():
                fct = a[r][c] * inv
                for k in range(c, nc):
                    a[r][k] = a[r][k] - fct * a[rank][k]
        rank += 1
        if rank == nr:
            break
    return rank


def bruhat_cell(h: MatrixK) -> WeylElement:
    """The unique w with h in V^- . w . P for the lower x upper Borel pair.

    Recovered from the rank profile r(i, j) = rank of the leading i x j
    submatrix, which both factors preserve: w maps column b to the first row
    index where the rank of the leading submatrix jumps.
    """
    n = h.n
    if h.det().is_zero():
        raise Singular("Bruhat cell needs an invertible matrix")
    f = h.field
    r = [[0] * (n + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            r[i][j] = _rank(f, [row[:j] for row in h.rows[:i]])
    perm = [0] * n
    for b in range(1, n + 1):
        for i in range(1, n + 1):
            if r[i][b] - r[i][b - 1] == 1:
                perm[b - 1] = i - 1
                break
    return WeylElement(tuple(perm))


def cell_membership(h: MatrixK, subset: RootSubset, w1: WeylElement,
                    w2: WeylElement) -> bool:
    """Whether h lies in w1 . V^- P . w2^{-1} for the subset's parabolic.

    Equivalent to the block LDU of w1^{-1} h w2 existing; invariant under
    replacing w1, w2 by other representatives of their cosets modulo the
    Levi's Weyl group."""
    f = h.field
    m1 = w1.matrix(f).inverse() * h * w2.matrix(f)
    return block_ldu(m1, subset) is not None


def unipotent_matrix(field, n: int, entries: dict) -> MatrixK:
    """Identity plus prescribed off-diagonal entries (exact)."""
    rows = [[field.one if i == j else field.zero for j in range(n)]
            for i in range(n)]
    for (i, j), v in entries.items():
        if i == j:
            raise ValidationError("diagonal entries are fixed at one")
        rows[i][j] = v if isinstance(v, FieldElement) else field.from_rational(v)
    return MatrixK(field, rows)


def diagonal_matrix(field, diag) -> MatrixK:
    n = len(diag)
    rows = [[field.zero] * n for _ in range(n)]
    for i, v in enumerate(diag):
        rows[i][i] = v if isinstance(v, FieldElement) else field.from_rational(v)
    return MatrixK(field, rows)

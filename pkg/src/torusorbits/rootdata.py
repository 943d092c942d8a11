"""Type A_{n-1} root combinatorics for SL_n.

Roots are matrix positions (i, j), i != j, zero-based.  A subset of the
simple roots is a bitmask over the n-1 cut points between consecutive rows;
the complement of the subset induces the block composition of n.  Weyl
elements are permutations carrying a signed monomial representative of
determinant one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import TooLarge, ValidationError

ENUM_CAP = 5


@dataclass(frozen=True)
class RootSubset:
    """Subset of the simple roots alpha_1..alpha_{n-1} of SL_n.

    simples holds the selected indices, 1-based: alpha_i separates rows
    i-1 and i (zero-based), so the missing indices cut n into blocks.
    """
    n: int
    simples: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("n must be positive")
        if not all(1 <= i <= self.n - 1 for i in self.simples):
            raise ValidationError("simple root index out of range")

    @staticmethod
    def make(n: int, simples) -> "RootSubset":
        return RootSubset(n, frozenset(simples))

    @staticmethod
    def empty(n: int) -> "RootSubset":
        return RootSubset(n, frozenset())

    @staticmethod
    def full(n: int) -> "RootSubset":
        return RootSubset(n, frozenset(range(1, n)))

    @property
    def composition(self):
        """Block sizes cut by the complement of the subset."""
        cuts = [i for i in range(1, self.n) if i not in self.simples]
        sizes = []
        prev = 0
        for c in cuts + [self.n]:
            sizes.append(c - prev)
            prev = c
        return tuple(sizes)

    @property
    def blocks(self):
        """Index ranges of each block."""
        out = []
        start = 0
        for b in self.composition:
            out.append(range(start, start + b))
            start += b
        return out

    def block_of(self):
        """Map row index -> block index."""
        out = [0] * self.n
        for k, blk in enumerate(self.blocks):
            for i in blk:
                out[i] = k
        return out

    def __le__(self, other):
        return self.n == other.n and self.simples <= other.simples

    def __str__(self):
        return "{" + ",".join(str(i) for i in sorted(self.simples)) + "}"

    @property
    def mask(self) -> int:
        return sum(1 << (i - 1) for i in self.simples)


@dataclass(frozen=True)
class WeylElement:
    """Permutation of 0..n-1 with a det-one signed monomial representative.

    perm[i] is the image of i.  The representative has a single nonzero
    entry per row and column: column i carries +-1 in row perm[i]; when the
    permutation is odd, the entry in row 0 is negated to reach det 1.
    """
    perm: tuple

    @property
    def n(self) -> int:
        return len(self.perm)

    def __call__(self, i: int) -> int:
        return self.perm[i]

    def inverse(self) -> "WeylElement":
        inv = [0] * self.n
        for i, p in enumerate(self.perm):
            inv[p] = i
        return WeylElement(tuple(inv))

    def compose(self, other: "WeylElement") -> "WeylElement":
        """self after other: (self*other)(i) = self(other(i))."""
        return WeylElement(tuple(self.perm[other.perm[i]] for i in range(self.n)))

    def sign(self) -> int:
        seen = [False] * self.n
        sgn = 1
        for i in range(self.n):
            if seen[i]:
                continue
            length = 0
            j = i
            while not seen[j]:
                seen[j] = True
                j = self.perm[j]
                length += 1
            if length % 2 == 0:
                sgn = -sgn
        return sgn

    def representative_entries(self):
        """(row, col, sign) triples of the det-one monomial representative."""
        n = self.n
        entries = []
        neg_row = 0 if self.sign() < 0 else None
        for col in range(n):
            row = self.perm[col]
            s = -1 if row == neg_row else 1
            entries.append((row, col, s))
        return entries

    def matrix(self, field):
        """Monomial MatrixK representative over the given field."""
        from .decomp import MatrixK
        n = self.n
        rows = [[field.zero] * n for _ in range(n)]
        for r, c, s in self.representative_entries():
            rows[r][c] = field.from_rational(Fraction(s))
        return MatrixK(field, rows)

    def is_identity(self) -> bool:
        return all(self.perm[i] == i for i in range(self.n))

    def __str__(self):
        return "[" + " ".join(str(p + 1) for p in self.perm) + "]"


@dataclass(frozen=True)
class ParabolicDescriptor:
    """A parabolic subgroup containing the diagonal torus, as a position set.

    positions holds the off-diagonal (i, j) whose root spaces lie in the
    subgroup; equality of descriptors is equality of position sets.  origin
    remembers the (subset, weyl, opposite) recipe used to build it.
    """
    n: int
    positions: frozenset
    origin: tuple = None

    def __eq__(self, other):
        return (isinstance(other, ParabolicDescriptor)
                and self.n == other.n and self.positions == other.positions)

    def __hash__(self):
        return hash((self.n, self.positions))

    def is_subgroup_of(self, other: "ParabolicDescriptor") -> bool:
        if self.n != other.n:
            raise ValidationError("descriptors of different sizes")
        return self.positions <= other.positions

    def check_pattern_closed(self) -> bool:
        """Closure under the multiplication pattern: (i,j),(j,k) => (i,k)."""
        pos = self.positions
        for (i, j) in pos:
            for (j2, k) in pos:
                if j == j2 and i != k and (i, k) not in pos:
                    return False
        return True

    def sorted_positions(self):
        return sorted(self.positions)


def _check_cap(n: int):
    if not 2 <= n <= ENUM_CAP:
        raise TooLarge(f"enumeration supports 2 <= n <= {ENUM_CAP}")


@lru_cache(maxsize=None)
def all_weyl(n: int):
    """All n! Weyl elements in lexicographic one-line order."""
    _check_cap(n)
    return tuple(WeylElement(p) for p in itertools.permutations(range(n)))


def identity_weyl(n: int) -> WeylElement:
    return WeylElement(tuple(range(n)))


def longest_element(n: int) -> WeylElement:
    """The order-reversing permutation; conjugation swaps the two Borels."""
    if n < 2:
        raise ValidationError("n must be at least 2")
    return WeylElement(tuple(n - 1 - i for i in range(n)))


def parabolic_descriptor(subset: RootSubset, w: WeylElement = None,
                         opposite: bool = False) -> ParabolicDescriptor:
    """Position set of w P w^{-1} for the standard (block upper triangular)
    parabolic of the subset, or its opposite; conjugation moves position
    (i, j) to (w(i), w(j))."""
    n = subset.n
    if w is None:
        w = identity_weyl(n)
    if w.n != n:
        raise ValidationError("Weyl element size mismatch")
    blk = subset.block_of()
    pos = set()
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            inside = blk[i] >= blk[j] if opposite else blk[i] <= blk[j]
            if inside:
                pos.add((w(i), w(j)))
    return ParabolicDescriptor(n, frozenset(pos),
                               origin=(subset, w, opposite))


def contains(p: ParabolicDescriptor, q: ParabolicDescriptor) -> bool:
    """Subset test on position sets: True when p sits inside q."""
    return p.is_subgroup_of(q)


def unipotent_positions(subset: RootSubset, sign: int = +1) -> frozenset:
    """Strictly block upper (sign +) or lower (sign -) positions."""
    blk = subset.block_of()
    out = set()
    for i in range(subset.n):
        for j in range(subset.n):
            if i == j:
                continue
            if sign > 0 and blk[i] < blk[j]:
                out.add((i, j))
            if sign < 0 and blk[i] > blk[j]:
                out.add((i, j))
    return frozenset(out)


def levi_positions(subset: RootSubset) -> frozenset:
    """Off-diagonal positions inside the block diagonal."""
    blk = subset.block_of()
    return frozenset((i, j) for i in range(subset.n) for j in range(subset.n)
                     if i != j and blk[i] == blk[j])


def weyl_stabilizer(subset: RootSubset):
    """The Weyl group of the Levi: permutations preserving each block."""
    _check_cap(subset.n)
    out = []
    for w in all_weyl(subset.n):
        blk = subset.block_of()
        if all(blk[w(i)] == blk[i] for i in range(subset.n)):
            out.append(w)
    return tuple(out)


@lru_cache(maxsize=None)
def _coset_reps_cached(n: int, simples: frozenset):
    subset = RootSubset(n, simples)
    stab = weyl_stabilizer(subset)
    seen = set()
    reps = []
    for w in all_weyl(n):          # lexicographic order: first hit is minimal
        key = frozenset(w.compose(u).perm for u in stab)
        if key in seen:
            continue
        seen.add(key)
        reps.append(w)
    return tuple(reps)


def coset_representatives(n: int, subset: RootSubset):
    """Lexicographically minimal representatives of the left cosets w W_subset."""
    _check_cap(n)
    return _coset_reps_cached(n, subset.simples)


def n_psi(n: int, subset: RootSubset) -> int:
    """Number of parabolic subgroups containing the torus conjugate to the
    standard one of the subset; counted by enumeration and cross-checked
    against n!/prod(block sizes factorial)."""
    _check_cap(n)
    distinct = {parabolic_descriptor(subset, w).positions for w in all_weyl(n)}
    import math
    formula = math.factorial(n)
    for b in subset.composition:
        formula //= math.factorial(b)
    if len(distinct) != formula:
        raise ValidationError("conjugate count disagrees with the closed form")
    return len(distinct)


def sum_n_psi_squared(n: int) -> int:
    """Sum over all subsets of the squared conjugate counts."""
    total = 0
    for mask in itertools.product([0, 1], repeat=n - 1):
        subset = RootSubset.make(n, [i + 1 for i, b in enumerate(mask) if b])
        total += n_psi(n, subset) ** 2
    return total


def all_subsets(n: int):
    """Every subset of the simple roots, by increasing size then mask."""
    subs = []
    for mask in itertools.product([0, 1], repeat=n - 1):
        subs.append(RootSubset.make(n, [i + 1 for i, b in enumerate(mask) if b]))
    subs.sort(key=lambda s: (len(s.simples), s.mask))
    return subs

"""Stratification of a locally divergent torus orbit closure at two places.

For components g1, g2 in SL_n(K) the closure of the diagonal-torus orbit
through (g1, g2) is a finite union of torus orbits, one for each pair of
parabolic subgroups (first a conjugate of a standard opposite parabolic,
second of the standard one, same block shape) whose attached Bruhat-type
cell contains g1 g2^{-1}.  This module enumerates those pairs, attaches an
explicit orbit representative to each, merges pairs whose representatives
coincide as exact points (the map pair -> orbit is not injective off the
generic locus; exact point equality is the decidable fragment of orbit
equality, and it is what collapses every monomial-quotient input to a
single record), orders the records into the closure poset, and checks the
counting bounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import List, Optional

from .decomp import MatrixK, block_ldu, cell_membership
from .errors import BoundViolated, MinimalNotBorel, TooLarge, ValidationError
from .numfield import NumberField
from .rootdata import (ParabolicDescriptor, RootSubset, all_subsets,
                       coset_representatives, n_psi, parabolic_descriptor,
                       sum_n_psi_squared)


@dataclass(frozen=True)
class OrbitInput:
    """Tuple of SL_n(K) components, one per place; the torus orbit through
    their class is automatically locally divergent for K-rational points."""
    components: tuple

    def __post_init__(self):
        comps = self.components
        if len(comps) < 2:
            raise ValidationError("need at least two components")
        n = comps[0].n
        f = comps[0].field
        for c in comps:
            if c.n != n or c.field is not f:
                raise ValidationError("components must share size and field")
            if not (c.det() == f.one):
                raise ValidationError("components must have determinant one")

    @property
    def n(self) -> int:
        return self.components[0].n

    @property
    def field(self) -> NumberField:
        return self.components[0].field

    @property
    def r(self) -> int:
        return len(self.components)


@dataclass(frozen=True)
class ParabolicPair:
    first: ParabolicDescriptor       # conjugate of the opposite parabolic
    second: ParabolicDescriptor      # conjugate of the standard parabolic
    subset: RootSubset
    witnesses: tuple                 # (w1, w2) coset representatives
    order_key: tuple = None          # (|subset|, mask, i1, i2)

    def key(self):
        return (tuple(sorted(self.first.positions)),
                tuple(sorted(self.second.positions)))

    def contains_pair(self, other: "ParabolicPair") -> bool:
        """Componentwise position-set containment of other inside self."""
        return (other.first.positions <= self.first.positions
                and other.second.positions <= self.second.positions)


@dataclass
class StratumRecord:
    """One torus orbit inside the closure.

    pairs collects every parabolic pair that lands on this exact
    representative point; off the generic locus a record can carry several.
    pair is the first of them in the deterministic order.
    """
    pairs: List[ParabolicPair]
    representative: tuple            # (MatrixK, MatrixK)
    is_closed: bool = False
    duplicate_of: Optional[int] = None   # advisory only

    @property
    def pair(self) -> ParabolicPair:
        return self.pairs[0]

    @property
    def levi_rank_marker(self) -> int:
        return min(len(p.subset.simples) for p in self.pairs)

    @property
    def is_top(self) -> bool:
        n = self.pairs[0].subset.n
        full = RootSubset.full(n).simples
        return any(p.subset.simples == full for p in self.pairs)


@dataclass
class StrataSet:
    input: OrbitInput
    records: List[StratumRecord]
    pair_count: int = 0                  # size of the raw pair set
    poset_edges: Optional[list] = None   # filled by closure_poset

    @property
    def n(self) -> int:
        return self.input.n

    def top_index(self) -> int:
        for i, rec in enumerate(self.records):
            if rec.is_top:
                return i
        raise ValidationError("missing top stratum")

    def all_pairs(self):
        return [p for rec in self.records for p in rec.pairs]


def enumerate_strata(g1: MatrixK, g2: MatrixK) -> StrataSet:
    """All strata of the orbit closure through (g1, g2).

    For every subset of the simple roots and every pair of Weyl coset
    representatives, the pair joins the set exactly when g1 g2^{-1} lies in
    the translated cell; the attached representative comes from the exact
    block factorization of the translated quotient.  Deterministic order:
    subset size, subset mask, then the two representative indices.
    """
    if g1.n != g2.n or g1.field is not g2.field:
        raise ValidationError("components must share size and field")
    inp = OrbitInput((g1, g2))
    n = g1.n
    if n > 5:
        raise TooLarge("strata enumeration supports n <= 5")
    f = g1.field
    h = g1 * g2.inverse()
    entries = []   # (pair, representative)
    for subset in all_subsets(n):
        reps = coset_representatives(n, subset)
        for i1, w1 in enumerate(reps):
            m1 = w1.matrix(f)
            m1_inv = m1.inverse()
            left = m1_inv * h
            for i2, w2 in enumerate(reps):
                m2 = w2.matrix(f)
                dec = block_ldu(left * m2, subset)
                if dec is None:
                    continue
                rep1 = m1 * dec.v_minus.inverse() * m1_inv * g1
                rep2 = m2 * dec.v_plus * m2.inverse() * g2
                pair = ParabolicPair(
                    first=parabolic_descriptor(subset, w1, opposite=True),
                    second=parabolic_descriptor(subset, w2, opposite=False),
                    subset=subset,
                    witnesses=(w1, w2),
                    order_key=(len(subset.simples), subset.mask, i1, i2),
                )
                entries.append((pair, (rep1, rep2)))
    # merge pairs whose representatives agree entry-exactly: same point,
    # hence provably the same orbit
    groups = {}
    order = []
    for pair, rep in entries:
        key = rep
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(pair)
    records = []
    for key in order:
        pairs = sorted(groups[key], key=lambda p: p.order_key)
        records.append(StratumRecord(pairs, key))
    records.sort(key=lambda r: r.pairs[0].order_key)
    out = StrataSet(inp, records, pair_count=len(entries))
    _mark_closed(out)
    return out


def _minimal_pairs(all_pairs):
    out = []
    for p in all_pairs:
        if not any(q is not p and p.contains_pair(q) and q.key() != p.key()
                   for q in all_pairs):
            out.append(p)
    return out


def _mark_closed(s: StrataSet) -> None:
    """A record is closed when it carries a pair minimal in the pair set."""
    pairs = s.all_pairs()
    minimal_keys = {p.key() for p in _minimal_pairs(pairs)}
    for rec in s.records:
        rec.is_closed = any(p.key() in minimal_keys for p in rec.pairs)


def closure_poset(s: StrataSet):
    """Transitive reduction of the containment order between records.

    Edge (i, j) means record j's pair sits strictly inside record i's, so
    the i-th orbit's closure contains the j-th orbit; the top record is
    always a source and never a target.
    """
    recs = s.records
    m = len(recs)
    full = [[False] * m for _ in range(m)]
    for i, j in itertools.permutations(range(m), 2):
        if any(pi.contains_pair(pj) and pi.key() != pj.key()
               for pi in recs[i].pairs for pj in recs[j].pairs):
            full[i][j] = True
    edges = []
    for i in range(m):
        for j in range(m):
            if not full[i][j]:
                continue
            if any(full[i][k] and full[k][j] for k in range(m)):
                continue
            edges.append((i, j))
    s.poset_edges = sorted(edges)
    return s.poset_edges


def closed_strata(s: StrataSet) -> List[StratumRecord]:
    """The closed orbits: records carrying a minimal pair.

    Every minimal pair must be a pair of Borel descriptors; anything else is
    a bug, never expected."""
    for p in _minimal_pairs(s.all_pairs()):
        if p.subset.simples:
            raise MinimalNotBorel(
                f"minimal pair has non-empty subset {p.subset}")
    return [rec for rec in s.records if rec.is_closed]


def is_orbit_closed(inp: OrbitInput) -> bool:
    """True exactly when every g_i g_r^{-1} is a monomial matrix."""
    last = inp.components[-1]
    last_inv = last.inverse()
    return all((c * last_inv).is_monomial() for c in inp.components[:-1])


@dataclass
class CountReport:
    n: int
    strata: int
    closed: int
    pair_count: int
    strata_bound: int
    closed_bound: int
    strata_equal: bool
    closed_equal: bool


def verify_counts(s: StrataSet) -> CountReport:
    """Check the counting bounds and report equality or slack."""
    n = s.n
    bound = sum_n_psi_squared(n)
    closed_bound = n_psi(n, RootSubset.empty(n)) ** 2
    n_strata = len(s.records)
    n_closed = sum(1 for r in s.records if r.is_closed)
    if n_strata > bound:
        raise BoundViolated(f"{n_strata} strata exceed the bound {bound}")
    if n_closed > closed_bound:
        raise BoundViolated(f"{n_closed} closed strata exceed {closed_bound}")
    if s.pair_count > bound:
        raise BoundViolated(f"{s.pair_count} pairs exceed the bound {bound}")
    return CountReport(n, n_strata, n_closed, s.pair_count, bound, closed_bound,
                       n_strata == bound, n_closed == closed_bound)


def genericity_check(h: MatrixK) -> bool:
    """Whether h lies in every Borel-pair translate of the open cell; when
    true the stratum count must reach the full bound."""
    n = h.n
    empty = RootSubset.empty(n)
    reps = coset_representatives(n, empty)
    for w1 in reps:
        for w2 in reps:
            if not cell_membership(h, empty, w1, w2):
                return False
    return True


def flag_duplicates(s: StrataSet, exponent_bound: int = 3) -> None:
    """Advisory duplicate-orbit detection beyond exact point equality.

    Two records are flagged when their representatives differ by an exact
    relation rep2 = tau . rep1 . gamma with gamma monomial over bounded unit
    powers and tau diagonal; sufficient but not necessary, so the flag is
    advisory only and orbit equality in general stays undecided.
    """
    recs = s.records
    f = s.input.field
    gammas = _unit_monomials(f, s.n, exponent_bound)
    for i, j in itertools.combinations(range(len(recs)), 2):
        if recs[j].duplicate_of is not None:
            continue
        a = recs[i].representative
        b = recs[j].representative
        for g in gammas:
            g_inv = g.inverse()
            if _is_diagonal(b[0] * g_inv * a[0].inverse()) and \
               _is_diagonal(b[1] * g_inv * a[1].inverse()):
                recs[j].duplicate_of = i
                break


def _is_diagonal(m: MatrixK) -> bool:
    return all(m.rows[i][j].is_zero()
               for i in range(m.n) for j in range(m.n) if i != j)


def _unit_monomials(field: NumberField, n: int, bound: int):
    """Monomial matrices with entries +-(unit power); the exponent box is
    |e| <= bound on the first declared unit, or plain signs without units."""
    from .rootdata import all_weyl
    units = field.units
    base = [field.one]
    if units:
        u = units[0]
        base = [u ** e for e in range(-bound, bound + 1)]
    out = []
    for w in all_weyl(n):
        for val in base:
            rows = [[field.zero] * n for _ in range(n)]
            for r, c, sgn in w.representative_entries():
                rows[r][c] = val if sgn > 0 else -val
            out.append(MatrixK(field, rows))
    return out


def summary_line(s: StrataSet) -> str:
    rep = verify_counts(s)
    h = s.input.components[0] * s.input.components[1].inverse()
    gen = genericity_check(h)
    return (f"strata={rep.strata} closed={rep.closed} "
            f"bound={rep.strata_bound} generic={str(gen).lower()}")

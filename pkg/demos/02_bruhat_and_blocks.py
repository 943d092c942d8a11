#!/usr/bin/env python3
"""Weyl combinatorics, Bruhat cells, and block factorizations.

The cell of a matrix is read off exactly; the block factorization exists
precisely when the boundary minors survive, and refusing to pivot is the
point: a vanishing minor is the answer.
"""

from fractions import Fraction

from torusorbits import decomp as dc
from torusorbits import numfield as nf
from torusorbits import rootdata as rd

K = nf.create_field([-2, 0, 1], declared_units=[[1, 1]], label="q-sqrt2")

print("Weyl group of SL_3: ", [str(w) for w in rd.all_weyl(3)])
print("longest element:", rd.longest_element(3))
S = rd.RootSubset.make(3, [1])
print(f"subset {{alpha_1}}: composition {S.composition}, "
      f"conjugates containing the torus: {rd.n_psi(3, S)}")
print("standard parabolic positions:",
      rd.parabolic_descriptor(S).sorted_positions())
print("radical positions:", sorted(rd.unipotent_positions(S, +1)))

# Bruhat cells for the fixed convention: lower unipotent times w times upper
h = dc.MatrixK.from_rational_rows(K, [[0, 1, 0], [-1, 0, 0], [0, 0, 1]])
print(f"\ncell of a monomial matrix: {dc.bruhat_cell(h)}")
anti = dc.MatrixK.from_rational_rows(K, [[0, 0, 1], [0, -1, 0], [1, 0, 0]])
print(f"cell of the antidiagonal: {dc.bruhat_cell(anti)} (the longest element)")

# block factorization along {alpha_1}: a 2+1 block pattern
g = dc.MatrixK.from_rational_rows(
    K, [[1, 0, 0], [1, 1, 0], [2, 3, 1]])
dec = dc.block_ldu(g, S)
print("\nblock factorization of a lower-unipotent matrix (pattern 2+1):")
print("  v_minus:", dec.v_minus)
print("  levi:   ", dec.levi)
print("  v_plus: ", dec.v_plus)
print("  recomposes exactly:", dec.recompose() == g)

# Absent: the rotation misses the big cell
rot = dc.MatrixK.from_rational_rows(K, [[0, 1], [-1, 0]])
print("\nrotation in the big cell of SL_2?",
      dc.block_ldu(rot, rd.RootSubset.empty(2)) is not None)

# the explicit two-factor identity, an exact-algebra stress test:
# u^-(b) u^+(a) = d u^+((1+ab)a) u^-((1+ab)^-1 b)
a = K.element([1, 1])
b = K.theta
w = K.one + a * b
lhs = dc.unipotent_matrix(K, 2, {(1, 0): b}) * \
    dc.unipotent_matrix(K, 2, {(0, 1): a})
rhs = dc.diagonal_matrix(K, [w.inverse(), w]) * \
    dc.unipotent_matrix(K, 2, {(0, 1): w * a}) * \
    dc.unipotent_matrix(K, 2, {(1, 0): w.inverse() * b})
print("\ntwo-factor identity holds coefficient-exactly:", lhs == rhs)
dec2 = dc.block_ldu(lhs, rd.RootSubset.empty(2))
print("and the factorization recovers (u^-(b), e, u^+(a)):",
      dec2.v_minus == dc.unipotent_matrix(K, 2, {(1, 0): b})
      and dec2.levi.is_identity()
      and dec2.v_plus == dc.unipotent_matrix(K, 2, {(0, 1): a}))

#!/usr/bin/env python3
"""Values of decomposable forms: density at three places, rigidity at two.

A non-rational binary form over a totally real cubic field spreads its
value vectors over any window as the height grows; the same machinery at
two places produces a visibly discrete norm-product spectrum instead.
"""

from fractions import Fraction

from torusorbits import forms as fm
from torusorbits import numfield as nf
from torusorbits import strata as st

K3 = nf.create_field([-1, -3, 0, 1], declared_units=[[0, 1, 0], [-2, 0, 1]],
                     label="cyclic-cubic")
half = K3.from_rational(Fraction(1, 2))
f = fm.make_form(K3, [
    [[1, 0], [0, 1]],
    [[1, 1], [0, 1]],
    [[1, 0], [1, 1]],
], scalars=[half] * 3)
print("non-rational over the cubic:", not fm.is_rational(f))

window = ((-5.0, 5.0),) * 3
for H in (4, 8, 16):
    scan = fm.window_scan(f, H, window)
    rep = fm.density_report(scan, window=window, eps=0.25)
    print(f"  H={H:3d}: {rep.points_in_window:7d} window points, "
          f"coverage {rep.coverage:.3f}")

# the group bridge: rows of the factor matrices, rescaled to det 1
K = nf.create_field([-2, 0, 1], declared_units=[[1, 1]], label="q-sqrt2")
fq = fm.make_form(K, [[[1, 1], [1, -1]], [[1, 2], [1, -1]]])
alphas, inp = fm.form_to_group(fq)
print("\ngroup bridge of a non-rational binary form over q-sqrt2:")
print("  scalars:", [a.as_str() for a in alphas])
s = st.enumerate_strata(*inp.components)
print("  strata of the attached orbit:", len(s.records),
      "(more than one: the orbit is not closed)")

# two places: the spectrum of norm products is discrete
f0 = fm.make_form(K, [[[1, 0], [0, 1]]] * 2)
for H in (8, 16, 32):
    rep = fm.norm_product_spectrum(f0, H, clip=10.0)
    print(f"  spectrum H={H}: values {[str(v) for v in rep.values]} "
          f"min gap {rep.min_gap}")

# variable reduction: three variables, two factors, hypothesis verified
f3 = fm.make_form(K, [[[1, 0, 0], [0, 1, 0]], [[1, 0, 1], [0, 1, 0]]])
red, phi = fm.reduce_variables(f3, seed=3)
print(f"\nreduced a 3-variable form to {red.n} variables; "
      f"substitution rows: {[[x.as_str() for x in row] for row in phi]}")

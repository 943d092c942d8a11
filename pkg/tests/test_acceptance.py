"""Acceptance suite: one test per criterion, each printing a verdict line.

Run with `pytest -v -s tests/test_acceptance.py` to see the lines; every
tolerance is pinned here, nothing is deferred to later calibration.
"""

import json
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from torusorbits import config as cfg
from torusorbits import decomp as dc
from torusorbits import dynamics as dy
from torusorbits import forms as fm
from torusorbits import numfield as nf
from torusorbits import rootdata as rd
from torusorbits import strata as st

from conftest import random_element, random_sl


def report(num, ok, detail):
    line = f"ACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line, flush=True)
    assert ok, line


# -- 1: stratification counts -----------------------------------------------------


def test_acceptance_1_counts(Ksqrt2):
    t0 = time.monotonic()
    s2 = st.enumerate_strata(
        dc.MatrixK.from_rational_rows(Ksqrt2, [[1, 1], [1, 2]]),
        dc.MatrixK.identity(Ksqrt2, 2))
    t2 = time.monotonic() - t0
    c2 = st.verify_counts(s2)
    t0 = time.monotonic()
    s3 = st.enumerate_strata(
        dc.MatrixK.from_rational_rows(
            Ksqrt2, [[Fraction(1, 2)] * 3, [1, 2, 4], [1, 3, 9]]),
        dc.MatrixK.identity(Ksqrt2, 3))
    t3 = time.monotonic() - t0
    c3 = st.verify_counts(s3)
    ok = (c2.strata, c2.closed) == (5, 4) and \
         (c3.strata, c3.closed) == (55, 36) and t2 < 10 and t3 < 10
    report(1, ok, f"SL2 {c2.strata}/{c2.closed} in {t2:.2f}s, "
                  f"SL3 {c3.strata}/{c3.closed} in {t3:.2f}s")


# -- 2: brute-force oracle equivalence ----------------------------------------------


def det_cofactor(field, rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    acc = field.zero
    for j in range(n):
        minor = [[rows[i][c] for c in range(n) if c != j]
                 for i in range(1, n)]
        term = rows[0][j] * det_cofactor(field, minor)
        acc = acc + term if j % 2 == 0 else acc - term
    return acc


def oracle_pairs(h):
    """Exhaustive membership by raw elimination (cofactor boundary minors)."""
    f = h.field
    n = h.n
    out = set()
    for subset in rd.all_subsets(n):
        reps = rd.coset_representatives(n, subset)
        for w1 in reps:
            m1i = w1.matrix(f).inverse()
            for w2 in reps:
                m = m1i * h * w2.matrix(f)
                cut = 0
                member = True
                for b in subset.composition[:-1]:
                    cut += b
                    sub = [[m.rows[i][j] for j in range(cut)]
                           for i in range(cut)]
                    if det_cofactor(f, sub).is_zero():
                        member = False
                        break
                if member:
                    out.add((subset.simples, w1.perm, w2.perm))
    return out


def test_acceptance_2_oracle(Ksqrt2):
    t0 = time.monotonic()
    rng = random.Random(101)
    i_mats = {n: dc.MatrixK.identity(Ksqrt2, n) for n in (2, 3)}
    checked = 0
    for n in (2, 3):
        for _ in range(25):
            g1 = random_sl(Ksqrt2, n, rng)
            s = st.enumerate_strata(g1, i_mats[n])
            got = {(p.subset.simples, p.witnesses[0].perm, p.witnesses[1].perm)
                   for rec in s.records for p in rec.pairs}
            want = oracle_pairs(g1 * i_mats[n].inverse())
            assert got == want
            checked += 1
    dt = time.monotonic() - t0
    report(2, checked == 50 and dt < 60,
           f"{checked} random inputs match the elimination oracle in {dt:.1f}s")


# -- 3: closedness equivalences ------------------------------------------------------


def test_acceptance_3_closedness(Ksqrt2):
    rng = random.Random(103)
    ok = True
    for _ in range(20):
        n = rng.choice((2, 3))
        q = random_sl(Ksqrt2, n, rng)
        w = rng.choice(rd.all_weyl(n))
        g1 = w.matrix(Ksqrt2) * q
        inp = st.OrbitInput((g1, q))
        s = st.enumerate_strata(g1, q)
        ok &= st.is_orbit_closed(inp) is True and len(s.records) == 1
    for _ in range(20):
        n = rng.choice((2, 3))
        q = random_sl(Ksqrt2, n, rng)
        i, j = rng.sample(range(n), 2)
        g1 = dc.unipotent_matrix(Ksqrt2, n, {(i, j): Ksqrt2.one}) * q
        inp = st.OrbitInput((g1, q))
        assert not (g1 * q.inverse()).is_monomial()
        s = st.enumerate_strata(g1, q)
        ok &= st.is_orbit_closed(inp) is False and len(s.records) > 1
    report(3, ok, "20 monomial inputs closed with one stratum, "
                  "20 non-monomial open with more")


# -- 4: the explicit two-factor identity ---------------------------------------------


def test_acceptance_4_identity(Ksqrt2):
    rng = random.Random(104)
    done = 0
    while done < 100:
        a = random_element(Ksqrt2, rng)
        b = random_element(Ksqrt2, rng)
        w = Ksqrt2.one + a * b
        if w.is_zero():
            continue
        lhs = dc.unipotent_matrix(Ksqrt2, 2, {(1, 0): b}) * \
            dc.unipotent_matrix(Ksqrt2, 2, {(0, 1): a})
        rhs = dc.diagonal_matrix(Ksqrt2, [w.inverse(), w]) * \
            dc.unipotent_matrix(Ksqrt2, 2, {(0, 1): w * a}) * \
            dc.unipotent_matrix(Ksqrt2, 2, {(1, 0): w.inverse() * b})
        assert lhs == rhs
        dec = dc.block_ldu(lhs, rd.RootSubset.empty(2))
        assert dec.v_minus == dc.unipotent_matrix(Ksqrt2, 2, {(1, 0): b})
        assert dec.levi == dc.MatrixK.identity(Ksqrt2, 2)
        assert dec.v_plus == dc.unipotent_matrix(Ksqrt2, 2, {(0, 1): a})
        done += 1
    report(4, done == 100, "100 random pairs reproduce the factorization "
                           "coefficient-exactly")


# -- 5: product formula ----------------------------------------------------------------


def test_acceptance_5_product_formula(Ksqrt2, Kcubic):
    rng = random.Random(105)
    worst = 0.0
    count = 0
    for K in (Ksqrt2, Kcubic):
        places = K.places(128)
        produced = 0
        while produced < 250:
            x = random_element(K, rng)
            if x.is_zero():
                continue
            enc = None
            for p in places:
                e = K.normalized_abs(x, p, max_width=Fraction(1, 2 ** 100))
                enc = e if enc is None else enc * e
            assert enc.contains(abs(nf.field_norm(x)))
            worst = max(worst, float(enc.width))
            produced += 1
            count += 1
    report(5, count == 500 and worst < 1e-20,
           f"500 elements enclosed, worst width {worst:.2e}")


# -- 6: unit closures ---------------------------------------------------------------------


def test_acceptance_6_unit_closures(Ksqrt2, Kcubic, Kquartic):
    r1 = nf.unit_closure_classify(Ksqrt2, 0)
    r2 = nf.unit_closure_classify(Kcubic, 0)
    idx = next(p.index for p in Kquartic.places() if not p.is_real)
    r3 = nf.unit_closure_classify(Kquartic, idx)
    stable = all(nf.unit_closure_classify(K, pl, precision_bits=256).classification
                 == base.classification
                 for K, pl, base in ((Ksqrt2, 0, r1), (Kcubic, 0, r2),
                                     (Kquartic, idx, r3)))
    ok = (r1.classification == "discrete"
          and r2.classification == "positive_reals"
          and r2.gap_statistic < 1e-2
          and r3.classification == "circle"
          and stable)
    report(6, ok, f"discrete / positive_reals (gap {r2.gap_statistic:.2e}) / "
                  f"circle, stable under doubled precision")


# -- 7: CM obstruction -----------------------------------------------------------------------


def test_acceptance_7_cm(Kzeta8):
    t0 = time.monotonic()
    f0 = fm.make_form(Kzeta8, [[[1, 0], [0, 1]]] * 2)
    sqrt2 = Kzeta8.element([0, 1, 0, -1])
    three = Kzeta8.element([3])
    ff = fm.make_form(Kzeta8, [[[1, sqrt2], [sqrt2, three]]] * 2)
    # 10^4 sampled points of the height-10 box plus engineered ray points
    base = fm.scan_values(f0, 10, sample=10_000, seed=7)
    rg = Kzeta8.cm_structure.relative_gen
    ray1 = Kzeta8.one + rg * Kzeta8.from_rational(3)
    ray2 = sqrt2 + rg * (Kzeta8.from_rational(3) * sqrt2)
    extra = np.array([list(ray1.coeffs) + list(ray2.coeffs),
                      list((rg * Kzeta8.one).coeffs) + list((rg * sqrt2).coeffs)],
                     dtype=np.int64)
    pts = np.concatenate([base.points, extra], axis=0)
    scan = fm.FormScan(f0, 10, pts, "sampled", fm._degenerate_mask(f0, pts))
    ok = True
    branches = {"ray": 0, "norm-product": 0}
    for form in (f0, ff):
        rep = fm.cm_obstruction_check(form, scan, index_l=2)
        ok &= rep.violations == [] and rep.checked >= 10_000
        ok &= rep.constant == Fraction(1, 256)
        for p in rep.points:
            branches[p.branch] += 1
            if p.branch == "norm-product":
                ok &= (p.norm_product * 2 ** 8).denominator == 1
                ok &= p.sine_gap is not None and p.sine_gap < 1e-10
    # numeric enclosure spot check of the per-place identity
    rng = random.Random(107)
    for idx in rng.sample(range(scan.npoints), 150):
        z = scan.coordinate(idx)
        w = fm.sine_identity_enclosure(Kzeta8, ff, z)
        ok &= w is not None and w < 1e-10
    dt = time.monotonic() - t0
    ok &= dt < 120 and branches["ray"] >= 2
    report(7, ok, f"{scan.npoints} points x 2 forms, zero violations, "
                  f"branches {branches}, {dt:.1f}s")


# -- 8: boundedness criterion suite --------------------------------------------------------


def ramp(n, steps, idx, s_rate, t_rate, others=0):
    def step(k, rate):
        e = [others * k] * (n - 1)
        e[idx] = rate * k
        return tuple(e)
    return dy.TorusPath(n, (Fraction(2), Fraction(2)),
                        (tuple(step(k, s_rate) for k in range(steps)),
                         tuple(step(k, t_rate) for k in range(steps))))


def full_ramp(n, steps, s_rate, t_rate):
    return dy.TorusPath(
        n, (Fraction(2), Fraction(2)),
        (tuple(tuple([s_rate * k] * (n - 1)) for k in range(steps)),
         tuple(tuple([t_rate * k] * (n - 1)) for k in range(steps))))


def test_acceptance_8_boundedness(Ksqrt2):
    K = Ksqrt2
    i2 = dc.MatrixK.identity(K, 2)
    i3 = dc.MatrixK.identity(K, 3)
    e2 = rd.RootSubset.empty(2)
    e3 = rd.RootSubset.empty(3)
    s31 = rd.RootSubset.make(3, [1])
    theta = K.theta
    u = K.element([1, 1])

    h2a = dc.unipotent_matrix(K, 2, {(1, 0): K.one}) * \
        dc.diagonal_matrix(K, [K.element([2]), K.element([Fraction(1, 2)])])
    h2b = dc.unipotent_matrix(K, 2, {(1, 0): theta}) * \
        dc.diagonal_matrix(K, [u, u.inverse()])
    h2t = dc.MatrixK.from_rational_rows(K, [[0, 1], [-1, -1]])
    h3 = dc.unipotent_matrix(K, 3, {(2, 0): K.one, (2, 1): theta})
    h3t = rd.longest_element(3).matrix(K) * \
        dc.unipotent_matrix(K, 3, {(0, 1): K.one})
    h3g = dc.MatrixK.from_rational_rows(
        K, [[Fraction(1, 2)] * 3, [1, 2, 4], [1, 3, 9]])

    N = 30
    C = Fraction(4)
    configs = [
        ("sl2-a TT", h2a, i2, e2, ramp(2, N, 0, 1, -1), True),
        ("sl2-a TF", h2a, i2, e2, ramp(2, N, 0, 2, -1), False),
        ("sl2-a FT", h2t, i2, e2, ramp(2, N, 0, 1, -1), False),
        ("sl2-a FF", h2t, i2, e2, ramp(2, N, 0, 2, -1), False),
        ("sl2-b TT", h2b, i2, e2, ramp(2, N, 0, 1, -1), True),
        ("sl2-b TF", h2b, i2, e2, ramp(2, N, 0, 2, -1), False),
        ("sl3-psi TT", h3, i3, s31, ramp(3, N, 1, 1, -1), True),
        ("sl3-psi TF", h3, i3, s31, ramp(3, N, 1, 2, -1), False),
        ("sl3-psi FT", h3t, i3, s31, ramp(3, N, 1, 1, -1), False),
        ("sl3-psi FF", h3t, i3, s31, ramp(3, N, 1, 2, -1), False),
        ("sl3-borel TT", h3g, i3, e3, full_ramp(3, N, 1, -1), True),
        ("sl3-borel FF", h3t, i3, e3, full_ramp(3, N, 2, -1), False),
    ]
    agree = 0
    details = []
    for name, g1, g2, subset, path, expect_bounded in configs:
        rep = dy.check_boundedness(g1, g2, subset, path, C, height=20,
                                   bounded_threshold=1e-2,
                                   decay_threshold=1e-3)
        assert rep.predicted_bounded == expect_bounded, name
        if rep.agrees:
            agree += 1
        details.append(f"{name}:{rep.trace.verdict}")
    report(8, agree == 12, f"12/12 configurations agree ({agree} ok)")


# -- 9: density trend and the two-place contrast ---------------------------------------------


def test_acceptance_9_density(Kcubic, Ksqrt2):
    half = Kcubic.from_rational(Fraction(1, 2))
    f = fm.make_form(Kcubic, [
        [[1, 0], [0, 1]],
        [[1, 1], [0, 1]],
        [[1, 0], [1, 1]],
    ], scalars=[half] * 3)
    assert not fm.is_rational(f)
    win = ((-5.0, 5.0),) * 3
    covs = []
    for H in (8, 16, 32):
        scan = fm.window_scan(f, H, win)
        covs.append(fm.density_report(scan, window=win, eps=0.25).coverage)
    increasing = covs[0] < covs[1] < covs[2]
    ok = increasing and covs[2] > 0.5
    # two-place contrast: the norm-product spectrum stays discrete
    f0 = fm.make_form(Ksqrt2, [[[1, 0], [0, 1]]] * 2)
    reps = [fm.norm_product_spectrum(f0, H, clip=10.0) for H in (8, 16, 32)]
    gaps = [r.min_gap for r in reps]
    mins = [r.min_value for r in reps]
    ok &= all(g == gaps[0] and g > 0 for g in gaps)
    ok &= all(m == mins[0] for m in mins)
    report(9, ok, f"coverage {covs[0]:.3f} -> {covs[1]:.3f} -> {covs[2]:.3f}; "
                  f"contrast spectrum gap {gaps[0]} stable, min {mins[0]} stable")


# -- 10: CLI determinism ------------------------------------------------------------------------


def test_acceptance_10_determinism(tmp_path, Ksqrt2):
    cfg.save_field(Ksqrt2, tmp_path / "field.json")
    cfg.save_matrix(dc.MatrixK.from_rational_rows(Ksqrt2, [[1, 1], [1, 2]]),
                    tmp_path / "g1.json")
    cmd = [sys.executable, "-m", "torusorbits.cli",
           "--field", str(tmp_path / "field.json"), "--seed", "11",
           "strata", "--n", "2", "--g1", str(tmp_path / "g1.json"),
           "--g2", "id"]
    outs = [subprocess.run(cmd, capture_output=True, check=True).stdout
            for _ in range(3)]
    cmd2 = [sys.executable, "-m", "torusorbits.cli",
            "--field", str(tmp_path / "field.json"), "--seed", "11",
            "units", "classify", "--place", "0"]
    outs2 = [subprocess.run(cmd2, capture_output=True, check=True).stdout
             for _ in range(3)]
    ok = len(set(outs)) == 1 and len(set(outs2)) == 1
    report(10, ok, "3 repeated runs byte-identical for two subcommands")

"""Divergence and boundedness diagnostics for torus orbits.

The systole of a point (t_v g_v) is the minimum over nonzero lattice
vectors xi in Z[theta]^n of the product over places of the sup-norm of the
embedded image (squared at complex places), restricted to a coefficient
height box.  Bounded below means the point stays in a fixed compact part of
the quotient; decay to zero witnesses divergence.  Paths of torus elements
are realized as exact powers of a per-place base so every root value is an
exact rational, which keeps the boundedness criterion checks exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from . import polyutil as pu
from .decomp import MatrixK, block_ldu, diagonal_matrix
from .errors import (CapExceeded, HypothesisViolated, MembershipFails,
                     ToleranceAmbiguous, ValidationError)
from .intervals import RInt
from .numfield import NumberField
from .rootdata import RootSubset, WeylElement
from .strata import OrbitInput

DIRECT_SCAN_CAP = 6_000_000


# -- horospherical data ------------------------------------------------------------


@dataclass(frozen=True)
class HorosphericalData:
    subset: RootSubset
    w_plus: frozenset
    w_minus: frozenset
    levi_positions: frozenset
    basis_permutation: WeylElement


def horospherical_data(moduli: Sequence, tolerance=Fraction(1, 10 ** 6)) -> HorosphericalData:
    """Contracted / expanded / centralized positions of a diagonal element.

    moduli: the absolute values of the diagonal entries at one place, as
    exact rationals (or floats).  Position (i, j) is expanding when
    |t_i/t_j| > 1 + tol, contracting below 1 - tol, and a Levi position
    when the ratio is certifiably 1; anything else raises.
    """
    n = len(moduli)
    vals = [Fraction(x) if not isinstance(x, float) else Fraction(x).limit_denominator(10 ** 12)
            for x in moduli]
    if any(v <= 0 for v in vals):
        raise ValidationError("moduli must be positive")
    tol = Fraction(tolerance)
    w_plus, w_minus, levi = set(), set(), set()
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ratio = vals[i] / vals[j]
            if ratio > 1 + tol:
                w_plus.add((i, j))
            elif ratio < 1 / (1 + tol):
                w_minus.add((i, j))
            elif ratio == 1:
                levi.add((i, j))
            else:
                raise ToleranceAmbiguous(
                    f"ratio at {(i, j)} is {float(ratio):.6g}: inside the "
                    "tolerance band but not exactly one")
    # sorting permutation: moduli descending; the element i goes to slot
    # perm(i), forming the standard form diag sorted large to small
    order = sorted(range(n), key=lambda i: (-vals[i], i))
    perm = [0] * n
    for slot, i in enumerate(order):
        perm[i] = slot
    w = WeylElement(tuple(perm))
    # equal-modulus blocks induce the subset: simple root k is inside when
    # slots k-1 and k carry equal moduli
    sorted_vals = [vals[i] for i in order]
    simples = {k for k in range(1, n) if sorted_vals[k - 1] == sorted_vals[k]}
    subset = RootSubset.make(n, simples)
    return HorosphericalData(subset, frozenset(w_plus), frozenset(w_minus),
                             frozenset(levi), w)


# -- torus paths --------------------------------------------------------------------


@dataclass(frozen=True)
class TorusPath:
    """Exponent schedules for the torus component at every place.

    schedules[v][k] is the tuple of n-1 simple-root exponents at step k;
    the realized diagonal at place v and step k has entries
    base_v^(n * e_i) for the unique trace-zero integer lift, so every root
    value is the exact rational base_v^(n * m_i).
    """
    n: int
    bases: tuple                 # one positive Fraction per place
    schedules: tuple             # schedules[v][k] = tuple of n-1 ints

    def __post_init__(self):
        if any(Fraction(b) <= 0 for b in self.bases):
            raise ValidationError("bases must be positive")
        steps = {len(s) for s in self.schedules}
        if len(steps) != 1:
            raise ValidationError("all places need the same number of steps")
        for sched in self.schedules:
            for step in sched:
                if len(step) != self.n - 1:
                    raise ValidationError("need n-1 exponents per step")

    @property
    def r(self) -> int:
        return len(self.schedules)

    @property
    def steps(self) -> int:
        return len(self.schedules[0])

    def diagonal_exponents(self, v: int, k: int):
        """Trace-zero integer exponent vector at place v, step k."""
        m = self.schedules[v][k]
        n = self.n
        e = [sum(m[j] for j in range(i, n - 1)) for i in range(n - 1)] + [0]
        s = sum(e)
        return tuple(n * ei - s for ei in e)

    def realize(self, k: int):
        """Per-place diagonal entries as exact Fractions (det 1)."""
        out = []
        for v in range(self.r):
            b = Fraction(self.bases[v])
            out.append(tuple(b ** e for e in self.diagonal_exponents(v, k)))
        return out

    def root_values(self, v: int, k: int):
        """|alpha_i(t)| for the simple roots, exact (= base^(n m_i))."""
        b = Fraction(self.bases[v])
        n = self.n
        return tuple(b ** (n * m) for m in self.schedules[v][k])

    @staticmethod
    def constant(n: int, r: int, steps: int, bases=None) -> "TorusPath":
        bases = bases or tuple(Fraction(2) for _ in range(r))
        zero = tuple([tuple([0] * (n - 1))] * steps)
        return TorusPath(n, tuple(Fraction(b) for b in bases),
                         tuple(zero for _ in range(r)))


# -- systole -----------------------------------------------------------------------


@dataclass
class SystoleStep:
    step: int
    value: float
    enclosure: tuple             # (lo, hi) floats of the certified value
    witness: tuple               # coefficient vector of ints (n * deg)


@dataclass
class SystoleTrace:
    steps: List[SystoleStep]
    height: int
    verdict: str                 # "bounded-below" | "decaying" | "inconclusive"
    bounded_margin: float
    final_value: float


def _embedding_matrices(field: NumberField, n: int):
    """Per place: float matrix mapping coefficient vectors to embeddings.

    Real place: (n, n*deg); complex place: complex (n, n*deg)."""
    deg = field.degree
    out = []
    for pl in field.places():
        if pl.is_real:
            row = np.array([float(pu.peval(pu.poly([0] * t + [1]), pl.region).mid)
                            if t else 1.0 for t in range(deg)])
            mat = np.zeros((n, n * deg))
            for j in range(n):
                mat[j, j * deg:(j + 1) * deg] = row
        else:
            vals = []
            acc = complex(1.0, 0.0)
            root = complex(float(pl.region.re.mid), float(pl.region.im.mid))
            for t in range(deg):
                vals.append(acc)
                acc *= root
            row = np.array(vals, dtype=complex)
            mat = np.zeros((n, n * deg), dtype=complex)
            for j in range(n):
                mat[j, j * deg:(j + 1) * deg] = row
        out.append(mat)
    return out


def _numeric_component(field: NumberField, g: MatrixK, v: int):
    pl = field.places()[v]
    if pl.is_real:
        return np.array([[float(pu.peval(x.coeff_poly(), pl.region).mid)
                          for x in row] for row in g.rows])
    def cval(x):
        b = pu.peval(x.coeff_poly(), pl.region)
        return complex(float(b.re.mid), float(b.im.mid))
    return np.array([[cval(x) for x in row] for row in g.rows], dtype=complex)


def systole(inp: OrbitInput, torus: Sequence[Sequence[Fraction]],
            height: int) -> Tuple[RInt, tuple]:
    """Minimum product of per-place sup-norms over the height box.

    torus: per place, the diagonal entries (exact rationals).  Returns the
    certified enclosure of the minimum and the witness coefficient vector.
    The scan runs in floats; the winner is re-evaluated exactly, and for
    two real places large boxes go through an exact-ellipsoid enumeration
    that provably covers every candidate that could beat the scan seed.
    """
    if height < 1:
        raise ValidationError("height must be at least 1")
    field = inp.field
    n = inp.n
    deg = field.degree
    dim = n * deg
    places = field.places()
    if len(torus) != len(places) or any(len(t) != n for t in torus):
        raise ValidationError("need one diagonal entry per matrix row per place")
    embs = _embedding_matrices(field, n)
    bmats = []
    for v in range(inp.r):
        gnum = _numeric_component(field, inp.components[v], v)
        tnum = np.diag([float(x) for x in torus[v]])
        bmats.append(tnum @ gnum @ embs[v])
    exps = [1 if pl.is_real else 2 for pl in places]

    total = (2 * height + 1) ** dim
    if total <= DIRECT_SCAN_CAP:
        witness = _direct_scan(bmats, exps, height, dim)
    elif inp.r == 2 and all(pl.is_real for pl in places):
        witness = _ellipsoid_scan(bmats, height, dim)
    else:
        raise CapExceeded(
            f"box of {total} points needs the two-real-place search path")
    enc = evaluate_product(inp, torus, witness)
    return enc, witness


def _value_array(bmats, exps, pts):
    acc = None
    for bmat, e in zip(bmats, exps):
        y = np.abs(pts @ bmat.T)
        u = y.max(axis=1)
        if e == 2:
            u = u * u
        acc = u if acc is None else acc * u
    return acc


def _direct_scan(bmats, exps, height, dim):
    rng = np.arange(-height, height + 1)
    best_val = math.inf
    best = None
    # chunk over the leading coordinate to bound memory
    tail = np.stack([g.ravel() for g in
                     np.meshgrid(*[rng] * (dim - 1), indexing="ij")], axis=1)
    for lead in rng:
        pts = np.concatenate([np.full((tail.shape[0], 1), lead), tail], axis=1)
        if lead == 0:
            pts = pts[np.any(pts != 0, axis=1)]
        vals = _value_array(bmats, exps, pts.astype(float))
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val = float(vals[i])
            best = tuple(int(x) for x in pts[i])
    return best


def _ellipsoid_scan(bmats, height, dim):
    """Exact-LDL Fincke-Pohst over a ladder of place weights (r = 2, real).

    Any candidate with product value p satisfies, for the ladder weight s
    nearest its own balance point, s^2 |y1|^2 + s^-2 |y2|^2 <= c n p with
    c = 3/sqrt(2); enumerating those ellipsoids intersected with the box
    therefore covers everything that could beat the seed minimum.
    """
    n = bmats[0].shape[0]
    seed_h = 2
    witness = _direct_scan(bmats, [1, 1], seed_h, dim)
    p_seed = float(_value_array(bmats, [1, 1],
                                np.array([witness], dtype=float))[0])
    # positive lower bounds on the per-place sup norms over the box
    sigma = [max(np.linalg.svd(b, compute_uv=False)[-1], 1e-300) / math.sqrt(n)
             for b in bmats]
    u1max = float(np.abs(bmats[0]).sum(axis=1).max()) * height + 1e-300
    u2max = float(np.abs(bmats[1]).sum(axis=1).max()) * height + 1e-300
    lo = max(sigma[1] ** 2 / p_seed, sigma[1] / u1max) / 16
    hi = min(p_seed / sigma[0] ** 2, u2max / sigma[0]) * 16
    # rational Gram matrices from exact rational embeddings are expensive;
    # float Gram + exact LDL of the rationalized Gram keeps the bounds safe
    g1 = bmats[0].T @ bmats[0]
    g2 = bmats[1].T @ bmats[1]
    radius_factor = 3.0 / math.sqrt(2.0) * n * 1.0001
    best = witness
    best_val = p_seed
    s2 = lo
    seen = {witness}
    while s2 <= hi * 1.0001:
        q = g1 * s2 + g2 / s2
        bound = radius_factor * best_val
        for cand in _fincke_pohst(q, bound, height):
            if cand in seen:
                continue
            seen.add(cand)
            val = float(_value_array(bmats, [1, 1],
                                     np.array([cand], dtype=float))[0])
            if val < best_val:
                best_val = val
                best = cand
        s2 *= math.sqrt(2.0)
    return best


def _fincke_pohst(q: np.ndarray, bound: float, height: int):
    """Integer vectors with x^T q x <= bound and |x|_inf <= height.

    LDL^T factorization over exact rationals of the (rationalized) float
    Gram matrix; the recursion uses floats with a small safety pad.  Only
    one representative of each +-x pair is emitted; 0 is skipped.
    """
    dim = q.shape[0]
    qr = [[Fraction(q[i, j]) for j in range(dim)] for i in range(dim)]
    diag, lower = _ldl(qr)
    if diag is None:
        return
    d = [float(x) for x in diag]
    lf = [[float(x) for x in row] for row in lower]
    pad = bound * (1 + 1e-9) + 1e-12
    x = [0] * dim
    # recursion from the last coordinate down
    def rec(k, rem, shift_terms):
        if k < 0:
            cand = tuple(x)
            if any(cand):
                yield cand
            return
        center = -sum(lf[j][k] * x[j] for j in range(k + 1, dim))
        if d[k] <= 0:
            return
        half = math.sqrt(max(rem, 0.0) / d[k])
        lo = max(-height, math.ceil(center - half - 1e-9))
        hi = min(height, math.floor(center + half + 1e-9))
        for xv in range(lo, hi + 1):
            x[k] = xv
            used = d[k] * (xv - center) ** 2
            yield from rec(k - 1, rem - used, None)
        x[k] = 0

    # canonical sign: highest nonzero coordinate positive
    for cand in rec(dim - 1, pad, None):
        top = next(i for i in reversed(range(dim)) if cand[i])
        if cand[top] > 0:
            yield cand
        else:
            yield tuple(-c for c in cand)


def _ldl(qr):
    """LDL^T of a symmetric positive definite rational matrix."""
    n = len(qr)
    lower = [[Fraction(0)] * n for _ in range(n)]
    diag = [Fraction(0)] * n
    for j in range(n):
        s = qr[j][j] - sum(lower[j][k] ** 2 * diag[k] for k in range(j))
        if s <= 0:
            return None, None
        diag[j] = s
        lower[j][j] = Fraction(1)
        for i in range(j + 1, n):
            t = qr[i][j] - sum(lower[i][k] * lower[j][k] * diag[k]
                               for k in range(j))
            lower[i][j] = t / s
    return diag, lower


def evaluate_product(inp: OrbitInput, torus, witness) -> RInt:
    """Exact re-evaluation of the product value at a witness vector."""
    field = inp.field
    n = inp.n
    deg = field.degree
    xi = [field.element([int(c) for c in witness[j * deg:(j + 1) * deg]])
          for j in range(n)]
    places = field.places()
    acc = RInt(1)
    for v in range(inp.r):
        g = inp.components[v]
        w = []
        for i in range(n):
            entry = field.zero
            for j in range(n):
                if not g.rows[i][j].is_zero() and not xi[j].is_zero():
                    entry = entry + g.rows[i][j] * xi[j]
            w.append(field.from_rational(torus[v][i]) * entry)
        sup = None
        for entry in w:
            m = field.normalized_abs(entry, places[v],
                                     max_width=Fraction(1, 2 ** 64)) \
                if not entry.is_zero() else RInt(0)
            if places[v].is_real:
                pass
            sup = m if sup is None else RInt(max(sup.lo, m.lo), max(sup.hi, m.hi))
        acc = acc * sup
    return acc


def run_path(inp: OrbitInput, path: TorusPath, height: int,
             bounded_threshold: float = 1e-2,
             decay_threshold: float = 1e-3) -> SystoleTrace:
    """Systole along the realized path with a threshold verdict."""
    if path.r != inp.r or path.n != inp.n:
        raise ValidationError("path shape does not match the input")
    steps = []
    for k in range(path.steps):
        torus = path.realize(k)
        enc, wit = systole(inp, torus, height)
        steps.append(SystoleStep(k, float(enc.mid),
                                 (float(enc.lo), float(enc.hi)), wit))
    values = [s.value for s in steps]
    final = values[-1]
    margin = min(values)
    if margin >= bounded_threshold:
        verdict = "bounded-below"
    elif final <= decay_threshold:
        verdict = "decaying"
    else:
        verdict = "inconclusive"
    return SystoleTrace(steps, height, verdict, margin, final)


# -- boundedness criterion -----------------------------------------------------------


@dataclass
class BoundednessReport:
    membership: bool             # (i): g1 g2^{-1} in V^- P for the subset
    products_bounded: bool       # (ii): root products stay in a fixed band
    product_band: tuple          # (inf, sup) over steps and roots, floats
    trace: SystoleTrace
    predicted_bounded: bool
    observed_bounded: bool
    agrees: bool


def check_boundedness(g1: MatrixK, g2: MatrixK, subset: RootSubset,
                      path: TorusPath, C: Fraction, height: int = 20,
                      cprime_cap: Fraction = Fraction(10 ** 6),
                      bounded_threshold: float = 1e-2,
                      decay_threshold: float = 1e-3) -> BoundednessReport:
    """Exact criterion check against the observed systole trace.

    The path must conform to the hypothesis shape: at the first place every
    root value stays above 1/C; at the second place the root values off the
    subset decay to zero while those on the subset stay inside (1/C, C).
    The report carries (i) exact cell membership, (ii) whether the products
    |alpha(s)|_1 |alpha(t)|_2 stay within a band, and the trace verdict;
    the criterion says bounded exactly when (i) and (ii) hold.
    """
    C = Fraction(C)
    if C <= 1:
        raise ValidationError("C must exceed 1")
    if path.r != 2:
        raise HypothesisViolated("the criterion concerns two places")
    n = path.n
    simple_idx = list(range(1, n))
    # hypothesis conformance, exact
    for k in range(path.steps):
        svals = path.root_values(0, k)
        for val in svals:
            if not val > 1 / C:
                raise HypothesisViolated("first place root value fell below 1/C")
        tvals = path.root_values(1, k)
        for i, val in zip(simple_idx, tvals):
            if i in subset.simples and not (1 / C < val < C):
                raise HypothesisViolated("subset root left the (1/C, C) band")
    for i_pos, i in enumerate(simple_idx):
        if i in subset.simples:
            continue
        seq = [path.root_values(1, k)[i_pos] for k in range(path.steps)]
        if any(b > a for a, b in zip(seq, seq[1:])) or not seq[-1] < min(1 / C, seq[0] / 4):
            raise HypothesisViolated(
                f"root {i} at the second place does not decay")

    h = g1 * g2.inverse()
    membership = block_ldu(h, subset) is not None

    prods = []
    for k in range(path.steps):
        sv = path.root_values(0, k)
        tv = path.root_values(1, k)
        prods.extend(a * b for a, b in zip(sv, tv))
    sup = max(prods)
    inf = min(prods)
    products_bounded = sup < cprime_cap and inf > 1 / cprime_cap

    inp = OrbitInput((g1, g2))
    trace = run_path(inp, path, height, bounded_threshold, decay_threshold)
    predicted = membership and products_bounded
    observed = trace.verdict == "bounded-below"
    return BoundednessReport(membership, products_bounded,
                             (float(inf), float(sup)), trace, predicted,
                             observed, predicted == observed)


# -- limit prediction -----------------------------------------------------------------


def predicted_limit(inp: OrbitInput, subset: RootSubset, w1: WeylElement,
                    w2: WeylElement):
    """The representative of the stratum the path drifts into.

    Exactly the orbit representative attached by the stratification: from
    w1^{-1} h w2 = v^- z v^+, the pair (w1 (v^-)^{-1} w1^{-1} g1,
    w2 v^+ w2^{-1} g2).  Raises MembershipFails when the cell misses h.
    """
    if inp.r != 2:
        raise ValidationError("limit prediction handles two places")
    g1, g2 = inp.components
    f = inp.field
    h = g1 * g2.inverse()
    m1 = w1.matrix(f)
    m2 = w2.matrix(f)
    dec = block_ldu(m1.inverse() * h * m2, subset)
    if dec is None:
        raise MembershipFails("the quotient misses the requested cell")
    rep1 = m1 * dec.v_minus.inverse() * m1.inverse() * g1
    rep2 = m2 * dec.v_plus * m2.inverse() * g2
    return rep1, rep2


def limit_approach_distances(inp: OrbitInput, subset: RootSubset,
                             w1: WeylElement, w2: WeylElement,
                             path: TorusPath,
                             unit_exponent_bound: int = 48,
                             gamma_denominator_cap: int = 1000) -> List[float]:
    """Distance from the moving point to the predicted limit orbit per step.

    At each step the point (t_v g_v) Gamma is compared against tau . rep for
    the best correction: gamma runs over torus-conjugated unit diagonals
    that are exactly integral (a bounded stabilizer search), tau over the
    diagonal group (entry-ratio candidates).  Failure to find an integral
    gamma falls back to the raw unit-balanced distance.
    """
    field = inp.field
    n = inp.n
    rep = predicted_limit(inp, subset, w1, w2)
    f = field
    g1, g2 = inp.components
    m2 = w2.matrix(f)
    h = g1 * g2.inverse()
    dec = block_ldu(w1.matrix(f).inverse() * h * m2, subset)
    base_point = m2 * dec.v_plus * m2.inverse() * g2   # = rep2
    base_inv = base_point.inverse()

    units = field.units
    gammas = [(MatrixK.identity(f, n), None)]
    if units:
        u = units[0]
        patterns = []
        for i in range(n - 1):
            vec = [0] * n
            vec[i], vec[i + 1] = 1, -1
            patterns.append(vec)
        for pat in patterns:
            for j in range(-unit_exponent_bound, unit_exponent_bound + 1):
                if j == 0:
                    continue
                dvals = [u ** (j * p) for p in pat]
                dmat = diagonal_matrix(f, dvals)
                gam = base_inv * dmat.inverse() * base_point
                if _is_integral(gam) and _denominator_ok(gam, gamma_denominator_cap):
                    gammas.append((gam, (pat, j)))
    rep_num = [_numeric_component(field, rep[v], v) for v in range(2)]
    out = []
    for k in range(path.steps):
        torus = path.realize(k)
        best = math.inf
        for gam, _tag in gammas:
            dist = 0.0
            for v in range(2):
                moving = _numeric_component(field, inp.components[v] * gam, v)
                moving = np.diag([float(x) for x in torus[v]]) @ moving
                dist = max(dist, _diag_orbit_distance(moving, rep_num[v]))
            best = min(best, dist)
        out.append(best)
    return out


def _is_integral(m: MatrixK) -> bool:
    return all(x.is_integral() for row in m.rows for x in row)


def _denominator_ok(m: MatrixK, cap: int) -> bool:
    return all(abs(c.numerator) <= cap ** 3 for row in m.rows for x in row
               for c in x.coeffs)


def _diag_orbit_distance(moving: np.ndarray, target: np.ndarray) -> float:
    """Upper bound on the distance from moving to the diagonal orbit of
    target: scale each target row to match its first sizeable entry of
    moving and measure the residual."""
    n = moving.shape[0]
    scale = []
    for i in range(n):
        ratios = [moving[i, j] / target[i, j] for j in range(n)
                  if abs(target[i, j]) > 1e-12]
        if not ratios:
            return float(np.abs(target - moving).max())
        scale.append(ratios[0])
    tau = np.diag(scale)
    return float(np.abs(tau @ target - moving).max())

"""Deformed de Rham complex on the circle for generalized Morse functions.

A circle function is a trigonometric-polynomial derivative with classified
critical data (nondegenerate minima/maxima plus birth-death points).  The
conjugated difference d(t) on a staggered grid gives supersymmetric factored
Laplacians Delta0 = D^T D on nodes and Delta1 = D D^T on midpoints; their
low spectra split into the small / per-birth-death large / very large
clusters whose counts, t^{2/3} scaling, and localized bases are probed here.

The difference operator discretizes e^{-tf} d e^{tf} by exact conjugation:
(Du)_{i+1/2} = (e^{t(f_{i+1}-f_{i+1/2})} u_{i+1} - e^{t(f_i-f_{i+1/2})} u_i)/h.
This keeps the discrete kernel equal to the sampled e^{-tf} exactly and makes
summation by parts exact, which the chain-map comparisons depend on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.optimize

from . import eigensolve, oscillator1d
from .constants import load_constants
from .eigensolve import EigenPair, SymTridiag
from .errors import (AssumptionViolated, ClusterOverlap, DegenerateClassification,
                     DegenerateInput, GridTooCoarse, MeanZeroUnreachable,
                     NotAffinelySelfIndexable, ProjectionDegenerate)
from .logspace import LogValue, LogVector

TWO_PI = 2.0 * math.pi


# -- circle functions ----------------------------------------------------------

@dataclass(frozen=True)
class CriticalPoint:
    theta: float
    kind: str                  # "nd" | "bd"
    index: int                 # Morse index for nd; 0 for bd on the circle
    f_value: float
    a: float | None = None     # cubic coefficient, birth-death only


@dataclass(frozen=True)
class CircleFunction:
    """f' as a finite trigonometric polynomial, plus classified critical data.

    cos_coeffs[m], sin_coeffs[m] are the coefficients of cos(m theta) and
    sin(m theta) in f'; index 0 is unused (mean-zero derivative).  f itself
    is the exact antiderivative shifted by `offset`.
    """
    cos_coeffs: tuple[float, ...]
    sin_coeffs: tuple[float, ...]
    offset: float
    critical_points: tuple[CriticalPoint, ...]
    self_indexed: bool = False

    def key(self) -> tuple:
        return (self.cos_coeffs, self.sin_coeffs, self.offset)

    def _series(self, theta, c_fn, s_fn, power: int):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros_like(theta)
        for m in range(1, len(self.cos_coeffs)):
            c, s = self.cos_coeffs[m], self.sin_coeffs[m]
            fm = float(m) ** power
            if c:
                out += c * fm * c_fn(m * theta)
            if s:
                out += s * fm * s_fn(m * theta)
        return out

    def fprime(self, theta):
        return self._series(theta, np.cos, np.sin, 0)

    def f(self, theta):
        val = self._series(theta, np.sin, lambda x: -np.cos(x), -1)
        return val + self.offset

    def fpp(self, theta):
        return self._series(theta, lambda x: -np.sin(x), np.cos, 1)

    def fppp(self, theta):
        return self._series(theta, lambda x: -np.cos(x), lambda x: -np.sin(x), 2)

    @property
    def minima(self):
        return [p for p in self.critical_points if p.kind == "nd" and p.index == 0]

    @property
    def maxima(self):
        return [p for p in self.critical_points if p.kind == "nd" and p.index == 1]

    @property
    def bd_points(self):
        return [p for p in self.critical_points if p.kind == "bd"]

    def m_count(self, degree: int) -> int:
        return sum(1 for p in self.critical_points
                   if p.kind == "nd" and p.index == degree)

    def max_fprime(self) -> float:
        th = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
        return float(np.max(np.abs(self.fprime(th))))


def _wrap(theta: float) -> float:
    return theta % TWO_PI


def _raw_product(theta, simple, double):
    theta = np.asarray(theta, dtype=float)
    out = np.ones_like(theta)
    for z in simple:
        out = out * (2.0 * np.sin(0.5 * (theta - z)))
    for z in double:
        out = out * (4.0 * np.sin(0.5 * (theta - z)) ** 2)
    return out


def _fourier_coeffs(samples: np.ndarray, top: int):
    n = len(samples)
    spec = np.fft.rfft(samples) / n
    cos_c = [0.0] * (top + 1)
    sin_c = [0.0] * (top + 1)
    for m in range(1, top + 1):
        cos_c[m] = 2.0 * spec[m].real
        sin_c[m] = -2.0 * spec[m].imag
    return cos_c, sin_c, float(spec[0].real)


def build_circle_function(simple_zeros, double_zeros) -> CircleFunction:
    """Assemble a circle function from prescribed zero sets of f'.

    f' is the product of 2 sin((theta-z)/2) over simple zeros and
    4 sin^2((theta-z)/2) over double zeros, normalized so the top cosine
    harmonic has coefficient +1; the first simple zero is moved, if needed,
    to make f' mean-zero so that f closes up around the circle.
    """
    simple = [_wrap(z) for z in simple_zeros]
    double = [_wrap(z) for z in double_zeros]
    total = len(simple) + 2 * len(double)
    if total % 2 or total < 2 or not simple and double:
        if len(simple) == 0 and len(double) == 0:
            raise DegenerateInput("at least one critical point is required")
    if total % 2 or total < 2:
        raise DegenerateInput("zero count (doubles twice) must be even and >= 2")
    allz = simple + double
    if len(allz) != len(set(np.round(allz, 12))):
        raise DegenerateInput("zeros must be distinct")

    n_grid = 1024
    th = np.arange(n_grid) * (TWO_PI / n_grid)

    def mean_of(z0: float) -> float:
        return float(np.mean(_raw_product(th, [z0] + simple[1:], double)))

    if not simple:
        # all double zeros: f' has one sign, the mean cannot vanish
        raise MeanZeroUnreachable("no simple zero available to move")
    z0 = simple[0]
    m0 = mean_of(z0)
    others = sorted(_wrap(z - z0) for z in (simple[1:] + double))
    gap = min(others[0], TWO_PI - others[-1]) if others else TWO_PI
    window = 0.45 * gap
    if abs(m0) > 1e-13:
        lo, hi = z0 - window, z0 + window
        flo, fhi = mean_of(lo), mean_of(hi)
        if flo * fhi > 0:
            raise MeanZeroUnreachable(
                f"mean {m0:.3e} does not change sign within +-{window:.3f}")
        z0 = float(scipy.optimize.brentq(mean_of, lo, hi, xtol=1e-15))
    simple = [z0] + simple[1:]

    top = total // 2
    samples = _raw_product(th, simple, double)
    cos_c, sin_c, c0 = _fourier_coeffs(samples, top)
    if abs(c0) > 1e-10:
        raise MeanZeroUnreachable(f"residual mean {c0:.3e} after root-finding")
    lead = cos_c[top]
    if abs(lead) < 1e-9:
        lead = sin_c[top]
    cos_c = tuple(c / lead for c in cos_c)
    sin_c = tuple(s / lead for s in sin_c)

    proto = CircleFunction(cos_c, sin_c, 0.0, ())
    crits = []
    for z in sorted(simple):
        fpp = float(proto.fpp(z))
        if abs(fpp) < 1e-9:
            raise DegenerateClassification(f"|f''|={abs(fpp):.2e} at simple zero {z:.4f}")
        crits.append(CriticalPoint(z, "nd", 0 if fpp > 0 else 1,
                                   float(proto.f(z))))
    for z in sorted(double):
        fpp = float(proto.fpp(z))
        fppp = float(proto.fppp(z))
        if abs(fppp) < 1e-9:
            raise DegenerateClassification(
                f"|f''|={abs(fpp):.2e}, |f'''|={abs(fppp):.2e} at double zero {z:.4f}")
        crits.append(CriticalPoint(z, "bd", 0, float(proto.f(z)), a=fppp / 6.0))
    crits.sort(key=lambda p: p.theta)
    cf = CircleFunction(cos_c, sin_c, 0.0, tuple(crits))
    _check_distinct_a(cf)
    return cf


def _check_distinct_a(cf: CircleFunction):
    mags = sorted(abs(p.a) for p in cf.bd_points)
    for x, y in zip(mags, mags[1:]):
        if abs(x - y) < 1e-9 * max(x, y):
            raise DegenerateInput(
                "birth-death cubic coefficients must have distinct magnitudes")


def rescale(cf: CircleFunction, alpha: float, beta: float = 0.0,
            self_indexed: bool = False) -> CircleFunction:
    """alpha * f + beta; cubic coefficients scale by alpha."""
    if alpha == 0:
        raise DegenerateInput("alpha must be nonzero")
    crits = tuple(
        replace(p, f_value=alpha * p.f_value + beta,
                a=(alpha * p.a if p.a is not None else None))
        for p in cf.critical_points)
    return CircleFunction(
        tuple(alpha * c for c in cf.cos_coeffs),
        tuple(alpha * s for s in cf.sin_coeffs),
        alpha * cf.offset + beta, crits, self_indexed=self_indexed)


def affine_self_index(cf: CircleFunction) -> CircleFunction:
    """Affine rescale onto [0, 1]: minima -> 0, maxima -> 1.

    Requires all minima to share one value and all maxima another; every
    birth-death value must land strictly inside (0, 1).
    """
    mins = [p.f_value for p in cf.minima]
    maxs = [p.f_value for p in cf.maxima]
    if not mins or not maxs:
        raise NotAffinelySelfIndexable("need at least one minimum and one maximum")
    spread = max(maxs) - min(mins)
    if max(mins) - min(mins) > 1e-9 * spread:
        raise NotAffinelySelfIndexable("minima values differ; affine map insufficient")
    if max(maxs) - min(maxs) > 1e-9 * spread:
        raise NotAffinelySelfIndexable("maxima values differ; affine map insufficient")
    alpha = 1.0 / (maxs[0] - mins[0])
    beta = -alpha * mins[0]
    out = rescale(cf, alpha, beta, self_indexed=True)
    for p in out.bd_points:
        if not 0.0 < p.f_value < 1.0:
            raise NotAffinelySelfIndexable(
                f"birth-death value {p.f_value} outside (0, 1)")
    return out


_EXAMPLE_B_SIMPLE = (0.55, 1.85, 3.25, 4.35)
_EXAMPLE_B_DOUBLE = (5.45,)
_EXAMPLE_B_RANGE = 0.32


def example_function(name: str) -> CircleFunction:
    """The two stock examples.

    "A": one minimum, one maximum, one birth-death point; affinely
    self-indexed (min 0, max 1, cubic coefficient -sqrt(3)/9).
    "B": two minima, two maxima, one birth-death point, distinct minima
    values (not self-indexable); scaled to a small range so tunneling
    amplitudes stay numerically resolvable over its t schedule.
    """
    if name == "A":
        raw = build_circle_function([np.pi / 3, -np.pi / 3], [np.pi])
        return affine_self_index(raw)
    if name == "B":
        raw = build_circle_function(list(_EXAMPLE_B_SIMPLE), list(_EXAMPLE_B_DOUBLE))
        vals = [p.f_value for p in raw.critical_points]
        alpha = _EXAMPLE_B_RANGE / (max(vals) - min(vals))
        return rescale(raw, alpha, -alpha * min(vals))
    raise DegenerateInput(f"unknown example {name!r}")


def default_t_schedule(name: str) -> list[float]:
    if name == "A":
        return [50.0, 100.0, 200.0, 400.0, 800.0]
    if name == "B":
        return [24.0, 36.0, 54.0, 81.0]
    raise DegenerateInput(f"unknown example {name!r}")


# -- Witten matrices -----------------------------------------------------------

@dataclass(frozen=True)
class WittenMatrices:
    t: float
    n_grid: int
    h: float
    f_nodes: np.ndarray
    f_mids: np.ndarray
    wplus: np.ndarray      # coefficient of u_{i+1} in (Du)_{i+1/2}
    wminus: np.ndarray     # coefficient of u_i
    delta0: SymTridiag
    delta1: SymTridiag

    def apply_d(self, u: np.ndarray) -> np.ndarray:
        return self.wplus * np.roll(u, -1) - self.wminus * u

    def apply_dt(self, v: np.ndarray) -> np.ndarray:
        return np.roll(self.wplus * v, 1) - self.wminus * v

    def apply_d_log(self, u: LogVector) -> LogVector:
        """d(t) on a signed-log 0-form; exact at any deformation strength."""
        l1 = np.log(self.wplus) + np.roll(u.log, -1)
        s1 = np.roll(u.sign, -1)
        l2 = np.log(self.wminus) + u.log
        s2 = u.sign
        m = np.maximum(l1, l2)
        m = np.where(np.isfinite(m), m, 0.0)
        val = s1 * np.exp(l1 - m) - s2 * np.exp(l2 - m)
        sign = np.sign(val)
        with np.errstate(divide="ignore"):
            log = np.where(sign == 0.0, -np.inf, m + np.log(np.abs(val)))
        return LogVector(sign, log)

    def kernel_node_logvec(self) -> LogVector:
        """The exact discrete kernel e^{-t f} on nodes, unit norm, log form."""
        lv = LogVector(np.ones(self.n_grid), -self.t * self.f_nodes)
        return lv.normalized()

    def kernel_mid_logvec(self) -> LogVector:
        """The exact discrete cokernel e^{+t f} on midpoints, unit norm."""
        lv = LogVector(np.ones(self.n_grid), self.t * self.f_mids)
        return lv.normalized()


def default_n_grid(cf: CircleFunction, t: float, n_factor: int = 1) -> int:
    need = 40.0 * math.sqrt(t) * n_factor
    return max(4096, 64 * math.ceil(need / 64.0))


def assemble_witten(cf: CircleFunction, t: float, n_grid: int) -> WittenMatrices:
    if n_grid < 64 or n_grid < 40.0 * math.sqrt(t):
        raise GridTooCoarse(
            f"n_grid={n_grid} below max(64, 40 sqrt(t)={40*math.sqrt(t):.0f})")
    h = TWO_PI / n_grid
    nodes = np.arange(n_grid) * h
    mids = nodes + 0.5 * h
    fn = cf.f(nodes)
    fm = cf.f(mids)
    fn_next = np.roll(fn, -1)
    wplus = np.exp(t * (fn_next - fm)) / h
    wminus = np.exp(t * (fn - fm)) / h
    d0_diag = wminus ** 2 + np.roll(wplus, 1) ** 2
    d0_off = -(wminus * wplus)[:-1]
    d0_corner = -wminus[-1] * wplus[-1]
    d1_diag = wplus ** 2 + wminus ** 2
    d1_off = -(wplus[:-1] * wminus[1:])
    d1_corner = -wplus[-1] * wminus[0]
    return WittenMatrices(
        t, n_grid, h, fn, fm, wplus, wminus,
        SymTridiag(d0_diag, d0_off, corner=d0_corner),
        SymTridiag(d1_diag, d1_off, corner=d1_corner))


_eig_cache: dict[tuple, list[EigenPair]] = {}


def lowest_eigs(cf: CircleFunction, t: float, degree: int, k: int,
                n_grid: int | None = None, tol: float = 1e-11) -> list[EigenPair]:
    if degree not in (0, 1):
        raise DegenerateInput("degree must be 0 or 1 on the circle")
    if n_grid is None:
        n_grid = default_n_grid(cf, t)
    key = (cf.key(), t, degree, k, n_grid, tol)
    if key not in _eig_cache:
        w = assemble_witten(cf, t, n_grid)
        mat = w.delta0 if degree == 0 else w.delta1
        _eig_cache[key] = eigensolve.eigs_lowest(mat, k, tol=tol)
    return _eig_cache[key]


# -- clusters -------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterReport:
    degree: int
    t: float
    n_grid: int
    epsilon: float
    small: np.ndarray             # eigenvalues (not rescaled)
    large: dict                   # bd label -> eigenvalue
    very_large_floor: float | None
    counts: dict
    extrapolated: bool


def choose_epsilon(cf: CircleFunction, constants: dict | None = None) -> float:
    """0.9 times the disjointness bound for the cluster interval family."""
    consts = constants if constants is not None else load_constants()
    e1, e2 = consts["e"][0], consts["e"][1]
    mags = sorted(abs(p.a) for p in cf.bd_points)
    if not mags:
        return 1.0           # Morse case: any fixed window works
    b = [m ** (2.0 / 3.0) for m in mags]
    if not e2 * b[0] > e1 * b[-1]:
        raise AssumptionViolated(
            f"e2 |a_min|^(2/3) = {e2*b[0]:.4f} must exceed "
            f"e1 |a_max|^(2/3) = {e1*b[-1]:.4f}")
    cands = [0.5 * e1 * b[0], 0.5 * (e2 * b[0] - e1 * b[-1])]
    for x, y in zip(b, b[1:]):
        cands.append(0.5 * e1 * (y - x))
    return 0.9 * min(cands)


def _bd_labels(cf: CircleFunction) -> list[tuple[str, float]]:
    """(label, |a|) per birth-death point, labeled by angular order."""
    out = []
    for i, p in enumerate(sorted(cf.bd_points, key=lambda q: q.theta)):
        out.append((f"bd{i}", abs(p.a)))
    return out


def spectral_clusters(cf: CircleFunction, t: float, k_eigs: int = 13,
                      n_grid: int | None = None, extrapolate: bool = True,
                      constants: dict | None = None,
                      strict_floor: bool = True) -> dict[int, ClusterReport]:
    """Partition the low spectra of both degrees into the interval family.

    Eigenvalue counts in each interval are verified exactly through inertia
    counts; reported values are Richardson-extrapolated over (n, 2n) when
    extrapolate is set.  strict_floor additionally asserts that nothing sits
    between the top window and the very-large floor, an asymptotic property
    that moderate deformation strengths need not satisfy yet.
    """
    consts = constants if constants is not None else load_constants()
    e1, e2 = consts["e"][0], consts["e"][1]
    if n_grid is None:
        n_grid = default_n_grid(cf, t)
    eps = choose_epsilon(cf, consts)
    s = t ** (2.0 / 3.0)
    bd = _bd_labels(cf)
    floor = (e2 * min(m for _, m in bd) ** (2.0 / 3.0) - eps) if bd else None

    out = {}
    for degree in (0, 1):
        m_k = cf.m_count(degree)
        need = m_k + len(bd) + 1
        if k_eigs < need:
            raise DegenerateInput(f"k_eigs={k_eigs} below required {need}")
        pairs = lowest_eigs(cf, t, degree, k_eigs, n_grid)
        vals = np.array([p.value for p in pairs])
        if extrapolate:
            pairs2 = lowest_eigs(cf, t, degree, k_eigs, 2 * n_grid)
            vals2 = np.array([p.value for p in pairs2])
            vals_rep = (4.0 * vals2 - vals) / 3.0
        else:
            vals_rep = vals

        w = assemble_witten(cf, t, n_grid)
        mat = w.delta0 if degree == 0 else w.delta1
        c_small = eigensolve.count_below(mat, eps * s)
        if c_small != m_k:
            raise ClusterOverlap(
                f"degree {degree}: {c_small} eigenvalues in [0, eps t^(2/3)], "
                f"expected {m_k} (t too small?)")
        counts = {"small": c_small}
        large = {}
        prev_hi = eps * s
        for label, mag in sorted(bd, key=lambda q: q[1]):
            center = e1 * mag ** (2.0 / 3.0)
            lo, hi = (center - eps) * s, (center + eps) * s
            c_gap = eigensolve.count_below(mat, lo) - eigensolve.count_below(mat, prev_hi)
            c_win = eigensolve.count_below(mat, hi) - eigensolve.count_below(mat, lo)
            if c_gap != 0:
                raise ClusterOverlap(
                    f"degree {degree}: {c_gap} stray eigenvalues below the "
                    f"{label} window")
            if c_win != 1:
                raise ClusterOverlap(
                    f"degree {degree}: window {label} holds {c_win} eigenvalues, "
                    f"expected 1")
            idx = int(np.searchsorted(vals, lo))
            large[label] = float(vals_rep[idx])
            counts[label] = c_win
            prev_hi = hi
        if floor is not None:
            c_below_floor = eigensolve.count_below(mat, floor * s)
            counts["below_floor"] = c_below_floor
            if strict_floor and c_below_floor != m_k + len(bd):
                raise ClusterOverlap(
                    f"degree {degree}: {c_below_floor} eigenvalues below the "
                    f"very-large floor, expected {m_k + len(bd)}")
        small = vals_rep[:m_k]
        out[degree] = ClusterReport(degree, t, n_grid, eps, small, large,
                                    floor, counts, extrapolate)
    return out


def scaling_fit(cf: CircleFunction, t_list, k_eigs: int = 13,
                constants: dict | None = None) -> dict:
    """Least-squares exponent of the large eigenvalues against t.

    Returns the fitted slope of log E vs log t per birth-death point and the
    limiting constant estimate E(t_max) / t_max^{2/3}.
    """
    t_list = sorted(float(t) for t in t_list)
    if len(t_list) < 4:
        raise DegenerateInput("need at least 4 deformation values, geometrically spaced")
    bd = _bd_labels(cf)
    if not bd:
        raise DegenerateInput("scaling fit needs a birth-death point")
    series: dict[str, list[float]] = {lab: [] for lab, _ in bd}
    for t in t_list:
        reports = spectral_clusters(cf, t, k_eigs=k_eigs, constants=constants)
        for lab, _ in bd:
            series[lab].append(reports[0].large[lab])
    out = {"t_list": t_list, "per_bd": {}}
    for lab, _ in bd:
        ys = np.log(series[lab])
        xs = np.log(t_list)
        slope, _inter = np.polyfit(xs, ys, 1)
        const = series[lab][-1] / t_list[-1] ** (2.0 / 3.0)
        out["per_bd"][lab] = {"exponent": float(slope), "constant": float(const),
                              "values": series[lab]}
    return out


# -- bases ----------------------------------------------------------------------

@dataclass
class ClusterBases:
    """Orthonormal eigenvector bases of the small and large clusters."""
    degree: int
    t: float
    n_grid: int
    small_vectors: np.ndarray          # columns
    small_values: np.ndarray
    large_vectors: dict                # bd label -> vector
    large_values: dict                 # bd label -> eigenvalue (same grid)


def cluster_bases(cf: CircleFunction, t: float, k_eigs: int = 13,
                  n_grid: int | None = None,
                  constants: dict | None = None,
                  strict_floor: bool = True) -> dict[int, ClusterBases]:
    """Eigenvector bases per cluster, orthogonal across clusters."""
    consts = constants if constants is not None else load_constants()
    if n_grid is None:
        n_grid = default_n_grid(cf, t)
    reports = spectral_clusters(cf, t, k_eigs=k_eigs, n_grid=n_grid,
                                extrapolate=False, constants=consts,
                                strict_floor=strict_floor)
    e1 = consts["e"][0]
    eps = reports[0].epsilon
    s = t ** (2.0 / 3.0)
    out = {}
    for degree in (0, 1):
        m_k = cf.m_count(degree)
        pairs = lowest_eigs(cf, t, degree, k_eigs, n_grid)
        small_vecs = np.column_stack([p.vector for p in pairs[:m_k]]) \
            if m_k else np.zeros((n_grid, 0))
        small_vals = np.array([p.value for p in pairs[:m_k]])
        large_vecs, large_vals = {}, {}
        for label, mag in _bd_labels(cf):
            center = e1 * mag ** (2.0 / 3.0)
            lo, hi = (center - eps) * s, (center + eps) * s
            hit = [p for p in pairs if lo <= p.value < hi]
            if len(hit) != 1:
                raise ClusterOverlap(
                    f"degree {degree}: window {label} holds {len(hit)} vectors")
            large_vecs[label] = hit[0].vector
            large_vals[label] = hit[0].value
        out[degree] = ClusterBases(degree, t, n_grid, small_vecs, small_vals,
                                   large_vecs, large_vals)
    return out


# -- localized bases -------------------------------------------------------------

def _arc_distance(theta: np.ndarray, center: float) -> np.ndarray:
    """Signed arc distance in (-pi, pi]."""
    d = (theta - center) % TWO_PI
    return np.where(d > math.pi, d - TWO_PI, d)


def _bump(s: np.ndarray, radius: float) -> np.ndarray:
    """cos^2 taper: 1 on |s| <= radius/2, 0 beyond radius."""
    x = np.abs(s)
    out = np.zeros_like(x)
    core = x <= 0.5 * radius
    ramp = (~core) & (x < radius)
    out[core] = 1.0
    out[ramp] = np.cos(0.5 * np.pi * (x[ramp] - 0.5 * radius) / (0.5 * radius)) ** 2
    return out


def _chart_radius(cf: CircleFunction, p: CriticalPoint) -> float:
    gaps = []
    for q in cf.critical_points:
        if q is p:
            continue
        d = abs(_arc_distance(np.array([q.theta]), p.theta)[0])
        gaps.append(d)
    return 0.5 * min(gaps) if gaps else math.pi


_profile_cache: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}


def _bd_profile(a: float, t: float, form_sign: int):
    key = (a, t, form_sign)
    if key not in _profile_cache:
        sp = oscillator1d.spectrum(oscillator1d.Anharmonic(a, t, form_sign), 1,
                                   tol=1e-8, want_vectors=True)
        x, h = oscillator1d.grid(sp.L, sp.n)
        v = sp.vectors[:, 0]
        if v[int(np.argmax(np.abs(v)))] < 0:
            v = -v
        _profile_cache[key] = (x, v / np.sqrt(h))
    return _profile_cache[key]


def quasimode(cf: CircleFunction, w: WittenMatrices, degree: int,
              point: CriticalPoint) -> np.ndarray:
    """Cutoff model ground profile for one critical point, unit norm.

    Nondegenerate points use the function-adapted profile e^{-t |f - f(c)|},
    birth-death points the sampled anharmonic ground state (reflected on the
    1-form side); everything is cut off by a bump inside the point's chart.
    """
    theta = (np.arange(w.n_grid) + (0.5 if degree == 1 else 0.0)) * w.h
    s = _arc_distance(theta, point.theta)
    radius = _chart_radius(cf, point)
    bump = _bump(s, radius)
    if point.kind == "nd":
        f_here = cf.f(theta)
        if degree == 0:
            prof = np.exp(-np.minimum(w.t * (f_here - point.f_value), 700.0))
        else:
            prof = np.exp(-np.minimum(w.t * (point.f_value - f_here), 700.0))
    else:
        x, vals = _bd_profile(point.a, w.t, +1 if degree == 1 else -1)
        prof = np.interp(s, x, vals, left=0.0, right=0.0)
    q = prof * bump
    nq = np.linalg.norm(q)
    if nq == 0.0:
        raise ProjectionDegenerate(f"quasimode at theta={point.theta:.4f} vanished")
    return q / nq


def localized_basis(cf: CircleFunction, t: float, degree: int, cluster: str,
                    bases: dict[int, ClusterBases] | None = None,
                    constants: dict | None = None,
                    strict_floor: bool = True) -> dict[str, np.ndarray]:
    """Cluster basis aligned with critical points via quasimode projection.

    cluster is "small" or a birth-death label ("bd0", ...).  Model quasimodes
    are projected onto the cluster eigenspace and symmetrically orthonormalized
    (Gram matrix inverse square root); signs are fixed by positive overlap
    with the quasimodes.
    """
    if bases is None:
        bases = cluster_bases(cf, t, constants=constants,
                              strict_floor=strict_floor)
    cb = bases[degree]
    w = assemble_witten(cf, t, cb.n_grid)
    if cluster == "small":
        points = [p for p in cf.critical_points
                  if p.kind == "nd" and p.index == degree]
        labels = [f"{'min' if degree == 0 else 'max'}{i}"
                  for i in range(len(points))]
        v = cb.small_vectors
    else:
        order = sorted(cf.bd_points, key=lambda q: q.theta)
        idx = int(cluster[2:])
        points = [order[idx]]
        labels = [cluster]
        v = cb.large_vectors[cluster][:, None]
    if v.shape[1] == 0 or not points:
        raise DegenerateInput(f"empty cluster {cluster} in degree {degree}")
    q = np.column_stack([quasimode(cf, w, degree, p) for p in points])
    coeff = v.T @ q                      # cluster-coordinates of the quasimodes
    gram = coeff.T @ coeff
    evals, evecs = np.linalg.eigh(gram)
    if evals[0] <= 0 or evals[-1] / evals[0] > 1e6:
        raise ProjectionDegenerate(
            f"Gram condition {evals[-1] / max(evals[0], 1e-300):.2e} too large")
    gram_isqrt = (evecs / np.sqrt(evals)) @ evecs.T
    basis = v @ (coeff @ gram_isqrt)
    out = {}
    for j, lab in enumerate(labels):
        vec = basis[:, j]
        if np.dot(vec, q[:, j]) < 0:
            vec = -vec
        out[lab] = vec
    return out


def localization_gram(cf: CircleFunction, t: float, degree: int,
                      cluster: str = "small",
                      constants: dict | None = None,
                      strict_floor: bool = True) -> np.ndarray:
    """Gram matrix of projected quasimodes (diagnostic: -> identity in t)."""
    bases = cluster_bases(cf, t, constants=constants,
                          strict_floor=strict_floor)
    cb = bases[degree]
    w = assemble_witten(cf, t, cb.n_grid)
    points = [p for p in cf.critical_points
              if p.kind == "nd" and p.index == degree]
    v = cb.small_vectors
    q = np.column_stack([quasimode(cf, w, degree, p) for p in points])
    coeff = v.T @ q
    return coeff.T @ coeff


# -- matrix elements --------------------------------------------------------------

KERNEL_TOL = 1e-8   # times scale: eigenvalues below count as numerical kernel


def _is_numerical_kernel(w: WittenMatrices, value: float) -> bool:
    return abs(value) <= KERNEL_TOL * w.delta0.scale


def basis_logvectors(cf: CircleFunction, t: float,
                     bases: dict[int, ClusterBases] | None = None,
                     constants: dict | None = None,
                     strict_floor: bool = True):
    """Labeled signed-log basis vectors of the low clusters, both degrees.

    One-dimensional small clusters whose eigenvalue is numerically zero are
    replaced by the exact discrete (co)kernel in log representation, whose
    exponentially small tails carry full relative accuracy; all other members
    are lifted grid eigenvectors.  Birth-death 1-form vectors are oriented so
    that <E_y^1, d(t) E_y^0> is positive.
    """
    if bases is None:
        bases = cluster_bases(cf, t, constants=constants,
                              strict_floor=strict_floor)
    n_grid = bases[0].n_grid
    w = assemble_witten(cf, t, n_grid)
    out = {0: {}, 1: {}}
    meta = {0: {}, 1: {}}
    for degree in (0, 1):
        cb = bases[degree]
        if cb.small_vectors.shape[1]:
            loc = localized_basis(cf, t, degree, "small", bases,
                                  constants=constants,
                                  strict_floor=strict_floor)
            single = len(loc) == 1
            for lab, vec in loc.items():
                if single and _is_numerical_kernel(w, cb.small_values[0]):
                    lv = (w.kernel_node_logvec() if degree == 0
                          else w.kernel_mid_logvec())
                    if float(np.dot(lv.to_values(), vec)) < 0:
                        lv = lv.scaled(0.0, -1.0)
                    out[degree][lab] = lv
                    meta[degree][lab] = {"kind": "small", "exact_kernel": True,
                                         "cluster_values": cb.small_values}
                else:
                    out[degree][lab] = LogVector.from_values(vec)
                    meta[degree][lab] = {"kind": "small", "exact_kernel": False,
                                         "cluster_values": cb.small_values}
        bd_order = sorted(cf.bd_points, key=lambda q: q.theta)
        for lab, vec in cb.large_vectors.items():
            if degree == 0:
                # positive overlap with the (positive) cutoff model profile
                point = bd_order[int(lab[2:])]
                if float(np.dot(vec, quasimode(cf, w, 0, point))) < 0:
                    vec = -vec
            key = f"{lab}:{degree}"
            out[degree][key] = LogVector.from_values(vec)
            meta[degree][key] = {"kind": "large", "value": cb.large_values[lab],
                                 "exact_kernel": False}
    # orient the 1-form birth-death vectors along the d(t) image
    for lab in bases[0].large_vectors:
        du = d_image_log(w, out[0][f"{lab}:0"], False)
        val = out[1][f"{lab}:1"].dot(du)
        if val.sign < 0:
            out[1][f"{lab}:1"] = out[1][f"{lab}:1"].scaled(0.0, -1.0)
    return out, meta, w


def d_image_log(w: WittenMatrices, lv: LogVector, exact_kernel: bool) -> LogVector:
    """d(t) applied to a signed-log form; identically zero on the exact kernel.

    The discrete conjugated difference annihilates e^{-tf} as a real-number
    identity, so amplifying its floating-point cancellation residue by e^{t}
    rescalings would manufacture noise; the flag short-circuits it to zero.
    """
    if exact_kernel:
        n = len(lv)
        return LogVector(np.zeros(n), np.full(n, -np.inf))
    return w.apply_d_log(lv)


@dataclass
class MatrixElements:
    t: float
    n_grid: int
    labels0: list[str]
    labels1: list[str]
    raw: dict                     # (label1, label0) -> LogValue
    rescaled_small: dict          # (label1, label0) -> float, e^t sqrt(pi/2t) x raw
    meta0: dict
    meta1: dict

    def raw_float(self, l1: str, l0: str) -> float:
        return self.raw[(l1, l0)].to_float()


def matrix_elements(cf: CircleFunction, t: float,
                    bases: dict[int, ClusterBases] | None = None,
                    constants: dict | None = None,
                    strict_floor: bool = True) -> MatrixElements:
    """All pairings <E_b^1, d(t) E_a^0> over the low-cluster bases.

    Every pairing is accumulated in signed log space, so exponentially small
    tunneling entries neither overflow nor lose their scale; the small-block
    entries are additionally reported with the e^t sqrt(pi/2t) rescaling of
    the normalized small complex.
    """
    vecs, meta, w = basis_logvectors(cf, t, bases, constants, strict_floor)
    labels0 = list(vecs[0])
    labels1 = list(vecs[1])
    raw = {}
    rescaled = {}
    for l0 in labels0:
        du = d_image_log(w, vecs[0][l0], meta[0][l0]["exact_kernel"])
        for l1 in labels1:
            val = vecs[1][l1].dot(du)
            raw[(l1, l0)] = val
            if meta[0][l0]["kind"] == "small" and meta[1][l1]["kind"] == "small":
                scaled = val.scaled(t + 0.5 * math.log(math.pi / (2.0 * t)))
                rescaled[(l1, l0)] = scaled.to_float()
    return MatrixElements(t, w.n_grid, labels0, labels1, raw, rescaled,
                          meta[0], meta[1])


def eq7_defect(cf: CircleFunction, t: float,
               bases: dict[int, ClusterBases] | None = None,
               constants: dict | None = None,
               strict_floor: bool = True) -> dict[str, float]:
    """Relative defect of ||d(t) E_y^0||^2 against the large eigenvalue.

    Exact supersymmetry of the factored pair makes the squared image norm of
    the 0-form vector equal its eigenvalue on the same grid.
    """
    if bases is None:
        bases = cluster_bases(cf, t, constants=constants,
                              strict_floor=strict_floor)
    cb = bases[0]
    w = assemble_witten(cf, t, cb.n_grid)
    out = {}
    for lab, vec in cb.large_vectors.items():
        image_sq = float(np.sum(w.apply_d(vec) ** 2))
        lam = cb.large_values[lab]
        out[lab] = abs(image_sq - lam) / lam
    return out

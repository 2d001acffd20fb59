"""Deterministic symmetric eigensolver for (cyclic) tridiagonal matrices.

Two routes, chosen by matrix shape:

* acyclic: Sturm-sequence bisection isolates the lowest eigenvalues, inverse
  iteration with a safeguarded LDL^T factorization polishes value and vector;
* cyclic (periodic corner entries): eigenvalue locations come from a bordered
  LDL^T inertia count, eigenvectors from shift-invert Lanczos with full
  reorthogonalization and deflated deterministic restarts.

Everything is free of RNG: starting vectors are fixed index stencils, all
reductions run in index order, so repeated calls are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from .errors import CornerPresent, DegenerateInput, NoConvergence, SingularShift

# Fixed iteration budgets: exceeding them is an error, not silent degradation.
LANCZOS_BUDGET = 200
INVIT_SWEEPS = 5
CLUSTER_TOL = 1e-10       # times scale: eigenvalues closer than this form a cluster
_SAFE_MIN = np.finfo(float).tiny / np.finfo(float).eps


@dataclass(frozen=True)
class SymTridiag:
    """Real symmetric tridiagonal matrix, optionally with cyclic corner entries."""

    diag: np.ndarray
    offdiag: np.ndarray
    corner: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "diag", np.asarray(self.diag, dtype=float))
        object.__setattr__(self, "offdiag", np.asarray(self.offdiag, dtype=float))
        if self.n < 2:
            raise DegenerateInput("matrix dimension must be at least 2")
        if self.offdiag.shape != (self.n - 1,):
            raise DegenerateInput("offdiag must have length n-1")

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def scale(self) -> float:
        c = 2.0 * abs(self.corner) if self.corner is not None else 0.0
        return max(1.0, float(np.max(np.abs(self.diag))
                              + 2.0 * np.max(np.abs(self.offdiag)) + c))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        if self.corner is not None:
            out[0] += self.corner * v[-1]
            out[-1] += self.corner * v[0]
        return out

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)
        if self.corner is not None:
            a[0, -1] = a[-1, 0] = self.corner
        return a

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros(self.n)
        r[:-1] += np.abs(self.offdiag)
        r[1:] += np.abs(self.offdiag)
        if self.corner is not None:
            r[0] += abs(self.corner)
            r[-1] += abs(self.corner)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float


# -- inertia counts -----------------------------------------------------------

def _pivmin(t: SymTridiag) -> float:
    m = float(np.max(t.offdiag ** 2))
    if t.corner is not None:
        m = max(m, t.corner ** 2)
    return _SAFE_MIN * max(1.0, m)


def _counts_acyclic(t: SymTridiag, lams: np.ndarray) -> np.ndarray:
    """Number of eigenvalues strictly below each entry of lams (batched)."""
    return _kernels.counts_acyclic(t.diag, t.offdiag ** 2,
                                   np.ascontiguousarray(lams, dtype=float),
                                   _pivmin(t))


def _counts_cyclic(t: SymTridiag, lams: np.ndarray) -> np.ndarray:
    """Inertia below lams for the cyclic matrix via bordered LDL^T elimination.

    The border column can blow up when a leading pivot is nearly singular;
    clipping keeps the arithmetic finite at the cost of a possible off-by-one
    count exactly at such lambdas, which bisection tolerates.
    """
    floor = _pivmin(t)
    lams = np.ascontiguousarray(lams, dtype=float)
    if t.n == 2:
        # corner coincides with the off-diagonal entry
        e = t.offdiag[0] + float(t.corner)
        d = t.diag[0] - lams
        count = (d < 0).astype(np.int64)
        d_safe = np.where(np.abs(d) < floor, np.where(d < 0, -floor, floor), d)
        count += ((t.diag[1] - lams) - e * e / d_safe) < 0
        return count
    return _kernels.counts_cyclic(t.diag, t.offdiag, lams, float(t.corner),
                                  floor, 1e140)


def sturm_count(t: SymTridiag, lam: float) -> int:
    """Number of eigenvalues of an acyclic tridiagonal matrix strictly below lam."""
    if t.corner is not None:
        raise CornerPresent("sturm_count requires an acyclic matrix")
    return int(_counts_acyclic(t, np.array([float(lam)]))[0])


def count_below(t: SymTridiag, lam: float) -> int:
    """Inertia count below lam, valid for both acyclic and cyclic matrices."""
    if t.corner is None:
        return int(_counts_acyclic(t, np.array([float(lam)]))[0])
    return int(_counts_cyclic(t, np.array([float(lam)]))[0])


# -- shifted solves -----------------------------------------------------------

class _ShiftedTridiagSolve:
    """LDL^T factorization of (T_acyclic - sigma I) without pivoting.

    Tiny pivots either raise SingularShift (strict mode, public solves) or are
    replaced by signed floors (inverse-iteration mode, where a nearly singular
    pivot is the desired amplification).
    """

    def __init__(self, t: SymTridiag, sigma: float, strict: bool):
        floor = _pivmin(t)
        strict_floor = t.scale * np.finfo(float).eps * 64.0
        d, l, neg, min_piv = _kernels.ldl_factor(t.diag, t.offdiag,
                                                 float(sigma), floor)
        if strict and min_piv < strict_floor:
            raise SingularShift(
                f"pivot {min_piv:.3e} below threshold {strict_floor:.3e}")
        self.d, self.l, self.negatives = d, l, neg

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return _kernels.ldl_solve(self.d, self.l,
                                  np.ascontiguousarray(rhs, dtype=float))


def _banded_apply(t: SymTridiag, sigma: float):
    """LAPACK banded-solve application of (T_acyclic - sigma I)^{-1}."""
    ab = np.zeros((3, t.n))
    ab[0, 1:] = t.offdiag
    ab[1, :] = t.diag - sigma
    ab[2, :-1] = t.offdiag

    def solve(rhs):
        return scipy.linalg.solve_banded((1, 1), ab, rhs, check_finite=False)

    return solve


def _apply_shifted_inverse_cyclic(t: SymTridiag, sigma: float, strict: bool = True):
    """O(n) application of (T - sigma I)^{-1} for the cyclic matrix.

    Sherman-Morrison-Woodbury rank-2 correction of the acyclic solve, with
    T = T_0 + c (e_0 e_{n-1}^T + e_{n-1} e_0^T).
    """
    n = t.n
    c = float(t.corner)
    base = _banded_apply(t, sigma)
    # pivot scan once: SingularShift detection for the acyclic part
    _ShiftedTridiagSolve(SymTridiag(t.diag, t.offdiag), sigma, strict=strict)
    # T = T_0 + U C V^T with U = [e_0, e_{n-1}], V = [e_{n-1}, e_0], C = c I
    u = np.zeros((n, 2))
    u[0, 0] = 1.0
    u[-1, 1] = 1.0
    au = base(u)
    cinv = np.array([[1.0 / c, 0.0], [0.0, 1.0 / c]])
    cap = cinv + np.array([au[-1], au[0]])
    det = cap[0, 0] * cap[1, 1] - cap[0, 1] * cap[1, 0]
    if not np.isfinite(det) or abs(det) < np.finfo(float).tiny * 4:
        raise SingularShift("cyclic correction capacitance matrix is singular")
    cap_inv = np.array([[cap[1, 1], -cap[0, 1]], [-cap[1, 0], cap[0, 0]]]) / det

    def apply(rhs):
        x0 = base(rhs)
        w = np.array([x0[-1], x0[0]])
        return x0 - au @ (cap_inv @ w)

    return apply


def solve_shifted(t: SymTridiag, sigma: float, rhs: np.ndarray) -> np.ndarray:
    """Solve (T - sigma I) x = rhs in O(n); raises SingularShift on breakdown."""
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (t.n,):
        raise DegenerateInput("rhs length must match matrix dimension")
    if t.corner is None:
        fac = _ShiftedTridiagSolve(t, sigma, strict=True)
        x = fac.solve(rhs)
        r = rhs - (t.matvec(x) - sigma * x)
        return x + fac.solve(r)
    apply = _apply_shifted_inverse_cyclic(t, sigma, strict=True)
    x = apply(rhs)
    r = rhs - (t.matvec(x) - sigma * x)
    return x + apply(r)


# -- deterministic start vectors ----------------------------------------------

def _stencil_vector(n: int, seq: int) -> np.ndarray:
    """All-ones perturbed by an index-dependent hash stencil; no RNG state.

    The splitmix64 finalizer gives the perturbation uniform overlap with all
    eigenvector symmetry classes; entries stay strictly positive, which the
    ground-state positivity guarantee relies on. seq advances restarts.
    """
    z = np.arange(n, dtype=np.uint64)
    z = z + np.uint64(seq) * np.uint64(0x9E3779B97F4A7C15) + np.uint64(0x243F6A8885A308D3)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    u = z.astype(np.float64) / 2.0 ** 64
    v = 1.0 + 0.9 * (u - 0.5)
    return v / np.linalg.norm(v)


# -- bisection driver ----------------------------------------------------------

def _bisect_lowest(t: SymTridiag, k: int, width_tol,
                   lo: np.ndarray | None = None,
                   hi: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Intervals (lo_j, hi_j] each containing the j-th eigenvalue, j < k.

    width_tol may be a scalar or a per-target array; existing brackets can be
    passed back in to continue refining them.
    """
    counts = _counts_cyclic if t.corner is not None else _counts_acyclic
    if lo is None or hi is None:
        glo, ghi = t.gershgorin()
        pad = 1e-3 * max(ghi - glo, 1e-6 * t.scale)
        lo = np.full(k, glo - pad)
        hi = np.full(k, ghi + pad)
    else:
        lo, hi = lo.copy(), hi.copy()
    width_tol = np.broadcast_to(np.asarray(width_tol, dtype=float), (k,))
    targets = np.arange(k)
    for _ in range(220):
        active = (hi - lo) > width_tol
        if not np.any(active):
            break
        mid = 0.5 * (lo[active] + hi[active])
        c = counts(t, mid)
        above = c >= targets[active] + 1
        hi_a, lo_a = hi[active], lo[active]
        hi_a[above] = mid[above]
        lo_a[~above] = mid[~above]
        hi[active], lo[active] = hi_a, lo_a
    return lo, hi


def _isolating_brackets(t: SymTridiag, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Brackets tight relative to the local eigenvalue gaps.

    A first pass resolves positions to 1e-9 of the matrix scale; a second
    pass narrows each bracket to a small fraction of the distance to its
    neighbours, which is what shifted iterations need for fast convergence.
    Low-lying gaps of discretized differential operators stay O(1) while the
    matrix scale grows like h^{-2}, so a scale-relative width is not enough.
    """
    scale = t.scale
    lo, hi = _bisect_lowest(t, k, 1e-9 * scale)
    mids = 0.5 * (lo + hi)
    gaps = np.full(k, np.inf)
    if k > 1:
        d = np.diff(mids)
        gaps[:-1] = np.minimum(gaps[:-1], d)
        gaps[1:] = np.minimum(gaps[1:], d)
    target = np.maximum(1e-13 * scale, np.where(np.isfinite(gaps), 1e-3 * gaps, 1e-13 * scale))
    target = np.minimum(target, 1e-9 * scale)
    return _bisect_lowest(t, k, target, lo, hi)


def eigvals_lowest(t: SymTridiag, k: int, width_tol: float | None = None) -> np.ndarray:
    """k smallest eigenvalues by bisection alone (no vectors)."""
    if not 1 <= k <= t.n:
        raise DegenerateInput(f"need 1 <= k <= n, got k={k}, n={t.n}")
    if width_tol is None:
        width_tol = 1e-13 * t.scale
    lo, hi = _bisect_lowest(t, k, width_tol)
    return 0.5 * (lo + hi)


# -- inverse iteration (acyclic) ----------------------------------------------

def _inverse_iteration(t: SymTridiag, sigma: float, ortho: list[np.ndarray],
                       tol_abs: float) -> tuple[float, np.ndarray, float]:
    fac = _ShiftedTridiagSolve(t, sigma, strict=False)
    v = _stencil_vector(t.n, 0)
    theta, res = np.nan, np.inf
    for sweep in range(INVIT_SWEEPS):
        w = fac.solve(v)
        for q in ortho:
            w -= np.dot(q, w) * q
        nw = np.linalg.norm(w)
        if nw == 0.0 or not np.isfinite(nw):
            v = _stencil_vector(t.n, sweep + 1)
            continue
        v = w / nw
        tv = t.matvec(v)
        theta = float(np.dot(v, tv))
        res = float(np.linalg.norm(tv - theta * v))
        if res <= tol_abs:
            return theta, v, res
    raise NoConvergence(
        f"inverse iteration: residual {res:.3e} > {tol_abs:.3e} "
        f"after {INVIT_SWEEPS} sweeps")


def _eigs_lowest_acyclic(t: SymTridiag, k: int, tol: float) -> list[EigenPair]:
    scale = t.scale
    lo, hi = _isolating_brackets(t, k)
    cluster_tol = CLUSTER_TOL * scale
    pairs: list[EigenPair] = []
    group: list[np.ndarray] = []
    for j in range(k):
        if j > 0 and lo[j] - hi[j - 1] > cluster_tol:
            group = []
        width = hi[j] - lo[j]
        # shift strictly below the target keeps the factorization an M-matrix
        # for the ground state, which preserves entrywise positivity
        sigma = float(lo[j] - max(width, 1e-12 * scale))
        theta, v, res = _inverse_iteration(t, sigma, group, tol * scale)
        group.append(v)
        pairs.append(EigenPair(theta, v, res))
    pairs.sort(key=lambda p: p.value)
    return pairs


# -- shift-invert Lanczos (cyclic) ----------------------------------------------

def _lanczos_sweep(apply_inv, t: SymTridiag, locked: list[np.ndarray], seq: int,
                   max_steps: int, res_tol: float):
    """One shift-invert Lanczos run with full reorthogonalization.

    Returns (values, vectors, steps_used) for Ritz pairs whose T-residual is
    already below res_tol, in ascending eigenvalue order.
    """
    n = t.n
    q = _stencil_vector(n, seq)
    for v in locked:
        q -= np.dot(v, q) * v
    nq = np.linalg.norm(q)
    if nq < 1e-10:
        q = _stencil_vector(n, seq + 101)
        for v in locked:
            q -= np.dot(v, q) * v
        nq = np.linalg.norm(q)
    q /= nq
    basis = np.empty((max_steps + 1, n))
    basis[0] = q
    alphas = np.empty(max_steps)
    betas = np.empty(max_steps)
    m_done = 0
    for m in range(max_steps):
        w = apply_inv(basis[m])
        a = float(np.dot(basis[m], w))
        alphas[m] = a
        w = w - a * basis[m]
        if m > 0:
            w = w - betas[m - 1] * basis[m - 1]
        for _ in range(2):
            for v in locked:
                w -= np.dot(v, w) * v
            w -= basis[: m + 1].T @ (basis[: m + 1] @ w)
        b = float(np.linalg.norm(w))
        m_done = m + 1
        if b < 1e-13:
            break
        betas[m] = b
        basis[m + 1] = w / b
    m = m_done
    if m == 0:
        return [], [], 1
    if m == 1:
        mus, s = np.array([alphas[0]]), np.ones((1, 1))
    else:
        mus, s = scipy.linalg.eigh_tridiagonal(alphas[:m], betas[: m - 1])
    order = np.argsort(mus)[::-1]          # largest mu <-> smallest eigenvalue
    vals, vecs = [], []
    for idx in order:
        y = basis[:m].T @ s[:, idx]
        ny = np.linalg.norm(y)
        if ny == 0.0:
            continue
        y /= ny
        ty = t.matvec(y)
        theta = float(np.dot(y, ty))
        res = float(np.linalg.norm(ty - theta * y))
        if res <= res_tol:
            vals.append(theta)
            vecs.append(y)
    return vals, vecs, m


def _eigs_lowest_cyclic(t: SymTridiag, k: int, tol: float) -> list[EigenPair]:
    scale = t.scale
    lo, hi = _isolating_brackets(t, k)
    lam_est = 0.5 * (lo + hi)
    widths = hi - lo
    spread = max(float(lam_est[-1] - lam_est[0]), 1e-8 * scale)
    sigma = float(lo[0]) - max(0.05 * spread, 1e-8 * scale)

    locked: list[EigenPair] = []
    budget = LANCZOS_BUDGET
    seq = 0
    while len(locked) < k:
        if budget <= 0:
            raise NoConvergence(
                f"Lanczos budget {LANCZOS_BUDGET} exhausted with "
                f"{len(locked)}/{k} eigenpairs converged")
        apply_inv = _apply_shifted_inverse_cyclic(t, sigma, strict=False)
        steps = min(budget, max(40, 4 * k))
        locked_vecs = [p.vector for p in locked]
        vals, vecs, used = _lanczos_sweep(apply_inv, t, locked_vecs, seq,
                                          steps, tol * scale)
        budget -= used
        seq += 1
        # lock in target order so multiplicities are filled before moving on
        for theta, y in zip(vals, vecs):
            j = len(locked)
            if j >= k:
                break
            match_tol = max(8.0 * widths[j], 1e-8 * scale,
                            1e-8 * abs(lam_est[j]))
            if abs(theta - lam_est[j]) > match_tol:
                continue
            for p in locked:
                y = y - np.dot(p.vector, y) * p.vector
            ny = np.linalg.norm(y)
            if ny < 1e-6:
                continue
            y = y / ny
            ty = t.matvec(y)
            theta = float(np.dot(y, ty))
            res = float(np.linalg.norm(ty - theta * y))
            if res <= tol * scale:
                locked.append(EigenPair(theta, y, res))
        if len(locked) < k:
            j = len(locked)
            sigma = float(lo[j]) - max(0.02 * spread, 1e-8 * scale)
    locked.sort(key=lambda p: p.value)
    return locked


def eigs_lowest(t: SymTridiag, k: int, tol: float = 1e-11) -> list[EigenPair]:
    """k smallest eigenpairs, ascending; deterministic, residual <= tol * scale."""
    if not 1 <= k <= t.n:
        raise DegenerateInput(f"need 1 <= k <= n, got k={k}, n={t.n}")
    if tol <= 0:
        raise DegenerateInput("tol must be positive")
    if t.corner is None:
        return _eigs_lowest_acyclic(t, k, tol)
    return _eigs_lowest_cyclic(t, k, tol)

"""Cached model-operator constants: the unit anharmonic levels and ground value.

The levels e_1..e_8 of -d^2/dx^2 + 9x^4 - 6x and the x = 0 amplitude of its
normalized ground state are computed once by a documented oracle run and
cached in ``constants.json``.  The oracle route is deliberately independent
of the library's own eigensolver: dense LAPACK tridiagonal solves on fixed
grids, Richardson-extrapolated in the mesh width.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import MissingConstants
from .oscillator1d import Anharmonic, discretize, grid

ENV_VAR = "WITTENLAB_CONSTANTS"
DEFAULT_FILENAME = "constants.json"
N_LEVELS = 8
_ORACLE_L = 8.0


def _dense_levels(n: int, k: int) -> np.ndarray:
    """All-LAPACK lowest k levels of the unit operator on an n-point grid."""
    t = discretize(Anharmonic(1.0, 1.0, -1), _ORACLE_L, n)
    vals = scipy.linalg.eigh_tridiagonal(t.diag, t.offdiag, eigvals_only=True,
                                         select="i", select_range=(0, k - 1))
    return vals


def _dense_ground_at_zero(n: int) -> float:
    """Continuum-normalized ground amplitude at x = 0 (odd grid: 0 is a node)."""
    assert n % 2 == 1
    t = discretize(Anharmonic(1.0, 1.0, -1), _ORACLE_L, n)
    _, vecs = scipy.linalg.eigh_tridiagonal(t.diag, t.offdiag,
                                            select="i", select_range=(0, 0))
    v = vecs[:, 0]
    if v[int(np.argmax(np.abs(v)))] < 0:
        v = -v
    _, h = grid(_ORACLE_L, n)
    return float(v[(n - 1) // 2] / np.sqrt(h))


def compute_constants(base_n: int = 4096, k: int = N_LEVELS) -> dict:
    """Oracle run: Richardson pairs at (base_n/2, base_n) and (base_n, 2*base_n).

    The gap between the two extrapolations is the oracle's self-reported
    accuracy; the finer extrapolation is what gets cached.
    """
    # grids chosen so the mesh width halves exactly: h = 2L/(n+1)
    n_coarse = base_n // 2 - 1        # h = 2L / (base_n / 2)
    n_mid = base_n - 1
    n_fine = 2 * base_n - 1
    v_c = _dense_levels(n_coarse, k)
    v_m = _dense_levels(n_mid, k)
    v_f = _dense_levels(n_fine, k)
    extrap_low = (4.0 * v_m - v_c) / 3.0
    extrap_high = (4.0 * v_f - v_m) / 3.0
    gap = float(np.max(np.abs(extrap_high - extrap_low) / np.abs(extrap_high)))

    xi_m = _dense_ground_at_zero(n_mid)
    xi_f = _dense_ground_at_zero(n_fine)
    xi = (4.0 * xi_f - xi_m) / 3.0

    e = extrap_high
    if e[0] <= 0 or np.any(np.diff(e) <= 0):
        raise MissingConstants("oracle produced a non-increasing level ladder")
    return {
        "e": [float(x) for x in e],
        "xi1_0": float(xi),
        "oracle": {
            "n": int(base_n),
            "L": _ORACLE_L,
            "extrapolation": "richardson-h2, pairs (n/2, n) and (n, 2n)",
            "richardson_gap": gap,
        },
    }


def write_constants(path: str | Path, base_n: int = 4096) -> dict:
    data = compute_constants(base_n=base_n)
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return data


def default_path() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.cwd() / DEFAULT_FILENAME


_memo: dict | None = None


def load_constants(path: str | Path | None = None, compute_if_missing: bool = True) -> dict:
    """Load cached constants; env var overrides, cwd fallback, else recompute."""
    global _memo
    candidates = []
    if path is not None:
        candidates.append(Path(path))
    else:
        env = os.environ.get(ENV_VAR)
        if env:
            candidates.append(Path(env))
        candidates.append(Path.cwd() / DEFAULT_FILENAME)
        candidates.append(Path(__file__).resolve().parents[2] / DEFAULT_FILENAME)
    for cand in candidates:
        if cand.is_file():
            data = json.loads(cand.read_text())
            if "e" not in data or "xi1_0" not in data:
                raise MissingConstants(f"{cand} lacks required fields")
            return data
    if not compute_if_missing:
        raise MissingConstants(
            f"no constants file found (tried {[str(c) for c in candidates]}); "
            f"run `wittenlab constants` first")
    if _memo is None:
        _memo = compute_constants()
    return _memo

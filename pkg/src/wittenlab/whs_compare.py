"""Integration chain maps between the spectral and geometric complexes.

The low-cluster eigenform bases are pushed to cell cochains through the
weighted integration Int(e^{tf} omega); with the per-column normalizations
(standard small-block prefactors, a chart-curvature factor for functions
whose critical Hessians are not +-2 in arclength, and measured bd-block
normalizations) the resulting matrix converges to the identity w.r.t. the
hat-transformed cell basis. Every weighted sum runs in signed log space so
deformation strengths up to t = 800 neither overflow nor underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import circle_lab, morse_complex
from .circle_lab import CircleFunction, WittenMatrices
from .constants import load_constants
from .errors import CellOutsideGrid, DegenerateInput, MissingConstants, NotSelfIndexed
from .logspace import LogValue, LogVector, logsumexp_signed

TWO_PI = 2.0 * math.pi


# -- complex caching and cell/grid mapping --------------------------------------

_complex_cache: dict[tuple, tuple] = {}


def circle_complex(cf: CircleFunction):
    """Complex, flow graph, incidence table and hat basis for one function."""
    key = cf.key()
    if key not in _complex_cache:
        cplx, graph = morse_complex.circle_complex_from_function(cf)
        table = morse_complex.incidence_recursive(graph)
        cell_table = {}
        for (src, dst), val in table.items():
            src_cell = src + ":0" if graph.vertices[src].is_bd else src
            dst_cell = dst + ":0" if graph.vertices[dst].is_bd else dst
            cell_table[(src_cell, dst_cell)] = val
        hats = morse_complex.hat_basis(cplx, cell_table)
        _complex_cache[key] = (cplx, graph, cell_table, hats)
    return _complex_cache[key]


def _snap(theta: float, n: int) -> int:
    return int(round(theta / (TWO_PI / n))) % n


@dataclass(frozen=True)
class CellGrid:
    """Node/midpoint index layout of the cells on one staggered grid."""
    n: int
    node_of: dict            # 0-cell id -> node index
    span_of: dict            # 1-cell id -> (start node, end node, orient)

    @classmethod
    def build(cls, cplx: morse_complex.CochainComplex, n: int) -> "CellGrid":
        geo = cplx.geometry
        if geo is None:
            raise CellOutsideGrid("complex carries no circle geometry")
        node_of = {}
        span_of = {}
        for k, cells in cplx.cells.items():
            for cell in cells:
                g = geo[cell.id]
                if k == 0:
                    node_of[cell.id] = _snap(g["theta"], n)
                else:
                    lo_end, hi_end = g["ends"]
                    span_of[cell.id] = (_snap(lo_end.theta, n),
                                        _snap(hi_end.theta, n), g["orient"])
        return cls(n, node_of, span_of)

    def mid_indices(self, cell_id: str) -> np.ndarray:
        start, end, _ = self.span_of[cell_id]
        length = (end - start) % self.n
        if length == 0:
            length = self.n
        return (start + np.arange(length)) % self.n


def integrate_cochain(cf: CircleFunction, t: float, degree: int, form,
                      cplx: morse_complex.CochainComplex,
                      w: WittenMatrices | None = None) -> dict[str, LogValue]:
    """e^{tf}-weighted integrals of a discrete form over the cells.

    0-cells evaluate the (continuum-normalized) form at the snapped node;
    1-cells accumulate the midpoint rule over their node span, oriented by
    the cell.  Input forms may be plain grid vectors or LogVector; returns
    one signed-log value per cell of the matching degree.
    """
    if degree not in (0, 1):
        raise DegenerateInput("degree must be 0 or 1")
    if w is None:
        w = circle_lab.assemble_witten(cf, t, circle_lab.default_n_grid(cf, t))
    lv = form if isinstance(form, LogVector) else LogVector.from_values(np.asarray(form, float))
    if len(lv) != w.n_grid:
        raise CellOutsideGrid("form length does not match the grid")
    grid_map = CellGrid.build(cplx, w.n_grid)
    log_h = math.log(w.h)
    out = {}
    for cell in cplx.cells.get(degree, []):
        if degree == 0:
            i = grid_map.node_of[cell.id]
            out[cell.id] = LogValue(lv.sign[i],
                                    t * w.f_nodes[i] + lv.log[i] - 0.5 * log_h)
        else:
            mids = grid_map.mid_indices(cell.id)
            orient = grid_map.span_of[cell.id][2]
            logs = t * w.f_mids[mids] + lv.log[mids] + 0.5 * log_h
            signs = orient * lv.sign[mids]
            s, l = logsumexp_signed(signs, logs)
            out[cell.id] = LogValue(s, l)
    return out


def stokes_defect(cf: CircleFunction, t: float, u: np.ndarray,
                  n_grid: int | None = None) -> float:
    """Backward-relative defect of delta(Int u) = Int(d(t) u) on a raw 0-form.

    Each 1-cell defect is normalized by the absolute quadrature mass of its
    integrand (the natural backward-error scale: the weighted midpoint sums
    telescope through terms up to e^{t(f_peak - f_end)} larger than their
    value, so an absolute comparison would only measure that cancellation).
    """
    if n_grid is None:
        n_grid = circle_lab.default_n_grid(cf, t)
    w = circle_lab.assemble_witten(cf, t, n_grid)
    cplx, _, _, _ = circle_complex(cf)
    ints0 = integrate_cochain(cf, t, 0, u, cplx, w)
    lv = LogVector.from_values(np.asarray(u, float))
    du = w.apply_d_log(lv)
    ints1 = integrate_cochain(cf, t, 1, du, cplx, w)
    grid_map = CellGrid.build(cplx, w.n_grid)
    log_h = math.log(w.h)
    delta0 = cplx.matrix(0)
    cells0 = cplx.cells[0]
    cells1 = cplx.cells[1]
    worst = 0.0
    for r, c1 in enumerate(cells1):
        acc = LogValue(0.0, -np.inf)
        for j, c0 in enumerate(cells0):
            if delta0[r][j]:
                acc = acc + ints0[c0.id].scaled(
                    math.log(abs(delta0[r][j])),
                    1.0 if delta0[r][j] > 0 else -1.0)
        diff = acc + ints1[c1.id].scaled(0.0, -1.0)
        if diff.sign == 0.0:
            continue
        mids = grid_map.mid_indices(c1.id)
        from .logspace import _logsum
        mass_log = _logsum(t * w.f_mids[mids] + du.log[mids] + 0.5 * log_h)
        mass_log = max(mass_log, acc.log, ints1[c1.id].log)
        worst = max(worst, math.exp(diff.log - mass_log))
    return worst


# -- normalizations ---------------------------------------------------------------

@dataclass(frozen=True)
class NormalizationSet:
    """Asymptotic per-block normalizations (signed-log where they overflow).

    small_prefactor_log[k]: log of (pi/2t)^{(n-2k)/4} e^{-tk} on the circle;
    m_log[label]: log of the bd-block constant (2t/pi)^{(n-1-2k)/4} Xi1(0)
    |a t|^{1/6} e^{t f(y)}; a_entries[label]: (sqrt(e1) |a t|^{1/3})^{-1};
    curvature[x-label]: the chart factor (|f''(x)|/2)^{(2k-1)/4} extending the
    normal-form prefactors to general Hessians.
    """
    t: float
    small_prefactor_log: dict
    m_log: dict
    a_entries: dict
    curvature: dict


def normalizations(cf: CircleFunction, t: float,
                   constants: dict | None = None) -> NormalizationSet:
    consts = constants if constants is not None else load_constants()
    if "e" not in consts or "xi1_0" not in consts:
        raise MissingConstants("constants table lacks e / xi1_0")
    e1 = consts["e"][0]
    xi0 = consts["xi1_0"]
    small = {k: 0.25 * (1 - 2 * k) * math.log(math.pi / (2.0 * t)) - t * k
             for k in (0, 1)}
    m_log = {}
    a_entries = {}
    for i, p in enumerate(sorted(cf.bd_points, key=lambda q: q.theta)):
        lab = f"bd{i}"
        # n = 1, k = 0: the (2t/pi) power is 0
        m_log[lab] = math.log(xi0) + (1.0 / 6.0) * math.log(abs(p.a) * t) \
            + t * p.f_value
        a_entries[lab] = 1.0 / (math.sqrt(e1) * (abs(p.a) * t) ** (1.0 / 3.0))
    curvature = {}
    crits = sorted(cf.critical_points, key=lambda q: q.theta)
    counters = {0: 0, 1: 0}
    for p in crits:
        if p.kind != "nd":
            continue
        lab = f"{'min' if p.index == 0 else 'max'}{counters[p.index]}"
        counters[p.index] += 1
        fpp = abs(float(cf.fpp(p.theta)))
        curvature[lab] = (fpp / 2.0) ** (0.25 * (1 - 2 * p.index))
    return NormalizationSet(t, small, m_log, a_entries, curvature)


# -- the chain map -----------------------------------------------------------------

@dataclass
class ChainMapReport:
    t: float
    n_grid: int
    f_matrices: dict            # degree -> ndarray (rows cells, cols basis)
    row_labels: dict
    col_labels: dict
    deviation: float            # max |F - I|
    defect: float               # max |delta o F - F o d~|
    m_measured: dict            # bd label -> LogValue
    m_ratio: dict               # measured / asymptotic (float)
    a_measured: dict            # bd label -> float


def _hat_coordinates(cplx, hats, degree, vec: dict[str, LogValue]) -> dict[str, LogValue]:
    """Coordinates of a signed-log cochain w.r.t. the hat basis (exact ints)."""
    cells = cplx.cells.get(degree, [])
    ids = [c.id for c in cells]
    p = [[Fraction(0)] * len(ids) for _ in ids]
    for j, cid in enumerate(ids):
        for rid, vv in hats[cid].items():
            p[ids.index(rid)][j] = Fraction(vv)
    # invert the (unimodular) hat matrix exactly, then combine log values
    n = len(ids)
    inv = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    a = [row[:] for row in p]
    for col in range(n):
        piv = next(r for r in range(col, n) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        d = a[col][col]
        a[col] = [x / d for x in a[col]]
        inv[col] = [x / d for x in inv[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - f * y for x, y in zip(inv[r], inv[col])]
    out = {}
    for i, cid in enumerate(ids):
        acc = LogValue(0.0, -np.inf)
        for j, src in enumerate(ids):
            coeff = inv[i][j]
            if coeff != 0 and vec[src].sign != 0.0:
                acc = acc + vec[src].scaled(math.log(abs(coeff)),
                                            1.0 if coeff > 0 else -1.0)
        out[cid] = acc
    return out


def f_star(cf: CircleFunction, t: float, k_eigs: int = 13,
           constants: dict | None = None) -> ChainMapReport:
    """The normalized integration chain map and its distance from identity.

    Requires an affinely self-indexed function.  Column conventions:
    nondegenerate columns carry the standard prefactor times the chart
    curvature factor; bd columns are divided by the measured bd-block entry
    (0-side) resp. that entry over the d(t)-image norm (1-side) -- the
    measured counterparts of the displayed asymptotic normalizations, which
    is what makes the block limits exact instead of order t^{-1/3} accurate.
    """
    if not cf.self_indexed:
        raise NotSelfIndexed(
            "chain-map comparison needs min -> 0 / max -> 1; "
            "use the Agmon-rate matrix element checks instead")
    consts = constants if constants is not None else load_constants()
    cplx, graph, inc_table, hats = circle_complex(cf)
    bases = circle_lab.cluster_bases(cf, t, k_eigs=k_eigs, constants=consts)
    vecs, meta, w = circle_lab.basis_logvectors(cf, t, bases, consts)
    norms = normalizations(cf, t, consts)

    # d(t) images of the degree-0 basis against the degree-1 basis
    raw_elems = {}
    for l0, v0 in vecs[0].items():
        dv = circle_lab.d_image_log(w, v0, meta[0][l0]["exact_kernel"])
        for l1, v1 in vecs[1].items():
            raw_elems[(l1, l0)] = v1.dot(dv)

    # measured norm of d(t) E_y^0 per birth-death point (= sqrt of the large
    # eigenvalue); the displayed diagonal normalization is its reciprocal
    d_image_norm = {}
    for lab, m in meta[0].items():
        if m["kind"] == "large":
            bdlab = lab.split(":")[0]
            d_image_norm[bdlab] = abs(raw_elems[(f"{bdlab}:1", lab)].to_float())

    m_measured: dict[str, LogValue] = {}
    m_ratio: dict[str, float] = {}
    f_matrices = {}
    row_labels = {}
    col_labels = {}
    deviation = 0.0
    delta_hat = _delta_in_hats(cplx, hats)
    bd_cols0: dict[str, np.ndarray] = {}
    for degree in (0, 1):
        cells = cplx.cells[degree]
        ids = [c.id for c in cells]
        labs = list(vecs[degree])
        columns = []
        for lab in labs:
            kind = meta[degree][lab]["kind"]
            if kind == "large" and degree == 1:
                # exact intertwining: Int e^{tf} (M A)^{-1} E_y^1 equals
                # delta applied to the normalized 0-side column (Stokes),
                # which needs no tail resolution of the 1-form eigenvector
                bdlab = lab.split(":")[0]
                columns.append(delta_hat @ bd_cols0[bdlab])
                continue
            ints = integrate_cochain(cf, t, degree, vecs[degree][lab], cplx, w)
            coords = _hat_coordinates(cplx, hats, degree, ints)
            if kind == "small":
                pref = norms.small_prefactor_log[degree] \
                    - math.log(norms.curvature[lab])
                col = {cid: v.scaled(pref) for cid, v in coords.items()}
            else:
                bdlab = lab.split(":")[0]
                m_val = coords[bdlab + ":0"]
                m_measured[bdlab] = m_val
                m_ratio[bdlab] = m_val.sign * math.exp(
                    m_val.log - norms.m_log[bdlab])
                denom = m_val
                col = {cid: LogValue(v.sign * denom.sign, v.log - denom.log)
                       for cid, v in coords.items()}
            colv = np.array([col[cid].to_float() for cid in ids])
            if kind == "large":
                bd_cols0[lab.split(":")[0]] = colv
            columns.append(colv)
        f_mat = np.column_stack(columns) if columns else np.zeros((len(ids), 0))
        f_matrices[degree] = f_mat
        row_labels[degree] = ids
        col_labels[degree] = labs
        ident = _identity_pairing(ids, labs)
        deviation = max(deviation, float(np.max(np.abs(f_mat - ident))))
    labs0, labs1 = col_labels[0], col_labels[1]
    d_small_log = t + 0.5 * math.log(math.pi / (2.0 * t))
    dt_mat = np.zeros((len(labs1), len(labs0)))
    for j, l0 in enumerate(labs0):
        for i, l1 in enumerate(labs1):
            val = raw_elems[(l1, l0)]
            if meta[0][l0]["kind"] == "small":
                val = val.scaled(d_small_log)
            else:
                bdlab0 = l0.split(":")[0]
                m0 = m_measured[bdlab0]
                val = LogValue(val.sign * m0.sign, val.log - m0.log)
            if meta[1][l1]["kind"] == "large":
                bdlab1 = l1.split(":")[0]
                m1 = m_measured[bdlab1]
                val = LogValue(val.sign * m1.sign,
                               val.log + m1.log - math.log(d_image_norm[bdlab1]))
            dt_mat[i, j] = val.to_float()
    lhs = delta_hat @ f_matrices[0]
    rhs = f_matrices[1] @ dt_mat
    defect = float(np.max(np.abs(lhs - rhs))) if lhs.size else 0.0

    a_measured = {lab: 1.0 / v for lab, v in d_image_norm.items()}
    return ChainMapReport(t, w.n_grid, f_matrices, row_labels, col_labels,
                          deviation, defect, m_measured, m_ratio, a_measured)


def _identity_pairing(ids: list[str], labs: list[str]) -> np.ndarray:
    """Identity under the cell-id <-> basis-label correspondence."""
    ident = np.zeros((len(ids), len(labs)))
    for j, lab in enumerate(labs):
        for i, cid in enumerate(ids):
            if cid == lab:
                ident[i, j] = 1.0
    return ident


def _delta_in_hats(cplx, hats) -> np.ndarray:
    """The degree-0 coboundary as an exact matrix w.r.t. the hat bases."""
    cells0 = cplx.cells[0]
    cells1 = cplx.cells[1]
    d0 = cplx.matrix(0)
    out = np.zeros((len(cells1), len(cells0)))
    for j, c0 in enumerate(cells0):
        vec: dict[str, int] = {}
        for cid, coeff in hats[c0.id].items():
            jj = [c.id for c in cells0].index(cid)
            for r, c1 in enumerate(cells1):
                v = d0[r][jj]
                if v:
                    vec[c1.id] = vec.get(c1.id, 0) + coeff * v
        coords = morse_complex._coords_in_basis(cplx, 1, hats, vec)
        for i, c1 in enumerate(cells1):
            out[i, j] = float(coords[c1.id])
    return out


# -- matrix element limits ---------------------------------------------------------

@dataclass(frozen=True)
class PairingRow:
    t: float
    pair: str
    raw: float
    rescaled: float
    target: float
    abs_err: float
    label: str


def matrix_element_check(cf: CircleFunction, t_list, k_eigs: int = 13,
                         constants: dict | None = None,
                         strict_floor: bool = True) -> list[PairingRow]:
    """Convergence table of the cluster-basis pairings under d(t).

    Nondegenerate pairs are rescaled by e^{t(f(x1)-f(x0))} sqrt(pi/t) divided
    by the curvature factor (f''(x0) |f''(x1)|)^{1/4} and compared against the
    exact generalized incidence integers; birth-death pairs are divided by
    sqrt(e1) |a t|^{1/3} and compared against 1; all cross pairings are
    compared against 0.  Rows of non-self-indexed functions use the actual
    critical-value differences (the Agmon rates between comparable points)
    and carry the "extension" label.
    """
    consts = constants if constants is not None else load_constants()
    e1 = consts["e"][0]
    cplx, graph, inc_table, hats = circle_complex(cf)
    mins = [p for p in cf.critical_points if p.kind == "nd" and p.index == 0]
    maxs = [p for p in cf.critical_points if p.kind == "nd" and p.index == 1]
    bds = sorted(cf.bd_points, key=lambda q: q.theta)
    min_pts = {f"min{i}": p for i, p in enumerate(mins)}
    max_pts = {f"max{i}": p for i, p in enumerate(maxs)}
    ext = "" if cf.self_indexed else "-extension"
    rows = []
    for t in sorted(float(x) for x in t_list):
        me = circle_lab.matrix_elements(cf, t, constants=consts,
                                        strict_floor=strict_floor)
        for (l1, l0), lv in sorted(me.raw.items()):
            raw = lv.to_float()
            if l0 in min_pts and l1 in max_pts:
                pm, pM = min_pts[l0], max_pts[l1]
                curv = (abs(float(cf.fpp(pm.theta)))
                        * abs(float(cf.fpp(pM.theta)))) ** 0.25
                dfv = pM.f_value - pm.f_value
                rescaled = lv.scaled(t * dfv + 0.5 * math.log(math.pi / t)
                                     - math.log(curv)).to_float()
                target = float(inc_table.get((l1, l0), 0))
                rows.append(PairingRow(t, f"{l1}<-{l0}", raw, rescaled, target,
                                       abs(rescaled - target), "nd" + ext))
            elif l0.endswith(":0") and l1.endswith(":1") \
                    and l0.split(":")[0] == l1.split(":")[0]:
                bd = bds[int(l0.split(":")[0][2:])]
                denom = math.sqrt(e1) * (abs(bd.a) * t) ** (1.0 / 3.0)
                rescaled = raw / denom
                rows.append(PairingRow(t, f"{l1}<-{l0}", raw, rescaled, 1.0,
                                       abs(rescaled - 1.0), "bd"))
            else:
                kind = "cross-bd" if (l0.startswith("bd") and l1.startswith("bd")) \
                    else "cross"
                rows.append(PairingRow(t, f"{l1}<-{l0}", raw, raw, 0.0,
                                       abs(raw), kind))
    return rows

"""Dense symmetric eigensolver and the linear-rate certificate optimizer.

The optimizer works on the Schur-linearized 4x4 certificate factor, in which
the squared rate, the relaxation parameter, and both multipliers all enter
affinely.  The outer loop bisects on the squared rate; the inner loop is a
deterministic multi-start coordinate descent on the convex objective
max_eig(Sigma).  Everything is reproducible: fixed starts, no randomness.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .funclass import FunctionClass
from . import certify

__all__ = [
    "LmiPoint",
    "SweepCell",
    "eig_sym",
    "max_eig",
    "build_sigma_matrix",
    "feasibility_search",
    "optimize_rate",
    "sweep_heatmap",
    "write_heatmap_csv",
    "DEFAULT_ALPHA_GRID",
    "DEFAULT_KAPPA_GRID",
]

_JACOBI_SWEEPS = 100
_BISECT_TOL = 1e-4
_WARM_TRUST_MARGIN = 1e-3  # infeasible verdicts this far from 0 skip cold starts
_LAM_BOX = (0.01, 4.0)
_SIGMA_BOX_SCALE = 100.0  # sigma box is [0, 100/alpha]


@dataclass(frozen=True)
class LmiPoint:
    """Decision-variable vector of the linear-rate feasibility problem."""

    rho_sq: float
    lam: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("multipliers must be >= 0")


@dataclass
class SweepCell:
    """One (alpha, kappa) cell of the rate sweep."""

    alpha: float
    kappa: float
    rho_opt: float
    lambda_opt: float
    sigma1: float
    sigma2: float
    feasible: bool


def eig_sym(M: np.ndarray):
    """Cyclic Jacobi eigendecomposition of a small symmetric matrix.

    Returns (eigenvalues ascending, matrix of orthonormal eigenvector
    columns) with M = V diag(w) V^T.  Input must be symmetric to 1e-12
    (relative) and at most 64x64.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("input must be a square matrix")
    n = M.shape[0]
    if n > 64:
        raise ValueError("matrix larger than 64x64")
    scale = 1.0 + float(np.abs(M).max(initial=0.0))
    if float(np.abs(M - M.T).max(initial=0.0)) > 1e-12 * scale:
        raise ValueError("input matrix is not symmetric")

    A = (M + M.T) / 2.0
    V = np.eye(n)
    norm_f = float(np.linalg.norm(A))
    if norm_f == 0.0:
        return np.zeros(n), V

    for _ in range(_JACOBI_SWEEPS):
        off_part = A - np.diag(np.diag(A))
        off = float(np.linalg.norm(off_part))
        if off <= 1e-14 * norm_f:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                diff = A[q, q] - A[p, p]
                if abs(apq) < 1e-150 * abs(diff):
                    # rotation angle underflows; annihilate the entry directly
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                tau = diff / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 1.0 / (2.0 * tau)
                else:
                    t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge in 100 sweeps")

    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def max_eig(M: np.ndarray) -> float:
    """Largest eigenvalue of a small symmetric matrix."""
    return float(eig_sym(M)[0][-1])


def _sigma_parts(alpha: float, fc: FunctionClass, rho_sq: float):
    """Affine decomposition Sigma = base + lam*Alam + s1*A1 + s2*A2."""
    base = np.zeros((4, 4))
    base[0, 0] = 1.0 - rho_sq
    base[3, 3] = -1.0
    Alam = np.zeros((4, 4))
    # top-left block couplings of the rate decrement, with the quadratic
    # lambda terms cancelled by the Schur border
    Alam[0, 1] = Alam[1, 0] = -1.0
    Alam[0, 2] = Alam[2, 0] = 1.0
    # border column (0, -lam, lam)
    Alam[1, 3] = Alam[3, 1] = -1.0
    Alam[2, 3] = Alam[3, 2] = 1.0
    A1 = np.zeros((4, 4))
    A1[:3, :3] = certify.build_Q1(alpha, fc)
    A2 = np.zeros((4, 4))
    A2[:3, :3] = certify.build_Q2(alpha)
    return base, Alam, A1, A2


def build_sigma_matrix(point: LmiPoint, alpha: float, fc: FunctionClass) -> np.ndarray:
    """Schur-linearized 4x4 certificate factor at a decision point.

    Negative semidefiniteness of this matrix is equivalent to the direct
    Case-3 certificate inequality at the same parameters.
    """
    if not (fc.strongly_convex and fc.smooth):
        raise ValueError("the linear-rate certificate requires 0 < m <= L < inf")
    base, Alam, A1, A2 = _sigma_parts(alpha, fc, point.rho_sq)
    return base + point.lam * Alam + point.sigma1 * A1 + point.sigma2 * A2


class _SigmaObjective:
    """Batched evaluator of max_eig(Sigma) over decision points."""

    def __init__(self, alpha: float, fc: FunctionClass, rho_sq: float):
        self.parts = _sigma_parts(alpha, fc, rho_sq)

    def batch(self, lams, s1s, s2s):
        # scalar arguments broadcast against the varying axis, so callers can
        # pass a single varying coordinate without materializing constant
        # columns
        base, Alam, A1, A2 = self.parts
        lams = np.atleast_1d(np.asarray(lams, dtype=float))[:, None, None]
        s1s = np.atleast_1d(np.asarray(s1s, dtype=float))[:, None, None]
        s2s = np.atleast_1d(np.asarray(s2s, dtype=float))[:, None, None]
        S = base + lams * Alam + s1s * A1 + s2s * A2
        vals = np.linalg.eigvalsh(S)[:, -1]
        tols = 1e-9 * (1.0 + np.abs(S).max(axis=(1, 2)))
        return vals, tols

    def single(self, lam, s1, s2):
        vals, tols = self.batch(lam, s1, s2)
        return float(vals[0]), float(tols[0])


def _line_refine(objective, point, ci, lo, hi, n_pts=25, stages=3):
    """Successively refined grid minimization along one coordinate."""
    best_x = point[ci]
    best_v = math.inf
    best_tol = 0.0
    for _ in range(stages):
        xs = np.linspace(lo, hi, n_pts)
        cols = [point[0], point[1], point[2]]
        cols[ci] = xs
        vals, tols = objective.batch(*cols)
        i = int(np.argmin(vals))
        if vals[i] < best_v:
            best_v = float(vals[i])
            best_x = float(xs[i])
            best_tol = float(tols[i])
        lo = xs[max(i - 1, 0)]
        hi = xs[min(i + 1, n_pts - 1)]
    return best_x, best_v, best_tol


def _descend(objective, start, lam_box, sig_box, early_exit, max_sweeps=25,
             give_up_margin=None):
    """Coordinate descent on the convex objective from one start point.

    ``give_up_margin`` stops the descent once the value sits above that margin
    and a geometric extrapolation of the decaying sweep improvements shows the
    remaining progress cannot reach it: the caller only needs to know the
    minimum stays above the margin.
    """
    point = [float(start[0]), float(start[1]), float(start[2])]
    boxes = (lam_box, sig_box, sig_box)
    best, tol = objective.single(*point)
    if early_exit and best <= tol:
        return point, best, True
    prev_improvement = math.inf
    for _ in range(max_sweeps):
        previous = best
        for ci in range(3):
            lo, hi = boxes[ci]
            if lo == hi:
                continue
            x, v, t = _line_refine(objective, point, ci, lo, hi)
            if v < best:
                point[ci] = x
                best, tol = v, t
            if early_exit and best <= tol:
                return point, best, True
        improvement = previous - best
        if improvement <= 1e-11 * (1.0 + abs(best)):
            break
        # only far from the feasibility boundary: near it the sweep
        # improvements plateau before dropping and extrapolation misjudges
        if give_up_margin is not None and best > 100.0 * give_up_margin:
            ratio = improvement / prev_improvement
            if ratio < 1.0:
                remaining = improvement * ratio / (1.0 - ratio)
                if best - 3.0 * remaining > 100.0 * give_up_margin:
                    break
        prev_improvement = improvement
    return point, best, best <= tol


def _default_starts(alpha: float, lam_box, sig_box):
    lams = [0.5, 1.0, 2.0, 3.5]
    sigs = [1.0 / alpha, 10.0 / alpha]
    lo, hi = lam_box
    slo, shi = sig_box
    starts = []
    for lam in lams:
        for s in sigs:
            starts.append((min(max(lam, lo), hi), min(max(s, slo), shi), min(max(s, slo), shi)))
    return starts


def _search(alpha, fc, rho_sq, lam_fixed=None, warm=None, early_exit=True,
            warm_only=False):
    """Multi-start minimization of max_eig(Sigma) at fixed squared rate.

    Returns (point, value, feasible) for the best point seen.  With
    ``warm_only`` the cold starts are skipped when the warm starts settle the
    verdict by a clear margin; a marginal infeasible verdict still escalates
    to the full start set.
    """
    objective = _SigmaObjective(alpha, fc, rho_sq)
    lam_box = (lam_fixed, lam_fixed) if lam_fixed is not None else _LAM_BOX
    sig_box = (0.0, _SIGMA_BOX_SCALE / alpha)
    warm_starts = []
    if warm is not None:
        for w in warm:
            lam = lam_fixed if lam_fixed is not None else w[0]
            warm_starts.append((lam, w[1], w[2]))
    if lam_fixed is not None:
        cold_starts = [(lam_fixed, s1, s2)
                       for _, s1, s2 in _default_starts(alpha, _LAM_BOX, sig_box)]
    else:
        cold_starts = _default_starts(alpha, lam_box, sig_box)

    best_point, best_val = None, math.inf
    margin = _WARM_TRUST_MARGIN if warm_only else None
    for start in warm_starts:
        point, val, ok = _descend(objective, start, lam_box, sig_box,
                                  early_exit, give_up_margin=margin)
        if val < best_val:
            best_point, best_val = point, val
        if ok and early_exit:
            return point, val, True
    # warm starts are trusted only away from the feasibility boundary
    if warm_only and warm_starts and best_val > _WARM_TRUST_MARGIN:
        return best_point, best_val, False
    for start in cold_starts:
        point, val, ok = _descend(objective, start, lam_box, sig_box, early_exit)
        if val < best_val:
            best_point, best_val = point, val
        if ok and early_exit:
            return point, val, True
    _, tol = objective.single(*best_point)
    return best_point, best_val, best_val <= tol


def feasibility_search(alpha: float, fc: FunctionClass, rho_sq: float) -> Optional[LmiPoint]:
    """Witness (lambda, sigma1, sigma2) certifying the given squared rate, if any.

    Deterministic multi-start coordinate descent on the convex objective
    max_eig(Sigma); absence of a witness is a value, not an error.
    """
    if not (fc.strongly_convex and fc.smooth):
        raise ValueError("the linear-rate certificate requires 0 < m <= L < inf")
    point, _, ok = _search(alpha, fc, rho_sq, early_exit=True)
    if not ok:
        return None
    return LmiPoint(rho_sq=rho_sq, lam=point[0], sigma1=point[1], sigma2=point[2])


def _push_rate_batch(lams, s1s, s2s, alpha, fc):
    """Smallest squared rates certified by fixed (lam, sigma1, sigma2) points.

    The certificate factor depends on rho^2 only through its (0, 0) entry,
    so the tightest rate for a fixed witness is a rank-one NSD update solved
    in closed form from the eigendecomposition at rho^2 = 1.  Points whose
    factor is not NSD at rho^2 = 1 (no certificate at any rate) map to 1.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    s1s = np.atleast_1d(np.asarray(s1s, dtype=float))
    s2s = np.atleast_1d(np.asarray(s2s, dtype=float))
    Q1 = certify.build_Q1(alpha, fc)
    Q2 = certify.build_Q2(alpha)
    n = len(lams)
    base = np.zeros((n, 3, 3))
    l2 = lams ** 2
    base[:, 0, 1] = base[:, 1, 0] = -lams
    base[:, 0, 2] = base[:, 2, 0] = lams
    base[:, 1, 1] = base[:, 2, 2] = l2
    base[:, 1, 2] = base[:, 2, 1] = -l2
    base += s1s[:, None, None] * Q1 + s2s[:, None, None] * Q2
    w, V = np.linalg.eigh(-base)
    tol = 1e-12 * (1.0 + np.abs(base).max(axis=(1, 2)))
    c2 = V[:, 0, :] ** 2
    # a direction with a strictly negative eigenvalue of -base can never be
    # repaired by the rank-one (0, 0) update; near-null directions block only
    # when they carry first-coordinate mass
    blocked = np.any(
        (w < -tol[:, None])
        | ((w <= tol[:, None]) & (c2 > tol[:, None])),
        axis=1,
    )
    pos = w > tol[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        mass = np.sum(np.where(pos, c2 / w, 0.0), axis=1)
    out = np.where((mass > 0) & ~blocked, 1.0 - 1.0 / np.where(mass > 0, mass, 1.0), 1.0)
    return out


def _push_rate(point, alpha, fc):
    return float(_push_rate_batch([point[0]], [point[1]], [point[2]], alpha, fc)[0])


_DIAGONAL_DIRECTIONS = (
    (1.0, 1.0, 1.0), (-1.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, -1.0),
    (0.0, 1.0, 1.0), (0.0, 1.0, -1.0), (1.0, 1.0, 0.0), (1.0, 0.0, 1.0),
)


def _refine_on_rate(point, alpha, fc, lam_fixed=None, sweeps=8):
    """Witness refinement scored by the exact tightest rate it certifies.

    Coordinate line searches alone can stall on a corner of the piecewise
    rate surface, so each sweep also searches a fixed set of diagonal
    directions; both avoid the flatness of minimizing max_eig near the
    optimum.
    """
    point = list(point)
    sig_hi = _SIGMA_BOX_SCALE / alpha
    best = _push_rate(point, alpha, fc)
    boxes = [_LAM_BOX if lam_fixed is None else None,
             (0.0, sig_hi), (0.0, sig_hi)]

    def clip(vals, ci):
        lo, hi = boxes[ci] if boxes[ci] is not None else (point[ci], point[ci])
        return np.clip(vals, lo, hi)

    for _ in range(sweeps):
        previous = best
        for ci in range(3):
            if boxes[ci] is None:
                continue
            lo, hi = boxes[ci]
            for _stage in range(4):
                xs = np.linspace(lo, hi, 25)
                cols = [np.full(25, point[0]), np.full(25, point[1]), np.full(25, point[2])]
                cols[ci] = xs
                vals = _push_rate_batch(cols[0], cols[1], cols[2], alpha, fc)
                i = int(np.argmin(vals))
                if vals[i] < best:
                    best = float(vals[i])
                    point[ci] = float(xs[i])
                lo = xs[max(i - 1, 0)]
                hi = xs[min(i + 1, 24)]
        for d in _DIAGONAL_DIRECTIONS:
            step = [0.25 * d[0] if lam_fixed is None else 0.0,
                    0.5 * max(point[1], 1.0) * d[1],
                    0.5 * max(point[2], 1.0) * d[2]]
            if all(s == 0.0 for s in step):
                continue
            lo_t, hi_t = -1.0, 1.0
            for _stage in range(4):
                ts = np.linspace(lo_t, hi_t, 25)
                cols = [clip(point[ci] + ts * step[ci], ci) for ci in range(3)]
                vals = _push_rate_batch(cols[0], cols[1], cols[2], alpha, fc)
                i = int(np.argmin(vals))
                if vals[i] < best:
                    best = float(vals[i])
                    point = [float(cols[0][i]), float(cols[1][i]), float(cols[2][i])]
                lo_t = ts[max(i - 1, 0)]
                hi_t = ts[min(i + 1, 24)]
        if previous - best <= 1e-10:
            break
    return point, best


def optimize_rate(alpha: float, fc: FunctionClass,
                  lam_fixed: Optional[float] = None) -> certify.Certificate:
    """Best certified squared linear rate via bisection, with its witness.

    Bisects rho^2 over (0, 1) down to a gap of 1e-4, maintaining the largest
    known-infeasible and smallest known-feasible values, then re-polishes the
    witness at the final rate and revalidates it through the direct
    certificate check.  ``lam_fixed`` pins the relaxation parameter instead
    of optimizing it.
    """
    if not (fc.strongly_convex and fc.smooth):
        raise ValueError("the linear-rate certificate requires 0 < m <= L < inf")
    hi = 1.0 - 1e-9
    point, _, ok = _search(alpha, fc, hi, lam_fixed=lam_fixed, early_exit=True)
    if not ok:
        raise RuntimeError(
            "near-stationary certificate infeasible; eigensolver or search failure"
        )
    lo = 0.0
    best_infeasible = None
    while hi - lo > _BISECT_TOL:
        mid = (lo + hi) / 2.0
        warm = [point]
        if best_infeasible is not None:
            warm.append(best_infeasible)
        cand, _, ok = _search(alpha, fc, mid, lam_fixed=lam_fixed, warm=warm,
                              early_exit=True, warm_only=True)
        if ok:
            hi, point = mid, cand
        else:
            lo = mid
            best_infeasible = cand

    # polish: minimize at the certified rate, then refine the witness against
    # the exact tightest rate it certifies
    point, _, _ = _search(alpha, fc, hi, lam_fixed=lam_fixed, warm=[point],
                          early_exit=False, warm_only=True)
    point, pushed = _refine_on_rate(point, alpha, fc, lam_fixed=lam_fixed)
    hi = min(hi, min(max(pushed, 1e-9), 1.0 - 1e-9))

    cert = None
    for _ in range(6):
        cert = certify.make_certificate(
            certify.CertCase.CASE3, fc, alpha,
            lam=point[0], sigma1=point[1], sigma2=point[2], rho_sq=hi,
        )
        if cert.feasible:
            return cert
        # tolerance mismatch between the 4x4 and 3x3 checks; back off the rate
        hi = min(hi + max(_BISECT_TOL, 1e-6), 1.0 - 1e-9)
    raise RuntimeError("failed to revalidate the optimized certificate")


DEFAULT_ALPHA_GRID = np.logspace(math.log10(0.01), math.log10(10.0), 25)
DEFAULT_KAPPA_GRID = (2.0, 5.0, 10.0, 50.0, 100.0, 500.0)


def sweep_heatmap(alpha_grid: Sequence[float], kappa_grid: Sequence[float],
                  m_base: float = 1.0) -> list:
    """Optimal certified rate per (alpha, kappa) cell, row-major (kappa outer).

    Per-cell failures are recorded in the cell rather than aborting the sweep.
    """
    if len(alpha_grid) == 0 or len(kappa_grid) == 0:
        raise ValueError("grids must be nonempty")
    if not m_base > 0:
        raise ValueError("m_base must be > 0")
    cells = []
    for kappa in kappa_grid:
        fc = FunctionClass(m_base, kappa * m_base)
        for alpha in alpha_grid:
            try:
                cert = optimize_rate(float(alpha), fc)
                cells.append(SweepCell(
                    alpha=float(alpha), kappa=float(kappa),
                    rho_opt=math.sqrt(cert.rho_sq), lambda_opt=cert.lam,
                    sigma1=cert.sigma1, sigma2=cert.sigma2, feasible=True,
                ))
            except (RuntimeError, ValueError):
                cells.append(SweepCell(
                    alpha=float(alpha), kappa=float(kappa),
                    rho_opt=math.nan, lambda_opt=math.nan,
                    sigma1=math.nan, sigma2=math.nan, feasible=False,
                ))
    return cells


def write_heatmap_csv(cells: Sequence[SweepCell], path):
    """Heatmap CSV: alpha, kappa, rho_opt, lambda_opt, sigma1, sigma2, feasible."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "kappa", "rho_opt", "lambda_opt", "sigma1", "sigma2", "feasible"])
        for c in cells:
            w.writerow([repr(c.alpha), repr(c.kappa), repr(c.rho_opt),
                        repr(c.lambda_opt), repr(c.sigma1), repr(c.sigma2),
                        int(c.feasible)])

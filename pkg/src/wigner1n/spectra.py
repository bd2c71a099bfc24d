"""Spectral statistics of sampled matrices.

Scaled moments follow the convention ``m_p = E[(1/N) Tr (X/sqrt(N))^p]``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np
from scipy.linalg.blas import dsyrk

from .ensembles import EnsembleSpec, sample_matrix

__all__ = [
    "ConvergenceError",
    "MCEstimate",
    "Histogram",
    "FitResult",
    "trace_power",
    "eigenvalues",
    "empirical_density",
    "scaled_moment_samples",
    "estimate_scaled_moment",
    "welford",
    "fit_one_over_N",
]

JACOBI_MAX_SWEEPS = 30
JACOBI_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """Jacobi sweeps did not reduce the off-diagonal mass below tolerance."""


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    heights: np.ndarray
    normalization: float = 1.0

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def mass(self) -> float:
        return float(np.sum(self.heights * self.widths))


@dataclass(frozen=True)
class FitResult:
    c0: float
    c1: float
    residual: float
    c0_stderr: float = math.nan
    c1_stderr: float = math.nan


def trace_power(A: np.ndarray, p: int) -> float:
    """``Tr(A^p)`` by repeated multiplication.

    Uses ``Tr(A^(2k)) = ||A^k||_F^2`` for even powers, which also makes the
    result nonnegative by construction.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    A = np.asarray(A, dtype=float)
    half = p // 2
    if half == 0:
        return float(np.trace(A))
    if p == 4 and A.shape[0] > 1:
        # A symmetric: syrk on the F-ordered view gives the upper half of A @ A
        C = dsyrk(1.0, A.T, trans=1)
        return float(2 * np.sum(C * C) - np.sum(np.diag(C) ** 2))
    B = A
    for _ in range(half - 1):
        B = B @ A
    if p % 2 == 0:
        return float(np.sum(B * B))
    # Tr(B @ B @ A) without forming the product
    return float(np.sum((B @ B) * A))


@numba.njit(cache=True)
def _off_norm(a):
    n = a.shape[0]
    acc = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                acc += a[i, j] * a[i, j]
    return math.sqrt(acc)


@numba.njit(cache=True)
def _jacobi_sweep(a):
    # one cyclic sweep over all pairs p < q, rotating in place
    n = a.shape[0]
    for p in range(n - 1):
        for q in range(p + 1, n):
            apq = a[p, q]
            if apq == 0.0:
                continue
            diff = a[q, q] - a[p, p]
            sgn = 1.0 if diff >= 0.0 else -1.0
            # tangent of the smaller angle; hypot avoids over- and underflow
            t = 2.0 * sgn * apq / (abs(diff) + math.hypot(diff, 2.0 * apq))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            for k in range(n):
                akp = a[k, p]
                akq = a[k, q]
                a[k, p] = c * akp - s * akq
                a[k, q] = s * akp + c * akq
            for k in range(n):
                apk = a[p, k]
                aqk = a[q, k]
                a[p, k] = c * apk - s * aqk
                a[q, k] = s * apk + c * aqk
            a[p, q] = 0.0
            a[q, p] = 0.0


def eigenvalues(A: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS) -> np.ndarray:
    """All eigenvalues of a real symmetric matrix, ascending.

    Cyclic (row-order) Jacobi rotations until the off-diagonal Frobenius
    norm is at most ``tol * ||A||_F``.  Raises :class:`ConvergenceError`
    after ``max_sweeps`` sweeps.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    a = np.array(A, dtype=np.float64, order="C")
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    target = tol * math.sqrt(float(np.sum(a * a)))
    sweeps = 0
    while _off_norm(a) > target:
        if sweeps == max_sweeps:
            raise ConvergenceError(
                f"off-diagonal norm {_off_norm(a):.3e} above {target:.3e} "
                f"after {max_sweeps} sweeps"
            )
        _jacobi_sweep(a)
        sweeps += 1
    return np.sort(a.diagonal().copy())


def empirical_density(eigs: Sequence[float], N_scale: int, bins: int, range: tuple[float, float]) -> Histogram:
    """Histogram of ``eigs / sqrt(N_scale)`` normalised to unit total mass.

    The mass is taken over all supplied eigenvalues, so points falling
    outside ``range`` reduce the in-range mass below one.
    """
    eigs = np.asarray(eigs, dtype=float).ravel()
    if eigs.size == 0:
        raise ValueError("no eigenvalues supplied")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = range
    if not lo < hi:
        raise ValueError("range must satisfy lo < hi")
    scaled = eigs / math.sqrt(N_scale)
    counts, edges = np.histogram(scaled, bins=bins, range=(lo, hi))
    heights = counts / (eigs.size * np.diff(edges))
    return Histogram(edges, heights, float(np.sum(counts)) / eigs.size)


def welford(values: Iterable[float]) -> MCEstimate:
    """Mean and standard error of the mean in one pass, in the given order."""
    n = 0
    mean = 0.0
    m2 = 0.0
    for x in values:
        n += 1
        d = x - mean
        mean += d / n
        m2 += d * (x - mean)
    if n < 2:
        raise ValueError("need at least two samples")
    return MCEstimate(float(mean), math.sqrt(m2 / (n - 1) / n), n)


def _scaled_moment(spec: EnsembleSpec, N: int, p: int, seed: int, index: int) -> float:
    A = sample_matrix(spec, N, seed, index)
    return trace_power(A, p) / N ** (1 + p / 2)


def scaled_moment_samples(
    spec: EnsembleSpec, N: int, p: int, samples: int, seed: int, workers: int = 1
) -> np.ndarray:
    """``(1/N) Tr (X/sqrt(N))^p`` for sample indices ``0..samples-1``."""
    if workers <= 1:
        return np.array([_scaled_moment(spec, N, p, seed, s) for s in range(samples)])
    with ThreadPoolExecutor(max_workers=workers) as pool:
        vals = pool.map(lambda s: _scaled_moment(spec, N, p, seed, s), range(samples))
        return np.fromiter(vals, dtype=float, count=samples)


def estimate_scaled_moment(
    spec: EnsembleSpec, N: int, p: int, samples: int, seed: int, workers: int = 1
) -> MCEstimate:
    """Monte Carlo estimate of ``m_p`` at size ``N``.

    Every sample draws from its own stream keyed on ``(seed, index)`` and
    the reduction runs in index order, so the result does not depend on
    ``workers``.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    return welford(scaled_moment_samples(spec, N, p, samples, seed, workers))


def fit_one_over_N(points: Sequence[tuple[float, float, float]]) -> FitResult:
    """Weighted least squares of ``value ~ c0 + c1/N``.

    ``points`` are ``(N, value, stderr)``.  Zero standard errors (exact
    data) get unit weights.  ``residual`` is the weighted RMS misfit.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must be (N, value, stderr) triples")
    Ns, y, se = pts.T
    if len(np.unique(Ns)) < 2:
        raise ValueError("degenerate design: need at least two distinct N")
    exact = np.all(se == 0)
    if not exact and np.any(se <= 0):
        raise ValueError("standard errors must be positive (or all zero)")
    wts = np.ones_like(y) if exact else 1 / se ** 2
    X = np.column_stack([np.ones_like(Ns), 1 / Ns])
    sw = np.sqrt(wts)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    r = (y - X @ coef) * sw
    residual = float(np.sqrt(np.mean(r * r)))
    if exact:
        c0_se = c1_se = 0.0
    else:
        cov = np.linalg.inv(X.T @ (X * wts[:, None]))
        c0_se, c1_se = np.sqrt(np.diag(cov))
    return FitResult(float(coef[0]), float(coef[1]), residual, float(c0_se), float(c1_se))

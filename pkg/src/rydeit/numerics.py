"""Dense complex linear algebra and an adaptive Runge-Kutta integrator.

Nothing in here knows about atoms. Matrices are plain ``numpy`` arrays of
dtype ``complex128``; the tensor-product convention is atom-1-major
(``numpy.kron`` order) and vectorization is column stacking,
``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NotHermitian, Singular, StepUnderflow

__all__ = [
    "kron",
    "adjoint",
    "vec",
    "unvec",
    "EigenDecomposition",
    "eig_hermitian",
    "solve_linear",
    "ODEResult",
    "integrate_ode",
]


def kron(*ops: np.ndarray) -> np.ndarray:
    """Tensor product, leftmost factor most significant."""
    if not ops:
        raise ValueError("kron needs at least one operand")
    return reduce(np.kron, (np.asarray(o, dtype=complex) for o in ops))


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, dim: Optional[int] = None) -> np.ndarray:
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionMismatch(f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(dim, dim, order="F")


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def eig_hermitian(h: np.ndarray, rtol: float = 1e-12) -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix.

    Eigenvalues come back ascending. Each eigenvector is unit norm with its
    largest-magnitude component rotated onto the positive real axis, so the
    output is deterministic for non-degenerate spectra.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {h.shape}")
    scale = max(np.abs(h).max(initial=0.0), 1.0)
    asym = np.abs(h - h.conj().T).max(initial=0.0)
    if asym > rtol * scale:
        raise NotHermitian(f"max |h - h^dagger| = {asym:.3e}")
    values, vectors = np.linalg.eigh(0.5 * (h + h.conj().T))
    for i in range(vectors.shape[1]):
        col = vectors[:, i]
        k = int(np.argmax(np.abs(col)))
        vectors[:, i] = col * (np.abs(col[k]) / col[k])
    return EigenDecomposition(values, vectors)


def solve_linear(a: np.ndarray, b: np.ndarray, pivot_rtol: float = 1e-13) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting.

    Raises :class:`Singular` when a pivot falls below ``pivot_rtol * ||a||_inf``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise DimensionMismatch(f"rhs length {b.shape[0]} != {a.shape[0]}")
    norm = np.linalg.norm(a, ord=np.inf)
    if norm == 0.0:
        raise Singular("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < pivot_rtol * norm:
        raise Singular(f"pivot {pivots.min():.3e} below {pivot_rtol:g} * ||a||")
    return scipy.linalg.lu_solve((lu, piv), b, check_finite=False)


# Dormand-Prince 5(4) tableau with its free 4th-order interpolant.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
]
_A_MAT = np.zeros((6, 6))
for _i, _row in enumerate(_A):
    _A_MAT[_i, : len(_row)] = _row
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
_E = np.array([-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40])
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])


@dataclass
class ODEResult:
    y: np.ndarray
    t: np.ndarray
    samples: np.ndarray
    n_steps: int
    n_rejected: int
    n_eval: int


def _error_norm(err, y, y_new, rel_tol, abs_tol):
    scale = np.maximum(np.abs(y), np.abs(y_new))
    scale *= rel_tol
    scale += abs_tol
    return float((np.abs(err) / scale).max())


def integrate_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0,
    t_span: Sequence[float],
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
    sample_times: Optional[Sequence[float]] = None,
    first_step: Optional[float] = None,
    max_step: float = np.inf,
) -> ODEResult:
    """Integrate ``dy/dt = rhs(t, y)`` with an embedded Dormand-Prince 5(4) pair.

    The local error estimate is measured in the max norm against
    ``abs_tol + rel_tol * |y|``. Samples at ``sample_times`` (which must lie
    inside ``t_span``) come from the method's 4th-order continuous extension.
    Raises :class:`StepUnderflow` once the step shrinks below ``1e-12`` of
    the span.
    """
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    t0, t1 = float(t_span[0]), float(t_span[1])
    span = t1 - t0
    if not span > 0:
        raise ValueError("t_span must be a nonempty increasing interval")
    y = np.array(y0, dtype=complex).ravel()
    ts = np.array([] if sample_times is None else sample_times, dtype=float)
    if ts.size and (ts.min() < t0 - 1e-12 * span or ts.max() > t1 + 1e-12 * span):
        raise ValueError("sample times must lie inside t_span")
    if ts.size and np.any(np.diff(ts) < 0):
        raise ValueError("sample times must be sorted")
    samples = np.empty((ts.size, y.size), dtype=complex)
    n_sampled = 0
    while n_sampled < ts.size and ts[n_sampled] <= t0:
        samples[n_sampled] = y
        n_sampled += 1

    K = np.empty((7, y.size), dtype=complex)
    K[0] = rhs(t0, y)
    n_eval = 1

    if first_step is None:
        # Hairer-Wanner starting step heuristic.
        scale = abs_tol + rel_tol * np.abs(y)
        d0 = np.max(np.abs(y) / scale)
        d1 = np.max(np.abs(K[0]) / scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        h0 = min(h0, span)
        f1 = rhs(t0 + h0, y + h0 * K[0])
        n_eval += 1
        d2 = np.max(np.abs(f1 - K[0]) / scale) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** 0.2
        h = min(100 * h0, h1)
    else:
        h = float(first_step)
    h = min(h, max_step, span)
    min_step = 1e-12 * span

    t = t0
    n_steps = n_rejected = 0
    while t < t1:
        if h < min_step:
            raise StepUnderflow(f"step {h:.3e} below {min_step:.3e} at t={t:.6g}")
        last = t + h >= t1
        if last:
            h = t1 - t
        for s in range(1, 6):
            K[s] = rhs(t + _C[s] * h, y + (h * _A_MAT[s, :s]) @ K[:s])
        y_new = y + (h * _B) @ K[:6]
        K[6] = rhs(t + h, y_new)
        n_eval += 6
        err = _error_norm((h * _E) @ K, y, y_new, rel_tol, abs_tol)
        if err <= 1.0:
            t_new = t1 if last else t + h
            if n_sampled < ts.size and ts[n_sampled] <= t_new:
                Q = K.T @ _P
                while n_sampled < ts.size and ts[n_sampled] <= t_new:
                    x = (ts[n_sampled] - t) / h
                    samples[n_sampled] = y + h * (Q @ np.array([x, x * x, x**3, x**4]))
                    n_sampled += 1
            t, y = t_new, y_new
            K[0] = K[6]
            n_steps += 1
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err**-0.2)
        else:
            n_rejected += 1
            factor = max(0.2, 0.9 * err**-0.2)
        h = min(h * factor, max_step)
    while n_sampled < ts.size:
        samples[n_sampled] = y
        n_sampled += 1
    return ODEResult(y=y, t=ts, samples=samples, n_steps=n_steps, n_rejected=n_rejected, n_eval=n_eval)

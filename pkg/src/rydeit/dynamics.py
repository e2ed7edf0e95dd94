"""Lindblad generators, steady states and time evolution on dense matrices."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
from numba import njit

from .errors import DegenerateSteadyState, DimensionMismatch, PhysicalityLost
from .model import TWO_PI
from .numerics import integrate_ode, solve_linear, unvec, vec

Jumps = Sequence[Tuple[np.ndarray, float]]


@dataclass
class DensityMatrix:
    matrix: np.ndarray
    levels: int
    n_atoms: int

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def violations(self) -> Tuple[float, float, float]:
        """(|trace - 1|, max |rho - rho^dagger|, -min eigenvalue)."""
        m = self.matrix
        trace_err = abs(np.trace(m) - 1.0)
        herm_err = float(np.abs(m - m.conj().T).max())
        min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
        return trace_err, herm_err, -min_eig

    def check(self, trace_tol: float = 1e-10, herm_tol: float = 1e-10, eig_tol: float = 1e-8) -> "DensityMatrix":
        tr, herm, neg = self.violations()
        if tr > trace_tol or herm > herm_tol or neg > eig_tol:
            raise PhysicalityLost(
                f"trace error {tr:.2e}, hermiticity error {herm:.2e}, min eigenvalue {-neg:.2e}"
            )
        return self

    @classmethod
    def pure(cls, index: int, levels: int, n_atoms: int) -> "DensityMatrix":
        d = levels**n_atoms
        m = np.zeros((d, d), dtype=complex)
        m[index, index] = 1.0
        return cls(m, levels, n_atoms)


@dataclass
class Liouvillian:
    """Superoperator acting on column-stacked density matrices, in rad/us."""

    matrix: np.ndarray
    dim: int

    def trace_defect(self) -> float:
        """||vec(I)^dagger L|| / ||L||."""
        row = vec(np.eye(self.dim)).conj() @ self.matrix
        norm = np.linalg.norm(self.matrix)
        return float(np.linalg.norm(row) / norm) if norm else 0.0

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return unvec(self.matrix @ vec(rho), self.dim)


def build_liouvillian(h: np.ndarray, jumps: Jumps = (), scale: float = TWO_PI) -> Liouvillian:
    """Lindblad generator for Hamiltonian ``h`` and (operator, rate) channels.

    ``h`` and the rates share one unit; the result is multiplied by ``scale``
    (default 2*pi: cyclic MHz in, rad/us out).
    """
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    if h.shape != (d, d):
        raise DimensionMismatch(f"Hamiltonian must be square, got {h.shape}")
    eye = np.eye(d, dtype=complex)
    L = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for c, rate in jumps:
        c = np.asarray(c, dtype=complex)
        if c.shape != (d, d):
            raise DimensionMismatch(f"jump operator shape {c.shape} does not match {d}x{d}")
        cdc = c.conj().T @ c
        L += rate * (np.kron(c.conj(), c) - 0.5 * np.kron(eye, cdc) - 0.5 * np.kron(cdc.T, eye))
    return Liouvillian(scale * L, d)


def lindblad_rhs(h_of_t: Callable[[float], np.ndarray], jumps: Jumps, dim: int):
    """Matrix-free right-hand side on vectorized states; ``h_of_t`` and rates in rad/us."""
    ops = [(np.asarray(c, dtype=complex), float(rate)) for c, rate in jumps if rate > 0]
    anti = sum((0.5 * rate * (c.conj().T @ c) for c, rate in ops), np.zeros((dim, dim), dtype=complex))
    lowers = [np.sqrt(rate) * c for c, rate in ops]
    uppers = [m.conj().T for m in lowers]

    def rhs(t, y):
        rho = y.reshape(dim, dim).T  # column stacking -> row-major transpose
        g = -1j * h_of_t(t) - anti  # effective non-Hermitian generator
        drho = g @ rho
        drho += drho.conj().T
        for m, md in zip(lowers, uppers):
            drho += m @ rho @ md
        return drho.T.ravel()

    return rhs


@njit(cache=True)
def _sparse_lindblad_kernel(t, y, dim, g_rows, g_cols, g_vals, d_rows, d_cols, d_vals, d_freqs,
                            j_ptr, j_rows, j_cols, j_vals):
    # y is column-stacked: rho[i, j] == y[i + dim * j]
    out = np.zeros(dim * dim, dtype=np.complex128)
    # G rho with G = static non-Hermitian part + time-dependent drive
    for n in range(g_rows.size):
        r, c, a = g_rows[n], g_cols[n], g_vals[n]
        for k in range(dim):
            out[r + dim * k] += a * y[c + dim * k]
    for n in range(d_rows.size):
        r, c = d_rows[n], d_cols[n]
        a = -1j * d_vals[n] * np.exp(-1j * d_freqs[n] * t)
        b = -1j * np.conj(d_vals[n] * np.exp(-1j * d_freqs[n] * t))
        for k in range(dim):
            out[r + dim * k] += a * y[c + dim * k]
            out[c + dim * k] += b * y[r + dim * k]
    # add the adjoint: G rho + rho G^dagger
    for i in range(dim):
        for j in range(i, dim):
            a = out[i + dim * j]
            b = out[j + dim * i]
            out[i + dim * j] = a + np.conj(b)
            out[j + dim * i] = b + np.conj(a)
    for m in range(j_ptr.size - 1):
        for p in range(j_ptr[m], j_ptr[m + 1]):
            for q in range(j_ptr[m], j_ptr[m + 1]):
                out[j_rows[p] + dim * j_rows[q]] += (
                    j_vals[p] * np.conj(j_vals[q]) * y[j_cols[p] + dim * j_cols[q]]
                )
    return out


def _coo(m, tol=0.0):
    r, c = np.nonzero(np.abs(m) > tol)
    return r.astype(np.int64), c.astype(np.int64), m[r, c].astype(np.complex128)


def sparse_lindblad_rhs(static_h: np.ndarray, drives: Sequence[Tuple[np.ndarray, float]], jumps: Jumps):
    """Compiled right-hand side for ``H(t) = static_h + sum_k (exp(-i w_k t) A_k + h.c.)``.

    Everything in rad/us. Suited to the sparse operators of few-level atoms;
    the result agrees with :func:`lindblad_rhs` built from the same pieces.
    """
    static_h = np.asarray(static_h, dtype=complex)
    dim = static_h.shape[0]
    ops = [(np.asarray(c, dtype=complex), float(rate)) for c, rate in jumps if rate > 0]
    g = -1j * static_h
    for c, rate in ops:
        g -= 0.5 * rate * (c.conj().T @ c)
    g_rows, g_cols, g_vals = _coo(g)
    d_rows, d_cols, d_vals, d_freqs = [], [], [], []
    for op, w in drives:
        r, c, a = _coo(np.asarray(op, dtype=complex))
        d_rows.append(r)
        d_cols.append(c)
        d_vals.append(a)
        d_freqs.append(np.full(r.size, float(w)))
    cat = lambda parts, dt: np.concatenate(parts).astype(dt) if parts else np.zeros(0, dt)  # noqa: E731
    d_rows, d_cols = cat(d_rows, np.int64), cat(d_cols, np.int64)
    d_vals, d_freqs = cat(d_vals, np.complex128), cat(d_freqs, np.float64)
    j_ptr, j_rows, j_cols, j_vals = [0], [], [], []
    for c, rate in ops:
        r, cc, a = _coo(np.sqrt(rate) * c)
        j_rows.append(r)
        j_cols.append(cc)
        j_vals.append(a)
        j_ptr.append(j_ptr[-1] + r.size)
    j_ptr = np.asarray(j_ptr, dtype=np.int64)
    j_rows, j_cols = cat(j_rows, np.int64), cat(j_cols, np.int64)
    j_vals = cat(j_vals, np.complex128)

    def rhs(t, y):
        return _sparse_lindblad_kernel(
            float(t), y, dim, g_rows, g_cols, g_vals, d_rows, d_cols, d_vals, d_freqs, j_ptr, j_rows, j_cols, j_vals
        )

    return rhs


def reachable_support(h: np.ndarray, jumps: Jumps, start: Union[int, Sequence[int]]) -> List[int]:
    """Basis states connected to ``start`` by the Hamiltonian or by a decay channel."""
    adj = np.abs(np.asarray(h)) > 0  # adj[j, i]: i -> j
    for c, rate in jumps:
        if rate > 0:
            adj |= np.abs(np.asarray(c)) > 0
    todo = [start] if isinstance(start, (int, np.integer)) else list(start)
    seen = set(todo)
    while todo:
        i = todo.pop()
        for j in np.nonzero(adj[:, i])[0]:
            if j not in seen:
                seen.add(int(j))
                todo.append(int(j))
    return sorted(int(i) for i in seen)


def _support_indices(dim: int, support: Sequence[int]) -> np.ndarray:
    s = np.asarray(support, dtype=int)
    # column stacking: rho[i, j] lives at i + j*dim
    return (s[:, None] + dim * s[None, :]).T.ravel()


def steady_state(
    l: Liouvillian,
    support: Optional[Sequence[int]] = None,
    levels: Optional[int] = None,
    n_atoms: int = 1,
    rank_rtol: float = 1e-10,
) -> DensityMatrix:
    """Unique unit-trace null vector of ``l``.

    With ``support`` the problem is solved on operators confined to that
    invariant set of basis states (everything else is set to zero). Raises
    :class:`DegenerateSteadyState` if the (restricted) generator has a null
    space of dimension above one.
    """
    d = l.dim
    if support is None:
        idx = np.arange(d * d)
        sub = list(range(d))
        a = l.matrix.copy()
    else:
        sub = sorted(int(i) for i in support)
        idx = _support_indices(d, sub)
        a = l.matrix[np.ix_(idx, idx)].copy()
        outside = np.setdiff1d(np.arange(d * d), idx)
        leak = np.abs(l.matrix[np.ix_(outside, idx)]).max(initial=0.0)
        if leak > 1e-12 * np.abs(l.matrix).max():
            raise ValueError("support is not invariant under the Liouvillian")
    n = a.shape[0]
    sv = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(sv > rank_rtol * sv[0])) if sv[0] > 0 else 0
    if rank < n - 1:
        raise DegenerateSteadyState(f"rank {rank} < {n - 1}: more than one stationary state")
    k = len(sub)
    trace_row = np.zeros(n, dtype=complex)
    trace_row[np.arange(k) * (k + 1)] = 1.0
    a[0, :] = trace_row
    b = np.zeros(n, dtype=complex)
    b[0] = 1.0
    x = solve_linear(a, b)
    full = np.zeros(d * d, dtype=complex)
    full[idx] = x
    rho = unvec(full, d)
    rho = 0.5 * (rho + rho.conj().T)
    if levels is None:
        levels, n_atoms = d, 1
    return DensityMatrix(rho, levels, n_atoms)


@dataclass
class Trajectory:
    times: np.ndarray
    states: List[DensityMatrix]


def evolve(
    rho0: DensityMatrix,
    generator: Union[Liouvillian, Callable[[float, np.ndarray], np.ndarray]],
    t_span: Sequence[float],
    sample_times: Optional[Sequence[float]] = None,
    rel_tol: float = 1e-9,
    abs_tol: float = 1e-12,
    trace_tol: float = 1e-8,
    check: bool = True,
) -> Trajectory:
    """Integrate the master equation from ``rho0``.

    ``generator`` is either a static :class:`Liouvillian` or a right-hand
    side ``f(t, vec_rho)`` (see :func:`lindblad_rhs`). Every sample is
    checked for unit trace, Hermiticity and positivity.
    """
    rho0.check(trace_tol, trace_tol)
    d = rho0.dim
    if isinstance(generator, Liouvillian):
        if generator.dim != d:
            raise DimensionMismatch(f"Liouvillian dim {generator.dim} != state dim {d}")
        mat = generator.matrix
        rhs = lambda t, y: mat @ y  # noqa: E731
    else:
        rhs = generator
    if sample_times is None:
        sample_times = [t_span[0], t_span[1]]
    res = integrate_ode(rhs, vec(rho0.matrix), t_span, rel_tol, abs_tol, sample_times=sample_times)
    states = []
    for y in res.samples:
        rho = DensityMatrix(unvec(y, d), rho0.levels, rho0.n_atoms)
        if check:
            rho.check(trace_tol, trace_tol)
        states.append(rho)
    return Trajectory(np.asarray(sample_times, dtype=float), states)


def level_population(rho: DensityMatrix, level: int, atom: int) -> float:
    """Tr[(|level><level| on ``atom``) rho]."""
    diag = np.real(np.diag(rho.matrix)).reshape((rho.levels,) * rho.n_atoms)
    axes = tuple(k for k in range(rho.n_atoms) if k != atom - 1)
    marginal = diag.sum(axis=axes) if axes else diag
    return float(marginal[level])


def rydberg_population(rho: DensityMatrix, atom: int = 1) -> float:
    """Rydberg population of ``atom``; r is the highest level in every basis used here."""
    return level_population(rho, rho.levels - 1, atom)

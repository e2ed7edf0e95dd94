"""Dressed-state predictions, spectrum scans, peak finding and reconciliation."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import build_liouvillian, reachable_support, rydberg_population, steady_state
from .errors import EmptySpectrum
from .model import (
    G_C,
    G_P,
    EffectiveParams,
    RawParams,
    build_coupling_channel_hamiltonian,
    build_effective_hamiltonian,
    build_jump_operators,
    build_single_atom_hamiltonian,
    derive_effective_params,
    two_atom_index,
)
from .numerics import eig_hermitian


@dataclass(frozen=True)
class DressedSingle:
    e_plus: float
    e_minus: float
    varpi: float
    states: Tuple[np.ndarray, np.ndarray]  # (|d+>, |d->) over (g_c, r)


@dataclass(frozen=True)
class DressedPair:
    energies: np.ndarray
    amplitudes: np.ndarray  # column j holds eta_{n, j}
    vdw_shifts: np.ndarray


def dressed_single(eff: EffectiveParams) -> DressedSingle:
    """Closed-form dressed states of the {g_c, r} block driven by lambda_c."""
    eps, lam = eff.eps_c, eff.lambda_c
    varpi = float(np.sqrt(eps**2 / 4 + abs(lam) ** 2))
    states = []
    for e in (eps / 2 + varpi, eps / 2 - varpi):
        amp = np.array([e, lam], dtype=complex)
        norm = np.linalg.norm(amp)
        states.append(amp / norm if norm > 0 else np.array([0, 1], dtype=complex))
    return DressedSingle(eps / 2 + varpi, eps / 2 - varpi, varpi, tuple(states))


def dressed_pair(eff: EffectiveParams, v: float, degeneracy_tol: float = 1e-9) -> DressedPair:
    """Eigenstates of the coupling-channel Hamiltonian.

    When the two atoms are dressed identically the Hamiltonian commutes with
    atom exchange and the symmetric and antisymmetric sectors are diagonalized
    separately, so the dark state stays exact however close the levels get.
    Otherwise, inside a degenerate eigenspace the basis is fixed by
    diagonalizing the |rr> projector there, which is the basis an
    infinitesimal interaction would select.
    """
    h = build_coupling_channel_hamiltonian(eff, v)
    swap = np.eye(4)[[0, 2, 1, 3]]
    if np.array_equal(swap @ h @ swap, h):
        return _dressed_pair_by_exchange(h, v, degeneracy_tol)
    energies, vectors = eig_hermitian(h)
    scale = max(np.abs(h).max(), 1.0)
    start = 0
    while start < energies.size:
        stop = start + 1
        while stop < energies.size and energies[stop] - energies[start] < degeneracy_tol * scale:
            stop += 1
        if stop - start > 1:
            block = vectors[:, start:stop]
            proj = np.outer(block[3].conj(), block[3])  # <a|rr><rr|b>
            _, rot = eig_hermitian(proj, rtol=1e-9)
            vectors[:, start:stop] = _fix_phase(block @ rot)
        start = stop
    return DressedPair(energies, vectors, np.abs(vectors[3, :]) ** 2 * v)


def _dressed_pair_by_exchange(h: np.ndarray, v: float, tol: float) -> DressedPair:
    s = 2**-0.5
    anti = np.array([0.0, s, -s, 0.0], dtype=complex)
    sym_basis = np.array([[1, 0, 0], [0, s, 0], [0, s, 0], [0, 0, 1]], dtype=complex)
    sym_vals, sym_vecs = eig_hermitian(sym_basis.T @ h @ sym_basis)
    energies = np.concatenate([[np.real(anti.conj() @ h @ anti)], sym_vals])
    vectors = np.column_stack([anti, sym_basis @ sym_vecs])
    # antisymmetric state first among (near-)ties
    bins = np.round(energies / (tol * max(np.abs(h).max(), 1.0)))
    order = np.lexsort((np.arange(4), bins))
    vectors = _fix_phase(vectors[:, order])
    return DressedPair(energies[order], vectors, np.abs(vectors[3, :]) ** 2 * v)


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    for i in range(vectors.shape[1]):
        col = vectors[:, i]
        k = int(np.argmax(np.abs(col)))
        vectors[:, i] = col * (np.abs(col[k]) / col[k])
    return vectors


@dataclass(frozen=True)
class PeakPrediction:
    at_doublet: Tuple[float, float]  # (delta^(+), delta^(-))
    eight_lines: Dict[str, float]  # keys "+1".."+4", "-1".."-4"
    eit_center: float
    sign_orientation: int

    def lines(self, two_atom: bool = True) -> List[Tuple[str, float]]:
        if two_atom:
            return sorted(self.eight_lines.items(), key=lambda kv: kv[1])
        return sorted(zip(("+", "-"), self.at_doublet), key=lambda kv: kv[1])

    def table(self) -> List[Tuple[str, float]]:
        """All eleven reference detunings: eight lines, the doublet, the EIT centre."""
        rows = [(f"line{k}", x) for k, x in sorted(self.eight_lines.items())]
        rows += [("doublet+", self.at_doublet[0]), ("doublet-", self.at_doublet[1])]
        rows.append(("eit_center", self.eit_center))
        return rows


def predict_peaks(eff: EffectiveParams, v: float, sign_orientation: int = 1) -> PeakPrediction:
    """Resonance positions from the dressed-state picture.

    With orientation ``s``: doublet at ``E_ss + s*E_pm``, eight lines at
    ``E_ss + s*(E_j - E_pm)``, EIT centre at ``E_ss + s*(E_+ + E_-)/2``.
    ``eff`` should be evaluated at zero probe detuning.
    """
    if sign_orientation not in (1, -1):
        raise ValueError("sign_orientation must be +1 or -1")
    s = sign_orientation
    single = dressed_single(eff)
    pair = dressed_pair(eff, v)
    lines = {}
    for j, e in enumerate(pair.energies, start=1):
        lines[f"+{j}"] = eff.e_ss + s * (e - single.e_plus)
        lines[f"-{j}"] = eff.e_ss + s * (e - single.e_minus)
    return PeakPrediction(
        at_doublet=(eff.e_ss + s * single.e_plus, eff.e_ss + s * single.e_minus),
        eight_lines=lines,
        eit_center=eff.e_ss + s * (single.e_plus + single.e_minus) / 2,
        sign_orientation=s,
    )


def susceptibility_im(eps_p: float, eps_c: float, lambda_c: complex, gamma_r: float) -> float:
    """Imaginary linear susceptibility of the single-atom Lambda system (unnormalized), as printed."""
    num = (eps_p - eps_c) * eps_c * gamma_r
    den = abs(eps_p * (eps_p - eps_c) - abs(lambda_c) ** 2 - 0.5j * gamma_r * eps_c) ** 2
    return float(num / den)


def params_fingerprint(raw: RawParams, v: float) -> str:
    payload = {
        k: ([getattr(raw, k).real, getattr(raw, k).imag] if isinstance(getattr(raw, k), complex) else getattr(raw, k))
        for k in raw.__dataclass_fields__
        if k not in ("c6", "r_sep", "v")
    }
    payload["v"] = v
    blob = json.dumps(payload, sort_keys=True, default=float)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class Spectrum:
    detunings: np.ndarray
    populations: np.ndarray
    v: float
    params_fingerprint: str = ""

    def __post_init__(self):
        self.detunings = np.asarray(self.detunings, dtype=float)
        self.populations = np.asarray(self.populations, dtype=float)
        if self.detunings.shape != self.populations.shape:
            raise ValueError("detunings and populations differ in length")
        if self.detunings.size > 1:
            steps = np.diff(self.detunings)
            if np.any(steps <= 0):
                raise ValueError("detuning grid must be strictly increasing")
            if np.ptp(steps) > 1e-9 * max(1.0, abs(steps[0])):
                raise ValueError("detuning grid must be uniform")

    @property
    def step(self) -> float:
        return float(self.detunings[1] - self.detunings[0]) if self.detunings.size > 1 else 0.0


def detuning_grid(lo: float, hi: float, step: float) -> np.ndarray:
    """Uniform grid ``lo, lo+step, ..., hi`` built from integer multiples (no drift)."""
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    if n < 1:
        raise ValueError("empty grid")
    return np.round(lo + step * np.arange(n), 12)


def probe_start_index(two_atom: bool = True) -> int:
    return two_atom_index(G_P, G_C, 3) if two_atom else G_P


def population_at(raw: RawParams, delta_p: float, v: Optional[float] = None) -> float:
    """Steady-state Rydberg population of the probed atom at one probe detuning."""
    eff = derive_effective_params(raw, delta_p)
    if not raw.coupling_on_control:
        h = build_single_atom_hamiltonian(eff)
        jumps = build_jump_operators(eff, single_atom=True)
        rho = steady_state(build_liouvillian(h, jumps))
        return rydberg_population(rho, 1)
    v = raw.v if v is None else v
    h = build_effective_hamiltonian(eff, v)
    jumps = build_jump_operators(eff)
    # The control atom's g_p is never populated and forms a second
    # stationary sector, so solve on the states reachable from |g_p g_c>.
    support = reachable_support(h, jumps, probe_start_index())
    sub = np.ix_(support, support)
    h_s = h[sub]
    jumps_s = [(c[sub], rate) for c, rate in jumps]
    rho_s = steady_state(build_liouvillian(h_s, jumps_s))
    return float(sum(rho_s.matrix[k, k].real for k, i in enumerate(support) if i // 3 == 2))


def scan_spectrum(raw: RawParams, grid: Sequence[float], v: Optional[float] = None) -> Spectrum:
    """Rydberg population of the probed atom over a probe-detuning grid."""
    v = raw.v if v is None else float(v)
    grid = np.asarray(grid, dtype=float)
    pops = np.array([population_at(raw, d, v) for d in grid])
    return Spectrum(grid, pops, v if raw.coupling_on_control else 0.0, params_fingerprint(raw, v))


def find_peaks(spec: Spectrum, prominence_fraction: float = 0.02) -> List[Tuple[float, float]]:
    """Local maxima with prominence at least ``prominence_fraction`` of the global maximum.

    Prominence is the height above the higher of the two flanking minima
    (the lowest points between the peak and the neighbouring maximum or the
    grid edge on each side). Positions and heights are refined by a parabola
    through the three samples around each maximum.
    """
    y = spec.populations
    x = spec.detunings
    if y.size == 0:
        raise EmptySpectrum("spectrum has no samples")
    if y.size < 3:
        return []
    top = float(y.max())
    if top <= 0:
        return []
    maxima = [i for i in range(1, y.size - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]
    bounds = [0] + maxima + [y.size - 1]
    peaks = []
    for k, i in enumerate(maxima, start=1):
        left = y[bounds[k - 1] : i + 1].min()
        right = y[i : bounds[k + 1] + 1].min()
        if y[i] - max(left, right) < prominence_fraction * top:
            continue
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        curv = y0 - 2 * y1 + y2
        if curv < 0:
            off = 0.5 * (y0 - y2) / curv
            xp = x[i] + off * spec.step
            yp = y1 - 0.25 * (y0 - y2) * off
        else:
            xp, yp = x[i], y1
        peaks.append((float(xp), float(yp)))
    return peaks


def fwhm(spec: Spectrum, near: float) -> float:
    """Full width at half maximum of the peak closest to ``near`` (linear interpolation)."""
    x, y = spec.detunings, spec.populations
    i = int(np.argmin(np.abs(x - near)))
    while 0 < i < y.size - 1 and (y[i - 1] > y[i] or y[i + 1] > y[i]):
        i += 1 if y[i + 1] > y[i] else -1
    half = y[i] / 2
    lo = i
    while lo > 0 and y[lo] > half:
        lo -= 1
    hi = i
    while hi < y.size - 1 and y[hi] > half:
        hi += 1
    if y[lo] > half or y[hi] > half:
        raise ValueError("peak does not fall to half maximum inside the grid")
    xl = x[lo] + (half - y[lo]) * (x[lo + 1] - x[lo]) / (y[lo + 1] - y[lo])
    xr = x[hi - 1] + (half - y[hi - 1]) * (x[hi] - x[hi - 1]) / (y[hi] - y[hi - 1])
    return float(xr - xl)


def local_minimum(spec: Spectrum, center: float, window: float) -> Tuple[float, float]:
    """(detuning, population) of the smallest sample within ``center +/- window``."""
    mask = np.abs(spec.detunings - center) <= window + 1e-12
    if not mask.any():
        raise EmptySpectrum("no samples inside the window")
    idx = np.nonzero(mask)[0]
    k = idx[np.argmin(spec.populations[idx])]
    return float(spec.detunings[k]), float(spec.populations[k])


@dataclass
class LineMatch:
    label: str
    predicted: float
    found: Optional[float]
    residual: Optional[float]
    merged: bool = False


@dataclass
class MatchReport:
    matches: List[LineMatch]
    unmatched_peaks: List[float] = field(default_factory=list)

    @property
    def unmatched_lines(self) -> List[str]:
        return [m.label for m in self.matches if m.found is None]

    @property
    def all_matched(self) -> bool:
        return not self.unmatched_lines

    @property
    def max_residual(self) -> float:
        res = [m.residual for m in self.matches if m.residual is not None]
        return max(res) if res else float("nan")


def reconcile(
    predicted: Sequence[Tuple[str, float]],
    found: Sequence[Tuple[float, float]],
    tol: float,
    linewidth: float = 0.0,
) -> MatchReport:
    """Greedy nearest matching of predicted lines to detected peaks.

    Pairs are taken in order of increasing distance. A peak already claimed
    may be shared by another line only if that line lies within two
    ``linewidth`` of a line already assigned to the peak (unresolved lines
    merge into one peak).
    """
    pred = list(predicted)
    peaks = [p[0] if isinstance(p, (tuple, list)) else float(p) for p in found]
    pairs = sorted(
        (abs(x - px), i, k) for i, (_, x) in enumerate(pred) for k, px in enumerate(peaks) if abs(x - px) <= tol
    )
    owner: Dict[int, List[int]] = {}
    assigned: Dict[int, Tuple[int, bool]] = {}
    for dist, i, k in pairs:
        if i in assigned:
            continue
        if k not in owner:
            owner[k] = [i]
            assigned[i] = (k, False)
        elif any(abs(pred[i][1] - pred[o][1]) < 2 * linewidth for o in owner[k]):
            owner[k].append(i)
            assigned[i] = (k, True)
    matches = []
    for i, (label, x) in enumerate(pred):
        if i in assigned:
            k, merged = assigned[i]
            matches.append(LineMatch(label, x, peaks[k], abs(x - peaks[k]), merged))
        else:
            matches.append(LineMatch(label, x, None, None))
    unmatched = [peaks[k] for k in range(len(peaks)) if k not in owner]
    return MatchReport(matches, unmatched)


def single_atom_params(raw: RawParams) -> RawParams:
    return raw.with_(coupling_on_control=False, v=0.0)


@lru_cache(maxsize=64)
def resolve_sign_orientation(raw: RawParams, span: float = 2.0, step: float = 0.005) -> int:
    """Pick the orientation of the dressed-state terms that matches a simulated single-atom doublet.

    Both candidate doublets are compared with the two strongest peaks of the
    single-atom spectrum scanned over ``E_ss +/- span``; the smaller summed
    distance wins. The result is cached per parameter set.
    """
    single = single_atom_params(raw)
    eff = derive_effective_params(single, 0.0)
    grid = detuning_grid(eff.e_ss - span, eff.e_ss + span, step)
    peaks = find_peaks(scan_spectrum(single, grid))
    peaks = sorted(peaks, key=lambda p: -p[1])[:2]
    if len(peaks) < 2:
        raise EmptySpectrum("single-atom spectrum does not show a doublet")
    found = sorted(p[0] for p in peaks)
    best, best_cost = 1, np.inf
    for s in (1, -1):
        cand = sorted(predict_peaks(eff, 0.0, s).at_doublet)
        cost = sum(abs(a - b) for a, b in zip(cand, found))
        if cost < best_cost:
            best, best_cost = s, cost
    return best


def predict_for(raw: RawParams, v: Optional[float] = None) -> PeakPrediction:
    """Weak-probe prediction at zero probe detuning with the resolved orientation."""
    v = raw.v if v is None else v
    eff = derive_effective_params(raw, 0.0)
    return predict_peaks(eff, v, resolve_sign_orientation(raw.with_(v=0.0)))

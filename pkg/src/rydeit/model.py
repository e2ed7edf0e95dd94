"""Laboratory parameters, the effective Raman (TLR) model and its operators.

Frequencies are cyclic MHz throughout (a value ``x`` stands for 2*pi*x
rad/us). The effective-model Hamiltonians below are returned in cyclic MHz;
the conversion to rad/us happens once, when a Liouvillian or an ODE
right-hand side is assembled. The four-level Hamiltonian is the exception: it
carries explicit phases ``exp(-i*Delta*t)`` and is therefore returned in
rad/us directly.

Basis conventions
-----------------
effective model, per atom:  g_p = 0, g_c = 1, r = 2
four-level model, per atom: g_p = 0, g_c = 1, e = 2, r = 3
two atoms: index = d * i_atom1 + i_atom2
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple

import numpy as np

from .errors import PhysicsError
from .numerics import kron

TWO_PI = 2.0 * np.pi

G_P, G_C, R = 0, 1, 2
FULL_G_P, FULL_G_C, FULL_E, FULL_R = 0, 1, 2, 3

DISPERSIVE_WARN_RATIO = 0.1


class DispersiveRegimeWarning(UserWarning):
    pass


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def transition(to: int, frm: int, dim: int) -> np.ndarray:
    """|to><frm| on a single atom."""
    op = np.zeros((dim, dim), dtype=complex)
    op[to, frm] = 1.0
    return op


def on_atom(op: np.ndarray, atom: int, n_atoms: int = 2) -> np.ndarray:
    """Embed a single-atom operator acting on ``atom`` (1-based)."""
    eye = np.eye(op.shape[0], dtype=complex)
    factors = [op if k == atom else eye for k in range(1, n_atoms + 1)]
    return kron(*factors)


def two_atom_index(i1: int, i2: int, dim: int) -> int:
    return dim * i1 + i2


@dataclass(frozen=True)
class RawParams:
    """Lab-frame inputs, all in cyclic MHz.

    ``v`` is the van der Waals energy of |rr>. Passing ``c6`` (MHz um^6) and
    ``r_sep`` (um) instead sets ``v = -c6 / r_sep**6``.
    """

    omega_p1: complex = 1.0
    omega_p2: complex = 1.0
    omega_c1: complex = 20.0
    omega_c2: complex = 20.0
    delta_p2: float = 50.0
    delta_c1: float = 1000.0
    delta_c2: float = 1000.0
    gamma_ec: float = 3.0
    gamma_ep: float = 3.0
    gamma_r: float = 0.1
    v: float = 0.0
    coupling_on_control: bool = True
    c6: Optional[float] = None
    r_sep: Optional[float] = None

    def __post_init__(self):
        if (self.c6 is None) != (self.r_sep is None):
            raise PhysicsError("c6 and r_sep must be given together")
        if self.c6 is not None:
            if self.r_sep <= 0:
                raise PhysicsError("r_sep must be positive")
            object.__setattr__(self, "v", -float(self.c6) / float(self.r_sep) ** 6)

    @property
    def delta_c(self) -> float:
        """Coupling two-photon detuning, ``delta_c2 - delta_c1``."""
        return self.delta_c2 - self.delta_c1

    def with_(self, **changes) -> "RawParams":
        if "v" in changes:
            changes.setdefault("c6", None)
            changes.setdefault("r_sep", None)
        return replace(self, **changes)

    def dispersive_ratio(self, delta_p: float = 0.0) -> float:
        pairs = [
            (self.omega_p1, self.delta_p2 - delta_p),
            (self.omega_p2, self.delta_p2),
            (self.omega_c1, self.delta_c1),
            (self.omega_c2, self.delta_c2),
        ]
        return max(abs(om) / abs(d) if d != 0 else np.inf for om, d in pairs)

    def dispersive_bound(self) -> float:
        """Sum over driven transitions of (Omega/Delta)^2 (probe-atom estimate of the e population)."""
        pairs = [
            (self.omega_p1, self.delta_p2),
            (self.omega_p2, self.delta_p2),
            (self.omega_c1, self.delta_c1),
            (self.omega_c2, self.delta_c2),
        ]
        return float(sum((abs(om) / abs(d)) ** 2 for om, d in pairs))

    def validate(self, strict: bool = False) -> None:
        for name in ("delta_p2", "delta_c1", "delta_c2"):
            if getattr(self, name) == 0:
                raise PhysicsError(f"{name} must be nonzero (dispersive regime)")
        for name in ("gamma_ec", "gamma_ep", "gamma_r"):
            if getattr(self, name) < 0:
                raise PhysicsError(f"{name} must be >= 0")
        ratio = self.dispersive_ratio()
        if ratio >= DISPERSIVE_WARN_RATIO:
            msg = f"max |Omega/Delta| = {ratio:.3g} is not << 1; the effective model is unreliable"
            if strict:
                raise PhysicsError(msg)
            warnings.warn(msg, DispersiveRegimeWarning, stacklevel=2)


def paper_params(**changes) -> RawParams:
    """Parameter set of the single-atom and two-atom spectra (cyclic MHz)."""
    return RawParams().with_(**changes) if changes else RawParams()


@dataclass(frozen=True)
class EffectiveParams:
    lambda_p: complex
    lambda_c: complex
    eps_p: float
    eps_c: float
    eps_c2: float
    alpha_1: float
    alpha_2: float
    beta_p: float
    beta_c: float
    e_ss: float
    gamma_r1p: float
    gamma_r1c: float
    gamma_r2c: float
    delta_p: float = 0.0

    @property
    def gamma_r2p(self) -> float:
        return 0.0


def _inv(x: float, name: str) -> float:
    if x == 0:
        raise ZeroDivisionError(f"{name} is zero")
    return 1.0 / x


def derive_effective_params(raw: RawParams, delta_p: float = 0.0) -> EffectiveParams:
    """Two-photon couplings, Stark shifts and effective decay rates at probe detuning ``delta_p``."""
    inv_p1 = _inv(raw.delta_p2 - delta_p, "delta_p1")
    inv_p2 = _inv(raw.delta_p2, "delta_p2")
    inv_c1 = _inv(raw.delta_c1, "delta_c1")
    inv_c2 = _inv(raw.delta_c2, "delta_c2")

    lambda_p = -0.5 * np.conj(raw.omega_p1) * raw.omega_p2 * (inv_p1 + inv_p2)
    lambda_c = -0.5 * np.conj(raw.omega_c1) * raw.omega_c2 * (inv_c1 + inv_c2)
    beta_p = -abs(raw.omega_p1) ** 2 * inv_p1
    beta_c = abs(raw.omega_c1) ** 2 * inv_c1
    alpha_2 = abs(raw.omega_c2) ** 2 * inv_c2
    alpha_1 = alpha_2 - abs(raw.omega_p2) ** 2 * inv_p2
    delta_c = raw.delta_c

    total = raw.gamma_ec + raw.gamma_ep + raw.gamma_r
    if total > 0:
        g1p = raw.gamma_ep * raw.gamma_r / total
        g1c = raw.gamma_ec * raw.gamma_r / total
        g2c = (raw.gamma_ec + raw.gamma_ep) * raw.gamma_r / total
    else:
        g1p = g1c = g2c = 0.0

    return EffectiveParams(
        lambda_p=complex(lambda_p),
        lambda_c=complex(lambda_c),
        eps_p=beta_p - (delta_p + alpha_1),
        eps_c=beta_c - (-delta_c + alpha_1),
        eps_c2=beta_c - (-delta_c + alpha_2),
        alpha_1=alpha_1,
        alpha_2=alpha_2,
        beta_p=beta_p,
        beta_c=beta_c,
        e_ss=beta_p - alpha_1,
        gamma_r1p=g1p,
        gamma_r1c=g1c,
        gamma_r2c=g2c,
        delta_p=float(delta_p),
    )


def _herm(h: np.ndarray) -> np.ndarray:
    """Add the Hermitian conjugate of the strictly off-diagonal part."""
    off = h - np.diag(np.diag(h))
    return np.diag(np.diag(h)) + off + off.conj().T


def build_single_atom_hamiltonian(eff: EffectiveParams) -> np.ndarray:
    """3x3 Lambda Hamiltonian of the probed atom alone (cyclic MHz)."""
    h = np.zeros((3, 3), dtype=complex)
    h[G_P, G_P] = eff.eps_p
    h[G_C, G_C] = eff.eps_c
    h[R, G_P] = eff.lambda_p
    h[R, G_C] = eff.lambda_c
    return _herm(h)


def build_effective_hamiltonian(eff: EffectiveParams, v: float, coupling_on_control: bool = True) -> np.ndarray:
    """9x9 two-atom TLR Hamiltonian (cyclic MHz).

    With ``coupling_on_control=False`` the control atom is left undriven and
    the interaction is dropped, so the two atoms decouple.
    """
    d = 3
    h1 = build_single_atom_hamiltonian(eff)
    h = on_atom(h1, 1)
    if coupling_on_control:
        h2 = np.zeros((d, d), dtype=complex)
        h2[G_C, G_C] = eff.eps_c2
        h2[R, G_C] = eff.lambda_c
        h = h + on_atom(_herm(h2), 2)
        rr = two_atom_index(R, R, d)
        h[rr, rr] += v
    return h


COUPLING_CHANNEL_STATES = (
    two_atom_index(G_C, G_C, 3),
    two_atom_index(G_C, R, 3),
    two_atom_index(R, G_C, 3),
    two_atom_index(R, R, 3),
)


def build_coupling_channel_hamiltonian(eff: EffectiveParams, v: float) -> np.ndarray:
    """4x4 Hamiltonian of the coupling channels in the basis (g_c g_c, g_c r, r g_c, r r)."""
    lc = eff.lambda_c
    h = np.zeros((4, 4), dtype=complex)
    h[0, 0] = eff.eps_c + eff.eps_c2
    h[1, 1] = eff.eps_c
    h[2, 2] = eff.eps_c2
    h[3, 3] = v
    h[1, 0] = lc  # atom 2: g_c -> r
    h[2, 0] = lc  # atom 1: g_c -> r
    h[3, 1] = lc
    h[3, 2] = lc
    return _herm(h)


JumpList = List[Tuple[np.ndarray, float]]


def build_jump_operators(eff: EffectiveParams, single_atom: bool = False) -> JumpList:
    """Effective Rydberg decay channels as (operator, rate) pairs; rates in cyclic MHz.

    Zero-rate channels are left out.
    """
    channels = [
        (transition(G_P, R, 3), 1, eff.gamma_r1p),
        (transition(G_C, R, 3), 1, eff.gamma_r1c),
    ]
    if not single_atom:
        channels.append((transition(G_C, R, 3), 2, eff.gamma_r2c))
    out = []
    for op, atom, rate in channels:
        if rate > 0:
            out.append((op if single_atom else on_atom(op, atom), float(rate)))
    return out


def lab_detunings(raw: RawParams, delta_p: float) -> Tuple[float, float, float, float]:
    """(Delta_p1, Delta_p2, Delta_c1, Delta_c2) in cyclic MHz, with Delta_p1 = Delta_p2 - delta_p."""
    return raw.delta_p2 - delta_p, raw.delta_p2, raw.delta_c1, raw.delta_c2


@dataclass(frozen=True)
class FullHamiltonianTerms:
    """Static pieces of the four-level Hamiltonian, all in rad/us.

    ``H(t) = static + sum_k (exp(-i w_k t) A_k + h.c.)``.
    """

    static: np.ndarray
    ops: Tuple[np.ndarray, ...]
    freqs: np.ndarray

    def __call__(self, t: float) -> np.ndarray:
        h = self.static.copy()
        for op, w in zip(self.ops, self.freqs):
            term = np.exp(-1j * w * t) * op
            h += term + term.conj().T
        return h


def full_hamiltonian_terms(raw: RawParams, delta_p: float = 0.0) -> FullHamiltonianTerms:
    d = 4
    dp1, dp2, dc1, dc2 = lab_detunings(raw, delta_p)
    ops, freqs = [], []
    atoms = (1, 2) if raw.coupling_on_control else (1,)
    for atom in atoms:
        ops.append(on_atom(raw.omega_c1 * transition(FULL_E, FULL_G_C, d), atom))
        freqs.append(dc1)
        ops.append(on_atom(np.conj(raw.omega_c2) * transition(FULL_E, FULL_R, d), atom))
        freqs.append(dc2)
    ops.append(on_atom(np.conj(raw.omega_p1) * transition(FULL_G_P, FULL_E, d), 1))
    freqs.append(dp1)
    ops.append(on_atom(raw.omega_p2 * transition(FULL_R, FULL_E, d), 1))
    freqs.append(dp2)
    static = np.zeros((d * d, d * d), dtype=complex)
    if raw.coupling_on_control:
        rr = two_atom_index(FULL_R, FULL_R, d)
        static[rr, rr] = TWO_PI * raw.v
    return FullHamiltonianTerms(
        static=static,
        ops=tuple(TWO_PI * op for op in ops),
        freqs=TWO_PI * np.asarray(freqs, dtype=float),
    )


def build_full_hamiltonian(raw: RawParams, t: float, delta_p: float = 0.0) -> np.ndarray:
    """16x16 four-level two-atom Hamiltonian at time ``t`` (us), in rad/us."""
    return full_hamiltonian_terms(raw, delta_p)(t)


def build_full_jump_operators(raw: RawParams) -> JumpList:
    """Bare decay channels of the four-level model as (operator, rate) pairs in cyclic MHz.

    Three channels per atom: r -> e, e -> g_c, e -> g_p. On the control atom the
    e -> g_p branch is routed to g_c instead, mirroring the vanishing
    effective rate from r to g_p there.
    """
    d = 4
    out = []
    for atom in (1, 2):
        ep_target = FULL_G_P if atom == 1 else FULL_G_C
        for op, rate in (
            (transition(FULL_E, FULL_R, d), raw.gamma_r),
            (transition(FULL_G_C, FULL_E, d), raw.gamma_ec),
            (transition(ep_target, FULL_E, d), raw.gamma_ep),
        ):
            if rate > 0:
                out.append((on_atom(op, atom), float(rate)))
    return out

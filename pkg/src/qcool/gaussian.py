"""Gaussian (covariance-matrix) description of the oscillator network.

Quadratures are interleaved (x1, p1, x2, p2, ...) with hbar = 1 and
vacuum covariance I/2.  Number-conserving quadratic Hamiltonians
H = sum_ij A_ij a_i^dag a_j act as symplectic rotations on the
quadratures; conditioning a subset of modes on a vacuum measurement is a
Schur-complement update.  This reproduces the one-shot cooling limit of
the measurement protocol without any Fock truncation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import ConstructionError


def _omega(modes: int) -> np.ndarray:
    blk = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(modes), blk)


@dataclass
class GaussianState:
    """First and second moments, interleaved quadrature order."""
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        self.mean = np.asarray(self.mean, dtype=float)
        self.cov = np.asarray(self.cov, dtype=float)
        n = self.mean.shape[0]
        if n % 2 or self.cov.shape != (n, n):
            raise ConstructionError("moments must cover whole modes")
        if np.max(np.abs(self.cov - self.cov.T)) > 1e-10:
            raise ConstructionError("covariance matrix is not symmetric")

    @property
    def modes(self) -> int:
        return self.mean.shape[0] // 2


def vacuum(modes: int = 1) -> GaussianState:
    return GaussianState(np.zeros(2 * modes), 0.5 * np.eye(2 * modes))


def gaussian_dst(alpha: complex, r: float, nbar: float = 0.0) -> GaussianState:
    """Displaced squeezed thermal single-mode state.

    Covariance (nbar + 1/2) diag(e^{2r}, e^{-2r}): positive r widens the
    x quadrature and narrows p."""
    if nbar < 0:
        raise ConstructionError("nbar must be >= 0")
    mean = np.sqrt(2.0) * np.array([np.real(alpha), np.imag(alpha)])
    cov = (nbar + 0.5) * np.diag([np.exp(2 * r), np.exp(-2 * r)])
    return GaussianState(mean, cov)


def product(states: Sequence[GaussianState]) -> GaussianState:
    """Direct sum of independent modes."""
    mean = np.concatenate([s.mean for s in states])
    n = len(mean)
    cov = np.zeros((n, n))
    at = 0
    for s in states:
        w = len(s.mean)
        cov[at:at + w, at:at + w] = s.cov
        at += w
    return GaussianState(mean, cov)


def symplectic_from_hamiltonian(a_mat: np.ndarray, t: float) -> np.ndarray:
    """Quadrature transfer matrix of exp(-i H t), H = sum A_ij a_i^dag a_j.

    A must be Hermitian.  The result S satisfies r(t) = S r(0) and is
    checked to be symplectic (S Omega S^T = Omega) to 1e-9."""
    a = np.asarray(a_mat, dtype=complex)
    m = a.shape[0]
    if a.shape != (m, m) or np.max(np.abs(a - a.conj().T)) > 1e-10:
        raise ConstructionError("coupling matrix must be square Hermitian")
    e_low = _expm_herm(a, t)                       # a(t) = e^{-iAt} a(0)
    ident = np.eye(m)
    l_half = np.block([[ident, ident], [-1j * ident, 1j * ident]]) / np.sqrt(2.0)
    e_full = np.block([[e_low, np.zeros((m, m))],
                       [np.zeros((m, m)), e_low.conj()]])
    s_stack = l_half @ e_full @ l_half.conj().T
    if np.max(np.abs(s_stack.imag)) > 1e-10:
        raise ConstructionError("transfer matrix came out complex")
    perm = np.zeros((2 * m, 2 * m))
    for k in range(m):
        perm[k, 2 * k] = 1.0
        perm[m + k, 2 * k + 1] = 1.0
    s = perm.T @ s_stack.real @ perm
    om = _omega(m)
    err = np.max(np.abs(s @ om @ s.T - om))
    if err > 1e-9:
        raise ConstructionError(f"symplectic defect {err:.3e}")
    return s


def _expm_herm(a: np.ndarray, t: float) -> np.ndarray:
    w, v = np.linalg.eigh(a)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def evolve(state: GaussianState, s: np.ndarray) -> GaussianState:
    return GaussianState(s @ state.mean, s @ state.cov @ s.T)


def vacuum_projection_probability(state: GaussianState,
                                  modes: Sequence[int]) -> float:
    """Tr[rho |0><0|] over the listed modes (marginal of the rest)."""
    idx = _quad_indices(modes)
    sig = state.cov[np.ix_(idx, idx)] + 0.5 * np.eye(len(idx))
    d = state.mean[idx]
    return float(np.exp(-0.5 * d @ np.linalg.solve(sig, d))
                 / np.sqrt(np.linalg.det(sig)))


def condition_on_vacuum(state: GaussianState,
                        modes: Sequence[int]) -> Tuple[GaussianState, float]:
    """Conditional state of the remaining modes after finding the listed
    modes in vacuum, plus the outcome weight.

    The weight carries a 1/pi per measured mode on top of the projector
    expectation (the heterodyne density at the origin); the normalised
    projector probability is available separately."""
    midx = _quad_indices(modes)
    keep_modes = [m for m in range(state.modes) if m not in set(modes)]
    kidx = _quad_indices(keep_modes)
    sig_b = state.cov[np.ix_(midx, midx)] + 0.5 * np.eye(len(midx))
    sig_ab = state.cov[np.ix_(kidx, midx)]
    gain = sig_ab @ np.linalg.inv(sig_b)
    cov = state.cov[np.ix_(kidx, kidx)] - gain @ sig_ab.T
    mean = state.mean[kidx] - gain @ state.mean[midx]
    weight = vacuum_projection_probability(state, modes) / np.pi ** len(modes)
    return GaussianState(mean, 0.5 * (cov + cov.T)), weight


def _quad_indices(modes: Sequence[int]) -> List[int]:
    out = []
    for m in modes:
        out += [2 * m, 2 * m + 1]
    return out


# ------------------------------------------------------- one-shot result

def swap_coupling_matrix(omega: float = 1.0, lam: float = 1.0) -> np.ndarray:
    """Two resonant modes with an excitation-exchange coupling; at
    lam = omega = 1 and t = pi/2 the modes swap exactly."""
    return np.array([[omega, lam], [lam, omega]], dtype=float)


def oneshot_probability_formula(alpha1: float, alpha2: float, r: float,
                                nbar: float) -> float:
    """Closed form of the one-shot vacuum-outcome weight (with the 1/pi)."""
    e2r = np.exp(2 * r)
    num = np.exp(-2 * alpha1 ** 2 / (1 + e2r * (1 + 2 * nbar))
                 - 2 * e2r * alpha2 ** 2 / (1 + e2r + 2 * nbar))
    den = np.pi * np.sqrt((1 + nbar) ** 2 * np.cosh(r) ** 2
                          - nbar ** 2 * np.sinh(r) ** 2)
    return float(num / den)


@dataclass
class OneShotResult:
    fidelity: float            # vacuum fidelity of the conditional state
    prob_formula: float        # closed form, includes the 1/pi
    prob_projector: float      # Tr[rho_reg |0><0|] before conditioning
    conditional: GaussianState


def theorem3_oneshot(alpha1: float, alpha2: float, r: float, nbar: float,
                     t: float = np.pi / 2) -> OneShotResult:
    """Single swap-and-measure cycle on one Gaussian mode.

    The system mode starts displaced-squeezed-thermal, the regulator mode
    in vacuum; after a time-t exchange the regulator is measured.  At
    t = pi/2 the kept state is exact vacuum and the outcome probability
    equals the initial vacuum population of the system mode."""
    joint = product([gaussian_dst(alpha1 + 1j * alpha2, r, nbar), vacuum(1)])
    s = symplectic_from_hamiltonian(swap_coupling_matrix(), t)
    out = evolve(joint, s)
    proj = vacuum_projection_probability(out, [1])
    cond, weight = condition_on_vacuum(out, [1])
    fid = vacuum_projection_probability(cond, [0])
    return OneShotResult(fid, weight, proj, cond)


# -------------------------------------------- Fock-side moment extraction

def moments_from_density(rho: np.ndarray) -> GaussianState:
    """First and second quadrature moments of a single-mode density
    matrix, for comparison against the covariance description."""
    n = rho.shape[0]
    a = np.diag(np.sqrt(np.arange(1, n)), 1).astype(complex)
    x = (a + a.conj().T) / np.sqrt(2.0)
    p = (a - a.conj().T) / (1j * np.sqrt(2.0))
    ex = np.real(np.trace(rho @ x))
    ep = np.real(np.trace(rho @ p))
    vxx = np.real(np.trace(rho @ x @ x)) - ex ** 2
    vpp = np.real(np.trace(rho @ p @ p)) - ep ** 2
    vxp = 0.5 * np.real(np.trace(rho @ (x @ p + p @ x))) - ex * ep
    return GaussianState(np.array([ex, ep]),
                         np.array([[vxx, vxp], [vxp, vpp]]))

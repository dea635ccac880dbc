"""Conditional-measurement cooling engine.

One cycle: evolve system (+) regulator for time t under the excitation
conserving Hamiltonian, measure the regulator projectively, keep outcome
|k>, reattach |k><k|.  Kept runs are described by the effective operator
V = <k|U(t)|k> applied repeatedly to the system state:

    P_n = Tr[V^n rho V^dag^n]          success probability after n cycles
    F_n = <vac|V^n rho V^dag^n|vac>/P_n  vacuum fidelity of the kept state

Everything is evaluated per total-excitation block.  For a single
oscillator with a qudit regulator each block is tridiagonal, giving the
diagonal lambda_{i,d}^k of V directly; networks and the hybrid system go
through a generic blocked engine over the composite basis.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal

from .errors import ConfigError, SearchFailureError, TruncationError
from .hamiltonians import CouplingParams, Topology
from .hilbert import BlockedOperator, ExcitationBlock, Oscillator, Qudit, SpaceSpec, \
    excitation_levels
from .states import DSTParams, depolarized_qudit, displaced_squeezed_thermal
from . import opttime


# ---------------------------------------------------------------- config

@dataclass
class ProtocolConfig:
    """Inputs of one cooling run.

    initial_system: a DSTParams, a density matrix, or (for networks and
    the hybrid system) a per-subsystem list of these, regulator excluded.
    cycle_time None picks the optimal time for the configured k.
    e_max None picks the excitation cap adaptively from the initial-state
    populations (kept tail weight <= 1e-7).
    """
    topology: Topology
    initial_system: Union[DSTParams, np.ndarray, Sequence]
    regulator_level: int = 0
    cycle_time: Optional[float] = None
    n_max: int = 100
    fidelity_target: float = 0.999
    probability_floor: float = 0.1
    convergence_tol: float = 1e-3
    coupling: CouplingParams = field(default_factory=CouplingParams)
    cutoff: int = 50
    e_max: Optional[int] = None

    def validate(self):
        d = self.topology.regulator_levels
        if not (0 <= self.regulator_level <= d - 1):
            raise ConfigError(
                f"regulator level k={self.regulator_level} outside 0..{d - 1}")
        if self.n_max < 1:
            raise ConfigError("n_max must be >= 1")
        if self.topology.kind == "hybrid" and self.cycle_time is None \
                and self.regulator_level > 1:
            raise ConfigError("hybrid default cycle times exist for k=0,1 only")


@dataclass
class ProtocolTrace:
    """Per-cycle record; index n runs 0..n_max with n=0 the initial state."""
    fidelity: np.ndarray
    probability: np.ndarray
    converged_at: Optional[int]

    @property
    def n_max(self) -> int:
        return len(self.fidelity) - 1


@dataclass
class EffectiveOperator:
    """V = <k|U(t)|k> on the system space: a contraction, block-diagonal
    in the total system excitation."""
    matrix: np.ndarray
    level: int
    dimension: int
    time: Optional[float] = None

    def validate(self, system_levels: Optional[np.ndarray] = None,
                 tol_sv: float = 1e-9, tol_block: float = 1e-10):
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        if sv.size and sv[0] > 1.0 + tol_sv:
            raise ValueError(f"not a contraction: max singular value {sv[0]}")
        if system_levels is not None:
            mask = system_levels[:, None] != system_levels[None, :]
            off = np.max(np.abs(self.matrix[mask])) if mask.any() else 0.0
            if off > tol_block:
                raise ValueError(f"off-block magnitude {off:.3e}")


# ------------------------------------------------- unitary / compression

def evolve_unitary(h, t: float):
    """exp(-i H t) via Hermitian eigendecomposition, dense or blocked."""
    if isinstance(h, BlockedOperator):
        out = {}
        for e, eb in h.blocks.items():
            out[e] = ExcitationBlock(eb.indices, _expih(eb.block, t))
        return BlockedOperator(h.space, out)
    return _expih(np.asarray(h), t)


def _expih(h: np.ndarray, t: float) -> np.ndarray:
    if np.max(np.abs(h - h.conj().T)) > 1e-9:
        raise ValueError("Hamiltonian is not Hermitian")
    w, v = eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def effective_operator(u, k: int, space: Optional[SpaceSpec] = None,
                       time: Optional[float] = None) -> EffectiveOperator:
    """Compress a joint unitary to V = <k|U|k> on the system space.

    The regulator must be the last subsystem of `space` (taken from the
    BlockedOperator when one is passed).
    """
    if isinstance(u, BlockedOperator):
        space = u.space
        u = u.reassemble()
    if space is None:
        raise ValueError("space required for a dense unitary")
    d = space.subsystems[-1].dim
    if not (0 <= k < d):
        raise IndexError(f"measurement level k={k} outside regulator range 0..{d - 1}")
    sysdim = space.dim // d
    v = np.asarray(u).reshape(sysdim, d, sysdim, d)[:, k, :, k]
    return EffectiveOperator(v, k, d, time)


# ------------------------------------------------ single-oscillator path

@lru_cache(maxsize=256)
def effective_lambdas(d: int, k: int, t: float, count: int) -> np.ndarray:
    """lambda_{i,d}^k(t) for i = 0..count-1, free of Fock-cutoff edge error.

    Block E = i + k is tridiagonal in the basis |E-q>|q>, q = 0..min(d-1,E),
    with off-diagonal sqrt(E - q)."""
    out = np.empty(count, dtype=complex)
    for i in range(count):
        e = i + k
        q = min(d - 1, e)
        if q == 0:
            out[i] = np.exp(-1j * e * t)
            continue
        off = np.sqrt(e - np.arange(q))
        w, v = eigh_tridiagonal(np.zeros(q + 1), off)
        out[i] = np.exp(-1j * e * t) * (v[k] * np.exp(-1j * w * t) @ v[k])
    out.setflags(write=False)
    return out


def _trace_single(lams: np.ndarray, cdiag: np.ndarray,
                  n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """F_n, P_n for a diagonal effective operator and diagonal weights."""
    mags = np.abs(lams[:len(cdiag)]) ** 2
    fp = np.empty(n_max + 1)
    pp = np.empty(n_max + 1)
    pw = np.ones_like(cdiag)
    for n in range(n_max + 1):
        w = pw * cdiag
        tot = w.sum()
        pp[n] = tot
        fp[n] = w[0] / tot
        pw = pw * mags
    return fp, pp


# --------------------------------------------------- blocked composition

def _compositions(total: int, caps: Sequence[int]) -> List[Tuple[int, ...]]:
    """Level tuples (per subsystem, ordered) summing to `total`, level m
    capped at caps[m]."""
    if len(caps) == 1:
        return [(total,)] if total <= caps[0] else []
    out = []
    for first in range(min(total, caps[0]) + 1):
        for rest in _compositions(total - first, caps[1:]):
            out.append((first,) + rest)
    return out


def _sub_caps(topology: Topology, e_cap: int) -> Tuple[List[int], List[bool]]:
    """Per-subsystem level caps and is-bosonic flags, regulator last."""
    if topology.kind == "hybrid":
        caps = [e_cap, topology.system_levels - 1]
        bos = [True, False]
    else:
        caps = [e_cap] * topology.modes
        bos = [True] * topology.modes
    if topology.regulator_kind == "qudit":
        caps.append(topology.regulator_levels - 1)
        bos.append(False)
    else:
        caps.append(e_cap + topology.regulator_levels)  # effectively uncapped
        bos.append(True)
    return caps, bos


def _block_hamiltonian(basis: List[Tuple[int, ...]],
                       edges: List[Tuple[int, int, float]],
                       caps: Sequence[int], bos: Sequence[bool],
                       freqs: Sequence[float]) -> np.ndarray:
    """Dense excitation-block matrix of free + exchange couplings.

    Each edge (i, j, w) contributes w * (lower_i raise_j + h.c.); the loop
    adds the first term, the transpose supplies the conjugate."""
    index = {s: i for i, s in enumerate(basis)}
    n = len(basis)
    h = np.zeros((n, n))
    diag = np.array([sum(f * l for f, l in zip(freqs, s)) for s in basis])
    for s, row in index.items():
        for i, j, w in edges:
            if s[i] >= 1 and s[j] < caps[j]:
                tgt = list(s)
                tgt[i] -= 1
                tgt[j] += 1
                col = index.get(tuple(tgt))
                if col is None:
                    continue
                amp = w
                if bos[i]:
                    amp *= np.sqrt(s[i])
                if bos[j]:
                    amp *= np.sqrt(s[j] + 1)
                h[col, row] += amp
    return h + h.T + np.diag(diag)


def _block_trace_powers(v: np.ndarray, rho: np.ndarray, n_max: int,
                        out_tr: np.ndarray):
    """Accumulate tr(V^n rho V^dag^n) for n = 0..n_max into out_tr.

    Uses the eigendecomposition of V when well conditioned, else iterates."""
    n = v.shape[0]
    if n == 1:
        mag = np.abs(v[0, 0]) ** 2
        out_tr += np.real(rho[0, 0]) * mag ** np.arange(n_max + 1)
        return
    use_eig = False
    try:
        lam, x = np.linalg.eig(v)
        xinv = np.linalg.inv(x)
        if np.max(np.abs(x @ np.diag(lam) @ xinv - v)) < 1e-10 * max(1.0, np.max(np.abs(v))) \
                and np.linalg.cond(x) < 1e8:
            use_eig = True
    except np.linalg.LinAlgError:
        pass
    if use_eig:
        y = xinv @ rho @ xinv.conj().T
        m = y * (x.conj().T @ x).T          # M_ij = Y_ij (X^dag X)_ji
        mu = lam[:, None] * lam.conj()[None, :]
        acc = np.ones_like(mu)
        for cyc in range(n_max + 1):
            out_tr[cyc] += np.real(np.sum(m * acc))
            acc = acc * mu
    else:
        cur = rho.astype(complex)
        for cyc in range(n_max + 1):
            out_tr[cyc] += np.real(np.trace(cur))
            cur = v @ cur @ v.conj().T


def _blocked_run(topology: Topology, params: CouplingParams, k: int, t: float,
                 factors: List[np.ndarray], e_cap: int,
                 n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """F_n, P_n for a product initial state under the blocked protocol."""
    caps, bos = _sub_caps(topology, e_cap)
    for m, f in enumerate(factors):
        caps[m] = min(caps[m], f.shape[0] - 1)  # never index past a factor
    edges = topology.coupling_edges(params)
    sys_caps = caps[:-1]
    qcap = caps[-1]
    n_osc = 1 if topology.kind == "hybrid" else topology.modes
    wf = params.omega_f_list(n_osc)
    freqs = [wf[m] if b and m < n_osc else params.omega_a
             for m, b in enumerate(bos)]
    if bos[-1]:
        freqs[-1] = params.omega_a  # oscillator regulator runs at omega_a

    tr = np.zeros(n_max + 1)
    vac = np.zeros(n_max + 1)
    for e_s in range(e_cap + 1):
        sys_basis = _compositions(e_s, sys_caps)
        if not sys_basis:
            continue
        e_tot = e_s + k
        # joint block grouped by regulator level: rows with q = k come in
        # the same order as sys_basis
        joint: List[Tuple[int, ...]] = []
        rows_k = []
        for q in range(min(e_tot, qcap) + 1):
            part = _compositions(e_tot - q, sys_caps)
            if q == k:
                rows_k = list(range(len(joint), len(joint) + len(part)))
            joint += [s + (q,) for s in part]
        hb = _block_hamiltonian(joint, edges, caps, bos, freqs)
        w, vecs = eigh(hb)
        u = (vecs * np.exp(-1j * w * t)) @ vecs.conj().T
        vk = u[np.ix_(rows_k, rows_k)]

        lev = np.array(sys_basis)
        rho = np.ones((len(sys_basis), len(sys_basis)), dtype=complex)
        for m, f in enumerate(factors):
            rho *= f[lev[:, m][:, None], lev[:, m][None, :]]

        _block_trace_powers(vk, rho, n_max, tr)
        if e_s == 0:
            mag = np.abs(vk[0, 0]) ** 2
            vac = np.real(rho[0, 0]) * mag ** np.arange(n_max + 1)
    return vac / tr, tr


def _resolve_factors(cfg: ProtocolConfig) -> List[np.ndarray]:
    """Per-system-subsystem density matrices from the configured input."""
    topo = cfg.topology
    init = cfg.initial_system
    n_sys = 2 if topo.kind == "hybrid" else topo.modes

    def as_matrix(x, dim):
        if isinstance(x, DSTParams):
            return displaced_squeezed_thermal(x, dim)
        m = np.asarray(x, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ConfigError("initial states must be square density matrices")
        return m

    if isinstance(init, (DSTParams, np.ndarray)):
        init = [init]
    init = list(init)
    if topo.kind == "hybrid" and len(init) == 1:
        init = init + [depolarized_qudit(topo.system_levels)]
    if len(init) == 1 and n_sys > 1:
        init = init * n_sys
    if len(init) != n_sys:
        raise ConfigError(f"{n_sys} initial factors expected, got {len(init)}")

    factors = []
    for m, x in enumerate(init):
        if topo.kind == "hybrid" and m == 1:
            factors.append(as_matrix(x, topo.system_levels))
        else:
            factors.append(as_matrix(x, cfg.cutoff))
    return factors


def _choose_e_cap(factors: List[np.ndarray], e_max: Optional[int],
                  tail_tol: float = 1e-7, hard_tol: float = 1e-6) -> int:
    """Smallest excitation cap with combined tail below tail_tol."""
    conv = np.array([1.0])
    for f in factors:
        conv = np.convolve(conv, np.clip(np.real(np.diag(f)), 0, None))
    cum = np.cumsum(conv)
    if e_max is not None:
        tail = 1.0 - (cum[e_max] if e_max < len(cum) else cum[-1])
        if tail > hard_tol:
            raise TruncationError(
                f"population {tail:.3e} above excitation cap {e_max}",
                leakage=float(tail))
        return e_max
    ok = np.nonzero(cum >= 1.0 - tail_tol)[0]
    if len(ok) == 0:
        raise TruncationError(
            f"initial state tail stays above {tail_tol:.1e} within the "
            f"retained levels", leakage=float(1.0 - cum[-1]))
    return int(ok[0])


# ------------------------------------------------------------ main entry

def default_cycle_time(topology: Topology, k: int) -> float:
    """Optimal cycle time for the configured measurement level."""
    if topology.kind == "hybrid":
        return np.pi / np.sqrt(2) if k == 0 else np.sqrt(2) * np.pi
    if k <= 2:
        return opttime.analytic_topt(k).t_opt
    try:
        return opttime.solve_topt(topology.regulator_levels, k).t_opt
    except SearchFailureError as err:
        return err.best_t


def run_protocol(cfg: ProtocolConfig) -> ProtocolTrace:
    """Full cooling trace F_n, P_n for n = 0..n_max.

    converged_at is the first cycle with |F_n - F_{n-1}| < convergence_tol
    and F_n >= fidelity_target, None if that never happens."""
    cfg.validate()
    topo = cfg.topology
    k = cfg.regulator_level
    t = cfg.cycle_time if cfg.cycle_time is not None else default_cycle_time(topo, k)

    if topo.kind == "single" and topo.regulator_kind == "qudit":
        factors = _resolve_factors(cfg)
        cdiag = np.clip(np.real(np.diag(factors[0])), 0.0, None)
        lams = effective_lambdas(topo.regulator_levels, k, t, len(cdiag))
        fid, prob = _trace_single(lams, cdiag, cfg.n_max)
    else:
        factors = _resolve_factors(cfg)
        e_cap = _choose_e_cap(factors, cfg.e_max)
        fid, prob = _blocked_run(topo, cfg.coupling, k, t, factors, e_cap,
                                 cfg.n_max)

    conv = None
    for n in range(1, cfg.n_max + 1):
        if abs(fid[n] - fid[n - 1]) < cfg.convergence_tol \
                and fid[n] >= cfg.fidelity_target:
            conv = n
            break
    return ProtocolTrace(fid, prob, conv)


def run_hybrid(cfg: ProtocolConfig) -> ProtocolTrace:
    """Cooling of the oscillator + system-qudit pair toward |0_V, 0_s>."""
    if cfg.topology.kind != "hybrid":
        raise ConfigError("run_hybrid needs a hybrid topology")
    return run_protocol(cfg)


# ------------------------------------------------------- reported cycles

def n_cooled(fid: np.ndarray, stop: float = 0.9998,
             n_max: Optional[int] = None) -> int:
    """Last cycle with F below `stop`; n_max when the threshold is never
    crossed (or already satisfied at n=0)."""
    n_max = len(fid) - 1 if n_max is None else n_max
    above = np.nonzero(fid[:n_max + 1] >= stop)[0]
    if len(above) == 0 or above[0] == 0:
        return n_max
    return int(above[0]) - 1


def n_settled(fid: np.ndarray, settle_tol: float = 1.2e-5, window: int = 5,
              n_max: Optional[int] = None) -> Optional[int]:
    """First cycle opening a window of `window` consecutive fidelity
    increments all below settle_tol; None if the trace never settles."""
    n_max = len(fid) - 1 if n_max is None else n_max
    df = np.abs(np.diff(fid[:n_max + 1]))
    for n in range(1, n_max + 1):
        seg = df[n - 1:min(n - 1 + window, n_max)]
        if np.all(seg < settle_tol):
            return n
    return None


def report_cycles(trace: ProtocolTrace, mode: str = "converged",
                  stop: float = 0.9998, settle_tol: float = 1.2e-5,
                  window: int = 5) -> int:
    """Cycle count N to report for a finished trace.

    converged: the trace's converged_at (n_max when absent).
    cooled:    last cycle below the stop threshold.
    settled:   first cycle of a quiet fidelity window.
    auto:      cooled when the stop threshold is reached, else settled,
               else n_max.
    """
    f = trace.fidelity
    if mode == "converged":
        return trace.converged_at if trace.converged_at is not None else trace.n_max
    if mode == "cooled":
        return n_cooled(f, stop)
    if mode == "settled":
        s = n_settled(f, settle_tol, window)
        return s if s is not None else trace.n_max
    if mode == "auto":
        if f.max() >= stop:
            return n_cooled(f, stop)
        s = n_settled(f, settle_tol, window)
        return s if s is not None else trace.n_max
    raise ConfigError(f"unknown report mode {mode!r}")


# ---------------------------------------------------------------- theory

def qubit_asymptotic_fidelity(rho_v: np.ndarray, k: int) -> float:
    """Large-N fidelity limit for a qubit regulator at its optimal time.

    Only Fock levels whose effective eigenvalue keeps unit modulus survive:
    i = 4 m^2 for k=0 (t = pi/2), i = m^2 - 1 for k=1 (t = pi)."""
    if k not in (0, 1):
        raise ValueError("qubit regulator: k must be 0 or 1")
    c = np.clip(np.real(np.diag(rho_v)), 0.0, None)
    n = len(c)
    if k == 0:
        idx = [4 * m * m for m in range(int(np.sqrt(n / 4)) + 2) if 4 * m * m < n]
    else:
        idx = [m * m - 1 for m in range(1, int(np.sqrt(n + 1)) + 2) if m * m - 1 < n]
    return float(c[0] / c[idx].sum())


# ---------------------------------------------------------------- sweeps

@dataclass
class SweepRecord:
    d: int
    k: int
    cycles: int
    fidelity: float
    probability: float


def sweep_dimension(base_cfg: ProtocolConfig, d_list: Sequence[int],
                    k_list: Sequence[int], report: str = "converged",
                    stop: float = 0.9998, settle_tol: float = 1.2e-5) -> List[SweepRecord]:
    """(N, F, P) per regulator dimension and measurement level."""
    out = []
    for d in d_list:
        for k in k_list:
            if k >= d:
                continue
            cfg = replace(base_cfg,
                          topology=replace(base_cfg.topology, regulator_levels=d),
                          regulator_level=k)
            trace = run_protocol(cfg)
            n = report_cycles(trace, report, stop, settle_tol)
            out.append(SweepRecord(d, k, n, float(trace.fidelity[n]),
                                   float(trace.probability[n])))
    return out


@dataclass
class EnergyRecord:
    energy: float
    cycles: Optional[int]
    fidelity: float
    probability: float


def _first_cooled(trace: ProtocolTrace, target: float,
                  floor: float) -> Optional[int]:
    ok = np.nonzero((trace.fidelity[1:] >= target)
                    & (trace.probability[1:] >= floor))[0]
    return int(ok[0]) + 1 if len(ok) else None


def sweep_energy(base_cfg: ProtocolConfig,
                 nbar_grid: Sequence[float]) -> List[EnergyRecord]:
    """Cycles needed to reach the fidelity target with admissible success
    probability, swept over the thermal occupation of the initial state.

    The swept state keeps the displacement and squeezing of the configured
    initial DSTParams; cycles is None when the target is unreachable
    within n_max."""
    if not isinstance(base_cfg.initial_system, DSTParams):
        raise ConfigError("sweep_energy needs a DSTParams initial state")
    if len(nbar_grid) == 0:
        raise ConfigError("empty grid")
    base = base_cfg.initial_system
    out = []
    for nbar in nbar_grid:
        p = replace(base, nbar=float(nbar))
        cfg = replace(base_cfg, initial_system=p)
        trace = run_protocol(cfg)
        n = _first_cooled(trace, cfg.fidelity_target, cfg.probability_floor)
        at = n if n is not None else cfg.n_max
        from .states import dst_mean_energy
        out.append(EnergyRecord(dst_mean_energy(p), n,
                                float(trace.fidelity[at]),
                                float(trace.probability[at])))
    return out


def max_coolable_nbar(base_cfg: ProtocolConfig, nbar_lo: float = 0.05,
                      nbar_hi: float = 14.0, iters: int = 24) -> Optional[float]:
    """Largest thermal occupation still coolable, by bisection; None when
    even nbar_lo fails."""
    def coolable(nbar):
        rec = sweep_energy(base_cfg, [nbar])[0]
        return rec.cycles is not None

    if not coolable(nbar_lo):
        return None
    if coolable(nbar_hi):
        return nbar_hi
    lo, hi = nbar_lo, nbar_hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if coolable(mid):
            lo = mid
        else:
            hi = mid
    return lo

"""Dense statevector QAOA engine with standard and warm-start modes."""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numba import njit, prange

from . import optim
from .model import ValidationError
from .qubo import IsingModel, QuboProblem, energy_table

__all__ = [
    "StateVector",
    "QaoaConfig",
    "QaoaResult",
    "RelaxedSolution",
    "QubitLimitError",
    "QaoaError",
    "init_standard",
    "solve_relaxed",
    "init_warm_start",
    "apply_phase_separator",
    "apply_standard_mixer",
    "apply_warm_start_mixer",
    "expectation",
    "run_qaoa",
]

DEFAULT_MAX_QUBITS = 24
_FAST_DTYPE_THRESHOLD = 16  # above this, the parameter search uses complex64


class QubitLimitError(RuntimeError):
    """The register does not fit in the configured dense-memory budget."""


class QaoaError(RuntimeError):
    """Engine failure; carries the best result found so far when available."""

    def __init__(self, message: str, best_so_far=None):
        super().__init__(message)
        self.best_so_far = best_so_far


def max_qubits(explicit: Optional[int] = None) -> int:
    if explicit is not None:
        return explicit
    env = os.environ.get("UC_HYBRID_MAX_QUBITS")
    return int(env) if env else DEFAULT_MAX_QUBITS


@dataclass(frozen=True)
class StateVector:
    """Dense amplitudes over 2^n basis states (little-endian bit order)."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        if self.amplitudes.shape != (2**self.n,):
            raise ValidationError("amplitude vector length must be 2^n")
        norm = float(np.vdot(self.amplitudes, self.amplitudes).real)
        if abs(norm - 1.0) > 1e-6:
            raise ValidationError(f"state norm {norm} is not 1")

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class QaoaConfig:
    layers: int = 1
    mode: str = "warm_start"  # or "standard"
    shots: int = 4096
    maxiter: int = 1000
    seed: int = 0
    warm_start_clamp: float = 0.25
    restarts: int = 1
    relaxation_restarts: int = 3
    search_tolerance: float = 5e-2
    max_qubits: Optional[int] = None

    def __post_init__(self):
        if self.layers < 1:
            raise ValidationError("layers must be >= 1")
        if not 0 <= self.warm_start_clamp < 0.5:
            raise ValidationError("warm-start clamp must lie in [0, 0.5)")
        if self.mode not in ("standard", "warm_start"):
            raise ValidationError(f"unknown mode '{self.mode}'")


@dataclass(frozen=True)
class QaoaResult:
    best_bits: np.ndarray
    best_value: float
    samples: dict
    optimal_params: tuple[np.ndarray, np.ndarray]
    evaluations: int
    best_expectation: float
    baseline_expectation: float


@dataclass(frozen=True)
class RelaxedSolution:
    c_star: np.ndarray
    value: float


# ---------------------------------------------------------------------------
# numba kernels (elementwise, deterministic regardless of thread schedule)


@njit(parallel=True, cache=True)
def _kernel_phase(psi, energies, gamma):
    for k in prange(psi.shape[0]):
        e = gamma * energies[k]
        psi[k] = psi[k] * complex(np.cos(e), -np.sin(e))


@njit(parallel=True, cache=True)
def _kernel_mix(psi, q, m00, m01, m10, m11):
    stride = 1 << q
    half = psi.shape[0] >> 1
    for k in prange(half):
        i0 = ((k >> q) << (q + 1)) | (k & (stride - 1))
        i1 = i0 + stride
        a = psi[i0]
        b = psi[i1]
        psi[i0] = m00 * a + m01 * b
        psi[i1] = m10 * a + m11 * b


@njit(parallel=True, cache=True)
def _kernel_expectation(psi, energies, partials):
    nchunks = partials.shape[0]
    size = psi.shape[0]
    chunk = (size + nchunks - 1) // nchunks
    for c in prange(nchunks):
        lo = c * chunk
        hi = min(size, lo + chunk)
        acc = 0.0
        for k in range(lo, hi):
            a = psi[k]
            acc += (a.real * a.real + a.imag * a.imag) * energies[k]
        partials[c] = acc


def _expectation_of(psi: np.ndarray, energies: np.ndarray) -> float:
    partials = np.zeros(256, dtype=np.float64)
    _kernel_expectation(psi, energies, partials)
    return float(partials.sum())


# ---------------------------------------------------------------------------
# single-qubit mixer matrices


def _rx_matrix(beta: float, dtype=np.complex128) -> np.ndarray:
    c, s = np.cos(beta), np.sin(beta)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=dtype)


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def _warm_mixer_matrix(theta: float, beta: float, dtype=np.complex128) -> np.ndarray:
    rz = np.array(
        [[np.exp(1j * beta), 0.0], [0.0, np.exp(-1j * beta)]], dtype=np.complex128
    )
    return (_ry(theta) @ rz @ _ry(-theta)).astype(dtype)


# ---------------------------------------------------------------------------
# public statevector operations


def init_standard(n: int, limit: Optional[int] = None) -> StateVector:
    """Uniform superposition over n qubits."""
    if n < 1:
        raise ValidationError("need at least one qubit")
    cap = max_qubits(limit)
    if n > cap:
        raise QubitLimitError(f"{n} qubits exceed the {cap}-qubit memory limit")
    amps = np.full(2**n, 2.0 ** (-n / 2.0), dtype=np.complex128)
    return StateVector(amplitudes=amps, n=n)


def _product_state(amp0: np.ndarray, amp1: np.ndarray, dtype=np.complex128) -> np.ndarray:
    """Amplitudes of  ⊗_i (amp0[i]|0> + amp1[i]|1>)  by doubling."""
    psi = np.ones(1, dtype=dtype)
    for a0, a1 in zip(amp0, amp1):
        psi = np.concatenate([psi * dtype(a0), psi * dtype(a1)])
    return psi


def init_warm_start(
    c_star: np.ndarray, clamp: float = 0.01
) -> tuple[StateVector, np.ndarray]:
    """Product state encoding the relaxed solution, plus its mixer angles.

    Each component is clamped into [clamp, 1-clamp] so no qubit freezes at a
    pole, then rotated to amplitude sqrt(c*) on |1>.
    """
    c = np.clip(np.asarray(c_star, dtype=float), clamp, 1.0 - clamp)
    if ((c < 0) | (c > 1)).any():
        raise ValidationError("relaxed values must lie in [0, 1]")
    thetas = 2.0 * np.arcsin(np.sqrt(c))
    amps = _product_state(np.cos(thetas / 2.0), np.sin(thetas / 2.0))
    return StateVector(amplitudes=amps, n=len(c)), thetas


def _ising_energy_table(ising: IsingModel, dtype=np.float64) -> np.ndarray:
    """Diagonal energies E(x) with z_j = 1 - 2*bit_j, built by doubling."""
    q = ising.couplings
    c = ising.fields
    n = ising.n_spins
    energies = np.full(
        1, float(q.sum()) + float(c.sum()) + ising.offset, dtype=dtype
    )
    row = q.sum(axis=1)  # diagonal of couplings is zero by construction
    for j in range(n):
        cross = np.zeros(energies.shape[0], dtype=dtype)
        for k in range(j):
            view = cross.reshape(2 ** (j - 1 - k), 2, 2**k)
            # setting bit k flipped z_k to -1: the zj-flip delta gains 8*q[k, j]
            view[:, 1, :] += 8.0 * q[k, j]
        delta = -2.0 * c[j] - 4.0 * row[j] + cross
        energies = np.concatenate([energies, energies + delta])
    return energies


def apply_phase_separator(state: StateVector, ising: IsingModel, gamma: float) -> StateVector:
    """Multiply each basis amplitude by exp(-i*gamma*E(x))."""
    if 2**state.n != 2**ising.n_spins:
        raise ValidationError("state dimension does not match the Ising model")
    energies = _ising_energy_table(ising)
    psi = state.amplitudes.copy()
    _kernel_phase(psi, energies, float(gamma))
    return StateVector(amplitudes=psi, n=state.n)


def apply_standard_mixer(state: StateVector, beta: float) -> StateVector:
    """Apply exp(-i*beta*X) = RX(2*beta) to every qubit."""
    psi = state.amplitudes.copy()
    m = _rx_matrix(beta)
    for q in range(state.n):
        _kernel_mix(psi, q, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    return StateVector(amplitudes=psi, n=state.n)


def apply_warm_start_mixer(
    state: StateVector, thetas: np.ndarray, beta: float
) -> StateVector:
    """Rotated-frame mixer RY(theta) RZ(-2*beta) RY(-theta) per qubit."""
    if len(thetas) != state.n:
        raise ValidationError("need one mixer angle per qubit")
    psi = state.amplitudes.copy()
    for q, theta in enumerate(thetas):
        m = _warm_mixer_matrix(float(theta), float(beta))
        _kernel_mix(psi, q, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    return StateVector(amplitudes=psi, n=state.n)


def expectation(state: StateVector, ising: IsingModel) -> float:
    """Exact <E> over the statevector (no sampling noise)."""
    if state.n != ising.n_spins:
        raise ValidationError("state dimension does not match the Ising model")
    return _expectation_of(state.amplitudes, _ising_energy_table(ising))


# ---------------------------------------------------------------------------
# continuous relaxation (projected gradient descent)


def solve_relaxed(
    problem: QuboProblem, restarts: int = 3, seed: int = 0, maxiter: int = 500
) -> RelaxedSolution:
    """Approximate minimizer of the commitment objective over [0, 1]^n.

    Projected gradient descent with spectral (Barzilai-Borwein) step sizes;
    the objective (quadratic core plus covering penalties) is convex for the
    problems built here, so the best of a few starts is reliable.
    """
    n = problem.n_bits
    q2 = problem.quadratic + problem.quadratic.T
    b = problem.linear

    terms = [
        (t.weight, np.pad(t.coeffs, (0, n - len(t.coeffs))), t.target)
        for t in problem.deficit_terms
    ]

    def value_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
        val = float(0.5 * x @ q2 @ x + b @ x + problem.constant)
        grad = q2 @ x + b
        for w, coeffs, target in terms:
            short = target - float(coeffs @ x)
            if short > 0:
                val += w * short * short
                grad -= 2.0 * w * short * coeffs
        return val, grad

    lipschitz = float(np.linalg.norm(q2, 2))
    for w, coeffs, _ in terms:
        lipschitz += 2.0 * w * float(coeffs @ coeffs)
    base_step = 1.0 / max(lipschitz, 1e-12)

    rng = np.random.default_rng(seed)
    starts = [np.full(n, 0.5)]
    starts += [rng.uniform(0.0, 1.0, n) for _ in range(max(0, restarts - 1))]

    best_x, best_val = None, np.inf
    for x in starts:
        x = x.copy()
        val, grad = value_grad(x)
        step = base_step
        for _ in range(maxiter):
            x_new = np.clip(x - step * grad, 0.0, 1.0)
            move = x_new - x
            if float(np.max(np.abs(move))) < 1e-9:
                break
            val_new, grad_new = value_grad(x_new)
            while val_new > val + float(grad @ move) + 0.5 * lipschitz * float(
                move @ move
            ) and step > base_step:
                step = max(base_step, 0.5 * step)
                x_new = np.clip(x - step * grad, 0.0, 1.0)
                move = x_new - x
                val_new, grad_new = value_grad(x_new)
            grad_diff = grad_new - grad
            denom = float(grad_diff @ grad_diff)
            step = (
                max(base_step, abs(float(move @ grad_diff)) / denom)
                if denom > 0
                else base_step
            )
            x, val, grad = x_new, val_new, grad_new
        if val < best_val:
            best_val, best_x = val, x
    return RelaxedSolution(c_star=best_x, value=best_val)


# ---------------------------------------------------------------------------
# full QAOA run


def _initial_amplitudes(cfg: QaoaConfig, n: int, thetas, dtype) -> np.ndarray:
    if cfg.mode == "standard":
        return np.full(2**n, 2.0 ** (-n / 2.0), dtype=dtype)
    return _product_state(np.cos(thetas / 2.0), np.sin(thetas / 2.0), dtype=dtype)


def _evolve(
    init: np.ndarray,
    energies: np.ndarray,
    params: np.ndarray,
    cfg: QaoaConfig,
    n: int,
    thetas,
    dtype,
) -> np.ndarray:
    p = cfg.layers
    gammas, betas = params[:p], params[p:]
    psi = init.copy()
    for layer in range(p):
        _kernel_phase(psi, energies, float(gammas[layer]))
        if cfg.mode == "standard":
            m = _rx_matrix(float(betas[layer]), dtype=dtype)
            for q in range(n):
                _kernel_mix(psi, q, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
        else:
            for q in range(n):
                m = _warm_mixer_matrix(float(thetas[q]), float(betas[layer]), dtype=dtype)
                _kernel_mix(psi, q, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    return psi


def _repaired_index(problem: QuboProblem, index: int) -> int:
    """Same decision bits, slack groups reset to their optimal settings."""
    n_dec = problem.n_decision
    decision = index & ((1 << n_dec) - 1)
    bits = np.array([(decision >> j) & 1 for j in range(n_dec)], dtype=float)
    repaired = decision
    for term in problem.slack_terms:
        s = term.optimal_slack(bits)
        repaired |= s << term.first_bit
    return repaired


def run_qaoa(
    problem: QuboProblem,
    cfg: QaoaConfig,
    commitment_filter=None,
) -> QaoaResult:
    """Optimize the variational parameters, then sample the final state.

    The parameter search minimizes the exact statevector expectation with
    the shared derivative-free optimizer; sampling happens once, at the
    optimum.  Sampled bitstrings are ranked with their slack groups reset
    to the optimal setting for the sampled commitment (raw slack draws
    otherwise add pure readout noise), and the best-ranked commitment is
    returned.  ``commitment_filter`` optionally restricts the ranking to
    commitments it accepts (falling back to the unfiltered winner when no
    sampled commitment passes).
    """
    n = problem.n_bits
    cap = max_qubits(cfg.max_qubits)
    if n > cap:
        raise QubitLimitError(f"{n} qubits exceed the {cap}-qubit memory limit")

    rng = np.random.default_rng(cfg.seed)
    energies = energy_table(problem)

    thetas = None
    if cfg.mode == "warm_start":
        relaxed = solve_relaxed(
            problem, restarts=cfg.relaxation_restarts, seed=cfg.seed
        )
        c = np.clip(
            relaxed.c_star, cfg.warm_start_clamp, 1.0 - cfg.warm_start_clamp
        )
        thetas = 2.0 * np.arcsin(np.sqrt(c))

    # Search in reduced precision above the threshold; readout stays exact.
    fast_dtype = np.complex64 if n > _FAST_DTYPE_THRESHOLD else np.complex128
    fast_energies = energies.astype(np.float32) if fast_dtype == np.complex64 else energies
    init_fast = _initial_amplitudes(cfg, n, thetas, fast_dtype)

    evaluations = 0

    def objective(params: np.ndarray) -> float:
        nonlocal evaluations
        evaluations += 1
        psi = _evolve(init_fast, fast_energies, params, cfg, n, thetas, fast_dtype)
        return _expectation_of(psi, fast_energies)

    p = cfg.layers
    zero = np.zeros(2 * p)
    baseline = objective(zero)
    best_params, best_exp = zero, baseline

    try:
        for _ in range(max(1, cfg.restarts)):
            x0 = rng.uniform(0.0, np.pi / 2.0, 2 * p)
            result = optim.minimize(
                optim.OptimProblem(
                    dimension=2 * p,
                    objective=objective,
                    maxiter=cfg.maxiter,
                    tolerance=cfg.search_tolerance,
                    rhobeg=0.4,
                ),
                x0,
            )
            if result.f_best < best_exp:
                best_exp, best_params = result.f_best, result.x_best
    except Exception as exc:  # propagate with the incumbent attached
        raise QaoaError(f"parameter search failed: {exc}") from exc

    init_exact = _initial_amplitudes(cfg, n, thetas, np.complex128)
    psi = _evolve(init_exact, energies, best_params, cfg, n, thetas, np.complex128)
    probs = np.abs(psi) ** 2
    probs /= probs.sum()

    draws = rng.choice(2**n, size=cfg.shots, p=probs)
    indices, counts = np.unique(draws, return_counts=True)

    n_dec = problem.n_decision
    decision_part = indices & ((1 << n_dec) - 1)
    patterns = np.unique(decision_part)
    repaired = np.array([_repaired_index(problem, int(d)) for d in patterns])
    ranked = energies[repaired]

    keep = np.ones(len(patterns), dtype=bool)
    if commitment_filter is not None:
        bit_cols = ((patterns[:, None] >> np.arange(n_dec)[None, :]) & 1).astype(
            np.int8
        )
        keep = np.array([bool(commitment_filter(row)) for row in bit_cols])
        if not keep.any():
            keep[:] = True
    pool = np.where(keep)[0]
    winner = int(repaired[pool[np.argmin(ranked[pool])]])

    bit_positions = np.arange(n)
    best_bits = ((winner >> bit_positions) & 1).astype(np.int8)
    samples = {
        "".join(str((int(idx) >> j) & 1) for j in range(n)): int(cnt)
        for idx, cnt in zip(indices, counts)
    }
    return QaoaResult(
        best_bits=best_bits,
        best_value=float(energies[winner]),
        samples=samples,
        optimal_params=(best_params[:p].copy(), best_params[p:].copy()),
        evaluations=evaluations,
        best_expectation=float(best_exp),
        baseline_expectation=float(baseline),
    )

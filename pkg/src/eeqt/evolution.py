"""Dissipative evolution of hybrid states.

Integrates the Liouville equation

    drho/dt = -i[H, rho] + sum_i Vi* rho Vi - 1/2 {sum_i Vi Vi*, rho}

blockwise for block-diagonal states, with a fixed-step classical RK4
integrator and a post-hoc trace-drift guard.  Coupling operators are block
matrices over classical index pairs whose entries are quantum operators;
structural complete-positivity conditions are checked numerically on probe
operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .states import (
    HERMITICITY_TOL,
    HybridState,
    classical_marginal,
    random_projector,
    validate_state,
)

BLOCK_ZERO_TOL = 1e-10


@dataclass(frozen=True)
class CouplingOperator:
    """Block matrix V with quantum-operator entries V[alpha, beta].

    Attributes
    ----------
    blocks : np.ndarray
        Complex array of shape (n+1, n+1, d, d); entry (alpha, beta) is the
        quantum operator in classical block row alpha, column beta.
    """

    blocks: np.ndarray = field(repr=False)

    def __post_init__(self):
        blocks = np.asarray(self.blocks, dtype=complex)
        if blocks.ndim != 4 or blocks.shape[0] != blocks.shape[1] \
                or blocks.shape[2] != blocks.shape[3]:
            raise ValueError(
                f"blocks must have shape (n+1, n+1, d, d), got {blocks.shape}"
            )
        if not np.all(np.isfinite(blocks.view(float))):
            raise ValueError("coupling blocks contain non-finite entries")
        blocks = blocks.copy()
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @property
    def classical_dim(self) -> int:
        return self.blocks.shape[0]

    @property
    def quantum_dim(self) -> int:
        return self.blocks.shape[2]

    @classmethod
    def from_grid(cls, grid, quantum_dim: int | None = None) -> "CouplingOperator":
        """Build from a nested sequence of matrices, with None meaning zero."""
        n = len(grid)
        d = quantum_dim
        if d is None:
            for row in grid:
                for entry in row:
                    if entry is not None:
                        d = np.asarray(entry).shape[0]
                        break
                if d is not None:
                    break
        if d is None:
            raise ValueError("all-zero grid needs an explicit quantum_dim")
        blocks = np.zeros((n, n, d, d), dtype=complex)
        for a, row in enumerate(grid):
            if len(row) != n:
                raise ValueError("coupling grid must be square")
            for b, entry in enumerate(row):
                if entry is not None:
                    blocks[a, b] = np.asarray(entry, dtype=complex)
        return cls(blocks)

    def support(self) -> frozenset:
        """Set of (alpha, beta) classical index pairs with a nonzero entry."""
        mags = np.max(np.abs(self.blocks), axis=(2, 3))
        return frozenset(
            (a, b)
            for a in range(self.classical_dim)
            for b in range(self.classical_dim)
            if mags[a, b] > 1e-12
        )


def hamiltonian_blocks(blocks, tol: float = HERMITICITY_TOL) -> np.ndarray:
    """Validate a block-diagonal Hamiltonian given as an (n+1, d, d) array."""
    h = np.asarray(blocks, dtype=complex)
    if h.ndim != 3 or h.shape[1] != h.shape[2]:
        raise ValueError(f"Hamiltonian blocks must be (n+1, d, d), got {h.shape}")
    dev = np.max(np.abs(h - h.conj().transpose(0, 2, 1)))
    if dev > tol:
        raise ValueError(f"Hamiltonian block not Hermitian: max dev {dev:.3g}")
    return h


@dataclass(frozen=True)
class EvolutionConfig:
    """Fixed-step integration parameters."""

    step: float
    duration: float
    record_every: int = 1
    trace_tol: float = 1e-8

    def __post_init__(self):
        if self.step <= 0 or self.duration <= 0:
            raise ValueError("step and duration must be positive")
        if self.step > self.duration:
            raise ValueError("step must not exceed duration")
        if self.record_every < 1:
            raise ValueError("record_every must be a positive integer")


def _stack(couplings) -> np.ndarray | None:
    if not couplings:
        return None
    vs = np.stack([v.blocks for v in couplings])
    shapes = {v.blocks.shape for v in couplings}
    if len(shapes) != 1:
        raise ValueError("coupling operators have mismatched shapes")
    return vs


def _gain_rate(vs: np.ndarray) -> np.ndarray:
    # G[alpha] = sum_{i, gamma} V[i, alpha, gamma] V[i, alpha, gamma]^dagger
    return np.einsum("iagxz,iagwz->axw", vs, vs.conj())


def liouville_rhs(state: HybridState, hamiltonian=None, couplings=()) -> np.ndarray:
    """Time derivative of the hybrid state, blockwise.

    Returns an (n+1, d, d) array; the traces of the returned blocks sum to
    zero (probability conservation).
    """
    vs = _stack(list(couplings))
    h = None if hamiltonian is None else hamiltonian_blocks(hamiltonian)
    gain = None if vs is None else _gain_rate(vs)
    _check_dims(state, h, vs)
    return _rhs(state.blocks, h, vs, gain)


def _check_dims(state: HybridState, h, vs) -> None:
    n, d = state.classical_dim, state.quantum_dim
    if h is not None and h.shape != (n, d, d):
        raise ValueError(f"Hamiltonian shape {h.shape} does not match state ({n}, {d}, {d})")
    if vs is not None and vs.shape[1:] != (n, n, d, d):
        raise ValueError(
            f"coupling shape {vs.shape[1:]} does not match state ({n}, {n}, {d}, {d})"
        )


def _rhs(rho: np.ndarray, h, vs, gain) -> np.ndarray:
    out = np.zeros_like(rho)
    if h is not None:
        out += -1j * (h @ rho - rho @ h)
    if vs is not None:
        # sum_{i, gamma} V[i, gamma, alpha]^dagger rho[gamma] V[i, gamma, alpha]
        out += np.einsum("igaxm,gxz,igazw->amw", vs.conj(), rho, vs)
        out -= 0.5 * (gain @ rho + rho @ gain)
    return out


@dataclass(frozen=True)
class Trajectory:
    """Recorded states of a fixed-step integration."""

    times: np.ndarray
    blocks: np.ndarray  # shape (n_records, n+1, d, d)

    def __len__(self) -> int:
        return self.times.size

    def state(self, index: int) -> HybridState:
        return HybridState(self.blocks[index])

    def probabilities(self) -> np.ndarray:
        """Classical marginals, shape (n_records, n+1)."""
        return np.trace(self.blocks, axis1=2, axis2=3).real

    def trace_drift(self) -> np.ndarray:
        return np.abs(self.probabilities().sum(axis=1) - 1.0)

    def min_eigenvalues(self) -> np.ndarray:
        herm = 0.5 * (self.blocks + self.blocks.conj().transpose(0, 1, 3, 2))
        return np.linalg.eigvalsh(herm).min(axis=(1, 2))


class TraceDriftError(RuntimeError):
    """Raised when the integrator loses probability beyond tolerance."""


def evolve(
    state: HybridState,
    hamiltonian=None,
    couplings=(),
    config: EvolutionConfig | None = None,
    check_cp: bool = True,
    rng: np.random.Generator | None = None,
) -> Trajectory:
    """Integrate the Liouville equation with fixed-step RK4.

    The first recorded entry is the initial state.  Raises TraceDriftError
    if the total trace drifts beyond ``config.trace_tol`` (step too large)
    and ValueError if the couplings fail the structural CP check.
    """
    if config is None:
        raise ValueError("an EvolutionConfig is required")
    couplings = list(couplings)
    if check_cp and couplings:
        report = check_cp_conditions(couplings, probes=[state], rng=rng)
        if not report.ok:
            raise ValueError(f"coupling operators fail CP conditions: {report.summary()}")
    vs = _stack(couplings)
    h = None if hamiltonian is None else hamiltonian_blocks(hamiltonian)
    gain = None if vs is None else _gain_rate(vs)
    _check_dims(state, h, vs)

    n_steps = int(round(config.duration / config.step))
    dt = config.step
    rho = state.blocks.copy()
    records = [rho.copy()]
    times = [0.0]
    for step in range(1, n_steps + 1):
        k1 = _rhs(rho, h, vs, gain)
        k2 = _rhs(rho + 0.5 * dt * k1, h, vs, gain)
        k3 = _rhs(rho + 0.5 * dt * k2, h, vs, gain)
        k4 = _rhs(rho + dt * k3, h, vs, gain)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % config.record_every == 0 or step == n_steps:
            records.append(rho.copy())
            times.append(step * dt)
    traj = Trajectory(times=np.asarray(times), blocks=np.stack(records))
    drift = traj.trace_drift().max()
    if drift > config.trace_tol:
        raise TraceDriftError(
            f"trace drift {drift:.3g} exceeds {config.trace_tol:.3g}; reduce step"
        )
    return traj


@dataclass(frozen=True)
class CPReport:
    """Result of the structural complete-positivity checks.

    ``gain_offdiag``: largest off-diagonal block magnitude of sum_i Vi Vi*.
    ``sandwich_offdiag``: largest off-diagonal block magnitude of Vi* A Vi
    over all probes A.  ``violations`` lists (check, i, alpha, beta, value).
    """

    gain_offdiag: float
    sandwich_offdiag: float
    violations: tuple
    tol: float

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        if self.ok:
            return "pass"
        worst = max(self.violations, key=lambda v: v[-1])
        return (
            f"{len(self.violations)} violating blocks; worst {worst[0]} "
            f"block ({worst[2]}, {worst[3]}) magnitude {worst[4]:.3g}"
        )


def check_cp_conditions(
    couplings,
    probes=(),
    n_random_probes: int = 8,
    tol: float = BLOCK_ZERO_TOL,
    rng: np.random.Generator | None = None,
) -> CPReport:
    """Verify that the couplings map block-diagonal operators to block-diagonal.

    Checks (i) that sum_i Vi Vi* is block-diagonal and (ii) that Vi* A Vi is
    block-diagonal for a family of probe operators A: random block-diagonal
    operators plus any supplied hybrid states.
    """
    couplings = list(couplings)
    if not couplings:
        return CPReport(0.0, 0.0, (), tol)
    vs = _stack(couplings)
    _, n, _, d, _ = vs.shape
    if rng is None:
        rng = np.random.default_rng(0)

    offdiag = ~np.eye(n, dtype=bool)
    violations = []

    # war1: off-diagonal blocks of sum_i Vi Vi*
    gain_full = np.einsum("iagxz,ibgwz->abxw", vs, vs.conj())
    gain_mags = np.max(np.abs(gain_full), axis=(2, 3))
    gain_worst = float(gain_mags[offdiag].max()) if n > 1 else 0.0
    for a in range(n):
        for b in range(n):
            if a != b and gain_mags[a, b] > tol:
                violations.append(("gain", None, a, b, float(gain_mags[a, b])))

    # war2: off-diagonal blocks of Vi* A Vi for block-diagonal probes A
    probe_blocks = [np.asarray(p.blocks, dtype=complex) if isinstance(p, HybridState)
                    else np.asarray(p, dtype=complex) for p in probes]
    for _ in range(n_random_probes):
        probe_blocks.append(np.stack([random_projector(d, rng) for _ in range(n)]))
    sandwich_worst = 0.0
    for a_probe in probe_blocks:
        # (Vi* A Vi)[alpha, beta] = sum_gamma Vi[gamma, alpha]^dag A[gamma] Vi[gamma, beta]
        sandwich = np.einsum(
            "igaxm,gxz,igbzw->iabmw", vs.conj(), a_probe, vs
        )
        mags = np.max(np.abs(sandwich), axis=(3, 4))
        for i in range(mags.shape[0]):
            for a in range(n):
                for b in range(n):
                    if a != b:
                        sandwich_worst = max(sandwich_worst, float(mags[i, a, b]))
                        if mags[i, a, b] > tol:
                            violations.append(
                                ("sandwich", i, a, b, float(mags[i, a, b]))
                            )
    return CPReport(
        gain_offdiag=gain_worst,
        sandwich_offdiag=sandwich_worst,
        violations=tuple(violations),
        tol=tol,
    )


def classical_rate_equations(state: HybridState, couplings) -> np.ndarray:
    """Derivatives of the classical event probabilities.

    Equals the block traces of the Liouville right-hand side; the Hamiltonian
    commutator is traceless so only the couplings contribute.  The returned
    derivatives sum to zero.
    """
    vs = _stack(list(couplings))
    if vs is None:
        return np.zeros(state.classical_dim)
    _check_dims(state, None, vs)
    rho = state.blocks
    # gain into alpha from gamma minus loss out of alpha
    rates = np.einsum("igaxm,gxz,igazm->a", vs.conj(), rho, vs).real
    gain = _gain_rate(vs)
    rates -= np.einsum("axz,azx->a", gain, rho).real
    return rates


def trajectory_rows(traj: Trajectory):
    """Rows (t, p_0..p_n, trace_drift, min_eigenvalue) for CSV export."""
    probs = traj.probabilities()
    drift = traj.trace_drift()
    mins = traj.min_eigenvalues()
    for k in range(len(traj)):
        yield (traj.times[k], *probs[k], drift[k], mins[k])


def validate_trajectory(traj: Trajectory, **tols) -> bool:
    """True when every recorded state passes validate_state."""
    return all(validate_state(traj.state(k), **tols).ok for k in range(len(traj)))

"""Monte Carlo particle engine for the kinetic run-and-tumble model.

Particles carry a position on the periodic domain, a velocity (a unit vector
while running, zero while tumbling), and the internal deviation
``y = M(S) - m``.  Per time step ``dt`` each particle moves, updates ``y``
from the relative change of the attractant sensed along its own path
(semi-implicit in the relaxation term), and then stops with probability
``dt * Lambda(y) / eps`` or restarts with probability ``dt / (nu * eps)``
with a uniformly random fresh direction.  ``nu = 0`` selects the
instantaneous-tumbling limit: a stopping particle redraws its direction
within the same step and the tumbling population stays empty.

Observables are tallied every ``snapshot_stride`` steps inside the trailing
averaging window and averaged into a :class:`~chemokin.profiles.GridProfile`.
The per-particle functions (:func:`advect`, :func:`update_internal`,
:func:`transition`) define one step of the scheme; the jitted kernels in
``_kernels`` apply exactly the same update to the whole ensemble.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, NumericalError
from .model import ChemoField, ModelParams, lambda_response
from .profiles import GridProfile
from .rng import u01, uniform_stream

__all__ = [
    "McConfig",
    "Particle",
    "ParticleEnsemble",
    "RngStream",
    "RunRecord",
    "init_ensemble",
    "update_internal",
    "advect",
    "transition",
    "bin_profile",
    "run",
]

# Salted step indices reserved for initialization draws; run steps count from 1.
_INIT_POS1 = 1 << 62
_INIT_POS2 = (1 << 62) + 1
_INIT_DIR = (1 << 62) + 2


@dataclass(frozen=True)
class McConfig:
    """Full configuration of one Monte Carlo run.

    ``n_particles`` must be divisible by the cell count so the uniform
    initial condition is exact (the CLI rounds up and records the actual
    count).  ``dt`` must keep both transition probabilities valid:
    ``dt * (1 + chi) / eps <= 1`` and ``dt / (nu * eps) <= 1``; invalid
    combinations are rejected here rather than clamped, since clamping
    would bias the rates.
    """

    params: ModelParams
    n_particles: int
    n_cells: int
    dt: float
    t_end: float
    avg_window: float
    snapshot_stride: int = 100
    seed: int = 0

    def __post_init__(self):
        p = self.params
        if self.n_particles <= 0:
            raise ConfigError(f"n_particles must be positive, got {self.n_particles}")
        if self.n_cells <= 0:
            raise ConfigError(f"n_cells must be positive, got {self.n_cells}")
        if self.n_particles % self.n_cells**p.dim != 0:
            raise ConfigError(
                f"n_particles={self.n_particles} must be divisible by the cell count "
                f"{self.n_cells**p.dim} for an exactly uniform initial condition"
            )
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be a positive finite real, got {self.dt}")
        if not (self.t_end > 0.0 and math.isfinite(self.t_end)):
            raise ConfigError(f"t_end must be a positive finite real, got {self.t_end}")
        if not (0.0 < self.avg_window <= self.t_end):
            raise ConfigError(
                f"avg_window must lie in (0, t_end], got {self.avg_window} with t_end={self.t_end}"
            )
        if self.snapshot_stride < 1:
            raise ConfigError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")
        p_stop_max = self.dt * (1.0 + p.chi) / p.epsilon
        if p_stop_max > 1.0:
            raise ConfigError(
                f"dt*(1+chi)/epsilon = {p_stop_max:.4g} exceeds 1; stopping probability invalid"
            )
        if p.nu > 0.0:
            p_restart = self.dt * p.mu_hat / p.epsilon
            if p_restart > 1.0:
                raise ConfigError(
                    f"dt/(nu*epsilon) = {p_restart:.4g} exceeds 1; restart probability invalid"
                )
        if self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def n_avg_steps(self) -> int:
        return int(round(self.avg_window / self.dt))

    @property
    def n_snapshots(self) -> int:
        return self.n_avg_steps // self.snapshot_stride


@dataclass
class Particle:
    """Single-particle view used by the per-particle operations."""

    position: np.ndarray  # shape (dim,)
    velocity: np.ndarray  # shape (dim,); the zero vector while tumbling
    y: float
    s_prev: float

    @property
    def is_running(self) -> bool:
        return bool(np.any(self.velocity != 0.0))


class RngStream:
    """Counter-based stream for one particle: one uniform per step."""

    def __init__(self, seed: int, particle_index: int, step: int = 1):
        self.seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self.particle = particle_index
        self.step = step

    def next_uniform(self) -> float:
        u = u01(self.seed, self.step, self.particle)
        self.step += 1
        return u


@dataclass
class ParticleEnsemble:
    """Struct-of-arrays ensemble state.

    ``positions`` and ``velocities`` have shape (dim, N); ``m_prev`` caches
    the log-attractant at the previous position, from which the sensed value
    ``s_prev = exp(m_prev)`` follows.  Carrying the sensed value per particle
    keeps the pathway-derivative update exact across periodic wraps.
    """

    dim: int
    domain_length: float
    positions: np.ndarray
    velocities: np.ndarray
    y: np.ndarray
    m_prev: np.ndarray

    @property
    def n_particles(self) -> int:
        return self.positions.shape[1]

    @property
    def running_mask(self) -> np.ndarray:
        return np.any(self.velocities != 0.0, axis=0)

    def s_prev(self) -> np.ndarray:
        return np.exp(self.m_prev)

    def particle(self, l: int) -> Particle:
        return Particle(
            position=self.positions[:, l].copy(),
            velocity=self.velocities[:, l].copy(),
            y=float(self.y[l]),
            s_prev=float(np.exp(self.m_prev[l])),
        )


@dataclass
class RunRecord:
    """Provenance of one engine run (embedded into the CLI manifest)."""

    engine: str
    params: ModelParams
    n_particles: int
    n_cells: int
    dt: float
    t_end: float
    avg_window: float
    snapshot_stride: int
    seed: int
    n_steps: int
    n_snapshots: int
    wall_seconds: float
    extra: dict = field(default_factory=dict)


def update_internal(y_prev: float, s_prev: float, s_now: float, dt: float, tau: float) -> float:
    """One semi-implicit internal-state step.

    Solves ``(y - y_prev)/dt = (s_now - s_prev)/(dt * s_prev) - y/tau`` for
    ``y``, i.e. the relative sensed change is added explicitly and the
    relaxation is treated implicitly:

        y = (y_prev + (s_now - s_prev)/s_prev) / (1 + dt/tau)
    """
    if s_prev <= 0.0:
        raise ConfigError(f"s_prev must be > 0, got {s_prev}")
    if dt <= 0.0 or tau <= 0.0:
        raise ConfigError("dt and tau must be > 0")
    return (y_prev + (s_now - s_prev) / s_prev) / (1.0 + dt / tau)


def advect(particle: Particle, dt: float, domain_length: float) -> Particle:
    """Move one particle at unit speed and wrap into [-L/2, L/2)^d."""
    half = 0.5 * domain_length
    pos = particle.position + particle.velocity * dt
    pos = np.mod(pos + half, domain_length) - half
    # fmod edge: an argument epsilon below a period multiple can round to L
    pos[pos >= half] -= domain_length
    return Particle(pos, particle.velocity.copy(), particle.y, particle.s_prev)


def transition(particle: Particle, rng: RngStream, params: ModelParams, dt: float) -> Particle:
    """Stochastic stop / restart of one particle, one uniform draw.

    A draw below the event probability ``p`` is reused as ``u/p`` (uniform
    conditional on the event) to pick the fresh direction, matching the
    jitted kernels draw for draw.
    """
    u = rng.next_uniform()
    dim = params.dim
    vel = particle.velocity.copy()
    if particle.is_running:
        p = dt * lambda_response(particle.y, params.delta, params.chi) / params.epsilon
        if p > 1.0:
            raise ConfigError(f"stop probability {p:.4g} exceeds 1; reduce dt")
        if u < p:
            if params.nu == 0.0:
                vel = _fresh_direction(u / p, dim)
            else:
                vel = np.zeros(dim)
    else:
        p = dt * params.mu_hat / params.epsilon
        if p > 1.0:
            raise ConfigError(f"restart probability {p:.4g} exceeds 1; reduce dt")
        if u < p:
            vel = _fresh_direction(u / p, dim)
    return Particle(particle.position.copy(), vel, particle.y, particle.s_prev)


def _fresh_direction(u: float, dim: int) -> np.ndarray:
    if dim == 1:
        return np.array([-1.0 if u < 0.5 else 1.0])
    theta = 2.0 * math.pi * u
    return np.array([math.cos(theta), math.sin(theta)])


def init_ensemble(config: McConfig) -> ParticleEnsemble:
    """Uniform-per-cell positions, equilibrium internal state, all running.

    Each mesh cell receives exactly ``N / I**dim`` particles placed uniformly
    inside it; every particle starts running (``y = 0``) with a uniformly
    random direction.
    """
    p = config.params
    n = config.n_particles
    n_cells = config.n_cells
    L = p.domain_length
    dx = L / n_cells
    nbar = n // n_cells**p.dim
    field_ = ChemoField(p.dim)

    cell = np.arange(n) // nbar
    u1 = uniform_stream(config.seed, _INIT_POS1, n)
    udir = uniform_stream(config.seed, _INIT_DIR, n)
    if p.dim == 1:
        x = -0.5 * L + (cell + u1) * dx
        positions = x[np.newaxis, :]
        velocities = np.where(udir < 0.5, -1.0, 1.0)[np.newaxis, :]
        m_prev = field_.M(x)
    else:
        i1 = cell // n_cells
        i2 = cell % n_cells
        u2 = uniform_stream(config.seed, _INIT_POS2, n)
        x1 = -0.5 * L + (i1 + u1) * dx
        x2 = -0.5 * L + (i2 + u2) * dx
        positions = np.vstack([x1, x2])
        theta = 2.0 * math.pi * udir
        velocities = np.vstack([np.cos(theta), np.sin(theta)])
        m_prev = field_.M(x1, x2)

    return ParticleEnsemble(
        dim=p.dim,
        domain_length=L,
        positions=np.ascontiguousarray(positions),
        velocities=np.ascontiguousarray(velocities),
        y=np.zeros(n),
        m_prev=np.asarray(m_prev, dtype=float),
    )


def bin_profile(ensemble: ParticleEnsemble, n_cells: int, params: ModelParams) -> GridProfile:
    """Instantaneous binned profile of an ensemble (single snapshot).

    Cells are half-open; a particle exactly on a boundary bins into the
    upper cell.  Run lengths ``eps / Lambda(y)`` of running particles are
    classified by the sign of ``v . grad S`` at the particle position;
    particles at the gradient-free point contribute only to the pooled mean.
    """
    L = ensemble.domain_length
    dim = ensemble.dim
    half = 0.5 * L
    idx = np.floor((ensemble.positions + half) * (n_cells / L)).astype(np.int64)
    np.clip(idx, 0, n_cells - 1, out=idx)
    flat = idx[0] if dim == 1 else idx[0] * n_cells + idx[1]
    size = n_cells**dim

    running = ensemble.running_mask
    counts_f = np.bincount(flat[running], minlength=size).astype(np.int64)
    counts_g = np.bincount(flat[~running], minlength=size).astype(np.int64)

    run_len = params.epsilon / lambda_response(ensemble.y, params.delta, params.chi)
    if dim == 1:
        s = -ensemble.velocities[0] * np.sign(ensemble.positions[0])
    else:
        s = -np.einsum("ij,ij->j", ensemble.velocities, ensemble.positions)
    classes = [running & (s > 0), running & (s < 0), running & (s == 0)]
    xi_sums = np.zeros((3, size))
    xi_counts = np.zeros((3, size), dtype=np.int64)
    for c, mask in enumerate(classes):
        xi_sums[c] = np.bincount(flat[mask], weights=run_len[mask], minlength=size)
        xi_counts[c] = np.bincount(flat[mask], minlength=size)

    shape = (n_cells,) if dim == 1 else (n_cells, n_cells)
    return GridProfile.from_accumulators(
        dim=dim,
        domain_length=L,
        n_cells=n_cells,
        counts_f=counts_f.reshape(shape),
        counts_g=counts_g.reshape(shape),
        xi_sums=xi_sums.reshape((3,) + shape),
        xi_counts=xi_counts.reshape((3,) + shape),
        n_snapshots=1,
        window=0.0,
        n_particles=ensemble.n_particles,
    )


def run(config: McConfig) -> tuple[GridProfile, RunRecord]:
    """Execute one full Monte Carlo run and time-average its observables.

    Returns the averaged profile over the trailing window together with a
    provenance record.  Particle count is conserved exactly; NaN in any
    observable aborts the run.
    """
    p = config.params
    t0 = time.perf_counter()
    ens = init_ensemble(config)

    n_steps = config.n_steps
    n_snap = config.n_snapshots
    if n_snap < 1:
        raise ConfigError(
            f"averaging window {config.avg_window} with stride {config.snapshot_stride} "
            f"and dt {config.dt} yields no snapshots"
        )
    avg_start = n_steps - config.n_avg_steps

    I = config.n_cells
    shape = (I,) if p.dim == 1 else (I, I)
    counts_f = np.zeros(shape, dtype=np.int64)
    counts_g = np.zeros(shape, dtype=np.int64)
    xi_sums = np.zeros((3,) + shape)
    xi_counts = np.zeros((3,) + shape, dtype=np.int64)
    snap_counts = np.zeros((n_snap,) + shape, dtype=np.int32)
    seed = np.uint64(config.seed & 0xFFFFFFFFFFFFFFFF)

    if p.dim == 1:
        status, got_snaps = _kernels.run_1d(
            ens.positions[0], ens.velocities[0], ens.y, ens.m_prev,
            seed, n_steps, avg_start, config.snapshot_stride,
            config.dt, p.domain_length, p.epsilon, p.tau, p.delta, p.chi, p.nu,
            counts_f, counts_g, xi_sums, xi_counts, snap_counts,
        )
    else:
        status, got_snaps = _kernels.run_2d(
            ens.positions[0], ens.positions[1], ens.velocities[0], ens.velocities[1],
            ens.y, ens.m_prev,
            seed, n_steps, avg_start, config.snapshot_stride,
            config.dt, p.domain_length, p.epsilon, p.tau, p.delta, p.chi, p.nu,
            counts_f, counts_g, xi_sums, xi_counts, snap_counts,
        )
    if status == _kernels.NAN_DETECTED:
        raise NumericalError("NaN detected in particle state during accumulation")
    if got_snaps != n_snap:
        raise NumericalError(f"expected {n_snap} snapshots, accumulated {got_snaps}")

    total = int(counts_f.sum() + counts_g.sum())
    if total != config.n_particles * n_snap:
        raise NumericalError(
            f"particle count not conserved: tallied {total}, "
            f"expected {config.n_particles * n_snap}"
        )

    nbar = config.n_particles / I**p.dim
    profile = GridProfile.from_accumulators(
        dim=p.dim,
        domain_length=p.domain_length,
        n_cells=I,
        counts_f=counts_f,
        counts_g=counts_g,
        xi_sums=xi_sums,
        xi_counts=xi_counts,
        n_snapshots=n_snap,
        window=config.avg_window,
        n_particles=config.n_particles,
        rho_snapshots=snap_counts.astype(np.float64) / nbar,
    )
    record = RunRecord(
        engine="mc",
        params=p,
        n_particles=config.n_particles,
        n_cells=I,
        dt=config.dt,
        t_end=config.t_end,
        avg_window=config.avg_window,
        snapshot_stride=config.snapshot_stride,
        seed=config.seed,
        n_steps=n_steps,
        n_snapshots=n_snap,
        wall_seconds=time.perf_counter() - t0,
    )
    return profile, record

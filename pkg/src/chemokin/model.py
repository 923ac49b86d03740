"""Nondimensional model parameters, chemotactic response, and attractant field.

The motility model is a run-and-tumble process: cells run at unit speed and
stop to tumble at a rate modulated by the deviation ``y = M(S) - m`` between
the log-sensed attractant ``M(S) = log S`` and an internal memory ``m`` that
relaxes toward ``M(S)`` over the adaptation time ``tau``.  All quantities here
are nondimensional: ``epsilon`` is the mean run length over the domain scale,
``nu`` the mean tumbling duration over the mean run duration, and the
modulation of the tumbling rate is ``1 - F(y / delta)`` with a bounded, odd
response ``F``.

These objects are immutable after construction and shared by the Monte Carlo
engine, the continuum solvers, and the diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = [
    "ModelParams",
    "ScalingMode",
    "ChemoField",
    "response_F",
    "lambda_response",
    "equilibrium_M",
    "resolve_tau",
]


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be a finite real, got {value!r}")
    return value


def response_F(x, chi: float):
    """Bounded odd response ``F(x) = chi * x / sqrt(1 + x^2)``.

    Strictly increasing, ``F(0) = 0`` and ``F(x) -> +-chi`` as ``x -> +-inf``.
    Accepts scalars or numpy arrays.
    """
    x = np.asarray(x, dtype=float)
    out = chi * x / np.sqrt(1.0 + x * x)
    return out if out.ndim else float(out)


def lambda_response(y, delta: float, chi: float):
    """Tumbling-rate modulation ``Lambda(y) = 1 - F(y / delta)``.

    Strictly decreasing in the deviation ``y`` and globally bounded inside
    ``(1 - chi, 1 + chi)``; ``Lambda(0) = 1``.  Accepts scalars or arrays.
    """
    y = np.asarray(y, dtype=float)
    out = 1.0 - response_F(y / delta, chi)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class ScalingMode:
    """Adaptation-time convention: direct ``tau``, or one of two scalings.

    ``small``  -- tau = alpha * epsilon  (adaptation comparable to a run)
    ``large``  -- tau = beta / epsilon   (adaptation comparable to the
                  diffusion time of the population density)
    """

    kind: str
    value: float

    _KINDS = ("direct", "small", "large")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ConfigError(f"scaling kind must be one of {self._KINDS}, got {self.kind!r}")
        v = _require_finite("scaling value", self.value)
        if v <= 0.0:
            raise ConfigError(f"scaling value must be > 0, got {v}")
        object.__setattr__(self, "value", v)

    @classmethod
    def direct(cls, tau: float) -> "ScalingMode":
        return cls("direct", tau)

    @classmethod
    def small_adaptation(cls, alpha: float) -> "ScalingMode":
        return cls("small", alpha)

    @classmethod
    def large_adaptation(cls, beta: float) -> "ScalingMode":
        return cls("large", beta)

    def resolve(self, epsilon: float) -> float:
        """Resolved adaptation time for a given mean run length."""
        epsilon = _require_finite("epsilon", epsilon)
        if epsilon <= 0.0:
            raise ConfigError(f"epsilon must be > 0, got {epsilon}")
        if self.kind == "direct":
            return self.value
        if self.kind == "small":
            return self.value * epsilon
        return self.value / epsilon


def resolve_tau(mode: ScalingMode, epsilon: float) -> float:
    """Resolve a :class:`ScalingMode` to a concrete adaptation time."""
    return mode.resolve(epsilon)


@dataclass(frozen=True)
class ModelParams:
    """Nondimensional physics parameters shared by every engine.

    Parameters
    ----------
    epsilon : float
        Mean run length over the domain length scale, > 0.
    tau : float
        Adaptation time, > 0.
    nu : float
        Mean tumbling duration, >= 0.  ``nu = 0`` selects the instantaneous
        tumbling limit (no tumbling phase).
    delta : float
        Stiffness of the chemotactic response, > 0.
    chi : float
        Modulation amplitude, in [0, 1).  The model proper requires
        ``0 < chi < 1``; ``chi = 0`` is admitted as the no-chemotaxis control
        used in tests (the modulation is then identically 1).
    domain_length : float
        Periodic domain edge length ``L``, > 0.
    dim : int
        Spatial dimension, 1 or 2.
    """

    epsilon: float
    tau: float
    nu: float
    delta: float
    chi: float
    domain_length: float = 10.0
    dim: int = 1

    def __post_init__(self):
        for name in ("epsilon", "tau", "nu", "delta", "chi", "domain_length"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if self.epsilon <= 0.0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.tau <= 0.0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if self.nu < 0.0:
            raise ConfigError(f"nu must be >= 0, got {self.nu}")
        if self.delta <= 0.0:
            raise ConfigError(f"delta must be > 0, got {self.delta}")
        if not (0.0 <= self.chi < 1.0):
            raise ConfigError(f"chi must lie in [0, 1), got {self.chi}")
        if self.domain_length <= 0.0:
            raise ConfigError(f"domain_length must be > 0, got {self.domain_length}")
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")

    @property
    def mu_hat(self) -> float:
        """Tumble-to-run rate 1/nu; ``inf`` flags the no-tumbling-phase limit."""
        return math.inf if self.nu == 0.0 else 1.0 / self.nu

    @property
    def c_d(self) -> float:
        """Velocity-average diffusion coefficient 1/d."""
        return 1.0 / self.dim

    @property
    def sigma_nu(self) -> float:
        """Time-scale factor 1 + nu of the small-adaptation continuum limit."""
        return 1.0 + self.nu

    @property
    def lambda_prime_zero(self) -> float:
        """Slope of the modulation at y = 0: ``Lambda'(0) = -chi / delta``."""
        return -self.chi / self.delta

    def lam(self, y):
        """Shorthand for :func:`lambda_response` at these parameters."""
        return lambda_response(y, self.delta, self.chi)

    @classmethod
    def from_scaling(
        cls,
        epsilon: float,
        scaling: ScalingMode,
        nu: float,
        delta: float,
        chi: float,
        domain_length: float = 10.0,
        dim: int = 1,
    ) -> "ModelParams":
        return cls(
            epsilon=epsilon,
            tau=scaling.resolve(epsilon),
            nu=nu,
            delta=delta,
            chi=chi,
            domain_length=domain_length,
            dim=dim,
        )


@dataclass(frozen=True)
class ChemoField:
    """Prescribed attractant field on the periodic domain.

    ``S(x) = exp(-|x|)`` in 1D and ``exp(-r)`` with ``r = sqrt(x1^2 + x2^2)``
    in 2D, so the log-sensed equilibrium is ``M = -|x|`` resp. ``-r``.  The
    gradient of ``M`` is defined as exactly zero at the singular points
    (``x = 0`` in 1D, ``r = 0`` in 2D); the particle engine never evaluates it
    and the run-length classifier routes those points to a tie-break.
    """

    dim: int = 1

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"ChemoField dim must be 1 or 2, got {self.dim}")

    def M(self, *coords):
        """Equilibrium internal state at positions given per axis."""
        if len(coords) != self.dim:
            raise ConfigError(f"expected {self.dim} coordinate array(s), got {len(coords)}")
        if self.dim == 1:
            x = np.asarray(coords[0], dtype=float)
            out = -np.abs(x)
        else:
            x1 = np.asarray(coords[0], dtype=float)
            x2 = np.asarray(coords[1], dtype=float)
            out = -np.sqrt(x1 * x1 + x2 * x2)
        return out if np.ndim(out) else float(out)

    def S(self, *coords):
        """Attractant concentration ``exp(M)``."""
        out = np.exp(self.M(*coords))
        return out if np.ndim(out) else float(out)

    def grad_M(self, *coords):
        """Gradient of M per axis; the zero vector at the singular point."""
        if self.dim == 1:
            x = np.asarray(coords[0], dtype=float)
            out = -np.sign(x)
            return out if out.ndim else float(out)
        x1 = np.asarray(coords[0], dtype=float)
        x2 = np.asarray(coords[1], dtype=float)
        r = np.sqrt(x1 * x1 + x2 * x2)
        with np.errstate(invalid="ignore", divide="ignore"):
            g1 = np.where(r > 0.0, -x1 / np.where(r > 0.0, r, 1.0), 0.0)
            g2 = np.where(r > 0.0, -x2 / np.where(r > 0.0, r, 1.0), 0.0)
        if np.ndim(g1):
            return g1, g2
        return float(g1), float(g2)


def equilibrium_M(position) -> float:
    """Log-sensed equilibrium ``M`` at a single position.

    A scalar is a 1D position; a length-1 or length-2 sequence selects the
    dimension accordingly.
    """
    pos = np.atleast_1d(np.asarray(position, dtype=float))
    if pos.ndim != 1 or pos.size not in (1, 2):
        raise ConfigError(f"position must be a scalar or a 1- or 2-vector, got shape {pos.shape}")
    return float(-np.sqrt(np.sum(pos * pos)))

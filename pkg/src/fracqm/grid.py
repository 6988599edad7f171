"""Periodic 1-D lattice, reciprocal Fourier transforms, and expectation values.

The position lattice is x_j = x_min + j*dx (j = 0..n-1, x_max excluded); the
conjugate momentum lattice is p_k = 2*pi*hbar*k/L with integer frequencies
k in [-n/2, n/2) stored in FFT order. Transforms are scaled so the discrete
sums with dx/dp weights reproduce the continuum integrals

    phi(p) = (2*pi*hbar)^(-1/2) * integral psi(x) exp(-i p x / hbar) dx
    psi(x) = (2*pi*hbar)^(-1/2) * integral phi(p) exp(+i p x / hbar) dp

which makes Parseval exact on the lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class LeakageError(RuntimeError):
    """State amplitude at the periodic boundary exceeds the allowed threshold."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic lattice with its discrete-Fourier momentum lattice."""

    n_points: int
    x_min: float
    x_max: float
    dx: float
    hbar: float
    x: np.ndarray = field(repr=False)
    momentum: np.ndarray = field(repr=False)  # FFT ordering

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dp(self) -> float:
        return 2 * math.pi * self.hbar / self.length

    def same_as(self, other: "Grid") -> bool:
        return (
            self.n_points == other.n_points
            and self.x_min == other.x_min
            and self.x_max == other.x_max
            and self.hbar == other.hbar
        )


def make_grid(n_points: int, x_min: float, x_max: float, hbar: float = 1.0) -> Grid:
    """Build a periodic grid with its conjugate momentum lattice.

    Parameters
    ----------
    n_points : int
        Number of samples; must be a power of two, at least 8.
    x_min, x_max : float
        Domain [x_min, x_max); x_max itself is not a sample point.
    hbar : float
        Reduced Planck constant fixing the momentum scale (default natural 1).
    """
    if n_points < 8 or (n_points & (n_points - 1)) != 0:
        raise ValueError(f"n_points must be a power of two >= 8, got {n_points}")
    if not x_max > x_min:
        raise ValueError(f"degenerate interval [{x_min}, {x_max}]")
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    length = float(x_max) - float(x_min)
    dx = length / n_points
    x = x_min + dx * np.arange(n_points)
    p = 2 * math.pi * hbar * np.fft.fftfreq(n_points, d=dx)
    return Grid(
        n_points=n_points,
        x_min=float(x_min),
        x_max=float(x_max),
        dx=dx,
        hbar=float(hbar),
        x=_readonly(x),
        momentum=_readonly(p),
    )


@dataclass(frozen=True, eq=False)
class PositionWavefunction:
    """Sampled complex amplitudes psi(x_j) at a fixed time."""

    grid: Grid
    samples: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.shape != (self.grid.n_points,):
            raise ValueError(
                f"sample count {samples.shape} does not match grid ({self.grid.n_points},)"
            )
        object.__setattr__(self, "samples", _readonly(samples))

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.samples) ** 2)) * self.grid.dx)


@dataclass(frozen=True, eq=False)
class MomentumWavefunction:
    """Sampled complex amplitudes phi(p_k) in FFT ordering, at a fixed time."""

    grid: Grid
    samples: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.shape != (self.grid.n_points,):
            raise ValueError(
                f"sample count {samples.shape} does not match grid ({self.grid.n_points},)"
            )
        object.__setattr__(self, "samples", _readonly(samples))

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.samples) ** 2)) * self.grid.dp)


def forward_transform(psi: PositionWavefunction) -> MomentumWavefunction:
    """Position -> momentum transform (scaled discrete Fourier transform).

    phi(p_k) = (2*pi*hbar)^(-1/2) * dx * sum_j psi(x_j) exp(-i p_k x_j / hbar);
    Parseval holds exactly: sum |phi|^2 dp = sum |psi|^2 dx.
    """
    g = psi.grid
    f = np.fft.fft(psi.samples)
    phase = np.exp(-1j * g.momentum * g.x_min / g.hbar)
    samples = g.dx / math.sqrt(2 * math.pi * g.hbar) * phase * f
    return MomentumWavefunction(grid=g, samples=samples, time=psi.time)


def inverse_transform(phi: MomentumWavefunction) -> PositionWavefunction:
    """Momentum -> position transform; exact inverse of `forward_transform`."""
    g = phi.grid
    phase = np.exp(1j * g.momentum * g.x_min / g.hbar)
    f = np.fft.ifft(phi.samples * phase)
    samples = g.dp * g.n_points / math.sqrt(2 * math.pi * g.hbar) * f
    return PositionWavefunction(grid=g, samples=samples, time=phi.time)


def normalize(psi: PositionWavefunction) -> PositionWavefunction:
    """Scale to unit norm; direction is unchanged (positive real scaling)."""
    n = psi.norm()
    if n < 1e-300:
        raise ValueError("cannot normalize a zero state")
    return PositionWavefunction(grid=psi.grid, samples=psi.samples / n, time=psi.time)


def inner_x(bra: PositionWavefunction, ket: PositionWavefunction) -> complex:
    """Inner product <bra|ket> = sum conj(bra) * ket * dx on a shared grid."""
    if not bra.grid.same_as(ket.grid):
        raise ValueError("grid mismatch in inner product")
    return complex(np.vdot(bra.samples, ket.samples) * bra.grid.dx)


def _require_normalized(norm: float, what: str):
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"{what} expects a normalized state (norm={norm!r})")


def expectation_x_power(
    psi: PositionWavefunction, alpha: float, require_normalized: bool = True
) -> float:
    """<|x|^alpha> for a normalized state.

    Powers of x use the |x|^alpha convention so the observable stays real for
    non-integer alpha on the negative half-line. alpha = 0 is admitted as the
    identity (0^0 = 1), returning the squared norm.
    """
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be >= 0 and finite, got {alpha}")
    if require_normalized:
        _require_normalized(psi.norm(), "expectation_x_power")
    density = np.abs(psi.samples) ** 2
    return float(np.sum(density * np.abs(psi.grid.x) ** alpha) * psi.grid.dx)


def expectation_p_power_momentum(
    phi: MomentumWavefunction,
    alpha: float,
    branch=None,
    require_normalized: bool = True,
) -> float:
    """<p^alpha> evaluated in the momentum representation.

    `branch` is any object with a ``multiplier(p, alpha)`` method (see
    operators.BranchPolicy); None means the Hermitian |p|^alpha choice.
    For a non-Hermitian branch a complex result raises.
    """
    if not (alpha >= 0 and math.isfinite(alpha)):
        raise ValueError(f"alpha must be >= 0 and finite, got {alpha}")
    if require_normalized:
        _require_normalized(phi.norm(), "expectation_p_power_momentum")
    p = phi.grid.momentum
    mult = np.abs(p) ** alpha if branch is None else branch.multiplier(p, alpha)
    value = complex(np.sum(np.conj(phi.samples) * mult * phi.samples) * phi.grid.dp)
    if abs(value.imag) > 1e-10 * max(abs(value), 1e-300):
        raise ValueError(
            f"<p^alpha> is not real ({value}); the chosen branch is not Hermitian here"
        )
    return value.real


def boundary_leakage(psi: PositionWavefunction) -> float:
    """Amplitude at the periodic boundary relative to the state's peak."""
    a = np.abs(psi.samples)
    peak = float(a.max())
    if peak == 0.0:
        return 0.0
    return float(max(a[0], a[-1])) / peak


def spectral_concentration(psi: PositionWavefunction) -> float:
    """Fraction of the squared norm carried by the single largest momentum mode."""
    w = np.abs(np.fft.fft(psi.samples)) ** 2
    total = float(w.sum())
    if total == 0.0:
        return 0.0
    return float(w.max()) / total


def is_lattice_plane_wave(psi: PositionWavefunction, tol: float = 1e-10) -> bool:
    """True when the state is a single lattice-commensurate plane wave."""
    return spectral_concentration(psi) > 1.0 - tol


def check_boundary_leakage(psi: PositionWavefunction, tol: float, step=None):
    """Raise LeakageError unless the state decays at the boundary or is a
    lattice plane wave (periodic-commensurate states are exempt)."""
    leak = boundary_leakage(psi)
    if leak > tol and not is_lattice_plane_wave(psi):
        raise LeakageError(
            f"boundary leakage {leak:.3e} exceeds tolerance {tol:.3e}; "
            "state is not representable on this periodic grid",
            step=step,
        )

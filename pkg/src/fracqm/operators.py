"""Momentum-power and position-power operators and the anomalous Hamiltonian.

All momentum-power operators are Fourier multipliers: transform to momentum
space, multiply by m(p), transform back. The default branch m(p) = |p|^alpha
keeps every operator Hermitian; the principal complex branch p^alpha is
available for plane-wave studies but is not Hermitian for non-integer alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import PhysicalConstants, natural_constants
from .grid import (
    Grid,
    PositionWavefunction,
    MomentumWavefunction,
    forward_transform,
    inverse_transform,
    inner_x,
    check_boundary_leakage,
    _readonly,
)

StateMap = Callable[[PositionWavefunction], PositionWavefunction]


@dataclass(frozen=True)
class FractionalExponent:
    """A positive real exponent for momentum or position powers."""

    alpha: float

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"exponent must be finite and > 0, got {self.alpha}")


def _as_alpha(value) -> float:
    if isinstance(value, FractionalExponent):
        return value.alpha
    return FractionalExponent(float(value)).alpha


@dataclass(frozen=True)
class BranchPolicy:
    """Choice of multiplier branch for momentum powers on p < 0.

    riesz:     m(p) = |p|^alpha        (real, even; Hermitian operator)
    principal: m(p) = p^alpha          (principal complex branch for p < 0)
    """

    kind: str = "riesz"

    def __post_init__(self):
        if self.kind not in ("riesz", "principal"):
            raise ValueError(f"unknown branch kind {self.kind!r}")

    def multiplier(self, p: np.ndarray, alpha: float) -> np.ndarray:
        mag = np.abs(p) ** alpha
        if self.kind == "riesz":
            return mag
        # principal branch: p^alpha = |p|^alpha * exp(i*pi*alpha) for p < 0
        return np.where(p >= 0, mag.astype(np.complex128), mag * np.exp(1j * math.pi * alpha))


RIESZ = BranchPolicy("riesz")
PRINCIPAL = BranchPolicy("principal")


@dataclass(frozen=True, eq=False)
class Potential:
    """Potential energy V evaluated with the |x|^beta convention.

    Forms: power_law (coefficient * |x|^beta), harmonic (same with beta = 2),
    soft_coulomb (-coefficient / sqrt(x^2 + softening^2)), sampled (explicit
    values on the grid).
    """

    form: str
    beta: float = 2.0
    coefficient: float = 1.0
    softening: float = 0.0
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.form not in ("power_law", "harmonic", "soft_coulomb", "sampled"):
            raise ValueError(f"unknown potential form {self.form!r}")
        if self.form in ("power_law", "harmonic") and not (
            math.isfinite(self.beta) and self.beta > 0
        ):
            raise ValueError(f"power-law exponent must be finite and > 0, got {self.beta}")
        if self.form == "soft_coulomb" and not self.softening > 0:
            raise ValueError("soft_coulomb requires softening > 0")
        if self.form == "sampled":
            if self.samples is None:
                raise ValueError("sampled potential requires samples")
            object.__setattr__(self, "samples", _readonly(np.asarray(self.samples, float)))

    @classmethod
    def power_law(cls, beta: float, coefficient: float) -> "Potential":
        return cls(form="power_law", beta=beta, coefficient=coefficient)

    @classmethod
    def harmonic(cls, mass: float = 1.0, omega: float = 1.0) -> "Potential":
        return cls(form="harmonic", beta=2.0, coefficient=0.5 * mass * omega**2)

    @classmethod
    def soft_coulomb(cls, strength: float, softening: float) -> "Potential":
        return cls(form="soft_coulomb", coefficient=strength, softening=softening)

    @classmethod
    def sampled_values(cls, values) -> "Potential":
        return cls(form="sampled", samples=values)

    @classmethod
    def zero(cls) -> "Potential":
        return cls(form="power_law", beta=2.0, coefficient=0.0)

    @property
    def is_zero(self) -> bool:
        if self.form in ("power_law", "harmonic"):
            return self.coefficient == 0.0
        if self.form == "sampled":
            return bool(np.all(self.samples == 0.0))
        return False

    def values(self, grid: Grid) -> np.ndarray:
        x = grid.x
        if self.form in ("power_law", "harmonic"):
            return self.coefficient * np.abs(x) ** self.beta
        if self.form == "soft_coulomb":
            return -self.coefficient / np.sqrt(x**2 + self.softening**2)
        if len(self.samples) != grid.n_points:
            raise ValueError("sampled potential length does not match grid")
        return np.asarray(self.samples)

    def dv_dx(self, grid: Grid) -> np.ndarray:
        """dV/dx; for power laws the x = 0 point is assigned derivative 0
        (exact for beta > 1, principal-value choice for beta <= 1)."""
        x = grid.x
        if self.form in ("power_law", "harmonic"):
            with np.errstate(divide="ignore", invalid="ignore"):
                d = self.beta * self.coefficient * np.sign(x) * np.abs(x) ** (self.beta - 1)
            return np.where(x == 0.0, 0.0, d)
        if self.form == "soft_coulomb":
            return self.coefficient * x / (x**2 + self.softening**2) ** 1.5
        # sampled: spectral derivative of the periodic samples
        k = grid.momentum / grid.hbar
        return np.real(np.fft.ifft(1j * k * np.fft.fft(self.samples)))

    def x_dv_dx(self, grid: Grid) -> np.ndarray:
        """x * dV/dx, the virial source term; finite everywhere for beta > 0."""
        if self.form in ("power_law", "harmonic"):
            return self.beta * self.coefficient * np.abs(grid.x) ** self.beta
        return grid.x * self.dv_dx(grid)


@dataclass(frozen=True)
class HamiltonianSpec:
    """The pair (alpha, V) defining H = |p|^(2 alpha)/(2 m)^alpha + V(x)."""

    alpha: float
    mass: float
    potential: Potential
    branch: BranchPolicy = RIESZ
    constants: PhysicalConstants = field(default_factory=natural_constants)

    def __post_init__(self):
        object.__setattr__(self, "alpha", _as_alpha(self.alpha))
        if not (math.isfinite(self.mass) and self.mass > 0):
            raise ValueError(f"mass must be finite and > 0, got {self.mass}")

    @classmethod
    def natural(cls, alpha, potential: Potential, mass: float = 1.0, branch=RIESZ):
        return cls(alpha=alpha, mass=mass, potential=potential, branch=branch)

    def dispersion(self, p: np.ndarray) -> np.ndarray:
        """Kinetic energy E(p) = |p|^(2 alpha) / (2 m)^alpha."""
        return np.abs(p) ** (2 * self.alpha) / (2 * self.mass) ** self.alpha


def apply_p_power(
    psi: PositionWavefunction,
    alpha,
    branch: BranchPolicy = RIESZ,
    leakage_tol: Optional[float] = None,
) -> PositionWavefunction:
    """Apply the momentum-power operator as a Fourier multiplier.

    A plane wave with lattice momentum p0 > 0 maps to p0^alpha times itself
    for either branch. With `leakage_tol` set, states that neither decay at
    the boundary nor are lattice plane waves are rejected.
    """
    a = _as_alpha(alpha)
    if leakage_tol is not None:
        check_boundary_leakage(psi, leakage_tol)
    phi = forward_transform(psi)
    mult = branch.multiplier(phi.grid.momentum, a)
    out = MomentumWavefunction(grid=phi.grid, samples=mult * phi.samples, time=phi.time)
    return inverse_transform(out)


def apply_x_power_momentum(phi: MomentumWavefunction, alpha) -> MomentumWavefunction:
    """Dual construction: multiply by |x|^alpha in position space."""
    a = _as_alpha(alpha)
    psi = inverse_transform(phi)
    scaled = PositionWavefunction(
        grid=psi.grid,
        samples=np.abs(psi.grid.x) ** a * psi.samples,
        time=psi.time,
    )
    return forward_transform(scaled)


def apply_function_of_p_power(
    psi: PositionWavefunction,
    alpha,
    poly_coeffs: Sequence[float],
    branch: BranchPolicy = RIESZ,
) -> PositionWavefunction:
    """Apply sum_n C_n (p^alpha)^n with coefficients C_0..C_N in one pass."""
    a = _as_alpha(alpha)
    coeffs = np.asarray(poly_coeffs, dtype=np.complex128)
    if coeffs.size == 0:
        raise ValueError("empty coefficient list")
    phi = forward_transform(psi)
    base = branch.multiplier(phi.grid.momentum, a)
    mult = np.polynomial.polynomial.polyval(base, coeffs)
    out = MomentumWavefunction(grid=phi.grid, samples=mult * phi.samples, time=phi.time)
    return inverse_transform(out)


def kinetic_apply(
    psi: PositionWavefunction, spec: HamiltonianSpec, leakage_tol: Optional[float] = None
) -> PositionWavefunction:
    """Apply T = |p|^(2 alpha)/(2 m)^alpha directly as one multiplier pass."""
    if leakage_tol is not None:
        check_boundary_leakage(psi, leakage_tol)
    phi = forward_transform(psi)
    mult = spec.dispersion(phi.grid.momentum)
    out = MomentumWavefunction(grid=phi.grid, samples=mult * phi.samples, time=phi.time)
    return inverse_transform(out)


def hamiltonian_apply(psi: PositionWavefunction, spec: HamiltonianSpec) -> PositionWavefunction:
    """Apply H = T + V pointwise."""
    v = spec.potential.values(psi.grid)
    if not np.all(np.isfinite(v)):
        raise ValueError("potential is not finite on the grid")
    kinetic = kinetic_apply(psi, spec)
    return PositionWavefunction(
        grid=psi.grid, samples=kinetic.samples + v * psi.samples, time=psi.time
    )


def hermiticity_residual(
    op: StateMap, phi: PositionWavefunction, psi: PositionWavefunction
) -> float:
    """|<phi, O psi> - <O phi, psi>| / (||phi|| ||O psi|| + eps)."""
    if not phi.grid.same_as(psi.grid):
        raise ValueError("grid mismatch")
    op_psi = op(psi)
    op_phi = op(phi)
    lhs = inner_x(phi, op_psi)
    rhs = inner_x(op_phi, psi)
    return abs(lhs - rhs) / (phi.norm() * op_psi.norm() + 1e-30)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Basis representation O_ij = <psi_i, O psi_j> of an operator."""

    entries: np.ndarray = field(repr=False)
    basis_label: str
    hermitian_flag: bool

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"operator matrix must be square, got {entries.shape}")
        object.__setattr__(self, "entries", _readonly(entries))
        if self.hermitian_flag:
            scale = float(np.abs(entries).max()) or 1.0
            defect = float(np.abs(entries - entries.conj().T).max())
            if defect >= 1e-10 * scale:
                raise ValueError(
                    f"hermitian_flag set but defect {defect:.3e} exceeds 1e-10 * {scale:.3e}"
                )

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_entries(cls, entries, basis_label: str) -> "OperatorMatrix":
        entries = np.asarray(entries, dtype=np.complex128)
        scale = float(np.abs(entries).max()) or 1.0
        hermitian = float(np.abs(entries - entries.conj().T).max()) < 1e-10 * scale
        return cls(entries=entries, basis_label=basis_label, hermitian_flag=hermitian)


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Expansion coefficients a_i of a state in a labelled basis."""

    entries: np.ndarray = field(repr=False)
    basis_label: str

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.complex128)
        if entries.ndim != 1:
            raise ValueError("coefficient vector must be one-dimensional")
        object.__setattr__(self, "entries", _readonly(entries))

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries))


def basis_array(basis: Sequence[PositionWavefunction]) -> np.ndarray:
    """Stack basis states into a (size, n_points) array after grid checks."""
    if len(basis) == 0:
        raise ValueError("empty basis")
    g = basis[0].grid
    for b in basis[1:]:
        if not b.grid.same_as(g):
            raise ValueError("basis states live on different grids")
    return np.stack([b.samples for b in basis])


def matrix_representation(
    op: StateMap,
    basis: Sequence[PositionWavefunction],
    basis_label: str = "basis",
    orthonormal_tol: float = 1e-8,
) -> OperatorMatrix:
    """Build O_ij = <psi_i, O psi_j> over an orthonormal basis.

    The basis Gram matrix is checked against the identity at `orthonormal_tol`
    before any operator application.
    """
    b = basis_array(basis)
    dx = basis[0].grid.dx
    gram = b.conj() @ b.T * dx
    defect = float(np.abs(gram - np.eye(len(basis))).max())
    if defect > orthonormal_tol:
        raise ValueError(f"basis is not orthonormal (defect {defect:.3e})")
    columns = np.stack([op(state).samples for state in basis])
    entries = b.conj() @ columns.T * dx
    return OperatorMatrix.from_entries(entries, basis_label)


def apply_matrix(matrix: OperatorMatrix, vector: CoefficientVector) -> CoefficientVector:
    """b_i = sum_j O_ij a_j."""
    if matrix.basis_label != vector.basis_label:
        raise ValueError(
            f"basis mismatch: {matrix.basis_label!r} vs {vector.basis_label!r}"
        )
    if matrix.dimension != vector.dimension:
        raise ValueError("dimension mismatch")
    return CoefficientVector(
        entries=matrix.entries @ vector.entries, basis_label=vector.basis_label
    )


def orthonormalize(states: Sequence[PositionWavefunction]) -> list[PositionWavefunction]:
    """Modified Gram-Schmidt (two passes) on grid states."""
    b = basis_array(states)
    dx = states[0].grid.dx
    out = []
    for i in range(b.shape[0]):
        v = b[i].copy()
        for _ in range(2):
            for u in out:
                v -= (np.vdot(u, v) * dx) * u
        n = math.sqrt(float(np.sum(np.abs(v) ** 2)) * dx)
        if n < 1e-12:
            raise ValueError(f"state {i} is linearly dependent on its predecessors")
        out.append(v / n)
    g = states[0].grid
    return [
        PositionWavefunction(grid=g, samples=v, time=states[i].time)
        for i, v in enumerate(out)
    ]

"""Stationary states via the secular equation, and virial-theorem checks.

The secular problem det(O - lambda I) = 0 is solved by dense Hermitian
eigendecomposition; the determinant form survives as a verification step at
small dimension, where evaluating the characteristic polynomial is
numerically sane.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import PropagatorConfig, evolve_split_step, standard_observables
from .grid import Grid, PositionWavefunction, inner_x
from .operators import (
    CoefficientVector,
    HamiltonianSpec,
    OperatorMatrix,
    basis_array,
    hamiltonian_apply,
    kinetic_apply,
    matrix_representation,
)


@dataclass(frozen=True, eq=False)
class EigenPair:
    """One stationary solution: energy, basis coefficients, residual norm."""

    lam: float
    coefficients: CoefficientVector
    residual_norm: float


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    """Sorted low-energy eigenpairs plus the grid-space eigenfunctions."""

    spec: HamiltonianSpec
    basis_label: str
    eigenpairs: list[EigenPair]
    basis_size: int
    grid_meta: dict
    states: list[PositionWavefunction] = field(default_factory=list)

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.lam for p in self.eigenpairs])

    def write_csv(self, path, precision: int = 12):
        fmt = f"%.{precision}g"
        with open(path, "w") as f:
            f.write("index,energy,residual\n")
            for i, pair in enumerate(self.eigenpairs):
                f.write(f"{i},{fmt % pair.lam},{fmt % pair.residual_norm}\n")

    def to_json_dict(self) -> dict:
        return {
            "basis_label": self.basis_label,
            "basis_size": self.basis_size,
            "grid": self.grid_meta,
            "energies": [p.lam for p in self.eigenpairs],
            "residuals": [p.residual_norm for p in self.eigenpairs],
        }

    def write_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)
            f.write("\n")


@dataclass(frozen=True)
class VirialReport:
    """Stationary-state virial balance 2 alpha <T> vs <x dV/dx>."""

    lhs: float
    rhs: float
    relative_residual: float
    state_label: str = ""

    @staticmethod
    def build(lhs: float, rhs: float, state_label: str = "") -> "VirialReport":
        denom = max(abs(lhs), abs(rhs), 1e-300)
        return VirialReport(
            lhs=lhs, rhs=rhs, relative_residual=abs(lhs - rhs) / denom, state_label=state_label
        )

    def to_json_dict(self) -> dict:
        return {
            "state_label": self.state_label,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relative_residual": self.relative_residual,
        }


def fourier_basis(grid: Grid, size: int, label: Optional[str] = None) -> list[PositionWavefunction]:
    """The `size` lowest-|p| plane waves, exactly orthonormal on the lattice.

    Ordered k = 0, +1, -1, +2, -2, ... so truncation keeps a symmetric
    momentum window.
    """
    if size < 1 or size > grid.n_points:
        raise ValueError(f"basis size must be in [1, {grid.n_points}], got {size}")
    order = [0]
    k = 1
    while len(order) < size:
        order.append(k)
        if len(order) < size:
            order.append(-k)
        k += 1
    c = 1.0 / math.sqrt(grid.length)
    states = []
    for k in order[:size]:
        p = 2 * math.pi * grid.hbar * k / grid.length
        states.append(
            PositionWavefunction(grid=grid, samples=c * np.exp(1j * p * grid.x / grid.hbar))
        )
    return states


def oscillator_basis(
    grid: Grid, size: int, mass: float = 1.0, omega: float = 1.0
) -> list[PositionWavefunction]:
    """Harmonic-oscillator eigenfunctions by the stable Hermite recurrence,
    grid-normalized. Useful for confining potentials."""
    if size < 1:
        raise ValueError("basis size must be >= 1")
    xi = grid.x * math.sqrt(mass * omega / grid.hbar)
    h_prev = np.pi**-0.25 * np.exp(-(xi**2) / 2)
    states = [h_prev]
    if size > 1:
        h_curr = math.sqrt(2.0) * xi * h_prev
        states.append(h_curr)
        for n in range(2, size):
            h_next = math.sqrt(2.0 / n) * xi * h_curr - math.sqrt((n - 1) / n) * h_prev
            states.append(h_next)
            h_prev, h_curr = h_curr, h_next
    out = []
    for samples in states:
        nrm = math.sqrt(float(np.sum(np.abs(samples) ** 2)) * grid.dx)
        out.append(PositionWavefunction(grid=grid, samples=samples / nrm))
    return out


def characteristic_determinant(o: OperatorMatrix, lam: float) -> float:
    """det(O - lambda I); sensible only at small dimension."""
    return abs(
        complex(np.linalg.det(o.entries - lam * np.eye(o.dimension, dtype=np.complex128)))
    )


def _determinant_threshold(dimension: int, scale: float) -> float:
    # LU rounding near a root grows with the polynomial scale (2*scale)^dim
    return dimension**2 * 1e-12 * (2 * max(scale, 1.0)) ** dimension


def solve_secular(
    o: OperatorMatrix, dimension_cap: int = 2048, verify_determinant: bool = True
) -> list[EigenPair]:
    """Full spectrum of a Hermitian operator matrix, eigenvalues ascending.

    Eigenvalues are real by construction. For dimension <= 12 each eigenvalue
    is verified against the characteristic determinant. Degenerate clusters
    are re-orthonormalized and ordered by the index of the dominant basis
    coefficient so output is deterministic.
    """
    if not o.hermitian_flag:
        raise ValueError("secular solve requires a Hermitian operator matrix")
    if o.dimension > dimension_cap:
        raise ValueError(f"dimension {o.dimension} exceeds cap {dimension_cap}")
    lam, vec = np.linalg.eigh(o.entries)
    scale = float(np.abs(lam).max()) if lam.size else 0.0

    # deterministic handling of (near-)degenerate clusters
    tol = 1e-10 * max(scale, 1.0)
    start = 0
    while start < len(lam):
        stop = start + 1
        while stop < len(lam) and lam[stop] - lam[stop - 1] <= tol:
            stop += 1
        if stop - start > 1:
            block = vec[:, start:stop]
            q, _ = np.linalg.qr(block)
            dominant = np.argmax(np.abs(q), axis=0)
            order = np.argsort(dominant, kind="stable")
            vec[:, start:stop] = q[:, order]
        start = stop

    if verify_determinant and o.dimension <= 12:
        threshold = _determinant_threshold(o.dimension, scale)
        for value in lam:
            det = characteristic_determinant(o, float(value))
            if det > threshold:
                raise ValueError(
                    f"determinant check failed at lambda={value}: |det|={det:.3e} "
                    f"> {threshold:.3e}"
                )

    pairs = []
    for i in range(o.dimension):
        v = vec[:, i]
        residual = float(np.linalg.norm(o.entries @ v - lam[i] * v))
        pairs.append(
            EigenPair(
                lam=float(lam[i]),
                coefficients=CoefficientVector(entries=v, basis_label=o.basis_label),
                residual_norm=residual,
            )
        )
    return pairs


def synthesize(
    coefficients: CoefficientVector, basis: Sequence[PositionWavefunction]
) -> PositionWavefunction:
    """Rebuild the grid wavefunction sum_i c_i psi_i from basis coefficients."""
    b = basis_array(basis)
    if len(basis) != coefficients.dimension:
        raise ValueError("coefficient/basis size mismatch")
    samples = coefficients.entries @ b
    return PositionWavefunction(grid=basis[0].grid, samples=samples)


def stationary_states(
    spec: HamiltonianSpec,
    basis: Sequence[PositionWavefunction],
    k: int,
    residual_tol: float = 1e-6,
    basis_label: str = "fourier",
) -> SpectrumResult:
    """Lowest-k stationary states of H in the given orthonormal basis.

    Every kept state is re-checked on the grid: ||H psi - E psi||/||psi||
    must fall below `residual_tol`, otherwise the basis is reported as
    insufficient, naming the worst state.
    """
    if k < 1 or k > len(basis):
        raise ValueError(f"k must be in [1, {len(basis)}], got {k}")
    h_matrix = matrix_representation(
        lambda s: hamiltonian_apply(s, spec), basis, basis_label=basis_label
    )
    pairs = solve_secular(h_matrix)[:k]

    states = []
    checked = []
    worst = (-1, 0.0)
    for i, pair in enumerate(pairs):
        psi = synthesize(pair.coefficients, basis)
        h_psi = hamiltonian_apply(psi, spec)
        diff = h_psi.samples - pair.lam * psi.samples
        residual = math.sqrt(float(np.sum(np.abs(diff) ** 2)) * psi.grid.dx) / psi.norm()
        if residual > worst[1]:
            worst = (i, residual)
        checked.append(
            EigenPair(lam=pair.lam, coefficients=pair.coefficients, residual_norm=residual)
        )
        states.append(psi)
    if worst[1] > residual_tol:
        raise ValueError(
            f"basis insufficient: state {worst[0]} has grid residual {worst[1]:.3e} "
            f"> {residual_tol:.3e}"
        )

    grid = basis[0].grid
    return SpectrumResult(
        spec=spec,
        basis_label=basis_label,
        eigenpairs=checked,
        basis_size=len(basis),
        grid_meta={"n_points": grid.n_points, "x_min": grid.x_min, "x_max": grid.x_max},
        states=states,
    )


def virial_check(
    psi: PositionWavefunction,
    spec: HamiltonianSpec,
    state_label: str = "",
    residual_tol: float = 1e-6,
) -> VirialReport:
    """Check 2 alpha <T> = <x dV/dx> on a converged stationary state.

    Convergence is verified from the state itself via the Rayleigh quotient:
    ||H psi - <H> psi|| / ||psi|| must be below `residual_tol`.
    """
    h_psi = hamiltonian_apply(psi, spec)
    nrm2 = float(np.sum(np.abs(psi.samples) ** 2)) * psi.grid.dx
    energy = inner_x(psi, h_psi).real / nrm2
    diff = h_psi.samples - energy * psi.samples
    residual = math.sqrt(float(np.sum(np.abs(diff) ** 2)) * psi.grid.dx / nrm2)
    if residual > residual_tol:
        raise ValueError(
            f"virial_check requires a converged eigenstate; residual {residual:.3e} "
            f"> {residual_tol:.3e}"
        )
    t_psi = kinetic_apply(psi, spec)
    kinetic = inner_x(psi, t_psi).real / nrm2
    lhs = 2 * spec.alpha * kinetic
    source = spec.potential.x_dv_dx(psi.grid)
    rhs = float(np.sum(np.abs(psi.samples) ** 2 * source) * psi.grid.dx) / nrm2
    return VirialReport.build(lhs=lhs, rhs=rhs, state_label=state_label)


@dataclass(frozen=True, eq=False)
class VirialDynamicResult:
    """Time-dependent virial balance d<xp>/dt vs 2 alpha <T> - <x dV/dx>."""

    times: np.ndarray
    dxp_dt: np.ndarray
    rhs: np.ndarray

    @property
    def max_abs_difference(self) -> float:
        return float(np.abs(self.dxp_dt - self.rhs).max())


def virial_dynamic(
    psi0: PositionWavefunction, spec: HamiltonianSpec, cfg: PropagatorConfig
) -> VirialDynamicResult:
    """Sample both sides of the time-dependent virial balance along a
    split-step trajectory; <xp> uses the symmetrized (Hermitian) product and
    its derivative is taken by centered differences at interior steps."""
    obs = standard_observables(spec, ["xp_sym", "kinetic", "xvp"])
    _, record = evolve_split_step(psi0, spec, cfg, observables=obs)
    xp = record.observables["xp_sym"]
    kin = record.observables["kinetic"]
    xvp = record.observables["xvp"]
    dt = record.times[1] - record.times[0]
    dxp_dt = (xp[2:] - xp[:-2]) / (2 * dt)
    rhs = 2 * spec.alpha * kin[1:-1] - xvp[1:-1]
    return VirialDynamicResult(times=record.times[1:-1], dxp_dt=dxp_dt, rhs=rhs)

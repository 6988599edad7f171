"""Plane waves, exact free evolution, split-step propagation, and the
matrix-side Heisenberg machinery.

Split-step propagation uses symmetric (Strang) splitting
exp(-i V dt/2 hbar) exp(-i T dt/hbar) exp(-i V dt/2 hbar); the kinetic half
is exact in momentum space for any dispersion exponent, so the whole scheme
is exactly unitary and its error comes only from the T/V noncommutativity.

Matrix exponentials go through Hermitian eigendecomposition so unitarity
holds to machine precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .grid import (
    Grid,
    PositionWavefunction,
    MomentumWavefunction,
    forward_transform,
    inverse_transform,
    check_boundary_leakage,
    inner_x,
    normalize,
)
from .operators import (
    CoefficientVector,
    HamiltonianSpec,
    OperatorMatrix,
    PRINCIPAL,
    apply_p_power,
)

Observable = Callable[[PositionWavefunction], float]


def plane_wave(grid: Grid, p: float, spec: HamiltonianSpec, t: float = 0.0) -> PositionWavefunction:
    """Box-normalized plane wave C exp(i(p x - E t)/hbar), C = 1/sqrt(L).

    E follows the dispersion E = |p|^(2 alpha)/(2 m)^alpha; p must be a
    lattice momentum so the state is periodic on the grid.
    """
    p_lattice = grid.momentum
    idx = int(np.argmin(np.abs(p_lattice - p)))
    p0 = float(p_lattice[idx])
    if abs(p0 - p) > 1e-9 * max(abs(p), grid.dp):
        raise ValueError(f"momentum {p} is not on the lattice (nearest {p0})")
    energy = float(spec.dispersion(np.array([p0]))[0])
    c = 1.0 / math.sqrt(grid.length)
    phase = (p0 * grid.x - energy * t) / grid.hbar
    return PositionWavefunction(grid=grid, samples=c * np.exp(1j * phase), time=t)


def gaussian_packet(
    grid: Grid, x0: float = 0.0, p0: float = 0.0, sigma: float = 1.0, t: float = 0.0
) -> PositionWavefunction:
    """Grid-normalized Gaussian exp(-(x-x0)^2/(4 sigma^2) + i p0 x/hbar)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = grid.x
    envelope = np.exp(-((x - x0) ** 2) / (4 * sigma**2))
    carrier = np.exp(1j * p0 * x / grid.hbar)
    raw = PositionWavefunction(grid=grid, samples=envelope * carrier, time=t)
    return normalize(raw)


def free_evolve_exact(
    phi: MomentumWavefunction, spec: HamiltonianSpec, t: float
) -> MomentumWavefunction:
    """Exact free evolution phi(p, t0+t) = phi(p, t0) exp(-i E(p) t / hbar)."""
    if not spec.potential.is_zero:
        raise ValueError("free evolution requires a zero potential")
    energy = spec.dispersion(phi.grid.momentum)
    phase = np.exp(-1j * energy * t / phi.grid.hbar)
    return MomentumWavefunction(grid=phi.grid, samples=phase * phi.samples, time=phi.time + t)


@dataclass(frozen=True)
class PropagatorConfig:
    dt: float
    n_steps: int
    splitting: str = "strang"
    record_every: int = 1
    leakage_tol: Optional[float] = 1e-8

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.splitting != "strang":
            raise ValueError(f"unsupported splitting {self.splitting!r}")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


@dataclass(frozen=True, eq=False)
class EvolutionRecord:
    """Per-step time series: norm plus the requested observables."""

    times: np.ndarray
    norms: np.ndarray
    observables: Dict[str, np.ndarray] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "times": self.times.tolist(),
            "norm": self.norms.tolist(),
            "observables": {k: v.tolist() for k, v in self.observables.items()},
        }

    def write_json(self, path):
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)
            f.write("\n")

    def write_csv(self, path, precision: int = 12):
        names = list(self.observables)
        fmt = f"%.{precision}g"
        with open(path, "w") as f:
            f.write(",".join(["step", "time", "norm"] + names) + "\n")
            for i in range(len(self.times)):
                row = [str(i), fmt % self.times[i], fmt % self.norms[i]]
                row += [fmt % self.observables[name][i] for name in names]
                f.write(",".join(row) + "\n")


def standard_observables(spec: HamiltonianSpec, names: Sequence[str]) -> Dict[str, Observable]:
    """Named expectation values usable as split-step per-step observables.

    Available: x, x2, p, p2, kinetic, potential, energy, xp_sym, xvp.
    xp_sym is the symmetrized Re<psi| x p |psi>; xvp is <x dV/dx>.
    """

    def density_moment(power):
        def f(psi):
            d = np.abs(psi.samples) ** 2
            return float(np.sum(d * psi.grid.x**power) * psi.grid.dx)

        return f

    def momentum_moment(power):
        def f(psi):
            phi = forward_transform(psi)
            d = np.abs(phi.samples) ** 2
            return float(np.sum(d * phi.grid.momentum**power) * phi.grid.dp)

        return f

    def kinetic(psi):
        phi = forward_transform(psi)
        d = np.abs(phi.samples) ** 2
        return float(np.sum(d * spec.dispersion(phi.grid.momentum)) * phi.grid.dp)

    def potential_energy(psi):
        v = spec.potential.values(psi.grid)
        d = np.abs(psi.samples) ** 2
        return float(np.sum(d * v) * psi.grid.dx)

    def xp_sym(psi):
        p_psi = apply_p_power(psi, 1.0, branch=PRINCIPAL)
        val = np.sum(np.conj(psi.samples) * psi.grid.x * p_psi.samples) * psi.grid.dx
        return float(val.real)

    def xvp(psi):
        s = spec.potential.x_dv_dx(psi.grid)
        d = np.abs(psi.samples) ** 2
        return float(np.sum(d * s) * psi.grid.dx)

    table: Dict[str, Observable] = {
        "x": density_moment(1),
        "x2": density_moment(2),
        "p": momentum_moment(1),
        "p2": momentum_moment(2),
        "kinetic": kinetic,
        "potential": potential_energy,
        "energy": lambda psi: kinetic(psi) + potential_energy(psi),
        "xp_sym": xp_sym,
        "xvp": xvp,
    }
    unknown = [n for n in names if n not in table]
    if unknown:
        raise ValueError(f"unknown observables {unknown}; available {sorted(table)}")
    return {n: table[n] for n in names}


def evolve_split_step(
    psi: PositionWavefunction,
    spec: HamiltonianSpec,
    cfg: PropagatorConfig,
    observables: Optional[Dict[str, Observable]] = None,
):
    """Propagate under H = T + V with Strang splitting.

    Returns (final state, EvolutionRecord). The boundary-leakage diagnostic
    runs at the start and at every recorded step; exceeding it aborts with
    the failing step index.
    """
    g = psi.grid
    observables = observables or {}
    if cfg.leakage_tol is not None:
        check_boundary_leakage(psi, cfg.leakage_tol, step=0)

    v = spec.potential.values(g)
    if not np.all(np.isfinite(v)):
        raise ValueError("potential is not finite on the grid")
    half_v = np.exp(-1j * v * cfg.dt / (2 * g.hbar))
    kinetic_phase = np.exp(-1j * spec.dispersion(g.momentum) * cfg.dt / g.hbar)

    times = [psi.time]
    norms = [psi.norm()]
    series: Dict[str, list] = {name: [fn(psi)] for name, fn in observables.items()}

    samples = psi.samples.astype(np.complex128, copy=True)
    t = psi.time
    for step in range(1, cfg.n_steps + 1):
        samples *= half_v
        samples = np.fft.ifft(kinetic_phase * np.fft.fft(samples))
        samples *= half_v
        t += cfg.dt
        if step % cfg.record_every == 0 or step == cfg.n_steps:
            state = PositionWavefunction(grid=g, samples=samples, time=t)
            if cfg.leakage_tol is not None:
                check_boundary_leakage(state, cfg.leakage_tol, step=step)
            times.append(t)
            norms.append(state.norm())
            for name, fn in observables.items():
                series[name].append(fn(state))

    final = PositionWavefunction(grid=g, samples=samples, time=t)
    record = EvolutionRecord(
        times=np.array(times),
        norms=np.array(norms),
        observables={k: np.array(vals) for k, vals in series.items()},
    )
    return final, record


# ---------------------------------------------------------------------------
# matrix-side dynamics
# ---------------------------------------------------------------------------


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """[A, B] = AB - BA; anti-Hermiticity is verified for Hermitian inputs."""
    if a.basis_label != b.basis_label:
        raise ValueError(f"basis mismatch: {a.basis_label!r} vs {b.basis_label!r}")
    if a.dimension != b.dimension:
        raise ValueError("dimension mismatch")
    c = a.entries @ b.entries - b.entries @ a.entries
    if a.hermitian_flag and b.hermitian_flag:
        scale = float(np.abs(c).max()) or 1.0
        if float(np.abs(c + c.conj().T).max()) > 1e-10 * scale:
            raise ValueError("commutator of Hermitian inputs failed anti-Hermiticity check")
    return OperatorMatrix.from_entries(c, a.basis_label)


def time_translation(
    h: OperatorMatrix, t: float, t0: float = 0.0, hbar: float = 1.0
) -> OperatorMatrix:
    """U(t, t0) = exp(-i H (t - t0)/hbar) via Hermitian eigendecomposition."""
    if not h.hermitian_flag:
        raise ValueError("time translation requires a Hermitian generator")
    energies, vectors = np.linalg.eigh(h.entries)
    phases = np.exp(-1j * energies * (t - t0) / hbar)
    u = (vectors * phases) @ vectors.conj().T
    defect = float(np.abs(u.conj().T @ u - np.eye(h.dimension)).max())
    if defect > 1e-10:
        raise ValueError(f"propagator unitarity defect {defect:.3e}")
    return OperatorMatrix.from_entries(u, h.basis_label)


@dataclass(frozen=True, eq=False)
class HeisenbergOperator:
    """An operator conjugated into the moving picture at a given time."""

    matrix: OperatorMatrix
    time: float
    reference_time: float


def heisenberg_transform(
    o: OperatorMatrix, h: OperatorMatrix, t: float, t0: float = 0.0, hbar: float = 1.0
) -> HeisenbergOperator:
    """O^H(t) = U^dagger(t, t0) O U(t, t0); the spectrum is preserved."""
    u = time_translation(h, t, t0, hbar=hbar)
    transformed = u.entries.conj().T @ o.entries @ u.entries
    out = OperatorMatrix.from_entries(transformed, o.basis_label)
    if o.hermitian_flag:
        before = np.linalg.eigvalsh(o.entries)
        after = np.linalg.eigvalsh(out.entries)
        scale = max(float(np.abs(before).max()), 1.0)
        if float(np.abs(before - after).max()) > 1e-8 * scale:
            raise ValueError("unitary conjugation failed to preserve the spectrum")
    return HeisenbergOperator(matrix=out, time=t, reference_time=t0)


def coefficient_dynamics(
    a0: CoefficientVector, h: OperatorMatrix, t: float, hbar: float = 1.0
) -> CoefficientVector:
    """Solve i hbar da_j/dt = sum_i H_ji a_i as a(t) = U(t, 0) a0."""
    if h.dimension != a0.dimension:
        raise ValueError("dimension mismatch")
    u = time_translation(h, t, 0.0, hbar=hbar)
    out = CoefficientVector(entries=u.entries @ a0.entries, basis_label=a0.basis_label)
    if abs(out.norm() - a0.norm()) > 1e-10 * max(a0.norm(), 1e-30):
        raise ValueError("coefficient norm not conserved")
    return out


def _expectation(o: OperatorMatrix, a: CoefficientVector) -> complex:
    return complex(a.entries.conj() @ (o.entries @ a.entries))


def eom_residual(
    o: OperatorMatrix,
    h: OperatorMatrix,
    psi0: CoefficientVector,
    t: float,
    dt: float,
    hbar: float = 1.0,
) -> float:
    """|d<O>/dt - <[O, H]>/(i hbar)| with a centered-difference derivative.

    The coefficient evolution itself is exact, so the residual is the O(dt^2)
    truncation error of the centered difference.
    """
    if not h.hermitian_flag:
        raise ValueError("equation of motion requires a Hermitian Hamiltonian")
    if o.dimension != h.dimension or o.dimension != psi0.dimension:
        raise ValueError("dimension mismatch")
    a_plus = coefficient_dynamics(psi0, h, t + dt, hbar=hbar)
    a_minus = coefficient_dynamics(psi0, h, t - dt, hbar=hbar)
    a_t = coefficient_dynamics(psi0, h, t, hbar=hbar)
    lhs = (_expectation(o, a_plus) - _expectation(o, a_minus)) / (2 * dt)
    rhs = _expectation(commutator(o, h), a_t) / (1j * hbar)
    return abs(lhs - rhs)


def picture_equivalence_residual(
    o: OperatorMatrix,
    h: OperatorMatrix,
    psi0: CoefficientVector,
    t: float,
    hbar: float = 1.0,
) -> float:
    """|<psi(t)|O|psi(t)> - <psi(0)|O^H(t)|psi(0)>|."""
    moving = coefficient_dynamics(psi0, h, t, hbar=hbar)
    fixed_side = _expectation(heisenberg_transform(o, h, t, hbar=hbar).matrix, psi0)
    moving_side = _expectation(o, moving)
    return abs(moving_side - fixed_side)


def plane_wave_eq_residual(
    grid: Grid, p: float, spec: HamiltonianSpec, t: float = 0.0, dt: float = 3e-5
) -> float:
    """||i hbar d psi/dt - T psi|| / ||psi|| for a plane wave, with the time
    derivative taken by centered differences; O(dt^2) check of the free
    wave equation."""
    from .operators import kinetic_apply

    psi = plane_wave(grid, p, spec, t)
    psi_plus = plane_wave(grid, p, spec, t + dt)
    psi_minus = plane_wave(grid, p, spec, t - dt)
    dpsi_dt = (psi_plus.samples - psi_minus.samples) / (2 * dt)
    lhs = 1j * grid.hbar * dpsi_dt
    rhs = kinetic_apply(psi, spec).samples
    num = math.sqrt(float(np.sum(np.abs(lhs - rhs) ** 2)) * grid.dx)
    return num / psi.norm()

import math

import numpy as np
import pytest

from fracqm import (
    HamiltonianSpec,
    OperatorMatrix,
    Potential,
    PropagatorConfig,
    gaussian_packet,
    make_grid,
    solve_secular,
    stationary_states,
    virial_check,
    virial_dynamic,
)
from fracqm.spectral import (
    characteristic_determinant,
    fourier_basis,
    oscillator_basis,
    synthesize,
)

from conftest import random_states


def random_hermitian_matrix(dim, rng):
    raw = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return OperatorMatrix.from_entries((raw + raw.conj().T) / 2, "b")


def determinant_roots_by_bisection(matrix: OperatorMatrix, tol=1e-12):
    """Independent oracle: locate the real roots of det(O - lambda I) by a
    sign-change scan inside the Gershgorin bound followed by bisection."""
    entries = matrix.entries
    dim = matrix.dimension
    radius = max(
        abs(entries[i, i].real) + np.abs(np.delete(entries[i], i)).sum() for i in range(dim)
    )
    lo, hi = -radius - 1.0, radius + 1.0

    def det(lam):
        return np.linalg.det(entries - lam * np.eye(dim)).real

    scan = np.linspace(lo, hi, 8192)
    values = np.array([det(s) for s in scan])
    roots = []
    for i in range(len(scan) - 1):
        if values[i] == 0.0:
            roots.append(scan[i])
        elif values[i] * values[i + 1] < 0:
            a, b = scan[i], scan[i + 1]
            fa = values[i]
            while b - a > tol:
                m = 0.5 * (a + b)
                fm = det(m)
                if fa * fm <= 0:
                    b = m
                else:
                    a, fa = m, fm
            roots.append(0.5 * (a + b))
    return np.array(roots)


class TestSolveSecular:
    def test_diagonal_matrix(self):
        m = OperatorMatrix.from_entries(np.diag([3.0, -1.0, 2.0]), "b")
        pairs = solve_secular(m)
        assert [p.lam for p in pairs] == [-1.0, 2.0, 3.0]
        vectors = np.stack([p.coefficients.entries for p in pairs])
        assert np.abs(np.abs(vectors) - np.eye(3)[[1, 2, 0]]).max() < 1e-12

    def test_two_by_two_exchange(self):
        m = OperatorMatrix.from_entries(np.array([[0.0, 1.0], [1.0, 0.0]]), "b")
        pairs = solve_secular(m)
        assert abs(pairs[0].lam + 1.0) < 1e-14
        assert abs(pairs[1].lam - 1.0) < 1e-14

    def test_random_matrices_match_determinant_roots(self):
        rng = np.random.default_rng(60)
        for _ in range(5):
            m = random_hermitian_matrix(8, rng)
            pairs = solve_secular(m)
            solved = np.array([p.lam for p in pairs])
            roots = determinant_roots_by_bisection(m)
            assert len(roots) == 8
            assert np.abs(np.sort(roots) - solved).max() < 1e-8
            assert all(isinstance(p.lam, float) for p in pairs)

    def test_eigenvector_orthonormality(self):
        rng = np.random.default_rng(61)
        m = random_hermitian_matrix(12, rng)
        vectors = np.stack([p.coefficients.entries for p in solve_secular(m)])
        gram = vectors.conj() @ vectors.T
        assert np.abs(gram - np.eye(12)).max() < 1e-8

    def test_residual_norms_small(self):
        rng = np.random.default_rng(62)
        m = random_hermitian_matrix(10, rng)
        for pair in solve_secular(m):
            assert pair.residual_norm < 1e-8

    def test_degenerate_spectrum_deterministic(self):
        entries = np.diag([1.0, 1.0, 2.0])
        m = OperatorMatrix.from_entries(entries, "b")
        first = solve_secular(m)
        second = solve_secular(m)
        for a, b in zip(first, second):
            assert np.array_equal(a.coefficients.entries, b.coefficients.entries)
        vectors = np.stack([p.coefficients.entries for p in first])
        assert np.abs(vectors.conj() @ vectors.T - np.eye(3)).max() < 1e-12

    def test_non_hermitian_rejected(self):
        m = OperatorMatrix.from_entries(np.array([[0.0, 1.0], [0.0, 0.0]]), "b")
        with pytest.raises(ValueError):
            solve_secular(m)

    def test_dimension_cap(self):
        m = OperatorMatrix.from_entries(np.eye(8), "b")
        with pytest.raises(ValueError):
            solve_secular(m, dimension_cap=4)

    def test_characteristic_determinant_vanishes_at_eigenvalues(self):
        rng = np.random.default_rng(63)
        m = random_hermitian_matrix(6, rng)
        for pair in solve_secular(m):
            # far from any eigenvalue the determinant is large by comparison
            assert characteristic_determinant(m, pair.lam) < 1e-6
        assert characteristic_determinant(m, 100.0) > 1.0


class TestStationaryStates:
    def test_harmonic_oscillator_spectrum(self):
        g = make_grid(1024, -15.0, 15.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        result = stationary_states(spec, fourier_basis(g, 128), 6)
        expected = np.arange(6) + 0.5
        assert np.abs(result.energies - expected).max() < 1e-6
        assert all(p.residual_norm < 1e-6 for p in result.eigenpairs)

    def test_energies_nondecreasing_and_states_orthonormal(self):
        g = make_grid(512, -15.0, 15.0)
        spec = HamiltonianSpec.natural(1.1783, Potential.harmonic())
        result = stationary_states(spec, fourier_basis(g, 96), 5)
        energies = result.energies
        assert np.all(np.diff(energies) >= 0)
        stack = np.stack([s.samples for s in result.states])
        gram = stack.conj() @ stack.T * g.dx
        assert np.abs(gram - np.eye(5)).max() < 1e-8

    def test_soft_coulomb_bound_state_trend(self):
        # ground level drops monotonically as the core softening shrinks
        g = make_grid(512, -40.0, 40.0)
        energies = []
        for softening in (1.0, 0.5, 0.25):
            spec = HamiltonianSpec.natural(1.0, Potential.soft_coulomb(1.0, softening))
            result = stationary_states(spec, fourier_basis(g, 512), 1)
            energies.append(result.energies[0])
        assert energies[0] < 0
        assert energies[0] > energies[1] > energies[2]

    def test_basis_doubling_converged(self):
        g = make_grid(1024, -15.0, 15.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        small = stationary_states(spec, fourier_basis(g, 64), 1).energies[0]
        large = stationary_states(spec, fourier_basis(g, 128), 1).energies[0]
        assert abs(small - large) < 1e-7

    def test_insufficient_basis_names_worst_state(self):
        g = make_grid(256, -15.0, 15.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        with pytest.raises(ValueError, match=r"state \d+"):
            stationary_states(spec, fourier_basis(g, 6), 4)

    def test_synthesize_roundtrip(self):
        g = make_grid(256, -15.0, 15.0)
        basis = fourier_basis(g, 16)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        result = stationary_states(spec, basis, 2, residual_tol=10.0)
        psi = synthesize(result.eigenpairs[0].coefficients, basis)
        assert abs(psi.norm() - 1.0) < 1e-10

    def test_serialization(self, tmp_path):
        g = make_grid(512, -15.0, 15.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        result = stationary_states(spec, fourier_basis(g, 64), 3)
        csv_path = tmp_path / "spectrum.csv"
        result.write_csv(csv_path)
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0] == "index,energy,residual"
        assert len(lines) == 4
        d = result.to_json_dict()
        assert len(d["energies"]) == 3 and d["basis_size"] == 64


class TestVirialCheck:
    def test_classical_limit_equalities(self):
        g = make_grid(1024, -15.0, 15.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        result = stationary_states(spec, fourier_basis(g, 128), 4)
        for i, psi in enumerate(result.states):
            report = virial_check(psi, spec, state_label=f"n={i}")
            assert report.relative_residual < 1e-6
            # for V = x^2/2 the right-hand side equals twice <V>
            v = spec.potential.values(g)
            two_v = 2 * float(np.sum(np.abs(psi.samples) ** 2 * v) * g.dx)
            assert abs(report.rhs - two_v) < 1e-10
            assert abs(report.lhs - two_v) < 1e-5

    def test_fractional_exponent_two_resolutions(self):
        for n, span, basis_size in ((1024, 80.0, 256), (2048, 160.0, 512)):
            g = make_grid(n, -span / 2, span / 2)
            spec = HamiltonianSpec.natural(1.1783, Potential.harmonic())
            result = stationary_states(spec, fourier_basis(g, basis_size), 2)
            for psi in result.states:
                assert virial_check(psi, spec).relative_residual < 1e-5

    def test_non_eigenstate_rejected(self):
        g = make_grid(256, -15.0, 15.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        psi = gaussian_packet(g, x0=2.0, sigma=0.7)
        with pytest.raises(ValueError, match="converged"):
            virial_check(psi, spec)


class TestVirialDynamic:
    def test_stationary_input_both_sides_vanish(self):
        g = make_grid(512, -15.0, 15.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        psi0 = stationary_states(spec, fourier_basis(g, 96), 1).states[0]
        cfg = PropagatorConfig(dt=1e-3, n_steps=100)
        out = virial_dynamic(psi0, spec, cfg)
        assert np.abs(out.dxp_dt).max() < 1e-6
        assert np.abs(out.rhs).max() < 1e-6

    def test_free_packet_rate_equals_kinetic_term(self):
        g = make_grid(512, -40.0, 40.0)
        spec = HamiltonianSpec.natural(1.0, Potential.zero())
        psi0 = gaussian_packet(g, sigma=2.0, p0=0.5)
        cfg = PropagatorConfig(dt=1e-3, n_steps=200)
        out = virial_dynamic(psi0, spec, cfg)
        # with V = 0 the balance reduces to d<xp>/dt = 2 alpha <T>
        assert np.abs(out.dxp_dt - out.rhs).max() < 1e-6

    def test_coherent_state_oscillation_consistency(self):
        g = make_grid(512, -20.0, 20.0)
        spec = HamiltonianSpec.natural(1.0, Potential.harmonic())
        psi0 = gaussian_packet(g, x0=2.0, sigma=1.0 / math.sqrt(2.0))
        coarse = virial_dynamic(psi0, spec, PropagatorConfig(dt=2e-3, n_steps=500))
        fine = virial_dynamic(psi0, spec, PropagatorConfig(dt=1e-3, n_steps=1000))
        # both sides oscillate; the balance tightens ~4x when dt halves
        assert np.abs(coarse.dxp_dt).max() > 0.1
        assert coarse.max_abs_difference < 1e-4
        assert fine.max_abs_difference < coarse.max_abs_difference / 3.0


class TestBases:
    def test_fourier_basis_orthonormal(self):
        g = make_grid(128, -10.0, 10.0)
        basis = fourier_basis(g, 32)
        stack = np.stack([b.samples for b in basis])
        gram = stack.conj() @ stack.T * g.dx
        assert np.abs(gram - np.eye(32)).max() < 1e-12

    def test_oscillator_basis_orthonormal_and_diagonalizing(self):
        g = make_grid(512, -12.0, 12.0)
        basis = oscillator_basis(g, 16)
        stack = np.stack([b.samples for b in basis])
        gram = stack.conj() @ stack.T * g.dx
        assert np.abs(gram - np.eye(16)).max() < 1e-10

    def test_fourier_basis_size_bounds(self):
        g = make_grid(64, -10.0, 10.0)
        with pytest.raises(ValueError):
            fourier_basis(g, 65)
        with pytest.raises(ValueError):
            fourier_basis(g, 0)

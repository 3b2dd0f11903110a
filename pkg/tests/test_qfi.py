"""Tests for the QFI engine: moment formula, fidelity, and their agreement."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stellar_qfi.gaussian import (
    GaussianState,
    beamsplitter,
    pure_loss,
    two_mode_squeeze,
    vacuum,
)
from stellar_qfi.qfi import (
    FisherMatrix,
    GaussianFamily,
    SingularFamilyError,
    fidelity_cov_deficit_mp,
    fidelity_cov_factor,
    gaussian_fidelity,
    gaussian_infidelity,
    qfi_fidelity_limit,
    qfi_matrix,
    vectorize_cov,
)
from stellar_qfi.strategies import StellarParams, di_qfi, stellar_cov, stellar_family


class TestFisherMatrix:
    def test_label_lookup(self):
        matrix = FisherMatrix(("phi", "gamma"), [[2.0, 0.0], [0.0, 3.0]])
        assert matrix["phi", "phi"] == 2.0
        assert matrix["gamma", "gamma"] == 3.0
        assert matrix["phi", "gamma"] == 0.0

    def test_rejects_asymmetry(self):
        with pytest.raises(ValueError, match="asymmetry"):
            FisherMatrix(("a", "b"), [[1.0, 0.5], [0.0, 1.0]])

    def test_rejects_negative_diagonal(self):
        with pytest.raises(ValueError, match="negative"):
            FisherMatrix(("a",), [[-1.0]])


class TestVectorizeCov:
    def test_identity(self):
        assert np.array_equal(vectorize_cov(np.eye(2)), [1.0, 0.0, 0.0, 1.0])

    def test_row_stack_equals_column_stack_for_symmetric(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(4, 4))
        sym = a + a.T
        assert np.array_equal(vectorize_cov(sym), sym.reshape(-1, order="C"))

    def test_stellar_cov_entries(self):
        vec = vectorize_cov(stellar_cov(1.0, 1.0, 0.0))
        assert vec[0] == 2.0  # (eps + 1) diagonal
        assert vec[2] == 1.0  # gamma * eps off-block
        assert vec.size == 16

    def test_rejects_odd_dimension(self):
        with pytest.raises(ValueError):
            vectorize_cov(np.eye(3))


class TestQfiMatrix:
    def test_stellar_closed_forms(self):
        epsilon, gamma = 0.7, 0.6
        family = stellar_family(epsilon)
        matrix = qfi_matrix(family, [0.9, gamma], labels=("phi", "gamma"))
        closed = di_qfi(StellarParams(epsilon, gamma), 1.0)
        assert abs(matrix["phi", "phi"] - closed.j_phi) < 1e-12
        assert abs(matrix["gamma", "gamma"] - closed.j_gamma) < 1e-12
        assert abs(matrix["phi", "gamma"]) < 1e-12

    def test_zero_coherence_kills_phase_information(self):
        family = stellar_family(0.5)
        matrix = qfi_matrix(family, [0.3, 0.0], labels=("phi", "gamma"))
        assert abs(matrix["phi", "phi"]) < 1e-12

    def test_unit_coherence_is_singular_for_moment_formula(self):
        # At gamma = 1 the state has a pure mode; the moment-formula matrix is
        # singular and the fidelity route takes over (tested below).
        family = stellar_family(0.3)
        with pytest.raises(SingularFamilyError):
            qfi_matrix(family, [0.0, 1.0], labels=("phi", "gamma"))

    def test_finite_difference_matches_analytic(self):
        epsilon = 0.8
        analytic_family = stellar_family(epsilon)
        fd_family = GaussianFamily(analytic_family.evaluator)
        theta = [0.7, 0.55]
        analytic = qfi_matrix(analytic_family, theta)
        numeric = qfi_matrix(fd_family, theta)
        assert np.max(np.abs(analytic.values - numeric.values)) < 1e-8

    def test_richardson_step_convergence(self):
        family = GaussianFamily(stellar_family(0.6).evaluator)
        theta = [0.4, 0.5]
        coarse = qfi_matrix(family, theta, step=2e-5).values
        fine = qfi_matrix(family, theta, step=1e-5).values
        exact = qfi_matrix(stellar_family(0.6), theta).values
        err_coarse = np.max(np.abs(coarse - exact))
        err_fine = np.max(np.abs(fine - exact))
        assert err_fine < 4 * max(err_coarse, 1e-13)

    def test_reparameterization_scaling(self):
        epsilon = 0.5
        base = stellar_family(epsilon)
        scale = 3.0

        def evaluate(theta):
            return base.evaluator(np.array([scale * theta[0], theta[1]]))

        scaled = GaussianFamily(evaluate)
        at_base = qfi_matrix(base, [0.6, 0.7])
        at_scaled = qfi_matrix(scaled, [0.6 / scale, 0.7])
        ratio = at_scaled.values[0, 0] / at_base.values[0, 0]
        assert abs(ratio - scale**2) < 1e-6

    def test_pure_state_raises_singularity_error(self):
        def evaluate(theta):
            return GaussianState([theta[0], 0.0], np.eye(2))

        with pytest.raises(SingularFamilyError):
            qfi_matrix(GaussianFamily(evaluate), [0.0])

    def test_displacement_family_mean_term(self):
        # Coherent-displacement QFI in this convention is 2 per unit mean shift.
        def evaluate(theta):
            return GaussianState([theta[0], 0.0], 2.0 * np.eye(2))

        matrix = qfi_matrix(GaussianFamily(evaluate), [0.3])
        assert abs(matrix.values[0, 0] - 1.0) < 1e-8


def thermal(epsilon):
    return GaussianState(np.zeros(2), (1.0 + epsilon) * np.eye(2))


class TestGaussianFidelity:
    def test_self_fidelity(self):
        assert gaussian_fidelity(thermal(0.4), thermal(0.4)) == pytest.approx(1.0, abs=1e-12)

    def test_coherent_state_overlap(self):
        # Displaced vacuum vs vacuum: F = exp(-|delta|^2 / 4) with vacuum cov 1.
        delta = np.array([0.6, -0.3])
        displaced = GaussianState(delta, np.eye(2))
        expected = math.exp(-float(delta @ delta) / 4.0)
        assert abs(gaussian_fidelity(vacuum(1), displaced) - expected) < 1e-12

    def test_thermal_vacuum_oracle(self):
        # One symplectic eigenvalue nu = 1 + eps: F^2 = 2 / (nu + 1).
        for epsilon in (0.2, 0.7, 1.5):
            expected = math.sqrt(2.0 / (2.0 + epsilon))
            assert abs(gaussian_fidelity(thermal(epsilon), vacuum(1)) - expected) < 1e-10

    def test_monotone_decrease_in_temperature(self):
        values = [gaussian_fidelity(thermal(e), vacuum(1)) for e in np.linspace(0.1, 2.0, 8)]
        assert all(a > b for a, b in zip(values, values[1:]))

    @given(e1=st.floats(0.05, 1.5), e2=st.floats(0.05, 1.5))
    @settings(max_examples=30, deadline=None)
    def test_symmetry(self, e1, e2):
        a, b = thermal(e1), thermal(e2)
        assert abs(gaussian_fidelity(a, b) - gaussian_fidelity(b, a)) < 1e-10

    def test_unitary_invariance_under_shared_beamsplitter(self):
        rng = np.random.default_rng(2)
        a = two_mode_squeeze(pure_loss(vacuum(2), 0, 0.7), 0, 1, 0.5)
        b = pure_loss(two_mode_squeeze(vacuum(2), 0, 1, 0.8), 1, 0.6)
        before = gaussian_fidelity(a, b)
        after = gaussian_fidelity(beamsplitter(a, 0, 1, 0.3), beamsplitter(b, 0, 1, 0.3))
        assert abs(before - after) < 1e-10

    def test_mode_count_mismatch(self):
        with pytest.raises(ValueError):
            gaussian_fidelity(vacuum(1), vacuum(2))

    def test_high_precision_deficit_matches_float_route(self):
        a, b = thermal(0.6), thermal(0.9)
        deficit = fidelity_cov_deficit_mp(a.cov, b.cov)
        assert abs(deficit - (1.0 - fidelity_cov_factor(a.cov, b.cov))) < 1e-12

    def test_infidelity_of_identical_states_is_zero(self):
        assert gaussian_infidelity(thermal(0.4), thermal(0.4)) < 1e-12


class TestFidelityLimit:
    def test_matches_stellar_closed_form_at_unit_coherence(self):
        family = stellar_family(0.3)
        estimate = qfi_fidelity_limit(family, [0.5, 1.0], 0)
        assert abs(estimate - 0.3) / 0.3 < 1e-4

    def test_constant_family_gives_zero(self):
        def evaluate(theta):
            return thermal(0.5)

        assert abs(qfi_fidelity_limit(GaussianFamily(evaluate), [0.0], 0)) < 1e-6

    def test_oracle_equivalence_over_random_parameters(self):
        rng = np.random.default_rng(4)
        worst = 0.0
        for _ in range(12):
            epsilon = float(rng.uniform(0.05, 2.0))
            gamma = float(rng.uniform(0.05, 0.95))
            phi = float(rng.uniform(0.0, 2 * math.pi))
            family = stellar_family(epsilon)
            matrix = qfi_matrix(family, [phi, gamma], labels=("phi", "gamma"))
            for j, label in enumerate(("phi", "gamma")):
                direct = matrix[label, label]
                # dtheta = 1e-3 keeps the quotient's round-off amplification
                # below the comparison tolerance at small QFI values.
                limit = qfi_fidelity_limit(family, [phi, gamma], j, dtheta=1e-3)
                worst = max(worst, abs(direct - limit) / max(abs(direct), 1e-12))
        assert worst < 5e-4

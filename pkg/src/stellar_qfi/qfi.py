"""Quantum Fisher information for parameterized Gaussian families.

Two independent routes are provided: the direct moment formula

    J_jk = 1/2 (d_j vec sigma)^T M^{-1} (d_k vec sigma)
           + 2 (d_j r)^T sigma^{-1} (d_k r),      M = sigma x sigma - Omega x Omega,

and the fidelity limit  J = 8 (1 - F(rho_t, rho_{t+dt})) / dt^2  built on the
Uhlmann fidelity of Gaussian states.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .gaussian import CONDITION_LIMIT, GaussianState, symplectic_form

DEFAULT_FD_STEP = 1e-5
FIDELITY_IMAG_TOL = 1e-9


class SingularFamilyError(ValueError):
    """M = sigma x sigma - Omega x Omega is numerically singular.

    This happens when the state has a pure mode (a symplectic eigenvalue
    equal to 1), e.g. the stellar family at epsilon = 0.  Use
    ``qfi_fidelity_limit`` in that regime; no silent regularization is done.
    """


@dataclass(frozen=True)
class FisherMatrix:
    """Symmetric Fisher-information matrix with named parameters."""

    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        k = len(self.labels)
        if values.shape != (k, k):
            raise ValueError(f"expected a {k}x{k} matrix, got shape {values.shape}")
        asym = np.max(np.abs(values - values.T)) if k else 0.0
        if asym > 1e-10:
            raise ValueError(f"Fisher matrix asymmetry {asym:.3e} exceeds 1e-10")
        if np.any(np.diag(values) < -1e-10):
            raise ValueError("Fisher matrix has a negative diagonal entry")
        values = 0.5 * (values + values.T)
        values.setflags(write=False)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "values", values)

    def __getitem__(self, pair):
        j, k = pair
        return float(self.values[self.labels.index(j), self.labels.index(k)])


@dataclass(frozen=True)
class GaussianFamily:
    """Map from a parameter vector to a Gaussian state.

    ``derivatives``, when given, returns for each parameter j the pair
    (d_j mean, d_j cov) at the supplied parameter vector; otherwise central
    finite differences are used.
    """

    evaluator: Callable[[np.ndarray], GaussianState]
    derivatives: Optional[Callable[[np.ndarray], Sequence[tuple]]] = None

    def state(self, theta):
        return self.evaluator(np.asarray(theta, dtype=float))


def vectorize_cov(cov):
    """Column-stack a covariance matrix into a length-4N^2 vector."""
    cov = np.asarray(cov)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {cov.shape}")
    if cov.shape[0] % 2 != 0:
        raise ValueError(f"expected even dimension, got {cov.shape[0]}")
    return cov.reshape(-1, order="F").copy()


def _finite_difference_derivatives(family, theta, step):
    derivs = []
    for j in range(theta.size):
        shift = np.zeros_like(theta)
        shift[j] = step
        hi = family.state(theta + shift)
        lo = family.state(theta - shift)
        derivs.append(((hi.mean - lo.mean) / (2 * step), (hi.cov - lo.cov) / (2 * step)))
    return derivs


def qfi_matrix(family, theta, step=DEFAULT_FD_STEP, labels=None):
    """QFI matrix of a Gaussian family via the moment formula."""
    theta = np.asarray(theta, dtype=float)
    state = family.state(theta)
    sigma = state.cov
    omega = symplectic_form(state.n_modes)

    m = np.kron(sigma, sigma) - np.kron(omega, omega)
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularFamilyError(
            f"M = sigma x sigma - Omega x Omega has condition number {cond:.3e}; "
            "the state has a (nearly) pure mode -- use qfi_fidelity_limit instead"
        )

    if family.derivatives is not None:
        derivs = family.derivatives(theta)
    else:
        derivs = _finite_difference_derivatives(family, theta, step)

    dsig = np.column_stack([vectorize_cov(dc) for _, dc in derivs])
    dmean = np.column_stack([np.asarray(dm, float) for dm, _ in derivs])
    cov_term = 0.5 * dsig.T @ np.linalg.solve(m, dsig)
    mean_term = 2.0 * dmean.T @ np.linalg.solve(sigma, dmean)
    values = cov_term + mean_term
    values = 0.5 * (values + values.T)
    if labels is None:
        labels = tuple(f"theta{j}" for j in range(theta.size))
    return FisherMatrix(tuple(labels), values)


def _sqrtm_via_eig(matrix):
    """Principal square root through a (complex) eigendecomposition."""
    w, p = np.linalg.eig(matrix)
    return p @ np.diag(np.sqrt(w.astype(complex))) @ np.linalg.inv(p)


def _assert_real(value, label):
    scale = max(1.0, abs(value))
    if abs(np.imag(value)) > FIDELITY_IMAG_TOL * scale:
        raise ArithmeticError(
            f"{label} has imaginary residue {np.imag(value):.3e}; "
            "inputs are too close to the physicality boundary"
        )
    return float(np.real(value))


def fidelity_cov_factor(cov_a, cov_b):
    """Mean-independent factor F0 of the Gaussian fidelity."""
    if cov_a.shape != cov_b.shape:
        raise ValueError("covariance matrices must have the same shape")
    n_quad = cov_a.shape[0]
    omega = symplectic_form(n_quad // 2)
    sigma_avg = 0.5 * (cov_a + cov_b)
    sigma_aux = omega.T @ np.linalg.solve(sigma_avg, omega / 4.0 + cov_b @ omega @ cov_a / 4.0)
    core = sigma_aux @ omega
    inv_core = np.linalg.inv(core.astype(complex))
    root = _sqrtm_via_eig(np.eye(n_quad) + inv_core @ inv_core / 4.0)
    total = 2.0 * (root + np.eye(n_quad)) @ sigma_aux
    f_tot4 = _assert_real(np.linalg.det(total), "det in the fidelity formula")
    f_tot4 = max(f_tot4, 0.0)
    return f_tot4**0.25 / np.linalg.det(sigma_avg) ** 0.25


def fidelity_cov_deficit_mp(cov_a, cov_b, dps=40):
    """1 - F0 in extended precision.

    Near-pure states leave ~1e-13 of absolute round-off in the float64 F0,
    which a fidelity-limit quotient amplifies by 8/dtheta^2.  Evaluating the
    deficit 1 - F0 in 40-digit arithmetic removes that noise floor entirely.
    """
    n_quad = cov_a.shape[0]
    with mpmath.workdps(dps):
        omega = mpmath.matrix(symplectic_form(n_quad // 2).tolist())
        sa = mpmath.matrix(np.asarray(cov_a).tolist())
        sb = mpmath.matrix(np.asarray(cov_b).tolist())
        avg = (sa + sb) / 2
        aux = omega.T * mpmath.inverse(avg) * (omega / 4 + sb * omega * sa / 4)
        core = aux * omega
        # det[2(sqrt(1 + (aux*omega)^-2 / 4) + 1) aux] through the eigenvalues
        # of aux*omega alone: determinants of matrix functions need no
        # eigenvectors, whose inversion loses precision near defective spectra.
        eigvals = mpmath.eig(core, left=False, right=False)
        # Eigenvalues of aux*omega come in +/- pairs sharing the same square,
        # so the principal branch would hand both members of a pair the same
        # complex factor; the correct pairing is conjugate, which the modulus
        # per factor realizes for pairs and conjugate quadruples alike.
        det_root = mpmath.mpf(1)
        for w in eigvals:
            det_root *= abs(mpmath.sqrt(1 + 1 / (4 * w**2)) + 1)
        f4 = det_root * (2**n_quad) * mpmath.det(aux) / mpmath.det(avg)
        if isinstance(f4, mpmath.mpc):
            if abs(f4.imag) > mpmath.mpf(FIDELITY_IMAG_TOL) * max(1, abs(f4.real)):
                raise ArithmeticError(
                    f"fidelity formula has imaginary residue {float(f4.imag):.3e}"
                )
            f4 = f4.real
        f0 = max(f4, mpmath.mpf(0)) ** mpmath.mpf("0.25")
        return float(1 - f0)


def gaussian_fidelity(a, b):
    """Uhlmann fidelity of two Gaussian states (vacuum-covariance-1 convention)."""
    return 1.0 - gaussian_infidelity(a, b)


def gaussian_infidelity(a, b):
    """1 - F, computed without cancellation in either factor.

    1 - F = (1 - F0) + F0 * (1 - exp(exponent)); the covariance deficit
    1 - F0 comes from the extended-precision route (float64 leaves ~1e-13
    absolute noise in F0, fatal when the infidelity itself is smaller) and
    the mean factor goes through expm1.
    """
    if a.n_modes != b.n_modes:
        raise ValueError("states must have the same number of modes")
    sigma_avg = 0.5 * (a.cov + b.cov)
    delta = a.mean - b.mean
    exponent = -0.25 * delta @ np.linalg.solve(sigma_avg, delta)
    deficit = fidelity_cov_deficit_mp(a.cov, b.cov)
    if deficit < -1e-12:
        raise ArithmeticError(f"fidelity factor exceeds 1 by {-deficit:.3e}")
    infid = deficit - (1.0 - deficit) * np.expm1(exponent)
    return float(np.clip(infid, 0.0, 1.0))


def qfi_fidelity_limit(family, theta, j, dtheta=1e-4):
    """Scalar QFI for parameter j from the fidelity limit.

    Truncation error is O(dtheta^2); this route works for pure states where
    the moment-formula matrix M is singular.
    """
    theta = np.asarray(theta, dtype=float)
    shift = np.zeros_like(theta)
    shift[j] = 0.5 * dtheta
    # Centering the pair at theta removes the O(dtheta) bias of the
    # one-sided quotient (which estimates J at theta + dtheta/2).
    infid = gaussian_infidelity(family.state(theta - shift), family.state(theta + shift))
    return 8.0 * infid / dtheta**2

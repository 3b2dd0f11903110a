"""Multimode Gaussian states and the channel/measurement toolbox.

Conventions, fixed once and asserted in constructors:

* quadrature ordering ``(q1, p1, q2, p2, ...)``,
* anticommutator covariance, so the vacuum covariance is the identity,
* zero-hbar units: means are dimensionless, vacuum variance is 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-12
PHYSICALITY_TOL = 1e-9
CONDITION_LIMIT = 1e12

PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]])
_OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])


class ConditioningError(ValueError):
    """A linear solve inside Gaussian conditioning is too ill-conditioned."""


def symplectic_form(n_modes):
    """Block-diagonal symplectic form for ``n_modes`` modes."""
    if n_modes < 1:
        raise ValueError(f"need at least one mode, got {n_modes}")
    return np.kron(np.eye(n_modes), _OMEGA_1)


@dataclass(frozen=True)
class SymplecticForm:
    n_modes: int
    matrix: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "matrix", symplectic_form(self.n_modes))


@dataclass(frozen=True)
class HomodyneOutcome:
    """Double-homodyne outcome vector m = (m_q, m_p)."""

    m_q: float
    m_p: float

    def __post_init__(self):
        if not (np.isfinite(self.m_q) and np.isfinite(self.m_p)):
            raise ValueError("homodyne outcome must be finite")

    @property
    def vector(self):
        return np.array([self.m_q, self.m_p])


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state given by its mean vector and covariance matrix.

    ``mean`` has length 2n and ``cov`` is 2n x 2n, both in the
    (q1, p1, ...) ordering with vacuum covariance equal to the identity.
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float).reshape(-1)
        cov = np.array(self.cov, dtype=float)
        if mean.size == 0 or mean.size % 2 != 0:
            raise ValueError(f"mean length must be a positive even number, got {mean.size}")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} does not match mean length {mean.size}")
        if not np.all(np.isfinite(mean)):
            raise ValueError("mean contains NaN or Inf")
        if not np.all(np.isfinite(cov)):
            raise ValueError("cov contains NaN or Inf")
        asym = np.max(np.abs(cov - cov.T))
        if asym > SYMMETRY_TOL:
            raise ValueError(f"cov asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}")
        cov = 0.5 * (cov + cov.T)
        omega = symplectic_form(mean.size // 2)
        min_eig = np.linalg.eigvalsh(cov + 1j * omega).min()
        if min_eig < -PHYSICALITY_TOL:
            raise ValueError(
                f"covariance violates the uncertainty relation: min eig of "
                f"cov + i*Omega is {min_eig:.3e}"
            )
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def n_modes(self):
        return self.mean.size // 2

    def to_text(self):
        """Full-precision debug serialization: mean then row-major cov."""
        parts = [str(self.n_modes)]
        parts += [float(x).hex() for x in self.mean]
        parts += [float(x).hex() for x in self.cov.reshape(-1)]
        return "\n".join(parts) + "\n"

    @classmethod
    def from_text(cls, text):
        tokens = text.split()
        n = int(tokens[0])
        values = [float.fromhex(t) for t in tokens[1:]]
        mean = np.array(values[: 2 * n])
        cov = np.array(values[2 * n :]).reshape(2 * n, 2 * n)
        return cls(mean, cov)


def vacuum(n_modes):
    """The n-mode vacuum state."""
    return GaussianState(np.zeros(2 * n_modes), np.eye(2 * n_modes))


def tensor(a, b):
    """Tensor product of two states; mode order is a's modes then b's."""
    n = a.n_modes + b.n_modes
    mean = np.concatenate([a.mean, b.mean])
    cov = np.zeros((2 * n, 2 * n))
    cov[: 2 * a.n_modes, : 2 * a.n_modes] = a.cov
    cov[2 * a.n_modes :, 2 * a.n_modes :] = b.cov
    return GaussianState(mean, cov)


def _quadrature_indices(modes, n_modes):
    for m in modes:
        if not 0 <= m < n_modes:
            raise ValueError(f"mode index {m} out of range for {n_modes} modes")
    return np.array([2 * m + k for m in modes for k in (0, 1)])


def partial_trace(state, keep):
    """Reduced state on the modes in ``keep`` (order preserved)."""
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep must name at least one mode")
    idx = _quadrature_indices(keep, state.n_modes)
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)])


def apply_symplectic(state, s_matrix):
    """Conjugate the state by a symplectic matrix: cov -> S cov S^T."""
    return GaussianState(s_matrix @ state.mean, s_matrix @ state.cov @ s_matrix.T)


def beamsplitter_symplectic(n_modes, i, j, transmissivity):
    """Real beamsplitter on modes (i, j) with the given transmissivity."""
    if i == j:
        raise ValueError("beamsplitter needs two distinct modes")
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in [0, 1], got {transmissivity}")
    t = np.sqrt(transmissivity)
    rf = np.sqrt(1.0 - transmissivity)
    s = np.eye(2 * n_modes)
    ii = _quadrature_indices([i], n_modes)
    jj = _quadrature_indices([j], n_modes)
    s[np.ix_(ii, ii)] = t * np.eye(2)
    s[np.ix_(jj, jj)] = t * np.eye(2)
    s[np.ix_(ii, jj)] = rf * np.eye(2)
    s[np.ix_(jj, ii)] = -rf * np.eye(2)
    return s


def beamsplitter(state, i, j, transmissivity=0.5):
    return apply_symplectic(state, beamsplitter_symplectic(state.n_modes, i, j, transmissivity))


def two_mode_squeeze_symplectic(n_modes, i, j, r):
    """Two-mode squeezer on (i, j); from vacuum gives cosh(2r)/sinh(2r) blocks."""
    if i == j:
        raise ValueError("two-mode squeezer needs two distinct modes")
    s = np.eye(2 * n_modes)
    ii = _quadrature_indices([i], n_modes)
    jj = _quadrature_indices([j], n_modes)
    s[np.ix_(ii, ii)] = np.cosh(r) * np.eye(2)
    s[np.ix_(jj, jj)] = np.cosh(r) * np.eye(2)
    s[np.ix_(ii, jj)] = np.sinh(r) * PAULI_Z
    s[np.ix_(jj, ii)] = np.sinh(r) * PAULI_Z
    return s


def two_mode_squeeze(state, i, j, r):
    if r < 0:
        raise ValueError(f"squeezing parameter must be >= 0, got {r}")
    return apply_symplectic(state, two_mode_squeeze_symplectic(state.n_modes, i, j, r))


def pure_loss(state, i, eta):
    """Pure-loss channel with transmission eta on mode i."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmission must be in [0, 1], got {eta}")
    n = state.n_modes
    ii = _quadrature_indices([i], n)
    x = np.eye(2 * n)
    x[np.ix_(ii, ii)] = np.sqrt(eta) * np.eye(2)
    y = np.zeros((2 * n, 2 * n))
    y[np.ix_(ii, ii)] = (1.0 - eta) * np.eye(2)
    return GaussianState(x @ state.mean, x @ state.cov @ x.T + y)


def _guard_condition(matrix, label):
    cond = np.linalg.cond(matrix)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise ConditioningError(
            f"{label} has condition number {cond:.3e} (limit {CONDITION_LIMIT:.0e}); "
            "the input state is at the edge of physicality"
        )


def condition_double_homodyne(state, i, j, outcome):
    """Condition on an ideal double-homodyne (EPR) measurement of modes i, j.

    Modes i and j are mixed on a balanced beamsplitter and measured in
    orthogonal quadratures, yielding the outcome vector m.  Equivalently the
    pair is projected onto an infinitely squeezed two-mode state displaced by
    (0, m).  The infinite-squeezing limit is taken in closed form: with
    P = [[1, sz], [sz, 1]] = V V^T the projector onto the squeezed plane,

        lim_{c'->inf} (sigma_meas + c' P)^{-1}
            = A^{-1} - A^{-1} V (V^T A^{-1} V)^{-1} V^T A^{-1},

    which reduces to the familiar Schur-complement blocks
    (sigma_b + c*1)^{-1} etc. when sigma_meas is block diagonal.

    Returns the conditional state on the unmeasured modes (mode order
    preserved) and the probability density of the outcome.
    """
    if state.n_modes < 3:
        raise ValueError("conditioning requires at least one unmeasured mode")
    if i == j:
        raise ValueError("double homodyne needs two distinct modes")
    m = outcome.vector if isinstance(outcome, HomodyneOutcome) else np.asarray(outcome, float)

    kept = [k for k in range(state.n_modes) if k not in (i, j)]
    idx_keep = _quadrature_indices(kept, state.n_modes)
    idx_meas = _quadrature_indices([i, j], state.n_modes)

    sigma_alpha = state.cov[np.ix_(idx_keep, idx_keep)]
    sigma_cross = state.cov[np.ix_(idx_keep, idx_meas)]
    sigma_beta = state.cov[np.ix_(idx_meas, idx_meas)]
    r_alpha = state.mean[idx_keep]
    r_beta = state.mean[idx_meas]

    _guard_condition(sigma_beta, "measured-mode covariance")
    v = np.vstack([np.eye(2), PAULI_Z])
    ainv_v = np.linalg.solve(sigma_beta, v)
    gram = v.T @ ainv_v
    _guard_condition(gram, "squeezed-plane Gram matrix")
    w = np.linalg.solve(sigma_beta, np.eye(4) - v @ np.linalg.solve(gram, ainv_v.T))
    w = 0.5 * (w + w.T)

    r_m = np.concatenate([np.zeros(2), m])
    delta = r_m - r_beta
    cond_mean = r_alpha + sigma_cross @ w @ delta
    cond_cov = sigma_alpha - sigma_cross @ w @ sigma_cross.T
    cond_cov = 0.5 * (cond_cov + cond_cov.T)

    # p(m) is Gaussian with precision given by the j-mode block of w; the
    # remaining quadratic-form directions lie in ker(w) and drop out.
    k_block = w[2:, 2:]
    density = float(np.sqrt(np.linalg.det(k_block)) / np.pi * np.exp(-delta @ w @ delta))
    return GaussianState(cond_mean, cond_cov), density

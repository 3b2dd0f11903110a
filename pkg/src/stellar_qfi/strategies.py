"""The stellar state and the three measurement strategies.

Strategies compared, each as a function of the stellar parameters
(epsilon, gamma, phi) and, where applicable, the link parameters (eta, r):

* ``di``         -- direct interferometry; loss maps epsilon -> eta*epsilon.
* ``local_het``  -- local heterodyne at both sites, loss-free.
* ``teleport``   -- CV teleportation over a lossy, finitely squeezed TMSV.

All Fisher matrices here are diagonal in (phi, gamma); the cross term is
zero and asserted as such.  ``j_gamma`` is reported as None at gamma = 1,
where the closed forms hit their 1/(1 - gamma^2) singularities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np

from .gaussian import (
    GaussianState,
    HomodyneOutcome,
    PAULI_Z,
    condition_double_homodyne,
    partial_trace,
    pure_loss,
    tensor,
    two_mode_squeeze,
    vacuum,
)
from .qfi import (
    GaussianFamily,
    SingularFamilyError,
    fidelity_cov_deficit_mp,
    qfi_fidelity_limit,
    qfi_matrix,
)

INFINITE = math.inf

DI = "di"
LOCAL_HET = "local_het"
TELEPORT = "teleport"

QUADRATURE_CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class StellarParams:
    """Stellar-source parameters: photon number, coherence, relative phase."""

    epsilon: float
    gamma: float
    phi: float = 0.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        object.__setattr__(self, "phi", float(self.phi) % (2 * math.pi))


@dataclass(frozen=True)
class LinkParams:
    """TMSV link: transmission eta and squeezing r (may be INFINITE)."""

    eta: float
    r: float

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta}")
        if not (self.r >= 0.0 or math.isinf(self.r)):
            raise ValueError(f"r must be >= 0 or INFINITE, got {self.r}")

    @property
    def is_infinite(self):
        return math.isinf(self.r)

    @property
    def c(self):
        if self.is_infinite:
            raise ValueError("c is undefined at infinite squeezing")
        return self.eta * math.cosh(2 * self.r) + (1.0 - self.eta)

    @property
    def s(self):
        if self.is_infinite:
            raise ValueError("s is undefined at infinite squeezing")
        return self.eta * math.sinh(2 * self.r)


def squeezing_db(r):
    """Squeezed-quadrature variance 0.5*exp(-2r) expressed in decibels."""
    return 20.0 * r * math.log10(math.e)


@dataclass(frozen=True)
class StrategyQFI:
    """Diagonal of the (phi, gamma) Fisher matrix for one strategy.

    ``j_gamma`` is None where the gamma entry is out of domain (gamma = 1).
    """

    strategy: str
    j_phi: float
    j_gamma: Optional[float]
    j_cross: float = 0.0

    def __post_init__(self):
        entries = [self.j_phi, self.j_cross]
        if self.j_gamma is not None:
            entries.append(self.j_gamma)
        for value in entries:
            if not math.isfinite(value) or value < -1e-10:
                raise ValueError(f"Fisher entries must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class ConditionalMoments:
    """Outcome-indexed moments of the post-measurement state on modes (A, C).

    The mean is ``mean_map @ m``; the covariance does not depend on m.  The
    outcome density is an isotropic Gaussian with per-quadrature variance
    ``density_variance``.
    """

    mean_map: np.ndarray
    cov: np.ndarray
    kappa: float
    lam: float
    mu: float
    nu: float
    density_variance: float


def _rotation(phi):
    return np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])


def stellar_cov(epsilon, gamma, phi):
    off = gamma * epsilon * _rotation(phi)
    cov = np.zeros((4, 4))
    cov[:2, :2] = (epsilon + 1.0) * np.eye(2)
    cov[2:, 2:] = (epsilon + 1.0) * np.eye(2)
    cov[:2, 2:] = off
    cov[2:, :2] = off.T
    return cov


def stellar_state(params):
    """Two-mode correlated thermal state of the source (zero mean)."""
    return GaussianState(np.zeros(4), stellar_cov(params.epsilon, params.gamma, params.phi))


def _stellar_block_derivs(epsilon, gamma, phi):
    """(d/dphi, d/dgamma) of the off-diagonal 2x2 block of the stellar cov."""
    dphi = gamma * epsilon * np.array(
        [[-math.sin(phi), -math.cos(phi)], [math.cos(phi), -math.sin(phi)]]
    )
    dgam = epsilon * _rotation(phi)
    return dphi, dgam


def _embed_off_block(block):
    full = np.zeros((4, 4))
    full[:2, 2:] = block
    full[2:, :2] = block.T
    return full


def stellar_family(epsilon):
    """Gaussian family theta = (phi, gamma) of stellar states, with analytic derivatives."""

    def evaluate(theta):
        phi, gamma = theta
        return GaussianState(np.zeros(4), stellar_cov(epsilon, gamma, phi))

    def derivatives(theta):
        phi, gamma = theta
        dphi, dgam = _stellar_block_derivs(epsilon, gamma, phi)
        zero = np.zeros(4)
        return [(zero, _embed_off_block(dphi)), (zero, _embed_off_block(dgam))]

    return GaussianFamily(evaluate, derivatives)


def lossy_tmsv(link):
    """TMSV after pure loss eta on both arms: blocks c*1 and s*sigma_z."""
    if link.is_infinite:
        raise ValueError("lossy_tmsv needs finite squeezing")
    state = two_mode_squeeze(vacuum(2), 0, 1, link.r)
    state = pure_loss(state, 0, link.eta)
    return pure_loss(state, 1, link.eta)


def di_qfi(params, eta):
    """Lossy direct interferometry: the stellar-state QFI at epsilon -> eta*epsilon."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"DI requires eta in (0, 1]; at eta = 0 all signal is lost")
    e = eta * params.epsilon
    g = params.gamma
    j_phi = 2.0 * g**2 * e / (2.0 + e * (1.0 - g**2))
    if g == 1.0:
        j_gamma = None
    else:
        j_gamma = (
            2.0 * e * (2.0 + e + e * g**2)
            / ((1.0 - g**2) * (4.0 + 4.0 * e + e**2 * (1.0 - g**2)))
        )
    return StrategyQFI(DI, j_phi, j_gamma)


def local_heterodyne_fi(params):
    """Classical Fisher information of dual local heterodyne (loss-free)."""
    e = params.epsilon
    g = params.gamma
    denom = (1.0 - g**2) * e**2 + 3.0 * e + 2.0
    j_phi = 2.0 * g**2 * e**2 / denom
    if g == 1.0:
        j_gamma = None
    else:
        correction = 4.0 * g**2 * e**3 / (
            (g**2 - 1.0) ** 2 * e**3
            - 6.0 * (g**2 - 1.0) * e**2
            - 4.0 * (g**2 - 3.0) * e
            + 8.0
        )
        j_gamma = 2.0 * e**2 / denom + correction
    return StrategyQFI(LOCAL_HET, j_phi, j_gamma)


def teleport_conditional_moments(params, link):
    """Closed-form conditional moments after Bob's double homodyne.

    The Schur-complement derivation gives r_C = (s / (1+c+eps)) * sigma_z m;
    the factor differs from the (1+c+eps) printed in the summary formula,
    which does not propagate to any Fisher information since r_C carries no
    parameter dependence either way.
    """
    if link.is_infinite:
        raise ValueError("conditional moments need finite squeezing")
    e, g, phi = params.epsilon, params.gamma, params.phi
    c, s = link.c, link.s
    u = 1.0 + c + e

    kappa = g**2 * e**2 / u
    lam = s**2 / u
    mu = g * s * e * math.cos(phi) / u
    nu = g * s * e * math.sin(phi) / u

    mean_map = np.zeros((4, 2))
    mean_map[:2, :] = -(g * e / u) * np.array(
        [[math.cos(phi), math.sin(phi)], [math.sin(phi), -math.cos(phi)]]
    )
    mean_map[2:, :] = (s / u) * PAULI_Z

    cov = np.zeros((4, 4))
    cov[:2, :2] = (1.0 + e - kappa) * np.eye(2)
    cov[2:, 2:] = (c - lam) * np.eye(2)
    cov[:2, 2:] = np.array([[mu, -nu], [nu, mu]])
    cov[2:, :2] = cov[:2, 2:].T

    return ConditionalMoments(mean_map, cov, kappa, lam, mu, nu, u / 2.0)


def teleport_conditional(params, link, outcome):
    """Post-measurement state on (A, C) and the density of the outcome."""
    m = outcome.vector if isinstance(outcome, HomodyneOutcome) else np.asarray(outcome, float)
    moments = teleport_conditional_moments(params, link)
    u = 2.0 * moments.density_variance
    density = math.exp(-float(m @ m) / u) / (math.pi * u)
    return GaussianState(moments.mean_map @ m, moments.cov), density


def teleport_four_mode_state(params, link):
    """stellar(A, B) (x) lossyTMSV(C, D), built from gaussian-core primitives."""
    return tensor(stellar_state(params), lossy_tmsv(link))


def teleport_conditional_via_core(params, link, outcome):
    """Independent route: condition the composed 4-mode state directly.

    Mode order of the composed state is (A, B, C, D); Bob measures (B, D)
    and the conditional state comes back on (A, C).
    """
    state = teleport_four_mode_state(params, link)
    return condition_double_homodyne(state, 1, 3, outcome)


def teleport_qfi_closed(params, link):
    """Ensemble-averaged teleportation QFI from the closed forms.

    At s = 0 (r = 0 or eta = 0) the gamma expression is an exact 0/0 and its
    algebraic limit is the local-heterodyne Fisher information, which is
    returned directly.

    The expressions combine terms up to (cosh 2r)^6 whose leading orders
    cancel, so they are evaluated in 60-digit arithmetic; float64 would lose
    all significance already near r ~ 10.
    """
    if link.is_infinite:
        raise ValueError("use teleport_qfi_infinite_squeezing for r = INFINITE")
    if link.s == 0.0:
        het = local_heterodyne_fi(params)
        return StrategyQFI(TELEPORT, het.j_phi, het.j_gamma)

    # Cancellation depth grows with the squeezing scale cosh(2r), so the
    # working precision scales with r (log10 cosh(2r) ~ 0.87 * 2r).
    with mpmath.workdps(60 + int(6 * link.r)):
        e = mpmath.mpf(params.epsilon)
        g = mpmath.mpf(params.gamma)
        eta = mpmath.mpf(link.eta)
        c = eta * mpmath.cosh(2 * mpmath.mpf(link.r)) + (1 - eta)
        s = eta * mpmath.sinh(2 * mpmath.mpf(link.r))

        u = c + e + 1
        core = c**2 * (e + 1) + c * e * (e * (1 - g**2) + 2)
        d1 = core - (s**2 + 1) * (e + 1)
        d2 = core + c - s**2 * (e + 1)
        j_phi = (2 * g**2 * e**2 / u) * (s**2 / d1 + (c * u - s**2) / d2)

        if params.gamma == 1.0:
            return StrategyQFI(TELEPORT, float(j_phi), None)

        x = 2 * e**2 * (
            2 * (c**2 - 1) * g**2 * e * u * (core - e - 1)
            - 2 * s**4 * (c**2 * (e + 2) + g**2 * e - c * (e + 1) * ((g**2 - 1) * e - 2))
            + s**6 * (e + 2)
            + s**2
            * (
                -(g**4 + 1) * e**3
                + c**4 * (e + 2)
                - 2 * c**3 * (e + 1) * ((2 * g**2 - 1) * e - 2)
                + c**2 * e * ((4 - 8 * g**2) * e + (g**4 - 4 * g**2 + 1) * e**2 + 4)
                + 2 * c * (e + 1) * ((2 * g**2 - 1) * e - 2)
                - 4 * e**2
                - 5 * e
                - 2
            )
        )
        y = (
            u
            * (g**2 * e + c**2 + c * (e - g**2 * e) - s**2 - e - 1)
            * d1
            * (
                -(g**2) * e**2
                + c**2 * (e + 2)
                + c * (e**2 * (1 - g**2) + 4 * e + 4)
                - s**2 * (e + 2)
                + e**2
                + 3 * e
                + 2
            )
        )
        j_gamma = x / y + 2 * e**2 * (c * u - s**2) / (u * d2)
        return StrategyQFI(TELEPORT, float(j_phi), float(j_gamma))


def infinite_squeezing_family(epsilon, eta):
    """Family of the r -> inf teleported state: the stellar state with a
    random-displacement penalty 2*(1-eta) added to the variance of the
    teleported arm."""

    def evaluate(theta):
        phi, gamma = theta
        cov = stellar_cov(epsilon, gamma, phi)
        cov[2, 2] += 2.0 * (1.0 - eta)
        cov[3, 3] += 2.0 * (1.0 - eta)
        return GaussianState(np.zeros(4), cov)

    def derivatives(theta):
        phi, gamma = theta
        dphi, dgam = _stellar_block_derivs(epsilon, gamma, phi)
        zero = np.zeros(4)
        return [(zero, _embed_off_block(dphi)), (zero, _embed_off_block(dgam))]

    return GaussianFamily(evaluate, derivatives)


def teleport_qfi_infinite_squeezing(params, eta):
    """Teleportation QFI in the r -> inf limit; excludes eta = 0."""
    if not 0.0 < eta <= 1.0:
        raise ValueError(
            "infinite squeezing requires eta > 0; at eta = 0 the strategy "
            "degenerates to local heterodyne (use local_heterodyne_fi)"
        )
    family = infinite_squeezing_family(params.epsilon, eta)
    theta = np.array([params.phi, params.gamma])
    try:
        matrix = qfi_matrix(family, theta, labels=("phi", "gamma"))
        j_phi = matrix["phi", "phi"]
        j_gamma = matrix["gamma", "gamma"]
        cross = matrix["phi", "gamma"]
    except SingularFamilyError:
        # Pure-mode corner (eta -> 1 with gamma -> 1): the moment formula is
        # singular exactly on the boundary.  All Fisher entries are continuous
        # in gamma there, so evaluate the same formula a hair inside the
        # domain; the induced error is O(epsilon * 1e-7), far below every
        # tolerance used in this package.
        nudged = np.array([theta[0], min(theta[1], 1.0 - 1e-7)])
        matrix = qfi_matrix(family, nudged, labels=("phi", "gamma"))
        j_phi = matrix["phi", "phi"]
        j_gamma = matrix["gamma", "gamma"]
        cross = matrix["phi", "gamma"]
    if params.gamma == 1.0:
        j_gamma = None
    return StrategyQFI(TELEPORT, j_phi, j_gamma, cross)


def conditional_family(epsilon, link, m):
    """Family theta = (phi, gamma) of conditional states at a fixed outcome."""
    m = np.asarray(m, dtype=float)

    def evaluate(theta):
        phi, gamma = theta
        moments = teleport_conditional_moments(StellarParams(epsilon, gamma, phi), link)
        return GaussianState(moments.mean_map @ m, moments.cov)

    return GaussianFamily(evaluate)


def per_outcome_qfi(params, link, m, method="moments"):
    """QFI diagonal (J_phi, J_gamma) of a single conditional state."""
    family = conditional_family(params.epsilon, link, m)
    theta = np.array([params.phi, params.gamma])
    if method == "moments":
        matrix = qfi_matrix(family, theta, labels=("phi", "gamma"))
        return matrix["phi", "phi"], matrix["gamma", "gamma"]
    if method == "fidelity":
        return (
            qfi_fidelity_limit(family, theta, 0),
            qfi_fidelity_limit(family, theta, 1),
        )
    raise ValueError(f"unknown per-outcome method {method!r}")


def _mean_map_derivatives(params, link, step=1e-6):
    """Central differences of the conditional mean map in (phi, gamma)."""
    e = params.epsilon
    derivs = []
    for dphi, dgam in [(step, 0.0), (0.0, step)]:
        hi = teleport_conditional_moments(
            StellarParams(e, params.gamma + dgam, params.phi + dphi), link
        ).mean_map
        lo = teleport_conditional_moments(
            StellarParams(e, params.gamma - dgam, params.phi - dphi), link
        ).mean_map
        derivs.append((hi - lo) / (2 * step))
    return derivs


def _per_outcome_batch(params, link, method):
    """Vectorized per-outcome QFI: a function of an (n, 2) outcome array.

    The conditional covariance and the mean map are outcome-independent, so
    the per-outcome QFI is a constant (from the covariance) plus a quadratic
    form in m (from the mean); both pieces are hoisted out of the node loop.
    """
    theta = np.array([params.phi, params.gamma])
    moments = teleport_conditional_moments(params, link)

    if method == "moments":
        # Covariance contribution from the moment-formula engine at m = 0,
        # where the mean term vanishes identically.
        base = qfi_matrix(conditional_family(params.epsilon, link, np.zeros(2)), theta)
        cov_phi = base.values[0, 0]
        cov_gamma = base.values[1, 1]
        dt_phi, dt_gamma = _mean_map_derivatives(params, link)
        q_phi = 2.0 * dt_phi.T @ np.linalg.solve(moments.cov, dt_phi)
        q_gamma = 2.0 * dt_gamma.T @ np.linalg.solve(moments.cov, dt_gamma)

        def evaluate(ms):
            quad_phi = np.einsum("ni,ij,nj->n", ms, q_phi, ms)
            quad_gamma = np.einsum("ni,ij,nj->n", ms, q_gamma, ms)
            return cov_phi + quad_phi, cov_gamma + quad_gamma

        return evaluate

    if method == "fidelity":
        dtheta = 1e-4
        factors = []
        for j in range(2):
            lo, hi = theta.copy(), theta.copy()
            lo[j] -= 0.5 * dtheta
            hi[j] += 0.5 * dtheta
            below = teleport_conditional_moments(StellarParams(params.epsilon, lo[1], lo[0]), link)
            above = teleport_conditional_moments(StellarParams(params.epsilon, hi[1], hi[0]), link)
            # The covariance deficit 1 - F0 is ~ J * dtheta^2 / 8 and sits far
            # below float64 resolution of F0 itself, so it is hoisted here in
            # extended precision (once per parameter, not per outcome).
            deficit = fidelity_cov_deficit_mp(below.cov, above.cov)
            sigma_avg = 0.5 * (below.cov + above.cov)
            dmap = below.mean_map - above.mean_map
            quad = 0.25 * dmap.T @ np.linalg.solve(sigma_avg, dmap)
            factors.append((deficit, quad))

        def evaluate(ms):
            out = []
            for deficit, quad in factors:
                exponent = np.einsum("ni,ij,nj->n", ms, quad, ms)
                # 1 - F = (1 - F0) - F0*expm1(-x), cancellation-free.
                infid = deficit - (1.0 - deficit) * np.expm1(-exponent)
                out.append(8.0 * infid / dtheta**2)
            return out[0], out[1]

        return evaluate

    raise ValueError(f"unknown per-outcome method {method!r}")


def _ensemble_average(params, link, order, evaluate):
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    u = 1.0 + link.c + params.epsilon
    scale = math.sqrt(u)  # m = sqrt(2 * var) * node, var = u / 2
    grid_q, grid_p = np.meshgrid(nodes, nodes, indexing="ij")
    ms = scale * np.column_stack([grid_q.ravel(), grid_p.ravel()])
    joint_weights = np.outer(weights, weights).ravel() / math.pi
    j_phi_nodes, j_gamma_nodes = evaluate(ms)
    return float(joint_weights @ j_phi_nodes), float(joint_weights @ j_gamma_nodes)


def teleport_qfi_ensemble(params, link, quadrature_order=12, method="moments"):
    """Ensemble QFI as a Gauss-Hermite average of per-outcome QFI.

    The outcome density is parameter-free, so the classical term of the
    ensemble Fisher information vanishes and only the weighted average of
    the conditional-state QFI remains.  Serves as an independent oracle for
    ``teleport_qfi_closed``.
    """
    if link.is_infinite:
        raise ValueError("ensemble quadrature needs finite squeezing")
    if quadrature_order < 8:
        raise ValueError(f"quadrature_order must be >= 8, got {quadrature_order}")
    if params.gamma == 1.0:
        raise ValueError("ensemble quadrature requires gamma < 1 (finite-difference domain)")
    evaluate = _per_outcome_batch(params, link, method)
    coarse = _ensemble_average(params, link, quadrature_order, evaluate)
    fine = _ensemble_average(params, link, 2 * quadrature_order, evaluate)
    for lo, hi in zip(coarse, fine):
        if abs(hi - lo) > QUADRATURE_CONVERGENCE_TOL * max(1.0, abs(hi)):
            raise ArithmeticError(
                f"quadrature not converged: order doubling moved the result "
                f"from {lo!r} to {hi!r}"
            )
    return StrategyQFI(TELEPORT, fine[0], fine[1])


def sample_outcome(params, link, rng):
    """Draw one double-homodyne outcome from the parameter-free density."""
    if link.is_infinite:
        raise ValueError("sampling needs finite squeezing")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    std = math.sqrt((1.0 + link.c + params.epsilon) / 2.0)
    m_q, m_p = rng.normal(0.0, std, size=2)
    return HomodyneOutcome(float(m_q), float(m_p))


@dataclass(frozen=True)
class MonteCarloQFI:
    """Sample statistics of the per-outcome QFI under the outcome density."""

    j_phi: float
    j_phi_stderr: float
    j_gamma: float
    j_gamma_stderr: float
    mtm: float
    mtm_stderr: float
    n_samples: int


def monte_carlo_qfi(params, link, n_samples, rng):
    """Monte-Carlo ensemble oracle: average per-outcome QFI over sampled outcomes."""
    if link.is_infinite:
        raise ValueError("sampling needs finite squeezing")
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    std = math.sqrt((1.0 + link.c + params.epsilon) / 2.0)
    ms = rng.normal(0.0, std, size=(n_samples, 2))
    j_phi, j_gamma = _per_outcome_batch(params, link, "moments")(ms)
    mtm = np.einsum("ni,ni->n", ms, ms)
    root_n = math.sqrt(n_samples)
    return MonteCarloQFI(
        float(j_phi.mean()),
        float(j_phi.std(ddof=1)) / root_n,
        float(j_gamma.mean()),
        float(j_gamma.std(ddof=1)) / root_n,
        float(mtm.mean()),
        float(mtm.std(ddof=1)) / root_n,
        n_samples,
    )


def reduced_stellar_mode(params, mode):
    """Single-site reduced state: a thermal state with cov (eps+1)*1."""
    return partial_trace(stellar_state(params), {mode})

"""Self-verification: every oracle-equivalence and invariant suite as named checks.

Each check returns the worst measured deviation next to its tolerance, so a
report shows the numerical headroom at a glance.  ``run_all`` executes the
whole battery; the CLI's verify subcommand formats the report and sets the
exit code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gaussian import (
    beamsplitter,
    partial_trace,
    pure_loss,
    symplectic_form,
    tensor,
    two_mode_squeeze,
    vacuum,
)
from .qfi import qfi_matrix
from .strategies import (
    DI,
    LOCAL_HET,
    TELEPORT,
    LinkParams,
    StellarParams,
    di_qfi,
    local_heterodyne_fi,
    monte_carlo_qfi,
    stellar_family,
    teleport_conditional,
    teleport_conditional_via_core,
    teleport_qfi_closed,
    teleport_qfi_ensemble,
    teleport_qfi_infinite_squeezing,
)
from .sweep import CrossoverQuery, find_crossover

SEED = 20240817


@dataclass(frozen=True)
class CheckResult:
    name: str
    worst: float
    tolerance: float
    passed: bool
    detail: str = ""


def _result(name, worst, tolerance, detail=""):
    return CheckResult(name, float(worst), float(tolerance), bool(worst <= tolerance), detail)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _stellar_grid_deviations():
    diag = 0.0
    cross = 0.0
    for epsilon in np.linspace(0.05, 2.0, 5):
        family = stellar_family(float(epsilon))
        for gamma in np.linspace(0.05, 0.95, 5):
            matrix = qfi_matrix(family, [math.pi / 4, float(gamma)], labels=("phi", "gamma"))
            closed = di_qfi(StellarParams(float(epsilon), float(gamma)), 1.0)
            diag = max(
                diag,
                _rel(matrix["phi", "phi"], closed.j_phi),
                _rel(matrix["gamma", "gamma"], closed.j_gamma),
            )
            cross = max(cross, abs(matrix["phi", "gamma"]))
    return diag, cross


def check_stellar_closed_forms():
    """Moment-formula QFI vs the lossless closed forms on an (epsilon, gamma) grid."""
    diag, _ = _stellar_grid_deviations()
    return _result("stellar-closed-forms", diag, 1e-8, "5x5 (epsilon, gamma) grid")


def check_stellar_cross_term():
    """The (phi, gamma) cross entry of the stellar QFI vanishes."""
    _, cross = _stellar_grid_deviations()
    return _result("stellar-cross-term", cross, 1e-10, "5x5 (epsilon, gamma) grid")


def check_three_way_oracle():
    """Closed form vs quadrature ensemble (both per-outcome routes) for teleportation."""
    worst = 0.0
    for gamma in (0.5, 0.95):
        for eta in (0.2, 0.6, 1.0):
            for r in (0.3, 1.0, 2.0):
                for epsilon in (0.1, 1.0):
                    params = StellarParams(epsilon, gamma, math.pi / 4)
                    link = LinkParams(eta, r)
                    closed = teleport_qfi_closed(params, link)
                    for method in ("moments", "fidelity"):
                        ens = teleport_qfi_ensemble(params, link, method=method)
                        worst = max(
                            worst,
                            _rel(closed.j_phi, ens.j_phi),
                            _rel(closed.j_gamma, ens.j_gamma),
                        )
    return _result("three-way-oracle", worst, 5e-5, "gamma x eta x r x epsilon grid")


_LIMIT_PARAMS = StellarParams(0.3, 0.7, math.pi / 4)


def check_limit_r_zero():
    """Unsqueezed teleportation reduces exactly to local heterodyne."""
    het = local_heterodyne_fi(_LIMIT_PARAMS)
    at_r0 = teleport_qfi_closed(_LIMIT_PARAMS, LinkParams(0.7, 0.0))
    worst = max(_rel(at_r0.j_phi, het.j_phi), _rel(at_r0.j_gamma, het.j_gamma))
    return _result("limit-r-zero", worst, 1e-12)


def check_limit_high_squeezing():
    """Lossless teleportation at r=20 reaches the direct-interferometry values."""
    di = di_qfi(_LIMIT_PARAMS, 1.0)
    at_r20 = teleport_qfi_closed(_LIMIT_PARAMS, LinkParams(1.0, 20.0))
    worst = max(_rel(at_r20.j_phi, di.j_phi), _rel(at_r20.j_gamma, di.j_gamma))
    return _result("limit-high-squeezing", worst, 1e-5)


def check_limit_infinite_squeezing():
    """The infinite-squeezing path at eta=1 equals direct interferometry."""
    di = di_qfi(_LIMIT_PARAMS, 1.0)
    infinite = teleport_qfi_infinite_squeezing(_LIMIT_PARAMS, 1.0)
    worst = max(_rel(infinite.j_phi, di.j_phi), _rel(infinite.j_gamma, di.j_gamma))
    return _result("limit-infinite-squeezing", worst, 1e-10)


def check_limit_high_loss():
    """Near-total loss drives teleportation to the local-heterodyne values."""
    het = local_heterodyne_fi(_LIMIT_PARAMS)
    high_loss = teleport_qfi_closed(_LIMIT_PARAMS, LinkParams(1e-8, 1.0))
    worst = max(_rel(high_loss.j_phi, het.j_phi), _rel(high_loss.j_gamma, het.j_gamma))
    return _result("limit-high-loss", worst, 1e-6, "eta = 1e-8")


def check_conditioning_equivalence():
    """Closed-form conditional moments vs the generic conditioning pipeline."""
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        params = StellarParams(
            float(rng.uniform(0.05, 2.0)),
            float(rng.uniform(0.0, 1.0)),
            float(rng.uniform(0.0, 2 * math.pi)),
        )
        link = LinkParams(float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.0, 2.0)))
        m = rng.normal(0.0, 2.0, size=2)
        closed_state, closed_density = teleport_conditional(params, link, m)
        core_state, core_density = teleport_conditional_via_core(params, link, m)
        worst = max(
            worst,
            np.max(np.abs(closed_state.mean - core_state.mean)),
            np.max(np.abs(closed_state.cov - core_state.cov)),
            abs(closed_density - core_density),
        )
    return _result("conditioning-equivalence", worst, 1e-12, "100 random draws")


def _random_physical_state(rng, n_modes):
    state = vacuum(n_modes)
    for i in range(n_modes):
        state = pure_loss(state, i, float(rng.uniform(0.3, 1.0)))
    return state


def check_physicality_chains():
    """Random channel/composition chains preserve the uncertainty relation."""
    rng = np.random.default_rng(SEED + 1)
    worst = -np.inf
    for _ in range(1000):
        state = _random_physical_state(rng, 2)
        for _ in range(rng.integers(1, 5)):
            op = rng.integers(0, 3)
            if op == 0:
                state = beamsplitter(state, 0, 1, float(rng.uniform(0.0, 1.0)))
            elif op == 1:
                state = two_mode_squeeze(state, 0, 1, float(rng.uniform(0.0, 1.5)))
            else:
                state = pure_loss(state, int(rng.integers(0, 2)), float(rng.uniform(0.0, 1.0)))
        omega = symplectic_form(state.n_modes)
        min_eig = float(np.linalg.eigvalsh(state.cov + 1j * omega).min())
        worst = max(worst, -min_eig)
    return _result("physicality-chains", max(worst, 0.0), 1e-9, "1000 random chains")


def check_pure_loss_semigroup():
    """pure_loss(eta1) after pure_loss(eta2) equals pure_loss(eta1*eta2)."""
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    for _ in range(100):
        state = two_mode_squeeze(vacuum(2), 0, 1, float(rng.uniform(0.0, 1.5)))
        eta1, eta2 = rng.uniform(0.1, 1.0, size=2)
        chained = pure_loss(pure_loss(state, 0, float(eta1)), 0, float(eta2))
        direct = pure_loss(state, 0, float(eta1 * eta2))
        worst = max(
            worst,
            np.max(np.abs(chained.cov - direct.cov)),
            np.max(np.abs(chained.mean - direct.mean)),
        )
    return _result("pure-loss-semigroup", worst, 1e-12, "100 random states")


def check_density_normalization():
    """The double-homodyne outcome density integrates to 1."""
    params = StellarParams(0.3, 0.7, math.pi / 4)
    link = LinkParams(0.6, 1.0)
    u = 1.0 + link.c + params.epsilon
    nodes, weights = np.polynomial.hermite.hermgauss(40)
    scale = math.sqrt(u)
    total = 0.0
    # Substituting m = sqrt(u) x turns the integral of p(m) over the plane
    # into u * sum_ij w_i w_j exp(x_i^2 + x_j^2) p(sqrt(u) x_i, sqrt(u) x_j).
    for wq, xq in zip(weights, nodes):
        for wp, xp in zip(weights, nodes):
            _, density = teleport_conditional(params, link, scale * np.array([xq, xp]))
            total += u * wq * wp * math.exp(xq**2 + xp**2) * density
    return _result("density-normalization", abs(total - 1.0), 1e-8, "2D Gauss-Hermite, order 40")


def check_monte_carlo():
    """Seed-pinned Monte-Carlo ensemble average vs the closed form."""
    params = StellarParams(0.3, 0.7, math.pi / 4)
    link = LinkParams(0.6, 1.0)
    closed = teleport_qfi_closed(params, link)
    mc = monte_carlo_qfi(params, link, 100_000, SEED + 3)
    worst = max(
        abs(mc.j_phi - closed.j_phi) / (3.0 * mc.j_phi_stderr),
        abs(mc.j_gamma - closed.j_gamma) / (3.0 * mc.j_gamma_stderr),
        abs(mc.mtm - (1.0 + link.c + params.epsilon)) / (3.0 * mc.mtm_stderr),
    )
    return _result("monte-carlo-ensemble", worst, 1.0, "deviations in units of 3 stderr")


def check_crossovers():
    """Infinite-squeezing crossovers against the two reference windows."""
    di_cross = find_crossover(CrossoverQuery(TELEPORT, DI, 0.3, 1.0, 0.15, 0.35))
    het_cross = find_crossover(CrossoverQuery(TELEPORT, LOCAL_HET, 0.3, 1.0, 0.05, 0.2))
    worst = max(abs(di_cross - 0.23), abs(het_cross - 0.11))
    return _result(
        "crossovers",
        worst,
        0.01,
        f"teleport/di at {di_cross:.6f}, teleport/local_het at {het_cross:.6f}",
    )


def check_tensor_trace_roundtrip():
    """Composition and reduction invert each other."""
    rng = np.random.default_rng(SEED + 4)
    worst = 0.0
    for _ in range(50):
        a = two_mode_squeeze(vacuum(2), 0, 1, float(rng.uniform(0.0, 1.5)))
        b = _random_physical_state(rng, 1)
        back = partial_trace(tensor(a, b), [0, 1])
        worst = max(worst, np.max(np.abs(back.cov - a.cov)), np.max(np.abs(back.mean - a.mean)))
    return _result("tensor-trace-roundtrip", worst, 1e-14, "50 random pairs")


ALL_CHECKS = (
    check_stellar_closed_forms,
    check_stellar_cross_term,
    check_three_way_oracle,
    check_limit_r_zero,
    check_limit_high_squeezing,
    check_limit_infinite_squeezing,
    check_limit_high_loss,
    check_conditioning_equivalence,
    check_physicality_chains,
    check_pure_loss_semigroup,
    check_density_normalization,
    check_monte_carlo,
    check_crossovers,
    check_tensor_trace_roundtrip,
)


def run_all():
    return [check() for check in ALL_CHECKS]


def format_report(results):
    lines = []
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        line = f"{status}  {res.name}: measured {res.worst:.3e} vs tolerance {res.tolerance:.0e}"
        if res.detail:
            line += f"  ({res.detail})"
        lines.append(line)
    n_failed = sum(not res.passed for res in results)
    lines.append(
        f"{len(results) - n_failed}/{len(results)} checks passed"
        if n_failed
        else f"all {len(results)} checks passed"
    )
    return "\n".join(lines)

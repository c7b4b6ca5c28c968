"""Cutoff calculus, double-divergence solves, and the energy bound sweep."""

import numpy as np
import pytest

from fplab import (
    AnalyticFunction,
    DimensionUnsupported,
    FeFunction,
    InvalidRadii,
    assemble_form,
    build_ball_mesh,
    build_cutoff,
    compute_constants,
    convergence_diagnostics,
    decompose_drift,
    first_dirichlet_eigenpair,
    interpolate,
    preset,
    product_rule_residual,
    run_experiment,
    solve_double_divergence,
    solve_invariant_density,
)


def test_build_cutoff_guards():
    with pytest.raises(InvalidRadii):
        build_cutoff((0.0, 0.0), 0.8, 0.5)
    with pytest.raises(InvalidRadii):
        build_cutoff((0.0, 0.0), 0.0, 0.5)
    chi = build_cutoff((0.0, 0.0), 0.5, 0.9)
    assert chi.grad_inf_norm == pytest.approx(1.875 / 0.4, rel=1e-15)


def test_cutoff_values_and_plateaus():
    chi = build_cutoff((0.0, 0.0), 0.4, 0.8)
    assert chi.value(np.array([0.0, 0.0])) == 1.0
    assert chi.value(np.array([0.3, 0.0])) == 1.0
    assert chi.value(np.array([0.9, 0.0])) == 0.0
    # quintic smoothstep is 1/2 at the midpoint radius
    assert chi.value(np.array([0.6, 0.0])) == pytest.approx(0.5, abs=1e-14)
    # radial monotonicity along a ray
    rs = np.linspace(0.0, 1.0, 101)
    vals = chi.value(np.stack([rs, np.zeros_like(rs)], axis=1))
    assert (np.diff(vals) <= 1e-14).all()


def test_cutoff_gradient_plateaus_and_peak():
    chi = build_cutoff((0.0, 0.0), 0.4, 0.8)
    assert np.abs(chi.gradient(np.array([0.2, 0.1]))).max() == 0.0
    assert np.abs(chi.gradient(np.array([0.9, 0.0]))).max() == 0.0
    assert np.abs(chi.gradient(np.array([0.0, 0.0]))).max() == 0.0
    # slope peaks at the midpoint with magnitude (15/8)/width
    g = chi.gradient(np.array([0.6, 0.0]))
    assert np.linalg.norm(g) == pytest.approx(chi.grad_inf_norm, rel=1e-13)
    rs = np.linspace(0.41, 0.79, 200)
    pts = np.stack([rs, np.zeros_like(rs)], axis=1)
    norms = np.linalg.norm(chi.gradient(pts), axis=1)
    assert norms.max() <= chi.grad_inf_norm * (1 + 1e-12)


def test_cutoff_derivatives_match_differences():
    chi = build_cutoff((0.1, -0.2, 0.0), 0.3, 0.7)
    rng = np.random.default_rng(31)
    pts = np.array([0.1, -0.2, 0.0]) + 0.5 * rng.standard_normal((8, 3))
    h = 1e-6
    for x in pts:
        g = chi.gradient(x)
        hess = chi.hessian(x)
        np.testing.assert_allclose(hess, hess.T, atol=1e-12)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd_g = (chi.value(x + e) - chi.value(x - e)) / (2 * h)
            assert abs(fd_g - g[k]) <= 2e-5
            fd_h = (chi.gradient(x + e) - chi.gradient(x - e)) / (2 * h)
            np.testing.assert_allclose(fd_h, hess[:, k], atol=5e-4)


def test_double_divergence_reproduces_linear_harmonic():
    mesh = build_ball_mesh((0.0, 0.0), 1.0, levels=2)
    cs = preset("identity", 2)
    sol = solve_double_divergence(mesh, cs, g=lambda x: x[..., 0])
    # P1 discrete harmonic extension of linear boundary data is that linear
    expected = mesh.vertices[:, 0]
    assert np.abs(sol.h_tilde.values - expected).max() <= 1e-10
    assert sol.residual <= 1e-6 * sol.residual_scale


def test_double_divergence_reproduces_invariant_density():
    mesh = build_ball_mesh((0.0, 0.0), 1.0, levels=2)
    cs = preset("gaussian_gradient", 2)
    density = solve_invariant_density(mesh, cs)
    sol = solve_double_divergence(mesh, cs, g=density.rho)
    err = np.abs(sol.h_tilde.values - density.rho.values).max()
    assert err <= 1e-8 * density.rho_max


@pytest.fixture(scope="module")
def eigen3():
    mesh = build_ball_mesh((0.0, 0.0, 0.0), 1.0, levels=1)
    cs = preset("identity", 3)
    density = solve_invariant_density(mesh, cs)
    dec = decompose_drift(mesh, cs, density)
    form = assemble_form(mesh, cs, density, dec)
    return mesh, cs, density, form


def test_constants_identity_closed_forms(eigen3):
    mesh, cs, density, _ = eigen3
    cutoff = build_cutoff((0.0, 0.0, 0.0), 0.4, 0.8)
    h = interpolate(mesh, 1.0)
    rep = compute_constants(cs, density, cutoff, h)
    assert rep.gamma == 4.0
    # rho = 1 and lam = 1 collapse K_{d,rho} to gamma
    assert rep.k_d_rho == pytest.approx(4.0, rel=1e-9)
    vol = mesh.total_volume()
    assert rep.h_l2 == pytest.approx(np.sqrt(vol), rel=1e-9)
    g = 1.875 / 0.4
    assert rep.grad_chi_inf == pytest.approx(g, rel=1e-14)
    assert rep.c2 == pytest.approx(np.sqrt(3.0) * g * rep.h_l2, rel=1e-12)
    assert rep.c9 == pytest.approx(2.0 * rep.c2, rel=1e-14)
    assert rep.c3 == pytest.approx(2.0 * 3.0 * g * g * rep.h_l2**2, rel=1e-12)
    # no zero-order term and no source data in this preset
    assert rep.c_ld == 0.0 and rep.c4 == 0.0
    assert rep.f_l2star == 0.0 and rep.c5 == 0.0
    assert rep.flux_l2 == 0.0 and rep.c6 == 0.0
    # ledger recomposition is exact, not approximate
    assert rep.big_c1 == rep.c1 + 2.0 * rep.c2 + rep.c4 + rep.c5 + rep.c6 + rep.c7 + 2.0 * rep.c9
    assert rep.big_c2 == rep.c3 + rep.c8 + 2.0 * rep.c10
    assert rep.bound == rep.big_c1**2 + 2.0 * rep.big_c2
    assert rep.c3 == rep.c8 == rep.c10


def test_constants_need_three_dimensions():
    mesh = build_ball_mesh((0.0, 0.0), 1.0, levels=1)
    cs = preset("identity", 2)
    density = solve_invariant_density(mesh, cs)
    cutoff = build_cutoff((0.0, 0.0), 0.4, 0.8)
    with pytest.raises(DimensionUnsupported):
        compute_constants(cs, density, cutoff, interpolate(mesh, 1.0))


def test_energy_bound_eigen_case(eigen3):
    mesh, cs, density, form = eigen3
    lam, psi = first_dirichlet_eigenpair(form)
    cutoff = build_cutoff((0.0, 0.0, 0.0), 0.5, 0.9)
    constants = compute_constants(cs, density, cutoff, psi)
    alphas = [2.0**k for k in range(19)]
    rep = run_experiment(form, cutoff, psi, constants, alphas=alphas)

    assert rep.sup_energy == rep.energies.max()
    assert rep.margin == rep.bound - rep.sup_energy
    assert rep.margin >= 0.0
    assert len(rep.rows()) == len(alphas)

    # alpha G_alpha psi = alpha/(alpha+lam) psi makes every sweep quantity
    # a closed form in the eigenvalue
    chi_vals = interpolate(mesh, cutoff.value).values
    chi_psi = chi_vals * psi.values
    base = form.energy(chi_psi)
    factors = (np.asarray(alphas) / (np.asarray(alphas) + lam)) ** 2
    np.testing.assert_allclose(rep.energies, factors * base, rtol=1e-8)

    diag = convergence_diagnostics(rep)
    assert diag.l2_monotone
    assert diag.l2_reduction <= 1e-3
    assert diag.form_norm_bounded
    assert diag.passed


def test_product_rule_residual_polynomial(eigen3):
    mesh, cs, _, _ = eigen3
    cutoff = build_cutoff((0.0, 0.0, 0.0), 0.4, 0.8)
    def hess(x):
        z = np.zeros(x.shape[:-1])
        row0 = np.stack([2.0 * x[..., 1], 2.0 * x[..., 0], z], axis=-1)
        row1 = np.stack([2.0 * x[..., 0], z, z], axis=-1)
        row2 = np.stack([z, z, z], axis=-1)
        return np.stack([row0, row1, row2], axis=-2)

    u = AnalyticFunction(
        value=lambda x: x[..., 0] * x[..., 0] * x[..., 1],
        grad=lambda x: np.stack(
            [2.0 * x[..., 0] * x[..., 1], x[..., 0] ** 2, np.zeros(x.shape[:-1])],
            axis=-1,
        ),
        hess=hess,
    )
    rng = np.random.default_rng(32)
    pts = 0.9 * rng.standard_normal((100, 3)) * 0.5
    assert product_rule_residual(cs, cutoff, u, pts) <= 1e-10

"""Dirichlet form assembly and resolvent family checks."""

import numpy as np
import pytest

from fplab import (
    DimensionUnsupported,
    apply_generator,
    assemble_form,
    build_ball_mesh,
    build_box_mesh,
    check_contraction,
    check_resolvent_identity,
    check_submarkov,
    decompose_drift,
    first_dirichlet_eigenpair,
    preset,
    resolvent_sweep,
    sector_constant,
    solve_invariant_density,
    solve_resolvent,
    strong_continuity_gaps,
    theoretical_sector_bound,
)


def make_pipeline(name, dim, level, d_mode="skew", **kw):
    center = (0.0,) * dim
    mesh = build_ball_mesh(center, 1.0, levels=level)
    cs = preset(name, dim, **kw)
    density = solve_invariant_density(mesh, cs)
    dec = decompose_drift(mesh, cs, density)
    form = assemble_form(mesh, cs, density, dec, d_mode=d_mode)
    return mesh, cs, density, dec, form


@pytest.fixture(scope="module")
def gaussian2():
    return make_pipeline("gaussian_gradient", 2, 2)


@pytest.fixture(scope="module")
def box_form():
    mesh = build_box_mesh((0.0, 0.0), (1.0, 1.0), 8)
    cs = preset("identity", 2)
    density = solve_invariant_density(mesh, cs)
    dec = decompose_drift(mesh, cs, density)
    return assemble_form(mesh, cs, density, dec)


def test_skew_mode_energy_identity(gaussian2):
    _, _, _, _, form = gaussian2
    rng = np.random.default_rng(13)
    n = form.mesh.num_vertices
    for _ in range(20):
        f = np.zeros(n)
        f[form.interior] = rng.standard_normal(form.interior.size)
        diffusion = float(f @ (form.s @ f))
        # the skew drift block cancels exactly on the diagonal
        assert abs(form.energy(f) - diffusion) <= 1e-12 * diffusion


def test_raw_mode_defect_vanishes_without_drift():
    mesh = build_ball_mesh((0.0, 0.0), 1.0, levels=2)
    cs = preset("identity", 2)
    density = solve_invariant_density(mesh, cs)
    dec = decompose_drift(mesh, cs, density)
    form = assemble_form(mesh, cs, density, dec, d_mode="raw")
    # B = H - (a grad rho)/rho is zero up to the density solve roundoff
    assert form.sym_defect_max <= 1e-9
    assert form.d_mode == "raw"


def test_raw_mode_defect_positive_for_gaussian():
    mesh = build_ball_mesh((0.0, 0.0), 1.0, levels=2)
    cs = preset("gaussian_gradient", 2)
    density = solve_invariant_density(mesh, cs)
    dec = decompose_drift(mesh, cs, density)
    form = assemble_form(mesh, cs, density, dec, d_mode="raw")
    assert form.sym_defect_max > 1e-6  # finite-h consistency error, not roundoff
    assert form.sym_defect_fro >= form.sym_defect_max


def test_contraction_all_presets(gaussian2):
    _, _, _, _, form = gaussian2
    rep = check_contraction(form, alphas=(1.0, 10.0, 100.0), trials=4, seed=21)
    assert rep.max_ratio <= 1.0 + 1e-10
    assert len(rep.rows) == 3 * 4


def test_resolvent_identity(gaussian2):
    _, _, _, _, form = gaussian2
    rng = np.random.default_rng(22)
    f = np.zeros(form.mesh.num_vertices)
    f[form.interior] = rng.standard_normal(form.interior.size)
    rep = check_resolvent_identity(form, 1.0, 10.0, f)
    assert rep.relative_defect <= 1e-8


def test_submarkov_box(box_form):
    rep = check_submarkov(box_form, alpha=10.0)
    assert rep.min_value >= -1e-8
    assert rep.max_value <= 1.0 + 1e-8
    assert rep.lumped


def test_submarkov_rejects_bad_data(box_form):
    f = np.full(box_form.mesh.num_vertices, 2.0)
    with pytest.raises(ValueError):
        check_submarkov(box_form, alpha=1.0, f=f)


def test_resolvent_restricts_boundary_data(gaussian2):
    _, _, _, _, form = gaussian2
    # data supported on the boundary only produces the zero solution
    f = np.ones(form.mesh.num_vertices)
    f[form.interior] = 0.0
    u = solve_resolvent(form, 5.0, f)
    assert np.abs(u.values).max() == 0.0


def test_resolvent_input_validation(gaussian2):
    _, _, _, _, form = gaussian2
    f = np.ones(form.mesh.num_vertices)
    with pytest.raises(ValueError):
        solve_resolvent(form, -1.0, f)
    with pytest.raises(ValueError):
        solve_resolvent(form, 1.0, f, backend="cg")


def test_gmres_matches_direct(gaussian2):
    _, _, _, _, form = gaussian2
    rng = np.random.default_rng(23)
    f = np.zeros(form.mesh.num_vertices)
    f[form.interior] = rng.standard_normal(form.interior.size)
    ud = solve_resolvent(form, 10.0, f, backend="direct")
    ug = solve_resolvent(form, 10.0, f, backend="gmres")
    scale = np.abs(ud.values).max()
    assert np.abs(ud.values - ug.values).max() <= 1e-7 * scale


def test_generator_energy_pairing(gaussian2):
    _, _, _, _, form = gaussian2
    rng = np.random.default_rng(24)
    n = form.mesh.num_vertices
    for _ in range(5):
        u = np.zeros(n)
        v = np.zeros(n)
        u[form.interior] = rng.standard_normal(form.interior.size)
        v[form.interior] = rng.standard_normal(form.interior.size)
        lu = apply_generator(form, u)
        lhs = form.energy(u, v)
        rhs = -float(v @ (form.m @ lu.values))
        scale = np.sqrt(form.energy(u) * form.energy(v))
        assert abs(lhs - rhs) <= 1e-12 * scale


def test_resolvent_inverts_generator(gaussian2):
    _, _, _, _, form = gaussian2
    rng = np.random.default_rng(25)
    f = np.zeros(form.mesh.num_vertices)
    f[form.interior] = rng.standard_normal(form.interior.size)
    alpha = 7.0
    u = solve_resolvent(form, alpha, f)
    lu = apply_generator(form, u.values)
    resid = alpha * u.values[form.interior] - lu.values[form.interior] - f[form.interior]
    assert np.abs(resid).max() <= 1e-8 * np.abs(f).max()


def test_eigenpair_disk_identity():
    mesh = build_ball_mesh((0.0, 0.0), 1.0, levels=3)
    cs = preset("identity", 2)
    density = solve_invariant_density(mesh, cs)
    dec = decompose_drift(mesh, cs, density)
    form = assemble_form(mesh, cs, density, dec)
    lam, psi = first_dirichlet_eigenpair(form)
    # first Dirichlet eigenvalue of the unit disk is j_{0,1}^2; conforming P1
    # on an inscribed polygon approximates it from above
    j01sq = 5.783185962946785
    assert j01sq - 1e-9 <= lam <= 1.05 * j01sq
    assert form.l2_norm(psi.values) == pytest.approx(1.0, rel=1e-12)
    assert psi.values[form.interior].sum() > 0


def test_eigenpair_square_identity(box_form):
    lam, _ = first_dirichlet_eigenpair(box_form)
    # unit square: 2 pi^2, again from above
    exact = 2.0 * np.pi**2
    assert exact - 1e-9 <= lam <= 1.05 * exact


def test_resolvent_on_eigenfunction_is_exact(box_form):
    lam, psi = first_dirichlet_eigenpair(box_form)
    for alpha in (1.0, 10.0):
        u = solve_resolvent(box_form, alpha, psi)
        model = psi.values / (alpha + lam)
        assert np.abs(u.values - model).max() <= 1e-10 * np.abs(model).max()


def test_strong_continuity(gaussian2):
    _, _, _, _, form = gaussian2
    rng = np.random.default_rng(26)
    f = np.zeros(form.mesh.num_vertices)
    f[form.interior] = rng.standard_normal(form.interior.size)
    rep = strong_continuity_gaps(form, f, alphas=[2.0**k for k in range(11)])
    assert rep.monotone
    assert rep.gaps[-1] <= 1.1 * rep.final_bound
    assert rep.gaps[-1] < rep.gaps[0]


def test_sector_constant_identity_is_cauchy_schwarz(box_form):
    rep = sector_constant(box_form, trials=32, seed=27)
    # no drift block: |E(f,g)| <= sqrt(E(f,f) E(g,g)) exactly
    assert rep.empirical <= 1.0 + 1e-12
    assert rep.theoretical is None and rep.within_bound is None


def test_sector_bound_rotator_3d():
    _, cs, density, dec, form = make_pipeline("rotator", 3, 1)
    rep = sector_constant(form, cs, density, dec, trials=64, seed=28)
    assert rep.theoretical is not None and rep.theoretical >= 1.0
    assert rep.within_bound


def test_sector_bound_needs_three_dimensions():
    mesh, cs, density, dec, _ = make_pipeline("rotator", 2, 1)
    with pytest.raises(DimensionUnsupported):
        theoretical_sector_bound(cs, density, dec, mesh)


def test_resolvent_sweep_report(box_form):
    rep = resolvent_sweep(box_form, alphas=(1.0, 4.0, 16.0), seed=29)
    assert len(rep.alphas) == 3
    assert max(rep.contraction_ratios) <= 1.0 + 1e-10
    assert rep.identity_defect <= 1e-8
    assert rep.submarkov_min >= -1e-8
    assert rep.submarkov_max <= 1.0 + 1e-8
    assert rep.backend == "direct" and rep.d_mode == "skew"

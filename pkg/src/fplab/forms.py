"""Sectorial bilinear form, resolvents, and their verifiable identities.

The assembled form reads E(u, v) = v^T (S + D) u with S the mu-weighted
diffusion stiffness and D the drift block. In skew mode D is replaced by
its antisymmetric part, which makes the discrete analog of the
divergence-free identity hold exactly: x^T D x = 0 for every x, so the
energy E(f, f) collapses to the diffusion part alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coefficients import CoefficientSet
from .density import DensityField, DriftDecomposition
from .errors import (
    ContractionViolation,
    DimensionUnsupported,
    SolverDivergence,
    SubmarkovViolation,
)
from .fem import (
    FeFunction,
    apply_dirichlet,
    assemble_drift,
    assemble_weighted_mass,
    assemble_weighted_stiffness,
    quadrature_norm,
)
from .mesh import SimplicialMesh
from .quadrature import QuadratureRule, quadrature_rule

DEFAULT_ALPHAS = tuple(float(2**k) for k in range(13))


@dataclass
class FormMatrices:
    """Assembled form blocks plus the interior index map."""

    mesh: SimplicialMesh
    s: sp.csr_matrix
    d: sp.csr_matrix
    m: sp.csr_matrix
    interior: np.ndarray
    d_mode: str
    sym_defect_max: float
    sym_defect_fro: float
    rho: FeFunction
    rule: QuadratureRule

    def energy(self, u: np.ndarray, v: Optional[np.ndarray] = None) -> float:
        """E(u, v) = v^T (S + D) u; v defaults to u."""
        if v is None:
            v = u
        return float(v @ (self.s @ u) + v @ (self.d @ u))

    def l2_norm(self, u: np.ndarray) -> float:
        """L^2(mu) norm via the weighted mass matrix."""
        return float(np.sqrt(max(u @ (self.m @ u), 0.0)))


def assemble_form(
    mesh: SimplicialMesh,
    cs: CoefficientSet,
    density: DensityField,
    decomposition: DriftDecomposition,
    d_mode: str = "skew",
) -> FormMatrices:
    """Assemble S, D, M for the mu-weighted sectorial form.

    d_mode "skew" antisymmetrizes the drift block (the discrete counterpart
    of the continuum identity that kills the drift term in E(f, f)); "raw"
    keeps the assembled block and leaves its symmetric part as a reported
    defect that must decay under refinement.
    """
    if d_mode not in ("skew", "raw"):
        raise ValueError(f"d_mode must be 'skew' or 'raw', got {d_mode!r}")
    rule = decomposition.rule
    s = assemble_weighted_stiffness(mesh, cs.a, rho=density.rho, rule=rule)
    d_raw = assemble_drift(mesh, decomposition.b_quad, rho=density.rho, rule=rule)
    m = assemble_weighted_mass(mesh, rho=density.rho, rule=rule)
    sym = 0.5 * (d_raw + d_raw.T)
    defect_max = float(abs(sym).max()) if sym.nnz else 0.0
    defect_fro = float(spla.norm(sym)) if sym.nnz else 0.0
    d = (0.5 * (d_raw - d_raw.T)).tocsr() if d_mode == "skew" else d_raw
    return FormMatrices(
        mesh=mesh,
        s=s,
        d=d,
        m=m,
        interior=mesh.interior,
        d_mode=d_mode,
        sym_defect_max=defect_max,
        sym_defect_fro=defect_fro,
        rho=density.rho,
        rule=rule,
    )


def theoretical_sector_bound(
    cs: CoefficientSet,
    density: DensityField,
    decomposition: DriftDecomposition,
    mesh: SimplicialMesh,
) -> float:
    """1 + (gamma / lam) (max rho / min rho) ||B||_{L^d}, gamma = 2(d-1)/(d-2).

    The Lebesgue (unweighted) L^d norm of |B| enters; only d = 3 admits the
    Sobolev constant gamma.
    """
    d = mesh.dim
    if d != 3:
        raise DimensionUnsupported(f"theoretical sector bound needs d = 3, got {d}")
    gamma = 2.0 * (d - 1) / (d - 2)
    b_norm = quadrature_norm(
        mesh,
        np.linalg.norm(decomposition.b_quad, axis=2),
        p=float(d),
        weight=None,
        rule=decomposition.rule,
    )
    return 1.0 + (gamma / cs.lam) * (density.rho_max / density.rho_min) * b_norm


@dataclass
class SectorReport:
    empirical: float
    theoretical: Optional[float]
    within_bound: Optional[bool]
    trials: int


def sector_constant(
    form: FormMatrices,
    cs: Optional[CoefficientSet] = None,
    density: Optional[DensityField] = None,
    decomposition: Optional[DriftDecomposition] = None,
    trials: int = 64,
    seed: int = 0,
) -> SectorReport:
    """Empirical sector constant max |E(f,g)| / sqrt(E(f,f) E(g,g)).

    Trials are random interior-supported pairs; energies use the skew-mode
    diffusion part (E(f,f) = f^T S f). When the coefficient data allows it
    (d = 3), the theoretical bound is evaluated and compared with 5% slack.
    """
    rng = np.random.default_rng(seed)
    n = form.mesh.num_vertices
    interior = form.interior
    best = 0.0
    for _ in range(trials):
        f = np.zeros(n)
        g = np.zeros(n)
        f[interior] = rng.standard_normal(interior.size)
        g[interior] = rng.standard_normal(interior.size)
        e_ff = float(f @ (form.s @ f))
        e_gg = float(g @ (form.s @ g))
        e_fg = abs(form.energy(f, g))
        best = max(best, e_fg / np.sqrt(e_ff * e_gg))
    theoretical = None
    within = None
    if (
        cs is not None
        and density is not None
        and decomposition is not None
        and form.mesh.dim == 3
    ):
        theoretical = theoretical_sector_bound(cs, density, decomposition, form.mesh)
        within = bool(best <= 1.05 * theoretical)
    return SectorReport(
        empirical=float(best), theoretical=theoretical, within_bound=within, trials=trials
    )


def _interior_system(form: FormMatrices, alpha: float, lumped: bool = False):
    interior = form.interior
    if lumped:
        diag = np.asarray(form.m.sum(axis=1)).ravel()
        m = sp.diags(diag).tocsr()
    else:
        m = form.m
    k = (alpha * m + form.s + form.d).tocsr()
    k_int = k[interior][:, interior]
    return k_int, m


def solve_resolvent(
    form: FormMatrices,
    alpha: float,
    f,
    backend: str = "direct",
    tol: float = 1e-10,
    maxiter: int = 10000,
    _lumped: bool = False,
) -> FeFunction:
    """Solve (alpha M + S + D) u = M f on interior DOFs with zero boundary.

    Data enters through its interior restriction: boundary vertex values
    of f never reach the system. This keeps alpha G_alpha an exact
    contraction of the interior space and lets alpha G_alpha f -> f there
    (with the full-mass right side the discrete limit would instead be the
    M-projection of f, leaving an alpha-independent gap for data with a
    nonzero boundary trace).

    backend "direct" uses a sparse LU; "gmres" uses ILU-preconditioned
    GMRES and raises SolverDivergence if the iteration cap or tolerance
    fails. A residual check guards both paths.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    f_vec = f.values if isinstance(f, FeFunction) else np.asarray(f, dtype=float)
    interior = form.interior
    k_int, m_used = _interior_system(form, alpha, lumped=_lumped)
    f_zeroed = np.zeros_like(f_vec)
    f_zeroed[interior] = f_vec[interior]
    rhs = (m_used @ f_zeroed)[interior]
    if backend == "direct":
        u_int = spla.splu(k_int.tocsc()).solve(rhs)
    elif backend == "gmres":
        try:
            ilu = spla.spilu(k_int.tocsc(), drop_tol=1e-6, fill_factor=20)
            precond = spla.LinearOperator(k_int.shape, ilu.solve)
        except RuntimeError as exc:
            raise SolverDivergence(f"ILU factorization failed: {exc}") from exc
        u_int, info = spla.gmres(
            k_int, rhs, rtol=tol, atol=0.0, maxiter=maxiter, M=precond
        )
        if info != 0:
            raise SolverDivergence(
                f"gmres failed to reach rtol={tol:.1e} within {maxiter} iterations"
            )
    else:
        raise ValueError(f"unknown backend {backend!r}")
    resid = np.linalg.norm(k_int @ u_int - rhs)
    scale = np.linalg.norm(rhs)
    if resid > max(1e-8, tol) * max(scale, 1e-30):
        raise SolverDivergence(
            f"resolvent residual {resid:.3e} exceeds tolerance at alpha={alpha}"
        )
    u = np.zeros(form.mesh.num_vertices)
    u[interior] = u_int
    return FeFunction(mesh=form.mesh, values=u)


@dataclass
class ContractionReport:
    rows: list  # (alpha, trial index, ratio)
    max_ratio: float


def check_contraction(
    form: FormMatrices,
    alphas=(1.0, 10.0, 100.0, 1000.0),
    trials: int = 5,
    seed: int = 0,
    tol: float = 1e-10,
) -> ContractionReport:
    """Verify ||alpha G_alpha f|| <= ||f|| in L^2(mu) for random trial data.

    Raises ContractionViolation if any ratio exceeds 1 + tol.
    """
    rng = np.random.default_rng(seed)
    n = form.mesh.num_vertices
    rows = []
    worst = 0.0
    for alpha in alphas:
        for t in range(trials):
            f = np.zeros(n)
            f[form.interior] = rng.standard_normal(form.interior.size)
            u = solve_resolvent(form, alpha, f)
            ratio = alpha * form.l2_norm(u.values) / form.l2_norm(f)
            rows.append((float(alpha), t, float(ratio)))
            worst = max(worst, ratio)
            if ratio > 1.0 + tol:
                raise ContractionViolation(
                    f"||alpha G_alpha f|| / ||f|| = {ratio:.12f} at alpha={alpha}"
                )
    return ContractionReport(rows=rows, max_ratio=float(worst))


@dataclass
class ResolventIdentityReport:
    alpha: float
    beta: float
    defect: float
    relative_defect: float


def check_resolvent_identity(
    form: FormMatrices, alpha: float, beta: float, f
) -> ResolventIdentityReport:
    """Defect of G_alpha - G_beta - (beta - alpha) G_alpha G_beta applied to f."""
    u_a = solve_resolvent(form, alpha, f)
    u_b = solve_resolvent(form, beta, f)
    w = solve_resolvent(form, alpha, u_b)
    defect_vec = u_a.values - u_b.values - (beta - alpha) * w.values
    defect = form.l2_norm(defect_vec)
    f_vec = f.values if isinstance(f, FeFunction) else np.asarray(f, dtype=float)
    return ResolventIdentityReport(
        alpha=float(alpha),
        beta=float(beta),
        defect=float(defect),
        relative_defect=float(defect / form.l2_norm(f_vec)),
    )


@dataclass
class SubmarkovReport:
    alpha: float
    min_value: float
    max_value: float
    lumped: bool


def check_submarkov(
    form: FormMatrices,
    alpha: float,
    f=None,
    lump_mass: bool = True,
    tol: float = 1e-8,
) -> SubmarkovReport:
    """Check 0 <= alpha G_alpha f <= 1 for indicator-like data 0 <= f <= 1.

    Precondition: the mesh acuteness flag holds or mass lumping is enabled
    (default); with a lumped weighted mass and non-positive stiffness
    off-diagonals the system matrix is an M-matrix and the bounds are exact
    in exact arithmetic. Raises SubmarkovViolation beyond tol.
    """
    n = form.mesh.num_vertices
    if f is None:
        f_vec = np.zeros(n)
        f_vec[form.interior] = 1.0
    else:
        f_vec = f.values if isinstance(f, FeFunction) else np.asarray(f, dtype=float)
    if f_vec.min() < -1e-14 or f_vec.max() > 1 + 1e-14:
        raise ValueError("submarkov trial data must satisfy 0 <= f <= 1")
    u = solve_resolvent(form, alpha, f_vec, _lumped=lump_mass)
    lo = float(alpha * u.values.min())
    hi = float(alpha * u.values.max())
    if lo < -tol or hi > 1.0 + tol:
        raise SubmarkovViolation(
            f"alpha G_alpha f has range [{lo:.3e}, {hi:.3e}] at alpha={alpha}"
        )
    return SubmarkovReport(alpha=float(alpha), min_value=lo, max_value=hi, lumped=lump_mass)


def apply_generator(form: FormMatrices, u) -> FeFunction:
    """L_h u = -M^-1 (S + D) u on interior DOFs (zero on the boundary).

    Satisfies E(u, v) = -<M L_h u, v> for interior v, and together with the
    resolvent: (alpha - L_h) G_alpha f = f exactly.
    """
    u_vec = u.values if isinstance(u, FeFunction) else np.asarray(u, dtype=float)
    interior = form.interior
    z = ((form.s + form.d) @ u_vec)[interior]
    m_int = form.m[interior][:, interior].tocsc()
    w = spla.splu(m_int).solve(z)
    out = np.zeros(form.mesh.num_vertices)
    out[interior] = -w
    return FeFunction(mesh=form.mesh, values=out)


def first_dirichlet_eigenpair(form: FormMatrices):
    """Smallest eigenpair of S psi = lam M psi on interior DOFs.

    Intended for the symmetric (drift-free) oracle cases; the stiffness is
    symmetrized defensively before the call into ARPACK.
    """
    interior = form.interior
    s_int = form.s[interior][:, interior]
    s_int = 0.5 * (s_int + s_int.T)
    m_int = form.m[interior][:, interior]
    # fixed ARPACK start vector: a random v0 would make repeat calls differ
    # in the last bits and break byte-identical reports
    v0 = np.ones(s_int.shape[0])
    vals, vecs = spla.eigsh(
        s_int.tocsc(), k=1, M=m_int.tocsc(), sigma=0.0, which="LM", v0=v0
    )
    lam = float(vals[0])
    psi_int = vecs[:, 0]
    psi = np.zeros(form.mesh.num_vertices)
    psi[interior] = psi_int
    nrm = float(np.sqrt(psi @ (form.m @ psi)))
    psi /= nrm
    if psi[interior].sum() < 0:
        psi = -psi
    return lam, FeFunction(mesh=form.mesh, values=psi)


@dataclass
class StrongContinuityReport:
    alphas: np.ndarray
    gaps: np.ndarray
    final_bound: float
    monotone: bool


def strong_continuity_gaps(
    form: FormMatrices, f, alphas=DEFAULT_ALPHAS
) -> StrongContinuityReport:
    """Gaps ||alpha G_alpha f - f||_{L^2(mu)} over an increasing alpha grid.

    Also evaluates the discrete bound ||(S + D) f||_{M^-1} / alpha_max that
    the final gap must stay below (with 10% slack, per the interior-data
    contraction argument).
    """
    f_raw = f.values if isinstance(f, FeFunction) else np.asarray(f, dtype=float)
    interior = form.interior
    f_vec = np.zeros_like(f_raw)
    f_vec[interior] = f_raw[interior]
    alphas = np.asarray(sorted(float(a) for a in alphas))
    gaps = np.zeros(alphas.size)
    for i, alpha in enumerate(alphas):
        u = solve_resolvent(form, alpha, f_vec)
        gaps[i] = form.l2_norm(alpha * u.values - f_vec)
    z = ((form.s + form.d) @ f_vec)[interior]
    m_int = form.m[interior][:, interior].tocsc()
    w = spla.splu(m_int).solve(z)
    final_bound = float(np.sqrt(max(z @ w, 0.0))) / alphas[-1]
    monotone = bool((np.diff(gaps) <= 1e-12 + 1e-9 * gaps[:-1]).all())
    return StrongContinuityReport(
        alphas=alphas, gaps=gaps, final_bound=final_bound, monotone=monotone
    )


@dataclass
class ResolventSweepReport:
    """Per-alpha diagnostics for serialization by the command line tools."""

    alphas: list
    contraction_ratios: list
    residuals: list
    identity_defect: float
    submarkov_min: float
    submarkov_max: float
    backend: str
    d_mode: str


def resolvent_sweep(
    form: FormMatrices,
    alphas=DEFAULT_ALPHAS,
    backend: str = "direct",
    seed: int = 0,
) -> ResolventSweepReport:
    """Run the standard per-alpha checks used by the resolvent report."""
    rng = np.random.default_rng(seed)
    n = form.mesh.num_vertices
    f = np.zeros(n)
    f[form.interior] = rng.standard_normal(form.interior.size)
    f_norm = form.l2_norm(f)
    ratios = []
    residuals = []
    for alpha in alphas:
        u = solve_resolvent(form, alpha, f, backend=backend)
        ratios.append(float(alpha * form.l2_norm(u.values) / f_norm))
        k_int, m_used = _interior_system(form, alpha)
        rhs = (m_used @ f)[form.interior]
        residuals.append(
            float(np.linalg.norm(k_int @ u.values[form.interior] - rhs))
        )
    ident = check_resolvent_identity(
        form, alphas[0], alphas[min(2, len(alphas) - 1)], f
    )
    sub = check_submarkov(form, alphas[0])
    return ResolventSweepReport(
        alphas=[float(a) for a in alphas],
        contraction_ratios=ratios,
        residuals=residuals,
        identity_defect=ident.relative_defect,
        submarkov_min=sub.min_value,
        submarkov_max=sub.max_value,
        backend=backend,
        d_mode=form.d_mode,
    )

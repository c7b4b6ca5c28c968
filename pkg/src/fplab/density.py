"""Invariant density construction and drift decomposition.

The stationarity problem on a bounded mesh tests against EVERY P1 function
(boundary vertices included), the natural no-flux analog of the whole-space
identity int <a^T grad(rho) - rho H, grad(phi)> dx = 0. Its matrix is the
transpose of the drift-diffusion operator matrix, so the density spans the
kernel of the adjoint system, exactly as in the continuum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .coefficients import CoefficientSet
from .errors import DensityNotPositive, KernelDimensionError
from .fem import (
    FeFunction,
    assemble_drift,
    assemble_load,
    assemble_weighted_stiffness,
    lumped_weights,
    matrix_at_quad,
    physical_quad_points,
    vector_at_quad,
)
from .mesh import SimplicialMesh
from .quadrature import QuadratureRule, quadrature_rule


@dataclass
class DensityField:
    """Normalized positive stationary density with solve diagnostics."""

    rho: FeFunction
    rho_min: float
    rho_max: float
    residual: float
    residual_scale: float
    normalized: bool = True


@dataclass
class DriftDecomposition:
    """The divergence-free drift B = H - (a^T grad rho) / rho at quadrature points."""

    b_quad: np.ndarray  # (ne, nq, dim)
    rule: QuadratureRule
    rho: FeFunction
    quadratic_defect: float  # max_j |int <B, grad(phi_j^2)> rho dx|, interior j


def stationarity_matrix(
    mesh: SimplicialMesh, cs: CoefficientSet, rule: Optional[QuadratureRule] = None
) -> sp.csr_matrix:
    """Matrix K with K[j, i] = int <a^T grad(phi_i) - phi_i H, grad(phi_j)> dx.

    Row j is the stationarity equation tested against phi_j; K is the
    transpose of the assembled drift-diffusion operator S + D.
    """
    rule = rule or quadrature_rule(mesh.dim)
    s = assemble_weighted_stiffness(mesh, cs.a, rho=None, rule=rule)
    d = assemble_drift(mesh, cs.drift, rho=None, rule=rule)
    return (s + d).T.tocsr()


def _pinned_solve(k: sp.csr_matrix, pin: int) -> np.ndarray:
    n = k.shape[0]
    keep = np.concatenate([np.arange(pin), np.arange(pin + 1, n)])
    sub = k[keep][:, keep].tocsc()
    rhs = -np.asarray(k[keep][:, [pin]].todense()).ravel()
    lu = spla.splu(sub)
    x = lu.solve(rhs)
    full = np.empty(n)
    full[pin] = 1.0
    full[keep] = x
    return full


def _inverse_iteration(k: sp.csr_matrix, tol: float) -> np.ndarray:
    scale = float(abs(k).sum() / k.shape[0]) or 1.0
    shifted = (k + (1e-10 * scale) * sp.identity(k.shape[0], format="csr")).tocsc()
    lu = spla.splu(shifted)
    v = np.ones(k.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(100):
        v = lu.solve(v)
        v /= np.linalg.norm(v)
        if np.linalg.norm(k @ v) <= tol * scale:
            break
    return v


def solve_invariant_density(
    mesh: SimplicialMesh,
    cs: CoefficientSet,
    rule: Optional[QuadratureRule] = None,
    tol: float = 1e-9,
) -> DensityField:
    """Compute the positive kernel vector of the stationarity system.

    Solves K rho = 0 by pinning one interior vertex to 1 and solving the
    reduced system; a second solve with a different pin certifies that the
    kernel is one-dimensional. Falls back to inverse iteration if a pinned
    system is singular. The result is normalized to unit mean over the mesh.

    Raises
    ------
    KernelDimensionError
        If the two pinned solves disagree beyond 1e-8 after normalization,
        or the kernel vector cannot be normalized.
    DensityNotPositive
        If any vertex value of the normalized density is <= 0.
    """
    rule = rule or quadrature_rule(mesh.dim)
    k = stationarity_matrix(mesh, cs, rule)
    interior = mesh.interior
    center = mesh.vertices.mean(axis=0)
    dist = np.linalg.norm(mesh.vertices[interior] - center, axis=1)
    pins = [int(interior[np.argmin(dist)]), int(interior[np.argmax(dist)])]
    if pins[0] == pins[1]:
        pins[1] = int(interior[0]) if interior[0] != pins[0] else int(interior[-1])

    weights = lumped_weights(mesh)
    volume = float(weights.sum())

    candidates = []
    for pin in pins:
        try:
            v = _pinned_solve(k, pin)
        except RuntimeError:
            v = _inverse_iteration(k, tol)
        mean = float(weights @ v) / volume
        if abs(mean) < 1e-300:
            raise DensityNotPositive("kernel vector has vanishing mean")
        candidates.append(v / mean)

    gap = float(np.abs(candidates[0] - candidates[1]).max())
    ref = float(np.abs(candidates[0]).max())
    if gap > 1e-8 * max(ref, 1.0):
        raise KernelDimensionError(
            f"pinned solves disagree by {gap:.3e}; kernel is not one-dimensional "
            "within tolerance"
        )
    rho_vec = candidates[0]

    residual = float(np.abs(k @ rho_vec).max())
    scale = float(abs(k).max()) * float(np.abs(rho_vec).max())
    if residual > tol * max(scale, 1.0):
        raise KernelDimensionError(
            f"stationarity residual {residual:.3e} exceeds {tol:.1e} * {scale:.3e}"
        )

    if rho_vec.min() <= 0:
        raise DensityNotPositive(
            f"density has non-positive vertex value {rho_vec.min():.3e}"
        )
    rho = FeFunction(mesh=mesh, values=rho_vec)
    return DensityField(
        rho=rho,
        rho_min=float(rho_vec.min()),
        rho_max=float(rho_vec.max()),
        residual=residual,
        residual_scale=scale,
    )


def decompose_drift(
    mesh: SimplicialMesh,
    cs: CoefficientSet,
    density: DensityField,
    rule: Optional[QuadratureRule] = None,
) -> DriftDecomposition:
    """Evaluate B = H - (a^T grad rho) / rho at quadrature points.

    B is invariant under rescaling of rho. The quadratic defect
    max_j |int <B, grad(phi_j^2)> rho dx| over interior j is reported (it
    vanishes only in the continuum; it must decay under refinement).
    """
    rule = rule or quadrature_rule(mesh.dim)
    pts = physical_quad_points(mesh, rule)
    rho_q = density.rho.at_quad(rule)
    if (rho_q <= 0).any():
        raise DensityNotPositive(
            f"density is not positive at a quadrature point: {rho_q.min():.3e}"
        )
    a_q = matrix_at_quad(cs.a, mesh, rule, pts)
    h_q = vector_at_quad(cs.drift, mesh, rule, pts)
    grad_rho = density.rho.element_gradients()
    flux = np.einsum("eqba,eb->eqa", a_q, grad_rho)
    b_quad = h_q - flux / rho_q[:, :, None]

    d_b = assemble_drift(mesh, b_quad, rho=density.rho, rule=rule)
    defect_all = -2.0 * d_b.diagonal()
    defect = float(np.abs(defect_all[mesh.interior]).max())
    return DriftDecomposition(
        b_quad=b_quad, rule=rule, rho=density.rho, quadratic_defect=defect
    )


def divergence_free_residual(
    mesh: SimplicialMesh, decomposition: DriftDecomposition
) -> dict:
    """Residuals r_j = int <B, grad phi_j> rho dx against interior tests.

    By construction of B this equals the stationarity-equation residual of
    the solved density (same quadrature, same samples), so it inherits the
    linear-solver tolerance.
    """
    vec = assemble_load(
        mesh,
        flux=decomposition.b_quad,
        rho=decomposition.rho,
        rule=decomposition.rule,
    )
    interior = mesh.interior
    max_resid = float(np.abs(vec[interior]).max())
    return {
        "max_residual": max_resid,
        "per_test": vec,
        "interior": interior,
        "quadratic_defect": decomposition.quadratic_defect,
    }

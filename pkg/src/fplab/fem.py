"""P1 finite element core: interpolation, weighted assembly, norms.

All bilinear forms follow one orientation convention: the assembled entry
(i, j) pairs test function i with trial function j, so a quadratic form
evaluates as v^T K u for trial vector u and test vector v.

Field arguments are flexible: scalars/arrays mean constants, callables are
sampled at quadrature points (vectorized over an (n, dim) array when the
callable supports it, pointwise otherwise), FeFunctions are interpolated,
and pre-evaluated arrays of shape (ne, nq, ...) pass through unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp

from .errors import EmptyInterior, NonEllipticSample, NonFiniteValue, NonPositiveDensity
from .mesh import SimplicialMesh
from .quadrature import DEFAULT_DEGREE, QuadratureRule, quadrature_rule


@dataclass
class FeFunction:
    """Piecewise-linear function given by vertex values on a fixed mesh."""

    mesh: SimplicialMesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.num_vertices,):
            raise ValueError(
                f"value vector has shape {self.values.shape}, expected ({self.mesh.num_vertices},)"
            )

    def at_quad(self, rule: QuadratureRule) -> np.ndarray:
        """Values at quadrature points, shape (ne, nq)."""
        local = self.values[self.mesh.elements]
        return np.einsum("qk,ek->eq", rule.points, local)

    def element_gradients(self) -> np.ndarray:
        """Constant-per-element gradients, shape (ne, dim)."""
        grads, _ = element_geometry(self.mesh)
        local = self.values[self.mesh.elements]
        return np.einsum("eak,ek->ea", grads, local)


def element_geometry(mesh: SimplicialMesh):
    """Per-element basis gradients and volumes.

    Returns
    -------
    grads : ndarray, shape (ne, dim, dim + 1)
        Column k holds grad of the barycentric basis function of vertex k.
    vols : ndarray, shape (ne,)
    """
    coords = mesh.element_coords()
    ne, nloc, dim = coords.shape
    aug = np.concatenate([np.ones((ne, nloc, 1)), coords], axis=2)
    cinv = np.linalg.inv(aug)
    grads = cinv[:, 1:, :]
    vols = mesh.volumes()
    return grads, vols


def physical_quad_points(mesh: SimplicialMesh, rule: QuadratureRule) -> np.ndarray:
    """Quadrature point coordinates, shape (ne, nq, dim)."""
    coords = mesh.element_coords()
    return np.einsum("qk,ekd->eqd", rule.points, coords)


def _eval_callable(f: Callable, pts_flat: np.ndarray, out_shape: tuple):
    try:
        out = np.asarray(f(pts_flat), dtype=float)
        if out.shape == (pts_flat.shape[0],) + out_shape:
            return out
    except Exception:
        pass
    out = np.empty((pts_flat.shape[0],) + out_shape)
    for i, x in enumerate(pts_flat):
        out[i] = f(x)
    return out


def _finite_or_raise(arr: np.ndarray, what: str):
    if not np.isfinite(arr).all():
        raise NonFiniteValue(f"{what} produced a non-finite value")


def scalar_at_quad(field, mesh, rule, pts=None) -> np.ndarray:
    """Sample a scalar field at quadrature points, shape (ne, nq)."""
    ne, nq = mesh.num_elements, rule.weights.shape[0]
    if isinstance(field, FeFunction):
        return field.at_quad(rule)
    if np.isscalar(field):
        return np.full((ne, nq), float(field))
    if isinstance(field, np.ndarray):
        if field.shape == (ne, nq):
            return field
        raise ValueError(f"scalar field array has shape {field.shape}, expected ({ne}, {nq})")
    if pts is None:
        pts = physical_quad_points(mesh, rule)
    out = _eval_callable(field, pts.reshape(-1, mesh.dim), ()).reshape(ne, nq)
    _finite_or_raise(out, "scalar field")
    return out


def vector_at_quad(field, mesh, rule, pts=None) -> np.ndarray:
    """Sample a vector field at quadrature points, shape (ne, nq, dim)."""
    ne, nq, dim = mesh.num_elements, rule.weights.shape[0], mesh.dim
    if isinstance(field, np.ndarray):
        if field.shape == (ne, nq, dim):
            return field
        if field.shape == (dim,):
            return np.broadcast_to(field, (ne, nq, dim))
        raise ValueError(f"vector field array has shape {field.shape}")
    if pts is None:
        pts = physical_quad_points(mesh, rule)
    out = _eval_callable(field, pts.reshape(-1, dim), (dim,)).reshape(ne, nq, dim)
    _finite_or_raise(out, "vector field")
    return out


def matrix_at_quad(field, mesh, rule, pts=None) -> np.ndarray:
    """Sample a matrix field at quadrature points, shape (ne, nq, dim, dim)."""
    ne, nq, dim = mesh.num_elements, rule.weights.shape[0], mesh.dim
    if isinstance(field, np.ndarray):
        if field.shape == (ne, nq, dim, dim):
            return field
        if field.shape == (dim, dim):
            return np.broadcast_to(field, (ne, nq, dim, dim))
        raise ValueError(f"matrix field array has shape {field.shape}")
    if pts is None:
        pts = physical_quad_points(mesh, rule)
    out = _eval_callable(field, pts.reshape(-1, dim), (dim, dim)).reshape(ne, nq, dim, dim)
    _finite_or_raise(out, "matrix field")
    return out


def _density_at_quad(rho, mesh, rule, pts, allow_signed=False) -> np.ndarray:
    if rho is None:
        rho = 1.0
    vals = scalar_at_quad(rho, mesh, rule, pts)
    if not allow_signed and (vals <= 0).any():
        raise NonPositiveDensity(
            f"weight has non-positive quadrature value {vals.min():.3e}"
        )
    return vals


def interpolate(mesh: SimplicialMesh, f) -> FeFunction:
    """Vertex interpolant of a callable (or constant) scalar field."""
    if np.isscalar(f):
        vals = np.full(mesh.num_vertices, float(f))
    else:
        vals = _eval_callable(f, mesh.vertices, ())
    if not np.isfinite(vals).all():
        raise NonFiniteValue("interpolated values contain NaN or inf")
    return FeFunction(mesh=mesh, values=vals)


def _scatter(mesh: SimplicialMesh, local: np.ndarray) -> sp.csr_matrix:
    ne, nloc, _ = local.shape
    rows = np.repeat(mesh.elements, nloc, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, nloc)).ravel()
    nv = mesh.num_vertices
    return sp.coo_matrix((local.ravel(), (rows, cols)), shape=(nv, nv)).tocsr()


def assemble_weighted_stiffness(
    mesh: SimplicialMesh,
    a,
    rho=None,
    rule: Optional[QuadratureRule] = None,
) -> sp.csr_matrix:
    """Assemble S with S[i, j] = int <a grad(phi_j), grad(phi_i)> rho dx."""
    rule = rule or quadrature_rule(mesh.dim)
    pts = physical_quad_points(mesh, rule)
    grads, vols = element_geometry(mesh)
    a_q = matrix_at_quad(a, mesh, rule, pts)
    rho_q = _density_at_quad(rho, mesh, rule, pts)
    local = np.einsum(
        "eai,eqab,ebj,eq,q->eij", grads, a_q, grads, rho_q, rule.weights, optimize=True
    )
    local *= vols[:, None, None]
    return _scatter(mesh, local)


def assemble_drift(
    mesh: SimplicialMesh,
    b,
    rho=None,
    rule: Optional[QuadratureRule] = None,
) -> sp.csr_matrix:
    """Assemble D with D[i, j] = -int <b, grad(phi_j)> phi_i rho dx."""
    rule = rule or quadrature_rule(mesh.dim)
    pts = physical_quad_points(mesh, rule)
    grads, vols = element_geometry(mesh)
    b_q = vector_at_quad(b, mesh, rule, pts)
    rho_q = _density_at_quad(rho, mesh, rule, pts)
    local = -np.einsum(
        "qi,eqa,eaj,eq,q->eij", rule.points, b_q, grads, rho_q, rule.weights,
        optimize=True,
    )
    local *= vols[:, None, None]
    return _scatter(mesh, local)


def assemble_weighted_mass(
    mesh: SimplicialMesh,
    rho=None,
    rule: Optional[QuadratureRule] = None,
    allow_signed: bool = False,
) -> sp.csr_matrix:
    """Assemble M with M[i, j] = int phi_i phi_j rho dx.

    allow_signed admits sign-changing weights (zero-order coefficients);
    the default insists on a positive density.
    """
    rule = rule or quadrature_rule(mesh.dim)
    pts = physical_quad_points(mesh, rule)
    _, vols = element_geometry(mesh)
    rho_q = _density_at_quad(rho, mesh, rule, pts, allow_signed=allow_signed)
    local = np.einsum(
        "qi,qj,eq,q->eij", rule.points, rule.points, rho_q, rule.weights, optimize=True
    )
    local *= vols[:, None, None]
    return _scatter(mesh, local)


def assemble_load(
    mesh: SimplicialMesh,
    f=None,
    flux=None,
    rho=None,
    rule: Optional[QuadratureRule] = None,
) -> np.ndarray:
    """Assemble the vector int f phi_i rho dx + int <flux, grad(phi_i)> rho dx."""
    rule = rule or quadrature_rule(mesh.dim)
    pts = physical_quad_points(mesh, rule)
    grads, vols = element_geometry(mesh)
    rho_q = _density_at_quad(rho, mesh, rule, pts, allow_signed=True)
    local = np.zeros((mesh.num_elements, mesh.dim + 1))
    if f is not None:
        f_q = scalar_at_quad(f, mesh, rule, pts)
        local += np.einsum("eq,qi,eq,q->ei", f_q, rule.points, rho_q, rule.weights)
    if flux is not None:
        flux_q = vector_at_quad(flux, mesh, rule, pts)
        local += np.einsum("eqa,eai,eq,q->ei", flux_q, grads, rho_q, rule.weights)
    local *= vols[:, None]
    out = np.zeros(mesh.num_vertices)
    np.add.at(out, mesh.elements.ravel(), local.ravel())
    return out


def lumped_weights(mesh: SimplicialMesh, rho=None) -> np.ndarray:
    """Row sums of the weighted mass matrix: w_i = int phi_i rho dx."""
    return assemble_load(mesh, f=1.0, rho=rho)


def quadrature_norm(
    mesh: SimplicialMesh,
    values,
    p: float = 2.0,
    weight=None,
    rule: Optional[QuadratureRule] = None,
) -> float:
    """L^p norm of a scalar quantity sampled at quadrature points.

    `values` may be anything scalar_at_quad accepts. weight is a density
    (None for Lebesgue measure). p = inf takes the max over samples.
    """
    rule = rule or quadrature_rule(mesh.dim)
    pts = physical_quad_points(mesh, rule)
    vals = scalar_at_quad(values, mesh, rule, pts)
    if np.isinf(p):
        return float(np.abs(vals).max())
    if p <= 0:
        raise ValueError(f"norm exponent must be positive, got {p}")
    rho_q = _density_at_quad(weight, mesh, rule, pts)
    _, vols = element_geometry(mesh)
    total = np.einsum("eq,eq,q,e->", np.abs(vals) ** p, rho_q, rule.weights, vols)
    return float(total ** (1.0 / p))


def norm(u: FeFunction, p: float = 2.0, weight=None, rule=None) -> float:
    """L^p(weight dx) norm of an FE function; p = inf is the max vertex magnitude."""
    if np.isinf(p):
        return float(np.abs(u.values).max())
    return quadrature_norm(u.mesh, u, p=p, weight=weight, rule=rule)


def h1_seminorm(u: FeFunction, a=None, weight=None, rule=None) -> float:
    """(int <a grad u, grad u> weight dx)^(1/2) with a = id by default.

    Raises NonEllipticSample if the quadratic form goes negative beyond
    roundoff at any quadrature point.
    """
    mesh = u.mesh
    rule = rule or quadrature_rule(mesh.dim)
    pts = physical_quad_points(mesh, rule)
    grads, vols = element_geometry(mesh)
    gu = np.einsum("eak,ek->ea", grads, u.values[mesh.elements])
    if a is None:
        q = np.einsum("ea,ea->e", gu, gu)[:, None] * np.ones(rule.weights.shape[0])
    else:
        a_q = matrix_at_quad(a, mesh, rule, pts)
        q = np.einsum("ea,eqab,eb->eq", gu, a_q, gu)
    scale = max(float(np.abs(q).max()), 1.0)
    if (q < -1e-12 * scale).any():
        raise NonEllipticSample(
            f"quadratic form sample {q.min():.3e} is negative beyond roundoff"
        )
    q = np.clip(q, 0.0, None)
    rho_q = _density_at_quad(weight, mesh, rule, pts)
    total = np.einsum("eq,eq,q,e->", q, rho_q, rule.weights, vols)
    return float(np.sqrt(total))


def l2_error(u: FeFunction, exact, weight=None, rule=None) -> float:
    """L^2(weight dx) distance between an FE function and a callable."""
    mesh = u.mesh
    rule = rule or quadrature_rule(mesh.dim)
    pts = physical_quad_points(mesh, rule)
    u_q = u.at_quad(rule)
    e_q = scalar_at_quad(exact, mesh, rule, pts)
    return quadrature_norm(mesh, u_q - e_q, p=2.0, weight=weight, rule=rule)


def apply_dirichlet(matrix: sp.spmatrix, rhs: np.ndarray, mesh: SimplicialMesh):
    """Restrict a system to interior degrees of freedom (zero boundary data).

    Returns (reduced_matrix, reduced_rhs, interior_indices).
    """
    interior = mesh.interior
    if interior.size == 0:
        raise EmptyInterior("mesh has no interior vertices")
    m = matrix.tocsr()[interior][:, interior]
    return m, rhs[interior], interior


def write_matrix(path, matrix: sp.spmatrix):
    """Coordinate-triplet text export: one `row col value` line per entry."""
    coo = sp.coo_matrix(matrix)
    order = np.lexsort((coo.col, coo.row))
    with open(path, "w") as fh:
        fh.write(f"{coo.shape[0]} {coo.shape[1]} {coo.nnz}\n")
        for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{r} {c} {float(v)!r}\n")


def read_matrix(path) -> sp.csr_matrix:
    with open(path) as fh:
        nr, nc, nnz = (int(t) for t in fh.readline().split())
        rows, cols, vals = [], [], []
        for _ in range(nnz):
            r, c, v = fh.readline().split()
            rows.append(int(r))
            cols.append(int(c))
            vals.append(float(v))
    return sp.coo_matrix((vals, (rows, cols)), shape=(nr, nc)).tocsr()


def write_vector(path, vec: np.ndarray, header: Optional[str] = None):
    with open(path, "w") as fh:
        if header:
            fh.write(f"# {header}\n")
        for v in np.asarray(vec, dtype=float):
            fh.write(f"{float(v)!r}\n")


def read_vector(path) -> np.ndarray:
    vals = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            vals.append(float(line))
    return np.asarray(vals)

"""Field evaluation and the interior/boundary relative error norms.

Interior norms are cell-area-weighted sums over a uniform grid masked to
the domain; points closer to the boundary than one cell diagonal are
dropped (the exclusion fraction is logged). Boundary norms reuse the
quadrature rule of the solve. Every relative error divides by the same
norm of the exact solution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .assembly import WaveProblem
from .errors import NumericalError, ValidationError
from .geometry import (BoundaryCurve, DomainRadii, QuadratureRule,
                       boundary_distance, grid_interior_mask)
from .special import basis_matrix
from .tikhonov import CoefficientVector

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InteriorGrid:
    """Uniform grid points strictly inside the domain."""

    points: np.ndarray               # (P, 2)
    cell_area: float
    resolution: int
    excluded_fraction: float         # near-boundary cells dropped


@dataclass(frozen=True)
class PlaneWave:
    """Exact solution u(x) = exp(i k x.d) with its gradient."""

    k: float
    direction: np.ndarray

    def value(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        return np.exp(1j * self.k * (pts @ np.asarray(self.direction)))

    def gradient(self, points: np.ndarray) -> np.ndarray:
        d = np.asarray(self.direction)
        u = self.value(points)
        return 1j * self.k * u[:, None] * d[None, :]


@dataclass(frozen=True)
class ErrorReport:
    """The four relative error norms plus run metadata."""

    rel_l2_interior: float
    rel_h1semi_interior: float
    rel_l2_boundary: float
    rel_l2_normal_derivative: float
    metadata: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "rel_l2_interior": self.rel_l2_interior,
            "rel_h1semi_interior": self.rel_h1semi_interior,
            "rel_l2_boundary": self.rel_l2_boundary,
            "rel_l2_normal_derivative": self.rel_l2_normal_derivative,
            "metadata": self.metadata,
        }


def build_interior_grid(curve: BoundaryCurve, radii: DomainRadii,
                        resolution: int = 200) -> InteriorGrid:
    """Tensor grid over [-r_ex_min, r_ex_min]^2 masked to the interior."""
    if resolution < 32:
        raise ValidationError("grid_too_coarse",
                              f"grid resolution must be >= 32, got {resolution}")
    half = radii.r_ex_min
    step = 2.0 * half / resolution
    centers = -half + step * (np.arange(resolution) + 0.5)
    inside = grid_interior_mask(curve, centers, centers)
    xx, yy = np.meshgrid(centers, centers)
    interior_pts = np.column_stack([xx[inside], yy[inside]])
    clearance = step * np.sqrt(2.0)                      # one cell diagonal
    dist = boundary_distance(curve, interior_pts, resolution=256, chunk=4096)
    keep = dist >= clearance
    excluded = 1.0 - keep.sum() / max(1, interior_pts.shape[0])
    logger.debug("interior grid: %d points, %.2f%% near-boundary cells dropped",
                 int(keep.sum()), 100.0 * excluded)
    kept = interior_pts[keep]
    if kept.shape[0] == 0:
        raise NumericalError("empty_interior_grid",
                             "no interior grid points survived masking")
    return InteriorGrid(points=kept, cell_area=step * step,
                        resolution=resolution, excluded_fraction=float(excluded))


def evaluate_field(problem: WaveProblem, c: CoefficientVector, points):
    """u_N at one point or an array of points (valid anywhere in the plane)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    values, _ = basis_matrix(problem.basis, c.order, pts, gradients=False)
    out = values @ c.coeffs
    if np.ndim(points) == 1:
        return complex(out[0])
    return out


def evaluate_gradient(problem: WaveProblem, c: CoefficientVector, points):
    """Cartesian gradient of u_N; complex shape (2,) or (P, 2)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    _, grads = basis_matrix(problem.basis, c.order, pts, gradients=True)
    out = np.einsum("pnd,n->pd", grads, c.coeffs)
    if np.ndim(points) == 1:
        return out[0]
    return out


def _relative(num: float, den: float, what: str) -> float:
    if den < 1e-14:
        raise NumericalError("degenerate_exact_norm",
                             f"exact-solution norm for {what} is below 1e-14")
    return float(num / den)


def error_report(problem: WaveProblem, c: CoefficientVector, exact,
                 grid: InteriorGrid, rule: QuadratureRule,
                 metadata: dict | None = None) -> ErrorReport:
    """Relative L2/H1-seminorm interior errors and L2 boundary errors.

    ``exact`` must provide vectorized value(points) and gradient(points).
    """
    u_num = evaluate_field(problem, c, grid.points)
    g_num = evaluate_gradient(problem, c, grid.points)
    u_ex = exact.value(grid.points)
    g_ex = exact.gradient(grid.points)

    root_area = np.sqrt(grid.cell_area)
    l2_num = root_area * np.linalg.norm(u_num - u_ex)
    l2_den = root_area * np.linalg.norm(u_ex)
    h1_num = root_area * np.linalg.norm(g_num - g_ex)
    h1_den = root_area * np.linalg.norm(g_ex)

    ub_num = evaluate_field(problem, c, rule.points)
    ub_ex = exact.value(rule.points)
    gb_num = evaluate_gradient(problem, c, rule.points)
    gb_ex = exact.gradient(rule.points)
    dn_num = np.sum(rule.normals * gb_num, axis=1)
    dn_ex = np.sum(rule.normals * gb_ex, axis=1)

    report = ErrorReport(
        rel_l2_interior=_relative(l2_num, l2_den, "interior L2"),
        rel_h1semi_interior=_relative(h1_num, h1_den, "interior H1 seminorm"),
        rel_l2_boundary=_relative(rule.boundary_norm(ub_num - ub_ex),
                                  rule.boundary_norm(ub_ex), "boundary L2"),
        rel_l2_normal_derivative=_relative(
            rule.boundary_norm(dn_num - dn_ex),
            rule.boundary_norm(dn_ex), "normal derivative"),
        metadata=dict(metadata or {}),
    )
    return report

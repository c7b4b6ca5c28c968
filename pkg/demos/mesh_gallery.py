"""Build the structured disk, ball, and box meshes and inspect their quality.

Walks through the mesh constructors, uniform refinement, the conformity
audit, and the exactness of the simplex quadrature rules.
"""

import numpy as np

from fplab import (
    build_ball_mesh,
    build_box_mesh,
    check_conformity,
    mesh_quality,
    quadrature_rule,
    refine_uniform,
)


def describe(label, mesh):
    quality = mesh_quality(mesh)
    audit = check_conformity(mesh)
    print(f"{label}:")
    print(f"  vertices {mesh.num_vertices}, elements {mesh.num_elements}, "
          f"boundary vertices {int(mesh.boundary.sum())}")
    print(f"  total volume {mesh.total_volume():.10f}")
    print(f"  max edge {quality['max_edge']:.4f}, "
          f"shape regularity {quality['shape_regularity']:.3f}, "
          f"acute {quality['acute']}")
    print(f"  conforming {audit['conforming']}")


if __name__ == "__main__":
    disk = build_ball_mesh((0.0, 0.0), 1.0, levels=0)
    describe("disk template (level 0)", disk)
    print("  exact 12-gon area is 6*sin(pi/6) = 3")
    print()

    for lv in (1, 2, 3):
        describe(f"disk level {lv}", build_ball_mesh((0.0, 0.0), 1.0, levels=lv))
        print()

    ball = build_ball_mesh((0.0, 0.0, 0.0), 1.0, levels=2)
    describe("ball level 2", ball)
    print(f"  volume gap to 4*pi/3: {4 * np.pi / 3 - ball.total_volume():.6f}")
    print()

    box = build_box_mesh((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), 2)
    describe("unit cube, 2 cells per axis", box)
    refined = refine_uniform(box)
    describe("after one uniform refinement", refined)
    print()

    # each rule integrates monomials exactly up to its degree; cartesian
    # coordinates on the reference simplex are the trailing barycentric ones
    rule = quadrature_rule(dim=2, degree=4)
    pts = rule.points[:, 1:]
    approx = 0.5 * float(rule.weights @ (pts[:, 0] ** 2 * pts[:, 1] ** 2))
    print(f"quadrature check on the reference triangle: "
          f"x^2 y^2 integrates to {approx:.12f} (exact 1/180 = {1 / 180:.12f})")

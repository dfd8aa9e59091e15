use super::TetMesh;
use crate::geom::tet_volume;
use crate::Vec3;

/// Lattice vertex offsets of the six Kuhn tetrahedra of a unit cube, all
/// sharing the diagonal from corner 0 to corner 7 (bit `k` = axis `k`).
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

/// Lattice of `(cells + 1)` points per axis mapped through `map`, split
/// into Kuhn tetrahedra with positive orientation in lattice space.
fn lattice(cells: [usize; 3], map: impl Fn(Vec3) -> Vec3) -> TetMesh {
    let [nx, ny, nz] = cells;
    let idx = |i: usize, j: usize, k: usize| (i + (nx + 1) * (j + (ny + 1) * k)) as u32;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                let unit = Vec3::new(i as f64 / nx as f64, j as f64 / ny as f64, k as f64 / nz as f64);
                vertices.push(map(unit));
            }
        }
    }
    let mut tets = Vec::with_capacity(6 * nx * ny * nz);
    let corner = |c: usize| ((c & 1), (c >> 1) & 1, (c >> 2) & 1);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                for kt in &KUHN {
                    let mut t = [0u32; 4];
                    let mut lat = [Vec3::zeros(); 4];
                    for (slot, &c) in kt.iter().enumerate() {
                        let (di, dj, dk) = corner(c);
                        t[slot] = idx(i + di, j + dj, k + dk);
                        lat[slot] = Vec3::new(di as f64, dj as f64, dk as f64);
                    }
                    if tet_volume(&lat[0], &lat[1], &lat[2], &lat[3]) < 0.0 {
                        t.swap(2, 3);
                    }
                    tets.push(t);
                }
            }
        }
    }
    TetMesh::new(vertices, tets).expect("lattice indices are in range")
}

pub(super) fn block(cells: [usize; 3], size: Vec3, origin: Vec3) -> TetMesh {
    lattice(cells, |u| origin + u.component_mul(&size))
}

/// Maps a point of the cube `[-1, 1]^3` onto the unit ball, shell by
/// shell, using the smooth cube-to-sphere surface map on each shell.
fn cube_to_ball(p: Vec3) -> Vec3 {
    let r = p.amax();
    if r == 0.0 {
        return Vec3::zeros();
    }
    let q = p / r;
    let (x2, y2, z2) = (q.x * q.x, q.y * q.y, q.z * q.z);
    let s = Vec3::new(
        q.x * (1.0 - y2 / 2.0 - z2 / 2.0 + y2 * z2 / 3.0).sqrt(),
        q.y * (1.0 - z2 / 2.0 - x2 / 2.0 + z2 * x2 / 3.0).sqrt(),
        q.z * (1.0 - x2 / 2.0 - y2 / 2.0 + x2 * y2 / 3.0).sqrt(),
    );
    s * r
}

pub(super) fn ellipsoid(resolution: usize, semi_axes: Vec3, center: Vec3) -> TetMesh {
    let n = resolution.max(1);
    lattice([n, n, n], |u| {
        let p = u * 2.0 - Vec3::repeat(1.0);
        center + cube_to_ball(p).component_mul(&semi_axes)
    })
}

/// Ellipsoid-like template halfway between a box and an ellipsoid.
/// `roundness = 1` is the radially projected ball; lower values keep the
/// corner cells from degenerating into slivers.
pub(super) fn rounded_ellipsoid(resolution: usize, semi_axes: Vec3, center: Vec3, roundness: f64) -> TetMesh {
    let n = resolution.max(1);
    lattice([n, n, n], |u| {
        let p = u * 2.0 - Vec3::repeat(1.0);
        let norm = p.norm();
        let ball = if norm == 0.0 { p } else { p * (p.amax() / norm) };
        center + (p * (1.0 - roundness) + ball * roundness).component_mul(&semi_axes)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_volume_and_positivity() {
        let m = block([3, 2, 4], Vec3::new(0.3, 0.2, 0.4), Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(m.tets.len(), 6 * 24);
        assert!(m.tet_volumes().iter().all(|&v| v > 0.0));
        assert!((m.volume() - 0.3 * 0.2 * 0.4).abs() < 1e-12);
    }

    #[test]
    fn ball_template_is_valid() {
        let m = ellipsoid(10, Vec3::repeat(0.05), Vec3::repeat(0.15));
        assert!(m.tet_volumes().iter().all(|&v| v > 0.0));
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 0.05f64.powi(3);
        assert!((m.volume() - exact).abs() / exact < 0.03, "{} vs {exact}", m.volume());
        for &s in &m.surface_vertex_ids {
            let r = (m.vertices[s as usize] - Vec3::repeat(0.15)).norm();
            assert!((r - 0.05).abs() < 1e-12);
        }
    }

    #[test]
    fn rounded_template_quality() {
        let m = rounded_ellipsoid(10, Vec3::new(0.09, 0.07, 0.05), Vec3::repeat(0.15), 0.6);
        assert!(m.min_tet_quality() > 0.1, "{}", m.min_tet_quality());
    }
}

use super::{MeshError, SurfaceMesh, TetMesh};
use crate::Vec3;
use std::collections::HashMap;

/// Faces of a positively oriented tet, wound so their normals point out.
const FACES: [[usize; 3]; 4] = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];

/// Faces belonging to exactly one tet, in first-seen order.
pub(super) fn boundary_faces(tets: &[[u32; 4]]) -> Vec<[u32; 3]> {
    let mut count: HashMap<[u32; 3], u32> = HashMap::with_capacity(tets.len() * 2);
    let mut all = Vec::with_capacity(tets.len() * 4);
    for t in tets {
        for f in &FACES {
            let face = [t[f[0]], t[f[1]], t[f[2]]];
            let mut key = face;
            key.sort_unstable();
            *count.entry(key).or_insert(0) += 1;
            all.push((key, face));
        }
    }
    all.into_iter()
        .filter(|(key, _)| count[key] == 1)
        .map(|(_, face)| face)
        .collect()
}

/// Boundary triangle mesh of `mesh`, wound outward.
pub fn extract_surface(mesh: &TetMesh) -> Result<SurfaceMesh, MeshError> {
    if mesh.tets.is_empty() {
        return Err(MeshError::Empty);
    }
    let faces = boundary_faces(&mesh.tets);
    let mut local = vec![u32::MAX; mesh.vertices.len()];
    for (i, &g) in mesh.surface_vertex_ids.iter().enumerate() {
        local[g as usize] = i as u32;
    }
    let triangles: Vec<[u32; 3]> = faces
        .iter()
        .map(|f| [local[f[0] as usize], local[f[1] as usize], local[f[2] as usize]])
        .collect();

    // Each directed edge once, and its reverse once: closed, consistently
    // wound 2-manifold.
    let mut directed: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 3);
    for t in &triangles {
        for i in 0..3 {
            *directed.entry((t[i], t[(i + 1) % 3])).or_insert(0) += 1;
        }
    }
    for (&(a, b), &n) in &directed {
        if n != 1 {
            return Err(MeshError::NonManifold(format!("edge ({a}, {b}) used {n} times with one winding")));
        }
        if directed.get(&(b, a)) != Some(&1) {
            return Err(MeshError::NonManifold(format!("edge ({a}, {b}) has no opposite half-edge")));
        }
    }

    let vertices: Vec<Vec3> = mesh
        .surface_vertex_ids
        .iter()
        .map(|&g| mesh.vertices[g as usize])
        .collect();
    let mut normals = vec![Vec3::zeros(); vertices.len()];
    for t in &triangles {
        let (a, b, c) = (vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]);
        let n = (b - a).cross(&(c - a));
        for &v in t {
            normals[v as usize] += n;
        }
    }
    for n in &mut normals {
        let len = n.norm();
        if len > 0.0 {
            *n /= len;
        }
    }
    Ok(SurfaceMesh {
        vertices,
        triangles,
        normals,
        source_ids: mesh.surface_vertex_ids.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_tet_has_four_outward_faces() {
        let m = TetMesh::new(
            vec![Vec3::zeros(), Vec3::x(), Vec3::y(), Vec3::z()],
            vec![[0, 1, 2, 3]],
        )
        .unwrap();
        let s = extract_surface(&m).unwrap();
        assert_eq!(s.triangles.len(), 4);
        let centroid = Vec3::repeat(0.25);
        for t in 0..4 {
            let [a, b, c] = s.triangle(t);
            let n = (b - a).cross(&(c - a));
            assert!(n.dot(&((a + b + c) / 3.0 - centroid)) > 0.0);
        }
        assert!(s.signed_volume() > 0.0);
    }

    #[test]
    fn block_surface_area() {
        let side = 0.2;
        let m = TetMesh::block([3, 3, 3], Vec3::repeat(side), Vec3::zeros());
        let s = extract_surface(&m).unwrap();
        // Two triangles per cube face square.
        assert_eq!(s.triangles.len(), 6 * 9 * 2);
        assert!((s.area() - 6.0 * side * side).abs() < 1e-12);
        assert_eq!(s.euler_characteristic(), 2);
        assert!((s.signed_volume() - side.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn edge_touching_tets_are_non_manifold() {
        let m = TetMesh::new(
            vec![
                Vec3::zeros(),
                Vec3::x(),
                Vec3::y(),
                Vec3::z(),
                Vec3::new(0.0, -1.0, 0.0),
                Vec3::new(0.0, 0.0, -1.0),
            ],
            vec![[0, 1, 2, 3], [0, 1, 4, 5]],
        )
        .unwrap();
        assert!(m.tet_volumes().iter().all(|&v| v > 0.0));
        assert!(matches!(extract_surface(&m), Err(MeshError::NonManifold(_))));
    }
}

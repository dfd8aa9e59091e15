//! Mesh interchange.
//!
//! Binary layout (all little-endian):
//!
//! ```text
//! b"DGMESH1"
//! u64 vertex_count
//! u64 tet_count
//! vertex_count * 3 * f64   x, y, z per vertex
//! tet_count * 4 * u32      vertex indices per tet
//! ```
//!
//! Surfaces can also be exported to Wavefront OBJ for inspection.

use super::{MeshError, SurfaceMesh, TetMesh};
use crate::io::{check_count, expect_magic, read_f64, read_u32, read_u64, write_f64, write_magic, write_u32, write_u64, FormatError};
use crate::Vec3;
use std::io::{Read, Write};

pub const MESH_MAGIC: &[u8; 7] = b"DGMESH1";

const MAX_ELEMENTS: u64 = 1 << 28;

pub fn write_mesh(w: &mut impl Write, mesh: &TetMesh) -> std::io::Result<()> {
    write_magic(w, MESH_MAGIC)?;
    write_u64(w, mesh.vertices.len() as u64)?;
    write_u64(w, mesh.tets.len() as u64)?;
    for v in &mesh.vertices {
        for &c in v.iter() {
            write_f64(w, c)?;
        }
    }
    for t in &mesh.tets {
        for &i in t {
            write_u32(w, i)?;
        }
    }
    Ok(())
}

pub fn read_mesh(r: &mut impl Read) -> Result<TetMesh, MeshError> {
    let fmt = |e: FormatError| MeshError::Format(e.to_string());
    expect_magic(r, MESH_MAGIC).map_err(fmt)?;
    let nv = check_count(read_u64(r)?, MAX_ELEMENTS, "vertex").map_err(fmt)?;
    let nt = check_count(read_u64(r)?, MAX_ELEMENTS, "tet").map_err(fmt)?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        vertices.push(Vec3::new(read_f64(r)?, read_f64(r)?, read_f64(r)?));
    }
    let mut tets = Vec::with_capacity(nt);
    for _ in 0..nt {
        tets.push([read_u32(r)?, read_u32(r)?, read_u32(r)?, read_u32(r)?]);
    }
    TetMesh::new(vertices, tets)
}

/// Wavefront OBJ text with one `v` line per vertex and one `f` per triangle.
pub fn write_obj(w: &mut impl Write, surface: &SurfaceMesh) -> std::io::Result<()> {
    writeln!(w, "# {} vertices, {} triangles", surface.vertices.len(), surface.triangles.len())?;
    for v in &surface.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for n in &surface.normals {
        writeln!(w, "vn {} {} {}", n.x, n.y, n.z)?;
    }
    for t in &surface.triangles {
        let (a, b, c) = (t[0] + 1, t[1] + 1, t[2] + 1);
        writeln!(w, "f {a}//{a} {b}//{b} {c}//{c}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{extract_surface, generate_random_organ, MeshGenConfig};

    #[test]
    fn binary_roundtrip_is_bitwise() {
        let m = generate_random_organ(3, &MeshGenConfig::default()).mesh;
        let mut buf = Vec::new();
        write_mesh(&mut buf, &m).unwrap();
        let back = read_mesh(&mut buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        write_mesh(&mut again, &back).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let m = TetMesh::block([1, 1, 1], Vec3::repeat(1.0), Vec3::zeros());
        let mut buf = Vec::new();
        write_mesh(&mut buf, &m).unwrap();
        buf[0] = b'X';
        assert!(matches!(read_mesh(&mut buf.as_slice()), Err(MeshError::Format(_))));
    }

    #[test]
    fn obj_export_lists_everything() {
        let s = extract_surface(&TetMesh::block([1, 1, 1], Vec3::repeat(1.0), Vec3::zeros())).unwrap();
        let mut buf = Vec::new();
        write_obj(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 8);
        assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), 12);
    }
}

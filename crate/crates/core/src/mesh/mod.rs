//! Random organ-like tetrahedral meshes: templates, random warping,
//! validity checks, boundary extraction and interchange formats.

mod generate;
pub mod io;
mod surface;
mod template;
mod validity;

pub use generate::{generate_random_organ, GeneratedOrgan, MeshGenConfig};
pub use surface::extract_surface;
pub use validity::{check_validity, self_intersecting_pairs, ValidityReport, MIN_TET_QUALITY};

use crate::geom::{tet_quality, tet_volume};
use crate::Vec3;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("boundary is not a closed 2-manifold: {0}")]
    NonManifold(String),
    #[error("mesh has no tetrahedra")]
    Empty,
    #[error("vertex index {index} out of range ({count} vertices)")]
    IndexOutOfRange { index: u32, count: usize },
    #[error("bad mesh file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Tetrahedral volume mesh. Positions in meters.
#[derive(Clone, Debug, PartialEq)]
pub struct TetMesh {
    pub vertices: Vec<Vec3>,
    pub tets: Vec<[u32; 4]>,
    /// Sorted indices of vertices on the boundary.
    pub surface_vertex_ids: Vec<u32>,
}

/// Closed boundary triangle mesh with its own compact vertex numbering.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[u32; 3]>,
    /// Unit outward normals per vertex (area weighted).
    pub normals: Vec<Vec3>,
    /// For each surface vertex, its index in the source [`TetMesh`].
    pub source_ids: Vec<u32>,
}

impl TetMesh {
    /// Builds a mesh and computes its boundary vertex set.
    pub fn new(vertices: Vec<Vec3>, tets: Vec<[u32; 4]>) -> Result<Self, MeshError> {
        if tets.is_empty() {
            return Err(MeshError::Empty);
        }
        for t in &tets {
            for &i in t {
                if i as usize >= vertices.len() {
                    return Err(MeshError::IndexOutOfRange {
                        index: i,
                        count: vertices.len(),
                    });
                }
            }
        }
        let mut mesh = Self {
            vertices,
            tets,
            surface_vertex_ids: Vec::new(),
        };
        let faces = surface::boundary_faces(&mesh.tets);
        let mut ids: Vec<u32> = faces.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        mesh.surface_vertex_ids = ids;
        Ok(mesh)
    }

    pub fn tet_positions(&self, t: usize) -> [Vec3; 4] {
        let [a, b, c, d] = self.tets[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
            self.vertices[d as usize],
        ]
    }

    pub fn tet_volumes(&self) -> Vec<f64> {
        (0..self.tets.len())
            .map(|t| {
                let [a, b, c, d] = self.tet_positions(t);
                tet_volume(&a, &b, &c, &d)
            })
            .collect()
    }

    pub fn volume(&self) -> f64 {
        self.tet_volumes().iter().sum()
    }

    pub fn min_tet_quality(&self) -> f64 {
        (0..self.tets.len())
            .map(|t| {
                let [a, b, c, d] = self.tet_positions(t);
                tet_quality(&a, &b, &c, &d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn translated(&self, offset: Vec3) -> Self {
        let mut m = self.clone();
        for v in &mut m.vertices {
            *v += offset;
        }
        m
    }

    /// Structured block `[origin, origin + size]` with `cells` cubes per
    /// axis, each split into six tetrahedra around its main diagonal.
    pub fn block(cells: [usize; 3], size: Vec3, origin: Vec3) -> Self {
        template::block(cells, size, origin)
    }

    /// Rounded box template used by the organ generator.
    pub fn rounded_ellipsoid(resolution: usize, semi_axes: Vec3, center: Vec3, roundness: f64) -> Self {
        template::rounded_ellipsoid(resolution, semi_axes, center, roundness)
    }

    /// Tetrahedralized ellipsoid with `resolution` cells across each axis.
    /// Surface vertices lie exactly on the ellipsoid; cells at the cube
    /// corner directions are thin, so use it for surface work.
    pub fn ellipsoid(resolution: usize, semi_axes: Vec3, center: Vec3) -> Self {
        template::ellipsoid(resolution, semi_axes, center)
    }
}

impl SurfaceMesh {
    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle(t);
        crate::geom::tri_area(&a, &b, &c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// One third of the area of the triangles adjacent to each vertex.
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut areas = vec![0.0; self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = self.triangle_area(t) / 3.0;
            for &v in tri {
                areas[v as usize] += a;
            }
        }
        areas
    }

    /// Enclosed volume by the divergence theorem; positive for outward
    /// winding.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (
                    self.vertices[a as usize],
                    self.vertices[b as usize],
                    self.vertices[c as usize],
                );
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |i| (t[i].min(t[(i + 1) % 3]), t[i].max(t[(i + 1) % 3]))))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Largest distance between any two vertices.
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Neighbor lists over the triangle edge graph.
    pub fn vertex_neighbors(&self) -> Vec<Vec<u32>> {
        let mut nb: Vec<Vec<u32>> = vec![Vec::new(); self.vertices.len()];
        for t in &self.triangles {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                nb[a as usize].push(b);
                nb[b as usize].push(a);
            }
        }
        for l in &mut nb {
            l.sort_unstable();
            l.dedup();
        }
        nb
    }
}

//! Regular grids over the simulation cube and the conversions from
//! meshes, boundary conditions and vertex fields into them.
//!
//! Grid points sit at `spacing * (i, j, k)` with `spacing = L / (n - 1)`,
//! so point 0 is the cube corner and point `n - 1` the opposite corner.
//! Multi-channel data is stored channel-planar, x fastest within each
//! channel: `data[c * n^3 + (k * n + j) * n + i]`.

mod grid_io;
mod sample;
mod sdf;
mod splat;

pub use grid_io::{read_grid, write_grid, write_vtk, GRID_MAGIC};
pub use sample::assemble_sample;
pub use sdf::{row_crossings, signed_distance_grid};
pub use splat::{rasterize_zero_region, shell_mask, splat_vertex_field};

use crate::Vec3;
use serde::{Deserialize, Serialize};

/// Sampling geometry shared by all channels of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub n: usize,
    pub side_length: f64,
}

impl GridGeometry {
    /// Panics if `n < 2` or the side length is not positive.
    pub fn new(n: usize, side_length: f64) -> Self {
        assert!(n >= 2, "grid needs at least 2 points per axis");
        assert!(side_length > 0.0, "grid side length must be positive");
        Self { n, side_length }
    }

    pub fn spacing(&self) -> f64 {
        self.side_length / (self.n - 1) as f64
    }

    /// Number of points, `n^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n + j) * self.n + i
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(i as f64, j as f64, k as f64) * self.spacing()
    }

    pub fn point_at(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.coords(idx);
        self.point(i, j, k)
    }

    /// Inclusive index range of grid lines within `[lo, hi]` along one axis.
    pub(crate) fn index_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let h = self.spacing();
        let a = (lo / h).ceil().max(0.0);
        let b = (hi / h).floor().min((self.n - 1) as f64);
        (a <= b).then_some((a as usize, b as usize))
    }
}

/// Scalar or vector channels on a regular grid, 32-bit floats.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid3 {
    pub geometry: GridGeometry,
    pub channels: usize,
    pub data: Vec<f32>,
}

impl Grid3 {
    pub fn zeros(geometry: GridGeometry, channels: usize) -> Self {
        Self {
            geometry,
            channels,
            data: vec![0.0; geometry.len() * channels],
        }
    }

    pub fn from_scalar(geometry: GridGeometry, values: &[f64]) -> Self {
        assert_eq!(values.len(), geometry.len());
        Self {
            geometry,
            channels: 1,
            data: values.iter().map(|&v| v as f32).collect(),
        }
    }

    pub fn from_vectors(geometry: GridGeometry, values: &[Vec3]) -> Self {
        assert_eq!(values.len(), geometry.len());
        let mut g = Self::zeros(geometry, 3);
        for c in 0..3 {
            for (dst, v) in g.channel_mut(c).iter_mut().zip(values) {
                *dst = v[c] as f32;
            }
        }
        g
    }

    pub fn channel(&self, c: usize) -> &[f32] {
        let m = self.geometry.len();
        &self.data[c * m..(c + 1) * m]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f32] {
        let m = self.geometry.len();
        &mut self.data[c * m..(c + 1) * m]
    }

    /// Three consecutive channels starting at `first`, read as vectors.
    pub fn vector_at(&self, first: usize, idx: usize) -> Vec3 {
        let m = self.geometry.len();
        Vec3::new(
            self.data[first * m + idx] as f64,
            self.data[(first + 1) * m + idx] as f64,
            self.data[(first + 2) * m + idx] as f64,
        )
    }

    /// Mirrors the grid along each axis with `flip[a]` set.
    pub fn mirrored(&self, flip: [bool; 3]) -> Self {
        let n = self.geometry.n;
        let m = self.geometry.len();
        let mut out = Self::zeros(self.geometry, self.channels);
        let map = |x: usize, f: bool| if f { n - 1 - x } else { x };
        for c in 0..self.channels {
            let src = &self.data[c * m..(c + 1) * m];
            let dst = &mut out.data[c * m..(c + 1) * m];
            for k in 0..n {
                for j in 0..n {
                    let (sj, sk) = (map(j, flip[1]), map(k, flip[2]));
                    for i in 0..n {
                        dst[(k * n + j) * n + i] = src[(sk * n + sj) * n + map(i, flip[0])];
                    }
                }
            }
        }
        out
    }
}

/// Kernel and scaling choices for voxelization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VoxelizeConfig {
    /// Gaussian kernel sigma in meters; `None` means 1.5 grid spacings.
    pub gaussian_bandwidth: Option<f64>,
    /// Support radius in multiples of sigma.
    pub kernel_cutoff: f64,
    /// Factor applied to the s and z input channels.
    pub channel_scale: f64,
}

impl Default for VoxelizeConfig {
    fn default() -> Self {
        Self {
            gaussian_bandwidth: None,
            kernel_cutoff: 3.0,
            channel_scale: 0.1,
        }
    }
}

impl VoxelizeConfig {
    pub fn sigma(&self, geometry: &GridGeometry) -> f64 {
        self.gaussian_bandwidth.unwrap_or(1.5 * geometry.spacing())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_size_grid_spacing() {
        let g = GridGeometry::new(64, 0.3);
        assert!((g.spacing() - 0.3 / 63.0).abs() < 1e-15);
        assert!((g.spacing() - 0.0047619).abs() < 1e-6);
        assert_eq!(g.point(63, 0, 63), Vec3::new(0.3, 0.0, 0.3));
    }

    #[test]
    fn index_roundtrip() {
        let g = GridGeometry::new(5, 1.0);
        for idx in 0..g.len() {
            let [i, j, k] = g.coords(idx);
            assert_eq!(g.index(i, j, k), idx);
        }
        assert_eq!(g.index(1, 0, 0), 1);
        assert_eq!(g.index(0, 1, 0), 5);
    }

    #[test]
    fn mirror_is_involution() {
        let g = GridGeometry::new(4, 1.0);
        let mut grid = Grid3::zeros(g, 2);
        for (t, v) in grid.data.iter_mut().enumerate() {
            *v = t as f32;
        }
        let f = [true, false, true];
        assert_eq!(grid.mirrored(f).mirrored(f), grid);
        let m = grid.mirrored([true, false, false]);
        assert_eq!(m.channel(1)[g.index(3, 2, 1)], grid.channel(1)[g.index(0, 2, 1)]);
    }

    #[test]
    fn index_range_clamps() {
        let g = GridGeometry::new(11, 1.0);
        assert_eq!(g.index_range(0.15, 0.42), Some((2, 4)));
        assert_eq!(g.index_range(-1.0, 0.05), Some((0, 0)));
        assert_eq!(g.index_range(0.31, 0.39), None);
        assert_eq!(g.index_range(0.95, 3.0), Some((10, 10)));
    }
}

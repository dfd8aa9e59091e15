use crate::mesh::SurfaceMesh;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

#[derive(PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, ties by vertex id for determinism.
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Surface vertices whose geodesic distance from `seed` is at most
/// `radius`, sorted ascending.
///
/// Distances are shortest paths over the triangle edge graph, augmented
/// with the straight link between the two opposite corners of every pair
/// of triangles sharing an edge. The extra links remove most of the
/// metric bias of structured triangulations, where plain edge paths
/// zig-zag.
pub fn select_surface_region(surface: &SurfaceMesh, seed: u32, radius: f64) -> Vec<u32> {
    let n = surface.vertices.len();
    assert!((seed as usize) < n, "seed vertex {seed} is not on the surface");
    let nb = geodesic_graph(surface);
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[seed as usize] = 0.0;
    heap.push(Entry(0.0, seed));
    while let Some(Entry(d, v)) = heap.pop() {
        if d > dist[v as usize] {
            continue;
        }
        for &w in &nb[v as usize] {
            let nd = d + (surface.vertices[v as usize] - surface.vertices[w as usize]).norm();
            if nd <= radius && nd < dist[w as usize] {
                dist[w as usize] = nd;
                heap.push(Entry(nd, w));
            }
        }
    }
    (0..n as u32).filter(|&v| dist[v as usize] <= radius).collect()
}

fn geodesic_graph(surface: &SurfaceMesh) -> Vec<Vec<u32>> {
    let mut nb = surface.vertex_neighbors();
    let mut opposite: HashMap<(u32, u32), u32> = HashMap::with_capacity(surface.triangles.len() * 3);
    for t in &surface.triangles {
        for i in 0..3 {
            let (a, b, c) = (t[i], t[(i + 1) % 3], t[(i + 2) % 3]);
            // The twin half-edge (b, a) belongs to the neighbor triangle.
            if let Some(&d) = opposite.get(&(b, a)) {
                if c != d {
                    nb[c as usize].push(d);
                    nb[d as usize].push(c);
                }
            }
            opposite.insert((a, b), c);
        }
    }
    for l in &mut nb {
        l.sort_unstable();
        l.dedup();
    }
    nb
}

/// Area associated with a vertex set: one third of each adjacent
/// triangle's area per member vertex.
pub fn region_area(surface: &SurfaceMesh, region: &[u32]) -> f64 {
    let areas = surface.vertex_areas();
    region.iter().map(|&v| areas[v as usize]).sum()
}

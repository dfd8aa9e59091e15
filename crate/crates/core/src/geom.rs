//! Small computational-geometry kernel shared by the mesh, voxel and eval
//! modules.

use crate::Vec3;
use robust::Coord3D;

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Vec3::repeat(f64::INFINITY),
            max: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Vec3>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    pub fn grow(&mut self, p: &Vec3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn merge(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn dist2(&self, p: &Vec3) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = if p[k] < self.min[k] {
                self.min[k] - p[k]
            } else if p[k] > self.max[k] {
                p[k] - self.max[k]
            } else {
                0.0
            };
            d2 += v * v;
        }
        d2
    }
}

#[inline]
fn c3(p: &Vec3) -> Coord3D<f64> {
    Coord3D {
        x: p.x,
        y: p.y,
        z: p.z,
    }
}

/// Exact sign of the orientation of `d` relative to the plane through
/// `a, b, c`. Positive when `d` lies below the plane (`a, b, c` appear
/// counter-clockwise seen from above), matching Shewchuk's convention.
#[inline]
pub fn orient3d(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    robust::orient3d(c3(a), c3(b), c3(c), c3(d))
}

/// Exact 2D orientation: positive when `a, b, c` turn counter-clockwise.
#[inline]
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    robust::orient2d(
        robust::Coord { x: a[0], y: a[1] },
        robust::Coord { x: b[0], y: b[1] },
        robust::Coord { x: c[0], y: c[1] },
    )
}

/// Signed volume of the tetrahedron `a, b, c, d` (positive for the
/// right-handed ordering used throughout the crate).
#[inline]
pub fn tet_volume(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    (b - a).dot(&(c - a).cross(&(d - a))) / 6.0
}

/// Ratio of inradius to circumradius. Equals 1/3 for the regular
/// tetrahedron; carries the sign of the volume so inverted elements
/// report a non-positive quality.
pub fn tet_quality(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> f64 {
    let vol = tet_volume(a, b, c, d);
    let area = tri_area(b, c, d) + tri_area(a, c, d) + tri_area(a, b, d) + tri_area(a, b, c);
    if area <= 0.0 {
        return 0.0;
    }
    let inradius = 3.0 * vol / area;
    // Circumcenter relative to `a` solves 2 M x = |e|^2 row-wise.
    let e1 = b - a;
    let e2 = c - a;
    let e3 = d - a;
    let num = e1.norm_squared() * e2.cross(&e3)
        + e2.norm_squared() * e3.cross(&e1)
        + e3.norm_squared() * e1.cross(&e2);
    let den = 2.0 * e1.dot(&e2.cross(&e3));
    if den == 0.0 {
        return 0.0;
    }
    let circumradius = (num / den).norm();
    inradius / circumradius
}

#[inline]
pub fn tri_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Closest point on triangle `a, b, c` to `p`.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[inline]
pub fn point_triangle_dist2(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (closest_point_on_triangle(p, a, b, c) - p).norm_squared()
}

#[inline]
fn sgn(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Whether the closed segment `p q` touches the closed triangle `a b c`
/// (non-coplanar case, exact predicates).
fn segment_crosses_triangle(p: &Vec3, q: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> bool {
    let sp = sgn(orient3d(a, b, c, p));
    let sq = sgn(orient3d(a, b, c, q));
    if sp == sq {
        // Same side, or both on the plane (handled by the coplanar path).
        return false;
    }
    let s1 = sgn(orient3d(p, q, a, b));
    let s2 = sgn(orient3d(p, q, b, c));
    let s3 = sgn(orient3d(p, q, c, a));
    let has_pos = s1 > 0 || s2 > 0 || s3 > 0;
    let has_neg = s1 < 0 || s2 < 0 || s3 < 0;
    !(has_pos && has_neg)
}

fn project_drop_axis(p: &Vec3, axis: usize) -> [f64; 2] {
    match axis {
        0 => [p.y, p.z],
        1 => [p.z, p.x],
        _ => [p.x, p.y],
    }
}

fn segments_intersect_2d(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = sgn(orient2d(q1, q2, p1));
    let d2 = sgn(orient2d(q1, q2, p2));
    let d3 = sgn(orient2d(p1, p2, q1));
    let d4 = sgn(orient2d(p1, p2, q2));
    if d1 * d2 < 0 && d3 * d4 < 0 {
        return true;
    }
    let on = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    (d1 == 0 && on(q1, q2, p1))
        || (d2 == 0 && on(q1, q2, p2))
        || (d3 == 0 && on(p1, p2, q1))
        || (d4 == 0 && on(p1, p2, q2))
}

fn point_in_triangle_2d(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let s1 = sgn(orient2d(a, b, p));
    let s2 = sgn(orient2d(b, c, p));
    let s3 = sgn(orient2d(c, a, p));
    let has_pos = s1 > 0 || s2 > 0 || s3 > 0;
    let has_neg = s1 < 0 || s2 < 0 || s3 < 0;
    !(has_pos && has_neg)
}

fn coplanar_triangles_intersect(t1: [&Vec3; 3], t2: [&Vec3; 3]) -> bool {
    let n = (t1[1] - t1[0]).cross(&(t1[2] - t1[0]));
    let axis = n.iamax();
    let a: Vec<[f64; 2]> = t1.iter().map(|p| project_drop_axis(p, axis)).collect();
    let b: Vec<[f64; 2]> = t2.iter().map(|p| project_drop_axis(p, axis)).collect();
    for i in 0..3 {
        for j in 0..3 {
            if segments_intersect_2d(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_triangle_2d(a[0], b[0], b[1], b[2]) || point_in_triangle_2d(b[0], a[0], a[1], a[2])
}

/// Exact closed triangle-triangle intersection test.
pub fn triangles_intersect(t1: [&Vec3; 3], t2: [&Vec3; 3]) -> bool {
    let d: Vec<i8> = t2.iter().map(|p| sgn(orient3d(t1[0], t1[1], t1[2], p))).collect();
    if d.iter().all(|&s| s == 0) {
        return coplanar_triangles_intersect(t1, t2);
    }
    if d.iter().all(|&s| s > 0) || d.iter().all(|&s| s < 0) {
        return false;
    }
    let e: Vec<i8> = t1.iter().map(|p| sgn(orient3d(t2[0], t2[1], t2[2], p))).collect();
    if e.iter().all(|&s| s > 0) || e.iter().all(|&s| s < 0) {
        return false;
    }
    for i in 0..3 {
        let (p, q) = (t1[i], t1[(i + 1) % 3]);
        if segment_crosses_triangle(p, q, t2[0], t2[1], t2[2]) {
            return true;
        }
        let (p, q) = (t2[i], t2[(i + 1) % 3]);
        if segment_crosses_triangle(p, q, t1[0], t1[1], t1[2]) {
            return true;
        }
    }
    // An edge lying in the other triangle's plane.
    for i in 0..3 {
        if e[i] == 0 && e[(i + 1) % 3] == 0 {
            let edge = [t1[i], t1[(i + 1) % 3], t1[(i + 1) % 3]];
            if coplanar_triangles_intersect(t2, edge) {
                return true;
            }
        }
        if d[i] == 0 && d[(i + 1) % 3] == 0 {
            let edge = [t2[i], t2[(i + 1) % 3], t2[(i + 1) % 3]];
            if coplanar_triangles_intersect(t1, edge) {
                return true;
            }
        }
    }
    false
}

/// Bounding-volume hierarchy over triangles for nearest-point queries.
#[derive(Clone, Debug)]
pub struct TriangleBvh {
    nodes: Vec<BvhNode>,
    /// Triangle indices, permuted so each leaf covers a contiguous range.
    order: Vec<u32>,
    tris: Vec<[Vec3; 3]>,
}

#[derive(Clone, Debug)]
struct BvhNode {
    bounds: Aabb,
    // Leaf: `count > 0`, triangles `order[start..start+count]`.
    // Inner: children at `start` and `start + 1`.
    start: u32,
    count: u32,
}

const LEAF_SIZE: usize = 4;

impl TriangleBvh {
    pub fn new(tris: Vec<[Vec3; 3]>) -> Self {
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let centroids: Vec<Vec3> = tris.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
        let mut nodes = vec![BvhNode {
            bounds: Aabb::empty(),
            start: 0,
            count: 0,
        }];
        let mut stack = vec![(0usize, 0usize, tris.len())];
        while let Some((node, lo, hi)) = stack.pop() {
            let bounds = Aabb::from_points(order[lo..hi].iter().flat_map(|&t| tris[t as usize].iter()));
            if hi - lo <= LEAF_SIZE {
                nodes[node] = BvhNode {
                    bounds,
                    start: lo as u32,
                    count: (hi - lo) as u32,
                };
                continue;
            }
            let cb = Aabb::from_points(order[lo..hi].iter().map(|&t| &centroids[t as usize]));
            let axis = (cb.max - cb.min).iamax();
            let mid = (lo + hi) / 2;
            order[lo..hi].select_nth_unstable_by(mid - lo, |&a, &b| {
                centroids[a as usize][axis].total_cmp(&centroids[b as usize][axis])
            });
            let left = nodes.len();
            nodes.push(BvhNode {
                bounds: Aabb::empty(),
                start: 0,
                count: 0,
            });
            nodes.push(BvhNode {
                bounds: Aabb::empty(),
                start: 0,
                count: 0,
            });
            nodes[node] = BvhNode {
                bounds,
                start: left as u32,
                count: 0,
            };
            stack.push((left, lo, mid));
            stack.push((left + 1, mid, hi));
        }
        Self { nodes, order, tris }
    }

    pub fn triangles(&self) -> &[[Vec3; 3]] {
        &self.tris
    }

    /// Squared distance from `p` to the nearest triangle, and its index.
    pub fn nearest(&self, p: &Vec3) -> (f64, usize) {
        let mut best = (f64::INFINITY, usize::MAX);
        if self.tris.is_empty() {
            return best;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bounds.dist2(p) >= best.0 {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    let tri = &self.tris[t as usize];
                    let d2 = point_triangle_dist2(p, &tri[0], &tri[1], &tri[2]);
                    if d2 < best.0 || (d2 == best.0 && (t as usize) < best.1) {
                        best = (d2, t as usize);
                    }
                }
            } else {
                let l = node.start as usize;
                let (dl, dr) = (self.nodes[l].bounds.dist2(p), self.nodes[l + 1].bounds.dist2(p));
                // Visit the nearer child first.
                if dl < dr {
                    stack.push(l + 1);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(l + 1);
                }
            }
        }
        best
    }

    /// Calls `f` for every triangle whose box overlaps `query`.
    pub fn for_each_overlapping(&self, query: &Aabb, mut f: impl FnMut(usize)) {
        if self.tris.is_empty() {
            return;
        }
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if !node.bounds.overlaps(query) {
                continue;
            }
            if node.count > 0 {
                for &t in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    f(t as usize);
                }
            } else {
                stack.push(node.start as usize);
                stack.push(node.start as usize + 1);
            }
        }
    }
}

//! Exact hexahedral meshes on an integer lattice.
//!
//! All geometry is stored as integer lattice coordinates (`scale` points per
//! unit length), so point welding, planarity, convexity and volume checks are
//! exact; floating point appears only in quality metrics and file output.

use crate::symmetry::CORNER_XYZ;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Hex faces as corner-index quads, oriented outward (right-hand normal
/// points out of the cell). Order: bottom, top, south, east, north, west.
pub const OUTWARD_FACES: [[usize; 4]; 6] = [
    [0, 3, 2, 1],
    [4, 5, 6, 7],
    [0, 1, 5, 4],
    [1, 2, 6, 5],
    [2, 3, 7, 6],
    [0, 4, 7, 3],
];

/// For each corner, its three edge-adjacent corners ordered so the frame
/// `(n0-c, n1-c, n2-c)` is right-handed on the reference cube.
pub const CORNER_FRAME: [[usize; 3]; 8] = [
    [1, 3, 4],
    [2, 0, 5],
    [3, 1, 6],
    [0, 2, 7],
    [7, 5, 0],
    [4, 6, 1],
    [5, 7, 2],
    [6, 4, 3],
];

#[derive(Clone, Debug)]
pub struct HexMesh {
    /// Lattice points per unit length (for float output).
    pub scale: i64,
    pub points: Vec<[i64; 3]>,
    pub hexes: Vec<[u32; 8]>,
}

/// Incremental mesh builder that welds coincident lattice points.
pub struct MeshBuilder {
    scale: i64,
    index: BTreeMap<[i64; 3], u32>,
    points: Vec<[i64; 3]>,
    hexes: Vec<[u32; 8]>,
}

impl MeshBuilder {
    pub fn new(scale: i64) -> Self {
        MeshBuilder {
            scale,
            index: BTreeMap::new(),
            points: Vec::new(),
            hexes: Vec::new(),
        }
    }

    pub fn point(&mut self, p: [i64; 3]) -> u32 {
        if let Some(&id) = self.index.get(&p) {
            return id;
        }
        let id = self.points.len() as u32;
        self.index.insert(p, id);
        self.points.push(p);
        id
    }

    pub fn hex(&mut self, corners: [[i64; 3]; 8]) {
        let ids = corners.map(|p| self.point(p));
        self.hexes.push(ids);
    }

    pub fn finish(self) -> HexMesh {
        HexMesh {
            scale: self.scale,
            points: self.points,
            hexes: self.hexes,
        }
    }
}

fn sub(a: [i64; 3], b: [i64; 3]) -> [i128; 3] {
    [
        a[0] as i128 - b[0] as i128,
        a[1] as i128 - b[1] as i128,
        a[2] as i128 - b[2] as i128,
    ]
}

fn cross(a: [i128; 3], b: [i128; 3]) -> [i128; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [i128; 3], b: [i128; 3]) -> i128 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn det3(a: [i128; 3], b: [i128; 3], c: [i128; 3]) -> i128 {
    dot(a, cross(b, c))
}

/// `true` iff the four points are coplanar.
pub fn quad_planar(q: [[i64; 3]; 4]) -> bool {
    det3(sub(q[1], q[0]), sub(q[2], q[0]), sub(q[3], q[0])) == 0
}

/// `true` iff the four points form a strictly convex planar quad (no three
/// collinear, consistent turning).
pub fn quad_strictly_convex(q: [[i64; 3]; 4]) -> bool {
    if !quad_planar(q) {
        return false;
    }
    let n = cross(sub(q[1], q[0]), sub(q[2], q[0]));
    if n == [0, 0, 0] {
        return false;
    }
    for i in 0..4 {
        let a = q[i];
        let b = q[(i + 1) % 4];
        let c = q[(i + 2) % 4];
        let t = cross(sub(b, a), sub(c, b));
        if dot(t, n) <= 0 {
            return false;
        }
    }
    true
}

/// Twice the area of an axis-plane quad as an exact integer (shoelace on the
/// two in-plane axes). `axis` is the constant coordinate.
fn quad_area_x2_on_plane(q: [[i64; 3]; 4], axis: usize) -> i128 {
    let (u, v) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut s: i128 = 0;
    for i in 0..4 {
        let a = q[i];
        let b = q[(i + 1) % 4];
        s += a[u] as i128 * b[v] as i128 - b[u] as i128 * a[v] as i128;
    }
    s.abs()
}

/// Minimum corner scaled Jacobian of one hex (1.0 for a perfect box,
/// negative for inverted corners).
pub fn scaled_jacobian(c: &[[f64; 3]; 8]) -> f64 {
    let mut min_sj = f64::INFINITY;
    for k in 0..8 {
        let [n0, n1, n2] = CORNER_FRAME[k];
        let e = |n: usize| {
            [
                c[n][0] - c[k][0],
                c[n][1] - c[k][1],
                c[n][2] - c[k][2],
            ]
        };
        let (u, v, w) = (e(n0), e(n1), e(n2));
        let det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
            + u[2] * (v[0] * w[1] - v[1] * w[0]);
        let norm = |x: [f64; 3]| (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let d = norm(u) * norm(v) * norm(w);
        let sj = if d > 0.0 { det / d } else { -1.0 };
        min_sj = min_sj.min(sj);
    }
    min_sj
}

/// Summary of per-element geometric quality over a mesh.
#[derive(Clone, Copy, Debug)]
pub struct QualityReport {
    pub min_scaled_jacobian: f64,
    pub nonplanar_faces: usize,
    pub nonconvex_faces: usize,
    pub inverted_hexes: usize,
}

/// Summary of the face-pairing structure of a conforming mesh.
#[derive(Clone, Copy, Debug)]
pub struct ConformityReport {
    pub interior_quads: usize,
    pub boundary_quads: usize,
}

impl HexMesh {
    pub fn hex_points(&self, h: usize) -> [[i64; 3]; 8] {
        self.hexes[h].map(|i| self.points[i as usize])
    }

    /// Renumber points lexicographically and sort the cell list, so equal
    /// geometry serializes byte-identically regardless of construction order.
    /// Corner order within each hex is preserved.
    pub fn canonicalize(&mut self) {
        let mut order: Vec<u32> = (0..self.points.len() as u32).collect();
        order.sort_unstable_by_key(|&i| self.points[i as usize]);
        let mut rank = vec![0u32; self.points.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old as usize] = new as u32;
        }
        self.points = order.iter().map(|&i| self.points[i as usize]).collect();
        for hex in &mut self.hexes {
            for v in hex.iter_mut() {
                *v = rank[*v as usize];
            }
        }
        self.hexes.sort_unstable();
    }

    pub fn hex_points_f64(&self, h: usize) -> [[f64; 3]; 8] {
        let s = self.scale as f64;
        self.hex_points(h)
            .map(|p| [p[0] as f64 / s, p[1] as f64 / s, p[2] as f64 / s])
    }

    /// Outward-oriented quad faces of hex `h`, as point ids.
    pub fn hex_faces(&self, h: usize) -> [[u32; 4]; 6] {
        let ids = self.hexes[h];
        OUTWARD_FACES.map(|f| f.map(|k| ids[k]))
    }

    /// Six times the total mesh volume, exact. Faces must be planar for the
    /// result to be meaningful.
    pub fn total_volume_x6(&self) -> i128 {
        let mut vol6: i128 = 0;
        for h in 0..self.hexes.len() {
            let pts = self.hex_points(h);
            for f in OUTWARD_FACES {
                let q = f.map(|k| pts[k]);
                // V = (1/6) sum over outward triangles of a . (b x c)
                vol6 += det3(
                    [q[0][0] as i128, q[0][1] as i128, q[0][2] as i128],
                    [q[1][0] as i128, q[1][1] as i128, q[1][2] as i128],
                    [q[2][0] as i128, q[2][1] as i128, q[2][2] as i128],
                );
                vol6 += det3(
                    [q[0][0] as i128, q[0][1] as i128, q[0][2] as i128],
                    [q[2][0] as i128, q[2][1] as i128, q[2][2] as i128],
                    [q[3][0] as i128, q[3][1] as i128, q[3][2] as i128],
                );
            }
        }
        vol6
    }

    /// Per-element quality over the whole mesh.
    pub fn quality(&self) -> QualityReport {
        let mut rep = QualityReport {
            min_scaled_jacobian: f64::INFINITY,
            nonplanar_faces: 0,
            nonconvex_faces: 0,
            inverted_hexes: 0,
        };
        for h in 0..self.hexes.len() {
            let pts = self.hex_points(h);
            for f in OUTWARD_FACES {
                let q = f.map(|k| pts[k]);
                if !quad_planar(q) {
                    rep.nonplanar_faces += 1;
                } else if !quad_strictly_convex(q) {
                    rep.nonconvex_faces += 1;
                }
            }
            let sj = scaled_jacobian(&self.hex_points_f64(h));
            if sj <= 0.0 {
                rep.inverted_hexes += 1;
            }
            rep.min_scaled_jacobian = rep.min_scaled_jacobian.min(sj);
        }
        if self.hexes.is_empty() {
            rep.min_scaled_jacobian = f64::NAN;
        }
        rep
    }

    /// Boundary quads (faces used by exactly one hex), outward oriented.
    pub fn boundary_quads(&self) -> Vec<[u32; 4]> {
        let mut count: BTreeMap<[u32; 4], (u32, [u32; 4])> = BTreeMap::new();
        for h in 0..self.hexes.len() {
            for q in self.hex_faces(h) {
                let mut key = q;
                key.sort_unstable();
                let e = count.entry(key).or_insert((0, q));
                e.0 += 1;
            }
        }
        count
            .into_values()
            .filter(|&(n, _)| n == 1)
            .map(|(_, q)| q)
            .collect()
    }

    /// Structural conformity: every quad face is either shared by exactly two
    /// hexes with opposite orientation, or lies on the boundary. When `domain`
    /// is given (axis-aligned box, lattice coords), additionally checks that
    /// boundary quads tile the box surface exactly and the hex volumes sum to
    /// the box volume.
    pub fn verify_conformity(&self, domain: Option<([i64; 3], [i64; 3])>) -> Result<ConformityReport> {
        // Hex corners must be distinct points.
        for (h, ids) in self.hexes.iter().enumerate() {
            let mut s = *ids;
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Mesh(format!("hex {h} has repeated corners")));
            }
            for &i in ids {
                if i as usize >= self.points.len() {
                    return Err(Error::Mesh(format!("hex {h} references missing point {i}")));
                }
            }
        }
        // Pair faces by vertex set; orientations must cancel.
        #[derive(Default)]
        struct Slot {
            quads: Vec<[u32; 4]>,
        }
        let mut faces: BTreeMap<[u32; 4], Slot> = BTreeMap::new();
        for h in 0..self.hexes.len() {
            for q in self.hex_faces(h) {
                let mut key = q;
                key.sort_unstable();
                faces.entry(key).or_default().quads.push(q);
            }
        }
        let canon = |q: [u32; 4]| -> [u32; 4] {
            let k = (0..4).min_by_key(|&i| q[i]).unwrap();
            [q[k], q[(k + 1) % 4], q[(k + 2) % 4], q[(k + 3) % 4]]
        };
        let mut interior = 0usize;
        let mut boundary: Vec<[u32; 4]> = Vec::new();
        for (key, slot) in &faces {
            match slot.quads.len() {
                1 => boundary.push(slot.quads[0]),
                2 => {
                    let a = canon(slot.quads[0]);
                    let b = canon([
                        slot.quads[1][3],
                        slot.quads[1][2],
                        slot.quads[1][1],
                        slot.quads[1][0],
                    ]);
                    if a != b {
                        return Err(Error::Mesh(format!(
                            "face {key:?} shared twice with matching orientation"
                        )));
                    }
                    interior += 1;
                }
                n => {
                    return Err(Error::Mesh(format!("face {key:?} used by {n} hexes")));
                }
            }
        }
        if let Some((lo, hi)) = domain {
            // Every boundary quad must lie flat on one of the six box sides.
            let mut side_area: [[i128; 2]; 3] = [[0; 2]; 3];
            for q in &boundary {
                let pts = q.map(|i| self.points[i as usize]);
                let mut placed = false;
                for axis in 0..3 {
                    for (si, v) in [lo[axis], hi[axis]].into_iter().enumerate() {
                        if pts.iter().all(|p| p[axis] == v) {
                            if pts
                                .iter()
                                .any(|p| (0..3).any(|a| p[a] < lo[a] || p[a] > hi[a]))
                            {
                                return Err(Error::Mesh(format!(
                                    "boundary quad {q:?} leaves the domain box"
                                )));
                            }
                            side_area[axis][si] += quad_area_x2_on_plane(pts, axis);
                            placed = true;
                            break;
                        }
                    }
                    if placed {
                        break;
                    }
                }
                if !placed {
                    return Err(Error::Mesh(format!(
                        "interior face {q:?} has no partner (hanging face)"
                    )));
                }
            }
            let ext = [
                hi[0] as i128 - lo[0] as i128,
                hi[1] as i128 - lo[1] as i128,
                hi[2] as i128 - lo[2] as i128,
            ];
            for axis in 0..3 {
                let want = 2 * ext[(axis + 1) % 3] * ext[(axis + 2) % 3];
                for si in 0..2 {
                    if side_area[axis][si] != want {
                        return Err(Error::Mesh(format!(
                            "boundary of axis {axis} side {si} covers {} of {} (x2 area units)",
                            side_area[axis][si], want
                        )));
                    }
                }
            }
            let want_vol6 = 6 * ext[0] * ext[1] * ext[2];
            let got = self.total_volume_x6();
            if got != want_vol6 {
                return Err(Error::Mesh(format!(
                    "mesh volume x6 = {got}, domain requires {want_vol6}"
                )));
            }
        }
        Ok(ConformityReport {
            interior_quads: interior,
            boundary_quads: boundary.len(),
        })
    }
}

/// Build the trivial one-hex mesh of the box `[0,d]^3` (mostly for tests).
pub fn unit_box_mesh(d: i64) -> HexMesh {
    let mut b = MeshBuilder::new(d);
    b.hex(CORNER_XYZ.map(|p| [p[0] * d, p[1] * d, p[2] * d]));
    b.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welding_deduplicates_points() {
        let mut b = MeshBuilder::new(2);
        b.hex([
            [0, 0, 0],
            [1, 0, 0],
            [1, 1, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 0, 1],
            [1, 1, 1],
            [0, 1, 1],
        ]);
        b.hex([
            [1, 0, 0],
            [2, 0, 0],
            [2, 1, 0],
            [1, 1, 0],
            [1, 0, 1],
            [2, 0, 1],
            [2, 1, 1],
            [1, 1, 1],
        ]);
        let m = b.finish();
        assert_eq!(m.points.len(), 12);
        assert_eq!(m.hexes.len(), 2);
        let rep = m.verify_conformity(None).unwrap();
        assert_eq!(rep.interior_quads, 1);
        assert_eq!(rep.boundary_quads, 10);
    }

    #[test]
    fn unit_box_is_conforming_and_perfect() {
        let m = unit_box_mesh(6);
        let rep = m.verify_conformity(Some(([0, 0, 0], [6, 6, 6]))).unwrap();
        assert_eq!(rep.boundary_quads, 6);
        assert_eq!(rep.interior_quads, 0);
        let q = m.quality();
        assert_eq!(q.nonplanar_faces, 0);
        assert_eq!(q.nonconvex_faces, 0);
        assert_eq!(q.inverted_hexes, 0);
        assert!((q.min_scaled_jacobian - 1.0).abs() < 1e-12);
        assert_eq!(m.total_volume_x6(), 6 * 216);
    }

    #[test]
    fn hanging_face_is_detected() {
        // A 2x1x1 slab where the second hex is shifted so faces do not pair.
        let mut b = MeshBuilder::new(2);
        b.hex([
            [0, 0, 0],
            [1, 0, 0],
            [1, 2, 0],
            [0, 2, 0],
            [0, 0, 2],
            [1, 0, 2],
            [1, 2, 2],
            [0, 2, 2],
        ]);
        b.hex([
            [1, 0, 0],
            [2, 0, 0],
            [2, 1, 0],
            [1, 1, 0],
            [1, 0, 2],
            [2, 0, 2],
            [2, 1, 2],
            [1, 1, 2],
        ]);
        let m = b.finish();
        // Pairing alone cannot see it, but the domain check can.
        assert!(m
            .verify_conformity(Some(([0, 0, 0], [2, 2, 2])))
            .is_err());
    }

    #[test]
    fn duplicated_face_same_orientation_is_rejected() {
        let mut b = MeshBuilder::new(1);
        let cube = [
            [0, 0, 0],
            [1, 0, 0],
            [1, 1, 0],
            [0, 1, 0],
            [0, 0, 1],
            [1, 0, 1],
            [1, 1, 1],
            [0, 1, 1],
        ];
        b.hex(cube);
        b.hex(cube);
        let m = b.finish();
        assert!(m.verify_conformity(None).is_err());
    }

    #[test]
    fn planarity_and_convexity_predicates() {
        let flat = [[0, 0, 0], [3, 0, 0], [3, 3, 0], [0, 3, 0]];
        assert!(quad_planar(flat));
        assert!(quad_strictly_convex(flat));
        let warped = [[0, 0, 0], [3, 0, 0], [3, 3, 1], [0, 3, 0]];
        assert!(!quad_planar(warped));
        let chevron = [[0, 0, 0], [3, 0, 0], [1, 1, 0], [0, 3, 0]];
        assert!(quad_planar(chevron));
        assert!(!quad_strictly_convex(chevron));
        let collinear = [[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 3, 0]];
        assert!(!quad_strictly_convex(collinear));
    }

    #[test]
    fn scaled_jacobian_detects_inversion() {
        let good = CORNER_XYZ.map(|p| [p[0] as f64, p[1] as f64, p[2] as f64]);
        assert!((scaled_jacobian(&good) - 1.0).abs() < 1e-12);
        // Swap two corners to invert.
        let mut bad = good;
        bad.swap(0, 1);
        assert!(scaled_jacobian(&bad) < 0.0);
    }
}

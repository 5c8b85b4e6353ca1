//! Symmetry group of the cube (48 signed axis permutations) and the
//! canonicalization tables for vertex-mark and edge-mark configurations.
//!
//! Conventions (frozen; every other module builds on these):
//!
//! Corner order (matches common hexahedron element order):
//! c0=(0,0,0) c1=(1,0,0) c2=(1,1,0) c3=(0,1,0)
//! c4=(0,0,1) c5=(1,0,1) c6=(1,1,1) c7=(0,1,1)
//!
//! Edge order: bottom ring S,E,N,W; verticals SW,SE,NE,NW; top ring S,E,N,W.
//! e0=(c0,c1) e1=(c1,c2) e2=(c2,c3)  e3=(c0,c3)
//! e4=(c0,c4) e5=(c1,c5) e6=(c2,c6)  e7=(c3,c7)
//! e8=(c4,c5) e9=(c5,c6) e10=(c6,c7) e11=(c4,c7)
//!
//! Face order: bottom, top, south(y=0), east(x=1), north(y=1), west(x=0).

use std::sync::OnceLock;

/// Corner coordinates in {0,1}^3, indexed by corner id.
pub const CORNER_XYZ: [[i64; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Unordered corner pairs for the 12 edges.
pub const EDGE_CORNERS: [[usize; 2]; 12] = [
    [0, 1],
    [1, 2],
    [2, 3],
    [0, 3],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
    [4, 5],
    [5, 6],
    [6, 7],
    [4, 7],
];

/// The four corners of each face (cyclic order around the face).
pub const FACE_CORNERS: [[usize; 4]; 6] = [
    [0, 1, 2, 3], // bottom z=0
    [4, 5, 6, 7], // top    z=1
    [0, 1, 5, 4], // south  y=0
    [1, 2, 6, 5], // east   x=1
    [2, 3, 7, 6], // north  y=1
    [0, 3, 7, 4], // west   x=0
];

/// The four edges bounding each face (same face order as `FACE_CORNERS`).
pub const FACE_EDGES: [[usize; 4]; 6] = [
    [0, 1, 2, 3],
    [8, 9, 10, 11],
    [0, 5, 8, 4],
    [1, 6, 9, 5],
    [2, 7, 10, 6],
    [3, 7, 11, 4],
];

/// One element of the cube symmetry group: `out[a] = in[perm[a]]`, mirrored
/// across the cube centre on axis `a` when `flip[a]` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transform {
    pub perm: [usize; 3],
    pub flip: [bool; 3],
}

impl Transform {
    pub const IDENTITY: Transform = Transform {
        perm: [0, 1, 2],
        flip: [false, false, false],
    };

    /// All 48 group elements in a fixed order (permutation-major, then the
    /// three flip bits as a binary counter).
    pub fn all() -> &'static [Transform; 48] {
        static ALL: OnceLock<[Transform; 48]> = OnceLock::new();
        ALL.get_or_init(|| {
            const PERMS: [[usize; 3]; 6] = [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ];
            let mut out = [Transform::IDENTITY; 48];
            for (pi, perm) in PERMS.iter().enumerate() {
                for bits in 0..8usize {
                    out[pi * 8 + bits] = Transform {
                        perm: *perm,
                        flip: [bits & 1 != 0, bits & 2 != 0, bits & 4 != 0],
                    };
                }
            }
            out
        })
    }

    /// Apply to a point with integer coordinates in the cube `[0, d]^3`.
    pub fn apply_num(&self, p: [i64; 3], d: i64) -> [i64; 3] {
        let mut q = [0i64; 3];
        for a in 0..3 {
            let v = p[self.perm[a]];
            q[a] = if self.flip[a] { d - v } else { v };
        }
        q
    }

    /// Apply to a point in the unit cube.
    pub fn apply_unit(&self, p: [f64; 3]) -> [f64; 3] {
        let mut q = [0f64; 3];
        for a in 0..3 {
            let v = p[self.perm[a]];
            q[a] = if self.flip[a] { 1.0 - v } else { v };
        }
        q
    }

    /// `true` when the determinant is +1 (orientation preserving).
    pub fn is_rotation(&self) -> bool {
        let parity_even = {
            let p = self.perm;
            let mut inv = 0;
            for i in 0..3 {
                for j in (i + 1)..3 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            inv % 2 == 0
        };
        let flips = self.flip.iter().filter(|&&f| f).count();
        parity_even == (flips % 2 == 0)
    }

    /// Image of each corner id.
    pub fn corner_map(&self) -> [usize; 8] {
        let mut m = [0usize; 8];
        for c in 0..8 {
            let q = self.apply_num(CORNER_XYZ[c], 1);
            m[c] = CORNER_XYZ.iter().position(|&xyz| xyz == q).unwrap();
        }
        m
    }

    /// Image of each edge id.
    pub fn edge_map(&self) -> [usize; 12] {
        let cm = self.corner_map();
        let mut m = [0usize; 12];
        for e in 0..12 {
            let [a, b] = EDGE_CORNERS[e];
            let (x, y) = (cm[a], cm[b]);
            m[e] = EDGE_CORNERS
                .iter()
                .position(|&[p, q]| (p == x && q == y) || (p == y && q == x))
                .unwrap();
        }
        m
    }

    /// Image of each face id.
    pub fn face_map(&self) -> [usize; 6] {
        let cm = self.corner_map();
        let mut m = [0usize; 6];
        for f in 0..6 {
            let mut img: Vec<usize> = FACE_CORNERS[f].iter().map(|&c| cm[c]).collect();
            img.sort_unstable();
            m[f] = FACE_CORNERS
                .iter()
                .position(|fc| {
                    let mut s = *fc;
                    s.sort_unstable();
                    s.to_vec() == img
                })
                .unwrap();
        }
        m
    }

    /// Composition: `(self.compose(other))(p) = self(other(p))`.
    pub fn compose(&self, other: &Transform) -> Transform {
        let mut perm = [0usize; 3];
        let mut flip = [false; 3];
        for a in 0..3 {
            perm[a] = other.perm[self.perm[a]];
            flip[a] = self.flip[a] ^ other.flip[self.perm[a]];
        }
        Transform { perm, flip }
    }

    /// Group inverse.
    pub fn inverse(&self) -> Transform {
        let mut perm = [0usize; 3];
        let mut flip = [false; 3];
        for a in 0..3 {
            perm[self.perm[a]] = a;
            flip[self.perm[a]] = self.flip[a];
        }
        Transform { perm, flip }
    }

    /// Transport an 8-bit corner-mark code.
    pub fn apply_vertex_code(&self, code: u8) -> u8 {
        let cm = self.corner_map();
        let mut out = 0u8;
        for c in 0..8 {
            if code & (1 << c) != 0 {
                out |= 1 << cm[c];
            }
        }
        out
    }

    /// Transport a 12-bit edge-mark code.
    pub fn apply_edge_code(&self, code: u16) -> u16 {
        let em = self.edge_map();
        let mut out = 0u16;
        for e in 0..12 {
            if code & (1 << e) != 0 {
                out |= 1 << em[e];
            }
        }
        out
    }
}

struct Tables {
    vertex_canon: [u8; 256],
    vertex_via: [u8; 256], // index into Transform::all(): g with g(code) = canon
    edge_canon: [u16; 4096],
    edge_via: [u8; 4096],
    vertex_reps: Vec<u8>,
    edge_reps: Vec<u16>,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let all = Transform::all();
        let mut vertex_canon = [0u8; 256];
        let mut vertex_via = [0u8; 256];
        for code in 0..=255u8 {
            let mut best = code;
            let mut via = 0u8;
            for (gi, g) in all.iter().enumerate() {
                let img = g.apply_vertex_code(code);
                if img < best {
                    best = img;
                    via = gi as u8;
                }
            }
            vertex_canon[code as usize] = best;
            vertex_via[code as usize] = via;
        }
        let mut edge_canon = [0u16; 4096];
        let mut edge_via = [0u8; 4096];
        for code in 0..4096u16 {
            let mut best = code;
            let mut via = 0u8;
            for (gi, g) in all.iter().enumerate() {
                let img = g.apply_edge_code(code);
                if img < best {
                    best = img;
                    via = gi as u8;
                }
            }
            edge_canon[code as usize] = best;
            edge_via[code as usize] = via;
        }
        let mut vertex_reps: Vec<u8> = (0..=255u8)
            .filter(|&c| vertex_canon[c as usize] == c)
            .collect();
        vertex_reps.sort_unstable();
        let mut edge_reps: Vec<u16> = (0..4096u16)
            .filter(|&c| edge_canon[c as usize] == c)
            .collect();
        edge_reps.sort_unstable();
        Tables {
            vertex_canon,
            vertex_via,
            edge_canon,
            edge_via,
            vertex_reps,
            edge_reps,
        }
    })
}

/// Canonical representative of a vertex-mark code, and a transform `g`
/// with `g(code) = canonical`.
pub fn canon_vertex(code: u8) -> (u8, Transform) {
    let t = tables();
    (
        t.vertex_canon[code as usize],
        Transform::all()[t.vertex_via[code as usize] as usize],
    )
}

/// Canonical representative of an edge-mark code, and a transform `g`
/// with `g(code) = canonical`.
pub fn canon_edge(code: u16) -> (u16, Transform) {
    let t = tables();
    (
        t.edge_canon[code as usize],
        Transform::all()[t.edge_via[code as usize] as usize],
    )
}

/// Sorted canonical representatives of the vertex-mark classes.
pub fn vertex_class_reps() -> &'static [u8] {
    &tables().vertex_reps
}

/// Sorted canonical representatives of the edge-mark classes.
pub fn edge_class_reps() -> &'static [u16] {
    &tables().edge_reps
}

fn perm_cycles(map: &[usize]) -> usize {
    let mut seen = vec![false; map.len()];
    let mut cycles = 0;
    for start in 0..map.len() {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = map[at];
        }
    }
    cycles
}

/// Orbit count of corner-mark codes by Burnside's lemma (independent of the
/// enumeration in `vertex_class_reps`).
pub fn burnside_vertex_orbits() -> usize {
    let total: usize = Transform::all()
        .iter()
        .map(|g| 1usize << perm_cycles(&g.corner_map()))
        .sum();
    total / 48
}

/// Orbit count of edge-mark codes by Burnside's lemma.
pub fn burnside_edge_orbits() -> usize {
    let total: usize = Transform::all()
        .iter()
        .map(|g| 1usize << perm_cycles(&g.edge_map()))
        .sum();
    total / 48
}

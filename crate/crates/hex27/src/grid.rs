//! Adaptive 27-tree grids over the unit cube.
//!
//! Every cell subdivides into 3x3x3 children, so a cell at depth `d` is
//! addressed by integer coordinates in `[0, 3^d)^3`. The grid stores the set
//! of subdivided ("internal") cells; the set is parent-closed and its leaves
//! tile the cube exactly. All adjacency queries run in exact integer
//! arithmetic on a common finest lattice.

use crate::{Error, Result};
use std::collections::HashSet;

/// Maximum tree depth representable without coordinate overflow anywhere in
/// the pipeline (3^19 already exceeds `u32`; practical grids stay below 8).
pub const MAX_DEPTH: u8 = 12;

/// `3^d` as `i64`.
pub fn pow3(d: u8) -> i64 {
    3i64.pow(d as u32)
}

/// Address of one cell: `depth` and lattice coordinates in `[0, 3^depth)^3`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct CellId {
    pub depth: u8,
    pub coords: [u32; 3],
}

impl CellId {
    pub const ROOT: CellId = CellId {
        depth: 0,
        coords: [0, 0, 0],
    };

    /// Checked constructor.
    pub fn new(depth: u8, i: u32, j: u32, k: u32) -> Result<CellId> {
        if depth > MAX_DEPTH {
            return Err(Error::InvalidGrid(format!(
                "depth {depth} exceeds maximum {MAX_DEPTH}"
            )));
        }
        let n = pow3(depth) as u32;
        for (axis, v) in [i, j, k].into_iter().enumerate() {
            if v >= n {
                return Err(Error::InvalidGrid(format!(
                    "coordinate {v} on axis {axis} out of range for depth {depth} (max {})",
                    n - 1
                )));
            }
        }
        Ok(CellId {
            depth,
            coords: [i, j, k],
        })
    }

    /// Parent cell (`None` for the root).
    pub fn parent(&self) -> Option<CellId> {
        if self.depth == 0 {
            return None;
        }
        Some(CellId {
            depth: self.depth - 1,
            coords: self.coords.map(|c| c / 3),
        })
    }

    /// Child with offsets `d ∈ {0,1,2}^3`.
    pub fn child(&self, dx: u32, dy: u32, dz: u32) -> CellId {
        debug_assert!(dx < 3 && dy < 3 && dz < 3);
        CellId {
            depth: self.depth + 1,
            coords: [
                self.coords[0] * 3 + dx,
                self.coords[1] * 3 + dy,
                self.coords[2] * 3 + dz,
            ],
        }
    }

    /// All 27 children in (z, y, x)-major order.
    pub fn children(&self) -> impl Iterator<Item = CellId> + '_ {
        (0..27u32).map(move |n| self.child(n % 3, (n / 3) % 3, n / 9))
    }

    /// Closed cell box `[lo, hi]` on the lattice with `3^finest` points per
    /// unit length. Requires `finest >= self.depth`.
    pub fn bounds(&self, finest: u8) -> ([i64; 3], [i64; 3]) {
        debug_assert!(finest >= self.depth);
        let side = pow3(finest - self.depth);
        let lo = self.coords.map(|c| c as i64 * side);
        let hi = lo.map(|v| v + side);
        (lo, hi)
    }
}

/// Dimension of the contact between two cells with disjoint interiors.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AdjacencyKind {
    None,
    Vertex,
    Edge,
    Face,
}

/// Classify the contact between two cells by intersecting their closed boxes
/// on the common finest lattice. Errors when the interiors overlap (one cell
/// contains the other), since contact dimension is then undefined.
pub fn classify_adjacency(a: CellId, b: CellId) -> Result<AdjacencyKind> {
    let finest = a.depth.max(b.depth);
    let (alo, ahi) = a.bounds(finest);
    let (blo, bhi) = b.bounds(finest);
    let mut touching_axes = 0;
    for axis in 0..3 {
        let lo = alo[axis].max(blo[axis]);
        let hi = ahi[axis].min(bhi[axis]);
        if lo > hi {
            return Ok(AdjacencyKind::None);
        }
        if lo == hi {
            touching_axes += 1;
        }
    }
    match touching_axes {
        0 => Err(Error::InvalidGrid(format!(
            "cells {a:?} and {b:?} overlap; adjacency undefined"
        ))),
        1 => Ok(AdjacencyKind::Face),
        2 => Ok(AdjacencyKind::Edge),
        _ => Ok(AdjacencyKind::Vertex),
    }
}

/// Adaptive 27-tree: the set of subdivided cells, parent-closed.
#[derive(Clone, Debug, Default)]
pub struct AdaptiveGrid {
    internal: HashSet<CellId>,
}

impl AdaptiveGrid {
    /// Grid consisting of the root leaf only.
    pub fn new() -> AdaptiveGrid {
        AdaptiveGrid {
            internal: HashSet::new(),
        }
    }

    /// Build from an arbitrary collection of subdivided cells, validating
    /// parent closure. Duplicate entries are rejected.
    pub fn from_internal_cells(cells: &[CellId]) -> Result<AdaptiveGrid> {
        let mut internal = HashSet::with_capacity(cells.len());
        for &c in cells {
            CellId::new(c.depth, c.coords[0], c.coords[1], c.coords[2])?;
            if !internal.insert(c) {
                return Err(Error::InvalidGrid(format!("cell {c:?} subdivided twice")));
            }
        }
        for c in &internal {
            if let Some(p) = c.parent() {
                if !internal.contains(&p) {
                    return Err(Error::InvalidGrid(format!(
                        "cell {c:?} subdivided but its parent {p:?} is not"
                    )));
                }
            }
        }
        Ok(AdaptiveGrid { internal })
    }

    /// `true` when `cell` is subdivided.
    pub fn is_internal(&self, cell: CellId) -> bool {
        self.internal.contains(&cell)
    }

    /// `true` when `cell` is a node of the tree (all strict ancestors are
    /// subdivided).
    pub fn is_node(&self, cell: CellId) -> bool {
        let mut at = cell;
        while let Some(p) = at.parent() {
            if !self.internal.contains(&p) {
                return false;
            }
            at = p;
        }
        true
    }

    /// `true` when `cell` is a leaf of the tree.
    pub fn is_leaf(&self, cell: CellId) -> bool {
        self.is_node(cell) && !self.is_internal(cell)
    }

    /// Subdivide a leaf. Errors when the cell is not currently a leaf.
    pub fn refine(&mut self, cell: CellId) -> Result<()> {
        if self.is_internal(cell) {
            return Err(Error::InvalidGrid(format!("cell {cell:?} already subdivided")));
        }
        if !self.is_node(cell) {
            return Err(Error::InvalidGrid(format!(
                "cell {cell:?} is not a leaf of the current tree"
            )));
        }
        if cell.depth >= MAX_DEPTH {
            return Err(Error::InvalidGrid(format!(
                "cannot refine below depth {MAX_DEPTH}"
            )));
        }
        self.internal.insert(cell);
        Ok(())
    }

    /// The subdivided cells, sorted (depth, then coordinates).
    pub fn internal_cells(&self) -> Vec<CellId> {
        let mut v: Vec<CellId> = self.internal.iter().copied().collect();
        v.sort_unstable();
        v
    }

    pub fn internal_count(&self) -> usize {
        self.internal.len()
    }

    /// Number of leaves; each subdivision replaces one leaf with 27.
    pub fn leaf_count(&self) -> usize {
        1 + 26 * self.internal.len()
    }

    /// All leaves, sorted (depth, then coordinates).
    pub fn leaves(&self) -> Vec<CellId> {
        let mut out = Vec::with_capacity(self.leaf_count());
        let mut stack = vec![CellId::ROOT];
        while let Some(c) = stack.pop() {
            if self.is_internal(c) {
                stack.extend(c.children());
            } else {
                out.push(c);
            }
        }
        out.sort_unstable();
        out
    }

    /// Deepest leaf depth.
    pub fn max_depth(&self) -> u8 {
        self.internal
            .iter()
            .map(|c| c.depth + 1)
            .max()
            .unwrap_or(0)
    }

    /// The leaf whose closed box contains `p`, given on the half-step lattice
    /// with `2 * 3^finest` points per unit length. Interior points (odd
    /// half-step coordinates never lie on any cell boundary) give a unique
    /// answer; boundary points resolve toward the lower cell.
    pub fn leaf_at_half_lattice(&self, p: [i64; 3], finest: u8) -> Result<CellId> {
        let full = 2 * pow3(finest);
        for &v in &p {
            if v < 0 || v > full {
                return Err(Error::InvalidGrid(format!(
                    "probe point {p:?} outside the unit cube at finest depth {finest}"
                )));
            }
        }
        let mut cell = CellId::ROOT;
        let mut lo = [0i64; 3];
        let mut side = full;
        while self.is_internal(cell) {
            if cell.depth >= finest {
                return Err(Error::InvalidGrid(format!(
                    "tree deeper than stated finest depth {finest}"
                )));
            }
            side /= 3;
            let mut child = [0u32; 3];
            for a in 0..3 {
                let mut t = (p[a] - lo[a]) / side;
                if t > 2 {
                    t = 2;
                }
                if t < 0 {
                    t = 0;
                }
                child[a] = t as u32;
                lo[a] += side * t;
            }
            cell = cell.child(child[0], child[1], child[2]);
        }
        Ok(cell)
    }

    /// Leaves adjacent to `cell` whose contact with it is exactly `kind` or
    /// higher-dimensional than `kind` (a face neighbor also touches along
    /// edges of the shared face, so callers filter by the classification).
    ///
    /// Neighbors are found by laddered coarsening: step one cell over at the
    /// cell's own depth, coarsen until the tree contains that node, then
    /// collect all descendant leaves that still touch `cell`.
    pub fn leaf_neighbors(&self, cell: CellId, min_kind: AdjacencyKind) -> Vec<CellId> {
        let mut out = Vec::new();
        let mut seen: HashSet<CellId> = HashSet::new();
        let n = pow3(cell.depth);
        for dir in 0..27usize {
            let d = [dir % 3, (dir / 3) % 3, dir / 9].map(|v| v as i64 - 1);
            if d == [0, 0, 0] {
                continue;
            }
            let dim_drop = d.iter().filter(|&&v| v != 0).count();
            let kind = match dim_drop {
                1 => AdjacencyKind::Face,
                2 => AdjacencyKind::Edge,
                _ => AdjacencyKind::Vertex,
            };
            if rank(kind) < rank(min_kind) {
                continue;
            }
            let mut coords = [0i64; 3];
            let mut outside = false;
            for a in 0..3 {
                let v = cell.coords[a] as i64 + d[a];
                if v < 0 || v >= n {
                    outside = true;
                    break;
                }
                coords[a] = v;
            }
            if outside {
                continue;
            }
            let mut probe = CellId {
                depth: cell.depth,
                coords: coords.map(|v| v as u32),
            };
            // Ladder: coarsen until the node exists in the tree.
            while !self.is_node(probe) {
                probe = probe.parent().expect("root always exists");
            }
            if !self.is_internal(probe) {
                if seen.insert(probe) {
                    out.push(probe);
                }
                continue;
            }
            // Finer neighborhood: collect descendant leaves touching `cell`.
            let mut stack = vec![probe];
            while let Some(c) = stack.pop() {
                let finest = cell.depth.max(c.depth);
                let (alo, ahi) = cell.bounds(finest);
                let (blo, bhi) = c.bounds(finest);
                let mut touches = true;
                for a in 0..3 {
                    if alo[a].max(blo[a]) > ahi[a].min(bhi[a]) {
                        touches = false;
                        break;
                    }
                }
                if !touches {
                    continue;
                }
                if self.is_internal(c) {
                    stack.extend(c.children());
                } else if seen.insert(c) {
                    out.push(c);
                }
            }
        }
        // Keep only leaves whose actual contact dimension reaches min_kind.
        out.retain(|&m| {
            let k = classify_adjacency(cell, m).expect("leaves have disjoint interiors");
            rank(k) >= rank(min_kind)
        });
        out.sort_unstable();
        out
    }
}

fn rank(k: AdjacencyKind) -> u8 {
    match k {
        AdjacencyKind::None => 0,
        AdjacencyKind::Vertex => 1,
        AdjacencyKind::Edge => 2,
        AdjacencyKind::Face => 3,
    }
}

/// Seeded random grid: sweep the depths breadth-first and subdivide each
/// leaf above the depth limit independently with probability `p`.
pub fn gen_random(max_depth: u8, p: f64, seed: u64) -> AdaptiveGrid {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut grid = AdaptiveGrid::new();
    for depth in 0..max_depth {
        let mut level: Vec<CellId> = grid
            .leaves()
            .into_iter()
            .filter(|c| c.depth == depth)
            .collect();
        level.sort_unstable();
        for cell in level {
            if rng.gen_bool(p) {
                grid.refine(cell).expect("level cells are leaves");
            }
        }
    }
    grid
}

/// Implicit surfaces with an exact box-intersection test on lattice boxes.
#[derive(Clone, Copy, Debug)]
pub enum Surface {
    /// Sphere centred at (1/2,1/2,1/2) with radius 1/3.
    Sphere,
    /// Torus around the vertical axis through the centre, major radius 1/3,
    /// minor radius 1/6.
    Torus,
}

impl Surface {
    /// Exact test: does the closed box of `cell` contain a point of the
    /// surface? Evaluated on integer coordinates with denominator `6 * 3^d`,
    /// which makes the centre, both radii and all box corners integral.
    pub fn intersects(self, cell: CellId) -> bool {
        let q = 6 * pow3(cell.depth); // lattice points per unit length
        let c = q / 2;
        let (lo, hi) = cell.bounds(cell.depth);
        let lo = lo.map(|v| v * 6 - c);
        let hi = hi.map(|v| v * 6 - c);
        // Ranges of X^2 per axis (coordinates relative to the centre).
        let sq_range = |l: i64, h: i64| -> (i128, i128) {
            let l2 = (l as i128) * (l as i128);
            let h2 = (h as i128) * (h as i128);
            let min = if l <= 0 && h >= 0 { 0 } else { l2.min(h2) };
            (min, l2.max(h2))
        };
        match self {
            Surface::Sphere => {
                let r = 2 * pow3(cell.depth) as i128; // 1/3 in lattice units
                let mut min2 = 0i128;
                let mut max2 = 0i128;
                for a in 0..3 {
                    let (mn, mx) = sq_range(lo[a], hi[a]);
                    min2 += mn;
                    max2 += mx;
                }
                min2 <= r * r && r * r <= max2
            }
            Surface::Torus => {
                let big = 2 * pow3(cell.depth) as i128; // R = 1/3
                let small = pow3(cell.depth) as i128; // r = 1/6
                let (ux0, ux1) = sq_range(lo[0], hi[0]);
                let (uy0, uy1) = sq_range(lo[1], hi[1]);
                let (v0, v1) = sq_range(lo[2], hi[2]);
                let (u0, u1) = (ux0 + uy0, ux1 + uy1);
                let cc = big * big - small * small;
                // g(u,v) = (u + v + cc)^2 - 4 R^2 u over [u0,u1] x [v0,v1];
                // quadratic in u, monotone in v for fixed u, so extrema sit on
                // rectangle corners or on the critical line u + v = 2R^2 - cc.
                let g = |u: i128, v: i128| -> i128 {
                    let s = u + v + cc;
                    s * s - 4 * big * big * u
                };
                let mut gmin = i128::MAX;
                let mut gmax = i128::MIN;
                for &u in &[u0, u1] {
                    for &v in &[v0, v1] {
                        let val = g(u, v);
                        gmin = gmin.min(val);
                        gmax = gmax.max(val);
                    }
                }
                for &v in &[v0, v1] {
                    let ustar = 2 * big * big - v - cc;
                    if ustar >= u0 && ustar <= u1 {
                        let val = g(ustar, v);
                        gmin = gmin.min(val);
                        gmax = gmax.max(val);
                    }
                }
                gmin <= 0 && 0 <= gmax
            }
        }
    }
}

/// Surface-adapted grid: subdivide, breadth-first, every leaf box that the
/// surface passes through, down to `max_depth`. Interior and exterior stay
/// coarse.
pub fn gen_surface(surface: Surface, max_depth: u8) -> AdaptiveGrid {
    let mut grid = AdaptiveGrid::new();
    for depth in 0..max_depth {
        let level: Vec<CellId> = grid
            .leaves()
            .into_iter()
            .filter(|c| c.depth == depth && surface.intersects(*c))
            .collect();
        for cell in level {
            grid.refine(cell).expect("level cells are leaves");
        }
    }
    grid
}

/// Contact kinds constrained by a balance condition, lowest first.
pub fn kinds_at_least(k: AdjacencyKind) -> &'static [AdjacencyKind] {
    match k {
        AdjacencyKind::Vertex => &[AdjacencyKind::Vertex, AdjacencyKind::Edge, AdjacencyKind::Face],
        AdjacencyKind::Edge => &[AdjacencyKind::Edge, AdjacencyKind::Face],
        AdjacencyKind::Face => &[AdjacencyKind::Face],
        AdjacencyKind::None => &[],
    }
}

//! Edge-driven conforming mesh engine.
//!
//! Each leaf of a moderately balanced grid gets a 12-bit code: bit `i` is set
//! when a strictly deeper leaf shares a positive length of edge `i`. The leaf
//! is then replaced by the cell template for that code. Marks are a purely
//! geometric predicate, so cells sharing a face derive identical codes for it
//! and the per-face boundary patterns of neighbouring templates agree; the
//! welded mesh is conforming.
//!
//! An optional greedy pass marks additional whole geometric edges wherever
//! that does not increase the total element count. Completing a face ring
//! this way can move a cell from the universal fallback onto a cheaper exact
//! template, which is where the reduction comes from.

use crate::balance::{balance, is_balanced, BalanceCondition};
use crate::grid::{pow3, AdaptiveGrid, CellId};
use crate::hexmesh::{HexMesh, MeshBuilder};
use crate::symmetry::{CORNER_XYZ, EDGE_CORNERS};
use crate::tmpl::{cell_hex_count, cell_hexes, DEN};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Per-leaf 12-bit trisection codes, in sorted leaf order.
pub type MarkedGrid = Vec<(CellId, u16)>;

/// Knobs for [`conform`].
#[derive(Clone, Copy, Debug, Default)]
pub struct EngineOptions {
    /// Fail instead of auto-balancing when the input grid is not moderately
    /// balanced.
    pub strict_balance: bool,
    /// Run the greedy mark optimizer before meshing.
    pub greedy: bool,
}

/// Result of a conforming run.
#[derive(Clone, Debug)]
pub struct EngineOutput {
    pub mesh: HexMesh,
    /// The grid actually meshed (input plus any balancing refinements).
    pub grid: AdaptiveGrid,
    /// Whether balancing had to refine anything.
    pub auto_balanced: bool,
    /// Final per-leaf codes, after the greedy pass when enabled.
    pub marks: MarkedGrid,
    /// Number of geometric edges the greedy pass marked.
    pub greedy_flips: usize,
}

/// The two perpendicular axes of an edge along axis `t`.
fn perp_axes(t: usize) -> (usize, usize) {
    match t {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Probe points flanking each third of one cell edge, on the half-step
/// lattice with `2 * 3^finest` points per unit length. One probe sits in
/// each quadrant around each third-midpoint, offset half a finest step, so
/// every probe lies strictly inside some leaf and the leaves found are
/// exactly those sharing a positive length of the edge. Requires
/// `finest > cell.depth`.
fn edge_probe_points(cell: CellId, edge: usize, finest: u8) -> Vec<[i64; 3]> {
    let [a, b] = EDGE_CORNERS[edge];
    let (ca, cb) = (CORNER_XYZ[a], CORNER_XYZ[b]);
    let t = (0..3).find(|&ax| ca[ax] != cb[ax]).expect("edge spans an axis");
    let (pa, qa) = perp_axes(t);
    let w = 2 * pow3(finest - cell.depth);
    let full = 2 * pow3(finest);
    let corner: [i64; 3] =
        std::array::from_fn(|ax| cell.coords[ax] as i64 * w + ca[ax] * w);
    let step = w / 6;
    let mut out = Vec::with_capacity(12);
    for k in 0..3i64 {
        let mut base = corner;
        base[t] = cell.coords[t] as i64 * w + (2 * k + 1) * step;
        for sp in [-1i64, 1] {
            for sq in [-1i64, 1] {
                let mut p = base;
                p[pa] += sp;
                p[qa] += sq;
                if p.iter().all(|&v| v >= 0 && v <= full) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// Endpoints of one cell edge on the half-step lattice, lower corner first.
/// Global half-lattice endpoints of one cell edge, sorted, so cells sharing
/// a full edge produce the same key.
pub fn edge_segment(cell: CellId, edge: usize, finest: u8) -> ([i64; 3], [i64; 3]) {
    let [a, b] = EDGE_CORNERS[edge];
    let w = 2 * pow3(finest - cell.depth);
    let at = |c: [i64; 3]| -> [i64; 3] {
        std::array::from_fn(|ax| cell.coords[ax] as i64 * w + c[ax] * w)
    };
    let (pa, pb) = (at(CORNER_XYZ[a]), at(CORNER_XYZ[b]));
    if pa <= pb { (pa, pb) } else { (pb, pa) }
}

/// 12-bit code of one leaf: bit `i` set when some strictly deeper leaf
/// shares a positive length of edge `i`.
fn leaf_code(grid: &AdaptiveGrid, cell: CellId, finest: u8) -> Result<u16> {
    let mut code = 0u16;
    for e in 0..12 {
        for p in edge_probe_points(cell, e, finest) {
            if grid.leaf_at_half_lattice(p, finest)?.depth > cell.depth {
                code |= 1 << e;
                break;
            }
        }
    }
    Ok(code)
}

/// Edge marks for every leaf, in sorted leaf order. Leaves are probed in
/// parallel; the indexed collect keeps the output order deterministic.
pub fn mark_edges(grid: &AdaptiveGrid) -> Result<MarkedGrid> {
    use rayon::prelude::*;
    let finest = grid.max_depth() + 1;
    grid.leaves()
        .into_par_iter()
        .map(|c| Ok((c, leaf_code(grid, c, finest)?)))
        .collect()
}

/// Instantiate the per-cell templates on the shared global integer lattice
/// (`DEN * 3^maxdepth` points per unit length) and weld. The mesh is
/// canonicalized, so equal grids and marks give identical meshes.
pub fn mesh_from_marks(grid: &AdaptiveGrid, marks: &MarkedGrid) -> HexMesh {
    let maxd = grid.max_depth();
    let scale = DEN * pow3(maxd);
    let mut b = MeshBuilder::new(scale);
    for &(cell, code) in marks {
        let mul = pow3(maxd - cell.depth);
        let origin = cell.coords.map(|c| c as i64 * DEN);
        for hex in cell_hexes(code).iter() {
            let mut c = [[0i64; 3]; 8];
            for (i, p) in hex.iter().enumerate() {
                for ax in 0..3 {
                    c[i][ax] = (origin[ax] + p[ax]) * mul;
                }
            }
            b.hex(c);
        }
    }
    let mut m = b.finish();
    m.canonicalize();
    m
}

/// One flippable geometric edge: a segment that is a full, unmarked cell
/// edge of every leaf incident along its interior.
struct FlipGroup {
    /// (leaf index into `marks`, edge index) of each incident slot.
    slots: Vec<(usize, usize)>,
}

/// Collect the flippable geometric edges in a frozen deterministic order
/// (cell depth, then segment endpoints).
fn flip_groups(grid: &AdaptiveGrid, marks: &MarkedGrid, finest: u8) -> Vec<FlipGroup> {
    // Group unmarked slots by exact segment. Segments of different depths
    // differ in length, so every group is single-depth.
    let mut by_segment: BTreeMap<(u8, [i64; 3], [i64; 3]), Vec<(usize, usize)>> =
        BTreeMap::new();
    for (li, &(cell, code)) in marks.iter().enumerate() {
        for e in 0..12 {
            if code & (1 << e) == 0 {
                let (lo, hi) = edge_segment(cell, e, finest);
                by_segment
                    .entry((cell.depth, lo, hi))
                    .or_default()
                    .push((li, e));
            }
        }
    }
    let mut out = Vec::new();
    'group: for ((depth, _, _), slots) in by_segment {
        // Legal only when every leaf sharing the segment interior has it as
        // a full edge (same depth): marking then trisects one shared whole
        // edge consistently and cannot disturb any coarser face or edge.
        let (li, e) = slots[0];
        let cell = marks[li].0;
        for p in edge_probe_points(cell, e, finest) {
            let leaf = grid
                .leaf_at_half_lattice(p, finest)
                .expect("probe points lie inside the domain");
            if leaf.depth != depth {
                continue 'group;
            }
        }
        out.push(FlipGroup { slots });
    }
    out
}

/// Greedy element reduction: repeatedly sweep the flippable geometric edges
/// in frozen order and mark each one whose flip does not increase the total
/// element count, until a full sweep changes nothing. Marks only ever grow,
/// so the result is a fixpoint: running the pass again changes nothing.
/// Returns the number of edges marked.
pub fn greedy_optimize(grid: &AdaptiveGrid, marks: &mut MarkedGrid) -> usize {
    let finest = grid.max_depth() + 1;
    let groups = flip_groups(grid, marks, finest);
    let mut flipped = vec![false; groups.len()];
    let mut total_flips = 0;
    loop {
        let mut flips_this_pass = 0;
        for (gi, group) in groups.iter().enumerate() {
            if flipped[gi] {
                continue;
            }
            let mut delta = 0i64;
            for &(li, e) in &group.slots {
                let code = marks[li].1;
                delta += cell_hex_count(code | (1 << e)) as i64
                    - cell_hex_count(code) as i64;
            }
            if delta <= 0 {
                for &(li, e) in &group.slots {
                    marks[li].1 |= 1 << e;
                }
                flipped[gi] = true;
                flips_this_pass += 1;
            }
        }
        total_flips += flips_this_pass;
        if flips_this_pass == 0 {
            break;
        }
    }
    total_flips
}

/// Total template hexes the marks will produce.
pub fn total_hexes(marks: &MarkedGrid) -> usize {
    marks.iter().map(|&(_, code)| cell_hex_count(code)).sum()
}

/// Edge-engine pipeline: balance check (or auto-balance), mark, optionally
/// optimize, mesh.
pub fn conform(grid: &AdaptiveGrid, opts: EngineOptions) -> Result<EngineOutput> {
    let mut g = grid.clone();
    let mut auto_balanced = false;
    if !is_balanced(&g, BalanceCondition::Moderate) {
        if opts.strict_balance {
            return Err(Error::Balance(
                "input grid is not moderately balanced".into(),
            ));
        }
        balance(&mut g, BalanceCondition::Moderate);
        auto_balanced = true;
    }
    let mut marks = mark_edges(&g)?;
    let mut greedy_flips = 0;
    if opts.greedy {
        greedy_flips = greedy_optimize(&g, &mut marks);
    }
    let mesh = mesh_from_marks(&g, &marks);
    Ok(EngineOutput {
        mesh,
        grid: g,
        auto_balanced,
        marks,
        greedy_flips,
    })
}

/// Minimum hex count reachable for one isolated cell by only adding marks:
/// `best[c]` is the cheapest count over all supersets of `c`. Computed by
/// dynamic programming from full marks downward.
pub fn single_cell_oracle() -> Vec<u32> {
    let mut best: Vec<u32> = (0..4096u16).map(|c| cell_hex_count(c) as u32).collect();
    for pc in (0..12u32).rev() {
        for c in 0..4096u16 {
            if c.count_ones() != pc {
                continue;
            }
            for bit in 0..12 {
                if c & (1 << bit) == 0 {
                    let sup = best[(c | (1 << bit)) as usize];
                    if sup < best[c as usize] {
                        best[c as usize] = sup;
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::gen_random;
    use proptest::prelude::*;

    fn unit_domain(m: &HexMesh) -> Option<([i64; 3], [i64; 3])> {
        Some(([0, 0, 0], [m.scale, m.scale, m.scale]))
    }

    fn assert_well_formed(m: &HexMesh) {
        let q = m.quality();
        assert_eq!(q.nonplanar_faces, 0);
        assert_eq!(q.nonconvex_faces, 0);
        assert_eq!(q.inverted_hexes, 0);
        assert!(q.min_scaled_jacobian > 0.0);
        m.verify_conformity(unit_domain(m)).unwrap();
        let s = m.scale as i128;
        assert_eq!(m.total_volume_x6(), 6 * s * s * s);
    }

    #[test]
    fn uniformly_refined_grid_has_no_marks() {
        let mut g = AdaptiveGrid::new();
        g.refine(CellId::ROOT).unwrap();
        let marks = mark_edges(&g).unwrap();
        assert_eq!(marks.len(), 27);
        assert!(marks.iter().all(|&(_, code)| code == 0));
        let m = mesh_from_marks(&g, &marks);
        assert_eq!(m.hexes.len(), 27);
        assert_well_formed(&m);
    }

    #[test]
    fn refined_centre_marks_the_ring_around_it() {
        let mut g = AdaptiveGrid::new();
        g.refine(CellId::ROOT).unwrap();
        g.refine(CellId::new(1, 1, 1, 1).unwrap()).unwrap();
        let marks = mark_edges(&g).unwrap();
        let by_cell: std::collections::HashMap<CellId, u16> =
            marks.iter().copied().collect();
        // Face neighbours of the refined centre see a fully marked face.
        let west = by_cell[&CellId::new(1, 0, 1, 1).unwrap()];
        assert_eq!(crate::tmpl::face_code(west, 3), 0b1111);
        // The centre's children are leaves with no deeper neighbours.
        assert_eq!(by_cell[&CellId::new(2, 4, 4, 4).unwrap()], 0);
        // An edge neighbour shares exactly one edge with the refined centre;
        // a corner neighbour only touches it at a point, marking nothing.
        let edge_nb = by_cell[&CellId::new(1, 1, 0, 0).unwrap()];
        assert_eq!(edge_nb.count_ones(), 1);
        let corner_nb = by_cell[&CellId::new(1, 0, 0, 0).unwrap()];
        assert_eq!(corner_nb, 0);
        let m = mesh_from_marks(&g, &marks);
        assert_well_formed(&m);
        assert_eq!(m.hexes.len(), total_hexes(&marks));
    }

    #[test]
    fn marks_agree_between_cells_sharing_an_edge() {
        for seed in 0..8u64 {
            let mut g = gen_random(3, 0.35, seed);
            balance(&mut g, BalanceCondition::Moderate);
            let marks = mark_edges(&g).unwrap();
            let finest = g.max_depth() + 1;
            let mut state: std::collections::HashMap<(u8, [i64; 3], [i64; 3]), bool> =
                std::collections::HashMap::new();
            for &(cell, code) in &marks {
                for e in 0..12 {
                    let (lo, hi) = edge_segment(cell, e, finest);
                    let marked = code & (1 << e) != 0;
                    let prev = state.insert((cell.depth, lo, hi), marked);
                    assert!(
                        prev.is_none() || prev == Some(marked),
                        "seed {seed}: cells disagree about a shared edge"
                    );
                }
            }
        }
    }

    #[test]
    fn strict_mode_rejects_unbalanced_grids() {
        let mut g = AdaptiveGrid::new();
        g.refine(CellId::ROOT).unwrap();
        g.refine(CellId::new(1, 0, 0, 0).unwrap()).unwrap();
        g.refine(CellId::new(2, 2, 2, 2).unwrap()).unwrap();
        assert!(!is_balanced(&g, BalanceCondition::Moderate));
        let strict = EngineOptions {
            strict_balance: true,
            greedy: false,
        };
        assert!(conform(&g, strict).is_err());
        let out = conform(&g, EngineOptions::default()).unwrap();
        assert!(out.auto_balanced);
        assert_well_formed(&out.mesh);
    }

    #[test]
    fn greedy_is_monotone_deterministic_and_a_fixpoint() {
        for seed in [3u64, 11, 19] {
            let mut g = gen_random(3, 0.4, seed);
            balance(&mut g, BalanceCondition::Moderate);
            let base = mark_edges(&g).unwrap();
            let mut once = base.clone();
            greedy_optimize(&g, &mut once);
            // Monotone: marks only ever grow.
            for (b, o) in base.iter().zip(&once) {
                assert_eq!(b.1 & o.1, b.1, "seed {seed}: greedy removed a mark");
            }
            // Never worse.
            assert!(total_hexes(&once) <= total_hexes(&base));
            // Deterministic.
            let mut again = base.clone();
            greedy_optimize(&g, &mut again);
            assert_eq!(once, again);
            // Fixpoint: a second run changes nothing.
            let mut twice = once.clone();
            let extra = greedy_optimize(&g, &mut twice);
            assert_eq!(extra, 0, "seed {seed}: greedy result was not a fixpoint");
            assert_eq!(twice, once);
            // The optimized marks still mesh conformingly.
            let m = mesh_from_marks(&g, &once);
            assert_well_formed(&m);
        }
    }

    #[test]
    fn oracle_bounds_every_configuration() {
        let best = single_cell_oracle();
        assert_eq!(best[0x000], 1);
        assert_eq!(best[0xFFF], 27);
        for c in 0..4096usize {
            assert!(best[c] as usize <= cell_hex_count(c as u16));
            // Monotone under inclusion: a superset can never help more than
            // the best over all supersets.
            for bit in 0..12 {
                if c & (1 << bit) == 0 {
                    assert!(best[c] <= best[c | (1 << bit)]);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn random_balanced_grids_mesh_conformingly(seed in 0u64..300, p in 0.15f64..0.45) {
            let g = gen_random(3, p, seed);
            let out = conform(&g, EngineOptions::default()).unwrap();
            assert_well_formed(&out.mesh);
            prop_assert_eq!(out.mesh.hexes.len(), total_hexes(&out.marks));
        }

        #[test]
        fn greedy_never_increases_hexes(seed in 0u64..300, p in 0.15f64..0.45) {
            let g = gen_random(3, p, seed);
            let plain = conform(&g, EngineOptions::default()).unwrap();
            let greedy = conform(
                &g,
                EngineOptions { strict_balance: false, greedy: true },
            )
            .unwrap();
            prop_assert!(greedy.mesh.hexes.len() <= plain.mesh.hexes.len());
            assert_well_formed(&greedy.mesh);
        }
    }
}

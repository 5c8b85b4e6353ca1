//! Scratch: all small designed two-cell instances (single-bit seeds, double
//! win on a shared edge) — greedy vs exhaustive equivalence over the family.
use hex27::balance::{balance, BalanceCondition};
use hex27::grid::{AdaptiveGrid, CellId};
use hex27::symmetry::{EDGE_CORNERS, FACE_CORNERS};
use hex27::tmpl::cell_hex_count;
use hex27::tmpl_edge::{edge_segment, greedy_optimize, mark_edges, total_hexes, MarkedGrid};
use std::collections::BTreeMap;

fn face_edges(f: usize) -> [usize; 4] {
    let c = FACE_CORNERS[f];
    std::array::from_fn(|k| {
        let pair = [c[k].min(c[(k + 1) % 4]), c[k].max(c[(k + 1) % 4])];
        EDGE_CORNERS.iter().position(|e| *e == pair).unwrap()
    })
}

fn main() {
    let mut g = AdaptiveGrid::new();
    g.refine(CellId::ROOT).unwrap();
    balance(&mut g, BalanceCondition::Moderate);
    let base = mark_edges(&g).unwrap();
    let finest = g.max_depth() + 1;
    let a_cell = CellId::new(1, 0, 0, 0).unwrap();
    let b_cell = CellId::new(1, 1, 0, 0).unwrap();
    let ai = base.iter().position(|&(c, _)| c == a_cell).unwrap();
    let bi = base.iter().position(|&(c, _)| c == b_cell).unwrap();
    let ea = face_edges(3); // A's +x face slots
    let eb = face_edges(5); // B's -x face slots

    let mut seg_map: BTreeMap<([i64;3],[i64;3]), Vec<(usize, usize)>> = BTreeMap::new();
    for (li, &(cell, _)) in base.iter().enumerate() {
        for e in 0..12 {
            seg_map.entry(edge_segment(cell, e, finest)).or_default().push((li, e));
        }
    }

    let mut family = 0usize;
    let mut flip_ok = 0usize;
    let mut oracle_ok = 0usize;
    for abit in 0..12 {
        for bbit in 0..12 {
            let (a, b) = (1u16 << abit, 1u16 << bbit);
            for k in 0..4 {
                let (sa, sb) = (ea[k], eb[k]);
                if sa == abit || sb == bbit { continue; }
                let da = cell_hex_count(a | 1 << sa) as i64 - cell_hex_count(a) as i64;
                let db = cell_hex_count(b | 1 << sb) as i64 - cell_hex_count(b) as i64;
                if !(da < 0 && db < 0) { continue; }
                family += 1;
                let mut marks: MarkedGrid = base.clone();
                marks[ai].1 = a;
                marks[bi].1 = b;
                let mut after = marks.clone();
                greedy_optimize(&g, &mut after);
                let g_total = total_hexes(&after) as i64;
                if after[ai].1 & (1 << sa) != 0 && after[bi].1 & (1 << sb) != 0 {
                    flip_ok += 1;
                }
                let touching: Vec<&Vec<(usize, usize)>> = seg_map.values()
                    .filter(|slots| slots.iter().any(|&(li, _)| li == ai || li == bi))
                    .filter(|slots| slots.iter().all(|&(li, e)| marks[li].1 & (1 << e) == 0))
                    .collect();
                let kk = touching.len();
                let mut codes: Vec<u16> = marks.iter().map(|&(_, c)| c).collect();
                let mut total: i64 = codes.iter().map(|&c| cell_hex_count(c) as i64).sum();
                let mut best = total;
                for i in 1..(1u64 << kk) {
                    let bit = i.trailing_zeros() as usize;
                    for &(li, e) in touching[bit] {
                        total -= cell_hex_count(codes[li]) as i64;
                        codes[li] ^= 1 << e;
                        total += cell_hex_count(codes[li]) as i64;
                    }
                    if total < best { best = total; }
                }
                if best == g_total { oracle_ok += 1; }
                else { println!("MISMATCH a bit {abit} b bit {bbit} slot {k}: greedy {g_total} oracle {best}"); }
            }
        }
    }
    println!("family {family}: flips accepted {flip_ok}, oracle matches {oracle_ok}");
}

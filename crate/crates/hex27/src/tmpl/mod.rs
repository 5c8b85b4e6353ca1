//! Cell template atlas.
//!
//! For every 12-bit configuration of trisected cell edges this module
//! produces a conforming all-hex mesh of the unit cell whose walls show
//! exactly the face patterns of the catalogue ([`crate::scheme`]). Cells
//! meshed independently therefore agree on shared faces.
//!
//! Configurations are resolved through a four-tier hierarchy:
//!
//! 1. **Exact**: the canonical class is one of 29 tabulated templates
//!    (hand-built economical meshes plus programmatic fills). None of these
//!    classes has a face with exactly three trisected edges.
//! 2. **Opposite three-quarter**: two opposite faces each have exactly three
//!    trisected edges.
//! 3. **Single three-quarter**: at least one such face, no opposite pair.
//! 4. **General**: everything else.
//!
//! Tiers 2–4 are meshed by the universal face-wise partition: a centre box
//! spanning the middle third, plus one warped frustum per face. The frustum
//! for a face is the bottom-class template of that face's 4-bit code, pushed
//! inward by a projective warp that keeps the face itself pointwise fixed and
//! carries the opposite template face onto the centre box. Because the warp
//! fixes walls plane-to-plane and every template wall shows the standard
//! pattern of its slot, neighbouring frustums meet conformingly.

pub mod data;

pub use data::{Hex, Pt, DEN};

use crate::hexmesh::{MeshBuilder, CORNER_FRAME};
use crate::scheme::{self, PATTERN_DEN};
use crate::symmetry::{canon_edge, edge_class_reps, Transform, FACE_EDGES};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

/// Number of classes resolved by the exact template table.
pub const EXACT_TABLE_SIZE: usize = 29;

/// 4-bit trisection code of one face of a cell configuration, in the slot
/// order of the face pattern catalogue.
pub fn face_code(code: u16, face: usize) -> u8 {
    let mut c = 0u8;
    for (slot, &e) in FACE_EDGES[face].iter().enumerate() {
        if code >> e & 1 == 1 {
            c |= 1 << slot;
        }
    }
    c
}

/// Whether any face of the configuration has exactly three trisected edges.
pub fn has_three_quarter_face(code: u16) -> bool {
    (0..6).any(|f| face_code(code, f).count_ones() == 3)
}

/// Which tier of the template hierarchy resolves a configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatchCase {
    Exact,
    OppositeThreeQuarter,
    SingleThreeQuarter,
    General,
}

/// Pairs of opposite faces.
pub const OPPOSITE_FACES: [(usize, usize); 3] = [(0, 1), (2, 4), (3, 5)];

pub fn match_case(code: u16) -> MatchCase {
    let (canon, _) = canon_edge(code);
    if exact_map().contains_key(&canon) {
        return MatchCase::Exact;
    }
    let tri: Vec<bool> = (0..6)
        .map(|f| face_code(code, f).count_ones() == 3)
        .collect();
    if tri.iter().any(|&t| t) {
        if OPPOSITE_FACES.iter().any(|&(a, b)| tri[a] && tri[b]) {
            MatchCase::OppositeThreeQuarter
        } else {
            MatchCase::SingleThreeQuarter
        }
    } else {
        MatchCase::General
    }
}

/// Applies a cube symmetry to template geometry, restoring corner order
/// when the symmetry is a reflection.
pub(crate) fn transform_hexes(g: &Transform, hexes: &[Hex]) -> Vec<Hex> {
    let fix = !g.is_rotation();
    hexes
        .iter()
        .map(|h| {
            let m = h.map(|p| g.apply_num(p, DEN));
            if fix {
                data::mirror_fix(m)
            } else {
                m
            }
        })
        .collect()
}

/// Base bottom-class templates, keyed by the 4-bit code of their bottom face.
fn base_templates() -> &'static Vec<(u8, Vec<Hex>)> {
    static B: OnceLock<Vec<(u8, Vec<Hex>)>> = OnceLock::new();
    B.get_or_init(|| {
        vec![
            (0b0000, data::box_cell()),
            (0b0001, data::single_edge()),
            (0b0011, data::adjacent_pair()),
            (0b0101, data::parallel_pair()),
            (0b0111, data::three_edge()),
            (0b1111, data::face_loop()),
        ]
    })
}

/// Template whose bottom face realizes the given 4-bit code and whose other
/// eleven edges are untrisected.
fn oriented_bottom_template(c4: u8) -> &'static Vec<Hex> {
    static CACHE: OnceLock<Vec<OnceLock<Vec<Hex>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| (0..16).map(|_| OnceLock::new()).collect());
    cache[c4 as usize].get_or_init(|| {
        for (base, hexes) in base_templates() {
            for g in Transform::all().iter().filter(|g| g.face_map()[0] == 0) {
                if g.apply_edge_code(*base as u16) == c4 as u16 {
                    return transform_hexes(g, hexes);
                }
            }
        }
        unreachable!("no bottom-face symmetry produces code {c4:#06b}")
    })
}

/// Projective inward warp. Fixes the bottom face pointwise, maps the top
/// face onto the centre-box face at height one third, and keeps planes flat.
/// Exact over `DEN` for all template coordinates.
fn pwarp(p: Pt) -> Pt {
    let [x, y, z] = p;
    let den = DEN + 2 * z;
    let m = |n: i64| {
        let v = n * DEN;
        assert!(v % den == 0, "warp of {p:?} leaves the lattice");
        v / den
    };
    [m(x + z), m(y + z), m(z)]
}

/// Maps warped template coordinates (u, v, depth) onto the cell so that the
/// template bottom lands on the given face with pattern slots in catalogue
/// order.
fn face_frame(face: usize, p: Pt) -> Pt {
    face_frame_at(face, p, DEN)
}

/// [`face_frame`] for a cell of side `d` instead of [`DEN`].
fn face_frame_at(face: usize, p: Pt, d: i64) -> Pt {
    let [u, v, w] = p;
    match face {
        0 => [u, v, w],
        1 => [u, v, d - w],
        2 => [u, w, v],
        3 => [d - w, u, v],
        4 => [d - u, d - w, v],
        5 => [w, u, v],
        _ => unreachable!("face index {face}"),
    }
}

/// Frames that reverse orientation and need the corner-order fix.
const FACE_FRAME_IMPROPER: [bool; 6] = [false, true, true, true, true, false];

/// Universal face-wise partition: centre box plus one warped frustum per
/// face. Works for every configuration; tiers 2–4 use it directly.
pub fn partition_hexes(code: u16) -> Vec<Hex> {
    let (a, b) = (DEN / 3, 2 * DEN / 3);
    let mut out = vec![[
        [a, a, a],
        [b, a, a],
        [b, b, a],
        [a, b, a],
        [a, a, b],
        [b, a, b],
        [b, b, b],
        [a, b, b],
    ]];
    for face in 0..6 {
        let tmpl = oriented_bottom_template(face_code(code, face));
        for h in tmpl {
            let mut m = h.map(|p| face_frame(face, pwarp(p)));
            if FACE_FRAME_IMPROPER[face] {
                m = data::mirror_fix(m);
            }
            out.push(m);
        }
    }
    out
}

/// The exact template table: canonical class code -> geometry. Holds
/// [`EXACT_TABLE_SIZE`] classes, none of which has a three-quarter face.
pub fn exact_map() -> &'static BTreeMap<u16, Vec<Hex>> {
    static M: OnceLock<BTreeMap<u16, Vec<Hex>>> = OnceLock::new();
    M.get_or_init(|| {
        let mut m = BTreeMap::new();
        for (code, hexes) in data::bespoke_templates() {
            let (canon, via) = canon_edge(code);
            assert!(
                !has_three_quarter_face(canon),
                "exact class {canon:#05x} has a three-quarter face"
            );
            let prev = m.insert(canon, transform_hexes(&via, &hexes));
            assert!(prev.is_none(), "exact class {canon:#05x} tabulated twice");
        }
        // Fill the remaining slots with the smallest eligible classes,
        // meshed by the universal partition.
        let mut fill: Vec<u16> = edge_class_reps()
            .iter()
            .copied()
            .filter(|&c| !has_three_quarter_face(c) && !m.contains_key(&c))
            .collect();
        fill.sort_by_key(|&c| (c.count_ones(), c));
        let missing = EXACT_TABLE_SIZE - m.len();
        for &c in fill.iter().take(missing) {
            m.insert(c, partition_hexes(c));
        }
        assert_eq!(m.len(), EXACT_TABLE_SIZE, "exact table size");
        m
    })
}

fn cache() -> &'static [OnceLock<Arc<Vec<Hex>>>] {
    static C: OnceLock<Vec<OnceLock<Arc<Vec<Hex>>>>> = OnceLock::new();
    C.get_or_init(|| (0..4096).map(|_| OnceLock::new()).collect())
}

/// The template mesh for an edge configuration: exact-table geometry
/// transported back from the canonical frame when available, otherwise the
/// universal partition. Cached per configuration.
pub fn cell_hexes(code: u16) -> Arc<Vec<Hex>> {
    cache()[code as usize]
        .get_or_init(|| {
            let (canon, via) = canon_edge(code);
            let geo = match exact_map().get(&canon) {
                Some(g) => transform_hexes(&via.inverse(), g),
                None => partition_hexes(code),
            };
            Arc::new(geo)
        })
        .clone()
}

/// Hexes contributed by one face of the universal partition.
fn face_class_count(c4: u8) -> u32 {
    match c4.count_ones() {
        0 => 1,
        1 => 5,
        2 => {
            // Slots 0..3 ring the face; opposite pairs are {0,2} and {1,3}.
            if c4 == 0b0101 || c4 == 0b1010 {
                4
            } else {
                15
            }
        }
        3 => 14,
        4 => 13,
        _ => unreachable!(),
    }
}

/// Number of hexes [`cell_hexes`] produces, without building geometry.
pub fn cell_hex_count(code: u16) -> usize {
    static LUT: OnceLock<Vec<u32>> = OnceLock::new();
    let lut = LUT.get_or_init(|| {
        (0..4096u16)
            .map(|c| {
                let (canon, _) = canon_edge(c);
                match exact_map().get(&canon) {
                    Some(g) => g.len() as u32,
                    None => 1 + (0..6).map(|f| face_class_count(face_code(c, f))).sum::<u32>(),
                }
            })
            .collect()
    });
    lut[code as usize] as usize
}

fn sub(a: Pt, b: Pt) -> [i128; 3] {
    [
        (a[0] - b[0]) as i128,
        (a[1] - b[1]) as i128,
        (a[2] - b[2]) as i128,
    ]
}

fn det3(a: [i128; 3], b: [i128; 3], c: [i128; 3]) -> i128 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
        + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// Face planes of a cell of side `d`: (axis, coordinate).
fn face_planes(d: i64) -> [(usize, i64); 6] {
    [(2, 0), (2, d), (1, 0), (0, d), (1, d), (0, 0)]
}

/// Full validity audit of a template mesh: positive corner orientation at
/// every hex corner (exact), conformity over the unit cell, planar and
/// strictly convex faces, positive scaled Jacobians, and cell walls equal to
/// the catalogue pattern of each face code.
pub fn audit_cell_mesh(code: u16, hexes: &[Hex]) -> Result<()> {
    audit_cell_mesh_at(code, hexes, DEN)
}

/// [`audit_cell_mesh`] for geometry living on a cell of side `side` (which
/// must be a multiple of [`PATTERN_DEN`]).
pub(crate) fn audit_cell_mesh_at(code: u16, hexes: &[Hex], side: i64) -> Result<()> {
    for (hi, h) in hexes.iter().enumerate() {
        for c in 0..8 {
            let [a, b, d] = CORNER_FRAME[c];
            if det3(sub(h[a], h[c]), sub(h[b], h[c]), sub(h[d], h[c])) <= 0 {
                return Err(Error::Mesh(format!(
                    "template {code:#05x}: hex {hi} corner {c} not positively oriented"
                )));
            }
        }
    }
    let mut b = MeshBuilder::new(side);
    for h in hexes {
        b.hex(*h);
    }
    let mesh = b.finish();
    mesh.verify_conformity(Some(([0, 0, 0], [side, side, side])))?;
    let q = mesh.quality();
    if q.nonplanar_faces + q.nonconvex_faces + q.inverted_hexes > 0 {
        return Err(Error::Mesh(format!(
            "template {code:#05x}: {} nonplanar, {} nonconvex, {} inverted",
            q.nonplanar_faces, q.nonconvex_faces, q.inverted_hexes
        )));
    }
    if q.min_scaled_jacobian <= 0.0 {
        return Err(Error::Mesh(format!(
            "template {code:#05x}: min scaled Jacobian {} not positive",
            q.min_scaled_jacobian
        )));
    }

    // Wall check: boundary quads grouped by cell face must equal the
    // catalogue pattern of that face's code, point for point.
    assert!(side % PATTERN_DEN == 0, "cell side off the pattern lattice");
    let unit = side / PATTERN_DEN;
    let mut walls: [Vec<[Pt; 4]>; 6] = Default::default();
    let mut unassigned = 0usize;
    for q in mesh.boundary_quads() {
        let pts = q.map(|i| mesh.points[i as usize]);
        let mut placed = false;
        for (face, &(axis, at)) in face_planes(side).iter().enumerate() {
            if pts.iter().all(|p| p[axis] == at) {
                walls[face].push(quad_key(pts));
                placed = true;
                break;
            }
        }
        if !placed {
            unassigned += 1;
        }
    }
    if unassigned > 0 {
        return Err(Error::Mesh(format!(
            "template {code:#05x}: {unassigned} boundary quads lie on no cell face"
        )));
    }
    for face in 0..6 {
        let mut expect: Vec<[Pt; 4]> = scheme::face_pattern(face_code(code, face))
            .quads
            .iter()
            .map(|q| {
                quad_key(q.map(|[u, v]| face_frame_at(face, [u * unit, v * unit, 0], side)))
            })
            .collect();
        expect.sort();
        walls[face].sort();
        if walls[face] != expect {
            return Err(Error::Mesh(format!(
                "template {code:#05x}: wall {face} does not match the pattern of face code {:#06b}",
                face_code(code, face)
            )));
        }
    }
    Ok(())
}

fn quad_key(mut q: [Pt; 4]) -> [Pt; 4] {
    q.sort();
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::{burnside_edge_orbits, edge_class_reps};

    #[test]
    fn bespoke_template_sizes() {
        let sizes: Vec<(u16, usize)> = data::bespoke_templates()
            .iter()
            .map(|(c, h)| (*c, h.len()))
            .collect();
        assert_eq!(
            sizes,
            vec![
                (0x000, 1),
                (0x001, 5),
                (0x003, 15),
                (0x005, 4),
                (0x00F, 13),
                (0x303, 11),
                (0x505, 3),
                (0x5F5, 9),
                (0x1F1, 12),
                (0x3F3, 33),
                (0xFFF, 27),
            ]
        );
    }

    #[test]
    fn exact_table_has_29_classes_without_three_quarter_faces() {
        let m = exact_map();
        assert_eq!(m.len(), EXACT_TABLE_SIZE);
        for (&c, _) in m.iter() {
            assert_eq!(canon_edge(c).0, c, "table key {c:#05x} must be canonical");
            assert!(!has_three_quarter_face(c), "{c:#05x} has a 3/4 face");
        }
        // The hand-built classes are all present.
        for (code, _) in data::bespoke_templates() {
            assert!(m.contains_key(&canon_edge(code).0));
        }
    }

    #[test]
    fn tier_census_over_all_classes() {
        let mut counts = std::collections::HashMap::new();
        for &rep in edge_class_reps() {
            *counts.entry(match_case(rep)).or_insert(0usize) += 1;
        }
        assert_eq!(edge_class_reps().len(), burnside_edge_orbits());
        assert_eq!(counts[&MatchCase::Exact], 29);
        assert_eq!(counts[&MatchCase::OppositeThreeQuarter], 28);
        assert_eq!(counts[&MatchCase::SingleThreeQuarter], 67);
        assert_eq!(counts[&MatchCase::General], 20);
    }

    #[test]
    fn every_class_representative_audits_cleanly() {
        for &rep in edge_class_reps() {
            let hexes = cell_hexes(rep);
            audit_cell_mesh(rep, &hexes).unwrap();
        }
    }

    #[test]
    fn universal_partition_audits_cleanly_on_all_classes() {
        for &rep in edge_class_reps() {
            audit_cell_mesh(rep, &partition_hexes(rep)).unwrap();
        }
    }

    #[test]
    fn hex_count_shortcut_matches_geometry_for_every_configuration() {
        for code in 0..4096u16 {
            assert_eq!(
                cell_hex_count(code),
                cell_hexes(code).len(),
                "count mismatch at {code:#05x}"
            );
        }
    }

    #[test]
    fn landmark_configurations() {
        assert_eq!(cell_hexes(0x000).len(), 1);
        assert_eq!(cell_hexes(0xFFF).len(), 27);
        assert_eq!(partition_hexes(0xFFF).len(), 79);
        // Three edges around one face corner-to-corner: excluded from the
        // exact table by the three-quarter-face rule, so it pays the
        // universal price.
        assert_eq!(match_case(0x007), MatchCase::SingleThreeQuarter);
        assert_eq!(cell_hexes(0x007).len(), 32);
    }

    #[test]
    fn transported_template_matches_transformed_marks() {
        // The mesh for any configuration must show the walls of that
        // configuration, not of its canonical class; spot-check a
        // non-canonical member of the adjacent-pair class.
        let code = 0x003;
        for g in Transform::all().iter().take(12) {
            let moved = g.apply_edge_code(code);
            audit_cell_mesh(moved, &cell_hexes(moved)).unwrap();
        }
    }
}

//! Grid and mesh file formats.
//!
//! Grids travel as a plain-text subdivision list (`T27GRID 1` header, one
//! `refine <depth> <i> <j> <k>` line per subdivided cell). Meshes export as
//! VTK legacy ASCII unstructured grids or MEDIT `.mesh` files; both carry
//! the integer lattice scale so a reader can recover exact positions, and
//! both writers are byte-stable on canonicalized meshes.

use crate::grid::{AdaptiveGrid, CellId};
use crate::hexmesh::HexMesh;
use crate::{Error, Result};
use std::fmt::Write as _;

const GRID_HEADER: &str = "T27GRID 1";

/// Parse the subdivision-list grid format. Order-insensitive, `#` comments,
/// duplicate and parent-closure violations rejected with the offending cell.
pub fn parse_grid_spec(text: &str) -> Result<AdaptiveGrid> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    match lines.next() {
        Some((_, l)) if l == GRID_HEADER => {}
        Some((n, l)) => {
            return Err(Error::Parse(format!(
                "line {n}: expected header `{GRID_HEADER}`, found `{l}`"
            )))
        }
        None => return Err(Error::Parse(format!("missing `{GRID_HEADER}` header"))),
    }
    let mut cells = Vec::new();
    for (n, line) in lines {
        let mut w = line.split_whitespace();
        let verb = w.next().unwrap_or("");
        if verb != "refine" {
            return Err(Error::Parse(format!(
                "line {n}: expected `refine <depth> <i> <j> <k>`, found `{line}`"
            )));
        }
        let mut num = |what: &str| -> Result<u32> {
            w.next()
                .ok_or_else(|| Error::Parse(format!("line {n}: missing {what}")))?
                .parse()
                .map_err(|e| Error::Parse(format!("line {n}: bad {what}: {e}")))
        };
        let depth = num("depth")?;
        let (i, j, k) = (num("i")?, num("j")?, num("k")?);
        if depth > u8::MAX as u32 {
            return Err(Error::Parse(format!("line {n}: depth {depth} out of range")));
        }
        if let Some(extra) = w.next() {
            return Err(Error::Parse(format!(
                "line {n}: trailing `{extra}` after coordinates"
            )));
        }
        cells.push(
            CellId::new(depth as u8, i, j, k)
                .map_err(|e| Error::Parse(format!("line {n}: {e}")))?,
        );
    }
    AdaptiveGrid::from_internal_cells(&cells)
}

/// Emit the subdivision list, sorted, so equal grids serialize identically.
pub fn emit_grid_spec(grid: &AdaptiveGrid) -> String {
    let mut out = String::from(GRID_HEADER);
    out.push('\n');
    for c in grid.internal_cells() {
        writeln!(
            out,
            "refine {} {} {} {}",
            c.depth, c.coords[0], c.coords[1], c.coords[2]
        )
        .unwrap();
    }
    out
}

/// VTK legacy ASCII unstructured grid. Points are written as their integer
/// lattice coordinates (exactly representable, so round-trips are lossless)
/// and the title records the lattice scale.
pub fn write_vtk(mesh: &HexMesh) -> String {
    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    writeln!(out, "hex mesh on integer lattice scale={}", mesh.scale).unwrap();
    out.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(out, "POINTS {} double", mesh.points.len()).unwrap();
    for p in &mesh.points {
        writeln!(out, "{} {} {}", p[0], p[1], p[2]).unwrap();
    }
    writeln!(out, "CELLS {} {}", mesh.hexes.len(), 9 * mesh.hexes.len()).unwrap();
    for h in &mesh.hexes {
        writeln!(
            out,
            "8 {} {} {} {} {} {} {} {}",
            h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]
        )
        .unwrap();
    }
    writeln!(out, "CELL_TYPES {}", mesh.hexes.len()).unwrap();
    for _ in &mesh.hexes {
        out.push_str("12\n");
    }
    out
}

fn take<'a>(words: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<&'a str> {
    words
        .next()
        .ok_or_else(|| Error::Parse(format!("unexpected end of file, expected {what}")))
}

fn int<'a>(words: &mut impl Iterator<Item = &'a str>, what: &str) -> Result<i64> {
    let w = take(words, what)?;
    // Point coordinates may legitimately print as floats in foreign files;
    // only exact integers are accepted since the lattice is exact.
    if let Ok(v) = w.parse::<i64>() {
        return Ok(v);
    }
    match w.parse::<f64>() {
        Ok(f) if f.fract() == 0.0 && f.abs() < 9e15 => Ok(f as i64),
        _ => Err(Error::Parse(format!("bad {what}: `{w}`"))),
    }
}

/// Read back a [`write_vtk`] file (testing aid). Recovers exact lattice
/// positions and the declared scale.
pub fn read_vtk(text: &str) -> Result<HexMesh> {
    let scale = text
        .lines()
        .nth(1)
        .and_then(|t| t.split("scale=").nth(1))
        .and_then(|s| s.trim().parse::<i64>().ok())
        .ok_or_else(|| Error::Parse("missing scale= in the VTK title line".into()))?;
    let mut words = text
        .lines()
        .skip(2)
        .flat_map(|l| l.split_whitespace());
    for expect in ["ASCII", "DATASET", "UNSTRUCTURED_GRID", "POINTS"] {
        let w = take(&mut words, expect)?;
        if w != expect {
            return Err(Error::Parse(format!("expected `{expect}`, found `{w}`")));
        }
    }
    let npoints = int(&mut words, "point count")? as usize;
    take(&mut words, "point type")?;
    let mut points = Vec::with_capacity(npoints);
    for _ in 0..npoints {
        let mut p = [0i64; 3];
        for v in &mut p {
            *v = int(&mut words, "point coordinate")?;
        }
        points.push(p);
    }
    let w = take(&mut words, "CELLS")?;
    if w != "CELLS" {
        return Err(Error::Parse(format!("expected `CELLS`, found `{w}`")));
    }
    let ncells = int(&mut words, "cell count")? as usize;
    int(&mut words, "cell list size")?;
    let mut hexes = Vec::with_capacity(ncells);
    for _ in 0..ncells {
        let n = int(&mut words, "cell arity")?;
        if n != 8 {
            return Err(Error::Parse(format!("cell with {n} nodes, expected 8")));
        }
        let mut h = [0u32; 8];
        for v in &mut h {
            let i = int(&mut words, "point index")?;
            if i < 0 || i as usize >= npoints {
                return Err(Error::Parse(format!("point index {i} out of range")));
            }
            *v = i as u32;
        }
        hexes.push(h);
    }
    Ok(HexMesh {
        scale,
        points,
        hexes,
    })
}

/// MEDIT `.mesh` with a Hexahedra section, 1-based indices, and the lattice
/// scale in a leading comment.
pub fn write_medit(mesh: &HexMesh) -> String {
    let mut out = String::new();
    out.push_str("MeshVersionFormatted 2\n");
    writeln!(out, "# scale {}", mesh.scale).unwrap();
    out.push_str("Dimension\n3\n");
    writeln!(out, "Vertices\n{}", mesh.points.len()).unwrap();
    for p in &mesh.points {
        writeln!(out, "{} {} {} 0", p[0], p[1], p[2]).unwrap();
    }
    writeln!(out, "Hexahedra\n{}", mesh.hexes.len()).unwrap();
    for h in &mesh.hexes {
        for v in h {
            write!(out, "{} ", v + 1).unwrap();
        }
        out.push_str("0\n");
    }
    out.push_str("End\n");
    out
}

/// Read back a [`write_medit`] file (testing aid). Recovers exact lattice
/// positions and the declared scale.
pub fn read_medit(text: &str) -> Result<HexMesh> {
    let scale = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("# scale "))
        .and_then(|s| s.trim().parse::<i64>().ok())
        .ok_or_else(|| Error::Parse("missing `# scale` comment".into()))?;
    let mut words = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n")
        .split_whitespace()
        .map(str::to_owned)
        .collect::<Vec<_>>()
        .into_iter();
    let mut points = Vec::new();
    let mut hexes: Vec<[u32; 8]> = Vec::new();
    while let Some(section) = words.next() {
        match section.as_str() {
            "MeshVersionFormatted" | "Dimension" => {
                words.next();
            }
            "Vertices" => {
                let n = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse("bad vertex count".into()))?;
                for _ in 0..n {
                    let mut p = [0i64; 3];
                    for v in &mut p {
                        *v = words
                            .next()
                            .and_then(|w| w.parse::<f64>().ok())
                            .filter(|f| f.fract() == 0.0)
                            .map(|f| f as i64)
                            .ok_or_else(|| Error::Parse("bad vertex coordinate".into()))?;
                    }
                    words.next(); // reference
                    points.push(p);
                }
            }
            "Hexahedra" => {
                let n = words
                    .next()
                    .and_then(|w| w.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse("bad hexahedra count".into()))?;
                for _ in 0..n {
                    let mut h = [0u32; 8];
                    for v in &mut h {
                        let i = words
                            .next()
                            .and_then(|w| w.parse::<u32>().ok())
                            .ok_or_else(|| Error::Parse("bad hexahedron index".into()))?;
                        if i == 0 || i as usize > points.len() {
                            return Err(Error::Parse(format!("vertex index {i} out of range")));
                        }
                        *v = i - 1;
                    }
                    words.next(); // reference
                    hexes.push(h);
                }
            }
            "End" => break,
            other => {
                return Err(Error::Parse(format!("unknown section `{other}`")));
            }
        }
    }
    Ok(HexMesh {
        scale,
        points,
        hexes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::balance::{balance, BalanceCondition};
    use crate::grid::gen_random;
    use crate::hexmesh::unit_box_mesh;
    use crate::tmpl_edge;
    use proptest::prelude::*;

    #[test]
    fn grid_spec_fixed_points() {
        let g = parse_grid_spec("T27GRID 1\n").unwrap();
        assert_eq!(g.leaf_count(), 1);
        let g = parse_grid_spec("T27GRID 1\nrefine 0 0 0 0\n").unwrap();
        assert_eq!(g.leaf_count(), 27);
        // Comments, blank lines, shuffled order.
        let g = parse_grid_spec(
            "# a grid\nT27GRID 1\n\nrefine 1 2 2 2 # deepest first\nrefine 0 0 0 0\n",
        )
        .unwrap();
        assert_eq!(g.leaf_count(), 53);
    }

    #[test]
    fn grid_spec_rejects_malformed_input() {
        for (text, needle) in [
            ("", "header"),
            ("T27GRID 2\n", "header"),
            ("T27GRID 1\ncoarsen 0 0 0 0\n", "line 2"),
            ("T27GRID 1\nrefine 0 0 0\n", "missing k"),
            ("T27GRID 1\nrefine 0 0 0 0 9\n", "trailing"),
            ("T27GRID 1\nrefine 1 3 0 0\n", "line 2"),
            ("T27GRID 1\nrefine 0 0 0 0\nrefine 0 0 0 0\n", "twice"),
            ("T27GRID 1\nrefine 1 0 0 0\n", "parent"),
            ("T27GRID 1\nrefine 0 0 0 x\n", "bad k"),
        ] {
            let err = parse_grid_spec(text).unwrap_err().to_string();
            assert!(err.contains(needle), "`{text}` gave `{err}`");
        }
    }

    #[test]
    fn vtk_single_hex() {
        let m = unit_box_mesh(1);
        let text = write_vtk(&m);
        assert!(text.contains("POINTS 8 double"));
        assert!(text.contains("CELLS 1 9"));
        assert!(text.contains("CELL_TYPES 1"));
        assert_eq!(text.matches("\n12\n").count(), 1);
        let back = read_vtk(&text).unwrap();
        assert_eq!(back.scale, m.scale);
        assert_eq!(back.points, m.points);
        assert_eq!(back.hexes, m.hexes);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn grid_spec_round_trips(seed in 0u64..2000, p in 0.1f64..0.6) {
            let g = gen_random(3, p, seed);
            let back = parse_grid_spec(&emit_grid_spec(&g)).unwrap();
            prop_assert_eq!(back.internal_cells(), g.internal_cells());
        }

        #[test]
        fn mesh_exports_round_trip_and_stay_stable(seed in 0u64..500) {
            let mut g = gen_random(2, 0.3, seed);
            balance(&mut g, BalanceCondition::Moderate);
            let out = tmpl_edge::conform(&g, Default::default()).unwrap();
            let m = &out.mesh;
            let vtk = write_vtk(m);
            prop_assert_eq!(write_vtk(m), vtk.clone()); // byte-stable
            let back = read_vtk(&vtk).unwrap();
            prop_assert_eq!(&back.points, &m.points);
            prop_assert_eq!(&back.hexes, &m.hexes);
            prop_assert_eq!(back.scale, m.scale);
            let med = write_medit(m);
            prop_assert_eq!(write_medit(m), med.clone());
            let back = read_medit(&med).unwrap();
            prop_assert_eq!(&back.points, &m.points);
            prop_assert_eq!(&back.hexes, &m.hexes);
            prop_assert_eq!(back.scale, m.scale);
        }
    }
}

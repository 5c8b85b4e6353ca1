//! Run statistics.
//!
//! One end-to-end engine run summarized as a small JSON-serializable record:
//! cell count of the grid actually meshed, final hex count, their ratio, the
//! minimum scaled Jacobian, and wall time. Repeated runs agree on every
//! field except `wallTime`.

use crate::grid::AdaptiveGrid;
use crate::hexmesh::HexMesh;
use crate::{tmpl_edge, tmpl_vertex, Error, Result};
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Which conforming engine to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    #[serde(rename = "vertex")]
    Vertex,
    #[serde(rename = "edge")]
    Edge,
    #[serde(rename = "edge+greedy")]
    EdgeGreedy,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Vertex => "vertex",
            Engine::Edge => "edge",
            Engine::EdgeGreedy => "edge+greedy",
        })
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Engine> {
        match s {
            "vertex" => Ok(Engine::Vertex),
            "edge" => Ok(Engine::Edge),
            "edge+greedy" | "edge-greedy" => Ok(Engine::EdgeGreedy),
            other => Err(Error::Parse(format!(
                "unknown engine `{other}` (expected vertex, edge or edge+greedy)"
            ))),
        }
    }
}

/// Summary of one conforming run.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunStats {
    /// Leaves of the grid the templates were applied to (after balancing).
    pub initial_cells: usize,
    pub final_hexes: usize,
    /// `final_hexes / initial_cells`; exactly 1 on uniform grids.
    pub growth_ratio: f64,
    #[serde(rename = "minSJ")]
    pub min_sj: f64,
    /// Seconds; the only field that varies between repeated runs.
    pub wall_time: f64,
    pub engine: Engine,
}

impl RunStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("RunStats always serializes")
    }
}

/// Run an engine end-to-end on `grid` and summarize.
pub fn run_stats(grid: &AdaptiveGrid, engine: Engine) -> Result<(RunStats, HexMesh)> {
    let t0 = Instant::now();
    let mesh = match engine {
        Engine::Vertex => {
            tmpl_vertex::conform(grid, tmpl_vertex::EngineOptions::default())?.mesh
        }
        Engine::Edge | Engine::EdgeGreedy => {
            let opts = tmpl_edge::EngineOptions {
                strict_balance: false,
                greedy: engine == Engine::EdgeGreedy,
            };
            tmpl_edge::conform(grid, opts)?.mesh
        }
    };
    let wall_time = t0.elapsed().as_secs_f64();
    let mut balanced = grid.clone();
    crate::balance::balance(&mut balanced, crate::balance::BalanceCondition::Moderate);
    let initial_cells = balanced.leaf_count();
    let final_hexes = mesh.hexes.len();
    Ok((
        RunStats {
            initial_cells,
            final_hexes,
            growth_ratio: final_hexes as f64 / initial_cells as f64,
            min_sj: mesh.quality().min_scaled_jacobian,
            wall_time,
            engine,
        },
        mesh,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gen_surface, CellId, Surface};

    #[test]
    fn uniform_grid_has_unit_growth() {
        let mut g = AdaptiveGrid::new();
        g.refine(CellId::ROOT).unwrap();
        for eng in [Engine::Vertex, Engine::Edge, Engine::EdgeGreedy] {
            let (s, m) = run_stats(&g, eng).unwrap();
            assert_eq!(s.initial_cells, 27);
            assert_eq!(s.final_hexes, 27);
            assert_eq!(s.growth_ratio, 1.0);
            assert!((s.min_sj - 1.0).abs() < 1e-12);
            assert_eq!(m.hexes.len(), 27);
            assert_eq!(s.engine, eng);
        }
    }

    #[test]
    fn stats_are_deterministic_and_serialize() {
        let g = gen_surface(Surface::Sphere, 2);
        let (a, _) = run_stats(&g, Engine::EdgeGreedy).unwrap();
        let (b, _) = run_stats(&g, Engine::EdgeGreedy).unwrap();
        assert_eq!(a.initial_cells, b.initial_cells);
        assert_eq!(a.final_hexes, b.final_hexes);
        assert_eq!(a.min_sj, b.min_sj);
        let json = a.to_json();
        for key in ["initialCells", "finalHexes", "growthRatio", "minSJ", "wallTime"] {
            assert!(json.contains(key), "missing {key} in {json}");
        }
        assert!(json.contains("edge+greedy"));
        let back: RunStats = serde_json::from_str(&json).unwrap();
        assert_eq!(back.final_hexes, a.final_hexes);
    }

    #[test]
    fn sphere_growth_is_bounded() {
        let g = gen_surface(Surface::Sphere, 3);
        let (s, _) = run_stats(&g, Engine::Vertex).unwrap();
        assert!(s.growth_ratio <= 5.0, "growth {}", s.growth_ratio);
        assert!(s.growth_ratio > 0.0);
    }
}

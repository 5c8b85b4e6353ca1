//! Command-line pipeline: generate adaptive grids, balance them, run a
//! conforming engine, inspect and export the resulting hex meshes.
//!
//! Grids travel as the plain-text subdivision-list format, meshes as VTK
//! legacy ASCII. Every verb reads its input from a positional file (or
//! stdin when omitted) and writes to `--out` (or stdout). Identical inputs
//! and flags produce byte-identical outputs; failures print one
//! `error: ...` line on stderr and exit with status 1.

use clap::{Args, Parser, Subcommand, ValueEnum};
use hex27::balance::{balance, BalanceCondition};
use hex27::grid::{gen_random, gen_surface, AdaptiveGrid, Surface};
use hex27::hexmesh::{HexMesh, MeshBuilder};
use hex27::stats::{run_stats, Engine};
use hex27::tmpl::{self, cell_hexes, DEN};
use hex27::{io, tmpl_edge, tmpl_vertex, Error, Result};
use std::fmt::Write as _;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "hex27", version, about = "Conforming all-hex meshing of adaptive 27-tree grids")]
struct Cli {
    /// Worker threads for grid marking (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Random,
    Sphere,
    Torus,
}

#[derive(Clone, Copy, ValueEnum)]
enum Condition {
    Weak,
    Moderate,
    Strong,
}

impl From<Condition> for BalanceCondition {
    fn from(c: Condition) -> Self {
        match c {
            Condition::Weak => BalanceCondition::Weak,
            Condition::Moderate => BalanceCondition::Moderate,
            Condition::Strong => BalanceCondition::Strong,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Vertex,
    Edge,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Vtk,
    Medit,
}

#[derive(Args)]
struct EngineFlags {
    /// Conforming engine to run.
    #[arg(long, value_enum)]
    engine: EngineArg,
    /// Run the greedy mark optimizer (edge engine only).
    #[arg(long)]
    greedy: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Generate a grid (subdivision-list format).
    Gen {
        #[arg(value_enum)]
        shape: Shape,
        /// Refinement depth limit.
        #[arg(long, default_value_t = 3)]
        max_depth: u8,
        /// Per-leaf refinement probability (random shape).
        #[arg(long, default_value_t = 0.3)]
        p: f64,
        /// Generator seed (random shape).
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Balance a grid under a chosen adjacency condition.
    Balance {
        #[arg(long, value_enum, default_value_t = Condition::Moderate)]
        condition: Condition,
        /// Input grid file (stdin when omitted).
        input: Option<PathBuf>,
    },
    /// Mesh a grid into a conforming all-hex VTK mesh.
    Conform {
        #[command(flatten)]
        engine: EngineFlags,
        /// Fail instead of auto-balancing unbalanced input.
        #[arg(long)]
        strict_balance: bool,
        /// Input grid file (stdin when omitted).
        input: Option<PathBuf>,
    },
    /// Check conformity and element quality of a mesh file.
    Verify {
        /// Input mesh file, VTK or MEDIT (stdin when omitted).
        input: Option<PathBuf>,
    },
    /// Audit the template atlas: every single-cell configuration, meshed
    /// and checked, one pass/fail line each.
    Enumerate {
        #[command(flatten)]
        engine: EngineFlags,
        /// Also write each single-cell mesh as VTK into this directory.
        #[arg(long)]
        mesh_dir: Option<PathBuf>,
    },
    /// Run an engine end-to-end and report run statistics as JSON.
    Stats {
        #[command(flatten)]
        engine: EngineFlags,
        /// Input grid file (stdin when omitted).
        input: Option<PathBuf>,
    },
    /// Convert a mesh to VTK or MEDIT.
    Export {
        #[arg(long, value_enum)]
        format: Format,
        /// Input mesh file, VTK or MEDIT (stdin when omitted).
        input: Option<PathBuf>,
    },
}

fn read_input(path: &Option<PathBuf>) -> Result<String> {
    match path {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => {
            let mut s = String::new();
            std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
            Ok(s)
        }
    }
}

fn read_grid(path: &Option<PathBuf>) -> Result<AdaptiveGrid> {
    io::parse_grid_spec(&read_input(path)?)
}

/// Mesh files are VTK or MEDIT; sniff by the first line.
fn read_mesh(path: &Option<PathBuf>) -> Result<HexMesh> {
    let text = read_input(path)?;
    if text.starts_with("# vtk") {
        io::read_vtk(&text)
    } else if text.starts_with("MeshVersionFormatted") {
        io::read_medit(&text)
    } else {
        Err(Error::Parse(
            "unrecognized mesh file (expected VTK legacy ASCII or MEDIT)".into(),
        ))
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn engine_of(flags: &EngineFlags) -> Result<Engine> {
    Ok(match (flags.engine, flags.greedy) {
        (EngineArg::Vertex, false) => Engine::Vertex,
        (EngineArg::Vertex, true) => {
            return Err(Error::Parse(
                "--greedy applies to the edge engine only".into(),
            ))
        }
        (EngineArg::Edge, false) => Engine::Edge,
        (EngineArg::Edge, true) => Engine::EdgeGreedy,
    })
}

/// Unit-cell mesh of one template, for `enumerate`.
fn single_cell_mesh(hexes: &[tmpl::Hex]) -> HexMesh {
    let mut b = MeshBuilder::new(DEN);
    for h in hexes {
        b.hex(*h);
    }
    let mut m = b.finish();
    m.canonicalize();
    m
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Parse(format!("--threads: {e}")))?;
    }
    match cli.verb {
        Verb::Gen {
            shape,
            max_depth,
            p,
            seed,
        } => {
            let grid = match shape {
                Shape::Random => {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::Parse(format!("--p {p} outside [0, 1]")));
                    }
                    gen_random(max_depth, p, seed)
                }
                Shape::Sphere => gen_surface(Surface::Sphere, max_depth),
                Shape::Torus => gen_surface(Surface::Torus, max_depth),
            };
            write_output(&cli.out, &io::emit_grid_spec(&grid))?;
        }
        Verb::Balance { condition, input } => {
            let mut grid = read_grid(&input)?;
            balance(&mut grid, condition.into());
            write_output(&cli.out, &io::emit_grid_spec(&grid))?;
        }
        Verb::Conform {
            engine,
            strict_balance,
            input,
        } => {
            let grid = read_grid(&input)?;
            let mesh = match engine_of(&engine)? {
                Engine::Vertex => {
                    tmpl_vertex::conform(&grid, tmpl_vertex::EngineOptions { strict_balance })?
                        .mesh
                }
                eng => {
                    let opts = tmpl_edge::EngineOptions {
                        strict_balance,
                        greedy: eng == Engine::EdgeGreedy,
                    };
                    tmpl_edge::conform(&grid, opts)?.mesh
                }
            };
            write_output(&cli.out, &io::write_vtk(&mesh))?;
        }
        Verb::Verify { input } => {
            let mesh = read_mesh(&input)?;
            let q = mesh.quality();
            let domain = ([0; 3], [mesh.scale; 3]);
            let conformity = mesh.verify_conformity(Some(domain));
            let mut report = String::new();
            writeln!(report, "hexes: {}", mesh.hexes.len()).unwrap();
            writeln!(report, "points: {}", mesh.points.len()).unwrap();
            writeln!(report, "min scaled jacobian: {:.6}", q.min_scaled_jacobian).unwrap();
            writeln!(report, "nonplanar faces: {}", q.nonplanar_faces).unwrap();
            writeln!(report, "nonconvex faces: {}", q.nonconvex_faces).unwrap();
            writeln!(report, "inverted hexes: {}", q.inverted_hexes).unwrap();
            let ok = match conformity {
                Ok(r) => {
                    writeln!(report, "interior quads: {}", r.interior_quads).unwrap();
                    writeln!(report, "boundary quads: {}", r.boundary_quads).unwrap();
                    writeln!(report, "conforming: yes").unwrap();
                    true
                }
                Err(e) => {
                    writeln!(report, "conforming: no ({e})").unwrap();
                    false
                }
            };
            let clean =
                ok && q.nonplanar_faces == 0 && q.nonconvex_faces == 0 && q.inverted_hexes == 0;
            write_output(&cli.out, &report)?;
            if !clean {
                return Ok(1);
            }
        }
        Verb::Enumerate { engine, mesh_dir } => {
            let eng = engine_of(&engine)?;
            if let Some(dir) = &mesh_dir {
                std::fs::create_dir_all(dir)?;
            }
            let mut table = String::new();
            let mut failures = 0usize;
            let codes: Vec<u32> = match eng {
                Engine::Vertex => (0..256).collect(),
                _ => (0..4096).collect(),
            };
            for code in codes {
                let (hexes, audit, name) = match eng {
                    Engine::Vertex => {
                        let h = tmpl_vertex::vertex_cell_hexes(code as u8);
                        let audit = tmpl::audit_cell_mesh(
                            tmpl_vertex::induced_edge_code(code as u8),
                            &h,
                        );
                        (h, audit, format!("v{code:03}"))
                    }
                    _ => {
                        let h = cell_hexes(code as u16);
                        let audit = tmpl::audit_cell_mesh(code as u16, &h);
                        (h, audit, format!("e{code:04}"))
                    }
                };
                match &audit {
                    Ok(()) => {
                        writeln!(table, "{name} hexes={} PASS", hexes.len()).unwrap()
                    }
                    Err(e) => {
                        failures += 1;
                        writeln!(table, "{name} hexes={} FAIL {e}", hexes.len()).unwrap()
                    }
                }
                if let Some(dir) = &mesh_dir {
                    let m = single_cell_mesh(&hexes);
                    std::fs::write(dir.join(format!("{name}.vtk")), io::write_vtk(&m))?;
                }
            }
            writeln!(
                table,
                "total={} failures={failures}",
                match eng {
                    Engine::Vertex => 256,
                    _ => 4096,
                }
            )
            .unwrap();
            write_output(&cli.out, &table)?;
            if failures > 0 {
                return Ok(1);
            }
        }
        Verb::Stats { engine, input } => {
            let grid = read_grid(&input)?;
            let (stats, _) = run_stats(&grid, engine_of(&engine)?)?;
            let mut text = stats.to_json();
            text.push('\n');
            write_output(&cli.out, &text)?;
        }
        Verb::Export { format, input } => {
            let mesh = read_mesh(&input)?;
            let text = match format {
                Format::Vtk => io::write_vtk(&mesh),
                Format::Medit => io::write_medit(&mesh),
            };
            write_output(&cli.out, &text)?;
        }
    }
    Ok(0)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are not failures.
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            eprintln!("error: {}", e.to_string().lines().next().unwrap_or("bad usage"));
            std::process::exit(1);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

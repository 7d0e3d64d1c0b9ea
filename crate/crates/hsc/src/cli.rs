//! Command dispatch for the `hsc` binary: encode, decode, eval, sweep,
//! and synthetic mesh generation. All heavy lifting stays in the library;
//! this module parses flags, moves bytes, and formats reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::codec::{self, container, EncoderConfig, MuGrid};
use crate::mesh::{read_mesh, write_mesh};
use crate::metrics::visual_error;
use crate::sweep::{run_sweep, write_csv, Method};
use crate::synth;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "hsc",
    version,
    about = "Spectral triangle-mesh geometry codec",
    disable_help_subcommand = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compress a mesh into a .hsc stream.
    Encode(EncodeArgs),
    /// Reconstruct a mesh from a .hsc stream.
    Decode(DecodeArgs),
    /// Compare two meshes with the displacement + smoothness metric.
    Eval(EvalArgs),
    /// Rate-distortion table over methods and target ratios.
    Sweep(SweepArgs),
    /// Generate a synthetic test mesh.
    Synth(SynthArgs),
}

/// Codec knobs shared by encode and sweep.
#[derive(Debug, Args)]
struct CodecArgs {
    /// Coded size as a fraction of raw 32-bit coordinates, in (0, 1].
    #[arg(long, default_value_t = 0.1)]
    ratio: f64,
    /// Target vertices per partition block.
    #[arg(long, default_value_t = 300)]
    block_size: u16,
    /// Potential strength search grid as LO:HI:COUNT, factors of the mean
    /// Laplacian eigenvalue, log spaced.
    #[arg(long, default_value = "1e-2:1e3:12", value_parser = parse_mu_grid)]
    mu_grid: MuGrid,
    /// Maximum appended potential bases per block; 0 disables the search.
    #[arg(long, default_value_t = 4)]
    max_subdicts: u8,
    /// Bits per stored coefficient (2..=32; 32 stores raw f32).
    #[arg(long, default_value_t = 32)]
    coeff_bits: u8,
}

impl CodecArgs {
    fn config(&self) -> EncoderConfig {
        EncoderConfig {
            target_ratio: self.ratio,
            block_size: self.block_size,
            mu_grid: self.mu_grid.clone(),
            max_subdicts: self.max_subdicts,
            coefficient_bits: self.coeff_bits,
            ..EncoderConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct EncodeArgs {
    /// Input mesh (.off or .obj).
    input: PathBuf,
    /// Output stream (.hsc).
    output: PathBuf,
    #[command(flatten)]
    codec: CodecArgs,
    /// Relabel vertices into error order instead of storing permutations.
    #[arg(long)]
    reorder: bool,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    /// Input stream (.hsc).
    input: PathBuf,
    /// Output mesh (.off).
    output: PathBuf,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Reference mesh.
    original: PathBuf,
    /// Mesh to score against the reference; same connectivity.
    reconstructed: PathBuf,
    /// Write per-vertex errors as CSV (vertex_id,error).
    #[arg(long)]
    per_vertex_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Input mesh (.off or .obj).
    input: PathBuf,
    /// Target ratios, comma separated.
    #[arg(long = "ratio", value_delimiter = ',', default_values_t = vec![0.05, 0.1, 0.2, 0.4])]
    ratios: Vec<f64>,
    /// Methods to run, comma separated; default all four.
    #[arg(long = "method", value_delimiter = ',', value_parser = Method::parse)]
    methods: Vec<Method>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    codec: CodecArgs,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Mesh family: sphere | terrain | ico.
    kind: String,
    /// Output mesh (.off).
    output: PathBuf,
    /// Generator seed; same seed, same mesh, byte for byte.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Subdivision level for sphere and ico.
    #[arg(long, default_value_t = 3)]
    subdiv: u32,
    /// Grid size for terrain as NX,NY.
    #[arg(long, default_value = "24,20", value_parser = parse_grid_dims)]
    grid: (usize, usize),
    /// Anisotropic scale for sphere as X,Y,Z.
    #[arg(long, value_parser = parse_stretch)]
    stretch: Option<[f64; 3]>,
}

fn parse_mu_grid(s: &str) -> Result<MuGrid> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("mu grid {s:?} is not LO:HI:COUNT"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo_factor: f64 = parts[0].parse().map_err(|_| bad())?;
    let hi_factor: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    if !(lo_factor > 0.0 && hi_factor >= lo_factor) {
        return Err(Error::Config(format!(
            "mu grid bounds {lo_factor}:{hi_factor} must satisfy 0 < LO <= HI"
        )));
    }
    Ok(MuGrid {
        lo_factor,
        hi_factor,
        count,
    })
}

fn parse_grid_dims(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("grid {s:?} is not NX,NY"));
    let (a, b) = s.split_once(',').ok_or_else(bad)?;
    let nx = a.trim().parse().map_err(|_| bad())?;
    let ny = b.trim().parse().map_err(|_| bad())?;
    if nx < 2 || ny < 2 {
        return Err(Error::Config("terrain grid needs at least 2x2".into()));
    }
    Ok((nx, ny))
}

fn parse_stretch(s: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Error::Config(format!("stretch {s:?} is not X,Y,Z"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut out = [0.0; 3];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| bad())?;
        if !(*slot > 0.0) {
            return Err(Error::Config("stretch factors must be positive".into()));
        }
    }
    Ok(out)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn cmd_encode(args: &EncodeArgs) -> Result<()> {
    let mesh = read_mesh(&args.input)?;
    let mut config = args.codec.config();
    config.reorder_in_place = args.reorder;
    let compressed = codec::encode(&mesh, &config)?;
    let (bytes, breakdown) = container::serialize(&compressed);
    write_bytes(&args.output, &bytes)?;
    println!(
        "encoded {} vertices, {} faces into {} blocks",
        compressed.n,
        compressed.faces.len(),
        compressed.blocks.len()
    );
    println!("compression ratio {:.6}", compressed.achieved_ratio());
    println!(
        "side info {} bits; container {} bytes ({} geometry / {} connectivity bits)",
        breakdown.side_bits,
        bytes.len(),
        breakdown.geometry_bits,
        breakdown.connectivity_bits
    );
    Ok(())
}

/// Decode fully in memory, then write through a temporary sibling so a
/// failed run never leaves a partial mesh at the target path.
fn cmd_decode(args: &DecodeArgs) -> Result<()> {
    let bytes = read_bytes(&args.input)?;
    let compressed = container::parse(&bytes)?;
    let mesh = codec::decode(&compressed)?;
    let tmp = args.output.with_extension("part");
    write_mesh(&mesh, &tmp, 9)?;
    fs::rename(&tmp, &args.output).map_err(|source| {
        let _ = fs::remove_file(&tmp);
        Error::Io {
            path: args.output.display().to_string(),
            source,
        }
    })?;
    println!(
        "decoded {} vertices, {} faces",
        mesh.vertices.len(),
        mesh.faces.len()
    );
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let original = read_mesh(&args.original)?;
    let reconstructed = read_mesh(&args.reconstructed)?;
    let report = visual_error(&original, &reconstructed)?;
    println!("visual_error {}", report.global);
    println!("rms {}", report.rms);
    println!("raw_sum {}", report.raw_sum);
    if let Some(path) = &args.per_vertex_csv {
        let mut out = String::from("vertex_id,error\n");
        for (i, e) in report.per_vertex.iter().enumerate() {
            out.push_str(&format!("{i},{e}\n"));
        }
        write_bytes(path, out.as_bytes())?;
        println!("wrote {} per-vertex rows to {}", report.per_vertex.len(), path.display());
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let mesh = read_mesh(&args.input)?;
    let methods: &[Method] = if args.methods.is_empty() {
        &Method::ALL
    } else {
        &args.methods
    };
    let config = args.codec.config();
    let rows = run_sweep(&mesh, methods, &args.ratios, &config)?;
    let table = write_csv(&rows);
    match &args.csv {
        Some(path) => {
            write_bytes(path, table.as_bytes())?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => print!("{table}"),
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let mesh = match args.kind.as_str() {
        "sphere" => synth::detail_sphere(args.subdiv, args.seed, args.stretch),
        "terrain" => synth::terrain(args.grid.0, args.grid.1, args.seed),
        "ico" => synth::icosphere(args.subdiv),
        other => {
            return Err(Error::Config(format!(
                "unknown mesh kind {other:?}; expected sphere, terrain, or ico"
            )))
        }
    };
    write_mesh(&mesh, &args.output, 9)?;
    println!(
        "wrote {} vertices, {} faces to {}",
        mesh.vertices.len(),
        mesh.faces.len(),
        args.output.display()
    );
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Encode(args) => cmd_encode(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Synth(args) => cmd_synth(args),
    }
}

/// Entry point for the binary. Usage problems exit 1, I/O 2, malformed
/// input 3, numerical failures 4; clap's default usage code is remapped.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

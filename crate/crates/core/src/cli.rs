//! Command-line front end. Exit codes: 0 when every verdict passes, 1 when
//! some verdict fails, 2 on usage, configuration or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::correlation::{cor_exact, cor_numeric};
use crate::error::{Error, Result};
use crate::experiments::{self, ExperimentConfig, ExperimentReport, HighDiscConfig};
use crate::lattice::HaarSampler;
use crate::orbits::{canonicalize, orbit_count_bruteforce, PrimPair};
use crate::regions::{CylinderStack, Plate, Region2, RegionSpec};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "heislat", version, about = "Primitive lattice point experiments in the Heisenberg group")]
struct Cli {
    /// Master seed; required by every command that samples lattices.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: u64,
    /// Write output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Space {
    Euclidean,
    Heisenberg,
}

#[derive(Debug, Args)]
struct PlateArgs {
    /// Region JSON file; may carry `z` and `eps`.
    #[arg(long)]
    region: PathBuf,
    /// Plate thickness; overrides the region file.
    #[arg(long)]
    eps: Option<f64>,
    /// Plate level; overrides the region file.
    #[arg(long)]
    z: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw Haar-random lattices.
    Sample {
        #[arg(long, value_enum, default_value_t = Space::Heisenberg)]
        space: Space,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Mean lattice point count against the mean value formula.
    Mean {
        #[arg(long, value_enum, default_value_t = Space::Heisenberg)]
        space: Space,
        #[command(flatten)]
        plate: PlateArgs,
    },
    /// Second moment of a plate count against its exact decomposition.
    VarIdentity {
        #[command(flatten)]
        plate: PlateArgs,
    },
    /// Second central moment against its upper bound.
    VarBound {
        #[arg(long, value_enum, default_value_t = Space::Heisenberg)]
        space: Space,
        #[command(flatten)]
        plate: PlateArgs,
    },
    /// Tail probabilities of the plate count.
    Tail {
        #[command(flatten)]
        plate: PlateArgs,
        #[arg(long = "r", value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0])]
        r_values: Vec<f64>,
    },
    /// Correlation of two primitive vectors.
    Cor {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        m: [i64; 2],
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        n: [i64; 2],
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z: f64,
        /// Also integrate numerically.
        #[arg(long)]
        numeric: bool,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
    },
    /// Canonical orbit representative of a pair of primitive vectors.
    Orbit {
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        m: [i64; 2],
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        n: [i64; 2],
    },
    /// Brute-force orbit count for one determinant.
    OrbitCount {
        #[arg(long, allow_hyphen_values = true)]
        det: i64,
        #[arg(long, default_value_t = 60)]
        height: i64,
    },
    /// Miss rates and cylinder defects of high-discrepancy sets.
    Highdisc {
        /// JSON file overriding the default set list and thresholds.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// L² deviation on a stout cylinder.
    Stout {
        #[arg(long)]
        region: PathBuf,
        /// Cylinder height |I|.
        #[arg(long)]
        height: f64,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        z: f64,
    },
    /// Heisenberg against Euclidean miss probability.
    Missprob {
        /// Plate over this region, or base of a dyadic set with --dyadic.
        #[arg(long, required_unless_present = "tube")]
        region: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<f64>,
        /// Punctured tube `DELTA,N`: disk of radius DELTA times [-N, N).
        #[arg(long, value_parser = parse_tube, conflicts_with = "region")]
        tube: Option<(f64, f64)>,
        /// Number of dyadic pieces over the region.
        #[arg(long)]
        dyadic: Option<u32>,
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
        #[arg(long, default_value_t = 0.05)]
        thicken: f64,
    },
}

fn parse_pair(s: &str) -> std::result::Result<[i64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.parse().map_err(|e| format!("{a}: {e}"))?,
            b.parse().map_err(|e| format!("{b}: {e}"))?,
        ]),
        _ => Err(format!("expected two comma-separated integers, got {s:?}")),
    }
}

fn parse_tube(s: &str) -> std::result::Result<(f64, f64), String> {
    match s.split_once(',') {
        Some((d, n)) => Ok((
            d.trim().parse().map_err(|e| format!("{d}: {e}"))?,
            n.trim().parse().map_err(|e| format!("{n}: {e}"))?,
        )),
        None => Err(format!("expected DELTA,N, got {s:?}")),
    }
}

enum Output {
    Report(ExperimentReport),
    Value(serde_json::Value),
}

impl Cli {
    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("--seed is required for this command".into()))
    }

    fn config(&self, region: Region2) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::new(region, self.trials, self.seed()?);
        cfg.threads = self.threads;
        Ok(cfg)
    }

    fn plate_config(&self, args: &PlateArgs) -> Result<ExperimentConfig> {
        let spec = read_region(&args.region)?;
        let mut cfg = self.config(spec.region)?;
        cfg.eps = args.eps.or(spec.eps).unwrap_or(cfg.eps);
        cfg.z = args.z.or(spec.z).unwrap_or(cfg.z);
        Ok(cfg)
    }
}

fn read_region(path: &PathBuf) -> Result<RegionSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    RegionSpec::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn to_value<T: Serialize>(v: T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

fn execute(cli: &Cli) -> Result<Output> {
    use Command::*;
    Ok(match &cli.command {
        Sample { space, count } => {
            let seed = cli.seed()?;
            let lattices: Vec<serde_json::Value> = (0..*count)
                .map(|i| {
                    let mut s = HaarSampler::for_trial(seed, i);
                    match space {
                        Space::Euclidean => to_value(s.sample_euclidean()),
                        Space::Heisenberg => {
                            let l = s.sample_heisenberg();
                            Ok(json!({
                                "basis": l.base.basis(),
                                "fiber": l.fiber(),
                                "offset": l.offset(),
                            }))
                        }
                    }
                })
                .collect::<Result<_>>()?;
            Output::Value(json!({ "seed": seed, "lattices": lattices }))
        }
        Mean { space, plate } => {
            let cfg = cli.plate_config(plate)?;
            Output::Report(match space {
                Space::Euclidean => experiments::siegel_mean_euclidean(&cfg)?,
                Space::Heisenberg => experiments::siegel_mean_heisenberg(&cfg)?,
            })
        }
        VarIdentity { plate } => Output::Report(experiments::variance_identity_check(&cli.plate_config(plate)?)?),
        VarBound { space, plate } => {
            let cfg = cli.plate_config(plate)?;
            Output::Report(match space {
                Space::Euclidean => experiments::euclidean_variance_check(&cfg)?,
                Space::Heisenberg => experiments::variance_bound_check(&cfg)?,
            })
        }
        Tail { plate, r_values } => {
            let mut cfg = cli.plate_config(plate)?;
            cfg.r_values = r_values.clone();
            Output::Report(experiments::chebyshev_tail(&cfg)?)
        }
        Cor { m, n, eps, z, numeric, samples } => {
            let exact = cor_exact(*m, *n, *eps, *z)?;
            let class = canonicalize(&PrimPair::new(*m, *n)?)?;
            let mut out = json!({ "m": m, "n": n, "eps": eps, "z": z, "class": class, "exact": exact });
            if *numeric {
                let seed = cli.seed.unwrap_or(0);
                out["numeric"] = to_value(cor_numeric(*m, *n, *eps, *z, *samples, seed)?)?;
                out["samples"] = json!(samples);
                out["seed"] = json!(seed);
            }
            Output::Value(out)
        }
        Orbit { m, n } => Output::Value(to_value(canonicalize(&PrimPair::new(*m, *n)?)?)?),
        OrbitCount { det, height } => Output::Value(to_value(orbit_count_bruteforce(*det, *height)?)?),
        Highdisc { config } => {
            let hd = match config {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                    serde_json::from_str(&text)
                        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
                }
                None => HighDiscConfig::default(),
            };
            let cfg = cli.config(hd.miss_base.clone())?;
            Output::Report(experiments::high_disc_check(&cfg, &hd)?)
        }
        Stout { region, height, delta, z } => {
            let mut cfg = cli.config(read_region(region)?.region)?;
            cfg.height = *height;
            cfg.delta = *delta;
            cfg.z = *z;
            Output::Report(experiments::stout_cylinder_check(&cfg)?)
        }
        Missprob { region, eps, z, tube, dyadic, radius, thicken } => {
            let (cfg, stack) = match (tube, region) {
                (Some(t), _) => {
                    let stack = experiments::tube(t.0, t.1).map_err(as_config)?;
                    (cli.config(stack.cylinders[0].piece.clone())?, stack)
                }
                (None, Some(path)) => {
                    let spec = read_region(path)?;
                    let mut cfg = cli.config(spec.region.clone())?;
                    cfg.eps = eps.or(spec.eps).unwrap_or(cfg.eps);
                    cfg.z = z.or(spec.z).unwrap_or(cfg.z);
                    let stack = match dyadic {
                        Some(k) => experiments::build_high_disc_set(*radius, *thicken, *k, &spec.region),
                        None => Plate::new(spec.region, cfg.z, cfg.eps).map(|p| CylinderStack::from(&p)),
                    }
                    .map_err(as_config)?;
                    (cfg, stack)
                }
                (None, None) => return Err(Error::Config("give --region or --tube".into())),
            };
            Output::Report(experiments::miss_probability(&cfg, &stack)?)
        }
    })
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(msg) => Error::Config(msg),
        other => other,
    }
}

fn render(cli: &Cli, output: &Output) -> Result<(String, i32)> {
    match output {
        Output::Report(r) => {
            let code = if r.passed() { EXIT_PASS } else { EXIT_FAIL };
            let text = match cli.format {
                Format::Json => r.to_json()? + "\n",
                Format::Csv => r.to_csv()?,
            };
            Ok((text, code))
        }
        Output::Value(v) => match cli.format {
            Format::Json => Ok((serde_json::to_string_pretty(v)? + "\n", EXIT_PASS)),
            Format::Csv => Err(Error::Config("csv output is only available for experiment reports".into())),
        },
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    let result = execute(&cli).and_then(|out| render(&cli, &out));
    let (text, code) = match result {
        Ok(x) => x,
        Err(e) => {
            eprintln!("heislat: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, &text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("heislat: cannot write output: {e}");
        return EXIT_USAGE;
    }
    code
}

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rigidity::analysis::{self, Analysis, AnalysisConfig, Format, NonrecQuery, SlowQuery, SumsetQuery, TowerChoice};
use rigidity::error::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "rigidity",
    version,
    about = "Rigidity sequences: generators, obstructions, measures and constructions"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Global {
    /// JSON config; subcommands take the sequence and budgets from it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    precision_bits: Option<u64>,
    #[arg(long, global = true)]
    horizon: Option<u64>,
    /// Output directory; without it the JSON report goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json", value_parser = ["json", "csv", "plot-csv"])]
    format: String,
}

/// A JSON value given inline or as `@path`.
#[derive(Clone, Debug)]
struct JsonArg(serde_json::Value);

fn json_arg(s: &str) -> std::result::Result<JsonArg, String> {
    let text = match s.strip_prefix('@') {
        Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{p}: {e}"))?,
        None => s.to_string(),
    };
    serde_json::from_str(&text).map(JsonArg).map_err(|e| e.to_string())
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Terms, densities and growth of a sequence.
    Seq {
        #[arg(long, value_parser = json_arg)]
        sequence: Option<JsonArg>,
        /// Sample points N for the density d_N.
        #[arg(long, value_delimiter = ',')]
        samples: Vec<u64>,
    },
    /// Search for rigidity obstructions.
    Obstruct {
        #[arg(long, value_parser = json_arg)]
        sequence: Option<JsonArg>,
        #[arg(long, default_value_t = 4)]
        k_max: usize,
        #[arg(long, default_value_t = 8)]
        c_max: i64,
        #[arg(long, default_value_t = 16)]
        window: u64,
        /// Sumset coefficients, e.g. `1,-1`.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        sumset: Vec<i64>,
        #[arg(long, default_value_t = 1000)]
        sumset_n: u64,
        #[arg(long)]
        weyl_samples: Option<usize>,
    },
    /// Fourier gaps of a circle measure along a sequence.
    Measure {
        #[arg(long, value_parser = json_arg)]
        sequence: Option<JsonArg>,
        #[arg(long, value_parser = json_arg)]
        measure: JsonArg,
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long)]
        to: Option<u64>,
        #[arg(long, value_parser = json_arg)]
        truncation: Option<JsonArg>,
        #[arg(long)]
        wiener: Option<u64>,
    },
    /// Cutting-and-stacking towers.
    Rankone {
        #[arg(long, value_parser = json_arg)]
        sequence: Option<JsonArg>,
        /// Tower choice, e.g. `{"preset":"chacon","stages":8}`.
        #[arg(long, value_parser = json_arg)]
        tower: JsonArg,
        #[arg(long)]
        stage: Option<usize>,
        /// Delta queries `[{"k":..,"levels":[..],"n":"..","tol":".."}]`.
        #[arg(long, value_parser = json_arg)]
        delta: Option<JsonArg>,
        #[arg(long, value_delimiter = ',')]
        rigidity_bound: Vec<usize>,
        /// Run the Chacon non-recurrence checks up to this word index.
        #[arg(long)]
        chacon: Option<usize>,
    },
    /// Circle rotations by a continued fraction.
    Rotation {
        /// `golden`, `silver` (sqrt 2 - 1) or a decimal such as `0.4142135623`.
        #[arg(long, default_value = "golden")]
        alpha: String,
        #[arg(long, default_value_t = 40)]
        convergents: usize,
        #[arg(long)]
        syndetic_eps: Option<String>,
        /// `{"rule":"inverse_log"}` and optional `k_max`, `max_doublings`.
        #[arg(long, value_parser = json_arg)]
        slow: Option<JsonArg>,
        /// `{"psi":"m_log2"}` and optional `l_max`, `max_terms`.
        #[arg(long, value_parser = json_arg)]
        bounded_growth: Option<JsonArg>,
    },
    /// Odometers: cocycle bounds, coboundary test, non-recurrent sets.
    Odometer {
        #[arg(long, value_parser = json_arg)]
        ratios: Option<JsonArg>,
        #[arg(long, default_value_t = 40)]
        levels: usize,
        #[arg(long, default_value_t = 30)]
        m0_max: usize,
        #[arg(long, default_value_t = 1000)]
        cobound_terms: usize,
        #[arg(long)]
        nonrec_depth: Option<usize>,
        #[arg(long, default_value_t = 3)]
        nonrec_base_depth: usize,
        #[arg(long, value_parser = json_arg)]
        experiment: Option<JsonArg>,
    },
    /// Run every analysis listed in --config.
    Run,
}

fn from_json<T: serde::de::DeserializeOwned>(what: &str, v: JsonArg) -> Result<T> {
    serde_json::from_value(v.0).map_err(|e| Error::Config(format!("--{what}: {e}")))
}

fn build_config(cli: Cli) -> Result<(AnalysisConfig, Format, Option<PathBuf>)> {
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(p) => AnalysisConfig::from_path(p)?,
        None => AnalysisConfig::from_json("{}")?,
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(h) = g.horizon {
        cfg.budgets.horizon = h;
    }
    if g.precision_bits.is_some() {
        cfg.budgets.precision_bits = g.precision_bits;
    }
    let format: Format = g.format.parse()?;
    let out = g.out.or_else(|| cfg.output.clone());
    let analysis = match cli.cmd {
        Cmd::Run => {
            if g.config.is_none() {
                return Err(Error::Config("run needs --config".into()));
            }
            None
        }
        Cmd::Seq { sequence, samples } => {
            set_seq(&mut cfg, sequence)?;
            Some(Analysis::Growth {
                samples: samples.into_iter().map(|n| rigidity::arith::serde_big::Nat(n.into())).collect(),
                sidon_c: 2.0,
            })
        }
        Cmd::Obstruct { sequence, k_max, c_max, window, sumset, sumset_n, weyl_samples } => {
            set_seq(&mut cfg, sequence)?;
            let sumset = (!sumset.is_empty()).then_some(SumsetQuery { coeffs: sumset, n: sumset_n, budget: 100_000 });
            Some(Analysis::Obstruct { k_max, c_max, window, start: 1, sumset, weyl_samples })
        }
        Cmd::Measure { sequence, measure, from, to, truncation, wiener } => {
            set_seq(&mut cfg, sequence)?;
            Some(Analysis::Measure {
                measure: from_json("measure", measure)?,
                from,
                to,
                truncation: truncation.map(|t| from_json("truncation", t)).transpose()?.unwrap_or_default(),
                wiener,
                atom_bounds: vec![10, 50, 100, 200],
            })
        }
        Cmd::Rankone { sequence, tower, stage, delta, rigidity_bound, chacon } => {
            set_seq(&mut cfg, sequence)?;
            let tower: TowerChoice = from_json("tower", tower)?;
            let delta = delta.map(|d| from_json("delta", d)).transpose()?.unwrap_or_default();
            Some(Analysis::Rankone { tower, stage, delta, rigidity_bound, chacon })
        }
        Cmd::Rotation { alpha, convergents, syndetic_eps, slow, bounded_growth } => {
            let alpha = rigidity::rotation::ContinuedFraction::parse(&alpha)
                .map_err(|e| Error::Config(format!("--alpha: {e}")))?;
            let syndetic_eps = syndetic_eps
                .map(|s| serde_json::from_value(serde_json::Value::String(s)))
                .transpose()
                .map_err(|e| Error::Config(format!("--syndetic-eps: {e}")))?;
            let slow: Option<SlowQuery> = slow.map(|s| from_json("slow", s)).transpose()?;
            let bounded_growth = bounded_growth.map(|s| from_json("bounded-growth", s)).transpose()?;
            Some(Analysis::Rotation { alpha, convergents, syndetic_eps, slow, bounded_growth })
        }
        Cmd::Odometer { ratios, levels, m0_max, cobound_terms, nonrec_depth, nonrec_base_depth, experiment } => {
            let ratios = match ratios {
                Some(r) => from_json("ratios", r)?,
                None => rigidity::sequences::RatioRule::Arithmetic { start: 2, step: 1 },
            };
            let nonrec = nonrec_depth.map(|depth| NonrecQuery {
                depth,
                base_depth: nonrec_base_depth,
                budget: rigidity::arith::serde_big::Rat(rigidity::arith::rat(1, 100)),
                max_selected: 20,
            });
            let experiment = experiment.map(|e| from_json("experiment", e)).transpose()?;
            Some(Analysis::Odometer { ratios, levels, m0_max, cobound_terms, nonrec, experiment })
        }
    };
    if let Some(a) = analysis {
        cfg.analyses = vec![a];
    }
    cfg.validate()?;
    Ok((cfg, format, out))
}

fn set_seq(cfg: &mut AnalysisConfig, seq: Option<JsonArg>) -> Result<()> {
    if let Some(s) = seq {
        cfg.sequence = Some(from_json("sequence", s)?);
    }
    Ok(())
}

fn main_inner() -> Result<i32> {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return Err(Error::Config("invalid arguments".into()));
        }
        Err(e) => {
            let _ = e.print();
            return Ok(0);
        }
    };
    let (cfg, format, out) = build_config(cli)?;
    let (report, meta) = analysis::run(&cfg);
    match out {
        Some(dir) => {
            for p in analysis::emit(&report, format, &dir)? {
                eprintln!("wrote {}", p.display());
            }
            analysis::write_metadata(&meta, &dir)?;
        }
        None if format == Format::Json => {
            // a closed pipe (e.g. `| head`) is not an error of the run
            let _ = writeln!(std::io::stdout().lock(), "{}", analysis::to_json_string(&report));
        }
        None => return Err(Error::Config("csv formats need --out".into())),
    }
    for (key, e) in &report.entries {
        if let Some(err) = &e.error {
            eprintln!("{key}: {} error: {}", err.kind, err.message);
        }
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

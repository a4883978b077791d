//! The `wbp-active` command line.

pub mod manifest;

pub use manifest::{sha256_hex, CodeRecord, RunManifest};

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::active::{
    checkpoint_dir, estimate_theta, load_checkpoint, save_checkpoint, IterationRecord, TrainRunConfig,
    Trainer,
};
use crate::channel::snr_to_sigma;
use crate::codes::{
    degree_profile, fixtures, parse_alist, rank_gf2, CodeSpec, DegreeCount, ParityCheckMatrix,
    MAX_ENUM_DIMENSION,
};
use crate::decoder::{Decoder, TannerGraph, WeightSet, DEFAULT_CLIP};
use crate::error::{Error, Result};
use crate::eval::{stats_to_csv, sweep, Budget};
use crate::rng::{stream, Purpose};
use crate::shells::{tilted_pmf, ShellPartition, ShellSampler, ThetaProfile};

#[derive(Debug, Parser)]
#[command(
    name = "wbp-active",
    version,
    about = "Weighted BP decoders trained with shell-based active sampling"
)]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "WBP_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a summary of a parity-check matrix.
    Info(InfoArgs),
    /// Run active training from a TOML config.
    Train(TrainArgs),
    /// Monte Carlo FER/BER over an SNR grid.
    Eval(EvalArgs),
    /// Estimate per-shell error ratios against the untilted Chi law.
    Theta(ThetaArgs),
    /// Histogram of shells sampled from the law tilted by a theta CSV.
    SampleHist(SampleHistArgs),
    /// Compare two eval CSVs; fails if the first is worse at every SNR.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    /// Alist file or built-in fixture name.
    pub code: String,
    /// Known minimum distance, for codes too large to enumerate.
    #[arg(long)]
    pub d_min: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub config: PathBuf,
    /// Output directory for checkpoints, logs and the manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Checkpoint directory (`iter_NNN`) to continue from.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Keep theta = 1 throughout (conventional training on Chi-radial samples).
    #[arg(long)]
    pub freeze_theta: bool,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DecoderArgs {
    /// Alist file or built-in fixture name.
    #[arg(long)]
    pub code: String,
    /// Trained weight file.
    #[arg(long, conflicts_with = "unit_weights", required_unless_present = "unit_weights")]
    pub weights: Option<PathBuf>,
    /// Plain BP (all weights 1).
    #[arg(long)]
    pub unit_weights: bool,
    /// Decoder iterations for `--unit-weights`.
    #[arg(long, default_value_t = 5)]
    pub layers: usize,
    #[arg(long, default_value_t = DEFAULT_CLIP)]
    pub clip: f64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub decoder: DecoderArgs,
    /// SNR grid in dB: `a,b,c` or `start:stop:step` (inclusive).
    #[arg(long, default_value = "0:8:1")]
    pub snr: String,
    #[arg(long, default_value_t = 100)]
    pub min_errors: u64,
    #[arg(long, default_value_t = 100_000_000)]
    pub max_blocks: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThetaArgs {
    #[command(flatten)]
    pub decoder: DecoderArgs,
    #[arg(long)]
    pub snr: f64,
    #[arg(long, default_value_t = 400)]
    pub shells: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.7)]
    pub gamma: f64,
    #[arg(long, default_value_t = 5)]
    pub tail_extend: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Receives `theta_raw.csv` and `theta_filled.csv`.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleHistArgs {
    /// Alist file or built-in fixture name.
    #[arg(long)]
    pub code: String,
    #[arg(long)]
    pub snr: f64,
    #[arg(long, default_value_t = 400)]
    pub shells: usize,
    /// Theta profile CSV (as written by `theta` or a checkpoint).
    #[arg(long)]
    pub theta: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub trained: PathBuf,
    pub unit: PathBuf,
}

/// Exit status for an error: 2 for bad input, 1 for runtime failures.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } | Error::NoConvergence(_) | Error::DegenerateTilt => 1,
        _ => 2,
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot start {n} workers: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Info(a) => cmd_info(&a).map(|s| {
            print!("{s}");
            ExitCode::SUCCESS
        }),
        Command::Train(a) => cmd_train(&a).map(|_| ExitCode::SUCCESS),
        Command::Eval(a) => cmd_eval(&a).map(|_| ExitCode::SUCCESS),
        Command::Theta(a) => cmd_theta(&a).map(|_| ExitCode::SUCCESS),
        Command::SampleHist(a) => cmd_sample_hist(&a).map(|_| ExitCode::SUCCESS),
        Command::Compare(a) => cmd_compare(&a),
    }
}

/// Resolves a fixture name or an alist path (relative to `base`) to its text.
pub fn load_code_text(source: &str, base: Option<&Path>) -> Result<String> {
    if let Some(text) = fixtures::by_name(source) {
        return Ok(text.to_string());
    }
    let path = match base {
        Some(b) if Path::new(source).is_relative() => b.join(source),
        _ => PathBuf::from(source),
    };
    std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))
}

pub fn load_code(source: &str, base: Option<&Path>) -> Result<(ParityCheckMatrix, String)> {
    let text = load_code_text(source, base)?;
    let pcm = parse_alist(&text).map_err(|e| match e {
        Error::Alist(a) => Error::format(source, a.to_string()),
        e => e,
    })?;
    Ok((pcm, text))
}

fn profile_string(p: &[DegreeCount]) -> String {
    p.iter().map(|d| format!("{}x{}", d.count, d.degree)).collect::<Vec<_>>().join(" ")
}

pub fn cmd_info(a: &InfoArgs) -> Result<String> {
    let (pcm, _) = load_code(&a.code, None)?;
    let spec = match a.d_min {
        Some(d) => CodeSpec::new(pcm, Some(d))?,
        None => CodeSpec::with_computed_dmin(pcm)?,
    };
    let mut out = String::new();
    let d_min = spec.d_min.map_or_else(|| "?".to_string(), |d| d.to_string());
    let _ = writeln!(
        out,
        "n={} k={} rate={:.3} d_min={} E={}",
        spec.n(),
        spec.k,
        spec.rate(),
        d_min,
        spec.pcm.nnz()
    );
    let _ = writeln!(out, "m={} rank={}", spec.pcm.m(), rank_gf2(&spec.pcm));
    let _ = writeln!(out, "variable degrees: {}", profile_string(&degree_profile(spec.pcm.cols())));
    let _ = writeln!(out, "check degrees: {}", profile_string(&degree_profile(spec.pcm.rows())));
    if spec.d_min.is_none() {
        let _ = writeln!(
            out,
            "note: d_min not computed, k={} exceeds the brute-force limit {}; pass --d-min",
            spec.k, MAX_ENUM_DIMENSION
        );
    }
    Ok(out)
}

fn read_config(path: &Path) -> Result<TrainRunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TrainRunConfig::from_toml(&text)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn training_log_csv(history: &[IterationRecord]) -> String {
    let mut out = String::from("iteration,epoch,learning_rate,train_loss\n");
    for rec in history {
        for (e, (lr, loss)) in rec.learning_rates.iter().zip(&rec.epoch_losses).enumerate() {
            let _ = writeln!(out, "{},{},{:?},{:?}", rec.iteration, e + 1, lr, loss);
        }
    }
    out
}

fn validation_csv(unit: &crate::active::Validation, history: &[IterationRecord]) -> String {
    let mut out = String::from("iteration,validation_loss,validation_ber,validation_fer,improved\n");
    let _ = writeln!(out, "0,{:?},{:?},{:?},1", unit.loss, unit.ber, unit.fer);
    for rec in history {
        let v = &rec.validation;
        let _ =
            writeln!(out, "{},{:?},{:?},{:?},{}", rec.iteration, v.loss, v.ber, v.fer, rec.improved as u8);
    }
    out
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let mut config = read_config(&a.config)?;
    if a.freeze_theta {
        config.freeze_theta = true;
    }
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    let base = a.config.parent().filter(|p| !p.as_os_str().is_empty());
    let (pcm, alist) = load_code(&config.code, base)?;
    let code = CodeSpec::new(pcm, config.d_min)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;

    let mut manifest = RunManifest::new(&config, &alist);
    let mut trainer = match &a.resume {
        Some(dir) => {
            manifest.resumed_from = Some(dir.display().to_string());
            Trainer::resume(&code, &config, load_checkpoint(dir, &code, &config)?)?
        }
        None => Trainer::new(&code, &config)?,
    };
    let manifest_path = a.out.join("manifest.json");
    manifest.write(&manifest_path)?;
    write_text(&a.out.join("config.toml"), &config.to_toml())?;

    eprintln!(
        "training n={} k={} L={} on {} SNR(s); unit validation loss {:.6}",
        code.n(),
        code.k,
        config.layers,
        config.snr_list_db.len(),
        trainer.state().unit_validation.loss
    );
    while let Some(rec) = trainer.step()? {
        let support: Vec<String> =
            rec.snrs.iter().map(|s| format!("{}/{}", s.next_support.len(), config.shells)).collect();
        eprintln!(
            "iter {}: train loss {:.6}, validation loss {:.6}, BER {:.3e}{}, support {}",
            rec.iteration,
            rec.epoch_losses.last().copied().unwrap_or(f64::NAN),
            rec.validation.loss,
            rec.validation.ber,
            if rec.improved { " *" } else { "" },
            support.join(" ")
        );
        let st = trainer.state();
        save_checkpoint(&a.out, &config, st)?;
        write_text(&a.out.join("training_log.csv"), &training_log_csv(&st.history))?;
        write_text(&a.out.join("validation.csv"), &validation_csv(&st.unit_validation, &st.history))?;
    }
    let (best, report) = trainer.finish();
    best.save(&a.out.join("best_weights.bin"))?;
    let mut json = serde_json::to_string_pretty(&report).expect("report serializes");
    json.push('\n');
    write_text(&a.out.join("report.json"), &json)?;
    manifest.finished_unix = Some(manifest::unix_now());
    manifest.write(&manifest_path)?;
    eprintln!(
        "best iteration {} (validation loss {:.6}); stopped: {:?}; last checkpoint {}",
        report.best_iteration,
        report.best_validation_loss,
        report.stop,
        checkpoint_dir(&a.out, report.iterations.last().map_or(0, |r| r.iteration)).display()
    );
    Ok(())
}

/// `a,b,c` or inclusive `start:stop:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidArgument(format!("bad SNR grid `{text}`"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts[..] {
        [single] => single.split(',').map(num).collect::<Result<Vec<_>>>()?,
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + i as f64 * step).collect()
        }
        _ => return Err(bad()),
    };
    if grid.is_empty() {
        return Err(bad());
    }
    Ok(grid)
}

fn decoder_weights(d: &DecoderArgs, graph: &TannerGraph) -> Result<WeightSet> {
    let w = match &d.weights {
        Some(path) => WeightSet::load(path)?,
        None => WeightSet::unit(graph, d.layers),
    };
    w.shape().check_graph(graph)?;
    Ok(w)
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let (pcm, _) = load_code(&a.decoder.code, None)?;
    let code = CodeSpec::new(pcm, None)?;
    let graph = TannerGraph::new(&code.pcm);
    let weights = decoder_weights(&a.decoder, &graph)?;
    let decoder = Decoder::new(&graph, &weights, a.decoder.clip)?;
    let budget = Budget { min_block_errors: a.min_errors, max_blocks: a.max_blocks };
    let stats = sweep(&decoder, code.rate(), &parse_grid(&a.snr)?, budget, a.seed)?;
    let csv = stats_to_csv(&stats);
    match &a.out {
        Some(path) => write_text(path, &csv),
        None => std::io::stdout().write_all(csv.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn cmd_theta(a: &ThetaArgs) -> Result<()> {
    if !(a.gamma > 0.0 && a.gamma <= 1.0) {
        return Err(Error::InvalidArgument(format!("gamma {} not in (0, 1]", a.gamma)));
    }
    let (pcm, _) = load_code(&a.decoder.code, None)?;
    let code = CodeSpec::new(pcm, None)?;
    let graph = TannerGraph::new(&code.pcm);
    let weights = decoder_weights(&a.decoder, &graph)?;
    let decoder = Decoder::new(&graph, &weights, a.decoder.clip)?;
    let sigma = snr_to_sigma(a.snr, code.rate())?;
    let partition = ShellPartition::build(code.n(), sigma, a.shells, a.epsilon)?;
    let base = partition.shell_masses();
    let raw = estimate_theta(&decoder, &partition, &base, a.samples, sigma, a.gamma, a.seed)?;
    let filled = raw.filled(&partition, a.tail_extend);
    std::fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    raw.write_csv(&partition, &a.out_dir.join("theta_raw.csv"))?;
    filled.write_csv(&partition, &a.out_dir.join("theta_filled.csv"))
}

pub const HIST_CSV_HEADER: &str = "shell_index,r_lo,r_hi,probability,count,frequency";

pub fn cmd_sample_hist(a: &SampleHistArgs) -> Result<()> {
    let (pcm, _) = load_code(&a.code, None)?;
    let code = CodeSpec::new(pcm, None)?;
    let sigma = snr_to_sigma(a.snr, code.rate())?;
    let partition = ShellPartition::build(code.n(), sigma, a.shells, a.epsilon)?;
    let text = std::fs::read_to_string(&a.theta).map_err(|e| Error::io(&a.theta, e))?;
    let (profile, radii) = ThetaProfile::parse_csv(&text, 1.0).map_err(|m| Error::format(&a.theta, m))?;
    if profile.theta.len() != partition.len() {
        return Err(Error::Dimension {
            what: "theta profile length vs --shells",
            expected: partition.len(),
            got: profile.theta.len(),
        });
    }
    for (l, &(lo, hi)) in radii.iter().enumerate() {
        let (plo, phi) = partition.bounds(l);
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * y.abs().max(1.0);
        if !close(lo, plo) || !close(hi, phi) {
            return Err(Error::format(
                &a.theta,
                format!("shell {l} radii [{lo}, {hi}] do not match the partition [{plo}, {phi}]"),
            ));
        }
    }
    let pmf = tilted_pmf(&partition.shell_masses(), &profile.theta)?;
    let sampler = ShellSampler::new(&partition, &pmf)?;
    let mut counts = vec![0u64; partition.len()];
    let mut rng = stream(a.seed, Purpose::Histogram, 0);
    for _ in 0..a.samples {
        counts[sampler.sample_shell(&mut rng)] += 1;
    }
    let mut out = String::from(HIST_CSV_HEADER);
    out.push('\n');
    let total = a.samples.max(1) as f64;
    for (l, (&c, &p)) in counts.iter().zip(pmf.masses()).enumerate() {
        let (lo, hi) = partition.bounds(l);
        let _ = writeln!(out, "{l},{lo:?},{hi:?},{p:?},{c},{:?}", c as f64 / total);
    }
    match &a.out {
        Some(path) => write_text(path, &out),
        None => std::io::stdout().write_all(out.as_bytes()).map_err(|e| Error::io("<stdout>", e)),
    }
}

fn read_fer_column(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    let headers = reader.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != crate::eval::STATS_CSV_HEADER {
        return Err(Error::format(path, "not an eval CSV"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::format(path, e.to_string()))?;
        let get = |i: usize| rec[i].parse::<f64>().map_err(|e| Error::format(path, e.to_string()));
        rows.push((get(0)?, get(4)?));
    }
    Ok(rows)
}

/// Exit 1 if the trained FER exceeds the unit FER at every common grid point.
pub fn cmd_compare(a: &CompareArgs) -> Result<ExitCode> {
    let trained = read_fer_column(&a.trained)?;
    let unit = read_fer_column(&a.unit)?;
    let mut worse = 0;
    let mut common = 0;
    for &(snr, fer) in &trained {
        if let Some(&(_, u)) = unit.iter().find(|(s, _)| *s == snr) {
            common += 1;
            let tag = if fer > u { "worse" } else { "ok" };
            println!("snr {snr}: trained FER {fer:.4e} vs unit {u:.4e} {tag}");
            worse += usize::from(fer > u);
        }
    }
    if common == 0 {
        return Err(Error::InvalidArgument("the two CSVs share no SNR points".into()));
    }
    Ok(if worse == common { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("0:8:1").unwrap().len(), 9);
        assert_eq!(parse_grid("1,2.5").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("3:1:1").is_err());
        assert!(parse_grid("x").is_err());
    }

    #[test]
    fn info_for_hamming() {
        let s = cmd_info(&InfoArgs { code: "hamming_7_4".into(), d_min: None }).unwrap();
        assert!(s.starts_with("n=7 k=4 rate=0.571 d_min=3 E=12\n"), "{s}");
        let s = cmd_info(&InfoArgs { code: "bch_63_36".into(), d_min: None }).unwrap();
        assert!(s.contains("d_min=?") && s.contains("note:"), "{s}");
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

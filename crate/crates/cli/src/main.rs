use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use sonoptic_core::fusion::{Mode, QdaModel, TransferFunction, DEFAULT_RIDGE};
use sonoptic_core::harness::{
    build_benchmark, default_seed, extract_all, pair_features, run_monte_carlo, write_atomic,
    write_benchmark, write_features_csv, write_json, BenchmarkSpec, EvalConfig, PairFeatures,
    PipelineConfig,
};
use sonoptic_core::model::{load_manifest, read_records, save_segmentation};
use sonoptic_core::optic2sas::{optic_to_sas, LambertianHeight};
use sonoptic_core::Label;

#[derive(Parser)]
#[command(name = "sonoptic", version, about = "Paired optical/SAS underwater object classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark from a JSON spec.
    Synth {
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the spec seed and SONOPTIC_SEED.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Convert one pair's optical object into synthetic SAS maps.
    Transform {
        /// Manifest file; row `--row` is converted.
        #[arg(long)]
        pair: PathBuf,
        #[arg(long, default_value_t = 0)]
        row: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = PipelineConfig::default().height_scale_m)]
        height_scale: f64,
    },
    /// Per-pair, per-modality feature table.
    Features {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the classifier on every labeled pair.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_RIDGE)]
        ridge: f64,
    },
    /// Label every pair with a trained model.
    Classify {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "fused")]
        mode: Mode,
        /// Replace the optical weight (before normalization) with this value.
        #[arg(long)]
        force_w_opt: Option<f64>,
    },
    /// Monte-Carlo train/test evaluation.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 0.7)]
        split: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "fused")]
        mode: Mode,
        /// Transfer-weight perturbation draws; 0 skips the study.
        #[arg(long, default_value_t = 100)]
        sensitivity_draws: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut outputs = Outputs::default();
    match run(cli.command, &mut outputs) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            outputs.remove();
            let kind = e
                .downcast_ref::<sonoptic_core::Error>()
                .map_or("Error", |e| e.kind());
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {kind}: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// Output paths created by this run, deleted when the command fails.
/// Files that existed beforehand are left alone.
#[derive(Default)]
struct Outputs(Vec<PathBuf>);

impl Outputs {
    fn file(&mut self, path: &Path) -> PathBuf {
        if !path.exists() {
            self.0.push(path.to_path_buf());
        }
        path.to_path_buf()
    }

    fn remove(&self) {
        for p in &self.0 {
            let _ = if p.is_dir() { fs::remove_dir_all(p) } else { fs::remove_file(p) };
        }
    }
}

fn seed_or_default(seed: Option<u64>) -> anyhow::Result<u64> {
    Ok(match seed {
        Some(s) => s,
        None => default_seed()?,
    })
}

fn run(command: Command, outputs: &mut Outputs) -> anyhow::Result<()> {
    match command {
        Command::Synth { spec, out, seed } => synth(spec.as_deref(), &out, seed, outputs),
        Command::Transform { pair, row, out, height_scale } => {
            let records = read_records(&pair)?;
            let record = records
                .get(row)
                .ok_or_else(|| anyhow!("{} has {} rows, no row {row}", pair.display(), records.len()))?;
            let base = pair.parent().unwrap_or(Path::new("."));
            let loaded = record.load(base, row)?;
            let maps = optic_to_sas(&loaded, &LambertianHeight { height_scale_m: height_scale })?;
            save_segmentation(outputs.file(&out), &maps.to_segmentation())?;
            Ok(())
        }
        Command::Features { manifest, out } => {
            let features = features_of(&manifest)?;
            write_features_csv(&outputs.file(&out), &features)?;
            Ok(())
        }
        Command::Train { manifest, model, ridge } => {
            let samples: Vec<_> = features_of(&manifest)?.iter().filter_map(PairFeatures::training_sample).collect();
            let fitted = QdaModel::fit(&samples, ridge, TransferFunction::default_sas(), TransferFunction::default_optic())?;
            fitted.save(&outputs.file(&model))?;
            Ok(())
        }
        Command::Classify { manifest, model, out, mode, force_w_opt } => {
            let model = QdaModel::load(&model)?;
            let features = features_of(&manifest)?;
            let table = classify_table(&model, &features, mode, force_w_opt)?;
            write_atomic(&outputs.file(&out), &table)?;
            Ok(())
        }
        Command::Evaluate { manifest, trials, split, out, mode, sensitivity_draws, seed } => {
            let features = features_of(&manifest)?;
            let cfg = EvalConfig {
                trials,
                split,
                mode,
                seed: seed_or_default(seed)?,
                sensitivity_draws,
                ..EvalConfig::default()
            };
            let report = run_monte_carlo(&features, &cfg)?;
            write_json(&outputs.file(&out), &report)?;
            eprintln!("mean_diag {:.4}", report.mean_diag);
            Ok(())
        }
    }
}

fn features_of(manifest: &Path) -> anyhow::Result<Vec<PairFeatures>> {
    let pairs = load_manifest(manifest)?;
    let cfg = PipelineConfig::default();
    // name the failing pair
    match extract_all(&pairs, &cfg) {
        Ok(f) => Ok(f),
        Err(e) => {
            let bad = pairs.iter().find(|p| pair_features(p, &cfg).is_err()).map(|p| p.id.clone());
            Err(anyhow::Error::new(e).context(format!("pair {}", bad.unwrap_or_default())))
        }
    }
}

fn synth(spec: Option<&Path>, out: &Path, seed: Option<u64>, outputs: &mut Outputs) -> anyhow::Result<()> {
    let value: serde_json::Value = match spec {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_error(p, e))?;
            serde_json::from_str(&text).map_err(sonoptic_core::Error::from)?
        }
        None => serde_json::json!({}),
    };
    let has_seed = value.get("seed").is_some();
    let mut bench: BenchmarkSpec = serde_json::from_value(value).map_err(sonoptic_core::Error::from)?;
    if let Some(s) = seed {
        bench.seed = s;
    } else if !has_seed {
        bench.seed = default_seed()?;
    }
    let pairs = build_benchmark(&bench)?;
    outputs.file(out);
    let manifest = write_benchmark(&pairs, out)?;
    eprintln!("{} pairs written to {}", pairs.len(), manifest.display());
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> anyhow::Error {
    if e.kind() == std::io::ErrorKind::NotFound {
        sonoptic_core::Error::MissingFile(path.to_path_buf()).into()
    } else {
        anyhow::Error::new(e).context(path.display().to_string())
    }
}

/// Classification rows: id, label, four log-densities, normalized weights and
/// both quality indices.
fn classify_table(
    model: &QdaModel,
    features: &[PairFeatures],
    mode: Mode,
    force_w_opt: Option<f64>,
) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend(Label::ALL.iter().map(|l| format!("log_density_{l}")));
    header.extend(["w_sas", "w_opt", "psi_sas", "psi_opt"].map(String::from));
    w.write_record(&header)?;
    for f in features {
        let (w_sas, mut w_opt) = mode.weights(f.psi_sas, f.psi_opt, &model.transfer_sas, &model.transfer_opt);
        if let Some(forced) = force_w_opt {
            w_opt = forced;
        }
        let c = model
            .classify_weighted(&f.sas, &f.opt, w_sas, w_opt)
            .with_context(|| format!("pair {}", f.id))?;
        let total = c.w_sas + c.w_opt;
        let mut row = vec![f.id.clone(), c.label.to_string()];
        row.extend(c.log_densities.iter().map(f64::to_string));
        row.extend([c.w_sas / total, c.w_opt / total, f.psi_sas, f.psi_opt].iter().map(f64::to_string));
        w.write_record(&row)?;
    }
    Ok(w.into_inner()?)
}

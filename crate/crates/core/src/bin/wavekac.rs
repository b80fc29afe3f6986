use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wavekac::reconstruct::truth::GroundTruthSummary;
use wavekac::run::{self, write_atomic, RunConfig, EXIT_OK, EXIT_VERIFY_FAILED};
use wavekac::spectral_forward::SpectralData;
use wavekac::{Error, Result};

#[derive(Parser)]
#[command(name = "wavekac", version, about = "Recover a domain's geometry from its spectrum and harmonic data")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides output_dir in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed for the randomized checks (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the forward problem: spectral_data.json and ground_truth.json.
    Forward {
        #[command(flatten)]
        common: Common,
    },
    /// Blind reconstruction from spectral data.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Spectral data (default: <out>/spectral_data.json).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Test mode: compare against this ground truth after reconstructing.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Test mode: distances from oracle atoms (reads <out>/ground_truth.json
        /// unless --truth is given).
        #[arg(long)]
        oracle_atoms: bool,
    },
    /// Run the acceptance suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Run a single suite.
        #[arg(long)]
        only: Option<String>,
    },
    /// Compare Dirichlet and Krein spectra for ρ and a perturbed ρ.
    ProbeKrein {
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> Result<(RunConfig, PathBuf)> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let out = common.out.clone().or_else(|| cfg.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| ".".into());
    Ok((cfg, out))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn forward(common: &Common) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let f = run::forward(&cfg)?;
    write_atomic(&out.join("spectral_data.json"), &run::to_json(&f.spectral)?)?;
    write_atomic(&out.join("ground_truth.json"), &run::to_json(&f.truth)?)?;
    let lam = &f.spectral.lambda;
    println!("K={} M={}  λ_1={:.6}  λ_K={:.6}", f.spectral.k, f.spectral.m, lam[0], lam[lam.len() - 1]);
    let show = |v: &[f64]| v.iter().take(8).map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    println!("λ[..8]: {}", show(lam));
    println!("α[..8]: {}", show(&f.alpha));
    println!("wrote {}", out.display());
    Ok(EXIT_OK)
}

fn reconstruct(common: &Common, data: Option<&Path>, truth: Option<&Path>, oracle: bool) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let data = data.map_or_else(|| out.join("spectral_data.json"), Path::to_path_buf);
    let sd: SpectralData = read_json(&data)?;
    sd.validate()?;
    let truth_path = match (truth, oracle) {
        (Some(p), _) => Some(p.to_path_buf()),
        (None, true) => Some(out.join("ground_truth.json")),
        (None, false) => None,
    };
    let gt: Option<GroundTruthSummary> = truth_path.as_deref().map(read_json).transpose()?;
    let r = run::reconstruct(&sd, &cfg, gt.as_ref(), oracle)?;
    write_atomic(&out.join("report.json"), &run::to_json(&r.report)?)?;
    if let Some(csv) = &r.csv {
        write_atomic(&out.join("distances.csv"), csv)?;
    }
    if let Some(e) = &r.embedding {
        write_atomic(&out.join("embedding.json"), &run::to_json(e)?)?;
        write_atomic(&out.join("embedding.svg"), &e.to_svg())?;
    }
    let rep = &r.report;
    println!(
        "atoms={} family={} saturation={:?} collapse={}",
        rep.atoms.len(),
        rep.family_size,
        rep.saturation_time,
        rep.collapse.fired
    );
    if let Some(d) = &rep.distortion {
        println!("distortion: max {:.4} of diameter ({} pairs)", d.max_diameter_normalized, d.pairs);
    }
    for d in &rep.diagnostics {
        println!("diagnostic: {d}");
    }
    Ok(r.exit_code())
}

fn verify(common: &Common, only: Option<&str>) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let rep = run::verify(&cfg, only)?;
    for r in &rep.results {
        println!("{}", r.line());
    }
    write_atomic(&out.join("verify_report.json"), &run::to_json(&rep)?)?;
    Ok(if rep.all_passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}

fn probe_krein(common: &Common) -> Result<i32> {
    let (cfg, out) = load(common)?;
    let p = run::probe_krein(&cfg)?;
    write_atomic(&out.join("krein_report.json"), &run::to_json(&p)?)?;
    let show = |v: &[f64]| v.iter().take(5).map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(" ");
    println!("σ(L)   : {}", show(&p.base.dirichlet));
    println!("σ(L_M) : {}", show(&p.base.krein));
    println!("separation {:.3e}, discretization error {:.3e}", p.separation, p.discretization_error);
    println!("{}", p.interpretation);
    Ok(EXIT_OK)
}

fn init_threads() {
    if let Some(n) = std::env::var("WAVEKAC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let res = match &cli.cmd {
        Cmd::Forward { common } => forward(common),
        Cmd::Reconstruct { common, data, truth, oracle_atoms } => {
            reconstruct(common, data.as_deref(), truth.as_deref(), *oracle_atoms)
        }
        Cmd::Verify { common, only } => verify(common, only.as_deref()),
        Cmd::ProbeKrein { common } => probe_krein(common),
    };
    match res {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}", run::error_json(&e));
            ExitCode::from(run::exit_code(&e) as u8)
        }
    }
}

//! Command-line front end: state inspection, randomized verification
//! sweeps, capacity tables, and the Fock-basis oracle, with deterministic
//! CSV/JSON output. Every number printed here is computed by the library.

use std::error::Error as StdError;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gaussian_info::capacity::{capacity_sweep, nats_to_bits};
use gaussian_info::nalgebra::DVector;
use gaussian_info::num_complex::Complex64;
use gaussian_info::epi::{
    perturb_check_first_infinite, perturb_check_first_infinitesimal, perturb_check_zeroth,
    random_epi_instance, sweep_instance, LambdaPolicy, PerturbationReport, SweepRecord,
};
use gaussian_info::fisher::{
    conditional_fisher, debruijn_identity_residual, debruijn_richardson_ratio, entropy_rate,
};
use gaussian_info::fock::{
    fock_beam_splitter_apply, fock_displacement, fock_entropy, fock_relative_entropy,
    fock_tensor, fock_thermal, suggested_cutoff,
};
use gaussian_info::io::{format_sig, state_from_json};
use gaussian_info::parallel::batch_map;
use gaussian_info::state::{g_function, GaussianState};
use gaussian_info::symplectic::{random_gaussian_covariance, symplectic_gap, CovarianceMatrix};

const EPI_GAP_FLOOR: f64 = -1e-9;
const IDENTITY_RESIDUAL_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-6;
const RICHARDSON_STEP: f64 = 2e-2;
const SIG_DIGITS: usize = 12;

#[derive(Parser)]
#[command(
    name = "gaussian-info",
    version,
    about = "Gaussian bosonic state toolkit: spectra, entropies, verification sweeps, capacity tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lemma {
    /// identity-plus-noise spectra: first-order flatness
    #[value(name = "2")]
    Zeroth,
    /// rank-deficient base point: split-spectrum prediction
    #[value(name = "3i")]
    FirstInfinite,
    /// projector perturbation: per-cluster first-order shifts
    #[value(name = "3ii")]
    FirstInfinitesimal,
}

#[derive(Subcommand)]
enum Command {
    /// Check a state file against the uncertainty relation
    Validate { state: PathBuf },
    /// Print symplectic eigenvalues and the spectral gap
    Spectrum { state: PathBuf },
    /// Print the joint entropy, and optionally a conditional one
    Entropy {
        state: PathBuf,
        /// Conditional selection `TARGET|CONDITION`, block names comma-separated
        #[arg(long)]
        conditional: Option<String>,
    },
    /// Sweep random beam-splitter instances and verify the entropy-power gap
    EpiCheck {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        /// Modes per input arm
        #[arg(long)]
        modes: usize,
        /// Environment modes per input
        #[arg(long)]
        env: usize,
        /// Fixed transmissivity; omitted = drawn uniformly per instance
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Verify the entropy-rate/Fisher identity on random instances
    DebruijnCheck {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run one spectral perturbation check and print its report
    PerturbCheck {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Tabulate capacity bounds over a transmissivity grid
    Capacity {
        /// Grid `start:end:count` of transmissivities
        #[arg(long = "lambda-grid")]
        lambda_grid: String,
        #[arg(long = "N")]
        n: f64,
        #[arg(long = "NE")]
        n_e: f64,
        /// Report bits instead of nats
        #[arg(long)]
        bits: bool,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare Gaussian closed forms against the Fock-basis oracle
    Oracle {
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
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

fn run(cli: Cli) -> Result<i32, Box<dyn StdError>> {
    match cli.command {
        Command::Validate { state } => validate(&state),
        Command::Spectrum { state } => spectrum(&state),
        Command::Entropy { state, conditional } => entropy(&state, conditional.as_deref()),
        Command::EpiCheck {
            seed,
            count,
            modes,
            env,
            lambda,
            format,
            output,
        } => epi_check(seed, count, modes, env, lambda, format, output.as_deref()),
        Command::DebruijnCheck {
            seed,
            count,
            format,
            output,
        } => debruijn_check(seed, count, format, output.as_deref()),
        Command::PerturbCheck {
            lemma,
            seed,
            eps,
            output,
        } => perturb_check(lemma, seed, eps, output.as_deref()),
        Command::Capacity {
            lambda_grid,
            n,
            n_e,
            bits,
            format,
            output,
        } => capacity(&lambda_grid, n, n_e, bits, format, output.as_deref()),
        Command::Oracle { format, output } => oracle(format, output.as_deref()),
    }
}

fn load_state(path: &Path) -> Result<GaussianState, Box<dyn StdError>> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Ok(state_from_json(&text)?)
}

fn emit(output: Option<&Path>, content: &str) -> Result<(), Box<dyn StdError>> {
    match output {
        Some(path) => fs::write(path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display()).into()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn sig(value: f64) -> String {
    format_sig(value, SIG_DIGITS)
}

fn validate(path: &Path) -> Result<i32, Box<dyn StdError>> {
    let state = load_state(path)?;
    let report = state.cov().validate(1e-9);
    println!("# gaussian-info validate {}", path.display());
    println!("quantity,value");
    println!("n_modes,{}", state.n_modes());
    println!("symmetric_within,{}", sig(report.asymmetry));
    println!("min_eigenvalue_m_plus_ij,{}", sig(report.min_eigenvalue));
    println!("tolerance,{}", sig(report.tol));
    println!("valid,{}", report.ok);
    Ok(if report.ok { 0 } else { 2 })
}

fn spectrum(path: &Path) -> Result<i32, Box<dyn StdError>> {
    let state = load_state(path)?;
    let values = state.symplectic_eigenvalues();
    let gap = symplectic_gap(&values)?;
    let mut out = String::new();
    writeln!(out, "# gaussian-info spectrum {}", path.display())?;
    writeln!(out, "index,symplectic_eigenvalue")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{i},{}", sig(*v))?;
    }
    writeln!(out, "# gap={}", sig(gap))?;
    print!("{out}");
    Ok(0)
}

fn entropy(path: &Path, conditional: Option<&str>) -> Result<i32, Box<dyn StdError>> {
    let state = load_state(path)?;
    let mut out = String::new();
    writeln!(out, "# gaussian-info entropy {}", path.display())?;
    writeln!(out, "# units=nats")?;
    writeln!(out, "quantity,value_nats")?;
    writeln!(out, "joint,{}", sig(state.entropy()))?;
    if let Some(selection) = conditional {
        let (target, condition) = selection
            .split_once('|')
            .ok_or("conditional selection must look like TARGET|CONDITION")?;
        let targets: Vec<&str> = target.split(',').filter(|s| !s.is_empty()).collect();
        let conditions: Vec<&str> = condition.split(',').filter(|s| !s.is_empty()).collect();
        if targets.is_empty() {
            return Err("conditional selection needs at least one target block".into());
        }
        let value = state.conditional_entropy(&targets, &conditions)?;
        writeln!(out, "conditional({selection}),{}", sig(value))?;
    }
    print!("{out}");
    Ok(0)
}

fn epi_check(
    seed: u64,
    count: usize,
    modes: usize,
    env: usize,
    lambda: Option<f64>,
    format: Format,
    output: Option<&Path>,
) -> Result<i32, Box<dyn StdError>> {
    let policy = match lambda {
        Some(x) => LambdaPolicy::Fixed(x),
        None => LambdaPolicy::Uniform,
    };
    let seeds: Vec<u64> = (0..count as u64).map(|i| seed + i).collect();
    let records: Vec<SweepRecord> = batch_map(seeds, |s| sweep_instance(s, modes, env, policy))
        .into_iter()
        .collect::<Result<_, _>>()?;

    let mut out = String::new();
    match format {
        Format::Csv => {
            writeln!(
                out,
                "# gaussian-info epi-check seed={seed} count={count} modes={modes} env={env} lambda={}",
                lambda.map_or("uniform".into(), sig)
            )?;
            writeln!(out, "# units=nats")?;
            writeln!(
                out,
                "seed,m,L,lambda,delta0,min_delta_slope,max_fisher_residual"
            )?;
            for r in &records {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.seed,
                    r.m,
                    r.l,
                    sig(r.lambda),
                    sig(r.delta0),
                    sig(r.min_delta_slope),
                    sig(r.max_fisher_residual)
                )?;
            }
        }
        Format::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&records)?)?;
        }
    }
    emit(output, &out)?;
    let violated = records.iter().any(|r| r.delta0 < EPI_GAP_FLOOR);
    Ok(if violated { 2 } else { 0 })
}

/// One verified instance of the rate/Fisher identity.
struct DebruijnRecord {
    seed: u64,
    m: usize,
    l: usize,
    rate: f64,
    quarter_fisher: f64,
    residual: f64,
    richardson_ratio: f64,
}

fn debruijn_check(
    seed: u64,
    count: usize,
    format: Format,
    output: Option<&Path>,
) -> Result<i32, Box<dyn StdError>> {
    let seeds: Vec<(u64, u64)> = (0..count as u64).map(|i| (i, seed + i)).collect();
    let records: Vec<DebruijnRecord> = batch_map(seeds, |(i, s)| {
        let m = 1 + (i % 3) as usize;
        let l = 1 + (i % 2) as usize;
        let inst = random_epi_instance(s, m, l, LambdaPolicy::Uniform)?;
        let combined = inst.combined()?;
        let arm = combined.partition()[0].name.clone();
        let selection = [arm.as_str()];
        Ok(DebruijnRecord {
            seed: s,
            m,
            l,
            rate: entropy_rate(&combined, &selection)?,
            quarter_fisher: conditional_fisher(&combined, &selection)?.total / 4.0,
            residual: debruijn_identity_residual(&combined, &selection)?,
            richardson_ratio: debruijn_richardson_ratio(&combined, &selection, RICHARDSON_STEP)?,
        })
    })
    .into_iter()
    .collect::<Result<_, gaussian_info::Error>>()?;

    let mut out = String::new();
    match format {
        Format::Csv => {
            writeln!(out, "# gaussian-info debruijn-check seed={seed} count={count}")?;
            writeln!(out, "# units=nats")?;
            writeln!(
                out,
                "seed,m,L,rate,quarter_fisher,residual,richardson_ratio"
            )?;
            for r in &records {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.seed,
                    r.m,
                    r.l,
                    sig(r.rate),
                    sig(r.quarter_fisher),
                    sig(r.residual),
                    sig(r.richardson_ratio)
                )?;
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "seed": r.seed,
                        "m": r.m,
                        "l": r.l,
                        "rate": r.rate,
                        "quarter_fisher": r.quarter_fisher,
                        "residual": r.residual,
                        "richardson_ratio": r.richardson_ratio,
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        }
    }
    emit(output, &out)?;
    let violated = records.iter().any(|r| r.residual > IDENTITY_RESIDUAL_TOL);
    Ok(if violated { 2 } else { 0 })
}

fn perturb_check(
    lemma: Lemma,
    seed: u64,
    eps: f64,
    output: Option<&Path>,
) -> Result<i32, Box<dyn StdError>> {
    let m = random_gaussian_covariance(seed, 3, (1.2, 4.0), 0.5)?;
    let report: PerturbationReport = match lemma {
        Lemma::Zeroth => perturb_check_zeroth(&m, eps)?,
        Lemma::FirstInfinite => perturb_check_first_infinite(&m, 1, eps)?,
        Lemma::FirstInfinitesimal => perturb_check_first_infinitesimal(&m, 1, eps)?,
    };
    let mut out = String::new();
    writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
    emit(output, &out)?;
    // expected error scaling: halving eps halves first-order errors and
    // quarters second-order ones; NaN means the error vanished exactly
    let in_window = match lemma {
        Lemma::Zeroth => (0.35..=0.65).contains(&report.ratio_at_half_eps),
        Lemma::FirstInfinite | Lemma::FirstInfinitesimal => {
            (3.5..=4.5).contains(&(1.0 / report.ratio_at_half_eps))
        }
    } || report.ratio_at_half_eps.is_nan();
    Ok(if in_window { 0 } else { 2 })
}

fn parse_grid(text: &str) -> Result<Vec<f64>, Box<dyn StdError>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, end, count] = parts.as_slice() else {
        return Err("grid must look like start:end:count".into());
    };
    let start: f64 = start.parse()?;
    let end: f64 = end.parse()?;
    let count: usize = count.parse()?;
    if count == 0 || !start.is_finite() || !end.is_finite() {
        return Err("grid needs a finite range and at least one point".into());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (end - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn capacity(
    lambda_grid: &str,
    n: f64,
    n_e: f64,
    bits: bool,
    format: Format,
    output: Option<&Path>,
) -> Result<i32, Box<dyn StdError>> {
    let lambdas = parse_grid(lambda_grid)?;
    let records = capacity_sweep(&lambdas, &[n], n_e)?;
    let units = if bits { "bits" } else { "nats" };
    let convert = |v: f64| if bits { nats_to_bits(v) } else { v };

    let mut out = String::new();
    match format {
        Format::Csv => {
            writeln!(
                out,
                "# gaussian-info capacity lambda-grid={lambda_grid} N={n} NE={n_e}"
            )?;
            writeln!(out, "# units={units}")?;
            writeln!(out, "lambda,N,N_E,C_E_exact,epi_bound,naive_bound")?;
            for r in &records {
                // grid parameters echo exactly as parsed; computed bounds
                // carry 12 significant digits
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.lambda,
                    r.n,
                    r.n_e,
                    sig(convert(r.c_e_exact)),
                    sig(convert(r.epi_bound)),
                    sig(convert(r.naive_bound))
                )?;
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "lambda": r.lambda,
                        "N": r.n,
                        "N_E": r.n_e,
                        "C_E_exact": convert(r.c_e_exact),
                        "epi_bound": convert(r.epi_bound),
                        "naive_bound": convert(r.naive_bound),
                        "units": units,
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        }
    }
    emit(output, &out)?;
    let violated = records.iter().any(|r| r.ordering_violation() > 1e-9);
    Ok(if violated { 2 } else { 0 })
}

/// One closed-form-versus-oracle comparison.
struct OracleRecord {
    check: &'static str,
    gaussian: f64,
    fock: f64,
    residual: f64,
}

fn oracle(format: Format, output: Option<&Path>) -> Result<i32, Box<dyn StdError>> {
    let mut records = Vec::new();

    // thermal entropy
    let nbar = 0.8;
    let rho = fock_thermal(nbar, suggested_cutoff(nbar, 0.0))?;
    let gaussian = g_function(nbar)?;
    let fock = fock_entropy(&rho)?;
    records.push(OracleRecord {
        check: "thermal_entropy",
        gaussian,
        fock,
        residual: (gaussian - fock).abs(),
    });

    // displaced-thermal relative entropy
    let nbar = 1.0;
    let xi = DVector::from_vec(vec![1.0, 0.0]);
    let alpha = Complex64::new(xi[0], xi[1]) / Complex64::new(2.0f64.sqrt(), 0.0);
    let cutoff = suggested_cutoff(nbar, alpha.norm_sqr());
    let thermal = fock_thermal(nbar, cutoff)?;
    let displaced = thermal.evolved(&fock_displacement(alpha, cutoff)?)?;
    let gaussian = gaussian_info::fisher::relative_entropy_displaced(
        &CovarianceMatrix::thermal(1, 2.0 * nbar + 1.0)?,
        &xi,
    )?;
    let fock = fock_relative_entropy(&displaced, &thermal)?;
    records.push(OracleRecord {
        check: "displaced_relative_entropy",
        gaussian,
        fock,
        residual: (gaussian - fock).abs(),
    });

    // transmitted arm of a beam-split thermal pair
    let (nbar1, nbar2, lambda) = (0.5, 0.75, 0.4);
    let cutoff = suggested_cutoff(nbar2, 0.0);
    let joint = fock_tensor(&fock_thermal(nbar1, cutoff)?, &fock_thermal(nbar2, cutoff)?)?;
    let arm = fock_beam_splitter_apply(&joint, lambda)?.trace_out_second()?;
    let gaussian = g_function(lambda * nbar1 + (1.0 - lambda) * nbar2)?;
    let fock = fock_entropy(&arm)?;
    records.push(OracleRecord {
        check: "beam_split_arm_entropy",
        gaussian,
        fock,
        residual: (gaussian - fock).abs(),
    });

    let mut out = String::new();
    match format {
        Format::Csv => {
            writeln!(out, "# gaussian-info oracle")?;
            writeln!(out, "# units=nats tolerance={}", sig(ORACLE_TOL))?;
            writeln!(out, "check,gaussian,fock,residual")?;
            for r in &records {
                writeln!(
                    out,
                    "{},{},{},{}",
                    r.check,
                    sig(r.gaussian),
                    sig(r.fock),
                    sig(r.residual)
                )?;
            }
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = records
                .iter()
                .map(|r| {
                    json!({
                        "check": r.check,
                        "gaussian": r.gaussian,
                        "fock": r.fock,
                        "residual": r.residual,
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        }
    }
    emit(output, &out)?;
    let violated = records.iter().any(|r| r.residual > ORACLE_TOL);
    Ok(if violated { 2 } else { 0 })
}

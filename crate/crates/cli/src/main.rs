//! Command-line entry point for the rebit toolkit: dual-path simulation,
//! encoding, compilation, factorization, sampling, tomography and operator
//! membership checks over the text/JSON interchange formats.

use clap::{Parser, Subcommand, ValueEnum};
use rebit_core::circuit::{
    bitstring, encode_circuit, expand_single_ancilla, measure, run_logical, run_physical,
    strong_probabilities_dense,
};
use rebit_core::codec::{encode_state, QubitState};
use rebit_core::compiler::{factor_r_unitary, synthesize_kl_circuit};
use rebit_core::gate::Gate;
use rebit_core::hierarchy::{hierarchy_level, is_r_clifford, is_r_pauli};
use rebit_core::io::{
    format_circuit, parse_circuit, CheckReportJson, FactorizationJson, OperatorJson, RunResultJson,
    StateJson, TomoReportJson,
};
use rebit_core::stab::{compile_rclifford, StabilizerTableau};
use rebit_core::{Circuit, Error, RLinearOp};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "rebit",
    version,
    about = "Simulate, compile and analyze R-unitary circuits via the single-ancilla rebit encoding"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    Dense,
    Stabilizer,
    Auto,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CompileMode {
    Rclifford,
    Expand,
    KlCircuit,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckWhat {
    RUnitary,
    PartialAntiunitary,
    RPauli,
    RClifford,
    Level,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Run a circuit through both the logical and the encoded rebit path
    /// and report the maximum amplitude discrepancy.
    Simulate {
        /// Circuit text file.
        input: PathBuf,
        /// Optional initial state JSON (defaults to |0...0>).
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the rebit image of a circuit (text) or operator (JSON).
    Encode {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile: an R-Clifford operator into an orthogonal Clifford rebit
    /// circuit, a circuit into its single-ancilla expansion, or a
    /// reversible decider into a K_L circuit.
    Compile {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "rclifford")]
        mode: CompileMode,
        /// Result wire of the decider (kl-circuit mode).
        #[arg(long)]
        result_wire: Option<usize>,
        /// Logical qubit count of the decided language (kl-circuit mode).
        #[arg(long)]
        language_qubits: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Factor an R-unitary operator into alternating unitary / K_L
    /// factors.
    Factor {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample computational-basis outcomes from a circuit applied to
    /// |0...0>.
    Sample {
        input: PathBuf,
        #[arg(long, default_value_t = 1024)]
        shots: usize,
        /// RNG seed; 0 derives one from entropy and prints it.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "auto")]
        engine: Engine,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tomographic reconstruction of a state (qubit or rebit JSON).
    Tomo {
        input: PathBuf,
        /// When set, also report shot-sampled expectations.
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Membership checks on an operator file.
    Check {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        what: CheckWhat,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn read_to_string(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(Error::from)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_operator(path: &PathBuf) -> Result<RLinearOp, Error> {
    let text = read_to_string(path)?;
    let doc: OperatorJson = serde_json::from_str(&text)?;
    doc.to_op()
}

fn resolve_seed(seed: u64) -> u64 {
    if seed == 0 {
        let derived: u64 = rand::random();
        eprintln!("seed derived from entropy: {derived}");
        derived
    } else {
        seed
    }
}

fn stabilizer_compatible(c: &Circuit) -> bool {
    c.gates.iter().all(|g| {
        matches!(
            g,
            Gate::H(_)
                | Gate::S(_)
                | Gate::K
                | Gate::CX(_, _)
                | Gate::CK(_)
                | Gate::X(_)
                | Gate::Z(_)
                | Gate::CZ(_, _)
        )
    })
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Simulate {
            input,
            state,
            tol,
            out,
        } => {
            let circ = parse_circuit(&read_to_string(&input)?)?;
            let psi0 = match state {
                Some(path) => {
                    let doc: StateJson = serde_json::from_str(&read_to_string(&path)?)?;
                    doc.to_qubit()?
                }
                None => QubitState::zero(circ.n),
            };
            let logical = run_logical(&circ, &psi0)?;
            let physical = run_physical(&circ, &psi0)?;
            let discrepancy = logical.distance(&physical);
            let probs: BTreeMap<String, f64> = strong_probabilities_dense(&logical)
                .into_iter()
                .enumerate()
                .map(|(m, p)| (bitstring(m, circ.n), p))
                .collect();
            let result = RunResultJson {
                version: VERSION.into(),
                seed: circ.seed.unwrap_or(0),
                tolerance: tol,
                engine: "dual-dense".into(),
                shots: 0,
                counts: BTreeMap::new(),
                probs: Some(probs),
                final_state: Some(logical.amps().iter().map(|z| [z.re, z.im]).collect()),
                max_dual_path_discrepancy: Some(discrepancy),
            };
            emit(&out, &serde_json::to_string_pretty(&result)?)?;
            if discrepancy > tol {
                eprintln!("dual-path discrepancy {discrepancy:.3e} exceeds tolerance {tol:.3e}");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Encode { input, out } => {
            let text = read_to_string(&input)?;
            if let Ok(circ) = parse_circuit(&text) {
                let expanded = encode_circuit(&circ)?;
                emit(&out, &format_circuit(&expanded))?;
                return Ok(ExitCode::SUCCESS);
            }
            let doc: OperatorJson = serde_json::from_str(&text)?;
            let op = doc.to_op()?;
            let w = rebit_core::codec::encode_operator(&op);
            let flat: Vec<f64> = w
                .matrix()
                .row_iter()
                .flat_map(|r| r.iter().copied().collect::<Vec<_>>())
                .collect();
            let payload = serde_json::json!({
                "version": VERSION,
                "n_rebits": w.rebits(),
                "orthogonal": w.is_orthogonal(),
                "matrix": flat,
            });
            emit(&out, &serde_json::to_string_pretty(&payload)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Compile {
            input,
            mode,
            result_wire,
            language_qubits,
            tol,
            out,
        } => {
            match mode {
                CompileMode::Rclifford => {
                    let op = load_operator(&input)?;
                    let circ = compile_rclifford(&op, tol)?;
                    emit(&out, &format_circuit(&circ))?;
                }
                CompileMode::Expand => {
                    let circ = parse_circuit(&read_to_string(&input)?)?;
                    let expanded = expand_single_ancilla(&circ)?;
                    emit(&out, &format_circuit(&expanded))?;
                }
                CompileMode::KlCircuit => {
                    let decider = parse_circuit(&read_to_string(&input)?)?;
                    let n = language_qubits.ok_or_else(|| {
                        Error::Other("--language-qubits is required for kl-circuit mode".into())
                    })?;
                    let result = result_wire.ok_or_else(|| {
                        Error::Other("--result-wire is required for kl-circuit mode".into())
                    })?;
                    let circ = synthesize_kl_circuit(&decider, n, result)?;
                    emit(&out, &format_circuit(&circ))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Factor { input, tol, out } => {
            let op = load_operator(&input)?;
            let fact = factor_r_unitary(&op, tol)?;
            let residual = fact.reconstruct()?.distance(&op);
            let doc = FactorizationJson::from_factorization(&fact, tol, residual);
            emit(&out, &serde_json::to_string_pretty(&doc)?)?;
            if residual > tol.max(1e-8) {
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Sample {
            input,
            shots,
            seed,
            engine,
            tol,
            out,
        } => {
            let circ = parse_circuit(&read_to_string(&input)?)?;
            let seed = resolve_seed(seed);
            let engine = match engine {
                Engine::Auto => {
                    if stabilizer_compatible(&circ) {
                        Engine::Stabilizer
                    } else {
                        Engine::Dense
                    }
                }
                other => other,
            };
            let result = match engine {
                Engine::Stabilizer => {
                    if !stabilizer_compatible(&circ) {
                        return Err(Error::Other(
                            "circuit contains gates outside {H,S,K,CX,CK,X,Z,CZ}; \
                             use --engine dense"
                                .into(),
                        ));
                    }
                    let mut t = StabilizerTableau::init_zero(circ.n)?.with_seed(seed);
                    t.apply_circuit(&circ)?;
                    let samples = t.sample(shots)?;
                    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
                    for s in samples {
                        *counts.entry(bitstring(s, circ.n)).or_insert(0) += 1;
                    }
                    let probs = if circ.n <= 16 {
                        Some(
                            t.strong_probabilities()?
                                .into_iter()
                                .map(|(m, p)| (bitstring(m, circ.n), p))
                                .collect(),
                        )
                    } else {
                        None
                    };
                    RunResultJson {
                        version: VERSION.into(),
                        seed,
                        tolerance: tol,
                        engine: "stabilizer".into(),
                        shots,
                        counts,
                        probs,
                        final_state: None,
                        max_dual_path_discrepancy: None,
                    }
                }
                _ => {
                    let psi = run_logical(&circ, &QubitState::zero(circ.n))?;
                    let records = measure(&psi, shots, seed)?;
                    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
                    for r in &records {
                        *counts.entry(bitstring(r.outcome, circ.n)).or_insert(0) += 1;
                    }
                    let probs: BTreeMap<String, f64> = strong_probabilities_dense(&psi)
                        .into_iter()
                        .enumerate()
                        .map(|(m, p)| (bitstring(m, circ.n), p))
                        .collect();
                    RunResultJson {
                        version: VERSION.into(),
                        seed,
                        tolerance: tol,
                        engine: "dense".into(),
                        shots,
                        counts,
                        probs: Some(probs),
                        final_state: None,
                        max_dual_path_discrepancy: None,
                    }
                }
            };
            emit(&out, &serde_json::to_string_pretty(&result)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Tomo {
            input,
            shots,
            seed,
            out,
        } => {
            let doc: StateJson = serde_json::from_str(&read_to_string(&input)?)?;
            let psi = doc.to_qubit()?;
            let phi = encode_state(&psi);
            let m = phi.rebits();
            let rec = rebit_core::tomo::reconstruct(&phi)?;
            let observables = rebit_core::tomo::enumerate_observables(m)?;
            let mut expectations = BTreeMap::new();
            for idx in 0..observables.len() {
                let (x, z) = observables.masks()[idx];
                expectations.insert(
                    observables.label(idx),
                    rebit_core::tomo::expectation(m, x, z, &phi),
                );
            }
            let (shots_out, seed_out, stderrs) = match shots {
                Some(shots) => {
                    let seed = resolve_seed(seed);
                    let mut errs = BTreeMap::new();
                    for idx in 0..observables.len() {
                        let p = observables.pauli(idx);
                        let (_est, se) = rebit_core::tomo::sampled_expectation(
                            &p,
                            &phi,
                            shots,
                            seed ^ idx as u64,
                        )?;
                        errs.insert(observables.label(idx), se);
                    }
                    (Some(shots), seed, Some(errs))
                }
                None => (None, 0, None),
            };
            let report = TomoReportJson {
                version: VERSION.into(),
                seed: seed_out,
                tolerance: 1e-9,
                m,
                num_observables: observables.len(),
                expectations,
                reconstruction_overlap: rec.overlap,
                shots: shots_out,
                standard_errors: stderrs,
            };
            emit(&out, &serde_json::to_string_pretty(&report)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Check {
            input,
            what,
            tol,
            out,
        } => {
            let op = load_operator(&input)?;
            let n = op.qubits();
            let mut report = CheckReportJson {
                version: VERSION.into(),
                seed: 0,
                tolerance: tol,
                r_unitary: None,
                partial_antiunitary: None,
                r_pauli: None,
                decomposition: None,
                r_clifford: None,
                level: None,
            };
            let unitary = op.is_r_unitary(tol);
            if matches!(what, CheckWhat::RUnitary | CheckWhat::All) {
                report.r_unitary = Some(unitary);
            }
            if matches!(what, CheckWhat::PartialAntiunitary | CheckWhat::All) {
                report.partial_antiunitary = Some(op.is_partial_antiunitary(tol).is_some());
            }
            if matches!(what, CheckWhat::RPauli | CheckWhat::All) {
                let rp = is_r_pauli(&op, tol);
                report.r_pauli = Some(rp.is_some());
                if let Some(rp) = rp {
                    report.decomposition = Some(format!(
                        "i^{} {} K^{}",
                        rp.c,
                        rp.pauli.letters(),
                        rp.b as u8
                    ));
                }
            }
            if matches!(what, CheckWhat::RClifford | CheckWhat::All) && unitary && n <= 6 {
                report.r_clifford = Some(is_r_clifford(&op, tol)?);
            }
            if matches!(what, CheckWhat::Level | CheckWhat::All) && unitary && n <= 3 {
                report.level = Some(hierarchy_level(&op, 4, tol)?);
            }
            emit(&out, &serde_json::to_string_pretty(&report)?)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

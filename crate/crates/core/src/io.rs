//! Interchange formats: the circuit text format and the JSON schemas for
//! operators, states, factorizations and run results.
//!
//! Circuit text: a header line `qubits <n>`, then one gate per line with
//! 1-based qubit indices (`H 1`, `CX 1 2`, `CCZ 1 2 3`, `K`, `CK 2`,
//! `G 0.7853981633974483`, `KL <hex mask>`, `YROT 1 <theta>`, ...). Lines
//! starting with `#` are comments.
//!
//! All JSON rides on serde_json, whose float rendering is shortest-exact:
//! decimal round trips reproduce the doubles bit for bit.

use crate::circuit::Circuit;
use crate::compiler::{AntiunitaryFactorization, Factor};
use crate::gate::Gate;
use crate::linalg::{c, CMat, CVec};
use crate::rlinear::{Language, RLinearOp};
use crate::{Error, Result};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------
// Circuit text format
// ---------------------------------------------------------------------

pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let head = tokens.next().unwrap();
        if head.eq_ignore_ascii_case("qubits") {
            if circuit.is_some() {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "duplicate qubits header".into(),
                });
            }
            let n: usize = tokens
                .next()
                .ok_or_else(|| Error::Parse {
                    line: lineno,
                    msg: "qubits header needs a count".into(),
                })?
                .parse()
                .map_err(|_| Error::Parse {
                    line: lineno,
                    msg: "invalid qubit count".into(),
                })?;
            if n == 0 {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "qubit count must be positive".into(),
                });
            }
            circuit = Some(Circuit::new(n));
            continue;
        }
        let circ = circuit.as_mut().ok_or_else(|| Error::Parse {
            line: lineno,
            msg: "gate before qubits header".into(),
        })?;
        let n = circ.n;
        let rest: Vec<&str> = tokens.collect();
        let gate = parse_gate_line(head, &rest, n, lineno)?;
        circ.push(gate).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
    }
    circuit.ok_or_else(|| Error::Parse {
        line: 0,
        msg: "missing qubits header".into(),
    })
}

fn parse_gate_line(head: &str, rest: &[&str], n: usize, lineno: usize) -> Result<Gate> {
    let perr = |msg: String| Error::Parse { line: lineno, msg };
    let idx = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| perr(format!("invalid qubit index '{s}'")))
    };
    let angle = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| perr(format!("invalid angle '{s}'")))
    };
    let need = |k: usize| -> Result<()> {
        if rest.len() != k {
            Err(perr(format!(
                "gate {head} expects {k} argument(s), got {}",
                rest.len()
            )))
        } else {
            Ok(())
        }
    };
    let kind = head.to_ascii_uppercase();
    Ok(match kind.as_str() {
        "X" => {
            need(1)?;
            Gate::X(idx(rest[0])?)
        }
        "Y" => {
            need(1)?;
            Gate::Y(idx(rest[0])?)
        }
        "Z" => {
            need(1)?;
            Gate::Z(idx(rest[0])?)
        }
        "H" => {
            need(1)?;
            Gate::H(idx(rest[0])?)
        }
        "S" => {
            need(1)?;
            Gate::S(idx(rest[0])?)
        }
        "T" => {
            need(1)?;
            Gate::T(idx(rest[0])?)
        }
        "CX" => {
            need(2)?;
            Gate::CX(idx(rest[0])?, idx(rest[1])?)
        }
        "CZ" => {
            need(2)?;
            Gate::CZ(idx(rest[0])?, idx(rest[1])?)
        }
        "CS" => {
            need(2)?;
            Gate::CS(idx(rest[0])?, idx(rest[1])?)
        }
        "CH" => {
            need(2)?;
            Gate::CH(idx(rest[0])?, idx(rest[1])?)
        }
        "CCZ" => {
            need(3)?;
            Gate::CCZ(idx(rest[0])?, idx(rest[1])?, idx(rest[2])?)
        }
        "CCX" => {
            need(3)?;
            Gate::CCX(idx(rest[0])?, idx(rest[1])?, idx(rest[2])?)
        }
        "YROT" => {
            need(2)?;
            Gate::Yrot(idx(rest[0])?, angle(rest[1])?)
        }
        "ZROT" => {
            need(2)?;
            Gate::Zrot(idx(rest[0])?, angle(rest[1])?)
        }
        "CYROT" => {
            need(3)?;
            Gate::CYrot(idx(rest[0])?, idx(rest[1])?, angle(rest[2])?)
        }
        "G" => {
            need(1)?;
            Gate::G(angle(rest[0])?)
        }
        "R" => {
            need(2)?;
            Gate::R(idx(rest[0])?, angle(rest[1])?)
        }
        "K" => {
            need(0)?;
            Gate::K
        }
        "CK" => {
            need(1)?;
            Gate::CK(idx(rest[0])?)
        }
        "CCK" => {
            need(2)?;
            Gate::CCK(idx(rest[0])?, idx(rest[1])?)
        }
        "CHK" => {
            if rest.is_empty() {
                return Err(perr("CHK needs at least one control".into()));
            }
            let qs = rest.iter().map(|s| idx(s)).collect::<Result<Vec<_>>>()?;
            Gate::ChK(qs)
        }
        "CHZ" => {
            if rest.is_empty() {
                return Err(perr("CHZ needs at least one support".into()));
            }
            let qs = rest.iter().map(|s| idx(s)).collect::<Result<Vec<_>>>()?;
            Gate::ChZ(qs)
        }
        "KL" => {
            need(1)?;
            let lang = Language::from_hex(n, rest[0]).map_err(|e| perr(e.to_string()))?;
            Gate::KL(lang)
        }
        "LZ" => {
            need(2)?;
            let target = idx(rest[1])?;
            if n == 0 {
                return Err(perr("LZ needs a register".into()));
            }
            let lang = Language::from_hex(n - 1, rest[0]).map_err(|e| perr(e.to_string()))?;
            Gate::LZ(lang, target)
        }
        other => return Err(perr(format!("unknown gate kind '{other}'"))),
    })
}

pub fn format_gate(g: &Gate) -> String {
    match g {
        Gate::X(q) => format!("X {q}"),
        Gate::Y(q) => format!("Y {q}"),
        Gate::Z(q) => format!("Z {q}"),
        Gate::H(q) => format!("H {q}"),
        Gate::S(q) => format!("S {q}"),
        Gate::T(q) => format!("T {q}"),
        Gate::CX(a, b) => format!("CX {a} {b}"),
        Gate::CZ(a, b) => format!("CZ {a} {b}"),
        Gate::CS(a, b) => format!("CS {a} {b}"),
        Gate::CH(a, b) => format!("CH {a} {b}"),
        Gate::CCZ(a, b, t) => format!("CCZ {a} {b} {t}"),
        Gate::CCX(a, b, t) => format!("CCX {a} {b} {t}"),
        Gate::Yrot(q, th) => format!("YROT {q} {th:?}"),
        Gate::Zrot(q, th) => format!("ZROT {q} {th:?}"),
        Gate::CYrot(a, b, th) => format!("CYROT {a} {b} {th:?}"),
        Gate::G(th) => format!("G {th:?}"),
        Gate::R(q, th) => format!("R {q} {th:?}"),
        Gate::K => "K".into(),
        Gate::CK(q) => format!("CK {q}"),
        Gate::CCK(a, b) => format!("CCK {a} {b}"),
        Gate::ChK(qs) => {
            let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
            format!("CHK {}", list.join(" "))
        }
        Gate::ChZ(qs) => {
            let list: Vec<String> = qs.iter().map(|q| q.to_string()).collect();
            format!("CHZ {}", list.join(" "))
        }
        Gate::KL(lang) => format!("KL {}", lang.to_hex()),
        Gate::LZ(lang, t) => format!("LZ {} {t}", lang.to_hex()),
    }
}

pub fn format_circuit(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str(&format!("qubits {}\n", c.n));
    for g in &c.gates {
        out.push_str(&format_gate(g));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------
// JSON schemas
// ---------------------------------------------------------------------

/// Operator exchange document `{"n":..., "A":[[re,im],...], "B":[...]}`
/// with matrices flattened row-major.
#[derive(Debug, Serialize, Deserialize)]
pub struct OperatorJson {
    pub n: usize,
    #[serde(rename = "A")]
    pub a: Vec<[f64; 2]>,
    #[serde(rename = "B")]
    pub b: Vec<[f64; 2]>,
}

impl OperatorJson {
    pub fn from_op(op: &RLinearOp) -> Self {
        let d = op.dim();
        let mut a = Vec::with_capacity(d * d);
        let mut b = Vec::with_capacity(d * d);
        for r in 0..d {
            for cc in 0..d {
                let av = op.linear_part()[(r, cc)];
                let bv = op.antilinear_part()[(r, cc)];
                a.push([av.re, av.im]);
                b.push([bv.re, bv.im]);
            }
        }
        OperatorJson {
            n: op.qubits(),
            a,
            b,
        }
    }

    pub fn to_op(&self) -> Result<RLinearOp> {
        let d = 1usize << self.n;
        if self.a.len() != d * d || self.b.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "operator JSON for n={} needs {} entries per matrix",
                self.n,
                d * d
            )));
        }
        let a = CMat::from_fn(d, d, |r, cc| {
            let v = self.a[r * d + cc];
            c(v[0], v[1])
        });
        let b = CMat::from_fn(d, d, |r, cc| {
            let v = self.b[r * d + cc];
            c(v[0], v[1])
        });
        RLinearOp::new(self.n, a, b)
    }
}

/// State exchange: complex amplitudes for qubit states, plain reals for
/// rebit states.
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Qubit { n: usize, amps: Vec<[f64; 2]> },
    Rebit { n: usize, amps: Vec<f64> },
}

impl StateJson {
    pub fn from_qubit(psi: &crate::codec::QubitState) -> Self {
        StateJson::Qubit {
            n: psi.qubits(),
            amps: psi.amps().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn from_rebit(phi: &crate::codec::RebitState) -> Self {
        StateJson::Rebit {
            n: phi.qubits(),
            amps: phi.amps().iter().copied().collect(),
        }
    }

    pub fn to_qubit(&self) -> Result<crate::codec::QubitState> {
        match self {
            StateJson::Qubit { n, amps } => {
                let v = CVec::from_vec(amps.iter().map(|p| c(p[0], p[1])).collect());
                crate::codec::QubitState::new(*n, v)
            }
            StateJson::Rebit { n, amps } => {
                let v = DVector::from_vec(amps.clone());
                let phi = crate::codec::RebitState::new(*n, v)?;
                Ok(crate::codec::decode_state(&phi))
            }
        }
    }
}

/// Sampling / simulation result document. Maps are ordered so identical
/// seeds produce byte-identical output.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunResultJson {
    pub version: String,
    pub seed: u64,
    pub tolerance: f64,
    pub engine: String,
    pub shots: usize,
    pub counts: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probs: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_state: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_dual_path_discrepancy: Option<f64>,
}

/// Factorization output: a JSON list of tagged factors in application
/// order.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum FactorJson {
    #[serde(rename = "unitary")]
    Unitary { matrix: Vec<[f64; 2]> },
    #[serde(rename = "KL")]
    Kl { mask: String },
    #[serde(rename = "phase")]
    Phase { theta: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FactorizationJson {
    pub version: String,
    pub seed: u64,
    pub n: usize,
    pub tolerance: f64,
    pub conjugation_count: usize,
    pub reconstruction_residual: f64,
    pub factors: Vec<FactorJson>,
}

impl FactorizationJson {
    pub fn from_factorization(
        fact: &AntiunitaryFactorization,
        tolerance: f64,
        residual: f64,
    ) -> Self {
        let factors = fact
            .factors
            .iter()
            .map(|f| match f {
                Factor::Unitary(u) => {
                    let d = u.nrows();
                    let mut flat = Vec::with_capacity(d * d);
                    for r in 0..d {
                        for cc in 0..d {
                            flat.push([u[(r, cc)].re, u[(r, cc)].im]);
                        }
                    }
                    FactorJson::Unitary { matrix: flat }
                }
                Factor::Conjugation(lang) => FactorJson::Kl {
                    mask: lang.to_hex(),
                },
                Factor::Phase(theta) => FactorJson::Phase { theta: *theta },
            })
            .collect();
        FactorizationJson {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: 0,
            n: fact.n,
            tolerance,
            conjugation_count: fact.conjugation_count(),
            reconstruction_residual: residual,
            factors,
        }
    }
}

/// Membership-check report.
#[derive(Debug, Serialize, Deserialize)]
pub struct CheckReportJson {
    pub version: String,
    pub seed: u64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_unitary: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial_antiunitary: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_pauli: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_clifford: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<Option<usize>>,
}

/// Tomography report.
#[derive(Debug, Serialize, Deserialize)]
pub struct TomoReportJson {
    pub version: String,
    pub seed: u64,
    pub tolerance: f64,
    pub m: usize,
    pub num_observables: usize,
    pub expectations: BTreeMap<String, f64>,
    pub reconstruction_overlap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<BTreeMap<String, f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_and_format_round_trip() {
        let text = "# bell pair\nqubits 2\nH 1\nCX 1 2\nK\nCK 2\nG 0.7853981633974483\nKL 9\n";
        let circ = parse_circuit(text).unwrap();
        assert_eq!(circ.n, 2);
        assert_eq!(circ.gates.len(), 6);
        let rendered = format_circuit(&circ);
        let reparsed = parse_circuit(&rendered).unwrap();
        assert_eq!(circ, reparsed);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = parse_circuit("qubits 2\nH 1\nBAD 7\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        let err = parse_circuit("qubits 2\nH 5\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn operator_json_bit_exact_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(4, &mut rng);
        let op = RLinearOp::from_linear(2, u).unwrap();
        let doc = OperatorJson::from_op(&op);
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: OperatorJson = serde_json::from_str(&text).unwrap();
        let back = parsed.to_op().unwrap();
        // serde_json renders doubles shortest-exact, so the round trip is
        // bit-for-bit.
        assert_eq!(op.linear_part(), back.linear_part());
        assert_eq!(op.antilinear_part(), back.antilinear_part());
    }

    #[test]
    fn state_json_variants() {
        let psi = crate::codec::QubitState::from_vec(1, vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let doc = StateJson::from_qubit(&psi);
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: StateJson = serde_json::from_str(&text).unwrap();
        assert!(parsed.to_qubit().unwrap().distance(&psi) < 1e-15);

        let phi = crate::codec::encode_state(&psi);
        let doc = StateJson::from_rebit(&phi);
        let text = serde_json::to_string(&doc).unwrap();
        let parsed: StateJson = serde_json::from_str(&text).unwrap();
        assert!(parsed.to_qubit().unwrap().distance(&psi) < 1e-15);
    }
}

//! Circuit representation, R-circuit depth, dense dual-path simulation and
//! measurement sampling.
//!
//! The two simulation paths are:
//! - logical: apply each gate's R-linear action directly to the `2^n`
//!   complex amplitude vector,
//! - physical: encode the state into `2^(n+1)` real amplitudes, apply the
//!   rebit image of every gate with real kernels, decode at the end.
//!
//! Agreement of the two paths on every circuit is the central correctness
//! property of the encoding and is exercised heavily by the tests.

use crate::codec::{decode_state, encode_state, QubitState, RebitState};
use crate::gate::{gate_rebit_image, gate_to_rlinear, Gate};
use crate::linalg::CVec;
use crate::rlinear::RLinearOp;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// An ordered gate list over a fixed register width.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n: usize,
    pub gates: Vec<Gate>,
    pub name: Option<String>,
    pub seed: Option<u64>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit {
            n,
            gates: Vec::new(),
            name: None,
            seed: None,
        }
    }

    pub fn with_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.validate(self.n)?;
        self.gates.push(g);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// The whole circuit as a single dense R-linear operator.
    pub fn to_rlinear(&self) -> Result<RLinearOp> {
        let mut op = RLinearOp::identity(self.n);
        for g in &self.gates {
            op = gate_to_rlinear(g, self.n)?.star(&op)?;
        }
        Ok(op)
    }
}

/// Structural commutation used by depth layering: gates commute when their
/// supports are disjoint, except that the global phase does not commute
/// with any conjugation-type gate.
fn conflicts(a: &Gate, b: &Gate, n: usize) -> bool {
    if (a.is_phase() && b.is_conjugation()) || (b.is_phase() && a.is_conjugation()) {
        return true;
    }
    let sa = a.supports(n);
    let sb = b.supports(n);
    sa.iter().any(|q| sb.contains(q))
}

/// Greedy left-to-right layering depth. Each layer holds structurally
/// commuting gates with disjoint supports; uncovered qubits count as
/// implicit identities. The result is an upper bound on the definitional
/// minimum over arbitrary commuting partitions.
pub fn depth(c: &Circuit) -> usize {
    let mut layers: Vec<Vec<Gate>> = Vec::new();
    for g in &c.gates {
        // Deepest layer this gate conflicts with.
        let mut place = 0;
        for (i, layer) in layers.iter().enumerate().rev() {
            if layer.iter().any(|other| conflicts(g, other, c.n)) {
                place = i + 1;
                break;
            }
        }
        if place == layers.len() {
            layers.push(Vec::new());
        }
        layers[place].push(g.clone());
    }
    layers.len()
}

fn bit_pos(n: usize, qubit: usize) -> usize {
    n - qubit
}

/// Applies a gate to a complex amplitude vector in place (logical path).
pub fn apply_gate_vec(g: &Gate, n: usize, amps: &mut CVec) -> Result<()> {
    g.validate(n)?;
    let dim = 1usize << n;
    debug_assert_eq!(amps.len(), dim);
    match g {
        Gate::K => {
            for z in amps.iter_mut() {
                *z = z.conj();
            }
        }
        Gate::CK(q) => {
            let pos = bit_pos(n, *q);
            for x in 0..dim {
                if (x >> pos) & 1 == 1 {
                    amps[x] = amps[x].conj();
                }
            }
        }
        Gate::CCK(p, q) => {
            let pp = bit_pos(n, *p);
            let qp = bit_pos(n, *q);
            for x in 0..dim {
                if (x >> pp) & 1 == 1 && (x >> qp) & 1 == 1 {
                    amps[x] = amps[x].conj();
                }
            }
        }
        Gate::ChK(qs) => {
            let positions: Vec<usize> = qs.iter().map(|&q| bit_pos(n, q)).collect();
            for x in 0..dim {
                if positions.iter().all(|&p| (x >> p) & 1 == 1) {
                    amps[x] = amps[x].conj();
                }
            }
        }
        Gate::KL(lang) => {
            for x in 0..dim {
                if lang.contains(x) {
                    amps[x] = amps[x].conj();
                }
            }
        }
        Gate::G(theta) => {
            let phase = Complex64::from_polar(1.0, *theta);
            for z in amps.iter_mut() {
                *z *= phase;
            }
        }
        Gate::Z(q) => {
            let pos = bit_pos(n, *q);
            for x in 0..dim {
                if (x >> pos) & 1 == 1 {
                    amps[x] = -amps[x];
                }
            }
        }
        Gate::S(q) | Gate::T(q) => {
            let phase = match g {
                Gate::S(_) => Complex64::new(0.0, 1.0),
                _ => Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            };
            let pos = bit_pos(n, *q);
            for x in 0..dim {
                if (x >> pos) & 1 == 1 {
                    amps[x] *= phase;
                }
            }
        }
        Gate::CZ(a, b) => {
            let (pa, pb) = (bit_pos(n, *a), bit_pos(n, *b));
            for x in 0..dim {
                if (x >> pa) & 1 == 1 && (x >> pb) & 1 == 1 {
                    amps[x] = -amps[x];
                }
            }
        }
        Gate::CS(a, b) => {
            let (pa, pb) = (bit_pos(n, *a), bit_pos(n, *b));
            let i = Complex64::new(0.0, 1.0);
            for x in 0..dim {
                if (x >> pa) & 1 == 1 && (x >> pb) & 1 == 1 {
                    amps[x] *= i;
                }
            }
        }
        Gate::CCZ(a, b, t) => {
            let (pa, pb, pt) = (bit_pos(n, *a), bit_pos(n, *b), bit_pos(n, *t));
            for x in 0..dim {
                if (x >> pa) & 1 == 1 && (x >> pb) & 1 == 1 && (x >> pt) & 1 == 1 {
                    amps[x] = -amps[x];
                }
            }
        }
        Gate::ChZ(qs) => {
            let positions: Vec<usize> = qs.iter().map(|&q| bit_pos(n, q)).collect();
            for x in 0..dim {
                if positions.iter().all(|&p| (x >> p) & 1 == 1) {
                    amps[x] = -amps[x];
                }
            }
        }
        Gate::LZ(lang, target) => {
            let tpos = bit_pos(n, *target);
            for idx in 0..dim {
                if (idx >> tpos) & 1 == 1 {
                    let mut x = 0usize;
                    for wire in 1..=n {
                        if wire == *target {
                            continue;
                        }
                        x = (x << 1) | ((idx >> bit_pos(n, wire)) & 1);
                    }
                    if lang.contains(x) {
                        amps[idx] = -amps[idx];
                    }
                }
            }
        }
        Gate::X(q) => {
            let pos = bit_pos(n, *q);
            let stride = 1usize << pos;
            for base in 0..dim {
                if (base >> pos) & 1 == 0 {
                    amps.swap_rows(base, base | stride);
                }
            }
        }
        Gate::CX(ctrl, t) => {
            let (pc, pt) = (bit_pos(n, *ctrl), bit_pos(n, *t));
            for x in 0..dim {
                if (x >> pc) & 1 == 1 && (x >> pt) & 1 == 0 {
                    amps.swap_rows(x, x | (1 << pt));
                }
            }
        }
        Gate::CCX(a, b, t) => {
            let (pa, pb, pt) = (bit_pos(n, *a), bit_pos(n, *b), bit_pos(n, *t));
            for x in 0..dim {
                if (x >> pa) & 1 == 1 && (x >> pb) & 1 == 1 && (x >> pt) & 1 == 0 {
                    amps.swap_rows(x, x | (1 << pt));
                }
            }
        }
        Gate::H(q) | Gate::Yrot(q, _) | Gate::R(q, _) | Gate::Zrot(q, _) => {
            let local = single_qubit_matrix(g);
            apply_single(amps, n, *q, &local);
        }
        Gate::CH(ctrl, t) | Gate::CYrot(ctrl, t, _) => {
            let local = match g {
                Gate::CH(_, _) => single_qubit_matrix(&Gate::H(1)),
                Gate::CYrot(_, _, th) => single_qubit_matrix(&Gate::Yrot(1, *th)),
                _ => unreachable!(),
            };
            apply_controlled_single(amps, n, *ctrl, *t, &local);
        }
        Gate::Y(q) => {
            let pos = bit_pos(n, *q);
            let i = Complex64::new(0.0, 1.0);
            for x in 0..dim {
                if (x >> pos) & 1 == 0 {
                    let y = x | (1 << pos);
                    let lo = amps[x];
                    let hi = amps[y];
                    amps[x] = -i * hi;
                    amps[y] = i * lo;
                }
            }
        }
    }
    Ok(())
}

fn single_qubit_matrix(g: &Gate) -> [Complex64; 4] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match g {
        Gate::H(_) => [
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
        ],
        Gate::Yrot(_, th) => {
            let (si, co) = (th / 2.0).sin_cos();
            [
                Complex64::new(co, 0.0),
                Complex64::new(-si, 0.0),
                Complex64::new(si, 0.0),
                Complex64::new(co, 0.0),
            ]
        }
        Gate::R(_, th) => {
            let (si, co) = th.sin_cos();
            [
                Complex64::new(co, 0.0),
                Complex64::new(-si, 0.0),
                Complex64::new(si, 0.0),
                Complex64::new(co, 0.0),
            ]
        }
        Gate::Zrot(_, th) => [
            Complex64::from_polar(1.0, -th / 2.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::from_polar(1.0, th / 2.0),
        ],
        _ => unreachable!(),
    }
}

/// Stride kernel: 2x2 matrix `[m00 m01; m10 m11]` on one qubit.
fn apply_single(amps: &mut CVec, n: usize, qubit: usize, m: &[Complex64; 4]) {
    let pos = bit_pos(n, qubit);
    let dim = 1usize << n;
    let stride = 1usize << pos;
    for x in 0..dim {
        if (x >> pos) & 1 == 0 {
            let y = x | stride;
            let lo = amps[x];
            let hi = amps[y];
            amps[x] = m[0] * lo + m[1] * hi;
            amps[y] = m[2] * lo + m[3] * hi;
        }
    }
}

fn apply_controlled_single(
    amps: &mut CVec,
    n: usize,
    ctrl: usize,
    target: usize,
    m: &[Complex64; 4],
) {
    let pc = bit_pos(n, ctrl);
    let pt = bit_pos(n, target);
    let dim = 1usize << n;
    for x in 0..dim {
        if (x >> pc) & 1 == 1 && (x >> pt) & 1 == 0 {
            let y = x | (1 << pt);
            let lo = amps[x];
            let hi = amps[y];
            amps[x] = m[0] * lo + m[1] * hi;
            amps[y] = m[2] * lo + m[3] * hi;
        }
    }
}

/// Applies a real-kind gate to a real amplitude vector in place (physical
/// path). Errors on kinds with complex entries.
pub fn apply_gate_rebit(g: &Gate, m: usize, amps: &mut nalgebra::DVector<f64>) -> Result<()> {
    if !g.is_real_kind() {
        return Err(Error::UnsupportedGate {
            kind: format!("{g:?}"),
            context: "real rebit kernel",
        });
    }
    g.validate(m)?;
    let dim = 1usize << m;
    debug_assert_eq!(amps.len(), dim);
    match g {
        Gate::Z(q) => {
            let pos = bit_pos(m, *q);
            for x in 0..dim {
                if (x >> pos) & 1 == 1 {
                    amps[x] = -amps[x];
                }
            }
        }
        Gate::CZ(a, b) => {
            let (pa, pb) = (bit_pos(m, *a), bit_pos(m, *b));
            for x in 0..dim {
                if (x >> pa) & 1 == 1 && (x >> pb) & 1 == 1 {
                    amps[x] = -amps[x];
                }
            }
        }
        Gate::CCZ(a, b, t) => {
            let (pa, pb, pt) = (bit_pos(m, *a), bit_pos(m, *b), bit_pos(m, *t));
            for x in 0..dim {
                if (x >> pa) & 1 == 1 && (x >> pb) & 1 == 1 && (x >> pt) & 1 == 1 {
                    amps[x] = -amps[x];
                }
            }
        }
        Gate::ChZ(qs) => {
            let positions: Vec<usize> = qs.iter().map(|&q| bit_pos(m, q)).collect();
            for x in 0..dim {
                if positions.iter().all(|&p| (x >> p) & 1 == 1) {
                    amps[x] = -amps[x];
                }
            }
        }
        Gate::LZ(lang, target) => {
            let tpos = bit_pos(m, *target);
            for idx in 0..dim {
                if (idx >> tpos) & 1 == 1 {
                    let mut x = 0usize;
                    for wire in 1..=m {
                        if wire == *target {
                            continue;
                        }
                        x = (x << 1) | ((idx >> bit_pos(m, wire)) & 1);
                    }
                    if lang.contains(x) {
                        amps[idx] = -amps[idx];
                    }
                }
            }
        }
        Gate::X(q) => {
            let pos = bit_pos(m, *q);
            for x in 0..dim {
                if (x >> pos) & 1 == 0 {
                    amps.swap_rows(x, x | (1 << pos));
                }
            }
        }
        Gate::CX(ctrl, t) => {
            let (pc, pt) = (bit_pos(m, *ctrl), bit_pos(m, *t));
            for x in 0..dim {
                if (x >> pc) & 1 == 1 && (x >> pt) & 1 == 0 {
                    amps.swap_rows(x, x | (1 << pt));
                }
            }
        }
        Gate::CCX(a, b, t) => {
            let (pa, pb, pt) = (bit_pos(m, *a), bit_pos(m, *b), bit_pos(m, *t));
            for x in 0..dim {
                if (x >> pa) & 1 == 1 && (x >> pb) & 1 == 1 && (x >> pt) & 1 == 0 {
                    amps.swap_rows(x, x | (1 << pt));
                }
            }
        }
        Gate::H(q) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            apply_single_real(amps, m, *q, &[s, s, s, -s]);
        }
        Gate::Yrot(q, th) => {
            let (si, co) = (th / 2.0).sin_cos();
            apply_single_real(amps, m, *q, &[co, -si, si, co]);
        }
        Gate::R(q, th) => {
            let (si, co) = th.sin_cos();
            apply_single_real(amps, m, *q, &[co, -si, si, co]);
        }
        Gate::CH(ctrl, t) => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            apply_controlled_real(amps, m, *ctrl, *t, &[s, s, s, -s]);
        }
        Gate::CYrot(ctrl, t, th) => {
            let (si, co) = (th / 2.0).sin_cos();
            apply_controlled_real(amps, m, *ctrl, *t, &[co, -si, si, co]);
        }
        _ => unreachable!("is_real_kind covers all remaining kinds"),
    }
    Ok(())
}

fn apply_single_real(amps: &mut nalgebra::DVector<f64>, m: usize, qubit: usize, k: &[f64; 4]) {
    let pos = bit_pos(m, qubit);
    let dim = 1usize << m;
    for x in 0..dim {
        if (x >> pos) & 1 == 0 {
            let y = x | (1 << pos);
            let lo = amps[x];
            let hi = amps[y];
            amps[x] = k[0] * lo + k[1] * hi;
            amps[y] = k[2] * lo + k[3] * hi;
        }
    }
}

fn apply_controlled_real(
    amps: &mut nalgebra::DVector<f64>,
    m: usize,
    ctrl: usize,
    target: usize,
    k: &[f64; 4],
) {
    let pc = bit_pos(m, ctrl);
    let pt = bit_pos(m, target);
    let dim = 1usize << m;
    for x in 0..dim {
        if (x >> pc) & 1 == 1 && (x >> pt) & 1 == 0 {
            let y = x | (1 << pt);
            let lo = amps[x];
            let hi = amps[y];
            amps[x] = k[0] * lo + k[1] * hi;
            amps[y] = k[2] * lo + k[3] * hi;
        }
    }
}

/// Runs the circuit directly on the `n`-qubit complex state.
pub fn run_logical(c: &Circuit, psi0: &QubitState) -> Result<QubitState> {
    if psi0.qubits() != c.n {
        return Err(Error::DimensionMismatch(format!(
            "state on {} qubits fed to a width-{} circuit",
            psi0.qubits(),
            c.n
        )));
    }
    let mut amps = psi0.amps().clone();
    for g in &c.gates {
        apply_gate_vec(g, c.n, &mut amps)?;
    }
    QubitState::new(c.n, amps)
}

/// Runs the circuit through the rebit encoding: encode, apply every gate's
/// rebit image with real kernels on `n+1` rebits, decode.
pub fn run_physical(c: &Circuit, psi0: &QubitState) -> Result<QubitState> {
    if psi0.qubits() != c.n {
        return Err(Error::DimensionMismatch(format!(
            "state on {} qubits fed to a width-{} circuit",
            psi0.qubits(),
            c.n
        )));
    }
    let m = c.n + 1;
    let mut phi = encode_state(psi0);
    for g in &c.gates {
        for img in gate_rebit_image(g, c.n)? {
            apply_gate_rebit(&img, m, phi.amps_mut())?;
        }
    }
    Ok(decode_state(&phi))
}

/// Runs the rebit image and returns the rebit state itself (ancilla kept).
pub fn run_physical_rebit(c: &Circuit, psi0: &QubitState) -> Result<RebitState> {
    let m = c.n + 1;
    let mut phi = encode_state(psi0);
    for g in &c.gates {
        for img in gate_rebit_image(g, c.n)? {
            apply_gate_rebit(&img, m, phi.amps_mut())?;
        }
    }
    Ok(phi)
}

/// A sampled (or enumerated) measurement outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    /// Outcome as a basis label; format with [`bitstring`].
    pub outcome: usize,
    /// Exact Born probability of this outcome.
    pub probability: f64,
}

/// Renders a basis label as an `n`-bit string, qubit 1 first.
pub fn bitstring(outcome: usize, n: usize) -> String {
    (0..n)
        .map(|i| {
            if (outcome >> (n - 1 - i)) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Exact Born probabilities of all `2^n` outcomes.
pub fn strong_probabilities_dense(psi: &QubitState) -> Vec<f64> {
    (0..psi.amps().len()).map(|m| psi.probability(m)).collect()
}

/// Samples `shots` computational-basis outcomes from a normalized state,
/// by inverse CDF over the probability table. Seeded and reproducible.
pub fn measure(psi: &QubitState, shots: usize, seed: u64) -> Result<Vec<MeasurementRecord>> {
    psi.check_normalized(1e-6)?;
    let probs = strong_probabilities_dense(psi);
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(shots);
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|&x| x < u).min(probs.len() - 1);
        out.push(MeasurementRecord {
            outcome: idx,
            probability: probs[idx],
        });
    }
    Ok(out)
}

/// Expands a circuit over `{H, T, CX}` or `{H, CCZ, CK, G}` into the
/// explicit `(n+1)`-rebit orthogonal circuit given by concatenating the
/// per-gate rebit images.
pub fn expand_single_ancilla(c: &Circuit) -> Result<Circuit> {
    for g in &c.gates {
        match g {
            Gate::H(_)
            | Gate::T(_)
            | Gate::CX(_, _)
            | Gate::CCZ(_, _, _)
            | Gate::CK(_)
            | Gate::G(_) => {}
            other => {
                return Err(Error::UnsupportedGate {
                    kind: format!("{other:?}"),
                    context: "single-ancilla expansion",
                })
            }
        }
    }
    encode_circuit(c)
}

/// Rebit image of an arbitrary circuit (no alphabet restriction).
pub fn encode_circuit(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(c.n + 1);
    out.name = c.name.clone();
    out.seed = c.seed;
    for g in &c.gates {
        for img in gate_rebit_image(g, c.n)? {
            out.push(img)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, c, random_state_vector};
    use crate::rlinear::Language;

    fn random_gate(n: usize, rng: &mut ChaCha8Rng) -> Gate {
        let q = |rng: &mut ChaCha8Rng| rng.random_range(1..=n);
        let distinct_pair = |rng: &mut ChaCha8Rng| {
            let a = rng.random_range(1..=n);
            let mut b = rng.random_range(1..=n);
            while b == a {
                b = rng.random_range(1..=n);
            }
            (a, b)
        };
        match rng.random_range(0..18) {
            0 => Gate::X(q(rng)),
            1 => Gate::Y(q(rng)),
            2 => Gate::Z(q(rng)),
            3 => Gate::H(q(rng)),
            4 => Gate::S(q(rng)),
            5 => Gate::T(q(rng)),
            6 => {
                let (a, b) = distinct_pair(rng);
                Gate::CX(a, b)
            }
            7 => {
                let (a, b) = distinct_pair(rng);
                Gate::CZ(a, b)
            }
            8 => {
                let (a, b) = distinct_pair(rng);
                Gate::CS(a, b)
            }
            9 => {
                let (a, b) = distinct_pair(rng);
                Gate::CH(a, b)
            }
            10 if n >= 3 => {
                let a = rng.random_range(1..=n - 2);
                Gate::CCZ(a, a + 1, a + 2)
            }
            11 if n >= 3 => {
                let a = rng.random_range(1..=n - 2);
                Gate::CCX(a, a + 1, a + 2)
            }
            12 => Gate::Yrot(q(rng), rng.random_range(-3.0..3.0)),
            13 => Gate::Zrot(q(rng), rng.random_range(-3.0..3.0)),
            14 => Gate::G(rng.random_range(-3.0..3.0)),
            15 => Gate::K,
            16 => Gate::CK(q(rng)),
            17 => {
                let lang = Language::from_fn(n, |x| (x.wrapping_mul(2654435761) >> 3) & 1 == 1);
                Gate::KL(lang)
            }
            _ => Gate::H(q(rng)),
        }
    }

    #[test]
    fn depth_examples() {
        let c = Circuit::with_gates(2, vec![Gate::H(1), Gate::H(2)]).unwrap();
        assert_eq!(depth(&c), 1);

        let c = Circuit::with_gates(2, vec![Gate::CK(1), Gate::G(0.7)]).unwrap();
        assert_eq!(depth(&c), 2);

        let c = Circuit::with_gates(2, vec![Gate::H(1), Gate::CX(1, 2), Gate::H(2)]).unwrap();
        assert_eq!(depth(&c), 3);
    }

    #[test]
    fn run_logical_ck_example() {
        // CK on (a+ib)|0> + (c+id)|1> conjugates only the x=1 amplitude.
        let psi = QubitState::from_vec(1, vec![c(0.1, 0.2), c(0.3, 0.4)]).unwrap();
        let circ = Circuit::with_gates(1, vec![Gate::CK(1)]).unwrap();
        let out = run_logical(&circ, &psi).unwrap();
        assert!((out.amps()[0] - c(0.1, 0.2)).norm() < 1e-15);
        assert!((out.amps()[1] - c(0.3, -0.4)).norm() < 1e-15);

        let empty = Circuit::new(1);
        assert!(run_logical(&empty, &psi).unwrap().distance(&psi) < 1e-15);
    }

    #[test]
    fn run_physical_k_via_ancilla_z() {
        let psi = QubitState::from_vec(1, vec![c(0.6, 0.8), c(0.0, 0.0)]).unwrap();
        let circ = Circuit::with_gates(1, vec![Gate::K]).unwrap();
        let out = run_physical(&circ, &psi).unwrap();
        assert!((out.amps()[0] - c(0.6, -0.8)).norm() < 1e-15);
    }

    #[test]
    fn eight_global_phase_quarter_turns_are_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = QubitState::new(2, random_state_vector(4, &mut rng)).unwrap();
        let gates = vec![Gate::G(std::f64::consts::FRAC_PI_4); 8];
        let circ = Circuit::with_gates(2, gates).unwrap();
        let out = run_physical(&circ, &psi).unwrap();
        assert!(out.distance(&psi) < 1e-12);
    }

    #[test]
    fn gate_kernels_match_dense_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 3;
        let dim = 1 << n;
        for _ in 0..60 {
            let g = random_gate(n, &mut rng);
            let psi = random_state_vector(dim, &mut rng);
            let mut kernel_out = psi.clone();
            apply_gate_vec(&g, n, &mut kernel_out).unwrap();
            let dense_out = gate_to_rlinear(&g, n).unwrap().apply_vec(&psi).unwrap();
            assert!(
                (kernel_out - dense_out).norm() < 1e-12,
                "kernel mismatch for {g:?}"
            );
        }
    }

    #[test]
    fn rebit_kernels_match_dense_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = 3;
        let dim = 1 << m;
        let real_gates: Vec<Gate> = vec![
            Gate::X(1),
            Gate::Z(3),
            Gate::H(2),
            Gate::CX(1, 3),
            Gate::CZ(2, 3),
            Gate::CCZ(1, 2, 3),
            Gate::CCX(3, 1, 2),
            Gate::CH(2, 1),
            Gate::ChZ(vec![1, 2, 3]),
            Gate::Yrot(2, 1.234),
            Gate::CYrot(1, 3, -0.77),
            Gate::R(3, 0.5),
            Gate::LZ(Language::from_indices(2, &[1, 2]), 3),
        ];
        for g in real_gates {
            let v = linalg::random_real_unit_vector(dim, &mut rng);
            let mut kernel_out = v.clone();
            apply_gate_rebit(&g, m, &mut kernel_out).unwrap();
            let dense = linalg::re_mat(gate_to_rlinear(&g, m).unwrap().linear_part());
            let dense_out = &dense * &v;
            assert!(
                (kernel_out - dense_out).norm() < 1e-12,
                "mismatch for {g:?}"
            );
        }
    }

    #[test]
    fn dual_path_agreement_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..30 {
            let n = 2 + (trial % 4); // up to 5 qubits
            let dim = 1 << n;
            let mut circ = Circuit::new(n);
            for _ in 0..20 {
                circ.push(random_gate(n, &mut rng)).unwrap();
            }
            let psi = QubitState::new(n, random_state_vector(dim, &mut rng)).unwrap();
            let logical = run_logical(&circ, &psi).unwrap();
            let physical = run_physical(&circ, &psi).unwrap();
            assert!(
                logical.distance(&physical) < 1e-10,
                "dual-path disagreement: {}",
                logical.distance(&physical)
            );
        }
    }

    #[test]
    fn measurement_rebit_marginal_equals_qubit_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let n = 3;
        let psi = QubitState::new(n, random_state_vector(1 << n, &mut rng)).unwrap();
        let phi = encode_state(&psi);
        for m in 0..(1 << n) {
            assert!((phi.logical_probability(m) - psi.probability(m)).abs() < 1e-14);
        }
    }

    #[test]
    fn global_phase_confined_to_ancilla() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 3;
        let mut circ = Circuit::new(n);
        for _ in 0..12 {
            // Unitary alphabet only.
            let g = loop {
                let g = random_gate(n, &mut rng);
                if !g.is_conjugation() {
                    break g;
                }
            };
            circ.push(g).unwrap();
        }
        let mut with_phase = circ.clone();
        with_phase.push(Gate::G(0.3)).unwrap();

        let psi = QubitState::new(n, random_state_vector(1 << n, &mut rng)).unwrap();
        let a = run_physical_rebit(&circ, &psi).unwrap();
        let b = run_physical_rebit(&with_phase, &psi).unwrap();
        for m in 0..(1 << n) {
            assert!((a.logical_probability(m) - b.logical_probability(m)).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_plus_state_and_determinism() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = QubitState::from_vec(1, vec![c(s, 0.0), c(s, 0.0)]).unwrap();
        let probs = strong_probabilities_dense(&plus);
        assert!((probs[0] - 0.5).abs() < 1e-15);
        assert!((probs[1] - 0.5).abs() < 1e-15);

        let r1 = measure(&plus, 200, 42).unwrap();
        let r2 = measure(&plus, 200, 42).unwrap();
        assert_eq!(r1, r2);

        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let psi = QubitState::new(2, random_state_vector(4, &mut rng)).unwrap();
        for rec in measure(&psi, 50, 7).unwrap() {
            assert!((rec.probability - psi.probability(rec.outcome)).abs() < 1e-15);
        }
    }

    #[test]
    fn expand_single_ancilla_examples() {
        // [H 1] needs no ancilla work.
        let circ = Circuit::with_gates(2, vec![Gate::H(1)]).unwrap();
        let expanded = expand_single_ancilla(&circ).unwrap();
        assert_eq!(expanded.gates, vec![Gate::H(1)]);
        assert_eq!(expanded.n, 3);

        // [T 1, T 2]: 4 gates touching the ancilla, depth at least 2.
        let circ = Circuit::with_gates(2, vec![Gate::T(1), Gate::T(2)]).unwrap();
        let expanded = expand_single_ancilla(&circ).unwrap();
        assert_eq!(expanded.gates.len(), 4);
        assert!(expanded.gates.iter().all(|g| g.supports(3).contains(&3)));
        assert!(depth(&expanded) >= 2);

        // Unsupported kinds are rejected.
        let circ = Circuit::with_gates(2, vec![Gate::S(1)]).unwrap();
        assert!(expand_single_ancilla(&circ).is_err());
    }

    #[test]
    fn expanded_circuit_matches_whole_circuit_encoding() {
        use crate::gate::fuse_ancilla_rotations;
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let n = 4;
        for _ in 0..10 {
            let mut circ = Circuit::new(n);
            for _ in 0..15 {
                let g = match rng.random_range(0..6) {
                    0 => Gate::H(rng.random_range(1..=n)),
                    1 => Gate::T(rng.random_range(1..=n)),
                    2 => {
                        let a = rng.random_range(1..=n);
                        let mut b = rng.random_range(1..=n);
                        while b == a {
                            b = rng.random_range(1..=n);
                        }
                        Gate::CX(a, b)
                    }
                    3 => Gate::CCZ(1, 2, 3),
                    4 => Gate::CK(rng.random_range(1..=n)),
                    _ => Gate::G(std::f64::consts::FRAC_PI_4),
                };
                circ.push(g).unwrap();
            }
            let expanded = expand_single_ancilla(&circ).unwrap();
            // Matrix equality with the encoding of the whole circuit.
            let whole = crate::codec::encode_operator(&circ.to_rlinear().unwrap());
            let mut prod = linalg::RMat::identity(1 << (n + 1), 1 << (n + 1));
            for g in &expanded.gates {
                let dense = linalg::re_mat(gate_to_rlinear(g, n + 1).unwrap().linear_part());
                prod = dense * prod;
            }
            assert!(linalg::max_abs_diff_r(&prod, whole.matrix()) < 1e-10);
            assert!(expanded.gates.iter().all(|g| g.is_real_kind()));
        }

        // Depth bound d*n for the {H, T, CX} alphabet, with the image pairs
        // of T fused back into single two-rebit rotations.
        for _ in 0..10 {
            let mut circ = Circuit::new(n);
            for _ in 0..20 {
                let g = match rng.random_range(0..3) {
                    0 => Gate::H(rng.random_range(1..=n)),
                    1 => Gate::T(rng.random_range(1..=n)),
                    _ => {
                        let a = rng.random_range(1..=n);
                        let mut b = rng.random_range(1..=n);
                        while b == a {
                            b = rng.random_range(1..=n);
                        }
                        Gate::CX(a, b)
                    }
                };
                circ.push(g).unwrap();
            }
            let expanded = expand_single_ancilla(&circ).unwrap();
            let fused =
                Circuit::with_gates(n + 1, fuse_ancilla_rotations(&expanded.gates)).unwrap();
            let d = depth(&circ);
            assert!(
                depth(&fused) <= d * n,
                "fused depth {} exceeds {}",
                depth(&fused),
                d * n
            );
        }
    }
}

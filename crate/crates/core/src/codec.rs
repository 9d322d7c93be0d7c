//! The encoding map and its inverse between `n`-qubit complex objects and
//! `(n+1)`-rebit real objects, for states, operators and measurements.
//!
//! Conventions: basis label of `|i_1 ... i_n>` is `sum i_k 2^(n-k)` (qubit 1
//! most significant); the ancilla rebit is the least significant index bit,
//! so a rebit index is `2 * label + a`. Encoding a state is then a stride-2
//! interleave of real and imaginary parts:
//!
//! ```text
//! amps[2k]   = Re psi_k
//! amps[2k+1] = Im psi_k
//! ```
//!
//! For operators, with the 2x2 ancilla blocks written out,
//!
//! ```text
//! P(A + BK) = Re A (x) I + Im A (x) XZ + Re B (x) Z + Im B (x) X
//! ```
//!
//! and the inverse reads the pair back off ancilla partial traces:
//! `A = tr_a[W (I - i XZ)_a] / 2`, `B = tr_a[W (Z + i X)_a] / 2`.

use crate::linalg::{c, CMat, CVec, RMat};
use crate::rlinear::RLinearOp;
use crate::{Error, Result};
use nalgebra::DVector;
use num_complex::Complex64;

/// An `n`-qubit pure state: complex amplitude vector of length `2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    n: usize,
    amps: CVec,
}

impl QubitState {
    pub fn new(n: usize, amps: CVec) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch(format!(
                "qubit state of length {} for n={n}",
                amps.len()
            )));
        }
        Ok(QubitState { n, amps })
    }

    /// `|0...0>`.
    pub fn zero(n: usize) -> Self {
        let mut amps = CVec::zeros(1 << n);
        amps[0] = c(1.0, 0.0);
        QubitState { n, amps }
    }

    pub fn from_vec(n: usize, v: Vec<Complex64>) -> Result<Self> {
        Self::new(n, CVec::from_vec(v))
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amps(&self) -> &CVec {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut CVec {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let dev = (self.norm() - 1.0).abs();
        if dev > tol {
            return Err(Error::Unnormalized(dev));
        }
        Ok(())
    }

    /// Max amplitude distance.
    pub fn distance(&self, other: &QubitState) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Computational-basis probability of outcome `m`.
    pub fn probability(&self, m: usize) -> f64 {
        self.amps[m].norm_sqr()
    }
}

/// An `(n+1)`-rebit real state over `n` logical qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct RebitState {
    n: usize,
    amps: DVector<f64>,
}

impl RebitState {
    pub fn new(n: usize, amps: DVector<f64>) -> Result<Self> {
        if amps.len() != 1 << (n + 1) {
            return Err(Error::DimensionMismatch(format!(
                "rebit state of length {} for n={n} (expected {})",
                amps.len(),
                1 << (n + 1)
            )));
        }
        Ok(RebitState { n, amps })
    }

    pub fn zero(n: usize) -> Self {
        let mut amps = DVector::zeros(1 << (n + 1));
        amps[0] = 1.0;
        RebitState { n, amps }
    }

    /// Logical qubit count; the vector has `2^(n+1)` entries.
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn rebits(&self) -> usize {
        self.n + 1
    }

    pub fn amps(&self) -> &DVector<f64> {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut DVector<f64> {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn distance(&self, other: &RebitState) -> f64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Probability of logical outcome `m` (ancilla marginalized):
    /// `amps[2m]^2 + amps[2m+1]^2`.
    pub fn logical_probability(&self, m: usize) -> f64 {
        let a = self.amps[2 * m];
        let b = self.amps[2 * m + 1];
        a * a + b * b
    }
}

/// A real linear operator on `m` rebits.
#[derive(Debug, Clone)]
pub struct RealOperator {
    m: usize,
    matrix: RMat,
    orthogonal: bool,
}

impl RealOperator {
    /// Wraps a real `2^m x 2^m` matrix; orthogonality is checked once at
    /// construction (tolerance 1e-9) and kept as a flag.
    pub fn new(matrix: RMat, m: usize) -> Result<Self> {
        let dim = 1usize << m;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "real operator {}x{} for m={m} rebits",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let orthogonal = crate::linalg::orthogonality_residual(&matrix) < 1e-9;
        Ok(RealOperator {
            m,
            matrix,
            orthogonal,
        })
    }

    pub fn rebits(&self) -> usize {
        self.m
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn is_orthogonal(&self) -> bool {
        self.orthogonal
    }

    pub fn orthogonality_residual(&self) -> f64 {
        crate::linalg::orthogonality_residual(&self.matrix)
    }
}

/// Encodes an `n`-qubit state into `n+1` rebits:
/// `Re|psi> (x) |0>_a + Im|psi> (x) |1>_a`.
pub fn encode_state(psi: &QubitState) -> RebitState {
    let n = psi.qubits();
    let dim = 1 << n;
    let mut amps = DVector::zeros(dim << 1);
    for k in 0..dim {
        amps[2 * k] = psi.amps()[k].re;
        amps[2 * k + 1] = psi.amps()[k].im;
    }
    RebitState { n, amps }
}

/// Decodes an `(n+1)`-rebit state back to `n` qubits:
/// `psi_k = amps[2k] + i amps[2k+1]`.
pub fn decode_state(phi: &RebitState) -> QubitState {
    let n = phi.qubits();
    let dim = 1 << n;
    let mut amps = CVec::zeros(dim);
    for k in 0..dim {
        amps[k] = c(phi.amps()[2 * k], phi.amps()[2 * k + 1]);
    }
    QubitState { n, amps }
}

/// Encodes an R-linear operator as a real operator on `n+1` rebits.
pub fn encode_operator(op: &RLinearOp) -> RealOperator {
    let n = op.qubits();
    let dim = 1usize << n;
    let a = op.linear_part();
    let b = op.antilinear_part();
    let mut w = RMat::zeros(dim << 1, dim << 1);
    for x in 0..dim {
        for y in 0..dim {
            let av = a[(x, y)];
            let bv = b[(x, y)];
            // Ancilla blocks: (0,0)=ReA+ReB, (0,1)=-ImA+ImB,
            //                 (1,0)=ImA+ImB,  (1,1)=ReA-ReB.
            w[(2 * x, 2 * y)] = av.re + bv.re;
            w[(2 * x, 2 * y + 1)] = -av.im + bv.im;
            w[(2 * x + 1, 2 * y)] = av.im + bv.im;
            w[(2 * x + 1, 2 * y + 1)] = av.re - bv.re;
        }
    }
    RealOperator {
        m: n + 1,
        orthogonal: crate::linalg::orthogonality_residual(&w) < 1e-9,
        matrix: w,
    }
}

/// Decodes a real operator on `m = n+1` rebits to the R-linear operator it
/// simulates. Defined for every real matrix, orthogonal or not.
pub fn decode_operator(w: &RealOperator) -> Result<RLinearOp> {
    let m = w.rebits();
    if m == 0 {
        return Err(Error::DimensionMismatch(
            "cannot decode a 0-rebit operator".into(),
        ));
    }
    let n = m - 1;
    let dim = 1usize << n;
    let mat = w.matrix();
    let mut a = CMat::zeros(dim, dim);
    let mut b = CMat::zeros(dim, dim);
    for x in 0..dim {
        for y in 0..dim {
            let w00 = mat[(2 * x, 2 * y)];
            let w01 = mat[(2 * x, 2 * y + 1)];
            let w10 = mat[(2 * x + 1, 2 * y)];
            let w11 = mat[(2 * x + 1, 2 * y + 1)];
            a[(x, y)] = c(0.5 * (w00 + w11), 0.5 * (w10 - w01));
            b[(x, y)] = c(0.5 * (w00 - w11), 0.5 * (w10 + w01));
        }
    }
    RLinearOp::new(n, a, b)
}

/// Decodes a real measurement `{M_m}` on `n+1` rebits to R-measurement
/// operators `{F_m}` on `n` qubits. Requires completeness
/// `sum M^T M = I` within `tol`.
pub fn decode_measurement(ops: &[RealOperator], tol: f64) -> Result<Vec<RLinearOp>> {
    if ops.is_empty() {
        return Err(Error::CompletenessViolation(1.0));
    }
    let m = ops[0].rebits();
    let dim = 1usize << m;
    let mut sum = RMat::zeros(dim, dim);
    for op in ops {
        if op.rebits() != m {
            return Err(Error::DimensionMismatch(
                "measurement operators of mixed width".into(),
            ));
        }
        sum += op.matrix().transpose() * op.matrix();
    }
    let resid = crate::linalg::max_abs_diff_r(&sum, &RMat::identity(dim, dim));
    if resid > tol {
        return Err(Error::CompletenessViolation(resid));
    }
    ops.iter().map(decode_operator).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, identity_c, kron_r, random_state_vector, C_ONE, C_ZERO};
    use crate::rlinear::{make_kl, Language};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_x() -> RMat {
        RMat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn pauli_z() -> RMat {
        RMat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }

    #[test]
    fn encode_single_qubit_example() {
        // (a+ib)|0> + (c+id)|1> -> a|00> + b|01> + c|10> + d|11>.
        let psi = QubitState::from_vec(1, vec![c(0.1, 0.2), c(0.3, 0.4)]).unwrap();
        let phi = encode_state(&psi);
        assert_eq!(phi.amps().as_slice(), &[0.1, 0.2, 0.3, 0.4]);

        let back = decode_state(&phi);
        assert!(back.distance(&psi) < 1e-15);
    }

    #[test]
    fn encode_all_zeros() {
        let psi = QubitState::zero(3);
        let phi = encode_state(&psi);
        assert_eq!(phi.amps()[0], 1.0);
        assert_eq!(phi.amps().iter().filter(|&&x| x != 0.0).count(), 1);
    }

    #[test]
    fn state_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for _ in 0..20 {
            let psi = QubitState::new(4, random_state_vector(16, &mut rng)).unwrap();
            let rt = decode_state(&encode_state(&psi));
            assert!(rt.distance(&psi) < 1e-12);
        }
        for _ in 0..20 {
            let phi = RebitState::new(3, linalg::random_real_unit_vector(16, &mut rng)).unwrap();
            let rt = encode_state(&decode_state(&phi));
            assert!(rt.distance(&phi) < 1e-12);
        }
    }

    #[test]
    fn encode_k_is_ancilla_z() {
        let k = RLinearOp::conjugation(2);
        let w = encode_operator(&k);
        let expect = kron_r(&RMat::identity(4, 4), &pauli_z());
        assert!(linalg::max_abs_diff_r(w.matrix(), &expect) < 1e-15);
        assert!(w.is_orthogonal());
    }

    #[test]
    fn encode_global_phase_is_ancilla_rotation() {
        let theta = 0.7311;
        let g = RLinearOp::from_linear(
            2,
            identity_c(4).map(|z| z * Complex64::from_polar(1.0, theta)),
        )
        .unwrap();
        let w = encode_operator(&g);
        let rot =
            RMat::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let expect = kron_r(&RMat::identity(4, 4), &rot);
        assert!(linalg::max_abs_diff_r(w.matrix(), &expect) < 1e-12);
    }

    #[test]
    fn encode_s_gate_is_cx_cz_on_ancilla() {
        // S on the only qubit of a 1-qubit system: P(S) = CX_{1a} CZ_{1a}.
        let s = RLinearOp::from_linear(
            1,
            CMat::from_row_slice(2, 2, &[C_ONE, C_ZERO, C_ZERO, c(0.0, 1.0)]),
        )
        .unwrap();
        let w = encode_operator(&s);
        let cx = RMat::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        );
        let cz = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
        let expect = cx * cz;
        assert!(linalg::max_abs_diff_r(w.matrix(), &expect) < 1e-15);
    }

    #[test]
    fn encode_kl_is_controlled_sign_pattern() {
        let lang = Language::from_indices(2, &[1, 2]);
        let w = encode_operator(&make_kl(&lang));
        for idx in 0..8 {
            let x = idx >> 1;
            let a = idx & 1;
            let expect = if a == 1 && lang.contains(x) {
                -1.0
            } else {
                1.0
            };
            assert_eq!(w.matrix()[(idx, idx)], expect);
        }
    }

    #[test]
    fn decode_ancilla_paulis() {
        // L(Z_a) = K.
        let za = RealOperator::new(kron_r(&RMat::identity(2, 2), &pauli_z()), 2).unwrap();
        let k = decode_operator(&za).unwrap();
        assert!(k.distance(&RLinearOp::conjugation(1)) < 1e-15);

        // L(X_a) = iK.
        let xa = RealOperator::new(kron_r(&RMat::identity(2, 2), &pauli_x()), 2).unwrap();
        let ik = decode_operator(&xa).unwrap();
        let expect = RLinearOp::conjugation(1).scale(c(0.0, 1.0));
        assert!(ik.distance(&expect) < 1e-15);

        // L(H_a) = G(pi/4) K.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = RMat::from_row_slice(2, 2, &[s, s, s, -s]);
        let ha = RealOperator::new(kron_r(&RMat::identity(2, 2), &h), 2).unwrap();
        let got = decode_operator(&ha).unwrap();
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let expect = RLinearOp::conjugation(1).scale(phase);
        assert!(got.distance(&expect) < 1e-12);

        // L(iY_a) = -iI.
        let iy = RMat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let iya = RealOperator::new(kron_r(&RMat::identity(2, 2), &iy), 2).unwrap();
        let got = decode_operator(&iya).unwrap();
        let expect = RLinearOp::identity(1).scale(c(0.0, -1.0));
        assert!(got.distance(&expect) < 1e-15);
    }

    #[test]
    fn decode_cz_with_ancilla_is_ck() {
        // CZ_{1a} on 2 rebits decodes to CK on the single logical qubit.
        let cz = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
        let got = decode_operator(&RealOperator::new(cz, 2).unwrap()).unwrap();
        let ck = make_kl(&Language::from_indices(1, &[1]));
        assert!(got.distance(&ck) < 1e-15);
    }

    #[test]
    fn operator_round_trips_and_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let n = 2;
        let dim = 1 << n;
        for _ in 0..20 {
            let op = RLinearOp::new(
                n,
                CMat::from_fn(dim, dim, |_, _| {
                    c(linalg::gaussian(&mut rng), linalg::gaussian(&mut rng))
                }),
                CMat::from_fn(dim, dim, |_, _| {
                    c(linalg::gaussian(&mut rng), linalg::gaussian(&mut rng))
                }),
            )
            .unwrap();
            let rt = decode_operator(&encode_operator(&op)).unwrap();
            assert!(rt.distance(&op) < 1e-12);
        }
        for _ in 0..20 {
            let w = linalg::random_orthogonal(8, &mut rng);
            let rt = encode_operator(
                &decode_operator(&RealOperator::new(w.clone(), 3).unwrap()).unwrap(),
            );
            assert!(linalg::max_abs_diff_r(rt.matrix(), &w) < 1e-12);
        }
        // P(f * g) = P(f) P(g).
        for _ in 0..20 {
            let mk = |rng: &mut ChaCha8Rng| {
                RLinearOp::new(
                    n,
                    CMat::from_fn(dim, dim, |_, _| {
                        c(linalg::gaussian(rng), linalg::gaussian(rng))
                    }),
                    CMat::from_fn(dim, dim, |_, _| {
                        c(linalg::gaussian(rng), linalg::gaussian(rng))
                    }),
                )
                .unwrap()
            };
            let f = mk(&mut rng);
            let g = mk(&mut rng);
            let lhs = encode_operator(&f.star(&g).unwrap());
            let rhs = encode_operator(&f).matrix() * encode_operator(&g).matrix();
            assert!(linalg::max_abs_diff_r(lhs.matrix(), &rhs) < 1e-10);
        }
    }

    #[test]
    fn encoding_compatible_with_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let n = 3;
        let dim = 1 << n;
        let op = RLinearOp::new(
            n,
            CMat::from_fn(dim, dim, |_, _| {
                c(linalg::gaussian(&mut rng), linalg::gaussian(&mut rng))
            }),
            CMat::from_fn(dim, dim, |_, _| {
                c(linalg::gaussian(&mut rng), linalg::gaussian(&mut rng))
            }),
        )
        .unwrap();
        let psi = QubitState::new(n, random_state_vector(dim, &mut rng)).unwrap();
        let lhs = encode_operator(&op).matrix() * encode_state(&psi).amps();
        let rhs = encode_state(&QubitState::new(n, op.apply_vec(psi.amps()).unwrap()).unwrap());
        for i in 0..(dim << 1) {
            assert!((lhs[i] - rhs.amps()[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn r_unitary_iff_encoding_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..20 {
            let w = linalg::random_orthogonal(8, &mut rng);
            let op = decode_operator(&RealOperator::new(w, 3).unwrap()).unwrap();
            assert!(op.is_r_unitary(1e-9));
            assert!(encode_operator(&op).is_orthogonal());

            let perturbed = op.scale(c(1.0 + 1e-3, 0.0));
            assert!(!perturbed.is_r_unitary(1e-9));
            assert!(!encode_operator(&perturbed).is_orthogonal());
        }
    }

    #[test]
    fn dagger_corresponds_to_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        let n = 2;
        let dim = 1 << n;
        let op = RLinearOp::new(
            n,
            CMat::from_fn(dim, dim, |_, _| {
                c(linalg::gaussian(&mut rng), linalg::gaussian(&mut rng))
            }),
            CMat::from_fn(dim, dim, |_, _| {
                c(linalg::gaussian(&mut rng), linalg::gaussian(&mut rng))
            }),
        )
        .unwrap();
        let lhs = encode_operator(&op.dagger());
        let rhs = encode_operator(&op).matrix().transpose();
        assert!(linalg::max_abs_diff_r(lhs.matrix(), &rhs) < 1e-12);
    }

    #[test]
    fn computational_basis_measurement_decodes_to_itself() {
        // {|m><m| (x) I_a} decodes to {|m><m|}.
        let n = 1;
        let mut ops = Vec::new();
        for m in 0..2usize {
            let mut proj = RMat::zeros(2, 2);
            proj[(m, m)] = 1.0;
            ops.push(RealOperator::new(kron_r(&proj, &RMat::identity(2, 2)), n + 1).unwrap());
        }
        let decoded = decode_measurement(&ops, 1e-9).unwrap();
        for (m, f) in decoded.iter().enumerate() {
            let mut proj = CMat::zeros(2, 2);
            proj[(m, m)] = C_ONE;
            assert!(f.distance(&RLinearOp::from_linear(n, proj).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn ancilla_measurement_decodes_to_re_im_projections() {
        // {(I+Z_a)/2, (I-Z_a)/2} decodes to {(I+K)/2, (I-K)/2}.
        let id4 = RMat::identity(4, 4);
        let za = kron_r(&RMat::identity(2, 2), &pauli_z());
        let plus = RealOperator::new((&id4 + &za) * 0.5, 2).unwrap();
        let minus = RealOperator::new((&id4 - &za) * 0.5, 2).unwrap();
        let decoded = decode_measurement(&[plus, minus], 1e-9).unwrap();
        let id = RLinearOp::identity(1);
        let k = RLinearOp::conjugation(1);
        let re = id.add(&k).unwrap().scale(c(0.5, 0.0));
        let im = id.add(&k.scale(c(-1.0, 0.0))).unwrap().scale(c(0.5, 0.0));
        assert!(decoded[0].distance(&re) < 1e-15);
        assert!(decoded[1].distance(&im) < 1e-15);
    }

    #[test]
    fn measurement_probabilities_match_both_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        // Random real projective measurement on 2 rebits: projectors onto
        // the columns of a random orthogonal matrix.
        let q = linalg::random_orthogonal(4, &mut rng);
        let mut ops = Vec::new();
        for j in 0..4 {
            let col = q.column(j);
            let proj = col * col.transpose();
            ops.push(RealOperator::new(proj, 2).unwrap());
        }
        let decoded = decode_measurement(&ops, 1e-9).unwrap();

        // Completeness on the decoded side.
        let mut sum = RLinearOp::from_linear(1, CMat::zeros(2, 2)).unwrap();
        for f in &decoded {
            sum = sum.add(&f.dagger().star(f).unwrap()).unwrap();
        }
        assert!(sum.distance(&RLinearOp::identity(1)) < 1e-10);

        for _ in 0..20 {
            let psi = QubitState::new(1, random_state_vector(2, &mut rng)).unwrap();
            let phi = encode_state(&psi);
            for (m_op, f_op) in ops.iter().zip(decoded.iter()) {
                let p_rebit = (m_op.matrix() * phi.amps()).norm_squared();
                let p_qubit = f_op.apply_vec(psi.amps()).unwrap().norm_squared();
                assert!((p_rebit - p_qubit).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn incomplete_measurement_rejected() {
        let half = RealOperator::new(RMat::identity(4, 4) * 0.5, 2).unwrap();
        assert!(matches!(
            decode_measurement(&[half], 1e-9),
            Err(Error::CompletenessViolation(_))
        ));
    }
}

//! R-linear operator algebra.
//!
//! An R-linear operator on `n` qubits is a pair `(A, B)` of complex
//! `2^n x 2^n` matrices acting as `psi -> A psi + B conj(psi)`, written
//! `A + BK` with `K` the computational-basis complex conjugation. The
//! R-unitary operators are the ones whose rebit encoding is orthogonal;
//! they satisfy
//!
//! ```text
//! A^H A + B^T conj(B) = I        A^H B + B^T conj(A) = 0
//! ```
//!
//! This module implements the ring operations (composition under the star
//! product, the dagger involution), the membership predicates (R-unitary,
//! partial antiunitary), partial complex conjugation `K_L` over a language
//! `L`, and the factorization of a partial antiunitary into `U K_L V`.

use crate::linalg::{
    self, c, conj_mat, identity_c, is_projector, max_abs, max_abs_diff, CMat, CVec, C_ONE,
};
use crate::{Error, Result};
use nalgebra::SymmetricEigen;
use num_complex::Complex64;

/// Hard cap on qubit count for dense operator algebra (dimension `2^n`).
pub const MAX_DENSE_QUBITS: usize = 12;

/// A subset of `{0,1}^n` stored as an explicit bitmask over basis labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Language {
    n: usize,
    mask: Vec<u64>,
}

impl Language {
    pub fn empty(n: usize) -> Self {
        let words = (1usize << n).div_ceil(64);
        Language {
            n,
            mask: vec![0; words.max(1)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut l = Self::empty(n);
        for x in 0..(1usize << n) {
            l.insert(x);
        }
        l
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut l = Self::empty(n);
        for &x in indices {
            assert!(x < (1 << n), "label out of range");
            l.insert(x);
        }
        l
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut l = Self::empty(n);
        for x in 0..(1usize << n) {
            if f(x) {
                l.insert(x);
            }
        }
        l
    }

    /// Language of all strings whose bits are 1 on every listed qubit
    /// (1-based qubit indices, qubit 1 most significant).
    pub fn conjunction(n: usize, qubits: &[usize]) -> Self {
        Self::from_fn(n, |x| qubits.iter().all(|&q| (x >> (n - q)) & 1 == 1))
    }

    pub fn insert(&mut self, x: usize) {
        self.mask[x / 64] |= 1u64 << (x % 64);
    }

    pub fn contains(&self, x: usize) -> bool {
        (self.mask[x / 64] >> (x % 64)) & 1 == 1
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Number of member strings.
    pub fn len(&self) -> usize {
        self.mask.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == 1 << self.n
    }

    pub fn complement(&self) -> Self {
        Self::from_fn(self.n, |x| !self.contains(x))
    }

    /// `K_L K_{L'} = K_{L xor L'}`.
    pub fn symmetric_difference(&self, other: &Language) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (w, o) in out.mask.iter_mut().zip(other.mask.iter()) {
            *w ^= o;
        }
        out
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..(1usize << self.n)).filter(move |&x| self.contains(x))
    }

    /// Hex mask, most significant nibble first, exactly `2^n / 4` digits
    /// (minimum one digit).
    pub fn to_hex(&self) -> String {
        let bits = 1usize << self.n;
        let digits = bits.div_ceil(4).max(1);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let bit = d * 4 + b;
                if bit < bits && self.contains(bit) {
                    nibble |= 1 << b;
                }
            }
            s.push(std::char::from_digit(nibble as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(n: usize, s: &str) -> Result<Self> {
        let mut l = Self::empty(n);
        let bits = 1usize << n;
        let chars: Vec<char> = s.trim().chars().collect();
        for (pos, ch) in chars.iter().rev().enumerate() {
            let nibble = ch.to_digit(16).ok_or_else(|| {
                Error::Other(format!("invalid hex digit '{ch}' in language mask"))
            })?;
            for b in 0..4 {
                let bit = pos * 4 + b;
                if (nibble >> b) & 1 == 1 {
                    if bit >= bits {
                        return Err(Error::Other(format!(
                            "language mask bit {bit} out of range for n={n}"
                        )));
                    }
                    l.insert(bit);
                }
            }
        }
        Ok(l)
    }
}

/// A subspace of the `n`-qubit space, stored by its orthogonal projector.
#[derive(Debug, Clone)]
pub struct Subspace {
    projector: CMat,
}

impl Subspace {
    pub fn new(projector: CMat, tol: f64) -> Result<Self> {
        if !is_projector(&projector, tol) {
            return Err(Error::Other(
                "matrix is not an orthogonal projector within tolerance".into(),
            ));
        }
        Ok(Subspace { projector })
    }

    pub fn projector(&self) -> &CMat {
        &self.projector
    }

    /// Dimension of the subspace (trace of the projector, rounded).
    pub fn dim(&self) -> usize {
        self.projector.trace().re.round() as usize
    }
}

/// An R-linear operator `A + BK` on `n` qubits.
#[derive(Debug, Clone)]
pub struct RLinearOp {
    n: usize,
    a: CMat,
    b: CMat,
}

impl RLinearOp {
    pub fn new(n: usize, a: CMat, b: CMat) -> Result<Self> {
        let dim = 1usize << n;
        if n > MAX_DENSE_QUBITS {
            return Err(Error::WidthExceeded {
                what: "dense R-linear operator",
                width: n,
                bound: MAX_DENSE_QUBITS,
            });
        }
        if a.nrows() != dim || a.ncols() != dim || b.nrows() != dim || b.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {dim}x{dim} matrices for n={n}, got A {}x{} and B {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols()
            )));
        }
        Ok(RLinearOp { n, a, b })
    }

    /// Identity operator.
    pub fn identity(n: usize) -> Self {
        let dim = 1 << n;
        RLinearOp {
            n,
            a: identity_c(dim),
            b: CMat::zeros(dim, dim),
        }
    }

    /// Full complex conjugation `K`.
    pub fn conjugation(n: usize) -> Self {
        let dim = 1 << n;
        RLinearOp {
            n,
            a: CMat::zeros(dim, dim),
            b: identity_c(dim),
        }
    }

    /// Linear operator `A + 0K` (the embedding of ordinary matrices).
    pub fn from_linear(n: usize, a: CMat) -> Result<Self> {
        let dim = 1 << n;
        let b = CMat::zeros(dim, dim);
        Self::new(n, a, b)
    }

    /// Antilinear operator `0 + BK`.
    pub fn from_antilinear(n: usize, b: CMat) -> Result<Self> {
        let dim = 1 << n;
        let a = CMat::zeros(dim, dim);
        Self::new(n, a, b)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Linear part `A`.
    pub fn linear_part(&self) -> &CMat {
        &self.a
    }

    /// Antilinear part `B` (the coefficient of `K`).
    pub fn antilinear_part(&self) -> &CMat {
        &self.b
    }

    /// `Gamma psi = A psi + B conj(psi)`.
    pub fn apply_vec(&self, psi: &CVec) -> Result<CVec> {
        if psi.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state length {} does not match operator dimension {}",
                psi.len(),
                self.dim()
            )));
        }
        let conj_psi = psi.map(|z| z.conj());
        Ok(&self.a * psi + &self.b * conj_psi)
    }

    /// Star product: composition `self . rhs` in the R-linear ring,
    /// `(A+BK)(C+DK) = (AC + B conj(D)) + (AD + B conj(C)) K`.
    pub fn star(&self, rhs: &RLinearOp) -> Result<RLinearOp> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch(format!(
                "star of operators on {} and {} qubits",
                self.n, rhs.n
            )));
        }
        let a = &self.a * &rhs.a + &self.b * conj_mat(&rhs.b);
        let b = &self.a * &rhs.b + &self.b * conj_mat(&rhs.a);
        Ok(RLinearOp { n: self.n, a, b })
    }

    /// Dagger involution `(A+BK)^dag = A^H + B^T K`.
    pub fn dagger(&self) -> RLinearOp {
        RLinearOp {
            n: self.n,
            a: self.a.adjoint(),
            b: self.b.transpose(),
        }
    }

    /// Scales the operator by a complex constant.
    pub fn scale(&self, z: Complex64) -> RLinearOp {
        RLinearOp {
            n: self.n,
            a: self.a.map(|x| x * z),
            b: self.b.map(|x| x * z),
        }
    }

    /// Sum of two R-linear operators.
    pub fn add(&self, rhs: &RLinearOp) -> Result<RLinearOp> {
        if self.n != rhs.n {
            return Err(Error::DimensionMismatch("operator sum".into()));
        }
        Ok(RLinearOp {
            n: self.n,
            a: &self.a + &rhs.a,
            b: &self.b + &rhs.b,
        })
    }

    /// Max-entry distance between two operators.
    pub fn distance(&self, rhs: &RLinearOp) -> f64 {
        max_abs_diff(&self.a, &rhs.a).max(max_abs_diff(&self.b, &rhs.b))
    }

    /// Residual of the R-unitarity conditions
    /// `A^H A + B^T conj(B) = I`, `A^H B + B^T conj(A) = 0`.
    pub fn r_unitarity_residual(&self) -> f64 {
        let dim = self.dim();
        let ah = self.a.adjoint();
        let bt = self.b.transpose();
        let r1 = &ah * &self.a + &bt * conj_mat(&self.b) - identity_c(dim);
        let r2 = &ah * &self.b + &bt * conj_mat(&self.a);
        max_abs(&r1).max(max_abs(&r2))
    }

    /// Residual of the alternate conditions `A A^H + B B^H = I`,
    /// `A B^T + B A^T = 0`.
    pub fn r_unitarity_residual_alt(&self) -> f64 {
        let dim = self.dim();
        let r1 = &self.a * self.a.adjoint() + &self.b * self.b.adjoint() - identity_c(dim);
        let r2 = &self.a * self.b.transpose() + &self.b * self.a.transpose();
        max_abs(&r1).max(max_abs(&r2))
    }

    /// True iff the operator is R-unitary within `tol`.
    pub fn is_r_unitary(&self, tol: f64) -> bool {
        assert!(tol > 0.0);
        self.r_unitarity_residual() < tol
    }

    /// Efficient partial-antiunitarity check: `A^H B = 0`, `A^H A` an
    /// orthogonal projector, `B^H B = conj(I - A^H A)`. On success returns
    /// the subspace on which the operator acts antiunitarily.
    pub fn is_partial_antiunitary(&self, tol: f64) -> Option<Subspace> {
        assert!(tol > 0.0);
        let dim = self.dim();
        let s1 = self.a.adjoint() * &self.b;
        if max_abs(&s1) >= tol {
            return None;
        }
        let s2 = self.a.adjoint() * &self.a;
        if max_abs_diff(&s2.adjoint(), &s2) >= tol {
            return None;
        }
        // Projector test by spectrum: every eigenvalue of A^H A within tol
        // of {0, 1}.
        let herm = (&s2 + s2.adjoint()).map(|z| z * c(0.5, 0.0));
        let eig = SymmetricEigen::new(herm);
        for &lambda in eig.eigenvalues.iter() {
            if lambda.abs() >= tol && (lambda - 1.0).abs() >= tol {
                return None;
            }
        }
        let s3 = self.b.adjoint() * &self.b;
        let expected = conj_mat(&(identity_c(dim) - &s2));
        if max_abs_diff(&s3, &expected) >= tol {
            return None;
        }
        let projector = identity_c(dim) - s2;
        Some(Subspace { projector })
    }
}

/// Partial complex conjugation `K_L = Theta_L + Pi_L K`: conjugates exactly
/// the amplitudes of basis states in `L`.
pub fn make_kl(lang: &Language) -> RLinearOp {
    let n = lang.qubits();
    let dim = 1usize << n;
    let mut a = CMat::zeros(dim, dim);
    let mut b = CMat::zeros(dim, dim);
    for x in 0..dim {
        if lang.contains(x) {
            b[(x, x)] = C_ONE;
        } else {
            a[(x, x)] = C_ONE;
        }
    }
    RLinearOp { n, a, b }
}

/// Recovers the matrix pair `(A, B)` of a black-box R-linear map from its
/// action on basis vectors: column `j` is
/// `A_j = (f(e_j) - i f(i e_j)) / 2`, `B_j = (f(e_j) + i f(i e_j)) / 2`.
///
/// The caller asserts R-linearity; a verification pass over `2^n` random
/// states reports the worst residual and fails if it exceeds `tol`.
pub fn from_function<F>(n: usize, f: F, tol: f64) -> Result<RLinearOp>
where
    F: Fn(&CVec) -> CVec,
{
    let dim = 1usize << n;
    let mut a = CMat::zeros(dim, dim);
    let mut b = CMat::zeros(dim, dim);
    for j in 0..dim {
        let mut ej = CVec::zeros(dim);
        ej[j] = C_ONE;
        let fe = f(&ej);
        let mut iej = CVec::zeros(dim);
        iej[j] = c(0.0, 1.0);
        let fie = f(&iej);
        if fe.len() != dim || fie.len() != dim {
            return Err(Error::DimensionMismatch(
                "black-box map returned a vector of the wrong length".into(),
            ));
        }
        for i in 0..dim {
            a[(i, j)] = (fe[i] - c(0.0, 1.0) * fie[i]) * c(0.5, 0.0);
            b[(i, j)] = (fe[i] + c(0.0, 1.0) * fie[i]) * c(0.5, 0.0);
        }
    }
    let op = RLinearOp::new(n, a, b)?;

    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xF0);
    let mut worst = 0.0f64;
    for _ in 0..dim {
        let psi = linalg::random_state_vector(dim, &mut rng);
        let got = op.apply_vec(&psi)?;
        let want = f(&psi);
        let resid = (got - want).norm();
        worst = worst.max(resid);
    }
    if worst > tol {
        return Err(Error::NotRLinear(worst));
    }
    Ok(op)
}

/// Operator norm: the largest singular value of the rebit encoding of the
/// operator. For `B = 0` this coincides with the largest singular value of
/// `A`.
pub fn operator_norm(op: &RLinearOp) -> f64 {
    let w = crate::codec::encode_operator(op);
    linalg::largest_singular_value(w.matrix())
}

/// Factorization `Gamma = U K_L V` of a partial antiunitary operator.
///
/// `L` is the lexicographically first `|L|` basis labels where
/// `|L| = dim Xi`; `V` maps `Xi` onto `span{|x> : x in L}`; eigenvector
/// phases are fixed by making each one's largest-magnitude entry real
/// positive, so the output is deterministic.
pub fn factor_partial_antiunitary(op: &RLinearOp, tol: f64) -> Result<(CMat, Language, CMat)> {
    let subspace = op
        .is_partial_antiunitary(tol)
        .ok_or(Error::NotPartialAntiunitary)?;
    let n = op.qubits();
    let dim = op.dim();
    let pi = subspace.projector().clone();
    let herm = (&pi + pi.adjoint()).map(|z| z * c(0.5, 0.0));
    let eig = SymmetricEigen::new(herm);

    // Sort eigenpairs by eigenvalue descending; members of Xi come first.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let k = pi.trace().re.round() as usize;

    let mut vectors: Vec<CVec> = Vec::with_capacity(dim);
    for &idx in &order {
        let mut v: CVec = eig.eigenvectors.column(idx).into_owned();
        // Canonical phase: largest-magnitude entry real positive.
        let mut best = 0usize;
        for i in 0..dim {
            if v[i].norm() > v[best].norm() {
                best = i;
            }
        }
        let mag = v[best].norm();
        if mag > 1e-300 {
            let phase = v[best] / c(mag, 0.0);
            v = v.map(|z| z / phase);
        }
        vectors.push(v);
    }

    // V maps the j-th sorted eigenvector to basis label j; the first k of
    // them span Xi and land on the lexicographically first k labels.
    let mut v_mat = CMat::zeros(dim, dim);
    for (j, vec) in vectors.iter().enumerate() {
        for i in 0..dim {
            v_mat[(j, i)] += vec[i].conj();
        }
    }
    let lang = Language::from_indices(n, &(0..k).collect::<Vec<_>>());

    // U = Gamma V^dag K_L; a unitary by construction.
    let v_op = RLinearOp::from_linear(n, v_mat.clone())?;
    let kl = make_kl(&lang);
    let u_op = op.star(&v_op.dagger())?.star(&kl)?;
    if max_abs(u_op.antilinear_part()) > tol.max(1e-7) {
        return Err(Error::Other(
            "partial antiunitary factorization produced a non-unitary left factor".into(),
        ));
    }
    let u_mat = u_op.linear_part().clone();
    Ok((u_mat, lang, v_mat))
}

/// Rebuilds `U K_L V` as an R-linear operator (for residual checks).
pub fn compose_ukl_v(u: &CMat, lang: &Language, v: &CMat) -> Result<RLinearOp> {
    let n = lang.qubits();
    let u_op = RLinearOp::from_linear(n, u.clone())?;
    let v_op = RLinearOp::from_linear(n, v.clone())?;
    u_op.star(&make_kl(lang))?.star(&v_op)
}

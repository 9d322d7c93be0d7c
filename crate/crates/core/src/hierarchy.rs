//! Membership tests for the R-Pauli and R-Clifford sets, the
//! symmetric-Pauli square-root construction, and Clifford phase correction.
//!
//! R-Paulis are exactly the operators `i^c (p_1 x ... x p_n) K^b` with
//! `p_j` Pauli letters, `c` a power of `i` and `b` a conjugation bit. The
//! `k`-th level of the R-Clifford hierarchy is defined recursively: the
//! conjugate of every level-1 element must land in level `k-1`. Level 2
//! (the R-Clifford group) is tested by conjugating the generator set
//! `{X_i, Z_i, iI, K}`.

use crate::linalg::{c, max_abs, CMat, C_ONE};
use crate::rlinear::RLinearOp;
use crate::stab::PauliString;
use crate::{Error, Result};
use num_complex::Complex64;

/// An R-Pauli `i^c (p_1 x ... x p_n) K^b`. The `PauliString` holds the
/// literal tensor (its stored phase is the `i` power contributed by its
/// `Y` letters), and `c` is the extra power of `i` in front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RPauli {
    pub c: u8,
    pub pauli: PauliString,
    pub b: bool,
}

impl RPauli {
    /// Dense R-linear operator for this R-Pauli.
    pub fn to_rlinear(&self) -> Result<RLinearOp> {
        let n = self.pauli.width();
        let phase = match self.c % 4 {
            0 => C_ONE,
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        let mat = self.pauli.to_dense().map(|z| z * phase);
        if self.b {
            RLinearOp::from_antilinear(n, mat)
        } else {
            RLinearOp::from_linear(n, mat)
        }
    }
}

/// Matches `m = phase * X^x Z^z` for an arbitrary unit-modulus phase.
/// Returns `(phase, xmask, zmask)` with masks over index bits (qubit 1 is
/// the most significant bit).
fn match_pauli_any_phase(m: &CMat, tol: f64) -> Option<(Complex64, usize, usize)> {
    let dim = m.nrows();
    if dim != m.ncols() || !dim.is_power_of_two() {
        return None;
    }
    let bits = dim.trailing_zeros() as usize;
    let xmask = (0..dim).find(|&r| m[(r, 0)].norm() > 0.5)?;
    let phase = m[(xmask, 0)];
    if (phase.norm() - 1.0).abs() > tol {
        return None;
    }
    let mut zmask = 0usize;
    for b in 0..bits {
        let col = 1usize << b;
        let v = m[(col ^ xmask, col)];
        if (v.norm() - 1.0).abs() > tol {
            return None;
        }
        let ratio = v / phase;
        if (ratio - C_ONE).norm() < tol {
            // z bit 0.
        } else if (ratio + C_ONE).norm() < tol {
            zmask |= 1 << b;
        } else {
            return None;
        }
    }
    for col in 0..dim {
        let sign = if ((col & zmask).count_ones() & 1) == 1 {
            -phase
        } else {
            phase
        };
        for r in 0..dim {
            let expect = if r == col ^ xmask {
                sign
            } else {
                Complex64::new(0.0, 0.0)
            };
            if (m[(r, col)] - expect).norm() > tol {
                return None;
            }
        }
    }
    Some((phase, xmask, zmask))
}

fn masks_to_pauli_string(n: usize, xmask: usize, zmask: usize) -> PauliString {
    let mut p = PauliString::identity(n);
    for s in 0..n {
        let bit = 1usize << (n - 1 - s);
        if xmask & bit != 0 {
            p.set_x(s, true);
        }
        if zmask & bit != 0 {
            p.set_z(s, true);
        }
    }
    let y = (p.y_count() % 4) as u8;
    p.set_phase(y);
    p
}

/// Structure-scan membership test for the R-Pauli set. A candidate with
/// `B = 0` must have `A` proportional (by a power of `i`) to a Pauli
/// tensor; with `A = 0` the same goes for `B`.
pub fn is_r_pauli(op: &RLinearOp, tol: f64) -> Option<RPauli> {
    let n = op.qubits();
    let (mat, b) = if max_abs(op.antilinear_part()) < tol {
        (op.linear_part(), false)
    } else if max_abs(op.linear_part()) < tol {
        (op.antilinear_part(), true)
    } else {
        return None;
    };
    let (phase, xmask, zmask) = match_pauli_any_phase(mat, tol)?;
    // The leading phase must itself be a power of i.
    let cands = [C_ONE, c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
    let cprime = (0..4).find(|&k| (phase - cands[k]).norm() < tol)? as u8;
    let pauli = masks_to_pauli_string(n, xmask, zmask);
    // i^c' X^x Z^z = i^c * (literal tensor) with the tensor contributing
    // i^(#Y).
    let y = (pauli.y_count() % 4) as u8;
    let cc = (cprime + 4 - y) % 4;
    Some(RPauli { c: cc, pauli, b })
}

/// Generator set for the R-Pauli group: `{X_i, Z_i : i} u {iI, K}`.
pub fn r_pauli_generators(n: usize) -> Result<Vec<RLinearOp>> {
    let mut gens = Vec::new();
    for q in 1..=n {
        gens.push(crate::gate::gate_to_rlinear(&crate::gate::Gate::X(q), n)?);
        gens.push(crate::gate::gate_to_rlinear(&crate::gate::Gate::Z(q), n)?);
    }
    gens.push(RLinearOp::identity(n).scale(c(0.0, 1.0)));
    gens.push(RLinearOp::conjugation(n));
    Ok(gens)
}

/// R-Clifford membership: every generator of the R-Pauli group conjugates
/// to an R-Pauli. Requires R-unitarity; dense bound `n <= 6`.
pub fn is_r_clifford(op: &RLinearOp, tol: f64) -> Result<bool> {
    let n = op.qubits();
    if n > 6 {
        return Err(Error::WidthExceeded {
            what: "R-Clifford membership",
            width: n,
            bound: 6,
        });
    }
    if !op.is_r_unitary(tol) {
        return Err(Error::NotRUnitary(op.r_unitarity_residual()));
    }
    let dag = op.dagger();
    for g in r_pauli_generators(n)? {
        let conj = op.star(&g)?.star(&dag)?;
        if is_r_pauli(&conj, tol.max(1e-8)).is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest hierarchy level `k <= kmax` containing the operator, or `None`.
/// Tested by recursive conjugation of the generator set; membership of
/// intermediate conjugates is cached. Dense bounds `n <= 3`, `kmax <= 4`.
pub fn hierarchy_level(op: &RLinearOp, kmax: usize, tol: f64) -> Result<Option<usize>> {
    let n = op.qubits();
    if n > 3 {
        return Err(Error::WidthExceeded {
            what: "hierarchy level recursion",
            width: n,
            bound: 3,
        });
    }
    if kmax > 4 {
        return Err(Error::WidthExceeded {
            what: "hierarchy level recursion depth",
            width: kmax,
            bound: 4,
        });
    }
    if !op.is_r_unitary(tol) {
        return Err(Error::NotRUnitary(op.r_unitarity_residual()));
    }
    let gens = r_pauli_generators(n)?;
    let mut memo: Vec<(RLinearOp, usize, bool)> = Vec::new();
    for k in 1..=kmax {
        if level_at_most(op, k, &gens, tol, &mut memo)? {
            return Ok(Some(k));
        }
    }
    Ok(None)
}

fn level_at_most(
    op: &RLinearOp,
    k: usize,
    gens: &[RLinearOp],
    tol: f64,
    memo: &mut Vec<(RLinearOp, usize, bool)>,
) -> Result<bool> {
    if k == 1 {
        return Ok(is_r_pauli(op, tol.max(1e-8)).is_some());
    }
    for (cand, ck, res) in memo.iter() {
        if *ck == k && cand.distance(op) < 1e-8 {
            return Ok(*res);
        }
    }
    let dag = op.dagger();
    let mut ok = true;
    for g in gens {
        let conj = op.star(g)?.star(&dag)?;
        if !level_at_most(&conj, k - 1, gens, tol, memo)? {
            ok = false;
            break;
        }
    }
    memo.push((op.clone(), k, ok));
    Ok(ok)
}

/// Builds a Clifford `U` with `U U^T = p` for a symmetric Pauli `p` (even
/// `Y` count, `b = 0`), via the index-set construction
/// `U = e^(i a/2) (prod CX) (prod H) (prod S)`.
pub fn symmetric_pauli_root(p: &RPauli) -> Result<CMat> {
    if p.b {
        return Err(Error::Other(
            "symmetric Pauli root needs a linear Pauli (b = 0)".into(),
        ));
    }
    let n = p.pauli.width();
    if !p.pauli.y_count().is_multiple_of(2) {
        return Err(Error::Other("Pauli is not symmetric (odd Y count)".into()));
    }
    let mut jx = Vec::new();
    let mut jy = Vec::new();
    let mut jz = Vec::new();
    for s in 0..n {
        match (p.pauli.x_bit(s), p.pauli.z_bit(s)) {
            (true, false) => jx.push(s + 1),
            (true, true) => jy.push(s + 1),
            (false, true) => jz.push(s + 1),
            (false, false) => {}
        }
    }
    let alpha = (p.c as f64 + p.pauli.y_count() as f64) * std::f64::consts::FRAC_PI_2;

    let half = jy.len() / 2;
    let jy1: Vec<usize> = jy[..half].to_vec();
    let jy2: Vec<usize> = jy[half..].to_vec();

    use crate::gate::{gate_to_rlinear, Gate};
    let dim = 1usize << n;
    let mut u = CMat::identity(dim, dim);
    // Matrix order: CX block, then H block, then S block (rightmost
    // applied first).
    for (&i, &j) in jy1.iter().zip(jy2.iter()) {
        u *= gate_to_rlinear(&Gate::CX(i, j), n)?.linear_part();
    }
    for &j in jx.iter().chain(jy1.iter()) {
        u *= gate_to_rlinear(&Gate::H(j), n)?.linear_part();
    }
    for &k in jx.iter().chain(jy.iter()).chain(jz.iter()) {
        u *= gate_to_rlinear(&Gate::S(k), n)?.linear_part();
    }
    let phase = Complex64::from_polar(1.0, alpha / 2.0);
    Ok(u.map(|z| z * phase))
}

/// Checks that a unitary is Clifford by Pauli conjugation of `X_i`, `Z_i`.
pub fn is_clifford_unitary(u: &CMat, tol: f64) -> Result<bool> {
    let dim = u.nrows();
    if !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch("non power-of-two unitary".into()));
    }
    let n = dim.trailing_zeros() as usize;
    if crate::linalg::unitarity_residual(u) > tol.max(1e-9) {
        return Err(Error::Other("matrix is not unitary".into()));
    }
    use crate::gate::{gate_to_rlinear, Gate};
    for q in 1..=n {
        for g in [Gate::X(q), Gate::Z(q)] {
            let gm = gate_to_rlinear(&g, n)?;
            let conj = u * gm.linear_part() * u.adjoint();
            if match_pauli_any_phase(&conj, tol.max(1e-8)).is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Phase correction moving a Clifford into the R-Clifford group: computes
/// `U U^T = e^(i beta) X^x Z^z`, returns `theta = -beta/2` and
/// `e^(i theta) U`.
pub fn phase_correct_clifford(u: &CMat, tol: f64) -> Result<(f64, RLinearOp)> {
    let dim = u.nrows();
    let n = dim.trailing_zeros() as usize;
    if !is_clifford_unitary(u, tol)? {
        return Err(Error::Other("matrix is not a Clifford unitary".into()));
    }
    let uut = u * u.transpose();
    let (phase, _, _) = match_pauli_any_phase(&uut, tol.max(1e-8))
        .ok_or_else(|| Error::Other("U U^T is not a Pauli within tolerance".into()))?;
    let beta = phase.arg();
    let theta = -beta / 2.0;
    let corrected = u.map(|z| z * Complex64::from_polar(1.0, theta));
    Ok((theta, RLinearOp::from_linear(n, corrected)?))
}

//! Decomposition pipelines: orthogonal matrices into two-level orthogonal
//! factors, two-level factors into multiply-controlled-Z based gate
//! sequences, R-unitaries into alternating unitary / partial-conjugation
//! factors, and `K_L` circuit synthesis from a language decider.
//!
//! The unitary/`K_L` factorization does not route through the gate
//! pipeline. Writing `A = U S V^H` (SVD) and moving the frames onto the
//! antilinear part, R-unitarity forces the transformed antilinear block
//! into `G = (+)_c s_c V_c` with each `V_c` an antisymmetric unitary on a
//! singular-value cluster (plus a free unitary on the kernel of `A`).
//! Antisymmetric unitaries pair up (Youla), each pair reduces to
//! `K_p v K_p` with `v` a 2x2 unitary, and the kernel block contributes a
//! single conjugation. The result is at most two `K_L` factors for every
//! R-unitary, well inside the factor-count bound.

use crate::circuit::Circuit;
use crate::gate::Gate;
use crate::linalg::{c, identity_c, CMat, CVec, RMat, C_ONE};
use crate::rlinear::{make_kl, Language, RLinearOp};
use crate::{Error, Result};
use num_complex::Complex64;

/// A two-level orthogonal factor: the identity outside rows/columns
/// `(j, i)` with `j < i`, and the given 2x2 orthogonal block on the
/// ordered pair `(j, i)`.
#[derive(Debug, Clone)]
pub struct TwoLevelOrthogonal {
    pub dim: usize,
    pub j: usize,
    pub i: usize,
    pub block: [[f64; 2]; 2],
}

impl TwoLevelOrthogonal {
    pub fn embed(&self) -> RMat {
        let mut m = RMat::identity(self.dim, self.dim);
        m[(self.j, self.j)] = self.block[0][0];
        m[(self.j, self.i)] = self.block[0][1];
        m[(self.i, self.j)] = self.block[1][0];
        m[(self.i, self.i)] = self.block[1][1];
        m
    }
}

/// Product of two-level factors in list order (first factor leftmost).
pub fn two_level_product(factors: &[TwoLevelOrthogonal], dim: usize) -> RMat {
    let mut prod = RMat::identity(dim, dim);
    for f in factors {
        prod *= f.embed();
    }
    prod
}

const ELIM_GUARD: f64 = 1e-12;

/// Decomposes an orthogonal matrix into at most `d(d-1)/2` two-level
/// orthogonal factors whose ordered product reconstructs it. Elimination
/// proceeds column-major, zeroing `(i, j)` for `i > j`; already-zero
/// targets are skipped, and the final 2x2 block is emitted whole.
pub fn two_level_decompose(w: &RMat) -> Result<Vec<TwoLevelOrthogonal>> {
    let d = w.nrows();
    if w.ncols() != d {
        return Err(Error::DimensionMismatch("two-level decomposition".into()));
    }
    let resid = crate::linalg::orthogonality_residual(w);
    if resid > 1e-9 {
        return Err(Error::NotOrthogonal(resid));
    }
    if d == 1 {
        return if (w[(0, 0)] - 1.0).abs() < 1e-9 {
            Ok(Vec::new())
        } else {
            Err(Error::Other(
                "1x1 orthogonal -1 has no two-level form".into(),
            ))
        };
    }
    let mut work = w.clone();
    let mut factors: Vec<TwoLevelOrthogonal> = Vec::new();

    let apply_reflection = |work: &mut RMat, j: usize, i: usize, vjj: f64, vji: f64| {
        // V rows (j, i) = [[vjj, vji], [vji, -vjj]]; V is a symmetric
        // involution, so it is its own inverse and transpose.
        for col in 0..d {
            let a = work[(j, col)];
            let b = work[(i, col)];
            work[(j, col)] = vjj * a + vji * b;
            work[(i, col)] = vji * a - vjj * b;
        }
    };

    for j in 0..d.saturating_sub(2) {
        let mut eliminated = false;
        for i in (j + 1)..d {
            if work[(i, j)].abs() <= ELIM_GUARD {
                continue;
            }
            let n = work[(j, j)].hypot(work[(i, j)]);
            let vjj = work[(j, j)] / n;
            let vji = work[(i, j)] / n;
            apply_reflection(&mut work, j, i, vjj, vji);
            factors.push(TwoLevelOrthogonal {
                dim: d,
                j,
                i,
                block: [[vjj, vji], [vji, -vjj]],
            });
            eliminated = true;
        }
        if !eliminated && work[(j, j)] < 0.0 {
            // Column already clear but with the wrong sign; one forced
            // reflection against the next coordinate restores +1.
            let i = j + 1;
            apply_reflection(&mut work, j, i, -1.0, 0.0);
            factors.push(TwoLevelOrthogonal {
                dim: d,
                j,
                i,
                block: [[-1.0, 0.0], [0.0, 1.0]],
            });
        }
    }

    // Remaining bottom 2x2 block (orthogonality clears everything else).
    let (p, q) = (d - 2, d - 1);
    let block = [[work[(p, p)], work[(p, q)]], [work[(q, p)], work[(q, q)]]];
    let nontrivial = (block[0][0] - 1.0).abs() > 1e-13
        || (block[1][1] - 1.0).abs() > 1e-13
        || block[0][1].abs() > 1e-13
        || block[1][0].abs() > 1e-13;
    if nontrivial {
        // work = V_k ... V_1 W = I (+) R, and every V is a symmetric
        // involution, so the factor list reconstructs
        // W = V_1 ... V_k (I (+) R) with R appended as the last factor.
        factors.push(TwoLevelOrthogonal {
            dim: d,
            j: p,
            i: q,
            block,
        });
    }
    debug_assert!(factors.len() <= d * (d - 1) / 2);
    Ok(factors)
}

fn wire_bit(m: usize, wire: usize) -> usize {
    m - wire
}

/// Multi-controlled X on `target` with the listed control wires required
/// at the given polarities; emitted as `X`-wrapped `H ChZ H`.
fn mcx_gates(m: usize, controls: &[(usize, bool)], target: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    let wraps: Vec<usize> = controls
        .iter()
        .filter(|(_, pol)| !pol)
        .map(|(w, _)| *w)
        .collect();
    for &w in &wraps {
        gates.push(Gate::X(w));
    }
    gates.push(Gate::H(target));
    let mut supports: Vec<usize> = controls.iter().map(|(w, _)| *w).collect();
    supports.push(target);
    supports.sort_unstable();
    gates.push(Gate::ChZ(supports));
    gates.push(Gate::H(target));
    for &w in wraps.iter().rev() {
        gates.push(Gate::X(w));
    }
    let _ = m;
    gates
}

/// Multi-controlled Z over all wires with polarities on the controls.
fn mcz_gates(controls: &[(usize, bool)], target: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    let wraps: Vec<usize> = controls
        .iter()
        .filter(|(_, pol)| !pol)
        .map(|(w, _)| *w)
        .collect();
    for &w in &wraps {
        gates.push(Gate::X(w));
    }
    let mut supports: Vec<usize> = controls.iter().map(|(w, _)| *w).collect();
    supports.push(target);
    supports.sort_unstable();
    gates.push(Gate::ChZ(supports));
    for &w in wraps.iter().rev() {
        gates.push(Gate::X(w));
    }
    gates
}

/// Controlled planar rotation `C^(m-1) R(theta)` on `target` (polarity
/// controls on every other wire): `R X R^dag X = R^2` conjugation trick.
fn controlled_rotation_gates(
    m: usize,
    controls: &[(usize, bool)],
    target: usize,
    theta: f64,
) -> Vec<Gate> {
    let mut gates = Vec::new();
    gates.push(Gate::Yrot(target, theta));
    gates.extend(mcx_gates(m, controls, target));
    gates.push(Gate::Yrot(target, -theta));
    gates.extend(mcx_gates(m, controls, target));
    gates
}

/// Synthesizes one two-level orthogonal factor on `m` rebits into
/// `{X, H, ChZ, Yrot}` gates: Gray-code routing via multiply-controlled X,
/// then a controlled single-rebit rotation (and a multiply-controlled Z
/// for reflection blocks).
pub fn two_level_to_gates(v: &TwoLevelOrthogonal, m: usize) -> Result<Vec<Gate>> {
    let dim = 1usize << m;
    if v.dim != dim {
        return Err(Error::DimensionMismatch(format!(
            "two-level factor of dimension {} on {m} rebits",
            v.dim
        )));
    }
    let s = v.j;
    let t = v.i;

    // Gray path: flip differing wires in increasing wire order, leaving
    // the last difference as the controlled-gate target.
    let diff = s ^ t;
    let mut flip_wires: Vec<usize> = (1..=m)
        .filter(|&w| (diff >> wire_bit(m, w)) & 1 == 1)
        .collect();
    let target = flip_wires.pop().expect("two-level labels differ");

    let mut path_state = s;
    let mut routing: Vec<Vec<Gate>> = Vec::new();
    for &w in &flip_wires {
        // Swap path_state with path_state ^ bit(w): controls are every
        // other wire at the current state's bits.
        let controls: Vec<(usize, bool)> = (1..=m)
            .filter(|&cw| cw != w)
            .map(|cw| (cw, (path_state >> wire_bit(m, cw)) & 1 == 1))
            .collect();
        routing.push(mcx_gates(m, &controls, w));
        path_state ^= 1 << wire_bit(m, w);
    }
    debug_assert_eq!(path_state ^ (1 << wire_bit(m, target)), t);

    // Local block in (bit 0, bit 1) order of the target wire.
    let s_bit = (path_state >> wire_bit(m, target)) & 1;
    let b = v.block;
    let local = if s_bit == 0 {
        b
    } else {
        // Conjugate by X: swap basis order.
        [[b[1][1], b[1][0]], [b[0][1], b[0][0]]]
    };
    let controls: Vec<(usize, bool)> = (1..=m)
        .filter(|&cw| cw != target)
        .map(|cw| (cw, (t >> wire_bit(m, cw)) & 1 == 1))
        .collect();

    let det = local[0][0] * local[1][1] - local[0][1] * local[1][0];
    let mut core: Vec<Gate> = Vec::new();
    if det > 0.0 {
        // Rotation R(theta).
        let theta = local[1][0].atan2(local[0][0]);
        if theta.abs() > 1e-14 {
            core.extend(controlled_rotation_gates(m, &controls, target, theta));
        }
    } else {
        // Reflection: local = R(theta) Z.
        let rz = [[local[0][0], -local[0][1]], [local[1][0], -local[1][1]]];
        let theta = rz[1][0].atan2(rz[0][0]);
        core.extend(mcz_gates(&controls, target));
        if theta.abs() > 1e-14 {
            core.extend(controlled_rotation_gates(m, &controls, target, theta));
        }
    }

    let mut gates: Vec<Gate> = Vec::new();
    for r in &routing {
        gates.extend(r.iter().cloned());
    }
    gates.extend(core);
    for r in routing.iter().rev() {
        gates.extend(r.iter().cloned());
    }
    Ok(gates)
}

/// One factor of an alternating unitary / partial-conjugation
/// factorization.
#[derive(Debug, Clone)]
pub enum Factor {
    Unitary(CMat),
    Conjugation(Language),
    Phase(f64),
}

/// Alternating factorization of an R-unitary; `factors[0]` is applied
/// first.
#[derive(Debug, Clone)]
pub struct AntiunitaryFactorization {
    pub n: usize,
    pub factors: Vec<Factor>,
}

impl AntiunitaryFactorization {
    /// Star-composes the factors back into an R-linear operator.
    pub fn reconstruct(&self) -> Result<RLinearOp> {
        let mut op = RLinearOp::identity(self.n);
        for f in &self.factors {
            let next = match f {
                Factor::Unitary(u) => RLinearOp::from_linear(self.n, u.clone())?,
                Factor::Conjugation(lang) => make_kl(lang),
                Factor::Phase(theta) => RLinearOp::from_linear(
                    self.n,
                    identity_c(1 << self.n).map(|z| z * Complex64::from_polar(1.0, *theta)),
                )?,
            };
            op = next.star(&op)?;
        }
        Ok(op)
    }

    /// Number of `K_L` factors (the conjugation depth of this particular
    /// factorization; not claimed minimal).
    pub fn conjugation_count(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| matches!(f, Factor::Conjugation(_)))
            .count()
    }
}

const CLASS_EPS: f64 = 1e-10;
const CLUSTER_GAP: f64 = 1e-8;

/// Factorization of an R-unitary into alternating unitaries and partial
/// conjugations `K_L`, with at most two `K_L` factors.
pub fn factor_r_unitary(op: &RLinearOp, tol: f64) -> Result<AntiunitaryFactorization> {
    if !op.is_r_unitary(tol.max(1e-9)) {
        return Err(Error::NotRUnitary(op.r_unitarity_residual()));
    }
    let n = op.qubits();
    let d = op.dim();

    // SVD of the linear part, singular values descending.
    let (u_a, sigma_raw, v_a) = crate::linalg::robust_svd(op.linear_part());
    let sigma: Vec<f64> = sigma_raw.iter().map(|&s| s.min(1.0)).collect();
    let v_t = v_a.adjoint();

    // Antilinear part in the singular frames.
    let g = u_a.adjoint() * op.antilinear_part() * v_t.transpose();
    let s_col: Vec<f64> = (0..d).map(|j| g.column(j).norm()).collect();

    // Classify coordinates.
    #[derive(PartialEq, Clone, Copy, Debug)]
    enum Class {
        Unit,
        Middle,
        Kernel,
    }
    let class: Vec<Class> = (0..d)
        .map(|j| {
            if s_col[j] < CLASS_EPS {
                Class::Unit
            } else if sigma[j] < CLASS_EPS {
                Class::Kernel
            } else {
                Class::Middle
            }
        })
        .collect();

    // Middle clusters: contiguous runs (singular values are sorted) split
    // at gaps.
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    for j in 0..d {
        if class[j] != Class::Middle {
            if !current.is_empty() {
                clusters.push(std::mem::take(&mut current));
            }
            continue;
        }
        if let Some(&last) = current.last() {
            if (sigma[last] - sigma[j]).abs() > CLUSTER_GAP {
                clusters.push(std::mem::take(&mut current));
            }
        }
        current.push(j);
    }
    if !current.is_empty() {
        clusters.push(current);
    }

    let kernel: Vec<usize> = (0..d).filter(|&j| class[j] == Class::Kernel).collect();

    // Youla pairing inside each cluster builds the rotation frame Phi and
    // the middle unitary M; pair-low labels feed the languages.
    let mut phi = identity_c(d);
    let mut mmat = identity_c(d);
    let mut low_labels: Vec<usize> = Vec::new();

    for cluster in &clusters {
        let cdim = cluster.len();
        if cdim % 2 != 0 {
            return Err(Error::Other(
                "singular-value clustering produced an odd antisymmetric block".into(),
            ));
        }
        let sig_c = cluster.iter().map(|&j| sigma[j]).sum::<f64>() / cdim as f64;
        let s_c = (1.0 - sig_c * sig_c).max(0.0).sqrt();
        // Local antisymmetric unitary.
        let mut v_c = CMat::zeros(cdim, cdim);
        for (a, &ja) in cluster.iter().enumerate() {
            for (b, &jb) in cluster.iter().enumerate() {
                v_c[(a, b)] = g[(ja, jb)] / c(s_c, 0.0);
            }
        }
        // Greedy pairing: u, v = V conj(u), then project out.
        let mut basis: Vec<CVec> = (0..cdim)
            .map(|k| {
                let mut e = CVec::zeros(cdim);
                e[k] = C_ONE;
                e
            })
            .collect();
        let mut pairs: Vec<(CVec, CVec)> = Vec::new();
        while let Some(u1) = basis.first().cloned() {
            let mut v1 = &v_c * u1.map(|z| z.conj());
            // Hygiene: remove any numerical component along u1 and
            // renormalize.
            let ip = u1.dotc(&v1);
            v1 -= u1.map(|z| z * ip);
            let norm = v1.norm();
            if norm < 0.5 {
                return Err(Error::Other(
                    "antisymmetric pairing degenerated; clustering tolerance missed".into(),
                ));
            }
            v1 /= c(norm, 0.0);
            // Project both out of the remaining basis.
            let mut next_basis: Vec<CVec> = Vec::new();
            for w in basis.iter().skip(1) {
                let mut w2 = w.clone();
                let ip_u = u1.dotc(&w2);
                w2 -= u1.map(|z| z * ip_u);
                let ip_v = v1.dotc(&w2);
                w2 -= v1.map(|z| z * ip_v);
                let nn = w2.norm();
                if nn > 1e-6 {
                    next_basis.push(w2 / c(nn, 0.0));
                }
            }
            // Re-orthonormalize the remainder (modified Gram-Schmidt).
            let mut ortho: Vec<CVec> = Vec::new();
            for w in next_basis {
                let mut w2 = w;
                for o in &ortho {
                    let ip = o.dotc(&w2);
                    w2 -= o.map(|z| z * ip);
                }
                let nn = w2.norm();
                if nn > 1e-6 {
                    ortho.push(w2 / c(nn, 0.0));
                }
            }
            pairs.push((u1, v1));
            basis = ortho;
        }
        if pairs.len() * 2 != cdim {
            return Err(Error::Other("pairing lost dimensions".into()));
        }
        // Local Phi columns [u1 v1 u2 v2 ...] embedded at the cluster's
        // global positions; M gets the 2x2 unitary per pair.
        let ghat = |col: &CVec, row: &CVec| -> Complex64 {
            // row^H V_c conj(col)
            row.dotc(&(&v_c * col.map(|z| z.conj())))
        };
        for (k, (u1, v1)) in pairs.iter().enumerate() {
            let p_global = cluster[2 * k];
            let q_global = cluster[2 * k + 1];
            for (local, &jrow) in cluster.iter().enumerate() {
                phi[(jrow, p_global)] = u1[local];
                phi[(jrow, q_global)] = v1[local];
            }
            if p_global != cluster[2 * k] {
                unreachable!();
            }
            // Ghat entries in the (u, v) frame; beta = <u| V conj(v)>,
            // gamma = <v| V conj(u)> scaled by s_c.
            let beta = ghat(v1, u1) * c(s_c, 0.0);
            let gamma = ghat(u1, v1) * c(s_c, 0.0);
            mmat[(p_global, p_global)] = c(sig_c, 0.0);
            mmat[(q_global, q_global)] = c(sig_c, 0.0);
            mmat[(p_global, q_global)] = beta.conj();
            mmat[(q_global, p_global)] = gamma;
            low_labels.push(p_global);
        }
    }

    // Kernel block: M carries conj(G_kernel) and the labels join L1.
    for &ja in &kernel {
        for &jb in &kernel {
            mmat[(ja, jb)] = g[(ja, jb)].conj();
        }
    }

    let l2 = Language::from_indices(n, &low_labels);
    let mut l1_labels = low_labels.clone();
    l1_labels.extend(kernel.iter().copied());
    let l1 = Language::from_indices(n, &l1_labels);

    // Assemble factors in application order, merging trivial pieces.
    let first = phi.adjoint() * &v_t;
    let last = &u_a * &phi;
    let mut factors: Vec<Factor> = Vec::new();
    let mut pending: CMat = first;
    let push_unitary = |factors: &mut Vec<Factor>, mat: CMat| {
        // Near-phase unitaries collapse to a phase factor.
        let z0 = mat[(0, 0)];
        if z0.norm() > 0.9 {
            let phase = z0 / c(z0.norm(), 0.0);
            let as_phase = identity_c(mat.nrows()).map(|z| z * phase);
            if crate::linalg::max_abs_diff(&mat, &as_phase) < 1e-12 {
                let theta = phase.arg();
                if theta.abs() > 1e-12 {
                    factors.push(Factor::Phase(theta));
                }
                return;
            }
        }
        if crate::linalg::max_abs_diff(&mat, &identity_c(mat.nrows())) > 1e-12 {
            factors.push(Factor::Unitary(mat));
        }
    };

    if !l2.is_empty() {
        push_unitary(&mut factors, pending);
        factors.push(Factor::Conjugation(l2));
        pending = mmat;
    } else {
        pending = &mmat * pending;
    }
    if !l1.is_empty() {
        push_unitary(&mut factors, pending);
        factors.push(Factor::Conjugation(l1));
        pending = last;
    } else {
        pending = &last * pending;
    }
    push_unitary(&mut factors, pending);
    if factors.is_empty() {
        factors.push(Factor::Unitary(identity_c(d)));
    }

    let out = AntiunitaryFactorization { n, factors };
    let rebuilt = out.reconstruct()?;
    let resid = rebuilt.distance(op);
    if resid > tol.max(1e-8) {
        return Err(Error::Other(format!(
            "factorization reconstruction residual {resid:.3e} exceeds tolerance"
        )));
    }
    Ok(out)
}

/// Builds the circuit `decider . CK(result) . decider^{-1}` realizing
/// `K_L` for the language computed by a reversible decider over
/// `{CCX, CX, X}`. The decider acts on `total >= n` wires; wires above `n`
/// are work ancillas assumed `|0>`, and `result` is the wire holding the
/// language bit after the decider runs.
pub fn synthesize_kl_circuit(decider: &Circuit, n: usize, result: usize) -> Result<Circuit> {
    if decider.n < n {
        return Err(Error::DimensionMismatch(format!(
            "decider on {} wires cannot decide a {n}-qubit language",
            decider.n
        )));
    }
    if result == 0 || result > decider.n {
        return Err(Error::QubitOutOfRange {
            index: result,
            n: decider.n,
        });
    }
    for g in &decider.gates {
        if !matches!(g, Gate::CCX(_, _, _) | Gate::CX(_, _) | Gate::X(_)) {
            return Err(Error::UnsupportedGate {
                kind: format!("{g:?}"),
                context: "reversible language decider",
            });
        }
    }
    let mut out = Circuit::new(decider.n);
    for g in &decider.gates {
        out.push(g.clone())?;
    }
    out.push(Gate::CK(result))?;
    // CCX, CX and X are involutions, so the inverse is the reversed list.
    for g in decider.gates.iter().rev() {
        out.push(g.clone())?;
    }
    Ok(out)
}

/// Classically evaluates a reversible decider: the language over the first
/// `n` wires read off the `result` wire.
pub fn decider_language(decider: &Circuit, n: usize, result: usize) -> Result<Language> {
    let total = decider.n;
    let mut lang = Language::empty(n);
    for x in 0..(1usize << n) {
        let mut bits = vec![false; total + 1]; // 1-based wires
        for (w, bit) in bits.iter_mut().enumerate().take(n + 1).skip(1) {
            *bit = (x >> (n - w)) & 1 == 1;
        }
        for g in &decider.gates {
            match g {
                Gate::X(q) => bits[*q] = !bits[*q],
                Gate::CX(a, b) => {
                    if bits[*a] {
                        bits[*b] = !bits[*b]
                    }
                }
                Gate::CCX(a, b, t) => {
                    if bits[*a] && bits[*b] {
                        bits[*t] = !bits[*t]
                    }
                }
                other => {
                    return Err(Error::UnsupportedGate {
                        kind: format!("{other:?}"),
                        context: "reversible language decider",
                    })
                }
            }
        }
        if bits[result] {
            lang.insert(x);
        }
    }
    Ok(lang)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{gate_to_rlinear, project_wire};
    use crate::linalg::{self, max_abs_diff_r, random_orthogonal, random_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_level_decompose_rotation_and_identity() {
        let theta = 0.83f64;
        let rot =
            RMat::from_row_slice(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        let factors = two_level_decompose(&rot).unwrap();
        assert_eq!(factors.len(), 1);
        assert!(max_abs_diff_r(&factors[0].embed(), &rot) < 1e-12);

        let id = RMat::identity(8, 8);
        assert!(two_level_decompose(&id).unwrap().is_empty());
    }

    #[test]
    fn two_level_decompose_random_orthogonals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [4usize, 8, 16] {
            for _ in 0..8 {
                let w = random_orthogonal(d, &mut rng);
                let factors = two_level_decompose(&w).unwrap();
                assert!(factors.len() <= d * (d - 1) / 2);
                let prod = two_level_product(&factors, d);
                assert!(
                    max_abs_diff_r(&prod, &w) < 1e-9,
                    "reconstruction residual {}",
                    max_abs_diff_r(&prod, &w)
                );
            }
        }
    }

    #[test]
    fn two_level_decompose_negative_determinant_diag() {
        let w = RMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
            -1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0,
        ]));
        let factors = two_level_decompose(&w).unwrap();
        assert!(factors.len() <= 28);
        assert!(max_abs_diff_r(&two_level_product(&factors, 8), &w) < 1e-12);
    }

    fn gate_list_matrix(gates: &[Gate], m: usize) -> RMat {
        let dim = 1usize << m;
        let mut prod = RMat::identity(dim, dim);
        for g in gates {
            let dense = linalg::re_mat(gate_to_rlinear(g, m).unwrap().linear_part());
            prod = dense * prod;
        }
        prod
    }

    #[test]
    fn two_level_to_gates_examples() {
        // Basis states 0 and 1 differ in the last wire: no routing.
        let theta = 1.1f64;
        let v = TwoLevelOrthogonal {
            dim: 8,
            j: 0,
            i: 1,
            block: [[theta.cos(), -theta.sin()], [theta.sin(), theta.cos()]],
        };
        let gates = two_level_to_gates(&v, 3).unwrap();
        assert!(max_abs_diff_r(&gate_list_matrix(&gates, 3), &v.embed()) < 1e-9);

        // Z-like reflection block.
        let v = TwoLevelOrthogonal {
            dim: 8,
            j: 2,
            i: 5,
            block: [[1.0, 0.0], [0.0, -1.0]],
        };
        let gates = two_level_to_gates(&v, 3).unwrap();
        assert!(max_abs_diff_r(&gate_list_matrix(&gates, 3), &v.embed()) < 1e-9);
    }

    #[test]
    fn two_level_to_gates_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..30 {
            let m = 1 + trial % 3;
            let d = 1usize << m;
            let j = rng.random_range(0..d - 1);
            let i = rng.random_range(j + 1..d);
            let th: f64 = rng.random_range(-3.0..3.0);
            let reflect: bool = rng.random();
            let block = if reflect {
                [[th.cos(), th.sin()], [th.sin(), -th.cos()]]
            } else {
                [[th.cos(), -th.sin()], [th.sin(), th.cos()]]
            };
            let v = TwoLevelOrthogonal {
                dim: d,
                j,
                i,
                block,
            };
            let gates = two_level_to_gates(&v, m).unwrap();
            let resid = max_abs_diff_r(&gate_list_matrix(&gates, m), &v.embed());
            assert!(resid < 1e-9, "residual {resid} for {v:?}");
        }
    }

    fn random_r_unitary(n: usize, rng: &mut ChaCha8Rng) -> RLinearOp {
        let w = random_orthogonal(1 << (n + 1), rng);
        crate::codec::decode_operator(&crate::codec::RealOperator::new(w, n + 1).unwrap()).unwrap()
    }

    #[test]
    fn factor_unitary_input_has_no_conjugations() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let u = random_unitary(4, &mut rng);
        let op = RLinearOp::from_linear(2, u).unwrap();
        let fact = factor_r_unitary(&op, 1e-9).unwrap();
        assert_eq!(fact.conjugation_count(), 0);
        assert!(fact.reconstruct().unwrap().distance(&op) < 1e-8);
    }

    #[test]
    fn factor_kl_input_single_conjugation() {
        let lang = Language::from_indices(2, &[0, 3]);
        let op = make_kl(&lang);
        let fact = factor_r_unitary(&op, 1e-9).unwrap();
        assert!(fact.conjugation_count() <= 2);
        assert!(fact.reconstruct().unwrap().distance(&op) < 1e-8);
    }

    #[test]
    fn factor_counterexample_and_random_r_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        // The 1-qubit K_1 H S H K_1 product (conjugation depth two).
        let k1 = make_kl(&Language::from_indices(1, &[1]));
        let h = gate_to_rlinear(&Gate::H(1), 1).unwrap();
        let s = gate_to_rlinear(&Gate::S(1), 1).unwrap();
        let op = k1
            .star(&h)
            .unwrap()
            .star(&s)
            .unwrap()
            .star(&h)
            .unwrap()
            .star(&k1)
            .unwrap();
        let fact = factor_r_unitary(&op, 1e-9).unwrap();
        assert!(fact.reconstruct().unwrap().distance(&op) < 1e-8);
        assert_eq!(fact.conjugation_count(), 2);

        for n in 1..=3usize {
            let bound = (n + 1) * (1 << n) * ((1 << n) - 1) / 2;
            for _ in 0..10 {
                let op = random_r_unitary(n, &mut rng);
                let fact = factor_r_unitary(&op, 1e-9).unwrap();
                let resid = fact.reconstruct().unwrap().distance(&op);
                assert!(resid < 1e-8, "residual {resid} at n={n}");
                assert!(fact.conjugation_count() <= 2);
                // The factor-count bound counts partial antiunitary
                // factors: each K_L pairs with its neighboring unitaries
                // into one.
                assert!(fact.conjugation_count().max(1) <= bound);
                // Every conjugation factor is a genuine partial
                // antiunitary.
                for f in &fact.factors {
                    if let Factor::Conjugation(lang) = f {
                        assert!(make_kl(lang).is_partial_antiunitary(1e-9).is_some());
                    }
                }
            }
        }
    }

    #[test]
    fn factor_star_products_of_partial_antiunitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 2;
        let dim = 1 << n;
        for _ in 0..10 {
            let mut op = RLinearOp::identity(n);
            for _ in 0..3 {
                let u = random_unitary(dim, &mut rng);
                let v = random_unitary(dim, &mut rng);
                let lang = Language::from_fn(n, |x| rng.random::<bool>() || x == 0);
                let pa = crate::rlinear::compose_ukl_v(&u, &lang, &v).unwrap();
                op = pa.star(&op).unwrap();
            }
            let fact = factor_r_unitary(&op, 1e-9).unwrap();
            let resid = fact.reconstruct().unwrap().distance(&op);
            assert!(resid < 1e-8, "residual {resid}");
        }
    }

    #[test]
    fn synthesize_kl_circuit_examples() {
        // Conjunction decider: CCX computing x1 x2 into wire 3.
        let mut decider = Circuit::new(3);
        decider.push(Gate::CCX(1, 2, 3)).unwrap();
        let circ = synthesize_kl_circuit(&decider, 2, 3).unwrap();
        let cks = circ.gates.iter().filter(|g| g.is_conjugation()).count();
        assert_eq!(cks, 1);
        let lang = decider_language(&decider, 2, 3).unwrap();
        assert_eq!(lang.members().collect::<Vec<_>>(), vec![3]);

        let whole = circ.to_rlinear().unwrap();
        let projected = project_wire(&whole, 3, 0).unwrap();
        let expect = make_kl(&lang);
        assert!(projected.distance(&expect) < 1e-12);

        // Identity decider, result wire an ancilla stuck at 0: identity.
        let decider = Circuit::new(3);
        let circ = synthesize_kl_circuit(&decider, 2, 3).unwrap();
        let projected = project_wire(&circ.to_rlinear().unwrap(), 3, 0).unwrap();
        assert!(projected.distance(&RLinearOp::identity(2)) < 1e-12);

        // Parity decider via a CX chain.
        let mut decider = Circuit::new(4);
        decider.push(Gate::CX(1, 4)).unwrap();
        decider.push(Gate::CX(2, 4)).unwrap();
        decider.push(Gate::CX(3, 4)).unwrap();
        let circ = synthesize_kl_circuit(&decider, 3, 4).unwrap();
        let lang = decider_language(&decider, 3, 4).unwrap();
        let projected = project_wire(&circ.to_rlinear().unwrap(), 4, 0).unwrap();
        assert!(projected.distance(&make_kl(&lang)) < 1e-12);
        assert_eq!(lang.members().collect::<Vec<_>>(), vec![1, 2, 4, 7]);

        // Non-reversible gates rejected.
        let mut bad = Circuit::new(2);
        bad.push(Gate::H(1)).unwrap();
        assert!(synthesize_kl_circuit(&bad, 1, 2).is_err());
    }
}

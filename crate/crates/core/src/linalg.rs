//! Small dense linear-algebra helpers shared across the crate.
//!
//! Everything here is desk-scale: matrices are `2^n x 2^n` with `n` capped
//! around 10 by the callers. nalgebra supplies the factorizations (SVD, QR,
//! Hermitian eigendecomposition); this module adds the complex conveniences
//! the rest of the crate keeps reaching for.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;
pub type RMat = DMatrix<f64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const C_I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Conjugate transpose.
pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Entrywise complex conjugate.
pub fn conj_mat(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

pub fn identity_c(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn kron_c(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_r(a: &RMat, b: &RMat) -> RMat {
    a.kronecker(b)
}

/// Max absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs_diff_r(a: &RMat, b: &RMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Max absolute entry of `m`.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius norm of `a - b` for real matrices.
pub fn fro_diff_r(a: &RMat, b: &RMat) -> f64 {
    (a - b).norm()
}

/// `|M^T M - I|_max`, the orthogonality residual of a real matrix.
pub fn orthogonality_residual(m: &RMat) -> f64 {
    let d = m.nrows();
    let g = m.transpose() * m;
    max_abs_diff_r(&g, &RMat::identity(d, d))
}

/// `|M^H M - I|_max`, the unitarity residual of a complex matrix.
pub fn unitarity_residual(m: &CMat) -> f64 {
    let d = m.nrows();
    let g = m.adjoint() * m;
    max_abs_diff(&g, &identity_c(d))
}

/// Checks `P = P^2 = P^H` within `tol`.
pub fn is_projector(p: &CMat, tol: f64) -> bool {
    max_abs_diff(&(p * p), p) < tol && max_abs_diff(&p.adjoint(), p) < tol
}

/// Real part of a complex matrix.
pub fn re_mat(m: &CMat) -> RMat {
    m.map(|z| z.re)
}

/// Imaginary part of a complex matrix.
pub fn im_mat(m: &CMat) -> RMat {
    m.map(|z| z.im)
}

/// Promotes a real matrix to a complex one.
pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Largest singular value of a real matrix, via the symmetric
/// eigenproblem of `M^T M` (more dependable than the bidiagonal SVD).
pub fn largest_singular_value(m: &RMat) -> f64 {
    let gram = m.transpose() * m;
    let sym = (&gram + gram.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
        .max(0.0)
        .sqrt()
}

/// SVD `a = u diag(sigma) v^H` with `sigma` descending, computed both by
/// nalgebra's bidiagonal SVD and through the Hermitian eigenproblem of
/// `A^H A`, keeping whichever factorization reproduces `a` better.
/// nalgebra's complex SVD fails to converge on some inputs; the Hermitian
/// route never gets stuck, and the kernel frame is completed by
/// Gram-Schmidt.
pub fn robust_svd(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let d = a.nrows();
    assert_eq!(d, a.ncols());

    let residual = |u: &CMat, s: &[f64], v: &CMat| -> f64 {
        let mut rebuilt = CMat::zeros(d, d);
        for (k, &sk) in s.iter().enumerate() {
            if sk == 0.0 {
                continue;
            }
            let uc = u.column(k);
            let vc = v.column(k);
            for r in 0..d {
                for cc in 0..d {
                    rebuilt[(r, cc)] += uc[r] * vc[cc].conj() * c(sk, 0.0);
                }
            }
        }
        max_abs_diff(&rebuilt, a)
    };

    // Hermitian route.
    let gram = a.adjoint() * a;
    let herm = (&gram + gram.adjoint()).map(|z| z * c(0.5, 0.0));
    let eig = nalgebra::SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let mut v2 = CMat::zeros(d, d);
    for (new, &old) in order.iter().enumerate() {
        for r in 0..d {
            v2[(r, new)] = eig.eigenvectors[(r, old)];
        }
    }
    let mut s2 = vec![0.0f64; d];
    let mut u2 = CMat::zeros(d, d);
    let mut missing = Vec::new();
    for k in 0..d {
        let w = a * v2.column(k);
        let nrm = w.norm();
        if nrm > 1e-10 {
            s2[k] = nrm;
            for r in 0..d {
                u2[(r, k)] = w[r] / c(nrm, 0.0);
            }
        } else {
            s2[k] = nrm;
            missing.push(k);
        }
    }
    // Complete the kernel frame of U against the columns already placed.
    if !missing.is_empty() {
        let mut have: Vec<CVec> = (0..d)
            .filter(|k| !missing.contains(k))
            .map(|k| u2.column(k).into_owned())
            .collect();
        let mut probes: Vec<CVec> = Vec::new();
        // Eigenvectors of A A^H with the smallest eigenvalues make good
        // kernel probes; fall back to basis vectors.
        let gram_u = a * a.adjoint();
        let herm_u = (&gram_u + gram_u.adjoint()).map(|z| z * c(0.5, 0.0));
        let eig_u = nalgebra::SymmetricEigen::new(herm_u);
        let mut order_u: Vec<usize> = (0..d).collect();
        order_u.sort_by(|&i, &j| {
            eig_u.eigenvalues[i]
                .partial_cmp(&eig_u.eigenvalues[j])
                .unwrap()
        });
        for &k in &order_u {
            probes.push(eig_u.eigenvectors.column(k).into_owned());
        }
        for k in 0..d {
            let mut e = CVec::zeros(d);
            e[k] = C_ONE;
            probes.push(e);
        }
        let mut fill = missing.clone().into_iter();
        let mut slot = fill.next();
        for probe in probes {
            let Some(col) = slot else { break };
            let mut w = probe;
            for h in &have {
                let ip = h.dotc(&w);
                w -= h.map(|z| z * ip);
            }
            let nrm = w.norm();
            if nrm > 1e-6 {
                let w = w / c(nrm, 0.0);
                for r in 0..d {
                    u2[(r, col)] = w[r];
                }
                have.push(w);
                slot = fill.next();
            }
        }
        assert!(slot.is_none(), "failed to complete the kernel frame");
    }
    let r2 = residual(&u2, &s2, &v2);

    // nalgebra route.
    let svd = a.clone().svd(true, true);
    let (u1, v1t, s1_raw) = (svd.u.unwrap(), svd.v_t.unwrap(), svd.singular_values);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| s1_raw[j].partial_cmp(&s1_raw[i]).unwrap());
    let mut u1s = CMat::zeros(d, d);
    let mut v1 = CMat::zeros(d, d);
    let mut s1 = vec![0.0f64; d];
    for (new, &old) in order.iter().enumerate() {
        s1[new] = s1_raw[old];
        for r in 0..d {
            u1s[(r, new)] = u1[(r, old)];
            v1[(r, new)] = v1t[(old, r)].conj();
        }
    }
    let r1 = residual(&u1s, &s1, &v1);

    if r2 <= r1 {
        (u2, s2, v2)
    } else {
        (u1s, s1, v1)
    }
}

/// Haar-ish random unitary: QR of a complex Ginibre matrix with the phases
/// of the R diagonal absorbed into Q.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(dim, dim, |_, _| c(gaussian(rng), gaussian(rng)));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 1e-300 {
            d / d.norm()
        } else {
            C_ONE
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random real orthogonal matrix: QR of a real Ginibre matrix with signs of
/// the R diagonal absorbed into Q.
pub fn random_orthogonal<R: Rng>(dim: usize, rng: &mut R) -> RMat {
    let g = RMat::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let s = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..dim {
            q[(i, j)] *= s;
        }
    }
    q
}

/// Standard normal via Box-Muller; avoids depending on rand_distr.
pub fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random::<f64>();
        if u > 1e-300 {
            let v: f64 = rng.random::<f64>();
            return (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos();
        }
    }
}

/// Random complex unit vector.
pub fn random_state_vector<R: Rng>(dim: usize, rng: &mut R) -> CVec {
    loop {
        let v = CVec::from_fn(dim, |_, _| c(gaussian(rng), gaussian(rng)));
        let n = v.norm();
        if n > 1e-6 {
            return v / c(n, 0.0);
        }
    }
}

/// Random real unit vector.
pub fn random_real_unit_vector<R: Rng>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| gaussian(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

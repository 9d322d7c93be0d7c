//! Rebit tomography: the real-Pauli observable set, exact expectations,
//! measurement pre-rotation circuits over `{H, CZ}`, and reconstruction of
//! a rebit state up to its overall sign.
//!
//! A real density matrix expands over the `(4^m + 2^m)/2` Pauli strings
//! with an even number of `Y` factors. Any such observable is measurable
//! with computational-basis readout after a pre-rotation built from `H`
//! (for `X` factors) and `CZ` + `H H` (for `Y` pairs).

use crate::circuit::Circuit;
use crate::codec::RebitState;
use crate::gate::Gate;
use crate::linalg::RMat;
use crate::stab::PauliString;
use crate::{Error, Result};
use nalgebra::SymmetricEigen;
use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The observable set for `m` rebits: all Pauli strings with even `Y`
/// count, stored as packed `(x, z)` index masks with site 0 the most
/// significant bit.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    m: usize,
    masks: Vec<(u32, u32)>,
}

impl ObservableSet {
    pub fn rebits(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[(u32, u32)] {
        &self.masks
    }

    /// The observable as a `PauliString` (literal tensor, `+` sign).
    pub fn pauli(&self, idx: usize) -> PauliString {
        let (x, z) = self.masks[idx];
        masks_to_pauli(self.m, x, z)
    }

    /// Human-readable label, site 0 first.
    pub fn label(&self, idx: usize) -> String {
        let (x, z) = self.masks[idx];
        (0..self.m)
            .map(|s| {
                let bit = 1u32 << (self.m - 1 - s);
                match (x & bit != 0, z & bit != 0) {
                    (false, false) => 'I',
                    (true, false) => 'X',
                    (false, true) => 'Z',
                    (true, true) => 'Y',
                }
            })
            .collect()
    }
}

fn masks_to_pauli(m: usize, x: u32, z: u32) -> PauliString {
    let mut p = PauliString::identity(m);
    for s in 0..m {
        let bit = 1u32 << (m - 1 - s);
        if x & bit != 0 {
            p.set_x(s, true);
        }
        if z & bit != 0 {
            p.set_z(s, true);
        }
    }
    let y = (p.y_count() % 4) as u8;
    p.set_phase(y);
    p
}

/// Closed-form size of the observable set: `(4^m + 2^m) / 2`.
pub fn observable_count(m: usize) -> usize {
    ((1usize << (2 * m)) + (1usize << m)) / 2
}

/// Enumerates every even-`Y` Pauli string over `m` rebits.
pub fn enumerate_observables(m: usize) -> Result<ObservableSet> {
    if m == 0 || m > 12 {
        return Err(Error::WidthExceeded {
            what: "observable enumeration",
            width: m,
            bound: 12,
        });
    }
    let dim = 1u64 << m;
    let mut masks = Vec::with_capacity(observable_count(m));
    for x in 0..dim {
        for z in 0..dim {
            if ((x & z).count_ones() & 1) == 0 {
                masks.push((x as u32, z as u32));
            }
        }
    }
    debug_assert_eq!(masks.len(), observable_count(m));
    Ok(ObservableSet { m, masks })
}

/// Exact expectation of an even-`Y` observable on a real state:
/// `<phi| p |phi>` with `p` the literal Pauli tensor.
pub fn expectation(m: usize, x: u32, z: u32, phi: &RebitState) -> f64 {
    debug_assert_eq!(phi.rebits(), m);
    let y_count = (x & z).count_ones();
    debug_assert!(y_count.is_multiple_of(2));
    // i^{#Y} for even #Y is (-1)^{#Y/2}.
    let lead = if (y_count / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let amps = phi.amps();
    let dim = 1usize << m;
    let mut acc = 0.0;
    for s in 0..dim {
        let sign = if ((s as u32 & z).count_ones() & 1) == 1 {
            -1.0
        } else {
            1.0
        };
        acc += sign * amps[s ^ x as usize] * amps[s];
    }
    lead * acc
}

/// Result of a tomographic reconstruction.
pub struct Reconstruction {
    /// The reassembled real density matrix.
    pub rho: RMat,
    /// Dominant eigenvector with the sign convention "largest-magnitude
    /// amplitude positive".
    pub state: RebitState,
    /// `|<state|phi>|` against the input state.
    pub overlap: f64,
}

/// Reconstructs a rebit state (up to sign) from exact expectations of the
/// full observable set: `rho = sum_p a_p p` with `a_p = <p> / 2^m`.
pub fn reconstruct(phi: &RebitState) -> Result<Reconstruction> {
    let m = phi.rebits();
    if m > 8 {
        return Err(Error::WidthExceeded {
            what: "tomographic reconstruction",
            width: m,
            bound: 8,
        });
    }
    let dev = (phi.norm() - 1.0).abs();
    if dev > 1e-6 {
        return Err(Error::Unnormalized(dev));
    }
    let observables = enumerate_observables(m)?;
    let dim = 1usize << m;
    let scale = 1.0 / dim as f64;
    let mut rho = RMat::zeros(dim, dim);
    for &(x, z) in observables.masks() {
        let a_p = expectation(m, x, z, phi) * scale;
        if a_p == 0.0 {
            continue;
        }
        let y_count = (x & z).count_ones();
        let lead = if (y_count / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for col in 0..dim {
            let sign = if ((col as u32 & z).count_ones() & 1) == 1 {
                -1.0
            } else {
                1.0
            };
            rho[(col ^ x as usize, col)] += a_p * lead * sign;
        }
    }

    let eig = SymmetricEigen::new(rho.clone());
    let mut best = 0usize;
    for i in 0..dim {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let mut v: nalgebra::DVector<f64> = eig.eigenvectors.column(best).into_owned();
    let mut peak = 0usize;
    for i in 0..dim {
        if v[i].abs() > v[peak].abs() {
            peak = i;
        }
    }
    if v[peak] < 0.0 {
        v = -v;
    }
    let norm = v.norm();
    if norm > 1e-12 {
        v /= norm;
    }
    let overlap = v.dot(phi.amps()).abs();
    Ok(Reconstruction {
        rho,
        state: RebitState::new(m - 1, v)?,
        overlap,
    })
}

/// Pre-rotation circuit over `{H, CZ}` after which computational-basis
/// parity statistics over the observable's support yield its expectation:
/// `Z` factors read out directly, `X` via `H`, `Y` pairs (left-to-right)
/// via `CZ` then `H H`. Odd-`Y` observables are not measurable this way.
pub fn measurement_circuit(p: &PauliString) -> Result<Circuit> {
    let m = p.width();
    if !p.y_count().is_multiple_of(2) {
        return Err(Error::Other(
            "observable with odd Y count is not measurable with single-rebit readout".into(),
        ));
    }
    let mut circ = Circuit::new(m);
    let ys: Vec<usize> = (0..m).filter(|&s| p.x_bit(s) && p.z_bit(s)).collect();
    for pair in ys.chunks(2) {
        let (a, b) = (pair[0] + 1, pair[1] + 1);
        circ.push(Gate::CZ(a, b))?;
        circ.push(Gate::H(a))?;
        circ.push(Gate::H(b))?;
    }
    for s in 0..m {
        if p.x_bit(s) && !p.z_bit(s) {
            circ.push(Gate::H(s + 1))?;
        }
    }
    Ok(circ)
}

/// Expectation via the measurement circuit: applies the pre-rotation and
/// takes the exact parity statistics over the observable's support.
pub fn measured_expectation(p: &PauliString, phi: &RebitState) -> Result<f64> {
    let m = p.width();
    let circ = measurement_circuit(p)?;
    let mut amps = phi.amps().clone();
    for g in &circ.gates {
        crate::circuit::apply_gate_rebit(g, m, &mut amps)?;
    }
    let support: usize = (0..m)
        .filter(|&s| p.x_bit(s) || p.z_bit(s))
        .map(|s| 1usize << (m - 1 - s))
        .sum();
    let dim = 1usize << m;
    let mut acc = 0.0;
    for s in 0..dim {
        let parity = ((s & support).count_ones() & 1) == 1;
        let w = amps[s] * amps[s];
        acc += if parity { -w } else { w };
    }
    Ok(acc)
}

/// Shot-sampled expectation with its standard error, for the realistic
/// measurement mode.
pub fn sampled_expectation(
    p: &PauliString,
    phi: &RebitState,
    shots: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let m = p.width();
    let circ = measurement_circuit(p)?;
    let mut amps = phi.amps().clone();
    for g in &circ.gates {
        crate::circuit::apply_gate_rebit(g, m, &mut amps)?;
    }
    let support: usize = (0..m)
        .filter(|&s| p.x_bit(s) || p.z_bit(s))
        .map(|s| 1usize << (m - 1 - s))
        .sum();
    let dim = 1usize << m;
    let mut cdf = Vec::with_capacity(dim);
    let mut acc = 0.0;
    for s in 0..dim {
        acc += amps[s] * amps[s];
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0f64;
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let idx = cdf.partition_point(|&xcum| xcum < u).min(dim - 1);
        let parity = ((idx & support).count_ones() & 1) == 1;
        sum += if parity { -1.0 } else { 1.0 };
    }
    let est = sum / shots as f64;
    let stderr = ((1.0 - est * est).max(0.0) / shots as f64).sqrt();
    Ok((est, stderr))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{encode_state, QubitState};
    use crate::linalg::{self, c, random_state_vector};

    #[test]
    fn observable_counts_match_formula() {
        assert_eq!(observable_count(1), 3);
        assert_eq!(observable_count(2), 10);
        assert_eq!(observable_count(5), 528);
        for m in 1..=8 {
            let set = enumerate_observables(m).unwrap();
            assert_eq!(set.len(), observable_count(m));
            // Direct sum over even-Y layouts.
            let mut direct = 0usize;
            for k in 0..=(m / 2) {
                direct += 3usize.pow((m - 2 * k) as u32) * binom(m, 2 * k);
            }
            assert_eq!(set.len(), direct);
            if m > 1 {
                assert!(set.len() > 3usize.pow(m as u32));
            }
        }
        // m = 1 set is {I, X, Z}.
        let set = enumerate_observables(1).unwrap();
        let labels: Vec<String> = (0..set.len()).map(|i| set.label(i)).collect();
        assert!(labels.contains(&"I".to_string()));
        assert!(labels.contains(&"X".to_string()));
        assert!(labels.contains(&"Z".to_string()));
    }

    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        let mut acc = 1usize;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }

    #[test]
    fn expectation_matches_dense_pauli() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = 3;
        for _ in 0..20 {
            let x = rng.random_range(0..8u32);
            let mut z = rng.random_range(0..8u32);
            while ((x & z).count_ones() & 1) == 1 {
                z = rng.random_range(0..8u32);
            }
            let v = linalg::random_real_unit_vector(8, &mut rng);
            let phi = RebitState::new(m - 1, v.clone()).unwrap();
            let got = expectation(m, x, z, &phi);
            let p = masks_to_pauli(m, x, z);
            let dense = p.to_dense();
            let vc = v.map(|r| c(r, 0.0));
            let want = vc.dotc(&(&dense * &vc)).re;
            assert!((got - want).abs() < 1e-12, "x={x} z={z}");
        }
    }

    #[test]
    fn reconstruct_basis_state() {
        let phi = RebitState::zero(2);
        let rec = reconstruct(&phi).unwrap();
        assert!(rec.overlap > 1.0 - 1e-9);
        assert!((rec.rho[(0, 0)] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reconstruct_random_states() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let v = linalg::random_real_unit_vector(8, &mut rng);
            let phi = RebitState::new(2, v).unwrap();
            let rec = reconstruct(&phi).unwrap();
            assert!(rec.overlap > 1.0 - 1e-9, "overlap {}", rec.overlap);
        }
    }

    #[test]
    fn global_phase_is_observable() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let psi = QubitState::new(2, random_state_vector(4, &mut rng)).unwrap();
        let theta = 0.3;
        let mut shifted = psi.clone();
        for z in shifted.amps_mut().iter_mut() {
            *z *= num_complex::Complex64::from_polar(1.0, theta);
        }
        let rec_a = reconstruct(&encode_state(&psi)).unwrap();
        let rec_b = reconstruct(&encode_state(&shifted)).unwrap();
        let diff = linalg::fro_diff_r(&rec_a.rho, &rec_b.rho);
        assert!(diff > 0.01, "global phase indistinguishable: {diff}");
    }

    #[test]
    fn measurement_circuit_shapes() {
        let z = PauliString::from_letters("ZI", false).unwrap();
        assert!(measurement_circuit(&z).unwrap().gates.is_empty());

        let x = PauliString::from_letters("XI", false).unwrap();
        assert_eq!(measurement_circuit(&x).unwrap().gates, vec![Gate::H(1)]);

        let yy = PauliString::from_letters("YY", false).unwrap();
        assert_eq!(
            measurement_circuit(&yy).unwrap().gates,
            vec![Gate::CZ(1, 2), Gate::H(1), Gate::H(2)]
        );

        let y = PauliString::from_letters("YI", false).unwrap();
        assert!(measurement_circuit(&y).is_err());
    }

    #[test]
    fn measured_expectation_matches_direct() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = 2 + rng.random_range(0..4); // up to 5 rebits
            let dim = 1usize << m;
            let (x, z) = loop {
                let x = rng.random_range(0..dim as u32);
                let z = rng.random_range(0..dim as u32);
                if ((x & z).count_ones() & 1) == 0 {
                    break (x, z);
                }
            };
            let v = linalg::random_real_unit_vector(dim, &mut rng);
            let phi = RebitState::new(m - 1, v).unwrap();
            let p = masks_to_pauli(m, x, z);
            let via_circuit = measured_expectation(&p, &phi).unwrap();
            let direct = expectation(m, x, z, &phi);
            assert!(
                (via_circuit - direct).abs() < 1e-10,
                "m={m} x={x} z={z}: {via_circuit} vs {direct}"
            );
        }
    }

    #[test]
    fn sampled_expectation_converges() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // |+> on one rebit: <X> = 1.
        let phi = RebitState::new(0, nalgebra::DVector::from_vec(vec![s, s])).unwrap();
        let p = PauliString::from_letters("X", false).unwrap();
        let (est, se) = sampled_expectation(&p, &phi, 2000, 9).unwrap();
        assert!((est - 1.0).abs() < 1e-12);
        assert!(se < 1e-6);
    }
}

//! Extended Gottesman-Knill engine: classical simulation and sampling of
//! R-Clifford circuits over `{H, S, K, CX, CK}` (plus `X`, `Z`, `CZ`) via
//! an orthogonal-Clifford CHP tableau on `n+1` rebits.
//!
//! Every gate in the alphabet translates to real Clifford gates on the
//! rebit side (`S_i -> CZ_{ia} CX_{ia}`, `K -> Z_a`, `CK_i -> CZ_{ia}`, the
//! rest map to themselves), so a standard binary tableau with sign tracking
//! suffices. Rows are Pauli operators `i^phase X^x Z^z` with bits packed
//! into `u64` words; a full CHP tableau (destabilizers plus stabilizers)
//! gives `O(n^2)` measurement without Gaussian elimination.
//!
//! Sampling all output rebits uses the affine-support form of a stabilizer
//! state: after one canonicalization, the computational-basis support is a
//! coset `v0 + span{x-parts}` with uniform probabilities, so each shot is
//! `O(n^2 / 64)` bit work.

use crate::circuit::Circuit;
use crate::gate::{gate_rebit_image, Gate};
use crate::linalg::{c, CMat, CVec, RMat};
use crate::rlinear::RLinearOp;
use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// A Pauli operator `i^phase X^x Z^z` over `m` sites (0-based), bits packed
/// into `u64` words. `phase` is the power of `i` modulo 4; Hermitian
/// operators satisfy `phase = |x & z| (mod 2)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PauliString {
    m: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

fn words_for(m: usize) -> usize {
    m.div_ceil(64).max(1)
}

impl PauliString {
    pub fn identity(m: usize) -> Self {
        let w = words_for(m);
        PauliString {
            m,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single_x(m: usize, site: usize) -> Self {
        let mut p = Self::identity(m);
        p.set_x(site, true);
        p
    }

    pub fn single_z(m: usize, site: usize) -> Self {
        let mut p = Self::identity(m);
        p.set_z(site, true);
        p
    }

    /// Builds from per-site letters `I`, `X`, `Y`, `Z` with a leading sign.
    /// `Y` contributes a factor `i` to the stored phase so the operator is
    /// the literal tensor product.
    pub fn from_letters(letters: &str, negative: bool) -> Result<Self> {
        let m = letters.len();
        let mut p = Self::identity(m);
        for (i, ch) in letters.chars().enumerate() {
            match ch {
                'I' | 'i' => {}
                'X' | 'x' => p.set_x(i, true),
                'Z' | 'z' => p.set_z(i, true),
                'Y' | 'y' => {
                    p.set_x(i, true);
                    p.set_z(i, true);
                    p.phase = (p.phase + 1) % 4;
                }
                _ => {
                    return Err(Error::Other(format!("invalid Pauli letter '{ch}'")));
                }
            }
        }
        if negative {
            p.phase = (p.phase + 2) % 4;
        }
        Ok(p)
    }

    pub fn width(&self) -> usize {
        self.m
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase % 4;
    }

    pub fn x_bit(&self, site: usize) -> bool {
        (self.x[site / 64] >> (site % 64)) & 1 == 1
    }

    pub fn z_bit(&self, site: usize) -> bool {
        (self.z[site / 64] >> (site % 64)) & 1 == 1
    }

    pub fn set_x(&mut self, site: usize, v: bool) {
        let w = site / 64;
        let b = 1u64 << (site % 64);
        if v {
            self.x[w] |= b;
        } else {
            self.x[w] &= !b;
        }
    }

    pub fn set_z(&mut self, site: usize, v: bool) {
        let w = site / 64;
        let b = 1u64 << (site % 64);
        if v {
            self.z[w] |= b;
        } else {
            self.z[w] &= !b;
        }
    }

    pub fn is_identity_pattern(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Number of sites carrying a `Y` (both bits set).
    pub fn y_count(&self) -> usize {
        self.x
            .iter()
            .zip(self.z.iter())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// Hermitian iff the stored `i` power matches the `Y`-count parity.
    pub fn is_hermitian(&self) -> bool {
        (self.phase % 2) as usize == self.y_count() % 2
    }

    /// True iff the two operators commute (symplectic product even).
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= (self.x[i] & other.z[i]).count_ones() & 1;
            parity ^= (self.z[i] & other.x[i]).count_ones() & 1;
        }
        parity == 0
    }

    /// Left-multiplies: `self <- other * self`, with
    /// `i^p X^a Z^b * i^q X^c Z^d = i^(p+q) (-1)^(b.c) X^(a^c) Z^(b^d)`.
    pub fn premultiply(&mut self, other: &PauliString) {
        let mut cross = 0u32;
        for i in 0..self.x.len() {
            cross ^= (other.z[i] & self.x[i]).count_ones() & 1;
        }
        self.phase = (self.phase + other.phase + 2 * cross as u8) % 4;
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
    }

    /// Complex conjugate in the computational basis: `X^x Z^z` is real, so
    /// only the phase flips, `i^p -> i^(-p)`.
    pub fn conjugated(&self) -> PauliString {
        let mut out = self.clone();
        out.phase = (4 - self.phase) % 4;
        out
    }

    // Conjugation by elementary real Clifford gates (0-based sites).

    pub fn conj_h(&mut self, q: usize) {
        let xv = self.x_bit(q);
        let zv = self.z_bit(q);
        if xv && zv {
            self.phase = (self.phase + 2) % 4;
        }
        self.set_x(q, zv);
        self.set_z(q, xv);
    }

    pub fn conj_x(&mut self, q: usize) {
        if self.z_bit(q) {
            self.phase = (self.phase + 2) % 4;
        }
    }

    pub fn conj_z(&mut self, q: usize) {
        if self.x_bit(q) {
            self.phase = (self.phase + 2) % 4;
        }
    }

    /// Conjugation by the complex (non-real) phase gate `S`; used for
    /// building logical stabilizer groups, not in the rebit tableau.
    pub fn conj_s(&mut self, q: usize) {
        if self.x_bit(q) {
            self.phase = (self.phase + 1) % 4;
            self.set_z(q, !self.z_bit(q));
        }
    }

    pub fn conj_cx(&mut self, ctrl: usize, targ: usize) {
        let xc = self.x_bit(ctrl);
        let zt = self.z_bit(targ);
        if xc {
            self.set_x(targ, !self.x_bit(targ));
        }
        if zt {
            self.set_z(ctrl, !self.z_bit(ctrl));
        }
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let xa = self.x_bit(a);
        let xb = self.x_bit(b);
        if xa && xb {
            self.phase = (self.phase + 2) % 4;
        }
        if xa {
            self.set_z(b, !self.z_bit(b));
        }
        if xb {
            self.set_z(a, !self.z_bit(a));
        }
    }

    /// Dense complex matrix `i^phase X^x Z^z` (for oracles; `m <= 12`).
    pub fn to_dense(&self) -> CMat {
        let dim = 1usize << self.m;
        let mut mat = CMat::zeros(dim, dim);
        let phase = match self.phase {
            0 => c(1.0, 0.0),
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
        let mut xmask = 0usize;
        let mut zmask = 0usize;
        for s in 0..self.m {
            if self.x_bit(s) {
                xmask |= 1 << (self.m - 1 - s);
            }
            if self.z_bit(s) {
                zmask |= 1 << (self.m - 1 - s);
            }
        }
        for col in 0..dim {
            let sign = if ((col & zmask).count_ones() & 1) == 1 {
                -phase
            } else {
                phase
            };
            mat[(col ^ xmask, col)] = sign;
        }
        mat
    }

    /// Letter rendering, site 0 first, with the sign prefix (Hermitian
    /// operators only have `+`/`-`).
    pub fn letters(&self) -> String {
        let mut s = String::new();
        let eff_phase = (self.phase + 3 * (self.y_count() as u8 % 4)) % 4;
        s.push_str(match eff_phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        });
        for q in 0..self.m {
            s.push(match (self.x_bit(q), self.z_bit(q)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            });
        }
        s
    }
}

/// CHP tableau over `m = n+1` rebits: `m` destabilizer rows, `m`
/// stabilizer rows, sign bits, and a scratch row for deterministic
/// measurement.
#[derive(Debug, Clone)]
pub struct StabilizerTableau {
    n: usize,
    m: usize,
    rows: Vec<PauliString>, // 0..m destabilizers, m..2m stabilizers
    seed: u64,
}

impl StabilizerTableau {
    /// Tableau of `|0>^(n+1)`, the encoding of `|0>^n`: stabilizers
    /// `Z_1 .. Z_(n+1)`, destabilizers `X_1 .. X_(n+1)`, all signs `+`.
    pub fn init_zero(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Other("tableau needs at least one qubit".into()));
        }
        let m = n + 1;
        let mut rows = Vec::with_capacity(2 * m);
        for s in 0..m {
            rows.push(PauliString::single_x(m, s));
        }
        for s in 0..m {
            rows.push(PauliString::single_z(m, s));
        }
        Ok(StabilizerTableau {
            n,
            m,
            rows,
            seed: 0,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Logical qubit count.
    pub fn qubits(&self) -> usize {
        self.n
    }

    /// Rebit count `n + 1`.
    pub fn rebits(&self) -> usize {
        self.m
    }

    pub fn stabilizer_rows(&self) -> &[PauliString] {
        &self.rows[self.m..]
    }

    pub fn destabilizer_rows(&self) -> &[PauliString] {
        &self.rows[..self.m]
    }

    fn conj_all(&mut self, f: impl Fn(&mut PauliString)) {
        for row in &mut self.rows {
            f(row);
        }
    }

    /// Applies one elementary real gate on the rebit side (1-based wires).
    fn apply_rebit_gate(&mut self, g: &Gate) -> Result<()> {
        match g {
            Gate::H(w) => {
                let q = w - 1;
                self.conj_all(|r| r.conj_h(q));
            }
            Gate::X(w) => {
                let q = w - 1;
                self.conj_all(|r| r.conj_x(q));
            }
            Gate::Z(w) => {
                let q = w - 1;
                self.conj_all(|r| r.conj_z(q));
            }
            Gate::CX(cw, tw) => {
                let (cq, tq) = (cw - 1, tw - 1);
                self.conj_all(|r| r.conj_cx(cq, tq));
            }
            Gate::CZ(aw, bw) => {
                let (aq, bq) = (aw - 1, bw - 1);
                self.conj_all(|r| r.conj_cz(aq, bq));
            }
            other => {
                return Err(Error::UnsupportedGate {
                    kind: format!("{other:?}"),
                    context: "rebit tableau update",
                })
            }
        }
        Ok(())
    }

    /// Applies a logical R-Clifford gate from `{H, S, K, CX, CK, X, Z, CZ}`
    /// by conjugating every row with its rebit image.
    pub fn apply_rclifford(&mut self, g: &Gate) -> Result<()> {
        match g {
            Gate::H(_)
            | Gate::S(_)
            | Gate::K
            | Gate::CX(_, _)
            | Gate::CK(_)
            | Gate::X(_)
            | Gate::Z(_)
            | Gate::CZ(_, _) => {}
            other => {
                return Err(Error::UnsupportedGate {
                    kind: format!("{other:?}"),
                    context: "R-Clifford tableau engine",
                })
            }
        }
        g.validate(self.n)?;
        for img in gate_rebit_image(g, self.n)? {
            self.apply_rebit_gate(&img)?;
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.n != self.n {
            return Err(Error::DimensionMismatch(format!(
                "circuit width {} vs tableau width {}",
                circuit.n, self.n
            )));
        }
        for g in &circuit.gates {
            self.apply_rclifford(g)?;
        }
        Ok(())
    }

    /// CHP measurement of one rebit site (0-based) in the computational
    /// basis, updating the tableau. Deterministic outcomes read through the
    /// destabilizers; random outcomes flip a fair coin.
    pub fn measure_site<R: Rng>(&mut self, site: usize, rng: &mut R) -> bool {
        let m = self.m;
        let pivot = (m..2 * m).find(|&r| self.rows[r].x_bit(site));
        match pivot {
            Some(p) => {
                // Random outcome.
                let pivot_row = self.rows[p].clone();
                for r in 0..2 * m {
                    if r != p && self.rows[r].x_bit(site) {
                        self.rows[r].premultiply(&pivot_row);
                    }
                }
                self.rows[p - m] = pivot_row;
                let outcome = rng.random::<bool>();
                let mut new_row = PauliString::single_z(m, site);
                if outcome {
                    new_row.set_phase(2);
                }
                self.rows[p] = new_row;
                outcome
            }
            None => {
                // Deterministic outcome: product of the stabilizers paired
                // with destabilizers that anticommute with Z_site.
                let mut scratch = PauliString::identity(m);
                for r in 0..m {
                    if self.rows[r].x_bit(site) {
                        let stab = self.rows[r + m].clone();
                        scratch.premultiply(&stab);
                    }
                }
                debug_assert!(scratch.phase.is_multiple_of(2));
                scratch.phase == 2
            }
        }
    }

    /// Measures rebits `1..n` in order on a working copy (the ancilla is
    /// never measured) and returns the outcome as a basis label with qubit
    /// 1 most significant.
    pub fn measure_logical_chp<R: Rng>(&self, rng: &mut R) -> usize {
        let mut work = self.clone();
        let mut outcome = 0usize;
        for site in 0..self.n {
            let bit = work.measure_site(site, rng);
            outcome = (outcome << 1) | bit as usize;
        }
        outcome
    }

    /// Canonical affine-support form of the stabilizer state: the support
    /// of the state over `2^m` basis labels is `v0 + span(basis)` with all
    /// amplitudes equal in magnitude.
    fn affine_support(&self) -> Result<AffineSupport> {
        let m = self.m;
        let mut rows: Vec<PauliString> = self.rows[m..].to_vec();

        // Gaussian elimination on the x-bits.
        let mut rank = 0usize;
        for site in 0..m {
            if let Some(r) = (rank..m).find(|&r| rows[r].x_bit(site)) {
                rows.swap(rank, r);
                let pivot = rows[rank].clone();
                for (rr, row) in rows.iter_mut().enumerate() {
                    if rr != rank && row.x_bit(site) {
                        row.premultiply(&pivot);
                    }
                }
                rank += 1;
            }
        }

        // Pure-Z rows constrain the offset: z . v = phase/2 (mod 2).
        let mut zrows: Vec<(Vec<u64>, bool)> = Vec::new();
        for row in rows.iter().skip(rank) {
            debug_assert!(row.x.iter().all(|&w| w == 0));
            if row.phase % 2 != 0 {
                return Err(Error::InvalidStabilizerGroup(
                    "non-Hermitian stabilizer row".into(),
                ));
            }
            zrows.push((row.z.clone(), row.phase == 2));
        }
        let words = words_for(m);

        // Reduced row echelon form over GF(2): afterwards each pivot site
        // appears in exactly one row, so the offset reads off directly.
        let mut pivots: Vec<usize> = Vec::new();
        let mut used = 0usize;
        for site in 0..m {
            let (w, b) = (site / 64, site % 64);
            if let Some(r) = (used..zrows.len()).find(|&r| (zrows[r].0[w] >> b) & 1 == 1) {
                zrows.swap(used, r);
                let (pz, pb) = zrows[used].clone();
                for (i, (z, bb)) in zrows.iter_mut().enumerate() {
                    if i != used && (z[w] >> b) & 1 == 1 {
                        for (a, c) in z.iter_mut().zip(pz.iter()) {
                            *a ^= c;
                        }
                        *bb ^= pb;
                    }
                }
                pivots.push(site);
                used += 1;
            }
        }
        for (z, b) in zrows.iter().skip(used) {
            debug_assert!(z.iter().all(|&w| w == 0));
            if *b {
                return Err(Error::InvalidStabilizerGroup(
                    "inconsistent sign constraints".into(),
                ));
            }
        }
        let mut v0 = vec![0u64; words];
        for (i, &site) in pivots.iter().enumerate() {
            if zrows[i].1 {
                v0[site / 64] ^= 1u64 << (site % 64);
            }
        }

        let basis: Vec<Vec<u64>> = rows[..rank].iter().map(|r| r.x.clone()).collect();
        Ok(AffineSupport {
            m,
            words,
            v0,
            basis,
        })
    }

    /// Samples `shots` outcomes of measuring rebits `1..n` (the ancilla is
    /// discarded). Seeded by the tableau seed; reproducible across calls.
    pub fn sample(&self, shots: usize) -> Result<Vec<usize>> {
        let support = self.affine_support()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(shots);
        for _ in 0..shots {
            let v = support.sample(&mut rng);
            out.push(self.project_label(&v));
        }
        Ok(out)
    }

    fn project_label(&self, v: &[u64]) -> usize {
        let mut label = 0usize;
        for site in 0..self.n {
            let bit = (v[site / 64] >> (site % 64)) & 1;
            label = (label << 1) | bit as usize;
        }
        label
    }

    /// Exact distribution over logical outcomes. Every probability is a
    /// dyadic `2^-k`; the map sums to exactly 1. Width-capped at `n <= 16`.
    pub fn strong_probabilities(&self) -> Result<BTreeMap<usize, f64>> {
        if self.n > 16 {
            return Err(Error::WidthExceeded {
                what: "strong simulation enumeration",
                width: self.n,
                bound: 16,
            });
        }
        let support = self.affine_support()?;
        let k = support.basis.len();
        let p = (0.5f64).powi(k as i32);
        let mut map = BTreeMap::new();
        let mut v = support.v0.clone();
        // Gray-code walk over the 2^k support points.
        *map.entry(self.project_label(&v)).or_insert(0.0) += p;
        let mut counter = vec![false; k];
        let total = 1usize << k;
        for step in 1..total {
            let flip = step.trailing_zeros() as usize;
            counter[flip] = !counter[flip];
            for (vi, bi) in v.iter_mut().zip(support.basis[flip].iter()) {
                *vi ^= bi;
            }
            *map.entry(self.project_label(&v)).or_insert(0.0) += p;
        }
        Ok(map)
    }

    /// Dense state-vector oracle for desk-scale checks (`m <= 12`): applies
    /// the stabilizer projector to deterministic probe vectors.
    pub fn to_dense_state(&self) -> Result<CVec> {
        dense_state_from_group(&self.rows[self.m..])
    }

    /// Group invariants: rows Hermitian, independent, stabilizers pairwise
    /// commuting, destabilizer `i` anticommuting with stabilizer `i` only.
    pub fn check_invariants(&self) -> Result<()> {
        let m = self.m;
        for row in &self.rows {
            if !row.is_hermitian() {
                return Err(Error::InvalidStabilizerGroup("non-Hermitian row".into()));
            }
        }
        for i in 0..m {
            for j in 0..m {
                if i != j && !self.rows[m + i].commutes_with(&self.rows[m + j]) {
                    return Err(Error::InvalidStabilizerGroup(
                        "stabilizer rows do not commute".into(),
                    ));
                }
                let expect = i != j;
                if self.rows[i].commutes_with(&self.rows[m + j]) != expect {
                    return Err(Error::InvalidStabilizerGroup(
                        "destabilizer pairing broken".into(),
                    ));
                }
            }
        }
        if gf2_rank(&self.rows[m..]) != m {
            return Err(Error::InvalidStabilizerGroup(
                "stabilizer rows dependent".into(),
            ));
        }
        Ok(())
    }
}

struct AffineSupport {
    m: usize,
    words: usize,
    v0: Vec<u64>,
    basis: Vec<Vec<u64>>,
}

impl AffineSupport {
    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        let mut v = self.v0.clone();
        for b in &self.basis {
            if rng.random::<bool>() {
                for i in 0..self.words {
                    v[i] ^= b[i];
                }
            }
        }
        debug_assert!(self.m > 0);
        v
    }
}

fn gf2_rank(rows: &[PauliString]) -> usize {
    let mut vecs: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            let mut v = r.x.clone();
            v.extend_from_slice(&r.z);
            v
        })
        .collect();
    let width = vecs.first().map(|v| v.len() * 64).unwrap_or(0);
    let mut rank = 0;
    for bit in 0..width {
        let (w, b) = (bit / 64, bit % 64);
        if let Some(p) = (rank..vecs.len()).find(|&r| (vecs[r][w] >> b) & 1 == 1) {
            vecs.swap(rank, p);
            let pivot = vecs[rank].clone();
            for (i, v) in vecs.iter_mut().enumerate() {
                if i != rank && (v[w] >> b) & 1 == 1 {
                    for (a, c) in v.iter_mut().zip(pivot.iter()) {
                        *a ^= c;
                    }
                }
            }
            rank += 1;
        }
    }
    rank
}

/// Dense state stabilized by the given generator set (any width <= 12):
/// applies the projector product to probe vectors until one survives.
pub fn dense_state_from_group(gens: &[PauliString]) -> Result<CVec> {
    let m = gens
        .first()
        .map(|g| g.width())
        .ok_or_else(|| Error::InvalidStabilizerGroup("empty generator set".into()))?;
    if m > 12 {
        return Err(Error::WidthExceeded {
            what: "dense stabilizer oracle",
            width: m,
            bound: 12,
        });
    }
    let dim = 1usize << m;
    let mut proj = CMat::identity(dim, dim);
    for g in gens {
        if g.width() != m {
            return Err(Error::InvalidStabilizerGroup("mixed widths".into()));
        }
        let dense = g.to_dense();
        proj = (&proj + &dense * &proj).map(|z| z * c(0.5, 0.0));
    }
    for probe in 0..dim {
        let mut e = CVec::zeros(dim);
        e[probe] = c(1.0, 0.0);
        let v = &proj * e;
        let norm = v.norm();
        if norm > 1e-6 {
            return Ok(v / c(norm, 0.0));
        }
    }
    Err(Error::InvalidStabilizerGroup(
        "projector annihilated every probe".into(),
    ))
}

/// Complex conjugation of a stabilizer state in generator form: flips the
/// sign of every generator containing an odd number of `Y` factors.
pub fn conjugate_stabilizer_state(gens: &[PauliString]) -> Result<Vec<PauliString>> {
    if gens.is_empty() {
        return Err(Error::InvalidStabilizerGroup("empty generator set".into()));
    }
    let m = gens[0].width();
    for g in gens {
        if g.width() != m {
            return Err(Error::InvalidStabilizerGroup("mixed widths".into()));
        }
        if !g.is_hermitian() {
            return Err(Error::InvalidStabilizerGroup(
                "non-Hermitian generator".into(),
            ));
        }
    }
    for i in 0..gens.len() {
        for j in (i + 1)..gens.len() {
            if !gens[i].commutes_with(&gens[j]) {
                return Err(Error::InvalidStabilizerGroup(
                    "generators do not commute".into(),
                ));
            }
        }
    }
    if gf2_rank(gens) != gens.len() {
        return Err(Error::InvalidStabilizerGroup("generators dependent".into()));
    }
    Ok(gens.iter().map(|g| g.conjugated()).collect())
}

/// Uniform-ish random R-Clifford circuit over `{H, S, K, CX, CK, X, Z, CZ}`.
pub fn random_rclifford_circuit<R: Rng>(n: usize, len: usize, rng: &mut R) -> Circuit {
    let mut circ = Circuit::new(n);
    for _ in 0..len {
        let g = match rng.random_range(0..8) {
            0 => Gate::H(rng.random_range(1..=n)),
            1 => Gate::S(rng.random_range(1..=n)),
            2 => Gate::K,
            3 if n >= 2 => {
                let a = rng.random_range(1..=n);
                let mut b = rng.random_range(1..=n);
                while b == a {
                    b = rng.random_range(1..=n);
                }
                Gate::CX(a, b)
            }
            4 => Gate::CK(rng.random_range(1..=n)),
            5 => Gate::X(rng.random_range(1..=n)),
            6 => Gate::Z(rng.random_range(1..=n)),
            7 if n >= 2 => {
                let a = rng.random_range(1..=n);
                let mut b = rng.random_range(1..=n);
                while b == a {
                    b = rng.random_range(1..=n);
                }
                Gate::CZ(a, b)
            }
            _ => Gate::H(rng.random_range(1..=n)),
        };
        circ.push(g).expect("generated gate is valid");
    }
    circ
}

// ---------------------------------------------------------------------
// Compilation of an R-Clifford operator back into an orthogonal Clifford
// circuit on n+1 rebits.
// ---------------------------------------------------------------------

/// Pattern-matches a dense real matrix against `s X^x Z^z` with
/// `s = +-1`. Returns the Pauli in tableau form (phase 0 or 2).
pub fn match_real_pauli(mat: &RMat, tol: f64) -> Option<PauliString> {
    let dim = mat.nrows();
    if dim != mat.ncols() || !dim.is_power_of_two() {
        return None;
    }
    let m = dim.trailing_zeros() as usize;
    // x from the nonzero row of column 0.
    let mut xmask = None;
    for r in 0..dim {
        if mat[(r, 0)].abs() > 0.5 {
            xmask = Some(r);
            break;
        }
    }
    let xmask = xmask?;
    let s0 = mat[(xmask, 0)];
    if (s0.abs() - 1.0).abs() > tol {
        return None;
    }
    // z bits from single-bit columns.
    let mut zmask = 0usize;
    for b in 0..m {
        let col = 1usize << b;
        let v = mat[(col ^ xmask, col)];
        if (v.abs() - 1.0).abs() > tol {
            return None;
        }
        if v * s0 < 0.0 {
            zmask |= 1 << b;
        }
    }
    // Verify every entry.
    for col in 0..dim {
        let sign = if ((col & zmask).count_ones() & 1) == 1 {
            -s0
        } else {
            s0
        };
        for r in 0..dim {
            let expect = if r == col ^ xmask { sign } else { 0.0 };
            if (mat[(r, col)] - expect).abs() > tol {
                return None;
            }
        }
    }
    let mut p = PauliString::identity(m);
    for s in 0..m {
        // Site 0 is the most significant index bit here (wire order).
        let bit = 1usize << (m - 1 - s);
        if xmask & bit != 0 {
            p.set_x(s, true);
        }
        if zmask & bit != 0 {
            p.set_z(s, true);
        }
    }
    if s0 < 0.0 {
        p.set_phase(2);
    }
    Some(p)
}

/// Conjugation tableau of an orthogonal Clifford matrix: images of
/// `X_s` and `Z_s` for every site.
fn extract_tableau(w: &RMat, m: usize, tol: f64) -> Result<(Vec<PauliString>, Vec<PauliString>)> {
    let dim = 1usize << m;
    debug_assert_eq!(w.nrows(), dim);
    let mut xs = Vec::with_capacity(m);
    let mut zs = Vec::with_capacity(m);
    let wt = w.transpose();
    for s in 0..m {
        let x = PauliString::single_x(m, s).to_dense().map(|z| z.re);
        let img = w * &x * &wt;
        xs.push(match_real_pauli(&img, tol).ok_or(Error::NotRClifford)?);
        let z = PauliString::single_z(m, s).to_dense().map(|zz| zz.re);
        let img = w * &z * &wt;
        zs.push(match_real_pauli(&img, tol).ok_or(Error::NotRClifford)?);
    }
    Ok((xs, zs))
}

fn conj_pair_by_gate(rows: &mut [PauliString], g: &Gate) {
    match g {
        Gate::H(w) => rows.iter_mut().for_each(|r| r.conj_h(w - 1)),
        Gate::X(w) => rows.iter_mut().for_each(|r| r.conj_x(w - 1)),
        Gate::Z(w) => rows.iter_mut().for_each(|r| r.conj_z(w - 1)),
        Gate::CX(cw, tw) => rows.iter_mut().for_each(|r| r.conj_cx(cw - 1, tw - 1)),
        Gate::CZ(aw, bw) => rows.iter_mut().for_each(|r| r.conj_cz(aw - 1, bw - 1)),
        _ => unreachable!(),
    }
}

/// Compiles an R-Clifford operator into an `(n+1)`-rebit orthogonal
/// Clifford circuit over `{H, Z, CX, CZ}` realizing its encoding exactly
/// (a trailing `(HZ)^4 = -I` corrects the global sign when the dense check
/// detects it). `O(n^2)` gates.
pub fn compile_rclifford(op: &RLinearOp, tol: f64) -> Result<Circuit> {
    let n = op.qubits();
    if n > 8 {
        return Err(Error::WidthExceeded {
            what: "R-Clifford compilation",
            width: n,
            bound: 8,
        });
    }
    if !op.is_r_unitary(tol.max(1e-9)) {
        return Err(Error::NotRUnitary(op.r_unitarity_residual()));
    }
    if n <= 6 && !crate::hierarchy::is_r_clifford(op, tol.max(1e-9))? {
        return Err(Error::NotRClifford);
    }
    let m = n + 1;
    let w = crate::codec::encode_operator(op);
    let wmat = w.matrix().clone();
    let (mut xs, mut zs) = extract_tableau(&wmat, m, 1e-6)?;

    // Stage-by-stage reduction: bring the images of X_k, Z_k to exactly
    // X_k, Z_k using gates on sites >= k, recording moves. The final
    // circuit is the concatenation of the per-stage moves, innermost stage
    // first, each stage reversed.
    let mut stages: Vec<Vec<Gate>> = Vec::with_capacity(m);
    for k in 0..m {
        let mut moves: Vec<Gate> = Vec::new();
        let mut do_move = |mv: Gate, xs: &mut Vec<PauliString>, zs: &mut Vec<PauliString>| {
            conj_pair_by_gate(xs, &mv);
            conj_pair_by_gate(zs, &mv);
            moves.push(mv);
        };

        // -- normalize g = image of X_k to +X_k --
        // Pair away Y sites.
        loop {
            let ys: Vec<usize> = (k..m)
                .filter(|&s| xs[k].x_bit(s) && xs[k].z_bit(s))
                .collect();
            if ys.is_empty() {
                break;
            }
            debug_assert!(ys.len() >= 2, "Hermitian image has even Y count");
            do_move(Gate::CX(ys[0] + 1, ys[1] + 1), &mut xs, &mut zs);
        }
        // Z sites to X.
        for s in k..m {
            if xs[k].z_bit(s) && !xs[k].x_bit(s) {
                do_move(Gate::H(s + 1), &mut xs, &mut zs);
            }
        }
        // Fan the X support into one site.
        let supp: Vec<usize> = (k..m).filter(|&s| xs[k].x_bit(s)).collect();
        debug_assert!(!supp.is_empty(), "image of X_k cannot be identity");
        let t0 = supp[0];
        for &s in &supp[1..] {
            do_move(Gate::CX(t0 + 1, s + 1), &mut xs, &mut zs);
        }
        if t0 != k {
            do_move(Gate::CX(k + 1, t0 + 1), &mut xs, &mut zs);
            do_move(Gate::CX(t0 + 1, k + 1), &mut xs, &mut zs);
            do_move(Gate::CX(k + 1, t0 + 1), &mut xs, &mut zs);
        }
        if xs[k].phase == 2 {
            do_move(Gate::Z(k + 1), &mut xs, &mut zs);
        }
        debug_assert_eq!(xs[k], PauliString::single_x(m, k));

        // -- normalize h = image of Z_k to +Z_k, keeping X_k fixed --
        if zs[k].x_bit(k) {
            // Local Y at k: cancel against another Y with a CX into k.
            let other = (k + 1..m).find(|&s| zs[k].x_bit(s) && zs[k].z_bit(s));
            let other = other.expect("even Y count guarantees a partner");
            do_move(Gate::CX(other + 1, k + 1), &mut xs, &mut zs);
        }
        debug_assert!(zs[k].z_bit(k) && !zs[k].x_bit(k));
        // Clear Y pairs strictly above k.
        loop {
            let ys: Vec<usize> = (k + 1..m)
                .filter(|&s| zs[k].x_bit(s) && zs[k].z_bit(s))
                .collect();
            if ys.is_empty() {
                break;
            }
            debug_assert!(ys.len() >= 2);
            do_move(Gate::CX(ys[0] + 1, ys[1] + 1), &mut xs, &mut zs);
        }
        // X sites above k to Z.
        for s in k + 1..m {
            if zs[k].x_bit(s) && !zs[k].z_bit(s) {
                do_move(Gate::H(s + 1), &mut xs, &mut zs);
            }
        }
        // Strip the Z tail with CX into k.
        for s in k + 1..m {
            if zs[k].z_bit(s) {
                do_move(Gate::CX(s + 1, k + 1), &mut xs, &mut zs);
            }
        }
        if zs[k].phase == 2 {
            // X_k flips the sign of Z_k and fixes X_k; emitted as H Z H to
            // stay in the {H, Z, CX, CZ} gate set.
            do_move(Gate::H(k + 1), &mut xs, &mut zs);
            do_move(Gate::Z(k + 1), &mut xs, &mut zs);
            do_move(Gate::H(k + 1), &mut xs, &mut zs);
        }
        debug_assert_eq!(zs[k], PauliString::single_z(m, k));
        stages.push(moves);
    }

    let mut gates: Vec<Gate> = Vec::new();
    for stage in stages.iter().rev() {
        gates.extend(stage.iter().rev().cloned());
    }

    // Resolve the global sign with a dense product check.
    let dim = 1usize << m;
    let mut prod = RMat::identity(dim, dim);
    for g in &gates {
        let dense = crate::linalg::re_mat(crate::gate::gate_to_rlinear(g, m)?.linear_part());
        prod = dense * prod;
    }
    let plus = crate::linalg::max_abs_diff_r(&prod, &wmat);
    let minus = crate::linalg::max_abs_diff_r(&(-&prod), &wmat);
    if plus.min(minus) > 1e-6 {
        return Err(Error::NotRClifford);
    }
    if minus < plus {
        for _ in 0..4 {
            gates.push(Gate::Z(1));
            gates.push(Gate::H(1));
        }
    }
    Circuit::with_gates(m, gates)
}

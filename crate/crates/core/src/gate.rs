//! The gate alphabet: R-linear realizations of every named gate, the
//! rebit-side images of each gate, and numeric certification of the gate
//! translation tables and gate-set identities.
//!
//! Gate kinds split into three classes:
//! - unitary kinds (`X`, `Y`, `Z`, `H`, `S`, `T`, `CX`, `CZ`, `CS`, `CH`,
//!   `CCZ`, `CCX`, `ChZ`, `Yrot`, `Zrot`, `CYrot`, `R`, `LZ`), a real-entry
//!   subset of which is flagged orthogonal,
//! - conjugation kinds (`K`, `CK`, `CCK`, `ChK`, `KL`),
//! - the global phase `G(theta)`.
//!
//! Qubit indices are 1-based with qubit 1 the most significant index bit.
//! The rebit image of a gate on `n` qubits lives on `n+1` rebits with the
//! ancilla at index `n+1`; image lists are in application order (first gate
//! applied first), so the ordered matrix product of an image equals the
//! encoding of the gate.

use crate::linalg::{c, CMat, C_ONE, C_ZERO};
use crate::rlinear::{make_kl, Language, RLinearOp};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

/// A gate over the tagged alphabet. Angles are radians.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    T(usize),
    CX(usize, usize),
    CZ(usize, usize),
    CS(usize, usize),
    CH(usize, usize),
    CCZ(usize, usize, usize),
    CCX(usize, usize, usize),
    /// Rotation about Y by `theta`: `cos(theta/2) I - i sin(theta/2) Y`.
    Yrot(usize, f64),
    /// Rotation about Z by `theta`: `diag(exp(-i theta/2), exp(i theta/2))`.
    Zrot(usize, f64),
    /// Controlled `Yrot(theta)` (control, target, theta).
    CYrot(usize, usize, f64),
    /// Global phase `exp(i theta) I`.
    G(f64),
    /// Planar rotation `R(theta)` on one rebit; equals `Yrot(2 theta)`.
    R(usize, f64),
    /// Full complex conjugation.
    K,
    /// Conjugation controlled on one qubit being 1.
    CK(usize),
    /// Conjugation controlled on two qubits being 1.
    CCK(usize, usize),
    /// Conjugation controlled on all listed qubits being 1.
    ChK(Vec<usize>),
    /// Multiply-controlled Z; acts symmetrically on its support.
    ChZ(Vec<usize>),
    /// Partial conjugation over an arbitrary language.
    KL(Language),
    /// Language-controlled Z: `|x, t> -> (-1)^(t * L(x)) |x, t>` where `x`
    /// is read off all wires except `target` in wire order. This is the
    /// rebit image of `KL`.
    LZ(Language, usize),
}

impl Gate {
    /// Qubits the gate acts on, given the register width `n`. `K` and `KL`
    /// touch the whole register; `G` touches nothing.
    pub fn supports(&self, n: usize) -> Vec<usize> {
        match self {
            Gate::X(q) | Gate::Y(q) | Gate::Z(q) | Gate::H(q) | Gate::S(q) | Gate::T(q) => {
                vec![*q]
            }
            Gate::Yrot(q, _) | Gate::Zrot(q, _) | Gate::R(q, _) => vec![*q],
            Gate::CX(a, b) | Gate::CZ(a, b) | Gate::CS(a, b) | Gate::CH(a, b) => vec![*a, *b],
            Gate::CYrot(a, b, _) => vec![*a, *b],
            Gate::CCZ(a, b, c) | Gate::CCX(a, b, c) => vec![*a, *b, *c],
            Gate::G(_) => vec![],
            Gate::K | Gate::KL(_) => (1..=n).collect(),
            Gate::CK(q) => vec![*q],
            Gate::CCK(a, b) => vec![*a, *b],
            Gate::ChK(qs) => qs.clone(),
            Gate::ChZ(qs) => qs.clone(),
            Gate::LZ(_, _) => (1..=n).collect(),
        }
    }

    /// Conjugation-type gates: `K`, `CK`, `CCK`, `ChK`, `KL`.
    pub fn is_conjugation(&self) -> bool {
        matches!(
            self,
            Gate::K | Gate::CK(_) | Gate::CCK(_, _) | Gate::ChK(_) | Gate::KL(_)
        )
    }

    /// The global phase gate.
    pub fn is_phase(&self) -> bool {
        matches!(self, Gate::G(_))
    }

    /// Gates whose full matrix has real entries (hence orthogonal when
    /// unitary). These map to themselves under the encoding.
    pub fn is_real_kind(&self) -> bool {
        matches!(
            self,
            Gate::X(_)
                | Gate::Z(_)
                | Gate::H(_)
                | Gate::CX(_, _)
                | Gate::CZ(_, _)
                | Gate::CH(_, _)
                | Gate::CCZ(_, _, _)
                | Gate::CCX(_, _, _)
                | Gate::ChZ(_)
                | Gate::Yrot(_, _)
                | Gate::CYrot(_, _, _)
                | Gate::R(_, _)
                | Gate::LZ(_, _)
        )
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let supports = self.supports(n);
        for &q in &supports {
            if q == 0 || q > n {
                return Err(Error::QubitOutOfRange { index: q, n });
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for &q in &supports {
            if !seen.insert(q) {
                return Err(Error::DuplicateSupport(q));
            }
        }
        if let Gate::KL(lang) = self {
            if lang.qubits() != n {
                return Err(Error::DimensionMismatch(format!(
                    "KL language over {} qubits in a width-{n} register",
                    lang.qubits()
                )));
            }
        }
        if let Gate::LZ(lang, target) = self {
            if *target == 0 || *target > n {
                return Err(Error::QubitOutOfRange { index: *target, n });
            }
            if lang.qubits() != n - 1 {
                return Err(Error::DimensionMismatch(format!(
                    "LZ language over {} wires in a width-{n} register",
                    lang.qubits()
                )));
            }
        }
        Ok(())
    }
}

fn mat2(entries: [Complex64; 4]) -> CMat {
    CMat::from_row_slice(2, 2, &entries)
}

fn x_mat() -> CMat {
    mat2([C_ZERO, C_ONE, C_ONE, C_ZERO])
}

fn y_mat() -> CMat {
    mat2([C_ZERO, c(0.0, -1.0), c(0.0, 1.0), C_ZERO])
}

fn z_mat() -> CMat {
    mat2([C_ONE, C_ZERO, C_ZERO, c(-1.0, 0.0)])
}

fn h_mat() -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    mat2([c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

fn s_mat() -> CMat {
    mat2([C_ONE, C_ZERO, C_ZERO, c(0.0, 1.0)])
}

fn t_mat() -> CMat {
    mat2([C_ONE, C_ZERO, C_ZERO, Complex64::from_polar(1.0, FRAC_PI_4)])
}

fn yrot_mat(theta: f64) -> CMat {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2([c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

fn zrot_mat(theta: f64) -> CMat {
    mat2([
        Complex64::from_polar(1.0, -theta / 2.0),
        C_ZERO,
        C_ZERO,
        Complex64::from_polar(1.0, theta / 2.0),
    ])
}

fn controlled(u: &CMat) -> CMat {
    let k = u.nrows();
    let mut m = CMat::identity(2 * k, 2 * k);
    for i in 0..k {
        for j in 0..k {
            m[(k + i, k + j)] = u[(i, j)];
        }
    }
    m
}

/// Embeds a local unitary acting on the listed supports (in order, first
/// support = most significant local bit) into the full `2^n` matrix.
pub fn embed_unitary(n: usize, supports: &[usize], local: &CMat) -> CMat {
    let dim = 1usize << n;
    let k = supports.len();
    let ldim = 1usize << k;
    assert_eq!(local.nrows(), ldim);
    let positions: Vec<usize> = supports.iter().map(|&q| n - q).collect();
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let mut lin = 0usize;
        for (bit, &pos) in positions.iter().enumerate() {
            if (col >> pos) & 1 == 1 {
                lin |= 1 << (k - 1 - bit);
            }
        }
        let base = {
            let mut b = col;
            for &pos in &positions {
                b &= !(1usize << pos);
            }
            b
        };
        for lout in 0..ldim {
            let v = local[(lout, lin)];
            if v == C_ZERO {
                continue;
            }
            let mut row = base;
            for (bit, &pos) in positions.iter().enumerate() {
                if (lout >> (k - 1 - bit)) & 1 == 1 {
                    row |= 1 << pos;
                }
            }
            out[(row, col)] += v;
        }
    }
    out
}

/// The full `2^n`-dimensional R-linear operator of a gate, identity on
/// non-support qubits.
pub fn gate_to_rlinear(g: &Gate, n: usize) -> Result<RLinearOp> {
    g.validate(n)?;
    let dim = 1usize << n;
    match g {
        Gate::K => Ok(RLinearOp::conjugation(n)),
        Gate::CK(q) => Ok(make_kl(&Language::conjunction(n, &[*q]))),
        Gate::CCK(a, b) => Ok(make_kl(&Language::conjunction(n, &[*a, *b]))),
        Gate::ChK(qs) => Ok(make_kl(&Language::conjunction(n, qs))),
        Gate::KL(lang) => Ok(make_kl(lang)),
        Gate::G(theta) => {
            let phase = Complex64::from_polar(1.0, *theta);
            RLinearOp::from_linear(n, CMat::identity(dim, dim).map(|z| z * phase))
        }
        Gate::ChZ(qs) => {
            let mut m = CMat::identity(dim, dim);
            for x in 0..dim {
                if qs.iter().all(|&q| (x >> (n - q)) & 1 == 1) {
                    m[(x, x)] = -m[(x, x)];
                }
            }
            RLinearOp::from_linear(n, m)
        }
        Gate::LZ(lang, target) => {
            let mut m = CMat::identity(dim, dim);
            let tpos = n - target;
            for idx in 0..dim {
                if (idx >> tpos) & 1 == 1 {
                    // Label from all wires except target, wire order.
                    let mut x = 0usize;
                    for wire in 1..=n {
                        if wire == *target {
                            continue;
                        }
                        x = (x << 1) | ((idx >> (n - wire)) & 1);
                    }
                    if lang.contains(x) {
                        m[(idx, idx)] = -m[(idx, idx)];
                    }
                }
            }
            RLinearOp::from_linear(n, m)
        }
        _ => {
            let (supports, local) = local_unitary(g);
            RLinearOp::from_linear(n, embed_unitary(n, &supports, &local))
        }
    }
}

fn local_unitary(g: &Gate) -> (Vec<usize>, CMat) {
    match g {
        Gate::X(q) => (vec![*q], x_mat()),
        Gate::Y(q) => (vec![*q], y_mat()),
        Gate::Z(q) => (vec![*q], z_mat()),
        Gate::H(q) => (vec![*q], h_mat()),
        Gate::S(q) => (vec![*q], s_mat()),
        Gate::T(q) => (vec![*q], t_mat()),
        Gate::Yrot(q, th) => (vec![*q], yrot_mat(*th)),
        Gate::Zrot(q, th) => (vec![*q], zrot_mat(*th)),
        Gate::R(q, th) => (vec![*q], yrot_mat(2.0 * th)),
        Gate::CX(a, b) => (vec![*a, *b], controlled(&x_mat())),
        Gate::CZ(a, b) => (vec![*a, *b], controlled(&z_mat())),
        Gate::CS(a, b) => (vec![*a, *b], controlled(&s_mat())),
        Gate::CH(a, b) => (vec![*a, *b], controlled(&h_mat())),
        Gate::CYrot(a, b, th) => (vec![*a, *b], controlled(&yrot_mat(*th))),
        Gate::CCX(a, b, c) => (vec![*a, *b, *c], controlled(&controlled(&x_mat()))),
        Gate::CCZ(a, b, c) => (vec![*a, *b, *c], controlled(&controlled(&z_mat()))),
        _ => unreachable!("local_unitary called on a non-unitary kind"),
    }
}

/// The rebit image of a gate: a sequence of real-kind gates on `n+1` rebits
/// (application order) whose product equals the encoding of the gate.
pub fn gate_rebit_image(g: &Gate, n: usize) -> Result<Vec<Gate>> {
    g.validate(n)?;
    let a = n + 1;
    Ok(match g {
        // Real gates are fixed by the encoding.
        Gate::X(_)
        | Gate::Z(_)
        | Gate::H(_)
        | Gate::CX(_, _)
        | Gate::CZ(_, _)
        | Gate::CH(_, _)
        | Gate::CCZ(_, _, _)
        | Gate::CCX(_, _, _)
        | Gate::ChZ(_)
        | Gate::Yrot(_, _)
        | Gate::CYrot(_, _, _)
        | Gate::R(_, _) => vec![g.clone()],
        Gate::LZ(lang, target) => {
            // Real and fixed by the encoding, but the label now also runs
            // over the appended ancilla wire (as its least significant
            // bit); membership ignores it.
            let ext = Language::from_fn(n, |x| lang.contains(x >> 1));
            vec![Gate::LZ(ext, *target)]
        }
        Gate::Y(q) => vec![Gate::X(*q), Gate::X(a), Gate::Z(*q), Gate::Z(a)],
        Gate::S(q) => vec![Gate::CZ(*q, a), Gate::CX(*q, a)],
        Gate::T(q) => vec![Gate::CZ(*q, a), Gate::CH(*q, a)],
        Gate::CS(p, q) => vec![Gate::CCZ(*p, *q, a), Gate::CCX(*p, *q, a)],
        Gate::Zrot(q, th) => vec![Gate::CYrot(*q, a, 2.0 * th), Gate::R(a, -th / 2.0)],
        Gate::G(th) => vec![Gate::R(a, *th)],
        Gate::K => vec![Gate::Z(a)],
        Gate::CK(q) => vec![Gate::CZ(*q, a)],
        Gate::CCK(p, q) => vec![Gate::CCZ(*p, *q, a)],
        Gate::ChK(qs) => {
            let mut supports = qs.clone();
            supports.push(a);
            vec![Gate::ChZ(supports)]
        }
        Gate::KL(lang) => vec![Gate::LZ(lang.clone(), a)],
    })
}

/// Fuses adjacent `[CZ, CX]` and `[CZ, CH]` pairs on identical supports
/// into single controlled rotations (`C(XZ) = CYrot(pi)`,
/// `C(HZ) = CYrot(pi/2)`). Applying this to an expanded circuit restores
/// the depth accounting of the encoded-gate tables, where the image of `S`
/// or `T` is one two-rebit gate.
pub fn fuse_ancilla_rotations(gates: &[Gate]) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    let mut i = 0;
    while i < gates.len() {
        if i + 1 < gates.len() {
            if let (Gate::CZ(a1, b1), Gate::CX(a2, b2)) = (&gates[i], &gates[i + 1]) {
                if a1 == a2 && b1 == b2 {
                    out.push(Gate::CYrot(*a1, *b1, std::f64::consts::PI));
                    i += 2;
                    continue;
                }
            }
            if let (Gate::CZ(a1, b1), Gate::CH(a2, b2)) = (&gates[i], &gates[i + 1]) {
                if a1 == a2 && b1 == b2 {
                    out.push(Gate::CYrot(*a1, *b1, FRAC_PI_2));
                    i += 2;
                    continue;
                }
            }
            if let (Gate::R(q1, t1), Gate::R(q2, t2)) = (&gates[i], &gates[i + 1]) {
                if q1 == q2 {
                    out.push(Gate::R(*q1, t1 + t2));
                    i += 2;
                    continue;
                }
            }
        }
        out.push(gates[i].clone());
        i += 1;
    }
    out
}

/// Projects one wire of an operator onto a basis value:
/// `<bit|_wire Gamma |bit>_wire`, an operator on `n-1` qubits.
pub fn project_wire(op: &RLinearOp, wire: usize, bit: usize) -> Result<RLinearOp> {
    let n = op.qubits();
    if wire == 0 || wire > n {
        return Err(Error::QubitOutOfRange { index: wire, n });
    }
    let pos = n - wire;
    let dim_out = 1usize << (n - 1);
    let expand = |y: usize| -> usize {
        let high = y >> pos;
        let low = y & ((1 << pos) - 1);
        (high << (pos + 1)) | (bit << pos) | low
    };
    let mut a = CMat::zeros(dim_out, dim_out);
    let mut b = CMat::zeros(dim_out, dim_out);
    for r in 0..dim_out {
        for ccol in 0..dim_out {
            a[(r, ccol)] = op.linear_part()[(expand(r), expand(ccol))];
            b[(r, ccol)] = op.antilinear_part()[(expand(r), expand(ccol))];
        }
    }
    RLinearOp::new(n - 1, a, b)
}

/// One entry of the identity-verification report.
#[derive(Debug, Clone)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
}

/// Report of numeric verification of the encoded-gate tables and the exact
/// gate-set identities.
#[derive(Debug, Clone)]
pub struct GateIdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl GateIdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn all_within(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.residual < tol)
    }
}

fn image_product_residual(g: &Gate, n: usize) -> f64 {
    let image = gate_rebit_image(g, n).unwrap();
    let m = n + 1;
    let dim = 1usize << m;
    let mut prod = crate::linalg::RMat::identity(dim, dim);
    for gate in &image {
        let op = gate_to_rlinear(gate, m).unwrap();
        let real = crate::linalg::re_mat(op.linear_part());
        debug_assert!(crate::linalg::im_mat(op.linear_part()).amax() < 1e-12);
        prod = real * prod;
    }
    let encoded = crate::codec::encode_operator(&gate_to_rlinear(g, n).unwrap());
    crate::linalg::max_abs_diff_r(&prod, encoded.matrix())
}

/// Numerically verifies the encoded-gate tables (every gate kind) and the
/// exact gate-set identities, returning per-identity residuals.
pub fn verify_gate_identities() -> GateIdentityReport {
    let mut checks = Vec::new();
    let theta = 0.918273645;

    // Encoded-gate table: image product equals encoding, per kind.
    let table: Vec<(String, Gate, usize)> = vec![
        ("table X".into(), Gate::X(1), 2),
        ("table Y".into(), Gate::Y(1), 2),
        ("table Z".into(), Gate::Z(2), 2),
        ("table H".into(), Gate::H(1), 2),
        ("table S".into(), Gate::S(1), 2),
        ("table T".into(), Gate::T(2), 2),
        ("table CX".into(), Gate::CX(1, 2), 2),
        ("table CZ".into(), Gate::CZ(1, 2), 2),
        ("table CS".into(), Gate::CS(1, 2), 2),
        ("table CH".into(), Gate::CH(1, 2), 2),
        ("table CCZ".into(), Gate::CCZ(1, 2, 3), 3),
        ("table CCX".into(), Gate::CCX(1, 2, 3), 3),
        ("table Yrot".into(), Gate::Yrot(1, theta), 2),
        ("table Zrot".into(), Gate::Zrot(1, theta), 2),
        ("table G".into(), Gate::G(theta), 2),
        ("table K".into(), Gate::K, 2),
        ("table CK".into(), Gate::CK(1), 2),
        ("table CCK".into(), Gate::CCK(1, 2), 3),
        ("table ChK".into(), Gate::ChK(vec![1, 2, 3]), 3),
        (
            "table KL".into(),
            Gate::KL(Language::from_indices(2, &[0, 3])),
            2,
        ),
    ];
    for (name, gate, n) in table {
        checks.push(IdentityCheck {
            name,
            residual: image_product_residual(&gate, n),
        });
    }

    // G(theta) -> R(theta) on the ancilla, directly.
    {
        let g = gate_to_rlinear(&Gate::G(theta), 1).unwrap();
        let encoded = crate::codec::encode_operator(&g);
        let r = gate_to_rlinear(&Gate::R(2, theta), 2).unwrap();
        let residual = crate::linalg::max_abs_diff_r(
            encoded.matrix(),
            &crate::linalg::re_mat(r.linear_part()),
        );
        checks.push(IdentityCheck {
            name: "global phase to ancilla rotation".into(),
            residual,
        });
    }

    // Gate-set identity: CCX = H_t CCZ H_t.
    {
        let n = 3;
        let lhs = gate_to_rlinear(&Gate::CCX(1, 2, 3), n).unwrap();
        let h = gate_to_rlinear(&Gate::H(3), n).unwrap();
        let ccz = gate_to_rlinear(&Gate::CCZ(1, 2, 3), n).unwrap();
        let rhs = h.star(&ccz).unwrap().star(&h).unwrap();
        checks.push(IdentityCheck {
            name: "CCX from H and CCZ".into(),
            residual: lhs.distance(&rhs),
        });
    }

    // Gate-set identity: K = <1| CK |1> and CK = <1| CCK |1>.
    {
        let ck2 = gate_to_rlinear(&Gate::CK(2), 2).unwrap();
        let k1 = project_wire(&ck2, 2, 1).unwrap();
        let r1 = k1.distance(&RLinearOp::conjugation(1));

        let cck = gate_to_rlinear(&Gate::CCK(1, 3), 3).unwrap();
        let ck = project_wire(&cck, 3, 1).unwrap();
        let r2 = ck.distance(&gate_to_rlinear(&Gate::CK(1), 2).unwrap());
        checks.push(IdentityCheck {
            name: "K and CK from control fixing".into(),
            residual: r1.max(r2),
        });
    }

    // Gate-set identity: CS = G(pi/4) K CCK G(pi/4) K CCK.
    {
        let n = 2;
        let cs = gate_to_rlinear(&Gate::CS(1, 2), n).unwrap();
        let gphase = gate_to_rlinear(&Gate::G(FRAC_PI_4), n).unwrap();
        let k = RLinearOp::conjugation(n);
        let cck = gate_to_rlinear(&Gate::CCK(1, 2), n).unwrap();
        let rhs = gphase
            .star(&k)
            .unwrap()
            .star(&cck)
            .unwrap()
            .star(&gphase)
            .unwrap()
            .star(&k)
            .unwrap()
            .star(&cck)
            .unwrap();
        checks.push(IdentityCheck {
            name: "CS from G(pi/4), K, CCK".into(),
            residual: cs.distance(&rhs),
        });
    }

    // Gate-set identity: the same relation read off the encoded side,
    // CS = L(H_a CCZ_{ija} H_a CCZ_{ija}).
    {
        let n = 2;
        let m = n + 1;
        let ha = gate_to_rlinear(&Gate::H(3), m).unwrap();
        let ccz = gate_to_rlinear(&Gate::CCZ(1, 2, 3), m).unwrap();
        let prod = ha
            .star(&ccz)
            .unwrap()
            .star(&ha)
            .unwrap()
            .star(&ccz)
            .unwrap();
        let w =
            crate::codec::RealOperator::new(crate::linalg::re_mat(prod.linear_part()), m).unwrap();
        let decoded = crate::codec::decode_operator(&w).unwrap();
        let cs = gate_to_rlinear(&Gate::CS(1, 2), n).unwrap();
        checks.push(IdentityCheck {
            name: "CS decoded from ancilla Hadamard route".into(),
            residual: decoded.distance(&cs),
        });
    }

    // Gate-set identity: CCK_{ij} = <0|_w CCX_{ijw} CK_w CCX_{ijw} |0>_w.
    {
        let n = 3;
        let ccx = gate_to_rlinear(&Gate::CCX(1, 2, 3), n).unwrap();
        let ckw = gate_to_rlinear(&Gate::CK(3), n).unwrap();
        let prod = ccx.star(&ckw).unwrap().star(&ccx).unwrap();
        let projected = project_wire(&prod, 3, 0).unwrap();
        let cck = gate_to_rlinear(&Gate::CCK(1, 2), 2).unwrap();
        checks.push(IdentityCheck {
            name: "CCK from Toffoli conjugated CK".into(),
            residual: projected.distance(&cck),
        });
    }

    // Gate-set identity: a K_L circuit from a language decider: 3-bit parity
    // via a CX chain onto a work wire, one CK, then the chain undone.
    {
        let n = 3;
        let total = n + 1;
        let decider = [Gate::CX(1, 4), Gate::CX(2, 4), Gate::CX(3, 4)];
        let mut prod = RLinearOp::identity(total);
        for g in decider.iter() {
            prod = gate_to_rlinear(g, total).unwrap().star(&prod).unwrap();
        }
        let ck = gate_to_rlinear(&Gate::CK(4), total).unwrap();
        let whole = prod.dagger().star(&ck).unwrap().star(&prod).unwrap();
        let projected = project_wire(&whole, 4, 0).unwrap();
        let parity = Language::from_fn(n, |x| (x.count_ones() % 2) == 1);
        checks.push(IdentityCheck {
            name: "K_L from parity decider and one CK".into(),
            residual: projected.distance(&make_kl(&parity)),
        });
    }

    GateIdentityReport { checks }
}

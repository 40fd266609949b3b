//! Two-qubit gate catalog and the local invariants `(G1, G2)`.
//!
//! `m(U) = (Q†UQ)ᵀ(Q†UQ)` with `Q` the magic-basis change below, and
//!
//! ```text
//! G1 = tr²[m(U)] / (16 det U)
//! G2 = (tr²[m(U)] − tr[m(U)²]) / (4 det U)
//! ```
//!
//! Two gates are treated as locally equivalent when their invariant pairs
//! agree; no explicit local factors are reconstructed.

use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Complex, SquareMatrix, I, ONE, ZERO};

/// Unitarity tolerance for gate construction.
pub const GATE_UNITARY_TOL: f64 = 1e-10;

/// Tolerance on `|a| = 1` for phase parameters.
pub const PHASE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    name: String,
    params: Vec<Complex>,
    matrix: SquareMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantPair {
    pub g1: Complex,
    pub g2: Complex,
}

impl InvariantPair {
    /// Larger of the two component distances.
    pub fn distance(&self, other: &InvariantPair) -> f64 {
        (self.g1 - other.g1).norm().max((self.g2 - other.g2).norm())
    }

    /// Invariants of every local gate (those of the identity).
    pub fn local() -> Self {
        InvariantPair {
            g1: ONE,
            g2: Complex::new(3.0, 0.0),
        }
    }
}

impl Gate {
    /// Wraps a 4×4 matrix, rejecting it if it is not unitary within `tol`.
    pub fn from_matrix(name: impl Into<String>, matrix: SquareMatrix, tol: f64) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::DimensionMismatch {
                left: 4,
                right: matrix.dim(),
            });
        }
        let deviation = matrix.unitarity_deviation();
        if deviation > tol {
            return Err(Error::NotUnitary { deviation, tol });
        }
        Ok(Gate {
            name: name.into(),
            params: Vec::new(),
            matrix,
        })
    }

    fn catalog(name: &str, params: Vec<Complex>, matrix: SquareMatrix) -> Result<Self> {
        let mut gate = Gate::from_matrix(name, matrix, GATE_UNITARY_TOL)?;
        gate.params = params;
        Ok(gate)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[Complex] {
        &self.params
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    pub fn invariants(&self) -> Result<InvariantPair> {
        invariants(&self.matrix)
    }

    pub fn m_matrix(&self) -> Result<SquareMatrix> {
        m_matrix(&self.matrix)
    }

    /// `left · self · right`, keeping the name.
    pub fn sandwich(&self, left: &SquareMatrix, right: &SquareMatrix) -> Result<Gate> {
        let m = left.matmul(&self.matrix)?.matmul(right)?;
        Gate::from_matrix(self.name.clone(), m, GATE_UNITARY_TOL)
    }
}

pub fn hadamard() -> SquareMatrix {
    SquareMatrix::from_real(2, &[1.0, 1.0, 1.0, -1.0], FRAC_1_SQRT_2)
}

pub fn pauli_x() -> SquareMatrix {
    SquareMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0], 1.0)
}

pub fn pauli_y() -> SquareMatrix {
    SquareMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => ZERO,
    })
}

pub fn pauli_z() -> SquareMatrix {
    SquareMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0], 1.0)
}

/// `e^{iα} R_z(β) R_y(θ) R_z(γ)`; covers all of U(2).
pub fn single_qubit_unitary(alpha: f64, theta: f64, beta: f64, gamma: f64) -> SquareMatrix {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let phase = |x: f64| Complex::from_polar(1.0, x);
    let g = phase(alpha);
    SquareMatrix::new(
        2,
        vec![
            g * phase(-0.5 * (beta + gamma)) * c,
            -g * phase(-0.5 * (beta - gamma)) * s,
            g * phase(0.5 * (beta - gamma)) * s,
            g * phase(0.5 * (beta + gamma)) * c,
        ],
    )
    .expect("finite entries")
}

/// Haar-random single-qubit unitary.
pub fn random_single_qubit<R: Rng + ?Sized>(rng: &mut R) -> SquareMatrix {
    use std::f64::consts::TAU;
    // cos(θ/2)² uniform gives the Haar measure on SU(2)
    let theta = 2.0 * rng.gen::<f64>().sqrt().acos();
    single_qubit_unitary(rng.gen::<f64>() * TAU, theta, rng.gen::<f64>() * TAU, rng.gen::<f64>() * TAU)
}

/// Haar-random unitary: Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SquareMatrix {
    let mut gauss = || {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        let r = (-2.0 * u1.ln()).sqrt();
        Complex::from_polar(r, std::f64::consts::TAU * u2)
    };
    let mut cols: Vec<Vec<Complex>> = (0..dim).map(|_| (0..dim).map(|_| gauss()).collect()).collect();
    for j in 0..dim {
        let (done, rest) = cols.split_at_mut(j);
        let col = &mut rest[0];
        for prev in done.iter() {
            let proj: Complex = prev.iter().zip(col.iter()).map(|(p, c)| p.conj() * c).sum();
            for (c, p) in col.iter_mut().zip(prev) {
                *c -= proj * p;
            }
        }
        let n = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        col.iter_mut().for_each(|z| *z /= n);
    }
    SquareMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// `k ⊗ l` for single-qubit `k` (on qubit 0) and `l` (on qubit 1).
pub fn local_gate(k: &SquareMatrix, l: &SquareMatrix) -> SquareMatrix {
    k.kron(l)
}

pub fn random_local<R: Rng + ?Sized>(rng: &mut R) -> SquareMatrix {
    let k = random_single_qubit(rng);
    let l = random_single_qubit(rng);
    local_gate(&k, &l)
}

pub fn swap_matrix() -> SquareMatrix {
    rprime_matrix(ONE, ONE, ONE, ONE)
}

fn rprime_matrix(a: Complex, b: Complex, c: Complex, d: Complex) -> SquareMatrix {
    SquareMatrix::new(
        4,
        vec![
            a, ZERO, ZERO, ZERO, //
            ZERO, ZERO, b, ZERO, //
            ZERO, c, ZERO, ZERO, //
            ZERO, ZERO, ZERO, d,
        ],
    )
    .expect("finite entries")
}

/// Square root of SWAP with `(1 ∓ i)/2` blocks; `sign = -1` gives the root
/// with `(1 − i)/2` on the diagonal.
fn sqrt_swap_matrix(sign: f64) -> SquareMatrix {
    let diag = Complex::new(0.5, 0.5 * sign);
    let off = diag.conj();
    SquareMatrix::new(
        4,
        vec![
            ONE, ZERO, ZERO, ZERO, //
            ZERO, diag, off, ZERO, //
            ZERO, off, diag, ZERO, //
            ZERO, ZERO, ZERO, ONE,
        ],
    )
    .expect("finite entries")
}

/// `exp(−iπ/4 σ_y⊗σ_y − iφ σ_z⊗σ_z)`.
fn u_phi_matrix(phi: f64) -> SquareMatrix {
    let m = Complex::from_polar(FRAC_1_SQRT_2, -phi);
    let p = Complex::from_polar(FRAC_1_SQRT_2, phi);
    SquareMatrix::new(
        4,
        vec![
            m, ZERO, ZERO, I * m, //
            ZERO, p, -I * p, ZERO, //
            ZERO, -I * p, p, ZERO, //
            I * m, ZERO, ZERO, m,
        ],
    )
    .expect("finite entries")
}

/// Controlled-`v`: acts as `v` on qubit 1 when qubit 0 is `|1⟩`.
pub fn controlled(v: &SquareMatrix) -> Result<Gate> {
    if v.dim() != 2 {
        return Err(Error::DimensionMismatch {
            left: 2,
            right: v.dim(),
        });
    }
    let m = SquareMatrix::from_fn(4, |i, j| match (i < 2, j < 2) {
        (true, true) => if i == j { ONE } else { ZERO },
        (false, false) => v.get(i - 2, j - 2),
        _ => ZERO,
    });
    Gate::catalog("controlled", v.entries().to_vec(), m)
}

pub const GATE_CATALOG: &[(&str, &str)] = &[
    ("identity", "4×4 identity"),
    ("cnot", "CNOT|i,j⟩ = |i, i⊕j⟩"),
    ("swap", "SWAP|i,j⟩ = |j,i⟩"),
    ("sqrt_swap", "square root of SWAP with invariants (i/4, 0)"),
    ("sqrt_swap_dag", "the other square root of SWAP, (1+i)/2 on the diagonal"),
    ("r", "braid operator (1/√2)[[1,0,0,1],[0,1,-1,0],[0,1,1,0],[-1,0,0,1]]"),
    ("rprime", "braid family diag-antidiag with unit phases; params a,b,c,d"),
    ("rprime0", "rprime(1,1,-1,1)"),
    ("u_phi", "exp(-iπ/4 σy⊗σy - iφ σz⊗σz); param φ"),
    ("controlled", "controlled-V; params are the 4 entries of V row-major"),
];

fn known_gates() -> String {
    GATE_CATALOG.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}

fn check_phase(name: &str, z: Complex) -> Result<()> {
    if !((z.norm() - 1.0).abs() <= PHASE_TOL) {
        return Err(Error::InvalidParams(format!(
            "phase {name} = {z} must have unit modulus"
        )));
    }
    Ok(())
}

fn real_param(z: Complex, what: &str) -> Result<f64> {
    if z.im != 0.0 {
        return Err(Error::InvalidParams(format!("{what} must be real, got {z}")));
    }
    Ok(z.re)
}

/// Looks up a catalog gate. Parameters are complex; real-valued parameters
/// (the angle of `u_phi`) must have zero imaginary part.
pub fn catalog_gate(name: &str, params: &[Complex]) -> Result<Gate> {
    let lower = name.to_ascii_lowercase();
    let expect = |n: usize| -> Result<()> {
        if params.len() != n {
            return Err(Error::InvalidParams(format!(
                "gate `{lower}` takes {n} parameter(s), got {}",
                params.len()
            )));
        }
        Ok(())
    };
    let h = FRAC_1_SQRT_2;
    match lower.as_str() {
        "identity" | "id" => {
            expect(0)?;
            Gate::catalog("identity", vec![], SquareMatrix::identity(4))
        }
        "cnot" | "cx" => {
            expect(0)?;
            let m = SquareMatrix::from_real(
                4,
                &[
                    1., 0., 0., 0., //
                    0., 1., 0., 0., //
                    0., 0., 0., 1., //
                    0., 0., 1., 0.,
                ],
                1.0,
            );
            Gate::catalog("cnot", vec![], m)
        }
        "swap" => {
            expect(0)?;
            Gate::catalog("swap", vec![], swap_matrix())
        }
        "sqrt_swap" | "sqrtswap" => {
            expect(0)?;
            Gate::catalog("sqrt_swap", vec![], sqrt_swap_matrix(-1.0))
        }
        "sqrt_swap_dag" => {
            expect(0)?;
            Gate::catalog("sqrt_swap_dag", vec![], sqrt_swap_matrix(1.0))
        }
        "r" => {
            expect(0)?;
            let m = SquareMatrix::from_real(
                4,
                &[
                    1., 0., 0., 1., //
                    0., 1., -1., 0., //
                    0., 1., 1., 0., //
                    -1., 0., 0., 1.,
                ],
                h,
            );
            Gate::catalog("r", vec![], m)
        }
        "rprime" => {
            expect(4)?;
            for (label, &z) in ["a", "b", "c", "d"].iter().zip(params) {
                check_phase(label, z)?;
            }
            let m = rprime_matrix(params[0], params[1], params[2], params[3]);
            Gate::catalog("rprime", params.to_vec(), m)
        }
        "rprime0" => {
            expect(0)?;
            Gate::catalog("rprime0", vec![], rprime_matrix(ONE, ONE, -ONE, ONE))
        }
        "u_phi" | "uphi" => {
            expect(1)?;
            let phi = real_param(params[0], "φ")?;
            if !phi.is_finite() {
                return Err(Error::InvalidParams("φ must be finite".into()));
            }
            Gate::catalog("u_phi", params.to_vec(), u_phi_matrix(phi))
        }
        "controlled" | "cu" => {
            expect(4)?;
            let v = SquareMatrix::new(2, params.to_vec())?;
            let deviation = v.unitarity_deviation();
            if deviation > GATE_UNITARY_TOL {
                return Err(Error::NotUnitary {
                    deviation,
                    tol: GATE_UNITARY_TOL,
                });
            }
            controlled(&v)
        }
        _ => Err(Error::UnknownName {
            kind: "gate",
            name: name.to_string(),
            known: known_gates(),
        }),
    }
}

/// Magic-basis change matrix.
pub fn q_matrix() -> SquareMatrix {
    let h = Complex::new(FRAC_1_SQRT_2, 0.0);
    let hi = I * FRAC_1_SQRT_2;
    SquareMatrix::new(
        4,
        vec![
            h, ZERO, ZERO, hi, //
            ZERO, hi, h, ZERO, //
            ZERO, hi, -h, ZERO, //
            h, ZERO, ZERO, -hi,
        ],
    )
    .expect("finite entries")
}

/// `m(U) = (Q†UQ)ᵀ(Q†UQ)`.
pub fn m_matrix(u: &SquareMatrix) -> Result<SquareMatrix> {
    let q = q_matrix();
    let magic = q.dagger().matmul(u)?.matmul(&q)?;
    magic.transpose().matmul(&magic)
}

pub fn invariants(u: &SquareMatrix) -> Result<InvariantPair> {
    let m = m_matrix(u)?;
    let det = u.determinant()?;
    let tr = m.trace();
    let tr_sq = m.matmul(&m)?.trace();
    Ok(InvariantPair {
        g1: tr * tr / (16.0 * det),
        g2: (tr * tr - tr_sq) / (4.0 * det),
    })
}

/// `Δ = ad / bc` for the `rprime` family.
pub fn rprime_delta(a: Complex, b: Complex, c: Complex, d: Complex) -> Complex {
    a * d / (b * c)
}

/// `G1 = −(1 + Δ)²/(4Δ)`, `G2 = 2·G1 − 1`.
pub fn invariants_rprime_closed_form(
    a: Complex,
    b: Complex,
    c: Complex,
    d: Complex,
) -> Result<InvariantPair> {
    for (label, z) in [("a", a), ("b", b), ("c", c), ("d", d)] {
        check_phase(label, z)?;
    }
    let delta = rprime_delta(a, b, c, d);
    let g1 = -(ONE + delta) * (ONE + delta) / (4.0 * delta);
    Ok(InvariantPair { g1, g2: 2.0 * g1 - ONE })
}

/// `(0, cos 4φ)`.
pub fn invariants_u_phi(phi: f64) -> InvariantPair {
    InvariantPair {
        g1: ZERO,
        g2: Complex::new((4.0 * phi).cos(), 0.0),
    }
}

pub fn locally_equivalent(u: &Gate, v: &Gate, tol: f64) -> Result<bool> {
    let (gu, gv) = (u.invariants()?, v.invariants()?);
    Ok((gu.g1 - gv.g1).norm() <= tol && (gu.g2 - gv.g2).norm() <= tol)
}

/// `|G2 − 1 − 2·G1|` for the controlled-`v` gate.
pub fn controlled_relation_residual(v: &SquareMatrix) -> Result<f64> {
    let g = controlled(v)?.invariants()?;
    Ok((g.g2 - ONE - 2.0 * g.g1).norm())
}

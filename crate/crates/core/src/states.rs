//! Pure qubit states, two-qubit entanglement measures and single-qubit
//! projective measurement.
//!
//! Qubit 0 is the leftmost tensor factor, so a three-qubit amplitude index is
//! `4·q0 + 2·q1 + q2`.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

use crate::error::{Error, Result};
use crate::linalg::{Complex, SquareMatrix, I, ONE, ZERO};

/// Tolerance for accepting (and then renormalizing) input amplitudes.
pub const NORM_INPUT_TOL: f64 = 1e-6;

/// Probability below which a measurement outcome is treated as impossible.
pub const IMPOSSIBLE_PROB: f64 = 1e-12;

const MAX_QUBITS: usize = 20;
const GATE_UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    qubits: usize,
    amplitudes: Vec<Complex>,
}

/// Reduced state of one qubit of a two-qubit pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix2 {
    matrix: SquareMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Where a gate acts when applied to a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Single(usize),
    Pair(usize, usize),
    /// Operator on the whole register.
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub outcome: usize,
    pub probability: f64,
    /// Normalized post-measurement state of the other qubits, `None` when the
    /// outcome has probability below [`IMPOSSIBLE_PROB`].
    pub residual: Option<PureState>,
}

impl MeasurementRecord {
    pub fn is_possible(&self) -> bool {
        self.residual.is_some()
    }
}

/// A measurement basis: two orthonormal single-qubit vectors.
pub type QubitBasis = [[Complex; 2]; 2];

pub fn computational_basis() -> QubitBasis {
    [[ONE, ZERO], [ZERO, ONE]]
}

/// The `|x±⟩` basis.
pub fn hadamard_basis() -> QubitBasis {
    let h = Complex::new(FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// Eigenbasis of σ_y, `(|0⟩ ± i|1⟩)/√2`.
pub fn y_basis() -> QubitBasis {
    let h = Complex::new(FRAC_1_SQRT_2, 0.0);
    [[h, h * I], [h, -h * I]]
}

pub fn make_state(qubits: usize, amplitudes: Vec<Complex>) -> Result<PureState> {
    PureState::new(qubits, amplitudes)
}

impl PureState {
    /// Validates and renormalizes amplitudes whose norm is within
    /// [`NORM_INPUT_TOL`] of one.
    pub fn new(qubits: usize, amplitudes: Vec<Complex>) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS {
            return Err(Error::InvalidState(format!(
                "qubit count must be in 1..={MAX_QUBITS}, got {qubits}"
            )));
        }
        let expected = 1usize << qubits;
        if amplitudes.len() != expected {
            return Err(Error::InvalidLength {
                expected,
                actual: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm = norm(&amplitudes);
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        if (norm - 1.0).abs() > NORM_INPUT_TOL {
            return Err(Error::InvalidState(format!(
                "norm {norm} is not within {NORM_INPUT_TOL:e} of 1"
            )));
        }
        Ok(Self::normalized(qubits, amplitudes))
    }

    /// Normalizes any nonzero vector of the right length.
    fn normalized(qubits: usize, mut amplitudes: Vec<Complex>) -> Self {
        let n = norm(&amplitudes);
        for z in amplitudes.iter_mut() {
            *z /= n;
        }
        PureState { qubits, amplitudes }
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS || index >= 1 << qubits {
            return Err(Error::InvalidState(format!(
                "basis state {index} does not exist on {qubits} qubits"
            )));
        }
        let mut amps = vec![ZERO; 1 << qubits];
        amps[index] = ONE;
        Ok(PureState {
            qubits,
            amplitudes: amps,
        })
    }

    /// Single-qubit state `(cos(θ/2) e^{−iφ/2}, sin(θ/2) e^{iφ/2})`.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        let half = 0.5 * theta;
        PureState {
            qubits: 1,
            amplitudes: vec![
                Complex::from_polar(half.cos(), -0.5 * phi),
                Complex::from_polar(half.sin(), 0.5 * phi),
            ],
        }
    }

    /// Single-qubit state from two (not necessarily normalized) amplitudes.
    pub fn qubit(zero: Complex, one: Complex) -> Result<Self> {
        let n = (zero.norm_sqr() + one.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidState("zero or non-finite qubit vector".into()));
        }
        Ok(Self::normalized(1, vec![zero, one]))
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        PureState {
            qubits: self.qubits + other.qubits,
            amplitudes: amps,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex> {
        if self.qubits != other.qubits {
            return Err(Error::DimensionMismatch {
                left: self.qubits,
                right: other.qubits,
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.qubits {
            return Err(Error::QubitIndex {
                index: q,
                qubits: self.qubits,
            });
        }
        Ok(())
    }

    fn mask(&self, q: usize) -> usize {
        1 << (self.qubits - 1 - q)
    }

    pub fn apply_gate(&self, gate: &SquareMatrix, target: Target) -> Result<PureState> {
        let expected_dim = match target {
            Target::Single(_) => 2,
            Target::Pair(..) => 4,
            Target::All => self.amplitudes.len(),
        };
        if gate.dim() != expected_dim {
            return Err(Error::DimensionMismatch {
                left: expected_dim,
                right: gate.dim(),
            });
        }
        let deviation = gate.unitarity_deviation();
        if deviation > GATE_UNITARY_TOL {
            return Err(Error::NotUnitary {
                deviation,
                tol: GATE_UNITARY_TOL,
            });
        }
        let amps = match target {
            Target::All => gate.apply(&self.amplitudes)?,
            Target::Single(q) => {
                self.check_qubit(q)?;
                self.apply_local(gate, &[self.mask(q)])
            }
            Target::Pair(q1, q2) => {
                self.check_qubit(q1)?;
                self.check_qubit(q2)?;
                if q1 == q2 {
                    return Err(Error::InvalidParams(format!(
                        "gate targets must be distinct, got ({q1}, {q2})"
                    )));
                }
                self.apply_local(gate, &[self.mask(q1), self.mask(q2)])
            }
        };
        // unitary gates preserve the norm; only correct accumulated drift
        if (norm(&amps) - 1.0).abs() > 1e-14 {
            return Ok(Self::normalized(self.qubits, amps));
        }
        Ok(PureState {
            qubits: self.qubits,
            amplitudes: amps,
        })
    }

    /// Applies a gate on the qubits selected by `masks`, the first mask being
    /// the most significant bit of the gate's local index.
    fn apply_local(&self, gate: &SquareMatrix, masks: &[usize]) -> Vec<Complex> {
        let k = masks.len();
        let local = 1usize << k;
        let all_masks: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..local)
            .map(|l| {
                (0..k)
                    .filter(|&b| l & (1 << (k - 1 - b)) != 0)
                    .map(|b| masks[b])
                    .sum()
            })
            .collect();
        let mut out = self.amplitudes.clone();
        let mut gathered = vec![ZERO; local];
        for base in (0..self.amplitudes.len()).filter(|idx| idx & all_masks == 0) {
            for (g, &off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amplitudes[base + off];
            }
            for (row, &off) in offsets.iter().enumerate() {
                out[base + off] = (0..local).map(|col| gate.get(row, col) * gathered[col]).sum();
            }
        }
        out
    }

    fn require_two_qubits(&self) -> Result<()> {
        if self.qubits != 2 {
            return Err(Error::InvalidState(format!(
                "expected a two-qubit state, got {} qubits",
                self.qubits
            )));
        }
        Ok(())
    }

    /// `C = 2|αδ − βγ|`.
    pub fn concurrence(&self) -> Result<f64> {
        self.require_two_qubits()?;
        let [a, b, c, d] = [
            self.amplitudes[0],
            self.amplitudes[1],
            self.amplitudes[2],
            self.amplitudes[3],
        ];
        Ok((2.0 * (a * d - b * c).norm()).min(1.0))
    }

    /// `C = |⟨Ψ*|σ_y⊗σ_y|Ψ⟩|`, evaluated through the explicit operator.
    pub fn concurrence_sigma_y(&self) -> Result<f64> {
        self.require_two_qubits()?;
        let sy = SquareMatrix::new(2, vec![ZERO, -I, I, ZERO])?;
        let flipped = sy.kron(&sy).apply(&self.amplitudes)?;
        // ⟨Ψ*| has components Ψ_i (no conjugation)
        let overlap: Complex = self.amplitudes.iter().zip(&flipped).map(|(a, b)| a * b).sum();
        Ok(overlap.norm())
    }

    /// Partial trace keeping `keep`.
    pub fn reduced_density(&self, keep: Subsystem) -> Result<DensityMatrix2> {
        self.require_two_qubits()?;
        let psi = |i: usize, j: usize| self.amplitudes[2 * i + j];
        let m = SquareMatrix::from_fn(2, |r, c| match keep {
            Subsystem::A => (0..2).map(|j| psi(r, j) * psi(c, j).conj()).sum(),
            Subsystem::B => (0..2).map(|i| psi(i, r) * psi(i, c).conj()).sum(),
        });
        DensityMatrix2::new(m)
    }

    /// Measures `qubit` projectively in `basis`.
    pub fn measure_qubit(&self, qubit: usize, basis: &QubitBasis) -> Result<[MeasurementRecord; 2]> {
        self.check_qubit(qubit)?;
        if self.qubits < 2 {
            return Err(Error::InvalidState(
                "measurement needs at least two qubits to leave a residual state".into(),
            ));
        }
        check_orthonormal(basis)?;
        let mask = self.mask(qubit);
        let rest = self.qubits - 1;
        let low_mask = mask - 1;
        let record = |outcome: usize| -> MeasurementRecord {
            let b = basis[outcome];
            let residual: Vec<Complex> = (0..1usize << rest)
                .map(|r| {
                    // re-insert the measured bit into the residual index
                    let base = ((r & !low_mask) << 1) | (r & low_mask);
                    b[0].conj() * self.amplitudes[base] + b[1].conj() * self.amplitudes[base | mask]
                })
                .collect();
            let probability = residual.iter().map(|z| z.norm_sqr()).sum::<f64>();
            MeasurementRecord {
                outcome,
                probability,
                residual: (probability > IMPOSSIBLE_PROB).then(|| Self::normalized(rest, residual)),
            }
        };
        Ok([record(0), record(1)])
    }
}

fn norm(v: &[Complex]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_orthonormal(basis: &QubitBasis) -> Result<()> {
    let dot = |u: &[Complex; 2], v: &[Complex; 2]| u[0].conj() * v[0] + u[1].conj() * v[1];
    let worst = [
        (dot(&basis[0], &basis[0]) - ONE).norm(),
        (dot(&basis[1], &basis[1]) - ONE).norm(),
        dot(&basis[0], &basis[1]).norm(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    if !(worst <= 1e-10) {
        return Err(Error::InvalidParams(format!(
            "measurement basis is not orthonormal (deviation {worst:.3e})"
        )));
    }
    Ok(())
}

impl DensityMatrix2 {
    pub fn new(matrix: SquareMatrix) -> Result<Self> {
        if matrix.dim() != 2 {
            return Err(Error::DimensionMismatch {
                left: 2,
                right: matrix.dim(),
            });
        }
        if !matrix.approx_eq(&matrix.dagger(), 1e-10) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        if (matrix.trace() - ONE).norm() > 1e-10 {
            return Err(Error::InvalidState("density matrix trace is not 1".into()));
        }
        let rho = DensityMatrix2 { matrix };
        if rho.eigenvalues().1 < -1e-10 {
            return Err(Error::InvalidState("density matrix is not positive".into()));
        }
        Ok(rho)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.matrix
    }

    /// Eigenvalues `(larger, smaller)` of the Hermitian 2×2 matrix.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let a = self.matrix.get(0, 0).re;
        let d = self.matrix.get(1, 1).re;
        let b = self.matrix.get(0, 1);
        let mid = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (mid + radius, mid - radius)
    }

    /// `1 − tr(ρ²)`.
    pub fn linear_entropy(&self) -> f64 {
        let purity: f64 = self.matrix.entries().iter().map(|z| z.norm_sqr()).sum();
        (1.0 - purity).clamp(0.0, 0.5)
    }

    /// `−tr(ρ ln ρ)` in nats; the maximum is `ln 2`.
    pub fn von_neumann_entropy(&self) -> f64 {
        let (l1, l2) = self.eigenvalues();
        let h = |x: f64| {
            let x = x.clamp(0.0, 1.0);
            if x == 0.0 {
                0.0
            } else {
                -x * x.ln()
            }
        };
        (h(l1) + h(l2)).clamp(0.0, LN_2)
    }
}

/// Reduced-density eigenvalues `λ± = (1 ± √(1 − C²))/2` for concurrence `c`.
pub fn schmidt_lambdas(c: f64) -> Result<(f64, f64)> {
    if !(-1e-12..=1.0 + 1e-12).contains(&c) {
        return Err(Error::InvalidParams(format!("concurrence {c} outside [0, 1]")));
    }
    let c = c.clamp(0.0, 1.0);
    let root = (1.0 - c * c).sqrt();
    Ok((0.5 * (1.0 + root), 0.5 * (1.0 - root)))
}

pub const STATE_CATALOG: &[&str] = &["ghz", "w", "phi", "bell", "xplus", "xminus", "basis"];

/// Named states. `bell` takes an optional index `k` in 0..4 (the four Bell
/// states `(|00⟩±|11⟩)/√2`, `(|01⟩±|10⟩)/√2` in that order); `basis` takes
/// `(n, k)`.
pub fn catalog_state(name: &str, params: &[usize]) -> Result<PureState> {
    let r = |v: &[f64]| v.iter().map(|&x| Complex::new(x, 0.0)).collect::<Vec<_>>();
    let no_params = |state: PureState| {
        if params.is_empty() {
            Ok(state)
        } else {
            Err(Error::InvalidParams(format!("state `{name}` takes no parameters")))
        }
    };
    match name.to_ascii_lowercase().as_str() {
        "ghz" => no_params(PureState::normalized(3, r(&[1., 0., 0., 0., 0., 0., 0., 1.]))),
        "w" => no_params(PureState::normalized(3, r(&[0., 1., 1., 0., 1., 0., 0., 0.]))),
        "phi" => no_params(PureState::normalized(3, r(&[1., 0., 0., 1., 0., 1., 1., 0.]))),
        "xplus" => no_params(PureState::normalized(1, r(&[1., 1.]))),
        "xminus" => no_params(PureState::normalized(1, r(&[1., -1.]))),
        "bell" => {
            let k = match params {
                [] => 0,
                [k] => *k,
                _ => return Err(Error::InvalidParams("bell takes one index".into())),
            };
            let amps = match k {
                0 => [1., 0., 0., 1.],
                1 => [1., 0., 0., -1.],
                2 => [0., 1., 1., 0.],
                3 => [0., 1., -1., 0.],
                _ => return Err(Error::InvalidParams(format!("bell index {k} not in 0..4"))),
            };
            Ok(PureState::normalized(2, r(&amps)))
        }
        "basis" => match params {
            [n, k] => PureState::basis(*n, *k),
            _ => Err(Error::InvalidParams("basis takes (qubits, index)".into())),
        },
        _ => Err(Error::UnknownName {
            kind: "state",
            name: name.to_string(),
            known: STATE_CATALOG.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn arb_state(qubits: usize) -> impl Strategy<Value = PureState> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << qubits)
            .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
            .prop_map(move |v| {
                PureState::normalized(qubits, v.into_iter().map(|(a, b)| c(a, b)).collect())
            })
    }

    fn arb_local_unitary() -> impl Strategy<Value = SquareMatrix> {
        (0.0..std::f64::consts::TAU, 0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU)
            .prop_map(|(a, b, cc, d)| gates::single_qubit_unitary(a, b, cc, d))
    }

    #[test]
    fn make_state_validation() {
        let s = make_state(2, vec![ONE, ZERO, ZERO, ZERO]).unwrap();
        assert_eq!(s.concurrence().unwrap(), 0.0);
        assert!(make_state(2, vec![ZERO; 4]).is_err());
        assert!(make_state(2, vec![ONE; 3]).is_err());
        assert!(make_state(1, vec![c(2.0, 0.0), ZERO]).is_err());
        // small rounding is renormalized away
        let s = make_state(1, vec![c(1.0 + 1e-7, 0.0), ZERO]).unwrap();
        assert_eq!(s.amplitudes()[0], ONE);
        let h = FRAC_1_SQRT_2;
        let bell = make_state(2, vec![c(h, 0.), ZERO, ZERO, c(h, 0.)]).unwrap();
        assert!((bell.concurrence().unwrap() - 1.0).abs() < 1e-15);
        let plus = make_state(2, vec![c(0.5, 0.); 4]).unwrap();
        assert!(plus.concurrence().unwrap() < 1e-15);
    }

    #[test]
    fn catalog_amplitudes() {
        let h = FRAC_1_SQRT_2;
        let ghz = catalog_state("ghz", &[]).unwrap();
        let expected: Vec<Complex> = [h, 0., 0., 0., 0., 0., 0., h].iter().map(|&x| c(x, 0.)).collect();
        assert!(ghz.amplitudes().iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-15));

        let t = 1.0 / 3f64.sqrt();
        let w = catalog_state("w", &[]).unwrap();
        let expected: Vec<Complex> = [0., t, t, 0., t, 0., 0., 0.].iter().map(|&x| c(x, 0.)).collect();
        assert!(w.amplitudes().iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-15));

        let xp = catalog_state("xplus", &[]).unwrap();
        assert!((xp.amplitudes()[0] - c(h, 0.)).norm() < 1e-15);
        assert!((xp.amplitudes()[1] - c(h, 0.)).norm() < 1e-15);

        for k in 0..4 {
            let b = catalog_state("bell", &[k]).unwrap();
            assert!((b.concurrence().unwrap() - 1.0).abs() < 1e-15);
        }
        assert_eq!(catalog_state("basis", &[3, 5]).unwrap().amplitudes()[5], ONE);
        assert!(catalog_state("bell", &[4]).is_err());
        let err = catalog_state("cat", &[]).unwrap_err();
        assert!(err.to_string().contains("ghz"));
    }

    #[test]
    fn concurrence_requires_two_qubits() {
        let ghz = catalog_state("ghz", &[]).unwrap();
        assert!(ghz.concurrence().is_err());
        assert!(ghz.concurrence_sigma_y().is_err());
        assert!(ghz.reduced_density(Subsystem::A).is_err());
    }

    #[test]
    fn reduced_density_examples() {
        let bell = catalog_state("bell", &[0]).unwrap();
        let rho = bell.reduced_density(Subsystem::A).unwrap();
        let half = SquareMatrix::identity(2).scale(c(0.5, 0.));
        assert!(rho.matrix().approx_eq(&half, 1e-15));
        assert!((rho.linear_entropy() - 0.5).abs() < 1e-15);
        assert!((rho.von_neumann_entropy() - LN_2).abs() < 1e-15);

        let zero = PureState::basis(2, 0).unwrap();
        let rho = zero.reduced_density(Subsystem::B).unwrap();
        assert!(rho.matrix().approx_eq(&SquareMatrix::diag(&[ONE, ZERO]), 0.0));
        assert_eq!(rho.linear_entropy(), 0.0);
        assert_eq!(rho.von_neumann_entropy(), 0.0);
    }

    #[test]
    fn entropy_at_concurrence_point_six() {
        // C = 0.6 from cos(t)|00⟩ + sin(t)|11⟩ with sin(2t) = 0.6
        let t = 0.5 * 0.6f64.asin();
        let s = make_state(2, vec![c(t.cos(), 0.), ZERO, ZERO, c(t.sin(), 0.)]).unwrap();
        assert!((s.concurrence().unwrap() - 0.6).abs() < 1e-14);
        let rho = s.reduced_density(Subsystem::A).unwrap();
        let expected = -0.9 * 0.9f64.ln() - 0.1 * 0.1f64.ln();
        assert!((rho.von_neumann_entropy() - expected).abs() < 1e-12);
        let (hi, lo) = schmidt_lambdas(0.6).unwrap();
        assert!((hi - 0.9).abs() < 1e-15 && (lo - 0.1).abs() < 1e-15);
    }

    #[test]
    fn schmidt_lambda_edges() {
        assert_eq!(schmidt_lambdas(0.0).unwrap(), (1.0, 0.0));
        assert_eq!(schmidt_lambdas(1.0).unwrap(), (0.5, 0.5));
        assert!(schmidt_lambdas(1.1).is_err());
        assert!(schmidt_lambdas(-0.01).is_err());
    }

    #[test]
    fn apply_gate_examples() {
        let h = gates::hadamard();
        let hhh = h.kron(&h).kron(&h);
        let phi = catalog_state("phi", &[]).unwrap();
        let ghz = catalog_state("ghz", &[]).unwrap();
        let out = phi.apply_gate(&hhh, Target::All).unwrap();
        assert!(out.fidelity(&ghz).unwrap() >= 1.0 - 1e-12);
        // same thing qubit by qubit
        let mut s = phi.clone();
        for q in 0..3 {
            s = s.apply_gate(&h, Target::Single(q)).unwrap();
        }
        assert!(s.fidelity(&ghz).unwrap() >= 1.0 - 1e-12);

        let xp0 = catalog_state("xplus", &[]).unwrap().tensor(&PureState::basis(1, 0).unwrap());
        let cnot = gates::catalog_gate("cnot", &[]).unwrap();
        let out = xp0.apply_gate(cnot.matrix(), Target::Pair(0, 1)).unwrap();
        assert!(out.fidelity(&catalog_state("bell", &[0]).unwrap()).unwrap() > 1.0 - 1e-15);

        let id = SquareMatrix::identity(4);
        assert_eq!(xp0.apply_gate(&id, Target::Pair(0, 1)).unwrap(), xp0);
    }

    #[test]
    fn apply_gate_reversed_pair_swaps_roles() {
        // CNOT with control on qubit 1 acting on |01⟩ gives |11⟩
        let cnot = gates::catalog_gate("cnot", &[]).unwrap();
        let s = PureState::basis(2, 0b01).unwrap();
        let out = s.apply_gate(cnot.matrix(), Target::Pair(1, 0)).unwrap();
        assert_eq!(out, PureState::basis(2, 0b11).unwrap());
        // and inside a three-qubit register on qubits (0, 2)
        let s = PureState::basis(3, 0b100).unwrap();
        let out = s.apply_gate(cnot.matrix(), Target::Pair(0, 2)).unwrap();
        assert_eq!(out, PureState::basis(3, 0b101).unwrap());
    }

    #[test]
    fn apply_gate_errors() {
        let s = PureState::basis(2, 0).unwrap();
        let bad = SquareMatrix::identity(4).scale(c(2.0, 0.));
        assert!(matches!(s.apply_gate(&bad, Target::Pair(0, 1)), Err(Error::NotUnitary { .. })));
        let id = SquareMatrix::identity(4);
        assert!(s.apply_gate(&id, Target::Pair(0, 0)).is_err());
        assert!(matches!(
            s.apply_gate(&id, Target::Pair(0, 2)),
            Err(Error::QubitIndex { index: 2, qubits: 2 })
        ));
        assert!(s.apply_gate(&id, Target::Single(0)).is_err());
    }

    #[test]
    fn measurement_of_named_states() {
        let z = computational_basis();
        let w = catalog_state("w", &[]).unwrap();
        let [r0, r1] = w.measure_qubit(0, &z).unwrap();
        assert!((r0.probability - 2.0 / 3.0).abs() < 1e-12);
        assert!((r1.probability - 1.0 / 3.0).abs() < 1e-12);
        assert!((r0.residual.as_ref().unwrap().concurrence().unwrap() - 1.0).abs() < 1e-12);
        assert!(r1.residual.as_ref().unwrap().concurrence().unwrap() < 1e-12);

        let ghz = catalog_state("ghz", &[]).unwrap();
        for q in 0..3 {
            for rec in ghz.measure_qubit(q, &z).unwrap() {
                assert!((rec.probability - 0.5).abs() < 1e-12);
                assert!(rec.residual.unwrap().concurrence().unwrap() < 1e-12);
            }
        }

        let phi = catalog_state("phi", &[]).unwrap();
        for rec in phi.measure_qubit(0, &z).unwrap() {
            assert!((rec.probability - 0.5).abs() < 1e-12);
            assert!((rec.residual.unwrap().concurrence().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn impossible_outcomes_are_flagged() {
        let s = PureState::basis(2, 0).unwrap();
        let [r0, r1] = s.measure_qubit(1, &computational_basis()).unwrap();
        assert!(r0.is_possible());
        assert!(!r1.is_possible());
        assert_eq!(r1.probability, 0.0);
    }

    #[test]
    fn measurement_errors() {
        let s = catalog_state("ghz", &[]).unwrap();
        let bad = [[ONE, ZERO], [ONE, ZERO]];
        assert!(s.measure_qubit(0, &bad).is_err());
        assert!(s.measure_qubit(3, &computational_basis()).is_err());
        let one = catalog_state("xplus", &[]).unwrap();
        assert!(one.measure_qubit(0, &computational_basis()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn concurrence_formulas_agree(s in arb_state(2)) {
            let a = s.concurrence().unwrap();
            let b = s.concurrence_sigma_y().unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn marginal_spectra_match_schmidt(s in arb_state(2)) {
            let cc = s.concurrence().unwrap();
            let (hi, lo) = schmidt_lambdas(cc).unwrap();
            for keep in [Subsystem::A, Subsystem::B] {
                let rho = s.reduced_density(keep).unwrap();
                let (a, b) = rho.eigenvalues();
                prop_assert!((a - hi).abs() <= 1e-10 && (b - lo).abs() <= 1e-10);
                prop_assert!((rho.linear_entropy() - cc * cc / 2.0).abs() <= 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn concurrence_is_locally_invariant(s in arb_state(2), u in arb_local_unitary(), v in arb_local_unitary()) {
            let out = s.apply_gate(&u.kron(&v), Target::Pair(0, 1)).unwrap();
            prop_assert!((out.concurrence().unwrap() - s.concurrence().unwrap()).abs() <= 1e-10);
        }

        #[test]
        fn entropy_increases_with_concurrence(c1 in 0.0f64..1.0, c2 in 0.0f64..1.0) {
            let state = |cc: f64| {
                let t = 0.5 * cc.asin();
                make_state(2, vec![c(t.cos(), 0.), ZERO, ZERO, c(t.sin(), 0.)]).unwrap()
            };
            let e = |cc: f64| state(cc).reduced_density(Subsystem::A).unwrap().von_neumann_entropy();
            if c1 < c2 - 1e-6 {
                prop_assert!(e(c1) <= e(c2));
            }
        }

        #[test]
        fn measurement_reconstructs_state(s in arb_state(3), q in 0usize..3, theta in 0.0f64..3.0, phi in 0.0f64..6.0) {
            let b0 = PureState::from_bloch(theta, phi);
            let b1 = PureState::from_bloch(std::f64::consts::PI - theta, phi + std::f64::consts::PI);
            let basis = [
                [b0.amplitudes()[0], b0.amplitudes()[1]],
                [b1.amplitudes()[0], b1.amplitudes()[1]],
            ];
            let recs = s.measure_qubit(q, &basis).unwrap();
            prop_assert!((recs[0].probability + recs[1].probability - 1.0).abs() <= 1e-10);
            // Σ_k √p_k |b_k⟩ ⊗ residual_k, with |b_k⟩ inserted at position q
            let mut rebuilt = vec![ZERO; 8];
            for rec in recs.iter() {
                let Some(res) = &rec.residual else { continue };
                let bk = basis[rec.outcome];
                let sp = rec.probability.sqrt();
                for (idx, amp) in rebuilt.iter_mut().enumerate() {
                    let bit = (idx >> (2 - q)) & 1;
                    let low = idx & ((1 << (2 - q)) - 1);
                    let high = idx >> (3 - q);
                    let r = (high << (2 - q)) | low;
                    *amp += sp * bk[bit] * res.amplitudes()[r];
                }
            }
            let rebuilt = PureState::normalized(3, rebuilt);
            prop_assert!((rebuilt.fidelity(&s).unwrap() - 1.0).abs() <= 1e-10);
        }
    }
}

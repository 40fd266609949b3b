//! Braid-group representations from an operator `R` on `V⊗V`, and checks of
//! the braid and Yang–Baxter relations.
//!
//! A word is evaluated left to right, each letter right-multiplied onto the
//! running product: the word `σ₁σ₂⁻¹` maps to `ρ(σ₁)·ρ(σ₂)⁻¹`, so
//! `word_rep(w1 ++ w2) = word_rep(w1)·word_rep(w2)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{Complex, SquareMatrix, ONE, ZERO};

/// Largest representation dimension `d^n` accepted (2^10).
pub const MAX_REP_DIM: usize = 1024;

/// Largest local dimension accepted by the relation checks.
pub const MAX_LOCAL_DIM: usize = 4;

/// Residual tolerance for exact catalog constants.
pub const EXACT_TOL: f64 = 1e-12;

/// Residual tolerance for user-supplied matrices.
pub const USER_TOL: f64 = 1e-10;

const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraidWord {
    strands: usize,
    letters: Vec<i32>,
}

impl BraidWord {
    /// Letters are signed generator indices: `k` is `σ_k`, `-k` is `σ_k⁻¹`.
    pub fn new(strands: usize, letters: Vec<i32>) -> Result<Self> {
        if strands < 2 {
            return Err(Error::InvalidBraid(format!("need at least 2 strands, got {strands}")));
        }
        if let Some(bad) = letters
            .iter()
            .find(|&&l| l == 0 || l.unsigned_abs() as usize > strands - 1)
        {
            return Err(Error::InvalidBraid(format!(
                "letter {bad} out of range for {strands} strands"
            )));
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn identity(strands: usize) -> Result<Self> {
        Self::new(strands, Vec::new())
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Concatenation `self ++ other`.
    pub fn then(&self, other: &BraidWord) -> Result<BraidWord> {
        if self.strands != other.strands {
            return Err(Error::InvalidBraid(format!(
                "cannot compose braids on {} and {} strands",
                self.strands, other.strands
            )));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord {
            strands: self.strands,
            letters,
        })
    }

    /// Group inverse: reversed word with every letter inverted.
    pub fn inverse(&self) -> BraidWord {
        BraidWord {
            strands: self.strands,
            letters: self.letters.iter().rev().map(|l| -l).collect(),
        }
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|&l| if l > 0 { format!("s{l}") } else { format!("s{}^-1", -l) })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// Outcome of a relation check; the residual is the max-norm of the
/// difference between the two sides.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelationCheck {
    pub holds: bool,
    pub residual: f64,
}

/// Local dimension `d` of an operator on `V⊗V`.
pub fn local_dim(op: &SquareMatrix) -> Result<usize> {
    let n = op.dim();
    let d = (n as f64).sqrt().round() as usize;
    if d * d != n || d < 2 {
        return Err(Error::Unsupported(format!(
            "operator dimension {n} is not the square of a local dimension ≥ 2"
        )));
    }
    Ok(d)
}

fn check_unitary(r: &SquareMatrix) -> Result<()> {
    let deviation = r.unitarity_deviation();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary {
            deviation,
            tol: UNITARY_TOL,
        });
    }
    Ok(())
}

fn rep_dim(d: usize, strands: usize) -> Result<usize> {
    let dim = (0..strands).try_fold(1usize, |acc, _| acc.checked_mul(d).filter(|&x| x <= MAX_REP_DIM));
    dim.ok_or_else(|| {
        Error::UnsupportedSize {
            dim: d.saturating_pow(strands as u32),
            max: MAX_REP_DIM,
        }
    })
}

/// `σ_i ↦ I^{⊗(i−1)} ⊗ R ⊗ I^{⊗(n−i−1)}` with 1-based `i`.
pub fn generator_rep(i: usize, strands: usize, r: &SquareMatrix) -> Result<SquareMatrix> {
    let d = local_dim(r)?;
    if strands < 2 || i == 0 || i > strands - 1 {
        return Err(Error::InvalidBraid(format!(
            "generator σ_{i} does not exist on {strands} strands"
        )));
    }
    check_unitary(r)?;
    rep_dim(d, strands)?;
    let left = SquareMatrix::identity(d).kron_power(i - 1);
    let right = SquareMatrix::identity(d).kron_power(strands - i - 1);
    Ok(left.kron(r).kron(&right))
}

/// Representation of a braid word; inverse letters use `R† = R⁻¹`.
pub fn word_rep(word: &BraidWord, r: &SquareMatrix) -> Result<SquareMatrix> {
    let d = local_dim(r)?;
    check_unitary(r)?;
    let dim = rep_dim(d, word.strands)?;
    let r_inv = r.dagger();
    let mut acc = SquareMatrix::identity(dim);
    for &letter in &word.letters {
        let op = if letter > 0 { r } else { &r_inv };
        let i = letter.unsigned_abs() as usize;
        acc = right_mul_generator(&acc, op, d, i, word.strands);
    }
    Ok(acc)
}

/// `acc · (I^{⊗(i−1)} ⊗ op ⊗ I^{⊗(n−i−1)})` without forming the generator.
fn right_mul_generator(acc: &SquareMatrix, op: &SquareMatrix, d: usize, i: usize, strands: usize) -> SquareMatrix {
    let dim = acc.dim();
    let inner = d * d;
    let outer_right = d.pow((strands - i - 1) as u32);
    let outer_left = d.pow((i - 1) as u32);
    let mut out = vec![ZERO; dim * dim];
    let src = acc.entries();
    for row in 0..dim {
        let src_row = &src[row * dim..(row + 1) * dim];
        let dst_row = &mut out[row * dim..(row + 1) * dim];
        for a in 0..outer_left {
            for b in 0..outer_right {
                let idx = |x: usize| (a * inner + x) * outer_right + b;
                for y in 0..inner {
                    let mut s = ZERO;
                    for x in 0..inner {
                        let r = op.get(x, y);
                        if r != ZERO {
                            s += src_row[idx(x)] * r;
                        }
                    }
                    dst_row[idx(y)] = s;
                }
            }
        }
    }
    SquareMatrix::new(dim, out).expect("finite product")
}

fn checked_local_dim(op: &SquareMatrix) -> Result<usize> {
    let d = local_dim(op)?;
    if d > MAX_LOCAL_DIM {
        return Err(Error::UnsupportedSize {
            dim: op.dim(),
            max: MAX_LOCAL_DIM * MAX_LOCAL_DIM,
        });
    }
    Ok(d)
}

/// `(R⊗I)(I⊗R)(R⊗I) = (I⊗R)(R⊗I)(I⊗R)` on `V⊗V⊗V`.
pub fn check_braid_relation(r: &SquareMatrix, tol: f64) -> Result<RelationCheck> {
    let d = checked_local_dim(r)?;
    let id = SquareMatrix::identity(d);
    let a = r.kron(&id);
    let b = id.kron(r);
    let lhs = a.matmul(&b)?.matmul(&a)?;
    let rhs = b.matmul(&a)?.matmul(&b)?;
    let residual = lhs.max_abs_diff(&rhs)?;
    Ok(RelationCheck {
        holds: residual <= tol,
        residual,
    })
}

/// `R̂₁₂R̂₁₃R̂₂₃ = R̂₂₃R̂₁₃R̂₁₂`, with `R̂₁₃ = P₂₃R̂₁₂P₂₃`.
pub fn check_yang_baxter(rhat: &SquareMatrix, tol: f64) -> Result<RelationCheck> {
    let d = checked_local_dim(rhat)?;
    let id = SquareMatrix::identity(d);
    let r12 = rhat.kron(&id);
    let r23 = id.kron(rhat);
    let p23 = id.kron(&swap_operator(d));
    let r13 = p23.matmul(&r12)?.matmul(&p23)?;
    let lhs = r12.matmul(&r13)?.matmul(&r23)?;
    let rhs = r23.matmul(&r13)?.matmul(&r12)?;
    let residual = lhs.max_abs_diff(&rhs)?;
    Ok(RelationCheck {
        holds: residual <= tol,
        residual,
    })
}

/// `P|i,j⟩ = |j,i⟩` on `C^d ⊗ C^d`.
pub fn swap_operator(d: usize) -> SquareMatrix {
    SquareMatrix::from_fn(d * d, |row, col| {
        let (i, j) = (col / d, col % d);
        if row == j * d + i {
            ONE
        } else {
            ZERO
        }
    })
}

/// `R = P·R̂`.
pub fn to_braid_operator(rhat: &SquareMatrix) -> Result<SquareMatrix> {
    let d = local_dim(rhat)?;
    swap_operator(d).matmul(rhat)
}

/// `R′_{ij,kl} = M_{ij} δ_{il} δ_{jk}` for a `d×d` matrix of unit-modulus
/// phases.
pub fn generalized_rprime(phases: &SquareMatrix) -> Result<SquareMatrix> {
    let d = phases.dim();
    if !(2..=MAX_LOCAL_DIM).contains(&d) {
        return Err(Error::UnsupportedSize {
            dim: d,
            max: MAX_LOCAL_DIM,
        });
    }
    if let Some(bad) = phases.entries().iter().find(|z| !((z.norm() - 1.0).abs() <= 1e-10)) {
        return Err(Error::InvalidParams(format!(
            "phase {bad} does not have unit modulus"
        )));
    }
    Ok(SquareMatrix::from_fn(d * d, |row, col| {
        let (i, j) = (row / d, row % d);
        let (k, l) = (col / d, col % d);
        if i == l && j == k {
            phases.get(i, j)
        } else {
            ZERO
        }
    }))
}

/// The `d = 2` member with phases `(a, b, c, d)` laid out as `[[a, b], [c, d]]`.
pub fn rprime_from_phases(a: Complex, b: Complex, c: Complex, d: Complex) -> Result<SquareMatrix> {
    generalized_rprime(&SquareMatrix::new(2, vec![a, b, c, d])?)
}

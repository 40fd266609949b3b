//! Perfect-entangler test, three-way gate classification and the search for
//! product bases that a gate maps to maximally entangled states.
//!
//! A two-qubit gate is a perfect entangler exactly when the convex hull of
//! the eigenvalues of `m(U)` contains the origin.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::{Gate, InvariantPair};
use crate::linalg::Complex;
use crate::optimize::{nelder_mead, NelderMeadOptions};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_RESTARTS: usize = 50;

/// Tolerance on `Δ` when deciding `Δ = −1` for the `R′` family.
pub const DELTA_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateClass {
    Local,
    PerfectEntangler,
    NonPerfectNonLocal,
}

impl GateClass {
    pub fn as_str(self) -> &'static str {
        match self {
            GateClass::Local => "Local",
            GateClass::PerfectEntangler => "PerfectEntangler",
            GateClass::NonPerfectNonLocal => "NonPerfectNonLocal",
        }
    }
}

impl fmt::Display for GateClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn cross(a: Complex, b: Complex) -> f64 {
    a.re * b.im - a.im * b.re
}

fn segment_distance(a: Complex, b: Complex) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return a.norm();
    }
    // projection of the origin onto the line through a and b
    let t = (-(a.re * ab.re + a.im * ab.im) / len2).clamp(0.0, 1.0);
    (a + ab * t).norm()
}

fn triangle_contains_origin(a: Complex, b: Complex, c: Complex) -> bool {
    let area = cross(b - a, c - a);
    if area == 0.0 {
        return false;
    }
    let d1 = cross(b - a, -a);
    let d2 = cross(c - b, -b);
    let d3 = cross(a - c, -c);
    (d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0) || (d1 <= 0.0 && d2 <= 0.0 && d3 <= 0.0)
}

/// Euclidean distance from the origin to the convex hull of 1 to 4 points.
pub fn hull_distance(points: &[Complex]) -> Result<f64> {
    if points.is_empty() || points.len() > 4 {
        return Err(Error::InvalidLength {
            expected: 4,
            actual: points.len(),
        });
    }
    if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::NonFinite("hull points"));
    }
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if triangle_contains_origin(points[i], points[j], points[k]) {
                    return Ok(0.0);
                }
            }
        }
    }
    let mut best = points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
    for i in 0..n {
        for j in i + 1..n {
            best = best.min(segment_distance(points[i], points[j]));
        }
    }
    Ok(best)
}

pub fn hull_contains_zero(points: &[Complex], tol: f64) -> Result<bool> {
    Ok(hull_distance(points)? <= tol)
}

/// The data behind a perfect-entangler decision.
#[derive(Clone, Debug, PartialEq)]
pub struct HullReport {
    /// Eigenvalues of `m(U)`.
    pub points: [Complex; 4],
    pub distance: f64,
    pub perfect_entangler: bool,
}

pub fn hull_report(u: &Gate, tol: f64) -> Result<HullReport> {
    let points = u.m_matrix()?.eigenvalues4()?;
    let distance = hull_distance(&points)?;
    Ok(HullReport {
        points,
        distance,
        perfect_entangler: distance <= tol,
    })
}

pub fn is_perfect_entangler(u: &Gate, tol: f64) -> Result<bool> {
    Ok(hull_report(u, tol)?.perfect_entangler)
}

pub fn classify(u: &Gate, tol: f64) -> Result<GateClass> {
    if u.invariants()?.distance(&InvariantPair::local()) <= tol {
        return Ok(GateClass::Local);
    }
    Ok(if is_perfect_entangler(u, tol)? {
        GateClass::PerfectEntangler
    } else {
        GateClass::NonPerfectNonLocal
    })
}

/// Closed-form perfect-entangler condition for `R′(a,b,c,d)`: `Δ = −1`.
pub fn rprime_condition(delta: Complex) -> bool {
    delta.im.abs() <= DELTA_TOL && (delta + 1.0).norm() <= DELTA_TOL
}

/// Orthonormal product basis from three single-qubit states
/// `(a,b)`, `(c,d)`, `(e,f)`, each `(cos θ/2, sin θ/2 e^{iφ})`:
///
/// ```text
/// ψ1 = (a, b) ⊗ (c, d)      ψ2 = (b̄, −ā) ⊗ (c, d)
/// ψ3 = (e, f) ⊗ (d̄, −c̄)     ψ4 = (f̄, −ē) ⊗ (d̄, −c̄)
/// ```
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductBasis {
    /// `(θ1, φ1, θ2, φ2, θ3, φ3)`
    pub params: [f64; 6],
}

fn bloch_pair(theta: f64, phi: f64) -> (Complex, Complex) {
    let (s, c) = (theta / 2.0).sin_cos();
    (Complex::new(c, 0.0), Complex::from_polar(s, phi))
}

fn kron2(x: (Complex, Complex), y: (Complex, Complex)) -> [Complex; 4] {
    [x.0 * y.0, x.0 * y.1, x.1 * y.0, x.1 * y.1]
}

fn orthogonal(x: (Complex, Complex)) -> (Complex, Complex) {
    (x.1.conj(), -x.0.conj())
}

impl ProductBasis {
    pub fn new(params: [f64; 6]) -> Self {
        ProductBasis { params }
    }

    pub fn computational() -> Self {
        ProductBasis::new([0.0; 6])
    }

    /// `{|x±⟩ ⊗ |x±⟩}`.
    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_PI_2;
        ProductBasis::new([h, 0.0, h, 0.0, h, 0.0])
    }

    /// The single-qubit pairs `(a,b)`, `(c,d)`, `(e,f)`.
    pub fn pairs(&self) -> [(Complex, Complex); 3] {
        let p = &self.params;
        [bloch_pair(p[0], p[1]), bloch_pair(p[2], p[3]), bloch_pair(p[4], p[5])]
    }

    pub fn states(&self) -> [[Complex; 4]; 4] {
        let [ab, cd, ef] = self.pairs();
        [
            kron2(ab, cd),
            kron2(orthogonal(ab), cd),
            kron2(ef, orthogonal(cd)),
            kron2(orthogonal(ef), orthogonal(cd)),
        ]
    }
}

fn concurrence_of(v: &[Complex]) -> f64 {
    (2.0 * (v[0] * v[3] - v[1] * v[2]).norm()).min(1.0)
}

fn image_concurrence(u: &Gate, state: &[Complex; 4]) -> f64 {
    let out = u.matrix().apply(state).expect("4x4 gate on 4 amplitudes");
    concurrence_of(&out)
}

/// Smallest concurrence among the images of the four basis states.
pub fn basis_images_min_concurrence(u: &Gate, b: &ProductBasis) -> f64 {
    b.states()
        .iter()
        .map(|s| image_concurrence(u, s))
        .fold(f64::INFINITY, f64::min)
}

/// Concurrence of `U(|φ1⟩⊗|φ2⟩)` with Bloch angles `(θ1, φ1, θ2, φ2)`.
pub fn product_image_concurrence(u: &Gate, angles: [f64; 4]) -> f64 {
    let state = kron2(bloch_pair(angles[0], angles[1]), bloch_pair(angles[2], angles[3]));
    image_concurrence(u, &state)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisSearch {
    pub value: f64,
    pub basis: ProductBasis,
    /// Index of the restart that produced the result.
    pub restart: usize,
    pub evals: usize,
}

fn random_angles<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    let mut out = [0.0; N];
    for (k, x) in out.iter_mut().enumerate() {
        let span = if k % 2 == 0 { std::f64::consts::PI } else { std::f64::consts::TAU };
        *x = rng.gen::<f64>() * span;
    }
    out
}

/// Stream `k` of `ChaCha8Rng::seed_from_u64(seed)` seeds restart `k`.
pub fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    rng
}

/// Maximize the minimum image concurrence over product bases with seeded
/// Nelder–Mead restarts. Restarts run in parallel; the best value wins and
/// ties go to the lowest restart index, so the result is independent of
/// scheduling.
pub fn max_min_basis_search(u: &Gate, restarts: usize, seed: u64) -> Result<BasisSearch> {
    max_min_basis_search_with(u, restarts, seed, &NelderMeadOptions::default())
}

pub fn max_min_basis_search_with(
    u: &Gate,
    restarts: usize,
    seed: u64,
    opts: &NelderMeadOptions,
) -> Result<BasisSearch> {
    if restarts == 0 {
        return Err(Error::InvalidParams("restarts must be at least 1".into()));
    }
    let runs: Vec<BasisSearch> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let x0: [f64; 6] = random_angles(&mut restart_rng(seed, k));
            let m = nelder_mead(
                |x| {
                    let basis = ProductBasis::new(x.try_into().expect("six parameters"));
                    -basis_images_min_concurrence(u, &basis)
                },
                &x0,
                opts,
            );
            BasisSearch {
                value: -m.value,
                basis: ProductBasis::new(m.x.try_into().expect("six parameters")),
                restart: k,
                evals: m.evals,
            }
        })
        .collect();
    let mut best = runs[0].clone();
    for run in &runs[1..] {
        if run.value > best.value {
            best = run.clone();
        }
    }
    Ok(best)
}

/// Largest image concurrence over single product states, by the same
/// restart scheme as the basis search.
pub fn max_product_concurrence(u: &Gate, restarts: usize, seed: u64) -> Result<(f64, [f64; 4])> {
    if restarts == 0 {
        return Err(Error::InvalidParams("restarts must be at least 1".into()));
    }
    let opts = NelderMeadOptions::default();
    let runs: Vec<(f64, [f64; 4])> = (0..restarts)
        .into_par_iter()
        .map(|k| {
            let x0: [f64; 4] = random_angles(&mut restart_rng(seed, k));
            let m = nelder_mead(
                |x| -product_image_concurrence(u, x.try_into().expect("four angles")),
                &x0,
                &opts,
            );
            (-m.value, m.x.try_into().expect("four angles"))
        })
        .collect();
    let mut best = runs[0];
    for run in &runs[1..] {
        if run.0 > best.0 {
            best = *run;
        }
    }
    Ok(best)
}

/// `| |ad−bc|² + |āc+b̄d|² − 1 |` for normalized `(a,b)`, `(c,d)`.
///
/// For `√SWAP` the two terms are the image concurrences of `(a,b)⊗(c,d)`
/// and `(b̄,−ā)⊗(c,d)`, so both cannot reach 1.
pub fn sqrt_swap_identity_residual(a: Complex, b: Complex, c: Complex, d: Complex) -> f64 {
    let t1 = (a * d - b * c).norm_sqr();
    let t2 = (a.conj() * c + b.conj() * d).norm_sqr();
    (t1 + t2 - 1.0).abs()
}

//! Entangling power: the mean linear entropy `C²/2` of `U(|φ⟩⊗|ψ⟩)` over
//! independent Bloch-uniform single-qubit states.
//!
//! Product states are parameterized as
//! `|θ,φ⟩ = (cos θ/2 e^{−iφ/2}, sin θ/2 e^{iφ/2})`.
//!
//! Monte Carlo sampling is split into chunks of [`MC_CHUNK`] samples. Chunk
//! `k` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, four
//! uniforms per sample in the order `cos θ₁, φ₁, cos θ₂, φ₂`. Chunk sums are
//! combined in chunk order, so results do not depend on the thread count.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gates::{catalog_gate, rprime_delta, Gate};
use crate::linalg::{Complex, SquareMatrix};

pub const DEFAULT_THETA_NODES: usize = 16;
pub const DEFAULT_PHI_NODES: usize = 32;
pub const MIN_THETA_NODES: usize = 8;
pub const MIN_PHI_NODES: usize = 16;
pub const MIN_SAMPLES: usize = 1000;
pub const MC_CHUNK: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Quadrature => "quadrature",
            Method::MonteCarlo => "monte-carlo",
            Method::ClosedForm => "closed-form",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EPowerEstimate {
    pub value: f64,
    pub method: Method,
    /// Standard error of the mean; Monte Carlo only.
    pub stderr: Option<f64>,
    /// Total quadrature nodes, or Monte Carlo samples; 0 for closed forms.
    pub nodes_or_samples: usize,
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Single-qubit state for `cos θ` and `φ`.
fn bloch_state(cos_theta: f64, phi: f64) -> [Complex; 2] {
    let c = ((1.0 + cos_theta) / 2.0).max(0.0).sqrt();
    let s = ((1.0 - cos_theta) / 2.0).max(0.0).sqrt();
    [Complex::from_polar(c, -phi / 2.0), Complex::from_polar(s, phi / 2.0)]
}

/// `C²/2` for `U(x ⊗ y)`.
fn linear_entropy_of_image(u: &[Complex], x: &[Complex; 2], y: &[Complex; 2]) -> f64 {
    let input = [x[0] * y[0], x[0] * y[1], x[1] * y[0], x[1] * y[1]];
    let mut out = [Complex::new(0.0, 0.0); 4];
    for (r, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|c| u[r * 4 + c] * input[c]).sum();
    }
    let c = 2.0 * (out[0] * out[3] - out[1] * out[2]).norm();
    c * c / 2.0
}

fn gate_entries(u: &Gate) -> &[Complex] {
    u.matrix().entries()
}

pub fn entangling_power_quadrature(u: &Gate, n_theta: usize, n_phi: usize) -> Result<EPowerEstimate> {
    if n_theta < MIN_THETA_NODES || n_phi < MIN_PHI_NODES {
        return Err(Error::InvalidParams(format!(
            "quadrature needs at least {MIN_THETA_NODES} θ nodes and {MIN_PHI_NODES} φ nodes, got {n_theta} and {n_phi}"
        )));
    }
    let (xs, ws) = gauss_legendre(n_theta);
    let states: Vec<([Complex; 2], f64)> = xs
        .iter()
        .zip(&ws)
        .flat_map(|(&x, &w)| (0..n_phi).map(move |k| (bloch_state(x, TAU * k as f64 / n_phi as f64), w)))
        .collect();
    let m = gate_entries(u);
    let partial: Vec<f64> = states
        .par_iter()
        .map(|(s1, w1)| states.iter().map(|(s2, w2)| w1 * w2 * linear_entropy_of_image(m, s1, s2)).sum::<f64>())
        .collect();
    // GL weights sum to 2 per cos θ axis and the φ rule carries 2π/n_φ each,
    // against the 1/(4π)² normalization
    let norm = 1.0 / (4.0 * (n_phi * n_phi) as f64);
    let value = partial.iter().sum::<f64>() * norm;
    Ok(EPowerEstimate {
        value: value.clamp(0.0, 0.5),
        method: Method::Quadrature,
        stderr: None,
        nodes_or_samples: states.len() * states.len(),
    })
}

pub fn entangling_power_default(u: &Gate) -> Result<EPowerEstimate> {
    entangling_power_quadrature(u, DEFAULT_THETA_NODES, DEFAULT_PHI_NODES)
}

fn sample_chunk(m: &[Complex], seed: u64, chunk: usize, len: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..len {
        let c1 = 2.0 * rng.gen::<f64>() - 1.0;
        let p1 = TAU * rng.gen::<f64>();
        let c2 = 2.0 * rng.gen::<f64>() - 1.0;
        let p2 = TAU * rng.gen::<f64>();
        let f = linear_entropy_of_image(m, &bloch_state(c1, p1), &bloch_state(c2, p2));
        sum += f;
        sum_sq += f * f;
    }
    (sum, sum_sq)
}

pub fn entangling_power_mc(u: &Gate, samples: usize, seed: u64) -> Result<EPowerEstimate> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "Monte Carlo needs at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let m = gate_entries(u);
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|k| sample_chunk(m, seed, k, MC_CHUNK.min(samples - k * MC_CHUNK)))
        .collect();
    let (sum, sum_sq) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(EPowerEstimate {
        value: mean,
        method: Method::MonteCarlo,
        stderr: Some((var / n).sqrt()),
        nodes_or_samples: samples,
    })
}

/// `|1 − Δ|²/18` for `R′(a,b,c,d)`.
pub fn rprime_closed_form(a: Complex, b: Complex, c: Complex, d: Complex) -> f64 {
    (Complex::new(1.0, 0.0) - rprime_delta(a, b, c, d)).norm_sqr() / 18.0
}

/// Known exact values for catalog gates; other names are an error.
pub fn entangling_power_closed_form(name: &str, params: &[Complex]) -> Result<EPowerEstimate> {
    closed_form_for(&catalog_gate(name, params)?)
}

pub fn closed_form_for(u: &Gate) -> Result<EPowerEstimate> {
    let p = u.params();
    let value = match u.name() {
        "cnot" | "r" | "rprime0" | "u_phi" => 2.0 / 9.0,
        "rprime" => rprime_closed_form(p[0], p[1], p[2], p[3]),
        "sqrt_swap" | "sqrt_swap_dag" => 1.0 / 6.0,
        "swap" | "identity" => 0.0,
        other => {
            return Err(Error::Unsupported(format!(
                "no closed form for `{other}`; use quadrature"
            )))
        }
    };
    Ok(EPowerEstimate {
        value,
        method: Method::ClosedForm,
        stderr: None,
        nodes_or_samples: 0,
    })
}

/// Convenience for arbitrary matrices, bypassing the catalog.
pub fn entangling_power_matrix(u: &SquareMatrix) -> Result<EPowerEstimate> {
    entangling_power_default(&Gate::from_matrix("matrix", u.clone(), 1e-8)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{random_local, random_unitary, swap_matrix};
    use crate::linalg::ONE;

    fn gate(name: &str, params: &[Complex]) -> Gate {
        catalog_gate(name, params).unwrap()
    }

    fn phase(rng: &mut impl Rng) -> Complex {
        Complex::from_polar(1.0, rng.gen::<f64>() * TAU)
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in [1, 2, 5, 8, 16, 33] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for k in 0..2 * n {
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}");
            }
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn quadrature_examples() {
        let ep = |name: &str, p: &[Complex]| entangling_power_default(&gate(name, p)).unwrap().value;
        for name in ["cnot", "r", "rprime0"] {
            assert!((ep(name, &[]) - 2.0 / 9.0).abs() < 1e-12, "{name}");
        }
        assert!((ep("u_phi", &[Complex::new(0.3, 0.0)]) - 2.0 / 9.0).abs() < 1e-12);
        assert!((ep("sqrt_swap", &[]) - 1.0 / 6.0).abs() < 1e-12);
        assert!((ep("sqrt_swap_dag", &[]) - 1.0 / 6.0).abs() < 1e-12);
        assert!(ep("swap", &[]) < 1e-12);
        assert!(ep("identity", &[]) < 1e-30);
        assert!(ep("sqrt_swap", &[]) < ep("cnot", &[]));
    }

    #[test]
    fn quadrature_rprime_family() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..20 {
            let q = [phase(&mut rng), phase(&mut rng), phase(&mut rng), phase(&mut rng)];
            let v = entangling_power_default(&gate("rprime", &q)).unwrap().value;
            assert!((v - rprime_closed_form(q[0], q[1], q[2], q[3])).abs() < 1e-12);
        }
    }

    #[test]
    fn node_counts_are_validated_and_refinement_is_stable() {
        let g = gate("cnot", &[]);
        assert!(entangling_power_quadrature(&g, 7, 32).is_err());
        assert!(entangling_power_quadrature(&g, 16, 15).is_err());
        let coarse = entangling_power_quadrature(&g, 8, 16).unwrap();
        assert_eq!(coarse.nodes_or_samples, (8 * 16) * (8 * 16));
        assert!((coarse.value - 2.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        let cf = |name: &str, p: &[Complex]| entangling_power_closed_form(name, p).unwrap().value;
        assert_eq!(cf("u_phi", &[Complex::new(1.7, 0.0)]), 2.0 / 9.0);
        assert!((cf("rprime", &[ONE, ONE, -ONE, ONE]) - 2.0 / 9.0).abs() < 1e-15);
        assert_eq!(cf("rprime", &[ONE, ONE, ONE, ONE]), 0.0);
        assert_eq!(cf("swap", &[]), 0.0);
        assert_eq!(cf("sqrt_swap", &[]), 1.0 / 6.0);
        let err = entangling_power_closed_form("controlled", &[ONE, Complex::new(0.0, 0.0), Complex::new(0.0, 0.0), ONE]);
        assert!(matches!(err, Err(Error::Unsupported(ref m)) if m.contains("quadrature")));
    }

    #[test]
    fn monte_carlo_is_seeded_and_agrees() {
        let g = gate("cnot", &[]);
        assert!(entangling_power_mc(&g, 999, 1).is_err());
        let a = entangling_power_mc(&g, 100_000, 42).unwrap();
        let b = entangling_power_mc(&g, 100_000, 42).unwrap();
        assert_eq!(a, b);
        let se = a.stderr.unwrap();
        assert!((a.value - 2.0 / 9.0).abs() < 4.0 * se, "{a:?}");
        let c = entangling_power_mc(&g, 100_000, 43).unwrap();
        assert_ne!(a.value, c.value);
        let id = entangling_power_mc(&gate("identity", &[]), 5000, 1).unwrap();
        assert!(id.value < 1e-30);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let g = gate("r", &[]);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| (entangling_power_mc(&g, 70_000, 5).unwrap(), entangling_power_default(&g).unwrap()))
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn invariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = swap_matrix();
        for _ in 0..10 {
            let u = random_unitary(4, &mut rng);
            let ep = |m: SquareMatrix| entangling_power_matrix(&m).unwrap().value;
            let base = ep(u.clone());
            assert!((0.0..=0.5).contains(&base));
            assert!((ep(u.matmul(&p).unwrap()) - base).abs() < 1e-12);
            assert!((ep(p.matmul(&u).unwrap()) - base).abs() < 1e-12);
            let dressed = random_local(&mut rng).matmul(&u).unwrap().matmul(&random_local(&mut rng)).unwrap();
            assert!((ep(dressed) - base).abs() < 1e-12);
        }
    }
}

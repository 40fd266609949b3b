//! Derivative-free minimization (Nelder–Mead).

/// Stopping rules and simplex construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMeadOptions {
    /// Stop once every vertex is within this distance of the best vertex.
    pub diameter_tol: f64,
    pub max_evals: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Times the simplex is rebuilt around the best point after collapsing,
    /// budget permitting.
    pub rebuilds: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            diameter_tol: 1e-8,
            max_evals: 2000,
            initial_step: 0.5,
            rebuilds: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Counter<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        // NaN would poison every comparison below
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let best = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn sort(simplex: &mut [(Vec<f64>, f64)]) {
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
}

fn build_simplex<F: FnMut(&[f64]) -> f64>(x0: &[f64], step: f64, f: &mut Counter<F>) -> Vec<(Vec<f64>, f64)> {
    let mut simplex = Vec::with_capacity(x0.len() + 1);
    simplex.push((x0.to_vec(), f.eval(x0)));
    for k in 0..x0.len() {
        let mut x = x0.to_vec();
        x[k] += step;
        let v = f.eval(&x);
        simplex.push((x, v));
    }
    sort(&mut simplex);
    simplex
}

fn lerp(from: &[f64], to: &[f64], t: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
}

/// Minimize `f` starting from `x0`. Deterministic: no randomness inside.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    assert!(!x0.is_empty(), "nelder_mead needs at least one coordinate");
    let n = x0.len();
    let mut f = Counter { f, evals: 0 };
    let mut simplex = build_simplex(x0, opts.initial_step, &mut f);
    let mut rebuilds_left = opts.rebuilds;
    let mut converged = false;

    while f.evals < opts.max_evals {
        if diameter(&simplex) < opts.diameter_tol {
            converged = true;
            if rebuilds_left == 0 || f.evals + n + 1 > opts.max_evals {
                break;
            }
            rebuilds_left -= 1;
            // the best point is re-evaluated as the first vertex, so nothing is lost
            let best = simplex[0].0.clone();
            simplex = build_simplex(&best, opts.initial_step, &mut f);
            converged = false;
            continue;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|(x, _)| x[k]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let best_v = simplex[0].1;
        let second_worst_v = simplex[n - 1].1;

        let xr = lerp(&centroid, &worst.0, -REFLECT);
        let vr = f.eval(&xr);
        if vr < best_v {
            let xe = lerp(&centroid, &worst.0, -EXPAND);
            let ve = f.eval(&xe);
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
        } else if vr < second_worst_v {
            simplex[n] = (xr, vr);
        } else {
            let (xc, vc) = if vr < worst.1 {
                let xc = lerp(&centroid, &xr, CONTRACT);
                let vc = f.eval(&xc);
                (xc, vc)
            } else {
                let xc = lerp(&centroid, &worst.0, CONTRACT);
                let vc = f.eval(&xc);
                (xc, vc)
            };
            if vc < worst.1.min(vr) {
                simplex[n] = (xc, vc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = lerp(&best, &vertex.0, SHRINK);
                    let v = f.eval(&x);
                    *vertex = (x, v);
                }
            }
        }
        sort(&mut simplex);
    }

    if !converged {
        converged = diameter(&simplex) < opts.diameter_tol;
    }
    let (x, value) = simplex.swap_remove(0);
    Minimum {
        x,
        value,
        evals: f.evals,
        converged,
    }
}

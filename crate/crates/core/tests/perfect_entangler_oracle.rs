//! The hull test against direct maximization of output concurrence over
//! product inputs.

use entanglers::classify::{self, GateClass};
use entanglers::gates::{self, Gate};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_gates(seed: u64, n: usize) -> Vec<Gate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Gate::from_matrix("random", gates::random_unitary(4, &mut rng), 1e-10).unwrap())
        .collect()
}

#[test]
fn maximal_concurrence_follows_hull_distance() {
    // a perfect entangler reaches C = 1; otherwise the best is √(1 − d²)
    for (k, g) in random_gates(91, 60).iter().enumerate() {
        let hull = classify::hull_report(g, classify::DEFAULT_TOL).unwrap();
        let (best, _) = classify::max_product_concurrence(g, 30, k as u64).unwrap();
        let expected = if hull.perfect_entangler {
            1.0
        } else {
            (1.0 - hull.distance * hull.distance).sqrt()
        };
        assert!(
            (best - expected).abs() < 1e-9,
            "gate {k}: max C {best}, expected {expected} (hull distance {})",
            hull.distance
        );
    }
}

#[test]
fn catalog_maxima() {
    for (name, expected) in [("cnot", 1.0), ("sqrt_swap", 1.0), ("swap", 0.0), ("identity", 0.0)] {
        let g = gates::catalog_gate(name, &[]).unwrap();
        let (best, _) = classify::max_product_concurrence(&g, 10, 1).unwrap();
        assert!((best - expected).abs() < 1e-9, "{name}: {best}");
    }
}

#[test]
fn local_dressing_keeps_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(92);
    for g in random_gates(93, 40) {
        let class = classify::classify(&g, classify::DEFAULT_TOL).unwrap();
        let dressed = g
            .sandwich(&gates::random_local(&mut rng), &gates::random_local(&mut rng))
            .unwrap();
        assert_eq!(classify::classify(&dressed, classify::DEFAULT_TOL).unwrap(), class);
        assert_ne!(class, GateClass::Local);
    }
}

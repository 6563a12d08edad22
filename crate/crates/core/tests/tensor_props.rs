mod common;

use common::{random_matrix, rel_err};
use proptest::prelude::*;
use sgrl::tensor::{adam_step, matmul, AdamState, Matrix, Rng};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matmul_is_associative(seed in any::<u64>(), m in 1usize..7, k in 1usize..7, n in 1usize..7, p in 1usize..7) {
        let mut rng = Rng::seed(seed);
        let a = random_matrix(m, k, -1.0, 1.0, &mut rng);
        let b = random_matrix(k, n, -1.0, 1.0, &mut rng);
        let c = random_matrix(n, p, -1.0, 1.0, &mut rng);
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        prop_assert!(rel_err(left.data(), right.data()) < 1e-9);
    }

    #[test]
    fn matmul_matches_naive_sum(seed in any::<u64>(), m in 1usize..9, k in 1usize..9, n in 1usize..9) {
        let mut rng = Rng::seed(seed);
        let a = random_matrix(m, k, -2.0, 2.0, &mut rng);
        let b = random_matrix(k, n, -2.0, 2.0, &mut rng);
        let c = matmul(&a, &b).unwrap();
        for i in 0..m {
            for j in 0..n {
                let naive: f64 = (0..k).map(|t| a.get(i, t) * b.get(t, j)).sum();
                prop_assert!((c.get(i, j) - naive).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn adam_moves_against_constant_gradient(g in prop_oneof![-5.0..-1e-3, 1e-3..5.0f64], lr in 1e-4..1e-1f64) {
        let mut p = Matrix::filled(1, 1, 0.0);
        let grad = Matrix::filled(1, 1, g);
        let mut st = AdamState::new(&[&p], lr);
        let mut prev = p.get(0, 0);
        for _ in 0..120 {
            p = adam_step(&mut st, &p, &grad).unwrap();
            let x = p.get(0, 0);
            let moved_down = if g > 0.0 { x < prev } else { x > prev };
            prop_assert!(moved_down);
            prev = x;
        }
    }
}

#[test]
fn rng_streams_reproduce() {
    let mut a = Rng::seed(2024);
    let mut b = Rng::seed(2024);
    for _ in 0..1000 {
        assert_eq!(a.gauss(0.0, 1.0).unwrap().to_bits(), b.gauss(0.0, 1.0).unwrap().to_bits());
    }
}

use hcm_core::transforms::{
    bipolar_matrix, build_binary_hadamard, dft, fwht, idft, ifwht, sylvester_sign, BinaryHadamard, HadamardOrder,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Sylvester matrix by repeated Kronecker product with [[1, 1], [1, -1]].
fn kron_sylvester(n: usize) -> Vec<Vec<i64>> {
    let mut m = vec![vec![1i64]];
    while m.len() < n {
        let k = m.len();
        let mut next = vec![vec![0i64; 2 * k]; 2 * k];
        for i in 0..k {
            for j in 0..k {
                next[i][j] = m[i][j];
                next[i][j + k] = m[i][j];
                next[i + k][j] = m[i][j];
                next[i + k][j + k] = -m[i][j];
            }
        }
        m = next;
    }
    m
}

fn row_times(v: &[f64], s: &[Vec<i64>]) -> Vec<f64> {
    let n = v.len();
    (0..n).map(|j| (0..n).map(|i| v[i] * s[i][j] as f64).sum()).collect()
}

#[test]
fn fwht_equals_sylvester_product_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for log in 0..=6 {
        let n = 1usize << log;
        let s = kron_sylvester(n);
        for i in 0..n {
            for j in 0..n {
                assert_eq!(sylvester_sign(i, j) as i64, s[i][j]);
            }
        }
        for _ in 0..20 {
            // small integers keep every partial sum exact
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1000i32..=1000) as f64).collect();
            assert_eq!(fwht(&v).unwrap(), row_times(&v, &s), "n = {n}");
            let r: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let fast = fwht(&r).unwrap();
            for (a, b) in fast.iter().zip(row_times(&r, &s)) {
                assert!((a - b).abs() < 1e-12);
            }
            let back = ifwht(&fast).unwrap();
            for (a, b) in back.iter().zip(&r) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn binary_matrix_matches_kron_oracle() {
    for n in [2, 4, 8, 16, 32, 64] {
        let h = build_binary_hadamard(HadamardOrder::new(n).unwrap());
        let s = kron_sylvester(n);
        let b = bipolar_matrix(HadamardOrder::new(n).unwrap());
        for i in 0..n {
            for j in 0..n {
                assert_eq!(h.get(i, j) as i64, (s[i][j] + 1) / 2);
                assert_eq!(h.get(i, j) + h.complement(i, j), 1);
                assert_eq!(b[i][j], s[i][j] as f64);
            }
            assert_eq!(h.row_weight(i), if i == 0 { n } else { n / 2 });
        }
    }
}

fn gram(h: &BinaryHadamard, complement: bool) -> Vec<Vec<usize>> {
    let n = h.order().get();
    let e = |i, t| if complement { h.complement(i, t) } else { h.get(i, t) } as usize;
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|t| e(i, t) * e(j, t)).sum()).collect())
        .collect()
}

#[test]
fn gram_identities() {
    for n in [4, 8, 16] {
        let h = BinaryHadamard::new(n).unwrap();
        let g = gram(&h, false);
        let gc = gram(&h, true);
        for i in 0..n {
            for j in 0..n {
                let want = match (i, j) {
                    (0, 0) => n,
                    (0, _) | (_, 0) => n / 2,
                    _ if i == j => n / 2,
                    _ => n / 4,
                };
                assert_eq!(g[i][j], want, "H H^T n={n} ({i},{j})");
                let want_c = match (i, j) {
                    (0, _) | (_, 0) => 0,
                    _ if i == j => n / 2,
                    _ => n / 4,
                };
                assert_eq!(gc[i][j], want_c, "Hc Hc^T n={n} ({i},{j})");
            }
        }
    }
}

fn naive_dft(v: &[Complex64]) -> Vec<Complex64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(t, x)| x * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (k * t) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn complex_vec(log_max: u32) -> impl Strategy<Value = Vec<Complex64>> {
    (0..=log_max).prop_flat_map(|log| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << log)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    })
}

proptest! {
    #[test]
    fn fwht_round_trip_prop(log in 0u32..=7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..1usize << log).map(|_| rng.random_range(-10.0..10.0)).collect();
        let back = ifwht(&fwht(&v).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&v) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fwht_parseval(log in 0u32..=7, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..1usize << log).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.len() as f64;
        let e: f64 = v.iter().map(|x| x * x).sum();
        let ef: f64 = fwht(&v).unwrap().iter().map(|x| x * x).sum();
        prop_assert!((ef - n * e).abs() < 1e-9 * (1.0 + n * e));
    }

    #[test]
    fn dft_matches_naive_and_round_trips(v in complex_vec(6)) {
        let fast = dft(&v).unwrap();
        for (a, b) in fast.iter().zip(naive_dft(&v)) {
            prop_assert!((a - b).norm() < 1e-10);
        }
        let back = idft(&fast).unwrap();
        for (a, b) in back.iter().zip(&v) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        let n = v.len() as f64;
        let e: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        let ef: f64 = fast.iter().map(|x| x.norm_sqr()).sum();
        prop_assert!((ef - n * e).abs() < 1e-9 * (1.0 + n * e));
    }
}

#[test]
fn rejects_non_power_of_two() {
    assert!(fwht(&[1.0, 2.0, 3.0]).is_err());
    assert!(dft(&[Complex64::new(0.0, 0.0); 6]).is_err());
    assert!(HadamardOrder::new(0).is_err());
    assert!(BinaryHadamard::new(12).is_err());
}

//! Exhaustive checks of the HCM waveform bounds over every OOK data vector.

use hcm_core::hcm::HcmCodec;

fn data(n: usize, mask: usize) -> Vec<f64> {
    (0..n).map(|k| if k > 0 && (mask >> (k - 1)) & 1 == 1 { 1.0 } else { 0.0 }).collect()
}

fn complement(u: &[f64]) -> Vec<f64> {
    u.iter().enumerate().map(|(k, &x)| if k == 0 { 0.0 } else { 1.0 - x }).collect()
}

fn span(x: &[f64]) -> (f64, f64) {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

#[test]
fn range_bound_and_complement_identity() {
    for n in [4usize, 8, 16] {
        let codec = HcmCodec::new(n, 2).unwrap();
        let root = (n as f64).sqrt();
        let top = (n as f64 - 1.0) / root;
        let mut equality = 0;
        for mask in 0..1usize << (n - 1) {
            let u = data(n, mask);
            let x = codec.encode(&u).unwrap();
            let (lo, hi) = span(&x);
            assert!(hi - lo <= root / 2.0 + 1e-12, "n={n} mask={mask:b}: span {}", hi - lo);
            if (hi - lo - root / 2.0).abs() < 1e-12 {
                equality += 1;
            }
            assert!(lo >= -1e-12 && hi <= top + 1e-12);

            let xc = codec.encode(&complement(&u)).unwrap();
            for (a, b) in x.iter().zip(&xc) {
                assert!((a + b - top).abs() < 1e-12);
            }
            let (lo_c, _) = span(&xc);
            assert!(lo + lo_c >= (n as f64 / 2.0 - 1.0) / root - 1e-12);

            // DC removal keeps the block range and leaves the data untouched
            let d = codec.dcr_encode(&u).unwrap();
            let (dlo, dhi) = span(&d);
            assert_eq!(dlo, 0.0);
            assert!((dhi - (hi - lo)).abs() < 1e-12);
            let v = codec.decode(&d).unwrap();
            for k in 1..n {
                assert!((v[k] - (u[k] - 0.5)).abs() < 1e-12);
            }
        }
        // all-zero data spans the full bound
        assert!(equality >= 1, "n={n}");
    }
}

#[test]
fn chip_mean_is_data_independent() {
    for n in [4usize, 8] {
        let codec = HcmCodec::new(n, 2).unwrap();
        let want = (n as f64 - 1.0) / (2.0 * (n as f64).sqrt());
        for mask in 0..1usize << (n - 1) {
            let x = codec.encode(&data(n, mask)).unwrap();
            let mean = x.iter().sum::<f64>() / n as f64;
            assert!((mean - want).abs() < 1e-12);
        }
    }
}

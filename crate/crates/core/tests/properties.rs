use proptest::prelude::*;
use qary_cs::linalg::{norm2, squared_distance};
use qary_cs::recovery::{correlation_vector, recover_closed_form, recover_proximal};
use qary_cs::sensing::{hamming_distance, sense};
use qary_cs::signals::{gauss_bernoulli, haar2d_forward, haar2d_inverse, threshold_top_k, ImagePlane};
use qary_cs::simplex::build_simplex_code;
use qary_cs::{CorrelationVector, MeasurementVector, NoiseSpec, RecoveryConfig, SensingEnsemble};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn pow2_side() -> impl Strategy<Value = usize> {
    prop_oneof![Just(8usize), Just(16), Just(32), Just(64)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn haar_round_trip_and_parseval(w in pow2_side(), h in pow2_side(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels: Vec<f64> = (0..w * h).map(|_| rng.random_range(-1.0..1.0)).collect();
        let img = ImagePlane::new(w, h, pixels).unwrap();
        let c = haar2d_forward(&img).unwrap();
        prop_assert!((norm2(&c) - norm2(img.pixels())).abs() < 1e-10);
        let back = haar2d_inverse(&c, w, h).unwrap();
        for (a, b) in back.pixels().iter().zip(img.pixels()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn top_k_is_best_k_sparse_approximation(v in prop::collection::vec(-5.0f64..5.0, 1..=8), k_frac in 0.0f64..1.0) {
        let n = v.len();
        let k = 1 + ((n - 1) as f64 * k_frac) as usize;
        let kept = threshold_top_k(&v, k).unwrap();
        let err = squared_distance(&v, &kept);
        // brute force over every support of size k
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let dropped: f64 = (0..n).filter(|i| mask & (1 << i) == 0).map(|i| v[i] * v[i]).sum();
            best = best.min(dropped);
        }
        prop_assert!((err - best).abs() < 1e-12);
        prop_assert!(kept.iter().filter(|x| **x != 0.0).count() <= k);
    }

    #[test]
    fn sensing_is_scale_invariant(seed in any::<u64>(), q in 2usize..9, c in 0.01f64..1.0) {
        let d = 12;
        let code = build_simplex_code(q).unwrap();
        let ens = SensingEnsemble::new(seed, 40, q, d).unwrap();
        let x = gauss_bernoulli(d, 4, seed).unwrap().vector;
        let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
        let a = sense(&ens, &code, &x, NoiseSpec::Noiseless).unwrap();
        let b = sense(&ens, &code, &scaled, NoiseSpec::Noiseless).unwrap();
        prop_assert_eq!(a.symbols(), b.symbols());
    }

    #[test]
    fn closed_form_sign_norm_and_sparsity(xi in prop::collection::vec(-3.0f64..3.0, 1..30), e1 in 0.0f64..3.0, e2 in 0.0f64..3.0) {
        let cv = CorrelationVector::new(xi.clone(), 1).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = recover_closed_form(&cv, lo);
        let b = recover_closed_form(&cv, hi);
        for (u, x) in a.x.iter().zip(&xi) {
            if *u != 0.0 {
                prop_assert_eq!(u.signum(), x.signum());
            }
        }
        if !a.degenerate {
            let n = norm2(&a.x);
            prop_assert!(n > 0.0 && n <= 1.0 + 1e-9);
        }
        let support = |v: &[f64]| v.iter().filter(|t| **t != 0.0).count();
        prop_assert!(support(&b.x) <= support(&a.x));
    }

    #[test]
    fn proximal_output_stays_in_ball(xi in prop::collection::vec(-2.0f64..2.0, 1..15), eta in 0.0f64..1.0, seed in any::<u64>()) {
        let cv = CorrelationVector::new(xi, 1).unwrap();
        let r = recover_proximal(&cv, &RecoveryConfig { eta, seed, max_iters: 200, ..Default::default() }).unwrap();
        prop_assert!(norm2(&r.x) <= 1.0 + 1e-9);
    }

    #[test]
    fn measurement_text_round_trip(symbols in prop::collection::vec(0usize..7, 1..50), sigma in 0.0f64..3.0, seed in any::<u64>(), which in 0u8..3) {
        let noise = match which {
            0 => NoiseSpec::Noiseless,
            1 => NoiseSpec::PreQuantGaussian { sigma, seed },
            _ => NoiseSpec::SymbolFlip { p: 0.5 + sigma / 6.0 + 1e-9, seed },
        };
        let y = MeasurementVector::new(symbols, 7, noise).unwrap();
        let back: MeasurementVector = y.to_string().parse().unwrap();
        prop_assert_eq!(back, y);
    }
}

#[test]
fn simplex_gram_for_all_small_q() {
    for q in 2..=64 {
        let code = build_simplex_code(q).unwrap();
        let g = code.gram();
        let off = -1.0 / (q as f64 - 1.0);
        for i in 0..q {
            for j in 0..q {
                let want = if i == j { 1.0 } else { off };
                assert!((g[i * q + j] - want).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn flip_statistics() {
    let (d, m) = (10, 40_000);
    for (q, p) in [(2, 0.6), (5, 0.75), (16, 0.9)] {
        let code = build_simplex_code(q).unwrap();
        let ens = SensingEnsemble::new(1, m, q, d).unwrap();
        let x = gauss_bernoulli(d, 3, 2).unwrap().vector;
        let clean = sense(&ens, &code, &x, NoiseSpec::Noiseless).unwrap();
        let noisy = sense(&ens, &code, &x, NoiseSpec::SymbolFlip { p, seed: 8 }).unwrap();
        let frac = hamming_distance(&clean, &noisy).unwrap();
        let expected = (1.0 - p) * (1.0 - 1.0 / q as f64);
        let se = (expected * (1.0 - expected) / m as f64).sqrt();
        assert!((frac - expected).abs() <= 3.0 * se, "q={q} p={p}: {frac} vs {expected}");
    }
}

#[test]
fn gaussian_noise_perturbs_some_symbols() {
    let (d, m, q) = (10, 2000, 8);
    let code = build_simplex_code(q).unwrap();
    let ens = SensingEnsemble::new(4, m, q, d).unwrap();
    let x = gauss_bernoulli(d, 3, 2).unwrap().vector;
    let clean = sense(&ens, &code, &x, NoiseSpec::Noiseless).unwrap();
    let mut prev = 0.0;
    for sigma in [0.2, 0.8, 3.0] {
        let noisy = sense(&ens, &code, &x, NoiseSpec::PreQuantGaussian { sigma, seed: 3 }).unwrap();
        let h = hamming_distance(&clean, &noisy).unwrap();
        assert!(h > prev, "sigma={sigma}: {h}");
        prev = h;
    }
}

#[test]
fn sensing_is_deterministic() {
    let code = build_simplex_code(6).unwrap();
    let ens = SensingEnsemble::new(12, 500, 6, 30).unwrap();
    let x = gauss_bernoulli(30, 5, 1).unwrap().vector;
    let noise = NoiseSpec::PreQuantGaussian { sigma: 0.5, seed: 77 };
    assert_eq!(sense(&ens, &code, &x, noise).unwrap(), sense(&ens, &code, &x, noise).unwrap());
    let y = sense(&ens, &code, &x, noise).unwrap();
    assert_eq!(
        correlation_vector(&ens, &code, &y).unwrap(),
        correlation_vector(&ens, &code, &y).unwrap()
    );
}

#[test]
fn gauss_bernoulli_support_is_uniform() {
    let (d, s, trials) = (20, 5, 6000);
    let mut counts = vec![0usize; d];
    for seed in 0..trials {
        for i in gauss_bernoulli(d, s, seed as u64).unwrap().support() {
            counts[i] += 1;
        }
    }
    let p = s as f64 / d as f64;
    let se = (p * (1.0 - p) / trials as f64).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        let freq = c as f64 / trials as f64;
        assert!((freq - p).abs() <= 3.0 * se, "coordinate {i}: {freq}");
    }
}

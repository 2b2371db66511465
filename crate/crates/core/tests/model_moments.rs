use lowrank_core::model::sample_gaussian_model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn gaussian_signal_has_requested_entry_variance() {
    for scale in [1.0, 2.5] {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let draws = 100;
        let mut acc = 0.0;
        for _ in 0..draws {
            let gt = sample_gaussian_model(30, 40, 3, scale, 0.0, &mut rng).unwrap();
            acc += gt.z.frobenius_norm_sq() / 1200.0;
        }
        let avg = acc / draws as f64;
        let target = scale * scale;
        assert!((avg - target).abs() <= 0.1 * target, "scale {scale}: {avg}");
    }
}

#[test]
fn noise_sd_within_five_percent() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for sigma in [0.05, 0.5, 3.0] {
        let gt = sample_gaussian_model(100, 120, 4, 1.0, sigma, &mut rng).unwrap();
        let e = gt.y.sub(&gt.z).unwrap();
        let n = e.data().len() as f64;
        let mean = e.data().iter().sum::<f64>() / n;
        let sd = (e.data().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((sd - sigma).abs() <= 0.05 * sigma, "sigma {sigma}: sd {sd}");
    }
}

#[test]
fn factors_are_valid_for_both_samplers() {
    let mut rng = ChaCha8Rng::seed_from_u64(79);
    for q in 1..=6 {
        let g = sample_gaussian_model(25, 18, q, 1.0, 0.1, &mut rng).unwrap();
        let b = lowrank_core::model::sample_bayes_model(25, 18, q, 1.5, 0.1, &mut rng).unwrap();
        for f in [&g.factors, &b.factors] {
            assert_eq!(f.rank(), q);
            assert!(f.orthonormality_error() <= 1e-8);
            assert!(f.theta().windows(2).all(|w| w[0] >= w[1]));
            assert!(f.theta().iter().all(|&t| t >= 0.0));
        }
    }
}

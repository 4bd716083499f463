use aircomp_core::analytical::rician_mean;
use aircomp_core::model::{sample_fading, sample_ppp, sample_ppp_disc, InnerRegion, NetworkParams, Window};
use aircomp_core::montecarlo::{campbell_check, estimate_mse, iteration_rng, realization_mse, MonteCarlo};
use aircomp_core::specfun::{rician_ccdf, RicianParams};
use aircomp_core::Error;

fn scenario(lambda: f64, radius: f64) -> NetworkParams<f64> {
    NetworkParams {
        lambda,
        radius,
        ..NetworkParams::reference()
    }
}

#[test]
fn fading_has_unit_power_and_matching_tail() {
    let n = 200_000;
    for &b in &[0.0, 15.0] {
        let rp = RicianParams::new(b).unwrap();
        let mut rng = iteration_rng(11, 0);
        let samples: Vec<f64> = (0..n).map(|_| sample_fading(&mut rng, &rp)).collect();
        let power = samples.iter().map(|h| h * h).sum::<f64>() / n as f64;
        // fourth moment of |h| is at most 2 for unit power
        assert!((power - 1.0).abs() < 5.0 * (1.0 / n as f64).sqrt(), "B = {b}: {power}");
        let mean = samples.iter().sum::<f64>() / n as f64;
        assert!((mean - rician_mean(&rp).unwrap()).abs() < 5.0 / (n as f64).sqrt());
        for &v in &[0.5, 0.9, 1.1, 1.5] {
            let p = rician_ccdf(v, &rp).unwrap();
            let emp = samples.iter().filter(|&&h| h > v).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt().max(1e-6);
            assert!((emp - p).abs() < 5.0 * se, "B = {b}, v = {v}: {emp} vs {p}");
        }
    }
}

#[test]
fn layouts_have_poisson_counts_and_uniform_area() {
    let np = scenario(0.05, 15.0);
    let n = 4000;
    let mut counts = Vec::with_capacity(n);
    let mut distances = Vec::new();
    for i in 0..n {
        let mut rng = iteration_rng(5, i as u64);
        let re = sample_ppp_disc(&mut rng, &np).unwrap();
        counts.push(re.len() as f64);
        distances.extend(re.devices.iter().map(|d| d.distance));
    }
    let mean = counts.iter().sum::<f64>() / n as f64;
    let x = np.mean_device_count();
    assert!((mean - x).abs() < 4.0 * (x / n as f64).sqrt(), "{mean} vs {x}");
    let var = counts.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1) as f64;
    assert!((var / x - 1.0).abs() < 0.1);

    // Kolmogorov-Smirnov against F(d) = d²/R²
    distances.sort_by(f64::total_cmp);
    let m = distances.len() as f64;
    let ks = distances
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let f = d * d / (np.radius * np.radius);
            (f - i as f64 / m).abs().max(((i + 1) as f64 / m - f).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 1.63 / m.sqrt(), "KS statistic {ks} over {m} points");
}

#[test]
fn square_window_matches_disc_density() {
    let np = scenario(0.05, 15.0);
    let n = 3000;
    let total: usize = (0..n)
        .map(|i| {
            let mut rng = iteration_rng(9, i);
            sample_ppp(&mut rng, &np, Window::Square { side: 40.0 }).unwrap().len()
        })
        .sum();
    let mean = total as f64 / n as f64;
    let x = np.mean_device_count();
    assert!((mean - x).abs() < 4.0 * (x / n as f64).sqrt());

    let mut rng = iteration_rng(9, 0);
    assert!(matches!(
        sample_ppp(&mut rng, &np, Window::Square { side: 20.0 }),
        Err(Error::Config(_))
    ));
}

#[test]
fn campbell_functionals_agree() {
    let rep = campbell_check(&scenario(0.05, 15.0), 10_000, 3).unwrap();
    assert_eq!(rep.entries.len(), 3);
    assert!(rep.max_abs_z() <= 3.0, "{rep:?}");
    assert!(campbell_check(&scenario(0.05, 15.0), 10, 3).is_err());
}

#[test]
fn empty_layout_and_all_empty_runs() {
    let np = scenario(0.05, 15.0);
    let mut rng = iteration_rng(1, 0);
    let mut re = sample_ppp_disc(&mut rng, &np).unwrap();
    re.devices.clear();
    assert!(matches!(
        realization_mse(&re, 1.0, &np, InnerRegion::Clamp),
        Err(Error::EmptyRealization)
    ));

    let sparse = NetworkParams {
        lambda: 1e-9,
        radius: 2.0,
        ..np
    };
    let err = estimate_mse(&sparse, 1.0, 50, 1, InnerRegion::Clamp).unwrap_err();
    assert!(matches!(err.root(), Error::NoNonEmptyRealizations { n_total: 50 }));
}

#[test]
fn annulus_mode_drops_inner_devices() {
    let np = scenario(0.3, 3.0);
    let mc = MonteCarlo::new(1, 17, InnerRegion::Annulus);
    let found = (0..200).any(|i| {
        let re = mc.realization(&np, i).unwrap();
        let inner = re.devices.iter().filter(|d| d.distance < 1.0).count();
        inner > 0 && inner < re.len() && {
            let clamp = realization_mse(&re, 1.0, &np, InnerRegion::Clamp).unwrap();
            let annulus = realization_mse(&re, 1.0, &np, InnerRegion::Annulus).unwrap();
            clamp != annulus
        }
    });
    assert!(found);
}

#[test]
fn results_independent_of_worker_count() {
    let np = scenario(0.05, 10.0);
    let mc = MonteCarlo::new(3000, 42, InnerRegion::Clamp);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc.estimate_mse(&np, 5.0).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    assert_eq!(a.n_used, b.n_used);
}

#[test]
fn standard_error_shrinks_with_iterations() {
    let np = scenario(0.05, 10.0);
    let small = estimate_mse(&np, 5.0, 2_000, 8, InnerRegion::Clamp).unwrap();
    let large = estimate_mse(&np, 5.0, 32_000, 8, InnerRegion::Clamp).unwrap();
    let ratio = large.std_error / small.std_error;
    assert!((ratio - 0.25).abs() < 0.05, "ratio {ratio}");
    assert!((large.mean - small.mean).abs() < 4.0 * small.std_error);
}

use aircomp_core::analytical::{
    eta_upper_bound, mse_analytic, mse_analytic_both, optimize_eta, rician_mean, MseVariant,
};
use aircomp_core::model::NetworkParams;
use aircomp_core::specfun::{marcum_q1, poisson_inverse_moment};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn scenario(lambda: f64, radius: f64) -> NetworkParams<f64> {
    NetworkParams {
        lambda,
        radius,
        ..NetworkParams::reference()
    }
}

#[test]
fn variant_gap_is_the_weighted_inversion_integral() {
    for &(lambda, radius, eta) in &[(0.05, 15.0, 3.0), (0.01, 40.0, 12.0), (0.1, 10.0, 0.5)] {
        let np = scenario(lambda, radius);
        let rp = np.rician().unwrap();
        let [printed, rederived] = mse_analytic_both(&np, eta).unwrap();
        let k = poisson_inverse_moment(np.mean_device_count()).unwrap();
        let integral = simpson(
            |r| {
                let b = np.capping_threshold(r, eta) / rp.sigma;
                2.0 * r * marcum_q1(rp.noncentrality(), b).unwrap()
            },
            1.0,
            radius,
            4000,
        );
        let gap = k * 2.0 * std::f64::consts::PI * lambda * integral;
        let got = printed.total - rederived.total;
        assert!((got / gap - 1.0).abs() < 1e-7, "gap {got} vs {gap}");
    }
}

#[test]
fn breakdown_components_are_consistent() {
    let np = scenario(0.05, 15.0);
    for variant in MseVariant::ALL {
        let b = mse_analytic(&np, 4.0, variant).unwrap();
        assert_eq!(b.variant, variant);
        assert_eq!(b.geometry_term, 0.5 * (15.0 * 15.0 - 1.0));
        assert_eq!(b.noise_term, 0.25);
        let campbell = 2.0 * std::f64::consts::PI * np.lambda;
        let total = b.k_factor * (campbell * (b.capped_term + b.geometry_term + b.marcumq_term) + b.noise_term);
        assert!((total - b.total).abs() <= 1e-15 * b.total);
    }
}

#[test]
fn rederived_never_below_noise_floor() {
    for &eta in &[1e-3, 0.1, 3.0, 100.0, 1e4] {
        for &(lambda, radius) in &[(0.01, 10.0), (0.05, 15.0), (0.1, 40.0)] {
            let np = scenario(lambda, radius);
            let b = mse_analytic(&np, eta, MseVariant::Rederived).unwrap();
            assert!(b.total >= b.k_factor * np.noise_power / eta * (1.0 - 1e-9));
            let p = mse_analytic(&np, eta, MseVariant::AsPrinted).unwrap();
            assert!(p.total >= b.total);
        }
    }
}

#[test]
fn unlimited_power_leaves_only_noise() {
    let np = NetworkParams {
        p_max: 1e14,
        ..scenario(0.05, 15.0)
    };
    let eta = 2.0;
    let b = mse_analytic(&np, eta, MseVariant::Rederived).unwrap();
    let floor = b.k_factor * np.noise_power / eta;
    assert!((b.total / floor - 1.0).abs() < 1e-6, "{} vs {floor}", b.total);
}

#[test]
fn invalid_inputs_are_rejected() {
    let np = scenario(0.05, 15.0);
    assert!(mse_analytic(&np, 0.0, MseVariant::Rederived).is_err());
    assert!(mse_analytic(&np, -1.0, MseVariant::Rederived).is_err());
    let bad = NetworkParams { radius: 0.5, ..np };
    assert!(mse_analytic(&bad, 1.0, MseVariant::Rederived).is_err());
    let bad = NetworkParams { lambda: -0.1, ..np };
    assert!(optimize_eta(&bad, MseVariant::Rederived).is_err());
}

#[test]
fn single_precision_tracks_double() {
    let np64 = scenario(0.05, 15.0);
    let np32 = NetworkParams::<f32> {
        lambda: 0.05,
        radius: 15.0,
        alpha: 2.1,
        epsilon: 1.0,
        rician_b: 15.0,
        p_max: 1000.0,
        noise_power: 1.0,
        wavelength: 0.3,
    };
    let a = mse_analytic(&np32, 3.0f32, MseVariant::Rederived).unwrap().total as f64;
    let b = mse_analytic(&np64, 3.0, MseVariant::Rederived).unwrap().total;
    assert!((a / b - 1.0).abs() < 1e-3, "{a} vs {b}");
}

#[test]
fn optimum_is_a_local_minimum_inside_the_bound() {
    for &radius in &[5.0, 15.0, 40.0] {
        let np = scenario(0.05, radius);
        for variant in MseVariant::ALL {
            let opt = optimize_eta(&np, variant).unwrap();
            assert!(!opt.at_boundary());
            assert!(opt.eta <= opt.search_upper && opt.eta >= opt.search_lower);
            for f in [0.9, 1.1] {
                let nearby = mse_analytic(&np, opt.eta * f, variant).unwrap().total;
                assert!(opt.mse <= nearby, "R = {radius} {variant}: {} > {nearby}", opt.mse);
            }
        }
    }
}

#[test]
fn bound_readings() {
    let np = scenario(0.05, 15.0);
    let b = eta_upper_bound(&np).unwrap();
    let (r, ae) = (15.0f64, 2.1f64);
    let derived = 1000.0 * (2.0 * (r.powi(3) - 1.0) / (3.0 * r * r)).powf(ae);
    assert!((b.moment_derived / derived - 1.0).abs() < 1e-12);
    // the two readings are reciprocal up to the P_max² factor
    assert!((b.moment_printed * b.moment_derived / 1e6 - 1.0).abs() < 1e-12);
    assert_eq!(b.moment_term(), b.moment_derived);
    assert!(b.eta_hat >= b.moment_term() && b.eta_hat >= b.ratio_term);
    let sigma = (1.0f64 / 32.0).sqrt();
    assert!((b.printed_fading_mean - (std::f64::consts::FRAC_PI_2).sqrt() * sigma).abs() < 1e-15);
    assert!((b.exact_fading_mean - rician_mean(&np.rician().unwrap()).unwrap()).abs() < 1e-15);
    assert!(b.exact_fading_mean > 0.95 && b.exact_fading_mean < 1.0);
}

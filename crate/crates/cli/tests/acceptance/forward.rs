use super::Outcome;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratscat_core::geometry::{critical_omega_n, map_reflect, map_transmit, Direction};
use stratscat_core::media::{Layer, StratifiedProfile};
use stratscat_core::spectral1d::{guided_modes, mode_count, solve_phi_plus, Regime};

/// Closed-form vertical wavenumber `λ √(1/c² - (1 - ω_n²)/c₊²)` on a propagating side.
fn q(lambda: f64, wn: f64, c: f64, c_plus: f64) -> f64 {
    lambda * (1.0 / (c * c) - (1.0 - wn * wn) / (c_plus * c_plus)).sqrt()
}

pub fn fresnel() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let cp = rng.gen_range(0.5..2.0);
        let cm = cp * rng.gen_range(1.0..2.0);
        let p = StratifiedProfile::two_layer(cp, cm, 1.0).unwrap();
        let lam = rng.gen_range(0.5..12.0);
        let crit = critical_omega_n(&p);
        let wn = rng.gen_range((crit + 0.05).min(0.99)..1.0);
        let s = match solve_phi_plus(&p, lam, wn, 1e-3) {
            Ok(s) => s,
            Err(e) => return Outcome::new(false, format!("cp {cp}, cm {cm}, wn {wn}: {e}")),
        };
        let (qp, qm) = (q(lam, wn, cp, cp), q(lam, wn, cm, cp));
        let r = Complex64::new((qp - qm) / (qp + qm), 0.0);
        let t = Complex64::new(2.0 * qp / (qp + qm), 0.0);
        worst = worst.max((s.coefficients.r - r).norm()).max((s.coefficients.t - t).norm());
    }
    Outcome::new(worst < 1e-8, format!("max |ΔR|, |ΔT| over 200 samples = {worst:.2e} (tol 1e-8)"))
}

pub fn total_internal_reflection() -> Outcome {
    let delta = 0.02;
    let step = StratifiedProfile::two_layer(1.0, 2.0, 1.0).unwrap();
    let graded = StratifiedProfile::new(
        vec![
            Layer { y_lo: -1.0, y_hi: -0.2, poly: vec![1.6, 0.1, 0.05] },
            Layer::constant(-0.2, 0.3, 0.7),
            Layer { y_lo: 0.3, y_hi: 1.0, poly: vec![1.0, -0.2, 0.2] },
        ],
        1.0,
        2.0,
        1.0,
    )
    .unwrap();
    let crit = critical_omega_n(&step);
    let mut worst = 0.0f64;
    let mut n = 0;
    for p in [&step, &graded] {
        for lam in [0.5, 2.0, 7.0, 15.0] {
            for i in 0..25 {
                let wn = delta + (crit - 2.0 * delta) * (i as f64 + 0.5) / 25.0;
                match solve_phi_plus(p, lam, wn, delta) {
                    Ok(s) if s.coefficients.regime == Regime::Evanescent => {
                        worst = worst.max((s.coefficients.r.norm() - 1.0).abs());
                        n += 1;
                    }
                    Ok(_) => return Outcome::new(false, format!("wn {wn} not evanescent")),
                    Err(e) => return Outcome::new(false, format!("wn {wn}: {e}")),
                }
            }
        }
    }
    Outcome::new(worst < 1e-10, format!("max ||R|-1| over {n} samples = {worst:.2e} (tol 1e-10)"))
}

fn random_profile(rng: &mut ChaCha8Rng) -> StratifiedProfile {
    let y_m = rng.gen_range(0.5..2.0);
    let n = rng.gen_range(2..7);
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-y_m..y_m)).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![-y_m];
    edges.extend(cuts);
    edges.push(y_m);
    let layers = edges
        .windows(2)
        .filter(|w| w[1] - w[0] > 1e-3)
        .map(|w| {
            let c = rng.gen_range(0.6..2.0);
            let slope = if rng.gen_bool(0.5) { rng.gen_range(-0.1..0.1) } else { 0.0 };
            Layer { y_lo: w[0], y_hi: w[1], poly: vec![c, slope] }
        })
        .collect::<Vec<_>>();
    let mut layers = layers;
    layers[0].y_lo = -y_m;
    let last = layers.len() - 1;
    layers[last].y_hi = y_m;
    for i in 1..layers.len() {
        layers[i].y_lo = layers[i - 1].y_hi;
    }
    let cp = rng.gen_range(0.7..1.5);
    let cm = cp * rng.gen_range(1.0..1.8);
    StratifiedProfile::new(layers, cp, cm, y_m).unwrap()
}

pub fn wronskian() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let p = random_profile(&mut rng);
        let lam = rng.gen_range(0.5..10.0);
        let crit = critical_omega_n(&p);
        let wn = rng.gen_range((crit + 0.05).min(0.99)..1.0);
        let s = match solve_phi_plus(&p, lam, wn, 1e-3) {
            Ok(s) => s,
            Err(e) => return Outcome::new(false, format!("profile {trial}: {e}")),
        };
        let w = s.wronskian_conj();
        let w0 = w[w.len() - 1];
        let scale = s.k_in.abs() * s.values.iter().map(|f| f.norm_sqr()).fold(0.0, f64::max);
        for v in &w {
            worst = worst.max((v - w0).norm() / scale);
        }
    }
    Outcome::new(worst < 1e-8, format!("max relative Wronskian drift over 100 profiles = {worst:.2e} (tol 1e-8)"))
}

pub fn mode_monotonicity() -> Outcome {
    let p = StratifiedProfile::new(
        vec![Layer::constant(-2.0, -1.0, 1.0), Layer::constant(-1.0, 1.0, 0.5), Layer::constant(1.0, 2.0, 1.0)],
        1.0,
        1.0,
        2.0,
    )
    .unwrap();
    let at = |k: f64| guided_modes(&p, k).unwrap();
    if at(2.0).len() != 3 {
        return Outcome::new(false, format!("{} modes at kappa = 2, expected 3", at(2.0).len()));
    }
    let h = 1e-4;
    let (mut min_slope, mut samples) = (f64::INFINITY, 0);
    for i in 0..40 {
        let k = 0.3 + 0.1 * i as f64;
        let (a, b) = (at(k), at(k + h));
        let sturm = mode_count(&p, k, p.c_plus() * p.c_plus() * k * k);
        if sturm != a.len() {
            return Outcome::new(false, format!("kappa {k}: Sturm count {sturm} vs {} eigenvalues", a.len()));
        }
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            min_slope = min_slope.min((y.sqrt() - x.sqrt()) / h);
            samples += 1;
        }
    }
    Outcome::new(
        min_slope > 0.0,
        format!("3 modes at kappa = 2; min dλ_j/dκ over {samples} samples = {min_slope:.3e}; Sturm counts agree"),
    )
}

pub fn map_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let same = StratifiedProfile::constant(1.0, 1.0).unwrap();
    let step = StratifiedProfile::two_layer(1.0, 1.7, 1.0).unwrap();
    let delta = 1e-3;
    let (mut inv, mut anti, mut snell) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let v: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let w = Direction([v[0] / n, v[1] / n, v[2] / n]);
        if w.omega_n().abs() <= delta {
            continue;
        }
        let back = map_reflect(map_reflect(w, delta).unwrap(), delta).unwrap();
        inv = inv.max((0..3).map(|i| (back.0[i] - w.0[i]).abs()).fold(0.0, f64::max));
        let t = map_transmit(w, &same, delta).unwrap();
        anti = anti.max((0..3).map(|i| (t.0[i] + w.0[i]).abs()).fold(0.0, f64::max));
        if let Ok(t) = map_transmit(w, &step, delta) {
            let (c_in, c_out) = if w.omega_n() > 0.0 { (1.0, 1.7) } else { (1.7, 1.0) };
            for i in 0..2 {
                snell = snell.max((t.0[i] / c_out + w.0[i] / c_in).abs());
            }
        }
    }
    let pass = inv < 1e-12 && anti < 1e-12 && snell < 1e-12;
    Outcome::new(pass, format!("involution {inv:.1e}, antipodal {anti:.1e}, Snell {snell:.1e} over 1000 directions (tol 1e-12)"))
}

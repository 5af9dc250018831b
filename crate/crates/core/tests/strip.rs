use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratscat_core::geometry::Direction;
use stratscat_core::inverse::{
    calibrate_symbol_constant, layer_strip, synthesize_symbols, w_from_gammas, InverseError, ScatteringSymbolData, StripConfig,
    SymbolMode,
};
use stratscat_core::media::{Hemisphere, PerturbationExpansion, StratifiedProfile};
use stratscat_core::parametrix::ParametrixConfig;
use stratscat_core::sphharm::HarmonicTable;

const B: usize = 9;
const LAMBDA: f64 = 2.0;

fn slab() -> StratifiedProfile {
    StratifiedProfile::slab(1.0, 1.3, 0.5, 1.0).unwrap()
}

/// Random table of degree `< B`; `keep(l, m)` selects the populated entries.
fn table(seed: u64, scale: f64, keep: impl Fn(usize, i64) -> bool) -> HarmonicTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = HarmonicTable::zeros(B - 1);
    for l in 0..B {
        for m in -(l as i64)..=(l as i64) {
            if keep(l, m) {
                t.set(l, m, scale * rng.gen_range(-1.0..1.0) / (1.0 + l as f64));
            }
        }
    }
    t
}

fn rel_l2(a: &HarmonicTable, b: &HarmonicTable) -> f64 {
    let d: f64 = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).powi(2)).sum();
    d.sqrt() / b.l2_norm()
}

fn abs_l2(a: &HarmonicTable, b: &HarmonicTable) -> f64 {
    a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn data(p: &StratifiedProfile, e: &PerturbationExpansion, orders: &[usize], mode: SymbolMode) -> Vec<ScatteringSymbolData> {
    let cfg = StripConfig::new(LAMBDA, B);
    orders.iter().map(|k| synthesize_symbols(p, e, *k, mode, &cfg).unwrap()).collect()
}

#[test]
fn series_coefficients_match_exact_speed() {
    let (c, lambda) = (1.3, 2.5);
    let g = [0.0, 0.3, -0.2, 0.1];
    let r = 40.0f64;
    let gr: f64 = (1..4).map(|j| g[j] * r.powi(-(j as i32))).sum();
    let exact = lambda * lambda * ((c + gr).powi(-2) - c.powi(-2));
    let series: f64 = (1..=8).map(|k| w_from_gammas(&g, c, lambda, k) * r.powi(-(k as i32))).sum();
    assert!((exact - series).abs() < 1e-14, "{exact} vs {series}");
}

#[test]
fn zero_perturbation_gives_zero_layers() {
    let p = slab();
    let e = PerturbationExpansion::new(3, 1.0);
    let rep = layer_strip(&data(&p, &e, &[3, 4], SymbolMode::Transmitted), &p).unwrap();
    assert_eq!(rep.gammas.len(), 2);
    assert!(rep.gammas.iter().all(|g| g.table.l2_norm() == 0.0));
}

#[test]
fn single_layer_recovered_in_transmitted_mode() {
    let p = slab();
    for (j, parity) in [(4usize, 0usize), (4, 1), (3, 0), (3, 1)] {
        let planted = table(10 + j as u64 + parity as u64, 0.1, |l, _| l % 2 == parity);
        let e = PerturbationExpansion::new(j, 1.0).with_global_term(j, planted.clone());
        let rep = layer_strip(&data(&p, &e, &[j], SymbolMode::Transmitted), &p).unwrap();
        let err = rel_l2(&rep.gammas[0].table, &planted);
        assert!(err < 1e-3, "J = {j}, parity {parity}: {err:e}");
        assert!(rep.halted_at.is_none());
    }
}

#[test]
fn reflected_mode_recovers_upper_table() {
    let p = StratifiedProfile::two_layer(1.0, 1.4, 1.0).unwrap();
    // Entries with l + m even are even in the vertical coordinate, so the
    // folded function is the table itself.
    let planted = table(21, 0.1, |l, m| (l as i64 + m) % 2 == 0);
    let e = PerturbationExpansion::new(4, 1.0).with_term(4, Hemisphere::Upper, planted.clone());
    let rep = layer_strip(&data(&p, &e, &[4], SymbolMode::Reflected), &p).unwrap();
    let err = rel_l2(&rep.gammas[0].table, &planted);
    assert!(err < 1e-3, "{err:e}");
    assert!(matches!(
        synthesize_symbols(&p, &e, 4, SymbolMode::Transmitted, &StripConfig::new(LAMBDA, B)),
        Err(InverseError::ModeRequiresEqualSpeeds(_))
    ));
}

#[test]
fn two_layer_stripping_is_triangular() {
    let p = slab();
    let g3 = table(31, 0.1, |_, _| true);
    let g4 = table(32, 0.1, |_, _| true);
    let strip = |a: &HarmonicTable, b: &HarmonicTable| {
        let e = PerturbationExpansion::new(3, 1.0).with_global_term(3, a.clone()).with_global_term(4, b.clone());
        layer_strip(&data(&p, &e, &[3, 4], SymbolMode::Transmitted), &p).unwrap()
    };
    let base = strip(&g3, &g4);
    assert!(rel_l2(&base.gammas[0].table, &g3) < 1e-3);
    assert!(rel_l2(&base.gammas[1].table, &g4) < 1e-3);

    let g4b = table(33, 0.1, |_, _| true);
    let moved_high = strip(&g3, &g4b);
    assert!(abs_l2(&moved_high.gammas[0].table, &base.gammas[0].table) < 1e-6);

    let g3b = table(34, 0.1, |_, _| true);
    let moved_low = strip(&g3b, &g4);
    let drift = abs_l2(&moved_low.gammas[1].table, &base.gammas[1].table);
    assert!(drift < 1e-6, "{drift:e}");
}

#[test]
fn residual_tolerance_halts_stripping() {
    let p = slab();
    let g = table(41, 0.1, |_, _| true);
    let e = PerturbationExpansion::new(3, 1.0).with_global_term(3, g);
    let mut d = data(&p, &e, &[3, 4], SymbolMode::Transmitted);
    // Degree-20 content on the first order cannot be represented.
    let high = {
        let mut t = HarmonicTable::zeros(20);
        t.set(20, 3, 0.5);
        t
    };
    let noisy = synthesize_symbols(&p, &PerturbationExpansion::new(3, 1.0).with_global_term(3, high), 3, SymbolMode::Transmitted, &d[0].config).unwrap();
    for (a, b) in d[0].values.iter_mut().zip(&noisy.values) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }
    let rep = layer_strip(&d, &p).unwrap();
    assert_eq!(rep.halted_at, Some(3));
    assert_eq!(rep.gammas.len(), 1);
}

#[test]
fn symbol_model_agrees_with_parametrix() {
    // The grid error of the transported amplitude decays like n_s^{-2}.
    let cfg = ParametrixConfig { n_s: 256, ..Default::default() };
    let omega = Direction::from_angles(0.6, 0.3);
    let g = table(51, 0.2, |l, m| l <= 3 && (l as i64 + m) % 2 == 0);
    let cases = [
        (slab(), SymbolMode::Transmitted, PerturbationExpansion::new(3, 10.0).with_global_term(3, g.clone())),
        (
            StratifiedProfile::two_layer(1.0, 1.4, 1.0).unwrap(),
            SymbolMode::Reflected,
            PerturbationExpansion::new(3, 10.0).with_global_term(3, g.clone()),
        ),
    ];
    for (p, mode, e) in cases {
        let cal = calibrate_symbol_constant(&p, &e, LAMBDA, omega, mode, &cfg).unwrap();
        assert!((cal.ratio - Complex64::new(1.0, 0.0)).norm() < 1e-3, "{mode:?}: ratio {}", cal.ratio);
        assert!(cal.rel_error < 1e-3, "{mode:?}: {:e}", cal.rel_error);
    }
}


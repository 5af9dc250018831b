use super::Outcome;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratscat_core::inverse::{
    funk_invert_even, layer_strip, marchenko_invert_1d, schrodinger_reflection, synthesize_symbols, BoundState, CircleFamilies,
    FunkOperator, MarchenkoConfig, StripConfig, StripReport, SymbolMode,
};
use stratscat_core::media::{Layer, PerturbationExpansion, StratifiedProfile};
use stratscat_core::sphharm::HarmonicTable;

fn table(degree: usize, seed: u64, scale: f64, keep: impl Fn(usize) -> bool) -> HarmonicTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = HarmonicTable::zeros(degree);
    for l in 0..=degree {
        if keep(l) {
            for m in -(l as i64)..=(l as i64) {
                t.set(l, m, scale * rng.gen_range(-1.0..1.0) / (1.0 + l as f64));
            }
        }
    }
    t
}

fn diff_l2(a: &HarmonicTable, b: &HarmonicTable) -> f64 {
    let n = a.coeffs.len().max(b.coeffs.len());
    let get = |t: &HarmonicTable, q: usize| t.coeffs.get(q).copied().unwrap_or(0.0);
    (0..n).map(|q| (get(a, q) - get(b, q)).powi(2)).sum::<f64>().sqrt()
}

pub fn funk_round_trip() -> Outcome {
    let op = FunkOperator::new(CircleFamilies::new(16, 36));
    let mut rel = 0.0f64;
    for seed in 0..3 {
        let even = table(16, 200 + seed, 1.0, |l| l % 2 == 0);
        let back = match funk_invert_even(&op.transform(&|p| even.eval(p)), &op) {
            Ok(t) => t,
            Err(e) => return Outcome::new(false, e.to_string()),
        };
        rel = rel.max(diff_l2(&back, &even) / even.l2_norm());
    }
    let odd = table(15, 210, 1.0, |l| l % 2 == 1);
    let odd_max = op.transform(&|p| odd.eval(p)).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Outcome::new(
        rel < 1e-6 && odd_max < 1e-8,
        format!("even degree 16 rel L2 {rel:.2e} (tol 1e-6), odd transform max {odd_max:.2e} (tol 1e-8)"),
    )
}

const B: usize = 9;
const LAMBDA: f64 = 2.0;

fn strip(p: &StratifiedProfile, e: &PerturbationExpansion, orders: &[usize]) -> Result<StripReport, String> {
    let cfg = StripConfig::new(LAMBDA, B);
    let data = orders
        .iter()
        .map(|k| synthesize_symbols(p, e, *k, SymbolMode::Transmitted, &cfg))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    layer_strip(&data, p).map_err(|e| e.to_string())
}

pub fn layer_stripping() -> Outcome {
    let p = StratifiedProfile::slab(1.0, 1.3, 0.5, 1.0).unwrap();
    let mut worst = 0.0f64;
    for (j, parity) in [(3usize, 0usize), (3, 1), (4, 0), (4, 1)] {
        let planted = table(B - 1, 300 + 2 * j as u64 + parity as u64, 0.1, |l| l % 2 == parity);
        let e = PerturbationExpansion::new(j, 1.0).with_global_term(j, planted.clone());
        match strip(&p, &e, &[j]) {
            Ok(rep) if rep.halted_at.is_none() => worst = worst.max(diff_l2(&rep.gammas[0].table, &planted) / planted.l2_norm()),
            Ok(rep) => return Outcome::new(false, format!("J = {j}: halted at {:?}", rep.halted_at)),
            Err(e) => return Outcome::new(false, format!("J = {j}: {e}")),
        }
    }
    let g3 = table(B - 1, 310, 0.1, |_| true);
    let g4 = table(B - 1, 311, 0.1, |_| true);
    let two = |a: &HarmonicTable| {
        let e = PerturbationExpansion::new(3, 1.0).with_global_term(3, a.clone()).with_global_term(4, g4.clone());
        strip(&p, &e, &[3, 4])
    };
    let (base, moved) = match (two(&g3), two(&table(B - 1, 312, 0.1, |_| true))) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return Outcome::new(false, e),
    };
    let second = diff_l2(&base.gammas[1].table, &g4) / g4.l2_norm();
    let drift = diff_l2(&moved.gammas[1].table, &base.gammas[1].table);
    Outcome::new(
        worst < 1e-3 && second < 1e-3 && drift < 1e-6,
        format!("single layer (J = 3, 4; even, odd) rel L2 {worst:.2e}, second layer {second:.2e} (tol 1e-3), drift {drift:.2e} (tol 1e-6)"),
    )
}

pub fn marchenko() -> Outcome {
    let (kappa, y1) = (1.0f64, 0.4f64);
    let cfg = MarchenkoConfig { x_min: -4.0, x_max: 4.0, n_x: 201, ..Default::default() };
    let bound = [BoundState::from_energy(-kappa * kappa, 2.0 * kappa * (2.0 * kappa * y1).exp())];
    let sech = match marchenko_invert_1d(&[], &[], &bound, &cfg) {
        Ok(pot) => pot
            .x
            .iter()
            .zip(&pot.q)
            .map(|(x, q)| (q + 2.0 * kappa * kappa / (kappa * (x - y1)).cosh().powi(2)).abs())
            .fold(0.0, f64::max),
        Err(e) => return Outcome::new(false, format!("sech2: {e}")),
    };

    let (a, lambda) = (0.2, 3.0);
    let poly = vec![1.0 + a, 0.0, -3.0 * a, 0.0, 3.0 * a, 0.0, -a];
    let p = StratifiedProfile::new(vec![Layer { y_lo: -1.0, y_hi: 1.0, poly }], 1.0, 1.0, 1.0).unwrap();
    let k: Vec<f64> = (0..=6000).map(|i| 1e-4 + i as f64 * 0.02).collect();
    let r: Vec<Complex64> = k.iter().map(|k| schrodinger_reflection(&p, lambda, *k).unwrap()).collect();
    let cfg = MarchenkoConfig { x_min: -2.0, x_max: 2.0, n_x: 81, ..Default::default() };
    let bump = match marchenko_invert_1d(&k, &r, &[], &cfg) {
        Ok(pot) => {
            let (mut num, mut den) = (0.0, 0.0);
            for (x, q) in pot.x.iter().zip(&pot.q) {
                let e = if x.abs() < 1.0 {
                    let c0 = 1.0 + a * (1.0 - x * x).powi(3);
                    lambda * lambda * (1.0 - 1.0 / (c0 * c0))
                } else {
                    0.0
                };
                num += (q - e).powi(2);
                den += e * e;
            }
            (num / den).sqrt()
        }
        Err(e) => return Outcome::new(false, format!("bump: {e}")),
    };
    Outcome::new(
        bump < 0.05 && sech < 1e-4,
        format!("bump rel L2 {bump:.2e} (tol 5e-2), sech2 max error {sech:.2e} (tol 1e-4)"),
    )
}

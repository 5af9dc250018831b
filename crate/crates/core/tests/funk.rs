use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratscat_core::geometry::{cross, dot, normalize, Direction, Vec3};
use stratscat_core::inverse::funk::{even_part_from_half_circles, pointwise_part};
use stratscat_core::inverse::{funk_invert_even, recover_odd_part, reduce_order, weighted_ray_integral, CircleFamilies, FunkOperator, RayIntegralData};
use stratscat_core::sphharm::{HarmonicTable, SphereGrid};
use std::f64::consts::PI;

fn random_table(band_limit: usize, parity: Option<usize>, seed: u64) -> HarmonicTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = HarmonicTable::zeros(band_limit);
    for l in 0..=band_limit {
        if parity.is_some_and(|p| l % 2 != p) {
            continue;
        }
        for m in -(l as i64)..=(l as i64) {
            t.set(l, m, rng.gen_range(-1.0..1.0) / (1.0 + l as f64));
        }
    }
    t
}

fn rel_l2(a: &HarmonicTable, b: &HarmonicTable) -> f64 {
    let n = a.coeffs.len().max(b.coeffs.len());
    let get = |t: &HarmonicTable, q: usize| t.coeffs.get(q).copied().unwrap_or(0.0);
    let num: f64 = (0..n).map(|q| (get(a, q) - get(b, q)).powi(2)).sum();
    (num / b.l2_norm().powi(2)).sqrt()
}

fn legendre_at_zero(l: usize) -> f64 {
    if l % 2 == 1 {
        return 0.0;
    }
    let mut p = 1.0;
    for j in (2..=l).step_by(2) {
        p *= -((j - 1) as f64) / j as f64;
    }
    p
}

#[test]
fn ray_integral_matches_fine_trapezoid() {
    let w = |p: Vec3| (0.7 * p[0] - 0.3 * p[1] + 0.5 * p[2]).exp() * (1.0 + p[2] * p[2]);
    let omega = Direction::from_angles(0.9, 2.1);
    let o = omega.0;
    let e1 = normalize([-o[2] * o[0], -o[2] * o[1], 1.0 - o[2] * o[2]]);
    let e2 = cross(o, e1);
    for (theta, k) in [(0.4f64, 2i32), (2.5, 3), (5.0, 6)] {
        let t: Vec3 = std::array::from_fn(|i| theta.cos() * e1[i] + theta.sin() * e2[i]);
        let n = 10_000;
        let h = PI / n as f64;
        let g = |s: f64| w(std::array::from_fn(|i| s.cos() * o[i] + s.sin() * t[i])) * s.sin().powi(k - 2);
        let trap = h * ((1..n).map(|j| g(j as f64 * h)).sum::<f64>() + 0.5 * (g(0.0) + g(PI)));
        let got = weighted_ray_integral(&w, omega, theta, k as usize).unwrap();
        assert!((got - trap).abs() < 1e-7 * trap.abs().max(1.0), "k = {k}: {got} vs {trap}");
    }
    let one = weighted_ray_integral(&|_| 1.0, omega, 1.0, 2).unwrap();
    assert!((one - PI).abs() < 1e-13);
    assert!(weighted_ray_integral(&|_| 1.0, omega, 1.0, 1).is_err());
}

#[test]
fn order_reduction_matches_direct_integral() {
    let fam = CircleFamilies::new(8, 20);
    let t = random_table(7, None, 1);
    let w = |p: Vec3| t.eval(p);
    for k in [4usize, 5, 7] {
        let mut data = RayIntegralData::from_real(k, fam.integrals(&w, k));
        while data.order > k - 2 {
            data = reduce_order(&data, &fam).unwrap();
        }
        let direct = fam.integrals(&w, k - 2);
        let err = data.values.iter().flatten().zip(direct.iter().flatten()).map(|(a, b)| (a.re - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-6, "k = {k}: {err:e}");
    }
    let coarse = CircleFamilies::new(8, 10);
    let d = RayIntegralData::from_real(4, coarse.integrals(&w, 4));
    assert!(reduce_order(&d, &coarse).is_err());
}

#[test]
fn multipliers_depend_only_on_degree() {
    let op = FunkOperator::new(CircleFamilies::new(16, 36));
    let mut worst = 0.0f64;
    for l in 0..=16usize {
        let expected = 2.0 * PI * legendre_at_zero(l);
        for m in -(l as i64)..=(l as i64) {
            worst = worst.max((op.multiplier(l, m) - op.multiplier(l, 0)).abs());
            assert!((op.multiplier(l, m) - expected).abs() < 1e-8, "l = {l}, m = {m}");
        }
    }
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn funk_round_trip_even_and_annihilates_odd() {
    let op = FunkOperator::new(CircleFamilies::new(16, 36));
    let even = random_table(16, Some(0), 2);
    let g = op.transform(&|p| even.eval(p));
    let back = funk_invert_even(&g, &op).unwrap();
    assert!(rel_l2(&back, &even) < 1e-6, "{:e}", rel_l2(&back, &even));
    let odd = random_table(15, Some(1), 3);
    let go = op.transform(&|p| odd.eval(p));
    let worst = go.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!(worst < 1e-8, "{worst:e}");
}

#[test]
fn half_circle_channels_route_by_parity() {
    let b = 9;
    let op = FunkOperator::new(CircleFamilies::new(b, 4 * b + 4));
    let fam = &op.families;
    let even = random_table(b - 1, Some(0), 4);
    let odd = random_table(b - 1, Some(1), 5);
    let sum = |p: Vec3| even.eval(p) + odd.eval(p);

    let h = RayIntegralData::from_real(2, fam.integrals(&sum, 2));
    let e = even_part_from_half_circles(&h, &op).unwrap();
    let o = op.project_samples(&pointwise_part(&h).unwrap(), Some(1));
    assert!(rel_l2(&e, &even) < 1e-8);
    assert!(rel_l2(&o, &odd) < 1e-8);

    let g = RayIntegralData::from_real(3, fam.integrals(&sum, 3));
    let e3 = op.project_samples(&pointwise_part(&g).unwrap(), Some(0));
    let o3 = recover_odd_part(&g, &op, 0.05).unwrap();
    assert!(rel_l2(&e3, &even) < 1e-8);
    assert!(rel_l2(&o3, &odd) < 1e-6, "{:e}", rel_l2(&o3, &odd));

    // Planted even data leaves nothing in the odd channels and vice versa.
    let he = RayIntegralData::from_real(2, fam.integrals(&|p| even.eval(p), 2));
    assert!(op.project_samples(&pointwise_part(&he).unwrap(), Some(1)).l2_norm() < 1e-8);
    let go = RayIntegralData::from_real(3, fam.integrals(&|p| odd.eval(p), 3));
    assert!(op.project_samples(&pointwise_part(&go).unwrap(), Some(0)).l2_norm() < 1e-8);
    let ge = RayIntegralData::from_real(3, fam.integrals(&|p| even.eval(p), 3));
    assert!(recover_odd_part(&ge, &op, 0.05).unwrap().l2_norm() < 1e-8);
}

#[test]
fn fill_leaves_available_samples_alone() {
    let fam = CircleFamilies::new(6, 28);
    let t = random_table(5, None, 6);
    let mut data = RayIntegralData::from_real(2, fam.integrals(&|p| t.eval(p), 2));
    let full = data.clone();
    for (i, row) in data.mask.iter_mut().enumerate() {
        row[i % 28] = false;
        row[(i + 9) % 28] = false;
    }
    let filled = data.filled(6).unwrap();
    for ((a, b), m) in filled.values.iter().flatten().zip(full.values.iter().flatten()).zip(data.mask.iter().flatten()) {
        if *m {
            assert_eq!(a, b);
        } else {
            assert!((a - b).norm() < 1e-9, "{:e}", (a - b).norm());
        }
    }
    assert_eq!(full.filled(6).unwrap(), full);
}

#[test]
fn sphere_projection_identity() {
    let fam = CircleFamilies::new(10, 24);
    let op = FunkOperator::new(fam);
    let t = random_table(9, None, 7);
    let vals: Vec<Vec<f64>> = (0..op.families.len())
        .map(|i| (0..op.families.n_alpha).map(|l| t.eval(op.families.point(i, op.families.alpha(l)))).collect())
        .collect();
    assert!(rel_l2(&op.project_samples(&vals, None), &t) < 1e-10);
    let g = SphereGrid::for_band_limit(4);
    assert!(dot(g.point(0), g.point(0)) > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]
    #[test]
    fn transforms_are_linear(a in -2.0f64..2.0, b in -2.0f64..2.0, seed in 0u64..1000) {
        let fam = CircleFamilies::new(5, 16);
        let t1 = random_table(4, None, seed);
        let t2 = random_table(4, None, seed + 1);
        let lhs = fam.integrals(&|p| a * t1.eval(p) + b * t2.eval(p), 3);
        let r1 = fam.integrals(&|p| t1.eval(p), 3);
        let r2 = fam.integrals(&|p| t2.eval(p), 3);
        for ((x, y), z) in lhs.iter().flatten().zip(r1.iter().flatten()).zip(r2.iter().flatten()) {
            prop_assert!((x - (a * y + b * z)).abs() < 1e-11);
        }
        let d = RayIntegralData::from_real(3, lhs);
        let sum: Complex64 = d.values.iter().flatten().sum();
        prop_assert!(sum.im == 0.0);
    }
}

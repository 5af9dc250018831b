use super::Outcome;
use num_complex::Complex64;
use stratscat_core::geometry::{dot, Direction, Vec3};
use stratscat_core::media::{PerturbationExpansion, StratifiedProfile};
use stratscat_core::parametrix::{assemble_parametrix, residual_decay_check, ParametrixConfig, PiecewiseParametrix};
use stratscat_core::sphharm::HarmonicTable;

const LAMBDA: f64 = 2.0;
const J: usize = 4;

fn omega() -> Direction {
    Direction([0.6, 0.0, 0.8])
}

/// One global term of order `J` with degree-2 content.
fn build(n: usize) -> PiecewiseParametrix {
    let mut t = HarmonicTable::zeros(2);
    t.set(0, 0, 0.6);
    t.set(1, 1, 0.25);
    t.set(2, -1, -0.3);
    let e = PerturbationExpansion::new(J, 10.0).with_global_term(J, t);
    let p = StratifiedProfile::two_layer(1.0, 1.5, 1.0).unwrap();
    assemble_parametrix(&p, &e, LAMBDA, omega(), n, &ParametrixConfig::default()).unwrap()
}

/// Off the equatorial band and away from the branch sources, in both hemispheres.
fn directions() -> Vec<Vec3> {
    [(0.5, 2.0), (0.9, 0.4), (1.2, 3.5), (0.3, 4.8), (1.0, 5.6), (2.2, 1.1), (2.6, 3.9)]
        .iter()
        .map(|&(polar, az)| Direction::from_angles(polar, az).0)
        .collect()
}

pub fn transport_identity() -> Outcome {
    let par = build(1);
    let inc = &par.branches[0];
    let w = omega().0;
    let m = J - 1;
    let f = |z: Vec3| {
        let r = dot(z, z).sqrt();
        inc.amplitude_at(m, [z[0] / r, z[1] / r, z[2] / r]).unwrap() * r.powi(-(m as i32))
    };
    let mut slopes = Vec::new();
    for dir in directions().into_iter().filter(|d| d[2] > 0.0) {
        let d = inc.error_at(m + 1, dir).unwrap();
        let err = |h: f64| {
            let zp = [dir[0] + h * w[0], dir[1] + h * w[1], dir[2] + h * w[2]];
            let zm = [dir[0] - h * w[0], dir[1] - h * w[1], dir[2] - h * w[2]];
            let fd = (f(zp) - f(zm)) / (2.0 * h);
            (-2.0 * Complex64::i() * LAMBDA * fd + d).norm()
        };
        let e: Vec<f64> = [0.04, 0.02, 0.01].iter().map(|h| err(*h)).collect();
        slopes.extend(e.windows(2).map(|p| (p[0] / p[1]).log2()));
    }
    let worst = slopes.iter().map(|s| (s - 2.0).abs()).fold(0.0, f64::max);
    Outcome::new(worst <= 0.3, format!("{} halvings, slopes within {worst:.3} of 2 (tol 0.3)", slopes.len()))
}

pub fn residual_decay() -> Outcome {
    let radii: Vec<f64> = (0..5).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for (n, bound) in [(0usize, -(J as f64) + 0.3), (2, -(J as f64 + 2.0) + 0.3)] {
        match residual_decay_check(&build(n), &radii, &directions()) {
            Ok(fit) => {
                pass &= !fit.floor && fit.worst <= bound;
                parts.push(format!("N = {n}: worst slope {:.3} (bound {bound:.1})", fit.worst));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("N = {n}: {e}"));
            }
        }
    }
    Outcome::new(pass, format!("{}; {} directions, r in [1e2, 1e4]", parts.join(", "), directions().len()))
}

pub fn c1_matching() -> Outcome {
    let mut worst = 0.0f64;
    for n in 0..=2 {
        let par = build(n);
        for x in [[40.0, 5.0], [-20.0, 30.0], [7.0, -60.0], [0.5, 0.5]] {
            match par.c1_jumps(x) {
                Ok(j) => worst = j.iter().fold(worst, |a, v| a.max(*v)),
                Err(e) => return Outcome::new(false, format!("N = {n}, x = {x:?}: {e}")),
            }
        }
    }
    Outcome::new(worst < 1e-9, format!("max jump at y = ±y_M over N = 0..2 = {worst:.2e} (tol 1e-9)"))
}

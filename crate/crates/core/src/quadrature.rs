//! Gauss–Legendre rules, barycentric interpolation/differentiation on
//! arbitrary nodes, and trigonometric (Fourier) differentiation and
//! interpolation on uniform periodic grids.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Barycentric weights for distinct nodes (scaled so the largest is 1).
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    // Scale differences by the interval length to avoid overflow for large n.
    let span = (nodes[n - 1] - nodes[0]).abs().max(1e-300);
    let c = 4.0 / span;
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= c * (nodes[j] - nodes[k]);
            }
        }
    }
    let max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    w.iter().map(|v| v / max).collect()
}

/// Interpolation row: coefficients `l_k(x)` such that `p(x) = Σ l_k f_k`.
pub fn barycentric_row(nodes: &[f64], weights: &[f64], x: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut row = vec![0.0; n];
    for k in 0..n {
        if x == nodes[k] {
            row[k] = 1.0;
            return row;
        }
    }
    let mut denom = 0.0;
    for k in 0..n {
        let t = weights[k] / (x - nodes[k]);
        row[k] = t;
        denom += t;
    }
    for v in row.iter_mut() {
        *v /= denom;
    }
    row
}

/// First-derivative matrix for polynomial interpolation on `nodes`.
pub fn differentiation_matrix(nodes: &[f64]) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (w[j] / w[i]) / (nodes[i] - nodes[j]);
                d[i][j] = v;
                diag -= v;
            }
        }
        d[i][i] = diag;
    }
    d
}

pub fn mat_vec<T>(m: &[Vec<f64>], v: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Default,
{
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(T::default(), |acc, (a, b)| acc + *b * *a)
        })
        .collect()
}

/// Discrete Fourier coefficients of samples on the uniform grid
/// `t_l = 2πl/M`; `c[k]` multiplies `e^{ikt}` for `k` in `-(M/2)..=(M-1)/2`
/// (stored with wrap-around indexing).
fn dft(samples: &[Complex64]) -> Vec<Complex64> {
    let m = samples.len();
    let mf = m as f64;
    (0..m)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, s) in samples.iter().enumerate() {
                let ang = -2.0 * PI * (k * l % m) as f64 / mf;
                acc += s * Complex64::from_polar(1.0, ang);
            }
            acc / mf
        })
        .collect()
}

fn wavenumber(k: usize, m: usize) -> f64 {
    if 2 * k < m {
        k as f64
    } else if 2 * k == m {
        0.0 // Nyquist mode carries no derivative information
    } else {
        k as f64 - m as f64
    }
}

/// Spectral derivative of order `order` of periodic samples on `[0, 2π)`.
pub fn fourier_derivative(samples: &[Complex64], order: u32) -> Vec<Complex64> {
    let m = samples.len();
    let mut c = dft(samples);
    for (k, ck) in c.iter_mut().enumerate() {
        let kk = wavenumber(k, m);
        let nyquist = 2 * k == m;
        if nyquist && order % 2 == 1 {
            *ck = Complex64::new(0.0, 0.0);
            continue;
        }
        let factor = if nyquist {
            let kn = m as f64 / 2.0;
            Complex64::new(-(kn * kn), 0.0).powu(order / 2)
        } else {
            Complex64::new(0.0, kk).powu(order)
        };
        *ck *= factor;
    }
    synthesize(&c)
}

fn synthesize(c: &[Complex64]) -> Vec<Complex64> {
    let m = c.len();
    (0..m)
        .map(|l| {
            let t = 2.0 * PI * l as f64 / m as f64;
            trig_eval(c, t)
        })
        .collect()
}

fn trig_eval(c: &[Complex64], t: f64) -> Complex64 {
    let m = c.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, ck) in c.iter().enumerate() {
        if 2 * k == m {
            acc += ck * (m as f64 / 2.0 * t).cos();
        } else {
            acc += ck * Complex64::from_polar(1.0, wavenumber(k, m) * t);
        }
    }
    acc
}

/// Real-valued variant of [`fourier_derivative`].
pub fn fourier_derivative_real(samples: &[f64], order: u32) -> Vec<f64> {
    let c: Vec<Complex64> = samples.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fourier_derivative(&c, order).into_iter().map(|v| v.re).collect()
}

/// Trigonometric interpolation weights at angle `t` for a uniform grid of
/// `m` samples: `f(t) = Σ_l row[l] f_l`.
pub fn trig_interp_row(m: usize, t: f64) -> Vec<f64> {
    let mf = m as f64;
    (0..m)
        .map(|l| {
            let tl = 2.0 * PI * l as f64 / mf;
            let u = t - tl;
            // Periodic sinc kernel: even m uses the cosine-corrected form.
            let half = 0.5 * u;
            let s = half.sin();
            if s.abs() < 1e-14 {
                return 1.0;
            }
            if m % 2 == 0 {
                (mf * half).sin() * half.cos() / (mf * s)
            } else {
                (mf * half).sin() / (mf * s)
            }
        })
        .collect()
}

/// Trigonometric least-squares fit of degree `degree` through the samples
/// whose mask entry is `true`; returns the fitted values on the full grid.
/// Returns `None` if the normal equations are singular.
pub fn trig_fit_fill(samples: &[Complex64], mask: &[bool], degree: usize) -> Option<Vec<Complex64>> {
    use nalgebra::{DMatrix, DVector};
    let m = samples.len();
    let nb = 2 * degree + 1;
    let kept: Vec<usize> = (0..m).filter(|&l| mask[l]).collect();
    if kept.len() < nb {
        return None;
    }
    let basis = |t: f64, j: usize| -> f64 {
        if j == 0 {
            1.0
        } else if j % 2 == 1 {
            (((j + 1) / 2) as f64 * t).cos()
        } else {
            ((j / 2) as f64 * t).sin()
        }
    };
    let a = DMatrix::from_fn(kept.len(), nb, |r, j| {
        basis(2.0 * PI * kept[r] as f64 / m as f64, j)
    });
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    let diag: Vec<f64> = (0..nb).map(|j| r[(j, j)].abs()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    if diag.iter().any(|d| *d <= 1e-12 * dmax) {
        return None;
    }
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for part in 0..2 {
        let rhs = DVector::from_iterator(
            kept.len(),
            kept.iter()
                .map(|&l| if part == 0 { samples[l].re } else { samples[l].im }),
        );
        let coef = r.solve_upper_triangular(&(q.transpose() * rhs))?;
        for (l, o) in out.iter_mut().enumerate() {
            let t = 2.0 * PI * l as f64 / m as f64;
            let v: f64 = (0..nb).map(|j| coef[j] * basis(t, j)).sum();
            if part == 0 {
                o.re = v;
            } else {
                o.im = v;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(10);
        for p in 0..20 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum();
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {p}: {q} vs {exact}");
        }
    }

    #[test]
    fn large_rule_weights_sum_to_two() {
        let (_, w) = gauss_legendre(200);
        assert_relative_eq!(w.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
    }

    #[test]
    fn barycentric_and_differentiation_are_exact_on_polynomials() {
        let (x, _) = gauss_legendre(12);
        let f: Vec<f64> = x.iter().map(|t| t.powi(5) - 2.0 * t).collect();
        let w = barycentric_weights(&x);
        let row = barycentric_row(&x, &w, 0.3);
        let v: f64 = row.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert_relative_eq!(v, 0.3f64.powi(5) - 0.6, epsilon = 1e-13);
        let d = differentiation_matrix(&x);
        let df = mat_vec(&d, &f);
        for (t, v) in x.iter().zip(df) {
            assert!((v - (5.0 * t.powi(4) - 2.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn fourier_derivative_of_trig_polynomial() {
        let m = 16;
        let s: Vec<f64> = (0..m)
            .map(|l| {
                let t = 2.0 * PI * l as f64 / m as f64;
                (3.0 * t).sin() + 0.5 * (2.0 * t).cos()
            })
            .collect();
        let d2 = fourier_derivative_real(&s, 2);
        for (l, v) in d2.iter().enumerate() {
            let t = 2.0 * PI * l as f64 / m as f64;
            let exact = -9.0 * (3.0 * t).sin() - 2.0 * (2.0 * t).cos();
            assert!((v - exact).abs() < 1e-12);
        }
        let row = trig_interp_row(m, 0.77);
        let v: f64 = row.iter().zip(&s).map(|(a, b)| a * b).sum();
        assert_relative_eq!(v, (3.0f64 * 0.77).sin() + 0.5 * (2.0f64 * 0.77).cos(), epsilon = 1e-12);
    }

    #[test]
    fn trig_fit_reproduces_masked_samples() {
        let m = 24;
        let s: Vec<Complex64> = (0..m)
            .map(|l| {
                let t = 2.0 * PI * l as f64 / m as f64;
                Complex64::new(t.cos() + 0.2 * (3.0 * t).sin(), (2.0 * t).cos())
            })
            .collect();
        let mut mask = vec![true; m];
        mask[3] = false;
        mask[15] = false;
        let filled = trig_fit_fill(&s, &mask, 4).unwrap();
        for (a, b) in filled.iter().zip(&s) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}

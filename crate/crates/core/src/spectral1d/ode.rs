//! Layerwise propagation of `-φ'' = Q(y) φ`.
//!
//! On constant layers the 2×2 transfer matrix is exact; on polynomial layers
//! a fourth-order Magnus step (two Gauss points) is used. All transfer
//! matrices are real with unit determinant, so the Wronskian of any two
//! propagated solutions is preserved to rounding.

use num_complex::Complex64;

/// Real 2×2 matrix acting on `(φ, φ')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer(pub [[f64; 2]; 2]);

impl Transfer {
    pub const IDENTITY: Transfer = Transfer([[1.0, 0.0], [0.0, 1.0]]);

    /// `self · rhs` (apply `rhs` first).
    pub fn then(self, later: Transfer) -> Transfer {
        let a = later.0;
        let b = self.0;
        Transfer([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }

    /// Inverse of a unit-determinant matrix.
    pub fn inverse(&self) -> Transfer {
        let m = self.0;
        Transfer([[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]])
    }

    pub fn apply(&self, s: [f64; 2]) -> [f64; 2] {
        let m = self.0;
        [m[0][0] * s[0] + m[0][1] * s[1], m[1][0] * s[0] + m[1][1] * s[1]]
    }

    pub fn apply_c(&self, s: [Complex64; 2]) -> [Complex64; 2] {
        let m = self.0;
        [s[0] * m[0][0] + s[1] * m[0][1], s[0] * m[1][0] + s[1] * m[1][1]]
    }

    /// Exact propagator over length `h` for constant `Q`.
    pub fn constant(q: f64, h: f64) -> Transfer {
        if q > 0.0 {
            let k = q.sqrt();
            let (s, c) = (k * h).sin_cos();
            Transfer([[c, s / k], [-k * s, c]])
        } else if q < 0.0 {
            let p = (-q).sqrt();
            let (s, c) = ((p * h).sinh(), (p * h).cosh());
            Transfer([[c, s / p], [p * s, c]])
        } else {
            Transfer([[1.0, h], [0.0, 1.0]])
        }
    }

    /// Exponential of a traceless real 2×2 matrix.
    fn exp_traceless(m: [[f64; 2]; 2]) -> Transfer {
        let mu2 = m[0][0] * m[0][0] + m[0][1] * m[1][0];
        let (c, s_over) = if mu2 > 1e-30 {
            let mu = mu2.sqrt();
            (mu.cosh(), mu.sinh() / mu)
        } else if mu2 < -1e-30 {
            let mu = (-mu2).sqrt();
            (mu.cos(), mu.sin() / mu)
        } else {
            (1.0 + 0.5 * mu2, 1.0 + mu2 / 6.0)
        };
        Transfer([
            [c + s_over * m[0][0], s_over * m[0][1]],
            [s_over * m[1][0], c + s_over * m[1][1]],
        ])
    }

    /// Fourth-order Magnus step for `Y' = [[0,1],[-Q(y),0]] Y`.
    pub fn magnus(q: &dyn Fn(f64) -> f64, y0: f64, h: f64) -> Transfer {
        let r3 = 3f64.sqrt() / 6.0;
        let q1 = q(y0 + (0.5 - r3) * h);
        let q2 = q(y0 + (0.5 + r3) * h);
        // Ω = h/2 (A1 + A2) + (√3 h² / 12) [A2, A1]
        let c = 3f64.sqrt() * h * h / 12.0;
        let m = [
            [c * (q2 - q1), h],
            [-0.5 * h * (q1 + q2), c * (q1 - q2)],
        ];
        Transfer::exp_traceless(m)
    }
}

/// Piecewise description of `Q` on the line: `segments` cover the region
/// where `Q` varies, `constant` flags exact layers; outside the covered
/// region `Q` equals `q_below` / `q_above`.
pub struct Coefficient<'a> {
    pub q: Box<dyn Fn(f64) -> f64 + 'a>,
    pub segments: Vec<(f64, f64, bool)>,
    /// Target step scale for non-constant layers.
    pub max_step: f64,
}

impl Coefficient<'_> {
    fn pieces(&self, y0: f64, y1: f64) -> Vec<(f64, f64, bool)> {
        let mut out = Vec::new();
        let lo_all = self.segments.first().map(|s| s.0).unwrap_or(f64::INFINITY);
        let hi_all = self.segments.last().map(|s| s.1).unwrap_or(f64::NEG_INFINITY);
        if y0 < lo_all {
            out.push((y0, y1.min(lo_all), true));
        }
        for &(a, b, c) in &self.segments {
            let lo = a.max(y0);
            let hi = b.min(y1);
            if hi > lo {
                out.push((lo, hi, c));
            }
        }
        if y1 > hi_all {
            out.push((y0.max(hi_all), y1, true));
        }
        out
    }

    fn step_count(&self, a: f64, b: f64, constant: bool, for_phase: bool) -> usize {
        let len = b - a;
        let qa = (self.q)(0.5 * (a + b)).abs();
        if constant {
            if for_phase {
                (len * qa.max(1.0) / 0.5).ceil().max(1.0) as usize
            } else {
                1
            }
        } else {
            // Bound |Q| on the piece by sampling.
            let qmax = (0..=8)
                .map(|i| (self.q)(a + len * i as f64 / 8.0).abs())
                .fold(qa, f64::max);
            let scale = qmax.sqrt().max(1.0);
            let mut n = (len * scale / self.max_step).ceil().max(1.0) as usize;
            if for_phase {
                n = n.max((len * qmax.max(1.0) / 0.5).ceil() as usize);
            }
            n
        }
    }

    fn piece_transfer(&self, a: f64, b: f64, constant: bool, steps: usize) -> Vec<Transfer> {
        let h = (b - a) / steps as f64;
        (0..steps)
            .map(|i| {
                let y = a + h * i as f64;
                if constant {
                    Transfer::constant((self.q)(y + 0.5 * h), h)
                } else {
                    Transfer::magnus(&*self.q, y, h)
                }
            })
            .collect()
    }

    /// Transfer matrix from `y0` to `y1` (`y1 ≥ y0`).
    pub fn transfer(&self, y0: f64, y1: f64) -> Transfer {
        let mut t = Transfer::IDENTITY;
        if y1 <= y0 {
            return t;
        }
        for (a, b, c) in self.pieces(y0, y1) {
            let n = self.step_count(a, b, c, false);
            for s in self.piece_transfer(a, b, c, n) {
                t = t.then(s);
            }
        }
        t
    }

    /// Propagates `(φ, φ')` from `y0` upward to each point of `ys`
    /// (ascending, all `≥ y0`).
    pub fn sweep(&self, y0: f64, state: [Complex64; 2], ys: &[f64]) -> Vec<[Complex64; 2]> {
        let mut out = Vec::with_capacity(ys.len());
        let mut y = y0;
        let mut s = state;
        for &yt in ys {
            s = self.transfer(y, yt).apply_c(s);
            y = yt;
            out.push(s);
        }
        out
    }

    /// Unwrapped Prüfer angle `atan2(φ, φ')` of the real solution started
    /// at `y0` with angle `theta0`, advanced to `y1`.
    pub fn prufer(&self, y0: f64, theta0: f64, y1: f64) -> f64 {
        let mut theta = theta0;
        let mut s = [theta0.sin(), theta0.cos()];
        for (a, b, c) in self.pieces(y0, y1) {
            let n = self.step_count(a, b, c, true);
            for t in self.piece_transfer(a, b, c, n) {
                let next = t.apply(s);
                let old = s[0].atan2(s[1]);
                let new = next[0].atan2(next[1]);
                let mut d = new - old;
                while d > std::f64::consts::PI {
                    d -= 2.0 * std::f64::consts::PI;
                }
                while d < -std::f64::consts::PI {
                    d += 2.0 * std::f64::consts::PI;
                }
                theta += d;
                let norm = (next[0] * next[0] + next[1] * next[1]).sqrt();
                s = [next[0] / norm, next[1] / norm];
            }
        }
        theta
    }
}

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use super::PatchError;

/// C² bump: `1` on `[0, 1/2]`, `0` from `1` on. The descent has slope
/// `-slope` on a plateau and is joined to the flat pieces by smoothstep
/// ramps of width `ramp` in the derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Eta {
    slope: f64,
    ramp: f64,
}

impl Default for Eta {
    fn default() -> Eta {
        Eta::standard()
    }
}

fn smoothstep(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

impl Eta {
    /// Plateau slope 9/4, ramp width 1/18 (these satisfy `slope (1/2 - ramp) = 1`).
    pub fn standard() -> Eta {
        Eta {
            slope: 2.25,
            ramp: 1.0 / 18.0,
        }
    }

    pub fn max_abs_d1(&self) -> f64 {
        self.slope
    }

    pub fn max_abs_d2(&self) -> f64 {
        1.5 * self.slope / self.ramp
    }

    pub fn value(&self, t: f64) -> f64 {
        let (m, tau) = (self.slope, self.ramp);
        let t = t.abs();
        if t <= 0.5 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else if t < 0.5 + tau {
            let x = (t - 0.5) / tau;
            1.0 - m * tau * (x * x * x - 0.5 * x * x * x * x)
        } else if t <= 1.0 - tau {
            1.0 - 0.5 * m * tau - m * (t - 0.5 - tau)
        } else {
            let y = (1.0 - t) / tau;
            m * tau * (y * y * y - 0.5 * y * y * y * y)
        }
    }

    pub fn d1(&self, t: f64) -> f64 {
        let (m, tau) = (self.slope, self.ramp);
        let t = t.abs();
        if t <= 0.5 || t >= 1.0 {
            0.0
        } else if t < 0.5 + tau {
            -m * smoothstep((t - 0.5) / tau)
        } else if t <= 1.0 - tau {
            -m
        } else {
            -m * smoothstep((1.0 - t) / tau)
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        let (m, tau) = (self.slope, self.ramp);
        let t = t.abs();
        let ds = |x: f64| 6.0 * x * (1.0 - x);
        if t <= 0.5 || t >= 1.0 {
            0.0
        } else if t < 0.5 + tau {
            -m * ds((t - 0.5) / tau) / tau
        } else if t <= 1.0 - tau {
            0.0
        } else {
            m * ds((1.0 - t) / tau) / tau
        }
    }

    /// Breakpoints of the polynomial pieces.
    pub fn knots(&self) -> [f64; 5] {
        [0.0, 0.5, 0.5 + self.ramp, 1.0 - self.ramp, 1.0]
    }

    /// `∫_0^1 η(t) t^(k-1) dt`, exact up to rounding (Gauss-Legendre on each
    /// polynomial piece).
    pub fn radial_moment(&self, k: usize) -> f64 {
        let (x, w) = gauss_legendre(12);
        let kn = self.knots();
        let mut sum = 0.0;
        for piece in kn.windows(2) {
            let (a, b) = (piece[0], piece[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                let t = mid + half * xi;
                sum += half * wi * self.value(t) * t.powi(k as i32 - 1);
            }
        }
        sum
    }

    /// `1 / ∫_{|u| <= δ} η(|u| / δ) du` in R^k.
    pub fn normalization(&self, k: usize, delta: f64) -> f64 {
        let kf = k as f64;
        let sphere = 2.0 * std::f64::consts::PI.powf(kf / 2.0) / gamma(kf / 2.0);
        1.0 / (delta.powi(k as i32) * sphere * self.radial_moment(k))
    }

    /// Sup of `|∇φ|` and of the Hessian operator norm of
    /// `φ(x) = η(|x| / (2ρ))` on R^k, measured on a dense radial sample.
    pub fn cutoff_constants(&self, k: usize, rho: f64) -> (f64, f64) {
        let s = 2.0 * rho;
        let n = 200_000;
        let mut a: f64 = 0.0;
        let mut b: f64 = 0.0;
        for i in 0..=n {
            let t = 0.5 + 0.5 * i as f64 / n as f64;
            a = a.max(self.d1(t).abs());
            let mut h = self.d2(t).abs();
            if k >= 2 {
                h = h.max(self.d1(t).abs() / t);
            }
            b = b.max(h);
        }
        (a / s, b / (s * s))
    }
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = n as f64 * (z * p - p0) / (z * z - 1.0);
            let step = p / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Mollifier radius `δ` and cutoff scale `ρ`: the cutoff is
/// `η(|x| / (2ρ))`, so the patch is untouched outside `B(0, 2ρ)` and fully
/// convolved inside `B(0, ρ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierSpec {
    pub delta: f64,
    pub rho: f64,
}

impl MollifierSpec {
    pub fn validate(&self) -> Result<(), PatchError> {
        if !(self.delta > 0.0 && self.delta.is_finite() && self.rho > 0.0 && self.rho.is_finite()) {
            return Err(PatchError::InvalidParameters(format!(
                "delta and rho must be positive, got {} and {}",
                self.delta, self.rho
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eta_is_c2_with_the_right_support() {
        let e = Eta::standard();
        assert_eq!(e.value(0.3), 1.0);
        assert_eq!(e.value(0.5), 1.0);
        assert_eq!(e.value(1.0), 0.0);
        assert_eq!(e.value(1.7), 0.0);
        // continuity of value and first two derivatives across each knot
        for &t in &e.knots()[1..4] {
            let h = 1e-9;
            assert!((e.value(t - h) - e.value(t + h)).abs() < 1e-8, "value at {t}");
            assert!((e.d1(t - h) - e.d1(t + h)).abs() < 1e-6, "d1 at {t}");
            assert!((e.d2(t - h) - e.d2(t + h)).abs() < 1e-5, "d2 at {t}");
        }
        assert!(e.value(1.0 - 1e-9) < 1e-20);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let e = Eta::standard();
        let h = 1e-6;
        for i in 1..200 {
            let t = 0.5 + 0.5 * i as f64 / 200.0;
            let fd1 = (e.value(t + h) - e.value(t - h)) / (2.0 * h);
            let fd2 = (e.d1(t + h) - e.d1(t - h)) / (2.0 * h);
            assert!((fd1 - e.d1(t)).abs() < 1e-6, "{t}");
            assert!((fd2 - e.d2(t)).abs() < 1e-4, "{t}");
        }
    }

    #[test]
    fn derivative_bounds() {
        let e = Eta::standard();
        let (mut m1, mut m2): (f64, f64) = (0.0, 0.0);
        for i in 0..=100_000 {
            let t = 0.5 + 0.5 * i as f64 / 100_000.0;
            m1 = m1.max(e.d1(t).abs());
            m2 = m2.max(e.d2(t).abs());
        }
        assert!((m1 - 2.25).abs() < 1e-12);
        assert!((m2 - e.max_abs_d2()).abs() < 1e-3);
        assert!((e.max_abs_d2() - 60.75).abs() < 1e-12);
    }

    #[test]
    fn no_c2_cutoff_has_second_derivative_below_sixteen() {
        // With η' vanishing at 1/2 and 1 and |η''| <= M, the largest possible
        // drop over [1/2, 1] is M/16 (accelerate to the midpoint, then brake).
        // Check that bang-bang bound numerically and that M = 10 cannot reach 1.
        let drop = |m: f64| {
            let n = 100_000;
            let dt = 0.5 / n as f64;
            let (mut v, mut x) = (0.0, 0.0);
            for i in 0..n {
                let a = if i < n / 2 { m } else { -m };
                x += v * dt + 0.5 * a * dt * dt;
                v += a * dt;
            }
            x
        };
        assert!((drop(16.0) - 1.0).abs() < 1e-9);
        assert!(drop(10.0) < 0.63);
        assert!(Eta::standard().max_abs_d2() >= 16.0);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((int - 2.0 / 11.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn normalization_matches_riemann_sum() {
        let e = Eta::standard();
        for k in 1..=3 {
            let delta: f64 = 0.3;
            // midpoint sum of ∫ η(t) t^(k-1) dt on a fine grid
            let n = 400_000;
            let mom: f64 = (0..n)
                .map(|i| {
                    let t = (i as f64 + 0.5) / n as f64;
                    e.value(t) * t.powi(k as i32 - 1)
                })
                .sum::<f64>()
                / n as f64;
            assert!((mom - e.radial_moment(k)).abs() < 1e-10, "k = {k}");
            let sphere = [2.0, std::f64::consts::TAU, 4.0 * std::f64::consts::PI][k - 1];
            let c = 1.0 / (delta.powi(k as i32) * sphere * e.radial_moment(k));
            assert!((c - e.normalization(k, delta)).abs() < 1e-10 * c);
        }
    }

    #[test]
    fn cutoff_constants_scale_with_rho() {
        let e = Eta::standard();
        let (a, b) = e.cutoff_constants(1, 0.5);
        assert!((a - 2.25).abs() < 1e-12);
        assert!((b - 60.75).abs() < 1e-2);
        let (a2, b2) = e.cutoff_constants(2, 0.25);
        assert!((a2 - 4.5).abs() < 1e-12);
        assert!(b2 >= 4.0 * b - 1e-9);
    }
}

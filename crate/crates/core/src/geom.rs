//! Small allocation-free vector helpers on `&[f64]` points of any dimension.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`
pub fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// `(1 - t) a + t b`
pub fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Unit vector, or `None` for a (numerically) zero input.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(a.iter().map(|x| x / n).collect())
    } else {
        None
    }
}

/// Angle between two nonzero vectors, stable near 0 and π.
pub fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    let mut d = 0.0;
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (ux, uy) = (x / na, y / nb);
        d += (ux - uy) * (ux - uy);
        s += (ux + uy) * (ux + uy);
    }
    2.0 * d.sqrt().atan2(s.sqrt())
}

/// Closest point on segment `[a, b]` to `p`: returns `(t, squared distance)`.
#[inline]
pub fn point_segment(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut ee = 0.0;
    let mut pe = 0.0;
    for i in 0..p.len() {
        let e = b[i] - a[i];
        ee += e * e;
        pe += (p[i] - a[i]) * e;
    }
    let t = if ee > 0.0 { (pe / ee).clamp(0.0, 1.0) } else { 0.0 };
    let mut d2 = 0.0;
    for i in 0..p.len() {
        let q = a[i] + t * (b[i] - a[i]);
        d2 += (p[i] - q) * (p[i] - q);
    }
    (t, d2)
}

/// Closest points between segments `[p1, q1]` and `[p2, q2]`.
///
/// Returns `(s, t, squared distance)` with both parameters in `[0, 1]`.
pub fn segment_segment(p1: &[f64], q1: &[f64], p2: &[f64], q2: &[f64]) -> (f64, f64, f64) {
    let (mut a, mut e, mut b, mut c, mut f) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..p1.len() {
        let d1 = q1[i] - p1[i];
        let d2 = q2[i] - p2[i];
        let r = p1[i] - p2[i];
        a += d1 * d1;
        e += d2 * d2;
        b += d1 * d2;
        c += d1 * r;
        f += d2 * r;
    }
    let (s, t) = if a <= f64::MIN_POSITIVE && e <= f64::MIN_POSITIVE {
        (0.0, 0.0)
    } else if a <= f64::MIN_POSITIVE {
        (0.0, (f / e).clamp(0.0, 1.0))
    } else if e <= f64::MIN_POSITIVE {
        ((-c / a).clamp(0.0, 1.0), 0.0)
    } else {
        let denom = a * e - b * b;
        let mut s = if denom > 1e-14 * a * e {
            ((b * f - c * e) / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let mut t = (b * s + f) / e;
        if t < 0.0 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else if t > 1.0 {
            t = 1.0;
            s = ((b - c) / a).clamp(0.0, 1.0);
        }
        (s, t)
    };
    let mut d2 = 0.0;
    for i in 0..p1.len() {
        let x = p1[i] + s * (q1[i] - p1[i]);
        let y = p2[i] + t * (q2[i] - p2[i]);
        d2 += (x - y) * (x - y);
    }
    (s, t, d2)
}

/// Orthonormal basis of the complement of unit vector `t`.
///
/// Fixed completion rule: Gram-Schmidt over the standard basis, skipping the
/// axis most aligned with `t`. Deterministic for a given `t`.
pub fn normal_basis(t: &[f64]) -> Vec<Vec<f64>> {
    let n = t.len();
    let skip = (0..n)
        .max_by(|&i, &j| t[i].abs().partial_cmp(&t[j].abs()).unwrap())
        .unwrap_or(0);
    let mut basis: Vec<Vec<f64>> = vec![t.to_vec()];
    for axis in (0..n).filter(|&i| i != skip) {
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        for b in &basis {
            let d = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
        if let Some(u) = normalized(&v) {
            basis.push(u);
        }
    }
    basis.remove(0);
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_segments_touch() {
        let (s, t, d2) = segment_segment(&[-1.0, 0.0], &[1.0, 0.0], &[0.0, -1.0], &[0.0, 1.0]);
        assert!(d2 < 1e-30);
        assert!((s - 0.5).abs() < 1e-12 && (t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parallel_segments_distance() {
        let (_, _, d2) = segment_segment(&[0.0, 0.0], &[1.0, 0.0], &[0.5, 2.0], &[3.0, 2.0]);
        assert!((d2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn skew_segments_in_space() {
        let (s, t, d2) = segment_segment(&[0.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &[1.0, -1.0, 3.0], &[1.0, 1.0, 3.0]);
        assert!((d2 - 9.0).abs() < 1e-12);
        assert!((s - 0.5).abs() < 1e-12 && (t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normal_basis_is_orthonormal() {
        let t = normalized(&[0.3, -0.4, 0.5, 0.1]).unwrap();
        let b = normal_basis(&t);
        assert_eq!(b.len(), 3);
        for (i, u) in b.iter().enumerate() {
            assert!(dot(u, &t).abs() < 1e-14);
            assert!((norm(u) - 1.0).abs() < 1e-14);
            for v in &b[i + 1..] {
                assert!(dot(u, v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn angle_is_stable_near_pi() {
        let a = angle_between(&[1.0, 0.0], &[-1.0, 1e-9]);
        assert!((a - (std::f64::consts::PI - 1e-9)).abs() < 1e-15);
    }
}

use crate::error::{Error, Result};

/// Natural cubic spline (C² with vanishing second derivative at both ends).
///
/// Piece `i` on `[x_i, x_{i+1}]` is `a + b t + c t² + d t³` with `t = x - x_i`,
/// so the third derivative is the piecewise constant `6 d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    d: Vec<f64>,
}

impl CubicSpline {
    pub fn natural(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() {
            return Err(Error::SizeMismatch { expected: n, got: y.len() });
        }
        if n < 3 {
            return Err(Error::Profile("spline needs at least 3 samples".into()));
        }
        if x.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::Profile("spline abscissae must be strictly increasing".into()));
        }
        if x.iter().chain(y).any(|v| !v.is_finite()) {
            return Err(Error::Profile("spline samples must be finite".into()));
        }

        let h: Vec<f64> = x.windows(2).map(|p| p[1] - p[0]).collect();
        // Second-derivative moments m_i; natural ends m_0 = m_{n-1} = 0.
        // Tridiagonal system for the interior moments via Thomas elimination.
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for j in 0..k {
                let i = j + 1;
                diag[j] = 2.0 * (h[i - 1] + h[i]);
                upper[j] = h[i];
                rhs[j] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
            }
            for j in 1..k {
                let lower = h[j];
                let factor = lower / diag[j - 1];
                diag[j] -= factor * upper[j - 1];
                rhs[j] -= factor * rhs[j - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for j in (0..k - 1).rev() {
                m[j + 1] = (rhs[j] - upper[j] * m[j + 2]) / diag[j];
            }
        }

        let pieces = n - 1;
        let mut a = Vec::with_capacity(pieces);
        let mut b = Vec::with_capacity(pieces);
        let mut c = Vec::with_capacity(pieces);
        let mut d = Vec::with_capacity(pieces);
        for i in 0..pieces {
            a.push(y[i]);
            b.push((y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0);
            c.push(0.5 * m[i]);
            d.push((m[i + 1] - m[i]) / (6.0 * h[i]));
        }
        Ok(Self { x: x.to_vec(), a, b, c, d })
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        *self.x.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    /// Value and first three derivatives at `r`; `r` must lie in `[lo, hi]`.
    pub fn jet(&self, r: f64) -> [f64; 4] {
        let i = self.x.partition_point(|&k| k <= r).saturating_sub(1).min(self.a.len() - 1);
        let t = r - self.x[i];
        let (a, b, c, d) = (self.a[i], self.b[i], self.c[i], self.d[i]);
        [
            a + t * (b + t * (c + t * d)),
            b + t * (2.0 * c + 3.0 * t * d),
            2.0 * c + 6.0 * t * d,
            6.0 * d,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knots_and_is_c2() {
        let x: Vec<f64> = (0..20).map(|i| 0.1 + 0.15 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|r| r.sinh()).collect();
        let s = CubicSpline::natural(&x, &y).unwrap();
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.jet(*xi)[0] - yi).abs() < 1e-12);
        }
        for &k in &x[1..x.len() - 1] {
            let l = s.jet(k - 1e-12);
            let r = s.jet(k + 1e-12);
            assert!((l[1] - r[1]).abs() < 1e-9);
            assert!((l[2] - r[2]).abs() < 1e-9);
        }
        let ends = [s.jet(s.lo())[2], s.jet(s.hi())[2]];
        assert!(ends[0].abs() < 1e-12 && ends[1].abs() < 1e-9);
    }

    #[test]
    fn interior_accuracy_on_smooth_data() {
        let x: Vec<f64> = (0..=60).map(|i| 0.5 * i as f64 / 10.0).collect();
        let y: Vec<f64> = x.iter().map(|r| r.sinh()).collect();
        let s = CubicSpline::natural(&x, &y).unwrap();
        let r = 1.234;
        let j = s.jet(r);
        assert!((j[0] - r.sinh()).abs() < 1e-6);
        assert!((j[1] - r.cosh()).abs() < 1e-4);
    }

    #[test]
    fn rejects_non_monotone_abscissae() {
        assert!(CubicSpline::natural(&[0.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(CubicSpline::natural(&[0.0, 1.0], &[1.0, 2.0]).is_err());
    }
}

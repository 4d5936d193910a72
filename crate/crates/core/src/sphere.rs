//! Finite-difference operators and quadrature on the reference sphere.
//!
//! `n = 1`: periodic circle, nodes `theta_i = 2 pi i / N`, trapezoid weights.
//! `n = 2`: axisymmetric functions of the polar angle on the staggered nodes
//! `theta_j = (j + 1/2) pi / N` (no pole nodes). Ghost values are reflected
//! across the poles, which is exact for data even in `theta`. Weights are
//! `2 pi` times Fejér's first-rule weights, which integrate constants exactly
//! and are spectrally accurate for smooth even data.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Accuracy order of the central-difference stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    Second,
    #[default]
    Fourth,
}

impl Stencil {
    pub fn order(self) -> usize {
        match self {
            Stencil::Second => 2,
            Stencil::Fourth => 4,
        }
    }

    pub fn from_order(order: usize) -> Result<Self> {
        match order {
            2 => Ok(Stencil::Second),
            4 => Ok(Stencil::Fourth),
            other => Err(Error::Argument(format!("stencil order must be 2 or 4, got {other}"))),
        }
    }
}

pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSn {
    n: usize,
    stencil: Stencil,
    h: f64,
    angles: Vec<f64>,
    weights: Vec<f64>,
}

/// Second-derivative data at each node.
///
/// For `n = 2` the Hessian of an axisymmetric function in the `(theta, phi)`
/// frame is `diag(rho_tt, sin cos * rho_t)`, and the Laplacian is
/// `rho_tt + cot * rho_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianTerms {
    pub second: Vec<f64>,
    pub cot_first: Option<Vec<f64>>,
    pub sin_cos_first: Option<Vec<f64>>,
}

impl HessianTerms {
    /// Laplacian on the unit sphere.
    pub fn laplacian(&self) -> Vec<f64> {
        match &self.cot_first {
            None => self.second.clone(),
            Some(c) => self.second.iter().zip(c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl GridSn {
    pub fn new(n: usize, nodes: usize, stencil: Stencil) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::Argument(format!("grid needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        let (h, angles, weights) = match n {
            1 => {
                let h = 2.0 * PI / nodes as f64;
                let angles = (0..nodes).map(|i| i as f64 * h).collect();
                (h, angles, vec![h; nodes])
            }
            2 => {
                let h = PI / nodes as f64;
                let angles: Vec<f64> = (0..nodes).map(|j| (j as f64 + 0.5) * h).collect();
                let weights = angles.iter().map(|&t| 2.0 * PI * fejer_weight(t, nodes)).collect();
                (h, angles, weights)
            }
            _ => return Err(Error::Argument(format!("sphere dimension must be 1 or 2, got {n}"))),
        };
        Ok(Self { n, stencil, h, angles, weights })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn stencil(&self) -> Stencil {
        self.stencil
    }

    /// Angular spacing.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Same dimension and stencil, different resolution.
    pub fn with_nodes(&self, nodes: usize) -> Result<Self> {
        Self::new(self.n, nodes, self.stencil)
    }

    fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::SizeMismatch { expected: self.len(), got: values.len() });
        }
        Ok(())
    }

    #[inline]
    fn at(&self, values: &[f64], i: isize) -> f64 {
        let m = values.len() as isize;
        let k = if self.n == 1 {
            i.rem_euclid(m)
        } else if i < 0 {
            -1 - i
        } else if i >= m {
            2 * m - 1 - i
        } else {
            i
        };
        values[k as usize]
    }

    /// Central first and second derivatives at every node.
    pub fn derivatives(&self, values: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check(values)?;
        let h = self.h;
        let mut d1 = Vec::with_capacity(values.len());
        let mut d2 = Vec::with_capacity(values.len());
        for i in 0..values.len() as isize {
            let f0 = values[i as usize];
            let fp1 = self.at(values, i + 1);
            let fm1 = self.at(values, i - 1);
            match self.stencil {
                Stencil::Second => {
                    d1.push((fp1 - fm1) / (2.0 * h));
                    d2.push(((fp1 - f0) + (fm1 - f0)) / (h * h));
                }
                Stencil::Fourth => {
                    let fp2 = self.at(values, i + 2);
                    let fm2 = self.at(values, i - 2);
                    d1.push((8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h));
                    d2.push((16.0 * ((fp1 - f0) + (fm1 - f0)) - ((fp2 - f0) + (fm2 - f0))) / (12.0 * h * h));
                }
            }
        }
        Ok((d1, d2))
    }

    /// `|grad rho|^2` in the unit-sphere metric.
    pub fn grad_sq(&self, values: &[f64]) -> Result<Vec<f64>> {
        let (d1, _) = self.derivatives(values)?;
        Ok(d1.into_iter().map(|g| g * g).collect())
    }

    pub fn hessian_terms(&self, values: &[f64]) -> Result<HessianTerms> {
        let (d1, d2) = self.derivatives(values)?;
        if self.n == 1 {
            return Ok(HessianTerms { second: d2, cot_first: None, sin_cos_first: None });
        }
        let mut cot = Vec::with_capacity(d1.len());
        let mut sc = Vec::with_capacity(d1.len());
        for (&t, g) in self.angles.iter().zip(&d1) {
            let (s, c) = t.sin_cos();
            cot.push(c / s * g);
            sc.push(s * c * g);
        }
        Ok(HessianTerms { second: d2, cot_first: Some(cot), sin_cos_first: Some(sc) })
    }

    /// Weighted sum over nodes, accumulated left to right.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        self.check(values)?;
        if self.n == 1 {
            // Equal weights: factoring out h keeps constants exact.
            return Ok(self.h * values.iter().fold(0.0, |acc, v| acc + v));
        }
        Ok(self.weights.iter().zip(values).fold(0.0, |acc, (w, v)| acc + w * v))
    }

    /// Sum of the quadrature weights: the discrete `|S^n|`.
    pub fn measure(&self) -> f64 {
        self.weights.iter().fold(0.0, |acc, w| acc + w)
    }

    /// Trigonometric interpolation of nodal data onto another grid of the
    /// same dimension. For `n = 2` the data is extended evenly across the
    /// poles first, so only cosine modes appear.
    pub fn resample(&self, values: &[f64], target: &GridSn) -> Result<Vec<f64>> {
        self.check(values)?;
        if target.n != self.n {
            return Err(Error::Argument("resampling requires grids of equal dimension".into()));
        }
        let (x0, samples): (f64, Vec<f64>) = if self.n == 1 {
            (0.0, values.to_vec())
        } else {
            let mut ext = values.to_vec();
            ext.extend(values.iter().rev());
            (0.5 * self.h, ext)
        };
        let m = samples.len();
        let step = 2.0 * PI / m as f64;
        let kmax = m / 2;
        let mut a = vec![0.0; kmax + 1];
        let mut b = vec![0.0; kmax + 1];
        for k in 0..=kmax {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (j, f) in samples.iter().enumerate() {
                let x = x0 + j as f64 * step;
                let (s, c) = (k as f64 * x).sin_cos();
                sa += f * c;
                sb += f * s;
            }
            a[k] = 2.0 * sa / m as f64;
            b[k] = 2.0 * sb / m as f64;
        }
        let eval = |x: f64| {
            let mut v = 0.5 * a[0];
            for k in 1..=kmax {
                let (s, c) = (k as f64 * x).sin_cos();
                let half = if 2 * k == m { 0.5 } else { 1.0 };
                v += half * (a[k] * c + b[k] * s);
            }
            v
        };
        Ok(target.angles.iter().map(|&x| eval(x)).collect())
    }
}

/// Fejér first-rule weight for `∫_{-1}^{1} f(x) dx` at `x = cos theta`,
/// `theta = (j + 1/2) pi / N`.
fn fejer_weight(theta: f64, nodes: usize) -> f64 {
    let mut s = 0.0;
    for k in 1..=nodes / 2 {
        let kf = k as f64;
        s += (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
    }
    2.0 / nodes as f64 * (1.0 - 2.0 * s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, nodes: usize) -> GridSn {
        GridSn::new(n, nodes, Stencil::default()).unwrap()
    }

    fn nearest(g: &GridSn, angle: f64) -> usize {
        let mut best = 0;
        for (i, t) in g.angles().iter().enumerate() {
            if (t - angle).abs() < (g.angles()[best] - angle).abs() {
                best = i;
            }
        }
        best
    }

    #[test]
    fn rejects_small_grids_and_bad_sizes() {
        assert!(GridSn::new(1, 7, Stencil::Fourth).is_err());
        assert!(GridSn::new(3, 16, Stencil::Fourth).is_err());
        let g = grid(1, 16);
        assert!(matches!(g.grad_sq(&[1.0; 15]), Err(Error::SizeMismatch { .. })));
        assert!(g.integrate(&[1.0; 17]).is_err());
    }

    #[test]
    fn constants_have_zero_derivatives() {
        for (n, stencil) in [(1, Stencil::Second), (1, Stencil::Fourth), (2, Stencil::Second), (2, Stencil::Fourth)] {
            let g = GridSn::new(n, 32, stencil).unwrap();
            let c = vec![1.7; 32];
            assert!(g.grad_sq(&c).unwrap().iter().all(|v| *v == 0.0));
            let h = g.hessian_terms(&c).unwrap();
            assert!(h.laplacian().iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn circle_derivative_examples() {
        let g = grid(1, 256);
        let rho: Vec<f64> = g.angles().iter().map(|t| t.cos()).collect();
        let gs = g.grad_sq(&rho).unwrap();
        assert!((gs[nearest(&g, PI / 2.0)] - 1.0).abs() < 1e-4);
        let h = g.hessian_terms(&rho).unwrap();
        assert!((h.second[0] + 1.0).abs() < 1e-4);
    }

    #[test]
    fn sphere_derivative_examples() {
        let g = grid(2, 256);
        let rho: Vec<f64> = g.angles().iter().map(|t| t.cos()).collect();
        let gs = g.grad_sq(&rho).unwrap();
        let i = nearest(&g, PI / 2.0);
        assert!((gs[i] - g.angles()[i].sin().powi(2)).abs() < 1e-3);
        assert!((gs[i] - 1.0).abs() < 1e-3);
        let lap = g.hessian_terms(&rho).unwrap().laplacian();
        for (t, l) in g.angles().iter().zip(&lap) {
            assert!((l + 2.0 * t.cos()).abs() < 1e-3, "theta {t}: {l}");
        }
    }

    #[test]
    fn integration_examples() {
        let g1 = grid(1, 64);
        assert_eq!(g1.integrate(&[1.0; 64]).unwrap(), g1.spacing() * 64.0);
        assert!((g1.integrate(&[1.0; 64]).unwrap() - 2.0 * PI).abs() < 1e-14);
        let c: Vec<f64> = g1.angles().iter().map(|t| t.cos()).collect();
        assert!(g1.integrate(&c).unwrap().abs() < 1e-12);

        let g2 = grid(2, 256);
        assert!((g2.integrate(&[1.0; 256]).unwrap() - 4.0 * PI).abs() < 1e-12);
        let cos2: Vec<f64> = g2.angles().iter().map(|t| t.cos().powi(2)).collect();
        assert!((g2.integrate(&cos2).unwrap() - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    fn error_at(n: usize, nodes: usize, stencil: Stencil) -> [f64; 3] {
        // rho = exp(cos theta) is smooth and even across the poles.
        let g = GridSn::new(n, nodes, stencil).unwrap();
        let rho: Vec<f64> = g.angles().iter().map(|t| t.cos().exp()).collect();
        let gs = g.grad_sq(&rho).unwrap();
        let h = g.hessian_terms(&rho).unwrap();
        let lap = h.laplacian();
        let mut e = [0.0f64; 3];
        for (i, &t) in g.angles().iter().enumerate() {
            let (s, c) = t.sin_cos();
            let f = c.exp();
            let d1 = -s * f;
            let d2 = (s * s - c) * f;
            let exact_lap = if n == 1 { d2 } else { d2 + c / s * d1 };
            e[0] = e[0].max((gs[i] - d1 * d1).abs());
            e[1] = e[1].max((h.second[i] - d2).abs());
            e[2] = e[2].max((lap[i] - exact_lap).abs());
        }
        e
    }

    #[test]
    fn stencils_converge_at_least_second_order() {
        for n in [1, 2] {
            for stencil in [Stencil::Second, Stencil::Fourth] {
                let coarse = error_at(n, 32, stencil);
                let fine = error_at(n, 64, stencil);
                for k in 0..3 {
                    let slope = (coarse[k] / fine[k]).log2();
                    assert!(slope >= 1.9, "n={n} {stencil:?} op {k}: slope {slope}");
                }
            }
        }
    }

    #[test]
    fn pole_terms_are_finite() {
        let g = grid(2, 16);
        let rho: Vec<f64> = g.angles().iter().map(|t| 1.0 + 0.3 * (2.0 * t).cos()).collect();
        let h = g.hessian_terms(&rho).unwrap();
        for v in h.second.iter().chain(h.cot_first.as_ref().unwrap()).chain(h.sin_cos_first.as_ref().unwrap()) {
            assert!(v.is_finite());
        }
    }

    #[test]
    fn resampling_reproduces_band_limited_data() {
        let coarse = grid(1, 16);
        let fine = grid(1, 40);
        let f = |t: f64| 2.0 + 0.3 * (3.0 * t + 0.4).cos() - 0.1 * (5.0 * t).sin();
        let vals: Vec<f64> = coarse.angles().iter().map(|&t| f(t)).collect();
        let out = coarse.resample(&vals, &fine).unwrap();
        for (t, v) in fine.angles().iter().zip(out) {
            assert!((v - f(*t)).abs() < 1e-13);
        }

        let c2 = grid(2, 16);
        let f2 = grid(2, 48);
        let g = |t: f64| 1.0 + 0.05 * (2.0 * t).cos() + 0.01 * (4.0 * t).cos();
        let vals: Vec<f64> = c2.angles().iter().map(|&t| g(t)).collect();
        let out = c2.resample(&vals, &f2).unwrap();
        for (t, v) in f2.angles().iter().zip(out) {
            assert!((v - g(*t)).abs() < 1e-13);
        }
    }
}

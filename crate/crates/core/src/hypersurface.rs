//! Radial graphs `{(rho(theta), theta)}` over `S^n` and their extrinsic geometry.
//!
//! With `w = w(rho)`, `v = sqrt(1 + |grad rho|^2 / w^2)` and outward normal,
//! the induced metric is `g = w^2 sigma + d rho ⊗ d rho` and the second
//! fundamental form is
//! `h = (-Hess rho + w w' sigma + (2 w'/w) d rho ⊗ d rho) / v`.
//! Both are diagonal in the coordinate frame (for `n = 2` because the graph is
//! axisymmetric), so the principal curvatures are ratios of diagonal entries.

use serde::Serialize;

use crate::ambient::{curvatures_from_jet, ricci_mix, AmbientSpace, Jet};
use crate::error::{Error, Result};
use crate::sphere::GridSn;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGraph {
    grid: GridSn,
    rho: Vec<f64>,
}

impl RadialGraph {
    /// Validates that every radius is finite and strictly inside the profile domain.
    pub fn new(space: &AmbientSpace, grid: GridSn, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != grid.len() {
            return Err(Error::SizeMismatch { expected: grid.len(), got: rho.len() });
        }
        if grid.n() != space.n() {
            return Err(Error::Argument(format!(
                "grid dimension {} does not match ambient hypersurface dimension {}",
                grid.n(),
                space.n()
            )));
        }
        let (lo, hi) = space.profile.domain();
        if let Some(&r) = rho.iter().find(|r| !(**r > lo && **r < hi)) {
            return Err(Error::Domain { r, lo, hi });
        }
        Ok(Self { grid, rho })
    }

    /// Builds a graph by sampling `f` at the grid angles.
    pub fn from_fn(space: &AmbientSpace, grid: GridSn, f: impl Fn(f64) -> f64) -> Result<Self> {
        let rho = grid.angles().iter().map(|&t| f(t)).collect();
        Self::new(space, grid, rho)
    }

    pub fn grid(&self) -> &GridSn {
        &self.grid
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn into_rho(self) -> Vec<f64> {
        self.rho
    }

    pub fn mean_rho(&self) -> f64 {
        self.rho.iter().sum::<f64>() / self.rho.len() as f64
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Same surface on a grid of a different resolution, by trigonometric
    /// interpolation.
    pub fn resampled(&self, space: &AmbientSpace, nodes: usize) -> Result<Self> {
        let target = self.grid.with_nodes(nodes)?;
        let rho = self.grid.resample(&self.rho, &target)?;
        Self::new(space, target, rho)
    }
}

/// All extrinsic geometry of one time slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometrySnapshot {
    pub n: usize,
    pub angle: Vec<f64>,
    pub rho: Vec<f64>,
    #[serde(skip)]
    pub jet: Vec<Jet>,
    pub grad_sq: Vec<f64>,
    pub v: Vec<f64>,
    /// Support function `u = <xi, nu> = w / v`.
    pub u: Vec<f64>,
    /// Principal curvature along the meridian (the only one for `n = 1`).
    pub kappa1: Vec<f64>,
    /// Principal curvature along the parallels (`n = 2` only).
    pub kappa2: Option<Vec<f64>>,
    pub mean_curvature: Vec<f64>,
    pub norm_a_sq: Vec<f64>,
    pub sigma2: Option<Vec<f64>>,
    pub dmu: Vec<f64>,
    /// Normal speed `n phi - u H`.
    pub speed: Vec<f64>,

    pub area: f64,
    pub max_h: f64,
    pub min_u: f64,
    pub eta_max: f64,
    pub omega_max: f64,
    pub deficit: f64,
    /// Extremes of the level function `(w/w')^2`; `None` where `w'` vanishes.
    pub c0_min: Option<f64>,
    pub c0_max: Option<f64>,
    pub max_speed: f64,
    pub max_phi: f64,
}

impl GeometrySnapshot {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// `rho_t = f v`, the radial velocity of the graph.
    pub fn radial_velocity(&self) -> Vec<f64> {
        self.speed.iter().zip(&self.v).map(|(f, v)| f * v).collect()
    }

    pub fn decay(&self) -> DecayQuantities {
        DecayQuantities { eta_max: self.eta_max, omega_max: self.omega_max, deficit: self.deficit }
    }
}

pub fn compute_geometry(space: &AmbientSpace, graph: &RadialGraph) -> Result<GeometrySnapshot> {
    let grid = graph.grid();
    let n = space.n();
    let nf = n as f64;
    let (d1, d2) = grid.derivatives(graph.rho())?;
    let len = grid.len();

    let mut snap = GeometrySnapshot {
        n,
        angle: grid.angles().to_vec(),
        rho: graph.rho().to_vec(),
        jet: Vec::with_capacity(len),
        grad_sq: Vec::with_capacity(len),
        v: Vec::with_capacity(len),
        u: Vec::with_capacity(len),
        kappa1: Vec::with_capacity(len),
        kappa2: (n == 2).then(|| Vec::with_capacity(len)),
        mean_curvature: Vec::with_capacity(len),
        norm_a_sq: Vec::with_capacity(len),
        sigma2: (n == 2).then(|| Vec::with_capacity(len)),
        dmu: Vec::with_capacity(len),
        speed: Vec::with_capacity(len),
        area: 0.0,
        max_h: f64::NEG_INFINITY,
        min_u: f64::INFINITY,
        eta_max: 0.0,
        omega_max: 0.0,
        deficit: 0.0,
        c0_min: Some(f64::INFINITY),
        c0_max: Some(f64::NEG_INFINITY),
        max_speed: 0.0,
        max_phi: f64::NEG_INFINITY,
    };

    for i in 0..len {
        let j = space.eval(graph.rho()[i])?;
        let (w, dw) = (j.w, j.dw);
        let p = d1[i];
        let gs = p * p;
        let v = (1.0 + gs / (w * w)).sqrt();
        let u = w / v;
        if !(u > 0.0) {
            return Err(Error::StarShape { node: i, u });
        }
        let k1 = (-d2[i] + w * dw + 2.0 * dw / w * gs) / (v * (w * w + gs));
        let (h, a2) = if n == 1 {
            (k1, k1 * k1)
        } else {
            let t = grid.angles()[i];
            let cot = t.cos() / t.sin();
            let k2 = (-cot * p + w * dw) / (v * w * w);
            snap.kappa2.as_mut().unwrap().push(k2);
            snap.sigma2.as_mut().unwrap().push(k1 * k2);
            // |A|^2 - H^2/2 = (k1 - k2)^2 / 2, computed without cancellation.
            snap.deficit = snap.deficit.max(0.5 * (k1 - k2) * (k1 - k2));
            (k1 + k2, k1 * k1 + k2 * k2)
        };
        let dmu = w.powi(n as i32) * v * grid.weights()[i];
        let f = nf * dw - u * h;

        snap.area += dmu;
        snap.max_h = snap.max_h.max(h);
        snap.min_u = snap.min_u.min(u);
        snap.eta_max = snap.eta_max.max(gs / (w * w));
        snap.omega_max = snap.omega_max.max(0.5 * gs);
        snap.max_speed = snap.max_speed.max(f.abs());
        snap.max_phi = snap.max_phi.max(dw);
        if dw != 0.0 {
            let level = (w / dw) * (w / dw);
            snap.c0_min = snap.c0_min.map(|m| m.min(level));
            snap.c0_max = snap.c0_max.map(|m| m.max(level));
        } else {
            snap.c0_min = None;
            snap.c0_max = None;
        }

        snap.jet.push(j);
        snap.grad_sq.push(gs);
        snap.v.push(v);
        snap.u.push(u);
        snap.kappa1.push(k1);
        snap.mean_curvature.push(h);
        snap.norm_a_sq.push(a2);
        snap.dmu.push(dmu);
        snap.speed.push(f);
    }
    Ok(snap)
}

fn check_inner_radius(space: &AmbientSpace, graph: &RadialGraph, r1: f64) -> Result<()> {
    let (lo, _) = space.profile.domain();
    if r1 < lo {
        return Err(Error::Argument(format!("inner radius {r1} below domain start {lo}")));
    }
    if !(r1 < graph.min_rho()) {
        return Err(Error::Argument(format!(
            "inner radius {r1} must be below the graph minimum {}",
            graph.min_rho()
        )));
    }
    Ok(())
}

/// Volume between the leaf `{r1}` and the graph.
pub fn enclosed_volume(space: &AmbientSpace, graph: &RadialGraph, r1: f64) -> Result<f64> {
    check_inner_radius(space, graph, r1)?;
    let grid = graph.grid();
    let mut total = 0.0;
    for (w, rho) in grid.weights().iter().zip(graph.rho()) {
        total += w * space.radial_integral(r1, *rho)?;
    }
    Ok(total)
}

/// Same as [`enclosed_volume`], with each radial integral split at `r_ref`.
/// The common part is evaluated once, so repeated calls with a fixed `r_ref`
/// only see quadrature error from the short per-node pieces.
pub fn enclosed_volume_split(space: &AmbientSpace, graph: &RadialGraph, r1: f64, r_ref: f64) -> Result<f64> {
    check_inner_radius(space, graph, r1)?;
    let grid = graph.grid();
    let base = grid.measure() * space.radial_integral(r1, r_ref)?;
    let mut local = 0.0;
    for (w, rho) in grid.weights().iter().zip(graph.rho()) {
        local += w * space.radial_integral(r_ref, *rho)?;
    }
    Ok(base + local)
}

pub fn surface_area(space: &AmbientSpace, graph: &RadialGraph) -> Result<f64> {
    Ok(compute_geometry(space, graph)?.area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinkowskiResiduals {
    /// `∫ (n phi - u H) dmu / (A max|H|)`
    pub res1: f64,
    /// `[(n-1) ∫ phi H - 2 ∫ sigma2 u - ∫ u (Ric(N,N) - Ric(nu,nu))] / (A max|H|)`, `n = 2` only.
    pub res2: Option<f64>,
}

pub fn minkowski_residuals(space: &AmbientSpace, snap: &GeometrySnapshot) -> Result<MinkowskiResiduals> {
    let n = space.n();
    let max_abs_h = snap.mean_curvature.iter().fold(0.0f64, |m, h| m.max(h.abs()));
    let scale = if max_abs_h > 0.0 { snap.area * max_abs_h } else { snap.area };

    let mut first = 0.0;
    for (f, dmu) in snap.speed.iter().zip(&snap.dmu) {
        first += f * dmu;
    }
    let res2 = match &snap.sigma2 {
        Some(sigma2) if n == 2 => {
            let mut second = 0.0;
            for i in 0..snap.len() {
                let j = &snap.jet[i];
                let c = curvatures_from_jet(j, n);
                let cos_alpha = (snap.u[i] / j.w).min(1.0);
                let ric_gap = c.ric_nn - ricci_mix(&c, cos_alpha);
                let integrand = (n as f64 - 1.0) * j.dw * snap.mean_curvature[i]
                    - 2.0 * sigma2[i] * snap.u[i]
                    - snap.u[i] * ric_gap;
                second += integrand * snap.dmu[i];
            }
            Some(second / scale)
        }
        _ => None,
    };
    Ok(MinkowskiResiduals { res1: first / scale, res2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayQuantities {
    /// `max (|xi|^2/u^2 - 1) = max (v^2 - 1)`
    pub eta_max: f64,
    /// `max |xi|^2 eta / 2 = max |grad rho|^2 / 2`
    pub omega_max: f64,
    /// `max (|A|^2 - H^2/n)`, zero iff umbilical.
    pub deficit: f64,
}

pub fn decay_quantities(snap: &GeometrySnapshot) -> DecayQuantities {
    snap.decay()
}

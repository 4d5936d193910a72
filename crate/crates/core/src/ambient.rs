//! Warped-product ambient `dr^2 + w(r)^2 sigma` over the unit round `S^n`.
//!
//! The closed conformal field is `xi = w(r) d_r` with conformal factor
//! `phi = w'`. Everything here is a closed-form function of the jet
//! `(w, w', w'', w''')`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, ABS_TOL, REL_TOL};
use crate::spline::CubicSpline;

/// Value and first three radial derivatives of the warping function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jet {
    pub w: f64,
    pub dw: f64,
    pub d2w: f64,
    pub d3w: f64,
}

/// Spline-backed warping data. Derivative columns, when present, are
/// authoritative for `w'` and `w''` instead of differentiating the `w` spline.
#[derive(Debug, Clone, PartialEq)]
pub struct TableProfile {
    w: CubicSpline,
    dw: Option<CubicSpline>,
    d2w: Option<CubicSpline>,
}

impl TableProfile {
    pub fn from_samples(r: &[f64], w: &[f64]) -> Result<Self> {
        validate_table_samples(r, w)?;
        Ok(Self { w: CubicSpline::natural(r, w)?, dw: None, d2w: None })
    }

    pub fn with_derivatives(r: &[f64], w: &[f64], dw: &[f64], d2w: &[f64]) -> Result<Self> {
        validate_table_samples(r, w)?;
        Ok(Self {
            w: CubicSpline::natural(r, w)?,
            dw: Some(CubicSpline::natural(r, dw)?),
            d2w: Some(CubicSpline::natural(r, d2w)?),
        })
    }

    fn jet(&self, r: f64) -> Jet {
        let base = self.w.jet(r);
        match (&self.dw, &self.d2w) {
            (Some(dw), Some(d2w)) => {
                let second = d2w.jet(r);
                Jet { w: base[0], dw: dw.jet(r)[0], d2w: second[0], d3w: second[1] }
            }
            _ => Jet { w: base[0], dw: base[1], d2w: base[2], d3w: base[3] },
        }
    }

    pub fn knots(&self) -> &[f64] {
        self.w.knots()
    }
}

fn validate_table_samples(r: &[f64], w: &[f64]) -> Result<()> {
    if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(Error::Profile(format!("negative warping sample w = {v} at row {i}")));
    }
    if let Some((i, _)) = w.iter().enumerate().skip(1).find(|(_, v)| **v == 0.0) {
        return Err(Error::Profile(format!("warping sample vanishes at interior row {i}")));
    }
    if r.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Profile("table radii must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileFamily {
    /// `w = r`
    Euclidean,
    /// `w = sin r`
    Sphere,
    /// `w = sinh r`
    Hyperbolic,
    /// `w = sum c_k r^k`
    Polynomial(Vec<f64>),
    Table(Box<TableProfile>),
}

impl ProfileFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ProfileFamily::Euclidean => "euclidean",
            ProfileFamily::Sphere => "sphere",
            ProfileFamily::Hyperbolic => "hyperbolic",
            ProfileFamily::Polynomial(_) => "polynomial",
            ProfileFamily::Table(_) => "table",
        }
    }

    pub fn is_space_form(&self) -> bool {
        matches!(self, ProfileFamily::Euclidean | ProfileFamily::Sphere | ProfileFamily::Hyperbolic)
    }
}

/// Warping function `w` on a closed radius interval, optionally scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingProfile {
    family: ProfileFamily,
    scale: f64,
    lo: f64,
    hi: f64,
    check_lo: f64,
    check_hi: f64,
}

impl WarpingProfile {
    pub fn euclidean() -> Self {
        Self::unchecked(ProfileFamily::Euclidean, 0.0, 10.0)
    }

    /// Round sphere on `[0, pi]`; condition checks default to the hemisphere
    /// `(0, pi/2)` where `phi = cos r > 0`.
    pub fn sphere() -> Self {
        let mut p = Self::unchecked(ProfileFamily::Sphere, 0.0, PI);
        p.check_hi = 0.5 * PI;
        p
    }

    /// Hyperbolic space on `[0, 5]`; checks default to `[0, 2]`, beyond which
    /// `w/w'` is flat to within finite-difference resolution.
    pub fn hyperbolic() -> Self {
        let mut p = Self::unchecked(ProfileFamily::Hyperbolic, 0.0, 5.0);
        p.check_hi = 2.0;
        p
    }

    pub fn polynomial(coefficients: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Profile("polynomial needs finite coefficients".into()));
        }
        Self::unchecked(ProfileFamily::Polynomial(coefficients), lo, hi).validated()
    }

    pub fn table(table: TableProfile) -> Result<Self> {
        let (lo, hi) = (table.w.lo(), table.w.hi());
        Self::unchecked(ProfileFamily::Table(Box::new(table)), lo, hi).validated()
    }

    fn unchecked(family: ProfileFamily, lo: f64, hi: f64) -> Self {
        Self { family, scale: 1.0, lo, hi, check_lo: lo, check_hi: hi }
    }

    /// Restricts (or extends, for analytic families) the radius domain.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if let ProfileFamily::Table(t) = &self.family {
            if lo < t.w.lo() || hi > t.w.hi() {
                return Err(Error::Profile("table domain cannot exceed its samples".into()));
            }
        }
        let hemisphere = matches!(self.family, ProfileFamily::Sphere);
        self.lo = lo;
        self.hi = hi;
        self.check_lo = lo;
        self.check_hi = if hemisphere { hi.min(0.5 * PI) } else { hi };
        self.validated()
    }

    /// Multiplies `w` (and all its derivatives) by a positive constant.
    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Profile(format!("scale must be positive, got {scale}")));
        }
        self.scale = scale;
        Ok(self)
    }

    /// Sets the radius interval sampled by [`AmbientSpace::check_conditions`].
    pub fn with_check_range(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || lo < self.lo || hi > self.hi {
            return Err(Error::Profile(format!("check range [{lo}, {hi}] must lie inside the domain")));
        }
        self.check_lo = lo;
        self.check_hi = hi;
        Ok(self)
    }

    fn validated(self) -> Result<Self> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Profile(format!("empty or invalid domain [{}, {}]", self.lo, self.hi)));
        }
        let at_lo = self.raw_jet(self.lo).w;
        if at_lo < 0.0 {
            return Err(Error::Profile(format!("w({}) = {at_lo} is negative", self.lo)));
        }
        const PROBES: usize = 2000;
        for k in 1..PROBES {
            let r = self.lo + (self.hi - self.lo) * k as f64 / PROBES as f64;
            let w = self.raw_jet(r).w;
            if !(w > 0.0) {
                return Err(Error::Profile(format!("w({r}) = {w} is not positive in the domain interior")));
            }
        }
        let at_hi = self.raw_jet(self.hi).w;
        if at_hi < 0.0 {
            return Err(Error::Profile(format!("w({}) = {at_hi} is negative", self.hi)));
        }
        Ok(self)
    }

    pub fn family(&self) -> &ProfileFamily {
        &self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn check_range(&self) -> (f64, f64) {
        (self.check_lo, self.check_hi)
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.lo && r <= self.hi
    }

    /// `(w, w', w'', w''')` at `r`.
    pub fn eval(&self, r: f64) -> Result<Jet> {
        if !self.contains(r) {
            return Err(Error::Domain { r, lo: self.lo, hi: self.hi });
        }
        Ok(self.raw_jet(r))
    }

    /// `w'^2 - w w''`, in closed form for the space forms (where the direct
    /// expression cancels catastrophically at large `r`).
    pub(crate) fn raw_q(&self, r: f64) -> f64 {
        match self.family {
            ProfileFamily::Euclidean | ProfileFamily::Sphere | ProfileFamily::Hyperbolic => self.scale * self.scale,
            _ => {
                let j = self.raw_jet(r);
                j.dw * j.dw - j.w * j.d2w
            }
        }
    }

    fn raw_jet(&self, r: f64) -> Jet {
        let j = match &self.family {
            ProfileFamily::Euclidean => Jet { w: r, dw: 1.0, d2w: 0.0, d3w: 0.0 },
            ProfileFamily::Sphere => {
                let (s, c) = r.sin_cos();
                Jet { w: s, dw: c, d2w: -s, d3w: -c }
            }
            ProfileFamily::Hyperbolic => {
                let (s, c) = (r.sinh(), r.cosh());
                Jet { w: s, dw: c, d2w: s, d3w: c }
            }
            ProfileFamily::Polynomial(c) => polynomial_jet(c, r),
            ProfileFamily::Table(t) => t.jet(r),
        };
        let s = self.scale;
        Jet { w: s * j.w, dw: s * j.dw, d2w: s * j.d2w, d3w: s * j.d3w }
    }
}

fn polynomial_jet(c: &[f64], r: f64) -> Jet {
    // Horner with derivative recurrences; updates read the previous iterate.
    let (mut p0, mut p1, mut p2, mut p3) = (0.0, 0.0, 0.0, 0.0);
    for &ck in c.iter().rev() {
        p3 = p3 * r + 3.0 * p2;
        p2 = p2 * r + 2.0 * p1;
        p1 = p1 * r + p0;
        p0 = p0 * r + ck;
    }
    Jet { w: p0, dw: p1, d2w: p2, d3w: p3 }
}

/// Conformal-field data of a radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConformalData {
    pub phi: f64,
    /// `xi(phi) = w w''`
    pub xi_phi: f64,
    /// `xi(xi(phi)) = w (w' w'' + w w''')`
    pub xi_xi_phi: f64,
    /// `|xi|^2 = w^2`
    pub xi_sq: f64,
    /// `phi^2 - xi(phi) = w'^2 - w w''`
    pub phi2_minus_xi_phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafQuantities {
    pub mean_curvature: f64,
    pub area: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Curvatures {
    /// Sectional curvature of planes containing `d_r`.
    pub k_rad: f64,
    /// Sectional curvature of planes tangent to the leaf.
    pub k_tan: f64,
    pub ric_nn: f64,
    /// Ricci curvature of a unit vector tangent to the leaf.
    pub ric_ee: f64,
}

/// Margin and verdict of one admissibility condition over the sampled radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub name: &'static str,
    pub min_margin: f64,
    pub argmin_r: f64,
    pub pass: bool,
    /// Margin is positive at every sample.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub range: (f64, f64),
    pub samples: usize,
    /// (i) `phi > 0`
    pub phi_positive: ConditionVerdict,
    /// (ii) `phi^2 - xi(phi) > 0`
    pub phi2_minus_xi_phi: ConditionVerdict,
    /// (iv) `xi` is a direction of least Ricci curvature: `1 - (w'^2 - w w'') >= 0`
    pub ricci_minimal: ConditionVerdict,
    /// Sectional bound `K(X, xi) >= -phi^2/|xi|^2`: `w'^2 - w w'' >= 0`
    pub sectional: ConditionVerdict,
}

impl ConditionReport {
    pub fn verdicts(&self) -> [&ConditionVerdict; 4] {
        [&self.phi_positive, &self.phi2_minus_xi_phi, &self.ricci_minimal, &self.sectional]
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts().iter().all(|v| v.pass)
    }

    /// Conditions (i), (ii) and (iv) under which area is non-increasing.
    pub fn monotonicity_holds(&self) -> bool {
        self.phi_positive.pass && self.phi2_minus_xi_phi.pass && self.ricci_minimal.pass
    }
}

/// Tolerance for the non-strict conditions, absorbing rounding in
/// `w'^2 - w w''` for the space forms where it is identically one.
pub const CONDITION_TOL: f64 = 1e-12;

/// Ambient manifold of dimension `n + 1` with hypersurface dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSpace {
    pub profile: WarpingProfile,
    n: usize,
}

impl AmbientSpace {
    pub fn new(profile: WarpingProfile, n: usize) -> Result<Self> {
        if n != 1 && n != 2 {
            return Err(Error::Argument(format!("hypersurface dimension must be 1 or 2, got {n}")));
        }
        Ok(Self { profile, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `|S^n|` of the unit round sphere.
    pub fn sphere_measure(&self) -> f64 {
        if self.n == 1 {
            2.0 * PI
        } else {
            4.0 * PI
        }
    }

    pub fn eval(&self, r: f64) -> Result<Jet> {
        self.profile.eval(r)
    }

    pub fn conformal_data(&self, r: f64) -> Result<ConformalData> {
        let j = self.eval(r)?;
        Ok(ConformalData {
            phi: j.dw,
            xi_phi: j.w * j.d2w,
            xi_xi_phi: j.w * (j.dw * j.d2w + j.w * j.d3w),
            xi_sq: j.w * j.w,
            phi2_minus_xi_phi: self.profile.raw_q(r),
        })
    }

    /// `∫_a^b w(s)^n ds` by adaptive Simpson.
    pub fn radial_integral(&self, a: f64, b: f64) -> Result<f64> {
        for r in [a, b] {
            if !self.profile.contains(r) {
                let (lo, hi) = self.profile.domain();
                return Err(Error::Domain { r, lo, hi });
            }
        }
        let n = self.n as i32;
        Ok(adaptive_simpson(|s| self.profile.raw_jet(s).w.powi(n), a, b, REL_TOL, ABS_TOL))
    }

    /// Mean curvature, area, and enclosed volume (from `r1`) of the leaf `{r}`.
    pub fn leaf_quantities(&self, r: f64, r1: f64) -> Result<LeafQuantities> {
        let (lo, _) = self.profile.domain();
        if r1 < lo {
            return Err(Error::Argument(format!("inner radius {r1} below domain start {lo}")));
        }
        if !(r > r1) {
            return Err(Error::Argument(format!("leaf radius {r} must exceed inner radius {r1}")));
        }
        let j = self.eval(r)?;
        if j.w == 0.0 {
            return Err(Error::SingularPoint { r });
        }
        Ok(LeafQuantities {
            mean_curvature: self.n as f64 * j.dw / j.w,
            area: self.sphere_measure() * j.w.powi(self.n as i32),
            volume: self.sphere_measure() * self.radial_integral(r1, r)?,
        })
    }

    pub fn curvatures(&self, r: f64) -> Result<Curvatures> {
        let j = self.eval(r)?;
        if j.w == 0.0 {
            return Err(Error::SingularPoint { r });
        }
        Ok(curvatures_from_jet(&j, self.n))
    }

    /// `Ric(nu, nu)` for a unit normal making angle `alpha` with `d_r`.
    pub fn ricci_along(&self, r: f64, cos_alpha: f64) -> Result<f64> {
        if !(-1.0..=1.0).contains(&cos_alpha) {
            return Err(Error::Argument(format!("cos_alpha = {cos_alpha} outside [-1, 1]")));
        }
        let c = self.curvatures(r)?;
        Ok(ricci_mix(&c, cos_alpha))
    }

    /// Level value `|xi|/phi = w/w'` of the leaf `{r}`; `None` where `w' = 0`.
    pub fn level_value(&self, r: f64) -> Result<Option<f64>> {
        let j = self.eval(r)?;
        Ok((j.dw != 0.0).then(|| j.w / j.dw))
    }

    /// Evaluates the admissibility margins on `samples` uniform interior radii
    /// of the profile's check range.
    pub fn check_conditions(&self, samples: usize) -> Result<ConditionReport> {
        if samples < 2 {
            return Err(Error::Argument("condition check needs at least 2 samples".into()));
        }
        let (lo, hi) = self.profile.check_range();
        let mut worst = [(f64::INFINITY, lo); 4];
        for k in 0..samples {
            let r = lo + (hi - lo) * (k as f64 + 1.0) / (samples as f64 + 1.0);
            let j = self.profile.raw_jet(r);
            let q = self.profile.raw_q(r);
            let margins = [j.dw, q, 1.0 - q, q];
            for (slot, m) in worst.iter_mut().zip(margins) {
                if m < slot.0 {
                    *slot = (m, r);
                }
            }
        }
        let verdict = |name, (m, r): (f64, f64), strict_required: bool| {
            let pass = if strict_required { m > 0.0 } else { m >= -CONDITION_TOL };
            ConditionVerdict { name, min_margin: m, argmin_r: r, pass, strict: m > CONDITION_TOL }
        };
        Ok(ConditionReport {
            range: (lo, hi),
            samples,
            phi_positive: verdict("(i) phi > 0", worst[0], true),
            phi2_minus_xi_phi: verdict("(ii) phi^2 - xi(phi) > 0", worst[1], true),
            ricci_minimal: verdict("(iv) least Ricci curvature along xi", worst[2], false),
            sectional: verdict("sectional K(X,xi) >= -phi^2/|xi|^2", worst[3], false),
        })
    }
}

pub(crate) fn curvatures_from_jet(j: &Jet, n: usize) -> Curvatures {
    let k_rad = -j.d2w / j.w;
    let k_tan = (1.0 - j.dw * j.dw) / (j.w * j.w);
    Curvatures {
        k_rad,
        k_tan,
        ric_nn: n as f64 * k_rad,
        ric_ee: k_rad + (n as f64 - 1.0) * k_tan,
    }
}

pub(crate) fn ricci_mix(c: &Curvatures, cos_alpha: f64) -> f64 {
    let c2 = cos_alpha * cos_alpha;
    c2 * c.ric_nn + (1.0 - c2) * c.ric_ee
}

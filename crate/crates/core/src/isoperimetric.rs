//! Isoperimetric profile of the coordinate spheres `S(r) = {r = const}` and the
//! comparison radius `r*` with `Vol(B(r*)) = Vol(Omega)`.

use serde::Serialize;

use crate::ambient::AmbientSpace;
use crate::error::{Error, Result};
use crate::hypersurface::{compute_geometry, enclosed_volume, RadialGraph};

/// Relative volume tolerance of [`solve_rstar`].
pub const RSTAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoRow {
    pub r: f64,
    /// `w/w'`, the value of `|xi|/phi` on `S(r)`; `None` where `w' = 0`.
    pub level_value: Option<f64>,
    pub area: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoProfile {
    pub r1: f64,
    pub rows: Vec<IsoRow>,
}

impl IsoProfile {
    pub fn sample(space: &AmbientSpace, r1: f64, radii: &[f64]) -> Result<Self> {
        let rows = radii
            .iter()
            .map(|&r| {
                let leaf = space.leaf_quantities(r, r1)?;
                Ok(IsoRow { r, level_value: space.level_value(r)?, area: leaf.area, volume: leaf.volume })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { r1, rows })
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|p| p[1].r <= p[0].r || p[1].volume > p[0].volume)
    }
}

/// Solves `Vol(B(r)) = target` for the ball between `{r1}` and `{r}`.
pub fn solve_rstar(space: &AmbientSpace, r1: f64, target: f64) -> Result<f64> {
    solve_rstar_with_measure(space, r1, target, space.sphere_measure())
}

/// As [`solve_rstar`], with `|S^n|` replaced by `measure` (e.g. the sum of
/// discrete quadrature weights, so that leaves are matched exactly).
pub fn solve_rstar_with_measure(space: &AmbientSpace, r1: f64, target: f64, measure: f64) -> Result<f64> {
    let (lo, hi) = space.profile.domain();
    if r1 < lo || r1 >= hi {
        return Err(Error::Argument(format!("inner radius {r1} outside [{lo}, {hi})")));
    }
    let vol = |r: f64| -> Result<f64> { Ok(measure * space.radial_integral(r1, r)?) };
    let vmax = vol(hi)?;
    if !(target > 0.0 && target <= vmax) {
        return Err(Error::Range { target, lo: 0.0, hi: vmax });
    }
    let tol = RSTAR_TOL * target;

    let (mut a, mut b) = (r1, hi);
    let mut r = 0.5 * (a + b);
    while b - a > 1e-6 * (1.0 + r.abs()) {
        r = 0.5 * (a + b);
        let g = vol(r)? - target;
        if g.abs() <= tol {
            return Ok(r);
        }
        if g < 0.0 {
            a = r;
        } else {
            b = r;
        }
    }

    for _ in 0..50 {
        let g = vol(r)? - target;
        if g.abs() <= tol {
            return Ok(r);
        }
        if g < 0.0 {
            a = a.max(r);
        } else {
            b = b.min(r);
        }
        let slope = measure * space.eval(r)?.w.powi(space.n() as i32);
        let next = r - g / slope;
        r = if slope > 0.0 && next > a && next < b { next } else { 0.5 * (a + b) };
        if b - a <= f64::EPSILON * r.abs() {
            break;
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsoReport {
    pub volume: f64,
    pub area: f64,
    pub r_star: f64,
    pub leaf_area: f64,
    /// `A - Area(S(r*))`
    pub gap: f64,
    pub tolerance: f64,
    /// `|gap| <= tolerance` on a totally umbilical graph.
    pub equality: bool,
}

/// Default gap tolerance relative to the graph's area.
pub const GAP_REL_TOL: f64 = 1e-4;

pub fn iso_report(space: &AmbientSpace, graph: &RadialGraph, r1: f64) -> Result<IsoReport> {
    let snap = compute_geometry(space, graph)?;
    let volume = enclosed_volume(space, graph, r1)?;
    let tol = GAP_REL_TOL * snap.area;
    compare_with_leaf(space, graph.grid().measure(), r1, volume, snap.area, snap.deficit, tol)
}

/// Compares a surface with known volume, area, and umbilicity deficit against
/// the leaf enclosing the same volume, using `measure` for `|S^n|`.
pub fn compare_with_leaf(
    space: &AmbientSpace,
    measure: f64,
    r1: f64,
    volume: f64,
    area: f64,
    deficit: f64,
    tolerance: f64,
) -> Result<IsoReport> {
    let r_star = solve_rstar_with_measure(space, r1, volume, measure)?;
    let leaf_area = measure * space.eval(r_star)?.w.powi(space.n() as i32);
    let gap = area - leaf_area;
    Ok(IsoReport {
        volume,
        area,
        r_star,
        leaf_area,
        gap,
        tolerance,
        equality: gap.abs() <= tolerance && deficit <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::WarpingProfile;
    use crate::sphere::{GridSn, Stencil};
    use std::f64::consts::PI;

    fn space(p: WarpingProfile, n: usize) -> AmbientSpace {
        AmbientSpace::new(p, n).unwrap()
    }

    #[test]
    fn rstar_examples() {
        let e = space(WarpingProfile::euclidean(), 1);
        let r = solve_rstar(&e, 0.0, 4.0 * PI).unwrap();
        assert!((r - 2.0).abs() < 1e-12);

        let s = space(WarpingProfile::sphere(), 2);
        assert!((solve_rstar(&s, 0.0, PI * PI).unwrap() - PI / 2.0).abs() < 1e-10);

        let h = space(WarpingProfile::hyperbolic(), 1);
        let target = 2.0 * PI * (1f64.cosh() - 1.0);
        let r = solve_rstar(&h, 0.0, target).unwrap();
        assert!((r - 1.0).abs() < 1e-11);
        let v = 2.0 * PI * h.radial_integral(0.0, r).unwrap();
        assert!((v - target).abs() <= RSTAR_TOL * target);
    }

    #[test]
    fn rstar_range_errors() {
        let s = space(WarpingProfile::sphere(), 2);
        assert!(matches!(solve_rstar(&s, 0.0, 100.0), Err(Error::Range { .. })));
        assert!(matches!(solve_rstar(&s, 0.0, -1.0), Err(Error::Range { .. })));
    }

    #[test]
    fn leaf_has_zero_gap() {
        let e = space(WarpingProfile::euclidean(), 1);
        let g = RadialGraph::from_fn(&e, GridSn::new(1, 64, Stencil::Fourth).unwrap(), |_| 1.7).unwrap();
        let rep = iso_report(&e, &g, 0.0).unwrap();
        assert!((rep.r_star - 1.7).abs() < 1e-10);
        assert!(rep.gap.abs() < 1e-9);
        assert!(rep.equality);
    }

    #[test]
    fn offcenter_circle_is_equality_case() {
        let e = space(WarpingProfile::euclidean(), 1);
        let grid = GridSn::new(1, 256, Stencil::Fourth).unwrap();
        let g = RadialGraph::from_fn(&e, grid, |t| 0.5 * t.cos() + (4.0 - 0.25 * t.sin().powi(2)).sqrt()).unwrap();
        let rep = iso_report(&e, &g, 0.0).unwrap();
        assert!((rep.r_star - 2.0).abs() < 1e-4);
        assert!(rep.gap.abs() < 1e-4);
    }

    #[test]
    fn perturbed_circle_has_positive_gap() {
        let e = space(WarpingProfile::euclidean(), 1);
        let grid = GridSn::new(1, 256, Stencil::Fourth).unwrap();
        let g = RadialGraph::from_fn(&e, grid, |t| 2.0 + 0.3 * (3.0 * t).cos()).unwrap();
        let rep = iso_report(&e, &g, 0.0).unwrap();
        assert!(rep.gap > 1e-2);
        assert!(!rep.equality);
    }

    #[test]
    fn profile_rows() {
        let e = space(WarpingProfile::euclidean(), 1);
        let p = IsoProfile::sample(&e, 0.0, &[1.0, 2.0]).unwrap();
        assert_eq!(p.rows[1].level_value, Some(2.0));
        assert!((p.rows[1].area - 4.0 * PI).abs() < 1e-12);
        assert!((p.rows[1].volume - 4.0 * PI).abs() < 1e-10);
        assert!(p.is_monotone());

        let s = space(WarpingProfile::sphere(), 2);
        let p = IsoProfile::sample(&s, 0.0, &[PI / 2.0]).unwrap();
        assert!((p.rows[0].area - 4.0 * PI).abs() < 1e-12);
        assert!((p.rows[0].volume - PI * PI).abs() < 1e-9);
        assert!(p.rows[0].level_value.unwrap().abs() > 1e15);
    }
}

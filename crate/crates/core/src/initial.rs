//! Initial radial graphs.

use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientSpace, ProfileFamily};
use crate::error::{Error, Result};
use crate::hypersurface::{compute_geometry, RadialGraph};
use crate::sphere::GridSn;

/// One term `amplitude * cos(k theta + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub k: u32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum InitialData {
    Leaf { radius: f64 },
    Fourier { mean: f64, modes: Vec<Mode> },
    /// Euclidean circle of radius `radius` centred at distance `a` from the origin.
    OffcenterCircle { a: f64, radius: f64 },
    /// Angle/radius samples, interpolated linearly (periodically for `n = 1`,
    /// evenly reflected at the poles for `n = 2`).
    Table { angle: Vec<f64>, rho: Vec<f64> },
}

impl InitialData {
    pub fn table_from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let (mut angle, mut rho) = (Vec::new(), Vec::new());
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Config(format!("{}: row {}: expected two numbers (angle, rho)", path.display(), line + 1)))
            };
            let (a, r) = match (parse(0), parse(1)) {
                (Ok(a), Ok(r)) => (a, r),
                // Tolerate a header row.
                _ if line == 0 => continue,
                (Err(e), _) | (_, Err(e)) => return Err(e),
            };
            angle.push(a);
            rho.push(r);
        }
        if angle.len() < 2 || angle.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Config(format!("{}: need at least two rows with increasing angles", path.display())));
        }
        Ok(Self::Table { angle, rho })
    }

    pub fn build(&self, space: &AmbientSpace, grid: GridSn) -> Result<RadialGraph> {
        let n = space.n();
        let graph = match self {
            Self::Leaf { radius } => RadialGraph::from_fn(space, grid, |_| *radius)?,
            Self::Fourier { mean, modes } => {
                if n == 2 {
                    if let Some(m) = modes.iter().find(|m| (m.phase / PI).fract().abs() > 1e-12) {
                        return Err(Error::Argument(format!(
                            "axisymmetric data must be even across the poles; mode k = {} has phase {}",
                            m.k, m.phase
                        )));
                    }
                }
                RadialGraph::from_fn(space, grid, |t| fourier(*mean, modes, t))?
            }
            Self::OffcenterCircle { a, radius } => {
                if n != 1 || !matches!(space.profile.family(), ProfileFamily::Euclidean) || space.profile.scale() != 1.0 {
                    return Err(Error::Argument("offcenter_circle needs the euclidean plane (n = 1)".into()));
                }
                if !(a.abs() < *radius) {
                    return Err(Error::Argument(format!("offcenter_circle needs |a| < R, got a = {a}, R = {radius}")));
                }
                RadialGraph::from_fn(space, grid, |t| a * t.cos() + (radius * radius - a * a * t.sin().powi(2)).sqrt())?
            }
            Self::Table { angle, rho } => {
                let vals = grid.angles().iter().map(|&t| interpolate(angle, rho, t, n)).collect();
                RadialGraph::new(space, grid, vals)?
            }
        };
        compute_geometry(space, &graph)?;
        Ok(graph)
    }
}

fn fourier(mean: f64, modes: &[Mode], t: f64) -> f64 {
    modes.iter().fold(mean, |acc, m| acc + m.amplitude * (m.k as f64 * t + m.phase).cos())
}

fn interpolate(x: &[f64], y: &[f64], t: f64, n: usize) -> f64 {
    let len = x.len();
    let (x0, x1) = (x[0], x[len - 1]);
    let (period, even) = if n == 1 { (2.0 * PI, false) } else { (2.0 * PI, true) };
    // Extend by one point on each side so every query lies inside a bracket.
    let (before, after) = if even {
        ((-x0, y[0]), (2.0 * PI - x1, y[len - 1]))
    } else {
        ((x1 - period, y[len - 1]), (x0 + period, y[0]))
    };
    let mut xs = Vec::with_capacity(len + 2);
    let mut ys = Vec::with_capacity(len + 2);
    xs.push(before.0);
    ys.push(before.1);
    xs.extend_from_slice(x);
    ys.extend_from_slice(y);
    xs.push(after.0);
    ys.push(after.1);
    let i = xs.partition_point(|&a| a <= t).clamp(1, xs.len() - 1);
    let (a, b) = (xs[i - 1], xs[i]);
    if b <= a {
        return ys[i];
    }
    let s = ((t - a) / (b - a)).clamp(0.0, 1.0);
    ys[i - 1] + s * (ys[i] - ys[i - 1])
}

/// Random Fourier data `mean + sum a_k cos(k theta + p_k)` for `k = 1..=max_mode`,
/// with `sum |a_k| = relative_amplitude * mean`.
/// Phases are multiples of `pi` for `n = 2`, so the data stays even at the poles.
pub fn random_fourier<R: Rng>(rng: &mut R, n: usize, mean: f64, max_mode: u32, relative_amplitude: f64) -> InitialData {
    let raw: Vec<f64> = (0..max_mode).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm: f64 = raw.iter().map(|a| a.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    let modes = raw
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let phase = if n == 1 { rng.gen_range(0.0..2.0 * PI) } else { 0.0 };
            Mode { k: i as u32 + 1, amplitude: a / norm * relative_amplitude * mean, phase }
        })
        .collect();
    InitialData::Fourier { mean, modes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::WarpingProfile;
    use crate::sphere::Stencil;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fourier_values() {
        let sp = AmbientSpace::new(WarpingProfile::euclidean(), 1).unwrap();
        let grid = GridSn::new(1, 16, Stencil::Fourth).unwrap();
        let d = InitialData::Fourier { mean: 2.0, modes: vec![Mode { k: 3, amplitude: 0.3, phase: 0.0 }] };
        let g = d.build(&sp, grid).unwrap();
        assert_eq!(g.rho()[0], 2.3);
    }

    #[test]
    fn axisymmetric_phase_rule() {
        let sp = AmbientSpace::new(WarpingProfile::sphere(), 2).unwrap();
        let grid = GridSn::new(2, 16, Stencil::Fourth).unwrap();
        let bad = InitialData::Fourier { mean: 1.0, modes: vec![Mode { k: 1, amplitude: 0.1, phase: 0.5 }] };
        assert!(bad.build(&sp, grid.clone()).is_err());
        let ok = InitialData::Fourier { mean: 1.0, modes: vec![Mode { k: 1, amplitude: 0.1, phase: PI }] };
        assert!(ok.build(&sp, grid).is_ok());
    }

    #[test]
    fn offcenter_only_in_the_plane() {
        let sp = AmbientSpace::new(WarpingProfile::hyperbolic(), 1).unwrap();
        let grid = GridSn::new(1, 16, Stencil::Fourth).unwrap();
        assert!(InitialData::OffcenterCircle { a: 0.5, radius: 2.0 }.build(&sp, grid).is_err());
    }

    #[test]
    fn table_interpolation_is_periodic() {
        let angle = vec![0.0, PI];
        let rho = vec![1.0, 2.0];
        assert_eq!(interpolate(&angle, &rho, 0.5 * PI, 1), 1.5);
        assert_eq!(interpolate(&angle, &rho, 1.5 * PI, 1), 1.5);
        assert_eq!(interpolate(&angle, &rho, 0.0, 1), 1.0);
    }

    #[test]
    fn random_data_is_reproducible_and_bounded() {
        let a = random_fourier(&mut ChaCha8Rng::seed_from_u64(3), 1, 2.0, 4, 0.2);
        let b = random_fourier(&mut ChaCha8Rng::seed_from_u64(3), 1, 2.0, 4, 0.2);
        assert_eq!(a, b);
        let InitialData::Fourier { modes, .. } = a else { unreachable!() };
        let total: f64 = modes.iter().map(|m| m.amplitude.abs()).sum();
        assert!((total - 0.4).abs() < 1e-12);
    }
}

//! Explicit time integration of the radial-graph form `rho_t = (n w' - u H) v`
//! of the volume-preserving flow.

use serde::Serialize;

use crate::ambient::AmbientSpace;
use crate::error::{Error, Result};
use crate::hypersurface::{compute_geometry, enclosed_volume_split, minkowski_residuals, GeometrySnapshot, RadialGraph};
use crate::isoperimetric::{compare_with_leaf, IsoReport, GAP_REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    /// Three-stage strong-stability-preserving Runge-Kutta (Shu-Osher).
    #[default]
    Rk3,
}

impl Scheme {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "euler" => Ok(Self::Euler),
            "rk3" | "ssprk3" => Ok(Self::Rk3),
            other => Err(Error::Config(format!("unknown scheme {other:?} (expected \"euler\" or \"rk3\")"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowConfig {
    pub cfl: f64,
    pub t_max: f64,
    pub max_steps: usize,
    pub stop_eta: f64,
    /// Speed threshold relative to `max w'` over the graph.
    pub stop_speed: f64,
    pub record_every: usize,
    pub scheme: Scheme,
    /// Capture three consecutive frames every `frame_every` steps (0 disables).
    pub frame_every: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            cfl: 0.2,
            t_max: 100.0,
            max_steps: 2_000_000,
            stop_eta: 1e-8,
            stop_speed: 1e-10,
            record_every: 10,
            scheme: Scheme::Rk3,
            frame_every: 0,
        }
    }
}

impl FlowConfig {
    /// Values above the nominal `cfl <= 0.5` are accepted so that the
    /// stability boundary can be probed; [`run`] then reports a warning.
    pub fn validate(&self) -> Result<()> {
        let positive = [("cfl", self.cfl), ("t_max", self.t_max), ("stop_eta", self.stop_eta), ("stop_speed", self.stop_speed)];
        for (name, x) in positive {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Config(format!("flow.{name} must be positive and finite, got {x}")));
            }
        }
        if self.record_every == 0 {
            return Err(Error::Config("flow.record_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub graph: RadialGraph,
    pub dt: f64,
    pub step_count: usize,
    pub v0: f64,
    pub a0: f64,
    pub c0_min: Option<f64>,
    pub c0_max: Option<f64>,
    /// Inner leaf radius bounding the enclosed region.
    pub r1: f64,
    /// Split point for the per-node volume integrals.
    pub r_ref: f64,
}

impl FlowState {
    /// Records the baselines; data within `1e-14` of a constant is snapped to it.
    pub fn new(space: &AmbientSpace, graph: RadialGraph, r1: f64) -> Result<Self> {
        let mean = graph.mean_rho();
        let spread = graph.rho().iter().fold(0.0f64, |m, r| m.max((r - mean).abs()));
        let graph = if spread > 0.0 && spread <= 1e-14 * mean.abs().max(1.0) {
            let len = graph.rho().len();
            RadialGraph::new(space, graph.grid().clone(), vec![mean; len])?
        } else {
            graph
        };
        let snap = compute_geometry(space, &graph)?;
        let v0 = enclosed_volume_split(space, &graph, r1, mean)?;
        Ok(Self {
            t: 0.0,
            dt: 0.0,
            step_count: 0,
            v0,
            a0: snap.area,
            c0_min: snap.c0_min,
            c0_max: snap.c0_max,
            r1,
            r_ref: mean,
            graph,
        })
    }

    pub fn volume(&self, space: &AmbientSpace) -> Result<f64> {
        enclosed_volume_split(space, &self.graph, self.r1, self.r_ref)
    }
}

/// Normal speed `f` and radial velocity `rho_t = f v` at every node.
pub fn speed(space: &AmbientSpace, state: &FlowState) -> Result<(Vec<f64>, Vec<f64>)> {
    let snap = compute_geometry(space, &state.graph)?;
    let rho_t = snap.radial_velocity();
    Ok((snap.speed, rho_t))
}

/// Parabolic step size `cfl h^2 min (v^2 w^2 / u)`.
pub fn stable_dt(snap: &GeometrySnapshot, spacing: f64, cfl: f64) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..snap.len() {
        let w = snap.jet[i].w;
        m = m.min(snap.v[i] * snap.v[i] * w * w / snap.u[i]);
    }
    cfl * spacing * spacing * m
}

pub fn step(space: &AmbientSpace, state: &FlowState, config: &FlowConfig) -> Result<FlowState> {
    let snap = compute_geometry(space, &state.graph)?;
    step_from(space, state, &snap, config)
}

fn check_finite(values: &[f64], step: usize) -> Result<()> {
    match values.iter().position(|x| !x.is_finite()) {
        Some(node) => Err(Error::BlowUp { step, node }),
        None => Ok(()),
    }
}

fn stage(space: &AmbientSpace, graph: &RadialGraph, rho: Vec<f64>, step: usize) -> Result<RadialGraph> {
    check_finite(&rho, step)?;
    RadialGraph::new(space, graph.grid().clone(), rho)
}

fn velocity(space: &AmbientSpace, graph: &RadialGraph, step: usize) -> Result<Vec<f64>> {
    let l = compute_geometry(space, graph)?.radial_velocity();
    check_finite(&l, step)?;
    Ok(l)
}

/// Advances one step, reusing `snap` (the geometry of `state.graph`).
fn step_from(space: &AmbientSpace, state: &FlowState, snap: &GeometrySnapshot, config: &FlowConfig) -> Result<FlowState> {
    let k = state.step_count;
    let grid = state.graph.grid();
    let dt = stable_dt(snap, grid.spacing(), config.cfl);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::BlowUp { step: k, node: 0 });
    }
    let rho = state.graph.rho();
    let l0 = snap.radial_velocity();
    check_finite(&l0, k)?;

    let next = match config.scheme {
        Scheme::Euler => {
            let r: Vec<f64> = rho.iter().zip(&l0).map(|(r, l)| r + dt * l).collect();
            stage(space, &state.graph, r, k)?
        }
        Scheme::Rk3 => {
            let r1: Vec<f64> = rho.iter().zip(&l0).map(|(r, l)| r + dt * l).collect();
            let g1 = stage(space, &state.graph, r1, k)?;
            let l1 = velocity(space, &g1, k)?;
            let r2: Vec<f64> = (0..rho.len())
                .map(|i| 0.75 * rho[i] + 0.25 * (g1.rho()[i] + dt * l1[i]))
                .collect();
            let g2 = stage(space, &state.graph, r2, k)?;
            let l2 = velocity(space, &g2, k)?;
            let r3: Vec<f64> = (0..rho.len())
                .map(|i| rho[i] / 3.0 + 2.0 / 3.0 * (g2.rho()[i] + dt * l2[i]))
                .collect();
            stage(space, &state.graph, r3, k)?
        }
    };
    Ok(FlowState { t: state.t + dt, graph: next, dt, step_count: k + 1, ..state.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunRecord {
    pub step: usize,
    pub t: f64,
    pub volume: f64,
    pub area: f64,
    pub res1: f64,
    pub res2: Option<f64>,
    pub eta_max: f64,
    pub omega_max: f64,
    pub deficit: f64,
    pub max_h: f64,
    pub min_u: f64,
    pub c0_min: Option<f64>,
    pub c0_max: Option<f64>,
    pub max_speed: f64,
    pub dt: f64,
}

impl RunRecord {
    pub const HEADER: [&'static str; 14] = [
        "t", "V", "A", "res1", "res2", "eta_max", "omega_max", "deficit", "maxH", "min_u", "c0_min", "c0_max",
        "max_speed", "dt",
    ];

    /// Row values in [`Self::HEADER`] order; `None` becomes an empty field.
    pub fn fields(&self) -> [Option<f64>; 14] {
        [
            Some(self.t),
            Some(self.volume),
            Some(self.area),
            Some(self.res1),
            self.res2,
            Some(self.eta_max),
            Some(self.omega_max),
            Some(self.deficit),
            Some(self.max_h),
            Some(self.min_u),
            self.c0_min,
            self.c0_max,
            Some(self.max_speed),
            Some(self.dt),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Initial data already met the stopping thresholds.
    Stationary,
    Converged,
    /// Stopped by `t_max` or `max_steps`.
    Cap,
    BlowUp,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Stationary => "stationary",
            Self::Converged => "converged",
            Self::Cap => "cap",
            Self::BlowUp => "blow_up",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub step: usize,
    pub t: f64,
    pub rho: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FinalComparison {
    pub r_star: f64,
    pub mean_rho: f64,
    pub radius_error: f64,
    pub iso: IsoReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub state: FlowState,
    pub records: Vec<RunRecord>,
    pub frames: Vec<Frame>,
    pub warnings: Vec<String>,
    /// The error that ended a blown-up run.
    pub failure: Option<Error>,
    /// Filled when the run converged or was stationary.
    pub comparison: Option<FinalComparison>,
}

impl RunOutcome {
    pub fn max_volume_drift(&self) -> f64 {
        let v0 = self.state.v0;
        self.records.iter().fold(0.0f64, |m, r| m.max((r.volume - v0).abs() / v0.abs()))
    }

    /// Largest recorded area increase `A(t_{k+1}) - A(t_k)`, relative to `A0`.
    pub fn max_area_increase(&self) -> f64 {
        let a0 = self.state.a0;
        self.records.windows(2).fold(f64::NEG_INFINITY, |m, p| m.max((p[1].area - p[0].area) / a0))
    }

    /// `max |A(t) - A0| / A0` over the records.
    pub fn area_range(&self) -> f64 {
        let a0 = self.state.a0;
        self.records.iter().fold(0.0f64, |m, r| m.max((r.area - a0).abs() / a0))
    }

    /// Least-squares exponent `alpha` of `omega_max ~ (t + 1)^(-alpha)` over the
    /// final two decades of decay.
    pub fn omega_decay_exponent(&self) -> Option<f64> {
        let last = self.records.last()?.omega_max;
        if !(last > 0.0) {
            return None;
        }
        let start = self.records.iter().rposition(|r| r.omega_max >= 100.0 * last)?;
        let pts: Vec<(f64, f64)> = self.records[start..]
            .iter()
            .filter(|r| r.omega_max > 0.0)
            .map(|r| ((r.t + 1.0).ln(), r.omega_max.ln()))
            .collect();
        fit_slope(&pts).map(|s| -s)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn record(space: &AmbientSpace, state: &FlowState, snap: &GeometrySnapshot) -> Result<RunRecord> {
    let mink = minkowski_residuals(space, snap)?;
    Ok(RunRecord {
        step: state.step_count,
        t: state.t,
        volume: state.volume(space)?,
        area: snap.area,
        res1: mink.res1,
        res2: mink.res2,
        eta_max: snap.eta_max,
        omega_max: snap.omega_max,
        deficit: snap.deficit,
        max_h: snap.max_h,
        min_u: snap.min_u,
        c0_min: snap.c0_min,
        c0_max: snap.c0_max,
        max_speed: snap.max_speed,
        dt: state.dt,
    })
}

fn speed_threshold(config: &FlowConfig, snap: &GeometrySnapshot) -> f64 {
    let phi = snap.jet.iter().fold(0.0f64, |m, j| m.max(j.dw.abs()));
    config.stop_speed * if phi > 0.0 { phi } else { 1.0 }
}

pub fn run(space: &AmbientSpace, initial: RadialGraph, config: &FlowConfig, r1: f64) -> Result<RunOutcome> {
    run_observed(space, initial, config, r1, |_, _| {})
}

/// As [`run`], calling `observer` with every state and its geometry before the
/// state is advanced.
pub fn run_observed(
    space: &AmbientSpace,
    initial: RadialGraph,
    config: &FlowConfig,
    r1: f64,
    mut observer: impl FnMut(&FlowState, &GeometrySnapshot),
) -> Result<RunOutcome> {
    config.validate()?;
    let mut warnings = Vec::new();
    if config.cfl > 0.5 {
        warnings.push(format!("cfl = {} exceeds the stable range (0, 0.5]", config.cfl));
    }
    let report = space.check_conditions(200)?;
    for v in report.verdicts() {
        if !v.pass {
            warnings.push(format!(
                "condition {} fails (margin {:e} at r = {}); monotonicity checks are observations only",
                v.name, v.min_margin, v.argmin_r
            ));
        }
    }

    let mut state = FlowState::new(space, initial, r1)?;
    let mut records = Vec::new();
    let mut frames = Vec::new();
    let mut failure = None;
    let mut snap = compute_geometry(space, &state.graph)?;

    let status = loop {
        observer(&state, &snap);
        let k = state.step_count;
        if config.frame_every > 0 && k % config.frame_every < 3 {
            frames.push(Frame { step: k, t: state.t, rho: state.graph.rho().to_vec() });
        }
        let done = snap.eta_max <= config.stop_eta && snap.max_speed <= speed_threshold(config, &snap);
        let capped = state.t >= config.t_max || k >= config.max_steps;
        if done || capped || k % config.record_every == 0 {
            records.push(record(space, &state, &snap)?);
        }
        if done {
            break if k == 0 { RunStatus::Stationary } else { RunStatus::Converged };
        }
        if capped {
            break RunStatus::Cap;
        }
        let next = step_from(space, &state, &snap, config)
            .and_then(|s| compute_geometry(space, &s.graph).map(|g| (s, g)));
        match next {
            Ok((s, g)) => {
                state = s;
                snap = g;
            }
            Err(e @ (Error::BlowUp { .. } | Error::Domain { .. } | Error::StarShape { .. })) => {
                failure = Some(e);
                break RunStatus::BlowUp;
            }
            Err(e) => return Err(e),
        }
    };

    let comparison = match status {
        RunStatus::Converged | RunStatus::Stationary => {
            let measure = state.graph.grid().measure();
            let tol = GAP_REL_TOL * snap.area;
            let iso = compare_with_leaf(space, measure, r1, state.v0, snap.area, snap.deficit, tol)?;
            let mean_rho = state.graph.mean_rho();
            Some(FinalComparison { r_star: iso.r_star, mean_rho, radius_error: (mean_rho - iso.r_star).abs(), iso })
        }
        _ => None,
    };

    Ok(RunOutcome { status, state, records, frames, warnings, failure, comparison })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::WarpingProfile;
    use crate::sphere::{GridSn, Stencil};
    use std::f64::consts::PI;

    fn euclid1() -> AmbientSpace {
        AmbientSpace::new(WarpingProfile::euclidean(), 1).unwrap()
    }

    fn graph(space: &AmbientSpace, nodes: usize, f: impl Fn(f64) -> f64) -> RadialGraph {
        RadialGraph::from_fn(space, GridSn::new(space.n(), nodes, Stencil::Fourth).unwrap(), f).unwrap()
    }

    #[test]
    fn leaf_does_not_move() {
        let sp = euclid1();
        let st = FlowState::new(&sp, graph(&sp, 64, |_| 2.0), 0.0).unwrap();
        let (f, rho_t) = speed(&sp, &st).unwrap();
        assert!(f.iter().chain(&rho_t).all(|x| x.abs() < 1e-15));
        let next = step(&sp, &st, &FlowConfig::default()).unwrap();
        assert!(next.t > 0.0);
        for (a, b) in next.graph.rho().iter().zip(st.graph.rho()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn offcenter_circle_translates_toward_origin() {
        let sp = euclid1();
        let g = graph(&sp, 256, |t| 0.5 * t.cos() + (4.0 - 0.25 * t.sin().powi(2)).sqrt());
        let st = FlowState::new(&sp, g, 0.0).unwrap();
        let (f, _) = speed(&sp, &st).unwrap();
        assert!((f[0] + 0.25).abs() < 5e-3);
    }

    #[test]
    fn crest_moves_inward() {
        let sp = euclid1();
        let st = FlowState::new(&sp, graph(&sp, 256, |t| 2.0 + 0.1 * t.cos()), 0.0).unwrap();
        let (f, _) = speed(&sp, &st).unwrap();
        assert!(f[0] < 0.0);
    }

    #[test]
    fn one_step_conserves_volume_and_lowers_area() {
        let sp = euclid1();
        let st = FlowState::new(&sp, graph(&sp, 256, |t| 2.0 + 0.3 * (3.0 * t).cos()), 0.0).unwrap();
        let next = step(&sp, &st, &FlowConfig::default()).unwrap();
        let a1 = compute_geometry(&sp, &next.graph).unwrap().area;
        assert!(a1 < st.a0);
        assert!((next.volume(&sp).unwrap() - st.v0).abs() / st.v0 <= 1e-9);
    }

    #[test]
    fn large_cfl_blows_up() {
        let sp = euclid1();
        let cfg = FlowConfig { cfl: 5.0, max_steps: 200, record_every: 1, ..FlowConfig::default() };
        let out = run(&sp, graph(&sp, 256, |t| 2.0 + 0.3 * (3.0 * t).cos()), &cfg, 0.0).unwrap();
        assert_eq!(out.status, RunStatus::BlowUp);
        assert!(out.failure.is_some());
        assert!(!out.warnings.is_empty());
    }

    #[test]
    fn stationary_run() {
        let sp = AmbientSpace::new(WarpingProfile::sphere(), 2).unwrap();
        let out = run(&sp, graph(&sp, 32, |_| 1.0), &FlowConfig::default(), 0.0).unwrap();
        assert_eq!(out.status, RunStatus::Stationary);
        assert_eq!(out.records.len(), 1);
        let c = out.comparison.unwrap();
        assert!((c.r_star - 1.0).abs() < 1e-10);
    }

    #[test]
    fn near_constant_data_is_snapped() {
        let sp = euclid1();
        let g = graph(&sp, 16, |t| 2.0 + 1e-15 * t.cos());
        let st = FlowState::new(&sp, g, 0.0).unwrap();
        let first = st.graph.rho()[0];
        assert!(st.graph.rho().iter().all(|r| *r == first));
    }

    #[test]
    fn short_sphere_run_keeps_volume() {
        let sp = AmbientSpace::new(WarpingProfile::sphere(), 2).unwrap();
        let cfg = FlowConfig { max_steps: 200, ..FlowConfig::default() };
        let out = run(&sp, graph(&sp, 128, |t| PI / 3.0 + 0.05 * (2.0 * t).cos()), &cfg, 0.0).unwrap();
        assert_eq!(out.status, RunStatus::Cap);
        assert!(out.max_volume_drift() < 1e-9);
        assert!(out.max_area_increase() <= 1e-12);
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        assert!((fit_slope(&pts).unwrap() + 2.0).abs() < 1e-14);
        assert!(fit_slope(&pts[..1]).is_none());
    }
}

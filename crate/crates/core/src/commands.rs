//! Subcommands of the `warpflow` binary. Each returns the process exit code.

use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::ambient::{AmbientSpace, ConditionReport};
use crate::config::RunConfig;
use crate::error::Error;
use crate::flow::{run_observed, FinalComparison, FlowConfig, RunOutcome, RunStatus};
use crate::hypersurface::{GeometrySnapshot, RadialGraph};
use crate::isoperimetric::IsoProfile;
use crate::output::{self, Meta};
use crate::verify::{
    check_evolution_residual, check_minkowski, check_prop22, check_prop23_closed, evolution_refinement, IdentityReport,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CAP: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub quiet: bool,
    /// Radii for `profile`; overrides `profile.radii` from the config.
    pub radii: Option<Vec<f64>>,
}

impl Options {
    pub fn new(config: impl Into<PathBuf>) -> Self {
        Self { config: config.into(), ..Self::default() }
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn config_failure(e: Error) -> i32 {
    match e {
        Error::Config(_) | Error::Profile(_) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
        other => {
            eprintln!("error: {other}");
            EXIT_FAIL
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> i32 {
    eprintln!("cannot write {}: {e}", path.display());
    EXIT_IO
}

fn load(opts: &Options) -> Result<(RunConfig, AmbientSpace), i32> {
    let cfg = RunConfig::load(&opts.config).map_err(config_failure)?;
    let space = cfg.space().map_err(config_failure)?;
    Ok((cfg, space))
}

fn prepare_dir(cfg: &RunConfig, opts: &Options) -> Result<PathBuf, i32> {
    let dir = cfg.output_dir(opts.out.as_deref());
    std::fs::create_dir_all(&dir).map_err(|e| io_failure(&dir, e))?;
    Ok(dir)
}

#[derive(Serialize)]
struct RunSummary<'a> {
    status: &'static str,
    steps: usize,
    t: f64,
    v0: f64,
    a0: f64,
    max_volume_drift: f64,
    max_area_increase: Option<f64>,
    final_record: Option<&'a crate::flow::RunRecord>,
    comparison: Option<&'a FinalComparison>,
    r_star: Option<f64>,
    area_gap: Option<f64>,
    omega_decay_exponent: Option<f64>,
    warnings: &'a [String],
    failure: Option<String>,
}

fn summary(out: &RunOutcome) -> RunSummary<'_> {
    let inc = out.max_area_increase();
    RunSummary {
        status: out.status.as_str(),
        steps: out.state.step_count,
        t: out.state.t,
        v0: out.state.v0,
        a0: out.state.a0,
        max_volume_drift: out.max_volume_drift(),
        max_area_increase: inc.is_finite().then_some(inc),
        final_record: out.records.last(),
        comparison: out.comparison.as_ref(),
        r_star: out.comparison.as_ref().map(|c| c.r_star),
        area_gap: out.comparison.as_ref().map(|c| c.iso.gap),
        omega_decay_exponent: out.omega_decay_exponent(),
        warnings: &out.warnings,
        failure: out.failure.as_ref().map(ToString::to_string),
    }
}

pub fn cmd_run(opts: &Options) -> i32 {
    let (cfg, space) = match load(opts) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let setup = (|| {
        let graph = cfg.initial_graph(&space)?;
        let flow = cfg.flow_config()?;
        Ok::<(RadialGraph, FlowConfig), Error>((graph, flow))
    })();
    let (graph, flow) = match setup {
        Ok(x) => x,
        Err(e) => return config_failure(e),
    };
    let r1 = cfg.inner_radius(&space);
    let dir = match prepare_dir(&cfg, opts) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let meta = Meta::new(&cfg.hash);

    let every = cfg.output.snapshot_every;
    let mut snapshots: Vec<(usize, GeometrySnapshot)> = Vec::new();
    let result = run_observed(&space, graph, &flow, r1, |state, snap| {
        if every > 0 && state.step_count % every == 0 {
            snapshots.push((state.step_count, snap.clone()));
        }
    });
    let outcome = match result {
        Ok(o) => o,
        Err(e) => return config_failure(e),
    };

    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    let writes = (|| -> Result<(), (PathBuf, io::Error)> {
        let tag = |p: PathBuf| move |e| (p, e);
        if cfg.wants("csv") {
            let p = dir.join("records.csv");
            output::write_records_csv(&p, &meta, &outcome.records).map_err(tag(p.clone()))?;
            for (step, snap) in &snapshots {
                let p = dir.join(format!("snapshot_{step:08}.csv"));
                output::write_snapshot_csv(&p, &meta, snap).map_err(tag(p.clone()))?;
            }
        }
        if cfg.wants("json") {
            let p = dir.join("summary.json");
            output::write_json(&p, &meta, &summary(&outcome)).map_err(tag(p.clone()))?;
        }
        Ok(())
    })();
    if let Err((p, e)) = writes {
        return io_failure(&p, e);
    }

    opts.say(format!(
        "status {} after {} steps, t = {:.6}, max volume drift {:.3e}",
        outcome.status.as_str(),
        outcome.state.step_count,
        outcome.state.t,
        outcome.max_volume_drift()
    ));
    if let Some(c) = &outcome.comparison {
        opts.say(format!(
            "r* = {:.12}, mean rho = {:.12}, area gap = {:.3e}",
            c.r_star, c.mean_rho, c.iso.gap
        ));
    }
    if let Some(f) = &outcome.failure {
        eprintln!("blow-up: {f}");
    }
    match outcome.status {
        RunStatus::Converged | RunStatus::Stationary => EXIT_OK,
        RunStatus::Cap => EXIT_CAP,
        RunStatus::BlowUp => EXIT_BLOW_UP,
    }
}

pub fn condition_table(rep: &ConditionReport) -> String {
    let mut s = format!(
        "conditions on r in [{}, {}] ({} samples)\n{:<40}  {:>12}  {:>12}  result\n",
        rep.range.0, rep.range.1, rep.samples, "condition", "min margin", "at r"
    );
    for v in rep.verdicts() {
        let verdict = match (v.pass, v.strict) {
            (true, true) => "pass (strict)",
            (true, false) => "pass",
            (false, _) => "FAIL",
        };
        s.push_str(&format!("{:<40}  {:>12.4e}  {:>12.6}  {verdict}\n", v.name, v.min_margin, v.argmin_r));
    }
    s
}

pub fn cmd_check(opts: &Options) -> i32 {
    let (cfg, space) = match load(opts) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let rep = match space.check_conditions(cfg.check.samples) {
        Ok(r) => r,
        Err(e) => return config_failure(e),
    };
    opts.say(condition_table(&rep));
    if cfg.wants("json") {
        let dir = match prepare_dir(&cfg, opts) {
            Ok(d) => d,
            Err(code) => return code,
        };
        let p = dir.join("conditions.json");
        if let Err(e) = output::write_json(&p, &Meta::new(&cfg.hash), &rep) {
            return io_failure(&p, e);
        }
    }
    if rep.all_pass() && rep.sectional.pass {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

fn verify_battery(cfg: &RunConfig, space: &AmbientSpace) -> Result<IdentityReport, Error> {
    let mut report = IdentityReport::default();
    let mut spaces = vec![(cfg.ambient.family.clone(), space.clone())];
    for a in &cfg.verify.battery {
        spaces.push((a.family.clone(), cfg.space_for(a)?));
    }
    for (label, sp) in &spaces {
        let tag = |mut e: crate::verify::IdentityEntry| {
            e.name = format!("[{label}] {}", e.name);
            e
        };
        report.extend(check_prop22(sp, cfg.verify.samples)?.into_iter().map(tag));
        report.extend(check_prop23_closed(sp, cfg.verify.samples)?.into_iter().map(tag));
    }

    if cfg.initial.is_some() {
        let graph = cfg.initial_graph(space)?;
        if cfg.verify.minkowski {
            report.extend(check_minkowski(space, &graph)?);
        }
        if cfg.verify.evolution {
            let flow = FlowConfig { frame_every: usize::MAX, max_steps: 2, ..cfg.flow_config()? };
            let r1 = cfg.inner_radius(space);
            let mut levels = Vec::new();
            for g in [graph.clone(), graph.resampled(space, 2 * graph.grid().len())?] {
                let grid = g.grid().clone();
                let out = run_observed(space, g, &flow, r1, |_, _| {})?;
                levels.push(check_evolution_residual(space, &grid, &out.frames)?);
            }
            report.extend(evolution_refinement(&levels[0], &levels[1], cfg.verify.evolution_ratio));
        }
    }
    Ok(report)
}

pub fn cmd_verify(opts: &Options) -> i32 {
    let (cfg, space) = match load(opts) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let report = match verify_battery(&cfg, &space) {
        Ok(r) => r,
        Err(e) => return config_failure(e),
    };
    opts.say(report.table());
    let dir = match prepare_dir(&cfg, opts) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let p = dir.join("verify.json");
    if let Err(e) = output::write_json(&p, &Meta::new(&cfg.hash), &report) {
        return io_failure(&p, e);
    }
    if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_FAIL
    }
}

pub fn cmd_profile(opts: &Options) -> i32 {
    let (cfg, space) = match load(opts) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let radii = opts.radii.clone().unwrap_or_else(|| cfg.profile.radii.clone());
    if radii.is_empty() {
        return config_failure(Error::Config("no radii given (use --radii or profile.radii)".into()));
    }
    let r1 = cfg.profile.inner_radius.unwrap_or_else(|| cfg.inner_radius(&space));
    let profile = match IsoProfile::sample(&space, r1, &radii) {
        Ok(p) => p,
        Err(e) => return config_failure(e),
    };
    for row in &profile.rows {
        opts.say(format!(
            "r = {}  level = {}  area = {}  volume = {}",
            row.r,
            output::fmt_value(row.level_value),
            row.area,
            row.volume
        ));
    }
    let dir = match prepare_dir(&cfg, opts) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let p = dir.join("profile.csv");
    if let Err(e) = output::write_profile_csv(&p, &Meta::new(&cfg.hash), &profile) {
        return io_failure(&p, e);
    }
    EXIT_OK
}

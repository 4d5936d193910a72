//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//!
//! [ambient]
//! family = "euclidean"        # euclidean | sphere | hyperbolic | polynomial | table
//! n = 1
//!
//! [grid]
//! nodes = 256
//!
//! [initial]
//! kind = "fourier"
//! mean = 2.0
//! modes = [{ k = 3, amplitude = 0.3 }]
//!
//! [flow]
//! cfl = 0.2
//! ```
//!
//! See `configs/` at the repository root for complete examples.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::ambient::{AmbientSpace, TableProfile, WarpingProfile};
use crate::error::{Error, Result};
use crate::flow::{FlowConfig, Scheme};
use crate::hypersurface::RadialGraph;
use crate::initial::{random_fourier, InitialData, Mode};
use crate::sphere::{GridSn, Stencil};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmbientSection {
    pub family: String,
    #[serde(default = "default_n")]
    pub n: usize,
    pub scale: Option<f64>,
    pub domain: Option<[f64; 2]>,
    pub check_range: Option<[f64; 2]>,
    /// Polynomial coefficients, constant term first.
    pub coefficients: Option<Vec<f64>>,
    /// CSV with columns `r, w` or `r, w, dw, d2w`.
    pub table: Option<PathBuf>,
}

fn default_n() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    #[serde(default = "default_order")]
    pub order: usize,
}

fn default_nodes() -> usize {
    256
}

fn default_order() -> usize {
    4
}

impl Default for GridSection {
    fn default() -> Self {
        Self { nodes: default_nodes(), order: default_order() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// leaf | fourier | offcenter_circle | table | random_fourier
    pub kind: String,
    pub radius: Option<f64>,
    pub mean: Option<f64>,
    #[serde(default)]
    pub modes: Vec<Mode>,
    pub a: Option<f64>,
    pub file: Option<PathBuf>,
    pub max_mode: Option<u32>,
    pub relative_amplitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub cfl: Option<f64>,
    pub t_max: Option<f64>,
    pub max_steps: Option<usize>,
    pub stop_eta: Option<f64>,
    pub stop_speed: Option<f64>,
    pub record_every: Option<usize>,
    pub scheme: Option<String>,
    pub inner_radius: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: Option<PathBuf>,
    /// Snapshot CSV cadence in steps (0 disables snapshots).
    #[serde(default)]
    pub snapshot_every: usize,
    /// Subset of `csv`, `json`.
    pub formats: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_true")]
    pub minkowski: bool,
    #[serde(default)]
    pub evolution: bool,
    #[serde(default = "default_ratio")]
    pub evolution_ratio: f64,
    /// Additional ambient profiles checked by the identity battery.
    #[serde(default)]
    pub battery: Vec<AmbientSection>,
}

fn default_samples() -> usize {
    100
}

fn default_true() -> bool {
    true
}

fn default_ratio() -> f64 {
    3.0
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            minkowski: true,
            evolution: false,
            evolution_ratio: default_ratio(),
            battery: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    #[serde(default)]
    pub radii: Vec<f64>,
    pub inner_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    #[serde(default = "default_check_samples")]
    pub samples: usize,
}

fn default_check_samples() -> usize {
    200
}

impl Default for CheckSection {
    fn default() -> Self {
        Self { samples: default_check_samples() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub ambient: AmbientSection,
    #[serde(default)]
    pub grid: GridSection,
    pub initial: Option<InitialSection>,
    pub flow: Option<FlowSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub profile: ProfileSection,

    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
    /// SHA-256 of the raw config text, hex encoded.
    #[serde(skip)]
    pub hash: String,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.hash = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        Ok(cfg)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn space(&self) -> Result<AmbientSpace> {
        self.space_for(&self.ambient)
    }

    pub fn space_for(&self, a: &AmbientSection) -> Result<AmbientSpace> {
        let mut profile = match a.family.as_str() {
            "euclidean" => WarpingProfile::euclidean(),
            "sphere" => WarpingProfile::sphere(),
            "hyperbolic" => WarpingProfile::hyperbolic(),
            "polynomial" => {
                let c = a.coefficients.clone().ok_or_else(|| cfg_err("ambient.coefficients is required for family \"polynomial\""))?;
                let [lo, hi] = a.domain.ok_or_else(|| cfg_err("ambient.domain is required for family \"polynomial\""))?;
                WarpingProfile::polynomial(c, lo, hi)?
            }
            "table" => {
                let path = a.table.as_ref().ok_or_else(|| cfg_err("ambient.table is required for family \"table\""))?;
                WarpingProfile::table(read_profile_table(&self.resolve(path))?)?
            }
            other => {
                return Err(cfg_err(&format!(
                    "ambient.family: unknown family {other:?} (expected euclidean, sphere, hyperbolic, polynomial, or table)"
                )))
            }
        };
        if let (Some([lo, hi]), false) = (a.domain, a.family == "polynomial") {
            profile = profile.with_domain(lo, hi)?;
        }
        if let Some([lo, hi]) = a.check_range {
            profile = profile.with_check_range(lo, hi)?;
        }
        if let Some(s) = a.scale {
            profile = profile.with_scale(s)?;
        }
        AmbientSpace::new(profile, a.n).map_err(|e| cfg_err(&format!("ambient.n: {e}")))
    }

    pub fn grid(&self) -> Result<GridSn> {
        let stencil = Stencil::from_order(self.grid.order).map_err(|e| cfg_err(&format!("grid.order: {e}")))?;
        GridSn::new(self.ambient.n, self.grid.nodes, stencil).map_err(|e| cfg_err(&format!("grid.nodes: {e}")))
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let s = self.initial.as_ref().ok_or_else(|| cfg_err("missing [initial] section"))?;
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| cfg_err(&format!("initial.{key} is required for kind {:?}", s.kind)));
        Ok(match s.kind.as_str() {
            "leaf" => InitialData::Leaf { radius: need(s.radius, "radius")? },
            "fourier" => InitialData::Fourier { mean: need(s.mean, "mean")?, modes: s.modes.clone() },
            "offcenter_circle" => InitialData::OffcenterCircle { a: need(s.a, "a")?, radius: need(s.radius, "radius")? },
            "table" => {
                let f = s.file.as_ref().ok_or_else(|| cfg_err("initial.file is required for kind \"table\""))?;
                InitialData::table_from_csv(&self.resolve(f))?
            }
            "random_fourier" => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                random_fourier(&mut rng, self.ambient.n, need(s.mean, "mean")?, s.max_mode.unwrap_or(4), s.relative_amplitude.unwrap_or(0.1))
            }
            other => {
                return Err(cfg_err(&format!(
                    "initial.kind: unknown kind {other:?} (expected leaf, fourier, offcenter_circle, table, or random_fourier)"
                )))
            }
        })
    }

    /// Builds the initial graph and checks it against the domain and star-shapedness.
    pub fn initial_graph(&self, space: &AmbientSpace) -> Result<RadialGraph> {
        self.initial_data()?.build(space, self.grid()?).map_err(|e| cfg_err(&format!("initial: {e}")))
    }

    pub fn flow_config(&self) -> Result<FlowConfig> {
        let d = FlowConfig::default();
        let Some(f) = &self.flow else { return Ok(d) };
        let cfg = FlowConfig {
            cfl: f.cfl.unwrap_or(d.cfl),
            t_max: f.t_max.unwrap_or(d.t_max),
            max_steps: f.max_steps.unwrap_or(d.max_steps),
            stop_eta: f.stop_eta.unwrap_or(d.stop_eta),
            stop_speed: f.stop_speed.unwrap_or(d.stop_speed),
            record_every: f.record_every.unwrap_or(d.record_every),
            scheme: f.scheme.as_deref().map(Scheme::parse).transpose()?.unwrap_or(d.scheme),
            frame_every: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Inner leaf radius: `flow.inner_radius`, else the start of the domain.
    pub fn inner_radius(&self, space: &AmbientSpace) -> f64 {
        self.flow.as_ref().and_then(|f| f.inner_radius).unwrap_or(space.profile.domain().0)
    }

    pub fn output_dir(&self, cli: Option<&Path>) -> PathBuf {
        match (cli, &self.output.directory) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => self.base_dir.join("out"),
        }
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.as_ref().is_none_or(|f| f.iter().any(|x| x == format))
    }
}

fn cfg_err(msg: &str) -> Error {
    Error::Config(msg.to_string())
}

/// Reads `r, w` (natural spline) or `r, w, dw, d2w` (derivative columns
/// authoritative) from a CSV file; `#` lines and a header row are ignored.
pub fn read_profile_table(path: &Path) -> Result<TableProfile> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| cfg_err(&format!("{}: {e}", path.display())))?;
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for (row, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| cfg_err(&format!("{}: {e}", path.display())))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if row == 0 => continue,
            Err(e) => return Err(cfg_err(&format!("{}: row {}: {e}", path.display(), row + 1))),
        };
        if cols.is_empty() {
            if values.len() != 2 && values.len() != 4 {
                return Err(cfg_err(&format!("{}: expected 2 or 4 columns, got {}", path.display(), values.len())));
            }
            cols = vec![Vec::new(); values.len()];
        }
        if values.len() != cols.len() {
            return Err(cfg_err(&format!("{}: row {} has {} columns", path.display(), row + 1, values.len())));
        }
        for (c, v) in cols.iter_mut().zip(values) {
            c.push(v);
        }
    }
    let table = match cols.len() {
        2 => TableProfile::from_samples(&cols[0], &cols[1]),
        4 => TableProfile::with_derivatives(&cols[0], &cols[1], &cols[2], &cols[3]),
        _ => return Err(cfg_err(&format!("{}: no data rows", path.display()))),
    };
    table.map_err(|e| cfg_err(&format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let cfg = RunConfig::parse("[ambient]\nfamily = \"sphere\"\nn = 2\n").unwrap();
        let sp = cfg.space().unwrap();
        assert_eq!(sp.n(), 2);
        assert_eq!(cfg.hash.len(), 64);
        assert!(cfg.initial_data().is_err());
        assert_eq!(cfg.flow_config().unwrap(), FlowConfig::default());
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = RunConfig::parse("[ambient]\nfamily = \n").unwrap_err();
        let Error::Config(msg) = err else { panic!() };
        assert!(msg.contains("line 2"), "{msg}");
        let err = RunConfig::parse("[ambient]\nfamily = \"euclidean\"\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Config(m) if m.contains("bogus")));
    }

    #[test]
    fn unknown_family_and_kind() {
        let cfg = RunConfig::parse("[ambient]\nfamily = \"torus\"\n").unwrap();
        assert!(matches!(cfg.space(), Err(Error::Config(_))));
        let cfg = RunConfig::parse("[ambient]\nfamily = \"euclidean\"\n[initial]\nkind = \"blob\"\n").unwrap();
        assert!(matches!(cfg.initial_data(), Err(Error::Config(_))));
    }

    #[test]
    fn polynomial_and_fourier() {
        let text = r#"
            [ambient]
            family = "polynomial"
            coefficients = [0.0, 1.0, 0.0, 0.1]
            domain = [0.5, 3.0]
            [grid]
            nodes = 64
            [initial]
            kind = "fourier"
            mean = 1.5
            modes = [{ k = 2, amplitude = 0.1 }]
            [flow]
            scheme = "euler"
            cfl = 0.1
        "#;
        let cfg = RunConfig::parse(text).unwrap();
        let sp = cfg.space().unwrap();
        let g = cfg.initial_graph(&sp).unwrap();
        assert_eq!(g.rho().len(), 64);
        assert_eq!(cfg.flow_config().unwrap().scheme, Scheme::Euler);
        assert_eq!(cfg.inner_radius(&sp), 0.5);
    }

    #[test]
    fn random_initial_data_follows_seed() {
        let text = "seed = 5\n[ambient]\nfamily = \"euclidean\"\n[initial]\nkind = \"random_fourier\"\nmean = 2.0\n";
        let a = RunConfig::parse(text).unwrap().initial_data().unwrap();
        let b = RunConfig::parse(text).unwrap().initial_data().unwrap();
        assert_eq!(a, b);
        let c = RunConfig::parse(&text.replace("seed = 5", "seed = 6")).unwrap().initial_data().unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_flow_values() {
        let cfg = RunConfig::parse("[ambient]\nfamily = \"euclidean\"\n[flow]\ncfl = -1.0\n").unwrap();
        assert!(cfg.flow_config().is_err());
        let cfg = RunConfig::parse("[ambient]\nfamily = \"euclidean\"\n[flow]\nscheme = \"rk4\"\n").unwrap();
        assert!(cfg.flow_config().is_err());
    }
}

//! TOML run configuration. Every section is optional; missing values fall
//! back to the reference shell (v0 = 10, a = 1, b = 2, scale = 1).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use shellres::checks::{ContourSettings, Tolerances, VerifySettings};
use shellres::expansions::TestFunction;
use shellres::poles::SearchRegion;
use shellres::PotentialSpec;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub potential: PotentialSection,
    #[serde(default)]
    pub units: UnitsSection,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub contour: ContourSection,
    #[serde(default)]
    pub test_function: Option<TestFunctionSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSection {
    pub v0: f64,
    pub a: f64,
    pub b: f64,
}

impl Default for PotentialSection {
    fn default() -> Self {
        Self { v0: 10.0, a: 1.0, b: 2.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsSection {
    pub scale: f64,
}

impl Default for UnitsSection {
    fn default() -> Self {
        Self { scale: 1.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchSection {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub newton_tol: f64,
}

impl Default for SearchSection {
    fn default() -> Self {
        let r = SearchRegion::default_resonance();
        Self { re_min: r.re_min, re_max: r.re_max, im_min: r.im_min, im_max: r.im_max, newton_tol: 1e-12 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContourSection {
    pub k_max: f64,
    pub depth: Option<f64>,
    pub n_poles: usize,
    pub grid_nodes: usize,
    pub max_panel: f64,
    pub n_radii: usize,
}

impl Default for ContourSection {
    fn default() -> Self {
        let c = ContourSettings::default();
        Self { k_max: c.k_max, depth: c.depth, n_poles: c.n_poles, grid_nodes: c.grid_nodes, max_panel: c.max_panel, n_radii: c.n_radii }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum TestFunctionSection {
    GaussianBump { center: f64, width: f64, r_max: f64 },
    /// Two-column CSV `r,value` with a header row.
    Sampled { file: PathBuf },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("shellres-out") }
    }
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub verify: VerifySettings,
    pub newton_tol: f64,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            None => Self::from_raw(RawConfig::default(), Path::new(".")),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
                let raw = parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
                Self::from_raw(raw, p.parent().unwrap_or(Path::new(".")))
            }
        }
    }

    pub fn from_raw(raw: RawConfig, base: &Path) -> Result<Self, CliError> {
        let bad = |section: &str, e: shellres::Error| CliError::Config(format!("[{section}] {e}"));
        let p = &raw.potential;
        let potential = PotentialSpec::new(p.v0, p.a, p.b, raw.units.scale).map_err(|e| bad("potential", e))?;
        let tolerances = Tolerances::with_overrides(&raw.tolerances).map_err(|e| bad("tolerances", e))?;
        let s = &raw.search;
        let region = SearchRegion::new(s.re_min, s.re_max, s.im_min, s.im_max).map_err(|e| bad("search", e))?;
        if !region.is_fourth_quadrant() {
            return Err(CliError::Config("[search] region must satisfy re_min >= 0 and im_max <= 0".into()));
        }
        if !(s.newton_tol >= 1e-13) {
            return Err(CliError::Config("[search] newton_tol must be at least 1e-13".into()));
        }
        let c = &raw.contour;
        if !(c.k_max > 0.0 && c.max_panel > 0.0 && c.grid_nodes >= 16 && c.n_radii >= 2) {
            return Err(CliError::Config("[contour] needs k_max > 0, max_panel > 0, grid_nodes >= 16, n_radii >= 2".into()));
        }
        if let Some(d) = c.depth {
            if !(d > 0.0) {
                return Err(CliError::Config("[contour] depth must be positive".into()));
            }
        }
        let contour = ContourSettings { k_max: c.k_max, depth: c.depth, n_poles: c.n_poles, grid_nodes: c.grid_nodes, max_panel: c.max_panel, n_radii: c.n_radii };
        let test = match raw.test_function {
            None => VerifySettings::default().test,
            Some(TestFunctionSection::GaussianBump { center, width, r_max }) => {
                TestFunction::gaussian_bump(center, width, r_max).map_err(|e| bad("test_function", e))?
            }
            Some(TestFunctionSection::Sampled { file }) => load_samples(&base.join(file))?,
        };
        let mut tolerances = tolerances;
        tolerances.0.insert("newton".into(), s.newton_tol);
        Ok(Self {
            potential,
            verify: VerifySettings { tolerances, region, contour, test },
            newton_tol: s.newton_tol,
            output_dir: if raw.output.dir.is_absolute() { raw.output.dir } else { base.join(raw.output.dir) },
        })
    }
}

/// Parses TOML, reporting the line and key of the first problem.
pub fn parse(text: &str) -> Result<RawConfig, String> {
    toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        let msg = e.message().trim().to_string();
        match line {
            Some(l) => format!("line {l}: {msg}"),
            None => msg,
        }
    })
}

fn load_samples(path: &Path) -> Result<TestFunction, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("[test_function] cannot read {}: {e}", path.display())))?;
    let mut r = Vec::new();
    let mut v = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let field = |j: usize| -> Result<f64, CliError> {
            rec.get(j)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("{}: row {} column {} is not a number", path.display(), i + 2, j + 1)))
        };
        r.push(field(0)?);
        v.push(field(1)?);
    }
    TestFunction::sampled(r, v).map_err(|e| CliError::Config(format!("[test_function] {e}")))
}

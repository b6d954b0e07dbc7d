//! Plain-text run configuration: `[section]` headers and `key = value` lines.
//!
//! Numbers accept fractions (`7/3`); lists are comma separated; a sweep axis
//! may also be written `start:stop:count` for evenly spaced values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ini::Ini;
use rgscope_core::{BetaMode, EquationParams, Field1D, Mesh, RescaleMode, RgPolicy};

use crate::error::CliError;

/// Output directory used when neither the config nor the environment sets one.
pub const DEFAULT_OUT: &str = "rgscope-out";
/// Environment variable that overrides the configured output directory.
pub const OUT_ENV: &str = "RGSCOPE_OUT";

/// Section name to `key → raw value`, keeping the line order of each section.
#[derive(Debug, Default)]
struct Sections(BTreeMap<String, Vec<(String, String)>>);

impl Sections {
    fn parse(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    fn parse_str(text: &str) -> Result<Self, CliError> {
        let ini = Ini::load_from_str_noescape(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
        let mut out = BTreeMap::new();
        for (section, props) in ini.iter() {
            let entries: Vec<(String, String)> =
                props.iter().map(|(k, v)| (k.trim().to_string(), strip_comment(v).to_string())).collect();
            match section {
                Some(name) => {
                    out.entry(name.trim().to_string()).or_insert_with(Vec::new).extend(entries);
                }
                None if entries.is_empty() => {}
                None => {
                    return Err(CliError::Config(format!("key '{}' appears before any [section]", entries[0].0)));
                }
            }
        }
        Ok(Self(out))
    }

    fn check_sections(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.0.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!("unknown section [{k}]; expected one of {}", allowed.join(", ")))),
            None => Ok(()),
        }
    }

    fn section(&self, name: &str) -> &[(String, String)] {
        self.0.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn strip_comment(v: &str) -> &str {
    v.split(['#', ';']).next().unwrap_or("").trim()
}

/// Parses a real number, allowing a single fraction `n/d`.
pub fn parse_number(raw: &str) -> Result<f64, CliError> {
    let s = raw.trim();
    let value = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad_number(raw))?;
            let d: f64 = d.trim().parse().map_err(|_| bad_number(raw))?;
            n / d
        }
        None => s.parse().map_err(|_| bad_number(raw))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad_number(raw))
    }
}

fn bad_number(raw: &str) -> CliError {
    CliError::Config(format!("'{raw}' is not a finite number"))
}

fn parse_uint(key: &str, raw: &str) -> Result<u32, CliError> {
    let v = parse_number(raw)?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return Err(CliError::Config(format!("{key} must be a nonnegative integer, got '{raw}'")));
    }
    Ok(v as u32)
}

fn parse_count(key: &str, raw: &str) -> Result<usize, CliError> {
    parse_uint(key, raw).map(|v| v as usize)
}

/// Comma list or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_list(raw: &str) -> Result<Vec<f64>, CliError> {
    let s = raw.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::Config(format!("range '{raw}' must read start:stop:count")));
        }
        let (start, stop) = (parse_number(parts[0])?, parse_number(parts[1])?);
        let count = parse_count("range count", parts[2])?;
        return Ok(match count {
            0 => Vec::new(),
            1 => vec![start],
            n => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
        });
    }
    s.split(',').map(parse_number).collect()
}

/// Sets one equation coefficient by name.
pub fn set_equation_field(params: &mut EquationParams, key: &str, value: f64) -> Result<(), CliError> {
    let int = |v: f64| -> Result<u32, CliError> {
        if v < 0.0 || v.fract() != 0.0 {
            Err(CliError::Config(format!("{key} must be a nonnegative integer, got {v}")))
        } else {
            Ok(v as u32)
        }
    };
    match key {
        "chi" => params.chi = value,
        "p" => params.p = value,
        "delta" => params.delta = value,
        "r" => params.r = value,
        "eps" => params.eps = value,
        "mu" => params.mu = value,
        "omega" => params.omega = value,
        "m" => params.m = value,
        "lambda" => params.lambda = value,
        "a" => params.a = value,
        "b" => params.b = int(value)?,
        "c" => params.c = int(value)?,
        _ => {
            return Err(CliError::Config(format!(
                "unknown equation key '{key}'; expected chi, p, delta, r, eps, mu, omega, m, lambda, a, b or c"
            )))
        }
    }
    Ok(())
}

/// How β is chosen at each run point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRule {
    Fixed(f64),
    /// `(p + 1)/2` from the point's time exponent.
    Diffusive,
    Marginal,
}

impl BetaRule {
    pub fn resolve(&self, params: &EquationParams) -> BetaMode {
        match *self {
            BetaRule::Fixed(b) => BetaMode::Fixed(b),
            BetaRule::Diffusive => BetaMode::Fixed((params.p + 1.0) / 2.0),
            BetaRule::Marginal => BetaMode::Marginal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Bump,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Height {
    Peak(f64),
    Mass(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialSpec {
    pub shape: Shape,
    pub height: Height,
    pub w: f64,
    pub dx: f64,
    pub extent: f64,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { shape: Shape::Bump, height: Height::Peak(1.0), w: 2.0, dx: 0.05, extent: 16.0 }
    }
}

impl InitialSpec {
    pub fn build(&self) -> Result<Field1D, CliError> {
        let mesh = Mesh::symmetric(self.dx, self.extent).map_err(|e| CliError::Config(format!("[initial]: {e}")))?;
        let field = match (self.shape, self.height) {
            (Shape::Bump, Height::Peak(h)) => Field1D::bump(mesh, h, self.w),
            (Shape::Bump, Height::Mass(m)) => Field1D::bump_with_mass(mesh, m, self.w),
            (Shape::Gaussian, height) => {
                let w = self.w;
                Field1D::from_fn(mesh, 1.0, |x| (-(x / w) * (x / w) / 4.0).exp()).map(|g| match height {
                    Height::Peak(h) => g.scaled(h),
                    Height::Mass(m) => {
                        let total = rgscope_core::field::mass(&g);
                        g.scaled(m / total)
                    }
                })
            }
        };
        field.map_err(|e| CliError::Config(format!("[initial]: {e}")))
    }
}

/// Everything needed for one RG run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: EquationParams,
    pub policy: RgPolicy,
    pub beta: BetaRule,
    pub initial: InitialSpec,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Policy with β resolved for `params`.
    pub fn policy_for(&self, params: &EquationParams) -> RgPolicy {
        RgPolicy { beta_mode: self.beta.resolve(params), ..self.policy }
    }

    /// Checks coefficients, policy and initial data together.
    pub fn validate_point(&self, params: &EquationParams) -> Result<Field1D, CliError> {
        params.validate().map_err(|e| CliError::Config(format!("[equation]: {e}")))?;
        self.policy_for(params).validate(params).map_err(|e| CliError::Config(format!("[policy]: {e}")))?;
        self.initial.build()
    }
}

fn parse_run_sections(sections: &Sections) -> Result<RunConfig, CliError> {
    let mut params = EquationParams::heat();
    for (k, v) in sections.section("equation") {
        set_equation_field(&mut params, k, parse_number(v)?)?;
    }

    let mut policy = RgPolicy::default();
    let mut beta = BetaRule::Fixed(0.5);
    let mut scale_set = false;
    for (k, v) in sections.section("policy") {
        match k.as_str() {
            "scale" | "L" => {
                policy.scale = parse_number(v)?;
                scale_set = true;
            }
            "beta" => {
                beta = match v.to_ascii_lowercase().as_str() {
                    "marginal" => BetaRule::Marginal,
                    "diffusive" => BetaRule::Diffusive,
                    _ => BetaRule::Fixed(parse_number(v)?),
                }
            }
            "rescale" => {
                policy.rescale_mode = match v.to_ascii_lowercase().as_str() {
                    "interp" | "fixed_mesh_interp" | "interpolate" => RescaleMode::FixedMeshInterp,
                    "shrink" | "mesh_shrink" => RescaleMode::MeshShrink,
                    _ => return Err(CliError::Config(format!("rescale must be 'interp' or 'shrink', got '{v}'"))),
                }
            }
            "dt_safety" => policy.dt_safety = parse_number(v)?,
            "tol" => policy.tol = parse_number(v)?,
            "max_iter" => policy.max_iter = parse_count(k, v)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown policy key '{k}'; expected scale, beta, rescale, dt_safety, tol or max_iter"
                )))
            }
        }
    }
    if !scale_set {
        policy.scale = RgPolicy::for_mode(policy.rescale_mode).scale;
    }

    let mut initial = InitialSpec::default();
    let mut height_seen = false;
    for (k, v) in sections.section("initial") {
        match k.as_str() {
            "shape" => {
                initial.shape = match v.to_ascii_lowercase().as_str() {
                    "bump" => Shape::Bump,
                    "gaussian" => Shape::Gaussian,
                    _ => return Err(CliError::Config(format!("shape must be 'bump' or 'gaussian', got '{v}'"))),
                }
            }
            "h" | "mass" => {
                if height_seen {
                    return Err(CliError::Config("[initial] takes either h or mass, not both".into()));
                }
                height_seen = true;
                let x = parse_number(v)?;
                initial.height = if k == "h" { Height::Peak(x) } else { Height::Mass(x) };
            }
            "w" => initial.w = parse_number(v)?,
            "dx" => initial.dx = parse_number(v)?,
            "extent" => initial.extent = parse_number(v)?,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown initial key '{k}'; expected shape, h, mass, w, dx or extent"
                )))
            }
        }
    }

    let mut out_dir = None;
    for (k, v) in sections.section("output") {
        match k.as_str() {
            "dir" => out_dir = Some(PathBuf::from(v)),
            _ => return Err(CliError::Config(format!("unknown output key '{k}'; expected dir"))),
        }
    }
    Ok(RunConfig { params, policy, beta, initial, out_dir })
}

pub fn load_run(path: &Path) -> Result<RunConfig, CliError> {
    let sections = Sections::parse(path)?;
    sections.check_sections(&["equation", "policy", "initial", "output"])?;
    parse_run_sections(&sections)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: RunConfig,
    /// Axis name and values, in file order; the last axis varies fastest.
    pub axes: Vec<(String, Vec<f64>)>,
}

impl SweepConfig {
    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            0
        } else {
            self.axes.iter().map(|(_, v)| v.len()).product()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of grid point `index` (row-major, last axis fastest).
    pub fn point(&self, mut index: usize) -> Vec<f64> {
        let mut values = vec![0.0; self.axes.len()];
        for (slot, (_, axis)) in values.iter_mut().zip(&self.axes).rev() {
            *slot = axis[index % axis.len()];
            index /= axis.len();
        }
        values
    }

    pub fn params_at(&self, index: usize) -> Result<EquationParams, CliError> {
        let mut params = self.base.params;
        for ((name, _), v) in self.axes.iter().zip(self.point(index)) {
            set_equation_field(&mut params, name, v)?;
        }
        Ok(params)
    }
}

pub fn load_sweep(path: &Path) -> Result<SweepConfig, CliError> {
    let sections = Sections::parse(path)?;
    sections.check_sections(&["equation", "policy", "initial", "output", "sweep"])?;
    let base = parse_run_sections(&sections)?;
    let mut axes = Vec::new();
    for (k, v) in sections.section("sweep") {
        // validates the name
        set_equation_field(&mut base.params.clone(), k, 0.0)?;
        if axes.iter().any(|(n, _): &(String, Vec<f64>)| n == k) {
            return Err(CliError::Config(format!("sweep axis '{k}' is given twice")));
        }
        axes.push((k.clone(), parse_list(v)?));
    }
    let sweep = SweepConfig { base, axes };
    if sweep.is_empty() {
        return Err(CliError::Config("sweep grid is empty; give at least one [sweep] axis with values".into()));
    }
    Ok(sweep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    /// `1 + μ cos(2πy)`
    Cosine(f64),
    Constant(f64),
    /// `low` on the first half period, `high` on the second.
    Step(f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Constant(f64),
    /// Polynomial coefficients, constant term first.
    Poly(Vec<f64>),
    /// `sin(k x)`
    Sine(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogConfig {
    pub coefficient: Coefficient,
    pub source: Source,
    pub eps: Vec<f64>,
    pub quad_n: usize,
    /// Oscillation amplitude `κ` in `F(y, x) = (1 + κ cos 2πy)·f(x)`.
    pub mean_value_amp: f64,
    pub mean_value_interval: (f64, f64),
    pub out_dir: Option<PathBuf>,
}

pub fn load_homog(path: &Path) -> Result<HomogConfig, CliError> {
    let sections = Sections::parse(path)?;
    sections.check_sections(&["homog", "output"])?;
    let mut kind = String::from("cosine");
    let (mut mu, mut value, mut low, mut high) = (0.8, 1.0, 1.0, 2.0);
    let mut source_kind = String::from("constant");
    let (mut f_value, mut f_coeffs, mut f_k) = (1.0, vec![1.0], 1.0);
    let mut eps: Vec<f64> = (0..8).map(|k| 0.1 / 2f64.powi(k)).collect();
    let mut quad_n = 64;
    let mut amp = 0.5;
    let mut interval = (0.0, 1.0);
    for (k, v) in sections.section("homog") {
        match k.as_str() {
            "d" => kind = v.to_ascii_lowercase(),
            "mu" => mu = parse_number(v)?,
            "d_value" => value = parse_number(v)?,
            "d_low" => low = parse_number(v)?,
            "d_high" => high = parse_number(v)?,
            "f" => source_kind = v.to_ascii_lowercase(),
            "f_value" => f_value = parse_number(v)?,
            "f_coeffs" => f_coeffs = parse_list(v)?,
            "f_k" => f_k = parse_number(v)?,
            "eps" => eps = parse_list(v)?,
            "quad_n" => quad_n = parse_count(k, v)?,
            "mean_value_amp" => amp = parse_number(v)?,
            "mean_value_a" => interval.0 = parse_number(v)?,
            "mean_value_b" => interval.1 = parse_number(v)?,
            _ => return Err(CliError::Config(format!("unknown homog key '{k}'"))),
        }
    }
    let coefficient = match kind.as_str() {
        "cosine" | "cos" => Coefficient::Cosine(mu),
        "constant" | "const" => Coefficient::Constant(value),
        "step" => Coefficient::Step(low, high),
        _ => return Err(CliError::Config(format!("d must be cosine, constant or step, got '{kind}'"))),
    };
    let source = match source_kind.as_str() {
        "constant" | "const" => Source::Constant(f_value),
        "poly" => Source::Poly(f_coeffs),
        "sine" | "sin" => Source::Sine(f_k),
        _ => return Err(CliError::Config(format!("f must be constant, poly or sine, got '{source_kind}'"))),
    };
    if eps.is_empty() || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(CliError::Config("eps must be a nonempty list of positive values".into()));
    }
    if !(interval.1 > interval.0) {
        return Err(CliError::Config("mean_value_a must be smaller than mean_value_b".into()));
    }
    let mut out_dir = None;
    for (k, v) in sections.section("output") {
        match k.as_str() {
            "dir" => out_dir = Some(PathBuf::from(v)),
            _ => return Err(CliError::Config(format!("unknown output key '{k}'; expected dir"))),
        }
    }
    Ok(HomogConfig { coefficient, source, eps, quad_n, mean_value_amp: amp, mean_value_interval: interval, out_dir })
}

/// `RGSCOPE_OUT`, then the configured directory, then [`DEFAULT_OUT`].
pub fn resolve_out_dir(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => configured.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
    }
}

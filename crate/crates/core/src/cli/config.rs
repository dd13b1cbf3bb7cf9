//! Line-oriented run configuration.
//!
//! ```text
//! # free Gaussian
//! grid.n = 256
//! grid.length = 40
//! physics.D = 0.05
//! initial.kind = gaussian
//! initial.sigma = 1
//! time.dt = 1e-3
//! ```
//!
//! Every line is blank, a `#` comment, or `section.key = value`. Keys are
//! case-sensitive and unknown keys are rejected. Anything not given takes
//! its default; [`RunConfig::echo`] prints the fully resolved form, which
//! parses back to an equal value.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::evolution::{Propagator, Schedule, Scheme};
use crate::functionals::{R3Variant, Regularisation};
use crate::gauge::GaugeParams;
use crate::grid::{self, make_grid, GridSpec, InitialState, ScalarFieldSpec, TrigPoly, WaveFunction};
use crate::kinematics::DGParams;
use crate::random;

/// Where a value came from, for error messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// Line and column (both 1-based) in the config text.
    Text { line: usize, column: usize },
    /// A `--set` override, by position on the command line.
    Override(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Text { line, column } => write!(f, "line {line}, column {column}"),
            Origin::Override(i) => write!(f, "--set #{i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub origin: Option<Origin>,
    pub message: String,
}

impl ConfigError {
    fn at(origin: &Origin, message: impl Into<String>) -> Self {
        Self { origin: Some(origin.clone()), message: message.into() }
    }

    fn plain(message: impl Into<String>) -> Self {
        Self { origin: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.origin {
            Some(o) => write!(f, "{o}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = std::result::Result<T, ConfigError>;

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["dim", "n", "length"]),
    ("physics", &["hbar", "mass", "D", "Dprime", "c1", "c2", "c3", "c4", "c5", "r3"]),
    ("potential", &["kind", "stiffness", "center", "amplitude", "width", "mode", "axis"]),
    ("initial", &["kind", "sigma", "center", "k0", "k", "modes", "path"]),
    ("time", &["dt", "steps", "record_every", "scheme"]),
    ("regularisation", &["epsilon"]),
    ("output", &["dir", "csv", "snapshot", "last_good", "snapshots"]),
    ("run", &["seed"]),
    ("gauge", &["kappa", "gamma", "lambda", "theta", "amp"]),
];

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialConfig {
    None,
    /// `½k|x-c|²`.
    Harmonic { stiffness: f64, center: Vec<f64> },
    /// Wrapped Gaussian bump.
    Gaussian { amplitude: f64, center: Vec<f64>, width: f64 },
    /// `A cos(2πm x_axis / L)`.
    Cosine { amplitude: f64, mode: i32, axis: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialConfig {
    Gaussian { sigma: f64, center: Vec<f64>, k0: Vec<f64> },
    PlaneWave { k: Vec<f64> },
    /// Normalised random Fourier coefficients on `|m| ≤ modes`, from `run.seed`.
    Random { modes: i32 },
    /// Normalised `exp(a + ib)` with random real trig `a`, `b`.
    NodeFree { modes: i32 },
    /// A `.wf` or `.json` snapshot.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub hbar: f64,
    pub mass: f64,
    pub d: f64,
    pub d_prime: f64,
    pub c: [f64; 5],
    pub r3: R3Variant,
    pub potential: PotentialConfig,
    pub initial: InitialConfig,
    pub dt: f64,
    pub steps: usize,
    pub record_every: usize,
    pub scheme: Scheme,
    pub epsilon: f64,
    pub output_dir: PathBuf,
    pub csv: PathBuf,
    pub snapshot: PathBuf,
    pub last_good: PathBuf,
    /// Also write every recorded state as `snap_NNNNNN.wf`.
    pub snapshots: bool,
    pub seed: u64,
    pub gauge: GaugeParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 1,
            n: 256,
            length: 40.0,
            hbar: 1.0,
            mass: 1.0,
            d: 0.0,
            d_prime: 0.0,
            c: [0.0; 5],
            r3: R3Variant::CurrentSquared,
            potential: PotentialConfig::None,
            initial: InitialConfig::Gaussian { sigma: 1.0, center: vec![], k0: vec![] },
            dt: 1e-3,
            steps: 1000,
            record_every: 10,
            scheme: Scheme::Strang,
            epsilon: crate::functionals::DEFAULT_EPSILON,
            output_dir: PathBuf::from("."),
            csv: PathBuf::from("observables.csv"),
            snapshot: PathBuf::from("final.wf"),
            last_good: PathBuf::from("last_good.wf"),
            snapshots: false,
            seed: 0,
            gauge: GaugeParams::identity(),
        }
    }
}

struct Entry {
    value: String,
    origin: Origin,
}

/// Raw `section.key → value` map with provenance.
#[derive(Default)]
struct Entries(BTreeMap<String, Entry>);

fn check_key(key: &str, origin: &Origin) -> ConfigResult<()> {
    let Some((section, name)) = key.split_once('.') else {
        return Err(ConfigError::at(origin, format!("expected `section.key`, got `{key}`")));
    };
    let Some((_, names)) = KEYS.iter().find(|(s, _)| *s == section) else {
        let sections: Vec<&str> = KEYS.iter().map(|(s, _)| *s).collect();
        return Err(ConfigError::at(
            origin,
            format!("unknown section `{section}`; sections are {}", sections.join(", ")),
        ));
    };
    if !names.contains(&name) {
        return Err(ConfigError::at(
            origin,
            format!("unknown key `{key}`; keys in `{section}` are {}", names.join(", ")),
        ));
    }
    Ok(())
}

impl Entries {
    fn parse(text: &str) -> ConfigResult<Self> {
        let mut out = Entries::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            if body.trim().is_empty() {
                continue;
            }
            let lead = body.len() - body.trim_start().len();
            let key_origin = Origin::Text { line, column: raw[..lead].chars().count() + 1 };
            let Some(eq) = body.find('=') else {
                let column = raw[..body.trim_end().len()].chars().count() + 1;
                return Err(ConfigError::at(&Origin::Text { line, column }, "expected `=` after key"));
            };
            let key = body[..eq].trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(ConfigError::at(&key_origin, format!("malformed key `{key}`")));
            }
            let after = &body[eq + 1..];
            let value = after.trim();
            let vstart = eq + 1 + (after.len() - after.trim_start().len());
            let value_origin = Origin::Text { line, column: raw[..vstart].chars().count() + 1 };
            if value.is_empty() {
                return Err(ConfigError::at(&value_origin, format!("missing value for `{key}`")));
            }
            check_key(key, &key_origin)?;
            if let Some(prev) = out.0.get(key) {
                return Err(ConfigError::at(
                    &key_origin,
                    format!("duplicate key `{key}` (first set at {})", prev.origin),
                ));
            }
            out.0.insert(key.to_string(), Entry { value: value.to_string(), origin: value_origin });
        }
        Ok(out)
    }

    fn set(&mut self, spec: &str, index: usize) -> ConfigResult<()> {
        let origin = Origin::Override(index);
        let Some((key, value)) = spec.split_once('=') else {
            return Err(ConfigError::at(&origin, format!("expected `section.key=value`, got `{spec}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        check_key(key, &origin)?;
        if value.is_empty() {
            return Err(ConfigError::at(&origin, format!("missing value for `{key}`")));
        }
        self.0.insert(key.to_string(), Entry { value: value.to_string(), origin });
        Ok(())
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.0.remove(key)
    }

    fn real(&mut self, key: &str, default: f64) -> ConfigResult<f64> {
        match self.take(key) {
            None => Ok(default),
            Some(e) => parse_real(&e.value, &e.origin, key),
        }
    }

    fn int<T: std::str::FromStr>(&mut self, key: &str, default: T) -> ConfigResult<T> {
        match self.take(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse()
                .map_err(|_| ConfigError::at(&e.origin, format!("`{key}` must be an integer, got `{}`", e.value))),
        }
    }

    fn reals(&mut self, key: &str) -> ConfigResult<Vec<f64>> {
        match self.take(key) {
            None => Ok(vec![]),
            Some(e) => e.value.split(',').map(|v| parse_real(v.trim(), &e.origin, key)).collect(),
        }
    }

    fn text(&mut self, key: &str) -> Option<Entry> {
        self.take(key)
    }
}

fn parse_real(v: &str, origin: &Origin, key: &str) -> ConfigResult<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| ConfigError::at(origin, format!("`{key}` must be a real number, got `{v}`")))?;
    if !x.is_finite() {
        return Err(ConfigError::at(origin, format!("`{key}` must be finite, got `{v}`")));
    }
    Ok(x)
}

fn unused_for(entries: &mut Entries, section: &str, kind: &str, allowed: &[&str]) -> ConfigResult<()> {
    let prefix = format!("{section}.");
    let stray: Vec<(String, Origin)> = entries
        .0
        .iter()
        .filter(|(k, _)| k.starts_with(&prefix) && !allowed.contains(&&k[prefix.len()..]))
        .map(|(k, e)| (k.clone(), e.origin.clone()))
        .collect();
    if let Some((k, o)) = stray.into_iter().next() {
        return Err(ConfigError::at(&o, format!("`{k}` is not used by {section}.kind = {kind}")));
    }
    Ok(())
}

fn build(mut e: Entries) -> ConfigResult<RunConfig> {
    let d = RunConfig::default();
    let mut cfg = RunConfig {
        dim: e.int("grid.dim", d.dim)?,
        n: e.int("grid.n", d.n)?,
        length: e.real("grid.length", d.length)?,
        hbar: e.real("physics.hbar", d.hbar)?,
        mass: e.real("physics.mass", d.mass)?,
        d: e.real("physics.D", d.d)?,
        d_prime: e.real("physics.Dprime", d.d_prime)?,
        ..d.clone()
    };
    for i in 0..5 {
        cfg.c[i] = e.real(&format!("physics.c{}", i + 1), 0.0)?;
    }
    if let Some(v) = e.text("physics.r3") {
        cfg.r3 = match v.value.as_str() {
            "current-squared" => R3Variant::CurrentSquared,
            "divergence-squared" => R3Variant::DivergenceSquared,
            other => {
                return Err(ConfigError::at(
                    &v.origin,
                    format!("`physics.r3` must be current-squared or divergence-squared, got `{other}`"),
                ))
            }
        };
    }

    let kind = e.text("potential.kind");
    let kind_name = kind.as_ref().map_or("none", |k| k.value.as_str()).to_string();
    cfg.potential = match kind_name.as_str() {
        "none" => {
            unused_for(&mut e, "potential", "none", &[])?;
            PotentialConfig::None
        }
        "harmonic" => {
            unused_for(&mut e, "potential", "harmonic", &["stiffness", "center"])?;
            PotentialConfig::Harmonic { stiffness: e.real("potential.stiffness", 1.0)?, center: e.reals("potential.center")? }
        }
        "gaussian" => {
            unused_for(&mut e, "potential", "gaussian", &["amplitude", "center", "width"])?;
            PotentialConfig::Gaussian {
                amplitude: e.real("potential.amplitude", 1.0)?,
                center: e.reals("potential.center")?,
                width: e.real("potential.width", 1.0)?,
            }
        }
        "cosine" => {
            unused_for(&mut e, "potential", "cosine", &["amplitude", "mode", "axis"])?;
            PotentialConfig::Cosine {
                amplitude: e.real("potential.amplitude", 1.0)?,
                mode: e.int("potential.mode", 1)?,
                axis: e.int("potential.axis", 0)?,
            }
        }
        other => {
            let origin = kind.map(|k| k.origin).expect("non-default kind comes from an entry");
            return Err(ConfigError::at(
                &origin,
                format!("`potential.kind` must be none, harmonic, gaussian or cosine, got `{other}`"),
            ));
        }
    };

    let kind = e.text("initial.kind");
    let kind_name = kind.as_ref().map_or("gaussian", |k| k.value.as_str()).to_string();
    cfg.initial = match kind_name.as_str() {
        "gaussian" => {
            unused_for(&mut e, "initial", "gaussian", &["sigma", "center", "k0"])?;
            InitialConfig::Gaussian {
                sigma: e.real("initial.sigma", 1.0)?,
                center: e.reals("initial.center")?,
                k0: e.reals("initial.k0")?,
            }
        }
        "plane-wave" => {
            unused_for(&mut e, "initial", "plane-wave", &["k"])?;
            InitialConfig::PlaneWave { k: e.reals("initial.k")? }
        }
        "random" => {
            unused_for(&mut e, "initial", "random", &["modes"])?;
            InitialConfig::Random { modes: e.int("initial.modes", 4)? }
        }
        "node-free" => {
            unused_for(&mut e, "initial", "node-free", &["modes"])?;
            InitialConfig::NodeFree { modes: e.int("initial.modes", 3)? }
        }
        "file" => {
            unused_for(&mut e, "initial", "file", &["path"])?;
            let Some(p) = e.text("initial.path") else {
                let origin = kind.map(|k| k.origin).expect("file kind comes from an entry");
                return Err(ConfigError::at(&origin, "initial.kind = file needs initial.path"));
            };
            InitialConfig::File { path: PathBuf::from(p.value) }
        }
        other => {
            let origin = kind.map(|k| k.origin).expect("non-default kind comes from an entry");
            return Err(ConfigError::at(
                &origin,
                format!("`initial.kind` must be gaussian, plane-wave, random, node-free or file, got `{other}`"),
            ));
        }
    };

    cfg.dt = e.real("time.dt", d.dt)?;
    cfg.steps = e.int("time.steps", d.steps)?;
    cfg.record_every = e.int("time.record_every", d.record_every)?;
    if let Some(v) = e.text("time.scheme") {
        cfg.scheme = v.value.parse().map_err(|_| {
            ConfigError::at(&v.origin, format!("`time.scheme` must be strang or rk4, got `{}`", v.value))
        })?;
    }
    cfg.epsilon = e.real("regularisation.epsilon", d.epsilon)?;
    for (key, slot) in [
        ("output.dir", &mut cfg.output_dir),
        ("output.csv", &mut cfg.csv),
        ("output.snapshot", &mut cfg.snapshot),
        ("output.last_good", &mut cfg.last_good),
    ] {
        if let Some(v) = e.text(key) {
            *slot = PathBuf::from(v.value);
        }
    }
    if let Some(v) = e.text("output.snapshots") {
        cfg.snapshots = match v.value.as_str() {
            "true" => true,
            "false" => false,
            other => return Err(ConfigError::at(&v.origin, format!("`output.snapshots` must be true or false, got `{other}`"))),
        };
    }
    cfg.seed = e.int("run.seed", d.seed)?;
    cfg.gauge = GaugeParams {
        kappa: e.real("gauge.kappa", 0.0)?,
        gamma: e.real("gauge.gamma", 0.0)?,
        lambda: e.real("gauge.lambda", 1.0)?,
        theta: e.real("gauge.theta", 0.0)?,
        amp: e.real("gauge.amp", 1.0)?,
    };
    debug_assert!(e.0.is_empty(), "every known key is consumed");
    cfg.validate()?;
    Ok(cfg)
}

/// Parse config text with defaults applied and constraints checked.
pub fn parse_config(text: &str) -> ConfigResult<RunConfig> {
    parse_with_overrides(text, &[])
}

/// [`parse_config`] with `section.key=value` overrides applied on top.
pub fn parse_with_overrides(text: &str, overrides: &[String]) -> ConfigResult<RunConfig> {
    let mut e = Entries::parse(text)?;
    for (i, s) in overrides.iter().enumerate() {
        e.set(s, i + 1)?;
    }
    build(e)
}

/// Read and parse a config file; `None` means all defaults.
pub fn load_config(path: Option<&Path>, overrides: &[String]) -> ConfigResult<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|err| ConfigError::plain(format!("cannot read {}: {err}", p.display())))?,
        None => String::new(),
    };
    parse_with_overrides(&text, overrides).map_err(|mut err| {
        if let (Some(p), Some(Origin::Text { .. })) = (path, &err.origin) {
            err.message = format!("{}: {}", p.display(), err.message);
        }
        err
    })
}

fn reals_text(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    fn validate(&self) -> ConfigResult<()> {
        let bad = |key: &str, msg: String| Err(ConfigError::plain(format!("{key}: {msg}")));
        if let Err(err) = make_grid(self.dim, self.n, self.length) {
            let key = if !(1..=2).contains(&self.dim) {
                "grid.dim"
            } else if self.n < grid::MIN_POINTS {
                "grid.n"
            } else {
                "grid.length"
            };
            let msg = err.to_string();
            return bad(key, msg.strip_prefix("invalid grid: ").unwrap_or(&msg).to_string());
        }
        if let Err(err) = self.params().validate() {
            return bad("physics", err.to_string());
        }
        if let Err(err) = Regularisation::new(self.epsilon) {
            return bad("regularisation.epsilon", err.to_string());
        }
        if let Err(err) = self.schedule() {
            return bad("time", err.to_string());
        }
        if let Err(err) = self.gauge.validate() {
            return bad("gauge", err.to_string());
        }
        let vec_len = |key: &str, v: &[f64]| -> ConfigResult<()> {
            if v.is_empty() || v.len() == self.dim {
                Ok(())
            } else {
                bad(key, format!("needs {} components, got {}", self.dim, v.len()))
            }
        };
        match &self.potential {
            PotentialConfig::Harmonic { center, .. } => vec_len("potential.center", center)?,
            PotentialConfig::Gaussian { center, width, .. } => {
                vec_len("potential.center", center)?;
                if !(*width > 0.0) {
                    return bad("potential.width", format!("must be > 0, got {width}"));
                }
            }
            PotentialConfig::Cosine { axis, .. } if *axis >= self.dim => {
                return bad("potential.axis", format!("must be < grid.dim = {}, got {axis}", self.dim));
            }
            _ => {}
        }
        match &self.initial {
            InitialConfig::Gaussian { sigma, center, k0 } => {
                vec_len("initial.center", center)?;
                vec_len("initial.k0", k0)?;
                if !(*sigma > 0.0) {
                    return bad("initial.sigma", format!("must be > 0, got {sigma}"));
                }
            }
            InitialConfig::PlaneWave { k } => vec_len("initial.k", k)?,
            InitialConfig::Random { modes } | InitialConfig::NodeFree { modes } => {
                if *modes < 0 || 2 * *modes as usize >= self.n {
                    return bad("initial.modes", format!("must lie in [0, {}), got {modes}", self.n / 2));
                }
            }
            InitialConfig::File { .. } => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> GridSpec {
        make_grid(self.dim, self.n, self.length).expect("validated grid")
    }

    pub fn potential_spec(&self) -> ScalarFieldSpec {
        match &self.potential {
            PotentialConfig::None => ScalarFieldSpec::zero(),
            PotentialConfig::Harmonic { stiffness, center } => {
                ScalarFieldSpec::Harmonic { stiffness: *stiffness, center: center.clone() }
            }
            PotentialConfig::Gaussian { amplitude, center, width } => {
                ScalarFieldSpec::Gaussian { amplitude: *amplitude, center: center.clone(), width: *width }
            }
            PotentialConfig::Cosine { amplitude, mode, axis } => {
                let base = [2.0 * std::f64::consts::PI / self.length; 2];
                ScalarFieldSpec::Trig(TrigPoly::cos(base, *axis, *mode, *amplitude))
            }
        }
    }

    pub fn params(&self) -> DGParams {
        DGParams {
            hbar: self.hbar,
            mass: self.mass,
            d: self.d,
            d_prime: self.d_prime,
            c: self.c,
            potential: self.potential_spec(),
            r3_variant: self.r3,
        }
    }

    pub fn regularisation(&self) -> Regularisation {
        Regularisation { epsilon_rel: self.epsilon }
    }

    pub fn schedule(&self) -> crate::Result<Schedule> {
        Schedule::new(self.dt, self.steps, self.record_every)
    }

    pub fn propagator(&self) -> crate::Result<Propagator> {
        Propagator::new(&self.grid(), &self.params(), self.regularisation(), self.scheme)
    }

    /// The initial state. Relative file paths resolve against `base`.
    pub fn initial_state(&self, base: &Path) -> crate::Result<WaveFunction> {
        let g = self.grid();
        match &self.initial {
            InitialConfig::Gaussian { sigma, center, k0 } => grid::sample(
                &g,
                &InitialState::Gaussian { sigma: *sigma, center: center.clone(), k0: k0.clone() },
            ),
            InitialConfig::PlaneWave { k } => grid::sample(&g, &InitialState::PlaneWave { k: k.clone() }),
            InitialConfig::Random { modes } => random::band_limited_state(&g, *modes, &mut random::rng(self.seed)),
            InitialConfig::NodeFree { modes } => {
                random::node_free_state(&g, *modes, &mut random::rng(self.seed))?.normalized()
            }
            InitialConfig::File { path } => {
                let snap = grid::snapshot::load(&base.join(path))?;
                if snap.psi.grid() != &g {
                    return Err(crate::Error::GridMismatch);
                }
                Ok(snap.psi)
            }
        }
    }

    pub fn output_path(&self, file: &Path) -> PathBuf {
        self.output_dir.join(file)
    }

    /// Every key with its resolved value, in parseable form.
    pub fn echo(&self) -> String {
        let mut s = String::from("# resolved configuration\n");
        let mut put = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        put("grid.dim", self.dim.to_string());
        put("grid.n", self.n.to_string());
        put("grid.length", format!("{:?}", self.length));
        put("physics.hbar", format!("{:?}", self.hbar));
        put("physics.mass", format!("{:?}", self.mass));
        put("physics.D", format!("{:?}", self.d));
        put("physics.Dprime", format!("{:?}", self.d_prime));
        for (i, c) in self.c.iter().enumerate() {
            put(&format!("physics.c{}", i + 1), format!("{c:?}"));
        }
        put(
            "physics.r3",
            match self.r3 {
                R3Variant::CurrentSquared => "current-squared",
                R3Variant::DivergenceSquared => "divergence-squared",
            }
            .into(),
        );
        match &self.potential {
            PotentialConfig::None => put("potential.kind", "none".into()),
            PotentialConfig::Harmonic { stiffness, center } => {
                put("potential.kind", "harmonic".into());
                put("potential.stiffness", format!("{stiffness:?}"));
                if !center.is_empty() {
                    put("potential.center", reals_text(center));
                }
            }
            PotentialConfig::Gaussian { amplitude, center, width } => {
                put("potential.kind", "gaussian".into());
                put("potential.amplitude", format!("{amplitude:?}"));
                if !center.is_empty() {
                    put("potential.center", reals_text(center));
                }
                put("potential.width", format!("{width:?}"));
            }
            PotentialConfig::Cosine { amplitude, mode, axis } => {
                put("potential.kind", "cosine".into());
                put("potential.amplitude", format!("{amplitude:?}"));
                put("potential.mode", mode.to_string());
                put("potential.axis", axis.to_string());
            }
        }
        match &self.initial {
            InitialConfig::Gaussian { sigma, center, k0 } => {
                put("initial.kind", "gaussian".into());
                put("initial.sigma", format!("{sigma:?}"));
                if !center.is_empty() {
                    put("initial.center", reals_text(center));
                }
                if !k0.is_empty() {
                    put("initial.k0", reals_text(k0));
                }
            }
            InitialConfig::PlaneWave { k } => {
                put("initial.kind", "plane-wave".into());
                if !k.is_empty() {
                    put("initial.k", reals_text(k));
                }
            }
            InitialConfig::Random { modes } => {
                put("initial.kind", "random".into());
                put("initial.modes", modes.to_string());
            }
            InitialConfig::NodeFree { modes } => {
                put("initial.kind", "node-free".into());
                put("initial.modes", modes.to_string());
            }
            InitialConfig::File { path } => {
                put("initial.kind", "file".into());
                put("initial.path", path.display().to_string());
            }
        }
        put("time.dt", format!("{:?}", self.dt));
        put("time.steps", self.steps.to_string());
        put("time.record_every", self.record_every.to_string());
        put("time.scheme", self.scheme.to_string());
        put("regularisation.epsilon", format!("{:?}", self.epsilon));
        put("output.dir", self.output_dir.display().to_string());
        put("output.csv", self.csv.display().to_string());
        put("output.snapshot", self.snapshot.display().to_string());
        put("output.last_good", self.last_good.display().to_string());
        put("output.snapshots", self.snapshots.to_string());
        put("run.seed", self.seed.to_string());
        put("gauge.kappa", format!("{:?}", self.gauge.kappa));
        put("gauge.gamma", format!("{:?}", self.gauge.gamma));
        put("gauge.lambda", format!("{:?}", self.gauge.lambda));
        put("gauge.theta", format!("{:?}", self.gauge.theta));
        put("gauge.amp", format!("{:?}", self.gauge.amp));
        s
    }
}

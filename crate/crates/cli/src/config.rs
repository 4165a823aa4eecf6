//! Flat `section.key = value` run configuration.
//!
//! One entry per line; `#` starts a comment. Values are numbers, words,
//! comma-separated lists or calls such as `gaussian(0, 1)`. Every problem
//! in a file is collected and reported together.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use ksmv::field::{FnDrift, InitialChemical};
use ksmv::grid::{Grid1D, TimeMesh};
use ksmv::kernel::{KernelKind, KernelSpec, Normalization};
use ksmv::mild::{Model, PicardSettings, SolveMode, SolveOptions};
use ksmv::particle::{InitialLaw, Interaction, ParticleOptions};
use ksmv::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    /// Chemotactic kernel plus the drift of `c_0`.
    KellerSegel,
    /// No drift.
    Heat,
    /// Linear drift `-rate x`, no interaction.
    Ou { rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum LawSpec {
    Gaussian { mean: f64, variance: f64 },
    Uniform { a: f64, b: f64 },
    Point { x: f64 },
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChemSpec {
    Sine { amplitude: f64, frequency: f64 },
    GaussianBump { amplitude: f64, width: f64 },
    Quadratic { curvature: f64 },
    Constant { value: f64 },
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub chi: f64,
    pub lambda: f64,
    pub normalization: Normalization,
    pub kernel: KernelKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub half_width: f64,
    pub n: usize,
    pub horizon: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleConfig {
    pub counts: Vec<usize>,
    pub seed: u64,
    pub bandwidth: Option<f64>,
    pub binned: bool,
    pub thin: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    pub march: bool,
    pub mass_tol: f64,
    pub clip_tol: f64,
    /// Also solve at half resolution and report the residual ratio.
    pub refine: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QzConfig {
    pub betas: Vec<f64>,
    pub times: Vec<f64>,
    pub x: f64,
    pub y: f64,
    pub mc_beta: f64,
    pub mc_time: f64,
    pub mc_samples: usize,
    pub dt: f64,
    pub bins: usize,
    pub range: (f64, f64),
    pub bound_beta: f64,
    pub bound_samples: usize,
    pub bound_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: Option<PathBuf>,
    pub csv: bool,
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub p0: LawSpec,
    pub c0: ChemSpec,
    pub disc: Discretization,
    pub particles: ParticleConfig,
    pub picard: PicardSettings,
    pub solve: SolveConfig,
    pub qz: QzConfig,
    pub outputs: OutputConfig,
    /// The text the config was parsed from; hashed into run reports.
    pub source: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig {
                kind: ModelKind::KellerSegel,
                chi: 1.0,
                lambda: 0.0,
                normalization: Normalization::Heat,
                kernel: KernelKind::KellerSegel,
            },
            p0: LawSpec::Gaussian {
                mean: 0.0,
                variance: 1.0,
            },
            c0: ChemSpec::Sine {
                amplitude: 1.0,
                frequency: 1.0,
            },
            disc: Discretization {
                half_width: 10.0,
                n: 512,
                horizon: 1.0,
                steps: 100,
            },
            particles: ParticleConfig {
                counts: vec![1000],
                seed: 0,
                bandwidth: None,
                binned: true,
                thin: None,
            },
            picard: PicardSettings::default(),
            solve: SolveConfig {
                march: false,
                mass_tol: SolveOptions::default().mass_tol,
                clip_tol: SolveOptions::default().clip_tol,
                refine: false,
            },
            qz: QzConfig {
                betas: vec![0.0, 0.25, 1.0, 4.0],
                times: vec![0.1, 1.0, 5.0],
                x: 1.0,
                y: 0.0,
                mc_beta: 0.5,
                mc_time: 1.0,
                mc_samples: 100_000,
                dt: 1e-3,
                bins: 40,
                range: (-3.0, 4.0),
                bound_beta: 0.5,
                bound_samples: 20_000,
                bound_times: vec![0.1, 0.5, 1.0],
            },
            outputs: OutputConfig {
                directory: None,
                csv: true,
                plot: true,
            },
            source: String::new(),
        }
    }
}

/// Every key the parser accepts.
pub const KEYS: &[&str] = &[
    "model.type",
    "model.chi",
    "model.lambda",
    "model.normalization",
    "model.kernel",
    "model.ou_rate",
    "initial.p0",
    "initial.c0",
    "discretization.L",
    "discretization.n",
    "discretization.T",
    "discretization.M",
    "particles.N",
    "particles.seed",
    "particles.bandwidth",
    "particles.interaction",
    "particles.thin",
    "picard.safety",
    "picard.k_max",
    "picard.tol",
    "solve.mode",
    "solve.mass_tol",
    "solve.clip_tol",
    "solve.refine",
    "qz.beta",
    "qz.t",
    "qz.x",
    "qz.y",
    "qz.mc_beta",
    "qz.mc_t",
    "qz.mc_N",
    "qz.dt",
    "qz.bins",
    "qz.range",
    "qz.bound_beta",
    "qz.bound_N",
    "qz.bound_t",
    "outputs.directory",
    "outputs.formats",
];

struct Parser {
    entries: BTreeMap<String, (usize, String)>,
    errors: Vec<String>,
    base: PathBuf,
}

fn split_list(v: &str) -> Vec<&str> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.parse::<f64>()
        .map_err(|_| format!("expected a number, got {s:?}"))
}

fn parse_count(s: &str) -> Result<usize, String> {
    // 1e4 is accepted as long as it is a whole number
    let v = parse_f64(s)?;
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(format!("expected a whole number, got {s:?}"))
    }
}

/// `name(a, b)` into `("name", ["a", "b"])`; a bare word has no arguments.
fn parse_call(v: &str) -> Result<(String, Vec<String>), String> {
    let v = v.trim();
    match v.find('(') {
        None => Ok((v.to_string(), Vec::new())),
        Some(open) => {
            if !v.ends_with(')') {
                return Err(format!("unbalanced parentheses in {v:?}"));
            }
            let name = v[..open].trim().to_string();
            let inner = &v[open + 1..v.len() - 1];
            Ok((
                name,
                split_list(inner).into_iter().map(str::to_string).collect(),
            ))
        }
    }
}

fn numbers(args: &[String], want: usize, what: &str) -> Result<Vec<f64>, String> {
    if args.len() != want {
        return Err(format!(
            "{what} takes {want} argument(s), got {}",
            args.len()
        ));
    }
    args.iter().map(|a| parse_f64(a)).collect()
}

impl Parser {
    fn new(text: &str, base: PathBuf) -> Self {
        let mut p = Parser {
            entries: BTreeMap::new(),
            errors: Vec::new(),
            base,
        };
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                p.errors.push(format!(
                    "line {line_no}: expected `key = value`, got {line:?}"
                ));
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                p.errors.push(format!("line {line_no}: unknown key {k:?}"));
                continue;
            }
            if v.is_empty() {
                p.errors.push(format!("line {line_no}: {k} has no value"));
                continue;
            }
            if let Some((first, _)) = p.entries.get(k) {
                p.errors
                    .push(format!("line {line_no}: {k} already set on line {first}"));
                continue;
            }
            p.entries.insert(k.to_string(), (line_no, v.to_string()));
        }
        p
    }

    /// Parses `key` with `f` if present; errors are recorded with the line.
    fn get<T>(&mut self, key: &str, f: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        let (line, v) = self.entries.get(key)?.clone();
        match f(&v) {
            Ok(t) => Some(t),
            Err(e) => {
                self.errors.push(format!("line {line}: {key}: {e}"));
                None
            }
        }
    }

    fn set<T>(&mut self, key: &str, slot: &mut T, f: impl FnOnce(&str) -> Result<T, String>) {
        if let Some(v) = self.get(key, f) {
            *slot = v;
        }
    }

    fn require(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.errors.push(msg.into());
        }
    }

    fn samples(&self, path: &str) -> Result<Vec<f64>, String> {
        let p = self.base.join(path.trim());
        let text =
            std::fs::read_to_string(&p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(parse_f64)
            .collect()
    }

    fn law(&self, v: &str) -> Result<LawSpec, String> {
        let (name, args) = parse_call(v)?;
        match name.as_str() {
            "gaussian" => {
                let a = numbers(&args, 2, "gaussian(mean, variance)")?;
                Ok(LawSpec::Gaussian {
                    mean: a[0],
                    variance: a[1],
                })
            }
            "uniform" => {
                let a = numbers(&args, 2, "uniform(a, b)")?;
                Ok(LawSpec::Uniform { a: a[0], b: a[1] })
            }
            "point" => Ok(LawSpec::Point {
                x: numbers(&args, 1, "point(x)")?[0],
            }),
            "samples" if args.len() == 1 => Ok(LawSpec::Samples(self.samples(&args[0])?)),
            _ => Err(format!(
                "unknown initial law {v:?} (gaussian, uniform, point, samples)"
            )),
        }
    }

    fn chem(&self, v: &str) -> Result<ChemSpec, String> {
        let (name, args) = parse_call(v)?;
        match name.as_str() {
            "sine" if args.is_empty() => Ok(ChemSpec::Sine { amplitude: 1.0, frequency: 1.0 }),
            "sine" => {
                let a = numbers(&args, 2, "sine(amplitude, frequency)")?;
                Ok(ChemSpec::Sine { amplitude: a[0], frequency: a[1] })
            }
            "gaussian_bump" => {
                let a = numbers(&args, 2, "gaussian_bump(amplitude, width)")?;
                Ok(ChemSpec::GaussianBump { amplitude: a[0], width: a[1] })
            }
            "quadratic" => Ok(ChemSpec::Quadratic { curvature: numbers(&args, 1, "quadratic(curvature)")?[0] }),
            "constant" => Ok(ChemSpec::Constant { value: numbers(&args, 1, "constant(value)")?[0] }),
            "samples" if args.len() == 1 => Ok(ChemSpec::Samples(self.samples(&args[0])?)),
            _ => Err(format!("unknown chemical profile {v:?} (sine, gaussian_bump, quadratic, constant, samples)")),
        }
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(format!("expected true or false, got {v:?}")),
    }
}

fn f64_list(v: &str) -> Result<Vec<f64>, String> {
    split_list(v).into_iter().map(parse_f64).collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    /// Parses and validates; `base` anchors relative sample paths.
    pub fn parse(text: &str, base: &Path) -> Result<Self, Error> {
        let mut p = Parser::new(text, base.to_path_buf());
        let mut c = RunConfig {
            source: text.to_string(),
            ..RunConfig::default()
        };

        let mut rate = 1.0;
        p.set("model.ou_rate", &mut rate, parse_f64);
        if let Some(kind) = p.get("model.type", |v| match v {
            "keller-segel" => Ok(ModelKind::KellerSegel),
            "heat" => Ok(ModelKind::Heat),
            "ou" => Ok(ModelKind::Ou { rate }),
            _ => Err(format!("expected keller-segel, heat or ou, got {v:?}")),
        }) {
            c.model.kind = kind;
        }
        p.require(
            rate > 0.0 && rate.is_finite(),
            format!("model.ou_rate must be positive, got {rate}"),
        );
        p.set("model.chi", &mut c.model.chi, parse_f64);
        p.set("model.lambda", &mut c.model.lambda, parse_f64);
        p.set(
            "model.normalization",
            &mut c.model.normalization,
            |v| match v {
                "heat" => Ok(Normalization::Heat),
                "two-pi" => Ok(Normalization::TwoPi),
                _ => Err(format!("expected heat or two-pi, got {v:?}")),
            },
        );
        p.set("model.kernel", &mut c.model.kernel, |v| {
            let (name, args) = parse_call(v)?;
            match name.as_str() {
                "keller-segel" if args.is_empty() => Ok(KernelKind::KellerSegel),
                "sign-power" => Ok(KernelKind::SignPower {
                    exponent: numbers(&args, 1, "sign-power(exponent)")?[0],
                }),
                _ => Err(format!(
                    "expected keller-segel or sign-power(exponent), got {v:?}"
                )),
            }
        });
        if let Err(e) = KernelSpec::new(
            c.model.chi,
            c.model.lambda,
            c.model.normalization,
            c.model.kernel,
        ) {
            p.errors.push(format!("model: {}", strip(e)));
        }

        if let Some((line, v)) = p.entries.get("initial.p0").cloned() {
            match p.law(&v) {
                Ok(l) => c.p0 = l,
                Err(e) => p.errors.push(format!("line {line}: initial.p0: {e}")),
            }
        }
        if let Some((line, v)) = p.entries.get("initial.c0").cloned() {
            match p.chem(&v) {
                Ok(l) => c.c0 = l,
                Err(e) => p.errors.push(format!("line {line}: initial.c0: {e}")),
            }
        }

        p.set("discretization.L", &mut c.disc.half_width, parse_f64);
        p.set("discretization.n", &mut c.disc.n, parse_count);
        p.set("discretization.T", &mut c.disc.horizon, parse_f64);
        p.set("discretization.M", &mut c.disc.steps, parse_count);
        let grid = Grid1D::new(c.disc.half_width, c.disc.n);
        if let Err(e) = &grid {
            p.errors.push(format!("discretization: {}", strip_ref(e)));
        }
        if let Err(e) = TimeMesh::new(c.disc.horizon, c.disc.steps) {
            p.errors.push(format!("discretization: {}", strip(e)));
        }

        p.set("particles.N", &mut c.particles.counts, |v| {
            split_list(v).into_iter().map(parse_count).collect()
        });
        p.set("particles.seed", &mut c.particles.seed, |v| {
            v.parse::<u64>()
                .map_err(|_| format!("expected a seed, got {v:?}"))
        });
        p.set(
            "particles.bandwidth",
            &mut c.particles.bandwidth,
            |v| match v {
                "auto" | "silverman" => Ok(None),
                _ => parse_f64(v).map(Some),
            },
        );
        p.set(
            "particles.interaction",
            &mut c.particles.binned,
            |v| match v {
                "binned" => Ok(true),
                "direct" => Ok(false),
                _ => Err(format!("expected binned or direct, got {v:?}")),
            },
        );
        p.set("particles.thin", &mut c.particles.thin, |v| match v {
            "none" => Ok(None),
            _ => parse_count(v).map(Some),
        });
        let counts = c.particles.counts.clone();
        p.require(!counts.is_empty(), "particles.N needs at least one count");
        for n in counts {
            p.require(
                n >= 2,
                format!("particles.N: need at least 2 particles, got {n}"),
            );
        }
        if let Some(b) = c.particles.bandwidth {
            p.require(
                b > 0.0 && b.is_finite(),
                format!("particles.bandwidth must be positive, got {b}"),
            );
        }
        if let Some(s) = c.particles.thin {
            p.require(s > 0, "particles.thin must be positive");
            p.require(
                !c.particles.binned,
                "particles.thin applies to direct interaction only",
            );
        }

        p.set("picard.safety", &mut c.picard.safety, parse_f64);
        p.set("picard.k_max", &mut c.picard.k_max, parse_count);
        p.set("picard.tol", &mut c.picard.tol, parse_f64);
        let s = c.picard;
        p.require(
            s.safety > 0.0 && s.safety <= 1.0,
            format!("picard.safety must lie in (0, 1], got {}", s.safety),
        );
        p.require(s.k_max >= 1, "picard.k_max must be at least 1");
        p.require(
            s.tol > 0.0,
            format!("picard.tol must be positive, got {}", s.tol),
        );

        p.set("solve.mode", &mut c.solve.march, |v| match v {
            "march" => Ok(true),
            "picard" | "picard-restart" => Ok(false),
            _ => Err(format!("expected march or picard-restart, got {v:?}")),
        });
        p.set("solve.mass_tol", &mut c.solve.mass_tol, parse_f64);
        p.set("solve.clip_tol", &mut c.solve.clip_tol, parse_f64);
        p.set("solve.refine", &mut c.solve.refine, parse_bool);
        p.require(
            c.solve.mass_tol > 0.0,
            format!("solve.mass_tol must be positive, got {}", c.solve.mass_tol),
        );
        p.require(
            c.solve.clip_tol >= 0.0,
            format!(
                "solve.clip_tol must be non-negative, got {}",
                c.solve.clip_tol
            ),
        );
        if c.solve.refine {
            p.require(
                c.disc.n.is_multiple_of(4)
                    && c.disc.n / 2 >= ksmv::grid::MIN_POINTS
                    && c.disc.steps.is_multiple_of(2),
                "solve.refine needs n divisible by 4 (n/2 >= 16) and an even M",
            );
        }

        let q = &mut c.qz;
        p.set("qz.beta", &mut q.betas, f64_list);
        p.set("qz.t", &mut q.times, f64_list);
        p.set("qz.x", &mut q.x, parse_f64);
        p.set("qz.y", &mut q.y, parse_f64);
        p.set("qz.mc_beta", &mut q.mc_beta, parse_f64);
        p.set("qz.mc_t", &mut q.mc_time, parse_f64);
        p.set("qz.mc_N", &mut q.mc_samples, parse_count);
        p.set("qz.dt", &mut q.dt, parse_f64);
        p.set("qz.bins", &mut q.bins, parse_count);
        p.set("qz.range", &mut q.range, |v| {
            match f64_list(v)?.as_slice() {
                [a, b] => Ok((*a, *b)),
                _ => Err("expected two numbers `lo, hi`".into()),
            }
        });
        p.set("qz.bound_beta", &mut q.bound_beta, parse_f64);
        p.set("qz.bound_N", &mut q.bound_samples, parse_count);
        p.set("qz.bound_t", &mut q.bound_times, f64_list);
        let q = c.qz.clone();
        for &b in q.betas.iter().chain([&q.mc_beta, &q.bound_beta]) {
            p.require(
                b >= 0.0 && b.is_finite(),
                format!("qz: beta must be finite and non-negative, got {b}"),
            );
        }
        for &t in q.times.iter().chain(&q.bound_times).chain([&q.mc_time]) {
            p.require(
                t > 0.0 && t.is_finite(),
                format!("qz: times must be positive, got {t}"),
            );
        }
        p.require(
            !q.betas.is_empty() && !q.times.is_empty(),
            "qz.beta and qz.t need at least one value",
        );
        p.require(
            !q.bound_times.is_empty(),
            "qz.bound_t needs at least one value",
        );
        p.require(
            q.x.is_finite() && q.y.is_finite(),
            "qz.x and qz.y must be finite",
        );
        p.require(
            q.mc_samples >= 2 && q.bound_samples >= 2,
            "qz sample counts must be at least 2",
        );
        p.require(
            q.dt > 0.0 && q.dt <= q.mc_time,
            format!("qz.dt must lie in (0, qz.mc_t], got {}", q.dt),
        );
        p.require(q.bins >= 1, "qz.bins must be at least 1");
        p.require(q.range.0 < q.range.1, "qz.range needs lo < hi");

        p.set("outputs.directory", &mut c.outputs.directory, |v| {
            Ok(Some(PathBuf::from(v)))
        });
        if let Some((csv, plot)) = p.get("outputs.formats", |v| {
            let mut out = (false, false);
            for f in split_list(v) {
                match f {
                    "csv" => out.0 = true,
                    "plot" => out.1 = true,
                    _ => return Err(format!("unknown format {f:?} (csv, plot)")),
                }
            }
            Ok(out)
        }) {
            c.outputs.csv = csv;
            c.outputs.plot = plot;
        }

        // checks that need a valid grid
        if let Ok(grid) = &grid {
            if let Err(e) = c.law_on(grid) {
                p.errors.push(format!("initial.p0: {}", strip(e)));
            }
            if let Err(e) = c.chemical(grid) {
                p.errors.push(format!("initial.c0: {}", strip(e)));
            }
        }

        if p.errors.is_empty() {
            Ok(c)
        } else {
            Err(Error::Config(p.errors.join("\n")))
        }
    }

    pub fn grid(&self) -> Result<Grid1D, Error> {
        Grid1D::new(self.disc.half_width, self.disc.n)
    }

    pub fn mesh(&self) -> Result<TimeMesh, Error> {
        TimeMesh::new(self.disc.horizon, self.disc.steps)
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec, Error> {
        KernelSpec::new(
            self.model.chi,
            self.model.lambda,
            self.model.normalization,
            self.model.kernel,
        )
    }

    pub fn chemical(&self, grid: &Grid1D) -> Result<InitialChemical, Error> {
        match &self.c0 {
            ChemSpec::Sine {
                amplitude,
                frequency,
            } => InitialChemical::sine(grid, *amplitude, *frequency),
            ChemSpec::GaussianBump { amplitude, width } => {
                InitialChemical::gaussian_bump(grid, *amplitude, *width)
            }
            ChemSpec::Quadratic { curvature } => InitialChemical::quadratic(grid, *curvature),
            ChemSpec::Constant { value } => InitialChemical::constant(grid, *value),
            ChemSpec::Samples(v) => InitialChemical::from_samples(grid, v.clone(), None),
        }
    }

    /// The initial law; tabulated samples live on `grid`.
    pub fn law_on(&self, grid: &Grid1D) -> Result<InitialLaw, Error> {
        match &self.p0 {
            LawSpec::Gaussian { mean, variance } => InitialLaw::gaussian(*mean, *variance),
            LawSpec::Uniform { a, b } => InitialLaw::uniform(*a, *b),
            LawSpec::Point { x } => Ok(InitialLaw::point(*x)),
            LawSpec::Samples(v) => InitialLaw::tabulated(grid, v.clone()),
        }
    }

    pub fn model(&self, grid: &Grid1D) -> Result<Model, Error> {
        Ok(match self.model.kind {
            ModelKind::Heat => Model::heat(),
            ModelKind::Ou { rate } => Model::new(
                None,
                Some(Arc::new(FnDrift::new(move |_, x| -rate * x, None))),
            ),
            ModelKind::KellerSegel => {
                Model::keller_segel(self.kernel_spec()?, self.chemical(grid)?)
            }
        })
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            mass_tol: self.solve.mass_tol,
            clip_tol: self.solve.clip_tol,
        }
    }

    pub fn solve_mode(&self) -> SolveMode {
        if self.solve.march {
            SolveMode::March
        } else {
            SolveMode::PicardWithRestart(self.picard)
        }
    }

    pub fn particle_options(&self, grid: &Grid1D) -> ParticleOptions {
        ParticleOptions {
            interaction: if self.particles.binned {
                Interaction::Binned(*grid)
            } else {
                Interaction::Direct
            },
            thin: self.particles.thin,
            streams: None,
        }
    }
}

/// Message without the error-kind prefix.
fn strip(e: Error) -> String {
    strip_ref(&e)
}

fn strip_ref(e: &Error) -> String {
    match e {
        Error::Domain(m) | Error::Usage(m) | Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

use crate::energy::{ElasticityTensor, FProfile, MaterialModel, TabulatedProfile};
use crate::error::{Error, Result};
use crate::evolution::{eta_schedule, EvolutionOptions, LoadKind, LoadProgram, TabulatedKnot};
use crate::geometry::{Point, Rect};
use crate::mesh::{
    lattice_spacing, Domain, MeshParams, DEFAULT_BG_DIST_FACTOR, DEFAULT_OMEGA_FACTOR,
};
use crate::solver::SolveOptions;
use crate::voidmod::{HealMode, VoidModParams, ETA_MAX};
use std::collections::HashMap;
use std::fmt::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoadPreset {
    Zero,
    Stretch,
    Shear,
    ModeI,
    Tabulated,
}

impl LoadPreset {
    fn name(self) -> &'static str {
        match self {
            LoadPreset::Zero => "zero",
            LoadPreset::Stretch => "stretch",
            LoadPreset::Shear => "shear",
            LoadPreset::ModeI => "mode_i",
            LoadPreset::Tabulated => "tabulated",
        }
    }
}

const SIDES: [&str; 4] = ["left", "bottom", "right", "top"];

/// Everything a run needs. Built from flat `key = value` text; see [`parse_config`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Ω as x0 y0 x1 y1.
    pub omega: Rect,
    /// Width of the Dirichlet collar in lattice spacings ε′.
    pub pad: f64,
    /// Sides carrying a collar: left, bottom, right, top.
    pub dirichlet: [bool; 4],
    pub notches: Vec<Vec<Point>>,
    pub eps: f64,
    /// Radians.
    pub theta0: f64,
    pub omega_factor: f64,
    pub bg_dist_factor: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub mu: f64,
    /// Knots (t, f) of a tabulated profile; truncated quadratic when absent.
    pub f_table: Option<Vec<(f64, f64)>>,
    pub load: LoadPreset,
    pub load_rate: f64,
    pub load_matrix: [[f64; 2]; 2],
    /// Line of the shear and opening presets; the middle of Ω when absent.
    pub load_center: Option<f64>,
    pub load_table: Vec<TabulatedKnot>,
    pub t_end: f64,
    pub delta: f64,
    /// η; the schedule η(ε) when absent.
    pub eta: Option<f64>,
    pub heal_mode: HealMode,
    /// Distance to ∂Ω′ inside which nothing is modified; ω(ε) when absent.
    pub voidmod_margin: Option<f64>,
    pub cg_rel_tol: f64,
    pub max_outer: usize,
    pub max_cg: Option<usize>,
    pub multistarts: usize,
    pub seed: u64,
    pub adapt: bool,
    pub hint_ratio: f64,
    pub stability_checks: usize,
    pub output_dir: String,
    pub export_vtu: bool,
    pub vtu_every: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let so = SolveOptions::default();
        let eo = EvolutionOptions::default();
        RunConfig {
            omega: Rect::new(0.0, 0.0, 1.0, 1.0),
            pad: 1.5,
            dirichlet: [true; 4],
            notches: Vec::new(),
            eps: 1.0 / 32.0,
            theta0: 20f64.to_radians(),
            omega_factor: DEFAULT_OMEGA_FACTOR,
            bg_dist_factor: DEFAULT_BG_DIST_FACTOR,
            kappa: 1.0,
            lambda: 0.0,
            mu: 0.5,
            f_table: None,
            load: LoadPreset::Stretch,
            load_rate: 1.0,
            load_matrix: [[1.0, 0.0], [0.0, 0.0]],
            load_center: None,
            load_table: Vec::new(),
            t_end: 1.0,
            delta: 0.05,
            eta: None,
            heal_mode: HealMode::ElasticExtension,
            voidmod_margin: None,
            cg_rel_tol: so.cg_rel_tol,
            max_outer: so.max_outer,
            max_cg: so.max_cg,
            multistarts: so.multistarts,
            seed: so.seed,
            adapt: eo.adapt,
            hint_ratio: eo.hint_ratio,
            stability_checks: eo.stability_checks,
            output_dir: "out".into(),
            export_vtu: true,
            vtu_every: 1,
        }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::Validation {
        key: key.into(),
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn n_steps(&self) -> Result<usize> {
        let r = self.t_end / self.delta;
        let n = r.round();
        if !(n >= 1.0) || (r - n).abs() > 1e-9 * r.max(1.0) {
            return Err(invalid(
                "delta",
                format!("t_end = {} is not a multiple of {}", self.t_end, self.delta),
            ));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(key, format!("{v} must be positive")))
            }
        };
        if self.omega.is_empty() {
            return Err(invalid("omega", "must have positive width and height"));
        }
        pos("pad", self.pad)?;
        if !self.dirichlet.iter().any(|&s| s) {
            return Err(invalid("dirichlet", "at least one side needs a collar"));
        }
        for n in &self.notches {
            if n.len() < 3 {
                return Err(invalid("notch", "a polygon needs at least three points"));
            }
        }
        pos("eps", self.eps)?;
        if !(self.theta0 > 0.0 && self.theta0 <= std::f64::consts::FRAC_PI_3 + 1e-15) {
            return Err(invalid(
                "theta0",
                format!("{} must lie in (0, pi/3]", self.theta0),
            ));
        }
        if !(self.omega_factor >= 6.0) {
            return Err(invalid("omega_factor", "must be at least 6"));
        }
        pos("bg_dist_factor", self.bg_dist_factor)?;
        pos("kappa", self.kappa)?;
        pos("mu", self.mu)?;
        if !(self.lambda + self.mu > 0.0) {
            return Err(invalid("lambda", "lambda + mu must be positive"));
        }
        if !self.load_rate.is_finite() {
            return Err(invalid("load_rate", "must be finite"));
        }
        pos("t_end", self.t_end)?;
        pos("delta", self.delta)?;
        self.n_steps()?;
        if self.load == LoadPreset::Tabulated && self.load_table.is_empty() {
            return Err(invalid("load_table", "required by the tabulated preset"));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta <= ETA_MAX) {
                return Err(invalid("eta", format!("{eta} must lie in (0, {ETA_MAX}]")));
            }
        }
        if let Some(m) = self.voidmod_margin {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(invalid(
                    "voidmod_margin",
                    format!("{m} must be nonnegative"),
                ));
            }
        }
        if self.vtu_every == 0 {
            return Err(invalid("vtu_every", "must be at least 1"));
        }
        self.evolution_options().validate()?;
        self.material()?;
        self.load()?;
        Ok(())
    }

    pub fn mesh_params(&self) -> MeshParams {
        MeshParams::new(self.theta0, self.eps)
            .with_omega_factor(self.omega_factor)
            .with_bg_dist_factor(self.bg_dist_factor)
    }

    pub fn domain(&self) -> Result<Domain> {
        let h = lattice_spacing(&self.mesh_params());
        let mut d = Domain::padded(self.omega, self.pad * h, self.dirichlet)?;
        for n in &self.notches {
            d = d.with_notch(n.clone());
        }
        d.validate()?;
        Ok(d)
    }

    pub fn material(&self) -> Result<MaterialModel> {
        let c = ElasticityTensor::isotropic(self.lambda, self.mu);
        let f = match &self.f_table {
            None => FProfile::TruncatedQuadratic,
            Some(tab) => FProfile::Custom(TabulatedProfile {
                t: tab.iter().map(|p| p.0).collect(),
                f: tab.iter().map(|p| p.1).collect(),
            }),
        };
        MaterialModel::new(self.kappa, c, f).map_err(|e| invalid("kappa", e.to_string()))
    }

    pub fn load(&self) -> Result<LoadProgram> {
        let y0 = self
            .load_center
            .unwrap_or(0.5 * (self.omega.min[1] + self.omega.max[1]));
        let r = self.load_rate;
        let kind = match self.load {
            LoadPreset::Zero => LoadKind::Zero,
            LoadPreset::Stretch => {
                let a = self.load_matrix;
                LoadKind::Stretch {
                    a: [[r * a[0][0], r * a[0][1]], [r * a[1][0], r * a[1][1]]],
                }
            }
            LoadPreset::Shear => LoadKind::Shear { rate: r, y0 },
            LoadPreset::ModeI => LoadKind::ModeI { rate: r, y0 },
            LoadPreset::Tabulated => LoadKind::Tabulated {
                knots: self.load_table.clone(),
            },
        };
        LoadProgram::new(kind, self.t_end, self.n_steps()?)
    }

    pub fn eta_value(&self) -> f64 {
        self.eta.unwrap_or_else(|| eta_schedule(self.eps))
    }

    pub fn voidmod(&self) -> VoidModParams {
        VoidModParams {
            eta: self.eta_value(),
            heal_mode: self.heal_mode,
            margin: self.voidmod_margin,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            cg_rel_tol: self.cg_rel_tol,
            max_outer: self.max_outer,
            max_cg: self.max_cg,
            multistarts: self.multistarts,
            seed: self.seed,
        }
    }

    pub fn evolution_options(&self) -> EvolutionOptions {
        EvolutionOptions {
            solve: self.solve_options(),
            adapt: self.adapt,
            hint_ratio: self.hint_ratio,
            stability_checks: self.stability_checks,
        }
    }

    /// ε and δ divided by 2^i.
    pub fn refined(&self, i: usize) -> RunConfig {
        let f = (1u64 << i) as f64;
        let mut c = self.clone();
        c.eps /= f;
        c.delta /= f;
        c
    }

    /// Canonical text form: every key in a fixed order, optional keys only when set.
    pub fn to_canonical_string(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put(
            "omega",
            nums(&[
                self.omega.min[0],
                self.omega.min[1],
                self.omega.max[0],
                self.omega.max[1],
            ]),
        );
        put("pad", num(self.pad));
        let sides: Vec<&str> = SIDES
            .iter()
            .zip(&self.dirichlet)
            .filter(|(_, &b)| b)
            .map(|(s, _)| *s)
            .collect();
        put("dirichlet", sides.join(" "));
        for n in &self.notches {
            put("notch", rows(n.iter().map(|p| p.to_vec())));
        }
        put("eps", num(self.eps));
        put("theta0", num(self.theta0));
        put("omega_factor", num(self.omega_factor));
        put("bg_dist_factor", num(self.bg_dist_factor));
        put("kappa", num(self.kappa));
        put("lambda", num(self.lambda));
        put("mu", num(self.mu));
        if let Some(tab) = &self.f_table {
            put("f_table", rows(tab.iter().map(|p| vec![p.0, p.1])));
        }
        put("load", self.load.name().into());
        put("load_rate", num(self.load_rate));
        let a = self.load_matrix;
        put("load_matrix", nums(&[a[0][0], a[0][1], a[1][0], a[1][1]]));
        if let Some(c) = self.load_center {
            put("load_center", num(c));
        }
        if !self.load_table.is_empty() {
            put(
                "load_table",
                rows(self.load_table.iter().map(|k| {
                    vec![
                        k.t, k.a[0][0], k.a[0][1], k.a[1][0], k.a[1][1], k.b[0], k.b[1],
                    ]
                })),
            );
        }
        put("t_end", num(self.t_end));
        put("delta", num(self.delta));
        if let Some(e) = self.eta {
            put("eta", num(e));
        }
        put(
            "heal_mode",
            match self.heal_mode {
                HealMode::ElasticExtension => "elastic",
                HealMode::McShane => "mcshane",
            }
            .into(),
        );
        if let Some(m) = self.voidmod_margin {
            put("voidmod_margin", num(m));
        }
        put("cg_rel_tol", num(self.cg_rel_tol));
        put("max_outer", self.max_outer.to_string());
        if let Some(m) = self.max_cg {
            put("max_cg", m.to_string());
        }
        put("multistarts", self.multistarts.to_string());
        put("seed", self.seed.to_string());
        put("adapt", self.adapt.to_string());
        put("hint_ratio", num(self.hint_ratio));
        put("stability_checks", self.stability_checks.to_string());
        put("output_dir", self.output_dir.clone());
        put("export_vtu", self.export_vtu.to_string());
        put("vtu_every", self.vtu_every.to_string());
        s
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn nums(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

fn rows(r: impl Iterator<Item = Vec<f64>>) -> String {
    r.map(|v| nums(&v)).collect::<Vec<_>>().join("; ")
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{}' is not finite", s.trim()))
    }
}

fn parse_list(s: &str, n: Option<usize>) -> std::result::Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split_whitespace()
        .map(parse_f64)
        .collect::<std::result::Result<_, _>>()?;
    match n {
        Some(n) if v.len() != n => Err(format!("expected {n} numbers, found {}", v.len())),
        _ => Ok(v),
    }
}

fn parse_rows(s: &str, width: usize) -> std::result::Result<Vec<Vec<f64>>, String> {
    s.split(';')
        .filter(|r| !r.trim().is_empty())
        .map(|r| parse_list(r, Some(width)))
        .collect()
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        o => Err(format!("'{o}' is not a boolean")),
    }
}

fn parse_int<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("'{}' is not a nonnegative integer", s.trim()))
}

fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    match s.strip_suffix("deg") {
        Some(d) => Ok(parse_f64(d)?.to_radians()),
        None => parse_f64(s),
    }
}

fn set_key(c: &mut RunConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    match key {
        "omega" => {
            let x = parse_list(v, Some(4))?;
            c.omega = Rect::new(x[0], x[1], x[2], x[3]);
        }
        "pad" => c.pad = parse_f64(v)?,
        "dirichlet" => {
            let mut d = [false; 4];
            for w in v
                .split(|ch: char| ch.is_whitespace() || ch == ',')
                .filter(|w| !w.is_empty())
            {
                if w == "none" {
                    continue;
                }
                let i = SIDES
                    .iter()
                    .position(|s| *s == w)
                    .ok_or(format!("unknown side '{w}'"))?;
                d[i] = true;
            }
            c.dirichlet = d;
        }
        "notch" => c.notches.push(
            parse_rows(v, 2)?
                .into_iter()
                .map(|p| [p[0], p[1]])
                .collect(),
        ),
        "eps" => c.eps = parse_f64(v)?,
        "theta0" => c.theta0 = parse_angle(v)?,
        "omega_factor" => c.omega_factor = parse_f64(v)?,
        "bg_dist_factor" => c.bg_dist_factor = parse_f64(v)?,
        "kappa" => c.kappa = parse_f64(v)?,
        "lambda" => c.lambda = parse_f64(v)?,
        "mu" => c.mu = parse_f64(v)?,
        "f_table" => {
            c.f_table = Some(
                parse_rows(v, 2)?
                    .into_iter()
                    .map(|p| (p[0], p[1]))
                    .collect(),
            )
        }
        "load" => {
            c.load = match v.trim() {
                "zero" => LoadPreset::Zero,
                "stretch" => LoadPreset::Stretch,
                "shear" => LoadPreset::Shear,
                "mode_i" => LoadPreset::ModeI,
                "tabulated" => LoadPreset::Tabulated,
                o => return Err(format!("unknown preset '{o}'")),
            }
        }
        "load_rate" => c.load_rate = parse_f64(v)?,
        "load_matrix" => {
            let a = parse_list(v, Some(4))?;
            c.load_matrix = [[a[0], a[1]], [a[2], a[3]]];
        }
        "load_center" => c.load_center = Some(parse_f64(v)?),
        "load_table" => {
            c.load_table = parse_rows(v, 7)?
                .into_iter()
                .map(|r| TabulatedKnot {
                    t: r[0],
                    a: [[r[1], r[2]], [r[3], r[4]]],
                    b: [r[5], r[6]],
                })
                .collect()
        }
        "t_end" => c.t_end = parse_f64(v)?,
        "delta" => c.delta = parse_f64(v)?,
        "eta" => c.eta = Some(parse_f64(v)?),
        "heal_mode" => {
            c.heal_mode = match v.trim() {
                "elastic" => HealMode::ElasticExtension,
                "mcshane" => HealMode::McShane,
                o => return Err(format!("unknown heal mode '{o}'")),
            }
        }
        "voidmod_margin" => c.voidmod_margin = Some(parse_f64(v)?),
        "cg_rel_tol" => c.cg_rel_tol = parse_f64(v)?,
        "max_outer" => c.max_outer = parse_int(v)?,
        "max_cg" => c.max_cg = Some(parse_int(v)?),
        "multistarts" => c.multistarts = parse_int(v)?,
        "seed" => c.seed = parse_int(v)?,
        "adapt" => c.adapt = parse_bool(v)?,
        "hint_ratio" => c.hint_ratio = parse_f64(v)?,
        "stability_checks" => c.stability_checks = parse_int(v)?,
        "output_dir" => c.output_dir = v.trim().to_string(),
        "export_vtu" => c.export_vtu = parse_bool(v)?,
        "vtu_every" => c.vtu_every = parse_int(v)?,
        _ => return Err("unknown key".into()),
    }
    Ok(())
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are ignored; every key
/// except `notch` may appear once. Omitted keys keep their [`RunConfig::default`] values.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| Error::Parse {
            line,
            key: body.to_string(),
            reason: "expected key = value".into(),
        })?;
        let key = key.trim();
        if key != "notch" {
            if let Some(first) = seen.get(key) {
                return Err(Error::Parse {
                    line,
                    key: key.into(),
                    reason: format!("already set on line {first}"),
                });
            }
        }
        seen.insert(key.to_string(), line);
        set_key(&mut c, key, value).map_err(|reason| Error::Parse {
            line,
            key: key.into(),
            reason,
        })?;
    }
    c.validate().map_err(|e| match e {
        Error::Validation { key, reason } => {
            let reason = match seen.get(&key) {
                Some(l) => format!("{reason} (line {l})"),
                None => reason,
            };
            Error::Validation { key, reason }
        }
        e => e,
    })?;
    Ok(c)
}

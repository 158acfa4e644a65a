//! Outage-curve experiments: configuration, sweeps, CSV output and dB-gain
//! reports.
//!
//! A configuration is flat `key = value` text, one entry per line, `#`
//! starting a comment. Every key has a default, so an empty file describes
//! the INR sweep at 35 dB SNR.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::fading::{outage_mc_many, OutageEstimate, RngSpec, DEFAULT_TRIALS};
use crate::model::SystemParams;
use crate::optimizer::Scheme;

/// Smallest trial count accepted per curve point.
pub const MIN_TRIALS: u64 = 10_000;

/// Sum of the two hop distances in a position sweep.
pub const POSITION_SPAN: f64 = 2.0;

/// Outage levels at which gains are reported.
pub const REPORT_LEVELS: [f64; 2] = [1e-1, 1e-2];

pub const CSV_COLUMNS: [&str; 5] = ["sweep_value", "scheme", "p_out", "half_width_95", "trials"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sweep {
    /// Loop-interference INR in dB.
    Inr,
    /// Transmit SNR in dB.
    Snr,
    /// Source-relay distance `d1`, with `d2 = 2 - d1`.
    Position,
}

impl Sweep {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "inr" | "inr_sweep" => Some(Sweep::Inr),
            "snr" | "snr_sweep" => Some(Sweep::Snr),
            "position" | "position_sweep" => Some(Sweep::Position),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Sweep::Inr => "inr",
            Sweep::Snr => "snr",
            Sweep::Position => "position",
        }
    }

    /// Default grid covering the visible range of the matching figure.
    pub fn default_points(&self) -> Vec<f64> {
        match self {
            Sweep::Inr => grid(0.0, 2.5, 50.0),
            Sweep::Snr => grid(20.0, 2.5, 55.0),
            Sweep::Position => grid(0.1, 0.1, 1.9),
        }
    }

    fn unit(&self) -> &'static str {
        match self {
            Sweep::Inr | Sweep::Snr => "dB",
            Sweep::Position => "",
        }
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `start, start + step, ..., stop`, with `stop` included up to rounding.
pub fn grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as i64;
    (0..=n.max(-1))
        .map(|i| round12(start + i as f64 * step))
        .collect()
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Parameters held fixed across a sweep.
pub const FIXED_KEYS: [&str; 10] = [
    "snr_db",
    "inr_db",
    "d1",
    "d2",
    "rate",
    "eta",
    "path_loss_exp",
    "mean_h2",
    "mean_g2",
    "block_duration",
];

const OTHER_KEYS: [&str; 7] = [
    "sweep", "points", "schemes", "trials", "seed", "stream", "output",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub sweep: Sweep,
    pub sweep_points: Vec<f64>,
    /// Values for [`FIXED_KEYS`]; missing keys take their defaults.
    pub fixed_values: BTreeMap<String, f64>,
    pub schemes: Vec<Scheme>,
    pub trials: u64,
    pub rng: RngSpec,
    pub output_path: Option<PathBuf>,
}

fn default_fixed(sweep: Sweep) -> BTreeMap<String, f64> {
    let (snr, inr) = match sweep {
        Sweep::Inr => (35.0, 30.0),
        Sweep::Snr => (35.0, 40.0),
        Sweep::Position => (45.0, 35.0),
    };
    [
        ("snr_db", snr),
        ("inr_db", inr),
        ("d1", 1.0),
        ("d2", 1.0),
        ("rate", 3.0),
        ("eta", 0.4),
        ("path_loss_exp", 3.0),
        ("mean_h2", 1.0),
        ("mean_g2", 1.0),
        ("block_duration", 1.0),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

pub fn default_schemes() -> Vec<Scheme> {
    vec![
        Scheme::FullCsi,
        Scheme::PartialCsi,
        Scheme::Fixed(0.3),
        Scheme::Fixed(0.5),
        Scheme::Fixed(0.7),
    ]
}

impl ExperimentConfig {
    pub fn new(sweep: Sweep) -> Self {
        Self {
            sweep,
            sweep_points: sweep.default_points(),
            fixed_values: default_fixed(sweep),
            schemes: default_schemes(),
            trials: DEFAULT_TRIALS,
            rng: RngSpec::new(1, 0),
            output_path: None,
        }
    }

    /// Outage versus INR at 35 dB SNR.
    pub fn inr_study() -> Self {
        Self::new(Sweep::Inr)
    }

    /// Outage versus SNR at 40 dB INR.
    pub fn snr_study() -> Self {
        Self::new(Sweep::Snr)
    }

    /// Outage versus relay position at 45 dB SNR and 35 dB INR.
    pub fn position_study() -> Self {
        Self::new(Sweep::Position)
    }

    /// Parses flat `key = value` text.
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_entries(&parse_entries(text)?)
    }

    /// Builds a configuration from raw entries, which may come from a file
    /// with command-line overrides merged on top.
    pub fn from_entries(entries: &BTreeMap<String, String>) -> Result<Self> {
        for key in entries.keys() {
            if !FIXED_KEYS.contains(&key.as_str()) && !OTHER_KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidConfig(format!("unknown key `{key}`")));
            }
        }
        let sweep = match entries.get("sweep") {
            Some(s) => Sweep::parse(s).ok_or_else(|| {
                Error::InvalidConfig(format!("sweep must be inr, snr or position, got `{s}`"))
            })?,
            None => Sweep::Inr,
        };
        let mut cfg = Self::new(sweep);
        if let Some(p) = entries.get("points") {
            cfg.sweep_points = parse_points(p)?;
        }
        for key in FIXED_KEYS {
            if let Some(v) = entries.get(key) {
                cfg.fixed_values.insert(key.to_string(), parse_num(key, v)?);
            }
        }
        if let Some(s) = entries.get("schemes") {
            cfg.schemes = s
                .split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| {
                    Scheme::parse(t).ok_or_else(|| {
                        Error::InvalidConfig(format!(
                            "unknown scheme `{}`; expected full, partial, partial-literal or fixed-<rho>",
                            t.trim()
                        ))
                    })
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = entries.get("trials") {
            cfg.trials = parse_int(v, "trials")?;
        }
        if let Some(v) = entries.get("seed") {
            cfg.rng.seed = parse_int(v, "seed")?;
        }
        if let Some(v) = entries.get("stream") {
            cfg.rng.stream_id = u32::try_from(parse_int(v, "stream")?)
                .map_err(|_| Error::InvalidConfig("stream must fit in 32 bits".into()))?;
        }
        if let Some(v) = entries.get("output") {
            cfg.output_path = Some(PathBuf::from(v));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Flat entries that reproduce this configuration through [`Self::parse`].
    pub fn to_entries(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("sweep".to_string(), self.sweep.name().to_string()),
            ("points".to_string(), join(self.sweep_points.iter())),
            ("schemes".to_string(), join(self.schemes.iter())),
            ("trials".to_string(), self.trials.to_string()),
            ("seed".to_string(), self.rng.seed.to_string()),
            ("stream".to_string(), self.rng.stream_id.to_string()),
        ];
        out.extend(
            self.fixed_values
                .iter()
                .map(|(k, v)| (k.clone(), v.to_string())),
        );
        if let Some(p) = &self.output_path {
            out.push(("output".to_string(), p.display().to_string()));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.sweep_points.is_empty() {
            return bad("points must not be empty".into());
        }
        if let Some(x) = self.sweep_points.iter().find(|x| !x.is_finite()) {
            return bad(format!("sweep point {x} is not finite"));
        }
        let mut sorted = self.sweep_points.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("sweep points must be distinct".into());
        }
        if self.sweep == Sweep::Position {
            if let Some(x) = self
                .sweep_points
                .iter()
                .find(|&&x| !(x > 0.0 && x < POSITION_SPAN))
            {
                return bad(format!("position sweep needs 0 < d1 < {POSITION_SPAN} so that d2 = {POSITION_SPAN} - d1 > 0, got d1 = {x}"));
            }
        }
        if self.schemes.is_empty() {
            return bad("schemes must not be empty".into());
        }
        let mut labels: Vec<_> = self.schemes.iter().map(Scheme::label).collect();
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return bad(format!("scheme `{}` listed twice", w[0]));
        }
        if self.trials < MIN_TRIALS {
            return bad(format!(
                "trials must be at least {MIN_TRIALS}, got {}",
                self.trials
            ));
        }
        for &x in &self.sweep_points {
            self.params_at(x)
                .validate()
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        }
        Ok(())
    }

    fn fixed(&self, key: &str) -> f64 {
        self.fixed_values
            .get(key)
            .copied()
            .unwrap_or_else(|| default_fixed(self.sweep)[key])
    }

    /// System parameters at one sweep point.
    pub fn params_at(&self, x: f64) -> SystemParams {
        let (mut snr, mut inr) = (self.fixed("snr_db"), self.fixed("inr_db"));
        let (mut d1, mut d2) = (self.fixed("d1"), self.fixed("d2"));
        match self.sweep {
            Sweep::Inr => inr = x,
            Sweep::Snr => snr = x,
            Sweep::Position => (d1, d2) = (x, POSITION_SPAN - x),
        }
        SystemParams {
            eh_efficiency: self.fixed("eta"),
            path_loss_exp: self.fixed("path_loss_exp"),
            mean_h2: self.fixed("mean_h2"),
            mean_g2: self.fixed("mean_g2"),
            block_duration: self.fixed("block_duration"),
            ..SystemParams::default()
        }
        .with_rate(self.fixed("rate"))
        .with_distances(d1, d2)
        .with_snr_db(snr)
        .with_inr_db(inr)
    }
}

fn join<T: fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Splits config text into entries; later lines override earlier ones.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!(
                "line {}: expected `key = value`, got `{line}`",
                i + 1
            ))
        })?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Parses `a:step:b` or a comma-separated list.
pub fn parse_points(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, step, b) = (
            parse_num("points", parts[0])?,
            parse_num("points", parts[1])?,
            parse_num("points", parts[2])?,
        );
        if !(step > 0.0) || b < a {
            return Err(Error::InvalidConfig(format!(
                "points range `{s}` needs step > 0 and start <= stop"
            )));
        }
        if (b - a) / step > 1e6 {
            return Err(Error::InvalidConfig(format!(
                "points range `{s}` has too many points"
            )));
        }
        return Ok(grid(a, step, b));
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_num("points", t))
        .collect()
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: `{}` is not a number", v.trim())))
}

fn parse_int(v: &str, key: &str) -> Result<u64> {
    let t = v.trim().replace('_', "");
    // Exact integers first; `1e6` style is accepted where it is exact.
    t.parse::<u64>()
        .ok()
        .or_else(|| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.fract() == 0.0 && *x >= 0.0 && *x <= 2f64.powi(53))
                .map(|x| x as u64)
        })
        .ok_or_else(|| {
            Error::InvalidConfig(format!(
                "{key}: `{}` is not a non-negative integer",
                v.trim()
            ))
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub sweep_value: f64,
    pub scheme: String,
    pub p_out: f64,
    pub half_width_95: f64,
    pub trials: u64,
}

/// Outage curves plus the `#` metadata written ahead of the CSV rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurveSet {
    pub metadata: Vec<(String, String)>,
    pub points: Vec<CurvePoint>,
}

impl CurveSet {
    pub fn sort(&mut self) {
        self.points.sort_by(|a, b| {
            a.scheme
                .cmp(&b.scheme)
                .then(a.sweep_value.total_cmp(&b.sweep_value))
        });
    }

    /// Scheme labels in order of first appearance.
    pub fn schemes(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.points {
            if !out.contains(&p.scheme) {
                out.push(p.scheme.clone());
            }
        }
        out
    }

    /// `(sweep_value, p_out)` of one scheme, sorted by sweep value.
    pub fn curve(&self, scheme: &str) -> Vec<(f64, f64)> {
        let mut c: Vec<_> = self
            .points
            .iter()
            .filter(|p| p.scheme == scheme)
            .map(|p| (p.sweep_value, p.p_out))
            .collect();
        c.sort_by(|a, b| a.0.total_cmp(&b.0));
        c
    }

    pub fn get(&self, scheme: &str, sweep_value: f64) -> Option<&CurvePoint> {
        self.points
            .iter()
            .find(|p| p.scheme == scheme && p.sweep_value == sweep_value)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn sweep(&self) -> Option<Sweep> {
        self.meta("sweep").and_then(Sweep::parse)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.metadata {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS).map_err(csv_err)?;
        for p in &self.points {
            w.write_record([
                p.sweep_value.to_string(),
                p.scheme.clone(),
                p.p_out.to_string(),
                p.half_width_95.to_string(),
                p.trials.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut metadata = Vec::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    metadata.push((k.trim().to_string(), v.trim().to_string()));
                }
            }
        }
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header = r.headers().map_err(csv_err)?.clone();
        if header.iter().map(str::trim).ne(CSV_COLUMNS) {
            return Err(Error::InvalidConfig(format!(
                "CSV header must be `{}`, got `{}`",
                CSV_COLUMNS.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut points = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let row = i + 1;
            let num = |j: usize| -> Result<f64> {
                rec[j].trim().parse().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "row {row}: `{}` in column {} is not a number",
                        &rec[j], CSV_COLUMNS[j]
                    ))
                })
            };
            points.push(CurvePoint {
                sweep_value: num(0)?,
                scheme: rec[1].trim().to_string(),
                p_out: num(2)?,
                half_width_95: num(3)?,
                trials: parse_int(&rec[4], "trials")?,
            });
        }
        Ok(Self { metadata, points })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("CSV: {e}"))
}

/// Estimates every (sweep point, scheme) outage probability.
///
/// All schemes at one point share channel draws; point `i` uses substream
/// `stream + i`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<CurveSet> {
    cfg.validate()?;
    let mut metadata = vec![("version".to_string(), env!("CARGO_PKG_VERSION").to_string())];
    metadata.extend(cfg.to_entries().into_iter().filter(|(k, _)| k != "output"));
    let mut set = CurveSet {
        metadata,
        points: Vec::new(),
    };
    for (i, &x) in cfg.sweep_points.iter().enumerate() {
        let params = cfg.params_at(x);
        let spec = RngSpec::new(cfg.rng.seed, cfg.rng.stream_id.wrapping_add(i as u32));
        let estimates = outage_mc_many(&params, &cfg.schemes, cfg.trials, spec);
        for (s, e) in cfg.schemes.iter().zip(&estimates) {
            if !e.p_out.is_finite() {
                return Err(Error::NonFiniteCoefficient);
            }
            set.points.push(point(x, s, e));
        }
        log::info!(
            "{} = {x}: {}",
            cfg.sweep,
            cfg.schemes
                .iter()
                .zip(&estimates)
                .map(|(s, e)| format!("{s} {:.3e}", e.p_out))
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    set.sort();
    Ok(set)
}

fn point(x: f64, s: &Scheme, e: &OutageEstimate) -> CurvePoint {
    CurvePoint {
        sweep_value: x,
        scheme: s.label(),
        p_out: e.p_out,
        half_width_95: e.half_width_95,
        trials: e.trials,
    }
}

/// Sweep value where a curve first reaches `level`, by linear interpolation
/// of `log10 p_out` against the sweep value. Also returns whether outage is
/// increasing there. Zero estimates are floored at `floor` before taking logs.
pub fn crossing(curve: &[(f64, f64)], level: f64, floor: f64) -> Option<(f64, bool)> {
    let lg = |p: f64| p.max(floor).log10();
    let t = level.log10();
    for w in curve.windows(2) {
        let ((x0, p0), (x1, p1)) = (w[0], w[1]);
        let (y0, y1) = (lg(p0), lg(p1));
        if (y0 - t) * (y1 - t) > 0.0 || y0 == y1 {
            if y0 == t {
                return Some((x0, y1 > y0));
            }
            continue;
        }
        return Some((x0 + (t - y0) / (y1 - y0) * (x1 - x0), y1 > y0));
    }
    None
}

/// Gain of `reference` over `other` at one outage level, in sweep units.
///
/// Positive when `reference` reaches the level at a harsher operating point:
/// a larger sweep value where outage grows with it, a smaller one where
/// outage falls. `None` when either curve never crosses the level.
pub fn gain(curves: &CurveSet, reference: &str, other: &str, level: f64) -> Option<f64> {
    let floor = floor_for(curves);
    let (xr, rising) = crossing(&curves.curve(reference), level, floor)?;
    let (xo, _) = crossing(&curves.curve(other), level, floor)?;
    Some(if rising { xr - xo } else { xo - xr })
}

fn floor_for(curves: &CurveSet) -> f64 {
    let n = curves
        .points
        .iter()
        .map(|p| p.trials)
        .max()
        .unwrap_or(1)
        .max(1);
    0.5 / n as f64
}

/// Largest horizontal distance between two curves over `levels` outage
/// levels spaced log-uniformly across the range both curves cover.
pub fn max_horizontal_gap(curves: &CurveSet, a: &str, b: &str, levels: usize) -> Option<f64> {
    let (ca, cb) = (curves.curve(a), curves.curve(b));
    let range = |c: &[(f64, f64)]| {
        let ps = c.iter().map(|p| p.1).filter(|&p| p > 0.0);
        (
            ps.clone().fold(f64::INFINITY, f64::min),
            ps.fold(0.0, f64::max),
        )
    };
    let ((la, ha), (lb, hb)) = (range(&ca), range(&cb));
    let (lo, hi) = (la.max(lb).log10(), ha.min(hb).log10());
    if !(lo <= hi) {
        return None;
    }
    (0..levels.max(2))
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (levels.max(2) - 1) as f64))
        .filter_map(|level| gain(curves, a, b, level))
        .map(f64::abs)
        .reduce(f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainEntry {
    pub reference: String,
    pub other: String,
    pub level: f64,
    /// `None` when a curve does not cross the level.
    pub gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub sweep: Option<Sweep>,
    pub entries: Vec<GainEntry>,
}

impl Report {
    pub fn get(&self, reference: &str, other: &str, level: f64) -> Option<&GainEntry> {
        self.entries
            .iter()
            .find(|e| e.reference == reference && e.other == other && e.level == level)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let unit = self.sweep.map_or("", |s| s.unit());
        writeln!(
            f,
            "{:<16} {:<16} {:>8} {:>12}",
            "reference", "other", "p_out", "gain"
        )?;
        for e in &self.entries {
            let g = match e.gain {
                Some(g) => format!("{g:.2} {unit}").trim_end().to_string(),
                None => "not-crossed".to_string(),
            };
            writeln!(
                f,
                "{:<16} {:<16} {:>8.0e} {:>12}",
                e.reference, e.other, e.level, g
            )?;
        }
        Ok(())
    }
}

/// Gains of the CSI-aware schemes over every other scheme at
/// [`REPORT_LEVELS`]. When neither `full` nor `partial` is present the first
/// scheme serves as reference.
pub fn emit_report(curves: &CurveSet) -> Report {
    let schemes = curves.schemes();
    let mut refs: Vec<&String> = schemes
        .iter()
        .filter(|s| *s == "full" || *s == "partial")
        .collect();
    refs.sort();
    if refs.is_empty() {
        refs.extend(schemes.first());
    }
    let mut entries = Vec::new();
    for &level in &REPORT_LEVELS {
        for r in &refs {
            for o in schemes.iter().filter(|o| o != r) {
                entries.push(GainEntry {
                    reference: r.to_string(),
                    other: o.clone(),
                    level,
                    gain: gain(curves, r, o, level),
                });
            }
        }
    }
    Report {
        sweep: curves.sweep(),
        entries,
    }
}

//! Experiment specification and its flat `key = value` config format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::channel::{db_to_linear, DropGeometry};
use crate::error::{Error, Result};
use crate::processing::Processing;
use crate::se::Method;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Fig1,
    Fig2,
    Validate,
    Single,
}

impl ExperimentKind {
    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Fig1 => "fig1",
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Validate => "validate",
            ExperimentKind::Single => "single",
        }
    }

    fn default_trials(self) -> usize {
        match self {
            ExperimentKind::Fig1 | ExperimentKind::Single => 1000,
            ExperimentKind::Fig2 => 200,
            ExperimentKind::Validate => 2000,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "fig2" => Ok(Self::Fig2),
            "validate" => Ok(Self::Validate),
            "single" => Ok(Self::Single),
            _ => Err(Error::InvalidConfig(format!("unknown experiment {s:?}"))),
        }
    }
}

/// Uplink data, pilot and relay transmit powers of one Figure 2 case, in watts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerCase {
    pub uplink_w: f64,
    pub pilot_w: f64,
    pub relay_w: f64,
}

impl PowerCase {
    /// Normalized SNRs `(Pu, Pp, Pr)` for noise power `noise_db`.
    pub fn snrs(&self, noise_db: f64) -> (f64, f64, f64) {
        let n0 = db_to_linear(noise_db);
        (self.uplink_w / n0, self.pilot_w / n0, self.relay_w / n0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    /// Uniform over the disk with log-normal shadowing.
    Random,
    /// Every user at the relay, no shadowing (`β = 1`).
    Center,
}

/// Figure 1: sum rate versus `K` at fixed `M/K`, equal unit path loss.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig1Grid {
    pub k_values: Vec<usize>,
    pub ratios: Vec<usize>,
    pub coherence: usize,
    pub uplink_snr: f64,
    pub pilot_snr: f64,
    pub relay_snr: f64,
    pub beta: f64,
}

impl Default for Fig1Grid {
    fn default() -> Self {
        Self {
            k_values: vec![10, 20, 40, 60, 80, 100, 120, 140, 160, 180],
            ratios: vec![5, 10],
            coherence: 200,
            uplink_snr: 1.0,
            pilot_snr: 1.0,
            relay_snr: 10.0,
            beta: 1.0,
        }
    }
}

/// Figure 2: sum-rate distribution over random user drops.
#[derive(Clone, Debug, PartialEq)]
pub struct Fig2Setup {
    pub antennas: usize,
    pub users: usize,
    pub coherence: usize,
    pub drops: usize,
    pub cases: Vec<PowerCase>,
    pub noise_db: f64,
    pub geometry: DropGeometry,
    pub placement: Placement,
}

impl Default for Fig2Setup {
    fn default() -> Self {
        Self {
            antennas: 100,
            users: 20,
            coherence: 200,
            drops: 500,
            cases: vec![
                PowerCase {
                    uplink_w: 0.2,
                    pilot_w: 0.2,
                    relay_w: 1.0,
                },
                PowerCase {
                    uplink_w: 0.1,
                    pilot_w: 0.1,
                    relay_w: 0.5,
                },
            ],
            noise_db: -120.0,
            geometry: DropGeometry::default(),
            placement: Placement::Random,
        }
    }
}

/// Oracle suite sizes.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidateSetup {
    pub antennas: usize,
    pub users: usize,
    pub wishart_trials: usize,
}

impl Default for ValidateSetup {
    fn default() -> Self {
        Self {
            antennas: 100,
            users: 20,
            wishart_trials: 100_000,
        }
    }
}

/// Which result row a `single` run replays.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplayTarget {
    pub experiment: ExperimentKind,
    pub antennas: usize,
    pub users: usize,
    pub method: Method,
    /// 1-based Figure 2 case.
    pub case: usize,
    pub drop: usize,
}

impl Default for ReplayTarget {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::Fig1,
            antennas: 100,
            users: 20,
            method: Method::MonteCarlo,
            case: 1,
            drop: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub trials: usize,
    /// Output CSV; `None` writes to stdout.
    pub out: Option<PathBuf>,
    pub modes: Vec<Processing>,
    pub threads: Option<usize>,
    pub fig1: Fig1Grid,
    pub fig2: Fig2Setup,
    pub validate: ValidateSetup,
    pub replay: ReplayTarget,
}

pub const DEFAULT_SEED: u64 = 20_170_501;

const KEYS: &[&str] = &[
    "seed",
    "trials",
    "out",
    "mode",
    "threads",
    "k_values",
    "ratios",
    "coherence",
    "pu_db",
    "pp_db",
    "pr_db",
    "beta",
    "antennas",
    "users",
    "drops",
    "case1",
    "case2",
    "noise_db",
    "disk_diameter_m",
    "shadow_std_db",
    "pathloss_exp",
    "placement",
    "wishart_trials",
    "experiment",
    "method",
    "case",
    "drop",
];

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; unknown and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {}: expected `key = value`", n + 1))
        })?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::InvalidConfig(format!(
                "line {}: unknown key {key:?}",
                n + 1
            )));
        }
        if map
            .insert(key.to_string(), value.trim().to_string())
            .is_some()
        {
            return Err(Error::InvalidConfig(format!(
                "line {}: duplicate key {key:?}",
                n + 1
            )));
        }
    }
    Ok(map)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_case(key: &str, value: &str) -> Result<PowerCase> {
    match parse_list::<f64>(key, value)?.as_slice() {
        &[uplink_w, pilot_w, relay_w] => Ok(PowerCase {
            uplink_w,
            pilot_w,
            relay_w,
        }),
        _ => Err(Error::InvalidConfig(format!(
            "{key}: expected `uplink_w, pilot_w, relay_w`, got {value:?}"
        ))),
    }
}

/// Parses `zf`, `mr` or `both`.
pub fn parse_modes(value: &str) -> Result<Vec<Processing>> {
    match value {
        "both" => Ok(vec![Processing::ZeroForcing, Processing::MaximumRatio]),
        other => Ok(vec![other.parse()?]),
    }
}

impl ExperimentSpec {
    pub fn defaults(kind: ExperimentKind) -> Self {
        Self {
            kind,
            seed: DEFAULT_SEED,
            trials: kind.default_trials(),
            out: None,
            modes: vec![Processing::ZeroForcing, Processing::MaximumRatio],
            threads: None,
            fig1: Fig1Grid::default(),
            fig2: Fig2Setup::default(),
            validate: ValidateSetup::default(),
            replay: ReplayTarget::default(),
        }
    }

    /// Defaults overlaid with `entries` (config file values, then flags).
    pub fn from_entries(kind: ExperimentKind, entries: &BTreeMap<String, String>) -> Result<Self> {
        let mut spec = Self::defaults(kind);
        for (key, value) in entries {
            spec.set(key, value)?;
        }
        spec.validate()?;
        Ok(spec)
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "seed" => self.seed = parse(key, v)?,
            "trials" => self.trials = parse(key, v)?,
            "out" => self.out = (v != "-").then(|| PathBuf::from(v)),
            "mode" => self.modes = parse_modes(v)?,
            "threads" => self.threads = Some(parse(key, v)?),
            "k_values" => self.fig1.k_values = parse_list(key, v)?,
            "ratios" => self.fig1.ratios = parse_list(key, v)?,
            "coherence" => {
                self.fig1.coherence = parse(key, v)?;
                self.fig2.coherence = self.fig1.coherence;
            }
            "pu_db" => self.fig1.uplink_snr = db_to_linear(parse(key, v)?),
            "pp_db" => self.fig1.pilot_snr = db_to_linear(parse(key, v)?),
            "pr_db" => self.fig1.relay_snr = db_to_linear(parse(key, v)?),
            "beta" => self.fig1.beta = parse(key, v)?,
            "antennas" => {
                let m = parse(key, v)?;
                (
                    self.fig2.antennas,
                    self.validate.antennas,
                    self.replay.antennas,
                ) = (m, m, m);
            }
            "users" => {
                let k = parse(key, v)?;
                (self.fig2.users, self.validate.users, self.replay.users) = (k, k, k);
            }
            "drops" => self.fig2.drops = parse(key, v)?,
            "case1" | "case2" => {
                let idx = usize::from(key == "case2");
                self.fig2.cases[idx] = parse_case(key, v)?;
            }
            "noise_db" => self.fig2.noise_db = parse(key, v)?,
            "disk_diameter_m" => self.fig2.geometry.disk_diameter_m = parse(key, v)?,
            "shadow_std_db" => self.fig2.geometry.shadow_std_db = parse(key, v)?,
            "pathloss_exp" => self.fig2.geometry.pathloss_exp = parse(key, v)?,
            "placement" => {
                self.fig2.placement = match v {
                    "random" => Placement::Random,
                    "center" => Placement::Center,
                    _ => return Err(Error::InvalidConfig(format!("placement: {v:?}"))),
                }
            }
            "wishart_trials" => self.validate.wishart_trials = parse(key, v)?,
            "experiment" => self.replay.experiment = parse(key, v)?,
            "method" => {
                self.replay.method = match v {
                    "closed_form" => Method::ClosedForm,
                    "monte_carlo" => Method::MonteCarlo,
                    _ => return Err(Error::InvalidConfig(format!("method: {v:?}"))),
                }
            }
            "case" => {
                let c = v.strip_prefix("case").unwrap_or(v);
                self.replay.case = parse(key, c)?;
            }
            "drop" => self.replay.drop = parse(key, v)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.modes.is_empty() {
            return bad("no processing mode selected".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be >= 1".into());
        }
        let needs_trials =
            !(self.kind == ExperimentKind::Single && self.replay.method == Method::ClosedForm);
        if needs_trials && self.trials < 100 {
            return bad(format!("trials must be >= 100, got {}", self.trials));
        }
        match self.kind {
            ExperimentKind::Fig1 => {
                let g = &self.fig1;
                if g.k_values.is_empty() || g.ratios.is_empty() {
                    return bad("fig1 grid is empty".into());
                }
                for &k in &g.k_values {
                    if k < 2 || k >= g.coherence {
                        return bad(format!("fig1: K={k} needs 2 <= K < T={}", g.coherence));
                    }
                }
                if let Some(r) = g.ratios.iter().find(|&&r| r < 2) {
                    return bad(format!("fig1: ratio {r} must be >= 2 so that M > K"));
                }
            }
            ExperimentKind::Fig2 => {
                if self.fig2.drops == 0 {
                    return bad("fig2: drops must be >= 1".into());
                }
                if self.fig2.cases.iter().any(|c| {
                    [c.uplink_w, c.pilot_w, c.relay_w]
                        .iter()
                        .any(|p| !(p.is_finite() && *p > 0.0))
                }) {
                    return bad("fig2: case powers must be positive".into());
                }
            }
            ExperimentKind::Single => {
                let r = &self.replay;
                if self.modes.len() != 1 {
                    return bad("single replays one mode (zf or mr)".into());
                }
                if r.method == Method::ClosedForm && self.modes[0] != Processing::ZeroForcing {
                    return bad("the closed form covers zero-forcing only".into());
                }
                if !matches!(r.experiment, ExperimentKind::Fig1 | ExperimentKind::Fig2) {
                    return bad("single replays fig1 or fig2 rows".into());
                }
                if r.experiment == ExperimentKind::Fig2
                    && !(1..=self.fig2.cases.len()).contains(&r.case)
                {
                    return bad(format!("case must be 1 or 2, got {}", r.case));
                }
            }
            ExperimentKind::Validate => {
                if self.validate.wishart_trials < 100 {
                    return bad("wishart_trials must be >= 100".into());
                }
            }
        }
        Ok(())
    }
}

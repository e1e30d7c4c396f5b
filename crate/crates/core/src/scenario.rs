//! Scenario files, daily traffic and energy profiles, and the daily
//! experiment harness.
//!
//! A scenario file is JSON with top-level keys `macro`, `env`, `qos`,
//! `cells`, `rho0` and an optional `profiles` section. Units are SI, except
//! that the noise density may be given in dBm/MHz under `noise_dbm_per_mhz`.
//! Omitted radio, QoS and power fields fall back to the reference
//! deployment: a 1 km macro cell with 10 MHz, 300 m micro cells with 5 MHz,
//! `α = 3.5/4`, `θ = 1000/500`, −105 dBm/MHz, 300 kbit/s at 5% outage.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    noise_density_from_dbm_per_mhz, validate_scenario, BsPowerParams, CellKind, MacroCell,
    PowerBreakdown, PowerClass, QosConfig, RadioEnv, Scenario, SmallCellConfig,
};
use crate::multi_cell::{reference_power, Method};

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
enum PowerSpec {
    Class(PowerClass),
    Explicit { p_tx: f64, p_const: f64, beta: f64 },
}

impl PowerSpec {
    fn params(self, bandwidth: f64) -> BsPowerParams<f64> {
        match self {
            PowerSpec::Class(c) => c.params(bandwidth),
            PowerSpec::Explicit {
                p_tx,
                p_const,
                beta,
            } => BsPowerParams {
                p_tx,
                p_const,
                beta,
                bandwidth,
            },
        }
    }
}

fn macro_power() -> PowerSpec {
    PowerSpec::Class(PowerClass::Macro)
}
fn micro_power() -> PowerSpec {
    PowerSpec::Class(PowerClass::Micro)
}
fn d_macro_radius() -> f64 {
    1000.0
}
fn d_macro_bandwidth() -> f64 {
    10e6
}
fn d_cell_radius() -> f64 {
    300.0
}
fn d_cell_bandwidth() -> f64 {
    5e6
}
fn d_alpha_m() -> f64 {
    3.5
}
fn d_alpha_s() -> f64 {
    4.0
}
fn d_theta_m() -> f64 {
    1000.0
}
fn d_theta_s() -> f64 {
    500.0
}
fn d_rate() -> f64 {
    3e5
}
fn d_eta() -> f64 {
    0.05
}
fn d_one() -> f64 {
    1.0
}
fn d_periods() -> usize {
    24
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MacroFile {
    #[serde(default = "d_macro_radius")]
    radius: f64,
    #[serde(default = "macro_power")]
    power: PowerSpec,
    #[serde(default = "d_macro_bandwidth")]
    bandwidth: f64,
}

impl Default for MacroFile {
    fn default() -> Self {
        Self {
            radius: d_macro_radius(),
            power: macro_power(),
            bandwidth: d_macro_bandwidth(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvFile {
    #[serde(default = "d_alpha_m")]
    alpha_m: f64,
    #[serde(default = "d_alpha_s")]
    alpha_s: f64,
    #[serde(default = "d_theta_m")]
    theta_m: f64,
    #[serde(default = "d_theta_s")]
    theta_s: f64,
    #[serde(default)]
    noise_dbm_per_mhz: Option<f64>,
    /// W/Hz.
    #[serde(default)]
    noise_density: Option<f64>,
}

impl Default for EnvFile {
    fn default() -> Self {
        Self {
            alpha_m: d_alpha_m(),
            alpha_s: d_alpha_s(),
            theta_m: d_theta_m(),
            theta_s: d_theta_s(),
            noise_dbm_per_mhz: None,
            noise_density: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QosFile {
    #[serde(default = "d_rate")]
    rate_req: f64,
    #[serde(default = "d_eta")]
    eta: f64,
}

impl Default for QosFile {
    fn default() -> Self {
        Self {
            rate_req: d_rate(),
            eta: d_eta(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CellFile {
    #[serde(default)]
    id: Option<String>,
    kind: CellKind,
    #[serde(default = "d_cell_radius")]
    radius: f64,
    dist_to_mbs: f64,
    #[serde(default)]
    bearing_deg: Option<f64>,
    #[serde(default = "micro_power")]
    power: PowerSpec,
    #[serde(default = "d_cell_bandwidth")]
    bandwidth: f64,
    #[serde(default = "d_one")]
    energy_unit: f64,
    #[serde(default)]
    energy_arrival: f64,
    #[serde(default)]
    handover_cost: f64,
    #[serde(default)]
    user_density: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Sunny,
    Cloudy,
    /// Flat shapes: every period equals the scenario as written.
    Constant,
}

impl std::str::FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sunny" => Ok(ProfileKind::Sunny),
            "cloudy" => Ok(ProfileKind::Cloudy),
            "constant" => Ok(ProfileKind::Constant),
            other => Err(format!(
                "unknown profile `{other}` (expected sunny, cloudy or constant)"
            )),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfilesFile {
    #[serde(default)]
    kind: Option<ProfileKind>,
    #[serde(default = "d_periods")]
    periods: usize,
    /// CSV with header `period,traffic,energy`, relative to the scenario file.
    #[serde(default)]
    csv: Option<String>,
    #[serde(default)]
    traffic_peak: Option<f64>,
    #[serde(default)]
    energy_peak: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    #[allow(dead_code)]
    description: Option<String>,
    #[serde(rename = "macro", default)]
    macro_cell: MacroFile,
    #[serde(default)]
    env: EnvFile,
    #[serde(default)]
    qos: QosFile,
    rho0: f64,
    #[serde(default)]
    cells: Vec<CellFile>,
    #[serde(default)]
    profiles: Option<ProfilesFile>,
}

/// Per-period shapes for traffic and harvested energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyProfiles {
    pub periods: usize,
    /// Multiplies every user density; peak 1.
    pub traffic_shape: Vec<f64>,
    /// Multiplies harvested power; peak 1 (all zero on a day without sun).
    pub energy_shape: Vec<f64>,
    /// Macro user density at the traffic peak (users/m²). `None` keeps the
    /// scenario's densities as the peak.
    pub traffic_peak: Option<f64>,
    /// Harvested power at the energy peak (W), applied to every harvesting
    /// cell. `None` keeps each cell's own arrival rate as its peak.
    pub energy_peak: Option<f64>,
}

impl DailyProfiles {
    pub fn constant(periods: usize) -> Self {
        Self {
            periods,
            traffic_shape: vec![1.0; periods],
            energy_shape: vec![1.0; periods],
            traffic_peak: None,
            energy_peak: None,
        }
    }

    fn check(&self) -> Result<()> {
        if self.periods == 0 {
            return Err(Error::Profile("at least one period is required".into()));
        }
        for (name, v) in [
            ("traffic", &self.traffic_shape),
            ("energy", &self.energy_shape),
        ] {
            if v.len() != self.periods {
                return Err(Error::Profile(format!(
                    "{name} shape has {} values for {} periods",
                    v.len(),
                    self.periods
                )));
            }
            if v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return Err(Error::Profile(format!("{name} shape must lie in [0, 1]")));
            }
        }
        for (name, p) in [
            ("traffic_peak", self.traffic_peak),
            ("energy_peak", self.energy_peak),
        ] {
            if let Some(p) = p {
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::Profile(format!("{name} must be non-negative")));
                }
            }
        }
        Ok(())
    }

    /// Scenario in effect during period `t`.
    pub fn scenario_at(&self, base: &Scenario<f64>, t: usize) -> Scenario<f64> {
        let mut s = base.clone();
        let mut traffic = self.traffic_shape[t];
        if let Some(peak) = self.traffic_peak {
            if base.rho0 > 0.0 {
                traffic *= peak / base.rho0;
            }
        }
        s.rho0 *= traffic;
        for c in &mut s.cells {
            c.user_density *= traffic;
            if c.kind.harvests() {
                c.energy_arrival = match self.energy_peak {
                    Some(w) => self.energy_shape[t] * w / c.energy_unit,
                    None => self.energy_shape[t] * c.energy_arrival,
                };
            }
        }
        s
    }
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let max = v.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        v.into_iter().map(|x| x / max).collect()
    } else {
        v
    }
}

/// Diurnal traffic: low of 10% at 04:00, rising along a half cosine to the
/// 20:00 peak, falling back over the night.
fn traffic_at(hour: f64) -> f64 {
    if (4.0..=20.0).contains(&hour) {
        0.1 + 0.9 * (1.0 - (PI * (hour - 4.0) / 16.0).cos()) / 2.0
    } else {
        let h = if hour < 4.0 { hour + 24.0 } else { hour };
        0.1 + 0.9 * (1.0 + (PI * (h - 20.0) / 8.0).cos()) / 2.0
    }
}

/// Solar output: raised cosine centred on 13:00, zero outside 06:00-20:00.
fn solar_at(hour: f64) -> f64 {
    if (6.0..=20.0).contains(&hour) {
        (1.0 + (2.0 * PI * (hour - 13.0) / 14.0).cos()) / 2.0
    } else {
        0.0
    }
}

/// Harvested power at the energy peak for the synthetic profiles (W).
pub const SUNNY_PEAK_W: f64 = 500.0;
pub const CLOUDY_PEAK_W: f64 = 50.0;

/// Synthetic day sampled at `periods` evenly spaced hours starting at
/// midnight. Sunny and cloudy days share the shapes; the cloudy energy peak
/// is a tenth of the sunny one.
pub fn synthetic_profiles(kind: ProfileKind, periods: usize) -> Result<DailyProfiles> {
    if periods < 2 {
        return Err(Error::Profile(
            "a synthetic day needs at least 2 periods".into(),
        ));
    }
    if kind == ProfileKind::Constant {
        return Ok(DailyProfiles::constant(periods));
    }
    let hours: Vec<f64> = (0..periods)
        .map(|t| t as f64 * 24.0 / periods as f64)
        .collect();
    Ok(DailyProfiles {
        periods,
        traffic_shape: normalized(hours.iter().map(|&h| traffic_at(h)).collect()),
        energy_shape: normalized(hours.iter().map(|&h| solar_at(h)).collect()),
        traffic_peak: None,
        energy_peak: Some(if kind == ProfileKind::Sunny {
            SUNNY_PEAK_W
        } else {
            CLOUDY_PEAK_W
        }),
    })
}

#[derive(Debug, Deserialize)]
struct ProfileRow {
    period: usize,
    traffic: f64,
    energy: f64,
}

/// Reads shapes from a CSV with header `period,traffic,energy`. Rows may
/// come in any order but must cover `0..T` exactly once; each column is
/// normalized to a peak of 1 (energy may be all zero).
pub fn profiles_from_csv(path: &Path) -> Result<DailyProfiles> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows: Vec<ProfileRow> = Vec::new();
    for r in rdr.deserialize() {
        rows.push(r?);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Profile(format!("{}: no rows", path.display())));
    }
    let mut traffic = vec![f64::NAN; n];
    let mut energy = vec![f64::NAN; n];
    for r in &rows {
        if r.period >= n || !traffic[r.period].is_nan() {
            return Err(Error::Profile(format!(
                "{}: periods must be 0..{} without repeats",
                path.display(),
                n - 1
            )));
        }
        if !(r.traffic >= 0.0 && r.energy >= 0.0 && r.traffic.is_finite() && r.energy.is_finite()) {
            return Err(Error::Profile(format!(
                "{}: period {} has a negative or non-finite value",
                path.display(),
                r.period
            )));
        }
        traffic[r.period] = r.traffic;
        energy[r.period] = r.energy;
    }
    if traffic.iter().all(|&x| x == 0.0) {
        return Err(Error::Profile(format!(
            "{}: traffic column is all zero",
            path.display()
        )));
    }
    Ok(DailyProfiles {
        periods: n,
        traffic_shape: normalized(traffic),
        energy_shape: normalized(energy),
        traffic_peak: None,
        energy_peak: None,
    })
}

fn parse_error(e: serde_path_to_error::Error<serde_json::Error>) -> Error {
    let path = e.path().to_string();
    Error::Parse {
        path,
        message: e.into_inner().to_string(),
    }
}

/// Parses scenario JSON. `base_dir` resolves a relative profile CSV path.
pub fn parse_scenario(text: &str, base_dir: &Path) -> Result<(Scenario<f64>, DailyProfiles)> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(parse_error)?;

    let noise_density = match (file.env.noise_density, file.env.noise_dbm_per_mhz) {
        (Some(_), Some(_)) => {
            return Err(Error::Parse {
                path: "env".into(),
                message: "give either noise_density or noise_dbm_per_mhz, not both".into(),
            })
        }
        (Some(w), None) => w,
        (None, Some(dbm)) => noise_density_from_dbm_per_mhz(dbm),
        (None, None) => noise_density_from_dbm_per_mhz(-105.0),
    };
    let n = file.cells.len();
    let cells = file
        .cells
        .into_iter()
        .enumerate()
        .map(|(i, c)| SmallCellConfig {
            id: c.id.unwrap_or_else(|| format!("cell{i}")),
            kind: c.kind,
            radius: c.radius,
            dist_to_mbs: c.dist_to_mbs,
            bearing: c
                .bearing_deg
                .unwrap_or(360.0 * i as f64 / n as f64)
                .to_radians(),
            power: c.power.params(c.bandwidth),
            energy_unit: c.energy_unit,
            energy_arrival: c.energy_arrival,
            handover_cost: c.handover_cost,
            user_density: c.user_density.unwrap_or(2.0 * file.rho0),
        })
        .collect();
    let scenario = Scenario {
        macro_cell: MacroCell {
            radius: file.macro_cell.radius,
            power: file.macro_cell.power.params(file.macro_cell.bandwidth),
        },
        env: RadioEnv {
            alpha_m: file.env.alpha_m,
            alpha_s: file.env.alpha_s,
            theta_m: file.env.theta_m,
            theta_s: file.env.theta_s,
            noise_density,
        },
        qos: QosConfig {
            rate_req: file.qos.rate_req,
            eta: file.qos.eta,
        },
        cells,
        rho0: file.rho0,
    };
    let violations = validate_scenario(&scenario);
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }

    let profiles = match file.profiles {
        None => synthetic_profiles(ProfileKind::Sunny, d_periods())?,
        Some(p) => {
            let mut prof = match (&p.csv, p.kind) {
                (Some(_), Some(_)) => {
                    return Err(Error::Profile("give either csv or kind, not both".into()))
                }
                (Some(csv), None) => profiles_from_csv(&base_dir.join(csv))?,
                (None, kind) => synthetic_profiles(kind.unwrap_or(ProfileKind::Sunny), p.periods)?,
            };
            if p.traffic_peak.is_some() {
                prof.traffic_peak = p.traffic_peak;
            }
            if p.energy_peak.is_some() {
                prof.energy_peak = p.energy_peak;
            }
            prof
        }
    };
    profiles.check()?;
    Ok((scenario, profiles))
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<(Scenario<f64>, DailyProfiles)> {
    let text = fs::read_to_string(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_scenario(&text, &dir)
}

/// One method in one period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRow {
    pub period: usize,
    pub method: Method,
    pub feasible: bool,
    pub power: PowerBreakdown<f64>,
    /// Total divided by the reference power of the same period.
    pub normalized: f64,
    /// On/off state of every cell.
    pub active: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mean_total: f64,
    pub mean_normalized: f64,
    pub infeasible_periods: usize,
}

/// Mean power saved by `method` relative to `baseline`, in percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Saving {
    pub method: Method,
    pub baseline: Method,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySummary {
    pub periods: usize,
    pub mean_reference: f64,
    pub methods: Vec<MethodSummary>,
    pub savings: Vec<Saving>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyResult {
    /// Ordered by period, then by the requested method order.
    pub rows: Vec<DailyRow>,
    /// Reference power of each period (W).
    pub reference: Vec<f64>,
    pub summary: DailySummary,
}

impl DailyResult {
    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &DailyRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn summary_for(&self, method: Method) -> Option<&MethodSummary> {
        self.summary.methods.iter().find(|m| m.method == method)
    }

    pub fn saving(&self, method: Method, baseline: Method) -> Option<f64> {
        self.summary
            .savings
            .iter()
            .find(|s| s.method == method && s.baseline == baseline)
            .map(|s| s.percent)
    }
}

/// Runs every method on every period independently.
pub fn daily_run(
    scenario: &Scenario<f64>,
    profiles: &DailyProfiles,
    methods: &[Method],
) -> Result<DailyResult> {
    if methods.is_empty() {
        return Err(Error::NoMethods);
    }
    profiles.check()?;
    let per_period: Vec<(f64, Vec<DailyRow>)> = (0..profiles.periods)
        .into_par_iter()
        .map(|t| -> Result<(f64, Vec<DailyRow>)> {
            let s = profiles.scenario_at(scenario, t);
            let reference = reference_power(&s)?.total;
            let rows = methods
                .iter()
                .map(|&m| {
                    let plan = m.plan(&s)?;
                    Ok(DailyRow {
                        period: t,
                        method: m,
                        feasible: plan.feasible,
                        normalized: plan.power.total / reference,
                        active: plan.offload.cells.iter().map(|c| c.active).collect(),
                        power: plan.power,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((reference, rows))
        })
        .collect::<Result<Vec<_>>>()?;

    let periods = profiles.periods as f64;
    let reference: Vec<f64> = per_period.iter().map(|p| p.0).collect();
    let rows: Vec<DailyRow> = per_period.into_iter().flat_map(|p| p.1).collect();
    let summaries: Vec<MethodSummary> = methods
        .iter()
        .map(|&m| {
            let mine: Vec<&DailyRow> = rows.iter().filter(|r| r.method == m).collect();
            MethodSummary {
                method: m,
                mean_total: mine.iter().map(|r| r.power.total).sum::<f64>() / periods,
                mean_normalized: mine.iter().map(|r| r.normalized).sum::<f64>() / periods,
                infeasible_periods: mine.iter().filter(|r| !r.feasible).count(),
            }
        })
        .collect();
    let mut savings = Vec::new();
    for a in &summaries {
        for b in &summaries {
            if a.method != b.method {
                savings.push(Saving {
                    method: a.method,
                    baseline: b.method,
                    percent: 100.0 * (1.0 - a.mean_total / b.mean_total),
                });
            }
        }
    }
    Ok(DailyResult {
        summary: DailySummary {
            periods: profiles.periods,
            mean_reference: reference.iter().sum::<f64>() / periods,
            methods: summaries,
            savings,
        },
        reference,
        rows,
    })
}

pub const DAILY_CSV_HEADER: [&str; 8] = [
    "period",
    "method",
    "feasible",
    "p_mbs",
    "p_sbs_total",
    "p_ho",
    "total",
    "normalized",
];

/// Writes one CSV row per (period, method).
pub fn write_daily_csv<W: Write>(result: &DailyResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DAILY_CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.period.to_string(),
            r.method.to_string(),
            r.feasible.to_string(),
            r.power.mbs.to_string(),
            r.power.sbs_total().to_string(),
            r.power.handover.to_string(),
            r.power.total.to_string(),
            r.normalized.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

//! Domain types and the base-station power primitives shared by every other
//! module. Units are SI throughout: W, Hz, J, m, users/m² and energy units per
//! second.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;

/// Relative slack allowed when inverting the power model, so that a rate
/// computed from a bandwidth maps back onto the same bandwidth range.
const INVERSE_SLACK: f64 = 1e-9;

/// Power model of one base station: `P = P_C + (w/W)·β·P_T` when active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsPowerParams<T> {
    /// Transmit power level (W).
    pub p_tx: T,
    /// Constant site power (W).
    pub p_const: T,
    /// Power amplifier coefficient (inverse efficiency).
    pub beta: T,
    /// System bandwidth available to this station (Hz).
    pub bandwidth: T,
}

/// Power classes from the EARTH model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerClass {
    Macro,
    Micro,
    Pico,
    Femto,
}

impl PowerClass {
    /// `(P_T, P_C, β)` for this class.
    pub fn coefficients(self) -> (f64, f64, f64) {
        match self {
            PowerClass::Macro => (20.0, 130.0, 4.7),
            PowerClass::Micro => (6.3, 56.0, 2.6),
            PowerClass::Pico => (0.13, 6.8, 4.0),
            PowerClass::Femto => (0.05, 4.8, 8.0),
        }
    }

    pub fn params<T: Real>(self, bandwidth: T) -> BsPowerParams<T> {
        let (p_tx, p_const, beta) = self.coefficients();
        BsPowerParams {
            p_tx: T::lit(p_tx),
            p_const: T::lit(p_const),
            beta: T::lit(beta),
            bandwidth,
        }
    }
}

impl<T: Real> BsPowerParams<T> {
    pub fn new(p_tx: T, p_const: T, beta: T, bandwidth: T) -> Result<Self> {
        for (what, v) in [
            ("p_tx", p_tx),
            ("p_const", p_const),
            ("beta", beta),
            ("bandwidth", bandwidth),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(domain(what, v.as_f64(), "must be positive and finite"));
            }
        }
        Ok(Self {
            p_tx,
            p_const,
            beta,
            bandwidth,
        })
    }

    /// RF power swing between idle and full bandwidth, `β·P_T`.
    pub fn rf_span(&self) -> T {
        self.beta * self.p_tx
    }

    /// Power drawn with the whole bandwidth in use.
    pub fn full_power(&self) -> T {
        self.p_const + self.rf_span()
    }

    /// Power per utilized hertz, `β·P_T/W`.
    pub fn rf_per_hz(&self) -> T {
        self.rf_span() / self.bandwidth
    }
}

/// Operating state of a base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BsState<T> {
    Sleep,
    Active { w_used: T },
}

/// Power of an active base station utilizing `w_used` Hz of its bandwidth.
pub fn bs_power<T: Real>(params: &BsPowerParams<T>, w_used: T) -> Result<T> {
    if !(w_used >= T::zero()) || w_used > params.bandwidth {
        return Err(domain(
            "w_used",
            w_used.as_f64(),
            "must lie in [0, bandwidth]",
        ));
    }
    Ok(params.p_const + w_used / params.bandwidth * params.rf_span())
}

/// Power in either state; sleep mode draws (approximately) nothing.
pub fn site_power<T: Real>(params: &BsPowerParams<T>, state: BsState<T>) -> Result<T> {
    match state {
        BsState::Sleep => Ok(T::zero()),
        BsState::Active { w_used } => bs_power(params, w_used),
    }
}

/// Battery units consumed per second when `w_ss` Hz are in use.
pub fn energy_service_rate<T: Real>(
    params: &BsPowerParams<T>,
    w_ss: T,
    energy_unit: T,
) -> Result<T> {
    if !(energy_unit > T::zero()) {
        return Err(domain(
            "energy_unit",
            energy_unit.as_f64(),
            "must be positive",
        ));
    }
    Ok(bs_power(params, w_ss)? / energy_unit)
}

/// Inverse of [`energy_service_rate`]: the utilized bandwidth sustained by an
/// energy consumption rate `mu_e`.
pub fn sbs_bandwidth_from_rate<T: Real>(
    mu_e: T,
    params: &BsPowerParams<T>,
    energy_unit: T,
) -> Result<T> {
    if !(energy_unit > T::zero()) {
        return Err(domain(
            "energy_unit",
            energy_unit.as_f64(),
            "must be positive",
        ));
    }
    let slack = T::lit(INVERSE_SLACK);
    let surplus = mu_e * energy_unit - params.p_const;
    if surplus < -slack * params.p_const || surplus.is_nan() {
        return Err(domain(
            "mu_e",
            mu_e.as_f64(),
            "mu_e * E must cover the constant power",
        ));
    }
    let w = surplus.max(T::zero()) * params.bandwidth / params.rf_span();
    if w > params.bandwidth * (T::one() + slack) {
        return Err(domain(
            "mu_e",
            mu_e.as_f64(),
            "implied bandwidth exceeds the system bandwidth",
        ));
    }
    Ok(w.min(params.bandwidth))
}

/// QoS target shared by all users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosConfig<T> {
    /// Per-user rate requirement `R_Q` (bit/s).
    pub rate_req: T,
    /// Maximum tolerated outage probability.
    pub eta: T,
}

/// Radio propagation and interference constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioEnv<T> {
    pub alpha_m: T,
    pub alpha_s: T,
    /// Interference-to-noise ratio seen by macro users.
    pub theta_m: T,
    /// Interference-to-noise ratio seen by small-cell users.
    pub theta_s: T,
    /// Noise power density σ² (W/Hz).
    pub noise_density: T,
}

/// Converts a noise density given in dBm/MHz to W/Hz.
pub fn noise_density_from_dbm_per_mhz(dbm_per_mhz: f64) -> f64 {
    10f64.powf((dbm_per_mhz - 30.0) / 10.0) / 1e6
}

/// Energy source of a small cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum CellKind {
    /// Grid powered only.
    Csbs,
    /// Renewable powered only; shuts down when the battery runs out.
    Rsbs,
    /// Renewable with grid backup.
    Hsbs,
}

impl CellKind {
    pub fn harvests(self) -> bool {
        !matches!(self, CellKind::Csbs)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::Csbs => "CSBS",
            CellKind::Rsbs => "RSBS",
            CellKind::Hsbs => "HSBS",
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallCellConfig<T> {
    pub id: String,
    pub kind: CellKind,
    /// Coverage radius `D_n` (m).
    pub radius: T,
    /// Distance between the macro and this small-cell station (m).
    pub dist_to_mbs: T,
    /// Direction of the station as seen from the macro station (rad).
    pub bearing: T,
    pub power: BsPowerParams<T>,
    /// Size of one battery unit `E` (J).
    pub energy_unit: T,
    /// Energy arrival rate `λ_E` (units/s). Zero for grid-only cells.
    pub energy_arrival: T,
    /// Energy spent on one handover (J). Only used by renewable-only cells.
    pub handover_cost: T,
    /// User density inside the cell (users/m²).
    pub user_density: T,
}

impl<T: Real> SmallCellConfig<T> {
    pub fn area(&self) -> T {
        T::PI() * self.radius * self.radius
    }

    /// Mean number of users in the cell, `ρ·π·D²`.
    pub fn mean_users(&self) -> T {
        self.user_density * self.area()
    }

    /// Harvested power `λ_E·E` (W).
    pub fn harvested_power(&self) -> T {
        self.energy_arrival * self.energy_unit
    }

    /// Station position with the macro station at the origin.
    pub fn center(&self) -> (T, T) {
        (
            self.dist_to_mbs * self.bearing.cos(),
            self.dist_to_mbs * self.bearing.sin(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroCell<T> {
    /// Coverage radius `D_0` (m).
    pub radius: T,
    pub power: BsPowerParams<T>,
}

/// A macro cell with its non-overlapping small cells. This is the single
/// input every optimisation routine works from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    #[serde(rename = "macro")]
    pub macro_cell: MacroCell<T>,
    pub env: RadioEnv<T>,
    pub qos: QosConfig<T>,
    pub cells: Vec<SmallCellConfig<T>>,
    /// User density outside the small cells (users/m²).
    pub rho0: T,
}

impl<T: Real> Scenario<T> {
    pub fn cell_index(&self, id: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.id == id)
    }

    /// Converts every field to another scalar type.
    pub fn cast<U: Real>(&self) -> Scenario<U> {
        let c = |x: T| U::lit(x.as_f64());
        let p = |b: &BsPowerParams<T>| BsPowerParams {
            p_tx: c(b.p_tx),
            p_const: c(b.p_const),
            beta: c(b.beta),
            bandwidth: c(b.bandwidth),
        };
        Scenario {
            macro_cell: MacroCell {
                radius: c(self.macro_cell.radius),
                power: p(&self.macro_cell.power),
            },
            env: RadioEnv {
                alpha_m: c(self.env.alpha_m),
                alpha_s: c(self.env.alpha_s),
                theta_m: c(self.env.theta_m),
                theta_s: c(self.env.theta_s),
                noise_density: c(self.env.noise_density),
            },
            qos: QosConfig {
                rate_req: c(self.qos.rate_req),
                eta: c(self.qos.eta),
            },
            cells: self
                .cells
                .iter()
                .map(|s| SmallCellConfig {
                    id: s.id.clone(),
                    kind: s.kind,
                    radius: c(s.radius),
                    dist_to_mbs: c(s.dist_to_mbs),
                    bearing: c(s.bearing),
                    power: p(&s.power),
                    energy_unit: c(s.energy_unit),
                    energy_arrival: c(s.energy_arrival),
                    handover_cost: c(s.handover_cost),
                    user_density: c(s.user_density),
                })
                .collect(),
            rho0: c(self.rho0),
        }
    }
}

/// Offload state of one small cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellOffload<T> {
    pub active: bool,
    /// Energy consumption rate `μ_E` (units/s); zero when inactive.
    pub mu_e: T,
    /// Offload ratio `φ`.
    pub phi: T,
    /// Bandwidth utilized by the small cell (Hz).
    pub w_ss: T,
    /// Macro bandwidth for this cell's macro-served users while the cell is up.
    pub w_ms_active: T,
    /// Macro bandwidth for the same users while the cell is down.
    pub w_ms_off: T,
}

/// Network-wide offload decision: per-cell state plus the bandwidth the
/// macro station spends on users outside every small cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffloadDecision<T> {
    pub cells: Vec<CellOffload<T>>,
    pub w_mm: T,
}

/// On-grid power by source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown<T> {
    /// Macro station, constant plus RF (W).
    pub mbs: T,
    /// On-grid power drawn by each small cell (W). Renewable-only cells draw
    /// none; their cost shows up as handover power.
    pub per_cell: Vec<T>,
    /// Handover power of renewable-only cells (W).
    pub handover: T,
    pub total: T,
}

impl<T: Real> PowerBreakdown<T> {
    pub fn from_parts(mbs: T, per_cell: Vec<T>, handover: T) -> Self {
        let mut total = mbs;
        for p in &per_cell {
            total = total + *p;
        }
        total = total + handover;
        Self {
            mbs,
            per_cell,
            handover,
            total,
        }
    }

    pub fn sbs_total(&self) -> T {
        self.per_cell.iter().fold(T::zero(), |acc, p| acc + *p)
    }
}

/// A violated scenario invariant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.constraint)
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn require(&mut self, ok: bool, field: impl Into<String>, constraint: impl Into<String>) {
        if !ok {
            self.0.push(Violation {
                field: field.into(),
                constraint: constraint.into(),
            });
        }
    }

    fn positive<T: Real>(&mut self, v: T, field: impl Into<String>) {
        self.require(v > T::zero() && v.is_finite(), field, "must be positive");
    }

    fn non_negative<T: Real>(&mut self, v: T, field: impl Into<String>) {
        self.require(
            v >= T::zero() && v.is_finite(),
            field,
            "must be non-negative",
        );
    }

    fn power<T: Real>(&mut self, p: &BsPowerParams<T>, prefix: &str) {
        self.positive(p.p_tx, format!("{prefix}.p_tx"));
        self.positive(p.p_const, format!("{prefix}.p_const"));
        self.positive(p.beta, format!("{prefix}.beta"));
        self.positive(p.bandwidth, format!("{prefix}.bandwidth"));
    }
}

/// Checks every scenario invariant. An empty list means the scenario is
/// usable; each entry names the offending field.
pub fn validate_scenario<T: Real>(s: &Scenario<T>) -> Vec<Violation> {
    let mut ck = Checker(Vec::new());
    let d0 = s.macro_cell.radius;
    ck.positive(d0, "macro.radius");
    ck.power(&s.macro_cell.power, "macro.power");

    ck.positive(s.qos.rate_req, "qos.rate_req");
    ck.require(
        s.qos.eta > T::zero() && s.qos.eta < T::one(),
        "qos.eta",
        "must lie in (0, 1)",
    );

    let two = T::two();
    ck.require(s.env.alpha_m > two, "env.alpha_m", "must exceed 2");
    ck.require(s.env.alpha_s > two, "env.alpha_s", "must exceed 2");
    ck.non_negative(s.env.theta_m, "env.theta_m");
    ck.non_negative(s.env.theta_s, "env.theta_s");
    ck.positive(s.env.noise_density, "env.noise_density");
    ck.non_negative(s.rho0, "rho0");

    let mut area_sum = T::zero();
    for (i, c) in s.cells.iter().enumerate() {
        let f = |name: &str| format!("cells[{i}].{name}");
        ck.positive(c.radius, f("radius"));
        ck.non_negative(c.dist_to_mbs, f("dist_to_mbs"));
        ck.require(c.bearing.is_finite(), f("bearing"), "must be finite");
        ck.power(&c.power, &f("power"));
        ck.positive(c.energy_unit, f("energy_unit"));
        ck.non_negative(c.energy_arrival, f("energy_arrival"));
        if c.kind == CellKind::Csbs {
            ck.require(
                c.energy_arrival == T::zero(),
                f("energy_arrival"),
                "must be zero for a grid-only cell",
            );
        }
        ck.non_negative(c.handover_cost, f("handover_cost"));
        ck.non_negative(c.user_density, f("user_density"));
        ck.require(
            c.dist_to_mbs + c.radius <= d0,
            f("dist_to_mbs"),
            "cell disc must lie inside the macro disc (dist_to_mbs + radius <= macro.radius)",
        );
        if s.cells[..i].iter().any(|o| o.id == c.id) {
            ck.require(false, f("id"), format!("duplicate id `{}`", c.id));
        }
        area_sum = area_sum + c.radius * c.radius;
    }
    ck.require(
        area_sum < d0 * d0,
        "cells",
        "sum of squared small-cell radii must stay below macro.radius^2",
    );

    for i in 0..s.cells.len() {
        for j in (i + 1)..s.cells.len() {
            let (a, b) = (&s.cells[i], &s.cells[j]);
            let (ax, ay) = a.center();
            let (bx, by) = b.center();
            let gap = (ax - bx).hypot(ay - by);
            // Touching discs are allowed; the tolerance absorbs trig rounding.
            let reach = (a.radius + b.radius) * (T::one() - T::lit(1e-9));
            ck.require(
                gap >= reach,
                format!("cells[{j}]"),
                format!("disc overlaps cells[{i}]"),
            );
        }
    }
    ck.0
}

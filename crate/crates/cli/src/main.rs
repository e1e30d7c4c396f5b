//! `offload`: outage validation, battery queue analysis, single-cell sweeps,
//! network planning and daily experiments from the command line.
//!
//! Exit codes: 0 success, 1 bad input, 2 a validation check failed,
//! 3 a requested plan is infeasible.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod values;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use offload_core::energy_queue::stationary_default;
use offload_core::model::{CellKind, Scenario};
use offload_core::montecarlo::{
    simulate_energy_queue, simulate_outage_msu, simulate_outage_ssu, SimConfig,
};
use offload_core::multi_cell::{reference_power, Method, NetworkPlan};
use offload_core::outage::{outage_msu_closed, outage_ssu_closed};
use offload_core::scenario::{
    daily_run, load_scenario, profiles_from_csv, synthetic_profiles, write_daily_csv,
    DailyProfiles, ProfileKind,
};
use offload_core::single_cell::{decide, greedy_gain, CellContext};
use offload_core::Error;

use values::parse_values;

/// Relative error allowed between simulated and closed-form outage.
const OUTAGE_TOLERANCE: f64 = 0.1;
/// Closed-form outage below which the tolerance applies.
const OUTAGE_CHECKED_BELOW: f64 = 0.1;
/// Allowed total-variation distance and level-probability error for the
/// battery simulation.
const QUEUE_TOLERANCE: f64 = 0.01;

#[derive(Parser)]
#[command(
    name = "offload",
    version,
    about = "Energy-aware traffic offloading planner"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Planning methods, comma separated.
    #[arg(long, global = true)]
    method: Option<String>,
    /// Monte Carlo trials.
    #[arg(long, global = true, default_value_t = 10_000)]
    trials: usize,
    /// Random seed for simulations.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path; `-` writes to standard output.
    #[arg(long, global = true, default_value = "-")]
    out: String,
    /// Structured JSON output instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Require an explicit seed for every simulation.
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compare closed-form outage probabilities with Monte Carlo.
    ValidateOutage(ValidateArgs),
    /// Stationary battery distribution, optionally checked by simulation.
    Queue(QueueArgs),
    /// Gain of one small cell over a parameter sweep.
    Single(SingleArgs),
    /// Plan the network with one or more methods.
    Plan,
    /// Run every method over a day of traffic and energy profiles.
    Daily(DailyArgs),
    /// Plan the network over a sweep of a scenario-wide parameter.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    /// Users served by the small cell.
    Ssu,
    /// Users inside the small cell but served by the macro station.
    Msu,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Target::Ssu)]
    target: Target,
    /// Cell id; defaults to the first cell.
    #[arg(long)]
    cell: Option<String>,
    /// Rate requirements (bit/s): `start:stop:step` or a comma list.
    #[arg(long)]
    rates: Option<String>,
    /// Bandwidth shared by the users (Hz).
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Offload ratio.
    #[arg(long)]
    phi: Option<f64>,
    /// Cell-to-macro distances for `--target msu` (m).
    #[arg(long)]
    d_ms: Option<String>,
}

#[derive(Args)]
struct QueueArgs {
    /// Energy arrival rate (units/s).
    #[arg(long)]
    lambda: f64,
    /// Energy consumption rate (units/s).
    #[arg(long)]
    mu: f64,
    /// Check against an event-driven simulation.
    #[arg(long)]
    simulate: bool,
    /// Simulated seconds.
    #[arg(long)]
    horizon: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CellParam {
    /// Energy arrival rate (units/s).
    Lambda,
    /// User density inside the cell (users/m²).
    Density,
    /// Handover cost (J).
    CHo,
}

#[derive(Args)]
struct SingleArgs {
    #[arg(long)]
    cell: String,
    #[arg(long, value_enum)]
    param: CellParam,
    /// `start:stop:step` or a comma list.
    #[arg(long)]
    values: String,
    /// Repeat the sweep for each handover cost in this list.
    #[arg(long)]
    c_ho: Option<String>,
}

#[derive(Args)]
struct DailyArgs {
    /// `sunny`, `cloudy`, `constant` or a CSV file; defaults to the
    /// scenario's own profiles.
    #[arg(long)]
    profile: Option<String>,
    /// Periods for a synthetic profile.
    #[arg(long)]
    periods: Option<usize>,
    /// Also write the summary JSON here.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NetworkParam {
    /// Macro user density (users/m²).
    Rho0,
    /// Rate requirement (bit/s).
    Rate,
    /// Factor on every user density.
    Traffic,
    /// Factor on every energy arrival rate.
    Energy,
    /// Handover cost of every renewable-only cell (J).
    CHo,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    param: NetworkParam,
    #[arg(long)]
    values: String,
}

enum Status {
    Ok,
    CheckFailed,
    Infeasible,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::CheckFailed) => ExitCode::from(2),
        Ok(Status::Infeasible) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Status> {
    let c = &cli.common;
    match &cli.command {
        Command::ValidateOutage(a) => validate_outage(c, a),
        Command::Queue(a) => queue(c, a),
        Command::Single(a) => single(c, a),
        Command::Plan => plan(c),
        Command::Daily(a) => daily(c, a),
        Command::Sweep(a) => sweep(c, a),
    }
}

fn scenario_path(c: &Common) -> Result<&Path> {
    c.scenario.as_deref().context("--scenario is required")
}

fn load(c: &Common) -> Result<(Scenario<f64>, DailyProfiles)> {
    let path = scenario_path(c)?;
    load_scenario(path).with_context(|| format!("loading {}", path.display()))
}

fn seed(c: &Common) -> Result<u64> {
    match (c.seed, c.strict) {
        (Some(s), _) => Ok(s),
        (None, false) => Ok(0),
        (None, true) => bail!("--strict requires --seed for simulations"),
    }
}

fn methods(c: &Common, default: &[Method]) -> Result<Vec<Method>> {
    let Some(list) = &c.method else {
        return Ok(default.to_vec());
    };
    let parsed = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Method>().map_err(anyhow::Error::msg))
        .collect::<Result<Vec<_>>>()?;
    if parsed.is_empty() {
        return Err(Error::NoMethods.into());
    }
    Ok(parsed)
}

fn output(c: &Common) -> Result<Box<dyn Write>> {
    if c.out == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let f = File::create(&c.out).with_context(|| format!("creating {}", c.out))?;
        Ok(Box::new(BufWriter::new(f)))
    }
}

fn write_json<T: Serialize>(c: &Common, value: &T) -> Result<()> {
    let mut w = output(c)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_csv<T: Serialize>(c: &Common, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(output(c)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn cell_index(s: &Scenario<f64>, id: Option<&str>) -> Result<usize> {
    match id {
        Some(id) => s
            .cell_index(id)
            .ok_or_else(|| Error::UnknownCell(id.to_string()).into()),
        None if s.cells.is_empty() => bail!("scenario has no small cells"),
        None => Ok(0),
    }
}

#[derive(Serialize)]
struct OutageRow {
    target: &'static str,
    d_ms: f64,
    rate_req: f64,
    closed_form: f64,
    monte_carlo: f64,
    empirical: f64,
    rel_error: f64,
    regime_violation: bool,
    checked: bool,
}

impl OutageRow {
    fn passes(&self) -> bool {
        !self.checked || self.rel_error < OUTAGE_TOLERANCE
    }
}

#[derive(Serialize)]
struct OutageReport<'a> {
    pass: bool,
    trials: usize,
    seed: u64,
    rows: &'a [OutageRow],
}

fn validate_outage(c: &Common, a: &ValidateArgs) -> Result<Status> {
    let (s, _) = load(c)?;
    let idx = cell_index(&s, a.cell.as_deref())?;
    let cfg = SimConfig::new(c.trials, seed(c)?);
    let row = |target,
               d_ms,
               rate_req,
               closed: offload_core::outage::ClosedOutage<f64>,
               mc: offload_core::montecarlo::OutageEstimate| {
        OutageRow {
            target,
            d_ms,
            rate_req,
            closed_form: closed.probability,
            monte_carlo: mc.conditional,
            empirical: mc.empirical,
            rel_error: (mc.conditional - closed.probability).abs() / closed.probability,
            regime_violation: closed.regime_violation,
            checked: closed.probability < OUTAGE_CHECKED_BELOW && !closed.regime_violation,
        }
    };

    let mut rows = Vec::new();
    match a.target {
        Target::Ssu => {
            let cell = &s.cells[idx];
            let w = a.bandwidth.unwrap_or(cell.power.bandwidth);
            let phi = a.phi.unwrap_or(1.0);
            for rate in parse_values(a.rates.as_deref().unwrap_or("50000:600000:50000"))? {
                let mut qos = s.qos;
                qos.rate_req = rate;
                let closed = outage_ssu_closed(cell, &s.env, &qos, w, phi)?;
                let mc = simulate_outage_ssu(cell, &s.env, &qos, w, phi, &cfg)?;
                rows.push(row("ssu", cell.dist_to_mbs, rate, closed, mc));
            }
        }
        Target::Msu => {
            let w = a.bandwidth.unwrap_or(3e6);
            let phi = a.phi.unwrap_or(0.0);
            let rates = parse_values(a.rates.as_deref().unwrap_or("10000:200000:10000"))?;
            for d in parse_values(a.d_ms.as_deref().unwrap_or("300,600,900"))? {
                let mut cell = s.cells[idx].clone();
                cell.dist_to_mbs = d;
                for &rate in &rates {
                    let mut t = s.clone();
                    t.qos.rate_req = rate;
                    let closed = outage_msu_closed(&cell, &t, w, phi)?;
                    let mc = simulate_outage_msu(&cell, &t, w, phi, &cfg)?;
                    rows.push(row("msu", d, rate, closed, mc));
                }
            }
        }
    }

    let pass = rows.iter().all(OutageRow::passes);
    if c.json {
        write_json(
            c,
            &OutageReport {
                pass,
                trials: cfg.trials,
                seed: cfg.seed,
                rows: &rows,
            },
        )?;
    } else {
        write_csv(c, &rows)?;
    }
    if !pass {
        for r in rows.iter().filter(|r| !r.passes()) {
            eprintln!(
                "outage mismatch: d_ms {} rate {}: closed {} vs simulated {} ({:.1}%)",
                r.d_ms,
                r.rate_req,
                r.closed_form,
                r.monte_carlo,
                100.0 * r.rel_error
            );
        }
    }
    Ok(if pass {
        Status::Ok
    } else {
        Status::CheckFailed
    })
}

#[derive(Serialize)]
struct QueueSummary {
    lambda: f64,
    mu: f64,
    rho: f64,
    q0: f64,
    q1: f64,
    mean_level: f64,
    simulated: Option<SimulatedQueue>,
    levels: Vec<QueueLevel>,
}

#[derive(Serialize)]
struct SimulatedQueue {
    seed: u64,
    q0: f64,
    q1: f64,
    total_variation: f64,
    shutdown_rate: f64,
    pass: bool,
}

#[derive(Serialize)]
struct QueueLevel {
    level: usize,
    analytic: f64,
    simulated: Option<f64>,
}

fn queue(c: &Common, a: &QueueArgs) -> Result<Status> {
    let an = stationary_default(a.lambda, a.mu)?;
    let sim = if a.simulate {
        let cfg = SimConfig {
            trials: 0,
            seed: seed(c)?,
            horizon: a.horizon,
        };
        Some((cfg.seed, simulate_energy_queue(a.lambda, a.mu, &cfg)?))
    } else {
        None
    };

    let n = an.q.len().max(sim.as_ref().map_or(0, |s| s.1.q.len()));
    let levels: Vec<QueueLevel> = (0..n)
        .map(|l| QueueLevel {
            level: l,
            analytic: an.q.get(l).copied().unwrap_or(0.0),
            simulated: sim.as_ref().map(|s| s.1.q.get(l).copied().unwrap_or(0.0)),
        })
        .collect();
    let simulated = sim.as_ref().map(|(seed, s)| {
        let tv = 0.5
            * levels
                .iter()
                .map(|l| (l.analytic - l.simulated.unwrap_or(0.0)).abs())
                .sum::<f64>();
        let q1 = s.q.get(1).copied().unwrap_or(0.0);
        SimulatedQueue {
            seed: *seed,
            q0: s.q[0],
            q1,
            total_variation: tv,
            shutdown_rate: s.shutdown_rate,
            pass: tv < QUEUE_TOLERANCE
                && (s.q[0] - an.q0).abs() < QUEUE_TOLERANCE
                && (q1 - an.q1).abs() < QUEUE_TOLERANCE,
        }
    });
    let pass = simulated.as_ref().is_none_or(|s| s.pass);
    let summary = QueueSummary {
        lambda: a.lambda,
        mu: a.mu,
        rho: an.rho,
        q0: an.q0,
        q1: an.q1,
        mean_level: an.mean_level(),
        simulated,
        levels,
    };
    if c.json {
        write_json(c, &summary)?;
    } else {
        write_csv(c, &summary.levels)?;
    }
    Ok(if pass {
        Status::Ok
    } else {
        Status::CheckFailed
    })
}

#[derive(Serialize)]
struct SingleRow {
    param: &'static str,
    value: f64,
    c_ho: f64,
    gain_optimal: f64,
    gain_greedy: f64,
    mu_opt: f64,
    active: bool,
}

fn single(c: &Common, a: &SingleArgs) -> Result<Status> {
    let (s, _) = load(c)?;
    let idx = cell_index(&s, Some(&a.cell))?;
    if a.param == CellParam::Lambda && s.cells[idx].kind == CellKind::Csbs {
        bail!("cell `{}` is grid-only and harvests no energy", a.cell);
    }
    let values = parse_values(&a.values)?;
    let costs = match &a.c_ho {
        Some(list) => parse_values(list)?,
        None => vec![s.cells[idx].handover_cost],
    };
    let (name, apply): (&'static str, fn(&mut offload_core::SmallCellConfig, f64)) = match a.param {
        CellParam::Lambda => ("lambda", |c, v| c.energy_arrival = v),
        CellParam::Density => ("density", |c, v| c.user_density = v),
        CellParam::CHo => ("c_ho", |c, v| c.handover_cost = v),
    };

    let mut rows = Vec::new();
    for &c_ho in &costs {
        for &v in &values {
            let mut t = s.clone();
            t.cells[idx].handover_cost = c_ho;
            apply(&mut t.cells[idx], v);
            let ctx = CellContext::new(&t, idx)?;
            let d = decide(&ctx, false);
            rows.push(SingleRow {
                param: name,
                value: v,
                c_ho: t.cells[idx].handover_cost,
                gain_optimal: if d.active { d.gain } else { 0.0 },
                gain_greedy: greedy_gain(&ctx),
                mu_opt: if d.active { d.mu_e } else { 0.0 },
                active: d.active,
            });
        }
    }
    if c.json {
        write_json(c, &rows)?;
    } else {
        write_csv(c, &rows)?;
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct PlanRow {
    method: Method,
    feasible: bool,
    w_m_max: f64,
    active_cells: usize,
    p_mbs: f64,
    p_sbs_total: f64,
    p_ho: f64,
    total: f64,
    normalized: f64,
}

fn plan(c: &Common) -> Result<Status> {
    let (s, _) = load(c)?;
    let methods = methods(c, &[Method::Teato])?;
    let plans = methods
        .iter()
        .map(|m| m.plan(&s))
        .collect::<offload_core::Result<Vec<NetworkPlan<f64>>>>()?;
    let reference = reference_power(&s)?.total;
    if c.json {
        if let [only] = plans.as_slice() {
            write_json(c, only)?;
        } else {
            write_json(c, &plans)?;
        }
    } else {
        let rows: Vec<PlanRow> = plans
            .iter()
            .map(|p| PlanRow {
                method: p.method,
                feasible: p.feasible,
                w_m_max: p.w_m_max,
                active_cells: p.active_count(),
                p_mbs: p.power.mbs,
                p_sbs_total: p.power.sbs_total(),
                p_ho: p.power.handover,
                total: p.power.total,
                normalized: p.power.total / reference,
            })
            .collect();
        write_csv(c, &rows)?;
    }
    Ok(if plans.iter().all(|p| p.feasible) {
        Status::Ok
    } else {
        Status::Infeasible
    })
}

const DAILY_DEFAULT: [Method; 3] = [Method::Teato, Method::GreedySleep, Method::GreedyNoSleep];

fn daily(c: &Common, a: &DailyArgs) -> Result<Status> {
    let (s, own) = load(c)?;
    let profiles = match a.profile.as_deref() {
        None => {
            if a.periods.is_some() {
                bail!("--periods needs a synthetic --profile (sunny, cloudy or constant)");
            }
            own
        }
        Some(p) => match p.parse::<ProfileKind>() {
            Ok(kind) => synthetic_profiles(kind, a.periods.unwrap_or(own.periods))?,
            Err(_) if Path::new(p).is_file() => {
                if a.periods.is_some() {
                    bail!("--periods cannot be combined with a profile file");
                }
                profiles_from_csv(Path::new(p))?
            }
            Err(msg) => bail!("{msg}, and no file named `{p}` exists"),
        },
    };
    let methods = methods(c, &DAILY_DEFAULT)?;
    let result = daily_run(&s, &profiles, &methods)?;

    if c.json {
        write_json(c, &result)?;
    } else {
        let mut w = output(c)?;
        write_daily_csv(&result, &mut w)?;
        w.flush()?;
    }
    if let Some(path) = &a.summary {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(f);
        serde_json::to_writer_pretty(&mut w, &result.summary)?;
        writeln!(w)?;
        w.flush()?;
    }
    for m in &result.summary.methods {
        eprintln!(
            "{}: mean {:.2} W, normalized {:.4}, infeasible periods {}",
            m.method, m.mean_total, m.mean_normalized, m.infeasible_periods
        );
    }
    for sv in &result.summary.savings {
        if sv.method == methods[0] {
            eprintln!("{} saves {:.1}% vs {}", sv.method, sv.percent, sv.baseline);
        }
    }
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct SweepRow {
    param: &'static str,
    value: f64,
    method: Method,
    feasible: bool,
    p_mbs: f64,
    p_sbs_total: f64,
    p_ho: f64,
    total: f64,
    normalized: f64,
}

fn sweep(c: &Common, a: &SweepArgs) -> Result<Status> {
    let (s, _) = load(c)?;
    let methods = methods(c, &DAILY_DEFAULT)?;
    let name = match a.param {
        NetworkParam::Rho0 => "rho0",
        NetworkParam::Rate => "rate",
        NetworkParam::Traffic => "traffic",
        NetworkParam::Energy => "energy",
        NetworkParam::CHo => "c_ho",
    };
    let mut rows = Vec::new();
    for v in parse_values(&a.values)? {
        let mut t = s.clone();
        match a.param {
            NetworkParam::Rho0 => t.rho0 = v,
            NetworkParam::Rate => t.qos.rate_req = v,
            NetworkParam::Traffic => {
                t.rho0 *= v;
                for cell in &mut t.cells {
                    cell.user_density *= v;
                }
            }
            NetworkParam::Energy => {
                for cell in t.cells.iter_mut().filter(|c| c.kind.harvests()) {
                    cell.energy_arrival *= v;
                }
            }
            NetworkParam::CHo => {
                for cell in t.cells.iter_mut().filter(|c| c.kind == CellKind::Rsbs) {
                    cell.handover_cost = v;
                }
            }
        }
        let reference = reference_power(&t)?.total;
        for &m in &methods {
            let p = m.plan(&t)?;
            rows.push(SweepRow {
                param: name,
                value: v,
                method: m,
                feasible: p.feasible,
                p_mbs: p.power.mbs,
                p_sbs_total: p.power.sbs_total(),
                p_ho: p.power.handover,
                total: p.power.total,
                normalized: p.power.total / reference,
            });
        }
    }
    if c.json {
        write_json(c, &rows)?;
    } else {
        write_csv(c, &rows)?;
    }
    Ok(Status::Ok)
}

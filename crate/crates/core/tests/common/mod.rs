#![allow(dead_code)]

pub mod oracle;

use offload_core::model::{
    noise_density_from_dbm_per_mhz, validate_scenario, CellKind, MacroCell, PowerClass, QosConfig,
    RadioEnv, Scenario, SmallCellConfig,
};
use rand::Rng;

pub const KM2: f64 = 1e-6;

pub fn env(theta_s: f64) -> RadioEnv<f64> {
    RadioEnv {
        alpha_m: 3.5,
        alpha_s: 4.0,
        theta_m: 1000.0,
        theta_s,
        noise_density: noise_density_from_dbm_per_mhz(-105.0),
    }
}

pub fn cell(kind: CellKind, dist: f64, bearing: f64) -> SmallCellConfig<f64> {
    SmallCellConfig {
        id: String::new(),
        kind,
        radius: 300.0,
        dist_to_mbs: dist,
        bearing,
        power: PowerClass::Micro.params(5e6),
        energy_unit: 1.0,
        energy_arrival: 0.0,
        handover_cost: 0.0,
        user_density: 140.0 * KM2,
    }
}

/// Macro cell with the given small cells, spread evenly in bearing.
pub fn scenario(mut cells: Vec<SmallCellConfig<f64>>, rho0: f64, rate: f64) -> Scenario<f64> {
    let n = cells.len();
    for (i, c) in cells.iter_mut().enumerate() {
        c.id = format!("c{i}");
        c.bearing = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
    }
    Scenario {
        macro_cell: MacroCell {
            radius: 1000.0,
            power: PowerClass::Macro.params(10e6),
        },
        env: env(2000.0),
        qos: QosConfig {
            rate_req: rate,
            eta: 0.05,
        },
        cells,
        rho0,
    }
}

/// One small cell of the given kind in an otherwise empty macro cell.
pub fn single(kind: CellKind, lambda: f64, density: f64, c_ho: f64) -> Scenario<f64> {
    let mut c = cell(kind, 600.0, 0.0);
    if kind.harvests() {
        c.energy_arrival = lambda;
    }
    c.handover_cost = c_ho;
    c.user_density = density;
    scenario(vec![c], 10.0 * KM2, 1e5)
}

pub fn random_kind<R: Rng>(rng: &mut R) -> CellKind {
    match rng.random_range(0..3) {
        0 => CellKind::Csbs,
        1 => CellKind::Rsbs,
        _ => CellKind::Hsbs,
    }
}

/// A random single-cell scenario of the given kind, drawn from a region
/// where the cell can serve at least one user.
pub fn random_single<R: Rng>(rng: &mut R, kind: CellKind) -> Scenario<f64> {
    let mut c = cell(kind, rng.random_range(450.0..700.0), 0.0);
    c.radius = rng.random_range(150.0..300.0);
    c.energy_unit = rng.random_range(0.5..3.0);
    if kind.harvests() {
        c.energy_arrival = rng.random_range(1.0..300.0) / c.energy_unit;
    }
    c.handover_cost = if kind == CellKind::Rsbs {
        rng.random_range(0.0..6.0)
    } else {
        0.0
    };
    c.user_density = rng.random_range(20.0..400.0) * KM2;
    scenario(
        vec![c],
        rng.random_range(2.0..40.0) * KM2,
        rng.random_range(5e4..3e5),
    )
}

/// A random valid scenario with one to `max_cells` small cells.
pub fn random_network<R: Rng>(rng: &mut R, max_cells: usize) -> Scenario<f64> {
    loop {
        let n = rng.random_range(1..=max_cells);
        let cells = (0..n)
            .map(|_| {
                let kind = random_kind(rng);
                let mut c = cell(kind, rng.random_range(550.0..700.0), 0.0);
                c.radius = rng.random_range(200.0..300.0);
                if kind.harvests() {
                    c.energy_arrival = rng.random_range(0.0..400.0);
                }
                c.handover_cost = rng.random_range(0.0..4.0);
                c.user_density = rng.random_range(5.0..60.0) * KM2;
                c
            })
            .collect();
        let s = scenario(
            cells,
            rng.random_range(3.0..30.0) * KM2,
            rng.random_range(5e4..2e5),
        );
        if validate_scenario(&s).is_empty() {
            return s;
        }
    }
}

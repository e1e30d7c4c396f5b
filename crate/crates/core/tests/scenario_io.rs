use std::fs;
use std::path::{Path, PathBuf};

use offload_core::model::{noise_density_from_dbm_per_mhz, CellKind};
use offload_core::scenario::{
    load_scenario, parse_scenario, profiles_from_csv, synthetic_profiles, ProfileKind,
};
use offload_core::Error;

fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn parse(text: &str) -> offload_core::Result<offload_core::Scenario> {
    parse_scenario(text, Path::new(".")).map(|(s, _)| s)
}

#[test]
fn shipped_scenarios_load() {
    let mut n = 0;
    for entry in fs::read_dir(scenarios_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "json") {
            load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 4);
}

#[test]
fn defaults_fill_in_the_reference_deployment() {
    let s = parse(r#"{ "rho0": 1e-5, "cells": [ { "kind": "CSBS", "dist_to_mbs": 600 }, { "kind": "HSBS", "dist_to_mbs": 600, "energy_arrival": 3 } ] }"#)
        .unwrap();
    assert_eq!(s.macro_cell.radius, 1000.0);
    assert_eq!(s.macro_cell.power.bandwidth, 10e6);
    assert_eq!(s.macro_cell.power.p_tx, 20.0);
    assert_eq!(s.env.alpha_m, 3.5);
    assert_eq!(s.env.theta_s, 500.0);
    assert_eq!(s.env.noise_density, noise_density_from_dbm_per_mhz(-105.0));
    assert_eq!(s.qos.rate_req, 3e5);
    assert_eq!(s.qos.eta, 0.05);
    let c = &s.cells[1];
    assert_eq!(c.id, "cell1");
    assert_eq!(c.radius, 300.0);
    assert_eq!(c.power.p_const, 56.0);
    assert_eq!(c.power.bandwidth, 5e6);
    assert_eq!(c.user_density, 2e-5);
    assert!((c.bearing - std::f64::consts::PI).abs() < 1e-12);
    assert_eq!(c.kind, CellKind::Hsbs);
}

#[test]
fn explicit_power_and_noise_density() {
    let s = parse(
        r#"{ "rho0": 1e-5, "env": { "noise_density": 1e-20 },
             "cells": [ { "kind": "CSBS", "dist_to_mbs": 600, "bearing_deg": 90,
                          "power": { "p_tx": 1.0, "p_const": 10.0, "beta": 3.0 }, "bandwidth": 2e6 } ] }"#,
    )
    .unwrap();
    assert_eq!(s.env.noise_density, 1e-20);
    assert_eq!(s.cells[0].power.p_tx, 1.0);
    assert_eq!(s.cells[0].power.bandwidth, 2e6);
    assert!((s.cells[0].bearing - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn errors_name_the_offending_field() {
    match parse(r#"{ "rho0": 1e-5, "cells": [ { "kind": "CSBS", "dist_to_mbs": "far" } ] }"#) {
        Err(Error::Parse { path, .. }) => assert_eq!(path, "cells[0].dist_to_mbs"),
        other => panic!("{other:?}"),
    }
    match parse(r#"{ "rho0": 1e-5, "qos": { "rate": 1 } }"#) {
        Err(Error::Parse { path, message }) => {
            assert_eq!(path, "qos.rate");
            assert!(message.contains("rate"));
        }
        other => panic!("{other:?}"),
    }
    match parse(r#"{ "rho0": 1e-5, "cells": [ { "kind": "XSBS", "dist_to_mbs": 1 } ] }"#) {
        Err(Error::Parse { path, .. }) => assert_eq!(path, "cells[0].kind"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        parse(r#"{ "cells": [] }"#),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(
        parse(r#"{ "rho0": 1e-5, "env": { "noise_density": 1e-20, "noise_dbm_per_mhz": -105 } }"#),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn invariant_violations_are_listed() {
    let err = parse(
        r#"{ "rho0": 1e-5, "cells": [
              { "kind": "CSBS", "dist_to_mbs": 900, "energy_arrival": 2 },
              { "kind": "CSBS", "dist_to_mbs": 900, "bearing_deg": 0 } ] }"#,
    )
    .unwrap_err();
    let Error::Invalid(v) = err else {
        panic!("{err:?}")
    };
    let fields: Vec<&str> = v.iter().map(|x| x.field.as_str()).collect();
    assert!(fields.contains(&"cells[0].energy_arrival"), "{fields:?}");
    assert!(
        fields
            .iter()
            .any(|f| f.starts_with("cells[0]") && f.contains("dist_to_mbs")),
        "{fields:?}"
    );
}

#[test]
fn profiles_from_csv_normalize_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("day.csv");
    fs::write(&p, "period,traffic,energy\n1,50,0\n0,100,20\n2,25,40\n").unwrap();
    let prof = profiles_from_csv(&p).unwrap();
    assert_eq!(prof.periods, 3);
    assert_eq!(prof.traffic_shape, vec![1.0, 0.5, 0.25]);
    assert_eq!(prof.energy_shape, vec![0.5, 0.0, 1.0]);

    let bad = [
        "period,traffic,energy\n0,1,1\n0,1,1\n",
        "period,traffic,energy\n0,1,1\n2,1,1\n",
        "period,traffic,energy\n0,0,1\n1,0,1\n",
        "period,traffic,energy\n0,-1,1\n",
        "period,load,energy\n0,1,1\n",
        "period,traffic,energy\n",
    ];
    for text in bad {
        fs::write(&p, text).unwrap();
        assert!(profiles_from_csv(&p).is_err(), "{text:?}");
    }
}

#[test]
fn scenario_can_point_at_a_profile_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("day.csv"),
        "period,traffic,energy\n0,1,0\n1,2,1\n2,4,2\n3,2,1\n",
    )
    .unwrap();
    let path = dir.path().join("s.json");
    fs::write(
        &path,
        r#"{ "rho0": 1e-5, "cells": [ { "kind": "RSBS", "dist_to_mbs": 600, "energy_arrival": 10 } ],
             "profiles": { "csv": "day.csv", "energy_peak": 80 } }"#,
    )
    .unwrap();
    let (s, prof) = load_scenario(&path).unwrap();
    assert_eq!(prof.periods, 4);
    assert_eq!(prof.energy_peak, Some(80.0));
    let peak = prof.scenario_at(&s, 2);
    assert_eq!(peak.cells[0].energy_arrival, 80.0);
    assert_eq!(peak.rho0, 1e-5);
    let night = prof.scenario_at(&s, 0);
    assert_eq!(night.cells[0].energy_arrival, 0.0);
    assert_eq!(night.cells[0].user_density, 0.25 * 2e-5);
}

#[test]
fn synthetic_profile_peaks() {
    let sunny = synthetic_profiles(ProfileKind::Sunny, 24).unwrap();
    let cloudy = synthetic_profiles(ProfileKind::Cloudy, 24).unwrap();
    assert_eq!(sunny.energy_peak, Some(500.0));
    assert_eq!(cloudy.energy_peak, Some(50.0));
    let (argmin, _) =
        sunny
            .traffic_shape
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |a, (i, &v)| if v < a.1 { (i, v) } else { a },
            );
    assert_eq!(argmin, 4);
    assert!(sunny.energy_shape[..6].iter().all(|&e| e == 0.0));
    assert!(sunny.energy_shape[20..].iter().all(|&e| e == 0.0));
}

//! Forward subcommands: guided modes, plane-wave coefficients, singularity
//! maps and the parametrix.

use crate::config::RunConfig;
use crate::output::{num, Artifacts};
use crate::CliError;
use serde_json::{json, Value};
use stratscat_core::geometry::{critical_omega_n, dot, map_reflect, map_transmit, normalize, Direction, Vec3};
use stratscat_core::parametrix::{assemble_parametrix, residual_decay_check, BranchTag};
use stratscat_core::spectral1d::{guided_modes, solve_phi_plus, thresholds, Regime};

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

pub fn modes(cfg: &RunConfig, out: &mut Artifacts, kappa: f64, sweep: usize) -> Result<Value, CliError> {
    if !(kappa > 0.0) {
        return Err(CliError::ConfigInvalid(format!("kappa must be positive, got {kappa}")));
    }
    let profile = cfg.profile()?;
    let spec = guided_modes(&profile, kappa).map_err(numerical)?;
    let th = thresholds(&profile, cfg.lambda).map_err(numerical)?;
    let table = json!({
        "kappa": kappa,
        "eigenvalues": spec.eigenvalues,
        "thresholds": th.values,
        "cutoffs": th.cutoffs,
        "lambda": cfg.lambda,
    });
    out.json("modes.json", &table)?;
    let mut rows = Vec::new();
    for i in 1..=sweep {
        let k = kappa * i as f64 / sweep as f64;
        let s = guided_modes(&profile, k).map_err(numerical)?;
        for (j, ev) in s.eigenvalues.iter().enumerate() {
            rows.push(vec![num(k), j.to_string(), num(ev.sqrt())]);
        }
    }
    out.csv("dispersion.csv", &["kappa", "j", "lambda_j"], &rows)?;
    Ok(json!({ "mode_count": spec.eigenvalues.len() }))
}

pub fn coeffs(cfg: &RunConfig, out: &mut Artifacts, omega_n: Option<f64>, samples: usize) -> Result<Value, CliError> {
    let profile = cfg.profile()?;
    let d = cfg.numerics.delta_crit;
    let grid: Vec<f64> = match omega_n {
        Some(w) => vec![w],
        None => (1..=samples).map(|i| d + (1.0 - d) * i as f64 / samples as f64).collect(),
    };
    let mut rows = Vec::new();
    let mut skipped = 0usize;
    for w in grid {
        match solve_phi_plus(&profile, cfg.lambda, w, d) {
            Ok(sol) => {
                let c = sol.coefficients;
                let regime = match c.regime {
                    Regime::Propagating => "propagating",
                    Regime::Evanescent => "evanescent",
                };
                rows.push(vec![num(w), num(c.r.re), num(c.r.im), num(c.t.re), num(c.t.im), regime.to_string()]);
            }
            Err(e) if omega_n.is_some() => return Err(numerical(e)),
            Err(_) => skipped += 1,
        }
    }
    out.csv("coefficients.csv", &["omega_n", "re_R", "im_R", "re_T", "im_T", "regime"], &rows)?;
    Ok(json!({ "rows": rows.len(), "skipped_in_bands": skipped, "critical_omega_n": critical_omega_n(&profile) }))
}

pub fn maps(cfg: &RunConfig, out: &mut Artifacts, omega_n: f64, azimuth: f64) -> Result<Value, CliError> {
    if !(-1.0..=1.0).contains(&omega_n) {
        return Err(CliError::ConfigInvalid(format!("omega_n = {omega_n} outside [-1, 1]")));
    }
    let profile = cfg.profile()?;
    let bar = (1.0 - omega_n * omega_n).max(0.0).sqrt();
    let omega = Direction([bar * azimuth.cos(), bar * azimuth.sin(), omega_n]);
    let d = cfg.numerics.delta_crit;
    let show = |r: Result<Direction, stratscat_core::geometry::GeometryError>| match r {
        Ok(v) => json!(v.0),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let doc = json!({
        "omega": omega.0,
        "reflect": show(map_reflect(omega, d)),
        "transmit": show(map_transmit(omega, &profile, d)),
        "antipodal": omega.neg().0,
        "critical_omega_n": critical_omega_n(&profile),
    });
    out.json("maps.json", &doc)?;
    println!("{}", serde_json::to_string(&doc).map_err(numerical)?);
    Ok(json!({}))
}

pub fn parse_vec3(s: &str) -> Result<Vec3, CliError> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::ConfigInvalid(format!("direction {s:?}: {e}")))?;
    if parts.len() != 3 || dot([parts[0], parts[1], parts[2]], [parts[0], parts[1], parts[2]]) == 0.0 {
        return Err(CliError::ConfigInvalid(format!("direction {s:?} must have three components, not all zero")));
    }
    Ok(normalize([parts[0], parts[1], parts[2]]))
}

pub fn parametrix(cfg: &RunConfig, out: &mut Artifacts, omega: Vec3, order: usize) -> Result<Value, CliError> {
    let profile = cfg.profile()?;
    let pert = cfg.perturbation()?;
    let pc = cfg.parametrix();
    let par = assemble_parametrix(&profile, &pert, cfg.lambda, Direction(omega), order, &pc).map_err(numerical)?;
    let mut tags = Vec::new();
    for br in &par.branches {
        let tag = match br.tag {
            BranchTag::I => "I",
            BranchTag::R => "R",
            BranchTag::T => "T",
        };
        tags.push(tag);
        for amp in &br.amplitudes {
            let rows: Vec<Vec<String>> = br
                .grid
                .nodes()
                .iter()
                .zip(&amp.values)
                .map(|((s, th), b)| vec![num(*s), num(*th), num(b.re), num(b.im)])
                .collect();
            out.csv(&format!("amplitudes/{tag}_m{}.csv", amp.m), &["s", "theta_tilde", "re_b", "im_b"], &rows)?;
        }
    }
    // Sample directions away from the excluded disks and bands.
    let margin = 2.0 * pc.delta_ant;
    let directions: Vec<Vec3> = [(0.5, 2.0), (0.9, 0.4), (1.2, 3.5), (0.3, 4.8), (1.0, 5.6), (2.2, 1.1), (2.6, 3.9)]
        .iter()
        .map(|&(polar, az)| Direction::from_angles(polar, az).0)
        .filter(|d| d[2].abs() > 2.0 * cfg.numerics.delta_eq)
        .filter(|d| par.excluded.iter().all(|c| dot(*d, *c).clamp(-1.0, 1.0).acos() > margin))
        .collect();
    let radii: Vec<f64> = (0..5).map(|i| 10f64.powf(2.0 + 0.5 * i as f64)).collect();
    let fit = residual_decay_check(&par, &radii, &directions).map_err(numerical)?;
    let doc = json!({
        "lambda": cfg.lambda,
        "omega": omega,
        "orders": par.orders,
        "leading_order": par.leading_order,
        "branches": tags,
        "excluded_disks": par.excluded,
        "delta_ant": pc.delta_ant,
        "decay_fit": {
            "radii": radii,
            "directions": directions,
            "slopes": fit.slopes,
            "worst": fit.worst,
            "mean": fit.mean,
            "floor": fit.floor,
        },
    });
    out.json("parametrix.json", &doc)?;
    Ok(json!({ "orders": par.orders, "worst_slope": fit.worst }))
}

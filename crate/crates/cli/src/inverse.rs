//! Inverse subcommands: layer stripping from symbol files, 1D Marchenko
//! inversion and synthesize-then-recover round trips.

use crate::config::RunConfig;
use crate::output::{num, Artifacts};
use crate::CliError;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::Path;
use stratscat_core::inverse::{
    layer_strip, marchenko_invert_1d, schrodinger_reflection, synthesize_symbols, BoundState, ScatteringSymbolData, StripConfig,
    StripReport, SymbolMode,
};
use stratscat_core::media::{Hemisphere, Layer, MediumDocument, PerturbationExpansion, StratifiedProfile};
use stratscat_core::sphharm::HarmonicTable;

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolGrid {
    pub band_limit: usize,
    pub n_alpha: usize,
    pub lambda: f64,
    pub delta_eq: f64,
    pub delta_crit: f64,
}

/// One order of symbol data as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub order: usize,
    pub grid: SymbolGrid,
    pub values_re: Vec<Vec<f64>>,
    pub values_im: Vec<Vec<f64>>,
    pub prefactor_tag: String,
    #[serde(default = "unit_calibration")]
    pub calibration: [f64; 2],
}

fn unit_calibration() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolFile {
    pub symbols: Vec<SymbolRecord>,
}

impl SymbolRecord {
    pub fn from_data(d: &ScatteringSymbolData) -> Self {
        Self {
            order: d.order,
            grid: SymbolGrid {
                band_limit: d.config.band_limit,
                n_alpha: d.config.n_alpha,
                lambda: d.config.lambda,
                delta_eq: d.config.delta_eq,
                delta_crit: d.config.delta_crit,
            },
            values_re: d.values.iter().map(|r| r.iter().map(|v| v.re).collect()).collect(),
            values_im: d.values.iter().map(|r| r.iter().map(|v| v.im).collect()).collect(),
            prefactor_tag: d.prefactor_tag.clone(),
            calibration: [d.calibration.re, d.calibration.im],
        }
    }
}

pub fn parse_mode(s: &str) -> Result<SymbolMode, CliError> {
    match s {
        "transmitted" => Ok(SymbolMode::Transmitted),
        "reflected" => Ok(SymbolMode::Reflected),
        _ => Err(CliError::ConfigInvalid(format!("mode {s:?} must be transmitted or reflected"))),
    }
}

pub fn parse_orders(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::ConfigInvalid(format!("orders {s:?} must look like J..L"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let (j, l) = (a.trim().parse::<usize>().map_err(|_| bad())?, b.trim().parse::<usize>().map_err(|_| bad())?);
    if j < 2 || l < j {
        return Err(bad());
    }
    Ok((j, l))
}

/// Rebuilds symbol data with prefactors and masks from the background.
fn to_data(rec: &SymbolRecord, profile: &StratifiedProfile, mode: SymbolMode, tol: f64) -> Result<ScatteringSymbolData, CliError> {
    let expected = match mode {
        SymbolMode::Transmitted => "T+",
        SymbolMode::Reflected => "R+",
    };
    if rec.prefactor_tag != expected {
        return Err(CliError::ConfigInvalid(format!("order {} carries prefactor {} but mode needs {expected}", rec.order, rec.prefactor_tag)));
    }
    let g = &rec.grid;
    let cfg = StripConfig { lambda: g.lambda, band_limit: g.band_limit, n_alpha: g.n_alpha, delta_eq: g.delta_eq, delta_crit: g.delta_crit, residual_tol: tol };
    let mut d = synthesize_symbols(profile, &PerturbationExpansion::new(rec.order, 1.0), rec.order, mode, &cfg).map_err(numerical)?;
    if rec.values_re.len() != d.values.len() || rec.values_re.iter().zip(&d.values).any(|(a, b)| a.len() != b.len()) {
        return Err(CliError::ConfigInvalid(format!("order {}: symbol array shape does not match its grid", rec.order)));
    }
    d.values = rec
        .values_re
        .iter()
        .zip(&rec.values_im)
        .map(|(re, im)| re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect())
        .collect();
    d.calibration = Complex64::new(rec.calibration[0], rec.calibration[1]);
    Ok(d)
}

fn write_recovery(out: &mut Artifacts, rep: &StripReport, profile: &StratifiedProfile) -> Result<(), CliError> {
    let table = |l: &stratscat_core::inverse::AngularLayer| json!({ "order": l.order, "band_limit": l.table.band_limit, "coeffs": l.table.coeffs });
    out.json(
        "layers.json",
        &json!({
            "mode": rep.mode,
            "gammas": rep.gammas.iter().map(table).collect::<Vec<_>>(),
            "w_layers": rep.layers.iter().map(table).collect::<Vec<_>>(),
            "residuals": rep.residuals,
            "halted_at": rep.halted_at,
        }),
    )?;
    out.json("recovered_medium.json", &MediumDocument::from_parts(profile, &rep.expansion(10.0 * profile.y_m())))?;
    for g in &rep.gammas {
        let mut rows = Vec::new();
        for i in 0..=18 {
            for j in 0..36 {
                let (polar, az) = (std::f64::consts::PI * i as f64 / 18.0, std::f64::consts::PI * j as f64 / 18.0);
                let p = [polar.sin() * az.cos(), polar.sin() * az.sin(), polar.cos()];
                rows.push(vec![num(polar), num(az), num(g.table.eval(p))]);
            }
        }
        out.csv(&format!("layer_{}.csv", g.order), &["polar", "azimuth", "gamma"], &rows)?;
    }
    let rows: Vec<Vec<String>> = rep.residuals.iter().map(|(k, r)| vec![k.to_string(), num(*r)]).collect();
    out.csv("residuals.csv", &["order", "residual"], &rows)
}

pub fn recover(cfg: &RunConfig, out: &mut Artifacts, symbols: &Path, mode: SymbolMode, orders: (usize, usize)) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(symbols).map_err(|e| CliError::Io(format!("{}: {e}", symbols.display())))?;
    let file: SymbolFile = serde_json::from_str(&text).map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", symbols.display())))?;
    let profile = cfg.profile()?;
    let mut recs: Vec<&SymbolRecord> = file.symbols.iter().filter(|r| r.order >= orders.0 && r.order <= orders.1).collect();
    recs.sort_by_key(|r| r.order);
    if recs.is_empty() {
        return Err(CliError::ConfigInvalid(format!("no symbol orders in {}..{}", orders.0, orders.1)));
    }
    let data: Vec<ScatteringSymbolData> = recs.iter().map(|r| to_data(r, &profile, mode, cfg.numerics.residual_tol)).collect::<Result<_, _>>()?;
    let rep = layer_strip(&data, &profile).map_err(numerical)?;
    write_recovery(out, &rep, &profile)?;
    Ok(json!({ "orders": rep.residuals.iter().map(|r| r.0).collect::<Vec<_>>(), "halted_at": rep.halted_at }))
}

fn planted_table(rng: &mut ChaCha8Rng, band_limit: usize, scale: f64, mode: SymbolMode) -> HarmonicTable {
    let mut t = HarmonicTable::zeros(band_limit);
    for l in 0..=band_limit {
        for m in -(l as i64)..=(l as i64) {
            let v = scale * rng.gen_range(-1.0..1.0) / (1.0 + l as f64);
            if mode == SymbolMode::Transmitted || (l as i64 + m) % 2 == 0 {
                t.set(l, m, v);
            }
        }
    }
    t
}

pub fn roundtrip(cfg: &RunConfig, out: &mut Artifacts, seed: u64, mode: SymbolMode, orders: (usize, usize), scale: f64) -> Result<Value, CliError> {
    let profile = cfg.profile()?;
    let sc = cfg.strip();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = PerturbationExpansion::new(orders.0, 10.0 * profile.y_m());
    let mut tables = Vec::new();
    for k in orders.0..=orders.1 {
        let t = planted_table(&mut rng, sc.band_limit - 1, scale, mode);
        planted = match mode {
            SymbolMode::Transmitted => planted.with_global_term(k, t.clone()),
            SymbolMode::Reflected => planted.with_term(k, Hemisphere::Upper, t.clone()),
        };
        tables.push((k, t));
    }
    let cal = Complex64::new(cfg.numerics.calibration[0], cfg.numerics.calibration[1]);
    let mut data = Vec::new();
    for k in orders.0..=orders.1 {
        let mut d = synthesize_symbols(&profile, &planted, k, mode, &sc).map_err(numerical)?;
        d.calibration = cal;
        for v in d.values.iter_mut().flatten() {
            *v *= cal;
        }
        data.push(d);
    }
    out.json("planted_medium.json", &MediumDocument::from_parts(&profile, &planted))?;
    out.json("symbols.json", &SymbolFile { symbols: data.iter().map(SymbolRecord::from_data).collect() })?;
    let rep = layer_strip(&data, &profile).map_err(numerical)?;
    write_recovery(out, &rep, &profile)?;
    let mut errors = Vec::new();
    let mut rows = Vec::new();
    for ((k, t), (g, res)) in tables.iter().zip(rep.gammas.iter().zip(&rep.residuals)) {
        let diff: f64 = g.table.coeffs.iter().zip(&t.coeffs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let rel = diff / t.l2_norm();
        errors.push(json!({ "order": k, "rel_l2_error": rel, "residual": res.1 }));
        rows.push(vec![k.to_string(), num(rel), num(res.1)]);
    }
    out.csv("recovery_error.csv", &["order", "rel_l2_error", "residual"], &rows)?;
    let max_rel = errors.iter().filter_map(|e| e["rel_l2_error"].as_f64()).fold(0.0, f64::max);
    let report = json!({
        "mode": mode,
        "orders": [orders.0, orders.1],
        "seed": seed,
        "errors": errors,
        "max_rel_l2_error": max_rel,
        "halted_at": rep.halted_at,
        "passed": max_rel < 1e-3 && rep.halted_at.is_none(),
    });
    out.json("report.json", &report)?;
    Ok(json!({ "max_rel_l2_error": max_rel, "halted_at": rep.halted_at }))
}

#[derive(Debug, Deserialize)]
struct ReflectionRow {
    k: f64,
    #[serde(rename = "re_R")]
    re: f64,
    #[serde(rename = "im_R")]
    im: f64,
}

pub fn parse_bound(s: &str) -> Result<BoundState, CliError> {
    let bad = || CliError::ConfigInvalid(format!("bound state {s:?} must look like kappa:norming"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (kappa, norming) = (a.trim().parse::<f64>().map_err(|_| bad())?, b.trim().parse::<f64>().map_err(|_| bad())?);
    if !(kappa > 0.0 && norming > 0.0) {
        return Err(bad());
    }
    Ok(BoundState { kappa, norming })
}

/// Piecewise-constant profile of the recovered speed, padded with `c₊`.
fn profile_from_samples(x: &[f64], c0: &[f64], c_plus: f64) -> Option<StratifiedProfile> {
    let h = x.get(1)? - x[0];
    let y_m = x[0].abs().max(x[x.len() - 1].abs()) + h;
    let mut layers = vec![Layer::constant(-y_m, x[0] - 0.5 * h, c_plus)];
    for (xi, c) in x.iter().zip(c0) {
        layers.push(Layer::constant(xi - 0.5 * h, xi + 0.5 * h, *c));
    }
    layers.push(Layer::constant(x[x.len() - 1] + 0.5 * h, y_m, c_plus));
    layers.retain(|l| l.y_hi - l.y_lo > 1e-12);
    StratifiedProfile::new(layers, c_plus, c_plus, y_m).ok()
}

pub fn invert1d(cfg: &RunConfig, out: &mut Artifacts, reflection: &Path, bound: &[BoundState], x_range: (f64, f64)) -> Result<Value, CliError> {
    let mut rdr = csv::Reader::from_path(reflection).map_err(|e| CliError::Io(format!("{}: {e}", reflection.display())))?;
    let mut k = Vec::new();
    let mut r = Vec::new();
    for row in rdr.deserialize::<ReflectionRow>() {
        let row = row.map_err(|e| CliError::ConfigInvalid(format!("{}: {e}", reflection.display())))?;
        k.push(row.k);
        r.push(Complex64::new(row.re, row.im));
    }
    if k.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::ConfigInvalid("reflection k column must be strictly increasing".into()));
    }
    let mc = cfg.marchenko(x_range.0, x_range.1);
    let pot = marchenko_invert_1d(&k, &r, bound, &mc).map_err(numerical)?;
    let c_plus = cfg.medium_document()?.c_plus;
    let l2 = cfg.lambda * cfg.lambda;
    let c0: Vec<f64> = pot.q.iter().map(|q| (1.0 / (c_plus * c_plus) - q / l2).max(1e-300).powf(-0.5)).collect();
    let rows: Vec<Vec<String>> = pot.x.iter().zip(&pot.q).zip(&c0).map(|((x, q), c)| vec![num(*x), num(*q), num(*c)]).collect();
    out.csv("potential.csv", &["x", "q", "c0"], &rows)?;
    // Forward check: reflection of the recovered profile on the data grid.
    let misfit = if bound.is_empty() {
        profile_from_samples(&pot.x, &c0, c_plus).map(|p| {
            k.iter()
                .zip(&r)
                .filter(|(kk, _)| **kk > 0.0)
                .map(|(kk, rr)| schrodinger_reflection(&p, cfg.lambda, *kk).map(|v| (v - rr).norm()).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max)
        })
    } else {
        None
    };
    let doc = json!({
        "samples": k.len(),
        "bound_states": bound,
        "marchenko": mc,
        "condition": pot.condition,
        "forward_reflection_misfit": misfit,
        "lambda": cfg.lambda,
        "c_plus": c_plus,
    });
    out.json("invert1d.json", &doc)?;
    Ok(json!({ "condition": pot.condition }))
}

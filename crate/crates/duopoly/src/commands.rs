//! `equilibria`, `simulate`, `discrete` and `sweep`.

use duopoly_core::equilibria::{analyze_with_tolerance, conjectural_admissible, EquilibriumKind, EquilibriumReport};
use duopoly_core::integrator::{AbsorbingRect, DEFAULT_ENTRY_EPS};
use duopoly_core::liapunov::decay_envelope;
use duopoly_core::model::{iterate_map, PARAM_NAMES};
use duopoly_core::{build_bundle, integrate, Event, IntegrateError, LiapunovBundle, ModelParams, Perturbation, State};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::config::{ConfigError, RunConfig};
use crate::format::{csv_row, float, jacobian, num, obj, opt_num, state};
use crate::{CliError, Format, Output};

/// Fields shared by every report: command, config hash, seed, parameters.
pub fn header(command: &str, cfg: &RunConfig, p: Option<&ModelParams>) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), command.into());
    m.insert("config_hash".into(), cfg.hash.clone().into());
    m.insert("seed".into(), cfg.seed.into());
    if let Some(p) = p {
        m.insert("params".into(), params_json(p));
    }
    m
}

pub fn params_json(p: &ModelParams) -> Value {
    let mut m = Map::new();
    for (name, v) in PARAM_NAMES.iter().zip(p.values()) {
        m.insert(name.to_string(), num(v));
    }
    Value::Object(m)
}

fn kind_name(k: EquilibriumKind) -> &'static str {
    match k {
        EquilibriumKind::Origin => "origin",
        EquilibriumKind::BoundaryY => "boundary_y",
        EquilibriumKind::BoundaryX => "boundary_x",
        EquilibriumKind::Conjectural => "conjectural",
    }
}

fn class_label(r: &EquilibriumReport) -> &'static str {
    r.classification.as_ref().map_or("degenerate", |c| c.label())
}

pub fn bundle_json(b: &LiapunovBundle) -> Value {
    obj([
        ("alpha1", num(b.alpha1)),
        ("alpha2", num(b.alpha2)),
        ("alpha3", num(b.alpha3)),
        ("m", Value::Array(b.m.iter().map(|x| num(*x)).collect())),
        ("M", num(b.m_max)),
        ("delta1", num(b.delta1)),
        ("delta2", num(b.delta2)),
        ("h1", num(b.h1)),
        ("h2", num(b.h2)),
        ("radius_sq", num(b.radius_sq)),
        ("certified_level", num(b.certified_level())),
        ("global_ok", b.global_ok.into()),
    ])
}

/// The interior-equilibrium bundle, when E3 is admissible and linearly stable.
pub fn interior_bundle(p: &ModelParams, reports: &[EquilibriumReport; 4]) -> Result<(State, LiapunovBundle), String> {
    let e3 = &reports[3];
    match (e3.point, e3.jacobian) {
        (Some(point), Some(j)) if e3.admissible => build_bundle(&j, p).map(|b| (point, b)).map_err(|e| e.to_string()),
        (None, _) => Err("interior equilibrium is degenerate (gamma^2 = L1*L2)".into()),
        _ => Err("interior equilibrium is not admissible".into()),
    }
}

pub fn equilibria(cfg: &RunConfig, format: Format) -> Result<Output, CliError> {
    let p = cfg.params()?;
    let reports = analyze_with_tolerance(&p, cfg.tolerance);
    if format == Format::Csv {
        let mut text = csv_row([
            "label", "u", "v", "admissible", "degenerate", "a11", "a12", "a21", "a22", "I0", "A0", "disc", "lambda1",
            "lambda2", "classification",
        ]);
        for r in &reports {
            let pt = r.point.map_or([String::new(), String::new()], |s| [float(s.u), float(s.v)]);
            let jac: Vec<String> = match r.jacobian {
                Some(j) => {
                    let (l1, l2) = j.eigenvalues.map_or((String::new(), String::new()), |(a, b)| (float(a), float(b)));
                    vec![float(j.a11), float(j.a12), float(j.a21), float(j.a22), float(j.trace), float(j.det), float(j.disc), l1, l2]
                }
                None => vec![String::new(); 9],
            };
            let mut row = vec![r.kind.label().to_string(), pt[0].clone(), pt[1].clone()];
            row.push(r.admissible.to_string());
            row.push(r.point.is_none().to_string());
            row.extend(jac);
            row.push(class_label(r).to_string());
            text.push_str(&csv_row(row));
        }
        return Ok(Output::with_meta(text, Value::Object(header("equilibria", cfg, Some(&p)))));
    }
    let mut m = header("equilibria", cfg, Some(&p));
    m.insert("tolerance".into(), num(cfg.tolerance));
    let list: Vec<Value> = reports
        .iter()
        .map(|r| {
            obj([
                ("label", r.kind.label().into()),
                ("kind", kind_name(r.kind).into()),
                ("point", r.point.as_ref().map_or(Value::Null, state)),
                ("admissible", r.admissible.into()),
                ("degenerate", r.point.is_none().into()),
                ("jacobian", r.jacobian.as_ref().map_or(Value::Null, jacobian)),
                ("classification", class_label(r).into()),
            ])
        })
        .collect();
    m.insert("equilibria".into(), Value::Array(list));
    let liapunov = match interior_bundle(&p, &reports) {
        Ok((_, b)) => bundle_json(&b),
        Err(reason) => obj([("error", reason.into())]),
    };
    m.insert("liapunov".into(), liapunov);
    Ok(Output::json(Value::Object(m)))
}

fn integrate_error(e: IntegrateError) -> CliError {
    match e {
        IntegrateError::InvalidStep(_) | IntegrateError::InvalidHorizon(_) | IntegrateError::InitialOutsideOrthant(_) => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Runtime(e.to_string()),
    }
}

fn event_json(e: &Event) -> Value {
    match *e {
        Event::AbsorbingEntry { t } => obj([("type", "absorbing_entry".into()), ("t", num(t))]),
        Event::OrthantExcursion { t, value } => {
            obj([("type", "orthant_excursion".into()), ("t", num(t)), ("value", num(value))])
        }
    }
}

pub fn simulate(cfg: &RunConfig, format: Format) -> Result<Output, CliError> {
    let p = cfg.params()?;
    let sim = &cfg.simulate;
    let traj = integrate(&p, sim.s0, sim.t_end, sim.dt, sim.method).map_err(integrate_error)?;

    let mut meta = header("simulate", cfg, Some(&p));
    meta.insert("method".into(), sim.method.label().into());
    meta.insert("dt".into(), num(sim.dt));
    meta.insert("t_end".into(), num(sim.t_end));
    meta.insert("s0".into(), state(&sim.s0));
    meta.insert("samples".into(), traj.len().into());
    let (_, last) = traj.last().expect("non-empty trajectory");
    meta.insert("final".into(), state(&last));
    meta.insert("events".into(), Value::Array(traj.events.iter().map(event_json).collect()));
    meta.insert("absorbing_entry".into(), opt_num(traj.absorbing_entry()));

    let reports = analyze_with_tolerance(&p, cfg.tolerance);
    let liapunov = match interior_bundle(&p, &reports) {
        Ok((anchor, b)) => {
            let pert = Perturbation::from_state(&sim.s0, &anchor);
            let v0 = b.v(&pert);
            let derived = b.eta(v0);
            let (eta, source) = match sim.eta_override {
                Some(e) => (e, "override"),
                None => (derived, "derived"),
            };
            let certified = sim.eta_override.is_none() && b.local_condition(&pert) && derived < 1.0;
            let t_end = sim.t_end;
            obj([
                ("anchor", state(&anchor)),
                ("v0", num(v0)),
                ("local_condition", b.local_condition(&pert).into()),
                ("eta", num(eta)),
                ("eta_source", source.into()),
                ("status", if certified { "certified" } else { "uncertified" }.into()),
                ("rate", if eta < 1.0 { num(b.decay_rate(eta)) } else { Value::Null }),
                ("envelope_at_t_end", if eta < 1.0 { num(decay_envelope(v0, &b, eta, t_end)) } else { Value::Null }),
                ("v_at_t_end", num(b.v(&Perturbation::from_state(&last, &anchor)))),
                ("distance_to_anchor", num(last.distance_sq(&anchor).sqrt())),
            ])
        }
        Err(reason) => obj([("error", reason.into())]),
    };
    meta.insert("liapunov".into(), liapunov);

    if format == Format::Json {
        let col = |f: &dyn Fn(f64, State) -> f64| Value::Array(traj.iter().map(|(t, s)| num(f(t, s))).collect());
        meta.insert(
            "trajectory".into(),
            obj([("t", col(&|t, _| t)), ("u", col(&|_, s| s.u)), ("v", col(&|_, s| s.v))]),
        );
        return Ok(Output::json(Value::Object(meta)));
    }
    let mut text = csv_row(["t", "u", "v"]);
    for (t, s) in traj.iter() {
        text.push_str(&csv_row([float(t), float(s.u), float(s.v)]));
    }
    Ok(Output::with_meta(text, Value::Object(meta)))
}

pub fn discrete(cfg: &RunConfig, format: Format) -> Result<Output, CliError> {
    let p = cfg.params()?;
    let s0 = cfg.simulate.s0;
    let iterates = iterate_map(&p, s0, cfg.steps);
    let mut meta = header("discrete", cfg, Some(&p));
    meta.insert("s0".into(), state(&s0));
    meta.insert("steps".into(), cfg.steps.into());
    let exit = iterates.iter().position(|s| !s.in_first_orthant() || !s.is_finite());
    meta.insert("left_orthant_at".into(), exit.map_or(Value::Null, Value::from));
    if format == Format::Json {
        let col = |f: &dyn Fn(&State) -> f64| Value::Array(iterates.iter().map(|s| num(f(s))).collect());
        meta.insert("iterates".into(), obj([("x", col(&|s| s.u)), ("y", col(&|s| s.v))]));
        return Ok(Output::json(Value::Object(meta)));
    }
    let mut text = csv_row(["t", "x", "y"]);
    for (n, s) in iterates.iter().enumerate() {
        text.push_str(&csv_row([n.to_string(), float(s.u), float(s.v)]));
    }
    Ok(Output::with_meta(text, Value::Object(meta)))
}

pub const SWEEP_COLUMNS: [&str; 17] = [
    "a", "nu", "gamma", "theta1", "theta2", "L1", "L2", "e3_u", "e3_v", "e3_admissible", "e0_class", "e1_class",
    "e2_class", "e3_class", "radius_sq", "global_ok", "entry_time",
];

struct Grid {
    axes: Vec<(usize, crate::config::Range)>,
    base: [f64; 7],
    size: usize,
}

impl Grid {
    fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let sweep = &cfg.sweep;
        let size = sweep.size();
        if size > sweep.cap as u128 {
            return Err(ConfigError::GridTooLarge { size, cap: sweep.cap }.into());
        }
        let mut base = [0.0; 7];
        let mut axes = Vec::new();
        for (i, name) in PARAM_NAMES.iter().enumerate() {
            match (sweep.ranges[i], cfg.base[i]) {
                (Some(r), _) => {
                    if !(r.start > 0.0 && r.stop > 0.0) {
                        return Err(CliError::Usage(format!("sweep.{name}: range endpoints must be positive")));
                    }
                    axes.push((i, r));
                }
                (None, Some(v)) => base[i] = v,
                (None, None) => return Err(ConfigError::Missing { key: name.to_string() }.into()),
            }
        }
        Ok(Grid { axes, base, size: size as usize })
    }

    /// Parameters of grid point `index`; the first swept axis varies slowest.
    fn point(&self, mut index: usize) -> [f64; 7] {
        let mut values = self.base;
        for (i, r) in self.axes.iter().rev() {
            values[*i] = r.value(index % r.count);
            index /= r.count;
        }
        values
    }
}

fn sweep_row(cfg: &RunConfig, values: [f64; 7]) -> Vec<String> {
    let mut row: Vec<String> = values.iter().map(|v| float(*v)).collect();
    let p = match ModelParams::from_array(values) {
        Ok(p) => p,
        Err(_) => {
            row.extend(std::iter::repeat_n(String::new(), SWEEP_COLUMNS.len() - 7));
            return row;
        }
    };
    let reports = analyze_with_tolerance(&p, cfg.tolerance);
    match reports[3].point {
        Some(s) => row.extend([float(s.u), float(s.v)]),
        None => row.extend([String::new(), String::new()]),
    }
    row.push(conjectural_admissible(&p).to_string());
    row.extend(reports.iter().map(|r| class_label(r).to_string()));
    match interior_bundle(&p, &reports) {
        Ok((_, b)) => row.extend([float(b.radius_sq), b.global_ok.to_string()]),
        Err(_) => row.extend([String::new(), String::new()]),
    }
    let sim = &cfg.simulate;
    let entry = integrate(&p, sim.s0, sim.t_end, sim.dt, sim.method).ok().and_then(|traj| {
        duopoly_core::entry_time(&traj, &AbsorbingRect::from_params(&p), DEFAULT_ENTRY_EPS)
    });
    row.push(entry.map_or(String::new(), float));
    row
}

/// Rows in row-major grid order, computed in parallel or serially.
pub fn sweep_rows(cfg: &RunConfig) -> Result<Vec<Vec<String>>, CliError> {
    let grid = Grid::build(cfg)?;
    let rows = if cfg.sweep.parallel {
        (0..grid.size).into_par_iter().map(|i| sweep_row(cfg, grid.point(i))).collect()
    } else {
        (0..grid.size).map(|i| sweep_row(cfg, grid.point(i))).collect()
    };
    Ok(rows)
}

fn cell_json(cell: &str) -> Value {
    match cell {
        "" => Value::Null,
        "true" => true.into(),
        "false" => false.into(),
        _ => match cell.parse::<f64>() {
            Ok(x) if x.is_finite() && cell.contains('e') => num(x),
            _ => cell.into(),
        },
    }
}

pub fn sweep(cfg: &RunConfig, format: Format) -> Result<Output, CliError> {
    let rows = sweep_rows(cfg)?;
    let mut meta = header("sweep", cfg, None);
    meta.insert("points".into(), rows.len().into());
    meta.insert("s0".into(), state(&cfg.simulate.s0));
    meta.insert("t_end".into(), num(cfg.simulate.t_end));
    meta.insert("dt".into(), num(cfg.simulate.dt));
    if format == Format::Json {
        let list = rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (k, v) in SWEEP_COLUMNS.iter().zip(row) {
                    m.insert(k.to_string(), cell_json(v));
                }
                Value::Object(m)
            })
            .collect();
        meta.insert("rows".into(), Value::Array(list));
        return Ok(Output::json(Value::Object(meta)));
    }
    let mut text = csv_row(SWEEP_COLUMNS);
    for row in rows {
        text.push_str(&csv_row(row));
    }
    Ok(Output::with_meta(text, Value::Object(meta)))
}

use serde_json::{json, Value};
use superpartner::catalog::{enumerate_factorizations, Origin};
use superpartner::riccati::{general_solution, riccati_residual, DerivativeSource, FamilyConstant};
use superpartner::shapeinv::{
    energy_ladder, si_family_check, si_residual_for, special_family_si_failure, SpecialFamilyOutcome,
};
use superpartner::spectra::{annihilation_check, eigen_lowest, DiscretizedHamiltonian};
use superpartner::{FactorizationPair, MapKind, ParameterMap, Result};

use crate::config::RunConfig;
use crate::report::{self, num, nums, samples, Cell, Report, Table};

/// Relative tolerance for ladder energies against the eigensolver.
pub const LADDER_TOL: f64 = 5e-3;

fn header(cmd: &str, c: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), cmd.into());
    m.insert("potential".into(), c.entry.id.clone().into());
    m.insert("params".into(), report::params(&c.params));
    m.insert("grid".into(), report::grid(&c.grid));
    m
}

fn pair_info(p: &FactorizationPair<f64>, c: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("label".into(), p.label.clone().into());
    m.insert("w".into(), p.w.description.clone().into());
    m.insert("order".into(), p.order.as_str().into());
    m.insert("energy".into(), num(p.energy(&c.params)));
    m.insert("energy_formula".into(), p.energy_description.clone().into());
    m
}

pub fn verify(c: &RunConfig) -> Result<Report> {
    let mut doc = header("verify", c);
    let mut rows = Vec::new();
    let mut table = Table::new(["label", "order", "energy", "max_abs", "relative", "derivative", "pass"]);
    let mut all = true;
    for p in &c.entry.factorizations {
        let r = riccati_residual(&c.entry.potential, p, &c.params, &c.grid)?;
        let pass = r.passes_default();
        all &= pass;
        let derivative = match r.derivative {
            DerivativeSource::Analytic => "analytic",
            DerivativeSource::FiniteDifference => "finite-difference",
        };
        let mut m = pair_info(p, c);
        m.insert("max_abs".into(), num(r.max_abs));
        m.insert("relative".into(), num(r.relative()));
        m.insert("scale".into(), num(r.scale));
        m.insert("derivative".into(), derivative.into());
        m.insert("masked".into(), r.residual.masked_count().into());
        m.insert("pass".into(), pass.into());
        rows.push(Value::Object(m));
        table.push(vec![
            Cell::Text(p.label.clone()),
            Cell::Text(p.order.as_str().into()),
            Cell::Num(p.energy(&c.params)),
            Cell::Num(r.max_abs),
            Cell::Num(r.relative()),
            Cell::Text(derivative.into()),
            Cell::Flag(pass),
        ]);
    }
    doc.insert("factorizations".into(), Value::Array(rows));
    doc.insert("pass".into(), all.into());
    Ok(Report { json: Value::Object(doc), table, pass: all })
}

fn family_label(f: FamilyConstant<f64>) -> String {
    match f {
        FamilyConstant::Finite(v) => format!("{v}"),
        FamilyConstant::Infinite => "inf".into(),
    }
}

pub fn family(c: &RunConfig) -> Result<Report> {
    let pair = match &c.pair {
        Some(label) => c.entry.require_pair(label)?,
        None => &c.entry.factorizations[0],
    };
    let v = c.entry.potential.sample(&c.params, &c.grid);
    let wp = pair.w.sample(&c.params, &c.grid);
    let members = c
        .family
        .iter()
        .map(|&f| general_solution(pair, &c.params, f, &c.grid))
        .collect::<Result<Vec<_>>>()?;

    let mut header_row = vec!["x".to_string(), "V".into(), "W_p".into()];
    for m in &members {
        let f = family_label(m.family_constant);
        header_row.push(format!("W_g[F={f}]"));
        header_row.push(format!("Vtilde_g[F={f}]"));
    }
    let mut table = Table::new(header_row);
    for i in 0..c.grid.len() {
        let at = |s: &superpartner::SampledFunction<f64>| Cell::Num(s.value(i).unwrap_or(f64::NAN));
        let mut row = vec![Cell::Num(c.grid.x(i)), at(&v), at(&wp)];
        for m in &members {
            row.push(at(&m.w_g));
            row.push(at(&m.v_tilde_g));
        }
        table.push(row);
    }

    let mut doc = header("family", c);
    doc.insert("pair".into(), Value::Object(pair_info(pair, c)));
    doc.insert("x".into(), nums(c.grid.points()));
    doc.insert("V".into(), samples(&v));
    doc.insert("W_p".into(), samples(&wp));
    doc.insert(
        "members".into(),
        Value::Array(
            members
                .iter()
                .map(|m| {
                    json!({
                        "F": report::family_constant(m.family_constant),
                        "W_g": samples(&m.w_g),
                        "Vtilde_g": samples(&m.v_tilde_g),
                        "nodes": nums(m.nodes.iter().copied()),
                        "regular": m.is_regular(),
                    })
                })
                .collect(),
        ),
    );
    doc.insert("pass".into(), true.into());
    Ok(Report { json: Value::Object(doc), table, pass: true })
}

/// Node lists for stderr when `family` writes CSV.
pub fn family_nodes(report: &Report) -> Vec<String> {
    let Some(members) = report.json["members"].as_array() else { return Vec::new() };
    members
        .iter()
        .map(|m| {
            let nodes: Vec<String> = m["nodes"]
                .as_array()
                .map(|a| a.iter().map(|n| n.to_string()).collect())
                .unwrap_or_default();
            format!("F={}: nodes [{}]", m["F"].to_string().trim_matches('"'), nodes.join(", "))
        })
        .collect()
}

pub fn spectrum(c: &RunConfig) -> Result<Report> {
    let e = &c.entry;
    let h = DiscretizedHamiltonian::discretize(&e.potential, &c.params, &c.grid)?;
    let spec = eigen_lowest(&h, c.levels)?;
    let eig = &spec.eigenvalues;

    let mut annihilation = Vec::new();
    for p in &e.factorizations {
        let r = annihilation_check(p, &e.potential.domain, &c.params, &c.grid)?;
        annihilation.push(json!({
            "label": p.label,
            "energy": num(p.energy(&c.params)),
            "norm_ratio": num(r.norm_ratio),
            "boundary_values": nums([r.boundary_values.0, r.boundary_values.1]),
            "decays": [r.decays.0, r.decays.1],
            "normalizable": r.normalizable,
            "annihilated": r.annihilated(),
            "pass": r.passes(),
        }));
    }

    let mut table = Table::new(["source", "level", "energy", "eigenvalue", "delta"]);
    for (i, &ev) in eig.iter().enumerate() {
        table.push(vec![Cell::Text("eigensolver".into()), Cell::Num(i as f64), Cell::Num(ev), Cell::Num(ev), Cell::Num(0.0)]);
    }

    let mut ladders = Vec::new();
    let mut all = true;
    for si in e.si_data.iter().filter(|s| !s.algebraic_only) {
        let Some(p) = e.pair(&si.pair_label) else { continue };
        let base = json!({ "pair": p.label, "map": si.f.id });
        let mut m = base.as_object().cloned().unwrap_or_default();
        match energy_ladder(&e.potential, p, si, &c.params, c.levels, &c.grid) {
            Ok(l) => {
                let deltas: Vec<f64> = l.levels.iter().zip(eig).map(|(a, b)| a - b).collect();
                let pass = l
                    .levels
                    .iter()
                    .zip(eig)
                    .all(|(a, b)| (a - b).abs() <= LADDER_TOL * a.abs().max(1.0));
                all &= pass;
                for (i, (&lv, d)) in l.levels.iter().zip(&deltas).enumerate() {
                    table.push(vec![
                        Cell::Text(format!("{} {}", p.label, si.f.id)),
                        Cell::Num(i as f64),
                        Cell::Num(lv),
                        Cell::Num(eig[i]),
                        Cell::Num(*d),
                    ]);
                }
                m.insert("levels".into(), nums(l.levels.iter().copied()));
                m.insert("requested".into(), l.requested.into());
                m.insert("deltas".into(), nums(deltas));
                m.insert(
                    "truncation".into(),
                    l.truncation.as_ref().map_or(Value::Null, |t| {
                        json!({ "at_level": t.at_level, "params": t.params, "reason": t.reason.to_string() })
                    }),
                );
                m.insert("bound_state_count".into(), l.bound_state_count().map_or(Value::Null, Value::from));
                m.insert("pass".into(), pass.into());
            }
            Err(err) => {
                m.insert("error".into(), err.to_string().into());
            }
        }
        ladders.push(Value::Object(m));
    }

    let mut doc = header("spectrum", c);
    doc.insert("eigenvalues".into(), nums(eig.iter().copied()));
    doc.insert("eigen_residuals".into(), nums(spec.residuals.iter().copied()));
    doc.insert("ladders".into(), Value::Array(ladders));
    doc.insert("annihilation".into(), Value::Array(annihilation));
    doc.insert("ladder_tolerance".into(), num(LADDER_TOL));
    doc.insert("pass".into(), all.into());
    Ok(Report { json: Value::Object(doc), table, pass: all })
}

/// The shape map checked for `label` in the family sweep: its first
/// admissible relation, or the identity when the pair has none.
fn sweep_map(c: &RunConfig, label: &str) -> ParameterMap<f64> {
    c.entry
        .si_for(label)
        .into_iter()
        .find(|s| !s.algebraic_only)
        .map(|s| s.f.clone())
        .unwrap_or_else(|| ParameterMap::identity(MapKind::ShapeMap))
}

pub fn si_check(c: &RunConfig) -> Result<Report> {
    let e = &c.entry;
    let mut table = Table::new(["kind", "pair", "map", "F", "constant", "flatness", "pass"]);
    let mut relations = Vec::new();
    let mut all = true;
    for si in &e.si_data {
        let p = e.require_pair(&si.pair_label)?;
        let r = si_residual_for(&e.potential, p, si, &c.params, &c.grid)?;
        all &= r.pass;
        relations.push(json!({
            "pair": p.label,
            "map": si.f.id,
            "algebraic_only": si.algebraic_only,
            "r_pot_formula": si.r_pot_description,
            "w_constant": num(r.w_constant),
            "w_flatness": num(r.w_flatness),
            "r_pot_constant": num(r.r_pot_constant),
            "r_pot_flatness": num(r.r_pot_flatness),
            "d_shift": num(r.d_shift),
            "reconciliation_gap": num(r.reconciliation_gap),
            "scale": num(r.scale),
            "pass": r.pass,
        }));
        table.push(vec![
            Cell::Text("relation".into()),
            Cell::Text(p.label.clone()),
            Cell::Text(si.f.id.clone()),
            Cell::Text(String::new()),
            Cell::Num(r.w_constant),
            Cell::Num(r.w_flatness),
            Cell::Flag(r.pass),
        ]);
    }

    let mut sweep = Vec::new();
    for p in &e.factorizations {
        let f = sweep_map(c, &p.label);
        for &fc in c.family.iter().filter(|f| !matches!(f, FamilyConstant::Infinite)) {
            let r = si_family_check(&e.potential, p, &c.params, &f, fc, &c.grid)?;
            sweep.push(json!({
                "pair": p.label,
                "map": f.id,
                "F": report::family_constant(fc),
                "lhs_mean": num(r.lhs_mean),
                "lhs_flatness": num(r.lhs_flatness),
                "partner_shift": num(r.partner_shift),
                "direct_flatness": num(r.direct_flatness),
                "keeps_invariance": r.keeps_invariance,
            }));
            table.push(vec![
                Cell::Text("family".into()),
                Cell::Text(p.label.clone()),
                Cell::Text(f.id.clone()),
                Cell::Text(family_label(fc)),
                Cell::Num(r.lhs_mean),
                Cell::Num(r.lhs_flatness),
                Cell::Flag(r.keeps_invariance),
            ]);
        }
    }

    let mut doc = header("si-check", c);
    doc.insert("relations".into(), Value::Array(relations));
    doc.insert("family_sweep".into(), Value::Array(sweep));
    if e.id == "special-family" {
        let outcome = special_family_si_failure(c.params.require("k")?, c.params.require("l")?, &c.grid)?;
        let v = match outcome {
            SpecialFamilyOutcome::Trivial => json!({ "trivial": true }),
            SpecialFamilyOutcome::Checked { maps, pass } => json!({
                "trivial": false,
                "pass": pass,
                "maps": maps
                    .iter()
                    .map(|m| json!({ "map": m.map, "flatness": num(m.flatness), "non_constant": m.non_constant }))
                    .collect::<Vec<_>>(),
            }),
        };
        doc.insert("special_family_failure".into(), v);
    }
    doc.insert("pass".into(), all.into());
    Ok(Report { json: Value::Object(doc), table, pass: all })
}

pub fn factorizations(c: &RunConfig) -> Result<Report> {
    let found = enumerate_factorizations(&c.entry, &c.params, &c.grid)?;
    let mut table = Table::new(["label", "w", "order", "energy", "origin", "map", "residual_max", "valid"]);
    let mut rows = Vec::new();
    let mut all = true;
    for d in &found {
        all &= d.valid;
        let (origin, map) = match &d.origin {
            Origin::Shipped => ("shipped", Value::Null),
            Origin::Transport { map } => ("transport", Value::from(map.as_str())),
            Origin::ShapeInvariance { map } => ("shape-invariance", Value::from(map.as_str())),
        };
        let mut m = pair_info(&d.pair, c);
        m.insert("energy".into(), num(d.energy));
        m.insert("origin".into(), origin.into());
        m.insert("map".into(), map.clone());
        m.insert("residual_max".into(), num(d.residual_max));
        m.insert("residual_relative".into(), num(d.residual_relative));
        m.insert("valid".into(), d.valid.into());
        rows.push(Value::Object(m));
        table.push(vec![
            Cell::Text(d.pair.label.clone()),
            Cell::Text(d.pair.w.description.clone()),
            Cell::Text(d.pair.order.as_str().into()),
            Cell::Num(d.energy),
            Cell::Text(origin.into()),
            Cell::Text(map.as_str().unwrap_or("").into()),
            Cell::Num(d.residual_max),
            Cell::Flag(d.valid),
        ]);
    }
    let mut doc = header("factorizations", c);
    doc.insert("factorizations".into(), Value::Array(rows));
    doc.insert("pass".into(), all.into());
    Ok(Report { json: Value::Object(doc), table, pass: all })
}

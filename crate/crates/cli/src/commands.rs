use std::path::Path;

use serde_json::{json, Value};
use thermoform::beta::{identity_check, BetaSystem};
use thermoform::dimension::{
    conditional_dimension_check, global_dimension_check, temperature, GlsModel, CHECK_MAX_TAIL,
};
use thermoform::gdms::Gdms;
use thermoform::shift::{
    entropy_from_pressure, gibbs_audit, pressure, summability_report, truncation_sweep, GibbsMarkovMeasure, Potential,
};

use crate::config::{resolve_space, BetaConfig, DimensionConfig, GibbsConfig, PressureConfig, SystemSpec};
use crate::error::CliError;
use crate::report::value;

/// Results and diagnostics of one command.
pub struct Output {
    pub results: Value,
    pub diagnostics: Value,
}

fn load_system(spec: &mut Option<SystemSpec>, base: &Path) -> Result<Option<Gdms>, CliError> {
    match spec {
        None => Ok(None),
        Some(s) => {
            *s = s.resolve(base)?;
            Ok(Some(s.build()?.0))
        }
    }
}

/// Pressure, per-level values, summability and an optional truncation sweep.
/// File references in `cfg` are replaced by their contents.
pub fn cmd_pressure(cfg: &mut PressureConfig, base: &Path) -> Result<Output, CliError> {
    let system = load_system(&mut cfg.system, base)?;
    let space = resolve_space(cfg.shift.as_ref(), system.as_ref())?;
    let psi = cfg.potential.build(system.as_ref(), cfg.truncation)?;
    let estimate = pressure(&space, &psi, cfg.n_max, cfg.truncation)?;
    let summability = summability_report(&space, &psi, cfg.truncation, cfg.summability_tolerance);
    let sweep = if cfg.sweep.is_empty() {
        None
    } else {
        Some(truncation_sweep(&space, &psi, cfg.n_max, &cfg.sweep, cfg.sweep_tolerance)?)
    };
    Ok(Output {
        results: json!({
            "pressure": estimate.value,
            "levels": estimate.levels,
            "truncation": estimate.truncation,
            "sweep": sweep,
        }),
        diagnostics: json!({
            "level_gap": estimate.gap,
            "summability": value(&summability),
        }),
    })
}

/// Gibbs state as a Markov chain, its export and the Gibbs-ratio audit.
pub fn cmd_gibbs(cfg: &mut GibbsConfig, base: &Path) -> Result<Output, CliError> {
    let system = load_system(&mut cfg.system, base)?;
    let space = resolve_space(cfg.shift.as_ref(), system.as_ref())?;
    let psi = cfg.potential.build(system.as_ref(), cfg.truncation)?;
    let measure = GibbsMarkovMeasure::from_potential(&space, &psi, cfg.truncation)?;
    let audit = match &cfg.audit {
        None => None,
        Some(a) => {
            if a.n_min == 0 || a.n_min > a.n_max {
                return Err(CliError::Config(format!("bad audit range {}..={}", a.n_min, a.n_max)));
            }
            let audit_psi: Potential = match &cfg.audit_potential {
                Some(p) => p.build(system.as_ref(), cfg.truncation)?,
                None => psi.clone(),
            };
            Some(gibbs_audit(&measure, &audit_psi, a.n_min..=a.n_max, a.sample_size, cfg.seed)?)
        }
    };
    let export = if cfg.export { Some(measure.export()?) } else { None };
    let eigen = measure.eigen();
    Ok(Output {
        results: json!({
            "pressure": measure.pressure(),
            "entropy": entropy_from_pressure(&measure, &psi),
            "letter_marginal": measure.letter_marginal(),
            "measure": export.map(|e| value(&e)),
            "audit": audit.map(|a| value(&a)),
        }),
        diagnostics: json!({
            "states": measure.states().len(),
            "memory": measure.memory(),
            "power_iterations": eigen.iterations,
            "chain_entropy": measure.chain_entropy(),
        }),
    })
}

/// Expansion of 1, the GLS partition and the natural-extension identity.
pub fn cmd_beta(cfg: &BetaConfig) -> Result<Output, CliError> {
    if cfg.depth == 0 {
        return Err(CliError::Config("depth must be at least 1".into()));
    }
    let system = BetaSystem::with_depth(cfg.beta.clone(), cfg.depth)?;
    let count = if system.is_finite() { cfg.cells.min(system.available_cells()) } else { cfg.cells };
    let partition = system.cells(count)?;
    let identity = identity_check(&system, cfg.identity_samples, cfg.seed);
    Ok(Output {
        results: json!({
            "digits_of_one": system.digits_of_one(),
            "finite": system.is_finite(),
            "partition": value(&partition),
            "identity_check": identity.max_deviation,
        }),
        diagnostics: json!({
            "beta": system.beta(),
            "precision_bits": system.precision_bits(),
            "available_cells": system.available_cells(),
            "identity": value(&identity),
        }),
    })
}

/// Lyapunov exponents, entropy and dimension checks of a GLS model, and
/// temperature rows of a GDMS. Writes the joint cloud to `emit_cloud`.
pub fn cmd_dimension(cfg: &mut DimensionConfig, base: &Path, emit_cloud: Option<&Path>) -> Result<Output, CliError> {
    if cfg.gls.is_none() && cfg.temperature.is_none() {
        return Err(CliError::Config("nothing to do: configure gls and/or temperature".into()));
    }
    let seed = cfg.seed;
    let mut results = serde_json::Map::new();
    let mut diagnostics = serde_json::Map::new();

    if let Some(g) = &cfg.gls {
        let beta = BetaSystem::new(g.beta.clone())?;
        let model = GlsModel::new(&beta, &g.weighting, g.cells)?;
        let entropy = model.entropy();
        let closed = model.lyapunov_closed_form(CHECK_MAX_TAIL)?;
        let golden = model.lyapunov_golden().ok();
        let birkhoff = if g.lyapunov.steps > 0 && g.lyapunov.orbits > 0 {
            Some(model.lyapunov_birkhoff(g.lyapunov.steps, g.lyapunov.orbits, seed)?)
        } else {
            None
        };
        let conditional =
            if g.conditional { Some(conditional_dimension_check(&model, &g.checks, seed)?) } else { None };
        let global = if g.global { Some(global_dimension_check(&model, &g.checks, seed)?) } else { None };
        if let Some(path) = emit_cloud {
            let cloud = model.joint_cloud(g.checks.points, seed)?;
            std::fs::write(path, cloud.to_csv())?;
        }
        results.insert(
            "gls".into(),
            json!({
                "beta": model.beta(),
                "cells": model.cells().len(),
                "entropy": entropy,
                "lyapunov": {
                    "closed_form": value(&closed),
                    "golden": golden.map(|l| value(&l)),
                    "birkhoff": birkhoff.map(|l| value(&l)),
                },
                "h_over_chi": entropy / closed.value,
                "two_h_over_chi": 2.0 * entropy / closed.value,
                "conditional": conditional.map(|c| value(&c)),
                "global": global.map(|c| value(&c)),
            }),
        );
        diagnostics.insert(
            "gls".into(),
            json!({
                "tail_mass": model.tail_mass(),
                "cell_weights": model.cell_weights(),
            }),
        );
    } else if emit_cloud.is_some() {
        return Err(CliError::Config("--emit-cloud needs a gls section".into()));
    }

    if let Some(t) = &mut cfg.temperature {
        t.system = t.system.resolve(base)?;
        let (system, _) = t.system.build()?;
        let theta = t.theta.as_ref().map(|v| Potential::letter_table(v.clone()));
        let bracket = t.bracket.map(|[a, b]| (a, b));
        let mut rows = Vec::with_capacity(t.q.len());
        for &q in &t.q {
            let r = temperature(&system, theta.as_ref().map(|p| (p, t.theta_pressure)), q, bracket, &t.settings)?;
            rows.push(r);
        }
        results.insert(
            "temperature".into(),
            Value::Array(rows.iter().map(|r| json!({"q": r.q, "t": r.t, "residual": r.residual})).collect()),
        );
        diagnostics.insert("temperature".into(), value(&rows));
    }

    Ok(Output { results: Value::Object(results), diagnostics: Value::Object(diagnostics) })
}

//! The five subcommands. Each validates its part of the config, computes
//! check records and optional tables, and leaves writing to the caller.

use serde_json::{json, Value};
use xyzglass_core::identities::{
    a1_sum, a2_nonlinear_susceptibility, duhamel_identities, finite_size_order_parameters,
    magnetization_bound_check, one_point_identity, susceptibility_bound_check,
    three_point_identity, two_point_identities, ChainReport, ClassicalEnsemble, EstimatorResult,
    IdentityResidual, Method, MethodTag, OrderParameters,
};
use xyzglass_core::phase_region::{sample_region, write_region_csv};
use xyzglass_core::{Axis, AxisTriple, Model, RegionQuery};

use crate::config::{RunConfig, SweepConfig};
use crate::error::CliError;
use crate::report::CheckRecord;
use crate::selftest;

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    VerifyIdentities,
    VerifyBounds,
    OrderParams,
    PhaseRegion,
    Selftest,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::VerifyIdentities => "verify-identities",
            Self::VerifyBounds => "verify-bounds",
            Self::OrderParams => "order-params",
            Self::PhaseRegion => "phase-region",
            Self::Selftest => "selftest",
        }
    }
}

/// Everything a command produces.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<CheckRecord>,
    pub results: Value,
    /// `(stem, contents)` of CSV tables.
    pub tables: Vec<(String, Vec<u8>)>,
}

/// Validates the config for `cmd` without computing anything.
pub fn validate(cmd: Subcommand, config: &RunConfig) -> Result<()> {
    match cmd {
        Subcommand::VerifyIdentities => config.validate_identities().map(drop),
        Subcommand::VerifyBounds => config.validate_bounds().map(drop),
        Subcommand::OrderParams => config.validate_order_params().map(drop),
        Subcommand::PhaseRegion => config.validate_phase_region().map(drop),
        Subcommand::Selftest => Ok(()),
    }
}

pub fn execute(cmd: Subcommand, config: &RunConfig) -> Result<Outcome> {
    match cmd {
        Subcommand::VerifyIdentities => verify_identities(config),
        Subcommand::VerifyBounds => verify_bounds(config),
        Subcommand::OrderParams => order_params(config),
        Subcommand::PhaseRegion => phase_region(config),
        Subcommand::Selftest => Ok(Outcome {
            checks: selftest::run_all(&selftest::Sizes::default(), config.seed)?,
            results: Value::Null,
            tables: Vec::new(),
        }),
    }
}

fn method_name(tag: MethodTag) -> &'static str {
    match tag {
        MethodTag::Mc => "mc",
        MethodTag::Quadrature => "quadrature",
    }
}

fn method_seed(method: &Method) -> Option<u64> {
    match method {
        Method::Mc { seed, .. } => Some(*seed),
        Method::Quadrature { .. } => None,
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}

fn identity_record(r: &IdentityResidual, method: &Method, inputs: Value) -> CheckRecord {
    CheckRecord {
        std_error: Some(r.residual.std_error),
        ..CheckRecord::new(&r.name, method_name(r.residual.method), r.residual.mean, r.tolerance, r.passed)
            .with_inputs(inputs)
            .with_samples(method_seed(method), Some(r.residual.n_samples))
            .with_details(to_value(r))
    }
}

fn verify_identities(config: &RunConfig) -> Result<Outcome> {
    let model = config.validate_identities()?;
    let (method, tol, u) = (config.method(), &config.tolerances, config.gauge_axis);
    let mut checks = Vec::new();
    for &beta in &config.betas {
        for obs in &config.observables {
            let inputs = json!({ "beta": beta, "gauge_axis": u, "observable": obs });
            let w = obs.axis;
            let r = one_point_identity(&model, beta, &obs.x, w, u, &method, tol)?;
            checks.push(identity_record(&r, &method, inputs.clone()));
            if let Some(y) = &obs.y {
                for r in two_point_identities(&model, beta, &obs.x, y, w, u, &method, tol)? {
                    checks.push(identity_record(&r, &method, inputs.clone()));
                }
                for r in duhamel_identities(&model, beta, &obs.x, y, w, u, &method, tol)? {
                    checks.push(identity_record(&r, &method, inputs.clone()));
                }
                if let (true, Some(z)) = (config.three_point, &obs.z) {
                    let r = three_point_identity(&model, beta, [&obs.x, y, z], w, u, &method, tol)?;
                    checks.push(identity_record(&r, &method, inputs.clone()));
                }
            }
        }
    }
    Ok(Outcome {
        checks,
        results: json!({ "model": model_summary(&model) }),
        tables: Vec::new(),
    })
}

fn chain_record(name: &str, r: &ChainReport, method: &Method, inputs: Value) -> CheckRecord {
    CheckRecord {
        clipped: Some(r.clipped),
        ..CheckRecord::new(name, method_name(r.method), r.rhs - r.lhs, r.tolerance, r.passed)
            .with_inputs(inputs)
            .with_samples(method_seed(method), Some(r.n_samples))
            .with_details(to_value(r))
    }
}

fn verify_bounds(config: &RunConfig) -> Result<Outcome> {
    let model = config.validate_bounds()?;
    let (method, tol, u) = (config.method(), &config.tolerances, config.gauge_axis);
    let b = &config.bounds;
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let a2_applicable = model.params().validate_even().is_ok() && model.field_family().is_some();
    for &beta in &config.betas {
        let inputs = json!({ "beta": beta, "gauge_axis": u, "w": b.w, "v": b.v });
        let r = magnetization_bound_check(&model, beta, b.w, u, &method, tol)?;
        checks.push(chain_record("magnetization_bound", &r, &method, inputs.clone()));
        let r = susceptibility_bound_check(&model, beta, b.v, b.w, u, &method, tol)?;
        checks.push(chain_record("susceptibility_bound", &r, &method, inputs.clone()));
        match (b.a2_step, a2_applicable) {
            (Some(h), true) => {
                let r = a2_nonlinear_susceptibility(&model, beta, b.v, b.w, h, &method, tol)?;
                checks.push(CheckRecord {
                    std_error: Some(r.second_difference.std_error),
                    ..CheckRecord::new(
                        "a2_second_difference",
                        method_name(r.second_difference.method),
                        r.second_difference.mean,
                        r.second_tolerance,
                        r.second_vanishes,
                    )
                    .with_inputs(json!({ "beta": beta, "w": b.w, "v": b.v, "step": h }))
                    .with_samples(method_seed(&method), Some(r.second_difference.n_samples))
                    .with_details(to_value(&r))
                });
            }
            (Some(_), false) => skipped.push(format!(
                "a2 at beta = {beta}: needs a p = 1 family and no odd p > 1"
            )),
            (None, _) => {}
        }
    }
    let ensemble = ClassicalEnsemble::from_model(&model, u)?;
    let a1 = a1_sum(&ensemble, b.a1_samples, config.seed, tol)?;
    let clip_fraction = if a1.clip_terms > 0 {
        a1.clipped as f64 / a1.clip_terms as f64
    } else {
        0.0
    };
    let a1_inputs = json!({ "gauge_axis": u, "betas": ensemble.betas() });
    checks.push(CheckRecord {
        std_error: Some(a1.value.std_error),
        clipped: Some(a1.clipped),
        ..CheckRecord::new("a1_sum", "mc", a1.value.mean, 0.0, true)
            .reported_only()
            .with_inputs(a1_inputs.clone())
            .with_samples(Some(config.seed), Some(b.a1_samples))
            .with_details(to_value(&a1))
    });
    checks.push(CheckRecord {
        clipped: Some(a1.clipped),
        ..CheckRecord::new(
            "a1_clip_fraction",
            "mc",
            clip_fraction,
            tol.max_clip_fraction,
            !a1.under_sampled,
        )
        .with_inputs(a1_inputs)
        .with_samples(Some(config.seed), Some(b.a1_samples))
        .with_details(json!({ "clipped": a1.clipped, "terms": a1.clip_terms }))
    });
    Ok(Outcome {
        checks,
        results: json!({ "model": model_summary(&model), "skipped": skipped }),
        tables: Vec::new(),
    })
}

fn estimate(e: &EstimatorResult) -> Value {
    json!({ "mean": e.mean, "std_error": e.std_error })
}

struct SweepPoint {
    beta: f64,
    mu1: Option<f64>,
    values: OrderParameters,
}

fn order_params(config: &RunConfig) -> Result<Outcome> {
    let model = config.validate_order_params()?;
    let method = config.method();
    let mut points = Vec::new();
    match &config.sweep {
        SweepConfig::Beta => {
            for &beta in &config.betas {
                points.push(SweepPoint {
                    beta,
                    mu1: None,
                    values: finite_size_order_parameters(&model, beta, &method)?,
                });
            }
        }
        SweepConfig::Mu1 { axis, values } => {
            let beta = config.betas[0];
            for &mu in values {
                let mut params = model.params().clone();
                params.get_mut(1).expect("validated p = 1 term").mean[*axis] = mu;
                let shifted = model.with_params(params)?;
                points.push(SweepPoint {
                    beta,
                    mu1: Some(mu),
                    values: finite_size_order_parameters(&shifted, beta, &method)?,
                });
            }
        }
    }
    let tag = method_name(method.tag());
    let exact = config.tolerances.exact;
    let mut checks = Vec::new();
    for p in &points {
        for a in Axis::ALL {
            // holds for any weights: mean_i a_i^2 >= (mean_i a_i)^2, then Jensen
            let (m, q) = (p.values.magnetization[a].mean, p.values.overlap[a].mean);
            checks.push(
                CheckRecord::new("overlap_dominates_magnetization", "exact", q - m * m, exact, q - m * m >= -exact)
                    .with_inputs(json!({ "beta": p.beta, "mu1": p.mu1, "axis": a, "estimator": tag }))
                    .with_samples(method_seed(&method), Some(p.values.pressure.n_samples)),
            );
        }
    }
    if let SweepConfig::Mu1 { axis, .. } = &config.sweep {
        // common disorder across the sweep keeps every sample convex in mu1
        for w in points.windows(3) {
            let (x0, x1, x2) = (w[0].mu1.unwrap(), w[1].mu1.unwrap(), w[2].mu1.unwrap());
            let (f0, f1, f2) = (w[0].values.pressure.mean, w[1].values.pressure.mean, w[2].values.pressure.mean);
            if !(x0 < x1 && x1 < x2) {
                continue;
            }
            let second = 2.0
                * ((f2 - f1) / (x2 - x1) - (f1 - f0) / (x1 - x0))
                / (x2 - x0);
            let tolerance = config.tolerances.quadrature;
            checks.push(
                CheckRecord::new("pressure_convexity", "exact", second, tolerance, second >= -tolerance)
                    .with_inputs(json!({ "beta": w[1].beta, "axis": axis, "mu1": [x0, x1, x2], "estimator": tag }))
                    .with_samples(method_seed(&method), Some(w[1].values.pressure.n_samples)),
            );
        }
    }
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "beta": p.beta,
                "mu1": p.mu1,
                "method": tag,
                "magnetization": p.values.magnetization.map(|e| estimate(&e)),
                "overlap": p.values.overlap.map(|e| estimate(&e)),
                "pressure": estimate(&p.values.pressure),
            })
        })
        .collect();
    let mut tables = Vec::new();
    if config.output.csv {
        tables.push(("order_params".to_string(), order_params_csv(&points, tag)));
    }
    Ok(Outcome {
        checks,
        results: json!({ "model": model_summary(&model), "points": rows }),
        tables,
    })
}

fn order_params_csv(points: &[SweepPoint], tag: &str) -> Vec<u8> {
    let mut out = String::from("beta,mu1");
    for name in ["m", "q"] {
        for a in Axis::ALL {
            out.push_str(&format!(",{name}_{a},{name}_{a}_se"));
        }
    }
    out.push_str(",pressure,pressure_se,method\n");
    for p in points {
        out.push_str(&format!("{},{}", p.beta, p.mu1.map(|m| m.to_string()).unwrap_or_default()));
        for triple in [&p.values.magnetization, &p.values.overlap] {
            for a in Axis::ALL {
                out.push_str(&format!(",{},{}", triple[a].mean, triple[a].std_error));
            }
        }
        out.push_str(&format!(",{},{},{tag}\n", p.values.pressure.mean, p.values.pressure.std_error));
    }
    out.into_bytes()
}

fn phase_region(config: &RunConfig) -> Result<Outcome> {
    let pr = config.validate_phase_region()?;
    let mut queries = Vec::new();
    for q in &pr.queries {
        let query = RegionQuery::new(q.std, q.mean, pr.beta_t)?;
        queries.push(json!({
            "mean": q.mean,
            "std": q.std,
            "ratios": query.ratios(),
            "beta2": AxisTriple::new(query.beta2(Axis::X), query.beta2(Axis::Y), query.beta2(Axis::Z)),
            "membership": query.membership(),
        }));
    }
    let mut tables = Vec::new();
    let mut grid = Value::Null;
    if let Some(g) = &pr.grid {
        let rows = sample_region(g, pr.beta_t)?;
        grid = json!({
            "points": rows.len(),
            "in_union": rows.iter().filter(|r| r.membership.in_union).count(),
        });
        if config.output.csv {
            let mut buf = Vec::new();
            write_region_csv(&rows, &mut buf).map_err(|e| CliError::io("<memory>", e))?;
            tables.push(("region".to_string(), buf));
        }
    }
    Ok(Outcome {
        checks: Vec::new(),
        results: json!({ "beta_t": pr.beta_t, "queries": queries, "grid": grid }),
        tables,
    })
}

fn model_summary(model: &Model) -> Value {
    json!({
        "n_sites": model.n_sites(),
        "families": model.families().iter().map(|f| json!({ "p": f.p(), "bonds": f.len() })).collect::<Vec<_>>(),
    })
}

//! Disorder-averaged gauge identities, the magnetization and susceptibility
//! bound chains, and finite-size order-parameter diagnostics.
//!
//! Every identity is estimated as a paired residual: for each disorder
//! sample the quantum expectation and the classical Nishimori-line factor
//! are computed from the same couplings, and the mean of
//! `a - a * c` is reported. Averages are either seeded Monte Carlo or
//! tensor-product Gauss-Hermite quadrature.

use serde::{Deserialize, Serialize};

use crate::classical::ClassicalModel;
use crate::disorder::{sample_rng, DisorderSample};
use crate::error::{Error, Result};
use crate::lattice::BondFamily;
use crate::model::Model;
use crate::operators::{Axis, AxisTriple, PauliString};
use crate::quadrature::quadrature_evaluate;
use crate::quantum::{EigenOperator, ThermalState};
use crate::reduce::{ordered_moments, Moments};
use rand_distr::{Distribution, StandardNormal};

/// Disorder samples per reduction chunk.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    Mc { n_samples: u64, seed: u64 },
    Quadrature { nodes_per_dim: usize },
}

impl Method {
    pub fn tag(&self) -> MethodTag {
        match self {
            Self::Mc { .. } => MethodTag::Mc,
            Self::Quadrature { .. } => MethodTag::Quadrature,
        }
    }

    /// Same seed, twice the samples; quadrature is returned unchanged.
    pub fn doubled(&self) -> Self {
        match *self {
            Self::Mc { n_samples, seed } => Self::Mc {
                n_samples: 2 * n_samples,
                seed,
            },
            q => q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    Mc,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Statistical acceptance in standard errors.
    pub sigmas: f64,
    /// Absolute threshold for quadrature residuals.
    pub quadrature: f64,
    /// Slack for inequalities that hold exactly on any empirical measure.
    pub exact: f64,
    /// Largest tolerated fraction of clipped square-root arguments.
    pub max_clip_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigmas: 4.0,
            quadrature: 1e-8,
            exact: 1e-12,
            max_clip_fraction: 0.01,
        }
    }
}

impl Tolerances {
    /// Allowed deviation of a mean with standard error `se`.
    pub fn statistical(&self, method: MethodTag, se: f64) -> f64 {
        match method {
            MethodTag::Mc => self.sigmas * se + self.exact,
            MethodTag::Quadrature => self.quadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub method: MethodTag,
    /// `mean / std_error`, absent when the error is zero.
    pub z_score: Option<f64>,
}

impl EstimatorResult {
    pub fn from_moments(m: &Moments, method: MethodTag) -> Self {
        let std_error = match method {
            MethodTag::Mc => m.std_error(),
            MethodTag::Quadrature => 0.0,
        };
        Self {
            mean: m.mean,
            std_error,
            n_samples: m.count,
            method,
            z_score: (std_error > 0.0).then(|| m.mean / std_error),
        }
    }

    /// Whether the estimate is consistent with zero.
    pub fn consistent_with_zero(&self, tol: &Tolerances) -> bool {
        match (self.method, self.z_score) {
            (MethodTag::Mc, Some(z)) => z.abs() < tol.sigmas,
            (MethodTag::Mc, None) => self.mean.abs() <= tol.exact,
            (MethodTag::Quadrature, _) => self.mean.abs() < tol.quadrature,
        }
    }
}

/// Per-component disorder averages of a fixed-width evaluator.
#[derive(Debug, Clone, PartialEq)]
pub struct Averages {
    pub method: MethodTag,
    pub n_samples: u64,
    pub moments: Vec<Moments>,
}

impl Averages {
    pub fn mean(&self, k: usize) -> f64 {
        self.moments[k].mean
    }

    pub fn std_error(&self, k: usize) -> f64 {
        match self.method {
            MethodTag::Mc => self.moments[k].std_error(),
            MethodTag::Quadrature => 0.0,
        }
    }

    pub fn variance(&self, k: usize) -> f64 {
        self.moments[k].variance()
    }

    /// Largest `|value|` over all samples or nodes.
    pub fn max_abs(&self, k: usize) -> f64 {
        self.moments[k].max_abs
    }

    pub fn estimator(&self, k: usize) -> EstimatorResult {
        EstimatorResult::from_moments(&self.moments[k], self.method)
    }
}

/// `E f(J)` for every component of `f`, over the disorder of `model`.
pub fn disorder_average<F>(model: &Model, method: &Method, width: usize, f: F) -> Result<Averages>
where
    F: Fn(&DisorderSample) -> Result<Vec<f64>> + Sync,
{
    match *method {
        Method::Mc { n_samples, seed } => {
            if n_samples < 2 {
                return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
            }
            let moments = ordered_moments(n_samples, width, CHUNK, |k| {
                let values = f(&model.sample(seed, k)?)?;
                check_width(&values, width)?;
                Ok(values)
            })?;
            Ok(Averages {
                method: MethodTag::Mc,
                n_samples,
                moments,
            })
        }
        Method::Quadrature { nodes_per_dim } => {
            let spec = model.quadrature_spec(nodes_per_dim)?;
            let base = model.mean_sample()?;
            let q = quadrature_evaluate(&spec, &base, width, |s| {
                let values = f(s)?;
                check_width(&values, width)?;
                Ok(values)
            })?;
            let moments = q
                .means
                .iter()
                .zip(&q.max_abs)
                .map(|(&mean, &max_abs)| Moments {
                    count: q.nodes,
                    mean,
                    m2: 0.0,
                    max_abs,
                })
                .collect();
            Ok(Averages {
                method: MethodTag::Quadrature,
                n_samples: q.nodes,
                moments,
            })
        }
    }
}

fn check_width(values: &[f64], width: usize) -> Result<()> {
    if values.len() != width {
        return Err(Error::LengthMismatch {
            expected: width,
            got: values.len(),
        });
    }
    Ok(())
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("inverse temperature must be >= 0, got {beta}")));
    }
    Ok(())
}

fn check_gauge(model: &Model, axes: &[Axis], u: Axis) -> Result<()> {
    if axes.contains(&u) {
        return Err(Error::InvalidAxes(format!(
            "observable axes {axes:?} must differ from the gauge axis {u}"
        )));
    }
    model.params().validate_gauge_axis(u)
}

/// Sorted distinct sites, checked against the lattice.
fn site_set(sites: &[usize], n_sites: usize) -> Result<Vec<usize>> {
    let mut out = sites.to_vec();
    out.sort_unstable();
    if out.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidShape(format!("repeated site in {sites:?}")));
    }
    if let Some(&i) = out.iter().find(|&&i| i >= n_sites) {
        return Err(Error::SiteOutOfRange { index: i, n_sites });
    }
    Ok(out)
}

/// Sites of `sigma_X sigma_Y` for a common axis: the symmetric difference.
fn symmetric_difference(x: &[usize], y: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = x.iter().filter(|i| !y.contains(i)).copied().collect();
    out.extend(y.iter().filter(|i| !x.contains(i)));
    out.sort_unstable();
    out
}

/// Classical bit mask (site i on bit i).
fn classical_mask(sites: &[usize]) -> u64 {
    sites.iter().fold(0, |m, &i| m ^ (1 << i))
}

/// Gibbs state and its classical Nishimori-line partner for one sample.
fn paired_states(
    model: &Model,
    sample: &DisorderSample,
    beta: f64,
    u: Axis,
) -> Result<(ThermalState, ClassicalModel)> {
    Ok((model.thermal_state(sample, beta)?, model.nishimori_model(sample, u)?))
}

/// One paired identity `E a = E a c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub name: String,
    /// `E[a - a c]`.
    pub residual: EstimatorResult,
    /// `E a`.
    pub quantum: EstimatorResult,
    /// `E a c`.
    pub gauge: EstimatorResult,
    /// `Var(a - a c) / (Var a + Var a c)`: paired over unpaired variance.
    pub variance_ratio: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
    /// Set when the first Monte Carlo run failed and was repeated with twice
    /// the samples.
    pub retried: bool,
}

/// Per-sample `(a, c)` pairs for a list of named identities.
type PairEval<'a> = dyn Fn(&ThermalState, &ClassicalModel) -> Result<Vec<(f64, f64)>> + Sync + 'a;

fn paired_identities(
    model: &Model,
    beta: f64,
    u: Axis,
    names: &[&str],
    method: &Method,
    tol: &Tolerances,
    eval: &PairEval<'_>,
) -> Result<Vec<IdentityResidual>> {
    let run = |method: &Method| -> Result<Vec<IdentityResidual>> {
        let avg = disorder_average(model, method, 3 * names.len(), |sample| {
            let (state, classical) = paired_states(model, sample, beta, u)?;
            let pairs = eval(&state, &classical)?;
            Ok(pairs.iter().flat_map(|&(a, c)| [a - a * c, a, a * c]).collect())
        })?;
        Ok(names
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let residual = avg.estimator(3 * k);
                let variance_ratio = (avg.method == MethodTag::Mc).then(|| {
                    let unpaired = avg.variance(3 * k + 1) + avg.variance(3 * k + 2);
                    if unpaired > 0.0 {
                        avg.variance(3 * k) / unpaired
                    } else {
                        0.0
                    }
                });
                IdentityResidual {
                    name: name.to_string(),
                    residual,
                    quantum: avg.estimator(3 * k + 1),
                    gauge: avg.estimator(3 * k + 2),
                    variance_ratio,
                    tolerance: tol.statistical(avg.method, residual.std_error),
                    passed: residual.consistent_with_zero(tol),
                    retried: false,
                }
            })
            .collect())
    };
    let first = run(method)?;
    if method.tag() == MethodTag::Quadrature || first.iter().all(|r| r.passed) {
        return Ok(first);
    }
    let mut second = run(&method.doubled())?;
    second.iter_mut().for_each(|r| r.retried = true);
    Ok(second)
}

/// `E <sigma_X^w> = E <sigma_X^w> <tau_X>_N`.
pub fn one_point_identity(
    model: &Model,
    beta: f64,
    x: &[usize],
    w: Axis,
    u: Axis,
    method: &Method,
    tol: &Tolerances,
) -> Result<IdentityResidual> {
    check_beta(beta)?;
    check_gauge(model, &[w], u)?;
    let n = model.n_sites();
    let x = site_set(x, n)?;
    let pauli = PauliString::new(n, &x, w)?;
    let mask = classical_mask(&x);
    let eval = move |state: &ThermalState, classical: &ClassicalModel| {
        Ok(vec![(state.pauli_expectation(&pauli)?, classical.mask_expectations(&[mask])[0])])
    };
    let mut out = paired_identities(model, beta, u, &["one_point"], method, tol, &eval)?;
    Ok(out.remove(0))
}

/// Product form `E <s_X><s_Y> = E <s_X><s_Y><t_X t_Y>` and joint form
/// `E <s_X s_Y> = E <s_X s_Y><t_X t_Y>`.
#[allow(clippy::too_many_arguments)]
pub fn two_point_identities(
    model: &Model,
    beta: f64,
    x: &[usize],
    y: &[usize],
    w: Axis,
    u: Axis,
    method: &Method,
    tol: &Tolerances,
) -> Result<[IdentityResidual; 2]> {
    check_beta(beta)?;
    check_gauge(model, &[w], u)?;
    let n = model.n_sites();
    let (x, y) = (site_set(x, n)?, site_set(y, n)?);
    let xy = symmetric_difference(&x, &y);
    let (px, py, pxy) = (
        PauliString::new(n, &x, w)?,
        PauliString::new(n, &y, w)?,
        PauliString::new(n, &xy, w)?,
    );
    let mask = classical_mask(&xy);
    let eval = move |state: &ThermalState, classical: &ClassicalModel| {
        let c = classical.mask_expectations(&[mask])[0];
        let product = state.pauli_expectation(&px)? * state.pauli_expectation(&py)?;
        Ok(vec![(product, c), (state.pauli_expectation(&pxy)?, c)])
    };
    let out = paired_identities(
        model,
        beta,
        u,
        &["two_point_product", "two_point_joint"],
        method,
        tol,
        &eval,
    )?;
    Ok(out.try_into().expect("two residuals"))
}

/// `E (s_X, s_Y) = E (s_X, s_Y) <t_X t_Y>` and the truncated form.
#[allow(clippy::too_many_arguments)]
pub fn duhamel_identities(
    model: &Model,
    beta: f64,
    x: &[usize],
    y: &[usize],
    w: Axis,
    u: Axis,
    method: &Method,
    tol: &Tolerances,
) -> Result<[IdentityResidual; 2]> {
    check_beta(beta)?;
    check_gauge(model, &[w], u)?;
    let n = model.n_sites();
    let (x, y) = (site_set(x, n)?, site_set(y, n)?);
    let mask = classical_mask(&symmetric_difference(&x, &y));
    let (px, py) = (PauliString::new(n, &x, w)?, PauliString::new(n, &y, w)?);
    let eval = move |state: &ThermalState, classical: &ClassicalModel| {
        let c = classical.mask_expectations(&[mask])[0];
        let a = state.spectrum().pauli_to_eigenbasis(&px)?;
        let b = state.spectrum().pauli_to_eigenbasis(&py)?;
        Ok(vec![
            (state.duhamel_eigen(&a, &b)?, c),
            (state.truncated_duhamel_eigen(&a, &b)?, c),
        ])
    };
    let out = paired_identities(
        model,
        beta,
        u,
        &["duhamel", "truncated_duhamel"],
        method,
        tol,
        &eval,
    )?;
    Ok(out.try_into().expect("two residuals"))
}

/// Three-factor extension `E <s_X><s_Y><s_Z> = E <s_X><s_Y><s_Z><t_X t_Y t_Z>`.
#[allow(clippy::too_many_arguments)]
pub fn three_point_identity(
    model: &Model,
    beta: f64,
    sites: [&[usize]; 3],
    w: Axis,
    u: Axis,
    method: &Method,
    tol: &Tolerances,
) -> Result<IdentityResidual> {
    check_beta(beta)?;
    check_gauge(model, &[w], u)?;
    let n = model.n_sites();
    let sets = sites
        .iter()
        .map(|s| site_set(s, n))
        .collect::<Result<Vec<_>>>()?;
    let mask = sets.iter().fold(0, |m, s| m ^ classical_mask(s));
    let paulis = sets
        .iter()
        .map(|s| PauliString::new(n, s, w))
        .collect::<Result<Vec<_>>>()?;
    let eval = move |state: &ThermalState, classical: &ClassicalModel| {
        let mut product = 1.0;
        for p in &paulis {
            product *= state.pauli_expectation(p)?;
        }
        Ok(vec![(product, classical.mask_expectations(&[mask])[0])])
    };
    let mut out = paired_identities(model, beta, u, &["three_point"], method, tol, &eval)?;
    Ok(out.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    AtMost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Holds in expectation; checked against sampling error.
    Statistical,
    /// Holds on every empirical measure; checked to rounding.
    Exact,
}

/// One link `lhs (= | <=) rhs` of a bound chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub label: String,
    pub relation: Relation,
    pub kind: StepKind,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    /// `rhs - lhs` for inequalities, `-|lhs - rhs|` for equalities.
    pub margin: f64,
    pub holds: bool,
}

impl ChainStep {
    fn new(label: String, relation: Relation, kind: StepKind, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = match relation {
            Relation::Equal => -(lhs - rhs).abs(),
            Relation::AtMost => rhs - lhs,
        };
        Self {
            label,
            relation,
            kind,
            lhs,
            rhs,
            tolerance,
            margin,
            holds: margin >= -tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub method: MethodTag,
    pub n_samples: u64,
    /// The final inequality `lhs <= rhs` within `tolerance`.
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub holds: bool,
    pub steps: Vec<ChainStep>,
    /// Square-root arguments that came out negative and were set to zero.
    pub clipped: usize,
    pub clip_terms: usize,
    pub under_sampled: bool,
    /// Final inequality and every step hold, and clipping stayed rare.
    pub passed: bool,
}

impl ChainReport {
    #[allow(clippy::too_many_arguments)]
    fn finish(
        avg: &Averages,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        steps: Vec<ChainStep>,
        clipped: usize,
        clip_terms: usize,
        tol: &Tolerances,
    ) -> Self {
        let holds = lhs <= rhs + tolerance;
        let under_sampled =
            clip_terms > 0 && clipped as f64 / clip_terms as f64 > tol.max_clip_fraction;
        let passed = holds && !under_sampled && steps.iter().all(|s| s.holds);
        Self {
            method: avg.method,
            n_samples: avg.n_samples,
            lhs,
            rhs,
            tolerance,
            holds,
            steps,
            clipped,
            clip_terms,
            under_sampled,
            passed,
        }
    }
}

/// `sqrt(max(0, m))`, its propagated standard error, and whether it clipped.
/// Arguments within rounding of zero are not counted as clipped.
fn clipped_sqrt(m: f64, se: f64) -> (f64, f64, bool) {
    const ROUNDING: f64 = 1e-14;
    if m > 0.0 {
        let root = m.sqrt();
        (root, (se / (2.0 * root)).min(se.sqrt()), false)
    } else {
        (0.0, se.sqrt(), m < -ROUNDING)
    }
}

/// Per-site chain
/// `|E<s_i>| = |E<s_i><t_i>| <= E|<s_i>||<t_i>| <= E|<t_i>| <= sqrt(E<t_i>^2) = sqrt(E<t_i>)`,
/// then `E<o^w> <= mean_i sqrt(E<t_i>) <= sqrt(mean_i E<t_i>)`.
pub fn magnetization_bound_check(
    model: &Model,
    beta: f64,
    w: Axis,
    u: Axis,
    method: &Method,
    tol: &Tolerances,
) -> Result<ChainReport> {
    check_beta(beta)?;
    check_gauge(model, &[w], u)?;
    let n = model.n_sites();
    let paulis = (0..n)
        .map(|i| PauliString::new(n, &[i], w))
        .collect::<Result<Vec<_>>>()?;
    const W: usize = 8;
    let avg = disorder_average(model, method, W * n + 1, |sample| {
        let (state, classical) = paired_states(model, sample, beta, u)?;
        let taus = classical.magnetizations();
        let mut out = Vec::with_capacity(W * n + 1);
        let mut order = 0.0;
        for (p, &b) in paulis.iter().zip(&taus) {
            let a = state.pauli_expectation(p)?;
            order += a;
            out.extend([a, a * b, a.abs() * b.abs(), b.abs(), b * b, b, a - a * b, b * b - b]);
        }
        out.push(order / n as f64);
        Ok(out)
    })?;

    let stat = |se: f64| tol.statistical(avg.method, se);
    let mut steps = Vec::new();
    let mut clipped = 0;
    let (mut root_sum, mut root_se_sum, mut tau_sum) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let k = W * i;
        let m = |j: usize| avg.mean(k + j);
        let s = format!("[{i}]");
        steps.push(ChainStep::new(
            format!("E<s{s}> = E<s{s}><t{s}>"),
            Relation::Equal,
            StepKind::Statistical,
            m(0),
            m(1),
            stat(avg.std_error(k + 6)),
        ));
        let exact = tol.exact;
        steps.push(ChainStep::new(
            format!("|E<s{s}><t{s}>| <= E|<s{s}>||<t{s}>|"),
            Relation::AtMost,
            StepKind::Exact,
            m(1).abs(),
            m(2),
            exact,
        ));
        steps.push(ChainStep::new(
            format!("E|<s{s}>||<t{s}>| <= E|<t{s}>|"),
            Relation::AtMost,
            StepKind::Exact,
            m(2),
            m(3),
            exact,
        ));
        steps.push(ChainStep::new(
            format!("E|<t{s}>| <= sqrt(E<t{s}>^2)"),
            Relation::AtMost,
            StepKind::Exact,
            m(3),
            m(4).sqrt(),
            exact,
        ));
        steps.push(ChainStep::new(
            format!("E<t{s}>^2 = E<t{s}>"),
            Relation::Equal,
            StepKind::Statistical,
            m(4),
            m(5),
            stat(avg.std_error(k + 7)),
        ));
        let (root, root_se, clip) = clipped_sqrt(m(5), avg.std_error(k + 5));
        clipped += clip as usize;
        steps.push(ChainStep::new(
            format!("|E<s{s}>| <= sqrt(E<t{s}>)"),
            Relation::AtMost,
            StepKind::Statistical,
            m(0).abs(),
            root,
            stat(avg.std_error(k).hypot(root_se)),
        ));
        root_sum += root;
        root_se_sum += root_se;
        tau_sum += m(5).max(0.0);
    }
    let nf = n as f64;
    let order = W * n;
    let mean_root = root_sum / nf;
    let rhs = (tau_sum / nf).sqrt();
    steps.push(ChainStep::new(
        "E<o> <= mean_i sqrt(E<t_i>)".into(),
        Relation::AtMost,
        StepKind::Statistical,
        avg.mean(order),
        mean_root,
        stat(avg.std_error(order).hypot(root_se_sum / nf)),
    ));
    steps.push(ChainStep::new(
        "mean_i sqrt(E<t_i>) <= sqrt(mean_i E<t_i>)".into(),
        Relation::AtMost,
        StepKind::Exact,
        mean_root,
        rhs,
        tol.exact,
    ));
    let tau_se = (0..n).map(|i| avg.std_error(W * i + 5)).sum::<f64>() / nf;
    let (_, rhs_se, _) = clipped_sqrt(tau_sum / nf, tau_se);
    let lhs = avg.mean(order).abs();
    let tolerance = stat(avg.std_error(order).hypot(rhs_se));
    Ok(ChainReport::finish(&avg, lhs, rhs, tolerance, steps, clipped, n, tol))
}

/// `chi_L = (beta/N) |sum_ij E(s_i^w; s_j^v)| <= (2 beta/N) sum_ij sqrt(E<t_i t_j>)`
/// with every intermediate step of the chain.
#[allow(clippy::too_many_arguments)]
pub fn susceptibility_bound_check(
    model: &Model,
    beta: f64,
    v: Axis,
    w: Axis,
    u: Axis,
    method: &Method,
    tol: &Tolerances,
) -> Result<ChainReport> {
    check_beta(beta)?;
    check_gauge(model, &[v, w], u)?;
    let n = model.n_sites();
    let pairs = n * n;
    const W: usize = 7;
    let width = W * pairs + 3;
    let sw = (0..n)
        .map(|i| PauliString::new(n, &[i], w))
        .collect::<Result<Vec<_>>>()?;
    let sv = (0..n)
        .map(|i| PauliString::new(n, &[i], v))
        .collect::<Result<Vec<_>>>()?;
    let avg = disorder_average(model, method, width, |sample| {
        let (state, classical) = paired_states(model, sample, beta, u)?;
        let corr = classical.correlation_matrix();
        let to_eigen = |ps: &[PauliString]| -> Result<Vec<EigenOperator>> {
            ps.iter().map(|p| state.spectrum().pauli_to_eigenbasis(p)).collect()
        };
        let (ew, ev) = (to_eigen(&sw)?, to_eigen(&sv)?);
        let mut out = Vec::with_capacity(width);
        let (mut sum_t, mut sum_tc) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let t = state.truncated_duhamel_eigen(&ew[i], &ev[j])?;
                let c = corr[i][j];
                sum_t += t;
                sum_tc += t * c;
                out.extend([t, t * c, t.abs() * c.abs(), c.abs(), c * c, c, c * c - c]);
            }
        }
        out.extend([sum_t, sum_tc, sum_t - sum_tc]);
        Ok(out)
    })?;

    let stat = |se: f64| tol.statistical(avg.method, se);
    let total = W * pairs;
    let pair_sum = |j: usize| (0..pairs).map(|k| avg.mean(W * k + j)).sum::<f64>();
    let mut steps = vec![ChainStep::new(
        "sum E(s_i;s_j) = sum E(s_i;s_j)<t_i t_j>".into(),
        Relation::Equal,
        StepKind::Statistical,
        avg.mean(total),
        avg.mean(total + 1),
        stat(avg.std_error(total + 2)),
    )];
    let (abs_tc, abs_c, root_c2) = (
        pair_sum(2),
        pair_sum(3),
        (0..pairs).map(|k| avg.mean(W * k + 4).sqrt()).sum::<f64>(),
    );
    let exact = |scale: f64| tol.exact * scale.abs().max(1.0);
    steps.push(ChainStep::new(
        "|sum E(s_i;s_j)<t_i t_j>| <= sum E|(s_i;s_j)||<t_i t_j>|".into(),
        Relation::AtMost,
        StepKind::Exact,
        pair_sum(1).abs(),
        abs_tc,
        exact(abs_tc),
    ));
    let max_pair = (0..pairs).map(|k| avg.max_abs(W * k)).fold(0.0, f64::max);
    steps.push(ChainStep::new(
        "max_ij |(s_i;s_j)| <= 2".into(),
        Relation::AtMost,
        StepKind::Exact,
        max_pair,
        2.0,
        tol.exact,
    ));
    steps.push(ChainStep::new(
        "sum E|(s_i;s_j)||<t_i t_j>| <= 2 sum E|<t_i t_j>|".into(),
        Relation::AtMost,
        StepKind::Exact,
        abs_tc,
        2.0 * abs_c,
        exact(abs_c),
    ));
    steps.push(ChainStep::new(
        "sum E|<t_i t_j>| <= sum sqrt(E<t_i t_j>^2)".into(),
        Relation::AtMost,
        StepKind::Exact,
        abs_c,
        root_c2,
        exact(root_c2),
    ));
    let (mut clipped, mut root_sum, mut root_se_sum) = (0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let k = W * (i * n + j);
            if i != j {
                steps.push(ChainStep::new(
                    format!("E<t{i}t{j}>^2 = E<t{i}t{j}>"),
                    Relation::Equal,
                    StepKind::Statistical,
                    avg.mean(k + 4),
                    avg.mean(k + 5),
                    stat(avg.std_error(k + 6)),
                ));
            }
            let (root, root_se, clip) = clipped_sqrt(avg.mean(k + 5), avg.std_error(k + 5));
            clipped += (clip && i != j) as usize;
            root_sum += root;
            root_se_sum += root_se;
        }
    }
    let scale = beta / n as f64;
    let lhs = scale * avg.mean(total).abs();
    let rhs = 2.0 * scale * root_sum;
    let tolerance = stat((scale * avg.std_error(total)).hypot(2.0 * scale * root_se_sum));
    Ok(ChainReport::finish(&avg, lhs, rhs, tolerance, steps, clipped, n * (n - 1), tol))
}

/// Classical Nishimori-line models with `K_{X,p} ~ N(beta_p, 1)` on fixed bonds.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalEnsemble {
    n_sites: usize,
    families: Vec<BondFamily>,
    betas: Vec<f64>,
}

impl ClassicalEnsemble {
    pub fn new(n_sites: usize, families: Vec<BondFamily>, betas: Vec<f64>) -> Result<Self> {
        // validates sizes, sites and temperatures once
        ClassicalModel::new(
            n_sites,
            &families,
            families.iter().map(|f| vec![0.0; f.len()]).collect(),
            betas.clone(),
        )?;
        Ok(Self {
            n_sites,
            families,
            betas,
        })
    }

    /// The ensemble induced by `model` for gauge axis `u`.
    pub fn from_model(model: &Model, u: Axis) -> Result<Self> {
        Self::new(model.n_sites(), model.families().to_vec(), model.nishimori_betas(u)?)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn sample(&self, seed: u64, index: u64) -> Result<ClassicalModel> {
        let mut rng = sample_rng(seed, index);
        let couplings = self
            .families
            .iter()
            .zip(&self.betas)
            .map(|(f, &b)| {
                (0..f.len())
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        b + z
                    })
                    .collect()
            })
            .collect();
        ClassicalModel::new(self.n_sites, &self.families, couplings, self.betas.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Report {
    /// `(1/N) sum_ij sqrt(max(0, E<t_i t_j>))`.
    pub value: EstimatorResult,
    pub correlations: Vec<Vec<f64>>,
    pub clipped: usize,
    pub clip_terms: usize,
    pub under_sampled: bool,
    pub seed: u64,
}

pub fn a1_sum(
    ensemble: &ClassicalEnsemble,
    n_samples: u64,
    seed: u64,
    tol: &Tolerances,
) -> Result<A1Report> {
    if n_samples < 2 {
        return Err(Error::Domain("Monte Carlo needs at least 2 samples".into()));
    }
    let n = ensemble.n_sites;
    let moments = ordered_moments(n_samples, n * n, CHUNK, |k| {
        Ok::<_, Error>(ensemble.sample(seed, k)?.correlation_matrix().concat())
    })?;
    let (mut clipped, mut total, mut se) = (0, 0.0, 0.0);
    for (k, m) in moments.iter().enumerate() {
        let (root, root_se, clip) = clipped_sqrt(m.mean, m.std_error());
        clipped += (clip && k / n != k % n) as usize;
        total += root;
        se += root_se;
    }
    let nf = n as f64;
    let clip_terms = n * (n - 1);
    let std_error = se / nf;
    Ok(A1Report {
        value: EstimatorResult {
            mean: total / nf,
            std_error,
            n_samples,
            method: MethodTag::Mc,
            z_score: (std_error > 0.0).then(|| total / nf / std_error),
        },
        correlations: moments.chunks(n).map(|row| row.iter().map(|m| m.mean).collect()).collect(),
        clipped,
        clip_terms,
        under_sampled: clip_terms > 0
            && clipped as f64 / clip_terms as f64 > tol.max_clip_fraction,
        seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A2Report {
    pub step: f64,
    /// `[m(2h) - 2m(h) + 2m(-h) - m(-2h)] / (2h^3)`.
    pub third_difference: EstimatorResult,
    /// `[m(h) - 2m(0) + m(-h)] / h^2`, zero by the global flip symmetry.
    pub second_difference: EstimatorResult,
    pub second_tolerance: f64,
    pub second_vanishes: bool,
}

/// Finite differences of `m_L^w` in the uniform field mean `mu_1^v` around
/// `mu_1 = 0`, with common disorder across the stencil.
#[allow(clippy::too_many_arguments)]
pub fn a2_nonlinear_susceptibility(
    model: &Model,
    beta: f64,
    v: Axis,
    w: Axis,
    h: f64,
    method: &Method,
    tol: &Tolerances,
) -> Result<A2Report> {
    check_beta(beta)?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    model.params().validate_even()?;
    let field = model
        .field_family()
        .ok_or_else(|| Error::InvalidParams("field derivatives need a p = 1 family".into()))?;
    let mut params = model.params().clone();
    let p1 = params.get_mut(1).expect("field family has parameters");
    p1.mean = AxisTriple::splat(0.0);
    let centred = model.with_params(params)?;
    let avg = disorder_average(&centred, method, 2, |sample| {
        let m = |s: f64| -> Result<f64> {
            let mut shifted = sample.clone();
            shifted.families[field].values.iter_mut().for_each(|j| j[v] += s);
            centred.thermal_state(&shifted, beta)?.order_expectation(w)
        };
        let (m2, m1, m0, mm1, mm2) = (m(2.0 * h)?, m(h)?, m(0.0)?, m(-h)?, m(-2.0 * h)?);
        Ok(vec![
            (m2 - 2.0 * m1 + 2.0 * mm1 - mm2) / (2.0 * h * h * h),
            (m1 - 2.0 * m0 + mm1) / (h * h),
        ])
    })?;
    let second = avg.estimator(1);
    let second_tolerance = tol.statistical(avg.method, second.std_error).max(tol.quadrature);
    Ok(A2Report {
        step: h,
        third_difference: avg.estimator(0),
        second_difference: second,
        second_tolerance,
        second_vanishes: second.mean.abs() <= second_tolerance,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderParameters {
    pub beta: f64,
    /// `m_L^w = E<o^w>`.
    pub magnetization: AxisTriple<EstimatorResult>,
    /// `q_L^w = (1/N) sum_i E<s_i^w>^2`.
    pub overlap: AxisTriple<EstimatorResult>,
    /// `E log Z / N`.
    pub pressure: EstimatorResult,
}

pub fn finite_size_order_parameters(
    model: &Model,
    beta: f64,
    method: &Method,
) -> Result<OrderParameters> {
    check_beta(beta)?;
    let n = model.n_sites();
    let paulis = Axis::ALL
        .iter()
        .map(|&a| (0..n).map(|i| PauliString::new(n, &[i], a)).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    let avg = disorder_average(model, method, 7, |sample| {
        let state = model.thermal_state(sample, beta)?;
        let mut out = Vec::with_capacity(7);
        for ps in &paulis {
            let (mut m, mut q) = (0.0, 0.0);
            for p in ps {
                let s = state.pauli_expectation(p)?;
                m += s;
                q += s * s;
            }
            out.extend([m / n as f64, q / n as f64]);
        }
        out.push(state.free_energy_density(n));
        Ok(out)
    })?;
    let pick = |offset: usize| {
        AxisTriple::new(avg.estimator(offset), avg.estimator(2 + offset), avg.estimator(4 + offset))
    };
    Ok(OrderParameters {
        beta,
        magnetization: pick(0),
        overlap: pick(1),
        pressure: avg.estimator(6),
    })
}

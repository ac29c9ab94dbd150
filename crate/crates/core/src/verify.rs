//! Executable checks of the decoupling identities and inequalities.
//!
//! Every check returns a [`CheckResult`] carrying the measured sides of its
//! inequality. Exact checks enumerate the cube; Monte Carlo checks compare
//! Clopper–Pearson endpoints in the conservative direction and report
//! `indeterminate` when a lower bound sits below the resolution `10/count`.
//!
//! Results depend only on the inputs and the seed, never on the shard count.

use std::f64::consts::E;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coefficients::{
    apply_scheme_unchecked, check_compatible, synth, verify_moment_conditions, CouplingScheme, Hypothesis, Mode,
};
use crate::decoupling::{full, one_block, var_one_block, BlockPoly};
use crate::error::{Error, Result};
use crate::montecarlo::{
    estimate_tails, normal_upper_tail, seeded_rng, stream_id_for, stream_seed, InputDistribution, SampleSpec,
};
use crate::polynomial::{cube_values, point_from_index, random_poly, CubeEnumLimit, MultilinearPoly};

/// Tolerance of the coupling identity, relative to `Σ|a_S|·‖c‖₁`.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance of the moment conditions.
pub const MOMENT_TOL: f64 = 1e-10;
/// A Monte Carlo lower bound below `RESOLUTION_FACTOR / count` cannot be confirmed.
pub const RESOLUTION_FACTOR: f64 = 10.0;

pub const CHECK_NAMES: [&str; 8] = [
    "moment_conditions",
    "identity",
    "hypercon",
    "supnorms",
    "one_liner",
    "decoupled_tail",
    "tail_domination",
    "gaussian_dfko",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub status: CheckStatus,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    pub seed: Option<u64>,
    pub params: Value,
    pub details: Value,
}

impl CheckResult {
    fn new(name: &str, status: CheckStatus, lhs: f64, rhs: f64, seed: Option<u64>, params: Value, details: Value) -> Self {
        CheckResult {
            name: name.to_string(),
            status,
            passed: status == CheckStatus::Pass,
            lhs,
            rhs,
            slack: rhs - lhs,
            seed,
            params,
            details,
        }
    }

    fn from_bool(name: &str, ok: bool, lhs: f64, rhs: f64, seed: Option<u64>, params: Value, details: Value) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        CheckResult::new(name, status, lhs, rhs, seed, params, details)
    }
}

/// Knobs shared by all checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOptions {
    /// Monte Carlo sample count per estimated probability.
    pub count: u64,
    /// Worker threads; never affects results.
    pub shards: usize,
    pub limit: CubeEnumLimit,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            count: 100_000,
            shards: 1,
            limit: CubeEnumLimit::default(),
        }
    }
}

fn poly_params(poly: &MultilinearPoly) -> Value {
    json!({"n": poly.n(), "degree": poly.degree(), "terms": poly.len(), "homogeneous": poly.is_homogeneous()})
}

fn mode_for(poly: &MultilinearPoly) -> Mode {
    if poly.is_homogeneous() {
        Mode::Homogeneous
    } else {
        Mode::General
    }
}

/// The scheme of degree `deg f` matching the homogeneity of `f`.
pub fn scheme_for(poly: &MultilinearPoly, hypothesis: Hypothesis) -> Result<CouplingScheme> {
    if poly.degree() == 0 {
        return Err(Error::ConstantPolynomial);
    }
    synth(poly.degree(), hypothesis, mode_for(poly))
}

/// Tail-domination constant `D_k`: `m` under H1, `m·4·(e²/(2λ_min))^k` otherwise.
pub fn domination_constant(scheme: &CouplingScheme) -> f64 {
    let m = scheme.m() as f64;
    match scheme.hypothesis() {
        Hypothesis::H1 => m,
        _ => m * 4.0 * (E * E / (2.0 * scheme.lambda_min())).powi(scheme.k() as i32),
    }
}

fn domination_formula(h: Hypothesis) -> &'static str {
    match h {
        Hypothesis::H1 => "m",
        _ => "m*4*(e^2/(2*lambda_min))^k",
    }
}

/// Moment conditions of one scheme, within [`MOMENT_TOL`].
pub fn check_moment_conditions(scheme: &CouplingScheme) -> CheckResult {
    let report = verify_moment_conditions(scheme);
    let worst = report
        .rows
        .iter()
        .max_by(|a, b| a.residual.total_cmp(&b.residual))
        .copied();
    CheckResult::from_bool(
        "moment_conditions",
        report.max_residual <= MOMENT_TOL,
        report.max_residual,
        MOMENT_TOL,
        None,
        json!({"hypothesis": scheme.hypothesis(), "k": scheme.k(), "mode": scheme.mode()}),
        json!({"rows": report.rows.len(), "worst": worst, "m": scheme.m(), "c1_norm": scheme.c1_norm()}),
    )
}

/// `max |odec f(y,z) − Σ c_i f(α_i y + β_i z)| / (Σ|a_S|·‖c‖₁)` over Gaussian `(y, z)`.
pub fn check_identity(poly: &MultilinearPoly, scheme: &CouplingScheme, points: usize, seed: u64) -> Result<CheckResult> {
    check_compatible(scheme, poly)?;
    if points == 0 {
        return Err(Error::InvalidArgument("need at least one point".into()));
    }
    let n = poly.n();
    let block = one_block(poly);
    let mut rng = seeded_rng(seed, stream_id_for("identity"), 0);
    let mut yz = vec![0.0; 2 * n];
    let mut scratch = vec![0.0; n];
    let mut max_abs = 0.0f64;
    for _ in 0..points {
        for v in yz.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let (y, z) = yz.split_at(n);
        let lhs = block.base().eval_unchecked(&yz);
        let rhs = apply_scheme_unchecked(scheme, poly, y, z, &mut scratch);
        max_abs = max_abs.max((lhs - rhs).abs());
    }
    let scale = (poly.coefficient_l1() * scheme.c1_norm()).max(f64::MIN_POSITIVE);
    let normalized = max_abs / scale;
    Ok(CheckResult::from_bool(
        "identity",
        normalized <= IDENTITY_TOL,
        normalized,
        IDENTITY_TOL,
        Some(seed),
        json!({"poly": poly_params(poly), "hypothesis": scheme.hypothesis(), "mode": scheme.mode(), "k": scheme.k(), "points": points}),
        json!({"max_abs_residual": max_abs, "scale": scale}),
    ))
}

fn pr_above_mean(values: &[f64], mean: f64, slack: f64, weights: Option<&[f64]>) -> f64 {
    match weights {
        None => values.iter().filter(|&&v| v > mean + slack).count() as f64 / values.len() as f64,
        Some(w) => values
            .iter()
            .zip(w)
            .filter(|(&v, _)| v > mean + slack)
            .map(|(_, &w)| w)
            .sum(),
    }
}

/// `Pr[f(x) > E f] ≥ ¼e^{−2k}` by exhaustive enumeration over uniform ±1 inputs.
///
/// A point counts only when it clears the mean by more than the rounding
/// slack, so floating-point ties never inflate the probability.
pub fn check_hypercon(poly: &MultilinearPoly, limit: CubeEnumLimit) -> Result<CheckResult> {
    if poly.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let values = cube_values(poly, limit)?;
    let mean = poly.constant_term();
    let p = pr_above_mean(&values, mean, poly.rounding_slack(), None);
    let k = poly.degree();
    let bound = 0.25 * (-2.0 * k as f64).exp();
    Ok(CheckResult::from_bool(
        "hypercon",
        p >= bound,
        bound,
        p,
        None,
        json!({"poly": poly_params(poly), "distribution": "rademacher"}),
        json!({"probability": p, "bound": bound, "mean": mean}),
    ))
}

/// λ-biased variant: `Pr[f(x) > E f] ≥ ¼(2λ/e²)^k` where `x_i = +1` with
/// probability `1 − λ` (`plus_leaning[i]`) or `λ`.
pub fn check_hypercon_biased(
    poly: &MultilinearPoly,
    lambda: f64,
    plus_leaning: &[bool],
    limit: CubeEnumLimit,
) -> Result<CheckResult> {
    if !(lambda > 0.0 && lambda <= 0.5) {
        return Err(Error::InvalidLambda(lambda));
    }
    if plus_leaning.len() != poly.n() {
        return Err(Error::DimensionMismatch {
            expected: poly.n(),
            got: plus_leaning.len(),
        });
    }
    if poly.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let values = cube_values(poly, limit)?;
    let n = poly.n();
    let p_plus: Vec<f64> = plus_leaning.iter().map(|&p| if p { 1.0 - lambda } else { lambda }).collect();
    let weights: Vec<f64> = (0..values.len())
        .map(|idx| {
            (0..n)
                .map(|i| if idx >> i & 1 == 1 { 1.0 - p_plus[i] } else { p_plus[i] })
                .product()
        })
        .collect();
    // Independent coordinates: E f is f at the coordinate means.
    let means: Vec<f64> = p_plus.iter().map(|p| 2.0 * p - 1.0).collect();
    let mean = poly.eval_unchecked(&means);
    let p = pr_above_mean(&values, mean, 2.0 * poly.rounding_slack(), Some(&weights));
    let k = poly.degree();
    let bound = 0.25 * (2.0 * lambda / (E * E)).powi(k as i32);
    Ok(CheckResult::from_bool(
        "hypercon",
        p >= bound,
        bound,
        p,
        None,
        json!({"poly": poly_params(poly), "distribution": "biased", "lambda": lambda, "plus_leaning": plus_leaning}),
        json!({"probability": p, "bound": bound, "mean": mean}),
    ))
}

/// `‖dec f‖_∞ ≤ (2e)^k‖f‖_∞`, `‖f^{=j}‖_∞ ≤ 2^j‖f‖_∞` and `‖odec f‖_∞ ≤ ‖c‖₁(H2)·‖f‖_∞`,
/// all by enumeration. `lhs` is the worst ratio of left to right side.
pub fn check_supnorms(poly: &MultilinearPoly, limit: CubeEnumLimit) -> Result<CheckResult> {
    let k = poly.degree();
    if k == 0 {
        return Err(Error::ConstantPolynomial);
    }
    let n = poly.n();
    limit.check((n * k).max(2 * n))?;
    let sup = |p: &MultilinearPoly| p.sup_norm_cube(limit);
    let f_sup = sup(poly)?;
    let f_slack = poly.rounding_slack();

    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut ok = true;
    let mut record = |name: String, lhs: f64, rhs: f64, slack: f64| {
        let holds = lhs <= rhs + slack;
        ok &= holds;
        worst = worst.max(lhs / rhs);
        rows.push(json!({"inequality": name, "lhs": lhs, "rhs": rhs, "holds": holds}));
    };

    let dec = full(poly, k)?;
    let growth = (2.0 * E).powi(k as i32);
    record(
        format!("dec <= (2e)^{k}"),
        sup(dec.base())?,
        growth * f_sup,
        dec.base().rounding_slack() + growth * f_slack,
    );
    for j in 0..=k {
        let part = poly.degree_part(j);
        let factor = 2f64.powi(j as i32);
        record(
            format!("f^={j} <= 2^{j}"),
            sup(&part)?,
            factor * f_sup,
            part.rounding_slack() + factor * f_slack,
        );
    }
    let scheme = synth(k, Hypothesis::H2, Mode::General)?;
    let odec = one_block(poly);
    record(
        "odec <= c1(H2)".to_string(),
        sup(odec.base())?,
        scheme.c1_norm() * f_sup,
        odec.base().rounding_slack() + scheme.c1_norm() * f_slack,
    );
    Ok(CheckResult::from_bool(
        "supnorms",
        ok,
        worst,
        1.0,
        None,
        json!({"poly": poly_params(poly)}),
        json!({"f_sup": f_sup, "inequalities": rows}),
    ))
}

/// Scales `f` to sup-norm 1 on the cube, decouples it and divides by
/// `‖c‖₁` of the degree-`k` H2 general scheme, giving a one-block function
/// bounded by 1.
pub fn bounded_block(poly: &MultilinearPoly, limit: CubeEnumLimit) -> Result<BlockPoly> {
    if poly.is_constant() {
        return Err(Error::ConstantPolynomial);
    }
    let sup = poly.sup_norm_cube(limit)?;
    let scheme = synth(poly.degree(), Hypothesis::H2, Mode::General)?;
    Ok(one_block(&poly.scaled(1.0 / sup)).scaled(1.0 / scheme.c1_norm()))
}

/// For a one-block `f` bounded by 1 on the cube: `Σ‖g_i‖₁ ≤ 1`,
/// `‖g_i‖₂ ≤ e^{k−1}‖g_i‖₁` and `MaxInf[f] ≥ e^{2−2k}Var[f]²`.
/// `lhs` is the worst ratio of left to right side.
pub fn check_one_liner(block: &BlockPoly, limit: CubeEnumLimit) -> Result<CheckResult> {
    let base = block.base();
    let n = block.n();
    limit.check(2 * n)?;
    let slack = base.rounding_slack();
    let values = cube_values(base, limit)?;
    if let Some((idx, &v)) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
    {
        if v.abs() > 1.0 + slack {
            let witness = point_from_index(idx, 2 * n).iter().map(|&x| x as i8).collect();
            return Err(Error::NotBounded { witness, value: v });
        }
    }
    let k = block.degree();
    if k == 0 {
        return Err(Error::ZeroVariance);
    }

    let mut g_l1_sum = 0.0;
    let mut worst_hyper = 0.0f64;
    let mut hyper_ok = true;
    let hyper_factor = E.powi(k as i32 - 1);
    for g in block.derivatives() {
        let vals = cube_values(g, limit)?;
        let l1 = vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len() as f64;
        let l2 = g.squared_l2().sqrt();
        g_l1_sum += l1;
        if l2 > 0.0 {
            hyper_ok &= l2 <= hyper_factor * l1 + g.rounding_slack() * hyper_factor;
            worst_hyper = worst_hyper.max(l2 / (hyper_factor * l1));
        }
    }
    let l1_slack = n as f64 * slack;
    let l1_ok = g_l1_sum <= 1.0 + l1_slack;

    let var = base.variance();
    let (arg, max_inf) = base.max_influence().ok_or(Error::ZeroVariance)?;
    let floor = E.powi(2 - 2 * k as i32) * var * var;
    let inf_ok = max_inf >= floor * (1.0 - 1e-12);

    let worst = (g_l1_sum).max(worst_hyper).max(floor / max_inf);
    Ok(CheckResult::from_bool(
        "one_liner",
        l1_ok && hyper_ok && inf_ok,
        worst,
        1.0,
        None,
        json!({"n": n, "degree": k, "terms": base.len()}),
        json!({
            "sum_g_l1": g_l1_sum,
            "sum_g_l1_holds": l1_ok,
            "worst_l2_over_e_pow_l1": worst_hyper,
            "l2_l1_holds": hyper_ok,
            "max_influence": max_inf,
            "max_influence_at": arg,
            "variance": var,
            "influence_floor": floor,
            "influence_holds": inf_ok,
        }),
    ))
}

/// Lower bound on a Monte Carlo probability: fail when the upper CI lies
/// below it, indeterminate when it is under the resolution `10/count`.
fn lower_bound_status(ci_high: f64, bound: f64, count: u64) -> CheckStatus {
    if ci_high < bound {
        CheckStatus::Fail
    } else if bound < RESOLUTION_FACTOR / count as f64 {
        CheckStatus::Indeterminate
    } else {
        CheckStatus::Pass
    }
}

/// `Pr[|f(y,z)| > u] ≥ ¼e^{−2(2k−1)}·2Q(u/σ)` for Gaussian `(y, z)`, where
/// `σ² = Σ‖g_i‖₂²` and `k` is the degree of `f`.
pub fn check_decoupled_tail(block: &BlockPoly, u: f64, seed: u64, opts: &CheckOptions) -> Result<CheckResult> {
    if !(u > 0.0) {
        return Err(Error::InvalidArgument(format!("threshold {u} must be positive")));
    }
    let sigma2 = block.derivative_weight();
    if sigma2 <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    let sigma = sigma2.sqrt();
    let k = block.degree();
    let bound = 0.25 * (-2.0 * (2.0 * k as f64 - 1.0)).exp() * 2.0 * normal_upper_tail(u / sigma);
    let spec = SampleSpec::new(
        InputDistribution::Gaussian,
        2 * block.n(),
        opts.count,
        seed,
        stream_id_for("decoupled_tail"),
    )?;
    let base = block.base();
    let est = estimate_tails(|x| base.eval_unchecked(x), &spec, &[u], opts.shards)?.remove(0);
    let status = lower_bound_status(est.ci_high, bound, opts.count);
    Ok(CheckResult::new(
        "decoupled_tail",
        status,
        bound,
        est.ci_high,
        Some(seed),
        json!({"n": block.n(), "degree": k, "u": u, "count": opts.count}),
        json!({"sigma": sigma, "u_over_sigma": u / sigma, "p_hat": est.p_hat, "ci_low": est.ci_low, "ci_high": est.ci_high, "hits": est.hits, "bound": bound}),
    ))
}

fn hypothesis_distribution(h: Hypothesis) -> InputDistribution {
    match h {
        Hypothesis::H1 => InputDistribution::Gaussian,
        _ => InputDistribution::Rademacher,
    }
}

/// Exact `Pr[|v| > t]` counts, nudged by `slack` toward `lower` or upper.
fn exact_tail(values: &[f64], t: f64, slack: f64, lower: bool) -> f64 {
    let cut = if lower { t + slack } else { t - slack };
    values.iter().filter(|v| v.abs() > cut).count() as f64 / values.len() as f64
}

/// `Pr[|odec f| > C_k t] ≤ D_k·Pr[|f| > t]` at several thresholds, with
/// `C_k = ‖c‖₁` and `D_k` from [`domination_constant`].
///
/// Boolean hypotheses use exact enumeration when `2n` fits the cap; otherwise
/// the check passes iff `LHS ci_low ≤ D_k·RHS ci_high`.
pub fn check_tail_domination(
    poly: &MultilinearPoly,
    hypothesis: Hypothesis,
    thresholds: &[f64],
    seed: u64,
    opts: &CheckOptions,
) -> Result<Vec<CheckResult>> {
    if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidArgument(format!("threshold {t} must be positive")));
    }
    let scheme = scheme_for(poly, hypothesis)?;
    let c = scheme.c1_norm();
    let d = domination_constant(&scheme);
    let n = poly.n();
    let block = one_block(poly);
    let exact = hypothesis.is_boolean() && opts.limit.check(2 * n).is_ok();
    let scaled: Vec<f64> = thresholds.iter().map(|t| c * t).collect();

    let mut sides: Vec<(f64, f64, Value)> = Vec::with_capacity(thresholds.len());
    if exact {
        let odec_vals = cube_values(block.base(), opts.limit)?;
        let f_vals = cube_values(poly, opts.limit)?;
        for (&t, &ct) in thresholds.iter().zip(&scaled) {
            let lhs = exact_tail(&odec_vals, ct, block.base().rounding_slack(), true);
            let rhs = exact_tail(&f_vals, t, poly.rounding_slack(), false);
            sides.push((lhs, d * rhs, json!({"method": "exact", "lhs_probability": lhs, "rhs_probability": rhs})));
        }
    } else {
        let dist = hypothesis_distribution(hypothesis);
        let lhs_spec = SampleSpec::new(dist.clone(), 2 * n, opts.count, seed, stream_id_for("tail_domination/lhs"))?;
        let rhs_spec = SampleSpec::new(dist, n, opts.count, seed, stream_id_for("tail_domination/rhs"))?;
        let base = block.base();
        let lhs = estimate_tails(|x| base.eval_unchecked(x), &lhs_spec, &scaled, opts.shards)?;
        let rhs = estimate_tails(|x| poly.eval_unchecked(x), &rhs_spec, thresholds, opts.shards)?;
        for (l, r) in lhs.iter().zip(&rhs) {
            sides.push((
                l.ci_low,
                d * r.ci_high,
                json!({
                    "method": "monte_carlo",
                    "lhs_p_hat": l.p_hat, "lhs_ci": [l.ci_low, l.ci_high], "lhs_hits": l.hits,
                    "rhs_p_hat": r.p_hat, "rhs_ci": [r.ci_low, r.ci_high], "rhs_hits": r.hits,
                }),
            ));
        }
    }
    Ok(thresholds
        .iter()
        .zip(sides)
        .map(|(&t, (lhs, rhs, mut details))| {
            details["c_k"] = json!(c);
            details["d_k"] = json!(d);
            details["d_k_formula"] = json!(domination_formula(hypothesis));
            details["m"] = json!(scheme.m());
            details["lambda_min"] = json!(scheme.lambda_min());
            CheckResult::from_bool(
                "tail_domination",
                lhs <= rhs,
                lhs,
                rhs,
                (!exact).then_some(seed),
                json!({"poly": poly_params(poly), "hypothesis": hypothesis, "mode": scheme.mode(), "t": t, "count": opts.count}),
                details,
            )
        })
        .collect())
}

/// The chain `Pr[|f(x)| > t] ≥ D_k^{−1}·Pr[|odec f(y,z)| > C_k t]` under
/// Gaussian inputs (H1 scheme): passes iff `RHS ci_low / D_k ≤ LHS ci_high`.
/// Also reports the composed explicit bound `¼e^{−2(2k−1)}·2Q(C_k t/σ′)/D_k`
/// with `σ′² = Var[odec f]`.
pub fn check_gaussian_dfko(poly: &MultilinearPoly, t: f64, seed: u64, opts: &CheckOptions) -> Result<CheckResult> {
    let var = poly.variance();
    if !(var >= 1.0) {
        return Err(Error::VarianceBelowOne(var));
    }
    if !(t >= 1.0) {
        return Err(Error::InvalidArgument(format!("threshold {t} must be at least 1")));
    }
    let scheme = scheme_for(poly, Hypothesis::H1)?;
    let c = scheme.c1_norm();
    let d = domination_constant(&scheme);
    let n = poly.n();
    let block = one_block(poly);
    let base = block.base();
    let f_spec = SampleSpec::new(InputDistribution::Gaussian, n, opts.count, seed, stream_id_for("gaussian_dfko/f"))?;
    let o_spec = SampleSpec::new(InputDistribution::Gaussian, 2 * n, opts.count, seed, stream_id_for("gaussian_dfko/odec"))?;
    let f_est = estimate_tails(|x| poly.eval_unchecked(x), &f_spec, &[t], opts.shards)?.remove(0);
    let o_est = estimate_tails(|x| base.eval_unchecked(x), &o_spec, &[c * t], opts.shards)?.remove(0);
    let lhs = o_est.ci_low / d;
    let rhs = f_est.ci_high;
    let k = poly.degree();
    let sigma_prime = var_one_block(poly).sqrt();
    let composed = 0.25 * (-2.0 * (2.0 * k as f64 - 1.0)).exp() * 2.0 * normal_upper_tail(c * t / sigma_prime) / d;
    Ok(CheckResult::from_bool(
        "gaussian_dfko",
        lhs <= rhs,
        lhs,
        rhs,
        Some(seed),
        json!({"poly": poly_params(poly), "t": t, "count": opts.count}),
        json!({
            "c_k": c, "d_k": d, "m": scheme.m(),
            "f_p_hat": f_est.p_hat, "f_ci": [f_est.ci_low, f_est.ci_high],
            "odec_p_hat": o_est.p_hat, "odec_ci": [o_est.ci_low, o_est.ci_high],
            "sigma_prime": sigma_prime,
            "composed_bound": composed,
            "composed_bound_below_ci_high": composed <= f_est.ci_high,
        }),
    ))
}

/// Suite report: every check result in a fixed order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub count: u64,
    pub passed: usize,
    pub failed: usize,
    pub indeterminate: usize,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn new(seed: u64, count: u64, checks: Vec<CheckResult>) -> Self {
        let tally = |s| checks.iter().filter(|c| c.status == s).count();
        SuiteReport {
            seed,
            count,
            passed: tally(CheckStatus::Pass),
            failed: tally(CheckStatus::Fail),
            indeterminate: tally(CheckStatus::Indeterminate),
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// `0` all clear, `1` any failure, `3` when every check is indeterminate.
    pub fn exit_code(&self) -> i32 {
        if self.failed > 0 {
            1
        } else if self.indeterminate > 0 && self.passed == 0 {
            3
        } else {
            0
        }
    }
}

/// Seed of the `index`-th case of a named check.
pub fn case_seed(master: u64, name: &str, index: u64) -> u64 {
    stream_seed(master, stream_id_for(name), index)
}

fn unit_variance(poly: &MultilinearPoly) -> MultilinearPoly {
    // The small overshoot keeps Var ≥ 1 after rounding.
    poly.scaled((1.0 + 1e-12) / poly.variance().sqrt())
}

fn nonconstant(n: usize, k: usize, homogeneous: bool, seed: u64) -> Result<MultilinearPoly> {
    let mut s = seed;
    loop {
        let p = random_poly(n, k, homogeneous, s)?;
        if !p.is_constant() {
            return Ok(p);
        }
        s = stream_seed(s, 1, 0);
    }
}

/// Runs the built-in cases of one named check.
pub fn run_check(name: &str, master: u64, opts: &CheckOptions) -> Result<Vec<CheckResult>> {
    let seed = |i: u64| case_seed(master, name, i);
    let mut out = Vec::new();
    match name {
        "moment_conditions" => {
            for h in Hypothesis::ALL {
                for mode in [Mode::Homogeneous, Mode::General] {
                    if h == Hypothesis::H3 && mode == Mode::General {
                        continue;
                    }
                    for k in 1..=20 {
                        out.push(check_moment_conditions(&synth(k, h, mode)?));
                    }
                }
            }
        }
        "identity" => {
            let cases = [
                (Hypothesis::H1, true, 4),
                (Hypothesis::H1, false, 4),
                (Hypothesis::H2, true, 3),
                (Hypothesis::H2, false, 5),
                (Hypothesis::H3, true, 3),
            ];
            for (i, (h, homogeneous, k)) in cases.into_iter().enumerate() {
                let f = nonconstant(8, k, homogeneous, seed(i as u64))?;
                let scheme = scheme_for(&f, h)?;
                out.push(check_identity(&f, &scheme, 200, seed(i as u64))?);
            }
        }
        "hypercon" => {
            for (i, k) in (1..=4).enumerate() {
                out.push(check_hypercon(&nonconstant(12, k, false, seed(i as u64))?, opts.limit)?);
            }
            let f = nonconstant(10, 3, false, seed(4))?;
            let pattern: Vec<bool> = (0..10).map(|i| i % 3 == 0).collect();
            out.push(check_hypercon_biased(&f, 0.25, &pattern, opts.limit)?);
        }
        "supnorms" => {
            for (i, k) in (1..=3).enumerate() {
                out.push(check_supnorms(&nonconstant(6, k, false, seed(i as u64))?, opts.limit)?);
            }
        }
        "one_liner" => {
            for (i, k) in (1..=3).enumerate() {
                let f = nonconstant(5, k, false, seed(i as u64))?;
                out.push(check_one_liner(&bounded_block(&f, opts.limit)?, opts.limit)?);
            }
        }
        "decoupled_tail" => {
            let linear = one_block(&MultilinearPoly::from_index_lists(1, [(vec![0u32], 1.0)])?);
            out.push(check_decoupled_tail(&linear, 1.0, seed(0), opts)?);
            let cubic = one_block(&nonconstant(6, 3, true, seed(1))?);
            let sigma = cubic.derivative_weight().sqrt();
            out.push(check_decoupled_tail(&cubic, sigma, seed(1), opts)?);
            out.push(check_decoupled_tail(&cubic, 2.0 * sigma, seed(2), opts)?);
            out.push(check_decoupled_tail(&cubic, 10.0 * sigma, seed(3), opts)?);
        }
        "tail_domination" => {
            let x0x1 = MultilinearPoly::from_index_lists(2, [(vec![0u32, 1], 1.0)])?;
            out.extend(check_tail_domination(&x0x1, Hypothesis::H1, &[1.0], seed(0), opts)?);
            let f = nonconstant(6, 3, false, seed(1))?;
            out.extend(check_tail_domination(&f, Hypothesis::H1, &[0.5, 1.0, 2.0], seed(1), opts)?);
            let g = nonconstant(6, 3, false, seed(2))?;
            out.extend(check_tail_domination(&g, Hypothesis::H2, &[0.5, 1.0, 2.0], seed(2), opts)?);
            let h = nonconstant(6, 2, true, seed(3))?;
            out.extend(check_tail_domination(&h, Hypothesis::H3, &[1.0], seed(3), opts)?);
        }
        "gaussian_dfko" => {
            let x0 = MultilinearPoly::from_index_lists(1, [(vec![0u32], 1.0)])?;
            out.push(check_gaussian_dfko(&x0, 1.0, seed(0), opts)?);
            let f = unit_variance(&nonconstant(6, 2, false, seed(1))?);
            out.push(check_gaussian_dfko(&f, 1.0, seed(1), opts)?);
        }
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown check {name:?}; expected one of {}",
                CHECK_NAMES.join(", ")
            )))
        }
    }
    Ok(out)
}

/// Runs every built-in check in a fixed order.
pub fn run_suite(master: u64, opts: &CheckOptions) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for name in CHECK_NAMES {
        checks.extend(run_check(name, master, opts)?);
    }
    Ok(SuiteReport::new(master, opts.count, checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::SchemeEntry;

    fn poly(n: usize, terms: &[(&[u32], f64)]) -> MultilinearPoly {
        MultilinearPoly::from_index_lists(n, terms.iter().map(|(v, c)| (v.to_vec(), *c))).unwrap()
    }

    fn opts(count: u64) -> CheckOptions {
        CheckOptions {
            count,
            ..CheckOptions::default()
        }
    }

    #[test]
    fn identity_passes_and_detects_perturbation() {
        let f = random_poly(8, 4, true, 11).unwrap();
        let s = synth(4, Hypothesis::H1, Mode::Homogeneous).unwrap();
        let r = check_identity(&f, &s, 300, 5).unwrap();
        assert_eq!(r.status, CheckStatus::Pass, "{r:?}");
        let g = random_poly(8, 5, false, 12).unwrap();
        let s2 = synth(g.degree(), Hypothesis::H2, Mode::General).unwrap();
        assert!(check_identity(&g, &s2, 300, 5).unwrap().passed);

        let mut entries: Vec<SchemeEntry> = s.entries().to_vec();
        entries[0].c += 1e-3;
        let bad = CouplingScheme::from_parts(s.hypothesis(), s.k(), s.mode(), entries).unwrap();
        assert_eq!(check_identity(&f, &bad, 300, 5).unwrap().status, CheckStatus::Fail);
    }

    #[test]
    fn identity_rejects_incompatible_scheme() {
        let f = random_poly(5, 3, false, 1).unwrap();
        let s = synth(3, Hypothesis::H1, Mode::Homogeneous).unwrap();
        assert!(matches!(check_identity(&f, &s, 10, 1), Err(Error::SchemeMismatch(_))));
    }

    #[test]
    fn hypercon_parity_is_one_half() {
        let f = poly(3, &[(&[0, 1, 2], 1.0)]);
        let r = check_hypercon(&f, CubeEnumLimit::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.rhs, 0.5);
        assert!(check_hypercon(&MultilinearPoly::constant(3, 1.0), CubeEnumLimit::default()).is_err());
    }

    #[test]
    fn hypercon_biased_dictator() {
        // f = x0 with Pr[x0 = +1] = λ: Pr[f > E f] = λ.
        let f = poly(1, &[(&[0], 1.0)]);
        let r = check_hypercon_biased(&f, 0.2, &[false], CubeEnumLimit::default()).unwrap();
        assert!((r.rhs - 0.2).abs() < 1e-15);
        assert!(r.passed);
        assert!(check_hypercon_biased(&f, 0.7, &[false], CubeEnumLimit::default()).is_err());
    }

    #[test]
    fn supnorms_on_x0x1() {
        let f = poly(2, &[(&[0, 1], 1.0)]);
        let r = check_supnorms(&f, CubeEnumLimit::default()).unwrap();
        assert!(r.passed);
        let rows = r.details["inequalities"].as_array().unwrap();
        assert_eq!(rows[0]["lhs"], json!(1.0));
        let x0 = poly(1, &[(&[0], 1.0)]);
        let r = check_supnorms(&x0, CubeEnumLimit::default()).unwrap();
        let rows = r.details["inequalities"].as_array().unwrap();
        assert_eq!(rows.last().unwrap()["lhs"], json!(1.0));
        let big = random_poly(8, 3, false, 1).unwrap();
        assert!(matches!(
            check_supnorms(&big, CubeEnumLimit::new(20).unwrap()),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn one_liner_examples() {
        let f = BlockPoly::from_base(poly(4, &[(&[0, 3], 1.0)]), 2).unwrap();
        let r = check_one_liner(&f, CubeEnumLimit::default()).unwrap();
        assert!(r.passed);
        assert_eq!(r.details["max_influence"], json!(1.0));
        match check_one_liner(&f.scaled(2.0), CubeEnumLimit::default()) {
            Err(Error::NotBounded { witness, value }) => {
                assert_eq!(value.abs(), 2.0);
                assert_eq!(witness.len(), 4);
            }
            other => panic!("{other:?}"),
        }
        let g = random_poly(5, 3, false, 9).unwrap();
        let b = bounded_block(&g, CubeEnumLimit::default()).unwrap();
        assert!(check_one_liner(&b, CubeEnumLimit::default()).unwrap().passed);
    }

    #[test]
    fn decoupled_tail_linear_and_indeterminate() {
        let lin = one_block(&poly(1, &[(&[0], 1.0)]));
        let r = check_decoupled_tail(&lin, 1.0, 3, &opts(50_000)).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
        let far = check_decoupled_tail(&lin, 10.0, 3, &opts(50_000)).unwrap();
        assert_eq!(far.status, CheckStatus::Indeterminate);
        assert!(matches!(
            check_decoupled_tail(&lin, 0.0, 3, &opts(10)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn tail_domination_exact_and_vacuous() {
        let f = poly(4, &[(&[0, 1], 1.0), (&[2, 3], 0.5)]);
        let rs = check_tail_domination(&f, Hypothesis::H2, &[0.5, 1.0], 1, &opts(1000)).unwrap();
        assert!(rs.iter().all(|r| r.passed));
        assert_eq!(rs[0].details["method"], json!("exact"));
        assert_eq!(rs[0].seed, None);
        // |0.1 x0| never exceeds 1, and neither does its decoupling past ‖c‖₁.
        let small = poly(1, &[(&[0], 0.1)]);
        let r = &check_tail_domination(&small, Hypothesis::H1, &[1.0], 1, &opts(20_000)).unwrap()[0];
        assert!(r.passed);
        assert_eq!(r.lhs, 0.0);
    }

    #[test]
    fn gaussian_dfko_preconditions() {
        let x0 = poly(1, &[(&[0], 1.0)]);
        assert!(check_gaussian_dfko(&x0, 1.0, 2, &opts(20_000)).unwrap().passed);
        let half = poly(1, &[(&[0], 0.5)]);
        assert!(matches!(
            check_gaussian_dfko(&half, 1.0, 2, &opts(10)),
            Err(Error::VarianceBelowOne(_))
        ));
        assert!(check_gaussian_dfko(&x0, 0.5, 2, &opts(10)).is_err());
    }

    #[test]
    fn report_exit_codes() {
        let mk = |s| CheckResult::new("x", s, 0.0, 1.0, None, json!({}), json!({}));
        let r = SuiteReport::new(1, 1, vec![mk(CheckStatus::Pass), mk(CheckStatus::Indeterminate)]);
        assert_eq!(r.exit_code(), 0);
        let r = SuiteReport::new(1, 1, vec![mk(CheckStatus::Indeterminate)]);
        assert_eq!(r.exit_code(), 3);
        let r = SuiteReport::new(1, 1, vec![mk(CheckStatus::Fail), mk(CheckStatus::Indeterminate)]);
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn unknown_check_is_an_error() {
        assert!(run_check("nope", 1, &CheckOptions::default()).is_err());
    }
}

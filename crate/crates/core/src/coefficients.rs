//! Coupling schemes `(α_i, β_i, c_i)` with `odec f(y, z) = Σ_i c_i f(α_i y + β_i z)`.
//!
//! For a homogeneous degree-`k` polynomial the identity is equivalent to the
//! moment conditions
//!
//! ```text
//! Σ_i c_i α_i^{k−t} β_i^t = 1 if t = k − 1, else 0      (0 ≤ t ≤ k)
//! ```
//!
//! a Vandermonde system in `Δ_i = β_i/α_i`. Its solution is
//!
//! ```text
//! c_i = α_i^{−k} (Δ_i − Σ_j Δ_j) / Π_{j≠i} (Δ_i − Δ_j)
//! ```
//!
//! which is evaluated here as a sum of logarithms with the sign tracked
//! separately, never by a linear solve. The differences `Δ_i − Δ_j` are formed
//! exactly from the rational labels before taking logarithms.
//!
//! Ratios follow a (hyper)harmonic progression over the labels:
//!
//! | hypothesis | labels (odd `k`)               | `α_i`                  | `β_i`                        |
//! |------------|--------------------------------|------------------------|------------------------------|
//! | H1         | `±1, …, ±(k−1)/2, ±1/2`        | `i/√(k²+i²)`           | `k/√(k²+i²)`                 |
//! | H3         | same                           | `i/(k^{3/2}+|i|)`      | `k^{3/2}/(k^{3/2}+|i|)`      |
//! | H2         | `1, …, k, 1/2` (any `k`)       | `i²/(k²+i²)`           | `k²/(k²+i²)`                 |
//!
//! For even `k`, H1/H3 use `0, ±1, …, ±(k−2)/2, ±1/2` with `(α_0, β_0) = (1, 0)`;
//! the label-0 coefficient is exactly zero and is dropped.
//!
//! General (non-homogeneous) mode:
//! * H2 pairs every entry with `(−α_i, β_i, −c_i)` and halves both, which
//!   kills the `t = k′` moments of every lower degree `k′`.
//! * H1 splits `f` into odd and even parts; the degree-`k` and degree-`(k−1)`
//!   schemes each cover one parity, realized through `f(±(α y + β z))`.
//! * H3 is homogeneous-only.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{format_error, MultilinearPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Standard Gaussian inputs.
    H1,
    /// Uniform ±1 inputs.
    H2,
    /// Uniform ±1 inputs, homogeneous polynomials only.
    H3,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 3] = [Hypothesis::H1, Hypothesis::H2, Hypothesis::H3];

    pub fn is_boolean(self) -> bool {
        !matches!(self, Hypothesis::H1)
    }

    /// Exponent `p` in the growth `‖c‖₁ = O(k^p)`.
    pub fn growth_exponent(self) -> f64 {
        match self {
            Hypothesis::H1 => 1.0,
            Hypothesis::H2 => 2.0,
            Hypothesis::H3 => 1.5,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
        };
        f.write_str(s)
    }
}

impl FromStr for Hypothesis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "H1" => Ok(Hypothesis::H1),
            "H2" => Ok(Hypothesis::H2),
            "H3" => Ok(Hypothesis::H3),
            _ => Err(Error::InvalidArgument(format!("unknown hypothesis {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Homogeneous,
    General,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Homogeneous => "homogeneous",
            Mode::General => "general",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "homogeneous" => Ok(Mode::Homogeneous),
            "general" => Ok(Mode::General),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?}"))),
        }
    }
}

/// An exact rational index label such as `-3` or `1/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    num: i64,
    den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Label {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidArgument("label denominator is zero".into()));
        }
        let g = gcd(num, den).max(1);
        let sign = den.signum();
        Ok(Label {
            num: sign * num / g,
            den: sign * den / g,
        })
    }

    pub fn integer(i: i64) -> Self {
        Label { num: i, den: 1 }
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::ops::Neg for Label {
    type Output = Label;
    fn neg(self) -> Label {
        Label {
            num: -self.num,
            den: self.den,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("malformed label {s:?}"));
        match s.split_once('/') {
            Some((p, q)) => Label::new(
                p.trim().parse().map_err(|_| bad())?,
                q.trim().parse().map_err(|_| bad())?,
            ),
            None => Ok(Label::integer(s.trim().parse().map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Label {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeEntry {
    pub label: Label,
    pub alpha: f64,
    pub beta: f64,
    pub c: f64,
}

/// A synthesized coupling scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingScheme {
    hypothesis: Hypothesis,
    k: usize,
    mode: Mode,
    entries: Vec<SchemeEntry>,
    c1_norm: f64,
    lambda_min: f64,
}

/// Tolerance on the per-entry normalization `α²+β² = 1` or `|α|+|β| = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

impl CouplingScheme {
    /// Assembles a scheme from explicit entries. Zero-`c` entries are dropped
    /// and the normalization of each `(α, β)` is checked; the moment
    /// conditions are not (see [`verify_moment_conditions`]).
    pub fn from_parts(hypothesis: Hypothesis, k: usize, mode: Mode, entries: Vec<SchemeEntry>) -> Result<Self> {
        if k == 0 {
            return Err(Error::DegreeTooSmall { k, min: 1 });
        }
        if hypothesis == Hypothesis::H3 && mode == Mode::General {
            return Err(Error::InvalidHypothesisMode {
                hypothesis: hypothesis.to_string(),
                mode: mode.to_string(),
            });
        }
        let entries: Vec<SchemeEntry> = entries.into_iter().filter(|e| e.c != 0.0).collect();
        for e in &entries {
            let norm = match hypothesis {
                Hypothesis::H1 => e.alpha * e.alpha + e.beta * e.beta,
                _ => e.alpha.abs() + e.beta.abs(),
            };
            if !((norm - 1.0).abs() <= NORMALIZATION_TOL) || !e.c.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "entry {} violates the {hypothesis} normalization (norm {norm})",
                    e.label
                )));
            }
        }
        if entries.is_empty() {
            return Err(Error::InvalidArgument("scheme has no non-zero entries".into()));
        }
        let c1_norm = entries.iter().map(|e| e.c.abs()).sum();
        let lambda_min = entries
            .iter()
            .map(|e| e.alpha.abs().min(e.beta.abs()))
            .fold(f64::INFINITY, f64::min);
        Ok(CouplingScheme {
            hypothesis,
            k,
            mode,
            entries,
            c1_norm,
            lambda_min,
        })
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.hypothesis
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn entries(&self) -> &[SchemeEntry] {
        &self.entries
    }

    /// Number of entries `m`.
    pub fn m(&self) -> usize {
        self.entries.len()
    }

    /// `‖c‖₁`.
    pub fn c1_norm(&self) -> f64 {
        self.c1_norm
    }

    /// `min_i min(|α_i|, |β_i|)`.
    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&SchemeFile {
            hypothesis: self.hypothesis,
            k: self.k,
            mode: self.mode,
            entries: self.entries.clone(),
        })
        .expect("schemes always serialize")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&SchemeFile {
            hypothesis: self.hypothesis,
            k: self.k,
            mode: self.mode,
            entries: self.entries.clone(),
        })
        .expect("schemes always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SchemeFile = serde_json::from_str(text).map_err(format_error)?;
        CouplingScheme::from_parts(file.hypothesis, file.k, file.mode, file.entries)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeFile {
    hypothesis: Hypothesis,
    k: usize,
    mode: Mode,
    entries: Vec<SchemeEntry>,
}

/// Index labels for the homogeneous degree-`k` scheme.
pub fn index_set(k: usize, hypothesis: Hypothesis) -> Result<Vec<Label>> {
    if k == 0 {
        return Err(Error::DegreeTooSmall { k, min: 1 });
    }
    let half = Label { num: 1, den: 2 };
    let labels = match hypothesis {
        Hypothesis::H2 => (1..=k as i64).map(Label::integer).chain([half]).collect(),
        Hypothesis::H1 | Hypothesis::H3 => {
            let mut out = Vec::with_capacity(k + 1);
            let top = if k % 2 == 1 {
                (k as i64 - 1) / 2
            } else {
                out.push(Label::integer(0));
                (k as i64 - 2) / 2
            };
            for i in 1..=top {
                out.push(Label::integer(i));
                out.push(Label::integer(-i));
            }
            out.push(half);
            out.push(-half);
            out
        }
    };
    Ok(labels)
}

/// `(α, β)` for one label.
fn alpha_beta(k: usize, hypothesis: Hypothesis, label: Label) -> (f64, f64) {
    if label.is_zero() {
        return (1.0, 0.0);
    }
    let i = label.to_f64();
    let kf = k as f64;
    match hypothesis {
        Hypothesis::H1 => {
            let r = kf.hypot(i);
            (i / r, kf / r)
        }
        Hypothesis::H3 => {
            let s = kf.powf(1.5);
            let d = s + i.abs();
            (i / d, s / d)
        }
        Hypothesis::H2 => {
            let (i2, k2) = (i * i, kf * kf);
            let d = k2 + i2;
            (i2 / d, k2 / d)
        }
    }
}

/// `Δ_i = scale · r_i` with `r_i` an exact rational in lowest terms
/// (`r = 1/i` for H1/H3, `1/i²` for H2, `0` for label 0).
#[derive(Clone, Copy)]
struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    fn of(hypothesis: Hypothesis, label: Label) -> Ratio {
        if label.is_zero() {
            return Ratio { num: 0, den: 1 };
        }
        // 1/(p/q) = q/p
        let (p, q) = (label.num as i128, label.den as i128);
        let (num, den) = match hypothesis {
            Hypothesis::H2 => (q * q, p * p),
            _ => (q, p),
        };
        if den < 0 {
            Ratio { num: -num, den: -den }
        } else {
            Ratio { num, den }
        }
    }

    /// `self − other` as (numerator, denominator) without rounding.
    fn minus(self, o: Ratio) -> (i128, i128) {
        (self.num * o.den - o.num * self.den, self.den * o.den)
    }
}

fn delta_scale(k: usize, hypothesis: Hypothesis) -> f64 {
    let kf = k as f64;
    match hypothesis {
        Hypothesis::H1 => kf,
        Hypothesis::H2 => kf * kf,
        Hypothesis::H3 => kf.powf(1.5),
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// The homogeneous degree-`k` scheme, zero-`c` entries already removed.
fn homogeneous_entries(k: usize, hypothesis: Hypothesis) -> Result<Vec<SchemeEntry>> {
    let labels = index_set(k, hypothesis)?;
    let ratios: Vec<Ratio> = labels.iter().map(|&l| Ratio::of(hypothesis, l)).collect();
    let scale = delta_scale(k, hypothesis);
    let ln_scale = scale.ln();
    // Symmetric label sets have Σ_j Δ_j = 0 exactly.
    let symmetric = labels.iter().all(|l| labels.contains(&-*l));
    let ratio_sum = if symmetric {
        0.0
    } else {
        compensated_sum(ratios.iter().map(|r| r.num as f64 / r.den as f64))
    };

    let mut entries = Vec::with_capacity(labels.len());
    for (i, &label) in labels.iter().enumerate() {
        // On a symmetric label set c_{−i} = −c_i; mirror so the pair is exact.
        if symmetric && label < Label::integer(0) {
            if let Some(twin) = entries.iter().find(|e: &&SchemeEntry| e.label == -label) {
                let twin = *twin;
                entries.push(SchemeEntry {
                    label,
                    alpha: -twin.alpha,
                    beta: twin.beta,
                    c: -twin.c,
                });
            }
            continue;
        }
        let (alpha, beta) = alpha_beta(k, hypothesis, label);
        let ri = ratios[i].num as f64 / ratios[i].den as f64;
        // Numerator Δ_i − Σ_j Δ_j in units of `scale`.
        let numer = if symmetric { ri } else { ri - ratio_sum };
        if numer == 0.0 {
            continue;
        }
        let mut ln_mag = numer.abs().ln() + ln_scale;
        let mut negative = numer < 0.0;
        for (j, rj) in ratios.iter().enumerate() {
            if j == i {
                continue;
            }
            let (dn, dd) = ratios[i].minus(*rj);
            ln_mag -= ln_scale + (dn.unsigned_abs() as f64).ln() - (dd.unsigned_abs() as f64).ln();
            negative ^= (dn < 0) != (dd < 0);
        }
        ln_mag -= k as f64 * alpha.abs().ln();
        if alpha < 0.0 && k % 2 == 1 {
            negative = !negative;
        }
        let magnitude = ln_mag.exp();
        let c = if negative { -magnitude } else { magnitude };
        entries.push(SchemeEntry {
            label,
            alpha,
            beta,
            c,
        });
    }
    Ok(entries)
}

/// Synthesizes the coupling scheme for degree `k`.
pub fn synth(k: usize, hypothesis: Hypothesis, mode: Mode) -> Result<CouplingScheme> {
    if k == 0 {
        return Err(Error::DegreeTooSmall { k, min: 1 });
    }
    let entries = match (hypothesis, mode) {
        (Hypothesis::H3, Mode::General) => {
            return Err(Error::InvalidHypothesisMode {
                hypothesis: hypothesis.to_string(),
                mode: mode.to_string(),
            })
        }
        (_, Mode::Homogeneous) => homogeneous_entries(k, hypothesis)?,
        (Hypothesis::H2, Mode::General) => homogeneous_entries(k, hypothesis)?
            .into_iter()
            .flat_map(|e| {
                [
                    SchemeEntry { c: e.c / 2.0, ..e },
                    SchemeEntry {
                        alpha: -e.alpha,
                        c: -e.c / 2.0,
                        ..e
                    },
                ]
            })
            .collect(),
        (Hypothesis::H1, Mode::General) => {
            let (odd_k, even_k) = if k % 2 == 1 { (k, k - 1) } else { (k - 1, k) };
            let mut out = Vec::new();
            for e in homogeneous_entries(odd_k, hypothesis)? {
                out.push(SchemeEntry { c: e.c / 2.0, ..e });
                out.push(SchemeEntry {
                    alpha: -e.alpha,
                    beta: -e.beta,
                    c: -e.c / 2.0,
                    ..e
                });
            }
            // Degree 0 has no even scheme: odec of a constant is zero and the
            // odd entries above already cancel every even-degree term.
            if even_k > 0 {
                for e in homogeneous_entries(even_k, hypothesis)? {
                    out.push(SchemeEntry { c: e.c / 2.0, ..e });
                    out.push(SchemeEntry {
                        alpha: -e.alpha,
                        beta: -e.beta,
                        c: e.c / 2.0,
                        ..e
                    });
                }
            }
            out
        }
    };
    CouplingScheme::from_parts(hypothesis, k, mode, entries)
}

/// One checked moment `Σ_i c_i α_i^{k′−t} β_i^t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub degree: usize,
    pub t: usize,
    pub value: f64,
    pub target: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub rows: Vec<MomentRow>,
    pub max_residual: f64,
}

/// Degrees `k′` whose moment conditions a scheme must satisfy.
pub fn covered_degrees(scheme: &CouplingScheme) -> Vec<usize> {
    let k = scheme.k;
    match (scheme.mode, scheme.hypothesis) {
        (Mode::General, _) => (0..=k).collect(),
        (Mode::Homogeneous, Hypothesis::H1) => (0..=k).rev().step_by(2).collect(),
        (Mode::Homogeneous, _) => vec![k],
    }
}

/// Evaluates every moment condition in log-magnitude form with compensated summation.
pub fn verify_moment_conditions(scheme: &CouplingScheme) -> MomentReport {
    let mut rows = Vec::new();
    for degree in covered_degrees(scheme) {
        for t in 0..=degree {
            let value = compensated_sum(scheme.entries.iter().map(|e| {
                let a_pow = (degree - t) as f64;
                let b_pow = t as f64;
                if (e.alpha == 0.0 && a_pow > 0.0) || (e.beta == 0.0 && b_pow > 0.0) {
                    return 0.0;
                }
                let mut ln = e.c.abs().ln();
                if a_pow > 0.0 {
                    ln += a_pow * e.alpha.abs().ln();
                }
                if b_pow > 0.0 {
                    ln += b_pow * e.beta.abs().ln();
                }
                let negative = (e.c < 0.0)
                    ^ (e.alpha < 0.0 && (degree - t) % 2 == 1)
                    ^ (e.beta < 0.0 && t % 2 == 1);
                if negative {
                    -ln.exp()
                } else {
                    ln.exp()
                }
            }));
            let target = if t + 1 == degree { 1.0 } else { 0.0 };
            rows.push(MomentRow {
                degree,
                t,
                value,
                target,
                residual: (value - target).abs(),
            });
        }
    }
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    MomentReport { rows, max_residual }
}

/// Checks that `poly` is within the scheme's reach.
pub fn check_compatible(scheme: &CouplingScheme, poly: &MultilinearPoly) -> Result<()> {
    if poly.degree() > scheme.k {
        return Err(Error::SchemeMismatch(format!(
            "polynomial degree {} exceeds scheme degree {}",
            poly.degree(),
            scheme.k
        )));
    }
    if scheme.mode == Mode::Homogeneous
        && !poly.is_zero()
        && !(poly.is_homogeneous() && poly.degree() == scheme.k)
    {
        return Err(Error::SchemeMismatch(format!(
            "homogeneous scheme of degree {} needs a homogeneous degree-{} polynomial",
            scheme.k, scheme.k
        )));
    }
    Ok(())
}

/// `Σ_i c_i f(α_i y + β_i z)`.
pub fn apply_scheme(scheme: &CouplingScheme, poly: &MultilinearPoly, y: &[f64], z: &[f64]) -> Result<f64> {
    check_compatible(scheme, poly)?;
    for v in [y, z] {
        if v.len() != poly.n() {
            return Err(Error::DimensionMismatch {
                expected: poly.n(),
                got: v.len(),
            });
        }
    }
    let mut point = vec![0.0; poly.n()];
    Ok(apply_scheme_unchecked(scheme, poly, y, z, &mut point))
}

/// [`apply_scheme`] without validation; `point` is scratch space of length `n`.
pub fn apply_scheme_unchecked(
    scheme: &CouplingScheme,
    poly: &MultilinearPoly,
    y: &[f64],
    z: &[f64],
    point: &mut [f64],
) -> f64 {
    let mut acc = 0.0;
    for e in &scheme.entries {
        for ((p, yi), zi) in point.iter_mut().zip(y).zip(z) {
            *p = e.alpha * yi + e.beta * zi;
        }
        acc += e.c * poly.eval_unchecked(point);
    }
    acc
}

/// One row of the `‖c‖₁` growth table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub k: usize,
    pub c1_norm: f64,
    pub lambda_min: f64,
    pub m: usize,
    /// `‖c‖₁ / k^p` with `p` the hypothesis growth exponent.
    pub ratio: f64,
    /// Explicit bound where one is known: `20k` (H1 homogeneous, odd `k`) or `40k` (H1 general).
    pub bound: Option<f64>,
    pub within_bound: Option<bool>,
}

pub fn explicit_c1_bound(k: usize, hypothesis: Hypothesis, mode: Mode) -> Option<f64> {
    match (hypothesis, mode) {
        (Hypothesis::H1, Mode::Homogeneous) if k % 2 == 1 => Some(20.0 * k as f64),
        (Hypothesis::H1, Mode::General) => Some(40.0 * k as f64),
        _ => None,
    }
}

pub fn c1_growth_table(k_max: usize, hypothesis: Hypothesis, mode: Mode) -> Result<Vec<GrowthRow>> {
    if k_max == 0 {
        return Err(Error::DegreeTooSmall { k: 0, min: 1 });
    }
    (1..=k_max)
        .map(|k| {
            let s = synth(k, hypothesis, mode)?;
            let bound = explicit_c1_bound(k, hypothesis, mode);
            Ok(GrowthRow {
                k,
                c1_norm: s.c1_norm,
                lambda_min: s.lambda_min,
                m: s.m(),
                ratio: s.c1_norm / (k as f64).powf(hypothesis.growth_exponent()),
                bound,
                within_bound: bound.map(|b| s.c1_norm <= b),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoupling::one_block;
    use crate::polynomial::random_poly;

    fn labels(v: &[&str]) -> Vec<Label> {
        v.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn index_sets() {
        assert_eq!(index_set(3, Hypothesis::H1).unwrap(), labels(&["1", "-1", "1/2", "-1/2"]));
        assert_eq!(index_set(4, Hypothesis::H1).unwrap(), labels(&["0", "1", "-1", "1/2", "-1/2"]));
        assert_eq!(index_set(2, Hypothesis::H2).unwrap(), labels(&["1", "2", "1/2"]));
        assert_eq!(index_set(1, Hypothesis::H3).unwrap(), labels(&["1/2", "-1/2"]));
        assert!(index_set(0, Hypothesis::H1).is_err());
        for k in 1..30 {
            for h in Hypothesis::ALL {
                let l = index_set(k, h).unwrap();
                assert_eq!(l.len(), k + 1);
                let mut d = l.clone();
                d.sort();
                d.dedup();
                assert_eq!(d.len(), l.len());
            }
        }
    }

    #[test]
    fn label_text_forms() {
        let l: Label = "-2/4".parse().unwrap();
        assert_eq!(l, Label::new(-1, 2).unwrap());
        assert_eq!(l.to_string(), "-1/2");
        assert_eq!(Label::integer(3).to_string(), "3");
        assert!("x/2".parse::<Label>().is_err());
        assert!("1/0".parse::<Label>().is_err());
    }

    #[test]
    fn degree_one_gaussian_scheme() {
        // Oracle: solve c1 α1 + c2 α2 = 1, c1 β1 + c2 β2 = 0 directly by Cramer's rule.
        let s = synth(1, Hypothesis::H1, Mode::Homogeneous).unwrap();
        let e = s.entries();
        assert_eq!(e.len(), 2);
        let (a1, b1, a2, b2) = (e[0].alpha, e[0].beta, e[1].alpha, e[1].beta);
        let det = a1 * b2 - a2 * b1;
        let (c1, c2) = (b2 / det, -b1 / det);
        assert!((e[0].c - c1).abs() < 1e-15 && (e[1].c - c2).abs() < 1e-15);
        let r5 = 5f64.sqrt();
        assert_eq!(e[0].label.to_string(), "1/2");
        assert!((e[0].alpha - 1.0 / r5).abs() < 1e-16);
        assert!((e[0].beta - 2.0 / r5).abs() < 1e-16);
        assert!((e[0].c - r5 / 2.0).abs() < 1e-15);
        assert!((e[1].alpha + 1.0 / r5).abs() < 1e-16);
        assert!((e[1].c + r5 / 2.0).abs() < 1e-15);
        assert!((s.c1_norm() - r5).abs() < 1e-15);
        let rep = verify_moment_conditions(&s);
        assert!(rep.max_residual < 1e-14);
    }

    #[test]
    fn moment_targets() {
        let s = synth(5, Hypothesis::H1, Mode::Homogeneous).unwrap();
        let rep = verify_moment_conditions(&s);
        let at = |d, t| rep.rows.iter().find(|r| r.degree == d && r.t == t).unwrap().target;
        assert_eq!(at(5, 4), 1.0);
        assert_eq!(at(5, 5), 0.0);
        assert_eq!(at(5, 0), 0.0);
        assert_eq!(at(3, 2), 1.0);
        assert_eq!(covered_degrees(&s), vec![5, 3, 1]);
    }

    #[test]
    fn even_k_drops_label_zero() {
        for k in (2..=20).step_by(2) {
            for h in [Hypothesis::H1, Hypothesis::H3] {
                let s = synth(k, h, Mode::Homogeneous).unwrap();
                assert_eq!(s.m(), k);
                assert!(s.entries().iter().all(|e| !e.label.is_zero()));
                assert!(s.lambda_min() > 0.0);
            }
        }
    }

    #[test]
    fn invariants_hold_for_all_schemes() {
        for k in 1..=20 {
            for h in Hypothesis::ALL {
                for mode in [Mode::Homogeneous, Mode::General] {
                    if h == Hypothesis::H3 && mode == Mode::General {
                        assert!(synth(k, h, mode).is_err());
                        continue;
                    }
                    let s = synth(k, h, mode).unwrap();
                    assert!(s.m() <= 4 * (k + 1));
                    assert!(s.lambda_min() > 0.0);
                    assert!(s.lambda_min() >= 1.0 / (20.0 * s.c1_norm()));
                    let rep = verify_moment_conditions(&s);
                    assert!(rep.max_residual <= 1e-10, "{h} {mode} k={k}: {}", rep.max_residual);
                }
            }
        }
    }

    #[test]
    fn odd_gaussian_antisymmetry() {
        for k in (1..=21).step_by(2) {
            let s = synth(k, Hypothesis::H1, Mode::Homogeneous).unwrap();
            for e in s.entries() {
                let twin = s.entries().iter().find(|o| o.label == -e.label).unwrap();
                assert_eq!(twin.alpha, -e.alpha);
                assert_eq!(twin.beta, e.beta);
                assert_eq!(twin.c, -e.c);
            }
        }
    }

    #[test]
    fn closed_form_coefficient_bounds() {
        let sqrt_e = std::f64::consts::E.sqrt();
        for k in (3..=49).step_by(2) {
            let s = synth(k, Hypothesis::H1, Mode::Homogeneous).unwrap();
            for e in s.entries() {
                let i = e.label.to_f64();
                if i >= 1.0 {
                    assert!(e.c.abs() <= sqrt_e * k as f64 / i.powi(3), "k={k} i={i}");
                }
                if e.label == Label::new(1, 2).unwrap() {
                    assert!(e.c.abs() <= 4.0 * k as f64);
                }
            }
        }
    }

    #[test]
    fn gaussian_norm_bounds() {
        for k in 1..=49 {
            let h = synth(k, Hypothesis::H1, Mode::Homogeneous).unwrap();
            if k % 2 == 1 {
                assert!(h.c1_norm() <= 20.0 * k as f64);
            }
            let g = synth(k, Hypothesis::H1, Mode::General).unwrap();
            assert!(g.c1_norm() <= 40.0 * k as f64);
        }
    }

    #[test]
    fn h3_general_rejected() {
        assert_eq!(
            synth(3, Hypothesis::H3, Mode::General),
            Err(Error::InvalidHypothesisMode {
                hypothesis: "H3".into(),
                mode: "general".into()
            })
        );
        assert!(synth(0, Hypothesis::H1, Mode::Homogeneous).is_err());
    }

    #[test]
    fn apply_matches_one_block() {
        for seed in 0..10u64 {
            let f = random_poly(5, 3, false, seed).unwrap();
            let b = one_block(&f);
            for h in [Hypothesis::H1, Hypothesis::H2] {
                let s = synth(3, h, Mode::General).unwrap();
                let y = [0.3, -1.2, 0.7, 2.0, -0.4];
                let z = [1.1, 0.5, -0.9, 0.2, 1.7];
                let lhs = b.eval(&y, &z).unwrap();
                let rhs = apply_scheme(&s, &f, &y, &z).unwrap();
                let scale = f.coefficient_l1() * s.c1_norm();
                assert!((lhs - rhs).abs() <= 1e-12 * scale, "seed {seed} {h}");
            }
        }
    }

    #[test]
    fn apply_on_constant_is_zero_and_diagonal_is_k_f() {
        let s = synth(3, Hypothesis::H2, Mode::General).unwrap();
        let c = MultilinearPoly::constant(2, 4.0);
        assert!(apply_scheme(&s, &c, &[1.0, -1.0], &[0.5, 0.5]).unwrap().abs() < 1e-12);
        let f = random_poly(6, 3, true, 1).unwrap();
        let h = synth(3, Hypothesis::H1, Mode::Homogeneous).unwrap();
        let x = [0.2, -0.3, 1.5, 0.9, -1.1, 0.4];
        let v = apply_scheme(&h, &f, &x, &x).unwrap();
        assert!((v - 3.0 * f.eval(&x).unwrap()).abs() < 1e-12 * f.coefficient_l1() * h.c1_norm());
    }

    #[test]
    fn apply_rejects_mismatches() {
        let s = synth(2, Hypothesis::H1, Mode::Homogeneous).unwrap();
        let general = random_poly(4, 2, false, 3).unwrap();
        let f = MultilinearPoly::from_index_lists(4, [(vec![0u32], 1.0), (vec![0, 1], 1.0)]).unwrap();
        assert!(matches!(apply_scheme(&s, &f, &[0.0; 4], &[0.0; 4]), Err(Error::SchemeMismatch(_))));
        let cubic = random_poly(4, 3, true, 3).unwrap();
        assert!(matches!(apply_scheme(&s, &cubic, &[0.0; 4], &[0.0; 4]), Err(Error::SchemeMismatch(_))));
        let g = synth(2, Hypothesis::H1, Mode::General).unwrap();
        assert!(apply_scheme(&g, &general, &[0.0; 3], &[0.0; 4]).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = synth(4, Hypothesis::H2, Mode::General).unwrap();
        assert_eq!(CouplingScheme::from_json(&s.to_json()).unwrap(), s);
        let text = r#"{"hypothesis":"H1","k":1,"mode":"homogeneous","entries":[{"label":"1/2","alpha":0.5,"beta":0.5,"c":1.0}]}"#;
        assert!(CouplingScheme::from_json(text).is_err());
    }

    #[test]
    fn growth_table_shape() {
        let rows = c1_growth_table(9, Hypothesis::H1, Mode::Homogeneous).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[2].bound, Some(60.0));
        assert_eq!(rows[2].within_bound, Some(true));
        assert_eq!(rows[1].bound, None);
        assert!(c1_growth_table(0, Hypothesis::H2, Mode::General).is_err());
    }
}

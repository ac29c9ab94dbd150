//! One-block and full decoupling.
//!
//! `odec f(y, z) = Σ_S a_S Σ_{i∈S} y_i z_{S∖i}` lives on `2n` variables with
//! the `y`-block at indices `0..n` and the `z`-block at `n..2n`.
//! `dec f` over `k` blocks puts block `b` at indices `b·n..(b+1)·n` and
//! replaces each `x_S` by the average over injective block assignments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{format_error, Monomial, MultilinearPoly, PolyRecord};

/// A polynomial in which every monomial has exactly one `y`-variable:
/// `f(y, z) = Σ_i y_i g_i(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPoly {
    base: MultilinearPoly,
    n: usize,
    /// `g_i` in local `z` coordinates: variable `j` of `g_i` is `z_j`.
    derivatives: Vec<MultilinearPoly>,
}

impl BlockPoly {
    /// Wraps a polynomial over `2n` variables, checking the one-block structure.
    pub fn from_base(base: MultilinearPoly, n: usize) -> Result<Self> {
        if base.n() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                got: base.n(),
            });
        }
        let mut derivs: Vec<BTreeMap<Monomial, f64>> = vec![BTreeMap::new(); n];
        for (m, c) in base.terms() {
            let ys: Vec<u32> = m.vars().iter().copied().filter(|&v| (v as usize) < n).collect();
            if ys.len() != 1 {
                return Err(Error::NotOneBlock(format!(
                    "monomial {m} has {} y-variables",
                    ys.len()
                )));
            }
            let rest = m.vars()[1..].iter().map(|&v| v - n as u32).collect();
            derivs[ys[0] as usize].insert(Monomial::new(rest)?, *c);
        }
        let derivatives = derivs
            .into_iter()
            .map(|map| MultilinearPoly::from_terms(n, map))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockPoly {
            base,
            n,
            derivatives,
        })
    }

    pub fn base(&self) -> &MultilinearPoly {
        &self.base
    }

    /// Size of each block.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn derivatives(&self) -> &[MultilinearPoly] {
        &self.derivatives
    }

    pub fn degree(&self) -> usize {
        self.base.degree()
    }

    pub fn eval(&self, y: &[f64], z: &[f64]) -> Result<f64> {
        for v in [y, z] {
            if v.len() != self.n {
                return Err(Error::DimensionMismatch {
                    expected: self.n,
                    got: v.len(),
                });
            }
        }
        let mut point = Vec::with_capacity(2 * self.n);
        point.extend_from_slice(y);
        point.extend_from_slice(z);
        Ok(self.base.eval_unchecked(&point))
    }

    /// `Σ_i y_i g_i(z)`, evaluated through the derivative list.
    pub fn eval_via_derivatives(&self, y: &[f64], z: &[f64]) -> Result<f64> {
        let mut acc = 0.0;
        for (yi, g) in y.iter().zip(&self.derivatives) {
            acc += yi * g.eval(z)?;
        }
        Ok(acc)
    }

    pub fn scaled(&self, factor: f64) -> BlockPoly {
        BlockPoly {
            base: self.base.scaled(factor),
            n: self.n,
            derivatives: self.derivatives.iter().map(|g| g.scaled(factor)).collect(),
        }
    }

    /// `σ² = Σ_i ‖g_i‖₂²`.
    pub fn derivative_weight(&self) -> f64 {
        self.derivatives.iter().map(MultilinearPoly::squared_l2).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&OneBlockFile {
            one_block: true,
            n: self.n,
            poly: PolyRecord::from(&self.base),
        })
        .expect("block records always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: OneBlockFile = serde_json::from_str(text).map_err(format_error)?;
        file.into_block()
    }
}

/// A polynomial over `k` blocks of `n` variables using at most one variable per block.
#[derive(Clone, Debug, PartialEq)]
pub struct FullDecoupledPoly {
    base: MultilinearPoly,
    k: usize,
    n: usize,
}

impl FullDecoupledPoly {
    pub fn from_base(base: MultilinearPoly, k: usize, n: usize) -> Result<Self> {
        if base.n() != k * n {
            return Err(Error::DimensionMismatch {
                expected: k * n,
                got: base.n(),
            });
        }
        for (m, _) in base.terms() {
            let mut blocks: Vec<usize> = m.vars().iter().map(|&v| v as usize / n).collect();
            blocks.dedup();
            if blocks.len() != m.degree() {
                return Err(Error::InvalidArgument(format!(
                    "monomial {m} uses two variables from one block"
                )));
            }
        }
        Ok(FullDecoupledPoly { base, k, n })
    }

    pub fn base(&self) -> &MultilinearPoly {
        &self.base
    }

    pub fn blocks(&self) -> usize {
        self.k
    }

    pub fn per_block(&self) -> usize {
        self.n
    }

    pub fn index(&self, block: usize, var: usize) -> usize {
        block * self.n + var
    }

    /// Evaluates at the concatenation of `blocks` (each of length `n`).
    pub fn eval_blocks(&self, blocks: &[&[f64]]) -> Result<f64> {
        if blocks.len() != self.k {
            return Err(Error::DimensionMismatch {
                expected: self.k,
                got: blocks.len(),
            });
        }
        let point: Vec<f64> = blocks.concat();
        self.base.eval(&point)
    }

    /// `dec f(x, x, …, x)`.
    pub fn eval_diagonal(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let point: Vec<f64> = x.repeat(self.k);
        Ok(self.base.eval_unchecked(&point))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&FullFile {
            blocks: self.k,
            per_block: self.n,
            poly: PolyRecord::from(&self.base),
        })
        .expect("block records always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FullFile = serde_json::from_str(text).map_err(format_error)?;
        file.into_full()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OneBlockFile {
    one_block: bool,
    n: usize,
    poly: PolyRecord,
}

impl OneBlockFile {
    fn into_block(self) -> Result<BlockPoly> {
        if !self.one_block {
            return Err(Error::InvalidArgument("\"one_block\" must be true".into()));
        }
        BlockPoly::from_base(MultilinearPoly::try_from(self.poly)?, self.n)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FullFile {
    blocks: usize,
    per_block: usize,
    poly: PolyRecord,
}

impl FullFile {
    fn into_full(self) -> Result<FullDecoupledPoly> {
        FullDecoupledPoly::from_base(MultilinearPoly::try_from(self.poly)?, self.blocks, self.per_block)
    }
}

/// Any of the three polynomial file kinds, told apart by their header fields.
#[derive(Clone, Debug, PartialEq)]
pub enum PolyFile {
    Plain(MultilinearPoly),
    OneBlock(BlockPoly),
    Full(FullDecoupledPoly),
}

impl PolyFile {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(format_error)?;
        if value.get("one_block").is_some() {
            BlockPoly::from_json(text).map(PolyFile::OneBlock)
        } else if value.get("blocks").is_some() {
            FullDecoupledPoly::from_json(text).map(PolyFile::Full)
        } else {
            crate::polynomial::parse(text).map(PolyFile::Plain)
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            PolyFile::Plain(p) => crate::polynomial::serialize(p),
            PolyFile::OneBlock(b) => b.to_json(),
            PolyFile::Full(d) => d.to_json(),
        }
    }

    /// The underlying polynomial, whatever its block structure.
    pub fn poly(&self) -> &MultilinearPoly {
        match self {
            PolyFile::Plain(p) => p,
            PolyFile::OneBlock(b) => b.base(),
            PolyFile::Full(d) => d.base(),
        }
    }
}

/// One-block decoupling `odec f`.
pub fn one_block(poly: &MultilinearPoly) -> BlockPoly {
    let n = poly.n();
    let offset = n as u32;
    let mut map = BTreeMap::new();
    for (m, c) in poly.terms() {
        for &i in m.vars() {
            let mut vars = Vec::with_capacity(m.degree());
            vars.push(i);
            vars.extend(m.vars().iter().filter(|&&v| v != i).map(|&v| v + offset));
            map.insert(Monomial::new(vars).expect("y index precedes shifted z indices"), *c);
        }
    }
    let base = MultilinearPoly::from_terms(2 * n, map).expect("indices stay below 2n");
    let derivatives = (0..n)
        .map(|i| poly.derivative(i).expect("index below n"))
        .collect();
    BlockPoly {
        base,
        n,
        derivatives,
    }
}

fn falling_ratio(k: usize, j: usize) -> f64 {
    // (k−j)!/k! = 1 / (k (k−1) ⋯ (k−j+1))
    1.0 / (0..j).map(|i| (k - i) as f64).product::<f64>()
}

fn injections(len: usize, k: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
    if current.len() == len {
        out.push(current.clone());
        return;
    }
    for b in 0..k {
        if !used[b] {
            used[b] = true;
            current.push(b);
            injections(len, k, current, used, out);
            current.pop();
            used[b] = false;
        }
    }
}

/// Full decoupling `dec f` over `k` blocks.
pub fn full(poly: &MultilinearPoly, k: usize) -> Result<FullDecoupledPoly> {
    if k < poly.degree() {
        return Err(Error::TooFewBlocks {
            k,
            degree: poly.degree(),
        });
    }
    let n = poly.n();
    let mut cache: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    let mut map = BTreeMap::new();
    for (m, c) in poly.terms() {
        let j = m.degree();
        let assignments = cache.entry(j).or_insert_with(|| {
            let mut out = Vec::new();
            injections(j, k, &mut Vec::new(), &mut vec![false; k], &mut out);
            out
        });
        let weight = c * falling_ratio(k, j);
        for b in assignments.iter() {
            let vars = m
                .vars()
                .iter()
                .zip(b)
                .map(|(&v, &blk)| (blk * n) as u32 + v)
                .collect();
            map.insert(Monomial::from_unsorted(vars)?, weight);
        }
    }
    let base = MultilinearPoly::from_terms(k * n, map)?;
    Ok(FullDecoupledPoly { base, k, n })
}

/// `dec f` with the block count equal to the degree.
pub fn full_default(poly: &MultilinearPoly) -> FullDecoupledPoly {
    full(poly, poly.degree()).expect("degree blocks always suffice")
}

/// `Var[odec f] = Σ_j j·W_j`.
pub fn var_one_block(poly: &MultilinearPoly) -> f64 {
    poly.terms()
        .iter()
        .map(|(m, c)| m.degree() as f64 * c * c)
        .sum()
}

/// `Var[dec f] = Σ_{S≠∅} a_S² (k−|S|)!/k!` in closed form. For homogeneous
/// `f` of degree `k` this is `Var[odec f] / (k·k!)`.
pub fn var_full(poly: &MultilinearPoly, k: usize) -> Result<f64> {
    if k < poly.degree() {
        return Err(Error::TooFewBlocks {
            k,
            degree: poly.degree(),
        });
    }
    Ok(poly
        .terms()
        .iter()
        .filter(|(m, _)| m.degree() > 0)
        .map(|(m, c)| c * c * falling_ratio(k, m.degree()))
        .sum())
}

/// Where a coordinate of the reduced function's input comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuerySource {
    /// Read coordinate `i` of the original input.
    Coordinate(usize),
    /// A padding variable fixed to `+1`; never queried.
    ConstantOne,
}

/// `g = (2e)^{-k} dec f'`, where `f'` pads every monomial of `f` to degree `k`
/// with dummy variables fixed at `+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AaReduction {
    pub g: FullDecoupledPoly,
    pub scale: f64,
    pub query_map: Vec<QuerySource>,
}

impl AaReduction {
    /// Input for `g` built from `x` through the query map.
    pub fn lift(&self, x: &[f64]) -> Vec<f64> {
        self.query_map
            .iter()
            .map(|q| match q {
                QuerySource::Coordinate(i) => x[*i],
                QuerySource::ConstantOne => 1.0,
            })
            .collect()
    }

    /// `scale · g(x, …, x, dummies = +1)`, which equals `f(x)`.
    pub fn reconstruct(&self, x: &[f64]) -> Result<f64> {
        let real = self
            .query_map
            .iter()
            .filter(|q| matches!(q, QuerySource::Coordinate(_)))
            .count()
            / self.g.blocks().max(1);
        if x.len() != real {
            return Err(Error::DimensionMismatch {
                expected: real,
                got: x.len(),
            });
        }
        Ok(self.scale * self.g.base().eval_unchecked(&self.lift(x)))
    }
}

pub fn aa_reduction(poly: &MultilinearPoly, k: usize) -> Result<AaReduction> {
    if poly.degree() > k {
        return Err(Error::TooFewBlocks {
            k,
            degree: poly.degree(),
        });
    }
    let n = poly.n();
    let per_block = n + k;
    let padded_terms = poly.terms().iter().map(|(m, c)| {
        let mut vars = m.vars().to_vec();
        vars.extend((0..(k - m.degree()) as u32).map(|d| n as u32 + d));
        Monomial::new(vars).map(|m| (m, *c))
    });
    let padded = MultilinearPoly::from_terms(per_block, padded_terms.collect::<Result<Vec<_>>>()?)?;
    let scale = (2.0 * std::f64::consts::E).powi(k as i32);
    let dec = full(&padded, k)?;
    let g = FullDecoupledPoly {
        base: dec.base.scaled(1.0 / scale),
        k,
        n: per_block,
    };
    let query_map = (0..k * per_block)
        .map(|idx| match idx % per_block {
            i if i < n => QuerySource::Coordinate(i),
            _ => QuerySource::ConstantOne,
        })
        .collect();
    Ok(AaReduction {
        g,
        scale,
        query_map,
    })
}

/// Influence of a decoupled coordinate against its original coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluencePullback {
    pub decoupled_index: usize,
    pub original_index: usize,
    pub decoupled_influence: f64,
    pub original_influence: f64,
    /// `Inf_i[odec f] / (k − 1)`.
    pub bound: f64,
    pub holds: bool,
}

pub fn influence_pullback(poly: &MultilinearPoly, i: usize) -> Result<InfluencePullback> {
    let k = poly.degree();
    if k < 2 {
        return Err(Error::DegreeTooSmall { k, min: 2 });
    }
    let n = poly.n();
    if i >= 2 * n {
        return Err(Error::IndexOutOfRange { index: i, n: 2 * n });
    }
    let odec = one_block(poly);
    let decoupled_influence = odec.base().influence(i)?;
    let original_index = i % n;
    let original_influence = poly.influence(original_index)?;
    let bound = decoupled_influence / (k - 1) as f64;
    Ok(InfluencePullback {
        decoupled_index: i,
        original_index,
        decoupled_influence,
        original_influence,
        bound,
        holds: original_influence >= bound * (1.0 - 1e-12),
    })
}

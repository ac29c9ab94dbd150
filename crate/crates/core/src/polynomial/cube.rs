//! Exhaustive evaluation over the Boolean cube via the fast Walsh–Hadamard transform.
//!
//! Index `x` of the returned table encodes the point whose coordinate `i` is
//! `-1` when bit `i` of `x` is set and `+1` otherwise, so that
//! `f(x) = Σ_S a_S (-1)^{|S ∩ x|}` is exactly the Hadamard transform of the
//! coefficient vector.

use serde::{Deserialize, Serialize};

use super::MultilinearPoly;
use crate::error::{Error, Result};

pub const DEFAULT_ENUM_CAP: usize = 22;

/// Cap on the number of variables for exhaustive `{±1}^n` enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CubeEnumLimit {
    max_vars: usize,
}

impl CubeEnumLimit {
    pub fn new(max_vars: usize) -> Result<Self> {
        if max_vars == 0 {
            return Err(Error::InvalidArgument("enumeration cap must be at least 1".into()));
        }
        // 2^max_vars f64 values must fit in memory and in a usize index.
        if max_vars > 30 {
            return Err(Error::InvalidArgument(format!(
                "enumeration cap {max_vars} exceeds the supported maximum of 30"
            )));
        }
        Ok(CubeEnumLimit { max_vars })
    }

    pub fn max_vars(&self) -> usize {
        self.max_vars
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.max_vars {
            return Err(Error::EnumerationCap {
                n,
                cap: self.max_vars,
            });
        }
        Ok(())
    }
}

impl Default for CubeEnumLimit {
    fn default() -> Self {
        CubeEnumLimit {
            max_vars: DEFAULT_ENUM_CAP,
        }
    }
}

/// Values of `poly` at all `2^n` points of the cube, in the index order described above.
pub fn cube_values(poly: &MultilinearPoly, limit: CubeEnumLimit) -> Result<Vec<f64>> {
    let n = poly.n();
    limit.check(n)?;
    let size = 1usize << n;
    let mut table = vec![0.0f64; size];
    for (m, c) in poly.terms() {
        table[m.mask() as usize] = *c;
    }
    walsh_hadamard_in_place(&mut table);
    Ok(table)
}

fn walsh_hadamard_in_place(a: &mut [f64]) {
    let size = a.len();
    let mut h = 1;
    while h < size {
        for block in a.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
}

/// The ±1 point encoded by `index`.
pub fn point_from_index(index: usize, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if index >> i & 1 == 1 { -1.0 } else { 1.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polynomial::random_poly;

    #[test]
    fn matches_direct_evaluation() {
        let f = random_poly(7, 4, false, 11).unwrap();
        let values = cube_values(&f, CubeEnumLimit::default()).unwrap();
        for (idx, v) in values.iter().enumerate() {
            let direct = f.eval(&point_from_index(idx, 7)).unwrap();
            assert!((v - direct).abs() <= f.rounding_slack(), "index {idx}");
        }
    }

    #[test]
    fn zero_variables() {
        let f = MultilinearPoly::constant(0, 3.0);
        assert_eq!(cube_values(&f, CubeEnumLimit::default()).unwrap(), vec![3.0]);
    }

    #[test]
    fn cap_validation() {
        assert!(CubeEnumLimit::new(0).is_err());
        assert_eq!(CubeEnumLimit::default().max_vars(), 22);
    }
}

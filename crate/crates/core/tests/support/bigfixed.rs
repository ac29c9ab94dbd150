//! Signed fixed-point numbers with 2048 fractional bits on top of `BigInt`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

pub const FRAC_BITS: u32 = 2048;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fx(BigInt);

impl Fx {
    pub fn zero() -> Fx {
        Fx(BigInt::zero())
    }

    pub fn int(i: i64) -> Fx {
        Fx(BigInt::from(i) << FRAC_BITS)
    }

    pub fn ratio(p: i64, q: i64) -> Fx {
        Fx((BigInt::from(p) << FRAC_BITS) / BigInt::from(q))
    }

    pub fn sqrt(&self) -> Fx {
        assert!(!self.0.is_negative());
        Fx((&self.0 << FRAC_BITS).sqrt())
    }

    pub fn pow(&self, e: usize) -> Fx {
        let mut acc = Fx::int(1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn abs(&self) -> Fx {
        Fx(self.0.abs())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 64 significant bits before converting.
        let bits = self.0.bits() as i64;
        let shift = (bits - 64).max(0);
        let top = (&self.0 >> shift as usize).to_f64().unwrap();
        top * 2f64.powi((shift - FRAC_BITS as i64) as i32)
    }

    /// `|self| ≤ 10^{-e}·|scale|`.
    pub fn below(&self, scale: &Fx, e: u32) -> bool {
        let lhs = self.0.abs() * BigInt::from(10).pow(e);
        lhs <= scale.0.abs()
    }
}

impl Add for &Fx {
    type Output = Fx;
    fn add(self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }
}

impl Sub for &Fx {
    type Output = Fx;
    fn sub(self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }
}

impl Mul for &Fx {
    type Output = Fx;
    fn mul(self, o: &Fx) -> Fx {
        Fx((&self.0 * &o.0) >> FRAC_BITS)
    }
}

impl Div for &Fx {
    type Output = Fx;
    fn div(self, o: &Fx) -> Fx {
        Fx((&self.0 << FRAC_BITS) / &o.0)
    }
}

impl Neg for &Fx {
    type Output = Fx;
    fn neg(self) -> Fx {
        Fx(-&self.0)
    }
}

impl Sub<Fx> for Fx {
    type Output = Fx;
    fn sub(self, o: Fx) -> Fx {
        Fx(self.0 - o.0)
    }
}

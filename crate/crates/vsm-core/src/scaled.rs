//! Floating-point values with an explicit power-of-two exponent.
//!
//! The kernel series multiply gamma factors of wildly different magnitudes:
//! `Γ(2m + θ₀/2)` overflows `f64` near `m ≈ 85` while the convolution
//! coefficients it multiplies underflow long before that. [`ScaledF64`]
//! keeps a signed mantissa in `[1, 2)` and a separate binary exponent so
//! products and sums of such terms stay exact to within ordinary `f64`
//! rounding regardless of scale.

use std::f64::consts::LN_2;

/// A real number `m · 2^e` with `|m| ∈ [1, 2)` or `m = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledF64 {
    m: f64,
    e: i64,
}

/// Splits a finite nonzero `x` into `(m, e)` with `x = m · 2^e`, `|m| ∈ [1, 2)`.
fn frexp1(x: f64) -> (f64, i64) {
    debug_assert!(x.is_finite() && x != 0.0);
    let bits = x.to_bits();
    let raw = ((bits >> 52) & 0x7ff) as i64;
    if raw == 0 {
        // subnormal: scale up first
        let (m, e) = frexp1(x * f64::from_bits((1023 + 120) << 52));
        return (m, e - 120);
    }
    let e = raw - 1023;
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (m, e)
}

/// `2^e` as an `f64`, valid for `e ∈ [-1022, 1023]`.
fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

impl ScaledF64 {
    pub const ZERO: ScaledF64 = ScaledF64 { m: 0.0, e: 0 };
    pub const ONE: ScaledF64 = ScaledF64 { m: 1.0, e: 0 };

    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "ScaledF64 requires finite input, got {v}");
        if v == 0.0 {
            return Self::ZERO;
        }
        let (m, e) = frexp1(v);
        ScaledF64 { m, e }
    }

    /// Builds `exp(l)` without overflow or underflow.
    pub fn from_ln(l: f64) -> Self {
        assert!(l.is_finite(), "ScaledF64::from_ln requires finite input");
        let e = (l / LN_2).floor();
        let m = (l - e * LN_2).exp();
        let (m, de) = frexp1(m);
        ScaledF64 { m, e: e as i64 + de }
    }

    pub fn is_zero(self) -> bool {
        self.m == 0.0
    }

    pub fn signum(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.m.signum()
        }
    }

    pub fn neg(self) -> Self {
        ScaledF64 { m: -self.m, e: self.e }
    }

    pub fn abs(self) -> Self {
        ScaledF64 { m: self.m.abs(), e: self.e }
    }

    fn renorm(m: f64, e: i64) -> Self {
        if m == 0.0 {
            return Self::ZERO;
        }
        let (mm, de) = frexp1(m);
        ScaledF64 { m: mm, e: e + de }
    }

    pub fn mul(self, o: Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::ZERO;
        }
        let m = self.m * o.m; // |m| in [1, 4)
        if m.abs() >= 2.0 {
            ScaledF64 { m: m * 0.5, e: self.e + o.e + 1 }
        } else {
            ScaledF64 { m, e: self.e + o.e }
        }
    }

    pub fn mul_f64(self, v: f64) -> Self {
        self.mul(Self::from_f64(v))
    }

    pub fn div(self, o: Self) -> Self {
        assert!(!o.is_zero(), "ScaledF64 division by zero");
        if self.is_zero() {
            return Self::ZERO;
        }
        let m = self.m / o.m; // |m| in (0.5, 2)
        if m.abs() < 1.0 {
            ScaledF64 { m: m * 2.0, e: self.e - o.e - 1 }
        } else {
            ScaledF64 { m, e: self.e - o.e }
        }
    }

    pub fn add(self, o: Self) -> Self {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let de = hi.e - lo.e;
        if de > 120 {
            return hi;
        }
        let m = hi.m + lo.m * pow2(-de);
        Self::renorm(m, hi.e)
    }

    pub fn sub(self, o: Self) -> Self {
        self.add(o.neg())
    }

    /// Converts back to `f64`, saturating to `±∞` / flushing to zero outside range.
    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        if self.e > 1023 {
            return f64::INFINITY * self.m.signum();
        }
        if self.e < -1060 {
            return 0.0;
        }
        if self.e < -1022 {
            // land in the subnormal range in two steps
            return self.m * pow2(-500) * pow2(self.e + 500);
        }
        self.m * pow2(self.e)
    }

    /// `ln |self|`; `-∞` for zero.
    pub fn ln_abs(self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.m.abs().ln() + self.e as f64 * LN_2
    }

    /// Compares absolute values.
    pub fn abs_gt(self, o: Self) -> bool {
        if self.is_zero() {
            return false;
        }
        if o.is_zero() {
            return true;
        }
        if self.e != o.e {
            return self.e > o.e;
        }
        self.m.abs() > o.m.abs()
    }
}

//! Extended-precision real/complex arithmetic on a configurable mantissa-bit
//! budget, plus the `exp(2*pi*i*t)` kernel with mod-1 argument reduction.
//!
//! Every arithmetic operation routes through [`XReal`], which delegates to
//! MPFR (round-to-nearest at the working precision) and bumps a thread-local
//! operation counter so evaluation cost can be measured independently of
//! wall clock.

use std::cell::Cell;
use std::cmp::Ordering;
use std::sync::OnceLock;

use rug::float::Constant;
use rug::ops::CompleteRound;
use rug::Float;

use crate::error::{Error, Result};

/// Thread-local count of extended-precision operations.
///
/// Counted as one each: add/sub, mul, div, sqrt, exp, ln, and one per
/// sin/cos pair (a complex-exponential evaluation). Exact sign flips,
/// comparisons and clones are free.
pub mod ops_count {
    use super::OPS;

    pub fn reset() {
        OPS.with(|c| c.set(0));
    }

    pub fn current() -> u64 {
        OPS.with(|c| c.get())
    }
}

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
fn tick(n: u64) {
    OPS.with(|c| c.set(c.get().wrapping_add(n)));
}

/// Working-precision configuration for one evaluation problem.
///
/// `working_bits >= output_bits + guard_bits` with
/// `output_bits = ceil(log2(1/eps))` and
/// `guard_bits = ceil(5 * mult * log2(n/eps))`, floored at 64 bits. The
/// factor 5 covers the quadratic-phase reductions (`tau*k^2`, `z^2/(2*tau)`)
/// that consume up to `4*log2(n)` bits per step.
#[derive(Debug)]
pub struct PrecisionContext {
    working_bits: u32,
    target_eps: f64,
    n_hint: u64,
    guard_multiplier: f64,
    pi: OnceLock<XReal>,
    two_pi: OnceLock<XReal>,
}

impl PrecisionContext {
    /// Derive a context from the outermost query parameters.
    pub fn new(n: u64, eps: f64, guard_multiplier: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidN(n));
        }
        if !(eps > 0.0 && eps < 0.1) {
            return Err(Error::EpsOutOfRange(eps));
        }
        if !(guard_multiplier > 0.0) {
            return Err(Error::InvalidGuardMultiplier(guard_multiplier));
        }
        let output_bits = (-eps.log2()).ceil() as u32;
        let guard_bits = (5.0 * guard_multiplier * ((n as f64).log2() - eps.log2())).ceil() as u32;
        let working_bits = (output_bits + guard_bits).max(64);
        Ok(Self::from_parts(working_bits, eps, n, guard_multiplier))
    }

    /// Context with an explicit bit budget (CLI `--bits` / `THETA_BITS`
    /// override and fixed-precision calibration runs). Floored at 64 bits.
    pub fn with_bits(n: u64, eps: f64, bits: u32) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidN(n));
        }
        if !(eps > 0.0 && eps < 0.1) {
            return Err(Error::EpsOutOfRange(eps));
        }
        Ok(Self::from_parts(bits.max(64), eps, n, 1.0))
    }

    fn from_parts(working_bits: u32, eps: f64, n: u64, guard_multiplier: f64) -> Self {
        PrecisionContext {
            working_bits,
            target_eps: eps,
            n_hint: n,
            guard_multiplier,
            pi: OnceLock::new(),
            two_pi: OnceLock::new(),
        }
    }

    pub fn working_bits(&self) -> u32 {
        self.working_bits
    }

    pub fn target_eps(&self) -> f64 {
        self.target_eps
    }

    pub fn n_hint(&self) -> u64 {
        self.n_hint
    }

    pub fn guard_multiplier(&self) -> f64 {
        self.guard_multiplier
    }

    pub fn from_f64(&self, v: f64) -> XReal {
        XReal(Float::with_val(self.working_bits, v))
    }

    pub fn from_u64(&self, v: u64) -> XReal {
        XReal(Float::with_val(self.working_bits, v))
    }

    pub fn from_i64(&self, v: i64) -> XReal {
        XReal(Float::with_val(self.working_bits, v))
    }

    pub fn from_u128(&self, v: u128) -> XReal {
        XReal(Float::with_val(self.working_bits, v))
    }

    pub fn zero(&self) -> XReal {
        XReal(Float::new(self.working_bits))
    }

    pub fn one(&self) -> XReal {
        self.from_u64(1)
    }

    pub fn pi(&self) -> XReal {
        self.pi
            .get_or_init(|| XReal(Float::with_val(self.working_bits, Constant::Pi)))
            .clone()
    }

    pub fn two_pi(&self) -> XReal {
        self.two_pi
            .get_or_init(|| {
                let mut p = Float::with_val(self.working_bits, Constant::Pi);
                p <<= 1; // exact
                XReal(p)
            })
            .clone()
    }

    pub fn czero(&self) -> XComplex {
        XComplex::new(self.zero(), self.zero())
    }

    pub fn cone(&self) -> XComplex {
        XComplex::new(self.one(), self.zero())
    }

    /// `e^{i pi/4}` = (sqrt(2)/2)(1 + i).
    pub fn eighth_root(&self) -> XComplex {
        let h = self.from_f64(0.5).sqrt();
        XComplex::new(h.clone(), h)
    }
}

/// Extended-precision real number at the context's working precision.
#[derive(Debug, Clone)]
pub struct XReal(Float);

impl XReal {
    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn raw(&self) -> &Float {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_sign_negative() && !self.0.is_zero()
    }

    /// Sign flip; exact, not counted.
    pub fn neg(&self) -> XReal {
        XReal((-&self.0).complete(self.prec()))
    }

    /// Absolute value; exact, not counted.
    pub fn abs(&self) -> XReal {
        XReal(self.0.abs_ref().complete(self.prec()))
    }

    pub fn square(&self) -> XReal {
        tick(1);
        XReal((&self.0 * &self.0).complete(self.prec()))
    }

    pub fn sqrt(&self) -> XReal {
        tick(1);
        XReal(self.0.sqrt_ref().complete(self.prec()))
    }

    pub fn recip(&self) -> XReal {
        tick(1);
        XReal(self.0.recip_ref().complete(self.prec()))
    }

    pub fn exp(&self) -> XReal {
        tick(1);
        XReal(self.0.exp_ref().complete(self.prec()))
    }

    pub fn cosh(&self) -> XReal {
        tick(1);
        XReal(self.0.cosh_ref().complete(self.prec()))
    }

    pub fn ln(&self) -> XReal {
        tick(1);
        XReal(self.0.ln_ref().complete(self.prec()))
    }

    /// Simultaneous sine and cosine; counted once (one complex exponential).
    pub fn sin_cos(&self) -> (XReal, XReal) {
        tick(1);
        let (s, c) = self.0.clone().sin_cos(Float::new(self.prec()));
        (XReal(s), XReal(c))
    }

    /// Largest integer <= self; exact, counted as one addition.
    pub fn floor(&self) -> XReal {
        tick(1);
        XReal(self.0.floor_ref().complete(self.prec()))
    }

    /// `self - floor(self)` in [0, 1); the mod-1 reduction used before any
    /// trigonometric evaluation of a quadratic phase.
    pub fn fract(&self) -> XReal {
        let f = self.floor();
        &*self - &f
    }

    pub fn mul_u64(&self, k: u64) -> XReal {
        tick(1);
        XReal((&self.0 * k).complete(self.prec()))
    }

    pub fn mul_i64(&self, k: i64) -> XReal {
        tick(1);
        XReal((&self.0 * k).complete(self.prec()))
    }

    pub fn div_u64(&self, k: u64) -> XReal {
        tick(1);
        XReal((&self.0 / k).complete(self.prec()))
    }

    pub fn add_u64(&self, k: u64) -> XReal {
        tick(1);
        XReal((&self.0 + k).complete(self.prec()))
    }

    pub fn add_f64(&self, v: f64) -> XReal {
        tick(1);
        XReal((&self.0 + v).complete(self.prec()))
    }

    pub fn sub_f64(&self, v: f64) -> XReal {
        tick(1);
        XReal((&self.0 - v).complete(self.prec()))
    }

    /// Multiply by 2^k; exact, not counted.
    pub fn ldexp(&self, k: i32) -> XReal {
        XReal((&self.0 << k).complete(self.prec()))
    }

    pub fn cmp_f64(&self, v: f64) -> Ordering {
        self.0.partial_cmp(&v).expect("NaN in comparison")
    }

    pub fn cmp(&self, other: &XReal) -> Ordering {
        self.0.partial_cmp(&other.0).expect("NaN in comparison")
    }

    /// Bit-identical equality (same value and rounding).
    pub fn identical(&self, other: &XReal) -> bool {
        self.0 == other.0 && self.0.prec() == other.0.prec()
    }

    /// Parse a decimal literal at the given precision (reference values in
    /// tests); panics on malformed input.
    pub fn parse_decimal(s: &str, prec: u32) -> XReal {
        XReal(Float::with_val(
            prec,
            Float::parse(s).expect("malformed decimal literal"),
        ))
    }
}

macro_rules! xreal_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl std::ops::$trait<&XReal> for &XReal {
            type Output = XReal;
            fn $method(self, rhs: &XReal) -> XReal {
                tick(1);
                XReal((&self.0 $op &rhs.0).complete(self.0.prec()))
            }
        }
    };
}

xreal_binop!(Add, add, +);
xreal_binop!(Sub, sub, -);
xreal_binop!(Mul, mul, *);
xreal_binop!(Div, div, /);

/// Extended-precision complex number (re, im).
#[derive(Debug, Clone)]
pub struct XComplex {
    pub re: XReal,
    pub im: XReal,
}

impl XComplex {
    pub fn new(re: XReal, im: XReal) -> Self {
        XComplex { re, im }
    }

    pub fn conj(&self) -> XComplex {
        XComplex::new(self.re.clone(), self.im.neg())
    }

    pub fn neg(&self) -> XComplex {
        XComplex::new(self.re.neg(), self.im.neg())
    }

    /// Multiply by i: (re, im) -> (-im, re); exact.
    pub fn mul_i(&self) -> XComplex {
        XComplex::new(self.im.neg(), self.re.clone())
    }

    pub fn scale(&self, s: &XReal) -> XComplex {
        XComplex::new(&self.re * s, &self.im * s)
    }

    pub fn div_real(&self, s: &XReal) -> XComplex {
        XComplex::new(&self.re / s, &self.im / s)
    }

    pub fn abs2(&self) -> XReal {
        &self.re.square() + &self.im.square()
    }

    pub fn abs(&self) -> XReal {
        self.abs2().sqrt()
    }

    pub fn recip(&self) -> XComplex {
        let d = self.abs2();
        XComplex::new(&self.re / &d, (&self.im / &d).neg())
    }

    pub fn to_f64s(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl std::ops::Add<&XComplex> for &XComplex {
    type Output = XComplex;
    fn add(self, rhs: &XComplex) -> XComplex {
        XComplex::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl std::ops::Sub<&XComplex> for &XComplex {
    type Output = XComplex;
    fn sub(self, rhs: &XComplex) -> XComplex {
        XComplex::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl std::ops::Mul<&XComplex> for &XComplex {
    type Output = XComplex;
    fn mul(self, rhs: &XComplex) -> XComplex {
        let re = &(&self.re * &rhs.re) - &(&self.im * &rhs.im);
        let im = &(&self.re * &rhs.im) + &(&self.im * &rhs.re);
        XComplex::new(re, im)
    }
}

impl std::ops::Div<&XComplex> for &XComplex {
    type Output = XComplex;
    fn div(self, rhs: &XComplex) -> XComplex {
        let d = rhs.abs2();
        let re = &(&(&self.re * &rhs.re) + &(&self.im * &rhs.im)) / &d;
        let im = &(&(&self.im * &rhs.re) - &(&self.re * &rhs.im)) / &d;
        XComplex::new(re, im)
    }
}

/// `exp(2*pi*i*t)`. The argument is reduced mod 1 *before* the
/// multiplication by 2*pi, so quadratic phases `tau*k^2` lose only the bits
/// consumed by their integer part.
pub fn complex_exp_2pii(t: &XReal, ctx: &PrecisionContext) -> XComplex {
    let u = t.fract();
    let angle = &u * &ctx.two_pi();
    let (s, c) = angle.sin_cos();
    XComplex::new(c, s)
}

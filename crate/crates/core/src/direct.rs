//! Ground-truth oracle: O(n) summation of `F_n(z, tau)`, plus the exact
//! normalization identities shared by every evaluator.

use crate::precision::{complex_exp_2pii, PrecisionContext, XComplex, XReal};

/// A single evaluation request. `z` and `tau` are f64 (the exact binary
/// values are what gets evaluated); `eps` must lie in (0, 1/10) for the
/// fast algorithm, the oracle accepts anything positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaQuery {
    pub n: u64,
    pub z: f64,
    pub tau: f64,
    pub eps: f64,
}

impl ThetaQuery {
    pub fn new(n: u64, z: f64, tau: f64, eps: f64) -> Self {
        ThetaQuery { n, z, tau, eps }
    }
}

/// `(z, tau)` reduced to `[-1/2, 1/2] x [-1/4, 1/4]` by the exact shift
/// identities; `F_n` is unchanged.
#[derive(Debug, Clone)]
pub struct NormalizedQuery {
    pub z_norm: XReal,
    pub tau_norm: XReal,
}

/// `sum_{k=0}^n exp(2 pi i (z k + tau k^2))`, phases reduced mod 1 in
/// extended precision before exponentiation, accumulated left to right.
pub fn direct_sum(q: &ThetaQuery, ctx: &PrecisionContext) -> XComplex {
    direct_sum_terms(q.n, &ctx.from_f64(q.z), &ctx.from_f64(q.tau), ctx)
}

pub fn direct_sum_terms(n: u64, z: &XReal, tau: &XReal, ctx: &PrecisionContext) -> XComplex {
    let mut acc = ctx.cone(); // k = 0 term
    for k in 1..=n {
        let k2 = (k as u128) * (k as u128);
        let phase = &(&z.mul_u64(k) + &(tau * &ctx.from_u128(k2))).fract();
        acc = &acc + &complex_exp_2pii(phase, ctx);
    }
    acc
}

fn reduce_mod1(v: &XReal) -> XReal {
    let half = v.add_f64(0.5);
    v - &half.floor()
}

/// Integer shifts take `z` and `tau` into `[-1/2, 1/2]`; if `|tau| > 1/4`
/// the half-shift identity `F_n(z, tau) = F_n(z + 1/2, tau + 1/2)` is
/// applied and both are re-reduced.
pub fn normalize(z: &XReal, tau: &XReal, _ctx: &PrecisionContext) -> NormalizedQuery {
    let mut z_norm = reduce_mod1(z);
    let mut tau_norm = reduce_mod1(tau);
    if tau_norm.abs().cmp_f64(0.25) == std::cmp::Ordering::Greater {
        z_norm = reduce_mod1(&z_norm.add_f64(0.5));
        tau_norm = reduce_mod1(&tau_norm.add_f64(0.5));
    }
    NormalizedQuery { z_norm, tau_norm }
}

/// `|conj(F_n(z, tau)) - F_n(-z, -tau)|`; expected at rounding level.
pub fn conj_symmetry_check(q: &ThetaQuery, ctx: &PrecisionContext) -> XReal {
    let a = direct_sum(q, ctx).conj();
    let b = direct_sum(&ThetaQuery::new(q.n, -q.z, -q.tau, q.eps), ctx);
    (&a - &b).abs()
}

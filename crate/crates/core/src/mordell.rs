//! The Mordell integral `h(z, tau)` for real z and `0 < |tau| < 1`
//! (`tau < 0` by conjugation), split into k explicit Gaussian/error-function
//! terms plus an exponentially damped tail:
//!
//! `h = H_k(z) + H_k(-z) + ((-1)^k/pi) (J(k+z) + J(k-z))`
//!
//! The tail J is evaluated either rigorously through the `q_l(tau)` /
//! `p_{2l}(x)` series (truncation error < eps/2 at `K = 2 + 2 ceil ln(1/eps)`)
//! or through Gauss-Laguerre quadrature with five shifts — fast, validated
//! empirically against the series path, no proven bound.

use std::sync::Arc;

use crate::erf::erf_rot_scaled;
use crate::error::{Error, Result};
use crate::precision::{complex_exp_2pii, PrecisionContext, XComplex, XReal};
use crate::tables::{euler_numbers, laguerre_rule, EulerTable, LaguerreRule};

/// Shift count used by the Gauss-Laguerre fast path.
pub const FAST_SHIFTS: usize = 5;
/// Gauss-Laguerre rule order for the fast path.
pub const FAST_RULE_ORDER: usize = 124;
/// Nodes kept from the order-124 rule. The truncation tail is
/// ~e^{-x_{keep+1}}; keeping 60 nodes reaches x ~ 74 and an absolute tail
/// near 1e-32, while 40 nodes stop at x ~ 32 and cap the tail near 1e-14.
pub const FAST_RULE_TRUNCATION: usize = 60;

/// Taylor coefficients of `e^{i tau z^2/pi} sech(z)` in `z^2`.
#[derive(Debug)]
pub struct QCoeffs {
    pub q: Vec<XComplex>,
}

/// Incomplete-exponential moments `p_k(x) = int_0^1 e^{-xu} u^k du`,
/// `k = 0..=kmax`, by upward recursion.
#[derive(Debug)]
pub struct PSeq {
    pub x: XReal,
    pub p: Vec<XReal>,
}

/// One evaluated Mordell query, with the shift bookkeeping exposed.
#[derive(Debug)]
pub struct MordellEval {
    pub z: XReal,
    pub tau: XReal,
    pub eps: f64,
    /// Series/split count: `K = 2 + 2 ceil ln(1/eps)` on the rigorous path,
    /// 5 on the fast path.
    pub shift_k: usize,
    pub result: XComplex,
}

/// `q_k(tau) = sum_{j=0}^k E~_{2k-2j} (i tau/pi)^j / j!` for `k <= count`.
pub fn q_coeffs(
    tau: &XReal,
    count: usize,
    euler: &EulerTable,
    ctx: &PrecisionContext,
) -> QCoeffs {
    assert!(
        euler.e_tilde.len() > 2 * count,
        "Euler table too short: need E~ up to {}",
        2 * count
    );
    // w_j = (tau/pi)^j / j!, sign/axis of i^j handled per residue class
    let t = tau / &ctx.pi();
    let mut w = Vec::with_capacity(count + 1);
    w.push(ctx.one());
    for j in 1..=count {
        w.push((&(&w[j - 1] * &t)).div_u64(j as u64));
    }
    let mut q = Vec::with_capacity(count + 1);
    for k in 0..=count {
        let mut re = ctx.zero();
        let mut im = ctx.zero();
        for j in 0..=k {
            let term = &euler.e_tilde[2 * (k - j)] * &w[j];
            match j % 4 {
                0 => re = &re + &term,
                1 => im = &im + &term,
                2 => re = &re - &term,
                _ => im = &im - &term,
            }
        }
        q.push(XComplex::new(re, im));
    }
    QCoeffs { q }
}

/// `p_0 = (1 - e^{-x})/x`, then `p_k = (k p_{k-1} - e^{-x})/x` upward.
///
/// The recursion is forward-stable only while the index stays below ~x;
/// callers must keep `x >= kmax - 1` (the `w = K +- z`, `|z| <= 1/2` use
/// gives `x = 2w >= 2K - 1`).
pub fn p_seq(x: &XReal, kmax: usize, ctx: &PrecisionContext) -> Result<PSeq> {
    let xf = x.to_f64();
    let limit = kmax as f64 - 1.0;
    if !(xf > 0.0) || xf < limit {
        return Err(Error::UnstableRecursion { x: xf, limit });
    }
    let ex = x.neg().exp();
    let mut p = Vec::with_capacity(kmax + 1);
    p.push(&(&ctx.one() - &ex) / x);
    for k in 1..=kmax {
        p.push(&(&p[k - 1].mul_u64(k as u64) - &ex) / x);
    }
    Ok(PSeq { x: x.clone(), p })
}

/// `H_k(z, tau) = (e^{i pi/4}/sqrt(tau)) sum_{l<k} (-1)^l
/// e^{i pi (z+l+1/2)^2/tau} [1 - Phi(...)]`, each term through
/// `erf_rot_scaled` so the oscillatory factor cancels analytically.
///
/// Requires `tau > 0`, `k >= 1`, `|z| <= 1/2` (so every rotated-erf
/// argument is nonnegative).
pub fn h_sum_h(
    z: &XReal,
    tau: &XReal,
    k: usize,
    eps_each: f64,
    ctx: &PrecisionContext,
) -> XComplex {
    debug_assert!(k >= 1 && !tau.is_negative());
    let scale = (&ctx.pi() / tau).sqrt(); // sqrt(pi/tau)
    let mut acc = ctx.czero();
    for l in 0..k {
        let x = &scale * &z.add_f64(l as f64 + 0.5);
        let term = erf_rot_scaled(&x, eps_each, ctx);
        acc = if l % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    (&acc * &ctx.eighth_root()).div_real(&tau.sqrt())
}

/// Rigorous tail: `J(w, tau) ~= sum_{l=0}^{count} q_l(tau) p_{2l}(2w)`,
/// truncation error < eps/4 + eps/4 when `count = K(eps)` and
/// `w >= count - 1/2`.
pub fn h_tail_j(
    w: &XReal,
    _tau: &XReal,
    count: usize,
    q: &QCoeffs,
    ctx: &PrecisionContext,
) -> Result<XComplex> {
    assert!(q.q.len() > count, "q table too short");
    let p = p_seq(&w.ldexp(1), 2 * count, ctx)?;
    let mut acc = ctx.czero();
    for l in 0..=count {
        acc = &acc + &q.q[l].scale(&p.p[2 * l]);
    }
    Ok(acc)
}

/// Gauss-Laguerre tail: `J(w, tau) ~= (1/(2k)) sum_i w_i g(y_i/k)` with
/// `g(y) = e^{i tau y^2/(4 pi) - (w-k) y} / cosh(y/2)`. Not certified;
/// validated against [`h_tail_j`].
pub fn h_tail_j_fast(
    w: &XReal,
    tau: &XReal,
    k_shift: usize,
    rule: &LaguerreRule,
    ctx: &PrecisionContext,
) -> XComplex {
    debug_assert!(k_shift >= 1);
    let z_eff = w - &ctx.from_u64(k_shift as u64);
    let four_pi = ctx.pi().ldexp(2);
    let mut acc = ctx.czero();
    for (node, weight) in rule.active() {
        let y = node.div_u64(k_shift as u64);
        let osc = &(tau * &y.square()) / &four_pi;
        let (s, c) = osc.sin_cos(); // |osc| small, no reduction needed
        let damp = (&z_eff * &y).neg().exp();
        let csh = y.ldexp(-1).cosh();
        let mag = &(&damp / &csh) * weight;
        acc = &acc + &XComplex::new(&c * &mag, &s * &mag);
    }
    acc.div_real(&ctx.from_u64(2 * k_shift as u64))
}

/// `h(z, tau)` to within `+- eps/sqrt(|tau|)` for `0 < |tau| < 1`,
/// `|z| < 10`; `tau < 0` via `h(z, -t) = conj(h(z, t))`.
pub fn mordell_h(
    z: &XReal,
    tau: &XReal,
    eps: f64,
    fast: bool,
    ctx: &PrecisionContext,
) -> Result<XComplex> {
    if z.abs().cmp_f64(10.0) != std::cmp::Ordering::Less {
        return Err(Error::ZOutOfRange(z.to_f64()));
    }
    Ok(mordell_h_detailed(z, tau, eps, fast, ctx)?.result)
}

/// As [`mordell_h`] but returning the evaluation record (series depth K,
/// inputs, result). Used by tests and by the remainder computation, which
/// needs arguments beyond |z| < 10 (cost grows linearly with |z|).
pub fn mordell_h_detailed(
    z: &XReal,
    tau: &XReal,
    eps: f64,
    fast: bool,
    ctx: &PrecisionContext,
) -> Result<MordellEval> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::EpsOutOfRange(eps));
    }
    let tf = tau.to_f64();
    if tau.is_zero() || tau.abs().cmp_f64(1.0) != std::cmp::Ordering::Less {
        return Err(Error::TauOutOfRange(tf));
    }
    if fast && ctx.working_bits() < 113 {
        return Err(Error::FastPathPrecision(ctx.working_bits()));
    }
    let (value, shift_k) = if tau.is_negative() {
        let (v, k) = h_positive_tau(z, &tau.neg(), eps, fast, ctx)?;
        (v.conj(), k)
    } else {
        h_positive_tau(z, tau, eps, fast, ctx)?
    };
    Ok(MordellEval {
        z: z.clone(),
        tau: tau.clone(),
        eps,
        shift_k,
        result: value,
    })
}

/// Core evaluation for `tau > 0`: normalize z into [-1/2, 1/2] by repeated
/// application of `h(z) + h(z+1) = (2/sqrt(tau)) e^{i pi/4 + i pi (z+1/2)^2/tau}`,
/// then apply the H/J split.
fn h_positive_tau(
    z: &XReal,
    tau: &XReal,
    eps: f64,
    fast: bool,
    ctx: &PrecisionContext,
) -> Result<(XComplex, usize)> {
    let gaussian = |zz: &XReal| -> XComplex {
        // (2/sqrt(tau)) e^{i pi/4 + i pi (zz+1/2)^2 / tau}
        let t = (&zz.add_f64(0.5).square() / &tau.ldexp(1)).add_f64(0.125);
        complex_exp_2pii(&t, ctx).scale(&(&ctx.from_u64(2) / &tau.sqrt()))
    };

    let mut zc = z.clone();
    let mut positive = true;
    let mut acc = ctx.czero();
    while zc.cmp_f64(0.5) == std::cmp::Ordering::Greater {
        let g = gaussian(&zc.sub_f64(1.0));
        acc = if positive { &acc + &g } else { &acc - &g };
        positive = !positive;
        zc = zc.sub_f64(1.0);
    }
    while zc.cmp_f64(-0.5) == std::cmp::Ordering::Less {
        let g = gaussian(&zc);
        acc = if positive { &acc + &g } else { &acc - &g };
        positive = !positive;
        zc = zc.add_f64(1.0);
    }

    let (core, k_used) = if fast {
        let rule = laguerre_rule(FAST_RULE_ORDER, FAST_RULE_TRUNCATION, ctx)?;
        (h_core_fast(&zc, tau, eps, &rule, ctx), FAST_SHIFTS)
    } else {
        let k = series_depth(eps);
        (h_core_rigorous(&zc, tau, eps, k, ctx)?, k)
    };
    let signed = if positive { core } else { core.neg() };
    Ok((&signed + &acc, k_used))
}

/// `K(eps) = 2 + 2 ceil(ln(1/eps))` — even, so `(-1)^K = 1`.
pub fn series_depth(eps: f64) -> usize {
    2 + 2 * ((1.0 / eps).ln().ceil() as usize)
}

fn h_core_rigorous(
    zc: &XReal,
    tau: &XReal,
    eps: f64,
    k: usize,
    ctx: &PrecisionContext,
) -> Result<XComplex> {
    let euler = euler_numbers(2 * k, ctx);
    let q = q_coeffs(tau, k, &euler, ctx);
    let eps_each = eps / (4.0 * k as f64);
    let h_part = &h_sum_h(zc, tau, k, eps_each, ctx) + &h_sum_h(&zc.neg(), tau, k, eps_each, ctx);
    let kx = ctx.from_u64(k as u64);
    let j_part = &h_tail_j(&(&kx + zc), tau, k, &q, ctx)? + &h_tail_j(&(&kx - zc), tau, k, &q, ctx)?;
    Ok(&h_part + &j_part.div_real(&ctx.pi()))
}

fn h_core_fast(
    zc: &XReal,
    tau: &XReal,
    eps: f64,
    rule: &Arc<LaguerreRule>,
    ctx: &PrecisionContext,
) -> XComplex {
    let k = FAST_SHIFTS;
    let eps_each = eps / (8.0 * k as f64);
    let h_part = &h_sum_h(zc, tau, k, eps_each, ctx) + &h_sum_h(&zc.neg(), tau, k, eps_each, ctx);
    let kx = ctx.from_u64(k as u64);
    let j_part = &h_tail_j_fast(&(&kx + zc), tau, k, rule, ctx)
        + &h_tail_j_fast(&(&kx - zc), tau, k, rule, ctx);
    // k = 5 is odd: (-1)^k = -1
    &h_part - &j_part.div_real(&ctx.pi())
}

//! The polylog-time evaluator: each round trades `F_{n_j}` for
//! `F_{n_{j+1}}` with `n_{j+1} = floor(2 n_j |tau_j|) <= n_j/2`, paying two
//! Mordell-integral evaluations in the remainder; terminates by direct
//! summation once `n_j <= ln(n)^3`, or by the small-tau expansion once
//! `|tau_j| < n_j^{-4}`.
//!
//! The running pair `(alpha_j, beta_j)` maintains
//! `alpha_j F_{n_j}(z_j, tau_j) + beta_j = F_n(z, tau)` exactly; every
//! internal evaluation targets `eps/n^3`.

use crate::direct::{direct_sum_terms, normalize, ThetaQuery};
use crate::error::{Error, Result};
use crate::mordell::mordell_h_detailed;
use crate::precision::{complex_exp_2pii, ops_count, PrecisionContext, XComplex, XReal};
use crate::small_tau::small_tau_eval;

/// Evaluation options; `fast_mordell` switches the remainder's Mordell
/// integrals to the Gauss-Laguerre path (empirically validated, needs
/// >= 113 working bits).
#[derive(Debug, Clone, Copy, Default)]
pub struct FastOptions {
    pub fast_mordell: bool,
}

/// One iteration of the recursion, as exposed to the invariant tests:
/// `alpha * F_{n_j}(z_j, tau_j) + beta` is the original sum.
#[derive(Debug, Clone)]
pub struct RecursionState {
    pub j: usize,
    pub n_j: u64,
    pub z_j: XReal,
    pub tau_j: XReal,
    pub alpha: XComplex,
    pub beta: XComplex,
}

/// Inputs of the remainder `R_{m,n}(z, tau)`, `tau > 0`.
#[derive(Debug, Clone)]
pub struct RemainderInput {
    pub m: u64,
    pub n: u64,
    pub z: XReal,
    pub tau: XReal,
}

/// `R_{m,n}(z, tau) = -(i/2) e^{-i pi (z - tau/2)} h(z - tau + 1/2, -2 tau)
/// - (i/2) (-1)^m e^{2 pi i (n+1/2)(z + tau(n+1/2))} h(z + (2n+1) tau - m - 1/2, -2 tau)`,
/// each `h` to within `eps_h / sqrt(2 tau)`.
///
/// For general m the second h-argument grows like `2 n tau`; evaluation cost
/// grows linearly with it through the shift normalization.
pub fn remainder_r(
    inp: &RemainderInput,
    eps_h: f64,
    opts: FastOptions,
    ctx: &PrecisionContext,
) -> Result<XComplex> {
    let z = &inp.z;
    let tau = &inp.tau;
    debug_assert!(!tau.is_negative() && !tau.is_zero());
    let tau_h = tau.ldexp(1).neg(); // -2 tau

    let arg_first = &(z - tau).add_f64(0.5); // z - tau + 1/2
    let h1 = mordell_h_detailed(arg_first, &tau_h, eps_h, opts.fast_mordell, ctx)?.result;
    // -(i/2) e^{-i pi (z - tau/2)} = -(i/2) e^{2 pi i * (-(z - tau/2)/2)}
    let t1 = (z - &tau.ldexp(-1)).ldexp(-1).neg();
    let pref1 = complex_exp_2pii(&t1, ctx).mul_i().scale(&ctx.from_f64(-0.5));

    let arg_second = &(&(z + &tau.mul_u64(2 * inp.n + 1)) - &ctx.from_u64(inp.m)).sub_f64(0.5);
    let h2 = mordell_h_detailed(arg_second, &tau_h, eps_h, opts.fast_mordell, ctx)?.result;
    // phase (n+1/2)(z + tau (n+1/2)) reduced mod 1 inside complex_exp_2pii
    let nph = ctx.from_u64(inp.n).add_f64(0.5);
    let t2 = &nph * &(z + &(tau * &nph));
    let mut pref2 = complex_exp_2pii(&t2, ctx).mul_i().scale(&ctx.from_f64(-0.5));
    if inp.m % 2 == 1 {
        pref2 = pref2.neg();
    }
    Ok(&(&pref1 * &h1) + &(&pref2 * &h2))
}

/// `F_n(z, tau) +- eps` with the default (rigorous Mordell) options.
pub fn fast_eval(q: &ThetaQuery, ctx: &PrecisionContext) -> Result<XComplex> {
    fast_eval_with(q, FastOptions::default(), ctx)
}

pub fn fast_eval_with(
    q: &ThetaQuery,
    opts: FastOptions,
    ctx: &PrecisionContext,
) -> Result<XComplex> {
    Ok(run(q, opts, ctx, &mut None)?)
}

/// As [`fast_eval_with`], also returning the per-iteration states (the
/// invariant `alpha_j F_{n_j}(z_j,tau_j) + beta_j = F_n(z,tau)` is what the
/// verification suite replays).
pub fn fast_eval_traced(
    q: &ThetaQuery,
    opts: FastOptions,
    ctx: &PrecisionContext,
) -> Result<(XComplex, Vec<RecursionState>)> {
    let mut trace = Some(Vec::new());
    let v = run(q, opts, ctx, &mut trace)?;
    Ok((v, trace.unwrap()))
}

/// Count of extended-precision operations consumed by one `fast_eval`.
pub fn op_counter(q: &ThetaQuery, ctx: &PrecisionContext) -> Result<u64> {
    ops_count::reset();
    fast_eval(q, ctx)?;
    Ok(ops_count::current())
}

fn run(
    q: &ThetaQuery,
    opts: FastOptions,
    ctx: &PrecisionContext,
    trace: &mut Option<Vec<RecursionState>>,
) -> Result<XComplex> {
    if q.n < 1 {
        return Err(Error::InvalidN(q.n));
    }
    if !(q.eps > 0.0 && q.eps < 0.1) {
        return Err(Error::EpsOutOfRange(q.eps));
    }
    let n0 = q.n as f64;
    let terminal_cap = n0.ln().powi(3); // ln of the ORIGINAL n, fixed at entry
    let eps_inner = (q.eps / (n0 * n0 * n0)).max(1e-290);

    let nq = normalize(&ctx.from_f64(q.z), &ctx.from_f64(q.tau), ctx);
    let mut n_j = q.n;
    let mut z_j = nq.z_norm;
    let mut tau_j = nq.tau_norm;
    let mut alpha = ctx.cone();
    let mut beta = ctx.czero();
    let mut prev_alpha_abs: Option<XReal> = None;
    let sqrt_n = ctx.from_u64(q.n).sqrt();

    for j in 1.. {
        if let Some(t) = trace.as_mut() {
            t.push(RecursionState {
                j,
                n_j,
                z_j: z_j.clone(),
                tau_j: tau_j.clone(),
                alpha: alpha.clone(),
                beta: beta.clone(),
            });
        }
        // (i) short sum: finish by direct summation
        if (n_j as f64) <= terminal_cap {
            check_pre_terminal_alpha(&prev_alpha_abs, &sqrt_n);
            let f = direct_sum_terms(n_j, &z_j, &tau_j, ctx);
            return Ok(&(&alpha * &f) + &beta);
        }
        // (ii) perturbative tau: finish by the small-tau expansion
        let n4 = XReal::parse_decimal(&(n_j as u128).pow(4).to_string(), ctx.working_bits());
        if (&tau_j.abs() * &n4).cmp_f64(1.0) == std::cmp::Ordering::Less {
            check_pre_terminal_alpha(&prev_alpha_abs, &sqrt_n);
            let f = small_tau_eval(n_j, &z_j, &tau_j, eps_inner, ctx)?;
            return Ok(&(&alpha * &f) + &beta);
        }
        // (iii) trade F_{n_j} for F_{n_{j+1}}
        let n_next = tau_j.abs().mul_u64(2 * n_j).floor().to_f64() as u64;
        debug_assert!(n_next <= n_j / 2, "recursion failed to halve: {n_j} -> {n_next}");
        let tau_pos = !tau_j.is_negative();

        let rem_in = RemainderInput {
            m: n_next,
            n: n_j,
            z: if tau_pos { z_j.clone() } else { z_j.neg() },
            tau: tau_j.abs(),
        };
        let r = remainder_r(&rem_in, eps_inner, opts, ctx)?;
        let r = if tau_pos { r } else { r.conj() };
        beta = &beta + &(&alpha * &r);

        // multiplier e^{+- i pi/4 - i pi z^2/(2 tau)} / sqrt(2 |tau|);
        // the phase is reduced mod 1 before exponentiation
        let eighth = if tau_pos { 0.125 } else { -0.125 };
        let t_m = &ctx.from_f64(eighth) - &(&z_j.square() / &tau_j.ldexp(2));
        let mult = complex_exp_2pii(&t_m, ctx).div_real(&tau_j.abs().ldexp(1).sqrt());
        prev_alpha_abs = Some(alpha.abs());
        alpha = &alpha * &mult;

        let z_t = &z_j / &tau_j.abs().ldexp(1);
        let tau_t = tau_j.ldexp(2).recip().neg();
        let nq = normalize(&z_t, &tau_t, ctx);
        z_j = nq.z_norm;
        tau_j = nq.tau_norm;
        n_j = n_next;
    }
    unreachable!("loop always terminates via (i) or (ii)")
}

fn check_pre_terminal_alpha(prev_alpha_abs: &Option<XReal>, sqrt_n: &XReal) {
    if let Some(a) = prev_alpha_abs {
        // proof bound: |alpha_{J-1}| < sqrt(n) at the last pre-terminal step
        debug_assert!(
            a.cmp(sqrt_n) == std::cmp::Ordering::Less,
            "pre-terminal |alpha| = {} exceeds sqrt(n) = {}",
            a.to_f64(),
            sqrt_n.to_f64()
        );
    }
}

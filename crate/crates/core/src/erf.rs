//! The error function on the 45-degree ray: `Phi(e^{i pi/4} x)` for real x,
//! to within +-eps.
//!
//! Two branches: the Taylor series of `Phi` on `|x| <= 1`, and trapezoidal
//! (Poisson) summation on `x > 1`, including the pole correction
//! `R = 2/(e^{2 pi z / h} - 1)` whenever `Re z < pi/h`. `erf_rot_scaled`
//! returns `e^{i x^2} (1 - Phi(e^{i pi/4} x))`, the combination the Mordell
//! H-sums need: there the oscillatory prefactor cancels analytically, so no
//! large quadratic phase is ever formed on the main term.

use crate::precision::{complex_exp_2pii, PrecisionContext, XComplex, XReal};

/// Parameters of the Poisson-summation branch for a given (x, eps).
#[derive(Debug, Clone, Copy)]
pub struct ErfConfig {
    pub eps: f64,
    /// `sqrt(ln(1/eps))`.
    pub gamma: f64,
    /// Trapezoid step h: `pi/(2 gamma)`, or `pi/(4 gamma)` on `2g < x < 4g`.
    pub step_size: f64,
    /// Hard cap on summation terms, `ceil(4 gamma^2)`.
    pub trunc_n: usize,
}

impl ErfConfig {
    pub fn new(eps: f64, x: f64) -> Self {
        let gamma = (1.0 / eps).ln().sqrt();
        let step_size = if x <= 2.0 * gamma || x >= 4.0 * gamma {
            std::f64::consts::PI / (2.0 * gamma)
        } else {
            std::f64::consts::PI / (4.0 * gamma)
        };
        let trunc_n = (4.0 * gamma * gamma).ceil() as usize;
        ErfConfig {
            eps,
            gamma,
            step_size,
            trunc_n,
        }
    }
}

/// `Phi(e^{i pi/4} x)` to within +-eps for any finite real x.
pub fn erf_rot(x: &XReal, eps: f64, ctx: &PrecisionContext) -> XComplex {
    if x.is_negative() {
        return erf_rot(&x.neg(), eps, ctx).neg();
    }
    if x.cmp_f64(1.0) != std::cmp::Ordering::Greater {
        return taylor_phi(x, eps, ctx);
    }
    let (main_bare, r_term) = poisson_core(x, eps, ctx);
    // Phi = 1 - e^{-i x^2} main_bare + R
    let e_minus = phase_ix2(x, ctx).conj();
    let mut val = &ctx.cone() - &(&e_minus * &main_bare);
    if let Some(r) = r_term {
        val = &val + &r;
    }
    val
}

/// `e^{i x^2} (1 - Phi(e^{i pi/4} x))` for `x >= 0`.
///
/// On the Poisson branch this is `main_bare - e^{i x^2} R`, formed without
/// ever multiplying the main term by an oscillatory factor.
pub fn erf_rot_scaled(x: &XReal, eps: f64, ctx: &PrecisionContext) -> XComplex {
    debug_assert!(!x.is_negative());
    if x.cmp_f64(1.0) != std::cmp::Ordering::Greater {
        let phi = taylor_phi(x, eps, ctx);
        return &phase_ix2(x, ctx) * &(&ctx.cone() - &phi);
    }
    let (main_bare, r_term) = poisson_core(x, eps, ctx);
    match r_term {
        Some(r) => &main_bare - &(&phase_ix2(x, ctx) * &r),
        None => main_bare,
    }
}

/// `e^{i x^2}` with mod-1 reduction of `x^2 / (2 pi)`.
fn phase_ix2(x: &XReal, ctx: &PrecisionContext) -> XComplex {
    let turns = &x.square() / &ctx.two_pi();
    complex_exp_2pii(&turns, ctx)
}

/// Taylor branch: `(2/sqrt(pi)) e^{i pi/4} sum (-i)^n x^{2n+1} / (n! (2n+1))`,
/// truncated once `x^{2n+1}/(n!(2n+1)) <= eps sqrt(pi)/8`.
fn taylor_phi(x: &XReal, eps: f64, ctx: &PrecisionContext) -> XComplex {
    let x2 = x.square();
    let bound = eps * std::f64::consts::PI.sqrt() / 8.0;
    let mut mag = x.clone(); // x^{2n+1} / n!
    let mut re = ctx.zero();
    let mut im = ctx.zero();
    let mut n: u64 = 0;
    loop {
        let contrib = mag.div_u64(2 * n + 1);
        match n % 4 {
            0 => re = &re + &contrib,
            1 => im = &im - &contrib,
            2 => re = &re - &contrib,
            _ => im = &im + &contrib,
        }
        if n >= 2 && contrib.abs().cmp_f64(bound) == std::cmp::Ordering::Less {
            break;
        }
        n += 1;
        mag = (&mag * &x2).div_u64(n);
        if n > 200_000 {
            break; // unreachable for x <= 1 and eps > 0
        }
    }
    let c = &ctx.from_u64(2) / &ctx.pi().sqrt();
    let rot = ctx.eighth_root();
    (&XComplex::new(re, im) * &rot).scale(&c)
}

/// Poisson branch shared core. Returns `main_bare` (the trapezoid sum with
/// the `e^{-i x^2}` prefactor cancelled off) and the pole term `R` when
/// `Re z < pi/h`.
fn poisson_core(x: &XReal, eps: f64, ctx: &PrecisionContext) -> (XComplex, Option<XComplex>) {
    let xf = x.to_f64();
    let cfg = ErfConfig::new(eps, xf);
    let inner_band = xf > 2.0 * cfg.gamma && xf < 4.0 * cfg.gamma;
    let denom = if inner_band { 4.0 * cfg.gamma } else { 2.0 * cfg.gamma };
    // h only has to satisfy e^{-pi^2/h^2} <= eps^4; the identity itself is
    // uniform in h, so the f64 rounding of gamma is harmless.
    let h = &ctx.pi() / &ctx.from_f64(denom);

    let x2 = x.square();
    let x4 = x2.square();
    let h2 = h.square();
    let rho2 = h2.ldexp(1).neg().exp(); // e^{-2 h^2}

    // S = -i/x^2 + 2 sum_k e^{-k^2 h^2} / (i x^2 + k^2 h^2)
    let mut s_re = ctx.zero();
    let mut s_im = x2.recip().neg();
    let mut u = h2.neg().exp(); // e^{-k^2 h^2}, k = 1
    let mut v = &u * &rho2; // e^{-(2k+1) h^2}, k = 1
    let mut b = h2.clone(); // k^2 h^2
    let mut step = &h2 + &h2.ldexp(1); // (2k+1) h^2, k = 1

    // f64 shadow values for the tail cutoff
    let h2f = cfg.step_size * cfg.step_size;
    let ln_pref = (2.0 * cfg.step_size * xf / std::f64::consts::PI).ln() - (xf * xf).ln();
    let ln_stop = (eps / 8.0).ln();

    let mut k: usize = 1;
    loop {
        let den = &b.square() + &x4;
        let inv = &u / &den;
        s_re = &s_re + &(&inv * &b).ldexp(1);
        s_im = &s_im - &(&inv * &x2).ldexp(1);
        if k >= cfg.trunc_n {
            break;
        }
        // tail from k+1 on: <= u_{k+1} / ((1 - r) x^2), r = e^{-(2k+3) h^2}
        let kn = (k + 1) as f64;
        let ln_u_next = -kn * kn * h2f;
        let r = (-(2.0 * kn + 1.0) * h2f).exp();
        if ln_pref + ln_u_next - (1.0 - r).ln() < ln_stop {
            break;
        }
        u = &u * &v;
        v = &v * &rho2;
        b = &b + &step;
        step = &step + &h2.ldexp(1);
        k += 1;
    }
    let s = XComplex::new(s_re, s_im);
    let pref = &(&h * x) / &ctx.pi();
    let main_bare = (&s * &ctx.eighth_root()).scale(&pref);

    // pole term applies when Re z = x/sqrt(2) < pi/h
    let r_term = if xf / std::f64::consts::SQRT_2 < std::f64::consts::PI / cfg.step_size {
        // e^{2 pi z/h} = e^a e^{i a}, a = sqrt(2) pi x / h
        let sqrt2 = ctx.from_u64(2).sqrt();
        let a = &(&(&ctx.pi() * x) * &sqrt2) / &h;
        let ea = a.exp();
        let rot = complex_exp_2pii(&(&a / &ctx.two_pi()), ctx);
        let denom = &rot.scale(&ea) - &ctx.cone();
        Some(denom.recip().scale(&ctx.from_u64(2)))
    } else {
        None
    };
    (main_bare, r_term)
}

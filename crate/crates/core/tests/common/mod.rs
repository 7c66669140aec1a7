//! Shared test harness: adaptive tanh-sinh quadrature at extended precision
//! and the independent integral oracles built on it. Everything here is
//! deliberately separate from the library's evaluation paths — these
//! integrals are what the series/identity implementations are checked
//! against.

#![allow(dead_code)]

use thetasum::{complex_exp_2pii, PrecisionContext, XComplex, XReal};

/// `e^w` for complex `w` (moderate imaginary part; no large-phase
/// reduction needed in oracle use).
pub fn cexp(w: &XComplex) -> XComplex {
    let mag = w.re.exp();
    let (s, c) = w.im.sin_cos();
    XComplex::new(&c * &mag, &s * &mag)
}

pub fn ccosh(w: &XComplex) -> XComplex {
    let a = cexp(w);
    let b = cexp(&w.neg());
    XComplex::new((&a.re + &b.re).ldexp(-1), (&a.im + &b.im).ldexp(-1))
}

/// Tanh-sinh quadrature of `f` over `[a, b]`, doubling the level until two
/// successive refinements agree to `tol` (absolute, plus matching relative
/// slack). Integrands are assumed analytic on the open interval.
pub fn tanh_sinh<F: Fn(&XReal) -> XComplex>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    ctx: &PrecisionContext,
) -> XComplex {
    let center = ctx.from_f64((a + b) / 2.0);
    let half = ctx.from_f64((b - a) / 2.0);
    let half_pi = ctx.pi().ldexp(-1);

    // abscissa cutoff: weight decays like 4 e^{-2 (pi/2) sinh u}
    let target = tol.min(2f64.powi(-(ctx.working_bits() as i32) + 8));
    let u_max = (2.0 / std::f64::consts::PI * ((1.0 / target).ln() / 2.0 + 6.0)).asinh();

    let eval_level = |level: u32| -> XComplex {
        let steps = (u_max * 2f64.powi(level as i32)).ceil() as i64;
        let h = ctx.from_f64(u_max / steps as f64);
        let mut acc = ctx.czero();
        for j in -steps..=steps {
            let u = h.mul_i64(j);
            let (sh, ch) = {
                let e = u.exp();
                let einv = e.recip();
                ((&e - &einv).ldexp(-1), (&e + &einv).ldexp(-1))
            };
            let v = &half_pi * &sh;
            let cv = {
                let e = v.exp();
                let einv = e.recip();
                (&e + &einv).ldexp(-1)
            };
            // t = tanh(v), w = (pi/2) cosh(u) / cosh(v)^2
            let t = {
                let e2 = v.ldexp(1).exp();
                let num = &e2 - &ctx.one();
                let den = &e2 + &ctx.one();
                &num / &den
            };
            let w = &(&half_pi * &ch) / &cv.square();
            let x = &center + &(&half * &t);
            let fx = f(&x);
            acc = &acc + &fx.scale(&w);
        }
        acc.scale(&(&h * &half))
    };

    let mut prev = eval_level(3);
    for level in 4..=11 {
        let cur = eval_level(level);
        let diff = (&cur - &prev).abs().to_f64();
        let scale = 1.0 + cur.abs().to_f64();
        if diff <= tol * scale {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// `Phi(e^{i pi/4} x)` by Taylor (x <= 1) or by the contour-rotated tail
/// integral `1 - (2/sqrt(pi)) e^{-i x^2} int_0^inf e^{-v^2 - sqrt2 x v (1+i)} dv`.
pub fn phi_oracle(xv: f64, tol: f64, ctx: &PrecisionContext) -> XComplex {
    assert!(xv >= 0.0);
    let x = ctx.from_f64(xv);
    if xv <= 1.0 {
        return phi_taylor_reference(&x, tol, ctx);
    }
    let sqrt2 = ctx.from_u64(2).sqrt();
    let sx = &sqrt2 * &x;
    let integrand = |v: &XReal| -> XComplex {
        // e^{-v^2 - sqrt2 x v} * e^{-i sqrt2 x v}
        let mag = (&v.square() + &(&sx * v)).neg().exp();
        let (s, c) = (&sx * v).sin_cos();
        XComplex::new(&c * &mag, (&s * &mag).neg())
    };
    // e^{-v^2 - sqrt2 x v} < target once v^2 + sqrt2 x v > ln(1/target) + 6
    let c = (1.0 / tol).ln() + 14.0;
    let bb = std::f64::consts::SQRT_2 * xv;
    let v_max = (-bb + (bb * bb + 4.0 * c).sqrt()) / 2.0;
    let tail = tanh_sinh(integrand, 0.0, v_max, tol / 10.0, ctx);
    // phase e^{-i x^2} with mod-1 reduction
    let phase = complex_exp_2pii(&(&x.square() / &ctx.two_pi()), ctx).conj();
    let coef = &ctx.from_u64(2) / &ctx.pi().sqrt();
    &ctx.cone() - &(&phase * &tail).scale(&coef)
}

/// Plain Taylor partial sum of `Phi(e^{i pi/4} x)`, summed until the term
/// drops below `tol/8`; reference-only.
pub fn phi_taylor_reference(x: &XReal, tol: f64, ctx: &PrecisionContext) -> XComplex {
    let x2 = x.square();
    let mut mag = x.clone();
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
        if n > 2 && contrib.abs().cmp_f64(tol / 8.0) == std::cmp::Ordering::Less {
            break;
        }
        n += 1;
        mag = (&mag * &x2).div_u64(n);
    }
    let coef = &ctx.from_u64(2) / &ctx.pi().sqrt();
    (&XComplex::new(re, im) * &ctx.eighth_root()).scale(&coef)
}

/// Mordell integral by quadrature of the rotated representation:
/// `h(z, tau) = 2 e^{i pi/4} int_0^inf e^{-pi tau y^2}
/// cosh(2 pi z theta y)/cosh(pi theta y) dy`, `tau > 0`. Valid for
/// moderate |z| (the integrand grows like e^{sqrt2 pi (|z| - 1/2) y}
/// before the Gaussian takes over).
pub fn mordell_oracle(z: &XReal, tau: &XReal, tol: f64, ctx: &PrecisionContext) -> XComplex {
    let zv = z.to_f64();
    let tauv = tau.to_f64();
    assert!(tauv > 0.0);
    let growth = std::f64::consts::SQRT_2 * std::f64::consts::PI * (zv.abs() + 0.5);
    let y_max = {
        // solve pi tau y^2 - growth*y > ln(1/tol) + 10
        let c = (1.0 / tol).ln() + 10.0;
        let aq = std::f64::consts::PI * tauv;
        (growth + (growth * growth + 4.0 * aq * c).sqrt()) / (2.0 * aq)
    };
    let inv_sqrt2 = ctx.from_u64(2).sqrt().recip();
    let tau = tau.clone();
    let z = z.clone();
    let pi_over_sqrt2 = &ctx.pi() * &inv_sqrt2;
    let integrand = |y: &XReal| -> XComplex {
        // pi theta y = (pi y/sqrt2)(1 + i)
        let re = &pi_over_sqrt2 * y;
        let arg = XComplex::new(re.clone(), re);
        let num = ccosh(&arg.scale(&z.ldexp(1)));
        let den = ccosh(&arg);
        let gauss = (&(&ctx.pi() * &tau) * &y.square()).neg().exp();
        (&num / &den).scale(&gauss)
    };
    let integral = tanh_sinh(integrand, 0.0, y_max, tol / 10.0, ctx);
    (&integral * &ctx.eighth_root()).scale(&ctx.from_u64(2))
}

/// `p_k(x) = int_0^1 e^{-xu} u^k du` by quadrature.
pub fn p_oracle(xv: f64, k: usize, tol: f64, ctx: &PrecisionContext) -> XReal {
    let x = ctx.from_f64(xv);
    let integrand = |u: &XReal| -> XComplex {
        let mut p = ctx.one();
        for _ in 0..k {
            p = &p * u;
        }
        XComplex::new(&(&x * u).neg().exp() * &p, ctx.zero())
    };
    tanh_sinh(integrand, 0.0, 1.0, tol, ctx).re
}

/// `J(w, tau) = int_0^inf e^{-2xw} e^{i tau x^2/pi} / cosh(x) dx` by
/// quadrature (`w > 1/2`).
pub fn j_oracle(w: &XReal, tau: &XReal, tol: f64, ctx: &PrecisionContext) -> XComplex {
    let wv = w.to_f64();
    assert!(wv > 0.5);
    let x_max = ((1.0 / tol).ln() + 10.0) / (2.0 * wv + 1.0).min(2.0 * wv);
    let integrand = |x: &XReal| -> XComplex {
        let mag = &(&w.ldexp(1) * x).neg().exp() / &x.cosh();
        let ph = &(tau * &x.square()) / &ctx.pi();
        let (s, c) = ph.sin_cos();
        XComplex::new(&c * &mag, &s * &mag)
    };
    tanh_sinh(integrand, 0.0, x_max, tol, ctx)
}

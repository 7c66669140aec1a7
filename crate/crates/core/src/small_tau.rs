//! `F_n(z, tau)` in the perturbative regime `|tau| < n^-4`, by Taylor
//! expansion of the quadratic phase.
//!
//! Two routes, split at `|z| = 1/n`:
//! - `|z| > 1/n`: Leibniz differentiation of the closed geometric sum,
//!   with the `a_{j,k}` coefficient recursion (one row kept at a time);
//! - `|z| <= 1/n`: joint expansion in `(z k + tau k^2)` reduced to
//!   Bernoulli power sums `S_j(n)`.
//!
//! When the truncation length satisfies `L^3 >= n`, direct summation is
//! cheaper and is used instead (so the cost stays O(L^3) either way).

use crate::direct::direct_sum_terms;
use crate::error::{Error, Result};
use crate::precision::{complex_exp_2pii, PrecisionContext, XComplex, XReal};
use crate::tables::bernoulli_scaled;

/// One row of the `a_{j,k}` triangle (`1 <= k <= j+1`), the coefficients of
/// `f_j(z) = sum_k a_{j,k} (n(e^{2 pi i z}-1))^{-k}`.
#[derive(Debug, Clone)]
pub struct SmallTauState {
    pub row_index: usize,
    /// `coeffs[k-1] = a_{row_index, k}`.
    pub coeffs: Vec<XComplex>,
}

impl SmallTauState {
    /// Row 0: `a_{0,1} = 1`.
    pub fn initial(ctx: &PrecisionContext) -> Self {
        SmallTauState {
            row_index: 0,
            coeffs: vec![ctx.cone()],
        }
    }
}

/// `a_{j+1,k} = -(2 pi i/n) ((k-1) a_{j,k-1} + (k/n) a_{j,k} [k <= j+1])`.
pub fn a_row_advance(state: &SmallTauState, n: u64, ctx: &PrecisionContext) -> SmallTauState {
    let j = state.row_index;
    let ninv = ctx.from_u64(n).recip();
    let two_pi_over_n = &ctx.two_pi() * &ninv;
    let mut coeffs = Vec::with_capacity(j + 2);
    for k in 1..=j + 2 {
        let mut t = ctx.czero();
        if k >= 2 {
            t = &t + &state.coeffs[k - 2].scale(&ctx.from_u64(k as u64 - 1));
        }
        if k <= j + 1 {
            t = &t + &state.coeffs[k - 1].scale(&(&ctx.from_u64(k as u64) * &ninv));
        }
        // multiply by -(2 pi i / n)
        coeffs.push(t.mul_i().scale(&two_pi_over_n).neg());
    }
    SmallTauState {
        row_index: j + 1,
        coeffs,
    }
}

/// Truncation length `L = ceil(2 ln(n/eps))`.
pub fn truncation_length(n: u64, eps: f64) -> usize {
    (2.0 * ((n as f64) / eps).ln()).ceil().max(1.0) as usize
}

/// `F_n(z, tau) +- eps` for `|z| <= 1/2`, `|tau| < n^-4`.
pub fn small_tau_eval(
    n: u64,
    z: &XReal,
    tau: &XReal,
    eps: f64,
    ctx: &PrecisionContext,
) -> Result<XComplex> {
    if n < 1 {
        return Err(Error::InvalidN(n));
    }
    check_regime(n, z, tau)?;
    let l_cap = truncation_length(n, eps);
    if (l_cap as u128).pow(3) >= n as u128 {
        return Ok(direct_sum_terms(n, z, tau, ctx));
    }
    let zn_bound = ctx.from_u64(n).recip();
    if z.abs().cmp(&zn_bound) == std::cmp::Ordering::Greater {
        leibniz_branch(n, z, tau, eps, ctx)
    } else {
        bernoulli_branch(n, z, tau, eps, ctx)
    }
}

fn check_regime(n: u64, z: &XReal, tau: &XReal) -> Result<()> {
    // |tau| n^4 < 1 and |z| <= 1/2
    let n4 = XReal::parse_decimal(&(n as u128).pow(4).to_string(), z.prec());
    let scaled = &tau.abs() * &n4;
    if scaled.cmp_f64(1.0) != std::cmp::Ordering::Less
        || z.abs().cmp_f64(0.5) == std::cmp::Ordering::Greater
    {
        return Err(Error::WrongRegime {
            n,
            z: z.to_f64(),
            tau: tau.to_f64(),
        });
    }
    Ok(())
}

/// Branch for `1/n < |z| <= 1/2`: Leibniz rule on
/// `d^{2l}/dz^{2l} [(e^{2 pi i z(n+1)} - 1)/(e^{2 pi i z} - 1)]`.
pub fn leibniz_branch(
    n: u64,
    z: &XReal,
    tau: &XReal,
    eps: f64,
    ctx: &PrecisionContext,
) -> Result<XComplex> {
    check_regime(n, z, tau)?;
    let l_cap = truncation_length(n, eps).max(2);
    let jmax = 2 * l_cap;

    let e = complex_exp_2pii(z, ctx);
    let em1 = &e - &ctx.cone();
    // denominator safety: n |e^{2 pi i z} - 1| >= 4 on 1/n < |z| <= 1/2
    let n_em1 = em1.abs().mul_u64(n);
    debug_assert!(
        n_em1.cmp_f64(4.0 * (1.0 - 1e-12)) != std::cmp::Ordering::Less,
        "denominator bound violated: n|e(z)-1| = {}",
        n_em1.to_f64()
    );
    let d = em1.scale(&ctx.from_u64(n)).recip(); // (n(e^{2 pi i z}-1))^{-1}

    // powers of d up to jmax+1
    let mut dpow = Vec::with_capacity(jmax + 2);
    dpow.push(ctx.cone());
    for i in 1..=jmax + 1 {
        dpow.push(&dpow[i - 1] * &d);
    }

    // f_j via the a-row recursion, one row alive at a time
    let mut f = Vec::with_capacity(jmax + 1);
    let mut row = SmallTauState::initial(ctx);
    loop {
        let j = row.row_index;
        let mut fj = ctx.czero();
        for k in 1..=j + 1 {
            fj = &fj + &(&row.coeffs[k - 1] * &dpow[k]);
        }
        f.push(fj);
        if j == jmax {
            break;
        }
        row = a_row_advance(&row, n, ctx);
    }

    // g_j = w^j e^{2 pi i z(n+1)} - [j=0], w = 2 pi i (n+1)/n^2
    let e_n1 = complex_exp_2pii(&z.mul_u64(n + 1).fract(), ctx);
    let w_mag = &ctx.two_pi().mul_u64(n + 1) / &ctx.from_u128((n as u128) * (n as u128));
    let mut g = Vec::with_capacity(jmax + 1);
    let mut wpow = ctx.cone();
    for j in 0..=jmax {
        if j > 0 {
            wpow = wpow.mul_i().scale(&w_mag);
        }
        let gj = &wpow * &e_n1;
        g.push(if j == 0 { &gj - &ctx.cone() } else { gj });
    }

    // sum over l: coef_l = n (tau n^4/(2 pi i))^l / l!;
    // base is purely imaginary: -i tau n^4/(2 pi)
    let n4 = ctx.from_u128((n as u128).pow(4));
    let base_im = &(tau * &n4) / &ctx.two_pi();
    let base = XComplex::new(ctx.zero(), base_im.neg());
    let mut coef = XComplex::new(ctx.from_u64(n), ctx.zero());
    let mut total = ctx.czero();
    let stop_mag = eps / 8.0;
    let mut small_streak = 0u32;
    for l in 0..=l_cap {
        if l > 0 {
            coef = (&coef * &base).div_real(&ctx.from_u64(l as u64));
        }
        // T_l = sum_j C(2l, j) f_j g_{2l-j}, binomial row built multiplicatively
        let mut t = ctx.czero();
        let mut binom = ctx.one();
        for j in 0..=2 * l {
            t = &t + &(&(&f[j] * &g[2 * l - j]).scale(&binom));
            if j < 2 * l {
                binom = (&binom.mul_u64((2 * l - j) as u64)).div_u64(j as u64 + 1);
            }
        }
        let term = &coef * &t;
        total = &total + &term;
        if term.abs().cmp_f64(stop_mag) == std::cmp::Ordering::Less {
            small_streak += 1;
            if small_streak >= 2 && l >= 1 {
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    Ok(total)
}

/// `S_j(n) = n^{-j} sum_{k=0}^n k^j` via the Bernoulli closed form for
/// `j >= 1`; `S_0 = n + 1`.
pub(crate) fn power_sum_scaled(
    n: u64,
    jmax: usize,
    ctx: &PrecisionContext,
) -> Vec<XReal> {
    let bern = bernoulli_scaled(jmax.max(1), ctx);
    // factorials and inverse factorials up to jmax+1
    let mut fact = Vec::with_capacity(jmax + 2);
    fact.push(ctx.one());
    for i in 1..=jmax + 1 {
        fact.push(fact[i - 1].mul_u64(i as u64));
    }
    let inv_fact: Vec<XReal> = fact.iter().map(|f| f.recip()).collect();
    let ninv = ctx.from_u64(n).recip();
    let mut ninv_pow = Vec::with_capacity(jmax + 1);
    ninv_pow.push(ctx.one());
    for i in 1..=jmax {
        ninv_pow.push(&ninv_pow[i - 1] * &ninv);
    }

    let mut s = Vec::with_capacity(jmax + 1);
    s.push(ctx.from_u64(n + 1));
    for j in 1..=jmax {
        // S_j = (n/(j+1)) (j+1)! sum_i (-1)^i (B_i/i!) n^{-i} / (j+1-i)!
        let mut acc = ctx.zero();
        for i in 0..=j {
            if i >= 2 && i % 2 == 1 {
                continue; // odd Bernoulli numbers vanish
            }
            let term = &(&bern.b_over_fact[i] * &ninv_pow[i]) * &inv_fact[j + 1 - i];
            acc = if i % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        let scale = &(&fact[j + 1] * &ctx.from_u64(n)).div_u64(j as u64 + 1);
        s.push(&acc * scale);
    }
    s
}

/// Branch for `|z| <= 1/n`: expand `exp(2 pi i (z k + tau k^2))` jointly and
/// reduce to power sums.
pub fn bernoulli_branch(
    n: u64,
    z: &XReal,
    tau: &XReal,
    eps: f64,
    ctx: &PrecisionContext,
) -> Result<XComplex> {
    check_regime(n, z, tau)?;
    let l_cap = truncation_length(n, eps).max(2);
    let s = power_sum_scaled(n, 2 * l_cap, ctx);

    let nz = z.mul_u64(n);
    let n2t = tau * &ctx.from_u128((n as u128) * (n as u128));
    let mut zp = Vec::with_capacity(l_cap + 1);
    let mut tp = Vec::with_capacity(l_cap + 1);
    zp.push(ctx.one());
    tp.push(ctx.one());
    for i in 1..=l_cap {
        zp.push(&zp[i - 1] * &nz);
        tp.push(&tp[i - 1] * &n2t);
    }

    // stop only past the |U_l| (4 pi r)^l/l! hump, r = max(|nz|, |n^2 tau|)
    let r = nz.abs().to_f64().max(n2t.abs().to_f64());
    let min_stop = (4.0 * std::f64::consts::PI * r).ceil() as usize + 2;
    let stop_mag = eps / 8.0;

    let mut coef = ctx.cone(); // (2 pi i)^l / l!
    let mut total = ctx.czero();
    let mut binom: Vec<XReal> = vec![ctx.one()]; // row C(l, .)
    let mut small_streak = 0u32;
    for l in 0..=l_cap {
        if l > 0 {
            coef = coef.mul_i().scale(&ctx.two_pi().div_u64(l as u64));
            let mut next = Vec::with_capacity(l + 1);
            next.push(ctx.one());
            for j in 1..l {
                next.push(&binom[j - 1] + &binom[j]);
            }
            next.push(ctx.one());
            binom = next;
        }
        let mut u = ctx.zero();
        for j in 0..=l {
            u = &u + &(&(&(&binom[j] * &zp[l - j]) * &tp[j]) * &s[l + j]);
        }
        let term = coef.scale(&u);
        total = &total + &term;
        if term.abs().cmp_f64(stop_mag) == std::cmp::Ordering::Less {
            small_streak += 1;
            if small_streak >= 2 && l >= min_stop {
                break;
            }
        } else {
            small_streak = 0;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::{direct_sum_terms, ThetaQuery};
    use crate::direct::direct_sum;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(200, 1e-25, 1.0).unwrap()
    }

    #[test]
    fn a_row_first_advance_matches_closed_form() {
        let c = ctx();
        let n = 37u64;
        let row1 = a_row_advance(&SmallTauState::initial(&c), n, &c);
        assert_eq!(row1.row_index, 1);
        // a_{1,1} = -2 pi i/n^2, a_{1,2} = -2 pi i/n
        let tp = c.two_pi();
        let a11 = &row1.coeffs[0];
        assert!(a11.re.to_f64().abs() < 1e-40);
        let want11 = (&tp / &c.from_u64(n * n)).neg();
        assert!((&a11.im - &want11).abs().to_f64() < 1e-40);
        let a12 = &row1.coeffs[1];
        let want12 = (&tp / &c.from_u64(n)).neg();
        assert!((&a12.im - &want12).abs().to_f64() < 1e-40);
    }

    #[test]
    fn a_rows_stay_below_one() {
        let c = ctx();
        let n = 1_000_000u64;
        let mut row = SmallTauState::initial(&c);
        for _ in 0..60 {
            row = a_row_advance(&row, n, &c);
            for a in &row.coeffs {
                assert!(a.abs().cmp_f64(1.0) == std::cmp::Ordering::Less);
            }
        }
    }

    #[test]
    fn power_sums_match_direct_summation() {
        let c = ctx();
        for n in [7u64, 23, 50] {
            let s = power_sum_scaled(n, 10, &c);
            for j in 0..=10usize {
                let mut direct = c.zero();
                for k in 0..=n {
                    let mut p = c.one();
                    for _ in 0..j {
                        p = p.mul_u64(k);
                    }
                    direct = &direct + &p;
                }
                let mut scale = c.one();
                for _ in 0..j {
                    scale = &scale / &c.from_u64(n);
                }
                let want = &direct * &scale;
                let d = (&s[j] - &want).abs().to_f64();
                assert!(d < 1e-40, "n={n} j={j}: {d:e}");
            }
        }
    }

    #[test]
    fn leibniz_tau_zero_reproduces_geometric_sum() {
        let c = ctx();
        let (n, zv) = (100u64, 0.3);
        let z = c.from_f64(zv);
        let got = leibniz_branch(n, &z, &c.zero(), 1e-25, &c).unwrap();
        let e = complex_exp_2pii(&z, &c);
        let en1 = complex_exp_2pii(&z.mul_u64(n + 1).fract(), &c);
        let want = &(&en1 - &c.cone()) / &(&e - &c.cone());
        assert!((&got - &want).abs().to_f64() < 1e-25);
    }

    #[test]
    fn bernoulli_tau_zero_z_zero_counts_terms() {
        let c = ctx();
        let got = bernoulli_branch(100, &c.zero(), &c.zero(), 1e-25, &c).unwrap();
        assert!((got.re.to_f64() - 101.0).abs() < 1e-20);
        assert!(got.im.to_f64().abs() < 1e-20);
    }

    #[test]
    fn leibniz_matches_oracle() {
        let c = ctx();
        let eps = 1e-20;
        for (n, zv, tv) in [
            (50u64, 0.3, 1e-8),
            (200, -0.47, -3e-10),
            (150, 0.5, 1.5e-9),
            (50, 0.0415, 1e-7),
        ] {
            let got = leibniz_branch(n, &c.from_f64(zv), &c.from_f64(tv), eps, &c).unwrap();
            let want = direct_sum(&ThetaQuery::new(n, zv, tv, eps), &c);
            let d = (&got - &want).abs().to_f64();
            assert!(d <= eps, "n={n} z={zv} tau={tv:e}: {d:e}");
        }
    }

    #[test]
    fn bernoulli_matches_oracle() {
        let c = ctx();
        let eps = 1e-20;
        for (n, zv, tv) in [
            (50u64, 1e-3, 1e-8),
            (200, -4e-3, 2e-10),
            (100, 0.009, -1e-9),
            (60, 0.0, 5e-9),
        ] {
            let got = bernoulli_branch(n, &c.from_f64(zv), &c.from_f64(tv), eps, &c).unwrap();
            let want = direct_sum(&ThetaQuery::new(n, zv, tv, eps), &c);
            let d = (&got - &want).abs().to_f64();
            assert!(d <= eps, "n={n} z={zv} tau={tv:e}: {d:e}");
        }
    }

    #[test]
    fn branch_agreement_near_split() {
        // just below and just above the |z| = 1/n split, both against the
        // oracle, n <= 200
        let c = ctx();
        let eps = 1e-18;
        for n in [80u64, 150, 200] {
            let below = 0.7 / n as f64;
            let above = 1.5 / n as f64;
            let tv = 0.3 / (n as f64).powi(4);
            let b = bernoulli_branch(n, &c.from_f64(below), &c.from_f64(tv), eps, &c).unwrap();
            let a = leibniz_branch(n, &c.from_f64(above), &c.from_f64(tv), eps, &c).unwrap();
            for (zv, got) in [(below, b), (above, a)] {
                let want = direct_sum(&ThetaQuery::new(n, zv, tv, eps), &c);
                let d = (&got - &want).abs().to_f64();
                assert!(d <= 2.0 * eps, "n={n} z={zv}: {d:e}");
            }
        }
    }

    #[test]
    fn dispatcher_falls_back_to_direct_when_cheap() {
        let c = ctx();
        // L^3 >= n here, so the dispatcher must go through direct summation
        let (n, zv, tv) = (120u64, 0.21, 1e-9);
        let via = small_tau_eval(n, &c.from_f64(zv), &c.from_f64(tv), 1e-18, &c).unwrap();
        let direct = direct_sum_terms(n, &c.from_f64(zv), &c.from_f64(tv), &c);
        assert!(via.re.identical(&direct.re) && via.im.identical(&direct.im));
    }

    #[test]
    fn rejects_wrong_regime() {
        let c = ctx();
        assert!(matches!(
            small_tau_eval(10, &c.from_f64(0.1), &c.from_f64(1e-3), 1e-12, &c),
            Err(Error::WrongRegime { .. })
        ));
        assert!(matches!(
            small_tau_eval(10, &c.from_f64(0.7), &c.from_f64(1e-6), 1e-12, &c),
            Err(Error::WrongRegime { .. })
        ));
    }
}

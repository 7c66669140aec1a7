//! Precomputed constant sequences: scaled Euler numbers (sech series
//! coefficients), scaled Bernoulli numbers, and Gauss-Laguerre quadrature
//! rules, cached per working precision.
//!
//! Build-once, read-many: construction runs single-threaded behind a map
//! lock; finished tables are immutable and shared via `Arc`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::precision::{PrecisionContext, XReal};

/// Coefficients of `1/cosh(x) = sum E~_k x^k` (`E~_k = E_k / k!`).
#[derive(Debug)]
pub struct EulerTable {
    /// `E~_0 ..= E~_count`; odd indices are exactly zero.
    pub e_tilde: Vec<XReal>,
}

/// `B_i / i!` for the Bernoulli numbers `B_0, B_1, ...` (`B_1 = -1/2`).
#[derive(Debug)]
pub struct BernoulliTable {
    pub b_over_fact: Vec<XReal>,
}

/// Gauss-Laguerre rule for the weight `e^{-y}` on `[0, inf)`.
///
/// The full order-`order` rule is stored (so `sum(weights) = 1` and the
/// moment identities hold); evaluation uses only the smallest
/// `truncation` nodes.
#[derive(Debug)]
pub struct LaguerreRule {
    pub order: usize,
    pub truncation: usize,
    /// All `order` nodes, strictly increasing.
    pub nodes: Vec<XReal>,
    pub weights: Vec<XReal>,
}

impl LaguerreRule {
    /// Nodes/weights actually used by the truncated rule.
    pub fn active(&self) -> impl Iterator<Item = (&XReal, &XReal)> {
        self.nodes.iter().zip(self.weights.iter()).take(self.truncation)
    }
}

type EulerCache = Mutex<HashMap<(u32, usize), Arc<EulerTable>>>;
type BernoulliCache = Mutex<HashMap<(u32, usize), Arc<BernoulliTable>>>;
type LaguerreCache = Mutex<HashMap<(u32, usize, usize), Arc<LaguerreRule>>>;

static EULER_CACHE: OnceLock<EulerCache> = OnceLock::new();
static BERNOULLI_CACHE: OnceLock<BernoulliCache> = OnceLock::new();
static LAGUERRE_CACHE: OnceLock<LaguerreCache> = OnceLock::new();

/// `E~_0 ..= E~_count` by convolving the cosh series against the unknown
/// sech coefficients: `E~_{2m} = -sum_{j<m} E~_{2j} / (2(m-j))!`.
pub fn euler_numbers(count: usize, ctx: &PrecisionContext) -> Arc<EulerTable> {
    let cache = EULER_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (ctx.working_bits(), count);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Arc::clone(t);
    }
    let table = Arc::new(build_euler(count, ctx));
    cache.lock().unwrap().insert(key, Arc::clone(&table));
    table
}

fn build_euler(count: usize, ctx: &PrecisionContext) -> EulerTable {
    let m_max = count / 2;
    // 1/(2i)! for i = 0..=m_max
    let mut inv_fact = Vec::with_capacity(m_max + 1);
    inv_fact.push(ctx.one());
    let mut fact = ctx.one();
    for i in 1..=m_max {
        fact = fact.mul_u64((2 * i as u64 - 1) * (2 * i as u64));
        inv_fact.push(fact.recip());
    }
    let mut even = Vec::with_capacity(m_max + 1);
    even.push(ctx.one());
    for m in 1..=m_max {
        let mut s = ctx.zero();
        for j in 0..m {
            s = &s + &(&even[j] * &inv_fact[m - j]);
        }
        even.push(s.neg());
    }
    let mut e_tilde = Vec::with_capacity(count + 1);
    for k in 0..=count {
        if k % 2 == 0 {
            e_tilde.push(even[k / 2].clone());
        } else {
            e_tilde.push(ctx.zero());
        }
    }
    EulerTable { e_tilde }
}

/// `B_i/i!` for `i = 0..=count` from the defining convolution of
/// `x/(e^x - 1)`: `c_m = -sum_{j<m} c_j / (m-j+1)!`.
pub fn bernoulli_scaled(count: usize, ctx: &PrecisionContext) -> Arc<BernoulliTable> {
    let cache = BERNOULLI_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (ctx.working_bits(), count);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Arc::clone(t);
    }
    let table = Arc::new(build_bernoulli(count, ctx));
    cache.lock().unwrap().insert(key, Arc::clone(&table));
    table
}

fn build_bernoulli(count: usize, ctx: &PrecisionContext) -> BernoulliTable {
    // 1/k! for k = 0..=count+1
    let mut inv_fact = Vec::with_capacity(count + 2);
    inv_fact.push(ctx.one());
    let mut fact = ctx.one();
    for k in 1..=count + 1 {
        fact = fact.mul_u64(k as u64);
        inv_fact.push(fact.recip());
    }
    let mut c = Vec::with_capacity(count + 1);
    c.push(ctx.one());
    for m in 1..=count {
        let mut s = ctx.zero();
        for j in 0..m {
            s = &s + &(&c[j] * &inv_fact[m - j + 1]);
        }
        c.push(s.neg());
    }
    BernoulliTable { b_over_fact: c }
}

/// Laguerre polynomial pair `(L_m(x), L_{m-1}(x))` by the three-term
/// recurrence `(k+1) L_{k+1} = (2k+1-x) L_k - k L_{k-1}`.
fn laguerre_pair(m: usize, x: &XReal, ctx: &PrecisionContext) -> (XReal, XReal) {
    let mut prev = ctx.one(); // L_0
    if m == 0 {
        return (prev, ctx.zero());
    }
    let mut cur = &ctx.one() - x; // L_1
    for k in 1..m {
        let a = &ctx.from_u64(2 * k as u64 + 1) - x;
        let next = (&(&a * &cur) - &prev.mul_u64(k as u64)).div_u64(k as u64 + 1);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

fn laguerre_f64(m: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 - x;
    for k in 1..m {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// f64 pre-pass: roots of `L_order` built inductively from the interlacing
/// property, bisecting each bracket. Good to ~1e-12 relative, which is all
/// the extended-precision polish needs for its starting brackets.
fn laguerre_roots_f64(order: usize) -> Vec<f64> {
    let mut roots = vec![1.0f64]; // L_1
    for m in 2..=order {
        let upper = 4.0 * m as f64 + 2.0;
        let mut edges = Vec::with_capacity(m + 1);
        edges.push(0.0);
        edges.extend_from_slice(&roots);
        edges.push(upper);
        let mut next = Vec::with_capacity(m);
        for w in edges.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            let flo = laguerre_f64(m, lo);
            debug_assert!(flo * laguerre_f64(m, hi) <= 0.0);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if laguerre_f64(m, mid) * flo > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-13 * hi.max(1e-3) {
                    break;
                }
            }
            next.push(0.5 * (lo + hi));
        }
        roots = next;
    }
    roots
}

/// Gauss-Laguerre rule of the given order, truncated to the smallest
/// `truncation` nodes. Nodes are polished to working precision by
/// bracketed Newton iteration with bisection fallback; weights use
/// `w_i = x_i / ((M+1) L_{M+1}(x_i))^2`.
pub fn laguerre_rule(
    order: usize,
    truncation: usize,
    ctx: &PrecisionContext,
) -> Result<Arc<LaguerreRule>> {
    assert!(
        (1..=order).contains(&truncation),
        "truncation must satisfy 1 <= truncation <= order"
    );
    let cache = LAGUERRE_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (ctx.working_bits(), order, truncation);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Ok(Arc::clone(t));
    }
    let rule = Arc::new(build_laguerre(order, truncation, ctx)?);
    cache.lock().unwrap().insert(key, Arc::clone(&rule));
    Ok(rule)
}

fn build_laguerre(order: usize, truncation: usize, ctx: &PrecisionContext) -> Result<LaguerreRule> {
    let seeds = laguerre_roots_f64(order);
    let mut nodes = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    // Newton plateaus at a relative step of ~2^-working_bits (amplified by
    // the recurrence's accumulated rounding); treat the plateau as converged.
    let stop_shift = -(ctx.working_bits() as i32) + 16;
    let plateau_shift = -(ctx.working_bits() as i32) / 2;

    for (idx, &seed) in seeds.iter().enumerate() {
        // Bracket around the f64 seed, widening until a sign change shows.
        let mut half_width = (seed * 1e-9).max(1e-11);
        let mut bracket = None;
        for _ in 0..8 {
            let lo = ctx.from_f64((seed - half_width).max(1e-300));
            let hi = ctx.from_f64(seed + half_width);
            let flo = laguerre_pair(order, &lo, ctx).0;
            let fhi = laguerre_pair(order, &hi, ctx).0;
            if flo.is_negative() != fhi.is_negative() && !flo.is_zero() && !fhi.is_zero() {
                bracket = Some((lo, hi, flo.is_negative()));
                break;
            }
            half_width *= 8.0;
        }
        let (mut lo, mut hi, lo_neg) =
            bracket.ok_or(Error::RootSearchFailed { order, index: idx })?;

        // A few bisection steps to tighten, then Newton to full precision.
        for _ in 0..4 {
            let mid = (&lo + &hi).ldexp(-1);
            let fm = laguerre_pair(order, &mid, ctx).0;
            if fm.is_negative() == lo_neg {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = (&lo + &hi).ldexp(-1);
        let mut converged = false;
        let mut last_step: Option<XReal> = None;
        let mut stalled = 0u32;
        for _ in 0..64 {
            let (lm, lm1) = laguerre_pair(order, &x, ctx);
            // x L'_M(x) = M (L_M(x) - L_{M-1}(x))
            let deriv = (&lm - &lm1).mul_u64(order as u64);
            let step = &(&lm * &x) / &deriv;
            let next = &x - &step;
            // keep the iterate inside the bracket; bisect if it escapes
            let next = if next.cmp(&lo) == std::cmp::Ordering::Less
                || next.cmp(&hi) == std::cmp::Ordering::Greater
            {
                (&lo + &hi).ldexp(-1)
            } else {
                next
            };
            if lm.is_negative() == lo_neg {
                lo = x.clone();
            } else {
                hi = x.clone();
            }
            let mag = step.abs();
            let at_floor = mag.cmp(&x.abs().ldexp(plateau_shift)) == std::cmp::Ordering::Less;
            if at_floor {
                if let Some(prev) = &last_step {
                    if mag.cmp(prev) != std::cmp::Ordering::Less {
                        stalled += 1;
                    } else {
                        stalled = 0;
                    }
                }
                last_step = Some(mag.clone());
            }
            let done = step.is_zero()
                || mag.cmp(&x.abs().ldexp(stop_shift)) == std::cmp::Ordering::Less
                || stalled >= 2;
            x = next;
            if done {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::RootSearchFailed { order, index: idx });
        }
        let (lnext, _) = laguerre_pair(order + 1, &x, ctx);
        let denom = lnext.mul_u64(order as u64 + 1).square();
        weights.push(&x / &denom);
        nodes.push(x);
    }
    Ok(LaguerreRule {
        order,
        truncation,
        nodes,
        weights,
    })
}

//! Λ_{m,α,h} = min_{u ∈ (0,1]} u^{−αh}(1 + u + ⋯ + u^{mh}) and the size bounds
//! built from it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_space::check_odd_prime;

/// Lower end of the bisection bracket for the stationary point.
const U_FLOOR: f64 = 1e-12;
/// Relative bracket width at which root bisection stops.
const U_REL_WIDTH: f64 = 1e-14;
/// Bracket width in α for the W-constant crossing search.
const ALPHA_WIDTH: f64 = 1e-10;

/// Parameters (m, α, h) of G.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaQuery {
    pub m: u32,
    pub alpha: f64,
    pub h: u32,
}

impl LambdaQuery {
    pub fn new(m: u32, alpha: f64, h: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::input("m", "must be positive"));
        }
        if h == 0 {
            return Err(Error::input("h", "must be positive"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::input("alpha", format!("{alpha} is not a positive real")));
        }
        Ok(LambdaQuery { m, alpha, h })
    }

    fn degree(&self) -> u64 {
        self.m as u64 * self.h as u64
    }

    fn exponent(&self) -> f64 {
        self.alpha * self.h as f64
    }

    /// Σ_{i=0}^{mh} (i − αh) u^i, whose sign is the sign of G′(u).
    fn stationarity(&self, u: f64) -> f64 {
        let ah = self.exponent();
        (0..=self.degree())
            .rev()
            .fold(0.0, |acc, i| acc * u + (i as f64 - ah))
    }
}

/// Minimizer and minimum of G.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaResult {
    pub u_star: f64,
    pub value: f64,
    /// The minimum is attained strictly inside (0, 1).
    pub interior: bool,
}

fn geometric_sum(u: f64, degree: u64) -> f64 {
    (0..=degree).fold(0.0, |acc, _| acc * u + 1.0)
}

/// ln G(u), finite for every u in (0, 1].
pub fn ln_g(q: &LambdaQuery, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::input("u", format!("{u} is outside (0, 1]")));
    }
    Ok(-q.exponent() * u.ln() + geometric_sum(u, q.degree()).ln())
}

/// G(u) = u^{−αh}(1 + u + ⋯ + u^{mh}); may be +∞ when u^{−αh} overflows.
pub fn eval_g(q: &LambdaQuery, u: f64) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0) {
        return Err(Error::input("u", format!("{u} is outside (0, 1]")));
    }
    let scale = u.powf(-q.exponent());
    if scale.is_finite() {
        Ok(scale * geometric_sum(u, q.degree()))
    } else {
        ln_g(q, u).map(f64::exp)
    }
}

/// Minimizes G over (0, 1].
///
/// The stationarity polynomial's coefficients i − αh change sign once, so it
/// has a single positive root. If its value at 1 is not positive, G is still
/// decreasing at the boundary and the minimum sits at u = 1.
pub fn lambda(q: &LambdaQuery) -> LambdaResult {
    if q.stationarity(1.0) <= 0.0 {
        return LambdaResult {
            u_star: 1.0,
            value: (q.degree() + 1) as f64,
            interior: false,
        };
    }
    // The constant coefficient −αh is negative, so the floor brackets from below.
    let (mut lo, mut hi) = (U_FLOOR, 1.0);
    while hi - lo > U_REL_WIDTH * hi {
        let mid = 0.5 * (lo + hi);
        if q.stationarity(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let u_star = 0.5 * (lo + hi);
    let value = ln_g(q, u_star).expect("u_star in (0,1]").exp();
    LambdaResult {
        u_star,
        value,
        interior: u_star < 1.0,
    }
}

/// Λ_{1,1/3,p−1}.
pub fn spade_constant(p: u32) -> f64 {
    lambda(&LambdaQuery::new(1, 1.0 / 3.0, p - 1).expect("p >= 3")).value
}

fn check_n(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::input("n", "must be at least 1"));
    }
    Ok(())
}

/// (Λ_{1,1/3,p−1})^n: the bound for sets free of non-degenerate 3-APs.
pub fn spade_bound(p: u64, n: u32) -> Result<f64> {
    let p = check_odd_prime(p)?;
    check_n(n)?;
    Ok(spade_constant(p).powi(n as i32))
}

/// k²(Λ_{1,1/3,p−1})^n: the bound for sets free of k-stars.
pub fn club_bound(p: u64, n: u32, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::input("k", "must be at least 1"));
    }
    Ok((k * k) as f64 * spade_bound(p, n)?)
}

/// The infimum of max{Λ_{1,α,p−1}, Λ_{2,β,p−1}} along 3α + 2β = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WBoundResult {
    pub p: u32,
    pub alpha_star: f64,
    pub beta_star: f64,
    /// Upper estimate for the W-shape constant.
    pub value: f64,
}

impl WBoundResult {
    /// 7·(√(value·p))^n.
    pub fn bound(&self, n: u32) -> Result<f64> {
        check_n(n)?;
        Ok(7.0 * (self.value * self.p as f64).powf(n as f64 / 2.0))
    }
}

fn w_branches(p: u32, alpha: f64) -> (f64, f64) {
    let beta = (1.0 - 3.0 * alpha) / 2.0;
    let first = lambda(&LambdaQuery::new(1, alpha, p - 1).expect("alpha > 0")).value;
    let second = lambda(&LambdaQuery::new(2, beta, p - 1).expect("beta > 0")).value;
    (first, second)
}

/// Locates the crossing of the two branches by bisection on α ∈ (0, 1/3).
///
/// Λ_{1,α} is nondecreasing in α and Λ_{2,β(α)} nonincreasing, so the max of
/// the two is minimized where they cross.
pub fn w_constant(p: u64) -> Result<WBoundResult> {
    let p = check_odd_prime(p)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64 / 3.0);
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |alpha: f64, first: f64, second: f64| {
        let value = first.max(second);
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((alpha, value));
        }
    };
    while hi - lo > ALPHA_WIDTH {
        let mid = 0.5 * (lo + hi);
        let (first, second) = w_branches(p, mid);
        consider(mid, first, second);
        if first < second {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (alpha_star, value) = best.expect("bisection evaluates at least once");
    Ok(WBoundResult {
        p,
        alpha_star,
        beta_star: (1.0 - 3.0 * alpha_star) / 2.0,
        value,
    })
}

/// 7·(√(C·p))^n with C the computed W-constant.
pub fn w_bound(p: u64, n: u32) -> Result<f64> {
    check_n(n)?;
    w_constant(p)?.bound(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(m: u32, alpha: f64, h: u32) -> LambdaQuery {
        LambdaQuery::new(m, alpha, h).unwrap()
    }

    /// Minimum of G over the grid {step, 2·step, …, 1}.
    fn grid_min(query: &LambdaQuery, steps: u64) -> f64 {
        (1..=steps)
            .map(|i| ln_g(query, i as f64 / steps as f64).unwrap())
            .fold(f64::INFINITY, f64::min)
            .exp()
    }

    #[test]
    fn g_examples() {
        assert!((eval_g(&q(1, 1.0 / 3.0, 2), 1.0).unwrap() - 3.0).abs() < 1e-12);
        assert!((eval_g(&q(2, 0.17, 4), 1.0).unwrap() - 9.0).abs() < 1e-12);
        let expected = 0.5f64.powf(-2.0 / 3.0) * 1.75;
        assert!((eval_g(&q(1, 1.0 / 3.0, 2), 0.5).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 2.7780).abs() < 1e-4);
    }

    #[test]
    fn g_domain() {
        let query = q(1, 1.0 / 3.0, 2);
        assert!(eval_g(&query, 0.0).is_err());
        assert!(eval_g(&query, 1.5).is_err());
        assert!(eval_g(&query, -0.1).is_err());
        let huge = q(1, 1.0 / 3.0, 10_000);
        assert!(ln_g(&huge, 1e-300).unwrap().is_finite());
    }

    #[test]
    fn query_validation() {
        assert!(LambdaQuery::new(0, 0.3, 2).is_err());
        assert!(LambdaQuery::new(1, 0.0, 2).is_err());
        assert!(LambdaQuery::new(1, f64::NAN, 2).is_err());
        assert!(LambdaQuery::new(1, 0.3, 0).is_err());
    }

    #[test]
    fn lambda_p3_closed_form() {
        // 3·stationarity = 4u² + u − 2
        let r = lambda(&q(1, 1.0 / 3.0, 2));
        let root = (33f64.sqrt() - 1.0) / 8.0;
        assert!((r.u_star - root).abs() < 1e-12);
        assert!((r.value - 2.755105).abs() < 1e-5);
        assert!(r.interior);
        assert!((grid_min(&q(1, 1.0 / 3.0, 2), 1_000_000) - r.value).abs() < 1e-4);
    }

    #[test]
    fn lambda_endpoint() {
        let r = lambda(&q(1, 0.9, 2));
        assert_eq!(r.u_star, 1.0);
        assert_eq!(r.value, 3.0);
        assert!(!r.interior);
    }

    #[test]
    fn lambda_p5_in_ratio_window() {
        let r = lambda(&q(1, 1.0 / 3.0, 4));
        assert!(r.value > 0.8414 * 5.0 && r.value < 0.92 * 5.0, "{}", r.value);
        assert!((grid_min(&q(1, 1.0 / 3.0, 4), 100_000) - r.value).abs() < 1e-4);
    }

    #[test]
    fn lambda_monotone_in_alpha() {
        for (m, h) in [(1, 2), (1, 6), (2, 4), (3, 3)] {
            let mut prev = 0.0;
            for i in 1..60 {
                let v = lambda(&q(m, i as f64 * 0.02, h)).value;
                assert!(v >= prev - 1e-9, "m={m} h={h} i={i}");
                prev = v;
            }
        }
    }

    #[test]
    fn stationary_point_is_local_min() {
        for h in [2, 4, 6, 10, 16] {
            let query = q(1, 1.0 / 3.0, h);
            let r = lambda(&query);
            let eps = 1e-6;
            assert!(eval_g(&query, r.u_star + eps).unwrap() >= r.value - 1e-9);
            assert!(eval_g(&query, r.u_star - eps).unwrap() >= r.value - 1e-9);
        }
    }

    #[test]
    fn spade_and_club() {
        let s = spade_bound(3, 1).unwrap();
        assert!((s - 2.7551).abs() < 1e-4);
        let c = club_bound(3, 2, 2).unwrap();
        assert!((c - 30.36).abs() < 0.01, "{c}");
        assert_eq!(club_bound(7, 3, 1).unwrap(), spade_bound(7, 3).unwrap());
        assert!(spade_bound(4, 1).is_err());
        assert!(spade_bound(3, 0).is_err());
        assert!(club_bound(3, 1, 0).is_err());
    }

    #[test]
    fn w_constant_small_primes() {
        let w = w_constant(3).unwrap();
        assert!(w.value <= spade_constant(3) + 1e-6);
        assert!(w.value < 2.7552);
        assert!((3.0 * w.alpha_star + 2.0 * w.beta_star - 1.0).abs() < 1e-12);
        assert!(w.alpha_star > 0.0 && w.beta_star > 0.0);
        let (a, b) = w_branches(3, w.alpha_star);
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn w_bound_values() {
        let c = w_constant(3).unwrap().value;
        let b1 = w_bound(3, 1).unwrap();
        assert!((b1 - 7.0 * (c * 3.0).sqrt()).abs() < 1e-9);
        assert!(b1 < 7.0 * (2.7552f64 * 3.0).sqrt());
        assert!((w_bound(3, 2).unwrap() - 7.0 * c * 3.0).abs() < 1e-9);
        assert!(w_bound(3, 0).is_err());
    }
}

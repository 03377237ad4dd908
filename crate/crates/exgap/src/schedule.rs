//! Step-size and smoothness-parameter sequences.
//!
//! The generic schemes drive (gamma_k, beta_k) by
//! `beta_{k+1} = (1 - tau_k) beta_k`, `gamma_{k+1} = (1 - c_k tau_k) gamma_k`
//! with `tau_k = 1/a_k` from a quadratic recursion chosen so that the step
//! condition `beta_{k+1} gamma_{k+1} >= L_bar_g tau_k^2` holds with equality.
//! The strongly convex and Lipschitz-gradient variants and the ADMM kernels
//! use their own closed-form sequences, collected here as well.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Slack for the floating-point comparison of exact-real schedule identities.
pub const SCHEDULE_SLACK: f64 = 1e-12;

/// a_0 from c_0 in (-1, 1]: the positive root of a^2 - (1+c)a - (1-c) = 0,
/// which makes tau_0 = 1/a_0 satisfy tau_0^2 = (1 - tau_0)(1 - c_0 tau_0).
pub fn init_a(c0: f64) -> Result<f64> {
    if !(c0 > -1.0 && c0 <= 1.0) {
        return Err(Error::BadC(c0));
    }
    Ok((1.0 + c0 + (4.0 * (1.0 - c0) + (1.0 + c0) * (1.0 + c0)).sqrt()) / 2.0)
}

/// a_{k+1} from a_k: positive root of a^2 - (1+c)a + c = a_k^2, keeping
/// tau_{k+1}^2 = (1 - tau_{k+1})(1 - c tau_{k+1}) tau_k^2.
pub fn next_a(a_k: f64, c_next: f64) -> f64 {
    debug_assert!(a_k >= 1.0);
    (1.0 + c_next + (4.0 * a_k * a_k + (1.0 - c_next) * (1.0 - c_next)).sqrt()) / 2.0
}

/// Strongly convex step-size recursion: tau_{k+1} = (tau_k/2)(sqrt(tau_k^2+4) - tau_k),
/// the positive root of (1 - t) tau_k^2 = t^2.
pub fn sc_next_tau(tau_k: f64) -> f64 {
    debug_assert!(tau_k > 0.0 && tau_k < 1.0);
    0.5 * tau_k * ((tau_k * tau_k + 4.0).sqrt() - tau_k)
}

/// First step size of the strongly convex schemes.
pub fn sc_tau0() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Lipschitz-gradient update rule. Evaluates the published formulas at index
/// k: tau_k = 1/(k+1), gamma_{k+1} = (1 - tau_k/(1+tau_k)) gamma_k,
/// beta_{k+1} = (1-tau_k) beta_k. The driver calls this with a shifted index
/// (k+1 at outer iteration k) because the k = 0 evaluation gives tau = 1 and
/// hence beta_1 = 0, which would erase the dual prox term.
pub fn lg_update(k: usize, gamma_k: f64, beta_k: f64, l_bar_g: f64) -> Result<(f64, f64, f64)> {
    let tau = 1.0 / (k as f64 + 1.0);
    let gamma_next = (1.0 - tau / (1.0 + tau)) * gamma_k;
    let beta_next = (1.0 - tau) * beta_k;
    let product = gamma_next * beta_next;
    let required = l_bar_g * tau * tau;
    if k > 0 && product < required - SCHEDULE_SLACK * (1.0 + required) {
        return Err(Error::ContractionBroken { product, required });
    }
    Ok((gamma_next, beta_next, tau))
}

/// The ADMM parameter sequence for iteration k given gamma_0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmmSchedule {
    pub tau: f64,
    pub gamma: f64,
    pub beta: f64,
    pub rho: f64,
    pub eta: f64,
}

pub fn admm_params(k: usize, gamma0: f64) -> AdmmSchedule {
    assert!(gamma0 > 0.0);
    let kf = k as f64;
    AdmmSchedule {
        tau: 3.0 / (kf + 4.0),
        gamma: 2.0 * gamma0 / (kf + 2.0),
        beta: 9.0 * (kf + 3.0) / (gamma0 * (kf + 1.0) * (kf + 7.0)),
        rho: 3.0 * gamma0 / ((kf + 3.0) * (kf + 4.0)),
        eta: gamma0 / (kf + 3.0),
    }
}

/// Which rule drives (tau, gamma, beta).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleVariant {
    Generic2P1D,
    Generic1P2D,
    StronglyConvex,
    LipschitzGrad,
    Admm,
}

/// Live schedule state for one solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleState {
    pub k: usize,
    pub a: f64,
    pub tau: f64,
    pub gamma: f64,
    pub beta: f64,
    pub c: f64,
    pub l_bar_g: f64,
    pub variant: ScheduleVariant,
    /// Running sum of the c_k used, for the rate-bound sandwich.
    pub c_sum: f64,
}

impl ScheduleState {
    /// Generic state: beta_0 = L_bar_g / gamma_0 so beta_0 gamma_0 = L_bar_g.
    pub fn generic(variant: ScheduleVariant, gamma0: f64, c0: f64, l_bar_g: f64) -> Result<Self> {
        assert!(gamma0 > 0.0 && l_bar_g > 0.0);
        let a = init_a(c0)?;
        Ok(ScheduleState {
            k: 0,
            a,
            tau: 1.0 / a,
            gamma: gamma0,
            beta: l_bar_g / gamma0,
            c: c0,
            l_bar_g,
            variant,
            c_sum: 0.0,
        })
    }

    /// Strongly convex state: beta_0 = L_f^g, tau_0 = (sqrt(5)-1)/2; gamma unused.
    pub fn strongly_convex(l_f_g: f64) -> Self {
        ScheduleState {
            k: 0,
            a: 1.0 / sc_tau0(),
            tau: sc_tau0(),
            gamma: 0.0,
            beta: l_f_g,
            c: 0.0,
            l_bar_g: l_f_g,
            variant: ScheduleVariant::StronglyConvex,
            c_sum: 0.0,
        }
    }

    /// Lipschitz-gradient state: gamma_0 = beta_0 = sqrt(L_bar_g); the first
    /// update evaluates the rule at shifted index 1.
    pub fn lipschitz_grad(l_bar_g: f64) -> Self {
        let s = l_bar_g.sqrt();
        ScheduleState {
            k: 0,
            a: 2.0,
            tau: 0.5, // rule at shifted index k+1 = 1
            gamma: s,
            beta: s,
            c: 0.0,
            l_bar_g,
            variant: ScheduleVariant::LipschitzGrad,
            c_sum: 0.0,
        }
    }

    /// The gamma the primal step must use when the scheme updates gamma
    /// before its primal step (two-dual-step kernels).
    pub fn gamma_next(&self) -> f64 {
        match self.variant {
            ScheduleVariant::LipschitzGrad => {
                let tau = self.tau;
                (1.0 - tau / (1.0 + tau)) * self.gamma
            }
            _ => (1.0 - self.c * self.tau) * self.gamma,
        }
    }

    pub fn beta_next(&self) -> f64 {
        (1.0 - self.tau) * self.beta
    }

    /// Advance gamma and beta by one step and verify the contraction
    /// product condition; `c_next` is the c used for the next tau.
    pub fn advance(&mut self, c_next: f64) -> Result<()> {
        match self.variant {
            ScheduleVariant::StronglyConvex => {
                self.beta = self.beta_next();
                self.tau = sc_next_tau(self.tau);
                self.a = 1.0 / self.tau;
            }
            ScheduleVariant::LipschitzGrad => {
                let (g, b, _tau_used) =
                    lg_update(self.k + 1, self.gamma, self.beta, self.l_bar_g)?;
                self.gamma = g;
                self.beta = b;
                self.tau = 1.0 / (self.k as f64 + 3.0); // next shifted index
            }
            ScheduleVariant::Admm => unreachable!("ADMM uses closed-form admm_params"),
            _ => {
                let tau = self.tau;
                self.beta = self.beta_next();
                self.gamma = (1.0 - self.c * tau) * self.gamma;
                let product = self.beta * self.gamma;
                let required = self.l_bar_g * tau * tau;
                if product < required - SCHEDULE_SLACK * (1.0 + required) {
                    return Err(Error::ContractionBroken { product, required });
                }
                if !(c_next > -1.0 && c_next <= 1.0) {
                    return Err(Error::BadC(c_next));
                }
                self.c_sum += c_next;
                self.c = c_next;
                self.a = next_a(self.a, c_next);
                self.tau = 1.0 / self.a;
            }
        }
        self.k += 1;
        Ok(())
    }

    /// Apply a one-off multiplicative kick to gamma (heuristic, used when the
    /// primal gap dominates). Leaves the tau recursion untouched, so the
    /// product condition can only become slacker.
    pub fn kick_gamma(&mut self, multiplier: f64) {
        debug_assert!(multiplier >= 1.0);
        self.gamma *= multiplier;
    }
}

/// Kick heuristic configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickPolicy {
    /// Trigger: primal gap >= s * dual gap. `f64::INFINITY` disables kicking.
    pub s: f64,
    /// gamma multiplier applied on trigger (equivalent to c_k = -(mult-1)/tau_k).
    pub multiplier: f64,
    /// Minimum iterations between kicks.
    pub cooldown: usize,
}

impl Default for KickPolicy {
    fn default() -> Self {
        KickPolicy {
            s: 10.0,
            multiplier: 1.02,
            cooldown: 5,
        }
    }
}

impl KickPolicy {
    pub fn triggered(&self, primal_gap: f64, dual_gap: f64) -> bool {
        self.s.is_finite() && primal_gap >= self.s * dual_gap
    }
}

/// Lemma-style sandwiches on a_k and the (gamma beta) product:
/// (k + a0 + s_k)/2 <= a_k <= k + a0 and
/// L/(k+a0)^2 <= gamma_{k+1} beta_{k+1} <= 4L/(k+a0+s_k)^2.
pub fn rate_bounds(k: usize, a0: f64, s_k: f64, l_bar_g: f64) -> (f64, f64, f64, f64) {
    let kf = k as f64;
    let a_lower = (kf + a0 + s_k) / 2.0;
    let a_upper = kf + a0;
    let prod_lower = l_bar_g / (a_upper * a_upper);
    let prod_upper = 4.0 * l_bar_g / ((kf + a0 + s_k) * (kf + a0 + s_k));
    (a_lower, a_upper, prod_lower, prod_upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_a_known_values() {
        assert_eq!(init_a(1.0).unwrap(), 2.0);
        assert!((init_a(0.0).unwrap() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        assert!((init_a(-0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(init_a(-1.0), Err(Error::BadC(_))));
        assert!(matches!(init_a(1.5), Err(Error::BadC(_))));
    }

    #[test]
    fn next_a_known_values() {
        assert_eq!(next_a(2.0, 1.0), 3.0);
        let a1 = next_a((1.0 + 5f64.sqrt()) / 2.0, 0.0);
        assert!((a1 - 2.1935).abs() < 1e-4, "{a1}");
        let a = next_a(10.0, 0.0);
        assert!((a - 10.512).abs() < 1e-3);
        assert!(a >= 10.5 && a <= 11.0);
    }

    #[test]
    fn a_is_exactly_k_plus_2_for_c_one() {
        let mut a = init_a(1.0).unwrap();
        for k in 0..10_000usize {
            assert_eq!(a, (k + 2) as f64, "a_k must be exactly k+2 for c=1");
            a = next_a(a, 1.0);
        }
    }

    #[test]
    fn tau_recursion_identity_10k_steps() {
        // tau_{k+1}^2 = (1 - tau_{k+1})(1 - c tau_{k+1}) tau_k^2 to 1e-13
        for &c in &[-0.5, 0.0, 0.5, 1.0] {
            let mut a = init_a(c).unwrap();
            // the same identity at k = -1 -> 0 transition: tau0^2 = (1-tau0)(1-c tau0)
            let t0 = 1.0 / a;
            assert!((t0 * t0 - (1.0 - t0) * (1.0 - c * t0)).abs() <= 1e-15);
            for _ in 0..10_000 {
                let a_next = next_a(a, c);
                let (t, tn) = (1.0 / a, 1.0 / a_next);
                let lhs = tn * tn;
                let rhs = (1.0 - tn) * (1.0 - c * tn) * t * t;
                assert!((lhs - rhs).abs() <= 1e-13, "c={c}: {lhs} vs {rhs}");
                a = a_next;
            }
        }
    }

    #[test]
    fn rate_sandwiches_10k_steps() {
        for &c in &[0.0, 1.0] {
            let l = 1.0;
            let a0 = init_a(c).unwrap();
            let mut st = ScheduleState::generic(ScheduleVariant::Generic2P1D, 1.0, c, l).unwrap();
            for k in 0..10_000usize {
                let s_k = st.c_sum; // sum of c_1..c_k consumed so far
                let (a_lo, a_hi, prod_lo, prod_hi) = rate_bounds(k, a0, s_k, l);
                assert!(
                    st.a >= a_lo - 1e-9 && st.a <= a_hi + 1e-9,
                    "a sandwich failed at k={k}, c={c}: a={}",
                    st.a
                );
                let tau = st.tau;
                st.advance(c).unwrap();
                // the product bound refers to gamma_{k+1} beta_{k+1}
                let prod = st.gamma * st.beta;
                assert!(
                    prod >= prod_lo - 1e-12 && prod <= prod_hi + 1e-9,
                    "product sandwich failed at k={k}, c={c}: {prod} not in [{prod_lo}, {prod_hi}]"
                );
                // the step condition holds with equality along the recursion
                assert!((prod - l * tau * tau).abs() <= 1e-12 * (1.0 + prod));
            }
        }
    }

    #[test]
    fn beta_closed_forms() {
        // c=1: beta_{k+1} = beta0/(k+2); c=0: beta0/(k+2)^2 <= beta_{k+1} <= 4 beta0/(k+1)^2
        let mut st = ScheduleState::generic(ScheduleVariant::Generic2P1D, 1.0, 1.0, 1.0).unwrap();
        let beta0 = st.beta;
        for k in 0..100usize {
            st.advance(1.0).unwrap();
            let want = beta0 / (k as f64 + 2.0);
            assert!((st.beta - want).abs() <= 1e-12 * want);
        }
        let mut st = ScheduleState::generic(ScheduleVariant::Generic1P2D, 1.0, 0.0, 1.0).unwrap();
        let beta0 = st.beta;
        for k in 0..1000usize {
            st.advance(0.0).unwrap();
            let lo = beta0 / ((k as f64 + 2.0) * (k as f64 + 2.0));
            let hi = 4.0 * beta0 / ((k as f64 + 1.0) * (k as f64 + 1.0));
            assert!(st.beta >= lo - 1e-15 && st.beta <= hi + 1e-15);
        }
        // spec spot value: c=1, beta0=1, k=3 -> beta_4 = 1/5
        let mut st = ScheduleState::generic(ScheduleVariant::Generic2P1D, 1.0, 1.0, 1.0).unwrap();
        for _ in 0..4 {
            st.advance(1.0).unwrap();
        }
        assert!((st.beta - 0.2).abs() < 1e-15);
    }

    #[test]
    fn update_gamma_beta_examples() {
        // gamma=beta=1, tau=0.5, c=1, L=1 -> gamma=beta=0.5, product 0.25 = tau^2
        let mut st = ScheduleState::generic(ScheduleVariant::Generic2P1D, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(st.tau, 0.5);
        st.advance(1.0).unwrap();
        assert_eq!(st.gamma, 0.5);
        assert_eq!(st.beta, 0.5);
        // c=0 leaves gamma unchanged
        let mut st = ScheduleState::generic(ScheduleVariant::Generic1P2D, 2.0, 0.0, 1.0).unwrap();
        st.advance(0.0).unwrap();
        assert_eq!(st.gamma, 2.0);
        // kick: gamma grows by the multiplier
        let g = st.gamma;
        st.kick_gamma(1.02);
        assert!((st.gamma - 1.02 * g).abs() < 1e-15);
    }

    #[test]
    fn sc_recursion_identity() {
        let t0 = sc_tau0();
        assert!((t0 - 0.618033988749895).abs() < 1e-12);
        let t1 = sc_next_tau(t0);
        // oracle: positive root of t^2 + t0^2 t - t0^2 = 0 solved directly
        let t1_oracle = (-t0 * t0 + (t0.powi(4) + 4.0 * t0 * t0).sqrt()) / 2.0;
        assert!((t1 - t1_oracle).abs() < 1e-14, "{t1} vs {t1_oracle}");
        assert!((t1 - 0.45588678010286654).abs() < 1e-12, "{t1}");
        let mut t = t0;
        for _ in 0..1000 {
            let tn = sc_next_tau(t);
            assert!(((1.0 - tn) * t * t - tn * tn).abs() <= 1e-14);
            t = tn;
        }
        // tau -> 0: ratio tends to 1
        let tiny = 1e-8;
        assert!((sc_next_tau(tiny) / tiny - 1.0).abs() < 1e-7);
    }

    #[test]
    fn lg_update_examples() {
        // direct evaluation at k=1: tau = 1/2, gamma multiplier 2/3
        let (g, b, tau) = lg_update(1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(tau, 0.5);
        assert!((g - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(b, 0.5);
        // k=0 exposes the degenerate tau=1 (beta_1 = 0); the driver shifts past it
        let (_, b0, tau0) = lg_update(0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(tau0, 1.0);
        assert_eq!(b0, 0.0);
        // product invariant along the shifted sequence
        let mut st = ScheduleState::lipschitz_grad(1.0);
        for _ in 0..50 {
            let tau = st.tau;
            st.advance(0.0).unwrap();
            assert!(st.gamma * st.beta >= 1.0 * tau * tau - 1e-12);
        }
    }

    #[test]
    fn admm_params_examples() {
        let p = admm_params(0, 3.0);
        assert_eq!(p.tau, 0.75);
        assert_eq!(p.gamma, 3.0);
        assert!((p.beta - 9.0 / 7.0).abs() < 1e-15);
        assert_eq!(p.rho, 0.75);
        assert_eq!(p.eta, 1.0);
        let p = admm_params(2, 3.0);
        assert_eq!(p.tau, 0.5);
        assert_eq!(p.gamma, 1.5);
        assert!((p.eta - 0.6).abs() < 1e-15);
        // positivity and limits
        for k in 0..100_000 {
            let p = admm_params(k, 3.0);
            assert!(p.tau > 0.0 && p.tau < 1.0);
            assert!(p.gamma > 0.0 && p.beta > 0.0 && p.rho > 0.0 && p.eta > 0.0);
        }
        assert!(admm_params(10_000_000, 3.0).tau < 1e-6);
        assert!(admm_params(10_000_000, 3.0).beta < 1e-5);
    }

    #[test]
    fn kick_policy_trigger() {
        let p = KickPolicy::default();
        assert!(p.triggered(10.0, 0.5));
        assert!(!p.triggered(1.0, 10.0));
        let never = KickPolicy {
            s: f64::INFINITY,
            ..KickPolicy::default()
        };
        assert!(!never.triggered(1e300, 0.0));
    }

    #[test]
    fn rate_bounds_c1_exact() {
        // c=1, a0=2, k=5: a_5 = 7 exactly and within the sandwich
        let a0 = init_a(1.0).unwrap();
        let mut a = a0;
        let mut s = 0.0;
        for _ in 0..5 {
            a = next_a(a, 1.0);
            s += 1.0;
        }
        assert_eq!(a, 7.0);
        let (lo, hi, _, _) = rate_bounds(5, a0, s, 1.0);
        assert!(a >= lo && a <= hi);
    }
}

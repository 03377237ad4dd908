//! Iteration kernels and the outer solve driver.
//!
//! Kernels:
//! - `TwoP1D` / `OneP2D`: the generic primal-dual schemes over a Bregman
//!   smoother (two primal steps + one dual step, resp. one primal + two dual).
//! - `TwoP1DSc` / `OneP2DSc`: strongly convex specializations (no primal
//!   smoothing; exact smoothed-dual argmins from strong convexity).
//! - `OneP2DLg`: the Lipschitz-gradient variant with the simultaneous
//!   gamma/beta decrease.
//! - `I1P2D` / `I2P1D`: inexact variants over the augmented-Lagrangian
//!   smoother, inner solves by FISTA to tolerance delta_k.
//! - `AdmmNew` / `PadmmNew`: two-block alternating variants with the
//!   published parameter schedule; `PadmmNew` linearizes the block quadratics
//!   into prox steps.
//!
//! Basic kernels keep their per-iteration operation counts (see the cost
//! table in the docs): the driver caches A x_bar, A' y_bar and the residual,
//! so no operator application is repeated. Certification mode records the
//! smoothed gap G_k and the decay term psi_k each step and enforces the firm
//! contraction G_{k+1} <= (1 - tau_k) G_k - psi_k.

use crate::error::{Error, Result};
use crate::linop::{self, LinearMap};
use crate::problems::{ConstrainedProblem, ConstraintSense};
use crate::prox;
use crate::schedule::{self, KickPolicy, ScheduleState, ScheduleVariant};
use crate::smoothing::{self, SChoice, SmootherConfig, SmootherKind};
use crate::subsolver::{self, QuadTerm, SingleBlock};
use crate::trace::{IterationRecord, OpCounters, SolveStatus, Trace};
use crate::vecmath;
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    TwoP1D,
    OneP2D,
    TwoP1DSc,
    OneP2DSc,
    OneP2DLg,
    I1P2D,
    I2P1D,
    AdmmNew,
    PadmmNew,
}

impl Scheme {
    pub fn label(&self) -> &'static str {
        match self {
            Scheme::TwoP1D => "2p1d",
            Scheme::OneP2D => "1p2d",
            Scheme::TwoP1DSc => "2p1d-sc",
            Scheme::OneP2DSc => "1p2d-sc",
            Scheme::OneP2DLg => "1p2d-lg",
            Scheme::I1P2D => "i1p2d",
            Scheme::I2P1D => "i2p1d",
            Scheme::AdmmNew => "admm-new",
            Scheme::PadmmNew => "padmm-new",
        }
    }
}

/// How c_k evolves across iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CPolicy {
    Const(f64),
    /// Kick heuristic: multiply gamma when the primal gap dominates the dual
    /// gap proxy. Disables bound certificates.
    Kick(KickPolicy),
    /// c_k = d_b(S x*, S x_c) / D_X^S (needs an analytic diameter).
    DecreaseByDiameter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gamma0 {
    /// Published per-variant value: 1 for AL runs, sqrt(L) for 2P1D,
    /// 2 sqrt(2L)/(K+1) for 1P2D (needs `k_total`), 3 for ADMM.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CenterPolicy {
    Fixed,
    /// Proximal-point option: recenter at the previous smoothed-dual argmin.
    /// Disables certificates.
    PreviousArgmin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeltaPolicy {
    /// Keep q_k delta_k non-increasing, q_k = (1-tau)tau ||y - y*|| + (D+1)/2.
    QRule { delta0: f64 },
    /// delta_k = delta0 / (k+1)^power.
    PolyDecay { delta0: f64, power: f64 },
    Const { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartVariant {
    PrimalFirst,
    DualFirst,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub smoother: SmootherConfig,
    pub c_policy: CPolicy,
    pub gamma0: Gamma0,
    /// Total iteration count fixed a priori (required by OneP2D's Auto gamma).
    pub k_total: Option<usize>,
    pub eps_f: f64,
    pub eps_x: f64,
    pub max_iter: usize,
    pub delta_policy: DeltaPolicy,
    pub start: StartVariant,
    pub center_policy: CenterPolicy,
    /// Record contraction certificates (adds one argmin per step for OneP2D).
    pub certify: bool,
    /// Record per-iteration operation counters.
    pub count_ops: bool,
    /// Cap on inner FISTA iterations (None: rate-derived default).
    pub inner_max: Option<usize>,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(scheme: Scheme, smoother: SmootherConfig, max_iter: usize) -> Self {
        SolverConfig {
            scheme,
            smoother,
            c_policy: CPolicy::Const(match scheme {
                Scheme::TwoP1D => 1.0,
                _ => 0.0,
            }),
            gamma0: Gamma0::Auto,
            k_total: None,
            eps_f: 1e-6,
            eps_x: 1e-6,
            max_iter,
            delta_policy: DeltaPolicy::Const { delta: 1e-8 },
            start: StartVariant::PrimalFirst,
            center_policy: CenterPolicy::Fixed,
            certify: false,
            count_ops: false,
            inner_max: None,
            seed: 0,
        }
    }

    /// Scheme/smoother compatibility (the variant matrix).
    pub fn validate(&self, problem: &ConstrainedProblem) -> Result<()> {
        use Scheme::*;
        let kind = self.smoother.kind;
        match self.scheme {
            TwoP1D => {} // Bregman (rate-certified) or AL (inner solves)
            OneP2D | OneP2DLg => {
                if kind != SmootherKind::Bregman {
                    return Err(Error::SchemeSmoother(
                        "two-dual-step schemes need the Bregman smoother; use i1p2d for AL".into(),
                    ));
                }
            }
            I1P2D | I2P1D => {
                if kind != SmootherKind::AugLag {
                    return Err(Error::SchemeSmoother(
                        "inexact schemes are defined over the AL smoother".into(),
                    ));
                }
            }
            TwoP1DSc | OneP2DSc => {
                if problem.sigma_f() <= 0.0 {
                    return Err(Error::NeedsStrongConvexity);
                }
            }
            AdmmNew | PadmmNew => {
                if problem.blocks.len() != 2 {
                    return Err(Error::NeedsTwoBlocks(problem.blocks.len()));
                }
            }
        }
        if self.scheme == OneP2D && matches!(self.gamma0, Gamma0::Auto) && self.k_total.is_none() {
            return Err(Error::Config(
                "1p2d with Auto gamma0 fixes the horizon a priori: set k_total".into(),
            ));
        }
        if problem.sense == ConstraintSense::Inequality
            && matches!(self.scheme, AdmmNew | PadmmNew | I1P2D | I2P1D)
        {
            return Err(Error::Config(
                "inequality sense is wired for the 2p1d/1p2d families only".into(),
            ));
        }
        Ok(())
    }

    fn resolve_gamma0(&self, l_bar_g: f64) -> Result<f64> {
        match self.gamma0 {
            Gamma0::Fixed(g) => Ok(g),
            Gamma0::Auto => Ok(match self.scheme {
                Scheme::TwoP1D => match self.smoother.kind {
                    SmootherKind::AugLag => 1.0,
                    SmootherKind::Bregman => l_bar_g.sqrt(),
                },
                Scheme::OneP2D => {
                    let k = self
                        .k_total
                        .ok_or_else(|| Error::Config("1p2d Auto gamma0 needs k_total".into()))?;
                    2.0 * (2.0 * l_bar_g).sqrt() / (k as f64 + 1.0)
                }
                Scheme::I1P2D | Scheme::I2P1D => 1.0,
                Scheme::AdmmNew | Scheme::PadmmNew => 3.0,
                Scheme::OneP2DLg => l_bar_g.sqrt(),
                Scheme::TwoP1DSc | Scheme::OneP2DSc => 0.0, // unused
            }),
        }
    }

    fn delta0(&self) -> f64 {
        match self.delta_policy {
            DeltaPolicy::QRule { delta0 } => delta0,
            DeltaPolicy::PolyDecay { delta0, .. } => delta0,
            DeltaPolicy::Const { delta } => delta,
        }
    }
}

/// Componentwise [.]_+ applied to dual vectors under inequality constraints.
pub fn dual_update_inequality(v: &[f64]) -> Vec<f64> {
    vecmath::clamp_nonneg(v)
}

/// One primal-dual iterate with cached residual and objective value.
#[derive(Debug, Clone)]
pub struct PrimalDualIterate {
    pub x_bar: Vec<f64>,
    pub y_bar: Vec<f64>,
    pub residual: Vec<f64>,
    pub f_val: f64,
}

impl PrimalDualIterate {
    fn check(&self, problem: &ConstrainedProblem, op: &LinearMap) -> Result<()> {
        let viol = problem.set_violation(&self.x_bar);
        if viol > prox::FEAS_TOL {
            return Err(Error::InfeasibleIterate(viol));
        }
        let ax = linop::apply(op, &self.x_bar)?;
        let fresh = vecmath::sub(&ax, &problem.b);
        let drift = vecmath::dist2(&fresh, &self.residual);
        if drift > 1e-10 * (1.0 + vecmath::norm2(&fresh)) {
            return Err(Error::Config(format!("residual cache drift {drift}")));
        }
        Ok(())
    }
}

struct Counter {
    enabled: bool,
    current: OpCounters,
    all: Vec<OpCounters>,
}

impl Counter {
    fn new(enabled: bool) -> Self {
        Counter {
            enabled,
            current: OpCounters::default(),
            all: Vec::new(),
        }
    }
    fn prox(&mut self) {
        self.current.prox += 1;
    }
    fn a(&mut self) {
        self.current.a_apply += 1;
    }
    fn at(&mut self) {
        self.current.at_apply += 1;
    }
    fn flush(&mut self) {
        if self.enabled {
            self.all.push(self.current);
        }
        self.current = OpCounters::default();
    }
}

/// Start point (primal-first or dual-first) for the generic and inexact
/// schemes. Requires beta0 gamma0 >= L_bar_g, which makes the initial
/// smoothed gap nonpositive.
pub fn start_point(
    problem: &ConstrainedProblem,
    cfg: &SolverConfig,
    op: &LinearMap,
    a_norm_sq: f64,
    gamma0: f64,
    beta0: f64,
) -> Result<PrimalDualIterate> {
    let l = cfg.smoother.l_bar_g;
    if beta0 * gamma0 < l * (1.0 - 1e-12) {
        return Err(Error::InitProduct {
            product: beta0 * gamma0,
            l_bar_g: l,
        });
    }
    let m = problem.m();
    let ineq = problem.sense == ConstraintSense::Inequality;
    let clamp = |v: Vec<f64>| if ineq { dual_update_inequality(&v) } else { v };
    let (x_bar, y_bar) = match cfg.start {
        StartVariant::PrimalFirst => {
            let x0 = match cfg.smoother.kind {
                SmootherKind::Bregman => {
                    smoothing::bregman_argmin(problem, &cfg.smoother, op, &vec![0.0; m], gamma0)?
                }
                SmootherKind::AugLag => {
                    subsolver::aug_lagrangian_argmin(
                        problem,
                        op,
                        a_norm_sq,
                        &vec![0.0; m],
                        gamma0,
                        cfg.delta0().min(1e-8),
                        &cfg.smoother.x_center,
                        cfg.inner_max,
                    )?
                    .x
                }
            };
            let r = problem.residual(&x0)?;
            let y0 = clamp(smoothing::dual_center(&r, beta0)?);
            (x0, y0)
        }
        StartVariant::DualFirst => {
            let rc = problem.residual(&cfg.smoother.x_center)?;
            let y0 = clamp(smoothing::dual_center(&rc, beta0)?);
            let x0 = prox_sf(
                problem,
                cfg,
                op,
                a_norm_sq,
                &cfg.smoother.x_center,
                &y0,
                beta0,
            )?;
            (x0, y0)
        }
    };
    let residual = problem.residual(&x_bar)?;
    let f_val = problem.func_eval(&x_bar);
    Ok(PrimalDualIterate {
        x_bar,
        y_bar,
        residual,
        f_val,
    })
}

/// prox_{Sf}(x_hat, y_hat; beta): S = I reduces to one prox at
/// x_hat - (beta/L) A'y_hat; S = A is the shifted inner solve.
fn prox_sf(
    problem: &ConstrainedProblem,
    cfg: &SolverConfig,
    op: &LinearMap,
    a_norm_sq: f64,
    x_hat: &[f64],
    y_hat: &[f64],
    beta: f64,
) -> Result<Vec<f64>> {
    let l = cfg.smoother.l_bar_g;
    match cfg.smoother.s_choice {
        SChoice::Identity => {
            let w = linop::adjoint_apply(op, y_hat)?;
            let lam = beta / l;
            problem.prox_eval(lam, &vecmath::add_scaled(x_hat, -lam, &w))
        }
        SChoice::OperatorA => Ok(subsolver::inexact_prox_af(
            problem,
            op,
            a_norm_sq,
            x_hat,
            y_hat,
            beta,
            l,
            cfg.delta0().min(1e-8),
            x_hat,
            cfg.inner_max,
        )?
        .x),
    }
}

/// Outcome of one kernel step.
struct StepOut {
    psi: Option<f64>,
    /// G_k at the entry iterate (certification mode).
    g_entry: Option<f64>,
    inner_iters: usize,
    /// A x* image of this step's smoothed-dual argmin (kick proxy material).
    u_image: Option<Vec<f64>>,
    /// This step's smoothed-dual argmin (recentring / c-decrease material).
    x_star: Option<Vec<f64>>,
}

/// Driver state threading caches through the kernels.
struct RunState {
    it: PrimalDualIterate,
    sched: ScheduleState,
    /// A' y_bar cache (TwoP1D only).
    aty_bar: Option<Vec<f64>>,
    warm: Vec<f64>,
    warm2: Vec<f64>,
    /// A x* of the previous step (dual-gap proxy for the kick trigger).
    prev_u: Option<Vec<f64>>,
    delta_prev: f64,
    q_last: f64,
    /// D^A_X constant for the q-rule (infinite when unavailable).
    d_ax: f64,
    /// Analytic D_X^S for the c-decrease policy (NaN when unavailable).
    d_xs: f64,
    x_center: Vec<f64>,
    kick_cooldown: usize,
    tuned: bool,
}

impl RunState {
    fn new(it: PrimalDualIterate, sched: ScheduleState, cfg: &SolverConfig) -> Self {
        let warm = it.x_bar.clone();
        RunState {
            it,
            sched,
            aty_bar: None,
            warm: warm.clone(),
            warm2: warm,
            prev_u: None,
            delta_prev: cfg.delta0(),
            q_last: f64::NAN,
            d_ax: f64::INFINITY,
            d_xs: f64::NAN,
            x_center: cfg.smoother.x_center.clone(),
            kick_cooldown: 0,
            tuned: false,
        }
    }

    fn smoother(&self, cfg: &SolverConfig) -> SmootherConfig {
        let mut s = cfg.smoother.clone();
        s.x_center = self.x_center.clone();
        s
    }
}

pub struct SolveOutput {
    pub trace: Trace,
    pub iterate: PrimalDualIterate,
}

/// Run the configured scheme on the problem.
pub fn solve(problem: &ConstrainedProblem, cfg: &SolverConfig) -> Result<SolveOutput> {
    cfg.validate(problem)?;
    let op = problem.operator();
    // ||A||^2 estimate for inner Lipschitz constants; for the Bregman
    // smoother the configured L_bar_g already upper-bounds it
    let a_norm_sq = match cfg.smoother.kind {
        SmootherKind::Bregman => cfg.smoother.l_bar_g,
        SmootherKind::AugLag => linop::spectral_norm_sq(&op, 1e-10, 50_000)?,
    };
    cfg.smoother.validate(
        problem,
        match cfg.smoother.kind {
            SmootherKind::Bregman => a_norm_sq,
            SmootherKind::AugLag => 0.0,
        },
    )?;
    if matches!(cfg.scheme, Scheme::AdmmNew | Scheme::PadmmNew) {
        return solve_admm(problem, cfg);
    }

    let l_bar_g = cfg.smoother.l_bar_g;
    let mut events: Vec<String> = Vec::new();

    let mut state = match cfg.scheme {
        Scheme::TwoP1DSc | Scheme::OneP2DSc => {
            let sigma = problem.sigma_f();
            let l_f_g = a_norm_sq / sigma;
            let sched = ScheduleState::strongly_convex(l_f_g);
            let x0 = problem.argmin_linear(&vec![0.0; problem.n()])?;
            let r0 = problem.residual(&x0)?;
            let mut y0 = vecmath::scale(1.0 / l_f_g, &r0);
            if problem.sense == ConstraintSense::Inequality {
                y0 = dual_update_inequality(&y0);
            }
            let f0 = problem.func_eval(&x0);
            RunState::new(
                PrimalDualIterate {
                    x_bar: x0,
                    y_bar: y0,
                    residual: r0,
                    f_val: f0,
                },
                sched,
                cfg,
            )
        }
        Scheme::OneP2DLg => {
            let sched = ScheduleState::lipschitz_grad(l_bar_g);
            let it = start_point(problem, cfg, &op, a_norm_sq, sched.gamma, sched.beta)?;
            RunState::new(it, sched, cfg)
        }
        _ => {
            let gamma0 = cfg.resolve_gamma0(l_bar_g)?;
            let c0 = match cfg.c_policy {
                CPolicy::Const(c) => c,
                _ => 0.0,
            };
            let variant = match cfg.scheme {
                Scheme::TwoP1D | Scheme::I2P1D => ScheduleVariant::Generic2P1D,
                _ => ScheduleVariant::Generic1P2D,
            };
            let sched = ScheduleState::generic(variant, gamma0, c0, l_bar_g)?;
            let beta0 = sched.beta;
            let it = start_point(problem, cfg, &op, a_norm_sq, gamma0, beta0)?;
            let mut st = RunState::new(it, sched, cfg);
            if cfg.scheme == Scheme::TwoP1D && cfg.smoother.s_choice == SChoice::Identity {
                st.aty_bar = Some(linop::adjoint_apply(&op, &st.it.y_bar)?);
            }
            st
        }
    };

    // constants for the tuning policies
    if matches!(cfg.delta_policy, DeltaPolicy::QRule { .. }) {
        let al_cfg = SmootherConfig::aug_lag(cfg.smoother.x_center.clone());
        if let Ok(d) = smoothing::estimate_diameters(problem, &al_cfg) {
            state.d_ax = d.d_x_s;
        }
    }
    if matches!(cfg.c_policy, CPolicy::DecreaseByDiameter) {
        let d = smoothing::estimate_diameters(problem, &cfg.smoother)?;
        if d.provenance_x != smoothing::DiameterProvenance::Analytic {
            return Err(Error::Config(
                "c-decrease policy needs an analytic prox-diameter".into(),
            ));
        }
        state.d_xs = d.d_x_s;
    }

    let b_norm_floor = vecmath::norm2(&problem.b).max(1.0);
    let f_star = problem.reference.as_ref().map(|r| r.f_star);

    let mut records: Vec<IterationRecord> = Vec::new();
    let mut counters = Counter::new(cfg.count_ops);
    let mut g_gaps: Vec<f64> = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut budget_hit = false;

    let push_record = |records: &mut Vec<IterationRecord>,
                       st: &RunState,
                       k: usize,
                       psi: Option<f64>,
                       inner: usize,
                       wall: u64| {
        let feas = vecmath::norm2(&st.it.residual);
        records.push(IterationRecord {
            k,
            f_val: st.it.f_val,
            obj_residual: f_star.map(|f| st.it.f_val - f),
            feas_abs: feas,
            feas_rel: feas / b_norm_floor,
            gamma: st.sched.gamma,
            beta: st.sched.beta,
            tau: st.sched.tau,
            psi,
            inner_iters: inner,
            wall_ns: wall,
            feas_bound: None,
            obj_upper: None,
        });
    };
    push_record(&mut records, &state, 0, None, 0, 0);
    counters.flush();

    // contraction bookkeeping: (G_k, tau_k, psi_k) of the previous step
    let mut prev_contraction: Option<(f64, f64, f64)> = None;

    for k in 0..cfg.max_iter {
        let t0 = Instant::now();
        let x_prev = state.it.x_bar.clone();
        let step = match cfg.scheme {
            Scheme::TwoP1D => step_2p1d(problem, cfg, &op, a_norm_sq, &mut state, &mut counters),
            Scheme::OneP2D | Scheme::OneP2DLg => {
                step_1p2d(problem, cfg, &op, &mut state, &mut counters)
            }
            Scheme::TwoP1DSc => step_sc_2p1d(problem, &op, a_norm_sq, &mut state, &mut counters),
            Scheme::OneP2DSc => step_sc_1p2d(problem, &op, &mut state, &mut counters),
            Scheme::I1P2D => {
                step_i1p2d(problem, cfg, &op, a_norm_sq, &mut state, &mut counters, &mut events, k)
            }
            Scheme::I2P1D => {
                step_i2p1d(problem, cfg, &op, a_norm_sq, &mut state, &mut counters, &mut events, k)
            }
            Scheme::AdmmNew | Scheme::PadmmNew => unreachable!(),
        };
        let out = match step {
            Ok(o) => o,
            Err(Error::InnerBudget { iters, gap_bound }) => {
                events.push(format!(
                    "inner-budget at outer {k}: {iters} inner iterations, bound {gap_bound}"
                ));
                budget_hit = true;
                break;
            }
            Err(e) => return Err(e),
        };

        // firm-contraction certificate
        if cfg.certify {
            if let Some(g_k) = out.g_entry {
                g_gaps.push(g_k);
                if let Some((g_prev, tau_prev, psi_prev)) = prev_contraction {
                    let bound = (1.0 - tau_prev) * g_prev - psi_prev;
                    let slack = 1e-7 * (1.0 + g_prev.abs());
                    if g_k > bound + slack {
                        return Err(Error::CertificateFailed {
                            k,
                            violation: g_k - bound,
                        });
                    }
                }
                prev_contraction = Some((g_k, state.sched.tau, out.psi.unwrap_or(0.0)));
            }
        }

        // schedule advance (the kernels consumed gamma_k, beta_k, tau_k)
        let c_next = next_c(cfg, &mut state, &out, &mut events, k);
        if state.sched.variant != ScheduleVariant::StronglyConvex
            || cfg.scheme == Scheme::OneP2DLg
        {
            state.sched.advance(c_next)?;
        } else {
            state.sched.advance(0.0)?;
        }
        if let Some(u) = out.u_image {
            state.prev_u = Some(u);
        }
        if cfg.center_policy == CenterPolicy::PreviousArgmin {
            if let Some(xs) = &out.x_star {
                state.x_center = xs.clone();
                state.tuned = true;
            }
        }

        state.it.check(problem, &op)?;
        let wall = t0.elapsed().as_nanos() as u64;
        push_record(&mut records, &state, k + 1, out.psi, out.inner_iters, wall);
        counters.flush();

        // termination: relative feasibility and relative step
        let feas_rel = vecmath::norm2(&state.it.residual) / b_norm_floor;
        let dx = vecmath::dist2(&state.it.x_bar, &x_prev) / vecmath::norm2(&x_prev).max(1.0);
        if feas_rel <= cfg.eps_f && dx <= cfg.eps_x {
            status = SolveStatus::Converged;
            break;
        }
    }

    // close the contraction telescope with one extra gap evaluation
    if cfg.certify && cfg.smoother.kind == SmootherKind::Bregman {
        if let Some((g_prev, tau_prev, psi_prev)) = prev_contraction {
            let smoother = state.smoother(cfg);
            let g_final = smoothing::smoothed_gap(
                problem,
                &smoother,
                &op,
                &state.it.x_bar,
                &state.it.y_bar,
                state.sched.gamma,
                state.sched.beta,
            )?;
            g_gaps.push(g_final);
            let bound = (1.0 - tau_prev) * g_prev - psi_prev;
            let slack = 1e-7 * (1.0 + g_prev.abs());
            if g_final > bound + slack {
                return Err(Error::CertificateFailed {
                    k: records.len() - 1,
                    violation: g_final - bound,
                });
            }
        }
    }

    if budget_hit && status != SolveStatus::Converged {
        status = SolveStatus::InnerBudget;
    }

    Ok(SolveOutput {
        trace: Trace {
            records,
            counters: if cfg.count_ops {
                Some(counters.all)
            } else {
                None
            },
            g_gaps: if cfg.certify { Some(g_gaps) } else { None },
            status,
            x_final: state.it.x_bar.clone(),
            y_final: state.it.y_bar.clone(),
            scheme: format!(
                "{}-{}",
                cfg.scheme.label(),
                match cfg.smoother.kind {
                    SmootherKind::Bregman => "bregman",
                    SmootherKind::AugLag => "auglag",
                }
            ),
            tuned: state.tuned,
            events,
            seed: cfg.seed,
        },
        iterate: state.it,
    })
}

/// c for the next schedule step, applying the tuning policies.
fn next_c(
    cfg: &SolverConfig,
    state: &mut RunState,
    out: &StepOut,
    events: &mut Vec<String>,
    k: usize,
) -> f64 {
    match &cfg.c_policy {
        CPolicy::Const(c) => *c,
        CPolicy::Kick(policy) => {
            if state.kick_cooldown > 0 {
                state.kick_cooldown -= 1;
                return 0.0;
            }
            // primal gap vs dual-gap proxy gamma ||A(x*_k - x*_{k-1})||
            let primal = vecmath::norm2(&state.it.residual);
            let dual_proxy = match (&state.prev_u, &out.u_image) {
                (Some(prev), Some(now)) => state.sched.gamma * vecmath::dist2(prev, now),
                _ => f64::INFINITY,
            };
            if policy.triggered(primal, dual_proxy) {
                state.sched.kick_gamma(policy.multiplier);
                state.kick_cooldown = policy.cooldown;
                state.tuned = true;
                events.push(format!("kick at {k}: gamma *= {}", policy.multiplier));
            }
            0.0
        }
        CPolicy::DecreaseByDiameter => {
            state.tuned = true;
            match &out.x_star {
                Some(xs) => {
                    let d = 0.5 * vecmath::dist2(xs, &state.x_center).powi(2);
                    (d / state.d_xs).clamp(0.0, 1.0)
                }
                None => 0.0,
            }
        }
    }
}

// ---------------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------------

/// Two primal steps, one dual step.
fn step_2p1d(
    problem: &ConstrainedProblem,
    cfg: &SolverConfig,
    op: &LinearMap,
    a_norm_sq: f64,
    state: &mut RunState,
    cnt: &mut Counter,
) -> Result<StepOut> {
    let (tau, gamma_k, beta_k, l) = (
        state.sched.tau,
        state.sched.gamma,
        state.sched.beta,
        state.sched.l_bar_g,
    );
    let beta_next = state.sched.beta_next();
    let smoother = state.smoother(cfg);
    let ineq = problem.sense == ConstraintSense::Inequality;
    let clamp = |v: Vec<f64>| if ineq { dual_update_inequality(&v) } else { v };
    let mut inner = 0usize;

    // x*_{gamma_k}(y_bar)
    let x_star = match cfg.smoother.kind {
        SmootherKind::Bregman => {
            let aty = match &state.aty_bar {
                Some(c) => c.clone(),
                None => {
                    cnt.at();
                    linop::adjoint_apply(op, &state.it.y_bar)?
                }
            };
            cnt.prox();
            smoothing::bregman_argmin_with_aty(problem, &smoother, &aty, gamma_k)?
        }
        SmootherKind::AugLag => {
            let r = subsolver::aug_lagrangian_argmin(
                problem,
                op,
                a_norm_sq,
                &state.it.y_bar,
                gamma_k,
                cfg.delta0().min(1e-8),
                &state.warm,
                cfg.inner_max,
            )?;
            inner += r.iters;
            state.warm = r.x.clone();
            r.x
        }
    };
    cnt.a();
    let u = linop::apply(op, &x_star)?;
    let u_res = vecmath::sub(&u, &problem.b);
    let psi = tau * tau / (2.0 * beta_next) * vecmath::norm2_sq(&u_res);

    // G_k at entry comes almost free: g_{gamma_k}(y_bar) at the computed argmin
    let g_entry = if cfg.certify && cfg.smoother.kind == SmootherKind::Bregman {
        let g_val = smoothing::smoothed_dual_value_at(
            problem,
            &smoother,
            op,
            &state.it.y_bar,
            gamma_k,
            &x_star,
        )?;
        Some(state.it.f_val - g_val + vecmath::norm2_sq(&state.it.residual) / (2.0 * beta_k))
    } else {
        None
    };

    let x_hat = vecmath::convex_comb(tau, &state.it.x_bar, &x_star);
    let r_hat = vecmath::convex_comb(tau, &state.it.residual, &u_res);
    let y_hat = clamp(vecmath::scale(1.0 / beta_next, &r_hat));

    // x_bar_next = prox_{Sf}(x_hat, y_hat; beta_next)
    let (x_next, w) = match cfg.smoother.s_choice {
        SChoice::Identity => {
            cnt.at();
            let w = linop::adjoint_apply(op, &y_hat)?;
            let lam = beta_next / l;
            cnt.prox();
            let x = problem.prox_eval(lam, &vecmath::add_scaled(&x_hat, -lam, &w))?;
            (x, Some(w))
        }
        SChoice::OperatorA => {
            let r = subsolver::inexact_prox_af(
                problem,
                op,
                a_norm_sq,
                &x_hat,
                &y_hat,
                beta_next,
                l,
                cfg.delta0().min(1e-8),
                &state.warm2,
                cfg.inner_max,
            )?;
            inner += r.iters;
            state.warm2 = r.x.clone();
            (r.x, None)
        }
    };

    cnt.a();
    let ax_next = linop::apply(op, &x_next)?;
    let r_next = vecmath::sub(&ax_next, &problem.b);
    let y_next = clamp(vecmath::convex_comb(tau, &state.it.y_bar, &y_hat));
    // update the A'y cache along the same convex combination (only valid
    // without the inequality clamp, which breaks linearity)
    state.aty_bar = match (&state.aty_bar, &w, ineq) {
        (Some(aty), Some(w), false) => Some(vecmath::convex_comb(tau, aty, w)),
        _ => None,
    };

    let f_val = problem.func_eval(&x_next);
    state.it = PrimalDualIterate {
        x_bar: x_next,
        y_bar: y_next,
        residual: r_next,
        f_val,
    };
    Ok(StepOut {
        psi: Some(psi),
        g_entry,
        inner_iters: inner,
        u_image: Some(u),
        x_star: Some(x_star),
    })
}

/// One primal step, two dual steps.
fn step_1p2d(
    problem: &ConstrainedProblem,
    cfg: &SolverConfig,
    op: &LinearMap,
    state: &mut RunState,
    cnt: &mut Counter,
) -> Result<StepOut> {
    let (tau, gamma_k, beta_k, l) = (
        state.sched.tau,
        state.sched.gamma,
        state.sched.beta,
        state.sched.l_bar_g,
    );
    let gamma_next = state.sched.gamma_next();
    let smoother = state.smoother(cfg);
    let ineq = problem.sense == ConstraintSense::Inequality;
    let clamp = |v: Vec<f64>| if ineq { dual_update_inequality(&v) } else { v };

    let y_star = clamp(vecmath::scale(1.0 / beta_k, &state.it.residual));
    let y_hat = clamp(vecmath::convex_comb(tau, &state.it.y_bar, &y_star));

    cnt.at();
    let w = linop::adjoint_apply(op, &y_hat)?;
    cnt.prox();
    let x_star = smoothing::bregman_argmin_with_aty(problem, &smoother, &w, gamma_next)?;
    cnt.a();
    let u = linop::apply(op, &x_star)?;
    let u_res = vecmath::sub(&u, &problem.b);

    // certification extras: argmin at y_bar for G_k (and psi when c != 0)
    let (g_entry, psi) = if cfg.certify {
        cnt.at();
        let aty_bar = linop::adjoint_apply(op, &state.it.y_bar)?;
        cnt.prox();
        let x_star_bar_next =
            smoothing::bregman_argmin_with_aty(problem, &smoother, &aty_bar, gamma_next)?;
        let x_star_bar_k = if (gamma_next - gamma_k).abs() <= 1e-15 * gamma_k {
            x_star_bar_next.clone()
        } else {
            cnt.prox();
            smoothing::bregman_argmin_with_aty(problem, &smoother, &aty_bar, gamma_k)?
        };
        cnt.a();
        let g_val = smoothing::smoothed_dual_value_at(
            problem,
            &smoother,
            op,
            &state.it.y_bar,
            gamma_k,
            &x_star_bar_k,
        )?;
        let g_k = state.it.f_val - g_val + vecmath::norm2_sq(&state.it.residual) / (2.0 * beta_k);
        let d_hat = 0.5 * vecmath::dist2(&x_star, &state.x_center).powi(2);
        let d_bar = 0.5 * vecmath::dist2(&x_star_bar_next, &state.x_center).powi(2);
        let psi = tau * (1.0 - tau) * gamma_k * (d_hat - state.sched.c * d_bar);
        (Some(g_k), Some(psi))
    } else {
        (None, None)
    };

    let x_next = vecmath::convex_comb(tau, &state.it.x_bar, &x_star);
    let r_next = vecmath::convex_comb(tau, &state.it.residual, &u_res);
    let y_next = clamp(vecmath::add_scaled(&y_hat, gamma_next / l, &u_res));

    let f_val = problem.func_eval(&x_next);
    state.it = PrimalDualIterate {
        x_bar: x_next,
        y_bar: y_next,
        residual: r_next,
        f_val,
    };
    Ok(StepOut {
        psi,
        g_entry,
        inner_iters: 0,
        u_image: Some(u),
        x_star: Some(x_star),
    })
}

/// Strongly convex two-primal-step kernel (no primal smoothing; beta_k is
/// used both in the hat-dual and in the prox).
fn step_sc_2p1d(
    problem: &ConstrainedProblem,
    op: &LinearMap,
    a_norm_sq: f64,
    state: &mut RunState,
    cnt: &mut Counter,
) -> Result<StepOut> {
    let (tau, beta_k) = (state.sched.tau, state.sched.beta);
    let ineq = problem.sense == ConstraintSense::Inequality;
    let clamp = |v: Vec<f64>| if ineq { dual_update_inequality(&v) } else { v };

    cnt.at();
    let aty = linop::adjoint_apply(op, &state.it.y_bar)?;
    cnt.prox();
    let x_star = problem.argmin_linear(&aty)?;
    cnt.a();
    let u = linop::apply(op, &x_star)?;
    let u_res = vecmath::sub(&u, &problem.b);

    let x_hat = vecmath::convex_comb(tau, &state.it.x_bar, &x_star);
    let r_hat = vecmath::convex_comb(tau, &state.it.residual, &u_res);
    let y_hat = clamp(vecmath::scale(1.0 / beta_k, &r_hat));
    cnt.at();
    let w = linop::adjoint_apply(op, &y_hat)?;
    let lam = beta_k / a_norm_sq;
    cnt.prox();
    let x_next = problem.prox_eval(lam, &vecmath::add_scaled(&x_hat, -lam, &w))?;
    cnt.a();
    let ax = linop::apply(op, &x_next)?;
    let r_next = vecmath::sub(&ax, &problem.b);
    let y_next = clamp(vecmath::add_scaled(
        &vecmath::scale(1.0 - tau, &state.it.y_bar),
        tau / beta_k,
        &r_hat,
    ));

    let f_val = problem.func_eval(&x_next);
    state.it = PrimalDualIterate {
        x_bar: x_next,
        y_bar: y_next,
        residual: r_next,
        f_val,
    };
    Ok(StepOut {
        psi: Some(tau * tau / (2.0 * (1.0 - tau) * beta_k) * vecmath::norm2_sq(&u_res)),
        g_entry: None,
        inner_iters: 0,
        u_image: Some(u),
        x_star: Some(x_star),
    })
}

/// Strongly convex one-primal-step kernel.
fn step_sc_1p2d(
    problem: &ConstrainedProblem,
    op: &LinearMap,
    state: &mut RunState,
    cnt: &mut Counter,
) -> Result<StepOut> {
    let (tau, beta_k) = (state.sched.tau, state.sched.beta);
    let l_f_g = state.sched.l_bar_g; // = ||A||^2 / sigma_f
    let ineq = problem.sense == ConstraintSense::Inequality;
    let clamp = |v: Vec<f64>| if ineq { dual_update_inequality(&v) } else { v };

    let y_star = clamp(vecmath::scale(1.0 / beta_k, &state.it.residual));
    let y_hat = clamp(vecmath::convex_comb(tau, &state.it.y_bar, &y_star));
    cnt.at();
    let w = linop::adjoint_apply(op, &y_hat)?;
    cnt.prox();
    let x_star = problem.argmin_linear(&w)?;
    cnt.a();
    let u = linop::apply(op, &x_star)?;
    let u_res = vecmath::sub(&u, &problem.b);

    let x_next = vecmath::convex_comb(tau, &state.it.x_bar, &x_star);
    let r_next = vecmath::convex_comb(tau, &state.it.residual, &u_res);
    let y_next = clamp(vecmath::add_scaled(&y_hat, 1.0 / l_f_g, &u_res));

    let f_val = problem.func_eval(&x_next);
    state.it = PrimalDualIterate {
        x_bar: x_next,
        y_bar: y_next,
        residual: r_next,
        f_val,
    };
    Ok(StepOut {
        psi: None,
        g_entry: None,
        inner_iters: 0,
        u_image: Some(u),
        x_star: Some(x_star),
    })
}

/// Inexact one-primal-step kernel over the AL smoother.
#[allow(clippy::too_many_arguments)]
fn step_i1p2d(
    problem: &ConstrainedProblem,
    cfg: &SolverConfig,
    op: &LinearMap,
    a_norm_sq: f64,
    state: &mut RunState,
    cnt: &mut Counter,
    events: &mut Vec<String>,
    k: usize,
) -> Result<StepOut> {
    let (tau, gamma_k, beta_k) = (state.sched.tau, state.sched.gamma, state.sched.beta);

    let y_star = vecmath::scale(1.0 / beta_k, &state.it.residual);
    let y_hat = vecmath::convex_comb(tau, &state.it.y_bar, &y_star);

    let delta_k = next_delta(cfg, state, tau, &y_star, events, k);

    let r = subsolver::aug_lagrangian_argmin(
        problem,
        op,
        a_norm_sq,
        &y_hat,
        gamma_k,
        delta_k,
        &state.warm,
        cfg.inner_max,
    )?;
    state.warm = r.x.clone();
    cnt.a();
    let ax = linop::apply(op, &r.x)?;
    let r_tilde = vecmath::sub(&ax, &problem.b);

    let x_next = vecmath::convex_comb(tau, &state.it.x_bar, &r.x);
    let r_next = vecmath::convex_comb(tau, &state.it.residual, &r_tilde);
    let y_next = vecmath::add_scaled(&y_hat, gamma_k, &r_tilde);

    let f_val = problem.func_eval(&x_next);
    state.it = PrimalDualIterate {
        x_bar: x_next,
        y_bar: y_next,
        residual: r_next,
        f_val,
    };
    Ok(StepOut {
        psi: None,
        g_entry: None,
        inner_iters: r.iters,
        u_image: Some(ax),
        x_star: Some(r.x),
    })
}

/// Inexact two-primal-step kernel (best effort: its rate certificate is not
/// published, so no bound set attaches to these runs).
#[allow(clippy::too_many_arguments)]
fn step_i2p1d(
    problem: &ConstrainedProblem,
    cfg: &SolverConfig,
    op: &LinearMap,
    a_norm_sq: f64,
    state: &mut RunState,
    cnt: &mut Counter,
    events: &mut Vec<String>,
    k: usize,
) -> Result<StepOut> {
    let (tau, gamma_k, beta_k) = (state.sched.tau, state.sched.gamma, state.sched.beta);
    let beta_next = state.sched.beta_next();
    let y_star = vecmath::scale(1.0 / beta_k, &state.it.residual);
    let delta_k = next_delta(cfg, state, tau, &y_star, events, k);

    let r1 = subsolver::aug_lagrangian_argmin(
        problem,
        op,
        a_norm_sq,
        &state.it.y_bar,
        gamma_k,
        delta_k,
        &state.warm,
        cfg.inner_max,
    )?;
    state.warm = r1.x.clone();
    cnt.a();
    let ax1 = linop::apply(op, &r1.x)?;
    let r1_res = vecmath::sub(&ax1, &problem.b);

    let x_hat = vecmath::convex_comb(tau, &state.it.x_bar, &r1.x);
    let r_hat = vecmath::convex_comb(tau, &state.it.residual, &r1_res);
    let y_hat = vecmath::scale(1.0 / beta_next, &r_hat);

    let r2 = subsolver::inexact_prox_af(
        problem,
        op,
        a_norm_sq,
        &x_hat,
        &y_hat,
        beta_next,
        1.0,
        delta_k,
        &state.warm2,
        cfg.inner_max,
    )?;
    state.warm2 = r2.x.clone();
    cnt.a();
    let ax2 = linop::apply(op, &r2.x)?;
    let r_next = vecmath::sub(&ax2, &problem.b);
    let y_next = vecmath::convex_comb(tau, &state.it.y_bar, &y_hat);

    let f_val = problem.func_eval(&r2.x);
    state.it = PrimalDualIterate {
        x_bar: r2.x,
        y_bar: y_next,
        residual: r_next,
        f_val,
    };
    Ok(StepOut {
        psi: None,
        g_entry: None,
        inner_iters: r1.iters + r2.iters,
        u_image: Some(ax1),
        x_star: Some(r1.x),
    })
}

/// delta_k from the configured policy; the q-rule keeps q_k delta_k
/// non-increasing, shrinking delta when needed (and logging the event).
fn next_delta(
    cfg: &SolverConfig,
    state: &mut RunState,
    tau: f64,
    y_star: &[f64],
    events: &mut Vec<String>,
    k: usize,
) -> f64 {
    match cfg.delta_policy {
        DeltaPolicy::Const { delta } => delta,
        DeltaPolicy::PolyDecay { delta0, power } => delta0 / (k as f64 + 1.0).powf(power),
        DeltaPolicy::QRule { delta0 } => {
            let d = if state.d_ax.is_finite() { state.d_ax } else { 0.0 };
            let q_k = (1.0 - tau) * tau * vecmath::dist2(&state.it.y_bar, y_star) + (d + 1.0) / 2.0;
            if k == 0 || !state.q_last.is_finite() {
                state.q_last = q_k;
                state.delta_prev = delta0;
                return delta0;
            }
            let cand = state.delta_prev.min(state.delta_prev * state.q_last / q_k);
            if cand < state.delta_prev {
                events.push(format!(
                    "delta shrunk at {k}: {} -> {cand}",
                    state.delta_prev
                ));
            }
            state.q_last = q_k;
            state.delta_prev = cand;
            cand
        }
    }
}

// ---------------------------------------------------------------------------
// ADMM kernels
// ---------------------------------------------------------------------------

struct AdmmCtx<'a> {
    problem: &'a ConstrainedProblem,
    a1: LinearMap,
    a2: LinearMap,
    a1_norm_sq: f64,
    a2_norm_sq: f64,
    a1_min_eig: f64,
    a2_min_eig: f64,
    n1: usize,
    a1_center: Vec<f64>,
    warm1: Vec<f64>,
    warm2: Vec<f64>,
}

fn solve_admm(problem: &ConstrainedProblem, cfg: &SolverConfig) -> Result<SolveOutput> {
    let gamma0 = cfg.resolve_gamma0(0.0)?;
    let n1 = problem.blocks[0].a.cols;
    let n2 = problem.n() - n1;
    let a1 = LinearMap::Dense(problem.blocks[0].a.clone());
    let a2 = LinearMap::Dense(problem.blocks[1].a.clone());
    let a1_norm_sq = linop::spectral_norm_sq(&a1, 1e-10, 50_000)?;
    let a2_norm_sq = linop::spectral_norm_sq(&a2, 1e-10, 50_000)?;
    // exact block Gram minimum eigenvalues sharpen the inner certificates
    let a1_min_eig = linop::min_eig_gram(&a1).unwrap_or(0.0);
    let a2_min_eig = linop::min_eig_gram(&a2).unwrap_or(0.0);
    let x1_center = cfg.smoother.x_center[0..n1].to_vec();
    let a1_center = linop::apply(&a1, &x1_center)?;
    let mut ctx = AdmmCtx {
        problem,
        a1,
        a2,
        a1_norm_sq,
        a2_norm_sq,
        a1_min_eig,
        a2_min_eig,
        n1,
        a1_center,
        warm1: x1_center,
        warm2: cfg.smoother.x_center[n1..].to_vec(),
    };

    // start point: block steps 2, 3, 5 with y_hat = 0 and the k=0 parameters
    let p0 = schedule::admm_params(0, gamma0);
    let gamma1 = schedule::admm_params(1, gamma0).gamma;
    let zero_m = vec![0.0; problem.m()];
    let x2_init = ctx.warm2.clone();
    let mut counters = Counter::new(cfg.count_ops);
    let (x1, i1) = admm_block1(&mut ctx, cfg, &x2_init, &zero_m, p0.rho, gamma1)?;
    let (x2, i2) = admm_block2(&mut ctx, cfg, &x1, &zero_m, p0.eta)?;
    let mut raw: Vec<f64> = x1.iter().chain(x2.iter()).cloned().collect();
    let r_raw0 = problem.residual(&raw)?;
    let y0 = vecmath::scale(p0.eta, &r_raw0);
    let mut it = PrimalDualIterate {
        x_bar: raw.clone(),
        y_bar: y0,
        residual: r_raw0,
        f_val: problem.func_eval(&raw),
    };
    let _ = n2;

    let b_norm_floor = vecmath::norm2(&problem.b).max(1.0);
    let f_star = problem.reference.as_ref().map(|r| r.f_star);
    let mut records = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut events: Vec<String> = Vec::new();

    let push = |records: &mut Vec<IterationRecord>,
                it: &PrimalDualIterate,
                k: usize,
                p: schedule::AdmmSchedule,
                inner: usize,
                wall: u64| {
        let feas = vecmath::norm2(&it.residual);
        records.push(IterationRecord {
            k,
            f_val: it.f_val,
            obj_residual: f_star.map(|f| it.f_val - f),
            feas_abs: feas,
            feas_rel: feas / b_norm_floor,
            gamma: p.gamma,
            beta: p.beta,
            tau: p.tau,
            psi: None,
            inner_iters: inner,
            wall_ns: wall,
            feas_bound: None,
            obj_upper: None,
        });
    };
    push(&mut records, &it, 0, p0, i1 + i2, 0);
    counters.flush();

    for k in 0..cfg.max_iter {
        let t0 = Instant::now();
        let p = schedule::admm_params(k, gamma0);
        let gamma_next = schedule::admm_params(k + 1, gamma0).gamma;
        let x_prev = it.x_bar.clone();

        let y_star = vecmath::scale(1.0 / p.beta, &it.residual);
        let y_hat = vecmath::convex_comb(p.tau, &it.y_bar, &y_star);

        let x2_now = raw[ctx.n1..].to_vec();
        let (x1_new, i1) = match cfg.scheme {
            Scheme::AdmmNew => admm_block1(&mut ctx, cfg, &x2_now, &y_hat, p.rho, gamma_next)?,
            _ => padmm_block1(&ctx, &raw, &y_hat, p.rho, gamma_next, &mut counters)?,
        };
        let (x2_new, i2) = match cfg.scheme {
            Scheme::AdmmNew => admm_block2(&mut ctx, cfg, &x1_new, &y_hat, p.eta)?,
            _ => padmm_block2(&ctx, &x1_new, &x2_now, &y_hat, p.eta, &mut counters)?,
        };
        raw = x1_new.iter().chain(x2_new.iter()).cloned().collect();
        counters.a();
        let r_raw = problem.residual(&raw)?;

        let x_bar = vecmath::convex_comb(p.tau, &it.x_bar, &raw);
        let residual = vecmath::convex_comb(p.tau, &it.residual, &r_raw);
        let y_bar = vecmath::add_scaled(&y_hat, p.eta, &r_raw);
        it = PrimalDualIterate {
            f_val: problem.func_eval(&x_bar),
            x_bar,
            y_bar,
            residual,
        };

        let wall = t0.elapsed().as_nanos() as u64;
        push(
            &mut records,
            &it,
            k + 1,
            schedule::admm_params(k + 1, gamma0),
            i1 + i2,
            wall,
        );
        counters.flush();

        let feas_rel = vecmath::norm2(&it.residual) / b_norm_floor;
        let dx = vecmath::dist2(&it.x_bar, &x_prev) / vecmath::norm2(&x_prev).max(1.0);
        if feas_rel <= cfg.eps_f && dx <= cfg.eps_x {
            status = SolveStatus::Converged;
            break;
        }
    }
    events.push(format!("admm run: gamma0 = {gamma0}"));

    Ok(SolveOutput {
        trace: Trace {
            records,
            counters: if cfg.count_ops {
                Some(counters.all)
            } else {
                None
            },
            g_gaps: None,
            status,
            x_final: it.x_bar.clone(),
            y_final: it.y_bar.clone(),
            scheme: cfg.scheme.label().to_string(),
            tuned: false,
            events,
            seed: cfg.seed,
        },
        iterate: it,
    })
}

/// Exact x1 block step of the new ADMM variant:
/// argmin f1 + (gamma_next/2)||A1(x1 - x1_c)||^2
///        + (rho/2)||A1 x1 + A2 x2 - b + y_hat/rho||^2.
/// The two quadratics share the image A1 x1, so they fold into one:
/// ((gamma+rho)/2)||A1 x1 - e||^2 with e = (gamma A1 x1_c - rho v)/(gamma+rho).
fn admm_block1(
    ctx: &mut AdmmCtx,
    cfg: &SolverConfig,
    x2: &[f64],
    y_hat: &[f64],
    rho: f64,
    gamma_next: f64,
) -> Result<(Vec<f64>, usize)> {
    let a2x2 = linop::apply(&ctx.a2, x2)?;
    let v: Vec<f64> = a2x2
        .iter()
        .zip(&ctx.problem.b)
        .zip(y_hat)
        .map(|((a, b), y)| a - b + y / rho)
        .collect();
    let kappa = gamma_next + rho;
    let e: Vec<f64> = ctx
        .a1_center
        .iter()
        .zip(&v)
        .map(|(c, vv)| (gamma_next * c - rho * vv) / kappa)
        .collect();
    let quad = QuadTerm {
        op: &ctx.a1,
        lin: vec![0.0; ctx.problem.m()],
        coeff: kappa,
        shift: e,
        offset: 0.0,
        a_norm_sq: ctx.a1_norm_sq,
        gram_min_eig: ctx.a1_min_eig,
    };
    let block = SingleBlock {
        f: &ctx.problem.blocks[0].f,
        set: &ctx.problem.blocks[0].set,
        n: ctx.n1,
    };
    let delta = cfg.delta0().min(1e-8);
    let target = 0.5 * kappa * delta * delta;
    let budget = cfg
        .inner_max
        .unwrap_or_else(|| subsolver::default_budget(quad.lipschitz(), target));
    let r = subsolver::fista_solve(&block, &quad, &ctx.warm1, target, budget)?;
    ctx.warm1 = r.x.clone();
    Ok((r.x, r.iters))
}

/// Exact x2 block step: argmin f2 + (eta/2)||A2 x2 + A1 x1_new - b + y_hat/eta||^2.
fn admm_block2(
    ctx: &mut AdmmCtx,
    cfg: &SolverConfig,
    x1_new: &[f64],
    y_hat: &[f64],
    eta: f64,
) -> Result<(Vec<f64>, usize)> {
    let a1x1 = linop::apply(&ctx.a1, x1_new)?;
    let shift: Vec<f64> = a1x1
        .iter()
        .zip(&ctx.problem.b)
        .zip(y_hat)
        .map(|((a, b), y)| -(a - b + y / eta))
        .collect();
    let quad = QuadTerm {
        op: &ctx.a2,
        lin: vec![0.0; ctx.problem.m()],
        coeff: eta,
        shift,
        offset: 0.0,
        a_norm_sq: ctx.a2_norm_sq,
        gram_min_eig: ctx.a2_min_eig,
    };
    let n2 = ctx.problem.n() - ctx.n1;
    let block = SingleBlock {
        f: &ctx.problem.blocks[1].f,
        set: &ctx.problem.blocks[1].set,
        n: n2,
    };
    let delta = cfg.delta0().min(1e-8);
    let target = 0.5 * eta * delta * delta;
    let budget = cfg
        .inner_max
        .unwrap_or_else(|| subsolver::default_budget(quad.lipschitz(), target));
    let r = subsolver::fista_solve(&block, &quad, &ctx.warm2, target, budget)?;
    ctx.warm2 = r.x.clone();
    Ok((r.x, r.iters))
}

/// Linearized x1 step: one prox of f1 at the gradient point of the combined
/// quadratic, curvature kappa/alpha1 with alpha1 = 1/||A1||^2. Coincides with
/// the exact block step when A1'A1 = I.
fn padmm_block1(
    ctx: &AdmmCtx,
    raw: &[f64],
    y_hat: &[f64],
    rho: f64,
    gamma_next: f64,
    cnt: &mut Counter,
) -> Result<(Vec<f64>, usize)> {
    let x1 = &raw[..ctx.n1];
    let x2 = &raw[ctx.n1..];
    let a1x1 = linop::apply(&ctx.a1, x1)?;
    let a2x2 = linop::apply(&ctx.a2, x2)?;
    let kappa = gamma_next + rho;
    let alpha1 = 1.0 / ctx.a1_norm_sq;
    let w: Vec<f64> = a1x1
        .iter()
        .zip(&a2x2)
        .zip(ctx.problem.b.iter().zip(y_hat))
        .zip(&ctx.a1_center)
        .map(|(((a1v, a2v), (b, y)), c)| rho * (a1v + a2v - b) + y + gamma_next * (a1v - c))
        .collect();
    cnt.at();
    let grad = linop::adjoint_apply(&ctx.a1, &w)?;
    let g_point = vecmath::add_scaled(x1, -alpha1 / kappa, &grad);
    cnt.prox();
    let x = prox::prox_eval(
        &ctx.problem.blocks[0].f,
        &ctx.problem.blocks[0].set,
        alpha1 / kappa,
        &g_point,
    )?;
    Ok((x, 0))
}

/// Linearized x2 step.
fn padmm_block2(
    ctx: &AdmmCtx,
    x1_new: &[f64],
    x2: &[f64],
    y_hat: &[f64],
    eta: f64,
    cnt: &mut Counter,
) -> Result<(Vec<f64>, usize)> {
    let a1x1 = linop::apply(&ctx.a1, x1_new)?;
    let a2x2 = linop::apply(&ctx.a2, x2)?;
    let alpha2 = 1.0 / ctx.a2_norm_sq;
    let w: Vec<f64> = a1x1
        .iter()
        .zip(&a2x2)
        .zip(ctx.problem.b.iter().zip(y_hat))
        .map(|((a1v, a2v), (b, y))| eta * (a1v + a2v - b) + y)
        .collect();
    cnt.at();
    let grad = linop::adjoint_apply(&ctx.a2, &w)?;
    let g_point = vecmath::add_scaled(x2, -alpha2 / eta, &grad);
    cnt.prox();
    let x = prox::prox_eval(
        &ctx.problem.blocks[1].f,
        &ctx.problem.blocks[1].set,
        alpha2 / eta,
        &g_point,
    )?;
    Ok((x, 0))
}

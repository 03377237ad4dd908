//! Dual smoothers and the smoothed gap function.
//!
//! The nonsmooth dual g(y) = min_{x in X} f(x) + y'(Ax - b) is smoothed in
//! one of two ways:
//! - Bregman smoother: add gamma/2 ||x - x_c||^2 inside the minimization
//!   (S = I, Euclidean distance). The argmin reduces to one prox call and the
//!   gradient is A x*(y) - b with Lipschitz constant ||A||^2 / gamma.
//! - Augmented-Lagrangian smoother: add gamma/2 ||Ax - b||^2 (S = A). The
//!   argmin is an inner FISTA solve (see [`crate::subsolver`]) and the
//!   gradient Lipschitz constant is 1/gamma.
//!
//! The smoothed primal-dual gap used by the contraction certificates is
//! G_{gamma beta}(x, y) = f(x) - g_gamma(y) + ||Ax - b||^2 / (2 beta).

use crate::error::{Error, Result};
use crate::linop::{self, LinearMap};
use crate::problems::{ConstrainedProblem, RefProvenance};
use crate::prox::FeasibleSet;
use crate::vecmath;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SmootherKind {
    Bregman,
    AugLag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SChoice {
    Identity,
    OperatorA,
}

/// Smoother configuration: the gamma-independent constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmootherConfig {
    pub kind: SmootherKind,
    /// Prox center x_c in X.
    pub x_center: Vec<f64>,
    pub s_choice: SChoice,
    /// Upper bound on the smoothed-gradient constant: 1 for the AL smoother,
    /// >= ||A||_2^2 for the Bregman smoother (sigma_d = 1 throughout).
    pub l_bar_g: f64,
}

impl SmootherConfig {
    pub fn bregman(x_center: Vec<f64>, l_bar_g: f64) -> Self {
        SmootherConfig {
            kind: SmootherKind::Bregman,
            x_center,
            s_choice: SChoice::Identity,
            l_bar_g,
        }
    }

    pub fn aug_lag(x_center: Vec<f64>) -> Self {
        SmootherConfig {
            kind: SmootherKind::AugLag,
            x_center,
            s_choice: SChoice::OperatorA,
            l_bar_g: 1.0,
        }
    }

    /// Check the structural invariants against a problem.
    pub fn validate(&self, problem: &ConstrainedProblem, a_norm_sq: f64) -> Result<()> {
        match self.kind {
            SmootherKind::AugLag => {
                if self.s_choice != SChoice::OperatorA || self.l_bar_g != 1.0 {
                    return Err(Error::Config(
                        "AL smoother requires S = A and L_bar_g = 1".into(),
                    ));
                }
            }
            SmootherKind::Bregman => {
                if self.s_choice != SChoice::Identity {
                    return Err(Error::Config("Bregman smoother uses S = I here".into()));
                }
                if self.l_bar_g < a_norm_sq * (1.0 - 1e-9) {
                    return Err(Error::Config(format!(
                        "Bregman L_bar_g = {} below ||A||^2 estimate {}",
                        self.l_bar_g, a_norm_sq
                    )));
                }
            }
        }
        if self.x_center.len() != problem.n() {
            return Err(Error::Shape {
                expected: problem.n(),
                got: self.x_center.len(),
            });
        }
        if problem.set_violation(&self.x_center) > crate::prox::FEAS_TOL {
            return Err(Error::InfeasibleIterate(
                problem.set_violation(&self.x_center),
            ));
        }
        Ok(())
    }
}

/// Euclidean d_b(Sx, Sx_c) for the configured S.
pub fn bregman_dist(cfg: &SmootherConfig, op: &LinearMap, b: &[f64], x: &[f64]) -> Result<f64> {
    match cfg.s_choice {
        SChoice::Identity => Ok(0.5 * vecmath::dist2(x, &cfg.x_center).powi(2)),
        SChoice::OperatorA => {
            // with a feasible center (A x_c = b) this is ||Ax - b||^2 / 2
            let ax = linop::apply(op, x)?;
            Ok(0.5 * vecmath::norm2_sq(&vecmath::sub(&ax, b)))
        }
    }
}

/// x*_gamma(y) for the Bregman smoother: one prox call at
/// x_c - A'y / gamma with parameter 1/gamma.
pub fn bregman_argmin(
    problem: &ConstrainedProblem,
    cfg: &SmootherConfig,
    op: &LinearMap,
    y: &[f64],
    gamma: f64,
) -> Result<Vec<f64>> {
    debug_assert!(cfg.kind == SmootherKind::Bregman);
    assert!(gamma > 0.0);
    let aty = linop::adjoint_apply(op, y)?;
    let v: Vec<f64> = cfg
        .x_center
        .iter()
        .zip(&aty)
        .map(|(c, g)| c - g / gamma)
        .collect();
    problem.prox_eval(1.0 / gamma, &v)
}

/// Same, reusing a precomputed A'y (saves the adjoint apply when cached).
pub fn bregman_argmin_with_aty(
    problem: &ConstrainedProblem,
    cfg: &SmootherConfig,
    aty: &[f64],
    gamma: f64,
) -> Result<Vec<f64>> {
    debug_assert!(cfg.kind == SmootherKind::Bregman);
    let v: Vec<f64> = cfg
        .x_center
        .iter()
        .zip(aty)
        .map(|(c, g)| c - g / gamma)
        .collect();
    problem.prox_eval(1.0 / gamma, &v)
}

/// y*_beta(x) = (A x - b) / beta.
pub fn dual_center(residual: &[f64], beta: f64) -> Result<Vec<f64>> {
    if beta <= 0.0 {
        return Err(Error::BadBeta(beta));
    }
    Ok(vecmath::scale(1.0 / beta, residual))
}

/// g_gamma(y) evaluated at a supplied argmin x_star (works for both
/// smoothers: pass the Bregman or AL argmin).
pub fn smoothed_dual_value_at(
    problem: &ConstrainedProblem,
    cfg: &SmootherConfig,
    op: &LinearMap,
    y: &[f64],
    gamma: f64,
    x_star: &[f64],
) -> Result<f64> {
    let ax = linop::apply(op, x_star)?;
    let r = vecmath::sub(&ax, &problem.b);
    let dist = match cfg.s_choice {
        SChoice::Identity => 0.5 * vecmath::dist2(x_star, &cfg.x_center).powi(2),
        SChoice::OperatorA => 0.5 * vecmath::norm2_sq(&r),
    };
    Ok(problem.func_eval(x_star) + vecmath::dot(y, &r) + gamma * dist)
}

/// g_gamma(y) for the Bregman smoother (computes the argmin internally).
pub fn smoothed_dual_value(
    problem: &ConstrainedProblem,
    cfg: &SmootherConfig,
    op: &LinearMap,
    y: &[f64],
    gamma: f64,
) -> Result<f64> {
    let x = bregman_argmin(problem, cfg, op, y, gamma)?;
    smoothed_dual_value_at(problem, cfg, op, y, gamma, &x)
}

/// G_{gamma beta}(x_bar, y_bar) = f(x_bar) - g_gamma(y_bar)
/// + ||A x_bar - b||^2 / (2 beta), with g_gamma evaluated at the supplied
/// argmin (so the caller controls which smoother and how exactly it solves).
pub fn smoothed_gap_at(
    problem: &ConstrainedProblem,
    cfg: &SmootherConfig,
    op: &LinearMap,
    x_bar: &[f64],
    y_bar: &[f64],
    gamma: f64,
    beta: f64,
    x_star_of_ybar: &[f64],
) -> Result<f64> {
    let viol = problem.set_violation(x_bar);
    if viol > crate::prox::FEAS_TOL {
        return Err(Error::InfeasibleIterate(viol));
    }
    let f_bar = problem.func_eval(x_bar);
    let g_val = smoothed_dual_value_at(problem, cfg, op, y_bar, gamma, x_star_of_ybar)?;
    let r = problem.residual(x_bar)?;
    Ok(f_bar - g_val + vecmath::norm2_sq(&r) / (2.0 * beta))
}

/// Bregman-smoother convenience wrapper around [`smoothed_gap_at`].
pub fn smoothed_gap(
    problem: &ConstrainedProblem,
    cfg: &SmootherConfig,
    op: &LinearMap,
    x_bar: &[f64],
    y_bar: &[f64],
    gamma: f64,
    beta: f64,
) -> Result<f64> {
    let x_star = bregman_argmin(problem, cfg, op, y_bar, gamma)?;
    smoothed_gap_at(problem, cfg, op, x_bar, y_bar, gamma, beta, &x_star)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiameterProvenance {
    Analytic,
    Reference,
    Unavailable,
}

/// The two diameter constants that enter the closed-form bounds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiameterEstimates {
    /// Projected prox-diameter sup_{x in X} d_b(Sx, Sx_c).
    pub d_x_s: f64,
    /// Norm of a (minimum-norm when certified) dual solution.
    pub d_y_star: f64,
    pub provenance_x: DiameterProvenance,
    pub provenance_y: DiameterProvenance,
}

/// Analytic diameters: exact farthest-corner distance for boxes under
/// S = Identity; conservative interval bound for S = A. D_Y* comes from the
/// problem's reference dual when present.
pub fn estimate_diameters(
    problem: &ConstrainedProblem,
    cfg: &SmootherConfig,
) -> Result<DiameterEstimates> {
    let d_x_s = match cfg.s_choice {
        SChoice::Identity => {
            let mut total = 0.0;
            let mut bounded = true;
            for (bl, range) in problem.blocks.iter().zip(problem.col_ranges()) {
                for (local, global) in range.clone().enumerate() {
                    let (l, u) = bl.set.bounds(local);
                    if l.is_infinite() || u.is_infinite() {
                        bounded = false;
                        break;
                    }
                    let c = cfg.x_center[global];
                    let far = (l - c).abs().max((u - c).abs());
                    total += far * far;
                }
            }
            if !bounded {
                if cfg.kind == SmootherKind::Bregman {
                    return Err(Error::UnboundedDomain(
                        "Bregman diameter needs a bounded feasible set".into(),
                    ));
                }
                f64::INFINITY
            } else {
                0.5 * total
            }
        }
        SChoice::OperatorA => {
            // interval bound: |A_j x - b_j| <= sum_i |A_ji| max(|l_i|, |u_i|) + |b_j|
            let dense = problem.operator().to_dense();
            let mut radii = vec![0.0; problem.n()];
            let mut bounded = true;
            for (bl, range) in problem.blocks.iter().zip(problem.col_ranges()) {
                for (local, global) in range.clone().enumerate() {
                    let (l, u) = bl.set.bounds(local);
                    if l.is_infinite() || u.is_infinite() {
                        bounded = false;
                    }
                    radii[global] = l.abs().max(u.abs());
                }
            }
            if !bounded {
                f64::INFINITY
            } else {
                let mut total = 0.0;
                for j in 0..dense.rows {
                    let mut row = problem.b[j].abs();
                    for i in 0..dense.cols {
                        row += dense.at(j, i).abs() * radii[i];
                    }
                    total += row * row;
                }
                0.5 * total
            }
        }
    };
    let (d_y_star, prov_y) = match &problem.reference {
        Some(r) => (
            vecmath::norm2(&r.y_star),
            match r.provenance {
                RefProvenance::Oracle => DiameterProvenance::Reference,
                RefProvenance::SelfSolve => DiameterProvenance::Reference,
            },
        ),
        None => (f64::INFINITY, DiameterProvenance::Unavailable),
    };
    Ok(DiameterEstimates {
        d_x_s,
        d_y_star,
        provenance_x: if d_x_s.is_finite() {
            DiameterProvenance::Analytic
        } else {
            DiameterProvenance::Unavailable
        },
        provenance_y: prov_y,
    })
}

/// Helper shared by tests and schemes: does the box contain only finite bounds?
pub fn set_is_bounded(set: &FeasibleSet, dim: usize) -> bool {
    (0..dim).all(|i| {
        let (l, u) = set.bounds(i);
        l.is_finite() && u.is_finite()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::DenseMat;
    use crate::problems::{Block, ConstraintSense, GenMeta, Reference};
    use crate::prox::{FeasibleSet, FunctionKind, FunctionSpec};
    use crate::rng::CounterRng;

    fn one_d(f: FunctionSpec, set: FeasibleSet, a: f64, b: f64) -> ConstrainedProblem {
        ConstrainedProblem {
            blocks: vec![Block {
                f,
                set,
                a: DenseMat::new(1, 1, vec![a]),
            }],
            b: vec![b],
            sense: ConstraintSense::Equality,
            reference: None,
            meta: GenMeta::default(),
        }
    }

    fn random_problem(
        rng: &mut CounterRng,
        m: usize,
        n: usize,
        half_width: f64,
    ) -> ConstrainedProblem {
        let a = DenseMat::new(m, n, (0..m * n).map(|_| rng.next_gaussian()).collect());
        // b = A x_feas with x_feas strictly inside the box
        let x_feas: Vec<f64> =
            (0..n).map(|_| 0.5 * half_width * (2.0 * rng.next_uniform() - 1.0)).collect();
        let mut b = vec![0.0; m];
        a.apply(&x_feas, &mut b);
        ConstrainedProblem {
            blocks: vec![Block {
                f: FunctionSpec::l1_uniform(n, 1.0),
                set: FeasibleSet::uniform_box(n, -half_width, half_width),
                a,
            }],
            b,
            sense: ConstraintSense::Equality,
            reference: None,
            meta: GenMeta::default(),
        }
    }

    #[test]
    fn bregman_argmin_1d_kkt_cases() {
        // f = |.|, X = R, A = 1, b = 0, x_c = 0, gamma = 1, y = 3 -> soft(-3,1) = -2
        let p = one_d(FunctionSpec::l1_uniform(1, 1.0), FeasibleSet::All, 1.0, 0.0);
        let cfg = SmootherConfig::bregman(vec![0.0], 1.0);
        let op = p.operator();
        let x = bregman_argmin(&p, &cfg, &op, &[3.0], 1.0).unwrap();
        assert!((x[0] + 2.0).abs() < 1e-14);

        // f = 0, X = [-1,1], A = 1, b = 0.5, x_c = 0, gamma = 1, y = -0.5 -> 0.5
        let p = one_d(
            FunctionSpec::zero(),
            FeasibleSet::uniform_box(1, -1.0, 1.0),
            1.0,
            0.5,
        );
        let cfg = SmootherConfig::bregman(vec![0.0], 1.0);
        let op = p.operator();
        let x = bregman_argmin(&p, &cfg, &op, &[-0.5], 1.0).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-14);

        // y = 0: equals prox_{f/gamma}(x_c)
        let p = one_d(FunctionSpec::l1_uniform(1, 1.0), FeasibleSet::All, 1.0, 0.0);
        let op = p.operator();
        let x = bregman_argmin(&p, &cfg, &op, &[0.0], 2.0).unwrap();
        let want = p.prox_eval(0.5, &[0.0]).unwrap();
        assert_eq!(x, want);
    }

    #[test]
    fn dual_center_cases() {
        assert_eq!(dual_center(&[1.0, 2.0], 1.0).unwrap(), vec![1.0, 2.0]);
        assert_eq!(dual_center(&[4.0, -2.0], 2.0).unwrap(), vec![2.0, -1.0]);
        assert_eq!(dual_center(&[0.0, 0.0], 0.7).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(dual_center(&[1.0], 0.0), Err(Error::BadBeta(_))));
    }

    #[test]
    fn smoothed_dual_value_cases() {
        // f = |.|, X = [-1,1], b = 0, y = 0.3: argmin soft(-0.3,1) = 0, value 0
        let p = one_d(
            FunctionSpec::l1_uniform(1, 1.0),
            FeasibleSet::uniform_box(1, -1.0, 1.0),
            1.0,
            0.0,
        );
        let cfg = SmootherConfig::bregman(vec![0.0], 1.0);
        let op = p.operator();
        let v = smoothed_dual_value(&p, &cfg, &op, &[0.3], 1.0).unwrap();
        assert!(v.abs() < 1e-14);

        // f = 0, X = [-1,1], b = 0.5, y = -0.5: x* = 0.5, value 0.125
        let p = one_d(
            FunctionSpec::zero(),
            FeasibleSet::uniform_box(1, -1.0, 1.0),
            1.0,
            0.5,
        );
        let op = p.operator();
        let v = smoothed_dual_value(&p, &cfg, &op, &[-0.5], 1.0).unwrap();
        assert!((v - 0.125).abs() < 1e-14);

        // center fixed point: x_c = 0 is the prox fixed point of |.|, value 0 at y=0
        let p = one_d(FunctionSpec::l1_uniform(1, 1.0), FeasibleSet::All, 1.0, 0.0);
        let op = p.operator();
        let v = smoothed_dual_value(&p, &cfg, &op, &[0.0], 100.0).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn smoothed_gap_1d_closed_form() {
        // f=|.|, X=[-1,1], A=1, b=0, gamma=beta=1, x_bar=0.5, y_bar=0.3 -> 0.625
        let p = one_d(
            FunctionSpec::l1_uniform(1, 1.0),
            FeasibleSet::uniform_box(1, -1.0, 1.0),
            1.0,
            0.0,
        );
        let cfg = SmootherConfig::bregman(vec![0.0], 1.0);
        let op = p.operator();
        let g = smoothed_gap(&p, &cfg, &op, &[0.5], &[0.3], 1.0, 1.0).unwrap();
        assert!((g - 0.625).abs() < 1e-14);
        // infeasible iterate rejected
        assert!(matches!(
            smoothed_gap(&p, &cfg, &op, &[1.5], &[0.3], 1.0, 1.0),
            Err(Error::InfeasibleIterate(_))
        ));
    }

    #[test]
    fn smoothed_gap_near_zero_at_saddle() {
        // tiny QP-like instance solved by hand: min 0 s.t. x = 0.5 on [-1,1]
        // saddle: x* = 0.5, y* = 0 (f = 0). gap at gamma = beta = 1e-8 -> ~0
        let p = one_d(
            FunctionSpec::zero(),
            FeasibleSet::uniform_box(1, -1.0, 1.0),
            1.0,
            0.5,
        );
        let cfg = SmootherConfig::bregman(vec![0.0], 1.0);
        let op = p.operator();
        let g = smoothed_gap(&p, &cfg, &op, &[0.5], &[0.0], 1e-8, 1e-8).unwrap();
        assert!(g.abs() <= 1e-6, "{g}");
    }

    #[test]
    fn gradient_identity_finite_differences() {
        // grad of g_gamma at y equals A x*(y) - b (central differences, h = 1e-5)
        let mut rng = CounterRng::new(41);
        for trial in 0..3 {
            let p = random_problem(&mut rng, 3, 5, 1.0 + trial as f64 * 0.3);
            let op = p.operator();
            let l = crate::linop::spectral_norm_sq(&op, 1e-12, 10_000).unwrap();
            let cfg = SmootherConfig::bregman(vec![0.0; 5], l);
            let gamma = 0.8;
            let y: Vec<f64> = (0..3).map(|_| rng.next_gaussian()).collect();
            let x_star = bregman_argmin(&p, &cfg, &op, &y, gamma).unwrap();
            let grad = p.residual(&x_star).unwrap();
            for j in 0..3 {
                let h = 1e-5;
                let mut yp = y.clone();
                yp[j] += h;
                let mut ym = y.clone();
                ym[j] -= h;
                let gp = smoothed_dual_value(&p, &cfg, &op, &yp, gamma).unwrap();
                let gm = smoothed_dual_value(&p, &cfg, &op, &ym, gamma).unwrap();
                let fd = (gp - gm) / (2.0 * h);
                assert!(
                    (fd - grad[j]).abs() <= 1e-4 * (1.0 + grad[j].abs()),
                    "fd {fd} vs grad {}",
                    grad[j]
                );
            }
        }
    }

    #[test]
    fn gradient_lipschitz_bound() {
        // ||grad g(y1) - grad g(y2)|| <= (L_bar/gamma) ||y1 - y2||
        let mut rng = CounterRng::new(43);
        let p = random_problem(&mut rng, 3, 5, 1.0);
        let op = p.operator();
        let l = crate::linop::spectral_norm_sq(&op, 1e-12, 10_000).unwrap();
        let cfg = SmootherConfig::bregman(vec![0.0; 5], l);
        let gamma = 0.5;
        for _ in 0..20 {
            let y1: Vec<f64> = (0..3).map(|_| rng.next_gaussian()).collect();
            let y2: Vec<f64> = (0..3).map(|_| rng.next_gaussian()).collect();
            let g1 = p
                .residual(&bregman_argmin(&p, &cfg, &op, &y1, gamma).unwrap())
                .unwrap();
            let g2 = p
                .residual(&bregman_argmin(&p, &cfg, &op, &y2, gamma).unwrap())
                .unwrap();
            let lhs = vecmath::dist2(&g1, &g2);
            let rhs = (l / gamma) * vecmath::dist2(&y1, &y2);
            assert!(lhs <= rhs * (1.0 + 1e-9), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn sandwich_with_surrogate_oracle() {
        // g_gamma(y) >= g(y) >= g_gamma(y) - gamma D, with g evaluated via a
        // gamma = 1e-10 surrogate solve
        let mut rng = CounterRng::new(47);
        let p = random_problem(&mut rng, 3, 5, 1.0);
        let op = p.operator();
        let l = crate::linop::spectral_norm_sq(&op, 1e-12, 10_000).unwrap();
        let cfg = SmootherConfig::bregman(vec![0.0; 5], l);
        let d = estimate_diameters(&p, &cfg).unwrap().d_x_s;
        let gamma = 0.7;
        for _ in 0..10 {
            let y: Vec<f64> = (0..3).map(|_| rng.next_gaussian()).collect();
            let g_smooth = smoothed_dual_value(&p, &cfg, &op, &y, gamma).unwrap();
            let g_exact = smoothed_dual_value(&p, &cfg, &op, &y, 1e-10).unwrap();
            assert!(g_smooth >= g_exact - 1e-6, "upper side of sandwich");
            assert!(g_exact >= g_smooth - gamma * d - 1e-6, "lower side");
        }
    }

    #[test]
    fn smoothed_gap_lower_bound_via_surrogate() {
        // G(x,y) >= f(x) - g(y) - gamma D for any feasible x
        let mut rng = CounterRng::new(53);
        let p = random_problem(&mut rng, 3, 5, 1.0);
        let op = p.operator();
        let l = crate::linop::spectral_norm_sq(&op, 1e-12, 10_000).unwrap();
        let cfg = SmootherConfig::bregman(vec![0.0; 5], l);
        let d = estimate_diameters(&p, &cfg).unwrap().d_x_s;
        let (gamma, beta) = (0.4, 0.9);
        for _ in 0..10 {
            let x: Vec<f64> = p.project(&(0..5).map(|_| rng.next_gaussian()).collect::<Vec<_>>());
            let y: Vec<f64> = (0..3).map(|_| rng.next_gaussian()).collect();
            let gap = smoothed_gap(&p, &cfg, &op, &x, &y, gamma, beta).unwrap();
            let g_exact = smoothed_dual_value(&p, &cfg, &op, &y, 1e-10).unwrap();
            let lower = p.func_eval(&x) - g_exact - gamma * d;
            assert!(gap >= lower - 1e-6, "gap {gap} < lower {lower}");
        }
    }

    #[test]
    fn diameters_analytic_cases() {
        // Box[-1,1]^n with center 0 -> n/2
        let n = 6;
        let p = ConstrainedProblem {
            blocks: vec![Block {
                f: FunctionSpec::zero(),
                set: FeasibleSet::uniform_box(n, -1.0, 1.0),
                a: DenseMat::identity(n),
            }],
            b: vec![0.0; n],
            sense: ConstraintSense::Equality,
            reference: None,
            meta: GenMeta::default(),
        };
        let cfg = SmootherConfig::bregman(vec![0.0; n], 1.0);
        let d = estimate_diameters(&p, &cfg).unwrap();
        assert_eq!(d.d_x_s, n as f64 / 2.0);
        assert_eq!(d.provenance_x, DiameterProvenance::Analytic);
        assert_eq!(d.provenance_y, DiameterProvenance::Unavailable);

        // Box[0,2] 1-D, center 0 -> 2
        let p = one_d(
            FunctionSpec::zero(),
            FeasibleSet::uniform_box(1, 0.0, 2.0),
            1.0,
            0.0,
        );
        let cfg = SmootherConfig::bregman(vec![0.0], 1.0);
        assert_eq!(estimate_diameters(&p, &cfg).unwrap().d_x_s, 2.0);

        // reference dual (3,4) -> D_Y* = 5
        let mut p = one_d(FunctionSpec::zero(), FeasibleSet::uniform_box(1, 0.0, 2.0), 1.0, 0.0);
        p.reference = Some(Reference {
            x_star: vec![0.0],
            y_star: vec![3.0, 4.0],
            f_star: 0.0,
            provenance: RefProvenance::Oracle,
        });
        let d = estimate_diameters(&p, &SmootherConfig::bregman(vec![0.0], 1.0)).unwrap();
        assert_eq!(d.d_y_star, 5.0);
        assert_eq!(d.provenance_y, DiameterProvenance::Reference);
    }

    #[test]
    fn diameters_unbounded_rejected_for_bregman() {
        let p = one_d(FunctionSpec::l1_uniform(1, 1.0), FeasibleSet::All, 1.0, 0.0);
        let cfg = SmootherConfig::bregman(vec![0.0], 1.0);
        assert!(matches!(
            estimate_diameters(&p, &cfg),
            Err(Error::UnboundedDomain(_))
        ));
        // AL smoother tolerates it (infinite D^A marked unavailable)
        let cfg = SmootherConfig::aug_lag(vec![0.0]);
        let d = estimate_diameters(&p, &cfg).unwrap();
        assert!(d.d_x_s.is_infinite());
        assert_eq!(d.provenance_x, DiameterProvenance::Unavailable);
    }

    #[test]
    fn diameter_interval_bound_dominates_samples() {
        // the S = A interval bound must over-estimate ||Ax-b||^2/2 on samples
        let mut rng = CounterRng::new(59);
        let p = random_problem(&mut rng, 3, 5, 1.2);
        let cfg = SmootherConfig::aug_lag(vec![0.0; 5]);
        let d = estimate_diameters(&p, &cfg).unwrap().d_x_s;
        for _ in 0..200 {
            let x = p.project(&(0..5).map(|_| 3.0 * rng.next_gaussian()).collect::<Vec<_>>());
            let r = p.residual(&x).unwrap();
            assert!(0.5 * vecmath::norm2_sq(&r) <= d * (1.0 + 1e-12));
        }
    }
}

//! Benchmark problem construction and small-instance reference oracles.
//!
//! All generators draw from the counter-based stream in [`crate::rng`] with a
//! fixed fill order (matrices row by row, then the signal, then group
//! shuffles), so an instance is a pure function of its seed and shape.

use crate::error::{Error, Result};
use crate::linop::{DenseMat, LinearMap};
use crate::prox::{self, FeasibleSet, FunctionKind, FunctionSpec};
use crate::rng::{inverse_normal_cdf, CounterRng};
use crate::vecmath;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintSense {
    Equality,
    Inequality,
}

/// Where a reference solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RefProvenance {
    /// Exact enumeration / closed form / certified KKT solve.
    Oracle,
    /// High-accuracy solver run; treat constants as close upper bounds.
    SelfSolve,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reference {
    pub x_star: Vec<f64>,
    /// A dual optimal point (minimum-norm when the oracle can certify it).
    pub y_star: Vec<f64>,
    pub f_star: f64,
    pub provenance: RefProvenance,
}

/// One separable block: a convex term, its feasible set, and its columns of A.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Block {
    pub f: FunctionSpec,
    pub set: FeasibleSet,
    #[serde(with = "serde_densemat")]
    pub a: DenseMat,
}

mod serde_densemat {
    use super::DenseMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Repr {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }

    pub fn serialize<S: Serializer>(m: &DenseMat, s: S) -> Result<S::Ok, S::Error> {
        Repr {
            rows: m.rows,
            cols: m.cols,
            data: m.data.clone(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DenseMat, D::Error> {
        let r = Repr::deserialize(d)?;
        Ok(DenseMat::new(r.rows, r.cols, r.data))
    }
}

/// Generator metadata carried with every synthetic instance.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GenMeta {
    pub family: String,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub sparsity: usize,
    pub noise: f64,
    pub notes: String,
}

/// min sum_i f_i(x_i)  s.t.  [A_1 ... A_p] x = b (or <= b),  x_i in X_i.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstrainedProblem {
    pub blocks: Vec<Block>,
    pub b: Vec<f64>,
    pub sense: ConstraintSense,
    pub reference: Option<Reference>,
    pub meta: GenMeta,
}

impl ConstrainedProblem {
    pub fn n(&self) -> usize {
        self.blocks.iter().map(|bl| bl.a.cols).sum()
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn operator(&self) -> LinearMap {
        if self.blocks.len() == 1 {
            LinearMap::Dense(self.blocks[0].a.clone())
        } else {
            LinearMap::hcat(self.blocks.iter().map(|bl| bl.a.clone()).collect())
        }
    }

    /// Column ranges of each block in the stacked variable.
    pub fn col_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut off = 0;
        for bl in &self.blocks {
            out.push(off..off + bl.a.cols);
            off += bl.a.cols;
        }
        out
    }

    /// f(x) + indicator of X, evaluated blockwise.
    pub fn func_eval(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for (bl, r) in self.blocks.iter().zip(self.col_ranges()) {
            let v = prox::func_eval(&bl.f, &bl.set, &x[r]);
            if v.is_infinite() {
                return f64::INFINITY;
            }
            total += v;
        }
        total
    }

    /// prox of the whole separable objective: concatenation of block proxes.
    pub fn prox_eval(&self, lambda: f64, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n()];
        for (bl, r) in self.blocks.iter().zip(self.col_ranges()) {
            let piece = prox::prox_eval(&bl.f, &bl.set, lambda, &v[r.clone()])?;
            out[r].copy_from_slice(&piece);
        }
        Ok(out)
    }

    /// Exact argmin of f(x) + v'x over X (needs sigma_f > 0 on every block).
    pub fn argmin_linear(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n()];
        for (bl, r) in self.blocks.iter().zip(self.col_ranges()) {
            let piece = prox::argmin_linear(&bl.f, &bl.set, &v[r.clone()])?;
            out[r].copy_from_slice(&piece);
        }
        Ok(out)
    }

    /// min over X of f(x) + v'x, None when unbounded (dual-gap oracle).
    pub fn linear_min(&self, v: &[f64]) -> Option<f64> {
        let mut total = 0.0;
        for (bl, r) in self.blocks.iter().zip(self.col_ranges()) {
            total += prox::linear_min(&bl.f, &bl.set, &v[r.clone()])?;
        }
        Some(total)
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (bl, r) in self.blocks.iter().zip(self.col_ranges()) {
            let piece = bl.set.project(&x[r.clone()]);
            out[r].copy_from_slice(&piece);
        }
        out
    }

    pub fn set_violation(&self, x: &[f64]) -> f64 {
        self.blocks
            .iter()
            .zip(self.col_ranges())
            .map(|(bl, r)| bl.set.violation(&x[r]))
            .fold(0.0, f64::max)
    }

    /// Strong-convexity constant of the whole objective: the minimum across
    /// blocks, which is 0 as soon as one block lacks curvature.
    pub fn sigma_f(&self) -> f64 {
        self.blocks
            .iter()
            .map(|bl| bl.f.sigma_f())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ax = crate::linop::apply(&self.operator(), x)?;
        Ok(vecmath::sub(&ax, &self.b))
    }
}

fn gaussian_mat(rng: &mut CounterRng, rows: usize, cols: usize) -> DenseMat {
    DenseMat::new(
        rows,
        cols,
        (0..rows * cols).map(|_| rng.next_gaussian()).collect(),
    )
}

/// Standard basis pursuit: min ||x||_1 s.t. Ax = b, with iid standard
/// Gaussian A and b = A x_nat for an s-sparse x_nat. An optional symmetric
/// box keeps the feasible set bounded (needed by diameter-based constants).
pub fn make_basis_pursuit(
    seed: u64,
    m: usize,
    n: usize,
    sparsity: usize,
    box_bound: Option<f64>,
) -> ConstrainedProblem {
    assert!(sparsity <= n && m < n);
    let mut rng = CounterRng::new(seed);
    let a = gaussian_mat(&mut rng, m, n);
    let x_nat = sparse_signal(&mut rng, n, sparsity);
    let mut b = vec![0.0; m];
    a.apply(&x_nat, &mut b);
    let set = match box_bound {
        None => FeasibleSet::All,
        Some(r) => FeasibleSet::uniform_box(n, -r, r),
    };
    ConstrainedProblem {
        blocks: vec![Block {
            f: FunctionSpec::l1_uniform(n, 1.0),
            set,
            a,
        }],
        b,
        sense: ConstraintSense::Equality,
        reference: None,
        meta: GenMeta {
            family: "basis-pursuit".into(),
            seed,
            m,
            n,
            sparsity,
            noise: 0.0,
            notes: String::new(),
        },
    }
}

/// The planted signal of a generator, regenerated from the seed with the
/// same stream positions the generator used.
pub fn planted_bp_signal(seed: u64, m: usize, n: usize, sparsity: usize) -> Vec<f64> {
    let mut rng = CounterRng::new(seed);
    let _a = gaussian_mat(&mut rng, m, n);
    sparse_signal(&mut rng, n, sparsity)
}

fn sparse_signal(rng: &mut CounterRng, n: usize, sparsity: usize) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut idx);
    let mut x = vec![0.0; n];
    for &i in idx.iter().take(sparsity) {
        x[i] = rng.next_gaussian();
    }
    x
}

/// Non-overlapping sparse-group basis pursuit:
/// min sum_g w_g ||x_g||_2 s.t. Ax = b, x in [l, u]^n with scalar bounds
/// l = min(x_nat), u = max(x_nat). The random partition splits a shuffled
/// index list into n_g nearly equal contiguous chunks; weights are 1.
pub fn make_group_bp(
    seed: u64,
    m: usize,
    n: usize,
    n_g: usize,
    with_box: bool,
) -> ConstrainedProblem {
    let (p, _x_nat) = make_group_bp_with_signal(seed, m, n, n_g, with_box);
    p
}

/// Same as [`make_group_bp`], also returning the planted group-sparse signal.
pub fn make_group_bp_with_signal(
    seed: u64,
    m: usize,
    n: usize,
    n_g: usize,
    with_box: bool,
) -> (ConstrainedProblem, Vec<f64>) {
    assert!(n_g >= 1 && n_g <= n && m < n);
    let mut rng = CounterRng::new(seed);
    let a = gaussian_mat(&mut rng, m, n);

    let mut idx: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut idx);
    let mut groups: Vec<Vec<usize>> = Vec::with_capacity(n_g);
    let base = n / n_g;
    let extra = n % n_g;
    let mut off = 0;
    for g in 0..n_g {
        let len = base + usize::from(g < extra);
        groups.push(idx[off..off + len].to_vec());
        off += len;
    }

    // group-sparse signal: a few active groups, Gaussian entries
    let active = (n_g / 8).max(1);
    let mut gi: Vec<usize> = (0..n_g).collect();
    rng.shuffle(&mut gi);
    let mut x_nat = vec![0.0; n];
    for &g in gi.iter().take(active) {
        for &i in &groups[g] {
            x_nat[i] = rng.next_gaussian();
        }
    }
    let mut b = vec![0.0; m];
    a.apply(&x_nat, &mut b);

    let set = if with_box {
        let l = x_nat.iter().cloned().fold(f64::INFINITY, f64::min);
        let u = x_nat.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(l <= 0.0 && u >= 0.0, "signal box must contain the origin");
        FeasibleSet::uniform_box(n, l, u)
    } else {
        FeasibleSet::All
    };

    let p = ConstrainedProblem {
        blocks: vec![Block {
            f: FunctionSpec::new(FunctionKind::GroupL2 {
                groups,
                weights: vec![1.0; n_g],
            }),
            set,
            a,
        }],
        b,
        sense: ConstraintSense::Equality,
        reference: None,
        meta: GenMeta {
            family: "group-basis-pursuit".into(),
            seed,
            m,
            n,
            sparsity: active,
            noise: 0.0,
            notes: "weights 1; scalar box from signal range".into(),
        },
    };
    (p, x_nat)
}

/// Elastic net: min ||x||_1 + (sigma/2)||x||_2^2 s.t. Ax = b.
pub fn make_elastic_net(
    seed: u64,
    m: usize,
    n: usize,
    sparsity: usize,
    sigma: f64,
) -> ConstrainedProblem {
    let mut bp = make_basis_pursuit(seed, m, n, sparsity, None);
    if sigma > 0.0 {
        let f = prox::strongly_convexify(&bp.blocks[0].f, sigma, &vec![0.0; n]);
        bp.blocks[0].f = f;
    }
    bp.meta.family = "elastic-net".into();
    bp.meta.notes = format!("sigma={sigma}");
    bp
}

/// Square-root LASSO in slack form:
/// min lambda ||x||_1 + ||r||_2 s.t. Ax - r = b, two blocks ([A | -I]).
/// Default lambda = c * PhiInv(1 - 0.5 alpha / n) with c = 1.1, alpha = 0.05.
pub fn make_sqrt_lasso(
    seed: u64,
    m: usize,
    n: usize,
    sparsity: usize,
    lambda: Option<f64>,
    noise_sd: f64,
) -> ConstrainedProblem {
    let mut rng = CounterRng::new(seed);
    let a = gaussian_mat(&mut rng, m, n);
    let x_nat = sparse_signal(&mut rng, n, sparsity);
    let mut b = vec![0.0; m];
    a.apply(&x_nat, &mut b);
    for v in b.iter_mut() {
        *v += noise_sd * rng.next_gaussian();
    }
    let lam = lambda.unwrap_or_else(|| sqrt_lasso_lambda(n, 1.1, 0.05));
    ConstrainedProblem {
        blocks: vec![
            Block {
                f: FunctionSpec::l1_uniform(n, lam),
                set: FeasibleSet::All,
                a,
            },
            Block {
                f: FunctionSpec::new(FunctionKind::L2Norm { weight: 1.0 }),
                set: FeasibleSet::All,
                a: DenseMat::scaled_identity(m, -1.0),
            },
        ],
        b,
        sense: ConstraintSense::Equality,
        reference: None,
        meta: GenMeta {
            family: "sqrt-lasso".into(),
            seed,
            m,
            n,
            sparsity,
            noise: noise_sd,
            notes: format!("lambda={lam}"),
        },
    }
}

/// The standard square-root LASSO regularization level.
pub fn sqrt_lasso_lambda(n: usize, c: f64, alpha: f64) -> f64 {
    c * inverse_normal_cdf(1.0 - 0.5 * alpha / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SvmRegularizer {
    L2(f64),
    L1(f64),
}

/// Binary linear SVM with hinge loss, in slack form:
/// min sum_j max(0, 1 - y_j r_j) + g(x)  s.t.  W x - r = b.
pub fn make_svm_hinge(
    w: DenseMat,
    b_vec: Vec<f64>,
    y_labels: Vec<f64>,
    reg: SvmRegularizer,
) -> ConstrainedProblem {
    let (m, n) = (w.rows, w.cols);
    assert_eq!(b_vec.len(), m);
    assert_eq!(y_labels.len(), m);
    assert!(y_labels.iter().all(|&y| y == 1.0 || y == -1.0));
    let g = match reg {
        SvmRegularizer::L2(lam) => FunctionSpec::new(FunctionKind::SquaredL2 {
            coeff: lam,
            center: vec![0.0; n],
        }),
        SvmRegularizer::L1(lam) => FunctionSpec::l1_uniform(n, lam),
    };
    ConstrainedProblem {
        blocks: vec![
            Block {
                f: g,
                set: FeasibleSet::All,
                a: w,
            },
            Block {
                f: FunctionSpec::new(FunctionKind::HingeSum { labels: y_labels }),
                set: FeasibleSet::All,
                a: DenseMat::scaled_identity(m, -1.0),
            },
        ],
        b: b_vec,
        sense: ConstraintSense::Equality,
        reference: None,
        meta: GenMeta {
            family: "svm-hinge".into(),
            seed: 0,
            m,
            n,
            sparsity: 0,
            noise: 0.0,
            notes: String::new(),
        },
    }
}

/// Classification accuracy of weights x on (W, b, y). The predicted label is
/// the sign of w_j'x - b_j, with ties (score exactly 0) predicted as +1.
pub fn classification_accuracy(w: &DenseMat, b: &[f64], y: &[f64], x: &[f64]) -> f64 {
    let mut scores = vec![0.0; w.rows];
    w.apply(x, &mut scores);
    let mut correct = 0usize;
    for ((s, bj), yj) in scores.iter().zip(b).zip(y) {
        let pred = if s - bj >= 0.0 { 1.0 } else { -1.0 };
        if pred == *yj {
            correct += 1;
        }
    }
    correct as f64 / w.rows as f64
}

// ---------------------------------------------------------------------------
// Reference oracles
// ---------------------------------------------------------------------------

/// Maximum columns for the LP vertex-enumeration oracle.
const LP_ORACLE_MAX_N: usize = 12;

/// Exact reference for small basis pursuit via vertex enumeration of the
/// standard-form LP (x = p - q), plus the minimum-norm dual from a
/// least-squares solve on the optimal support.
pub fn reference_solve_bp_lp(a: &DenseMat, b: &[f64]) -> Result<Reference> {
    let (m, n) = (a.rows, a.cols);
    if n > LP_ORACLE_MAX_N {
        return Err(Error::OracleSize(format!(
            "vertex enumeration limited to n <= {LP_ORACLE_MAX_N}, got {n}"
        )));
    }
    // standard form: [A, -A] z = b, z >= 0, min 1'z
    let cols = 2 * n;
    let am = a.to_nalgebra();
    let full = {
        let mut f = DMatrix::zeros(m, cols);
        f.view_mut((0, 0), (m, n)).copy_from(&am);
        f.view_mut((0, n), (m, n)).copy_from(&(-am.clone()));
        f
    };
    let bv = DVector::from_column_slice(b);
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        // basic solution for this column choice
        let basis = full.select_columns(combo.iter());
        if let Some(sol) = basis.clone().lu().solve(&bv) {
            let residual = (&basis * &sol - &bv).norm();
            if residual <= 1e-8 * (1.0 + bv.norm()) && sol.iter().all(|&z| z >= -1e-9) {
                let obj: f64 = sol.iter().map(|z| z.max(0.0)).sum();
                let better = best.as_ref().map_or(true, |(f, _)| obj < f - 1e-12);
                if better {
                    let mut x = vec![0.0; n];
                    for (pos, &col) in combo.iter().enumerate() {
                        let v = sol[pos].max(0.0);
                        if col < n {
                            x[col] += v;
                        } else {
                            x[col - n] -= v;
                        }
                    }
                    best = Some((obj, x));
                }
            }
        }
        if !next_combination(&mut combo, cols) {
            break;
        }
    }
    let (f_star, x_star) =
        best.ok_or_else(|| Error::OracleSize("no basic feasible solution found".into()))?;
    let y_star = min_norm_dual_l1(a, &x_star, &vec![1.0; n])?;
    Ok(Reference {
        x_star,
        y_star,
        f_star,
        provenance: RefProvenance::Oracle,
    })
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    if k == 0 || k > n {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Minimum-norm dual for a weighted-L1 problem given the primal solution:
/// least squares of A_S' y = -w_S sign(x_S), verified against the off-support
/// condition |(A'y)_i| <= w_i.
pub fn min_norm_dual_l1(a: &DenseMat, x_star: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    let support: Vec<usize> = x_star
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > 1e-9)
        .map(|(i, _)| i)
        .collect();
    let am = a.to_nalgebra();
    let y = if support.is_empty() {
        DVector::zeros(a.rows)
    } else {
        let a_s = am.select_columns(support.iter());
        let rhs = DVector::from_iterator(
            support.len(),
            support.iter().map(|&i| -weights[i] * x_star[i].signum()),
        );
        // min-norm solution of A_S' y = rhs
        a_s.transpose()
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::OracleSize(format!("dual least-squares failed: {e}")))?
    };
    // dual feasibility check
    let aty = am.transpose() * &y;
    for (i, &w) in weights.iter().enumerate() {
        if aty[i].abs() > w + 1e-7 {
            return Err(Error::OracleSize(format!(
                "least-squares dual violates |A'y| <= w at {i}: {} > {w}",
                aty[i].abs()
            )));
        }
    }
    Ok(y.iter().cloned().collect())
}

/// Certify that the planted signal solves a basis-pursuit instance exactly.
///
/// Checks the strict recovery conditions: A_S injective, A_S' y = -sign on
/// the support (least-squares dual), and |A' y| < 1 - margin off the support.
/// When they hold the planted x_nat is the unique optimum, so f* = ||x_nat||_1
/// and the least-squares dual is the minimum-norm dual solution.
pub fn certify_bp_recovery(a: &DenseMat, x_nat: &[f64], margin: f64) -> Result<Reference> {
    let n = a.cols;
    let weights = vec![1.0; n];
    let y = min_norm_dual_l1(a, x_nat, &weights)?;
    let am = a.to_nalgebra();
    let aty = am.transpose() * DVector::from_column_slice(&y);
    for i in 0..n {
        if x_nat[i].abs() <= 1e-9 && aty[i].abs() >= 1.0 - margin {
            return Err(Error::OracleSize(format!(
                "recovery certificate failed off support at {i}: |A'y| = {}",
                aty[i].abs()
            )));
        }
        if x_nat[i].abs() > 1e-9 && (aty[i] + x_nat[i].signum()).abs() > 1e-7 {
            return Err(Error::OracleSize(format!(
                "recovery certificate failed on support at {i}"
            )));
        }
    }
    // injectivity of A_S
    let support: Vec<usize> = (0..n).filter(|&i| x_nat[i].abs() > 1e-9).collect();
    if !support.is_empty() {
        let a_s = am.select_columns(support.iter());
        let min_sv = a_s
            .svd(false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_sv <= 1e-8 {
            return Err(Error::OracleSize("support columns not injective".into()));
        }
    }
    Ok(Reference {
        x_star: x_nat.to_vec(),
        y_star: y,
        f_star: x_nat.iter().map(|v| v.abs()).sum(),
        provenance: RefProvenance::Oracle,
    })
}

/// Same certificate for group basis pursuit: A_g' y = -w_g x_g/||x_g|| on
/// active groups, ||A_g' y|| < w_g - margin on inactive ones. Valid with or
/// without a box containing the signal (the box only enlarges the normal
/// cone at the optimum).
pub fn certify_group_bp_recovery(
    a: &DenseMat,
    groups: &[Vec<usize>],
    weights: &[f64],
    x_nat: &[f64],
    margin: f64,
) -> Result<Reference> {
    let am = a.to_nalgebra();
    let active: Vec<usize> = (0..groups.len())
        .filter(|&g| groups[g].iter().any(|&i| x_nat[i].abs() > 1e-9))
        .collect();
    // stack the active-group equality conditions
    let rows: Vec<usize> = active.iter().flat_map(|&g| groups[g].clone()).collect();
    let y = if rows.is_empty() {
        DVector::zeros(a.rows)
    } else {
        let a_s = am.select_columns(rows.iter());
        let mut rhs = Vec::with_capacity(rows.len());
        for &g in &active {
            let nrm = groups[g]
                .iter()
                .map(|&i| x_nat[i] * x_nat[i])
                .sum::<f64>()
                .sqrt();
            for &i in &groups[g] {
                rhs.push(-weights[g] * x_nat[i] / nrm);
            }
        }
        a_s.transpose()
            .svd(true, true)
            .solve(&DVector::from_column_slice(&rhs), 1e-12)
            .map_err(|e| Error::OracleSize(format!("dual least-squares failed: {e}")))?
    };
    let aty = am.transpose() * &y;
    for (g, grp) in groups.iter().enumerate() {
        let gy: f64 = grp.iter().map(|&i| aty[i] * aty[i]).sum::<f64>().sqrt();
        let is_active = active.contains(&g);
        if !is_active && gy >= weights[g] - margin {
            return Err(Error::OracleSize(format!(
                "group recovery certificate failed on inactive group {g}: ||A_g'y|| = {gy}"
            )));
        }
    }
    let f_star: f64 = groups
        .iter()
        .zip(weights)
        .map(|(grp, w)| {
            w * grp
                .iter()
                .map(|&i| x_nat[i] * x_nat[i])
                .sum::<f64>()
                .sqrt()
        })
        .sum();
    Ok(Reference {
        x_star: x_nat.to_vec(),
        y_star: y.iter().cloned().collect(),
        f_star,
        provenance: RefProvenance::Oracle,
    })
}

/// Exact reference for the equality-constrained elastic net
/// min ||x||_1 + (sigma/2)||x||^2 s.t. Ax = b, via semismooth Newton on the
/// dual: x(y) = (1/sigma) soft(-A'y, 1), solve A x(y) = b.
pub fn reference_solve_elastic_net(a: &DenseMat, b: &[f64], sigma: f64) -> Result<Reference> {
    assert!(sigma > 0.0);
    let (m, n) = (a.rows, a.cols);
    let am = a.to_nalgebra();
    let bv = DVector::from_column_slice(b);
    let mut y = DVector::zeros(m);
    let x_of = |y: &DVector<f64>| -> DVector<f64> {
        let aty = am.transpose() * y;
        DVector::from_iterator(n, aty.iter().map(|&v| prox::soft_threshold(-v, 1.0) / sigma))
    };
    // dual value; concave and continuously differentiable with gradient
    // A x(y) - b, so Newton-ascent with an Armijo search cannot stall
    let g_of = |y: &DVector<f64>| -> f64 {
        let x = x_of(y);
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        l1 + 0.5 * sigma * x.norm_squared() + y.dot(&(&am * &x - &bv))
    };
    let mut converged = false;
    for _ in 0..500 {
        let x = x_of(&y);
        let f = &am * &x - &bv;
        if f.norm() <= 1e-12 * (1.0 + bv.norm()) {
            converged = true;
            break;
        }
        let aty = am.transpose() * &y;
        let active: Vec<usize> = (0..n).filter(|&i| aty[i].abs() > 1.0).collect();
        // generalized Hessian of -g is (1/sigma) A_S A_S'; ridge keeps it
        // positive definite so the Newton direction is always ascent for g
        let mut jac = DMatrix::zeros(m, m);
        for &i in &active {
            let col = am.column(i);
            for r in 0..m {
                for c in 0..m {
                    jac[(r, c)] += col[r] * col[c] / sigma;
                }
            }
        }
        let ridge = 1e-10 * (1.0 + jac.diagonal().amax());
        for d in 0..m {
            jac[(d, d)] += ridge;
        }
        let step = jac
            .lu()
            .solve(&f)
            .ok_or_else(|| Error::OracleSize("singular Newton system".into()))?;
        let slope = step.dot(&f); // > 0 by positive definiteness
        let g0 = g_of(&y);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..200 {
            let y_try = &y + t * &step;
            if g_of(&y_try) >= g0 + 1e-4 * t * slope {
                y = y_try;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::OracleSize("Newton line search stalled".into()));
        }
    }
    if !converged {
        let x = x_of(&y);
        let f = (&am * &x - &bv).norm();
        if f > 1e-10 * (1.0 + bv.norm()) {
            return Err(Error::OracleSize(format!(
                "elastic-net Newton did not converge: residual {f}"
            )));
        }
    }
    let x = x_of(&y);
    // shrink to the minimum-norm dual when the least-squares candidate stays
    // feasible off the support
    let support: Vec<usize> = (0..n).filter(|&i| x[i].abs() > 1e-9).collect();
    let y_min = if support.is_empty() {
        y.clone()
    } else {
        let a_s = am.select_columns(support.iter());
        let rhs = DVector::from_iterator(
            support.len(),
            support.iter().map(|&i| -x[i].signum() - sigma * x[i]),
        );
        match a_s.transpose().svd(true, true).solve(&rhs, 1e-12) {
            Ok(cand) => {
                let aty = am.transpose() * &cand;
                let ok = (0..n)
                    .filter(|i| !support.contains(i))
                    .all(|i| aty[i].abs() <= 1.0 + 1e-8);
                if ok {
                    cand
                } else {
                    y.clone()
                }
            }
            Err(_) => y.clone(),
        }
    };
    let f_star = x.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * sigma * x.norm_squared();
    // KKT residual assertions
    let feas = (&am * &x - &bv).norm();
    assert!(
        feas <= 1e-8 * (1.0 + bv.norm()),
        "oracle feasibility {feas}"
    );
    let aty = am.transpose() * &y_min;
    for i in 0..n {
        let g = sigma * x[i] + aty[i];
        let kkt = if x[i].abs() > 1e-9 {
            (g + x[i].signum()).abs()
        } else {
            (g.abs() - 1.0).max(0.0)
        };
        assert!(kkt <= 1e-6, "oracle KKT residual {kkt} at {i}");
    }
    Ok(Reference {
        x_star: x.iter().cloned().collect(),
        y_star: y_min.iter().cloned().collect(),
        f_star,
        provenance: RefProvenance::Oracle,
    })
}

/// KKT solve for an equality-constrained strongly convex QP
/// min (sigma/2)||x - c||^2 s.t. Ax = b (used by ADMM reduction tests).
pub fn solve_eq_qp(a: &DenseMat, b: &[f64], sigma: f64, center: &[f64]) -> Result<Reference> {
    let (m, n) = (a.rows, a.cols);
    let am = a.to_nalgebra();
    // [ sigma I  A' ] [x]   [sigma c]
    // [ A        0  ] [y] = [b      ]
    let mut kkt = DMatrix::zeros(n + m, n + m);
    for i in 0..n {
        kkt[(i, i)] = sigma;
    }
    kkt.view_mut((0, n), (n, m)).copy_from(&am.transpose());
    kkt.view_mut((n, 0), (m, n)).copy_from(&am);
    let mut rhs = DVector::zeros(n + m);
    for i in 0..n {
        rhs[i] = sigma * center[i];
    }
    for j in 0..m {
        rhs[n + j] = b[j];
    }
    let sol = kkt
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .map_err(|e| Error::OracleSize(format!("KKT solve failed: {e}")))?;
    let x: Vec<f64> = sol.iter().take(n).cloned().collect();
    let y: Vec<f64> = sol.iter().skip(n).cloned().collect();
    let f_star = 0.5
        * sigma
        * x.iter()
            .zip(center)
            .map(|(v, c)| (v - c) * (v - c))
            .sum::<f64>();
    Ok(Reference {
        x_star: x,
        y_star: y,
        f_star,
        provenance: RefProvenance::Oracle,
    })
}

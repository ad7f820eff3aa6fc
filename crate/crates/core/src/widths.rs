//! Kolmogorov N-width estimation for finite snapshot sets.
//!
//! Three kinds of bounds are produced:
//!
//! * exact values and pigeonhole bounds for orthonormal sets,
//! * the packing bound `1 / (4 sqrt(N))` for the whole wave manifold,
//!   obtained from orthonormal hat functions, rescaling and halving,
//! * numerical two-sided bounds for an arbitrary Gram matrix: a spectral
//!   dual certificate from below and the worst residual of an explicit
//!   witness subspace from above.
//!
//! For fixed snapshot weights `w` the best N-dimensional subspace for the
//! weighted mean-square error is the weighted POD space and its error is
//! the eigenvalue tail of `D^{1/2} G D^{1/2}`, `D = diag(w)`. Since the
//! worst case dominates every weighted mean, the square root of that tail
//! bounds the width from below for every `w`. [`minimax_width`] ascends
//! over `w` with multiplicative weights; the weighted POD responses and a
//! smoothed worst-case descent supply witness subspaces for the upper
//! bound.

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::geometry::{
    assemble_gram, g_orthonormalize, residuals_squared, sup_residual, symmetric_eig, GramMatrix,
    Subspace,
};
use crate::manifold::{Combination, HatFunction, WaveSnapshot};

/// Slack used when comparing bounds that should be ordered.
pub const BOUND_SLACK: f64 = 1e-9;

/// Settings for [`minimax_width`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimaxConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub weight_learning_rate: f64,
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for MinimaxConfig {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_iterations: 500,
            weight_learning_rate: 1.0,
            convergence_tol: 1e-8,
            seed: 42,
        }
    }
}

impl MinimaxConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if !(self.weight_learning_rate > 0.0 && self.weight_learning_rate <= 10.0) {
            return Err(Error::InvalidConfig(
                "learning rate must lie in (0, 10]".into(),
            ));
        }
        if self.convergence_tol.is_nan() || self.convergence_tol <= 0.0 {
            return Err(Error::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Two-sided estimate of `d_N` for one snapshot set.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub n: usize,
    /// Analytic packing bound, filled in by callers for which it applies.
    pub lower_packing: Option<f64>,
    pub lower_dual: f64,
    pub upper: f64,
    /// Subspace attaining `upper`. May have fewer than `n` columns when the
    /// snapshot span is exhausted earlier.
    pub upper_witness: Subspace,
    /// Weights certifying `lower_dual`.
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl WidthEstimate {
    pub fn best_lower(&self) -> f64 {
        self.lower_packing.unwrap_or(0.0).max(self.lower_dual)
    }
}

/// `sqrt((k-1)/k)`: the width of any orthonormal set of `k N` elements.
pub fn exact_width_orthonormal(k: usize, n: usize) -> Result<f64> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("k and N must be positive".into()));
    }
    Ok(((k - 1) as f64 / k as f64).sqrt())
}

/// Result of the pigeonhole argument for `size` orthonormal elements.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PigeonholeBound {
    pub value: f64,
    /// Set when `size <= n`, where the bound is vacuous.
    pub degenerate: bool,
}

/// Every N-dimensional subspace misses some element of an orthonormal set
/// of `size` elements by at least `sqrt(1 - n / size)`: the captured
/// energies `Σ_j (d_j)_k²` add up to `n`, so one of them is at most
/// `n / size`.
pub fn pigeonhole_lower_bound(size: usize, n: usize) -> PigeonholeBound {
    if size <= n || size == 0 {
        PigeonholeBound {
            value: 0.0,
            degenerate: true,
        }
    } else {
        PigeonholeBound {
            value: (1.0 - n as f64 / size as f64).sqrt(),
            degenerate: false,
        }
    }
}

/// Block-averaging subspace `d_j = (e_{k(j-1)+1} + ... + e_{kj}) / sqrt(k)`
/// in the identity-Gram space of dimension `k n`.
pub fn fold_pairing_subspace(k: usize, n: usize) -> Result<Subspace> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("k and N must be positive".into()));
    }
    let amp = 1.0 / (k as f64).sqrt();
    let coeffs = DMatrix::from_fn(k * n, n, |r, c| if r / k == c { amp } else { 0.0 });
    Subspace::new(coeffs, &GramMatrix::identity(k * n))
}

/// The pairing directions `(e_{2j-1} + e_{2j}) / sqrt(2)` in dimension `2n`.
pub fn pairing_subspace(n: usize) -> Result<Subspace> {
    fold_pairing_subspace(2, n)
}

/// Steps of the packing argument for a given `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PackingChain {
    pub n: usize,
    /// `max |Gram(sqrt(2N) psi_{2N,m}) - I|`.
    pub gram_deviation: f64,
    /// Worst residual of the orthonormal hats against the pairing subspace.
    pub pairing_residual: f64,
    pub pigeonhole: f64,
    /// Width of the orthonormal hats, `1/sqrt(2)`.
    pub orthonormal_width: f64,
    /// Width of the unscaled hats.
    pub hat_width: f64,
    /// Half the hat width, bounding the manifold width from below.
    pub bound: f64,
    pub verified: bool,
}

/// Builds the orthonormal hats for `M = 2N`, confirms their width, rescales
/// to the unscaled hats and halves to reach the manifold.
pub fn packing_chain(n: usize) -> Result<PackingChain> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let m = 2 * n;
    let hats = (1..=m)
        .map(|i| HatFunction::new(m, i).map(|h| h.orthonormal()))
        .collect::<Result<Vec<_>>>()?;
    let gram = assemble_gram(&hats)?;
    let gram_deviation = (gram.matrix() - DMatrix::<f64>::identity(m, m)).amax();
    let pairing = Subspace::new(pairing_subspace(n)?.coeffs().clone(), &gram)?;
    let (pairing_residual, _) = sup_residual(&gram, &pairing)?;
    let pigeonhole = pigeonhole_lower_bound(m, n).value;
    let orthonormal_width = exact_width_orthonormal(2, n)?;
    // Widths scale linearly with the set, and psi = psi_tilde / sqrt(2N).
    let hat_width = orthonormal_width / (m as f64).sqrt();
    // A difference of two manifold elements can be approximated to within
    // the sum of their errors.
    let bound = 0.5 * hat_width;
    let verified = gram_deviation <= 1e-12
        && (pairing_residual - orthonormal_width).abs() <= 1e-12
        && (pigeonhole - orthonormal_width).abs() <= 1e-12
        && (bound - 0.25 / (n as f64).sqrt()).abs() <= 1e-14;
    Ok(PackingChain {
        n,
        gram_deviation,
        pairing_residual,
        pigeonhole,
        orthonormal_width,
        hat_width,
        bound,
        verified,
    })
}

/// `d_N(M) >= 1 / (4 sqrt(N))` for the wave manifold, via [`packing_chain`].
pub fn packing_lower_bound(n: usize) -> Result<f64> {
    let chain = packing_chain(n)?;
    debug_assert!(chain.verified, "packing chain failed for N = {n}");
    Ok(chain.bound)
}

fn rounding_allowance(size: usize, n: usize, frobenius: f64) -> f64 {
    size.saturating_sub(n) as f64 * 4.0 * size as f64 * f64::EPSILON * frobenius
}

/// `sqrt(Σ_{j>N} λ_j(D^{1/2} G D^{1/2}))` for probability weights `w`, less
/// a floating-point allowance for the eigensolver.
pub fn dual_lower_bound(gram: &GramMatrix, n: usize, weights: &[f64]) -> Result<f64> {
    let s = gram.size();
    if weights.len() != s {
        return Err(Error::InvalidWeights(format!(
            "expected {s} weights, got {}",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidWeights(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidWeights(format!(
            "weights sum to {total}, not 1"
        )));
    }
    if n >= s {
        return Ok(0.0);
    }
    let root: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let mut k = DMatrix::from_fn(s, s, |i, j| root[i] * gram.entry(i, j) * root[j]);
    k = (&k + k.transpose()) * 0.5;
    let eig = symmetric_eig(&k)?;
    let tail = eig.tail(n) - rounding_allowance(s, n, k.norm());
    Ok(tail.max(0.0).sqrt())
}

pub fn uniform_weights(size: usize) -> Vec<f64> {
    vec![1.0 / size as f64; size]
}

/// Whitened coordinates of the snapshots: column `k` of `y` is the image of
/// `x_k` under an isometry of the numerical span onto `R^r`, scaled so the
/// largest snapshot has unit norm.
struct Whitened {
    y: DMatrix<f64>,
    norms2: Vec<f64>,
    basis: DMatrix<f64>,
    scale: f64,
}

impl Whitened {
    fn new(gram: &GramMatrix) -> Result<Self> {
        let eig = gram.eig()?;
        let r = eig.numerical_rank();
        let s = gram.size();
        let scale = gram.norms_squared().into_iter().fold(0.0, f64::max);
        let root_scale = scale.sqrt().max(f64::MIN_POSITIVE);
        let y = DMatrix::from_fn(r, s, |i, k| {
            eig.eigenvalues[i].sqrt() * eig.eigenvectors[(k, i)] / root_scale
        });
        let norms2 = y.column_iter().map(|c| c.norm_squared()).collect();
        // b = Q Λ^{-1/2} u maps whitened coordinates back to snapshot ones.
        let basis = DMatrix::from_fn(s, r, |k, i| {
            eig.eigenvectors[(k, i)] / eig.eigenvalues[i].sqrt()
        });
        Ok(Self {
            y,
            norms2,
            basis,
            scale,
        })
    }

    fn rank(&self) -> usize {
        self.y.nrows()
    }

    fn residuals2(&self, u: &DMatrix<f64>) -> Vec<f64> {
        let proj = u.tr_mul(&self.y);
        proj.column_iter()
            .zip(&self.norms2)
            .map(|(c, n2)| (n2 - c.norm_squared()).max(0.0))
            .collect()
    }

    fn weighted_covariance(&self, w: &[f64]) -> DMatrix<f64> {
        let mut yw = self.y.clone();
        for (mut col, &wk) in yw.column_iter_mut().zip(w) {
            col *= wk;
        }
        let c = yw * self.y.transpose();
        (&c + c.transpose()) * 0.5
    }

    fn to_subspace(&self, u: &DMatrix<f64>, gram: &GramMatrix) -> Result<Subspace> {
        let b = &self.basis * u;
        Subspace::new(g_orthonormalize(&b, gram)?, gram)
    }
}

struct RestartOutcome {
    witness: Subspace,
    upper: f64,
    weights: Vec<f64>,
    iterations: usize,
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Eigen-decomposition of a slowly drifting symmetric matrix. Each call
/// rotates the matrix into the previous eigenbasis first, so the Jacobi
/// sweeps start from a nearly diagonal matrix.
struct WarmEigen {
    basis: Option<DMatrix<f64>>,
}

impl WarmEigen {
    fn new() -> Self {
        Self { basis: None }
    }

    fn top(&mut self, matrix: &DMatrix<f64>, n: usize) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let rotated = match &self.basis {
            Some(v) => {
                let m = v.tr_mul(&(matrix * v));
                (&m + m.transpose()) * 0.5
            }
            None => matrix.clone(),
        };
        let eig = symmetric_eig(&rotated)?;
        let vectors = match &self.basis {
            Some(v) => v * &eig.eigenvectors,
            None => eig.eigenvectors,
        };
        let top = vectors.columns(0, n).into_owned();
        self.basis = Some(vectors);
        Ok((top, eig.eigenvalues))
    }
}

fn orthonormal_columns(m: DMatrix<f64>) -> DMatrix<f64> {
    m.qr().q()
}

/// Smoothed worst-case descent on the Stiefel manifold.
///
/// Minimizes `(1/β) log Σ_k exp(β r_k²(U))` for an increasing sequence of
/// `β`, with Armijo backtracking and QR retraction. Returns the iterate with
/// the smallest true worst residual seen.
fn refine(white: &Whitened, start: DMatrix<f64>, max_steps: usize) -> (DMatrix<f64>, f64, usize) {
    const BETAS: [f64; 13] = [
        10.0, 30.0, 100.0, 300.0, 1e3, 3e3, 1e4, 3e4, 1e5, 3e5, 1e6, 3e6, 1e7,
    ];
    let mut u = start;
    let mut r2 = white.residuals2(&u);
    let mut best = (u.clone(), max_of(&r2));
    let mut steps = 0;
    let smoothed = |r2: &[f64], beta: f64| {
        let m = max_of(r2);
        m + r2.iter().map(|v| (beta * (v - m)).exp()).sum::<f64>().ln() / beta
    };
    for &beta in &BETAS {
        let mut eta = 1.0;
        let mut f = smoothed(&r2, beta);
        for _ in 0..max_steps {
            let m = max_of(&r2);
            let mut w: Vec<f64> = r2.iter().map(|v| (beta * (v - m)).exp()).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x /= total);
            // C_w U with C_w = Y diag(w) Yᵀ, projected onto the tangent space.
            let mut proj = u.tr_mul(&white.y);
            for (mut col, &wk) in proj.column_iter_mut().zip(&w) {
                col *= wk;
            }
            let cu = &white.y * proj.transpose();
            let g = &cu - &u * u.tr_mul(&cu);
            let g2 = g.norm_squared();
            if g2 < 1e-28 {
                break;
            }
            let mut accepted = None;
            while eta > 1e-16 {
                let cand = orthonormal_columns(&u + &g * eta);
                let cand_r2 = white.residuals2(&cand);
                let cand_f = smoothed(&cand_r2, beta);
                if cand_f <= f - 1e-4 * eta * g2 {
                    accepted = Some((cand, cand_r2, cand_f));
                    break;
                }
                eta *= 0.5;
            }
            steps += 1;
            let Some((cand, cand_r2, cand_f)) = accepted else {
                break;
            };
            u = cand;
            r2 = cand_r2;
            f = cand_f;
            eta = (eta * 2.0).min(1e3);
            let worst = max_of(&r2);
            if worst < best.1 {
                best = (u.clone(), worst);
            }
        }
    }
    (best.0, best.1, steps)
}

fn run_restart(
    gram: &GramMatrix,
    white: &Whitened,
    n: usize,
    cfg: &MinimaxConfig,
    restart: usize,
) -> Result<RestartOutcome> {
    let s = gram.size();
    let r = white.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(restart as u64);

    let mut w = uniform_weights(s);
    if restart > 0 {
        for wk in &mut w {
            *wk = rng.random_range(-1.0..1.0_f64).exp();
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
    }

    let mut best_u: Option<(DMatrix<f64>, f64)> = None;
    let mut best_dual = (f64::NEG_INFINITY, w.clone());
    let mut iterations = 0;
    let mut solver = WarmEigen::new();
    for _ in 0..cfg.max_iterations.max(1) {
        iterations += 1;
        let cov = white.weighted_covariance(&w);
        let (u, eigenvalues) = solver.top(&cov, n)?;
        let r2 = white.residuals2(&u);
        let worst = max_of(&r2);
        if best_u.as_ref().is_none_or(|(_, b)| worst < *b) {
            best_u = Some((u, worst));
        }
        let tail: f64 = eigenvalues.iter().skip(n).map(|l| l.max(0.0)).sum::<f64>()
            - rounding_allowance(r, n, cov.norm());
        if tail > best_dual.0 {
            best_dual = (tail, w.clone());
        }
        let gap = best_u.as_ref().map_or(f64::INFINITY, |(_, b)| *b) - best_dual.0;
        if gap <= cfg.convergence_tol {
            break;
        }
        let m = max_of(&r2);
        for (wk, rk) in w.iter_mut().zip(&r2) {
            *wk *= (cfg.weight_learning_rate * (rk - m)).exp();
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
    }

    let (u_mw, worst_mw) = best_u.expect("at least one iteration");
    let mut start = u_mw.clone();
    for v in start.iter_mut() {
        *v += 1e-3 * rng.random_range(-1.0..1.0_f64);
    }
    let (u_ref, worst_ref, steps) = refine(white, orthonormal_columns(start), 200);
    let u = if worst_ref < worst_mw { u_ref } else { u_mw };
    let witness = white.to_subspace(&u, gram)?;
    let (upper, _) = sup_residual(gram, &witness)?;
    Ok(RestartOutcome {
        witness,
        upper,
        weights: best_dual.1,
        iterations: iterations + steps,
    })
}

/// Numerical two-sided estimate of `d_N` for the snapshots behind `gram`.
pub fn minimax_width(gram: &GramMatrix, n: usize, cfg: &MinimaxConfig) -> Result<WidthEstimate> {
    minimax_width_with(gram, n, cfg, Execution::default())
}

/// [`minimax_width`] with an explicit policy for the independent restarts.
pub fn minimax_width_with(
    gram: &GramMatrix,
    n: usize,
    cfg: &MinimaxConfig,
    exec: Execution,
) -> Result<WidthEstimate> {
    cfg.validate()?;
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    let s = gram.size();
    let white = Whitened::new(gram)?;
    let scale = white.scale;

    if white.rank() <= n {
        // The whole numerical span fits into an N-dimensional space.
        let witness = if white.rank() == 0 {
            Subspace::empty(s)
        } else {
            white.to_subspace(&DMatrix::identity(white.rank(), white.rank()), gram)?
        };
        let (upper, _) = sup_residual(gram, &witness)?;
        let weights = uniform_weights(s);
        let lower_dual = dual_lower_bound(gram, n, &weights)?.min(upper);
        return Ok(WidthEstimate {
            n,
            lower_packing: None,
            lower_dual,
            upper,
            upper_witness: witness,
            weights,
            iterations: 0,
            converged: true,
        });
    }

    let outcomes = map_indices(exec, cfg.restarts, |i| run_restart(gram, &white, n, cfg, i));
    let mut best: Option<RestartOutcome> = None;
    let mut lower = (0.0, uniform_weights(s));
    let mut iterations = 0;
    for outcome in outcomes {
        let outcome = outcome?;
        iterations += outcome.iterations;
        let dual = dual_lower_bound(gram, n, &outcome.weights)?;
        if dual > lower.0 {
            lower = (dual, outcome.weights.clone());
        }
        if best.as_ref().is_none_or(|b| outcome.upper < b.upper) {
            best = Some(outcome);
        }
    }
    let best = best.expect("restarts >= 1");
    let converged = best.upper * best.upper - lower.0 * lower.0 <= cfg.convergence_tol * scale;
    Ok(WidthEstimate {
        n,
        lower_packing: None,
        lower_dual: lower.0,
        upper: best.upper,
        upper_witness: best.witness,
        weights: lower.1,
        iterations,
        converged,
    })
}

/// Outcome of [`chain_check`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainReport {
    pub n: usize,
    pub packing: PackingChain,
    /// Estimate for the cone snapshots at speeds `m / (2N)`.
    pub phi: WidthEstimate,
    /// Estimate for the hats `psi_{2N,m}`.
    pub psi: WidthEstimate,
    /// Estimate for the orthonormal hats.
    pub psi_tilde: WidthEstimate,
    pub phi_dominates_half_psi: bool,
    pub phi_above_packing: bool,
    pub psi_tilde_tight: bool,
    pub holds: bool,
}

/// Numerically confirms `d_N(Phi_{2N}) >= d_N(Psi_{2N}) / 2` together with
/// the analytic packing chain.
pub fn chain_check(m_grid: usize, n: usize, cfg: &MinimaxConfig) -> Result<ChainReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be positive".into()));
    }
    if m_grid != 2 * n {
        return Err(Error::InvalidParameter(format!(
            "chain check needs M = 2N = {}, got {m_grid}",
            2 * n
        )));
    }
    let packing = packing_chain(n)?;
    let phis = (0..=m_grid)
        .map(|m| WaveSnapshot::new(m as f64 / m_grid as f64).map(Combination::from))
        .collect::<Result<Vec<_>>>()?;
    let hats = (1..=m_grid)
        .map(|m| HatFunction::new(m_grid, m))
        .collect::<Result<Vec<_>>>()?;
    let psis: Vec<Combination> = hats.iter().map(|&h| h.into()).collect();
    let tildes: Vec<Combination> = hats.iter().map(|h| h.orthonormal()).collect();

    let mut phi = minimax_width(&assemble_gram(&phis)?, n, cfg)?;
    phi.lower_packing = Some(packing.bound);
    let psi = minimax_width(&assemble_gram(&psis)?, n, cfg)?;
    let psi_tilde = minimax_width(&assemble_gram(&tildes)?, n, cfg)?;

    let target = std::f64::consts::FRAC_1_SQRT_2;
    let phi_dominates_half_psi = phi.upper >= 0.5 * psi.lower_dual - BOUND_SLACK;
    let phi_above_packing = phi.upper >= packing.bound - BOUND_SLACK;
    let psi_tilde_tight =
        (psi_tilde.upper - target).abs() <= 1e-3 && (psi_tilde.lower_dual - target).abs() <= 1e-3;
    let holds = packing.verified && phi_dominates_half_psi && phi_above_packing && psi_tilde_tight;
    Ok(ChainReport {
        n,
        packing,
        phi,
        psi,
        psi_tilde,
        phi_dominates_half_psi,
        phi_above_packing,
        psi_tilde_tight,
        holds,
    })
}

/// Residuals of every snapshot against an estimate's witness.
pub fn witness_residuals(gram: &GramMatrix, estimate: &WidthEstimate) -> Result<Vec<f64>> {
    Ok(residuals_squared(gram, &estimate.upper_witness)?
        .into_iter()
        .map(f64::sqrt)
        .collect())
}

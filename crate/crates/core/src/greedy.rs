//! Strong greedy reduced bases and decay-rate fits.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{argmax, g_orthonormalize, residuals_squared_with, GramMatrix, Subspace};

/// Selections made by [`strong_greedy`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreedyTrace {
    pub selected_indices: Vec<usize>,
    /// `errors[j]` is the worst residual after `j` selections. Shorter than
    /// `n_max + 1` when the selection converged early.
    pub errors: Vec<f64>,
    pub n_max: usize,
}

const BREAKDOWN: f64 = 1e-12;

/// Repeatedly picks the snapshot with the largest residual against the span
/// of the snapshots picked so far.
pub fn strong_greedy(gram: &GramMatrix, n_max: usize, stop_tol: f64) -> Result<GreedyTrace> {
    strong_greedy_with(gram, n_max, stop_tol, Execution::default())
}

pub fn strong_greedy_with(
    gram: &GramMatrix,
    n_max: usize,
    stop_tol: f64,
    exec: Execution,
) -> Result<GreedyTrace> {
    let s = gram.size();
    if n_max > s {
        return Err(Error::InvalidParameter(format!(
            "N_max = {n_max} exceeds the {s} available snapshots"
        )));
    }
    if stop_tol.is_nan() || stop_tol < 0.0 {
        return Err(Error::InvalidParameter(
            "stop tolerance must be nonnegative".into(),
        ));
    }
    let mut selected = Vec::with_capacity(n_max);
    let mut residual2 = gram.norms_squared();
    let mut errors = Vec::with_capacity(n_max + 1);
    let floor = BREAKDOWN
        * residual2
            .iter()
            .copied()
            .fold(0.0_f64, f64::max)
            .sqrt()
            .max(1.0);
    loop {
        let (k, worst) = argmax(&residual2).ok_or(Error::Empty)?;
        let worst = worst.max(0.0).sqrt();
        errors.push(worst);
        if selected.len() == n_max || worst < stop_tol || worst < floor {
            break;
        }
        selected.push(k);
        let picks = DMatrix::from_fn(
            s,
            selected.len(),
            |r, c| {
                if r == selected[c] {
                    1.0
                } else {
                    0.0
                }
            },
        );
        // Past the resolution of the stored Gram the new direction can no
        // longer be made G-orthonormal; that is numerical convergence.
        let coeffs = g_orthonormalize(&picks, gram)?;
        let basis = match Subspace::new(coeffs, gram) {
            Ok(b) if b.dim() == selected.len() => b,
            Ok(_) | Err(Error::NotOrthonormal(_)) => {
                selected.pop();
                break;
            }
            Err(e) => return Err(e),
        };
        residual2 = residuals_squared_with(gram, &basis, exec)?;
        // Picked snapshots lie in the span; pin them so rounding never
        // selects one twice.
        for &j in &selected {
            residual2[j] = f64::NEG_INFINITY;
        }
        if selected.len() == s {
            errors.push(0.0);
            break;
        }
    }
    Ok(GreedyTrace {
        selected_indices: selected,
        errors,
        n_max,
    })
}

/// Which of the two decay models fits better.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayModel {
    Algebraic,
    Exponential,
}

/// Least-squares fits of `log err = c + p log N` and `log err = c + r N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub algebraic_exponent: f64,
    pub algebraic_r2: f64,
    pub exponential_rate: f64,
    pub exponential_r2: f64,
    pub better_model: DecayModel,
}

fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let e = b - my - slope * (a - mx);
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, r2.clamp(0.0, 1.0))
}

/// Fits `errors[j]` against `N = j` for `j >= skip_first`.
pub fn fit_decay(errors: &[f64], skip_first: usize) -> Result<DecayFit> {
    let points: Vec<(f64, f64)> = errors
        .iter()
        .enumerate()
        .skip(skip_first)
        .map(|(j, &e)| (j as f64, e))
        .collect();
    fit_decay_points(&points)
}

/// Fits `(N, err)` pairs; every `N` must be positive.
pub fn fit_decay_points(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData(points.len()));
    }
    if let Some(&(n, value)) = points
        .iter()
        .find(|(n, e)| e.is_nan() || *e <= 0.0 || n.is_nan() || *n <= 0.0)
    {
        return Err(Error::NonPositiveError { n, value });
    }
    let ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    let logn: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let loge: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (algebraic_exponent, algebraic_r2) = linear_fit(&logn, &loge);
    let (exponential_rate, exponential_r2) = linear_fit(&ns, &loge);
    let better_model = if exponential_r2 > algebraic_r2 {
        DecayModel::Exponential
    } else {
        DecayModel::Algebraic
    };
    Ok(DecayFit {
        algebraic_exponent,
        algebraic_r2,
        exponential_rate,
        exponential_r2,
        better_model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::assemble_gram;
    use crate::manifold::{Combination, WaveSnapshot};

    fn wave_gram(grid: usize) -> GramMatrix {
        let v: Vec<Combination> = (0..grid)
            .map(|i| {
                WaveSnapshot::new(i as f64 / (grid - 1) as f64)
                    .unwrap()
                    .into()
            })
            .collect();
        assemble_gram(&v).unwrap()
    }

    #[test]
    fn orthonormal_set_never_improves() {
        let t = strong_greedy(&GramMatrix::identity(4), 2, 0.0).unwrap();
        assert_eq!(t.errors, vec![1.0, 1.0, 1.0]);
        assert_eq!(t.selected_indices, vec![0, 1]);
    }

    #[test]
    fn single_snapshot() {
        let g = assemble_gram(&[WaveSnapshot::new(0.3).unwrap().into()]).unwrap();
        let t = strong_greedy(&g, 1, 0.0).unwrap();
        assert_eq!(t.errors.len(), 2);
        assert!((t.errors[0] - 1.7f64.sqrt()).abs() < 1e-15);
        assert_eq!(t.errors[1], 0.0);
    }

    #[test]
    fn wave_grid_decreases_above_packing() {
        let g = wave_gram(129);
        let t = strong_greedy(&g, 16, 0.0).unwrap();
        assert_eq!(t.errors.len(), 17);
        for w in t.errors.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        // Errors stall between dyadic levels: 0.25 for N = 5..8.
        assert!((t.errors[8] - 0.25).abs() < 1e-12);
        assert!(t.errors[16] < t.errors[1]);
        for n in [1usize, 2, 4, 8, 16] {
            assert!(t.errors[n] >= 0.25 / (n as f64).sqrt() - 1e-9);
        }
        let mut seen = t.selected_indices.clone();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn too_many_requested() {
        assert!(strong_greedy(&GramMatrix::identity(2), 3, 0.0).is_err());
    }

    #[test]
    fn stop_tolerance_ends_early() {
        let t = strong_greedy(&wave_gram(9), 8, 0.5).unwrap();
        assert!(t.errors.last().unwrap() < &0.5);
        assert!(t.selected_indices.len() < 8);
    }

    #[test]
    fn synthetic_algebraic() {
        let errs: Vec<f64> = (0..=32)
            .map(|n| {
                if n == 0 {
                    1.0
                } else {
                    0.25 / (n as f64).sqrt()
                }
            })
            .collect();
        let fit = fit_decay(&errs, 1).unwrap();
        assert!((fit.algebraic_exponent + 0.5).abs() < 1e-9);
        assert_eq!(fit.better_model, DecayModel::Algebraic);
    }

    #[test]
    fn synthetic_exponential() {
        let errs: Vec<f64> = (0..=20).map(|n| (-(n as f64)).exp()).collect();
        let fit = fit_decay(&errs, 1).unwrap();
        assert!((fit.exponential_rate + 1.0).abs() < 1e-9);
        assert_eq!(fit.better_model, DecayModel::Exponential);
    }

    #[test]
    fn fit_rejects_bad_windows() {
        assert!(matches!(
            fit_decay(&[1.0, 0.5, 0.2], 0),
            Err(Error::InsufficientData(3))
        ));
        assert!(matches!(
            fit_decay(&[1.0, 0.5, 0.2, 0.0, 0.1], 1),
            Err(Error::NonPositiveError { .. })
        ));
    }
}

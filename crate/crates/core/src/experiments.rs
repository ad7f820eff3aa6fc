//! Width sweeps over the wave family and an analytic contrast family.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::geometry::{assemble_gram_with, GramMatrix};
use crate::greedy::{fit_decay_points, strong_greedy_with, DecayFit};
use crate::manifold::{Atom, Combination, Family, SpaceTimePoint, WaveSnapshot};
use crate::widths::{
    dual_lower_bound, minimax_width_with, packing_lower_bound, uniform_weights, MinimaxConfig,
};

/// `f_s(t, x) = exp(-s (t + x + 2))` on the space-time domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothSnapshot {
    s: f64,
}

impl SmoothSnapshot {
    pub fn new(s: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&s) {
            Ok(Self { s })
        } else {
            Err(Error::InvalidParameter(format!(
                "decay parameter {s} outside [0, 1]"
            )))
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn eval(&self, p: SpaceTimePoint) -> Result<f64> {
        p.check_domain()?;
        Ok((-self.s * (p.t + p.x + 2.0)).exp())
    }
}

impl From<SmoothSnapshot> for Combination {
    fn from(v: SmoothSnapshot) -> Self {
        Combination::atom(Atom::Smooth(v.s))
    }
}

/// `(f_a, f_b)` in closed form. With `σ = a + b` the integral factors into
/// `e^{-2σ} · (1 - e^{-σ})/σ · (e^σ - e^{-σ})/σ`.
pub fn smooth_inner_product(a: f64, b: f64) -> f64 {
    let sigma = a + b;
    if sigma < 1e-6 {
        // Product of the three factor series, truncated after σ⁴.
        let s2 = sigma * sigma;
        let s3 = s2 * sigma;
        let s4 = s2 * s2;
        return 2.0 * (1.0 - 2.5 * sigma + 10.0 / 3.0 * s2 - 25.0 / 8.0 * s3 + 413.0 / 180.0 * s4);
    }
    let time = -(-sigma).exp_m1() / sigma;
    let space = 2.0 * sigma.sinh() / sigma;
    (-2.0 * sigma).exp() * time * space
}

/// Uniform parameters `i / (grid - 1)`, or `[0]` for a one-point grid.
pub fn grid_parameters(grid: usize) -> Vec<f64> {
    match grid {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..grid).map(|i| i as f64 / (grid - 1) as f64).collect(),
    }
}

pub fn family_snapshots(family: Family, grid: usize) -> Result<Vec<Combination>> {
    if grid == 0 {
        return Err(Error::InvalidParameter(
            "grid size must be at least 1".into(),
        ));
    }
    grid_parameters(grid)
        .into_iter()
        .map(|p| match family {
            Family::Wave => WaveSnapshot::new(p).map(Combination::from),
            Family::Smooth => SmoothSnapshot::new(p).map(Combination::from),
        })
        .collect()
}

pub fn family_gram(family: Family, grid: usize, exec: Execution) -> Result<GramMatrix> {
    assemble_gram_with(&family_snapshots(family, grid)?, exec)
}

/// One line of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    /// Present only for wave grids containing `Φ_{2N}`.
    pub lower_packing: Option<f64>,
    pub lower_dual: f64,
    pub upper: f64,
    pub greedy_error: f64,
    pub pod_tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: Family,
    pub grid_size: usize,
    pub rows: Vec<SweepRow>,
    /// Fit of the upper column over the rows with `N` below the numerical
    /// rank, when there are at least four of them.
    pub fit: Option<DecayFit>,
    pub config: MinimaxConfig,
}

pub fn run_sweep(
    family: Family,
    grid: usize,
    n_list: &[usize],
    cfg: &MinimaxConfig,
) -> Result<SweepReport> {
    run_sweep_with(family, grid, n_list, cfg, Execution::default())
}

pub fn run_sweep_with(
    family: Family,
    grid: usize,
    n_list: &[usize],
    cfg: &MinimaxConfig,
    exec: Execution,
) -> Result<SweepReport> {
    cfg.validate()?;
    let n_top = n_list.iter().copied().max().unwrap_or(0);
    if grid < 2 * n_top + 1 {
        return Err(Error::InfeasibleGrid {
            grid,
            n: n_top,
            reason: format!("need at least {} snapshots", 2 * n_top + 1),
        });
    }
    if let Some(&n) = n_list.iter().find(|&&n| n == 0) {
        return Err(Error::InfeasibleGrid {
            grid,
            n,
            reason: "N must be positive".into(),
        });
    }
    let mut rank = 0;
    let rows = if n_list.is_empty() {
        Vec::new()
    } else {
        let gram = family_gram(family, grid, exec)?;
        rank = gram.eig()?.numerical_rank();
        let trace = strong_greedy_with(&gram, n_top, 0.0, exec)?;
        let built = map_indices(exec, n_list.len(), |i| -> Result<SweepRow> {
            let n = n_list[i];
            let est = minimax_width_with(&gram, n, cfg, exec)?;
            let lower_packing = match family {
                Family::Wave if (grid - 1).is_multiple_of(2 * n) => Some(packing_lower_bound(n)?),
                _ => None,
            };
            let greedy_error = trace
                .errors
                .get(n)
                .or(trace.errors.last())
                .copied()
                .unwrap_or(0.0);
            Ok(SweepRow {
                n,
                lower_packing,
                lower_dual: est.lower_dual,
                upper: est.upper,
                greedy_error,
                pod_tail: dual_lower_bound(&gram, n, &uniform_weights(grid))?,
            })
        });
        built.into_iter().collect::<Result<Vec<_>>>()?
    };
    // From the numerical rank on, the upper column only measures rounding.
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n < rank)
        .map(|r| (r.n as f64, r.upper))
        .take_while(|p| p.1 > 0.0)
        .collect();
    let fit = fit_decay_points(&points).ok();
    Ok(SweepReport {
        family,
        grid_size: grid,
        rows,
        fit,
        config: cfg.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub const CSV_HEADER: &str =
    "family,grid_size,N,lower_packing,lower_dual,upper,greedy_error,pod_tail";

/// Shortest decimal that parses back to the same `f64`.
pub fn format_real(v: f64) -> String {
    format!("{v:e}")
}

pub fn emit_report<W: Write>(report: &SweepReport, format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for r in &report.rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    report.family,
                    report.grid_size,
                    r.n,
                    r.lower_packing.map(format_real).unwrap_or_default(),
                    format_real(r.lower_dual),
                    format_real(r.upper),
                    format_real(r.greedy_error),
                    format_real(r.pod_tail),
                )?;
            }
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

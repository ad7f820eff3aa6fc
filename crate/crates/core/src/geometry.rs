//! Euclidean machinery in snapshot (Gram) coordinates.
//!
//! An element of `span{x_1, ..., x_S}` is a coefficient vector `c` with
//! norm `sqrt(cᵀ G c)`, so every width computation reduces to linear
//! algebra on the Gram matrix `G`. Inner products against `G` are evaluated
//! in compensated arithmetic so that bases reaching deep into a fast
//! decaying spectrum stay verifiably orthonormal.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::compensated;
use crate::error::{Error, Result};
use crate::exec::{map_indices, Execution};
use crate::manifold::{inner_product, Combination, Family};

/// Relative symmetry tolerance for Gram and eigen inputs.
pub const SYMMETRY_TOL: f64 = 1e-14;
/// Smallest admissible eigenvalue, relative to the trace.
pub const PSD_TOL: f64 = 1e-10;
/// Columns whose G-norm drops below this fraction of their initial G-norm
/// during orthonormalization are discarded.
pub const DROP_TOL: f64 = 1e-10;
/// Eigenvalues above this fraction of the largest one count towards the
/// numerical rank.
pub const RANK_TOL: f64 = 1e-14;
/// Required accuracy of `BᵀGB = I`.
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Jacobi stops once the off-diagonal Frobenius mass is below this fraction
/// of the input's Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-12;
const MGS_PASSES: usize = 4;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Symmetric positive semidefinite matrix of pairwise inner products.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    matrix: DMatrix<f64>,
    labels: Vec<String>,
}

impl GramMatrix {
    /// Validates symmetry and positive semidefiniteness.
    pub fn from_matrix(matrix: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::Empty);
        }
        if labels.len() != matrix.nrows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: labels.len(),
            });
        }
        let eig = symmetric_eig(&matrix)?;
        let trace = matrix.trace();
        let min = eig.eigenvalues.last().copied().unwrap_or(0.0);
        if min < -PSD_TOL * trace.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotPositiveSemidefinite(min));
        }
        Ok(Self { matrix, labels })
    }

    /// Gram matrix of an orthonormal set of the given size.
    pub fn identity(size: usize) -> Self {
        Self {
            matrix: DMatrix::identity(size, size),
            labels: (1..=size).map(|i| format!("e{i}")).collect(),
        }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// Squared norms of the snapshots.
    pub fn norms_squared(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    /// Gram matrix of the snapshots scaled by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            matrix: &self.matrix * (c * c),
            labels: self.labels.clone(),
        }
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        symmetric_eig(&self.matrix)
    }

    fn column(&self, k: usize) -> &[f64] {
        let n = self.size();
        &self.matrix.as_slice()[k * n..(k + 1) * n]
    }

    /// `G v` in double-double precision.
    pub(crate) fn apply(&self, v: &[f64]) -> Vec<(f64, f64)> {
        compensated::apply(&self.matrix, v)
    }

    /// `uᵀ G v`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        compensated::inner(&self.matrix, u, v)
    }
}

/// Assembles the Gram matrix of a snapshot list.
pub fn assemble_gram(snapshots: &[Combination]) -> Result<GramMatrix> {
    assemble_gram_with(snapshots, Execution::default())
}

pub fn assemble_gram_with(snapshots: &[Combination], exec: Execution) -> Result<GramMatrix> {
    if snapshots.is_empty() {
        return Err(Error::Empty);
    }
    let mut family: Option<Family> = None;
    for s in snapshots {
        match (family, s.family()?) {
            (_, None) => {}
            (None, f) => family = f,
            (Some(a), Some(b)) if a != b => return Err(Error::IncompatibleFamilies),
            _ => {}
        }
    }
    let n = snapshots.len();
    let rows = map_indices(exec, n, |i| {
        (0..n)
            .map(|j| {
                if j < i {
                    Ok(0.0)
                } else {
                    inner_product(&snapshots[i], &snapshots[j])
                }
            })
            .collect::<Result<Vec<f64>>>()
    });
    let mut matrix = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        for j in i..n {
            matrix[(i, j)] = row[j];
            matrix[(j, i)] = row[j];
        }
    }
    Ok(GramMatrix {
        matrix,
        labels: snapshots.iter().map(|s| s.label().to_string()).collect(),
    })
}

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub sweeps: usize,
}

impl SpectralDecomposition {
    /// Number of eigenvalues above `RANK_TOL` times the largest.
    pub fn numerical_rank(&self) -> usize {
        let top = self.eigenvalues.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        self.eigenvalues
            .iter()
            .take_while(|&&l| l > RANK_TOL * top)
            .count()
    }

    /// Sum of the eigenvalues past the first `n`, negative round-off clamped.
    pub fn tail(&self, n: usize) -> f64 {
        self.eigenvalues.iter().skip(n).map(|l| l.max(0.0)).sum()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let q = &self.eigenvectors;
        let lambda = DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigenvalues));
        q * lambda * q.transpose()
    }
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |a, &v| a.max(v.abs()))
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
pub fn symmetric_eig(matrix: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    let n = matrix.nrows();
    if n != matrix.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: matrix.ncols(),
        });
    }
    let scale = max_abs(matrix);
    let asym = max_abs(&(matrix - matrix.transpose()));
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let mut a = (matrix + matrix.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);
    let target = JACOBI_TOL * a.norm();

    let mut sweeps = 0;
    loop {
        let off: f64 = (0..n)
            .flat_map(|j| (0..n).filter(move |&i| i != j).map(move |i| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= target {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence(sweeps));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

/// An `N`-dimensional subspace of the snapshot span: the columns of
/// `coeffs` are G-orthonormal coordinate vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subspace {
    coeffs: DMatrix<f64>,
}

impl Subspace {
    /// Checks `‖BᵀGB - I‖_max <= ORTHONORMAL_TOL`.
    pub fn new(coeffs: DMatrix<f64>, gram: &GramMatrix) -> Result<Self> {
        if coeffs.nrows() != gram.size() {
            return Err(Error::DimensionMismatch {
                expected: gram.size(),
                found: coeffs.nrows(),
            });
        }
        let dev = orthonormality_defect(&coeffs, gram);
        if dev > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal(dev));
        }
        Ok(Self { coeffs })
    }

    /// The zero-dimensional subspace.
    pub fn empty(size: usize) -> Self {
        Self {
            coeffs: DMatrix::zeros(size, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    fn check(&self, gram: &GramMatrix) -> Result<()> {
        if self.ambient() != gram.size() {
            return Err(Error::DimensionMismatch {
                expected: gram.size(),
                found: self.ambient(),
            });
        }
        Ok(())
    }
}

/// `‖BᵀGB - I‖_max` in compensated arithmetic.
pub fn orthonormality_defect(coeffs: &DMatrix<f64>, gram: &GramMatrix) -> f64 {
    let k = coeffs.ncols();
    let applied: Vec<Vec<(f64, f64)>> = (0..k)
        .map(|j| gram.apply(coeffs.column(j).as_slice()))
        .collect();
    let mut dev = 0.0_f64;
    for i in 0..k {
        for (j, gbj) in applied.iter().enumerate().skip(i) {
            let v = compensated::inner_applied(coeffs.column(i).as_slice(), gbj);
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((v - target).abs());
        }
    }
    dev
}

/// Modified Gram–Schmidt in the G-inner product with repeated
/// re-orthogonalization. Dependent columns are dropped.
pub fn g_orthonormalize(vectors: &DMatrix<f64>, gram: &GramMatrix) -> Result<DMatrix<f64>> {
    if vectors.nrows() != gram.size() {
        return Err(Error::DimensionMismatch {
            expected: gram.size(),
            found: vectors.nrows(),
        });
    }
    let psd_floor = -PSD_TOL * gram.trace().abs().max(f64::MIN_POSITIVE);
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for col in vectors.column_iter() {
        let mut v: DVector<f64> = col.into_owned();
        let initial = gram.inner(v.as_slice(), v.as_slice());
        if initial < psd_floor {
            return Err(Error::NotPositiveSemidefinite(initial));
        }
        let initial_norm = initial.max(0.0).sqrt();
        if initial_norm == 0.0 {
            continue;
        }
        // Rounding in each update is proportional to the coefficient removed,
        // so extra passes keep shrinking the overlap even when the snapshot
        // is nearly dependent on the basis.
        for _pass in 0..MGS_PASSES {
            let mut largest = 0.0_f64;
            for b in &basis {
                let c = gram.inner(b.as_slice(), v.as_slice());
                v.axpy(-c, b, 1.0);
                largest = largest.max(c.abs());
            }
            if largest <= f64::EPSILON * f64::EPSILON * initial_norm {
                break;
            }
        }
        let n2 = gram.inner(v.as_slice(), v.as_slice());
        if n2 < psd_floor {
            return Err(Error::NotPositiveSemidefinite(n2));
        }
        let norm = n2.max(0.0).sqrt();
        if norm <= DROP_TOL * initial_norm {
            continue;
        }
        v /= norm;
        basis.push(v);
    }
    Ok(if basis.is_empty() {
        DMatrix::zeros(gram.size(), 0)
    } else {
        DMatrix::from_columns(&basis)
    })
}

/// Squared projection residuals of every snapshot.
pub fn residuals_squared(gram: &GramMatrix, subspace: &Subspace) -> Result<Vec<f64>> {
    residuals_squared_with(gram, subspace, Execution::Sequential)
}

pub fn residuals_squared_with(
    gram: &GramMatrix,
    subspace: &Subspace,
    exec: Execution,
) -> Result<Vec<f64>> {
    subspace.check(gram)?;
    let b = subspace.coeffs();
    Ok(map_indices(exec, gram.size(), |k| {
        let col = gram.column(k);
        let captured: f64 = b
            .column_iter()
            .map(|bj| {
                let c = compensated::dot(bj.as_slice(), col);
                c * c
            })
            .sum();
        (gram.entry(k, k) - captured).max(0.0)
    }))
}

/// `‖x_k - P x_k‖_G = sqrt(G_kk - Σ_j (Bᵀ G e_k)_j²)`, for a 0-based index.
pub fn projection_residual(gram: &GramMatrix, subspace: &Subspace, k: usize) -> Result<f64> {
    subspace.check(gram)?;
    if k >= gram.size() {
        return Err(Error::IndexOutOfRange {
            index: k + 1,
            max: gram.size(),
        });
    }
    let col = gram.column(k);
    let captured: f64 = subspace
        .coeffs()
        .column_iter()
        .map(|bj| {
            let c = compensated::dot(bj.as_slice(), col);
            c * c
        })
        .sum();
    Ok((gram.entry(k, k) - captured).max(0.0).sqrt())
}

/// Worst projection residual and its 0-based index, ties to the smallest.
pub fn sup_residual(gram: &GramMatrix, subspace: &Subspace) -> Result<(f64, usize)> {
    let r2 = residuals_squared(gram, subspace)?;
    Ok(argmax(&r2).map(|(i, v)| (v.sqrt(), i)).unwrap_or((0.0, 0)))
}

pub(crate) fn argmax(values: &[f64]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best
}

/// Top-`n` eigenvector subspace of `G`, rescaled to be G-orthonormal.
pub fn pod_subspace(gram: &GramMatrix, n: usize) -> Result<Subspace> {
    let eig = gram.eig()?;
    let rank = eig.numerical_rank();
    if n > rank {
        return Err(Error::RankDeficient { requested: n, rank });
    }
    let s = gram.size();
    let cols = DMatrix::from_fn(s, n, |r, c| {
        eig.eigenvectors[(r, c)] / eig.eigenvalues[c].sqrt()
    });
    let b = g_orthonormalize(&cols, gram)?;
    if b.ncols() < n {
        return Err(Error::RankDeficient {
            requested: n,
            rank: b.ncols(),
        });
    }
    Subspace::new(b, gram)
}

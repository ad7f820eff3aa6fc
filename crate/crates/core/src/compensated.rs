//! Compensated (twice-working-precision) dot products.
//!
//! G-inner products of basis vectors with large coefficients cancel heavily
//! when the Gram matrix has a fast-decaying spectrum. Error-free
//! transformations keep BᵀGB accurate to a few ulps in that regime.

use nalgebra::DMatrix;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Accumulator {
    hi: f64,
    lo: f64,
}

impl Accumulator {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.hi, x);
        self.hi = s;
        self.lo += e;
    }

    #[inline]
    pub fn add_product(&mut self, a: f64, b: f64) {
        let (p, e) = two_prod(a, b);
        self.add(p);
        self.lo += e;
    }

    /// The sum as a normalized (hi, lo) pair.
    pub fn parts(self) -> (f64, f64) {
        two_sum(self.hi, self.lo)
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = Accumulator::default();
    for (&x, &y) in a.iter().zip(b) {
        acc.add_product(x, y);
    }
    acc.value()
}

/// `G v` with each component kept as a double-double pair. `G` must be
/// symmetric; its columns are read as rows.
pub(crate) fn apply(g: &DMatrix<f64>, v: &[f64]) -> Vec<(f64, f64)> {
    let n = g.nrows();
    let data = g.as_slice();
    (0..n)
        .map(|i| {
            let mut acc = Accumulator::default();
            for (&gij, &vj) in data[i * n..(i + 1) * n].iter().zip(v) {
                acc.add_product(gij, vj);
            }
            acc.parts()
        })
        .collect()
}

/// `uᵀ G v` evaluated in compensated arithmetic.
pub(crate) fn inner(g: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    inner_applied(u, &apply(g, v))
}

/// `uᵀ w` where `w` is a double-double vector from [`apply`].
pub(crate) fn inner_applied(u: &[f64], w: &[(f64, f64)]) -> f64 {
    let mut acc = Accumulator::default();
    for (&ui, &(hi, lo)) in u.iter().zip(w) {
        acc.add_product(ui, hi);
        acc.add_product(ui, lo);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_survives_catastrophic_cancellation() {
        let a = [1e16, 1.0, -1e16];
        let b = [1.0, 1.0, 1.0];
        assert_eq!(dot(&a, &b), 1.0);
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert_ne!(naive, 1.0);
    }

    #[test]
    fn inner_matches_plain_on_benign_input() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let u = [1.0, 2.0];
        let v = [0.5, -1.0];
        let plain = (g.clone() * nalgebra::DVector::from_column_slice(&v))
            .dot(&nalgebra::DVector::from_column_slice(&u));
        assert!((inner(&g, &u, &v) - plain).abs() < 1e-15);
    }
}

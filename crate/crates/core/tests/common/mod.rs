//! Reference computations that avoid the library's closed forms.

#![allow(dead_code)]

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use nwidth::manifold::{eval_phi, Parameter, SpaceTimePoint};
use nwidth::GramMatrix;
use rand::{Rng, RngExt};

fn rule(points: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(points).unwrap())
        .as_node_weight_pairs()
        .to_vec()
}

fn integrate(rule: &[(f64, f64)], a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let h = 0.5 * (b - a);
    let m = 0.5 * (b + a);
    rule.iter().map(|&(x, w)| h * w * f(m + h * x)).sum()
}

/// `∫∫ phi_a phi_b` by Gauss–Legendre on the pieces cut out by the cone
/// lines, with pointwise evaluation of the snapshots.
pub fn wave_inner_oracle(a: f64, b: f64) -> f64 {
    let gl = rule(16);
    let pa = Parameter::new(a).unwrap();
    let pb = Parameter::new(b).unwrap();
    integrate(&gl, 0.0, 1.0, |t| {
        let mut cuts = vec![-1.0, 1.0, -a * t, a * t, -b * t, b * t];
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                integrate(&gl, w[0], w[1], |x| {
                    let p = SpaceTimePoint::new(t, x);
                    eval_phi(pa, p).unwrap() * eval_phi(pb, p).unwrap()
                })
            })
            .sum()
    })
}

/// Tensor Gauss–Legendre integral of `exp(-a(t+x+2)) exp(-b(t+x+2))`.
pub fn smooth_inner_oracle(a: f64, b: f64) -> f64 {
    let gl = rule(24);
    integrate(&gl, 0.0, 1.0, |t| {
        integrate(&gl, -1.0, 1.0, |x| {
            let z = t + x + 2.0;
            (-a * z).exp() * (-b * z).exp()
        })
    })
}

pub fn labelled(matrix: DMatrix<f64>) -> GramMatrix {
    let labels = (0..matrix.nrows()).map(|i| format!("x{i}")).collect();
    GramMatrix::from_matrix(matrix, labels).unwrap()
}

/// `AᵀA` for a random square `A` with entries in `[-1, 1]`.
pub fn random_psd<R: Rng>(rng: &mut R, size: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(size, size, |_, _| rng.random_range(-1.0..1.0));
    let g = a.transpose() * &a;
    (&g + g.transpose()) * 0.5
}

/// Snapshot coordinates in an orthonormal basis of their span.
fn whiten(gram: &DMatrix<f64>) -> Vec<Vec<f64>> {
    let eig = gram.clone().symmetric_eigen();
    let top = eig.eigenvalues.max();
    let keep: Vec<usize> = (0..gram.nrows())
        .filter(|&i| eig.eigenvalues[i] > 1e-12 * top)
        .collect();
    (0..gram.nrows())
        .map(|k| {
            keep.iter()
                .map(|&i| eig.eigenvalues[i].sqrt() * eig.eigenvectors[(k, i)])
                .collect()
        })
        .collect()
}

fn direction(angles: &[f64]) -> Vec<f64> {
    let mut u = Vec::with_capacity(angles.len() + 1);
    let mut s = 1.0;
    for &a in angles {
        u.push(s * a.cos());
        s *= a.sin();
    }
    u.push(s);
    u
}

fn worst(ys: &[Vec<f64>], u: &[f64]) -> f64 {
    ys.iter()
        .map(|y| {
            let n2: f64 = y.iter().map(|v| v * v).sum();
            let c: f64 = y.iter().zip(u).map(|(a, b)| a * b).sum();
            n2 - c * c
        })
        .fold(0.0, f64::max)
}

fn grid_points(centre: &[f64], half: f64, steps: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![Vec::new()];
    for &c in centre {
        let mut next = Vec::new();
        for p in &pts {
            for i in 0..=steps {
                let mut q = p.clone();
                q.push(c - half + 2.0 * half * i as f64 / steps as f64);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

/// `d_1` by exhaustive search over unit directions of the snapshot span,
/// followed by local zooming around the best grid points.
pub fn brute_force_width_one(gram: &DMatrix<f64>) -> f64 {
    let ys = whiten(gram);
    let r = ys[0].len();
    if r <= 1 {
        return 0.0;
    }
    let dims = r - 1;
    let coarse = match dims {
        1 => 2000,
        2 => 200,
        _ => 50,
    };
    let pi = std::f64::consts::PI;
    let centre = vec![pi / 2.0; dims];
    let mut scored: Vec<(f64, Vec<f64>)> = grid_points(&centre, pi / 2.0, coarse)
        .into_iter()
        .map(|a| (worst(&ys, &direction(&a)), a))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = f64::INFINITY;
    for (value, start) in scored.into_iter().take(12) {
        let mut cur = (value, start);
        let mut half = pi / coarse as f64 * 2.0;
        // Shrink slowly: the minimum sits on a kink of the max, where a
        // box search can stall if it narrows too fast.
        for _ in 0..60 {
            for a in grid_points(&cur.1, half, 8) {
                let v = worst(&ys, &direction(&a));
                if v < cur.0 {
                    cur = (v, a);
                }
            }
            half /= 1.5;
        }
        best = best.min(cur.0);
    }
    best.max(0.0).sqrt()
}

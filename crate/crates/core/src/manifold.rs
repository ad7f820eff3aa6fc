//! Analytic snapshot families for the wave equation
//! `u_tt - mu^2 u_xx = 0` on `(0, 1) x (-1, 1)` with jump initial data
//! `u_0 = 1` for `x < 0`, `-1` for `x >= 0`, zero initial velocity and
//! Dirichlet data `u(t, -1) = 1`, `u(t, 1) = -1`.
//!
//! The solution for speed `mu` is the three-valued cone function
//! [`eval_phi`]; differences of neighbouring cone functions on a uniform
//! speed grid give the pairwise-orthogonal [`HatFunction`]s. All L2
//! inner products are available in closed form, so snapshots are carried
//! symbolically as [`Combination`]s and never sampled on a grid.
//!
//! Pointwise evaluation uses one fixed half-open convention: value `1`
//! strictly left of the left cone line, `-1` on and right of the right cone
//! line. The Heaviside function takes `H(0) = 1` to match.

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::smooth_inner_product;
use crate::quadrature::{breakpoints, GaussRule};

/// A wave speed in the parameter set `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Parameter(f64);

impl Parameter {
    pub fn new(mu: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&mu) {
            Ok(Self(mu))
        } else {
            Err(Error::InvalidParameter(format!(
                "wave speed {mu} is outside [0, 1]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A point `(t, x)` of space-time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub t: f64,
    pub x: f64,
}

impl SpaceTimePoint {
    pub fn new(t: f64, x: f64) -> Self {
        Self { t, x }
    }

    /// Fails unless the point lies in `[0, 1] x [-1, 1]`.
    pub fn check_domain(self) -> Result<Self> {
        if (0.0..=1.0).contains(&self.t) && (-1.0..=1.0).contains(&self.x) {
            Ok(self)
        } else {
            Err(Error::OutsideDomain {
                t: self.t,
                x: self.x,
            })
        }
    }
}

/// The jump initial datum `u_0`.
pub fn initial_value(x: f64) -> f64 {
    if x < 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Heaviside step with `H(0) = 1`.
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn cone_value(mu: f64, t: f64, x: f64) -> f64 {
    if x < -mu * t {
        1.0
    } else if x >= mu * t {
        -1.0
    } else {
        0.0
    }
}

/// Evaluates the cone solution `phi_mu` at `p`.
pub fn eval_phi(mu: Parameter, p: SpaceTimePoint) -> Result<f64> {
    let p = p.check_domain()?;
    Ok(cone_value(mu.value(), p.t, p.x))
}

/// The d'Alembert form `(u_0(x + mu t) + u_0(x - mu t)) / 2`.
pub fn dalembert_eval(mu: Parameter, p: SpaceTimePoint) -> Result<f64> {
    let p = p.check_domain()?;
    let shift = mu.value() * p.t;
    Ok(0.5 * (initial_value(p.x + shift) + initial_value(p.x - shift)))
}

/// Fundamental solution `G_mu(t, x) = (H(x + mu t) - H(x - mu t)) / (2 mu)`.
pub fn eval_fundamental(mu: Parameter, p: SpaceTimePoint) -> Result<f64> {
    if mu.value() <= 0.0 {
        return Err(Error::InvalidParameter(
            "the fundamental solution needs a positive wave speed".into(),
        ));
    }
    let p = p.check_domain()?;
    let shift = mu.value() * p.t;
    Ok((heaviside(p.x + shift) - heaviside(p.x - shift)) / (2.0 * mu.value()))
}

/// The solution snapshot `phi_mu`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveSnapshot {
    mu: Parameter,
}

impl WaveSnapshot {
    pub fn new(mu: f64) -> Result<Self> {
        Ok(Self {
            mu: Parameter::new(mu)?,
        })
    }

    pub fn mu(&self) -> Parameter {
        self.mu
    }

    pub fn eval(&self, p: SpaceTimePoint) -> Result<f64> {
        eval_phi(self.mu, p)
    }

    /// `||phi_mu||^2 = 2 - mu`.
    pub fn norm_squared(&self) -> f64 {
        2.0 - self.mu.value()
    }
}

/// `psi_{M,m} = phi_{(m-1)/M} - phi_{m/M}`, supported on the two wedges
/// between neighbouring cone lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HatFunction {
    grid: usize,
    index: usize,
}

impl HatFunction {
    /// `grid` is `M >= 1`, `index` is `m` in `1..=M`.
    pub fn new(grid: usize, index: usize) -> Result<Self> {
        if grid == 0 {
            return Err(Error::InvalidParameter(
                "grid count must be positive".into(),
            ));
        }
        if index == 0 || index > grid {
            return Err(Error::IndexOutOfRange { index, max: grid });
        }
        Ok(Self { grid, index })
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Speeds of the two cone lines bounding the wedges, `(m-1)/M` and `m/M`.
    pub fn speeds(&self) -> (f64, f64) {
        let m = self.grid as f64;
        ((self.index - 1) as f64 / m, self.index as f64 / m)
    }

    pub fn eval(&self, p: SpaceTimePoint) -> Result<f64> {
        let p = p.check_domain()?;
        let (inner, outer) = self.speeds();
        let (lo, hi) = (inner * p.t, outer * p.t);
        Ok(if p.x >= -hi && p.x < -lo {
            1.0
        } else if p.x >= lo && p.x < hi {
            -1.0
        } else {
            0.0
        })
    }

    pub fn norm_squared(&self) -> f64 {
        1.0 / self.grid as f64
    }

    /// `sqrt(M) psi_{M,m}`, which has unit norm.
    pub fn orthonormal(&self) -> Combination {
        Combination::from(*self).scaled((self.grid as f64).sqrt())
    }
}

/// Evaluates `psi_{M,m}` at `p`.
pub fn eval_psi(grid: usize, index: usize, p: SpaceTimePoint) -> Result<f64> {
    HatFunction::new(grid, index)?.eval(p)
}

/// Snapshot family of a generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Wave,
    Smooth,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Wave => "wave",
            Family::Smooth => "smooth",
        })
    }
}

/// A generating function with a closed-form inner product.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Atom {
    /// The cone solution `phi_mu`.
    Wave(f64),
    /// The analytic contrast function `exp(-s (t + x + 2))`.
    Smooth(f64),
}

impl Atom {
    pub fn family(&self) -> Family {
        match self {
            Atom::Wave(_) => Family::Wave,
            Atom::Smooth(_) => Family::Smooth,
        }
    }

    fn value_at(&self, t: f64, x: f64) -> f64 {
        match *self {
            Atom::Wave(mu) => cone_value(mu, t, x),
            Atom::Smooth(s) => (-s * (t + x + 2.0)).exp(),
        }
    }
}

fn atom_inner(a: &Atom, b: &Atom) -> Result<f64> {
    match (*a, *b) {
        (Atom::Wave(p), Atom::Wave(q)) => Ok(2.0 - p.max(q)),
        (Atom::Smooth(p), Atom::Smooth(q)) => Ok(smooth_inner_product(p, q)),
        _ => Err(Error::IncompatibleFamilies),
    }
}

/// A finite linear combination of generators from one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Combination {
    terms: Vec<(f64, Atom)>,
    label: String,
}

impl Combination {
    pub fn atom(atom: Atom) -> Self {
        let label = match atom {
            Atom::Wave(mu) => format!("phi({mu})"),
            Atom::Smooth(s) => format!("smooth({s})"),
        };
        Self {
            terms: vec![(1.0, atom)],
            label,
        }
    }

    pub fn new(terms: Vec<(f64, Atom)>, label: impl Into<String>) -> Self {
        Self {
            terms,
            label: label.into(),
        }
    }

    pub fn terms(&self) -> &[(f64, Atom)] {
        &self.terms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for (coef, _) in &mut self.terms {
            *coef *= c;
        }
        if c != 1.0 {
            self.label = format!("{c}*{}", self.label);
        }
        self
    }

    /// The common family of all terms, `None` for the empty combination.
    pub fn family(&self) -> Result<Option<Family>> {
        let mut family = None;
        for (_, atom) in &self.terms {
            match family {
                None => family = Some(atom.family()),
                Some(f) if f != atom.family() => return Err(Error::IncompatibleFamilies),
                _ => {}
            }
        }
        Ok(family)
    }

    pub fn eval(&self, p: SpaceTimePoint) -> Result<f64> {
        let p = p.check_domain()?;
        Ok(self
            .terms
            .iter()
            .map(|(c, a)| c * a.value_at(p.t, p.x))
            .sum())
    }
}

impl From<WaveSnapshot> for Combination {
    fn from(s: WaveSnapshot) -> Self {
        Combination::atom(Atom::Wave(s.mu.value()))
    }
}

impl From<HatFunction> for Combination {
    fn from(h: HatFunction) -> Self {
        let (a, b) = h.speeds();
        Combination::new(
            vec![(1.0, Atom::Wave(a)), (-1.0, Atom::Wave(b))],
            format!("psi({},{})", h.grid, h.index),
        )
    }
}

/// `(phi_a, phi_b)_{L2} = 2 - max(a, b)`.
///
/// Both cone functions vanish on the middle wedge of the faster one and
/// agree with each other elsewhere, so the product is the indicator of the
/// outer regions, of area `2 - 2 max(a, b) t` at time `t`.
pub fn inner_product_phi(a: f64, b: f64) -> Result<f64> {
    Parameter::new(a)?;
    Parameter::new(b)?;
    Ok(2.0 - a.max(b))
}

/// Exact L2 inner product by bilinear expansion.
pub fn inner_product(f: &Combination, g: &Combination) -> Result<f64> {
    let mut sum = 0.0;
    for (cf, af) in &f.terms {
        for (cg, ag) in &g.terms {
            sum += cf * cg * atom_inner(af, ag)?;
        }
    }
    Ok(sum)
}

/// A field that is smooth away from finitely many lines `x = slope * t`
/// through the origin.
pub trait PiecewiseField {
    fn value(&self, t: f64, x: f64) -> f64;
    fn cut_slopes(&self) -> Vec<f64>;
}

impl PiecewiseField for WaveSnapshot {
    fn value(&self, t: f64, x: f64) -> f64 {
        cone_value(self.mu.value(), t, x)
    }

    fn cut_slopes(&self) -> Vec<f64> {
        let mu = self.mu.value();
        if mu == 0.0 {
            vec![0.0]
        } else {
            vec![-mu, mu]
        }
    }
}

/// The initial datum frozen in time, `f(t, x) = u_0(x)`. A solution only
/// for zero speed.
#[derive(Clone, Copy, Debug, Default)]
pub struct FrozenInitialData;

impl PiecewiseField for FrozenInitialData {
    fn value(&self, _t: f64, x: f64) -> f64 {
        initial_value(x)
    }

    fn cut_slopes(&self) -> Vec<f64> {
        vec![0.0]
    }
}

/// Interior breakpoints placed on each bump axis, in reference coordinates.
/// The profile is flat but non-analytic at the support ends; splitting its
/// support here restores fast Gauss–Legendre convergence.
const BUMP_SHOULDER: f64 = 0.8;

/// Tensor product of the compactly supported profile
/// `exp(1 - 1 / (1 - s^2))` in each axis, peak value `amplitude`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpTestFunction {
    pub center: SpaceTimePoint,
    pub radius_t: f64,
    pub radius_x: f64,
    pub amplitude: f64,
}

fn profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

fn profile_second(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - s * s;
    let g1 = -2.0 * s / (q * q);
    let g2 = -(2.0 + 6.0 * s * s) / (q * q * q);
    (g2 + g1 * g1) * (1.0 - 1.0 / q).exp()
}

impl BumpTestFunction {
    /// Requires positive radii and support strictly inside `(0, 1) x (-1, 1)`.
    pub fn new(center: SpaceTimePoint, radius_t: f64, radius_x: f64) -> Result<Self> {
        if !(radius_t > 0.0 && radius_x > 0.0) {
            return Err(Error::InvalidParameter(
                "bump radii must be positive".into(),
            ));
        }
        let inside = center.t - radius_t > 0.0
            && center.t + radius_t < 1.0
            && center.x - radius_x > -1.0
            && center.x + radius_x < 1.0;
        if !inside {
            return Err(Error::SupportNotInterior);
        }
        Ok(Self {
            center,
            radius_t,
            radius_x,
            amplitude: 1.0,
        })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Samples a bump with radii in `[0.05, 0.3] x [0.05, 0.4]` and support
    /// at least `1e-3` away from the domain boundary.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let margin = 1e-3;
        let radius_t = rng.random_range(0.05..0.3);
        let radius_x = rng.random_range(0.05..0.4);
        let t = rng.random_range(radius_t + margin..1.0 - radius_t - margin);
        let x = rng.random_range(-1.0 + radius_x + margin..1.0 - radius_x - margin);
        Self {
            center: SpaceTimePoint::new(t, x),
            radius_t,
            radius_x,
            amplitude: 1.0,
        }
    }

    fn local(&self, t: f64, x: f64) -> (f64, f64) {
        (
            (t - self.center.t) / self.radius_t,
            (x - self.center.x) / self.radius_x,
        )
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        let (s, r) = self.local(t, x);
        self.amplitude * profile(s) * profile(r)
    }

    pub fn d_tt(&self, t: f64, x: f64) -> f64 {
        let (s, r) = self.local(t, x);
        self.amplitude * profile_second(s) * profile(r) / (self.radius_t * self.radius_t)
    }

    pub fn d_xx(&self, t: f64, x: f64) -> f64 {
        let (s, r) = self.local(t, x);
        self.amplitude * profile(s) * profile_second(r) / (self.radius_x * self.radius_x)
    }

    fn t_range(&self) -> (f64, f64) {
        (self.center.t - self.radius_t, self.center.t + self.radius_t)
    }

    fn x_range(&self) -> (f64, f64) {
        (self.center.x - self.radius_x, self.center.x + self.radius_x)
    }

    fn x_fixed_breaks(&self) -> [f64; 4] {
        let (lo, hi) = self.x_range();
        let c = self.center.x;
        let d = BUMP_SHOULDER * self.radius_x;
        [lo, c - d, c + d, hi]
    }
}

/// Quadrature approximation of `∫∫ f (phi_tt - mu^2 phi_xx) dx dt` for a
/// bump test function `phi`.
///
/// The bump rectangle is cut along the field's lines `x = slope * t` and
/// along the bump shoulders. The outer time integral is split wherever a
/// cut line crosses a fixed x-breakpoint, so every piece is smooth and
/// receives its own `points`-point Gauss–Legendre rule per axis.
pub fn weak_residual<F: PiecewiseField + ?Sized>(
    field: &F,
    bump: &BumpTestFunction,
    mu: f64,
    points: usize,
) -> Result<f64> {
    let mu = Parameter::new(mu)?.value();
    if points < 8 {
        return Err(Error::QuadratureOrder(points));
    }
    // Re-validate support, the fields are public.
    BumpTestFunction::new(bump.center, bump.radius_t, bump.radius_x)?;
    if bump.amplitude == 0.0 {
        return Ok(0.0);
    }
    let rule = GaussRule::new(points)?;
    let slopes = field.cut_slopes();
    let (t_lo, t_hi) = bump.t_range();
    let (x_lo, x_hi) = bump.x_range();
    let x_fixed = bump.x_fixed_breaks();
    let c = bump.center.t;
    let d = BUMP_SHOULDER * bump.radius_t;

    let mut t_interior = vec![c - d, c + d];
    for &s in slopes.iter().filter(|s| **s != 0.0) {
        t_interior.extend(x_fixed.iter().map(|xe| xe / s));
    }
    let t_breaks = breakpoints(t_lo, t_hi, t_interior);

    let mu2 = mu * mu;
    let inner = |t: f64| -> f64 {
        let x_breaks = breakpoints(
            x_lo,
            x_hi,
            x_fixed[1..3]
                .iter()
                .copied()
                .chain(slopes.iter().map(|s| s * t)),
        );
        rule.integrate_pieces(&x_breaks, |x| {
            field.value(t, x) * (bump.d_tt(t, x) - mu2 * bump.d_xx(t, x))
        })
    };
    Ok(rule.integrate_pieces(&t_breaks, inner))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(t: f64, x: f64) -> SpaceTimePoint {
        SpaceTimePoint::new(t, x)
    }

    fn mu(v: f64) -> Parameter {
        Parameter::new(v).unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(eval_phi(mu(0.5), pt(0.5, -0.5)).unwrap(), 1.0);
        assert_eq!(eval_phi(mu(0.5), pt(0.5, 0.0)).unwrap(), 0.0);
        assert_eq!(eval_phi(mu(0.0), pt(0.7, 0.0)).unwrap(), -1.0);
    }

    #[test]
    fn phi_rejects_points_outside_domain() {
        assert!(matches!(
            eval_phi(mu(0.5), pt(1.5, 0.0)),
            Err(Error::OutsideDomain { .. })
        ));
        assert!(eval_phi(mu(0.5), pt(0.5, -1.01)).is_err());
        assert!(eval_phi(mu(0.5), pt(f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn parameter_range() {
        assert!(Parameter::new(-0.1).is_err());
        assert!(Parameter::new(1.1).is_err());
        assert!(Parameter::new(f64::NAN).is_err());
        assert!(Parameter::new(1.0).is_ok());
    }

    #[test]
    fn psi_examples() {
        assert_eq!(eval_psi(3, 2, pt(0.5, -0.25)).unwrap(), 1.0);
        assert_eq!(eval_psi(3, 2, pt(0.5, 0.0)).unwrap(), 0.0);
        assert_eq!(eval_psi(3, 2, pt(0.5, 0.2)).unwrap(), -1.0);
        assert!(matches!(
            eval_psi(3, 4, pt(0.5, 0.0)),
            Err(Error::IndexOutOfRange { index: 4, max: 3 })
        ));
        assert!(eval_psi(3, 0, pt(0.5, 0.0)).is_err());
    }

    #[test]
    fn dalembert_examples() {
        assert_eq!(dalembert_eval(mu(0.5), pt(0.5, 0.0)).unwrap(), 0.0);
        assert_eq!(dalembert_eval(mu(1.0), pt(0.25, 0.5)).unwrap(), -1.0);
        for &x in &[-0.9, -0.1, 0.0, 0.3] {
            assert_eq!(
                dalembert_eval(mu(0.0), pt(0.6, x)).unwrap(),
                initial_value(x)
            );
        }
    }

    #[test]
    fn fundamental_examples() {
        assert_eq!(eval_fundamental(mu(1.0), pt(0.5, 0.0)).unwrap(), 0.5);
        assert_eq!(eval_fundamental(mu(1.0), pt(0.5, 1.0)).unwrap(), 0.0);
        assert_eq!(eval_fundamental(mu(0.5), pt(0.0, 0.3)).unwrap(), 0.0);
        assert!(matches!(
            eval_fundamental(mu(0.0), pt(0.5, 0.0)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn closed_form_gram_values() {
        assert_eq!(inner_product_phi(0.0, 0.0).unwrap(), 2.0);
        assert_eq!(inner_product_phi(0.25, 0.5).unwrap(), 1.5);
        assert!(inner_product_phi(0.2, 1.2).is_err());
        let half = Combination::from(WaveSnapshot::new(0.5).unwrap());
        assert_eq!(inner_product(&half, &half).unwrap(), 1.5);
    }

    #[test]
    fn hat_orthogonality() {
        let h = |m, k| Combination::from(HatFunction::new(m, k).unwrap());
        assert_eq!(inner_product(&h(3, 1), &h(3, 2)).unwrap(), 0.0);
        assert_eq!(inner_product(&h(4, 2), &h(4, 2)).unwrap(), 0.25);
        let o = HatFunction::new(8, 3).unwrap().orthonormal();
        assert!((inner_product(&o, &o).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_families_rejected() {
        let w = Combination::atom(Atom::Wave(0.5));
        let s = Combination::atom(Atom::Smooth(0.5));
        assert!(matches!(
            inner_product(&w, &s),
            Err(Error::IncompatibleFamilies)
        ));
        let mixed = Combination::new(vec![(1.0, Atom::Wave(0.1)), (1.0, Atom::Smooth(0.1))], "m");
        assert!(mixed.family().is_err());
    }

    #[test]
    fn boundary_and_initial_conditions() {
        for &m in &[0.0, 0.3, 1.0] {
            for &t in &[0.0, 0.4, 0.99] {
                assert_eq!(eval_phi(mu(m), pt(t, -1.0)).unwrap(), 1.0);
                assert_eq!(eval_phi(mu(m), pt(t, 1.0)).unwrap(), -1.0);
            }
            for &x in &[-0.7, -1e-9, 0.0, 0.5] {
                assert_eq!(eval_phi(mu(m), pt(0.0, x)).unwrap(), initial_value(x));
            }
        }
    }

    #[test]
    fn bump_support_validation() {
        assert!(BumpTestFunction::new(pt(0.5, 0.0), 0.2, 0.2).is_ok());
        assert!(matches!(
            BumpTestFunction::new(pt(0.1, 0.0), 0.2, 0.2),
            Err(Error::SupportNotInterior)
        ));
        assert!(BumpTestFunction::new(pt(0.5, 0.9), 0.2, 0.2).is_err());
        assert!(BumpTestFunction::new(pt(0.5, 0.0), 0.0, 0.2).is_err());
    }

    #[test]
    fn bump_second_derivative_matches_finite_differences() {
        let b = BumpTestFunction::new(pt(0.5, 0.1), 0.2, 0.3).unwrap();
        let h = 1e-4;
        for &(t, x) in &[(0.45, 0.05), (0.6, 0.2), (0.38, -0.1)] {
            let fd_tt = (b.value(t + h, x) - 2.0 * b.value(t, x) + b.value(t - h, x)) / (h * h);
            let fd_xx = (b.value(t, x + h) - 2.0 * b.value(t, x) + b.value(t, x - h)) / (h * h);
            assert!((fd_tt - b.d_tt(t, x)).abs() < 1e-4 * (1.0 + fd_tt.abs()));
            assert!((fd_xx - b.d_xx(t, x)).abs() < 1e-4 * (1.0 + fd_xx.abs()));
        }
    }

    #[test]
    fn weak_residual_examples() {
        let bump = BumpTestFunction::new(pt(0.5, 0.0), 0.2, 0.2).unwrap();
        let phi = WaveSnapshot::new(0.5).unwrap();
        assert!(weak_residual(&phi, &bump, 0.5, 64).unwrap().abs() < 1e-6);
        assert_eq!(
            weak_residual(&phi, &bump.with_amplitude(0.0), 0.5, 64).unwrap(),
            0.0
        );
        assert!(matches!(
            weak_residual(&phi, &bump, 0.5, 4),
            Err(Error::QuadratureOrder(4))
        ));
    }

    #[test]
    fn frozen_jump_is_not_a_solution() {
        // Off-centre in x so that the jump sees a nonzero slope of the bump.
        let bump = BumpTestFunction::new(pt(0.5, 0.1), 0.2, 0.2).unwrap();
        let r = weak_residual(&FrozenInitialData, &bump, 0.5, 64).unwrap();
        // -mu^2 ∫ b(t) dt * 2 ∂_x bump(x = 0): reference from separable 1D quadrature.
        let rule = GaussRule::new(200).unwrap();
        let time_mass = rule.integrate(0.3, 0.7, |t| profile((t - 0.5) / 0.2));
        let s = (0.0 - 0.1) / 0.2;
        let q = 1.0 - s * s;
        let slope = -2.0 * s / (q * q) * profile(s) / 0.2;
        let expected = -0.25 * time_mass * 2.0 * slope;
        assert!((r - expected).abs() < 1e-9, "{r} vs {expected}");
        assert!(r.abs() > 1e-3);
    }

    #[test]
    fn random_bumps_are_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let b = BumpTestFunction::random(&mut rng);
            assert!(BumpTestFunction::new(b.center, b.radius_t, b.radius_x).is_ok());
        }
    }
}

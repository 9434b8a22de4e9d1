//! Oriented-varifold kernel inner products and distances between curves.
//!
//! A curve is represented by the measure `μ_c = ∫ δ_(c(θ), v(θ)) ds`, and two
//! measures are compared through the separable kernel
//! `k(x, u, y, v) = ρ(|x − y|²) γ(⟨u, v⟩)`:
//!
//! ```text
//! ⟨μ₁, μ₂⟩ = Σ_i Σ_j ρ(|x_i − y_j|²) γ(⟨u_i, v_j⟩) w_i w_j
//! ```
//!
//! with arc-length weights `w = (quadrature weight) · |c'|`.

use std::borrow::Cow;

use crate::bspline::{DiscreteCurve, QuadratureGrid, SplineSpace};
use crate::error::{Error, Result};
use crate::metric::{checked_length, curve_jets};
use crate::scalar::Scalar;
use crate::vec2::{self, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadialKernel {
    /// ρ(s) = exp(−s/σ²)
    Gaussian,
    /// ρ(s) = 1 / (1 + s/σ²)
    Cauchy,
    /// ρ ≡ 1. Does not separate curves; for testing.
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ZonalKernel {
    /// γ ≡ 1
    Constant,
    /// γ(u) = u (currents)
    Linear,
    /// γ(u) = u² (unoriented)
    Squared,
    /// γ(u) = exp(2(u − 1)/σ²)
    GaussianOriented,
}

impl RadialKernel {
    pub const ALL: [RadialKernel; 3] = [RadialKernel::Gaussian, RadialKernel::Cauchy, RadialKernel::Constant];
}

impl ZonalKernel {
    pub const ALL: [ZonalKernel; 4] = [
        ZonalKernel::Constant,
        ZonalKernel::Linear,
        ZonalKernel::Squared,
        ZonalKernel::GaussianOriented,
    ];

    /// γ(−u) = γ(u): the distance ignores orientation.
    pub fn is_even(self) -> bool {
        matches!(self, ZonalKernel::Constant | ZonalKernel::Squared)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarifoldKernel<T> {
    pub radial: RadialKernel,
    /// σ_geom, in ambient units.
    pub radial_scale: T,
    pub zonal: ZonalKernel,
    /// σ_grass, dimensionless.
    pub zonal_scale: T,
}

impl<T: Scalar> Default for VarifoldKernel<T> {
    fn default() -> Self {
        Self {
            radial: RadialKernel::Gaussian,
            radial_scale: T::lit(0.1),
            zonal: ZonalKernel::GaussianOriented,
            zonal_scale: T::lit(0.3),
        }
    }
}

impl<T: Scalar> VarifoldKernel<T> {
    pub fn new(radial: RadialKernel, radial_scale: T, zonal: ZonalKernel, zonal_scale: T) -> Self {
        Self {
            radial,
            radial_scale,
            zonal,
            zonal_scale,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radial_scale > T::zero()) || !(self.zonal_scale > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "kernel scales must be positive, got {} and {}",
                self.radial_scale, self.zonal_scale
            )));
        }
        if self.radial == RadialKernel::Constant {
            log::warn!("constant radial kernel does not separate curves");
        }
        Ok(())
    }

    /// Kernel with the radial scale multiplied by `factor`.
    pub fn rescaled(&self, factor: T) -> Self {
        Self {
            radial_scale: self.radial_scale * factor,
            ..*self
        }
    }

    /// (ρ(s), ρ'(s))
    #[inline]
    pub fn radial(&self, s: T) -> (T, T) {
        let inv = T::one() / (self.radial_scale * self.radial_scale);
        match self.radial {
            RadialKernel::Gaussian => {
                let v = (-s * inv).exp();
                (v, -inv * v)
            }
            RadialKernel::Cauchy => {
                let d = T::one() / (T::one() + s * inv);
                (d, -inv * d * d)
            }
            RadialKernel::Constant => (T::one(), T::zero()),
        }
    }

    /// (γ(u), γ'(u))
    #[inline]
    pub fn zonal(&self, u: T) -> (T, T) {
        match self.zonal {
            ZonalKernel::Constant => (T::one(), T::zero()),
            ZonalKernel::Linear => (u, T::one()),
            ZonalKernel::Squared => (u * u, T::lit(2.0) * u),
            ZonalKernel::GaussianOriented => {
                let k = T::lit(2.0) / (self.zonal_scale * self.zonal_scale);
                let v = (k * (u - T::one())).exp();
                (v, k * v)
            }
        }
    }
}

/// Rigid motion plus scaling acting as `x ↦ r A (x + b)`: translate first,
/// then rotate by `angle` and scale by `scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity<T> {
    pub scale: T,
    pub angle: T,
    pub translation: Point<T>,
}

impl<T: Scalar> Default for Similarity<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Scalar> Similarity<T> {
    pub fn identity() -> Self {
        Self {
            scale: T::one(),
            angle: T::zero(),
            translation: vec2::zero(),
        }
    }

    pub fn new(scale: T, angle: T, translation: Point<T>) -> Result<Self> {
        if !(scale > T::zero()) {
            return Err(Error::InvalidArgument(format!("similarity scale must be positive, got {scale}")));
        }
        Ok(Self {
            scale,
            angle,
            translation,
        })
    }

    #[inline]
    pub fn apply(&self, p: Point<T>) -> Point<T> {
        vec2::scale(self.scale, vec2::rotate(self.angle, vec2::add(p, self.translation)))
    }

    /// Image of a direction (no translation, no scaling).
    #[inline]
    pub fn apply_direction(&self, u: Point<T>) -> Point<T> {
        vec2::rotate(self.angle, u)
    }
}

/// Positions, unit tangents and arc-length weights of a curve at sample sites.
#[derive(Debug, Clone, PartialEq)]
pub struct VarifoldEvalGrid<T> {
    pub points: Vec<Point<T>>,
    pub tangents: Vec<Point<T>>,
    pub weights: Vec<T>,
}

/// Where a curve is sampled for varifold evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VarifoldSampling {
    /// The θ-quadrature sites of the spline space.
    #[default]
    Quadrature,
    /// `n` equally spaced midpoint sites.
    Uniform(usize),
}

pub(crate) fn sampling_grid<T: Scalar>(
    space: &SplineSpace<T>,
    sampling: VarifoldSampling,
) -> Result<Cow<'_, QuadratureGrid<T>>> {
    match sampling {
        VarifoldSampling::Quadrature => Ok(Cow::Borrowed(space.theta_grid())),
        VarifoldSampling::Uniform(n) => Ok(Cow::Owned(QuadratureGrid::midpoint(space.theta_basis(), n)?)),
    }
}

impl<T: Scalar> VarifoldEvalGrid<T> {
    pub fn from_parts(points: Vec<Point<T>>, tangents: Vec<Point<T>>, weights: Vec<T>) -> Result<Self> {
        if points.len() != tangents.len() || points.len() != weights.len() {
            return Err(Error::ShapeMismatch("grid arrays differ in length".into()));
        }
        Ok(Self {
            points,
            tangents,
            weights,
        })
    }

    /// Samples `curve` at the θ-quadrature sites.
    pub fn from_curve(space: &SplineSpace<T>, curve: &DiscreteCurve<T>) -> Result<Self> {
        Self::sampled(space, curve, VarifoldSampling::Quadrature)
    }

    pub fn sampled(space: &SplineSpace<T>, curve: &DiscreteCurve<T>, sampling: VarifoldSampling) -> Result<Self> {
        space.check_curve(curve)?;
        let grid = sampling_grid(space, sampling)?;
        Self::on_grid(&grid, &curve.ctrl)
    }

    pub(crate) fn on_grid(grid: &QuadratureGrid<T>, ctrl: &[Point<T>]) -> Result<Self> {
        Ok(Self::with_speeds(grid, ctrl)?.0)
    }

    /// Grid plus |c'| at each site.
    fn with_speeds(grid: &QuadratureGrid<T>, ctrl: &[Point<T>]) -> Result<(Self, Vec<T>)> {
        let jets = curve_jets(grid, ctrl);
        let (_, speeds) = checked_length(grid, &jets, None)?;
        let out = Self {
            points: jets.iter().map(|j| j.value).collect(),
            tangents: jets.iter().zip(&speeds).map(|(j, &s)| vec2::scale(T::one() / s, j.d1)).collect(),
            weights: speeds.iter().zip(&grid.weights).map(|(&s, &w)| s * w).collect(),
        };
        Ok((out, speeds))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Σ w_i, the length estimate.
    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Union of the two measures.
    pub fn concat(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.points.extend_from_slice(&other.points);
        out.tangents.extend_from_slice(&other.tangents);
        out.weights.extend_from_slice(&other.weights);
        out
    }

    /// The measure of the image curve under `sim`: points map through
    /// `r A (x + b)`, tangents rotate, arc-length weights scale by `r`.
    pub fn transformed(&self, sim: &Similarity<T>) -> Self {
        Self {
            points: self.points.iter().map(|&p| sim.apply(p)).collect(),
            tangents: self.tangents.iter().map(|&u| sim.apply_direction(u)).collect(),
            weights: self.weights.iter().map(|&w| w * sim.scale).collect(),
        }
    }

    /// Reverse orientation of the measure (tangents negated).
    pub fn reversed(&self) -> Self {
        Self {
            points: self.points.clone(),
            tangents: self.tangents.iter().map(|&u| vec2::scale(-T::one(), u)).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// `r A (c + b)` applied to a curve's control points (exact, since the map
/// is affine).
pub fn apply_similarity<T: Scalar>(curve: &DiscreteCurve<T>, sim: &Similarity<T>) -> DiscreteCurve<T> {
    curve.map_ctrl(|p| sim.apply(p))
}

/// ⟨μ₁, μ₂⟩
pub fn varifold_inner<T: Scalar>(a: &VarifoldEvalGrid<T>, b: &VarifoldEvalGrid<T>, kernel: &VarifoldKernel<T>) -> T {
    let mut total = T::zero();
    for i in 0..a.len() {
        let (x, u, wi) = (a.points[i], a.tangents[i], a.weights[i]);
        let mut row = T::zero();
        for j in 0..b.len() {
            let s = vec2::norm_sq(vec2::sub(x, b.points[j]));
            let (rho, _) = kernel.radial(s);
            let (gamma, _) = kernel.zonal(vec2::dot(u, b.tangents[j]));
            row += rho * gamma * b.weights[j];
        }
        total += wi * row;
    }
    total
}

/// ‖μ₁ − μ₂‖², clamped at zero.
pub fn varifold_dist_sq<T: Scalar>(a: &VarifoldEvalGrid<T>, b: &VarifoldEvalGrid<T>, kernel: &VarifoldKernel<T>) -> T {
    let d = varifold_inner(a, a, kernel) - T::lit(2.0) * varifold_inner(a, b, kernel) + varifold_inner(b, b, kernel);
    d.max(T::zero())
}

/// Squared distance between two spline curves sampled at the quadrature sites.
pub fn varifold_dist_sq_curves<T: Scalar>(
    space: &SplineSpace<T>,
    c1: &DiscreteCurve<T>,
    c2: &DiscreteCurve<T>,
    kernel: &VarifoldKernel<T>,
) -> Result<T> {
    let a = VarifoldEvalGrid::from_curve(space, c1)?;
    let b = VarifoldEvalGrid::from_curve(space, c2)?;
    Ok(varifold_dist_sq(&a, &b, kernel))
}

/// Site-level gradient of an inner product with respect to the points,
/// the (free, unnormalized) tangent vectors and the weights of one side.
struct SiteGrad<T> {
    dx: Vec<Point<T>>,
    du: Vec<Point<T>>,
    dw: Vec<T>,
}

impl<T: Scalar> SiteGrad<T> {
    fn zeros(n: usize) -> Self {
        Self {
            dx: vec![vec2::zero(); n],
            du: vec![vec2::zero(); n],
            dw: vec![T::zero(); n],
        }
    }
}

/// ⟨a, b⟩ with the gradients with respect to a's and (optionally) b's
/// site quantities, accumulated with factor `scale`.
fn inner_with_grads<T: Scalar>(
    a: &VarifoldEvalGrid<T>,
    b: &VarifoldEvalGrid<T>,
    kernel: &VarifoldKernel<T>,
    scale: T,
    ga: &mut SiteGrad<T>,
    mut gb: Option<&mut SiteGrad<T>>,
) -> T {
    let two = T::lit(2.0);
    let mut total = T::zero();
    for i in 0..a.len() {
        let (x, u, wi) = (a.points[i], a.tangents[i], a.weights[i]);
        let mut row = T::zero();
        let mut dx = vec2::zero();
        let mut du = vec2::zero();
        for j in 0..b.len() {
            let diff = vec2::sub(x, b.points[j]);
            let (rho, drho) = kernel.radial(vec2::norm_sq(diff));
            let v = b.tangents[j];
            let (gamma, dgamma) = kernel.zonal(vec2::dot(u, v));
            let wj = b.weights[j];
            let k = rho * gamma;
            row += k * wj;
            let fx = two * drho * gamma * wi * wj;
            vec2::axpy(&mut dx, fx, diff);
            let fu = rho * dgamma * wi * wj;
            vec2::axpy(&mut du, fu, v);
            if let Some(gb) = gb.as_deref_mut() {
                vec2::axpy(&mut gb.dx[j], -fx * scale, diff);
                vec2::axpy(&mut gb.du[j], fu * scale, u);
                gb.dw[j] += scale * k * wi;
            }
        }
        total += wi * row;
        vec2::axpy(&mut ga.dx[i], scale, dx);
        vec2::axpy(&mut ga.du[i], scale, du);
        ga.dw[i] += scale * row;
    }
    total
}

/// Chain rule from site quantities to control points: x = Σ C_j c_j,
/// u = c'/|c'|, w = ω |c'|.
fn pull_back<T: Scalar>(grid: &QuadratureGrid<T>, tangents: &[Point<T>], speeds: &[T], g: &SiteGrad<T>, n_ctrl: usize) -> Vec<Point<T>> {
    let mut out = vec![vec2::zero(); n_ctrl];
    for (b, basis) in grid.basis.iter().enumerate() {
        let u = tangents[b];
        let gu = g.du[b];
        let mut gp = vec2::scale(T::one() / speeds[b], vec2::sub(gu, vec2::scale(vec2::dot(gu, u), u)));
        vec2::axpy(&mut gp, g.dw[b] * grid.weights[b], u);
        for (j, d) in basis.iter() {
            vec2::axpy(&mut out[j], d[0], g.dx[b]);
            vec2::axpy(&mut out[j], d[1], gp);
        }
    }
    out
}

/// Squared varifold distance between two spline curves with the gradients
/// with respect to both control arrays.
#[derive(Debug, Clone)]
pub struct DistanceGradients<T> {
    pub dist_sq: T,
    pub grad_first: Vec<Point<T>>,
    pub grad_second: Vec<Point<T>>,
}

pub fn varifold_dist_sq_with_gradients<T: Scalar>(
    space: &SplineSpace<T>,
    c1: &DiscreteCurve<T>,
    c2: &DiscreteCurve<T>,
    kernel: &VarifoldKernel<T>,
    sampling: VarifoldSampling,
) -> Result<DistanceGradients<T>> {
    space.check_curve(c1)?;
    space.check_curve(c2)?;
    let grid = sampling_grid(space, sampling)?;
    let n = space.config().ctrl_theta;
    let (a, s1) = VarifoldEvalGrid::with_speeds(&grid, &c1.ctrl)?;
    let (b, s2) = VarifoldEvalGrid::with_speeds(&grid, &c2.ctrl)?;
    let two = T::lit(2.0);
    let mut ga = SiteGrad::zeros(a.len());
    let mut gb = SiteGrad::zeros(b.len());
    // Self terms: d⟨a,a⟩ = 2 × (left derivative), by kernel symmetry.
    let aa = inner_with_grads(&a, &a, kernel, two, &mut ga, None);
    let bb = inner_with_grads(&b, &b, kernel, two, &mut gb, None);
    let ab = inner_with_grads(&a, &b, kernel, -two, &mut ga, Some(&mut gb));
    let raw = aa - two * ab + bb;
    let (dist_sq, grad_first, grad_second) = if raw > T::zero() {
        (
            raw,
            pull_back(&grid, &a.tangents, &s1, &ga, n),
            pull_back(&grid, &b.tangents, &s2, &gb, n),
        )
    } else {
        (T::zero(), vec![vec2::zero(); n], vec![vec2::zero(); n])
    };
    Ok(DistanceGradients {
        dist_sq,
        grad_first,
        grad_second,
    })
}

/// d²(c1, μ₂) and its gradient with respect to c1's control points, with
/// the second measure held fixed.
pub fn varifold_dist_sq_gradient<T: Scalar>(
    space: &SplineSpace<T>,
    c1: &DiscreteCurve<T>,
    target: &VarifoldEvalGrid<T>,
    kernel: &VarifoldKernel<T>,
) -> Result<(T, Vec<Point<T>>)> {
    space.check_curve(c1)?;
    let grid = space.theta_grid();
    let (a, speeds) = VarifoldEvalGrid::with_speeds(grid, &c1.ctrl)?;
    let two = T::lit(2.0);
    let mut ga = SiteGrad::zeros(a.len());
    let aa = inner_with_grads(&a, &a, kernel, two, &mut ga, None);
    let ab = inner_with_grads(&a, target, kernel, -two, &mut ga, None);
    let bb = varifold_inner(target, target, kernel);
    let raw = aa - two * ab + bb;
    let n = space.config().ctrl_theta;
    if raw > T::zero() {
        Ok((raw, pull_back(grid, &a.tangents, &speeds, &ga, n)))
    } else {
        Ok((T::zero(), vec![vec2::zero(); n]))
    }
}

/// Gradient of ⟨μ_c, μ_c⟩ with respect to c's control points.
pub fn self_inner_gradient<T: Scalar>(
    space: &SplineSpace<T>,
    curve: &DiscreteCurve<T>,
    kernel: &VarifoldKernel<T>,
) -> Result<(T, Vec<Point<T>>)> {
    space.check_curve(curve)?;
    let grid = space.theta_grid();
    let (a, speeds) = VarifoldEvalGrid::with_speeds(grid, &curve.ctrl)?;
    let mut ga = SiteGrad::zeros(a.len());
    let aa = inner_with_grads(&a, &a, kernel, T::lit(2.0), &mut ga, None);
    Ok((aa, pull_back(grid, &a.tangents, &speeds, &ga, space.config().ctrl_theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::{fit_curve_with_params, SplineConfig};
    use std::f64::consts::TAU;

    fn curve(cfg: SplineConfig, f: impl Fn(f64) -> Point<f64>) -> DiscreteCurve<f64> {
        let m = 8 * cfg.ctrl_theta;
        let params: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
        let pts: Vec<_> = params.iter().map(|&t| f(t)).collect();
        fit_curve_with_params(&pts, &params, &cfg).unwrap().0
    }

    #[test]
    fn kernel_derivatives_match_finite_differences() {
        for radial in RadialKernel::ALL {
            for zonal in ZonalKernel::ALL {
                let k = VarifoldKernel::<f64>::new(radial, 0.7, zonal, 0.4);
                let h = 1e-6;
                let (_, d) = k.radial(0.3);
                let fd = (k.radial(0.3 + h).0 - k.radial(0.3 - h).0) / (2.0 * h);
                assert!((d - fd).abs() < 1e-8);
                let (_, d) = k.zonal(0.2);
                let fd = (k.zonal(0.2 + h).0 - k.zonal(0.2 - h).0) / (2.0 * h);
                assert!((d - fd).abs() < 1e-8);
            }
        }
        let k = VarifoldKernel::<f64>::default();
        assert_eq!(k.zonal(1.0).0, 1.0);
    }

    #[test]
    fn constant_kernel_gives_length_product() {
        let cfg = SplineConfig::closed(3, 20);
        let space = SplineSpace::new(cfg).unwrap();
        let c = curve(cfg, |a| [a.cos(), a.sin()]);
        let g = VarifoldEvalGrid::from_curve(&space, &c).unwrap();
        let k = VarifoldKernel::new(RadialKernel::Constant, 1.0, ZonalKernel::Constant, 1.0);
        let v = varifold_inner(&g, &g, &k);
        assert!((v - TAU * TAU).abs() < 1e-3, "{v}");
    }

    #[test]
    fn distant_curves_have_negligible_inner_product() {
        let cfg = SplineConfig::closed(3, 16);
        let space = SplineSpace::new(cfg).unwrap();
        let c = curve(cfg, |a| [a.cos(), a.sin()]);
        let k = VarifoldKernel::new(RadialKernel::Gaussian, 0.1, ZonalKernel::Linear, 1.0);
        let a = VarifoldEvalGrid::from_curve(&space, &c).unwrap();
        let b = VarifoldEvalGrid::from_curve(&space, &c.translated([12.0, 0.0])).unwrap();
        let l1 = a.total_weight();
        assert!(varifold_inner(&a, &b, &k).abs() <= 1e-10 * l1 * l1);
    }

    #[test]
    fn identical_curves_have_zero_distance_and_gradient() {
        let cfg = SplineConfig::closed(3, 12);
        let space = SplineSpace::new(cfg).unwrap();
        let c = curve(cfg, |a| [a.cos() + 0.2 * (2.0 * a).sin(), a.sin()]);
        let k = VarifoldKernel::new(RadialKernel::Gaussian, 0.5, ZonalKernel::GaussianOriented, 0.3);
        let grid = VarifoldEvalGrid::from_curve(&space, &c).unwrap();
        let (d, g) = varifold_dist_sq_gradient(&space, &c, &grid, &k).unwrap();
        assert!(d <= 1e-12);
        assert!(g.iter().all(|p| vec2::norm(*p) <= 1e-10));
    }

    #[test]
    fn similarity_order_is_translate_then_rotate_then_scale() {
        let s = Similarity::new(2.0, std::f64::consts::FRAC_PI_2, [1.0, 0.0]).unwrap();
        let p = s.apply([0.0, 0.0]);
        assert!((p[0]).abs() < 1e-15 && (p[1] - 2.0).abs() < 1e-15);
        assert!(Similarity::new(0.0, 0.0, [0.0, 0.0]).is_err());
        let id = Similarity::<f64>::identity();
        assert_eq!(id.apply([0.3, -0.4]), [0.3, -0.4]);
    }
}

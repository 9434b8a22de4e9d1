//! Second-order elastic Sobolev metrics on planar curves, the path energy
//! `E(c) = ∫₀¹ G_{c(t)}(c_t, c_t) dt` and its exact gradient.
//!
//! In θ-coordinates, with `r = |c'|`, `g = ⟨c', c''⟩`, unit tangent `v` and
//! length-dependent coefficients `A₀, A₁, B₁, A₂`, the metric density is
//!
//! ```text
//! A₀ r ⟨h,k⟩ + A₁/r ⟨h'ᵀ,k'ᵀ⟩ + B₁/r ⟨h'ᐩ,k'ᐩ⟩
//!   + A₂ ( g²/r⁷ ⟨h',k'⟩ − g/r⁵ (⟨h',k''⟩ + ⟨h'',k'⟩) + 1/r³ ⟨h'',k''⟩ )
//! ```
//!
//! The energy is evaluated by tensor Gauss quadrature, and the gradient is
//! the exact derivative of that quadrature sum with respect to the path
//! control points.

use crate::bspline::{DiscreteCurve, DiscretePath, QuadratureGrid, SplineSpace};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec2::{self, Point};

/// Relative immersion tolerance: |c'| must exceed this times the curve length.
pub const IMMERSION_REL_TOL: f64 = 1e-8;

/// Coefficients `a₀, a₁, b₁, a₂` of an elastic metric. With
/// `length_weighted` the scale-invariant weights `a₀/ℓ³, a₁/ℓ, b₁/ℓ, ℓa₂` are
/// used; otherwise the coefficients are constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams<T> {
    pub a0: T,
    pub a1: T,
    pub b1: T,
    pub a2: T,
    pub length_weighted: bool,
}

impl<T: Scalar> MetricParams<T> {
    pub fn constant(a0: T, a1: T, b1: T, a2: T) -> Self {
        Self {
            a0,
            a1,
            b1,
            a2,
            length_weighted: false,
        }
    }

    pub fn scale_invariant(a0: T, a1: T, b1: T, a2: T) -> Self {
        Self {
            a0,
            a1,
            b1,
            a2,
            length_weighted: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a0, self.a1, self.b1, self.a2];
        if all.iter().any(|c| !(*c >= T::zero()) || !c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "metric coefficients must be finite and nonnegative, got a0={} a1={} b1={} a2={}",
                self.a0, self.a1, self.b1, self.a2
            )));
        }
        if self.a0 == T::zero() || self.a2 == T::zero() {
            log::warn!("a0 or a2 is zero: the metric is not strong enough for the completeness results");
        }
        Ok(())
    }
}

/// Coefficient functions of a length-weighted elastic metric: values and
/// derivatives of `(a₀(ℓ), a₁(ℓ), b₁(ℓ), a₂(ℓ))`.
pub trait MetricCoefficients<T: Scalar> {
    fn values(&self, length: T) -> [T; 4];

    fn derivatives(&self, length: T) -> [T; 4];

    /// False when every coefficient is constant in ℓ.
    fn length_dependent(&self) -> bool {
        true
    }
}

impl<T: Scalar> MetricCoefficients<T> for MetricParams<T> {
    fn values(&self, l: T) -> [T; 4] {
        if self.length_weighted {
            [self.a0 / (l * l * l), self.a1 / l, self.b1 / l, self.a2 * l]
        } else {
            [self.a0, self.a1, self.b1, self.a2]
        }
    }

    fn derivatives(&self, l: T) -> [T; 4] {
        if self.length_weighted {
            let l2 = l * l;
            [-T::lit(3.0) * self.a0 / (l2 * l2), -self.a1 / l2, -self.b1 / l2, self.a2]
        } else {
            [T::zero(); 4]
        }
    }

    fn length_dependent(&self) -> bool {
        self.length_weighted
    }
}

type CoeffFn<T> = dyn Fn(T) -> ([T; 4], [T; 4]) + Send + Sync;

/// User-supplied coefficient functions. The closure returns
/// `(values, derivatives)` at a given length.
pub struct CustomCoefficients<T> {
    f: Box<CoeffFn<T>>,
}

impl<T: Scalar> CustomCoefficients<T> {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(T) -> ([T; 4], [T; 4]) + Send + Sync + 'static,
    {
        Self { f: Box::new(f) }
    }
}

impl<T: Scalar> MetricCoefficients<T> for CustomCoefficients<T> {
    fn values(&self, length: T) -> [T; 4] {
        (self.f)(length).0
    }

    fn derivatives(&self, length: T) -> [T; 4] {
        (self.f)(length).1
    }
}

/// Value and first two θ-derivatives of a field at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub value: Point<T>,
    pub d1: Point<T>,
    pub d2: Point<T>,
}

impl<T: Scalar> Jet<T> {
    pub fn new(value: Point<T>, d1: Point<T>, d2: Point<T>) -> Self {
        Self { value, d1, d2 }
    }
}

/// The four metric densities (per dθ, coefficients not applied) of the
/// bilinear form `G_c(h, k)` at one site: `[⟨h,k⟩ r, tangential, normal,
/// second order]`.
pub fn metric_density_terms<T: Scalar>(c: &Jet<T>, h: &Jet<T>, k: &Jet<T>) -> [T; 4] {
    let p = c.d1;
    let r = vec2::norm(p);
    let g = vec2::dot(p, c.d2);
    let hv = vec2::dot(h.d1, p) / r;
    let kv = vec2::dot(k.d1, p) / r;
    let hk1 = vec2::dot(h.d1, k.d1);
    let r2 = r * r;
    let r3 = r2 * r;
    let r5 = r3 * r2;
    let r7 = r5 * r2;
    [
        r * vec2::dot(h.value, k.value),
        hv * kv / r,
        (hk1 - hv * kv) / r,
        g * g * hk1 / r7 - g * (vec2::dot(h.d1, k.d2) + vec2::dot(h.d2, k.d1)) / r5
            + vec2::dot(h.d2, k.d2) / r3,
    ]
}

/// Metric density `Σ coeffs[i] · terms[i]`.
pub fn metric_density<T: Scalar>(coeffs: [T; 4], c: &Jet<T>, h: &Jet<T>, k: &Jet<T>) -> T {
    let t = metric_density_terms(c, h, k);
    coeffs.iter().zip(&t).map(|(a, b)| *a * *b).sum()
}

/// Pointwise quantities of the energy density at one quadrature site for a
/// curve `c` moving with velocity field `ċ`. `t` holds the coefficients of
/// the first variation
///
/// ```text
/// t₁⟨c',k'⟩ + t₂(⟨c'',k'⟩ + ⟨c',k''⟩) + t₃⟨ċ'ᐩ,k'⟩ + t₄⟨ċ,k̇⟩ + t₅⟨ċ',k̇'⟩
///   + t₆⟨ċ'ᵀ,k̇'⟩ + t₇⟨ċ'ᐩ,k̇'⟩ + t₈(⟨ċ'',k̇'⟩ + ⟨ċ',k̇''⟩) + t₉⟨ċ'',k̇''⟩
/// ```
///
/// at fixed length; `t[0]` is t₁.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointwiseMetricTerms<T> {
    /// |c'|
    pub speed: T,
    /// ⟨c', c''⟩
    pub stretch_rate: T,
    /// Unit tangent.
    pub tangent: Point<T>,
    /// Unit normal (tangent rotated by a quarter turn).
    pub normal: Point<T>,
    /// Tangential part of ċ'.
    pub dh_tangential: Point<T>,
    /// Normal part of ċ'.
    pub dh_normal: Point<T>,
    pub t: [T; 9],
}

impl<T: Scalar> PointwiseMetricTerms<T> {
    /// `coeffs` are the metric coefficients already evaluated at the current length.
    pub fn compute(coeffs: [T; 4], c: &Jet<T>, dc: &Jet<T>) -> Self {
        let [a0, a1, b1, a2] = coeffs;
        let p = c.d1;
        let r = vec2::norm(p);
        let v = vec2::scale(T::one() / r, p);
        let n = vec2::perp(v);
        let u1 = dc.d1;
        let u2 = dc.d2;
        let g = vec2::dot(p, c.d2);
        let dh_tangential = vec2::scale(vec2::dot(u1, v), v);
        let dh_normal = vec2::sub(u1, dh_tangential);
        let m = vec2::norm_sq(u1);
        let e = vec2::dot(u1, u2);
        let nn = vec2::norm_sq(u2);
        let two = T::lit(2.0);
        let r2 = r * r;
        let r3 = r2 * r;
        let r5 = r3 * r2;
        let r7 = r5 * r2;
        let r9 = r7 * r2;
        let t1 = a0 * vec2::norm_sq(dc.value) / r - a1 * vec2::norm_sq(dh_tangential) / r3
            - b1 * vec2::norm_sq(dh_normal) / r3
            - T::lit(7.0) * a2 * g * g * m / r9
            + T::lit(10.0) * a2 * g * e / r7
            - T::lit(3.0) * a2 * nn / r5;
        let t2 = two * a2 * g * m / r7 - two * a2 * e / r5;
        let t3 = two * (a1 - b1) * vec2::dot(u1, p) / r3;
        let t4 = two * a0 * r;
        let t5 = two * a2 * g * g / r7;
        let t6 = two * a1 / r;
        let t7 = two * b1 / r;
        let t8 = -two * a2 * g / r5;
        let t9 = two * a2 / r3;
        Self {
            speed: r,
            stretch_rate: g,
            tangent: v,
            normal: n,
            dh_tangential,
            dh_normal,
            t: [t1, t2, t3, t4, t5, t6, t7, t8, t9],
        }
    }
}

/// Per-term energy contributions (coefficients applied) and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown<T> {
    pub a0: T,
    pub a1: T,
    pub b1: T,
    pub a2: T,
}

impl<T: Scalar> EnergyBreakdown<T> {
    pub fn total(&self) -> T {
        self.a0 + self.a1 + self.b1 + self.a2
    }
}

/// Curve jets at the θ-quadrature sites: position, c', c''.
pub(crate) fn curve_jets<T: Scalar>(grid: &QuadratureGrid<T>, ctrl: &[Point<T>]) -> Vec<Jet<T>> {
    grid.basis
        .iter()
        .map(|b| {
            let mut j = [vec2::zero(); 3];
            for (idx, d) in b.iter() {
                for k in 0..3 {
                    vec2::axpy(&mut j[k], d[k], ctrl[idx]);
                }
            }
            Jet::new(j[0], j[1], j[2])
        })
        .collect()
}

/// Quadrature length and speeds; fails if any speed is below the
/// immersion tolerance.
pub(crate) fn checked_length<T: Scalar>(
    grid: &QuadratureGrid<T>,
    jets: &[Jet<T>],
    t: Option<T>,
) -> Result<(T, Vec<T>)> {
    let speeds: Vec<T> = jets.iter().map(|j| vec2::norm(j.d1)).collect();
    let length: T = speeds.iter().zip(&grid.weights).map(|(s, w)| *s * *w).sum();
    let tol = T::lit(IMMERSION_REL_TOL) * length;
    for (i, &s) in speeds.iter().enumerate() {
        if !(s > tol) {
            return Err(Error::DegenerateCurve {
                t: t.map(|t| t.as_f64()),
                theta: grid.sites[i].as_f64(),
                speed: s.as_f64(),
                tol: tol.as_f64(),
            });
        }
    }
    Ok((length, speeds))
}

/// Length `ℓ_c = ∫ |c'| dθ` by θ-quadrature.
pub fn curve_length<T: Scalar>(space: &SplineSpace<T>, curve: &DiscreteCurve<T>) -> Result<T> {
    space.check_curve(curve)?;
    let jets = curve_jets(space.theta_grid(), &curve.ctrl);
    Ok(checked_length(space.theta_grid(), &jets, None)?.0)
}

/// `G_c(h, k)` for tangent fields given as spline coefficients on c's layout.
pub fn metric_value<T: Scalar, C: MetricCoefficients<T>>(
    space: &SplineSpace<T>,
    curve: &DiscreteCurve<T>,
    h: &[Point<T>],
    k: &[Point<T>],
    coeffs: &C,
) -> Result<T> {
    space.check_curve(curve)?;
    let n = space.config().ctrl_theta;
    if h.len() != n || k.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "tangent fields need {n} coefficients, got {} and {}",
            h.len(),
            k.len()
        )));
    }
    let grid = space.theta_grid();
    let cj = curve_jets(grid, &curve.ctrl);
    let (length, _) = checked_length(grid, &cj, None)?;
    let a = coeffs.values(length);
    let hj = curve_jets(grid, h);
    let kj = curve_jets(grid, k);
    Ok(grid
        .weights
        .iter()
        .zip(cj.iter().zip(hj.iter().zip(&kj)))
        .map(|(&w, (c, (h, k)))| w * metric_density(a, c, h, k))
        .sum())
}

/// Path energy by tensor quadrature.
pub fn path_energy<T: Scalar, C: MetricCoefficients<T>>(
    space: &SplineSpace<T>,
    path: &DiscretePath<T>,
    coeffs: &C,
) -> Result<T> {
    Ok(energy_breakdown(space, path, coeffs)?.total())
}

/// Path energy split into its four coefficient contributions.
pub fn energy_breakdown<T: Scalar, C: MetricCoefficients<T>>(
    space: &SplineSpace<T>,
    path: &DiscretePath<T>,
    coeffs: &C,
) -> Result<EnergyBreakdown<T>> {
    let mut out = EnergyBreakdown::default();
    for_each_time_slice(space, path, |slice| {
        let a = coeffs.values(slice.length);
        let s = slice.term_integrals();
        out.a0 += slice.weight * a[0] * s[0];
        out.a1 += slice.weight * a[1] * s[1];
        out.b1 += slice.weight * a[2] * s[2];
        out.a2 += slice.weight * a[3] * s[3];
        Ok(())
    })?;
    Ok(out)
}

/// Energy and gradient with respect to every control point of the path,
/// including the pinned first row.
pub(crate) fn energy_and_full_gradient<T: Scalar, C: MetricCoefficients<T>>(
    space: &SplineSpace<T>,
    path: &DiscretePath<T>,
    coeffs: &C,
) -> Result<(T, Vec<Point<T>>)> {
    let cfg = space.config();
    let n_theta = cfg.ctrl_theta;
    let grid = space.theta_grid();
    let mut grad = vec![vec2::zero(); path.ctrl.len()];
    let mut energy = T::zero();
    let mut g_pos = vec![vec2::zero(); n_theta];
    let mut g_vel = vec![vec2::zero(); n_theta];
    for_each_time_slice(space, path, |slice| {
        let a = coeffs.values(slice.length);
        let s = slice.term_integrals();
        let density: T = a.iter().zip(&s).map(|(x, y)| *x * *y).sum();
        energy += slice.weight * density;
        // ∂E/∂ℓ at this time, spread through dℓ = Σ w ⟨c', k'⟩ / |c'|.
        let dl = if coeffs.length_dependent() {
            let da = coeffs.derivatives(slice.length);
            da.iter().zip(&s).map(|(x, y)| *x * *y).sum()
        } else {
            T::zero()
        };
        g_pos.iter_mut().for_each(|g| *g = vec2::zero());
        g_vel.iter_mut().for_each(|g| *g = vec2::zero());
        for b in 0..grid.len() {
            let c = &slice.pos[b];
            let dc = &slice.vel[b];
            let pt = PointwiseMetricTerms::compute(a, c, dc);
            let t = pt.t;
            let w = grid.weights[b];
            // Coefficient of k' and k'' from the position dependence.
            let mut k1 = vec2::scale(t[0] + dl / pt.speed, c.d1);
            vec2::axpy(&mut k1, t[1], c.d2);
            vec2::axpy(&mut k1, t[2], pt.dh_normal);
            let k2 = vec2::scale(t[1], c.d1);
            // Coefficient of k̇, k̇', k̇''.
            let kd0 = vec2::scale(t[3], dc.value);
            let mut kd1 = vec2::scale(t[4], dc.d1);
            vec2::axpy(&mut kd1, t[5], pt.dh_tangential);
            vec2::axpy(&mut kd1, t[6], pt.dh_normal);
            vec2::axpy(&mut kd1, t[7], dc.d2);
            let mut kd2 = vec2::scale(t[7], dc.d1);
            vec2::axpy(&mut kd2, t[8], dc.d2);
            for (j, d) in grid.basis[b].iter() {
                vec2::axpy(&mut g_pos[j], w * d[1], k1);
                vec2::axpy(&mut g_pos[j], w * d[2], k2);
                vec2::axpy(&mut g_vel[j], w * d[0], kd0);
                vec2::axpy(&mut g_vel[j], w * d[1], kd1);
                vec2::axpy(&mut g_vel[j], w * d[2], kd2);
            }
        }
        for (i, d) in slice.time_basis.iter() {
            let row = &mut grad[i * n_theta..(i + 1) * n_theta];
            for j in 0..n_theta {
                vec2::axpy(&mut row[j], slice.weight * d[0], g_pos[j]);
                vec2::axpy(&mut row[j], slice.weight * d[1], g_vel[j]);
            }
        }
        Ok(())
    })?;
    Ok((energy, grad))
}

/// Gradient of the discrete path energy with respect to the free control
/// rows `1..N_t` (row 0, the source curve, is fixed). Laid out row-major.
pub fn path_energy_gradient<T: Scalar, C: MetricCoefficients<T>>(
    space: &SplineSpace<T>,
    path: &DiscretePath<T>,
    coeffs: &C,
) -> Result<Vec<Point<T>>> {
    let (_, mut g) = energy_and_full_gradient(space, path, coeffs)?;
    g.drain(..space.config().ctrl_theta);
    Ok(g)
}

struct TimeSlice<'a, T> {
    weight: T,
    length: T,
    time_basis: &'a crate::bspline::BasisValues<T>,
    pos: Vec<Jet<T>>,
    vel: Vec<Jet<T>>,
    grid: &'a QuadratureGrid<T>,
}

impl<T: Scalar> TimeSlice<'_, T> {
    /// θ-integrals of the four energy densities of `G_c(ċ, ċ)`.
    fn term_integrals(&self) -> [T; 4] {
        let mut s = [T::zero(); 4];
        for (b, &w) in self.grid.weights.iter().enumerate() {
            let d = metric_density_terms(&self.pos[b], &self.vel[b], &self.vel[b]);
            for k in 0..4 {
                s[k] += w * d[k];
            }
        }
        s
    }
}

fn for_each_time_slice<T: Scalar, F>(space: &SplineSpace<T>, path: &DiscretePath<T>, mut f: F) -> Result<()>
where
    F: FnMut(&TimeSlice<'_, T>) -> Result<()>,
{
    space.check_path(path)?;
    let n_theta = space.config().ctrl_theta;
    let tgrid = space.time_grid();
    let grid = space.theta_grid();
    let mut rows = vec![vec2::zero(); n_theta];
    let mut drows = vec![vec2::zero(); n_theta];
    for (a, tb) in tgrid.basis.iter().enumerate() {
        rows.iter_mut().for_each(|p| *p = vec2::zero());
        drows.iter_mut().for_each(|p| *p = vec2::zero());
        for (i, d) in tb.iter() {
            for ((r, dr), &p) in rows.iter_mut().zip(drows.iter_mut()).zip(path.row(i)) {
                vec2::axpy(r, d[0], p);
                vec2::axpy(dr, d[1], p);
            }
        }
        let pos = curve_jets(grid, &rows);
        let vel = curve_jets(grid, &drows);
        let (length, _) = checked_length(grid, &pos, Some(tgrid.sites[a]))?;
        f(&TimeSlice {
            weight: tgrid.weights[a],
            length,
            time_basis: tb,
            pos,
            vel,
            grid,
        })?;
    }
    Ok(())
}

//! Uniform B-spline bases in space (θ ∈ [0, 2π], open or periodic) and time
//! (t ∈ [0, 1], clamped), tensor-product path representation, Gauss–Legendre
//! quadrature tables and least-squares fitting.

mod curve;
mod fit;
mod quadrature;

pub use curve::{eval_path, DiscreteCurve, DiscretePath, PathDerivative};
pub use fit::{chord_length_params, fit_curve, fit_curve_with_params, resample_curve, FitReport};
pub use quadrature::{gauss_legendre, make_quadrature, QuadratureGrid};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Which parameter a basis lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    Theta,
    Time,
}

/// Knot, degree and control-point layout of curves and of paths of curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SplineConfig {
    /// Spatial degree.
    pub degree_theta: usize,
    /// Number of spatial control points.
    pub ctrl_theta: usize,
    /// Temporal degree.
    pub degree_t: usize,
    /// Number of temporal control points.
    pub ctrl_t: usize,
    /// Periodic in θ.
    pub closed: bool,
    /// Gauss–Legendre points per knot span in θ.
    pub quad_theta: usize,
    /// Gauss–Legendre points per knot span in t.
    pub quad_t: usize,
}

impl Default for SplineConfig {
    fn default() -> Self {
        Self {
            degree_theta: 3,
            ctrl_theta: 100,
            degree_t: 2,
            ctrl_t: 10,
            closed: true,
            quad_theta: 6,
            quad_t: 3,
        }
    }
}

impl SplineConfig {
    pub fn closed(degree_theta: usize, ctrl_theta: usize) -> Self {
        Self {
            degree_theta,
            ctrl_theta,
            closed: true,
            ..Self::default()
        }
    }

    pub fn open(degree_theta: usize, ctrl_theta: usize) -> Self {
        Self {
            degree_theta,
            ctrl_theta,
            closed: false,
            ..Self::default()
        }
    }

    pub fn with_time(mut self, degree_t: usize, ctrl_t: usize) -> Self {
        self.degree_t = degree_t;
        self.ctrl_t = ctrl_t;
        self
    }

    pub fn with_quadrature(mut self, quad_theta: usize, quad_t: usize) -> Self {
        self.quad_theta = quad_theta;
        self.quad_t = quad_t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.degree_theta < 1 {
            return bad("spatial degree must be at least 1".into());
        }
        if self.degree_t < 1 {
            return bad("temporal degree must be at least 1".into());
        }
        if self.ctrl_theta < self.degree_theta + 1 {
            return bad(format!(
                "{} spatial control points cannot carry degree {} ({} curve needs at least {})",
                self.ctrl_theta,
                self.degree_theta,
                if self.closed { "closed" } else { "open" },
                self.degree_theta + 1
            ));
        }
        if self.ctrl_t < 2 || self.ctrl_t < self.degree_t + 1 {
            return bad(format!(
                "{} temporal control points cannot carry degree {} (need at least {})",
                self.ctrl_t,
                self.degree_t,
                (self.degree_t + 1).max(2)
            ));
        }
        if self.quad_theta < 1 || self.quad_t < 1 {
            return bad("quadrature needs at least one point per knot span".into());
        }
        Ok(())
    }

    pub fn degree(&self, which: Axis) -> usize {
        match which {
            Axis::Theta => self.degree_theta,
            Axis::Time => self.degree_t,
        }
    }

    pub fn n_ctrl(&self, which: Axis) -> usize {
        match which {
            Axis::Theta => self.ctrl_theta,
            Axis::Time => self.ctrl_t,
        }
    }

    pub fn periodic(&self, which: Axis) -> bool {
        which == Axis::Theta && self.closed
    }

    pub fn quad_points(&self, which: Axis) -> usize {
        match which {
            Axis::Theta => self.quad_theta,
            Axis::Time => self.quad_t,
        }
    }

    /// Number of non-degenerate knot spans.
    pub fn n_spans(&self, which: Axis) -> usize {
        if self.periodic(which) {
            self.n_ctrl(which)
        } else {
            self.n_ctrl(which) - self.degree(which)
        }
    }

    /// Spatial layout only; the temporal fields are irrelevant for comparing curves.
    pub fn same_space(&self, other: &SplineConfig) -> bool {
        self.degree_theta == other.degree_theta
            && self.ctrl_theta == other.ctrl_theta
            && self.closed == other.closed
    }
}

/// Parameter domain of an axis.
pub fn domain<T: Scalar>(which: Axis) -> (T, T) {
    match which {
        Axis::Theta => (T::zero(), T::TAU()),
        Axis::Time => (T::zero(), T::one()),
    }
}

/// Uniform knot vector. Clamped axes repeat the boundary knots `degree + 1`
/// times; the periodic θ axis returns the simple knots `k·2π/N` for
/// `k = -degree ..= N + degree`.
pub fn make_knots<T: Scalar>(config: &SplineConfig, which: Axis) -> Result<Vec<T>> {
    config.validate()?;
    let n = config.degree(which);
    let count = config.n_ctrl(which);
    let (lo, hi) = domain::<T>(which);
    let spans = config.n_spans(which);
    let h = (hi - lo) / T::from_usize_lossy(spans);
    if config.periodic(which) {
        Ok((0..count + 2 * n + 1)
            .map(|k| lo + h * (T::from_usize_lossy(k) - T::from_usize_lossy(n)))
            .collect())
    } else {
        let mut knots = Vec::with_capacity(count + n + 1);
        knots.extend(std::iter::repeat_n(lo, n + 1));
        knots.extend((1..spans).map(|k| lo + h * T::from_usize_lossy(k)));
        knots.extend(std::iter::repeat_n(hi, n + 1));
        Ok(knots)
    }
}

/// Nonzero basis functions at one parameter value: control indices and
/// (value, first derivative, second derivative) for each.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisValues<T> {
    pub indices: Vec<usize>,
    pub derivs: Vec<[T; 3]>,
}

impl<T: Scalar> BasisValues<T> {
    pub fn iter(&self) -> impl Iterator<Item = (usize, [T; 3])> + '_ {
        self.indices.iter().copied().zip(self.derivs.iter().copied())
    }
}

/// A univariate uniform B-spline basis on one axis.
#[derive(Debug, Clone)]
pub struct SplineBasis<T> {
    degree: usize,
    n_ctrl: usize,
    periodic: bool,
    knots: Vec<T>,
    lo: T,
    hi: T,
    step: T,
}

impl<T: Scalar> SplineBasis<T> {
    pub fn new(config: &SplineConfig, which: Axis) -> Result<Self> {
        let knots = make_knots(config, which)?;
        let (lo, hi) = domain::<T>(which);
        Ok(Self {
            degree: config.degree(which),
            n_ctrl: config.n_ctrl(which),
            periodic: config.periodic(which),
            knots,
            lo,
            hi,
            step: (hi - lo) / T::from_usize_lossy(config.n_spans(which)),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n_ctrl(&self) -> usize {
        self.n_ctrl
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn domain(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn n_spans(&self) -> usize {
        if self.periodic {
            self.n_ctrl
        } else {
            self.n_ctrl - self.degree
        }
    }

    /// Start of knot span `s` (spans are numbered from 0 over the domain).
    pub fn span_start(&self, s: usize) -> T {
        self.lo + self.step * T::from_usize_lossy(s)
    }

    pub fn span_width(&self) -> T {
        self.step
    }

    /// Index of the knot span containing `x`, counted from 0, after periodic
    /// reduction. Values at the right end of a clamped domain belong to the
    /// last span.
    fn locate(&self, x: T) -> (usize, T) {
        let spans = self.n_spans();
        let mut x = x;
        if self.periodic {
            let period = self.hi - self.lo;
            x = x - period * ((x - self.lo) / period).floor();
            if x >= self.hi {
                x = self.lo;
            }
        }
        let raw = ((x - self.lo) / self.step).floor();
        let s = if raw < T::zero() {
            0
        } else {
            raw.to_usize().unwrap_or(spans - 1).min(spans - 1)
        };
        (s, x)
    }

    /// Evaluate the `degree + 1` nonzero basis functions and their first two
    /// derivatives at `x`. Uses the Cox–de Boor triangular scheme with
    /// derivative recurrences on the (extended) knot vector.
    pub fn eval(&self, x: T) -> BasisValues<T> {
        let (s, x) = self.locate(x);
        let p = self.degree;
        // In both layouts the knot vector carries `p` knots before the domain start.
        let span = s + p;
        let ders = ders_basis_funs(&self.knots, span, x, p, 2);
        let indices = (0..=p)
            .map(|r| {
                let e = s + r;
                if self.periodic {
                    e % self.n_ctrl
                } else {
                    e
                }
            })
            .collect();
        let derivs = (0..=p)
            .map(|r| [ders[0][r], ders[1][r], ders[2][r]])
            .collect();
        BasisValues { indices, derivs }
    }

    /// Dense row of all `n_ctrl` basis values (order-0 derivative) at `x`.
    pub fn dense_row(&self, x: T) -> Vec<T> {
        let mut row = vec![T::zero(); self.n_ctrl];
        for (j, d) in self.eval(x).iter() {
            row[j] += d[0];
        }
        row
    }
}

/// Nonzero basis functions and derivatives up to `nd` at `x` in knot span
/// `span` (knots[span] <= x < knots[span + 1]). Returns `ders[k][r]`, the
/// k-th derivative of basis function `span - p + r`.
fn ders_basis_funs<T: Scalar>(knots: &[T], span: usize, x: T, p: usize, nd: usize) -> Vec<Vec<T>> {
    let mut ndu = vec![vec![T::zero(); p + 1]; p + 1];
    let mut left = vec![T::zero(); p + 1];
    let mut right = vec![T::zero(); p + 1];
    ndu[0][0] = T::one();
    for j in 1..=p {
        left[j] = x - knots[span + 1 - j];
        right[j] = knots[span + j] - x;
        let mut saved = T::zero();
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    let mut ders = vec![vec![T::zero(); p + 1]; nd + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![T::zero(); p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = T::one();
        for k in 1..=nd.min(p) {
            let mut d = T::zero();
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize { k - 1 } else { p - r };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut factor = T::from_usize_lossy(p);
    for k in 1..=nd.min(p) {
        for v in ders[k].iter_mut() {
            *v *= factor;
        }
        factor *= T::from_usize_lossy(p - k);
    }
    ders
}

/// Precomputed bases and quadrature tables for a spline configuration.
#[derive(Debug, Clone)]
pub struct SplineSpace<T> {
    config: SplineConfig,
    theta: SplineBasis<T>,
    time: SplineBasis<T>,
    theta_grid: QuadratureGrid<T>,
    time_grid: QuadratureGrid<T>,
}

impl<T: Scalar> SplineSpace<T> {
    pub fn new(config: SplineConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            theta: SplineBasis::new(&config, Axis::Theta)?,
            time: SplineBasis::new(&config, Axis::Time)?,
            theta_grid: make_quadrature(&config, Axis::Theta)?,
            time_grid: make_quadrature(&config, Axis::Time)?,
        })
    }

    pub fn config(&self) -> &SplineConfig {
        &self.config
    }

    pub fn basis(&self, which: Axis) -> &SplineBasis<T> {
        match which {
            Axis::Theta => &self.theta,
            Axis::Time => &self.time,
        }
    }

    pub fn theta_basis(&self) -> &SplineBasis<T> {
        &self.theta
    }

    pub fn time_basis(&self) -> &SplineBasis<T> {
        &self.time
    }

    pub fn theta_grid(&self) -> &QuadratureGrid<T> {
        &self.theta_grid
    }

    pub fn time_grid(&self) -> &QuadratureGrid<T> {
        &self.time_grid
    }

    pub(crate) fn check_curve(&self, curve: &DiscreteCurve<T>) -> Result<()> {
        if !self.config.same_space(&curve.config) || curve.ctrl.len() != self.config.ctrl_theta {
            return Err(Error::ShapeMismatch(format!(
                "curve layout (degree {}, {} control points, closed={}) does not match space (degree {}, {} control points, closed={})",
                curve.config.degree_theta,
                curve.ctrl.len(),
                curve.config.closed,
                self.config.degree_theta,
                self.config.ctrl_theta,
                self.config.closed
            )));
        }
        Ok(())
    }

    pub(crate) fn check_path(&self, path: &DiscretePath<T>) -> Result<()> {
        let c = &self.config;
        if path.config != *c || path.ctrl.len() != c.ctrl_t * c.ctrl_theta {
            return Err(Error::ShapeMismatch(format!(
                "path layout {:?} with {} control points does not match space {:?}",
                path.config,
                path.ctrl.len(),
                c
            )));
        }
        Ok(())
    }
}

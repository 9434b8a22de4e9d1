use super::{SplineBasis, SplineConfig, SplineSpace};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec2::{self, Point};

/// A planar spline curve `c(θ) = Σ_j ctrl[j] C_j(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteCurve<T> {
    pub config: SplineConfig,
    pub ctrl: Vec<Point<T>>,
}

impl<T: Scalar> DiscreteCurve<T> {
    pub fn new(config: SplineConfig, ctrl: Vec<Point<T>>) -> Result<Self> {
        config.validate()?;
        if ctrl.len() != config.ctrl_theta {
            return Err(Error::ShapeMismatch(format!(
                "expected {} control points, got {}",
                config.ctrl_theta,
                ctrl.len()
            )));
        }
        Ok(Self { config, ctrl })
    }

    /// Position and first two θ-derivatives at `theta`.
    pub fn eval(&self, basis: &SplineBasis<T>, theta: T) -> [Point<T>; 3] {
        let mut out = [vec2::zero(); 3];
        for (j, d) in basis.eval(theta).iter() {
            for k in 0..3 {
                vec2::axpy(&mut out[k], d[k], self.ctrl[j]);
            }
        }
        out
    }

    pub fn point(&self, basis: &SplineBasis<T>, theta: T) -> Point<T> {
        self.eval(basis, theta)[0]
    }

    pub fn map_ctrl<F: Fn(Point<T>) -> Point<T>>(&self, f: F) -> Self {
        Self {
            config: self.config,
            ctrl: self.ctrl.iter().map(|&p| f(p)).collect(),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        self.map_ctrl(|p| vec2::scale(s, p))
    }

    pub fn translated(&self, w: Point<T>) -> Self {
        self.map_ctrl(|p| vec2::add(p, w))
    }

    pub fn rotated(&self, angle: T) -> Self {
        self.map_ctrl(|p| vec2::rotate(angle, p))
    }

    /// Same image traversed backwards. Exact for clamped bases; for periodic
    /// bases the parametrization is shifted by a multiple of the knot step.
    pub fn reversed(&self) -> Self {
        let mut ctrl = self.ctrl.clone();
        ctrl.reverse();
        Self {
            config: self.config,
            ctrl,
        }
    }

    /// Barycenter of the control polygon.
    pub fn ctrl_centroid(&self) -> Point<T> {
        let n = T::from_usize_lossy(self.ctrl.len());
        let s = self.ctrl.iter().fold(vec2::zero(), |a, &p| vec2::add(a, p));
        vec2::scale(T::one() / n, s)
    }
}

/// A path of curves `c(t, θ) = Σ_{i,j} ctrl[i][j] B_i(t) C_j(θ)`. Control
/// points are stored row-major: row `i` holds the spatial control points
/// attached to temporal basis function `B_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath<T> {
    pub config: SplineConfig,
    pub ctrl: Vec<Point<T>>,
}

impl<T: Scalar> DiscretePath<T> {
    pub fn new(config: SplineConfig, ctrl: Vec<Point<T>>) -> Result<Self> {
        config.validate()?;
        if ctrl.len() != config.ctrl_t * config.ctrl_theta {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{} control points, got {}",
                config.ctrl_t,
                config.ctrl_theta,
                ctrl.len()
            )));
        }
        Ok(Self { config, ctrl })
    }

    /// The path that stays at `curve` for all times. `config` supplies the
    /// temporal layout; its spatial layout must match the curve's.
    pub fn constant(config: SplineConfig, curve: &DiscreteCurve<T>) -> Result<Self> {
        if !config.same_space(&curve.config) {
            return Err(Error::ShapeMismatch(
                "curve spatial layout differs from path layout".into(),
            ));
        }
        let mut ctrl = Vec::with_capacity(config.ctrl_t * config.ctrl_theta);
        for _ in 0..config.ctrl_t {
            ctrl.extend_from_slice(&curve.ctrl);
        }
        Self::new(config, ctrl)
    }

    /// Linear interpolation of control points between two curves. With the
    /// clamped uniform temporal basis the result is the straight-line path
    /// `(1 - t) c0 + t c1` when the temporal degree is 1; for higher degrees
    /// the Greville abscissae give the same linear path.
    pub fn linear(config: SplineConfig, from: &DiscreteCurve<T>, to: &DiscreteCurve<T>) -> Result<Self> {
        if !config.same_space(&from.config) || !config.same_space(&to.config) {
            return Err(Error::ShapeMismatch("curve spatial layout differs from path layout".into()));
        }
        let greville = greville_abscissae::<T>(&config);
        let mut ctrl = Vec::with_capacity(config.ctrl_t * config.ctrl_theta);
        for &g in &greville {
            for (a, b) in from.ctrl.iter().zip(&to.ctrl) {
                ctrl.push(vec2::add(vec2::scale(T::one() - g, *a), vec2::scale(g, *b)));
            }
        }
        Self::new(config, ctrl)
    }

    pub fn n_rows(&self) -> usize {
        self.config.ctrl_t
    }

    pub fn row(&self, i: usize) -> &[Point<T>] {
        let n = self.config.ctrl_theta;
        &self.ctrl[i * n..(i + 1) * n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Point<T>] {
        let n = self.config.ctrl_theta;
        &mut self.ctrl[i * n..(i + 1) * n]
    }

    pub fn row_curve(&self, i: usize) -> DiscreteCurve<T> {
        DiscreteCurve {
            config: self.config,
            ctrl: self.row(i).to_vec(),
        }
    }

    /// c(0, ·): determined by the first control row alone.
    pub fn start(&self) -> DiscreteCurve<T> {
        self.row_curve(0)
    }

    /// c(1, ·): determined by the last control row alone.
    pub fn end(&self) -> DiscreteCurve<T> {
        self.row_curve(self.n_rows() - 1)
    }

    /// The spatial curve c(t, ·) for an arbitrary time.
    pub fn curve_at(&self, time_basis: &SplineBasis<T>, t: T) -> DiscreteCurve<T> {
        let n = self.config.ctrl_theta;
        let mut ctrl = vec![vec2::zero(); n];
        for (i, d) in time_basis.eval(t).iter() {
            for (acc, &p) in ctrl.iter_mut().zip(self.row(i)) {
                vec2::axpy(acc, d[0], p);
            }
        }
        DiscreteCurve {
            config: self.config,
            ctrl,
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            config: self.config,
            ctrl: self.ctrl.iter().map(|&p| vec2::scale(s, p)).collect(),
        }
    }

    pub fn map_ctrl<F: Fn(Point<T>) -> Point<T>>(&self, f: F) -> Self {
        Self {
            config: self.config,
            ctrl: self.ctrl.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Greville abscissae of the clamped uniform temporal basis.
pub(crate) fn greville_abscissae<T: Scalar>(config: &SplineConfig) -> Vec<T> {
    let knots = super::make_knots::<T>(config, super::Axis::Time).expect("validated config");
    let p = config.degree_t;
    (0..config.ctrl_t)
        .map(|i| {
            let s: T = knots[i + 1..=i + p].iter().copied().sum();
            s / T::from_usize_lossy(p)
        })
        .collect()
}

/// Partial derivatives of a path that can be requested from [`eval_path`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathDerivative {
    /// c
    Value,
    /// ∂_t c
    Dt,
    /// ∂_θ c
    Dtheta,
    /// ∂_θ² c
    Dtheta2,
    /// ∂_t ∂_θ c
    DtDtheta,
    /// ∂_t ∂_θ² c
    DtDtheta2,
}

impl PathDerivative {
    fn orders(self) -> (usize, usize) {
        match self {
            PathDerivative::Value => (0, 0),
            PathDerivative::Dt => (1, 0),
            PathDerivative::Dtheta => (0, 1),
            PathDerivative::Dtheta2 => (0, 2),
            PathDerivative::DtDtheta => (1, 1),
            PathDerivative::DtDtheta2 => (1, 2),
        }
    }
}

/// Tensor-product evaluation on the grid `times × thetas`. Returns one array
/// per requested derivative, each indexed `[a * thetas.len() + b]`.
pub fn eval_path<T: Scalar>(
    space: &SplineSpace<T>,
    path: &DiscretePath<T>,
    derivs: &[PathDerivative],
    times: &[T],
    thetas: &[T],
) -> Result<Vec<Vec<Point<T>>>> {
    space.check_path(path)?;
    let n_theta = space.config().ctrl_theta;
    let theta_tab: Vec<_> = thetas.iter().map(|&x| space.theta_basis().eval(x)).collect();
    let mut out = vec![Vec::with_capacity(times.len() * thetas.len()); derivs.len()];
    for &t in times {
        let tb = space.time_basis().eval(t);
        // Rows combined in time for derivative orders 0 and 1.
        let mut rows = [vec![vec2::zero(); n_theta], vec![vec2::zero(); n_theta]];
        for (i, d) in tb.iter() {
            for (k, row) in rows.iter_mut().enumerate() {
                for (acc, &p) in row.iter_mut().zip(path.row(i)) {
                    vec2::axpy(acc, d[k], p);
                }
            }
        }
        for tab in &theta_tab {
            for (slot, &which) in out.iter_mut().zip(derivs) {
                let (kt, kth) = which.orders();
                let mut v = vec2::zero();
                for (j, d) in tab.iter() {
                    vec2::axpy(&mut v, d[kth], rows[kt][j]);
                }
                slot.push(v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::Axis;
    use super::*;
    use std::f64::consts::TAU;

    fn bezier_point(ctrl: &[Point<f64>], u: f64) -> Point<f64> {
        // de Casteljau
        let mut pts = ctrl.to_vec();
        let n = pts.len();
        for r in 1..n {
            for i in 0..n - r {
                pts[i] = vec2::add(vec2::scale(1.0 - u, pts[i]), vec2::scale(u, pts[i + 1]));
            }
        }
        pts[0]
    }

    #[test]
    fn single_span_cubic_matches_de_casteljau() {
        let cfg = SplineConfig::open(3, 4);
        let basis = SplineBasis::<f64>::new(&cfg, Axis::Theta).unwrap();
        let ctrl = vec![[0.0, 0.0], [1.0, 2.0], [3.0, -1.0], [4.0, 0.5]];
        let curve = DiscreteCurve::new(cfg, ctrl.clone()).unwrap();
        for i in 0..10 {
            let u = (i as f64 + 0.37) / 10.0;
            let p = curve.point(&basis, u * TAU);
            let q = bezier_point(&ctrl, u);
            assert!((p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_path_has_zero_derivatives() {
        let cfg = SplineConfig::closed(3, 8).with_time(2, 4);
        let space = SplineSpace::<f64>::new(cfg).unwrap();
        let path = DiscretePath::new(cfg, vec![[0.7, -1.3]; 32]).unwrap();
        use PathDerivative::*;
        let out = eval_path(
            &space,
            &path,
            &[Value, Dt, Dtheta, Dtheta2, DtDtheta, DtDtheta2],
            &space.time_grid().sites,
            &space.theta_grid().sites,
        )
        .unwrap();
        for v in &out[0] {
            assert!((v[0] - 0.7).abs() < 1e-14 && (v[1] + 1.3).abs() < 1e-14);
        }
        for arr in &out[1..] {
            for v in arr {
                assert!(vec2::norm(*v) < 1e-12);
            }
        }
    }

    #[test]
    fn linear_path_is_straight_line() {
        let cfg = SplineConfig::closed(3, 6).with_time(2, 5);
        let space = SplineSpace::<f64>::new(cfg).unwrap();
        let a = DiscreteCurve::new(cfg, (0..6).map(|j| [j as f64, 0.0]).collect()).unwrap();
        let b = a.translated([2.0, 1.0]);
        let path = DiscretePath::linear(cfg, &a, &b).unwrap();
        let out = eval_path(&space, &path, &[PathDerivative::Dt], &[0.1, 0.5, 0.93], &[0.2, 3.0]).unwrap();
        for v in &out[0] {
            assert!((v[0] - 2.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
        }
    }
}

use super::{Axis, DiscreteCurve, SplineBasis, SplineConfig};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec2::{self, Point};

/// Diagnostics of a least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport<T> {
    /// Largest distance between a data point and its fitted position.
    pub max_residual: T,
    /// Root mean square of the same distances.
    pub rms_residual: T,
    /// max |R_ii| / min |R_ii| of the collocation QR factor.
    pub condition: T,
}

/// Least-squares spline fit of ordered points with chord-length
/// parameters mapped to [0, 2π]. Closed configurations include the closing
/// chord from the last point back to the first.
pub fn fit_curve<T: Scalar>(points: &[Point<T>], config: &SplineConfig) -> Result<(DiscreteCurve<T>, FitReport<T>)> {
    let params = chord_length_params(points, config.closed)?;
    fit_curve_with_params(points, &params, config)
}

/// Least-squares fit at caller-supplied parameter values.
pub fn fit_curve_with_params<T: Scalar>(
    points: &[Point<T>],
    params: &[T],
    config: &SplineConfig,
) -> Result<(DiscreteCurve<T>, FitReport<T>)> {
    config.validate()?;
    let n = config.ctrl_theta;
    let m = points.len();
    if params.len() != m {
        return Err(Error::ShapeMismatch(format!("{m} points but {} parameters", params.len())));
    }
    let distinct = count_distinct(params);
    if m < n {
        return Err(Error::RankDeficient {
            condition: f64::INFINITY,
            distinct,
            unknowns: n,
        });
    }
    let basis = SplineBasis::<T>::new(config, Axis::Theta)?;
    let mut a: Vec<Vec<T>> = params.iter().map(|&x| basis.dense_row(x)).collect();
    let mut rhs: Vec<[T; 2]> = points.to_vec();

    let diag = householder_qr(&mut a, &mut rhs, n);
    let max_d = diag.iter().fold(T::zero(), |m, d| m.max(d.abs()));
    let min_d = diag.iter().fold(T::infinity(), |m, d| m.min(d.abs()));
    let condition = if min_d > T::zero() { max_d / min_d } else { T::infinity() };
    let tol = T::epsilon() * T::lit(1e4);
    if !(min_d > tol * max_d) {
        return Err(Error::RankDeficient {
            condition: condition.as_f64(),
            distinct,
            unknowns: n,
        });
    }

    // Back substitution on the upper n×n block.
    let mut ctrl = vec![vec2::zero::<T>(); n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in i + 1..n {
            vec2::axpy(&mut acc, -a[i][j], ctrl[j]);
        }
        ctrl[i] = vec2::scale(T::one() / a[i][i], acc);
    }

    let curve = DiscreteCurve::new(*config, ctrl)?;
    let mut max_r = T::zero();
    let mut sum_sq = T::zero();
    for (&p, &x) in points.iter().zip(params) {
        let r = vec2::norm(vec2::sub(curve.point(&basis, x), p));
        max_r = max_r.max(r);
        sum_sq += r * r;
    }
    let report = FitReport {
        max_residual: max_r,
        rms_residual: (sum_sq / T::from_usize_lossy(m)).sqrt(),
        condition,
    };
    Ok((curve, report))
}

/// Refits `curve` into the spatial layout of `config` by least squares on
/// `8 × ctrl_theta` equally spaced parameter values. Exact whenever the
/// target space contains the curve.
pub fn resample_curve<T: Scalar>(curve: &DiscreteCurve<T>, config: &SplineConfig) -> Result<DiscreteCurve<T>> {
    if curve.config.closed != config.closed {
        return Err(Error::InvalidArgument("cannot resample between open and closed curves".into()));
    }
    if curve.config.same_space(config) {
        return Ok(DiscreteCurve {
            config: *config,
            ctrl: curve.ctrl.clone(),
        });
    }
    let old = SplineBasis::<T>::new(&curve.config, Axis::Theta)?;
    let m = 8 * config.ctrl_theta.max(curve.config.ctrl_theta);
    let denom = T::from_usize_lossy(if config.closed { m } else { m - 1 });
    let params: Vec<T> = (0..m).map(|i| T::TAU() * T::from_usize_lossy(i) / denom).collect();
    let points: Vec<Point<T>> = params.iter().map(|&x| curve.point(&old, x)).collect();
    Ok(fit_curve_with_params(&points, &params, config)?.0)
}

/// Normalized cumulative chord length scaled to [0, 2π].
pub fn chord_length_params<T: Scalar>(points: &[Point<T>], closed: bool) -> Result<Vec<T>> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let mut acc = vec![T::zero()];
    for w in points.windows(2) {
        let last = *acc.last().unwrap();
        acc.push(last + vec2::norm(vec2::sub(w[1], w[0])));
    }
    let mut total = *acc.last().unwrap();
    if closed {
        total += vec2::norm(vec2::sub(points[0], points[points.len() - 1]));
    }
    if !(total > T::zero()) {
        return Err(Error::InvalidArgument("points have zero total chord length".into()));
    }
    Ok(acc.into_iter().map(|s| T::TAU() * s / total).collect())
}

fn count_distinct<T: Scalar>(params: &[T]) -> usize {
    let mut v: Vec<T> = params.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * T::lit(16.0));
    v.len()
}

/// In-place Householder QR of the m×n matrix `a`, applying the same
/// reflections to `rhs`. Returns the diagonal of R.
fn householder_qr<T: Scalar>(a: &mut [Vec<T>], rhs: &mut [[T; 2]], n: usize) -> Vec<T> {
    let m = a.len();
    let mut diag = Vec::with_capacity(n);
    for k in 0..n {
        let norm = a[k..].iter().map(|r| r[k] * r[k]).sum::<T>().sqrt();
        if norm == T::zero() {
            diag.push(T::zero());
            continue;
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[k..].iter().map(|r| r[k]).collect();
        v[0] -= alpha;
        let vnorm_sq: T = v.iter().map(|&x| x * x).sum();
        if vnorm_sq == T::zero() {
            diag.push(a[k][k]);
            continue;
        }
        let beta = T::lit(2.0) / vnorm_sq;
        for j in k..n {
            let s: T = (k..m).map(|i| v[i - k] * a[i][j]).sum();
            let f = beta * s;
            for i in k..m {
                a[i][j] -= f * v[i - k];
            }
        }
        for c in 0..2 {
            let s: T = (k..m).map(|i| v[i - k] * rhs[i][c]).sum();
            let f = beta * s;
            for i in k..m {
                rhs[i][c] -= f * v[i - k];
            }
        }
        diag.push(a[k][k]);
    }
    diag
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn square_system_interpolates() {
        let cfg = SplineConfig::open(3, 7);
        let pts: Vec<Point<f64>> = (0..7)
            .map(|i| {
                let x = i as f64;
                [x, (0.7 * x).sin() + 0.1 * x * x]
            })
            .collect();
        let (_, rep) = fit_curve(&pts, &cfg).unwrap();
        assert!(rep.max_residual <= 1e-10, "{:?}", rep);
    }

    #[test]
    fn circle_fit_is_accurate() {
        let cfg = SplineConfig::closed(3, 12);
        let pts: Vec<Point<f64>> = (0..100)
            .map(|i| {
                let a = TAU * i as f64 / 100.0;
                [a.cos(), a.sin()]
            })
            .collect();
        let (curve, _) = fit_curve(&pts, &cfg).unwrap();
        let basis = SplineBasis::new(&cfg, Axis::Theta).unwrap();
        let worst = (0..1000)
            .map(|i| {
                let p = curve.point(&basis, TAU * i as f64 / 1000.0);
                (vec2::norm(p) - 1.0).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-3, "{worst}");
    }

    #[test]
    fn too_few_points_is_rank_deficient() {
        let cfg = SplineConfig::closed(3, 12);
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(matches!(fit_curve(&pts, &cfg), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn repeated_parameters_are_rank_deficient() {
        let cfg = SplineConfig::open(3, 6);
        let pts = vec![[1.0, 1.0]; 10];
        let params = vec![1.0; 10];
        match fit_curve_with_params(&pts, &params, &cfg) {
            Err(Error::RankDeficient { distinct, unknowns, .. }) => {
                assert_eq!(distinct, 1);
                assert_eq!(unknowns, 6);
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }
}

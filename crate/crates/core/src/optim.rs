//! Limited-memory BFGS with a strong Wolfe line search.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use std::collections::VecDeque;

/// Norm used for the gradient stopping test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradNorm {
    #[default]
    Two,
    Sup,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimSettings<T> {
    /// Number of stored curvature pairs.
    pub memory: usize,
    pub max_iters: usize,
    /// Stop once the gradient norm drops below this value.
    pub grad_tol: T,
    pub norm: GradNorm,
    /// Sufficient-decrease constant.
    pub c1: T,
    /// Curvature constant.
    pub c2: T,
    /// Objective evaluations allowed per line search.
    pub max_line_search: usize,
    /// 0 is silent; 1 logs every iteration at info level.
    pub verbosity: u8,
}

impl<T: Scalar> Default for OptimSettings<T> {
    fn default() -> Self {
        Self {
            memory: 500,
            max_iters: 1500,
            grad_tol: T::lit(1e-6),
            norm: GradNorm::Two,
            c1: T::lit(1e-4),
            c2: T::lit(0.9),
            max_line_search: 40,
            verbosity: 0,
        }
    }
}

impl<T: Scalar> OptimSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if self.memory == 0 {
            return Err(Error::InvalidConfig("optimizer memory must be at least 1".into()));
        }
        if !(self.grad_tol > T::zero()) {
            return Err(Error::InvalidConfig(format!("grad_tol must be positive, got {}", self.grad_tol)));
        }
        if !(T::zero() < self.c1 && self.c1 < self.c2 && self.c2 < T::one()) {
            return Err(Error::InvalidConfig(format!(
                "line search constants need 0 < c1 < c2 < 1, got c1={} c2={}",
                self.c1, self.c2
            )));
        }
        if self.max_line_search == 0 {
            return Err(Error::InvalidConfig("max_line_search must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_tol(mut self, grad_tol: T) -> Self {
        self.grad_tol = grad_tol;
        self
    }

    pub fn with_memory(mut self, memory: usize) -> Self {
        self.memory = memory;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn grad_norm(&self, g: &[T]) -> T {
        match self.norm {
            GradNorm::Two => dot(g, g).sqrt(),
            GradNorm::Sup => g.iter().fold(T::zero(), |m, v| m.max(v.abs())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Tolerance,
    MaxIters,
    LineSearchFailure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Tolerance => "tolerance",
            Termination::MaxIters => "max_iters",
            Termination::LineSearchFailure => "line_search_failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult<T> {
    pub x: Vec<T>,
    pub value: T,
    pub grad: Vec<T>,
    /// Norm of `grad`, which is the gradient at `x`.
    pub grad_norm: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

#[inline]
fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

struct Pair<T> {
    s: Vec<T>,
    y: Vec<T>,
    rho: T,
}

/// Two-loop recursion: returns −H g for the inverse Hessian approximation
/// built from `pairs` (oldest first) with initial scaling `gamma`.
fn two_loop<T: Scalar>(pairs: &VecDeque<Pair<T>>, g: &[T], gamma: T) -> Vec<T> {
    let mut q = g.to_vec();
    let mut alpha = vec![T::zero(); pairs.len()];
    for (i, p) in pairs.iter().enumerate().rev() {
        let a = p.rho * dot(&p.s, &q);
        alpha[i] = a;
        for (qj, &yj) in q.iter_mut().zip(&p.y) {
            *qj -= a * yj;
        }
    }
    for v in q.iter_mut() {
        *v *= gamma;
    }
    for (i, p) in pairs.iter().enumerate() {
        let b = p.rho * dot(&p.y, &q);
        for (qj, &sj) in q.iter_mut().zip(&p.s) {
            *qj += (alpha[i] - b) * sj;
        }
    }
    for v in q.iter_mut() {
        *v = -*v;
    }
    q
}

/// One line-search sample.
#[derive(Clone)]
struct Sample<T> {
    alpha: T,
    value: T,
    /// Directional derivative; `None` when the objective failed there.
    slope: Option<T>,
    grad: Vec<T>,
}

struct LineSearch<'a, T, F> {
    f: &'a mut F,
    x: &'a [T],
    d: &'a [T],
    phi0: T,
    dphi0: T,
    c1: T,
    c2: T,
    budget: usize,
    evaluations: usize,
}

impl<T: Scalar, F: FnMut(&[T]) -> Result<(T, Vec<T>)>> LineSearch<'_, T, F> {
    fn eval(&mut self, alpha: T) -> Sample<T> {
        self.evaluations += 1;
        let xt: Vec<T> = self.x.iter().zip(self.d).map(|(&xi, &di)| xi + alpha * di).collect();
        match (self.f)(&xt) {
            Ok((v, g)) if v.is_finite() && g.iter().all(|x| x.is_finite()) => Sample {
                alpha,
                value: v,
                slope: Some(dot(&g, self.d)),
                grad: g,
            },
            Ok(_) | Err(_) => Sample {
                alpha,
                value: T::infinity(),
                slope: None,
                grad: Vec::new(),
            },
        }
    }

    fn armijo(&self, s: &Sample<T>) -> bool {
        s.value <= self.phi0 + self.c1 * s.alpha * self.dphi0
    }

    fn curvature(&self, slope: T) -> bool {
        slope.abs() <= -self.c2 * self.dphi0
    }

    /// Returns an accepted sample, or the best Armijo point found when the
    /// budget runs out, or `None`.
    fn search(&mut self, alpha0: T) -> Option<Sample<T>> {
        let mut prev = Sample {
            alpha: T::zero(),
            value: self.phi0,
            slope: Some(self.dphi0),
            grad: Vec::new(),
        };
        let mut alpha = alpha0;
        let mut first = true;
        while self.evaluations < self.budget {
            let cur = self.eval(alpha);
            if !self.armijo(&cur) || (!first && cur.value >= prev.value) {
                return self.zoom(prev, cur);
            }
            let slope = cur.slope.unwrap();
            if self.curvature(slope) {
                return Some(cur);
            }
            if slope >= T::zero() {
                return self.zoom(cur, prev);
            }
            first = false;
            alpha *= T::lit(2.0);
            prev = cur;
        }
        (prev.alpha > T::zero()).then_some(prev)
    }

    fn zoom(&mut self, mut lo: Sample<T>, mut hi: Sample<T>) -> Option<Sample<T>> {
        while self.evaluations < self.budget {
            let alpha = interpolate(&lo, &hi);
            if (alpha - lo.alpha).abs() <= T::epsilon() * lo.alpha.abs().max(T::one()) {
                break;
            }
            let cur = self.eval(alpha);
            if !self.armijo(&cur) || cur.value >= lo.value {
                hi = cur;
                continue;
            }
            let slope = cur.slope.unwrap();
            if self.curvature(slope) {
                return Some(cur);
            }
            if slope * (hi.alpha - lo.alpha) >= T::zero() {
                hi = lo;
            }
            lo = cur;
        }
        (lo.alpha > T::zero()).then_some(lo)
    }
}

/// Safeguarded cubic interpolation between two samples, falling back to
/// bisection when the cubic is unusable.
fn interpolate<T: Scalar>(lo: &Sample<T>, hi: &Sample<T>) -> T {
    let (a, b) = (lo.alpha, hi.alpha);
    let mid = (a + b) * T::lit(0.5);
    let (Some(da), Some(db)) = (lo.slope, hi.slope) else {
        return mid;
    };
    let d1 = da + db - T::lit(3.0) * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - da * db;
    if !(disc >= T::zero()) {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let t = b - (b - a) * (db + d2 - d1) / (db - da + T::lit(2.0) * d2);
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = T::lit(0.1) * (right - left);
    if t.is_finite() && t >= left + margin && t <= right - margin {
        t
    } else {
        mid
    }
}

/// Minimizes a smooth objective returning `(value, gradient)`.
///
/// An error from the objective at `x0` is returned; at trial points it is
/// treated as an infinite value so the line search backs off. Line-search
/// failure is a termination reason, not an error, and the last iterate is
/// returned.
pub fn minimize<T, F>(mut f: F, x0: Vec<T>, settings: &OptimSettings<T>) -> Result<OptimResult<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<(T, Vec<T>)>,
{
    settings.validate()?;
    let n = x0.len();
    let (mut value, mut grad) = f(&x0)?;
    if grad.len() != n {
        return Err(Error::ShapeMismatch(format!("objective returned {} gradient entries for {n} unknowns", grad.len())));
    }
    let mut x = x0;
    let mut evaluations = 1;
    let mut pairs: VecDeque<Pair<T>> = VecDeque::with_capacity(settings.memory.min(64));
    let mut gamma = T::one();
    let mut gnorm = settings.grad_norm(&grad);
    let curvature_tol = T::lit(1e-10);

    let mut iterations = 0;
    let termination = loop {
        if gnorm < settings.grad_tol {
            break Termination::Tolerance;
        }
        if iterations >= settings.max_iters {
            break Termination::MaxIters;
        }
        let mut d = two_loop(&pairs, &grad, gamma);
        let mut slope = dot(&grad, &d);
        if !(slope < T::zero()) {
            // Not a descent direction: drop the history.
            pairs.clear();
            gamma = T::one();
            d = grad.iter().map(|&g| -g).collect();
            slope = dot(&grad, &d);
        }
        let alpha0 = if pairs.is_empty() {
            T::one().min(T::one() / dot(&d, &d).sqrt())
        } else {
            T::one()
        };
        let mut ls = LineSearch {
            f: &mut f,
            x: &x,
            d: &d,
            phi0: value,
            dphi0: slope,
            c1: settings.c1,
            c2: settings.c2,
            budget: settings.max_line_search,
            evaluations: 0,
        };
        let accepted = ls.search(alpha0);
        evaluations += ls.evaluations;
        let Some(step) = accepted else {
            break Termination::LineSearchFailure;
        };

        let s: Vec<T> = d.iter().map(|&di| step.alpha * di).collect();
        let y: Vec<T> = step.grad.iter().zip(&grad).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > curvature_tol * (yy * dot(&s, &s)).sqrt() {
            if pairs.len() == settings.memory {
                pairs.pop_front();
            }
            gamma = sy / yy;
            pairs.push_back(Pair { s: s.clone(), y, rho: T::one() / sy });
        }
        for (xi, si) in x.iter_mut().zip(&s) {
            *xi += *si;
        }
        value = step.value;
        grad = step.grad;
        gnorm = settings.grad_norm(&grad);
        iterations += 1;
        if settings.verbosity > 0 {
            log::info!("iter {iterations}: f={value:.6e} |g|={gnorm:.3e} step={:.3e}", step.alpha);
        } else {
            log::trace!("iter {iterations}: f={value:.6e} |g|={gnorm:.3e} step={:.3e}", step.alpha);
        }
    };

    Ok(OptimResult {
        x,
        value,
        grad,
        grad_norm: gnorm,
        iterations,
        evaluations,
        termination,
    })
}

//! Geodesic boundary value problem with a varifold endpoint constraint.
//!
//! The path starts at the source curve (row 0, never a free variable) and
//! its last row is pulled towards `r A (c₁ + b)`, the target under an
//! optional similarity. Two relaxations are solved with [`minimize`]:
//!
//! * quadratic penalty: `E(c) + λ_w d²`
//! * augmented Lagrangian: `E(c) − λ d² + (μ/2) d⁴`, with outer multiplier
//!   and penalty updates.
//!
//! Free variables are the rows `1..N_t` of the path control array followed
//! by the active transform parameters in the order translation `b`, angle,
//! `log r`.

use crate::bspline::{resample_curve, DiscreteCurve, DiscretePath, SplineConfig, SplineSpace};
use crate::error::{Error, Result};
use crate::metric::{energy_and_full_gradient, MetricParams};
use crate::optim::{minimize, OptimSettings, Termination};
use crate::scalar::Scalar;
use crate::varifold::{
    apply_similarity, varifold_dist_sq_with_gradients, Similarity, VarifoldKernel, VarifoldSampling,
};
use crate::vec2;

/// Parameters of the augmented Lagrangian outer loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugLagState<T> {
    /// Multiplier λ, non-positive at start.
    pub lambda: T,
    /// Penalty weight μ.
    pub mu: T,
    /// Inner gradient tolerance τ.
    pub tau: T,
    /// Constraint tolerance on d².
    pub eps: T,
    /// Penalty growth factor ϱ.
    pub rho: T,
    pub tau_final: T,
    pub k_max: usize,
}

impl<T: Scalar> Default for AugLagState<T> {
    fn default() -> Self {
        Self {
            lambda: T::zero(),
            mu: T::one(),
            tau: T::one(),
            eps: T::lit(0.01),
            rho: T::lit(10.0),
            tau_final: T::lit(0.001),
            k_max: 20,
        }
    }
}

impl<T: Scalar> AugLagState<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda <= T::zero()) {
            return bad(format!("initial lambda must be <= 0, got {}", self.lambda));
        }
        if !(self.mu > T::zero()) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.tau > T::zero()) || !(self.tau_final > T::zero()) {
            return bad("tau and tau_final must be positive".into());
        }
        if !(self.eps > T::zero()) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.rho > T::one()) {
            return bad(format!("rho must exceed 1, got {}", self.rho));
        }
        if self.k_max == 0 {
            return bad("k_max must be at least 1".into());
        }
        Ok(())
    }

    /// Equivalent state for curves scaled by `factor` under a scale-invariant
    /// metric with the kernel scale multiplied by `factor`: d² grows by
    /// factor², gradient norms shrink by 1/factor.
    pub fn rescaled(&self, factor: T) -> Self {
        let f2 = factor * factor;
        Self {
            lambda: self.lambda / f2,
            mu: self.mu / (f2 * f2),
            tau: self.tau / factor,
            eps: self.eps * f2,
            tau_final: self.tau_final / factor,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatchMode<T> {
    Penalty { weight: T },
    AugmentedLagrangian(AugLagState<T>),
}

impl<T: Scalar> Default for MatchMode<T> {
    fn default() -> Self {
        MatchMode::AugmentedLagrangian(AugLagState::default())
    }
}

/// Which similarity parameters are optimized jointly with the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransformFlags {
    pub translation: bool,
    pub rotation: bool,
    pub scale: bool,
}

impl TransformFlags {
    pub fn count(&self) -> usize {
        2 * self.translation as usize + self.rotation as usize + self.scale as usize
    }
}

#[derive(Debug, Clone)]
pub struct MatchProblem<T> {
    space: SplineSpace<T>,
    source: DiscreteCurve<T>,
    target: DiscreteCurve<T>,
    pub metric: MetricParams<T>,
    pub kernel: VarifoldKernel<T>,
    pub transform: TransformFlags,
    pub mode: MatchMode<T>,
    pub sampling: VarifoldSampling,
}

impl<T: Scalar> MatchProblem<T> {
    /// Curves whose spatial layout differs from `config` are refitted.
    pub fn new(
        config: SplineConfig,
        source: &DiscreteCurve<T>,
        target: &DiscreteCurve<T>,
        metric: MetricParams<T>,
        kernel: VarifoldKernel<T>,
    ) -> Result<Self> {
        let space = SplineSpace::new(config)?;
        metric.validate()?;
        kernel.validate()?;
        Ok(Self {
            source: resample_curve(source, &config)?,
            target: resample_curve(target, &config)?,
            space,
            metric,
            kernel,
            transform: TransformFlags::default(),
            mode: MatchMode::default(),
            sampling: VarifoldSampling::Quadrature,
        })
    }

    pub fn with_transform(mut self, transform: TransformFlags) -> Self {
        if transform.scale && !self.metric.length_weighted {
            log::warn!("scale optimization with a constant-coefficient metric changes the geodesic problem");
        }
        self.transform = transform;
        self
    }

    pub fn with_mode(mut self, mode: MatchMode<T>) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_sampling(mut self, sampling: VarifoldSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn space(&self) -> &SplineSpace<T> {
        &self.space
    }

    pub fn config(&self) -> &SplineConfig {
        self.space.config()
    }

    pub fn source(&self) -> &DiscreteCurve<T> {
        &self.source
    }

    pub fn target(&self) -> &DiscreteCurve<T> {
        &self.target
    }

    /// The target moved by `sim`.
    pub fn transformed_target(&self, sim: &Similarity<T>) -> DiscreteCurve<T> {
        apply_similarity(&self.target, sim)
    }

    /// Number of free variables.
    pub fn n_free(&self) -> usize {
        let cfg = self.config();
        2 * (cfg.ctrl_t - 1) * cfg.ctrl_theta + self.transform.count()
    }

    /// Flattens the free rows of `path` and the active parameters of `sim`.
    pub fn pack(&self, path: &DiscretePath<T>, sim: &Similarity<T>) -> Result<Vec<T>> {
        self.check_path(path)?;
        let n = self.config().ctrl_theta;
        let mut x = Vec::with_capacity(self.n_free());
        for p in &path.ctrl[n..] {
            x.extend_from_slice(p);
        }
        if self.transform.translation {
            x.extend_from_slice(&sim.translation);
        }
        if self.transform.rotation {
            x.push(sim.angle);
        }
        if self.transform.scale {
            x.push(sim.scale.ln());
        }
        Ok(x)
    }

    /// Inverse of [`pack`](Self::pack). Inactive transform parameters take
    /// their identity values; row 0 is the source, copied bit for bit.
    pub fn unpack(&self, x: &[T]) -> Result<(DiscretePath<T>, Similarity<T>)> {
        if x.len() != self.n_free() {
            return Err(Error::ShapeMismatch(format!("expected {} free variables, got {}", self.n_free(), x.len())));
        }
        let cfg = *self.config();
        let n_path = 2 * (cfg.ctrl_t - 1) * cfg.ctrl_theta;
        let mut ctrl = self.source.ctrl.clone();
        ctrl.extend(x[..n_path].chunks_exact(2).map(|c| [c[0], c[1]]));
        let mut rest = x[n_path..].iter().copied();
        let mut sim = Similarity::identity();
        if self.transform.translation {
            sim.translation = [rest.next().unwrap(), rest.next().unwrap()];
        }
        if self.transform.rotation {
            sim.angle = rest.next().unwrap();
        }
        if self.transform.scale {
            sim.scale = rest.next().unwrap().exp();
        }
        Ok((DiscretePath::new(cfg, ctrl)?, sim))
    }

    fn check_path(&self, path: &DiscretePath<T>) -> Result<()> {
        let cfg = self.config();
        if !path.config.same_space(cfg) || path.config.ctrl_t != cfg.ctrl_t {
            return Err(Error::ShapeMismatch("path layout differs from the problem's spline config".into()));
        }
        if path.row(0) != self.source.ctrl.as_slice() {
            return Err(Error::InvalidArgument("path does not start at the source curve".into()));
        }
        Ok(())
    }

    /// Constant path at the source curve.
    pub fn initial_path(&self) -> DiscretePath<T> {
        DiscretePath::constant(*self.config(), &self.source).expect("source matches config")
    }
}

/// Value of a relaxed objective and its gradient in [`MatchProblem::pack`]
/// layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue<T> {
    pub value: T,
    pub energy: T,
    pub dist_sq: T,
    pub grad: Vec<T>,
}

/// Evaluates `E + φ(d²)` where `phi` returns `(φ(d²), φ'(d²))`.
fn evaluate<T: Scalar>(
    problem: &MatchProblem<T>,
    path: &DiscretePath<T>,
    sim: &Similarity<T>,
    phi: impl Fn(T) -> (T, T),
) -> Result<ObjectiveValue<T>> {
    problem.check_path(path)?;
    let space = &problem.space;
    let n = problem.config().ctrl_theta;
    let (energy, mut grad_e) = energy_and_full_gradient(space, path, &problem.metric)?;
    grad_e.drain(..n);

    let end = path.end();
    let target = problem.transformed_target(sim);
    let d = varifold_dist_sq_with_gradients(space, &end, &target, &problem.kernel, problem.sampling)?;
    let (pen, dpen) = phi(d.dist_sq);

    let last = grad_e.len() - n;
    for (g, ge) in grad_e[last..].iter_mut().zip(&d.grad_first) {
        vec2::axpy(g, dpen, *ge);
    }
    let mut grad = Vec::with_capacity(problem.n_free());
    for g in &grad_e {
        grad.extend_from_slice(g);
    }

    // Chain rule through q_j = r A (p_j + b).
    let flags = problem.transform;
    if flags.count() > 0 {
        let gq = &d.grad_second;
        if flags.translation {
            let mut gb = vec2::zero();
            for g in gq {
                vec2::axpy(&mut gb, sim.scale, vec2::rotate(-sim.angle, *g));
            }
            grad.push(dpen * gb[0]);
            grad.push(dpen * gb[1]);
        }
        if flags.rotation {
            let ga: T = gq.iter().zip(&target.ctrl).map(|(g, q)| vec2::dot(*g, vec2::perp(*q))).sum();
            grad.push(dpen * ga);
        }
        if flags.scale {
            let gr: T = gq.iter().zip(&target.ctrl).map(|(g, q)| vec2::dot(*g, *q)).sum();
            grad.push(dpen * gr);
        }
    }
    Ok(ObjectiveValue {
        value: energy + pen,
        energy,
        dist_sq: d.dist_sq,
        grad,
    })
}

/// `E(c) + λ_w d²(c(1), r A (c₁ + b))`.
pub fn penalty_objective<T: Scalar>(
    problem: &MatchProblem<T>,
    path: &DiscretePath<T>,
    transform: &Similarity<T>,
    weight: T,
) -> Result<ObjectiveValue<T>> {
    if weight < T::zero() {
        return Err(Error::InvalidArgument(format!("penalty weight must be non-negative, got {weight}")));
    }
    evaluate(problem, path, transform, |d2| (weight * d2, weight))
}

/// `E(c) − λ d² + (μ/2) d⁴`.
pub fn auglag_objective<T: Scalar>(
    problem: &MatchProblem<T>,
    path: &DiscretePath<T>,
    transform: &Similarity<T>,
    lambda: T,
    mu: T,
) -> Result<ObjectiveValue<T>> {
    if mu < T::zero() {
        return Err(Error::InvalidArgument(format!("mu must be non-negative, got {mu}")));
    }
    let half = T::lit(0.5);
    evaluate(problem, path, transform, |d2| (-lambda * d2 + half * mu * d2 * d2, -lambda + mu * d2))
}

/// One row of the solver log.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterIteration<T> {
    pub objective: T,
    pub grad_norm: T,
    pub energy: T,
    pub dist_sq: T,
    /// Multiplier and penalty weight used in this inner solve.
    pub lambda: T,
    pub mu: T,
    pub tau: T,
    pub inner_iterations: usize,
    pub inner_termination: Termination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchTermination {
    /// Penalty: gradient tolerance met. Augmented Lagrangian: both
    /// acceptance tests passed.
    Converged,
    /// Penalty only: the optimizer stopped for another reason.
    Optimizer(Termination),
    /// Augmented Lagrangian ran out of outer iterations; the result holds
    /// the iterate with the smallest constraint violation.
    MaxOuterIterations,
}

impl MatchTermination {
    pub fn converged(&self) -> bool {
        matches!(self, MatchTermination::Converged)
    }
}

impl std::fmt::Display for MatchTermination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MatchTermination::Converged => f.write_str("converged"),
            MatchTermination::Optimizer(t) => write!(f, "optimizer_{t}"),
            MatchTermination::MaxOuterIterations => f.write_str("max_outer_iterations"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatchResult<T> {
    pub path: DiscretePath<T>,
    /// Similarity applied to the target.
    pub transform: Similarity<T>,
    pub energy: T,
    pub dist_sq: T,
    /// λ_k for every outer iteration (one entry for the penalty solver).
    pub multipliers: Vec<T>,
    pub log: Vec<OuterIteration<T>>,
    pub termination: MatchTermination,
}

impl<T: Scalar> MatchResult<T> {
    /// √E, an upper approximation of the geodesic distance.
    pub fn distance(&self) -> T {
        self.energy.max(T::zero()).sqrt()
    }
}

/// Solves with the problem's configured mode.
pub fn solve<T: Scalar>(problem: &MatchProblem<T>, settings: &OptimSettings<T>) -> Result<MatchResult<T>> {
    match problem.mode {
        MatchMode::Penalty { weight } => solve_penalty(problem, weight, settings),
        MatchMode::AugmentedLagrangian(state) => solve_auglag(problem, state, settings),
    }
}

/// Single minimization of the penalty functional from the constant path.
pub fn solve_penalty<T: Scalar>(
    problem: &MatchProblem<T>,
    weight: T,
    settings: &OptimSettings<T>,
) -> Result<MatchResult<T>> {
    if !(weight > T::zero()) {
        return Err(Error::InvalidArgument(format!("penalty weight must be positive, got {weight}")));
    }
    let x0 = problem.pack(&problem.initial_path(), &Similarity::identity())?;
    let run = minimize(
        |x: &[T]| {
            let (path, sim) = problem.unpack(x)?;
            let v = penalty_objective(problem, &path, &sim, weight)?;
            Ok((v.value, v.grad))
        },
        x0,
        settings,
    )?;
    let (path, transform) = problem.unpack(&run.x)?;
    let v = penalty_objective(problem, &path, &transform, weight)?;
    log::info!(
        "penalty solve: E={:.6e} d2={:.3e} iters={} ({})",
        v.energy,
        v.dist_sq,
        run.iterations,
        run.termination
    );
    let termination = match run.termination {
        Termination::Tolerance => MatchTermination::Converged,
        t => MatchTermination::Optimizer(t),
    };
    Ok(MatchResult {
        path,
        transform,
        energy: v.energy,
        dist_sq: v.dist_sq,
        multipliers: vec![-weight],
        log: vec![OuterIteration {
            objective: v.value,
            grad_norm: run.grad_norm,
            energy: v.energy,
            dist_sq: v.dist_sq,
            lambda: -weight,
            mu: T::zero(),
            tau: settings.grad_tol,
            inner_iterations: run.iterations,
            inner_termination: run.termination,
        }],
        termination,
    })
}

/// Augmented Lagrangian outer loop with warm starts.
///
/// Each outer iteration minimizes `L(·, λ_k, μ_k)` to gradient norm `τ_k`,
/// accepts when `d² ≤ ε` and `τ_k ≤ τ_final`, and otherwise updates
/// `λ ← λ − μ d²`, grows `μ` by `ϱ` if the constraint is violated and halves
/// `τ` while it exceeds `τ_final`. The `grad_tol` of `settings` is replaced
/// by `τ_k`.
pub fn solve_auglag<T: Scalar>(
    problem: &MatchProblem<T>,
    state0: AugLagState<T>,
    settings: &OptimSettings<T>,
) -> Result<MatchResult<T>> {
    state0.validate()?;
    let mut state = state0;
    let mut x = problem.pack(&problem.initial_path(), &Similarity::identity())?;
    let mut log = Vec::new();
    let mut multipliers = Vec::new();
    let mut best: Option<(T, Vec<T>)> = None;

    for k in 0..state.k_max {
        let (lambda, mu, tau) = (state.lambda, state.mu, state.tau);
        let run = minimize(
            |x: &[T]| {
                let (path, sim) = problem.unpack(x)?;
                let v = auglag_objective(problem, &path, &sim, lambda, mu)?;
                Ok((v.value, v.grad))
            },
            x,
            &settings.with_tol(tau),
        )?;
        x = run.x;
        let (path, transform) = problem.unpack(&x)?;
        let v = auglag_objective(problem, &path, &transform, lambda, mu)?;
        log::info!(
            "outer {k}: E={:.6e} d2={:.3e} lambda={lambda:.3e} mu={mu:.3e} tau={tau:.3e} inner={} ({})",
            v.energy,
            v.dist_sq,
            run.iterations,
            run.termination
        );
        multipliers.push(lambda);
        log.push(OuterIteration {
            objective: v.value,
            grad_norm: run.grad_norm,
            energy: v.energy,
            dist_sq: v.dist_sq,
            lambda,
            mu,
            tau,
            inner_iterations: run.iterations,
            inner_termination: run.termination,
        });
        if v.dist_sq <= state.eps && tau <= state.tau_final {
            return Ok(MatchResult {
                path,
                transform,
                energy: v.energy,
                dist_sq: v.dist_sq,
                multipliers,
                log,
                termination: MatchTermination::Converged,
            });
        }
        if best.as_ref().is_none_or(|(d, _)| v.dist_sq < *d) {
            best = Some((v.dist_sq, x.clone()));
        }
        state.lambda = lambda - mu * v.dist_sq;
        if v.dist_sq > state.eps {
            state.mu = mu * state.rho;
        }
        if tau > state.tau_final {
            state.tau = tau * T::lit(0.5);
        }
    }

    let (_, xb) = best.expect("k_max >= 1");
    let (path, transform) = problem.unpack(&xb)?;
    let v = penalty_objective(problem, &path, &transform, T::zero())?;
    log::warn!("augmented Lagrangian stopped after {} outer iterations with d2={:.3e}", state.k_max, v.dist_sq);
    Ok(MatchResult {
        path,
        transform,
        energy: v.energy,
        dist_sq: v.dist_sq,
        multipliers,
        log,
        termination: MatchTermination::MaxOuterIterations,
    })
}

/// √E of the solved geodesic between the problem's curves.
pub fn shape_distance<T: Scalar>(problem: &MatchProblem<T>, settings: &OptimSettings<T>) -> Result<T> {
    Ok(solve(problem, settings)?.distance())
}

mod common;

use common::*;
use elastic_geodesics::bspline::{DiscretePath, SplineSpace};
use elastic_geodesics::metric::{path_energy, path_energy_gradient, MetricParams};
use elastic_geodesics::SplineConfig;

fn check(cfg: SplineConfig, params: MetricParams<f64>, seed: u64) -> f64 {
    let space = SplineSpace::new(cfg).unwrap();
    let path = random_path(cfg, seed, 0.15);
    let grad = flatten(&path_energy_gradient(&space, &path, &params).unwrap());
    let n_theta = cfg.ctrl_theta;
    let mut r = rng(seed + 1000);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let dir = random_direction(&mut r, grad.len());
        let shifted = |eps: f64| {
            let mut p = path.clone();
            for (k, q) in p.ctrl[n_theta..].iter_mut().enumerate() {
                q[0] += eps * dir[2 * k];
                q[1] += eps * dir[2 * k + 1];
            }
            p
        };
        let fd = central_diff(|e| path_energy(&space, &shifted(e), &params).unwrap(), 1e-5);
        let an: f64 = grad.iter().zip(&dir).map(|(a, b)| a * b).sum();
        worst = worst.max(rel_err(an, fd));
    }
    worst
}

#[test]
fn gradient_matches_finite_differences_closed() {
    let cfg = SplineConfig::closed(3, 24).with_time(2, 6);
    for params in [
        MetricParams::constant(1.0, 10.0, 0.1, 1e-3),
        MetricParams::scale_invariant(1.0, 10.0, 0.1, 1e-3),
        MetricParams::constant(0.5, 0.0, 2.0, 0.3),
    ] {
        for seed in 0..3 {
            let e = check(cfg, params, seed);
            assert!(e <= 1e-6, "{params:?} seed {seed}: {e:e}");
        }
    }
}

#[test]
fn gradient_matches_finite_differences_open() {
    let cfg = SplineConfig::open(3, 16).with_time(2, 5);
    for params in [MetricParams::constant(1.0, 10.0, 0.1, 1e-3), MetricParams::scale_invariant(1.0, 10.0, 0.1, 1e-3)] {
        let e = check(cfg, params, 7);
        assert!(e <= 1e-6, "{params:?}: {e:e}");
    }
}

#[test]
fn translation_gradient_matches_quadratic_form() {
    // c(t) = c0 + γ(t) w with interior rows translated uniformly: E is the
    // quadratic a0 ℓ |w|² Σ_a w_a γ'(t_a)², differentiated along the uniform
    // translation of every free row.
    let cfg = SplineConfig::closed(3, 12).with_time(2, 5);
    let space = SplineSpace::new(cfg).unwrap();
    let c0 = circle(cfg, 1.0, [0.0, 0.0]);
    let shifts = [0.0, 0.2, 0.5, 0.7, 1.0];
    let w = [1.0, 0.5];
    let mut ctrl = Vec::new();
    for s in shifts {
        ctrl.extend(c0.translated([s * w[0], s * w[1]]).ctrl);
    }
    let path = DiscretePath::new(cfg, ctrl).unwrap();
    let params = MetricParams::constant(1.0, 0.0, 0.0, 0.0);
    let g = path_energy_gradient(&space, &path, &params).unwrap();
    // Direction: move every free row by w scaled by its row index weight.
    let dir_rows = [0.0, 1.0, -2.0, 0.5, 1.5];
    let mut an = 0.0;
    for (k, p) in g.iter().enumerate() {
        let row = 1 + k / 12;
        an += dir_rows[row] * (p[0] * w[0] + p[1] * w[1]);
    }
    let l = elastic_geodesics::metric::curve_length(&space, &c0).unwrap();
    // Closed form: γ'(t) = Σ s_i B_i'(t); E(ε) = a0 ℓ |w|² ∫ (γ' + ε δ')² dt.
    let tb = space.time_basis();
    let grid = space.time_grid();
    let mut de = 0.0;
    for (a, &t) in grid.sites.iter().enumerate() {
        let b = tb.eval(t);
        let gp: f64 = b.iter().map(|(i, d)| shifts[i] * d[1]).sum();
        let dp: f64 = b.iter().map(|(i, d)| dir_rows[i] * d[1]).sum();
        de += grid.weights[a] * 2.0 * gp * dp;
    }
    de *= l * (w[0] * w[0] + w[1] * w[1]);
    assert!(rel_err(an, de) < 1e-10, "{an} vs {de}");
}

#![allow(dead_code)]

use elastic_geodesics::bspline::{fit_curve, fit_curve_with_params, DiscreteCurve, DiscretePath};
use elastic_geodesics::vec2::Point;
use elastic_geodesics::SplineConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Spline fit of an analytic closed curve sampled at its own parameter.
pub fn closed_curve<F: Fn(f64) -> Point<f64>>(cfg: SplineConfig, f: F) -> DiscreteCurve<f64> {
    let m = 8 * cfg.ctrl_theta;
    let params: Vec<f64> = (0..m).map(|i| TAU * i as f64 / m as f64).collect();
    let pts: Vec<_> = params.iter().map(|&t| f(t)).collect();
    fit_curve_with_params(&pts, &params, &cfg).unwrap().0
}

pub fn open_curve<F: Fn(f64) -> Point<f64>>(cfg: SplineConfig, f: F) -> DiscreteCurve<f64> {
    let m = 8 * cfg.ctrl_theta;
    let params: Vec<f64> = (0..m).map(|i| TAU * i as f64 / (m - 1) as f64).collect();
    let pts: Vec<_> = params.iter().map(|&t| f(t)).collect();
    fit_curve_with_params(&pts, &params, &cfg).unwrap().0
}

pub fn circle(cfg: SplineConfig, radius: f64, center: Point<f64>) -> DiscreteCurve<f64> {
    closed_curve(cfg, |a| [center[0] + radius * a.cos(), center[1] + radius * a.sin()])
}

pub fn ellipse(cfg: SplineConfig, ax: f64, ay: f64, angle: f64) -> DiscreteCurve<f64> {
    let (s, c) = angle.sin_cos();
    closed_curve(cfg, |a| {
        let (x, y) = (ax * a.cos(), ay * a.sin());
        [c * x - s * y, s * x + c * y]
    })
}

/// A bean-like perturbation of the unit circle.
pub fn bean(cfg: SplineConfig) -> DiscreteCurve<f64> {
    closed_curve(cfg, |a| {
        let r = 1.0 + 0.25 * (2.0 * a).cos() - 0.1 * a.sin();
        [1.2 * r * a.cos(), 0.8 * r * a.sin()]
    })
}

pub fn chord_circle(cfg: SplineConfig, n: usize) -> DiscreteCurve<f64> {
    let pts: Vec<_> = (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            [a.cos(), a.sin()]
        })
        .collect();
    fit_curve(&pts, &cfg).unwrap().0
}

/// Smooth random path: a base curve deformed by low-frequency modes whose
/// amplitudes vary smoothly in time and vanish at t = 0.
pub fn random_path(cfg: SplineConfig, seed: u64, amplitude: f64) -> DiscretePath<f64> {
    let mut r = rng(seed);
    let base = if cfg.closed {
        closed_curve(cfg, |a| [a.cos(), 0.8 * a.sin()])
    } else {
        open_curve(cfg, |a| [a, 0.3 * (a * 0.5).sin()])
    };
    let modes: Vec<[f64; 6]> = (0..3).map(|_| std::array::from_fn(|_| r.gen_range(-1.0..1.0))).collect();
    let mut ctrl = Vec::new();
    for i in 0..cfg.ctrl_t {
        let s = i as f64 / (cfg.ctrl_t - 1) as f64;
        for (j, p) in base.ctrl.iter().enumerate() {
            let x = TAU * j as f64 / cfg.ctrl_theta as f64;
            let mut d = [0.0, 0.0];
            for (k, m) in modes.iter().enumerate() {
                let kk = (k + 1) as f64;
                let time = s * (m[4] + m[5] * s);
                d[0] += amplitude * time * (m[0] * (kk * x).cos() + m[1] * (kk * x).sin());
                d[1] += amplitude * time * (m[2] * (kk * x).cos() + m[3] * (kk * x).sin());
            }
            ctrl.push([p[0] + d[0] + 0.3 * s, p[1] + d[1] - 0.1 * s]);
        }
    }
    DiscretePath::new(cfg, ctrl).unwrap()
}

pub fn random_direction(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
}

/// Five-point central difference of `f` at 0 with step `h`.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h)
}

/// Relative error between an analytic directional derivative and a central
/// difference.
pub fn rel_err(analytic: f64, fd: f64) -> f64 {
    let scale = analytic.abs().max(fd.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - fd).abs() / scale
    }
}

pub fn flatten(p: &[Point<f64>]) -> Vec<f64> {
    p.iter().flat_map(|x| [x[0], x[1]]).collect()
}

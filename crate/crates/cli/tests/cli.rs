mod common;

use common::*;
use elastic_geodesics::bspline::DiscretePath;
use elastic_geodesics::{Curve, SplineConfig};
use elastic_geodesics_cli::commands::{self, Manifest};
use elastic_geodesics_cli::config::{ModeName, RadialName};
use elastic_geodesics_cli::files::{CurveFile, PathFile};
use elastic_geodesics_cli::RunConfig;
use std::f64::consts::{LN_2, TAU};

#[test]
fn config_round_trips() {
    let mut cfg = RunConfig::default();
    let back = RunConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
    cfg.metric.length_weighted = true;
    cfg.kernel.radial = RadialName::Cauchy;
    cfg.kernel.sample_points = Some(300);
    cfg.options.mode = ModeName::Penalty;
    cfg.options.opt_rotation = true;
    cfg.optim.memory = 7;
    cfg.io.out = Some("somewhere".into());
    let back = RunConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.hash(), cfg.hash());
    assert_ne!(RunConfig::default().hash(), cfg.hash());
}

#[test]
fn defaults_match_the_documented_values() {
    let cfg = RunConfig::from_json("{}").unwrap();
    assert_eq!((cfg.spline.degree_theta, cfg.spline.degree_t, cfg.spline.ctrl_theta, cfg.spline.ctrl_t), (3, 2, 100, 10));
    assert_eq!((cfg.kernel.radial_scale, cfg.kernel.zonal_scale), (0.1, 0.3));
    assert_eq!((cfg.options.eps, cfg.options.tau_final), (0.01, 0.001));
    assert_eq!(cfg.optim.memory, 20);
    cfg.validate().unwrap();
}

#[test]
fn unknown_and_malformed_keys_are_named() {
    let err = RunConfig::from_json(r#"{ "metric": { "a3": 1.0 } }"#).unwrap_err();
    assert!(err.to_string().contains("metric.a3"), "{err}");
    let err = RunConfig::from_json(r#"{ "kernel": { "radial": "laplace" } }"#).unwrap_err();
    assert!(err.to_string().contains("kernel.radial"), "{err}");
    assert_eq!(err.exit_code(), 2);

    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{ "options": { "eps": "small" } }"#);
    let c = circle_file(dir.path(), "c", 1.0, [0.0, 0.0]);
    let out = run(&["--config", cfg.to_str().unwrap(), "geodesic", c.to_str().unwrap(), c.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("options.eps"));
    let out = run(&["energy", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let broken = write(dir.path(), "broken.json", "{ \"points\": [[0, 0], [1, 0]");
    let out = run(&["varifold-dist", broken.to_str().unwrap(), c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn curve_files_need_enough_points_and_one_representation() {
    let cfg = RunConfig::default();
    let few = CurveFile::from_points("few", true, vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
    assert!(few.to_curve(&cfg.spline).is_err());
    let mut both = CurveFile::from_points("both", true, bean_points(1.0));
    both.spline = Some(elastic_geodesics_cli::files::SplineCurveData {
        degree: 3,
        ctrl: vec![[0.0, 0.0]; 8],
    });
    assert!(both.to_curve(&cfg.spline).is_err());
}

#[test]
fn identical_curves_give_a_zero_energy_geodesic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let c = circle_file(dir.path(), "c", 1.0, [0.0, 0.0]);
    let out_dir = dir.path().join("run");
    let out = run(&["--config", cfg.to_str().unwrap(), "geodesic", c.to_str().unwrap(), c.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert!(m.energy <= 1e-8, "{}", m.energy);
    assert_eq!(m.config_hash, RunConfig::from_json(SMALL).unwrap().hash());
    let svg = std::fs::read_to_string(out_dir.join("geodesic.svg")).unwrap();
    let frames = polylines(&svg);
    assert_eq!(frames.len(), 5);
    for f in &frames[1..] {
        for (a, b) in f.iter().zip(&frames[0]) {
            assert!((a[0] - b[0]).abs() <= 1e-5 && (a[1] - b[1]).abs() <= 1e-5);
        }
    }
    let path: PathFile = serde_json::from_str(&std::fs::read_to_string(out_dir.join("path.json")).unwrap()).unwrap();
    assert_eq!(path.ctrl.len(), 6);
}

#[test]
fn non_convergence_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{ "spline": { "ctrl_theta": 20, "ctrl_t": 6 }, "options": { "k_max": 1 } }"#);
    let a = circle_file(dir.path(), "a", 1.0, [0.0, 0.0]);
    let b = circle_file(dir.path(), "b", 1.0, [1.0, 0.0]);
    let out_dir = dir.path().join("run");
    let out = run(&["--config", cfg.to_str().unwrap(), "geodesic", a.to_str().unwrap(), b.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    // The manifest is still written, with the reason.
    let m: Manifest = serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert!(!m.converged);
    assert_eq!(m.termination, "max_outer_iterations");
}

#[test]
fn geodesic_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let a = circle_file(dir.path(), "a", 1.0, [0.0, 0.0]);
    let b = write_json(dir.path(), "b.json", &CurveFile::from_points("bean", true, bean_points(1.0)));
    let go = |name: &str| {
        let o = dir.path().join(name);
        let out = run(&["--config", cfg.to_str().unwrap(), "geodesic", a.to_str().unwrap(), b.to_str().unwrap(), "--out", o.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(o.join("manifest.json")).unwrap(), std::fs::read(o.join("geodesic.svg")).unwrap())
    };
    assert_eq!(go("one"), go("two"));
}

fn path_file(dir: &std::path::Path, name: &str, path: &DiscretePath<f64>, duration: f64) -> std::path::PathBuf {
    let mut f = PathFile::from_path(path);
    f.duration = duration;
    write_json(dir, name, &f)
}

fn closed_circle(cfg: SplineConfig) -> Curve {
    let pts = sampled(8 * cfg.ctrl_theta, |a| [a.cos(), a.sin()]);
    let params: Vec<f64> = (0..pts.len()).map(|i| TAU * i as f64 / pts.len() as f64).collect();
    elastic_geodesics::bspline::fit_curve_with_params(&pts, &params, &cfg).unwrap().0
}

#[test]
fn energy_command_reproduces_analytic_values() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();

    let circle_cfg = SplineConfig::closed(3, 24).with_time(2, 6);
    let c = closed_circle(circle_cfg);
    let constant = path_file(dir.path(), "constant.json", &DiscretePath::constant(circle_cfg, &c).unwrap(), 1.0);
    let r = commands::energy(&constant, &cfg).unwrap();
    assert!([r.energy, r.a0, r.a1, r.b1, r.a2].iter().all(|v| v.abs() <= 1e-20));

    cfg.metric = elastic_geodesics_cli::config::MetricSection {
        a0: 2.0,
        a1: 3.0,
        b1: 5.0,
        a2: 7.0,
        length_weighted: false,
    };
    let moving = DiscretePath::linear(circle_cfg, &c, &c.translated([1.0, 0.0])).unwrap();
    let r = commands::energy(&path_file(dir.path(), "translation.json", &moving, 1.0), &cfg).unwrap();
    assert!(r.a1.abs() <= 1e-10 && r.b1.abs() <= 1e-10 && r.a2.abs() <= 1e-10, "{r:?}");
    let length = elastic_geodesics::metric::curve_length(&elastic_geodesics::Space::new(circle_cfg).unwrap(), &c).unwrap();
    assert!((r.a0 - 2.0 * length).abs() <= 1e-10 * length);

    // ((1 − t) θ, 0) on t ∈ [0, 1/2], stored on [0, 1] with duration 1/2.
    let seg_cfg = SplineConfig::open(3, 8).with_time(1, 11);
    let seg = elastic_geodesics::bspline::fit_curve_with_params(
        &(0..40).map(|i| [TAU * i as f64 / 39.0, 0.0]).collect::<Vec<_>>(),
        &(0..40).map(|i| TAU * i as f64 / 39.0).collect::<Vec<_>>(),
        &seg_cfg,
    )
    .unwrap()
    .0;
    let shrink = DiscretePath::linear(seg_cfg, &seg, &seg.scaled(0.5)).unwrap();
    cfg.metric = elastic_geodesics_cli::config::MetricSection {
        a0: 0.0,
        a1: 1.0,
        b1: 0.0,
        a2: 0.0,
        length_weighted: false,
    };
    let r = commands::energy(&path_file(dir.path(), "shrink.json", &shrink, 0.5), &cfg).unwrap();
    let exact = TAU * LN_2;
    assert!(((r.energy - exact) / exact).abs() <= 1e-3, "{}", r.energy);
}

#[test]
fn render_is_deterministic_and_geometrically_faithful() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SplineConfig::closed(3, 24).with_time(2, 4);
    let c = closed_circle(cfg);
    let p = path_file(dir.path(), "p.json", &DiscretePath::constant(cfg, &c).unwrap(), 1.0);
    let a = run(&["render", p.to_str().unwrap(), "--frames", "3"]);
    let b = run(&["render", p.to_str().unwrap(), "--frames", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let svg = String::from_utf8(a.stdout).unwrap();
    let frames = polylines(&svg);
    assert_eq!(frames.len(), 3);
    assert!(frames.iter().all(|f| f == &frames[0]));
    assert_eq!(frames[0].len(), 201);
    for v in &frames[0] {
        assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - 1.0).abs() <= 1e-3);
    }
    // Every vertex lies inside the shared viewBox.
    let vb_line = svg.lines().find(|l| l.contains(r#"class="frame""#)).unwrap();
    let s = vb_line.find("viewBox=\"").unwrap() + 9;
    let vb: Vec<f64> = vb_line[s..s + vb_line[s..].find('"').unwrap()].split(' ').map(|v| v.parse().unwrap()).collect();
    for v in &frames[0] {
        assert!(v[0] >= vb[0] && v[0] <= vb[0] + vb[2] && -v[1] >= vb[1] && -v[1] <= vb[1] + vb[3]);
    }
    assert!(svg.matches("stroke-dasharray").count() == 0);
    let t = circle_file(dir.path(), "t", 1.0, [0.5, 0.0]);
    let out = run(&["render", p.to_str().unwrap(), "--target", t.to_str().unwrap()]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().matches("stroke-dasharray").count(), 5);
}

#[test]
fn distance_matrix_of_copies_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    for n in ["a", "b", "c"] {
        write_json(dir.path(), &format!("{n}.json"), &CurveFile::from_points(n, true, bean_points(1.0)));
    }
    let list = write(dir.path(), "list.json", r#"{ "curves": ["a.json", "b.json", "c.json"] }"#);
    let cfg = write(dir.path(), "cfg.json", SMALL);
    let out_csv = dir.path().join("m.csv");
    let out = run(&["--config", cfg.to_str().unwrap(), "distance-matrix", list.to_str().unwrap(), "--jobs", "2", "--out", out_csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(out_csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "name,a,b,c");
    for row in &lines[1..4] {
        for v in row.split(',').skip(1) {
            assert!(v.parse::<f64>().unwrap().abs() <= 1e-4, "{row}");
        }
    }
    // Three pair rows with timings after the blank separator.
    assert!(lines[5].starts_with("first,second,distance"));
    assert_eq!(lines.len(), 9);
}

#[test]
fn failed_pairs_are_nan_and_the_run_continues() {
    let dir = tempfile::tempdir().unwrap();
    write_json(dir.path(), "a.json", &CurveFile::from_points("a", true, bean_points(1.0)));
    write_json(dir.path(), "b.json", &CurveFile::from_points("b", true, bean_points(1.0)));
    // An open curve cannot be matched with closed ones.
    write_json(dir.path(), "c.json", &CurveFile::from_points("c", false, sampled(40, |a| [a, 0.1 * a.sin()])));
    let list = write(dir.path(), "list.json", r#"{ "curves": ["a.json", "b.json", "c.json"] }"#);
    let cfg = RunConfig::from_json(SMALL).unwrap();
    let m = commands::distance_matrix(&list, &cfg, 3).unwrap();
    assert!(m.values[0][1].abs() <= 1e-4);
    assert!(m.values[0][2].is_nan() && m.values[1][2].is_nan());
    assert!(m.pairs.iter().filter(|p| p.status.starts_with("error")).count() == 2);
}

#[test]
fn varifold_distance_of_a_curve_to_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = circle_file(dir.path(), "a", 1.0, [0.0, 0.0]);
    let b = circle_file(dir.path(), "b", 1.0, [0.3, 0.0]);
    let cfg = RunConfig::from_json(SMALL).unwrap();
    assert!(commands::varifold_dist(&a, &a, &cfg).unwrap().dist_sq.abs() <= 1e-12);
    assert!(commands::varifold_dist(&a, &b, &cfg).unwrap().dist_sq > 0.1);
}

#![allow(dead_code)]

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use elastic_geodesics_cli::files::CurveFile;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_elastic-geodesics"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> PathBuf {
    write(dir, name, &serde_json::to_string_pretty(value).unwrap())
}

pub fn sampled(m: usize, f: impl Fn(f64) -> [f64; 2]) -> Vec<[f64; 2]> {
    (0..m).map(|i| f(TAU * i as f64 / m as f64)).collect()
}

pub fn circle_file(dir: &Path, name: &str, radius: f64, center: [f64; 2]) -> PathBuf {
    let pts = sampled(120, |a| [center[0] + radius * a.cos(), center[1] + radius * a.sin()]);
    write_json(dir, &format!("{name}.json"), &CurveFile::from_points(name, true, pts))
}

pub fn bean_points(scale: f64) -> Vec<[f64; 2]> {
    sampled(160, |a| {
        let r = 1.0 + 0.25 * (2.0 * a).cos() - 0.1 * a.sin();
        [scale * 1.2 * r * a.cos(), scale * 0.8 * r * a.sin()]
    })
}

/// Small discretization that keeps CLI runs fast.
pub const SMALL: &str = r#"{ "spline": { "ctrl_theta": 20, "ctrl_t": 6 } }"#;

pub fn polylines(svg: &str) -> Vec<Vec<[f64; 2]>> {
    svg.lines()
        .filter(|l| l.contains(r#"class="curve""#))
        .map(|l| {
            let start = l.find("points=\"").unwrap() + 8;
            let end = start + l[start..].find('"').unwrap();
            l[start..end]
                .split(' ')
                .map(|pair| {
                    let (x, y) = pair.split_once(',').unwrap();
                    // The SVG y axis is flipped.
                    [x.parse().unwrap(), -y.parse::<f64>().unwrap()]
                })
                .collect()
        })
        .collect()
}

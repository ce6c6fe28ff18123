#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use cfrht::Complex64;
use cfrht_cli::io::{self, Signal, Signal1D, Signal2D};
use nalgebra::DMatrix;

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn cfrht(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cfrht")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let g = cfrht::Grid1D::new(lo, hi, n).unwrap();
    g.points().collect()
}

pub fn write_1d(dir: &Path, name: &str, x: &[f64], f: impl Fn(f64) -> Complex64) -> PathBuf {
    let s = Signal1D { x: x.to_vec(), values: x.iter().map(|&v| f(v)).collect() };
    let path = dir.join(name);
    std::fs::write(&path, io::render_1d(&s)).unwrap();
    path
}

pub fn write_2d(dir: &Path, name: &str, axis: &[f64], f: impl Fn(Complex64) -> Complex64) -> PathBuf {
    let n = axis.len();
    let values = DMatrix::from_fn(n, n, |i, j| f(Complex64::new(axis[i], axis[j])));
    let s = Signal2D { eta1: axis.to_vec(), eta2: axis.to_vec(), values };
    let path = dir.join(name);
    std::fs::write(&path, io::render_2d(&s)).unwrap();
    path
}

pub fn read_1d(path: &Path) -> Signal1D {
    match io::parse_signal(&std::fs::read_to_string(path).unwrap()).unwrap() {
        Signal::One(s) => s,
        Signal::Two(_) => panic!("expected 1-D"),
    }
}

pub fn read_2d(path: &Path) -> Signal2D {
    match io::parse_signal(&std::fs::read_to_string(path).unwrap()).unwrap() {
        Signal::Two(s) => s,
        Signal::One(_) => panic!("expected 2-D"),
    }
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `block,row,col,value` lines of a gaussian output file.
pub fn gaussian_block(text: &str, block: &str, size: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(size, if block == "mean" { 1 } else { size });
    for line in text.lines().filter(|l| l.starts_with(&format!("{block},"))) {
        let f: Vec<&str> = line.split(',').collect();
        m[(f[1].parse::<usize>().unwrap(), f[2].parse::<usize>().unwrap())] = f[3].parse().unwrap();
    }
    m
}

pub fn gaussian(x: f64, center: f64, width: f64) -> Complex64 {
    let norm = (std::f64::consts::PI * width * width).powf(-0.25);
    Complex64::new(norm * (-(x - center).powi(2) / (2.0 * width * width)).exp(), 0.0)
}

mod common;

use std::f64::consts::FRAC_PI_2;

use cfrht::fock;
use cfrht::hermite::hermite_function;
use cfrht::twomode;
use cfrht::{Complex64, TransformParams};
use cfrht_cli::io::parse_matrix;
use common::*;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

#[test]
fn transform_fixes_the_ground_state_at_quarter_turn() {
    let dir = tempfile::tempdir().unwrap();
    let x = linspace(-12.0, 12.0, 1024);
    let input = write_1d(dir.path(), "g.csv", &x, |x| gaussian(x, 0.0, 1.0));
    let output = dir.path().join("out.csv");
    let r = cfrht(&["transform", "--alpha", &FRAC_PI_2.to_string(), "--input", path_str(&input), "--output", path_str(&output)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stderr.contains("norm_in=") && r.stderr.contains("norm_out="));
    let (a, b) = (read_1d(&input), read_1d(&output));
    assert_eq!(a.x, b.x);
    assert!(max_diff(&a.values, &b.values) < 1e-6);
}

#[test]
fn transform_hermite_eigenrelation() {
    let dir = tempfile::tempdir().unwrap();
    let x = linspace(-12.0, 12.0, 1024);
    let input = write_1d(dir.path(), "h1.csv", &x, |x| Complex64::new(hermite_function(1, x), 0.0));
    let output = dir.path().join("out.csv");
    let r = cfrht(&["transform", "--alpha", "0.5", "--input", path_str(&input), "--output", path_str(&output)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let phase = Complex64::from_polar(1.0, 0.5);
    let expected: Vec<Complex64> = read_1d(&input).values.iter().map(|v| v * phase).collect();
    assert!(max_diff(&read_1d(&output).values, &expected) < 1e-6);
}

#[test]
fn transform_then_inverse_restores_input() {
    let dir = tempfile::tempdir().unwrap();
    let x = linspace(-12.0, 12.0, 1024);
    let input = write_1d(dir.path(), "in.csv", &x, |x| gaussian(x, 0.7, 0.8) * Complex64::from_polar(1.0, 0.4 * x));
    let mid = dir.path().join("mid.csv");
    let back = dir.path().join("back.csv");
    let r = cfrht(&["transform", "--alpha", "0.9", "--mu", "1.3", "--nu", "0.8", "--input", path_str(&input), "--output", path_str(&mid)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    // H(alpha, mu, nu)^-1 = H(-alpha, nu, mu)
    let r = cfrht(&["transform", "--alpha", "-0.9", "--mu", "0.8", "--nu", "1.3", "--input", path_str(&mid), "--output", path_str(&back)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(max_diff(&read_1d(&input).values, &read_1d(&back).values) < 1e-5);
}

#[test]
fn transform_reports_malformed_rows_by_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "x,re,im\n0,1,0\n1,1,0\n2,1\n3,1,0\n").unwrap();
    let r = cfrht(&["transform", "--alpha", "1", "--input", path_str(&path)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 4"), "{}", r.stderr);
}

#[test]
fn transform_flags_lost_norm() {
    // an output window that cuts off the transformed signal loses norm
    let dir = tempfile::tempdir().unwrap();
    let x = linspace(-12.0, 12.0, 1024);
    let input = write_1d(dir.path(), "in.csv", &x, |x| gaussian(x, 0.0, 1.0));
    let output = dir.path().join("out.csv");
    let r = cfrht(&[
        "transform", "--alpha", "1", "--input", path_str(&input), "--output", path_str(&output),
        "--grid-min", "-1", "--grid-max", "1", "--grid-points", "128",
    ]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert_eq!(read_1d(&output).x.len(), 128);
}

#[test]
fn transform_rejects_singular_angle_and_aliased_grid() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_1d(dir.path(), "in.csv", &linspace(-20.0, 20.0, 64), |x| gaussian(x, 0.0, 1.0));
    assert_eq!(cfrht(&["transform", "--alpha", "0", "--input", path_str(&input)]).code, 2);
    assert_eq!(cfrht(&["transform", "--alpha", "0.05", "--input", path_str(&input)]).code, 2);
}

#[test]
fn fock_identity_at_zero_angle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.txt");
    let r = cfrht(&["fock", "--alpha", "0", "--fock-dim", "16", "--route", "decomposed", "--output", path_str(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let m = parse_matrix(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(m.meta("route"), Some("decomposed"));
    assert_eq!(m.meta("trusted"), Some("4"));
    let id = DMatrix::<Complex64>::identity(16, 16);
    assert!((m.entries - id).iter().all(|z| z.norm() < 1e-14));
}

#[test]
fn fock_routes_agree_on_trusted_block() {
    let dir = tempfile::tempdir().unwrap();
    let mut blocks = Vec::new();
    for route in ["normal_ordered", "decomposed"] {
        let out = dir.path().join(format!("{route}.txt"));
        let r = cfrht(&["fock", "--alpha", "1.1", "--mu", "2", "--nu", "0.7", "--route", route, "--output", path_str(&out)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let m = parse_matrix(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let t: usize = m.meta("trusted").unwrap().parse().unwrap();
        blocks.push(m.entries.view((0, 0), (t, t)).into_owned());
    }
    let diff = (&blocks[0] - &blocks[1]).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff:e}");
}

#[test]
fn fock_error_paths() {
    let r = cfrht(&["fock", "--alpha", "0", "--route", "normal_ordered"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("singular"), "{}", r.stderr);
    assert_eq!(cfrht(&["fock", "--alpha", "1", "--route", "sideways"]).code, 2);
    assert_eq!(cfrht(&["fock", "--alpha", "1", "--fock-dim", "1"]).code, 2);
    assert_eq!(cfrht(&["fock", "--alpha", "1", "--mu", "-1"]).code, 2);
    // squeezing far beyond what 32 levels can hold
    let r = cfrht(&["fock", "--alpha", "1", "--mu", "40", "--fock-dim", "32"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn gaussian_quarter_turn_exchanges_quadratures() {
    let r = cfrht(&["gaussian", "--alpha", &FRAC_PI_2.to_string()]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let map = gaussian_block(&r.stdout, "map", 2);
    let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    assert!((map - expected).amax() < 1e-15);
    let cov = gaussian_block(&r.stdout, "cov", 2);
    assert!((cov - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
}

#[test]
fn gaussian_matched_scales_cancel() {
    let r = cfrht(&["gaussian", "--alpha", "0", "--mu", "2", "--nu", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!((gaussian_block(&r.stdout, "cov", 2) - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
}

#[test]
fn gaussian_two_mode_matches_number_basis() {
    let n = twomode::DEFAULT_MODE_DIM;
    let sq = twomode::squeezer2(1.3, n).unwrap();
    let mut vac = DVector::zeros(n * n);
    vac[0] = Complex64::new(1.0, 0.0);
    let psi = sq.apply(&vac).unwrap();
    let q = twomode::quadratures2(n).unwrap();
    let ops: Vec<&DMatrix<Complex64>> = q.iter().map(|o| o.entries()).collect();
    let (mean_in, cov_in) = fock::moments(&ops, &psi).unwrap();

    let p = TransformParams::new(0.9, 1.2, 0.8).unwrap();
    let h = twomode::frhad2_decomposed(&p, n).unwrap();
    let (_, cov_fock) = fock::moments(&ops, &h.adjoint().apply(&psi).unwrap()).unwrap();

    let join = |v: &mut dyn Iterator<Item = &f64>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let mean = join(&mut mean_in.iter());
    let cov = join(&mut cov_in.transpose().iter());
    let r = cfrht(&["gaussian", "--modes", "2", "--alpha", "0.9", "--mu", "1.2", "--nu", "0.8", "--mean", &mean, "--cov", &cov]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let diff = (gaussian_block(&r.stdout, "cov", 4) - cov_fock).amax();
    assert!(diff < 1e-6, "{diff:e}");
}

#[test]
fn gaussian_error_paths() {
    assert_eq!(cfrht(&["gaussian", "--alpha", "1", "--cov", "0.1,0,0,0.1"]).code, 2);
    assert_eq!(cfrht(&["gaussian", "--alpha", "1", "--modes", "3"]).code, 2);
    assert_eq!(cfrht(&["gaussian", "--alpha", "1", "--mean", "1,2,3"]).code, 2);
    assert_eq!(cfrht(&["gaussian", "--alpha", "1", "--mean", "-1,x"]).code, 2);
}

fn eta_axis() -> Vec<f64> {
    linspace(-7.0, 7.0, 128)
}

#[test]
fn twomode_vacuum_is_invariant() {
    let dir = tempfile::tempdir().unwrap();
    let vacuum = |e: Complex64| Complex64::new((-e.norm_sqr() / 2.0).exp(), 0.0);
    // 128 points cannot resolve the kernel's chirp at small angles
    let coarse = write_2d(dir.path(), "coarse.csv", &eta_axis(), vacuum);
    assert_eq!(cfrht(&["twomode", "--alpha", "0.4", "--input", path_str(&coarse)]).code, 2);
    let input = write_2d(dir.path(), "vac.csv", &linspace(-7.0, 7.0, 256), vacuum);
    for alpha in ["0.4", "1.3", "2.7"] {
        let out = dir.path().join("out.csv");
        let r = cfrht(&["twomode", "--alpha", alpha, "--input", path_str(&input), "--output", path_str(&out)]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let (a, b) = (read_2d(&input), read_2d(&out));
        assert!(max_diff(a.values.as_slice(), b.values.as_slice()) < 1e-5, "alpha {alpha}");
    }
}

#[test]
fn twomode_quarter_turn_twice_reflects() {
    let dir = tempfile::tempdir().unwrap();
    let c = Complex64::new(0.7, -0.3);
    let input = write_2d(dir.path(), "in.csv", &eta_axis(), |e| Complex64::new((-(e - c).norm_sqr() / 2.0).exp(), 0.0));
    let mid = dir.path().join("mid.csv");
    let out = dir.path().join("out.csv");
    let alpha = FRAC_PI_2.to_string();
    assert_eq!(cfrht(&["twomode", "--alpha", &alpha, "--input", path_str(&input), "--output", path_str(&mid)]).code, 0);
    assert_eq!(cfrht(&["twomode", "--alpha", &alpha, "--input", path_str(&mid), "--output", path_str(&out)]).code, 0);
    let a = read_2d(&input);
    let n = a.eta1.len();
    let reflected = DMatrix::from_fn(n, n, |i, j| a.values[(n - 1 - i, n - 1 - j)]);
    assert!(max_diff(reflected.as_slice(), read_2d(&out).values.as_slice()) < 1e-5);
}

#[test]
fn twomode_rejects_nonuniform_axis() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let mut text = String::from("eta1,eta2,re,im\n");
    for a in [0.0, 1.0, 2.5] {
        for b in [0.0, 1.0, 2.0] {
            text.push_str(&format!("{a},{b},1,0\n"));
        }
    }
    std::fs::write(&path, text).unwrap();
    let r = cfrht(&["twomode", "--alpha", "1", "--input", path_str(&path)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("eta1 spacing"), "{}", r.stderr);
    // 1-D file handed to the 2-D command and vice versa
    let one = write_1d(dir.path(), "one.csv", &linspace(-5.0, 5.0, 64), |x| gaussian(x, 0.0, 1.0));
    assert_eq!(cfrht(&["twomode", "--alpha", "1", "--input", path_str(&one)]).code, 2);
}

#[test]
fn verify_symplectic_scope() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let r = cfrht(&["verify", "--scope", "symplectic", "--output", path_str(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("convention.hbar=1"));
    assert!(text.contains("summary.status=pass"));
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with("check ")).collect();
    assert!(!checks.is_empty());
    for line in checks.iter().filter(|l| l.contains("name=ac5.symplectic_condition") || l.contains("name=symplectic.additivity")) {
        let residual: f64 = line.split(' ').find_map(|kv| kv.strip_prefix("residual=")).unwrap().parse().unwrap();
        assert!(residual <= 1e-12, "{line}");
    }
    assert_eq!(cfrht(&["verify", "--scope", "everything"]).code, 2);
}

#[test]
fn plotdata_magnitude_peaks_at_center() {
    let dir = tempfile::tempdir().unwrap();
    let x = linspace(-5.0, 5.0, 101);
    let input = write_1d(dir.path(), "g.csv", &x, |x| gaussian(x, 0.0, 1.0));
    let r = cfrht(&["plotdata", "--input", path_str(&input), "--format", "magnitude"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mut lines = r.stdout.lines();
    assert_eq!(lines.next(), Some("x,abs"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let peak = rows.iter().cloned().fold((0.0, f64::MIN), |best, r| if r.1 > best.1 { r } else { best });
    assert_eq!(peak.0, 0.0);
}

#[test]
fn plotdata_phase_of_chirp_is_quadratic() {
    let dir = tempfile::tempdir().unwrap();
    let x = linspace(-12.0, 12.0, 1024);
    let input = write_1d(dir.path(), "g.csv", &x, |x| gaussian(x, 0.3, 0.6));
    let chirp = dir.path().join("chirp.csv");
    assert_eq!(cfrht(&["transform", "--alpha", "0.7", "--input", path_str(&input), "--output", path_str(&chirp)]).code, 0);
    let wig = cfrht(&["plotdata", "--input", path_str(&chirp), "--format", "wigner_none"]);
    assert_eq!(wig.code, 0);
    assert!(wig.stdout.starts_with("x,abs,arg\n"));
    let r = cfrht(&["plotdata", "--input", path_str(&chirp), "--what", "phase"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let mags = read_1d(&chirp).values.iter().map(|v| v.norm()).collect::<Vec<_>>();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    let pts: Vec<(f64, f64)> = r
        .stdout
        .lines()
        .skip(1)
        .zip(&mags)
        .filter(|(_, m)| **m > 1e-3 * peak)
        .map(|(l, _)| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    // least-squares quadratic
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    for &(x, y) in &pts {
        let row = Vector3::new(1.0, x, x * x);
        ata += row * row.transpose();
        atb += row * y;
    }
    let c = ata.lu().solve(&atb).unwrap();
    let resid = pts.iter().map(|&(x, y)| (y - c[0] - c[1] * x - c[2] * x * x).abs()).fold(0.0, f64::max);
    assert!(resid < 1e-3, "{resid:e}");
    assert!(c[2].abs() > 0.05, "phase should carry a chirp");
}

#[test]
fn plotdata_rejects_unknown_kind() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_1d(dir.path(), "g.csv", &linspace(-5.0, 5.0, 32), |x| gaussian(x, 0.0, 1.0));
    assert_eq!(cfrht(&["plotdata", "--input", path_str(&input), "--format", "wigner"]).code, 2);
    let missing = dir.path().join("missing.csv");
    assert_eq!(cfrht(&["plotdata", "--input", path_str(&missing), "--format", "phase"]).code, 2);
}

#[test]
fn general_exit_codes() {
    assert_eq!(cfrht(&[]).code, 2);
    assert_eq!(cfrht(&["frobnicate"]).code, 2);
    assert_eq!(cfrht(&["--help"]).code, 0);
    assert_eq!(cfrht(&["--version"]).code, 0);
    assert_eq!(cfrht(&["transform", "--alpha", "1"]).code, 2);
    // output into a directory that does not exist
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no/such/dir/out.txt");
    assert_eq!(cfrht(&["gaussian", "--alpha", "1", "--output", path_str(&out)]).code, 2);
    assert_eq!(cfrht(&["gaussian", "--alpha", "nan"]).code, 2);
    assert_eq!(cfrht(&["gaussian", "--alpha-deg", "180", "--sigma", "1"]).code, 2);
}

use cfrht::hermite::hermite_basis;
use cfrht::kernel1d::frht_kernel;
use cfrht::symplectic::{apply_gaussian, compose, frhad_symplectic1, frhad_symplectic2, GaussianState};
use cfrht::{Complex64, Grid1D, SampledWavefunction, TransformParams};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Angles with |sin| >= 1/2, in every quadrant pair.
fn angle() -> impl Strategy<Value = f64> {
    (std::f64::consts::FRAC_PI_6..5.0 * std::f64::consts::FRAC_PI_6, -2i32..2)
        .prop_map(|(base, k)| base + k as f64 * std::f64::consts::PI)
}

fn scale() -> impl Strategy<Value = f64> {
    0.4f64..2.5
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernel_is_linear(alpha in angle(), mu in 0.8f64..1.4, nu in 0.8f64..1.4,
                        a in -2.0f64..2.0, b in -2.0f64..2.0, shift in -1.0f64..1.0) {
        let g = Grid1D::symmetric(8.0, 512).unwrap();
        let k = frht_kernel(&TransformParams::new(alpha, mu, nu).unwrap(), g, g).unwrap();
        let f = SampledWavefunction::from_fn(g, |x| Complex64::new((-(x - shift).powi(2)).exp(), 0.0));
        let h = SampledWavefunction::from_fn(g, |x| Complex64::new(0.0, x * (-x * x / 2.0).exp()));
        let (ca, cb) = (Complex64::new(a, 0.0), Complex64::new(0.0, b));
        let lhs = k.apply(&f.combine(ca, &h, cb).unwrap()).unwrap();
        let rhs = k.apply(&f).unwrap().combine(ca, &k.apply(&h).unwrap(), cb).unwrap();
        prop_assert!(lhs.l2_distance(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn kernel_preserves_resolved_norms(alpha in angle(), mu in 0.7f64..1.4, nu in 0.7f64..1.4) {
        let g = Grid1D::symmetric(12.0, 1024).unwrap();
        let k = frht_kernel(&TransformParams::new(alpha, mu, nu).unwrap(), g, g).unwrap();
        prop_assert!(k.unitarity_residual(&hermite_basis(6, g)).unwrap() < 1e-8);
    }

    #[test]
    fn maps_are_symplectic_and_additive(alpha in -7.0f64..7.0, beta in -7.0f64..7.0,
                                        m0 in scale(), m1 in scale(), m2 in scale()) {
        let p = |a, mu, nu| TransformParams::new(a, mu, nu).unwrap();
        for f in [frhad_symplectic1, frhad_symplectic2] {
            let s = f(&p(alpha, m1, m2)).unwrap();
            prop_assert!(s.symplectic_residual() < 1e-11);
            let joined = compose(&[&s, &f(&p(beta, m0, m1)).unwrap()]).unwrap();
            prop_assert!(joined.max_diff(&f(&p(alpha + beta, m0, m2)).unwrap()) < 1e-10);
            let round = compose(&[&s, &s.inverse()]).unwrap();
            prop_assert!(round.max_diff(&cfrht::symplectic::SymplecticMap::identity(s.size()).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn gaussian_states_stay_physical(alpha in -7.0f64..7.0, mu in scale(), nu in scale(),
                                     r in 0.3f64..3.0, x0 in -3.0f64..3.0) {
        let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![r / 2.0, 1.0 / (2.0 * r), 0.5, 0.5]));
        let g = GaussianState::new(DVector::from_vec(vec![x0, 0.0, 0.0, -x0]), cov).unwrap();
        let out = apply_gaussian(&frhad_symplectic2(&TransformParams::new(alpha, mu, nu).unwrap()).unwrap(), &g).unwrap();
        prop_assert!(out.uncertainty_min_eigenvalue() > -1e-10);
        let before = g.symplectic_eigenvalues();
        let after = out.symplectic_eigenvalues();
        for (a, b) in before.iter().zip(&after) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}

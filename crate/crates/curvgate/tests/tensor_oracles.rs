//! Independent oracles for the tensor layer: brute-force Rayleigh
//! quotients against the eigenvalue classification, exhaustive basis
//! enumeration against the polarized constant-curvature tensor, and
//! property tests for the symmetry projections.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use curvgate::tensor::{
    wedge_norm_sq_euclidean, BianchiMode, CurvatureTensor, Definiteness, QuadraticForm,
};

fn idx(d: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * d + j) * d + k) * d + l
}

/// Kulkarni-Nomizu product of two symmetric matrices: satisfies all
/// curvature symmetries including the first Bianchi identity.
fn kn_product(h: &DMatrix<f64>, k: &DMatrix<f64>) -> Vec<f64> {
    let d = h.nrows();
    let mut out = vec![0.0; d.pow(4)];
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    out[idx(d, i, j, a, b)] = h[(i, a)] * k[(j, b)] + h[(j, b)] * k[(i, a)]
                        - h[(i, b)] * k[(j, a)]
                        - h[(j, a)] * k[(i, b)];
                }
            }
        }
    }
    out
}

/// Rank-one pair tensor `omega (x) omega` on antisymmetric forms:
/// curvature symmetries hold but Bianchi generally fails.
fn pair_square(omega: &DMatrix<f64>) -> Vec<f64> {
    let d = omega.nrows();
    let mut out = vec![0.0; d.pow(4)];
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    out[idx(d, i, j, a, b)] = omega[(i, j)] * omega[(a, b)];
                }
            }
        }
    }
    out
}

fn random_symmetric(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    (&raw + raw.transpose()) * 0.5
}

fn random_antisymmetric(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let raw = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    (&raw - raw.transpose()) * 0.5
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn definiteness_matches_brute_force_rayleigh_quotients() {
    let mut rng = ChaCha8Rng::seed_from_u64(271828);
    for case in 0..100 {
        let d = 2 + case % 2; // dims 2 and 3
        let m = random_symmetric(&mut rng, d);
        let q = QuadraticForm::new(m.clone(), 1e-12).unwrap();
        let classified = q.definiteness(1e-9);

        let mut min_rayleigh = f64::INFINITY;
        for _ in 0..10_000 {
            let v = {
                let raw = random_vec(&mut rng, d);
                if raw.norm() < 1e-6 {
                    continue;
                }
                &raw / raw.norm()
            };
            min_rayleigh = min_rayleigh.min(v.dot(&(&m * &v)));
        }
        // brute force explores directions, so it upper-bounds the true
        // minimum eigenvalue; classify with a coarse band
        match classified {
            Definiteness::PositiveDefinite => {
                assert!(min_rayleigh > -1e-9, "case {case}: PD but Rayleigh {min_rayleigh}")
            }
            Definiteness::PositiveSemidefinite => {
                assert!(min_rayleigh > -1e-6, "case {case}: PSD but Rayleigh {min_rayleigh}")
            }
            Definiteness::Indefinite => {
                assert!(
                    min_rayleigh < 0.0,
                    "case {case}: indefinite but sampled minimum {min_rayleigh}"
                )
            }
        }
        // and the eigen route agrees with the sampled minimum
        let lambda_min = q.eigenvalues()[0];
        assert!(min_rayleigh >= lambda_min - 1e-9);
        assert!(min_rayleigh <= lambda_min + 0.35 * m.abs().max());
    }
}

#[test]
fn polarized_constant_curvature_reproduces_quadratic_data_on_all_basis_tuples() {
    for d in 2..=4 {
        let c = 1.7;
        let r = CurvatureTensor::constant_curvature(d, c).unwrap();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let expected =
                            c * ((i == l && j == k) as u8 as f64 - (i == k && j == l) as u8 as f64);
                        assert_eq!(r.get(i, j, k, l), expected, "({i},{j},{k},{l})");
                    }
                }
            }
        }
        // defining quadratic values on basis pairs
        for i in 0..d {
            for j in 0..d {
                let mut w = DVector::zeros(d);
                w[i] = 1.0;
                let mut u = DVector::zeros(d);
                u[j] = 1.0;
                let expected = c * wedge_norm_sq_euclidean(&w, &u);
                assert!((r.sectional(&w, &u) - expected).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn non_bianchi_tensors_are_accepted_with_optional_mode_only() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let d = 3;
    let omega = random_antisymmetric(&mut rng, d);
    // pair squares satisfy the symmetries but typically not Bianchi
    let entries = pair_square(&omega);
    let t = CurvatureTensor::new(d, entries.clone(), BianchiMode::Optional, 1e-12).unwrap();
    if t.bianchi_residual() > 1e-9 {
        assert!(!t.satisfies_bianchi());
        assert!(CurvatureTensor::new(d, entries, BianchiMode::Required, 1e-9).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn symmetrization_invariants_hold_for_random_curvature_tensors(
        seed in 0u64..1_000_000,
        dim in 2usize..=5,
        bianchi in proptest::bool::ANY,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // random curvature tensor: KN products satisfy Bianchi, pair
        // squares only the symmetries
        let entries = if bianchi {
            let h = random_symmetric(&mut rng, dim);
            let k = random_symmetric(&mut rng, dim);
            kn_product(&h, &k)
        } else {
            let o1 = random_antisymmetric(&mut rng, dim);
            let o2 = random_antisymmetric(&mut rng, dim);
            let a = pair_square(&o1);
            let b = pair_square(&o2);
            a.iter().zip(&b).map(|(x, y)| x + 0.7 * y).collect()
        };
        let r = CurvatureTensor::new(dim, entries, BianchiMode::Optional, 1e-10).unwrap();
        prop_assert!(r.symmetry_residual() < 1e-12);

        let s = r.symmetrize();
        let w1 = random_vec(&mut rng, dim);
        let w2 = random_vec(&mut rng, dim);
        let u = random_vec(&mut rng, dim);
        let v = random_vec(&mut rng, dim);

        // full symmetry set of the symmetrization
        let base = s.value(&w1, &w2, &u, &v);
        prop_assert!((s.value(&w2, &w1, &u, &v) - base).abs() < 1e-12 * base.abs().max(1.0));
        prop_assert!((s.value(&w1, &w2, &v, &u) - base).abs() < 1e-12 * base.abs().max(1.0));
        prop_assert!((s.value(&u, &v, &w1, &w2) - base).abs() < 1e-12 * base.abs().max(1.0));
        // vanishing on (W,W,W,U)
        prop_assert!(s.value(&w1, &w1, &w1, &u).abs() < 1e-12 * w1.norm_squared().max(1.0));
        // contraction identity
        let lhs = s.value(&w1, &w1, &u, &u);
        let rhs = r.sectional(&w1, &u);
        prop_assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn wedge_norm_is_nonnegative_and_detects_dependence(
        seed in 0u64..1_000_000,
        dim in 2usize..=6,
        scale in -3.0f64..3.0,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_vec(&mut rng, dim);
        let y = random_vec(&mut rng, dim);
        prop_assert!(wedge_norm_sq_euclidean(&x, &y) >= -1e-12);
        let dependent = &x * scale;
        prop_assert!(wedge_norm_sq_euclidean(&x, &dependent).abs() < 1e-10 * x.norm_squared().powi(2).max(1.0));
    }
}

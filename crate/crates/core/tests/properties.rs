mod common;

use common::*;
use proptest::prelude::*;
use syrisk::identification::IdKind;
use syrisk::numerics::CopulaKind;
use syrisk::scoring::{Functional, ScoreSpec};

const FUNCTIONALS: [Functional; 3] = [Functional::VarCoVar, Functional::VarCoVarCoEs, Functional::VarMes];

fn diffs(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    (prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), n), -1.0..1.0f64, -0.5..0.5f64, -0.5..0.5f64)
        .prop_map(|(raw, mix, m1, m2)| raw.into_iter().map(|(a, b)| (a + m1, mix * a + b + m2)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn truth_is_the_lexicographic_minimum(seed in any::<u64>()) {
        for f in FUNCTIONALS {
            for spec in [ScoreSpec::zero_hom(f), ScoreSpec::canonical(f)] {
                check_strict_consistency(seed, f, &spec).map_err(TestCaseError::fail)?;
            }
        }
    }

    #[test]
    fn identification_vanishes_only_at_truth(seed in any::<u64>()) {
        for kind in [IdKind::VaR, IdKind::VarCoVar, IdKind::VarCoVarCoEs, IdKind::VarMes] {
            check_identification(seed, kind).map_err(TestCaseError::fail)?;
        }
    }

    #[test]
    fn zero_homogeneous_differences(
        f in (0.2..4.0f64, 0.2..4.0f64, 0.2..4.0f64),
        g in (0.2..4.0f64, 0.2..4.0f64, 0.2..4.0f64),
        obs in (0.05..5.0f64, 0.05..5.0f64),
        lambda in 0.01..100.0f64,
    ) {
        for func in FUNCTIONALS {
            check_zero_homogeneity(func, [f.0, f.1, f.2], [g.0, g.1, g.2], obs, lambda).map_err(TestCaseError::fail)?;
        }
    }

    #[test]
    fn one_half_sided_closed_form(d in diffs(40)) {
        check_os_closed_form(d).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn hac_without_lags_is_the_sample_covariance(d in diffs(25)) {
        check_hac_m0(d).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn zones_partition_the_plane(seed in any::<u64>()) {
        check_zones(seed, 50).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn link_is_a_bijection(f in -15.0..15.0f64) {
        check_link(f).map_err(TestCaseError::fail)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn copula_identities(rho in -0.95..0.95f64, df in 2.5..30.0f64, u1 in 0.01..0.99f64, u2 in 0.01..0.99f64) {
        for kind in [CopulaKind::Gaussian { rho }, CopulaKind::StudentT { rho, df }] {
            check_copula(kind, u1, u2).map_err(TestCaseError::fail)?;
        }
    }
}

#[test]
fn independence_copula_is_the_product() {
    check_copula(CopulaKind::independence(), 0.3, 0.8).unwrap();
}

#[test]
fn zone_fixtures() {
    check_zones(0, 0).unwrap();
}

use delibmatch::certify::{
    build_case_lp, certify_cases, certify_vertex, check_certificate, minimal_r, polytope_vertices, published_certificate,
    CaseSpec, CertifyError, DualCertificate, LpValue,
};
use delibmatch::exactnum::{rat, Rational};
use delibmatch::lpsolve::Relation;
use num_traits::{Signed, Zero};

/// Recomputes `Σ λ_j a_j` and `Σ λ_j b_j` directly from the dense rows.
fn combine(lp: &delibmatch::lpsolve::LinearProgram, cert: &DualCertificate) -> (Vec<Rational>, Rational) {
    let mut sum = vec![Rational::zero(); lp.num_vars()];
    let mut rhs = Rational::zero();
    for (mult, id) in &cert.entries {
        let i = lp.constraint_index(id).unwrap_or_else(|| panic!("missing row {id}"));
        assert_eq!(lp.constraints[i].relation, Relation::Ge, "{id}");
        assert!(!mult.is_negative());
        for (s, a) in sum.iter_mut().zip(lp.dense_row(i)) {
            *s += mult * a;
        }
        rhs += mult * &lp.constraints[i].rhs;
    }
    (sum, rhs)
}

#[test]
fn published_certificates_reproduce_the_objective() {
    for case in CaseSpec::all() {
        for (i, v) in polytope_vertices(&case).unwrap().iter().enumerate() {
            let lp = build_case_lp(&case, v, &rat(2, 1));
            let cert = published_certificate(case.id, i).unwrap();
            let (sum, rhs) = combine(&lp, &cert);
            assert_eq!(sum, lp.dense_objective(), "case {} vertex {}", case.id, i + 1);
            assert!(rhs.is_zero());
            assert_eq!(check_certificate(&lp, &cert).unwrap(), rhs);
        }
    }
}

#[test]
fn all_six_vertices_are_nonnegative_at_two() {
    let reports = certify_cases(&CaseSpec::all(), &rat(2, 1)).unwrap();
    assert_eq!(reports.len(), 6);
    for r in reports {
        assert_eq!(r.lp_optimum, LpValue::Finite(rat(0, 1)));
        assert!(r.dual_ok, "{:?}", r.dual_error);
    }
}

#[test]
fn every_vertex_is_unbounded_below_two() {
    let reports = certify_cases(&CaseSpec::all(), &rat(19, 10)).unwrap();
    for r in reports {
        assert_eq!(r.lp_optimum, LpValue::MinusInfinity, "case {} vertex {}", r.case, r.vertex_index + 1);
        assert!(!r.dual_ok);
    }
}

#[test]
fn tampered_certificates_are_rejected() {
    let case = CaseSpec::case1();
    let v = &polytope_vertices(&case).unwrap()[0];
    let lp = build_case_lp(&case, v, &rat(2, 1));
    let good = published_certificate(1, 0).unwrap();

    let mut scaled = good.clone();
    scaled.entries[0].0 = &scaled.entries[0].0 * rat(2, 1);
    assert!(matches!(check_certificate(&lp, &scaled), Err(CertifyError::CertificateMismatch(_))));

    let mut negative = good.clone();
    negative.entries[0].0 = -negative.entries[0].0.clone();
    assert!(matches!(check_certificate(&lp, &negative), Err(CertifyError::NegativeMultiplier(_))));

    let mut unknown = good;
    unknown.entries.push((rat(1, 1), "no_such_row".into()));
    assert!(matches!(check_certificate(&lp, &unknown), Err(CertifyError::UnknownConstraint(_))));

    let report = certify_vertex(&case, 0, v, &rat(3, 1)).unwrap();
    assert_eq!(report.lp_optimum, LpValue::Finite(rat(0, 1)));
}

#[test]
fn threshold_bracket_contains_two() {
    for case in CaseSpec::all() {
        let iv = minimal_r(&case).unwrap();
        assert!(iv.monotone);
        assert!(iv.contains(&rat(2, 1)), "case {}: [{}, {}]", case.id, iv.lo, iv.hi);
        assert!(iv.width() <= rat(1, 1024));
    }
}

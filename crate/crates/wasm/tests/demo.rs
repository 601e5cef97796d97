use delibmatch_wasm::{bound_report, family_report, heatmap_values};

#[test]
fn bound_report_at_optimum() {
    let text = bound_report("3/2-1/2√3", "-1+√3").unwrap();
    assert!(text.contains("     D = 3  "), "{text}");
    assert!(text.contains("AC_min = 1/4"));
    assert!(bound_report("0.4", "1").unwrap_err().contains("outside"));
    assert!(bound_report("x", "1").is_err());
}

#[test]
fn family_reports() {
    for fam in ["collinear", "colocated", "triangle"] {
        let text = family_report(fam, "3/2-1/2√3", "-1+√3").unwrap();
        assert!(text.contains("distortion = 3  "), "{text}");
        assert!(text.contains("winner A"));
    }
    assert!(family_report("square", "0.6", "1").is_err());
}

#[test]
fn heatmap_layout() {
    let v = heatmap_values(0.5, 0.7, 0.0, 1.25, 10);
    assert_eq!(v.len(), 200);
    assert!(v.chunks(2).all(|c| c[0] >= 3.0 && (1.0..=3.0).contains(&c[1])));
}

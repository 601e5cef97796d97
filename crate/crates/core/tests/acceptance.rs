//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use delibmatch::bounds::{heatmap, lower_bound_d, Family, HeatmapGrid};
use delibmatch::certify::{certify_cases, CaseSpec, LpValue};
use delibmatch::exactnum::{canonical_params, rat, Field, QuadraticScalar as Q};
use delibmatch::instances::{social_cost, Distortion, MetricInstance, TieDirectives};
use delibmatch::montecarlo::{run_montecarlo, Embedding, MonteCarloConfig};
use delibmatch::oracle::worst_case_distortion;
use delibmatch::protocol::{build_tournament, in_wus, run_protocol, MatchingPolicy, Params};
use num_traits::One;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    check(elapsed < limit, format!("took {elapsed:?}, limit {limit:?}"))
}

fn certificate_suite() -> Outcome {
    let start = Instant::now();
    let reports = certify_cases(&CaseSpec::all(), &rat(2, 1)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(reports.len() == 6, format!("expected 6 vertices, got {}", reports.len()))?;
    for r in &reports {
        let tag = format!("case {} vertex {}", r.case, r.vertex_index + 1);
        check(r.lp_optimum == LpValue::Finite(rat(0, 1)), format!("{tag}: optimum {:?}", r.lp_optimum))?;
        check(r.dual_ok, format!("{tag}: certificate failed: {:?}", r.dual_error))?;
    }
    within(elapsed, Duration::from_secs(5))?;
    Ok(format!("6/6 vertices with optimum 0 and exact certificates in {elapsed:.2?}"))
}

fn tight_optimum() -> Outcome {
    let (l, w) = canonical_params();
    let d = lower_bound_d(&l, &w).map_err(|e| e.to_string())?;
    check(d == Q::int(3), format!("D(λ*, w*) = {d}"))?;
    let params = Params::canonical();
    for fam in Family::ALL {
        let (inst, ties) = fam.instance(&l, &w).map_err(|e| e.to_string())?;
        let run = run_protocol(&inst, &ties, &params, &MatchingPolicy::ByOrder).map_err(|e| e.to_string())?;
        let t = &run.tournament;
        check(t.f(0, 2) == &(Q::one() - &l), format!("{fam}: f(AC) = {}", t.f(0, 2)))?;
        check(t.f(2, 1) == &l, format!("{fam}: f(CB) = {}", t.f(2, 1)))?;
        check(run.distortion == Distortion::Ratio(Q::int(3)), format!("{fam}: distortion {}", run.distortion))?;
    }
    Ok("D(λ*, w*) = 3; collinear, colocated and triangle runs give f(AC) = 1-λ*, f(CB) = λ*, distortion 3".into())
}

fn copeland_gap() -> Outcome {
    let third = Q::ratio(1, 3);
    let inst = MetricInstance::on_line(
        &[Q::int(0), Q::int(1), Q::int(2)],
        &[(third.clone(), Q::int(1)), (third.clone(), Q::int(1)), (third, Q::int(2))],
    )
    .map_err(|e| e.to_string())?;
    let mut ties = TieDirectives::new();
    ties.prefer_all(0, 2, 0).and_then(|t| t.deliberation_all(2, 1, 2)).map_err(|e| e.to_string())?;
    let (_, t) =
        build_tournament(&inst, &ties, &Params::copeland(), &MatchingPolicy::ByOrder).map_err(|e| e.to_string())?;
    let half = Q::ratio(1, 2);
    check(t.f(0, 2) == &half, format!("f(AC) = {}", t.f(0, 2)))?;
    check(t.f(2, 1) == &half, format!("f(CB) = {}", t.f(2, 1)))?;
    check(in_wus(&t, 0), "A is not in WUS_1/2")?;
    let ratio = social_cost(&inst, 0) / social_cost(&inst, 1);
    check(ratio == Q::int(4), format!("SC(A)/SC(B) = {ratio}"))?;
    Ok("f(AC) = f(CB) = 1/2, A in WUS_1/2, SC(A)/SC(B) = 4".into())
}

fn deterministic_lower_bound() -> Outcome {
    let third = Q::ratio(1, 3);
    let cands = [Q::int(-1), Q::int(1)];
    let x = MetricInstance::on_line(
        &cands,
        &[(third.clone(), Q::int(-1)), (third.clone(), Q::int(-1)), (third.clone(), Q::int(1))],
    )
    .map_err(|e| e.to_string())?;
    let y = MetricInstance::on_line(&cands, &[(third.clone(), Q::int(0)), (third.clone(), Q::int(0)), (third, Q::int(1))])
        .map_err(|e| e.to_string())?;
    let mut ties = TieDirectives::new();
    ties.deliberation_all(0, 1, 1).map_err(|e| e.to_string())?;
    let params = Params::copeland();
    let (px, tx) = build_tournament(&x, &ties, &params, &MatchingPolicy::ByOrder).map_err(|e| e.to_string())?;
    let (py, ty) = build_tournament(&y, &ties, &params, &MatchingPolicy::ByOrder).map_err(|e| e.to_string())?;
    check(px == py, "the two instances induce different profiles")?;
    check(tx == ty, "the two instances induce different deliberation records")?;
    let ab = worst_case_distortion(&px, &tx.records, 0, 1).map_err(|e| e.to_string())?;
    let ba = worst_case_distortion(&px, &tx.records, 1, 0).map_err(|e| e.to_string())?;
    check(ab.distortion == Distortion::Ratio(Q::int(2)), format!("A vs B: {}", ab.distortion))?;
    check(ba.distortion == Distortion::Ratio(Q::int(2)), format!("B vs A: {}", ba.distortion))?;
    Ok("worst case 2 for A vs B and for B vs A on the shared profile".into())
}

fn two_candidate_bound() -> Outcome {
    let start = Instant::now();
    let mut cfg = MonteCarloConfig::new(2, 10_000, 1, Params::copeland());
    cfg.embedding = Embedding::Line;
    let s = run_montecarlo(&cfg).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ok = matches!(&s.max, Distortion::Ratio(r) if *r <= Q::int(2));
    check(ok, format!("max distortion {} at sample {}", s.max, s.argmax_sample))?;
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("10^4 line instances, max distortion {} ({:.4}) in {elapsed:.2?}", s.max, s.max.to_f64()))
}

fn upper_bound_sanity() -> Outcome {
    let start = Instant::now();
    let mut maxima = Vec::new();
    for m in 3..=5 {
        let cfg = MonteCarloConfig::new(m, 10_000, m as u64, Params::canonical());
        let s = run_montecarlo(&cfg).map_err(|e| e.to_string())?;
        let ok = matches!(&s.max, Distortion::Ratio(r) if *r <= Q::int(3));
        check(ok, format!("m = {m}: max distortion {} at sample {}", s.max, s.argmax_sample))?;
        maxima.push(format!("m={m}: {:.4}", s.max.to_f64()));
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(120))?;
    Ok(format!("10^4 instances for each m in 3..=5, max {} in {elapsed:.2?}", maxima.join(", ")))
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    for (name, suite) in common::SUITES {
        suite(common::TRIALS).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!(
        "{} suites x {} randomized trials in {:.2?}",
        common::SUITES.len(),
        common::TRIALS,
        start.elapsed()
    ))
}

fn heatmap_minimum() -> Outcome {
    let start = Instant::now();
    let h = heatmap(&HeatmapGrid::default());
    let elapsed = start.elapsed();
    let min = h.min();
    let (l, w) = canonical_params();
    check((min.big_d - 3.0).abs() < 1e-6, format!("grid minimum {}", min.big_d))?;
    check(
        min.lambda == l.to_f64() && min.w == w.to_f64(),
        format!("argmin at ({}, {})", min.lambda, min.w),
    )?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "200x200 grid plus (λ*, w*): min D = {} at ({:.6}, {:.6}) in {elapsed:.2?}",
        min.big_d, min.lambda, min.w
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("certificate suite", certificate_suite),
        ("tight optimum", tight_optimum),
        ("copeland gap instance", copeland_gap),
        ("deterministic lower bound 2", deterministic_lower_bound),
        ("two-candidate bound", two_candidate_bound),
        ("upper-bound sanity at scale", upper_bound_sanity),
        ("property suites", property_suites),
        ("heatmap minimum", heatmap_minimum),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

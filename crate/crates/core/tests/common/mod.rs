//! Randomized invariant suites shared by the property tests and the
//! acceptance harness.

use delibmatch::exactnum::{rat, Field, QuadraticScalar as Q, Rational};
use delibmatch::instances::{derive_profile, validate_metric, MetricInstance, Point, TieDirectives};
use delibmatch::lpsolve::{lp_solve, LinearProgram, LpStatus, Relation};
use delibmatch::oracle::{
    compact_pair, counter_monotone_couple, couple_in_order, phi, realize_metric, submodular_envelope, z_min, Norms,
    XYBlock,
};
use delibmatch::protocol::{build_tournament, wus_members, MatchingPolicy, Params, Tournament};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const TRIALS: u32 = 1000;

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let mut runner = TestRunner::new(ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() });
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn small_rat() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn pos_rat() -> impl Strategy<Value = Rational> {
    (1i64..=12, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

fn quad() -> impl Strategy<Value = Q> {
    (small_rat(), small_rat()).prop_map(|(a, b)| Q::new(a, b))
}

fn xy_blocks() -> impl Strategy<Value = Vec<XYBlock>> {
    prop::collection::vec((pos_rat(), small_rat(), small_rat()), 1..6)
        .prop_map(|v| v.into_iter().map(|(m, x, y)| XYBlock::new(m, x, y)).collect())
}

fn r_value() -> impl Strategy<Value = Rational> {
    (1i64..=40, 1i64..=10).prop_map(|(n, d)| rat(n, d))
}

fn line_instance(m: usize) -> impl Strategy<Value = MetricInstance> {
    (
        prop::collection::vec(-8i64..=8, m),
        prop::collection::vec((1i64..=6, -8i64..=8), 1..6),
    )
        .prop_map(|(cands, voters)| {
            let cands: Vec<Q> = cands.into_iter().map(Q::int).collect();
            let voters: Vec<(Q, Q)> = voters.into_iter().map(|(m, p)| (Q::int(m), Q::int(p))).collect();
            MetricInstance::on_line(&cands, &voters).unwrap()
        })
}

fn plane_instance(m: usize) -> impl Strategy<Value = MetricInstance> {
    (
        prop::collection::vec((-5i64..=5, -5i64..=5), m),
        prop::collection::vec((1i64..=6, -5i64..=5, -5i64..=5), 1..6),
    )
        .prop_map(move |(cands, voters)| {
            let pos = cands.into_iter().map(|(x, y)| Point::Plane(Q::int(x), Q::int(y))).collect();
            let voters = voters
                .into_iter()
                .map(|(mass, x, y)| (None, Q::int(mass), Point::Plane(Q::int(x), Q::int(y))))
                .collect();
            MetricInstance::from_points(delibmatch::instances::default_names(m), pos, voters).unwrap()
        })
}

fn params() -> impl Strategy<Value = Params> {
    (0i64..=12, 0i64..=12).prop_map(|(l, w)| Params::new(Q::ratio(12 + l, 24), Q::ratio(w, 4)).unwrap())
}

fn to_rat(q: &Q) -> Rational {
    q.as_rational().expect("rational coordinates").clone()
}

pub fn realizability_sufficiency(cases: u32) -> Result<(), String> {
    run(cases, (xy_blocks(), prop::collection::vec(0i64..=4, 6),), |(blocks, slack,)| {
        let n = Norms::of(&blocks);
        let with_z: Vec<XYBlock> = blocks
            .iter()
            .zip(&slack)
            .map(|(b, s)| b.clone().with_z(z_min(&b.x, &b.y, &n).unwrap() + rat(*s, 2)))
            .collect();
        let inst = realize_metric(&with_z).unwrap();
        prop_assert!(validate_metric(&inst).is_empty());
        for (b, v) in with_z.iter().zip(&inst.voters) {
            let (da, db, dc) = (to_rat(&v.dist[0]), to_rat(&v.dist[1]), to_rat(&v.dist[2]));
            prop_assert_eq!(&dc - &da, b.x.clone());
            prop_assert_eq!(&db - &dc, b.y.clone());
            prop_assert_eq!(&dc, b.z.as_ref().unwrap());
        }
        Ok(())
    })
}

pub fn realizability_necessity(cases: u32) -> Result<(), String> {
    run(cases, (plane_instance(3),), |(inst,)| {
        let blocks: Vec<XYBlock> = inst
            .voters
            .iter()
            .map(|v| {
                let (da, db, dc) = (to_rat(&v.dist[0]), to_rat(&v.dist[1]), to_rat(&v.dist[2]));
                XYBlock::new(to_rat(&v.mass), &dc - &da, &db - &dc).with_z(dc)
            })
            .collect();
        let n = Norms::of(&blocks);
        prop_assert!(n.mx <= to_rat(&inst.cand_dist[0][2]));
        prop_assert!(n.my <= to_rat(&inst.cand_dist[1][2]));
        prop_assert!(n.mxy <= to_rat(&inst.cand_dist[0][1]));
        for b in &blocks {
            prop_assert!(b.z.as_ref().unwrap() >= &z_min(&b.x, &b.y, &n).unwrap());
        }
        Ok(())
    })
}

pub fn counter_monotone_coupling_is_never_beaten(cases: u32) -> Result<(), String> {
    run(cases, (prop::collection::vec((small_rat(), 1i64..=5), 1..6), prop::collection::vec((small_rat(), 1i64..=5), 1..6), r_value(), any::<u64>(),), |(xs, ys, r, seed,)| {
        let tx: i64 = xs.iter().map(|p| p.1).sum();
        let ty: i64 = ys.iter().map(|p| p.1).sum();
        let xs: Vec<(Rational, Rational)> = xs.into_iter().map(|(v, m)| (v, rat(m, tx))).collect();
        let ys: Vec<(Rational, Rational)> = ys.into_iter().map(|(v, m)| (v, rat(m, ty))).collect();
        let best = phi(&r, &counter_monotone_couple(&xs, &ys).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let mut a = xs.clone();
            let mut b = ys.clone();
            a.shuffle(&mut rng);
            b.shuffle(&mut rng);
            let other = phi(&r, &couple_in_order(&a, &b).unwrap());
            prop_assert!(best <= other, "{} > {}", best, other);
        }
        Ok(())
    })
}

pub fn envelope_is_submodular(cases: u32) -> Result<(), String> {
    run(cases, (small_rat(), small_rat(), small_rat(), small_rat(), small_rat(), small_rat(), small_rat(),), |(a, b, c, x, dx, y, dy,)| {
        let (x1, x2) = (x.clone(), &x + dx.abs());
        let (y1, y2) = (y.clone(), &y + dy.abs());
        let h = |x: &Rational, y: &Rational| submodular_envelope(&a, &b, &c, x, y);
        prop_assert!(h(&x1, &y1) + h(&x2, &y2) <= h(&x1, &y2) + h(&x2, &y1));
        Ok(())
    })
}

pub fn compaction_never_increases_phi(cases: u32) -> Result<(), String> {
    run(cases, (xy_blocks(), pos_rat(), (small_rat(), small_rat(), small_rat(), small_rat()), r_value(),), |(rest, m, (x1, y1, x2, y2), r,)| {
        let b1 = XYBlock::new(m.clone(), x1, y1);
        let b2 = XYBlock::new(m, x2, y2);
        let (c1, c2) = compact_pair(&b1, &b2).unwrap();
        let mut before = rest.clone();
        before.extend([b1, b2]);
        let mut after = rest;
        after.extend([c1, c2]);
        prop_assert!(phi(&r, &after) <= phi(&r, &before));
        Ok(())
    })
}

pub fn shifting_down_never_increases_phi(cases: u32) -> Result<(), String> {
    run(cases, (xy_blocks(), pos_rat(), r_value(),), |(blocks, t, r,)| {
        let base = phi(&r, &blocks);
        let nx = Norms::of(&blocks);
        let shift_x: Vec<XYBlock> = blocks.iter().map(|b| XYBlock::new(b.mass.clone(), &b.x - &t, b.y.clone())).collect();
        let shift_y: Vec<XYBlock> = blocks.iter().map(|b| XYBlock::new(b.mass.clone(), b.x.clone(), &b.y - &t)).collect();
        prop_assert!(phi(&r, &shift_x) <= base);
        prop_assert!(phi(&r, &shift_y) <= base);
        let (n1, n2) = (Norms::of(&shift_x), Norms::of(&shift_y));
        for ((b, bx), by) in blocks.iter().zip(&shift_x).zip(&shift_y) {
            let z = z_min(&b.x, &b.y, &nx).unwrap();
            prop_assert!(z_min(&bx.x, &bx.y, &n1).unwrap() <= z);
            prop_assert!(z_min(&by.x, &by.y, &n2).unwrap() <= &z + &t);
        }
        Ok(())
    })
}

pub fn pairwise_weights_are_complementary(cases: u32) -> Result<(), String> {
    run(cases, (line_instance(4), params(),), |(inst, p,)| {
        let (_, t) = build_tournament(&inst, &TieDirectives::new(), &p, &MatchingPolicy::ByOrder).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                if x != y {
                    prop_assert_eq!(t.f(x, y) + t.f(y, x), Q::one());
                }
            }
        }
        Ok(())
    })
}

pub fn uncovered_set_is_nonempty(cases: u32) -> Result<(), String> {
    run(cases, (plane_instance(5), params(),), |(inst, p,)| {
        let (_, t) = build_tournament(&inst, &TieDirectives::new(), &p, &MatchingPolicy::CounterMonotone).unwrap();
        prop_assert!(!wus_members(&t).unwrap().is_empty());
        Ok(())
    })
}

pub fn uncovered_set_is_nonempty_on_arbitrary_weights(cases: u32) -> Result<(), String> {
    run(cases, (prop::collection::vec(0i64..=12, 15), 0i64..=12,), |(raw, l,)| {
        let m = 6;
        let mut f = vec![vec![Q::zero(); m]; m];
        let mut k = 0;
        for x in 0..m {
            for y in (x + 1)..m {
                f[x][y] = Q::ratio(raw[k], 12);
                f[y][x] = Q::one() - &f[x][y];
                k += 1;
            }
        }
        let t = Tournament::from_weights(Params::new(Q::ratio(12 + l, 24), Q::one()).unwrap(), f);
        prop_assert!(!wus_members(&t).unwrap().is_empty());
        Ok(())
    })
}

pub fn quadratic_field_axioms(cases: u32) -> Result<(), String> {
    run(cases, (quad(), quad(), quad(),), |(a, b, c,)| {
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a - &a, Q::zero());
        if !a.is_zero() {
            prop_assert_eq!(&a / &a, Q::one());
        }
        prop_assert_eq!(a.to_string().parse::<Q>().unwrap(), a.clone());
        let approx = (&a - &b).to_f64();
        if approx.abs() > 1e-9 {
            prop_assert_eq!(a > b, approx > 0.0);
        }
        Ok(())
    })
}

pub fn profile_shares_partition_mass(cases: u32) -> Result<(), String> {
    run(cases, (plane_instance(4),), |(inst,)| {
        let p = derive_profile(&inst, &TieDirectives::new());
        for x in 0..4 {
            for y in 0..4 {
                if x != y {
                    prop_assert_eq!(p.share(x, y) + p.share(y, x), Q::one());
                    for v in 0..p.num_voters() {
                        prop_assert!(p.prefers(v, x, y) != p.prefers(v, y, x));
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn splitting_a_block_keeps_the_tournament(cases: u32) -> Result<(), String> {
    run(cases, (line_instance(3), any::<prop::sample::Index>(), params(),), |(inst, which, p,)| {
        let k = which.index(inst.num_voters());
        let mut split = inst.clone();
        let mut half = split.voters[k].clone();
        half.mass = &half.mass / &Q::int(2);
        split.voters[k] = half.clone();
        split.voters.insert(k + 1, half);
        let ties = TieDirectives::new();
        let (_, t1) = build_tournament(&inst, &ties, &p, &MatchingPolicy::ByOrder).unwrap();
        let (_, t2) = build_tournament(&split, &ties, &p, &MatchingPolicy::ByOrder).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                if x != y {
                    prop_assert_eq!(t1.f(x, y), t2.f(x, y));
                }
            }
        }
        Ok(())
    })
}

pub fn simplex_matches_vertex_enumeration(cases: u32) -> Result<(), String> {
    run(cases, (2usize..=3, prop::collection::vec((prop::collection::vec(-4i64..=4, 3), 0usize..3, -6i64..=12), 1..4), prop::collection::vec(-5i64..=5, 3),), |(n, rows, obj,)| {
        let mut lp: LinearProgram = LinearProgram::new();
        for j in 0..n {
            lp.add_var(format!("x{j}"), Some(Rational::zero()), Some(rat(5, 1)));
        }
        let rels = [Relation::Le, Relation::Ge, Relation::Eq];
        let mut dense = Vec::new();
        for (i, (coef, rel, rhs)) in rows.iter().enumerate() {
            let c: Vec<Rational> = coef[..n].iter().map(|v| rat(*v, 1)).collect();
            lp.add_constraint(format!("r{i}"), c.iter().cloned().enumerate().collect(), rels[*rel], rat(*rhs, 1));
            dense.push((c, rels[*rel], rat(*rhs, 1)));
        }
        for j in 0..n {
            let mut lo = vec![Rational::zero(); n];
            lo[j] = Rational::one();
            dense.push((lo.clone(), Relation::Ge, Rational::zero()));
            dense.push((lo, Relation::Le, rat(5, 1)));
        }
        let c: Vec<Rational> = obj[..n].iter().map(|v| rat(*v, 1)).collect();
        lp.set_objective(c.iter().cloned().enumerate().collect());
        let sol = lp_solve(&lp).unwrap();
        let brute = brute_force_min(&dense, &c);
        match brute {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert_eq!(sol.objective.unwrap(), v);
            }
        }
        Ok(())
    })
}

#[allow(dead_code)]
pub const SUITES: [(&str, fn(u32) -> Result<(), String>); 13] = [
    ("realizability_sufficiency", realizability_sufficiency),
    ("realizability_necessity", realizability_necessity),
    ("counter_monotone_coupling_is_never_beaten", counter_monotone_coupling_is_never_beaten),
    ("envelope_is_submodular", envelope_is_submodular),
    ("compaction_never_increases_phi", compaction_never_increases_phi),
    ("shifting_down_never_increases_phi", shifting_down_never_increases_phi),
    ("pairwise_weights_are_complementary", pairwise_weights_are_complementary),
    ("uncovered_set_is_nonempty", uncovered_set_is_nonempty),
    ("uncovered_set_is_nonempty_on_arbitrary_weights", uncovered_set_is_nonempty_on_arbitrary_weights),
    ("quadratic_field_axioms", quadratic_field_axioms),
    ("profile_shares_partition_mass", profile_shares_partition_mass),
    ("splitting_a_block_keeps_the_tournament", splitting_a_block_keeps_the_tournament),
    ("simplex_matches_vertex_enumeration", simplex_matches_vertex_enumeration),
];
type Row = (Vec<Rational>, Relation, Rational);

fn feasible(rows: &[Row], x: &[Rational]) -> bool {
    rows.iter().all(|(a, rel, b)| {
        let lhs = a.iter().zip(x).fold(Rational::zero(), |acc, (p, q)| acc + p * q);
        match rel {
            Relation::Le => lhs <= *b,
            Relation::Ge => lhs >= *b,
            Relation::Eq => lhs == *b,
        }
    })
}

fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for k in 0..n {
                    let t = &f * &a[col][k];
                    a[r][k] -= t;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

/// Minimum over all basic points of the bounded polytope.
fn brute_force_min(rows: &[Row], c: &[Rational]) -> Option<Rational> {
    let n = c.len();
    let mut best: Option<Rational> = None;
    let idx: Vec<usize> = (0..rows.len()).collect();
    for combo in combos(&idx, n) {
        let a = combo.iter().map(|&i| rows[i].0.clone()).collect();
        let b = combo.iter().map(|&i| rows[i].2.clone()).collect();
        if let Some(x) = solve(a, b) {
            if feasible(rows, &x) {
                let v = c.iter().zip(&x).fold(Rational::zero(), |acc, (p, q)| acc + p * q);
                if best.as_ref().map_or(true, |b| v < *b) {
                    best = Some(v);
                }
            }
        }
    }
    best
}

fn combos(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &it) in items.iter().enumerate() {
        for mut rest in combos(&items[i + 1..], k - 1) {
            rest.insert(0, it);
            out.push(rest);
        }
    }
    out
}

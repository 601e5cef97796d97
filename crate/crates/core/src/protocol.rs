//! Deliberation via matching: pairwise matchings, averaging deliberation,
//! weighted scores and the tournament rules applied to them.

use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::QuadraticScalar;
use crate::instances::{
    derive_profile, instance_distortion, optimal_candidate, CandPair, Distortion, MetricInstance, OrdinalProfile,
    TieDirectives,
};

type Q = QuadraticScalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("explicit matching for ({x}, {y}) is infeasible: {reason}")]
    InfeasibleExplicitMatching { x: usize, y: usize, reason: String },
    #[error("the counter-monotone policy needs voter distances")]
    MissingDistances,
    #[error("parameters out of range: {0}")]
    Domain(String),
    #[error("the weighted uncovered set is empty")]
    EmptyUncoveredSet,
}

/// A piece of a matching: `mass` of block `u` (which prefers `x`) deliberates
/// with `mass` of block `v` (which prefers `y`). Offsets locate the piece
/// inside each block's mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedSegment {
    pub u: usize,
    pub v: usize,
    pub mass: Q,
    pub u_offset: Q,
    pub v_offset: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalMatching {
    pub x: usize,
    pub y: usize,
    pub segments: Vec<MatchedSegment>,
    /// Remaining mass per block, only for blocks with a positive remainder.
    pub unmatched: Vec<(usize, Q)>,
}

impl FractionalMatching {
    pub fn matched_mass(&self) -> Q {
        self.segments.iter().fold(Q::zero(), |acc, s| acc + &s.mass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum MatchingPolicy {
    /// Greedy pairing in voter order.
    #[default]
    ByOrder,
    /// Strongest supporters of each side first.
    CounterMonotone,
    /// Listed `(u, v, mass)` triples keyed by the ordered pair `(x, y)`, with
    /// `u` preferring `x`. Pairs without an entry fall back to voter order.
    Explicit(HashMap<(usize, usize), Vec<(usize, usize, Q)>>),
}

fn greedy_pairing(x: usize, y: usize, left: &[(usize, Q)], right: &[(usize, Q)]) -> FractionalMatching {
    let mut segments = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut left_used = Q::zero();
    let mut right_used = Q::zero();
    while i < left.len() && j < right.len() {
        let left_rem = &left[i].1 - &left_used;
        let right_rem = &right[j].1 - &right_used;
        let take = left_rem.clone().min(right_rem.clone());
        segments.push(MatchedSegment {
            u: left[i].0,
            v: right[j].0,
            mass: take.clone(),
            u_offset: left_used.clone(),
            v_offset: right_used.clone(),
        });
        left_used = left_used + &take;
        right_used = right_used + &take;
        if left_used == left[i].1 {
            i += 1;
            left_used = Q::zero();
        }
        if right_used == right[j].1 {
            j += 1;
            right_used = Q::zero();
        }
    }
    let mut unmatched = Vec::new();
    for (side, idx, used) in [(left, i, left_used), (right, j, right_used)] {
        if idx < side.len() {
            unmatched.push((side[idx].0, &side[idx].1 - &used));
            unmatched.extend(side[idx + 1..].iter().cloned());
        }
    }
    FractionalMatching { x, y, segments, unmatched }
}

fn explicit_matching(
    profile: &OrdinalProfile,
    x: usize,
    y: usize,
    triples: &[(usize, usize, Q)],
) -> Result<FractionalMatching, ProtocolError> {
    let fail = |reason: String| ProtocolError::InfeasibleExplicitMatching { x, y, reason };
    let n = profile.num_voters();
    let mut used = vec![Q::zero(); n];
    let mut segments = Vec::new();
    for (u, v, mass) in triples {
        if *u >= n || *v >= n {
            return Err(fail(format!("voter index out of range in ({u}, {v})")));
        }
        if !profile.prefers(*u, x, y) || !profile.prefers(*v, y, x) {
            return Err(fail(format!("({u}, {v}) is not a disagreeing pair")));
        }
        if mass.sign() <= 0 {
            return Err(fail(format!("non-positive mass for ({u}, {v})")));
        }
        segments.push(MatchedSegment {
            u: *u,
            v: *v,
            mass: mass.clone(),
            u_offset: used[*u].clone(),
            v_offset: used[*v].clone(),
        });
        used[*u] = &used[*u] + mass;
        used[*v] = &used[*v] + mass;
    }
    for (b, m) in used.iter().enumerate() {
        if m > profile.mass(b) {
            return Err(fail(format!("block {b} is matched beyond its mass")));
        }
    }
    let target = profile.support(x, y).min(profile.support(y, x));
    let total = segments.iter().fold(Q::zero(), |acc, s| acc + &s.mass);
    if total != target {
        return Err(fail(format!("matched mass {total} is not maximum ({target})")));
    }
    let unmatched = (0..n)
        .filter(|&b| profile.prefers(b, x, y) || profile.prefers(b, y, x))
        .filter_map(|b| {
            let rest = profile.mass(b) - &used[b];
            (rest.sign() > 0).then_some((b, rest))
        })
        .collect();
    Ok(FractionalMatching { x, y, segments, unmatched })
}

/// A maximum fractional matching between the `XY` and `YX` blocks.
pub fn build_matching(
    profile: &OrdinalProfile,
    inst: Option<&MetricInstance>,
    x: usize,
    y: usize,
    policy: &MatchingPolicy,
) -> Result<FractionalMatching, ProtocolError> {
    let side = |a: usize, b: usize| -> Vec<(usize, Q)> {
        profile.supporters(a, b).into_iter().map(|v| (v, profile.mass(v).clone())).collect()
    };
    let mut left = side(x, y);
    let mut right = side(y, x);
    match policy {
        MatchingPolicy::ByOrder => {}
        MatchingPolicy::CounterMonotone => {
            let inst = inst.ok_or(ProtocolError::MissingDistances)?;
            let rel = |v: usize| &inst.voters[v].dist[y] - &inst.voters[v].dist[x];
            left.sort_by(|a, b| rel(b.0).cmp(&rel(a.0)).then(a.0.cmp(&b.0)));
            right.sort_by(|a, b| rel(a.0).cmp(&rel(b.0)).then(a.0.cmp(&b.0)));
        }
        MatchingPolicy::Explicit(map) => {
            if let Some(triples) = map.get(&(x, y)) {
                return explicit_matching(profile, x, y, triples);
            }
            if let Some(triples) = map.get(&(y, x)) {
                let swapped: Vec<_> = triples.iter().map(|(u, v, m)| (*v, *u, m.clone())).collect();
                return explicit_matching(profile, x, y, &swapped);
            }
        }
    }
    Ok(greedy_pairing(x, y, &left, &right))
}

/// Outcomes of every matched segment for the pair `(x, y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeliberationRecord {
    pub matching: FractionalMatching,
    /// Winning candidate per segment.
    pub outcomes: Vec<usize>,
    /// `W_XY`.
    pub win_mass_x: Q,
    /// `W_YX`.
    pub win_mass_y: Q,
}

impl DeliberationRecord {
    /// Builds a record from externally given outcomes, one per segment.
    pub fn from_outcomes(matching: FractionalMatching, outcomes: Vec<usize>) -> Self {
        assert_eq!(matching.segments.len(), outcomes.len(), "one outcome per segment");
        let mut win_mass_x = Q::zero();
        let mut win_mass_y = Q::zero();
        for (s, &o) in matching.segments.iter().zip(&outcomes) {
            if o == matching.x {
                win_mass_x = win_mass_x + &s.mass;
            } else {
                assert_eq!(o, matching.y, "outcome must be one of the two candidates");
                win_mass_y = win_mass_y + &s.mass;
            }
        }
        Self { matching, outcomes, win_mass_x, win_mass_y }
    }

    pub fn x(&self) -> usize {
        self.matching.x
    }

    pub fn y(&self) -> usize {
        self.matching.y
    }
}

/// Winner of one averaging deliberation between blocks `u` and `v` on `(x, y)`.
pub fn deliberation_winner(inst: &MetricInstance, ties: &TieDirectives, u: usize, v: usize, x: usize, y: usize) -> usize {
    let du = &inst.voters[u].dist;
    let dv = &inst.voters[v].dist;
    match (&du[x] + &dv[x]).cmp(&(&du[y] + &dv[y])) {
        Ordering::Less => x,
        Ordering::Greater => y,
        Ordering::Equal => ties.resolve_delib(u, v, x, y),
    }
}

pub fn deliberate(inst: &MetricInstance, matching: FractionalMatching, ties: &TieDirectives) -> DeliberationRecord {
    let (x, y) = (matching.x, matching.y);
    let outcomes = matching
        .segments
        .iter()
        .map(|s| deliberation_winner(inst, ties, s.u, s.v, x, y))
        .collect();
    DeliberationRecord::from_outcomes(matching, outcomes)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairScores {
    pub score_xy: Q,
    pub score_yx: Q,
    pub f_xy: Q,
    pub f_yx: Q,
}

pub fn pairwise_scores(profile: &OrdinalProfile, rec: &DeliberationRecord, w: &Q) -> PairScores {
    let n = profile.total_mass();
    let (x, y) = (rec.x(), rec.y());
    let score_xy = (profile.support(x, y) + w * &rec.win_mass_x) / &n;
    let score_yx = (profile.support(y, x) + w * &rec.win_mass_y) / &n;
    let total = &score_xy + &score_yx;
    let f_xy = &score_xy / &total;
    let f_yx = Q::one() - &f_xy;
    PairScores { score_xy, score_yx, f_xy, f_yx }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    pub lambda: Q,
    pub w: Q,
}

impl Params {
    pub fn new(lambda: Q, w: Q) -> Result<Self, ProtocolError> {
        let p = Self { lambda, w };
        p.validate()?;
        Ok(p)
    }

    /// `(λ, w) = (1/2, 1)`, the Copeland setting.
    pub fn copeland() -> Self {
        Self { lambda: Q::ratio(1, 2), w: Q::one() }
    }

    pub fn canonical() -> Self {
        let (lambda, w) = crate::exactnum::canonical_params();
        Self { lambda, w }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.lambda < Q::ratio(1, 2) || self.lambda > Q::one() {
            return Err(ProtocolError::Domain(format!("lambda = {} is outside [1/2, 1]", self.lambda)));
        }
        if self.w.sign() < 0 {
            return Err(ProtocolError::Domain(format!("w = {} is negative", self.w)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tournament {
    m: usize,
    pub params: Params,
    score: Vec<Q>,
    f: Vec<Q>,
    /// One record per unordered pair `x < y`, oriented as `(x, y)`.
    pub records: Vec<DeliberationRecord>,
}

impl Tournament {
    /// Tournament from raw edge weights with `f[x][y] + f[y][x] = 1`.
    pub fn from_weights(params: Params, f: Vec<Vec<Q>>) -> Self {
        let m = f.len();
        let flat: Vec<Q> = f.into_iter().flatten().collect();
        Self { m, params, score: flat.clone(), f: flat, records: Vec::new() }
    }

    pub fn num_candidates(&self) -> usize {
        self.m
    }

    pub fn f(&self, x: usize, y: usize) -> &Q {
        &self.f[x * self.m + y]
    }

    pub fn score(&self, x: usize, y: usize) -> &Q {
        &self.score[x * self.m + y]
    }

    pub fn record(&self, x: usize, y: usize) -> Option<&DeliberationRecord> {
        let pair = CandPair::new(x, y);
        self.records.iter().find(|r| r.x() == pair.lo() && r.y() == pair.hi())
    }
}

pub fn tournament_from_records(profile: &OrdinalProfile, records: Vec<DeliberationRecord>, params: Params) -> Tournament {
    let m = profile.num_candidates();
    let mut score = vec![Q::zero(); m * m];
    let mut f = vec![Q::zero(); m * m];
    for rec in &records {
        let (x, y) = (rec.x(), rec.y());
        let s = pairwise_scores(profile, rec, &params.w);
        score[x * m + y] = s.score_xy;
        score[y * m + x] = s.score_yx;
        f[x * m + y] = s.f_xy;
        f[y * m + x] = s.f_yx;
    }
    Tournament { m, params, score, f, records }
}

pub fn build_tournament(
    inst: &MetricInstance,
    ties: &TieDirectives,
    params: &Params,
    policy: &MatchingPolicy,
) -> Result<(OrdinalProfile, Tournament), ProtocolError> {
    params.validate()?;
    let profile = derive_profile(inst, ties);
    let m = inst.num_candidates();
    let mut records = Vec::with_capacity(m * (m - 1) / 2);
    for x in 0..m {
        for y in (x + 1)..m {
            let matching = build_matching(&profile, Some(inst), x, y, policy)?;
            records.push(deliberate(inst, matching, ties));
        }
    }
    let t = tournament_from_records(&profile, records, params.clone());
    Ok((profile, t))
}

/// Whether `x` survives against every `y` in the λ-weighted uncovered set.
pub fn in_wus(t: &Tournament, x: usize) -> bool {
    let lambda = &t.params.lambda;
    let co = Q::one() - lambda;
    let m = t.num_candidates();
    (0..m).filter(|&y| y != x).all(|y| {
        t.f(x, y) >= &co || (0..m).any(|z| z != x && z != y && t.f(x, z) >= &co && t.f(z, y) >= lambda)
    })
}

pub fn wus_members(t: &Tournament) -> Result<Vec<usize>, ProtocolError> {
    let members: Vec<usize> = (0..t.num_candidates()).filter(|&x| in_wus(t, x)).collect();
    if members.is_empty() {
        return Err(ProtocolError::EmptyUncoveredSet);
    }
    Ok(members)
}

/// Most pairwise wins, where `x` beats `y` when `f(xy) >= 1/2`; ties go to the lowest index.
pub fn copeland_winner(t: &Tournament) -> usize {
    let half = Q::ratio(1, 2);
    let m = t.num_candidates();
    let wins = |x: usize| (0..m).filter(|&y| y != x && t.f(x, y) >= &half).count();
    let mut best = 0;
    let mut best_wins = wins(0);
    for x in 1..m {
        let c = wins(x);
        if c > best_wins {
            best = x;
            best_wins = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolRun {
    pub profile: OrdinalProfile,
    pub tournament: Tournament,
    pub wus: Vec<usize>,
    pub winner: usize,
    pub optimal: usize,
    pub distortion: Distortion,
}

impl ProtocolRun {
    /// Distortion of an arbitrary WUS member on the run's instance.
    pub fn member_distortions(&self, inst: &MetricInstance) -> Vec<(usize, Distortion)> {
        self.wus.iter().map(|&x| (x, instance_distortion(inst, x))).collect()
    }
}

/// Runs the protocol and selects the lowest-index member of the uncovered set.
pub fn run_protocol(
    inst: &MetricInstance,
    ties: &TieDirectives,
    params: &Params,
    policy: &MatchingPolicy,
) -> Result<ProtocolRun, ProtocolError> {
    let (profile, tournament) = build_tournament(inst, ties, params, policy)?;
    let wus = wus_members(&tournament)?;
    let winner = wus[0];
    Ok(ProtocolRun {
        profile,
        tournament,
        winner,
        optimal: optimal_candidate(inst),
        distortion: instance_distortion(inst, winner),
        wus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Q {
        s.parse().unwrap()
    }

    fn copeland_gap() -> (MetricInstance, TieDirectives) {
        let third = q("1/3");
        let inst = MetricInstance::on_line(
            &[q("0"), q("1"), q("2")],
            &[(third.clone(), q("1")), (third.clone(), q("1")), (third, q("2"))],
        )
        .unwrap();
        let mut ties = TieDirectives::new();
        ties.prefer_all(0, 2, 0).unwrap();
        ties.deliberation_all(2, 1, 2).unwrap();
        (inst, ties)
    }

    #[test]
    fn empty_side_gives_empty_matching() {
        let inst = MetricInstance::on_line(&[q("0"), q("1")], &[(q("1"), q("0"))]).unwrap();
        let p = derive_profile(&inst, &TieDirectives::new());
        let mm = build_matching(&p, Some(&inst), 0, 1, &MatchingPolicy::ByOrder).unwrap();
        assert!(mm.segments.is_empty());
        assert_eq!(mm.unmatched, vec![(0, q("1"))]);
    }

    #[test]
    fn copeland_gap_ac_pair() {
        let (inst, ties) = copeland_gap();
        let p = derive_profile(&inst, &ties);
        let mm = build_matching(&p, Some(&inst), 0, 2, &MatchingPolicy::ByOrder).unwrap();
        assert_eq!(mm.segments.len(), 1);
        assert_eq!((mm.segments[0].u, mm.segments[0].v, mm.segments[0].mass.clone()), (0, 2, q("1/3")));
        let rec = deliberate(&inst, mm, &ties);
        assert_eq!(rec.outcomes, vec![2]);
        assert!(rec.win_mass_x.is_zero());
        let s = pairwise_scores(&p, &rec, &Q::one());
        assert_eq!((s.score_xy, s.score_yx, s.f_xy), (q("2/3"), q("2/3"), q("1/2")));
    }

    #[test]
    fn copeland_gap_tournament_and_winners() {
        let (inst, ties) = copeland_gap();
        let run = run_protocol(&inst, &ties, &Params::copeland(), &MatchingPolicy::ByOrder).unwrap();
        let t = &run.tournament;
        assert_eq!(t.f(0, 2), &q("1/2"));
        assert_eq!(t.f(2, 1), &q("1/2"));
        assert_eq!(t.f(1, 0), &q("1"));
        assert!(run.wus.contains(&0));
        assert_eq!(run.winner, 0);
        assert_eq!(run.distortion, Distortion::Ratio(q("4")));
        assert_eq!(copeland_winner(t), 1);
    }

    #[test]
    fn default_deliberation_tie_goes_to_lower_index() {
        let inst = MetricInstance::on_line(&[q("0"), q("2")], &[(q("1"), q("0")), (q("1"), q("2"))]).unwrap();
        let ties = TieDirectives::new();
        assert_eq!(deliberation_winner(&inst, &ties, 0, 1, 1, 0), 0);
    }

    #[test]
    fn zero_weight_reduces_to_majority_share() {
        let (inst, ties) = copeland_gap();
        let params = Params::new(q("1/2"), q("0")).unwrap();
        let (p, t) = build_tournament(&inst, &ties, &params, &MatchingPolicy::ByOrder).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                if x != y {
                    assert_eq!(t.f(x, y), &p.share(x, y));
                }
            }
        }
    }

    #[test]
    fn two_candidates() {
        let t = Tournament::from_weights(Params::copeland(), vec![vec![q("0"), q("1")], vec![q("0"), q("0")]]);
        assert_eq!(wus_members(&t).unwrap(), vec![0]);
        let t = Tournament::from_weights(Params::copeland(), vec![vec![q("0"), q("7/10")], vec![q("3/10"), q("0")]]);
        assert_eq!(copeland_winner(&t), 0);
    }

    #[test]
    fn indistinguishable_pair_copeland() {
        let third = q("1/3");
        let inst = MetricInstance::on_line(
            &[q("-1"), q("1")],
            &[(third.clone(), q("-1")), (third.clone(), q("-1")), (third, q("1"))],
        )
        .unwrap();
        let mut ties = TieDirectives::new();
        ties.deliberation_all(0, 1, 1).unwrap();
        let (p, t) = build_tournament(&inst, &ties, &Params::copeland(), &MatchingPolicy::ByOrder).unwrap();
        assert_eq!(p.share(0, 1), q("2/3"));
        assert_eq!(t.record(0, 1).unwrap().win_mass_y, q("1/3"));
        assert_eq!(t.f(0, 1), &q("1/2"));
        assert_eq!(copeland_winner(&t), 0);
    }

    #[test]
    fn explicit_matching_checks() {
        let (inst, ties) = copeland_gap();
        let p = derive_profile(&inst, &ties);
        let mut map = HashMap::new();
        map.insert((2, 0), vec![(2, 1, q("1/3"))]);
        let mm = build_matching(&p, Some(&inst), 0, 2, &MatchingPolicy::Explicit(map)).unwrap();
        assert_eq!(mm.segments[0].u, 1);
        assert_eq!(mm.unmatched, vec![(0, q("1/3"))]);

        let mut bad = HashMap::new();
        bad.insert((0, 2), vec![(0, 2, q("1/6"))]);
        assert!(matches!(
            build_matching(&p, Some(&inst), 0, 2, &MatchingPolicy::Explicit(bad)),
            Err(ProtocolError::InfeasibleExplicitMatching { .. })
        ));
    }

    #[test]
    fn counter_monotone_orders_by_strength() {
        let inst = MetricInstance::on_line(
            &[q("0"), q("4")],
            &[(q("1"), q("1")), (q("1"), q("0")), (q("1"), q("4")), (q("1"), q("3"))],
        )
        .unwrap();
        let p = derive_profile(&inst, &TieDirectives::new());
        let mm = build_matching(&p, Some(&inst), 0, 1, &MatchingPolicy::CounterMonotone).unwrap();
        let pairs: Vec<_> = mm.segments.iter().map(|s| (s.u, s.v)).collect();
        assert_eq!(pairs, vec![(1, 2), (0, 3)]);
        assert!(matches!(
            build_matching(&p, None, 0, 1, &MatchingPolicy::CounterMonotone),
            Err(ProtocolError::MissingDistances)
        ));
    }

    #[test]
    fn fractional_split_offsets() {
        let inst = MetricInstance::on_line(&[q("0"), q("4")], &[(q("3"), q("0")), (q("1"), q("4")), (q("1"), q("3"))]).unwrap();
        let p = derive_profile(&inst, &TieDirectives::new());
        let mm = build_matching(&p, Some(&inst), 0, 1, &MatchingPolicy::ByOrder).unwrap();
        assert_eq!(mm.segments.len(), 2);
        assert_eq!(mm.segments[1].u_offset, q("1"));
        assert_eq!(mm.unmatched, vec![(0, q("1"))]);
        assert_eq!(mm.matched_mass(), q("2"));
    }

    #[test]
    fn params_domain() {
        assert!(Params::new(q("0.4"), q("1")).is_err());
        assert!(Params::new(q("1/2"), q("-1")).is_err());
        assert!(Params::new(q("1"), q("0")).is_ok());
    }
}

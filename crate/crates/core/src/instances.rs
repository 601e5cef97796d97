//! Metric instances with weighted voter blocks, ordinal profiles and social cost.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::exactnum::QuadraticScalar;

type Q = QuadraticScalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("an instance needs at least two candidates, got {0}")]
    TooFewCandidates(usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("voter block {0} has non-positive mass")]
    NonPositiveMass(usize),
    #[error("tie directive names {winner} for pair ({x}, {y})")]
    InvalidDirective { x: usize, y: usize, winner: usize },
    #[error("unknown name `{0}`")]
    UnknownName(String),
}

/// A location in one of the supported embeddings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Point {
    Line(Q),
    /// A point of the plane under the ℓ₁ norm.
    Plane(Q, Q),
}

impl Point {
    pub fn l1_distance(&self, other: &Point) -> Result<Q, InstanceError> {
        match (self, other) {
            (Point::Line(a), Point::Line(b)) => Ok((a - b).abs()),
            (Point::Plane(ax, ay), Point::Plane(bx, by)) => Ok((ax - bx).abs() + (ay - by).abs()),
            _ => Err(InstanceError::ShapeMismatch("line and plane points mixed".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoterBlock {
    pub name: Option<String>,
    pub mass: Q,
    /// Distance to every candidate, in candidate order.
    pub dist: Vec<Q>,
    pub position: Option<Point>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricInstance {
    pub candidates: Vec<String>,
    pub cand_dist: Vec<Vec<Q>>,
    pub voters: Vec<VoterBlock>,
    /// Candidate coordinates when the instance came from an embedding.
    pub candidate_positions: Option<Vec<Point>>,
}

impl MetricInstance {
    /// Builds an instance from explicit distances.
    pub fn explicit(
        candidates: Vec<String>,
        cand_dist: Vec<Vec<Q>>,
        voters: Vec<VoterBlock>,
    ) -> Result<Self, InstanceError> {
        let m = candidates.len();
        if m < 2 {
            return Err(InstanceError::TooFewCandidates(m));
        }
        if cand_dist.len() != m || cand_dist.iter().any(|r| r.len() != m) {
            return Err(InstanceError::ShapeMismatch(format!("cand_dist must be {m}x{m}")));
        }
        for (i, v) in voters.iter().enumerate() {
            if v.dist.len() != m {
                return Err(InstanceError::ShapeMismatch(format!(
                    "voter {i} has {} distances for {m} candidates",
                    v.dist.len()
                )));
            }
            if v.mass.sign() <= 0 {
                return Err(InstanceError::NonPositiveMass(i));
            }
        }
        Ok(Self { candidates, cand_dist, voters, candidate_positions: None })
    }

    /// Builds an instance from coordinates, expanding them to ℓ₁ distances.
    pub fn from_points(
        candidates: Vec<String>,
        positions: Vec<Point>,
        voters: Vec<(Option<String>, Q, Point)>,
    ) -> Result<Self, InstanceError> {
        if positions.len() != candidates.len() {
            return Err(InstanceError::ShapeMismatch("one position per candidate".into()));
        }
        let cand_dist = positions
            .iter()
            .map(|p| positions.iter().map(|q| p.l1_distance(q)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let blocks = voters
            .into_iter()
            .map(|(name, mass, pos)| {
                let dist = positions.iter().map(|c| pos.l1_distance(c)).collect::<Result<Vec<_>, _>>()?;
                Ok(VoterBlock { name, mass, dist, position: Some(pos) })
            })
            .collect::<Result<Vec<_>, InstanceError>>()?;
        let mut inst = Self::explicit(candidates, cand_dist, blocks)?;
        inst.candidate_positions = Some(positions);
        Ok(inst)
    }

    /// Candidates named `A`, `B`, `C`, ... on the real line.
    pub fn on_line(cand_pos: &[Q], voters: &[(Q, Q)]) -> Result<Self, InstanceError> {
        Self::from_points(
            default_names(cand_pos.len()),
            cand_pos.iter().cloned().map(Point::Line).collect(),
            voters.iter().map(|(m, p)| (None, m.clone(), Point::Line(p.clone()))).collect(),
        )
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn num_voters(&self) -> usize {
        self.voters.len()
    }

    pub fn total_mass(&self) -> Q {
        self.voters.iter().fold(Q::zero(), |acc, v| acc + &v.mass)
    }

    /// Same instance with masses rescaled to sum to one.
    pub fn normalized(&self) -> Self {
        let total = self.total_mass();
        let mut out = self.clone();
        if total.is_zero() {
            return out;
        }
        for v in &mut out.voters {
            v.mass = &v.mass / &total;
        }
        out
    }

    pub fn candidate_index(&self, name: &str) -> Result<usize, InstanceError> {
        self.candidates
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| InstanceError::UnknownName(name.to_string()))
    }

    pub fn voter_index(&self, name: &str) -> Result<usize, InstanceError> {
        if let Some(i) = self.voters.iter().position(|v| v.name.as_deref() == Some(name)) {
            return Ok(i);
        }
        name.parse::<usize>()
            .ok()
            .filter(|i| *i < self.voters.len())
            .ok_or_else(|| InstanceError::UnknownName(name.to_string()))
    }

    pub fn voter_label(&self, v: usize) -> String {
        self.voters[v].name.clone().unwrap_or_else(|| format!("v{v}"))
    }
}

pub fn default_names(m: usize) -> Vec<String> {
    (0..m)
        .map(|i| {
            if i < 26 {
                ((b'A' + i as u8) as char).to_string()
            } else {
                format!("X{i}")
            }
        })
        .collect()
}

/// A failed metric condition together with its (negative) slack.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonPositiveMass { voter: usize },
    NegativeDistance { voter: Option<usize>, x: usize, y: Option<usize>, value: Q },
    NonzeroSelfDistance { x: usize },
    Asymmetric { x: usize, y: usize },
    /// `d(x,z) <= d(x,y) + d(y,z)` fails.
    CandidateTriangle { x: usize, y: usize, z: usize, slack: Q },
    /// `|d(v,x) - d(v,y)| <= d(x,y)` fails.
    VoterSeparation { voter: usize, x: usize, y: usize, slack: Q },
    /// `d(x,y) <= d(v,x) + d(v,y)` fails.
    VoterDetour { voter: usize, x: usize, y: usize, slack: Q },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonPositiveMass { voter } => write!(f, "voter {voter}: non-positive mass"),
            Violation::NegativeDistance { voter, x, y, value } => {
                write!(f, "negative distance {value} (voter {voter:?}, candidates {x}, {y:?})")
            }
            Violation::NonzeroSelfDistance { x } => write!(f, "d({x},{x}) != 0"),
            Violation::Asymmetric { x, y } => write!(f, "d({x},{y}) != d({y},{x})"),
            Violation::CandidateTriangle { x, y, z, slack } => {
                write!(f, "triangle ({x},{y},{z}) violated by {slack}")
            }
            Violation::VoterSeparation { voter, x, y, slack } => {
                write!(f, "voter {voter}: |d(v,{x})-d(v,{y})| exceeds d({x},{y}); slack {slack}")
            }
            Violation::VoterDetour { voter, x, y, slack } => {
                write!(f, "voter {voter}: d({x},{y}) exceeds d(v,{x})+d(v,{y}); slack {slack}")
            }
        }
    }
}

/// Lists every failed metric condition. Voter-to-voter distances are never
/// needed: shortest paths through the candidates complete any such metric.
pub fn validate_metric(inst: &MetricInstance) -> Vec<Violation> {
    let m = inst.num_candidates();
    let d = &inst.cand_dist;
    let mut out = Vec::new();
    for x in 0..m {
        if !d[x][x].is_zero() {
            out.push(Violation::NonzeroSelfDistance { x });
        }
        for y in 0..m {
            if d[x][y].sign() < 0 {
                out.push(Violation::NegativeDistance { voter: None, x, y: Some(y), value: d[x][y].clone() });
            }
            if y > x && d[x][y] != d[y][x] {
                out.push(Violation::Asymmetric { x, y });
            }
        }
    }
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                if x == z || y == x || y == z {
                    continue;
                }
                let slack = &d[x][y] + &d[y][z] - &d[x][z];
                if slack.sign() < 0 {
                    out.push(Violation::CandidateTriangle { x, y, z, slack });
                }
            }
        }
    }
    for (vi, v) in inst.voters.iter().enumerate() {
        if v.mass.sign() <= 0 {
            out.push(Violation::NonPositiveMass { voter: vi });
        }
        for x in 0..m {
            if v.dist[x].sign() < 0 {
                out.push(Violation::NegativeDistance { voter: Some(vi), x, y: None, value: v.dist[x].clone() });
            }
        }
        for x in 0..m {
            for y in (x + 1)..m {
                let sep = &d[x][y] - &(&v.dist[x] - &v.dist[y]).abs();
                if sep.sign() < 0 {
                    out.push(Violation::VoterSeparation { voter: vi, x, y, slack: sep });
                }
                let detour = &v.dist[x] + &v.dist[y] - &d[x][y];
                if detour.sign() < 0 {
                    out.push(Violation::VoterDetour { voter: vi, x, y, slack: detour });
                }
            }
        }
    }
    out
}

/// An unordered candidate pair, stored with the lower index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CandPair(usize, usize);

impl CandPair {
    pub fn new(x: usize, y: usize) -> Self {
        if x <= y {
            Self(x, y)
        } else {
            Self(y, x)
        }
    }

    pub fn lo(&self) -> usize {
        self.0
    }

    pub fn hi(&self) -> usize {
        self.1
    }
}

/// How exact ties are resolved, both for individual preferences and for
/// deliberating pairs. Precedence: a directive for the specific voter (or
/// voter pair), then a pair-wide directive, then the lower candidate index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TieDirectives {
    pub pref: HashMap<(usize, CandPair), usize>,
    pub pref_pair: HashMap<CandPair, usize>,
    /// Keyed by the two matched voter blocks (lower index first).
    pub delib: HashMap<(usize, usize, CandPair), usize>,
    pub delib_pair: HashMap<CandPair, usize>,
}

fn check_directive(x: usize, y: usize, winner: usize) -> Result<CandPair, InstanceError> {
    if x == y || (winner != x && winner != y) {
        return Err(InstanceError::InvalidDirective { x, y, winner });
    }
    Ok(CandPair::new(x, y))
}

impl TieDirectives {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn prefer(&mut self, voter: usize, x: usize, y: usize, winner: usize) -> Result<&mut Self, InstanceError> {
        let pair = check_directive(x, y, winner)?;
        self.pref.insert((voter, pair), winner);
        Ok(self)
    }

    pub fn prefer_all(&mut self, x: usize, y: usize, winner: usize) -> Result<&mut Self, InstanceError> {
        let pair = check_directive(x, y, winner)?;
        self.pref_pair.insert(pair, winner);
        Ok(self)
    }

    pub fn deliberation(
        &mut self,
        u: usize,
        v: usize,
        x: usize,
        y: usize,
        winner: usize,
    ) -> Result<&mut Self, InstanceError> {
        let pair = check_directive(x, y, winner)?;
        self.delib.insert((u.min(v), u.max(v), pair), winner);
        Ok(self)
    }

    pub fn deliberation_all(&mut self, x: usize, y: usize, winner: usize) -> Result<&mut Self, InstanceError> {
        let pair = check_directive(x, y, winner)?;
        self.delib_pair.insert(pair, winner);
        Ok(self)
    }

    pub fn resolve_pref(&self, voter: usize, x: usize, y: usize) -> usize {
        let pair = CandPair::new(x, y);
        self.pref
            .get(&(voter, pair))
            .or_else(|| self.pref_pair.get(&pair))
            .copied()
            .unwrap_or(pair.lo())
    }

    pub fn resolve_delib(&self, u: usize, v: usize, x: usize, y: usize) -> usize {
        let pair = CandPair::new(x, y);
        self.delib
            .get(&(u.min(v), u.max(v), pair))
            .or_else(|| self.delib_pair.get(&pair))
            .copied()
            .unwrap_or(pair.lo())
    }
}

/// Which side of every candidate pair each voter block is counted on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalProfile {
    m: usize,
    masses: Vec<Q>,
    /// `prefers[v][x * m + y]` iff block `v` is counted in `XY`.
    prefers: Vec<Vec<bool>>,
}

impl OrdinalProfile {
    /// Builds a profile from `prefers(v, x, y)`, which must be antisymmetric.
    pub fn from_fn(
        m: usize,
        masses: Vec<Q>,
        mut prefers: impl FnMut(usize, usize, usize) -> bool,
    ) -> Result<Self, InstanceError> {
        if m < 2 {
            return Err(InstanceError::TooFewCandidates(m));
        }
        let mut table = Vec::with_capacity(masses.len());
        for (v, mass) in masses.iter().enumerate() {
            if mass.sign() <= 0 {
                return Err(InstanceError::NonPositiveMass(v));
            }
            let mut row = vec![false; m * m];
            for x in 0..m {
                for y in (x + 1)..m {
                    let xy = prefers(v, x, y);
                    row[x * m + y] = xy;
                    row[y * m + x] = !xy;
                }
            }
            table.push(row);
        }
        Ok(Self { m, masses, prefers: table })
    }

    /// Builds a profile from full rankings, best candidate first.
    pub fn from_rankings(m: usize, blocks: &[(Q, Vec<usize>)]) -> Result<Self, InstanceError> {
        let mut positions = Vec::with_capacity(blocks.len());
        for (v, (_, ranking)) in blocks.iter().enumerate() {
            let mut pos = vec![usize::MAX; m];
            for (rank, &c) in ranking.iter().enumerate() {
                if c >= m || pos[c] != usize::MAX {
                    return Err(InstanceError::ShapeMismatch(format!("ranking of block {v} is not a permutation")));
                }
                pos[c] = rank;
            }
            if ranking.len() != m {
                return Err(InstanceError::ShapeMismatch(format!("ranking of block {v} is not a permutation")));
            }
            positions.push(pos);
        }
        let masses = blocks.iter().map(|(mass, _)| mass.clone()).collect();
        Self::from_fn(m, masses, |v, x, y| positions[v][x] < positions[v][y])
    }

    pub fn num_candidates(&self) -> usize {
        self.m
    }

    pub fn num_voters(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, v: usize) -> &Q {
        &self.masses[v]
    }

    pub fn masses(&self) -> &[Q] {
        &self.masses
    }

    pub fn total_mass(&self) -> Q {
        self.masses.iter().fold(Q::zero(), |acc, m| acc + m)
    }

    pub fn prefers(&self, v: usize, x: usize, y: usize) -> bool {
        x != y && self.prefers[v][x * self.m + y]
    }

    /// Blocks counted in `XY`, in voter order.
    pub fn supporters(&self, x: usize, y: usize) -> Vec<usize> {
        (0..self.num_voters()).filter(|&v| self.prefers(v, x, y)).collect()
    }

    /// `|XY|` as raw mass.
    pub fn support(&self, x: usize, y: usize) -> Q {
        self.supporters(x, y).into_iter().fold(Q::zero(), |acc, v| acc + &self.masses[v])
    }

    /// `|XY|` as a fraction of the electorate.
    pub fn share(&self, x: usize, y: usize) -> Q {
        let total = self.total_mass();
        if total.is_zero() {
            return Q::zero();
        }
        self.support(x, y) / total
    }
}

/// Counts each voter on the side it strictly prefers; exact ties follow the
/// directives.
pub fn derive_profile(inst: &MetricInstance, ties: &TieDirectives) -> OrdinalProfile {
    let masses = inst.voters.iter().map(|v| v.mass.clone()).collect();
    OrdinalProfile::from_fn(inst.num_candidates(), masses, |v, x, y| {
        let dist = &inst.voters[v].dist;
        match dist[x].cmp(&dist[y]) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => ties.resolve_pref(v, x, y) == x,
        }
    })
    .expect("a validated instance yields a valid profile")
}

/// Mass-weighted total distance from the electorate to candidate `x`.
pub fn social_cost(inst: &MetricInstance, x: usize) -> Q {
    inst.voters.iter().fold(Q::zero(), |acc, v| acc + &v.mass * &v.dist[x])
}

/// The 1-median among candidates; ties go to the lowest index.
pub fn optimal_candidate(inst: &MetricInstance) -> usize {
    let mut best = 0;
    let mut best_cost = social_cost(inst, 0);
    for x in 1..inst.num_candidates() {
        let c = social_cost(inst, x);
        if c < best_cost {
            best = x;
            best_cost = c;
        }
    }
    best
}

/// `SC(winner) / SC(reference)` with the conventions for a zero denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distortion {
    Ratio(Q),
    Unbounded,
}

impl Distortion {
    pub fn between(winner_cost: &Q, reference_cost: &Q) -> Self {
        if reference_cost.is_zero() {
            if winner_cost.is_zero() {
                Distortion::Ratio(Q::one())
            } else {
                Distortion::Unbounded
            }
        } else {
            Distortion::Ratio(winner_cost / reference_cost)
        }
    }

    pub fn ratio(&self) -> Option<&Q> {
        match self {
            Distortion::Ratio(r) => Some(r),
            Distortion::Unbounded => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        use crate::exactnum::Field;
        match self {
            Distortion::Ratio(r) => r.to_f64(),
            Distortion::Unbounded => f64::INFINITY,
        }
    }
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distortion::Ratio(r) => write!(f, "{r}"),
            Distortion::Unbounded => f.write_str("UNBOUNDED"),
        }
    }
}

/// Distortion of `winner` against the optimal candidate of `inst`.
pub fn instance_distortion(inst: &MetricInstance, winner: usize) -> Distortion {
    let opt = optimal_candidate(inst);
    Distortion::between(&social_cost(inst, winner), &social_cost(inst, opt))
}

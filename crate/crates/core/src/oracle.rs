//! Worst-case metrics: the distortion LP over every metric consistent with a
//! profile and its deliberation outcomes, and the three-candidate reduction
//! in the `(X, Y, Z)` coordinates.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactnum::{QuadraticScalar, Rational};
use crate::instances::{default_names, Distortion, MetricInstance, OrdinalProfile, VoterBlock};
use crate::lpsolve::{lp_solve, LinearProgram, LpError, LpStatus, Relation};
use crate::protocol::DeliberationRecord;

type Q = QuadraticScalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("norms do not dominate the block values")]
    NormsDoNotDominate,
    #[error("block {block} has z below z_min")]
    InfeasibleZ { block: usize },
    #[error("marginal masses differ: {0} vs {1}")]
    MassMismatch(String, String),
    #[error("profile and deliberation records disagree: {0}")]
    InconsistentProfile(String),
    #[error("matching refinement exceeded {0} cut points")]
    RefinementLimit(usize),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// A block of voters in the coordinates `x = d(v,C) - d(v,A)`,
/// `y = d(v,B) - d(v,C)` and optionally `z = d(v,C)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XYBlock {
    pub mass: Rational,
    pub x: Rational,
    pub y: Rational,
    pub z: Option<Rational>,
}

impl XYBlock {
    pub fn new(mass: Rational, x: Rational, y: Rational) -> Self {
        Self { mass, x, y, z: None }
    }

    pub fn with_z(mut self, z: Rational) -> Self {
        self.z = Some(z);
        self
    }
}

/// Sup norms `‖X‖∞`, `‖Y‖∞` and `‖X+Y‖∞` of a population.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Norms {
    pub mx: Rational,
    pub my: Rational,
    pub mxy: Rational,
}

impl Norms {
    pub fn of(blocks: &[XYBlock]) -> Self {
        let mut n = Norms { mx: Rational::zero(), my: Rational::zero(), mxy: Rational::zero() };
        for b in blocks {
            n.mx = n.mx.max(b.x.abs());
            n.my = n.my.max(b.y.abs());
            n.mxy = n.mxy.max((&b.x + &b.y).abs());
        }
        n
    }

    pub fn dominates(&self, x: &Rational, y: &Rational) -> bool {
        self.mx >= x.abs() && self.my >= y.abs() && self.mxy >= (x + y).abs()
    }
}

fn half(r: Rational) -> Rational {
    r / Rational::from_integer(2.into())
}

/// Smallest feasible `d(v,C)` for a voter with coordinates `(x, y)`.
pub fn z_min(x: &Rational, y: &Rational, norms: &Norms) -> Result<Rational, OracleError> {
    if !norms.dominates(x, y) {
        return Err(OracleError::NormsDoNotDominate);
    }
    Ok(half(&norms.mx + x).max(half(&norms.my - y)).max(half(&norms.mxy + x - y)))
}

/// Realizes blocks with explicit `z` as a three-candidate metric `A, B, C`.
pub fn realize_metric(blocks: &[XYBlock]) -> Result<MetricInstance, OracleError> {
    let n = Norms::of(blocks);
    let mut voters = Vec::with_capacity(blocks.len());
    for (i, b) in blocks.iter().enumerate() {
        let z = b.z.clone().ok_or(OracleError::InfeasibleZ { block: i })?;
        if z < z_min(&b.x, &b.y, &n)? {
            return Err(OracleError::InfeasibleZ { block: i });
        }
        voters.push(VoterBlock {
            name: None,
            mass: Q::from(b.mass.clone()),
            dist: vec![Q::from(&z - &b.x), Q::from(&z + &b.y), Q::from(z)],
            position: None,
        });
    }
    let (ac, bc, ab) = (Q::from(n.mx), Q::from(n.my), Q::from(n.mxy));
    let zero = Q::zero();
    MetricInstance::explicit(
        default_names(3),
        vec![
            vec![zero.clone(), ab.clone(), ac.clone()],
            vec![ab, zero.clone(), bc.clone()],
            vec![ac, bc, zero],
        ],
        voters,
    )
    .map_err(|e| OracleError::InconsistentProfile(e.to_string()))
}

/// `E X + (R+1) E Y + R E z_min` with norms taken from the blocks themselves.
pub fn phi(r: &Rational, blocks: &[XYBlock]) -> Rational {
    let n = Norms::of(blocks);
    let one = Rational::one();
    blocks.iter().fold(Rational::zero(), |acc, b| {
        let z = z_min(&b.x, &b.y, &n).expect("norms of a population dominate it");
        acc + &b.mass * (&b.x + (r + &one) * &b.y + r * z)
    })
}

fn total(xs: &[(Rational, Rational)]) -> Rational {
    xs.iter().fold(Rational::zero(), |acc, (_, m)| acc + m)
}

/// Merges two marginals in the given orders, splitting masses as needed.
pub fn couple_in_order(
    xs: &[(Rational, Rational)],
    ys: &[(Rational, Rational)],
) -> Result<Vec<XYBlock>, OracleError> {
    let (tx, ty) = (total(xs), total(ys));
    if tx != ty {
        return Err(OracleError::MassMismatch(tx.to_string(), ty.to_string()));
    }
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    let mut rx = xs.first().map(|p| p.1.clone()).unwrap_or_default();
    let mut ry = ys.first().map(|p| p.1.clone()).unwrap_or_default();
    while i < xs.len() && j < ys.len() {
        let take = rx.clone().min(ry.clone());
        if take.is_positive() {
            out.push(XYBlock::new(take.clone(), xs[i].0.clone(), ys[j].0.clone()));
        }
        rx -= &take;
        ry -= &take;
        if !rx.is_positive() {
            i += 1;
            if i < xs.len() {
                rx = xs[i].1.clone();
            }
        }
        if !ry.is_positive() {
            j += 1;
            if j < ys.len() {
                ry = ys[j].1.clone();
            }
        }
    }
    Ok(out)
}

/// Pairs the descending order of `x` values with the ascending order of `y` values.
pub fn counter_monotone_couple(
    xs: &[(Rational, Rational)],
    ys: &[(Rational, Rational)],
) -> Result<Vec<XYBlock>, OracleError> {
    let mut xs = xs.to_vec();
    let mut ys = ys.to_vec();
    xs.sort_by(|a, b| b.0.cmp(&a.0));
    ys.sort_by(|a, b| a.0.cmp(&b.0));
    couple_in_order(&xs, &ys)
}

/// `max{a + x, b + y, c + x + y}`.
pub fn submodular_envelope(a: &Rational, b: &Rational, c: &Rational, x: &Rational, y: &Rational) -> Rational {
    (a + x).max(b + y).max(c + x + y)
}

/// Replaces two equal-mass blocks by two copies of their mean.
pub fn compact_pair(b1: &XYBlock, b2: &XYBlock) -> Result<(XYBlock, XYBlock), OracleError> {
    if b1.mass != b2.mass {
        return Err(OracleError::MassMismatch(b1.mass.to_string(), b2.mass.to_string()));
    }
    let mx = half(&b1.x + &b2.x);
    let my = half(&b1.y + &b2.y);
    let b = XYBlock::new(b1.mass.clone(), mx, my);
    Ok((b.clone(), b))
}

/// A sub-interval of a voter block that is treated as one point by the oracle LP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub block: usize,
    pub start: Q,
    pub mass: Q,
}

const MAX_CUTS: usize = 20_000;

/// Splits blocks at every matching boundary, closing under the segment maps so
/// that every matched segment pairs whole atoms with whole atoms.
pub fn refine_atoms(profile: &OrdinalProfile, records: &[DeliberationRecord]) -> Result<Vec<Atom>, OracleError> {
    let n = profile.num_voters();
    let mut cuts: Vec<BTreeSet<Q>> = (0..n).map(|b| [Q::zero(), profile.mass(b).clone()].into()).collect();
    let segments: Vec<_> = records.iter().flat_map(|r| r.matching.segments.iter()).collect();
    for s in &segments {
        if s.u >= n || s.v >= n {
            return Err(OracleError::InconsistentProfile(format!("segment ({}, {}) out of range", s.u, s.v)));
        }
        let u_end = &s.u_offset + &s.mass;
        let v_end = &s.v_offset + &s.mass;
        if s.u_offset.sign() < 0 || s.v_offset.sign() < 0 || &u_end > profile.mass(s.u) || &v_end > profile.mass(s.v) {
            return Err(OracleError::InconsistentProfile(format!("segment ({}, {}) exceeds its blocks", s.u, s.v)));
        }
        cuts[s.u].insert(s.u_offset.clone());
        cuts[s.u].insert(u_end);
        cuts[s.v].insert(s.v_offset.clone());
        cuts[s.v].insert(v_end);
    }
    loop {
        let mut changed = false;
        for s in &segments {
            let u_end = &s.u_offset + &s.mass;
            let v_end = &s.v_offset + &s.mass;
            let from_u: Vec<Q> = cuts[s.u]
                .range(s.u_offset.clone()..u_end)
                .map(|c| c - &s.u_offset + &s.v_offset)
                .collect();
            let from_v: Vec<Q> = cuts[s.v]
                .range(s.v_offset.clone()..v_end)
                .map(|c| c - &s.v_offset + &s.u_offset)
                .collect();
            for c in from_u {
                changed |= cuts[s.v].insert(c);
            }
            for c in from_v {
                changed |= cuts[s.u].insert(c);
            }
        }
        let count: usize = cuts.iter().map(BTreeSet::len).sum();
        if count > MAX_CUTS {
            return Err(OracleError::RefinementLimit(MAX_CUTS));
        }
        if !changed {
            break;
        }
    }
    let mut atoms = Vec::new();
    for (b, set) in cuts.iter().enumerate() {
        let pts: Vec<&Q> = set.iter().collect();
        for w in pts.windows(2) {
            atoms.push(Atom { block: b, start: w[0].clone(), mass: w[1] - w[0] });
        }
    }
    Ok(atoms)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleOutcome {
    pub distortion: Distortion,
    /// A metric attaining the optimum, one voter block per atom.
    pub witness: Option<MetricInstance>,
}

struct OracleLp {
    lp: LinearProgram<Q>,
    atoms: Vec<Atom>,
    m: usize,
}

impl OracleLp {
    fn atom_var(&self, a: usize, x: usize) -> usize {
        a * self.m + x
    }

    fn cand_var(&self, x: usize, y: usize) -> usize {
        let (x, y) = if x < y { (x, y) } else { (y, x) };
        let base = self.atoms.len() * self.m;
        // Row-major index into the strict upper triangle.
        base + x * self.m - x * (x + 1) / 2 + (y - x - 1)
    }

    fn social_cost_row(&self, x: usize) -> Vec<(usize, Q)> {
        self.atoms.iter().enumerate().map(|(a, atom)| (self.atom_var(a, x), atom.mass.clone())).collect()
    }

    fn witness(&self, primal: &[Q]) -> MetricInstance {
        let m = self.m;
        let mut cand = vec![vec![Q::zero(); m]; m];
        for x in 0..m {
            for y in 0..m {
                if x != y {
                    cand[x][y] = primal[self.cand_var(x, y)].clone();
                }
            }
        }
        let mut per_block: HashMap<usize, usize> = HashMap::new();
        let voters = self
            .atoms
            .iter()
            .enumerate()
            .map(|(a, atom)| {
                let k = per_block.entry(atom.block).or_default();
                *k += 1;
                VoterBlock {
                    name: Some(format!("v{}.{}", atom.block, *k - 1)),
                    mass: atom.mass.clone(),
                    dist: (0..m).map(|x| primal[self.atom_var(a, x)].clone()).collect(),
                    position: None,
                }
            })
            .collect();
        MetricInstance::explicit(default_names(m), cand, voters).expect("witness has consistent shape")
    }
}

fn build_oracle_lp(profile: &OrdinalProfile, records: &[DeliberationRecord]) -> Result<OracleLp, OracleError> {
    let m = profile.num_candidates();
    let atoms = refine_atoms(profile, records)?;
    let mut o = OracleLp { lp: LinearProgram::<Q>::new(), atoms, m };
    for atom in &o.atoms {
        for x in 0..m {
            o.lp.add_nonneg_var(format!("d_v{}@{}_{}", atom.block, atom.start, x));
        }
    }
    for x in 0..m {
        for y in (x + 1)..m {
            o.lp.add_nonneg_var(format!("d_{x}_{y}"));
        }
    }
    let mut lp = std::mem::take(&mut o.lp);
    let one = Q::one;
    let neg = || -Q::one();

    for (a, atom) in o.atoms.iter().enumerate() {
        for x in 0..m {
            for y in 0..m {
                if x != y && profile.prefers(atom.block, x, y) {
                    lp.add_constraint(
                        format!("pref_a{a}_{x}_{y}"),
                        vec![(o.atom_var(a, x), one()), (o.atom_var(a, y), neg())],
                        Relation::Le,
                        Q::zero(),
                    );
                }
            }
            for y in (x + 1)..m {
                let (ax, ay, xy) = (o.atom_var(a, x), o.atom_var(a, y), o.cand_var(x, y));
                lp.add_constraint(format!("sep_a{a}_{x}_{y}"), vec![(ax, one()), (ay, neg()), (xy, neg())], Relation::Le, Q::zero());
                lp.add_constraint(format!("sep_a{a}_{y}_{x}"), vec![(ay, one()), (ax, neg()), (xy, neg())], Relation::Le, Q::zero());
                lp.add_constraint(format!("detour_a{a}_{x}_{y}"), vec![(xy, one()), (ax, neg()), (ay, neg())], Relation::Le, Q::zero());
            }
        }
    }
    for x in 0..m {
        for y in 0..m {
            for z in (x + 1)..m {
                if y == x || y == z {
                    continue;
                }
                lp.add_constraint(
                    format!("tri_{x}_{y}_{z}"),
                    vec![(o.cand_var(x, z), one()), (o.cand_var(x, y), neg()), (o.cand_var(y, z), neg())],
                    Relation::Le,
                    Q::zero(),
                );
            }
        }
    }

    let mut atom_at: HashMap<(usize, Q), usize> = HashMap::new();
    for (a, atom) in o.atoms.iter().enumerate() {
        atom_at.insert((atom.block, atom.start.clone()), a);
    }
    for (ri, rec) in records.iter().enumerate() {
        let (x, y) = (rec.x(), rec.y());
        if rec.outcomes.len() != rec.matching.segments.len() {
            return Err(OracleError::InconsistentProfile(format!("record {ri} lacks outcomes")));
        }
        for (si, (s, &outcome)) in rec.matching.segments.iter().zip(&rec.outcomes).enumerate() {
            if !profile.prefers(s.u, x, y) || !profile.prefers(s.v, y, x) {
                return Err(OracleError::InconsistentProfile(format!(
                    "segment ({}, {}) on ({x}, {y}) does not pair disagreeing voters",
                    s.u, s.v
                )));
            }
            let (win, lose) = if outcome == x { (x, y) } else { (y, x) };
            let end = &s.u_offset + &s.mass;
            let mut a = atom_at[&(s.u, s.u_offset.clone())];
            loop {
                let atom = &o.atoms[a];
                if atom.block != s.u || atom.start >= end {
                    break;
                }
                let partner_start = &atom.start - &s.u_offset + &s.v_offset;
                let b = atom_at[&(s.v, partner_start)];
                lp.add_constraint(
                    format!("delib_r{ri}_s{si}_a{a}"),
                    vec![
                        (o.atom_var(a, win), one()),
                        (o.atom_var(b, win), one()),
                        (o.atom_var(a, lose), neg()),
                        (o.atom_var(b, lose), neg()),
                    ],
                    Relation::Le,
                    Q::zero(),
                );
                a += 1;
                if a >= o.atoms.len() {
                    break;
                }
            }
        }
    }
    o.lp = lp;
    Ok(o)
}

/// Supremum of `SC(winner) / SC(reference)` over all metrics consistent with
/// the profile and the recorded deliberation outcomes.
pub fn worst_case_distortion(
    profile: &OrdinalProfile,
    records: &[DeliberationRecord],
    winner: usize,
    reference: usize,
) -> Result<OracleOutcome, OracleError> {
    let base = build_oracle_lp(profile, records)?;
    if winner == reference {
        return Ok(OracleOutcome { distortion: Distortion::Ratio(Q::one()), witness: None });
    }
    let mut lp = base.lp.clone();
    lp.add_constraint("normalize_ref", base.social_cost_row(reference), Relation::Eq, Q::one());
    lp.set_objective(base.social_cost_row(winner).into_iter().map(|(i, c)| (i, -c)).collect());
    let sol = lp_solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {
            let value = -sol.objective.expect("optimal solutions carry an objective");
            Ok(OracleOutcome { distortion: Distortion::Ratio(value), witness: Some(base.witness(&sol.primal)) })
        }
        LpStatus::Unbounded => Ok(OracleOutcome { distortion: Distortion::Unbounded, witness: None }),
        LpStatus::Infeasible => {
            // Every consistent metric has SC(reference) = 0.
            let mut lp = base.lp.clone();
            lp.add_constraint("zero_ref", base.social_cost_row(reference), Relation::Eq, Q::zero());
            lp.add_constraint("cap_winner", base.social_cost_row(winner), Relation::Le, Q::one());
            lp.set_objective(base.social_cost_row(winner).into_iter().map(|(i, c)| (i, -c)).collect());
            let sol = lp_solve(&lp)?;
            match (sol.status, sol.objective) {
                (LpStatus::Optimal, Some(v)) if v.is_zero() => {
                    Ok(OracleOutcome { distortion: Distortion::Ratio(Q::one()), witness: None })
                }
                (LpStatus::Optimal, _) => Ok(OracleOutcome { distortion: Distortion::Unbounded, witness: None }),
                _ => Err(OracleError::InconsistentProfile("no metric is consistent with the records".into())),
            }
        }
    }
}

//! TOML instance files.
//!
//! ```toml
//! candidates = ["A", "B", "C"]
//! positions = [["0"], ["1"], ["2"]]          # or cand_dist = [["0", "1", "2"], ...]
//!
//! [params]                                    # optional
//! lambda = "3/2-1/2√3"
//! w = "-1+√3"
//!
//! [[voters]]
//! name = "v_B"
//! mass = "1/2"
//! position = ["1"]                            # or dist = ["1", "0", "1"]
//!
//! [[ties.prefer]]
//! voter = "v_B"                               # omit for a pair-wide directive
//! pair = ["A", "C"]
//! winner = "A"
//!
//! [[ties.deliberation]]
//! voters = ["v_B", "v_C"]                     # omit for a pair-wide directive
//! pair = ["C", "B"]
//! winner = "C"
//!
//! [[matching]]                                # used by the explicit policy
//! pair = ["A", "C"]
//! segments = [{ u = "v_B", v = "v_C", mass = "1/2" }]
//! ```
//!
//! Scalars are strings in the exact encoding accepted by [`QuadraticScalar`].
//! Points have one coordinate on the line and two in the ℓ₁ plane.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactnum::QuadraticScalar as Q;
use crate::instances::{InstanceError, MetricInstance, Point, TieDirectives, VoterBlock};
use crate::protocol::{MatchingPolicy, Params, ProtocolError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Toml(String),
    #[error("bad scalar `{0}`")]
    Scalar(String),
    #[error("invalid file: {0}")]
    Invalid(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct FileParams {
    lambda: String,
    w: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct FileVoter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    mass: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    position: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dist: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FilePref {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    voter: Option<String>,
    pair: [String; 2],
    winner: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FileDelib {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    voters: Option<[String; 2]>,
    pair: [String; 2],
    winner: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct FileTies {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    prefer: Vec<FilePref>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    deliberation: Vec<FileDelib>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FileSegment {
    u: String,
    v: String,
    mass: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FileMatching {
    pair: [String; 2],
    segments: Vec<FileSegment>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct InstanceFile {
    candidates: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cand_dist: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    params: Option<FileParams>,
    voters: Vec<FileVoter>,
    #[serde(default)]
    ties: FileTies,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    matching: Vec<FileMatching>,
}

/// Everything an instance file can carry.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDoc {
    pub instance: MetricInstance,
    pub ties: TieDirectives,
    pub params: Option<Params>,
    /// Explicit matchings keyed by ordered candidate pair.
    pub matchings: HashMap<(usize, usize), Vec<(usize, usize, Q)>>,
}

impl InstanceDoc {
    pub fn new(instance: MetricInstance, ties: TieDirectives) -> Self {
        Self { instance, ties, params: None, matchings: HashMap::new() }
    }

    pub fn explicit_policy(&self) -> MatchingPolicy {
        MatchingPolicy::Explicit(self.matchings.clone())
    }
}

fn scalar(s: &str) -> Result<Q, IoError> {
    s.trim().parse().map_err(|_| IoError::Scalar(s.to_string()))
}

fn point(coords: &[String]) -> Result<Point, IoError> {
    match coords {
        [x] => Ok(Point::Line(scalar(x)?)),
        [x, y] => Ok(Point::Plane(scalar(x)?, scalar(y)?)),
        _ => Err(IoError::Invalid(format!("a point needs one or two coordinates, got {}", coords.len()))),
    }
}

fn point_text(p: &Point) -> Vec<String> {
    match p {
        Point::Line(x) => vec![x.to_string()],
        Point::Plane(x, y) => vec![x.to_string(), y.to_string()],
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceDoc, IoError> {
    let file: InstanceFile = toml::from_str(text).map_err(|e| IoError::Toml(e.to_string()))?;
    let instance = match (&file.positions, &file.cand_dist) {
        (Some(pos), None) => {
            let positions = pos.iter().map(|p| point(p)).collect::<Result<Vec<_>, _>>()?;
            let voters = file
                .voters
                .iter()
                .map(|v| {
                    let p = v
                        .position
                        .as_ref()
                        .ok_or_else(|| IoError::Invalid("voters need a position when candidates have positions".into()))?;
                    Ok((v.name.clone(), scalar(&v.mass)?, point(p)?))
                })
                .collect::<Result<Vec<_>, IoError>>()?;
            MetricInstance::from_points(file.candidates.clone(), positions, voters)?
        }
        (None, Some(dist)) => {
            let cand_dist = dist
                .iter()
                .map(|r| r.iter().map(|s| scalar(s)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            let voters = file
                .voters
                .iter()
                .map(|v| {
                    let d = v.dist.as_ref().ok_or_else(|| IoError::Invalid("voters need dist rows".into()))?;
                    Ok(VoterBlock {
                        name: v.name.clone(),
                        mass: scalar(&v.mass)?,
                        dist: d.iter().map(|s| scalar(s)).collect::<Result<Vec<_>, _>>()?,
                        position: None,
                    })
                })
                .collect::<Result<Vec<_>, IoError>>()?;
            MetricInstance::explicit(file.candidates.clone(), cand_dist, voters)?
        }
        _ => return Err(IoError::Invalid("give exactly one of `positions` and `cand_dist`".into())),
    };

    let cand = |s: &str| instance.candidate_index(s);
    let voter = |s: &str| instance.voter_index(s);
    let mut ties = TieDirectives::new();
    for p in &file.ties.prefer {
        let (x, y, win) = (cand(&p.pair[0])?, cand(&p.pair[1])?, cand(&p.winner)?);
        match &p.voter {
            Some(v) => ties.prefer(voter(v)?, x, y, win)?,
            None => ties.prefer_all(x, y, win)?,
        };
    }
    for d in &file.ties.deliberation {
        let (x, y, win) = (cand(&d.pair[0])?, cand(&d.pair[1])?, cand(&d.winner)?);
        match &d.voters {
            Some([u, v]) => ties.deliberation(voter(u)?, voter(v)?, x, y, win)?,
            None => ties.deliberation_all(x, y, win)?,
        };
    }
    let mut matchings = HashMap::new();
    for m in &file.matching {
        let key = (cand(&m.pair[0])?, cand(&m.pair[1])?);
        let segs = m
            .segments
            .iter()
            .map(|s| Ok((voter(&s.u)?, voter(&s.v)?, scalar(&s.mass)?)))
            .collect::<Result<Vec<_>, IoError>>()?;
        matchings.insert(key, segs);
    }
    let params = match &file.params {
        Some(p) => Some(Params::new(scalar(&p.lambda)?, scalar(&p.w)?)?),
        None => None,
    };
    Ok(InstanceDoc { instance, ties, params, matchings })
}

fn sorted<K: Ord + Clone, V: Clone>(map: &HashMap<K, V>) -> Vec<(K, V)> {
    let mut v: Vec<_> = map.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn voter_ref(inst: &MetricInstance, v: usize) -> String {
    inst.voters[v].name.clone().unwrap_or_else(|| v.to_string())
}

pub fn write_instance(doc: &InstanceDoc) -> Result<String, IoError> {
    let inst = &doc.instance;
    let name = |i: usize| inst.candidates[i].clone();
    let embedded = inst.candidate_positions.is_some() && inst.voters.iter().all(|v| v.position.is_some());
    let voters = inst
        .voters
        .iter()
        .map(|v| FileVoter {
            name: v.name.clone(),
            mass: v.mass.to_string(),
            position: if embedded { v.position.as_ref().map(point_text) } else { None },
            dist: if embedded { None } else { Some(v.dist.iter().map(Q::to_string).collect()) },
        })
        .collect();
    let mut ties = FileTies::default();
    for ((v, pair), win) in sorted(&doc.ties.pref) {
        ties.prefer.push(FilePref { voter: Some(voter_ref(inst, v)), pair: [name(pair.lo()), name(pair.hi())], winner: name(win) });
    }
    for (pair, win) in sorted(&doc.ties.pref_pair) {
        ties.prefer.push(FilePref { voter: None, pair: [name(pair.lo()), name(pair.hi())], winner: name(win) });
    }
    for ((u, v, pair), win) in sorted(&doc.ties.delib) {
        ties.deliberation.push(FileDelib {
            voters: Some([voter_ref(inst, u), voter_ref(inst, v)]),
            pair: [name(pair.lo()), name(pair.hi())],
            winner: name(win),
        });
    }
    for (pair, win) in sorted(&doc.ties.delib_pair) {
        ties.deliberation.push(FileDelib { voters: None, pair: [name(pair.lo()), name(pair.hi())], winner: name(win) });
    }
    let matching = sorted(&doc.matchings)
        .into_iter()
        .map(|((x, y), segs)| FileMatching {
            pair: [name(x), name(y)],
            segments: segs
                .iter()
                .map(|(u, v, m)| FileSegment { u: voter_ref(inst, *u), v: voter_ref(inst, *v), mass: m.to_string() })
                .collect(),
        })
        .collect();
    let file = InstanceFile {
        candidates: inst.candidates.clone(),
        positions: if embedded {
            inst.candidate_positions.as_ref().map(|ps| ps.iter().map(point_text).collect())
        } else {
            None
        },
        cand_dist: if embedded {
            None
        } else {
            Some(inst.cand_dist.iter().map(|r| r.iter().map(Q::to_string).collect()).collect())
        },
        params: doc.params.as_ref().map(|p| FileParams { lambda: p.lambda.to_string(), w: p.w.to_string() }),
        voters,
        ties,
        matching,
    };
    toml::to_string(&file).map_err(|e| IoError::Toml(e.to_string()))
}

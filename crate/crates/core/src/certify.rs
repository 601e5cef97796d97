//! Machine check of the distortion-3 upper bound: vertices of the interval
//! mass polytope, the per-vertex linear programs and their dual certificates.

use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactnum::{format_rational, rat, Rational};
use crate::lpsolve::{lp_solve, verify_optimality, LinearProgram, LpError, LpStatus, Relation};
use crate::oracle::XYBlock;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertifyError {
    #[error("case {case}: enumerated vertices {found:?} differ from the expected list")]
    VertexMismatch { case: u8, found: Vec<String> },
    #[error("certificate references unknown constraint `{0}`")]
    UnknownConstraint(String),
    #[error("certificate has a negative multiplier on `{0}`")]
    NegativeMultiplier(String),
    #[error("certificate uses `{0}`, which is not an inequality in the right direction")]
    WrongRelation(String),
    #[error("weighted constraint sum differs from the objective: {0}")]
    CertificateMismatch(String),
    #[error("no certificate is recorded for this vertex")]
    NoCertificate,
    #[error("invalid case id {0}")]
    UnknownCase(u8),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("solver result failed verification: {0}")]
    SolverCheck(String),
}

/// Interval layout of one of the two cases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSpec {
    pub id: u8,
    pub intervals: usize,
    /// Groups of intervals forced to carry equal mass.
    pub mass_coupling: Vec<Vec<usize>>,
    /// Interval pairs `(i, j)` with `X_i + X_j >= 0`.
    pub x_matchings: Vec<(usize, usize)>,
    /// Interval pairs `(i, j)` with `Y_i + Y_j >= 0`.
    pub y_matchings: Vec<(usize, usize)>,
    /// Interval with `X_k >= 0`.
    pub x_sign: usize,
    /// Interval with `Y_k >= 0`.
    pub y_sign: usize,
    /// Prefix length in `Σ_{i <= prefix} p_i = 1/2`.
    pub half_prefix: usize,
}

impl CaseSpec {
    pub fn case1() -> Self {
        Self {
            id: 1,
            intervals: 9,
            mass_coupling: vec![vec![1, 5], vec![2, 4, 7, 9], vec![3, 8]],
            x_matchings: vec![(1, 5), (2, 4)],
            y_matchings: vec![(2, 9), (3, 8), (4, 7)],
            x_sign: 3,
            y_sign: 5,
            half_prefix: 5,
        }
    }

    pub fn case2() -> Self {
        Self {
            id: 2,
            intervals: 7,
            mass_coupling: vec![vec![1, 5], vec![2, 4], vec![3, 7]],
            x_matchings: vec![(1, 5)],
            y_matchings: vec![(3, 7)],
            x_sign: 4,
            y_sign: 4,
            half_prefix: 5,
        }
    }

    pub fn by_id(id: u8) -> Result<Self, CertifyError> {
        match id {
            1 => Ok(Self::case1()),
            2 => Ok(Self::case2()),
            _ => Err(CertifyError::UnknownCase(id)),
        }
    }

    pub fn all() -> Vec<Self> {
        vec![Self::case1(), Self::case2()]
    }

    /// Equality rows `(coefficients, rhs)` over `p_1..p_k`.
    pub fn mass_equalities(&self) -> Vec<(Vec<Rational>, Rational)> {
        let k = self.intervals;
        let mut rows = vec![
            (vec![Rational::one(); k], Rational::one()),
            ((1..=k).map(|i| if i <= self.half_prefix { Rational::one() } else { Rational::zero() }).collect(), rat(1, 2)),
        ];
        for group in &self.mass_coupling {
            for w in group.windows(2) {
                let mut row = vec![Rational::zero(); k];
                row[w[0] - 1] = Rational::one();
                row[w[1] - 1] = -Rational::one();
                rows.push((row, Rational::zero()));
            }
        }
        rows
    }

    /// The published vertex list as `(p1, p2, p3, p6)`.
    pub fn expected_vertices(&self) -> Vec<[Rational; 4]> {
        let z = Rational::zero;
        let v = |a: Rational, b: Rational, c: Rational, d: Rational| [a, b, c, d];
        match self.id {
            1 => vec![
                v(z(), z(), rat(1, 2), z()),
                v(z(), rat(1, 4), z(), z()),
                v(rat(1, 4), z(), z(), rat(1, 2)),
            ],
            _ => vec![
                v(z(), z(), rat(1, 2), z()),
                v(z(), rat(1, 4), z(), rat(1, 2)),
                v(rat(1, 4), z(), z(), rat(1, 2)),
            ],
        }
    }
}

/// A vertex of the mass polytope, stored with every interval mass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub p: Vec<Rational>,
}

impl Vertex {
    /// `(p1, p2, p3, p6)`.
    pub fn summary(&self) -> [Rational; 4] {
        [self.p[0].clone(), self.p[1].clone(), self.p[2].clone(), self.p[5].clone()]
    }

    pub fn label(&self) -> String {
        let s = self.summary();
        format!(
            "({}, {}, {}, {})",
            format_rational(&s[0]),
            format_rational(&s[1]),
            format_rational(&s[2]),
            format_rational(&s[3])
        )
    }
}

/// Solves a square system exactly; `None` when singular.
fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for c in col..n {
            a[col][c] = &a[col][c] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    let t = &f * &a[col][c];
                    a[r][c] -= t;
                }
                let t = &f * &b[col];
                b[r] -= t;
            }
        }
    }
    Some(b)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Enumerates basic feasible solutions of the mass equalities with `p >= 0`
/// and checks them against the published list (returned in that order).
pub fn polytope_vertices(case: &CaseSpec) -> Result<Vec<Vertex>, CertifyError> {
    let rows = case.mass_equalities();
    let k = case.intervals;
    let r = rows.len();
    let mut found: Vec<Vertex> = Vec::new();
    for basis in combinations(k, r) {
        let a = rows.iter().map(|(row, _)| basis.iter().map(|&j| row[j].clone()).collect()).collect();
        let b = rows.iter().map(|(_, rhs)| rhs.clone()).collect();
        let Some(sol) = solve_square(a, b) else { continue };
        if sol.iter().any(Signed::is_negative) {
            continue;
        }
        let mut p = vec![Rational::zero(); k];
        for (j, v) in basis.iter().zip(sol) {
            p[*j] = v;
        }
        let v = Vertex { p };
        if !found.contains(&v) {
            found.push(v);
        }
    }
    let expected = case.expected_vertices();
    let mismatch = || CertifyError::VertexMismatch { case: case.id, found: found.iter().map(Vertex::label).collect() };
    if found.len() != expected.len() {
        return Err(mismatch());
    }
    let mut ordered = Vec::with_capacity(expected.len());
    for e in &expected {
        match found.iter().find(|v| &v.summary() == e) {
            Some(v) => ordered.push(v.clone()),
            None => return Err(mismatch()),
        }
    }
    Ok(ordered)
}

/// Variable indices of a case program.
#[derive(Debug, Clone, Copy)]
pub struct CaseVars {
    k: usize,
}

impl CaseVars {
    pub fn x(&self, i: usize) -> usize {
        i - 1
    }
    pub fn y(&self, i: usize) -> usize {
        self.k + i - 1
    }
    pub fn z(&self, i: usize) -> usize {
        2 * self.k + i - 1
    }
    pub fn mx(&self) -> usize {
        3 * self.k
    }
    pub fn my(&self) -> usize {
        3 * self.k + 1
    }
    pub fn mxy(&self) -> usize {
        3 * self.k + 2
    }
}

/// The case program at a fixed vertex: minimize `Σ p_i (X_i + (R+1) Y_i + R Z_i)`
/// with `Z_i >= Z_min(X_i, Y_i)` written through the norm variables.
pub fn build_case_lp(case: &CaseSpec, vertex: &Vertex, r: &Rational) -> LinearProgram {
    let k = case.intervals;
    let v = CaseVars { k };
    let mut lp = LinearProgram::new();
    for name in ["X", "Y", "Z"] {
        for i in 1..=k {
            lp.add_free_var(format!("{name}{i}"));
        }
    }
    lp.add_free_var("M_X");
    lp.add_free_var("M_Y");
    lp.add_free_var("M_XY");

    let one = Rational::one;
    let neg = || -Rational::one();
    let h = || rat(1, 2);
    let nh = || rat(-1, 2);
    let mut ge = |id: String, coeffs: Vec<(usize, Rational)>| {
        lp.add_constraint(id, coeffs, Relation::Ge, Rational::zero());
    };
    for i in 1..=k {
        ge(format!("Mx_ge_X{i}"), vec![(v.mx(), one()), (v.x(i), neg())]);
        ge(format!("Mx_ge_neg_X{i}"), vec![(v.mx(), one()), (v.x(i), one())]);
        ge(format!("My_ge_Y{i}"), vec![(v.my(), one()), (v.y(i), neg())]);
        ge(format!("My_ge_neg_Y{i}"), vec![(v.my(), one()), (v.y(i), one())]);
        ge(format!("Mxy_ge_XY{i}"), vec![(v.mxy(), one()), (v.x(i), neg()), (v.y(i), neg())]);
        ge(format!("Mxy_ge_neg_XY{i}"), vec![(v.mxy(), one()), (v.x(i), one()), (v.y(i), one())]);
        ge(format!("Z{i}_ge_half_Mx_plus_X"), vec![(v.z(i), one()), (v.mx(), nh()), (v.x(i), nh())]);
        ge(format!("Z{i}_ge_half_My_minus_Y"), vec![(v.z(i), one()), (v.my(), nh()), (v.y(i), h())]);
        ge(
            format!("Z{i}_ge_half_Mxy_plus_X_minus_Y"),
            vec![(v.z(i), one()), (v.mxy(), nh()), (v.x(i), nh()), (v.y(i), h())],
        );
        ge(format!("Z{i}_ge_0"), vec![(v.z(i), one())]);
    }
    for i in 1..k {
        ge(format!("X{i}_ge_X{}", i + 1), vec![(v.x(i), one()), (v.x(i + 1), neg())]);
        ge(format!("Y{}_ge_Y{i}", i + 1), vec![(v.y(i + 1), one()), (v.y(i), neg())]);
    }
    ge(format!("X{}_ge_0", case.x_sign), vec![(v.x(case.x_sign), one())]);
    ge(format!("Y{}_ge_0", case.y_sign), vec![(v.y(case.y_sign), one())]);
    for &(i, j) in &case.x_matchings {
        ge(format!("X{i}_plus_X{j}_ge_0"), vec![(v.x(i), one()), (v.x(j), one())]);
    }
    for &(i, j) in &case.y_matchings {
        ge(format!("Y{i}_plus_Y{j}_ge_0"), vec![(v.y(i), one()), (v.y(j), one())]);
    }

    let r1 = r + Rational::one();
    let mut obj = Vec::new();
    for i in 1..=k {
        let p = &vertex.p[i - 1];
        if p.is_zero() {
            continue;
        }
        obj.push((v.x(i), p.clone()));
        obj.push((v.y(i), p * &r1));
        obj.push((v.z(i), p * r));
    }
    lp.set_objective(obj);
    lp
}

/// Nonnegative multipliers on named `>=` rows whose weighted sum is the objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualCertificate {
    pub entries: Vec<(Rational, String)>,
}

impl DualCertificate {
    fn from_list(list: &[(i64, i64, &str)]) -> Self {
        Self { entries: list.iter().map(|&(n, d, id)| (rat(n, d), id.to_string())).collect() }
    }
}

/// The recorded certificate for `(case, vertex index)` at `R = 2`.
pub fn published_certificate(case_id: u8, vertex_index: usize) -> Option<DualCertificate> {
    let list: &[(i64, i64, &str)] = match (case_id, vertex_index) {
        (1, 0) => &[
            (1, 2, "Mxy_ge_neg_XY8"),
            (1, 1, "Z3_ge_half_Mxy_plus_X_minus_Y"),
            (1, 1, "Z8_ge_0"),
            (1, 1, "Y3_plus_Y8_ge_0"),
            (1, 1, "X3_ge_0"),
        ],
        (1, 1) => &[
            (1, 4, "My_ge_neg_Y4"),
            (1, 4, "Mxy_ge_neg_XY7"),
            (1, 4, "Mxy_ge_neg_XY9"),
            (1, 2, "Z2_ge_half_Mxy_plus_X_minus_Y"),
            (1, 2, "Z4_ge_half_Mxy_plus_X_minus_Y"),
            (1, 2, "Z7_ge_half_My_minus_Y"),
            (1, 2, "Z9_ge_0"),
            (1, 2, "X2_plus_X4_ge_0"),
            (1, 2, "Y2_plus_Y9_ge_0"),
            (1, 4, "Y4_plus_Y7_ge_0"),
        ],
        (1, 2) => &[
            (1, 2, "My_ge_neg_Y1"),
            (1, 2, "Mxy_ge_neg_XY6"),
            (1, 2, "Z1_ge_half_Mxy_plus_X_minus_Y"),
            (1, 2, "Z5_ge_half_Mxy_plus_X_minus_Y"),
            (1, 1, "Z6_ge_half_My_minus_Y"),
            (1, 2, "Y6_ge_Y5"),
            (1, 2, "X1_plus_X5_ge_0"),
            (1, 1, "Y5_ge_0"),
        ],
        (2, 0) => &[
            (1, 2, "Mx_ge_neg_X7"),
            (1, 1, "Z3_ge_half_Mx_plus_X"),
            (1, 1, "X3_ge_X4"),
            (3, 2, "Y3_plus_Y7_ge_0"),
            (1, 1, "X4_ge_0"),
            (1, 1, "Z7_ge_0"),
        ],
        (2, 1) => &[
            (1, 2, "My_ge_neg_Y2"),
            (1, 2, "Mxy_ge_neg_XY6"),
            (1, 2, "Z2_ge_half_Mxy_plus_X_minus_Y"),
            (1, 2, "Z4_ge_half_Mxy_plus_X_minus_Y"),
            (1, 1, "Z6_ge_half_My_minus_Y"),
            (1, 2, "X2_ge_X3"),
            (1, 2, "X3_ge_X4"),
            (1, 2, "Y5_ge_Y4"),
            (1, 2, "Y6_ge_Y5"),
            (1, 1, "X4_ge_0"),
            (1, 1, "Y4_ge_0"),
        ],
        // `Y5 >= 0` is not a row of this program; it is the sum of the two
        // rows `Y5 >= Y4` and `Y4 >= 0`.
        (2, 2) => &[
            (1, 2, "My_ge_neg_Y1"),
            (1, 2, "Mxy_ge_neg_XY6"),
            (1, 2, "Z1_ge_half_Mxy_plus_X_minus_Y"),
            (1, 2, "Z5_ge_half_Mxy_plus_X_minus_Y"),
            (1, 1, "Z6_ge_half_My_minus_Y"),
            (1, 2, "Y6_ge_Y5"),
            (1, 2, "X1_plus_X5_ge_0"),
            (1, 1, "Y5_ge_Y4"),
            (1, 1, "Y4_ge_0"),
        ],
        _ => return None,
    };
    Some(DualCertificate::from_list(list))
}

/// Checks `Σ λ_j row_j = objective` exactly and returns the implied lower
/// bound `Σ λ_j rhs_j`. Only row arithmetic is involved.
pub fn check_certificate(lp: &LinearProgram, cert: &DualCertificate) -> Result<Rational, CertifyError> {
    let n = lp.num_vars();
    let mut sum = vec![Rational::zero(); n];
    let mut bound = Rational::zero();
    for (mult, id) in &cert.entries {
        if mult.is_negative() {
            return Err(CertifyError::NegativeMultiplier(id.clone()));
        }
        let idx = lp.constraint_index(id).ok_or_else(|| CertifyError::UnknownConstraint(id.clone()))?;
        let row = &lp.constraints[idx];
        if row.relation == Relation::Le {
            return Err(CertifyError::WrongRelation(id.clone()));
        }
        for (j, c) in &row.coeffs {
            sum[*j] += mult * c;
        }
        bound += mult * &row.rhs;
    }
    let objective = lp.dense_objective();
    let diffs: Vec<String> = (0..n)
        .filter(|&j| sum[j] != objective[j])
        .map(|j| {
            format!(
                "{}: {} vs {}",
                lp.variables[j].name,
                format_rational(&sum[j]),
                format_rational(&objective[j])
            )
        })
        .collect();
    if !diffs.is_empty() {
        return Err(CertifyError::CertificateMismatch(diffs.join(", ")));
    }
    Ok(bound)
}

/// Optimum of a minimization that is either finite or unbounded below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpValue {
    Finite(Rational),
    MinusInfinity,
}

impl LpValue {
    pub fn is_nonnegative(&self) -> bool {
        matches!(self, LpValue::Finite(v) if !v.is_negative())
    }
}

impl fmt::Display for LpValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpValue::Finite(v) => f.write_str(&format_rational(v)),
            LpValue::MinusInfinity => f.write_str("-inf (unbounded)"),
        }
    }
}

fn lp_value(lp: &LinearProgram) -> Result<LpValue, CertifyError> {
    let sol = lp_solve(lp)?;
    match sol.status {
        LpStatus::Optimal => {
            verify_optimality(lp, &sol).map_err(CertifyError::SolverCheck)?;
            Ok(LpValue::Finite(sol.objective.expect("optimal")))
        }
        LpStatus::Unbounded => Ok(LpValue::MinusInfinity),
        LpStatus::Infeasible => Err(CertifyError::SolverCheck("case program reported infeasible".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexReport {
    pub case: u8,
    pub vertex_index: usize,
    pub vertex: Vertex,
    pub r: Rational,
    pub lp_optimum: LpValue,
    pub dual_ok: bool,
    /// Why the certificate failed, when it did.
    pub dual_error: Option<String>,
    pub certificate: Option<DualCertificate>,
}

pub fn certify_vertex(case: &CaseSpec, vertex_index: usize, vertex: &Vertex, r: &Rational) -> Result<VertexReport, CertifyError> {
    let lp = build_case_lp(case, vertex, r);
    let lp_optimum = lp_value(&lp)?;
    let certificate = published_certificate(case.id, vertex_index);
    let check = match &certificate {
        Some(c) => check_certificate(&lp, c).and_then(|bound| {
            if bound.is_zero() {
                Ok(())
            } else {
                Err(CertifyError::CertificateMismatch(format!("bound {bound} is not 0")))
            }
        }),
        None => Err(CertifyError::NoCertificate),
    };
    Ok(VertexReport {
        case: case.id,
        vertex_index,
        vertex: vertex.clone(),
        r: r.clone(),
        lp_optimum,
        dual_ok: check.is_ok(),
        dual_error: check.err().map(|e| e.to_string()),
        certificate,
    })
}

/// Certifies every vertex of the given cases; vertices are handled in parallel.
pub fn certify_cases(cases: &[CaseSpec], r: &Rational) -> Result<Vec<VertexReport>, CertifyError> {
    let mut jobs = Vec::new();
    for case in cases {
        for (i, v) in polytope_vertices(case)?.into_iter().enumerate() {
            jobs.push((case.clone(), i, v));
        }
    }
    crate::par_map(&jobs, |(case, i, v)| certify_vertex(case, *i, v, r)).into_iter().collect()
}

/// Whether `OPT(R) >= 0` at every vertex of the case.
pub fn case_nonnegative(case: &CaseSpec, vertices: &[Vertex], r: &Rational) -> Result<bool, CertifyError> {
    let flags = crate::par_map(vertices, |v| lp_value(&build_case_lp(case, v, r)).map(|x| x.is_nonnegative()))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(flags.into_iter().all(|f| f))
}

/// Interval `[lo, hi]` with `OPT(lo) < 0 <= OPT(hi)` for the minimum over vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RInterval {
    pub lo: Rational,
    pub hi: Rational,
    /// Whether the coarse scan found `OPT(R) >= 0` upward closed.
    pub monotone: bool,
}

impl RInterval {
    pub fn contains(&self, r: &Rational) -> bool {
        &self.lo <= r && r <= &self.hi
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }
}

/// Smallest `R` keeping every vertex program nonnegative, bracketed on `[1, 4]`
/// to width at most `1/1024`.
pub fn minimal_r(case: &CaseSpec) -> Result<RInterval, CertifyError> {
    let vertices = polytope_vertices(case)?;
    let ok = |r: &Rational| case_nonnegative(case, &vertices, r);
    let tol = rat(1, 1024);

    let grid: Vec<Rational> = (0..=12).map(|i| rat(4 + i, 4)).collect();
    let flags = grid.iter().map(&ok).collect::<Result<Vec<_>, _>>()?;
    let monotone = flags.windows(2).all(|w| !w[0] || w[1]);

    if !monotone {
        // Dense scan: report the last sign change on a 1/1024 grid.
        let steps = 3 * 1024;
        let mut prev = ok(&Rational::one())?;
        let mut lo = Rational::one();
        let mut hi = rat(4, 1);
        for s in 1..=steps {
            let r = Rational::one() + rat(s, 1024);
            let cur = ok(&r)?;
            if !prev && cur {
                lo = &r - &tol;
                hi = r.clone();
            }
            prev = cur;
        }
        return Ok(RInterval { lo, hi, monotone });
    }

    let mut lo = Rational::one();
    let mut hi = rat(4, 1);
    if ok(&lo)? || !ok(&hi)? {
        return Err(CertifyError::SolverCheck("bisection bracket [1, 4] does not change sign".into()));
    }
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / rat(2, 1);
        if ok(&mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RInterval { lo, hi, monotone })
}

/// Interval populations with positive mass, read from a case program's primal point.
pub fn blocks_from_primal(case: &CaseSpec, vertex: &Vertex, primal: &[Rational]) -> Vec<XYBlock> {
    let v = CaseVars { k: case.intervals };
    (1..=case.intervals)
        .filter(|&i| vertex.p[i - 1].is_positive())
        .map(|i| {
            XYBlock::new(vertex.p[i - 1].clone(), primal[v.x(i)].clone(), primal[v.y(i)].clone())
                .with_z(primal[v.z(i)].clone())
        })
        .collect()
}

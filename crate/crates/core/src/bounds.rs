//! Lower-bound families for the `(λ, w)` protocol and the closed-form bound
//! `D(λ, w) = max(d1, d2, d3)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::exactnum::{canonical_params, Field, QuadraticScalar as Q};
use crate::instances::{social_cost, InstanceError, MetricInstance, Point, TieDirectives};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown family `{0}` (expected collinear, colocated or triangle)")]
    UnknownFamily(String),
    #[error("closed form index must be 1, 2 or 3, got {0}")]
    BadIndex(u8),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// Extreme values of `|AC|` and `|CB|` compatible with `f(AC) = 1-λ` and `f(CB) = λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeQuantities<T> {
    pub ac_min: T,
    pub ac_max: T,
    pub cb_min: T,
    pub cb_max: T,
    pub tau: T,
    pub eta: T,
}

/// `τ(λ) = (2λ-1)/(1-λ)`.
pub fn tau<T: Field>(lambda: &T) -> T {
    let one = T::one();
    (T::from_int(2) * lambda.clone() - one.clone()) / (one - lambda.clone())
}

fn check_domain<T: Field>(lambda: &T, w: &T) -> Result<(), BoundsError> {
    if !(*lambda > T::from_ratio(1, 2) && *lambda < T::one()) {
        return Err(BoundsError::Domain(format!("lambda = {lambda} is outside (1/2, 1)")));
    }
    if !(*w > T::zero()) {
        return Err(BoundsError::Domain(format!("w = {w} is not positive")));
    }
    Ok(())
}

/// `(cb_min, ac_max)` on the requested side of `τ`.
fn lower_pair<T: Field>(lambda: &T, w: &T, below_tau: bool) -> (T, T) {
    let one = T::one();
    let mu = one.clone() - lambda.clone();
    let muw = mu.clone() * w.clone();
    if below_tau {
        let den = one - muw.clone();
        ((lambda.clone() - muw) / den.clone(), mu / den)
    } else {
        let den = one.clone() + muw;
        (lambda.clone() / den.clone(), mu * (one + w.clone()) / den)
    }
}

pub fn permissible_ranges<T: Field>(lambda: &T, w: &T) -> Result<RangeQuantities<T>, BoundsError> {
    check_domain(lambda, w)?;
    let one = T::one();
    let t = tau(lambda);
    let below = *w <= t;
    let (cb_min, ac_max) = lower_pair(lambda, w, below);
    if *w == t {
        let other = lower_pair(lambda, w, false);
        debug_assert!((other.0.clone() - cb_min.clone()).to_f64().abs() <= 1e-9);
        debug_assert!((other.1.clone() - ac_max.clone()).to_f64().abs() <= 1e-9);
    }
    let lw = lambda.clone() * w.clone();
    let ac_min = (one.clone() - lambda.clone()) / (one.clone() + lw.clone());
    let cb_max = lambda.clone() * (one.clone() + w.clone()) / (one.clone() + lw);
    let eta = one - cb_min.clone() - ac_min.clone();
    Ok(RangeQuantities { ac_min, ac_max, cb_min, cb_max, tau: t, eta })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Collinear,
    Colocated,
    Triangle,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Collinear, Family::Colocated, Family::Triangle];

    /// Index `i` of the matching closed form `d_i`.
    pub fn index(self) -> u8 {
        match self {
            Family::Collinear => 1,
            Family::Colocated => 2,
            Family::Triangle => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Collinear => "collinear",
            Family::Colocated => "colocated",
            Family::Triangle => "triangle",
        }
    }

    pub fn instance(self, lambda: &Q, w: &Q) -> Result<(MetricInstance, TieDirectives), BoundsError> {
        match self {
            Family::Collinear => instance_collinear(lambda, w),
            Family::Colocated => instance_colocated(lambda, w),
            Family::Triangle => instance_triangle(lambda, w),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = BoundsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| BoundsError::UnknownFamily(s.to_string()))
    }
}

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;

fn abc() -> Vec<String> {
    vec!["A".into(), "B".into(), "C".into()]
}

/// `A = 0, B = 1, C = 2` with `v_B` (mass `ac_max`) at 1 and `v_C` (mass `cb_min`) at 2.
pub fn instance_collinear(lambda: &Q, w: &Q) -> Result<(MetricInstance, TieDirectives), BoundsError> {
    let r = permissible_ranges(lambda, w)?;
    let inst = MetricInstance::from_points(
        abc(),
        vec![Point::Line(Q::int(0)), Point::Line(Q::int(1)), Point::Line(Q::int(2))],
        vec![
            (Some("v_B".into()), r.ac_max, Point::Line(Q::int(1))),
            (Some("v_C".into()), r.cb_min, Point::Line(Q::int(2))),
        ],
    )?;
    let mut ties = TieDirectives::new();
    ties.prefer(0, A, C, A)?;
    ties.deliberation_all(C, B, C)?;
    Ok((inst, ties))
}

/// `A = 0` and `B = C = 1`; mass `ac_min` at `A`, the rest at `B = C`.
pub fn instance_colocated(lambda: &Q, w: &Q) -> Result<(MetricInstance, TieDirectives), BoundsError> {
    let r = permissible_ranges(lambda, w)?;
    let inst = MetricInstance::from_points(
        abc(),
        vec![Point::Line(Q::int(0)), Point::Line(Q::int(1)), Point::Line(Q::int(1))],
        vec![
            (Some("v_A".into()), r.ac_min, Point::Line(Q::int(0))),
            (Some("v_BC".into()), r.cb_max, Point::Line(Q::int(1))),
        ],
    )?;
    let mut ties = TieDirectives::new();
    ties.prefer_all(A, C, A)?;
    ties.prefer(0, C, B, B)?;
    ties.prefer(1, C, B, C)?;
    ties.deliberation_all(A, C, A)?;
    ties.deliberation_all(C, B, B)?;
    Ok((inst, ties))
}

/// Voter rows of the triangle family's distance table, in block order `ACB, CBA, BAC`.
pub fn triangle_table() -> [[Q; 3]; 3] {
    let i = Q::int;
    [[i(1), i(1), i(1)], [i(3), i(1), i(1)], [i(2), i(0), i(2)]]
}

/// ℓ₁ plane with `A = (0,0)`, `B = (1,1)`, `C = (2,0)` and blocks `ACB` (mass `η`),
/// `CBA` (mass `cb_min`) and `BAC` (mass `ac_min`).
pub fn instance_triangle(lambda: &Q, w: &Q) -> Result<(MetricInstance, TieDirectives), BoundsError> {
    let r = permissible_ranges(lambda, w)?;
    let pt = |x: i64, y: i64| Point::Plane(Q::int(x), Q::int(y));
    let inst = MetricInstance::from_points(
        abc(),
        vec![pt(0, 0), pt(1, 1), pt(2, 0)],
        vec![
            (Some("ACB".into()), r.eta, pt(1, 0)),
            (Some("CBA".into()), r.cb_min, pt(2, 1)),
            (Some("BAC".into()), r.ac_min, pt(1, 1)),
        ],
    )?;
    let table = triangle_table();
    for (v, row) in inst.voters.iter().zip(table.iter()) {
        if v.dist[..] != row[..] {
            return Err(BoundsError::Instance(InstanceError::ShapeMismatch(format!(
                "embedding disagrees with the distance table for {}",
                v.name.as_deref().unwrap_or("?")
            ))));
        }
    }
    let mut ties = TieDirectives::new();
    ties.prefer(0, A, C, A)?;
    ties.prefer(0, C, B, C)?;
    ties.prefer(0, A, B, A)?;
    ties.prefer(1, C, B, C)?;
    ties.prefer(2, A, C, A)?;
    Ok((inst, ties))
}

/// `SC(A)/SC(B)` on a generated instance.
pub fn family_ratio(inst: &MetricInstance) -> Q {
    social_cost(inst, A) / social_cost(inst, B)
}

/// The closed form `d_i(λ, w)` for `i ∈ {1, 2, 3}`.
pub fn closed_form_d<T: Field>(i: u8, lambda: &T, w: &T) -> Result<T, BoundsError> {
    check_domain(lambda, w)?;
    let l = lambda.clone();
    let w = w.clone();
    let one = T::one();
    let n = |k: i64| T::from_int(k);
    let mu = one.clone() - l.clone();
    let below = w <= tau(&l);
    match i {
        1 => Ok(if below {
            (one.clone() + l.clone() - n(2) * mu.clone() * w.clone()) / (l - mu * w)
        } else {
            (l.clone() + one + mu * w) / l
        }),
        2 => Ok(l * (one + w) / mu),
        3 => {
            let w2 = w.clone() * w.clone();
            let l2 = l.clone() * l.clone();
            let base = n(2) + l.clone();
            if below {
                let num = base + (l2 + n(6) * l.clone() - n(4)) * w.clone() - n(3) * l.clone() * mu.clone() * w2;
                let den = l * (one.clone() + w.clone()) * (one - mu * w);
                Ok(num / den)
            } else {
                let num = base + (n(3) * l2.clone() - n(2) * l.clone() + n(2)) * w.clone() + (l.clone() - l2) * w2;
                let den = l * (one.clone() + w.clone()) * (one + mu * w);
                Ok(num / den)
            }
        }
        _ => Err(BoundsError::BadIndex(i)),
    }
}

/// `D(λ, w)` with the 1-based index of the maximizing closed form (first on ties).
pub fn lower_bound_with_argmax<T: Field>(lambda: &T, w: &T) -> Result<(T, [T; 3], u8), BoundsError> {
    let d = [closed_form_d(1, lambda, w)?, closed_form_d(2, lambda, w)?, closed_form_d(3, lambda, w)?];
    let mut best = 0;
    for i in 1..3 {
        if d[i] > d[best] {
            best = i;
        }
    }
    Ok((d[best].clone(), d, best as u8 + 1))
}

/// `D(λ, w) = max(d1, d2, d3)`.
pub fn lower_bound_d<T: Field>(lambda: &T, w: &T) -> Result<T, BoundsError> {
    Ok(lower_bound_with_argmax(lambda, w)?.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub lambda_range: (f64, f64),
    pub w_range: (f64, f64),
    pub lambda_steps: usize,
    pub w_steps: usize,
    /// Adds the exact optimum `(λ*, w*)` as an extra row.
    pub include_optimum: bool,
}

impl Default for HeatmapGrid {
    fn default() -> Self {
        Self { lambda_range: (0.5, 0.7), w_range: (0.0, 1.25), lambda_steps: 200, w_steps: 200, include_optimum: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapRow {
    pub lambda: f64,
    pub w: f64,
    pub d: [f64; 3],
    pub big_d: f64,
    pub argmax: u8,
}

impl HeatmapRow {
    pub const CSV_HEADER: &'static str = "lambda,w,d1,d2,d3,D,argmax";

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.lambda, self.w, self.d[0], self.d[1], self.d[2], self.big_d, self.argmax
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub rows: Vec<HeatmapRow>,
    /// Row index of the smallest `D`.
    pub argmin: usize,
}

impl Heatmap {
    pub fn min(&self) -> &HeatmapRow {
        &self.rows[self.argmin]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(HeatmapRow::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.to_csv());
            out.push('\n');
        }
        out
    }
}

/// Cell midpoints of `steps` equal cells over `[lo, hi]`.
fn midpoints(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    let h = (hi - lo) / steps as f64;
    (0..steps).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

/// Evaluates `D` on the grid. Points outside the domain are skipped.
pub fn heatmap(grid: &HeatmapGrid) -> Heatmap {
    let lambdas = midpoints(grid.lambda_range.0, grid.lambda_range.1, grid.lambda_steps);
    let ws = midpoints(grid.w_range.0, grid.w_range.1, grid.w_steps);
    let per_lambda = crate::par_map(&lambdas, |&l| {
        ws.iter()
            .filter_map(|&w| {
                let (big_d, d, argmax) = lower_bound_with_argmax(&l, &w).ok()?;
                Some(HeatmapRow { lambda: l, w, d, big_d, argmax })
            })
            .collect::<Vec<_>>()
    });
    let mut rows: Vec<HeatmapRow> = per_lambda.into_iter().flatten().collect();
    if grid.include_optimum {
        let (l, w) = canonical_params();
        let (big_d, d, argmax) = lower_bound_with_argmax(&l, &w).expect("optimum lies in the domain");
        rows.push(HeatmapRow {
            lambda: l.to_f64(),
            w: w.to_f64(),
            d: [d[0].to_f64(), d[1].to_f64(), d[2].to_f64()],
            big_d: big_d.to_f64(),
            argmax,
        });
    }
    let argmin = rows
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.big_d.total_cmp(&b.1.big_d))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Heatmap { rows, argmin }
}

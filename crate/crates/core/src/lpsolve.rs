//! Dense two-phase simplex over an exact ordered field.
//!
//! Pivoting follows Bland's rule, so the solver terminates on degenerate
//! programs (the certificate LPs are fully homogeneous and highly degenerate).

use std::fmt;

use thiserror::Error;

use crate::exactnum::{ExactField, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Ge,
    Eq,
    Le,
}

impl Relation {
    fn flipped(self) -> Self {
        match self {
            Relation::Ge => Relation::Le,
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Ge => ">=",
            Relation::Eq => "=",
            Relation::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable<T> {
    pub name: String,
    pub lower: Option<T>,
    pub upper: Option<T>,
}

/// A sparse row `Σ coeff·x relation rhs` with a stable identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<T> {
    pub id: String,
    pub coeffs: Vec<(usize, T)>,
    pub relation: Relation,
    pub rhs: T,
}

/// Minimize `objective · x` subject to the constraints and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T = Rational> {
    pub variables: Vec<Variable<T>>,
    pub constraints: Vec<Constraint<T>>,
    pub objective: Vec<(usize, T)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<T = Rational> {
    pub status: LpStatus,
    /// Primal point. Feasible for `Optimal` and `Unbounded`, empty otherwise.
    pub primal: Vec<T>,
    /// One multiplier per constraint: `>= 0` on `Ge` rows, `<= 0` on `Le` rows.
    pub duals: Vec<T>,
    /// `c - Aᵀy`, one per variable. Only meaningful when `Optimal`.
    pub reduced_costs: Vec<T>,
    pub objective: Option<T>,
    /// Improving direction when `Unbounded`: `c·ray < 0` and the program stays
    /// feasible along `primal + t·ray` for all `t >= 0`.
    pub ray: Option<Vec<T>>,
}

impl<T: ExactField> Default for LinearProgram<T> {
    fn default() -> Self {
        Self { variables: Vec::new(), constraints: Vec::new(), objective: Vec::new() }
    }
}

impl<T: ExactField> LinearProgram<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: Option<T>, upper: Option<T>) -> usize {
        self.variables.push(Variable { name: name.into(), lower, upper });
        self.variables.len() - 1
    }

    pub fn add_free_var(&mut self, name: impl Into<String>) -> usize {
        self.add_var(name, None, None)
    }

    pub fn add_nonneg_var(&mut self, name: impl Into<String>) -> usize {
        self.add_var(name, Some(T::zero()), None)
    }

    pub fn add_constraint(
        &mut self,
        id: impl Into<String>,
        coeffs: Vec<(usize, T)>,
        relation: Relation,
        rhs: T,
    ) -> usize {
        self.constraints.push(Constraint { id: id.into(), coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    pub fn set_objective(&mut self, coeffs: Vec<(usize, T)>) {
        self.objective = coeffs;
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn constraint_index(&self, id: &str) -> Option<usize> {
        self.constraints.iter().position(|c| c.id == id)
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.variables.len();
        let bad = |msg: String| Err(LpError::MalformedProgram(msg));
        for v in &self.variables {
            if let (Some(l), Some(u)) = (&v.lower, &v.upper) {
                if l > u {
                    return bad(format!("variable {} has lower bound above upper bound", v.name));
                }
            }
        }
        for c in &self.constraints {
            if let Some((j, _)) = c.coeffs.iter().find(|(j, _)| *j >= n) {
                return bad(format!("constraint {} references variable {j} of {n}", c.id));
            }
        }
        if let Some((j, _)) = self.objective.iter().find(|(j, _)| *j >= n) {
            return bad(format!("objective references variable {j} of {n}"));
        }
        Ok(())
    }

    /// Coefficients of one constraint as a dense vector.
    pub fn dense_row(&self, i: usize) -> Vec<T> {
        densify(&self.constraints[i].coeffs, self.variables.len())
    }

    pub fn dense_objective(&self) -> Vec<T> {
        densify(&self.objective, self.variables.len())
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        dot(&self.objective, x)
    }

    /// Constraint rows whose relation fails at `x`, plus violated bounds.
    pub fn violations(&self, x: &[T]) -> Vec<String> {
        let mut out = Vec::new();
        for c in &self.constraints {
            let lhs = dot(&c.coeffs, x);
            let ok = match c.relation {
                Relation::Ge => lhs >= c.rhs,
                Relation::Le => lhs <= c.rhs,
                Relation::Eq => lhs == c.rhs,
            };
            if !ok {
                out.push(format!("{}: {} {} {}", c.id, lhs, c.relation.symbol(), c.rhs));
            }
        }
        for (j, v) in self.variables.iter().enumerate() {
            if v.lower.as_ref().is_some_and(|l| &x[j] < l) || v.upper.as_ref().is_some_and(|u| &x[j] > u) {
                out.push(format!("bound on {}: value {}", v.name, x[j]));
            }
        }
        out
    }

    /// Plain-text dump, one constraint per line, for external cross-checking.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("minimize ");
        s.push_str(&self.format_expr(&self.objective));
        s.push('\n');
        s.push_str("subject to\n");
        for c in &self.constraints {
            s.push_str(&format!(
                "  {}: {} {} {}\n",
                c.id,
                self.format_expr(&c.coeffs),
                c.relation.symbol(),
                c.rhs
            ));
        }
        s.push_str("bounds\n");
        for v in &self.variables {
            let lo = v.lower.as_ref().map_or("-inf".to_string(), |l| l.to_string());
            let hi = v.upper.as_ref().map_or("+inf".to_string(), |u| u.to_string());
            s.push_str(&format!("  {} <= {} <= {}\n", lo, v.name, hi));
        }
        s
    }

    fn format_expr(&self, coeffs: &[(usize, T)]) -> String {
        if coeffs.is_empty() {
            return "0".into();
        }
        coeffs
            .iter()
            .map(|(j, c)| format!("{} {}", c, self.variables[*j].name))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

fn densify<T: ExactField>(coeffs: &[(usize, T)], n: usize) -> Vec<T> {
    let mut row = vec![T::zero(); n];
    for (j, c) in coeffs {
        row[*j] = row[*j].clone() + c.clone();
    }
    row
}

fn dot<T: ExactField>(coeffs: &[(usize, T)], x: &[T]) -> T {
    coeffs.iter().fold(T::zero(), |acc, (j, c)| acc + c.clone() * x[*j].clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

#[derive(Debug, Clone, Copy)]
enum RowOrigin {
    Constraint(usize),
    UpperBound,
}

struct StdForm<T> {
    /// For each original variable: offset plus (column, ±1) terms.
    var_map: Vec<(T, Vec<(usize, bool)>)>,
    kinds: Vec<ColumnKind>,
    /// Column holding the initial identity entry of each row.
    identity_col: Vec<usize>,
    origins: Vec<RowOrigin>,
    flipped: Vec<bool>,
    tableau: Vec<Vec<T>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl<T: ExactField> StdForm<T> {
    fn build(lp: &LinearProgram<T>) -> Self {
        let mut var_map = Vec::with_capacity(lp.variables.len());
        let mut kinds = Vec::new();
        // (column, bound) rows for finite upper bounds on shifted variables.
        let mut bound_rows: Vec<(usize, usize, T)> = Vec::new();
        for (j, v) in lp.variables.iter().enumerate() {
            match (&v.lower, &v.upper) {
                (Some(l), upper) => {
                    let col = kinds.len();
                    kinds.push(ColumnKind::Structural);
                    if let Some(u) = upper {
                        bound_rows.push((j, col, u.clone() - l.clone()));
                    }
                    var_map.push((l.clone(), vec![(col, true)]));
                }
                (None, Some(u)) => {
                    let col = kinds.len();
                    kinds.push(ColumnKind::Structural);
                    var_map.push((u.clone(), vec![(col, false)]));
                }
                (None, None) => {
                    let plus = kinds.len();
                    kinds.push(ColumnKind::Structural);
                    kinds.push(ColumnKind::Structural);
                    var_map.push((T::zero(), vec![(plus, true), (plus + 1, false)]));
                }
            }
        }
        let nstruct = kinds.len();

        // Rows over structural columns, before slacks.
        let mut rows: Vec<(Vec<(usize, T)>, Relation, T, RowOrigin)> = Vec::new();
        for (i, c) in lp.constraints.iter().enumerate() {
            let mut coeffs: Vec<(usize, T)> = Vec::new();
            let mut rhs = c.rhs.clone();
            for (j, a) in &c.coeffs {
                let (offset, cols) = &var_map[*j];
                rhs = rhs - a.clone() * offset.clone();
                for (col, positive) in cols {
                    let v = if *positive { a.clone() } else { -a.clone() };
                    coeffs.push((*col, v));
                }
            }
            rows.push((coeffs, c.relation, rhs, RowOrigin::Constraint(i)));
        }
        for (_, col, cap) in bound_rows {
            rows.push((vec![(col, T::one())], Relation::Le, cap, RowOrigin::UpperBound));
        }

        let nrows = rows.len();
        let mut flipped = vec![false; nrows];
        let mut relations = Vec::with_capacity(nrows);
        for (i, row) in rows.iter_mut().enumerate() {
            // Homogeneous `>=` rows become `<=` rows so their slack starts basic.
            if row.2 < T::zero() || (row.2.is_zero() && row.1 == Relation::Ge) {
                flipped[i] = true;
                for (_, a) in row.0.iter_mut() {
                    *a = -a.clone();
                }
                row.2 = -row.2.clone();
                row.1 = row.1.flipped();
            }
            relations.push(row.1);
        }

        // Slack / surplus columns, then artificials.
        let mut slack_col = vec![None; nrows];
        for (i, rel) in relations.iter().enumerate() {
            if *rel != Relation::Eq {
                slack_col[i] = Some(kinds.len());
                kinds.push(ColumnKind::Slack);
            }
        }
        let mut identity_col = vec![0; nrows];
        for (i, rel) in relations.iter().enumerate() {
            if *rel == Relation::Le {
                identity_col[i] = slack_col[i].unwrap();
            } else {
                identity_col[i] = kinds.len();
                kinds.push(ColumnKind::Artificial);
            }
        }
        let ncols = kinds.len();

        let mut tableau = Vec::with_capacity(nrows);
        for (i, (coeffs, rel, rhs, _)) in rows.iter().enumerate() {
            let mut r = vec![T::zero(); ncols + 1];
            for (col, a) in coeffs {
                r[*col] = r[*col].clone() + a.clone();
            }
            if let Some(s) = slack_col[i] {
                r[s] = if *rel == Relation::Le { T::one() } else { -T::one() };
            }
            r[identity_col[i]] = T::one();
            r[ncols] = rhs.clone();
            tableau.push(r);
        }
        debug_assert!(nstruct <= ncols);

        StdForm {
            var_map,
            kinds,
            basis: identity_col.clone(),
            identity_col,
            origins: rows.iter().map(|r| r.3).collect(),
            flipped,
            tableau,
            ncols,
        }
    }

    fn pivot(&mut self, obj: &mut [T], r: usize, c: usize) {
        let width = self.ncols + 1;
        let p = self.tableau[r][c].clone();
        if !p.is_one() {
            for k in 0..width {
                if !self.tableau[r][k].is_zero() {
                    self.tableau[r][k] = self.tableau[r][k].clone() / p.clone();
                }
            }
        }
        let support: Vec<usize> = (0..width).filter(|&k| !self.tableau[r][k].is_zero()).collect();
        let pivot_row = self.tableau[r].clone();
        for (i, row) in self.tableau.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for &k in &support {
                row[k] = row[k].clone() - factor.clone() * pivot_row[k].clone();
            }
        }
        if !obj[c].is_zero() {
            let factor = obj[c].clone();
            for &k in &support {
                obj[k] = obj[k].clone() - factor.clone() * pivot_row[k].clone();
            }
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for column costs `cost` given the current basis.
    /// The last entry holds `-z`.
    fn cost_row(&self, cost: &[T]) -> Vec<T> {
        let mut obj: Vec<T> = cost.to_vec();
        obj.push(T::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            let cb = cost[b].clone();
            for (k, entry) in self.tableau[i].iter().enumerate() {
                if !entry.is_zero() {
                    obj[k] = obj[k].clone() - cb.clone() * entry.clone();
                }
            }
        }
        obj
    }

    /// Runs Bland-rule simplex. Returns the entering column on unboundedness.
    fn run(&mut self, obj: &mut [T], allowed: impl Fn(ColumnKind) -> bool) -> Option<usize> {
        loop {
            let entering = (0..self.ncols).find(|&c| allowed(self.kinds[c]) && obj[c] < T::zero());
            let Some(c) = entering else {
                return None;
            };
            let mut best: Option<(usize, T)> = None;
            for (i, row) in self.tableau.iter().enumerate() {
                if row[c] > T::zero() {
                    let ratio = row[self.ncols].clone() / row[c].clone();
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                Some((r, _)) => self.pivot(obj, r, c),
                None => return Some(c),
            }
        }
    }

    fn column_values(&self) -> Vec<T> {
        let mut vals = vec![T::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            vals[b] = self.tableau[i][self.ncols].clone();
        }
        vals
    }

    fn to_original(&self, vals: &[T], with_offset: bool) -> Vec<T> {
        self.var_map
            .iter()
            .map(|(offset, cols)| {
                let base = if with_offset { offset.clone() } else { T::zero() };
                cols.iter().fold(base, |acc, (col, positive)| {
                    if *positive {
                        acc + vals[*col].clone()
                    } else {
                        acc - vals[*col].clone()
                    }
                })
            })
            .collect()
    }
}

/// Solves `lp` exactly with the two-phase simplex method.
pub fn lp_solve<T: ExactField>(lp: &LinearProgram<T>) -> Result<LpSolution<T>, LpError> {
    lp.validate()?;
    let mut sf = StdForm::build(lp);
    let ncols = sf.ncols;

    // Phase 1: minimize the sum of artificials.
    let phase1_cost: Vec<T> = sf
        .kinds
        .iter()
        .map(|k| if *k == ColumnKind::Artificial { T::one() } else { T::zero() })
        .collect();
    let mut obj = sf.cost_row(&phase1_cost);
    sf.run(&mut obj, |_| true);
    if obj[ncols] < T::zero() {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            primal: Vec::new(),
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: None,
            ray: None,
        });
    }
    // Drive zero-level artificials out of the basis where possible.
    for r in 0..sf.basis.len() {
        if sf.kinds[sf.basis[r]] != ColumnKind::Artificial {
            continue;
        }
        if let Some(c) =
            (0..ncols).find(|&c| sf.kinds[c] != ColumnKind::Artificial && !sf.tableau[r][c].is_zero())
        {
            sf.pivot(&mut obj, r, c);
        }
    }

    // Phase 2.
    let mut cost = vec![T::zero(); ncols];
    for (j, c) in &lp.objective {
        for (col, positive) in &sf.var_map[*j].1 {
            let v = if *positive { c.clone() } else { -c.clone() };
            cost[*col] = cost[*col].clone() + v;
        }
    }
    let mut obj = sf.cost_row(&cost);
    let unbounded = sf.run(&mut obj, |k| k != ColumnKind::Artificial);

    let vals = sf.column_values();
    let primal = sf.to_original(&vals, true);
    let objective = lp.objective_value(&primal);

    if let Some(c) = unbounded {
        let mut dir = vec![T::zero(); ncols];
        dir[c] = T::one();
        for (i, &b) in sf.basis.iter().enumerate() {
            dir[b] = -sf.tableau[i][c].clone();
        }
        let ray = sf.to_original(&dir, false);
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: None,
            ray: Some(ray),
        });
    }

    // y_i = -(reduced cost of the row's identity column); undo row flips.
    let mut duals = vec![T::zero(); lp.constraints.len()];
    for (i, origin) in sf.origins.iter().enumerate() {
        if let RowOrigin::Constraint(k) = origin {
            let y = -obj[sf.identity_col[i]].clone();
            duals[*k] = if sf.flipped[i] { -y } else { y };
        }
    }
    let mut reduced_costs = lp.dense_objective();
    for (k, c) in lp.constraints.iter().enumerate() {
        for (j, a) in &c.coeffs {
            reduced_costs[*j] = reduced_costs[*j].clone() - a.clone() * duals[k].clone();
        }
    }

    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        duals,
        reduced_costs,
        objective: Some(objective),
        ray: None,
    })
}

/// Checks primal feasibility, dual sign conditions, complementary slackness
/// and strong duality of an `Optimal` solution, exactly.
pub fn verify_optimality<T: ExactField>(lp: &LinearProgram<T>, sol: &LpSolution<T>) -> Result<(), String> {
    if sol.status != LpStatus::Optimal {
        return Err(format!("status is {:?}", sol.status));
    }
    let x = &sol.primal;
    let violations = lp.violations(x);
    if !violations.is_empty() {
        return Err(format!("primal infeasible: {}", violations.join("; ")));
    }
    let mut dual_objective = T::zero();
    for (k, c) in lp.constraints.iter().enumerate() {
        let y = &sol.duals[k];
        let sign_ok = match c.relation {
            Relation::Ge => *y >= T::zero(),
            Relation::Le => *y <= T::zero(),
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(format!("dual of {} has wrong sign: {}", c.id, y));
        }
        let slack = dot(&c.coeffs, x) - c.rhs.clone();
        if !(y.clone() * slack).is_zero() {
            return Err(format!("complementary slackness fails on {}", c.id));
        }
        dual_objective = dual_objective + y.clone() * c.rhs.clone();
    }
    for (j, v) in lp.variables.iter().enumerate() {
        let r = &sol.reduced_costs[j];
        if r.is_zero() {
            continue;
        }
        let bound = if *r > T::zero() { &v.lower } else { &v.upper };
        match bound {
            None => return Err(format!("reduced cost {} on {} has no supporting bound", r, v.name)),
            Some(b) => {
                if x[j] != *b {
                    return Err(format!("variable {} off its bound with reduced cost {}", v.name, r));
                }
                dual_objective = dual_objective + r.clone() * b.clone();
            }
        }
    }
    let primal_objective = lp.objective_value(x);
    if primal_objective != dual_objective {
        return Err(format!("duality gap: primal {primal_objective} vs dual {dual_objective}"));
    }
    Ok(())
}

impl<T: ExactField> fmt::Display for LinearProgram<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    #[test]
    fn single_lower_bound_row() {
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_free_var("x");
        lp.add_constraint("x_ge_3", vec![(x, rat(1, 1))], Relation::Ge, rat(3, 1));
        lp.set_objective(vec![(x, rat(1, 1))]);
        let sol = lp_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_eq!(sol.primal, vec![rat(3, 1)]);
        assert_eq!(sol.duals, vec![rat(1, 1)]);
        verify_optimality(&lp, &sol).unwrap();
    }

    #[test]
    fn unbounded_below() {
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_nonneg_var("x");
        lp.set_objective(vec![(x, rat(-1, 1))]);
        let sol = lp_solve(&lp).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
        assert_eq!(sol.ray, Some(vec![rat(1, 1)]));
    }

    #[test]
    fn infeasible_system() {
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_nonneg_var("x");
        lp.add_constraint("le", vec![(x, rat(1, 1))], Relation::Le, rat(-1, 1));
        lp.set_objective(vec![(x, rat(1, 1))]);
        assert_eq!(lp_solve(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn bounded_box_and_equality() {
        // min -x - 2y  s.t. x + y = 3, 0 <= x <= 2, 1 <= y <= 2
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_var("x", Some(rat(0, 1)), Some(rat(2, 1)));
        let y = lp.add_var("y", Some(rat(1, 1)), Some(rat(2, 1)));
        lp.add_constraint("sum", vec![(x, rat(1, 1)), (y, rat(1, 1))], Relation::Eq, rat(3, 1));
        lp.set_objective(vec![(x, rat(-1, 1)), (y, rat(-2, 1))]);
        let sol = lp_solve(&lp).unwrap();
        assert_eq!(sol.primal, vec![rat(1, 1), rat(2, 1)]);
        assert_eq!(sol.objective, Some(rat(-5, 1)));
        verify_optimality(&lp, &sol).unwrap();
    }

    #[test]
    fn negative_rhs_rows_and_upper_only_vars() {
        // min x  s.t. -x <= -2 (x >= 2), x <= 5 via upper-only bound
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_var("x", None, Some(rat(5, 1)));
        lp.add_constraint("neg", vec![(x, rat(-1, 1))], Relation::Le, rat(-2, 1));
        lp.set_objective(vec![(x, rat(1, 1))]);
        let sol = lp_solve(&lp).unwrap();
        assert_eq!(sol.primal, vec![rat(2, 1)]);
        assert_eq!(sol.duals, vec![rat(-1, 1)]);
        verify_optimality(&lp, &sol).unwrap();
    }

    #[test]
    fn malformed_reference() {
        let mut lp = LinearProgram::<Rational>::new();
        lp.add_constraint("bad", vec![(3, rat(1, 1))], Relation::Ge, rat(0, 1));
        assert!(matches!(lp_solve(&lp), Err(LpError::MalformedProgram(_))));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_nonneg_var("x");
        let y = lp.add_nonneg_var("y");
        let row = vec![(x, rat(1, 1)), (y, rat(1, 1))];
        lp.add_constraint("a", row.clone(), Relation::Eq, rat(1, 1));
        lp.add_constraint("b", row, Relation::Eq, rat(1, 1));
        lp.set_objective(vec![(x, rat(1, 1)), (y, rat(2, 1))]);
        let sol = lp_solve(&lp).unwrap();
        assert_eq!(sol.objective, Some(rat(1, 1)));
        verify_optimality(&lp, &sol).unwrap();
    }

    #[test]
    fn text_dump_has_one_line_per_constraint() {
        let mut lp = LinearProgram::<Rational>::new();
        let x = lp.add_free_var("x");
        lp.add_constraint("c1", vec![(x, rat(1, 2))], Relation::Ge, rat(1, 1));
        lp.add_constraint("c2", vec![(x, rat(1, 1))], Relation::Le, rat(4, 1));
        let text = lp.to_text();
        assert!(text.contains("c1: 1/2 x >= 1"));
        assert!(text.contains("c2: 1 x <= 4"));
    }
}

//! Two-phase revised simplex on a dense explicit basis inverse, with
//! Dantzig pricing, a Harris ratio test and Bland's rule against stalling.

use super::{LinearProgram, Relation, Sense};
use crate::Scalar;

pub const PIVOT_TOL: f64 = 1e-9;
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const OPTIMALITY_TOL: f64 = 1e-9;
/// Absolute constraint violation accepted in a returned optimum.
pub const ACCEPT_TOL: f64 = 1e-8;
const REFACTOR_EVERY: usize = 50;
const MAX_ITERATIONS: usize = 200_000;
/// Consecutive degenerate pivots after which pricing falls back to Bland's rule.
const BLAND_AFTER: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// The algorithm could not produce a trustworthy answer; see the
    /// diagnostics message.
    NumericalFailure,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::NumericalFailure => "numerical-failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Diagnostics<T> {
    pub phase1_iterations: usize,
    pub phase2_iterations: usize,
    pub refactorizations: usize,
    /// Sum of artificial variables at the end of phase 1, in equilibrated
    /// units; the infeasibility certificate when positive.
    pub phase1_objective: T,
    /// Largest violation of original constraints by `values`.
    pub max_violation: T,
    /// Row-norm equilibration factors, one per original constraint.
    pub row_scales: Vec<T>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T> {
    pub status: Status,
    /// Values of the original variables (meaningful when optimal).
    pub values: Vec<T>,
    pub objective: Option<T>,
    pub diagnostics: Diagnostics<T>,
}

/// Where an original variable lives in the standard form.
#[derive(Clone, Copy, Debug)]
enum Mapping<T> {
    Shifted { col: usize, lower: T },
    Split { pos: usize, neg: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColKind {
    Structural,
    Slack,
    Artificial,
}

struct StandardForm<T> {
    m: usize,
    cols: Vec<Vec<(usize, T)>>,
    kinds: Vec<ColKind>,
    b: Vec<T>,
    cost: Vec<T>,
    initial_basis: Vec<usize>,
    mapping: Vec<Mapping<T>>,
    row_scales: Vec<T>,
}

fn standard_form<T: Scalar>(lp: &LinearProgram<T>) -> Result<StandardForm<T>, String> {
    let mut cols: Vec<Vec<(usize, T)>> = Vec::new();
    let mut kinds = Vec::new();
    let mut mapping = Vec::with_capacity(lp.num_variables());
    for v in lp.variables() {
        match v.lower {
            Some(lower) => {
                mapping.push(Mapping::Shifted { col: cols.len(), lower });
                cols.push(Vec::new());
                kinds.push(ColKind::Structural);
            }
            None => {
                mapping.push(Mapping::Split { pos: cols.len(), neg: cols.len() + 1 });
                cols.push(Vec::new());
                cols.push(Vec::new());
                kinds.push(ColKind::Structural);
                kinds.push(ColKind::Structural);
            }
        }
    }
    let sign = match lp.sense() {
        Sense::Minimize => T::one(),
        Sense::Maximize => -T::one(),
    };
    let mut cost = vec![T::zero(); cols.len()];
    for &(v, c) in lp.objective() {
        match mapping[v.0] {
            Mapping::Shifted { col, .. } => cost[col] = sign * c,
            Mapping::Split { pos, neg } => {
                cost[pos] = sign * c;
                cost[neg] = -sign * c;
            }
        }
    }

    let mut b = Vec::new();
    let mut row_scales = Vec::with_capacity(lp.num_constraints());
    let mut slack_of_row: Vec<Option<(usize, T)>> = Vec::new();
    let mut m = 0;
    for (i, row) in lp.constraints().iter().enumerate() {
        let scale_base = row.coeffs.iter().fold(T::zero(), |acc, &(_, c)| acc.max(c.abs()));
        let mut rhs = row.rhs;
        for &(v, c) in &row.coeffs {
            if let Mapping::Shifted { lower, .. } = mapping[v.0] {
                rhs = rhs - c * lower;
            }
        }
        if scale_base == T::zero() {
            row_scales.push(T::one());
            let ok = match row.relation {
                Relation::Le => rhs >= -T::lit(FEASIBILITY_TOL),
                Relation::Ge => rhs <= T::lit(FEASIBILITY_TOL),
                Relation::Eq => rhs.abs() <= T::lit(FEASIBILITY_TOL),
            };
            if !ok {
                return Err(format!("empty row c{} cannot be satisfied", i + 1));
            }
            continue;
        }
        let scale = T::one() / scale_base;
        row_scales.push(scale);
        let r = m;
        m += 1;
        let flip = rhs * scale < T::zero();
        let s = if flip { -scale } else { scale };
        for &(v, c) in &row.coeffs {
            match mapping[v.0] {
                Mapping::Shifted { col, .. } => cols[col].push((r, s * c)),
                Mapping::Split { pos, neg } => {
                    cols[pos].push((r, s * c));
                    cols[neg].push((r, -s * c));
                }
            }
        }
        b.push(s * rhs);
        let slack = match row.relation {
            Relation::Le => Some(T::one()),
            Relation::Ge => Some(-T::one()),
            Relation::Eq => None,
        };
        if let Some(coef) = slack {
            let coef = if flip { -coef } else { coef };
            cols.push(vec![(r, coef)]);
            kinds.push(ColKind::Slack);
            cost.push(T::zero());
            slack_of_row.push(Some((cols.len() - 1, coef)));
        } else {
            slack_of_row.push(None);
        }
    }

    let mut initial_basis = Vec::with_capacity(m);
    for (r, slack) in slack_of_row.iter().enumerate() {
        match slack {
            Some((col, coef)) if *coef > T::zero() => initial_basis.push(*col),
            _ => {
                cols.push(vec![(r, T::one())]);
                kinds.push(ColKind::Artificial);
                cost.push(T::zero());
                initial_basis.push(cols.len() - 1);
            }
        }
    }
    Ok(StandardForm { m, cols, kinds, b, cost, initial_basis, mapping, row_scales })
}

enum PhaseEnd {
    Optimal,
    Unbounded,
    Failure(String),
}

struct Tableau<'a, T> {
    sf: &'a StandardForm<T>,
    basis: Vec<usize>,
    in_basis: Vec<Option<usize>>,
    binv: Vec<T>,
    xb: Vec<T>,
    since_refactor: usize,
    refactorizations: usize,
}

impl<'a, T: Scalar> Tableau<'a, T> {
    fn new(sf: &'a StandardForm<T>) -> Self {
        let m = sf.m;
        let mut in_basis = vec![None; sf.cols.len()];
        for (r, &c) in sf.initial_basis.iter().enumerate() {
            in_basis[c] = Some(r);
        }
        let mut t = Tableau {
            sf,
            basis: sf.initial_basis.clone(),
            in_basis,
            binv: vec![T::zero(); m * m],
            xb: vec![T::zero(); m],
            since_refactor: 0,
            refactorizations: 0,
        };
        // Initial basis columns are unit vectors with coefficient +1.
        for r in 0..m {
            t.binv[r * m + r] = T::one();
        }
        t.xb.copy_from_slice(&sf.b);
        t
    }

    /// Recomputes `B⁻¹` by Gauss–Jordan elimination with partial pivoting.
    fn refactor(&mut self) -> Result<(), String> {
        let m = self.sf.m;
        let mut a = vec![T::zero(); m * m];
        for (r, &c) in self.basis.iter().enumerate() {
            for &(i, v) in &self.sf.cols[c] {
                a[i * m + r] = v;
            }
        }
        let mut inv = vec![T::zero(); m * m];
        for r in 0..m {
            inv[r * m + r] = T::one();
        }
        for col in 0..m {
            let (piv, best) = (col..m).map(|r| (r, a[r * m + col].abs())).fold((col, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= T::lit(1e-14) {
                return Err("singular basis during refactorization".into());
            }
            if piv != col {
                for k in 0..m {
                    a.swap(piv * m + k, col * m + k);
                    inv.swap(piv * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] = a[col * m + k] / d;
                inv[col * m + k] = inv[col * m + k] / d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == T::zero() {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] = a[r * m + k] - f * a[col * m + k];
                    inv[r * m + k] = inv[r * m + k] - f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        for r in 0..m {
            let mut s = T::zero();
            for i in 0..m {
                s = s + self.binv[r * m + i] * self.sf.b[i];
            }
            self.xb[r] = s;
        }
        self.since_refactor = 0;
        self.refactorizations += 1;
        Ok(())
    }

    fn column(&self, j: usize) -> Vec<T> {
        let m = self.sf.m;
        let mut alpha = vec![T::zero(); m];
        for &(i, v) in &self.sf.cols[j] {
            for r in 0..m {
                alpha[r] = alpha[r] + self.binv[r * m + i] * v;
            }
        }
        alpha
    }

    fn duals(&self, cost: &[T]) -> Vec<T> {
        let m = self.sf.m;
        let mut y = vec![T::zero(); m];
        for r in 0..m {
            let cb = cost[self.basis[r]];
            if cb == T::zero() {
                continue;
            }
            for k in 0..m {
                y[k] = y[k] + cb * self.binv[r * m + k];
            }
        }
        y
    }

    fn pivot(&mut self, row: usize, enter: usize, alpha: &[T]) {
        let m = self.sf.m;
        let p = alpha[row];
        for k in 0..m {
            self.binv[row * m + k] = self.binv[row * m + k] / p;
        }
        self.xb[row] = self.xb[row] / p;
        for r in 0..m {
            if r == row || alpha[r] == T::zero() {
                continue;
            }
            let f = alpha[r];
            for k in 0..m {
                self.binv[r * m + k] = self.binv[r * m + k] - f * self.binv[row * m + k];
            }
            self.xb[r] = self.xb[r] - f * self.xb[row];
        }
        let leave = self.basis[row];
        self.in_basis[leave] = None;
        self.in_basis[enter] = Some(row);
        self.basis[row] = enter;
        self.since_refactor += 1;
    }

    /// Minimises `cost` over the current basis, never letting a column
    /// rejected by `allowed` enter.
    fn optimise(&mut self, cost: &[T], allowed: impl Fn(usize) -> bool, iterations: &mut usize) -> PhaseEnd {
        let opt_tol = T::lit(OPTIMALITY_TOL);
        let piv_tol = T::lit(PIVOT_TOL);
        let feas_tol = T::lit(FEASIBILITY_TOL);
        let mut degenerate_run = 0;
        loop {
            if *iterations >= MAX_ITERATIONS {
                return PhaseEnd::Failure("iteration limit reached".into());
            }
            if self.since_refactor >= REFACTOR_EVERY {
                if let Err(e) = self.refactor() {
                    return PhaseEnd::Failure(e);
                }
            }
            let y = self.duals(cost);
            let reduced = |j: usize| self.sf.cols[j].iter().fold(cost[j], |acc, &(i, v)| acc - y[i] * v);
            let candidates = (0..self.sf.cols.len()).filter(|&j| self.in_basis[j].is_none() && allowed(j));
            let enter = if degenerate_run >= BLAND_AFTER {
                // Bland: lowest-index improving column, to escape stalling.
                candidates.into_iter().find(|&j| reduced(j) < -opt_tol)
            } else {
                // Dantzig: most negative reduced cost.
                candidates
                    .map(|j| (j, reduced(j)))
                    .filter(|&(_, d)| d < -opt_tol)
                    .fold(None, |acc: Option<(usize, T)>, x| match acc {
                        Some(a) if a.1 <= x.1 => Some(a),
                        _ => Some(x),
                    })
                    .map(|(j, _)| j)
            };
            let Some(enter) = enter else { return PhaseEnd::Optimal };
            let alpha = self.column(enter);
            // Harris two-pass ratio test: relax the bounds by the feasibility
            // tolerance, then take the largest pivot among the rows that
            // still block.
            let relaxed = (0..self.sf.m)
                .filter(|&r| alpha[r] > piv_tol)
                .map(|r| (self.xb[r].max(T::zero()) + feas_tol) / alpha[r])
                .fold(None, |acc: Option<T>, x| Some(acc.map_or(x, |a| a.min(x))));
            let Some(theta_max) = relaxed else { return PhaseEnd::Unbounded };
            let mut best: Option<(usize, T)> = None;
            for r in 0..self.sf.m {
                if alpha[r] <= piv_tol || self.xb[r].max(T::zero()) / alpha[r] > theta_max {
                    continue;
                }
                best = match best {
                    Some((br, ba)) if ba > alpha[r] || (ba == alpha[r] && self.basis[br] < self.basis[r]) => Some((br, ba)),
                    _ => Some((r, alpha[r])),
                };
            }
            let (row, _) = best.expect("the relaxed minimum is attained");
            let theta = self.xb[row].max(T::zero()) / alpha[row];
            if theta <= feas_tol {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, enter, &alpha);
            *iterations += 1;
        }
    }

    fn std_values(&self) -> Vec<T> {
        let mut x = vec![T::zero(); self.sf.cols.len()];
        for (r, &c) in self.basis.iter().enumerate() {
            x[c] = self.xb[r].max(T::zero());
        }
        x
    }
}

/// Solves `lp`; deterministic for identical input.
pub fn solve<T: Scalar>(lp: &LinearProgram<T>) -> Solution<T> {
    let n = lp.num_variables();
    let mut diag = Diagnostics { phase1_objective: T::zero(), max_violation: T::zero(), ..Default::default() };
    let fail = |status: Status, diag: Diagnostics<T>| Solution { status, values: vec![T::zero(); n], objective: None, diagnostics: diag };
    if let Err(e) = lp.validate() {
        diag.message = e.to_string();
        return fail(Status::NumericalFailure, diag);
    }
    let sf = match standard_form(lp) {
        Ok(sf) => sf,
        Err(msg) => {
            diag.message = msg;
            return fail(Status::Infeasible, diag);
        }
    };
    diag.row_scales = sf.row_scales.clone();
    let mut tab = Tableau::new(&sf);

    // Phase 1.
    let has_artificial = sf.kinds.contains(&ColKind::Artificial);
    if has_artificial {
        let cost1: Vec<T> = sf.kinds.iter().map(|&k| if k == ColKind::Artificial { T::one() } else { T::zero() }).collect();
        let mut it = 0;
        let end = tab.optimise(&cost1, |_| true, &mut it);
        diag.phase1_iterations = it;
        if let PhaseEnd::Failure(msg) = end {
            diag.message = format!("phase 1: {msg}");
            diag.refactorizations = tab.refactorizations;
            return fail(Status::NumericalFailure, diag);
        }
        if let Err(e) = tab.refactor() {
            diag.message = e;
            return fail(Status::NumericalFailure, diag);
        }
        let infeas: T = tab.basis.iter().zip(&tab.xb).filter(|(&c, _)| sf.kinds[c] == ColKind::Artificial).map(|(_, &x)| x.max(T::zero())).sum();
        diag.phase1_objective = infeas;
        if infeas > T::lit(FEASIBILITY_TOL) {
            diag.message = format!("phase 1 optimum {infeas:e} > 0");
            diag.refactorizations = tab.refactorizations;
            return fail(Status::Infeasible, diag);
        }
        // Drive artificials out of the basis where a replacement exists.
        for row in 0..sf.m {
            if sf.kinds[tab.basis[row]] != ColKind::Artificial {
                continue;
            }
            let m = sf.m;
            let replacement = (0..sf.cols.len()).find(|&j| {
                sf.kinds[j] != ColKind::Artificial
                    && tab.in_basis[j].is_none()
                    && sf.cols[j].iter().fold(T::zero(), |acc, &(i, v)| acc + tab.binv[row * m + i] * v).abs() > T::lit(1e-7)
            });
            if let Some(j) = replacement {
                let alpha = tab.column(j);
                tab.pivot(row, j, &alpha);
            }
        }
    }

    // Phase 2.
    let mut it = 0;
    let end = tab.optimise(&sf.cost, |j| sf.kinds[j] != ColKind::Artificial, &mut it);
    diag.phase2_iterations = it;
    match end {
        PhaseEnd::Optimal => {}
        PhaseEnd::Unbounded => {
            diag.message = "improving ray found".into();
            diag.refactorizations = tab.refactorizations;
            return fail(Status::Unbounded, diag);
        }
        PhaseEnd::Failure(msg) => {
            diag.message = format!("phase 2: {msg}");
            diag.refactorizations = tab.refactorizations;
            return fail(Status::NumericalFailure, diag);
        }
    }
    if let Err(e) = tab.refactor() {
        diag.message = e;
        return fail(Status::NumericalFailure, diag);
    }
    diag.refactorizations = tab.refactorizations;
    let xs = tab.std_values();
    let values: Vec<T> = sf
        .mapping
        .iter()
        .map(|m| match *m {
            Mapping::Shifted { col, lower } => lower + xs[col],
            Mapping::Split { pos, neg } => xs[pos] - xs[neg],
        })
        .collect();
    diag.max_violation = lp.max_violation(&values);
    if diag.max_violation > T::lit(ACCEPT_TOL) {
        diag.message = format!("optimal basis violates constraints by {:e}", diag.max_violation);
        return Solution { status: Status::NumericalFailure, values, objective: None, diagnostics: diag };
    }
    let objective = lp.objective_value(&values);
    Solution { status: Status::Optimal, values, objective: Some(objective), diagnostics: diag }
}

//! Dense two-phase simplex over exact rationals.
//!
//! All variables are implicitly nonnegative, which is exactly the setting of
//! configuration counts. Pivoting follows Bland's rule, so the method
//! terminates without cycling; problems here have a handful of variables and
//! rows, so a dense tableau is plenty.

use num::{BigInt, BigRational, One, Signed, Zero};

use super::Relation;

pub type Rational = BigRational;

pub fn rat(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A system of linear rows over `num_vars` nonnegative variables.
#[derive(Debug, Clone)]
pub struct Problem {
    num_vars: usize,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal {
        value: Rational,
        point: Vec<Rational>,
    },
}

impl Problem {
    pub fn new(num_vars: usize) -> Self {
        Problem {
            num_vars,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn push(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "row arity");
        self.rows.push(Row {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn push_int(&mut self, coeffs: &[i64], relation: Relation, rhs: i64) {
        self.push(coeffs.iter().map(|&a| rat(a)).collect(), relation, rat(rhs));
    }

    /// Some feasible point, or `None` when the system has no rational solution.
    pub fn feasible_point(&self) -> Option<Vec<Rational>> {
        match self.minimize(&vec![Rational::zero(); self.num_vars]) {
            LpOutcome::Optimal { point, .. } => Some(point),
            LpOutcome::Infeasible => None,
            LpOutcome::Unbounded => unreachable!("zero objective is bounded"),
        }
    }

    pub fn maximize(&self, objective: &[Rational]) -> LpOutcome {
        let neg: Vec<Rational> = objective.iter().map(|c| -c.clone()).collect();
        match self.minimize(&neg) {
            LpOutcome::Optimal { value, point } => LpOutcome::Optimal {
                value: -value,
                point,
            },
            other => other,
        }
    }

    pub fn minimize(&self, objective: &[Rational]) -> LpOutcome {
        assert_eq!(objective.len(), self.num_vars, "objective arity");
        let mut t = Tableau::build(self);
        // Phase 1: drive the artificial variables to zero.
        let mut phase1 = vec![Rational::zero(); t.width];
        for w in &mut phase1[t.artificial_start..] {
            *w = Rational::one();
        }
        let all = t.width;
        match t.optimize(&phase1, all) {
            Step::Optimal => {}
            Step::Unbounded => unreachable!("phase 1 is bounded below by zero"),
        }
        if !t.objective_value(&phase1).is_zero() {
            return LpOutcome::Infeasible;
        }
        t.evict_artificials();
        // Phase 2 on the original objective, artificials frozen out.
        let mut cost = vec![Rational::zero(); t.width];
        cost[..self.num_vars].clone_from_slice(objective);
        let limit = t.artificial_start;
        match t.optimize(&cost, limit) {
            Step::Unbounded => LpOutcome::Unbounded,
            Step::Optimal => {
                let point = t.point(self.num_vars);
                let value = objective
                    .iter()
                    .zip(&point)
                    .fold(Rational::zero(), |acc, (c, x)| acc + c * x);
                LpOutcome::Optimal { value, point }
            }
        }
    }
}

enum Step {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// `rows[i]` has `width` coefficients followed by the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
    artificial_start: usize,
}

impl Tableau {
    fn build(p: &Problem) -> Self {
        let n = p.num_vars;
        let num_slack = p
            .rows
            .iter()
            .filter(|r| r.relation != Relation::Eq)
            .count();
        let m = p.rows.len();
        let artificial_start = n + num_slack;
        let width = artificial_start + m;
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut slack = n;
        for (i, r) in p.rows.iter().enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            row[..n].clone_from_slice(&r.coeffs);
            match r.relation {
                Relation::Le => {
                    row[slack] = Rational::one();
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -Rational::one();
                    slack += 1;
                }
                Relation::Eq => {}
            }
            row[width] = r.rhs.clone();
            if row[width].is_negative() {
                for v in row.iter_mut() {
                    *v = -v.clone();
                }
            }
            row[artificial_start + i] = Rational::one();
            rows.push(row);
            basis.push(artificial_start + i);
        }
        Tableau {
            rows,
            basis,
            width,
            artificial_start,
        }
    }

    fn objective_value(&self, cost: &[Rational]) -> Rational {
        self.rows
            .iter()
            .zip(&self.basis)
            .fold(Rational::zero(), |acc, (row, &b)| {
                acc + &cost[b] * &row[self.width]
            })
    }

    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        let mut r = cost[j].clone();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if !row[j].is_zero() && !cost[b].is_zero() {
                r -= &cost[b] * &row[j];
            }
        }
        r
    }

    fn optimize(&mut self, cost: &[Rational], limit: usize) -> Step {
        loop {
            let entering = (0..limit)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.reduced_cost(cost, j).is_negative());
            let Some(j) = entering else {
                return Step::Optimal;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[j].is_positive() {
                    let ratio = &row[self.width] / &row[j];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => {
                            ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi])
                        }
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((i, _)) = best else {
                return Step::Unbounded;
            };
            self.pivot(i, j);
        }
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let p = self.rows[i][j].clone();
        for v in self.rows[i].iter_mut() {
            if !v.is_zero() {
                *v = &*v / &p;
            }
        }
        let pivot_row = self.rows[i].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == i || row[j].is_zero() {
                continue;
            }
            let factor = row[j].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &factor * pv;
                }
            }
        }
        self.basis[i] = j;
    }

    /// Pivots zero-valued artificials out of the basis; drops redundant rows.
    fn evict_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.artificial_start {
                match (0..self.artificial_start).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    fn point(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if b < n {
                x[b] = row[self.width].clone();
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn infeasible_system() {
        let mut p = Problem::new(1);
        p.push_int(&[1], Relation::Ge, 1);
        p.push_int(&[1], Relation::Le, 0);
        assert_eq!(p.feasible_point(), None);
    }

    #[test]
    fn fractional_optimum() {
        // min x s.t. 2x >= 1
        let mut p = Problem::new(1);
        p.push_int(&[2], Relation::Ge, 1);
        match p.minimize(&[rat(1)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(1, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_direction() {
        let mut p = Problem::new(2);
        p.push_int(&[1, -1], Relation::Ge, 0);
        assert_eq!(p.maximize(&[rat(1), rat(0)]), LpOutcome::Unbounded);
    }

    #[test]
    fn equality_with_negative_rhs() {
        // x - y = -3, maximize x subject to y <= 5  => x = 2
        let mut p = Problem::new(2);
        p.push_int(&[1, -1], Relation::Eq, -3);
        p.push_int(&[0, 1], Relation::Le, 5);
        match p.maximize(&[rat(1), rat(0)]) {
            LpOutcome::Optimal { value, point } => {
                assert_eq!(value, rat(2));
                assert_eq!(point, vec![rat(2), rat(5)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_equalities() {
        let mut p = Problem::new(2);
        p.push_int(&[1, 1], Relation::Eq, 4);
        p.push_int(&[2, 2], Relation::Eq, 8);
        match p.minimize(&[rat(1), rat(3)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(4)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycle_prone_problem_terminates() {
        // Beale's classic cycling example, made a minimization.
        let mut p = Problem::new(4);
        p.push(vec![r(1, 4), rat(-60), r(-1, 25), rat(9)], Relation::Le, rat(0));
        p.push(vec![r(1, 2), rat(-90), r(-1, 50), rat(3)], Relation::Le, rat(0));
        p.push(vec![rat(0), rat(0), rat(1), rat(0)], Relation::Le, rat(1));
        match p.minimize(&[r(-3, 4), rat(150), r(-1, 50), rat(6)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(-1, 20)),
            other => panic!("{other:?}"),
        }
    }
}

//! Dense two-phase simplex with Bland's anti-cycling rule.

use super::scalar::Scalar;
use super::{LinearSystem, LpError};

pub(crate) enum Solved<T> {
    Optimal { point: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

struct Tableau<T> {
    a: Vec<Vec<T>>,
    rhs: Vec<T>,
    basis: Vec<usize>,
    num_cols: usize,
    /// Columns at or beyond this index are artificial.
    first_artificial: usize,
    pivots: usize,
    pivot_cap: usize,
}

enum Step {
    Optimal,
    Unbounded,
}

impl<T: Scalar> Tableau<T> {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.a[row][col].clone();
        for v in self.a[row].iter_mut() {
            *v = v.div(&p);
        }
        self.rhs[row] = self.rhs[row].div(&p);
        for k in 0..self.a.len() {
            if k == row {
                continue;
            }
            let factor = self.a[k][col].clone();
            if factor == T::zero() {
                continue;
            }
            for j in 0..self.num_cols {
                let delta = factor.mul(&self.a[row][j]);
                self.a[k][j] = self.a[k][j].sub(&delta);
            }
            let delta = factor.mul(&self.rhs[row]);
            self.rhs[k] = self.rhs[k].sub(&delta);
        }
        self.basis[row] = col;
    }

    fn reduced_cost(&self, cost: &[T], col: usize) -> T {
        let mut d = cost[col].clone();
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b] != T::zero() && self.a[i][col] != T::zero() {
                d = d.sub(&cost[b].mul(&self.a[i][col]));
            }
        }
        d
    }

    fn objective(&self, cost: &[T]) -> T {
        self.basis
            .iter()
            .zip(&self.rhs)
            .fold(T::zero(), |acc, (&b, r)| acc.add(&cost[b].mul(r)))
    }

    /// Minimize `cost` over the current basis, never entering columns at or
    /// beyond `col_limit`.
    fn run(&mut self, cost: &[T], col_limit: usize) -> Result<Step, LpError> {
        loop {
            let entering = (0..col_limit)
                .filter(|j| !self.basis.contains(j))
                .find(|&j| self.reduced_cost(cost, j).is_negative());
            let Some(col) = entering else {
                return Ok(Step::Optimal);
            };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..self.a.len() {
                if !self.a[i][col].is_positive() {
                    continue;
                }
                let ratio = self.rhs[i].div(&self.a[i][col]);
                let better = match &leave {
                    None => true,
                    Some((r, best)) => ratio.lt(best) || (ratio == *best && self.basis[i] < self.basis[*r]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return Ok(Step::Unbounded);
            };
            self.pivots += 1;
            if self.pivots > self.pivot_cap {
                return Err(LpError::CyclingGuard { pivots: self.pivots });
            }
            self.pivot(row, col);
        }
    }
}

/// Solve `min objective·v` over the system (pure feasibility when `None`).
pub(crate) fn solve<T: Scalar>(sys: &LinearSystem<T>, objective: Option<&[T]>) -> Result<Solved<T>, LpError> {
    let d = sys.num_vars();
    // Column layout: one column per nonnegative variable, a +/- pair per
    // free variable, then one slack per inequality, then artificials.
    let mut var_cols = Vec::with_capacity(d);
    let mut next = 0;
    for i in 0..d {
        if sys.is_nonneg(i) {
            var_cols.push((next, None));
            next += 1;
        } else {
            var_cols.push((next, Some(next + 1)));
            next += 2;
        }
    }
    let first_slack = next;
    let num_ineq = sys.inequalities().len();
    let num_rows = sys.equalities().len() + num_ineq;
    let first_artificial = first_slack + num_ineq;

    let mut rows: Vec<Vec<T>> = Vec::with_capacity(num_rows);
    let mut rhs = Vec::with_capacity(num_rows);
    let mut slack_basic: Vec<Option<usize>> = Vec::with_capacity(num_rows);
    let all_rows = sys.equalities().iter().map(|r| (r, None)).chain(
        sys.inequalities()
            .iter()
            .enumerate()
            .map(|(k, r)| (r, Some(first_slack + k))),
    );
    for ((coeffs, b), slack) in all_rows {
        let mut row = vec![T::zero(); first_artificial];
        for (i, c) in coeffs.iter().enumerate() {
            let (pos, neg) = var_cols[i];
            row[pos] = c.clone();
            if let Some(neg) = neg {
                row[neg] = c.neg();
            }
        }
        if let Some(s) = slack {
            row[s] = T::one();
        }
        let flip = b.is_negative();
        if flip {
            for v in row.iter_mut() {
                *v = v.neg();
            }
        }
        rhs.push(if flip { b.neg() } else { b.clone() });
        slack_basic.push(if flip { None } else { slack });
        rows.push(row);
    }

    let num_art = slack_basic.iter().filter(|s| s.is_none()).count();
    let num_cols = first_artificial + num_art;
    let mut basis = Vec::with_capacity(num_rows);
    let mut art = first_artificial;
    for (row, slack) in rows.iter_mut().zip(&slack_basic) {
        row.resize(num_cols, T::zero());
        match slack {
            Some(s) => basis.push(*s),
            None => {
                row[art] = T::one();
                basis.push(art);
                art += 1;
            }
        }
    }

    let mut tab = Tableau {
        a: rows,
        rhs,
        basis,
        num_cols,
        first_artificial,
        pivots: 0,
        pivot_cap: 10 * (num_rows + num_cols),
    };

    if num_art > 0 {
        let mut phase_one = vec![T::zero(); num_cols];
        for c in phase_one.iter_mut().skip(first_artificial) {
            *c = T::one();
        }
        tab.run(&phase_one, num_cols)?;
        let infeasibility = tab.objective(&phase_one);
        if T::infeasibility_threshold().lt(&infeasibility) {
            return Ok(Solved::Infeasible);
        }
        drive_out_artificials(&mut tab);
    }

    let Some(objective) = objective else {
        let point = extract(&tab, &var_cols);
        return Ok(Solved::Optimal {
            point,
            value: T::zero(),
        });
    };
    let mut cost = vec![T::zero(); num_cols];
    for (i, c) in objective.iter().enumerate() {
        let (pos, neg) = var_cols[i];
        cost[pos] = c.clone();
        if let Some(neg) = neg {
            cost[neg] = c.neg();
        }
    }
    tab.pivot_cap = tab.pivots + 10 * (tab.a.len() + num_cols);
    match tab.run(&cost, tab.first_artificial)? {
        Step::Unbounded => Ok(Solved::Unbounded),
        Step::Optimal => {
            let value = tab.objective(&cost);
            Ok(Solved::Optimal {
                point: extract(&tab, &var_cols),
                value,
            })
        }
    }
}

/// Pivot zero-level artificials out of the basis; rows where that is
/// impossible are linearly dependent and are dropped.
fn drive_out_artificials<T: Scalar>(tab: &mut Tableau<T>) {
    let mut i = 0;
    while i < tab.a.len() {
        if tab.basis[i] < tab.first_artificial {
            i += 1;
            continue;
        }
        let col = (0..tab.first_artificial).find(|&j| !tab.a[i][j].is_zero());
        match col {
            Some(j) => {
                tab.pivot(i, j);
                i += 1;
            }
            None => {
                tab.a.remove(i);
                tab.rhs.remove(i);
                tab.basis.remove(i);
            }
        }
    }
}

fn extract<T: Scalar>(tab: &Tableau<T>, var_cols: &[(usize, Option<usize>)]) -> Vec<T> {
    let value = |col: usize| -> T {
        tab.basis
            .iter()
            .position(|&b| b == col)
            .map(|i| tab.rhs[i].clone())
            .unwrap_or_else(T::zero)
    };
    var_cols
        .iter()
        .map(|&(pos, neg)| match neg {
            Some(neg) => value(pos).sub(&value(neg)),
            None => value(pos),
        })
        .collect()
}

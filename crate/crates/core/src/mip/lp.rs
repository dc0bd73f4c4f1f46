//! Exact linear feasibility by phase-one simplex over rationals.

use super::Sense;
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpRow {
    pub coefs: Vec<(usize, Rat)>,
    pub sense: Sense,
    pub rhs: Rat,
}

/// Continuous variables `0..lower.len()` with optional bounds, plus rows.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LpProblem {
    pub lower: Vec<Option<Rat>>,
    pub upper: Vec<Option<Rat>>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn with_vars(n: usize) -> Self {
        LpProblem {
            lower: vec![None; n],
            upper: vec![None; n],
            rows: Vec::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.lower.len()
    }

    pub fn add_row(&mut self, coefs: Vec<(usize, Rat)>, sense: Sense, rhs: Rat) {
        self.rows.push(LpRow { coefs, sense, rhs });
    }

    pub fn is_satisfied_by(&self, x: &[Rat]) -> bool {
        let bounds_ok = x.iter().enumerate().all(|(j, v)| {
            self.lower[j].as_ref().is_none_or(|lo| v >= lo) && self.upper[j].as_ref().is_none_or(|hi| v <= hi)
        });
        bounds_ok
            && self.rows.iter().all(|r| {
                let act: Rat = r.coefs.iter().map(|(j, c)| c * &x[*j]).sum();
                r.sense.holds(&act, &r.rhs)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpOutcome {
    Feasible(Vec<Rat>),
    Infeasible,
}

/// How an original variable is rebuilt from nonnegative tableau columns.
struct Substitution {
    offset: Rat,
    columns: Vec<(usize, bool)>,
}

/// Decides feasibility exactly and returns a witness point.
pub fn lp_feasible(problem: &LpProblem) -> LpOutcome {
    let n = problem.vars();
    for j in 0..n {
        if let (Some(lo), Some(hi)) = (&problem.lower[j], &problem.upper[j]) {
            if lo > hi {
                return LpOutcome::Infeasible;
            }
        }
    }

    // x_j = offset + sum(+-col); every column is >= 0
    let mut subs = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut eq_rows: Vec<StdRow> = Vec::new();
    for j in 0..n {
        let sub = match (&problem.lower[j], &problem.upper[j]) {
            (Some(lo), Some(hi)) if lo == hi => Substitution {
                offset: lo.clone(),
                columns: vec![],
            },
            (Some(lo), hi) => {
                let col = ncols;
                ncols += 1;
                if let Some(hi) = hi {
                    eq_rows.push((vec![(col, Rat::one())], Sense::Le, hi - lo));
                }
                Substitution {
                    offset: lo.clone(),
                    columns: vec![(col, true)],
                }
            }
            (None, Some(hi)) => {
                let col = ncols;
                ncols += 1;
                Substitution {
                    offset: hi.clone(),
                    columns: vec![(col, false)],
                }
            }
            (None, None) => {
                ncols += 2;
                Substitution {
                    offset: Rat::zero(),
                    columns: vec![(ncols - 2, true), (ncols - 1, false)],
                }
            }
        };
        subs.push(sub);
    }

    for row in &problem.rows {
        let mut rhs = row.rhs.clone();
        let mut dense: Vec<Rat> = vec![Rat::zero(); ncols];
        for (j, c) in &row.coefs {
            if c.is_zero() {
                continue;
            }
            let sub = &subs[*j];
            if !sub.offset.is_zero() {
                rhs -= c * &sub.offset;
            }
            for &(col, positive) in &sub.columns {
                if positive {
                    dense[col] += c;
                } else {
                    dense[col] -= c;
                }
            }
        }
        let coefs: Vec<(usize, Rat)> = dense.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
        if coefs.is_empty() {
            if !row.sense.holds(&Rat::zero(), &rhs) {
                return LpOutcome::Infeasible;
            }
            continue;
        }
        eq_rows.push((coefs, row.sense, rhs));
    }

    let cols = match phase_one(ncols, eq_rows) {
        Some(cols) => cols,
        None => return LpOutcome::Infeasible,
    };
    let x = subs
        .iter()
        .map(|s| {
            let mut v = s.offset.clone();
            for &(col, positive) in &s.columns {
                if positive {
                    v += &cols[col];
                } else {
                    v -= &cols[col];
                }
            }
            v
        })
        .collect();
    LpOutcome::Feasible(x)
}

/// Finds `x >= 0` satisfying all rows, or `None`.
/// Sparse row over nonnegative columns: coefficients, sense, right-hand side.
type StdRow = (Vec<(usize, Rat)>, Sense, Rat);

fn phase_one(ncols: usize, rows: Vec<StdRow>) -> Option<Vec<Rat>> {
    let m = rows.len();
    if m == 0 {
        return Some(vec![Rat::zero(); ncols]);
    }
    let slack_count = rows.iter().filter(|(_, s, _)| *s != Sense::Eq).count();
    // layout: [structural | slacks | artificials | rhs]
    let slack_base = ncols;
    let art_base = ncols + slack_count;
    let mut art_count = 0;
    let mut layout = Vec::with_capacity(m);
    let mut next_slack = slack_base;
    for (_, sense, rhs) in &rows {
        let slack = match sense {
            Sense::Eq => None,
            Sense::Le => {
                next_slack += 1;
                Some((next_slack - 1, true))
            }
            Sense::Ge => {
                next_slack += 1;
                Some((next_slack - 1, false))
            }
        };
        // after making rhs >= 0, a +1 slack can start in the basis
        let negate = rhs.is_negative();
        let slack_is_basic = matches!(slack, Some((_, positive)) if positive != negate);
        if !slack_is_basic {
            art_count += 1;
        }
        layout.push((slack, negate, slack_is_basic));
    }
    let width = art_base + art_count + 1;
    let rhs_col = width - 1;
    let mut tab: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = art_base;
    for ((coefs, _, rhs), (slack, negate, slack_is_basic)) in rows.into_iter().zip(layout) {
        let mut row = vec![Rat::zero(); width];
        for (j, c) in coefs {
            row[j] = if negate { -c } else { c };
        }
        if let Some((col, positive)) = slack {
            row[col] = if positive != negate { Rat::one() } else { -Rat::one() };
        }
        row[rhs_col] = if negate { -rhs } else { rhs };
        if slack_is_basic {
            basis.push(slack.expect("basic slack").0);
        } else {
            row[next_art] = Rat::one();
            basis.push(next_art);
            next_art += 1;
        }
        tab.push(row);
    }

    // objective: minimize the sum of artificials, priced out in nonbasic terms
    let mut obj = vec![Rat::zero(); width];
    for (r, &b) in basis.iter().enumerate() {
        if b >= art_base {
            for (o, t) in obj.iter_mut().zip(&tab[r]) {
                *o += t;
            }
        }
    }
    for o in obj.iter_mut().take(rhs_col).skip(art_base) {
        *o = Rat::zero();
    }

    loop {
        if obj[rhs_col].is_zero() {
            break;
        }
        // Bland's rule: lowest-index improving column
        let Some(enter) = (0..art_base).find(|&j| obj[j].is_positive()) else {
            break;
        };
        let mut leave: Option<(usize, Rat)> = None;
        for (r, row) in tab.iter().enumerate() {
            let a = &row[enter];
            if !a.is_positive() {
                continue;
            }
            let ratio = &row[rhs_col] / a;
            let better = match &leave {
                None => true,
                Some((lr, best)) => ratio < *best || (ratio == *best && basis[r] < basis[*lr]),
            };
            if better {
                leave = Some((r, ratio));
            }
        }
        let (pr, _) = leave.expect("phase one objective is bounded below");
        pivot(&mut tab, &mut obj, pr, enter);
        basis[pr] = enter;
    }

    if !obj[rhs_col].is_zero() {
        return None;
    }
    let mut x = vec![Rat::zero(); ncols];
    for (r, &b) in basis.iter().enumerate() {
        if b < ncols {
            x[b] = tab[r][rhs_col].clone();
        }
    }
    Some(x)
}

fn pivot(tab: &mut [Vec<Rat>], obj: &mut [Rat], pr: usize, pc: usize) {
    let inv = tab[pr][pc].recip();
    if inv != Rat::one() {
        for v in tab[pr].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
    }
    let pivot_row = tab[pr].clone();
    let nz: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
    let eliminate = |row: &mut [Rat]| {
        let f = row[pc].clone();
        if f.is_zero() {
            return;
        }
        for &j in &nz {
            let delta = &f * &pivot_row[j];
            row[j] -= delta;
        }
    };
    for (r, row) in tab.iter_mut().enumerate() {
        if r != pr {
            eliminate(row);
        }
    }
    eliminate(obj);
}

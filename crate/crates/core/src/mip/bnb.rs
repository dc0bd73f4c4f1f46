//! Depth-first branch-and-bound over binary variables.
//!
//! Each node propagates bounds through the rows it touches, splits the
//! remaining free variables into independent components (solved one after
//! the other, so ties in unrelated blocks do not multiply), and hands
//! binary-free components to the exact simplex. Bounds live in one shared
//! array restored from a trail on backtrack.

use std::collections::VecDeque;

use super::lp::{lp_feasible, LpOutcome, LpProblem};
use super::{MipError, MipProblem, MipSolution, Sense, SolverConfig, VarId, VarKind};
use crate::rational::Rat;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub nodes: u64,
    pub lp_calls: u64,
}

struct Row {
    terms: Vec<(usize, Rat)>,
    sense: Sense,
    rhs: Rat,
}

type Trail = Vec<(usize, Option<Rat>, Option<Rat>)>;

struct Search<'a> {
    config: &'a SolverConfig,
    rows: Vec<Row>,
    var_rows: Vec<Vec<usize>>,
    binary: Vec<bool>,
    priority: Vec<u32>,
    lo: Vec<Option<Rat>>,
    hi: Vec<Option<Rat>>,
    trail: Trail,
    values: Vec<Option<Rat>>,
    in_queue: Vec<bool>,
    stats: SolveStats,
    node_base: u64,
}

enum Bound {
    Lower(Rat),
    Upper(Rat),
}

impl<'a> Search<'a> {
    fn new(problem: &MipProblem, config: &'a SolverConfig) -> Self {
        let n = problem.vars().len();
        let mut var_rows = vec![Vec::new(); n];
        let rows: Vec<Row> = problem
            .constraints()
            .iter()
            .enumerate()
            .map(|(r, c)| {
                for (_, v) in &c.terms {
                    var_rows[v.index()].push(r);
                }
                Row {
                    terms: c.terms.iter().map(|(coef, v)| (v.index(), coef.clone())).collect(),
                    sense: c.sense,
                    rhs: c.rhs.clone(),
                }
            })
            .collect();
        let in_queue = vec![false; rows.len()];
        Search {
            config,
            rows,
            var_rows,
            binary: problem.vars().iter().map(|v| v.kind == VarKind::Binary).collect(),
            priority: problem.vars().iter().map(|v| v.priority).collect(),
            lo: problem.vars().iter().map(|v| v.lower.clone()).collect(),
            hi: problem.vars().iter().map(|v| v.upper.clone()).collect(),
            trail: Vec::new(),
            values: vec![None; n],
            in_queue,
            stats: SolveStats::default(),
            node_base: 0,
        }
    }

    fn is_fixed(&self, v: usize) -> bool {
        matches!((&self.lo[v], &self.hi[v]), (Some(a), Some(b)) if a == b)
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let (v, lo, hi) = self.trail.pop().expect("trail entry");
            self.lo[v] = lo;
            self.hi[v] = hi;
        }
    }

    fn save(&mut self, v: usize) {
        self.trail.push((v, self.lo[v].clone(), self.hi[v].clone()));
    }

    /// Continuous bounds are only refined while they stay inline: chains of
    /// ever-finer refinements otherwise grow the numbers without bound.
    fn keeps_small(&self, v: usize, bound: &Rat) -> bool {
        self.binary[v] || bound.is_inline()
    }

    /// Applies a derived bound. `Err` on an empty domain, `Ok(true)` if it tightened.
    fn tighten(&mut self, v: usize, bound: Bound) -> Result<bool, ()> {
        let changed = match bound {
            Bound::Upper(mut u) => {
                if self.binary[v] {
                    u = u.floor();
                }
                if self.hi[v].as_ref().is_none_or(|h| u < *h && self.keeps_small(v, &u)) {
                    self.save(v);
                    self.hi[v] = Some(u);
                    true
                } else {
                    false
                }
            }
            Bound::Lower(mut l) => {
                if self.binary[v] {
                    l = l.ceil();
                }
                if self.lo[v].as_ref().is_none_or(|lo| l > *lo && self.keeps_small(v, &l)) {
                    self.save(v);
                    self.lo[v] = Some(l);
                    true
                } else {
                    false
                }
            }
        };
        if let (Some(a), Some(b)) = (&self.lo[v], &self.hi[v]) {
            if a > b {
                return Err(());
            }
        }
        Ok(changed)
    }

    /// Activity extremes of a row as (finite part, infinite count, last infinite term).
    fn activity(&self, r: usize, want_max: bool) -> (Rat, usize, usize, Vec<Option<Rat>>) {
        let row = &self.rows[r];
        let mut finite = Rat::zero();
        let mut inf = 0;
        let mut inf_at = usize::MAX;
        let mut parts = Vec::with_capacity(row.terms.len());
        for (idx, (v, c)) in row.terms.iter().enumerate() {
            let use_upper = c.is_positive() == want_max;
            let b = if use_upper { &self.hi[*v] } else { &self.lo[*v] };
            match b {
                Some(b) => {
                    let x = c * b;
                    finite += &x;
                    parts.push(Some(x));
                }
                None => {
                    inf += 1;
                    inf_at = idx;
                    parts.push(None);
                }
            }
        }
        (finite, inf, inf_at, parts)
    }

    fn propagate_row(&mut self, r: usize, changed: &mut Vec<usize>) -> Result<(), ()> {
        let sense = self.rows[r].sense;
        let rhs = self.rows[r].rhs.clone();
        let upper_side = matches!(sense, Sense::Le | Sense::Eq);
        let lower_side = matches!(sense, Sense::Ge | Sense::Eq);
        let min = upper_side.then(|| self.activity(r, false));
        let max = lower_side.then(|| self.activity(r, true));
        if let Some((fin, 0, _, _)) = &min {
            if *fin > rhs {
                return Err(());
            }
        }
        if let Some((fin, 0, _, _)) = &max {
            if *fin < rhs {
                return Err(());
            }
        }
        let others = |act: &Option<(Rat, usize, usize, Vec<Option<Rat>>)>, idx: usize| -> Option<Rat> {
            let (fin, inf, inf_at, parts) = act.as_ref()?;
            match (*inf, &parts[idx]) {
                (0, Some(x)) => Some(fin - x),
                (1, None) if *inf_at == idx => Some(fin.clone()),
                _ => None,
            }
        };
        let n = self.rows[r].terms.len();
        for idx in 0..n {
            let (v, c) = {
                let (v, c) = &self.rows[r].terms[idx];
                (*v, c.clone())
            };
            if self.is_fixed(v) {
                continue;
            }
            let mut derived = Vec::with_capacity(2);
            if let Some(rest) = others(&min, idx) {
                // c x <= rhs - rest
                let b = (&rhs - rest) / &c;
                derived.push(if c.is_positive() {
                    Bound::Upper(b)
                } else {
                    Bound::Lower(b)
                });
            }
            if let Some(rest) = others(&max, idx) {
                // c x >= rhs - rest
                let b = (&rhs - rest) / &c;
                derived.push(if c.is_positive() {
                    Bound::Lower(b)
                } else {
                    Bound::Upper(b)
                });
            }
            for b in derived {
                if self.tighten(v, b)? {
                    changed.push(v);
                }
            }
        }
        Ok(())
    }

    fn propagate(&mut self, seeds: impl IntoIterator<Item = usize>) -> bool {
        let mut queue = VecDeque::new();
        for r in seeds {
            if !self.in_queue[r] {
                self.in_queue[r] = true;
                queue.push_back(r);
            }
        }
        let mut budget = 64 * queue.len() + 4096;
        let mut changed = Vec::new();
        let mut ok = true;
        while let Some(r) = queue.pop_front() {
            self.in_queue[r] = false;
            if budget == 0 {
                continue;
            }
            budget -= 1;
            changed.clear();
            if self.propagate_row(r, &mut changed).is_err() {
                ok = false;
                break;
            }
            for &v in &changed {
                for &r2 in &self.var_rows[v] {
                    if !self.in_queue[r2] {
                        self.in_queue[r2] = true;
                        queue.push_back(r2);
                    }
                }
            }
        }
        for r in queue {
            self.in_queue[r] = false;
        }
        ok
    }

    fn row_value_if_fixed(&self, r: usize) -> Option<Rat> {
        let mut total = Rat::zero();
        for (v, c) in &self.rows[r].terms {
            if !self.is_fixed(*v) {
                return None;
            }
            total += c * self.lo[*v].as_ref().expect("fixed");
        }
        Some(total)
    }

    /// Splits free variables into independent blocks. `None` if a fully fixed row fails.
    fn components(&self, vars: &[usize], rows: &[usize]) -> Option<Vec<(Vec<usize>, Vec<usize>)>> {
        let free: Vec<usize> = vars.iter().copied().filter(|&v| !self.is_fixed(v)).collect();
        let mut slot = std::collections::HashMap::with_capacity(free.len());
        for (i, &v) in free.iter().enumerate() {
            slot.insert(v, i);
        }
        let mut parent: Vec<usize> = (0..free.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut row_anchor = Vec::with_capacity(rows.len());
        for &r in rows {
            let mut anchor: Option<usize> = None;
            for (v, _) in &self.rows[r].terms {
                if let Some(&s) = slot.get(v) {
                    match anchor {
                        None => anchor = Some(s),
                        Some(a) => {
                            let (ra, rs) = (find(&mut parent, a), find(&mut parent, s));
                            if ra != rs {
                                parent[rs] = ra;
                            }
                        }
                    }
                }
            }
            match anchor {
                Some(a) => row_anchor.push((r, a)),
                None => {
                    let value = self.row_value_if_fixed(r).expect("row without free variables");
                    if !self.rows[r].sense.holds(&value, &self.rows[r].rhs) {
                        return None;
                    }
                }
            }
        }
        let mut comp_of_root = std::collections::HashMap::new();
        let mut comps: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for (i, &v) in free.iter().enumerate() {
            let root = find(&mut parent, i);
            let c = *comp_of_root.entry(root).or_insert_with(|| {
                comps.push((Vec::new(), Vec::new()));
                comps.len() - 1
            });
            comps[c].0.push(v);
        }
        for (r, a) in row_anchor {
            let root = find(&mut parent, a);
            comps[comp_of_root[&root]].1.push(r);
        }
        Some(comps)
    }

    /// LP over the free variables of `vars` (binaries relaxed to their bounds).
    fn solve_lp(&mut self, vars: &[usize], rows: &[usize]) -> Option<Vec<(usize, Rat)>> {
        self.stats.lp_calls += 1;
        let free: Vec<usize> = vars.iter().copied().filter(|&v| !self.is_fixed(v)).collect();
        let mut local = std::collections::HashMap::with_capacity(free.len());
        let mut lp = LpProblem::with_vars(free.len());
        for (i, &v) in free.iter().enumerate() {
            local.insert(v, i);
            lp.lower[i] = self.lo[v].clone();
            lp.upper[i] = self.hi[v].clone();
        }
        for &r in rows {
            let row = &self.rows[r];
            let mut rhs = row.rhs.clone();
            let mut coefs = Vec::with_capacity(row.terms.len());
            for (v, c) in &row.terms {
                match local.get(v) {
                    Some(&i) => coefs.push((i, c.clone())),
                    None => rhs -= c * self.lo[*v].as_ref().expect("fixed variable"),
                }
            }
            if self.row_is_redundant(&coefs, &free, row.sense, &rhs) {
                continue;
            }
            lp.add_row(coefs, row.sense, rhs);
        }
        match lp_feasible(&lp) {
            LpOutcome::Feasible(x) => Some(free.into_iter().zip(x).collect()),
            LpOutcome::Infeasible => None,
        }
    }

    fn row_is_redundant(&self, coefs: &[(usize, Rat)], free: &[usize], sense: Sense, rhs: &Rat) -> bool {
        let extreme = |want_max: bool| -> Option<Rat> {
            let mut total = Rat::zero();
            for (i, c) in coefs {
                let v = free[*i];
                let b = if c.is_positive() == want_max {
                    &self.hi[v]
                } else {
                    &self.lo[v]
                };
                total += c * b.as_ref()?;
            }
            Some(total)
        };
        match sense {
            Sense::Le => extreme(true).is_some_and(|m| m <= *rhs),
            Sense::Ge => extreme(false).is_some_and(|m| m >= *rhs),
            Sense::Eq => false,
        }
    }

    fn search(&mut self, vars: &[usize], rows: &[usize], seeds: Vec<usize>) -> Result<bool, MipError> {
        self.stats.nodes += 1;
        if self.stats.nodes - self.node_base > self.config.node_budget {
            return Err(MipError::NodeBudgetExceeded {
                budget: self.config.node_budget,
            });
        }
        let mark = self.trail.len();
        if !self.propagate(seeds) {
            self.undo(mark);
            return Ok(false);
        }
        let Some(comps) = self.components(vars, rows) else {
            self.undo(mark);
            return Ok(false);
        };
        if comps.len() > 1 {
            for (cv, cr) in comps {
                if !self.search(&cv, &cr, Vec::new())? {
                    self.undo(mark);
                    return Ok(false);
                }
            }
            return Ok(true);
        }
        let Some((vars, rows)) = comps.into_iter().next() else {
            return Ok(true);
        };

        let branch_var = vars
            .iter()
            .copied()
            .filter(|&v| self.binary[v])
            .min_by_key(|&v| (self.priority[v], v));
        let Some(branch_var) = branch_var else {
            return match self.solve_lp(&vars, &rows) {
                Some(point) => {
                    for (v, x) in point {
                        self.values[v] = Some(x);
                    }
                    Ok(true)
                }
                None => {
                    self.undo(mark);
                    Ok(false)
                }
            };
        };

        let mut prefer_one = false;
        if self.config.lp_relaxation {
            match self.solve_lp(&vars, &rows) {
                None => {
                    self.undo(mark);
                    return Ok(false);
                }
                Some(point) => {
                    let integral = point
                        .iter()
                        .all(|(v, x)| !self.binary[*v] || x.is_zero() || *x == Rat::one());
                    if integral {
                        for (v, x) in point {
                            self.values[v] = Some(x);
                        }
                        return Ok(true);
                    }
                    prefer_one = point
                        .iter()
                        .find(|(v, _)| *v == branch_var)
                        .is_some_and(|(_, x)| *x >= Rat::new(1, 2));
                }
            }
        }

        let order = if prefer_one {
            [Rat::one(), Rat::zero()]
        } else {
            [Rat::zero(), Rat::one()]
        };
        for value in order {
            let child = self.trail.len();
            self.save(branch_var);
            self.lo[branch_var] = Some(value.clone());
            self.hi[branch_var] = Some(value);
            let seeds = self.var_rows[branch_var].clone();
            if self.search(&vars, &rows, seeds)? {
                return Ok(true);
            }
            self.undo(child);
        }
        self.undo(mark);
        Ok(false)
    }

    fn extract(&self) -> MipSolution {
        let values = (0..self.lo.len())
            .map(|v| {
                if self.is_fixed(v) {
                    self.lo[v].clone().expect("fixed")
                } else {
                    self.values[v].clone().expect("free variable solved by a leaf LP")
                }
            })
            .collect();
        MipSolution::new(values)
    }
}

/// Finds an exact witness, or `Ok(None)` when the problem is infeasible.
pub fn solve_feasibility(problem: &MipProblem, config: &SolverConfig) -> Result<Option<MipSolution>, MipError> {
    solve_with_stats(problem, config).map(|(s, _)| s)
}

pub fn solve_with_stats(
    problem: &MipProblem,
    config: &SolverConfig,
) -> Result<(Option<MipSolution>, SolveStats), MipError> {
    problem.validate()?;
    let mut search = Search::new(problem, config);
    let vars: Vec<usize> = (0..problem.vars().len()).collect();
    let rows: Vec<usize> = (0..problem.constraints().len()).collect();
    let found = search.search(&vars, &rows, rows.clone())?;
    if !found {
        return Ok((None, search.stats));
    }
    let solution = search.extract();
    if let Err(v) = problem.check(&solution) {
        return Err(MipError::SolutionCheckFailed { label: v.label });
    }
    Ok((Some(solution), search.stats))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    /// Distinct 0/1 patterns over the projection, in discovery order.
    pub patterns: Vec<Vec<bool>>,
    /// Stopped because `cap` patterns were found; more may exist.
    pub cap_reached: bool,
}

/// Lists distinct projected patterns.
///
/// One depth-first pass over the projection variables: every node first runs a
/// full feasibility search under its partial assignment (pruning empty subtrees
/// and suggesting which branch to take first), and each leaf with all projection
/// variables fixed yields one pattern. Visited subtrees are never re-entered, so
/// the result equals repeated solving with a no-good cut per found pattern.
pub fn enumerate_solutions(
    problem: &MipProblem,
    projection: &[VarId],
    cap: usize,
    config: &SolverConfig,
) -> Result<Enumeration, MipError> {
    problem.validate()?;
    for v in projection {
        if problem.var(*v).kind != VarKind::Binary {
            return Err(MipError::ProjectionNotBinary {
                name: problem.var(*v).name.clone(),
            });
        }
    }
    let mut patterns = Vec::new();
    if cap > 0 {
        let mut search = Search::new(problem, config);
        let vars: Vec<usize> = (0..problem.vars().len()).collect();
        let rows: Vec<usize> = (0..problem.constraints().len()).collect();
        let proj: Vec<usize> = projection.iter().map(|v| v.index()).collect();
        search.enumerate(&proj, &vars, &rows, rows.clone(), cap, &mut patterns)?;
    }
    let cap_reached = patterns.len() >= cap;
    Ok(Enumeration { patterns, cap_reached })
}

impl Search<'_> {
    fn value_is_one(&self, v: usize) -> bool {
        let x = if self.is_fixed(v) { &self.lo[v] } else { &self.values[v] };
        x.as_ref().is_some_and(|x| *x == Rat::one())
    }

    fn enumerate(
        &mut self,
        proj: &[usize],
        vars: &[usize],
        rows: &[usize],
        seeds: Vec<usize>,
        cap: usize,
        out: &mut Vec<Vec<bool>>,
    ) -> Result<(), MipError> {
        let mark = self.trail.len();
        self.node_base = self.stats.nodes;
        if !self.search(vars, rows, seeds.clone())? {
            self.undo(mark);
            return Ok(());
        }
        let hint: Vec<bool> = proj.iter().map(|&v| self.value_is_one(v)).collect();
        self.undo(mark);
        let consistent = self.propagate(seeds);
        debug_assert!(consistent, "propagation refuted a node the search solved");
        match proj.iter().position(|&v| !self.is_fixed(v)) {
            None => out.push(proj.iter().map(|&v| self.value_is_one(v)).collect()),
            Some(k) => {
                let v = proj[k];
                for bit in [hint[k], !hint[k]] {
                    if out.len() >= cap {
                        break;
                    }
                    let child = self.trail.len();
                    let value = if bit { Rat::one() } else { Rat::zero() };
                    if self.tighten(v, Bound::Lower(value.clone())).is_ok()
                        && self.tighten(v, Bound::Upper(value)).is_ok()
                    {
                        let seeds = self.var_rows[v].clone();
                        self.enumerate(proj, vars, rows, seeds, cap, out)?;
                    }
                    self.undo(child);
                }
            }
        }
        self.undo(mark);
        Ok(())
    }
}

//! Exact mixed-integer linear feasibility.
//!
//! Problems have binary and continuous variables and linear rows with
//! rational coefficients. There is no objective. [`solve_feasibility`] runs a
//! depth-first branch-and-bound with bound propagation, independent-component
//! splitting and an exact simplex for the continuous part;
//! [`enumerate_solutions`] lists distinct binary patterns over a projection.

mod bnb;
pub mod lp;

use std::fmt::{self, Write as _};

use crate::rational::Rat;

pub use bnb::{enumerate_solutions, solve_feasibility, solve_with_stats, Enumeration, SolveStats};
pub use lp::{lp_feasible, LpOutcome, LpProblem, LpRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MipVar {
    pub kind: VarKind,
    /// `None` is unbounded.
    pub lower: Option<Rat>,
    pub upper: Option<Rat>,
    pub name: String,
    /// Lower values are branched on first.
    pub priority: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

impl Sense {
    pub fn holds(self, lhs: &Rat, rhs: &Rat) -> bool {
        match self {
            Sense::Le => lhs <= rhs,
            Sense::Ge => lhs >= rhs,
            Sense::Eq => lhs == rhs,
        }
    }
}

/// Affine expression `sum coef * var + constant`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinExpr {
    terms: Vec<(Rat, VarId)>,
    constant: Rat,
}

impl LinExpr {
    pub fn new() -> Self {
        LinExpr::default()
    }

    pub fn constant(c: Rat) -> Self {
        LinExpr {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn var(v: VarId) -> Self {
        LinExpr::term(Rat::one(), v)
    }

    pub fn term(coef: Rat, v: VarId) -> Self {
        LinExpr {
            terms: vec![(coef, v)],
            constant: Rat::zero(),
        }
    }

    pub fn add_term(&mut self, coef: Rat, v: VarId) -> &mut Self {
        self.terms.push((coef, v));
        self
    }

    pub fn add_constant(&mut self, c: &Rat) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self.constant += &other.constant;
        self
    }

    pub fn minus(self, other: &LinExpr) -> Self {
        self.plus(&other.scaled(&-Rat::one()))
    }

    pub fn scaled(&self, c: &Rat) -> Self {
        LinExpr {
            terms: self.terms.iter().map(|(a, v)| (a * c, *v)).collect(),
            constant: &self.constant * c,
        }
    }

    pub fn constant_part(&self) -> &Rat {
        &self.constant
    }

    /// Merged, zero-free terms sorted by variable.
    pub fn normalized_terms(&self) -> Vec<(Rat, VarId)> {
        let mut terms = self.terms.clone();
        terms.sort_by_key(|(_, v)| *v);
        let mut out: Vec<(Rat, VarId)> = Vec::with_capacity(terms.len());
        for (c, v) in terms {
            match out.last_mut() {
                Some((acc, last)) if *last == v => *acc += c,
                _ => out.push((c, v)),
            }
        }
        out.retain(|(c, _)| !c.is_zero());
        out
    }

    pub fn evaluate(&self, values: &[Rat]) -> Rat {
        self.terms.iter().map(|(c, v)| c * &values[v.0]).sum::<Rat>() + &self.constant
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinConstraint {
    pub terms: Vec<(Rat, VarId)>,
    pub sense: Sense,
    pub rhs: Rat,
    pub label: String,
}

impl LinConstraint {
    pub fn activity(&self, values: &[Rat]) -> Rat {
        self.terms.iter().map(|(c, v)| c * &values[v.0]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MipError {
    #[error("node budget of {budget} exhausted; the instance is too large for this budget")]
    NodeBudgetExceeded { budget: u64 },
    #[error("constraint `{label}` references a variable that does not exist")]
    UnknownVariable { label: String },
    #[error("projection variable `{name}` is not binary")]
    ProjectionNotBinary { name: String },
    #[error("variable `{name}` has empty bounds")]
    EmptyBounds { name: String },
    #[error("solver produced a point violating `{label}`")]
    SolutionCheckFailed { label: String },
}

/// A linear feasibility program.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MipProblem {
    vars: Vec<MipVar>,
    constraints: Vec<LinConstraint>,
}

/// First constraint or bound a point violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub label: String,
}

impl MipProblem {
    pub fn new() -> Self {
        MipProblem::default()
    }

    pub fn add_binary(&mut self, name: impl Into<String>, priority: u32) -> VarId {
        self.vars.push(MipVar {
            kind: VarKind::Binary,
            lower: Some(Rat::zero()),
            upper: Some(Rat::one()),
            name: name.into(),
            priority,
        });
        VarId(self.vars.len() - 1)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: Option<Rat>, upper: Option<Rat>) -> VarId {
        self.vars.push(MipVar {
            kind: VarKind::Continuous,
            lower,
            upper,
            name: name.into(),
            priority: u32::MAX,
        });
        VarId(self.vars.len() - 1)
    }

    /// Adds `lhs (sense) rhs`, moving variables left and constants right.
    pub fn add_constraint(&mut self, lhs: LinExpr, sense: Sense, rhs: LinExpr, label: impl Into<String>) -> usize {
        let expr = lhs.minus(&rhs);
        self.constraints.push(LinConstraint {
            terms: expr.normalized_terms(),
            sense,
            rhs: -expr.constant_part(),
            label: label.into(),
        });
        self.constraints.len() - 1
    }

    pub fn vars(&self) -> &[MipVar] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &MipVar {
        &self.vars[id.0]
    }

    pub fn constraints(&self) -> &[LinConstraint] {
        &self.constraints
    }

    pub fn binary_count(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    /// Tightens the bounds of an existing variable.
    pub fn fix(&mut self, id: VarId, value: Rat) {
        self.vars[id.0].lower = Some(value.clone());
        self.vars[id.0].upper = Some(value);
    }

    pub fn validate(&self) -> Result<(), MipError> {
        for c in &self.constraints {
            if c.terms.iter().any(|(_, v)| v.0 >= self.vars.len()) {
                return Err(MipError::UnknownVariable { label: c.label.clone() });
            }
        }
        for v in &self.vars {
            if let (Some(lo), Some(hi)) = (&v.lower, &v.upper) {
                if lo > hi {
                    return Err(MipError::EmptyBounds { name: v.name.clone() });
                }
            }
        }
        Ok(())
    }

    /// Exact re-evaluation of every bound, integrality requirement and row.
    pub fn check(&self, solution: &MipSolution) -> Result<(), Violation> {
        let values = &solution.values;
        if values.len() != self.vars.len() {
            return Err(Violation {
                label: "dimension".into(),
            });
        }
        for (v, x) in self.vars.iter().zip(values) {
            let in_bounds = v.lower.as_ref().is_none_or(|lo| x >= lo) && v.upper.as_ref().is_none_or(|hi| x <= hi);
            let integral = v.kind == VarKind::Continuous || x.is_zero() || *x == Rat::one();
            if !in_bounds || !integral {
                return Err(Violation {
                    label: format!("bounds of {}", v.name),
                });
            }
        }
        for c in &self.constraints {
            if !c.sense.holds(&c.activity(values), &c.rhs) {
                return Err(Violation { label: c.label.clone() });
            }
        }
        Ok(())
    }

    /// LP-style plain-text listing with exact `p/q` coefficients.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "\\ feasibility problem: {} variables ({} binary), {} constraints",
            self.vars.len(),
            self.binary_count(),
            self.constraints.len()
        );
        out.push_str("Minimize\n obj: 0\nSubject To\n");
        for c in &self.constraints {
            let _ = write!(out, " {}:", c.label);
            if c.terms.is_empty() {
                out.push_str(" 0");
            }
            for (i, (coef, v)) in c.terms.iter().enumerate() {
                let name = &self.vars[v.0].name;
                let sign = if coef.is_negative() {
                    "-"
                } else if i > 0 {
                    "+"
                } else {
                    ""
                };
                let mag = coef.abs();
                if mag == Rat::one() {
                    let _ = write!(out, " {sign} {name}");
                } else {
                    let _ = write!(out, " {sign} {mag} {name}");
                }
            }
            let _ = writeln!(out, " {} {}", c.sense, c.rhs);
        }
        out.push_str("Bounds\n");
        for v in self.vars.iter().filter(|v| v.kind == VarKind::Continuous) {
            match (&v.lower, &v.upper) {
                (None, None) => {
                    let _ = writeln!(out, " {} free", v.name);
                }
                (Some(lo), None) => {
                    let _ = writeln!(out, " {} >= {lo}", v.name);
                }
                (None, Some(hi)) => {
                    let _ = writeln!(out, " -inf <= {} <= {hi}", v.name);
                }
                (Some(lo), Some(hi)) => {
                    let _ = writeln!(out, " {lo} <= {} <= {hi}", v.name);
                }
            }
        }
        let binaries: Vec<&str> = self
            .vars
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.name.as_str())
            .collect();
        if !binaries.is_empty() {
            out.push_str("Binaries\n");
            for b in binaries {
                let _ = writeln!(out, " {b}");
            }
        }
        out.push_str("End\n");
        out
    }
}

/// A witness assignment for every variable of a problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MipSolution {
    values: Vec<Rat>,
}

impl MipSolution {
    pub fn new(values: Vec<Rat>) -> Self {
        MipSolution { values }
    }

    pub fn value(&self, id: VarId) -> &Rat {
        &self.values[id.0]
    }

    pub fn is_one(&self, id: VarId) -> bool {
        self.values[id.0] == Rat::one()
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub node_budget: u64,
    /// Solve the LP relaxation at interior nodes as well as at leaves.
    pub lp_relaxation: bool,
}

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            node_budget: DEFAULT_NODE_BUDGET,
            lp_relaxation: true,
        }
    }
}

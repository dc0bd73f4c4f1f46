//! 3-SAT to nontrivial-equilibrium reduction.
//!
//! Player layout of a reduced game with `n` variables and `m` clauses:
//! variable players `0..n`, clause players `n..n+m`, the switch player `n+m`.
//! Variable players always sit at progress 0, clause player `j` at
//! `M - alpha f_j(a) + beta sum_t a_t` where `f_j` counts satisfied literal
//! slots, and the switch player at `M - 1/2`.

use std::fmt;

use serde::Serialize;

use crate::discrete::{enumerate_pure_nash, is_pure_nash_definition, AnalysisError};
use crate::discrete_mip::{find_nontrivial_pne_among, EncodingError};
use crate::game::{DiscreteProfile, GameError, RaceGame};
use crate::mip::SolverConfig;
use crate::rational::Rat;

pub const DEFAULT_SAT_CAP: usize = 20;

/// Nonzero; sign is polarity, magnitude the 1-based variable.
pub type Literal = i64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CnfFormula {
    pub num_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SatError {
    #[error("line {line}: malformed header, expected `p cnf <vars> <clauses>`")]
    MalformedHeader { line: usize },
    #[error("line {line}: `{token}` is not an integer literal")]
    BadToken { line: usize, token: String },
    #[error("line {line}: literal {literal} outside 1..={num_vars}")]
    LiteralOutOfRange { line: usize, literal: i64, num_vars: usize },
    #[error("clause {clause} has {len} literals; only 3-literal clauses are accepted")]
    NotThreeSat { clause: usize, len: usize },
    #[error("header declares {declared} clauses but {found} were read")]
    ClauseCountMismatch { declared: usize, found: usize },
    #[error("clause index {index} out of range for {clauses} clauses")]
    IndexOutOfRange { index: usize, clauses: usize },
    #[error("assignment has length {found}, expected {expected}")]
    AssignmentLength { expected: usize, found: usize },
    #[error("{num_vars} variables exceed the brute-force cap of {cap}")]
    CapExceeded { num_vars: usize, cap: usize },
    #[error("formula needs at least one variable")]
    NoVariables,
    #[error("invalid reduction parameters: {0}")]
    InvalidParams(&'static str),
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self, SatError> {
        if num_vars == 0 {
            return Err(SatError::NoVariables);
        }
        for lit in clauses.iter().flatten() {
            if *lit == 0 || lit.unsigned_abs() as usize > num_vars {
                return Err(SatError::LiteralOutOfRange {
                    line: 0,
                    literal: *lit,
                    num_vars,
                });
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            out.push_str(&format!("{} {} {} 0\n", c[0], c[1], c[2]));
        }
        out
    }

    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        (0..self.clauses.len()).all(|j| clause_value(self, j, assignment).is_ok_and(|v| v >= 1))
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lit = |l: &Literal| if *l > 0 { format!("x{l}") } else { format!("~x{}", -l) };
        let parts: Vec<String> = self
            .clauses
            .iter()
            .map(|c| format!("({})", c.iter().map(lit).collect::<Vec<_>>().join(" | ")))
            .collect();
        f.write_str(&parts.join(" & "))
    }
}

/// DIMACS CNF with exactly three literals per clause. Clauses may span lines.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, SatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<[Literal; 3]> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", v, c] => v.parse::<usize>().ok().zip(c.parse::<usize>().ok()),
                _ => None,
            };
            match parsed {
                Some((v, c)) if header.is_none() && v >= 1 => header = Some((v, c)),
                _ => return Err(SatError::MalformedHeader { line }),
            }
            continue;
        }
        let Some((num_vars, _)) = header else {
            return Err(SatError::MalformedHeader { line });
        };
        for token in trimmed.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| SatError::BadToken {
                line,
                token: token.to_string(),
            })?;
            if lit == 0 {
                let clause = std::mem::take(&mut current);
                let len = clause.len();
                let arr: [Literal; 3] = clause.try_into().map_err(|_| SatError::NotThreeSat {
                    clause: clauses.len() + 1,
                    len,
                })?;
                clauses.push(arr);
            } else if lit.unsigned_abs() as usize > num_vars {
                return Err(SatError::LiteralOutOfRange {
                    line,
                    literal: lit,
                    num_vars,
                });
            } else {
                current.push(lit);
            }
        }
    }
    let Some((num_vars, declared)) = header else {
        return Err(SatError::MalformedHeader {
            line: text.lines().count().max(1),
        });
    };
    if !current.is_empty() {
        // A final clause without its terminating 0.
        let len = current.len();
        let arr: [Literal; 3] = current.try_into().map_err(|_| SatError::NotThreeSat {
            clause: clauses.len() + 1,
            len,
        })?;
        clauses.push(arr);
    }
    if clauses.len() != declared {
        return Err(SatError::ClauseCountMismatch {
            declared,
            found: clauses.len(),
        });
    }
    Ok(CnfFormula { num_vars, clauses })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionParams {
    pub big_m: Rat,
    pub alpha: Rat,
    pub beta: Rat,
}

impl ReductionParams {
    pub fn validate(&self, formula: &CnfFormula) -> Result<(), SatError> {
        if !self.big_m.is_positive() {
            return Err(SatError::InvalidParams("M must be positive"));
        }
        if self.alpha < Rat::one() {
            return Err(SatError::InvalidParams("alpha must be at least 1"));
        }
        if !self.beta.is_positive() {
            return Err(SatError::InvalidParams("beta must be positive"));
        }
        if &self.beta * Rat::integer(formula.num_vars as i64) >= Rat::new(1, 2) {
            return Err(SatError::InvalidParams("beta * num_vars must stay below 1/2"));
        }
        Ok(())
    }
}

/// `M = 100`, `alpha = 1`, `beta = 1 / (4 n)`.
pub fn default_params(formula: &CnfFormula) -> ReductionParams {
    ReductionParams {
        big_m: Rat::integer(100),
        alpha: Rat::one(),
        beta: Rat::new(1, 4 * formula.num_vars.max(1) as i64),
    }
}

/// Number of satisfied literal slots of clause `j`.
pub fn clause_value(formula: &CnfFormula, j: usize, assignment: &[bool]) -> Result<usize, SatError> {
    if assignment.len() != formula.num_vars {
        return Err(SatError::AssignmentLength {
            expected: formula.num_vars,
            found: assignment.len(),
        });
    }
    let clause = formula.clauses.get(j).ok_or(SatError::IndexOutOfRange {
        index: j,
        clauses: formula.clauses.len(),
    })?;
    Ok(clause
        .iter()
        .filter(|&&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0))
        .count())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlayerRoleMap {
    pub variable_players: Vec<usize>,
    pub clause_players: Vec<usize>,
    pub switch_player: usize,
}

impl PlayerRoleMap {
    pub fn for_formula(formula: &CnfFormula) -> Self {
        let n = formula.num_vars;
        let m = formula.clauses.len();
        PlayerRoleMap {
            variable_players: (0..n).collect(),
            clause_players: (n..n + m).collect(),
            switch_player: n + m,
        }
    }

    pub fn players(&self) -> usize {
        self.switch_player + 1
    }

    /// Variable players set to `assignment`, everyone else closed.
    pub fn profile_for(&self, assignment: &[bool]) -> DiscreteProfile {
        let mut bits = vec![false; self.players()];
        bits[..assignment.len()].copy_from_slice(assignment);
        DiscreteProfile::new(bits)
    }

    pub fn assignment_of(&self, profile: &DiscreteProfile) -> Vec<bool> {
        self.variable_players.iter().map(|&t| profile.is_open(t)).collect()
    }
}

pub fn reduce_to_game(formula: &CnfFormula, params: &ReductionParams) -> Result<(RaceGame, PlayerRoleMap), SatError> {
    params.validate(formula)?;
    let roles = PlayerRoleMap::for_formula(formula);
    let k = roles.players();
    let mut spill = vec![vec![Rat::zero(); k]; k];
    let mut baseline = vec![Rat::zero(); k];
    for (j, clause) in formula.clauses.iter().enumerate() {
        let c = roles.clause_players[j];
        let negated = clause.iter().filter(|l| **l < 0).count() as i64;
        baseline[c] = &params.big_m - &params.alpha * Rat::integer(negated);
        for (t, row) in spill.iter_mut().take(formula.num_vars).enumerate() {
            let var = t as i64 + 1;
            let pos = clause.iter().filter(|&&l| l == var).count() as i64;
            let neg = clause.iter().filter(|&&l| l == -var).count() as i64;
            row[c] = &params.beta + &params.alpha * Rat::integer(neg - pos);
        }
    }
    baseline[roles.switch_player] = &params.big_m - Rat::new(1, 2);
    let game = RaceGame::new(vec![Rat::zero(); k], spill, baseline).expect("reduction emits a valid game");
    Ok((game, roles))
}

/// First satisfying assignment in lexicographic order of `x_1 .. x_n` bits
/// (mask order, `x_1` least significant).
pub fn brute_force_sat(formula: &CnfFormula, cap: usize) -> Result<Option<Vec<bool>>, SatError> {
    let n = formula.num_vars;
    if n > cap.min(63) {
        return Err(SatError::CapExceeded { num_vars: n, cap });
    }
    Ok((0..1u64 << n)
        .map(|mask| (0..n).map(|t| mask >> t & 1 == 1).collect::<Vec<bool>>())
        .find(|a| formula.is_satisfied_by(a)))
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub sat: bool,
    pub assignment: Option<Vec<bool>>,
    /// An equilibrium with some variable player open exists.
    pub nontrivial_pne: bool,
    /// An equilibrium with any player open exists.
    pub nontrivial_pne_full_profile: bool,
    pub agree: bool,
    pub readings_differ: bool,
    /// Assignment-induced profile, present when satisfiable.
    pub assignment_profile: Option<DiscreteProfile>,
    pub assignment_profile_is_pne: Option<bool>,
    /// Equilibrium found by the solver, with some variable player open.
    pub equilibrium_witness: Option<DiscreteProfile>,
    pub witness_assignment_satisfies: Option<bool>,
}

/// Decides both sides of the equivalence independently: satisfiability by
/// exhaustive search, nontrivial equilibria by the corrected encoding.
pub fn check_reduction(
    formula: &CnfFormula,
    params: &ReductionParams,
    config: &SolverConfig,
) -> Result<ReductionReport, CheckError> {
    let assignment = brute_force_sat(formula, DEFAULT_SAT_CAP)?;
    let (game, roles) = reduce_to_game(formula, params)?;
    let witness = find_nontrivial_pne_among(&game, &roles.variable_players, config)?;
    let all: Vec<usize> = (0..game.players()).collect();
    let full = match &witness {
        Some(_) => true,
        None => find_nontrivial_pne_among(&game, &all, config)?.is_some(),
    };
    let (assignment_profile, assignment_profile_is_pne) = match &assignment {
        Some(a) => {
            let p = roles.profile_for(a);
            let ok = is_pure_nash_definition(&game, &p)?.is_equilibrium;
            (Some(p), Some(ok))
        }
        None => (None, None),
    };
    let witness_assignment_satisfies = witness
        .as_ref()
        .map(|w| formula.is_satisfied_by(&roles.assignment_of(w)));
    let sat = assignment.is_some();
    let nontrivial = witness.is_some();
    Ok(ReductionReport {
        sat,
        assignment,
        nontrivial_pne: nontrivial,
        nontrivial_pne_full_profile: full,
        agree: sat == nontrivial,
        readings_differ: nontrivial != full,
        assignment_profile,
        assignment_profile_is_pne,
        equilibrium_witness: witness,
        witness_assignment_satisfies,
    })
}

/// Same verdicts from the exhaustive equilibrium scan (small instances only).
pub fn check_reduction_by_enumeration(
    formula: &CnfFormula,
    params: &ReductionParams,
    cap: usize,
) -> Result<(bool, bool), CheckError> {
    let (game, roles) = reduce_to_game(formula, params)?;
    let eq = enumerate_pure_nash(&game, cap)?;
    let variable = eq.iter().any(|p| roles.variable_players.iter().any(|&t| p.is_open(t)));
    let full = eq.iter().any(|p| !p.is_trivial());
    Ok((variable, full))
}

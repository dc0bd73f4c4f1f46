//! Mixed-integer characterization of discrete pure Nash equilibria.
//!
//! For every player `i` the encoding linearizes `z_i = max_{j != i} mu_j(a)`
//! and `zt_i = max_{j != i} mu_j(a^(i))` with selector binaries, then adds
//! the row `nash[i]` tying `z_i - zt_i` to `(2 a_i - 1) delta_i`.

use std::collections::BTreeSet;

use crate::game::{DiscreteProfile, GameError, RaceGame};
use crate::mip::{
    enumerate_solutions, solve_feasibility, LinExpr, MipError, MipProblem, MipSolution, Sense, SolverConfig, VarId,
};
use crate::rational::Rat;

const PRIORITY_ACTION: u32 = 0;
const PRIORITY_SELECTOR: u32 = 1;

/// Direction of the `nash[i]` row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NashSignMode {
    /// `z_i - zt_i <= (2 a_i - 1) delta_i`, equivalent to the deviation test.
    #[default]
    Corrected,
    /// `z_i - zt_i >= (2 a_i - 1) delta_i`, the reversed inequality.
    PaperFaithful,
}

#[derive(Debug, thiserror::Error)]
pub enum EncodingError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Mip(#[from] MipError),
}

#[derive(Debug, Clone)]
pub struct DiscreteEncoding {
    pub problem: MipProblem,
    pub action_vars: Vec<VarId>,
    pub z: Vec<VarId>,
    pub z_flip: Vec<VarId>,
    /// `y[i]` lists `(j, y_ij)` for `j != i`.
    pub y: Vec<Vec<(usize, VarId)>>,
    pub y_flip: Vec<Vec<(usize, VarId)>>,
    pub big_m: Rat,
    pub mode: NashSignMode,
}

/// Sum of absolute values of every parameter.
pub(crate) fn parameter_mass(game: &RaceGame) -> Rat {
    let k = game.players();
    let mut total = Rat::zero();
    for i in 0..k {
        total += game.delta(i).abs();
        total += game.baseline(i).abs();
        for j in 0..k {
            total += game.spill(i, j).abs();
        }
    }
    total
}

/// `1 + 2 (sum |delta| + sum |spill| + sum |d|)`, strictly above any gap between two
/// progress values of any profile with actions in `[0, 1]`.
pub fn big_m_bound(game: &RaceGame) -> Rat {
    Rat::one() + Rat::integer(2) * parameter_mass(game)
}

/// `mu_j` as an affine expression in the action variables; with `flip = Some(i)`
/// the action of `i` is replaced by `1 - a_i`.
pub(crate) fn progress_expr(game: &RaceGame, actions: &[VarId], j: usize, flip: Option<usize>) -> LinExpr {
    let mut e = LinExpr::constant(game.baseline(j).clone());
    for (l, &a) in actions.iter().enumerate() {
        let coef = if l == j {
            game.delta(j).clone()
        } else {
            game.spill(l, j).clone()
        };
        if coef.is_zero() {
            continue;
        }
        if flip == Some(l) {
            e.add_constant(&coef);
            e.add_term(-coef, a);
        } else {
            e.add_term(coef, a);
        }
    }
    e
}

/// Adds `target = max_{j != i} mu_j` with selector binaries; returns the selectors.
fn add_max_block(
    problem: &mut MipProblem,
    game: &RaceGame,
    actions: &[VarId],
    i: usize,
    target: VarId,
    flip: Option<usize>,
    big_m: &Rat,
) -> Vec<(usize, VarId)> {
    let (prefix, sel) = if flip.is_some() {
        ("flip-argmax", "yt")
    } else {
        ("argmax", "y")
    };
    let mut selectors = Vec::new();
    let mut pick = LinExpr::new();
    for j in (0..game.players()).filter(|&j| j != i) {
        let y = problem.add_binary(format!("{sel}_{i}_{j}"), PRIORITY_SELECTOR);
        let mu = progress_expr(game, actions, j, flip);
        problem.add_constraint(
            LinExpr::var(target),
            Sense::Ge,
            mu.clone(),
            format!("{prefix}[{i},{j}].lo"),
        );
        // target <= mu_j + (1 - y) M
        let mut upper = mu;
        upper.add_constant(big_m);
        upper.add_term(-big_m.clone(), y);
        problem.add_constraint(LinExpr::var(target), Sense::Le, upper, format!("{prefix}[{i},{j}].hi"));
        pick.add_term(Rat::one(), y);
        selectors.push((j, y));
    }
    let label = if flip.is_some() {
        "flip-argmax-select"
    } else {
        "argmax-select"
    };
    problem.add_constraint(pick, Sense::Eq, LinExpr::constant(Rat::one()), format!("{label}[{i}]"));
    selectors
}

pub fn encode_discrete_pne(game: &RaceGame, mode: NashSignMode) -> Result<DiscreteEncoding, GameError> {
    game.validate()?;
    let k = game.players();
    let big_m = big_m_bound(game);
    let bound = parameter_mass(game);
    let mut problem = MipProblem::new();
    let action_vars: Vec<VarId> = (0..k)
        .map(|i| problem.add_binary(format!("a_{i}"), PRIORITY_ACTION))
        .collect();
    let mut z = Vec::with_capacity(k);
    let mut z_flip = Vec::with_capacity(k);
    let mut y = Vec::with_capacity(k);
    let mut y_flip = Vec::with_capacity(k);
    for i in 0..k {
        let zi = problem.add_continuous(format!("z_{i}"), Some(-bound.clone()), Some(bound.clone()));
        let zti = problem.add_continuous(format!("zt_{i}"), Some(-bound.clone()), Some(bound.clone()));
        y.push(add_max_block(&mut problem, game, &action_vars, i, zi, None, &big_m));
        y_flip.push(add_max_block(&mut problem, game, &action_vars, i, zti, Some(i), &big_m));
        // (2 a_i - 1) delta_i
        let mut rhs = LinExpr::term(Rat::integer(2) * game.delta(i), action_vars[i]);
        rhs.add_constant(&-game.delta(i));
        let lhs = LinExpr::var(zi).minus(&LinExpr::var(zti));
        let sense = match mode {
            NashSignMode::Corrected => Sense::Le,
            NashSignMode::PaperFaithful => Sense::Ge,
        };
        problem.add_constraint(lhs, sense, rhs, format!("nash[{i}]"));
        z.push(zi);
        z_flip.push(zti);
    }
    Ok(DiscreteEncoding {
        problem,
        action_vars,
        z,
        z_flip,
        y,
        y_flip,
        big_m,
        mode,
    })
}

impl DiscreteEncoding {
    pub fn decode(&self, solution: &MipSolution) -> DiscreteProfile {
        DiscreteProfile::new(self.action_vars.iter().map(|&a| solution.is_one(a)).collect())
    }

    /// Copy with the action variables fixed to `profile`.
    pub fn with_actions_fixed(&self, profile: &DiscreteProfile) -> MipProblem {
        let mut p = self.problem.clone();
        for (&a, &bit) in self.action_vars.iter().zip(profile.bits()) {
            p.fix(a, if bit { Rat::one() } else { Rat::zero() });
        }
        p
    }
}

/// Discrete encodings are decided by propagation alone; interior relaxations only cost time.
pub fn discrete_solver_config(node_budget: u64) -> SolverConfig {
    SolverConfig {
        node_budget,
        lp_relaxation: false,
    }
}

/// All equilibria as the projections of the corrected encoding onto the actions.
pub fn enumerate_pne_via_mip(
    game: &RaceGame,
    config: &SolverConfig,
) -> Result<BTreeSet<DiscreteProfile>, EncodingError> {
    enumerate_pne_with_mode(game, NashSignMode::Corrected, config)
}

pub fn enumerate_pne_with_mode(
    game: &RaceGame,
    mode: NashSignMode,
    config: &SolverConfig,
) -> Result<BTreeSet<DiscreteProfile>, EncodingError> {
    let enc = encode_discrete_pne(game, mode)?;
    let cap = 1usize.checked_shl(game.players() as u32).unwrap_or(usize::MAX);
    let found = enumerate_solutions(&enc.problem, &enc.action_vars, cap, config)?;
    Ok(found.patterns.into_iter().map(DiscreteProfile::new).collect())
}

/// An equilibrium with at least one open player.
pub fn find_nontrivial_pne(game: &RaceGame, config: &SolverConfig) -> Result<Option<DiscreteProfile>, EncodingError> {
    let all: Vec<usize> = (0..game.players()).collect();
    find_nontrivial_pne_among(game, &all, config)
}

/// An equilibrium in which at least one player of `players` is open.
pub fn find_nontrivial_pne_among(
    game: &RaceGame,
    players: &[usize],
    config: &SolverConfig,
) -> Result<Option<DiscreteProfile>, EncodingError> {
    for &p in players {
        game.check_player(p)?;
    }
    let mut enc = encode_discrete_pne(game, NashSignMode::Corrected)?;
    let mut open = LinExpr::new();
    for &p in players {
        open.add_term(Rat::one(), enc.action_vars[p]);
    }
    enc.problem
        .add_constraint(open, Sense::Ge, LinExpr::constant(Rat::one()), "nontrivial");
    Ok(solve_feasibility(&enc.problem, config)?.map(|s| enc.decode(&s)))
}

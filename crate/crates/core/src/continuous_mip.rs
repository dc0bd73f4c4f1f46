//! Mixed-integer characterization of continuous pure Nash equilibria.
//!
//! Each player's first-order condition is written with a subgradient
//! `g_i = sum_j lambda_ij spill[i][j]` of the competitor envelope, where
//! `lambda_i` is supported on selected maximizers, and boundary multipliers
//! `alpha_i` (active at `a_i = 0`) and `beta_i` (active at `a_i = 1`):
//! `delta_i - g_i + alpha_i - beta_i = 0`.

use crate::continuous::is_continuous_pure_nash;
use crate::discrete_mip::{big_m_bound, parameter_mass, progress_expr, EncodingError};
use crate::game::{ContinuousProfile, GameError, RaceGame};
use crate::mip::{solve_feasibility, LinExpr, MipProblem, MipSolution, Sense, SolverConfig, VarId};
use crate::rational::Rat;

const PRIORITY_SELECTOR: u32 = 1;
const PRIORITY_BOUNDARY: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContinuousVariant {
    /// Exactly one selected maximizer per player (`sum_j y_ij = 1`).
    PaperFaithful,
    /// Any nonempty set of tied maximizers (`sum_j y_ij >= 1`).
    #[default]
    TieComplete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuousBigMs {
    pub m: Rat,
    pub m_alpha: Rat,
    pub m_beta: Rat,
}

/// `M` as for the discrete encoding; `M_alpha = M_beta = 1 + max|delta| + max|spill|`.
pub fn continuous_big_ms(game: &RaceGame) -> ContinuousBigMs {
    let k = game.players();
    let delta_max = (0..k).map(|i| game.delta(i).abs()).max().unwrap_or_else(Rat::zero);
    let spill_max = (0..k)
        .flat_map(|i| (0..k).map(move |j| (i, j)))
        .map(|(i, j)| game.spill(i, j).abs())
        .max()
        .unwrap_or_else(Rat::zero);
    let mult = Rat::one() + delta_max + spill_max;
    ContinuousBigMs {
        m: big_m_bound(game),
        m_alpha: mult.clone(),
        m_beta: mult,
    }
}

#[derive(Debug, Clone)]
pub struct PlayerBlock {
    pub mu: VarId,
    pub m: VarId,
    /// `(j, y_ij, lambda_ij)` for `j != i`.
    pub selectors: Vec<(usize, VarId, VarId)>,
    pub g: VarId,
    pub b0: VarId,
    pub b1: VarId,
    pub alpha: VarId,
    pub beta: VarId,
}

#[derive(Debug, Clone)]
pub struct ContinuousEncoding {
    pub problem: MipProblem,
    pub action_vars: Vec<VarId>,
    pub players: Vec<PlayerBlock>,
    pub big_ms: ContinuousBigMs,
    pub variant: ContinuousVariant,
}

impl ContinuousEncoding {
    pub fn decode(&self, solution: &MipSolution) -> ContinuousProfile {
        ContinuousProfile::new(self.action_vars.iter().map(|&a| solution.value(a).clone()).collect())
            .expect("action bounds are part of the problem")
    }
}

fn one() -> LinExpr {
    LinExpr::constant(Rat::one())
}

pub fn encode_continuous_pne(game: &RaceGame, variant: ContinuousVariant) -> Result<ContinuousEncoding, GameError> {
    game.validate()?;
    let k = game.players();
    let big_ms = continuous_big_ms(game);
    let mass = parameter_mass(game);
    let spill_max = big_ms.m_alpha.clone();
    let mut p = MipProblem::new();
    let action_vars: Vec<VarId> = (0..k)
        .map(|i| p.add_continuous(format!("a_{i}"), Some(Rat::zero()), Some(Rat::one())))
        .collect();
    let mu: Vec<VarId> = (0..k)
        .map(|i| {
            let v = p.add_continuous(format!("mu_{i}"), Some(-mass.clone()), Some(mass.clone()));
            p.add_constraint(
                LinExpr::var(v),
                Sense::Eq,
                progress_expr(game, &action_vars, i, None),
                format!("mu-def[{i}]"),
            );
            v
        })
        .collect();
    let mut players = Vec::with_capacity(k);
    for i in 0..k {
        let m = p.add_continuous(format!("m_{i}"), Some(-mass.clone()), Some(mass.clone()));
        let mut select = LinExpr::new();
        let mut lambda_sum = LinExpr::new();
        let mut subgradient = LinExpr::new();
        let mut selectors = Vec::new();
        for j in (0..k).filter(|&j| j != i) {
            let y = p.add_binary(format!("y_{i}_{j}"), PRIORITY_SELECTOR);
            let lambda = p.add_continuous(format!("lambda_{i}_{j}"), Some(Rat::zero()), Some(Rat::one()));
            p.add_constraint(
                LinExpr::var(m),
                Sense::Ge,
                LinExpr::var(mu[j]),
                format!("argmax[{i},{j}].lo"),
            );
            let mut upper = LinExpr::var(mu[j]);
            upper.add_constant(&big_ms.m).add_term(-big_ms.m.clone(), y);
            p.add_constraint(LinExpr::var(m), Sense::Le, upper, format!("argmax[{i},{j}].hi"));
            p.add_constraint(
                LinExpr::var(lambda),
                Sense::Le,
                LinExpr::var(y),
                format!("lambda-cap[{i},{j}]"),
            );
            select.add_term(Rat::one(), y);
            lambda_sum.add_term(Rat::one(), lambda);
            subgradient.add_term(game.spill(i, j).clone(), lambda);
            selectors.push((j, y, lambda));
        }
        let select_sense = match variant {
            ContinuousVariant::PaperFaithful => Sense::Eq,
            ContinuousVariant::TieComplete => Sense::Ge,
        };
        p.add_constraint(select, select_sense, one(), format!("argmax-select[{i}]"));
        p.add_constraint(lambda_sum, Sense::Eq, one(), format!("lambda-sum[{i}]"));
        let g = p.add_continuous(format!("g_{i}"), Some(-spill_max.clone()), Some(spill_max.clone()));
        p.add_constraint(LinExpr::var(g), Sense::Eq, subgradient, format!("subgradient[{i}]"));

        let b0 = p.add_binary(format!("b0_{i}"), PRIORITY_BOUNDARY);
        let b1 = p.add_binary(format!("b1_{i}"), PRIORITY_BOUNDARY);
        let a = action_vars[i];
        p.add_constraint(
            LinExpr::var(b0).plus(&LinExpr::var(b1)),
            Sense::Le,
            one(),
            format!("boundary-flags[{i}]"),
        );
        p.add_constraint(
            LinExpr::var(a),
            Sense::Le,
            one().minus(&LinExpr::var(b0)),
            format!("boundary-lo[{i}]"),
        );
        p.add_constraint(
            LinExpr::var(a),
            Sense::Ge,
            LinExpr::var(b1),
            format!("boundary-hi[{i}]"),
        );
        let alpha = p.add_continuous(format!("alpha_{i}"), Some(Rat::zero()), Some(big_ms.m_alpha.clone()));
        let beta = p.add_continuous(format!("beta_{i}"), Some(Rat::zero()), Some(big_ms.m_beta.clone()));
        p.add_constraint(
            LinExpr::var(alpha),
            Sense::Le,
            LinExpr::term(big_ms.m_alpha.clone(), b0),
            format!("alpha-cap[{i}]"),
        );
        p.add_constraint(
            LinExpr::var(beta),
            Sense::Le,
            LinExpr::term(big_ms.m_beta.clone(), b1),
            format!("beta-cap[{i}]"),
        );
        // delta_i - g_i + alpha_i - beta_i = 0
        let mut stat = LinExpr::constant(game.delta(i).clone());
        stat.add_term(-Rat::one(), g)
            .add_term(Rat::one(), alpha)
            .add_term(-Rat::one(), beta);
        p.add_constraint(stat, Sense::Eq, LinExpr::new(), format!("stationarity[{i}]"));

        players.push(PlayerBlock {
            mu: mu[i],
            m,
            selectors,
            g,
            b0,
            b1,
            alpha,
            beta,
        });
    }
    Ok(ContinuousEncoding {
        problem: p,
        action_vars,
        players,
        big_ms,
        variant,
    })
}

#[derive(Debug, thiserror::Error)]
pub enum ContinuousSolveError {
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error("encoding produced {profile}, which the exact best-response check rejects (gaps {gaps})")]
    VerificationFailed { profile: ContinuousProfile, gaps: String },
}

impl From<GameError> for ContinuousSolveError {
    fn from(e: GameError) -> Self {
        ContinuousSolveError::Encoding(e.into())
    }
}

/// Solves the encoding and returns the decoded profile after exact verification.
pub fn solve_continuous_pne(
    game: &RaceGame,
    variant: ContinuousVariant,
    config: &SolverConfig,
) -> Result<Option<ContinuousProfile>, ContinuousSolveError> {
    let enc = encode_continuous_pne(game, variant)?;
    solve_encoding(game, &enc, config)
}

pub fn solve_encoding(
    game: &RaceGame,
    enc: &ContinuousEncoding,
    config: &SolverConfig,
) -> Result<Option<ContinuousProfile>, ContinuousSolveError> {
    let Some(sol) = solve_feasibility(&enc.problem, config).map_err(EncodingError::from)? else {
        return Ok(None);
    };
    let profile = enc.decode(&sol);
    let verdict = is_continuous_pure_nash(game, &profile)?;
    if !verdict.is_equilibrium {
        let gaps = verdict.gaps.iter().map(Rat::to_string).collect::<Vec<_>>().join(", ");
        return Err(ContinuousSolveError::VerificationFailed { profile, gaps });
    }
    Ok(Some(profile))
}

//! Exact best responses in the continuous game.
//!
//! With everyone else fixed, `u_i(t) = delta_i t + c_i - max_{j != i} (spill[i][j] t + c_j)`,
//! a concave piecewise-linear function of `t` in `[0, 1]`. Its maximum is
//! attained at `0`, `1` or a kink of the competitor envelope, and the argmax
//! is a closed interval.

use serde::Serialize;

use crate::game::{ContinuousProfile, GameError, RaceGame};
use crate::rational::Rat;

/// A competitor line `slope * t + intercept`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompetitorLine {
    pub competitor: usize,
    pub slope: Rat,
    pub intercept: Rat,
}

impl CompetitorLine {
    pub fn at(&self, t: &Rat) -> Rat {
        &self.slope * t + &self.intercept
    }
}

/// Own-action utility of one player on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OwnActionUtility {
    pub player: usize,
    pub own_slope: Rat,
    pub own_intercept: Rat,
    pub lines: Vec<CompetitorLine>,
    /// Envelope kinks in `(0, 1)`, increasing.
    pub breakpoints: Vec<Rat>,
    /// Utility slope on each of the `breakpoints.len() + 1` pieces; nonincreasing.
    pub slopes: Vec<Rat>,
}

impl OwnActionUtility {
    pub fn envelope(&self, t: &Rat) -> Rat {
        self.lines
            .iter()
            .map(|l| l.at(t))
            .max()
            .expect("at least one competitor")
    }

    pub fn eval(&self, t: &Rat) -> Rat {
        &self.own_slope * t + &self.own_intercept - self.envelope(t)
    }

    /// Competitors whose line attains the envelope at `t`.
    pub fn active(&self, t: &Rat) -> Vec<usize> {
        let top = self.envelope(t);
        self.lines
            .iter()
            .filter(|l| l.at(t) == top)
            .map(|l| l.competitor)
            .collect()
    }

    /// `0`, `1` and every pairwise line intersection strictly inside, sorted and deduplicated.
    pub fn candidate_points(&self) -> Vec<Rat> {
        let mut pts = vec![Rat::zero(), Rat::one()];
        for (x, a) in self.lines.iter().enumerate() {
            for b in &self.lines[x + 1..] {
                if a.slope == b.slope {
                    continue;
                }
                let t = (&b.intercept - &a.intercept) / (&a.slope - &b.slope);
                if t.is_positive() && t < Rat::one() {
                    pts.push(t);
                }
            }
        }
        pts.sort();
        pts.dedup();
        pts
    }
}

pub fn own_action_utility(
    game: &RaceGame,
    profile: &ContinuousProfile,
    i: usize,
) -> Result<OwnActionUtility, GameError> {
    game.check_player(i)?;
    let base = game.progress(&profile.with_action(i, Rat::zero()))?;
    let lines: Vec<CompetitorLine> = (0..game.players())
        .filter(|&j| j != i)
        .map(|j| CompetitorLine {
            competitor: j,
            slope: game.spill(i, j).clone(),
            intercept: base[j].clone(),
        })
        .collect();
    let mut f = OwnActionUtility {
        player: i,
        own_slope: game.delta(i).clone(),
        own_intercept: base[i].clone(),
        lines,
        breakpoints: Vec::new(),
        slopes: Vec::new(),
    };
    // The envelope is affine between consecutive candidates; merge equal slopes.
    let pts = f.candidate_points();
    let values: Vec<Rat> = pts.iter().map(|t| f.envelope(t)).collect();
    let mut slopes: Vec<Rat> = Vec::new();
    let mut breakpoints = Vec::new();
    for s in 0..pts.len() - 1 {
        let env_slope = (&values[s + 1] - &values[s]) / (&pts[s + 1] - &pts[s]);
        let u_slope = &f.own_slope - env_slope;
        if slopes.last() != Some(&u_slope) {
            if s > 0 {
                breakpoints.push(pts[s].clone());
            }
            slopes.push(u_slope);
        }
    }
    f.breakpoints = breakpoints;
    f.slopes = slopes;
    Ok(f)
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lo: Rat,
    pub hi: Rat,
}

impl Interval {
    pub fn contains(&self, t: &Rat) -> bool {
        &self.lo <= t && t <= &self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BestResponseSet {
    pub optimal_value: Rat,
    /// Disjoint and sorted. Concavity makes this a single interval.
    pub optimizers: Vec<Interval>,
    pub candidate_points: Vec<Rat>,
}

impl BestResponseSet {
    pub fn contains(&self, t: &Rat) -> bool {
        self.optimizers.iter().any(|iv| iv.contains(t))
    }

    pub fn lowest(&self) -> &Rat {
        &self.optimizers[0].lo
    }
}

pub fn best_response_set(game: &RaceGame, profile: &ContinuousProfile, i: usize) -> Result<BestResponseSet, GameError> {
    let f = own_action_utility(game, profile, i)?;
    Ok(best_response_of(&f))
}

pub fn best_response_of(f: &OwnActionUtility) -> BestResponseSet {
    let candidate_points = f.candidate_points();
    let values: Vec<Rat> = candidate_points.iter().map(|t| f.eval(t)).collect();
    let optimal_value = values.iter().max().expect("0 and 1 are candidates").clone();
    let first = values.iter().position(|v| *v == optimal_value).expect("max present");
    let last = values.iter().rposition(|v| *v == optimal_value).expect("max present");
    BestResponseSet {
        optimizers: vec![Interval {
            lo: candidate_points[first].clone(),
            hi: candidate_points[last].clone(),
        }],
        optimal_value,
        candidate_points,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContinuousVerdict {
    pub is_equilibrium: bool,
    /// `max_t u_i(t, a_-i) - u_i(a)`, zero exactly when best-responding.
    pub gaps: Vec<Rat>,
}

pub fn is_continuous_pure_nash(game: &RaceGame, profile: &ContinuousProfile) -> Result<ContinuousVerdict, GameError> {
    let utilities = game.utilities(profile)?;
    let mut gaps = Vec::with_capacity(game.players());
    for (i, u) in utilities.iter().enumerate() {
        let br = best_response_set(game, profile, i)?;
        gaps.push(&br.optimal_value - u);
    }
    Ok(ContinuousVerdict {
        is_equilibrium: gaps.iter().all(Rat::is_zero),
        gaps,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DynamicsOutcome {
    Converged {
        profile: ContinuousProfile,
    },
    /// Rounds between two visits of the same profile.
    CycleDetected {
        period: usize,
    },
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DynamicsTrace {
    /// Start profile followed by the profile after each round.
    pub iterates: Vec<ContinuousProfile>,
    pub outcome: DynamicsOutcome,
}

/// Round-robin best-response dynamics; every update moves the player to the
/// lowest point of its best-response set. `max_rounds` bounds full rounds.
pub fn best_response_dynamics(
    game: &RaceGame,
    start: &ContinuousProfile,
    max_rounds: usize,
) -> Result<DynamicsTrace, GameError> {
    game.progress(start)?;
    let mut iterates = vec![start.clone()];
    let mut current = start.clone();
    for _ in 0..max_rounds {
        for i in 0..game.players() {
            let br = best_response_set(game, &current, i)?;
            current = current.with_action(i, br.lowest().clone());
        }
        if let Some(seen) = iterates.iter().rposition(|p| *p == current) {
            let period = iterates.len() - seen;
            iterates.push(current.clone());
            let outcome = if period == 1 {
                DynamicsOutcome::Converged { profile: current }
            } else {
                DynamicsOutcome::CycleDetected { period }
            };
            return Ok(DynamicsTrace { iterates, outcome });
        }
        iterates.push(current.clone());
    }
    Ok(DynamicsTrace {
        iterates,
        outcome: DynamicsOutcome::BudgetExhausted,
    })
}

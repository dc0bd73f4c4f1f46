//! Equilibrium checks and corollary analyses for open/closed actions.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::game::{all_profiles, best_competitor, utility_from_progress, DiscreteProfile, GameError, RaceGame};
use crate::rational::Rat;

/// Default cap on players for exhaustive `2^k` scans.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{players} players exceed the enumeration cap of {cap}")]
    CapExceeded { players: usize, cap: usize },
}

/// Per-player deviation slacks; slack `i` is `u_i(a) - u_i(a^(i))`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NashVerdict {
    pub is_equilibrium: bool,
    pub player_slacks: Vec<Rat>,
}

impl NashVerdict {
    pub fn from_slacks(player_slacks: Vec<Rat>) -> Self {
        NashVerdict {
            is_equilibrium: player_slacks.iter().all(|s| !s.is_negative()),
            player_slacks,
        }
    }

    /// Every player strictly loses by deviating.
    pub fn is_strict(&self) -> bool {
        self.player_slacks.iter().all(Rat::is_positive)
    }
}

/// Straight from the definition: compare each player's utility with its flipped utility.
pub fn is_pure_nash_definition(game: &RaceGame, a: &DiscreteProfile) -> Result<NashVerdict, GameError> {
    let base = game.utilities(a)?;
    let slacks = (0..game.players())
        .map(|i| {
            let flipped = a.flip(i)?;
            Ok(&base[i] - game.utility(&flipped, i)?)
        })
        .collect::<Result<Vec<_>, GameError>>()?;
    Ok(NashVerdict::from_slacks(slacks))
}

/// The best-competitor form: player `i` is content iff
/// `max_{j!=i} mu_j(a) - max_{j!=i} mu_j(a^(i)) + (-1)^{a_i} delta_i <= 0`.
pub fn lemma1_check(game: &RaceGame, a: &DiscreteProfile) -> Result<NashVerdict, GameError> {
    let mu = game.progress(a)?;
    let slacks = (0..game.players())
        .map(|i| {
            let mu_flip = game.progress(&a.flip(i)?)?;
            let signed_delta = if a.is_open(i) {
                -game.delta(i)
            } else {
                game.delta(i).clone()
            };
            let lhs = best_competitor(&mu, i) - best_competitor(&mu_flip, i) + signed_delta;
            Ok(-lhs)
        })
        .collect::<Result<Vec<_>, GameError>>()?;
    Ok(NashVerdict::from_slacks(slacks))
}

fn check_cap(game: &RaceGame, cap: usize) -> Result<(), AnalysisError> {
    // masks are u64, so 63 is a hard ceiling regardless of the configured cap
    let cap = cap.min(63);
    if game.players() > cap {
        Err(AnalysisError::CapExceeded {
            players: game.players(),
            cap,
        })
    } else {
        Ok(())
    }
}

/// Exhaustive scan of all `2^k` profiles.
pub fn enumerate_pure_nash(game: &RaceGame, cap: usize) -> Result<BTreeSet<DiscreteProfile>, AnalysisError> {
    check_cap(game, cap)?;
    let k = game.players();
    // utilities of every profile, indexed by mask
    let utilities: Vec<Vec<Rat>> = all_profiles(k).map(|p| game.utilities(&p)).collect::<Result<_, _>>()?;
    let mut found = BTreeSet::new();
    for (mask, u) in utilities.iter().enumerate() {
        let stable = (0..k).all(|i| u[i] >= utilities[mask ^ (1 << i)][i]);
        if stable {
            found.insert(DiscreteProfile::from_mask(mask as u64, k));
        }
    }
    Ok(found)
}

fn outgoing_extremes(game: &RaceGame, i: usize) -> (Rat, Rat) {
    let mut out = (0..game.players()).filter(|&j| j != i).map(|j| game.spill(i, j));
    let first = out.next().expect("at least two players").clone();
    out.fold((first.clone(), first), |(lo, hi), x| {
        (lo.min(x.clone()), hi.max(x.clone()))
    })
}

/// Sufficient condition on outgoing spillovers: an open player gains more than it
/// gives any competitor, a closed player less than it would give every competitor.
pub fn sufficient_condition_check(game: &RaceGame, a: &DiscreteProfile) -> Result<bool, GameError> {
    if a.bits().len() != game.players() {
        return Err(GameError::DimensionMismatch {
            what: "profile".into(),
            expected: game.players(),
            found: a.bits().len(),
        });
    }
    Ok((0..game.players()).all(|i| {
        let (lo, hi) = outgoing_extremes(game, i);
        let delta = game.delta(i);
        if a.is_open(i) {
            hi < *delta
        } else {
            *delta < lo
        }
    }))
}

/// Gain of player `i` from opening alone when everyone else stays closed:
/// `delta_i + max_{j!=i} d_j - max_{j!=i} (d_j + spill[i][j])`.
pub fn closed_source_deviation_gain(game: &RaceGame, i: usize) -> Result<Rat, GameError> {
    game.check_player(i)?;
    let k = game.players();
    let best_closed = best_competitor(game.baselines(), i).clone();
    let best_open = (0..k)
        .filter(|&j| j != i)
        .map(|j| game.baseline(j) + game.spill(i, j))
        .max()
        .expect("at least two players");
    Ok(game.delta(i) + best_closed - best_open)
}

/// Players that strictly gain by opening when everyone is closed.
pub fn closed_source_deviators(game: &RaceGame) -> Result<BTreeSet<usize>, GameError> {
    let mut out = BTreeSet::new();
    for i in 0..game.players() {
        if closed_source_deviation_gain(game, i)?.is_positive() {
            out.insert(i);
        }
    }
    Ok(out)
}

/// Total progress `W(a) = sum_i mu_i(a)`.
pub fn social_welfare(game: &RaceGame, a: &DiscreteProfile) -> Result<Rat, GameError> {
    Ok(game.progress(a)?.into_iter().sum())
}

/// Welfare gained when `i` opens: its own gain plus everything it spills.
pub fn welfare_marginal(game: &RaceGame, i: usize) -> Rat {
    (0..game.players())
        .filter(|&j| j != i)
        .map(|j| game.spill(i, j))
        .sum::<Rat>()
        + game.delta(i)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WelfareEntry {
    pub profile: DiscreteProfile,
    pub welfare: Rat,
}

/// Per equilibrium, whether the closed-form rule on incoming spillovers
/// (`open iff delta_i >= max_{j!=i} spill[j][i]`) predicts its actions, next to
/// whether it actually maximizes welfare.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IncomingSpillRuleCheck {
    pub profile: DiscreteProfile,
    pub condition_holds: bool,
    pub maximizes_welfare: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WelfareReport {
    pub welfare_by_profile: Vec<WelfareEntry>,
    pub max_welfare: Rat,
    pub welfare_maximizers: BTreeSet<DiscreteProfile>,
    pub equilibria: BTreeSet<DiscreteProfile>,
    pub aligned_equilibria: BTreeSet<DiscreteProfile>,
    pub incoming_spill_rule: Vec<IncomingSpillRuleCheck>,
}

/// All welfare maximizers by the coordinate-wise rule: open iff the marginal is
/// positive, either action when it is zero.
pub fn welfare_maximizers(game: &RaceGame) -> BTreeSet<DiscreteProfile> {
    let k = game.players();
    let mut partial: Vec<Vec<bool>> = vec![Vec::with_capacity(k)];
    for i in 0..k {
        let m = welfare_marginal(game, i);
        let choices: &[bool] = if m.is_positive() {
            &[true]
        } else if m.is_negative() {
            &[false]
        } else {
            &[false, true]
        };
        partial = partial
            .into_iter()
            .flat_map(|p| {
                choices.iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    partial.into_iter().map(DiscreteProfile::new).collect()
}

fn incoming_spill_rule_holds(game: &RaceGame, a: &DiscreteProfile) -> bool {
    (0..game.players()).all(|i| {
        let incoming_max = (0..game.players())
            .filter(|&j| j != i)
            .map(|j| game.spill(j, i))
            .max()
            .expect("at least two players");
        let delta = game.delta(i);
        if a.is_open(i) {
            delta >= incoming_max
        } else {
            delta <= incoming_max
        }
    })
}

pub fn welfare_alignment_report(game: &RaceGame, cap: usize) -> Result<WelfareReport, AnalysisError> {
    check_cap(game, cap)?;
    let welfare_by_profile = all_profiles(game.players())
        .map(|p| {
            let welfare = social_welfare(game, &p)?;
            Ok(WelfareEntry { profile: p, welfare })
        })
        .collect::<Result<Vec<_>, GameError>>()?;
    let maximizers = welfare_maximizers(game);
    let first = maximizers.iter().next().expect("at least one maximizer");
    let max_welfare = social_welfare(game, first)?;
    let equilibria = enumerate_pure_nash(game, cap)?;
    let aligned_equilibria = equilibria.intersection(&maximizers).cloned().collect();
    let incoming_spill_rule = equilibria
        .iter()
        .map(|p| IncomingSpillRuleCheck {
            profile: p.clone(),
            condition_holds: incoming_spill_rule_holds(game, p),
            maximizes_welfare: maximizers.contains(p),
        })
        .collect();
    Ok(WelfareReport {
        welfare_by_profile,
        max_welfare,
        welfare_maximizers: maximizers,
        equilibria,
        aligned_equilibria,
        incoming_spill_rule,
    })
}

/// Utility of each player for every profile, for reporting.
pub fn utilities_of(game: &RaceGame, a: &DiscreteProfile) -> Result<(Vec<Rat>, Vec<Rat>), GameError> {
    let mu = game.progress(a)?;
    let u = (0..mu.len()).map(|i| utility_from_progress(&mu, i)).collect();
    Ok((mu, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> DiscreteProfile {
        s.parse().unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| Rat::integer(x)).collect()
    }

    #[test]
    fn definition_examples() {
        let g = RaceGame::from_ints(&[1, 1], &[&[0, 0], &[0, 0]], &[0, 0]).unwrap();
        let v = is_pure_nash_definition(&g, &p("11")).unwrap();
        assert!(v.is_equilibrium);
        assert_eq!(v.player_slacks, ints(&[1, 1]));
        let v = is_pure_nash_definition(&g, &p("00")).unwrap();
        assert!(!v.is_equilibrium);
        assert_eq!(v.player_slacks, ints(&[-1, -1]));
    }

    #[test]
    fn zero_delta_two_player_slack_is_the_outgoing_spill() {
        // with delta_i = 0, opening only moves the opponent: slack_i = -spill[i][j] (2 a_i - 1)
        for (s01, s10) in [(3, -2), (0, 5), (-4, -4), (0, 0)] {
            let g = RaceGame::from_ints(&[0, 0], &[&[0, s01], &[s10, 0]], &[1, -1]).unwrap();
            for a in all_profiles(2) {
                let v = is_pure_nash_definition(&g, &a).unwrap();
                let sign = |open: bool| if open { 1 } else { -1 };
                assert_eq!(
                    v.player_slacks,
                    ints(&[-s01 * sign(a.is_open(0)), -s10 * sign(a.is_open(1))])
                );
            }
        }
        let g = RaceGame::from_ints(&[0, 0], &[&[0, 0], &[0, 0]], &[1, -1]).unwrap();
        assert_eq!(enumerate_pure_nash(&g, 20).unwrap().len(), 4);
    }

    #[test]
    fn lemma1_examples() {
        let g = RaceGame::from_ints(&[2, 2], &[&[0, 1], &[1, 0]], &[0, 0]).unwrap();
        assert!(lemma1_check(&g, &p("11")).unwrap().is_equilibrium);
        assert_eq!(
            lemma1_check(&g, &p("11")).unwrap(),
            is_pure_nash_definition(&g, &p("11")).unwrap()
        );

        // player 0 gains 3 by opening but only lifts others by 1; leader is player 2
        let g = RaceGame::from_ints(&[3, 0, 0], &[&[0, 1, 1], &[0, 0, 0], &[0, 0, 0]], &[0, 0, 5]).unwrap();
        let closed = DiscreteProfile::all_closed(3);
        assert!(!lemma1_check(&g, &closed).unwrap().is_equilibrium);
        assert!(!is_pure_nash_definition(&g, &closed).unwrap().is_equilibrium);
    }

    #[test]
    fn enumeration_examples() {
        let g = RaceGame::from_ints(&[1, 2, 3], &[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]], &[0, 4, -1]).unwrap();
        assert_eq!(enumerate_pure_nash(&g, 20).unwrap(), BTreeSet::from([p("111")]));
        let g = RaceGame::from_ints(&[-1, -2, -3], &[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]], &[0, 4, -1]).unwrap();
        assert_eq!(enumerate_pure_nash(&g, 20).unwrap(), BTreeSet::from([p("000")]));
        let g = RaceGame::zero(3).unwrap();
        assert!(matches!(
            enumerate_pure_nash(&g, 2),
            Err(AnalysisError::CapExceeded { .. })
        ));
    }

    #[test]
    fn sufficient_condition_examples() {
        let g = RaceGame::from_ints(&[2, 2], &[&[0, 1], &[1, 0]], &[0, 0]).unwrap();
        assert!(sufficient_condition_check(&g, &p("11")).unwrap());
        let g = RaceGame::from_ints(&[0, 0], &[&[0, 1], &[1, 0]], &[0, 0]).unwrap();
        assert!(sufficient_condition_check(&g, &p("00")).unwrap());
        assert!(is_pure_nash_definition(&g, &p("00")).unwrap().is_equilibrium);
        assert!(!sufficient_condition_check(&g, &p("10")).unwrap());
    }

    #[test]
    fn deviation_examples() {
        let g = RaceGame::from_ints(&[1, 0, 0], &[&[0, 0, 0], &[0, 0, 0], &[0, 0, 0]], &[0, 10, 10]).unwrap();
        assert_eq!(closed_source_deviation_gain(&g, 0).unwrap(), Rat::one());
        assert_eq!(closed_source_deviators(&g).unwrap(), BTreeSet::from([0]));
        let g = RaceGame::zero(4).unwrap();
        assert!(closed_source_deviators(&g).unwrap().is_empty());
    }

    #[test]
    fn welfare_examples() {
        let g = RaceGame::from_ints(&[1, 1], &[&[0, 3], &[0, 0]], &[2, 5]).unwrap();
        assert_eq!(social_welfare(&g, &p("00")).unwrap(), Rat::integer(7));
        let g = RaceGame::from_ints(&[1, 1], &[&[0, 3], &[0, 0]], &[0, 0]).unwrap();
        assert_eq!(social_welfare(&g, &p("10")).unwrap(), Rat::integer(4));

        let g = RaceGame::from_ints(&[-1, -1], &[&[0, 2], &[2, 0]], &[0, 0]).unwrap();
        let report = welfare_alignment_report(&g, 20).unwrap();
        assert_eq!(report.welfare_maximizers, BTreeSet::from([p("11")]));
        assert_eq!(report.max_welfare, Rat::integer(2));
        assert!(!report.equilibria.contains(&p("11")));
        assert!(report.aligned_equilibria.is_empty());
        assert_eq!(
            is_pure_nash_definition(&g, &p("11")).unwrap().player_slacks,
            ints(&[-3, -3])
        );

        let report = welfare_alignment_report(&RaceGame::zero(3).unwrap(), 20).unwrap();
        assert_eq!(report.welfare_maximizers.len(), 8);
        assert_eq!(report.equilibria.len(), 8);
        assert_eq!(report.aligned_equilibria.len(), 8);
    }
}

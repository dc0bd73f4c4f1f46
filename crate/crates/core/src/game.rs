//! The race game: parameters, action profiles, progress and utility.
//!
//! Progress of player `i` under actions `a`:
//!
//! ```text
//! mu_i(a) = delta_i * a_i + sum_{j != i} spill[j][i] * a_j + d_i
//! u_i(a)  = mu_i(a) - max_{j != i} mu_j(a)
//! ```
//!
//! Spillovers are stored source-major: `spill[i][j]` is what player `j`
//! gains when player `i` opens. Reading `mu_i` therefore walks column `i`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("dimension mismatch: {what} has length {found}, expected {expected}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("spillover of player {player} onto itself must be 0")]
    NonzeroDiagonal { player: usize },
    #[error("a race needs at least 2 players, got {0}")]
    PlayerCountTooSmall(usize),
    #[error("player index {index} out of range for {players} players")]
    IndexOutOfRange { index: usize, players: usize },
    #[error("action {value} of player {player} lies outside [0, 1]")]
    ActionOutOfRange { player: usize, value: Rat },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaceGame {
    delta: Vec<Rat>,
    spill: Vec<Vec<Rat>>,
    baseline: Vec<Rat>,
}

impl RaceGame {
    /// Builds and validates a game. `spill[i][j]` is the gain of `j` when `i` opens.
    pub fn new(delta: Vec<Rat>, spill: Vec<Vec<Rat>>, baseline: Vec<Rat>) -> Result<Self, GameError> {
        let game = RaceGame { delta, spill, baseline };
        game.validate()?;
        Ok(game)
    }

    /// Convenience constructor from integers, mostly for tests and fixtures.
    pub fn from_ints(delta: &[i64], spill: &[&[i64]], baseline: &[i64]) -> Result<Self, GameError> {
        RaceGame::new(
            delta.iter().map(|&x| Rat::integer(x)).collect(),
            spill
                .iter()
                .map(|row| row.iter().map(|&x| Rat::integer(x)).collect())
                .collect(),
            baseline.iter().map(|&x| Rat::integer(x)).collect(),
        )
    }

    /// The all-zero game on `k` players.
    pub fn zero(k: usize) -> Result<Self, GameError> {
        RaceGame::new(
            vec![Rat::zero(); k],
            vec![vec![Rat::zero(); k]; k],
            vec![Rat::zero(); k],
        )
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let k = self.delta.len();
        if k < 2 {
            return Err(GameError::PlayerCountTooSmall(k));
        }
        check_len("baseline", k, self.baseline.len())?;
        check_len("spill", k, self.spill.len())?;
        for (i, row) in self.spill.iter().enumerate() {
            check_len(&format!("spill[{i}]"), k, row.len())?;
            if !row[i].is_zero() {
                return Err(GameError::NonzeroDiagonal { player: i });
            }
        }
        Ok(())
    }

    pub fn players(&self) -> usize {
        self.delta.len()
    }

    pub fn delta(&self, i: usize) -> &Rat {
        &self.delta[i]
    }

    pub fn deltas(&self) -> &[Rat] {
        &self.delta
    }

    /// Gain of `target` when `source` opens.
    pub fn spill(&self, source: usize, target: usize) -> &Rat {
        &self.spill[source][target]
    }

    pub fn spill_matrix(&self) -> &[Vec<Rat>] {
        &self.spill
    }

    pub fn baseline(&self, i: usize) -> &Rat {
        &self.baseline[i]
    }

    pub fn baselines(&self) -> &[Rat] {
        &self.baseline
    }

    pub fn check_player(&self, i: usize) -> Result<(), GameError> {
        if i < self.players() {
            Ok(())
        } else {
            Err(GameError::IndexOutOfRange {
                index: i,
                players: self.players(),
            })
        }
    }

    /// Every parameter multiplied by `factor`.
    pub fn scaled(&self, factor: &Rat) -> RaceGame {
        RaceGame {
            delta: self.delta.iter().map(|x| x * factor).collect(),
            spill: self
                .spill
                .iter()
                .map(|row| row.iter().map(|x| x * factor).collect())
                .collect(),
            baseline: self.baseline.iter().map(|x| x * factor).collect(),
        }
    }

    /// Same game with every baseline shifted by `shift`.
    pub fn shifted(&self, shift: &Rat) -> RaceGame {
        RaceGame {
            baseline: self.baseline.iter().map(|x| x + shift).collect(),
            ..self.clone()
        }
    }

    /// `mu(a)` for any action profile.
    pub fn progress<P: ActionProfile + ?Sized>(&self, profile: &P) -> Result<Vec<Rat>, GameError> {
        let k = self.players();
        check_len("profile", k, profile.len())?;
        let mut mu = self.baseline.clone();
        for j in 0..k {
            let a = profile.action(j);
            if a.is_zero() {
                continue;
            }
            let unit = a == Rat::one();
            for (i, m) in mu.iter_mut().enumerate() {
                let coef = if i == j { &self.delta[j] } else { &self.spill[j][i] };
                if coef.is_zero() {
                    continue;
                }
                if unit {
                    *m += coef;
                } else {
                    *m += coef * &a;
                }
            }
        }
        Ok(mu)
    }

    /// The matrix `D` with `mu(a) = D a + d`: `D[i][i] = delta_i`, `D[i][j] = spill[j][i]`.
    pub fn interaction_matrix(&self) -> Vec<Vec<Rat>> {
        let k = self.players();
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i == j {
                            self.delta[i].clone()
                        } else {
                            self.spill[j][i].clone()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub fn utility<P: ActionProfile + ?Sized>(&self, profile: &P, i: usize) -> Result<Rat, GameError> {
        self.check_player(i)?;
        let mu = self.progress(profile)?;
        Ok(utility_from_progress(&mu, i))
    }

    pub fn utilities<P: ActionProfile + ?Sized>(&self, profile: &P) -> Result<Vec<Rat>, GameError> {
        let mu = self.progress(profile)?;
        Ok((0..mu.len()).map(|i| utility_from_progress(&mu, i)).collect())
    }
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<(), GameError> {
    if expected == found {
        Ok(())
    } else {
        Err(GameError::DimensionMismatch {
            what: what.to_string(),
            expected,
            found,
        })
    }
}

/// `max_{j != i} mu_j`. Requires at least two entries.
pub fn best_competitor(mu: &[Rat], i: usize) -> &Rat {
    mu.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, m)| m)
        .max()
        .expect("at least two players")
}

pub fn utility_from_progress(mu: &[Rat], i: usize) -> Rat {
    &mu[i] - best_competitor(mu, i)
}

/// Anything that assigns an action level in `[0, 1]` to each player.
pub trait ActionProfile {
    fn len(&self) -> usize;
    fn action(&self, i: usize) -> Rat;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Open (`true`) or closed (`false`) per player.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiscreteProfile(Vec<bool>);

impl DiscreteProfile {
    pub fn new(bits: Vec<bool>) -> Self {
        DiscreteProfile(bits)
    }

    pub fn all_closed(k: usize) -> Self {
        DiscreteProfile(vec![false; k])
    }

    pub fn all_open(k: usize) -> Self {
        DiscreteProfile(vec![true; k])
    }

    /// Bit `i` of `mask` becomes player `i`'s action.
    pub fn from_mask(mask: u64, k: usize) -> Self {
        DiscreteProfile((0..k).map(|i| mask >> i & 1 == 1).collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|b| !b)
    }

    pub fn open_count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Copy with player `i`'s action reversed.
    pub fn flip(&self, i: usize) -> Result<Self, GameError> {
        if i >= self.0.len() {
            return Err(GameError::IndexOutOfRange {
                index: i,
                players: self.0.len(),
            });
        }
        let mut bits = self.0.clone();
        bits[i] = !bits[i];
        Ok(DiscreteProfile(bits))
    }
}

impl ActionProfile for DiscreteProfile {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn action(&self, i: usize) -> Rat {
        Rat::from(self.0[i])
    }
}

impl fmt::Display for DiscreteProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for DiscreteProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DiscreteProfile({self})")
    }
}

impl Serialize for DiscreteProfile {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid profile `{0}`: expected a string of 0/1 characters")]
pub struct ParseProfileError(String);

impl FromStr for DiscreteProfile {
    type Err = ParseProfileError;

    /// Accepts `0110` or `0,1,1,0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits: Result<Vec<bool>, _> = s
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ParseProfileError(s.to_string())),
            })
            .collect();
        match bits {
            Ok(b) if !b.is_empty() => Ok(DiscreteProfile(b)),
            _ => Err(ParseProfileError(s.to_string())),
        }
    }
}

/// Partial opening levels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ContinuousProfile(Vec<Rat>);

impl ContinuousProfile {
    pub fn new(actions: Vec<Rat>) -> Result<Self, GameError> {
        for (player, a) in actions.iter().enumerate() {
            if a.is_negative() || *a > Rat::one() {
                return Err(GameError::ActionOutOfRange {
                    player,
                    value: a.clone(),
                });
            }
        }
        Ok(ContinuousProfile(actions))
    }

    pub fn zeros(k: usize) -> Self {
        ContinuousProfile(vec![Rat::zero(); k])
    }

    pub fn actions(&self) -> &[Rat] {
        &self.0
    }

    /// Copy with player `i` moved to `value` (which must lie in `[0, 1]`).
    pub fn with_action(&self, i: usize, value: Rat) -> ContinuousProfile {
        debug_assert!(!value.is_negative() && value <= Rat::one());
        let mut actions = self.0.clone();
        actions[i] = value;
        ContinuousProfile(actions)
    }
}

impl From<&DiscreteProfile> for ContinuousProfile {
    fn from(p: &DiscreteProfile) -> Self {
        ContinuousProfile(p.bits().iter().map(|&b| Rat::from(b)).collect())
    }
}

impl ActionProfile for ContinuousProfile {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn action(&self, i: usize) -> Rat {
        self.0[i].clone()
    }
}

impl fmt::Display for ContinuousProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(")")
    }
}

/// Iterates all `2^k` discrete profiles in mask order.
pub fn all_profiles(k: usize) -> impl Iterator<Item = DiscreteProfile> {
    (0..1u64 << k).map(move |m| DiscreteProfile::from_mask(m, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_errors() {
        assert!(RaceGame::from_ints(&[1, 1], &[&[0, 0], &[0, 0]], &[0, 0]).is_ok());
        assert_eq!(
            RaceGame::from_ints(&[1, 1], &[&[1, 0], &[0, 0]], &[0, 0]),
            Err(GameError::NonzeroDiagonal { player: 0 })
        );
        assert_eq!(
            RaceGame::from_ints(&[1], &[&[0]], &[0]),
            Err(GameError::PlayerCountTooSmall(1))
        );
        assert!(matches!(
            RaceGame::from_ints(&[1, 1], &[&[0, 0], &[0, 0]], &[0]),
            Err(GameError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            RaceGame::from_ints(&[1, 1], &[&[0, 0], &[0]], &[0, 0]),
            Err(GameError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn progress_examples() {
        let g = RaceGame::from_ints(&[1, 1], &[&[0, 0], &[0, 0]], &[0, 0]).unwrap();
        let a: DiscreteProfile = "10".parse().unwrap();
        assert_eq!(g.progress(&a).unwrap(), vec![Rat::one(), Rat::zero()]);
        assert_eq!(g.utility(&a, 0).unwrap(), Rat::one());
        assert_eq!(g.utility(&a, 1).unwrap(), Rat::integer(-1));

        let g = RaceGame::from_ints(&[2, 2], &[&[0, 1], &[1, 0]], &[0, 0]).unwrap();
        let a = DiscreteProfile::all_open(2);
        assert_eq!(g.progress(&a).unwrap(), vec![Rat::integer(3), Rat::integer(3)]);
        assert_eq!(g.utilities(&a).unwrap(), vec![Rat::zero(), Rat::zero()]);

        let g = RaceGame::from_ints(&[3, -1, 2], &[&[0, 1, 1], &[2, 0, 0], &[0, 5, 0]], &[7, 8, 9]).unwrap();
        assert_eq!(
            g.progress(&DiscreteProfile::all_closed(3)).unwrap(),
            g.baselines().to_vec()
        );
        assert!(matches!(
            g.utility(&DiscreteProfile::all_closed(3), 3),
            Err(GameError::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            g.progress(&DiscreteProfile::all_closed(2)),
            Err(GameError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn interaction_matrix_examples() {
        let g = RaceGame::from_ints(&[1, 2], &[&[0, 3], &[5, 0]], &[0, 0]).unwrap();
        let d = g.interaction_matrix();
        assert_eq!(
            d,
            vec![
                vec![Rat::integer(1), Rat::integer(5)],
                vec![Rat::integer(3), Rat::integer(2)]
            ]
        );
        let g = RaceGame::from_ints(&[4, -2], &[&[0, 0], &[0, 0]], &[1, 1]).unwrap();
        assert_eq!(
            g.interaction_matrix(),
            vec![vec![Rat::integer(4), Rat::zero()], vec![Rat::zero(), Rat::integer(-2)]]
        );
    }

    #[test]
    fn flip_examples() {
        let a: DiscreteProfile = "000".parse().unwrap();
        assert_eq!(a.flip(1).unwrap().to_string(), "010");
        assert_eq!(a.flip(1).unwrap().flip(1).unwrap(), a);
        let b: DiscreteProfile = "11".parse().unwrap();
        assert_eq!(b.flip(0).unwrap().to_string(), "01");
        assert!(b.flip(2).is_err());
    }

    #[test]
    fn continuous_profile_bounds() {
        assert!(ContinuousProfile::new(vec![Rat::new(1, 2), Rat::one()]).is_ok());
        assert!(ContinuousProfile::new(vec![Rat::new(3, 2)]).is_err());
        assert!(ContinuousProfile::new(vec![Rat::new(-1, 2)]).is_err());
    }

    #[test]
    fn discrete_and_continuous_progress_agree() {
        let g = RaceGame::from_ints(&[3, -1, 2], &[&[0, 1, 1], &[2, 0, 0], &[0, 5, 0]], &[7, 8, 9]).unwrap();
        for p in all_profiles(3) {
            assert_eq!(
                g.progress(&p).unwrap(),
                g.progress(&ContinuousProfile::from(&p)).unwrap()
            );
        }
    }
}

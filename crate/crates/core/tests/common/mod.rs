#![allow(dead_code)]

use oss_race::game::all_profiles;
use oss_race::sat::CnfFormula;
use oss_race::{ContinuousProfile, DiscreteProfile, RaceGame, Rat};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Integer parameters drawn uniformly from `[-5, 5]`.
pub fn random_int_game(rng: &mut ChaCha8Rng, k: usize) -> RaceGame {
    let mut draw = || Rat::integer(rng.gen_range(-5..=5));
    let delta = (0..k).map(|_| draw()).collect();
    let spill = (0..k)
        .map(|i| (0..k).map(|j| if i == j { Rat::zero() } else { draw() }).collect())
        .collect();
    let d = (0..k).map(|_| draw()).collect();
    RaceGame::new(delta, spill, d).unwrap()
}

/// Small-denominator rationals in `[-5, 5]`, with zeros over-represented so ties occur.
pub fn random_rat_game(rng: &mut ChaCha8Rng, k: usize) -> RaceGame {
    let mut draw = || {
        if rng.gen_bool(0.2) {
            Rat::zero()
        } else {
            Rat::new(rng.gen_range(-20..=20), rng.gen_range(1..=4))
        }
    };
    let delta = (0..k).map(|_| draw()).collect();
    let spill = (0..k)
        .map(|i| (0..k).map(|j| if i == j { Rat::zero() } else { draw() }).collect())
        .collect();
    let d = (0..k).map(|_| draw()).collect();
    RaceGame::new(delta, spill, d).unwrap()
}

pub fn random_profile(rng: &mut ChaCha8Rng, k: usize) -> DiscreteProfile {
    DiscreteProfile::new((0..k).map(|_| rng.gen_bool(0.5)).collect())
}

pub fn random_continuous_profile(rng: &mut ChaCha8Rng, k: usize) -> ContinuousProfile {
    ContinuousProfile::new(
        (0..k)
            .map(|_| match rng.gen_range(0..4) {
                0 => Rat::zero(),
                1 => Rat::one(),
                _ => Rat::new(rng.gen_range(0..=12), 12),
            })
            .collect(),
    )
    .unwrap()
}

pub fn random_formula(rng: &mut ChaCha8Rng, vars: usize, clauses: usize) -> CnfFormula {
    let cs = (0..clauses)
        .map(|_| {
            let mut c = [0i64; 3];
            for l in &mut c {
                let v = rng.gen_range(1..=vars as i64);
                *l = if rng.gen_bool(0.5) { v } else { -v };
            }
            c
        })
        .collect();
    CnfFormula::new(vars, cs).unwrap()
}

/// Every profile of `game` together with its progress vector.
pub fn progress_table(game: &RaceGame) -> Vec<(DiscreteProfile, Vec<Rat>)> {
    all_profiles(game.players())
        .map(|p| {
            let mu = game.progress(&p).unwrap();
            (p, mu)
        })
        .collect()
}

pub fn rats(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| Rat::integer(x)).collect()
}

mod common;

use common::*;
use oss_race::game::all_profiles;
use oss_race::{ContinuousProfile, RaceGame, Rat};

/// Progress computed straight from the player-by-player sum.
fn naive_progress(g: &RaceGame, a: &[Rat]) -> Vec<Rat> {
    let k = g.players();
    (0..k)
        .map(|i| {
            let mut mu: Rat = g.delta(i) * &a[i] + g.baseline(i);
            for (j, aj) in a.iter().enumerate() {
                if j != i {
                    mu += g.spill(j, i) * aj;
                }
            }
            mu
        })
        .collect()
}

#[test]
fn spec_examples() {
    let g = RaceGame::from_ints(&[2, 2], &[&[0, 1], &[1, 0]], &[0, 0]).unwrap();
    let a: oss_race::DiscreteProfile = "11".parse().unwrap();
    assert_eq!(g.progress(&a).unwrap(), rats(&[3, 3]));
    assert_eq!(g.utilities(&a).unwrap(), rats(&[0, 0]));
    let g = RaceGame::from_ints(&[1, 2], &[&[0, 3], &[5, 0]], &[0, 0]).unwrap();
    assert_eq!(g.interaction_matrix(), vec![rats(&[1, 5]), rats(&[3, 2])]);
}

#[test]
fn progress_matches_matrix_form_and_naive_sum() {
    let mut r = rng(11);
    for _ in 0..300 {
        let k = 2 + (r.gen_range(0..6) as usize);
        let g = random_rat_game(&mut r, k);
        let dm = g.interaction_matrix();
        let a = random_continuous_profile(&mut r, k);
        let mu = g.progress(&a).unwrap();
        assert_eq!(mu, naive_progress(&g, a.actions()));
        for i in 0..k {
            let row: Rat = (0..k).map(|j| &dm[i][j] * &a.actions()[j]).sum();
            assert_eq!(mu[i], row + g.baseline(i));
        }
    }
}

#[test]
fn utility_structure() {
    let mut r = rng(12);
    for _ in 0..200 {
        let k = 2 + (r.gen_range(0..5) as usize);
        let g = random_rat_game(&mut r, k);
        let shift = Rat::new(r.gen_range(-30..30), 7);
        let shifted = g.shifted(&shift);
        for a in all_profiles(k) {
            let mu = g.progress(&a).unwrap();
            let u = g.utilities(&a).unwrap();
            let top = mu.iter().max().unwrap();
            for i in 0..k {
                if &mu[i] == top {
                    assert!(!u[i].is_negative());
                } else {
                    assert!(!u[i].is_positive());
                }
            }
            if k == 2 {
                assert_eq!(&u[0] + &u[1], Rat::zero());
            }
            assert_eq!(shifted.utilities(&a).unwrap(), u);
            assert_eq!(g.progress(&ContinuousProfile::from(&a)).unwrap(), mu);
        }
    }
}

#[test]
fn flip_is_an_involution() {
    let mut r = rng(13);
    for _ in 0..100 {
        let k = 1 + r.gen_range(0..10) as usize;
        let a = random_profile(&mut r, k);
        for i in 0..k {
            let b = a.flip(i).unwrap();
            assert_ne!(a, b);
            assert_eq!(b.flip(i).unwrap(), a);
        }
        assert!(a.flip(k).is_err());
    }
}

use rand::Rng;

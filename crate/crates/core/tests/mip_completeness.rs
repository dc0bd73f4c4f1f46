//! Branch-and-bound against brute force over every binary pattern.

mod common;

use std::collections::BTreeSet;

use common::*;
use oss_race::mip::*;
use oss_race::Rat;
use rand::Rng;

struct Instance {
    problem: MipProblem,
    binaries: Vec<VarId>,
    continuous: Vec<VarId>,
}

fn random_instance(r: &mut rand_chacha::ChaCha8Rng, nb: std::ops::RangeInclusive<usize>) -> Instance {
    let mut problem = MipProblem::new();
    let nb = r.gen_range(nb);
    let nc = r.gen_range(0..=3);
    let binaries: Vec<VarId> = (0..nb)
        .map(|i| problem.add_binary(format!("b{i}"), r.gen_range(0..3)))
        .collect();
    let continuous: Vec<VarId> = (0..nc)
        .map(|i| {
            let lo = r.gen_bool(0.7).then(|| Rat::integer(r.gen_range(-4..=0)));
            let hi = r.gen_bool(0.7).then(|| Rat::integer(r.gen_range(0..=4)));
            problem.add_continuous(format!("x{i}"), lo, hi)
        })
        .collect();
    let all: Vec<VarId> = binaries.iter().chain(&continuous).copied().collect();
    for c in 0..r.gen_range(1..=8) {
        let mut e = LinExpr::new();
        for _ in 0..r.gen_range(1..=4) {
            e.add_term(
                Rat::new(r.gen_range(-4..=4), r.gen_range(1..=2)),
                all[r.gen_range(0..all.len())],
            );
        }
        let sense = match r.gen_range(0..4) {
            0 => Sense::Eq,
            1 => Sense::Le,
            _ => Sense::Ge,
        };
        let rhs = LinExpr::constant(Rat::new(r.gen_range(-4..=4), r.gen_range(1..=2)));
        problem.add_constraint(e, sense, rhs, format!("c{c}"));
    }
    Instance {
        problem,
        binaries,
        continuous,
    }
}

/// Feasible binary patterns, each checked with the LP over the continuous part.
fn brute_force(inst: &Instance) -> BTreeSet<Vec<bool>> {
    let nb = inst.binaries.len();
    let col = |v: VarId| inst.continuous.iter().position(|&c| c == v);
    let mut out = BTreeSet::new();
    for mask in 0u32..1 << nb {
        let bits: Vec<bool> = (0..nb).map(|i| mask >> i & 1 == 1).collect();
        let value = |v: VarId| inst.binaries.iter().position(|&b| b == v).map(|i| bits[i]);
        let mut lp = LpProblem::with_vars(inst.continuous.len());
        for (j, &c) in inst.continuous.iter().enumerate() {
            lp.lower[j] = inst.problem.var(c).lower.clone();
            lp.upper[j] = inst.problem.var(c).upper.clone();
        }
        for row in inst.problem.constraints() {
            let mut rhs = row.rhs.clone();
            let mut coefs = Vec::new();
            for (c, v) in &row.terms {
                match value(*v) {
                    Some(true) => rhs -= c,
                    Some(false) => {}
                    None => coefs.push((col(*v).unwrap(), c.clone())),
                }
            }
            lp.add_row(coefs, row.sense, rhs);
        }
        if matches!(lp_feasible(&lp), LpOutcome::Feasible(_)) {
            out.insert(bits);
        }
    }
    out
}

#[test]
fn solver_is_complete_on_small_instances() {
    let mut r = rng(41);
    let mut feasible = 0;
    for n in 0..400 {
        let inst = random_instance(&mut r, 1..=10);
        let truth = brute_force(&inst);
        for lp_relaxation in [false, true] {
            let cfg = SolverConfig {
                node_budget: 100_000,
                lp_relaxation,
            };
            let sol = solve_feasibility(&inst.problem, &cfg).unwrap();
            assert_eq!(sol.is_some(), !truth.is_empty(), "instance {n}");
            if let Some(s) = sol {
                inst.problem.check(&s).unwrap();
                let bits: Vec<bool> = inst.binaries.iter().map(|&b| s.is_one(b)).collect();
                assert!(truth.contains(&bits));
            }
            let found = enumerate_solutions(&inst.problem, &inst.binaries, usize::MAX, &cfg).unwrap();
            let set: BTreeSet<Vec<bool>> = found.patterns.iter().cloned().collect();
            assert_eq!(set.len(), found.patterns.len(), "patterns repeat");
            assert_eq!(set, truth, "instance {n}");
        }
        feasible += usize::from(!truth.is_empty());
    }
    assert!(feasible > 80 && feasible < 360, "{feasible} feasible instances");
}

#[test]
fn enumeration_is_complete_up_to_sixteen_binaries() {
    let mut r = rng(43);
    let cfg = SolverConfig::default();
    let mut largest = 0;
    for n in 0..24 {
        let inst = random_instance(&mut r, 12..=16);
        let truth = brute_force(&inst);
        let found = enumerate_solutions(&inst.problem, &inst.binaries, usize::MAX, &cfg).unwrap();
        assert!(!found.cap_reached);
        let set: BTreeSet<Vec<bool>> = found.patterns.iter().cloned().collect();
        assert_eq!(set.len(), found.patterns.len(), "patterns repeat");
        assert_eq!(set, truth, "instance {n}");
        largest = largest.max(truth.len());
    }
    assert!(largest > 1000, "largest pattern set {largest}");
}

#[test]
fn spec_examples() {
    let cfg = SolverConfig::default();
    let mut p = MipProblem::new();
    let b = p.add_binary("b", 0);
    p.add_constraint(LinExpr::var(b), Sense::Ge, LinExpr::constant(Rat::new(1, 2)), "half");
    assert!(solve_feasibility(&p, &cfg).unwrap().unwrap().is_one(b));

    let mut p = MipProblem::new();
    let b1 = p.add_binary("b1", 0);
    let b2 = p.add_binary("b2", 0);
    p.add_constraint(
        LinExpr::var(b1).plus(&LinExpr::var(b2)),
        Sense::Eq,
        LinExpr::constant(Rat::one()),
        "sum",
    );
    p.add_constraint(LinExpr::var(b1), Sense::Eq, LinExpr::var(b2), "same");
    assert!(solve_feasibility(&p, &cfg).unwrap().is_none());

    let mut p = MipProblem::new();
    let b = p.add_binary("b", 0);
    let e = enumerate_solutions(&p, &[b], 10, &cfg).unwrap();
    assert_eq!(
        e.patterns.into_iter().collect::<BTreeSet<_>>(),
        [vec![false], vec![true]].into()
    );
}

#[test]
fn node_budget_is_reported() {
    // 12 binaries summing to 1/2 of an odd count: infeasible, needs a deep search without relaxations.
    let mut p = MipProblem::new();
    let mut e = LinExpr::new();
    for i in 0..12 {
        e.add_term(Rat::integer(2), p.add_binary(format!("b{i}"), 0));
    }
    p.add_constraint(e, Sense::Eq, LinExpr::constant(Rat::integer(13)), "odd");
    let cfg = SolverConfig {
        node_budget: 5,
        lp_relaxation: false,
    };
    assert!(matches!(
        solve_feasibility(&p, &cfg),
        Err(MipError::NodeBudgetExceeded { budget: 5 })
    ));
}

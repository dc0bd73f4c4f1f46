//! WebAssembly entry points for the static demo page in `www/`.
//!
//! Every export takes a scenario in the CLI's JSON format and returns a JSON
//! document; rationals are exact `p/q` strings, with `f64` copies only where
//! the page needs to plot. The `*_json` functions hold the logic so they can
//! run natively.

use oss_race::continuous::{best_response_dynamics, own_action_utility, DynamicsTrace};
use oss_race::continuous_mip::{solve_continuous_pne, ContinuousVariant};
use oss_race::discrete::{closed_source_deviators, is_pure_nash_definition, social_welfare, welfare_maximizers};
use oss_race::game::all_profiles;
use oss_race::mip::SolverConfig;
use oss_race::report::{continuous_witness, ContinuousWitness};
use oss_race::scenario::{parse_scenario, Scenario};
use oss_race::{ContinuousProfile, Rat};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Largest game the discrete table will scan.
pub const MAX_TABLE_PLAYERS: usize = 10;
const MAX_SAMPLES: usize = 2000;
const NODE_BUDGET: u64 = 200_000;

fn scenario(text: &str) -> Result<Scenario, String> {
    parse_scenario(text).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Parses `"1/2, 0, 0.25"` into a profile of the game's length.
fn parse_actions(text: &str, players: usize) -> Result<ContinuousProfile, String> {
    let actions = text
        .split(',')
        .map(|s| s.trim().parse::<Rat>().map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    if actions.len() != players {
        return Err(format!("expected {players} actions, got {}", actions.len()));
    }
    ContinuousProfile::new(actions).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Sample {
    t: f64,
    u: f64,
}

#[derive(Serialize)]
struct CurveReport {
    player: String,
    breakpoints: Vec<Rat>,
    slopes: Vec<Rat>,
    optimal_value: Rat,
    optimizers: Vec<(Rat, Rat)>,
    /// Exact values at 0, every breakpoint and 1.
    vertices: Vec<(Rat, Rat)>,
    samples: Vec<Sample>,
}

pub fn own_action_curve_json(
    scenario_text: &str,
    actions: &str,
    player: usize,
    samples: usize,
) -> Result<String, String> {
    let s = scenario(scenario_text)?;
    let profile = parse_actions(actions, s.game.players())?;
    let f = own_action_utility(&s.game, &profile, player).map_err(|e| e.to_string())?;
    let br = oss_race::continuous::best_response_of(&f);
    let n = samples.clamp(2, MAX_SAMPLES);
    let samples = (0..=n)
        .map(|m| {
            let t = Rat::new(m as i64, n as i64);
            Sample {
                t: t.to_f64(),
                u: f.eval(&t).to_f64(),
            }
        })
        .collect();
    let vertices = std::iter::once(Rat::zero())
        .chain(f.breakpoints.iter().cloned())
        .chain(std::iter::once(Rat::one()))
        .map(|t| {
            let u = f.eval(&t);
            (t, u)
        })
        .collect();
    to_json(&CurveReport {
        player: s.names[player].clone(),
        breakpoints: f.breakpoints.clone(),
        slopes: f.slopes.clone(),
        optimal_value: br.optimal_value.clone(),
        optimizers: br.optimizers.iter().map(|iv| (iv.lo.clone(), iv.hi.clone())).collect(),
        vertices,
        samples,
    })
}

#[derive(Serialize)]
struct TableRow {
    profile: String,
    welfare: Rat,
    equilibrium: bool,
    slacks: Vec<Rat>,
    welfare_maximizer: bool,
}

#[derive(Serialize)]
struct TableReport {
    players: Vec<String>,
    rows: Vec<TableRow>,
    deviators_from_all_closed: Vec<String>,
}

pub fn discrete_table_json(scenario_text: &str) -> Result<String, String> {
    let s = scenario(scenario_text)?;
    let k = s.game.players();
    if k > MAX_TABLE_PLAYERS {
        return Err(format!("{k} players; the table scans at most {MAX_TABLE_PLAYERS}"));
    }
    let maximizers = welfare_maximizers(&s.game);
    let rows = all_profiles(k)
        .map(|p| {
            let verdict = is_pure_nash_definition(&s.game, &p).map_err(|e| e.to_string())?;
            Ok(TableRow {
                profile: p.to_string(),
                welfare: social_welfare(&s.game, &p).map_err(|e| e.to_string())?,
                equilibrium: verdict.is_equilibrium,
                slacks: verdict.player_slacks,
                welfare_maximizer: maximizers.contains(&p),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    let deviators = closed_source_deviators(&s.game).map_err(|e| e.to_string())?;
    to_json(&TableReport {
        players: s.names.clone(),
        rows,
        deviators_from_all_closed: deviators.into_iter().map(|i| s.names[i].clone()).collect(),
    })
}

#[derive(Serialize)]
struct ContinuousReport {
    variant: &'static str,
    equilibrium: Option<ContinuousWitness>,
    dynamics: DynamicsTrace,
}

pub fn continuous_equilibrium_json(
    scenario_text: &str,
    tie_complete: bool,
    max_rounds: usize,
) -> Result<String, String> {
    let s = scenario(scenario_text)?;
    let (variant, name) = if tie_complete {
        (ContinuousVariant::TieComplete, "tie-complete")
    } else {
        (ContinuousVariant::PaperFaithful, "paper")
    };
    let config = SolverConfig {
        node_budget: NODE_BUDGET,
        lp_relaxation: true,
    };
    let found = solve_continuous_pne(&s.game, variant, &config).map_err(|e| e.to_string())?;
    let equilibrium = found
        .map(|p| continuous_witness(&s.game, &p))
        .transpose()
        .map_err(|e| e.to_string())?;
    let start = ContinuousProfile::zeros(s.game.players());
    let dynamics = best_response_dynamics(&s.game, &start, max_rounds.min(500)).map_err(|e| e.to_string())?;
    to_json(&ContinuousReport {
        variant: name,
        equilibrium,
        dynamics,
    })
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

/// Own-action utility of `player` with everyone else held at `actions`.
#[wasm_bindgen(js_name = ownActionCurve)]
pub fn own_action_curve(scenario: &str, actions: &str, player: usize, samples: usize) -> Result<String, JsValue> {
    js(own_action_curve_json(scenario, actions, player, samples))
}

/// Welfare, slacks and equilibrium flags for every 0/1 profile.
#[wasm_bindgen(js_name = discreteTable)]
pub fn discrete_table(scenario: &str) -> Result<String, JsValue> {
    js(discrete_table_json(scenario))
}

/// A verified continuous equilibrium and best-response dynamics from all-closed.
#[wasm_bindgen(js_name = continuousEquilibrium)]
pub fn continuous_equilibrium(scenario: &str, tie_complete: bool, max_rounds: usize) -> Result<String, JsValue> {
    js(continuous_equilibrium_json(scenario, tie_complete, max_rounds))
}

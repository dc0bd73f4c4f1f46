//! Report sections shared by the CLI and the browser demo.
//!
//! A report is an ordered JSON object; the text form is rendered from the
//! same value, so both carry identical facts. Rationals appear as exact
//! strings.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::continuous::{best_response_set, is_continuous_pure_nash, BestResponseSet};
use crate::discrete::{
    closed_source_deviation_gain, is_pure_nash_definition, lemma1_check, sufficient_condition_check, welfare_marginal,
    NashVerdict, WelfareReport,
};
use crate::game::{ContinuousProfile, DiscreteProfile, GameError, RaceGame};
use crate::rational::Rat;

#[derive(Debug, Clone, Serialize)]
pub struct PlayerEcho {
    pub name: String,
    pub delta: Rat,
    pub baseline: Rat,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputEcho {
    pub players: Vec<PlayerEcho>,
    /// Row = source, column = target.
    pub spill: Vec<Vec<Rat>>,
}

impl InputEcho {
    pub fn new(names: &[String], game: &RaceGame) -> Self {
        InputEcho {
            players: (0..game.players())
                .map(|i| PlayerEcho {
                    name: names[i].clone(),
                    delta: game.delta(i).clone(),
                    baseline: game.baseline(i).clone(),
                })
                .collect(),
            spill: game.spill_matrix().to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumReport {
    pub command: String,
    fields: Map<String, Value>,
}

impl EquilibriumReport {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), Value::String(command.into()));
        EquilibriumReport {
            command: command.into(),
            fields,
        }
    }

    pub fn with_input(mut self, names: &[String], game: &RaceGame) -> Self {
        self.push("input", &InputEcho::new(names, game));
        self
    }

    pub fn push<T: Serialize + ?Sized>(&mut self, key: &str, section: &T) -> &mut Self {
        let v = serde_json::to_value(section).expect("report sections serialize");
        self.fields.insert(key.into(), v);
        self
    }

    pub fn section(&self, key: &str) -> Option<&Value> {
        self.fields.get(key)
    }

    pub fn to_value(&self) -> Value {
        Value::Object(self.fields.clone())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        render(&mut out, &self.to_value(), 0);
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            let parts: Vec<String> = items.iter().map(|x| scalar(x).expect("scalar")).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        _ => None,
    }
}

fn render(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => writeln!(out, "{pad}{k}: {s}").expect("string write"),
                    None => {
                        writeln!(out, "{pad}{k}:").expect("string write");
                        render(out, x, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for x in items {
                match scalar(x) {
                    Some(s) => writeln!(out, "{pad}- {s}").expect("string write"),
                    None => {
                        writeln!(out, "{pad}-").expect("string write");
                        render(out, x, indent + 1);
                    }
                }
            }
        }
        other => writeln!(out, "{pad}{}", scalar(other).expect("scalar")).expect("string write"),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProfileAnalysis {
    pub profile: DiscreteProfile,
    pub progress: Vec<Rat>,
    pub utilities: Vec<Rat>,
    pub is_equilibrium: bool,
    pub slacks: Vec<Rat>,
    /// Best-competitor test agrees with the definition.
    pub lemma1_agrees: bool,
    pub sufficient_condition: bool,
}

pub fn analyze_profile(game: &RaceGame, a: &DiscreteProfile) -> Result<ProfileAnalysis, GameError> {
    let def = is_pure_nash_definition(game, a)?;
    let lemma = lemma1_check(game, a)?;
    Ok(ProfileAnalysis {
        profile: a.clone(),
        progress: game.progress(a)?,
        utilities: game.utilities(a)?,
        is_equilibrium: def.is_equilibrium,
        lemma1_agrees: lemma == def,
        slacks: def.player_slacks,
        sufficient_condition: sufficient_condition_check(game, a)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumEntry {
    pub profile: DiscreteProfile,
    pub slacks: Vec<Rat>,
    pub strict: bool,
}

pub fn equilibrium_entry(game: &RaceGame, a: &DiscreteProfile) -> Result<EquilibriumEntry, GameError> {
    let NashVerdict { player_slacks, .. } = is_pure_nash_definition(game, a)?;
    Ok(EquilibriumEntry {
        profile: a.clone(),
        strict: player_slacks.iter().all(Rat::is_positive),
        slacks: player_slacks,
    })
}

pub fn equilibria_section(
    game: &RaceGame,
    set: &BTreeSet<DiscreteProfile>,
) -> Result<Vec<EquilibriumEntry>, GameError> {
    set.iter().map(|a| equilibrium_entry(game, a)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationEntry {
    pub player: String,
    /// `u_i` gained by opening alone from the all-closed profile.
    pub gain: Rat,
    pub deviates: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeviationSection {
    pub players: Vec<DeviationEntry>,
    pub deviators: Vec<String>,
    pub all_closed_is_equilibrium: bool,
}

pub fn deviation_section(names: &[String], game: &RaceGame) -> Result<DeviationSection, GameError> {
    let mut players = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let gain = closed_source_deviation_gain(game, i)?;
        players.push(DeviationEntry {
            player: name.clone(),
            deviates: gain.is_positive(),
            gain,
        });
    }
    let all_closed = DiscreteProfile::all_closed(game.players());
    Ok(DeviationSection {
        deviators: players
            .iter()
            .filter(|p| p.deviates)
            .map(|p| p.player.clone())
            .collect(),
        players,
        all_closed_is_equilibrium: is_pure_nash_definition(game, &all_closed)?.is_equilibrium,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WelfareSection {
    /// `delta_i + sum_j spill[i][j]`, the welfare change from opening `i`.
    pub marginals: Vec<Rat>,
    #[serde(flatten)]
    pub report: WelfareReport,
}

pub fn welfare_section(game: &RaceGame, report: WelfareReport) -> WelfareSection {
    WelfareSection {
        marginals: (0..game.players()).map(|i| welfare_marginal(game, i)).collect(),
        report,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuousWitness {
    pub profile: ContinuousProfile,
    pub utilities: Vec<Rat>,
    pub gaps: Vec<Rat>,
    pub best_responses: Vec<BestResponseSet>,
}

pub fn continuous_witness(game: &RaceGame, profile: &ContinuousProfile) -> Result<ContinuousWitness, GameError> {
    let verdict = is_continuous_pure_nash(game, profile)?;
    Ok(ContinuousWitness {
        profile: profile.clone(),
        utilities: game.utilities(profile)?,
        gaps: verdict.gaps,
        best_responses: (0..game.players())
            .map(|i| best_response_set(game, profile, i))
            .collect::<Result<_, _>>()?,
    })
}

//! JSON scenario files.
//!
//! ```json
//! {
//!   "players": [
//!     {"name": "lab-a", "delta": 1, "baseline": 0},
//!     {"name": "lab-b", "delta": "1/2", "baseline": {"s": 2, "internal_delta": 0.5}}
//!   ],
//!   "spill": {"lab-a": {"lab-b": 3}},
//!   "options": {"enumeration_cap": 20, "node_budget": 1000000}
//! }
//! ```
//!
//! Numbers may be JSON integers, decimals, or strings holding an integer,
//! decimal or `p/q`; all are read exactly. `spill` is either a `k x k`
//! matrix (row = source) or a map `source -> target -> value` with missing
//! entries zero. A baseline `{s, internal_delta}` is folded to `s + internal_delta`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use crate::game::{GameError, RaceGame};
use crate::rational::{ParseRatError, Rat};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("{location}: number `{text}` is not representable: {source}")]
    UnrepresentableNumber {
        location: String,
        text: String,
        #[source]
        source: ParseRatError,
    },
}

/// A number literal as written, before exact parsing.
#[derive(Debug, Clone)]
struct Literal(String);

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => Ok(Literal(n.to_string())),
            Value::String(s) => Ok(Literal(s)),
            other => Err(serde::de::Error::custom(format!(
                "expected a number or a number string, found {}",
                kind(&other)
            ))),
        }
    }
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

impl Literal {
    fn exact(&self, location: impl FnOnce() -> String) -> Result<Rat, ScenarioError> {
        self.0.parse().map_err(|source| ScenarioError::UnrepresentableNumber {
            location: location(),
            text: self.0.clone(),
            source,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawBaseline {
    Direct(Literal),
    Split { s: Literal, internal_delta: Literal },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlayer {
    name: String,
    delta: Literal,
    baseline: RawBaseline,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSpill {
    Matrix(Vec<Vec<Literal>>),
    Map(BTreeMap<String, BTreeMap<String, Literal>>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOptions {
    pub enumeration_cap: Option<usize>,
    pub node_budget: Option<u64>,
    /// Player names; `solve-discrete --nontrivial` requires one of them open.
    pub nontrivial_players: Option<Vec<String>>,
    pub max_rounds: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    players: Vec<RawPlayer>,
    #[serde(default)]
    spill: Option<RawSpill>,
    #[serde(default)]
    options: ScenarioOptions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub names: Vec<String>,
    pub game: RaceGame,
    pub options: ScenarioOptions,
}

impl Scenario {
    pub fn player_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Indices named by `options.nontrivial_players`, or every player.
    pub fn nontrivial_players(&self) -> Result<Vec<usize>, ScenarioError> {
        match &self.options.nontrivial_players {
            None => Ok((0..self.names.len()).collect()),
            Some(list) => list
                .iter()
                .map(|n| {
                    self.player_index(n)
                        .ok_or_else(|| ScenarioError::Validation(format!("unknown player `{n}` in nontrivial_players")))
                })
                .collect(),
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: strip_position(&e.to_string()),
    })?;
    let names: Vec<String> = raw.players.iter().map(|p| p.name.clone()).collect();
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(ScenarioError::Validation(format!("duplicate player name `{n}`")));
        }
    }
    let k = names.len();
    let mut delta = Vec::with_capacity(k);
    let mut baseline = Vec::with_capacity(k);
    for p in &raw.players {
        delta.push(p.delta.exact(|| format!("players.{}.delta", p.name))?);
        baseline.push(match &p.baseline {
            RawBaseline::Direct(d) => d.exact(|| format!("players.{}.baseline", p.name))?,
            RawBaseline::Split { s, internal_delta } => {
                s.exact(|| format!("players.{}.baseline.s", p.name))?
                    + internal_delta.exact(|| format!("players.{}.baseline.internal_delta", p.name))?
            }
        });
    }
    let spill = match raw.spill {
        None => vec![vec![Rat::zero(); k]; k],
        Some(RawSpill::Matrix(rows)) => rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| v.exact(|| format!("spill[{i}][{j}]")))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(RawSpill::Map(map)) => {
            let mut m = vec![vec![Rat::zero(); k]; k];
            let index = |n: &str| {
                names
                    .iter()
                    .position(|x| x == n)
                    .ok_or_else(|| ScenarioError::Validation(format!("spill refers to unknown player `{n}`")))
            };
            for (src, targets) in &map {
                let i = index(src)?;
                for (tgt, v) in targets {
                    let j = index(tgt)?;
                    m[i][j] = v.exact(|| format!("spill.{src}.{tgt}"))?;
                }
            }
            m
        }
    };
    let game = RaceGame::new(delta, spill, baseline)?;
    Ok(Scenario {
        names,
        game,
        options: raw.options,
    })
}

/// serde_json appends " at line L column C"; the position is reported separately.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(pos) => msg[..pos].to_string(),
        None => msg.to_string(),
    }
}

fn literal_value(r: &Rat) -> Value {
    if r.is_integer() {
        Value::Number(r.to_string().parse().expect("integer literal"))
    } else {
        Value::String(r.to_string())
    }
}

/// Scenario text for `game`; integers are written as JSON numbers, other values as `"p/q"`.
pub fn write_scenario(names: &[String], game: &RaceGame, options: &ScenarioOptions) -> String {
    let k = game.players();
    let players: Vec<Value> = (0..k)
        .map(|i| {
            serde_json::json!({
                "name": names[i],
                "delta": literal_value(game.delta(i)),
                "baseline": literal_value(game.baseline(i)),
            })
        })
        .collect();
    let spill: Vec<Value> = (0..k)
        .map(|i| Value::Array((0..k).map(|j| literal_value(game.spill(i, j))).collect()))
        .collect();
    let mut root = serde_json::json!({ "players": players, "spill": spill });
    let mut opts = serde_json::Map::new();
    if let Some(c) = options.enumeration_cap {
        opts.insert("enumeration_cap".into(), c.into());
    }
    if let Some(b) = options.node_budget {
        opts.insert("node_budget".into(), b.into());
    }
    if let Some(list) = &options.nontrivial_players {
        opts.insert("nontrivial_players".into(), list.clone().into());
    }
    if let Some(r) = options.max_rounds {
        opts.insert("max_rounds".into(), r.into());
    }
    if !opts.is_empty() {
        root["options"] = Value::Object(opts);
    }
    let mut out = serde_json::to_string_pretty(&root).expect("json values serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_player_scenario() {
        let s = parse_scenario(
            r#"{"players": [{"name": "a", "delta": 1, "baseline": 0},
                            {"name": "b", "delta": 1, "baseline": 0}]}"#,
        )
        .unwrap();
        assert_eq!(
            s.game,
            RaceGame::from_ints(&[1, 1], &[&[0, 0], &[0, 0]], &[0, 0]).unwrap()
        );
    }

    #[test]
    fn folded_baseline_and_fraction() {
        let s = parse_scenario(
            r#"{"players": [{"name": "a", "delta": 0.1, "baseline": {"s": 2, "internal_delta": 3}},
                            {"name": "b", "delta": "-7/3", "baseline": "1e-2"}],
                "spill": {"a": {"b": "1/3"}}}"#,
        )
        .unwrap();
        assert_eq!(s.game.baseline(0), &Rat::integer(5));
        assert_eq!(s.game.delta(0), &Rat::new(1, 10));
        assert_eq!(s.game.delta(1), &Rat::new(-7, 3));
        assert_eq!(s.game.baseline(1), &Rat::new(1, 100));
        assert_eq!(s.game.spill(0, 1), &Rat::new(1, 3));
        assert_eq!(s.game.spill(1, 0), &Rat::zero());
    }

    #[test]
    fn errors() {
        let e = parse_scenario("{\n  \"players\": [\n    {\"name\": \"a\", \"delta\": }\n  ]\n}").unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { line: 3, .. }), "{e}");
        let e = parse_scenario(
            r#"{"players": [{"name": "a", "delta": "x", "baseline": 0}, {"name": "b", "delta": 0, "baseline": 0}]}"#,
        )
        .unwrap_err();
        assert!(matches!(e, ScenarioError::UnrepresentableNumber { .. }), "{e}");
        let e = parse_scenario(r#"{"players": [{"name": "a", "delta": 1, "baseline": 0}]}"#).unwrap_err();
        assert!(
            matches!(e, ScenarioError::Game(GameError::PlayerCountTooSmall(1))),
            "{e}"
        );
        let e = parse_scenario(
            r#"{"players": [{"name": "a", "delta": 1, "baseline": 0}, {"name": "b", "delta": 1, "baseline": 0}],
                "spill": [[1, 0], [0, 0]]}"#,
        )
        .unwrap_err();
        assert!(
            matches!(e, ScenarioError::Game(GameError::NonzeroDiagonal { .. })),
            "{e}"
        );
    }

    #[test]
    fn write_then_parse_is_identity() {
        let game = RaceGame::new(
            vec![Rat::new(1, 2), Rat::integer(-3), Rat::zero()],
            vec![
                vec![Rat::zero(), Rat::new(5, 7), Rat::integer(2)],
                vec![Rat::zero(), Rat::zero(), Rat::new(-1, 9)],
                vec![Rat::integer(4), Rat::zero(), Rat::zero()],
            ],
            vec![Rat::integer(100), Rat::new(199, 2), Rat::zero()],
        )
        .unwrap();
        let names: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let opts = ScenarioOptions {
            nontrivial_players: Some(vec!["x".into()]),
            ..Default::default()
        };
        let back = parse_scenario(&write_scenario(&names, &game, &opts)).unwrap();
        assert_eq!(back.game, game);
        assert_eq!(back.names, names);
        assert_eq!(back.options, opts);
        assert_eq!(back.nontrivial_players().unwrap(), vec![0]);
    }
}

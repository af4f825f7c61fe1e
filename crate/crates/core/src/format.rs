//! Game file format (JSON text).
//!
//! ```json
//! { "players": 2,
//!   "states": [ { "id": 0, "player": 1, "children": [1, 2] },
//!               { "id": 1, "gain": [-1, 1] },
//!               { "id": 2, "gain": [1, -1], "teval": [1.5, -1.5] } ] }
//! ```
//!
//! Syntax errors carry the line and column. Semantic problems (cycles, gains
//! out of range, ...) are left to [`crate::game::validate_game`].

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixed::FixedPoint;
use crate::game::{GameGraph, StateId, StateRecord};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("duplicate state id {0}")]
    DuplicateId(u32),
    #[error("state id {id} out of range for {count} states")]
    IdOutOfRange { id: u32, count: usize },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGame {
    players: usize,
    states: Vec<RawState>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    player: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<StateId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gain: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    teval: Option<Vec<FixedPoint>>,
}

pub fn parse_game(text: &str) -> Result<GameGraph, ParseError> {
    let raw: RawGame = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let count = raw.states.len();
    let mut slots: Vec<Option<StateRecord>> = vec![None; count];
    for state in raw.states {
        let slot = slots
            .get_mut(state.id as usize)
            .ok_or(ParseError::IdOutOfRange {
                id: state.id,
                count,
            })?;
        if slot.is_some() {
            return Err(ParseError::DuplicateId(state.id));
        }
        let terminal = state.children.is_empty();
        *slot = Some(StateRecord {
            // The player field is ignored on terminals.
            player: if terminal { None } else { state.player },
            children: state.children,
            gain: state.gain,
            teval: state.teval,
        });
    }
    // Ids are dense and unique, so every slot is filled.
    let states = slots.into_iter().map(Option::unwrap).collect();
    Ok(GameGraph::new(raw.players, states))
}

pub fn serialize_game(g: &GameGraph) -> String {
    let raw = RawGame {
        players: g.num_players(),
        states: g
            .states()
            .iter()
            .enumerate()
            .map(|(id, record)| RawState {
                id: id as u32,
                player: record.player,
                children: record.children.clone(),
                gain: record.gain.clone(),
                teval: record.teval.clone(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("game serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::fixtures::g1;
    use crate::game::validate_game;
    use crate::generate::{generate_random_game, GenParams};
    use proptest::prelude::*;

    #[test]
    fn round_trips_small_tree() {
        let g = g1();
        assert_eq!(parse_game(&serialize_game(&g)).unwrap(), g);
    }

    #[test]
    fn duplicate_id_is_rejected() {
        let text = r#"{"players":2,"states":[{"id":0,"gain":[0,0]},{"id":0,"gain":[0,0]}]}"#;
        assert!(matches!(parse_game(text), Err(ParseError::DuplicateId(0))));
    }

    #[test]
    fn missing_teval_block_is_absent() {
        let text = r#"{"players":2,"states":[
            {"id":0,"player":1,"children":[1,2]},
            {"id":1,"gain":[-1,1]},
            {"id":2,"gain":[1,-1]}]}"#;
        let g = parse_game(text).unwrap();
        assert!(!g.has_teval());
        assert_eq!(g, g1());
    }

    #[test]
    fn reads_teval_exactly() {
        let text = r#"{"players":2,"states":[{"id":0,"gain":[1,-1],"teval":[1.000001,-0.25]}]}"#;
        let g = parse_game(text).unwrap();
        let teval = g.record(StateId(0)).teval.clone().unwrap();
        assert_eq!(teval[0].raw(), 1_000_001);
        assert_eq!(teval[1].raw(), -250_000);
    }

    #[test]
    fn too_many_fraction_digits_is_a_syntax_error() {
        let text = r#"{"players":1,"states":[{"id":0,"gain":[1],"teval":[0.1234567]}]}"#;
        assert!(matches!(parse_game(text), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn syntax_error_has_position() {
        let text = "{\"players\": 2,\n \"states\": [ {\"id\": 0,, } ] }";
        match parse_game(text) {
            Err(ParseError::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn semantic_errors_are_deferred() {
        let text = r#"{"players":2,"states":[{"id":0,"player":1,"children":[0]}]}"#;
        let g = parse_game(text).unwrap();
        assert!(validate_game(&g).has("cycle"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn parse_serialize_identity(seed in any::<u64>(), players in 2usize..5, size in 1usize..60) {
            let g = generate_random_game(seed, &GenParams::new(players, size)).unwrap();
            prop_assert_eq!(parse_game(&serialize_game(&g)).unwrap(), g);
        }
    }
}

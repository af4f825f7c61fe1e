//! Adaptive evaluation of non-terminal frontier states.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::fixed::{FixedPoint, SCALE};
use crate::game::StateId;

/// Largest magnitude produced by [`EvalFn::Hashed`]: `1 - 10^-6`.
pub const HASHED_BOUND: i64 = SCALE - 1;

/// A deterministic evaluation of states, per player.
#[derive(Debug, Clone, PartialEq)]
pub enum EvalFn {
    Zero,
    /// Pseudo-random values in `[-1 + 10^-6, 1 - 10^-6]` keyed by
    /// `(seed, state, player)` through SplitMix64.
    Hashed(u64),
    /// Explicit values; states missing from the table evaluate to zero.
    Table(HashMap<StateId, Vec<FixedPoint>>),
}

impl EvalFn {
    /// Evaluation of `s` for player `j` (0-based). For two-player search the
    /// scalar evaluation is `value(s, 0)`.
    pub fn value(&self, s: StateId, j: usize) -> FixedPoint {
        match self {
            EvalFn::Zero => FixedPoint::ZERO,
            EvalFn::Hashed(seed) => hashed_value(*seed, s, j),
            EvalFn::Table(table) => table
                .get(&s)
                .and_then(|v| v.get(j).copied())
                .unwrap_or(FixedPoint::ZERO),
        }
    }

    pub fn vector(&self, s: StateId, n: usize) -> Vec<FixedPoint> {
        (0..n).map(|j| self.value(s, j)).collect()
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hashed_value(seed: u64, s: StateId, j: usize) -> FixedPoint {
    let h = mix64(mix64(mix64(seed) ^ s.0 as u64) ^ j as u64);
    let span = (2 * HASHED_BOUND + 1) as u64;
    FixedPoint::from_raw((h % span) as i64 - HASHED_BOUND)
}

/// On-disk table of per-state vectors, shared by evaluation and terminal
/// evaluation tables: `{"values": [{"id": 3, "value": [0.5, -0.5]}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueTable {
    pub values: Vec<TableEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntry {
    pub id: StateId,
    pub value: Vec<FixedPoint>,
}

impl ValueTable {
    pub fn into_map(self) -> HashMap<StateId, Vec<FixedPoint>> {
        self.values.into_iter().map(|e| (e.id, e.value)).collect()
    }
}

//! Uniform entry point over the six solvers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::eval::EvalFn;
use crate::game::{GameGraph, StateId};
use crate::search::multiplayer::{MultiplayerSearch, NpConfig};
use crate::search::multiplayer_v1::solve_np_v1;
use crate::search::multiplayer_v2::solve_np_v2;
use crate::search::two_player::TwoPlayerSearch;
use crate::search::{Driver, SearchError, SolveOptions, SolveResult};
use crate::terminal::TerminalEval;

/// Which value rules a trace was produced with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "2p")]
    TwoPlayer,
    #[serde(rename = "v1")]
    V1,
    #[serde(rename = "v2")]
    V2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Ubfm,
    Descent,
    Umaxn1,
    Descentn1,
    Umaxn2,
    Descentn2,
}

impl Algo {
    pub const ALL: [Algo; 6] = [
        Algo::Ubfm,
        Algo::Descent,
        Algo::Umaxn1,
        Algo::Descentn1,
        Algo::Umaxn2,
        Algo::Descentn2,
    ];
    pub const MULTIPLAYER: [Algo; 4] = [Algo::Umaxn1, Algo::Descentn1, Algo::Umaxn2, Algo::Descentn2];

    pub fn variant(self) -> Variant {
        match self {
            Algo::Ubfm | Algo::Descent => Variant::TwoPlayer,
            Algo::Umaxn1 | Algo::Descentn1 => Variant::V1,
            Algo::Umaxn2 | Algo::Descentn2 => Variant::V2,
        }
    }

    pub fn driver(self) -> Driver {
        match self {
            Algo::Ubfm | Algo::Umaxn1 | Algo::Umaxn2 => Driver::BestFirst,
            Algo::Descent | Algo::Descentn1 | Algo::Descentn2 => Driver::Descent,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algo::Ubfm => "ubfm",
            Algo::Descent => "descent",
            Algo::Umaxn1 => "umaxn1",
            Algo::Descentn1 => "descentn1",
            Algo::Umaxn2 => "umaxn2",
            Algo::Descentn2 => "descentn2",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}`"))
    }
}

/// Runs `algo` from `root`. `config.driver` is overridden by the algorithm.
pub fn solve(
    g: &GameGraph,
    root: StateId,
    algo: Algo,
    eval: &EvalFn,
    teval: &TerminalEval,
    config: &NpConfig,
    opts: &SolveOptions,
) -> Result<SolveResult, SearchError> {
    let config = NpConfig {
        driver: algo.driver(),
        ..*config
    };
    match algo.variant() {
        Variant::TwoPlayer => TwoPlayerSearch {
            game: g,
            eval,
            teval,
        }
        .solve(root, config.driver, opts)
        .map(|(r, _)| r),
        Variant::V1 => {
            let search = MultiplayerSearch::new(g, eval, teval)?;
            solve_np_v1(&search, root, &config, opts).map(|(r, _)| r)
        }
        Variant::V2 => {
            let search = MultiplayerSearch::new(g, eval, teval)?;
            solve_np_v2(&search, root, &config, opts).map(|(r, _)| r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for algo in Algo::ALL {
            assert_eq!(algo.name().parse::<Algo>(), Ok(algo));
        }
        assert!("minimax".parse::<Algo>().is_err());
    }
}

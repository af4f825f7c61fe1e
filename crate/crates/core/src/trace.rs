//! JSON-lines trace files: one record per iteration.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::StateId;
use crate::run::Variant;
use crate::search::{IterationTrace, NodeUpdate};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("trace line {line}: variant {found:?} differs from {expected:?}")]
    MixedVariants {
        line: usize,
        expected: Variant,
        found: Variant,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub variant: Variant,
    pub iter: usize,
    pub added: Vec<StateId>,
    pub flips: Vec<StateId>,
    pub path: Vec<StateId>,
    pub updates: Vec<NodeUpdate>,
}

impl TraceRecord {
    pub fn new(variant: Variant, t: &IterationTrace) -> Self {
        TraceRecord {
            variant,
            iter: t.iteration,
            added: t.added.clone(),
            flips: t.flips.clone(),
            path: t.path.clone(),
            updates: t.updates.clone(),
        }
    }

    pub fn into_iteration(self) -> IterationTrace {
        IterationTrace {
            iteration: self.iter,
            added: self.added,
            flips: self.flips,
            path: self.path,
            updates: self.updates,
        }
    }
}

pub fn write_trace<W: Write>(
    mut out: W,
    variant: Variant,
    traces: &[IterationTrace],
) -> io::Result<()> {
    for t in traces {
        serde_json::to_writer(&mut out, &TraceRecord::new(variant, t))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads a trace file. Blank lines are skipped; all records must share one
/// variant. Returns `None` as the variant for an empty file.
pub fn read_trace<R: BufRead>(
    input: R,
) -> Result<(Option<Variant>, Vec<IterationTrace>), TraceError> {
    let mut variant = None;
    let mut traces = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord =
            serde_json::from_str(&line).map_err(|source| TraceError::Json { line: i + 1, source })?;
        match variant {
            None => variant = Some(record.variant),
            Some(expected) if expected != record.variant => {
                return Err(TraceError::MixedVariants {
                    line: i + 1,
                    expected,
                    found: record.variant,
                })
            }
            Some(_) => {}
        }
        traces.push(record.into_iteration());
    }
    Ok((variant, traces))
}

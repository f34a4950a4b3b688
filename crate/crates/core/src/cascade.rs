//! Cycle-level simulation of one MAC cascade chain.
//!
//! Adjacent MAC cores exchange 384-bit partial sum words over the cascade
//! stream. The channel between neighbors holds a single word: a write
//! blocks until the consumer has taken the previous word, a read blocks
//! until the producer has written one. Cores start staggered by a
//! configurable initial delay (one cycle in hardware), which gives every
//! producer a one-word head start; after that the chain streams one word
//! per core per cycle with no further coordination.
//!
//! The point of simulating this is the chain's self-healing behavior: a
//! transient stall in the middle of the chain back-pressures upstream
//! writers and starves downstream readers for a bounded number of cycles,
//! after which the pipeline is again bubble-free. [`utilization`] measures
//! the steady window to verify it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::{frac, Frac};

/// What a core did in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreState {
    /// Consumed input (non-head), computed, produced a word.
    Compute,
    /// Waited on an empty upstream channel.
    ReadBlocked,
    /// Waited on a full downstream channel.
    WriteBlocked,
    /// An injected stall ate the cycle.
    StallInjected,
    /// Not started yet, or finished.
    Idle,
}

impl CoreState {
    /// One-character form for trace tables.
    pub fn glyph(&self) -> char {
        match self {
            CoreState::Compute => 'C',
            CoreState::ReadBlocked => 'r',
            CoreState::WriteBlocked => 'w',
            CoreState::StallInjected => 'S',
            CoreState::Idle => '.',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainConfig {
    /// Cores in the chain.
    pub chain_len: usize,
    /// Start stagger between neighbors in cycles.
    pub initial_delay: u64,
    /// Cycles (= cascade words) per iteration.
    pub iteration_cycles: u64,
    pub total_iterations: u64,
    /// Forced one-cycle stalls as (core, cycle); a stall scheduled while
    /// the core cannot act anyway is applied at its next active cycle.
    pub bubbles: Vec<(usize, u64)>,
}

impl ChainConfig {
    pub fn new(chain_len: usize, total_iterations: u64) -> Self {
        ChainConfig {
            chain_len,
            initial_delay: 1,
            iteration_cycles: 16,
            total_iterations,
            bubbles: Vec::new(),
        }
    }

    pub fn with_bubble(mut self, core: usize, cycle: u64) -> Self {
        self.bubbles.push((core, cycle));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain_len < 2 || self.chain_len > 64 {
            return Err(Error::invalid(format!(
                "chain_len must be in 2..=64, got {}",
                self.chain_len
            )));
        }
        if self.initial_delay < 1 {
            return Err(Error::invalid("initial_delay must be >= 1"));
        }
        if self.iteration_cycles < 1 || self.total_iterations < 1 {
            return Err(Error::invalid("iteration_cycles and total_iterations must be >= 1"));
        }
        if let Some((core, _)) = self.bubbles.iter().find(|(c, _)| *c >= self.chain_len) {
            return Err(Error::invalid(format!("bubble names core {core}, chain has {}", self.chain_len)));
        }
        Ok(())
    }

    /// Cycles after which any single bubble's disturbance has provably
    /// drained: pipeline fill, one iteration, and the bubble horizon.
    pub fn suggested_warmup(&self) -> u64 {
        let last_bubble = self.bubbles.iter().map(|&(_, t)| t + 1).max().unwrap_or(0);
        self.initial_delay * self.chain_len as u64 + self.iteration_cycles + last_bubble
    }
}

/// A word the tail core handed to the ACC core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TailWord {
    pub iteration: u64,
    pub word_index: u64,
    /// Bitmask of cores whose contribution is folded into this word.
    pub contributors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineTrace {
    /// states[core][cycle].
    pub states: Vec<Vec<CoreState>>,
    pub completed_iterations: Vec<u64>,
    /// Cycles until the last core drained.
    pub total_cycles: u64,
    /// Cycles until the first core drained; the steady-state window ends
    /// here, everything after is pipeline drain.
    pub first_completion: u64,
    pub tail_words: Vec<TailWord>,
}

impl PipelineTrace {
    /// Cores that spent at least one cycle in `state`.
    pub fn cores_with_state(&self, state: CoreState) -> Vec<usize> {
        (0..self.states.len())
            .filter(|&c| self.states[c].iter().any(|&s| s == state))
            .collect()
    }

    /// Compute cycles of one core inside [from, to).
    pub fn compute_cycles_in(&self, core: usize, from: u64, to: u64) -> u64 {
        self.states[core][from as usize..to as usize]
            .iter()
            .filter(|&&s| s == CoreState::Compute)
            .count() as u64
    }
}

/// In-flight cascade word: global word index plus contributor mask.
#[derive(Clone, Copy)]
struct Word {
    index: u64,
    contributors: u64,
}

/// Runs the chain to completion and returns the full trace.
///
/// Per cycle, every core first takes its input (a word its upstream
/// neighbor pushed on an earlier cycle), then computes, then pushes its
/// result downstream. A failed push parks the word and blocks the core
/// for the following cycle(s); a missing input reads as a blocked cycle.
/// The tail core's consumer (the ACC core) is always ready.
pub fn simulate(cfg: &ChainConfig) -> Result<PipelineTrace> {
    cfg.validate()?;
    let len = cfg.chain_len;
    let total_words = cfg.iteration_cycles * cfg.total_iterations;

    let mut states: Vec<Vec<CoreState>> = vec![Vec::new(); len];
    let mut words_done = vec![0u64; len];
    let mut pending_out: Vec<Option<Word>> = vec![None; len];
    // channel[c] sits between core c and core c+1: (word, cycle pushed).
    let mut channel: Vec<Option<(Word, u64)>> = vec![None; len.saturating_sub(1)];
    let mut stalls: Vec<Vec<u64>> = vec![Vec::new(); len];
    for &(core, cycle) in &cfg.bubbles {
        stalls[core].push(cycle);
    }
    for s in &mut stalls {
        s.sort_unstable();
    }
    let mut completion: Vec<Option<u64>> = vec![None; len];
    let mut tail_words = Vec::new();

    let budget = 4 * (total_words + cfg.initial_delay * len as u64 + cfg.bubbles.len() as u64 + 64);
    let mut cycle = 0u64;
    while completion.iter().any(|c| c.is_none()) {
        assert!(cycle < budget, "cascade simulation exceeded its cycle budget; deadlock?");

        // Phase 1+2: decide every core's action and compute. Pops only see
        // words pushed on earlier cycles, so ordering within the phase is
        // immaterial.
        let mut produced: Vec<Option<Word>> = vec![None; len];
        for c in 0..len {
            let done = words_done[c] == total_words && pending_out[c].is_none();
            let state = if done || cycle < c as u64 * cfg.initial_delay {
                CoreState::Idle
            } else if pending_out[c].is_some() {
                CoreState::WriteBlocked
            } else if stalls[c].first().is_some_and(|&t| t <= cycle) {
                stalls[c].remove(0);
                CoreState::StallInjected
            } else {
                let input = if c == 0 {
                    // Head core generates from its own local memory.
                    Some(Word { index: words_done[0], contributors: 0 })
                } else {
                    match channel[c - 1] {
                        Some((word, pushed)) if pushed < cycle => {
                            channel[c - 1] = None;
                            Some(word)
                        }
                        _ => None,
                    }
                };
                match input {
                    Some(word) => {
                        debug_assert_eq!(word.index, words_done[c], "cascade words arrive in order");
                        produced[c] = Some(Word {
                            index: word.index,
                            contributors: word.contributors | 1 << c,
                        });
                        words_done[c] += 1;
                        CoreState::Compute
                    }
                    None => CoreState::ReadBlocked,
                }
            };
            states[c].push(state);
        }

        // Phase 3: push fresh and parked words downstream.
        for c in 0..len {
            let Some(word) = produced[c].or(pending_out[c]) else { continue };
            if c == len - 1 {
                tail_words.push(TailWord {
                    iteration: word.index / cfg.iteration_cycles,
                    word_index: word.index % cfg.iteration_cycles,
                    contributors: word.contributors,
                });
                pending_out[c] = None;
            } else if channel[c].is_none() {
                channel[c] = Some((word, cycle));
                pending_out[c] = None;
            } else {
                pending_out[c] = Some(word);
            }
        }

        for c in 0..len {
            if completion[c].is_none() && words_done[c] == total_words && pending_out[c].is_none() {
                completion[c] = Some(cycle + 1);
            }
        }
        cycle += 1;
    }

    Ok(PipelineTrace {
        completed_iterations: words_done.iter().map(|w| w / cfg.iteration_cycles).collect(),
        total_cycles: cycle,
        first_completion: completion.iter().map(|c| c.unwrap()).min().unwrap(),
        tail_words,
        states,
    })
}

/// Fraction of cycles spent computing across the chain inside the window
/// from `warmup` to the first core's completion. The drain tail is
/// excluded: once the head core has finished its share there is no work
/// left to keep every core busy, so those cycles say nothing about
/// steady-state behavior.
pub fn utilization(trace: &PipelineTrace, warmup: u64) -> Result<Frac> {
    let end = trace.first_completion;
    if warmup >= end {
        return Err(Error::invalid(format!(
            "warmup {warmup} covers the whole window; steady state ends at {end}"
        )));
    }
    let len = trace.states.len() as u64;
    let busy: u64 = (0..trace.states.len())
        .map(|c| trace.compute_cycles_in(c, warmup, end))
        .sum();
    Ok(frac(busy as u128, (len * (end - warmup)) as u128))
}

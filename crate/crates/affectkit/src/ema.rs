//! Offline simulation of the prompt-gating policy: given a stream of
//! detected strong-affect instants, decide which ones to turn into a
//! participant prompt.
//!
//! Two mechanisms keep prompting unintrusive: a minimum idle time between
//! consecutive prompts, and a random ask probability. The idle check runs
//! first, so a random draw is consumed only for idle-eligible detections, which makes
//! the two suppression causes attributable and keeps decisions
//! before a randomly suppressed event independent of it.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::seeded_rng;

/// Prompt-gating policy parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GatePolicy {
    /// Minimum seconds between consecutive prompts.
    pub min_idle: f64,
    /// Probability of prompting an idle-eligible detection, in (0, 1].
    pub ask_probability: f64,
    pub seed: u64,
}

impl Default for GatePolicy {
    fn default() -> Self {
        // 30 minutes of quiet and a coin flip: rare, unobtrusive surveying.
        Self { min_idle: 1800.0, ask_probability: 0.5, seed: 0 }
    }
}

/// Why a detection did not produce a prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuppressCause {
    /// Too soon after the previous prompt.
    Idle,
    /// Idle-eligible, but the random draw said no.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateDecision {
    Prompt,
    Suppress(SuppressCause),
}

impl GateDecision {
    pub fn as_str(self) -> &'static str {
        match self {
            GateDecision::Prompt => "prompt",
            GateDecision::Suppress(SuppressCause::Idle) => "suppress_idle",
            GateDecision::Suppress(SuppressCause::Random) => "suppress_random",
        }
    }
}

/// Mutable gate state carried across a detection stream.
#[derive(Debug, Clone, Default)]
pub struct GateState {
    /// Time of the last prompt, if any; non-decreasing across a run.
    pub last_prompt_time: Option<f64>,
    last_event_time: Option<f64>,
}

/// Advance the gate by one detection at time `t`.
///
/// Any prompt resets the idle timer, regardless of whether the participant
/// later accepts or rejects it.
pub fn gate_step(
    policy: &GatePolicy,
    state: &mut GateState,
    t: f64,
    rng: &mut ChaCha8Rng,
) -> Result<GateDecision> {
    if let Some(prev) = state.last_event_time {
        if t < prev {
            return Err(Error::NonMonotoneTime { t, prev });
        }
    }
    state.last_event_time = Some(t);

    let idle_ok = match state.last_prompt_time {
        Some(last) => t - last >= policy.min_idle,
        None => true,
    };
    if !idle_ok {
        return Ok(GateDecision::Suppress(SuppressCause::Idle));
    }
    if rng.gen::<f64>() < policy.ask_probability {
        state.last_prompt_time = Some(t);
        Ok(GateDecision::Prompt)
    } else {
        Ok(GateDecision::Suppress(SuppressCause::Random))
    }
}

/// Decision counts for a simulated stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSummary {
    pub prompts: usize,
    pub suppressed_idle: usize,
    pub suppressed_random: usize,
}

/// Fold [`gate_step`] over a sorted detection stream.
pub fn simulate_gate(policy: &GatePolicy, detections: &[f64]) -> Result<(Vec<GateDecision>, GateSummary)> {
    let mut rng = seeded_rng(policy.seed, 0xE3A);
    let mut state = GateState::default();
    let mut decisions = Vec::with_capacity(detections.len());
    let mut summary = GateSummary::default();
    for &t in detections {
        let d = gate_step(policy, &mut state, t, &mut rng)?;
        match d {
            GateDecision::Prompt => summary.prompts += 1,
            GateDecision::Suppress(SuppressCause::Idle) => summary.suppressed_idle += 1,
            GateDecision::Suppress(SuppressCause::Random) => summary.suppressed_random += 1,
        }
        decisions.push(d);
    }
    Ok((decisions, summary))
}

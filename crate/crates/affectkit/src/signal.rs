//! Core data model shared by every pipeline stage: sensor channels, recorded
//! sessions, delay-corrected affect events, and extracted signal windows.
//!
//! Everything here is immutable after construction and safe to share across
//! parallel workers.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Sensor channel kinds handled by the pipeline.
///
/// Accelerometer axes are stored as three separate channels with a common
/// sampling rate; the magnitude is computed on demand during feature
/// extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChannelKind {
    Bvp,
    Eda,
    Skt,
    AccX,
    AccY,
    AccZ,
}

impl ChannelKind {
    /// All channel kinds, in canonical order. Every kind is required for a
    /// window to be extractable.
    pub const ALL: [ChannelKind; 6] = [
        ChannelKind::Bvp,
        ChannelKind::Eda,
        ChannelKind::Skt,
        ChannelKind::AccX,
        ChannelKind::AccY,
        ChannelKind::AccZ,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::Bvp => "BVP",
            ChannelKind::Eda => "EDA",
            ChannelKind::Skt => "SKT",
            ChannelKind::AccX => "ACC_X",
            ChannelKind::AccY => "ACC_Y",
            ChannelKind::AccZ => "ACC_Z",
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One uniformly sampled sensor stream.
///
/// The timestamp of sample `i` is exactly `start_time + i / sampling_rate`
/// (seconds since the Unix epoch, fractional allowed).
#[derive(Debug, Clone)]
pub struct TimeSeriesChannel {
    pub kind: ChannelKind,
    pub start_time: f64,
    pub sampling_rate: f64,
    pub samples: Vec<f64>,
}

/// First sample index at or after a fractional sample offset.
///
/// The epsilon guards against float noise pushing an exactly-on-grid offset
/// to the next sample.
fn grid_index(offset_samples: f64) -> i64 {
    (offset_samples - 1e-9).ceil() as i64
}

impl TimeSeriesChannel {
    pub fn new(kind: ChannelKind, start_time: f64, sampling_rate: f64, samples: Vec<f64>) -> Result<Self> {
        if !sampling_rate.is_finite() || sampling_rate <= 0.0 || !start_time.is_finite() {
            return Err(Error::Internal(format!(
                "channel {kind}: invalid start/rate ({start_time}, {sampling_rate})"
            )));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Internal(format!("channel {kind}: non-finite sample")));
        }
        Ok(Self { kind, start_time, sampling_rate, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Timestamp just past the last sample, i.e. the exclusive end of the span.
    pub fn end_time(&self) -> f64 {
        self.start_time + self.samples.len() as f64 / self.sampling_rate
    }

    /// Samples with timestamps in the half-open range `[t0, t1)`.
    ///
    /// Both bounds map to sample indices with the same ceiling rule, so
    /// slices over `[t0, t1)` and `[t1, t2)` concatenate exactly to the
    /// slice over `[t0, t2)`.
    pub fn slice(&self, t0: f64, t1: f64) -> Result<&[f64]> {
        let not_covered = || Error::RangeNotCovered { kind: self.kind.as_str(), t0, t1 };
        if t0.is_nan() || t1.is_nan() || t1 <= t0 {
            return Err(not_covered());
        }
        let i0 = grid_index((t0 - self.start_time) * self.sampling_rate);
        let i1 = grid_index((t1 - self.start_time) * self.sampling_rate);
        if i0 < 0 || i1 > self.samples.len() as i64 {
            return Err(not_covered());
        }
        Ok(&self.samples[i0 as usize..i1 as usize])
    }
}

/// A recorded wearable session: one channel per kind plus participant
/// button-mark timestamps.
#[derive(Debug, Clone)]
pub struct SessionRecording {
    pub session_id: String,
    pub channels: BTreeMap<ChannelKind, TimeSeriesChannel>,
    /// Button/watch marks, strictly increasing.
    pub tags: Vec<f64>,
}

impl SessionRecording {
    pub fn new(
        session_id: String,
        channels: BTreeMap<ChannelKind, TimeSeriesChannel>,
        tags: Vec<f64>,
    ) -> Result<Self> {
        let rec = Self { session_id, channels, tags };
        if !rec.channels.is_empty() && rec.overlap_span().is_none() {
            return Err(Error::NoChannelOverlap { session_id: rec.session_id });
        }
        if rec.tags.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Internal(format!(
                "session {}: tags not strictly increasing",
                rec.session_id
            )));
        }
        Ok(rec)
    }

    pub fn channel(&self, kind: ChannelKind) -> Option<&TimeSeriesChannel> {
        self.channels.get(&kind)
    }

    /// Time range covered by every channel simultaneously, or `None` when
    /// the channels do not overlap.
    pub fn overlap_span(&self) -> Option<(f64, f64)> {
        let mut begin = f64::NEG_INFINITY;
        let mut end = f64::INFINITY;
        for ch in self.channels.values() {
            begin = begin.max(ch.start_time);
            end = end.min(ch.end_time());
        }
        (begin < end).then_some((begin, end))
    }
}

/// Self-reported event label from the annotation questionnaire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventLabel {
    Strong,
    Neutral,
    Mistake,
}

impl EventLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            EventLabel::Strong => "strong",
            EventLabel::Neutral => "neutral",
            EventLabel::Mistake => "mistake",
        }
    }
}

/// A delay-corrected affect event anchored to the moment the affect was
/// experienced rather than the moment the participant marked it.
#[derive(Debug, Clone)]
pub struct AnnotatedEvent {
    pub event_id: String,
    /// Timestamp of the participant's mark.
    pub tag_time: f64,
    /// Self-estimated seconds between the affect and the mark (>= 0).
    pub delay: f64,
    pub label: EventLabel,
}

impl AnnotatedEvent {
    /// The corrected moment of the affect: `tag_time - delay`, exactly.
    pub fn event_time(&self) -> f64 {
        self.tag_time - self.delay
    }
}

/// One channel's samples inside an extracted window, with its rate.
#[derive(Debug, Clone)]
pub struct ChannelSlice {
    pub sampling_rate: f64,
    pub samples: Vec<f64>,
}

/// The multi-channel signal slice preceding one event, plus its binary label
/// (Strong = 1, Neutral = 0).
///
/// Each channel slice spans `[event_time - duration, event_time)` and holds
/// exactly `round(duration * sampling_rate)` samples.
#[derive(Debug, Clone)]
pub struct WindowSample {
    pub event_id: String,
    pub label: u8,
    pub duration: f64,
    pub channels: BTreeMap<ChannelKind, ChannelSlice>,
}

impl WindowSample {
    pub fn channel(&self, kind: ChannelKind) -> Option<&ChannelSlice> {
        self.channels.get(&kind)
    }
}

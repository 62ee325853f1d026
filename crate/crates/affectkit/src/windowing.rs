//! Cut the fixed-length pre-event signal window for every kept event.
//!
//! The window is half-open, `[event_time - duration, event_time)`: the
//! classifier has to fire from the physiology *preceding* the affect, so the
//! moment of the event itself is excluded. The window end is always the
//! delay-corrected event time, never the raw tag time.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::ingest::{ExclusionReason, ExcludedEvent};
use crate::signal::{AnnotatedEvent, ChannelKind, ChannelSlice, EventLabel, SessionRecording, WindowSample};

/// Default window length in seconds.
pub const DEFAULT_WINDOW_SECONDS: f64 = 60.0;

/// Extract the `duration`-second window preceding `ev` from `rec`.
///
/// Every channel kind must be present and fully cover the window, otherwise
/// the event is reported as insufficiently covered so the caller can drop it
/// with that reason.
pub fn extract_window(rec: &SessionRecording, ev: &AnnotatedEvent, duration: f64) -> Result<WindowSample> {
    let label = match ev.label {
        EventLabel::Strong => 1,
        EventLabel::Neutral => 0,
        EventLabel::Mistake => {
            return Err(Error::Internal(format!(
                "event {}: mistake marks must be excluded before windowing",
                ev.event_id
            )))
        }
    };
    let end = ev.event_time();
    let begin = end - duration;

    let mut channels = BTreeMap::new();
    for kind in ChannelKind::ALL {
        let ch = rec
            .channel(kind)
            .ok_or_else(|| Error::InsufficientCoverage { event_id: ev.event_id.clone() })?;
        let samples = ch
            .slice(begin, end)
            .map_err(|_| Error::InsufficientCoverage { event_id: ev.event_id.clone() })?;
        channels.insert(kind, ChannelSlice { sampling_rate: ch.sampling_rate, samples: samples.to_vec() });
    }

    Ok(WindowSample { event_id: ev.event_id.clone(), label, duration, channels })
}

/// Extract windows for every coverable event across all sessions.
///
/// An event belongs to the unique session whose channel-overlap span
/// contains its event time; events matched by no session (or, degenerately,
/// by several overlapping ones) surface [`Error::UnknownSession`]. Duplicate
/// event ids are an error, never silently merged. Output order is
/// deterministic: sorted by event time, then event id.
pub fn extract_all(
    recs: &[SessionRecording],
    evs: &[AnnotatedEvent],
    duration: f64,
) -> Result<(Vec<WindowSample>, Vec<ExcludedEvent>)> {
    let mut seen = BTreeSet::new();
    for ev in evs {
        if !seen.insert(ev.event_id.as_str()) {
            return Err(Error::DuplicateEventId { event_id: ev.event_id.clone() });
        }
    }

    let mut ordered: Vec<&AnnotatedEvent> = evs.iter().collect();
    ordered.sort_by(|a, b| {
        a.event_time()
            .total_cmp(&b.event_time())
            .then_with(|| a.event_id.cmp(&b.event_id))
    });

    let spans: Vec<Option<(f64, f64)>> = recs.iter().map(|r| r.overlap_span()).collect();

    let mut windows = Vec::new();
    let mut dropped = Vec::new();
    for ev in ordered {
        let t = ev.event_time();
        let mut owner = None;
        for (rec, span) in recs.iter().zip(&spans) {
            if let Some((begin, end)) = span {
                if *begin <= t && t < *end {
                    if owner.is_some() {
                        return Err(Error::UnknownSession { event_id: ev.event_id.clone() });
                    }
                    owner = Some(rec);
                }
            }
        }
        let rec = owner.ok_or_else(|| Error::UnknownSession { event_id: ev.event_id.clone() })?;
        match extract_window(rec, ev, duration) {
            Ok(w) => windows.push(w),
            Err(Error::InsufficientCoverage { event_id }) => dropped.push(ExcludedEvent {
                event_id,
                reason: ExclusionReason::InsufficientCoverage,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok((windows, dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::TimeSeriesChannel;

    fn session(id: &str, start: f64, secs: f64) -> SessionRecording {
        let mut channels = BTreeMap::new();
        for kind in ChannelKind::ALL {
            let rate = match kind {
                ChannelKind::Bvp => 64.0,
                ChannelKind::Eda | ChannelKind::Skt => 4.0,
                _ => 32.0,
            };
            let n = (rate * secs) as usize;
            let samples = (0..n).map(|i| (i as f64 * 0.01).sin()).collect();
            channels.insert(kind, TimeSeriesChannel::new(kind, start, rate, samples).unwrap());
        }
        SessionRecording::new(id.into(), channels, vec![]).unwrap()
    }

    fn event(id: &str, tag: f64, delay: f64, label: EventLabel) -> AnnotatedEvent {
        AnnotatedEvent { event_id: id.into(), tag_time: tag, delay, label }
    }

    #[test]
    fn window_lengths_follow_rates() {
        let rec = session("s1", 0.0, 200.0);
        let ev = event("e1", 100.0, 0.0, EventLabel::Strong);
        let w = extract_window(&rec, &ev, 60.0).unwrap();
        assert_eq!(w.channel(ChannelKind::Bvp).unwrap().samples.len(), 3840);
        assert_eq!(w.channel(ChannelKind::Eda).unwrap().samples.len(), 240);
        assert_eq!(w.channel(ChannelKind::AccX).unwrap().samples.len(), 1920);
        assert_eq!(w.label, 1);
    }

    #[test]
    fn window_ends_at_event_time_not_tag_time() {
        let rec = session("s1", 0.0, 200.0);
        let with_delay = extract_window(&rec, &event("a", 150.0, 30.0, EventLabel::Neutral), 60.0).unwrap();
        let no_delay = extract_window(&rec, &event("b", 120.0, 0.0, EventLabel::Neutral), 60.0).unwrap();
        // event_time is 120 s in both cases, so the slices agree sample for sample.
        assert_eq!(
            with_delay.channel(ChannelKind::Bvp).unwrap().samples,
            no_delay.channel(ChannelKind::Bvp).unwrap().samples
        );
    }

    #[test]
    fn early_event_is_insufficiently_covered() {
        let rec = session("s1", 0.0, 200.0);
        let err = extract_window(&rec, &event("e", 30.0, 0.0, EventLabel::Strong), 60.0).unwrap_err();
        assert!(matches!(err, Error::InsufficientCoverage { .. }));
    }

    #[test]
    fn extract_all_assigns_events_to_sessions_by_time() {
        let recs = vec![session("s1", 0.0, 300.0), session("s2", 1000.0, 300.0)];
        let evs = vec![
            event("e1", 200.0, 10.0, EventLabel::Strong),
            event("e2", 1200.0, 0.0, EventLabel::Neutral),
            event("e3", 1030.0, 0.0, EventLabel::Strong), // window precedes session start
        ];
        let (windows, dropped) = extract_all(&recs, &evs, 60.0).unwrap();
        assert_eq!(windows.len(), 2);
        // Deterministic ordering by event time.
        assert_eq!(windows[0].event_id, "e1");
        assert_eq!(windows[1].event_id, "e2");
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].event_id, "e3");
        assert_eq!(dropped[0].reason, ExclusionReason::InsufficientCoverage);
    }

    #[test]
    fn extract_all_empty_events_is_empty() {
        let recs = vec![session("s1", 0.0, 300.0)];
        let (windows, dropped) = extract_all(&recs, &[], 60.0).unwrap();
        assert!(windows.is_empty() && dropped.is_empty());
    }

    #[test]
    fn unassignable_event_is_an_error() {
        let recs = vec![session("s1", 0.0, 300.0)];
        let evs = vec![event("ghost", 5000.0, 0.0, EventLabel::Strong)];
        assert!(matches!(
            extract_all(&recs, &evs, 60.0),
            Err(Error::UnknownSession { .. })
        ));
    }

    #[test]
    fn duplicate_event_ids_are_an_error() {
        let recs = vec![session("s1", 0.0, 300.0)];
        let evs = vec![
            event("dup", 100.0, 0.0, EventLabel::Strong),
            event("dup", 200.0, 0.0, EventLabel::Neutral),
        ];
        assert!(matches!(
            extract_all(&recs, &evs, 60.0),
            Err(Error::DuplicateEventId { .. })
        ));
    }

    #[test]
    fn delay_shifts_the_slice_by_exactly_that_many_samples() {
        let rec = session("s1", 0.0, 400.0);
        let base = extract_window(&rec, &event("a", 300.0, 0.0, EventLabel::Strong), 60.0).unwrap();
        let shifted = extract_window(&rec, &event("b", 300.0, 2.5, EventLabel::Strong), 60.0).unwrap();
        let bvp = rec.channel(ChannelKind::Bvp).unwrap();
        let a = &base.channel(ChannelKind::Bvp).unwrap().samples;
        let b = &shifted.channel(ChannelKind::Bvp).unwrap().samples;
        let offset = (2.5 * bvp.sampling_rate).round() as usize;
        assert_eq!(a[..a.len() - offset], b[offset..]);
    }
}

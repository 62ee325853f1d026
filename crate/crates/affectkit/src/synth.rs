//! Seeded synthetic-corpus generator: physiologically plausible multi-session
//! recordings with annotated events and full ground truth.
//!
//! Neutral physiology is a pulse waveform at a per-session baseline heart
//! rate with slow respiratory-like wander, a slowly drifting skin conductance
//! level, near-constant skin temperature, and accelerometer noise. In the
//! 60 s preceding a strong-affect event the heart rate is elevated by a
//! per-event shift and the skin conductance carries one to three injected
//! SCR bursts (1 s rise, 4 s exponential decay). Annotations include
//! realistic recall delays, a configurable count of over-delayed rows, and
//! mistake marks, so the exclusion rules are exercised end to end.
//!
//! Generation is a pure function of (config, seed): planning uses one RNG
//! stream, each session's signal synthesis another derived from the session
//! index, so sessions can be generated in parallel with byte-identical
//! output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::AnnotationRow;
use crate::sampling::seeded_rng;
use crate::signal::{ChannelKind, EventLabel, SessionRecording, TimeSeriesChannel};

const LAYOUT_DOMAIN: u64 = 0x51;
const SESSION_DOMAIN_BASE: u64 = 0x5100;

/// Synthetic corpus shape and physiology parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_strong: usize,
    pub n_neutral: usize,
    pub n_mistake: usize,
    /// Extra rows whose delay exceeds the 60 s limit (excluded downstream).
    pub n_delay_exceeded: usize,
    pub sessions: usize,
    pub bvp_rate: f64,
    pub eda_rate: f64,
    pub skt_rate: f64,
    pub acc_rate: f64,
    /// Per-session baseline heart rate range (bpm).
    pub hr_base_bpm: (f64, f64),
    /// Per-event heart-rate elevation range during strong windows (bpm).
    pub hr_shift_bpm: (f64, f64),
    /// SCR bursts injected per strong window.
    pub scr_bursts: (usize, usize),
    /// SCR burst amplitude range (raw conductance units).
    pub scr_amplitude: (f64, f64),
    pub noise_bvp: f64,
    pub noise_eda: f64,
    pub noise_skt: f64,
    pub noise_acc: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_strong: 206,
            n_neutral: 75,
            n_mistake: 13,
            n_delay_exceeded: 0,
            sessions: 8,
            bvp_rate: 64.0,
            eda_rate: 4.0,
            skt_rate: 4.0,
            acc_rate: 32.0,
            hr_base_bpm: (58.0, 78.0),
            hr_shift_bpm: (15.0, 25.0),
            scr_bursts: (1, 3),
            scr_amplitude: (0.3, 0.8),
            noise_bvp: 0.05,
            noise_eda: 0.002,
            noise_skt: 0.01,
            noise_acc: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BurstTruth {
    pub event_id: String,
    /// Absolute time of the burst apex (epoch seconds).
    pub apex_time: f64,
    /// Raw-unit amplitude of the injected burst.
    pub amplitude: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HrShiftTruth {
    pub event_id: String,
    pub shift_bpm: f64,
}

/// Everything the generator injected, for oracle-style verification.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub bursts: Vec<BurstTruth>,
    pub hr_shifts: Vec<HrShiftTruth>,
}

#[derive(Debug)]
pub struct Corpus {
    pub sessions: Vec<SessionRecording>,
    pub annotations: Vec<AnnotationRow>,
    pub ground_truth: GroundTruth,
}

/// One planned event, in session-relative seconds.
#[derive(Debug, Clone)]
struct PlannedEvent {
    id: String,
    label: EventLabel,
    delay: f64,
    /// Offset of the (delay-corrected) event time from session start.
    offset: f64,
    shift_bpm: f64,
    /// (burst start offset from event time, amplitude); starts are negative.
    bursts: Vec<(f64, f64)>,
}

/// Box-Muller standard normal draw.
fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn uniform(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.gen_range(range.0..range.1)
    }
}

/// SCR burst shape: linear 1 s rise to the apex, then exponential decay with
/// a 4 s time constant. Contributions beyond 60 s are treated as zero.
fn burst_value(t: f64, start: f64, amp: f64) -> f64 {
    let dt = t - start;
    if !(0.0..=60.0).contains(&dt) {
        0.0
    } else if dt < 1.0 {
        amp * dt
    } else {
        amp * (-(dt - 1.0) / 4.0).exp()
    }
}

fn plan_events(cfg: &SynthConfig, seed: u64) -> (Vec<Vec<PlannedEvent>>, GroundTruth) {
    let mut rng = seeded_rng(seed, LAYOUT_DOMAIN);
    let sessions = cfg.sessions.max(1);

    // Roster of labels; over-delayed rows alternate strong/neutral.
    let mut roster: Vec<(EventLabel, bool)> = Vec::new();
    roster.extend(std::iter::repeat_n((EventLabel::Strong, false), cfg.n_strong));
    roster.extend(std::iter::repeat_n((EventLabel::Neutral, false), cfg.n_neutral));
    roster.extend(std::iter::repeat_n((EventLabel::Mistake, false), cfg.n_mistake));
    for i in 0..cfg.n_delay_exceeded {
        let label = if i % 2 == 0 { EventLabel::Strong } else { EventLabel::Neutral };
        roster.push((label, true));
    }
    for i in (1..roster.len()).rev() {
        let j = rng.gen_range(0..=i);
        roster.swap(i, j);
    }

    let mut truth = GroundTruth::default();
    let mut per_session: Vec<Vec<PlannedEvent>> = vec![Vec::new(); sessions];
    let mut offsets = vec![90.0f64; sessions];
    // Burst slots leave 6 s of margin at both window edges and at least 6 s
    // between bursts, so every apex survives windowing and decomposition.
    const BURST_SLOTS: [f64; 4] = [-54.0, -42.0, -30.0, -18.0];

    for (i, &(label, exceeded)) in roster.iter().enumerate() {
        let s = i % sessions;
        let id = format!("ev-{i:04}");
        let delay = if exceeded { uniform(&mut rng, (60.5, 120.0)) } else { uniform(&mut rng, (0.0, 60.0)) };

        let mut ev = PlannedEvent {
            id: id.clone(),
            label,
            delay,
            offset: offsets[s],
            shift_bpm: 0.0,
            bursts: Vec::new(),
        };
        if label == EventLabel::Strong && !exceeded {
            ev.shift_bpm = uniform(&mut rng, cfg.hr_shift_bpm);
            let k = rng.gen_range(cfg.scr_bursts.0..=cfg.scr_bursts.1.max(cfg.scr_bursts.0)).min(BURST_SLOTS.len());
            let mut slots = BURST_SLOTS;
            for a in (1..slots.len()).rev() {
                let b = rng.gen_range(0..=a);
                slots.swap(a, b);
            }
            let mut picked: Vec<f64> = slots[..k].to_vec();
            picked.sort_by(f64::total_cmp);
            for slot in picked {
                let start = slot + uniform(&mut rng, (0.0, 4.0));
                let amp = uniform(&mut rng, cfg.scr_amplitude);
                ev.bursts.push((start, amp));
            }
            truth.hr_shifts.push(HrShiftTruth { event_id: id.clone(), shift_bpm: ev.shift_bpm });
        }
        per_session[s].push(ev);
        offsets[s] += uniform(&mut rng, (150.0, 210.0));
    }
    (per_session, truth)
}

fn generate_session(
    cfg: &SynthConfig,
    seed: u64,
    index: usize,
    start_time: f64,
    duration: f64,
    events: &[PlannedEvent],
) -> Result<SessionRecording> {
    let mut rng = seeded_rng(seed, SESSION_DOMAIN_BASE + index as u64);
    let session_id = format!("s{index:02}");

    let hr_base = uniform(&mut rng, cfg.hr_base_bpm);
    let phase_fast: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let phase_slow: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let phase_eda: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let skt_base = rng.gen_range(32.0..35.0);
    let skt_drift = rng.gen_range(-0.5..0.5);
    let acc_mean = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), 60.0 + rng.gen_range(0.0..6.0)];

    // Strong windows as sorted, disjoint (begin, end, shift) intervals in
    // session-relative seconds.
    let hr_windows: Vec<(f64, f64, f64)> = events
        .iter()
        .filter(|e| e.shift_bpm > 0.0)
        .map(|e| (e.offset - 60.0, e.offset, e.shift_bpm))
        .collect();
    let bursts: Vec<(f64, f64)> = {
        let mut b: Vec<(f64, f64)> = events
            .iter()
            .flat_map(|e| e.bursts.iter().map(|&(s, a)| (e.offset + s, a)))
            .collect();
        b.sort_by(|x, y| x.0.total_cmp(&y.0));
        b
    };

    let wander = |t: f64| 1.2 * (std::f64::consts::TAU * t / 73.0 + phase_fast).sin()
        + 0.8 * (std::f64::consts::TAU * t / 211.0 + phase_slow).sin();

    // BVP: phase-continuous oscillator at the instantaneous heart rate.
    let n_bvp = (duration * cfg.bvp_rate).round() as usize;
    let mut bvp = Vec::with_capacity(n_bvp);
    let mut phase_acc = 0.0f64;
    let mut hr_at = 0usize;
    for i in 0..n_bvp {
        let t = i as f64 / cfg.bvp_rate;
        while hr_at < hr_windows.len() && t >= hr_windows[hr_at].1 {
            hr_at += 1;
        }
        let shift = match hr_windows.get(hr_at) {
            Some(&(begin, end, s)) if t >= begin && t < end => s,
            _ => 0.0,
        };
        let hr = hr_base + wander(t) + shift;
        phase_acc += hr / 60.0 / cfg.bvp_rate;
        bvp.push((std::f64::consts::TAU * phase_acc).sin() + cfg.noise_bvp * gauss(&mut rng));
    }

    // EDA: slow drift plus injected bursts.
    let n_eda = (duration * cfg.eda_rate).round() as usize;
    let mut eda = Vec::with_capacity(n_eda);
    for i in 0..n_eda {
        let t = i as f64 / cfg.eda_rate;
        let mut v = 2.0 + 0.3 * (std::f64::consts::TAU * t / 600.0 + phase_eda).sin();
        for &(b_start, amp) in &bursts {
            if b_start > t {
                break;
            }
            v += burst_value(t, b_start, amp);
        }
        eda.push(v + cfg.noise_eda * gauss(&mut rng));
    }

    let n_skt = (duration * cfg.skt_rate).round() as usize;
    let skt: Vec<f64> = (0..n_skt)
        .map(|i| {
            let t = i as f64 / cfg.skt_rate;
            skt_base + skt_drift * t / duration + cfg.noise_skt * gauss(&mut rng)
        })
        .collect();

    let n_acc = (duration * cfg.acc_rate).round() as usize;
    let mut acc = [Vec::with_capacity(n_acc), Vec::with_capacity(n_acc), Vec::with_capacity(n_acc)];
    for _ in 0..n_acc {
        for (axis, column) in acc.iter_mut().enumerate() {
            column.push(acc_mean[axis] + cfg.noise_acc * gauss(&mut rng));
        }
    }

    let mut channels = BTreeMap::new();
    channels.insert(ChannelKind::Bvp, TimeSeriesChannel::new(ChannelKind::Bvp, start_time, cfg.bvp_rate, bvp)?);
    channels.insert(ChannelKind::Eda, TimeSeriesChannel::new(ChannelKind::Eda, start_time, cfg.eda_rate, eda)?);
    channels.insert(ChannelKind::Skt, TimeSeriesChannel::new(ChannelKind::Skt, start_time, cfg.skt_rate, skt)?);
    let [ax, ay, az] = acc;
    channels.insert(ChannelKind::AccX, TimeSeriesChannel::new(ChannelKind::AccX, start_time, cfg.acc_rate, ax)?);
    channels.insert(ChannelKind::AccY, TimeSeriesChannel::new(ChannelKind::AccY, start_time, cfg.acc_rate, ay)?);
    channels.insert(ChannelKind::AccZ, TimeSeriesChannel::new(ChannelKind::AccZ, start_time, cfg.acc_rate, az)?);

    let tags: Vec<f64> = events.iter().map(|e| start_time + e.offset + e.delay).collect();
    SessionRecording::new(session_id, channels, tags)
}

/// Generate a full corpus. Pure given (config, seed).
pub fn generate_corpus(cfg: &SynthConfig, seed: u64) -> Result<Corpus> {
    let (per_session, mut truth) = plan_events(cfg, seed);

    // Sessions are laid out sequentially in time with 10-minute gaps, so
    // event-to-session assignment by timestamp is unambiguous.
    let epoch0 = 1_590_000_000.0;
    let durations: Vec<f64> = per_session
        .iter()
        .map(|evs| evs.last().map(|e| e.offset + 150.0).unwrap_or(300.0))
        .collect();
    let mut starts = Vec::with_capacity(durations.len());
    let mut t = epoch0;
    for d in &durations {
        starts.push(t);
        t += d + 600.0;
    }

    let sessions: Result<Vec<SessionRecording>> = per_session
        .par_iter()
        .enumerate()
        .map(|(s, events)| generate_session(cfg, seed, s, starts[s], durations[s], events))
        .collect();
    let sessions = sessions?;

    // Ground-truth burst apexes in absolute time.
    let mut bursts = Vec::new();
    for (s, events) in per_session.iter().enumerate() {
        for ev in events {
            for &(b_start, amp) in &ev.bursts {
                bursts.push(BurstTruth {
                    event_id: ev.id.clone(),
                    apex_time: starts[s] + ev.offset + b_start + 1.0,
                    amplitude: amp,
                });
            }
        }
    }
    bursts.sort_by(|a, b| a.apex_time.total_cmp(&b.apex_time));
    truth.bursts = bursts;
    truth.hr_shifts.sort_by(|a, b| a.event_id.cmp(&b.event_id));

    let mut annotations = Vec::new();
    for (s, events) in per_session.iter().enumerate() {
        for e in events {
            annotations.push(AnnotationRow {
                event_id: e.id.clone(),
                tag_time: starts[s] + e.offset + e.delay,
                label: e.label,
                delay: e.delay,
            });
        }
    }
    annotations.sort_by(|a, b| a.tag_time.total_cmp(&b.tag_time));

    Ok(Corpus { sessions, annotations, ground_truth: truth })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })
}

fn channel_csv(ch: &TimeSeriesChannel) -> String {
    let mut out = String::with_capacity(ch.len() * 10 + 32);
    let _ = writeln!(out, "{:.6}", ch.start_time);
    let _ = writeln!(out, "{:.6}", ch.sampling_rate);
    for v in &ch.samples {
        let _ = writeln!(out, "{v:.6}");
    }
    out
}

/// Write the corpus in the exact on-disk layout the ingest parsers read:
/// `sessions/<id>/{BVP,EDA,TEMP,ACC,tags}.csv` plus `annotations.csv` and a
/// `ground_truth.json` sidecar.
pub fn write_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    let sessions_dir = dir.join("sessions");
    std::fs::create_dir_all(&sessions_dir)
        .map_err(|e| Error::Io { path: sessions_dir.clone(), source: e })?;

    for rec in &corpus.sessions {
        let sdir = sessions_dir.join(&rec.session_id);
        std::fs::create_dir_all(&sdir).map_err(|e| Error::Io { path: sdir.clone(), source: e })?;

        for (kind, file) in [(ChannelKind::Bvp, "BVP.csv"), (ChannelKind::Eda, "EDA.csv"), (ChannelKind::Skt, "TEMP.csv")] {
            if let Some(ch) = rec.channel(kind) {
                write_file(&sdir.join(file), &channel_csv(ch))?;
            }
        }
        if let (Some(x), Some(y), Some(z)) = (
            rec.channel(ChannelKind::AccX),
            rec.channel(ChannelKind::AccY),
            rec.channel(ChannelKind::AccZ),
        ) {
            let mut out = String::with_capacity(x.len() * 30 + 64);
            let _ = writeln!(out, "{0:.6},{0:.6},{0:.6}", x.start_time);
            let _ = writeln!(out, "{0:.6},{0:.6},{0:.6}", x.sampling_rate);
            for i in 0..x.len() {
                let _ = writeln!(out, "{:.6},{:.6},{:.6}", x.samples[i], y.samples[i], z.samples[i]);
            }
            write_file(&sdir.join("ACC.csv"), &out)?;
        }
        let mut tags = String::new();
        for t in &rec.tags {
            let _ = writeln!(tags, "{t:.6}");
        }
        write_file(&sdir.join("tags.csv"), &tags)?;
    }

    let mut annotations = String::from("event_id,tag_time,label,delay_seconds\n");
    for row in &corpus.annotations {
        let _ = writeln!(
            annotations,
            "{},{:.6},{},{:.6}",
            row.event_id,
            row.tag_time,
            row.label.as_str(),
            row.delay
        );
    }
    write_file(&dir.join("annotations.csv"), &annotations)?;

    let truth = serde_json::to_string_pretty(&corpus.ground_truth)
        .map_err(|e| Error::Internal(format!("ground truth serialization: {e}")))?;
    write_file(&dir.join("ground_truth.json"), &truth)
}

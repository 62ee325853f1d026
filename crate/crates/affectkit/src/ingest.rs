//! Parse session directories and annotation files, and apply the event
//! exclusion rules.
//!
//! Session layout follows the Empatica E4 export convention: one CSV per
//! channel (`BVP.csv`, `EDA.csv`, `TEMP.csv`, `ACC.csv`), where the first
//! row is the start timestamp (seconds since epoch), the second row the
//! sampling rate in Hz, and every following row one sample (`ACC.csv`
//! carries three columns, one per axis). An optional `tags.csv` lists one
//! button-mark timestamp per line.
//!
//! A corpus directory groups sessions under `sessions/<id>/` next to a
//! single `annotations.csv` with the header
//! `event_id,tag_time,label,delay_seconds`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::signal::{AnnotatedEvent, ChannelKind, EventLabel, SessionRecording, TimeSeriesChannel};

/// Events with a self-reported delay beyond this many seconds are excluded:
/// the delay estimate is no longer trustworthy.
pub const MAX_DELAY_SECONDS: f64 = 60.0;

/// One parsed row of the annotation file, prior to exclusion handling.
#[derive(Debug, Clone)]
pub struct AnnotationRow {
    pub event_id: String,
    pub tag_time: f64,
    pub label: EventLabel,
    pub delay: f64,
}

/// Why an annotated event was left out of the learning set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExclusionReason {
    /// The participant flagged the mark itself as accidental.
    MistakeMark,
    /// Reported delay exceeds [`MAX_DELAY_SECONDS`].
    DelayTooLarge,
    /// The 60 s pre-window is not fully covered by all required channels.
    InsufficientCoverage,
}

impl ExclusionReason {
    pub fn as_str(self) -> &'static str {
        match self {
            ExclusionReason::MistakeMark => "mistake_mark",
            ExclusionReason::DelayTooLarge => "delay_too_large",
            ExclusionReason::InsufficientCoverage => "insufficient_coverage",
        }
    }
}

/// An excluded event together with the rule that excluded it.
#[derive(Debug, Clone)]
pub struct ExcludedEvent {
    pub event_id: String,
    pub reason: ExclusionReason,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut lines = Vec::new();
    for line in BufReader::new(file).lines() {
        lines.push(line.map_err(|e| io_err(path, e))?);
    }
    Ok(lines)
}

fn parse_finite(token: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = token
        .trim()
        .parse()
        .map_err(|_| Error::NonFiniteValue { path: path.to_path_buf(), line })?;
    if !v.is_finite() {
        return Err(Error::NonFiniteValue { path: path.to_path_buf(), line });
    }
    Ok(v)
}

/// Parse one Empatica-style channel file into `columns` sample vectors.
fn parse_channel_file(path: &Path, columns: usize) -> Result<(f64, f64, Vec<Vec<f64>>)> {
    let lines = read_lines(path)?;
    let mut rows = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    let header = |detail: &str| Error::MalformedHeader {
        path: path.to_path_buf(),
        detail: detail.to_string(),
    };

    let (i_start, start_line) = rows.next().ok_or_else(|| header("missing start-time row"))?;
    let (i_rate, rate_line) = rows.next().ok_or_else(|| header("missing sampling-rate row"))?;

    // Header rows may repeat the value once per column (Empatica ACC does).
    let start = parse_finite(start_line.split(',').next().unwrap_or(""), path, i_start + 1)
        .map_err(|_| header("unparseable start time"))?;
    let rate = parse_finite(rate_line.split(',').next().unwrap_or(""), path, i_rate + 1)
        .map_err(|_| header("unparseable sampling rate"))?;
    if rate <= 0.0 {
        return Err(header("sampling rate must be > 0"));
    }

    let mut samples: Vec<Vec<f64>> = vec![Vec::new(); columns];
    for (i, line) in rows {
        let mut fields = line.split(',');
        for column in samples.iter_mut() {
            let token = fields.next().ok_or_else(|| Error::MalformedHeader {
                path: path.to_path_buf(),
                detail: format!("line {}: expected {columns} columns", i + 1),
            })?;
            column.push(parse_finite(token, path, i + 1)?);
        }
    }
    if samples[0].is_empty() {
        return Err(Error::EmptyChannel { path: path.to_path_buf() });
    }
    Ok((start, rate, samples))
}

/// Parse one session directory into a [`SessionRecording`].
///
/// Channels are built from whichever of the known files are present; tag
/// timestamps are sorted ascending (duplicates collapsed).
pub fn parse_session(dir: &Path) -> Result<SessionRecording> {
    let session_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());

    let mut channels = BTreeMap::new();

    for (file, kind) in [("BVP.csv", ChannelKind::Bvp), ("EDA.csv", ChannelKind::Eda), ("TEMP.csv", ChannelKind::Skt)] {
        let path = dir.join(file);
        if path.is_file() {
            let (start, rate, mut cols) = parse_channel_file(&path, 1)?;
            channels.insert(kind, TimeSeriesChannel::new(kind, start, rate, cols.remove(0))?);
        }
    }

    let acc_path = dir.join("ACC.csv");
    if acc_path.is_file() {
        let (start, rate, cols) = parse_channel_file(&acc_path, 3)?;
        for (kind, col) in [ChannelKind::AccX, ChannelKind::AccY, ChannelKind::AccZ].into_iter().zip(cols) {
            channels.insert(kind, TimeSeriesChannel::new(kind, start, rate, col)?);
        }
    }

    let mut tags = Vec::new();
    let tags_path = dir.join("tags.csv");
    if tags_path.is_file() {
        for (i, line) in read_lines(&tags_path)?.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            tags.push(parse_finite(line, &tags_path, i + 1)?);
        }
        tags.sort_by(f64::total_cmp);
        tags.dedup();
    }

    SessionRecording::new(session_id, channels, tags)
}

/// Parse the annotation CSV. The header must be exactly
/// `event_id,tag_time,label,delay_seconds`; rows come back in file order.
pub fn parse_annotations(path: &Path) -> Result<Vec<AnnotationRow>> {
    const HEADER: &str = "event_id,tag_time,label,delay_seconds";
    let lines = read_lines(path)?;
    let mut iter = lines.iter().enumerate().filter(|(_, l)| !l.trim().is_empty());

    let (_, first) = iter.next().ok_or_else(|| Error::MalformedHeader {
        path: path.to_path_buf(),
        detail: "empty file".into(),
    })?;
    if first.trim() != HEADER {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            detail: format!("expected header {HEADER:?}, found {first:?}"),
        });
    }

    let mut rows = Vec::new();
    for (i, line) in iter {
        let line_no = i + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::MalformedHeader {
                path: path.to_path_buf(),
                detail: format!("line {line_no}: expected 4 fields"),
            });
        }
        let label = match fields[2].trim().to_ascii_lowercase().as_str() {
            "strong" => EventLabel::Strong,
            "neutral" => EventLabel::Neutral,
            "mistake" => EventLabel::Mistake,
            other => {
                return Err(Error::UnknownLabel {
                    path: path.to_path_buf(),
                    line: line_no,
                    label: other.to_string(),
                })
            }
        };
        let tag_time = parse_finite(fields[1], path, line_no)?;
        let delay = parse_finite(fields[3], path, line_no)?;
        if delay < 0.0 {
            return Err(Error::NegativeDelay { path: path.to_path_buf(), line: line_no, delay });
        }
        rows.push(AnnotationRow {
            event_id: fields[0].trim().to_string(),
            tag_time,
            label,
            delay,
        });
    }
    Ok(rows)
}

/// Apply the exclusion rules: mistake marks are dropped first, then events
/// whose delay exceeds [`MAX_DELAY_SECONDS`] (a delay of exactly 60 s is
/// kept). Exclusion is bookkeeping, not an error; every input row lands in
/// exactly one of the two output lists.
pub fn resolve_events(rows: &[AnnotationRow]) -> (Vec<AnnotatedEvent>, Vec<ExcludedEvent>) {
    let mut kept = Vec::new();
    let mut excluded = Vec::new();
    for row in rows {
        if row.label == EventLabel::Mistake {
            excluded.push(ExcludedEvent {
                event_id: row.event_id.clone(),
                reason: ExclusionReason::MistakeMark,
            });
        } else if row.delay > MAX_DELAY_SECONDS {
            excluded.push(ExcludedEvent {
                event_id: row.event_id.clone(),
                reason: ExclusionReason::DelayTooLarge,
            });
        } else {
            kept.push(AnnotatedEvent {
                event_id: row.event_id.clone(),
                tag_time: row.tag_time,
                delay: row.delay,
                label: row.label,
            });
        }
    }
    (kept, excluded)
}

/// Parse a whole corpus directory: every `sessions/<id>/` subdirectory plus
/// `annotations.csv`. Sessions parse in parallel; output order is the sorted
/// directory order.
pub fn parse_corpus(dir: &Path) -> Result<(Vec<SessionRecording>, Vec<AnnotationRow>)> {
    let sessions_dir = dir.join("sessions");
    let mut session_paths: Vec<PathBuf> = fs::read_dir(&sessions_dir)
        .map_err(|e| io_err(&sessions_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    session_paths.sort();

    let sessions: Result<Vec<SessionRecording>> =
        session_paths.par_iter().map(|p| parse_session(p)).collect();
    let annotations = parse_annotations(&dir.join("annotations.csv"))?;
    Ok((sessions?, annotations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, contents: &str) {
        let mut f = fs::File::create(dir.join(name)).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
    }

    fn eda_csv(n: usize) -> String {
        let mut s = String::from("1590000000.0\n4.0\n");
        for i in 0..n {
            s.push_str(&format!("{}\n", 2.0 + (i % 7) as f64 * 0.1));
        }
        s
    }

    #[test]
    fn parses_eda_channel_with_header_rows() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "EDA.csv", &eda_csv(240));
        let rec = parse_session(dir.path()).unwrap();
        let ch = rec.channel(ChannelKind::Eda).unwrap();
        assert_eq!(ch.start_time, 1_590_000_000.0);
        assert_eq!(ch.sampling_rate, 4.0);
        assert_eq!(ch.len(), 240);
    }

    #[test]
    fn splits_acc_into_three_channels() {
        let dir = tempfile::tempdir().unwrap();
        let mut acc = String::from("1590000000.0,1590000000.0,1590000000.0\n32.0,32.0,32.0\n");
        for i in 0..96 {
            acc.push_str(&format!("{},{},{}\n", i, i + 1, i + 2));
        }
        write_file(dir.path(), "ACC.csv", &acc);
        let rec = parse_session(dir.path()).unwrap();
        for kind in [ChannelKind::AccX, ChannelKind::AccY, ChannelKind::AccZ] {
            assert_eq!(rec.channel(kind).unwrap().len(), 96);
            assert_eq!(rec.channel(kind).unwrap().sampling_rate, 32.0);
        }
        assert_eq!(rec.channel(ChannelKind::AccY).unwrap().samples[0], 1.0);
    }

    #[test]
    fn literal_nan_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "EDA.csv", "1590000000.0\n4.0\n1.0\nnan\n2.0\n");
        assert!(matches!(
            parse_session(dir.path()),
            Err(Error::NonFiniteValue { .. })
        ));
    }

    #[test]
    fn missing_header_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "EDA.csv", "1590000000.0\n");
        assert!(matches!(
            parse_session(dir.path()),
            Err(Error::MalformedHeader { .. })
        ));
    }

    #[test]
    fn channel_without_samples_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_file(dir.path(), "EDA.csv", "1590000000.0\n4.0\n");
        assert!(matches!(parse_session(dir.path()), Err(Error::EmptyChannel { .. })));
    }

    fn annotations_file(rows: &str) -> (tempfile::TempDir, PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("annotations.csv");
        let mut f = fs::File::create(&path).unwrap();
        writeln!(f, "event_id,tag_time,label,delay_seconds").unwrap();
        f.write_all(rows.as_bytes()).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_annotation_rows_in_order() {
        let (_dir, path) = annotations_file("e1,1590000300,strong,20\ne2,1590000400,mistake,0\n");
        let rows = parse_annotations(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].event_id, "e1");
        assert_eq!(rows[0].tag_time, 1_590_000_300.0);
        assert_eq!(rows[0].label, EventLabel::Strong);
        assert_eq!(rows[0].delay, 20.0);
        assert_eq!(rows[1].label, EventLabel::Mistake);
    }

    #[test]
    fn unknown_label_is_rejected() {
        let (_dir, path) = annotations_file("e3,1590000500,angry,0\n");
        assert!(matches!(parse_annotations(&path), Err(Error::UnknownLabel { .. })));
    }

    #[test]
    fn negative_delay_is_rejected() {
        let (_dir, path) = annotations_file("e4,1590000500,strong,-1\n");
        assert!(matches!(parse_annotations(&path), Err(Error::NegativeDelay { .. })));
    }

    fn row(id: &str, label: EventLabel, delay: f64) -> AnnotationRow {
        AnnotationRow { event_id: id.into(), tag_time: 1_590_000_000.0, label, delay }
    }

    #[test]
    fn resolve_keeps_strong_and_neutral_drops_mistakes() {
        // Corpus-shaped input: 206 strong + 75 neutral + 13 mistakes.
        let mut rows = Vec::new();
        for i in 0..206 {
            rows.push(row(&format!("s{i}"), EventLabel::Strong, (i % 61) as f64));
        }
        for i in 0..75 {
            rows.push(row(&format!("n{i}"), EventLabel::Neutral, (i % 61) as f64));
        }
        for i in 0..13 {
            rows.push(row(&format!("m{i}"), EventLabel::Mistake, 0.0));
        }
        let (kept, excluded) = resolve_events(&rows);
        assert_eq!(kept.len(), 281);
        assert_eq!(excluded.len(), 13);
        assert!(excluded.iter().all(|e| e.reason == ExclusionReason::MistakeMark));
        assert_eq!(kept.len() + excluded.len(), rows.len());
        // Brute-force scan of the input agrees with the kept counts.
        let strong = rows
            .iter()
            .filter(|r| r.label == EventLabel::Strong && r.delay <= 60.0)
            .count();
        assert_eq!(kept.iter().filter(|e| e.label == EventLabel::Strong).count(), strong);
    }

    #[test]
    fn delay_boundary_is_inclusive_at_60() {
        let (kept, excluded) = resolve_events(&[
            row("a", EventLabel::Strong, 61.0),
            row("b", EventLabel::Neutral, 60.0),
        ]);
        assert_eq!(excluded.len(), 1);
        assert_eq!(excluded[0].reason, ExclusionReason::DelayTooLarge);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].event_time(), 1_590_000_000.0 - 60.0);
    }
}

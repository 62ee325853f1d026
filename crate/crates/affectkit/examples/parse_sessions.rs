//! Parse a corpus directory back into typed sessions and annotation rows,
//! then apply the event exclusion rules.
//!
//! Run with: `cargo run --example parse_sessions`

use affectkit::ingest::{parse_corpus, resolve_events};
use affectkit::synth::{generate_corpus, write_corpus, SynthConfig};

fn main() -> affectkit::Result<()> {
    // Self-contained: synthesize a small corpus first, then parse it back
    // through the real file format.
    let cfg = SynthConfig {
        n_strong: 12,
        n_neutral: 6,
        n_mistake: 2,
        n_delay_exceeded: 1,
        sessions: 2,
        ..SynthConfig::default()
    };
    let dir = std::env::temp_dir().join("affectkit-example-parse");
    write_corpus(&generate_corpus(&cfg, 11)?, &dir)?;

    let (sessions, rows) = parse_corpus(&dir)?;
    for rec in &sessions {
        println!("session {}:", rec.session_id);
        for (kind, ch) in &rec.channels {
            println!(
                "  {kind}: {} samples @ {} Hz starting {:.3}",
                ch.len(),
                ch.sampling_rate,
                ch.start_time
            );
        }
    }

    let (kept, excluded) = resolve_events(&rows);
    println!("{} rows -> {} kept, {} excluded", rows.len(), kept.len(), excluded.len());
    for e in &excluded {
        println!("  excluded {}: {}", e.event_id, e.reason.as_str());
    }
    Ok(())
}

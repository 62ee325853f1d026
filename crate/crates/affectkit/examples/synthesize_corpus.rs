//! Generate a seeded synthetic corpus and write it in the Empatica-style
//! session layout the ingest parsers read.
//!
//! Run with: `cargo run --example synthesize_corpus`

use affectkit::synth::{generate_corpus, write_corpus, SynthConfig};

fn main() -> affectkit::Result<()> {
    let cfg = SynthConfig {
        n_strong: 20,
        n_neutral: 10,
        n_mistake: 3,
        n_delay_exceeded: 2,
        sessions: 3,
        ..SynthConfig::default()
    };
    let corpus = generate_corpus(&cfg, 7)?;

    let dir = std::env::temp_dir().join("affectkit-example-corpus");
    write_corpus(&corpus, &dir)?;

    println!("wrote corpus to {}", dir.display());
    for rec in &corpus.sessions {
        let (begin, end) = rec.overlap_span().unwrap();
        println!(
            "  session {}: {:.0} s of signal, {} tags",
            rec.session_id,
            end - begin,
            rec.tags.len()
        );
    }
    println!("  {} annotation rows", corpus.annotations.len());
    println!(
        "  ground truth: {} SCR bursts, {} HR shifts",
        corpus.ground_truth.bursts.len(),
        corpus.ground_truth.hr_shifts.len()
    );
    Ok(())
}

//! Generate a synthetic document corpus and inspect one document.
//!
//! ```bash
//! cargo run --release --example synth_corpus
//! ```

use docmamba::data::synth::{synth_corpus, SynthConfig};

fn main() {
    let cfg = SynthConfig {
        n_docs: 50,
        seed: 7,
        min_tokens: 64,
        max_tokens: 384,
        entity_fraction: 0.6,
        ..Default::default()
    };
    let docs = synth_corpus(&cfg).expect("corpus");

    let lengths: Vec<usize> = docs
        .iter()
        .map(|d| d.words.iter().map(|w| w.text.len()).sum())
        .collect();
    let entities = docs
        .iter()
        .flat_map(|d| &d.words)
        .filter(|w| w.entity_tag.as_deref().is_some_and(|t| t.starts_with("B-")))
        .count();
    println!(
        "{} documents, byte-token lengths {}..{}, {} entities",
        docs.len(),
        lengths.iter().min().unwrap(),
        lengths.iter().max().unwrap(),
        entities
    );

    let doc = &docs[0];
    println!("\n{} ({}x{}):", doc.doc_id, doc.page_w, doc.page_h);
    for w in doc.words.iter().take(12) {
        println!(
            "  seg {:>2}  ({:>5.1},{:>5.1})  {:<12} {}",
            w.segment_id,
            w.quad[0],
            w.quad[1],
            w.text,
            w.entity_tag.as_deref().unwrap_or("")
        );
    }
    println!("  ...");
}

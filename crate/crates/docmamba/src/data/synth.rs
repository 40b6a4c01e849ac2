//! Deterministic synthetic document corpus.
//!
//! Documents are built from a small template grammar — titles, key/value
//! fields and filler paragraphs — laid out in one or two columns so the
//! masked-LM has learnable byte structure and the scan orderings have real
//! 2-D geometry to chew on. A configurable fraction of key/value fields
//! carry BIO entity tags drawn from four entity types.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Document, Word};
use crate::rng;
use crate::{Error, Result};

/// Entity types emitted by the grammar, in tag-id order.
pub const ENTITY_TYPES: [&str; 4] = ["company", "date", "address", "total"];

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    pub n_docs: usize,
    pub seed: u64,
    /// Byte-token length bounds per document (excluding [CLS]).
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub min_segments: usize,
    pub max_segments: usize,
    pub two_column_fraction: f64,
    /// Fraction of key/value fields whose value carries BIO tags.
    pub entity_fraction: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_docs: 100,
            seed: 0,
            min_tokens: 64,
            max_tokens: 512,
            min_segments: 2,
            max_segments: 8,
            two_column_fraction: 0.4,
            entity_fraction: 0.5,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_docs == 0 {
            return Err(Error::contract("n_docs must be at least 1"));
        }
        if self.min_segments == 0 || self.max_segments < self.min_segments {
            return Err(Error::contract("segment bounds must satisfy 1 <= min <= max"));
        }
        if self.min_tokens < 4 || self.max_tokens < self.min_tokens {
            return Err(Error::contract(
                "token bounds must satisfy 4 <= min <= max",
            ));
        }
        Ok(())
    }
}

const FIELD_LABELS: [(&str, Option<usize>); 6] = [
    ("Vendor", Some(0)),
    ("Date", Some(1)),
    ("Address", Some(2)),
    ("Total", Some(3)),
    ("Invoice", None),
    ("Reference", None),
];

const COMPANY_FIRST: [&str; 8] = [
    "Acme", "Globex", "Initech", "Umbrella", "Stark", "Wayne", "Hooli", "Vandelay",
];
const COMPANY_SECOND: [&str; 6] = ["Corp", "Inc", "LLC", "Industries", "Systems", "Holdings"];
const STREET_NAMES: [&str; 6] = ["Main", "Oak", "Elm", "Maple", "Cedar", "Pine"];
const STREET_KINDS: [&str; 4] = ["Street", "Avenue", "Road", "Lane"];
const TITLE_WORDS: [&str; 6] = ["INVOICE", "RECEIPT", "STATEMENT", "ORDER", "SUMMARY", "QUOTE"];
const FILLER: [&str; 28] = [
    "the", "payment", "terms", "shall", "apply", "within", "days", "of", "receipt", "please",
    "remit", "to", "account", "listed", "above", "thank", "you", "for", "your", "business",
    "all", "items", "subject", "approval", "net", "balance", "carried", "forward",
];

// a word to be placed, with an optional (entity_type, is_begin) tag
type PlannedWord = (String, Option<(usize, bool)>);

fn pick<'a>(r: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[r.gen_range(0..pool.len())]
}

fn value_words(r: &mut ChaCha8Rng, entity: Option<usize>) -> Vec<String> {
    match entity {
        Some(0) => vec![pick(r, &COMPANY_FIRST).into(), pick(r, &COMPANY_SECOND).into()],
        Some(1) => vec![format!(
            "{:04}-{:02}-{:02}",
            r.gen_range(2018..2026),
            r.gen_range(1..13),
            r.gen_range(1..29)
        )],
        Some(2) => vec![
            format!("{}", r.gen_range(1..999)),
            pick(r, &STREET_NAMES).into(),
            pick(r, &STREET_KINDS).into(),
        ],
        Some(3) => vec!["$".into(), format!("{}.{:02}", r.gen_range(1..2000), r.gen_range(0..100))],
        _ => vec![format!("REF-{:05}", r.gen_range(0..100_000))],
    }
}

fn plan_segment(r: &mut ChaCha8Rng, first: bool, entity_fraction: f64) -> Vec<PlannedWord> {
    let kind = if first {
        0
    } else if r.gen::<f64>() < 0.5 {
        1
    } else {
        2
    };
    match kind {
        // title
        0 => {
            let n = r.gen_range(1..=3);
            (0..n).map(|_| (pick(r, &TITLE_WORDS).to_string(), None)).collect()
        }
        // key/value field
        1 => {
            let (label, entity) = FIELD_LABELS[r.gen_range(0..FIELD_LABELS.len())];
            let mut out: Vec<PlannedWord> = vec![(label.to_string(), None), (":".to_string(), None)];
            let tagged = entity.is_some() && r.gen::<f64>() < entity_fraction;
            for (i, w) in value_words(r, entity).into_iter().enumerate() {
                let tag = if tagged { entity.map(|e| (e, i == 0)) } else { None };
                out.push((w, tag));
            }
            out
        }
        // filler paragraph
        _ => {
            let n = r.gen_range(8..=40);
            (0..n).map(|_| (pick(r, &FILLER).to_string(), None)).collect()
        }
    }
}

const PAGE_W: f64 = 612.0;
const MARGIN: f64 = 36.0;
const CHAR_W: f64 = 5.0;
const WORD_H: f64 = 10.0;
const SPACE: f64 = 4.0;
const LINE_GAP: f64 = 4.0;
const SEGMENT_GAP: f64 = 14.0;

/// Generates `cfg.n_docs` documents, identical for identical configs.
pub fn synth_corpus(cfg: &SynthConfig) -> Result<Vec<Document>> {
    cfg.validate()?;
    let mut r = rng::seeded(cfg.seed, rng::stream::SYNTH_CORPUS);
    (0..cfg.n_docs).map(|i| synth_doc(cfg, &mut r, i)).collect()
}

fn synth_doc(cfg: &SynthConfig, r: &mut ChaCha8Rng, doc_idx: usize) -> Result<Document> {
    let target = r.gen_range(cfg.min_tokens..=cfg.max_tokens);
    let seg_budget = r.gen_range(cfg.min_segments..=cfg.max_segments);

    let mut segments: Vec<Vec<PlannedWord>> = Vec::new();
    let mut bytes = 0usize;
    while segments.len() < seg_budget {
        if bytes >= target && segments.len() >= cfg.min_segments {
            break;
        }
        let seg = plan_segment(r, segments.is_empty(), cfg.entity_fraction);
        bytes += seg.iter().map(|(w, _)| w.len()).sum::<usize>();
        segments.push(seg);
    }

    // trim over max: drop trailing untagged-or-not words (never the last one)
    while bytes > cfg.max_tokens {
        let last = segments.last_mut().unwrap();
        if last.len() > 1 {
            bytes -= last.pop().unwrap().0.len();
        } else if segments.len() > 1 {
            bytes -= segments.pop().unwrap()[0].0.len();
        } else {
            break;
        }
    }
    // pad under min with filler sized to fit
    while bytes < cfg.min_tokens {
        let w = pick(r, &FILLER).to_string();
        if bytes + w.len() > cfg.max_tokens {
            let need = cfg.max_tokens - bytes;
            segments.last_mut().unwrap().push(("x".repeat(need.max(1)), None));
            break;
        }
        bytes += w.len();
        segments.last_mut().unwrap().push((w, None));
    }

    // layout: one or two columns, segments alternate columns, y per column
    let two_cols = r.gen::<f64>() < cfg.two_column_fraction && segments.len() >= 2;
    let n_cols = if two_cols { 2 } else { 1 };
    let gutter = 18.0;
    let col_w = (PAGE_W - 2.0 * MARGIN - gutter * (n_cols as f64 - 1.0)) / n_cols as f64;
    let mut col_y = vec![MARGIN; n_cols];

    let mut words = Vec::new();
    for (seg_id, seg) in segments.iter().enumerate() {
        let col = seg_id % n_cols;
        let x0 = MARGIN + col as f64 * (col_w + gutter);
        let mut x = x0;
        let mut y = col_y[col];
        for (text, tag) in seg {
            let w = CHAR_W * text.len() as f64;
            if x + w > x0 + col_w && x > x0 {
                x = x0;
                y += WORD_H + LINE_GAP;
            }
            let entity_tag = tag.map(|(e, begin)| {
                format!("{}-{}", if begin { "B" } else { "I" }, ENTITY_TYPES[e])
            });
            words.push(Word {
                text: text.clone(),
                quad: [x, y, x + w, y, x + w, y + WORD_H, x, y + WORD_H],
                segment_id: seg_id as u32,
                entity_tag,
            });
            x += w + SPACE;
        }
        col_y[col] = y + WORD_H + SEGMENT_GAP;
    }

    let used_h = col_y.iter().fold(0.0f64, |m, v| m.max(*v)) + MARGIN;
    let total: usize = words.iter().map(|w| w.text.len()).sum();
    debug_assert!(
        (cfg.min_tokens..=cfg.max_tokens).contains(&total),
        "token count {total} outside [{}, {}]",
        cfg.min_tokens,
        cfg.max_tokens
    );

    Ok(Document {
        doc_id: format!("synth-{}-{:05}", cfg.seed, doc_idx),
        page_w: PAGE_W,
        page_h: used_h.max(792.0),
        words,
    })
}

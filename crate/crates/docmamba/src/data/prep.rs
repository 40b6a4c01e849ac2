//! Document → model sequence preparation: tokenize, order, chunk.

use crate::metrics::TagSet;
use crate::model::{normalize_box, TokenRecord, IGNORE_LABEL};
use crate::scan_order::{sfbs_order, wfbs_order, LayoutToken, OrderedSequence};
use crate::tokenizer::Tokenizer;
use crate::{data::Document, Error, Result};

/// Which serialization drives the token order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanStrategy {
    Sfbs,
    Wfbs,
}

/// One encoder-ready sequence. Always begins with [CLS] (zero coordinates,
/// ignore label, word_index `usize::MAX`).
#[derive(Debug, Clone)]
pub struct Sequence {
    pub doc_id: String,
    pub records: Vec<TokenRecord>,
    /// BIO tag ids aligned with `records`; IGNORE at [CLS].
    pub bio_labels: Vec<u32>,
    /// Original word index per token, for mapping predictions back.
    pub word_index: Vec<usize>,
}

impl Sequence {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Computes the scan ordering of a document's tokens (before [CLS] insertion).
/// Returns the per-token layout anchors with the permutation.
pub fn order_document(
    doc: &Document,
    tok: &dyn Tokenizer,
    strategy: ScanStrategy,
) -> Result<(Vec<LayoutToken>, OrderedSequence)> {
    let mut layout = Vec::new();
    let mut index = 0usize;
    for (wi, word) in doc.words.iter().enumerate() {
        let poly = normalize_box(&word.quad, doc.page_w, doc.page_h)
            .map_err(|e| Error::parse(format!("words[{wi}].quad: {e}")))?;
        for _ in 0..tok.encode_word(&word.text).len() {
            layout.push(LayoutToken {
                index,
                x_min: poly[0] as i64,
                y_min: poly[1] as i64,
                segment_id: word.segment_id,
            });
            index += 1;
        }
    }
    let ordering = match strategy {
        ScanStrategy::Sfbs => sfbs_order(&layout),
        ScanStrategy::Wfbs => wfbs_order(&layout),
    };
    Ok((layout, ordering))
}

/// Tokenizes, orders and chunks one document into [CLS]-prefixed sequences of
/// at most `max_len` tokens. Chunks split at segment boundaries when the
/// segment fits, otherwise hard-split.
pub fn document_to_sequences(
    doc: &Document,
    tok: &dyn Tokenizer,
    tagset: &TagSet,
    strategy: ScanStrategy,
    max_len: usize,
) -> Result<Vec<Sequence>> {
    if max_len < 2 {
        return Err(Error::contract("max_len must leave room for [CLS] + 1 token"));
    }
    let specials = tok.specials();

    // flat per-token arrays in original order
    let mut token_ids = Vec::new();
    let mut polys = Vec::new();
    let mut segments = Vec::new();
    let mut labels = Vec::new();
    let mut word_of = Vec::new();
    for (wi, word) in doc.words.iter().enumerate() {
        let poly = normalize_box(&word.quad, doc.page_w, doc.page_h)
            .map_err(|e| Error::parse(format!("words[{wi}].quad: {e}")))?;
        let tag = match &word.entity_tag {
            Some(s) => tagset
                .parse(s)
                .map_err(|e| Error::parse(format!("words[{wi}].entity_tag: {e}")))?,
            None => tagset.outside(),
        };
        let ids = tok.encode_word(&word.text);
        for (k, id) in ids.iter().enumerate() {
            token_ids.push(*id);
            polys.push(poly);
            segments.push(word.segment_id);
            // word-level B- applies to the first token; the rest continue
            let t = if k == 0 || tag == tagset.outside() || tag % 2 == 0 {
                tag
            } else {
                tag + 1 // B-x → I-x
            };
            labels.push(t);
            word_of.push(wi);
        }
    }

    let layout: Vec<LayoutToken> = token_ids
        .iter()
        .enumerate()
        .map(|(i, _)| LayoutToken {
            index: i,
            x_min: polys[i][0] as i64,
            y_min: polys[i][1] as i64,
            segment_id: segments[i],
        })
        .collect();
    let ordering = match strategy {
        ScanStrategy::Sfbs => sfbs_order(&layout),
        ScanStrategy::Wfbs => wfbs_order(&layout),
    };

    // chunk the ordered token stream at segment boundaries where possible
    let body = max_len - 1;
    let mut chunks: Vec<(usize, usize)> = Vec::new(); // rank ranges
    let n = ordering.len();
    let mut start = 0usize;
    while start < n {
        let mut end = (start + body).min(n);
        if end < n {
            let seg_at = |rank: usize| segments[ordering.order[rank]];
            // a cut inside a segment retreats to the segment start; a
            // segment longer than the whole chunk hard-splits instead
            if seg_at(end - 1) == seg_at(end) {
                let seg = seg_at(end);
                let mut cut = end;
                while cut > start && seg_at(cut - 1) == seg {
                    cut -= 1;
                }
                if cut > start {
                    end = cut;
                }
            }
        }
        chunks.push((start, end));
        start = end;
    }

    let mut out = Vec::with_capacity(chunks.len().max(1));
    for (lo, hi) in chunks {
        let mut records = Vec::with_capacity(hi - lo + 1);
        let mut bio = Vec::with_capacity(hi - lo + 1);
        let mut widx = Vec::with_capacity(hi - lo + 1);
        records.push(TokenRecord::cls(specials.cls_id));
        bio.push(IGNORE_LABEL);
        widx.push(usize::MAX);
        for rank in lo..hi {
            let i = ordering.order[rank];
            records.push(TokenRecord::new(token_ids[i], polys[i], segments[i]));
            bio.push(labels[i]);
            widx.push(word_of[i]);
        }
        out.push(Sequence {
            doc_id: doc.doc_id.clone(),
            records,
            bio_labels: bio,
            word_index: widx,
        });
    }
    if out.is_empty() {
        // a wordless document still yields the bare [CLS] sequence
        out.push(Sequence {
            doc_id: doc.doc_id.clone(),
            records: vec![TokenRecord::cls(specials.cls_id)],
            bio_labels: vec![IGNORE_LABEL],
            word_index: vec![usize::MAX],
        });
    }
    Ok(out)
}

//! Document ingestion and the training data pipeline.
//!
//! Input documents are JSON with pre-annotated layout segments (segment
//! extraction itself is external):
//!
//! ```json
//! {"doc_id": "...", "page_w": 612.0, "page_h": 792.0,
//!  "words": [{"text": "Total", "quad": [x1,y1,...,y4],
//!             "segment_id": 0, "entity_tag": "B-total"}]}
//! ```
//!
//! [`synth`] generates deterministic desk-scale corpora from a small template
//! grammar, [`prep`] turns documents into ordered model sequences, [`mask`]
//! applies the MLM recipe, and [`batch`] does length-bucketed batching with a
//! constant token budget.

pub mod batch;
pub mod mask;
pub mod prep;
pub mod synth;

use std::path::Path;

use crate::{Error, Result};

/// One OCR word with its quadrilateral in page units.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Word {
    pub text: String,
    pub quad: [f64; 8],
    pub segment_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entity_tag: Option<String>,
}

/// The unit of ingestion: page geometry plus segment-annotated words.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    pub doc_id: String,
    pub page_w: f64,
    pub page_h: f64,
    pub words: Vec<Word>,
}

/// Parses a document, naming the JSON path of the first offending field.
pub fn load_document(bytes: &[u8]) -> Result<Document> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let doc: Document = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Error::parse(format!("{}: {}", e.path(), e.inner())))?;
    if !doc.page_w.is_finite() || !doc.page_h.is_finite() || doc.page_w <= 0.0 || doc.page_h <= 0.0
    {
        return Err(Error::parse(format!(
            "page_w/page_h must be positive and finite, got {}x{}",
            doc.page_w, doc.page_h
        )));
    }
    for (i, w) in doc.words.iter().enumerate() {
        if w.quad.iter().any(|v| !v.is_finite()) {
            return Err(Error::parse(format!("words[{i}].quad: non-finite coordinate")));
        }
    }
    Ok(doc)
}

pub fn load_document_file(path: &Path) -> Result<Document> {
    let bytes = std::fs::read(path)?;
    load_document(&bytes)
}

pub fn document_to_json(doc: &Document) -> String {
    serde_json::to_string_pretty(doc).expect("document serializes")
}

/// Reads every `*.json` document in a directory, sorted by file name.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<Document>> {
    let mut paths: Vec<std::path::PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            load_document_file(p)
                .map_err(|e| Error::parse(format!("{}: {e}", p.display())))
        })
        .collect()
}

// FUNSD-style annotation: a list of labeled form blocks, each with word
// boxes. Blocks become segments; labels become BIO tags over each block's
// words ("other" maps to O).
#[derive(Debug, serde::Deserialize)]
struct FunsdFile {
    form: Vec<FunsdBlock>,
}

#[derive(Debug, serde::Deserialize)]
struct FunsdBlock {
    label: String,
    words: Vec<FunsdWord>,
}

#[derive(Debug, serde::Deserialize)]
struct FunsdWord {
    text: String,
    #[serde(rename = "box")]
    bbox: [f64; 4],
}

/// Converts FUNSD annotation JSON into the native [`Document`] schema.
/// Page dimensions default to the word-box extent when not supplied.
pub fn funsd_to_document(
    bytes: &[u8],
    doc_id: &str,
    page: Option<(f64, f64)>,
) -> Result<Document> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let parsed: FunsdFile = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Error::parse(format!("{}: {}", e.path(), e.inner())))?;

    let mut words = Vec::new();
    for (seg, block) in parsed.form.iter().enumerate() {
        let tagged = !block.label.eq_ignore_ascii_case("other");
        for (wi, w) in block.words.iter().enumerate() {
            let [x0, y0, x1, y1] = w.bbox;
            let entity_tag = if tagged && !w.text.trim().is_empty() {
                let prefix = if wi == 0 { "B" } else { "I" };
                Some(format!("{prefix}-{}", block.label.to_lowercase()))
            } else {
                None
            };
            words.push(Word {
                text: w.text.clone(),
                quad: [x0, y0, x1, y0, x1, y1, x0, y1],
                segment_id: seg as u32,
                entity_tag,
            });
        }
    }

    let (page_w, page_h) = page.unwrap_or_else(|| {
        let w = words
            .iter()
            .flat_map(|w| [w.quad[2], w.quad[4]])
            .fold(1.0f64, f64::max);
        let h = words
            .iter()
            .flat_map(|w| [w.quad[5], w.quad[7]])
            .fold(1.0f64, f64::max);
        (w.ceil(), h.ceil())
    });

    Ok(Document {
        doc_id: doc_id.to_string(),
        page_w,
        page_h,
        words,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "doc_id": "d1", "page_w": 612.0, "page_h": 792.0,
        "words": [{"text": "hello", "quad": [1,2,3,2,3,4,1,4], "segment_id": 0}]
    }"#;

    #[test]
    fn minimal_document_parses() {
        let doc = load_document(MINIMAL.as_bytes()).unwrap();
        assert_eq!(doc.words.len(), 1);
        assert_eq!(doc.words[0].text, "hello");
        assert_eq!(doc.words[0].entity_tag, None);
    }

    #[test]
    fn missing_field_error_names_path() {
        let bad = r#"{
            "doc_id": "d1", "page_w": 612.0, "page_h": 792.0,
            "words": [{"text": "hello", "quad": [1,2,3,2,3,4,1,4]}]
        }"#;
        let err = load_document(bad.as_bytes()).unwrap_err();
        assert!(
            err.to_string().contains("words[0].segment_id")
                || err.to_string().contains("words[0]"),
            "got: {err}"
        );
    }

    #[test]
    fn unknown_field_rejected() {
        let bad = r#"{"doc_id": "d", "page_w": 1, "page_h": 1, "words": [], "extra": 1}"#;
        assert!(load_document(bad.as_bytes()).is_err());
    }

    #[test]
    fn roundtrip_is_semantically_identical() {
        let doc = load_document(MINIMAL.as_bytes()).unwrap();
        let json = document_to_json(&doc);
        let doc2 = load_document(json.as_bytes()).unwrap();
        assert_eq!(doc, doc2);
    }

    #[test]
    fn bad_page_dims_rejected() {
        let bad = r#"{"doc_id": "d", "page_w": 0.0, "page_h": 10.0, "words": []}"#;
        assert!(load_document(bad.as_bytes()).is_err());
    }

    #[test]
    fn funsd_blocks_become_segments_with_bio() {
        let funsd = r#"{"form": [
            {"id": 0, "label": "question", "linking": [],
             "box": [0,0,50,10],
             "words": [{"text": "Name", "box": [0,0,20,10]}, {"text": ":", "box": [22,0,25,10]}]},
            {"id": 1, "label": "other", "box": [0,20,50,30],
             "words": [{"text": "misc", "box": [0,20,20,30]}]}
        ]}"#;
        let doc = funsd_to_document(funsd.as_bytes(), "f1", Some((100.0, 100.0))).unwrap();
        assert_eq!(doc.words.len(), 3);
        assert_eq!(doc.words[0].entity_tag.as_deref(), Some("B-question"));
        assert_eq!(doc.words[1].entity_tag.as_deref(), Some("I-question"));
        assert_eq!(doc.words[2].entity_tag, None);
        assert_eq!(doc.words[0].segment_id, 0);
        assert_eq!(doc.words[2].segment_id, 1);
    }
}

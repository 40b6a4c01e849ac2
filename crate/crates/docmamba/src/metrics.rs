//! BIO tag vocabulary and entity-level precision/recall/F1.
//!
//! Entities are maximal (type, start, end) spans; scoring counts exact
//! span-and-type matches. A stray `I-` with no live span of the same type is
//! repaired by treating it as `B-`.

use crate::{Error, Result};

/// Tag id layout: 0 = O, then per entity type `e`: B = 1+2e, I = 2+2e.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TagSet {
    entity_types: Vec<String>,
}

impl TagSet {
    pub fn new(entity_types: &[&str]) -> Self {
        TagSet {
            entity_types: entity_types.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn entity_types(&self) -> &[String] {
        &self.entity_types
    }

    pub fn num_entity_types(&self) -> usize {
        self.entity_types.len()
    }

    pub fn num_tags(&self) -> usize {
        2 * self.entity_types.len() + 1
    }

    pub fn outside(&self) -> u32 {
        0
    }

    pub fn begin(&self, entity_type: usize) -> u32 {
        (1 + 2 * entity_type) as u32
    }

    pub fn inside(&self, entity_type: usize) -> u32 {
        (2 + 2 * entity_type) as u32
    }

    pub fn name(&self, tag: u32) -> String {
        if tag == 0 {
            return "O".to_string();
        }
        let e = ((tag - 1) / 2) as usize;
        let prefix = if tag % 2 == 1 { "B" } else { "I" };
        format!("{prefix}-{}", self.entity_types[e])
    }

    /// Parses "O" / "B-type" / "I-type"; unknown strings are an error.
    pub fn parse(&self, s: &str) -> Result<u32> {
        if s == "O" {
            return Ok(0);
        }
        let (prefix, typ) = s
            .split_once('-')
            .ok_or_else(|| Error::parse(format!("malformed BIO tag {s:?}")))?;
        let e = self
            .entity_types
            .iter()
            .position(|t| t == typ)
            .ok_or_else(|| Error::parse(format!("unknown entity type {typ:?} in tag {s:?}")))?;
        match prefix {
            "B" => Ok(self.begin(e)),
            "I" => Ok(self.inside(e)),
            _ => Err(Error::parse(format!("malformed BIO tag {s:?}"))),
        }
    }
}

/// An exact entity span: type index, start, end (exclusive).
pub type Span = (usize, usize, usize);

/// Extracts maximal entity spans, repairing stray `I-` as `B-`.
pub fn decode_entities(tags: &[u32], tagset: &TagSet) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, usize)> = None; // (type, start)
    for (i, &tag) in tags.iter().enumerate() {
        if tag == 0 || tag as usize >= tagset.num_tags() {
            if let Some((t, s)) = open.take() {
                spans.push((t, s, i));
            }
            continue;
        }
        let e = ((tag - 1) / 2) as usize;
        let is_begin = tag % 2 == 1;
        match open {
            Some((t, _)) if !is_begin && t == e => {} // continuation
            _ => {
                // B-, or a stray I- treated as B-
                if let Some((t, s)) = open.take() {
                    spans.push((t, s, i));
                }
                open = Some((e, i));
            }
        }
    }
    if let Some((t, s)) = open {
        spans.push((t, s, tags.len()));
    }
    spans
}

/// Entity-level scores: exact span-and-type matching.
pub fn entity_f1(pred: &[u32], gold: &[u32], tagset: &TagSet) -> Result<(f64, f64, f64)> {
    if pred.len() != gold.len() {
        return Err(Error::contract(format!(
            "tag sequences differ in length: {} vs {}",
            pred.len(),
            gold.len()
        )));
    }
    let pred_spans = decode_entities(pred, tagset);
    let gold_spans = decode_entities(gold, tagset);
    entity_scores(&pred_spans, &gold_spans)
}

/// Scores precomputed span sets; useful when accumulating over many
/// sequences.
pub fn entity_scores(pred: &[Span], gold: &[Span]) -> Result<(f64, f64, f64)> {
    let gold_set: std::collections::HashSet<Span> = gold.iter().copied().collect();
    let hits = pred.iter().filter(|s| gold_set.contains(s)).count();
    let p = if pred.is_empty() {
        0.0
    } else {
        hits as f64 / pred.len() as f64
    };
    let r = if gold.is_empty() {
        0.0
    } else {
        hits as f64 / gold.len() as f64
    };
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    Ok((p, r, f1))
}

/// Running span accumulator across sequences.
#[derive(Debug, Default)]
pub struct F1Accumulator {
    pred_total: usize,
    gold_total: usize,
    hits: usize,
}

impl F1Accumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, pred: &[u32], gold: &[u32], tagset: &TagSet) -> Result<()> {
        if pred.len() != gold.len() {
            return Err(Error::contract("tag sequences differ in length"));
        }
        let p = decode_entities(pred, tagset);
        let g = decode_entities(gold, tagset);
        let gold_set: std::collections::HashSet<Span> = g.iter().copied().collect();
        self.hits += p.iter().filter(|s| gold_set.contains(s)).count();
        self.pred_total += p.len();
        self.gold_total += g.len();
        Ok(())
    }

    pub fn scores(&self) -> (f64, f64, f64) {
        let p = if self.pred_total == 0 {
            0.0
        } else {
            self.hits as f64 / self.pred_total as f64
        };
        let r = if self.gold_total == 0 {
            0.0
        } else {
            self.hits as f64 / self.gold_total as f64
        };
        let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        (p, r, f1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts() -> TagSet {
        TagSet::new(&["company", "date", "address", "total"])
    }

    #[test]
    fn tag_names_roundtrip() {
        let t = ts();
        assert_eq!(t.num_tags(), 9);
        for id in 0..t.num_tags() as u32 {
            assert_eq!(t.parse(&t.name(id)).unwrap(), id);
        }
        assert!(t.parse("B-bogus").is_err());
        assert!(t.parse("X-date").is_err());
    }

    #[test]
    fn perfect_prediction_scores_one() {
        let t = ts();
        // three entities: company[1..3], date[4..5], total[6..8]
        let gold = vec![0, t.begin(0), t.inside(0), 0, t.begin(1), 0, t.begin(3), t.inside(3)];
        let (p, r, f1) = entity_f1(&gold, &gold, &t).unwrap();
        assert_eq!((p, r, f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn all_outside_prediction_scores_zero() {
        let t = ts();
        let gold = vec![t.begin(0), t.inside(0), 0, t.begin(1)];
        let pred = vec![0; 4];
        let (p, r, f1) = entity_f1(&pred, &gold, &t).unwrap();
        assert_eq!((p, r, f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn half_recall_full_precision() {
        let t = ts();
        let gold = vec![t.begin(0), t.inside(0), 0, t.begin(1), 0];
        let pred = vec![t.begin(0), t.inside(0), 0, 0, 0];
        let (p, r, f1) = entity_f1(&pred, &gold, &t).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(r, 0.5);
        assert!((f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn stray_inside_repaired_as_begin() {
        let t = ts();
        let with_stray = vec![t.inside(2), t.inside(2), 0];
        let with_begin = vec![t.begin(2), t.inside(2), 0];
        assert_eq!(
            decode_entities(&with_stray, &t),
            decode_entities(&with_begin, &t)
        );
        // type switch inside a span also opens a new entity
        let switched = vec![t.begin(0), t.inside(1)];
        assert_eq!(decode_entities(&switched, &t), vec![(0, 0, 1), (1, 1, 2)]);
    }

    #[test]
    fn adjacent_begins_are_separate_entities() {
        let t = ts();
        let tags = vec![t.begin(0), t.begin(0), t.inside(0)];
        assert_eq!(decode_entities(&tags, &t), vec![(0, 0, 1), (0, 1, 3)]);
    }

    #[test]
    fn length_mismatch_is_contract_error() {
        let t = ts();
        assert!(entity_f1(&[0, 0], &[0], &t).is_err());
    }

    #[test]
    fn accumulator_matches_single_shot() {
        let t = ts();
        let gold = vec![t.begin(0), t.inside(0), 0, t.begin(1), 0];
        let pred = vec![t.begin(0), t.inside(0), 0, 0, 0];
        let mut acc = F1Accumulator::new();
        acc.add(&pred, &gold, &t).unwrap();
        assert_eq!(acc.scores(), entity_f1(&pred, &gold, &t).unwrap());
    }
}

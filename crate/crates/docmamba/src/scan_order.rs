//! Serialization of 2-D document layouts into 1-D token orders.
//!
//! The segment-first scan keeps every layout segment contiguous: tokens sort
//! within their segment by (y, x) descending the page top-to-bottom then
//! left-to-right, and whole segments sort by the same key applied to their
//! topmost token. The word-first variant ignores segments and sorts all
//! tokens globally — the ablation baseline.
//!
//! The reversed scan direction is obtained by reversing a permutation inside
//! the encoder block; it is never materialized as a second ordering here.

use std::collections::BTreeMap;

/// One token's reading anchor: the upper-left vertex of its quad.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutToken {
    /// Position in the original input list; unique within a document.
    pub index: usize,
    pub x_min: i64,
    pub y_min: i64,
    pub segment_id: u32,
}

impl LayoutToken {
    fn key(&self) -> (i64, i64, usize) {
        (self.y_min, self.x_min, self.index)
    }
}

/// A permutation of document tokens plus its inverse.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OrderedSequence {
    /// `order[rank]` = original index of the token scanned at `rank`.
    pub order: Vec<usize>,
    /// `inverse[original_index]` = rank; inverse ∘ order = identity.
    pub inverse: Vec<usize>,
}

impl OrderedSequence {
    fn from_order(order: Vec<usize>) -> Self {
        let mut inverse = vec![0usize; order.len()];
        for (rank, &idx) in order.iter().enumerate() {
            inverse[idx] = rank;
        }
        OrderedSequence { order, inverse }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Applies the ordering to a parallel slice.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        self.order.iter().map(|&i| items[i].clone()).collect()
    }
}

/// Segment-first scan: contiguous segments, (y asc, x asc, index) within and
/// across segments.
pub fn sfbs_order(tokens: &[LayoutToken]) -> OrderedSequence {
    let mut segments: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, t) in tokens.iter().enumerate() {
        debug_assert_eq!(t.index, i, "LayoutToken.index must match list position");
        segments.entry(t.segment_id).or_default().push(i);
    }
    let mut groups: Vec<Vec<usize>> = segments.into_values().collect();
    for g in groups.iter_mut() {
        g.sort_by_key(|&i| tokens[i].key());
    }
    // the segment key is its minimal token key, i.e. the first after sorting
    groups.sort_by_key(|g| tokens[g[0]].key());
    OrderedSequence::from_order(groups.concat())
}

/// Word-first scan: global (y asc, x asc, index) sort, segments ignored.
pub fn wfbs_order(tokens: &[LayoutToken]) -> OrderedSequence {
    let mut order: Vec<usize> = (0..tokens.len()).collect();
    order.sort_by_key(|&i| tokens[i].key());
    OrderedSequence::from_order(order)
}

/// Axis-aligned box for rendering: (x, y, width, height).
pub type RenderBox = [f64; 4];

const RAMP_LIGHT: (f64, f64, f64) = (232.0, 240.0, 254.0);
const RAMP_DARK: (f64, f64, f64) = (26.0, 60.0, 140.0);

/// Renders one rectangle per token, shaded light → dark by scan rank.
/// Deterministic: identical inputs produce byte-identical SVG.
pub fn render_scan_svg(
    boxes: &[RenderBox],
    ordering: &OrderedSequence,
    page_w: f64,
    page_h: f64,
) -> String {
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {page_w:.2} {page_h:.2}\">\n"
    ));
    let n = ordering.len();
    for (rank, &idx) in ordering.order.iter().enumerate() {
        let f = if n > 1 { rank as f64 / (n - 1) as f64 } else { 0.0 };
        let r = (RAMP_LIGHT.0 + f * (RAMP_DARK.0 - RAMP_LIGHT.0)).round() as u8;
        let g = (RAMP_LIGHT.1 + f * (RAMP_DARK.1 - RAMP_LIGHT.1)).round() as u8;
        let b = (RAMP_LIGHT.2 + f * (RAMP_DARK.2 - RAMP_LIGHT.2)).round() as u8;
        let [x, y, w, h] = boxes[idx];
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tok(index: usize, y: i64, x: i64, seg: u32) -> LayoutToken {
        LayoutToken {
            index,
            x_min: x,
            y_min: y,
            segment_id: seg,
        }
    }

    #[test]
    fn empty_document_empty_permutation() {
        let o = sfbs_order(&[]);
        assert!(o.is_empty());
        assert!(wfbs_order(&[]).is_empty());
    }

    #[test]
    fn single_segment_manual_sort() {
        // tokens at (y,x): (10,50), (10,20), (5,90) → (5,90), (10,20), (10,50)
        let tokens = vec![tok(0, 10, 50, 0), tok(1, 10, 20, 0), tok(2, 5, 90, 0)];
        let o = sfbs_order(&tokens);
        assert_eq!(o.order, vec![2, 1, 0]);
        assert_eq!(o.inverse, vec![2, 1, 0]);
    }

    #[test]
    fn higher_segment_precedes_regardless_of_interleaving() {
        // segment B's top token is above segment A's top token; geometry
        // interleaves, but every B token must come first
        let tokens = vec![
            tok(0, 10, 0, 1), // A
            tok(1, 5, 50, 2), // B top
            tok(2, 30, 0, 1), // A
            tok(3, 20, 50, 2), // B (below A's top)
        ];
        let o = sfbs_order(&tokens);
        let rank_of = |i: usize| o.inverse[i];
        assert!(rank_of(1) < rank_of(0));
        assert!(rank_of(3) < rank_of(0), "B tokens must all precede A");
        assert!(rank_of(3) < rank_of(2));
    }

    #[test]
    fn wfbs_interleaves_where_sfbs_keeps_contiguous() {
        // two columns as distinct segments, rows interleaved in y
        let tokens = vec![
            tok(0, 0, 0, 1),
            tok(1, 10, 0, 1),
            tok(2, 5, 100, 2),
            tok(3, 15, 100, 2),
        ];
        let s = sfbs_order(&tokens);
        let w = wfbs_order(&tokens);
        assert_eq!(s.order, vec![0, 1, 2, 3]);
        assert_eq!(w.order, vec![0, 2, 1, 3]);
    }

    #[test]
    fn wfbs_equals_sfbs_on_single_segment() {
        let tokens: Vec<LayoutToken> = (0..20)
            .map(|i| tok(i, (i as i64 * 37) % 11, (i as i64 * 13) % 7, 0))
            .collect();
        assert_eq!(sfbs_order(&tokens), wfbs_order(&tokens));
    }

    #[test]
    fn equal_keys_preserve_input_order() {
        let tokens = vec![tok(0, 3, 3, 0), tok(1, 3, 3, 0), tok(2, 3, 3, 0)];
        assert_eq!(sfbs_order(&tokens).order, vec![0, 1, 2]);
        assert_eq!(wfbs_order(&tokens).order, vec![0, 1, 2]);
    }

    #[test]
    fn svg_empty_doc_is_valid() {
        let o = sfbs_order(&[]);
        let svg = render_scan_svg(&[], &o, 612.0, 792.0);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<rect"));
    }

    #[test]
    fn svg_three_tokens_monotone_ramp() {
        let tokens = vec![tok(0, 0, 0, 0), tok(1, 10, 0, 0), tok(2, 20, 0, 0)];
        let boxes = vec![[0.0, 0.0, 10.0, 5.0], [0.0, 10.0, 10.0, 5.0], [0.0, 20.0, 10.0, 5.0]];
        let o = sfbs_order(&tokens);
        let svg = render_scan_svg(&boxes, &o, 100.0, 100.0);
        assert_eq!(svg.matches("<rect").count(), 3);
        // red channel should strictly decrease from light to dark
        let reds: Vec<u8> = svg
            .match_indices("fill=\"#")
            .map(|(i, _)| u8::from_str_radix(&svg[i + 7..i + 9], 16).unwrap())
            .collect();
        assert!(reds[0] > reds[1] && reds[1] > reds[2]);
    }

    #[test]
    fn svg_regeneration_is_byte_identical() {
        let tokens = vec![tok(0, 7, 3, 0), tok(1, 1, 9, 1)];
        let boxes = vec![[3.0, 7.0, 4.0, 2.0], [9.0, 1.0, 4.0, 2.0]];
        let o = sfbs_order(&tokens);
        let a = render_scan_svg(&boxes, &o, 50.0, 50.0);
        let b = render_scan_svg(&boxes, &o, 50.0, 50.0);
        assert_eq!(a, b);
    }

    fn arb_tokens() -> impl Strategy<Value = Vec<LayoutToken>> {
        prop::collection::vec((0i64..40, 0i64..40, 0u32..6), 0..60).prop_map(|raw| {
            raw.into_iter()
                .enumerate()
                .map(|(i, (y, x, seg))| tok(i, y, x, seg))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn orderings_are_bijections(tokens in arb_tokens()) {
            for o in [sfbs_order(&tokens), wfbs_order(&tokens)] {
                prop_assert_eq!(o.order.len(), tokens.len());
                for (rank, &idx) in o.order.iter().enumerate() {
                    prop_assert_eq!(o.inverse[idx], rank);
                }
                let mut seen = vec![false; tokens.len()];
                for &idx in &o.order {
                    prop_assert!(!seen[idx], "duplicate index in permutation");
                    seen[idx] = true;
                }
            }
        }

        #[test]
        fn sfbs_segments_contiguous_and_monotone(tokens in arb_tokens()) {
            let o = sfbs_order(&tokens);
            // contiguity: each segment's ranks form an interval
            let mut seg_ranks: std::collections::HashMap<u32, Vec<usize>> = Default::default();
            for (rank, &idx) in o.order.iter().enumerate() {
                seg_ranks.entry(tokens[idx].segment_id).or_default().push(rank);
            }
            for (seg, ranks) in seg_ranks {
                let (lo, hi) = (ranks[0], *ranks.last().unwrap());
                prop_assert_eq!(hi - lo + 1, ranks.len(), "segment {} not contiguous", seg);
                // intra-segment key monotone
                for w in ranks.windows(2) {
                    let a = tokens[o.order[w[0]]];
                    let b = tokens[o.order[w[1]]];
                    prop_assert!(a.key() <= b.key());
                }
            }
        }
    }
}

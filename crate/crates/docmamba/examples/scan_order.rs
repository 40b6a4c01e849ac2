//! Segment-first vs word-first serialization on a two-column layout.
//!
//! ```bash
//! cargo run --release --example scan_order
//! ```

use docmamba::scan_order::{render_scan_svg, sfbs_order, wfbs_order, LayoutToken};

fn main() {
    // two columns, interleaved in y; each column is one segment
    let mut tokens = Vec::new();
    let mut boxes = Vec::new();
    for row in 0..4 {
        for (col, seg) in [(40i64, 0u32), (320, 1)] {
            let y = 50 + 60 * row;
            tokens.push(LayoutToken {
                index: tokens.len(),
                x_min: col,
                y_min: y + if seg == 1 { 25 } else { 0 },
                segment_id: seg,
            });
            boxes.push([
                col as f64,
                (y + if seg == 1 { 25 } else { 0 }) as f64,
                200.0,
                30.0,
            ]);
        }
    }

    let sfbs = sfbs_order(&tokens);
    let wfbs = wfbs_order(&tokens);
    println!("segment-first order: {:?}", sfbs.order);
    println!("word-first order:    {:?}", wfbs.order);
    println!("(segment-first keeps each column contiguous; word-first zig-zags rows)");

    let out = std::path::Path::new("target/example-output");
    std::fs::create_dir_all(out).expect("create output dir");
    for (name, ordering) in [("sfbs", &sfbs), ("wfbs", &wfbs)] {
        let svg = render_scan_svg(&boxes, ordering, 612.0, 792.0);
        let path = out.join(format!("scan_{name}.svg"));
        std::fs::write(&path, svg).expect("write svg");
        println!("wrote {}", path.display());
    }
}

//! The selective scan in three forms: the naive reference recurrence, the
//! optimized scan, and token-by-token incremental inference.
//!
//! ```bash
//! cargo run --release --example selective_scan
//! ```

use docmamba::rng;
use docmamba::ssm::{selective_scan, selective_scan_naive, ScanParams, ScanState, SsmDims};
use rand::Rng;

fn main() {
    let dims = SsmDims::for_inner(8);
    let mut r = rng::seeded(42, 0);
    let params: ScanParams<f32> = ScanParams::init(dims, &mut r);

    let len = 256;
    let x: Vec<f32> = (0..len * dims.d_inner).map(|_| r.gen_range(-1.0..1.0)).collect();

    let naive = selective_scan_naive(&x, &params, dims).expect("naive scan");
    let optimized = selective_scan(&x, &params, dims).expect("optimized scan");
    let max_diff = naive
        .iter()
        .zip(&optimized)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    println!("naive vs optimized over L={len}: max |Δ| = {max_diff:.3e}");

    // incremental inference: O(d_inner · n_state) state, any length
    let mut state = ScanState::new(dims);
    let mut y_t = vec![0.0f32; dims.d_inner];
    let mut max_inc = 0.0f32;
    for t in 0..len {
        state
            .step(&params, &x[t * dims.d_inner..(t + 1) * dims.d_inner], &mut y_t)
            .expect("incremental step");
        for c in 0..dims.d_inner {
            max_inc = max_inc.max((y_t[c] - naive[t * dims.d_inner + c]).abs());
        }
    }
    println!("incremental vs naive:            max |Δ| = {max_inc:.3e}");
    println!(
        "state footprint: {} floats, independent of sequence length",
        state.hidden().len()
    );
}

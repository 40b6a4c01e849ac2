//! Central-difference verification of the hand-derived adjoints on a tiny
//! double-precision model.
//!
//! ```bash
//! cargo run --release --example gradcheck
//! ```

use docmamba::model::ModelConfig;
use docmamba::train::gradcheck;

fn main() {
    let cfg = ModelConfig {
        hidden: 16,
        layers: 2,
        d_inner: 32,
        n_state: 4,
        vocab_size: 37,
        coord_bins: 101,
        ..Default::default()
    };
    let report = gradcheck(&cfg, 11, 200).expect("gradcheck");
    println!(
        "checked {} parameters across {} families",
        report.params_checked,
        report.families.len()
    );
    for f in &report.families {
        println!("  {:<32} max err {:.3e}  (n={})", f.family, f.max_rel_err, f.checked);
    }
    println!(
        "\nmax relative error {:.3e} at {} (gate: 1e-4)",
        report.max_rel_err, report.worst_param
    );
    assert!(report.max_rel_err < 1e-4);
}

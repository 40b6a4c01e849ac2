//! Wall-time scaling of the scan encoder vs the quadratic attention
//! baseline, with fitted power-law exponents and a log-log SVG plot.
//!
//! Peak memory uses analytic accounting here; install
//! [`docmamba::bench::CountingAlloc`] as the global allocator (as the
//! `docmamba` binary and the acceptance suite do) for allocator-measured
//! peaks.
//!
//! ```bash
//! cargo run --release --example bench_scaling
//! ```

use docmamba::bench::{bench_scaling, render_scaling_svg, BenchConfig, BenchModel};

fn main() {
    let base = BenchConfig {
        lengths: vec![256, 512, 1024, 2048],
        reps: 3,
        hidden: 64,
        layers: 2,
        n_heads: 4,
        ..Default::default()
    };

    let mut reports = Vec::new();
    for model in [BenchModel::Docmamba, BenchModel::AttentionBaseline] {
        let report = bench_scaling(&BenchConfig {
            model,
            ..base.clone()
        })
        .expect("bench");
        println!("{}:", report.model_tag);
        for s in &report.samples {
            println!(
                "  L={:>5}  {:>8.2} ms  peak {:>10} bytes",
                s.length,
                s.wall_time_s * 1e3,
                s.peak_bytes
            );
        }
        println!(
            "  time exponent {:.3}, memory exponent {:.3} ({})\n",
            report.fitted_time_exponent, report.fitted_mem_exponent, report.mem_method
        );
        reports.push(report);
    }

    let out = std::path::Path::new("target/example-output");
    std::fs::create_dir_all(out).expect("output dir");
    let refs: Vec<&_> = reports.iter().collect();
    let path = out.join("scaling.svg");
    std::fs::write(&path, render_scaling_svg(&refs)).expect("write svg");
    println!("plot written to {}", path.display());
}

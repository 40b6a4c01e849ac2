//! Masked-LM pre-training of a tiny encoder on a synthetic corpus.
//!
//! ```bash
//! cargo run --release --example pretrain_tiny
//! ```

use docmamba::data::mask::MaskingPolicy;
use docmamba::data::synth::{synth_corpus, SynthConfig};
use docmamba::model::ModelConfig;
use docmamba::train::{train_mlm, PipelineConfig, TrainConfig};

fn main() {
    let docs = synth_corpus(&SynthConfig {
        n_docs: 60,
        seed: 3,
        min_tokens: 64,
        max_tokens: 256,
        ..Default::default()
    })
    .expect("corpus");

    let model = ModelConfig {
        hidden: 32,
        layers: 2,
        d_inner: 64,
        n_state: 8,
        ..Default::default()
    };
    let train = TrainConfig {
        lr: 1e-3,
        total_steps: 150,
        grad_clip_norm: Some(1.0),
        seed: 1,
        ..Default::default()
    };
    let pipeline = PipelineConfig {
        token_budget: 2048,
        max_seq_len: 256,
        ..Default::default()
    };

    let mut last_print = 0usize;
    let mut on_step = |m: &docmamba::train::StepMetric| {
        if m.step >= last_print + 25 || m.step == 1 {
            println!("step {:>4}  loss {:.4}  lr {:.2e}", m.step, m.loss, m.lr);
            last_print = m.step;
        }
    };
    let run = train_mlm::<f32>(
        &docs,
        &model,
        &train,
        &pipeline,
        &MaskingPolicy::default(),
        Some(&mut on_step),
        None,
    )
    .expect("training");

    let first = run.metrics.first().unwrap().loss;
    let last = run.metrics.last().unwrap().loss;
    println!("\nloss {first:.4} → {last:.4} over {} steps", run.metrics.len());
    println!("uniform-prediction baseline would be ln({}) = {:.4}", model.vocab_size, (model.vocab_size as f64).ln());

    let out = std::path::Path::new("target/example-output");
    std::fs::create_dir_all(out).expect("output dir");
    let path = out.join("pretrain_tiny.ckpt");
    docmamba::ckpt::save_checkpoint(&path, &model, &run.params).expect("save");
    println!("checkpoint written to {}", path.display());
}

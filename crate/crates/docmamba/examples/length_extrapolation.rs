//! Length extrapolation: train with every sequence capped at 128 tokens,
//! then evaluate masked-LM loss on documents 2–8x longer. With no learned
//! 1-D position table, the encoder accepts any length.
//!
//! ```bash
//! cargo run --release --example length_extrapolation
//! ```

use docmamba::data::mask::MaskingPolicy;
use docmamba::data::prep::ScanStrategy;
use docmamba::data::synth::{synth_corpus, SynthConfig};
use docmamba::model::ModelConfig;
use docmamba::train::{eval_mlm_loss, train_mlm, PipelineConfig, TrainConfig};

fn main() {
    let model = ModelConfig {
        hidden: 32,
        layers: 2,
        d_inner: 64,
        n_state: 8,
        ..Default::default()
    };
    let train = TrainConfig {
        lr: 1e-3,
        total_steps: 300,
        grad_clip_norm: Some(1.0),
        seed: 8,
        ..Default::default()
    };
    let pipeline = PipelineConfig {
        token_budget: 2048,
        max_seq_len: 128, // nothing longer than 128 tokens in training
        scan: ScanStrategy::Sfbs,
        ..Default::default()
    };
    let train_docs = synth_corpus(&SynthConfig {
        n_docs: 100,
        seed: 80,
        min_tokens: 48,
        max_tokens: 120,
        ..Default::default()
    })
    .expect("corpus");

    println!("training with all sequence lengths ≤ {} ...", pipeline.max_seq_len);
    let run = train_mlm::<f32>(
        &train_docs,
        &model,
        &train,
        &pipeline,
        &MaskingPolicy::default(),
        None,
        None,
    )
    .expect("training");
    println!("final train loss {:.4}\n", run.metrics.last().unwrap().loss);

    let uniform = (model.vocab_size as f64).ln();
    println!("held-out masked-LM loss at longer lengths (uniform baseline {uniform:.4}):");
    let eval_pipeline = PipelineConfig {
        max_seq_len: 1100,
        token_budget: 4096,
        ..pipeline
    };
    for (lo, hi) in [(250, 255), (500, 510), (1000, 1020)] {
        let eval_docs = synth_corpus(&SynthConfig {
            n_docs: 12,
            seed: 1000 + hi as u64,
            min_tokens: lo,
            max_tokens: hi,
            max_segments: 12,
            ..Default::default()
        })
        .expect("eval corpus");
        let loss = eval_mlm_loss(
            &eval_docs,
            &run.params,
            &model,
            &eval_pipeline,
            &MaskingPolicy::default(),
            9,
        )
        .expect("eval");
        println!("  ~{:>4} tokens: loss {:.4}", hi, loss);
    }
}

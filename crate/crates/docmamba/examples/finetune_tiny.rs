//! BIO-tagging fine-tuning with a held-out split and entity-level F1.
//!
//! ```bash
//! cargo run --release --example finetune_tiny
//! ```

use docmamba::data::synth::{synth_corpus, SynthConfig, ENTITY_TYPES};
use docmamba::metrics::TagSet;
use docmamba::model::{ModelConfig, ModelParams};
use docmamba::train::{finetune_tagging, FinetuneOptions, PipelineConfig, TrainConfig};

fn main() {
    let docs = synth_corpus(&SynthConfig {
        n_docs: 48,
        seed: 21,
        min_tokens: 48,
        max_tokens: 160,
        entity_fraction: 1.0,
        ..Default::default()
    })
    .expect("corpus");

    let model = ModelConfig {
        hidden: 32,
        layers: 2,
        d_inner: 64,
        n_state: 8,
        dropout_rate: 0.1,
        ..Default::default()
    };
    let train = TrainConfig {
        lr: 2e-3,
        total_steps: 400,
        grad_clip_norm: Some(1.0),
        seed: 2,
        ..Default::default()
    };
    let pipeline = PipelineConfig {
        token_budget: 1024,
        max_seq_len: 256,
        ..Default::default()
    };
    let tagset = TagSet::new(&ENTITY_TYPES);

    let init = ModelParams::<f32>::init(&model, train.seed);
    let run = finetune_tagging(
        &docs,
        init,
        &model,
        &train,
        &pipeline,
        &FinetuneOptions {
            eval_fraction: 0.25,
            eval_every: 50,
            ..Default::default()
        },
        &tagset,
        None,
    )
    .expect("fine-tuning");

    println!("held-out entity F1 over training:");
    for (step, f1) in &run.f1_curve {
        println!("  step {step:>4}  F1 {f1:.4}");
    }
    println!(
        "final tag loss {:.4} after {} steps",
        run.metrics.last().unwrap().loss,
        run.metrics.len()
    );
}

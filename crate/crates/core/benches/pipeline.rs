//! Feature extraction and baseline mining over a synthetic corpus, on the
//! rayon pool and on a single worker. Build with `--no-default-features`
//! to measure the plain sequential fallback.

use std::hint::black_box;

use criterion::{BenchmarkId, Criterion, criterion_group, criterion_main};
use rationale_miner::backends::{DspaBaseline, PairClassifier, SentenceClassifier, TrainParams};
use rationale_miner::corpus::{CleanConfig, IssueDocument, Segmenter};
use rationale_miner::eval::{label_documents, synthetic_corpus, train_baselines};
use rationale_miner::features::FeatureExtractor;
use rationale_miner::miner::Miner;
use rationale_miner::par;

fn pipeline(c: &mut Criterion) {
    let corpus = synthetic_corpus(80, 7);
    let docs: Vec<IssueDocument> = corpus
        .issues
        .iter()
        .map(|i| IssueDocument::build(i, &CleanConfig::default(), &Segmenter::default()))
        .collect();
    let labeled = label_documents(docs.clone(), &corpus.annotations).unwrap();
    let extractor = FeatureExtractor::default();
    let (dsea, dspa) = train_baselines(&labeled, &extractor, TrainParams { epochs: 100, ..Default::default() }, 1).unwrap();
    let pairs = PairClassifier::Baseline(dspa.unwrap_or_else(DspaBaseline::zeros));
    let miner = Miner::new(SentenceClassifier::Baseline(dsea), pairs);

    let backend = if par::is_parallel() { "rayon" } else { "sequential" };
    let workers: &[usize] = if par::is_parallel() { &[0, 1] } else { &[1] };
    let mut group = c.benchmark_group(format!("pipeline/{backend}"));
    for &w in workers {
        let label = if w == 0 { "all-cores".to_string() } else { format!("{w}-worker") };
        group.bench_with_input(BenchmarkId::new("features", &label), &w, |b, &w| {
            b.iter(|| {
                par::with_workers(w, || {
                    par::map(&docs, |d| {
                        d.sentences.iter().map(|s| extractor.sentence_features(d, s).unwrap().to_vec()).collect::<Vec<_>>()
                    })
                })
            })
        });
        group.bench_with_input(BenchmarkId::new("mine", &label), &w, |b, &w| {
            b.iter(|| par::with_workers(w, || black_box(miner.mine_corpus(&corpus.issues))))
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = pipeline
}
criterion_main!(benches);

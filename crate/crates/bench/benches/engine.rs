use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use waterbid_bench::{corpus, offers, scripted_game};
use waterbid_core::agents::parse_decision;
use waterbid_core::analysis::{aggregate, compute_indicators, export};
use waterbid_core::engine::{allocate, replay, AllocationRule};
use waterbid_core::harness::{run_experiment, ExperimentSetting, RunOptions, StandardFactory};

fn allocation(c: &mut Criterion) {
    let mut group = c.benchmark_group("allocate");
    for n in [5, 8, 32] {
        let (bids, reqs) = offers(n, 7);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_function(format!("{n}_bidders"), |b| {
            b.iter(|| allocate(black_box(&bids), &reqs, black_box(40), AllocationRule::SkipAndContinue).unwrap())
        });
    }
    group.finish();
}

fn games(c: &mut Criterion) {
    let mut group = c.benchmark_group("game");
    group.bench_function("scripted_20_days", |b| b.iter(|| scripted_game(black_box(11))));
    let rec = scripted_game(11);
    group.bench_function("replay", |b| b.iter(|| replay(black_box(&rec)).unwrap()));
    group.bench_function("indicators", |b| b.iter(|| compute_indicators(black_box(&rec)).unwrap()));
    let json = rec.to_json();
    group.bench_function("record_from_json", |b| {
        b.iter(|| waterbid_core::GameRecord::from_json(black_box(&json)).unwrap())
    });
    group.finish();
}

fn parsing(c: &mut Criterion) {
    let reply = "Considering my health of 3 and the scarce supply, I will bid $85 today. \
                 Last time $70 was not enough.";
    c.bench_function("parse_reply", |b| b.iter(|| parse_decision(black_box(reply), 200)));
}

fn analysis(c: &mut Criterion) {
    let records = corpus(10);
    let failed = BTreeMap::new();
    let mut group = c.benchmark_group("analysis");
    group.throughput(Throughput::Elements(records.len() as u64));
    group.bench_function("aggregate_6x10", |b| b.iter(|| aggregate(black_box(&records), &failed).unwrap()));
    let summaries = aggregate(&records, &failed).unwrap();
    group.bench_function("summary_table", |b| b.iter(|| export::summary_table(black_box(&summaries))));
    group.finish();
}

fn harness(c: &mut Criterion) {
    let setting = ExperimentSetting::standard(1, 10, "scripted:desperation".parse().unwrap(), 0).unwrap();
    let factory = StandardFactory::scripted_only();
    let mut group = c.benchmark_group("harness");
    group.sample_size(20);
    for parallelism in [1, 0] {
        let options = RunOptions { parallelism, ..RunOptions::default() };
        group.bench_function(format!("setting_1_x10_par{parallelism}"), |b| {
            b.iter_batched(
                || tempfile::tempdir().unwrap(),
                |dir| run_experiment(&setting, dir.path(), &factory, &options).unwrap(),
                BatchSize::PerIteration,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, allocation, games, parsing, analysis, harness);
criterion_main!(benches);

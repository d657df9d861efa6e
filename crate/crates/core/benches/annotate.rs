//! Sequential vs data-parallel annotation of a synthetic table.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use rowlink::synth::SynthSpec;
use rowlink::table::Table;
use rowlink::{Annotator, Execution, KnowledgeGraph, PipelineConfig};

fn bench_annotate(c: &mut Criterion) {
    let spec = SynthSpec::with_triples(200_000, 5);
    let mut dump = Vec::new();
    spec.write_ntriples(&mut dump).unwrap();
    let (kg, _) = KnowledgeGraph::from_reader(dump.as_slice()).unwrap();
    let config = PipelineConfig::default();

    let mut group = c.benchmark_group("annotate");
    group.sample_size(20);
    for rows in [100usize, 1000] {
        let (cells, _) = spec.table(rows, 17);
        let table = Table::from_rows("bench", cells).unwrap();
        group.throughput(Throughput::Elements(rows as u64));
        for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let annotator = Annotator::new(&kg, &config, exec);
            group.bench_with_input(BenchmarkId::new(name, rows), &table, |b, t| b.iter(|| annotator.annotate(t)));
        }
    }
    group.finish();
}

fn bench_lookup(c: &mut Criterion) {
    let spec = SynthSpec::with_triples(200_000, 5);
    let mut dump = Vec::new();
    spec.write_ntriples(&mut dump).unwrap();
    let (kg, _) = KnowledgeGraph::from_reader(dump.as_slice()).unwrap();
    let opts = Default::default();
    let labels: Vec<String> = (0..200).map(|i| spec.label(i * 97)).collect();
    c.bench_function("one_cell_lookup/200 labels", |b| {
        b.iter(|| labels.iter().map(|l| kg.one_cell_lookup(l, usize::MAX, &opts).len()).sum::<usize>())
    });
}

criterion_group!(benches, bench_annotate, bench_lookup);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use toricurve_core::embed::{build_embedding_data, chart_maps};
use toricurve_core::intersect::{find_ample, xi_vector};
use toricurve_core::rational::int;
use toricurve_core::verify::{certify, VerifyOptions};
use toricurve_core::{Fan, ProjectiveLine, XiMethod};

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for name in Fan::PRESETS {
        let fan = Fan::preset(name).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &fan, |b, fan| {
            b.iter(|| {
                let h = find_ample(fan).unwrap();
                let xi = xi_vector(fan, &h, XiMethod::Intersection, &ProjectiveLine).unwrap();
                let data = build_embedding_data(fan, &h, &xi, 0, &[int(1), int(1), int(1)]).unwrap();
                certify(&data, &VerifyOptions::default()).unwrap()
            })
        });
    }
    group.finish();
}

fn stages(c: &mut Criterion) {
    let fan = Fan::preset("p3").unwrap().random_blowups(6, 1).unwrap();
    c.bench_function("find_ample/10-rays", |b| b.iter(|| find_ample(&fan).unwrap()));
    let h = find_ample(&fan).unwrap();
    c.bench_function("xi/10-rays", |b| {
        b.iter(|| xi_vector(&fan, &h, XiMethod::Intersection, &ProjectiveLine).unwrap())
    });
    let p = Fan::preset("p1p1p1").unwrap();
    let h = find_ample(&p).unwrap();
    let xi = xi_vector(&p, &h, XiMethod::Intersection, &ProjectiveLine).unwrap();
    let data = build_embedding_data(&p, &h, &xi, 0, &[int(1), int(1), int(1)]).unwrap();
    c.bench_function("charts/p1p1p1", |b| b.iter(|| chart_maps(&data).unwrap()));
}

criterion_group!(benches, pipeline, stages);
criterion_main!(benches);

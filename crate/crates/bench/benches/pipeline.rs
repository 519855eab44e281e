use criterion::{criterion_group, criterion_main, Criterion};
use globaldrive::compiler::{compile, CompileMode};
use globaldrive::designer::{design, ua_flip_problem};
use globaldrive::engine::EngineChoice;
use globaldrive::verify::{ghz_circuit, verify_schedule, VERIFY_TOLERANCE};
use globaldrive::Mode;
use globaldrive_bench::library;

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);

    let problem = ua_flip_problem(4);
    group.bench_function("design_ua_flip", |b| b.iter(|| design(&problem).unwrap()));

    let lib = library();
    let ghz = ghz_circuit();
    for mode in [CompileMode::Dependent, CompileMode::Universal] {
        group.bench_function(format!("compile_ghz_{mode}"), |b| {
            b.iter(|| compile(&ghz, mode, &lib).unwrap())
        });
        let (arr, schedule) = compile(&ghz, mode, &lib).unwrap();
        group.bench_function(format!("verify_ghz_{mode}"), |b| {
            b.iter(|| {
                verify_schedule(
                    &arr,
                    &schedule,
                    mode,
                    EngineChoice::Auto,
                    Mode::Unit,
                    VERIFY_TOLERANCE,
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use wavedsm_bench::{circle_setup, three_scatterers};
use wavedsm_core::forward::{spectrum_from_series, synthesize_timeseries, SynthesisOptions};
use wavedsm_core::imaging::{indicator_freq_grid, indicator_grid};
use wavedsm_core::signals::FrequencyGrid;
use wavedsm_core::specfun::hankel0_first;
use wavedsm_core::{Dim, ImagingConfig, SamplingGrid, SignalSpec, TimeGrid};

fn hankel(c: &mut Criterion) {
    // one argument per branch: series, integral, asymptotic
    for x in [0.7, 9.0, 60.0] {
        let z = Complex64::new(x, 0.3);
        c.bench_function(&format!("hankel0_first({x}+0.3i)"), |b| b.iter(|| hankel0_first(black_box(z))));
    }
}

fn synthesis(c: &mut Criterion) {
    let (scene, setup) = (three_scatterers(), circle_setup());
    let spec = SignalSpec::gauss_mod_sine(20.0).unwrap();
    let time = TimeGrid::from_terminal(6.0, 0.02).unwrap();
    let opts = SynthesisOptions::default();
    c.bench_function("synthesize 48x300", |b| {
        b.iter(|| synthesize_timeseries(&setup, &scene, &spec, &time, &opts).unwrap())
    });
}

fn imaging(c: &mut Criterion) {
    let (scene, setup) = (three_scatterers(), circle_setup());
    let spec = SignalSpec::gauss_mod_sine(20.0).unwrap();
    let time = TimeGrid::from_terminal(6.0, 0.02).unwrap();
    let ts = synthesize_timeseries(&setup, &scene, &spec, &time, &SynthesisOptions::default()).unwrap();
    let grid = SamplingGrid::cube(Dim::Two, -2.5, 2.5, 30).unwrap();
    let cfg = ImagingConfig::new(Dim::Two, 4.0, 0.0, 6.0).unwrap();
    let spectrum = spectrum_from_series(&ts, 0.0, &FrequencyGrid::for_series(&time).unwrap()).unwrap();
    let mut g = c.benchmark_group("indicator 30x30");
    g.sample_size(10);
    g.bench_function("time path", |b| b.iter(|| indicator_grid(&grid, &ts, &setup, &cfg).unwrap()));
    g.bench_function("frequency path", |b| b.iter(|| indicator_freq_grid(&grid, &spectrum, &setup, &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, hankel, synthesis, imaging);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use sicmaser::{
    fit_line_group, isotope_site_probabilities, resonance_fields_exact, splitting_sweep,
    synthesize_spectrum, FieldGrid, FitOptions, LineGroupFit, Orientation, TransitionLabel,
    WeightMode,
};
use sicmaser_bench::{pumped_polarization, room_temperature_conditions, standard_trace, v2_system};

fn bench_resonance_fields(c: &mut Criterion) {
    let system = v2_system();
    let orient = Orientation::from_degrees(30.0).unwrap();
    c.bench_function("resonance_fields_exact", |b| {
        b.iter(|| resonance_fields_exact(black_box(&system), black_box(9.3), orient).unwrap())
    });
}

fn bench_angle_sweep(c: &mut Criterion) {
    let system = v2_system();
    let thetas: Vec<Orientation> = (0..=180)
        .map(|d| Orientation::from_degrees(d as f64).unwrap())
        .collect();
    c.bench_function("splitting_sweep_1deg", |b| {
        b.iter(|| splitting_sweep(black_box(&system), 9.3, black_box(&thetas)).unwrap())
    });
}

fn bench_synthesis(c: &mut Criterion) {
    let system = v2_system();
    let conditions = room_temperature_conditions();
    let polarization = pumped_polarization();
    let grid = FieldGrid::new(326.0, 339.0, 0.039 / 25.0).unwrap();
    c.bench_function("synthesize_spectrum", |b| {
        b.iter(|| {
            synthesize_spectrum(
                black_box(&system),
                &conditions,
                &grid,
                0.039,
                &polarization,
                None,
            )
            .unwrap()
        })
    });
}

fn bench_line_group_fit(c: &mut Criterion) {
    let trace = standard_trace();
    let system = v2_system();
    let set = resonance_fields_exact(&system, 9.3, room_temperature_conditions().orientation).unwrap();
    let b_minus = set.transition(TransitionLabel::BMinus).resonance_field_mt;
    let window = (b_minus - 1.3, b_minus + 1.3);
    let probs = isotope_site_probabilities(0.047, 12).unwrap();
    let mode = WeightMode::AbundanceConstrained {
        satellite_to_central: probs.satellite_to_central_ratio(),
    };
    let initial = LineGroupFit::guess_from_window(&trace, window, 0.9, mode, 0.0).unwrap();
    c.bench_function("fit_line_group_constrained", |b| {
        b.iter(|| {
            fit_line_group(
                black_box(&trace),
                window,
                &initial,
                mode,
                &FitOptions::default(),
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_resonance_fields,
    bench_angle_sweep,
    bench_synthesis,
    bench_line_group_fit
);
criterion_main!(benches);

//! Temporary scaling probe, not part of the suite. Run with
//! `cargo test --test timing_probe -- --ignored --nocapture`.

use std::time::Instant;

use sle::driving::{IncrementKind, PartitionScheme};
use sle::slitmap::Discretization;
use sle::trace::{self, Algorithm, RunSpec};
use sle::{blocks, trace::trace_indices};

fn spec(n_steps: usize, algorithm: Algorithm) -> RunSpec {
    RunSpec {
        kappa: 8.0 / 3.0,
        n_steps,
        stride: n_steps / 1000,
        discretization: Discretization::Tilted,
        scheme: PartitionScheme::Uniform,
        increments: IncrementKind::Gaussian,
        seed: 20260816,
        algorithm,
        block_len: None,
        order: None,
        threshold: None,
        eps: 1e-6,
    }
}

fn tpp(s: &RunSpec, reps: usize) -> f64 {
    let maps = trace::build_maps(s).unwrap();
    let indices = trace_indices(s.n_steps, s.stride).unwrap();
    let mut best = f64::INFINITY;
    for _ in 0..reps {
        let t0 = Instant::now();
        let out = match s.algorithm {
            Algorithm::Baseline => {
                trace::compute_trace_baseline(&maps, &indices, s).unwrap()
            }
            Algorithm::Fast => {
                let bl =
                    blocks::build_blocks(&maps, s.resolved_block_len(), s.resolved_order())
                        .unwrap();
                trace::compute_trace_fast(&maps, &bl, &indices, s.resolved_threshold(), s)
                    .unwrap()
            }
        };
        let dt = t0.elapsed().as_secs_f64();
        std::hint::black_box(out.points().len());
        best = best.min(dt / indices.len() as f64);
    }
    best * 1e6
}

#[test]
#[ignore]
fn scaling_probe() {
    let ns = [10_000usize, 30_000, 100_000, 300_000];
    let mut rows = Vec::new();
    for &n in &ns {
        let base = tpp(&spec(n, Algorithm::Baseline), 3);
        let fast = tpp(&spec(n, Algorithm::Fast), 3);
        println!(
            "N = {n:>7}  d = {:>4}  baseline {base:>10.2} us/pt  fast {fast:>8.3} us/pt  speedup {:.1}x",
            n / 1000,
            base / fast
        );
        rows.push((n as f64, base, fast));
    }
    for (name, pick) in [("baseline", 1usize), ("fast", 2)] {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (r.0.ln(), if pick == 1 { r.1.ln() } else { r.2.ln() }))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        println!("{name} loglog slope = {slope:.4}");
    }
}

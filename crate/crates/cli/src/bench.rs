//! Wall-clock timing of decomposition plus recomposition.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{ensure, Context, Result};
use atw_core::{MockFieldSpec, Mode, ReswarpConfig, Reswarper, ResamplingMethod};
use serde::Serialize;

use crate::synthetic::textured;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub size: usize,
    pub mode: Mode,
    pub median_ms: f64,
    pub p95_ms: f64,
}

/// Field used for timing: a gentle radial expansion about the center.
pub fn bench_field_spec(base: usize) -> MockFieldSpec {
    let c = (base as f32 - 1.0) / 2.0;
    MockFieldSpec::Radial { cx: c, cy: c, gain: 0.05 }
}

/// Nearest-rank percentile of an ascending slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Times one full frame (decompose + recompose) per iteration for every
/// `(size, mode)` pair on a square RGB test image. Frames go through one
/// [`Reswarper`] per pair, as in a streaming loop, and an untimed warm-up
/// frame sizes its buffers first. Modes alternate within each iteration so
/// load changes on the machine affect all of them alike.
pub fn run_bench(
    sizes: &[usize],
    modes: &[Mode],
    iterations: usize,
    base: usize,
    method: ResamplingMethod,
) -> Result<Vec<BenchRow>> {
    ensure!(iterations >= 1, "need at least one iteration");
    let field = bench_field_spec(base).generate(base)?;
    let mut rows = Vec::new();
    for &size in sizes {
        let img = textured(size, size, 3, size as u64);
        let mut engines = Vec::with_capacity(modes.len());
        for &mode in modes {
            let cfg = ReswarpConfig::new(mode).with_base_size(base).with_method(method);
            engines.push(Reswarper::new(cfg)?);
        }
        let frame = |engine: &mut Reswarper| -> Result<()> {
            let low = engine.decompose(&img)?.low().clone();
            engine.recompose(&low, &field)?;
            Ok(())
        };
        for (engine, mode) in engines.iter_mut().zip(modes) {
            frame(engine).with_context(|| format!("{size}x{size} {mode}"))?;
        }
        let mut times = vec![Vec::with_capacity(iterations); modes.len()];
        for _ in 0..iterations {
            for (engine, t) in engines.iter_mut().zip(&mut times) {
                let start = Instant::now();
                frame(engine)?;
                t.push(start.elapsed().as_secs_f64() * 1e3);
            }
        }
        for (&mode, mut t) in modes.iter().zip(times) {
            t.sort_by(f64::total_cmp);
            rows.push(BenchRow {
                size,
                mode,
                median_ms: median(&t),
                p95_ms: percentile(&t, 95.0),
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("size,mode,median_ms,p95_ms\n");
    for r in rows {
        writeln!(out, "{},{},{:.3},{:.3}", r.size, r.mode, r.median_ms, r.p95_ms).unwrap();
    }
    out
}

pub fn to_table(rows: &[BenchRow]) -> String {
    let mut out = format!("{:>6}  {:<10}  {:>10}  {:>10}\n", "size", "mode", "median ms", "p95 ms");
    for r in rows {
        writeln!(
            out,
            "{:>6}  {:<10}  {:>10.2}  {:>10.2}",
            r.size,
            r.mode.name(),
            r.median_ms,
            r.p95_ms
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_statistics() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(median(&v), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
        assert_eq!(percentile(&v, 95.0), 4.0);
        assert_eq!(percentile(&[5.0], 95.0), 5.0);
        let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&hundred, 95.0), 95.0);
    }

    #[test]
    fn single_iteration_csv_is_well_formed() {
        let rows = run_bench(&[32], &[Mode::Vanilla, Mode::Multiscale], 1, 16, ResamplingMethod::Bilinear).unwrap();
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "size,mode,median_ms,p95_ms");
        assert_eq!(lines.len(), 3);
        for line in &lines[1..] {
            let cols: Vec<&str> = line.split(',').collect();
            assert_eq!(cols.len(), 4);
            assert_eq!(cols[0], "32");
            assert!(cols[2].parse::<f64>().unwrap().is_finite());
            assert!(cols[3].parse::<f64>().unwrap() >= cols[2].parse::<f64>().unwrap());
        }
        assert_eq!(rows[0].median_ms, rows[0].p95_ms);
    }

    #[test]
    fn medians_grow_with_pixel_count() {
        // Each size has 4x the pixels of the previous one, well beyond timing noise.
        let rows = run_bench(&[128, 256, 512], &[Mode::Vanilla, Mode::Multiscale], 3, 16, ResamplingMethod::Bilinear).unwrap();
        for mode in [Mode::Vanilla, Mode::Multiscale] {
            let medians: Vec<f64> = rows.iter().filter(|r| r.mode == mode).map(|r| r.median_ms).collect();
            assert_eq!(medians.len(), 3);
            assert!(medians.windows(2).all(|w| w[0] <= w[1]), "{mode}: {medians:?}");
        }
    }

    #[test]
    fn uhd_multiscale_completes() {
        let rows = run_bench(&[4096], &[Mode::Multiscale], 1, 128, ResamplingMethod::Bilinear).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].median_ms.is_finite() && rows[0].median_ms > 0.0);
    }

    #[test]
    fn invalid_multiscale_size_is_an_error() {
        assert!(run_bench(&[48], &[Mode::Multiscale], 1, 16, ResamplingMethod::Bilinear).is_err());
    }
}

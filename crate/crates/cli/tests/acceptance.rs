//! Acceptance criteria for the engine. Every criterion runs inside one test
//! so the timing criteria are not disturbed by concurrently running tests.
//! Each prints a PASS/FAIL line; the test fails if any criterion fails.

use std::time::Instant;

use atw_cli::bench::run_bench;
use atw_cli::synthetic::{dot_pattern, textured};
use atw_cli::{cmd_decompose, cmd_reswarp, run_animation, AnimationJob, FieldSource, ReswarpJob, ReswarpSource};
use atw_core::{
    decompose, load_image, recompose, save_image, upsample, warp, ImageBuffer, MockFieldSpec, Mode,
    MotionField, ReswarpConfig, ResamplingMethod,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const IDENTITY_TOL: f32 = 1e-5;
const IDENTITY_BUDGET_S: f64 = 60.0;
const UHD_BUDGET_S: f64 = 5.0;
const MAX_MULTISCALE_OVERHEAD_MS: f64 = 25.0;
const WARP_ORACLE_TOL: f32 = 1e-6;
const LINEARITY_R2: f64 = 0.999;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn random_image(rng: &mut StdRng, side: usize) -> ImageBuffer {
    let data = (0..side * side * 3).map(|_| rng.gen_range(-1.0f32..=1.0)).collect();
    ImageBuffer::new(side, side, 3, data).unwrap()
}

fn reconstruction_identity() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5EED);
    let start = Instant::now();
    let mut worst = 0.0f32;
    let mut clamped = 0;
    let mut runs = 0;
    for side in [256, 512, 1024] {
        for _ in 0..50 {
            let img = random_image(&mut rng, side);
            for mode in [Mode::Vanilla, Mode::Multiscale] {
                let cfg = ReswarpConfig::new(mode);
                let parts = decompose(&img, &cfg).unwrap();
                let out = recompose(parts.low(), &parts, &MotionField::zeros(128, 128), &cfg).unwrap();
                worst = worst.max(out.image.max_abs_diff(&img).unwrap());
                clamped += out.clamped;
                runs += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        name: "reconstruction identity (50 images x {256,512,1024}^2, both modes)",
        passed: worst <= IDENTITY_TOL && clamped == 0 && secs < IDENTITY_BUDGET_S,
        detail: format!("{runs} runs, max abs error {worst:e}, clamped {clamped}, {secs:.1} s"),
    }
}

fn uhd_multiscale() -> Outcome {
    let img = textured(4096, 4096, 3, 4096);
    let field = MockFieldSpec::Radial { cx: 63.5, cy: 63.5, gain: 0.05 }.generate(128).unwrap();
    let cfg = ReswarpConfig::new(Mode::Multiscale);
    let (secs, out) = single_threaded(|| {
        let start = Instant::now();
        let parts = decompose(&img, &cfg).unwrap();
        let out = recompose(parts.low(), &parts, &field, &cfg).unwrap();
        (start.elapsed().as_secs_f64(), out)
    });
    let in_range = out.image.data().iter().all(|v| (-1.0..=1.0).contains(v));
    Outcome {
        name: "4K multiscale, single thread",
        passed: secs < UHD_BUDGET_S && in_range && out.image.dimensions() == (4096, 4096),
        detail: format!("{secs:.2} s, in range: {in_range}, clamped {}", out.clamped),
    }
}

fn efficiency_ordering() -> Outcome {
    let rows = run_bench(&[1024], &[Mode::Vanilla, Mode::Multiscale], 9, 128, ResamplingMethod::Bilinear).unwrap();
    let vanilla = rows.iter().find(|r| r.mode == Mode::Vanilla).unwrap().median_ms;
    let multi = rows.iter().find(|r| r.mode == Mode::Multiscale).unwrap().median_ms;
    let overhead = multi - vanilla;
    Outcome {
        name: "efficiency ordering at 1024^2",
        passed: multi >= vanilla && overhead <= MAX_MULTISCALE_OVERHEAD_MS,
        detail: format!("vanilla {vanilla:.2} ms, multiscale {multi:.2} ms, overhead {overhead:.2} ms"),
    }
}

/// Clamp the position, then blend the four surrounding samples.
fn oracle_sample(img: &ImageBuffer, x: f64, y: f64, c: usize) -> f64 {
    let x = x.max(0.0).min((img.width() - 1) as f64);
    let y = y.max(0.0).min((img.height() - 1) as f64);
    let (xl, yl) = (x.floor(), y.floor());
    let mut acc = 0.0;
    for (cx, wx) in [(xl, 1.0 - (x - xl)), (xl + 1.0, x - xl)] {
        for (cy, wy) in [(yl, 1.0 - (y - yl)), (yl + 1.0, y - yl)] {
            if wx * wy == 0.0 {
                continue;
            }
            let ix = (cx as usize).min(img.width() - 1);
            let iy = (cy as usize).min(img.height() - 1);
            acc += wx * wy * f64::from(img.get(ix, iy, c));
        }
    }
    acc
}

fn warp_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xF10);
    let mut worst = 0.0f32;
    for _ in 0..1000 {
        let (w, h) = (rng.gen_range(1..=16), rng.gen_range(1..=16));
        let c = [1, 3][rng.gen_range(0..2)];
        let img = ImageBuffer::new(w, h, c, (0..w * h * c).map(|_| rng.gen_range(-2.0f32..=2.0)).collect()).unwrap();
        let reach = rng.gen_range(0.0f32..24.0);
        let field = MotionField::new(w, h, (0..w * h * 2).map(|_| rng.gen_range(-reach..=reach)).collect()).unwrap();
        let got = warp(&img, &field).unwrap();
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = field.at(x, y);
                for ch in 0..c {
                    let want = oracle_sample(&img, x as f64 + f64::from(dx), y as f64 + f64::from(dy), ch);
                    worst = worst.max((got.get(x, y, ch) as f64 - want).abs() as f32);
                }
            }
        }
    }
    Outcome {
        name: "warp matches nested-loop bilinear oracle (1000 pairs)",
        passed: worst <= WARP_ORACLE_TOL,
        detail: format!("max abs error {worst:e}"),
    }
}

/// x-centroid of the positive part of `frame - static_part`.
fn residual_centroid(frame: &ImageBuffer, static_part: &ImageBuffer) -> f64 {
    let (mut mass, mut moment) = (0.0, 0.0);
    for y in 0..frame.height() {
        for x in 0..frame.width() {
            let w = f64::from(frame.get(x, y, 0) - static_part.get(x, y, 0)).max(0.0);
            mass += w;
            moment += w * x as f64;
        }
    }
    moment / mass
}

/// Coefficient of determination of the least-squares line through the points.
fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn alpha_schedule() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("dots.png");
    save_image(&dot_pattern(512, 512, 64, 1.5), &input).unwrap();
    let raw = load_image(&input).unwrap();

    let mut job = AnimationJob::new(&input, FieldSource::Mock("translate:6,0".parse().unwrap()), dir.path().join("frames"));
    job.retain_frames = true;
    let outcome = run_animation(&job).unwrap();
    let frames = &outcome.frames;
    let frame0_err = frames[0].max_abs_diff(&raw).unwrap();

    let low = decompose(&raw, &job.cfg).unwrap().low().clone();
    let static_part = upsample(&low, 512, 512, ResamplingMethod::Bilinear).unwrap();
    let centroids: Vec<f64> = frames.iter().map(|f| residual_centroid(f, &static_part)).collect();
    let alphas: Vec<f64> = job.alphas.iter().map(|&a| f64::from(a)).collect();
    let r2 = r_squared(&alphas, &centroids);
    // Backward warping by +6 low-res px moves content left by 24 px at 512^2.
    let step = (centroids[5] - centroids[0]) / 5.0;
    let step_low_res = -step / 4.0;

    Outcome {
        name: "alpha schedule 0.0..1.0: frame 0 identity, linear centroid motion",
        passed: frames.len() == 6 && frame0_err <= IDENTITY_TOL && r2 >= LINEARITY_R2 && (step_low_res - 1.2).abs() < 0.1,
        detail: format!(
            "frame 0 error {frame0_err:e}, centroid R^2 {r2:.6}, {step_low_res:.3} low-res px per step"
        ),
    }
}

fn upsampling_study() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("textured.png");
    save_image(&textured(512, 512, 3, 17), &input).unwrap();
    let field = MockFieldSpec::Translate { dx: 2.5, dy: -1.5 }.generate(128).unwrap();
    let mut detail = Vec::new();
    let mut passed = true;
    for mode in [Mode::Vanilla, Mode::Multiscale] {
        let mut outputs = Vec::new();
        for method in ResamplingMethod::ALL {
            let cfg = ReswarpConfig::new(mode).with_method(method);
            let decomp = dir.path().join(format!("{mode}-{method}"));
            let manifest = cmd_decompose(&input, cfg, &decomp).unwrap();
            passed &= manifest.reconstruction_error <= IDENTITY_TOL;
            let job = ReswarpJob {
                source: ReswarpSource::Decomposition(decomp.clone()),
                field: field.clone(),
                field_label: "translate".into(),
                low_result: None,
                alpha: 1.0,
                cfg,
                out_dir: decomp.join("out"),
            };
            outputs.push(cmd_reswarp(&job).unwrap());
        }
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let d = outputs[i].mean_abs_diff(&outputs[j]).unwrap();
            passed &= d > 0.0;
            detail.push(format!(
                "{mode} {}/{}: {d:.2e}",
                ResamplingMethod::ALL[i],
                ResamplingMethod::ALL[j]
            ));
        }
    }
    Outcome {
        name: "up-sampling study: nearest, bilinear, bicubic all run and differ",
        passed,
        detail: detail.join(", "),
    }
}

#[test]
fn acceptance() {
    let criteria: [fn() -> Outcome; 6] = [
        reconstruction_identity,
        uhd_multiscale,
        efficiency_ordering,
        warp_oracle,
        alpha_schedule,
        upsampling_study,
    ];
    let mut failed = 0;
    for criterion in criteria {
        let o = criterion();
        println!("[{}] {} -- {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
        failed += usize::from(!o.passed);
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}

use atw_core::{
    build_laplacian_pyramid, decompose, downsample_average, interpolate_field, reconstruct_pyramid,
    recompose, upsample, upsample_field, warp, ImageBuffer, Mode, MotionField, ReswarpConfig,
    ResamplingMethod,
};
use proptest::prelude::*;

fn image(w: usize, h: usize, c: usize) -> impl Strategy<Value = ImageBuffer> {
    prop::collection::vec(-1.0f32..=1.0, w * h * c)
        .prop_map(move |data| ImageBuffer::new(w, h, c, data).unwrap())
}

fn sized_image(max_side: usize) -> impl Strategy<Value = ImageBuffer> {
    (1..=max_side, 1..=max_side, prop::sample::select(vec![1usize, 3]))
        .prop_flat_map(|(w, h, c)| image(w, h, c))
}

fn field(w: usize, h: usize, reach: f32) -> impl Strategy<Value = MotionField> {
    prop::collection::vec(-reach..=reach, w * h * 2)
        .prop_map(move |data| MotionField::new(w, h, data).unwrap())
}

fn method() -> impl Strategy<Value = ResamplingMethod> {
    prop::sample::select(ResamplingMethod::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn vanilla_reconstruction_identity(
        img in (1..=3usize, 1..=3usize, prop::sample::select(vec![1usize, 3]))
            .prop_flat_map(|(m, n, c)| image(16 * m, 16 * n, c)),
        m in method(),
    ) {
        let low = downsample_average(&img, 16, 16).unwrap();
        let up = upsample(&low, img.width(), img.height(), m).unwrap();
        let back = up.add(&img.sub(&up).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&img).unwrap() <= 1e-6);
    }

    #[test]
    fn pyramid_reconstruction_identity(
        img in (0..=3u32, prop::sample::select(vec![1usize, 3]))
            .prop_flat_map(|(k, c)| image(8 << k, 8 << k, c)),
    ) {
        let pyr = build_laplacian_pyramid(&img, 8).unwrap();
        let back = reconstruct_pyramid(&pyr).unwrap();
        prop_assert!(back.max_abs_diff(&img).unwrap() <= 1e-5);
    }

    #[test]
    fn block_average_preserves_mean(
        (img, tw, th) in (1..=6usize, 1..=6usize, 1..=5usize, 1..=5usize, prop::sample::select(vec![1usize, 3]))
            .prop_flat_map(|(tw, th, bx, by, c)| (image(tw * bx, th * by, c), Just(tw), Just(th))),
    ) {
        let out = downsample_average(&img, tw, th).unwrap();
        prop_assert!((out.mean() - img.mean()).abs() <= 1e-6);
    }

    #[test]
    fn constants_survive_upsampling(
        v in -1.0f32..=1.0, w in 1..8usize, h in 1..8usize, fx in 1..5usize, fy in 1..5usize, m in method(),
    ) {
        let img = ImageBuffer::filled(w, h, 3, v);
        let out = upsample(&img, w * fx + fx / 2, h * fy, m).unwrap();
        prop_assert!(out.data().iter().all(|s| (s - v).abs() <= 1e-6));
    }

    #[test]
    fn linear_ramps_are_reproduced(
        a in -0.05f32..0.05, b in -0.05f32..0.05, sw in 6..14usize, sh in 6..14usize, f in 2..5usize,
        m in prop::sample::select(vec![ResamplingMethod::Bilinear, ResamplingMethod::Bicubic]),
    ) {
        let ramp = |x: f64, y: f64| a as f64 * (x - sw as f64 / 2.0) + b as f64 * (y - sh as f64 / 2.0);
        let img = ImageBuffer::from_fn(sw, sh, 1, |x, y, _| ramp(x as f64, y as f64) as f32);
        let (tw, th) = (sw * f, sh * f);
        let out = upsample(&img, tw, th, m).unwrap();
        for y in 0..th {
            let sy = (y as f64 + 0.5) / f as f64 - 0.5;
            if sy < 2.0 || sy > sh as f64 - 3.0 { continue; }
            for x in 0..tw {
                let sx = (x as f64 + 0.5) / f as f64 - 0.5;
                if sx < 2.0 || sx > sw as f64 - 3.0 { continue; }
                prop_assert!((f64::from(out.get(x, y, 0)) - ramp(sx, sy)).abs() <= 1e-4);
            }
        }
    }

    #[test]
    fn zero_field_warp_is_exact_identity(img in sized_image(16)) {
        let zero = MotionField::zeros(img.width(), img.height());
        prop_assert_eq!(warp(&img, &zero).unwrap(), img);
    }

    #[test]
    fn alpha_scaling_is_one_multiply(f in field(5, 4, 30.0), alpha in 0.0f32..=1.0) {
        let g = interpolate_field(&f, alpha).unwrap();
        for (a, b) in g.data().iter().zip(f.data()) {
            prop_assert_eq!(*a, alpha * *b);
        }
    }

    #[test]
    fn upsampled_field_stays_within_scaled_bound(
        f in field(6, 5, 12.0), fx in 1..6usize, fy in 1..6usize,
    ) {
        let (tw, th) = (6 * fx, 5 * fy);
        let (mx, my) = f.max_abs();
        let (ux, uy) = upsample_field(&f, tw, th).unwrap().max_abs();
        prop_assert!(ux <= fx as f32 * mx * (1.0 + 1e-6));
        prop_assert!(uy <= fy as f32 * my * (1.0 + 1e-6));
    }

    #[test]
    fn warped_constant_is_constant(v in -1.0f32..=1.0, f in field(7, 9, 20.0)) {
        let img = ImageBuffer::filled(7, 9, 1, v);
        let out = warp(&img, &f).unwrap();
        prop_assert!(out.data().iter().all(|s| (s - v).abs() <= 1e-6));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn zero_field_pipeline_identity(
        img in (0..=2u32).prop_flat_map(|k| image(16 << k, 16 << k, 3)),
        mode in prop::sample::select(vec![Mode::Vanilla, Mode::Multiscale]),
        m in method(),
    ) {
        let cfg = ReswarpConfig::new(mode).with_base_size(16).with_method(m);
        let parts = decompose(&img, &cfg).unwrap();
        let out = recompose(parts.low(), &parts, &MotionField::zeros(16, 16), &cfg).unwrap();
        prop_assert!(out.image.max_abs_diff(&img).unwrap() <= 1e-5);
        prop_assert_eq!(out.clamped, 0);
        let at_base = downsample_average(&out.image, 16, 16).unwrap();
        prop_assert!(at_base.max_abs_diff(parts.low()).unwrap() <= 1e-3);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let img = ImageBuffer::from_fn(256, 256, 3, |x, y, c| ((x * 31 ^ y * 17) % 97 + c) as f32 / 50.0 - 1.0);
    let f = MotionField::from_fn(128, 128, |x, y| ((x as f32 * 0.1).sin() * 3.0, (y as f32 * 0.07).cos() * 2.0));
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            [Mode::Vanilla, Mode::Multiscale].map(|mode| {
                let cfg = ReswarpConfig::new(mode).with_method(ResamplingMethod::Bicubic);
                let parts = decompose(&img, &cfg).unwrap();
                recompose(parts.low(), &parts, &f, &cfg).unwrap()
            })
        })
    };
    let serial = run(1);
    assert_eq!(serial, run(4));
    assert_eq!(serial, run(1));
}

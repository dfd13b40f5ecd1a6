use peghole::augment::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DEPTH: Channel = Channel::Depth { max: 2.0 };

fn gray_plane() -> impl Strategy<Value = Plane> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        prop::collection::vec(0u8..=255, w * h)
            .prop_map(move |v| Plane::from_u8(w, h, &v))
    })
}

fn depth_plane() -> impl Strategy<Value = Plane> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        prop::collection::vec(prop_oneof![Just(0.0f32), 0.1f32..2.0], w * h)
            .prop_map(move |v| Plane::new(w, h, v).unwrap())
    })
}

fn in_range(p: &Plane, ch: Channel) -> bool {
    p.data.iter().all(|v| v.is_finite() && *v >= 0.0 && *v <= ch.max())
        && (ch != Channel::Gray || p.data.iter().all(|v| v.fract() == 0.0))
}

fn check_ops(img: &Plane, ch: Channel, spec: &AugSpec, seed: u64) -> Result<(), TestCaseError> {
    for step in &spec.ops {
        let a = step.op.apply(img, ch, &mut ChaCha8Rng::seed_from_u64(seed));
        let b = step.op.apply(img, ch, &mut ChaCha8Rng::seed_from_u64(seed));
        let (a, b) = match (a, b) {
            (Ok(a), Ok(b)) => (a, b),
            // clahe cannot tile below one pixel per tile; that is a parameter error
            (Err(AugError::Parameter(_)), Err(AugError::Parameter(_))) => continue,
            (a, _) => return Err(TestCaseError::fail(format!("{}: {a:?}", step.op.name()))),
        };
        prop_assert_eq!((a.width, a.height), (img.width, img.height), "{}", step.op.name());
        prop_assert!(in_range(&a, ch), "{} left the valid range", step.op.name());
        prop_assert_eq!(&a, &b, "{} not deterministic", step.op.name());
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gray_ops_preserve_shape_range_and_determinism(img in gray_plane(), seed in any::<u64>()) {
        check_ops(&img, Channel::Gray, &AugSpec::default_gray(), seed)?;
    }

    #[test]
    fn depth_ops_preserve_shape_range_and_determinism(img in depth_plane(), seed in any::<u64>()) {
        check_ops(&img, DEPTH, &AugSpec::default_depth(), seed)?;
    }

    #[test]
    fn pipelines_are_deterministic(img in gray_plane(), depth in depth_plane(), seed in any::<u64>()) {
        let mut gray = AugSpec::default_gray();
        gray.ops.iter_mut().for_each(|s| s.p = 0.8);
        gray.ops.retain(|s| !matches!(s.op, AugOp::Clahe { .. }));
        let run = |p: &Plane, ch, spec: &AugSpec| apply_pipeline(p, ch, spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let a = run(&img, Channel::Gray, &gray);
        prop_assert_eq!(&a, &run(&img, Channel::Gray, &gray));
        prop_assert!(in_range(&a, Channel::Gray));
        let spec = AugSpec::default_depth();
        let d = run(&depth, DEPTH, &spec);
        prop_assert_eq!(&d, &run(&depth, DEPTH, &spec));
        prop_assert!(in_range(&d, DEPTH));
    }

    #[test]
    fn identity_parameters_are_bit_exact(img in gray_plane(), depth in depth_plane(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Channel::Gray;
        prop_assert_eq!(&brightness_contrast(&img, g, 1.0, 0.0), &img);
        prop_assert_eq!(&brightness_contrast(&depth, DEPTH, 1.0, 0.0), &depth);
        prop_assert_eq!(&solarize(&img, g, 256.0), &img);
        prop_assert_eq!(&solarize(&depth, DEPTH, f32::INFINITY), &depth);
        for kind in [BlurKind::Gaussian { size: 1 }, BlurKind::Median { size: 1 }, BlurKind::Motion { size: 1, angle: 0.3 }] {
            prop_assert_eq!(&blur(&img, g, kind).unwrap(), &img);
            prop_assert_eq!(&blur(&depth, DEPTH, kind).unwrap(), &depth);
        }
        for kind in [NoiseKind::Gaussian, NoiseKind::Multiplicative] {
            prop_assert_eq!(&noise(&img, g, kind, 0.0, &mut rng), &img);
            prop_assert_eq!(&noise(&depth, DEPTH, kind, 0.0, &mut rng), &depth);
        }
        prop_assert_eq!(&threshold_dilate(&depth, f32::INFINITY, 3), &depth);
        for kind in [DropoutKind::Salt, DropoutKind::Pepper] {
            prop_assert_eq!(&coarse_dropout(&img, g, kind, 0, 4, 4, &mut rng), &img);
            prop_assert_eq!(&coarse_dropout(&depth, DEPTH, kind, 0, 4, 4, &mut rng), &depth);
        }
        prop_assert_eq!(&apply_pipeline(&img, g, &AugSpec::empty(ChannelKind::Gray), &mut rng).unwrap(), &img);
    }
}

use std::path::{Path, PathBuf};

use peghole::augment::{AugSpec, ChannelKind};
use peghole::env::Modality;
use peghole::harness::{parse_config, preset_config, PoseFile, Protocol};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_protocol_is_the_default_grid() {
    let p = Protocol::load(&configs().join("protocol.toml")).unwrap();
    let d = Protocol::default();
    assert_eq!(p.n_rollouts(), 30);
    for (a, b) in p.poses.iter().zip(&d.poses) {
        assert!((a.x - b.x).abs() < 1e-9 && (a.y - b.y).abs() < 1e-9 && a.yaw == b.yaw);
    }
}

#[test]
fn shipped_experiments_match_their_presets() {
    let lowdim = parse_config(&configs().join("lowdim.toml")).unwrap();
    let preset = preset_config("lowdim").unwrap();
    assert_eq!(lowdim.env, preset.env);
    assert_eq!(lowdim.agent, preset.agent);
    assert_eq!(lowdim.total_steps, preset.total_steps);

    let image = parse_config(&configs().join("image.toml")).unwrap();
    let preset = preset_config("image").unwrap();
    assert_eq!(image.env.modalities, vec![Modality::Rgb, Modality::Proprio]);
    assert_eq!(image.env.augment.gray, preset.env.augment.gray);
    assert_eq!(image.agent, preset.agent);
}

#[test]
fn shipped_augment_specs_are_the_defaults() {
    for (file, default) in [("aug_gray.toml", AugSpec::default_gray()), ("aug_depth.toml", AugSpec::default_depth())] {
        let spec: AugSpec = toml::from_str(&std::fs::read_to_string(configs().join(file)).unwrap()).unwrap();
        spec.validate().unwrap();
        assert_eq!(spec, default, "{file}");
    }
    assert_eq!(AugSpec::default_depth().channel, ChannelKind::Depth);
}

#[test]
fn shipped_pose_file_parses() {
    let pose = PoseFile::load(&configs().join("pose.toml")).unwrap();
    assert!(pose.config.is_none());
    assert_eq!(pose.tip.map(|t| t[2]), Some(0.08));
}

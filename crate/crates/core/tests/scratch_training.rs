// Temporary training-speed/learnability probe; deleted before final review.

use armsight_core::jointnet::{self, JointNetConfig};
use armsight_core::masknet::{self, MaskNetConfig};
use armsight_core::scene::{generate_dataset, load_split, GeneratorConfig};

fn corpus() -> (tempfile::TempDir, Vec<armsight_core::scene::LoadedSample>, Vec<armsight_core::scene::LoadedSample>) {
    let dir = tempfile::tempdir().unwrap();
    let config = GeneratorConfig {
        n_recordings: 3,
        steps: vec![1.55, 1.55, 1.55],
        max_samples: Some(vec![100]),
        width: 64,
        height: 53,
        ..GeneratorConfig::new("ur5like", 42)
    };
    let manifest = generate_dataset(&config, dir.path()).unwrap();
    let train = load_split(dir.path(), &manifest, "train").unwrap();
    let test = load_split(dir.path(), &manifest, "test").unwrap();
    (dir, train, test)
}

#[test]
#[ignore]
fn masknet_full_desk_probe() {
    let (_dir, train, test) = corpus();
    let mut cfg = MaskNetConfig::desk();
    cfg.lr_start = 1e-2;
    cfg.lr_end = 1e-4;
    let t1 = std::time::Instant::now();
    let (net, report) = masknet::train_masknet(&train, &cfg, 7).unwrap();
    println!("200 epochs: {:.0}s", t1.elapsed().as_secs_f64());
    for e in report.curve.iter().step_by(20) {
        println!("epoch {:3} loss {:.4} lr {:.2e}", e.epoch, e.mean_loss, e.lr);
    }
    println!("final loss {:.4}", report.curve.last().unwrap().mean_loss);
    let mut acc = 0.0;
    let mut base = 0.0;
    for s in &test {
        let prob = masknet::predict_mask(&net, &s.color).unwrap();
        let pred = masknet::binarize_mask(&prob, 0.5);
        acc += masknet::mask_accuracy(&pred, &s.mask).unwrap();
        base += 100.0 * (1.0 - s.mask.foreground_fraction());
    }
    println!(
        "test acc {:.2}% vs baseline {:.2}% (need baseline+3)",
        acc / test.len() as f64,
        base / test.len() as f64
    );
}

#[test]
#[ignore]
fn jointnet_desk_probe() {
    let (_dir, train, test) = corpus();
    let cfg = JointNetConfig::desk();
    let t1 = std::time::Instant::now();
    let (net, norm, report) = jointnet::train_jointnet(&train, &cfg, 11).unwrap();
    println!("jointnet 200 epochs: {:.0}s", t1.elapsed().as_secs_f64());
    for e in report.curve.iter().step_by(20) {
        println!("epoch {:3} loss {:.4} lr {:.2e} mu {:.4}", e.epoch, e.mean_loss, e.lr, e.momentum.unwrap());
    }

    // Centroid baseline: per-point mean of train targets.
    let k = train[0].label.joints_cam.len();
    let mut centroid = vec![[0.0f64; 3]; k];
    for s in &train {
        for (c, p) in centroid.iter_mut().zip(&s.label.joints_cam) {
            for a in 0..3 {
                c[a] += p[a];
            }
        }
    }
    for c in &mut centroid {
        for a in 0..3 {
            *a_ref(c, a) /= train.len() as f64;
        }
    }

    let baseline = jointnet::JointEstimate { points: centroid };
    let mut err_net = 0.0;
    let mut err_base = 0.0;
    for s in &test {
        let input = jointnet::training_overlay(s, cfg.input_width, cfg.input_height).unwrap();
        let est = jointnet::predict_joints(&net, &norm, &input).unwrap();
        let gt = jointnet::JointEstimate { points: s.label.joints_cam.clone() };
        err_net += jointnet::joint_error(&est, &gt).unwrap().0;
        err_base += jointnet::joint_error(&baseline, &gt).unwrap().0;
    }
    println!(
        "test joint error {:.4} m vs centroid baseline {:.4} m (need < 0.85x)",
        err_net / test.len() as f64,
        err_base / test.len() as f64
    );
}

fn a_ref(c: &mut [f64; 3], a: usize) -> &mut f64 {
    &mut c[a]
}

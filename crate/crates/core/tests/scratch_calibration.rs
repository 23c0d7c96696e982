// Temporary calibration probe; deleted before final review.

use armsight_core::scene::{generate_dataset, load_split, GeneratorConfig};

#[test]
#[ignore]
fn calibration_probe() {
    let dir = tempfile::tempdir().unwrap();
    let t0 = std::time::Instant::now();
    let config = GeneratorConfig {
        n_recordings: 3,
        steps: vec![2.0, 1.55, 1.33],
        max_samples: None,
        width: 128,
        height: 106,
        ..GeneratorConfig::new("ur5like", 7)
    };
    let manifest = generate_dataset(&config, dir.path()).unwrap();
    println!("generation took {:.1}s", t0.elapsed().as_secs_f64());
    for rec in 0..3 {
        let n = manifest.records.iter().filter(|r| r.recording == rec).count();
        println!("recording {rec}: {n} samples");
    }
    println!("total {} train {} test {}", manifest.records.len(), manifest.splits.train.len(), manifest.splits.test.len());

    let test = load_split(dir.path(), &manifest, "test").unwrap();
    let fracs: Vec<f64> = test.iter().map(|s| {
        s.mask.data.iter().map(|&v| v as usize).sum::<usize>() as f64 / s.mask.data.len() as f64
    }).collect();
    let mean = fracs.iter().sum::<f64>() / fracs.len() as f64;
    let min = fracs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = fracs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("fg fraction over {} test samples: mean {mean:.4} min {min:.4} max {max:.4}", fracs.len());
}

use std::path::PathBuf;

use spinmem::experiments::{select_low_overlap, sweep, Implementation, SweepConfig};
use spinmem::io::idx::{load_idx, load_idx_labels, DEFAULT_THRESHOLD};
use spinmem::io::patterns::{load_pattern_set, serialize_patterns};
use spinmem::io::report::{parse_weight_matrix, write_delta, write_sweep, write_weight_matrix};
use spinmem::{quantize, recall, train, HardwareConfig, RunConfig, SoftwareNetwork};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

#[test]
fn digits_store_and_program_cleanly() {
    let set = load_pattern_set(data("digits-10x10.txt")).unwrap();
    let w = train(&set.patterns, true).unwrap();
    let net = quantize(&w, &HardwareConfig::default()).unwrap();
    net.verify_readback().unwrap();
    let sw = SoftwareNetwork::new(w.clone(), 0.0);
    for p in &set.patterns {
        for r in [recall(&sw, p, 10).unwrap(), recall(&net, p, 10).unwrap()] {
            assert!(r.converged && r.final_state == *p && r.iterations == 1);
        }
    }
    let mut buf = Vec::new();
    write_weight_matrix(&mut buf, &w).unwrap();
    assert_eq!(parse_weight_matrix(std::str::from_utf8(&buf).unwrap(), "w").unwrap(), w);
}

#[test]
fn bundled_digits_are_canonical_text() {
    let raw = std::fs::read_to_string(data("digits-10x10.txt")).unwrap();
    let set = load_pattern_set(data("digits-10x10.txt")).unwrap();
    assert_eq!(serialize_patterns(&set), raw);
}

#[test]
fn sweep_csv_is_reproducible() {
    let set = load_pattern_set(data("digits-10x10.txt")).unwrap();
    let mut cfg = SweepConfig::new(set.patterns);
    cfg.trials_per_point = 25;
    cfg.seed = 123;
    let render = || {
        let r = sweep(&cfg).unwrap();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_sweep(&mut a, &r).unwrap();
        write_delta(&mut b, &r).unwrap();
        (a, b)
    };
    assert_eq!(render(), render());
    cfg.seed = 124;
    let other = sweep(&cfg).unwrap();
    assert!(other.cells.iter().any(|c| c.implementation == Implementation::Hardware));
}

#[test]
fn mnist_selection_is_deterministic_and_distinct() {
    let imgs = load_idx(data("mnist5k-images.idx3-ubyte"), DEFAULT_THRESHOLD).unwrap();
    let labels = load_idx_labels(data("mnist5k-labels.idx1-ubyte")).unwrap();
    let a = select_low_overlap(&imgs.patterns, 3, 500).unwrap();
    let b = select_low_overlap(&imgs.patterns, 3, 500).unwrap();
    assert_eq!(a, b);
    let mut digits: Vec<u8> = a.iter().map(|&i| labels[i]).collect();
    digits.dedup();
    assert_eq!(digits.len(), 3, "selected images should be different digits: {digits:?}");
}

#[test]
fn shipped_configs_load() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let cfg = RunConfig::load(dir.join("default.json")).unwrap();
    assert_eq!(cfg.load_patterns().unwrap().patterns.len(), 3);
    let mnist = RunConfig::load(dir.join("mnist.json")).unwrap();
    let set = mnist.load_patterns().unwrap();
    assert_eq!((set.patterns.len(), set.rows, set.cols), (3, 28, 28));
}

//! Regenerates the bundled synthetic dataset at `data/synth200.svmlight`:
//! 200 sparse examples in 20 dimensions, labeled by a fixed random linear
//! separator with 10% label noise.
//!
//! Run from the crate root: `cargo run --example make_synthetic_data`

use sgdavg::rng::RngStream;
use std::fmt::Write as _;

const EXAMPLES: usize = 200;
const DIM: usize = 20;
const DENSITY: f64 = 0.4;
const LABEL_NOISE: f64 = 0.1;
const SEED: u64 = 20120301;

fn main() {
    let mut rng = RngStream::from_seed(SEED);
    let separator: Vec<f64> = (0..DIM).map(|_| rng.uniform(-1.0, 1.0)).collect();

    let mut out = String::new();
    let mut produced = 0;
    while produced < EXAMPLES {
        let mut features: Vec<(usize, f64)> = Vec::new();
        for i in 1..=DIM {
            if rng.uniform01() < DENSITY {
                features.push((i, rng.uniform(-1.0, 1.0)));
            }
        }
        if features.is_empty() {
            continue;
        }
        let margin: f64 = features.iter().map(|&(i, v)| v * separator[i - 1]).sum();
        let mut label = if margin >= 0.0 { 1 } else { -1 };
        if rng.uniform01() < LABEL_NOISE {
            label = -label;
        }
        write!(out, "{}", if label > 0 { "+1" } else { "-1" }).unwrap();
        for (i, v) in features {
            write!(out, " {i}:{v}").unwrap();
        }
        out.push('\n');
        produced += 1;
    }

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synth200.svmlight");
    std::fs::create_dir_all(concat!(env!("CARGO_MANIFEST_DIR"), "/data")).unwrap();
    std::fs::write(path, out).unwrap();
    println!("wrote {path}");
}

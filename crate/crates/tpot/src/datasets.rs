//! Writes the bundled example datasets, each with a matching run config.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::generators::{flower, four_circles, loop_chain, mug, noisy_loops, torus, trefoil_sequence};
use crate::io::{write_points_csv, write_text};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Example {
    /// Four circles in a row and a four-petal flower.
    CirclesFlower,
    /// Three loops of different sizes in two layouts.
    NoisyLoops,
    /// A mug and a torus in 3D.
    MugTorus,
    /// Two independent samples of a chain of nine loops.
    LoopChain,
    /// Twenty snapshots of a rotating, breathing trefoil knot.
    Trefoil,
}

const CIRCLES_CONFIG: &str = r#"kernel = "gaussian"
degree = 1
top_k = 10
incidence = "binary"
alpha = 0.5
beta = 1.0
eps_v = 3e-3
eps_e = 1e-2
gauss_seidel = true
"#;

const LOOPS_CONFIG: &str = r#"kernel = "gaussian"
degree = 1
top_k = 3
incidence = "smoothed"
lambda = 1.0
alpha = 0.5
beta = 1.0
eps_v = 3e-3
eps_e = 1e-2
gauss_seidel = true
"#;

const MUG_CONFIG: &str = r#"kernel = "gaussian"
degree = 1
top_k = 5
incidence = "smoothed"
lambda = 1.0
alpha = 0.1
beta = 2.5
eps_v = 1e-2
eps_e = 1e-2
gauss_seidel = true
"#;

const CHAIN_CONFIG: &str = r#"kernel = "sq_dist"
degree = 1
top_k = 9
incidence = "binary"
alpha = 0.5
beta = 1.0
eps_v = 3e-3
eps_e = 1e-2
gauss_seidel = true
"#;

const TREFOIL_CONFIG: &str = r#"kernel = "gaussian"
degree = 1
top_k = 4
incidence = "smoothed"
lambda = 1.0
alpha = 0.5
beta = 1.0
eps_v = 3e-3
eps_e = 1e-2
gauss_seidel = true
known_correspondence = true
"#;

/// Writes the example's point CSVs and a `config.toml` into `dir`.
pub fn write_example(example: Example, dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut written = Vec::new();
    let mut put = |name: &str, pc: &tpot_core::geometry::PointCloud| -> Result<()> {
        let path = dir.join(name);
        write_points_csv(&path, pc)?;
        written.push(path);
        Ok(())
    };
    let config = match example {
        Example::CirclesFlower => {
            put("circles.csv", &four_circles(&mut rng, 50).cloud)?;
            put("flower.csv", &flower(&mut rng, 50).cloud)?;
            CIRCLES_CONFIG
        }
        Example::NoisyLoops => {
            put("loops_a.csv", &noisy_loops(&mut rng, 0).cloud)?;
            put("loops_b.csv", &noisy_loops(&mut rng, 1).cloud)?;
            LOOPS_CONFIG
        }
        Example::MugTorus => {
            put("mug.csv", &mug(&mut rng, 200))?;
            put("torus.csv", &torus(&mut rng, 200))?;
            MUG_CONFIG
        }
        Example::LoopChain => {
            put("chain_a.csv", &loop_chain(&mut rng, 9, 22).cloud)?;
            put("chain_b.csv", &loop_chain(&mut rng, 9, 22).cloud)?;
            CHAIN_CONFIG
        }
        Example::Trefoil => {
            for (k, pc) in trefoil_sequence(&mut rng, 20, 90).iter().enumerate() {
                put(&format!("snapshots/step_{k:02}.csv"), pc)?;
            }
            TREFOIL_CONFIG
        }
    };
    let cfg_path = dir.join("config.toml");
    write_text(&cfg_path, config)?;
    written.push(cfg_path);
    Ok(written)
}

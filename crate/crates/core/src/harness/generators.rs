//! Concept-class generators.

use std::path::PathBuf;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bits::BitRow;
use crate::concept::ConceptClass;
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    /// All discrete intervals `[a, b]` of `0..n` plus the empty set.
    Intervals {
        n: usize,
    },
    /// Every subset of `0..n` made of at most `k` maximal runs.
    KIntervalUnions {
        n: usize,
        k: usize,
    },
    /// Halfspaces over the grid `{0..side}^dim`, lifted with a bias coordinate.
    HalfspacesGrid {
        side: usize,
        dim: usize,
        #[serde(default = "default_halfspace_draws")]
        draws: usize,
        #[serde(default)]
        seed: u64,
    },
    FullCube {
        n: usize,
    },
    /// Random rows, kept only while the VC dimension stays at most `cap`.
    RandomVcCapped {
        n: usize,
        count: usize,
        cap: usize,
        #[serde(default)]
        seed: u64,
    },
    FromFile {
        path: PathBuf,
    },
}

fn default_halfspace_draws() -> usize {
    20_000
}

impl GeneratorSpec {
    /// Short identifier used in reports.
    pub fn label(&self) -> String {
        match self {
            GeneratorSpec::Intervals { n } => format!("intervals(n={n})"),
            GeneratorSpec::KIntervalUnions { n, k } => format!("k_interval_unions(n={n},k={k})"),
            GeneratorSpec::HalfspacesGrid { side, dim, seed, .. } => {
                format!("halfspaces_grid(side={side},dim={dim},seed={seed})")
            }
            GeneratorSpec::FullCube { n } => format!("full_cube(n={n})"),
            GeneratorSpec::RandomVcCapped { n, count, cap, seed } => {
                format!("random_vc_capped(n={n},count={count},cap={cap},seed={seed})")
            }
            GeneratorSpec::FromFile { path } => format!("from_file({})", path.display()),
        }
    }

    /// VC dimension the generated class is built to satisfy, as an upper bound.
    pub fn advertised_vc_bound(&self) -> Option<usize> {
        match *self {
            GeneratorSpec::Intervals { n } => Some(2.min(n)),
            GeneratorSpec::KIntervalUnions { n, k } => Some((2 * k).min(n)),
            GeneratorSpec::HalfspacesGrid { dim, .. } => Some(dim + 1),
            GeneratorSpec::FullCube { n } => Some(n),
            GeneratorSpec::RandomVcCapped { cap, .. } => Some(cap),
            GeneratorSpec::FromFile { .. } => None,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

pub fn generate(spec: &GeneratorSpec) -> Result<ConceptClass> {
    match *spec {
        GeneratorSpec::Intervals { n } => intervals(n),
        GeneratorSpec::KIntervalUnions { n, k } => k_interval_unions(n, k),
        GeneratorSpec::HalfspacesGrid { side, dim, draws, seed } => halfspaces_grid(side, dim, draws, seed),
        GeneratorSpec::FullCube { n } => full_cube(n),
        GeneratorSpec::RandomVcCapped { n, count, cap, seed } => random_vc_capped(n, count, cap, seed),
        GeneratorSpec::FromFile { ref path } => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })?;
            ConceptClass::parse(&text)
        }
    }
}

pub fn intervals(n: usize) -> Result<ConceptClass> {
    if n == 0 || n > 4096 {
        return Err(config_err("intervals need 1 <= n <= 4096"));
    }
    let mut rows = vec![BitRow::zeros(n)];
    for a in 0..n {
        for b in a..n {
            rows.push(BitRow::from_bools((0..n).map(|x| a <= x && x <= b)));
        }
    }
    ConceptClass::new(n, rows)
}

pub fn k_interval_unions(n: usize, k: usize) -> Result<ConceptClass> {
    if n == 0 || n > 20 || k == 0 {
        return Err(config_err("k_interval_unions need 1 <= n <= 20 and k >= 1"));
    }
    let rows = (0u32..1 << n)
        .filter(|&m| {
            // number of runs = number of 0->1 transitions reading from the left
            let runs = (0..n)
                .filter(|&i| m >> i & 1 == 1 && (i == 0 || m >> (i - 1) & 1 == 0))
                .count();
            runs <= k
        })
        .map(|m| BitRow::from_bools((0..n).map(|i| m >> i & 1 == 1)))
        .collect();
    ConceptClass::new(n, rows)
}

pub fn full_cube(n: usize) -> Result<ConceptClass> {
    if n == 0 || n > 16 {
        return Err(config_err("full_cube needs 1 <= n <= 16"));
    }
    let rows = (0u32..1 << n)
        .map(|m| BitRow::from_bools((0..n).map(|i| m >> i & 1 == 1)))
        .collect();
    ConceptClass::new(n, rows)
}

/// Sign patterns `x -> [<a, (x, 1)> > 0]` of random weight vectors `a` on
/// centered grid points, deduplicated.
pub fn halfspaces_grid(side: usize, dim: usize, draws: usize, seed: u64) -> Result<ConceptClass> {
    if side == 0 || dim == 0 || dim > 4 || side.checked_pow(dim as u32).is_none_or(|p| p > 4096) || draws == 0 {
        return Err(config_err(
            "halfspaces_grid needs side >= 1, 1 <= dim <= 4, side^dim <= 4096, draws >= 1",
        ));
    }
    let n = side.pow(dim as u32);
    let center = (side as f64 - 1.0) / 2.0;
    let points: Vec<Vec<f64>> = (0..n)
        .map(|mut idx| {
            let mut coords = Vec::with_capacity(dim + 1);
            for _ in 0..dim {
                coords.push((idx % side) as f64 - center);
                idx /= side;
            }
            coords.push(1.0);
            coords
        })
        .collect();
    let mut rng = rng::stream(seed, 0);
    let mut rows = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mut a: Vec<f64> = (0..=dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        // spread offsets across the whole grid
        a[dim] *= side as f64 / 2.0;
        rows.push(BitRow::from_bools(
            points
                .iter()
                .map(|b| b.iter().zip(&a).map(|(u, v)| u * v).sum::<f64>() > 0.0),
        ));
    }
    ConceptClass::from_rows_dedup(n, rows)
}

pub fn random_vc_capped(n: usize, count: usize, cap: usize, seed: u64) -> Result<ConceptClass> {
    if n == 0 || n > 16 || count == 0 {
        return Err(config_err("random_vc_capped needs 1 <= n <= 16 and count >= 1"));
    }
    let mut rng = rng::stream(seed, 0);
    let mut rows: Vec<BitRow> = Vec::new();
    let mut attempts = 0;
    while rows.len() < count && attempts < 200 * count {
        attempts += 1;
        let row = BitRow::from_bools((0..n).map(|_| rng.gen::<bool>()));
        if rows.contains(&row) {
            continue;
        }
        rows.push(row);
        let ok = ConceptClass::new(n, rows.clone())?.vc_dimension() <= cap;
        if !ok {
            rows.pop();
        }
    }
    ConceptClass::new(n, rows)
}

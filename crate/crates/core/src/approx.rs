//! ε-approximations of distributions by small multisets, and the dual form:
//! sparsifying a mixture of concepts into a uniform average over a few of them.
//!
//! Multisets are found by rejection sampling and every returned certificate
//! carries the exact worst-case deviation, computed by scanning all tests.

use rand::distributions::{Distribution, WeightedIndex};
use serde::Serialize;

use crate::bits::BitRow;
use crate::concept::ConceptClass;
use crate::error::{Error, Result};
use crate::rng;

/// Allowed distance of a probability vector's total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::domain("probability vector must be nonempty"));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::domain(format!("invalid probability weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::domain(format!("weights sum to {total}, not 1")));
        }
        Ok(ProbabilityVector { weights })
    }

    /// Normalizes non-negative weights with positive total.
    pub fn normalized(mut weights: Vec<f64>) -> Result<Self> {
        for w in weights.iter_mut() {
            if *w < 0.0 && *w > -1e-12 {
                *w = 0.0;
            }
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::domain("weights must have positive finite total"));
        }
        ProbabilityVector::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        ProbabilityVector {
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        assert!(at < n);
        let mut weights = vec![0.0; n];
        weights[at] = 1.0;
        ProbabilityVector { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    /// Total mass of the indices where `row` is 1.
    pub fn mass_of(&self, row: &BitRow) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|&(i, _)| row.get(i))
            .map(|(_, w)| w)
            .sum()
    }
}

/// A multiset of indices, stored as `(index, multiplicity)` pairs sorted by index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Multiset {
    entries: Vec<(usize, usize)>,
}

impl Multiset {
    pub fn from_items(items: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = items.into_iter().collect();
        v.sort_unstable();
        let mut entries: Vec<(usize, usize)> = Vec::new();
        for x in v {
            match entries.last_mut() {
                Some((last, count)) if *last == x => *count += 1,
                _ => entries.push((x, 1)),
            }
        }
        Multiset { entries }
    }

    /// Divides every multiplicity by their gcd. Empirical frequencies are unchanged.
    pub fn reduced(mut self) -> Self {
        let g = self.entries.iter().fold(0, |g, &(_, c)| gcd(g, c));
        if g > 1 {
            for e in &mut self.entries {
                e.1 /= g;
            }
        }
        self
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// Total size counting multiplicity.
    pub fn size(&self) -> usize {
        self.entries.iter().map(|&(_, c)| c).sum()
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    /// The items in ascending order with repetition.
    pub fn expand(&self) -> Vec<usize> {
        self.entries
            .iter()
            .flat_map(|&(x, c)| std::iter::repeat_n(x, c))
            .collect()
    }

    fn ones_fraction(&self, row: &BitRow) -> f64 {
        let hits: usize = self.entries.iter().filter(|&&(x, _)| row.get(x)).map(|&(_, c)| c).sum();
        hits as f64 / self.size() as f64
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ApproximationCertificate {
    pub multiset: Multiset,
    pub max_deviation: f64,
    pub epsilon: f64,
    /// VC dimension of the test class that sets the size ceiling.
    pub vc_dimension: usize,
    pub size_ceiling: usize,
}

impl ApproximationCertificate {
    /// Recomputes the deviation against `tests` and `mu` and checks it matches
    /// the stored value and stays within epsilon.
    pub fn verify(&self, tests: &ConceptClass, mu: &ProbabilityVector) -> bool {
        let dev = max_deviation(tests, mu, &self.multiset);
        dev == self.max_deviation && dev <= self.epsilon
    }
}

/// Rejection-sampling parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ApproxConfig {
    /// Constant in the sample size `ceil(c_apx * (d + 1) / eps^2)`.
    pub c_apx: f64,
    /// Draws per size before the size is doubled (once) or the call fails.
    pub retries: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            c_apx: 16.0,
            retries: 64,
        }
    }
}

impl ApproxConfig {
    /// Sample size drawn on the first round for tests of VC dimension `vc`.
    pub fn size_ceiling(&self, vc: usize, epsilon: f64) -> usize {
        (self.c_apx * (vc as f64 + 1.0) / (epsilon * epsilon)).ceil() as usize
    }
}

/// Largest `|mu(c = 1) - freq(c = 1)|` over every concept of `tests`.
pub fn max_deviation(tests: &ConceptClass, mu: &ProbabilityVector, multiset: &Multiset) -> f64 {
    tests
        .rows()
        .iter()
        .map(|row| (mu.mass_of(row) - multiset.ones_fraction(row)).abs())
        .fold(0.0, f64::max)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain(format!("epsilon {epsilon} outside (0, 1]")));
    }
    Ok(())
}

/// Finds a multiset of domain points whose empirical measure is within
/// `epsilon` of `mu` on every concept of `class`.
pub fn epsilon_approximation(
    class: &ConceptClass,
    mu: &ProbabilityVector,
    epsilon: f64,
    seed: u64,
    config: &ApproxConfig,
) -> Result<ApproximationCertificate> {
    check_epsilon(epsilon)?;
    approximate(class, mu, epsilon, epsilon, seed, config)
}

/// Core sampler. Sizes are computed from `size_epsilon`; acceptance requires
/// deviation at most `accept_epsilon`.
pub(crate) fn approximate(
    tests: &ConceptClass,
    mu: &ProbabilityVector,
    size_epsilon: f64,
    accept_epsilon: f64,
    seed: u64,
    config: &ApproxConfig,
) -> Result<ApproximationCertificate> {
    if mu.len() != tests.domain_size() {
        return Err(Error::domain(format!(
            "distribution over {} points for a class over {}",
            mu.len(),
            tests.domain_size()
        )));
    }
    let vc = tests.vc_dimension();
    let base = config.size_ceiling(vc, size_epsilon).max(1);
    let masses: Vec<f64> = tests.rows().iter().map(|r| mu.mass_of(r)).collect();
    let sampler = WeightedIndex::new(mu.weights()).map_err(|e| Error::domain(e.to_string()))?;
    let mut rng = rng::stream(seed, 0);
    let mut best = f64::INFINITY;
    let mut attempts = 0;
    for size in [base, 2 * base] {
        for _ in 0..config.retries.max(1) {
            attempts += 1;
            let multiset = Multiset::from_items((0..size).map(|_| sampler.sample(&mut rng))).reduced();
            let dev = tests
                .rows()
                .iter()
                .zip(&masses)
                .map(|(row, m)| (m - multiset.ones_fraction(row)).abs())
                .fold(0.0, f64::max);
            if dev <= accept_epsilon {
                // recompute through the public path so `verify` matches bit for bit
                let max_deviation = max_deviation(tests, mu, &multiset);
                return Ok(ApproximationCertificate {
                    multiset,
                    max_deviation,
                    epsilon: accept_epsilon,
                    vc_dimension: vc,
                    size_ceiling: base,
                });
            }
            best = best.min(dev);
        }
    }
    Err(Error::ApproximationBudget {
        epsilon: accept_epsilon,
        max_size: 2 * base,
        attempts,
        best_deviation: best,
    })
}

/// Result of sparsifying a mixture of concepts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseMixture {
    /// Chosen concepts, with multiplicity.
    pub concepts: Multiset,
    /// Certificate over the dual class: its multiset indexes concepts and its
    /// deviation is the worst per-point gap.
    pub certificate: ApproximationCertificate,
}

/// Replaces a distribution `p` over the concepts of `class` by a uniform
/// average over a multiset `F` with `|p(c(x) = 1) - freq_F(f(x) = 1)| <= epsilon`
/// at every domain point `x`. This is the ε-approximation of `p` against the
/// dual class.
pub fn sparsify_mixture(
    class: &ConceptClass,
    p: &ProbabilityVector,
    epsilon: f64,
    seed: u64,
    config: &ApproxConfig,
) -> Result<SparseMixture> {
    check_epsilon(epsilon)?;
    sparsify_inner(class, p, epsilon, epsilon, seed, config)
}

fn sparsify_inner(
    class: &ConceptClass,
    p: &ProbabilityVector,
    size_epsilon: f64,
    accept_epsilon: f64,
    seed: u64,
    config: &ApproxConfig,
) -> Result<SparseMixture> {
    if p.len() != class.len() {
        return Err(Error::domain(format!(
            "mixture over {} concepts for a class of {}",
            p.len(),
            class.len()
        )));
    }
    let dual = class.dual();
    let certificate = approximate(&dual.class, p, size_epsilon, accept_epsilon, seed, config)?;
    Ok(SparseMixture {
        concepts: certificate.multiset.clone(),
        certificate,
    })
}

/// Exact worst per-point gap between mixture `p` over `rows` and the uniform
/// average over `chosen` (indices into `rows`).
pub fn mixture_deviation(rows: &[BitRow], p: &ProbabilityVector, chosen: &Multiset) -> f64 {
    let n = rows.first().map_or(0, |r| r.len());
    let total = chosen.size() as f64;
    (0..n)
        .map(|x| {
            let mass: f64 = rows
                .iter()
                .zip(p.weights())
                .filter(|(r, _)| r.get(x))
                .map(|(_, w)| w)
                .sum();
            let hits: usize = chosen
                .entries()
                .iter()
                .filter(|&&(i, _)| rows[i].get(x))
                .map(|&(_, c)| c)
                .sum();
            (mass - hits as f64 / total).abs()
        })
        .fold(0.0, f64::max)
}

/// Sparsifies a mixture over rows that may repeat.
///
/// Duplicate rows are merged (their mass is pooled on the lowest-index copy),
/// the distinct rows are sparsified as a concept class, and the result is
/// mapped back to row indices.
pub(crate) fn sparsify_rows(
    rows: &[BitRow],
    p: &ProbabilityVector,
    size_epsilon: f64,
    accept_epsilon: f64,
    seed: u64,
    config: &ApproxConfig,
) -> Result<SparseMixture> {
    if rows.len() != p.len() || rows.is_empty() {
        return Err(Error::domain("mixture length must match the number of rows"));
    }
    let class = ConceptClass::from_rows_dedup(rows[0].len(), rows.to_vec())?;
    let mut representative = vec![usize::MAX; class.len()];
    let mut pooled = vec![0.0; class.len()];
    for (i, (row, &w)) in rows.iter().zip(p.weights()).enumerate() {
        let c = class.index_of(row).expect("row present");
        if representative[c] == usize::MAX {
            representative[c] = i;
        }
        pooled[c] += w;
    }
    let pooled = ProbabilityVector::normalized(pooled)?;
    let mut mixture = sparsify_inner(&class, &pooled, size_epsilon, accept_epsilon, seed, config)?;
    mixture.concepts = Multiset::from_items(
        mixture
            .concepts
            .entries()
            .iter()
            .flat_map(|&(c, k)| std::iter::repeat_n(representative[c], k)),
    );
    Ok(mixture)
}

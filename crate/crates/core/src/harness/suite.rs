//! Verification suite: a fixed set of named cases, each producing a verdict
//! and the measured quantities behind it.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::approx::{epsilon_approximation, ApproxConfig, ProbabilityVector};
use crate::bits::{BitRow, Combinations};
use crate::concept::{ConceptClass, LabeledSample};
use crate::error::{Error, Result};
use crate::game::{solve_exact, solve_mw, sparse_epsilon_nash, GameConfig, PayoffMatrix};
use crate::harness::experiment::{generalization_experiment, ExperimentConfig};
use crate::harness::generators::{generate, GeneratorSpec};
use crate::learner::{build_hypothesis_set, DiscoveryMode, LearningMap};
use crate::rng;
use crate::scheme::{decode_info, encode_info, Scheme, SchemeConfig, SPARSIFY_EPSILON};

pub const CASES: &[&str] = &[
    "approximation",
    "codec",
    "dual_bound",
    "game_solvers",
    "generalization",
    "kernel_independence",
    "majority_margin",
    "round_trip",
    "singleton",
    "sparse_nash",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default)]
    pub seed: u64,
    /// Case identifiers to run; all cases when absent.
    #[serde(default)]
    pub cases: Option<Vec<String>>,
    /// Multiplier on the randomized workload sizes.
    #[serde(default = "default_scale")]
    pub scale: f64,
    /// Additional classes fed to the round-trip and dual-bound cases.
    #[serde(default)]
    pub extra_classes: Vec<GeneratorSpec>,
}

fn default_scale() -> f64 {
    1.0
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            cases: None,
            scale: 1.0,
            extra_classes: Vec::new(),
        }
    }
}

impl SuiteConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let config: SuiteConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("scale {} must be positive", self.scale)));
        }
        if let Some(cases) = &self.cases {
            for c in cases {
                if !CASES.contains(&c.as_str()) {
                    return Err(Error::Config(format!(
                        "unknown case `{c}`; known cases: {}",
                        CASES.join(", ")
                    )));
                }
            }
        }
        Ok(())
    }

    fn scaled(&self, n: usize) -> usize {
        ((n as f64 * self.scale).round() as usize).max(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub passed: bool,
    pub checks: usize,
    /// First few failure descriptions.
    pub failures: Vec<String>,
    pub details: Value,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub scale: f64,
    pub passed: bool,
    pub cases: Vec<CaseReport>,
}

impl SuiteReport {
    /// Zeroes every timing field, for comparing reports across runs.
    pub fn without_timing(mut self) -> Self {
        for c in &mut self.cases {
            c.elapsed_ms = 0.0;
        }
        self
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

const MAX_LISTED_FAILURES: usize = 20;

/// Accumulates checks for one case.
struct Tally {
    checks: usize,
    failed: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Tally {
            checks: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(describe());
            }
        }
    }

    fn finish(self, id: &str, details: Value, started: Instant) -> CaseReport {
        CaseReport {
            id: id.to_string(),
            passed: self.failed == 0,
            checks: self.checks,
            failures: self.failures,
            details,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    config.validate()?;
    let extra: Vec<(String, ConceptClass)> = config
        .extra_classes
        .iter()
        .map(|spec| Ok((spec.label(), generate(spec)?)))
        .collect::<Result<_>>()?;
    let selected: BTreeSet<&str> = match &config.cases {
        Some(c) => c.iter().map(|s| s.as_str()).collect(),
        None => CASES.iter().copied().collect(),
    };
    let mut cases = Vec::new();
    for &id in CASES {
        if !selected.contains(id) {
            continue;
        }
        let report = match id {
            "approximation" => approximation_case(config)?,
            "codec" => codec_case(config),
            "dual_bound" => dual_bound_case(&extra)?,
            "game_solvers" => game_case(config)?,
            "generalization" => generalization_case(config)?,
            "kernel_independence" => kernel_case(config)?,
            "majority_margin" => margin_case(config)?,
            "round_trip" => round_trip_case(config, &extra)?,
            "singleton" => singleton_case()?,
            "sparse_nash" => sparse_nash_case(config)?,
            _ => unreachable!("case list validated"),
        };
        cases.push(report);
    }
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(SuiteReport {
        seed: config.seed,
        scale: config.scale,
        passed: cases.iter().all(|c| c.passed),
        cases,
    })
}

/// Generated classes over at most 8 points with at most 40 concepts.
pub fn small_classes() -> Result<Vec<(String, ConceptClass)>> {
    let mut specs = Vec::new();
    for n in 1..=8 {
        specs.push(GeneratorSpec::Intervals { n });
        for k in 2..=3 {
            specs.push(GeneratorSpec::KIntervalUnions { n, k });
        }
    }
    for n in 1..=5 {
        specs.push(GeneratorSpec::FullCube { n });
    }
    for side in 2..=8 {
        specs.push(GeneratorSpec::HalfspacesGrid {
            side,
            dim: 1,
            draws: 2000,
            seed: 0,
        });
    }
    specs.push(GeneratorSpec::HalfspacesGrid {
        side: 2,
        dim: 2,
        draws: 2000,
        seed: 0,
    });
    for n in [4, 6, 8] {
        for count in [1, 10, 25, 40] {
            for cap in 1..=3 {
                specs.push(GeneratorSpec::RandomVcCapped {
                    n,
                    count,
                    cap,
                    seed: (n * 100 + count + cap) as u64,
                });
            }
        }
    }
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for spec in specs {
        let class = generate(&spec)?;
        if class.domain_size() <= 8 && class.len() <= 40 && seen.insert(class.to_text()) {
            out.push((spec.label(), class));
        }
    }
    Ok(out)
}

/// Generated classes over at most 12 points, for dual-dimension checks.
pub fn dual_bound_classes() -> Result<Vec<(String, ConceptClass)>> {
    let mut specs = Vec::new();
    for n in 1..=12 {
        specs.push(GeneratorSpec::Intervals { n });
    }
    for n in [6, 9, 12] {
        for k in 2..=3 {
            specs.push(GeneratorSpec::KIntervalUnions { n, k });
        }
    }
    for n in 1..=8 {
        specs.push(GeneratorSpec::FullCube { n });
    }
    specs.push(GeneratorSpec::HalfspacesGrid {
        side: 3,
        dim: 2,
        draws: 5000,
        seed: 0,
    });
    specs.push(GeneratorSpec::HalfspacesGrid {
        side: 2,
        dim: 3,
        draws: 5000,
        seed: 0,
    });
    specs.push(GeneratorSpec::HalfspacesGrid {
        side: 12,
        dim: 1,
        draws: 5000,
        seed: 0,
    });
    for n in [8, 10, 12] {
        for cap in 1..=3 {
            specs.push(GeneratorSpec::RandomVcCapped {
                n,
                count: 60,
                cap,
                seed: (n * 10 + cap) as u64,
            });
        }
    }
    specs.iter().map(|s| Ok((s.label(), generate(s)?))).collect()
}

/// Every realizable labeling of every point set of size at most `max_points`.
pub fn realizable_samples(class: &ConceptClass, max_points: usize) -> Vec<LabeledSample> {
    let mut out = Vec::new();
    for k in 0..=max_points.min(class.domain_size()) {
        for set in Combinations::new(class.domain_size(), k) {
            let patterns: BTreeSet<BitRow> = class.rows().iter().map(|r| r.project(&set)).collect();
            for p in patterns {
                let sample =
                    LabeledSample::new(set.iter().zip(p.iter()).map(|(&x, y)| (x, y))).expect("distinct points");
                out.push(sample);
            }
        }
    }
    out
}

/// Random realizable sample of `size` points labeled by a random concept.
pub fn random_sample(class: &ConceptClass, size: usize, rng: &mut rng::Rng) -> LabeledSample {
    let target = rng.gen_range(0..class.len());
    let points: Vec<usize> = (0..size).map(|_| rng.gen_range(0..class.domain_size())).collect();
    class.label_points(target, &points).expect("points in range")
}

fn singleton_case() -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let class = ConceptClass::new(6, vec![BitRow::parse("010110").expect("literal")])?;
    let scheme = Scheme::new(&class, SchemeConfig::default());
    for sample in realizable_samples(&class, 6) {
        let rt = scheme.verify_round_trip(&sample, 0);
        tally.check(
            rt.passed && rt.report.as_ref().is_some_and(|r| r.kernel_size == 0),
            || format!("singleton class, sample {:?}: {:?}", sample.labels(), rt.failure),
        );
    }
    let samples = tally.checks;
    Ok(tally.finish("singleton", json!({ "samples": samples }), started))
}

fn round_trip_case(config: &SuiteConfig, extra: &[(String, ConceptClass)]) -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let mut per_class = Vec::new();
    for (label, class) in small_classes()?
        .iter()
        .chain(extra.iter().filter(|(_, c)| c.domain_size() <= 8))
    {
        let scheme = Scheme::new(class, SchemeConfig::default());
        let mut max_kernel = 0;
        let mut count = 0;
        for (i, sample) in realizable_samples(class, 5).iter().enumerate() {
            let rt = scheme.verify_round_trip(sample, rng::derive(config.seed, i as u64));
            if let Some(r) = &rt.report {
                max_kernel = max_kernel.max(r.kernel_size);
            }
            count += 1;
            tally.check(rt.passed, || {
                format!("{label}: sample {:?} failed: {rt:?}", sample.labels())
            });
        }
        per_class.push(json!({ "class": label, "samples": count, "max_kernel": max_kernel }));
    }
    let mut random = vec![
        (1u64, generate(&GeneratorSpec::Intervals { n: 10 })?),
        (
            2,
            generate(&GeneratorSpec::HalfspacesGrid {
                side: 5,
                dim: 2,
                draws: 20_000,
                seed: 0,
            })?,
        ),
    ]
    .into_iter()
    .zip([
        "intervals(n=10)".to_string(),
        "halfspaces_grid(side=5,dim=2,seed=0)".to_string(),
    ])
    .map(|((tag, class), label)| (tag, label, class))
    .collect::<Vec<_>>();
    random.extend(
        extra
            .iter()
            .enumerate()
            .filter(|(_, (_, c))| c.domain_size() > 8)
            .map(|(i, (label, class))| (100 + i as u64, label.clone(), class.clone())),
    );
    let mut random_rows = Vec::new();
    for (tag, label, class) in random {
        let scheme = Scheme::new(&class, SchemeConfig::default());
        let mut rng = rng::stream(config.seed, tag);
        let mut max_kernel = 0;
        let mut max_info = 0;
        let n = config.scaled(1000);
        for i in 0..n {
            let size = rng.gen_range(1..=500);
            let sample = random_sample(&class, size, &mut rng);
            let rt = scheme.verify_round_trip(&sample, rng::derive(config.seed, (tag << 32) + i as u64));
            if let Some(r) = &rt.report {
                max_kernel = max_kernel.max(r.kernel_size);
                max_info = max_info.max(r.info_bits);
            }
            tally.check(rt.passed, || format!("{label}: random sample {i} failed: {rt:?}"));
        }
        random_rows.push(json!({ "class": label, "samples": n, "max_kernel": max_kernel, "max_info_bits": max_info }));
    }
    Ok(tally.finish(
        "round_trip",
        json!({ "exhaustive": per_class, "random": random_rows }),
        started,
    ))
}

fn kernel_case(config: &SuiteConfig) -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let class = generate(&GeneratorSpec::Intervals { n: 10 })?;
    let scheme = Scheme::new(&class, SchemeConfig::default());
    let mut tiers = Vec::new();
    let mut ceilings = BTreeSet::new();
    for (tier, m) in [10usize, 100, 1000].into_iter().enumerate() {
        let mut rng = rng::stream(config.seed, 10 + tier as u64);
        let mut max_kernel = 0;
        let mut max_info = 0;
        let mut tier_ceilings = BTreeSet::new();
        for i in 0..config.scaled(100) {
            let sample = random_sample(&class, m, &mut rng);
            let (_, r) = scheme.compress(&sample, rng::derive(config.seed, i as u64))?;
            max_kernel = max_kernel.max(r.kernel_size);
            max_info = max_info.max(r.info_bits);
            tally.check(
                r.kernel_size <= r.kernel_ceiling && r.info_bits <= r.info_bits_ceiling,
                || {
                    format!(
                        "m={m}: kernel {} / info {} above ceilings {} / {}",
                        r.kernel_size, r.info_bits, r.kernel_ceiling, r.info_bits_ceiling
                    )
                },
            );
            tier_ceilings.insert((r.kernel_ceiling, r.info_bits_ceiling));
        }
        ceilings.extend(tier_ceilings.iter().copied());
        tiers.push(json!({
            "m": m,
            "max_kernel": max_kernel,
            "max_info_bits": max_info,
            "ceilings": tier_ceilings.iter().map(|&(k, i)| json!({"kernel": k, "info_bits": i})).collect::<Vec<_>>(),
        }));
    }
    tally.check(ceilings.len() == 1, || {
        format!("ceilings differ across tiers: {ceilings:?}")
    });
    Ok(tally.finish("kernel_independence", json!({ "tiers": tiers }), started))
}

fn dual_bound_case(extra: &[(String, ConceptClass)]) -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let mut rows = Vec::new();
    for (label, class) in dual_bound_classes()?
        .iter()
        .chain(extra.iter().filter(|(_, c)| c.domain_size() <= 12))
    {
        let d = class.vc_dimension();
        let dual = class.dual().class.vc_dimension();
        tally.check(d < 63 && dual < (1usize << (d + 1)), || {
            format!("{label}: d={d}, dual d={dual}")
        });
        rows.push(json!({ "class": label, "vc": d, "dual_vc": dual }));
    }
    Ok(tally.finish("dual_bound", json!({ "classes": rows }), started))
}

fn approximation_case(config: &SuiteConfig) -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let cfg = ApproxConfig::default();
    let specs = [
        GeneratorSpec::Intervals { n: 10 },
        GeneratorSpec::KIntervalUnions { n: 8, k: 1 },
        GeneratorSpec::FullCube { n: 3 },
        GeneratorSpec::HalfspacesGrid {
            side: 4,
            dim: 2,
            draws: 5000,
            seed: 1,
        },
        GeneratorSpec::RandomVcCapped {
            n: 10,
            count: 40,
            cap: 2,
            seed: 4,
        },
    ];
    let mut certificates = Vec::new();
    let mut rng = rng::stream(config.seed, 20);
    for spec in &specs {
        let class = generate(spec)?;
        let n = class.domain_size();
        let mut mus = vec![
            ("uniform".to_string(), ProbabilityVector::uniform(n)),
            ("point_mass".to_string(), ProbabilityVector::point_mass(n, n / 2)),
        ];
        for r in 0..config.scaled(3) {
            let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>().powi(3)).collect();
            mus.push((format!("random_{r}"), ProbabilityVector::normalized(w)?));
        }
        for (mu_label, mu) in &mus {
            for eps in [0.25, 0.125] {
                let seed = rng.gen();
                let cert = epsilon_approximation(&class, mu, eps, seed, &cfg)?;
                let bound = (16.0 * (cert.vc_dimension as f64 + 1.0) / (eps * eps)).ceil() as usize;
                let ok = cert.verify(&class, mu) && cert.max_deviation <= eps && cert.multiset.size() <= bound;
                tally.check(ok, || format!("{} / {mu_label} / eps={eps}: {cert:?}", spec.label()));
                certificates.push(json!({
                    "class": spec.label(),
                    "distribution": mu_label,
                    "epsilon": eps,
                    "seed": seed,
                    "vc_dimension": cert.vc_dimension,
                    "size": cert.multiset.size(),
                    "size_bound": bound,
                    "max_deviation": cert.max_deviation,
                    "multiset": cert.multiset.entries(),
                }));
            }
        }
    }
    Ok(tally.finish("approximation", json!({ "certificates": certificates }), started))
}

/// Cyclic 3x3 game whose value is 2/3.
pub fn cyclic_matrix() -> PayoffMatrix {
    PayoffMatrix::parse("3 3\n110\n011\n101\n").expect("literal")
}

/// Random binary matrix with dimensions in `1..=max`.
pub fn random_matrix(rng: &mut rng::Rng, max: usize) -> PayoffMatrix {
    let r = rng.gen_range(1..=max);
    let c = rng.gen_range(1..=max);
    let density: f64 = rng.gen_range(0.2..0.8);
    let bits: Vec<bool> = (0..r * c).map(|_| rng.gen_bool(density)).collect();
    PayoffMatrix::from_fn(r, c, |i, j| bits[i * c + j]).expect("nonempty")
}

fn game_case(config: &SuiteConfig) -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let cfg = GameConfig::default();
    let mut rng = rng::stream(config.seed, 30);
    let mut games = Vec::new();
    for i in 0..config.scaled(50) {
        let m = random_matrix(&mut rng, 50);
        let exact = solve_exact(&m, &cfg)?;
        let mw = solve_mw(&m, 0.01, &cfg)?;
        let gap = (mw.value_estimate - exact.value_estimate).abs();
        tally.check(
            gap <= 0.01 && mw.exploitability <= 0.01 && exact.exploitability <= 1e-9,
            || format!("game {i} ({}x{}): exact {exact:?}, mw {mw:?}", m.rows(), m.cols()),
        );
        games.push(json!({
            "rows": m.rows(),
            "cols": m.cols(),
            "exact_value": exact.value_estimate,
            "mw_value": mw.value_estimate,
            "mw_exploitability": mw.exploitability,
            "mw_iterations": mw.iterations,
        }));
    }
    let cyclic = solve_exact(&cyclic_matrix(), &cfg)?;
    tally.check((cyclic.value_estimate - 2.0 / 3.0).abs() <= 1e-9, || {
        format!("cyclic game: {cyclic:?}")
    });
    Ok(tally.finish(
        "game_solvers",
        json!({ "games": games, "cyclic_value": cyclic.value_estimate }),
        started,
    ))
}

/// Every row and column repeated `factor` times.
pub fn pad_matrix(m: &PayoffMatrix, factor: usize) -> PayoffMatrix {
    PayoffMatrix::from_fn(m.rows() * factor, m.cols() * factor, |r, j| {
        m.get(r / factor, j / factor)
    })
    .expect("nonempty")
}

fn sparse_nash_case(config: &SuiteConfig) -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let eps = SPARSIFY_EPSILON;
    let gcfg = GameConfig::default();
    let acfg = ApproxConfig::default();
    let scfg = SchemeConfig::default();
    let mut runs = Vec::new();
    let specs = [
        GeneratorSpec::Intervals { n: 10 },
        GeneratorSpec::HalfspacesGrid {
            side: 5,
            dim: 2,
            draws: 20_000,
            seed: 0,
        },
        GeneratorSpec::KIntervalUnions { n: 10, k: 2 },
    ];
    let mut rng = rng::stream(config.seed, 40);
    let mut matrices = Vec::new();
    for spec in &specs {
        let class = generate(spec)?;
        for _ in 0..config.scaled(5) {
            let size = rng.gen_range(5..=200);
            let sample = random_sample(&class, size, &mut rng);
            let map = LearningMap::initial(&class);
            let (set, _) = build_hypothesis_set(map, &sample, DiscoveryMode::Auto, rng.gen(), &scfg.weak)?;
            matrices.push((
                format!("agreement {}", spec.label()),
                set.agreement_matrix(&class, &sample),
            ));
        }
    }
    for i in 0..config.scaled(10) {
        matrices.push((format!("random {i}"), random_matrix(&mut rng, 20)));
    }
    for (label, m) in &matrices {
        let seed = rng.gen();
        let base = sparse_epsilon_nash(m, eps, seed, &gcfg, &acfg)?;
        let padded_m = pad_matrix(m, 10);
        let padded = sparse_epsilon_nash(&padded_m, eps, seed, &gcfg, &acfg)?;
        for (what, eq, mat) in [("base", &base, m), ("padded", &padded, &padded_m)] {
            tally.check(
                eq.verify(mat)
                    && eq.certified_exploitability <= eps
                    && eq.row_multiset.size() <= eq.row_ceiling
                    && eq.col_multiset.size() <= eq.col_ceiling,
                || format!("{label} {what}: {eq:?}"),
            );
        }
        tally.check(
            padded.row_ceiling == base.row_ceiling
                && padded.col_ceiling == base.col_ceiling
                && padded.row_multiset.support_size() <= base.row_multiset.support_size()
                && padded.col_multiset.support_size() <= base.col_multiset.support_size(),
            || format!("{label}: padding changed supports"),
        );
        runs.push(json!({
            "matrix": label,
            "shape": [m.rows(), m.cols()],
            "seed": seed,
            "row_support": base.row_multiset.support_size(),
            "col_support": base.col_multiset.support_size(),
            "padded_row_support": padded.row_multiset.support_size(),
            "padded_col_support": padded.col_multiset.support_size(),
            "row_ceiling": base.row_ceiling,
            "col_ceiling": base.col_ceiling,
            "certified_exploitability": base.certified_exploitability,
            "padded_certified_exploitability": padded.certified_exploitability,
        }));
    }
    Ok(tally.finish("sparse_nash", json!({ "epsilon": eps, "runs": runs }), started))
}

fn margin_case(config: &SuiteConfig) -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let specs = [
        GeneratorSpec::Intervals { n: 10 },
        GeneratorSpec::KIntervalUnions { n: 10, k: 2 },
        GeneratorSpec::HalfspacesGrid {
            side: 5,
            dim: 2,
            draws: 20_000,
            seed: 0,
        },
        GeneratorSpec::RandomVcCapped {
            n: 10,
            count: 60,
            cap: 3,
            seed: 7,
        },
    ];
    let mut rng = rng::stream(config.seed, 50);
    let mut rows = Vec::new();
    for spec in &specs {
        let class = generate(spec)?;
        let scheme = Scheme::new(&class, SchemeConfig::default());
        let mut max_t = 0;
        let mut tightest = f64::INFINITY;
        for _ in 0..config.scaled(100) {
            let size = rng.gen_range(1..=300);
            let sample = random_sample(&class, size, &mut rng);
            let (_, r) = scheme.compress(&sample, rng.gen())?;
            max_t = max_t.max(r.t);
            tightest = tightest.min(r.min_votes as f64 / r.t as f64);
            tally.check(2 * r.min_votes > r.t && r.min_votes >= r.margin_floor, || {
                format!(
                    "{}: {} of {} votes (floor {})",
                    spec.label(),
                    r.min_votes,
                    r.t,
                    r.margin_floor
                )
            });
        }
        rows.push(json!({ "class": spec.label(), "max_t": max_t, "min_agreement": tightest }));
    }
    Ok(tally.finish("majority_margin", json!({ "classes": rows }), started))
}

fn generalization_case(config: &SuiteConfig) -> Result<CaseReport> {
    let started = Instant::now();
    let mut tally = Tally::new();
    let exp = ExperimentConfig {
        class: GeneratorSpec::Intervals { n: 10 },
        target: 17,
        distribution: None,
        epsilon: 1.0 / 3.0,
        delta: 1.0 / 3.0,
        trials: config.scaled(200),
        seed: config.seed,
        pilot_samples: 20,
        pilot_size: 200,
    };
    let report = generalization_experiment(&exp, &SchemeConfig::default())?;
    tally.check(report.passed, || {
        format!(
            "failure fraction {} above {}",
            report.failure_fraction, report.allowed_fraction
        )
    });
    Ok(tally.finish(
        "generalization",
        serde_json::to_value(&report).expect("serializable"),
        started,
    ))
}

/// Random subset lists for codec checks: `T <= 64` subsets of positions `< |Z| <= 64`.
pub fn random_subsets(rng: &mut rng::Rng) -> Vec<Vec<usize>> {
    let z = rng.gen_range(0..=64usize);
    let t = rng.gen_range(1..=64usize);
    (0..t)
        .map(|_| {
            if z == 0 {
                return Vec::new();
            }
            let len = rng.gen_range(0..=z.min(8));
            let set: BTreeSet<usize> = (0..len).map(|_| rng.gen_range(0..z)).collect();
            set.into_iter().collect()
        })
        .collect()
}

fn codec_case(config: &SuiteConfig) -> CaseReport {
    let started = Instant::now();
    let mut tally = Tally::new();
    let mut rng = rng::stream(config.seed, 60);
    let mut corruptions = 0;
    for i in 0..config.scaled(10_000) {
        let subsets = random_subsets(&mut rng);
        let Ok(bytes) = encode_info(&subsets) else {
            tally.check(false, || format!("encode failed for {subsets:?}"));
            continue;
        };
        tally.check(decode_info(&bytes).ok().as_ref() == Some(&subsets), || {
            format!("round trip failed for {subsets:?}")
        });
        if i % 100 == 0 {
            for cut in 0..bytes.len() {
                tally.check(decode_info(&bytes[..cut]).is_err(), || {
                    format!("truncation to {cut} accepted")
                });
            }
            for pos in 0..bytes.len() {
                for flip in 1..=255u8 {
                    let mut bad = bytes.clone();
                    bad[pos] ^= flip;
                    corruptions += 1;
                    tally.check(decode_info(&bad).is_err(), || {
                        format!("corruption at {pos} by {flip:#04x} accepted")
                    });
                }
            }
        }
    }
    let checks = tally.checks;
    tally.finish(
        "codec",
        json!({ "checks": checks, "corruptions": corruptions }),
        started,
    )
}

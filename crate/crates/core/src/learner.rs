//! The proper learning map used by the compression scheme: lowest-index
//! consistent ERM on small sub-samples. Also builds the hypothesis set
//! `{ERM(Z) : Z ⊆ Y, |Z| <= s}` and a mixed strategy over it under which every
//! sample point is labeled correctly with probability at least 2/3.

use std::collections::HashMap;

use rand::distributions::{Distribution, WeightedIndex};
use serde::Serialize;

use crate::approx::ProbabilityVector;
use crate::bits::{binomial, BitRow};
use crate::concept::{ConceptClass, LabeledSample};
use crate::error::{Error, Result};
use crate::game::{self, GameConfig, GameSolution, PayoffMatrix};
use crate::rng;

/// Required per-point agreement mass.
pub const WEAK_TARGET: f64 = 2.0 / 3.0;

#[derive(Clone, Copy, Debug)]
pub struct LearningMap<'a> {
    class: &'a ConceptClass,
    subset_budget: usize,
}

impl<'a> LearningMap<'a> {
    pub fn new(class: &'a ConceptClass, subset_budget: usize) -> Result<Self> {
        if subset_budget == 0 {
            return Err(Error::domain("subset budget must be at least 1"));
        }
        Ok(LearningMap { class, subset_budget })
    }

    /// Starting budget `max(1, VC(class))`.
    pub fn initial(class: &'a ConceptClass) -> Self {
        LearningMap {
            class,
            subset_budget: class.vc_dimension().max(1),
        }
    }

    pub fn class(&self) -> &'a ConceptClass {
        self.class
    }

    pub fn subset_budget(&self) -> usize {
        self.subset_budget
    }

    /// Doubles the budget, capped at `point_cap` distinct points.
    pub fn escalate(&self, point_cap: usize) -> Self {
        LearningMap {
            class: self.class,
            subset_budget: (self.subset_budget * 2).min(point_cap).max(1),
        }
    }

    /// The lowest-index concept consistent with the sample.
    pub fn erm(&self, sample: &LabeledSample) -> Result<usize> {
        if sample.distinct_len() > self.subset_budget {
            return Err(Error::domain(format!(
                "sample has {} distinct points, budget is {}",
                sample.distinct_len(),
                self.subset_budget
            )));
        }
        self.class.check_sample(sample)?;
        Ok(self.class.first_consistent(sample).expect("checked realizable"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscoveryMode {
    /// Every subset of size at most `s`.
    Exhaustive,
    /// Grow the set with best responses to the adversary's distribution.
    DoubleOracle,
    /// Exhaustive when the subset count is below the configured limit.
    Auto,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisSet {
    /// Ascending concept indices.
    pub hypotheses: Vec<usize>,
    /// `provenance[i]`: ascending sample points whose ERM output is `hypotheses[i]`.
    pub provenance: Vec<Vec<usize>>,
    /// Final subset budget `s`.
    pub subset_budget: usize,
    /// Mode that produced the set.
    pub mode: DiscoveryMode,
}

impl HypothesisSet {
    /// Replays ERM on every provenance subset.
    pub fn verify(&self, class: &ConceptClass, sample: &LabeledSample) -> bool {
        let Ok(map) = LearningMap::new(class, self.subset_budget) else {
            return false;
        };
        self.hypotheses.len() == self.provenance.len()
            && self.hypotheses.iter().zip(&self.provenance).all(|(&h, z)| {
                z.len() <= self.subset_budget
                    && z.iter().all(|x| sample.label(*x).is_some())
                    && map.erm(&sample.restrict(z)).ok() == Some(h)
            })
    }

    /// Agreement matrix: rows are hypotheses, columns the ascending distinct
    /// sample points, entry 1 iff the hypothesis matches the label.
    pub fn agreement_matrix(&self, class: &ConceptClass, sample: &LabeledSample) -> PayoffMatrix {
        let points = sample.distinct_points();
        PayoffMatrix::from_fn(self.hypotheses.len(), points.len(), |r, j| {
            class.value(self.hypotheses[r], points[j]) == sample.label(points[j]).unwrap()
        })
        .expect("nonempty hypothesis set and sample")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeakLearnerConfig {
    pub game: GameConfig,
    /// Slack allowed below 2/3 in the per-point certificate.
    pub tolerance: f64,
    /// Auto mode enumerates exhaustively up to this many subsets.
    pub exhaustive_limit: u64,
    /// Double oracle stops once the restricted value reaches 2/3 plus this.
    pub margin: f64,
    /// Candidate subsets drawn per double-oracle round.
    pub draws: usize,
    /// Rounds without a new hypothesis before double oracle gives up.
    pub stall_rounds: usize,
    pub max_rounds: usize,
    /// Exhaustive fallback after a stalled double oracle applies up to these sizes.
    pub fallback_points: usize,
    pub fallback_budget: usize,
}

impl Default for WeakLearnerConfig {
    fn default() -> Self {
        WeakLearnerConfig {
            game: GameConfig::default(),
            tolerance: 0.01,
            exhaustive_limit: 100_000,
            margin: 1.0 / 24.0,
            draws: 32,
            stall_rounds: 16,
            max_rounds: 1024,
            fallback_points: 20,
            fallback_budget: 4,
        }
    }
}

/// Hypothesis discovery state: concepts with their smallest witnessing subset.
struct Discovered {
    index: HashMap<usize, usize>,
    hypotheses: Vec<usize>,
    provenance: Vec<Vec<usize>>,
}

impl Discovered {
    fn new() -> Self {
        Discovered {
            index: HashMap::new(),
            hypotheses: Vec::new(),
            provenance: Vec::new(),
        }
    }

    /// Records `h` with witness `z`, keeping the smaller witness. Returns true if `h` is new.
    fn add(&mut self, h: usize, z: &[usize]) -> bool {
        match self.index.get(&h) {
            Some(&i) => {
                if z.len() < self.provenance[i].len() {
                    self.provenance[i] = z.to_vec();
                }
                false
            }
            None => {
                self.index.insert(h, self.hypotheses.len());
                self.hypotheses.push(h);
                self.provenance.push(z.to_vec());
                true
            }
        }
    }

    fn into_set(self, subset_budget: usize, mode: DiscoveryMode) -> HypothesisSet {
        let mut pairs: Vec<(usize, Vec<usize>)> = self.hypotheses.into_iter().zip(self.provenance).collect();
        pairs.sort();
        let (hypotheses, provenance) = pairs.into_iter().unzip();
        HypothesisSet {
            hypotheses,
            provenance,
            subset_budget,
            mode,
        }
    }
}

/// Per-sample view shared by the discovery routines.
struct Instance<'a> {
    map: LearningMap<'a>,
    points: Vec<usize>,
    labels: BitRow,
    /// `consistent[x]`: concepts agreeing with the label of sample point `x`,
    /// as a row over concept indices. Unlabeled points map to an empty row.
    consistent: Vec<BitRow>,
}

impl<'a> Instance<'a> {
    fn new(map: LearningMap<'a>, sample: &LabeledSample) -> Self {
        let class = map.class;
        let points = sample.distinct_points();
        let labels = BitRow::from_bools((0..class.domain_size()).map(|x| sample.label(x).unwrap_or(false)));
        let mut consistent = vec![BitRow::zeros(0); class.domain_size()];
        for &x in &points {
            let y = labels.get(x);
            consistent[x] = BitRow::from_bools(class.rows().iter().map(|r| r.get(x) == y));
        }
        Instance {
            map,
            points,
            labels,
            consistent,
        }
    }

    /// Lowest-index concept consistent with the labels on `z`.
    fn erm_points(&self, z: &[usize]) -> Option<usize> {
        let Some((&first, rest)) = z.split_first() else {
            return Some(0);
        };
        let mut acc = self.consistent[first].clone();
        for &x in rest {
            let prev = acc.clone();
            acc.assign_and(&prev, &self.consistent[x]);
        }
        acc.first_one()
    }

    fn agreement_row(&self, h: usize) -> BitRow {
        let row = self.map.class.row(h);
        BitRow::from_bools(self.points.iter().map(|&x| row.get(x) == self.labels.get(x)))
    }

    /// ERM on every subset of at most `s` points, visited depth first with a
    /// running intersection of consistent concepts. Same-size subsets are seen
    /// in lexicographic order, so each hypothesis keeps its first smallest witness.
    fn exhaustive(&self) -> Discovered {
        let mut found = Discovered::new();
        found.add(0, &[]);
        let budget = self.map.subset_budget.min(self.points.len());
        let mut z = Vec::with_capacity(budget);
        let mut scratch: Vec<BitRow> = vec![BitRow::zeros(self.map.class.len()); budget + 1];
        scratch[0] = BitRow::zeros(self.map.class.len()).not();
        self.visit(0, &mut z, &mut scratch, &mut found, budget);
        found
    }

    fn visit(&self, start: usize, z: &mut Vec<usize>, scratch: &mut [BitRow], found: &mut Discovered, budget: usize) {
        let depth = z.len();
        if depth == budget {
            return;
        }
        for i in start..self.points.len() {
            let x = self.points[i];
            let (head, tail) = scratch.split_at_mut(depth + 1);
            tail[0].assign_and(&head[depth], &self.consistent[x]);
            let h = tail[0].first_one().expect("realizable sample");
            z.push(x);
            found.add(h, z);
            self.visit(i + 1, z, scratch, found, budget);
            z.pop();
        }
    }

    fn subset_count(&self) -> u64 {
        (0..=self.map.subset_budget.min(self.points.len()))
            .map(|k| binomial(self.points.len(), k))
            .fold(0u64, |a, b| a.saturating_add(b))
    }
}

/// Solves the agreement game for `rows` (one per hypothesis).
///
/// Duplicate and dominated rows never help the row player, so the game is
/// solved on the undominated rows and the strategy is lifted back with zero
/// mass elsewhere.
fn solve_agreement(rows: &[BitRow], cfg: &WeakLearnerConfig) -> Result<GameSolution> {
    let distinct = game::dedup_indices(rows);
    let keep: Vec<usize> = distinct
        .iter()
        .copied()
        .filter(|&a| !distinct.iter().any(|&b| b != a && rows[a].is_subset_of(&rows[b])))
        .collect();
    let sub = PayoffMatrix::new(keep.iter().map(|&i| rows[i].clone()).collect())?;
    let sol = game::solve(&sub, cfg.tolerance / 2.0, &cfg.game)?;
    let mut p = vec![0.0; rows.len()];
    for (k, &i) in keep.iter().enumerate() {
        p[i] = sol.row_strategy.weights()[k];
    }
    let full = PayoffMatrix::new(rows.to_vec())?;
    Ok(GameSolution::evaluate(
        &full,
        ProbabilityVector::new(p)?,
        sol.col_strategy.clone(),
        sol.iterations,
    ))
}

fn certified(sol: &GameSolution, cfg: &WeakLearnerConfig) -> bool {
    sol.lower_value >= WEAK_TARGET - cfg.tolerance
}

/// Builds the hypothesis set and a row strategy `p` over it with
/// `p({h : h(x) = y(x)}) >= 2/3 - tolerance` for every distinct sample point.
///
/// The subset budget starts at `map`'s and doubles on failure, up to the
/// number of distinct points.
pub fn build_hypothesis_set(
    map: LearningMap<'_>,
    sample: &LabeledSample,
    mode: DiscoveryMode,
    seed: u64,
    cfg: &WeakLearnerConfig,
) -> Result<(HypothesisSet, GameSolution)> {
    if sample.is_empty() {
        return Err(Error::domain("hypothesis set needs a nonempty sample"));
    }
    map.class.check_sample(sample)?;
    let mut inst = Instance::new(map, sample);
    let mut best = f64::NEG_INFINITY;
    for round in 0u64.. {
        let attempt = match mode {
            DiscoveryMode::Exhaustive => Some(run_exhaustive(&inst, cfg)?),
            DiscoveryMode::DoubleOracle => run_double_oracle(&inst, rng::derive(seed, round), cfg)?,
            DiscoveryMode::Auto => {
                if inst.subset_count() <= cfg.exhaustive_limit {
                    Some(run_exhaustive(&inst, cfg)?)
                } else {
                    run_double_oracle(&inst, rng::derive(seed, round), cfg)?
                }
            }
        };
        if let Some((set, sol)) = attempt {
            if certified(&sol, cfg) {
                return Ok((set, sol));
            }
            best = best.max(sol.lower_value);
        }
        if inst.map.subset_budget >= inst.points.len() {
            break;
        }
        inst.map = inst.map.escalate(inst.points.len());
    }
    Err(Error::WeakLearning {
        best_value: best,
        budget: inst.map.subset_budget,
    })
}

fn run_exhaustive(inst: &Instance<'_>, cfg: &WeakLearnerConfig) -> Result<(HypothesisSet, GameSolution)> {
    let set = inst
        .exhaustive()
        .into_set(inst.map.subset_budget, DiscoveryMode::Exhaustive);
    let rows: Vec<BitRow> = set.hypotheses.iter().map(|&h| inst.agreement_row(h)).collect();
    let sol = solve_agreement(&rows, cfg)?;
    Ok((set, sol))
}

/// Returns `None` when the oracle stalls and no exhaustive fallback applies.
fn run_double_oracle(
    inst: &Instance<'_>,
    seed: u64,
    cfg: &WeakLearnerConfig,
) -> Result<Option<(HypothesisSet, GameSolution)>> {
    let mut rng = rng::stream(seed, 0);
    let mut found = Discovered::new();
    let h0 = inst.erm_points(&[]).expect("nonempty class");
    found.add(h0, &[]);
    let mut rows: Vec<BitRow> = vec![inst.agreement_row(h0)];
    let mut stall = 0;
    let mut sol = solve_agreement(&rows, cfg)?;
    for _ in 0..cfg.max_rounds {
        if sol.lower_value >= WEAK_TARGET + cfg.margin || stall >= cfg.stall_rounds {
            break;
        }
        let q = &sol.col_strategy;
        let sampler = WeightedIndex::new(q.weights()).map_err(|e| Error::domain(e.to_string()))?;
        let mut best: Option<(f64, usize, Vec<usize>)> = None;
        for _ in 0..cfg.draws {
            let mut z: Vec<usize> = (0..inst.map.subset_budget)
                .map(|_| inst.points[sampler.sample(&mut rng)])
                .collect();
            z.sort_unstable();
            z.dedup();
            let h = inst.erm_points(&z).expect("realizable sample");
            let row = inst.agreement_row(h);
            let score: f64 = q
                .weights()
                .iter()
                .enumerate()
                .filter(|&(j, _)| row.get(j))
                .map(|(_, w)| w)
                .sum();
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, h, z));
            }
        }
        let (_, h, z) = best.expect("at least one draw");
        if found.add(h, &z) {
            rows.push(inst.agreement_row(h));
            sol = solve_agreement(&rows, cfg)?;
            stall = 0;
        } else {
            stall += 1;
        }
    }
    if certified(&sol, cfg) {
        let set = found.into_set(inst.map.subset_budget, DiscoveryMode::DoubleOracle);
        // rows were in discovery order; recompute for the canonical order
        let rows: Vec<BitRow> = set.hypotheses.iter().map(|&h| inst.agreement_row(h)).collect();
        let sol = solve_agreement(&rows, cfg)?;
        return Ok(Some((set, sol)));
    }
    if inst.points.len() <= cfg.fallback_points && inst.map.subset_budget <= cfg.fallback_budget {
        return run_exhaustive(inst, cfg).map(Some);
    }
    Ok(None)
}

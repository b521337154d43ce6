//! Finite concept classes stored as binary matrices, plus the combinatorial
//! primitives on them: shattering, VC dimension, dual classes, and
//! consistency with labeled samples.
//!
//! Rows are kept in lexicographic order. Every index-based reference in the
//! crate (ERM tie-breaking, compressed kernels, hypothesis provenance) relies
//! on that order being canonical.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::Serialize;

use crate::bits::BitRow;
use crate::error::{Error, Result};

/// A nonempty set of distinct binary concepts over the domain `0..domain_size`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ConceptClass {
    domain_size: usize,
    rows: Vec<BitRow>,
}

impl ConceptClass {
    /// Builds a class, rejecting duplicate rows. Rows are reordered canonically.
    pub fn new(domain_size: usize, mut rows: Vec<BitRow>) -> Result<Self> {
        Self::check_shape(domain_size, &rows)?;
        rows.sort();
        if let Some(w) = rows.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::domain(format!("duplicate concept {}", w[0])));
        }
        Ok(ConceptClass { domain_size, rows })
    }

    /// Builds a class from rows that may repeat; duplicates are dropped.
    pub fn from_rows_dedup(domain_size: usize, mut rows: Vec<BitRow>) -> Result<Self> {
        Self::check_shape(domain_size, &rows)?;
        rows.sort();
        rows.dedup();
        Ok(ConceptClass { domain_size, rows })
    }

    fn check_shape(domain_size: usize, rows: &[BitRow]) -> Result<()> {
        if domain_size == 0 {
            return Err(Error::domain("domain size must be positive"));
        }
        if rows.is_empty() {
            return Err(Error::domain("concept class must be nonempty"));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != domain_size) {
            return Err(Error::domain(format!(
                "row of length {} in class over {} points",
                r.len(),
                domain_size
            )));
        }
        Ok(())
    }

    /// Parses the text format: a header line `n m` followed by `m` rows of
    /// `n` characters from `{0,1}`. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let (n, rows) = parse_rows(text, false)?;
        let rows = rows.into_iter().map(|(_, r)| r).collect();
        ConceptClass::new(n, rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.domain_size, self.rows.len());
        for r in &self.rows {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    #[inline]
    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    /// Number of concepts.
    #[inline]
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    #[inline]
    pub fn rows(&self) -> &[BitRow] {
        &self.rows
    }

    #[inline]
    pub fn row(&self, concept: usize) -> &BitRow {
        &self.rows[concept]
    }

    #[inline]
    pub fn value(&self, concept: usize, point: usize) -> bool {
        self.rows[concept].get(point)
    }

    pub fn index_of(&self, row: &BitRow) -> Option<usize> {
        self.rows.binary_search(row).ok()
    }

    fn check_points(&self, points: impl IntoIterator<Item = usize>) -> Result<()> {
        for p in points {
            if p >= self.domain_size {
                return Err(Error::domain(format!(
                    "point {p} outside domain of size {}",
                    self.domain_size
                )));
            }
        }
        Ok(())
    }

    /// Returns a witness iff every labeling of `set` is realized by some concept.
    pub fn shatters(&self, set: &[usize]) -> Result<Option<ShatterWitness>> {
        self.check_points(set.iter().copied())?;
        let distinct: HashSet<usize> = set.iter().copied().collect();
        if distinct.len() != set.len() {
            return Err(Error::domain("shattering set has repeated points"));
        }
        let k = set.len();
        if k >= usize::BITS as usize - 1 || (1usize << k) > self.rows.len() {
            return Ok(None);
        }
        let mut witness = vec![usize::MAX; 1 << k];
        let mut found = 0;
        for (c, row) in self.rows.iter().enumerate() {
            let pattern = pattern_of(row, set);
            if witness[pattern] == usize::MAX {
                witness[pattern] = c;
                found += 1;
                if found == witness.len() {
                    return Ok(Some(ShatterWitness {
                        set: set.to_vec(),
                        witness_concepts: witness,
                    }));
                }
            }
        }
        Ok(None)
    }

    /// Exact VC dimension.
    ///
    /// Iterative deepening: for each target size a depth-first search extends
    /// point sets while tracking how they partition the concepts, keeping only
    /// candidate points that split every current cell. Points equal to or
    /// complementary to an earlier point, and constant points, are dropped up
    /// front since they never extend a shattered set differently.
    pub fn vc_dimension(&self) -> usize {
        self.largest_shattered_set().len()
    }

    /// A shattered set of maximum size, ascending.
    pub fn largest_shattered_set(&self) -> Vec<usize> {
        let columns = Columns::new(self);
        let roots = columns.distinct_nonconstant();
        let cap = (usize::BITS - 1 - self.rows.len().leading_zeros()) as usize;
        let mut best = Vec::new();
        let mut path = Vec::new();
        while best.len() < cap && columns.search(&columns.full, &roots, best.len() + 1, &mut path) {
            best = std::mem::take(&mut path);
        }
        best
    }

    /// The dual class: domain is the concept index set, concepts are the
    /// distinct columns `x -> (c -> c(x))`.
    pub fn dual(&self) -> DualClass {
        let m = self.rows.len();
        let columns: Vec<BitRow> = (0..self.domain_size)
            .map(|x| BitRow::from_bools((0..m).map(|c| self.rows[c].get(x))))
            .collect();
        let class = ConceptClass::from_rows_dedup(m, columns.clone())
            .expect("columns of a nonempty class form a nonempty class");
        let point_to_concept = columns
            .iter()
            .map(|col| class.index_of(col).expect("column present in dual"))
            .collect();
        DualClass {
            class,
            point_to_concept,
        }
    }

    pub fn is_consistent(&self, concept: usize, sample: &LabeledSample) -> bool {
        let row = &self.rows[concept];
        sample.labels.iter().all(|(&x, &y)| row.get(x) == y)
    }

    /// Ascending indices of all concepts agreeing with the sample on every point.
    pub fn consistent_concepts(&self, sample: &LabeledSample) -> Result<Vec<usize>> {
        self.check_points(sample.labels.keys().copied())?;
        Ok((0..self.rows.len())
            .filter(|&c| self.is_consistent(c, sample))
            .collect())
    }

    pub fn first_consistent(&self, sample: &LabeledSample) -> Option<usize> {
        (0..self.rows.len()).find(|&c| self.is_consistent(c, sample))
    }

    /// Checks the sample's points lie in the domain and some concept realizes it.
    pub fn check_sample(&self, sample: &LabeledSample) -> Result<()> {
        self.check_points(sample.labels.keys().copied())?;
        match self.first_consistent(sample) {
            Some(_) => Ok(()),
            None => Err(Error::Unrealizable),
        }
    }

    /// The sample obtained by labeling `points` with `concept`.
    pub fn label_points(&self, concept: usize, points: &[usize]) -> Result<LabeledSample> {
        self.check_points(points.iter().copied())?;
        let row = &self.rows[concept];
        LabeledSample::new(points.iter().map(|&x| (x, row.get(x))))
    }
}

/// Per-point column bitsets over the rows, for bit-parallel shattering tests.
struct Columns {
    words: usize,
    full: Vec<u64>,
    cols: Vec<Vec<u64>>,
}

impl Columns {
    fn new(class: &ConceptClass) -> Self {
        let m = class.rows.len();
        let words = m.div_ceil(64);
        let mut full = vec![u64::MAX; words];
        if !m.is_multiple_of(64) {
            full[words - 1] = (1u64 << (m % 64)) - 1;
        }
        let cols = (0..class.domain_size)
            .map(|x| {
                let mut col = vec![0u64; words];
                for (c, row) in class.rows.iter().enumerate() {
                    if row.get(x) {
                        col[c / 64] |= 1 << (c % 64);
                    }
                }
                col
            })
            .collect();
        Columns { words, full, cols }
    }

    /// One point per class of columns equal up to complement, skipping
    /// constant columns.
    fn distinct_nonconstant(&self) -> Vec<usize> {
        let mut seen = HashSet::new();
        (0..self.cols.len())
            .filter(|&x| {
                let col = &self.cols[x];
                let flipped: Vec<u64> = col.iter().zip(&self.full).map(|(c, f)| c ^ f).collect();
                let constant = col.iter().all(|&w| w == 0) || flipped.iter().all(|&w| w == 0);
                !constant && seen.insert(col.clone().min(flipped))
            })
            .collect()
    }

    /// True iff `x` puts concepts on both sides within every cell.
    fn splits_all(&self, cells: &[u64], x: usize) -> bool {
        let col = &self.cols[x];
        cells.chunks(self.words).all(|cell| {
            let (mut inside, mut outside) = (0, 0);
            for (a, b) in cell.iter().zip(col) {
                inside |= a & b;
                outside |= a & !b;
            }
            inside != 0 && outside != 0
        })
    }

    fn split(&self, cells: &[u64], x: usize) -> Vec<u64> {
        let col = &self.cols[x];
        let mut out = Vec::with_capacity(cells.len() * 2);
        for cell in cells.chunks(self.words) {
            out.extend(cell.iter().zip(col).map(|(a, b)| a & b));
            out.extend(cell.iter().zip(col).map(|(a, b)| a & !b));
        }
        out
    }

    /// Whether `path` extends by points from `candidates` to a shattered set
    /// of size `target`. On success `path` holds that set.
    fn search(&self, cells: &[u64], candidates: &[usize], target: usize, path: &mut Vec<usize>) -> bool {
        let depth = path.len();
        if depth == target {
            return true;
        }
        // every cell must still hold 2^(remaining) concepts
        let needed = 1usize << (target - depth);
        if cells
            .chunks(self.words)
            .any(|cell| cell.iter().map(|w| w.count_ones() as usize).sum::<usize>() < needed)
        {
            return false;
        }
        for (i, &x) in candidates.iter().enumerate() {
            if depth + (candidates.len() - i) < target {
                break;
            }
            if !self.splits_all(cells, x) {
                continue;
            }
            path.push(x);
            if depth + 1 == target {
                return true;
            }
            let next_cells = self.split(cells, x);
            let next: Vec<usize> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|&y| self.splits_all(&next_cells, y))
                .collect();
            if self.search(&next_cells, &next, target, path) {
                return true;
            }
            path.pop();
        }
        false
    }
}

#[inline]
fn pattern_of(row: &BitRow, set: &[usize]) -> usize {
    set.iter()
        .enumerate()
        .fold(0usize, |acc, (i, &x)| acc | ((row.get(x) as usize) << i))
}

/// Parses the shared `n m` + rows text format. Returns the domain size and the
/// rows with their 1-based line numbers, in file order.
pub(crate) fn parse_rows(text: &str, allow_duplicates: bool) -> Result<(usize, Vec<(usize, BitRow)>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header line `n m`".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let parse_num = |s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse {
            line: hline,
            message: format!("expected non-negative integer, found `{s}`"),
        })
    };
    if fields.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            message: "header must be `n m`".into(),
        });
    }
    let n = parse_num(fields[0])?;
    let m = parse_num(fields[1])?;
    if n == 0 {
        return Err(Error::Parse {
            line: hline,
            message: "domain size must be positive".into(),
        });
    }
    if m == 0 {
        return Err(Error::Parse {
            line: hline,
            message: "row count must be positive".into(),
        });
    }
    let mut rows: Vec<(usize, BitRow)> = Vec::with_capacity(m);
    let mut first_seen: BTreeMap<BitRow, usize> = BTreeMap::new();
    for (line, text) in lines {
        if rows.len() == m {
            return Err(Error::Parse {
                line,
                message: format!("more than the declared {m} rows"),
            });
        }
        if text.chars().count() != n {
            return Err(Error::Parse {
                line,
                message: format!("expected {n} characters, found {}", text.chars().count()),
            });
        }
        let row = BitRow::parse(text).ok_or_else(|| Error::Parse {
            line,
            message: "rows may only contain `0` and `1`".into(),
        })?;
        if !allow_duplicates {
            if let Some(prev) = first_seen.insert(row.clone(), line) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate row (first seen on line {prev})"),
                });
            }
        }
        rows.push((line, row));
    }
    if rows.len() != m {
        return Err(Error::Parse {
            line: text.lines().count().max(1),
            message: format!("declared {m} rows, found {}", rows.len()),
        });
    }
    Ok((n, rows))
}

/// Dual class together with the map from original points to dual concepts.
#[derive(Clone, Debug)]
pub struct DualClass {
    pub class: ConceptClass,
    /// `point_to_concept[x]` is the dual concept index of the column of point `x`.
    pub point_to_concept: Vec<usize>,
}

/// For a shattered `set`, `witness_concepts[pattern]` realizes `pattern`,
/// where bit `i` of `pattern` is the label of `set[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShatterWitness {
    pub set: Vec<usize>,
    pub witness_concepts: Vec<usize>,
}

impl ShatterWitness {
    pub fn verify(&self, class: &ConceptClass) -> bool {
        self.witness_concepts.len() == 1usize << self.set.len()
            && self
                .witness_concepts
                .iter()
                .enumerate()
                .all(|(pattern, &c)| c < class.len() && pattern_of(class.row(c), &self.set) == pattern)
    }
}

/// A labeled multiset of domain points. Labels are stored per distinct point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledSample {
    points: Vec<usize>,
    labels: BTreeMap<usize, bool>,
}

impl LabeledSample {
    /// Builds a sample from `(point, label)` pairs; repeated points must carry
    /// the same label.
    pub fn new<I: IntoIterator<Item = (usize, bool)>>(pairs: I) -> Result<Self> {
        let mut points = Vec::new();
        let mut labels = BTreeMap::new();
        for (x, y) in pairs {
            if let Some(&prev) = labels.get(&x) {
                if prev != y {
                    return Err(Error::domain(format!("point {x} carries conflicting labels")));
                }
            }
            labels.insert(x, y);
            points.push(x);
        }
        Ok(LabeledSample { points, labels })
    }

    /// Parses one `point label` pair per line, label `0` or `1`. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: i + 1, message };
            let mut fields = line.split_whitespace();
            let (Some(x), Some(y), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err(format!("expected `point label`, found `{line}`")));
            };
            let x: usize = x.parse().map_err(|_| parse_err(format!("invalid point `{x}`")))?;
            let y = match y {
                "0" => false,
                "1" => true,
                other => return Err(parse_err(format!("label must be 0 or 1, found `{other}`"))),
            };
            if pairs.iter().any(|&(p, l)| p == x && l != y) {
                return Err(parse_err(format!("point {x} carries conflicting labels")));
            }
            pairs.push((x, y));
        }
        LabeledSample::new(pairs)
    }

    /// Inverse of [`LabeledSample::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for &x in &self.points {
            let _ = writeln!(out, "{x} {}", u8::from(self.labels[&x]));
        }
        out
    }

    pub fn empty() -> Self {
        LabeledSample {
            points: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    /// Points with multiplicity, in insertion order.
    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Ascending distinct points.
    pub fn distinct_points(&self) -> Vec<usize> {
        self.labels.keys().copied().collect()
    }

    pub fn distinct_len(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, point: usize) -> Option<bool> {
        self.labels.get(&point).copied()
    }

    pub fn labels(&self) -> &BTreeMap<usize, bool> {
        &self.labels
    }

    /// The sample restricted to `subset` (each point of `subset` must be labeled).
    pub fn restrict(&self, subset: &[usize]) -> LabeledSample {
        LabeledSample::new(subset.iter().map(|&x| (x, self.labels[&x])))
            .expect("restriction of a consistent sample is consistent")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn class(rows: &[&str]) -> ConceptClass {
        let n = rows[0].len();
        ConceptClass::new(n, rows.iter().map(|r| BitRow::parse(r).unwrap()).collect()).unwrap()
    }

    fn cube(n: usize) -> ConceptClass {
        let rows = (0..1usize << n)
            .map(|m| BitRow::from_bools((0..n).map(|i| m >> i & 1 == 1)))
            .collect();
        ConceptClass::new(n, rows).unwrap()
    }

    fn intervals(n: usize) -> ConceptClass {
        let mut rows = vec![BitRow::zeros(n)];
        for a in 0..n {
            for b in a..n {
                rows.push(BitRow::from_bools((0..n).map(|x| a <= x && x <= b)));
            }
        }
        ConceptClass::new(n, rows).unwrap()
    }

    #[test]
    fn largest_shattered_set_is_a_witness() {
        let c = ConceptClass::parse("4 5\n0000\n1000\n0100\n0010\n1100\n").unwrap();
        let set = c.largest_shattered_set();
        assert_eq!(set.len(), c.vc_dimension());
        assert!(c.shatters(&set).unwrap().is_some());
    }

    #[test]
    fn sample_text_format() {
        let s = LabeledSample::parse("# comment\n3 1\n\n0 0\n3 1\n").unwrap();
        assert_eq!(s.points(), &[3, 0, 3]);
        assert_eq!(LabeledSample::parse(&s.to_text()).unwrap(), s);
        assert!(matches!(
            LabeledSample::parse("1 1\n1 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            LabeledSample::parse("1 2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            LabeledSample::parse("x 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            LabeledSample::parse("1 1 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn canonical_order() {
        let c = class(&["110", "000", "011"]);
        let strs: Vec<String> = c.rows().iter().map(|r| r.to_string()).collect();
        assert_eq!(strs, ["000", "011", "110"]);
    }

    #[test]
    fn rejects_duplicates_and_bad_lengths() {
        let dup = vec![BitRow::parse("01").unwrap(), BitRow::parse("01").unwrap()];
        assert!(ConceptClass::new(2, dup.clone()).is_err());
        assert_eq!(ConceptClass::from_rows_dedup(2, dup).unwrap().len(), 1);
        assert!(ConceptClass::new(3, vec![BitRow::parse("01").unwrap()]).is_err());
        assert!(ConceptClass::new(2, vec![]).is_err());
    }

    #[test]
    fn shatters_examples() {
        let w = cube(3).shatters(&[0, 1, 2]).unwrap().unwrap();
        assert!(w.verify(&cube(3)));
        assert!(class(&["0"]).shatters(&[0]).unwrap().is_none());
        assert!(intervals(10).shatters(&[2, 5, 8]).unwrap().is_none());
        assert!(cube(3).shatters(&[3]).is_err());
        assert!(cube(3).shatters(&[1, 1]).is_err());
        // empty set is shattered by any nonempty class
        assert!(class(&["0"]).shatters(&[]).unwrap().is_some());
    }

    #[test]
    fn vc_examples() {
        assert_eq!(cube(3).vc_dimension(), 3);
        assert_eq!(class(&["0101"]).vc_dimension(), 0);
        assert_eq!(intervals(10).len(), 56);
        assert_eq!(intervals(10).vc_dimension(), 2);
    }

    #[test]
    fn dual_examples() {
        let d = class(&["000", "110", "011"]).dual();
        assert_eq!(d.class.domain_size(), 3);
        let strs: Vec<String> = d.class.rows().iter().map(|r| r.to_string()).collect();
        assert_eq!(strs, ["001", "010", "011"]);
        // point 0 has column (0,0,1) in canonical row order 000,011,110
        assert_eq!(d.class.row(d.point_to_concept[0]).to_string(), "001");

        let single = class(&["00000"]).dual();
        assert_eq!(single.class.domain_size(), 1);
        assert_eq!(single.class.len(), 1);
        assert!(single.point_to_concept.iter().all(|&c| c == 0));

        let iv = intervals(10);
        assert!(iv.dual().class.vc_dimension() <= 7);
    }

    #[test]
    fn consistency_examples() {
        let c = cube(3);
        assert_eq!(c.consistent_concepts(&LabeledSample::empty()).unwrap().len(), 8);
        let s = LabeledSample::new([(0, true), (1, false)]).unwrap();
        let cons = c.consistent_concepts(&s).unwrap();
        assert_eq!(cons.len(), 2);
        assert!(cons.iter().all(|&i| c.value(i, 0) && !c.value(i, 1)));

        let s = LabeledSample::new([(2, true), (5, false), (8, true)]).unwrap();
        assert!(intervals(10).consistent_concepts(&s).unwrap().is_empty());
        assert_eq!(intervals(10).check_sample(&s), Err(Error::Unrealizable));
    }

    #[test]
    fn sample_rejects_conflicting_labels() {
        assert!(LabeledSample::new([(1, true), (1, false)]).is_err());
        let s = LabeledSample::new([(1, true), (4, false), (1, true)]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.distinct_points(), vec![1, 4]);
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let c = ConceptClass::parse("3 3\n110\n\n000\n011\n").unwrap();
        assert_eq!(ConceptClass::parse(&c.to_text()).unwrap(), c);

        match ConceptClass::parse("2 3\n01\n10\n01\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            ConceptClass::parse("2 1\n012\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            ConceptClass::parse("2 1\n0a\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(ConceptClass::parse("2 2\n01\n"), Err(Error::Parse { .. })));
        assert!(matches!(
            ConceptClass::parse("x 2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(ConceptClass::parse(""), Err(Error::Parse { .. })));
    }
}

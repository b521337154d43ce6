//! The sample compression scheme.
//!
//! Compression keeps the union `Z` of `T` small subsets `Z_1..Z_T` of the
//! sample, chosen so that the ERM hypotheses `f_t = ERM(Z_t)` label every
//! sample point correctly in a strict majority of the `T` votes. The side
//! information lists each `Z_t` as positions into sorted `Z`. Reconstruction
//! replays ERM on each `Z_t` and takes the majority vote at every domain point.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::approx::{sparsify_rows, ApproxConfig};
use crate::bits::BitRow;
use crate::concept::{ConceptClass, LabeledSample};
use crate::error::{Error, Result};
use crate::learner::{build_hypothesis_set, DiscoveryMode, LearningMap, WeakLearnerConfig, WEAK_TARGET};
use crate::rng;

/// Tolerance of the mixture sparsification step.
pub const SPARSIFY_EPSILON: f64 = 1.0 / 8.0;

/// Constant `c` in `info_bits <= c * k * ceil(log2(k + 1))`, `k = 1 + T * s`.
pub const INFO_CODEC_CONSTANT: usize = 24;

const MAGIC: &[u8; 6] = b"MYSCS1";

const CRC8: crc::Crc<u8> = crc::Crc::<u8>::new(&crc::CRC_8_SMBUS);

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SchemeConfig {
    pub weak: WeakLearnerConfig,
    pub approx: ApproxConfig,
    pub mode: DiscoveryModeConfig,
}

/// Serializable wrapper so the default mode is `Auto`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DiscoveryModeConfig(pub DiscoveryMode);

impl Default for DiscoveryModeConfig {
    fn default() -> Self {
        DiscoveryModeConfig(DiscoveryMode::Auto)
    }
}

/// The compressed form `((Z, z), i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedSample {
    domain_size: usize,
    kernel_points: Vec<usize>,
    kernel_labels: Vec<bool>,
    side_info: Vec<u8>,
}

impl CompressedSample {
    pub fn new(
        domain_size: usize,
        kernel_points: Vec<usize>,
        kernel_labels: Vec<bool>,
        side_info: Vec<u8>,
    ) -> Result<Self> {
        if kernel_points.len() != kernel_labels.len() {
            return Err(Error::domain("kernel points and labels differ in length"));
        }
        if kernel_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("kernel points must be strictly increasing"));
        }
        if kernel_points.last().is_some_and(|&x| x >= domain_size) {
            return Err(Error::domain("kernel point outside the domain"));
        }
        Ok(CompressedSample {
            domain_size,
            kernel_points,
            kernel_labels,
            side_info,
        })
    }

    pub fn domain_size(&self) -> usize {
        self.domain_size
    }

    pub fn kernel_points(&self) -> &[usize] {
        &self.kernel_points
    }

    pub fn kernel_labels(&self) -> &[bool] {
        &self.kernel_labels
    }

    pub fn side_info(&self) -> &[u8] {
        &self.side_info
    }

    pub fn kernel(&self) -> LabeledSample {
        LabeledSample::new(
            self.kernel_points
                .iter()
                .copied()
                .zip(self.kernel_labels.iter().copied()),
        )
        .expect("kernel points are distinct")
    }

    /// Binary form: magic `MYSCS1`, varint domain size, varint `|Z|`,
    /// delta-encoded varint kernel points, packed label bits (LSB first),
    /// then the side information.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        write_varint(&mut out, self.domain_size as u64);
        write_varint(&mut out, self.kernel_points.len() as u64);
        let mut prev = 0;
        for (i, &x) in self.kernel_points.iter().enumerate() {
            write_varint(&mut out, if i == 0 { x } else { x - prev } as u64);
            prev = x;
        }
        let mut labels = vec![0u8; self.kernel_labels.len().div_ceil(8)];
        for (i, &b) in self.kernel_labels.iter().enumerate() {
            if b {
                labels[i / 8] |= 1 << (i % 8);
            }
        }
        out.extend_from_slice(&labels);
        out.extend_from_slice(&self.side_info);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::decode(0, "missing MYSCS1 header"));
        }
        let mut r = Reader::new(bytes, MAGIC.len());
        let domain_size = r.usize()?;
        if domain_size == 0 {
            return Err(Error::decode(r.pos, "domain size must be positive"));
        }
        let k = r.count()?;
        let mut kernel_points = Vec::with_capacity(k);
        for i in 0..k {
            let at = r.pos;
            let v = r.usize()?;
            let x = if i == 0 {
                v
            } else {
                if v == 0 {
                    return Err(Error::decode(at, "kernel points must be strictly increasing"));
                }
                kernel_points[i - 1] + v
            };
            if x >= domain_size {
                return Err(Error::decode(at, "kernel point outside the domain"));
            }
            kernel_points.push(x);
        }
        let nbytes = k.div_ceil(8);
        let label_bytes = r.take(nbytes)?;
        let mut kernel_labels = Vec::with_capacity(k);
        for i in 0..k {
            kernel_labels.push(label_bytes[i / 8] >> (i % 8) & 1 == 1);
        }
        if k % 8 != 0 && label_bytes[nbytes - 1] >> (k % 8) != 0 {
            return Err(Error::decode(r.pos - 1, "nonzero label padding bits"));
        }
        let side_start = r.pos;
        let side_info = bytes[side_start..].to_vec();
        decode_info(&side_info).map_err(|e| match e {
            Error::Decode { offset, message } => Error::decode(side_start + offset, message),
            other => other,
        })?;
        Ok(CompressedSample {
            domain_size,
            kernel_points,
            kernel_labels,
            side_info,
        })
    }
}

fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn varint_len(v: usize) -> usize {
    let bits = usize::BITS as usize - v.leading_zeros() as usize;
    bits.div_ceil(7).max(1)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8], pos: usize) -> Self {
        Reader { bytes, pos }
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    /// Canonical LEB128: overlong encodings and overflow are rejected.
    fn varint(&mut self) -> Result<u64> {
        let start = self.pos;
        let mut value: u64 = 0;
        for shift in (0..64).step_by(7) {
            let Some(&byte) = self.bytes.get(self.pos) else {
                return Err(Error::decode(self.pos, "unexpected end of input in varint"));
            };
            self.pos += 1;
            let payload = (byte & 0x7f) as u64;
            if shift == 63 && payload > 1 {
                return Err(Error::decode(start, "varint overflows 64 bits"));
            }
            value |= payload << shift;
            if byte & 0x80 == 0 {
                if byte == 0 && shift > 0 {
                    return Err(Error::decode(start, "overlong varint"));
                }
                return Ok(value);
            }
        }
        Err(Error::decode(start, "varint longer than 10 bytes"))
    }

    fn usize(&mut self) -> Result<usize> {
        let at = self.pos;
        usize::try_from(self.varint()?).map_err(|_| Error::decode(at, "value does not fit in usize"))
    }

    /// A count of items that each take at least one more byte.
    fn count(&mut self) -> Result<usize> {
        let at = self.pos;
        let n = self.usize()?;
        if n > self.remaining() {
            return Err(Error::decode(at, "length exceeds remaining input"));
        }
        Ok(n)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(Error::decode(self.pos, "unexpected end of input"));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
}

/// Encodes the subsets `Z_1..Z_T` as positions into sorted `Z`: varint `T`,
/// then per subset a varint length and its strictly increasing positions,
/// then a CRC-8 of everything before it.
pub fn encode_info(subsets: &[Vec<usize>]) -> Result<Vec<u8>> {
    if subsets.is_empty() {
        return Err(Error::domain("side information needs at least one subset"));
    }
    let mut out = Vec::new();
    write_varint(&mut out, subsets.len() as u64);
    for s in subsets {
        if s.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("subset positions must be strictly increasing"));
        }
        write_varint(&mut out, s.len() as u64);
        for &p in s {
            write_varint(&mut out, p as u64);
        }
    }
    out.push(CRC8.checksum(&out));
    Ok(out)
}

/// Strict inverse of [`encode_info`]. Rejects truncation, trailing bytes,
/// non-canonical varints, unsorted subsets, and checksum mismatches.
pub fn decode_info(bytes: &[u8]) -> Result<Vec<Vec<usize>>> {
    let mut r = Reader::new(bytes, 0);
    let t = r.usize()?;
    if t == 0 {
        return Err(Error::decode(0, "subset count must be positive"));
    }
    // every subset takes at least one byte
    if t > r.remaining() {
        return Err(Error::decode(0, "subset count exceeds remaining input"));
    }
    let mut subsets = Vec::with_capacity(t);
    for _ in 0..t {
        let at = r.pos;
        let len = r.usize()?;
        if len > r.remaining() {
            return Err(Error::decode(at, "subset length exceeds remaining input"));
        }
        let mut s: Vec<usize> = Vec::with_capacity(len);
        for _ in 0..len {
            let at = r.pos;
            let p = r.usize()?;
            if s.last().is_some_and(|&last| last >= p) {
                return Err(Error::decode(at, "subset positions must be strictly increasing"));
            }
            s.push(p);
        }
        subsets.push(s);
    }
    let body_end = r.pos;
    let crc = r.take(1)?[0];
    if r.remaining() != 0 {
        return Err(Error::decode(r.pos, "trailing bytes after side information"));
    }
    if CRC8.checksum(&bytes[..body_end]) != crc {
        return Err(Error::decode(body_end, "side information checksum mismatch"));
    }
    Ok(subsets)
}

/// Bit length of the encoding of `t` subsets of size `s` over a kernel of
/// size at most `kernel` (positions below `kernel`).
pub fn info_bits_ceiling(t: usize, s: usize, kernel: usize) -> usize {
    8 * (varint_len(t) + t * (varint_len(s) + s * varint_len(kernel.saturating_sub(1))) + 1)
}

/// Per-run accounting.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeReport {
    pub sample_size: usize,
    pub distinct_points: usize,
    pub kernel_size: usize,
    pub info_bits: usize,
    #[serde(rename = "T")]
    pub t: usize,
    /// Final subset budget.
    pub s: usize,
    /// `kernel_size + info_bits`.
    pub scheme_size: usize,
    pub vc_dimension: usize,
    pub dual_vc_dimension: usize,
    /// Dual VC dimension of the hypothesis set restricted to the sample.
    pub mixture_dual_vc: usize,
    pub hypotheses: usize,
    pub mode: DiscoveryMode,
    /// Smallest per-point agreement mass of the weak-learner strategy.
    pub weak_value: f64,
    /// Smallest per-point count of agreeing votes among `T`.
    pub min_votes: usize,
    /// `ceil(T * (2/3 - 1/8 - tolerance))`.
    pub margin_floor: usize,
    /// Ceiling on `T` from the class dual VC dimension.
    pub t_ceiling: usize,
    pub kernel_ceiling: usize,
    pub info_bits_ceiling: usize,
    pub scheme_size_ceiling: usize,
}

/// `Z`-independent ceilings for a class, given the final subset budget `s`.
pub fn ceilings(dual_vc: usize, s: usize, approx: &ApproxConfig) -> (usize, usize, usize) {
    let t = approx.size_ceiling(dual_vc, SPARSIFY_EPSILON);
    let kernel = t * s;
    (t, kernel, info_bits_ceiling(t, s, kernel))
}

/// Compression output with the voting list kept for verification.
#[derive(Clone, Debug)]
pub struct CompressionTrace {
    pub compressed: CompressedSample,
    pub report: SchemeReport,
    /// Concept indices `f_1..f_T`.
    pub votes: Vec<usize>,
    /// Subsets `Z_1..Z_T` as domain points.
    pub subsets: Vec<Vec<usize>>,
}

/// A total function on the domain produced by reconstruction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypothesis {
    bits: BitRow,
}

impl Hypothesis {
    pub fn predict(&self, x: usize) -> bool {
        self.bits.get(x)
    }

    pub fn as_row(&self) -> &BitRow {
        &self.bits
    }
}

/// A compression scheme for one class, with its dimensions computed once.
#[derive(Clone, Debug)]
pub struct Scheme<'a> {
    class: &'a ConceptClass,
    config: SchemeConfig,
    vc: usize,
    dual_vc: usize,
}

impl<'a> Scheme<'a> {
    pub fn new(class: &'a ConceptClass, config: SchemeConfig) -> Self {
        Scheme {
            class,
            vc: class.vc_dimension(),
            dual_vc: class.dual().class.vc_dimension(),
            config,
        }
    }

    pub fn class(&self) -> &'a ConceptClass {
        self.class
    }

    pub fn vc_dimension(&self) -> usize {
        self.vc
    }

    pub fn dual_vc_dimension(&self) -> usize {
        self.dual_vc
    }

    pub fn initial_budget(&self) -> usize {
        self.vc.max(1)
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn compress(&self, sample: &LabeledSample, seed: u64) -> Result<(CompressedSample, SchemeReport)> {
        let trace = self.compress_traced(sample, seed)?;
        Ok((trace.compressed, trace.report))
    }

    pub fn compress_traced(&self, sample: &LabeledSample, seed: u64) -> Result<CompressionTrace> {
        let class = self.class;
        class.check_sample(sample)?;
        let map = LearningMap::new(class, self.initial_budget())?;
        let points = sample.distinct_points();

        let (votes, subsets, s, hypotheses, mixture_dual_vc, mode, weak_value) = if points.is_empty() {
            let h = map.erm(&LabeledSample::empty())?;
            (
                vec![h],
                vec![Vec::new()],
                map.subset_budget(),
                1,
                0,
                DiscoveryMode::Exhaustive,
                1.0,
            )
        } else {
            let (set, sol) =
                build_hypothesis_set(map, sample, self.config.mode.0, rng::derive(seed, 0), &self.config.weak)?;
            let restricted: Vec<BitRow> = set.hypotheses.iter().map(|&h| class.row(h).project(&points)).collect();
            let mixture = sparsify_rows(
                &restricted,
                &sol.row_strategy,
                SPARSIFY_EPSILON,
                SPARSIFY_EPSILON,
                rng::derive(seed, 1),
                &self.config.approx,
            )?;
            let chosen = mixture.concepts.expand();
            let votes: Vec<usize> = chosen.iter().map(|&i| set.hypotheses[i]).collect();
            let subsets: Vec<Vec<usize>> = chosen.iter().map(|&i| set.provenance[i].clone()).collect();
            (
                votes,
                subsets,
                set.subset_budget,
                set.hypotheses.len(),
                mixture.certificate.vc_dimension,
                set.mode,
                sol.lower_value,
            )
        };

        let t = votes.len();
        let min_votes = points
            .iter()
            .map(|&x| {
                let y = sample.label(x).unwrap();
                votes.iter().filter(|&&f| class.value(f, x) == y).count()
            })
            .min()
            .unwrap_or(t);
        if 2 * min_votes <= t {
            return Err(Error::Integrity(format!(
                "majority margin violated: {min_votes} of {t} votes agree at some point"
            )));
        }
        let margin_floor = if points.is_empty() {
            0
        } else {
            let frac = WEAK_TARGET - SPARSIFY_EPSILON - self.config.weak.tolerance;
            ((t as f64 * frac) - 1e-9).ceil() as usize
        };

        let kernel: BTreeSet<usize> = subsets.iter().flatten().copied().collect();
        let kernel_points: Vec<usize> = kernel.into_iter().collect();
        let position: HashMap<usize, usize> = kernel_points.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let positions: Vec<Vec<usize>> = subsets
            .iter()
            .map(|z| z.iter().map(|x| position[x]).collect())
            .collect();
        let side_info = encode_info(&positions)?;
        let kernel_labels = kernel_points.iter().map(|&x| sample.label(x).unwrap()).collect();
        let compressed = CompressedSample::new(class.domain_size(), kernel_points, kernel_labels, side_info)?;

        let kernel_size = compressed.kernel_points.len();
        let info_bits = 8 * compressed.side_info.len();
        let (t_ceiling, kernel_ceiling, info_bits_ceiling) = ceilings(self.dual_vc, s, &self.config.approx);
        let report = SchemeReport {
            sample_size: sample.len(),
            distinct_points: points.len(),
            kernel_size,
            info_bits,
            t,
            s,
            scheme_size: kernel_size + info_bits,
            vc_dimension: self.vc,
            dual_vc_dimension: self.dual_vc,
            mixture_dual_vc,
            hypotheses,
            mode,
            weak_value,
            min_votes,
            margin_floor,
            t_ceiling,
            kernel_ceiling,
            info_bits_ceiling,
            scheme_size_ceiling: kernel_ceiling + info_bits_ceiling,
        };
        Ok(CompressionTrace {
            compressed,
            report,
            votes,
            subsets,
        })
    }

    pub fn reconstruct(&self, compressed: &CompressedSample) -> Result<Hypothesis> {
        reconstruct(self.class, compressed)
    }

    pub fn verify_round_trip(&self, sample: &LabeledSample, seed: u64) -> RoundTrip {
        let trace = match self.compress_traced(sample, seed) {
            Ok(t) => t,
            Err(e) => return RoundTrip::failed(format!("compression failed: {e}")),
        };
        // reconstruct from the serialized bytes only
        let bytes = trace.compressed.to_bytes();
        let decoded = match CompressedSample::from_bytes(&bytes) {
            Ok(d) => d,
            Err(e) => return RoundTrip::failed(format!("serialized form did not decode: {e}")),
        };
        let (h, list) = match reconstruct_traced(self.class, &decoded) {
            Ok(r) => r,
            Err(e) => return RoundTrip::failed(format!("reconstruction failed: {e}")),
        };
        let mismatches = sample.labels().iter().filter(|&(&x, &y)| h.predict(x) != y).count();
        let lists_identical = list == trace.votes;
        let margin_holds =
            2 * trace.report.min_votes > trace.report.t && trace.report.min_votes >= trace.report.margin_floor;
        RoundTrip {
            passed: mismatches == 0 && lists_identical && margin_holds && decoded == trace.compressed,
            mismatches,
            lists_identical,
            margin_holds,
            failure: None,
            report: Some(trace.report),
        }
    }
}

/// Verdict of a compress / serialize / reconstruct cycle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundTrip {
    pub passed: bool,
    /// Sample points the reconstruction labels wrongly.
    pub mismatches: usize,
    /// Whether reconstruction replayed exactly the compression's votes.
    pub lists_identical: bool,
    pub margin_holds: bool,
    pub failure: Option<String>,
    pub report: Option<SchemeReport>,
}

impl RoundTrip {
    fn failed(reason: String) -> Self {
        RoundTrip {
            passed: false,
            mismatches: 0,
            lists_identical: false,
            margin_holds: false,
            failure: Some(reason),
            report: None,
        }
    }
}

pub fn compress(
    class: &ConceptClass,
    sample: &LabeledSample,
    seed: u64,
    config: &SchemeConfig,
) -> Result<(CompressedSample, SchemeReport)> {
    Scheme::new(class, config.clone()).compress(sample, seed)
}

pub fn verify_round_trip(class: &ConceptClass, sample: &LabeledSample, seed: u64, config: &SchemeConfig) -> RoundTrip {
    Scheme::new(class, config.clone()).verify_round_trip(sample, seed)
}

/// Majority vote of ERM on each decoded subset; ties go to 0.
pub fn reconstruct(class: &ConceptClass, compressed: &CompressedSample) -> Result<Hypothesis> {
    reconstruct_traced(class, compressed).map(|(h, _)| h)
}

/// Reconstruction that also returns the concept index of every `h_t`.
pub fn reconstruct_traced(class: &ConceptClass, compressed: &CompressedSample) -> Result<(Hypothesis, Vec<usize>)> {
    if compressed.domain_size != class.domain_size() {
        return Err(Error::domain(format!(
            "compressed sample over {} points for a class over {}",
            compressed.domain_size,
            class.domain_size()
        )));
    }
    let subsets = decode_info(&compressed.side_info)?;
    let k = compressed.kernel_points.len();
    let mut covered = vec![false; k];
    for s in &subsets {
        for &p in s {
            if p >= k {
                return Err(Error::Integrity(format!(
                    "subset position {p} outside kernel of size {k}"
                )));
            }
            covered[p] = true;
        }
    }
    if covered.iter().any(|c| !c) {
        return Err(Error::Integrity("subsets do not cover the kernel".into()));
    }
    let kernel = compressed.kernel();
    let budget = subsets.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let map = LearningMap::new(class, budget)?;
    let mut memo: HashMap<&[usize], usize> = HashMap::new();
    let mut list = Vec::with_capacity(subsets.len());
    for s in &subsets {
        let h = match memo.get(s.as_slice()) {
            Some(&h) => h,
            None => {
                let points: Vec<usize> = s.iter().map(|&p| compressed.kernel_points[p]).collect();
                let h = map.erm(&kernel.restrict(&points)).map_err(|e| match e {
                    Error::Unrealizable => Error::Integrity(format!("subset {points:?} has no consistent concept")),
                    other => other,
                })?;
                memo.insert(s.as_slice(), h);
                h
            }
        };
        list.push(h);
    }
    let t = list.len();
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &h in &list {
        *counts.entry(h).or_default() += 1;
    }
    let bits = BitRow::from_bools((0..class.domain_size()).map(|x| {
        let ones: usize = counts
            .iter()
            .filter(|&(&h, _)| class.value(h, x))
            .map(|(_, &c)| c)
            .sum();
        2 * ones > t
    }));
    Ok((Hypothesis { bits }, list))
}

#[cfg(test)]
mod tests {
    use super::*;

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
    fn info_codec_examples() {
        let one_empty = encode_info(&[vec![]]).unwrap();
        assert_eq!(one_empty.len(), 3);
        assert_eq!(decode_info(&one_empty).unwrap(), vec![Vec::<usize>::new()]);
        let subsets = vec![vec![0, 2], vec![1]];
        assert_eq!(decode_info(&encode_info(&subsets).unwrap()).unwrap(), subsets);
        assert!(encode_info(&[]).is_err());
        assert!(encode_info(&[vec![2, 1]]).is_err());
    }

    #[test]
    fn decode_rejects_malformed() {
        let good = encode_info(&[vec![0, 2], vec![1]]).unwrap();
        let mut trailing = good.clone();
        trailing.push(0);
        assert!(matches!(decode_info(&trailing), Err(Error::Decode { .. })));
        assert!(decode_info(&[]).is_err());
        // overlong zero
        assert!(decode_info(&[0x81, 0x00, 0x00, 0x00]).is_err());
        // T = 0
        assert!(decode_info(&[0x00, 0x00]).is_err());
        for cut in 0..good.len() {
            assert!(decode_info(&good[..cut]).is_err());
        }
    }

    #[test]
    fn varint_lengths() {
        for v in [0usize, 1, 127, 128, 16383, 16384, 1 << 40] {
            let mut out = Vec::new();
            write_varint(&mut out, v as u64);
            assert_eq!(out.len(), varint_len(v), "{v}");
            assert_eq!(Reader::new(&out, 0).varint().unwrap(), v as u64);
        }
    }

    #[test]
    fn singleton_class_compresses_to_nothing() {
        let single = ConceptClass::new(5, vec![BitRow::parse("01101").unwrap()]).unwrap();
        let points: Vec<usize> = (0..100).map(|i| i % 5).collect();
        let sample = single.label_points(0, &points).unwrap();
        let scheme = Scheme::new(&single, SchemeConfig::default());
        let trace = scheme.compress_traced(&sample, 1).unwrap();
        assert!(trace.compressed.kernel_points().is_empty());
        assert_eq!(trace.report.t, 1);
        assert_eq!(
            decode_info(trace.compressed.side_info()).unwrap(),
            vec![Vec::<usize>::new()]
        );
        let h = scheme.reconstruct(&trace.compressed).unwrap();
        assert_eq!(h.as_row(), single.row(0));
        assert!(scheme.verify_round_trip(&sample, 1).passed);
    }

    #[test]
    fn empty_sample() {
        let iv = intervals(6);
        let scheme = Scheme::new(&iv, SchemeConfig::default());
        let (c, report) = scheme.compress(&LabeledSample::empty(), 0).unwrap();
        assert!(c.kernel_points().is_empty());
        assert_eq!(report.t, 1);
        assert_eq!(scheme.reconstruct(&c).unwrap().as_row(), iv.row(0));
        assert!(scheme.verify_round_trip(&LabeledSample::empty(), 0).passed);
    }

    #[test]
    fn single_vote_is_that_hypothesis() {
        let iv = intervals(6);
        let c = CompressedSample::new(6, vec![1, 3], vec![true, true], encode_info(&[vec![0, 1]]).unwrap()).unwrap();
        let h = reconstruct(&iv, &c).unwrap();
        assert_eq!(h.as_row().to_string(), "011100");
    }

    #[test]
    fn ties_break_to_zero() {
        let iv = intervals(6);
        // votes [1,1] and [3,3] disagree everywhere they are nonzero
        let c = CompressedSample::new(
            6,
            vec![1, 3],
            vec![true, true],
            encode_info(&[vec![0], vec![1]]).unwrap(),
        )
        .unwrap();
        assert_eq!(reconstruct(&iv, &c).unwrap().as_row().to_string(), "000000");
    }

    #[test]
    fn reconstruct_integrity_errors() {
        let iv = intervals(6);
        let out_of_range = CompressedSample::new(6, vec![1], vec![true], encode_info(&[vec![0, 1]]).unwrap()).unwrap();
        assert!(matches!(reconstruct(&iv, &out_of_range), Err(Error::Integrity(_))));
        let uncovered =
            CompressedSample::new(6, vec![1, 2], vec![true, true], encode_info(&[vec![0]]).unwrap()).unwrap();
        assert!(matches!(reconstruct(&iv, &uncovered), Err(Error::Integrity(_))));
        let unrealizable = CompressedSample::new(
            6,
            vec![1, 2, 3],
            vec![true, false, true],
            encode_info(&[vec![0, 1, 2]]).unwrap(),
        )
        .unwrap();
        assert!(matches!(reconstruct(&iv, &unrealizable), Err(Error::Integrity(_))));
        let mut bad = out_of_range.clone();
        bad.side_info = vec![0xff];
        assert!(matches!(reconstruct(&iv, &bad), Err(Error::Decode { .. })));
    }

    #[test]
    fn serialization_is_strict() {
        let c = CompressedSample::new(
            300,
            vec![3, 200, 299],
            vec![true, false, true],
            encode_info(&[vec![0, 1, 2]]).unwrap(),
        )
        .unwrap();
        let bytes = c.to_bytes();
        assert_eq!(&bytes[..6], b"MYSCS1");
        assert_eq!(CompressedSample::from_bytes(&bytes).unwrap(), c);
        assert!(CompressedSample::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(CompressedSample::from_bytes(b"MYSCS2").is_err());
        let mut padded = bytes.clone();
        // label byte sits right after the three kernel varints
        let label_at = 6 + 2 + 1 + 1 + 2 + 1;
        padded[label_at] |= 0x80;
        assert!(CompressedSample::from_bytes(&padded).is_err());
    }

    #[test]
    fn intervals_round_trip_with_repeats() {
        let iv = intervals(10);
        let target = iv
            .index_of(&BitRow::from_bools((0..10).map(|x| (3..=6).contains(&x))))
            .unwrap();
        let points: Vec<usize> = (0..200).map(|i| (i * 7 + 3) % 10).collect();
        let sample = iv.label_points(target, &points).unwrap();
        let scheme = Scheme::new(&iv, SchemeConfig::default());
        let rt = scheme.verify_round_trip(&sample, 42);
        assert!(rt.passed, "{rt:?}");
        let r = rt.report.unwrap();
        assert!(r.kernel_size <= r.t * r.s);
        assert!(r.t <= 16 * (r.dual_vc_dimension + 1) * 64);
        let k = 1 + r.t * r.s;
        let log = (usize::BITS - k.leading_zeros()) as usize; // ceil(log2(k + 1))
        assert!(r.info_bits <= INFO_CODEC_CONSTANT * k * log);
    }
}

//! Adder evaluation of a prefix network and verification against an exact
//! integer oracle.
//!
//! Evaluation runs bit-sliced: each signal is a `u64` whose lanes are 64
//! independent addition vectors, so verification sweeps cost one network
//! pass per 64 vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefix::{
    gray_combine, GroupGP, NodeId, NodeKind, PrefixNetwork, TopologyKind, Violation,
};

/// Widest operand the integer-facing APIs accept; the oracle needs one
/// spare bit inside `u128`.
pub const MAX_INT_WIDTH: usize = 127;

/// Widest network [`verify_exhaustive`] accepts (2^(2w+1) vectors).
pub const MAX_EXHAUSTIVE_WIDTH: usize = 12;

/// Mismatches kept per report; `mismatch_count` holds the full total.
pub const MISMATCH_CAP: usize = 256;

const LANES: usize = 64;

/// Pre-processing cell: `g = a & b`, `p = a ^ b`.
pub fn preprocess(a_bit: bool, b_bit: bool) -> GroupGP {
    GroupGP::new(a_bit & b_bit, a_bit ^ b_bit)
}

/// Post-processing cell: `s = c ^ p`.
pub fn postprocess(carry_in_bit: bool, p: bool) -> bool {
    carry_in_bit ^ p
}

/// Fixed-width unsigned operand, bit 0 = LSB.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Operand {
    bits: Vec<bool>,
}

impl Operand {
    pub fn from_value(value: u128, width: usize) -> Result<Self> {
        check_int_width(width)?;
        if value >> width != 0 {
            return Err(Error::invalid(format!(
                "operand {value} does not fit in {width} bits"
            )));
        }
        Ok(Operand {
            bits: (0..width).map(|i| value >> i & 1 == 1).collect(),
        })
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Operand { bits }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Integer value of the low 128 bits.
    pub fn value(&self) -> u128 {
        self.bits
            .iter()
            .take(128)
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | (u128::from(b) << i))
    }
}

impl Serialize for Operand {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.value().serialize(s)
    }
}

/// `a + b + cin = sum + carry_out * 2^width`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct AdditionResult {
    pub sum: Operand,
    pub carry_out: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AddVector {
    pub a: u128,
    pub b: u128,
    pub cin: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVector {
    pub a: u128,
    pub b: u128,
    pub cin: bool,
    pub expected_sum: u128,
    pub expected_cout: bool,
    pub time_label_ns: u64,
}

impl TestVector {
    pub fn input(&self) -> AddVector {
        AddVector {
            a: self.a,
            b: self.b,
            cin: self.cin,
        }
    }
}

/// The seven-row 32-bit testbench with its simulation time labels.
pub const PAPER_TESTBENCH: [TestVector; 7] = [
    tv(0, 0, false, 0, false, 0),
    tv(1, 1, false, 2, false, 10),
    tv(4_294_967_295, 1, false, 0, true, 30),
    tv(2_147_483_648, 2_147_483_648, false, 0, true, 50),
    tv(0, 0, false, 0, false, 70),
    tv(10, 20, false, 30, false, 90),
    tv(15, 1, true, 17, false, 110),
];

pub const PAPER_TESTBENCH_WIDTH: usize = 32;

const fn tv(a: u128, b: u128, cin: bool, sum: u128, cout: bool, t: u64) -> TestVector {
    TestVector {
        a,
        b,
        cin,
        expected_sum: sum,
        expected_cout: cout,
        time_label_ns: t,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub a: u128,
    pub b: u128,
    pub cin: bool,
    pub got_sum: u128,
    pub got_cout: bool,
    pub expected_sum: u128,
    pub expected_cout: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub topology: TopologyKind,
    pub width: usize,
    pub vectors_run: u64,
    /// `None` for exhaustive runs.
    pub seed: Option<u64>,
    pub mismatch_count: u64,
    pub mismatches: Vec<Mismatch>,
    /// Semantic violations found before running (structural ones abort).
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Leaf(usize),
    Black(NodeId, NodeId),
    Gray(NodeId, NodeId),
    Buffer(NodeId),
}

/// A network compiled for repeated evaluation.
#[derive(Debug, Clone)]
pub struct Evaluator {
    width: usize,
    topology: TopologyKind,
    /// `(node, step)` in topological order.
    steps: Vec<(NodeId, Step)>,
    node_count: usize,
    outputs: Vec<NodeId>,
    violations: Vec<Violation>,
}

impl Evaluator {
    /// Compiles `net`. Structural violations are rejected; semantic ones
    /// (wrong spans) are kept so that a miswired network can still be run
    /// and shown to compute the wrong sum.
    pub fn new(net: &PrefixNetwork) -> Result<Self> {
        let report = crate::prefix::validate_network(net);
        let structural: Vec<_> = report.structural().cloned().collect();
        if !structural.is_empty() {
            return Err(Error::InvalidNetwork(structural));
        }
        let steps = net
            .topo_order()?
            .into_iter()
            .map(|id| {
                let node = net.node(id);
                let step = match node.kind {
                    NodeKind::Leaf => Step::Leaf(node.span.lo()),
                    NodeKind::Black => Step::Black(node.inputs[0], node.inputs[1]),
                    NodeKind::Gray => Step::Gray(node.inputs[0], node.inputs[1]),
                    NodeKind::Buffer => Step::Buffer(node.inputs[0]),
                };
                (id, step)
            })
            .collect();
        Ok(Evaluator {
            width: net.width(),
            topology: net.topology(),
            steps,
            node_count: net.nodes().len(),
            outputs: net.outputs().to_vec(),
            violations: report.violations,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Bit-sliced evaluation. `a[i]`/`b[i]` hold bit `i` of up to 64
    /// vectors, one per lane; `sum` receives the sum bits the same way.
    /// Returns the carry-out lanes.
    pub fn eval_lanes(&self, a: &[u64], b: &[u64], cin: u64, sum: &mut [u64]) -> u64 {
        assert_eq!(a.len(), self.width);
        assert_eq!(b.len(), self.width);
        assert_eq!(sum.len(), self.width);
        let mut g = vec![0u64; self.node_count];
        let mut p = vec![0u64; self.node_count];
        for &(id, step) in &self.steps {
            match step {
                Step::Leaf(bit) => {
                    // Leaves outside the operand range read as zero.
                    let (ab, bb) = (
                        a.get(bit).copied().unwrap_or(0),
                        b.get(bit).copied().unwrap_or(0),
                    );
                    g[id] = ab & bb;
                    p[id] = ab ^ bb;
                }
                Step::Black(hi, lo) => {
                    g[id] = g[hi] | (p[hi] & g[lo]);
                    p[id] = p[hi] & p[lo];
                }
                Step::Gray(hi, lo) => g[id] = g[hi] | (p[hi] & g[lo]),
                Step::Buffer(src) => {
                    g[id] = g[src];
                    p[id] = p[src];
                }
            }
        }
        let mut carry = cin;
        for (i, &out) in self.outputs.iter().enumerate() {
            sum[i] = carry ^ (a[i] ^ b[i]);
            carry = g[out] | (p[out] & cin);
        }
        carry
    }

    /// Single-vector evaluation through the scalar cell functions.
    pub fn evaluate(&self, a: &Operand, b: &Operand, cin: bool) -> Result<AdditionResult> {
        if a.width() != self.width || b.width() != self.width {
            return Err(Error::invalid(format!(
                "operand widths {}/{} do not match network width {}",
                a.width(),
                b.width(),
                self.width
            )));
        }
        let mut gp = vec![GroupGP::default(); self.node_count];
        let leaf: Vec<GroupGP> = a
            .bits()
            .iter()
            .zip(b.bits())
            .map(|(&x, &y)| preprocess(x, y))
            .collect();
        for &(id, step) in &self.steps {
            gp[id] = match step {
                Step::Leaf(bit) => leaf.get(bit).copied().unwrap_or_default(),
                Step::Black(hi, lo) => crate::prefix::combine_gp(gp[hi], gp[lo]),
                Step::Gray(hi, lo) => GroupGP::new(gray_combine(gp[hi], gp[lo].g), false),
                Step::Buffer(src) => gp[src],
            };
        }
        let mut carries = Vec::with_capacity(self.width + 1);
        carries.push(cin);
        for &out in &self.outputs {
            carries.push(gray_combine(gp[out], cin));
        }
        let sum = leaf
            .iter()
            .zip(&carries)
            .map(|(l, &c)| postprocess(c, l.p))
            .collect();
        Ok(AdditionResult {
            sum: Operand::from_bits(sum),
            carry_out: carries[self.width],
        })
    }

    /// Integer convenience wrapper over [`Evaluator::evaluate`].
    pub fn add(&self, a: u128, b: u128, cin: bool) -> Result<AdditionResult> {
        let a = Operand::from_value(a, self.width)?;
        let b = Operand::from_value(b, self.width)?;
        self.evaluate(&a, &b, cin)
    }

    /// Evaluates a batch of vectors 64 at a time; returns `(sum, cout)`.
    pub fn add_batch(&self, vectors: &[AddVector]) -> Vec<(u128, bool)> {
        let w = self.width;
        let mut out = Vec::with_capacity(vectors.len());
        let mut a = vec![0u64; w];
        let mut b = vec![0u64; w];
        let mut s = vec![0u64; w];
        for chunk in vectors.chunks(LANES) {
            a.fill(0);
            b.fill(0);
            let mut cin = 0u64;
            for (lane, v) in chunk.iter().enumerate() {
                for i in 0..w {
                    a[i] |= ((v.a >> i & 1) as u64) << lane;
                    b[i] |= ((v.b >> i & 1) as u64) << lane;
                }
                cin |= u64::from(v.cin) << lane;
            }
            let cout = self.eval_lanes(&a, &b, cin, &mut s);
            for lane in 0..chunk.len() {
                let sum = (0..w).fold(0u128, |acc, i| {
                    acc | (u128::from(s[i] >> lane & 1 == 1) << i)
                });
                out.push((sum, cout >> lane & 1 == 1));
            }
        }
        out
    }
}

/// One-shot evaluation of `net` on `(a, b, cin)`.
pub fn evaluate(
    net: &PrefixNetwork,
    a: &Operand,
    b: &Operand,
    cin: bool,
) -> Result<AdditionResult> {
    Evaluator::new(net)?.evaluate(a, b, cin)
}

/// Reference addition in `u128`, independent of any network.
pub fn oracle_add(a: u128, b: u128, cin: bool, width: usize) -> Result<AdditionResult> {
    check_int_width(width)?;
    let limit = 1u128 << width;
    if a >= limit || b >= limit {
        return Err(Error::invalid(format!(
            "operands {a}, {b} out of range for width {width}"
        )));
    }
    let total = a + b + u128::from(cin);
    Ok(AdditionResult {
        sum: Operand::from_value(total & (limit - 1), width)?,
        carry_out: total >> width == 1,
    })
}

fn check_int_width(width: usize) -> Result<()> {
    if width == 0 || width > MAX_INT_WIDTH {
        return Err(Error::invalid(format!(
            "width {width} outside supported range 1..={MAX_INT_WIDTH}"
        )));
    }
    Ok(())
}

#[derive(Default)]
struct Tally {
    count: u64,
    kept: Vec<Mismatch>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.count += other.count;
        self.kept.extend(other.kept);
        self.kept.sort_by_key(|m| (m.a, m.b, m.cin));
        self.kept.truncate(MISMATCH_CAP);
        self
    }
}

fn check_chunk(eval: &Evaluator, vectors: &[AddVector]) -> Tally {
    let width = eval.width();
    let mut tally = Tally::default();
    for (v, (sum, cout)) in vectors.iter().zip(eval.add_batch(vectors)) {
        let want = oracle_add(v.a, v.b, v.cin, width).expect("vectors are in range");
        let want_sum = want.sum.value();
        if sum != want_sum || cout != want.carry_out {
            tally.count += 1;
            tally.kept.push(Mismatch {
                a: v.a,
                b: v.b,
                cin: v.cin,
                got_sum: sum,
                got_cout: cout,
                expected_sum: want_sum,
                expected_cout: want.carry_out,
            });
        }
    }
    tally.kept.sort_by_key(|m| (m.a, m.b, m.cin));
    tally.kept.truncate(MISMATCH_CAP);
    tally
}

const CHUNK: usize = 1 << 14;

/// Runs every `(a, b, cin)` triple. Refused above
/// [`MAX_EXHAUSTIVE_WIDTH`] bits.
pub fn verify_exhaustive(net: &PrefixNetwork) -> Result<VerificationReport> {
    let width = net.width();
    if width > MAX_EXHAUSTIVE_WIDTH {
        return Err(Error::invalid(format!(
            "exhaustive verification needs width <= {MAX_EXHAUSTIVE_WIDTH} \
             (got {width}); use verify_random instead"
        )));
    }
    let eval = Evaluator::new(net)?;
    let total: u64 = 1 << (2 * width + 1);
    let mask = (1u128 << width) - 1;
    let chunks = total.div_ceil(CHUNK as u64);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK as u64;
            let end = (start + CHUNK as u64).min(total);
            let vectors: Vec<AddVector> = (start..end)
                .map(|k| {
                    let k = u128::from(k);
                    AddVector {
                        a: k & mask,
                        b: (k >> width) & mask,
                        cin: k >> (2 * width) == 1,
                    }
                })
                .collect();
            check_chunk(&eval, &vectors)
        })
        .reduce(Tally::default, Tally::merge);
    Ok(report(&eval, total, None, tally))
}

/// Edge operands always exercised by [`verify_random`]:
/// `{0, 1, 2^w - 1, 2^(w-1)}` squared, both carry-ins, duplicates removed.
pub fn boundary_vectors(width: usize) -> Vec<AddVector> {
    let max = if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    };
    let mut edges = vec![0, 1, max, 1u128 << (width - 1)];
    edges.sort_unstable();
    edges.dedup();
    let mut out = Vec::new();
    for &a in &edges {
        for &b in &edges {
            for cin in [false, true] {
                out.push(AddVector { a, b, cin });
            }
        }
    }
    out
}

/// Boundary vectors plus `count` seeded random ones.
pub fn verify_random(net: &PrefixNetwork, count: u64, seed: u64) -> Result<VerificationReport> {
    if count == 0 {
        return Err(Error::invalid("random verification needs count >= 1"));
    }
    check_int_width(net.width())?;
    let eval = Evaluator::new(net)?;
    let width = net.width();
    let mask = (1u128 << width) - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let boundary = boundary_vectors(width);
    let mut tally = check_chunk(&eval, &boundary);
    let mut remaining = count;
    while remaining > 0 {
        let n = remaining.min(CHUNK as u64 * 16) as usize;
        let vectors: Vec<AddVector> = (0..n)
            .map(|_| AddVector {
                a: rng.random::<u128>() & mask,
                b: rng.random::<u128>() & mask,
                cin: rng.random::<bool>(),
            })
            .collect();
        let part = vectors
            .par_chunks(CHUNK / 4)
            .map(|chunk| check_chunk(&eval, chunk))
            .reduce(Tally::default, Tally::merge);
        tally = tally.merge(part);
        remaining -= n as u64;
    }
    Ok(report(
        &eval,
        boundary.len() as u64 + count,
        Some(seed),
        tally,
    ))
}

fn report(
    eval: &Evaluator,
    vectors_run: u64,
    seed: Option<u64>,
    tally: Tally,
) -> VerificationReport {
    VerificationReport {
        topology: eval.topology,
        width: eval.width,
        vectors_run,
        seed,
        mismatch_count: tally.count,
        mismatches: tally.kept,
        violations: eval.violations.clone(),
    }
}

/// One executed testbench row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestbenchRow {
    pub test: usize,
    pub a: u128,
    pub b: u128,
    pub cin: u8,
    pub sum: u128,
    pub cout: u8,
    pub time_ns: u64,
    pub expected_sum: u128,
    pub expected_cout: u8,
    pub pass: bool,
}

/// Runs the seven 32-bit testbench rows in order.
pub fn run_paper_testbench(net: &PrefixNetwork) -> Result<Vec<TestbenchRow>> {
    if net.width() != PAPER_TESTBENCH_WIDTH {
        return Err(Error::invalid(format!(
            "the testbench is 32-bit; network width is {}",
            net.width()
        )));
    }
    run_testbench(net, &PAPER_TESTBENCH)
}

pub fn run_testbench(net: &PrefixNetwork, vectors: &[TestVector]) -> Result<Vec<TestbenchRow>> {
    let eval = Evaluator::new(net)?;
    vectors
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let r = eval.add(v.a, v.b, v.cin)?;
            let sum = r.sum.value();
            Ok(TestbenchRow {
                test: k + 1,
                a: v.a,
                b: v.b,
                cin: v.cin.into(),
                sum,
                cout: r.carry_out.into(),
                time_ns: v.time_label_ns,
                expected_sum: v.expected_sum,
                expected_cout: v.expected_cout.into(),
                pass: sum == v.expected_sum && r.carry_out == v.expected_cout,
            })
        })
        .collect()
}

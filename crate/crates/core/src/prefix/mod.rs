//! Prefix carry networks: the (generate, propagate) algebra, network
//! construction for each topology, validation, and structural metrics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod topology;
mod validate;

pub use topology::{build_network, insert_alignment_buffers};
pub use validate::{validate_network, ValidationReport, Violation};

pub type NodeId = usize;

/// Bit span `(hi:lo)`, inclusive on both ends, LSB = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct Span {
    hi: usize,
    lo: usize,
}

impl Span {
    pub fn new(hi: usize, lo: usize) -> Result<Self> {
        if hi < lo {
            return Err(Error::invalid(format!("span ({hi}:{lo}) has hi < lo")));
        }
        Ok(Span { hi, lo })
    }

    pub fn bit(i: usize) -> Self {
        Span { hi: i, lo: i }
    }

    pub fn hi(self) -> usize {
        self.hi
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    /// Joins `self` (upper) with `lower` when they are adjacent:
    /// `(i:k) ++ (k-1:j) = (i:j)`.
    pub fn concat(self, lower: Span) -> Option<Span> {
        (lower.hi + 1 == self.lo).then_some(Span {
            hi: self.hi,
            lo: lower.lo,
        })
    }
}

impl TryFrom<[usize; 2]> for Span {
    type Error = Error;

    fn try_from([hi, lo]: [usize; 2]) -> Result<Self> {
        Span::new(hi, lo)
    }
}

impl From<Span> for [usize; 2] {
    fn from(s: Span) -> Self {
        [s.hi, s.lo]
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}:{})", self.hi, self.lo)
    }
}

/// Group generate / propagate pair for a span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GroupGP {
    pub g: bool,
    pub p: bool,
}

impl GroupGP {
    pub const fn new(g: bool, p: bool) -> Self {
        GroupGP { g, p }
    }
}

/// The prefix operator (black cell). `hi` covers the more significant span.
///
/// Associative but not commutative.
pub fn combine_gp(hi: GroupGP, lo: GroupGP) -> GroupGP {
    GroupGP {
        g: hi.g | (hi.p & lo.g),
        p: hi.p & lo.p,
    }
}

/// Generate-only reduction (gray cell): `g | (p & lower_g)`.
pub fn gray_combine(node: GroupGP, lower_g: bool) -> bool {
    node.g | (node.p & lower_g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Leaf,
    Black,
    Gray,
    Buffer,
}

impl NodeKind {
    pub fn arity(self) -> usize {
        match self {
            NodeKind::Leaf => 0,
            NodeKind::Buffer => 1,
            NodeKind::Black | NodeKind::Gray => 2,
        }
    }

    pub fn is_operator(self) -> bool {
        matches!(self, NodeKind::Black | NodeKind::Gray)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub level: usize,
    pub span: Span,
    /// `[hi, lo]` for operators, `[src]` for buffers, empty for leaves.
    pub inputs: Vec<NodeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    BrentKung,
    KoggeStone,
    Sklansky,
    HanCarlson,
    #[serde(alias = "ripple")]
    RippleSerial,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 5] = [
        TopologyKind::BrentKung,
        TopologyKind::KoggeStone,
        TopologyKind::Sklansky,
        TopologyKind::HanCarlson,
        TopologyKind::RippleSerial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TopologyKind::BrentKung => "brent-kung",
            TopologyKind::KoggeStone => "kogge-stone",
            TopologyKind::Sklansky => "sklansky",
            TopologyKind::HanCarlson => "han-carlson",
            TopologyKind::RippleSerial => "ripple-serial",
        }
    }

    /// Short label used in comparison tables.
    pub fn abbrev(self) -> &'static str {
        match self {
            TopologyKind::BrentKung => "BKA",
            TopologyKind::KoggeStone => "KSA",
            TopologyKind::Sklansky => "SKL",
            TopologyKind::HanCarlson => "HCA",
            TopologyKind::RippleSerial => "RCA",
        }
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "ripple" {
            return Ok(TopologyKind::RippleSerial);
        }
        TopologyKind::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| {
                let valid: Vec<_> = TopologyKind::ALL.iter().map(|t| t.name()).collect();
                Error::invalid(format!(
                    "unknown topology '{s}' (valid: {})",
                    valid.join(", ")
                ))
            })
    }
}

/// A prefix carry network over `width` bits.
///
/// Node ids are positional (`nodes[k].id == k`). `outputs[i]` is the node
/// producing the group signals for span `(i:0)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixNetwork {
    width: usize,
    topology: TopologyKind,
    nodes: Vec<PrefixNode>,
    outputs: Vec<NodeId>,
}

impl PrefixNetwork {
    /// Assembles a network without checking it. Use [`validate_network`]
    /// before relying on any structural property.
    pub fn from_parts(
        width: usize,
        topology: TopologyKind,
        nodes: Vec<PrefixNode>,
        outputs: Vec<NodeId>,
    ) -> Self {
        PrefixNetwork {
            width,
            topology,
            nodes,
            outputs,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn topology(&self) -> TopologyKind {
        self.topology
    }

    pub fn nodes(&self) -> &[PrefixNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &PrefixNode {
        &self.nodes[id]
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Node ids in an order where every input precedes its consumer.
    /// Fails on dangling inputs or cycles.
    pub fn topo_order(&self) -> Result<Vec<NodeId>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        let mut consumers: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for node in &self.nodes {
            for &src in &node.inputs {
                if src >= n {
                    return Err(Error::InvalidNetwork(vec![Violation::DanglingInput {
                        node: node.id,
                        input: src,
                    }]));
                }
                consumers[src].push(node.id);
                indegree[node.id] += 1;
            }
        }
        let mut ready: std::collections::BTreeSet<NodeId> =
            (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &c in &consumers[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() != n {
            let stuck = (0..n).filter(|&v| indegree[v] > 0).collect();
            return Err(Error::InvalidNetwork(vec![Violation::Cycle {
                nodes: stuck,
            }]));
        }
        Ok(order)
    }

    /// Per node, the ids of nodes that take it as an input (ascending).
    pub fn consumers(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for node in &self.nodes {
            for &src in &node.inputs {
                if let Some(list) = out.get_mut(src) {
                    list.push(node.id);
                }
            }
        }
        out
    }

    /// Number of consumers of each node's propagate output, counting the
    /// carry stage as a consumer of every designated output.
    pub(crate) fn propagate_uses(&self) -> Vec<usize> {
        let mut uses = vec![0usize; self.nodes.len()];
        for node in &self.nodes {
            match (node.kind, node.inputs.as_slice()) {
                (NodeKind::Black, &[hi, lo]) => {
                    bump(&mut uses, hi);
                    bump(&mut uses, lo);
                }
                (NodeKind::Gray, &[hi, _]) | (NodeKind::Buffer, &[hi]) => bump(&mut uses, hi),
                _ => {}
            }
        }
        for &o in &self.outputs {
            bump(&mut uses, o);
        }
        uses
    }

    fn require_structure(&self) -> Result<()> {
        let report = validate_network(self);
        let structural: Vec<_> = report
            .violations
            .into_iter()
            .filter(Violation::is_structural)
            .collect();
        if structural.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidNetwork(structural))
        }
    }
}

fn bump(counts: &mut [usize], id: NodeId) {
    if let Some(c) = counts.get_mut(id) {
        *c += 1;
    }
}

/// Census of nodes by kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OperatorCounts {
    pub black: usize,
    pub gray: usize,
    pub buffer: usize,
}

impl OperatorCounts {
    /// Black plus gray cells; buffers are not prefix operators.
    pub fn operators(&self) -> usize {
        self.black + self.gray
    }
}

pub fn operator_counts(net: &PrefixNetwork) -> OperatorCounts {
    net.nodes
        .iter()
        .fold(OperatorCounts::default(), |mut acc, node| {
            match node.kind {
                NodeKind::Black => acc.black += 1,
                NodeKind::Gray => acc.gray += 1,
                NodeKind::Buffer => acc.buffer += 1,
                NodeKind::Leaf => {}
            }
            acc
        })
}

/// Longest leaf-to-output path counted in operator nodes (buffers weigh 0).
pub fn network_depth(net: &PrefixNetwork) -> Result<usize> {
    Ok(longest_path(net)?.len_ops)
}

/// A maximum-depth leaf-to-output path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixPath {
    pub nodes: Vec<NodeId>,
    pub len_ops: usize,
}

/// Longest leaf-to-output path. Among equally long paths the
/// lexicographically smallest node-id sequence is returned.
pub fn longest_path(net: &PrefixNetwork) -> Result<PrefixPath> {
    net.require_structure()?;
    let order = net.topo_order()?;
    let consumers = net.consumers();
    let weight = |v: NodeId| usize::from(net.nodes[v].kind.is_operator());
    let mut is_output = vec![false; net.nodes.len()];
    for &o in &net.outputs {
        is_output[o] = true;
    }

    // remaining[v]: best additional weight from v to some output, None if
    // no output is reachable.
    let mut remaining: Vec<Option<usize>> = vec![None; net.nodes.len()];
    for &v in order.iter().rev() {
        let mut best = is_output[v].then_some(0);
        for &c in &consumers[v] {
            if let Some(r) = remaining[c] {
                let cand = weight(c) + r;
                best = Some(best.map_or(cand, |b: usize| b.max(cand)));
            }
        }
        remaining[v] = best;
    }

    let start = net
        .nodes
        .iter()
        .filter(|n| n.kind == NodeKind::Leaf)
        .filter_map(|n| remaining[n.id].map(|r| (n.id, r)))
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(&a.0)))
        .ok_or_else(|| Error::invalid("network has no leaf reaching an output"))?;

    let mut path = vec![start.0];
    let mut v = start.0;
    let mut left = start.1;
    loop {
        if is_output[v] && left == 0 {
            break;
        }
        let next = consumers[v]
            .iter()
            .copied()
            .filter(|&c| remaining[c].is_some_and(|r| weight(c) + r == left))
            .min()
            .expect("remaining length implies a continuing consumer");
        left -= weight(next);
        path.push(next);
        v = next;
    }
    Ok(PrefixPath {
        nodes: path,
        len_ops: start.1,
    })
}

/// Maximum number of consumers of any node's output. The carry/sum tap on
/// each designated output counts as one consumer.
pub fn max_fanout(net: &PrefixNetwork) -> Result<usize> {
    net.require_structure()?;
    let mut fanout: Vec<usize> = net.consumers().iter().map(Vec::len).collect();
    for &o in &net.outputs {
        fanout[o] += 1;
    }
    Ok(fanout.into_iter().max().unwrap_or(0))
}

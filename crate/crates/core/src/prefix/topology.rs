use std::collections::BTreeMap;

use super::{NodeId, NodeKind, PrefixNetwork, PrefixNode, Span, TopologyKind};
use crate::error::{Error, Result};

/// Builds the prefix network of `topology` over `width` bits.
///
/// Node ids are assigned in construction order: leaves `0..width` first,
/// then operators stage by stage. Levels are ASAP (`1 + max(input levels)`).
pub fn build_network(topology: TopologyKind, width: usize) -> Result<PrefixNetwork> {
    if width == 0 {
        return Err(Error::invalid("width must be at least 1"));
    }
    let net = match topology {
        TopologyKind::RippleSerial => ripple(width),
        TopologyKind::KoggeStone => kogge_stone(width),
        TopologyKind::Sklansky => sklansky(width),
        TopologyKind::HanCarlson => han_carlson(width),
        TopologyKind::BrentKung => brent_kung(width),
    };
    Ok(classify_gray(net))
}

/// Tracks, per bit, the node currently holding that bit's widest group.
struct Builder {
    width: usize,
    nodes: Vec<PrefixNode>,
    current: Vec<NodeId>,
}

impl Builder {
    fn new(width: usize) -> Self {
        let nodes = (0..width)
            .map(|i| PrefixNode {
                id: i,
                kind: NodeKind::Leaf,
                level: 0,
                span: Span::bit(i),
                inputs: Vec::new(),
            })
            .collect();
        Builder {
            width,
            nodes,
            current: (0..width).collect(),
        }
    }

    /// `current[bit] = current[bit] o current[lower]`.
    fn combine(&mut self, bit: usize, lower: usize) {
        let hi = self.current[bit];
        let lo = self.current[lower];
        let span = self.nodes[hi]
            .span
            .concat(self.nodes[lo].span)
            .expect("generator combines adjacent spans");
        let id = self.nodes.len();
        self.nodes.push(PrefixNode {
            id,
            kind: NodeKind::Black,
            level: 1 + self.nodes[hi].level.max(self.nodes[lo].level),
            span,
            inputs: vec![hi, lo],
        });
        self.current[bit] = id;
    }

    fn finish(self, topology: TopologyKind) -> PrefixNetwork {
        debug_assert!(self
            .current
            .iter()
            .enumerate()
            .all(|(i, &id)| self.nodes[id].span == Span { hi: i, lo: 0 }));
        PrefixNetwork::from_parts(self.width, topology, self.nodes, self.current)
    }
}

fn ripple(width: usize) -> PrefixNetwork {
    let mut b = Builder::new(width);
    for i in 1..width {
        b.combine(i, i - 1);
    }
    b.finish(TopologyKind::RippleSerial)
}

fn kogge_stone(width: usize) -> PrefixNetwork {
    let mut b = Builder::new(width);
    let mut dist = 1;
    while dist < width {
        // Descending so `current[i - dist]` still holds the previous stage.
        for i in (dist..width).rev() {
            b.combine(i, i - dist);
        }
        dist *= 2;
    }
    b.finish(TopologyKind::KoggeStone)
}

fn sklansky(width: usize) -> PrefixNetwork {
    let mut b = Builder::new(width);
    let mut k = 0;
    while (1usize << k) < width {
        for i in 0..width {
            if i >> k & 1 == 1 {
                b.combine(i, ((i >> k) << k) - 1);
            }
        }
        k += 1;
    }
    b.finish(TopologyKind::Sklansky)
}

fn han_carlson(width: usize) -> PrefixNetwork {
    let mut b = Builder::new(width);
    for i in (1..width).step_by(2) {
        b.combine(i, i - 1);
    }
    let mut dist = 2;
    while dist < width {
        for i in (dist + 1..width).rev().filter(|i| i % 2 == 1) {
            b.combine(i, i - dist);
        }
        dist *= 2;
    }
    for i in (2..width).step_by(2) {
        b.combine(i, i - 1);
    }
    b.finish(TopologyKind::HanCarlson)
}

/// Up-sweep reduction tree followed by the down-sweep distribution tree,
/// built at the next power of two and pruned to `width`.
fn brent_kung(width: usize) -> PrefixNetwork {
    let full = width.next_power_of_two();
    let mut b = Builder::new(full);
    let mut dist = 1;
    while dist < full {
        for i in (2 * dist - 1..full).step_by(2 * dist) {
            b.combine(i, i - dist);
        }
        dist *= 2;
    }
    let mut dist = full / 4;
    while dist >= 1 {
        for i in (3 * dist - 1..full).step_by(2 * dist) {
            b.combine(i, i - dist);
        }
        dist /= 2;
    }
    let net = b.finish(TopologyKind::BrentKung);
    if full == width {
        net
    } else {
        prune(net, width)
    }
}

/// Drops every node whose span reaches bit `width` or above. Consumers of a
/// pruned node always have a span at least as high, so the result is closed.
fn prune(net: PrefixNetwork, width: usize) -> PrefixNetwork {
    let mut remap = vec![None; net.nodes.len()];
    let mut nodes = Vec::new();
    for node in net.nodes {
        if node.span.hi >= width {
            continue;
        }
        let id = nodes.len();
        remap[node.id] = Some(id);
        nodes.push(PrefixNode {
            id,
            inputs: node
                .inputs
                .iter()
                .map(|&i| remap[i].expect("inputs of kept nodes are kept"))
                .collect(),
            ..node
        });
    }
    let outputs = net.outputs[..width]
        .iter()
        .map(|&o| remap[o].expect("outputs below width are kept"))
        .collect();
    PrefixNetwork::from_parts(width, net.topology, nodes, outputs)
}

/// Reclassifies Black nodes whose propagate output nobody consumes as Gray.
/// Walks consumers before producers so a new Gray stops using its lower
/// input's propagate.
fn classify_gray(mut net: PrefixNetwork) -> PrefixNetwork {
    let mut uses = net.propagate_uses();
    for id in (0..net.nodes.len()).rev() {
        let node = &mut net.nodes[id];
        if node.kind == NodeKind::Black && uses[id] == 0 {
            node.kind = NodeKind::Gray;
            uses[node.inputs[1]] -= 1;
        }
    }
    net
}

/// Returns a copy of `net` with white cells inserted so every edge spans
/// exactly one level and every output sits on the final level.
///
/// Buffers never change logic values; they exist for row-aligned emission.
pub fn insert_alignment_buffers(net: &PrefixNetwork) -> Result<PrefixNetwork> {
    let report = super::validate_network(net);
    if !report.is_valid() {
        return Err(Error::InvalidNetwork(report.violations));
    }
    let level = |id: NodeId| net.nodes[id].level;
    let last = net.nodes.iter().map(|n| n.level).max().unwrap_or(0);

    // Highest level each producer must be carried to.
    let mut need: Vec<usize> = net.nodes.iter().map(|n| n.level).collect();
    for node in &net.nodes {
        for &src in &node.inputs {
            need[src] = need[src].max(node.level - 1);
        }
    }
    for &o in &net.outputs {
        need[o] = last;
    }

    let mut by_level: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
    for node in &net.nodes {
        by_level.entry(node.level).or_default().push(node.id);
    }

    let mut nodes: Vec<PrefixNode> = Vec::new();
    let mut new_id = vec![0; net.nodes.len()];
    // (producer, level) -> id of the buffer carrying producer at that level
    let mut carried: BTreeMap<(NodeId, usize), NodeId> = BTreeMap::new();
    let at = |carried: &BTreeMap<(NodeId, usize), NodeId>, new_id: &[NodeId], src, lvl| {
        if lvl == level(src) {
            new_id[src]
        } else {
            carried[&(src, lvl)]
        }
    };

    for lvl in 0..=last {
        for &id in by_level.get(&lvl).map(Vec::as_slice).unwrap_or(&[]) {
            let old = &net.nodes[id];
            let inputs = old
                .inputs
                .iter()
                .map(|&src| at(&carried, &new_id, src, lvl - 1))
                .collect();
            new_id[id] = nodes.len();
            nodes.push(PrefixNode {
                id: nodes.len(),
                inputs,
                ..old.clone()
            });
        }
        for (src, &needed) in need.iter().enumerate() {
            if level(src) < lvl && lvl <= needed {
                let prev = at(&carried, &new_id, src, lvl - 1);
                let id = nodes.len();
                nodes.push(PrefixNode {
                    id,
                    kind: NodeKind::Buffer,
                    level: lvl,
                    span: net.nodes[src].span,
                    inputs: vec![prev],
                });
                carried.insert((src, lvl), id);
            }
        }
    }
    let outputs = net
        .outputs
        .iter()
        .map(|&o| at(&carried, &new_id, o, last))
        .collect();
    Ok(PrefixNetwork::from_parts(
        net.width,
        net.topology,
        nodes,
        outputs,
    ))
}

//! Abstract delay and area models for prefix adders.
//!
//! All costs are dimensionless units. Delay is the longest weighted path
//! through the gate expansion of a network, computed here directly on the
//! prefix nodes (the gate-level simulator computes the same quantity on the
//! expanded netlist).

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netlist::{GateCounts, GateKind};
use crate::prefix::{
    build_network, max_fanout, network_depth, operator_counts, NodeKind, OperatorCounts,
    PrefixNetwork, TopologyKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub xor_delay: f64,
    pub and_delay: f64,
    pub or_delay: f64,
    pub buffer_delay: f64,
    /// Extra delay per consumer beyond the first, charged to the driver.
    pub fanout_penalty_alpha: f64,
}

impl Default for DelayModel {
    fn default() -> Self {
        DelayModel {
            xor_delay: 2.0,
            and_delay: 1.0,
            or_delay: 1.0,
            buffer_delay: 0.0,
            fanout_penalty_alpha: 0.0,
        }
    }
}

impl DelayModel {
    /// Every gate costs 1, no fanout penalty.
    pub fn unit() -> Self {
        DelayModel {
            xor_delay: 1.0,
            and_delay: 1.0,
            or_delay: 1.0,
            buffer_delay: 1.0,
            fanout_penalty_alpha: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.xor_delay,
            self.and_delay,
            self.or_delay,
            self.buffer_delay,
            self.fanout_penalty_alpha,
        ];
        if all.iter().all(|w| w.is_finite() && *w >= 0.0) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "delay weights must be finite and >= 0: {self:?}"
            )))
        }
    }

    pub fn base_delay(&self, kind: GateKind) -> f64 {
        match kind {
            GateKind::And => self.and_delay,
            GateKind::Or => self.or_delay,
            GateKind::Xor => self.xor_delay,
            GateKind::Buf => self.buffer_delay,
        }
    }

    /// Delay of one gate driving `fanout` consumers.
    pub fn gate_delay(&self, kind: GateKind, fanout: usize) -> f64 {
        self.base_delay(kind) + self.fanout_penalty_alpha * fanout.saturating_sub(1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaWeights {
    pub and: f64,
    pub or: f64,
    pub xor: f64,
    pub buf: f64,
}

impl Default for AreaWeights {
    fn default() -> Self {
        AreaWeights {
            and: 1.0,
            or: 1.0,
            xor: 2.0,
            buf: 0.5,
        }
    }
}

impl AreaWeights {
    pub fn zero() -> Self {
        AreaWeights {
            and: 0.0,
            or: 0.0,
            xor: 0.0,
            buf: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.and, self.or, self.xor, self.buf]
            .iter()
            .all(|w| w.is_finite() && *w >= 0.0)
        {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "area weights must be finite and >= 0: {self:?}"
            )))
        }
    }

    pub fn area(&self, counts: &GateCounts) -> f64 {
        self.and * counts.and as f64
            + self.or * counts.or as f64
            + self.xor * counts.xor as f64
            + self.buf * counts.buf as f64
    }
}

/// Gate census of the expansion, from the node census alone.
pub fn gate_census(net: &PrefixNetwork) -> GateCounts {
    let ops = operator_counts(net);
    let n = net.width();
    GateCounts {
        and: n + 2 * ops.black + ops.gray + n,
        or: ops.black + ops.gray + n,
        xor: 2 * n,
        buf: 2 * ops.buffer,
    }
}

pub fn estimate_area(net: &PrefixNetwork, weights: &AreaWeights) -> Result<f64> {
    weights.validate()?;
    Ok(weights.area(&gate_census(net)))
}

/// Longest weighted input-to-output path of the gate expansion.
pub fn estimate_delay(net: &PrefixNetwork, model: &DelayModel) -> Result<f64> {
    model.validate()?;
    let report = crate::prefix::validate_network(net);
    if !report.is_valid() {
        return Err(Error::InvalidNetwork(report.violations));
    }
    let order = net.topo_order()?;
    let nodes = net.nodes();
    let len = nodes.len();

    // Input pins on each node's g and p nets.
    let mut g_pins = vec![0usize; len];
    let mut p_pins = vec![0usize; len];
    for node in nodes {
        match node.kind {
            NodeKind::Leaf => p_pins[node.id] += 1, // sum XOR
            NodeKind::Black => {
                let (hi, lo) = (node.inputs[0], node.inputs[1]);
                g_pins[hi] += 1;
                p_pins[hi] += 2;
                g_pins[lo] += 1;
                p_pins[lo] += 1;
            }
            NodeKind::Gray => {
                let (hi, lo) = (node.inputs[0], node.inputs[1]);
                g_pins[hi] += 1;
                p_pins[hi] += 1;
                g_pins[lo] += 1;
            }
            NodeKind::Buffer => {
                g_pins[node.inputs[0]] += 1;
                p_pins[node.inputs[0]] += 1;
            }
        }
    }
    for &o in net.outputs() {
        g_pins[o] += 1;
        p_pins[o] += 1;
    }

    let d = |kind, fanout| model.gate_delay(kind, fanout);
    let mut g_at = vec![0.0f64; len];
    let mut p_at = vec![0.0f64; len];
    let mut leaf_p = vec![0.0f64; net.width()];
    for id in order {
        let node = &nodes[id];
        match node.kind {
            NodeKind::Leaf => {
                g_at[id] = d(GateKind::And, g_pins[id]);
                p_at[id] = d(GateKind::Xor, p_pins[id]);
                leaf_p[node.span.lo()] = p_at[id];
            }
            NodeKind::Black | NodeKind::Gray => {
                let (hi, lo) = (node.inputs[0], node.inputs[1]);
                let t = p_at[hi].max(g_at[lo]) + d(GateKind::And, 1);
                g_at[id] = g_at[hi].max(t) + d(GateKind::Or, g_pins[id]);
                if node.kind == NodeKind::Black {
                    p_at[id] = p_at[hi].max(p_at[lo]) + d(GateKind::And, p_pins[id]);
                }
            }
            NodeKind::Buffer => {
                let src = node.inputs[0];
                g_at[id] = g_at[src] + d(GateKind::Buf, g_pins[id]);
                p_at[id] = p_at[src] + d(GateKind::Buf, p_pins[id]);
            }
        }
    }

    // Carries c1..cn (cin arrives at 0), then sum bits.
    let mut carry_at = vec![0.0f64; net.width() + 1];
    for (i, &o) in net.outputs().iter().enumerate() {
        let t = p_at[o] + d(GateKind::And, 1);
        carry_at[i + 1] = g_at[o].max(t) + d(GateKind::Or, 1);
    }
    let worst_sum = (0..net.width())
        .map(|i| leaf_p[i].max(carry_at[i]) + d(GateKind::Xor, 1))
        .fold(0.0f64, f64::max);
    Ok(worst_sum.max(carry_at[net.width()]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub topology: TopologyKind,
    pub width: usize,
    pub depth_levels: usize,
    pub operator_counts: OperatorCounts,
    pub gate_counts: GateCounts,
    pub max_fanout: usize,
    pub weighted_delay: f64,
    pub area: f64,
}

pub fn cost_report(
    net: &PrefixNetwork,
    model: &DelayModel,
    weights: &AreaWeights,
) -> Result<CostReport> {
    Ok(CostReport {
        topology: net.topology(),
        width: net.width(),
        depth_levels: network_depth(net)?,
        operator_counts: operator_counts(net),
        gate_counts: gate_census(net),
        max_fanout: max_fanout(net)?,
        weighted_delay: estimate_delay(net, model)?,
        area: estimate_area(net, weights)?,
    })
}

/// Cost reports sorted by delay (ties broken by topology name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComparisonTable {
    pub rows: Vec<CostReport>,
}

impl ComparisonTable {
    /// Aligned text table: Sr. No., Adder Type, Delay, Bit Width, then the
    /// structural columns.
    pub fn to_text(&self) -> String {
        let header = [
            "Sr. No.",
            "Adder Type",
            "Delay",
            "Bit Width",
            "Area",
            "Depth",
            "Operators",
            "Max Fanout",
        ];
        let rows: Vec<[String; 8]> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                [
                    (i + 1).to_string(),
                    format!("{} ({})", r.topology.abbrev(), r.topology.name()),
                    format!("{:.3}", r.weighted_delay),
                    format!("{}-bit", r.width),
                    format!("{:.1}", r.area),
                    r.depth_levels.to_string(),
                    r.operator_counts.operators().to_string(),
                    r.max_fanout.to_string(),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = String::new();
        let line = |out: &mut String, cells: &[&str]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (c, &w))| {
                    // Text columns left-aligned, numbers right-aligned.
                    if k == 1 || k == 3 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            let _ = writeln!(out, "{}", parts.join("  ").trim_end());
        };
        line(&mut out, &header);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
        for row in &rows {
            let cells: Vec<&str> = row.iter().map(String::as_str).collect();
            line(&mut out, &cells);
        }
        out
    }
}

pub fn compare_topologies(
    width: usize,
    topologies: &[TopologyKind],
    model: &DelayModel,
    weights: &AreaWeights,
) -> Result<ComparisonTable> {
    if topologies.is_empty() {
        return Err(Error::invalid("no topologies to compare"));
    }
    let mut rows = topologies
        .iter()
        .map(|&t| cost_report(&build_network(t, width)?, model, weights))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.weighted_delay
            .total_cmp(&b.weighted_delay)
            .then_with(|| a.topology.name().cmp(b.topology.name()))
    });
    Ok(ComparisonTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::expand_to_gates;

    fn net(t: TopologyKind, w: usize) -> PrefixNetwork {
        build_network(t, w).unwrap()
    }

    #[test]
    fn single_bit_delay_is_two_xors() {
        let m = DelayModel::default();
        for t in TopologyKind::ALL {
            assert_eq!(estimate_delay(&net(t, 1), &m).unwrap(), m.xor_delay * 2.0);
        }
    }

    #[test]
    fn delay_orderings_at_32() {
        let m = DelayModel::default();
        let bk = estimate_delay(&net(TopologyKind::BrentKung, 32), &m).unwrap();
        let ks = estimate_delay(&net(TopologyKind::KoggeStone, 32), &m).unwrap();
        let rca = estimate_delay(&net(TopologyKind::RippleSerial, 32), &m).unwrap();
        assert!(ks <= bk, "{ks} {bk}");
        assert!(bk < rca, "{bk} {rca}");
    }

    #[test]
    fn area_cases() {
        let w = AreaWeights::default();
        let bk = estimate_area(&net(TopologyKind::BrentKung, 32), &w).unwrap();
        let ks = estimate_area(&net(TopologyKind::KoggeStone, 32), &w).unwrap();
        assert!(bk < ks);
        assert_eq!(bk, 395.0);
        assert_eq!(ks, 611.0);
        assert_eq!(
            estimate_area(&net(TopologyKind::BrentKung, 32), &AreaWeights::zero()).unwrap(),
            0.0
        );
    }

    #[test]
    fn ripple_area_is_linear() {
        let w = AreaWeights::default();
        // One black cell: two ANDs and an OR.
        let cell = 2.0 * w.and + w.or;
        for n in 1..=32 {
            let a1 = estimate_area(&net(TopologyKind::RippleSerial, n), &w).unwrap();
            let a2 = estimate_area(&net(TopologyKind::RippleSerial, 2 * n), &w).unwrap();
            assert!((a2 - 2.0 * a1).abs() <= cell, "n={n}: {a1} {a2}");
        }
    }

    #[test]
    fn census_matches_expansion() {
        for t in TopologyKind::ALL {
            for w in [1, 2, 5, 16, 32] {
                let n = net(t, w);
                assert_eq!(gate_census(&n), expand_to_gates(&n).unwrap().gate_counts());
            }
        }
    }

    #[test]
    fn comparison_ranks() {
        let m = DelayModel::default();
        let a = AreaWeights::default();
        let table = compare_topologies(32, &TopologyKind::ALL, &m, &a).unwrap();
        assert_eq!(table.rows.len(), 5);
        assert_eq!(
            table.rows.last().unwrap().topology,
            TopologyKind::RippleSerial
        );
        for pair in table.rows.windows(2) {
            assert!(pair[0].weighted_delay <= pair[1].weighted_delay);
        }

        let one = compare_topologies(32, &[TopologyKind::Sklansky], &m, &a).unwrap();
        assert_eq!(one.rows.len(), 1);

        let pair = compare_topologies(
            32,
            &[TopologyKind::BrentKung, TopologyKind::KoggeStone],
            &m,
            &a,
        )
        .unwrap();
        let get = |t| pair.rows.iter().find(|r| r.topology == t).unwrap();
        let (bk, ks) = (get(TopologyKind::BrentKung), get(TopologyKind::KoggeStone));
        assert!(bk.area < ks.area);
        assert!(ks.depth_levels < bk.depth_levels);
    }

    #[test]
    fn width_one_ties_break_by_name() {
        let table = compare_topologies(
            1,
            &TopologyKind::ALL,
            &DelayModel::default(),
            &AreaWeights::default(),
        )
        .unwrap();
        let names: Vec<_> = table.rows.iter().map(|r| r.topology.name()).collect();
        assert_eq!(
            names,
            vec![
                "brent-kung",
                "han-carlson",
                "kogge-stone",
                "ripple-serial",
                "sklansky"
            ]
        );
        assert!(table.rows.iter().all(|r| r.weighted_delay == 4.0));
    }

    #[test]
    fn text_table_layout() {
        let table = compare_topologies(
            32,
            &[TopologyKind::BrentKung, TopologyKind::RippleSerial],
            &DelayModel::default(),
            &AreaWeights::default(),
        )
        .unwrap();
        let text = table.to_text();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("Sr. No.  Adder Type"));
        assert!(lines[2].contains("BKA (brent-kung)"));
        assert!(lines[3].contains("RCA (ripple-serial)"));
        assert!(lines[2].contains("32-bit"));
    }

    #[test]
    fn negative_weights_rejected() {
        let m = DelayModel {
            and_delay: -1.0,
            ..DelayModel::default()
        };
        assert!(estimate_delay(&net(TopologyKind::BrentKung, 4), &m).is_err());
        let a = AreaWeights {
            xor: f64::NAN,
            ..AreaWeights::default()
        };
        assert!(estimate_area(&net(TopologyKind::BrentKung, 4), &a).is_err());
    }
}

//! Gate-level expansion of a prefix network.
//!
//! Every gate belongs to exactly one cell instance (pre-processing, black,
//! gray, white or post-processing). Flat emission prints the gates,
//! hierarchical emission prints the cells; both come from the same
//! per-cell templates.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefix::{NodeId, NodeKind, PrefixNetwork, PrefixNode, TopologyKind};

mod verilog;

pub use verilog::{emit_testbench, emit_verilog, is_valid_identifier, EmitOptions, EmitStyle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Xor,
    Buf,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Buf => 1,
            _ => 2,
        }
    }

    pub fn primitive(self) -> &'static str {
        match self {
            GateKind::And => "and",
            GateKind::Or => "or",
            GateKind::Xor => "xor",
            GateKind::Buf => "buf",
        }
    }

    pub fn apply(self, inputs: &[bool]) -> bool {
        match self {
            GateKind::And => inputs[0] & inputs[1],
            GateKind::Or => inputs[0] | inputs[1],
            GateKind::Xor => inputs[0] ^ inputs[1],
            GateKind::Buf => inputs[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub id: usize,
    pub kind: GateKind,
    pub inputs: Vec<String>,
    pub output: String,
    /// Index into [`GateNetlist::cells`].
    pub cell: usize,
}

impl Gate {
    /// Verilog instance name derived from the driven net.
    pub fn instance_name(&self) -> String {
        format!("u_{}", sanitize(&self.output))
    }
}

/// Cell modules of the adder hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Preprocessing,
    BlackCell,
    GrayCell,
    WhiteCell,
    Postprocessing,
}

/// One gate of a cell template: `(kind, output port, input ports)`.
/// `t` names the cell-internal wire.
type TemplateGate = (GateKind, &'static str, &'static [&'static str]);

impl CellKind {
    pub const ALL: [CellKind; 5] = [
        CellKind::Preprocessing,
        CellKind::BlackCell,
        CellKind::GrayCell,
        CellKind::WhiteCell,
        CellKind::Postprocessing,
    ];

    pub fn module_name(self) -> &'static str {
        match self {
            CellKind::Preprocessing => "preprocessing",
            CellKind::BlackCell => "black_cell",
            CellKind::GrayCell => "gray_cell",
            CellKind::WhiteCell => "white_cell",
            CellKind::Postprocessing => "postprocessing",
        }
    }

    pub fn input_ports(self) -> &'static [&'static str] {
        match self {
            CellKind::Preprocessing => &["a", "b"],
            CellKind::BlackCell => &["gik", "pik", "gkj", "pkj"],
            CellKind::GrayCell => &["gi", "pi", "gj"],
            CellKind::WhiteCell => &["a"],
            CellKind::Postprocessing => &["c", "p"],
        }
    }

    pub fn output_ports(self) -> &'static [&'static str] {
        match self {
            CellKind::Preprocessing => &["g", "p"],
            CellKind::BlackCell => &["gij", "pij"],
            CellKind::GrayCell => &["c"],
            CellKind::WhiteCell => &["y"],
            CellKind::Postprocessing => &["s"],
        }
    }

    pub fn template(self) -> &'static [TemplateGate] {
        match self {
            CellKind::Preprocessing => &[
                (GateKind::And, "g", &["a", "b"]),
                (GateKind::Xor, "p", &["a", "b"]),
            ],
            CellKind::BlackCell => &[
                (GateKind::And, "t", &["pik", "gkj"]),
                (GateKind::Or, "gij", &["gik", "t"]),
                (GateKind::And, "pij", &["pik", "pkj"]),
            ],
            CellKind::GrayCell => &[
                (GateKind::And, "t", &["pi", "gj"]),
                (GateKind::Or, "c", &["gi", "t"]),
            ],
            CellKind::WhiteCell => &[(GateKind::Buf, "y", &["a"])],
            CellKind::Postprocessing => &[(GateKind::Xor, "s", &["c", "p"])],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: CellKind,
    pub instance: String,
    /// Nets bound to [`CellKind::input_ports`], in order.
    pub inputs: Vec<String>,
    /// Nets bound to [`CellKind::output_ports`], in order.
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GateCounts {
    pub and: usize,
    pub or: usize,
    pub xor: usize,
    pub buf: usize,
}

impl GateCounts {
    pub fn total(&self) -> usize {
        self.and + self.or + self.xor + self.buf
    }

    pub fn get(&self, kind: GateKind) -> usize {
        match kind {
            GateKind::And => self.and,
            GateKind::Or => self.or,
            GateKind::Xor => self.xor,
            GateKind::Buf => self.buf,
        }
    }
}

pub fn port_a(i: usize) -> String {
    format!("a[{i}]")
}

pub fn port_b(i: usize) -> String {
    format!("b[{i}]")
}

pub fn port_sum(i: usize) -> String {
    format!("sum[{i}]")
}

pub const PORT_CIN: &str = "cin";
pub const PORT_COUT: &str = "cout";

fn sanitize(net: &str) -> String {
    net.chars()
        .filter(|&c| c != ']')
        .map(|c| if c == '[' { '_' } else { c })
        .collect()
}

/// Flattened gate graph of an adder with ports `a[w]`, `b[w]`, `cin`,
/// `sum[w]`, `cout`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateNetlist {
    pub name: String,
    pub width: usize,
    pub topology: Option<TopologyKind>,
    pub gates: Vec<Gate>,
    pub cells: Vec<Cell>,
    pub nets: BTreeSet<String>,
}

impl GateNetlist {
    pub fn input_ports(&self) -> Vec<String> {
        let mut ports: Vec<String> = (0..self.width).map(port_a).collect();
        ports.extend((0..self.width).map(port_b));
        ports.push(PORT_CIN.to_string());
        ports
    }

    /// `sum[0..w]` then `cout`.
    pub fn output_ports(&self) -> Vec<String> {
        let mut ports: Vec<String> = (0..self.width).map(port_sum).collect();
        ports.push(PORT_COUT.to_string());
        ports
    }

    pub fn is_port(&self, net: &str) -> bool {
        net == PORT_CIN
            || net == PORT_COUT
            || ["a[", "b[", "sum["].iter().any(|p| net.starts_with(p))
    }

    pub fn gate_counts(&self) -> GateCounts {
        let mut c = GateCounts::default();
        for g in &self.gates {
            match g.kind {
                GateKind::And => c.and += 1,
                GateKind::Or => c.or += 1,
                GateKind::Xor => c.xor += 1,
                GateKind::Buf => c.buf += 1,
            }
        }
        c
    }

    pub fn has_cell(&self, kind: CellKind) -> bool {
        self.cells.iter().any(|c| c.kind == kind)
    }

    /// Gate indices in dependency order. Checks the single-driver rule,
    /// that every input is driven, that every output port is driven, and
    /// acyclicity.
    pub fn check(&self) -> Result<Vec<usize>> {
        let inputs: BTreeSet<String> = self.input_ports().into_iter().collect();
        let mut driver: HashMap<&str, usize> = HashMap::new();
        for (idx, g) in self.gates.iter().enumerate() {
            if g.inputs.len() != g.kind.arity() {
                return Err(Error::Structural(format!(
                    "gate {} ({}) has {} inputs",
                    g.id,
                    g.kind.primitive(),
                    g.inputs.len()
                )));
            }
            if inputs.contains(&g.output) {
                return Err(Error::Structural(format!(
                    "gate {} drives input port {}",
                    g.id, g.output
                )));
            }
            if driver.insert(&g.output, idx).is_some() {
                return Err(Error::Structural(format!(
                    "net {} has more than one driver",
                    g.output
                )));
            }
        }
        for g in &self.gates {
            for i in &g.inputs {
                if !inputs.contains(i) && !driver.contains_key(i.as_str()) {
                    return Err(Error::Structural(format!(
                        "gate {} reads undriven net {i}",
                        g.id
                    )));
                }
            }
        }
        for port in self.output_ports() {
            if !driver.contains_key(port.as_str()) {
                return Err(Error::Structural(format!("output port {port} is undriven")));
            }
        }

        let mut indegree = vec![0usize; self.gates.len()];
        let mut fanout: Vec<Vec<usize>> = vec![Vec::new(); self.gates.len()];
        for (idx, g) in self.gates.iter().enumerate() {
            for i in &g.inputs {
                if let Some(&d) = driver.get(i.as_str()) {
                    fanout[d].push(idx);
                    indegree[idx] += 1;
                }
            }
        }
        let mut ready: Vec<usize> = (0..self.gates.len())
            .filter(|&i| indegree[i] == 0)
            .rev()
            .collect();
        let mut order = Vec::with_capacity(self.gates.len());
        while let Some(idx) = ready.pop() {
            order.push(idx);
            for &next in fanout[idx].iter().rev() {
                indegree[next] -= 1;
                if indegree[next] == 0 {
                    ready.push(next);
                }
            }
        }
        if order.len() != self.gates.len() {
            return Err(Error::Structural("combinational cycle in netlist".into()));
        }
        Ok(order)
    }
}

struct Expander {
    gates: Vec<Gate>,
    cells: Vec<Cell>,
    nets: BTreeSet<String>,
}

impl Expander {
    /// Instantiates `kind`'s template with the given port bindings.
    fn cell(
        &mut self,
        kind: CellKind,
        instance: String,
        ins: Vec<String>,
        outs: Vec<String>,
        internal: &str,
    ) {
        let cell = self.cells.len();
        let bind: HashMap<&str, &str> = kind
            .input_ports()
            .iter()
            .copied()
            .zip(ins.iter().map(String::as_str))
            .chain(
                kind.output_ports()
                    .iter()
                    .copied()
                    .zip(outs.iter().map(String::as_str)),
            )
            .chain(std::iter::once(("t", internal)))
            .collect();
        for &(gk, out, gate_ins) in kind.template() {
            let output = bind[out].to_string();
            let inputs: Vec<String> = gate_ins.iter().map(|p| bind[p].to_string()).collect();
            self.nets.extend(inputs.iter().cloned());
            self.nets.insert(output.clone());
            self.gates.push(Gate {
                id: self.gates.len(),
                kind: gk,
                inputs,
                output,
                cell,
            });
        }
        self.cells.push(Cell {
            kind,
            instance,
            inputs: ins,
            outputs: outs,
        });
    }
}

fn node_tag(node: &PrefixNode) -> String {
    format!("{}_{}_{}", node.level, node.span.hi(), node.span.lo())
}

fn g_net(node: &PrefixNode) -> String {
    format!("g_{}", node_tag(node))
}

fn p_net(node: &PrefixNode) -> String {
    format!("p_{}", node_tag(node))
}

/// Expands `net` into gates: per bit one AND + one XOR (pre-processing),
/// per black node two AND + one OR, per gray node one AND + one OR, per
/// buffer one BUF for each of g and p, per carry one AND + one OR (gray
/// cell with `cin` as the lower generate), and one XOR per sum bit.
pub fn expand_to_gates(net: &PrefixNetwork) -> Result<GateNetlist> {
    let report = crate::prefix::validate_network(net);
    if !report.is_valid() {
        return Err(Error::InvalidNetwork(report.violations));
    }
    let order: Vec<NodeId> = net.topo_order()?;
    let width = net.width();
    let mut x = Expander {
        gates: Vec::new(),
        cells: Vec::new(),
        nets: BTreeSet::new(),
    };
    let node = |id: NodeId| net.node(id);

    let leaves: BTreeMap<usize, &PrefixNode> = net
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::Leaf)
        .map(|n| (n.span.lo(), n))
        .collect();
    for (&bit, leaf) in &leaves {
        x.cell(
            CellKind::Preprocessing,
            format!("pre{bit}"),
            vec![port_a(bit), port_b(bit)],
            vec![g_net(leaf), p_net(leaf)],
            "",
        );
    }

    for id in order {
        let n = node(id);
        let tag = node_tag(n);
        match n.kind {
            NodeKind::Leaf => {}
            NodeKind::Black => {
                let (hi, lo) = (node(n.inputs[0]), node(n.inputs[1]));
                x.cell(
                    CellKind::BlackCell,
                    format!("bc_{tag}"),
                    vec![g_net(hi), p_net(hi), g_net(lo), p_net(lo)],
                    vec![g_net(n), p_net(n)],
                    &format!("t_{tag}"),
                );
            }
            NodeKind::Gray => {
                let (hi, lo) = (node(n.inputs[0]), node(n.inputs[1]));
                x.cell(
                    CellKind::GrayCell,
                    format!("gc_{tag}"),
                    vec![g_net(hi), p_net(hi), g_net(lo)],
                    vec![g_net(n)],
                    &format!("t_{tag}"),
                );
            }
            NodeKind::Buffer => {
                let src = node(n.inputs[0]);
                x.cell(
                    CellKind::WhiteCell,
                    format!("wc_g_{tag}"),
                    vec![g_net(src)],
                    vec![g_net(n)],
                    "",
                );
                x.cell(
                    CellKind::WhiteCell,
                    format!("wc_p_{tag}"),
                    vec![p_net(src)],
                    vec![p_net(n)],
                    "",
                );
            }
        }
    }

    let carry = |i: usize| {
        if i == 0 {
            PORT_CIN.to_string()
        } else if i == width {
            PORT_COUT.to_string()
        } else {
            format!("c{i}")
        }
    };
    for (i, &out) in net.outputs().iter().enumerate() {
        let o = node(out);
        x.cell(
            CellKind::GrayCell,
            format!("gc_c{}", i + 1),
            vec![g_net(o), p_net(o), PORT_CIN.to_string()],
            vec![carry(i + 1)],
            &format!("ct{}", i + 1),
        );
    }
    for (&bit, leaf) in &leaves {
        x.cell(
            CellKind::Postprocessing,
            format!("pp{bit}"),
            vec![carry(bit), p_net(leaf)],
            vec![port_sum(bit)],
            "",
        );
    }

    let netlist = GateNetlist {
        name: format!("{}_{}", net.topology().name().replace('-', "_"), width),
        width,
        topology: Some(net.topology()),
        gates: x.gates,
        cells: x.cells,
        nets: x.nets,
    };
    netlist.check()?;
    Ok(netlist)
}

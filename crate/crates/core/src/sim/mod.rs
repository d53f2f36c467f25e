//! Zero-delay logic simulation of gate netlists, static timing, and
//! switching activity.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cost::DelayModel;
use crate::error::{Error, Result};
use crate::eval::{AddVector, MAX_INT_WIDTH};
use crate::netlist::{port_a, port_b, port_sum, GateKind, GateNetlist, PORT_CIN, PORT_COUT};

mod vcd;

pub use vcd::{trace_schedule, write_vcd, SimTrace, TraceSignal};

/// Compiled form of a netlist: nets are dense indices, gates are in
/// dependency order.
#[derive(Debug, Clone)]
pub struct Simulator {
    width: usize,
    names: Vec<String>,
    index: HashMap<String, usize>,
    /// (kind, inputs, output, gate index in the netlist)
    schedule: Vec<(GateKind, Vec<usize>, usize, usize)>,
    a: Vec<usize>,
    b: Vec<usize>,
    cin: usize,
    sum: Vec<usize>,
    cout: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    pub sum: u128,
    pub cout: bool,
    /// Value of every net, indexed like [`Simulator::net_names`].
    pub values: Vec<bool>,
}

impl Simulator {
    pub fn new(netlist: &GateNetlist) -> Result<Self> {
        if netlist.width == 0 || netlist.width > MAX_INT_WIDTH {
            return Err(Error::invalid(format!(
                "simulation supports widths 1..={MAX_INT_WIDTH}, got {}",
                netlist.width
            )));
        }
        let order = netlist.check()?;
        let mut names: Vec<String> = netlist.nets.iter().cloned().collect();
        for port in netlist
            .input_ports()
            .into_iter()
            .chain(netlist.output_ports())
        {
            if !netlist.nets.contains(&port) {
                names.push(port);
            }
        }
        names.sort();
        let index: HashMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let schedule = order
            .into_iter()
            .map(|g| {
                let gate = &netlist.gates[g];
                (
                    gate.kind,
                    gate.inputs.iter().map(|i| index[i]).collect(),
                    index[&gate.output],
                    g,
                )
            })
            .collect();
        let w = netlist.width;
        Ok(Simulator {
            width: w,
            a: (0..w).map(|i| index[&port_a(i)]).collect(),
            b: (0..w).map(|i| index[&port_b(i)]).collect(),
            cin: index[PORT_CIN],
            sum: (0..w).map(|i| index[&port_sum(i)]).collect(),
            cout: index[PORT_COUT],
            names,
            index,
            schedule,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// All net names, sorted.
    pub fn net_names(&self) -> &[String] {
        &self.names
    }

    pub fn net_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn run(&self, a: u128, b: u128, cin: bool) -> Result<SimResult> {
        let limit = 1u128 << self.width;
        if a >= limit || b >= limit {
            return Err(Error::invalid(format!(
                "operands {a}, {b} do not fit in {} bits",
                self.width
            )));
        }
        let mut v = vec![false; self.names.len()];
        for i in 0..self.width {
            v[self.a[i]] = (a >> i) & 1 == 1;
            v[self.b[i]] = (b >> i) & 1 == 1;
        }
        v[self.cin] = cin;
        let mut ins = [false; 2];
        for (kind, inputs, out, _) in &self.schedule {
            for (slot, &i) in ins.iter_mut().zip(inputs) {
                *slot = v[i];
            }
            v[*out] = kind.apply(&ins[..inputs.len()]);
        }
        let sum = self
            .sum
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, &n)| acc | (u128::from(v[n]) << i));
        Ok(SimResult {
            sum,
            cout: v[self.cout],
            values: v,
        })
    }
}

/// One-shot simulation. Returns the sum, carry-out and every net's value.
pub fn simulate(
    netlist: &GateNetlist,
    a: u128,
    b: u128,
    cin: bool,
) -> Result<(u128, bool, BTreeMap<String, bool>)> {
    let sim = Simulator::new(netlist)?;
    let r = sim.run(a, b, cin)?;
    let values = sim
        .names
        .iter()
        .cloned()
        .zip(r.values.iter().copied())
        .collect();
    Ok((r.sum, r.cout, values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathReport {
    /// Input port where the path starts.
    pub start: String,
    /// Output port where it ends.
    pub end: String,
    /// Instance names of the gates along the path, input to output.
    pub gates: Vec<String>,
    /// Nets along the path, `start` through `end`.
    pub nets: Vec<String>,
    pub delay: f64,
}

/// Number of gate input pins on each net, plus one for an output port.
fn net_fanout(netlist: &GateNetlist) -> HashMap<&str, usize> {
    let mut fanout: HashMap<&str, usize> = HashMap::new();
    for g in &netlist.gates {
        for i in &g.inputs {
            *fanout.entry(i.as_str()).or_default() += 1;
        }
    }
    for g in &netlist.gates {
        if netlist.is_port(&g.output) {
            *fanout.entry(g.output.as_str()).or_default() += 1;
        }
    }
    fanout
}

/// Static timing over the gate graph. Inputs arrive at 0; each gate adds
/// its base delay plus the fanout penalty of the net it drives. Ties pick
/// the earliest output port and, walking back, the first gate input.
pub fn critical_path(netlist: &GateNetlist, model: &DelayModel) -> Result<PathReport> {
    model.validate()?;
    let order = netlist.check()?;
    let fanout = net_fanout(netlist);
    let mut arrival: HashMap<&str, f64> = HashMap::new();
    let mut driver: HashMap<&str, usize> = HashMap::new();
    for g in order {
        let gate = &netlist.gates[g];
        let latest = gate
            .inputs
            .iter()
            .map(|i| arrival.get(i.as_str()).copied().unwrap_or(0.0))
            .fold(0.0f64, f64::max);
        let load = fanout.get(gate.output.as_str()).copied().unwrap_or(0);
        arrival.insert(&gate.output, latest + model.gate_delay(gate.kind, load));
        driver.insert(&gate.output, g);
    }

    let ports = netlist.output_ports();
    let mut end = &ports[0];
    for p in &ports {
        if arrival[p.as_str()] > arrival[end.as_str()] {
            end = p;
        }
    }
    let delay = arrival[end.as_str()];

    let mut gates = Vec::new();
    let mut nets = vec![end.clone()];
    let mut cur = end.as_str();
    while let Some(&g) = driver.get(cur) {
        let gate = &netlist.gates[g];
        gates.push(gate.instance_name());
        let at = |n: &str| arrival.get(n).copied().unwrap_or(0.0);
        let mut pick = gate.inputs[0].as_str();
        for i in &gate.inputs {
            if at(i) > at(pick) {
                pick = i;
            }
        }
        nets.push(pick.to_string());
        cur = pick;
    }
    gates.reverse();
    nets.reverse();
    Ok(PathReport {
        start: cur.to_string(),
        end: end.clone(),
        gates,
        nets,
        delay,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToggleReport {
    pub vectors: usize,
    /// Output transitions per gate instance.
    pub per_gate: BTreeMap<String, u64>,
    pub total: u64,
}

/// Counts gate output transitions while applying `vectors` in order.
pub fn toggle_count(netlist: &GateNetlist, vectors: &[AddVector]) -> Result<ToggleReport> {
    if vectors.len() < 2 {
        return Err(Error::invalid("toggle counting needs at least 2 vectors"));
    }
    let sim = Simulator::new(netlist)?;
    let mut counts = vec![0u64; netlist.gates.len()];
    let mut prev = sim.run(vectors[0].a, vectors[0].b, vectors[0].cin)?.values;
    for v in &vectors[1..] {
        let cur = sim.run(v.a, v.b, v.cin)?.values;
        for (_, _, out, g) in &sim.schedule {
            if prev[*out] != cur[*out] {
                counts[*g] += 1;
            }
        }
        prev = cur;
    }
    let per_gate: BTreeMap<String, u64> = netlist
        .gates
        .iter()
        .zip(&counts)
        .map(|(g, &c)| (g.instance_name(), c))
        .collect();
    Ok(ToggleReport {
        vectors: vectors.len(),
        total: counts.iter().sum(),
        per_gate,
    })
}

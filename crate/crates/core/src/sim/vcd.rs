use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::Simulator;
use crate::error::{Error, Result};
use crate::eval::AddVector;
use crate::netlist::{GateNetlist, PORT_CIN, PORT_COUT};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSignal {
    pub name: String,
    /// 1 for scalars; the adder width for the `a`, `b` and `sum` buses.
    pub width: usize,
    pub code: String,
}

/// Signal values over time, ready to be written as VCD.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimTrace {
    pub module: String,
    pub signals: Vec<TraceSignal>,
    /// `(time_ns, [(signal index, value)])`; the first entry holds every
    /// signal, later entries only the ones that changed.
    pub changes: Vec<(u64, Vec<(usize, u128)>)>,
}

/// Printable identifier for the `n`-th signal, base 94 over `!`..=`~`.
fn id_code(mut n: usize) -> String {
    let mut code = String::new();
    loop {
        code.push((b'!' + (n % 94) as u8) as char);
        n /= 94;
        if n == 0 {
            break;
        }
        n -= 1;
    }
    code
}

/// Applies each vector at its time (ns) and records the settled values of
/// the ports and every internal net.
pub fn trace_schedule(netlist: &GateNetlist, schedule: &[(u64, AddVector)]) -> Result<SimTrace> {
    if schedule.is_empty() {
        return Err(Error::invalid("trace needs at least one vector"));
    }
    if schedule.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::invalid("trace times must be strictly increasing"));
    }
    let sim = Simulator::new(netlist)?;
    let w = netlist.width;

    // Buses and port scalars, then internal nets; all sorted by name.
    let mut names: Vec<(String, usize)> = vec![
        ("a".into(), w),
        ("b".into(), w),
        (PORT_CIN.into(), 1),
        (PORT_COUT.into(), 1),
        ("sum".into(), w),
    ];
    let internal: Vec<&String> = sim
        .net_names()
        .iter()
        .filter(|n| !netlist.is_port(n))
        .collect();
    names.extend(internal.iter().map(|n| ((*n).clone(), 1)));
    names.sort();
    let signals: Vec<TraceSignal> = names
        .into_iter()
        .enumerate()
        .map(|(i, (name, width))| TraceSignal {
            name,
            width,
            code: id_code(i),
        })
        .collect();

    let mut changes = Vec::new();
    let mut prev: Option<Vec<u128>> = None;
    for &(time, v) in schedule {
        let r = sim.run(v.a, v.b, v.cin)?;
        let values: Vec<u128> = signals
            .iter()
            .map(|s| match s.name.as_str() {
                "a" => v.a,
                "b" => v.b,
                "sum" => r.sum,
                n => u128::from(r.values[sim.net_index(n).expect("known net")]),
            })
            .collect();
        let delta: Vec<(usize, u128)> = match &prev {
            None => values.iter().copied().enumerate().collect(),
            Some(p) => values
                .iter()
                .zip(p)
                .enumerate()
                .filter(|(_, (x, y))| x != y)
                .map(|(i, (x, _))| (i, *x))
                .collect(),
        };
        if prev.is_none() || !delta.is_empty() {
            changes.push((time, delta));
        }
        prev = Some(values);
    }
    Ok(SimTrace {
        module: netlist.name.clone(),
        signals,
        changes,
    })
}

fn write_value(out: &mut impl Write, s: &TraceSignal, value: u128) -> io::Result<()> {
    if s.width == 1 {
        writeln!(out, "{}{}", value & 1, s.code)
    } else {
        writeln!(out, "b{value:b} {}", s.code)
    }
}

pub fn write_vcd(trace: &SimTrace, out: &mut impl Write) -> io::Result<()> {
    writeln!(
        out,
        "$version {} {} $end",
        crate::TOOL_NAME,
        crate::TOOL_VERSION
    )?;
    writeln!(out, "$timescale 1ns $end")?;
    writeln!(out, "$scope module {} $end", trace.module)?;
    for s in &trace.signals {
        if s.width == 1 {
            writeln!(out, "$var wire 1 {} {} $end", s.code, s.name)?;
        } else {
            writeln!(
                out,
                "$var wire {} {} {} [{}:0] $end",
                s.width,
                s.code,
                s.name,
                s.width - 1
            )?;
        }
    }
    writeln!(out, "$upscope $end")?;
    writeln!(out, "$enddefinitions $end")?;
    for (k, (time, delta)) in trace.changes.iter().enumerate() {
        writeln!(out, "#{time}")?;
        if k == 0 {
            writeln!(out, "$dumpvars")?;
        }
        for &(i, value) in delta {
            write_value(out, &trace.signals[i], value)?;
        }
        if k == 0 {
            writeln!(out, "$end")?;
        }
    }
    Ok(())
}

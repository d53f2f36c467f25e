use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{CellKind, GateNetlist};
use crate::error::{Error, Result};
use crate::eval::TestVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmitStyle {
    /// One module of gate primitives.
    #[default]
    Flat,
    /// Cell modules (preprocessing, black_cell, ...) instantiated by a top
    /// module.
    Hierarchical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitOptions {
    pub style: EmitStyle,
    pub module_name: String,
    pub indent: usize,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            style: EmitStyle::Flat,
            module_name: "adder".to_string(),
            indent: 2,
        }
    }
}

const KEYWORDS: &[&str] = &[
    "always",
    "and",
    "assign",
    "begin",
    "buf",
    "case",
    "default",
    "else",
    "end",
    "endcase",
    "endfunction",
    "endmodule",
    "endtask",
    "for",
    "function",
    "if",
    "initial",
    "inout",
    "input",
    "integer",
    "module",
    "nand",
    "nor",
    "not",
    "or",
    "output",
    "parameter",
    "reg",
    "task",
    "wire",
    "xnor",
    "xor",
];

/// Plain Verilog identifier: letter or underscore, then letters, digits,
/// `_` or `$`; not a reserved word.
pub fn is_valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else {
        return false;
    };
    (first.is_ascii_alphabetic() || first == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
        && !KEYWORDS.contains(&name)
}

fn check_module_name(opts: &EmitOptions) -> Result<()> {
    if !is_valid_identifier(&opts.module_name) {
        return Err(Error::invalid(format!(
            "'{}' is not a valid Verilog module name",
            opts.module_name
        )));
    }
    if opts.style == EmitStyle::Hierarchical
        && CellKind::ALL
            .iter()
            .any(|c| c.module_name() == opts.module_name)
    {
        return Err(Error::invalid(format!(
            "module name '{}' collides with a cell module",
            opts.module_name
        )));
    }
    Ok(())
}

fn range(width: usize) -> String {
    format!("[{}:0]", width - 1)
}

fn port_header(out: &mut String, name: &str, width: usize, ind: &str) {
    let r = range(width);
    let pad = " ".repeat(r.len());
    let _ = writeln!(out, "module {name} (");
    let _ = writeln!(out, "{ind}input  {r} a,");
    let _ = writeln!(out, "{ind}input  {r} b,");
    let _ = writeln!(out, "{ind}input  {pad} cin,");
    let _ = writeln!(out, "{ind}output {r} sum,");
    let _ = writeln!(out, "{ind}output {pad} cout");
    let _ = writeln!(out, ");");
}

/// Internal nets in first-driven order.
fn internal_wires(netlist: &GateNetlist) -> Vec<&str> {
    netlist
        .gates
        .iter()
        .map(|g| g.output.as_str())
        .filter(|n| !netlist.is_port(n))
        .collect()
}

/// Structural Verilog-2001 for `netlist`. Output is byte-deterministic.
pub fn emit_verilog(netlist: &GateNetlist, opts: &EmitOptions) -> Result<String> {
    check_module_name(opts)?;
    netlist.check()?;
    let ind = " ".repeat(opts.indent);
    let mut out = String::new();
    let what = netlist
        .topology
        .map_or_else(|| "custom".to_string(), |t| t.name().to_string());
    let _ = writeln!(
        out,
        "// {}-bit {} adder, {} structural netlist.",
        netlist.width,
        what,
        match opts.style {
            EmitStyle::Flat => "flat",
            EmitStyle::Hierarchical => "hierarchical",
        }
    );
    let _ = writeln!(out, "// Generated by {}; do not edit.", crate::TOOL_NAME);
    // Matches the testbench so strict tools accept the pair.
    let _ = writeln!(out, "`timescale 1ns/1ps");
    out.push('\n');

    match opts.style {
        EmitStyle::Flat => emit_flat(&mut out, netlist, &opts.module_name, &ind),
        EmitStyle::Hierarchical => emit_hierarchical(&mut out, netlist, &opts.module_name, &ind),
    }
    Ok(out)
}

fn emit_flat(out: &mut String, netlist: &GateNetlist, name: &str, ind: &str) {
    port_header(out, name, netlist.width, ind);
    out.push('\n');
    let wires = internal_wires(netlist);
    for w in &wires {
        let _ = writeln!(out, "{ind}wire {w};");
    }
    if !wires.is_empty() {
        out.push('\n');
    }
    for g in &netlist.gates {
        let _ = writeln!(
            out,
            "{ind}{:<3} {} ({}, {});",
            g.kind.primitive(),
            g.instance_name(),
            g.output,
            g.inputs.join(", ")
        );
    }
    let _ = writeln!(out, "endmodule");
}

fn emit_cell_module(out: &mut String, kind: CellKind, ind: &str) {
    let _ = writeln!(out, "module {} (", kind.module_name());
    let ports: Vec<String> = kind
        .input_ports()
        .iter()
        .map(|p| format!("{ind}input  {p}"))
        .chain(
            kind.output_ports()
                .iter()
                .map(|p| format!("{ind}output {p}")),
        )
        .collect();
    let _ = writeln!(out, "{}", ports.join(",\n"));
    let _ = writeln!(out, ");");
    if kind.template().iter().any(|(_, o, _)| *o == "t") {
        let _ = writeln!(out, "{ind}wire t;");
    }
    for (gk, o, ins) in kind.template() {
        let _ = writeln!(
            out,
            "{ind}{:<3} u_{o} ({o}, {});",
            gk.primitive(),
            ins.join(", ")
        );
    }
    let _ = writeln!(out, "endmodule");
    out.push('\n');
}

fn emit_hierarchical(out: &mut String, netlist: &GateNetlist, name: &str, ind: &str) {
    for kind in CellKind::ALL {
        if kind == CellKind::WhiteCell && !netlist.has_cell(kind) {
            continue;
        }
        emit_cell_module(out, kind, ind);
    }
    port_header(out, name, netlist.width, ind);
    out.push('\n');
    let wires: Vec<&str> = netlist
        .cells
        .iter()
        .flat_map(|c| c.outputs.iter().map(String::as_str))
        .filter(|n| !netlist.is_port(n))
        .collect();
    for w in &wires {
        let _ = writeln!(out, "{ind}wire {w};");
    }
    if !wires.is_empty() {
        out.push('\n');
    }
    for cell in &netlist.cells {
        let binds: Vec<String> = cell
            .kind
            .input_ports()
            .iter()
            .zip(&cell.inputs)
            .chain(cell.kind.output_ports().iter().zip(&cell.outputs))
            .map(|(port, net)| format!(".{port}({net})"))
            .collect();
        let _ = writeln!(
            out,
            "{ind}{} {} ({});",
            cell.kind.module_name(),
            cell.instance,
            binds.join(", ")
        );
    }
    let _ = writeln!(out, "endmodule");
}

/// Self-checking testbench for module `dut` applying `vectors` at their
/// time labels. Each vector is checked 1 ns after it is applied, so labels
/// must increase by at least 2 ns.
pub fn emit_testbench(width: usize, vectors: &[TestVector], dut: &str) -> Result<String> {
    if vectors.is_empty() {
        return Err(Error::invalid("testbench needs at least one vector"));
    }
    if width == 0 || width > crate::eval::MAX_INT_WIDTH {
        return Err(Error::invalid(format!(
            "unsupported testbench width {width}"
        )));
    }
    if !is_valid_identifier(dut) {
        return Err(Error::invalid(format!(
            "'{dut}' is not a valid Verilog module name"
        )));
    }
    let limit = 1u128 << width;
    for (k, v) in vectors.iter().enumerate() {
        if v.a >= limit || v.b >= limit || v.expected_sum >= limit {
            return Err(Error::invalid(format!(
                "vector {} does not fit in {width} bits",
                k + 1
            )));
        }
    }
    for pair in vectors.windows(2) {
        if pair[1].time_label_ns < pair[0].time_label_ns + 2 {
            return Err(Error::invalid(format!(
                "time labels must increase by at least 2 ns ({} -> {})",
                pair[0].time_label_ns, pair[1].time_label_ns
            )));
        }
    }

    let n = vectors.len();
    let r = range(width);
    let pad = " ".repeat(r.len());
    let lit = |v: u128| format!("{width}'d{v}");
    let bit = |b: bool| format!("1'b{}", u8::from(b));
    let mut out = String::new();
    let _ = writeln!(out, "`timescale 1ns/1ps");
    let _ = writeln!(out, "// Self-checking testbench for {dut}: {n} vectors.");
    let _ = writeln!(out, "// Generated by {}; do not edit.", crate::TOOL_NAME);
    out.push('\n');
    let _ = writeln!(out, "module tb_{dut};");
    let _ = writeln!(out, "  reg  {r} a;");
    let _ = writeln!(out, "  reg  {r} b;");
    let _ = writeln!(out, "  reg  {pad} cin;");
    let _ = writeln!(out, "  wire {r} sum;");
    let _ = writeln!(out, "  wire {pad} cout;");
    let _ = writeln!(out, "  integer failures;");
    out.push('\n');
    let _ = writeln!(
        out,
        "  {dut} dut (.a(a), .b(b), .cin(cin), .sum(sum), .cout(cout));"
    );
    out.push('\n');
    let _ = writeln!(out, "  task check;");
    let _ = writeln!(out, "    input integer index;");
    let _ = writeln!(out, "    input {r} exp_sum;");
    let _ = writeln!(out, "    input exp_cout;");
    let _ = writeln!(out, "    begin");
    let _ = writeln!(out, "      if (sum === exp_sum && cout === exp_cout)");
    let _ = writeln!(out, "        $display(\"PASS test %0d\", index);");
    let _ = writeln!(out, "      else begin");
    let _ = writeln!(
        out,
        "        $display(\"FAIL test %0d: sum=%0d cout=%b, expected sum=%0d cout=%b\", index, sum, cout, exp_sum, exp_cout);"
    );
    let _ = writeln!(out, "        failures = failures + 1;");
    let _ = writeln!(out, "      end");
    let _ = writeln!(out, "    end");
    let _ = writeln!(out, "  endtask");
    out.push('\n');
    let _ = writeln!(out, "  initial begin");
    let _ = writeln!(
        out,
        "    $monitor(\"time=%0t a=%0d b=%0d cin=%b sum=%0d cout=%b\", $time, a, b, cin, sum, cout);"
    );
    let _ = writeln!(out, "  end");
    out.push('\n');
    let _ = writeln!(out, "  initial begin");
    let _ = writeln!(out, "    failures = 0;");
    let mut now = 0u64;
    for (k, v) in vectors.iter().enumerate() {
        let wait = v.time_label_ns - now;
        let _ = writeln!(out, "    // test {} at {} ns", k + 1, v.time_label_ns);
        let prefix = if wait > 0 {
            format!("#{wait} ")
        } else {
            String::new()
        };
        let _ = writeln!(
            out,
            "    {prefix}a = {}; b = {}; cin = {};",
            lit(v.a),
            lit(v.b),
            bit(v.cin)
        );
        let _ = writeln!(
            out,
            "    #1 check({}, {}, {});",
            k + 1,
            lit(v.expected_sum),
            bit(v.expected_cout)
        );
        now = v.time_label_ns + 1;
    }
    let _ = writeln!(out, "    $display(\"%0d/%0d PASS\", {n} - failures, {n});");
    let _ = writeln!(out, "    $finish;");
    let _ = writeln!(out, "  end");
    let _ = writeln!(out, "endmodule");
    Ok(out)
}

//! Test-only readers for the emitted VCD and Verilog text. They accept the
//! subset this crate writes and fail loudly on anything else.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VcdVar {
    pub code: String,
    pub name: String,
    pub width: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vcd {
    pub timescale: String,
    pub scope: String,
    pub vars: Vec<VcdVar>,
    /// `(time, [(signal name, value)])` in file order.
    pub changes: Vec<(u64, Vec<(String, u128)>)>,
}

pub fn read_vcd(text: &str) -> Result<Vcd, String> {
    let mut tokens = text.split_whitespace().peekable();
    let mut vcd = Vcd {
        timescale: String::new(),
        scope: String::new(),
        vars: Vec::new(),
        changes: Vec::new(),
    };
    let until_end = |tokens: &mut std::iter::Peekable<std::str::SplitWhitespace>| {
        let mut body = Vec::new();
        for t in tokens.by_ref() {
            if t == "$end" {
                return Ok(body);
            }
            body.push(t.to_string());
        }
        Err("unterminated section".to_string())
    };
    // Header.
    loop {
        let t = tokens.next().ok_or("missing $enddefinitions")?;
        match t {
            "$version" | "$date" | "$comment" | "$upscope" => {
                until_end(&mut tokens)?;
            }
            "$timescale" => vcd.timescale = until_end(&mut tokens)?.join(" "),
            "$scope" => {
                let body = until_end(&mut tokens)?;
                if body.len() != 2 || body[0] != "module" {
                    return Err(format!("bad scope {body:?}"));
                }
                vcd.scope = body[1].clone();
            }
            "$var" => {
                let body = until_end(&mut tokens)?;
                if body.len() < 4 || body[0] != "wire" {
                    return Err(format!("bad var {body:?}"));
                }
                let width: usize = body[1].parse().map_err(|_| format!("bad width {body:?}"))?;
                if width > 1
                    && body.get(4).map(String::as_str) != Some(&format!("[{}:0]", width - 1))
                {
                    return Err(format!("bus without range {body:?}"));
                }
                if vcd.vars.iter().any(|v| v.code == body[2]) {
                    return Err(format!("duplicate code {}", body[2]));
                }
                vcd.vars.push(VcdVar {
                    code: body[2].clone(),
                    name: body[3].clone(),
                    width,
                });
            }
            "$enddefinitions" => {
                until_end(&mut tokens)?;
                break;
            }
            other => return Err(format!("unexpected header token {other}")),
        }
    }
    let by_code: HashMap<&str, &VcdVar> = vcd.vars.iter().map(|v| (v.code.as_str(), v)).collect();
    let mut changes: Vec<(u64, Vec<(String, u128)>)> = Vec::new();
    let mut last: HashMap<String, u128> = HashMap::new();
    while let Some(t) = tokens.next() {
        if let Some(time) = t.strip_prefix('#') {
            let time: u64 = time.parse().map_err(|_| format!("bad time {t}"))?;
            if changes.last().is_some_and(|c| c.0 >= time) {
                return Err(format!("time {time} not increasing"));
            }
            changes.push((time, Vec::new()));
            continue;
        }
        if t == "$dumpvars" || t == "$end" {
            continue;
        }
        let later = changes.len() > 1;
        let cur = changes.last_mut().ok_or("value before first timestamp")?;
        let (value, code) = if let Some(bits) = t.strip_prefix('b') {
            let code = tokens.next().ok_or("vector value without code")?;
            (
                u128::from_str_radix(bits, 2).map_err(|_| format!("bad vector {t}"))?,
                code,
            )
        } else {
            let (v, code) = t.split_at(1);
            let v = match v {
                "0" => 0,
                "1" => 1,
                _ => return Err(format!("bad scalar {t}")),
            };
            (v, code)
        };
        let var = by_code.get(code).ok_or(format!("unknown code {code}"))?;
        if var.width < 128 && value >> var.width != 0 {
            return Err(format!("value too wide for {}", var.name));
        }
        if later && last.get(&var.name) == Some(&value) {
            return Err(format!("{} recorded without changing", var.name));
        }
        last.insert(var.name.clone(), value);
        cur.1.push((var.name.clone(), value));
    }
    vcd.changes = changes;
    Ok(vcd)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conn {
    Positional(Vec<String>),
    Named(Vec<(String, String)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub kind: String,
    pub name: String,
    pub conn: Conn,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Module {
    pub name: String,
    /// `(name, width, is_input)` in declaration order.
    pub ports: Vec<(String, usize, bool)>,
    pub wires: Vec<String>,
    pub instances: Vec<Instance>,
}

/// Parses the structural subset: ANSI port lists, `wire` declarations and
/// instances with positional or named connections.
pub fn read_verilog(text: &str) -> Result<BTreeMap<String, Module>, String> {
    let code: String = text
        .lines()
        .map(|l| l.split("//").next().unwrap())
        .collect::<Vec<_>>()
        .join("\n");
    let mut modules = BTreeMap::new();
    let mut rest = code.as_str();
    while let Some(start) = rest.find("module ") {
        let end = rest[start..].find("endmodule").ok_or("missing endmodule")? + start;
        let m = read_module(&rest[start + "module ".len()..end])?;
        modules.insert(m.name.clone(), m);
        rest = &rest[end + "endmodule".len()..];
    }
    Ok(modules)
}

fn read_module(body: &str) -> Result<Module, String> {
    let open = body.find('(').ok_or("module without ports")?;
    let close = body.find(");").ok_or("unterminated port list")?;
    let mut m = Module {
        name: body[..open].trim().to_string(),
        ..Module::default()
    };
    for decl in body[open + 1..close].split(',') {
        let words: Vec<&str> = decl.split_whitespace().collect();
        let (dir, range, name) = match words[..] {
            [dir, name] => (dir, None, name),
            [dir, range, name] => (dir, Some(range), name),
            _ => return Err(format!("bad port {decl:?}")),
        };
        let width = match range {
            None => 1,
            Some(r) => {
                let hi: usize = r
                    .strip_prefix('[')
                    .and_then(|r| r.strip_suffix(":0]"))
                    .and_then(|h| h.parse().ok())
                    .ok_or(format!("bad range {r}"))?;
                hi + 1
            }
        };
        let is_input = match dir {
            "input" => true,
            "output" => false,
            _ => return Err(format!("bad direction {dir}")),
        };
        m.ports.push((name.to_string(), width, is_input));
    }
    for stmt in body[close + 2..].split(';') {
        let stmt = stmt.trim();
        if stmt.is_empty() {
            continue;
        }
        if let Some(w) = stmt.strip_prefix("wire ") {
            m.wires.push(w.trim().to_string());
            continue;
        }
        let open = stmt.find('(').ok_or(format!("bad statement {stmt:?}"))?;
        let head: Vec<&str> = stmt[..open].split_whitespace().collect();
        let [kind, name] = head[..] else {
            return Err(format!("bad instance head {stmt:?}"));
        };
        let args = stmt[open + 1..]
            .strip_suffix(')')
            .ok_or(format!("bad args {stmt:?}"))?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        let conn = if parts[0].starts_with('.') {
            Conn::Named(
                parts
                    .iter()
                    .map(|p| {
                        let p = p.strip_prefix('.').ok_or(format!("mixed binding {p}"))?;
                        let (port, net) = p.split_once('(').ok_or(format!("bad binding {p}"))?;
                        Ok((port.to_string(), net.trim_end_matches(')').to_string()))
                    })
                    .collect::<Result<_, String>>()?,
            )
        } else {
            Conn::Positional(parts.iter().map(|s| s.to_string()).collect())
        };
        m.instances.push(Instance {
            kind: kind.to_string(),
            name: name.to_string(),
            conn,
        });
    }
    Ok(m)
}

/// Primitive gate after flattening: `(kind, output, inputs)`.
type Prim = (String, String, Vec<String>);

fn flatten(
    modules: &BTreeMap<String, Module>,
    module: &Module,
    prefix: &str,
    bind: &HashMap<String, String>,
    out: &mut Vec<Prim>,
) -> Result<(), String> {
    let resolve = |net: &str| -> String {
        bind.get(net)
            .cloned()
            .unwrap_or_else(|| format!("{prefix}{net}"))
    };
    for inst in &module.instances {
        match (&inst.conn, inst.kind.as_str()) {
            (Conn::Positional(nets), "and" | "or" | "xor" | "buf") => {
                out.push((
                    inst.kind.clone(),
                    resolve(&nets[0]),
                    nets[1..].iter().map(|n| resolve(n)).collect(),
                ));
            }
            (Conn::Named(pairs), kind) => {
                let sub = modules.get(kind).ok_or(format!("unknown module {kind}"))?;
                if pairs.len() != sub.ports.len() {
                    return Err(format!(
                        "{} binds {} of {} ports",
                        inst.name,
                        pairs.len(),
                        sub.ports.len()
                    ));
                }
                let inner: HashMap<String, String> =
                    pairs.iter().map(|(p, n)| (p.clone(), resolve(n))).collect();
                flatten(
                    modules,
                    sub,
                    &format!("{prefix}{}.", inst.name),
                    &inner,
                    out,
                )?;
            }
            _ => return Err(format!("unsupported instance {}", inst.name)),
        }
    }
    Ok(())
}

/// Evaluates module `top` of `text` as an adder.
pub struct VerilogAdder {
    width: usize,
    order: Vec<Prim>,
}

impl VerilogAdder {
    pub fn new(text: &str, top: &str) -> Result<Self, String> {
        let modules = read_verilog(text)?;
        let m = modules.get(top).ok_or(format!("no module {top}"))?;
        let width = m.ports.iter().find(|p| p.0 == "a").ok_or("no port a")?.1;
        let mut prims = Vec::new();
        flatten(&modules, m, "", &HashMap::new(), &mut prims)?;

        // Order gates so every input is computed first.
        let mut driver: HashMap<String, usize> = HashMap::new();
        for (i, p) in prims.iter().enumerate() {
            if driver.insert(p.1.clone(), i).is_some() {
                return Err(format!("{} has two drivers", p.1));
            }
        }
        let mut done = vec![false; prims.len()];
        let mut order = Vec::new();
        fn visit(
            i: usize,
            prims: &[Prim],
            driver: &HashMap<String, usize>,
            done: &mut [bool],
            order: &mut Vec<Prim>,
            depth: usize,
        ) -> Result<(), String> {
            if done[i] {
                return Ok(());
            }
            if depth > prims.len() {
                return Err("cycle".into());
            }
            for input in &prims[i].2 {
                if let Some(&d) = driver.get(input) {
                    visit(d, prims, driver, done, order, depth + 1)?;
                }
            }
            done[i] = true;
            order.push(prims[i].clone());
            Ok(())
        }
        for i in 0..prims.len() {
            visit(i, &prims, &driver, &mut done, &mut order, 0)?;
        }
        Ok(VerilogAdder { width, order })
    }

    pub fn gate_count(&self) -> usize {
        self.order.len()
    }

    pub fn add(&self, a: u128, b: u128, cin: bool) -> (u128, bool) {
        let mut v: HashMap<String, bool> = HashMap::new();
        for i in 0..self.width {
            v.insert(format!("a[{i}]"), (a >> i) & 1 == 1);
            v.insert(format!("b[{i}]"), (b >> i) & 1 == 1);
        }
        v.insert("cin".into(), cin);
        for (kind, out, ins) in &self.order {
            let x: Vec<bool> = ins
                .iter()
                .map(|n| *v.get(n).unwrap_or_else(|| panic!("undriven {n}")))
                .collect();
            let y = match kind.as_str() {
                "and" => x[0] & x[1],
                "or" => x[0] | x[1],
                "xor" => x[0] ^ x[1],
                _ => x[0],
            };
            v.insert(out.clone(), y);
        }
        let sum = (0..self.width).fold(0u128, |acc, i| {
            acc | (u128::from(v[&format!("sum[{i}]")]) << i)
        });
        (sum, v["cout"])
    }
}

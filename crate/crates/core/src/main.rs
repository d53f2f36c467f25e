use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use prefix_adder::cost::{compare_topologies, cost_report, AreaWeights, DelayModel};
use prefix_adder::eval::{
    boundary_vectors, oracle_add, run_paper_testbench, verify_exhaustive, verify_random, AddVector,
    TestVector, VerificationReport, MAX_EXHAUSTIVE_WIDTH, MAX_INT_WIDTH, PAPER_TESTBENCH,
    PAPER_TESTBENCH_WIDTH,
};
use prefix_adder::netlist::{
    emit_testbench, emit_verilog, expand_to_gates, EmitOptions, EmitStyle,
};
use prefix_adder::sim::{critical_path, toggle_count, trace_schedule, write_vcd, Simulator};
use prefix_adder::{
    build_network, insert_alignment_buffers, max_fanout, network_depth, operator_counts,
    validate_network, Error, PrefixNetwork, TopologyKind, TOOL_NAME, TOOL_VERSION,
};

const DEFAULT_RANDOM_COUNT: u64 = 100_000;
const DEFAULT_SEED: u64 = 1;
/// Sequences up to this length are echoed vector by vector.
const VERBOSE_VECTORS: usize = 32;

#[derive(Parser)]
#[command(
    name = "prefix-adder",
    version,
    about = "Parallel-prefix adder generator and analyzer"
)]
struct Cli {
    /// Directory for reports and generated files.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a prefix network and write it as JSON.
    Generate(NetworkArgs),
    /// Check a network against the integer oracle.
    Verify(VerifyArgs),
    /// Rank topologies by estimated delay.
    Compare(CompareArgs),
    /// Write a structural Verilog netlist (and optionally a testbench).
    Emit(EmitArgs),
    /// Simulate the gate netlist.
    Sim(SimArgs),
}

fn parse_topology(s: &str) -> Result<TopologyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Args, Serialize)]
struct NetworkArgs {
    /// brent-kung, kogge-stone, sklansky, han-carlson or ripple-serial.
    #[arg(long, short, value_parser = parse_topology, default_value = "brent-kung")]
    topology: TopologyKind,
    #[arg(long, short, default_value_t = 32)]
    width: usize,
    /// Insert buffer nodes so every operator input comes from the level
    /// directly below.
    #[arg(long)]
    align_buffers: bool,
    /// Load the network from a JSON file instead of generating it.
    #[arg(long, conflicts_with_all = ["topology", "width", "align_buffers"])]
    network: Option<PathBuf>,
}

impl NetworkArgs {
    fn load(&self) -> Result<PrefixNetwork, Error> {
        if let Some(path) = &self.network {
            return PrefixNetwork::from_json(&fs::read_to_string(path)?);
        }
        let net = build_network(self.topology, self.width)?;
        if self.align_buffers {
            insert_alignment_buffers(&net)
        } else {
            Ok(net)
        }
    }
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    network: NetworkArgs,
    /// Try every input combination (widths up to 12).
    #[arg(long, conflicts_with = "random")]
    exhaustive: bool,
    /// Number of random vectors (boundary cases are always added).
    #[arg(long)]
    random: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run the seven-row 32-bit reference testbench.
    #[arg(long, conflicts_with_all = ["exhaustive", "random"])]
    paper_testbench: bool,
}

#[derive(Args, Serialize)]
struct ModelArgs {
    #[arg(long)]
    xor_delay: Option<f64>,
    #[arg(long)]
    and_delay: Option<f64>,
    #[arg(long)]
    or_delay: Option<f64>,
    #[arg(long)]
    buffer_delay: Option<f64>,
    /// Delay added per extra consumer of a net.
    #[arg(long)]
    fanout_alpha: Option<f64>,
    #[arg(long)]
    and_area: Option<f64>,
    #[arg(long)]
    or_area: Option<f64>,
    #[arg(long)]
    xor_area: Option<f64>,
    #[arg(long)]
    buf_area: Option<f64>,
}

impl ModelArgs {
    fn delay(&self) -> DelayModel {
        let d = DelayModel::default();
        DelayModel {
            xor_delay: self.xor_delay.unwrap_or(d.xor_delay),
            and_delay: self.and_delay.unwrap_or(d.and_delay),
            or_delay: self.or_delay.unwrap_or(d.or_delay),
            buffer_delay: self.buffer_delay.unwrap_or(d.buffer_delay),
            fanout_penalty_alpha: self.fanout_alpha.unwrap_or(d.fanout_penalty_alpha),
        }
    }

    fn area(&self) -> AreaWeights {
        let a = AreaWeights::default();
        AreaWeights {
            and: self.and_area.unwrap_or(a.and),
            or: self.or_area.unwrap_or(a.or),
            xor: self.xor_area.unwrap_or(a.xor),
            buf: self.buf_area.unwrap_or(a.buf),
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Json,
}

#[derive(Args, Serialize)]
struct CompareArgs {
    #[arg(long, short, default_value_t = 32)]
    width: usize,
    /// Compare every topology (the default when --topologies is absent).
    #[arg(long, conflicts_with = "topologies")]
    all: bool,
    #[arg(long, value_delimiter = ',', value_parser = parse_topology)]
    topologies: Vec<TopologyKind>,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Style {
    Flat,
    Hierarchical,
}

#[derive(Args, Serialize)]
struct EmitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    network: NetworkArgs,
    #[arg(long, value_enum, default_value = "flat")]
    style: Style,
    #[arg(long, default_value = "adder")]
    module_name: String,
    /// Also write a self-checking testbench.
    #[arg(long)]
    testbench: bool,
    /// Require the seven-row reference vectors (32-bit only). They are the
    /// default at width 32; other widths get boundary vectors.
    #[arg(long, requires = "testbench")]
    paper: bool,
}

#[derive(Args, Serialize)]
struct SimArgs {
    #[command(flatten)]
    #[serde(flatten)]
    network: NetworkArgs,
    /// Input vector as `a,b,cin`; repeat for a sequence.
    #[arg(long = "vector", value_parser = parse_vector)]
    vectors: Vec<(u128, u128, bool)>,
    /// Simulate the seven-row reference sequence (32-bit only).
    #[arg(long, alias = "paper", conflicts_with_all = ["vectors", "random"])]
    paper_testbench: bool,
    /// Simulate N seeded random vectors.
    #[arg(long, conflicts_with = "vectors")]
    random: Option<usize>,
    #[arg(long, requires = "random")]
    seed: Option<u64>,
    /// Write a VCD waveform; the file name defaults to `<topology>_<width>.vcd`.
    #[arg(long, num_args = 0..=1)]
    vcd: Option<Option<PathBuf>>,
    /// Count gate output transitions over the sequence.
    #[arg(long)]
    toggles: bool,
    #[command(flatten)]
    #[serde(flatten)]
    model: ModelArgs,
}

fn parse_vector(s: &str) -> Result<(u128, u128, bool), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, cin] = parts[..] else {
        return Err(format!("expected a,b,cin, got '{s}'"));
    };
    let num = |t: &str| {
        let parsed = match t.strip_prefix("0x") {
            Some(hex) => u128::from_str_radix(hex, 16),
            None => t.parse(),
        };
        parsed.map_err(|e| format!("bad operand '{t}': {e}"))
    };
    let cin = match cin {
        "0" => false,
        "1" => true,
        other => return Err(format!("cin must be 0 or 1, got '{other}'")),
    };
    Ok((num(a)?, num(b)?, cin))
}

/// Failure classes mapped to exit codes.
enum Failure {
    /// Exit 1: the adder produced a wrong result.
    Verification(String),
    /// Exit 2: bad input or I/O.
    Usage(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, contents)?;
    Ok(path)
}

/// Path as recorded in reports: relative to the output directory, so
/// reports do not depend on where they were written.
fn relative(dir: &Path, path: &Path) -> String {
    path.strip_prefix(dir)
        .unwrap_or(path)
        .to_string_lossy()
        .into_owned()
}

fn write_report(
    dir: &Path,
    command: &str,
    config: &impl Serialize,
    result: serde_json::Value,
) -> Result<PathBuf, Error> {
    let report = json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "command": command,
        "config": config,
        "result": result,
    });
    let text = serde_json::to_string_pretty(&report)? + "\n";
    write_file(dir, &format!("{command}_report.json"), &text)
}

fn file_stem(net: &PrefixNetwork) -> String {
    format!(
        "{}_{}",
        net.topology().name().replace('-', "_"),
        net.width()
    )
}

fn generate(dir: &Path, args: &NetworkArgs) -> Result<(), Failure> {
    let net = args.load()?;
    let validation = validate_network(&net);
    let ops = operator_counts(&net);
    let depth = network_depth(&net)?;
    let fanout = max_fanout(&net)?;
    let path = write_file(
        dir,
        &format!("{}.json", file_stem(&net)),
        &(net.to_json()? + "\n"),
    )?;
    println!("{} {}-bit", net.topology(), net.width());
    println!("  depth      {depth}");
    println!(
        "  operators  {} (black {}, gray {}, buffer {})",
        ops.operators(),
        ops.black,
        ops.gray,
        ops.buffer
    );
    println!("  max fanout {fanout}");
    println!("  valid      {}", validation.is_valid());
    for v in &validation.violations {
        println!("    {v}");
    }
    println!("wrote {}", path.display());
    let result = json!({
        "network_file": relative(dir, &path),
        "depth": depth,
        "operator_counts": ops,
        "max_fanout": fanout,
        "violations": validation.violations,
    });
    write_report(dir, "generate", args, result)?;
    Ok(())
}

fn print_verification(r: &VerificationReport) {
    let mode = match r.seed {
        Some(seed) => format!("random, seed {seed}"),
        None => "exhaustive".to_string(),
    };
    println!(
        "{} {}-bit: {} vectors ({mode}), {} mismatches",
        r.topology, r.width, r.vectors_run, r.mismatch_count
    );
    for v in &r.violations {
        println!("  violation: {v}");
    }
    for m in r.mismatches.iter().take(10) {
        println!(
            "  a={} b={} cin={}: got sum={} cout={}, expected sum={} cout={}",
            m.a,
            m.b,
            u8::from(m.cin),
            m.got_sum,
            u8::from(m.got_cout),
            m.expected_sum,
            u8::from(m.expected_cout)
        );
    }
}

fn verify(dir: &Path, args: &VerifyArgs) -> Result<(), Failure> {
    let net = args.network.load()?;
    if args.paper_testbench {
        let rows = run_paper_testbench(&net)?;
        println!(
            "{:>4} {:>10} {:>10} {:>3} {:>10} {:>4} {:>6}  result",
            "test", "a", "b", "cin", "sum", "cout", "time"
        );
        for r in &rows {
            println!(
                "{:>4} {:>10} {:>10} {:>3} {:>10} {:>4} {:>6}  {}",
                r.test,
                r.a,
                r.b,
                r.cin,
                r.sum,
                r.cout,
                format!("{}ns", r.time_ns),
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
        let failed = rows.iter().filter(|r| !r.pass).count();
        write_report(
            dir,
            "verify",
            args,
            json!({ "testbench": rows, "failed": failed }),
        )?;
        return if failed == 0 {
            Ok(())
        } else {
            Err(Failure::Verification(format!(
                "{failed} testbench rows failed"
            )))
        };
    }

    let exhaustive =
        args.exhaustive || (args.random.is_none() && net.width() <= MAX_EXHAUSTIVE_WIDTH);
    let report = if exhaustive {
        verify_exhaustive(&net)?
    } else {
        verify_random(
            &net,
            args.random.unwrap_or(DEFAULT_RANDOM_COUNT),
            args.seed.unwrap_or(DEFAULT_SEED),
        )?
    };
    print_verification(&report);
    write_report(dir, "verify", args, serde_json::to_value(&report)?)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} mismatching vectors",
            report.mismatch_count
        )))
    }
}

fn compare(dir: &Path, args: &CompareArgs) -> Result<(), Failure> {
    let topologies: Vec<TopologyKind> = if args.topologies.is_empty() {
        TopologyKind::ALL.to_vec()
    } else {
        args.topologies.clone()
    };
    let table = compare_topologies(
        args.width,
        &topologies,
        &args.model.delay(),
        &args.model.area(),
    )?;
    match args.format {
        Format::Text => print!("{}", table.to_text()),
        Format::Json => println!("{}", serde_json::to_string_pretty(&table)?),
    }
    let result = json!({
        "delay_model": args.model.delay(),
        "area_weights": args.model.area(),
        "rows": table,
    });
    write_report(dir, "compare", args, result)?;
    Ok(())
}

/// Boundary cases with their oracle results, 10 ns apart.
fn default_testbench_vectors(width: usize) -> Result<Vec<TestVector>, Error> {
    boundary_vectors(width)
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let r = oracle_add(v.a, v.b, v.cin, width)?;
            Ok(TestVector {
                a: v.a,
                b: v.b,
                cin: v.cin,
                expected_sum: r.sum.value(),
                expected_cout: r.carry_out,
                time_label_ns: 10 * k as u64,
            })
        })
        .collect()
}

fn emit(dir: &Path, args: &EmitArgs) -> Result<(), Failure> {
    let net = args.network.load()?;
    let netlist = expand_to_gates(&net)?;
    let opts = EmitOptions {
        style: match args.style {
            Style::Flat => EmitStyle::Flat,
            Style::Hierarchical => EmitStyle::Hierarchical,
        },
        module_name: args.module_name.clone(),
        ..EmitOptions::default()
    };
    let verilog = emit_verilog(&netlist, &opts)?;
    let mut files = vec![write_file(
        dir,
        &format!("{}.v", args.module_name),
        &verilog,
    )?];
    if args.testbench {
        let vectors = if args.paper || net.width() == PAPER_TESTBENCH_WIDTH {
            if net.width() != PAPER_TESTBENCH_WIDTH {
                return Err(Error::InvalidArgument(format!(
                    "--paper needs width {PAPER_TESTBENCH_WIDTH}, got {}",
                    net.width()
                ))
                .into());
            }
            PAPER_TESTBENCH.to_vec()
        } else {
            default_testbench_vectors(net.width())?
        };
        let tb = emit_testbench(net.width(), &vectors, &args.module_name)?;
        files.push(write_file(dir, &format!("tb_{}.v", args.module_name), &tb)?);
    }
    let counts = netlist.gate_counts();
    println!(
        "{} {}-bit: {} gates (and {}, or {}, xor {}, buf {})",
        net.topology(),
        net.width(),
        counts.total(),
        counts.and,
        counts.or,
        counts.xor,
        counts.buf
    );
    for f in &files {
        println!("wrote {}", f.display());
    }
    write_report(
        dir,
        "emit",
        args,
        json!({
            "files": files.iter().map(|f| relative(dir, f)).collect::<Vec<_>>(),
            "gate_counts": counts,
        }),
    )?;
    Ok(())
}

fn sim(dir: &Path, args: &SimArgs) -> Result<(), Failure> {
    let net = args.network.load()?;
    let netlist = expand_to_gates(&net)?;
    let schedule: Vec<(u64, AddVector)> = if args.paper_testbench {
        if net.width() != PAPER_TESTBENCH_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "--paper needs width {PAPER_TESTBENCH_WIDTH}, got {}",
                net.width()
            ))
            .into());
        }
        PAPER_TESTBENCH
            .iter()
            .map(|v| (v.time_label_ns, v.input()))
            .collect()
    } else if let Some(count) = args.random {
        if count == 0 {
            return Err(Error::InvalidArgument("--random needs at least 1 vector".into()).into());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed.unwrap_or(DEFAULT_SEED));
        let mask = u128::MAX >> (128 - net.width().min(MAX_INT_WIDTH));
        (0..count)
            .map(|k| {
                let v = AddVector {
                    a: rng.random::<u128>() & mask,
                    b: rng.random::<u128>() & mask,
                    cin: rng.random(),
                };
                (10 * k as u64, v)
            })
            .collect()
    } else if args.vectors.is_empty() {
        return Err(Error::InvalidArgument(
            "give --paper-testbench, --random N or at least one --vector".into(),
        )
        .into());
    } else {
        args.vectors
            .iter()
            .enumerate()
            .map(|(k, &(a, b, cin))| (10 * k as u64, AddVector { a, b, cin }))
            .collect()
    };

    let simulator = Simulator::new(&netlist)?;
    let mut rows = Vec::new();
    let mut wrong = 0;
    for &(time, v) in &schedule {
        let r = simulator.run(v.a, v.b, v.cin)?;
        let o = oracle_add(v.a, v.b, v.cin, net.width())?;
        let ok = r.sum == o.sum.value() && r.cout == o.carry_out;
        if !ok {
            wrong += 1;
        }
        if !ok || schedule.len() <= VERBOSE_VECTORS {
            println!(
                "#{time:<4} {} + {} + {} = {} cout={}{}",
                v.a,
                v.b,
                u8::from(v.cin),
                r.sum,
                u8::from(r.cout),
                if ok { "" } else { "  MISMATCH" }
            );
        }
        rows.push(json!({
            "time_ns": time, "a": v.a, "b": v.b, "cin": u8::from(v.cin),
            "sum": r.sum, "cout": u8::from(r.cout), "matches_oracle": ok,
        }));
    }

    println!(
        "{}/{} vectors match the oracle",
        schedule.len() - wrong,
        schedule.len()
    );
    let path = critical_path(&netlist, &args.model.delay())?;
    println!(
        "critical path {} -> {}: delay {} over {} gates",
        path.start,
        path.end,
        path.delay,
        path.gates.len()
    );
    let mut result = json!({
        "vectors": rows,
        "critical_path": path,
        "cost": cost_report(&net, &args.model.delay(), &args.model.area())?,
    });
    if args.toggles {
        if schedule.len() < 2 {
            return Err(Error::InvalidArgument("--toggles needs at least 2 vectors".into()).into());
        }
        let vectors: Vec<AddVector> = schedule.iter().map(|s| s.1).collect();
        let toggles = toggle_count(&netlist, &vectors)?;
        println!(
            "toggles: {} over {} vectors",
            toggles.total, toggles.vectors
        );
        result["toggles"] = serde_json::to_value(&toggles)?;
    }
    if let Some(name) = &args.vcd {
        let trace = trace_schedule(&netlist, &schedule)?;
        let mut buf = Vec::new();
        write_vcd(&trace, &mut buf)?;
        let name = match name {
            Some(path) => path.to_string_lossy().into_owned(),
            None => format!("{}.vcd", file_stem(&net)),
        };
        let file = write_file(dir, &name, &String::from_utf8_lossy(&buf))?;
        println!("wrote {}", file.display());
        result["vcd_file"] = json!(relative(dir, &file));
    }
    write_report(dir, "sim", args, result)?;
    if wrong == 0 {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{wrong} vectors disagree with the oracle"
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let dir = cli.out_dir.as_path();
    let outcome = match &cli.command {
        Command::Generate(a) => generate(dir, a),
        Command::Verify(a) => verify(dir, a),
        Command::Compare(a) => compare(dir, a),
        Command::Emit(a) => emit(dir, a),
        Command::Sim(a) => sim(dir, a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

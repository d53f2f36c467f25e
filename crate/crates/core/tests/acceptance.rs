//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines always reach the output.

mod support;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prefix_adder::cost::{estimate_delay, DelayModel};
use prefix_adder::eval::{verify_exhaustive, verify_random, AddVector, Evaluator, PAPER_TESTBENCH};
use prefix_adder::netlist::{
    emit_testbench, emit_verilog, expand_to_gates, EmitOptions, EmitStyle,
};
use prefix_adder::sim::{critical_path, toggle_count, trace_schedule, Simulator};
use prefix_adder::{build_network, network_depth, operator_counts, TopologyKind};

const ALL: [TopologyKind; 5] = TopologyKind::ALL;

/// (test, a, b, cin, sum, cout, time_ns) transcribed from the reference
/// table; 4.29B is 2^32 - 1 and 2.14B is 2^31.
const REFERENCE_ROWS: [(u64, u128, u128, u8, u128, u8, u64); 7] = [
    (1, 0, 0, 0, 0, 0, 0),
    (2, 1, 1, 0, 2, 0, 10),
    (3, 4_294_967_295, 1, 0, 0, 1, 30),
    (4, 2_147_483_648, 2_147_483_648, 0, 0, 1, 50),
    (5, 0, 0, 0, 0, 0, 70),
    (6, 10, 20, 0, 30, 0, 90),
    (7, 15, 1, 1, 17, 0, 110),
];

/// Total gate output transitions for the reference testbench sequence on the 32-bit
/// Brent-Kung netlist. Frozen after the first run.
const TOGGLES_BK32_REFERENCE: u64 = 341;

const CRIT1_LIMIT: Duration = Duration::from_secs(1);
const CRIT2_LIMIT: Duration = Duration::from_secs(300);
const CRIT3_LIMIT: Duration = Duration::from_secs(60);
const CRIT5_MIN_R2: f64 = 0.999;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn cli(out_dir: &Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_prefix-adder"))
        .arg("--out-dir")
        .arg(out_dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn criterion_1() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = cli(
        dir.path(),
        &[
            "verify",
            "--topology",
            "brent-kung",
            "--width",
            "32",
            "--paper-testbench",
        ],
    );
    let elapsed = start.elapsed();
    check(
        out.status.code() == Some(0),
        format!("exit {:?}", out.status.code()),
    )?;
    let text = std::fs::read_to_string(dir.path().join("verify_report.json"))
        .map_err(|e| e.to_string())?;
    let report: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let rows = report["result"]["testbench"].as_array().ok_or("no rows")?;
    check(rows.len() == 7, format!("{} rows", rows.len()))?;
    for (row, &(test, a, b, cin, sum, cout, time)) in rows.iter().zip(&REFERENCE_ROWS) {
        let num = |k: &str| row[k].as_u64().map(u128::from);
        let matches = row["test"].as_u64() == Some(test)
            && num("a") == Some(a)
            && num("b") == Some(b)
            && num("cin") == Some(u128::from(cin))
            && num("sum") == Some(sum)
            && num("cout") == Some(u128::from(cout))
            && row["time_ns"].as_u64() == Some(time);
        check(matches, format!("row {test} differs: {row}"))?;
    }
    check(elapsed < CRIT1_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!("7/7 rows match, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut vectors = 0u64;
    for t in ALL {
        for w in 1..=10 {
            let net = build_network(t, w).map_err(|e| e.to_string())?;
            let r = verify_exhaustive(&net).map_err(|e| e.to_string())?;
            check(
                r.vectors_run == 1 << (2 * w + 1),
                format!("{t} {w}: {} vectors", r.vectors_run),
            )?;
            check(
                r.mismatch_count == 0,
                format!("{t} {w}: {} mismatches", r.mismatch_count),
            )?;
            vectors += r.vectors_run;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < CRIT2_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!("{vectors} vectors, 0 mismatches, {elapsed:.2?}"))
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    for t in [TopologyKind::BrentKung, TopologyKind::KoggeStone] {
        for w in [32, 64] {
            let net = build_network(t, w).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let r = verify_random(&net, 1_000_000, 2024).map_err(|e| e.to_string())?;
            let elapsed = start.elapsed();
            check(
                r.vectors_run >= 1_000_000,
                format!("{t} {w}: {} vectors", r.vectors_run),
            )?;
            check(
                r.mismatch_count == 0,
                format!("{t} {w}: {} mismatches", r.mismatch_count),
            )?;
            check(elapsed < CRIT3_LIMIT, format!("{t} {w}: took {elapsed:?}"))?;
            parts.push(format!("{} {w}: {elapsed:.2?}", t.abbrev()));
        }
    }
    Ok(format!(
        "10^6 vectors each, 0 mismatches ({})",
        parts.join(", ")
    ))
}

fn criterion_4() -> Outcome {
    let n = 32usize;
    let log = n.trailing_zeros() as usize;
    let ops = |t| operator_counts(&build_network(t, n).unwrap()).operators();
    let (bk, ks) = (ops(TopologyKind::BrentKung), ops(TopologyKind::KoggeStone));
    let bk_closed = 2 * n - 2 - log;
    let ks_closed = n * log - n + 1;
    check(
        bk == 57 && bk == bk_closed,
        format!("BK(32) = {bk}, closed form {bk_closed}"),
    )?;
    check(
        ks == 129 && ks == ks_closed,
        format!("KS(32) = {ks}, closed form {ks_closed}"),
    )?;
    check(bk < ks, format!("BK {bk} >= KS {ks}"))?;
    let depth = network_depth(&build_network(TopologyKind::BrentKung, n).unwrap())
        .map_err(|e| e.to_string())?;
    check(
        log < depth && depth <= 2 * log,
        format!("BK depth {depth} outside ({log}, {}]", 2 * log),
    )?;
    Ok(format!(
        "BK 57, KS 129, BK depth {depth} in ({log}, {}]",
        2 * log
    ))
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn criterion_5() -> Outcome {
    let m = DelayModel::default();
    let delay = |t, w| estimate_delay(&build_network(t, w).unwrap(), &m).unwrap();
    let (ks, bk, rca) = (
        delay(TopologyKind::KoggeStone, 32),
        delay(TopologyKind::BrentKung, 32),
        delay(TopologyKind::RippleSerial, 32),
    );
    check(ks <= bk && bk < rca, format!("KS {ks}, BK {bk}, RCA {rca}"))?;
    let xs: Vec<f64> = (4..=64).map(|w| w as f64).collect();
    let ys: Vec<f64> = (4..=64)
        .map(|w| delay(TopologyKind::RippleSerial, w))
        .collect();
    let r2 = r_squared(&xs, &ys);
    check(r2 > CRIT5_MIN_R2, format!("ripple R^2 {r2}"))?;
    Ok(format!(
        "KS {ks} <= BK {bk} < RCA {rca}; ripple R^2 {r2:.6}"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for t in ALL {
        for w in [4, 8, 16, 32] {
            let net = build_network(t, w).unwrap();
            let eval = Evaluator::new(&net).map_err(|e| e.to_string())?;
            let sim = Simulator::new(&expand_to_gates(&net).unwrap()).map_err(|e| e.to_string())?;
            let mask = u128::MAX >> (128 - w);
            for _ in 0..10_000 {
                let (a, b, cin) = (
                    rng.random::<u128>() & mask,
                    rng.random::<u128>() & mask,
                    rng.random(),
                );
                let e = eval.add(a, b, cin).unwrap();
                let s = sim.run(a, b, cin).unwrap();
                check(
                    (s.sum, s.cout) == (e.sum.value(), e.carry_out),
                    format!(
                        "{t} {w}: ({a}, {b}, {cin}) sim {:?} eval {:?}",
                        (s.sum, s.cout),
                        e
                    ),
                )?;
            }
        }
    }
    let models = [
        DelayModel::default(),
        DelayModel::unit(),
        DelayModel {
            xor_delay: 3.0,
            and_delay: 1.25,
            or_delay: 0.75,
            buffer_delay: 0.5,
            fanout_penalty_alpha: 0.2,
        },
    ];
    let mut compared = 0;
    for t in ALL {
        for w in 1..=32 {
            let net = build_network(t, w).unwrap();
            let nl = expand_to_gates(&net).unwrap();
            for m in &models {
                let path = critical_path(&nl, m).map_err(|e| e.to_string())?.delay;
                let est = estimate_delay(&net, m).map_err(|e| e.to_string())?;
                check(
                    path == est,
                    format!("{t} {w} {m:?}: path {path} vs estimate {est}"),
                )?;
                compared += 1;
            }
        }
    }
    Ok(format!(
        "sim == eval on 200000 vectors; {compared} path/estimate pairs equal"
    ))
}

fn criterion_7() -> Outcome {
    let golden = |name: &str| {
        let path = Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name);
        std::fs::read_to_string(path)
            .map(|s| s.replace("\r\n", "\n"))
            .map_err(|e| e.to_string())
    };
    let nl = expand_to_gates(&build_network(TopologyKind::BrentKung, 32).unwrap()).unwrap();
    for (style, file) in [
        (EmitStyle::Flat, "bk32_flat.v"),
        (EmitStyle::Hierarchical, "bk32_hier.v"),
    ] {
        let opts = EmitOptions {
            style,
            module_name: "bk32".into(),
            ..EmitOptions::default()
        };
        let first = emit_verilog(&nl, &opts).map_err(|e| e.to_string())?;
        let second = emit_verilog(&nl, &opts).map_err(|e| e.to_string())?;
        check(first == second, format!("{file}: two runs differ"))?;
        check(
            first == golden(file)?,
            format!("{file}: differs from golden"),
        )?;
    }
    let tb = emit_testbench(32, &PAPER_TESTBENCH, "bk32").map_err(|e| e.to_string())?;
    check(
        tb == golden("tb_bk32.v")?,
        "tb_bk32.v differs from golden".into(),
    )?;
    Ok("flat, hierarchical and testbench byte-match goldens".into())
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let runs: [(&str, &[&str]); 3] = [
        (
            "bk32.vcd",
            &[
                "--topology",
                "brent-kung",
                "--width",
                "32",
                "--paper-testbench",
            ],
        ),
        (
            "ks16.vcd",
            &[
                "--topology",
                "kogge-stone",
                "--width",
                "16",
                "--random",
                "40",
                "--seed",
                "3",
            ],
        ),
        (
            "hca8.vcd",
            &[
                "--topology",
                "han-carlson",
                "--width",
                "8",
                "--vector",
                "1,2,0",
                "--vector",
                "255,1,0",
            ],
        ),
    ];
    for (file, args) in runs {
        let mut full = vec!["sim"];
        full.extend_from_slice(args);
        full.extend_from_slice(&["--vcd", file]);
        let out = cli(dir.path(), &full);
        check(
            out.status.code() == Some(0),
            format!("{file}: exit {:?}", out.status.code()),
        )?;
        let text = std::fs::read_to_string(dir.path().join(file)).map_err(|e| e.to_string())?;
        support::read_vcd(&text).map_err(|e| format!("{file}: {e}"))?;
    }

    // Exact change list for the reference schedule.
    let text = std::fs::read_to_string(dir.path().join("bk32.vcd")).map_err(|e| e.to_string())?;
    let vcd = support::read_vcd(&text)?;
    let nl = expand_to_gates(&build_network(TopologyKind::BrentKung, 32).unwrap()).unwrap();
    let schedule: Vec<(u64, AddVector)> = PAPER_TESTBENCH
        .iter()
        .map(|v| (v.time_label_ns, v.input()))
        .collect();
    let trace = trace_schedule(&nl, &schedule).map_err(|e| e.to_string())?;
    let expected: Vec<(u64, Vec<(String, u128)>)> = trace
        .changes
        .iter()
        .map(|(t, d)| {
            (
                *t,
                d.iter()
                    .map(|&(i, v)| (trace.signals[i].name.clone(), v))
                    .collect(),
            )
        })
        .collect();
    check(
        vcd.changes == expected,
        "change list differs from the simulated trace".into(),
    )?;
    let times: Vec<u64> = vcd.changes.iter().map(|c| c.0).collect();
    let labels: Vec<u64> = REFERENCE_ROWS.iter().map(|r| r.6).collect();
    check(times == labels, format!("change times {times:?}"))?;
    check(
        vcd.timescale == "1ns",
        format!("timescale {}", vcd.timescale),
    )?;
    Ok(format!("3 files read back; BK32 changes at {times:?}"))
}

fn criterion_9() -> Outcome {
    let nl = expand_to_gates(&build_network(TopologyKind::BrentKung, 32).unwrap()).unwrap();
    let seq: Vec<AddVector> = PAPER_TESTBENCH.iter().map(|v| v.input()).collect();
    let first = toggle_count(&nl, &seq).map_err(|e| e.to_string())?;
    let second = toggle_count(&nl, &seq).map_err(|e| e.to_string())?;
    check(first == second, "two runs differ".into())?;
    check(
        first.total == TOGGLES_BK32_REFERENCE,
        format!(
            "total {} != regression constant {TOGGLES_BK32_REFERENCE}",
            first.total
        ),
    )?;
    Ok(format!("{} toggles, stable across runs", first.total))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("reference testbench reproduction", criterion_1),
        ("exhaustive oracle equivalence, widths 1..10", criterion_2),
        ("randomized oracle equivalence, 10^6 vectors", criterion_3),
        ("operator census and depth", criterion_4),
        ("delay ordering and ripple linearity", criterion_5),
        ("gate sim vs evaluator, path vs estimate", criterion_6),
        ("emission determinism vs goldens", criterion_7),
        ("VCD round trip", criterion_8),
        ("toggle count regression", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

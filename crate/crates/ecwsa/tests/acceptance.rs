//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 8 and 9 are soft: they compare against reference benchmark
//! numbers that the declared protocol does not pin down bit for bit. A soft
//! failure is printed as FAIL with its numbers but does not fail the process
//! unless `ECWSA_ACCEPTANCE_STRICT=1` is set.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use ecwsa::core::chaos::step;
use ecwsa::core::mrmr::{entropy, mutual_information};
use ecwsa::core::rng::{substream, Purpose};
use ecwsa::core::wrapper::knn_predict;
use ecwsa::core::{
    aggregate, run_with, ChaosKind, ChaosParams, Dataset, DiscretizedDataset, FeatureSet, RunConfig, RunOutcome,
    Sequential,
};
use ecwsa::{load_csv, repeat_dataset, run_dataset, LoadOptions, RayonExecutor, Variant};
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn load(name: &str) -> (Dataset, (usize, usize, usize)) {
    let loaded = load_csv(data_dir().join(format!("{name}.csv")), &LoadOptions::default())
        .unwrap_or_else(|e| panic!("loading {name}: {e}"));
    let shape = loaded.shape();
    (loaded.dataset.min_max_normalize(), shape)
}

fn c1_chaos_maps() -> Verdict {
    let params = ChaosParams::default();
    let two_pi = 2.0 * std::f64::consts::PI;
    let circular_hand = (0.3 + 0.2 - (0.5 / two_pi) * (two_pi * 0.3).sin()).rem_euclid(1.0);
    let cases = [
        ("tent(0.3)", ChaosKind::Tent, 0.3, 0.3 / 0.7),
        ("logistic(0.3)", ChaosKind::Logistic, 0.3, 4.0 * 0.3 * 0.7),
        ("piecewise(0.2)", ChaosKind::Piecewise, 0.2, 0.2 / 0.4),
        ("circular(0.3)", ChaosKind::Circular, 0.3, circular_hand),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (label, kind, p, want) in cases {
        let got = step(kind, &params, p).expect("valid input");
        worst = worst.max((got - want).abs());
        parts.push(format!("{label}={got:.7}"));
    }
    let circular_printed = (circular_hand - 0.4243).abs() < 5e-5;
    verdict(
        worst <= 1e-9 && circular_printed,
        format!("{}; max error {worst:.1e}", parts.join(", ")),
    )
}

fn c2_schedule() -> Verdict {
    let cfg = RunConfig {
        local_search_enabled: false,
        ..RunConfig::default()
    };
    let mut want = vec![80, 72, 64, 57, 51, 45, 40, 36, 32, 28, 25, 22, 19, 17, 15];
    want.resize(25, 15);
    let accuracy = |m: &[bool]| m.iter().filter(|&&b| b).count() as f64 / m.len() as f64;
    let report = run_with(&cfg, 12, &accuracy, None, &Sequential, &mut |_| {}).expect("run");
    let got: Vec<usize> = report.trace.iter().map(|r| r.population_size).collect();
    verdict(got == want, format!("sizes {got:?}"))
}

/// A deterministic, bumpy accuracy landscape over masks.
fn synthetic_accuracy(mask: &[bool]) -> f64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in mask {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    let selected = mask.iter().filter(|&&b| b).count() as f64;
    0.5 * (h % 1000) as f64 / 1000.0 + 0.5 * selected / mask.len() as f64
}

fn c3_evaluation_bound() -> Verdict {
    let mut rng = substream(2024, 0, 0, Purpose::Run);
    let mut problems = Vec::new();
    let mut equalities = 0;
    let mut stricts = 0;
    for case in 0..50 {
        let m = rng.random_range(3..=60usize);
        let max_iter = rng.random_range(1..=30usize);
        let death = if rng.random_bool(0.25) { 0.0 } else { rng.random_range(0.01..0.9) };
        let base = rng.random_range(3..=m);
        let n = rng.random_range(1..=20usize);
        let with_filter = rng.random_bool(0.5);
        let cfg = RunConfig {
            initial_population: m,
            max_iterations: max_iter,
            death,
            base,
            seed: case,
            local_search_enabled: with_filter,
            ..RunConfig::default()
        };
        let filter = with_filter.then(|| {
            let rows = 30;
            let labels: Vec<u32> = (0..rows).map(|i| (i % 2) as u32).collect();
            let cols = (0..n).map(|_| (0..rows).map(|_| rng.random_range(0..4)).collect()).collect();
            DiscretizedDataset::from_parts(cols, 4, labels, 2).expect("filter")
        });
        let calls = AtomicU64::new(0);
        let evaluator = |mask: &[bool]| {
            calls.fetch_add(1, Ordering::Relaxed);
            synthetic_accuracy(mask)
        };
        let report = match run_with(&cfg, n, &evaluator, filter.as_ref(), &Sequential, &mut |_| {}) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("case {case}: {e}"));
                continue;
            }
        };
        let counted = calls.load(Ordering::Relaxed);
        let bound = (m * max_iter) as u64;
        if counted != report.evaluations {
            problems.push(format!("case {case}: reported {} but counted {counted}", report.evaluations));
        }
        if counted > bound {
            problems.push(format!("case {case}: {counted} > {bound}"));
        }
        if death == 0.0 {
            equalities += 1;
            if counted != bound {
                problems.push(format!("case {case}: death=0 but {counted} != {bound}"));
            }
        } else if base < m && max_iter >= 2 {
            stricts += 1;
            if counted >= bound {
                problems.push(format!("case {case}: shrinking schedule but {counted} == {bound}"));
            }
        }
    }
    verdict(
        problems.is_empty(),
        format!(
            "50 configs, {equalities} with death=0 (equality), {stricts} shrinking (strict){}",
            if problems.is_empty() { String::new() } else { format!("; {}", problems.join("; ")) }
        ),
    )
}

fn brute_entropy(u: &[u32]) -> f64 {
    let n = u.len() as f64;
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for &a in u {
        *counts.entry(a).or_default() += 1;
    }
    -counts.values().map(|&c| c as f64 / n).map(|p| p * p.ln()).sum::<f64>()
}

fn brute_mi(u: &[u32], v: &[u32]) -> f64 {
    let n = u.len() as f64;
    let mut joint: HashMap<(u32, u32), usize> = HashMap::new();
    let mut pu: HashMap<u32, usize> = HashMap::new();
    let mut pv: HashMap<u32, usize> = HashMap::new();
    for (&a, &b) in u.iter().zip(v) {
        *joint.entry((a, b)).or_default() += 1;
        *pu.entry(a).or_default() += 1;
        *pv.entry(b).or_default() += 1;
    }
    joint
        .iter()
        .map(|(&(a, b), &c)| {
            let pab = c as f64 / n;
            let pa = pu[&a] as f64 / n;
            let pb = pv[&b] as f64 / n;
            pab * (pab / (pa * pb)).ln()
        })
        .sum()
}

fn c4_mutual_information() -> Verdict {
    let mut rng = substream(4, 0, 0, Purpose::Run);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        let len = rng.random_range(1..=50usize);
        let ku = rng.random_range(1..=8u32);
        let kv = rng.random_range(1..=8u32);
        let u: Vec<u32> = (0..len).map(|_| rng.random_range(0..ku)).collect();
        let v: Vec<u32> = (0..len).map(|_| rng.random_range(0..kv)).collect();
        let uv = mutual_information(&u, &v).expect("mi");
        let vu = mutual_information(&v, &u).expect("mi");
        let oracle = brute_mi(&u, &v);
        let err = (uv - oracle).abs();
        worst = worst.max(err);
        let hmin = brute_entropy(&u).min(brute_entropy(&v));
        let entropy_ok = (entropy(&u) - brute_entropy(&u)).abs() <= 1e-12;
        if err > 1e-12 || (uv - vu).abs() > 1e-12 || uv < 0.0 || uv > hmin + 1e-12 || !entropy_ok {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("100 pairs, {failures} violations, max |MI - oracle| {worst:.1e}"))
}

fn c5_mrmr() -> Verdict {
    let mut rng = substream(5, 0, 0, Purpose::Run);
    let rows = 60;
    let labels: Vec<u32> = (0..rows).map(|_| rng.random_range(0..3)).collect();
    let cols: Vec<Vec<u32>> = (0..8)
        .map(|j| {
            labels
                .iter()
                .map(|&l| if j % 2 == 0 && rng.random_bool(0.7) { l + 2 * (j as u32 % 3) } else { rng.random_range(0..6) })
                .collect()
        })
        .collect();
    let start = Instant::now();
    let data = DiscretizedDataset::from_parts(cols.clone(), 8, labels.clone(), 3).expect("data");
    let mut worst: f64 = 0.0;
    for bits in 1u32..256 {
        let set: Vec<usize> = (0..8).filter(|j| bits >> j & 1 == 1).collect();
        let s = set.len() as f64;
        let relevance = set.iter().map(|&i| brute_mi(&cols[i], &labels)).sum::<f64>() / s;
        let mut redundancy = 0.0;
        for &i in &set {
            for &j in &set {
                redundancy += brute_mi(&cols[i], &cols[j]);
            }
        }
        let oracle = relevance - redundancy / (s * s);
        let got = data.mrmr_fitness(&FeatureSet::new(set));
        worst = worst.max((got - oracle).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-10 && secs < 1.0,
        format!("255 subsets, max error {worst:.1e}, {secs:.3}s"),
    )
}

fn c6_knn() -> Verdict {
    let mut rng = substream(6, 0, 0, Purpose::Run);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=40usize);
        let dim = rng.random_range(1..=4usize);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.random_range(0..4) as f64).collect())
            .collect();
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let query: Vec<f64> = (0..dim).map(|_| rng.random_range(0..4) as f64).collect();
        let k = rng.random_range(1..=n);

        let mut order: Vec<(f64, usize)> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&query).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        order.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let mut votes: BTreeMap<usize, usize> = BTreeMap::new();
        for &(_, i) in &order[..k] {
            *votes.entry(labels[i]).or_default() += 1;
        }
        let top = *votes.values().max().expect("k >= 1");
        let oracle = *votes.iter().find(|(_, &c)| c == top).expect("present").0;

        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        if knn_predict(&refs, &labels, &query, k).expect("predict") != oracle {
            mismatches += 1;
        }
    }
    verdict(mismatches == 0, format!("200 instances, {mismatches} mismatches"))
}

fn zoo_config(variant: Variant, seed: u64) -> RunConfig {
    RunConfig {
        seed,
        ..variant.base_config()
    }
}

fn c7_monotone(zoo: &Dataset, exec: &RayonExecutor) -> Verdict {
    let mut bad = Vec::new();
    for seed in 0..20 {
        let report = run_dataset(&zoo_config(Variant::Ecwsa1, seed), zoo, exec, &mut |_| {}).expect("run");
        let monotone = report.trace.windows(2).all(|w| w[1].best_fitness >= w[0].best_fitness);
        if !monotone || report.trace.len() != 25 {
            bad.push(seed);
        }
    }
    verdict(bad.is_empty(), format!("20 runs on Zoo, non-monotone seeds {bad:?}"))
}

struct Cell {
    mean_accuracy: f64,
    mean_selected: f64,
    mean_fitness: f64,
}

fn cell(data: &Dataset, variant: Variant, exec: &RayonExecutor) -> Cell {
    let outcomes: Vec<RunOutcome> = repeat_dataset(&variant.base_config(), data, 20, exec).expect("runs");
    let agg = aggregate(&outcomes).expect("20 runs");
    Cell {
        mean_accuracy: agg.avg_accuracy,
        mean_selected: agg.avg_selected_percent,
        mean_fitness: agg.avg_fitness,
    }
}

fn c8_reproduction(
    exec: &RayonExecutor,
    zoo_cells: &mut HashMap<Variant, Cell>,
) -> Verdict {
    let targets = [
        ("breastcancer", (9, 699, 2), 0.93, Some(60.0)),
        ("zoo", (16, 101, 7), 0.95, None),
        ("wineew", (13, 178, 3), 0.95, None),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (name, shape, min_acc, max_selected) in targets {
        let (data, got_shape) = load(name);
        if got_shape != shape {
            pass = false;
            lines.push(format!("{name}: shape {got_shape:?} != {shape:?}"));
            continue;
        }
        for variant in Variant::ECWSA {
            let start = Instant::now();
            let c = cell(&data, variant, exec);
            let ok = c.mean_accuracy >= min_acc && max_selected.is_none_or(|m| c.mean_selected <= m);
            pass &= ok;
            lines.push(format!(
                "{name}/{variant}: acc {:.2}% (need >= {:.1}%), selected {:.1}%{} [{}] {:.0}s",
                100.0 * c.mean_accuracy,
                100.0 * min_acc,
                c.mean_selected,
                max_selected.map_or(String::new(), |m| format!(" (need <= {m:.0}%)")),
                if ok { "ok" } else { "miss" },
                start.elapsed().as_secs_f64()
            ));
            if name == "zoo" {
                zoo_cells.insert(variant, c);
            }
        }
    }
    verdict(pass, format!("20 runs each\n      {}", lines.join("\n      ")))
}

fn c9_ablation(zoo: &Dataset, exec: &RayonExecutor, zoo_cells: &HashMap<Variant, Cell>) -> Verdict {
    let baseline = cell(zoo, Variant::WoaBaseline, exec);
    let full = &zoo_cells[&Variant::Ecwsa1];
    let others: Vec<String> = Variant::ECWSA[1..]
        .iter()
        .map(|v| format!("{v} {:.5}", zoo_cells[v].mean_fitness))
        .collect();
    verdict(
        full.mean_fitness >= baseline.mean_fitness,
        format!(
            "Zoo mean best fitness: ecwsa-1 {:.5} vs woa-baseline {:.5} (others: {})",
            full.mean_fitness,
            baseline.mean_fitness,
            others.join(", ")
        ),
    )
}

fn without_timing(text: &str) -> String {
    let mut value: serde_json::Value = serde_json::from_str(text).expect("report json");
    value.as_object_mut().expect("object").remove("timing");
    serde_json::to_string_pretty(&value).expect("json")
}

fn strip_timing_bytes(bytes: &[u8]) -> &[u8] {
    let marker = b",\n  \"timing\"";
    bytes
        .windows(marker.len())
        .position(|w| w == marker)
        .map_or(bytes, |at| &bytes[..at])
}

fn c10_determinism() -> Verdict {
    let tmp = tempfile::tempdir().expect("tempdir");
    let dataset = data_dir().join("zoo.csv");
    let mut reports = Vec::new();
    for threads in ["1", "8"] {
        let out = tmp.path().join(format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_ecwsa"))
            .args(["run", "--variant", "ecwsa-2", "--seed", "7", "--dataset"])
            .arg(&dataset)
            .arg("--out")
            .arg(&out)
            .env("ECWSA_THREADS", threads)
            .output()
            .expect("spawn ecwsa");
        if !status.status.success() {
            return verdict(false, format!("ecwsa exited with {}: {}", status.status, String::from_utf8_lossy(&status.stderr)));
        }
        reports.push((
            std::fs::read(out.join("report.json")).expect("report"),
            std::fs::read(out.join("convergence.csv")).expect("convergence"),
        ));
    }
    let (a, b) = (&reports[0], &reports[1]);
    let bytes_equal = strip_timing_bytes(&a.0) == strip_timing_bytes(&b.0);
    let json_equal = without_timing(&String::from_utf8_lossy(&a.0)) == without_timing(&String::from_utf8_lossy(&b.0));
    let csv_equal = a.1 == b.1;
    verdict(
        bytes_equal && json_equal && csv_equal,
        format!("ECWSA_THREADS=1 vs 8: report bytes equal {bytes_equal}, parsed equal {json_equal}, convergence equal {csv_equal}"),
    )
}

fn main() {
    let strict = std::env::var("ECWSA_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let exec = RayonExecutor::from_env().expect("executor");
    let (zoo, _) = load("zoo");
    let mut zoo_cells = HashMap::new();

    let mut results: Vec<(u8, &str, bool, Verdict)> = Vec::new();
    let mut record = |id: u8, name: &'static str, soft: bool, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        println!(
            "criterion {id:>2} {name:<28} {}{} ({:.1}s): {}",
            if v.pass { "PASS" } else { "FAIL" },
            if soft && !v.pass { " [soft]" } else { "" },
            start.elapsed().as_secs_f64(),
            v.detail
        );
        results.push((id, name, soft, v));
    };

    record(1, "chaotic map values", false, &mut c1_chaos_maps);
    record(2, "population schedule", false, &mut c2_schedule);
    record(3, "evaluation-count bound", false, &mut c3_evaluation_bound);
    record(4, "MI oracle", false, &mut c4_mutual_information);
    record(5, "mRMR oracle", false, &mut c5_mrmr);
    record(6, "KNN oracle", false, &mut c6_knn);
    record(7, "monotone convergence", false, &mut || c7_monotone(&zoo, &exec));
    record(8, "benchmark reproduction", true, &mut || c8_reproduction(&exec, &mut zoo_cells));
    record(9, "ablation vs baseline", true, &mut || c9_ablation(&zoo, &exec, &zoo_cells));
    record(10, "thread-count determinism", false, &mut c10_determinism);

    let hard_failures = results.iter().filter(|(_, _, soft, v)| !v.pass && (!soft || strict)).count();
    let soft_failures = results.iter().filter(|(_, _, soft, v)| !v.pass && *soft).count();
    let passed = results.iter().filter(|(_, _, _, v)| v.pass).count();
    println!(
        "acceptance: {passed}/{} passed, {soft_failures} soft failure(s){}",
        results.len(),
        if strict { " (strict mode)" } else { "" }
    );
    if hard_failures > 0 {
        std::process::exit(1);
    }
}

//! Exit-gate suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::sync::Barrier;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pbfs::bench::{select_sources, SourcePolicy};
use pbfs::frontier::{
    array_to_bitmap, bitmap_to_array, BitmapFrontier, DenseFrontier, LocalFrontier,
};
use pbfs::graph::{
    build_csr, compute_stats, generate, load_binary_csr, save_binary_csr, CsrGraph, GeneratorKind,
    GeneratorSpec, GraphCategory, DEFAULT_CLASSIFIER_THRESHOLD,
};
use pbfs::instrumentation::{average_duplicate_percentage, time_run, Phase};
use pbfs::kernels::{
    bfs_conventional, bfs_hybrid, bfs_nonatomic, bfs_serial, run_kernel, KernelConfig, Variant,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn gen(kind: GeneratorKind, scale: u32, edge_factor: u32, seed: u64) -> CsrGraph {
    generate(&GeneratorSpec {
        kind,
        scale,
        edge_factor,
        seed,
    })
    .expect("generator")
}

fn path_graph(n: u32) -> CsrGraph {
    let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
    build_csr(&edges, n as usize, true).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, i: u64) -> CsrGraph {
    let kind = if i.is_multiple_of(2) {
        GeneratorKind::UniformRandom
    } else {
        GeneratorKind::Kronecker
    };
    let scale = rng.gen_range(4..=12);
    let edge_factor = rng.gen_range(1..=16);
    gen(kind, scale, edge_factor, rng.gen())
}

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1);
    let mut runs = 0usize;
    for i in 0..200u64 {
        let g = random_graph(&mut rng, i);
        let sources = select_sources(
            &g,
            &SourcePolicy::RandomNonZeroDegree {
                count: 5,
                seed: rng.gen(),
            },
        )
        .map_err(|e| e.to_string())?;
        for &s in &sources {
            let want = bfs_serial(&g, s).unwrap();
            for v in Variant::PARALLEL {
                for workers in [1, 2, 8] {
                    let (got, _) = run_kernel(&g, s, &KernelConfig::new(v, workers))
                        .map_err(|e| format!("graph {i}: {e}"))?;
                    if let Some((vertex, got, want)) = got.first_mismatch(&want) {
                        return Err(format!(
                            "graph {i} {v} t={workers} source {s}: vertex {vertex} got {got} want {want}"
                        ));
                    }
                    runs += 1;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    if elapsed > Duration::from_secs(300) {
        return Err(format!(
            "{runs} runs agree but took {elapsed:.1?} (> 300 s)"
        ));
    }
    Ok(format!(
        "{runs} runs on 200 graphs agree with the oracle in {elapsed:.1?}"
    ))
}

fn equal_value_race_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC2);
    let mut violations = 0u64;
    for i in 0..50u64 {
        let g = random_graph(&mut rng, i);
        let source = g.non_isolated().next().unwrap_or(0);
        let mut config = KernelConfig::new(Variant::NonAtomic, 8);
        config.check_races = true;
        let (dist, trace) = bfs_nonatomic(&g, source, &config).map_err(|e| e.to_string())?;
        if dist != bfs_serial(&g, source).unwrap() {
            return Err(format!("graph {i}: distances differ from the oracle"));
        }
        violations += trace.race_violations;
    }
    if violations == 0 {
        Ok("50 graphs, 0 conflicting stores".into())
    } else {
        Err(format!("{violations} conflicting stores"))
    }
}

/// A `clique_size`-clique on vertices `0..clique_size` with a path of
/// `tail` vertices hanging off vertex `clique_size - 1`.
fn lollipop(clique_size: u32, tail: u32) -> CsrGraph {
    let mut edges = Vec::new();
    for u in 0..clique_size {
        for v in u + 1..clique_size {
            edges.push((u, v));
        }
    }
    for i in 0..tail {
        edges.push((clique_size - 1 + i, clique_size + i));
    }
    build_csr(&edges, (clique_size + tail) as usize, true).unwrap()
}

fn duplicate_metrics() -> Outcome {
    // (a) paths are duplicate-free under every variant.
    for n in [2u32, 10, 500] {
        let g = path_graph(n);
        for v in Variant::PARALLEL {
            let (_, trace) = run_kernel(&g, 0, &KernelConfig::new(v, 8)).unwrap();
            let pct = average_duplicate_percentage(&trace).unwrap();
            if pct != 0.0 {
                return Err(format!("(a) path {n} {v}: {pct}% duplicates"));
            }
        }
    }

    // (b) dense uniform graphs, scale 12.
    let mut worst = 0.0f64;
    for seed in 0..4 {
        let g = gen(GeneratorKind::UniformRandom, 12, 16, seed);
        let stats = compute_stats(&g, DEFAULT_CLASSIFIER_THRESHOLD).unwrap();
        if stats.average_degree < 16.0 {
            return Err(format!("(b) average degree {} < 16", stats.average_degree));
        }
        let (_, trace) = bfs_nonatomic(&g, 0, &KernelConfig::new(Variant::NonAtomic, 8)).unwrap();
        worst = worst.max(average_duplicate_percentage(&trace).unwrap());
    }
    if worst >= 5.0 {
        return Err(format!("(b) NonAtomic duplicates {worst:.3}% >= 5%"));
    }

    // (c) the small tail frontiers must carry a higher duplicate fraction
    // than the large clique frontier.
    let g = lollipop(1 << 10, 1000);
    let mut clique_fraction = 0.0f64;
    let mut tail_fraction = 0.0f64;
    let config = KernelConfig::new(Variant::NonAtomic, 8);
    for source in [0u32, 511, 1024 + 999] {
        let (_, trace) = bfs_nonatomic(&g, source, &config).unwrap();
        let largest = trace
            .records
            .iter()
            .max_by_key(|r| r.frontier_size)
            .unwrap();
        clique_fraction = clique_fraction.max(largest.duplicate_fraction().unwrap_or(0.0));
        let small: Vec<f64> = trace
            .records
            .iter()
            .filter(|r| r.frontier_size <= 2)
            .filter_map(|r| r.duplicate_fraction())
            .collect();
        let mean = small.iter().sum::<f64>() / small.len().max(1) as f64;
        tail_fraction = tail_fraction.max(mean);
    }
    let detail = format!(
        "(a) 0% on paths, (b) worst {worst:.3}%, (c) tail {:.3}% vs clique {:.3}%",
        100.0 * tail_fraction,
        100.0 * clique_fraction
    );
    if tail_fraction > clique_fraction {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn frontier_sets(trace: &pbfs::instrumentation::TraversalTrace) -> Vec<Vec<u32>> {
    trace.frontiers.clone().expect("captured")
}

fn direction_switch() -> Outcome {
    let started = Instant::now();
    let g = gen(GeneratorKind::Kronecker, 16, 16, 1);
    let source =
        select_sources(&g, &SourcePolicy::RandomNonZeroDegree { count: 1, seed: 4 }).unwrap()[0];
    let (dist, hybrid) = bfs_hybrid(&g, source, &KernelConfig::new(Variant::Hybrid, 8)).unwrap();
    if dist != bfs_serial(&g, source).unwrap() {
        return Err("hybrid distances differ from the oracle".into());
    }
    let bu = hybrid.levels_in(Phase::BottomUp);
    if bu == 0 {
        return Err("no bottom-up level".into());
    }
    let (_, conv) =
        bfs_conventional(&g, source, &KernelConfig::new(Variant::Conventional, 8)).unwrap();
    let (he, ce) = (hybrid.total_edges_examined(), conv.total_edges_examined());
    if he >= ce {
        return Err(format!("hybrid examined {he} edges, conventional {ce}"));
    }
    let mut full = KernelConfig::new(Variant::Hybrid, 8);
    full.hybrid_threshold_fraction = 1.0;
    full.capture_frontiers = true;
    let (_, td_hybrid) = bfs_hybrid(&g, source, &full).unwrap();
    let mut na = KernelConfig::new(Variant::NonAtomic, 8);
    na.capture_frontiers = true;
    let (_, nonatomic) = bfs_nonatomic(&g, source, &na).unwrap();
    if frontier_sets(&td_hybrid) != frontier_sets(&nonatomic) {
        return Err("threshold 1.0 frontier sets differ from NonAtomic".into());
    }
    let elapsed = started.elapsed();
    if elapsed > Duration::from_secs(30) {
        return Err(format!("took {elapsed:.1?} (> 30 s)"));
    }
    Ok(format!(
        "{bu} bottom-up level(s), edges {he} < {ce}, frontier sets equal, {elapsed:.1?}"
    ))
}

/// `n` vertices with `slots` directed edges: a bidirected ring plus chords.
fn graph_with_degree_slots(n: u32, slots: u32) -> CsrGraph {
    let mut edges = Vec::new();
    let mut offset = 1;
    while (edges.len() as u32) < slots {
        for u in 0..n {
            if edges.len() as u32 == slots {
                break;
            }
            edges.push((u, (u + offset) % n));
        }
        offset += 1;
    }
    build_csr(&edges, n as usize, false).unwrap()
}

fn classifier_vectors() -> Outcome {
    let cases = [
        (
            graph_with_degree_slots(100, 266),
            2.66,
            GraphCategory::LargeDiameter,
        ),
        (
            graph_with_degree_slots(100, 251),
            2.51,
            GraphCategory::LargeDiameter,
        ),
        (
            graph_with_degree_slots(64, 64 * 15),
            15.0,
            GraphCategory::SmallDiameter,
        ),
        (
            graph_with_degree_slots(64, 64 * 26),
            26.0,
            GraphCategory::SmallDiameter,
        ),
    ];
    let mut seen = Vec::new();
    for (g, avg, want) in cases {
        let stats = compute_stats(&g, DEFAULT_CLASSIFIER_THRESHOLD).unwrap();
        if (stats.average_degree - avg).abs() > 1e-9 || stats.category != want {
            return Err(format!(
                "average degree {} classified {} (want {avg} -> {want})",
                stats.average_degree, stats.category
            ));
        }
        seen.push(format!("{avg} -> {}", stats.category));
    }
    Ok(seen.join(", "))
}

fn performance_once(g: &CsrGraph, source: u32) -> Outcome {
    let median = |v: Variant, workers: usize| {
        time_run(g, source, &KernelConfig::new(v, workers), 10, 1).map(|t| t.median)
    };
    let conv = median(Variant::Conventional, 8).map_err(|e| e.to_string())?;
    let hybrid = median(Variant::Hybrid, 8).map_err(|e| e.to_string())?;
    let serial = median(Variant::Serial, 1).map_err(|e| e.to_string())?;
    let r_hybrid = hybrid.as_secs_f64() / conv.as_secs_f64();
    let r_conv = conv.as_secs_f64() / serial.as_secs_f64();
    let detail = format!(
        "hybrid/conventional {r_hybrid:.3} (<= 1.1), conventional@8/serial {r_conv:.3} (<= 0.5)"
    );
    if r_hybrid <= 1.1 && r_conv <= 0.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn performance_sanity() -> Outcome {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let g = gen(GeneratorKind::Kronecker, 18, 16, 1);
    let source =
        select_sources(&g, &SourcePolicy::RandomNonZeroDegree { count: 1, seed: 6 }).unwrap()[0];
    let result = performance_once(&g, source).or_else(|first| {
        performance_once(&g, source).map_err(|second| format!("{first}; retry: {second}"))
    });
    let host = format!("{threads} hardware thread(s)");
    match result {
        Ok(d) => Ok(format!("{d}; {host}")),
        Err(d) => Err(format!("{d}; {host}, criterion assumes >= 8")),
    }
}

fn frontier_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC7);
    for i in 0..1000 {
        let n = rng.gen_range(1..2000usize);
        let mut set: BTreeSet<u32> = BTreeSet::new();
        let k = rng.gen_range(0..=n);
        for _ in 0..k {
            set.insert(rng.gen_range(0..n as u32));
        }
        let members: Vec<u32> = set.into_iter().collect();
        let dense = DenseFrontier::from_slice(&members, n);
        let bm = BitmapFrontier::new(n);
        array_to_bitmap(&dense, &bm);
        let back = DenseFrontier::with_capacity(n);
        bitmap_to_array(&bm, &back).map_err(|e| e.to_string())?;
        if back.to_vec() != members || bm.population() != members.len() {
            return Err(format!("roundtrip {i} lost or invented vertices"));
        }
    }

    for schedule in 0..100u64 {
        let mut srng = ChaCha8Rng::seed_from_u64(schedule);
        let locals: Vec<Vec<u32>> = (0..8)
            .map(|_| {
                let len = srng.gen_range(0..300);
                (0..len).map(|_| srng.gen_range(0..50)).collect()
            })
            .collect();
        let total: usize = locals.iter().map(Vec::len).sum();
        let global = DenseFrontier::with_capacity(total);
        let start = Barrier::new(8);
        std::thread::scope(|s| {
            for (w, items) in locals.iter().enumerate() {
                let (global, start) = (&global, &start);
                s.spawn(move || {
                    let mut rng = ChaCha8Rng::seed_from_u64(schedule * 8 + w as u64);
                    start.wait();
                    let mut local = LocalFrontier::with_capacity(16);
                    for &v in items {
                        local.push(v);
                        if rng.gen_bool(0.1) {
                            global.reserve_and_flush(&mut local).unwrap();
                            if rng.gen_bool(0.5) {
                                std::thread::yield_now();
                            }
                        }
                    }
                    global.reserve_and_flush(&mut local).unwrap();
                });
            }
        });
        let mut got = global.to_vec();
        let mut want: Vec<u32> = locals.concat();
        got.sort_unstable();
        want.sort_unstable();
        if got != want {
            return Err(format!("schedule {schedule} changed the multiset"));
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC8);
    for i in 0..20u64 {
        let g = random_graph(&mut rng, i);
        let a = dir.path().join(format!("{i}a.csr"));
        let b = dir.path().join(format!("{i}b.csr"));
        save_binary_csr(&g, &a).map_err(|e| e.to_string())?;
        let loaded = load_binary_csr(&a).map_err(|e| e.to_string())?;
        save_binary_csr(&loaded, &b).map_err(|e| e.to_string())?;
        if loaded != g || std::fs::read(&a).unwrap() != std::fs::read(&b).unwrap() {
            return Err(format!("binary roundtrip {i} not byte-identical"));
        }
    }
    Ok("1000 bitmap roundtrips, 100 flush schedules, 20 binary roundtrips".into())
}

fn pbfs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pbfs"))
        .args(args)
        .env_remove("BFS_THREADS")
        .output()
        .expect("spawn pbfs")
}

fn cli_contract() -> Outcome {
    let started = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let csr = dir.path().join("k10.csr");
    let csr_s = csr.to_str().unwrap();
    let out = pbfs(&["generate", "--gen", "kron:10:16:3", "--out", csr_s]);
    if !out.status.success() {
        return Err(format!("generate exited {:?}", out.status.code()));
    }
    let ok = pbfs(&[
        "verify",
        "--graph",
        csr_s,
        "--sources",
        "16",
        "--threads",
        "1,2,8",
    ]);
    if ok.status.code() != Some(0) {
        return Err(format!("verify exited {:?}", ok.status.code()));
    }
    let bad = pbfs(&[
        "verify",
        "--graph",
        csr_s,
        "--sources",
        "4",
        "--threads",
        "2",
        "--corrupt-vertex",
        "7",
    ]);
    let stderr = String::from_utf8_lossy(&bad.stderr);
    if bad.status.code() != Some(1) || !stderr.contains("vertex=7") {
        return Err(format!(
            "corrupted verify exited {:?}: {stderr}",
            bad.status.code()
        ));
    }
    let missing = pbfs(&["verify", "--graph", "/nonexistent/graph.el"]);
    if missing.status.code() != Some(3) {
        return Err(format!("missing input exited {:?}", missing.status.code()));
    }
    let out_dir = dir.path().join("run");
    let run = pbfs(&[
        "run",
        "--graph",
        csr_s,
        "--variants",
        "conventional,hybrid,non-atomic",
        "--sources",
        "4",
        "--threads",
        "1,2",
        "--trials",
        "2",
        "--warmups",
        "0",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    if !run.status.success() {
        return Err(format!("run exited {:?}", run.status.code()));
    }
    let rows = count_rows(&out_dir.join("results.csv"))?;
    if rows != 3 * 4 * 2 {
        return Err(format!("results.csv has {rows} rows, want 24"));
    }
    let elapsed = started.elapsed();
    if elapsed > Duration::from_secs(60) {
        return Err(format!("took {elapsed:.1?} (> 60 s)"));
    }
    Ok(format!(
        "exit codes 0/1/3 as expected, 24 result rows, {elapsed:.1?}"
    ))
}

fn count_rows(path: &Path) -> Result<usize, String> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
    Ok(reader.records().count())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("equal-value race check", equal_value_race_check),
        ("duplicate metrics", duplicate_metrics),
        ("direction switching", direction_switch),
        ("classifier vectors", classifier_vectors),
        ("performance sanity", performance_sanity),
        ("frontier structure properties", frontier_properties),
        ("cli contract", cli_contract),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("[{tag}] {}. {name}: {detail}", i + 1);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Acceptance suite: one PASS/FAIL/SKIP line per criterion.
//!
//! Criterion 5 needs the three benchmark datasets as CSV files
//! (`diabetes.csv`, `mice.csv`, `pendigits.csv`) in `$ULTRAFIT_DATA_DIR`;
//! without them it reports SKIP.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ultrafit::cli::read_points;
use ultrafit::cutweight::{approximate_cut_weights, exact_cut_weights};
use ultrafit::dendro::Dendrogram;
use ultrafit::eval::distortion;
use ultrafit::linkage::{agglomerate, LinkageMethod};
use ultrafit::mst::{exact_mst, kt_factor};
use ultrafit::pipeline::{approx_acc_ult, approx_ult, brute_force_opt_alpha, farach_exact, fit};
use ultrafit::{Algorithm, PointSet, SpannerConfig};

type Criterion = (&'static str, fn() -> Outcome);

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn random_instance(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointSet {
    PointSet::uniform_cube(n, d, rng.random()).unwrap()
}

fn oracle_optimality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for i in 0..200 {
        let n = rng.random_range(3..=7);
        let d = [1, 2, 8][rng.random_range(0..3)];
        let p = random_instance(&mut rng, n, d);
        let exact = distortion(&p, &farach_exact(&p).unwrap().dendrogram, false)
            .unwrap()
            .max;
        let opt = brute_force_opt_alpha(&p).unwrap();
        let gap = (exact - opt).abs() / opt;
        worst = worst.max(gap);
        if gap > 1e-9 {
            return Outcome::Fail(format!("instance {i} (n={n}, d={d}): exact {exact} vs oracle {opt}"));
        }
    }
    Outcome::Pass(format!("200 instances, worst relative gap {worst:.1e}"))
}

fn five_estimate_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 1.0f64;
    let mut edges = 0;
    for i in 0..50 {
        let n = rng.random_range(2..=500);
        let d = [2, 8, 32][i % 3];
        let p = random_instance(&mut rng, n, d);
        let tree = exact_mst(&p);
        let cw = exact_cut_weights(&p, &tree);
        let acw = approximate_cut_weights(&p, &tree);
        for (k, (&c, &a)) in cw.as_slice().iter().zip(acw.as_slice()).enumerate() {
            edges += 1;
            if a < c * (1.0 - 1e-9) || a > 5.0 * c * (1.0 + 1e-9) {
                return Outcome::Fail(format!("instance {i} edge {k}: CW {c}, ACW {a}"));
            }
            worst = worst.max(a / c);
        }
    }
    Outcome::Pass(format!("{edges} MST edges, max ACW/CW {worst:.3}"))
}

fn certificate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut tightest = 0.0f64;
    let mut worst_gamma = 1.0f64;
    for i in 0..50 {
        let n = rng.random_range(2..=1000);
        let d = rng.random_range(1..=16);
        let p = random_instance(&mut rng, n, d);
        let r = approx_ult(&p, &SpannerConfig::with_gamma(2.0, i)).unwrap();
        let gamma = kt_factor(&p, r.tree.as_ref().unwrap());
        worst_gamma = worst_gamma.max(gamma);
        let opt = distortion(&p, &farach_exact(&p).unwrap().dendrogram, false)
            .unwrap()
            .max;
        let bound = 5.0 * gamma * opt;
        for u in 0..n {
            for v in u + 1..n {
                let w = p.dist(u, v);
                let delta = r.dendrogram.ultra_distance(u, v).unwrap();
                if delta < w {
                    return Outcome::Fail(format!("instance {i}: Delta({u},{v}) = {delta} < w = {w}"));
                }
                if delta > bound * w {
                    return Outcome::Fail(format!("instance {i}: Delta/w = {} > 5*{gamma}*{opt}", delta / w));
                }
                tightest = tightest.max(delta / (bound * w));
            }
        }
    }
    Outcome::Pass(format!(
        "50 instances, max gamma_emp {worst_gamma:.3}, max Delta/(5 gamma_emp alpha_opt w) {tightest:.3}"
    ))
}

fn violates_strong_triangle(d: &Dendrogram) -> Option<(usize, usize, usize)> {
    let n = d.num_leaves();
    let h = |a, b| d.ultra_distance(a, b).unwrap();
    for x in 0..n {
        for y in x + 1..n {
            let xy = h(x, y);
            for z in y + 1..n {
                let (xz, yz) = (h(x, z), h(y, z));
                let slack = 1.0 + 1e-12;
                if xy > xz.max(yz) * slack || xz > xy.max(yz) * slack || yz > xy.max(xz) * slack {
                    return Some((x, y, z));
                }
            }
        }
    }
    None
}

fn ultrametric_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut fits = 0;
    for (n, d) in [(2, 3), (40, 2), (150, 8), (300, 5)] {
        let p = random_instance(&mut rng, n, d);
        for a in Algorithm::ALL {
            let r = fit(&p, a, &SpannerConfig::with_gamma(2.0, n as u64)).unwrap();
            if let Some((x, y, z)) = violates_strong_triangle(&r.dendrogram) {
                return Outcome::Fail(format!("{a} on n={n}: triple ({x},{y},{z})"));
            }
            fits += 1;
        }
    }
    Outcome::Pass(format!("{fits} fits, all triples up to n=300"))
}

struct Dataset {
    name: &'static str,
    file: &'static str,
    exact: f64,
    single: f64,
    average: f64,
    complete: f64,
    ward: f64,
}

const DATASETS: [Dataset; 3] = [
    Dataset {
        name: "DIABETES",
        file: "diabetes.csv",
        exact: 6.0,
        single: 6.0,
        average: 11.1,
        complete: 18.5,
        ward: 61.0,
    },
    Dataset {
        name: "MICE",
        file: "mice.csv",
        exact: 4.9,
        single: 4.9,
        average: 9.7,
        complete: 11.8,
        ward: 59.3,
    },
    Dataset {
        name: "PENDIGITS",
        file: "pendigits.csv",
        exact: 13.9,
        single: 14.0,
        average: 27.5,
        complete: 33.8,
        ward: 433.8,
    },
];

fn reference_table(dir: &Path) -> Outcome {
    let mut notes = String::new();
    let mut failures = Vec::new();
    for ds in &DATASETS {
        let points = match read_points(&dir.join(ds.file)) {
            Ok(p) => p.dedupe().0,
            Err(e) => return Outcome::Fail(format!("{}: {e}", ds.name)),
        };
        let normalized = |d: &Dendrogram| distortion(&points, d, true).unwrap().max;
        let exact = normalized(&farach_exact(&points).unwrap().dendrogram);
        let mut check = |label: &str, got: f64, want: f64, tol: f64| {
            let _ = write!(notes, " {}:{label}={got:.2}", ds.name);
            if !rel_close(got, want, tol) {
                failures.push(format!("{} {label} {got:.3} vs {want} (+-{}%)", ds.name, tol * 100.0));
            }
        };
        check("exact", exact, ds.exact, 0.02);
        for (method, want, tol) in [
            (LinkageMethod::Single, ds.single, 0.02),
            (LinkageMethod::Average, ds.average, 0.02),
            (LinkageMethod::Complete, ds.complete, 0.02),
            (LinkageMethod::Ward, ds.ward, 0.10),
        ] {
            check(
                method.name(),
                normalized(&agglomerate(&points, method).unwrap()),
                want,
                tol,
            );
        }
        let r = approx_ult(&points, &SpannerConfig::with_gamma(2.5, 0)).unwrap();
        let gamma = kt_factor(&points, r.tree.as_ref().unwrap());
        let approx = distortion(&points, &r.dendrogram, false).unwrap().max;
        let _ = write!(notes, " {}:approx={approx:.2}", ds.name);
        if approx > 5.0 * gamma * exact * (1.0 + 1e-12) {
            failures.push(format!("{} approx {approx:.3} above 5*{gamma:.3}*{exact:.3}", ds.name));
        }
        let acc = distortion(&points, &approx_acc_ult(&points).unwrap().dendrogram, false)
            .unwrap()
            .max;
        let _ = write!(notes, " {}:acc={acc:.2}", ds.name);
        if acc > 5.0 * exact * (1.0 + 1e-12) {
            failures.push(format!("{} acc {acc:.3} above 5*{exact:.3}", ds.name));
        }
    }
    if failures.is_empty() {
        Outcome::Pass(notes.trim().to_string())
    } else {
        Outcome::Fail(failures.join("; "))
    }
}

fn table_reproduction() -> Outcome {
    let Some(dir) = std::env::var_os("ULTRAFIT_DATA_DIR").map(PathBuf::from) else {
        return Outcome::Skip("set ULTRAFIT_DATA_DIR to a directory with diabetes.csv, mice.csv, pendigits.csv".into());
    };
    if let Some(missing) = DATASETS.iter().find(|ds| !dir.join(ds.file).exists()) {
        return Outcome::Skip(format!("{} not found in {}", missing.file, dir.display()));
    }
    reference_table(&dir)
}

/// Minimum wall time of each closure over `runs` interleaved rounds, so that
/// drifting machine load hits both sides alike.
fn min_times<const K: usize>(runs: usize, mut jobs: [&mut dyn FnMut(); K]) -> [Duration; K] {
    let mut best = [Duration::MAX; K];
    for _ in 0..runs {
        for (job, best) in jobs.iter_mut().zip(best.iter_mut()) {
            let start = Instant::now();
            job();
            *best = (*best).min(start.elapsed());
        }
    }
    best
}

fn subquadratic_scaling() -> Outcome {
    let cfg = SpannerConfig::with_gamma(2.5, 0);
    let small = PointSet::uniform_cube(10_000, 16, 10).unwrap();
    let large = PointSet::uniform_cube(20_000, 16, 20).unwrap();
    let [t_small, t_large] = min_times(
        5,
        [&mut || drop(approx_ult(&small, &cfg).unwrap()), &mut || {
            drop(approx_ult(&large, &cfg).unwrap())
        }],
    );
    let growth = t_large.as_secs_f64() / t_small.as_secs_f64();

    let pendigits_scale = PointSet::uniform_cube(10_992, 16, 30).unwrap();
    let [t_approx, t_average] = min_times(
        2,
        [&mut || drop(approx_ult(&pendigits_scale, &cfg).unwrap()), &mut || {
            drop(agglomerate(&pendigits_scale, LinkageMethod::Average).unwrap())
        }],
    );
    let speedup = t_average.as_secs_f64() / t_approx.as_secs_f64();

    let detail = format!(
        "n=10k {:.3}s, n=20k {:.3}s (x{growth:.2}); n=10992 approx {:.3}s vs average {:.3}s (x{speedup:.1})",
        t_small.as_secs_f64(),
        t_large.as_secs_f64(),
        t_approx.as_secs_f64(),
        t_average.as_secs_f64()
    );
    if growth < 3.0 && speedup >= 5.0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn without_timings(sidecar: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(sidecar).unwrap();
    v.as_object_mut().unwrap().remove("stage_timings_ms");
    v
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().unwrap();
    let bin = env!("CARGO_BIN_EXE_ultrafit");
    let input = dir.path().join("points.csv");
    let gen = Command::new(bin)
        .args(["gen", "--n", "1500", "--d", "12", "--seed", "5", "--out"])
        .arg(&input)
        .output()
        .unwrap();
    if !gen.status.success() {
        return Outcome::Fail("could not generate input".into());
    }
    let configs: [&[&str]; 4] = [
        &["--algo", "approx", "--seed", "7", "--format", "merges"],
        &[
            "--algo",
            "approx",
            "--seed",
            "9",
            "--gamma",
            "2.5",
            "--format",
            "newick",
            "--normalize",
        ],
        &["--algo", "acc", "--format", "json"],
        &["--algo", "average", "--format", "merges"],
    ];
    for config in configs {
        let mut outputs = Vec::new();
        for (run, threads) in ["1", "2", "4"].iter().enumerate() {
            let out = dir.path().join(format!("out{run}"));
            let status = Command::new(bin)
                .arg("fit")
                .arg("--input")
                .arg(&input)
                .args(config)
                .arg("--out")
                .arg(&out)
                .env("ULTRAFIT_THREADS", threads)
                .output()
                .unwrap();
            if !status.status.success() {
                return Outcome::Fail(format!(
                    "{config:?} failed: {}",
                    String::from_utf8_lossy(&status.stderr)
                ));
            }
            let tree = std::fs::read(&out).unwrap();
            let stats = std::fs::read(ultrafit::cli::sidecar_path(&out)).unwrap();
            outputs.push((tree, without_timings(&stats)));
        }
        if !outputs.windows(2).all(|w| w[0] == w[1]) {
            return Outcome::Fail(format!("{config:?} differs across runs"));
        }
    }
    Outcome::Pass("4 configurations x 3 runs (ULTRAFIT_THREADS=1,2,4) byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("1 oracle optimality", oracle_optimality),
        ("2 five-estimate bound", five_estimate_bound),
        ("3 approximation certificate", certificate),
        ("4 ultrametric validity", ultrametric_validity),
        ("5 reference table", table_reproduction),
        ("6 sub-quadratic scaling", subquadratic_scaling),
        ("7 determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(detail) => println!("PASS criterion {name}: {detail} [{secs:.1}s]"),
            Outcome::Skip(detail) => println!("SKIP criterion {name}: {detail}"),
            Outcome::Fail(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

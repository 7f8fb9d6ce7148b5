//! Wall time of the approximate pipeline as n grows.
//!
//! cargo run --release --example scaling -- 10000 20000

use std::time::Instant;

use ultrafit::pipeline::{approx_ult, fit, Algorithm};
use ultrafit::{PointSet, SpannerConfig};

fn main() {
    let sizes: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let sizes = if sizes.is_empty() {
        vec![5000, 10000, 20000]
    } else {
        sizes
    };
    let config = SpannerConfig::with_gamma(2.5, 0);
    for n in sizes {
        let points = PointSet::uniform_cube(n, 16, n as u64).expect("points");
        let start = Instant::now();
        let r = approx_ult(&points, &config).expect("fit");
        let total = start.elapsed().as_secs_f64();
        let stages: Vec<String> = r.timings.iter().map(|t| format!("{}={:.0}ms", t.stage, t.ms)).collect();
        println!(
            "n={n} approx {total:.3}s edges={} {}",
            r.spanner_edges.unwrap_or(0),
            stages.join(" ")
        );
        if std::env::var_os("WITH_AVERAGE").is_some() {
            let start = Instant::now();
            fit(&points, Algorithm::Average, &config).expect("fit");
            println!("n={n} average {:.3}s", start.elapsed().as_secs_f64());
        }
    }
}

//! Refits the convergence rates of a trace CSV written by the `sagefista` binary.
//!
//! `cargo run --example trace_report -- out/trace.csv`

use std::path::PathBuf;

use sagefista::harness::{fit_rates, read_trace_csv};

fn main() -> sagefista::Result<()> {
    let Some(path) = std::env::args().nth(1).map(PathBuf::from) else {
        eprintln!("usage: trace_report <trace.csv>");
        std::process::exit(2);
    };
    let trace = read_trace_csv(&path)?;
    let fits = fit_rates(&trace)?;
    let last = trace.last().unwrap();
    println!("rows: {}  final eF: {:.3e}  inner iterations: {}", trace.len(), last.rel_error, trace.total_inner_iters());
    println!("log eF vs k      slope {:.4e} (factor {:.5} per iteration)", fits.loglinear_slope, fits.loglinear_slope.exp());
    println!("log eF vs log k  slope {:.3}", fits.loglog_slope);
    if let Some(r) = fits.max_tail_ratio {
        println!("largest tail ratio eF_k+1 / eF_k: {r:.5}");
    }
    println!("growth of k^2 eF over the tail: {:.3}", fits.k2_growth);
    Ok(())
}

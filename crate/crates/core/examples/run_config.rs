//! Driving the experiment harness from flat `key=value` text, the same format the
//! binary reads with `--config`.

use sagefista::harness::{parse_config_text, run_experiment, RunConfig};

const CONFIG: &str = "
# scaled vs non-scaled moon denoising at desk scale
problem=wl2tv-denoise
input=moon
scale=24
range=0,20
lambda=0.15
mu_f=auto
L0=30
maxiter=150
metric=split
s1=100
s2=1.1
";

fn main() -> sagefista::Result<()> {
    let out = std::env::temp_dir().join("sagefista-run-config");
    let mut pairs = parse_config_text(CONFIG)?;
    pairs.push(("out".into(), out.display().to_string()));
    let config = RunConfig::from_pairs(&pairs)?;
    let outcome = run_experiment(&config)?;
    print!("{}", outcome.summary.render());
    print!("{}", outcome.report.render());
    println!("artifacts in {}", out.display());
    Ok(())
}

//! A small run of the comparative-backtest simulation study. The full design
//! uses hundreds of replications; this keeps it to a few.

use syrisk::experiments::{run_mc_dm, StudyConfig};

fn main() -> syrisk::Result<()> {
    let cfg = StudyConfig { replications: 8, n: 250, window: 750, ..Default::default() };
    let r = run_mc_dm(&cfg)?;
    r.write_csv(std::io::stdout())?;
    eprintln!("failed replications: {}", r.failed_replications);
    Ok(())
}

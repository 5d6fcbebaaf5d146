//! Significance levels of the one-and-a-half-sided test.
//!
//! `cargo run --example level_corrections`

use syrisk::dm::adjust_level;

fn main() -> syrisk::Result<()> {
    println!("{:>6} {:>10} {:>10} {:>10}", "nu", "nu_tilde", "chi2_crit", "nu_prime");
    for nu in [0.01, 0.025, 0.05, 0.1] {
        let l = adjust_level(nu)?;
        println!("{:>6.3} {:>10.5} {:>10.4} {:>10.5}", l.nu, l.nu_tilde, l.chi2_crit, l.nu_prime);
    }
    Ok(())
}

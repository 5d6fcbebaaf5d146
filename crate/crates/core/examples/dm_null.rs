//! Size of the two-sided test under i.i.d. normal score differences.

use syrisk::experiments::run_dm_null_check;

fn main() -> syrisk::Result<()> {
    let r = run_dm_null_check(1000, 2000, 3, 0.05)?;
    println!("n = {}, R = {}: rejection {:.4}, KS distance to chi2(2) {:.4}", r.n, r.replications, r.rejection.rate, r.ks_distance);
    Ok(())
}

//! Two laws with equal MES and CoVaR whose 50/50 mixture has neither value.

use syrisk::experiments::cxls_report;
use syrisk::measures::RiskLevels;

fn main() -> syrisk::Result<()> {
    let rho = 0.8;
    let r = cxls_report(rho, RiskLevels::new(0.95, 0.95)?)?;
    println!("rho = {rho}, alpha = beta = 0.95");
    println!("{:<7} {:>9} {:>9} {:>9} {:>9}", "", "F0", "F1", "mix", "mix(cdf)");
    for row in &r.rows {
        println!("{:<7} {:>9.4} {:>9.4} {:>9.4} {:>9.4}", row.measure, row.f0, row.f1, row.mixture, row.mixture_joint);
    }
    let (a, b) = r.mes_coefficients;
    println!("MES / rho: {a:.4} for the components, {b:.4} for the mixture");
    Ok(())
}

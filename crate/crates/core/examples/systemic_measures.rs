//! VaR, CoVaR, CoES and MES of a discrete law and of a Gaussian pair.

use syrisk::measures::{systemic_measure, AnalyticBivariate, Bivariate, DiscreteBivariate, RiskLevels, SystemicKind};

fn report(name: &str, dist: &Bivariate, levels: RiskLevels) -> syrisk::Result<()> {
    let var = dist.marginal_x()?.var_level(levels.beta)?;
    let covar = systemic_measure(SystemicKind::CoVaR, dist, levels)?;
    let coes = systemic_measure(SystemicKind::CoES, dist, levels)?;
    let mes = systemic_measure(SystemicKind::MES, dist, levels)?;
    println!("{name:<18} VaR {var:>8.4}  CoVaR {covar:>8.4}  CoES {coes:>8.4}  MES {mes:>8.4}");
    Ok(())
}

fn main() -> syrisk::Result<()> {
    // five equally likely scenarios (x, y, p)
    let atoms = vec![(0.0, 0.0, 0.2), (1.0, 1.0, 0.2), (2.0, 0.5, 0.2), (3.0, 4.0, 0.2), (4.0, 2.0, 0.2)];
    let disc = Bivariate::Discrete(DiscreteBivariate::new(atoms)?);
    report("discrete", &disc, RiskLevels::new(0.5, 0.6)?)?;

    let levels = RiskLevels::new(0.95, 0.95)?;
    for rho in [0.0, 0.5, 0.8] {
        let pair = Bivariate::Analytic(AnalyticBivariate::std_normal_pair(rho));
        report(&format!("normal rho={rho}"), &pair, levels)?;
    }
    Ok(())
}

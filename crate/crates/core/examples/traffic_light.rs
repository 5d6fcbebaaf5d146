//! Comparative backtest of two forecast streams and the traffic-light zone.
//! Writes the figure to the system temp directory.

use syrisk::dm::{comparative_backtest, dm_two_sided, hac_cov, score_diff_series, Kernel};
use syrisk::experiments::reference_dgp;
use syrisk::forecast::{fixed_window_forecasts, Measure};
use syrisk::measures::RiskLevels;
use syrisk::models::ModelSpec;
use syrisk::numerics::rng_stream;
use syrisk::report::traffic_svg;
use syrisk::scoring::{Functional, ScoreSpec};

fn main() -> syrisk::Result<()> {
    let levels = RiskLevels::new(0.95, 0.95)?;
    let data = reference_dgp(1500, &mut rng_stream(11, 0))?;
    let test = data.slice(1000, 1500);
    let measures = [Measure::VaR, Measure::CoVaR];
    let (_, bench) = fixed_window_forecasts(&data, 1000, levels, &measures, &ModelSpec::default())?;
    // challenger: the same VaR with a CoVaR that is 20% too low
    let internal: Vec<_> = bench.iter().map(|f| {
        let mut g = *f;
        g.c = f.c.map(|c| 0.8 * c);
        g
    }).collect();

    let spec = ScoreSpec::zero_hom(Functional::VarCoVar);
    let d = score_diff_series(&bench, &internal, &test, &spec)?;
    let r = comparative_backtest(&d, 0, Kernel::Flat, 0.05)?;
    println!("identical VaR: dbar = ({:.2e}, {:.5}), {:?} statistic {:.3}, p = {:.4}", r.dbar.0, r.dbar.1, r.hypothesis, r.statistic, r.p_value);

    // a challenger whose VaR differs as well
    let shifted: Vec<_> = internal.iter().map(|f| {
        let mut g = *f;
        g.v *= 1.1;
        g
    }).collect();
    let d = score_diff_series(&bench, &shifted, &test, &spec)?;
    let r = comparative_backtest(&d, 0, Kernel::Flat, 0.05)?;
    let omega = hac_cov(&d, 0, Kernel::Flat)?;
    let two = dm_two_sided(&d, &omega)?;
    println!("distinct VaR: zone {:?}, T_os = {:.3} (p {:.4}), T_n = {:.3} (p {:.4})", r.zone.unwrap(), r.statistic, r.p_value, two.statistic, two.p_value);

    let path = std::env::temp_dir().join("syrisk_traffic.svg");
    std::fs::write(&path, traffic_svg(r.dbar, &omega, d.n(), 0.05, r.zone)?)?;
    println!("figure: {}", path.display());
    Ok(())
}

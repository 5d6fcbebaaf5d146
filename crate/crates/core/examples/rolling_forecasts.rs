//! Rolling-window systemic risk forecasts with a periodic refit.

use syrisk::experiments::reference_dgp;
use syrisk::forecast::{rolling_forecast, ForecastConfig, Measure};
use syrisk::measures::RiskLevels;
use syrisk::models::ModelSpec;
use syrisk::numerics::rng_stream;

fn main() -> syrisk::Result<()> {
    let data = reference_dgp(1250, &mut rng_stream(5, 0))?;
    let mut cfg = ForecastConfig::new(RiskLevels::new(0.95, 0.95)?, 1000);
    cfg.refit_every = 50;
    cfg.measures = vec![Measure::VaR, Measure::CoVaR, Measure::CoES, Measure::MES];
    let r = rolling_forecast(&data, &cfg, &ModelSpec::default())?;
    println!("{} forecasts, {} refits, {} failures", r.forecasts.len(), r.refits, r.failures.len());
    let mut hits = 0;
    for (k, f) in r.forecasts.iter().enumerate() {
        let Some(f) = f else { continue };
        let (x, _) = data.obs(1000 + k);
        hits += (x > f.v) as usize;
        if k < 5 {
            println!("{:>4}: VaR {:.4} CoVaR {:.4} CoES {:.4} MES {:.4}", r.dates[k], f.v, f.c.unwrap(), f.e.unwrap(), f.mu.unwrap());
        }
    }
    println!("VaR exceedances: {hits} of {} (expected {:.1})", r.forecasts.len(), 0.05 * r.forecasts.len() as f64);
    Ok(())
}

//! Simulate the GARCH / GAS t-copula model and recover its parameters.

use syrisk::models::{fit_model, simulate_dgp, CopulaFamily, GarchFamily, Innovation, ModelParamsDoc, ModelSpec};
use syrisk::numerics::rng_stream;

fn main() -> syrisk::Result<()> {
    let truth = ModelParamsDoc::reference();
    let sim = simulate_dgp(
        (truth.margin_x(), truth.margin_y()),
        truth.copula()?,
        (Innovation::StdNormal, Innovation::StandardizedT { df: 5.0 }),
        3000,
        &mut rng_stream(2024, 0),
    )?;
    let spec = ModelSpec { margin_x: GarchFamily::Garch, margin_y: GarchFamily::Garch, copula: CopulaFamily::StudentT };
    let fit = fit_model(&sim.series, &spec)?;
    let show = |name: &str, p: syrisk::models::GarchParams| {
        println!("{name}: omega {:.5} alpha {:.4} beta {:.4}", p.omega, p.alpha, p.beta);
    };
    show("true margin ", truth.margin_x());
    show("fitted x    ", fit.margin_x.params);
    show("fitted y    ", fit.margin_y.params);
    let c = fit.copula.params;
    let t = truth.copula()?;
    println!("copula true:   omega {:.4} alpha {:.4} beta {:.4} df {:?}", t.omega, t.alpha, t.beta, t.df);
    println!("copula fitted: omega {:.4} alpha {:.4} beta {:.4} df {:.2}", c.omega, c.alpha, c.beta, c.df.unwrap_or(f64::NAN));
    let next = fit.next_state();
    println!("next period: {next:?}");
    Ok(())
}

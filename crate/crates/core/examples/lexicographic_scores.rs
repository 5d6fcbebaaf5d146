//! Realized (VaR, CoVaR) scores and their lexicographic ranking.

use syrisk::measures::RiskLevels;
use syrisk::scoring::{lex_compare, mo_score, ForecastTuple, Functional, ScoreSpec};

fn main() -> syrisk::Result<()> {
    let levels = RiskLevels::new(0.9, 0.9)?;
    let spec = ScoreSpec::zero_hom(Functional::VarCoVar);
    let a = ForecastTuple::var_covar(1.3, 2.0, levels);
    let b = ForecastTuple::var_covar(1.3, 2.6, levels);
    let c = ForecastTuple::var_covar(1.5, 2.0, levels);
    let obs = [(0.2, -0.4), (1.8, 2.3), (1.4, 0.1), (-0.7, 0.9)];
    for (name, f) in [("a", &a), ("b", &b), ("c", &c)] {
        let (mut s1, mut s2) = (0.0, 0.0);
        for &o in &obs {
            let s = mo_score(f, o, &spec)?;
            s1 += s.s1;
            s2 += s.s2;
        }
        println!("{name}: v={:.2} c={:.2}  S_VaR={s1:.4}  S_CoVaR={s2:.4}", f.v, f.c.unwrap_or(f64::NAN));
    }
    let o = obs[1];
    let ord = lex_compare(&mo_score(&a, o, &spec)?, &mo_score(&b, o, &spec)?)?;
    println!("on {o:?}: a vs b = {ord:?}");
    Ok(())
}

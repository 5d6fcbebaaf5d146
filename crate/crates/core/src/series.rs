//! Paired loss series and the CSV formats for observations and forecasts.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::RiskLevels;
use crate::scoring::ForecastTuple;

/// Paired losses (x_t, y_t); x is the reference loss, y the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSeries {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub dates: Option<Vec<NaiveDate>>,
}

/// A data row dropped during ingestion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rejected {
    pub line: usize,
    pub reason: String,
}

impl LossSeries {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Validation(format!("x has {} entries but y has {}", x.len(), y.len())));
        }
        Ok(LossSeries { x, y, dates: None })
    }

    pub fn with_dates(mut self, dates: Vec<NaiveDate>) -> Result<Self> {
        if dates.len() != self.len() {
            return Err(Error::Validation("date column length differs from the series".into()));
        }
        self.dates = Some(dates);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn obs(&self, t: usize) -> (f64, f64) {
        (self.x[t], self.y[t])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.y.iter().copied())
    }

    pub fn slice(&self, from: usize, to: usize) -> LossSeries {
        LossSeries {
            x: self.x[from..to].to_vec(),
            y: self.y[from..to].to_vec(),
            dates: self.dates.as_ref().map(|d| d[from..to].to_vec()),
        }
    }

    pub fn scaled(&self, lambda: f64) -> LossSeries {
        LossSeries {
            x: self.x.iter().map(|v| v * lambda).collect(),
            y: self.y.iter().map(|v| v * lambda).collect(),
            dates: self.dates.clone(),
        }
    }

    /// Log-losses −log(P_t/P_{t−1}) from paired price levels; one period shorter.
    pub fn from_prices(px: &[f64], py: &[f64], dates: Option<Vec<NaiveDate>>) -> Result<Self> {
        if px.len() != py.len() || px.len() < 2 {
            return Err(Error::Validation("price columns need equal length of at least 2".into()));
        }
        if px.iter().chain(py).any(|p| !(*p > 0.0)) {
            return Err(Error::Validation("prices must be positive".into()));
        }
        let loss = |p: &[f64]| p.windows(2).map(|w| -(w[1] / w[0]).ln()).collect::<Vec<_>>();
        let mut s = LossSeries::new(loss(px), loss(py))?;
        if let Some(d) = dates {
            s = s.with_dates(d[1..].to_vec())?;
        }
        Ok(s)
    }

    pub fn date_label(&self, t: usize) -> String {
        self.dates.as_ref().map(|d| d[t].to_string()).unwrap_or_else(|| t.to_string())
    }
}

fn header_index(headers: &csv::StringRecord) -> HashMap<String, usize> {
    headers.iter().enumerate().map(|(i, h)| (h.trim().to_ascii_lowercase(), i)).collect()
}

fn parse_date(s: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s.trim(), "%Y-%m-%d").map_err(|e| format!("bad date '{s}': {e}"))
}

fn parse_num(s: &str, col: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("column {col}: '{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("column {col}: non-finite value"))
    }
}

/// Reads `date,x,y` (date optional). Rows with missing or non-finite values
/// are skipped and reported with their line numbers.
pub fn read_observations<R: Read>(rdr: R) -> Result<(LossSeries, Vec<Rejected>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
    let idx = header_index(rdr.headers()?);
    let (ix, iy) = match (idx.get("x"), idx.get("y")) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Validation("observation CSV needs x and y columns".into())),
    };
    let id = idx.get("date").copied();
    let (mut x, mut y, mut dates, mut rejected) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec?;
        let row = (|| {
            let vx = parse_num(rec.get(ix).unwrap_or(""), "x")?;
            let vy = parse_num(rec.get(iy).unwrap_or(""), "y")?;
            let d = id
                .and_then(|i| rec.get(i))
                .filter(|c| !c.trim().is_empty())
                .map(parse_date)
                .transpose()?;
            Ok::<_, String>((vx, vy, d))
        })();
        match row {
            Ok((vx, vy, d)) => {
                x.push(vx);
                y.push(vy);
                dates.push(d);
            }
            Err(reason) => rejected.push(Rejected { line, reason }),
        }
    }
    let mut s = LossSeries::new(x, y)?;
    // an all-empty date column means an undated file
    match dates.iter().filter(|d| d.is_some()).count() {
        0 => {}
        k if k == dates.len() => s = s.with_dates(dates.into_iter().flatten().collect())?,
        _ => return Err(Error::Validation("the date column is filled for some rows only".into())),
    }
    Ok((s, rejected))
}

pub fn read_observations_file(path: &Path, prices: bool) -> Result<(LossSeries, Vec<Rejected>)> {
    let (s, rej) = read_observations(std::fs::File::open(path)?)?;
    if prices {
        let dates = s.dates.clone();
        return Ok((LossSeries::from_prices(&s.x, &s.y, dates)?, rej));
    }
    Ok((s, rej))
}

pub fn write_observations<W: Write>(w: W, s: &LossSeries) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["date", "x", "y"])?;
    for t in 0..s.len() {
        let d = s.dates.as_ref().map(|d| d[t].to_string()).unwrap_or_default();
        wtr.write_record([d, s.x[t].to_string(), s.y[t].to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads `date,var,covar,coes,mes[,alpha,beta]`. Empty cells mean the
/// measure was not reported. Levels missing from the file come from `levels`.
pub fn read_forecasts<R: Read>(rdr: R, levels: Option<RiskLevels>) -> Result<(Vec<ForecastTuple>, Vec<Rejected>)> {
    let (rows, rejected) = read_dated_forecasts(rdr, levels)?;
    Ok((rows.into_iter().map(|r| r.1).collect(), rejected))
}

/// As [`read_forecasts`], keeping the date cell of each accepted row
/// (`None` when the file has no date column or the cell is empty).
pub fn read_dated_forecasts<R: Read>(
    rdr: R,
    levels: Option<RiskLevels>,
) -> Result<(Vec<(Option<String>, ForecastTuple)>, Vec<Rejected>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(rdr);
    let idx = header_index(rdr.headers()?);
    let iv = *idx.get("var").ok_or_else(|| Error::Validation("forecast CSV needs a var column".into()))?;
    let opt = |rec: &csv::StringRecord, name: &str| -> std::result::Result<Option<f64>, String> {
        match idx.get(name).and_then(|&i| rec.get(i)) {
            Some(s) if !s.trim().is_empty() => parse_num(s, name).map(Some),
            _ => Ok(None),
        }
    };
    let (mut out, mut rejected) = (Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = (|| {
            let v = parse_num(rec.get(iv).unwrap_or(""), "var")?;
            let lv = match (opt(&rec, "alpha")?, opt(&rec, "beta")?, levels) {
                (Some(alpha), Some(beta), _) => RiskLevels { alpha, beta },
                (_, _, Some(l)) => l,
                _ => return Err("no alpha/beta columns and no levels given".to_string()),
            };
            Ok(ForecastTuple { v, c: opt(&rec, "covar")?, e: opt(&rec, "coes")?, mu: opt(&rec, "mes")?, levels: lv })
        })();
        let date = idx.get("date").and_then(|&i| rec.get(i)).map(str::trim).filter(|d| !d.is_empty()).map(str::to_string);
        match row {
            Ok(f) => out.push((date, f)),
            Err(reason) => rejected.push(Rejected { line: k + 2, reason }),
        }
    }
    Ok((out, rejected))
}

pub fn write_forecasts<W: Write>(w: W, forecasts: &[Option<ForecastTuple>], dates: &[String]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["date", "var", "covar", "coes", "mes", "alpha", "beta"])?;
    let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for (f, d) in forecasts.iter().zip(dates) {
        match f {
            Some(f) => wtr.write_record([
                d.clone(),
                f.v.to_string(),
                cell(f.c),
                cell(f.e),
                cell(f.mu),
                f.levels.alpha.to_string(),
                f.levels.beta.to_string(),
            ])?,
            None => wtr.write_record([d.as_str(), "", "", "", "", "", ""])?,
        }
    }
    wtr.flush()?;
    Ok(())
}

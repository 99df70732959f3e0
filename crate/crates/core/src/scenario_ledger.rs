//! Green/Red global limits, admissible emissions, credits, debts, debt
//! margins and RED percentages, annually or summed over a window.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::Serialize;

use crate::data_model::{BillionUsd, CountryId, CountryPanel, MtCo2e, ScenarioCurve, Year};
use crate::error::{Error, Result};
use crate::indicators::{IndicatorTable, ZNormalization};

pub const GREEN_LABEL: &str = "GB1";
pub const RED_LABEL: &str = "RA1B";
pub const RAW_GREEN_LABEL: &str = "B1_AIM_CO2";
pub const RAW_RED_LABEL: &str = "A1B_AIM_CO2";

fn base_year() -> Year {
    Year::new(1990).expect("valid year")
}

fn rebase(raw: &ScenarioCurve, em_world_1990: MtCo2e, label: &str) -> Result<ScenarioCurve> {
    let base = raw
        .knot(base_year())
        .ok_or_else(|| Error::MissingBaseYear {
            label: raw.label().to_string(),
        })?;
    let points = raw
        .points()
        .iter()
        .map(|(y, v)| (*y, em_world_1990 + 2.0 * (v - base)))
        .collect();
    ScenarioCurve::new(label, points)
}

/// Green limit from the raw B1 series: `em_1990 + 2 (b1_y - b1_1990)`.
pub fn build_green(raw_b1: &ScenarioCurve, em_world_1990: MtCo2e) -> Result<ScenarioCurve> {
    rebase(raw_b1, em_world_1990, GREEN_LABEL)
}

/// Red limit from the raw A1B series, same construction as the green one.
pub fn build_red(raw_a1b: &ScenarioCurve, em_world_1990: MtCo2e) -> Result<ScenarioCurve> {
    rebase(raw_a1b, em_world_1990, RED_LABEL)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalScenarios {
    pub green: ScenarioCurve,
    pub red: ScenarioCurve,
    pub em_world_1990: Option<MtCo2e>,
}

impl GlobalScenarios {
    /// Wraps prebuilt curves after checking `red >= green` and the common 1990 anchor.
    pub fn new(green: ScenarioCurve, red: ScenarioCurve) -> Result<Self> {
        let mut years: Vec<Year> = green
            .points()
            .iter()
            .chain(red.points())
            .map(|(y, _)| *y)
            .collect();
        years.sort();
        years.dedup();
        for y in years.into_iter().filter(|y| *y >= base_year()) {
            if let (Ok(g), Ok(r)) = (green.value_at(y), red.value_at(y)) {
                if r < g {
                    return Err(Error::InvalidCurve {
                        label: red.label().to_string(),
                        message: format!("red limit {r} below green limit {g} in {y}"),
                    });
                }
            }
        }
        let em_world_1990 = match (green.knot(base_year()), red.knot(base_year())) {
            (Some(g), Some(r)) if (g - r).abs() > 1e-9 * g.abs().max(1.0) => {
                return Err(Error::InvalidCurve {
                    label: red.label().to_string(),
                    message: format!("1990 anchors differ: green {g}, red {r}"),
                })
            }
            (Some(g), Some(_)) => Some(g),
            _ => None,
        };
        Ok(GlobalScenarios {
            green,
            red,
            em_world_1990,
        })
    }

    pub fn from_raw(
        raw_b1: &ScenarioCurve,
        raw_a1b: &ScenarioCurve,
        em_world_1990: MtCo2e,
    ) -> Result<Self> {
        Self::new(
            build_green(raw_b1, em_world_1990)?,
            build_red(raw_a1b, em_world_1990)?,
        )
    }

    /// Picks prebuilt `GB1`/`RA1B` curves, or builds them from raw AIM series
    /// when `em_world_1990` is given.
    pub fn from_curves(
        curves: &BTreeMap<String, ScenarioCurve>,
        em_world_1990: Option<MtCo2e>,
    ) -> Result<Self> {
        if let (Some(g), Some(r)) = (curves.get(GREEN_LABEL), curves.get(RED_LABEL)) {
            return Self::new(g.clone(), r.clone());
        }
        let raw = |label: &str| {
            curves
                .get(label)
                .ok_or_else(|| Error::UnknownScenario(label.to_string()))
        };
        let b1 = raw(RAW_GREEN_LABEL)?;
        let a1b = raw(RAW_RED_LABEL)?;
        let em90 = em_world_1990.ok_or_else(|| {
            Error::InvalidConfig("raw scenario series need the 1990 world emissions".into())
        })?;
        Self::from_raw(b1, a1b, em90)
    }

    pub fn limits(&self, year: Year) -> Result<Limits> {
        Limits::new(self.green.value_at(year)?, self.red.value_at(year)?, year)
    }

    /// Limits summed over every year of the window.
    pub fn cumulative_limits(&self, from: Year, to: Year) -> Result<Limits> {
        if to < from {
            return Err(Error::InvalidConfig(format!("empty window {from}-{to}")));
        }
        Limits::new(
            self.green.sum_over(from, to)?,
            self.red.sum_over(from, to)?,
            to,
        )
    }
}

/// Green and red limits that apply to one ledger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Limits {
    pub green: MtCo2e,
    pub red: MtCo2e,
}

impl Limits {
    pub fn new(green: MtCo2e, red: MtCo2e, year: Year) -> Result<Self> {
        if green.is_nan() || green <= 0.0 {
            return Err(Error::DegenerateGreenLimit(year));
        }
        Ok(Limits { green, red })
    }
}

/// IHDIGDP share of the green limit.
pub fn admissible(
    ihdigdp: Option<BillionUsd>,
    world_ihdigdp: BillionUsd,
    green: MtCo2e,
) -> Option<MtCo2e> {
    Some(ihdigdp? / world_ihdigdp * green)
}

/// `(credit, debt)`; at most one of them is nonzero.
pub fn credit_debt(em: Option<MtCo2e>, admem: Option<MtCo2e>) -> Option<(MtCo2e, MtCo2e)> {
    let (em, admem) = (em?, admem?);
    Some(if em < admem {
        (admem - em, 0.0)
    } else if em > admem {
        (0.0, em - admem)
    } else {
        (0.0, 0.0)
    })
}

/// The country's slice of the red-minus-green gap.
pub fn debt_margin(admem: MtCo2e, limits: &Limits) -> MtCo2e {
    admem / limits.green * (limits.red - limits.green)
}

/// `trunc(100 * debt / margin)`, and 0 without debt.
pub fn red_percentage(debt: MtCo2e, margin: MtCo2e) -> Result<i64> {
    if debt <= 0.0 {
        return Ok(0);
    }
    if margin.is_nan() || margin <= 0.0 {
        return Err(Error::ZeroMarginWithDebt { debt, margin });
    }
    Ok((100.0 * debt / margin).trunc() as i64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub country: CountryId,
    pub year: Year,
    pub em: Option<MtCo2e>,
    pub ihdigdp: Option<BillionUsd>,
    pub admem: Option<MtCo2e>,
    pub credit: Option<MtCo2e>,
    pub debt: Option<MtCo2e>,
    pub margin: Option<MtCo2e>,
    pub red_pct: Option<i64>,
}

/// Per-country activity and emissions feeding a ledger.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerInput {
    pub country: CountryId,
    pub ihdigdp: Option<BillionUsd>,
    pub em: Option<MtCo2e>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ledger {
    pub year: Year,
    /// Set for cumulative ledgers.
    pub window: Option<(Year, Year)>,
    pub limits: Limits,
    pub world_ihdigdp: BillionUsd,
    pub rows: Vec<LedgerRow>,
}

impl Ledger {
    /// Allocates `limits.green` by IHDIGDP share and settles every country.
    pub fn compute(year: Year, inputs: &[LedgerInput], limits: Limits) -> Result<Self> {
        let world_ihdigdp: f64 = inputs.iter().filter_map(|i| i.ihdigdp).sum();
        if world_ihdigdp.is_nan() || world_ihdigdp <= 0.0 {
            return Err(Error::EmptyYear(year));
        }
        let mut rows = Vec::with_capacity(inputs.len());
        for input in inputs {
            let admem = admissible(input.ihdigdp, world_ihdigdp, limits.green);
            let settled = credit_debt(input.em, admem);
            let margin = admem.map(|a| debt_margin(a, &limits));
            let red_pct = match (settled, margin) {
                (Some((_, debt)), Some(m)) => Some(red_percentage(debt, m)?),
                _ => None,
            };
            rows.push(LedgerRow {
                country: input.country.clone(),
                year,
                em: input.em,
                ihdigdp: input.ihdigdp,
                admem,
                credit: settled.map(|s| s.0),
                debt: settled.map(|s| s.1),
                margin,
                red_pct,
            });
        }
        Ok(Ledger {
            year,
            window: None,
            limits,
            world_ihdigdp,
            rows,
        })
    }

    pub fn row(&self, country: &CountryId) -> Option<&LedgerRow> {
        self.rows.iter().find(|r| &r.country == country)
    }
}

/// Annual ledger against the limits of the table's year.
pub fn annual_ledger(table: &IndicatorTable, scenarios: &GlobalScenarios) -> Result<Ledger> {
    let inputs: Vec<LedgerInput> = table
        .rows
        .iter()
        .map(|r| LedgerInput {
            country: r.country.clone(),
            ihdigdp: r.ihdigdp,
            em: r.em,
        })
        .collect();
    Ledger::compute(table.year, &inputs, scenarios.limits(table.year)?)
}

/// Per-country emissions and IHDIGDP summed over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTotals {
    pub from: Year,
    pub to: Year,
    pub rows: Vec<LedgerInput>,
}

impl CumulativeTotals {
    /// Sums annual indicator tables. A country missing a value in any year of
    /// the window gets a missing total for that quantity.
    pub fn from_panel(
        panel: &CountryPanel,
        z: &ZNormalization,
        from: Year,
        to: Year,
    ) -> Result<Self> {
        if to < from {
            return Err(Error::InvalidConfig(format!("empty window {from}-{to}")));
        }
        let mut sums: BTreeMap<CountryId, (Option<f64>, Option<f64>)> = BTreeMap::new();
        for (k, y) in (from.value()..=to.value()).enumerate() {
            let table = IndicatorTable::compute(panel, Year::new(y)?, z)?;
            let mut seen: BTreeMap<CountryId, (Option<f64>, Option<f64>)> = table
                .rows
                .into_iter()
                .map(|r| (r.country, (r.em, r.ihdigdp)))
                .collect();
            if k == 0 {
                sums = seen;
                continue;
            }
            for (country, (em, act)) in sums.iter_mut() {
                let (e, a) = seen.remove(country).unwrap_or((None, None));
                *em = em.zip(e).map(|(s, v)| s + v);
                *act = act.zip(a).map(|(s, v)| s + v);
            }
            // countries first observed after the window start are incomplete
            for (country, _) in seen {
                sums.insert(country, (None, None));
            }
        }
        let rows = sums
            .into_iter()
            .map(|(country, (em, ihdigdp))| LedgerInput {
                country,
                ihdigdp,
                em,
            })
            .collect();
        Ok(CumulativeTotals { from, to, rows })
    }

    /// Reads precomputed totals: `country,cum_em_mtco2e,cum_ihdigdp_busd`.
    pub fn read<R: Read>(reader: R, from: Year, to: Year) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header: Vec<String> = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        if header != ["country", "cum_em_mtco2e", "cum_ihdigdp_busd"] {
            return Err(Error::MalformedHeader(header.join(",")));
        }
        let mut rows = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
            let num = |i: usize| -> Result<Option<f64>> {
                let v = record
                    .get(i)
                    .unwrap_or("")
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan());
                match v {
                    Some(x) if x < 0.0 => Err(Error::NegativeQuantity {
                        field: header[i].clone(),
                        row,
                    }),
                    _ => Ok(v),
                }
            };
            let country = record.get(0).unwrap_or("").trim();
            if country.is_empty() {
                return Err(Error::InvalidValue {
                    row,
                    message: "empty country".into(),
                });
            }
            rows.push(LedgerInput {
                country: CountryId::new(country),
                em: num(1)?,
                ihdigdp: num(2)?,
            });
        }
        rows.sort_by(|a, b| a.country.cmp(&b.country));
        if let Some(w) = rows.windows(2).find(|w| w[0].country == w[1].country) {
            return Err(Error::DuplicateObservation {
                country: w[0].country.to_string(),
                year: to,
                row: 0,
            });
        }
        Ok(CumulativeTotals { from, to, rows })
    }

    pub fn load(path: impl AsRef<Path>, from: Year, to: Year) -> Result<Self> {
        Self::read(File::open(path)?, from, to)
    }
}

/// Applies the annual equations to window totals.
pub fn cumulative_ledger_from_totals(
    totals: &CumulativeTotals,
    scenarios: &GlobalScenarios,
) -> Result<Ledger> {
    let limits = scenarios.cumulative_limits(totals.from, totals.to)?;
    let mut ledger = Ledger::compute(totals.to, &totals.rows, limits)?;
    ledger.window = Some((totals.from, totals.to));
    Ok(ledger)
}

pub fn cumulative_ledger(
    panel: &CountryPanel,
    z: &ZNormalization,
    scenarios: &GlobalScenarios,
    from: Year,
    to: Year,
) -> Result<Ledger> {
    cumulative_ledger_from_totals(
        &CumulativeTotals::from_panel(panel, z, from, to)?,
        scenarios,
    )
}

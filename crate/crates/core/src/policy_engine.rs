//! Border carbon taxes, pairwise differential taxes, world ETS summary and
//! the quantity-only trading ledger with its land-use-first rule.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::data_model::{CountryId, CountryPanel, MtCo2e, Year};
use crate::error::{Error, Result};
use crate::scenario_ledger::{red_percentage, Ledger};

pub const DEFAULT_RED_BCT: f64 = 100.0;

/// Border carbon tax in percent, full precision.
pub fn bct(red_pct: i64, red_bct: f64) -> f64 {
    red_pct as f64 / red_bct
}

/// Tax rounded to one decimal for display. Rounds from the integer RED so
/// that e.g. 1,235 / 100 shows as 12.4.
pub fn display_bct(red_pct: i64, red_bct: f64) -> f64 {
    (red_pct as f64 * 10.0 / red_bct).round() / 10.0
}

fn check_red_bct(red_bct: f64) -> Result<()> {
    if red_bct.is_finite() && red_bct > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "red_bct must be positive, got {red_bct}"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaxEntry {
    pub red_pct: i64,
    pub bct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaxSchedule {
    /// Year the tax applies in, one after the ledger it is derived from.
    pub year: Year,
    pub red_bct: f64,
    pub entries: BTreeMap<CountryId, TaxEntry>,
}

impl TaxSchedule {
    /// Countries with a RED value in `ledger` get a tax; the rest are left out.
    pub fn from_ledger(ledger: &Ledger, red_bct: f64) -> Result<Self> {
        check_red_bct(red_bct)?;
        let entries = ledger
            .rows
            .iter()
            .filter_map(|r| {
                Some((
                    r.country.clone(),
                    TaxEntry {
                        red_pct: r.red_pct?,
                        bct: bct(r.red_pct?, red_bct),
                    },
                ))
            })
            .collect();
        Ok(TaxSchedule {
            year: ledger.year.offset(1)?,
            red_bct,
            entries,
        })
    }

    pub fn bct(&self, country: &CountryId) -> Option<f64> {
        self.entries.get(country).map(|e| e.bct)
    }

    pub fn display_bct(&self, country: &CountryId) -> Option<f64> {
        self.entries
            .get(country)
            .map(|e| display_bct(e.red_pct, self.red_bct))
    }
}

/// Extra tax an importer levies on an exporter's goods, clamped at zero.
pub fn differential_bct(
    schedule: &TaxSchedule,
    importer: &CountryId,
    exporter: &CountryId,
) -> Result<f64> {
    let lookup = |c: &CountryId| {
        schedule
            .entries
            .get(c)
            .ok_or_else(|| Error::UnknownCountry {
                country: c.to_string(),
                transfer: None,
            })
    };
    let (imp, exp) = (lookup(importer)?, lookup(exporter)?);
    Ok(((exp.red_pct - imp.red_pct) as f64 / schedule.red_bct).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldEtsSummary {
    pub year: Year,
    pub world_em: MtCo2e,
    pub green_limit: MtCo2e,
    pub red_limit: MtCo2e,
    pub total_allowed: MtCo2e,
    pub total_debt: MtCo2e,
    pub total_credit: MtCo2e,
    pub unrecoverable_debt: MtCo2e,
}

pub fn world_summary(ledger: &Ledger) -> Result<WorldEtsSummary> {
    let ems: Vec<f64> = ledger.rows.iter().filter_map(|r| r.em).collect();
    if ems.is_empty() {
        return Err(Error::EmptyYear(ledger.year));
    }
    let total_debt: f64 = ledger.rows.iter().filter_map(|r| r.debt).sum();
    let total_credit: f64 = ledger.rows.iter().filter_map(|r| r.credit).sum();
    Ok(WorldEtsSummary {
        year: ledger.year,
        world_em: ems.iter().sum(),
        green_limit: ledger.limits.green,
        red_limit: ledger.limits.red,
        total_allowed: ledger.limits.green,
        total_debt,
        total_credit,
        unrecoverable_debt: (total_debt - total_credit).max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransferTarget {
    Landuse,
    Emission,
}

impl std::str::FromStr for TransferTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "landuse" => Ok(TransferTarget::Landuse),
            "emission" => Ok(TransferTarget::Emission),
            other => Err(format!("unknown transfer target `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transfer {
    pub seq: u64,
    pub seller: CountryId,
    pub buyer: CountryId,
    pub amount: MtCo2e,
    pub target: TransferTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtsPosition {
    pub country: CountryId,
    pub credit: MtCo2e,
    pub debt: MtCo2e,
    pub landuse_debt: MtCo2e,
    /// Credit bought so far.
    pub cleared: MtCo2e,
}

impl EtsPosition {
    pub fn new(
        country: impl Into<CountryId>,
        credit: MtCo2e,
        debt: MtCo2e,
        landuse_debt: MtCo2e,
    ) -> Self {
        EtsPosition {
            country: country.into(),
            credit,
            debt,
            landuse_debt,
            cleared: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EtsPositions {
    positions: BTreeMap<CountryId, EtsPosition>,
}

impl EtsPositions {
    pub fn new(positions: impl IntoIterator<Item = EtsPosition>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (row, p) in positions.into_iter().enumerate() {
            for (field, v) in [
                ("credit", p.credit),
                ("debt", p.debt),
                ("landuse_debt", p.landuse_debt),
                ("cleared", p.cleared),
            ] {
                if !v.is_finite() {
                    return Err(Error::InvalidValue {
                        row,
                        message: format!("{field} is not finite"),
                    });
                }
                if v < 0.0 {
                    return Err(Error::NegativeQuantity {
                        field: field.into(),
                        row,
                    });
                }
            }
            if map.contains_key(&p.country) {
                return Err(Error::InvalidValue {
                    row,
                    message: format!("duplicate position for {}", p.country),
                });
            }
            map.insert(p.country.clone(), p);
        }
        Ok(EtsPositions { positions: map })
    }

    /// Opening positions from a ledger. Land-use debt is the positive part of
    /// each country's land-use emissions in the ledger year, when a panel is given.
    pub fn from_ledger(ledger: &Ledger, panel: Option<&CountryPanel>) -> Self {
        let positions = ledger
            .rows
            .iter()
            .filter_map(|r| {
                let landuse = panel
                    .and_then(|p| p.get(&r.country, ledger.year))
                    .and_then(|o| o.landuse_em)
                    .unwrap_or(0.0)
                    .max(0.0);
                Some((
                    r.country.clone(),
                    EtsPosition::new(r.country.clone(), r.credit?, r.debt?, landuse),
                ))
            })
            .collect();
        EtsPositions { positions }
    }

    pub fn get(&self, country: &CountryId) -> Option<&EtsPosition> {
        self.positions.get(country)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EtsPosition> {
        self.positions.values()
    }

    pub fn total_credit(&self) -> f64 {
        self.iter().map(|p| p.credit).sum()
    }

    pub fn total_cleared(&self) -> f64 {
        self.iter().map(|p| p.cleared).sum()
    }

    pub fn total_debt(&self) -> f64 {
        self.iter().map(|p| p.debt).sum()
    }

    /// RED of every position against the margins of `ledger`.
    pub fn recompute_red(&self, ledger: &Ledger) -> Result<BTreeMap<CountryId, i64>> {
        let mut out = BTreeMap::new();
        for p in self.iter() {
            if let Some(margin) = ledger.row(&p.country).and_then(|r| r.margin) {
                out.insert(p.country.clone(), red_percentage(p.debt, margin)?);
            }
        }
        Ok(out)
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        expect_header(rdr.headers()?, &POSITION_HEADER)?;
        let mut positions = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let row = line(&record);
            let num = |i: usize| parse_required(&record, i, POSITION_HEADER[i], row);
            positions.push(EtsPosition {
                country: parse_country(&record, 0, row)?,
                credit: num(1)?,
                debt: num(2)?,
                landuse_debt: num(3)?,
                cleared: num(4)?,
            });
        }
        Self::new(positions)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(File::open(path)?)
    }

    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(POSITION_HEADER)?;
        for p in self.iter() {
            wtr.write_record([
                p.country.to_string(),
                p.credit.to_string(),
                p.debt.to_string(),
                p.landuse_debt.to_string(),
                p.cleared.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

const POSITION_HEADER: [&str; 5] = ["country", "credit", "debt", "landuse_debt", "cleared"];
const TRANSFER_HEADER: [&str; 5] = ["seq", "seller", "buyer", "amount_mtco2e", "target"];

fn line(record: &csv::StringRecord) -> usize {
    record.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn expect_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected {
        return Err(Error::MalformedHeader(format!(
            "expected `{}`, found `{}`",
            expected.join(","),
            found.join(",")
        )));
    }
    Ok(())
}

fn parse_required(record: &csv::StringRecord, i: usize, field: &str, row: usize) -> Result<f64> {
    record
        .get(i)
        .unwrap_or("")
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidValue {
            row,
            message: format!("{field} is not a number"),
        })
}

fn parse_country(record: &csv::StringRecord, i: usize, row: usize) -> Result<CountryId> {
    match record.get(i).map(str::trim) {
        Some(c) if !c.is_empty() => Ok(CountryId::new(c)),
        _ => Err(Error::InvalidValue {
            row,
            message: "empty country".into(),
        }),
    }
}

/// Transfers in file order.
pub fn read_transfers<R: Read>(reader: R) -> Result<Vec<Transfer>> {
    let mut rdr = csv::Reader::from_reader(reader);
    expect_header(rdr.headers()?, &TRANSFER_HEADER)?;
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let row = line(&record);
        let seq = record
            .get(0)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| Error::InvalidValue {
                row,
                message: "seq is not an integer".into(),
            })?;
        let target = record
            .get(4)
            .unwrap_or("")
            .parse()
            .map_err(|message| Error::InvalidValue { row, message })?;
        out.push(Transfer {
            seq,
            seller: parse_country(&record, 1, row)?,
            buyer: parse_country(&record, 2, row)?,
            amount: parse_required(&record, 3, "amount_mtco2e", row)?,
            target,
        });
    }
    Ok(out)
}

pub fn load_transfers(path: impl AsRef<Path>) -> Result<Vec<Transfer>> {
    read_transfers(File::open(path)?)
}

/// Applies transfers in order, failing on the first rejected one. Errors
/// carry the zero-based position of that transfer in `transfers`.
pub fn ets_clear(positions: &EtsPositions, transfers: &[Transfer]) -> Result<EtsPositions> {
    let mut book = positions.clone();
    for (index, t) in transfers.iter().enumerate() {
        if !(t.amount.is_finite() && t.amount > 0.0) {
            return Err(Error::InvalidTransfer {
                transfer: index,
                message: format!("amount {} must be positive", t.amount),
            });
        }
        if t.seller == t.buyer {
            return Err(Error::InvalidTransfer {
                transfer: index,
                message: format!("{} trades with itself", t.seller),
            });
        }
        for c in [&t.seller, &t.buyer] {
            if !book.positions.contains_key(c) {
                return Err(Error::UnknownCountry {
                    country: c.to_string(),
                    transfer: Some(index),
                });
            }
        }
        let seller = &book.positions[&t.seller];
        if seller.credit < t.amount {
            return Err(Error::InsufficientCredit {
                transfer: index,
                seller: t.seller.to_string(),
                available: seller.credit,
                requested: t.amount,
            });
        }
        let buyer = &book.positions[&t.buyer];
        if t.target == TransferTarget::Emission && buyer.landuse_debt > 0.0 {
            return Err(Error::LandUseDebtOutstanding {
                transfer: index,
                buyer: t.buyer.to_string(),
                landuse_debt: buyer.landuse_debt,
            });
        }
        book.positions.get_mut(&t.seller).expect("checked").credit -= t.amount;
        let buyer = book.positions.get_mut(&t.buyer).expect("checked");
        match t.target {
            TransferTarget::Landuse => {
                buyer.landuse_debt = (buyer.landuse_debt - t.amount).max(0.0)
            }
            TransferTarget::Emission => buyer.debt = (buyer.debt - t.amount).max(0.0),
        }
        buyer.cleared += t.amount;
    }
    Ok(book)
}

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{CountryId, CountryObservation, CountryPanel, GasInventory, ScenarioCurve, Year};
use crate::error::{Error, Result};

pub const PANEL_HEADER: [&str; 10] = [
    "country",
    "year",
    "gdp_ppp_busd",
    "population",
    "ihdi",
    "co2_mtco2e",
    "ch4_mtco2e",
    "nox_mtco2e",
    "hps_mtco2e",
    "landuse_mtco2e",
];

pub const SCENARIO_HEADER: [&str; 3] = ["label", "year", "value_mtco2e"];

/// Global warming potentials used to convert native gas masses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GwpTable {
    pub co2: f64,
    pub ch4: f64,
    pub nox: f64,
    pub hps: f64,
}

impl Default for GwpTable {
    fn default() -> Self {
        GwpTable {
            co2: 1.0,
            ch4: 23.0,
            nox: 296.0,
            hps: 1.0,
        }
    }
}

/// How the gas columns of a panel file are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PanelFormat {
    #[default]
    Co2Equivalent,
    /// Native megatonnes of each gas, converted with the given potentials.
    NativeMass(GwpTable),
}

fn check_header(found: &csv::StringRecord, expected: &[&str]) -> Result<()> {
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

fn parse_number(cell: &str, field: &str, row: usize) -> Option<f64> {
    let cell = cell.trim();
    if cell.is_empty() {
        return None;
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_nan() => None,
        Ok(v) => Some(v),
        Err(_) => {
            log::warn!("row {row}: unparseable {field} `{cell}` treated as missing");
            None
        }
    }
}

fn parse_year(cell: &str, row: usize) -> Result<Year> {
    let v: i32 = cell.trim().parse().map_err(|_| Error::InvalidValue {
        row,
        message: format!("year `{cell}` is not an integer"),
    })?;
    Year::new(v).map_err(|_| Error::InvalidValue {
        row,
        message: format!("year {v} out of range"),
    })
}

fn parse_country(cell: &str, row: usize) -> Result<CountryId> {
    let code = cell.trim();
    if code.is_empty() {
        return Err(Error::InvalidValue {
            row,
            message: "empty country".into(),
        });
    }
    Ok(CountryId::new(code))
}

pub fn load_panel(path: impl AsRef<Path>, format: PanelFormat) -> Result<CountryPanel> {
    read_panel(File::open(path)?, format)
}

pub fn read_panel<R: Read>(reader: R, format: PanelFormat) -> Result<CountryPanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    check_header(rdr.headers()?, &PANEL_HEADER)?;
    let gwp = match format {
        PanelFormat::Co2Equivalent => GwpTable {
            co2: 1.0,
            ch4: 1.0,
            nox: 1.0,
            hps: 1.0,
        },
        PanelFormat::NativeMass(g) => g,
    };
    let mut panel = CountryPanel::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != PANEL_HEADER.len() {
            return Err(Error::InvalidValue {
                row,
                message: format!(
                    "expected {} fields, found {}",
                    PANEL_HEADER.len(),
                    record.len()
                ),
            });
        }
        let num = |i: usize| parse_number(&record[i], PANEL_HEADER[i], row);
        let gas = |i: usize, factor: f64| num(i).map(|v| v * factor);
        let obs = CountryObservation {
            country: parse_country(&record[0], row)?,
            year: parse_year(&record[1], row)?,
            gdp_ppp: num(2),
            population: num(3),
            ihdi: num(4),
            emissions: GasInventory {
                co2: gas(5, gwp.co2),
                ch4: gas(6, gwp.ch4),
                nox: gas(7, gwp.nox),
                hps: gas(8, gwp.hps),
            },
            landuse_em: num(9),
        };
        panel.insert_at_row(obs, row)?;
    }
    Ok(panel)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the panel in the CO2-equivalent schema, full precision.
pub fn write_panel<W: Write>(panel: &CountryPanel, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(PANEL_HEADER)?;
    for obs in panel.observations() {
        let e = &obs.emissions;
        wtr.write_record([
            obs.country.code().to_string(),
            obs.year.to_string(),
            cell(obs.gdp_ppp),
            cell(obs.population),
            cell(obs.ihdi),
            cell(e.co2),
            cell(e.ch4),
            cell(e.nox),
            cell(e.hps),
            cell(obs.landuse_em),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn load_scenarios(path: impl AsRef<Path>) -> Result<BTreeMap<String, ScenarioCurve>> {
    read_scenarios(File::open(path)?)
}

/// Reads `label,year,value_mtco2e` rows into one curve per label.
pub fn read_scenarios<R: Read>(reader: R) -> Result<BTreeMap<String, ScenarioCurve>> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(rdr.headers()?, &SCENARIO_HEADER)?;
    let mut raw: BTreeMap<String, Vec<(Year, f64)>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let label = record.get(0).unwrap_or("").trim().to_string();
        if label.is_empty() {
            return Err(Error::InvalidValue {
                row,
                message: "empty scenario label".into(),
            });
        }
        let year = parse_year(record.get(1).unwrap_or(""), row)?;
        let value =
            parse_number(record.get(2).unwrap_or(""), "value_mtco2e", row).ok_or_else(|| {
                Error::InvalidValue {
                    row,
                    message: "missing scenario value".into(),
                }
            })?;
        if value < 0.0 {
            return Err(Error::NegativeQuantity {
                field: "value_mtco2e".into(),
                row,
            });
        }
        raw.entry(label).or_default().push((year, value));
    }
    raw.into_iter()
        .map(|(label, mut points)| {
            points.sort_by_key(|(y, _)| *y);
            ScenarioCurve::new(label.clone(), points).map(|c| (label, c))
        })
        .collect()
}

pub fn load_gwp(path: impl AsRef<Path>) -> Result<GwpTable> {
    read_gwp(File::open(path)?)
}

/// Reads a `gas,gwp` sidecar; gases not listed keep their default potential.
pub fn read_gwp<R: Read>(reader: R) -> Result<GwpTable> {
    let mut rdr = csv::Reader::from_reader(reader);
    check_header(rdr.headers()?, &["gas", "gwp"])?;
    let mut table = GwpTable::default();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let value = parse_number(record.get(1).unwrap_or(""), "gwp", row)
            .filter(|v| *v >= 0.0)
            .ok_or_else(|| Error::InvalidValue {
                row,
                message: "gwp must be a nonnegative number".into(),
            })?;
        match record
            .get(0)
            .unwrap_or("")
            .trim()
            .to_ascii_lowercase()
            .as_str()
        {
            "co2" => table.co2 = value,
            "ch4" => table.ch4 = value,
            "nox" | "n2o" => table.nox = value,
            "hps" => table.hps = value,
            other => {
                return Err(Error::InvalidValue {
                    row,
                    message: format!("unknown gas `{other}`"),
                })
            }
        }
    }
    Ok(table)
}

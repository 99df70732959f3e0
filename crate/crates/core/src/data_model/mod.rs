//! Domain types, units and missing-data conventions shared by every module.
//!
//! Units are fixed across the crate: money in billions of international
//! dollars, emissions in MtCO2e, intensities in tCO2e per thousand dollars
//! (numerically MtCO2e/$B). A missing value is `None` and any quantity with
//! a missing operand is itself missing.

mod io;

pub use io::{
    load_gwp, load_panel, load_scenarios, read_gwp, read_panel, read_scenarios, write_panel,
    GwpTable, PanelFormat,
};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Megatonnes of CO2-equivalent.
pub type MtCo2e = f64;
/// Billions of international (PPP) dollars.
pub type BillionUsd = f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Year(i32);

impl Year {
    pub const MIN: i32 = 1900;
    pub const MAX: i32 = 2200;

    pub fn new(value: i32) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&value) {
            Ok(Year(value))
        } else {
            Err(Error::InvalidConfig(format!(
                "year {value} outside {}..={}",
                Self::MIN,
                Self::MAX
            )))
        }
    }

    pub fn value(self) -> i32 {
        self.0
    }

    /// Year shifted by `delta`, still subject to the range check.
    pub fn offset(self, delta: i32) -> Result<Self> {
        Year::new(self.0 + delta)
    }
}

impl fmt::Display for Year {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Year {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i32(self.0)
    }
}

/// Country identity. Ordering, equality and hashing use `code` only.
#[derive(Debug, Clone)]
pub struct CountryId {
    code: String,
    display_name: String,
}

impl CountryId {
    pub fn new(code: impl Into<String>) -> Self {
        let code = code.into();
        CountryId {
            display_name: code.clone(),
            code,
        }
    }

    pub fn with_name(code: impl Into<String>, display_name: impl Into<String>) -> Self {
        CountryId {
            code: code.into(),
            display_name: display_name.into(),
        }
    }

    pub fn code(&self) -> &str {
        &self.code
    }

    pub fn display_name(&self) -> &str {
        &self.display_name
    }
}

impl PartialEq for CountryId {
    fn eq(&self, other: &Self) -> bool {
        self.code == other.code
    }
}

impl Eq for CountryId {}

impl PartialOrd for CountryId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for CountryId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.code.cmp(&other.code)
    }
}

impl std::hash::Hash for CountryId {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.code.hash(state);
    }
}

impl fmt::Display for CountryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code)
    }
}

impl Serialize for CountryId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.code)
    }
}

impl From<&str> for CountryId {
    fn from(code: &str) -> Self {
        CountryId::new(code)
    }
}

/// Per-gas emissions, already in MtCO2e. `hps` is the HFC+PFC+SF6 basket.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct GasInventory {
    pub co2: Option<MtCo2e>,
    pub ch4: Option<MtCo2e>,
    pub nox: Option<MtCo2e>,
    pub hps: Option<MtCo2e>,
}

impl GasInventory {
    pub fn components(&self) -> [(&'static str, Option<MtCo2e>); 4] {
        [
            ("co2", self.co2),
            ("ch4", self.ch4),
            ("nox", self.nox),
            ("hps", self.hps),
        ]
    }

    /// Sum of the present components; missing only when every component is.
    pub fn total(&self) -> Option<MtCo2e> {
        sum_present(self.components().iter().map(|(_, v)| *v))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryObservation {
    pub country: CountryId,
    pub year: Year,
    pub gdp_ppp: Option<BillionUsd>,
    /// Persons.
    pub population: Option<f64>,
    /// IHDI points on the 0..=10,000 scale.
    pub ihdi: Option<f64>,
    pub emissions: GasInventory,
    /// Land-use emissions; may be negative for net sinks. Never part of `total_emissions`.
    pub landuse_em: Option<MtCo2e>,
}

impl CountryObservation {
    pub fn new(country: impl Into<CountryId>, year: Year) -> Self {
        CountryObservation {
            country: country.into(),
            year,
            gdp_ppp: None,
            population: None,
            ihdi: None,
            emissions: GasInventory::default(),
            landuse_em: None,
        }
    }

    /// Checks the sign and range rules, reporting `row` on failure.
    pub fn validate(&self, row: usize) -> Result<()> {
        let mut checks = vec![
            ("gdp_ppp", self.gdp_ppp),
            ("population", self.population),
            ("ihdi", self.ihdi),
        ];
        checks.extend(self.emissions.components());
        for (field, value) in checks {
            if let Some(v) = value {
                if !v.is_finite() {
                    return Err(Error::InvalidValue {
                        row,
                        message: format!("{field} is not finite"),
                    });
                }
                if v < 0.0 {
                    return Err(Error::NegativeQuantity {
                        field: field.to_string(),
                        row,
                    });
                }
            }
        }
        if let Some(ihdi) = self.ihdi {
            if ihdi > 10_000.0 {
                return Err(Error::InvalidValue {
                    row,
                    message: format!("ihdi {ihdi} exceeds 10000"),
                });
            }
        }
        if matches!(self.landuse_em, Some(v) if !v.is_finite()) {
            return Err(Error::InvalidValue {
                row,
                message: "landuse_em is not finite".into(),
            });
        }
        Ok(())
    }
}

/// Total emissions excluding land use.
pub fn total_emissions(obs: &CountryObservation) -> Option<MtCo2e> {
    obs.emissions.total()
}

/// Sum of the present values, `None` when nothing is present.
pub fn sum_present(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    values
        .into_iter()
        .flatten()
        .fold(None, |acc, v| Some(acc.unwrap_or(0.0) + v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountryPanel {
    observations: BTreeMap<Year, BTreeMap<CountryId, CountryObservation>>,
    pub snapshot_year: Year,
    pub normalization_year: Year,
}

impl Default for CountryPanel {
    fn default() -> Self {
        CountryPanel {
            observations: BTreeMap::new(),
            snapshot_year: Year(1990),
            normalization_year: Year(1990),
        }
    }
}

impl CountryPanel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_snapshot_year(mut self, year: Year) -> Self {
        self.snapshot_year = year;
        self
    }

    pub fn with_normalization_year(mut self, year: Year) -> Self {
        self.normalization_year = year;
        self
    }

    pub fn insert(&mut self, obs: CountryObservation) -> Result<()> {
        self.insert_at_row(obs, 0)
    }

    /// Validates and inserts; `row` is only used for error reporting.
    pub fn insert_at_row(&mut self, obs: CountryObservation, row: usize) -> Result<()> {
        obs.validate(row)?;
        let slot = self.observations.entry(obs.year).or_default();
        if slot.contains_key(&obs.country) {
            return Err(Error::DuplicateObservation {
                country: obs.country.code().to_string(),
                year: obs.year,
                row,
            });
        }
        slot.insert(obs.country.clone(), obs);
        Ok(())
    }

    pub fn get(&self, country: &CountryId, year: Year) -> Option<&CountryObservation> {
        self.observations.get(&year)?.get(country)
    }

    /// Observations for one year, ordered by country code.
    pub fn year(&self, year: Year) -> impl Iterator<Item = &CountryObservation> {
        self.observations
            .get(&year)
            .into_iter()
            .flat_map(|m| m.values())
    }

    pub fn years(&self) -> impl Iterator<Item = Year> + '_ {
        self.observations.keys().copied()
    }

    pub fn observations(&self) -> impl Iterator<Item = &CountryObservation> {
        self.observations.values().flat_map(|m| m.values())
    }

    pub fn len(&self) -> usize {
        self.observations.values().map(|m| m.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Population of `country` in the snapshot year.
    pub fn snapshot_population(&self, country: &CountryId) -> Option<f64> {
        self.get(country, self.snapshot_year)?.population
    }
}

/// Selects one scalar from an observation for world aggregation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    GdpPpp,
    Population,
    TotalEmissions,
    LanduseEmissions,
}

impl Field {
    pub fn get(self, obs: &CountryObservation) -> Option<f64> {
        match self {
            Field::GdpPpp => obs.gdp_ppp,
            Field::Population => obs.population,
            Field::TotalEmissions => total_emissions(obs),
            Field::LanduseEmissions => obs.landuse_em,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldAggregate {
    pub year: Year,
    pub value: f64,
    pub contributing: usize,
    pub skipped: Vec<CountryId>,
}

/// Skip-missing sum of `field` over every country observed in `year`.
pub fn aggregate_world(panel: &CountryPanel, year: Year, field: Field) -> Result<WorldAggregate> {
    let mut value = 0.0;
    let mut contributing = 0;
    let mut skipped = Vec::new();
    for obs in panel.year(year) {
        match field.get(obs) {
            Some(v) => {
                value += v;
                contributing += 1;
            }
            None => skipped.push(obs.country.clone()),
        }
    }
    if contributing == 0 {
        return Err(Error::EmptyYear(year));
    }
    Ok(WorldAggregate {
        year,
        value,
        contributing,
        skipped,
    })
}

/// Year-indexed global series with linear interpolation between knots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioCurve {
    label: String,
    points: Vec<(Year, MtCo2e)>,
}

impl ScenarioCurve {
    pub fn new(label: impl Into<String>, points: Vec<(Year, MtCo2e)>) -> Result<Self> {
        let label = label.into();
        let invalid = |message: String| Error::InvalidCurve {
            label: label.clone(),
            message,
        };
        if points.is_empty() {
            return Err(invalid("no points".into()));
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(invalid(format!(
                    "years not strictly increasing at {}",
                    w[1].0
                )));
            }
        }
        if let Some((y, v)) = points.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(invalid(format!(
                "value {v} at {y} is negative or not finite"
            )));
        }
        Ok(ScenarioCurve { label, points })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &[(Year, MtCo2e)] {
        &self.points
    }

    pub fn first_year(&self) -> Year {
        self.points[0].0
    }

    pub fn last_year(&self) -> Year {
        self.points[self.points.len() - 1].0
    }

    /// Exact knot value, if `year` is tabulated.
    pub fn knot(&self, year: Year) -> Option<MtCo2e> {
        self.points
            .iter()
            .find(|(y, _)| *y == year)
            .map(|(_, v)| *v)
    }

    pub fn value_at(&self, year: Year) -> Result<MtCo2e> {
        let idx = self.points.partition_point(|(y, _)| *y < year);
        match self.points.get(idx) {
            Some((y, v)) if *y == year => Ok(*v),
            Some((y1, v1)) if idx > 0 => {
                let (y0, v0) = self.points[idx - 1];
                let t = (year.0 - y0.0) as f64 / (y1.0 - y0.0) as f64;
                Ok(v0 + t * (v1 - v0))
            }
            _ => Err(Error::YearOutOfRange {
                label: self.label.clone(),
                year,
            }),
        }
    }

    /// Sum of the curve over every calendar year in `from..=to`.
    pub fn sum_over(&self, from: Year, to: Year) -> Result<MtCo2e> {
        (from.0..=to.0).map(|y| self.value_at(Year(y))).sum()
    }
}

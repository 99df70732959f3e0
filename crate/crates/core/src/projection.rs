//! Ten-year projection of IHDIGDP, MGHG-INT, emissions and border taxes,
//! with the tax fed back (CT) or not (NC).

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::data_model::{BillionUsd, CountryId, CountryPanel, MtCo2e, Year};
use crate::error::{Error, Result};
use crate::indicators::{mghg_int, IndicatorTable, ZNormalization};
use crate::policy_engine::bct;
use crate::scenario_ledger::{GlobalScenarios, Ledger, LedgerInput};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthProfile {
    pub country: CountryId,
    /// `None` when the window endpoints are not both available.
    pub raw_rate: Option<f64>,
    pub effective_rate: f64,
}

impl GrowthProfile {
    pub fn new(country: CountryId, raw_rate: Option<f64>, floor: f64) -> Self {
        let effective_rate = raw_rate.map_or(floor, |r| r.max(floor));
        GrowthProfile {
            country,
            raw_rate,
            effective_rate,
        }
    }
}

/// Annual IHDIGDP growth per country; countries without a profile grow at the floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthProfiles {
    pub floor: f64,
    profiles: BTreeMap<CountryId, GrowthProfile>,
}

impl GrowthProfiles {
    pub fn new(floor: f64) -> Self {
        GrowthProfiles {
            floor,
            profiles: BTreeMap::new(),
        }
    }

    pub fn from_raw_rates(rates: impl IntoIterator<Item = (CountryId, f64)>, floor: f64) -> Self {
        let profiles = rates
            .into_iter()
            .map(|(c, r)| (c.clone(), GrowthProfile::new(c, Some(r), floor)))
            .collect();
        GrowthProfiles { floor, profiles }
    }

    pub fn get(&self, country: &CountryId) -> Option<&GrowthProfile> {
        self.profiles.get(country)
    }

    pub fn rate(&self, country: &CountryId) -> f64 {
        self.profiles
            .get(country)
            .map_or(self.floor, |p| p.effective_rate)
    }

    pub fn iter(&self) -> impl Iterator<Item = &GrowthProfile> {
        self.profiles.values()
    }
}

/// Compound annual IHDIGDP growth between the window endpoints, floored.
pub fn estimate_growth(
    panel: &CountryPanel,
    z: &ZNormalization,
    start: Year,
    end: Year,
    floor: f64,
) -> Result<GrowthProfiles> {
    if end <= start {
        return Err(Error::InvalidConfig(format!(
            "growth window {start}-{end} is empty"
        )));
    }
    let table = |y: Year| match IndicatorTable::compute(panel, y, z) {
        Err(Error::EmptyYear(_)) => Err(Error::MissingEndpoint(y)),
        other => other,
    };
    let (first, last) = (table(start)?, table(end)?);
    let span = (end.value() - start.value()) as f64;
    let mut profiles = BTreeMap::new();
    for row in last.rows.iter() {
        let Some(v1) = row.ihdigdp else { continue };
        let raw = first
            .row(&row.country)
            .and_then(|r| r.ihdigdp)
            .filter(|v0| *v0 > 0.0)
            .map(|v0| (v1 / v0).powf(1.0 / span) - 1.0);
        profiles.insert(
            row.country.clone(),
            GrowthProfile::new(row.country.clone(), raw, floor),
        );
    }
    Ok(GrowthProfiles { floor, profiles })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionConfig {
    /// Fractional IHDIGDP loss per percentage point of tax.
    pub tax_drag: f64,
    /// Fractional intensity improvement per percentage point of tax.
    pub tax_abatement: f64,
    /// Annual intensity improvement from technology.
    pub tech_rate: f64,
    pub red_bct: f64,
    pub start_year: Year,
    /// Last projected year; `start_year - 1` means no steps.
    pub end_year: Year,
    pub global_floor: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            tax_drag: 0.005,
            tax_abatement: 0.005,
            tech_rate: 0.011,
            red_bct: 100.0,
            start_year: Year::new(2010).expect("valid year"),
            end_year: Year::new(2020).expect("valid year"),
            global_floor: 0.0167,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tax_drag", self.tax_drag),
            ("tax_abatement", self.tax_abatement),
            ("tech_rate", self.tech_rate),
            ("global_floor", self.global_floor),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {v} is outside [0, 1)"
                )));
            }
        }
        if !(self.red_bct.is_finite() && self.red_bct > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "red_bct must be positive, got {}",
                self.red_bct
            )));
        }
        if self.end_year.value() < self.start_year.value() - 1 {
            return Err(Error::InvalidConfig(format!(
                "horizon {}-{} is reversed",
                self.start_year, self.end_year
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.end_year.value() - self.start_year.value() + 1).max(0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    #[serde(rename = "CT")]
    Ct,
    #[serde(rename = "NC")]
    Nc,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ct => "CT",
            Mode::Nc => "NC",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountryState {
    pub ihdigdp: BillionUsd,
    pub mghg_int: Option<f64>,
    pub em: Option<MtCo2e>,
    pub red_pct: Option<i64>,
    /// Unrounded tax in percent.
    pub bct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionState {
    pub year: Year,
    pub countries: BTreeMap<CountryId, CountryState>,
}

impl ProjectionState {
    /// Starting state from a ledger; countries without IHDIGDP are dropped.
    pub fn from_ledger(ledger: &Ledger, red_bct: f64) -> Result<Self> {
        let mut countries = BTreeMap::new();
        for row in &ledger.rows {
            let Some(ihdigdp) = row.ihdigdp else { continue };
            let intensity = mghg_int(row.em, Some(ihdigdp))?;
            countries.insert(
                row.country.clone(),
                CountryState {
                    ihdigdp,
                    mghg_int: intensity,
                    em: intensity.map(|m| ihdigdp * m),
                    red_pct: row.red_pct,
                    bct: row.red_pct.map_or(0.0, |r| bct(r, red_bct)),
                },
            );
        }
        Ok(ProjectionState {
            year: ledger.year,
            countries,
        })
    }

    pub fn world_em(&self) -> MtCo2e {
        self.countries.values().filter_map(|s| s.em).sum()
    }

    pub fn world_ihdigdp(&self) -> BillionUsd {
        self.countries.values().map(|s| s.ihdigdp).sum()
    }
}

fn step(
    state: &ProjectionState,
    profiles: &GrowthProfiles,
    config: &ProjectionConfig,
    scenarios: &GlobalScenarios,
    mode: Mode,
) -> Result<ProjectionState> {
    let year = state.year.offset(1)?;
    let mut countries = BTreeMap::new();
    for (country, s) in &state.countries {
        let tax = match mode {
            Mode::Ct => s.bct,
            Mode::Nc => 0.0,
        };
        let activity = (1.0 + profiles.rate(country)) * (1.0 - config.tax_drag * tax);
        if activity < 0.0 {
            return Err(Error::NegativeActivity {
                country: country.to_string(),
                year,
                factor: activity,
            });
        }
        let intensity = 1.0 - config.tax_abatement * tax - config.tech_rate;
        if intensity < 0.0 {
            return Err(Error::NegativeIntensity {
                country: country.to_string(),
                year,
                factor: intensity,
            });
        }
        let ihdigdp = activity * s.ihdigdp;
        let mghg = s.mghg_int.map(|m| intensity * m);
        countries.insert(
            country.clone(),
            CountryState {
                ihdigdp,
                mghg_int: mghg,
                em: mghg.map(|m| ihdigdp * m),
                red_pct: None,
                bct: 0.0,
            },
        );
    }
    let inputs: Vec<LedgerInput> = countries
        .iter()
        .map(|(c, s)| LedgerInput {
            country: c.clone(),
            ihdigdp: Some(s.ihdigdp),
            em: s.em,
        })
        .collect();
    let ledger = Ledger::compute(year, &inputs, scenarios.limits(year)?)?;
    for row in ledger.rows {
        let s = countries.get_mut(&row.country).expect("same keys");
        s.red_pct = row.red_pct;
        s.bct = row.red_pct.map_or(0.0, |r| bct(r, config.red_bct));
    }
    Ok(ProjectionState { year, countries })
}

/// One year with the previous year's tax fed back into activity and intensity.
pub fn step_ct(
    state: &ProjectionState,
    profiles: &GrowthProfiles,
    config: &ProjectionConfig,
    scenarios: &GlobalScenarios,
) -> Result<ProjectionState> {
    step(state, profiles, config, scenarios, Mode::Ct)
}

/// One year of growth and technology only; the tax is still reported.
pub fn step_nc(
    state: &ProjectionState,
    profiles: &GrowthProfiles,
    config: &ProjectionConfig,
    scenarios: &GlobalScenarios,
) -> Result<ProjectionState> {
    step(state, profiles, config, scenarios, Mode::Nc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub mode: Mode,
    pub states: Vec<ProjectionState>,
}

impl Trajectory {
    pub fn world_em(&self) -> Vec<(Year, MtCo2e)> {
        self.states.iter().map(|s| (s.year, s.world_em())).collect()
    }

    pub fn world_ihdigdp(&self) -> Vec<(Year, BillionUsd)> {
        self.states
            .iter()
            .map(|s| (s.year, s.world_ihdigdp()))
            .collect()
    }

    pub fn bct_series(&self, country: &CountryId) -> Vec<(Year, f64)> {
        self.states
            .iter()
            .filter_map(|s| s.countries.get(country).map(|c| (s.year, c.bct)))
            .collect()
    }

    pub fn last(&self) -> &ProjectionState {
        self.states
            .last()
            .expect("trajectory holds the initial state")
    }
}

pub fn run_projection(
    initial: &ProjectionState,
    profiles: &GrowthProfiles,
    config: &ProjectionConfig,
    scenarios: &GlobalScenarios,
    mode: Mode,
) -> Result<Trajectory> {
    config.validate()?;
    if config.start_year.value() != initial.year.value() + 1 {
        return Err(Error::InvalidConfig(format!(
            "horizon starts in {} but the initial state is for {}",
            config.start_year, initial.year
        )));
    }
    let mut states = vec![initial.clone()];
    for _ in 0..config.steps() {
        let next = step(
            states.last().expect("non-empty"),
            profiles,
            config,
            scenarios,
            mode,
        )?;
        states.push(next);
    }
    Ok(Trajectory { mode, states })
}

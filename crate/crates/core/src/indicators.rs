//! Activity and intensity indicators: GHG intensity, per-capita emissions,
//! IHDIxCapita, balanced quantities, IHDIGDP and MGHG-INT.

use serde::Serialize;

use crate::data_model::{
    sum_present, total_emissions, BillionUsd, CountryId, CountryObservation, CountryPanel, MtCo2e,
    Year,
};
use crate::error::{Error, Result};

/// Emissions per unit of GDP-PPP, tCO2e/$K.
pub fn ghg_intensity(em: Option<MtCo2e>, gdp_ppp: Option<BillionUsd>) -> Result<Option<f64>> {
    match (em, gdp_ppp) {
        (Some(_), Some(0.0)) => Err(Error::DivisionByZeroGdp),
        (Some(e), Some(g)) => Ok(Some(e / g)),
        _ => Ok(None),
    }
}

/// Tonnes per person.
pub fn ghg_per_capita(em: Option<MtCo2e>, capita: Option<f64>) -> Result<Option<f64>> {
    match (em, capita) {
        (Some(_), Some(0.0)) => Err(Error::DivisionByZeroPopulation),
        (Some(e), Some(c)) => Ok(Some(e * 1e6 / c)),
        _ => Ok(None),
    }
}

/// IHDI points times the snapshot population.
pub fn ihdixcapita(ihdi: Option<f64>, capita_snapshot: Option<f64>) -> Option<f64> {
    Some(ihdi? * capita_snapshot?)
}

fn observation_ihdixcapita(panel: &CountryPanel, obs: &CountryObservation) -> Option<f64> {
    ihdixcapita(obs.ihdi, panel.snapshot_population(&obs.country))
}

/// Per-year maxima used to put GDP and IHDIxCapita on a common scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancingContext {
    pub year: Year,
    pub gdp_ppp_max: BillionUsd,
    pub ihdixcapita_max: f64,
    pub gdp_ppp_of_ihdi_max: BillionUsd,
    pub argmax_country: CountryId,
}

impl BalancingContext {
    /// Scans countries with both GDP-PPP and IHDIxCapita in `year`.
    /// Ties go to the lexicographically smaller country code.
    pub fn compute(panel: &CountryPanel, year: Year) -> Result<Self> {
        let mut gdp_max: Option<f64> = None;
        let mut best: Option<(f64, f64, &CountryId)> = None;
        for obs in panel.year(year) {
            let (Some(gdp), Some(ixc)) = (obs.gdp_ppp, observation_ihdixcapita(panel, obs)) else {
                continue;
            };
            gdp_max = Some(gdp_max.map_or(gdp, |m| m.max(gdp)));
            match best {
                Some((m, _, holder)) if ixc == m => {
                    log::warn!(
                        "IHDIxCapita tie in {year} between {holder} and {}; keeping {holder}",
                        obs.country
                    );
                }
                Some((m, _, _)) if ixc < m => {}
                _ => best = Some((ixc, gdp, &obs.country)),
            }
        }
        let (Some(gdp_ppp_max), Some((ihdixcapita_max, gdp_ppp_of_ihdi_max, argmax))) =
            (gdp_max, best)
        else {
            return Err(Error::EmptyYear(year));
        };
        if gdp_ppp_max <= 0.0 || ihdixcapita_max <= 0.0 || gdp_ppp_of_ihdi_max <= 0.0 {
            return Err(Error::DegenerateBalancing(year));
        }
        Ok(BalancingContext {
            year,
            gdp_ppp_max,
            ihdixcapita_max,
            gdp_ppp_of_ihdi_max,
            argmax_country: argmax.clone(),
        })
    }
}

pub fn balanced_ihdixcapita(value: Option<f64>, ctx: &BalancingContext) -> Option<BillionUsd> {
    Some(ctx.gdp_ppp_max * (value? / ctx.ihdixcapita_max))
}

pub fn balanced_gdp(gdp_ppp: Option<BillionUsd>, ctx: &BalancingContext) -> Option<BillionUsd> {
    Some(ctx.gdp_ppp_max * (gdp_ppp? / ctx.gdp_ppp_of_ihdi_max))
}

/// Global scale factor making world IHDIGDP equal world GDP-PPP in the reference year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZNormalization {
    pub z: f64,
    pub reference_year: Year,
    /// Countries observed in the reference year that could not contribute.
    pub skipped: Vec<CountryId>,
}

impl ZNormalization {
    /// A known z, bypassing the fit.
    pub fn fixed(z: f64, reference_year: Year) -> Result<Self> {
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::InvalidConfig(format!("z must be positive, got {z}")));
        }
        Ok(ZNormalization {
            z,
            reference_year,
            skipped: Vec::new(),
        })
    }
}

/// Fits z at the panel's normalization year over the countries that have
/// both GDP-PPP and IHDIxCapita there.
pub fn fit_z(panel: &CountryPanel) -> Result<ZNormalization> {
    let year = panel.normalization_year;
    let ctx = BalancingContext::compute(panel, year)?;
    let mut world_gdp = 0.0;
    let mut denom = 0.0;
    let mut skipped = Vec::new();
    for obs in panel.year(year) {
        let gdp_bal = balanced_gdp(obs.gdp_ppp, &ctx);
        let ixc_bal = balanced_ihdixcapita(observation_ihdixcapita(panel, obs), &ctx);
        match (obs.gdp_ppp, gdp_bal, ixc_bal) {
            (Some(g), Some(gb), Some(ib)) => {
                world_gdp += g;
                denom += (gb + ib) / 2.0;
            }
            _ => skipped.push(obs.country.clone()),
        }
    }
    if denom == 0.0 {
        return Err(Error::DegenerateNormalization(year));
    }
    if !skipped.is_empty() {
        log::info!(
            "z fit in {year} skipped {} countries without GDP-PPP or IHDI",
            skipped.len()
        );
    }
    Ok(ZNormalization {
        z: world_gdp / denom,
        reference_year: year,
        skipped,
    })
}

pub fn ihdigdp(
    gdp_bal: Option<BillionUsd>,
    ihdixcapita_bal: Option<BillionUsd>,
    z: &ZNormalization,
) -> Option<BillionUsd> {
    Some(z.z * (gdp_bal? + ihdixcapita_bal?) / 2.0)
}

/// IHDIGDP of one country, building the year's balancing context.
pub fn ihdigdp_for(
    panel: &CountryPanel,
    country: &CountryId,
    year: Year,
    z: &ZNormalization,
) -> Result<Option<BillionUsd>> {
    let ctx = BalancingContext::compute(panel, year)?;
    let Some(obs) = panel.get(country, year) else {
        return Ok(None);
    };
    let ixc = observation_ihdixcapita(panel, obs);
    Ok(ihdigdp(
        balanced_gdp(obs.gdp_ppp, &ctx),
        balanced_ihdixcapita(ixc, &ctx),
        z,
    ))
}

/// Modified GHG intensity, tCO2e/$K of IHDIGDP.
pub fn mghg_int(em: Option<MtCo2e>, ihdigdp: Option<BillionUsd>) -> Result<Option<f64>> {
    match (em, ihdigdp) {
        (Some(_), Some(0.0)) => Err(Error::DivisionByZeroActivity),
        (Some(e), Some(a)) => Ok(Some(e / a)),
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorRow {
    pub country: CountryId,
    pub em: Option<MtCo2e>,
    pub gdp_ppp: Option<BillionUsd>,
    pub ghg_int: Option<f64>,
    pub ghg_pcapita: Option<f64>,
    pub ihdixcapita: Option<f64>,
    pub gdp_bal: Option<BillionUsd>,
    pub ihdixcapita_bal: Option<BillionUsd>,
    pub ihdigdp: Option<BillionUsd>,
    pub mghg_int: Option<f64>,
}

/// All indicators for one year, ordered by country code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorTable {
    pub year: Year,
    pub z: f64,
    pub context: BalancingContext,
    pub rows: Vec<IndicatorRow>,
}

impl IndicatorTable {
    pub fn compute(panel: &CountryPanel, year: Year, z: &ZNormalization) -> Result<Self> {
        let ctx = BalancingContext::compute(panel, year)?;
        let mut rows = Vec::new();
        for obs in panel.year(year) {
            let em = total_emissions(obs);
            let ixc = observation_ihdixcapita(panel, obs);
            let gdp_bal = balanced_gdp(obs.gdp_ppp, &ctx);
            let ixc_bal = balanced_ihdixcapita(ixc, &ctx);
            let activity = ihdigdp(gdp_bal, ixc_bal, z);
            rows.push(IndicatorRow {
                country: obs.country.clone(),
                em,
                gdp_ppp: obs.gdp_ppp,
                ghg_int: ghg_intensity(em, obs.gdp_ppp)?,
                ghg_pcapita: ghg_per_capita(em, obs.population)?,
                ihdixcapita: ixc,
                gdp_bal,
                ihdixcapita_bal: ixc_bal,
                ihdigdp: activity,
                mghg_int: mghg_int(em, activity)?,
            });
        }
        Ok(IndicatorTable {
            year,
            z: z.z,
            context: ctx,
            rows,
        })
    }

    pub fn row(&self, country: &CountryId) -> Option<&IndicatorRow> {
        self.rows
            .binary_search_by(|r| r.country.cmp(country))
            .ok()
            .map(|i| &self.rows[i])
    }

    pub fn world_ihdigdp(&self) -> Option<BillionUsd> {
        sum_present(self.rows.iter().map(|r| r.ihdigdp))
    }

    pub fn world_em(&self) -> Option<MtCo2e> {
        sum_present(self.rows.iter().map(|r| r.em))
    }

    /// World emissions over world IHDIGDP, both restricted to countries with MGHG-INT.
    pub fn global_mghg_int(&self) -> Option<f64> {
        let covered = || self.rows.iter().filter(|r| r.mghg_int.is_some());
        Some(sum_present(covered().map(|r| r.em))? / sum_present(covered().map(|r| r.ihdigdp))?)
    }

    /// Unweighted mean of national MGHG-INT values.
    pub fn mean_mghg_int(&self) -> Option<f64> {
        let values: Vec<f64> = self.rows.iter().filter_map(|r| r.mghg_int).collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    }
}

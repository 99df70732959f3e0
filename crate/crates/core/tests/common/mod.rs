#![allow(dead_code)]

use std::path::PathBuf;

use carbon_ledger::{
    load_panel, load_scenarios, CountryPanel, GlobalScenarios, PanelFormat, Year, ZNormalization,
};

/// Normalization constant published alongside the 2009 tables.
pub const Z_2009: f64 = 0.28512;

/// The twelve countries of interest.
pub const COI: [&str; 12] = [
    "China",
    "United States",
    "Russia",
    "South Africa",
    "Japan",
    "Germany",
    "India",
    "Australia",
    "Brazil",
    "Canada",
    "Indonesia",
    "Switzerland",
];

pub fn y(v: i32) -> Year {
    Year::new(v).unwrap()
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn panel_2009() -> CountryPanel {
    load_panel(fixture("panel_2009.csv"), PanelFormat::Co2Equivalent).expect("fixture panel loads")
}

pub fn scenarios() -> GlobalScenarios {
    let curves = load_scenarios(fixture("scenarios.csv")).expect("fixture scenarios load");
    GlobalScenarios::from_curves(&curves, None).expect("GB1 and RA1B present")
}

pub fn z_2009() -> ZNormalization {
    ZNormalization::fixed(Z_2009, y(1990)).unwrap()
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

pub mod random {
    use carbon_ledger::projection::{GrowthProfiles, ProjectionConfig, ProjectionState};
    use carbon_ledger::{
        annual_ledger, CountryId, CountryObservation, CountryPanel, GlobalScenarios,
        IndicatorTable, ScenarioCurve, ZNormalization,
    };
    use rand::Rng;

    use super::y;

    /// A projection-ready world: initial 2009 state, limits through 2020, growth rates.
    pub struct World {
        pub panel: CountryPanel,
        pub scenarios: GlobalScenarios,
        pub initial: ProjectionState,
        pub profiles: GrowthProfiles,
        pub config: ProjectionConfig,
    }

    pub fn panel<R: Rng>(rng: &mut R, n: usize) -> CountryPanel {
        let mut p = CountryPanel::new();
        for i in 0..n {
            let code = format!("C{i:02}");
            let mut o = CountryObservation::new(code.as_str(), y(1990));
            o.population = Some(rng.random_range(1e5..1.5e9));
            p.insert(o).unwrap();
            let mut o = CountryObservation::new(code.as_str(), y(2009));
            let gdp = rng.random_range(1.0..15_000.0);
            o.gdp_ppp = Some(gdp);
            // first country always complete so the year has a balancing context
            o.ihdi = (i == 0 || rng.random_bool(0.9)).then(|| rng.random_range(2_000.0..9_500.0));
            o.emissions.co2 = rng
                .random_bool(0.95)
                .then(|| gdp * rng.random_range(0.1..1.2));
            o.emissions.ch4 = rng
                .random_bool(0.5)
                .then(|| gdp * rng.random_range(0.0..0.2));
            o.landuse_em = rng.random_bool(0.3).then(|| rng.random_range(-50.0..200.0));
            p.insert(o).unwrap();
        }
        p
    }

    pub fn world<R: Rng>(rng: &mut R) -> World {
        loop {
            let n = rng.random_range(2..40);
            let panel = panel(rng, n);
            let z = ZNormalization::fixed(rng.random_range(0.1..1.0), y(1990)).unwrap();
            let table = IndicatorTable::compute(&panel, y(2009), &z).unwrap();
            let em: f64 = table.rows.iter().filter_map(|r| r.em).sum();
            let g0 = em * rng.random_range(0.6..1.2);
            let r0 = g0 * rng.random_range(1.03..1.3);
            let growth = rng.random_range(0.0..0.02);
            let g1 = g0 * (1.0 + growth * 11.0);
            let r1 = r0 * (1.0 + growth * 11.0) * rng.random_range(1.0..1.1);
            let scenarios = GlobalScenarios::new(
                ScenarioCurve::new("GB1", vec![(y(2009), g0), (y(2020), g1)]).unwrap(),
                ScenarioCurve::new("RA1B", vec![(y(2009), r0), (y(2020), r1)]).unwrap(),
            )
            .unwrap();
            let config = ProjectionConfig {
                tax_drag: rng.random_range(0.0..0.01),
                tax_abatement: rng.random_range(0.0..0.01),
                tech_rate: rng.random_range(0.0..0.03),
                ..Default::default()
            };
            let ledger = annual_ledger(&table, &scenarios).unwrap();
            let initial = ProjectionState::from_ledger(&ledger, config.red_bct).unwrap();
            // keep the tax inside the range where the damping factors stay positive
            let max_bct = initial
                .countries
                .values()
                .map(|c| c.bct)
                .fold(0.0, f64::max);
            if max_bct * config.tax_abatement.max(config.tax_drag) + config.tech_rate >= 0.9 {
                continue;
            }
            let rates: Vec<(CountryId, f64)> = table
                .rows
                .iter()
                .map(|r| (r.country.clone(), rng.random_range(-0.05..0.1)))
                .collect();
            let profiles = GrowthProfiles::from_raw_rates(rates, rng.random_range(0.0..0.03));
            return World {
                panel,
                scenarios,
                initial,
                profiles,
                config,
            };
        }
    }
}

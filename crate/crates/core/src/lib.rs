//! Country-level greenhouse-gas accounting.
//!
//! The pipeline runs panel → [`indicators`] → [`scenario_ledger`] →
//! [`policy_engine`] → [`projection`]. Every stage is a pure function of
//! its inputs.

pub mod data_model;
pub mod error;
pub mod indicators;
pub mod policy_engine;
pub mod projection;
pub mod scenario_ledger;

pub use data_model::{
    aggregate_world, load_panel, load_scenarios, total_emissions, BillionUsd, CountryId,
    CountryObservation, CountryPanel, Field, GasInventory, MtCo2e, PanelFormat, ScenarioCurve,
    WorldAggregate, Year,
};
pub use error::{Error, ErrorClass, Result};
pub use indicators::{fit_z, BalancingContext, IndicatorRow, IndicatorTable, ZNormalization};
pub use policy_engine::{
    differential_bct, ets_clear, world_summary, EtsPosition, EtsPositions, TaxSchedule, Transfer,
    TransferTarget, WorldEtsSummary,
};
pub use projection::{
    estimate_growth, run_projection, GrowthProfile, GrowthProfiles, Mode, ProjectionConfig,
    ProjectionState, Trajectory,
};
pub use scenario_ledger::{
    annual_ledger, cumulative_ledger, CumulativeTotals, GlobalScenarios, Ledger, LedgerRow,
};

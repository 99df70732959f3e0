use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "carbon-ledger",
    version,
    about = "Greenhouse-gas accounting: indicators, admissible emissions, border taxes, trading and projections"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ct,
    Nc,
    Both,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    /// TOML run manifest; flags given on the command line win over it.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Panel CSV.
    #[arg(long, global = true)]
    pub panel: Option<PathBuf>,
    /// Scenario CSV with GB1/RA1B or raw B1_AIM_CO2/A1B_AIM_CO2 series.
    #[arg(long, global = true)]
    pub scenarios: Option<PathBuf>,
    /// GWP sidecar; when given, panel gas columns are native masses.
    #[arg(long, global = true)]
    pub gwp: Option<PathBuf>,
    /// Output directory [default: $CARBON_LEDGER_OUT or ./out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Round values like the reference tables (4 significant figures, BCT to 0.1).
    #[arg(long, global = true)]
    pub paper_rounding: bool,
    /// Leave the generation time out of run.json.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    /// Accounting year [default: latest year in the panel].
    #[arg(long, global = true)]
    pub year: Option<i32>,
    #[arg(long, global = true)]
    pub snapshot_year: Option<i32>,
    #[arg(long, global = true)]
    pub norm_year: Option<i32>,
    /// Use this normalization constant instead of fitting it.
    #[arg(long, global = true)]
    pub z: Option<f64>,
    #[arg(long, global = true)]
    pub red_bct: Option<f64>,
    /// 1990 world emissions, needed to build limits from raw series.
    #[arg(long, global = true)]
    pub em_world_1990: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-country indicator table and world aggregates.
    Indicators,
    /// Annual (or cumulative) ledger and world summary.
    Ledger(LedgerArgs),
    /// Border carbon tax schedule, or one pairwise differential.
    Tax(TaxArgs),
    /// Apply credit transfers to ledger positions.
    EtsClear(EtsArgs),
    /// Project CT and/or NC trajectories.
    Simulate(SimulateArgs),
    /// Ledger over a multi-year window.
    Cumulative(WindowArgs),
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Window as FROM-TO, e.g. 1990-2009.
    #[arg(long)]
    pub window: Option<String>,
    /// Precomputed totals CSV (country,cum_em_mtco2e,cum_ihdigdp_busd) instead of the panel.
    #[arg(long)]
    pub totals: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LedgerArgs {
    #[arg(long)]
    pub cumulative: bool,
    #[command(flatten)]
    pub window: WindowArgs,
}

#[derive(Debug, Args)]
pub struct TaxArgs {
    #[arg(long, requires = "exporter")]
    pub importer: Option<String>,
    #[arg(long, requires = "importer")]
    pub exporter: Option<String>,
}

#[derive(Debug, Args)]
pub struct EtsArgs {
    #[arg(long)]
    pub transfers: Option<PathBuf>,
    /// Opening positions; derived from the ledger when absent.
    #[arg(long)]
    pub positions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "both")]
    pub mode: ModeArg,
    /// Growth rates CSV (country,raw_rate); estimated from the panel when absent.
    #[arg(long)]
    pub growth: Option<PathBuf>,
    /// Growth estimation window, FROM-TO.
    #[arg(long)]
    pub growth_window: Option<String>,
    /// Projection horizon, FROM-TO.
    #[arg(long)]
    pub horizon: Option<String>,
    #[arg(long)]
    pub tax_drag: Option<f64>,
    #[arg(long)]
    pub tax_abatement: Option<f64>,
    #[arg(long)]
    pub tech_rate: Option<f64>,
    #[arg(long)]
    pub floor: Option<f64>,
}

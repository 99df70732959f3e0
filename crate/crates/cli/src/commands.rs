use std::path::Path;

use anyhow::{bail, Context as _, Result};
use carbon_ledger::data_model::load_gwp;
use carbon_ledger::policy_engine::{display_bct, load_transfers};
use carbon_ledger::{
    aggregate_world, annual_ledger, cumulative_ledger, estimate_growth, ets_clear, fit_z,
    load_panel, load_scenarios, run_projection, world_summary, CountryId, CountryPanel,
    CumulativeTotals, Error, EtsPositions, Field, GlobalScenarios, GrowthProfiles, IndicatorTable,
    Ledger, Mode, PanelFormat, ProjectionState, Trajectory, WorldEtsSummary, Year, ZNormalization,
};
use serde::Deserialize;

use crate::args::{Format, ModeArg};
use crate::manifest::Settings;
use crate::output::{write_csv, write_json, Cell, Table, Writer};

/// Loaded inputs shared by every command.
pub struct Context {
    pub settings: Settings,
    pub panel: CountryPanel,
}

impl Context {
    pub fn load(settings: Settings) -> Result<Self> {
        let Some(path) = &settings.panel else {
            bail!("no panel given; pass --panel or set `panel` in the manifest");
        };
        let format = match &settings.gwp {
            Some(gwp) => PanelFormat::NativeMass(load_gwp(gwp)?),
            None => PanelFormat::Co2Equivalent,
        };
        let panel = load_panel(path, format)?
            .with_snapshot_year(settings.snapshot_year)
            .with_normalization_year(settings.norm_year);
        log::info!(
            "loaded {} observations from {}",
            panel.len(),
            path.display()
        );
        Ok(Context { settings, panel })
    }

    pub fn year(&self) -> Result<Year> {
        if let Some(y) = self.settings.year {
            return Ok(y);
        }
        match self.panel.years().last() {
            Some(y) => Ok(y),
            None => Err(Error::EmptyYear(self.settings.norm_year).into()),
        }
    }

    pub fn z(&self) -> Result<ZNormalization> {
        if self.panel.is_empty() {
            return Err(Error::EmptyYear(self.year()?).into());
        }
        let z = match self.settings.z {
            Some(z) => ZNormalization::fixed(z, self.settings.norm_year)?,
            None => fit_z(&self.panel)?,
        };
        log::info!("z = {} (reference year {})", z.z, z.reference_year);
        Ok(z)
    }

    pub fn scenarios(&self) -> Result<GlobalScenarios> {
        let Some(path) = &self.settings.scenarios else {
            bail!("no scenario series given; pass --scenarios or set `scenarios` in the manifest");
        };
        let curves = load_scenarios(path)?;
        let em90 = self.settings.em_world_1990.or_else(|| {
            let y = Year::new(1990).ok()?;
            aggregate_world(&self.panel, y, Field::TotalEmissions)
                .ok()
                .filter(|w| w.contributing > 0)
                .map(|w| w.value)
        });
        Ok(GlobalScenarios::from_curves(&curves, em90)?)
    }

    fn writer(&self) -> Result<Writer> {
        Writer::new(
            &self.settings.out,
            self.settings.format,
            self.settings.paper_rounding,
        )
    }

    fn finish(&self, w: &Writer, command: &str) -> Result<()> {
        w.run_record(command, &self.settings, self.settings.timestamp)?;
        log::info!(
            "wrote {} to {}",
            w.written().join(", "),
            self.settings.out.display()
        );
        Ok(())
    }

    fn annual_ledger(&self) -> Result<(IndicatorTable, Ledger)> {
        let table = IndicatorTable::compute(&self.panel, self.year()?, &self.z()?)?;
        let ledger = annual_ledger(&table, &self.scenarios()?)?;
        Ok((table, ledger))
    }
}

type Getter = fn(&carbon_ledger::IndicatorRow) -> Option<f64>;

fn name(c: &CountryId) -> Cell {
    Cell::text(c.code())
}

pub fn indicators(ctx: &Context) -> Result<()> {
    let year = ctx.year()?;
    let table = IndicatorTable::compute(&ctx.panel, year, &ctx.z()?)?;
    let mut w = ctx.writer()?;

    let mut all = Table::new(&[
        "country",
        "em_mtco2e",
        "gdp_ppp_busd",
        "ghg_int",
        "ghg_pcapita",
        "ihdixcapita",
        "gdp_bal_busd",
        "ihdixcapita_bal_busd",
        "ihdigdp_busd",
        "mghg_int",
    ]);
    for r in &table.rows {
        all.push(vec![
            name(&r.country),
            Cell::num(r.em),
            Cell::num(r.gdp_ppp),
            Cell::num(r.ghg_int),
            Cell::num(r.ghg_pcapita),
            Cell::num(r.ihdixcapita),
            Cell::num(r.gdp_bal),
            Cell::num(r.ihdixcapita_bal),
            Cell::num(r.ihdigdp),
            Cell::num(r.mghg_int),
        ]);
    }
    w.table(&format!("indicators_{year}"), &all)?;

    let families: [(&str, &'static str, Getter); 5] = [
        ("ghg_int", "ghg_int", |r| r.ghg_int),
        ("ghg_pcapita", "ghg_pcapita", |r| r.ghg_pcapita),
        ("ihdixcapita", "ihdixcapita", |r| r.ihdixcapita),
        ("ihdigdp", "ihdigdp_busd", |r| r.ihdigdp),
        ("mghg_int", "mghg_int", |r| r.mghg_int),
    ];
    for (stem, column, get) in families {
        let mut t = Table::new(&["country", column]);
        for r in &table.rows {
            t.push(vec![name(&r.country), Cell::num(get(r))]);
        }
        w.table(&format!("{stem}_{year}"), &t)?;
    }

    let gdp = aggregate_world(&ctx.panel, year, Field::GdpPpp)?;
    let mut world = Table::new(&[
        "year",
        "z",
        "countries",
        "world_gdp_ppp_busd",
        "world_em_mtco2e",
        "world_ihdigdp_busd",
        "global_mghg_int",
        "mean_mghg_int",
    ]);
    world.push(vec![
        Cell::Int(Some(year.value() as i64)),
        Cell::exact(Some(table.z)),
        Cell::Int(Some(table.rows.len() as i64)),
        Cell::num(Some(gdp.value)),
        Cell::num(table.world_em()),
        Cell::num(table.world_ihdigdp()),
        Cell::num(table.global_mghg_int()),
        Cell::num(table.mean_mghg_int()),
    ]);
    w.table(&format!("world_{year}"), &world)?;
    ctx.finish(&w, "indicators")
}

fn ledger_table(ledger: &Ledger) -> Table {
    let mut t = Table::new(&[
        "country",
        "year",
        "em_mtco2e",
        "ihdigdp_busd",
        "admem_mtco2e",
        "credit_mtco2e",
        "debt_mtco2e",
        "margin_mtco2e",
        "red_pct",
    ]);
    for r in &ledger.rows {
        t.push(vec![
            name(&r.country),
            Cell::Int(Some(r.year.value() as i64)),
            Cell::num(r.em),
            Cell::num(r.ihdigdp),
            Cell::num(r.admem),
            Cell::num(r.credit),
            Cell::num(r.debt),
            Cell::num(r.margin),
            Cell::Int(r.red_pct),
        ]);
    }
    t
}

fn summary_table(s: &WorldEtsSummary) -> Table {
    let mut t = Table::new(&[
        "year",
        "world_em_mtco2e",
        "green_limit_mtco2e",
        "red_limit_mtco2e",
        "total_allowed_mtco2e",
        "total_debt_mtco2e",
        "total_credit_mtco2e",
        "unrecoverable_debt_mtco2e",
    ]);
    t.push(vec![
        Cell::Int(Some(s.year.value() as i64)),
        Cell::num(Some(s.world_em)),
        Cell::num(Some(s.green_limit)),
        Cell::num(Some(s.red_limit)),
        Cell::num(Some(s.total_allowed)),
        Cell::num(Some(s.total_debt)),
        Cell::num(Some(s.total_credit)),
        Cell::num(Some(s.unrecoverable_debt)),
    ]);
    t
}

pub fn ledger(ctx: &Context, cumulative: bool) -> Result<()> {
    if cumulative {
        return self::cumulative(ctx);
    }
    let (_, ledger) = ctx.annual_ledger()?;
    let mut w = ctx.writer()?;
    let year = ledger.year;
    w.table(&format!("ledger_{year}"), &ledger_table(&ledger))?;
    w.table(
        &format!("world_summary_{year}"),
        &summary_table(&world_summary(&ledger)?),
    )?;
    ctx.finish(&w, "ledger")
}

pub fn cumulative(ctx: &Context) -> Result<()> {
    let Some((from, to)) = ctx.settings.window else {
        bail!("a cumulative ledger needs --window FROM-TO");
    };
    let scenarios = ctx.scenarios()?;
    let ledger = match &ctx.settings.totals {
        Some(path) => carbon_ledger::scenario_ledger::cumulative_ledger_from_totals(
            &CumulativeTotals::load(path, from, to)?,
            &scenarios,
        )?,
        None => cumulative_ledger(&ctx.panel, &ctx.z()?, &scenarios, from, to)?,
    };
    let mut w = ctx.writer()?;
    w.table(
        &format!("ledger_cumulative_{from}_{to}"),
        &ledger_table(&ledger),
    )?;
    w.table(
        &format!("world_summary_cumulative_{from}_{to}"),
        &summary_table(&world_summary(&ledger)?),
    )?;
    ctx.finish(&w, "cumulative")
}

pub fn tax(ctx: &Context, pair: Option<(&str, &str)>) -> Result<()> {
    let (_, ledger) = ctx.annual_ledger()?;
    let red_bct = ctx.settings.red_bct;
    let schedule = carbon_ledger::TaxSchedule::from_ledger(&ledger, red_bct)?;
    if let Some((importer, exporter)) = pair {
        let (imp, exp) = (CountryId::from(importer), CountryId::from(exporter));
        let value = carbon_ledger::differential_bct(&schedule, &imp, &exp)?;
        let gap = schedule.entries[&exp].red_pct - schedule.entries[&imp].red_pct;
        let shown = if gap > 0 {
            display_bct(gap, red_bct)
        } else {
            0.0
        };
        let mut t = Table::new(&[
            "importer",
            "exporter",
            "year",
            "differential_bct",
            "display_bct",
        ]);
        t.push(vec![
            Cell::text(importer),
            Cell::text(exporter),
            Cell::Int(Some(schedule.year.value() as i64)),
            Cell::tax(Some(value)),
            Cell::exact(Some(shown)),
        ]);
        let stdout = std::io::stdout().lock();
        return match ctx.settings.format {
            Format::Csv => write_csv(stdout, &t, ctx.settings.paper_rounding),
            Format::Json => write_json(stdout, &t, ctx.settings.paper_rounding),
        };
    }
    let mut t = Table::new(&["country", "year", "red_pct", "bct_pct", "display_bct_pct"]);
    for (c, e) in &schedule.entries {
        t.push(vec![
            name(c),
            Cell::Int(Some(schedule.year.value() as i64)),
            Cell::Int(Some(e.red_pct)),
            Cell::tax(Some(e.bct)),
            Cell::exact(Some(display_bct(e.red_pct, red_bct))),
        ]);
    }
    let mut w = ctx.writer()?;
    w.table(&format!("tax_{}", schedule.year), &t)?;
    ctx.finish(&w, "tax")
}

pub fn ets_clear_cmd(ctx: &Context) -> Result<()> {
    let Some(transfers) = &ctx.settings.transfers else {
        bail!("no transfers given; pass --transfers or set `transfers` in the manifest");
    };
    let transfers = load_transfers(transfers)?;
    let (_, ledger) = ctx.annual_ledger()?;
    let opening = match &ctx.settings.positions {
        Some(p) => EtsPositions::load(p)?,
        None => EtsPositions::from_ledger(&ledger, Some(&ctx.panel)),
    };
    let closing = ets_clear(&opening, &transfers)?;
    let red = closing.recompute_red(&ledger)?;

    let mut w = ctx.writer()?;
    let mut t = Table::new(&["country", "credit", "debt", "landuse_debt", "cleared"]);
    for p in closing.iter() {
        t.push(vec![
            name(&p.country),
            Cell::exact(Some(p.credit)),
            Cell::exact(Some(p.debt)),
            Cell::exact(Some(p.landuse_debt)),
            Cell::exact(Some(p.cleared)),
        ]);
    }
    w.table("positions", &t)?;

    let mut r = Table::new(&["country", "year", "red_pct_before", "red_pct_after"]);
    for (c, after) in &red {
        let before = ledger.row(c).and_then(|row| row.red_pct);
        r.push(vec![
            name(c),
            Cell::Int(Some(ledger.year.value() as i64)),
            Cell::Int(before),
            Cell::Int(Some(*after)),
        ]);
    }
    w.table(&format!("red_after_clearing_{}", ledger.year), &r)?;
    log::info!(
        "{} transfers applied, {} cleared in total",
        transfers.len(),
        closing.total_cleared()
    );
    ctx.finish(&w, "ets-clear")
}

#[derive(Debug, Deserialize)]
struct GrowthRecord {
    country: String,
    raw_rate: Option<f64>,
}

pub fn load_growth(path: &Path, floor: f64) -> Result<GrowthProfiles> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening growth file {}", path.display()))?;
    let mut rates = Vec::new();
    for (i, rec) in reader.deserialize::<GrowthRecord>().enumerate() {
        let rec = rec.with_context(|| format!("growth file {} row {}", path.display(), i + 2))?;
        if let Some(r) = rec.raw_rate {
            if !r.is_finite() {
                bail!("growth rate for {} is not finite", rec.country);
            }
            rates.push((CountryId::from(rec.country.as_str()), r));
        }
    }
    Ok(GrowthProfiles::from_raw_rates(rates, floor))
}

fn trajectory_rows(t: &mut Table, traj: &Trajectory) {
    let mode = traj.mode.to_string();
    for state in &traj.states {
        let year = Cell::Int(Some(state.year.value() as i64));
        for (c, s) in &state.countries {
            t.push(vec![
                Cell::text(mode.clone()),
                year.clone(),
                name(c),
                Cell::num(Some(s.ihdigdp)),
                Cell::num(s.mghg_int),
                Cell::num(s.em),
                Cell::Int(s.red_pct),
                Cell::tax(Some(s.bct)),
            ]);
        }
        let (em, gdp) = (state.world_em(), state.world_ihdigdp());
        t.push(vec![
            Cell::text(mode.clone()),
            year,
            Cell::text("WORLD"),
            Cell::num(Some(gdp)),
            Cell::num((gdp > 0.0).then(|| em / gdp)),
            Cell::num(Some(em)),
            Cell::Int(None),
            Cell::tax(None),
        ]);
    }
}

pub fn simulate(ctx: &Context, mode: ModeArg) -> Result<()> {
    let s = &ctx.settings;
    let z = ctx.z()?;
    let scenarios = ctx.scenarios()?;
    let year = ctx.year()?;
    let table = IndicatorTable::compute(&ctx.panel, year, &z)?;
    let ledger = annual_ledger(&table, &scenarios)?;
    let mut config = s.projection.clone();
    if !s.horizon_set {
        let len = config.end_year.value() - config.start_year.value();
        config.start_year = year.offset(1)?;
        config.end_year = year.offset(1 + len)?;
    }
    let profiles = match &s.growth {
        Some(p) => load_growth(p, config.global_floor)?,
        None => {
            let (a, b) = s.growth_window;
            estimate_growth(&ctx.panel, &z, a, b, config.global_floor)?
        }
    };
    let initial = ProjectionState::from_ledger(&ledger, config.red_bct)?;
    let modes: &[Mode] = match mode {
        ModeArg::Ct => &[Mode::Ct],
        ModeArg::Nc => &[Mode::Nc],
        ModeArg::Both => &[Mode::Ct, Mode::Nc],
    };
    let runs = modes
        .iter()
        .map(|m| run_projection(&initial, &profiles, &config, &scenarios, *m))
        .collect::<carbon_ledger::Result<Vec<_>>>()?;

    let mut t = Table::new(&[
        "mode", "year", "country", "ihdigdp", "mghg_int", "em", "red_pct", "bct",
    ]);
    let mut plot = Table::new(&["mode", "series", "year", "value"]);
    for traj in &runs {
        trajectory_rows(&mut t, traj);
        for (series, points) in [
            ("world_em", traj.world_em()),
            ("world_ihdigdp", traj.world_ihdigdp()),
        ] {
            for (y, v) in points {
                plot.push(vec![
                    Cell::text(traj.mode.to_string()),
                    Cell::text(series),
                    Cell::Int(Some(y.value() as i64)),
                    Cell::num(Some(v)),
                ]);
            }
        }
        let last = traj.last();
        log::info!(
            "{}: world emissions {} in {}",
            traj.mode,
            last.world_em(),
            last.year
        );
    }
    let mut w = ctx.writer()?;
    w.table("trajectory", &t)?;
    w.csv("plot_data.csv", &plot)?;
    ctx.finish(&w, "simulate")
}

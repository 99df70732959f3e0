//! Run manifest and the flag > manifest > default resolution.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use carbon_ledger::{ProjectionConfig, Year};
use serde::{Deserialize, Serialize};

use crate::args::{CommonArgs, Format};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub panel: Option<PathBuf>,
    pub scenarios: Option<PathBuf>,
    pub gwp: Option<PathBuf>,
    pub transfers: Option<PathBuf>,
    pub positions: Option<PathBuf>,
    pub growth: Option<PathBuf>,
    pub totals: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub paper_rounding: Option<bool>,
    pub year: Option<i32>,
    pub window: Option<String>,
    pub snapshot_year: Option<i32>,
    pub norm_year: Option<i32>,
    pub z: Option<f64>,
    pub red_bct: Option<f64>,
    pub em_world_1990: Option<f64>,
    #[serde(default)]
    pub projection: ProjectionManifest,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionManifest {
    pub tax_drag: Option<f64>,
    pub tax_abatement: Option<f64>,
    pub tech_rate: Option<f64>,
    pub floor: Option<f64>,
    pub horizon: Option<String>,
    pub growth_window: Option<String>,
}

impl RunManifest {
    /// Reads a manifest; relative paths are taken from the manifest's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let mut m: RunManifest = toml::from_str(&text)
            .with_context(|| format!("parsing manifest {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut m.panel,
            &mut m.scenarios,
            &mut m.gwp,
            &mut m.transfers,
            &mut m.positions,
            &mut m.growth,
            &mut m.totals,
            &mut m.out,
        ] {
            if let Some(rel) = p.as_mut().filter(|p| p.is_relative()) {
                *rel = base.join(&*rel);
            }
        }
        Ok(m)
    }
}

pub fn parse_window(s: &str) -> Result<(Year, Year)> {
    let (a, b) = s
        .split_once(['-', ':'])
        .ok_or_else(|| anyhow!("window `{s}` must look like FROM-TO"))?;
    let from = Year::new(
        a.trim()
            .parse()
            .with_context(|| format!("window start `{a}`"))?,
    )?;
    let to = Year::new(
        b.trim()
            .parse()
            .with_context(|| format!("window end `{b}`"))?,
    )?;
    if to < from {
        bail!("window `{s}` is reversed");
    }
    Ok((from, to))
}

/// Fully resolved parameters for one invocation.
#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub panel: Option<PathBuf>,
    pub scenarios: Option<PathBuf>,
    pub gwp: Option<PathBuf>,
    pub transfers: Option<PathBuf>,
    pub positions: Option<PathBuf>,
    pub growth: Option<PathBuf>,
    pub totals: Option<PathBuf>,
    pub out: PathBuf,
    pub format: Format,
    pub paper_rounding: bool,
    pub timestamp: bool,
    pub year: Option<Year>,
    pub window: Option<(Year, Year)>,
    pub snapshot_year: Year,
    pub norm_year: Year,
    pub z: Option<f64>,
    pub red_bct: f64,
    pub em_world_1990: Option<f64>,
    pub projection: ProjectionConfig,
    pub growth_window: (Year, Year),
    /// False when the horizon is the built-in default.
    pub horizon_set: bool,
}

/// Per-command flags that can also come from the manifest.
#[derive(Debug, Default)]
pub struct CommandOverrides {
    pub transfers: Option<PathBuf>,
    pub positions: Option<PathBuf>,
    pub growth: Option<PathBuf>,
    pub totals: Option<PathBuf>,
    pub window: Option<String>,
    pub horizon: Option<String>,
    pub growth_window: Option<String>,
    pub tax_drag: Option<f64>,
    pub tax_abatement: Option<f64>,
    pub tech_rate: Option<f64>,
    pub floor: Option<f64>,
}

impl Settings {
    pub fn resolve(
        flags: &CommonArgs,
        cmd: CommandOverrides,
        env_out: Option<PathBuf>,
    ) -> Result<Self> {
        let m = match &flags.manifest {
            Some(p) => RunManifest::load(p)?,
            None => RunManifest::default(),
        };
        let year = |v: Option<i32>| v.map(Year::new).transpose();
        let defaults = ProjectionConfig::default();
        let pm = &m.projection;
        let window = cmd
            .window
            .or(m.window)
            .map(|w| parse_window(&w))
            .transpose()?;
        let growth_window = match cmd.growth_window.or(pm.growth_window.clone()) {
            Some(w) => parse_window(&w)?,
            None => (Year::new(2000)?, Year::new(2009)?),
        };
        let mut projection = ProjectionConfig {
            tax_drag: cmd.tax_drag.or(pm.tax_drag).unwrap_or(defaults.tax_drag),
            tax_abatement: cmd
                .tax_abatement
                .or(pm.tax_abatement)
                .unwrap_or(defaults.tax_abatement),
            tech_rate: cmd.tech_rate.or(pm.tech_rate).unwrap_or(defaults.tech_rate),
            global_floor: cmd.floor.or(pm.floor).unwrap_or(defaults.global_floor),
            red_bct: flags.red_bct.or(m.red_bct).unwrap_or(defaults.red_bct),
            ..defaults
        };
        let horizon = cmd.horizon.or(pm.horizon.clone());
        let horizon_set = horizon.is_some();
        if let Some(h) = horizon {
            // FROM-TO where TO may be FROM-1 for an empty horizon
            let (a, b) = h
                .split_once(['-', ':'])
                .ok_or_else(|| anyhow!("horizon `{h}` must look like FROM-TO"))?;
            projection.start_year = Year::new(
                a.trim()
                    .parse()
                    .with_context(|| format!("horizon start `{a}`"))?,
            )?;
            projection.end_year = Year::new(
                b.trim()
                    .parse()
                    .with_context(|| format!("horizon end `{b}`"))?,
            )?;
        }
        projection.validate()?;
        let settings = Settings {
            panel: flags.panel.clone().or(m.panel),
            scenarios: flags.scenarios.clone().or(m.scenarios),
            gwp: flags.gwp.clone().or(m.gwp),
            transfers: cmd.transfers.or(m.transfers),
            positions: cmd.positions.or(m.positions),
            growth: cmd.growth.or(m.growth),
            totals: cmd.totals.or(m.totals),
            out: flags
                .out
                .clone()
                .or(m.out)
                .or(env_out)
                .unwrap_or_else(|| PathBuf::from("out")),
            format: flags.format.or(m.format).unwrap_or(Format::Csv),
            paper_rounding: flags.paper_rounding || m.paper_rounding.unwrap_or(false),
            timestamp: !flags.no_timestamp,
            year: year(flags.year.or(m.year))?,
            window,
            snapshot_year: Year::new(flags.snapshot_year.or(m.snapshot_year).unwrap_or(1990))?,
            norm_year: Year::new(flags.norm_year.or(m.norm_year).unwrap_or(1990))?,
            z: flags.z.or(m.z),
            red_bct: projection.red_bct,
            em_world_1990: flags.em_world_1990.or(m.em_world_1990),
            projection,
            growth_window,
            horizon_set,
        };
        for (name, path) in [
            ("panel", &settings.panel),
            ("scenarios", &settings.scenarios),
            ("gwp", &settings.gwp),
            ("transfers", &settings.transfers),
            ("positions", &settings.positions),
            ("growth", &settings.growth),
            ("totals", &settings.totals),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    bail!("{name} file {} does not exist", p.display());
                }
            }
        }
        Ok(settings)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn windows() {
        let (a, b) = parse_window("1990-2009").unwrap();
        assert_eq!((a.value(), b.value()), (1990, 2009));
        assert!(parse_window("2009:1990").is_err());
        assert!(parse_window("1990").is_err());
    }

    #[test]
    fn flag_beats_manifest_beats_default() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "red_bct = 50.0\nyear = 2009\n[projection]\ntech_rate = 0.02\n",
        )
        .unwrap();
        let flags = CommonArgs {
            manifest: Some(path),
            year: Some(2008),
            ..Default::default()
        };
        let s =
            Settings::resolve(&flags, CommandOverrides::default(), Some("envout".into())).unwrap();
        assert_eq!(s.year.unwrap().value(), 2008);
        assert_eq!(s.red_bct, 50.0);
        assert_eq!(s.projection.tech_rate, 0.02);
        assert_eq!(s.projection.tax_drag, 0.005);
        assert_eq!(s.out, PathBuf::from("envout"));
    }

    #[test]
    fn manifest_paths_are_relative_to_manifest() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("p.csv"), "").unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "panel = \"p.csv\"\n").unwrap();
        let m = RunManifest::load(&path).unwrap();
        assert_eq!(m.panel.unwrap(), dir.path().join("p.csv"));
    }

    #[test]
    fn unknown_manifest_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "bogus = 1\n").unwrap();
        assert!(RunManifest::load(&path).is_err());
    }
}

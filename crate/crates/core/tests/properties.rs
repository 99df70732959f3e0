mod common;

use carbon_ledger::data_model::{read_panel, write_panel};
use carbon_ledger::indicators::{balanced_ihdixcapita, fit_z};
use carbon_ledger::policy_engine::{
    bct, ets_clear, EtsPosition, EtsPositions, Transfer, TransferTarget,
};
use carbon_ledger::projection::{run_projection, step_ct, Mode, ProjectionConfig};
use carbon_ledger::scenario_ledger::{Ledger, LedgerInput, Limits};
use carbon_ledger::{
    aggregate_world, differential_bct, total_emissions, CountryId, CountryObservation,
    CountryPanel, Field, GasInventory, IndicatorTable, PanelFormat, TaxSchedule, ZNormalization,
};
use common::{rel_err, y};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn opt(range: std::ops::Range<f64>) -> impl Strategy<Value = Option<f64>> {
    prop::option::weighted(0.8, range)
}

prop_compose! {
    fn observation(code: String, year: i32)(
        gdp in opt(0.0..20_000.0),
        pop in opt(0.0..2e9),
        ihdi in opt(0.0..10_000.0),
        co2 in opt(0.0..10_000.0),
        ch4 in opt(0.0..1_000.0),
        nox in opt(0.0..500.0),
        hps in opt(0.0..100.0),
        landuse in opt(-500.0..500.0),
    ) -> CountryObservation {
        let mut o = CountryObservation::new(code.as_str(), y(year));
        o.gdp_ppp = gdp;
        o.population = pop;
        o.ihdi = ihdi;
        o.emissions = GasInventory { co2, ch4, nox, hps };
        o.landuse_em = landuse;
        o
    }
}

fn panel_strategy() -> impl Strategy<Value = CountryPanel> {
    (1usize..25, prop::collection::vec(1990i32..2021, 1..4)).prop_flat_map(|(n, years)| {
        let mut obs = Vec::new();
        let mut years = years;
        years.sort();
        years.dedup();
        for i in 0..n {
            for yr in &years {
                obs.push(observation(format!("K{i:02}"), *yr));
            }
        }
        obs.prop_map(|v| {
            let mut p = CountryPanel::new();
            for o in v {
                p.insert(o).unwrap();
            }
            p
        })
    })
}

/// Complete 2009 world: every country has GDP, IHDI, population and emissions.
fn complete_world() -> impl Strategy<Value = CountryPanel> {
    prop::collection::vec(
        (
            1.0..15_000.0f64,
            1_000.0..9_500.0f64,
            1e5..1.5e9f64,
            0.0..12_000.0f64,
        ),
        1..30,
    )
    .prop_map(|rows| {
        let mut p = CountryPanel::new();
        for (i, (gdp, ihdi, pop, em)) in rows.into_iter().enumerate() {
            let code = format!("K{i:02}");
            let mut o = CountryObservation::new(code.as_str(), y(1990));
            o.population = Some(pop);
            p.insert(o).unwrap();
            let mut o = CountryObservation::new(code.as_str(), y(2009));
            o.gdp_ppp = Some(gdp);
            o.ihdi = Some(ihdi);
            o.emissions.co2 = Some(em);
            p.insert(o).unwrap();
        }
        p
    })
}

fn ledger_of(table: &IndicatorTable, green: f64, red: f64) -> Ledger {
    let inputs: Vec<LedgerInput> = table
        .rows
        .iter()
        .map(|r| LedgerInput {
            country: r.country.clone(),
            ihdigdp: r.ihdigdp,
            em: r.em,
        })
        .collect();
    Ledger::compute(
        table.year,
        &inputs,
        Limits::new(green, red, table.year).unwrap(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn panel_round_trip(p in panel_strategy()) {
        let mut buf = Vec::new();
        write_panel(&p, &mut buf).unwrap();
        prop_assert_eq!(read_panel(buf.as_slice(), PanelFormat::Co2Equivalent).unwrap(), p);
    }

    #[test]
    fn total_emissions_monotone(o in observation("X".into(), 2009), extra in 0.0..1_000.0f64) {
        let before = total_emissions(&o);
        let mut more = o.clone();
        more.emissions.ch4 = Some(more.emissions.ch4.unwrap_or(0.0) + extra);
        prop_assert!(total_emissions(&more).unwrap() >= before.unwrap_or(0.0));
    }

    #[test]
    fn aggregate_over_partition(p in panel_strategy(), cut in 0usize..25) {
        let year = p.years().next().unwrap();
        let (mut left, mut right) = (CountryPanel::new(), CountryPanel::new());
        for (i, o) in p.year(year).enumerate() {
            if i < cut { left.insert(o.clone()).unwrap() } else { right.insert(o.clone()).unwrap() }
        }
        let part = |q: &CountryPanel| aggregate_world(q, year, Field::GdpPpp).map(|a| a.value).unwrap_or(0.0);
        let whole = part(&p);
        prop_assert!((part(&left) + part(&right) - whole).abs() <= 1e-9 * whole.max(1.0));
    }

    #[test]
    fn balanced_ihdixcapita_bounded(p in complete_world()) {
        let z = ZNormalization::fixed(0.3, y(1990)).unwrap();
        let t = IndicatorTable::compute(&p, y(2009), &z).unwrap();
        for r in &t.rows {
            prop_assert!(r.ihdixcapita_bal.unwrap() <= t.context.gdp_ppp_max * (1.0 + 1e-15));
        }
        let arg = t.row(&t.context.argmax_country).unwrap();
        prop_assert_eq!(balanced_ihdixcapita(arg.ihdixcapita, &t.context), Some(t.context.gdp_ppp_max));
    }

    #[test]
    fn normalization_and_joint_scaling(p in complete_world(), k in 0.01..100.0f64) {
        let p = p.with_normalization_year(y(2009));
        let z = fit_z(&p).unwrap();
        let t = IndicatorTable::compute(&p, y(2009), &z).unwrap();
        let world_gdp = aggregate_world(&p, y(2009), Field::GdpPpp).unwrap().value;
        prop_assert!(rel_err(t.world_ihdigdp().unwrap(), world_gdp) <= 1e-9);

        let mut scaled = CountryPanel::new().with_normalization_year(y(2009));
        for o in p.observations() {
            let mut o = o.clone();
            o.gdp_ppp = o.gdp_ppp.map(|g| g * k);
            o.population = o.population.map(|c| c * k);
            scaled.insert(o).unwrap();
        }
        prop_assert!(rel_err(fit_z(&scaled).unwrap().z, z.z) <= 1e-12);
    }

    #[test]
    fn gdp_scaling_keeps_ranking(p in complete_world(), k in 0.01..100.0f64) {
        let z = ZNormalization::fixed(1.0, y(1990)).unwrap();
        let rank = |q: &CountryPanel| {
            let t = IndicatorTable::compute(q, y(2009), &z).unwrap();
            let mut v: Vec<(f64, CountryId)> = t.rows.iter().map(|r| (r.gdp_bal.unwrap(), r.country.clone())).collect();
            v.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            v.into_iter().map(|x| x.1).collect::<Vec<_>>()
        };
        let mut scaled = CountryPanel::new();
        for o in p.observations() {
            let mut o = o.clone();
            o.gdp_ppp = o.gdp_ppp.map(|g| g * k);
            scaled.insert(o).unwrap();
        }
        prop_assert_eq!(rank(&p), rank(&scaled));
    }

    #[test]
    fn ledger_identities(p in complete_world(), share in 0.5..1.5f64, gap in 0.01..0.5f64) {
        let z = ZNormalization::fixed(0.3, y(1990)).unwrap();
        let t = IndicatorTable::compute(&p, y(2009), &z).unwrap();
        let world_em = t.world_em().unwrap();
        let green = world_em * share + 1.0;
        let l = ledger_of(&t, green, green * (1.0 + gap));
        let admem: f64 = l.rows.iter().filter_map(|r| r.admem).sum();
        prop_assert!(rel_err(admem, green) <= 1e-9);
        let mut balance = 0.0;
        for r in &l.rows {
            let (c, d) = (r.credit.unwrap(), r.debt.unwrap());
            prop_assert!(c >= 0.0 && d >= 0.0 && c * d == 0.0);
            if d == 0.0 {
                prop_assert_eq!(r.red_pct, Some(0));
            }
            balance += d - c;
        }
        prop_assert!((balance - (world_em - green)).abs() <= 1e-9 * world_em.max(green));
    }

    #[test]
    fn red_monotone_in_emissions(p in complete_world(), who in 0usize..30, bump in 0.0..5_000.0f64) {
        let z = ZNormalization::fixed(0.3, y(1990)).unwrap();
        let t = IndicatorTable::compute(&p, y(2009), &z).unwrap();
        let i = who % t.rows.len();
        let green = t.world_em().unwrap() + 1.0;
        let base = ledger_of(&t, green, green * 1.2);
        let mut t2 = t.clone();
        t2.rows[i].em = t2.rows[i].em.map(|e| e + bump);
        let more = ledger_of(&t2, green, green * 1.2);
        prop_assert!(more.rows[i].red_pct.unwrap() >= base.rows[i].red_pct.unwrap());
    }

    #[test]
    fn red_scale_invariant(p in complete_world(), k in 0.01..100.0f64) {
        let z = ZNormalization::fixed(0.3, y(1990)).unwrap();
        let t = IndicatorTable::compute(&p, y(2009), &z).unwrap();
        let green = t.world_em().unwrap();
        let mut t2 = t.clone();
        for r in &mut t2.rows {
            r.ihdigdp = r.ihdigdp.map(|v| v * k);
        }
        let (a, b) = (ledger_of(&t, green, green * 1.1), ledger_of(&t2, green, green * 1.1));
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            let (fa, fb) = (100.0 * ra.debt.unwrap() / ra.margin.unwrap(), 100.0 * rb.debt.unwrap() / rb.margin.unwrap());
            // equal up to rounding unless the quotient sits on an integer boundary
            if (fa - fa.round()).abs() > 1e-6 {
                prop_assert_eq!(ra.red_pct, rb.red_pct);
            } else {
                prop_assert!(rel_err(fa, fb) <= 1e-9 || ra.debt == Some(0.0));
            }
        }
    }

    #[test]
    fn bct_monotone_and_differential_antisymmetric(reds in prop::collection::vec(0i64..3_000, 2..10), a in 0usize..10, b in 0usize..10) {
        for w in reds.windows(2) {
            let (lo, hi) = (w[0].min(w[1]), w[0].max(w[1]));
            prop_assert!(bct(lo, 100.0) <= bct(hi, 100.0));
        }
        let inputs: Vec<LedgerInput> = reds
            .iter()
            .enumerate()
            .map(|(i, _)| LedgerInput { country: CountryId::new(format!("K{i}")), ihdigdp: Some(1.0), em: Some(1.0) })
            .collect();
        let ledger = Ledger::compute(y(2009), &inputs, Limits::new(1.0, 2.0, y(2009)).unwrap()).unwrap();
        let mut s = TaxSchedule::from_ledger(&ledger, 100.0).unwrap();
        for (i, r) in reds.iter().enumerate() {
            let e = s.entries.get_mut(&CountryId::new(format!("K{i}"))).unwrap();
            e.red_pct = *r;
            e.bct = bct(*r, 100.0);
        }
        let (ca, cb) = (CountryId::new(format!("K{}", a % reds.len())), CountryId::new(format!("K{}", b % reds.len())));
        let d_ab = differential_bct(&s, &ca, &cb).unwrap();
        let d_ba = differential_bct(&s, &cb, &ca).unwrap();
        prop_assert!(d_ab >= 0.0 && d_ba >= 0.0 && d_ab * d_ba == 0.0);
        prop_assert!((d_ab - d_ba - (s.bct(&cb).unwrap() - s.bct(&ca).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn ets_conservation_and_order(
        book in prop::collection::vec((0.0..100.0f64, 0.0..100.0f64, prop::bool::weighted(0.3)), 2..6),
        moves in prop::collection::vec((0usize..6, 0usize..6, 0.01..40.0f64, any::<bool>()), 0..10),
    ) {
        let n = book.len();
        let positions = EtsPositions::new(book.iter().enumerate().map(|(i, (c, d, lu))| {
            EtsPosition::new(format!("P{i}").as_str(), *c, *d, if *lu { 5.0 } else { 0.0 })
        })).unwrap();
        let transfers: Vec<Transfer> = moves
            .iter()
            .enumerate()
            .filter(|(_, (s, b, _, _))| s % n != b % n)
            .map(|(k, (s, b, amount, emission))| Transfer {
                seq: k as u64,
                seller: CountryId::new(format!("P{}", s % n)),
                buyer: CountryId::new(format!("P{}", b % n)),
                amount: *amount,
                target: if *emission { TransferTarget::Emission } else { TransferTarget::Landuse },
            })
            .collect();
        let before = positions.total_credit() + positions.total_cleared();
        let forward = ets_clear(&positions, &transfers);
        if let Ok(after) = &forward {
            prop_assert!(rel_err(after.total_credit() + after.total_cleared(), before) <= 1e-12);
            let mut reversed = transfers.clone();
            reversed.reverse();
            if let Ok(back) = ets_clear(&positions, &reversed) {
                prop_assert!((back.total_debt() - after.total_debt()).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn projection_properties(seed in any::<u64>(), extra_drag in 0.0..0.01f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::random::world(&mut rng);
        let ct = run_projection(&w.initial, &w.profiles, &w.config, &w.scenarios, Mode::Ct).unwrap();
        let again = run_projection(&w.initial, &w.profiles, &w.config, &w.scenarios, Mode::Ct).unwrap();
        prop_assert_eq!(&ct, &again);
        let nc = run_projection(&w.initial, &w.profiles, &w.config, &w.scenarios, Mode::Nc).unwrap();
        for (a, b) in ct.states.iter().zip(&nc.states) {
            prop_assert!(a.world_em() <= b.world_em());
            for s in a.countries.values() {
                prop_assert!(s.ihdigdp >= 0.0 && s.bct >= 0.0);
                if let (Some(m), Some(e)) = (s.mghg_int, s.em) {
                    prop_assert!(m >= 0.0);
                    prop_assert_eq!(e, s.ihdigdp * m);
                }
            }
        }
        // with the incoming taxes held fixed, more drag never raises activity
        let harsher = ProjectionConfig { tax_drag: w.config.tax_drag + extra_drag, ..w.config.clone() };
        for state in &ct.states[..ct.states.len() - 1] {
            let (Ok(a), Ok(b)) = (step_ct(state, &w.profiles, &w.config, &w.scenarios), step_ct(state, &w.profiles, &harsher, &w.scenarios)) else {
                continue;
            };
            for (c, s) in &a.countries {
                prop_assert!(b.countries[c].ihdigdp <= s.ihdigdp, "{} in {}", c, a.year);
            }
        }
    }

    #[test]
    fn zero_rates_compound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::random::world(&mut rng);
        let cfg = ProjectionConfig { tax_drag: 0.0, tax_abatement: 0.0, tech_rate: 0.0, ..w.config.clone() };
        let t = run_projection(&w.initial, &w.profiles, &cfg, &w.scenarios, Mode::Ct).unwrap();
        for (step, s) in t.states.iter().enumerate() {
            for (c, st) in &s.countries {
                let oracle = w.initial.countries[c].ihdigdp * (1.0 + w.profiles.rate(c)).powi(step as i32);
                prop_assert!(rel_err(st.ihdigdp, oracle) <= 1e-12);
            }
        }
    }
}

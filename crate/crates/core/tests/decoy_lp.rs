mod common;

use common::planted::{exact_rows, protocol, random_plant, random_protocol, Plant, PLANT_CUT};
use proptest::prelude::*;
use qnet_core::finite_key::{
    finite_key_pipeline, finite_key_pipeline_with, DecoyLp, GainRow, HConstraint, PipelineOptions, DEFAULT_N_CUT,
};
use qnet_core::sim::analytic_tally;
use qnet_core::{IntensityProtocol, LinkModel, Tag};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const REL_TOL: f64 = 1e-9;

fn bounds(plant: &Plant, p: &IntensityProtocol, vacuum_half: bool) -> (f64, f64) {
    let (g, e) = exact_rows(plant, p);
    let mut lp = DecoyLp::exact(p, &g, &e, DEFAULT_N_CUT, REL_TOL).unwrap();
    lp.vacuum_error_half = vacuum_half;
    let s11 = lp.min_y11(HConstraint::Interval).unwrap();
    let t11 = lp.max_t11(HConstraint::Interval).unwrap();
    (s11, t11)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn planted_models_are_bounded_soundly(seed in any::<u64>(), vacuum_half in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let plant = random_plant(&mut rng, vacuum_half);
        let p = random_protocol(&mut rng);
        let (s11, t11) = bounds(&plant, &p, vacuum_half);
        prop_assert!(s11 <= plant.y11() * (1.0 + 1e-6) + 1e-15, "s11 {} > Y11 {}", s11, plant.y11());
        prop_assert!(t11 >= plant.y11() * plant.e11() * (1.0 - 1e-6) - 1e-15);
        if s11 > 0.0 {
            let e11 = (t11 / s11).min(0.5);
            prop_assert!(e11 >= plant.e11() * (1.0 - 1e-6) - 1e-12, "e11 {} < {}", e11, plant.e11());
        }
    }
}

fn flat_plant(y11: f64, e: f64) -> Plant {
    let k = PLANT_CUT + 1;
    let mut y = vec![vec![0.0; k]; k];
    for (n, row) in y.iter_mut().enumerate() {
        for (m, v) in row.iter_mut().enumerate() {
            *v = match (n, m) {
                (0, 0) => 1e-7,
                (0, _) | (_, 0) => 2e-4,
                (1, 1) => y11,
                _ => (2.0 * y11).min(1.0),
            };
        }
    }
    Plant { y, e: vec![vec![e; k]; k] }
}

#[test]
fn planted_single_photon_yield_is_recovered_from_below() {
    let p = protocol(0.636, 0.204, 0.054);
    let plant = flat_plant(1e-3, 0.25);
    let (s11, t11) = bounds(&plant, &p, false);
    assert!(s11 > 0.0 && s11 <= 1e-3 * (1.0 + 1e-6), "s11 {s11}");
    assert!(t11 / s11 >= 0.25 * (1.0 - 1e-6));
}

#[test]
fn error_free_plant_bounds_error_at_zero() {
    let p = protocol(0.636, 0.204, 0.054);
    let plant = flat_plant(1e-3, 0.0);
    let (s11, t11) = bounds(&plant, &p, false);
    assert!(s11 > 0.0);
    assert!(t11 / s11 < 1e-6, "e11 {}", t11 / s11);
}

#[test]
fn widening_rows_never_tightens_bounds() {
    let p = protocol(0.636, 0.204, 0.054);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let plant = random_plant(&mut rng, true);
    let (g, e) = exact_rows(&plant, &p);
    let base = DecoyLp::exact(&p, &g, &e, DEFAULT_N_CUT, REL_TOL).unwrap();
    let (s0, t0) = (base.min_y11(HConstraint::None).unwrap(), base.max_t11(HConstraint::None).unwrap());
    for widen in [1e-3, 1e-2, 1e-1] {
        let rows = |src: &[GainRow]| -> Vec<GainRow> {
            src.iter()
                .map(|r| GainRow {
                    terms: r.terms.clone(),
                    lower: r.lower * (1.0 - widen),
                    upper: r.upper * (1.0 + widen),
                })
                .collect()
        };
        let wide = DecoyLp::new(&p, DEFAULT_N_CUT, rows(base.gain_rows()), rows(base.error_rows()), None).unwrap();
        let s = wide.min_y11(HConstraint::None).unwrap();
        let t = wide.max_t11(HConstraint::None).unwrap();
        assert!(s <= s0 * (1.0 + 1e-9) + 1e-15, "widen {widen}: {s} > {s0}");
        assert!(t >= t0 * (1.0 - 1e-9) - 1e-15, "widen {widen}: {t} < {t0}");
    }
}

#[test]
fn cross_basis_rows_are_rejected() {
    let p = protocol(0.636, 0.204, 0.054);
    let rows = vec![GainRow::single(Tag::Z, Tag::X, 0.0, 1.0)];
    assert!(DecoyLp::new(&p, DEFAULT_N_CUT, rows, vec![], None).is_err());
}

#[test]
fn analytic_thirty_db_rate_has_expected_scale() {
    let link = LinkModel::symmetric(30.0);
    let p = IntensityProtocol::baseline();
    let t = analytic_tally(&link, &p, p.n_pulses, None).unwrap();
    let r = finite_key_pipeline(&t, &p, 1e-10, 1.16).unwrap();
    assert!(r.rate_per_pulse > 1e-6 && r.rate_per_pulse < 1e-5, "{}", r.rate_per_pulse);
    assert!(r.s11_lower > 0.0 && r.e11ph_upper < 0.5);
}

#[test]
fn looser_security_parameter_never_lowers_rate() {
    let link = LinkModel::symmetric(30.0);
    let p = IntensityProtocol::baseline();
    let t = analytic_tally(&link, &p, p.n_pulses, None).unwrap();
    let rates: Vec<f64> = [1e-14, 1e-10, 1e-6]
        .iter()
        .map(|&eps| finite_key_pipeline(&t, &p, eps, 1.16).unwrap().rate_per_pulse)
        .collect();
    assert!(rates[0] <= rates[1] * (1.0 + 1e-6) && rates[1] <= rates[2] * (1.0 + 1e-6), "{rates:?}");
}

#[test]
fn zz_without_error_count_is_rejected() {
    let p = IntensityProtocol::baseline();
    let mut t = common::tally(0);
    let zz = *t.get(Tag::Z, Tag::Z).unwrap();
    t.insert(Tag::Z, Tag::Z, qnet_core::TallyEntry::new(zz.sent, zz.success, None)).unwrap();
    assert!(finite_key_pipeline_with(&t, &p, &PipelineOptions::default()).is_err());
}

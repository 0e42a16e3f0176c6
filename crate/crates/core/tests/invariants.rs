use proptest::prelude::*;
use thermoform::beta::{BetaSystem, BetaValue};
use thermoform::dimension::{temperature, CellWeighting, GlsModel, PressureSettings};
use thermoform::gdms::{Branch, BranchMap, Gdms, Interval};
use thermoform::shift::{entropy_from_pressure, pressure, rpf_eigendata, GibbsMarkovMeasure, Potential, ShiftSpace};

fn moran(ratios: &[f64]) -> Gdms {
    let mut offset = 0.0;
    let branches = ratios
        .iter()
        .enumerate()
        .map(|(e, &r)| {
            let b = Branch::new(e.to_string(), 0, 0, BranchMap::affine(r, offset));
            offset += r;
            b
        })
        .collect();
    Gdms::finite("moran", vec![Interval::unit()], branches).unwrap()
}

fn ratios() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, 2..5).prop_map(|v| {
        let total: f64 = v.iter().sum::<f64>() * 1.25;
        v.into_iter().map(|x| x / total).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pressure_is_the_log_eigenvalue(table in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 3), 3)) {
        let psi = Potential::pair_table(table);
        let space = ShiftSpace::full(3);
        let p = pressure(&space, &psi, 200, 3).unwrap().value;
        let e = rpf_eigendata(&space, &psi, 3).unwrap();
        prop_assert!((p - e.log_rho).abs() < 1e-9, "{p} vs {}", e.log_rho);
    }

    #[test]
    fn variational_principle(values in prop::collection::vec(-3.0f64..3.0, 2..6)) {
        let psi = Potential::letter_table(values.clone());
        let k = values.len();
        let mu = GibbsMarkovMeasure::from_potential(&ShiftSpace::full(k), &psi, k).unwrap();
        prop_assert!((entropy_from_pressure(&mu, &psi) - mu.chain_entropy()).abs() < 1e-10);
        prop_assert!(mu.chain_entropy() <= (k as f64).ln() + 1e-12);
    }

    #[test]
    fn fiber_prediction_never_exceeds_one(weights in prop::collection::vec(0.01f64..1.0, 1..12)) {
        let b = BetaSystem::new(BetaValue::rational(9, 5)).unwrap();
        let m = GlsModel::new(&b, &CellWeighting::Bernoulli { weights }, 256).unwrap();
        let chi = m.lyapunov_closed_form(1e-6).unwrap();
        prop_assert!(m.entropy() <= chi.value * (1.0 + 1e-12));
    }

    #[test]
    fn temperature_decreases_in_q(r in ratios(), q in -1.0f64..2.0) {
        let s = moran(&r);
        let theta: Vec<f64> = r.iter().map(|x| x.ln()).collect();
        let p_theta = theta.iter().map(|t| t.exp()).sum::<f64>().ln();
        let th = Potential::letter_table(theta);
        let settings = PressureSettings::default();
        let bracket = Some((-10.0, 10.0));
        let lo = temperature(&s, Some((&th, p_theta)), q, bracket, &settings).unwrap();
        let hi = temperature(&s, Some((&th, p_theta)), q + 0.5, bracket, &settings).unwrap();
        prop_assert!(hi.t < lo.t);
        let one = temperature(&s, Some((&th, p_theta)), 1.0, bracket, &settings).unwrap();
        prop_assert!(one.t.abs() < 1e-9, "T(1) = {}", one.t);
    }

    #[test]
    fn moran_dimension_solves_the_moran_equation(r in ratios()) {
        let s = moran(&r);
        let t = temperature(&s, None, 0.0, None, &PressureSettings::default()).unwrap().t;
        let sum: f64 = r.iter().map(|x| x.powf(t)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-9);
        prop_assert!(t > 0.0 && t < 1.0);
    }
}

#[test]
fn lebesgue_weighting_has_unit_prediction() {
    for v in [BetaValue::Golden, BetaValue::rational(9, 5), BetaValue::Pi] {
        let b = BetaSystem::new(v).unwrap();
        let m = GlsModel::new(&b, &CellWeighting::Lengths { exponent: 1.0 }, 256).unwrap();
        let chi = m.lyapunov_closed_form(1e-6).unwrap();
        assert!((m.entropy() / chi.value - 1.0).abs() < 1e-6, "h/chi = {}", m.entropy() / chi.value);
    }
}

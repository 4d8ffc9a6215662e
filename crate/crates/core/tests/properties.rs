use lhv_core::freewill::{measure_m, mutual_information, DiscretizedModel};
use lhv_core::geometry::Vector3;
use lhv_core::inequalities::correlator::chsh_combination;
use lhv_core::inequalities::master::MasterProb16;
use lhv_core::models::laws::malus_marginal;
use lhv_core::scalar::ratio;
use lhv_core::{Exact, Model, ModelId, Outcome, Settings, TbFamily, UnitVector};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn unit() -> impl Strategy<Value = UnitVector> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(z, phi)| UnitVector::from_spherical(z, phi))
}

type LawFn = Box<dyn Fn(&Settings) -> lhv_core::Law>;

fn closed_forms(p: f64) -> Vec<LawFn> {
    vec![
        Box::new(|s| ModelId::Singlet.closed_form_law(1.0, s).unwrap()),
        Box::new(|s| ModelId::Mixed.closed_form_law(1.0, s).unwrap()),
        Box::new(move |s| lhv_core::models::laws::tb_extension_law(p, TbFamily::SettingDependent, s).unwrap()),
        Box::new(move |s| lhv_core::models::laws::tb_extension_law(p, TbFamily::OutcomeDependent, s).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn normalization_is_idempotent(x in -5.0f64..5.0, y in -5.0f64..5.0, z in -5.0f64..5.0) {
        prop_assume!(x * x + y * y + z * z > 1e-6);
        let once = Vector3::new(x, y, z).normalize().unwrap();
        let twice = once.as_vector().normalize().unwrap();
        prop_assert_eq!(once, twice);
        prop_assert!((once.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dot_is_symmetric_and_bounded(a in unit(), b in unit()) {
        prop_assert_eq!(a.dot(&b), b.dot(&a));
        prop_assert!(a.dot(&b).abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn closed_form_laws_are_valid_and_non_signaling(a in unit(), a2 in unit(), b in unit(), b2 in unit(), p in 0.0f64..=1.0) {
        for law in closed_forms(p) {
            let l = law(&Settings::new(a, b));
            prop_assert!(l.is_valid(1e-12));
            for o in Outcome::BOTH {
                prop_assert!((l.marginal_a(o) - law(&Settings::new(a, b2)).marginal_a(o)).abs() < 1e-12);
                prop_assert!((l.marginal_b(o) - law(&Settings::new(a2, b)).marginal_b(o)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn malus_marginals(u in unit(), n in unit()) {
        let plus = malus_marginal(&u, &n, Outcome::Plus);
        let minus = malus_marginal(&u, &n, Outcome::Minus);
        prop_assert!((plus + minus - 1.0).abs() < 1e-15);
        prop_assert!((plus - (1.0 + u.dot(&n)) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn local_models_have_parameter_independent_outcomes(seed in any::<u64>(), a in unit(), b in unit(), b2 in unit()) {
        // Given lambda, A's conditional marginal cannot depend on B's setting.
        for id in [ModelId::Hall, ModelId::DiLorenzo, ModelId::Mixed, ModelId::TbFreeWill] {
            let m = Model::<f64>::from_id(id, 1.0).unwrap();
            let lambda = m.sample_lambda(&Settings::new(a, b), &mut lhv_core::substream(seed, 0)).unwrap();
            let l1 = m.conditional_law(&lambda, &Settings::new(a, b)).unwrap();
            let l2 = m.conditional_law(&lambda, &Settings::new(a, b2)).unwrap();
            for o in Outcome::BOTH {
                prop_assert!((l1.marginal_a(o) - l2.marginal_a(o)).abs() < 1e-12, "{}", id);
            }
        }
    }

    #[test]
    fn deterministic_models_satisfy_the_determinism_identity(seed in any::<u64>(), a in unit(), b in unit()) {
        let s = Settings::new(a, b);
        let models = [
            Model::<f64>::from_id(ModelId::TonerBacon, 1.0).unwrap(),
            Model::from_id(ModelId::Hall, 1.0).unwrap(),
            Model::from_id(ModelId::Mixed, 1.0).unwrap(),
            Model::from_id(ModelId::TbFreeWill, 1.0).unwrap(),
            Model::from_id(ModelId::TbExt1, 1.0).unwrap(),
        ];
        for m in models {
            let lambda = m.sample_lambda(&s, &mut lhv_core::substream(seed, 1)).unwrap();
            let l = m.conditional_law(&lambda, &s).unwrap();
            // P(tau | sigma) = P(tau) wherever P(sigma) > 0.
            for sg in Outcome::BOTH {
                if l.marginal_a(sg) > 0.0 {
                    for t in Outcome::BOTH {
                        prop_assert!((l.get(sg, t) / l.marginal_a(sg) - l.marginal_b(t)).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn sign_convention_at_zero_is_unobservable(a in unit(), b in unit(), u in unit()) {
        let minus_at_zero = |x: f64| if x > 0.0 { Outcome::Plus } else { Outcome::Minus };
        for x in [u.dot(&a), -u.dot(&b)] {
            prop_assert!(x == 0.0 || Outcome::of(x) == minus_at_zero(x));
        }
    }

    #[test]
    fn chsh_maximum_invariant_under_sigma_relabeling(seed in any::<u64>()) {
        let q = MasterProb16::random(&mut lhv_core::substream(seed, 2), 20);
        let c = q.correlators();
        let f = q.flip_sigma().correlators();
        // Flipping A's first outcome negates exactly the correlators that involve it.
        prop_assert_eq!([-f[0].clone(), f[1].clone(), -f[2].clone(), f[3].clone()], c.clone());
        let best = |c: &[Exact; 4]| {
            (0..4)
                .map(|minus| {
                    let mut d = c.clone();
                    d.swap(minus, 3);
                    chsh_combination(&d).abs()
                })
                .max()
                .unwrap()
        };
        prop_assert_eq!(best(&c), best(&f));
        prop_assert!(best(&c) <= ratio(2, 1));
    }

    #[test]
    fn mutual_information_bounds(weights in prop::collection::vec(prop::collection::vec(0i64..5, 3), 4)) {
        let conditionals: Vec<Vec<(usize, Exact)>> = weights
            .iter()
            .map(|w| {
                let total: i64 = w.iter().sum::<i64>().max(1);
                if w.iter().all(|x| *x == 0) {
                    return vec![(0, ratio(1, 1))];
                }
                w.iter().enumerate().filter(|(_, x)| **x > 0).map(|(k, x)| (k, ratio(*x, total))).collect()
            })
            .collect();
        let m = DiscretizedModel::new(2, 3, conditionals).unwrap();
        let mi = mutual_information(&m);
        prop_assert!(mi.i_bits >= -1e-12);
        prop_assert!(mi.i_bits <= mi.settings_entropy_bits.min(mi.lambda_entropy_bits) + 1e-12);
        let mm = measure_m(&m);
        prop_assert!(!mm.is_negative() && mm <= ratio(2, 1));
        prop_assert!(mm.is_zero() == m.conditionals.windows(2).all(|w| w[0] == w[1]));
    }
}

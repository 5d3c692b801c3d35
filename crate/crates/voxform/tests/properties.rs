use proptest::prelude::*;

use voxform::complex::shuffles;
use voxform::coords::{a_from_beta, beta_from_a, CoordinateChange1D};
use voxform::scalars::ExactScalar;
use voxform::sewing::{mobius_from_epsilon, sewing_partner};

fn scalar() -> impl Strategy<Value = ExactScalar> {
    (-40i64..40, 1i64..12, -40i64..40, 1i64..12).prop_map(|(p, q, r, s)| ExactScalar::gaussian(p, q, r, s))
}

fn nonzero() -> impl Strategy<Value = ExactScalar> {
    scalar().prop_filter("nonzero", |z| !z.is_zero())
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, j| acc * (n - j) / (j + 1))
}

proptest! {
    #[test]
    fn literal_round_trip(z in scalar()) {
        let text = z.to_string();
        prop_assert_eq!(text.parse::<ExactScalar>().unwrap(), z);
    }

    #[test]
    fn shuffle_count_and_order(n in 0usize..7, s in 0usize..7) {
        prop_assume!(s <= n);
        let all = shuffles(n, s);
        prop_assert_eq!(all.len(), binomial(n, s));
        for sigma in &all {
            let mut sorted = sigma.clone();
            sorted.sort_unstable();
            prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
            prop_assert!(sigma[..s].windows(2).all(|w| w[0] < w[1]));
            prop_assert!(sigma[s..].windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn sewing_partner_is_an_involution(zeta in nonzero(), eps in nonzero()) {
        let partner = sewing_partner(&zeta, &eps).unwrap();
        prop_assert_eq!(&zeta * &partner, eps.clone());
        prop_assert_eq!(sewing_partner(&partner, &eps).unwrap(), zeta);
    }

    #[test]
    fn sewing_map_is_an_involution(eps in nonzero(), z in nonzero()) {
        let gamma = mobius_from_epsilon(&eps, &ExactScalar::i()).unwrap();
        let once = gamma.apply(&z).unwrap();
        prop_assert_eq!(gamma.apply(&once).unwrap(), z);
    }

    #[test]
    fn exponential_coefficients_round_trip(lead in nonzero(), rest in proptest::collection::vec(scalar(), 0..5)) {
        let mut a = vec![lead];
        a.extend(rest);
        let beta = beta_from_a(&a).unwrap();
        prop_assert_eq!(a_from_beta(&beta, a.len()), a);
    }

    #[test]
    fn composition_with_identity(lead in nonzero(), rest in proptest::collection::vec(scalar(), 0..4)) {
        let mut a = vec![lead];
        a.extend(rest);
        let f = CoordinateChange1D::new(a.clone()).unwrap();
        let id = CoordinateChange1D::identity(a.len());
        prop_assert_eq!(f.compose(&id).unwrap().coefficients().to_vec(), a.clone());
        prop_assert_eq!(id.compose(&f).unwrap().coefficients().to_vec(), a);
    }
}

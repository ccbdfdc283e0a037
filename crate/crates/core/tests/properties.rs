use proptest::prelude::*;

use friable_core::counting::{buchstab_identity_check, phi_bruteforce, phi_exact, psi_bruteforce, psi_exact};
use friable_core::xi_asymptotics::xi;
use friable_core::{rho, scalar_product, solve_adjoint_backward, solve_forward, DdeSpec, LocalPoly, PrimeTable};

fn table() -> &'static PrimeTable {
    use std::sync::OnceLock;
    static T: OnceLock<PrimeTable> = OnceLock::new();
    T.get_or_init(|| PrimeTable::sieve(100_000).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_match_brute_force(x in 1u64..20_000, y in 1.0f64..300.0) {
        prop_assert_eq!(psi_exact(x as f64, y, table()).unwrap().value, psi_bruteforce(x, y).unwrap());
        prop_assert_eq!(phi_exact(x as f64, y, table()).unwrap().value, phi_bruteforce(x, y).unwrap());
    }

    #[test]
    fn buchstab_residual_vanishes(x in 1.0f64..1e5, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let y = 1.0 + s * (x - 1.0);
        let z = y + t * (x - y);
        prop_assert_eq!(buchstab_identity_check(x, y, z, table()).unwrap(), 0);
    }

    #[test]
    fn rho_decreases(u in 0.0f64..30.0, h in 0.01f64..2.0) {
        let (a, b) = (rho(u).unwrap(), rho(u + h).unwrap());
        prop_assert!(b <= a && b > 0.0 && a <= 1.0);
    }

    #[test]
    fn xi_solves_its_equation(u in 1.01f64..1e8) {
        let x = xi(u).unwrap().xi;
        prop_assert!((x.exp_m1() / x - u).abs() <= 1e-12 * u);
    }

    #[test]
    fn scalar_product_is_constant(
        a in -1.0f64..1.0,
        b in -2.0f64..2.0,
        init in prop::collection::vec(-1.0f64..1.0, 1..4),
        term in prop::collection::vec(-1.0f64..1.0, 1..4),
    ) {
        let f = solve_forward(&DdeSpec::new(a, b, 1.0, LocalPoly::new(0.0, 1.0, init)).unwrap(), 9.0).unwrap();
        let g = solve_adjoint_backward(a, b, &LocalPoly::new(7.0, 8.0, term), 1.5).unwrap();
        let v0 = scalar_product(&f, &g, 2.5).unwrap();
        for u0 in [3.5, 4.25, 5.0, 6.5] {
            let v = scalar_product(&f, &g, u0).unwrap();
            prop_assert!((v - v0).abs() <= 1e-8 * (1.0 + v0.abs()), "{} vs {}", v, v0);
        }
    }
}

use std::sync::{Arc, OnceLock};

use proptest::prelude::*;

use plate_harnack::positivity::compute_gamma0;
use plate_harnack::{build_domain, default_exponents, DomainMask, Gamma0Variant, PlateOperator, ScalarField, Shape};

fn disk() -> &'static Arc<DomainMask> {
    static M: OnceLock<Arc<DomainMask>> = OnceLock::new();
    M.get_or_init(|| Arc::new(build_domain(&Shape::unit_disk(), 1.0 / 32.0).unwrap()))
}

fn op() -> &'static PlateOperator {
    static OP: OnceLock<PlateOperator> = OnceLock::new();
    OP.get_or_init(|| PlateOperator::assemble(disk().clone()).unwrap())
}

fn polar(rho: f64, phi: f64) -> [f64; 3] {
    [rho * phi.cos(), rho * phi.sin(), 0.0]
}

fn field(coef: [f64; 4]) -> ScalarField {
    ScalarField::from_fn(disk().clone(), |x| {
        coef[0] + coef[1] * x[0] + coef[2] * x[1] * x[1] + coef[3] * (3.0 * x[0] * x[1]).sin()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_centers_stay_within_step(
        r in 0.08f64..0.25,
        (ra, pa) in (0.0f64..0.6, 0.0f64..std::f64::consts::TAU),
        (rb, pb) in (0.0f64..0.6, 0.0f64..std::f64::consts::TAU),
    ) {
        let m = disk();
        let (a, b) = (polar(ra, pa), polar(rb, pb));
        prop_assume!(m.interior_distance(&a).unwrap() > r && m.interior_distance(&b).unwrap() > r);
        let chain = m.chain_of_balls(&a, &b, r).unwrap();
        prop_assert!(chain.half_balls_overlap());
        prop_assert_eq!(chain.centers.len(), chain.steps + 1);
        prop_assert_eq!(chain.centers[0], a);
        prop_assert_eq!(*chain.centers.last().unwrap(), b);
        for w in chain.centers.windows(2) {
            let d = ((w[0][0] - w[1][0]).powi(2) + (w[0][1] - w[1][1]).powi(2)).sqrt();
            prop_assert!(d <= r - m.h() + 1e-12);
        }
    }

    #[test]
    fn plate_matrix_is_symmetric(gamma in 0.0f64..50.0, cu in prop::array::uniform4(-2.0f64..2.0), cv in prop::array::uniform4(-2.0f64..2.0)) {
        let a = op().matrix(gamma).unwrap();
        let (u, v) = (field(cu), field(cv));
        let au = a.spmv(u.values()).unwrap();
        let av = a.spmv(v.values()).unwrap();
        let vau: f64 = v.values().iter().zip(&au).map(|(x, y)| x * y).sum();
        let uav: f64 = u.values().iter().zip(&av).map(|(x, y)| x * y).sum();
        let uau: f64 = u.values().iter().zip(&au).map(|(x, y)| x * y).sum();
        prop_assert!((vau - uav).abs() <= 1e-10 * (vau.abs() + uav.abs() + 1.0));
        prop_assert!(uau >= 0.0);
    }

    #[test]
    fn gamma0_grows_with_the_load(fi in 1e-3f64..1e3, k in 1.01f64..10.0, c in 0.5f64..5.0) {
        let e = default_exponents(2).unwrap();
        for v in [Gamma0Variant::TwoEta, Gamma0Variant::FourEta] {
            let lo = compute_gamma0(fi, 2.0, &e, c, v).unwrap();
            let hi = compute_gamma0(k * fi, 2.0, &e, c, v).unwrap();
            prop_assert!(lo > 0.0 && hi > lo);
        }
    }
}

#[test]
fn solution_is_linear_in_the_load() {
    let (f, g) = (field([1.0, 0.5, -2.0, 0.3]), field([-0.4, 1.0, 0.2, 1.5]));
    let sum = f.with_values(f.values().iter().zip(g.values()).map(|(a, b)| 2.0 * a - 3.0 * b).collect()).unwrap();
    let solve = |s: &ScalarField| op().solve(3.0, s, 1e-12).unwrap().0;
    let (uf, ug, us) = (solve(&f), solve(&g), solve(&sum));
    let gap = us
        .values()
        .iter()
        .zip(uf.values().iter().zip(ug.values()))
        .map(|(s, (a, b))| (s - (2.0 * a - 3.0 * b)).abs())
        .fold(0.0, f64::max);
    assert!(gap <= 1e-8 * us.max_abs(), "{gap}");
}

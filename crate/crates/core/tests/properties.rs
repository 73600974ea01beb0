use dyadic_walsh::group::random_step;
use dyadic_walsh::index;
use dyadic_walsh::norms::{hp_norm, lp_norm, maximal_function, modulus_lp, weak_lp_norm};
use dyadic_walsh::transform::{
    dirichlet_direct, dirichlet_formula, fwht, ifwht, kernel_support_measure, lebesgue_constant, partial_sum,
    walsh,
};
use dyadic_walsh::{Dyadic, Mode, Number, Point, StepFunction};
use proptest::prelude::*;

fn exact_step(level: u32, seed: u64) -> StepFunction {
    random_step(level, seed, -4.0, 4.0, Mode::Exact).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn expand_reconstructs(n in 1u64..u64::MAX) {
        let e = index::expand(n).unwrap();
        prop_assert_eq!(e.reconstruct(), n);
        prop_assert_eq!(e.gap, e.order - e.low);
        prop_assert!(e.variation % 2 == 0);
        prop_assert!(e.variation >= 2);
        prop_assert!(e.variation <= e.gap + 2);
    }

    #[test]
    fn dyadic_roundtrip(numer in -1i128 << 80..1i128 << 80, shift in 0u32..100) {
        let x = Dyadic::new(numer, shift);
        prop_assert_eq!(x.to_string().parse::<Dyadic>().unwrap(), x);
        prop_assert_eq!(x.checked_sub(&x).unwrap(), Dyadic::ZERO);
    }

    #[test]
    fn lebesgue_two_sided(n in 1u64..1 << 16) {
        let l = lebesgue_constant(n).unwrap();
        let v = index::variation(n) as i128;
        prop_assert!(Dyadic::new(v, 3) <= l && l <= Dyadic::from_int(v));
    }

    #[test]
    fn support_measure_bounds(n in 1u64..1 << 16) {
        let mu = kernel_support_measure(n).unwrap();
        let low = index::low(n) as i32;
        prop_assert!(Dyadic::pow2(-low - 1).unwrap() <= mu && mu <= Dyadic::pow2(-low).unwrap());
    }

    #[test]
    fn kernel_routes_agree(level in 1u32..9, raw in any::<u64>()) {
        let n = raw % (1 << level) + 1;
        prop_assert_eq!(dirichlet_direct(n, level).unwrap(), dirichlet_formula(n, level).unwrap());
    }

    #[test]
    fn kernel_recursion(level in 1u32..10, a in any::<u64>(), b in any::<u64>()) {
        // D_{j + 2^n} = D_{2^n} + w_{2^n} D_j for 0 < j < 2^n.
        let n = (a % level as u64) as u32;
        prop_assume!(n >= 1);
        let j = b % ((1 << n) - 1) + 1;
        let lhs = dirichlet_formula(j + (1 << n), level).unwrap();
        let rhs = dirichlet_formula(1 << n, level).unwrap()
            .add(&walsh(1 << n, level).unwrap().mul(&dirichlet_formula(j, level).unwrap()).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn walsh_characters(level in 0u32..8, a in any::<u64>(), b in any::<u64>(), x in any::<u64>(), y in any::<u64>()) {
        let mask = (1u64 << level) - 1;
        let (a, b) = (a & mask, b & mask);
        let prod = walsh(a, level).unwrap().mul(&walsh(b, level).unwrap()).unwrap();
        prop_assert_eq!(prod, walsh(a ^ b, level).unwrap());
        let w = walsh(a, level).unwrap();
        let (px, py) = (Point::new(x & mask, level).unwrap(), Point::new(y & mask, level).unwrap());
        let wxy = w.eval(px ^ py).unwrap().to_f64();
        prop_assert_eq!(wxy, w.eval(px).unwrap().to_f64() * w.eval(py).unwrap().to_f64());
    }

    #[test]
    fn fwht_involution(level in 0u32..11, seed in any::<u64>()) {
        let f = exact_step(level, seed);
        prop_assert_eq!(ifwht(&fwht(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn parseval(level in 0u32..11, seed in any::<u64>()) {
        let f = random_step(level, seed, -1.0, 1.0, Mode::Float).unwrap();
        let c = fwht(&f).unwrap().to_f64_vec();
        let lhs: f64 = f.values_f64().iter().map(|v| v * v).sum::<f64>() / f.len() as f64;
        let rhs: f64 = c.iter().map(|v| v * v).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1e-300));
    }

    #[test]
    fn partial_sum_is_conditional_expectation(level in 0u32..10, m in 0u32..10, seed in any::<u64>()) {
        let m = m.min(level);
        let f = exact_step(level, seed);
        let want = f.coarsen_average(m).unwrap().refine(level).unwrap();
        prop_assert_eq!(partial_sum(&f, 1 << m).unwrap(), want);
    }

    #[test]
    fn partial_sums_telescope(level in 1u32..8, seed in any::<u64>(), raw in any::<u64>()) {
        let f = exact_step(level, seed);
        let n = raw % (1 << level);
        let step = partial_sum(&f, n + 1).unwrap().sub(&partial_sum(&f, n).unwrap()).unwrap();
        let c = fwht(&f).unwrap().coeff(n as usize);
        prop_assert_eq!(step, walsh(n, level).unwrap().scale(c).unwrap());
    }

    #[test]
    fn norm_orderings(level in 0u32..9, seed in any::<u64>()) {
        let f = exact_step(level, seed);
        let l1 = lp_norm(&f, 1.0).unwrap().exact().unwrap();
        let weak = weak_lp_norm(&f, 1.0).unwrap().exact().unwrap();
        let h1 = hp_norm(&f, 1.0).unwrap().exact().unwrap();
        prop_assert!(weak <= l1);
        prop_assert!(l1 <= h1);
        let mf = maximal_function(&f).unwrap();
        for ix in 0..f.len() {
            prop_assert!(mf.value(ix).to_f64() >= f.value(ix).to_f64().abs());
        }
        for p in [0.5, 2.0] {
            let a = lp_norm(&f, p).unwrap().to_f64();
            prop_assert!(weak_lp_norm(&f, p).unwrap().to_f64() <= a * (1.0 + 1e-12));
        }
    }

    #[test]
    fn translation_invariance(level in 0u32..9, seed in any::<u64>(), h in any::<u64>()) {
        let f = exact_step(level, seed);
        let g = f.translate(Point::new(h & ((1 << level) - 1), level).unwrap()).unwrap();
        prop_assert_eq!(lp_norm(&f, 1.0).unwrap(), lp_norm(&g, 1.0).unwrap());
        prop_assert_eq!(g.integrate().unwrap(), f.integrate().unwrap());
    }

    #[test]
    fn modulus_monotone_in_rank(level in 1u32..8, seed in any::<u64>()) {
        let f = exact_step(level, seed);
        let mut prev: Option<Dyadic> = None;
        for n in 0..=level {
            let w = modulus_lp(&f, n, 1.0).unwrap().exact().unwrap();
            if let Some(p) = prev {
                prop_assert!(w <= p);
            }
            prev = Some(w);
        }
        prop_assert_eq!(prev, Some(Dyadic::ZERO));
    }

    #[test]
    fn exact_and_float_agree(level in 0u32..9, seed in any::<u64>()) {
        let f = exact_step(level, seed);
        let g = f.to_float();
        for (a, b) in [
            (lp_norm(&f, 1.0).unwrap().to_f64(), lp_norm(&g, 1.0).unwrap().to_f64()),
            (hp_norm(&f, 1.0).unwrap().to_f64(), hp_norm(&g, 1.0).unwrap().to_f64()),
            (weak_lp_norm(&f, 1.0).unwrap().to_f64(), weak_lp_norm(&g, 1.0).unwrap().to_f64()),
        ] {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        match f.integrate().unwrap() {
            Number::Exact(d) => prop_assert!((d.to_f64() - g.integrate().unwrap().to_f64()).abs() < 1e-12),
            Number::Float(_) => prop_assert!(false, "exact input integrates exactly"),
        }
    }
}

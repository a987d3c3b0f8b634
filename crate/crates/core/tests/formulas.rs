mod common;

use common::chain_norm_oracle;
use proptest::prelude::*;
use vbsprep::analysis::formulas::{
    log_spaced_grid, render_repetitions, repetition_recursion, sublattice_size, vbs_norm,
};
use vbsprep::lattice::{BoundarySpin, ChainBoundary};
use vbsprep::spinops::SpinValue;

/// Numeric value of a rendered repetition count.
fn parse_rendered(s: &str) -> f64 {
    if let Some((m, k)) = s.split_once("×10^") {
        return m.parse::<f64>().unwrap() * 10f64.powi(k.parse().unwrap());
    }
    if let Some(k) = s.strip_prefix("10^") {
        return 10f64.powi(k.parse().unwrap());
    }
    s.replace(',', "").parse().unwrap()
}

#[test]
fn chain_norms_match_direct_symmetrization() {
    use BoundarySpin::{Down, Up};
    for n in 2..=6 {
        let ring = vbs_norm(SpinValue::ONE, n, ChainBoundary::Ring).unwrap();
        assert!((ring - chain_norm_oracle(n, true, 0, 0)).abs() < 1e-12, "ring {n}");
        for (l, r) in [(Up, Up), (Up, Down), (Down, Up), (Down, Down)] {
            let b = ChainBoundary::Open { left: l, right: r };
            let got = vbs_norm(SpinValue::ONE, n, b).unwrap();
            let want = chain_norm_oracle(n, false, l.bit() as usize, r.bit() as usize);
            assert!((got - want).abs() < 1e-12, "open {n} {l:?} {r:?}: {got} vs {want}");
        }
    }
}

#[test]
fn norm_rejects_other_spins() {
    let s = SpinValue::new(3).unwrap();
    assert!(vbs_norm(s, 4, ChainBoundary::Ring).is_err());
}

#[test]
fn render_examples() {
    assert_eq!(render_repetitions(5.0), "5");
    assert_eq!(render_repetitions(999.4), "999");
    assert_eq!(render_repetitions(999.6), "1,000");
    assert_eq!(render_repetitions(12_345.0), "12,000");
    assert_eq!(render_repetitions(987_654.0), "990,000");
    assert_eq!(render_repetitions(999_999.0), "10^6");
    assert_eq!(render_repetitions(3.36e7), "3.4×10^7");
    assert_eq!(render_repetitions(1.02e9), "10^9");
}

/// `sum_k (1 - F(k))` with `F(k) = (1 - (1-p)^k)^m`.
fn expected_rounds_oracle(p: f64, m: usize) -> f64 {
    let mut e = 0.0;
    for k in 0..100_000 {
        let tail = 1.0 - (1.0 - (1.0 - p).powi(k)).powi(m as i32);
        e += tail;
        if tail < 1e-15 && k > 0 {
            break;
        }
    }
    e
}

proptest! {
    #[test]
    fn render_is_monotone(a in 0.0f64..1e12, b in 0.0f64..1e12) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(parse_rendered(&render_repetitions(lo)) <= parse_rendered(&render_repetitions(hi)));
    }

    #[test]
    fn render_keeps_two_figures(x in 1.0f64..1e15) {
        let v = parse_rendered(&render_repetitions(x));
        if x < 999.5 {
            prop_assert!((v - x).abs() <= 0.5);
        } else {
            prop_assert!((v - x).abs() <= 0.05 * x * (1.0 + 1e-9));
        }
    }

    #[test]
    fn round_distribution_closed_form(p in 0.05f64..0.95, n_sites in 1usize..60, rounds in 1usize..30) {
        let model = repetition_recursion(p, n_sites, rounds).unwrap();
        let m = sublattice_size(n_sites);
        prop_assert_eq!(m, n_sites.div_ceil(2));
        prop_assert_eq!(model.cdf.len(), rounds);
        for (k, (&r, &c)) in model.r.iter().zip(&model.cdf).enumerate() {
            // geometric series: p R_n = 1 - (1-p)^n
            let pr = 1.0 - (1.0 - p).powi(k as i32 + 1);
            prop_assert!((p * r - pr).abs() < 1e-12);
            prop_assert!((c - pr.powi(m as i32)).abs() < 1e-12);
        }
        prop_assert!(model.cdf.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        prop_assert!(model.expected_rounds >= 1.0);
        prop_assert!(model.variance_rounds >= -1e-9);
    }

    #[test]
    fn expected_rounds_match_tail_sum(p in 0.1f64..0.9, n_sites in 1usize..200) {
        let model = repetition_recursion(p, n_sites, 1).unwrap();
        let want = expected_rounds_oracle(p, sublattice_size(n_sites));
        prop_assert!((model.expected_rounds - want).abs() < 1e-8 * want.max(1.0));
    }

    #[test]
    fn mitigation_is_square_root(p in 0.1f64..0.9, n_sites in 1usize..80) {
        let model = repetition_recursion(p, n_sites, 1).unwrap();
        prop_assert!((model.mitigated * model.mitigated / model.unmitigated - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_is_increasing_with_fixed_ends(lo in 1usize..100, span in 2usize..10_000, count in 2usize..60) {
        let hi = lo + span;
        let g = log_spaced_grid(lo, hi, count);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(*g.last().unwrap(), hi);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}

//! Closed-form norms, repetition statistics and repetition tables.

use serde::Serialize;

use crate::error::{Result, VbsError};
use crate::lattice::{BoundarySpin, ChainBoundary};
use crate::spinops::{symmetric_fraction_f64, SpinValue};

/// Squared norm of the symmetrized pre-VBS state of a spin-1 chain, i.e.
/// the probability that every Hadamard test succeeds.
pub fn vbs_norm(s: SpinValue, n_sites: usize, boundary: ChainBoundary) -> Result<f64> {
    if s != SpinValue::ONE {
        return Err(VbsError::UnsupportedSpin(s.twice_s()));
    }
    if n_sites < 2 {
        return Err(VbsError::InvalidArgument(format!("chain of {n_sites} sites")));
    }
    let n = n_sites as i32;
    let a = 0.75f64.powi(n);
    let b = (-0.25f64).powi(n);
    Ok(match boundary {
        ChainBoundary::Ring => a + 3.0 * b,
        ChainBoundary::Open { left, right } if left == right => a - b,
        ChainBoundary::Open { .. } => a + b,
    })
}

/// Ancilla post-selection probability of the ring MPS preparation with
/// embedding scale `n`: `n^2 (1 + 3 (-1/3)^N) / 2`.
pub fn mps_ring_success_probability(n_sites: usize, n: f64) -> f64 {
    n * n * (1.0 + 3.0 * (-1.0f64 / 3.0).powi(n_sites as i32)) / 2.0
}

/// Large-`N` form `p^N` for sites of uniform spin `s`, with `p` the
/// symmetric fraction of coordination `2s`.
pub fn asymptotic_norm(s: SpinValue, n_sites: usize) -> Result<f64> {
    Ok(symmetric_fraction_f64(s.twice_s())?.powi(n_sites as i32))
}

/// Chain boundary from the two end spins.
pub fn open_boundary(left: BoundarySpin, right: BoundarySpin) -> ChainBoundary {
    ChainBoundary::Open { left, right }
}

/// Repetition statistics when each of `sublattice_sites` independent
/// islands is retried until its Hadamard test succeeds.
#[derive(Clone, Debug, Serialize)]
pub struct RepetitionModel {
    pub p: f64,
    pub n_sites: usize,
    pub sublattice_sites: usize,
    /// `r[k]` is `R_{k+1}`.
    pub r: Vec<f64>,
    /// `cdf[k]` is `P_{k+1}`, the probability that all islands are done
    /// within `k+1` rounds.
    pub cdf: Vec<f64>,
    pub expected_rounds: f64,
    pub variance_rounds: f64,
    /// Whole-lattice repetitions without mitigation, `(1/p)^N`.
    pub unmitigated: f64,
    /// Repetitions of the remaining sublattice tests, `(1/p)^{N/2}`.
    pub mitigated: f64,
}

const TAIL_TOL: f64 = 1e-12;

/// Sublattice size used for `n_sites` (odd chains put the extra site on A).
pub fn sublattice_size(n_sites: usize) -> usize {
    n_sites.div_ceil(2)
}

/// `R_n = 1 + (1-p) R_{n-1}`, `R_1 = 1`, and `P_n = (p R_n)^m` with
/// `m = ceil(N/2)`, for `n = 1..=max_rounds`. Moments use the full
/// distribution up to a tail of `1e-12`.
pub fn repetition_recursion(p: f64, n_sites: usize, max_rounds: usize) -> Result<RepetitionModel> {
    if !(p > 0.0 && p < 1.0) {
        return Err(VbsError::InvalidArgument(format!("p = {p} outside (0, 1)")));
    }
    if n_sites == 0 || max_rounds == 0 {
        return Err(VbsError::InvalidArgument("need at least one site and one round".into()));
    }
    let m = sublattice_size(n_sites);
    let mut r = Vec::with_capacity(max_rounds);
    let mut cdf = Vec::with_capacity(max_rounds);
    let mut rn = 1.0;
    let mut mean = 0.0;
    let mut second = 0.0;
    let mut prev = 0.0;
    let mut k = 1usize;
    loop {
        if k > 1 {
            rn = 1.0 + (1.0 - p) * rn;
        }
        let pk = (p * rn).powf(m as f64);
        if k <= max_rounds {
            r.push(rn);
            cdf.push(pk);
        }
        let mass = pk - prev;
        mean += k as f64 * mass;
        second += (k * k) as f64 * mass;
        prev = pk;
        if k >= max_rounds && 1.0 - pk < TAIL_TOL {
            break;
        }
        k += 1;
    }
    let nf = n_sites as f64;
    Ok(RepetitionModel {
        p,
        n_sites,
        sublattice_sites: m,
        r,
        cdf,
        expected_rounds: mean,
        variance_rounds: second - mean * mean,
        unmitigated: p.powf(-nf),
        mitigated: p.powf(-nf / 2.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    Natural,
    Ten,
    Two,
}

impl LogBase {
    pub const ALL: [LogBase; 3] = [LogBase::Natural, LogBase::Ten, LogBase::Two];

    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln(),
            LogBase::Ten => x.log10(),
            LogBase::Two => x.log2(),
        }
    }
}

/// `count` integers spaced evenly in log between `lo` and `hi`
/// (duplicates removed).
pub fn log_spaced_grid(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count < 2 || lo == 0 || hi <= lo {
        return vec![lo.max(1)];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut v: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    v.dedup();
    v
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearFit {
    pub base: LogBase,
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares fit of expected rounds against `log N` over `grid`.
pub fn fit_expected_rounds(p: f64, grid: &[usize], base: LogBase) -> Result<LinearFit> {
    if grid.len() < 2 {
        return Err(VbsError::InvalidArgument("fit needs at least two points".into()));
    }
    let mut xs = Vec::with_capacity(grid.len());
    let mut ys = Vec::with_capacity(grid.len());
    for &n in grid {
        xs.push(base.log(n as f64));
        ys.push(repetition_recursion(p, n, 1)?.expected_rounds);
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        base,
        slope,
        intercept: my - slope * mx,
    })
}

/// Renders a repetition count the way the table prints it: integers below
/// a thousand, two significant figures with separators below a million,
/// `m.m x 10^k` above (a mantissa of exactly one prints as `10^k`).
pub fn render_repetitions(x: f64) -> String {
    if x < 999.5 {
        return format!("{}", x.round() as u64);
    }
    let k = x.log10().floor() as i32;
    let mut mant = (x / 10f64.powi(k) * 10.0).round() / 10.0;
    let mut k = k;
    if mant >= 10.0 {
        mant /= 10.0;
        k += 1;
    }
    if k < 6 {
        let v = (mant * 10f64.powi(k)).round() as u64;
        return group_thousands(v);
    }
    if (mant - 1.0).abs() < 1e-9 {
        format!("10^{k}")
    } else {
        format!("{mant:.1}×10^{k}")
    }
}

fn group_thousands(v: u64) -> String {
    let s = v.to_string();
    let mut out = String::new();
    for (i, ch) in s.chars().enumerate() {
        if i > 0 && (s.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(ch);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RepetitionRow {
    pub twice_s: u32,
    pub n_sites: usize,
    pub unmitigated: f64,
    pub mitigated: f64,
    pub unmitigated_text: String,
    pub mitigated_text: String,
}

/// Average repetitions with and without sublattice mitigation.
pub fn repetitions_table(s: SpinValue, n_list: &[usize]) -> Result<Vec<RepetitionRow>> {
    if !matches!(s.twice_s(), 2 | 3) {
        return Err(VbsError::UnsupportedSpin(s.twice_s()));
    }
    let p = symmetric_fraction_f64(s.twice_s())?;
    Ok(n_list
        .iter()
        .map(|&n| {
            let u = p.powf(-(n as f64));
            let m = p.powf(-(n as f64) / 2.0);
            RepetitionRow {
                twice_s: s.twice_s(),
                n_sites: n,
                unmitigated: u,
                mitigated: m,
                unmitigated_text: render_repetitions(u),
                mitigated_text: render_repetitions(m),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_one_norms() {
        let s = SpinValue::ONE;
        assert!((vbs_norm(s, 3, ChainBoundary::Ring).unwrap() - 0.375).abs() < 1e-15);
        assert!((vbs_norm(s, 2, ChainBoundary::ALIGNED).unwrap() - 0.5).abs() < 1e-15);
        assert!((vbs_norm(s, 2, ChainBoundary::ANTI_ALIGNED).unwrap() - 0.625).abs() < 1e-15);
        assert!(vbs_norm(SpinValue::THREE_HALVES, 2, ChainBoundary::Ring).is_err());
    }

    #[test]
    fn recursion_values() {
        let m = repetition_recursion(0.75, 2, 50).unwrap();
        assert_eq!(m.r[0], 1.0);
        assert!((m.r[1] - 1.25).abs() < 1e-15);
        assert!((m.r[49] - 4.0 / 3.0).abs() < 1e-12);
        let m = repetition_recursion(0.5, 20, 1).unwrap();
        assert!((m.cdf[0] - 2f64.powi(-10)).abs() < 1e-18);
        assert!(repetition_recursion(1.0, 2, 1).is_err());
    }

    #[test]
    fn rendering() {
        assert_eq!(render_repetitions(17.76), "18");
        assert_eq!(render_repetitions(1024.0), "1,000");
        assert_eq!(render_repetitions(5600.0), "5,600");
        assert_eq!(render_repetitions(1.8e6), "1.8×10^6");
        assert_eq!(render_repetitions(1.0486e6), "10^6");
        assert_eq!(render_repetitions(999.4), "999");
    }
}

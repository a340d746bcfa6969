//! The signed inverse-propensity kappa weights.
//!
//! kappa_full weights a path so that the population mean of kappa * u equals
//! the joint probability of full compliance times the expected utility of
//! full compliers; kappa_type generalizes this to any compliance type. Both
//! are alternating sums over period subsets and instrument-value tuples,
//! enumerated explicitly. The enumeration visits sum over tau of
//! 2^tau * C(T+1, tau) = 3^(T+1) - 1 terms per path, so the cost is
//! exponential in the number of periods; practical horizons are small and no
//! approximation is offered.

use crate::model::{ComplianceType, PathView};
use crate::propensity::PropensityModel;

const MAX_PERIODS: usize = 32;

/// The compliance-revealing indicator for period t: W_t(1 - Z_t) when i = 0,
/// (1 - W_t) Z_t when i = 1. Both vanish whenever W_t = Z_t.
pub fn k_term(path: PathView<'_>, t: usize, i: u8) -> f64 {
    let w = path.w(t);
    let z = path.z(t);
    let hit = if i == 0 { w == 1 && z == 0 } else { w == 0 && z == 1 };
    if hit {
        1.0
    } else {
        0.0
    }
}

/// Visits every (period-subset, value-tuple) term of the alternating sum
/// over the given periods: each nonempty subset of `periods`, crossed with
/// every 0/1 assignment to its members. The callback receives (period, value)
/// pairs in increasing period order; the subset size determines the term's
/// sign.
pub(crate) fn for_each_term(periods: &[usize], mut f: impl FnMut(&[(usize, u8)])) {
    let m = periods.len();
    assert!(m <= MAX_PERIODS, "weight enumeration supports at most {MAX_PERIODS} periods");
    let mut buf = [(0usize, 0u8); MAX_PERIODS];
    for mask in 1u64..(1u64 << m) {
        let k = mask.count_ones() as usize;
        let mut idx = 0;
        for (t, &period) in periods.iter().enumerate() {
            if mask & (1 << t) != 0 {
                buf[idx] = (period, 0);
                idx += 1;
            }
        }
        for vals in 0u64..(1u64 << k) {
            for slot in 0..k {
                buf[slot].1 = ((vals >> slot) & 1) as u8;
            }
            f(&buf[..k]);
        }
    }
}

/// Number of terms the alternating sum enumerates for periods 0..=horizon.
pub fn kappa_term_count(horizon: usize) -> u64 {
    let periods: alloc::vec::Vec<usize> = (0..=horizon).collect();
    let mut count = 0u64;
    for_each_term(&periods, |_| count += 1);
    count
}

fn alternating_block(path: PathView<'_>, model: &PropensityModel, periods: &[usize]) -> f64 {
    let mut acc = 0.0;
    for_each_term(periods, |assignment| {
        let mut numerator = 1.0;
        for &(j, i) in assignment {
            numerator *= k_term(path, j, i);
            if numerator == 0.0 {
                return;
            }
        }
        let sign = if assignment.len() % 2 == 1 { -1.0 } else { 1.0 };
        acc += sign * numerator / model.joint_prob(path, assignment);
    });
    acc
}

/// Full-compliance weight: 1 plus the alternating sum over all nonempty
/// period subsets. Equals 1 exactly on any path with W_j = Z_j everywhere,
/// since every K term vanishes.
pub fn kappa_full(path: PathView<'_>, model: &PropensityModel) -> f64 {
    let periods: alloc::vec::Vec<usize> = (0..=path.horizon()).collect();
    1.0 + alternating_block(path, model, &periods)
}

/// Weight for an arbitrary compliance type.
///
/// The front factor keeps only paths where the instrument pushed against
/// each non-compliant period and still lost: Z_t = 1 with W_t = 0 reveals a
/// never-taker period, Z_t = 0 with W_t = 1 an always-taker period. It is
/// divided by the probability of exactly that instrument pattern. The
/// remaining factor is the full-compliance alternating sum restricted to the
/// complier periods.
pub fn kappa_type(path: PathView<'_>, ctype: &ComplianceType, model: &PropensityModel) -> f64 {
    let mut front = 1.0;
    for &t in ctype.tn0() {
        front *= k_term(path, t, 1);
    }
    for &t in ctype.tn1() {
        front *= k_term(path, t, 0);
    }
    if front == 0.0 {
        return 0.0;
    }

    // The revealing instrument pattern, in increasing period order.
    let mut pattern = [(0usize, 0u8); MAX_PERIODS];
    let mut len = 0;
    let mut i0 = 0;
    let mut i1 = 0;
    let (tn0, tn1) = (ctype.tn0(), ctype.tn1());
    while i0 < tn0.len() || i1 < tn1.len() {
        let take0 = match (tn0.get(i0), tn1.get(i1)) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        };
        pattern[len] = if take0 {
            i0 += 1;
            (tn0[i0 - 1], 1)
        } else {
            i1 += 1;
            (tn1[i1 - 1], 0)
        };
        len += 1;
    }
    let denom = model.joint_prob(path, &pattern[..len]);

    front / denom * (1.0 + alternating_block(path, model, ctype.tc()))
}

/// Weight summary attached to estimate reports.
#[derive(Clone, Debug, PartialEq)]
pub struct KappaDiagnostics {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Propensity clip events recorded while the weights were computed.
    pub clipped: u64,
}

impl KappaDiagnostics {
    pub(crate) fn empty() -> Self {
        KappaDiagnostics { mean: 0.0, min: 0.0, max: 0.0, clipped: 0 }
    }
}

/// Streaming accumulator for [`KappaDiagnostics`].
pub(crate) struct KappaStats {
    sum: crate::numeric::KahanSum,
    min: f64,
    max: f64,
    count: usize,
}

impl KappaStats {
    pub(crate) fn new() -> Self {
        KappaStats {
            sum: crate::numeric::KahanSum::new(),
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            count: 0,
        }
    }

    pub(crate) fn push(&mut self, kappa: f64) {
        self.sum.add(kappa);
        self.min = self.min.min(kappa);
        self.max = self.max.max(kappa);
        self.count += 1;
    }

    pub(crate) fn finish(self, clipped: u64) -> KappaDiagnostics {
        if self.count == 0 {
            return KappaDiagnostics::empty();
        }
        KappaDiagnostics {
            mean: crate::numeric::kahan_mean(&self.sum, self.count),
            min: self.min,
            max: self.max,
            clipped,
        }
    }
}

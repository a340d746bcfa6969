//! Core domain types: observation paths, the column-oriented panel container,
//! compliance types, treatment regimes, and utility functionals.
//!
//! A panel covers periods 0..=T for instruments and treatments and periods
//! 1..=T+1 for outcomes and post-treatment covariates. Constructors enforce
//! shape (dimensions, lengths); value-level checks (binary domains, finiteness,
//! instrument variation) live in [`validate_dataset`] so that malformed data
//! can be loaded and then diagnosed.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// One subject's full trajectory, the row form used to assemble a panel.
///
/// `z`, `w` run over periods 0..=T; `y` and `x_post` over periods 1..=T+1
/// (`x_post[0]` is x_1, and the final covariate block may be empty).
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationPath {
    pub x0: Vec<f64>,
    pub z: Vec<u8>,
    pub w: Vec<u8>,
    pub y: Vec<f64>,
    pub x_post: Vec<Vec<f64>>,
}

/// Shape errors raised by dataset constructors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DataError {
    Empty,
    /// A path's period count differs from the first path's.
    HorizonMismatch { path: usize },
    /// A covariate block's width differs from the first path's.
    DimensionMismatch { path: usize, period: usize },
    /// Column lengths disagree with each other or with the declared shape.
    ColumnShape { what: &'static str },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::Empty => write!(f, "dataset must contain at least one path"),
            DataError::HorizonMismatch { path } => {
                write!(f, "path {path} has a different number of periods")
            }
            DataError::DimensionMismatch { path, period } => {
                write!(f, "path {path} has a mismatched covariate dimension at period {period}")
            }
            DataError::ColumnShape { what } => write!(f, "inconsistent column shape: {what}"),
        }
    }
}

/// Column-oriented panel of `n` observation paths over a fixed horizon.
///
/// Covariate blocks are stored row-major: block `j` holds `n * dims[j]`
/// values with path `i` occupying `i*dims[j] .. (i+1)*dims[j]`.
#[derive(Clone, Debug)]
pub struct PanelDataset {
    horizon: usize,
    n: usize,
    dims: Vec<usize>,
    x: Vec<Vec<f64>>,
    z: Vec<Vec<u8>>,
    w: Vec<Vec<u8>>,
    y: Vec<Vec<f64>>,
}

impl PanelDataset {
    /// Assembles a panel from row form. All paths must share the first
    /// path's horizon and covariate dimensions.
    pub fn from_paths(paths: &[ObservationPath]) -> Result<Self, DataError> {
        let first = paths.first().ok_or(DataError::Empty)?;
        if first.z.is_empty() {
            return Err(DataError::ColumnShape { what: "a path needs at least one period" });
        }
        let horizon = first.z.len() - 1;
        let n = paths.len();
        let mut dims = Vec::with_capacity(horizon + 2);
        dims.push(first.x0.len());
        for block in &first.x_post {
            dims.push(block.len());
        }
        if dims.len() != horizon + 2 {
            return Err(DataError::HorizonMismatch { path: 0 });
        }
        if first.w.len() != horizon + 1 || first.y.len() != horizon + 1 {
            return Err(DataError::HorizonMismatch { path: 0 });
        }

        let mut x: Vec<Vec<f64>> =
            dims.iter().map(|d| Vec::with_capacity(n * d)).collect();
        let mut z: Vec<Vec<u8>> = (0..=horizon).map(|_| Vec::with_capacity(n)).collect();
        let mut w = z.clone();
        let mut y: Vec<Vec<f64>> = (0..=horizon).map(|_| Vec::with_capacity(n)).collect();

        for (i, p) in paths.iter().enumerate() {
            if p.z.len() != horizon + 1
                || p.w.len() != horizon + 1
                || p.y.len() != horizon + 1
                || p.x_post.len() != horizon + 1
            {
                return Err(DataError::HorizonMismatch { path: i });
            }
            if p.x0.len() != dims[0] {
                return Err(DataError::DimensionMismatch { path: i, period: 0 });
            }
            x[0].extend_from_slice(&p.x0);
            for (k, block) in p.x_post.iter().enumerate() {
                if block.len() != dims[k + 1] {
                    return Err(DataError::DimensionMismatch { path: i, period: k + 1 });
                }
                x[k + 1].extend_from_slice(block);
            }
            for j in 0..=horizon {
                z[j].push(p.z[j]);
                w[j].push(p.w[j]);
                y[j].push(p.y[j]);
            }
        }
        Ok(PanelDataset { horizon, n, dims, x, z, w, y })
    }

    /// Assembles a panel directly from columns.
    ///
    /// `x` holds `horizon + 2` covariate blocks (block 0 is x0, block j is
    /// x_j), each flattened row-major to `n * dims[j]` values. `z` and `w`
    /// hold `horizon + 1` columns of length `n`; `y` holds `horizon + 1`
    /// outcome columns (column k is y_{k+1}).
    pub fn from_columns(
        horizon: usize,
        dims: Vec<usize>,
        x: Vec<Vec<f64>>,
        z: Vec<Vec<u8>>,
        w: Vec<Vec<u8>>,
        y: Vec<Vec<f64>>,
    ) -> Result<Self, DataError> {
        if dims.len() != horizon + 2 || x.len() != horizon + 2 {
            return Err(DataError::ColumnShape { what: "expected horizon + 2 covariate blocks" });
        }
        if z.len() != horizon + 1 || w.len() != horizon + 1 || y.len() != horizon + 1 {
            return Err(DataError::ColumnShape { what: "expected horizon + 1 z/w/y columns" });
        }
        let n = z[0].len();
        if n == 0 {
            return Err(DataError::Empty);
        }
        for col in z.iter().chain(w.iter()) {
            if col.len() != n {
                return Err(DataError::ColumnShape { what: "ragged z/w column" });
            }
        }
        for col in &y {
            if col.len() != n {
                return Err(DataError::ColumnShape { what: "ragged y column" });
            }
        }
        for (j, block) in x.iter().enumerate() {
            if block.len() != n * dims[j] {
                return Err(DataError::ColumnShape { what: "covariate block size" });
            }
        }
        Ok(PanelDataset { horizon, n, dims, x, z, w, y })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of treatment periods minus one; treatments occur at 0..=horizon.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Covariate dimension per block, indexed 0..=horizon+1.
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn path(&self, index: usize) -> PathView<'_> {
        debug_assert!(index < self.n);
        PathView { data: self, index }
    }

    pub fn iter_paths(&self) -> impl Iterator<Item = PathView<'_>> + '_ {
        (0..self.n).map(move |index| PathView { data: self, index })
    }

    /// Gathers the given rows into a new panel; duplicates allowed. Used by
    /// bootstrap resampling.
    pub fn resample(&self, indices: &[usize]) -> Result<Self, DataError> {
        if indices.is_empty() {
            return Err(DataError::Empty);
        }
        let m = indices.len();
        let mut x: Vec<Vec<f64>> =
            self.dims.iter().map(|d| Vec::with_capacity(m * d)).collect();
        let mut z: Vec<Vec<u8>> = (0..=self.horizon).map(|_| Vec::with_capacity(m)).collect();
        let mut w = z.clone();
        let mut y: Vec<Vec<f64>> = (0..=self.horizon).map(|_| Vec::with_capacity(m)).collect();
        for &i in indices {
            assert!(i < self.n, "resample index out of range");
            for (j, d) in self.dims.iter().enumerate() {
                x[j].extend_from_slice(&self.x[j][i * d..(i + 1) * d]);
            }
            for j in 0..=self.horizon {
                z[j].push(self.z[j][i]);
                w[j].push(self.w[j][i]);
                y[j].push(self.y[j][i]);
            }
        }
        Ok(PanelDataset { horizon: self.horizon, n: m, dims: self.dims.clone(), x, z, w, y })
    }
}

/// Borrowed view of one path inside a panel; cheap to copy and pass around.
#[derive(Clone, Copy)]
pub struct PathView<'a> {
    data: &'a PanelDataset,
    index: usize,
}

impl<'a> PathView<'a> {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn horizon(&self) -> usize {
        self.data.horizon
    }

    pub fn x0(&self) -> &'a [f64] {
        self.x(0)
    }

    /// Covariate block j, for j in 0..=horizon+1.
    pub fn x(&self, j: usize) -> &'a [f64] {
        let d = self.data.dims[j];
        &self.data.x[j][self.index * d..(self.index + 1) * d]
    }

    /// Instrument at period j, for j in 0..=horizon.
    pub fn z(&self, j: usize) -> u8 {
        self.data.z[j][self.index]
    }

    /// Treatment at period j, for j in 0..=horizon.
    pub fn w(&self, j: usize) -> u8 {
        self.data.w[j][self.index]
    }

    /// Outcome y_j, for j in 1..=horizon+1.
    pub fn y(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        self.data.y[j - 1][self.index]
    }
}

/// Partition of the periods 0..=T into complier (`tc`), never-taker (`tn0`),
/// and always-taker (`tn1`) periods.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplianceType {
    tc: Vec<usize>,
    tn0: Vec<usize>,
    tn1: Vec<usize>,
}

/// Raised when the three period sets fail to partition 0..=T.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidPartition;

impl fmt::Display for InvalidPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "compliance sets must partition the period range")
    }
}

impl ComplianceType {
    /// Builds a compliance type over periods 0..=horizon, checking that the
    /// three sets are disjoint and jointly exhaustive.
    pub fn new(
        tc: &[usize],
        tn0: &[usize],
        tn1: &[usize],
        horizon: usize,
    ) -> Result<Self, InvalidPartition> {
        let periods = horizon + 1;
        if tc.len() + tn0.len() + tn1.len() != periods {
            return Err(InvalidPartition);
        }
        let mut seen = alloc::vec![false; periods];
        for &j in tc.iter().chain(tn0).chain(tn1) {
            if j >= periods || seen[j] {
                return Err(InvalidPartition);
            }
            seen[j] = true;
        }
        let mut tc = tc.to_vec();
        let mut tn0 = tn0.to_vec();
        let mut tn1 = tn1.to_vec();
        tc.sort_unstable();
        tn0.sort_unstable();
        tn1.sort_unstable();
        Ok(ComplianceType { tc, tn0, tn1 })
    }

    /// The type with every period a complier period.
    pub fn full_compliance(horizon: usize) -> Self {
        ComplianceType { tc: (0..=horizon).collect(), tn0: Vec::new(), tn1: Vec::new() }
    }

    pub fn tc(&self) -> &[usize] {
        &self.tc
    }

    pub fn tn0(&self) -> &[usize] {
        &self.tn0
    }

    pub fn tn1(&self) -> &[usize] {
        &self.tn1
    }

    pub fn is_full_compliance(&self) -> bool {
        self.tn0.is_empty() && self.tn1.is_empty()
    }
}

/// All 3^(T+1) compliance types over periods 0..=horizon, ordered by the
/// base-3 code whose digit for period j is 0 for complier, 1 for never-taker,
/// 2 for always-taker. The first entry is full compliance.
pub fn enumerate_compliance_types(horizon: usize) -> Vec<ComplianceType> {
    let periods = horizon + 1;
    let total = 3usize.pow(periods as u32);
    let mut out = Vec::with_capacity(total);
    for code in 0..total {
        let mut tc = Vec::new();
        let mut tn0 = Vec::new();
        let mut tn1 = Vec::new();
        let mut rest = code;
        for j in 0..periods {
            match rest % 3 {
                0 => tc.push(j),
                1 => tn0.push(j),
                _ => tn1.push(j),
            }
            rest /= 3;
        }
        out.push(ComplianceType { tc, tn0, tn1 });
    }
    out
}

/// A fixed assignment of every period's treatment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Regime {
    assignments: Vec<u8>,
}

/// Raised for non-binary entries or an assignment-per-period mismatch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidRegime;

impl fmt::Display for InvalidRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "regime must assign 0 or 1 to every period")
    }
}

impl Regime {
    pub fn new(assignments: &[u8]) -> Result<Self, InvalidRegime> {
        if assignments.is_empty() || assignments.iter().any(|&a| a > 1) {
            return Err(InvalidRegime);
        }
        Ok(Regime { assignments: assignments.to_vec() })
    }

    pub fn assignments(&self) -> &[u8] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// True when the path's realized treatments match this regime in every
    /// period.
    pub fn matches_treatments(&self, path: PathView<'_>) -> bool {
        self.assignments.iter().enumerate().all(|(j, &a)| path.w(j) == a)
    }

    /// (period, value) pairs in period order, the shape joint instrument
    /// probabilities are queried with.
    pub fn assignment_pairs(&self) -> Vec<(usize, u8)> {
        self.assignments.iter().copied().enumerate().collect()
    }
}

/// Scalar summary of a path's outcomes.
pub enum UtilityFunctional {
    /// y_{T+1}.
    FinalOutcome,
    /// y_1 + ... + y_{T+1}.
    SumOfOutcomes,
    /// User-supplied scalar function of the path.
    Custom(Box<dyn for<'a> Fn(PathView<'a>) -> f64 + Send + Sync>),
}

impl fmt::Debug for UtilityFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UtilityFunctional::FinalOutcome => write!(f, "FinalOutcome"),
            UtilityFunctional::SumOfOutcomes => write!(f, "SumOfOutcomes"),
            UtilityFunctional::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

pub fn evaluate_utility(u: &UtilityFunctional, path: PathView<'_>) -> f64 {
    match u {
        UtilityFunctional::FinalOutcome => path.y(path.horizon() + 1),
        UtilityFunctional::SumOfOutcomes => {
            (1..=path.horizon() + 1).map(|j| path.y(j)).sum()
        }
        UtilityFunctional::Custom(f) => f(path),
    }
}

/// One rule failure found by [`validate_dataset`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// Offending path, absent for dataset-wide rules.
    pub path: Option<usize>,
    pub period: Option<usize>,
    pub rule: ViolationRule,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationRule {
    InstrumentNotBinary,
    TreatmentNotBinary,
    NonFiniteCovariate,
    NonFiniteOutcome,
    /// The instrument never varies within a period.
    NoInstrumentVariation,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rule {
            ViolationRule::InstrumentNotBinary => write!(f, "z out of {{0,1}}")?,
            ViolationRule::TreatmentNotBinary => write!(f, "w out of {{0,1}}")?,
            ViolationRule::NonFiniteCovariate => write!(f, "non-finite covariate")?,
            ViolationRule::NonFiniteOutcome => write!(f, "non-finite outcome")?,
            ViolationRule::NoInstrumentVariation => {
                return match self.period {
                    Some(j) => write!(f, "empirical positivity failed at period {j}"),
                    None => write!(f, "empirical positivity failed"),
                };
            }
        }
        if let Some(p) = self.path {
            write!(f, " at path {p}")?;
        }
        if let Some(j) = self.period {
            write!(f, ", period {j}")?;
        }
        Ok(())
    }
}

/// Checks value-level invariants: binary z/w, finite reals, and instrument
/// variation (both values observed) in every period. Returns an empty list
/// for a well-formed dataset.
pub fn validate_dataset(data: &PanelDataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let t = data.horizon();
    for i in 0..data.n() {
        let p = data.path(i);
        for j in 0..=t {
            if p.z(j) > 1 {
                out.push(Violation {
                    path: Some(i),
                    period: Some(j),
                    rule: ViolationRule::InstrumentNotBinary,
                });
            }
            if p.w(j) > 1 {
                out.push(Violation {
                    path: Some(i),
                    period: Some(j),
                    rule: ViolationRule::TreatmentNotBinary,
                });
            }
        }
        for j in 0..=t + 1 {
            if p.x(j).iter().any(|v| !v.is_finite()) {
                out.push(Violation {
                    path: Some(i),
                    period: Some(j),
                    rule: ViolationRule::NonFiniteCovariate,
                });
            }
        }
        for j in 1..=t + 1 {
            if !p.y(j).is_finite() {
                out.push(Violation {
                    path: Some(i),
                    period: Some(j),
                    rule: ViolationRule::NonFiniteOutcome,
                });
            }
        }
    }
    for j in 0..=t {
        let col = &data.z[j];
        let any0 = col.iter().any(|&v| v == 0);
        let any1 = col.iter().any(|&v| v == 1);
        if !(any0 && any1) {
            out.push(Violation {
                path: None,
                period: Some(j),
                rule: ViolationRule::NoInstrumentVariation,
            });
        }
    }
    out
}

/// Formats a violation list into one line per violation, for CLI reports.
pub fn render_violations(violations: &[Violation]) -> String {
    use core::fmt::Write;
    let mut s = String::new();
    for v in violations {
        let _ = writeln!(s, "{v}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_period_path(z: [u8; 2], w: [u8; 2], y: [f64; 2]) -> ObservationPath {
        ObservationPath {
            x0: alloc::vec![0.1, -0.2],
            z: z.to_vec(),
            w: w.to_vec(),
            y: y.to_vec(),
            x_post: alloc::vec![alloc::vec![0.1, -0.2], alloc::vec![]],
        }
    }

    fn small_panel() -> PanelDataset {
        PanelDataset::from_paths(&[
            two_period_path([1, 0], [1, 0], [1.0, 2.0]),
            two_period_path([0, 1], [0, 1], [3.0, 4.0]),
        ])
        .unwrap()
    }

    #[test]
    fn round_trips_paths_through_columns() {
        let d = small_panel();
        assert_eq!(d.n(), 2);
        assert_eq!(d.horizon(), 1);
        assert_eq!(d.dims(), &[2, 2, 0]);
        let p = d.path(1);
        assert_eq!(p.z(0), 0);
        assert_eq!(p.w(1), 1);
        assert_eq!(p.y(2), 4.0);
        assert_eq!(p.x0(), &[0.1, -0.2]);
        assert_eq!(p.x(2), &[] as &[f64]);
    }

    #[test]
    fn rejects_mismatched_paths() {
        let mut bad = two_period_path([1, 0], [1, 0], [1.0, 2.0]);
        bad.x0.push(9.0);
        let err = PanelDataset::from_paths(&[
            two_period_path([0, 1], [0, 1], [0.0, 0.0]),
            bad,
        ])
        .unwrap_err();
        assert_eq!(err, DataError::DimensionMismatch { path: 1, period: 0 });

        let short = ObservationPath {
            x0: alloc::vec![0.0, 0.0],
            z: alloc::vec![1],
            w: alloc::vec![1],
            y: alloc::vec![1.0],
            x_post: alloc::vec![alloc::vec![]],
        };
        let err = PanelDataset::from_paths(&[
            two_period_path([0, 1], [0, 1], [0.0, 0.0]),
            short,
        ])
        .unwrap_err();
        assert_eq!(err, DataError::HorizonMismatch { path: 1 });

        assert_eq!(PanelDataset::from_paths(&[]).unwrap_err(), DataError::Empty);
    }

    #[test]
    fn resample_gathers_rows_with_duplicates() {
        let d = small_panel();
        let r = d.resample(&[1, 1, 0]).unwrap();
        assert_eq!(r.n(), 3);
        assert_eq!(r.path(0).y(2), 4.0);
        assert_eq!(r.path(1).y(2), 4.0);
        assert_eq!(r.path(2).y(2), 2.0);
    }

    #[test]
    fn validate_flags_nonbinary_instrument() {
        let mut p = two_period_path([1, 0], [1, 0], [1.0, 2.0]);
        p.z[0] = 2;
        let d = PanelDataset::from_paths(&[
            p,
            two_period_path([0, 1], [1, 0], [0.0, 0.0]),
        ])
        .unwrap();
        let report = validate_dataset(&d);
        assert!(report.iter().any(|v| {
            v.rule == ViolationRule::InstrumentNotBinary
                && v.path == Some(0)
                && v.period == Some(0)
        }));
        let line = render_violations(&report);
        assert!(line.contains("z out of {0,1}"));
    }

    #[test]
    fn validate_flags_missing_instrument_variation() {
        let d = PanelDataset::from_paths(&[
            two_period_path([1, 1], [1, 0], [1.0, 2.0]),
            two_period_path([0, 1], [0, 1], [3.0, 4.0]),
        ])
        .unwrap();
        let report = validate_dataset(&d);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].period, Some(1));
        assert_eq!(report[0].rule, ViolationRule::NoInstrumentVariation);
        assert!(render_violations(&report).contains("empirical positivity failed at period 1"));
    }

    #[test]
    fn validate_accepts_well_formed_panel() {
        assert!(validate_dataset(&small_panel()).is_empty());
    }

    #[test]
    fn validate_flags_non_finite_values() {
        let mut p = two_period_path([1, 0], [1, 0], [1.0, f64::NAN]);
        p.x0[1] = f64::INFINITY;
        let d = PanelDataset::from_paths(&[
            p,
            two_period_path([0, 1], [0, 1], [3.0, 4.0]),
        ])
        .unwrap();
        let report = validate_dataset(&d);
        assert!(report
            .iter()
            .any(|v| v.rule == ViolationRule::NonFiniteCovariate && v.period == Some(0)));
        assert!(report
            .iter()
            .any(|v| v.rule == ViolationRule::NonFiniteOutcome && v.period == Some(2)));
    }

    #[test]
    fn utilities_read_final_and_summed_outcomes() {
        let d = small_panel();
        let p = d.path(0);
        assert_eq!(evaluate_utility(&UtilityFunctional::FinalOutcome, p), 2.0);
        assert_eq!(evaluate_utility(&UtilityFunctional::SumOfOutcomes, p), 3.0);
        let twice_final = UtilityFunctional::Custom(Box::new(|q: PathView<'_>| {
            2.0 * q.y(q.horizon() + 1)
        }));
        assert_eq!(evaluate_utility(&twice_final, p), 4.0);
    }

    #[test]
    fn final_outcome_reads_single_period_panel() {
        let d = PanelDataset::from_paths(&[ObservationPath {
            x0: alloc::vec![],
            z: alloc::vec![1],
            w: alloc::vec![1],
            y: alloc::vec![-1.5],
            x_post: alloc::vec![alloc::vec![]],
        }])
        .unwrap();
        assert_eq!(evaluate_utility(&UtilityFunctional::FinalOutcome, d.path(0)), -1.5);
    }

    #[test]
    fn compliance_type_enumeration_counts_and_partition() {
        for t in 0..3 {
            let all = enumerate_compliance_types(t);
            assert_eq!(all.len(), 3usize.pow(t as u32 + 1));
            for c in &all {
                let total = c.tc().len() + c.tn0().len() + c.tn1().len();
                assert_eq!(total, t + 1);
                ComplianceType::new(c.tc(), c.tn0(), c.tn1(), t).unwrap();
            }
        }
        let all = enumerate_compliance_types(2);
        let full: Vec<_> = all.iter().filter(|c| c.is_full_compliance()).collect();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].tc(), &[0, 1, 2]);
        assert_eq!(all[0], ComplianceType::full_compliance(2));
    }

    #[test]
    fn compliance_type_rejects_bad_partitions() {
        assert!(ComplianceType::new(&[0], &[0], &[1], 1).is_err());
        assert!(ComplianceType::new(&[0], &[], &[], 1).is_err());
        assert!(ComplianceType::new(&[0, 2], &[1], &[], 1).is_err());
    }

    #[test]
    fn regime_checks_and_matches() {
        assert!(Regime::new(&[0, 2]).is_err());
        assert!(Regime::new(&[]).is_err());
        let r = Regime::new(&[1, 0]).unwrap();
        let d = small_panel();
        assert!(r.matches_treatments(d.path(0)));
        assert!(!r.matches_treatments(d.path(1)));
        assert_eq!(r.assignment_pairs(), alloc::vec![(0, 1), (1, 0)]);
    }
}

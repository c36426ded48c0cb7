//! Shared evaluation engine: ROC curves, AUC, confusion counts, calibration.
//!
//! Every model lane (SVM, CNN, LLM) reduces to a set of [`ScoredSample`]s —
//! a forgery confidence in `[0, 1]` against a binary ground truth — and is
//! evaluated by the same code here. AUC is provided by two independent
//! routes: the trapezoid integral of the tie-grouped ROC curve and the
//! pairwise Mann-Whitney statistic. With grouped ties the two definitions
//! coincide exactly, which the test suite exploits as a cross-check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ground-truth label of a scored document or patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Truth {
    Pristine,
    Forged,
}

impl Truth {
    pub fn is_forged(self) -> bool {
        matches!(self, Truth::Forged)
    }
}

/// One scored item entering the evaluation engine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredSample {
    pub id: String,
    /// Forgery confidence in `[0, 1]`.
    pub score: f64,
    pub truth: Truth,
}

impl ScoredSample {
    pub fn new(id: impl Into<String>, score: f64, truth: Truth) -> Self {
        Self { id: id.into(), score, truth }
    }
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("input contains only one class; ROC/AUC need both")]
    SingleClassInput,
    #[error("sample `{id}` has a non-finite score")]
    NonFiniteScore { id: String },
    #[error("bin width {0} does not divide the unit interval evenly")]
    InvalidBinWidth(f64),
}

/// ROC curve over descending score thresholds.
///
/// `points[i]` is `(false_positive_rate, true_positive_rate)` when predicting
/// forged iff `score >= thresholds[i]`. The first point is the `(0, 0)`
/// sentinel (threshold above every score), the last is `(1, 1)`. Samples
/// sharing a score enter as one group, producing diagonal segments.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    pub points: Vec<(f64, f64)>,
    pub thresholds: Vec<f64>,
}

impl RocCurve {
    /// Two-column delimited export, one `fpr,tpr` pair per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("fpr,tpr\n");
        for (fpr, tpr) in &self.points {
            out.push_str(&format!("{fpr},{tpr}\n"));
        }
        out
    }
}

fn check_finite(samples: &[ScoredSample]) -> Result<(), MetricsError> {
    for s in samples {
        if !s.score.is_finite() {
            return Err(MetricsError::NonFiniteScore { id: s.id.clone() });
        }
    }
    Ok(())
}

fn class_counts(samples: &[ScoredSample]) -> (usize, usize) {
    let pos = samples.iter().filter(|s| s.truth.is_forged()).count();
    (pos, samples.len() - pos)
}

/// Build the tie-grouped ROC curve.
pub fn roc_curve(samples: &[ScoredSample]) -> Result<RocCurve, MetricsError> {
    check_finite(samples)?;
    let (pos, neg) = class_counts(samples);
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClassInput);
    }

    let mut order: Vec<&ScoredSample> = samples.iter().collect();
    order.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));

    let mut points = vec![(0.0, 0.0)];
    let mut thresholds = vec![f64::INFINITY];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = order[i].score;
        // consume the whole tie group at threshold t
        while i < order.len() && order[i].score == t {
            if order[i].truth.is_forged() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        thresholds.push(t);
    }
    Ok(RocCurve { points, thresholds })
}

/// Trapezoidal integral of a ROC curve.
pub fn auc_trapezoid(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            (x1 - x0) * (y0 + y1) / 2.0
        })
        .sum()
}

/// Pairwise (Mann-Whitney) AUC: mean credit over all (forged, pristine)
/// pairs, 1 for a correctly ordered pair, 0.5 for a tie.
///
/// Independent of [`roc_curve`]/[`auc_trapezoid`]; the two routes must agree.
pub fn auc_pairwise(samples: &[ScoredSample]) -> Result<f64, MetricsError> {
    check_finite(samples)?;
    let (pos, neg) = class_counts(samples);
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClassInput);
    }
    // 2x credit keeps the accumulator integral, so the result is an exact
    // rational with denominator 2*pos*neg.
    let mut credit2: u64 = 0;
    for f in samples.iter().filter(|s| s.truth.is_forged()) {
        for p in samples.iter().filter(|s| !s.truth.is_forged()) {
            if f.score > p.score {
                credit2 += 2;
            } else if f.score == p.score {
                credit2 += 1;
            }
        }
    }
    Ok(credit2 as f64 / (2.0 * pos as f64 * neg as f64))
}

/// Confusion counts at a fixed threshold: predicted forged iff `score >= t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            return 0.0;
        }
        (self.true_pos + self.true_neg) as f64 / self.total() as f64
    }

    pub fn precision(&self) -> f64 {
        let denom = self.true_pos + self.false_pos;
        if denom == 0 {
            0.0
        } else {
            self.true_pos as f64 / denom as f64
        }
    }

    pub fn recall(&self) -> f64 {
        let denom = self.true_pos + self.false_neg;
        if denom == 0 {
            0.0
        } else {
            self.true_pos as f64 / denom as f64
        }
    }

    /// Harmonic mean of precision and recall; 0 when both are 0.
    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

pub fn confusion_at_threshold(samples: &[ScoredSample], t: f64) -> Confusion {
    let mut c = Confusion { true_pos: 0, false_pos: 0, true_neg: 0, false_neg: 0 };
    for s in samples {
        let predicted_forged = s.score >= t;
        match (s.truth.is_forged(), predicted_forged) {
            (true, true) => c.true_pos += 1,
            (true, false) => c.false_neg += 1,
            (false, true) => c.false_pos += 1,
            (false, false) => c.true_neg += 1,
        }
    }
    c
}

/// Per-truth histogram of predicted confidences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationHistogram {
    pub bin_width: f64,
    /// `[pristine counts, forged counts]`, one entry per bin.
    pub counts_by_truth: [Vec<u64>; 2],
}

pub const DEFAULT_BIN_WIDTH: f64 = 0.05;

impl CalibrationHistogram {
    pub fn bins(&self) -> usize {
        self.counts_by_truth[0].len()
    }
}

/// Histogram scores into `1/bin_width` bins; a score of exactly 1.0 lands in
/// the last bin rather than overflowing.
pub fn calibration_histogram(
    samples: &[ScoredSample],
    bin_width: f64,
) -> Result<CalibrationHistogram, MetricsError> {
    if !(bin_width > 0.0 && bin_width <= 1.0) {
        return Err(MetricsError::InvalidBinWidth(bin_width));
    }
    let bins_f = (1.0 / bin_width).round();
    if bins_f < 1.0 || (bins_f * bin_width - 1.0).abs() > 1e-9 {
        return Err(MetricsError::InvalidBinWidth(bin_width));
    }
    let bins = bins_f as usize;
    let mut counts = [vec![0u64; bins], vec![0u64; bins]];
    for s in samples {
        if !s.score.is_finite() {
            return Err(MetricsError::NonFiniteScore { id: s.id.clone() });
        }
        let idx = ((s.score / bin_width).floor() as usize).min(bins - 1);
        let series = if s.truth.is_forged() { 1 } else { 0 };
        counts[series][idx] += 1;
    }
    Ok(CalibrationHistogram { bin_width, counts_by_truth: counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn samples(pairs: &[(f64, Truth)]) -> Vec<ScoredSample> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, (s, t))| ScoredSample::new(format!("s{i}"), *s, *t))
            .collect()
    }

    #[test]
    fn perfect_separator_curve() {
        let s = samples(&[(1.0, Truth::Forged), (0.0, Truth::Pristine)]);
        let curve = roc_curve(&s).unwrap();
        assert_eq!(curve.points, vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        assert_eq!(auc_trapezoid(&curve), 1.0);
    }

    #[test]
    fn all_ties_give_diagonal() {
        let s = samples(&[
            (0.3, Truth::Forged),
            (0.3, Truth::Pristine),
            (0.3, Truth::Forged),
            (0.3, Truth::Pristine),
        ]);
        let curve = roc_curve(&s).unwrap();
        assert_eq!(curve.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(auc_trapezoid(&curve), 0.5);
        assert_eq!(auc_pairwise(&s).unwrap(), 0.5);
    }

    #[test]
    fn four_sample_fixture_is_three_quarters() {
        // 3 of the 4 (forged, pristine) pairs are ordered correctly.
        let s = samples(&[
            (0.9, Truth::Forged),
            (0.8, Truth::Pristine),
            (0.7, Truth::Forged),
            (0.1, Truth::Pristine),
        ]);
        let curve = roc_curve(&s).unwrap();
        assert_eq!(auc_trapezoid(&curve), 0.75);
        assert_eq!(auc_pairwise(&s).unwrap(), 0.75);
    }

    #[test]
    fn single_class_rejected() {
        let s = samples(&[(0.2, Truth::Forged), (0.4, Truth::Forged)]);
        assert!(matches!(roc_curve(&s), Err(MetricsError::SingleClassInput)));
        assert!(matches!(auc_pairwise(&s), Err(MetricsError::SingleClassInput)));
    }

    #[test]
    fn single_pair_extremes() {
        let s = samples(&[(0.9, Truth::Forged), (0.1, Truth::Pristine)]);
        assert_eq!(auc_pairwise(&s).unwrap(), 1.0);
    }

    #[test]
    fn confusion_fixture_161_of_192() {
        // 120 pristine (110 correct) + 72 forged (51 correct) = 161/192.
        let mut s = Vec::new();
        for i in 0..110 {
            s.push(ScoredSample::new(format!("tn{i}"), 0.1, Truth::Pristine));
        }
        for i in 0..10 {
            s.push(ScoredSample::new(format!("fp{i}"), 0.9, Truth::Pristine));
        }
        for i in 0..51 {
            s.push(ScoredSample::new(format!("tp{i}"), 0.9, Truth::Forged));
        }
        for i in 0..21 {
            s.push(ScoredSample::new(format!("fn{i}"), 0.1, Truth::Forged));
        }
        let c = confusion_at_threshold(&s, 0.5);
        assert_eq!(c.total(), 192);
        assert_eq!(c.true_pos + c.true_neg, 161);
        assert!((c.accuracy() - 0.8385).abs() < 5e-5);
    }

    #[test]
    fn degenerate_recall_has_no_division_error() {
        let s = samples(&[(0.1, Truth::Forged), (0.2, Truth::Pristine)]);
        let c = confusion_at_threshold(&s, 0.5);
        assert_eq!(c.recall(), 0.0);
        assert_eq!(c.f1(), 0.0);
    }

    #[test]
    fn histogram_low_scores_land_in_lowest_bin() {
        let s = samples(&[(0.02, Truth::Pristine), (0.04, Truth::Pristine)]);
        let h = calibration_histogram(&s, DEFAULT_BIN_WIDTH).unwrap();
        assert_eq!(h.bins(), 20);
        assert_eq!(h.counts_by_truth[0][0], 2);
        assert_eq!(h.counts_by_truth[1].iter().sum::<u64>(), 0);
    }

    #[test]
    fn histogram_score_one_goes_to_last_bin() {
        let s = samples(&[(1.0, Truth::Forged)]);
        let h = calibration_histogram(&s, DEFAULT_BIN_WIDTH).unwrap();
        assert_eq!(h.counts_by_truth[1][19], 1);
    }

    #[test]
    fn histogram_rejects_uneven_width() {
        let s = samples(&[(0.5, Truth::Forged)]);
        assert!(matches!(
            calibration_histogram(&s, 0.3),
            Err(MetricsError::InvalidBinWidth(_))
        ));
    }

    proptest! {
        // Strategy: scores on a coarse lattice so ties are frequent.
        fn arb_samples()(v in prop::collection::vec((0..=10u8, prop::bool::ANY), 2..60)) -> Vec<ScoredSample> {
            v.into_iter()
                .enumerate()
                .map(|(i, (s, f))| ScoredSample::new(
                    format!("p{i}"),
                    s as f64 / 10.0,
                    if f { Truth::Forged } else { Truth::Pristine },
                ))
                .collect()
        }
    }

    fn has_both_classes(s: &[ScoredSample]) -> bool {
        let (p, n) = class_counts(s);
        p > 0 && n > 0
    }

    proptest! {
        #[test]
        fn trapezoid_equals_pairwise(s in arb_samples()) {
            prop_assume!(has_both_classes(&s));
            let a = auc_trapezoid(&roc_curve(&s).unwrap());
            let b = auc_pairwise(&s).unwrap();
            prop_assert!((a - b).abs() < 1e-12, "trapezoid {a} vs pairwise {b}");
        }

        #[test]
        fn auc_is_rank_invariant(s in arb_samples()) {
            prop_assume!(has_both_classes(&s));
            let base = auc_pairwise(&s).unwrap();
            // strictly increasing map keeping scores in [0, 1]
            let mapped: Vec<ScoredSample> = s.iter()
                .map(|x| ScoredSample::new(x.id.clone(), (x.score + 1.0) / 3.0, x.truth))
                .collect();
            let m1 = auc_pairwise(&mapped).unwrap();
            let m2 = auc_trapezoid(&roc_curve(&mapped).unwrap());
            prop_assert!((base - m1).abs() < 1e-12);
            prop_assert!((base - m2).abs() < 1e-12);
        }

        #[test]
        fn complement_symmetry(s in arb_samples()) {
            prop_assume!(has_both_classes(&s));
            let base = auc_pairwise(&s).unwrap();
            let flipped: Vec<ScoredSample> = s.iter()
                .map(|x| ScoredSample::new(
                    x.id.clone(),
                    1.0 - x.score,
                    if x.truth.is_forged() { Truth::Pristine } else { Truth::Forged },
                ))
                .collect();
            let f = auc_pairwise(&flipped).unwrap();
            prop_assert!((base - f).abs() < 1e-12);
        }

        #[test]
        fn roc_endpoints_and_monotonicity(s in arb_samples()) {
            prop_assume!(has_both_classes(&s));
            let curve = roc_curve(&s).unwrap();
            prop_assert_eq!(curve.points[0], (0.0, 0.0));
            prop_assert_eq!(*curve.points.last().unwrap(), (1.0, 1.0));
            prop_assert_eq!(curve.points.len(), curve.thresholds.len());
            for w in curve.points.windows(2) {
                prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
            }
            for w in curve.thresholds.windows(2) {
                prop_assert!(w[1] < w[0]);
            }
        }

        #[test]
        fn confusion_counts_sum_to_n(s in arb_samples(), t in 0.0f64..=1.0) {
            let c = confusion_at_threshold(&s, t);
            prop_assert_eq!(c.total(), s.len());
        }

        #[test]
        fn histogram_counts_sum_to_class_sizes(s in arb_samples()) {
            let h = calibration_histogram(&s, DEFAULT_BIN_WIDTH).unwrap();
            let (pos, neg) = class_counts(&s);
            prop_assert_eq!(h.counts_by_truth[1].iter().sum::<u64>(), pos as u64);
            prop_assert_eq!(h.counts_by_truth[0].iter().sum::<u64>(), neg as u64);
        }
    }
}

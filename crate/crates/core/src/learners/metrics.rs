use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub r#fn: usize,
}

impl Confusion {
    pub fn count(labels: &[u8], preds: &[u8]) -> Self {
        let mut c = Confusion::default();
        for (&y, &p) in labels.iter().zip(preds) {
            match (y, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (0, 0) => c.tn += 1,
                _ => c.r#fn += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.r#fn
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Nothing was predicted favorable, so precision was set to 0.
    #[serde(default)]
    pub precision_undefined: bool,
}

impl PerfMetrics {
    pub fn from_confusion(c: &Confusion) -> Self {
        let n = c.total().max(1) as f64;
        let accuracy = (c.tp + c.tn) as f64 / n;
        let predicted_pos = c.tp + c.fp;
        let actual_pos = c.tp + c.r#fn;
        let precision = if predicted_pos == 0 {
            0.0
        } else {
            c.tp as f64 / predicted_pos as f64
        };
        let recall = if actual_pos == 0 {
            0.0
        } else {
            c.tp as f64 / actual_pos as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            accuracy,
            precision,
            recall,
            f1,
            precision_undefined: predicted_pos == 0,
        }
    }

    pub fn from_predictions(labels: &[u8], preds: &[u8]) -> Self {
        Self::from_confusion(&Confusion::count(labels, preds))
    }

    /// Accuracy and F1 both within `tol` of `baseline`.
    pub fn within_tolerance_of(&self, baseline: &PerfMetrics, tol: f64) -> bool {
        baseline.accuracy - self.accuracy <= tol + 1e-12 && baseline.f1 - self.f1 <= tol + 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive_on_half_positive() {
        let m = PerfMetrics::from_predictions(&[1, 0, 1, 0], &[1, 1, 1, 1]);
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 1.0);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.accuracy, 0.5);
    }

    #[test]
    fn nothing_predicted_favorable() {
        let m = PerfMetrics::from_predictions(&[1, 0], &[0, 0]);
        assert!(m.precision_undefined);
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn tolerance_is_one_sided() {
        let base = PerfMetrics::from_predictions(&[1, 0, 1, 0], &[1, 0, 1, 0]);
        let worse = PerfMetrics::from_predictions(&[1, 0, 1, 0], &[1, 1, 1, 0]);
        assert!(base.within_tolerance_of(&worse, 0.05));
        assert!(!worse.within_tolerance_of(&base, 0.05));
    }
}

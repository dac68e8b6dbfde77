//! Run metrics: test accuracy, label precision, last-epoch statistics.

use crate::data::LabeledData;
use crate::error::{Error, Result};
use crate::model::{Network, NetworkId};
use crate::trainers::SelectionRecord;

/// Argmax-prediction accuracy against clean labels; argmax ties resolve
/// to the lowest class index.
pub fn evaluate_accuracy(net: &Network, eval: &LabeledData) -> Result<f64> {
    if eval.is_empty() {
        return Err(Error::Contract("evaluation set is empty".into()));
    }
    let preds = net.predict(&eval.features)?;
    let correct = preds
        .iter()
        .zip(&eval.labels)
        .filter(|(p, y)| p == y)
        .count();
    Ok(correct as f64 / eval.len() as f64)
}

/// Fraction of kept instances whose noisy label was actually clean,
/// pooled over all of one network's selection records. `None` when the
/// network kept nothing.
pub fn label_precision(records: &[SelectionRecord], network: NetworkId) -> Option<f64> {
    let (mut kept, mut clean) = (0usize, 0usize);
    for rec in records.iter().filter(|r| r.network_id == network) {
        kept += rec.kept_indices.len();
        clean += rec.kept_clean_count;
    }
    (kept > 0).then(|| clean as f64 / kept as f64)
}

/// Mean of the final `min(10, len)` values.
pub fn last10_mean(series: &[f64]) -> f64 {
    let k = series.len().min(10);
    if k == 0 {
        return f64::NAN;
    }
    series[series.len() - k..].iter().sum::<f64>() / k as f64
}

/// Sample mean and standard deviation (n−1 denominator; 0 for n ≤ 1).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64;
    (mean, var.sqrt())
}

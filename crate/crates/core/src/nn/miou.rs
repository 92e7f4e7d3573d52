use super::{shape_err, NnError};
use crate::costmap::SemanticMap;

/// Counts indexed `[reference][predicted]`, `num_classes²` entries.
pub fn confusion_matrix(
    pred: &SemanticMap,
    reference: &SemanticMap,
    num_classes: usize,
) -> Result<Vec<u64>, NnError> {
    if pred.width() != reference.width() || pred.height() != reference.height() {
        return shape_err(format!(
            "prediction is {}x{}, reference is {}x{}",
            pred.width(),
            pred.height(),
            reference.width(),
            reference.height()
        ));
    }
    let mut counts = vec![0u64; num_classes * num_classes];
    for (&p, &r) in pred.labels().iter().zip(reference.labels()) {
        let (p, r) = (p as usize, r as usize);
        if p >= num_classes || r >= num_classes {
            return shape_err(format!("label {} outside {num_classes} classes", p.max(r)));
        }
        counts[r * num_classes + p] += 1;
    }
    Ok(counts)
}

/// Mean IoU over the classes that appear in either map.
pub fn miou(pred: &SemanticMap, reference: &SemanticMap, num_classes: usize) -> Result<f64, NnError> {
    let cm = confusion_matrix(pred, reference, num_classes)?;
    let n = num_classes;
    let mut sum = 0.0;
    let mut present = 0usize;
    for k in 0..n {
        let tp = cm[k * n + k];
        let in_ref: u64 = cm[k * n..(k + 1) * n].iter().sum();
        let in_pred: u64 = (0..n).map(|r| cm[r * n + k]).sum();
        let union = in_ref + in_pred - tp;
        if union > 0 {
            sum += tp as f64 / union as f64;
            present += 1;
        }
    }
    // Maps are never empty, so at least one class is present.
    Ok(sum / present as f64)
}

use super::NnError;

/// `λ·main + (1 − λ)·aux`.
pub fn combined_loss(main: f64, aux: f64, lambda: f64) -> Result<f64, NnError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(NnError::Domain {
            name: "lambda",
            value: lambda,
        });
    }
    Ok(lambda * main + (1.0 - lambda) * aux)
}

/// Mean binary cross-entropy of probabilities against 0/1 targets.
/// Probabilities are clamped away from 0 and 1 to keep the log finite.
pub fn binary_cross_entropy(probs: &[f64], targets: &[bool]) -> f64 {
    const EPS: f64 = 1e-12;
    let total: f64 = probs
        .iter()
        .zip(targets)
        .map(|(&p, &y)| {
            let p = p.clamp(EPS, 1.0 - EPS);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / probs.len().max(1) as f64
}

use crate::error::{Error, Result};

/// Mean squared error, with the `1/(2M)` prefactor when `halved`, `1/M`
/// otherwise.
pub fn loss_mse(targets: &[f64], predictions: &[f64], halved: bool) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::Argument("loss of an empty batch".into()));
    }
    if targets.len() != predictions.len() {
        return Err(Error::Shape(format!(
            "{} targets vs {} predictions",
            targets.len(),
            predictions.len()
        )));
    }
    let sse: f64 = targets
        .iter()
        .zip(predictions)
        .map(|(y, p)| (y - p) * (y - p))
        .sum();
    Ok(sse / (loss_denominator(halved) * targets.len() as f64))
}

#[inline]
pub(crate) fn loss_denominator(halved: bool) -> f64 {
    if halved {
        2.0
    } else {
        1.0
    }
}

use super::{BacktestError, EquityCurve, Result};

/// `sqrt(sum((x - mean)^2) / (n - ddof))`.
///
/// Deviations are taken relative to the first value before averaging, which keeps a
/// constant input at exactly zero and limits cancellation on large price levels.
pub fn std_dev(values: &[f64], ddof: usize) -> Result<f64> {
    let needed = ddof + 1;
    if values.len() < needed {
        return Err(BacktestError::TooFewValues {
            needed,
            found: values.len(),
        });
    }
    let pivot = values[0];
    let n = values.len() as f64;
    let mean_shift = values.iter().map(|v| v - pivot).sum::<f64>() / n;
    let ss: f64 = values
        .iter()
        .map(|v| {
            let d = (v - pivot) - mean_shift;
            d * d
        })
        .sum();
    Ok((ss / (values.len() - ddof) as f64).sqrt())
}

/// Sample standard deviation of the indicative curve over that of the continuous curve.
pub fn volatility_ratio(indicative: &EquityCurve, continuous: &EquityCurve) -> Result<f64> {
    check_aligned(indicative, continuous)?;
    let denominator = std_dev(&continuous.values(), 1)?;
    if denominator == 0.0 {
        return Err(BacktestError::ZeroDenominator);
    }
    Ok(std_dev(&indicative.values(), 1)? / denominator)
}

/// Percentage of days on which the indicative curve is strictly above the continuous one.
pub fn outperformance_pct(indicative: &EquityCurve, continuous: &EquityCurve) -> Result<f64> {
    check_aligned(indicative, continuous)?;
    if indicative.is_empty() {
        return Err(BacktestError::TooFewValues { needed: 1, found: 0 });
    }
    let above = indicative
        .points
        .iter()
        .zip(&continuous.points)
        .filter(|(i, c)| i.1 > c.1)
        .count();
    Ok(above as f64 / indicative.len() as f64 * 100.0)
}

fn check_aligned(a: &EquityCurve, b: &EquityCurve) -> Result<()> {
    if a.len() != b.len() || a.dates().zip(b.dates()).any(|(x, y)| x != y) {
        return Err(BacktestError::MisalignedCurves);
    }
    Ok(())
}

//! Exponential-rate extraction: least-squares slope of log Y over the
//! trailing window where Y sits between the noise floor and the transient
//! ceiling, compared against the spectral reference -2λ.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_squared: Option<f64>,
    pub two_lambda_ref: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_gap: Option<f64>,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 20;

/// Fit log Y(t) on the window floor <= Y <= ceiling. Fewer than
/// `MIN_FIT_POINTS` usable points yields a not-applicable result.
pub fn rate_fit(series: &[(f64, f64)], lambda_ref: f64, floor: f64, ceiling: f64) -> RateFit {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|&&(_, y)| y >= floor && y <= ceiling && y > 0.0)
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    let two_lambda_ref = 2.0 * lambda_ref;
    if pts.len() < MIN_FIT_POINTS {
        return RateFit {
            applicable: false,
            window: None,
            slope: None,
            r_squared: None,
            two_lambda_ref,
            relative_gap: None,
            points: pts.len(),
        };
    }
    let n = pts.len() as f64;
    let st: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let stt: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sty: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sty - st * sy) / (n * stt - st * st);
    let intercept = (sy - slope * st) / n;

    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - (slope * p.0 + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    RateFit {
        applicable: true,
        window: Some((pts.first().unwrap().0, pts.last().unwrap().0)),
        slope: Some(slope),
        r_squared: Some(r_squared),
        two_lambda_ref,
        relative_gap: Some((slope + two_lambda_ref).abs() / two_lambda_ref),
        points: pts.len(),
    }
}

//! Numeric helpers shared by the solvers and the report writers.

/// Absolute tolerance for comparing accumulated sums.
pub const EPS: f64 = 1e-9;

/// Rounds to nine decimals, which removes accumulation noise such as
/// `0.1 + 0.2 = 0.30000000000000004`.
pub fn round(x: f64) -> f64 {
    if !x.is_finite() {
        return x;
    }
    let r = (x * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Minimal decimal representation of a rounded value.
pub fn fmt(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{}", round(x))
}

pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EPS * a.abs().max(b.abs()).max(1.0)
}

/// Converts a nonnegative quantity into integer units of `granularity`.
/// Returns `None` when the value is not a whole multiple of it.
pub fn to_units(x: f64, granularity: f64) -> Option<i64> {
    if !x.is_finite() || x < 0.0 || granularity <= 0.0 {
        return None;
    }
    let units = (x / granularity).round();
    if units > i64::MAX as f64 / 4.0 {
        return None;
    }
    if (units * granularity - x).abs() <= 1e-7 * granularity.max(1e-12) * units.max(1.0) {
        Some(units as i64)
    } else {
        None
    }
}

/// Budget in integer units, rounding down.
pub fn budget_units(budget: f64, granularity: f64) -> i64 {
    if budget.is_infinite() {
        return i64::MAX;
    }
    (budget / granularity + 1e-7).floor().max(0.0) as i64
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

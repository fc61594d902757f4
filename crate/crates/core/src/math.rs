//! Scalar functions for `no_std` builds, plus the series-guarded kernels
//! shared by the motor exponential and logarithm.

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

/// Below this angle the trigonometric quotients switch to Taylor series.
const SERIES_BELOW: f64 = 0.5;

/// sin(t) / t
pub(crate) fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-6 {
        let t2 = t * t;
        1.0 - t2 / 6.0 + t2 * t2 / 120.0
    } else {
        sin(t) / t
    }
}

/// (sin t - t cos t) / t³, equal to 1/3 at the origin.
pub(crate) fn sinc_cubic(t: f64) -> f64 {
    if t.abs() < SERIES_BELOW {
        // sum over m >= 1 of (-1)^(m+1) 2m t^(2m-2) / (2m+1)!
        let t2 = t * t;
        let mut sum = 0.0;
        let mut power = 1.0;
        let mut factorial = 6.0;
        let mut sign = 1.0;
        for m in 1..10 {
            let m = m as f64;
            sum += sign * 2.0 * m * power / factorial;
            power *= t2;
            factorial *= (2.0 * m + 2.0) * (2.0 * m + 3.0);
            sign = -sign;
        }
        sum
    } else {
        (sin(t) - t * cos(t)) / (t * t * t)
    }
}

/// Derivative of [`sinc_cubic`] divided by t, equal to -1/15 at the origin.
pub(crate) fn sinc_cubic_slope(t: f64) -> f64 {
    if t.abs() < SERIES_BELOW {
        // sum over m >= 2 of (-1)^(m+1) 2m (2m-2) t^(2m-4) / (2m+1)!
        let t2 = t * t;
        let mut sum = 0.0;
        let mut power = 1.0;
        let mut factorial = 120.0;
        let mut sign = -1.0;
        for m in 2..12 {
            let m = m as f64;
            sum += sign * 2.0 * m * (2.0 * m - 2.0) * power / factorial;
            power *= t2;
            factorial *= (2.0 * m + 2.0) * (2.0 * m + 3.0);
            sign = -sign;
        }
        sum
    } else {
        let (s, c) = (sin(t), cos(t));
        (t * t * s - 3.0 * s + 3.0 * t * c) / (t * t * t * t * t)
    }
}

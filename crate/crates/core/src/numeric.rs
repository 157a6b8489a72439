//! Small shared numerical helpers.

/// Composite Simpson quadrature on a uniform grid. Falls back to a single
/// trapezoid slice at the tail when the sample count is even.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let odd_count = if n % 2 == 1 { n } else { n - 1 };
    let mut sum = values[0] + values[odd_count - 1];
    for (i, v) in values[1..odd_count - 1].iter().enumerate() {
        sum += if i % 2 == 0 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = sum * h / 3.0;
    if n % 2 == 0 {
        total += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    total
}

/// `n` evenly spaced points covering [lo, hi] inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simpson_integrates_smooth_functions() {
        let xs = linspace(0.0, std::f64::consts::PI, 1001);
        let h = xs[1] - xs[0];
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        assert_relative_eq!(simpson(&ys, h), 2.0, max_relative = 1e-10);

        // even sample count takes the trapezoid tail branch
        let xs = linspace(0.0, 1.0, 1000);
        let h = xs[1] - xs[0];
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert_relative_eq!(simpson(&ys, h), 1.0 / 3.0, max_relative = 1e-7);
    }

    #[test]
    fn linspace_endpoints() {
        let v = linspace(2.0, 5.0, 4);
        assert_eq!(v, vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!(linspace(1.0, 9.0, 1), vec![1.0]);
    }
}

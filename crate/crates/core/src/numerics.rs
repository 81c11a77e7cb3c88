//! Small numerical helpers shared by the experiment drivers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Seed used whenever a config does not name one.
pub const DEFAULT_SEED: u64 = 42;

/// The generator behind every random draw in the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` equidistant points on `[a, b]`; `n = 1` gives `[a]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|k| if k == n - 1 { b } else { a + (b - a) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

/// `n` log-spaced points on `[a, b]`, both positive.
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

/// Least-squares slope and intercept of `y` against `x`. `None` for fewer
/// than two distinct abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Slope of `log y` against `log x`. Non-positive entries are skipped.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .unzip();
    linear_fit(&lx, &ly).map(|(s, _)| s)
}

/// Largest deviation of `y` from its least-squares line in `x`.
pub fn linear_residual(x: &[f64], y: &[f64]) -> f64 {
    let Some((s, c)) = linear_fit(x, y) else {
        return 0.0;
    };
    x.iter()
        .zip(y)
        .map(|(a, b)| (b - (s * a + c)).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn slope_of_power_law() {
        let x = logspace(1e-3, 1e-1, 7);
        let y: Vec<f64> = x.iter().map(|v| 5.0 * v.powi(3)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn grid_endpoints_are_exact() {
        let g = linspace(-3000.0, 3000.0, 61);
        assert_eq!((g[0], g[30], g[60]), (-3000.0, 0.0, 3000.0));
        assert_eq!(linear_residual(&g, &g), 0.0);
    }

    #[test]
    fn seeded_draws_repeat() {
        let a: f64 = seeded_rng(DEFAULT_SEED).random();
        let b: f64 = seeded_rng(DEFAULT_SEED).random();
        assert_eq!(a, b);
    }
}

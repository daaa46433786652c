use std::sync::OnceLock;

use crate::error::{Error, Result};

const TABLE: &str = include_str!("../../data/tw1_cdf.csv");

/// Tabulated Tracy-Widom (index 1) distribution function.
#[derive(Debug, Clone)]
pub struct Tw1Table {
    x: Vec<f64>,
    cdf: Vec<f64>,
    mean: f64,
    variance: f64,
}

impl Tw1Table {
    fn parse(text: &str) -> Tw1Table {
        let mut x = Vec::new();
        let mut cdf = Vec::new();
        let (mut mean, mut variance) = (f64::NAN, f64::NAN);
        for line in text.lines() {
            if let Some(comment) = line.strip_prefix('#') {
                let words: Vec<&str> = comment.split_whitespace().collect();
                if words.first() == Some(&"mean") && words.len() == 4 {
                    mean = words[1].parse().expect("tabulated mean");
                    variance = words[3].parse().expect("tabulated variance");
                }
                continue;
            }
            let Some((a, b)) = line.split_once(',') else { continue };
            if let (Ok(a), Ok(b)) = (a.parse::<f64>(), b.parse::<f64>()) {
                x.push(a);
                cdf.push(b);
            }
        }
        Tw1Table { x, cdf, mean, variance }
    }

    pub fn get() -> &'static Tw1Table {
        static TABLE_CELL: OnceLock<Tw1Table> = OnceLock::new();
        TABLE_CELL.get_or_init(|| Tw1Table::parse(TABLE))
    }

    pub fn grid(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.cdf
    }

    /// Mean recorded with the table.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Variance recorded with the table.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Mean and variance by the midpoint rule over the tabulated increments.
    pub fn integrated_moments(&self) -> (f64, f64) {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for i in 1..self.x.len() {
            let mid = 0.5 * (self.x[i] + self.x[i - 1]);
            let mass = self.cdf[i] - self.cdf[i - 1];
            m1 += mid * mass;
            m2 += mid * mid * mass;
        }
        (m1, m2 - m1 * m1)
    }

    /// Linear interpolation of the distribution function, clamped to 0 and 1
    /// outside the grid.
    pub fn cdf(&self, t: f64) -> f64 {
        let last = self.x.len() - 1;
        if t <= self.x[0] {
            return if t == self.x[0] { self.cdf[0] } else { 0.0 };
        }
        if t >= self.x[last] {
            return if t == self.x[last] { self.cdf[last] } else { 1.0 };
        }
        let i = self.x.partition_point(|&v| v <= t);
        let w = (t - self.x[i - 1]) / (self.x[i] - self.x[i - 1]);
        self.cdf[i - 1] + w * (self.cdf[i] - self.cdf[i - 1])
    }

    /// Inverse of the interpolated distribution function.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        let last = self.cdf.len() - 1;
        if !(q >= self.cdf[0] && q <= self.cdf[last]) || q <= 0.0 || q >= 1.0 {
            return Err(Error::Range(q));
        }
        let i = self.cdf.partition_point(|&c| c < q);
        if i == 0 {
            return Ok(self.x[0]);
        }
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        Ok(self.x[i - 1] + (q - c0) / (c1 - c0) * (self.x[i] - self.x[i - 1]))
    }
}

pub fn tw1_cdf(t: f64) -> f64 {
    Tw1Table::get().cdf(t)
}

pub fn tw1_quantile(q: f64) -> Result<f64> {
    Tw1Table::get().quantile(q)
}

pub fn tw1_mean() -> f64 {
    Tw1Table::get().mean()
}

pub fn tw1_sd() -> f64 {
    Tw1Table::get().variance().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_monotone_and_complete() {
        let t = Tw1Table::get();
        assert_eq!(t.grid().len(), 1401);
        assert!(t.values().windows(2).all(|w| w[1] >= w[0]));
        assert!(t.values()[0] < 1e-10 && t.values()[1400] > 0.99999);
    }

    #[test]
    fn moments_match_integration() {
        let t = Tw1Table::get();
        let (m, v) = t.integrated_moments();
        assert!((m - t.mean()).abs() < 1e-3);
        assert!((v - t.variance()).abs() < 1e-3);
        assert!((tw1_mean() + 1.2065).abs() < 1e-4);
        assert!((tw1_sd() - 1.2680).abs() < 1e-4);
    }

    #[test]
    fn quantile_inverts_cdf_on_grid() {
        let t = Tw1Table::get();
        for i in (300..1300).step_by(37) {
            let x = t.grid()[i];
            assert!((tw1_quantile(t.values()[i]).unwrap() - x).abs() < 0.01);
        }
        assert!(tw1_quantile(0.0).is_err());
        assert!(tw1_quantile(1.0).is_err());
        let mut prev = f64::NEG_INFINITY;
        for k in 1..1000 {
            let q = tw1_quantile(k as f64 / 1000.0).unwrap();
            assert!(q > prev);
            prev = q;
        }
    }

    #[test]
    fn known_upper_quantiles() {
        // Published TW1 quantiles: 0.95 -> 0.9793, 0.975 -> 1.4538.
        assert!((tw1_quantile(0.95).unwrap() - 0.9793).abs() < 2e-3);
        assert!((tw1_quantile(0.975).unwrap() - 1.4538).abs() < 2e-3);
    }
}

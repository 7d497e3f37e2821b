use super::RegimeTag;
use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 8;

/// Sampled kernel with log-log interpolation and tail extrapolation.
#[derive(Debug, Clone)]
pub struct KernelTable {
    t: Vec<f64>,
    k: Vec<f64>,
    tail: RegimeTag,
    /// Log-log slope used past the last sample (diffusive tails).
    tail_slope: f64,
}

impl KernelTable {
    pub fn new(samples: &[(f64, f64)], tail: RegimeTag) -> Result<Self> {
        if samples.len() < MIN_SAMPLES {
            return Err(Error::InvalidTable(format!(
                "need at least {MIN_SAMPLES} samples, got {}",
                samples.len()
            )));
        }
        let (t, k): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        if t.iter().chain(k.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidTable("non-finite entry".into()));
        }
        if t[0] < 0.0 {
            return Err(Error::InvalidTable("times must be non-negative".into()));
        }
        if let Some(i) = t.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidTable(format!(
                "times must be strictly increasing (row {} -> {})",
                i,
                i + 1
            )));
        }
        if let Some(i) = k.iter().position(|&v| v < 0.0) {
            return Err(Error::InvalidTable(format!("negative kernel value at row {i}")));
        }
        let n = t.len();
        let tail_slope = match tail {
            RegimeTag::Diffusive { beta0 } => {
                let floor = -(2.0 + beta0);
                if k[n - 1] > 0.0 && k[n - 2] > 0.0 && t[n - 2] > 0.0 {
                    ((k[n - 1] / k[n - 2]).ln() / (t[n - 1] / t[n - 2]).ln()).min(floor)
                } else {
                    floor
                }
            }
            RegimeTag::Subdiffusive { alpha, .. } => -alpha,
            RegimeTag::Critical { .. } => -1.0,
            RegimeTag::Unclassified => f64::NAN,
        };
        Ok(KernelTable {
            t,
            k,
            tail,
            tail_slope,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn last_time(&self) -> f64 {
        *self.t.last().expect("non-empty")
    }

    /// Time of the last sample that follows an increase; 0 when the table is
    /// non-increasing throughout.
    pub fn decrease_onset(&self) -> f64 {
        self.k
            .windows(2)
            .rposition(|w| w[1] > w[0])
            .map_or(0.0, |i| self.t[i + 1])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.k[0];
        }
        if t >= self.t[n - 1] {
            if t == self.t[n - 1] {
                return self.k[n - 1];
            }
            return match self.tail {
                RegimeTag::Unclassified => f64::NAN,
                _ => self.k[n - 1] * (t / self.t[n - 1]).powf(self.tail_slope),
            };
        }
        // t[i] <= t < t[i+1]
        let i = self.t.partition_point(|&x| x <= t) - 1;
        let (t0, t1, k0, k1) = (self.t[i], self.t[i + 1], self.k[i], self.k[i + 1]);
        if k0 <= 0.0 || k1 <= 0.0 {
            k0 + (k1 - k0) * (t - t0) / (t1 - t0)
        } else if t0 <= 0.0 {
            let s = (t - t0) / (t1 - t0);
            (k0.ln() + s * (k1.ln() - k0.ln())).exp()
        } else {
            let s = (t / t0).ln() / (t1 / t0).ln();
            (k0.ln() + s * (k1.ln() - k0.ln())).exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::MemoryKernel;
    use super::*;

    fn exp_table(n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let t = 20.0 * i as f64 / (n - 1) as f64;
                (t, (-t).exp())
            })
            .collect()
    }

    #[test]
    fn interpolates_exponential() {
        let k = MemoryKernel::tabulated(&exp_table(81), RegimeTag::Diffusive { beta0: 2.0 }).unwrap();
        assert!((k.eval(1.0) - (-1.0f64).exp()).abs() < 1e-3);
        assert!((k.eval(1.1) - (-1.1f64).exp()).abs() < 3e-3);
        assert!((k.eval(0.1) - (-0.1f64).exp()).abs() < 1e-3);
        assert_eq!(k.decrease_onset(), 0.0);
        // Tail continues decreasing past t = 20.
        assert!(k.eval(40.0) < k.eval(20.0));
    }

    #[test]
    fn too_few_samples() {
        let e = MemoryKernel::tabulated(&[(1.0, 1.0)], RegimeTag::Unclassified).unwrap_err();
        assert!(matches!(e, Error::InvalidTable(_)));
    }

    #[test]
    fn rejects_bad_tables() {
        let mut s = exp_table(10);
        s.swap(3, 4);
        assert!(MemoryKernel::tabulated(&s, RegimeTag::Unclassified).is_err());
        let mut s = exp_table(10);
        s[5].1 = -0.1;
        assert!(MemoryKernel::tabulated(&s, RegimeTag::Unclassified).is_err());
    }

    #[test]
    fn clamps_below_first_sample() {
        let s: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, 1.0 / i as f64)).collect();
        let k = MemoryKernel::tabulated(&s, RegimeTag::Critical { c1: 1.0, beta1: 1.0 }).unwrap();
        assert_eq!(k.eval(0.5), 1.0);
        assert_eq!(k.eval(0.0), 1.0);
        // log-log line through 1/t is exact
        assert!((k.eval(2.5) - 0.4).abs() < 1e-14);
        // critical extrapolation keeps t K(t) constant
        assert!((k.eval(100.0) * 100.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unclassified_tail_refuses_extrapolation() {
        let k = MemoryKernel::tabulated(&exp_table(20), RegimeTag::Unclassified).unwrap();
        assert!(k.try_eval(10.0).is_ok());
        assert!(matches!(k.try_eval(25.0), Err(Error::OutsideTable { .. })));
    }

    #[test]
    fn onset_found_after_bump() {
        let mut s: Vec<(f64, f64)> = (1..=12).map(|i| (i as f64, 1.0 / i as f64)).collect();
        s[6].1 = 0.5; // bump at t = 7
        let k = MemoryKernel::tabulated(&s, RegimeTag::Critical { c1: 1.0, beta1: 1.0 }).unwrap();
        assert_eq!(k.decrease_onset(), 7.0);
    }
}

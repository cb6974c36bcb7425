use rand::seq::index::sample;
use rand::Rng;
use serde::Serialize;

use super::{Grads, ParamSet};
use crate::scalar::Scalar;

/// A scalar loss over a parameter set with an analytic gradient.
pub trait Objective<T: Scalar> {
    fn params(&self) -> &ParamSet<T>;
    fn params_mut(&mut self) -> &mut ParamSet<T>;
    /// Loss at the current parameters, plus a fingerprint of the active
    /// piecewise-linear region (ReLU masks, pooling argmaxes). Objectives without
    /// kinks return an empty fingerprint.
    fn loss(&self) -> (T, Vec<u32>);
    fn gradient(&self) -> Grads<T>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamCheck {
    pub name: String,
    pub max_rel_err: f64,
    pub checked: usize,
    /// Coordinates skipped because a perturbation crossed a kink.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub params: Vec<ParamCheck>,
}

impl GradCheckReport {
    pub fn max_rel_err(&self) -> f64 {
        self.params.iter().map(|p| p.max_rel_err).fold(0.0, f64::max)
    }
}

/// `|a − b| / max(|a| + |b|, 1e−6)`; the floor keeps round-off on near-zero
/// gradients from dominating.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-6)
}

/// Compares the analytic gradient with central differences
/// `(L(θ+eps) − L(θ−eps)) / (2·eps)` on up to `samples` coordinates per array.
pub fn grad_check<T, O, R>(objective: &mut O, eps: f64, samples: usize, rng: &mut R) -> GradCheckReport
where
    T: Scalar,
    O: Objective<T>,
    R: Rng + ?Sized,
{
    assert!((1e-7..=1e-3).contains(&eps), "eps must lie in [1e-7, 1e-3]");
    let analytic = objective.gradient();
    let (_, regime) = objective.loss();
    let epsilon = T::lit(eps);
    let mut report = GradCheckReport { params: Vec::new() };

    for i in 0..objective.params().len() {
        let len = objective.params().get(i).len();
        let coords: Vec<usize> = if len <= samples {
            (0..len).collect()
        } else {
            let mut c = sample(rng, len, samples).into_vec();
            c.sort_unstable();
            c
        };
        let mut check = ParamCheck {
            name: objective.params().params[i].name.clone(),
            max_rel_err: 0.0,
            checked: 0,
            skipped: 0,
        };
        for k in coords {
            let orig = objective.params().get(i).data()[k];
            objective.params_mut().get_mut(i).data_mut()[k] = orig + epsilon;
            let (plus, regime_plus) = objective.loss();
            objective.params_mut().get_mut(i).data_mut()[k] = orig - epsilon;
            let (minus, regime_minus) = objective.loss();
            objective.params_mut().get_mut(i).data_mut()[k] = orig;
            if regime_plus != regime || regime_minus != regime {
                check.skipped += 1;
                continue;
            }
            let numeric = (plus.as_f64() - minus.as_f64()) / (2.0 * eps);
            let err = relative_error(analytic.get(i).data()[k].as_f64(), numeric);
            check.max_rel_err = check.max_rel_err.max(err);
            check.checked += 1;
        }
        report.params.push(check);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Array, ParamKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// L(w) = Σ c_i w_i
    struct Linear {
        params: ParamSet<f64>,
        coef: Vec<f64>,
    }

    impl Objective<f64> for Linear {
        fn params(&self) -> &ParamSet<f64> {
            &self.params
        }
        fn params_mut(&mut self) -> &mut ParamSet<f64> {
            &mut self.params
        }
        fn loss(&self) -> (f64, Vec<u32>) {
            let w = self.params.get(0).data();
            (w.iter().zip(&self.coef).map(|(a, b)| a * b).sum(), vec![])
        }
        fn gradient(&self) -> Grads<f64> {
            let mut g = Grads::zeros_like(&self.params);
            g.array_mut(0).data_mut().copy_from_slice(&self.coef);
            g
        }
    }

    #[test]
    fn linear_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut params = ParamSet::default();
        params.push("w", Array::uniform(&[300], 1.0, &mut rng), ParamKind::Dense);
        let coef = (0..300).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut obj = Linear { params, coef };
        let report = grad_check(&mut obj, 1e-5, 200, &mut rng);
        assert_eq!(report.params[0].checked, 200);
        assert!(report.max_rel_err() < 1e-8, "{report:?}");
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = ParamSet::default();
        params.push("w", Array::uniform(&[10], 1.0, &mut rng), ParamKind::Dense);
        let mut obj = Linear {
            params,
            coef: vec![1.0; 10],
        };
        struct Off<'a>(&'a mut Linear);
        impl Objective<f64> for Off<'_> {
            fn params(&self) -> &ParamSet<f64> {
                self.0.params()
            }
            fn params_mut(&mut self) -> &mut ParamSet<f64> {
                self.0.params_mut()
            }
            fn loss(&self) -> (f64, Vec<u32>) {
                self.0.loss()
            }
            fn gradient(&self) -> Grads<f64> {
                let mut g = self.0.gradient();
                g.array_mut(0).data_mut()[3] = 2.0;
                g
            }
        }
        let report = grad_check(&mut Off(&mut obj), 1e-5, 200, &mut rng);
        assert!(report.max_rel_err() > 0.3);
    }
}

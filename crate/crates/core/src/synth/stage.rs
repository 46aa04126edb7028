use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::rational::{frac_str, int, rat, Rational};

/// Rational stage parameters `(alpha_s, alpha_bar_s, beta_s, epsilon_s)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRationals {
    #[serde(with = "frac_str")]
    pub alpha: Rational,
    #[serde(with = "frac_str")]
    pub alpha_bar: Rational,
    #[serde(with = "frac_str")]
    pub beta: Rational,
    #[serde(with = "frac_str")]
    pub epsilon: Rational,
}

impl StageRationals {
    /// Initial bracket: `a -/+ 1/4`, `beta = b/2`, `epsilon = b/8`.
    pub fn initial(a: &Rational, b: &Rational) -> Self {
        StageRationals {
            alpha: a - rat(1, 4),
            alpha_bar: a + rat(1, 4),
            beta: b / int(2),
            epsilon: b / int(8),
        }
    }

    fn check(&self, a: &Rational, b: &Rational) -> bool {
        self.alpha < *a
            && *a < self.alpha_bar
            && self.epsilon > Rational::zero()
            && &self.beta + &self.epsilon < *b
    }
}

/// Midpoint rule: move each bracket end halfway toward its target until the
/// required width `1/(s+1)` is reached.
pub fn synth_stage_rationals(
    s: usize,
    a: &Rational,
    b: &Rational,
    prior: &StageRationals,
) -> Result<StageRationals> {
    if b.is_zero() {
        return Err(Error::InvalidArgument(
            "b = 0: the singleton case has no stage parameters".into(),
        ));
    }
    if !prior.check(a, b) {
        return Err(Error::InvariantCorruption(format!(
            "stage {s} parameters do not bracket a and b"
        )));
    }
    let width = rat(1, s as i64 + 1);
    let two = int(2);
    let mut alpha = (&prior.alpha + a) / &two;
    let mut alpha_bar = (a + &prior.alpha_bar) / &two;
    while &alpha_bar - &alpha >= width {
        alpha = (&alpha + a) / &two;
        alpha_bar = (&alpha_bar + a) / &two;
    }
    let mut beta = (&prior.beta + &prior.epsilon + b) / &two;
    while b - &beta >= width {
        beta = (&beta + b) / &two;
    }
    let epsilon = (b - &beta) / &two;
    Ok(StageRationals {
        alpha,
        alpha_bar,
        beta,
        epsilon,
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Safe rational function `P(x) / (1 + |S(x)|)` with
/// `P(x) = a0 + a1 x + ... + am x^m` and `S(x) = b1 x + ... + bn x^n`.
///
/// The denominator is at least 1, so the function has no poles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalActivation {
    /// `a0 ..= am`
    pub numerator: Vec<f64>,
    /// `b1 ..= bn`
    pub denominator: Vec<f64>,
}

/// Analytic derivatives of a rational activation at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalGrad {
    pub dx: f64,
    pub da: Vec<f64>,
    pub db: Vec<f64>,
}

impl RationalActivation {
    pub const DEFAULT_NUM_ORDER: usize = 5;
    pub const DEFAULT_DEN_ORDER: usize = 4;

    pub fn new(numerator: Vec<f64>, denominator: Vec<f64>) -> Result<Self> {
        if numerator.is_empty() {
            return Err(Error::IncompatibleStack("rational numerator is empty".into()));
        }
        if numerator.iter().chain(&denominator).any(|v| !v.is_finite()) {
            return Err(Error::IncompatibleStack("non-finite rational coefficient".into()));
        }
        Ok(Self {
            numerator,
            denominator,
        })
    }

    /// `y = x` at orders `(m, n)`.
    pub fn identity(m: usize, n: usize) -> Self {
        let mut numerator = vec![0.0; m.max(1) + 1];
        numerator[1] = 1.0;
        Self {
            numerator,
            denominator: vec![0.0; n],
        }
    }

    /// Identity at the default (5, 4) orders.
    pub fn default_identity() -> Self {
        Self::identity(Self::DEFAULT_NUM_ORDER, Self::DEFAULT_DEN_ORDER)
    }

    fn parts(&self, x: f64) -> (f64, f64, f64, f64) {
        // P, P', S, S' by Horner
        let (mut p, mut dp) = (0.0, 0.0);
        for &a in self.numerator.iter().rev() {
            dp = dp * x + p;
            p = p * x + a;
        }
        let (mut s, mut ds) = (0.0, 0.0);
        for &b in self.denominator.iter().rev() {
            ds = ds * x + s;
            s = s * x + b;
        }
        // the loop above computed T(x) = b1 + b2 x + ...; S = x T
        let (s, ds) = (s * x, ds * x + s);
        (p, dp, s, ds)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let (p, _, s, _) = self.parts(x);
        p / (1.0 + s.abs())
    }

    /// Value of the inner denominator sum `S(x)`; the kink sits at `S = 0`.
    pub fn denominator_sum(&self, x: f64) -> f64 {
        self.parts(x).2
    }

    /// Gradients with respect to `x`, `a_i` and `b_j`. The subgradient of
    /// `|S|` at `S = 0` is taken as 0.
    pub fn grad(&self, x: f64) -> RationalGrad {
        let (p, dp, s, ds) = self.parts(x);
        let q = 1.0 + s.abs();
        let sign = if s > 0.0 {
            1.0
        } else if s < 0.0 {
            -1.0
        } else {
            0.0
        };
        let dq = sign * ds;
        let mut pow = 1.0;
        let da = self
            .numerator
            .iter()
            .map(|_| {
                let v = pow / q;
                pow *= x;
                v
            })
            .collect();
        let mut pow = x;
        let db = self
            .denominator
            .iter()
            .map(|_| {
                let v = -p * sign * pow / (q * q);
                pow *= x;
                v
            })
            .collect();
        RationalGrad {
            dx: (dp * q - p * dq) / (q * q),
            da,
            db,
        }
    }
}

pub fn rational_forward(x: f64, act: &RationalActivation) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFiniteInput(x));
    }
    Ok(act.eval(x))
}

pub fn rational_backward(x: f64, act: &RationalActivation) -> Result<RationalGrad> {
    if !x.is_finite() {
        return Err(Error::NonFiniteInput(x));
    }
    Ok(act.grad(x))
}

/// Rational functions shared by contiguous groups of features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRational {
    pub groups: Vec<RationalActivation>,
}

impl GroupRational {
    pub fn uniform(act: RationalActivation, groups: usize) -> Self {
        Self {
            groups: vec![act; groups.max(1)],
        }
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn check_width(&self, width: usize) -> Result<()> {
        let g = self.groups.len();
        if g == 0 || width % g != 0 {
            return Err(Error::IncompatibleStack(format!(
                "{g} rational groups do not divide width {width}"
            )));
        }
        Ok(())
    }

    /// Group index of feature `i` in a vector of `width` features.
    #[inline]
    pub fn group_of(&self, i: usize, width: usize) -> usize {
        i / (width / self.groups.len())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let per = x.len() / self.groups.len();
        x.iter()
            .enumerate()
            .map(|(i, &v)| self.groups[i / per].eval(v))
            .collect()
    }
}

//! Small scalar and vector helpers used across the crate.

/// Overflow-safe softplus, `ln(1 + e^x)`.
///
/// For `x > 30` the linear term dominates to beyond double precision and we
/// return `x` directly.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// Numerically stable logistic sigmoid.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(sigmoid(z))`, strictly negative for every finite input.
///
/// The value is `-softplus(-z)`; for very large `z` the true value underflows
/// to zero, so it is clamped to the smallest subnormal to keep the sign strict.
pub fn log_sigmoid(z: f64) -> f64 {
    let v = -softplus(-z);
    if v == 0.0 {
        -f64::from_bits(1) // smallest positive subnormal
    } else {
        v
    }
}

/// Plain sequential dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

/// Euclidean norm.
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Kahan compensated accumulator for long sums of small terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

//! Compensated summation used by every grid reduction.
//!
//! Neumaier's variant of Kahan summation keeps reductions over ~10⁶ samples
//! accurate to a few ulps, so x-space and k-space integrals can be compared
//! at 1e-10 without worrying about accumulation order.

use crate::vector::C64;

#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

pub fn sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn csum(values: impl IntoIterator<Item = C64>) -> C64 {
    let mut acc = ComplexNeumaier::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let vals = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(sum(vals), 2.0);
        assert_ne!(vals.iter().sum::<f64>(), 2.0);
    }
}

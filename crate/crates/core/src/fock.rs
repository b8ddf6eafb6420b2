//! Sparse occupation-number states over a finite set of modes.
//!
//! Ladder operators act with the usual `√n` factors. Each mode also carries a
//! metric sign; it enters the commutator `[a_m, a_m†] = η_m` and the indefinite
//! inner product, never the ladder amplitudes themselves.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mode_space::WaveVectorGrid;
use crate::sum::{ComplexNeumaier, Neumaier};
use crate::vector::C64;

pub const DEFAULT_N_MAX: u32 = 12;

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSet {
    metric_sign: Vec<f64>,
    n_max: u32,
}

impl ModeSet {
    /// `mode_count` modes with positive metric.
    pub fn new(mode_count: usize, n_max: u32) -> Result<Self> {
        Self::with_metric(vec![1.0; mode_count], n_max)
    }

    pub fn with_metric(metric_sign: Vec<f64>, n_max: u32) -> Result<Self> {
        if metric_sign.is_empty() {
            return Err(Error::InvalidArgument("mode_count must be at least 1".into()));
        }
        if n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be at least 1".into()));
        }
        if metric_sign.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::InvalidArgument("metric signs must be +1 or -1".into()));
        }
        Ok(Self { metric_sign, n_max })
    }

    pub fn mode_count(&self) -> usize {
        self.metric_sign.len()
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn metric_sign(&self, m: usize) -> f64 {
        self.metric_sign[m]
    }

    fn check_mode(&self, m: usize) -> Result<()> {
        if m >= self.mode_count() {
            return Err(Error::InvalidArgument(format!("mode {m} out of range 0..{}", self.mode_count())));
        }
        Ok(())
    }
}

/// Superposition of occupation-number basis states. Zero amplitudes are never stored.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct FockVector {
    amplitudes: BTreeMap<Vec<u32>, C64>,
}

impl FockVector {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(occupation: Vec<u32>) -> Self {
        let mut v = Self::zero();
        v.amplitudes.insert(occupation, C64::from(1.0));
        v
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, occupation: &[u32]) -> C64 {
        self.amplitudes.get(occupation).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<u32>, &C64)> {
        self.amplitudes.iter()
    }

    fn accumulate(&mut self, occupation: Vec<u32>, value: C64) {
        let slot = self.amplitudes.entry(occupation).or_default();
        *slot += value;
        if *slot == C64::default() {
            self.amplitudes.retain(|_, v| *v != C64::default());
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = Self::zero();
        if factor == C64::default() {
            return out;
        }
        for (occ, v) in &self.amplitudes {
            out.accumulate(occ.clone(), v * factor);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (occ, v) in &other.amplitudes {
            out.accumulate(occ.clone(), *v);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C64::from(-1.0)))
    }
}

pub fn vacuum(ms: &ModeSet) -> FockVector {
    FockVector::basis(vec![0; ms.mode_count()])
}

pub fn apply_create(ms: &ModeSet, v: &FockVector, m: usize) -> Result<FockVector> {
    ms.check_mode(m)?;
    let mut out = FockVector::zero();
    for (occ, amp) in &v.amplitudes {
        let n = occ[m];
        if n >= ms.n_max {
            return Err(Error::TruncationOverflow { mode: m, n_max: ms.n_max });
        }
        let mut next = occ.clone();
        next[m] = n + 1;
        out.accumulate(next, amp * ((n + 1) as f64).sqrt());
    }
    Ok(out)
}

pub fn apply_annihilate(ms: &ModeSet, v: &FockVector, m: usize) -> Result<FockVector> {
    ms.check_mode(m)?;
    let mut out = FockVector::zero();
    for (occ, amp) in &v.amplitudes {
        let n = occ[m];
        if n == 0 {
            continue;
        }
        let mut next = occ.clone();
        next[m] = n - 1;
        out.accumulate(next, amp * (n as f64).sqrt());
    }
    Ok(out)
}

/// `(a_m†)ⁿ|0⟩ / √n!`.
pub fn n_photon_state(ms: &ModeSet, m: usize, n: u32) -> Result<FockVector> {
    ms.check_mode(m)?;
    if n > ms.n_max {
        return Err(Error::TruncationOverflow { mode: m, n_max: ms.n_max });
    }
    let mut v = vacuum(ms);
    let mut factorial = 1.0f64;
    for j in 1..=n {
        v = apply_create(ms, &v, m)?;
        factorial *= j as f64;
    }
    Ok(v.scaled(C64::from(1.0 / factorial.sqrt())))
}

/// Positive-definite inner product `⟨u|v⟩`, conjugate-linear in `u`.
pub fn inner_product(u: &FockVector, v: &FockVector) -> C64 {
    let mut acc = ComplexNeumaier::default();
    for (occ, a) in &u.amplitudes {
        if let Some(b) = v.amplitudes.get(occ) {
            acc.add(a.conj() * b);
        }
    }
    acc.value()
}

/// Indefinite inner product: basis state `|n⟩` has norm `Π_m η_mⁿᵐ`.
pub fn metric_inner_product(ms: &ModeSet, u: &FockVector, v: &FockVector) -> C64 {
    let mut acc = ComplexNeumaier::default();
    for (occ, a) in &u.amplitudes {
        if let Some(b) = v.amplitudes.get(occ) {
            let sign: f64 = occ.iter().enumerate().map(|(m, n)| ms.metric_sign(m).powi(*n as i32)).product();
            acc.add(a.conj() * b * sign);
        }
    }
    acc.value()
}

/// `⟨v|a_m† a_m|v⟩`.
pub fn number_expectation(ms: &ModeSet, v: &FockVector, m: usize) -> Result<f64> {
    ms.check_mode(m)?;
    let mut acc = Neumaier::new();
    for (occ, a) in &v.amplitudes {
        acc.add(a.norm_sqr() * occ[m] as f64);
    }
    Ok(acc.value())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

pub fn apply(ms: &ModeSet, v: &FockVector, op: Ladder) -> Result<FockVector> {
    match op {
        Ladder::Create(m) => apply_create(ms, v, m),
        Ladder::Annihilate(m) => apply_annihilate(ms, v, m),
    }
}

/// `(XY - YX)|v⟩`, scaled by `η_m` when the pair is `[a_m, a_m†]`.
pub fn commutator(ms: &ModeSet, v: &FockVector, x: Ladder, y: Ladder) -> Result<FockVector> {
    let xy = apply(ms, &apply(ms, v, y)?, x)?;
    let yx = apply(ms, &apply(ms, v, x)?, y)?;
    let raw = xy.sub(&yx);
    Ok(match (x, y) {
        (Ladder::Annihilate(m), Ladder::Create(n)) | (Ladder::Create(n), Ladder::Annihilate(m)) if m == n => {
            raw.scaled(C64::from(ms.metric_sign(m)))
        }
        _ => raw,
    })
}

/// `⟨v|[a_m, a_m†]|v⟩` for a normalized `v`; equals `η_m` for every such state.
pub fn commutator_expectation(ms: &ModeSet, v: &FockVector, m: usize) -> Result<C64> {
    let norm = inner_product(v, v).re;
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotNormalized(norm));
    }
    let c = commutator(ms, v, Ladder::Annihilate(m), Ladder::Create(m))?;
    Ok(inner_product(v, &c))
}

/// A scalar amplitude per wavevector sample (longitudinal or scalar-potential mode).
#[derive(Clone, Debug)]
pub struct ScalarAmplitude {
    pub grid: Arc<WaveVectorGrid>,
    pub values: Vec<C64>,
}

impl ScalarAmplitude {
    pub fn new(grid: Arc<WaveVectorGrid>, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!("expected {} amplitudes, got {}", grid.len(), values.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * factor).collect() }
    }

    /// Mode-wise contraction `Σ ∫ dk/(2π)³ |c|²`, the c-number value of the
    /// commutator contraction for one polarization.
    pub fn contraction(&self) -> f64 {
        let mut acc = Neumaier::new();
        for (idx, v) in self.values.iter().enumerate() {
            if !self.grid.is_masked(idx) {
                acc.add(v.norm_sqr());
            }
        }
        acc.value() * self.grid.cell_weight()
    }
}

/// `|T(c_∥) - T(c_φ)|`: the longitudinal and scalar-potential commutator
/// contractions cancel when `Â_∥ = φ̂/c`.
pub fn longitudinal_cancellation_residual(c_par: &ScalarAmplitude, c_scalar: &ScalarAmplitude) -> Result<f64> {
    if *c_par.grid != *c_scalar.grid {
        return Err(Error::GridMismatch);
    }
    Ok((c_par.contraction() - c_scalar.contraction()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ms() -> ModeSet {
        ModeSet::new(3, DEFAULT_N_MAX).unwrap()
    }

    #[test]
    fn vacuum_properties() {
        let ms = ms();
        let v = vacuum(&ms);
        assert_eq!(inner_product(&v, &v), C64::from(1.0));
        assert!(apply_annihilate(&ms, &v, 1).unwrap().is_zero());
        assert_eq!(number_expectation(&ms, &v, 2).unwrap(), 0.0);
        assert_eq!(commutator_expectation(&ms, &v, 0).unwrap(), C64::from(1.0));
    }

    #[test]
    fn ladder_factors() {
        let ms = ms();
        let one = apply_create(&ms, &vacuum(&ms), 0).unwrap();
        assert_eq!(one.amplitude(&[1, 0, 0]), C64::from(1.0));
        assert_eq!(apply_annihilate(&ms, &one, 0).unwrap(), vacuum(&ms));
        let three = FockVector::basis(vec![3, 0, 0]);
        assert_eq!(apply_create(&ms, &three, 0).unwrap().amplitude(&[4, 0, 0]), C64::from(2.0));
    }

    #[test]
    fn number_and_anti_normal_order_for_n_up_to_ten() {
        let ms = ms();
        for n in 0..=10 {
            let v = n_photon_state(&ms, 1, n).unwrap();
            assert!((inner_product(&v, &v).re - 1.0).abs() <= 1e-12);
            assert!((number_expectation(&ms, &v, 1).unwrap() - n as f64).abs() <= 1e-12);
            let aad = apply_annihilate(&ms, &apply_create(&ms, &v, 1).unwrap(), 1).unwrap();
            assert!((inner_product(&v, &aad) - (n + 1) as f64).norm() <= 1e-12);
            assert!((commutator_expectation(&ms, &v, 1).unwrap() - 1.0).norm() <= 1e-12);
        }
    }

    #[test]
    fn negative_metric_mode_has_negative_commutator() {
        let ms = ModeSet::with_metric(vec![1.0, -1.0], 6).unwrap();
        for n in 0..6 {
            let v = n_photon_state(&ms, 1, n).unwrap();
            assert!((commutator_expectation(&ms, &v, 1).unwrap() + 1.0).norm() <= 1e-12);
            let expected = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((metric_inner_product(&ms, &v, &v).re - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn truncation_and_argument_errors() {
        let ms = ModeSet::new(1, 2).unwrap();
        let top = n_photon_state(&ms, 0, 2).unwrap();
        assert!(matches!(apply_create(&ms, &top, 0), Err(Error::TruncationOverflow { .. })));
        assert!(n_photon_state(&ms, 0, 3).is_err());
        assert!(apply_create(&ms, &top, 4).is_err());
        assert!(ModeSet::new(0, 3).is_err());
        assert!(ModeSet::new(2, 0).is_err());
        let unnormalized = top.scaled(C64::from(2.0));
        assert!(matches!(commutator_expectation(&ms, &unnormalized, 0), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn cross_mode_commutators_vanish() {
        let ms = ms();
        let v = FockVector::basis(vec![2, 1, 3]);
        for (m, mp) in [(0, 1), (1, 2), (0, 2)] {
            for (x, y) in [
                (Ladder::Annihilate(m), Ladder::Create(mp)),
                (Ladder::Annihilate(m), Ladder::Annihilate(mp)),
                (Ladder::Create(m), Ladder::Create(mp)),
            ] {
                assert!(commutator(&ms, &v, x, y).unwrap().is_zero());
            }
        }
    }

    fn arb_state() -> impl Strategy<Value = FockVector> {
        prop::collection::vec(((0u32..5, 0u32..5), (-1.0f64..1.0, -1.0f64..1.0)), 1..6).prop_map(|entries| {
            let mut v = FockVector::zero();
            for ((a, b), (re, im)) in entries {
                v = v.add(&FockVector::basis(vec![a, b]).scaled(C64::new(re, im)));
            }
            v
        })
    }

    proptest! {
        #[test]
        fn ladder_operators_are_mutual_adjoints(u in arb_state(), v in arb_state(), m in 0usize..2) {
            let ms = ModeSet::new(2, DEFAULT_N_MAX).unwrap();
            let lhs = inner_product(&u, &apply_create(&ms, &v, m).unwrap());
            let rhs = inner_product(&apply_annihilate(&ms, &u, m).unwrap(), &v);
            prop_assert!((lhs - rhs).norm() <= 1e-12);
            prop_assert!((inner_product(&u, &v) - inner_product(&v, &u).conj()).norm() <= 1e-12);
            prop_assert!(inner_product(&u, &u).im.abs() <= 1e-15);
        }

        #[test]
        fn commutator_is_identity_on_every_basis_state(a in 0u32..DEFAULT_N_MAX, b in 0u32..DEFAULT_N_MAX) {
            let ms = ModeSet::new(2, DEFAULT_N_MAX).unwrap();
            let v = FockVector::basis(vec![a, b]);
            for m in 0..2 {
                let c = commutator(&ms, &v, Ladder::Annihilate(m), Ladder::Create(m)).unwrap();
                prop_assert!((inner_product(&v, &c) - 1.0).norm() <= 1e-12);
            }
        }
    }

    fn amplitudes() -> ScalarAmplitude {
        let g = Arc::new(WaveVectorGrid::centered([6, 6, 6], [0.5; 3], [0.0, 0.0, 2.0]).unwrap());
        let values = (0..g.len()).map(|i| C64::new((i as f64 * 0.3).cos(), (i as f64 * 0.7).sin())).collect();
        ScalarAmplitude::new(g, values).unwrap()
    }

    #[test]
    fn cancellation_under_lorenz_constraint() {
        let c = amplitudes();
        assert!(longitudinal_cancellation_residual(&c, &c.clone()).unwrap() <= 1e-12);
        let zero = c.scaled(0.0);
        let t = longitudinal_cancellation_residual(&c, &zero).unwrap();
        assert!(t > 0.0);
        // Brute-force quadrature of the contraction for the 2c case.
        let doubled = c.scaled(2.0);
        let mut oracle = 0.0;
        for (idx, v) in c.values.iter().enumerate() {
            if !c.grid.is_masked(idx) {
                oracle += (4.0 - 1.0) * v.norm_sqr() * c.grid.cell_weight();
            }
        }
        let r = longitudinal_cancellation_residual(&c, &doubled).unwrap();
        assert!((r - 3.0 * t).abs() <= 1e-12);
        assert!((r - oracle).abs() <= 1e-12);
    }

    #[test]
    fn cancellation_rejects_grid_mismatch() {
        let c = amplitudes();
        let g = Arc::new(WaveVectorGrid::centered([2, 2, 2], [0.5; 3], [0.0; 3]).unwrap());
        let other = ScalarAmplitude::new(g, vec![C64::from(1.0); 8]).unwrap();
        assert!(matches!(longitudinal_cancellation_residual(&c, &other), Err(Error::GridMismatch)));
    }
}

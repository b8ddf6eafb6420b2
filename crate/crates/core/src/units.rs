//! Natural units (`ħ = c = ε₀ = 1`) and SI scale factors applied at export.
//!
//! One natural length unit `ℓ` (metres) fixes everything else: time `ℓ/c`,
//! energy `ħc/ℓ`, momentum `ħ/ℓ`.

use crate::densities::DensityKind;
use crate::error::{Error, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const C: f64 = 299_792_458.0;
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dimension {
    Dimensionless,
    Length,
    Time,
    Speed,
    Wavevector,
    Energy,
    Momentum,
    AngularMomentum,
    NumberDensity,
    CurrentDensity,
    EnergyDensity,
    MomentumDensity,
    AngularMomentumDensity,
}

impl Dimension {
    pub fn of_density(kind: DensityKind) -> Self {
        match kind {
            DensityKind::Number | DensityKind::LpNumber => Dimension::NumberDensity,
            DensityKind::Current => Dimension::CurrentDensity,
            DensityKind::Energy | DensityKind::BbEnergy => Dimension::EnergyDensity,
            DensityKind::Momentum | DensityKind::FourMomentum => Dimension::MomentumDensity,
            DensityKind::AngularMomentum
            | DensityKind::OrbitalAngularMomentum
            | DensityKind::SpinAngularMomentum
            | DensityKind::Helicity => Dimension::AngularMomentumDensity,
        }
    }

    fn si(self, l: f64) -> (f64, &'static str) {
        match self {
            Dimension::Dimensionless => (1.0, "1"),
            Dimension::Length => (l, "m"),
            Dimension::Time => (l / C, "s"),
            Dimension::Speed => (C, "m/s"),
            Dimension::Wavevector => (1.0 / l, "1/m"),
            Dimension::Energy => (HBAR * C / l, "J"),
            Dimension::Momentum => (HBAR / l, "kg*m/s"),
            Dimension::AngularMomentum => (HBAR, "J*s"),
            Dimension::NumberDensity => (1.0 / l.powi(3), "1/m^3"),
            Dimension::CurrentDensity => (C / l.powi(3), "1/(m^2*s)"),
            Dimension::EnergyDensity => (HBAR * C / l.powi(4), "J/m^3"),
            Dimension::MomentumDensity => (HBAR / l.powi(4), "kg/(m^2*s)"),
            Dimension::AngularMomentumDensity => (HBAR / l.powi(3), "J*s/m^3"),
        }
    }

    fn natural(self) -> &'static str {
        match self {
            Dimension::Dimensionless => "1",
            Dimension::Length => "l",
            Dimension::Time => "l/c",
            Dimension::Speed => "c",
            Dimension::Wavevector => "1/l",
            Dimension::Energy => "hbar*c/l",
            Dimension::Momentum => "hbar/l",
            Dimension::AngularMomentum => "hbar",
            Dimension::NumberDensity => "1/l^3",
            Dimension::CurrentDensity => "c/l^3",
            Dimension::EnergyDensity => "hbar*c/l^4",
            Dimension::MomentumDensity => "hbar/l^4",
            Dimension::AngularMomentumDensity => "hbar/l^3",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum UnitSystem {
    #[default]
    Natural,
    /// SI output with the natural length unit equal to `length_m` metres.
    Si { length_m: f64 },
}

impl UnitSystem {
    pub fn si(length_m: f64) -> Result<Self> {
        if !(length_m > 0.0) || !length_m.is_finite() {
            return Err(Error::InvalidArgument(format!("length unit must be positive, got {length_m}")));
        }
        Ok(UnitSystem::Si { length_m })
    }

    /// Factor converting a natural-unit value of `dim` into this system.
    pub fn scale(&self, dim: Dimension) -> f64 {
        match self {
            UnitSystem::Natural => 1.0,
            UnitSystem::Si { length_m } => dim.si(*length_m).0,
        }
    }

    pub fn label(&self, dim: Dimension) -> &'static str {
        match self {
            UnitSystem::Natural => dim.natural(),
            UnitSystem::Si { length_m } => dim.si(*length_m).1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            UnitSystem::Natural => "natural",
            UnitSystem::Si { .. } => "si",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn natural_is_identity() {
        assert_eq!(UnitSystem::Natural.scale(Dimension::EnergyDensity), 1.0);
        assert_eq!(UnitSystem::Natural.label(Dimension::Time), "l/c");
    }

    #[test]
    fn si_factors() {
        let u = UnitSystem::si(1e-6).unwrap();
        // A photon with k = 1/ℓ at ℓ = 1 µm carries ħc/1µm of energy.
        assert!((u.scale(Dimension::Energy) - HBAR * C / 1e-6).abs() <= 1e-12 * HBAR * C / 1e-6);
        assert!((u.scale(Dimension::Time) * C - 1e-6).abs() <= 1e-20);
        assert_eq!(u.scale(Dimension::Speed), C);
        assert!(UnitSystem::si(0.0).is_err());
    }
}

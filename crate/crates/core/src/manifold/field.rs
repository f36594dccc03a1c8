use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EigenIndex, Manifold, Mode};
use crate::error::{Error, Result};

/// Finite combination of basis eigenfunctions.
///
/// Coefficients are kept in canonical mode order so every sum over them is
/// reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "FieldRepr", try_from = "FieldRepr")]
pub struct SpectralField {
    manifold: Manifold,
    coeffs: BTreeMap<Mode, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct CoefficientRepr {
    index: Mode,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRepr {
    manifold: Manifold,
    coefficients: Vec<CoefficientRepr>,
}

impl From<SpectralField> for FieldRepr {
    fn from(f: SpectralField) -> Self {
        FieldRepr {
            manifold: f.manifold,
            coefficients: f
                .coeffs
                .into_iter()
                .map(|(index, c)| CoefficientRepr { index, re: c.re, im: c.im })
                .collect(),
        }
    }
}

impl TryFrom<FieldRepr> for SpectralField {
    type Error = Error;

    fn try_from(r: FieldRepr) -> Result<Self> {
        SpectralField::from_modes(
            r.manifold,
            r.coefficients.into_iter().map(|c| (c.index, Complex64::new(c.re, c.im))),
        )
    }
}

impl SpectralField {
    pub fn zero(manifold: Manifold) -> Self {
        SpectralField { manifold, coeffs: BTreeMap::new() }
    }

    /// Builds a field, rejecting indices that are not basis modes of `manifold`.
    /// Repeated indices accumulate.
    pub fn from_modes(
        manifold: Manifold,
        modes: impl IntoIterator<Item = (Mode, Complex64)>,
    ) -> Result<Self> {
        manifold.validate()?;
        let mut field = SpectralField::zero(manifold);
        for (mode, c) in modes {
            field.add_to(mode, c)?;
        }
        Ok(field)
    }

    pub fn single(manifold: Manifold, mode: Mode) -> Result<Self> {
        SpectralField::from_modes(manifold, [(mode, Complex64::new(1.0, 0.0))])
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    pub fn add_to(&mut self, mode: Mode, c: Complex64) -> Result<()> {
        self.manifold.validate_mode(mode)?;
        *self.coeffs.entry(mode).or_default() += c;
        Ok(())
    }

    pub fn set(&mut self, mode: Mode, c: Complex64) -> Result<()> {
        self.manifold.validate_mode(mode)?;
        self.coeffs.insert(mode, c);
        Ok(())
    }

    pub fn get(&self, mode: Mode) -> Complex64 {
        self.coeffs.get(&mode).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest mode degree present, 0 for the empty field.
    pub fn max_degree(&self) -> u32 {
        self.coeffs.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Coefficient `l^2` norm, equal to the `L^2` norm of the function.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> SpectralField {
        self.map(|_, c| c * s)
    }

    /// Applies `f(mode, coefficient)` to every stored coefficient.
    pub fn map(&self, f: impl Fn(Mode, Complex64) -> Complex64) -> SpectralField {
        SpectralField {
            manifold: self.manifold,
            coeffs: self.coeffs.iter().map(|(&m, &c)| (m, f(m, c))).collect(),
        }
    }

    /// Keeps the coefficients whose mode satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(Mode) -> bool) -> SpectralField {
        SpectralField {
            manifold: self.manifold,
            coeffs: self.coeffs.iter().filter(|(&m, _)| keep(m)).map(|(&m, &c)| (m, c)).collect(),
        }
    }

    fn check_same(&self, other: &SpectralField) -> Result<()> {
        if self.manifold != other.manifold {
            return Err(Error::Mismatch(format!(
                "fields on {:?} and {:?}",
                self.manifold, other.manifold
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (&m, &c) in &other.coeffs {
            *out.coeffs.entry(m).or_default() += c;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `<self, other>` in `L^2`, antilinear in `other`.
    pub fn inner(&self, other: &SpectralField) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(self
            .coeffs
            .iter()
            .map(|(m, c)| c * other.get(*m).conj())
            .sum())
    }

    pub fn eigenvalue_of(&self, mode: Mode) -> f64 {
        self.manifold.mode_eigenvalue(mode).unwrap_or(f64::NAN)
    }

    /// Splits the field into its eigenspace components `P_k u`.
    pub fn eigen_components(&self) -> BTreeMap<EigenIndex, SpectralField> {
        let mut out: BTreeMap<EigenIndex, SpectralField> = BTreeMap::new();
        for (&m, &c) in &self.coeffs {
            let idx = self.manifold.eigen_index(m).expect("stored modes are valid");
            out.entry(idx)
                .or_insert_with(|| SpectralField::zero(self.manifold))
                .coeffs
                .insert(m, c);
        }
        out
    }

    /// Distinct azimuthal signatures present.
    pub fn signatures(&self) -> Vec<[i32; 2]> {
        let mut sigs: Vec<[i32; 2]> = self.coeffs.keys().map(|m| m.signature()).collect();
        sigs.sort();
        sigs.dedup();
        sigs
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_roundtrip() {
        let f = SpectralField::from_modes(
            Manifold::S3,
            [
                (Mode::S3 { p: 2, m1: 1, m2: -1 }, Complex64::new(0.5, -0.25)),
                (Mode::S3 { p: 0, m1: 0, m2: 0 }, Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains(r#""index":{"kind":"s3","p":0,"m1":0,"m2":0}"#));
        let back: SpectralField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn invalid_index_rejected() {
        let bad = r#"{"manifold":{"kind":"s3"},"coefficients":[{"index":{"kind":"s3","p":1,"m1":0,"m2":0},"re":1.0,"im":0.0}]}"#;
        assert!(serde_json::from_str::<SpectralField>(bad).is_err());
        assert!(SpectralField::single(Manifold::S3, Mode::S2 { n: 0, m: 0 }).is_err());
    }

    #[test]
    fn arithmetic_and_inner_product() {
        let m = Manifold::Zonal { dim: 3 };
        let a = SpectralField::from_modes(m, [(Mode::Zonal { p: 1 }, Complex64::new(3.0, 0.0))]).unwrap();
        let b = SpectralField::from_modes(m, [(Mode::Zonal { p: 2 }, Complex64::new(0.0, 4.0))]).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.l2_norm(), 5.0);
        assert_eq!(s.inner(&a).unwrap(), Complex64::new(9.0, 0.0));
        assert_eq!(s.sub(&b).unwrap().get(Mode::Zonal { p: 2 }), Complex64::new(0.0, 0.0));
        let other = SpectralField::zero(Manifold::S3);
        assert!(matches!(a.add(&other), Err(Error::Mismatch(_))));
    }
}

//! Small helpers for vectors in ℂⁿ.
//!
//! Points and tangent vectors are plain `Vec<Complex64>`; on the wire every
//! complex number is an `[re, im]` pair.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type CVec = Vec<Complex64>;

pub fn norm_sqr(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

pub fn norm(z: &[Complex64]) -> f64 {
    norm_sqr(z).sqrt()
}

/// Hermitian inner product ⟨z, w⟩ = Σ z_j · conj(w_j).
pub fn inner(z: &[Complex64], w: &[Complex64]) -> Complex64 {
    z.iter().zip(w).map(|(a, b)| a * b.conj()).sum()
}

pub fn sub(z: &[Complex64], w: &[Complex64]) -> CVec {
    z.iter().zip(w).map(|(a, b)| a - b).collect()
}

pub fn add(z: &[Complex64], w: &[Complex64]) -> CVec {
    z.iter().zip(w).map(|(a, b)| a + b).collect()
}

pub fn scale(z: &[Complex64], c: f64) -> CVec {
    z.iter().map(|a| a * c).collect()
}

/// `z + c·(w − z)`.
pub fn lerp(z: &[Complex64], w: &[Complex64], c: f64) -> CVec {
    z.iter().zip(w).map(|(a, b)| a + (b - a) * c).collect()
}

pub fn dist(z: &[Complex64], w: &[Complex64]) -> f64 {
    z.iter()
        .zip(w)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Flatten to real coordinates `(re₀, im₀, re₁, im₁, …)`.
pub fn to_real(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

pub fn from_real(x: &[f64]) -> CVec {
    x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Serde adapter for `Vec<Complex64>` as a list of `[re, im]` pairs.
pub mod pairs {
    use super::*;

    pub fn serialize<S: Serializer>(z: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 2]> = z.iter().map(|c| [c.re, c.im]).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// Serde adapter for a list of points.
pub mod pair_lists {
    use super::*;

    pub fn serialize<S: Serializer>(pts: &[CVec], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<Vec<[f64; 2]>> = pts
            .iter()
            .map(|z| z.iter().map(|c| [c.re, c.im]).collect())
            .collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CVec>, D::Error> {
        let raw = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|z| z.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect())
    }
}

//! Sine test vectors, their tensor powers, and the closed-form spectral
//! constants attached to them.
//!
//! The base profile is `x_j = sin(pi j / m)` for cycle labels `j = 1..=m`.
//! Label `j` is stored at residue `j mod m`, so the single zero entry
//! (label `m`) sits at residue 0.

use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::torus_graph::TorusGraphSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct SineProfile {
    m: usize,
    values: Vec<f64>,
}

impl SineProfile {
    pub fn new(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidM(m));
        }
        // Fold r and m - r onto the same argument so mirrored entries are
        // bit-identical.
        let values = (0..m)
            .map(|r| {
                if r == 0 {
                    0.0
                } else {
                    (PI * r.min(m - r) as f64 / m as f64).sin()
                }
            })
            .collect();
        Ok(SineProfile { m, values })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Value at residue `r`.
    pub fn at_residue(&self, r: usize) -> f64 {
        self.values[r % self.m]
    }

    pub fn by_residue(&self) -> &[f64] {
        &self.values
    }

    /// Values in label order `1, 2, ..., m`; the last entry is zero.
    pub fn by_label(&self) -> Vec<f64> {
        (1..=self.m).map(|j| self.at_residue(j)).collect()
    }
}

pub fn sine_profile(m: usize) -> Result<SineProfile> {
    SineProfile::new(m)
}

/// `v -> prod_s x(v_s)` over the m^d torus vertices.
#[derive(Debug, Clone)]
pub struct TensorProfile {
    base: SineProfile,
    d: usize,
    squares: OnceLock<Vec<f64>>,
}

impl TensorProfile {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        Ok(TensorProfile {
            base: SineProfile::new(m)?,
            d,
            squares: OnceLock::new(),
        })
    }

    pub fn for_spec(spec: &TorusGraphSpec) -> Self {
        TensorProfile::new(spec.m(), spec.d()).expect("spec parameters are validated")
    }

    pub fn base(&self) -> &SineProfile {
        &self.base
    }

    pub fn m(&self) -> usize {
        self.base.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn value_at(&self, coords: &[usize]) -> f64 {
        coords.iter().map(|&c| self.base.at_residue(c)).product()
    }

    pub fn value_at_index(&self, mut index: usize) -> f64 {
        let m = self.base.m;
        let mut value = 1.0;
        for _ in 0..self.d {
            value *= self.base.values[index % m];
            index /= m;
        }
        value
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.m().pow(self.d as u32);
        (0..n).map(|i| self.value_at_index(i)).collect()
    }

    /// Squared values by linear index, computed once.
    pub fn squared_values(&self) -> &[f64] {
        self.squares.get_or_init(|| {
            let n = self.m().pow(self.d as u32);
            (0..n)
                .map(|i| {
                    let x = self.value_at_index(i);
                    x * x
                })
                .collect()
        })
    }

    fn matches(&self, spec: &TorusGraphSpec) -> Result<()> {
        if self.m() != spec.m() || self.d != spec.d() {
            return Err(Error::InvalidParameter(format!(
                "profile for (m={}, d={}) used on graph (m={}, d={})",
                self.m(),
                self.d,
                spec.m(),
                spec.d()
            )));
        }
        Ok(())
    }
}

/// `||A' x - 2cos(pi/m) x||_inf`, where `A'` is the C_m adjacency matrix with
/// the row and column of label `m` zeroed.
pub fn check_path_eigen(m: usize) -> Result<f64> {
    let x = SineProfile::new(m)?.by_label();
    let lambda = 2.0 * (PI / m as f64).cos();
    // labels 1..=m at positions 0..m; the last position is label m
    let last = m - 1;
    let mut residual: f64 = 0.0;
    for i in 0..m {
        let mut row = 0.0;
        if i != last {
            for j in [(i + 1) % m, (i + m - 1) % m] {
                if j != last {
                    row += x[j];
                }
            }
        }
        residual = residual.max((row - lambda * x[i]).abs());
    }
    Ok(residual)
}

/// `sum_{uv in E} (f(u) - f(v))^2 / sum_v f(v)^2` over an arbitrary vertex function.
pub fn rayleigh_quotient_of(spec: &TorusGraphSpec, f: &[f64]) -> Result<f64> {
    if f.len() != spec.vertex_count() {
        return Err(Error::InvalidParameter(format!(
            "vertex function has {} entries, graph has {} vertices",
            f.len(),
            spec.vertex_count()
        )));
    }
    let norm: f64 = f.iter().map(|x| x * x).sum();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut energy = 0.0;
    spec.for_each_edge(|u, v| {
        let diff = f[u] - f[v];
        energy += diff * diff;
    });
    Ok(energy / norm)
}

pub fn rayleigh_quotient(spec: &TorusGraphSpec, profile: &TensorProfile) -> Result<f64> {
    profile.matches(spec)?;
    rayleigh_quotient_of(spec, &profile.values())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralConstants {
    pub m: usize,
    pub d: usize,
    /// Eigenvalue `2cos(pi/m)` of the Dirichlet path matrix.
    pub lambda: f64,
    /// `(1 + lambda)^d - 1`, the AND-power eigenvalue of the tensor profile.
    pub tensor_eigenvalue: f64,
    /// `sqrt(2 (3^d - 1) rayleigh_inf)`.
    pub mu: f64,
    /// `3^d - (1 + 2cos(pi/m))^d`.
    pub rayleigh_inf: f64,
    /// `4 d sin^2(pi / 2m)`.
    pub rayleigh_one: f64,
    /// `2 mu / (3^d - 1)`, the guaranteed edge-spine fraction.
    pub edge_fraction: f64,
}

impl SpectralConstants {
    pub fn new(m: usize, d: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidM(m));
        }
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        let (mf, df) = (m as f64, d as f64);
        let lambda = 2.0 * (PI / mf).cos();
        let half = (PI / (2.0 * mf)).sin();
        let three_d = 3f64.powi(d as i32);
        // 3^d - (1 + lambda)^d = -3^d * expm1(d * ln(1 - 4 sin^2(pi/2m) / 3)),
        // which avoids cancelling two nearly equal powers.
        let rayleigh_inf = -three_d * (df * (-4.0 * half * half / 3.0).ln_1p()).exp_m1();
        let tensor_eigenvalue = three_d - 1.0 - rayleigh_inf;
        let mu = (2.0 * (three_d - 1.0) * rayleigh_inf).sqrt();
        Ok(SpectralConstants {
            m,
            d,
            lambda,
            tensor_eigenvalue,
            mu,
            rayleigh_inf,
            rayleigh_one: 4.0 * df * half * half,
            edge_fraction: 2.0 * mu / (three_d - 1.0),
        })
    }

    /// Sum-power edge analogue of `mu`: `sqrt(2 * 2d * rayleigh_one)`.
    pub fn mu_sum_power(&self) -> f64 {
        (4.0 * self.d as f64 * self.rayleigh_one).sqrt()
    }
}

pub fn constants(m: usize, d: usize) -> Result<SpectralConstants> {
    SpectralConstants::new(m, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus_graph::Power;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sine_profile_values() {
        let p = sine_profile(4).unwrap().by_label();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(p[0], h, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], h, epsilon = 1e-15);
        assert_eq!(p[3], 0.0);
        let p3 = sine_profile(3).unwrap().by_label();
        assert_abs_diff_eq!(p3[0], 0.866_025_403_784_438_6, epsilon = 1e-15);
        assert_abs_diff_eq!(p3[1], 0.866_025_403_784_438_6, epsilon = 1e-15);
        assert_eq!(p3[2], 0.0);
        assert_eq!(sine_profile(2), Err(Error::InvalidM(2)));
    }

    #[test]
    fn sine_profile_shape() {
        for m in 3..40 {
            let p = sine_profile(m).unwrap();
            let v = p.by_residue();
            assert_eq!(v.iter().filter(|&&x| x == 0.0).count(), 1);
            assert!(v[1..].iter().all(|&x| x > 0.0));
            for j in 1..m {
                assert_eq!(v[j], v[m - j]);
            }
        }
    }

    #[test]
    fn path_eigenvector_residuals() {
        for m in [3, 4, 50] {
            assert!(check_path_eigen(m).unwrap() < 1e-12, "m = {m}");
        }
        assert_abs_diff_eq!(
            2.0 * (PI / 4.0).cos(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rayleigh_examples() {
        let inf = TorusGraphSpec::new(4, 1, Power::Inf).unwrap();
        let r = rayleigh_quotient(&inf, &TensorProfile::for_spec(&inf)).unwrap();
        assert_abs_diff_eq!(r, 3.0 - (1.0 + 2f64.sqrt()), epsilon = 1e-12);
        let one = TorusGraphSpec::new(4, 2, Power::One).unwrap();
        let r = rayleigh_quotient(&one, &TensorProfile::for_spec(&one)).unwrap();
        assert_abs_diff_eq!(r, 8.0 * (PI / 8.0).sin().powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(r, 1.171_572_875_253_81, epsilon = 1e-12);
    }

    #[test]
    fn rayleigh_of_constant_and_zero() {
        let spec = TorusGraphSpec::new(5, 2, Power::Inf).unwrap();
        let ones = vec![1.5; 25];
        assert_eq!(rayleigh_quotient_of(&spec, &ones).unwrap(), 0.0);
        assert_eq!(
            rayleigh_quotient_of(&spec, &[0.0; 25]),
            Err(Error::ZeroVector)
        );
        assert!(rayleigh_quotient_of(&spec, &[1.0; 3]).is_err());
        let other = TensorProfile::new(6, 2).unwrap();
        assert!(rayleigh_quotient(&spec, &other).is_err());
    }

    #[test]
    fn constants_examples() {
        let c = constants(4, 1).unwrap();
        assert_abs_diff_eq!(c.mu, 2.0 * (2.0 - 2f64.sqrt()).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.mu, 1.530_733_729_460_359, epsilon = 1e-12);
        let c = constants(16, 2).unwrap();
        // sqrt(2 * 8 * (9 - (1 + 2cos(pi/16))^2)), evaluated independently
        assert_abs_diff_eq!(c.mu, 1.914_574_891_152_62, epsilon = 5e-6);
        assert_abs_diff_eq!(c.edge_fraction, 0.47864, epsilon = 5e-6);
    }

    #[test]
    fn constants_identities() {
        for m in 3..30 {
            for d in 1..8 {
                let c = constants(m, d).unwrap();
                let three_d = 3f64.powi(d as i32);
                let naive = three_d - (1.0 + 2.0 * (PI / m as f64).cos()).powi(d as i32);
                assert_abs_diff_eq!(c.rayleigh_inf, naive, epsilon = 1e-12 * three_d);
                assert_abs_diff_eq!(
                    c.mu * c.mu,
                    2.0 * (three_d - 1.0) * c.rayleigh_inf,
                    epsilon = 1e-12 * three_d * three_d
                );
                let df = d as f64;
                assert_abs_diff_eq!(
                    c.rayleigh_one,
                    2.0 * df - 2.0 * df * (PI / m as f64).cos(),
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(
                    c.tensor_eigenvalue,
                    (1.0 + c.lambda).powi(d as i32) - 1.0,
                    epsilon = 1e-11 * three_d
                );
            }
        }
    }

    #[test]
    fn edge_fraction_matches_large_m_asymptotic() {
        for d in [4usize, 9, 16] {
            let c = constants(256, d).unwrap();
            let asym = (8.0f64 / 3.0).sqrt() * PI * (d as f64).sqrt() / 256.0;
            assert!(
                c.edge_fraction <= 1.05 * asym,
                "d = {d}: {} vs {asym}",
                c.edge_fraction
            );
        }
    }

    #[test]
    fn tensor_profile_zero_set() {
        let p = TensorProfile::new(4, 3).unwrap();
        let vals = p.values();
        let zeros = vals.iter().filter(|&&x| x == 0.0).count();
        assert_eq!(zeros, 64 - 27);
        assert!(vals.iter().all(|&x| x >= 0.0));
        assert_eq!(p.squared_values().len(), 64);
        assert_eq!(p.value_at(&[1, 2, 3]), p.value_at_index(1 + 2 * 4 + 3 * 16));
    }
}

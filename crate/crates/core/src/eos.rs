//! Pressure law `p = kappa * rho^gamma`, the pressure potential `H`, and the
//! sigma-smoothed pair `(H_sigma, p_sigma)` with certified error constants.
//!
//! For `gamma >= 2` the potential is already C2 on bounded density ranges,
//! so the smoothed pair coincides with the exact one. For `1 < gamma < 2`
//! the second derivative blows up at vacuum; below the crossover density
//! `z0 = sigma^(1/(gamma-1))` the potential is replaced by the matching
//! quadratic, which is the minimal C2 modification with computable
//! constants. All sup bounds are taken over `[0, rho_max]`: on `[0, inf)`
//! they cannot hold for `gamma > 2`, and every field handled here is
//! bounded anyway.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pressure-law parameters. `rho_max` is the working density bound every
/// consumer asserts its data against; the smoothed-EOS constants are
/// certified on `[0, rho_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosParams {
    pub kappa: f64,
    pub gamma: f64,
    pub rho_max: f64,
}

impl EosParams {
    pub fn new(kappa: f64, gamma: f64, rho_max: f64) -> Result<Self> {
        if !(kappa > 0.0) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                message: format!("must be positive, got {kappa}"),
            });
        }
        if !(gamma > 1.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                message: format!("must exceed 1, got {gamma}"),
            });
        }
        if !(rho_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rho_max",
                message: format!("must be positive, got {rho_max}"),
            });
        }
        Ok(EosParams {
            kappa,
            gamma,
            rho_max,
        })
    }

    /// Sound speed `sqrt(p'(rho))`.
    pub fn sound_speed(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            0.0
        } else {
            (self.kappa * self.gamma * rho.powf(self.gamma - 1.0)).sqrt()
        }
    }
}

fn check_density(rho: f64) -> Result<()> {
    if rho < 0.0 {
        return Err(Error::NegativeDensity {
            cell: 0,
            value: rho,
        });
    }
    Ok(())
}

#[inline]
fn p_exact(params: &EosParams, rho: f64) -> f64 {
    params.kappa * rho.powf(params.gamma)
}

#[inline]
fn h_exact(params: &EosParams, rho: f64) -> f64 {
    params.kappa / (params.gamma - 1.0) * rho.powf(params.gamma)
}

/// `p(rho) = kappa * rho^gamma`.
pub fn pressure(params: &EosParams, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(p_exact(params, rho))
}

/// Pressure potential `H(rho) = kappa/(gamma-1) * rho^gamma`. Satisfies
/// `rho*H'(rho) - H(rho) = p(rho)` identically.
pub fn pressure_potential(params: &EosParams, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(h_exact(params, rho))
}

/// `H'(rho) = kappa*gamma/(gamma-1) * rho^(gamma-1)`.
pub fn dh(params: &EosParams, rho: f64) -> f64 {
    params.kappa * params.gamma / (params.gamma - 1.0) * rho.powf(params.gamma - 1.0)
}

/// `H''(rho) = kappa*gamma * rho^(gamma-2) = p'(rho)/rho` for `rho > 0`.
pub fn d2h(params: &EosParams, rho: f64) -> f64 {
    params.kappa * params.gamma * rho.powf(params.gamma - 2.0)
}

/// `p'(rho) = kappa*gamma * rho^(gamma-1)`.
pub fn dp(params: &EosParams, rho: f64) -> f64 {
    params.kappa * params.gamma * rho.powf(params.gamma - 1.0)
}

/// Exponent of sigma in the second-derivative bound: `(gamma-2)/(min(gamma,2)-1)`.
pub fn d2h_sigma_exponent(gamma: f64) -> f64 {
    (gamma - 2.0) / (gamma.min(2.0) - 1.0)
}

/// The sigma-smoothed pair with its certified constants. The stored
/// constants `a1`, `a2`, `b` are dense-sampled sups over `[0, rho_max]`
/// normalized by the corresponding sigma power, so the certified bounds
/// hold on that interval by construction and are re-checkable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmoothedEos {
    pub base: EosParams,
    pub sigma: f64,
    /// sup(|H - H_s| + |H' - H_s'|) <= a1 * sigma
    pub a1: f64,
    /// sup|H_s''| <= a2 * sigma^((gamma-2)/(min(gamma,2)-1))
    pub a2: f64,
    /// sup(|p - p_s| + |p' - p_s'|) <= b * sigma
    pub b: f64,
    /// Crossover density: below it the quadratic replacement is active.
    /// Zero when the exact pair is used (`gamma >= 2`).
    pub z0: f64,
}

impl SmoothedEos {
    pub fn h_sigma(&self, z: f64) -> f64 {
        let p = &self.base;
        if z >= self.z0 {
            h_exact(p, z)
        } else {
            let z0 = self.z0;
            let h0 = h_exact(p, z0);
            let dh0 = dh(p, z0);
            let d2h0 = d2h(p, z0);
            h0 + dh0 * (z - z0) + 0.5 * d2h0 * (z - z0) * (z - z0)
        }
    }

    pub fn dh_sigma(&self, z: f64) -> f64 {
        let p = &self.base;
        if z >= self.z0 {
            dh(p, z)
        } else {
            dh(p, self.z0) + d2h(p, self.z0) * (z - self.z0)
        }
    }

    pub fn d2h_sigma(&self, z: f64) -> f64 {
        let p = &self.base;
        if z >= self.z0 {
            d2h(p, z)
        } else {
            d2h(p, self.z0)
        }
    }

    /// `p_sigma`, reconstructed below the crossover from
    /// `p_s(z) = p(z0) - int_z^z0 s * H_s''(s) ds` so that
    /// `p_s'(z) = z * H_s''(z)` holds for all `z >= 0`.
    pub fn p_sigma(&self, z: f64) -> f64 {
        let p = &self.base;
        if z >= self.z0 {
            p_exact(p, z)
        } else {
            let z0 = self.z0;
            let p0 = p_exact(p, z0);
            p0 - 0.5 * d2h(p, z0) * (z0 * z0 - z * z)
        }
    }

    pub fn dp_sigma(&self, z: f64) -> f64 {
        // above the crossover this is kappa*gamma*z^(gamma-1) = z*H''(z);
        // the closed form keeps the exact branch bit-identical to dp
        if z >= self.z0 {
            dp(&self.base, z)
        } else {
            z * self.d2h_sigma(z)
        }
    }
}

/// Builds the smoothed pair and certifies its constants by dense sampling.
pub fn build_smoothed(params: &EosParams, sigma: f64) -> Result<SmoothedEos> {
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            message: format!("must lie in (0, 1], got {sigma}"),
        });
    }
    let gamma = params.gamma;
    let z0 = if gamma < 2.0 {
        sigma.powf(1.0 / (gamma - 1.0))
    } else {
        0.0
    };
    let mut eos = SmoothedEos {
        base: *params,
        sigma,
        a1: 0.0,
        a2: 0.0,
        b: 0.0,
        z0,
    };
    let samples = sample_grid(params.rho_max, z0);
    let mut sup_h = 0.0f64;
    let mut sup_d2 = 0.0f64;
    let mut sup_p = 0.0f64;
    for &z in &samples {
        let eh = (pressure_potential(params, z)? - eos.h_sigma(z)).abs()
            + (dh(params, z) - eos.dh_sigma(z)).abs();
        let ep = (pressure(params, z)? - eos.p_sigma(z)).abs()
            + (dp(params, z) - eos.dp_sigma(z)).abs();
        sup_h = sup_h.max(eh);
        sup_p = sup_p.max(ep);
        sup_d2 = sup_d2.max(eos.d2h_sigma(z).abs());
    }
    eos.a1 = sup_h / sigma;
    eos.b = sup_p / sigma;
    eos.a2 = sup_d2 / sigma.powf(d2h_sigma_exponent(gamma));
    Ok(eos)
}

/// Sample grid for the sup bounds: 10^4 uniform points over `[0, rho_max]`
/// plus a refinement below the crossover (the crossover can sit far below
/// the uniform spacing).
fn sample_grid(rho_max: f64, z0: f64) -> Vec<f64> {
    let n = 10_000;
    let mut zs: Vec<f64> = (0..=n).map(|i| rho_max * i as f64 / n as f64).collect();
    if z0 > 0.0 {
        let m = 512;
        let top = z0.min(rho_max);
        zs.extend((0..=m).map(|i| top * i as f64 / m as f64));
        zs.push(z0.min(rho_max));
    }
    zs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{central_diff, loglog_slope};

    fn params(kappa: f64, gamma: f64) -> EosParams {
        EosParams::new(kappa, gamma, 4.0).unwrap()
    }

    #[test]
    fn pressure_values() {
        let p = params(1.0, 2.0);
        assert_eq!(pressure(&p, 2.0).unwrap(), 4.0);
        assert_eq!(pressure(&p, 0.0).unwrap(), 0.0);
        let p14 = params(1.0, 1.4);
        assert!((pressure(&p14, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(pressure(&p, -1.0).is_err());
    }

    #[test]
    fn potential_values_and_identity() {
        let p = params(1.0, 2.0);
        assert_eq!(pressure_potential(&p, 1.0).unwrap(), 1.0);
        let p3 = params(1.0, 3.0);
        assert_eq!(pressure_potential(&p3, 2.0).unwrap(), 4.0);
        // rho*H' - H = p at several densities
        for gamma in [1.4, 2.0, 3.0] {
            let pp = params(0.7, gamma);
            for rho in [0.5, 1.0, 3.0] {
                let lhs = rho * dh(&pp, rho) - pressure_potential(&pp, rho).unwrap();
                let rhs = pressure(&pp, rho).unwrap();
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs));
            }
        }
        assert!(pressure_potential(&p, -0.5).is_err());
    }

    #[test]
    fn d2h_matches_finite_difference() {
        // H'' = kappa*gamma*z^(gamma-2) = p'(z)/z at smooth points
        for gamma in [1.5, 2.0, 2.7] {
            let p = params(1.3, gamma);
            for z in [0.3, 1.0, 2.5] {
                let fd = central_diff(|s| dh(&p, s), z, 1e-5);
                assert!(
                    (fd - d2h(&p, z)).abs() <= 1e-6 * d2h(&p, z).abs(),
                    "gamma={gamma} z={z}"
                );
                assert!((d2h(&p, z) - dp(&p, z) / z).abs() < 1e-12 * d2h(&p, z).abs());
            }
        }
    }

    #[test]
    fn gamma_at_least_two_is_exact() {
        // black_box keeps the compiler from const-folding one call site's
        // powf and not the other's
        use std::hint::black_box;
        for gamma in [2.0, 2.5, 3.0] {
            let p = params(1.0, gamma);
            let s = build_smoothed(&p, 0.01).unwrap();
            assert_eq!(s.a1, 0.0);
            assert_eq!(s.b, 0.0);
            assert_eq!(s.z0, 0.0);
            for z in [0.0, 0.1, 1.0, 3.9] {
                let z = black_box(z);
                assert_eq!(s.h_sigma(z), pressure_potential(&p, z).unwrap());
                assert_eq!(s.p_sigma(z), pressure(&p, z).unwrap());
            }
        }
    }

    #[test]
    fn crossover_construction_gamma_1_5() {
        let p = params(1.0, 1.5);
        let sigma = 1e-2;
        let s = build_smoothed(&p, sigma).unwrap();
        // z0 = sigma^(1/(gamma-1)) = sigma^2
        assert!((s.z0 - 1e-4).abs() < 1e-18);
        // H_s'' is the constant kappa*gamma*sigma^((gamma-2)/(gamma-1)) below z0
        let expect = p.kappa * p.gamma * sigma.powf((p.gamma - 2.0) / (p.gamma - 1.0));
        assert!((s.d2h_sigma(0.0) - expect).abs() < 1e-9 * expect);
        assert!((s.d2h_sigma(s.z0) - expect).abs() < 1e-9 * expect);
        // so the second-derivative bound holds with a2 = kappa*gamma
        assert!((s.a2 - p.kappa * p.gamma).abs() < 1e-9 * p.kappa * p.gamma);
    }

    #[test]
    fn sup_error_decays_linearly_in_sigma() {
        let p = params(1.0, 1.5);
        let sigmas: Vec<f64> = (1..=8).map(|k| 2.0f64.powi(-k)).collect();
        let mut sups = Vec::new();
        for &sigma in &sigmas {
            let s = build_smoothed(&p, sigma).unwrap();
            // dense sampling oracle, independent of the stored constant
            let mut sup = 0.0f64;
            for i in 0..=4000 {
                let z = p.rho_max * i as f64 / 4000.0;
                let e = (pressure_potential(&p, z).unwrap() - s.h_sigma(z)).abs()
                    + (dh(&p, z) - s.dh_sigma(z)).abs();
                sup = sup.max(e);
            }
            for i in 0..=400 {
                let z = s.z0 * i as f64 / 400.0;
                let e = (pressure_potential(&p, z).unwrap() - s.h_sigma(z)).abs()
                    + (dh(&p, z) - s.dh_sigma(z)).abs();
                sup = sup.max(e);
            }
            sups.push(sup);
        }
        let slope = loglog_slope(&sigmas, &sups).unwrap();
        assert!(slope >= 0.95, "sup-error slope {slope}");
    }

    #[test]
    fn p_sigma_compatibility_residual() {
        // |p_s'(z) - z*H_s''(z)| <= 1e-8 * (1 + |p_s'|), with p_s' probed by
        // finite differences of p_sigma away from the crossover kink
        let p = params(2.0, 1.6);
        let s = build_smoothed(&p, 0.05).unwrap();
        for i in 1..400 {
            let z = p.rho_max * i as f64 / 400.0;
            if (z - s.z0).abs() < 1e-3 {
                continue;
            }
            let fd = central_diff(|u| s.p_sigma(u), z, 1e-7 * (1.0 + z));
            let exact = z * s.d2h_sigma(z);
            assert!(
                (fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()),
                "z = {z}: fd {fd} vs {exact}"
            );
            // the closed form satisfies the identity to rounding
            assert!((s.dp_sigma(z) - exact).abs() <= 1e-14 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn smoothness_probes_at_crossover() {
        // H_sigma is C2 and p_sigma is C1 across z0
        let p = params(1.0, 1.5);
        let s = build_smoothed(&p, 0.1).unwrap();
        let z0 = s.z0;
        let h = z0 * 1e-4;
        let d2_left = (s.h_sigma(z0) - 2.0 * s.h_sigma(z0 - h) + s.h_sigma(z0 - 2.0 * h)) / (h * h);
        let d2_right =
            (s.h_sigma(z0 + 2.0 * h) - 2.0 * s.h_sigma(z0 + h) + s.h_sigma(z0)) / (h * h);
        assert!((d2_left - d2_right).abs() < 1e-2 * d2_right.abs());
        let dp_left = (s.p_sigma(z0) - s.p_sigma(z0 - h)) / h;
        let dp_right = (s.p_sigma(z0 + h) - s.p_sigma(z0)) / h;
        assert!((dp_left - dp_right).abs() < 1e-2 * (dp_right.abs() + 1e-300));
    }

    #[test]
    fn stored_constants_certify_bounds() {
        for (gamma, sigma) in [(1.5, 0.01), (1.8, 0.2), (2.0, 0.05), (2.5, 0.3)] {
            let p = params(1.2, gamma);
            let s = build_smoothed(&p, sigma).unwrap();
            let exponent = d2h_sigma_exponent(gamma);
            for i in 0..=10_000 {
                let z = p.rho_max * i as f64 / 10_000.0;
                let eh = (pressure_potential(&p, z).unwrap() - s.h_sigma(z)).abs()
                    + (dh(&p, z) - s.dh_sigma(z)).abs();
                let ep = (pressure(&p, z).unwrap() - s.p_sigma(z)).abs()
                    + (dp(&p, z) - s.dp_sigma(z)).abs();
                assert!(eh <= s.a1 * sigma * (1.0 + 1e-12));
                assert!(ep <= s.b * sigma * (1.0 + 1e-12));
                assert!(s.d2h_sigma(z).abs() <= s.a2 * sigma.powf(exponent) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn rejects_bad_sigma() {
        let p = params(1.0, 1.5);
        assert!(build_smoothed(&p, 0.0).is_err());
        assert!(build_smoothed(&p, -0.1).is_err());
        assert!(build_smoothed(&p, 1.5).is_err());
    }
}

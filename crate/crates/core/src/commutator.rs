//! Commutator decay harness: compute `grad(G(f,g)_eps - G(f_eps, g_eps))`,
//! measure its `L^(q/2)` norm on an interior window, and fit the decay rate
//! against the predicted `min(alpha1*(1+eta) - 1, 2*alpha2 - 1)`.
//!
//! The direct commutator evaluates `grad G(f_eps, g_eps)` by the chain rule
//! on kernel-differentiated gradients, so the proof's three-term
//! rearrangement sums to it exactly (the shared products cancel bitwise),
//! and an affine `G` annihilates it to rounding.

use std::sync::Arc;

use serde::Serialize;

use crate::eos::EosParams;
use crate::error::{Error, Result};
use crate::mollify::{convolve, discretize, Deriv, Lattice, MollifierKernel};
use crate::numerics::{central_diff, loglog_slope, pairwise_sum_by};

type BivariateFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A nonlinearity `G(f, g)` with its partial derivatives and the Hoelder
/// exponent of `D_f G` in `f`.
#[derive(Clone)]
pub struct Nonlinearity {
    pub name: String,
    pub eval: BivariateFn,
    pub d_f: BivariateFn,
    pub d_g: BivariateFn,
    pub eta_holder: f64,
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("eta_holder", &self.eta_holder)
            .finish()
    }
}

impl Nonlinearity {
    /// `G = a*f + b*g + c`. Affine: the commutator vanishes identically.
    pub fn affine(a: f64, b: f64, c: f64) -> Self {
        Nonlinearity {
            name: format!("affine({a},{b},{c})"),
            eval: Arc::new(move |f, g| a * f + b * g + c),
            d_f: Arc::new(move |_, _| a),
            d_g: Arc::new(move |_, _| b),
            eta_holder: 1.0,
        }
    }

    /// `G = f * g`. `D_f G = g` is constant in `f`, so eta = 1.
    pub fn product() -> Self {
        Nonlinearity {
            name: "product".into(),
            eval: Arc::new(|f, g| f * g),
            d_f: Arc::new(|_, g| g),
            d_g: Arc::new(|f, _| f),
            eta_holder: 1.0,
        }
    }

    /// The pressure law `G = kappa * f^gamma` (g unused). On bounded sets
    /// `D_f G = kappa*gamma*f^(gamma-1)` is `(gamma-1)`-Hoelder for
    /// `gamma < 2` and Lipschitz for `gamma >= 2`, so
    /// `eta = min(gamma, 2) - 1`.
    pub fn pressure(params: &EosParams) -> Self {
        let (kappa, gamma) = (params.kappa, params.gamma);
        Nonlinearity {
            name: format!("pressure(gamma={gamma})"),
            eval: Arc::new(move |f, _| kappa * f.powf(gamma)),
            d_f: Arc::new(move |f, _| kappa * gamma * f.powf(gamma - 1.0)),
            d_g: Arc::new(|_, _| 0.0),
            eta_holder: gamma.min(2.0) - 1.0,
        }
    }

    /// Checks `d_f`, `d_g` against finite differences of `eval` on a sample
    /// grid over `[0, f_max] x [-g_max, g_max]` (relative tolerance 1e-5).
    pub fn validate_derivatives(&self, f_max: f64, g_max: f64) -> Result<()> {
        let n = 17;
        for i in 0..n {
            // keep away from f = 0 where fractional powers lose smoothness
            let f = f_max * (i as f64 + 1.0) / n as f64;
            for j in 0..n {
                let g = -g_max + 2.0 * g_max * j as f64 / (n - 1) as f64;
                let h = 1e-6 * (1.0 + f.abs().max(g.abs()));
                let fd_f = central_diff(|x| (self.eval)(x, g), f, h.min(f / 2.0));
                let fd_g = central_diff(|x| (self.eval)(f, x), g, h);
                let scale = 1.0 + fd_f.abs().max(fd_g.abs());
                if ((self.d_f)(f, g) - fd_f).abs() > 1e-5 * scale {
                    return Err(Error::InvalidParameter {
                        name: "d_f",
                        message: format!(
                            "{}: d_f({f},{g}) = {} but finite difference gives {fd_f}",
                            self.name,
                            (self.d_f)(f, g)
                        ),
                    });
                }
                if ((self.d_g)(f, g) - fd_g).abs() > 1e-5 * scale {
                    return Err(Error::InvalidParameter {
                        name: "d_g",
                        message: format!(
                            "{}: d_g({f},{g}) = {} but finite difference gives {fd_g}",
                            self.name,
                            (self.d_g)(f, g)
                        ),
                    });
                }
            }
        }
        Ok(())
    }

    /// Sampled Hoelder ratio `sup |D_f G(f1,g) - D_f G(f2,g)| / |f1-f2|^eta`
    /// over `[0, f_max] x [-g_max, g_max]`.
    pub fn sample_holder_constant(&self, f_max: f64, g_max: f64) -> f64 {
        let n = 24;
        let mut sup = 0.0f64;
        for a in 0..=n {
            let f1 = f_max * a as f64 / n as f64;
            for b in 0..a {
                let f2 = f_max * b as f64 / n as f64;
                for c in 0..=4 {
                    let g = -g_max + 2.0 * g_max * c as f64 / 4.0;
                    let num = ((self.d_f)(f1, g) - (self.d_f)(f2, g)).abs();
                    sup = sup.max(num / (f1 - f2).abs().powf(self.eta_holder));
                }
            }
        }
        sup
    }

    /// Sampled modulus of `g -> D_f G(f, g)`: the sup over the sample box of
    /// `|D_f G(f, g1) - D_f G(f, g2)| / |g1 - g2|`. Recorded, not enforced
    /// (no quantitative bound accompanies the smoothness hypothesis).
    pub fn sample_df_g_modulus(&self, f_max: f64, g_max: f64) -> f64 {
        let n = 24;
        let mut sup = 0.0f64;
        for a in 0..=4 {
            let f = f_max * a as f64 / 4.0;
            for b in 0..=n {
                let g1 = -g_max + 2.0 * g_max * b as f64 / n as f64;
                for c in 0..b {
                    let g2 = -g_max + 2.0 * g_max * c as f64 / n as f64;
                    let num = ((self.d_f)(f, g1) - (self.d_f)(f, g2)).abs();
                    sup = sup.max(num / (g1 - g2).abs());
                }
            }
        }
        sup
    }
}

/// The three summands of the rearrangement, plus the directly computed
/// commutator field. All live on the full lattice; norms restrict to the
/// interior window.
#[derive(Debug, Clone)]
pub struct CommutatorParts {
    pub direct: Vec<f64>,
    pub term_i: Vec<f64>,
    pub term_ii: Vec<f64>,
    pub term_iii: Vec<f64>,
}

fn require_nonnegative(f: &Lattice) -> Result<()> {
    for (k, v) in f.data.iter().enumerate() {
        if *v < 0.0 {
            return Err(Error::NegativeDensity {
                cell: k,
                value: *v,
            });
        }
    }
    Ok(())
}

/// Computes `grad(G(f,g)_eps) - grad G(f_eps, g_eps)` together with the
/// rearrangement terms I, II, III.
pub fn commutator_field(
    f: &Lattice,
    g: &Lattice,
    nl: &Nonlinearity,
    kernel: &MollifierKernel,
    eps: f64,
) -> Result<CommutatorParts> {
    require_nonnegative(f)?;
    if f.n_x != g.n_x || f.n_t != g.n_t {
        return Err(Error::GridMismatch("f and g lattices differ".into()));
    }
    let gf = Lattice {
        data: f
            .data
            .iter()
            .zip(&g.data)
            .map(|(a, b)| (nl.eval)(*a, *b))
            .collect(),
        ..f.clone()
    };
    let grad_gf_eps = convolve(&gf, kernel, eps, Deriv::Space)?;
    let f_eps = convolve(f, kernel, eps, Deriv::None)?;
    let g_eps = convolve(g, kernel, eps, Deriv::None)?;
    let grad_f_eps = convolve(f, kernel, eps, Deriv::Space)?;
    let grad_g_eps = convolve(g, kernel, eps, Deriv::Space)?;

    let n = f.data.len();
    let mut direct = vec![0.0; n];
    let mut term_i = vec![0.0; n];
    let mut term_ii = vec![0.0; n];
    let mut term_iii = vec![0.0; n];
    for k in 0..n {
        let df_raw = (nl.d_f)(f.data[k], g.data[k]);
        let dg_raw = (nl.d_g)(f.data[k], g.data[k]);
        let df_mol = (nl.d_f)(f_eps.data[k], g_eps.data[k]);
        let dg_mol = (nl.d_g)(f_eps.data[k], g_eps.data[k]);
        direct[k] = grad_gf_eps.data[k] - (df_mol * grad_f_eps.data[k] + dg_mol * grad_g_eps.data[k]);
        term_i[k] =
            grad_gf_eps.data[k] - df_raw * grad_f_eps.data[k] - dg_raw * grad_g_eps.data[k];
        term_ii[k] = df_raw * grad_f_eps.data[k] - df_mol * grad_f_eps.data[k];
        term_iii[k] = dg_raw * grad_g_eps.data[k] - dg_mol * grad_g_eps.data[k];
    }
    Ok(CommutatorParts {
        direct,
        term_i,
        term_ii,
        term_iii,
    })
}

/// Decay-rate report for the commutator norms over an epsilon sweep.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub eps_sequence: Vec<f64>,
    pub measured_norms: Vec<f64>,
    /// Fitted with the first (pre-asymptotic) epsilon dropped.
    pub fitted_slope: Option<f64>,
    pub predicted_slope: f64,
    pub vacuous: bool,
    pub pass: bool,
}

/// Measures the `L^(q/2)` decay of the commutator over a dyadic epsilon
/// sweep. The window keeps `window_margin` extra cells inside the largest
/// kernel reach. Predicted slope `<= 0` flags the vacuous regime instead of
/// failing.
#[allow(clippy::too_many_arguments)]
pub fn measure_rate(
    f: &Lattice,
    g: &Lattice,
    nl: &Nonlinearity,
    kernel: &MollifierKernel,
    alpha1: f64,
    alpha2: f64,
    q: f64,
    eps_seq: &[f64],
) -> Result<RateReport> {
    if q < 2.0 {
        return Err(Error::InvalidParameter {
            name: "q",
            message: format!("need q >= 2, got {q}"),
        });
    }
    if eps_seq.len() < 4 {
        return Err(Error::InvalidParameter {
            name: "eps_seq",
            message: format!("need at least 4 epsilons, got {}", eps_seq.len()),
        });
    }
    let predicted = (alpha1 * (1.0 + nl.eta_holder) - 1.0).min(2.0 * alpha2 - 1.0);
    let eps_max = eps_seq.iter().cloned().fold(0.0f64, f64::max);
    let dk = discretize(kernel, eps_max, f.dt, f.dx, f.n_t > 1, Deriv::None)?;
    let (_, _, pad_x) = dk.padding();
    let pad = pad_x + 2;
    if 2 * pad >= f.n_x {
        return Err(Error::InvalidParameter {
            name: "eps_seq",
            message: "largest epsilon leaves no interior window".into(),
        });
    }
    let qq = q / 2.0;
    let mut norms = Vec::with_capacity(eps_seq.len());
    for &eps in eps_seq {
        let parts = commutator_field(f, g, nl, kernel, eps)?;
        let nx = f.n_x - 2 * pad;
        let total = pairwise_sum_by(f.n_t * nx, |k| {
            let i = k / nx;
            let j = pad + k % nx;
            parts.direct[i * f.n_x + j].abs().powf(qq)
        });
        let w = f.dx * if f.n_t > 1 { f.dt } else { 1.0 };
        norms.push((total * w).powf(1.0 / qq));
    }
    let vacuous = predicted <= 0.0;
    let fitted = if norms.iter().all(|n| *n < 1e-14) {
        None
    } else {
        let mut order: Vec<usize> = (0..eps_seq.len()).collect();
        order.sort_by(|a, b| eps_seq[*b].partial_cmp(&eps_seq[*a]).unwrap());
        // drop the largest (pre-asymptotic) epsilon
        let xs: Vec<f64> = order[1..].iter().map(|&i| eps_seq[i]).collect();
        let ys: Vec<f64> = order[1..].iter().map(|&i| norms[i]).collect();
        loglog_slope(&xs, &ys)
    };
    let pass = vacuous
        || match fitted {
            Some(s) => s >= predicted - 0.1,
            None => true,
        };
    Ok(RateReport {
        eps_sequence: eps_seq.to_vec(),
        measured_norms: norms,
        fitted_slope: fitted,
        predicted_slope: predicted,
        vacuous,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::max_norm;
    use crate::testfields::{rough_lattice, sample_unit, weierstrass_lattice};

    fn eps_sweep(lo: i32, hi: i32) -> Vec<f64> {
        (lo..=hi).map(|j| 2.0f64.powi(-j)).rev().collect()
    }

    #[test]
    fn affine_annihilation() {
        let f = sample_unit(1024, |x| (3.0 * x).sin().abs());
        let g = sample_unit(1024, |x| x * x);
        let nl = Nonlinearity::affine(2.0, -1.5, 0.3);
        let k = MollifierKernel::bump_space();
        for eps in [0.1, 0.05, 0.025] {
            let parts = commutator_field(&f, &g, &nl, &k, eps).unwrap();
            assert!(max_norm(&parts.direct) <= 1e-12, "eps = {eps}");
        }
    }

    #[test]
    fn rearrangement_identity() {
        let f = rough_lattice(0.8, 1024, 0.5, 1.0);
        let g = rough_lattice(0.8, 1024, -0.5, 1.0);
        let nl = Nonlinearity::product();
        let k = MollifierKernel::bump_space();
        let parts = commutator_field(&f, &g, &nl, &k, 0.05).unwrap();
        for k in 0..parts.direct.len() {
            let sum = parts.term_i[k] + parts.term_ii[k] + parts.term_iii[k];
            assert!((sum - parts.direct[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn product_symmetry_in_labels() {
        let a = rough_lattice(0.7, 512, 0.2, 0.8);
        let b = rough_lattice(0.7, 512, 0.1, 0.9);
        let nl = Nonlinearity::product();
        let k = MollifierKernel::bump_space();
        let ab = commutator_field(&a, &b, &nl, &k, 0.04).unwrap();
        let ba = commutator_field(&b, &a, &nl, &k, 0.04).unwrap();
        for k in 0..ab.direct.len() {
            assert!((ab.direct[k] - ba.direct[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn smooth_product_decays_at_order_one() {
        let f = sample_unit(2048, |x| 1.0 + 0.5 * (4.0 * x).sin());
        let g = sample_unit(2048, |x| (3.0 * x).cos());
        let nl = Nonlinearity::product();
        let k = MollifierKernel::bump_space();
        let r = measure_rate(&f, &g, &nl, &k, 1.0, 1.0, 4.0, &eps_sweep(4, 7)).unwrap();
        assert!(!r.vacuous);
        assert!(r.fitted_slope.unwrap() >= 0.9, "{:?}", r.fitted_slope);
        assert!(r.pass);
    }

    #[test]
    fn rough_product_meets_predicted_rate() {
        // alpha1 = alpha2 = 0.8, eta = 1: predicted min(0.6, 0.6) = 0.6.
        // Mixed lacunary bases keep the two fields' scale structures
        // decorrelated, so the fit sits near the asymptote.
        let f = weierstrass_lattice(0.8, 2.0, 2048, 2.0, 0.3, 3.0);
        let g = weierstrass_lattice(0.8, 3.0, 2048, 0.5, 0.2, 5.0);
        let nl = Nonlinearity::product();
        let k = MollifierKernel::bump_space();
        let r = measure_rate(&f, &g, &nl, &k, 0.8, 0.8, 4.0, &eps_sweep(4, 8)).unwrap();
        assert!((r.predicted_slope - 0.6).abs() < 1e-12);
        assert!(r.fitted_slope.unwrap() >= 0.5, "{:?}", r.fitted_slope);
        assert!(r.pass);
    }

    #[test]
    fn pressure_on_rough_density() {
        // G = kappa f^gamma with gamma = 3: eta = 1, and with a
        // beta-regular density the decay is min(gamma,2)*beta - 1
        let params = EosParams::new(1.0, 3.0, 4.0).unwrap();
        let nl = Nonlinearity::pressure(&params);
        let f = weierstrass_lattice(0.8, 2.0, 2048, 2.0, 0.3, 3.0);
        let g = sample_unit(2048, |_| 0.0);
        let r = measure_rate(&f, &g, &nl, &k_bump(), 0.8, 0.8, 4.0, &eps_sweep(4, 8)).unwrap();
        // predicted min(0.8*2 - 1, 0.6) = 0.6
        assert!((r.predicted_slope - 0.6).abs() < 1e-12);
        assert!(r.pass, "fitted {:?}", r.fitted_slope);
    }

    fn k_bump() -> MollifierKernel {
        MollifierKernel::bump_space()
    }

    #[test]
    fn vacuous_regime_flagged() {
        let f = rough_lattice(0.4, 1024, 0.5, 1.0);
        let g = rough_lattice(0.4, 1024, 0.0, 1.0);
        let nl = Nonlinearity::product();
        let r = measure_rate(&f, &g, &nl, &k_bump(), 0.4, 0.4, 4.0, &eps_sweep(4, 7)).unwrap();
        assert!(r.vacuous);
        assert!((r.predicted_slope + 0.2).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn preconditions_enforced() {
        let f = sample_unit(512, |x| x);
        let g = sample_unit(512, |x| x);
        let nl = Nonlinearity::product();
        assert!(measure_rate(&f, &g, &nl, &k_bump(), 0.8, 0.8, 1.5, &eps_sweep(4, 7)).is_err());
        assert!(measure_rate(&f, &g, &nl, &k_bump(), 0.8, 0.8, 4.0, &[0.1, 0.05, 0.025]).is_err());
        let neg = sample_unit(512, |x| x - 0.5);
        assert!(commutator_field(&neg, &g, &nl, &k_bump(), 0.05).is_err());
    }

    #[test]
    fn derivative_validation() {
        Nonlinearity::product().validate_derivatives(2.0, 2.0).unwrap();
        Nonlinearity::affine(1.0, 2.0, 3.0)
            .validate_derivatives(2.0, 2.0)
            .unwrap();
        let p = EosParams::new(1.0, 1.5, 4.0).unwrap();
        Nonlinearity::pressure(&p).validate_derivatives(2.0, 1.0).unwrap();
        // a wrong derivative is caught
        let broken = Nonlinearity {
            name: "broken".into(),
            eval: Arc::new(|f, g| f * g),
            d_f: Arc::new(|_, g| 2.0 * g),
            d_g: Arc::new(|f, _| f),
            eta_holder: 1.0,
        };
        assert!(broken.validate_derivatives(2.0, 2.0).is_err());
    }

    #[test]
    fn holder_constant_sampled() {
        // product: D_f G = g independent of f, constant 0
        assert_eq!(Nonlinearity::product().sample_holder_constant(2.0, 3.0), 0.0);
        // pressure, gamma = 1.5: |f1^0.5 - f2^0.5| <= |f1-f2|^0.5, constant
        // near kappa*gamma
        let p = EosParams::new(1.0, 1.5, 4.0).unwrap();
        let c = Nonlinearity::pressure(&p).sample_holder_constant(2.0, 1.0);
        assert!(c.is_finite() && c > 0.0 && c <= 1.5 * 1.0001);
    }

    #[test]
    fn df_g_modulus_sampled() {
        // product: D_f G = g, so the g-modulus is exactly 1
        let m = Nonlinearity::product().sample_df_g_modulus(2.0, 3.0);
        assert!((m - 1.0).abs() < 1e-12);
        // pressure: D_f G ignores g entirely
        let p = EosParams::new(1.0, 2.0, 4.0).unwrap();
        assert_eq!(Nonlinearity::pressure(&p).sample_df_g_modulus(2.0, 3.0), 0.0);
    }
}

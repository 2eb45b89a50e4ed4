//! Test functions with prescribed regularity: algebraic cusps, sawtooth
//! (Weierstrass-type) sums with exact Besov scaling, and smooth sines.
//!
//! The sawtooth sum `sum_k 2^(-alpha*k) saw(2^k x)` carries its roughness at
//! every point, so `||D_h u||_Lq ~ h^alpha` for every `q`; an isolated cusp
//! `|x - x0|^alpha` concentrates it at one point and its finite-difference
//! norms pick up an extra measure factor `h^(1/q)`.

use crate::grid::SpatialExtension;
use crate::mollify::Lattice;

/// Distance to the nearest integer (triangle wave, period 1, slope +-1).
pub fn saw(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Weierstrass-type sawtooth sum with Hoelder exponent `alpha`, summed over
/// `levels` dyadic scales. Values lie in `[0, sum_k 2^(-alpha k) / 2]`.
pub fn sawtooth_sum(alpha: f64, levels: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..=levels {
        acc += 2.0f64.powf(-alpha * k as f64) * saw(2.0f64.powi(k as i32) * x);
    }
    acc
}

/// Isolated algebraic cusp `|x - x0|^alpha`.
pub fn cusp(alpha: f64, x0: f64, x: f64) -> f64 {
    (x - x0).abs().powf(alpha)
}

/// Samples a closure at cell centers of `[0, 1]` into a spatial lattice.
pub fn sample_unit(n: usize, f: impl Fn(f64) -> f64) -> Lattice {
    let dx = 1.0 / n as f64;
    let data = (0..n).map(|j| f((j as f64 + 0.5) * dx)).collect();
    Lattice::spatial(dx, data, SpatialExtension::Constant)
}

/// Sawtooth-sum lattice on `[0, 1]`, shifted and scaled into
/// `[offset, offset + scale]` so it can serve as a nonnegative density.
pub fn rough_lattice(alpha: f64, n: usize, offset: f64, scale: f64) -> Lattice {
    let levels = (n as f64).log2().ceil() as usize;
    let max = (0..=levels)
        .map(|k| 2.0f64.powf(-alpha * k as f64) * 0.5)
        .sum::<f64>();
    sample_unit(n, |x| offset + scale * sawtooth_sum(alpha, levels, x) / max)
}

/// Classical Weierstrass cosine sum `sum_k base^(-alpha*k) cos(2 pi base^k x
/// + phi_k)` up to frequency `f_max`, with a deterministic golden-ratio
/// phase schedule keyed by `seed`. Phase decorrelation keeps the lacunary
/// levels from locking onto a dyadic epsilon sweep, so measured decay rates
/// settle near their asymptotes at desk scale.
pub fn weierstrass_cos(alpha: f64, base: f64, f_max: f64, seed: f64, x: f64) -> f64 {
    const TAU: f64 = std::f64::consts::TAU;
    const GOLDEN: f64 = 0.618_033_988_749_894_9;
    let mut freq = 1.0f64;
    let mut k = 0usize;
    let mut acc = 0.0;
    while freq <= f_max {
        let phase = ((seed + 1.0) * (k as f64 + 1.0) * GOLDEN).fract() * TAU;
        acc += freq.powf(-alpha) * (TAU * freq.round() * x + phase).cos();
        freq *= base;
        k += 1;
    }
    acc
}

/// Weierstrass-cosine lattice on `[0, 1]` with values clamped into
/// `offset +- scale * bound`: nonnegative for `offset >= scale * bound`
/// where `bound = 1/(1 - base^-alpha)`.
pub fn weierstrass_lattice(
    alpha: f64,
    base: f64,
    n: usize,
    offset: f64,
    scale: f64,
    seed: f64,
) -> Lattice {
    let f_max = n as f64 / 4.0;
    sample_unit(n, |x| offset + scale * weierstrass_cos(alpha, base, f_max, seed, x))
}

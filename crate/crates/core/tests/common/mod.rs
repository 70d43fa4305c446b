//! Reference computations that share no code with the library.

#![allow(dead_code)]

use statrs::function::gamma::gamma;

pub fn k_gamma(k: f64, z: f64) -> f64 {
    k.powf(z / k - 1.0) * gamma(z / k)
}

/// `ρ^{-γ/k} / (k Γ_k(γ))`, the constant in front of the `s = t^ρ` form.
pub fn prefactor(k: f64, rho: f64, g: f64, gk: f64) -> f64 {
    rho.powf(-g / k) / (k * gk)
}

pub fn unit_closed_form(k: f64, rho: f64, g: f64, x: f64) -> f64 {
    let a = g / k;
    rho.powf(-a) * (x.powf(rho) - 1.0).powf(a) / (g * k_gamma(k, g))
}

/// Integral of `(t^ρ - 1)^m`: `prefactor · B(m+1, a) · (x^ρ - 1)^{m+a}`.
pub fn beta_moment(k: f64, rho: f64, g: f64, m: f64, x: f64) -> f64 {
    let a = g / k;
    let b = gamma(m + 1.0) * gamma(a) / gamma(m + 1.0 + a);
    prefactor(k, rho, g, k_gamma(k, g)) * b * (x.powf(rho) - 1.0).powf(m + a)
}

#[allow(clippy::too_many_arguments)]
fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        left + right + diff / 15.0
    } else {
        simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    // split into a few pieces first so that kinks cannot hide between samples
    let pieces = 64;
    let h = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = lo + h;
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            simpson(f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)
        })
        .sum()
}

/// The fractional integral by adaptive Simpson after `w = (x^ρ - s)^{γ/k}`,
/// which removes the kernel singularity.
pub fn hilfer_oracle(
    k: f64,
    rho: f64,
    g: f64,
    gk: f64,
    phi: &dyn Fn(f64) -> f64,
    x: f64,
    tol: f64,
) -> f64 {
    let a = g / k;
    let big_x = x.powf(rho);
    if big_x <= 1.0 {
        return 0.0;
    }
    let w_max = (big_x - 1.0).powf(a);
    let integrand = |w: f64| {
        let s = (big_x - w.powf(1.0 / a)).max(1.0);
        phi(s.powf(1.0 / rho))
    };
    prefactor(k, rho, g, gk) / a * adaptive_simpson(&integrand, 0.0, w_max, tol)
}

/// Linear interpolation on sorted nodes.
pub fn interp(nodes: &[f64], values: &[f64], t: f64) -> f64 {
    let t = t.clamp(nodes[0], nodes[nodes.len() - 1]);
    let i = match nodes.binary_search_by(|n| n.total_cmp(&t)) {
        Ok(i) => return values[i],
        Err(i) => i.clamp(1, nodes.len() - 1),
    };
    let th = (t - nodes[i - 1]) / (nodes[i] - nodes[i - 1]);
    values[i - 1] + th * (values[i] - values[i - 1])
}

//! Analytic boundary tails of the flow.
//!
//! A flow integrated over `[Λ_IR, Λ₀]` misses two contributions that have
//! closed forms once the couplings are frozen: the ultraviolet tail above
//! `Λ₀` (evaluated with the bare potential, which is exact in the quadratic
//! case because the mass never runs) and the infrared tail below `Λ_IR`
//! (evaluated with the final potential, whose running has frozen once
//! `Λ ≪ m_eff`):
//!
//! ```text
//! uv(c) = (1/2π) ∫_{Λ₀}^{∞}  ln(1 + c/Λ²) dΛ
//! ir(c) = (1/2π) ∫_{0}^{Λ_IR} ln(1 + c/Λ²) dΛ ,    c = V''(x)
//! ```
//!
//! At the default scales the two tails amount to ~4e-3 on the vacuum energy,
//! which is far above the harmonic acceptance tolerances, so completed
//! trajectories attach an *effective* (`Λ = 0`) potential with both tails
//! applied. Scalar closed forms serve the grid flow; the coupling flows push
//! series arguments through a Gauss-Legendre quadrature of the same
//! integrals.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::series::TruncatedSeries1;

/// Ultraviolet tail `(1/2π) ∫_{lambda0}^∞ ln(1 + c/Λ²) dΛ`.
///
/// Defined for `c > -lambda0²`; exact closed form:
///
/// ```text
/// c > 0:  [2√c·atan(√c/Λ₀) - Λ₀·ln(1 + c/Λ₀²)] / 2π
/// c < 0:  [-b·ln((Λ₀+b)/(Λ₀-b)) - Λ₀·ln(1 - b²/Λ₀²)] / 2π ,  b = √(-c)
/// ```
pub fn uv_tail(c: f64, lambda0: f64) -> Result<f64> {
    assert!(lambda0 > 0.0);
    if !(c > -lambda0 * lambda0) {
        return Err(Error::InvalidConfig(format!(
            "uv tail needs c > -lambda0^2, got c = {c}, lambda0 = {lambda0}"
        )));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    if c == 0.0 {
        return Ok(0.0);
    }
    let val = if c > 0.0 {
        let r = c.sqrt();
        2.0 * r * (r / lambda0).atan() - lambda0 * (c / (lambda0 * lambda0)).ln_1p()
    } else {
        let b = (-c).sqrt();
        -b * ((lambda0 + b) / (lambda0 - b)).ln() - lambda0 * (c / (lambda0 * lambda0)).ln_1p()
    };
    Ok(val / two_pi)
}

/// Infrared tail `(1/2π) ∫_0^{lambda_ir} ln(1 + c/Λ²) dΛ` for `c >= 0`:
///
/// ```text
/// [ε·ln(1 + c/ε²) + 2√c·atan(ε/√c)] / 2π ,   ε = Λ_IR
/// ```
///
/// Negative curvature makes the frozen integrand undefined below the scale
/// `√(-c)` (the residual flow would hit the spinodal), so `c < 0` is an
/// error and callers skip the completion in that case.
pub fn ir_tail(c: f64, lambda_ir: f64) -> Result<f64> {
    assert!(lambda_ir > 0.0);
    if c < 0.0 {
        return Err(Error::InvalidConfig(format!("ir tail needs c >= 0, got {c}")));
    }
    if c == 0.0 {
        return Ok(0.0);
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = c.sqrt();
    let val = lambda_ir * (c / (lambda_ir * lambda_ir)).ln_1p() + 2.0 * r * (lambda_ir / r).atan();
    Ok(val / two_pi)
}

/// Nodes and weights of the `N_QUAD`-point Gauss-Legendre rule on `[0, 1]`.
///
/// Both tail integrands are analytic after the substitutions used below, so
/// the fixed rule reaches machine accuracy; the scalar closed forms above
/// cross-check that in the tests.
pub(crate) fn quad_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    const N_QUAD: usize = 40;
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| {
        // Newton iteration on the Legendre polynomial P_n over [-1, 1].
        let n = N_QUAD;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            // Map [-1, 1] -> [0, 1].
            nodes[i] = 0.5 * (1.0 + x);
            weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Natural log of a series with positive constant term.
pub(crate) fn ln_series(s: &TruncatedSeries1) -> Result<TruncatedSeries1> {
    let s0 = s.coeff(0);
    if !(s0 > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "series logarithm needs a positive constant term, got {s0}"
        )));
    }
    let mut rel = s.scale(1.0 / s0);
    rel.coeffs_mut()[0] = 0.0;
    let mut out = rel.log1p()?;
    out.coeffs_mut()[0] += s0.ln();
    Ok(out)
}

/// Ultraviolet tail with a series curvature argument `c(φ)`; constant term
/// must satisfy the scalar domain condition. Uses `Λ = Λ₀/v`:
///
/// ```text
/// ∫_{Λ₀}^∞ ln(1 + c/Λ²) dΛ = Λ₀ ∫_0^1 ln(1 + c v²/Λ₀²) / v² dv
/// ```
pub fn uv_tail_series(c: &TruncatedSeries1, lambda0: f64) -> Result<TruncatedSeries1> {
    // Validate the domain once via the scalar form.
    uv_tail(c.coeff(0), lambda0)?;
    let order = c.order();
    let (nodes, weights) = quad_nodes();
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut acc = TruncatedSeries1::zero(order);
    for (&v, &w) in nodes.iter().zip(weights) {
        let arg = c.scale(v * v / (lambda0 * lambda0));
        let ln = arg.log1p()?;
        acc = acc.add(&ln.scale(w / (v * v)));
    }
    Ok(acc.scale(lambda0 / two_pi))
}

/// Infrared tail with a series curvature argument `c(φ)`; constant term must
/// be positive. Splits the log singularity:
///
/// ```text
/// ∫_0^ε ln(1 + c/Λ²) dΛ = ∫_0^ε ln(Λ² + c) dΛ - 2ε(ln ε - 1)
/// ```
///
/// and integrates the analytic first part with `Λ = ε·u`.
pub fn ir_tail_series(c: &TruncatedSeries1, lambda_ir: f64) -> Result<TruncatedSeries1> {
    let order = c.order();
    if !(c.coeff(0) > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "ir tail needs positive curvature at the expansion point, got {}",
            c.coeff(0)
        )));
    }
    let (nodes, weights) = quad_nodes();
    let two_pi = 2.0 * std::f64::consts::PI;
    let eps = lambda_ir;
    let mut acc = TruncatedSeries1::zero(order);
    for (&u, &w) in nodes.iter().zip(weights) {
        let mut arg = c.clone();
        arg.coeffs_mut()[0] += eps * eps * u * u;
        acc = acc.add(&ln_series(&arg)?.scale(w));
    }
    let mut out = acc.scale(eps / two_pi);
    out.coeffs_mut()[0] -= 2.0 * eps * (eps.ln() - 1.0) / two_pi;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Plain adaptive Simpson quadrature: the independent oracle for the
    /// closed forms.
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn uv_tail_matches_quadrature() {
        let two_pi = 2.0 * std::f64::consts::PI;
        for &(c, a) in &[(1.0, 100.0), (2.5, 50.0), (-0.8, 10.0), (0.3, 2.0)] {
            // Substitute Λ = a/v to make the infinite range finite.
            let f = |v: f64| {
                if v == 0.0 {
                    c / a // limit of ln(1+c v²/a²) * a/v²
                } else {
                    (c * v * v / (a * a)).ln_1p() * a / (v * v)
                }
            };
            let oracle = simpson(&f, 0.0, 1.0, 20000) / two_pi;
            assert_relative_eq!(uv_tail(c, a).unwrap(), oracle, max_relative = 1e-10, epsilon = 1e-14);
        }
    }

    #[test]
    fn ir_tail_matches_quadrature() {
        let two_pi = 2.0 * std::f64::consts::PI;
        for &(c, eps) in &[(1.0, 1e-3), (2.5, 1e-2), (0.35, 1e-3)] {
            // The integrand has an integrable log singularity at 0; split it
            // off analytically as in the series path.
            let f = |u: f64| (eps * eps * u * u + c).ln() * eps;
            let oracle =
                (simpson(&f, 0.0, 1.0, 20000) - 2.0 * eps * (eps.ln() - 1.0)) / two_pi;
            assert_relative_eq!(ir_tail(c, eps).unwrap(), oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn tails_complete_the_harmonic_flow_to_half_m() {
        // (1/2π) ∫_0^∞ ln(1 + m²/Λ²) dΛ = m/2, split as ir + window + uv.
        // The window integrand steepens like ln(1/Λ²) towards Λ = ε, so
        // integrate in log scale (Λ = e^s) where it is uniformly smooth.
        let two_pi = 2.0 * std::f64::consts::PI;
        for &m in &[1.0, 0.5, 2.0] {
            let c = m * m;
            let (eps, a) = (1e-3_f64, 100.0_f64);
            let f = |s: f64| {
                let l = s.exp();
                (c / (l * l)).ln_1p() * l
            };
            let window = simpson(&f, eps.ln(), a.ln(), 200000) / two_pi;
            let total = ir_tail(c, eps).unwrap() + window + uv_tail(c, a).unwrap();
            assert_relative_eq!(total, 0.5 * m, max_relative = 1e-9);
        }
    }

    #[test]
    fn domain_violations_are_rejected() {
        assert!(uv_tail(-4.0, 1.0).is_err());
        assert!(ir_tail(-0.1, 1e-3).is_err());
        assert_eq!(uv_tail(0.0, 10.0).unwrap(), 0.0);
        assert_eq!(ir_tail(0.0, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn series_tails_reduce_to_scalar_on_constants() {
        let c = TruncatedSeries1::constant(1.7, 8);
        let uv = uv_tail_series(&c, 100.0).unwrap();
        let ir = ir_tail_series(&c, 1e-3).unwrap();
        assert_relative_eq!(uv.coeff(0), uv_tail(1.7, 100.0).unwrap(), max_relative = 1e-13);
        assert_relative_eq!(ir.coeff(0), ir_tail(1.7, 1e-3).unwrap(), max_relative = 1e-13);
        for k in 1..=8 {
            assert_eq!(uv.coeff(k), 0.0);
            assert_eq!(ir.coeff(k), 0.0);
        }
    }

    #[test]
    fn series_tails_taylor_expand_the_scalar_tails() {
        // c(φ) = 2 + 0.9 φ + 0.3 φ² - 0.05 φ³: the composed series evaluated
        // at small φ must match tail(c(φ)) to truncation accuracy.
        let c = TruncatedSeries1::new(vec![2.0, 0.9, 0.3, -0.05, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let uv = uv_tail_series(&c, 50.0).unwrap();
        let ir = ir_tail_series(&c, 1e-3).unwrap();
        for &phi in &[-0.2, -0.05, 0.1, 0.25] {
            let cx = c.eval(phi);
            assert_relative_eq!(uv.eval(phi), uv_tail(cx, 50.0).unwrap(), max_relative = 1e-9);
            assert_relative_eq!(ir.eval(phi), ir_tail(cx, 1e-3).unwrap(), max_relative = 1e-9);
        }
    }

    #[test]
    fn quadrature_rule_integrates_high_degree_polynomials_exactly() {
        let (nodes, weights) = quad_nodes();
        // Exact for degree <= 2*40 - 1; check x^20 over [0,1].
        let val: f64 = nodes.iter().zip(weights).map(|(&x, &w)| w * x.powi(20)).sum();
        assert_relative_eq!(val, 1.0 / 21.0, max_relative = 1e-13);
        let total: f64 = weights.iter().sum();
        assert_relative_eq!(total, 1.0, max_relative = 1e-14);
    }
}

//! Bare potential families and polynomial utilities.
//!
//! All one-particle potentials are real polynomials; the standard families
//! are
//!
//! ```text
//! single well        V(x) = lambda0 x^4 + x²/2
//! double well        V(x) = lambda0 x^4 - x²/2
//! asymmetric well    V(x) = lambda0 x^4 - x²/2 + h0 x
//! susy pair          V±(x) = W(x)²/2 ± W'(x)/2,  W(x) = g x² - x
//! ```
//!
//! and the two-particle system lives in [`two_particle_bare`] /
//! [`rotate_to_normal_coordinates`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{TruncatedSeries1, TruncatedSeries2};

/// Dense monomial coefficients: `V(x) = sum_n c_n x^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial1D {
    c: Vec<f64>,
}

impl Polynomial1D {
    /// Builds a polynomial from monomial coefficients `c[0], c[1], ...`
    /// (trailing zeros trimmed, so `degree` is meaningful).
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut c = coeffs;
        while c.len() > 1 && *c.last().unwrap() == 0.0 {
            c.pop();
        }
        if c.is_empty() {
            c.push(0.0);
        }
        Self { c }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn coeff(&self, n: usize) -> f64 {
        self.c.get(n).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    /// Horner evaluation; returns exactly `c_0` at `x = 0`.
    pub fn value(&self, x: f64) -> f64 {
        self.c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() == 1 {
            return Self::new(vec![0.0]);
        }
        Self::new(self.c.iter().enumerate().skip(1).map(|(n, &cn)| n as f64 * cn).collect())
    }

    pub fn second_derivative_at(&self, x: f64) -> f64 {
        self.derivative().derivative().value(x)
    }

    /// True when every odd coefficient is exactly zero (Z₂-even potential).
    pub fn is_even(&self) -> bool {
        self.c.iter().skip(1).step_by(2).all(|&ck| ck == 0.0)
    }

    /// Exact recentering: returns `q` with `q(y) = V(x0 + y)` by binomial
    /// expansion. The constant part (vacuum energy) is retained.
    pub fn shift_by(&self, x0: f64) -> Self {
        let n = self.c.len();
        let mut out = vec![0.0; n];
        for (deg, &cn) in self.c.iter().enumerate() {
            if cn == 0.0 {
                continue;
            }
            // cn (x0 + y)^deg = cn sum_k binom(deg, k) x0^(deg-k) y^k
            let mut binom = 1.0;
            for k in 0..=deg {
                out[k] += cn * binom * x0.powi((deg - k) as i32);
                binom *= (deg - k) as f64 / (k + 1) as f64;
            }
        }
        Self::new(out)
    }

    /// Checks that the polynomial can serve as a flow input: degree >= 2,
    /// bounded below (even degree with positive leading coefficient).
    pub fn check_flow_input(&self) -> Result<()> {
        let d = self.degree();
        if d < 2 {
            return Err(Error::InvalidConfig(format!("flow potential needs degree >= 2, got {d}")));
        }
        if d % 2 != 0 || *self.c.last().unwrap() <= 0.0 {
            return Err(Error::InvalidConfig(
                "flow potential must be bounded below (even degree, positive leading coefficient)".into(),
            ));
        }
        Ok(())
    }

    /// Real critical points (roots of `V'`), ascending. Roots are isolated
    /// by dense sampling within the Cauchy bound and polished by bisection,
    /// which is robust for the low-degree polynomials used here.
    pub fn critical_points(&self) -> Vec<f64> {
        let dp = self.derivative();
        if dp.degree() == 0 {
            return vec![];
        }
        let top = *dp.c.last().unwrap();
        let bound = 1.0 + dp.c.iter().map(|ck| (ck / top).abs()).fold(0.0, f64::max);
        let samples = 16384;
        let mut roots: Vec<f64> = Vec::new();
        let mut prev_x = -bound;
        let mut prev_f = dp.value(prev_x);
        for i in 1..=samples {
            let x = -bound + 2.0 * bound * i as f64 / samples as f64;
            let f = dp.value(x);
            if prev_f == 0.0 {
                roots.push(prev_x);
            } else if prev_f * f < 0.0 {
                let (mut lo, mut hi) = (prev_x, x);
                let (mut flo, _) = (prev_f, f);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = dp.value(mid);
                    if fm == 0.0 {
                        lo = mid;
                        hi = mid;
                        break;
                    }
                    if flo * fm < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                    if hi - lo < 1e-16 * (1.0 + mid.abs()) {
                        break;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev_f = f;
        }
        if prev_f == 0.0 {
            roots.push(prev_x);
        }
        roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + a.abs()));
        roots
    }
}

/// Finds the global minimum of a bounded-below polynomial and recenters the
/// expansion there: returns `(x_min, q)` with `q(y) = V(x_min + y)` and the
/// vacuum constant `q(0) = V(x_min)` retained.
///
/// A tie between two distinct global minima (the symmetric double well) is
/// reported as [`Error::DegenerateMinima`]; the caller picks a branch and
/// recenters with [`Polynomial1D::shift_by`].
pub fn shift_to_minimum(p: &Polynomial1D) -> Result<(f64, Polynomial1D)> {
    p.check_flow_input()?;
    let crits = p.critical_points();
    if crits.is_empty() {
        return Err(Error::Extraction("potential has no critical point".into()));
    }
    let mut best = crits[0];
    let mut best_v = p.value(best);
    for &x in &crits[1..] {
        let v = p.value(x);
        if v < best_v {
            best = x;
            best_v = v;
        }
    }
    let scale = 1.0 + best_v.abs();
    for &x in &crits {
        if (x - best).abs() > 1e-9 * (1.0 + best.abs()) && (p.value(x) - best_v).abs() < 1e-12 * scale {
            let (l, r) = if x < best { (x, best) } else { (best, x) };
            return Err(Error::DegenerateMinima { x_left: l, x_right: r });
        }
    }
    Ok((best, p.shift_by(best)))
}

/// `V(x) = lambda0 x^4 + x²/2`.
pub fn single_well(lambda0: f64) -> Polynomial1D {
    Polynomial1D::new(vec![0.0, 0.0, 0.5, 0.0, lambda0])
}

/// `V(x) = lambda0 x^4 - x²/2`.
pub fn double_well(lambda0: f64) -> Polynomial1D {
    Polynomial1D::new(vec![0.0, 0.0, -0.5, 0.0, lambda0])
}

/// `V(x) = lambda0 x^4 - x²/2 + h0 x`.
pub fn asymmetric_well(lambda0: f64, h0: f64) -> Polynomial1D {
    Polynomial1D::new(vec![0.0, h0, -0.5, 0.0, lambda0])
}

/// Superpotential `W(x) = g x² - x` and its partner pair
/// `V±(x) = W²/2 ± W'/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SusyPotentialW {
    pub g: f64,
}

impl SusyPotentialW {
    pub fn new(g: f64) -> Self {
        Self { g }
    }

    pub fn w(&self, x: f64) -> f64 {
        self.g * x * x - x
    }

    /// `W` as a polynomial.
    pub fn w_polynomial(&self) -> Polynomial1D {
        Polynomial1D::new(vec![0.0, -1.0, self.g])
    }

    /// `V₊ = W²/2 + W'/2 = g²x⁴/2 - g x³ + x²/2 + g x - 1/2`.
    pub fn partner_plus(&self) -> Polynomial1D {
        let g = self.g;
        Polynomial1D::new(vec![-0.5, g, 0.5, -g, 0.5 * g * g])
    }

    /// `V₋ = W²/2 - W'/2`.
    pub fn partner_minus(&self) -> Polynomial1D {
        let g = self.g;
        Polynomial1D::new(vec![0.5, -g, 0.5, -g, 0.5 * g * g])
    }
}

/// Coupling above which the bare `V₊` loses its second well (discriminant of
/// `V₊'` vanishes): `g_c = 108^(-1/4) ≈ 0.3106`.
pub fn susy_critical_coupling() -> f64 {
    (1.0f64 / 108.0).powf(0.25)
}

/// Two-particle interaction term added to two decoupled double wells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Interaction {
    /// `c * phi1 * phi2`
    Linear { c: f64 },
    /// `c2 * (phi1 - phi2)²`
    Quadratic { c2: f64 },
    /// `c4 * (phi1 - phi2)^4`
    Quartic { c4: f64 },
}

impl Interaction {
    /// The interaction polynomial `F(phi1, phi2)` alone, at truncation
    /// order >= 4.
    pub fn polynomial(&self, order: usize) -> TruncatedSeries2 {
        assert!(order >= 4, "two-particle interactions need order >= 4");
        let mut f = TruncatedSeries2::zero(order);
        match *self {
            Interaction::Linear { c } => {
                f.set_coeff(1, 1, c);
            }
            Interaction::Quadratic { c2 } => {
                f.set_coeff(2, 0, c2);
                f.set_coeff(1, 1, -2.0 * c2);
                f.set_coeff(0, 2, c2);
            }
            Interaction::Quartic { c4 } => {
                f.set_coeff(4, 0, c4);
                f.set_coeff(3, 1, -4.0 * c4);
                f.set_coeff(2, 2, 6.0 * c4);
                f.set_coeff(1, 3, -4.0 * c4);
                f.set_coeff(0, 4, c4);
            }
        }
        f
    }

    /// Coupling strength carried by the interaction, whatever its form.
    pub fn strength(&self) -> f64 {
        match *self {
            Interaction::Linear { c } => c,
            Interaction::Quadratic { c2 } => c2,
            Interaction::Quartic { c4 } => c4,
        }
    }
}

/// Bare two-particle potential in particle coordinates:
///
/// ```text
/// V(phi1, phi2) = -phi1²/2 + lambda0 phi1^4 - phi2²/2 + lambda0 phi2^4 + F(phi1, phi2)
/// ```
pub fn two_particle_bare(lambda0: f64, interaction: &Interaction, order: usize) -> TruncatedSeries2 {
    let mut v = interaction.polynomial(order);
    let old = v.coeff(2, 0);
    v.set_coeff(2, 0, old - 0.5);
    let old = v.coeff(0, 2);
    v.set_coeff(0, 2, old - 0.5);
    let old = v.coeff(4, 0);
    v.set_coeff(4, 0, old + lambda0);
    let old = v.coeff(0, 4);
    v.set_coeff(0, 4, old + lambda0);
    v
}

/// Exact rotation to normal coordinates `x1 = (phi1 - phi2)/√2` (relative,
/// antisymmetric under particle exchange) and `x2 = (phi1 + phi2)/√2`
/// (center of mass, symmetric): substitutes `phi1 = (x1 + x2)/√2`,
/// `phi2 = (x2 - x1)/√2`.
pub fn rotate_to_normal_coordinates(v: &TruncatedSeries2) -> TruncatedSeries2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    v.substitute_linear(s, s, -s, s)
}

/// `V''` of a polynomial as a truncated series of the requested order (the
/// coefficients above the polynomial's degree are exact zeros).
pub fn second_derivative_series(p: &Polynomial1D, order: usize) -> TruncatedSeries1 {
    let mut u = TruncatedSeries1::zero(order);
    for k in 0..=order {
        let n = k + 2;
        u.coeffs_mut()[k] = ((n * (n - 1)) as f64) * p.coeff(n);
    }
    u
}

/// JSON wire form of a potential: `{kind, params, coeffs}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialRecord {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coeffs: Vec<f64>,
}

/// Typed one-particle potential family, convertible to/from
/// [`PotentialRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRecord", into = "PotentialRecord")]
pub enum PotentialSpec {
    SingleWell { lambda0: f64 },
    DoubleWell { lambda0: f64 },
    AsymmetricWell { lambda0: f64, h0: f64 },
    SusyPlus { g: f64 },
    SusyMinus { g: f64 },
    Polynomial { coeffs: Vec<f64> },
}

impl PotentialSpec {
    pub fn build(&self) -> Polynomial1D {
        match self {
            PotentialSpec::SingleWell { lambda0 } => single_well(*lambda0),
            PotentialSpec::DoubleWell { lambda0 } => double_well(*lambda0),
            PotentialSpec::AsymmetricWell { lambda0, h0 } => asymmetric_well(*lambda0, *h0),
            PotentialSpec::SusyPlus { g } => SusyPotentialW::new(*g).partner_plus(),
            PotentialSpec::SusyMinus { g } => SusyPotentialW::new(*g).partner_minus(),
            PotentialSpec::Polynomial { coeffs } => Polynomial1D::new(coeffs.clone()),
        }
    }
}

impl From<PotentialSpec> for PotentialRecord {
    fn from(spec: PotentialSpec) -> Self {
        let coeffs = spec.build().coeffs().to_vec();
        let mut params = BTreeMap::new();
        let kind = match &spec {
            PotentialSpec::SingleWell { lambda0 } => {
                params.insert("lambda0".into(), *lambda0);
                "single_well"
            }
            PotentialSpec::DoubleWell { lambda0 } => {
                params.insert("lambda0".into(), *lambda0);
                "double_well"
            }
            PotentialSpec::AsymmetricWell { lambda0, h0 } => {
                params.insert("lambda0".into(), *lambda0);
                params.insert("h0".into(), *h0);
                "asymmetric_well"
            }
            PotentialSpec::SusyPlus { g } => {
                params.insert("g".into(), *g);
                "susy_plus"
            }
            PotentialSpec::SusyMinus { g } => {
                params.insert("g".into(), *g);
                "susy_minus"
            }
            PotentialSpec::Polynomial { .. } => "polynomial",
        };
        PotentialRecord { kind: kind.into(), params, coeffs }
    }
}

impl TryFrom<PotentialRecord> for PotentialSpec {
    type Error = Error;

    fn try_from(rec: PotentialRecord) -> Result<Self> {
        fn get(params: &BTreeMap<String, f64>, key: &str, kind: &str) -> Result<f64> {
            params.get(key).copied().ok_or_else(|| {
                Error::InvalidConfig(format!("potential kind '{kind}' needs parameter '{key}'"))
            })
        }
        fn check_keys(params: &BTreeMap<String, f64>, allowed: &[&str], kind: &str) -> Result<()> {
            for k in params.keys() {
                if !allowed.contains(&k.as_str()) {
                    return Err(Error::InvalidConfig(format!(
                        "unknown parameter '{k}' for potential kind '{kind}'"
                    )));
                }
            }
            Ok(())
        }
        let spec = match rec.kind.as_str() {
            "single_well" => {
                check_keys(&rec.params, &["lambda0"], &rec.kind)?;
                PotentialSpec::SingleWell { lambda0: get(&rec.params, "lambda0", &rec.kind)? }
            }
            "double_well" => {
                check_keys(&rec.params, &["lambda0"], &rec.kind)?;
                PotentialSpec::DoubleWell { lambda0: get(&rec.params, "lambda0", &rec.kind)? }
            }
            "asymmetric_well" => {
                check_keys(&rec.params, &["lambda0", "h0"], &rec.kind)?;
                PotentialSpec::AsymmetricWell {
                    lambda0: get(&rec.params, "lambda0", &rec.kind)?,
                    h0: get(&rec.params, "h0", &rec.kind)?,
                }
            }
            "susy_plus" => {
                check_keys(&rec.params, &["g"], &rec.kind)?;
                PotentialSpec::SusyPlus { g: get(&rec.params, "g", &rec.kind)? }
            }
            "susy_minus" => {
                check_keys(&rec.params, &["g"], &rec.kind)?;
                PotentialSpec::SusyMinus { g: get(&rec.params, "g", &rec.kind)? }
            }
            "polynomial" => {
                check_keys(&rec.params, &[], &rec.kind)?;
                if rec.coeffs.is_empty() {
                    return Err(Error::InvalidConfig("polynomial potential needs coeffs".into()));
                }
                PotentialSpec::Polynomial { coeffs: rec.coeffs.clone() }
            }
            other => {
                return Err(Error::InvalidConfig(format!("unknown potential kind '{other}'")));
            }
        };
        // For the named families, stored coeffs (if any) must agree with the
        // parameters: catches records edited inconsistently by hand.
        if !rec.coeffs.is_empty() && !matches!(spec, PotentialSpec::Polynomial { .. }) {
            let built = spec.build();
            let same = rec.coeffs.len() >= built.coeffs().len()
                && rec
                    .coeffs
                    .iter()
                    .enumerate()
                    .all(|(n, &c)| (c - built.coeff(n)).abs() <= 1e-12 * (1.0 + c.abs()));
            if !same {
                return Err(Error::InvalidConfig(format!(
                    "coeffs of record do not match its kind '{}' and params",
                    rec.kind
                )));
            }
        }
        Ok(spec)
    }
}

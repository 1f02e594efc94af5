//! Functions derived from φ: the Young function Φ, the conjugate weight ψ,
//! the inverse ζ of `s √φ(s)`, `Θ(t) = ζ(t)/t` and its log-derivative Λ.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::numeric::quad::{adaptive_simpson, Tolerance};

use super::phi::{lambda_from_elasticity, PhiSpec};

const KNOT_START: f64 = 1e-8;
const KNOTS_PER_DECADE: f64 = 16.0;
const KNOT_COUNT: usize = 257;

const GL_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Cumulative values of Φ at log-spaced knots; each segment integrated
/// adaptively to relative accuracy well below 1e-10.
#[derive(Debug)]
struct YoungTable {
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

/// Everything derived from one φ. Immutable; the Φ table is built lazily
/// and shared between threads.
#[derive(Debug)]
pub struct AuxBundle {
    phi: PhiSpec,
    table: OnceLock<std::result::Result<YoungTable, String>>,
}

impl Clone for AuxBundle {
    fn clone(&self) -> Self {
        AuxBundle::new(self.phi.clone())
    }
}

impl AuxBundle {
    pub fn new(phi: PhiSpec) -> Self {
        AuxBundle { phi, table: OnceLock::new() }
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    /// Bundle for the conjugate weight ψ.
    pub fn conjugate(&self) -> Result<AuxBundle> {
        Ok(AuxBundle::new(self.phi.conjugate()?))
    }

    fn integrand(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        self.phi.s_phi(s).unwrap_or(f64::NAN)
    }

    /// Φ near the origin, from the local power law `sφ(s) ≈ c s^{r+1}`.
    fn young_near_zero(&self, s: f64) -> Result<f64> {
        Ok(s * self.phi.s_phi(s)? / (self.phi.r + 2.0))
    }

    fn table(&self) -> Result<&YoungTable> {
        let built = self.table.get_or_init(|| self.build_table().map_err(|e| e.to_string()));
        built.as_ref().map_err(|msg| Error::InvalidInput(format!("Young function table: {msg}")))
    }

    fn build_table(&self) -> Result<YoungTable> {
        let tol = Tolerance { abs: f64::MIN_POSITIVE, rel: 1e-12 };
        let f = |s: f64| self.integrand(s);
        let mut knots = vec![KNOT_START];
        let mut cumulative = vec![self.young_near_zero(KNOT_START)?];
        for k in 1..KNOT_COUNT {
            let x = KNOT_START * 10f64.powf(k as f64 / KNOTS_PER_DECADE);
            let prev = *knots.last().unwrap();
            let seg = match adaptive_simpson(&f, prev, x, tol) {
                Ok(v) => v,
                Err(_) => break,
            };
            let total = cumulative.last().unwrap() + seg;
            if !total.is_finite() {
                break;
            }
            knots.push(x);
            cumulative.push(total);
        }
        Ok(YoungTable { knots, cumulative })
    }

    /// The Young function `Φ(s) = ∫₀^s σ φ(σ) dσ`.
    ///
    /// Returns `+∞` where the integral overflows.
    pub fn young(&self, s: f64) -> Result<f64> {
        if s.is_nan() {
            return Err(Error::InvalidInput("Φ evaluated at NaN".into()));
        }
        if s <= 0.0 {
            return Ok(0.0);
        }
        if s <= KNOT_START {
            return self.young_near_zero(s);
        }
        let table = self.table()?;
        let last = table.knots.len() - 1;
        let pos = ((s / KNOT_START).log10() * KNOTS_PER_DECADE).floor();
        let mut k = if pos.is_finite() { (pos.max(0.0) as usize).min(last) } else { last };
        while k > 0 && table.knots[k] > s {
            k -= 1;
        }
        let base = table.cumulative[k];
        let a = table.knots[k];
        if k < last && s <= table.knots[k + 1] {
            return Ok(base + gauss_legendre(|x| self.integrand(x), a, s));
        }
        // Past the table: either overflow or beyond the last knot.
        let fs = self.integrand(s);
        if fs.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let tol = Tolerance { abs: f64::MIN_POSITIVE, rel: 1e-11 };
        match adaptive_simpson(&|x| self.integrand(x), a, s, tol) {
            Ok(v) => Ok(base + v),
            Err(_) => Ok(f64::INFINITY),
        }
    }

    /// The conjugate weight `ψ(t) = 1/φ(s)` where `s φ(s) = t`.
    pub fn conjugate_psi(&self, t: f64) -> Result<f64> {
        let s = self.phi.invert_s_phi(t)?;
        Ok(1.0 / self.phi.phi(s)?)
    }

    /// `ζ(t)`: the solution `s` of `s √φ(s) = t`.
    pub fn zeta(&self, t: f64) -> Result<f64> {
        self.phi.invert_s_sqrt_phi(t)
    }

    /// `Θ(t) = ζ(t) / t`.
    pub fn theta(&self, t: f64) -> Result<f64> {
        Ok(self.zeta(t)? / t)
    }

    /// `Λ(t) = t Θ'(t) / Θ(t)`, evaluated in closed form through the
    /// elasticity of φ at `ζ(t)`.
    pub fn lambda_fn(&self, t: f64) -> Result<f64> {
        let s = self.zeta(t)?;
        self.phi.lambda_at_s(s)
    }

    /// Residuals `(Θ̃(t)Θ(t) − 1, Λ̃(t) + Λ(t))` against the conjugate bundle.
    pub fn duality_check(&self, conj: &AuxBundle, t: f64) -> Result<(f64, f64)> {
        let theta = self.theta(t)?;
        let theta_c = conj.theta(t)?;
        let lam = self.lambda_fn(t)?;
        let lam_c = conj.lambda_fn(t)?;
        Ok((theta * theta_c - 1.0, lam_c + lam))
    }

    /// `1 − Λ²` as a function of `s`: `4(1 + ℓ)/(ℓ + 2)²`.
    pub fn one_minus_lambda_sq_at_s(&self, s: f64) -> Result<f64> {
        let l = self.phi.elasticity(s)?;
        Ok(4.0 * (1.0 + l) / ((l + 2.0) * (l + 2.0)))
    }

    /// Λ at `s √φ(s)`, for callers that work in the variable `s`.
    pub fn lambda_at_s(&self, s: f64) -> Result<f64> {
        Ok(lambda_from_elasticity(self.phi.elasticity(s)?))
    }
}

fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc += w * (f(c - h * x) + f(c + h * x));
    }
    acc * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn young_matches_closed_forms() {
        type Case = (PhiSpec, Box<dyn Fn(f64) -> f64>);
        let cases: Vec<Case> = vec![
            (PhiSpec::power(3.0), Box::new(|s: f64| s.powi(3) / 3.0)),
            (PhiSpec::power(1.5), Box::new(|s: f64| s.powf(1.5) / 1.5)),
            (PhiSpec::ratio4(), Box::new(|s: f64| s.powi(4) / (s * s + 1.0))),
            (PhiSpec::exp_power(2.0), Box::new(|s: f64| (s * s).exp_m1())),
            (PhiSpec::zygmund(3.0), Box::new(|s: f64| s.powi(3) * (s + E).ln())),
            (PhiSpec::arctan_def(), Box::new(|s: f64| s - s.atan())),
        ];
        for (spec, exact) in cases {
            let aux = AuxBundle::new(spec.clone());
            for &s in &[1e-3, 0.1, 0.77, 1.0, 3.3, 10.0] {
                let got = aux.young(s).unwrap();
                assert!(rel(got, exact(s)) < 1e-9, "{spec} at {s}: {got} vs {}", exact(s));
            }
        }
    }

    #[test]
    fn young_overflows_to_infinity() {
        let aux = AuxBundle::new(PhiSpec::exp_power(2.0));
        assert_eq!(aux.young(40.0).unwrap(), f64::INFINITY);
        assert_eq!(aux.young(0.0).unwrap(), 0.0);
    }

    #[test]
    fn psi_inverts_s_phi() {
        let aux = AuxBundle::new(PhiSpec::zygmund(3.0));
        for &s in &[0.01, 0.5, 2.0, 40.0] {
            let phi = aux.phi().phi(s).unwrap();
            let psi = aux.conjugate_psi(s * phi).unwrap();
            assert!(rel(psi, 1.0 / phi) < 1e-10);
        }
    }

    #[test]
    fn power_lambda_is_constant() {
        // φ = s^{p-2}: ℓ = p − 2, Λ = (2 − p)/p.
        for &p in &[1.5, 2.0, 3.0, 6.0] {
            let aux = AuxBundle::new(PhiSpec::power(p));
            for &t in &[1e-3, 1.0, 1e3] {
                assert!((aux.lambda_fn(t).unwrap() - (2.0 - p) / p).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lambda_matches_log_derivative_of_theta() {
        let aux = AuxBundle::new(PhiSpec::ratio4());
        for &t in &[0.05, 0.4, 1.3, 9.0] {
            let h = 1e-4 * t;
            let d = (aux.theta(t + h).unwrap().ln() - aux.theta(t - h).unwrap().ln()) / (2.0 * h);
            assert!((t * d - aux.lambda_fn(t).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn duality_for_ratio4() {
        let aux = AuxBundle::new(PhiSpec::ratio4());
        let conj = aux.conjugate().unwrap();
        for &t in &[1e-3, 0.2, 1.0, 5.0, 1e3] {
            let (a, b) = aux.duality_check(&conj, t).unwrap();
            assert!(a.abs() < 1e-9 && b.abs() < 1e-9, "t={t}: {a} {b}");
        }
    }
}

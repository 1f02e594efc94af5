//! Orlicz modular and Luxemburg norm of grid fields.

use crate::error::{Error, Result};
use crate::grid::GridField;

use super::aux::AuxBundle;

const NORM_REL: f64 = 1e-10;

/// `Σ Φ(|u_k|) w_k`.
pub fn orlicz_integral(aux: &AuxBundle, u: &GridField) -> Result<f64> {
    modular(aux, u, 1.0)
}

fn modular(aux: &AuxBundle, u: &GridField, lambda: f64) -> Result<f64> {
    let w = u.domain().weight();
    let mut acc = 0.0;
    for z in u.values() {
        acc += aux.young(z.norm() / lambda)?;
        if acc.is_infinite() {
            return Ok(f64::INFINITY);
        }
    }
    Ok(acc * w)
}

/// `inf { λ > 0 : Σ Φ(|u_k|/λ) w_k ≤ 1 }`. After bracketing, an Illinois
/// iteration on `log M(λ)` against `log λ` (exactly linear for powers) runs
/// until the bracket has relative width 1e-10 or the modular equals 1 to
/// 1e-13; bisection takes over while the modular is infinite.
pub fn luxemburg_norm(aux: &AuxBundle, u: &GridField) -> Result<f64> {
    let m = u.max_abs();
    if m == 0.0 {
        return Ok(0.0);
    }
    let g = |x: f64| -> Result<f64> { Ok(modular(aux, u, x.exp())?.ln()) };
    // g decreases in x = log λ; lo has g > 0, hi has g ≤ 0.
    let (mut lo, mut hi) = (m.ln(), m.ln());
    let mut g0 = g(lo)?;
    let (mut glo, mut ghi) = (g0, g0);
    let mut guard = 0;
    while g0 <= 0.0 || g0.is_nan() {
        if g0.is_nan() {
            return Err(Error::InvalidInput("Orlicz modular is not a number".into()));
        }
        hi = lo;
        ghi = g0;
        lo -= std::f64::consts::LN_2;
        g0 = g(lo)?;
        glo = g0;
        guard += 1;
        if guard > 2000 {
            return Err(Error::BracketFailure { target: 1.0, expansions: guard });
        }
    }
    while ghi > 0.0 {
        lo = hi;
        glo = ghi;
        hi += std::f64::consts::LN_2;
        ghi = g(hi)?;
        guard += 1;
        if guard > 2000 {
            return Err(Error::BracketFailure { target: 1.0, expansions: guard });
        }
    }
    let mut side = 0i8;
    while hi.exp() - lo.exp() > NORM_REL * hi.exp() {
        let x = if glo.is_finite() {
            let x = hi - ghi * (hi - lo) / (ghi - glo);
            if x > lo && x < hi {
                x
            } else {
                0.5 * (lo + hi)
            }
        } else {
            0.5 * (lo + hi)
        };
        let gx = g(x)?;
        if gx.abs() <= 1e-13 {
            return Ok(x.exp());
        }
        if gx > 0.0 {
            lo = x;
            glo = gx;
            if side == 1 {
                ghi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            ghi = gx;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
    }
    Ok(hi.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridDomain;
    use crate::orlicz::PhiSpec;
    use num_complex::Complex64;

    #[test]
    fn power_norm_is_lp_norm_scaled() {
        // Φ = s^p/p gives ‖u‖ = (Σ|u|^p w / p)^{1/p}.
        let d = GridDomain::rectangle(1.0, 1.0, 16, 16).unwrap();
        let u = GridField::from_fn(d, |x| Complex64::new(x[0] + 0.2, x[1]));
        let p = 3.0;
        let aux = AuxBundle::new(PhiSpec::power(p));
        let w = u.domain().weight();
        let sum: f64 = u.values().iter().map(|z| z.norm().powf(p)).sum::<f64>() * w / p;
        let got = luxemburg_norm(&aux, &u).unwrap();
        assert!((got - sum.powf(1.0 / p)).abs() < 1e-9 * got);
        assert!((orlicz_integral(&aux, &u).unwrap() - sum).abs() < 1e-10 * sum);
    }

    #[test]
    fn norm_is_homogeneous() {
        let d = GridDomain::interval(1.0, 40).unwrap();
        let u = GridField::from_fn(d, |x| Complex64::new((3.0 * x[0]).sin(), 0.5));
        let aux = AuxBundle::new(PhiSpec::ratio4());
        let a = luxemburg_norm(&aux, &u).unwrap();
        let b = luxemburg_norm(&aux, &u.scaled(7.5)).unwrap();
        assert!((b - 7.5 * a).abs() < 1e-8 * b);
        assert_eq!(luxemburg_norm(&aux, &u.scaled(0.0)).unwrap(), 0.0);
    }
}

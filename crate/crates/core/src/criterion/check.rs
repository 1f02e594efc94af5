//! Pointwise criteria on `A(x)`: the λ₀ test, the block quadratic form in
//! `(ξ, η)`, the real-part condition and the combined verdict.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::eigen::{symmetric_eigen, SymMatrix};
use crate::numeric::log_space;
use crate::orlicz::AuxBundle;

use super::lambda0::{lambda0, Lambda0, Lambda0Config};
use super::matrix::{ComplexMatrix, MatrixField};

/// `|Λ|` is clamped to `1 − LAMBDA_CLAMP` before assembling the form.
const LAMBDA_CLAMP: f64 = 1e-12;

/// Sampling of points, directions and the `s`/`t` parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Box `[0, L₁] × …`; defaults to the unit box of the matrix dimension.
    pub domain: Option<Vec<f64>>,
    /// Uniform sample points per axis, endpoints included; defaults to
    /// 33 / 17 / 5 for one, two and three dimensions.
    pub x_points: Option<usize>,
    /// Sampled unit directions; defaults to 720 angles (N = 2) or a
    /// 2000-point Fibonacci sphere (N = 3).
    pub directions: Option<usize>,
    /// Log-grid in `s` used when λ₀ is infinite.
    pub s_points: usize,
    pub s_range: [f64; 2],
    /// Log-grid in `t` on which Λ is sampled for the block form.
    pub t_points: usize,
    pub t_range: [f64; 2],
    /// Relative slack on margins, scaled by the largest entry of `A(x)`.
    pub tol: f64,
    pub lambda0: Lambda0Config,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            domain: None,
            x_points: None,
            directions: None,
            s_points: 200,
            s_range: [1e-8, 1e8],
            t_points: 200,
            t_range: [1e-6, 1e6],
            tol: 1e-9,
            lambda0: Lambda0Config::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Dissipative,
    NotDissipative,
    NecessaryOnlyPass,
    SufficientOnlyPass,
    Inconclusive,
}

/// Where a margin was smallest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub xi: Vec<f64>,
    pub eta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub verdict: Verdict,
    #[serde(serialize_with = "crate::criterion::serialize_extended")]
    pub lambda0: f64,
    pub worst_margin: f64,
    pub witness: Option<Witness>,
    pub kappa: Option<f64>,
    pub im_symmetric: bool,
    pub checks: Vec<SubCheck>,
}

/// Result of a sampled sub-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub holds: bool,
    /// Smallest raw margin found.
    pub margin: f64,
    pub witness: Option<Witness>,
}

/// A sample of Λ together with where it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LambdaSample {
    s: f64,
    t: Option<f64>,
    value: f64,
}

/// Criteria bound to one weight φ and one sampling policy. λ₀ and the Λ
/// samples are computed once and reused for every matrix.
#[derive(Debug)]
pub struct Criterion<'a> {
    aux: &'a AuxBundle,
    cfg: SamplingConfig,
    lambda0: Lambda0,
    lambdas: Vec<LambdaSample>,
    /// `(s, 2√(1+ℓ(s)), |ℓ(s)|)` for the s-dependent test.
    s_weights: Vec<(f64, f64, f64)>,
}

impl<'a> Criterion<'a> {
    pub fn new(aux: &'a AuxBundle, cfg: SamplingConfig) -> Result<Self> {
        if !(cfg.tol >= 0.0) || cfg.t_points < 2 || cfg.s_points < 2 {
            return Err(Error::InvalidInput("sampling needs tol >= 0 and at least 2 s/t points".into()));
        }
        let phi = aux.phi();
        let l0 = lambda0(phi, &cfg.lambda0)?;

        let mut lambdas = Vec::with_capacity(cfg.t_points + 3);
        for t in log_space(cfg.t_range[0], cfg.t_range[1], cfg.t_points) {
            let s = aux.zeta(t)?;
            lambdas.push(LambdaSample { s, t: Some(t), value: aux.lambda_at_s(s)? });
        }
        let mut extra = vec![cfg.s_range[0], cfg.s_range[1]];
        if let (true, Some(s)) = (l0.is_finite(), l0.argmax) {
            extra.push(s);
        }
        for s in extra {
            let t = phi.s_sqrt_phi(s)?;
            let t = (t.is_finite() && t > 0.0).then_some(t);
            lambdas.push(LambdaSample { s, t, value: aux.lambda_at_s(s)? });
        }
        for l in &mut lambdas {
            l.value = l.value.clamp(-1.0 + LAMBDA_CLAMP, 1.0 - LAMBDA_CLAMP);
        }

        let mut s_weights = Vec::with_capacity(cfg.s_points);
        for s in log_space(cfg.s_range[0], cfg.s_range[1], cfg.s_points) {
            let l = phi.elasticity(s)?;
            if !l.is_finite() || 1.0 + l <= 0.0 {
                continue;
            }
            s_weights.push((s, 2.0 * (1.0 + l).sqrt(), l.abs()));
        }
        Ok(Criterion { aux, cfg, lambda0: l0, lambdas, s_weights })
    }

    pub fn aux(&self) -> &AuxBundle {
        self.aux
    }

    pub fn lambda0(&self) -> &Lambda0 {
        &self.lambda0
    }

    pub fn config(&self) -> &SamplingConfig {
        &self.cfg
    }

    /// The Λ values the block form is tested at.
    pub fn lambda_samples(&self) -> Vec<f64> {
        self.lambdas.iter().map(|l| l.value).collect()
    }

    fn points(&self, a: &MatrixField) -> Result<Vec<(Vec<f64>, ComplexMatrix)>> {
        a.samples(&sample_points(a.dim(), &self.cfg))
    }

    /// The λ₀ criterion `λ₀ |⟨Im A ξ, ξ⟩| ≤ ⟨Re A ξ, ξ⟩` when λ₀ is finite,
    /// otherwise `2√(1+ℓ) ⟨Re A ξ, ξ⟩ − |ℓ| |⟨Im A ξ, ξ⟩| ≥ 0` on the s-grid
    /// (the original margin divided by φ(s)).
    pub fn check_pointwise(&self, a: &MatrixField) -> Result<CriterionReport> {
        let samples = self.points(a)?;
        let dirs = directions(a.dim(), self.cfg.directions);
        let im_symmetric = samples.iter().all(|(_, m)| m.im_asymmetry() <= SYM_TOL * m.max_abs().max(1.0));

        // (normalised margin, raw margin, witness, sample index)
        let mut worst: Option<(f64, f64, Witness, usize)> = None;
        let weights: Vec<(Option<f64>, f64, f64)> = if self.lambda0.is_finite() {
            vec![(self.lambda0.argmax, 1.0, self.lambda0.value)]
        } else {
            self.s_weights.iter().map(|&(s, c, d)| (Some(s), c, d)).collect()
        };
        for (k, (x, m)) in samples.iter().enumerate() {
            let scale = m.max_abs();
            if scale == 0.0 {
                continue;
            }
            let (sr, si) = (m.sym_re(), m.sym_im());
            for &(s, c, d) in &weights {
                let mut cands: Vec<Vec<f64>> = Vec::new();
                for sign in [-1.0, 1.0] {
                    let pencil = combine(&sr, c, &si, sign * d);
                    cands.extend(symmetric_eigen(&pencil)?.vectors);
                }
                let norm = (c + d) * scale;
                for xi in dirs.iter().chain(cands.iter()) {
                    let raw = c * sr.quadratic_form(xi) - d * si.quadratic_form(xi).abs();
                    let nm = raw / norm;
                    if worst.as_ref().is_none_or(|w| nm < w.0) {
                        let t = s.and_then(|s| self.aux.phi().s_sqrt_phi(s).ok()).filter(|t| t.is_finite());
                        let wit = Witness { x: x.clone(), s, t, xi: xi.clone(), eta: None };
                        worst = Some((nm, raw, wit, k));
                    }
                }
            }
        }
        let (norm_margin, raw, witness, k) = match worst {
            Some(w) => w,
            None => {
                // A ≡ 0: every margin vanishes.
                let wit = Witness { x: samples[0].0.clone(), s: None, t: None, xi: dirs[0].clone(), eta: None };
                (0.0, 0.0, wit, 0)
            }
        };
        let passed = norm_margin >= -self.cfg.tol;
        let verdict = if im_symmetric {
            if passed {
                Verdict::Dissipative
            } else {
                Verdict::NotDissipative
            }
        } else if passed {
            Verdict::NecessaryOnlyPass
        } else {
            let m = &samples[k].1;
            let local_sym = m.im_asymmetry() <= SYM_TOL * m.max_abs().max(1.0);
            let re_fails = symmetric_eigen(&m.sym_re())?.min().0 < -self.cfg.tol * m.max_abs();
            if local_sym || re_fails {
                Verdict::NotDissipative
            } else {
                Verdict::Inconclusive
            }
        };
        let check = SubCheck { name: "pointwise".into(), passed, margin: raw, witness: Some(witness.clone()) };
        Ok(CriterionReport {
            verdict,
            lambda0: self.lambda0.value,
            worst_margin: raw,
            witness: (!passed).then_some(witness),
            kappa: None,
            im_symmetric,
            checks: vec![check],
        })
    }

    /// Minimum over sampled `(x, t)` of the smallest eigenvalue of the block
    /// form; holds when it is at least `−tol · max|a_ij|`.
    pub fn sufficient_condition(&self, a: &MatrixField) -> Result<Margin> {
        let mut best: Option<(f64, f64, Witness)> = None;
        for (x, m) in self.points(a)? {
            let scale = m.max_abs().max(f64::MIN_POSITIVE);
            for l in &self.lambdas {
                let (v, vec) = form_min_eig_with_vector(&m, l.value)?;
                let nm = v / scale;
                if best.as_ref().is_none_or(|b| nm < b.0) {
                    let n = m.dim();
                    let wit = Witness {
                        x: x.clone(),
                        s: Some(l.s),
                        t: l.t,
                        xi: vec[..n].to_vec(),
                        eta: Some(vec[n..].to_vec()),
                    };
                    best = Some((nm, v, wit));
                }
            }
        }
        let (nm, v, w) = best.expect("at least one sample");
        Ok(Margin { holds: nm >= -self.cfg.tol, margin: v, witness: Some(w) })
    }

    /// κ̂: the smallest block-form eigenvalue over the samples.
    pub fn strong_ellipticity_margin(&self, a: &MatrixField) -> Result<f64> {
        Ok(self.sufficient_condition(a)?.margin)
    }

    pub fn necessary_real_part(&self, a: &MatrixField) -> Result<Margin> {
        necessary_real_part(a, &sample_points(a.dim(), &self.cfg), self.cfg.tol)
    }

    /// Runs every criterion and combines them into one verdict.
    ///
    /// With symmetric `Im A` the λ₀ test is necessary and sufficient. Otherwise
    /// the λ₀ test (necessary) and the block form (sufficient) are reported
    /// separately; failures are only called `not_dissipative` when `Re A`
    /// itself fails or the failing point has symmetric `Im A(x)`.
    pub fn check_operator(&self, a: &MatrixField) -> Result<CriterionReport> {
        let mut report = self.check_pointwise(a)?;
        let suff = self.sufficient_condition(a)?;
        let re = self.necessary_real_part(a)?;
        let nec_passed = report.checks[0].passed;
        report.kappa = Some(suff.margin);
        report.checks.push(SubCheck {
            name: "block_form".into(),
            passed: suff.holds,
            margin: suff.margin,
            witness: suff.witness.clone(),
        });
        report.checks.push(SubCheck {
            name: "real_part".into(),
            passed: re.holds,
            margin: re.margin,
            witness: re.witness.clone(),
        });
        if report.im_symmetric {
            return Ok(report);
        }
        report.verdict = match (nec_passed, suff.holds) {
            (true, true) => Verdict::Dissipative,
            (true, false) => Verdict::Inconclusive,
            (false, true) => Verdict::SufficientOnlyPass,
            (false, false) => {
                if !re.holds {
                    report.witness = re.witness.clone();
                    Verdict::NotDissipative
                } else if report.verdict == Verdict::NotDissipative {
                    Verdict::NotDissipative
                } else {
                    Verdict::Inconclusive
                }
            }
        };
        if report.verdict == Verdict::Inconclusive && report.witness.is_none() {
            report.witness = suff.witness;
        }
        Ok(report)
    }
}

const SYM_TOL: f64 = 1e-12;

fn combine(a: &SymMatrix, ca: f64, b: &SymMatrix, cb: f64) -> SymMatrix {
    let n = a.dim();
    let mut m = SymMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, ca * a.get(i, j) + cb * b.get(i, j));
        }
    }
    m
}

/// Uniform points per axis on the sampling box, endpoints included.
pub fn sample_points(n: usize, cfg: &SamplingConfig) -> Vec<Vec<f64>> {
    let lengths = cfg.domain.clone().unwrap_or_else(|| vec![1.0; n]);
    let per_axis = cfg.x_points.unwrap_or(match n {
        1 => 33,
        2 => 17,
        _ => 5,
    });
    let per_axis = per_axis.max(1);
    let axis = |l: f64| -> Vec<f64> {
        if per_axis == 1 {
            vec![0.5 * l]
        } else {
            (0..per_axis).map(|i| l * i as f64 / (per_axis - 1) as f64).collect()
        }
    };
    let mut pts: Vec<Vec<f64>> = vec![vec![]];
    for &l in lengths.iter().take(n) {
        let ax = axis(l);
        pts = pts
            .into_iter()
            .flat_map(|p| {
                ax.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    pts
}

/// Unit directions: `±1` in one dimension, uniform angles on `[0, π)` in two,
/// a Fibonacci sphere in three.
pub fn directions(n: usize, count: Option<usize>) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0]],
        2 => {
            let k = count.unwrap_or(720).max(1);
            (0..k)
                .map(|i| {
                    let th = std::f64::consts::PI * i as f64 / k as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect()
        }
        _ => {
            let k = count.unwrap_or(2000).max(2);
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..k)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / k as f64;
                    let r = (1.0 - z * z).sqrt();
                    let th = golden * i as f64;
                    vec![r * th.cos(), r * th.sin(), z]
                })
                .collect()
        }
    }
}

/// Matrix of the real quadratic form
/// `(1−Λ²)⟨Re A ξ, ξ⟩ + ⟨Re A η, η⟩ + (1+Λ)⟨Im A ξ, η⟩ + (1−Λ)⟨Im A* ξ, η⟩`
/// in the variable `(ξ, η) ∈ R^{2N}`.
pub fn block_form(a: &ComplexMatrix, lam: f64) -> SymMatrix {
    let n = a.dim();
    let sr = a.sym_re();
    let mut q = SymMatrix::zeros(2 * n);
    for i in 0..n {
        for j in i..n {
            q.set(i, j, (1.0 - lam * lam) * sr.get(i, j));
            q.set(n + i, n + j, sr.get(i, j));
        }
    }
    // ⟨M ξ, η⟩ = Σ η_i M_ij ξ_j with M = (1+Λ) Im A − (1−Λ) (Im A)ᵀ.
    for i in 0..n {
        for j in 0..n {
            let c = (1.0 + lam) * a.get(i, j).im - (1.0 - lam) * a.get(j, i).im;
            q.set(n + i, j, 0.5 * c);
        }
    }
    q
}

/// Smallest eigenvalue of [`block_form`].
pub fn form_min_eig(a: &ComplexMatrix, lam: f64) -> Result<f64> {
    Ok(form_min_eig_with_vector(a, lam)?.0)
}

/// Smallest eigenvalue of [`block_form`] and its unit eigenvector `(ξ, η)`.
pub fn form_min_eig_with_vector(a: &ComplexMatrix, lam: f64) -> Result<(f64, Vec<f64>)> {
    if !(lam.abs() < 1.0) {
        return Err(Error::InvalidInput(format!("Λ must lie in (-1, 1), got {lam}")));
    }
    let e = symmetric_eigen(&block_form(a, lam))?;
    let (v, vec) = e.min();
    Ok((v, vec.to_vec()))
}

/// `⟨Re A(x) ξ, ξ⟩ ≥ 0` via the smallest eigenvalue of `Sym(Re A(x))` on the
/// sample points.
pub fn necessary_real_part(a: &MatrixField, points: &[Vec<f64>], tol: f64) -> Result<Margin> {
    let mut best: Option<(f64, f64, Witness)> = None;
    for (x, m) in a.samples(points)? {
        let e = symmetric_eigen(&m.sym_re())?;
        let (v, vec) = e.min();
        let nm = v / m.max_abs().max(f64::MIN_POSITIVE);
        if best.as_ref().is_none_or(|b| nm < b.0) {
            best = Some((nm, v, Witness { x, s: None, t: None, xi: vec.to_vec(), eta: None }));
        }
    }
    let (nm, v, w) = best.ok_or_else(|| Error::InvalidInput("no sample points".into()))?;
    Ok(Margin { holds: nm >= -tol, margin: v, witness: Some(w) })
}

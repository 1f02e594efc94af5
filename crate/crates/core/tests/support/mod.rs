//! Property suites shared by `properties.rs` and `acceptance.rs`. Each suite
//! runs a fixed-seed proptest runner and reports the first failure.

#![allow(dead_code, clippy::needless_range_loop)]

use fdchk_core::criterion::{
    form_min_eig, form_min_eig_with_vector, ComplexMatrix, Criterion, MatrixField, SamplingConfig, Verdict,
};
use fdchk_core::dsl::{self, BinOp, Bindings, Constant, Expr, Func, Var};
use fdchk_core::numeric::log_space;
use fdchk_core::orlicz::{AuxBundle, PhiSpec, TailSign};
use fdchk_core::Complex64;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

pub const SEED: u64 = 0x5eed_f00d;

pub type Outcome = Result<(), String>;

pub fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config { cases, rng_seed: RngSeed::Fixed(SEED), failure_persistence: None, ..Config::default() })
}

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Outcome
where
    S::Value: std::fmt::Debug,
{
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn ok<T>(r: fdchk_core::Result<T>) -> Result<T, TestCaseError> {
    r.map_err(|e| TestCaseError::fail(e.to_string()))
}

// ---------------------------------------------------------------- weights

pub fn any_builtin() -> impl Strategy<Value = PhiSpec> {
    prop_oneof![
        (1.2f64..10.0).prop_map(PhiSpec::power),
        (1.2f64..6.0).prop_map(PhiSpec::zygmund),
        (1.0f64..3.0).prop_map(PhiSpec::exp_power),
        Just(PhiSpec::arctan_def()),
        Just(PhiSpec::ratio4()),
        Just(PhiSpec::ratio_log()),
    ]
}

/// Builtins whose `s φ(s)` runs over all of `(0, ∞)`.
pub fn onto_builtin() -> impl Strategy<Value = PhiSpec> {
    prop_oneof![
        (1.2f64..10.0).prop_map(PhiSpec::power),
        (1.2f64..6.0).prop_map(PhiSpec::zygmund),
        (1.5f64..3.0).prop_map(PhiSpec::exp_power),
        Just(PhiSpec::ratio4()),
        Just(PhiSpec::ratio_log()),
    ]
}

pub fn finite_lambda0_builtin() -> impl Strategy<Value = PhiSpec> {
    prop_oneof![
        (1.2f64..10.0).prop_map(PhiSpec::power),
        (1.2f64..6.0).prop_map(PhiSpec::zygmund),
        Just(PhiSpec::ratio4()),
        Just(PhiSpec::ratio_log()),
    ]
}

/// Log-spaced `s` on which φ and its integrals stay finite.
pub fn s_samples(phi: &PhiSpec, n: usize) -> Vec<f64> {
    let hi = if phi.label().starts_with("exp_power") { 8.0 } else { 1e6 };
    log_space(1e-4, hi, n)
}

pub fn t_samples(phi: &PhiSpec, n: usize) -> Vec<f64> {
    s_samples(phi, n).into_iter().map(|s| phi.s_sqrt_phi(s).unwrap()).collect()
}

pub fn inverse_identity() -> Outcome {
    run(24, any_builtin(), |phi| {
        let aux = AuxBundle::new(phi.clone());
        for s in s_samples(&phi, 1000) {
            let t = ok(phi.s_sqrt_phi(s))?;
            let z = ok(aux.zeta(t))?;
            ensure((z - s).abs() <= 1e-8 * s.max(1.0), || format!("{}: ζ({t}) = {z}, s = {s}", phi.label()))?;
        }
        Ok(())
    })
}

pub fn normalization() -> Outcome {
    run(24, any_builtin(), |phi| {
        let aux = AuxBundle::new(phi.clone());
        for t in t_samples(&phi, 1000) {
            let th = ok(aux.theta(t))?;
            let v = th * th * ok(phi.phi(ok(aux.zeta(t))?))?;
            ensure((v - 1.0).abs() <= 1e-8, || format!("{}: Θ²φ(ζ) = {v} at t = {t}", phi.label()))?;
        }
        Ok(())
    })
}

pub fn lambda_range() -> Outcome {
    run(24, any_builtin(), |phi| {
        let aux = AuxBundle::new(phi.clone());
        for t in t_samples(&phi, 1000) {
            let l = ok(aux.lambda_fn(t))?;
            ensure(l.abs() <= 1.0 - 1e-12, || format!("{}: Λ({t}) = {l}", phi.label()))?;
        }
        Ok(())
    })
}

pub fn duality() -> Outcome {
    run(16, onto_builtin(), |phi| {
        let aux = AuxBundle::new(phi.clone());
        let conj = ok(aux.conjugate())?;
        for t in log_space(1e-3, 1e3, 1000) {
            let (th, la) = ok(aux.duality_check(&conj, t))?;
            ensure(th.abs() <= 1e-6 && la.abs() <= 1e-6, || {
                format!("{}: residuals ({th}, {la}) at t = {t}", phi.label())
            })?;
        }
        Ok(())
    })
}

pub fn conjugacy() -> Outcome {
    run(24, any_builtin(), |phi| {
        let aux = AuxBundle::new(phi.clone());
        // s φ(s) saturates at 1 for arctan_def; inverting it past 1e3 loses
        // digits to cancellation in 1 − t.
        let cap = if phi.label() == "arctan_def" { 1e3 } else { f64::INFINITY };
        for s in s_samples(&phi, 200).into_iter().filter(|&s| s <= cap) {
            let v = ok(phi.phi(s))? * ok(aux.conjugate_psi(ok(phi.s_phi(s))?))?;
            ensure((v - 1.0).abs() <= 1e-8, || format!("{}: φψ = {v} at s = {s}", phi.label()))?;
        }
        Ok(())
    })
}

pub fn scaled_power(c: f64, p: f64) -> PhiSpec {
    PhiSpec::custom(
        &format!("{c}*s^({p}-2)"),
        &format!("{c}*({p}-2)*s^({p}-3)"),
        p - 2.0,
        0.5,
        2.0,
        if p < 2.0 { TailSign::Nonpos } else { TailSign::Nonneg },
    )
    .unwrap()
}

pub fn power_constancy() -> Outcome {
    run(24, (0.1f64..10.0, 1.1f64..12.0), |(c, p)| {
        let aux = AuxBundle::new(scaled_power(c, p));
        let expect = -(1.0 - 2.0 / p);
        for t in log_space(1e-4, 1e4, 1000) {
            let l = ok(aux.lambda_fn(t))?;
            ensure((l - expect).abs() <= 1e-10, || format!("c={c}, p={p}: Λ({t}) = {l}"))?;
        }
        Ok(())
    })
}

pub fn convexity() -> Outcome {
    run(64, (any_builtin(), -3.0f64..0.9, -3.0f64..0.9), |(phi, la, lb)| {
        let aux = AuxBundle::new(phi.clone());
        let (a, b) = (10f64.powf(la), 10f64.powf(lb));
        let fa = ok(aux.young(a))?;
        let fb = ok(aux.young(b))?;
        let fm = ok(aux.young(0.5 * (a + b)))?;
        let mean = 0.5 * (fa + fb);
        ensure(fm <= mean * (1.0 + 1e-10) + f64::MIN_POSITIVE, || {
            format!("{}: Φ({}) = {fm} > {mean}", phi.label(), 0.5 * (a + b))
        })
    })
}

pub fn orlicz_suite() -> Vec<(&'static str, Outcome)> {
    vec![
        ("inverse identity", inverse_identity()),
        ("normalization", normalization()),
        ("Λ range", lambda_range()),
        ("duality", duality()),
        ("conjugacy", conjugacy()),
        ("power constancy", power_constancy()),
        ("convexity", convexity()),
    ]
}

// ---------------------------------------------------------------- matrices

fn sym(n: usize, v: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[i * n + j] = v[k];
            m[j * n + i] = v[k];
            k += 1;
        }
    }
    m
}

/// Constant matrix with symmetric `Im A`. Re A is `B Bᵀ + shift·I` so that
/// both verdicts occur.
pub fn symmetric_im_matrix() -> impl Strategy<Value = ComplexMatrix> {
    (2usize..=3)
        .prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(-1.0f64..1.0, n * n),
                -0.3f64..1.0,
                proptest::collection::vec(-1.0f64..1.0, n * (n + 1) / 2),
                0.0f64..2.0,
            )
        })
        .prop_map(|(n, b, shift, im, scale)| {
            let mut data = Vec::with_capacity(n * n);
            let im = sym(n, &im);
            for i in 0..n {
                for j in 0..n {
                    let mut re: f64 = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum();
                    if i == j {
                        re += shift;
                    }
                    data.push(Complex64::new(re, scale * im[i * n + j]));
                }
            }
            ComplexMatrix::new(n, data).unwrap()
        })
}

/// Real matrix with positive semidefinite symmetric part.
pub fn real_psd_matrix() -> impl Strategy<Value = ComplexMatrix> {
    (2usize..=3)
        .prop_flat_map(|n| {
            (Just(n), proptest::collection::vec(-1.0f64..1.0, n * n), proptest::collection::vec(-1.0f64..1.0, n * n))
        })
        .prop_map(|(n, b, skew)| {
            let data = (0..n * n)
                .map(|ij| {
                    let (i, j) = (ij / n, ij % n);
                    let psd: f64 = (0..n).map(|k| b[i * n + k] * b[j * n + k]).sum();
                    Complex64::new(psd + skew[ij] - skew[j * n + i], 0.0)
                })
                .collect();
            ComplexMatrix::new(n, data).unwrap()
        })
}

/// `min_t form_min_eig(A, Λ(t))` over the Λ samples of the criterion.
pub fn min_form(crit: &Criterion<'_>, a: &ComplexMatrix) -> fdchk_core::Result<f64> {
    let mut m = f64::INFINITY;
    for lam in crit.lambda_samples() {
        m = m.min(form_min_eig(a, lam)?);
    }
    Ok(m)
}

pub const EQUIVALENCE_PHIS: [&str; 4] = ["power3", "power4", "ratio4", "ratio_log"];

pub fn equivalence_phi(name: &str) -> PhiSpec {
    match name {
        "power3" => PhiSpec::power(3.0),
        "power4" => PhiSpec::power(4.0),
        "ratio4" => PhiSpec::ratio4(),
        _ => PhiSpec::ratio_log(),
    }
}

/// Runs the equivalence check on `cases` random matrices per weight and
/// returns the number of disagreements and the counts of each verdict.
pub fn equivalence_counts(cases: u32) -> Result<(usize, usize, usize), String> {
    let mut dis = 0;
    let mut pass = 0;
    let mut fail = 0;
    for name in EQUIVALENCE_PHIS {
        let aux = AuxBundle::new(equivalence_phi(name));
        let crit = Criterion::new(&aux, SamplingConfig::default()).map_err(|e| e.to_string())?;
        let mut r = runner(cases);
        let strat = symmetric_im_matrix();
        for _ in 0..cases {
            let a = strat.new_tree(&mut r).map_err(|e| e.to_string())?.current();
            let field = MatrixField::constant(&a);
            let report = crit.check_pointwise(&field).map_err(|e| e.to_string())?;
            let form_ok = min_form(&crit, &a).map_err(|e| e.to_string())? >= -1e-6;
            let crit_ok = report.verdict == Verdict::Dissipative;
            if crit_ok != form_ok {
                dis += 1;
            }
            if crit_ok {
                pass += 1;
            } else {
                fail += 1;
            }
        }
    }
    Ok((dis, pass, fail))
}

pub fn equivalence() -> Outcome {
    let (dis, pass, fail) = equivalence_counts(250)?;
    if dis == 0 && pass > 0 && fail > 0 {
        Ok(())
    } else {
        Err(format!("{dis} disagreements ({pass} pass, {fail} fail)"))
    }
}

pub fn scaling() -> Outcome {
    run(32, (symmetric_im_matrix(), 0.01f64..100.0, finite_lambda0_builtin()), |(a, c, phi)| {
        let aux = AuxBundle::new(phi);
        let crit = ok(Criterion::new(&aux, SamplingConfig::default()))?;
        let f1 = MatrixField::constant(&a);
        let fc = MatrixField::constant(&a.scaled(c));
        let (r1, rc) = (ok(crit.check_pointwise(&f1))?, ok(crit.check_pointwise(&fc))?);
        ensure(r1.verdict == rc.verdict, || format!("verdict changed under scaling by {c}"))?;
        let close = |x: f64, y: f64| (c * x - y).abs() <= 1e-9 * (c * x.abs()).max(1e-12);
        ensure(close(r1.worst_margin, rc.worst_margin), || {
            format!("pointwise margin {} vs {} at c = {c}", r1.worst_margin, rc.worst_margin)
        })?;
        let (s1, sc) = (ok(crit.sufficient_condition(&f1))?, ok(crit.sufficient_condition(&fc))?);
        ensure(close(s1.margin, sc.margin), || format!("form margin {} vs {} at c = {c}", s1.margin, sc.margin))
    })
}

pub fn lambda0_monotonicity() -> Outcome {
    run(48, (symmetric_im_matrix(), finite_lambda0_builtin(), finite_lambda0_builtin()), |(a, p1, p2)| {
        let (x1, x2) = (AuxBundle::new(p1), AuxBundle::new(p2));
        let c1 = ok(Criterion::new(&x1, SamplingConfig::default()))?;
        let c2 = ok(Criterion::new(&x2, SamplingConfig::default()))?;
        let (lo, hi) = if c1.lambda0().value <= c2.lambda0().value { (&c1, &c2) } else { (&c2, &c1) };
        let field = MatrixField::constant(&a);
        let d_hi = ok(hi.check_pointwise(&field))?.verdict == Verdict::Dissipative;
        let d_lo = ok(lo.check_pointwise(&field))?.verdict == Verdict::Dissipative;
        ensure(!d_hi || d_lo, || {
            format!("dissipative for λ₀ = {} but not for λ₀ = {}", hi.lambda0().value, lo.lambda0().value)
        })
    })
}

pub fn lambda0_upper_bound() -> Outcome {
    run(48, (finite_lambda0_builtin(), -8.0f64..8.0), |(phi, ls)| {
        let aux = AuxBundle::new(phi.clone());
        let crit = ok(Criterion::new(&aux, SamplingConfig::default()))?;
        let s = 10f64.powf(ls);
        let g = ok(phi.lambda0_integrand(s))?;
        ensure(g <= crit.lambda0().value + 1e-9, || format!("{}: g({s}) = {g} > λ₀", phi.label()))
    })
}

pub fn form_min_eig_brute_force() -> Outcome {
    let strat = (symmetric_im_matrix().prop_filter("2x2", |a| a.dim() == 2), -0.99f64..0.99, any::<u64>());
    run(16, strat, |(a, lam, seed)| {
        use rand::{Rng, SeedableRng};
        let (min, v) = ok(form_min_eig_with_vector(&a, lam))?;
        let q = fdchk_core::criterion::block_form(&a, lam);
        let scale = a.max_abs().max(1.0);
        ensure((q.quadratic_form(&v) - min).abs() <= 1e-9 * scale, || "eigenvector misses the minimum".into())?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut best = f64::INFINITY;
        let mut best_x = vec![0.0; 4];
        for _ in 0..100_000 {
            let mut x: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            if n < 1e-3 {
                continue;
            }
            x.iter_mut().for_each(|c| *c /= n);
            let val = q.quadratic_form(&x);
            ensure(val >= min - 1e-9 * scale, || format!("sample {val} below eigenvalue {min}"))?;
            if val < best {
                best = val;
                best_x = x;
            }
        }
        // Polish the best sample by inverse iteration towards the smallest eigenvalue.
        let polished = rayleigh_polish(&q, best_x, min - 1e-3 * scale);
        ensure((polished - min).abs() <= 1e-6 * scale, || format!("brute force {polished} vs {min}"))
    })
}

fn rayleigh_polish(q: &fdchk_core::numeric::eigen::SymMatrix, mut x: Vec<f64>, shift: f64) -> f64 {
    let n = q.dim();
    for _ in 0..50 {
        // Solve (Q − shift I) y = x by Gaussian elimination.
        let mut m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| q.get(i, j) - if i == j { shift } else { 0.0 }).chain([x[i]]).collect())
            .collect();
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
            m.swap(c, p);
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
        let mut y = vec![0.0; n];
        for r in (0..n).rev() {
            y[r] = (m[r][n] - (r + 1..n).map(|k| m[r][k] * y[k]).sum::<f64>()) / m[r][r];
        }
        let norm = y.iter().map(|c| c * c).sum::<f64>().sqrt();
        x = y.into_iter().map(|c| c / norm).collect();
    }
    q.quadratic_form(&x)
}

pub fn real_psd_sufficient() -> Outcome {
    run(48, (real_psd_matrix(), any_builtin()), |(a, phi)| {
        let aux = AuxBundle::new(phi.clone());
        let crit = ok(Criterion::new(&aux, SamplingConfig::default()))?;
        let m = ok(crit.sufficient_condition(&MatrixField::constant(&a)))?;
        ensure(m.holds, || format!("{}: sufficient condition failed with margin {}", phi.label(), m.margin))
    })
}

pub fn criterion_suite() -> Vec<(&'static str, Outcome)> {
    vec![
        ("equivalence", equivalence()),
        ("scaling", scaling()),
        ("λ₀ monotonicity", lambda0_monotonicity()),
        ("λ₀ upper bound", lambda0_upper_bound()),
        ("form_min_eig brute force", form_min_eig_brute_force()),
        ("real PSD sufficient", real_psd_sufficient()),
    ]
}

// ---------------------------------------------------------------- dsl

pub fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        prop_oneof![
            (0u32..1000).prop_map(|k| k as f64 / 8.0),
            (0.0f64..1e6),
            (-30.0f64..30.0).prop_map(|e| 10f64.powf(e))
        ]
        .prop_map(Expr::Num),
        prop_oneof![Just(Constant::Pi), Just(Constant::E)].prop_map(Expr::Const),
        prop_oneof![Just(Var::X1), Just(Var::X2), Just(Var::X3), Just(Var::S)].prop_map(Expr::Var),
    ];
    leaf.prop_recursive(7, 64, 2, |inner| {
        let op = prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul), Just(BinOp::Div), Just(BinOp::Pow)];
        let unary = prop_oneof![
            Just(Func::Sin),
            Just(Func::Cos),
            Just(Func::Exp),
            Just(Func::Log),
            Just(Func::Sqrt),
            Just(Func::Abs),
            Just(Func::Atan)
        ];
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, a, b)| Expr::Binary(o, Box::new(a), Box::new(b))),
            (unary, inner.clone()).prop_map(|(f, a)| Expr::Call(f, vec![a])),
            (prop_oneof![Just(Func::Min), Just(Func::Max)], inner.clone(), inner)
                .prop_map(|(f, a, b)| Expr::Call(f, vec![a, b])),
        ]
    })
}

fn depth(e: &Expr) -> usize {
    match e {
        Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => 1,
        Expr::Neg(a) => 1 + depth(a),
        Expr::Binary(_, a, b) => 1 + depth(a).max(depth(b)),
        Expr::Call(_, args) => 1 + args.iter().map(depth).max().unwrap_or(0),
    }
}

pub fn dsl_round_trip() -> Outcome {
    run(1000, arb_expr(), |e| {
        ensure(depth(&e) <= 8, || format!("depth {}", depth(&e)))?;
        let text = e.to_string();
        let back = dsl::parse(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        ensure(back == e, || format!("{text} reparsed as {back:?}"))
    })
}

pub fn dsl_purity() -> Outcome {
    run(200, (arb_expr(), proptest::array::uniform4(-2.0f64..2.0)), |(e, v)| {
        let b = Bindings { x: [Some(v[0]), Some(v[1]), Some(v[2])], s: Some(v[3].abs()) };
        let first = e.eval(&b).map(f64::to_bits).ok();
        for _ in 0..3 {
            ensure(e.eval(&b).map(f64::to_bits).ok() == first, || format!("{e} is not pure"))?;
        }
        Ok(())
    })
}

pub fn dsl_suite() -> Vec<(&'static str, Outcome)> {
    let precedence = {
        let ev = |t: &str| dsl::parse(t).unwrap().eval(&Bindings::default()).unwrap();
        if ev("2+3*4") == 14.0 && ev("2^3^2") == 512.0 {
            Ok(())
        } else {
            Err("precedence".to_string())
        }
    };
    vec![("round trip", dsl_round_trip()), ("precedence", precedence), ("purity", dsl_purity())]
}

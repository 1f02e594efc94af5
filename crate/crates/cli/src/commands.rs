use std::f64::consts::PI;
use std::path::Path;

use fdchk_core::config::Config;
use fdchk_core::criterion::{
    form_min_eig, lambda0, ComplexMatrix, Criterion, Lambda0, Lambda0Config, MatrixField, SamplingConfig,
};
use fdchk_core::grid::{GridDomain, GridField};
use fdchk_core::orlicz::{parse_phi_shorthand, validate_phi, AuxBundle, PhiSpec, SampleGrid};
use fdchk_core::pde::{
    dissipativity_integral, evolve_with, probe_search, violation, Envelope, Phase, Probe, ProbeFamily, SolverConfig,
};
use fdchk_core::{Complex64, Error, Result};
use serde_json::{json, Value};

use crate::report::{Format, Provenance, Report, Table};

/// Everything a subcommand may read: the parsed config and the overrides.
pub struct Inputs {
    pub config: Config,
    /// Config text plus the φ shorthand, hashed into the provenance.
    pub fingerprint: Option<String>,
    pub phi: Option<String>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    pub tol: Option<f64>,
    pub grid: Option<Vec<usize>>,
    pub timestamp: bool,
}

impl Inputs {
    pub fn load(
        config: Option<&Path>,
        phi: Option<String>,
        seed: Option<u64>,
        budget: Option<usize>,
        tol: Option<f64>,
        grid: Option<&str>,
        timestamp: bool,
    ) -> Result<Self> {
        let (cfg, text) = match config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                (Config::parse(&text)?, Some(text))
            }
            None => (Config::default(), None),
        };
        let fingerprint = match (&text, &phi) {
            (None, None) => None,
            (t, p) => Some(format!("{}{}", t.as_deref().unwrap_or(""), p.as_deref().unwrap_or(""))),
        };
        if let Some(t) = tol {
            if t.is_nan() || t < 0.0 {
                return Err(Error::Config(format!("--tol must be non-negative, got {t}")));
            }
        }
        Ok(Inputs {
            config: cfg,
            fingerprint,
            phi,
            seed,
            budget,
            tol,
            grid: grid.map(parse_grid).transpose()?,
            timestamp,
        })
    }

    fn provenance(&self) -> Provenance {
        Provenance::new(self.fingerprint.as_deref(), self.timestamp)
    }

    fn phi_spec(&self) -> Result<PhiSpec> {
        match &self.phi {
            Some(s) => parse_phi_shorthand(s),
            None => self.config.phi_spec(),
        }
    }

    fn sampling(&self) -> Result<SamplingConfig> {
        let mut s = self.config.sampling.clone();
        if let Some(t) = self.tol {
            s.tol = t;
        }
        if let Some(g) = &self.grid {
            if g.iter().any(|&n| n != g[0]) {
                return Err(Error::Config("op-check samples a uniform grid; use --grid NxN".into()));
            }
            s.x_points = Some(g[0]);
        }
        Ok(s)
    }

    /// `--grid` on the configured lengths (unit box if none), else `[domain]`,
    /// else `fallback` cells per axis on the unit box of dimension `dims`.
    fn domain(&self, dims: usize, fallback: usize) -> Result<GridDomain> {
        match (&self.grid, &self.config.domain) {
            (Some(nodes), Some(d)) => GridDomain::new(d.lengths.clone(), nodes.clone()),
            (Some(nodes), None) => GridDomain::new(vec![1.0; nodes.len()], nodes.clone()),
            (None, Some(_)) => self.config.grid_domain(),
            (None, None) => GridDomain::new(vec![1.0; dims], vec![fallback; dims]),
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let nodes = text
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("--grid expects N or NxM, got `{text}`")))?;
    if nodes.is_empty() || nodes.len() > 2 || nodes.contains(&0) {
        return Err(Error::Config(format!("--grid expects N or NxM with positive sizes, got `{text}`")));
    }
    Ok(nodes)
}

fn value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn fmt_lambda0(l: &Lambda0) -> String {
    if l.is_finite() {
        format!("{}", l.value)
    } else {
        "inf".into()
    }
}

pub fn phi_validate(inp: &Inputs) -> Result<Report> {
    let phi = inp.phi_spec()?;
    let (result, headline) = match validate_phi(&phi, SampleGrid::default()) {
        Ok(r) => {
            let head = format!("{}: {}", phi.label(), if r.valid { "valid" } else { "not valid" });
            (value(&r), head)
        }
        // Fatal admissibility failures are a verdict, not a crash.
        Err(e @ (Error::NonPositivePhi { .. } | Error::NonMonotone { .. } | Error::ExponentMismatch { .. })) => {
            let head = format!("{}: not valid ({e})", phi.label());
            (json!({ "phi": phi.label(), "valid": false, "fatal": e.to_string() }), head)
        }
        Err(e) => return Err(e),
    };
    let mut prov = inp.provenance();
    let g = SampleGrid::default();
    prov.tolerances.insert("sample_range".into(), json!([g.lo, g.hi]));
    prov.tolerances.insert("samples".into(), json!(g.n));
    Ok(Report { command: "phi-validate", provenance: prov, result, table: None, headline })
}

pub fn phi_lambda0(inp: &Inputs) -> Result<Report> {
    let phi = inp.phi_spec()?;
    let cfg = inp.config.sampling.lambda0;
    let l = lambda0(&phi, &cfg)?;
    let mut prov = inp.provenance();
    prov.tolerances.insert("lambda0".into(), value(&cfg));
    Ok(Report {
        command: "phi-lambda0",
        provenance: prov,
        result: json!({ "phi": phi.label(), "lambda0": value(&l) }),
        table: None,
        headline: format!("λ₀ = {}", fmt_lambda0(&l)),
    })
}

pub fn op_check(inp: &Inputs) -> Result<Report> {
    let phi = inp.phi_spec()?;
    let a = inp.config.matrix_field()?;
    let sampling = inp.sampling()?;
    let aux = AuxBundle::new(phi.clone());
    let crit = Criterion::new(&aux, sampling.clone())?;
    let r = crit.check_operator(&a)?;
    let mut prov = inp.provenance();
    prov.tolerance("tol", sampling.tol);
    prov.grid = sampling.x_points.map(|n| vec![n; a.dim()]);
    let headline = format!("{:?} (λ₀ = {}, worst margin {:e})", r.verdict, fmt_lambda0(crit.lambda0()), r.worst_margin);
    Ok(Report {
        command: "op-check",
        provenance: prov,
        result: json!({ "phi": phi.label(), "report": value(&r) }),
        table: None,
        headline,
    })
}

pub fn op_probe(inp: &Inputs) -> Result<Report> {
    let phi = inp.phi_spec()?;
    let a = inp.config.matrix_field()?;
    if a.dim() > 2 {
        return Err(Error::Config("probe search supports one and two dimensions".into()));
    }
    let domain = inp.domain(a.dim(), 64)?;
    let mut probe = inp.config.probe();
    if let Some(s) = inp.seed {
        probe.seed = s;
    }
    if let Some(b) = inp.budget {
        probe.budget = b;
    }
    let family = probe.to_family()?;
    let aux = AuxBundle::new(phi.clone());
    let r = probe_search(&a, &aux, &domain, &family, probe.budget)?;
    let mut prov = inp.provenance();
    prov.grid = Some(domain.nodes().to_vec());
    prov.seed = Some(probe.seed);
    prov.budget = Some(probe.budget);
    prov.tolerance("certify_rel", fdchk_core::pde::probe::CERTIFY_REL);
    let headline = format!(
        "best V = {:e} ({}) after {} evaluations",
        r.best_value,
        if r.certified { "violation certified" } else { "no violation found" },
        r.evaluations
    );
    Ok(Report {
        command: "op-probe",
        provenance: prov,
        result: json!({
            "phi": phi.label(),
            "family": value(&family),
            "grid": { "lengths": domain.lengths(), "nodes": domain.nodes() },
            "report": value(&r),
        }),
        table: None,
        headline,
    })
}

pub fn evolve(inp: &Inputs) -> Result<Report> {
    let phi = inp.phi_spec()?;
    let a = inp.config.matrix_field()?;
    let domain = inp.domain(a.dim(), 64)?;
    let time = inp.config.time()?;
    let mut init = inp.config.clone();
    if let (Some(s), Some(i)) = (inp.seed, init.initial.as_mut()) {
        i.noise_seed = s;
    }
    let u0 = init.initial_field(&domain)?;
    let mut solver = SolverConfig::default();
    if let Some(t) = inp.tol {
        solver.rel_tol = t;
    }
    let aux = AuxBundle::new(phi.clone());
    let tr = evolve_with(&a, &aux, &u0, time.dt, time.steps, solver)?;
    let mut prov = inp.provenance();
    prov.grid = Some(domain.nodes().to_vec());
    prov.seed = init.initial.as_ref().map(|i| i.noise_seed);
    prov.tolerance("solver_rel_tol", solver.rel_tol);
    let last = tr.rows.last().expect("at least the initial row");
    let headline = format!(
        "t = {}: Orlicz integral {:e}, Luxemburg norm {:e}, L² norm {:e}",
        last.t, last.orlicz_integral, last.luxemburg_norm, last.l2_norm
    );
    let table = Table {
        header: ["t", "orlicz_integral", "luxemburg_norm", "l2_norm"].map(String::from).to_vec(),
        rows: tr
            .rows
            .iter()
            .map(|r| [r.t, r.orlicz_integral, r.luxemburg_norm, r.l2_norm].map(|v| format!("{v:e}")).to_vec())
            .collect(),
    };
    Ok(Report {
        command: "evolve",
        provenance: prov,
        result: json!({
            "phi": phi.label(),
            "dt": time.dt,
            "steps": time.steps,
            "rows": value(&tr.rows),
            "iterations": tr.iterations,
        }),
        table: Some(table),
        headline,
    })
}

/// Writes the λ₀ table and both matrix reproductions into `dir`, one file
/// each in `format`, and returns a summary listing them.
pub fn examples(inp: &Inputs, dir: &Path, format: Format) -> Result<Report> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Config(format!("cannot create {}: {e}", dir.display())))?;
    let reports = [lambda0_table(inp)?, skew_imaginary(inp)?, linear_skew(inp)?];
    let mut files = Vec::new();
    for (name, r) in ["lambda0_table", "skew_imaginary", "linear_skew"].iter().zip(&reports) {
        let path = dir.join(format!("{name}.{}", format.extension()));
        std::fs::write(&path, r.render(format))
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
        files.push(json!({ "file": path.display().to_string(), "summary": r.headline }));
    }
    Ok(Report {
        command: "examples",
        provenance: inp.provenance(),
        headline: format!("wrote {} reports to {}", files.len(), dir.display()),
        result: json!({ "files": files }),
        table: None,
    })
}

fn lambda0_table(inp: &Inputs) -> Result<Report> {
    let r3 = 3f64.sqrt();
    let power = |p: f64| (p - 2.0f64).abs() / (2.0 * (p - 1.0f64).sqrt());
    let rows: Vec<(PhiSpec, Option<f64>)> = vec![
        (PhiSpec::power(1.5), Some(power(1.5))),
        (PhiSpec::power(2.0), Some(0.0)),
        (PhiSpec::power(3.0), Some(power(3.0))),
        (PhiSpec::power(4.0), Some(1.0 / r3)),
        (PhiSpec::power(10.0), Some(power(10.0))),
        (PhiSpec::ratio4(), Some(1.0 / r3)),
        (PhiSpec::ratio_log(), Some(2.0 / 5f64.sqrt())),
        (PhiSpec::zygmund(3.0), None),
        (PhiSpec::exp_power(1.0), Some(f64::INFINITY)),
        (PhiSpec::exp_power(2.0), Some(f64::INFINITY)),
        (PhiSpec::arctan_def(), Some(f64::INFINITY)),
    ];
    let cfg: Lambda0Config = inp.config.sampling.lambda0;
    let mut table = Table {
        header: ["phi", "lambda0", "expected", "abs_error", "argmax"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    let mut out = Vec::new();
    for (phi, expect) in rows {
        let l = lambda0(&phi, &cfg)?;
        let err = match expect {
            Some(e) if e.is_finite() && l.is_finite() => Some((l.value - e).abs()),
            _ => None,
        };
        let show = |v: Option<f64>| match v {
            Some(x) if x.is_infinite() => "inf".to_string(),
            Some(x) => format!("{x}"),
            None => String::new(),
        };
        table.rows.push(vec![phi.label(), fmt_lambda0(&l), show(expect), show(err), show(l.argmax)]);
        out.push(json!({
            "phi": phi.label(),
            "lambda0": value(&l),
            "expected": expect.map(|e| if e.is_finite() { json!(e) } else { json!("inf") }),
            "abs_error": err,
        }));
    }
    let mut prov = inp.provenance();
    prov.tolerances.insert("lambda0".into(), value(&cfg));
    Ok(Report {
        command: "examples",
        provenance: prov,
        result: json!({ "table": out }),
        table: Some(table),
        headline: "λ₀ for the builtin weights".into(),
    })
}

fn skew_imaginary(inp: &Inputs) -> Result<Report> {
    let aux = AuxBundle::new(PhiSpec::power(4.0));
    let crit = Criterion::new(&aux, SamplingConfig::default())?;
    let domain = inp.domain(2, 48)?;
    // A fixed complex probe: the operator is the Laplacian for every γ.
    let probe = Probe {
        envelope: Envelope::Bump { center: [0.45, 0.55], a: 0.3, b: 0.2, angle: 0.7 },
        amplitude: 1.3,
        phase: Phase::Plane { lambda: 6.0, angle: 1.1 },
    };
    let u = probe.field(&domain);
    let base = dissipativity_integral(&MatrixField::constant(&ComplexMatrix::identity(2)), &u, &aux)?;
    let mut table = Table {
        header: ["gamma", "form_min_eig", "expected", "block_form_holds", "integral", "integral_identity"]
            .map(String::from)
            .to_vec(),
        rows: Vec::new(),
    };
    let mut out = Vec::new();
    for g in [0.5, 1.0, 2.0] {
        let field = MatrixField::skew_imaginary(g);
        let m = field.eval(&[0.0, 0.0])?;
        let eig = form_min_eig(&m, 0.0)?;
        let suff = crit.sufficient_condition(&field)?;
        let f = dissipativity_integral(&field, &u, &aux)?;
        table.rows.push(vec![
            format!("{g}"),
            format!("{eig}"),
            format!("{}", 1.0 - g),
            format!("{}", suff.holds),
            format!("{f:e}"),
            format!("{base:e}"),
        ]);
        out.push(json!({
            "gamma": g,
            "form_min_eig": eig,
            "expected": 1.0 - g,
            "block_form": value(&suff),
            "integral": f,
            "integral_identity": base,
        }));
    }
    let mut prov = inp.provenance();
    prov.grid = Some(domain.nodes().to_vec());
    prov.tolerance("tol", crit.config().tol);
    Ok(Report {
        command: "examples",
        provenance: prov,
        result: json!({ "phi": aux.phi().label(), "rows": out }),
        table: Some(table),
        headline: "A = [[1, iγ], [−iγ, 1]]: same integral as A = I for every γ".into(),
    })
}

fn linear_skew(inp: &Inputs) -> Result<Report> {
    let lambda = 9.0;
    let t = -lambda / 2.0;
    let a = MatrixField::linear_skew_imaginary(lambda);
    let aux = AuxBundle::new(PhiSpec::power(2.0));
    let domain = inp.domain(2, 128)?;
    let u =
        GridField::from_fn(domain.clone(), |x| Complex64::from_polar((PI * x[0]).sin() * (PI * x[1]).sin(), t * x[1]));
    let v = violation(&a, &u, &aux)?;
    let exact = -PI * PI / 2.0 + lambda * lambda / 16.0;
    let budget = inp.budget.unwrap_or(2000);
    let seed = inp.seed.unwrap_or(0);
    let search_grid = GridDomain::rectangle(1.0, 1.0, 64, 64)?;
    let search = probe_search(&a, &aux, &search_grid, &ProbeFamily::combined(seed), budget)?;
    let mut prov = inp.provenance();
    prov.grid = Some(domain.nodes().to_vec());
    prov.seed = Some(seed);
    prov.budget = Some(budget);
    let table = Table {
        header: ["quantity", "value"].map(String::from).to_vec(),
        rows: vec![
            vec!["violation".into(), format!("{v}")],
            vec!["closed_form".into(), format!("{exact}")],
            vec!["relative_error".into(), format!("{:e}", (v - exact) / exact)],
            vec!["search_best_value".into(), format!("{:e}", search.best_value)],
            vec!["search_certified".into(), format!("{}", search.certified)],
        ],
    };
    Ok(Report {
        command: "examples",
        provenance: prov,
        result: json!({
            "lambda": lambda,
            "t": t,
            "violation": v,
            "closed_form": exact,
            "relative_error": (v - exact) / exact,
            "search": value(&search),
        }),
        table: Some(table),
        headline: format!("A = [[1, i9x₁], [−i9x₁, 1]]: V = {v:.6} vs {exact:.6}"),
    })
}

//! Complex coefficient matrices and spatially varying coefficient fields.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsl::{self, Bindings, Expr};
use crate::error::{Error, Result};
use crate::numeric::eigen::SymMatrix;

/// Dense complex `n × n` matrix, row-major, `n ∈ {1, 2, 3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if !(1..=3).contains(&n) || data.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "matrix must be n×n with n in 1..=3, got n = {n} and {} entries",
                data.len()
            )));
        }
        if data.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        Ok(ComplexMatrix { n, data })
    }

    /// From real and imaginary parts given as row slices.
    pub fn from_parts(re: &[&[f64]], im: &[&[f64]]) -> Result<Self> {
        let n = re.len();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            if re[i].len() != n || im.len() != n || im[i].len() != n {
                return Err(Error::InvalidInput("ragged matrix parts".into()));
            }
            for j in 0..n {
                data.push(Complex64::new(re[i][j], im[i][j]));
            }
        }
        Self::new(n, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        ComplexMatrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scaled(&self, c: f64) -> Self {
        ComplexMatrix { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(Re A + (Re A)ᵀ)/2`.
    pub fn sym_re(&self) -> SymMatrix {
        self.sym_part(|z| z.re)
    }

    /// `(Im A + (Im A)ᵀ)/2`.
    pub fn sym_im(&self) -> SymMatrix {
        self.sym_part(|z| z.im)
    }

    fn sym_part(&self, f: impl Fn(Complex64) -> f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                m.set(i, j, 0.5 * (f(self.get(i, j)) + f(self.get(j, i))));
            }
        }
        m
    }

    /// `max |Im a_ij − Im a_ji|`.
    pub fn im_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j).im - self.get(j, i).im).abs());
            }
        }
        worst
    }

    /// Whether `Im A` is symmetric up to `tol · max|a_ij|`.
    pub fn im_symmetric(&self, tol: f64) -> bool {
        self.im_asymmetry() <= tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    /// `⟨Re A ξ, ξ⟩` for real `ξ`.
    pub fn quad_re(&self, xi: &[f64]) -> f64 {
        self.quad(xi, |z| z.re)
    }

    /// `⟨Im A ξ, ξ⟩` for real `ξ`.
    pub fn quad_im(&self, xi: &[f64]) -> f64 {
        self.quad(xi, |z| z.im)
    }

    fn quad(&self, xi: &[f64], f: impl Fn(Complex64) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += f(self.get(i, j)) * xi[i] * xi[j];
            }
        }
        acc
    }
}

/// One entry of a coefficient field: real and imaginary part expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryExpr {
    pub re: Expr,
    pub im: Expr,
}

/// `A(x)` on a box; entries are expressions in `x1, x2, x3`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    n: usize,
    entries: Vec<EntryExpr>,
}

/// TOML form of a single matrix entry: `{ re = "...", im = "..." }`.
/// Either part may be a string expression or a plain number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    #[serde(default = "zero_source")]
    pub re: ExprSource,
    #[serde(default = "zero_source")]
    pub im: ExprSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExprSource {
    Number(f64),
    Text(String),
}

fn zero_source() -> ExprSource {
    ExprSource::Number(0.0)
}

impl ExprSource {
    pub fn to_expr(&self) -> Result<Expr> {
        match self {
            ExprSource::Number(v) => Ok(Expr::Num(*v)),
            ExprSource::Text(t) => Ok(dsl::parse(t)?),
        }
    }
}

impl MatrixField {
    pub fn constant(a: &ComplexMatrix) -> Self {
        let entries = a.entries().iter().map(|z| EntryExpr { re: Expr::Num(z.re), im: Expr::Num(z.im) }).collect();
        MatrixField { n: a.dim(), entries }
    }

    /// Parses `n × n` entry expressions, row-major.
    pub fn from_sources(n: usize, entries: &[(String, String)]) -> Result<Self> {
        if !(1..=3).contains(&n) || entries.len() != n * n {
            return Err(Error::Config(format!("expected {} matrix entries for dimension {n}", n * n)));
        }
        let entries = entries
            .iter()
            .map(|(re, im)| Ok(EntryExpr { re: dsl::parse(re)?, im: dsl::parse(im)? }))
            .collect::<Result<_>>()?;
        Ok(MatrixField { n, entries })
    }

    pub fn from_config(rows: &[Vec<EntryConfig>]) -> Result<Self> {
        let n = rows.len();
        if !(1..=3).contains(&n) || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Config(format!("matrix entries must form a square array of size 1..=3, got {n} rows")));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|e| Ok(EntryExpr { re: e.re.to_expr()?, im: e.im.to_expr()? }))
            .collect::<Result<_>>()?;
        Ok(MatrixField { n, entries })
    }

    pub fn to_config(&self) -> Vec<Vec<EntryConfig>> {
        let src = |e: &Expr| match e {
            Expr::Num(v) => ExprSource::Number(*v),
            other => ExprSource::Text(other.to_string()),
        };
        self.entries
            .chunks(self.n)
            .map(|row| row.iter().map(|e| EntryConfig { re: src(&e.re), im: src(&e.im) }).collect())
            .collect()
    }

    /// `[[1, iγ], [−iγ, 1]]`: constant skew imaginary part. The operator is
    /// the Laplacian for every γ.
    pub fn skew_imaginary(gamma: f64) -> Self {
        Self::constant(&two_by_two(0.0, gamma, -gamma))
    }

    /// `[[1, ib], [ib, 1]]`: constant symmetric imaginary part.
    pub fn symmetric_imaginary(b: f64) -> Self {
        Self::constant(&two_by_two(0.0, b, b))
    }

    /// `[[1, iλx₁], [−iλx₁, 1]]`: `⟨Im A ξ, ξ⟩ ≡ 0` yet the operator is
    /// `Δ + iλ∂₂` on functions vanishing on the boundary.
    pub fn linear_skew_imaginary(lambda: f64) -> Self {
        let num = |v: f64| Expr::Num(v);
        let lx = Expr::Binary(crate::dsl::BinOp::Mul, Box::new(num(lambda)), Box::new(Expr::Var(crate::dsl::Var::X1)));
        let entries = vec![
            EntryExpr { re: num(1.0), im: num(0.0) },
            EntryExpr { re: num(0.0), im: lx.clone() },
            EntryExpr { re: num(0.0), im: Expr::Neg(Box::new(lx)) },
            EntryExpr { re: num(1.0), im: num(0.0) },
        ];
        MatrixField { n: 2, entries }
    }

    /// Builtin fields by name: `identity`, `skew_imaginary`,
    /// `symmetric_imaginary`, `linear_skew_imaginary`.
    pub fn builtin(name: &str, n: usize, param: Option<f64>) -> Result<Self> {
        let need = || param.ok_or_else(|| Error::Config(format!("builtin matrix `{name}` needs a parameter")));
        match name {
            "identity" => {
                if !(1..=3).contains(&n) {
                    return Err(Error::Config(format!("identity dimension must be 1..=3, got {n}")));
                }
                Ok(Self::constant(&ComplexMatrix::identity(n)))
            }
            "skew_imaginary" => Ok(Self::skew_imaginary(need()?)),
            "symmetric_imaginary" => Ok(Self::symmetric_imaginary(need()?)),
            "linear_skew_imaginary" => Ok(Self::linear_skew_imaginary(need()?)),
            other => Err(Error::Config(format!("unknown builtin matrix `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[EntryExpr] {
        &self.entries
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(|e| e.re.is_spatially_constant() && e.im.is_spatially_constant())
    }

    pub fn eval(&self, x: &[f64]) -> Result<ComplexMatrix> {
        let b = Bindings::at_point(x);
        let data = self
            .entries
            .iter()
            .map(|e| Ok(Complex64::new(e.re.eval(&b)?, e.im.eval(&b)?)))
            .collect::<Result<Vec<_>>>()?;
        ComplexMatrix::new(self.n, data)
    }

    /// `A(x)` at `x` from a box sample set, or the single value when constant.
    pub fn samples(&self, points: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, ComplexMatrix)>> {
        if self.is_constant() {
            let x = points.first().cloned().unwrap_or_else(|| vec![0.0; self.n]);
            return Ok(vec![(x.clone(), self.eval(&x)?)]);
        }
        points.iter().map(|x| Ok((x.clone(), self.eval(x)?))).collect()
    }
}

fn two_by_two(re_off: f64, im_01: f64, im_10: f64) -> ComplexMatrix {
    ComplexMatrix::from_parts(&[&[1.0, re_off], &[re_off, 1.0]], &[&[0.0, im_01], &[im_10, 0.0]])
        .expect("2x2 parts are square")
}

impl From<ComplexMatrix> for MatrixField {
    fn from(a: ComplexMatrix) -> Self {
        MatrixField::constant(&a)
    }
}

//! Second-order discretisations of `Σ ⟨A ∇u, ∇w⟩` on a cell-centred grid.
//!
//! Unknowns sit at cell centres and vanish on the boundary of the box.
//!
//! * The quadrature form, used for the dissipativity integrals, lives on the
//!   dual mesh whose corners are the unknowns and the boundary points. Each
//!   dual cell carries the bilinear gradient of its four corners and `A` at
//!   its centre; the cells next to the boundary are half as wide.
//! * The flux form, whose adjoint is the operator `L`, puts the diagonal
//!   entries `a_kk` on cell faces (two-point differences, odd ghost values
//!   and half weight at the boundary) and the mixed entries on interior
//!   vertices. `⟨L u, w⟩_h = −F_h(u, w)` holds exactly, and sine modes are
//!   eigenvectors of `L` for `A = I`.

use num_complex::Complex64;

use crate::criterion::{ComplexMatrix, MatrixField};
use crate::error::{Error, Result};
use crate::grid::{GridDomain, GridField};
use crate::orlicz::AuxBundle;

use super::sparse::SparseMatrix;

/// Relative threshold below which nonlinear factors are set to zero.
pub const ZERO_CUTOFF: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy)]
struct Face {
    /// `D u = c₀ u[n₀] + c₁ u[n₁]`.
    terms: [(usize, f64); 2],
    weight: f64,
    a: Complex64,
}

#[derive(Debug, Clone, Copy)]
struct Vertex {
    /// Nodes `(i−1, j−1), (i, j−1), (i−1, j), (i, j)`.
    nodes: [usize; 4],
    inv2h: [f64; 2],
    weight: f64,
    a01: Complex64,
    a10: Complex64,
}

impl Vertex {
    /// Four-point gradient `(C₀v, C₁v)`.
    fn grad(&self, v: &[Complex64]) -> [Complex64; 2] {
        let [ll, hl, lh, hh] = self.nodes.map(|k| v[k]);
        [(hl + hh - ll - lh) * self.inv2h[0], (lh + hh - ll - hl) * self.inv2h[1]]
    }

    fn coeffs(&self) -> [[f64; 4]; 2] {
        let (a, b) = (self.inv2h[0], self.inv2h[1]);
        [[-a, a, -a, a], [-b, -b, b, b]]
    }
}

/// A dual cell. Corners are ordered `(lo, lo), (hi, lo), (lo, hi), (hi, hi)`
/// (only the first two in 1D); `None` is a boundary point.
#[derive(Debug, Clone, Copy)]
struct Cell {
    corners: [Option<usize>; 4],
    /// `1/Δx` in 1D, `(1/(2Δx), 1/(2Δy))` in 2D.
    inv: [f64; 2],
    weight: f64,
    a: [Complex64; 4],
}

impl Cell {
    fn corner_values(&self, v: &[Complex64]) -> [Complex64; 4] {
        self.corners.map(|c| c.map_or(ZERO, |k| v[k]))
    }

    fn grad(&self, v: &[Complex64], dims: usize) -> [Complex64; 2] {
        let [ll, hl, lh, hh] = self.corner_values(v);
        if dims == 1 {
            [(hl - ll) * self.inv[0], ZERO]
        } else {
            [(hl + hh - ll - lh) * self.inv[0], (lh + hh - ll - hl) * self.inv[1]]
        }
    }

    fn centre(&self, v: &[Complex64], dims: usize) -> Complex64 {
        let c = self.corner_values(v);
        if dims == 1 {
            0.5 * (c[0] + c[1])
        } else {
            0.25 * (c[0] + c[1] + c[2] + c[3])
        }
    }

    /// `Σ_ij a_ij x_j conj(y_i)`.
    fn apply(&self, x: &[Complex64; 2], y: &[Complex64; 2], dims: usize) -> Complex64 {
        if dims == 1 {
            return self.a[0] * x[0] * y[0].conj();
        }
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += self.a[2 * i + j] * x[j] * y[i].conj();
            }
        }
        acc
    }

    /// `Σ_ij (a_ij − conj(a_ji)) x_j conj(y_i)`.
    fn apply_skew(&self, x: &[Complex64; 2], y: &[Complex64; 2], dims: usize) -> Complex64 {
        if dims == 1 {
            return (self.a[0] - self.a[0].conj()) * x[0] * y[0].conj();
        }
        let mut acc = ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += (self.a[2 * i + j] - self.a[2 * j + i].conj()) * x[j] * y[i].conj();
            }
        }
        acc
    }
}

/// Dual-mesh intervals along one axis: `(lo corner, hi corner, centre, width)`.
fn dual_intervals(n: usize, h: f64) -> Vec<(Option<usize>, Option<usize>, f64, f64)> {
    (0..=n)
        .map(|k| {
            let lo = k.checked_sub(1);
            let hi = (k < n).then_some(k);
            if k == 0 {
                (lo, hi, 0.25 * h, 0.5 * h)
            } else if k == n {
                (lo, hi, n as f64 * h - 0.25 * h, 0.5 * h)
            } else {
                (lo, hi, k as f64 * h, h)
            }
        })
        .collect()
}

/// `A` sampled on the dual cells, faces and vertices of a grid.
#[derive(Debug, Clone)]
pub struct Discretization {
    domain: GridDomain,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    vertices: Vec<Vertex>,
    coeff_scale: f64,
}

impl Discretization {
    pub fn new(a: &MatrixField, domain: &GridDomain) -> Result<Self> {
        let d = domain.dims();
        if a.dim() != d {
            return Err(Error::InvalidInput(format!("matrix dimension {} does not match grid dimension {d}", a.dim())));
        }
        let nodes = domain.nodes();
        let h: Vec<f64> = (0..d).map(|k| domain.spacing(k)).collect();
        let cell = domain.weight();
        let constant = if a.is_constant() { Some(a.eval(&vec![0.0; d])?) } else { None };
        let mut coeff_scale = 0.0f64;
        let mut eval = |x: &[f64]| -> Result<ComplexMatrix> {
            let m = match &constant {
                Some(m) => m.clone(),
                None => a.eval(x)?,
            };
            coeff_scale = coeff_scale.max(m.max_abs());
            Ok(m)
        };

        let mut cells = Vec::new();
        let ix = dual_intervals(nodes[0], h[0]);
        if d == 1 {
            for &(lo, hi, x, w) in &ix {
                let m = eval(&[x])?;
                cells.push(Cell {
                    corners: [lo, hi, None, None],
                    inv: [1.0 / w, 0.0],
                    weight: w,
                    a: [m.get(0, 0), ZERO, ZERO, ZERO],
                });
            }
        } else {
            let iy = dual_intervals(nodes[1], h[1]);
            for &(xlo, xhi, x, wx) in &ix {
                for &(ylo, yhi, y, wy) in &iy {
                    let at = |i: Option<usize>, j: Option<usize>| Some(domain.index(&[i?, j?]));
                    let m = eval(&[x, y])?;
                    cells.push(Cell {
                        corners: [at(xlo, ylo), at(xhi, ylo), at(xlo, yhi), at(xhi, yhi)],
                        inv: [0.5 / wx, 0.5 / wy],
                        weight: wx * wy,
                        a: [m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)],
                    });
                }
            }
        }

        let mut faces = Vec::new();
        for axis in 0..d {
            let n_ax = nodes[axis];
            let other = if d == 2 { nodes[1 - axis] } else { 1 };
            for j in 0..other {
                for i in 0..=n_ax {
                    let idx = |k: usize| {
                        let mut mi = [0usize; 2];
                        mi[axis] = k;
                        if d == 2 {
                            mi[1 - axis] = j;
                        }
                        domain.index(&mi[..d])
                    };
                    let mut x = vec![0.0; d];
                    x[axis] = i as f64 * h[axis];
                    if d == 2 {
                        x[1 - axis] = (j as f64 + 0.5) * h[1 - axis];
                    }
                    let m = eval(&x)?;
                    let inv = 1.0 / h[axis];
                    let (terms, weight) = if i == 0 {
                        ([(idx(0), 2.0 * inv), (idx(0), 0.0)], 0.5 * cell)
                    } else if i == n_ax {
                        let p = idx(n_ax - 1);
                        ([(p, -2.0 * inv), (p, 0.0)], 0.5 * cell)
                    } else {
                        ([(idx(i - 1), -inv), (idx(i), inv)], cell)
                    };
                    faces.push(Face { terms, weight, a: m.get(axis, axis) });
                }
            }
        }

        let mut vertices = Vec::new();
        if d == 2 {
            for i in 1..nodes[0] {
                for j in 1..nodes[1] {
                    let m = eval(&[i as f64 * h[0], j as f64 * h[1]])?;
                    let (a01, a10) = (m.get(0, 1), m.get(1, 0));
                    if a01 == ZERO && a10 == ZERO {
                        continue;
                    }
                    vertices.push(Vertex {
                        nodes: [
                            domain.index(&[i - 1, j - 1]),
                            domain.index(&[i, j - 1]),
                            domain.index(&[i - 1, j]),
                            domain.index(&[i, j]),
                        ],
                        inv2h: [0.5 / h[0], 0.5 / h[1]],
                        weight: cell,
                        a01,
                        a10,
                    });
                }
            }
        }
        Ok(Discretization { domain: domain.clone(), cells, faces, vertices, coeff_scale })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    /// Largest `|a_ij|` over the sample locations.
    pub fn coeff_scale(&self) -> f64 {
        self.coeff_scale
    }

    fn check(&self, u: &GridField) -> Result<()> {
        if u.domain() != &self.domain {
            return Err(Error::InvalidInput("field lives on a different grid".into()));
        }
        Ok(())
    }

    /// The quadrature form `Σ_cells ω ⟨A ∇u, ∇w⟩` on the dual mesh.
    pub fn form(&self, u: &[Complex64], w: &[Complex64]) -> Complex64 {
        let d = self.domain.dims();
        self.cells.iter().map(|c| c.apply(&c.grad(u, d), &c.grad(w, d), d) * c.weight).sum()
    }

    /// `Σ ω ‖A‖ |∇u| |∇w|`, the size against which the form is judged.
    pub fn form_scale(&self, u: &[Complex64], w: &[Complex64]) -> f64 {
        let d = self.domain.dims();
        let norm = |g: [Complex64; 2]| (g[0].norm_sqr() + g[1].norm_sqr()).sqrt();
        let acc: f64 = self.cells.iter().map(|c| norm(c.grad(u, d)) * norm(c.grad(w, d)) * c.weight).sum();
        acc * self.coeff_scale
    }

    /// The flux form whose adjoint is [`operator`](Self::operator).
    pub fn flux_form(&self, u: &[Complex64], w: &[Complex64]) -> Complex64 {
        let mut acc = ZERO;
        for f in &self.faces {
            let du = u[f.terms[0].0] * f.terms[0].1 + u[f.terms[1].0] * f.terms[1].1;
            let dw = w[f.terms[0].0] * f.terms[0].1 + w[f.terms[1].0] * f.terms[1].1;
            acc += f.a * du * dw.conj() * f.weight;
        }
        for v in &self.vertices {
            let gu = v.grad(u);
            let gw = v.grad(w);
            acc += (v.a01 * gu[1] * gw[0].conj() + v.a10 * gu[0] * gw[1].conj()) * v.weight;
        }
        acc
    }

    /// `w = φ(|u|) u`, zero where `|u|` is below the cutoff.
    pub fn weighted(&self, aux: &AuxBundle, u: &[Complex64]) -> Result<Vec<Complex64>> {
        let max = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let cut = ZERO_CUTOFF * max;
        u.iter()
            .map(|&z| {
                let r = z.norm();
                if r <= cut || r == 0.0 {
                    Ok(ZERO)
                } else {
                    Ok(z * aux.phi().phi(r)?)
                }
            })
            .collect()
    }

    /// `Re F_h(u, φ(|u|) u)`: non-negative for every `u` when the operator
    /// is `L^Φ`-dissipative.
    pub fn dissipativity_integral(&self, aux: &AuxBundle, u: &GridField) -> Result<f64> {
        self.check(u)?;
        let w = self.weighted(aux, u.values())?;
        Ok(self.form(u.values(), &w).re)
    }

    /// The v-form `Re Σ ω [⟨A∇v,∇v⟩ + Λ(|v|)⟨(A−A*)∇|v|, |v|⁻¹v̄∇v⟩ − Λ²(|v|)⟨A∇|v|,∇|v|⟩]`,
    /// with `v`, `|v|⁻¹v̄` and `Λ` taken at the dual-cell centres.
    pub fn form_integral_v(&self, aux: &AuxBundle, v: &GridField) -> Result<f64> {
        self.check(v)?;
        let d = self.domain.dims();
        let vals = v.values();
        let cut = ZERO_CUTOFF * v.max_abs();
        let mut acc = 0.0;
        for c in &self.cells {
            let g = c.grad(vals, d);
            let mut term = c.apply(&g, &g, d).re;
            let mid = c.centre(vals, d);
            let rho = mid.norm();
            if rho > cut && rho > 0.0 {
                let l = aux.lambda_fn(rho)?;
                let unit = mid.conj() / rho;
                let w = [unit * g[0], unit * g[1]];
                let x = [Complex64::new(w[0].re, 0.0), Complex64::new(w[1].re, 0.0)];
                term += l * c.apply_skew(&x, &w, d).re - l * l * c.apply(&x, &x, d).re;
            }
            acc += term * c.weight;
        }
        Ok(acc)
    }

    /// The operator `L` with `⟨L u, w⟩_h = −F_h(u, w)` for the flux form.
    pub fn operator(&self) -> SparseMatrix {
        let n = self.domain.len();
        let inv_cell = 1.0 / self.domain.weight();
        let mut trip = Vec::with_capacity(4 * self.faces.len() + 32 * self.vertices.len());
        for f in &self.faces {
            for &(i, ci) in &f.terms {
                for &(j, cj) in &f.terms {
                    if ci != 0.0 && cj != 0.0 {
                        trip.push((i, j, -f.a * (f.weight * inv_cell * ci * cj)));
                    }
                }
            }
        }
        for v in &self.vertices {
            let c = v.coeffs();
            let s = v.weight * inv_cell;
            for (a, &i) in v.nodes.iter().enumerate() {
                for (b, &j) in v.nodes.iter().enumerate() {
                    let val = v.a01 * (c[0][a] * c[1][b]) + v.a10 * (c[1][a] * c[0][b]);
                    trip.push((i, j, -val * s));
                }
            }
        }
        SparseMatrix::from_triplets(n, trip)
    }
}

/// `Re Σ ⟨A ∇u, ∇(φ(|u|) u)⟩ · cell`.
pub fn dissipativity_integral(a: &MatrixField, u: &GridField, aux: &AuxBundle) -> Result<f64> {
    Discretization::new(a, u.domain())?.dissipativity_integral(aux, u)
}

/// The negated integral: positive values exhibit a violating test function.
pub fn violation(a: &MatrixField, u: &GridField, aux: &AuxBundle) -> Result<f64> {
    Ok(-dissipativity_integral(a, u, aux)?)
}

pub fn form_integral_v(a: &MatrixField, v: &GridField, aux: &AuxBundle) -> Result<f64> {
    Discretization::new(a, v.domain())?.form_integral_v(aux, v)
}

/// `v = √φ(|u|) u`.
pub fn substitute_v(aux: &AuxBundle, u: &GridField) -> Result<GridField> {
    let vals = u
        .values()
        .iter()
        .map(|&z| {
            let r = z.norm();
            if r == 0.0 {
                Ok(z)
            } else {
                Ok(z * aux.phi().phi(r)?.sqrt())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    GridField::new(u.domain().clone(), vals)
}

pub fn assemble_operator(a: &MatrixField, domain: &GridDomain) -> Result<SparseMatrix> {
    Ok(Discretization::new(a, domain)?.operator())
}

//! Cell-centred tensor grids on boxes `[0, L₁] × … × [0, L_d]` and complex
//! fields sampled on them.
//!
//! Node `i` along an axis sits at `(i + ½) h` with `h = L / n`, so every node
//! carries the same quadrature weight `h₁ ⋯ h_d` and the weights sum to the
//! volume of the box. Homogeneous Dirichlet data are imposed by odd
//! reflection across the boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDomain {
    lengths: Vec<f64>,
    nodes: Vec<usize>,
}

impl GridDomain {
    pub fn new(lengths: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.len() > 2 || lengths.len() != nodes.len() {
            return Err(Error::InvalidInput(format!(
                "grid needs 1 or 2 axes with matching lengths and node counts, got {lengths:?} / {nodes:?}"
            )));
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidInput(format!("domain lengths must be positive, got {lengths:?}")));
        }
        if nodes.iter().any(|&n| n < MIN_NODES) {
            return Err(Error::InvalidInput(format!("need at least {MIN_NODES} nodes per axis, got {nodes:?}")));
        }
        Ok(GridDomain { lengths, nodes })
    }

    pub fn interval(length: f64, n: usize) -> Result<Self> {
        Self::new(vec![length], vec![n])
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        Self::new(vec![lx, ly], vec![nx, ny])
    }

    pub fn dims(&self) -> usize {
        self.lengths.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.nodes[axis] as f64
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of every node.
    pub fn weight(&self) -> f64 {
        (0..self.dims()).map(|a| self.spacing(a)).product()
    }

    /// Flat index of multi-index `(i, j)`; axis 0 varies slowest.
    pub fn index(&self, idx: &[usize]) -> usize {
        match self.dims() {
            1 => idx[0],
            _ => idx[0] * self.nodes[1] + idx[1],
        }
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        match self.dims() {
            1 => [flat, 0],
            _ => [flat / self.nodes[1], flat % self.nodes[1]],
        }
    }

    /// Coordinates of node `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mi = self.multi_index(flat);
        (0..self.dims()).map(|a| (mi[a] as f64 + 0.5) * self.spacing(a)).collect()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    domain: GridDomain,
    values: Vec<Complex64>,
}

impl GridField {
    pub fn new(domain: GridDomain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidInput(format!(
                "field has {} values, grid has {} nodes",
                values.len(),
                domain.len()
            )));
        }
        Ok(GridField { domain, values })
    }

    pub fn zeros(domain: GridDomain) -> Self {
        let n = domain.len();
        GridField { domain, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn from_fn<F: FnMut(&[f64]) -> Complex64>(domain: GridDomain, mut f: F) -> Self {
        let values = (0..domain.len()).map(|k| f(&domain.point(k))).collect();
        GridField { domain, values }
    }

    pub fn try_from_fn<F: FnMut(&[f64]) -> Result<Complex64>>(domain: GridDomain, mut f: F) -> Result<Self> {
        let values = (0..domain.len()).map(|k| f(&domain.point(k))).collect::<Result<_>>()?;
        Ok(GridField { domain, values })
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Discrete `L²` norm with the grid weights.
    pub fn l2_norm(&self) -> f64 {
        let w = self.domain.weight();
        (w * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn scaled(&self, c: f64) -> GridField {
        GridField { domain: self.domain.clone(), values: self.values.iter().map(|z| z * c).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_volume() {
        let d = GridDomain::rectangle(2.0, 3.0, 9, 8).unwrap();
        assert!((d.weight() * d.len() as f64 - 6.0).abs() < 1e-12);
        let d = GridDomain::interval(std::f64::consts::PI, 33).unwrap();
        assert!((d.weight() * 33.0 - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn nodes_are_cell_centres() {
        let d = GridDomain::rectangle(1.0, 2.0, 8, 16).unwrap();
        assert_eq!(d.point(0), vec![0.0625, 0.0625]);
        assert_eq!(d.point(d.index(&[7, 15])), vec![0.9375, 1.9375]);
        assert_eq!(d.multi_index(23), [1, 7]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(GridDomain::new(vec![1.0; 3], vec![4; 3]).is_err());
        assert!(GridDomain::new(vec![1.0], vec![7]).is_err());
        assert!(GridDomain::new(vec![-1.0], vec![8]).is_err());
        let d = GridDomain::interval(1.0, 8).unwrap();
        assert!(GridField::new(d, vec![Complex64::new(0.0, 0.0); 3]).is_err());
    }
}

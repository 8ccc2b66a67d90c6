//! Finite-dimensional state space, time grids and trajectories.
//!
//! The abstract Banach space is realized as `R^d` with a selectable norm.
//! Curves in time are stored at the nodes of a uniform grid and read as
//! piecewise constant in between.

use std::ops::{Add, Index, Mul, Sub};

use crate::error::{Error, Result};

/// An element of the state space `R^d`. Components are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid("state vector must have dimension >= 1"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(StateVector(components))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be >= 1");
        StateVector(vec![0.0; dim])
    }

    pub fn constant(dim: usize, value: f64) -> Self {
        assert!(dim >= 1 && value.is_finite());
        StateVector(vec![value; dim])
    }

    pub fn scalar(value: f64) -> Self {
        Self::constant(1, value)
    }

    /// Builds a vector from trusted arithmetic results. Non-finite values
    /// are a programming error at this point.
    pub(crate) fn from_vec_unchecked(components: Vec<f64>) -> Self {
        debug_assert!(!components.is_empty());
        debug_assert!(components.iter().all(|c| c.is_finite()), "non-finite component");
        StateVector(components)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, alpha: f64) -> StateVector {
        StateVector::from_vec_unchecked(self.0.iter().map(|c| alpha * c).collect())
    }

    /// `self + alpha * other`
    pub fn axpy(&self, alpha: f64, other: &StateVector) -> StateVector {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in axpy");
        StateVector::from_vec_unchecked(self.0.iter().zip(&other.0).map(|(a, b)| a + alpha * b).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> StateVector {
        StateVector::from_vec_unchecked(self.0.iter().map(|&c| f(c)).collect())
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for &StateVector {
    type Output = StateVector;
    fn add(self, rhs: &StateVector) -> StateVector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &StateVector {
    type Output = StateVector;
    fn sub(self, rhs: &StateVector) -> StateVector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<&StateVector> for f64 {
    type Output = StateVector;
    fn mul(self, rhs: &StateVector) -> StateVector {
        rhs.scale(self)
    }
}

/// Norm on the state space.
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    Sup,
    L1,
    L2,
    /// `sqrt(sum w_i x_i^2)` with strictly positive weights.
    WeightedL2(Vec<f64>),
}

impl NormKind {
    pub fn weighted_l2(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid("weighted L2 weights must be finite and > 0"));
        }
        Ok(NormKind::WeightedL2(weights))
    }

    pub fn name(&self) -> &'static str {
        match self {
            NormKind::Sup => "sup",
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::WeightedL2(_) => "weighted_l2",
        }
    }
}

pub fn norm(x: &StateVector, kind: &NormKind) -> Result<f64> {
    let c = x.as_slice();
    Ok(match kind {
        NormKind::Sup => c.iter().fold(0.0_f64, |m, v| m.max(v.abs())),
        NormKind::L1 => c.iter().map(|v| v.abs()).sum(),
        NormKind::L2 => c.iter().map(|v| v * v).sum::<f64>().sqrt(),
        NormKind::WeightedL2(w) => {
            x.check_dim(w.len())?;
            c.iter().zip(w).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
        }
    })
}

/// `norm(x - y)`, the distance used by all contraction checks.
pub fn distance(x: &StateVector, y: &StateVector, kind: &NormKind) -> Result<f64> {
    y.check_dim(x.dim())?;
    norm(&(x - y), kind)
}

/// Uniform grid `t_k = k T / n`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be > 0, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::invalid("grid needs at least one step"));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    /// Always false: a grid has at least two nodes.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The step `lambda = T / n`.
    pub fn step(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        assert!(k <= self.steps, "node index {k} out of range");
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.horizon / self.steps as f64
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |k| self.node(k))
    }

    /// Index of the cell `[t_k, t_{k+1})` containing `t`, clamped to the grid.
    pub fn cell_of(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let k = (t / self.step()).floor() as usize;
        k.min(self.steps)
    }
}

/// A curve sampled at the nodes of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    values: Vec<StateVector>,
    norm: NormKind,
}

impl Trajectory {
    pub fn new(grid: TimeGrid, values: Vec<StateVector>, norm: NormKind) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let d = values[0].dim();
        for v in &values {
            v.check_dim(d)?;
        }
        if let NormKind::WeightedL2(w) = &norm {
            values[0].check_dim(w.len())?;
        }
        Ok(Trajectory { grid, values, norm })
    }

    pub fn constant(grid: TimeGrid, value: StateVector, norm: NormKind) -> Self {
        let values = vec![value; grid.len()];
        Trajectory { grid, values, norm }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[StateVector] {
        &self.values
    }

    pub fn norm_kind(&self) -> &NormKind {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn at(&self, k: usize) -> &StateVector {
        &self.values[k]
    }

    /// Piecewise-constant reading between nodes.
    pub fn value_at_time(&self, t: f64) -> &StateVector {
        &self.values[self.grid.cell_of(t)]
    }

    /// Node-wise norms `||u(t_k)||`.
    pub fn node_norms(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| norm(v, &self.norm).expect("dimension checked at construction"))
            .collect()
    }

    /// Node-wise difference `self - other` as a trajectory on the same grid.
    pub fn difference(&self, other: &Trajectory) -> Result<Trajectory> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("trajectories on different grids".into()));
        }
        other.values[0].check_dim(self.dim())?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Trajectory {
            grid: self.grid,
            values,
            norm: self.norm.clone(),
        })
    }

    /// Largest node-wise distance to `other`.
    pub fn sup_distance(&self, other: &Trajectory) -> Result<f64> {
        let diff = self.difference(other)?;
        diff.sup_time_norm(self.grid.steps())
    }

    /// `max_{j <= k} ||u(t_j)||`, the norm of the space of continuous curves on `[0, t_k]`.
    pub fn sup_time_norm(&self, up_to: usize) -> Result<f64> {
        if up_to > self.grid.steps() {
            return Err(Error::IndexOutOfRange {
                index: up_to,
                len: self.grid.len(),
            });
        }
        Ok(self.values[..=up_to]
            .iter()
            .map(|v| norm(v, &self.norm).expect("dimension checked at construction"))
            .fold(0.0, f64::max))
    }

    /// Running sup `k -> max_{j <= k} ||u(t_j)||` for every node.
    pub fn running_sup(&self) -> Vec<f64> {
        let mut acc = 0.0_f64;
        self.node_norms()
            .into_iter()
            .map(|n| {
                acc = acc.max(n);
                acc
            })
            .collect()
    }

    /// Exponentially weighted sup norm `max_k e^{-gamma t_k} ||u(t_k)||`.
    pub fn bielecki_norm(&self, gamma: f64) -> Result<f64> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid(format!("gamma must be > 0, got {gamma}")));
        }
        Ok(self
            .node_norms()
            .into_iter()
            .enumerate()
            .map(|(k, n)| (-gamma * self.grid.node(k)).exp() * n)
            .fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sv(c: &[f64]) -> StateVector {
        StateVector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn norm_examples() {
        let x = sv(&[3.0, -4.0]);
        assert_eq!(norm(&x, &NormKind::L2).unwrap(), 5.0);
        assert_eq!(norm(&x, &NormKind::Sup).unwrap(), 4.0);
        assert_eq!(norm(&x, &NormKind::L1).unwrap(), 7.0);
        let w = NormKind::weighted_l2(vec![4.0, 9.0]).unwrap();
        assert_abs_diff_eq!(norm(&sv(&[1.0, 1.0]), &w).unwrap(), 13f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(norm(&sv(&[1.0, 1.0]), &w).unwrap(), 3.6055513, epsilon = 1e-7);
    }

    #[test]
    fn weighted_norm_dimension_mismatch() {
        let w = NormKind::weighted_l2(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            norm(&sv(&[1.0, 2.0]), &w),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
        assert!(NormKind::weighted_l2(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn rejects_non_finite_components() {
        assert_eq!(
            StateVector::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite("state vector"))
        );
        assert!(StateVector::new(vec![]).is_err());
    }

    #[test]
    fn grid_nodes() {
        let g = TimeGrid::new(1.0, 10).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(10), 1.0);
        let nodes: Vec<f64> = g.nodes().collect();
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(TimeGrid::new(0.0, 3).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        let g = TimeGrid::new(0.7, 3).unwrap();
        assert_eq!(g.node(3), 0.7);
    }

    #[test]
    fn sup_time_norm_examples() {
        let g = TimeGrid::new(1.0, 8).unwrap();
        let c = sv(&[2.0, -1.0]);
        let u = Trajectory::constant(g, c.clone(), NormKind::L2);
        for k in 0..=8 {
            assert_eq!(u.sup_time_norm(k).unwrap(), norm(&c, &NormKind::L2).unwrap());
        }
        let z = Trajectory::constant(g, StateVector::zeros(2), NormKind::Sup);
        assert_eq!(z.sup_time_norm(8).unwrap(), 0.0);
        let lin = Trajectory::new(g, g.nodes().map(StateVector::scalar).collect(), NormKind::Sup).unwrap();
        assert_eq!(lin.sup_time_norm(8).unwrap(), 1.0);
        assert!(matches!(lin.sup_time_norm(9), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn bielecki_examples() {
        let g = TimeGrid::new(1.0, 50).unwrap();
        let z = Trajectory::constant(g, StateVector::zeros(1), NormKind::Sup);
        assert_eq!(z.bielecki_norm(1.0).unwrap(), 0.0);
        let one = Trajectory::constant(g, StateVector::scalar(1.0), NormKind::Sup);
        assert_eq!(one.bielecki_norm(1.0).unwrap(), 1.0);
        let exp = Trajectory::new(
            g,
            g.nodes().map(|t| StateVector::scalar(t.exp())).collect(),
            NormKind::Sup,
        )
        .unwrap();
        assert_abs_diff_eq!(exp.bielecki_norm(1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(exp.bielecki_norm(0.0).is_err());
        assert!(exp.bielecki_norm(-1.0).is_err());
    }

    #[test]
    fn trajectory_length_checked() {
        let g = TimeGrid::new(1.0, 2).unwrap();
        assert!(Trajectory::new(g, vec![StateVector::zeros(1); 2], NormKind::L2).is_err());
        assert!(Trajectory::new(
            g,
            vec![
                StateVector::zeros(1),
                StateVector::zeros(2),
                StateVector::zeros(1)
            ],
            NormKind::L2
        )
        .is_err());
    }
}

//! Finite-alphabet probability kernels.
//!
//! Everything here works in nats. Joints are stored densely in row-major
//! order (last axis varies fastest); alphabets in this crate are small enough
//! that sparsity never pays off.

use crate::error::{Error, Result};
use crate::scalar::Real;

fn check_entries<T: Real>(probs: &[T], what: &str) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution(format!("{what} is empty")));
    }
    let mut total = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < T::zero() {
            return Err(Error::InvalidDistribution(format!(
                "{what}: entry {i} is {p}"
            )));
        }
        total = total + p;
    }
    if (total - T::one()).abs() > T::norm_tol() {
        return Err(Error::InvalidDistribution(format!(
            "{what}: total mass {total} differs from 1"
        )));
    }
    Ok(())
}

/// Probability vector over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf<T> {
    probs: Vec<T>,
}

impl<T: Real> Pmf<T> {
    /// Validates and wraps `probs`. Inputs are never renormalized.
    pub fn new(probs: Vec<T>) -> Result<Self> {
        check_entries(&probs, "pmf")?;
        Ok(Self { probs })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidArgument("empty alphabet".into()));
        }
        let p = T::one() / T::from_usize(size).unwrap();
        Ok(Self {
            probs: vec![p; size],
        })
    }

    pub fn point_mass(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::InvalidArgument(format!(
                "point mass at {at} outside alphabet of size {size}"
            )));
        }
        let mut probs = vec![T::zero(); size];
        probs[at] = T::one();
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn entropy(&self) -> T {
        entropy_of(&self.probs)
    }

    pub fn into_joint(self) -> JointPmf<T> {
        JointPmf {
            axes: vec![self.probs.len()],
            probs: self.probs,
        }
    }
}

/// Stochastic matrix: one [`Pmf`] per conditioning symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalKernel<T> {
    rows: Vec<Pmf<T>>,
    output_size: usize,
}

impl<T: Real> ConditionalKernel<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let output_size = match rows.first() {
            Some(r) => r.len(),
            None => return Err(Error::InvalidDistribution("kernel has no rows".into())),
        };
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != output_size {
                return Err(Error::InvalidDistribution(format!(
                    "kernel row {i} has {} entries, expected {output_size}",
                    row.len()
                )));
            }
            check_entries(&row, &format!("kernel row {i}"))?;
            out.push(Pmf { probs: row });
        }
        Ok(Self {
            rows: out,
            output_size,
        })
    }

    pub fn from_pmfs(rows: Vec<Pmf<T>>) -> Result<Self> {
        Self::new(rows.into_iter().map(|r| r.probs).collect())
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, input: usize) -> &Pmf<T> {
        &self.rows[input]
    }

    pub fn rows(&self) -> &[Pmf<T>] {
        &self.rows
    }

    #[inline]
    pub fn prob(&self, input: usize, output: usize) -> T {
        self.rows[input].probs[output]
    }
}

/// Dense joint distribution over a product of finite alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf<T> {
    axes: Vec<usize>,
    probs: Vec<T>,
}

impl<T: Real> JointPmf<T> {
    pub fn new(axes: Vec<usize>, probs: Vec<T>) -> Result<Self> {
        if axes.is_empty() || axes.contains(&0) {
            return Err(Error::InvalidArgument(format!(
                "axis sizes must be positive, got {axes:?}"
            )));
        }
        let cells: usize = axes.iter().product();
        if cells != probs.len() {
            return Err(Error::InvalidArgument(format!(
                "axes {axes:?} need {cells} cells, got {}",
                probs.len()
            )));
        }
        check_entries(&probs, "joint")?;
        Ok(Self { axes, probs })
    }

    /// Builds a joint by evaluating `f` on every multi-index.
    pub fn from_fn(axes: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let cells: usize = axes.iter().product();
        let mut probs = Vec::with_capacity(cells);
        let mut idx = vec![0usize; axes.len()];
        for _ in 0..cells {
            probs.push(f(&idx));
            for a in (0..axes.len()).rev() {
                idx[a] += 1;
                if idx[a] < axes[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Self::new(axes, probs)
    }

    /// Independent product: axes of `self` followed by axes of `other`.
    pub fn product(&self, other: &Self) -> Self {
        let mut probs = Vec::with_capacity(self.probs.len() * other.probs.len());
        for &p in &self.probs {
            for &q in &other.probs {
                probs.push(p * q);
            }
        }
        let mut axes = self.axes.clone();
        axes.extend_from_slice(&other.axes);
        Self { axes, probs }
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn num_axes(&self) -> usize {
        self.axes.len()
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn total_mass(&self) -> T {
        self.probs.iter().copied().sum()
    }

    /// Probability of a single multi-index.
    pub fn prob(&self, index: &[usize]) -> T {
        self.probs[self.flat_index(index)]
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.axes.len());
        index
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, &size)| acc * size + i)
    }

    /// Marginal over `keep`, with output axes in the order given.
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        validate_axes(self.axes.len(), &[keep])?;
        if keep.is_empty() {
            return Err(Error::InvalidArgument("marginal over no axes".into()));
        }
        let axes = keep.iter().map(|&a| self.axes[a]).collect();
        Ok(Self {
            axes,
            probs: self.marginal_cells(keep),
        })
    }

    /// Sums out every axis not in `keep`; row-major over `keep` order.
    /// Axis sets must already be validated.
    fn marginal_cells(&self, keep: &[usize]) -> Vec<T> {
        let n = self.axes.len();
        let mut stride = vec![0usize; n];
        let mut size = 1usize;
        for &k in keep.iter().rev() {
            stride[k] = size;
            size *= self.axes[k];
        }
        let mut out = vec![T::zero(); size];
        let mut idx = vec![0usize; n];
        let mut o = 0usize;
        for &p in &self.probs {
            out[o] = out[o] + p;
            for a in (0..n).rev() {
                idx[a] += 1;
                o += stride[a];
                if idx[a] < self.axes[a] {
                    break;
                }
                o -= stride[a] * self.axes[a];
                idx[a] = 0;
            }
        }
        out
    }

    /// Conditional entropy H(target | given) in nats.
    ///
    /// Computed as the sum of p(t,g)·ln(p(g)/p(t,g)) with 0·ln(·) = 0. An
    /// empty `given` yields the unconditional entropy, an empty `target` zero.
    pub fn entropy(&self, target: &[usize], given: &[usize]) -> Result<T> {
        validate_axes(self.axes.len(), &[target, given])?;
        Ok(self.entropy_unchecked(target, given))
    }

    fn entropy_unchecked(&self, target: &[usize], given: &[usize]) -> T {
        if target.is_empty() {
            return T::zero();
        }
        let keep: Vec<usize> = given.iter().chain(target).copied().collect();
        let cells = self.marginal_cells(&keep);
        let block: usize = target.iter().map(|&a| self.axes[a]).product();
        let mut h = T::zero();
        for chunk in cells.chunks(block) {
            let pg: T = chunk.iter().copied().sum();
            if pg <= T::zero() {
                continue;
            }
            for &p in chunk {
                if p > T::zero() {
                    h = h + p * (pg / p).ln();
                }
            }
        }
        h.max(T::zero())
    }

    /// Conditional mutual information I(A; B | G) in nats, clamped at zero.
    pub fn mutual_information(&self, a: &[usize], b: &[usize], given: &[usize]) -> Result<T> {
        validate_axes(self.axes.len(), &[a, b, given])?;
        if a.is_empty() || b.is_empty() {
            return Ok(T::zero());
        }
        let bg: Vec<usize> = b.iter().chain(given).copied().collect();
        let mi = self.entropy_unchecked(a, given) - self.entropy_unchecked(a, &bg);
        Ok(mi.max(T::zero()))
    }
}

/// Entropy in nats of a raw probability vector, 0·ln 0 = 0.
pub(crate) fn entropy_of<T: Real>(probs: &[T]) -> T {
    probs
        .iter()
        .filter(|&&p| p > T::zero())
        .fold(T::zero(), |h, &p| h - p * p.ln())
}

/// Checks that every set is in range, duplicate-free and pairwise disjoint.
fn validate_axes(num_axes: usize, sets: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; num_axes];
    for set in sets {
        for &a in *set {
            if a >= num_axes {
                return Err(Error::InvalidArgument(format!(
                    "axis {a} out of range for a joint with {num_axes} axes"
                )));
            }
            if seen[a] {
                return Err(Error::InvalidArgument(format!(
                    "axis {a} appears in more than one place"
                )));
            }
            seen[a] = true;
        }
    }
    Ok(())
}

/// Both sides of the Csiszár sum identity for a joint over
/// (X_1..X_n, Y_1..Y_n):
///
/// lhs = Σ_i I(X_{i+1..n}; Y_i | Y_{1..i-1}),
/// rhs = Σ_i I(Y_{1..i-1}; X_i | X_{i+1..n}).
pub fn csiszar_sum_check<T: Real>(joint: &JointPmf<T>) -> Result<(T, T)> {
    let axes = joint.num_axes();
    if axes == 0 || !axes.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "expected an even, nonzero number of axes, got {axes}"
        )));
    }
    let n = axes / 2;
    let x = |i: usize| i;
    let y = |i: usize| n + i;
    let mut lhs = T::zero();
    let mut rhs = T::zero();
    for i in 0..n {
        let x_future: Vec<usize> = (i + 1..n).map(x).collect();
        let y_past: Vec<usize> = (0..i).map(y).collect();
        lhs = lhs + joint.mutual_information(&x_future, &[y(i)], &y_past)?;
        rhs = rhs + joint.mutual_information(&y_past, &[x(i)], &x_future)?;
    }
    Ok((lhs, rhs))
}

//! Single-letter rate region of the diamond channel with one noisy relay
//! (observing Y) and one noiseless relay (observing X).
//!
//! A rate triple (R, R1, R2) is achievable iff, for some factorization
//! p(u,x)·p(y|x)·p(z|u,y),
//!
//! ```text
//! R       <= I(U;Y) + H(X|U)
//! R1      >= I(Z;Y|U,X)
//! R2      >= H(X|Z,U)
//! R1 + R2 >= R + I(Y;Z|X,U)
//! ```

use crate::channel::Dmc;
use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, JointPmf, Pmf};
use crate::scalar::Real;

/// Axis positions of the full joint built by [`DiamondDistribution::joint`].
pub mod axis {
    pub const U: usize = 0;
    pub const Z: usize = 1;
    pub const X: usize = 2;
    pub const Y: usize = 3;
}
use axis::{U, X, Y, Z};

/// Feasibility slack used by [`check_triple`], in nats.
pub const TRIPLE_TOL: f64 = 1e-9;

/// The three factors p(u,x), p(y|x) and p(z|u,y).
///
/// Rows of `p_z_given_uy` are indexed by `u * |Y| + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiamondDistribution<T> {
    p_ux: JointPmf<T>,
    channel: Dmc<T>,
    p_z_given_uy: ConditionalKernel<T>,
}

impl<T: Real> DiamondDistribution<T> {
    pub fn new(
        p_ux: JointPmf<T>,
        channel: Dmc<T>,
        p_z_given_uy: ConditionalKernel<T>,
    ) -> Result<Self> {
        if p_ux.num_axes() != 2 {
            return Err(Error::InvalidArgument(format!(
                "p(u,x) must have two axes, got {}",
                p_ux.num_axes()
            )));
        }
        let (card_u, card_x) = (p_ux.axes()[0], p_ux.axes()[1]);
        if card_x != channel.input_alphabet() {
            return Err(Error::InvalidArgument(format!(
                "p(u,x) has |X| = {card_x} but the channel input alphabet is {}",
                channel.input_alphabet()
            )));
        }
        let rows = card_u * channel.output_alphabet();
        if p_z_given_uy.input_size() != rows {
            return Err(Error::InvalidArgument(format!(
                "p(z|u,y) needs |U|*|Y| = {rows} rows, got {}",
                p_z_given_uy.input_size()
            )));
        }
        Ok(Self {
            p_ux,
            channel,
            p_z_given_uy,
        })
    }

    /// Auxiliaries U and Z both constant; X distributed as `p_x`.
    pub fn degenerate(p_x: &Pmf<T>, channel: Dmc<T>) -> Result<Self> {
        let p_ux = JointPmf::new(vec![1, p_x.alphabet_size()], p_x.probs().to_vec())?;
        let rows = vec![vec![T::one()]; channel.output_alphabet()];
        Self::new(p_ux, channel, ConditionalKernel::new(rows)?)
    }

    pub fn p_ux(&self) -> &JointPmf<T> {
        &self.p_ux
    }

    pub fn channel(&self) -> &Dmc<T> {
        &self.channel
    }

    pub fn p_z_given_uy(&self) -> &ConditionalKernel<T> {
        &self.p_z_given_uy
    }

    pub fn card_u(&self) -> usize {
        self.p_ux.axes()[0]
    }

    pub fn card_x(&self) -> usize {
        self.p_ux.axes()[1]
    }

    pub fn card_y(&self) -> usize {
        self.channel.output_alphabet()
    }

    pub fn card_z(&self) -> usize {
        self.p_z_given_uy.output_size()
    }

    /// Full joint p(u,z,x,y) = p(u,x)·p(y|x)·p(z|u,y), axes (U, Z, X, Y).
    pub fn joint(&self) -> Result<JointPmf<T>> {
        let (cu, cz, cx, cy) = (self.card_u(), self.card_z(), self.card_x(), self.card_y());
        let mut probs = Vec::with_capacity(cu * cz * cx * cy);
        for u in 0..cu {
            for z in 0..cz {
                for x in 0..cx {
                    let pux = self.p_ux.probs()[u * cx + x];
                    for y in 0..cy {
                        let pz = self.p_z_given_uy.prob(u * cy + y, z);
                        probs.push(pux * self.channel.prob(x, y) * pz);
                    }
                }
            }
        }
        JointPmf::new(vec![cu, cz, cx, cy], probs)
    }
}

/// The information quantities that define the region and the corner points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionEval<T> {
    /// I(U;Y) + H(X|U), upper bound on R.
    pub b1: T,
    /// I(Z;Y|U,X), lower bound on R1.
    pub b2: T,
    /// H(X|Z,U), lower bound on R2.
    pub b3: T,
    /// I(Y;Z|X,U), the sum-rate penalty.
    pub b4: T,
    pub i_uy: T,
    pub i_yz_u: T,
    pub i_xz_u: T,
}

/// Operating point (R, R1, R2) in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTriple<T> {
    pub r: T,
    pub r1: T,
    pub r2: T,
}

impl<T: Real> RateTriple<T> {
    pub fn new(r: T, r1: T, r2: T) -> Result<Self> {
        if !(r >= T::zero() && r1 >= T::zero() && r2 >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "rates must be nonnegative, got ({r}, {r1}, {r2})"
            )));
        }
        Ok(Self { r, r1, r2 })
    }
}

/// (R1, R2) coordinates of a corner point, in nats.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerPoint<T> {
    pub r1: T,
    pub r2: T,
}

/// Kaspi–Berger rate constraints obtained by substituting R = H(X) − R0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualBounds<T> {
    /// I(U;X|Y)
    pub r0_min: T,
    /// I(Z;Y|U,X)
    pub r1_min: T,
    /// H(X|Z,U)
    pub r2_min: T,
    /// I(X,Y;U,X,Z)
    pub sum_min: T,
}

pub fn joint_from_factors<T: Real>(dist: &DiamondDistribution<T>) -> Result<JointPmf<T>> {
    dist.joint()
}

pub fn evaluate_bounds<T: Real>(dist: &DiamondDistribution<T>) -> Result<RegionEval<T>> {
    let j = dist.joint()?;
    let i_uy = j.mutual_information(&[U], &[Y], &[])?;
    let h_x_u = j.entropy(&[X], &[U])?;
    Ok(RegionEval {
        b1: i_uy + h_x_u,
        b2: j.mutual_information(&[Z], &[Y], &[U, X])?,
        b3: j.entropy(&[X], &[Z, U])?,
        b4: j.mutual_information(&[Y], &[Z], &[X, U])?,
        i_uy,
        i_yz_u: j.mutual_information(&[Y], &[Z], &[U])?,
        i_xz_u: j.mutual_information(&[X], &[Z], &[U])?,
    })
}

/// Whether `t` satisfies all four region inequalities, with slack [`TRIPLE_TOL`].
pub fn check_triple<T: Real>(t: &RateTriple<T>, e: &RegionEval<T>) -> bool {
    let tol = T::lit(TRIPLE_TOL);
    t.r <= e.b1 + tol && t.r1 >= e.b2 - tol && t.r2 >= e.b3 - tol && t.r1 + t.r2 >= t.r + e.b4 - tol
}

/// Corner a' (decode the inner code, compress the rest) and corner b'
/// (everything over the noiseless relay) for message rate `r`.
pub fn corner_points<T: Real>(e: &RegionEval<T>, r: T) -> (CornerPoint<T>, CornerPoint<T>) {
    let a = CornerPoint {
        r1: e.i_uy + e.i_yz_u,
        r2: (r - e.i_uy - e.i_xz_u).max(T::zero()),
    };
    let b = CornerPoint {
        r1: T::zero(),
        r2: r,
    };
    (a, b)
}

pub fn dual_bounds<T: Real>(dist: &DiamondDistribution<T>) -> Result<DualBounds<T>> {
    let j = dist.joint()?;
    // I(X,Y;U,X,Z) = H(X,Y) - H(X,Y|U,X,Z) = H(X,Y) - H(Y|U,X,Z)
    let sum_min = (j.entropy(&[X, Y], &[])? - j.entropy(&[Y], &[U, X, Z])?).max(T::zero());
    Ok(DualBounds {
        r0_min: j.mutual_information(&[U], &[X], &[Y])?,
        r1_min: j.mutual_information(&[Z], &[Y], &[U, X])?,
        r2_min: j.entropy(&[X], &[Z, U])?,
        sum_min,
    })
}

/// Cut-set upper bound max_{p(x)} min(H(X), I(X;Y) + r2, r1 + r2).
///
/// The four source-side cuts give H(X), r1 + H(X), I(X;Y) + r2 and r1 + r2;
/// the second never binds. Each term is concave in p(x), so a pattern search
/// over the input simplex from a handful of starts finds the maximum.
pub fn cut_set_bound<T: Real>(channel: &Dmc<T>, r1: T, r2: T) -> Result<T> {
    if !(r1 >= T::zero() && r2 >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "link rates must be nonnegative, got ({r1}, {r2})"
        )));
    }
    let nx = channel.input_alphabet();
    let ny = channel.output_alphabet();
    let cap_links = r1 + r2;
    let objective = |p: &[T]| -> T {
        let mut q = vec![T::zero(); ny];
        let mut h_y_x = T::zero();
        let mut h_x = T::zero();
        for (x, &px) in p.iter().enumerate() {
            if px <= T::zero() {
                continue;
            }
            h_x = h_x - px * px.ln();
            for (y, qy) in q.iter_mut().enumerate() {
                let w = channel.prob(x, y);
                *qy = *qy + px * w;
                if w > T::zero() {
                    h_y_x = h_y_x - px * w * w.ln();
                }
            }
        }
        let h_y = crate::prob::entropy_of(&q);
        let mi = (h_y - h_y_x).max(T::zero());
        h_x.min(mi + r2).min(cap_links)
    };

    let (capacity, cap_input) = channel.capacity();
    let ceiling = T::from_usize(nx)
        .unwrap()
        .ln()
        .min(capacity + r2)
        .min(cap_links);

    let mut starts = vec![
        Pmf::<T>::uniform(nx)?.probs().to_vec(),
        cap_input.probs().to_vec(),
    ];
    let blend = T::lit(0.9);
    for v in 0..nx {
        let mut p = vec![(T::one() - blend) / T::from_usize(nx).unwrap(); nx];
        p[v] = p[v] + blend;
        starts.push(p);
    }

    let mut best = T::zero();
    for mut p in starts {
        let mut value = objective(&p);
        let mut step = T::lit(0.25);
        while step > T::lit(1e-14) && value < ceiling {
            let mut improved = false;
            for i in 0..nx {
                for j in 0..nx {
                    if i == j || p[j] <= T::zero() {
                        continue;
                    }
                    let t = step.min(p[j]);
                    let mut cand = p.clone();
                    cand[i] = cand[i] + t;
                    cand[j] = cand[j] - t;
                    let v = objective(&cand);
                    if v > value {
                        p = cand;
                        value = v;
                        improved = true;
                    }
                }
            }
            if !improved {
                step = step * T::lit(0.5);
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

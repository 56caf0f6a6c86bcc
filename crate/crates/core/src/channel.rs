//! Discrete memoryless channels.

use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, JointPmf, Pmf};
use crate::scalar::Real;

/// A discrete memoryless channel given by its transition matrix p(y|x).
#[derive(Debug, Clone, PartialEq)]
pub struct Dmc<T> {
    transition: ConditionalKernel<T>,
}

impl<T: Real> Dmc<T> {
    /// Validates a row-major transition matrix, one row per input symbol.
    pub fn from_matrix(rows: Vec<Vec<T>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidChannel("empty transition matrix".into()));
        }
        let width = rows[0].len();
        if let Some(i) = rows.iter().position(|r| r.len() != width) {
            return Err(Error::InvalidChannel(format!(
                "row {i} has {} entries, expected {width}",
                rows[i].len()
            )));
        }
        let transition = ConditionalKernel::new(rows).map_err(|e| match e {
            Error::InvalidDistribution(msg) => Error::InvalidChannel(msg),
            other => other,
        })?;
        Ok(Self { transition })
    }

    pub fn transition(&self) -> &ConditionalKernel<T> {
        &self.transition
    }

    pub fn input_alphabet(&self) -> usize {
        self.transition.input_size()
    }

    pub fn output_alphabet(&self) -> usize {
        self.transition.output_size()
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> T {
        self.transition.prob(x, y)
    }

    /// Joint p(x, y) for input distribution `input`, axes (X, Y).
    pub fn joint(&self, input: &Pmf<T>) -> Result<JointPmf<T>> {
        if input.alphabet_size() != self.input_alphabet() {
            return Err(Error::InvalidArgument(format!(
                "input pmf has {} symbols, channel expects {}",
                input.alphabet_size(),
                self.input_alphabet()
            )));
        }
        let px = input.probs();
        JointPmf::from_fn(vec![self.input_alphabet(), self.output_alphabet()], |i| {
            px[i[0]] * self.prob(i[0], i[1])
        })
    }

    /// I(X;Y) in nats for the given input distribution.
    pub fn mutual_information(&self, input: &Pmf<T>) -> Result<T> {
        self.joint(input)?.mutual_information(&[0], &[1], &[])
    }

    /// Channel capacity max_p I(X;Y) and an optimal input, by Blahut–Arimoto.
    #[allow(clippy::needless_range_loop)]
    pub fn capacity(&self) -> (T, Pmf<T>) {
        let nx = self.input_alphabet();
        let ny = self.output_alphabet();
        let mut p = vec![T::one() / T::from_usize(nx).unwrap(); nx];
        let mut d = vec![T::zero(); nx];
        for _ in 0..10_000 {
            let mut q = vec![T::zero(); ny];
            for x in 0..nx {
                for y in 0..ny {
                    q[y] = q[y] + p[x] * self.prob(x, y);
                }
            }
            // d[x] = D(p(.|x) || q)
            for x in 0..nx {
                d[x] =
                    (0..ny)
                        .filter(|&y| self.prob(x, y) > T::zero())
                        .fold(T::zero(), |acc, y| {
                            let w = self.prob(x, y);
                            acc + w * (w / q[y]).ln()
                        });
            }
            let lower: T = (0..nx).fold(T::zero(), |acc, x| acc + p[x] * d[x]);
            let upper = d.iter().copied().fold(T::neg_infinity(), T::max);
            if upper - lower < T::lit(1e-13) {
                break;
            }
            let weights: Vec<T> = (0..nx).map(|x| p[x] * d[x].exp()).collect();
            let total: T = weights.iter().copied().sum();
            p = weights.into_iter().map(|w| w / total).collect();
        }
        let total: T = p.iter().copied().sum();
        let input = Pmf::new(p.into_iter().map(|v| v / total).collect())
            .expect("Blahut-Arimoto iterate stays on the simplex");
        let value = self
            .mutual_information(&input)
            .expect("input matches channel");
        (value, input)
    }
}

/// Binary entropy in bits.
pub fn binary_entropy_bits<T: Real>(p: T) -> T {
    let term = |q: T| {
        if q > T::zero() {
            -q * q.log2()
        } else {
            T::zero()
        }
    };
    term(p) + term(T::one() - p)
}

/// Crossover probability in [0, 1/2] whose binary entropy equals `target_bits`.
pub fn binary_entropy_inverse<T: Real>(target_bits: T) -> Result<T> {
    if !(target_bits >= T::zero() && target_bits <= T::one()) {
        return Err(Error::InvalidArgument(format!(
            "binary entropy target {target_bits} outside [0, 1] bits"
        )));
    }
    let half = T::lit(0.5);
    if target_bits == T::one() {
        return Ok(half);
    }
    if target_bits == T::zero() {
        return Ok(T::zero());
    }
    let (mut lo, mut hi) = (T::zero(), half);
    for _ in 0..200 {
        let mid = (lo + hi) * half;
        if mid <= lo || mid >= hi {
            break;
        }
        if binary_entropy_bits(mid) < target_bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * half)
}

/// Binary symmetric channel Y = X ⊕ W with H(W) = 0.5 bits.
pub fn build_paper_example<T: Real>() -> Dmc<T> {
    let p = binary_entropy_inverse(T::lit(0.5)).expect("0.5 bits is in range");
    let q = T::one() - p;
    Dmc::from_matrix(vec![vec![q, p], vec![p, q]]).expect("binary symmetric channel is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn from_matrix_examples() {
        let id = Dmc::<f64>::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!((id.input_alphabet(), id.output_alphabet()), (2, 2));

        let useless = Dmc::<f64>::from_matrix(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let (c, _) = useless.capacity();
        assert!(c.abs() < 1e-15);

        let bad = Dmc::<f64>::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 0.9]]);
        assert!(matches!(bad, Err(Error::InvalidChannel(_))));
        let ragged = Dmc::<f64>::from_matrix(vec![vec![1.0, 0.0], vec![1.0]]);
        assert!(matches!(ragged, Err(Error::InvalidChannel(_))));
        let negative = Dmc::<f64>::from_matrix(vec![vec![1.5, -0.5]]);
        assert!(matches!(negative, Err(Error::InvalidChannel(_))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(binary_entropy_inverse(1.0f64).unwrap(), 0.5);
        assert_eq!(binary_entropy_inverse(0.0f64).unwrap(), 0.0);
        let p = binary_entropy_inverse(0.5f64).unwrap();
        assert!((p - 0.110028).abs() < 5e-7, "{p}");
        assert!((binary_entropy_bits(p) - 0.5).abs() < 1e-10);
        assert!(binary_entropy_inverse(1.5f64).is_err());
        assert!(binary_entropy_inverse(-0.1f64).is_err());
        assert!(binary_entropy_inverse(f64::NAN).is_err());
    }

    #[test]
    fn example_channel_values() {
        let ch = build_paper_example::<f64>();
        assert_eq!(ch.prob(0, 1), ch.prob(1, 0));
        assert!((ch.prob(0, 1) - 0.110028).abs() < 5e-7);
        assert!((ch.prob(0, 0) - 0.889972).abs() < 5e-7);

        let uniform = Pmf::uniform(2).unwrap();
        let mi = ch.mutual_information(&uniform).unwrap();
        assert!((mi - 0.5 * 2f64.ln()).abs() < 1e-10);
        let hx = ch.joint(&uniform).unwrap().entropy(&[0], &[]).unwrap();
        assert!((hx - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn capacity_of_asymmetric_channel() {
        // Z-channel with crossover 1/2: capacity log2(5/4) bits at p(1) = 2/5.
        let z = Dmc::<f64>::from_matrix(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        let (c, input) = z.capacity();
        assert!((c - (1.25f64).ln()).abs() < 1e-10, "{c}");
        assert!((input.probs()[1] - 0.4).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn inverse_round_trips(target in 0.0f64..=1.0) {
            let p = binary_entropy_inverse(target).unwrap();
            prop_assert!(p <= 0.5);
            prop_assert!((binary_entropy_bits(p) - target).abs() < 1e-9);
        }
    }
}

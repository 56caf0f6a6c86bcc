//! Lower bounds on capacity by maximizing the achievable rate over
//! cardinality-bounded distributions.
//!
//! The free parameters are unconstrained logits: one simplex for p(u,x) and
//! one per (u, y) row of p(z|u,y). Each restart runs a derivative-free
//! random-direction pattern search on an exact-penalty objective; the
//! reported rate always comes from a point that satisfies the R1 and R2
//! constraints, so it is a genuine achievable rate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::Dmc;
use crate::error::{Error, Result};
use crate::prob::{ConditionalKernel, JointPmf, Pmf};
use crate::region::{evaluate_bounds, DiamondDistribution, RegionEval, TRIPLE_TOL};
use crate::scalar::Real;

/// Logit assigned to (near) zero-probability cells when seeding.
const LOGIT_FLOOR: f64 = -40.0;
const INITIAL_STEP: f64 = 0.5;
const MAX_STEP: f64 = 8.0;
const MIN_STEP: f64 = 1e-7;
const RANDOM_INIT_RANGE: f64 = 4.0;
const PHASE_MIN_STEP: f64 = 1e-2;
/// Smoothing schedule in nats; the last entry must be 0 (exact objective).
const TEMPERATURES: &[f64] = &[1e-2, 1e-3, 1e-4, 0.0];

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Pattern-search iterations per restart.
    pub max_iterations: usize,
    /// A restart stops once its objective has not improved by this much
    /// (in nats) for a full stall window.
    pub convergence_tol: f64,
    pub penalty_weight: f64,
    pub seed: u64,
    /// Defaults to |X| + 4.
    pub card_u: Option<usize>,
    /// Defaults to |U|·|Y| + 3.
    pub card_z: Option<usize>,
    /// Allows cardinalities above the sufficient bounds.
    pub unsafe_cardinality: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iterations: 2000,
            convergence_tol: 1e-7,
            penalty_weight: 10.0,
            seed: 0,
            card_u: None,
            card_z: None,
            unsafe_cardinality: false,
        }
    }
}

impl OptimizerConfig {
    /// Resolves (|U|, |Z|) for a channel, enforcing the sufficient bounds
    /// |U| <= |X| + 4 and |Z| <= |U|·|Y| + 3 unless overridden.
    pub fn cardinalities(&self, card_x: usize, card_y: usize) -> Result<(usize, usize)> {
        let max_u = card_x + 4;
        let card_u = self.card_u.unwrap_or(max_u);
        let max_z = card_u * card_y + 3;
        let card_z = self.card_z.unwrap_or(max_z);
        if card_u == 0 || card_z == 0 {
            return Err(Error::InvalidArgument(
                "cardinalities must be positive".into(),
            ));
        }
        if !self.unsafe_cardinality && (card_u > max_u || card_z > max_z) {
            return Err(Error::InvalidArgument(format!(
                "cardinalities |U| = {card_u}, |Z| = {card_z} exceed the bounds \
                 |U| <= {max_u}, |Z| <= {max_z}"
            )));
        }
        Ok((card_u, card_z))
    }

    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "restarts and max_iterations must be positive".into(),
            ));
        }
        if !(self.penalty_weight > 0.0) || !(self.convergence_tol >= 0.0) {
            return Err(Error::InvalidArgument(
                "penalty weight must be positive and tolerance nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizationResult {
    pub best_rate: f64,
    pub best_dist: DiamondDistribution<f64>,
    pub per_restart_rates: Vec<f64>,
    pub feasible: bool,
    pub iterations_used: usize,
}

/// Maps free logits onto the interior of the simplex. The final coordinate
/// is pinned at logit 0, so the output has `free.len() + 1` entries.
pub fn simplex_embed<T: Real>(free: &[T]) -> Pmf<T> {
    let max = free.iter().copied().fold(T::zero(), T::max);
    let mut probs: Vec<T> = free.iter().map(|&v| (v - max).exp()).collect();
    probs.push((-max).exp());
    let total: T = probs.iter().copied().sum();
    for p in &mut probs {
        *p = *p / total;
    }
    Pmf::new(probs).expect("normalized exponentials form a valid pmf")
}

/// Inverse of [`simplex_embed`] with zero cells sent to a large negative logit.
fn simplex_logits(probs: &[f64]) -> Vec<f64> {
    let floor = LOGIT_FLOOR.exp();
    let last = probs[probs.len() - 1].max(floor).ln();
    probs[..probs.len() - 1]
        .iter()
        .map(|&p| p.max(floor).ln() - last)
        .collect()
}

/// Exact-penalty objective: the best rate the distribution supports, minus
/// `weight` times the violation of the R1 and R2 constraints.
pub fn penalized_objective(
    dist: &DiamondDistribution<f64>,
    r1: f64,
    r2: f64,
    weight: f64,
) -> Result<f64> {
    if !(weight > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "penalty weight must be positive, got {weight}"
        )));
    }
    Ok(penalize(&evaluate_bounds(dist)?, r1, r2, weight))
}

fn penalize(e: &RegionEval<f64>, r1: f64, r2: f64, weight: f64) -> f64 {
    e.b1.min(r1 + r2 - e.b4) - weight * (e.b2 - r1).max(0.0) - weight * (e.b3 - r2).max(0.0)
}

/// [`penalize`] with the min and the hinges replaced by soft versions at
/// temperature `temp`; equal to [`penalize`] at `temp == 0`.
fn penalize_smooth(e: &RegionEval<f64>, r1: f64, r2: f64, weight: f64, temp: f64) -> f64 {
    if temp == 0.0 {
        return penalize(e, r1, r2, weight);
    }
    let softplus = |v: f64| v.max(0.0) + temp * (-(v.abs()) / temp).exp().ln_1p();
    let (a, b) = (e.b1, r1 + r2 - e.b4);
    let softmin = a.min(b) - temp * (-((a - b).abs()) / temp).exp().ln_1p();
    softmin - weight * softplus(e.b2 - r1) - weight * softplus(e.b3 - r2)
}

/// Largest R with (R, r1, r2) in the region of this evaluation, if any.
fn achievable_rate(e: &RegionEval<f64>, r1: f64, r2: f64) -> Option<f64> {
    let best = e.b1.min(r1 + r2 - e.b4);
    let ok = e.b2 <= r1 + TRIPLE_TOL && e.b3 <= r2 + TRIPLE_TOL && best >= -TRIPLE_TOL;
    ok.then(|| best.max(0.0))
}

/// Parameter layout: p(u,x) logits, then one block per (u, y) row of p(z|u,y).
#[derive(Debug, Clone)]
struct Layout {
    card_u: usize,
    card_x: usize,
    card_y: usize,
    card_z: usize,
}

impl Layout {
    fn ux_len(&self) -> usize {
        self.card_u * self.card_x - 1
    }

    fn row_len(&self) -> usize {
        self.card_z - 1
    }

    fn dim(&self) -> usize {
        self.ux_len() + self.card_u * self.card_y * self.row_len()
    }

    /// Index ranges of the independent simplex blocks.
    fn blocks(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        if self.ux_len() > 0 {
            out.push(0..self.ux_len());
        }
        if self.row_len() > 0 {
            for r in 0..self.card_u * self.card_y {
                let start = self.ux_len() + r * self.row_len();
                out.push(start..start + self.row_len());
            }
        }
        out
    }

    fn decode(&self, theta: &[f64], channel: &Dmc<f64>) -> DiamondDistribution<f64> {
        let (ux, rows) = theta.split_at(self.ux_len());
        let p_ux = JointPmf::new(
            vec![self.card_u, self.card_x],
            simplex_embed(ux).probs().to_vec(),
        )
        .expect("embedded p(u,x) is valid");
        let rows: Vec<Vec<f64>> = (0..self.card_u * self.card_y)
            .map(|r| {
                let block = &rows[r * self.row_len()..(r + 1) * self.row_len()];
                simplex_embed(block).probs().to_vec()
            })
            .collect();
        let p_z = ConditionalKernel::new(rows).expect("embedded p(z|u,y) is valid");
        DiamondDistribution::new(p_ux, channel.clone(), p_z).expect("layout matches channel")
    }

    fn encode(&self, p_ux: &[f64], z_rows: &[Vec<f64>]) -> Vec<f64> {
        let mut theta = simplex_logits(p_ux);
        for row in z_rows {
            theta.extend(simplex_logits(row));
        }
        theta
    }

    fn degenerate_z(&self) -> Vec<Vec<f64>> {
        let mut row = vec![0.0; self.card_z];
        row[0] = 1.0;
        vec![row; self.card_u * self.card_y]
    }

    /// U = X with X capacity-achieving, Z constant: the relay decodes everything.
    fn decode_forward_seed(&self, channel: &Dmc<f64>) -> Option<Vec<f64>> {
        if self.card_u < self.card_x {
            return None;
        }
        let (_, input) = channel.capacity();
        let mut p_ux = vec![0.0; self.card_u * self.card_x];
        for (x, &p) in input.probs().iter().enumerate() {
            p_ux[x * self.card_x + x] = p;
        }
        Some(self.encode(&p_ux, &self.degenerate_z()))
    }

    /// U and Z constant with H(X) = min(r2, ln|X|): the message goes around
    /// the noisy relay entirely.
    fn routing_seed(&self, r2: f64) -> Vec<f64> {
        let px = routing_input(self.card_x, r2);
        let mut p_ux = vec![0.0; self.card_u * self.card_x];
        p_ux[..self.card_x].copy_from_slice(&px);
        self.encode(&p_ux, &self.degenerate_z())
    }
}

/// Input on the segment from a point mass to uniform whose entropy is the
/// largest value not exceeding `r2`.
fn routing_input(card_x: usize, r2: f64) -> Vec<f64> {
    let mix = |t: f64| {
        let mut p = vec![t / card_x as f64; card_x];
        p[0] += 1.0 - t;
        p
    };
    let h = |p: &[f64]| crate::prob::entropy_of(p);
    if h(&mix(1.0)) <= r2 {
        return mix(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if h(&mix(mid)) <= r2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mix(lo)
}

struct Problem<'a> {
    channel: &'a Dmc<f64>,
    layout: Layout,
    r1: f64,
    r2: f64,
    cfg: &'a OptimizerConfig,
}

struct RestartOutcome {
    rate: Option<f64>,
    theta: Vec<f64>,
    iterations: usize,
}

impl Problem<'_> {
    fn eval(&self, theta: &[f64]) -> RegionEval<f64> {
        evaluate_bounds(&self.layout.decode(theta, self.channel))
            .expect("decoded distribution is valid")
    }

    fn objective(&self, theta: &[f64], temp: f64) -> f64 {
        let e = self.eval(theta);
        penalize_smooth(&e, self.r1, self.r2, self.cfg.penalty_weight, temp)
    }

    /// Random-direction pattern search, run through a decreasing sequence of
    /// smoothing temperatures and finishing on the exact objective.
    fn local_search(&self, mut x: Vec<f64>, rng: &mut ChaCha8Rng) -> (Vec<f64>, usize) {
        let blocks = self.layout.blocks();
        if blocks.is_empty() {
            return (x, 0);
        }
        let dim = x.len();
        let stall_window = 50 + 10 * blocks.len();
        let budget = (self.cfg.max_iterations / TEMPERATURES.len()).max(1);
        let mut iterations = 0usize;
        let mut step = INITIAL_STEP;
        let mut dir = vec![0.0; dim];

        for &temp in TEMPERATURES {
            let mut fx = self.objective(&x, temp);
            let mut reference = fx;
            let mut since_progress = 0usize;
            step = step.max(PHASE_MIN_STEP);
            let mut used = 0usize;
            while used < budget && step > MIN_STEP {
                used += 1;
                dir.iter_mut().for_each(|d| *d = 0.0);
                let range = if rng.gen_bool(0.5) {
                    0..dim
                } else {
                    blocks[rng.gen_range(0..blocks.len())].clone()
                };
                let mut norm = 0.0;
                for d in &mut dir[range] {
                    *d = rng.sample::<f64, _>(StandardNormal);
                    norm += *d * *d;
                }
                let scale = step / norm.sqrt().max(1e-300);

                let mut improved = false;
                for sign in [1.0, -1.0] {
                    let cand: Vec<f64> = x
                        .iter()
                        .zip(&dir)
                        .map(|(&xi, &di)| xi + sign * scale * di)
                        .collect();
                    let fc = self.objective(&cand, temp);
                    if fc > fx {
                        x = cand;
                        fx = fc;
                        improved = true;
                        break;
                    }
                }
                step = if improved {
                    (step * 1.5).min(MAX_STEP)
                } else {
                    step * 0.85
                };

                if fx > reference + self.cfg.convergence_tol {
                    reference = fx;
                    since_progress = 0;
                } else {
                    since_progress += 1;
                    if since_progress >= stall_window {
                        break;
                    }
                }
            }
            iterations += used;
        }
        (x, iterations)
    }

    /// Moves toward `anchor` until the R1/R2 constraints hold, by bisection on
    /// the interpolation weight, and returns the achievable rate found there.
    fn repair(&self, theta: Vec<f64>, anchor: &[f64]) -> (Option<f64>, Vec<f64>) {
        if let Some(rate) = achievable_rate(&self.eval(&theta), self.r1, self.r2) {
            return (Some(rate), theta);
        }
        let mix = |lambda: f64| -> Vec<f64> {
            theta
                .iter()
                .zip(anchor)
                .map(|(&t, &a)| (1.0 - lambda) * t + lambda * a)
                .collect()
        };
        if achievable_rate(&self.eval(anchor), self.r1, self.r2).is_none() {
            return (None, theta);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if achievable_rate(&self.eval(&mix(mid)), self.r1, self.r2).is_some() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let fixed = mix(hi);
        (achievable_rate(&self.eval(&fixed), self.r1, self.r2), fixed)
    }

    fn restart(&self, index: usize, seeds: &[Vec<f64>], anchor: &[f64]) -> RestartOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index as u64);
        let start = match seeds.get(index) {
            Some(s) => s.clone(),
            None => (0..self.layout.dim())
                .map(|_| rng.gen_range(-RANDOM_INIT_RANGE..RANDOM_INIT_RANGE))
                .collect(),
        };
        let (theta, iterations) = self.local_search(start, &mut rng);
        let (rate, theta) = self.repair(theta, anchor);
        RestartOutcome {
            rate,
            theta,
            iterations,
        }
    }
}

/// Multi-start maximization of the achievable rate R for link rates (r1, r2).
///
/// Restart 0 starts from the decode-and-forward point (U = X, Z constant),
/// restart 1 from the routing point (U, Z constant), the rest from uniform
/// random logits. Restarts run in parallel and are reduced in index order,
/// so results do not depend on scheduling.
pub fn maximize_rate(
    channel: &Dmc<f64>,
    r1: f64,
    r2: f64,
    cfg: &OptimizerConfig,
) -> Result<OptimizationResult> {
    if !(r1 >= 0.0 && r2 >= 0.0) || !r1.is_finite() || !r2.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "link rates must be finite and nonnegative, got ({r1}, {r2})"
        )));
    }
    cfg.validate()?;
    let (card_x, card_y) = (channel.input_alphabet(), channel.output_alphabet());
    let (card_u, card_z) = cfg.cardinalities(card_x, card_y)?;
    let layout = Layout {
        card_u,
        card_x,
        card_y,
        card_z,
    };

    let routing = layout.routing_seed(r2);
    let mut seeds = Vec::new();
    if let Some(daf) = layout.decode_forward_seed(channel) {
        seeds.push(daf);
    }
    seeds.push(routing.clone());
    let anchor = seeds[0].clone();

    let problem = Problem {
        channel,
        layout,
        r1,
        r2,
        cfg,
    };
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|k| problem.restart(k, &seeds, &anchor))
        .collect();

    let iterations_used = outcomes.iter().map(|o| o.iterations).sum();
    let per_restart_rates: Vec<f64> = outcomes.iter().map(|o| o.rate.unwrap_or(0.0)).collect();
    let best = outcomes
        .iter()
        .enumerate()
        .filter_map(|(i, o)| o.rate.map(|r| (i, r)))
        .fold(None, |acc: Option<(usize, f64)>, (i, r)| match acc {
            Some((_, br)) if br >= r => acc,
            _ => Some((i, r)),
        });

    Ok(match best {
        Some((i, rate)) => OptimizationResult {
            best_rate: rate,
            best_dist: problem.layout.decode(&outcomes[i].theta, channel),
            per_restart_rates,
            feasible: true,
            iterations_used,
        },
        None => OptimizationResult {
            best_rate: 0.0,
            best_dist: problem.layout.decode(&routing, channel),
            per_restart_rates,
            feasible: false,
            iterations_used,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_paper_example;
    use crate::region::check_triple;
    use crate::region::RateTriple;

    const LN2: f64 = std::f64::consts::LN_2;

    fn small(restarts: usize) -> OptimizerConfig {
        OptimizerConfig {
            restarts,
            card_u: Some(2),
            card_z: Some(2),
            ..Default::default()
        }
    }

    #[test]
    fn embed_examples() {
        let u = simplex_embed(&[0.0f64, 0.0, 0.0]);
        assert!(u.probs().iter().all(|&p| (p - 0.25).abs() < 1e-15));

        let sat = simplex_embed(&[30.0f64]);
        assert!((sat.probs()[0] - 1.0).abs() < 1e-12);
        assert!(sat.probs()[1] < 1e-12);

        let r = simplex_embed(&[3.2f64, -700.0, 12.5, -1.0]);
        assert!(r.probs().iter().all(|&p| p > 0.0));
        assert!((r.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let huge = simplex_embed(&[1e6f64, 1e6]);
        assert!((huge.probs()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn logits_invert_embedding() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let back = simplex_embed(&simplex_logits(&p));
        for (a, b) in p.iter().zip(back.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn penalized_examples() {
        let d = DiamondDistribution::degenerate(&Pmf::uniform(2).unwrap(), build_paper_example())
            .unwrap();
        let v = penalized_objective(&d, LN2, LN2, 10.0).unwrap();
        assert!((v - LN2).abs() < 1e-15);
        let v = penalized_objective(&d, LN2, 0.5 * LN2, 10.0).unwrap();
        assert!((v - (LN2 - 10.0 * 0.5 * LN2)).abs() < 1e-14);
        assert!(penalized_objective(&d, LN2, LN2, 0.0).is_err());
    }

    #[test]
    fn routing_input_hits_target_entropy() {
        let p = routing_input(3, 0.5);
        let h = crate::prob::entropy_of(&p);
        assert!(h <= 0.5 && h > 0.5 - 1e-12);
        assert_eq!(routing_input(2, 5.0), vec![0.5, 0.5]);
    }

    #[test]
    fn cardinality_bounds_enforced() {
        let cfg = OptimizerConfig {
            card_u: Some(7),
            ..Default::default()
        };
        assert!(cfg.cardinalities(2, 2).is_err());
        let cfg = OptimizerConfig {
            card_u: Some(7),
            unsafe_cardinality: true,
            ..Default::default()
        };
        assert_eq!(cfg.cardinalities(2, 2).unwrap(), (7, 17));
        assert_eq!(
            OptimizerConfig::default().cardinalities(2, 2).unwrap(),
            (6, 15)
        );
    }

    #[test]
    fn zero_links_give_zero_rate() {
        let ch = build_paper_example();
        let res = maximize_rate(&ch, 0.0, 0.0, &small(8)).unwrap();
        assert!(res.feasible);
        assert!(res.best_rate.abs() < 1e-12);
    }

    #[test]
    fn noiseless_channel_reaches_link_sum() {
        let ch = Dmc::from_matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let res = maximize_rate(&ch, 0.5 * LN2, 0.5 * LN2, &small(8)).unwrap();
        assert!((res.best_rate - LN2).abs() < 1e-3, "{}", res.best_rate);
    }

    #[test]
    fn result_is_achievable_and_reproducible() {
        let ch = build_paper_example();
        let (r1, r2) = (0.4, 0.3);
        let cfg = small(12);
        let a = maximize_rate(&ch, r1, r2, &cfg).unwrap();
        let b = maximize_rate(&ch, r1, r2, &cfg).unwrap();
        assert_eq!(a.best_rate.to_bits(), b.best_rate.to_bits());
        assert_eq!(a.per_restart_rates, b.per_restart_rates);

        let max = a.per_restart_rates.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(a.best_rate, max);
        let e = evaluate_bounds(&a.best_dist).unwrap();
        assert!(e.b2 <= r1 + 1e-6 && e.b3 <= r2 + 1e-6);
        assert!(check_triple(
            &RateTriple::new(a.best_rate, r1, r2).unwrap(),
            &e
        ));
    }

    #[test]
    fn rejects_bad_inputs() {
        let ch = build_paper_example();
        assert!(maximize_rate(&ch, -0.1, 0.1, &small(2)).is_err());
        let cfg = OptimizerConfig {
            restarts: 0,
            ..small(1)
        };
        assert!(maximize_rate(&ch, 0.1, 0.1, &cfg).is_err());
    }
}

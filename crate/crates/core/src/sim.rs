//! Monte Carlo simulation of the superposition decode-and-compress scheme.
//!
//! The message is split as W = (W_a, W_b, W_c). An inner codebook of M_a
//! words u^n is drawn from p(u); for every inner word there are M_b outer
//! codebooks of M_c words x^n drawn from p(x|u). The noisy relay decodes W_a
//! by joint typicality with its observation y^n and compresses y^n into one
//! of L candidates z^n drawn from p(z|u). The noiseless relay forwards W_b.
//! The receiver looks for the codeword of C(Ŵ_a, W_b) that is jointly typical
//! with z^n given û^n.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::prob::JointPmf;
use crate::region::{axis, evaluate_bounds, DiamondDistribution, RegionEval};

pub type Symbol = u16;

/// Default cap on stored codeword symbols and on relay candidates.
pub const DEFAULT_MAX_SYMBOLS: u64 = 10_000_000;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub dist: DiamondDistribution<f64>,
    /// Blocklength.
    pub n: usize,
    /// Rate back-off in nats.
    pub epsilon: f64,
    /// Compression rate margin in nats.
    pub tau: f64,
    /// Typicality slack; `None` means 0.5/√n.
    pub delta: Option<f64>,
    /// Message rate ln(M)/n in nats; `None` puts no rate on the noiseless
    /// link beyond what the codebook ceilings force (M_b = 1).
    pub rate: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub max_symbols: u64,
}

impl SimConfig {
    pub fn new(dist: DiamondDistribution<f64>, n: usize) -> Self {
        Self {
            dist,
            n,
            epsilon: 0.01,
            tau: 0.05,
            delta: None,
            rate: None,
            trials: 1000,
            seed: 0,
            max_symbols: DEFAULT_MAX_SYMBOLS,
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(0.5 / (self.n as f64).sqrt())
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n == 0 {
            return bad("blocklength must be positive".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if !(self.epsilon > 0.0) || !(self.tau > 0.0) {
            return bad(format!(
                "epsilon and tau must be positive, got {} and {}",
                self.epsilon, self.tau
            ));
        }
        if !(self.delta() > 0.0) {
            return bad(format!(
                "typicality slack must be positive, got {}",
                self.delta()
            ));
        }
        if let Some(r) = self.rate {
            if !(r >= 0.0) || !r.is_finite() {
                return bad(format!("rate must be finite and nonnegative, got {r}"));
            }
        }
        let d = &self.dist;
        if [d.card_u(), d.card_x(), d.card_y(), d.card_z()]
            .iter()
            .any(|&c| c > Symbol::MAX as usize + 1)
        {
            return bad("alphabet too large for the simulator".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodebookSizes {
    pub m_a: u64,
    pub m_b: u64,
    pub m_c: u64,
    /// Number of relay compression candidates.
    pub l: u64,
}

impl CodebookSizes {
    pub fn messages(&self) -> u128 {
        self.m_a as u128 * self.m_b as u128 * self.m_c as u128
    }

    /// Computes the sizes for `cfg` and checks them against the memory cap.
    pub fn for_config(cfg: &SimConfig, e: &RegionEval<f64>) -> Result<Self> {
        let n = cfg.n as f64;
        let m_a = ceil_exp(n * (e.i_uy - 3.0 * cfg.epsilon), "M_a")?;
        let m_c = ceil_exp(n * (e.i_xz_u - 3.0 * cfg.epsilon), "M_c")?;
        let l = ceil_exp(n * (e.i_yz_u + cfg.tau), "L")?;
        let rate = cfg
            .rate
            .unwrap_or((e.i_uy + e.i_xz_u - 6.0 * cfg.epsilon).max(0.0));
        let m = ceil_exp(n * rate, "M")?;
        let inner = m_a.saturating_mul(m_c);
        let m_b = m.div_ceil(inner).max(1);

        let words = (m_a as u128) * (m_b as u128) * (m_c as u128) + m_a as u128;
        let symbols = words * cfg.n as u128;
        if symbols > cfg.max_symbols as u128 {
            return Err(Error::ResourceLimit(format!(
                "codebooks need {symbols} symbols (M_a = {m_a}, M_b = {m_b}, M_c = {m_c}, \
                 n = {}), cap is {}",
                cfg.n, cfg.max_symbols
            )));
        }
        if l > cfg.max_symbols {
            return Err(Error::ResourceLimit(format!(
                "relay candidate count L = {l} exceeds cap {}",
                cfg.max_symbols
            )));
        }
        Ok(Self { m_a, m_b, m_c, l })
    }
}

fn ceil_exp(exponent: f64, what: &str) -> Result<u64> {
    let v = exponent.exp().ceil().max(1.0);
    if !v.is_finite() || v >= u64::MAX as f64 {
        return Err(Error::ResourceLimit(format!(
            "{what} = exp({exponent:.3}) does not fit in 64 bits"
        )));
    }
    Ok(v as u64)
}

/// Superposition codebook; words stored back to back, `n` symbols each.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub n: usize,
    pub sizes: CodebookSizes,
    u_words: Vec<Symbol>,
    x_words: Vec<Symbol>,
}

impl Codebook {
    pub fn u_word(&self, a: usize) -> &[Symbol] {
        &self.u_words[a * self.n..(a + 1) * self.n]
    }

    pub fn x_word(&self, a: usize, b: usize, c: usize) -> &[Symbol] {
        let s = &self.sizes;
        let idx = (a * s.m_b as usize + b) * s.m_c as usize + c;
        &self.x_words[idx * self.n..(idx + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOutcome {
    pub trials: u64,
    pub errors_total: u64,
    pub errors_e1: u64,
    pub errors_e2: u64,
    pub errors_e3: u64,
    pub empirical_pe: f64,
    pub sizes: CodebookSizes,
}

/// What the noisy relay sends: the inner index estimate and the chosen
/// compression word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelayOutput {
    pub w_a_hat: usize,
    pub z_seq: Vec<Symbol>,
    pub z_index: u64,
    /// False when none of the L candidates was typical (index 0 is sent).
    pub z_found: bool,
}

/// Strong typicality against `reference`: every joint symbol's empirical
/// frequency is within `delta` of its probability, and symbols of
/// probability zero never occur. `sequences[k]` runs along axis k.
pub fn strongly_typical(
    sequences: &[&[Symbol]],
    reference: &JointPmf<f64>,
    delta: f64,
) -> Result<bool> {
    let checker = TypicalSet::new(reference.clone(), delta);
    if sequences.len() != reference.num_axes() {
        return Err(Error::InvalidArgument(format!(
            "{} sequences for a reference with {} axes",
            sequences.len(),
            reference.num_axes()
        )));
    }
    let n = sequences.first().map_or(0, |s| s.len());
    if n == 0 || sequences.iter().any(|s| s.len() != n) {
        return Err(Error::InvalidArgument(
            "sequences must be nonempty and of equal length".into(),
        ));
    }
    for (s, &size) in sequences.iter().zip(reference.axes()) {
        if s.iter().any(|&v| v as usize >= size) {
            return Err(Error::InvalidArgument(format!(
                "symbol outside alphabet of size {size}"
            )));
        }
    }
    Ok(checker.contains(sequences, &mut Vec::new()))
}

struct TypicalSet {
    reference: JointPmf<f64>,
    delta: f64,
}

impl TypicalSet {
    fn new(reference: JointPmf<f64>, delta: f64) -> Self {
        Self { reference, delta }
    }

    /// Unchecked membership test; `counts` is scratch space.
    fn contains(&self, sequences: &[&[Symbol]], counts: &mut Vec<u32>) -> bool {
        let axes = self.reference.axes();
        let probs = self.reference.probs();
        counts.clear();
        counts.resize(probs.len(), 0);
        let n = sequences[0].len();
        for i in 0..n {
            let mut flat = 0usize;
            for (s, &size) in sequences.iter().zip(axes) {
                flat = flat * size + s[i] as usize;
            }
            if probs[flat] == 0.0 {
                return false;
            }
            counts[flat] += 1;
        }
        let n = n as f64;
        counts
            .iter()
            .zip(probs)
            .all(|(&c, &p)| (c as f64 / n - p).abs() <= self.delta)
    }
}

fn sampler(weights: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(weights)
        .unwrap_or_else(|_| WeightedIndex::new(vec![1.0; weights.len()]).unwrap())
}

/// A configured simulation holding the random codebook together with the
/// samplers and typicality references derived from the distribution.
pub struct Simulator {
    cfg: SimConfig,
    delta: f64,
    codebook: Codebook,
    z_given_u: Vec<WeightedIndex<f64>>,
    channel_rows: Vec<WeightedIndex<f64>>,
    typical_uy: TypicalSet,
    typical_uyz: TypicalSet,
    typical_uxz: TypicalSet,
    typical_all: TypicalSet,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let dist = &cfg.dist;
        let eval = evaluate_bounds(dist)?;
        let sizes = CodebookSizes::for_config(&cfg, &eval)?;
        let joint = dist.joint()?;
        let delta = cfg.delta();
        let (cu, cx) = (dist.card_u(), dist.card_x());

        let p_ux = dist.p_ux().probs();
        let p_u: Vec<f64> = p_ux.chunks(cx).map(|r| r.iter().sum()).collect();
        let x_given_u: Vec<WeightedIndex<f64>> = p_ux.chunks(cx).map(sampler).collect();
        let p_uz = joint.marginal(&[axis::U, axis::Z])?;
        let z_given_u = p_uz.probs().chunks(dist.card_z()).map(sampler).collect();
        let channel_rows = (0..cx)
            .map(|x| sampler(dist.channel().transition().row(x).probs()))
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = cfg.n;
        let u_dist = sampler(&p_u);
        let mut u_words = Vec::with_capacity(sizes.m_a as usize * n);
        for _ in 0..sizes.m_a * n as u64 {
            u_words.push(u_dist.sample(&mut rng) as Symbol);
        }
        let per_inner = (sizes.m_b * sizes.m_c) as usize;
        let mut x_words = Vec::with_capacity(sizes.m_a as usize * per_inner * n);
        for a in 0..sizes.m_a as usize {
            let u = &u_words[a * n..(a + 1) * n];
            for _ in 0..per_inner {
                x_words.extend(
                    u.iter()
                        .map(|&ui| x_given_u[ui as usize].sample(&mut rng) as Symbol),
                );
            }
        }
        debug_assert_eq!(p_u.len(), cu);

        Ok(Self {
            delta,
            codebook: Codebook {
                n,
                sizes,
                u_words,
                x_words,
            },
            z_given_u,
            channel_rows,
            typical_uy: TypicalSet::new(joint.marginal(&[axis::U, axis::Y])?, delta),
            typical_uyz: TypicalSet::new(joint.marginal(&[axis::U, axis::Y, axis::Z])?, delta),
            typical_uxz: TypicalSet::new(joint.marginal(&[axis::U, axis::X, axis::Z])?, delta),
            typical_all: TypicalSet::new(joint, delta),
            cfg,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Noisy-relay processing: lowest-index inner word typical with `y`
    /// (index 0 if none), then the first of L compression candidates drawn
    /// from p(z|û_i) that is jointly typical with (û, y).
    pub fn relay_process(&self, y: &[Symbol], rng: &mut impl Rng) -> RelayOutput {
        let cb = &self.codebook;
        let mut scratch = Vec::new();
        let w_a_hat = if cb.sizes.m_a == 1 {
            0
        } else {
            (0..cb.sizes.m_a as usize)
                .find(|&a| self.typical_uy.contains(&[cb.u_word(a), y], &mut scratch))
                .unwrap_or(0)
        };
        let u_hat = cb.u_word(w_a_hat);

        let mut first = None;
        let mut cand = vec![0 as Symbol; cb.n];
        for l in 0..cb.sizes.l {
            for (zi, &ui) in cand.iter_mut().zip(u_hat) {
                *zi = self.z_given_u[ui as usize].sample(rng) as Symbol;
            }
            if self.typical_uyz.contains(&[u_hat, y, &cand], &mut scratch) {
                return RelayOutput {
                    w_a_hat,
                    z_seq: cand,
                    z_index: l,
                    z_found: true,
                };
            }
            if first.is_none() {
                first = Some(cand.clone());
            }
        }
        RelayOutput {
            w_a_hat,
            z_seq: first.unwrap_or(cand),
            z_index: 0,
            z_found: false,
        }
    }

    /// Receiver: lowest index in C(ŵ_a, w_b) whose codeword is jointly
    /// typical with z given û, or `None`. A singleton codebook needs no search.
    pub fn decode(&self, w_a_hat: usize, z: &[Symbol], w_b: usize) -> Option<usize> {
        let cb = &self.codebook;
        if cb.sizes.m_c == 1 {
            return Some(0);
        }
        let u_hat = cb.u_word(w_a_hat);
        let mut scratch = Vec::new();
        (0..cb.sizes.m_c as usize).find(|&c| {
            self.typical_uxz
                .contains(&[u_hat, cb.x_word(w_a_hat, w_b, c), z], &mut scratch)
        })
    }

    fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(trial + 1);
        rng
    }

    fn trial(&self, trial: u64) -> TrialResult {
        let cb = &self.codebook;
        let mut rng = self.trial_rng(trial);
        let w_a = rng.gen_range(0..cb.sizes.m_a) as usize;
        let w_b = rng.gen_range(0..cb.sizes.m_b) as usize;
        let w_c = rng.gen_range(0..cb.sizes.m_c) as usize;
        let x = cb.x_word(w_a, w_b, w_c);
        let y: Vec<Symbol> = x
            .iter()
            .map(|&xi| self.channel_rows[xi as usize].sample(&mut rng) as Symbol)
            .collect();

        let relay = self.relay_process(&y, &mut rng);
        let w_c_hat = self.decode(relay.w_a_hat, &relay.z_seq, w_b);
        if relay.w_a_hat == w_a && w_c_hat == Some(w_c) {
            return TrialResult::Success;
        }
        let u = cb.u_word(w_a);
        let typical = self
            .typical_all
            .contains(&[u, &relay.z_seq, x, &y], &mut Vec::new());
        if !relay.z_found || !typical {
            TrialResult::E1
        } else if relay.w_a_hat != w_a {
            TrialResult::E2
        } else {
            TrialResult::E3
        }
    }

    /// Runs every trial. Each trial draws from its own stream of the seed,
    /// so the outcome does not depend on how trials are scheduled.
    pub fn run(&self) -> SimOutcome {
        let [e1, e2, e3] = (0..self.cfg.trials as u64)
            .into_par_iter()
            .map(|t| match self.trial(t) {
                TrialResult::Success => [0, 0, 0],
                TrialResult::E1 => [1, 0, 0],
                TrialResult::E2 => [0, 1, 0],
                TrialResult::E3 => [0, 0, 1],
            })
            .reduce(|| [0u64; 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
        let trials = self.cfg.trials as u64;
        let errors_total = e1 + e2 + e3;
        SimOutcome {
            trials,
            errors_total,
            errors_e1: e1,
            errors_e2: e2,
            errors_e3: e3,
            empirical_pe: errors_total as f64 / trials as f64,
            sizes: self.codebook.sizes,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TrialResult {
    Success,
    E1,
    E2,
    E3,
}

pub fn generate_codebooks(cfg: &SimConfig) -> Result<Codebook> {
    Ok(Simulator::new(cfg.clone())?.codebook)
}

pub fn run_trials(cfg: &SimConfig) -> Result<SimOutcome> {
    Ok(Simulator::new(cfg.clone())?.run())
}

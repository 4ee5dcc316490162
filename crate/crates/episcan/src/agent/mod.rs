//! One-step-MDP policy-gradient search agent.
//!
//! Each iteration encodes a balanced mini-batch into a pooled state, emits a
//! probability simplex over the SNP actions, samples an interaction set,
//! scores it with the MDR reward on the full dataset, and descends the
//! combined objective
//!
//! ```text
//! J = (R - Rhat) * sum_{t in I} -ln P(t)     advantage policy term
//!   + (R - Rhat)^2                           baseline regression
//!   + lambda * sum_t P(t) ln P(t)            entropy regularization
//! ```
//!
//! with one adaptive-moment update. The baseline enters the policy term as a
//! constant: its gradient flows only into the value network through the
//! regression term.

mod adam;
mod net;

pub use adam::Adam;
pub use net::{
    softmax, softmax_backward, Conv1d, Encoder, Linear, PolicyNetwork, PolicyTrace, ValueNetwork,
    ValueTrace,
};

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::action::ActionSet;
use crate::data::{encode_genotypes, sample_minibatch, EncodedBatch, Encoding, GenotypeMatrix, Minibatch};
use crate::error::{Error, Result};
use crate::exhaustive::{ranking_order, RankedSet};
use crate::num::Real;
use crate::reward::{reward, RewardValue};

/// Sequence encoder choice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncoderChoice {
    /// Mean genotype profile over the batch; no encoder parameters.
    Identity,
    /// One 1-D convolution layer with tanh and global average pooling.
    Conv { width: usize, channels: usize },
}

/// How `select_action_set` turns probabilities into a concrete set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionMode {
    /// Draw without replacement proportional to the probabilities.
    Sample,
    /// Take the highest-probability actions, ties to the lower index.
    Greedy,
}

/// Hyperparameters of one training run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    /// Mini-batch size K; even, half drawn from each class.
    pub batch_size: usize,
    /// Maximum interaction order n_max; the selection threshold is 1/n_max.
    pub max_set_size: usize,
    /// Entropy regularization weight lambda.
    pub entropy_weight: T,
    pub learning_rate: T,
    pub max_iterations: u64,
    pub seed: u64,
    pub encoder: EncoderChoice,
    pub encoding: Encoding,
    pub hidden_policy: usize,
    pub hidden_value: usize,
    /// Weights initialized uniformly in [-init_scale, init_scale].
    pub init_scale: T,
    pub beta1: T,
    pub beta2: T,
    pub epsilon: T,
    /// Re-sample the mini-batch every iteration; when false one batch is
    /// drawn at construction and replayed.
    pub resample_batch: bool,
    /// How many distinct best-reward sets a trial report keeps.
    pub report_top_k: usize,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            max_set_size: 4,
            entropy_weight: T::of(0.01),
            learning_rate: T::of(1e-3),
            max_iterations: 5000,
            seed: 0,
            encoder: EncoderChoice::Identity,
            encoding: Encoding::RawCodes,
            hidden_policy: 64,
            hidden_value: 64,
            init_scale: T::of(0.05),
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            epsilon: T::of(1e-8),
            resample_batch: true,
            report_top_k: 10,
        }
    }
}

impl<T: Real> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 || !self.batch_size.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "batch size must be even and at least 2, got {}",
                self.batch_size
            )));
        }
        if self.max_set_size < 2 {
            return Err(Error::invalid(format!(
                "maximum set size must be at least 2, got {}",
                self.max_set_size
            )));
        }
        if self.entropy_weight < T::zero() {
            return Err(Error::invalid("entropy weight must be non-negative"));
        }
        if self.learning_rate <= T::zero() {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("iteration cap must be at least 1"));
        }
        if self.hidden_policy == 0 || self.hidden_value == 0 {
            return Err(Error::invalid("hidden widths must be at least 1"));
        }
        if self.init_scale <= T::zero() {
            return Err(Error::invalid("init scale must be positive"));
        }
        if self.report_top_k == 0 {
            return Err(Error::invalid("report size must be at least 1"));
        }
        if let EncoderChoice::Conv { width, channels } = self.encoder {
            if width == 0 || channels == 0 {
                return Err(Error::invalid("conv width and channels must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Applies the selection rule: the set size is the number of actions whose
/// probability exceeds `1/max_order`, clamped to `[2, max_order]`.
pub fn select_action_set<T: Real, R: Rng>(
    probs: &[T],
    max_order: usize,
    mode: SelectionMode,
    rng: &mut R,
) -> ActionSet {
    let threshold = T::one() / T::from_count(max_order as u64);
    let over = probs.iter().filter(|&&p| p > threshold).count();
    let n = over.clamp(2, max_order).min(probs.len());
    let chosen = match mode {
        SelectionMode::Greedy => {
            let mut order: Vec<usize> = (0..probs.len()).collect();
            order.sort_by(|&a, &b| {
                probs[b]
                    .partial_cmp(&probs[a])
                    .expect("finite probabilities")
                    .then(a.cmp(&b))
            });
            order.truncate(n);
            order
        }
        SelectionMode::Sample => {
            let mut available: Vec<usize> = (0..probs.len()).collect();
            let mut chosen = Vec::with_capacity(n);
            for _ in 0..n {
                let remaining: T = available.iter().map(|&i| probs[i]).sum();
                let mut pick = available.len() - 1;
                if remaining > T::zero() {
                    let u = T::of(rng.gen::<f64>()) * remaining;
                    let mut acc = T::zero();
                    for (slot, &idx) in available.iter().enumerate() {
                        acc += probs[idx];
                        if u < acc {
                            pick = slot;
                            break;
                        }
                    }
                }
                chosen.push(available.remove(pick));
            }
            chosen
        }
    };
    ActionSet::new(chosen).expect("selection yields distinct indices")
}

/// Advantage policy loss: `(R - Rhat) * sum_{t in chosen} -ln P(t)`.
/// The baseline is a constant here; no gradient flows through it.
pub fn loss_policy<T: Real>(
    reward_total: T,
    baseline: T,
    probs: &[T],
    chosen: &ActionSet,
) -> Result<T> {
    let mut neg_log = T::zero();
    for &i in chosen.indices() {
        let p = probs[i];
        if p <= T::zero() {
            return Err(Error::Numeric {
                detail: format!("chosen action {i} has non-positive probability {p}"),
            });
        }
        neg_log -= p.ln();
    }
    Ok((reward_total - baseline) * neg_log)
}

/// Baseline regression loss: `(R - Rhat)^2`.
pub fn loss_value<T: Real>(reward_total: T, baseline: T) -> T {
    let gap = reward_total - baseline;
    gap * gap
}

/// Entropy regularization: `lambda * sum_t P(t) ln P(t)` (zero entries
/// contribute 0). Minimizing this drives the distribution toward uniform.
pub fn loss_entropy<T: Real>(probs: &[T], weight: T) -> T {
    let mut sum = T::zero();
    for &p in probs {
        if p > T::zero() {
            sum += p * p.ln();
        }
    }
    weight * sum
}

/// The three loss components of one step.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct StepLosses<T> {
    pub policy: T,
    pub value: T,
    pub entropy: T,
}

/// Computes the losses and accumulates all parameter gradients for one
/// transition.
///
/// `policy_baseline` is the constant baseline used by the advantage term;
/// the regression term always differentiates the live estimate in `vtrace`,
/// so value parameters receive gradient only from the regression.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_gradients<T: Real>(
    policy: &PolicyNetwork<T>,
    value: &ValueNetwork<T>,
    batch: &EncodedBatch<T>,
    ptrace: &PolicyTrace<T>,
    vtrace: &ValueTrace<T>,
    chosen: &ActionSet,
    reward_total: T,
    policy_baseline: T,
    entropy_weight: T,
    policy_grads: &mut PolicyNetwork<T>,
    value_grads: &mut ValueNetwork<T>,
) -> Result<StepLosses<T>> {
    let probs = &ptrace.probs;
    let policy_loss = loss_policy(reward_total, policy_baseline, probs, chosen)?;
    let value_loss = loss_value(reward_total, vtrace.estimate);
    let entropy_loss = loss_entropy(probs, entropy_weight);

    let advantage = reward_total - policy_baseline;
    let mut dprobs = vec![T::zero(); probs.len()];
    for &i in chosen.indices() {
        dprobs[i] -= advantage / probs[i];
    }
    if entropy_weight > T::zero() {
        for (g, &p) in dprobs.iter_mut().zip(probs) {
            if p > T::zero() {
                *g += entropy_weight * (p.ln() + T::one());
            }
        }
    }
    let dlogits = softmax_backward(probs, &dprobs);
    policy.backward(batch, ptrace, &dlogits, policy_grads);

    let destimate = -T::of(2.0) * (reward_total - vtrace.estimate);
    value.backward(&ptrace.state, vtrace, destimate, value_grads);

    Ok(StepLosses {
        policy: policy_loss,
        value: value_loss,
        entropy: entropy_loss,
    })
}

/// Everything recorded about one training iteration.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepRecord<T> {
    pub iteration: u64,
    pub selected: ActionSet,
    pub reward: RewardValue<T>,
    pub baseline: T,
    pub policy_loss: T,
    pub value_loss: T,
    pub entropy_loss: T,
}

/// A training run in progress: networks, optimizer state and random stream.
/// Single-threaded; concurrent runs each own their agent.
pub struct Agent<T> {
    policy: PolicyNetwork<T>,
    value: ValueNetwork<T>,
    policy_grads: PolicyNetwork<T>,
    value_grads: ValueNetwork<T>,
    optimizer: Adam<T>,
    config: TrainConfig<T>,
    rng: ChaCha8Rng,
    fixed_batch: Option<Minibatch>,
    iteration: u64,
}

impl<T: Real> Agent<T> {
    pub fn new(data: &GenotypeMatrix, config: &TrainConfig<T>) -> Result<Self> {
        config.validate()?;
        let n_actions = data.n_snps();
        if n_actions < 2 {
            return Err(Error::precondition(
                "training needs a dataset with at least 2 SNPs",
            ));
        }
        if config.max_set_size > n_actions {
            return Err(Error::precondition(format!(
                "maximum set size {} exceeds the {} available SNPs",
                config.max_set_size, n_actions
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let scale = config.init_scale;
        let encoder = match config.encoder {
            EncoderChoice::Identity => Encoder::Identity,
            EncoderChoice::Conv { width, channels } => {
                if n_actions < width {
                    return Err(Error::precondition(format!(
                        "conv width {width} exceeds the {n_actions} SNP positions"
                    )));
                }
                Encoder::Conv(Conv1d::random(
                    config.encoding.channels(),
                    channels,
                    width,
                    scale,
                    &mut rng,
                ))
            }
        };
        let state_dim = encoder.state_dim(config.encoding.width(n_actions));
        let policy = PolicyNetwork {
            encoder,
            hidden: Linear::random(state_dim, config.hidden_policy, scale, &mut rng),
            output: Linear::random(config.hidden_policy, n_actions, scale, &mut rng),
        };
        let value = ValueNetwork::new(state_dim, config.hidden_value, scale, &mut rng);
        let fixed_batch = if config.resample_batch {
            None
        } else {
            Some(sample_minibatch(data, config.batch_size, &mut rng)?)
        };
        Ok(Agent {
            policy_grads: policy.zeroed_like(),
            value_grads: value.zeroed_like(),
            policy,
            value,
            optimizer: Adam::new(
                config.learning_rate,
                config.beta1,
                config.beta2,
                config.epsilon,
            ),
            config: config.clone(),
            rng,
            fixed_batch,
            iteration: 0,
        })
    }

    pub fn policy(&self) -> &PolicyNetwork<T> {
        &self.policy
    }

    pub fn value(&self) -> &ValueNetwork<T> {
        &self.value
    }

    pub fn config(&self) -> &TrainConfig<T> {
        &self.config
    }

    /// Action probabilities for an externally supplied batch, without
    /// advancing the training state.
    pub fn forward_probs(&self, data: &GenotypeMatrix, batch: &Minibatch) -> Result<Vec<T>> {
        let encoded = encode_genotypes::<T>(data, batch, self.config.encoding);
        Ok(self.policy.forward(&encoded)?.probs)
    }

    /// One iteration: sample batch, forward, sample a set, score it,
    /// backpropagate and update.
    pub fn step(&mut self, data: &GenotypeMatrix) -> Result<StepRecord<T>> {
        self.iteration += 1;
        let batch = match &self.fixed_batch {
            Some(b) => b.clone(),
            None => sample_minibatch(data, self.config.batch_size, &mut self.rng)?,
        };
        let encoded = encode_genotypes::<T>(data, &batch, self.config.encoding);
        let ptrace = self.policy.forward(&encoded)?;
        let selected = select_action_set(
            &ptrace.probs,
            self.config.max_set_size,
            SelectionMode::Sample,
            &mut self.rng,
        );
        let reward_value = reward::<T>(data, &selected)?;
        let vtrace = self.value.forward(&ptrace.state)?;
        let baseline = vtrace.estimate;

        self.policy_grads.zero();
        self.value_grads.zero();
        let losses = accumulate_gradients(
            &self.policy,
            &self.value,
            &encoded,
            &ptrace,
            &vtrace,
            &selected,
            reward_value.total,
            baseline,
            self.config.entropy_weight,
            &mut self.policy_grads,
            &mut self.value_grads,
        )?;
        let mut params = self.policy.blocks_mut();
        params.extend(self.value.blocks_mut());
        let mut grads = self.policy_grads.blocks();
        grads.extend(self.value_grads.blocks());
        self.optimizer.step(&mut params, &grads);

        Ok(StepRecord {
            iteration: self.iteration,
            selected,
            reward: reward_value,
            baseline,
            policy_loss: losses.policy,
            value_loss: losses.value,
            entropy_loss: losses.entropy,
        })
    }
}

/// Per-run record: what happened, what was found, and how fast.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrialReport<T> {
    pub seed: u64,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations_to_hit: Option<u64>,
    /// Wall-clock; omitted when timing is suppressed for reproducible output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
    /// Best distinct sets by observed reward, best first.
    pub best_sets: Vec<RankedSet<T>>,
    /// Per-iteration reward totals.
    pub reward_trajectory: Vec<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Runs up to `max_iterations` steps. With a ground truth the run stops at
/// the first iteration whose sampled set equals it; otherwise it runs to
/// the cap and reports the top distinct sets by best observed reward.
pub fn train<T: Real>(
    data: &GenotypeMatrix,
    config: &TrainConfig<T>,
    ground_truth: Option<&ActionSet>,
) -> Result<TrialReport<T>> {
    train_with(data, config, ground_truth, |_| Ok(()))
}

/// `train` with a per-step sink, for streaming step records.
pub fn train_with<T: Real>(
    data: &GenotypeMatrix,
    config: &TrainConfig<T>,
    ground_truth: Option<&ActionSet>,
    mut sink: impl FnMut(&StepRecord<T>) -> Result<()>,
) -> Result<TrialReport<T>> {
    let mut agent = Agent::new(data, config)?;
    let started = Instant::now();
    let mut best: BTreeMap<ActionSet, RewardValue<T>> = BTreeMap::new();
    let mut trajectory = Vec::new();
    let mut success = false;
    let mut iterations_to_hit = None;
    for it in 1..=config.max_iterations {
        let record = agent.step(data).map_err(|e| match e {
            Error::Numeric { detail } => Error::Numeric {
                detail: format!("iteration {it}: {detail}"),
            },
            other => other,
        })?;
        trajectory.push(record.reward.total);
        best.entry(record.selected.clone())
            .and_modify(|r| {
                if record.reward.total > r.total {
                    *r = record.reward;
                }
            })
            .or_insert(record.reward);
        sink(&record)?;
        if ground_truth == Some(&record.selected) {
            success = true;
            iterations_to_hit = Some(it);
            break;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let mut best_sets: Vec<RankedSet<T>> = best
        .into_iter()
        .map(|(set, reward)| RankedSet { set, reward })
        .collect();
    best_sets.sort_by(ranking_order);
    best_sets.truncate(config.report_top_k);
    Ok(TrialReport {
        seed: config.seed,
        success,
        iterations_to_hit,
        elapsed_seconds: Some(elapsed),
        best_sets,
        reward_trajectory: trajectory,
        error: None,
    })
}

/// Compares the analytic gradient of the combined objective against central
/// finite differences (step 1e-5) over every parameter of both networks and
/// returns the largest relative error.
///
/// The finite-difference oracle evaluates the same function the analytic
/// pass differentiates: the advantage term's baseline is frozen at its
/// center value, and the regression term sees the state as a detached
/// input, so perturbing encoder parameters moves it only through the
/// policy terms.
pub fn gradient_check<T: Real>(
    policy: &mut PolicyNetwork<T>,
    value: &mut ValueNetwork<T>,
    batch: &EncodedBatch<T>,
    chosen: &ActionSet,
    reward_total: T,
    entropy_weight: T,
) -> Result<T> {
    let ptrace = policy.forward(batch)?;
    let vtrace = value.forward(&ptrace.state)?;
    let baseline0 = vtrace.estimate;
    let state0 = ptrace.state.clone();

    let mut policy_grads = policy.zeroed_like();
    let mut value_grads = value.zeroed_like();
    accumulate_gradients(
        policy,
        value,
        batch,
        &ptrace,
        &vtrace,
        chosen,
        reward_total,
        baseline0,
        entropy_weight,
        &mut policy_grads,
        &mut value_grads,
    )?;
    let mut analytic: Vec<T> = Vec::new();
    for block in policy_grads.blocks().into_iter().chain(value_grads.blocks()) {
        analytic.extend_from_slice(block);
    }

    #[allow(clippy::too_many_arguments)]
    fn objective<T: Real>(
        policy: &PolicyNetwork<T>,
        value: &ValueNetwork<T>,
        batch: &EncodedBatch<T>,
        state0: &[T],
        chosen: &ActionSet,
        reward_total: T,
        baseline0: T,
        entropy_weight: T,
    ) -> Result<T> {
        let ptrace = policy.forward(batch)?;
        let vtrace = value.forward(state0)?;
        let j1 = loss_policy(reward_total, baseline0, &ptrace.probs, chosen)?;
        let j2 = loss_value(reward_total, vtrace.estimate);
        let j3 = loss_entropy(&ptrace.probs, entropy_weight);
        Ok(j1 + j2 + j3)
    }

    let h = T::of(1e-5);
    let floor = T::of(1e-6);
    let mut max_rel = T::zero();
    let mut flat = 0usize;
    for net in 0..2 {
        let n_blocks = if net == 0 {
            policy.blocks().len()
        } else {
            value.blocks().len()
        };
        for b in 0..n_blocks {
            let len = if net == 0 {
                policy.blocks()[b].len()
            } else {
                value.blocks()[b].len()
            };
            for i in 0..len {
                let set_param = |policy: &mut PolicyNetwork<T>, value: &mut ValueNetwork<T>, v: T| {
                    if net == 0 {
                        policy.blocks_mut()[b][i] = v;
                    } else {
                        value.blocks_mut()[b][i] = v;
                    }
                };
                let original = if net == 0 {
                    policy.blocks()[b][i]
                } else {
                    value.blocks()[b][i]
                };
                set_param(policy, value, original + h);
                let plus = objective(
                    policy, value, batch, &state0, chosen, reward_total, baseline0, entropy_weight,
                )?;
                set_param(policy, value, original - h);
                let minus = objective(
                    policy, value, batch, &state0, chosen, reward_total, baseline0, entropy_weight,
                )?;
                set_param(policy, value, original);
                let numeric = (plus - minus) / (T::of(2.0) * h);
                let a = analytic[flat];
                let denom = a.abs().max(numeric.abs()).max(floor);
                let rel = (a - numeric).abs() / denom;
                if rel > max_rel {
                    max_rel = rel;
                }
                flat += 1;
            }
        }
    }
    Ok(max_rel)
}

//! Learnable nonpositive state rewards.
//!
//! Both model kinds squash their raw score through `x -> -softplus(x)`,
//! so every reward is `<= 0` by construction and stays differentiable.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::grid::FeatureField;
use crate::math;
use crate::mdp::Mdp;
use crate::rng::SeededRng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RewardError {
    #[error("feature dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckpointError {
    #[error("checkpoint line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Reward parameterization: linear in the features, or a small MLP
/// (one tanh hidden layer).
#[derive(Debug, Clone, PartialEq)]
pub enum RewardModel {
    Linear(LinearReward),
    Mlp(MlpReward),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearReward {
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpReward {
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// `hidden_dim x input_dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

pub const DEFAULT_HIDDEN_DIM: usize = 16;

impl RewardModel {
    pub fn linear_zeros(input_dim: usize) -> Self {
        RewardModel::Linear(LinearReward {
            weights: vec![0.0; input_dim],
        })
    }

    pub fn linear(weights: Vec<f64>) -> Self {
        RewardModel::Linear(LinearReward { weights })
    }

    /// Small random init, deterministic for a seed.
    pub fn mlp_seeded(input_dim: usize, hidden_dim: usize, seed: u64) -> Self {
        let mut rng = SeededRng::new(seed);
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| 0.2 * (rng.uniform() - 0.5)).collect()
        };
        let w1 = draw(hidden_dim * input_dim);
        let b1 = draw(hidden_dim);
        let w2 = draw(hidden_dim);
        RewardModel::Mlp(MlpReward {
            input_dim,
            hidden_dim,
            w1,
            b1,
            w2,
            b2: 0.0,
        })
    }

    pub fn input_dim(&self) -> usize {
        match self {
            RewardModel::Linear(m) => m.weights.len(),
            RewardModel::Mlp(m) => m.input_dim,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            RewardModel::Linear(m) => m.weights.len(),
            RewardModel::Mlp(m) => m.hidden_dim * m.input_dim + m.hidden_dim + m.hidden_dim + 1,
        }
    }

    /// Raw (pre-squash) score of one feature vector.
    fn raw(&self, features: &[f64]) -> f64 {
        match self {
            RewardModel::Linear(m) => dot(&m.weights, features),
            RewardModel::Mlp(m) => {
                let mut raw = m.b2;
                for i in 0..m.hidden_dim {
                    let pre = dot(&m.w1[i * m.input_dim..(i + 1) * m.input_dim], features) + m.b1[i];
                    raw += m.w2[i] * math::tanh(pre);
                }
                raw
            }
        }
    }

    /// Reward of one feature vector: `-softplus(raw)`, always `<= 0`.
    pub fn reward(&self, features: &[f64]) -> Result<f64, RewardError> {
        if features.len() != self.input_dim() {
            return Err(RewardError::DimensionMismatch {
                expected: self.input_dim(),
                got: features.len(),
            });
        }
        Ok(-math::softplus(self.raw(features)))
    }

    /// Per-state reward vector over the MDP's cells.
    pub fn reward_field(&self, field: &FeatureField, mdp: &Mdp) -> Result<Vec<f64>, RewardError> {
        let mut out = Vec::with_capacity(mdp.n_states());
        for &(r, c) in mdp.state_cells() {
            let reward = self.reward(field.at(r, c))?;
            debug_assert!(reward <= 0.0 && reward.is_finite());
            out.push(reward);
        }
        Ok(out)
    }

    /// Accumulate `coeff * d reward / d params` into `out`.
    pub fn accumulate_param_grad(&self, features: &[f64], coeff: f64, out: &mut [f64]) {
        let d_raw = -math::sigmoid(self.raw(features)) * coeff;
        match self {
            RewardModel::Linear(m) => {
                debug_assert_eq!(out.len(), m.weights.len());
                for (o, &f) in out.iter_mut().zip(features) {
                    *o += d_raw * f;
                }
            }
            RewardModel::Mlp(m) => {
                let (h, f_dim) = (m.hidden_dim, m.input_dim);
                let (w1_grad, rest) = out.split_at_mut(h * f_dim);
                let (b1_grad, rest) = rest.split_at_mut(h);
                let (w2_grad, b2_grad) = rest.split_at_mut(h);
                for i in 0..h {
                    let pre = dot(&m.w1[i * f_dim..(i + 1) * f_dim], features) + m.b1[i];
                    let act = math::tanh(pre);
                    w2_grad[i] += d_raw * act;
                    let d_pre = d_raw * m.w2[i] * (1.0 - act * act);
                    b1_grad[i] += d_pre;
                    for (j, &f) in features.iter().enumerate() {
                        w1_grad[i * f_dim + j] += d_pre * f;
                    }
                }
                b2_grad[0] += d_raw;
            }
        }
    }

    /// Flatten parameters; layout matches [`Self::set_params`] and the
    /// checkpoint format.
    pub fn params(&self) -> Vec<f64> {
        match self {
            RewardModel::Linear(m) => m.weights.clone(),
            RewardModel::Mlp(m) => {
                let mut out = m.w1.clone();
                out.extend_from_slice(&m.b1);
                out.extend_from_slice(&m.w2);
                out.push(m.b2);
                out
            }
        }
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.param_count());
        match self {
            RewardModel::Linear(m) => m.weights.copy_from_slice(flat),
            RewardModel::Mlp(m) => {
                let (h, f) = (m.hidden_dim, m.input_dim);
                m.w1.copy_from_slice(&flat[..h * f]);
                m.b1.copy_from_slice(&flat[h * f..h * f + h]);
                m.w2.copy_from_slice(&flat[h * f + h..h * f + 2 * h]);
                m.b2 = flat[h * f + 2 * h];
            }
        }
    }

    /// Ascend the parameters by `rate * grad`.
    pub fn ascend(&mut self, grad: &[f64], rate: f64) {
        let mut p = self.params();
        for (pi, gi) in p.iter_mut().zip(grad) {
            *pi += rate * gi;
        }
        self.set_params(&p);
    }

    /// Checkpoint text: kind line, dimension lines, then one parameter
    /// per line with 17 significant digits (round-trips f64 exactly).
    pub fn encode_checkpoint(&self) -> String {
        let mut out = String::new();
        match self {
            RewardModel::Linear(m) => {
                out.push_str("linear\n");
                out.push_str(&format!("features {}\n", m.weights.len()));
            }
            RewardModel::Mlp(m) => {
                out.push_str("mlp\n");
                out.push_str(&format!("features {}\n", m.input_dim));
                out.push_str(&format!("hidden {}\n", m.hidden_dim));
            }
        }
        for v in self.params() {
            out.push_str(&format!("{v:.16e}\n"));
        }
        out
    }

    pub fn decode_checkpoint(text: &str) -> Result<RewardModel, CheckpointError> {
        let err = |line: usize, reason: &str| CheckpointError::Malformed {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, kind) = lines.next().ok_or_else(|| err(0, "empty checkpoint"))?;
        let dim_line = |entry: Option<(usize, &str)>, name: &str| -> Result<usize, CheckpointError> {
            let (i, l) = entry.ok_or_else(|| err(0, "missing dimension line"))?;
            let rest = l
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| err(i, "bad dimension line"))?;
            rest.parse().map_err(|_| err(i, "bad dimension value"))
        };
        let mut model = match kind {
            "linear" => {
                let f = dim_line(lines.next(), "features")?;
                RewardModel::linear_zeros(f)
            }
            "mlp" => {
                let f = dim_line(lines.next(), "features")?;
                let h = dim_line(lines.next(), "hidden")?;
                RewardModel::Mlp(MlpReward {
                    input_dim: f,
                    hidden_dim: h,
                    w1: vec![0.0; h * f],
                    b1: vec![0.0; h],
                    w2: vec![0.0; h],
                    b2: 0.0,
                })
            }
            other => return Err(err(0, &format!("unknown model kind '{other}'"))),
        };
        let mut params = Vec::with_capacity(model.param_count());
        for (i, l) in lines {
            if l.is_empty() {
                continue;
            }
            params.push(l.parse::<f64>().map_err(|_| err(i, "bad parameter value"))?);
        }
        if params.len() != model.param_count() {
            return Err(err(
                0,
                &format!(
                    "expected {} parameters, got {}",
                    model.param_count(),
                    params.len()
                ),
            ));
        }
        model.set_params(&params);
        Ok(model)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

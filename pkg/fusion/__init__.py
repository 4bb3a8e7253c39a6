from fusion.weights import (
    FusionInput, agent_prob, fuse, classify, clip, check_simplex,
    ablation_mask, apply_mask, policy_input, fusion_input,
)
from fusion.policy import PolicyParams, dirichlet_log_prob, policy_sample, policy_mean
from fusion.ppo import Episode, AdamOptimizer, compute_advantages, ppo_update, surrogate_terms
from fusion.checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from fusion.trainer import FusionSample, TrainingResult, train, train_on_samples, collect_samples
from fusion.inference import DetectionResult, Detector, infer

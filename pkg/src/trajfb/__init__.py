"""Tabular RL from trajectory-level return feedback."""
from .mdp import (
    Bernoulli, ClippedGaussian, Fixed, Mdp, OccupancyMeasure, Policy, Schedule, Trajectory,
    backward_induction, evaluate_policy, occupancy_measure, policy_value, sample_episode, validate_mdp,
)
from .estimation import (
    CountTable, LsEstimator, confidence_radius, exploration_bonus, ls_init, noise_scale, transition_estimate,
)
from .agents import AgentConfig, EpisodeFeedback, make_agent

__version__ = "0.1.0"

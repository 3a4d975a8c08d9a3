"""Uniform-sampling experience replay with FIFO eviction."""

from dataclasses import dataclass

import numpy as np


@dataclass
class Batch:
    obs: np.ndarray  # (n, obs_dim)
    actions: np.ndarray  # (n,)
    rewards: np.ndarray  # (n,)
    next_obs: np.ndarray  # (n, obs_dim)
    done: np.ndarray  # (n,) episode-final flags


class ReplayMemory:
    """Preallocated ring buffer of transitions; oldest evicted first."""

    def __init__(self, capacity: int, obs_dim: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.obs = np.empty((capacity, obs_dim))
        self.actions = np.empty(capacity, dtype=np.int64)
        self.rewards = np.empty(capacity)
        self.next_obs = np.empty((capacity, obs_dim))
        self.done = np.empty(capacity, dtype=bool)
        self._size = 0
        self._cursor = 0

    def __len__(self):
        return self._size

    def push(self, obs, action, reward, next_obs, done):
        i = self._cursor
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.done[i] = done
        self._cursor = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, batch_size: int, rng) -> Batch:
        """Uniform sample with replacement; requires size >= batch_size."""
        if self._size < batch_size:
            raise ValueError(
                f"cannot sample {batch_size} transitions from a memory of size {self._size}"
            )
        idx = rng.integers(0, self._size, size=batch_size)
        return Batch(
            obs=self.obs[idx].copy(),
            actions=self.actions[idx].copy(),
            rewards=self.rewards[idx].copy(),
            next_obs=self.next_obs[idx].copy(),
            done=self.done[idx].copy(),
        )

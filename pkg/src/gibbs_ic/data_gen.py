"""Synthetic teachers and Gaussian regression datasets.

All randomness flows through numpy's counter-based Philox generator keyed
by ``SeedSequence``, so a given seed reproduces the same bytes on every
platform and with any number of worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Holdout sets live in a disjoint seed namespace: test_seed = train_seed ^ HOLDOUT_SEED_XOR.
HOLDOUT_SEED_XOR = 0x5EED7E57

_UINT64_MASK = (1 << 64) - 1


def rng_from(seed: int, *path: int) -> np.random.Generator:
    """Philox generator keyed by (seed, path...); path splits independent streams."""
    ss = np.random.SeedSequence(entropy=int(seed) & _UINT64_MASK, spawn_key=tuple(int(x) for x in path))
    return np.random.Generator(np.random.Philox(ss))


def holdout_seed(seed: int) -> int:
    """Seed for the test set paired with a training seed (disjoint namespace)."""
    return (int(seed) & _UINT64_MASK) ^ HOLDOUT_SEED_XOR


@dataclass(frozen=True)
class TeacherModel:
    """Ground-truth linear generator: y = x'w_star + noise."""

    w_star: np.ndarray  # unit Euclidean norm, length d
    d: int
    noise_var: float

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"d must be >= 1, got {self.d}")
        if not self.noise_var > 0:
            raise ValueError(f"noise_var must be > 0, got {self.noise_var}")
        if abs(self.w_star @ self.w_star - 1.0) > 1e-12:
            raise ValueError("w_star must have unit squared norm")
        self.w_star.flags.writeable = False


@dataclass(frozen=True)
class Dataset:
    """An (X, Y) sample with the seed that regenerates it bit-exactly."""

    X: np.ndarray  # n x d
    Y: np.ndarray  # length n
    n: int
    seed: int

    def __post_init__(self):
        if self.X.shape[0] != self.n or self.Y.shape[0] != self.n:
            raise ValueError(f"row counts disagree: X {self.X.shape}, Y {self.Y.shape}, n={self.n}")
        self.X.flags.writeable = False
        self.Y.flags.writeable = False


def make_teacher(d: int, noise_var: float, seed: int) -> TeacherModel:
    """Draw a unit-norm Gaussian teacher vector, deterministically in the seed."""
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    if not noise_var > 0:
        raise ValueError(f"noise_var must be > 0, got {noise_var}")
    w = rng_from(seed, 0x7EAC).standard_normal(d)
    norm = np.linalg.norm(w)
    if norm == 0.0:  # probability-zero draw; retry on the adjacent seed
        return make_teacher(d, noise_var, seed + 1)
    return TeacherModel(w_star=w / norm, d=d, noise_var=float(noise_var))


def sample_dataset(teacher: TeacherModel, n: int, seed: int) -> Dataset:
    """n i.i.d. rows x ~ N(0, I_d), y = x'w_star + eps, eps ~ N(0, noise_var)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = rng_from(seed, 0xDA7A)
    X = rng.standard_normal((n, teacher.d))
    eps = rng.standard_normal(n) * np.sqrt(teacher.noise_var)
    Y = X @ teacher.w_star + eps
    return Dataset(X=X, Y=Y, n=n, seed=int(seed))


def dump_dataset_csv(ds: Dataset, path: str) -> None:
    """Write `x_0,...,x_{d-1},y` rows at 17 significant digits."""
    d = ds.X.shape[1]
    header = ",".join([f"x_{j}" for j in range(d)] + ["y"])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for i in range(ds.n):
            vals = [f"{v:.17g}" for v in ds.X[i]] + [f"{ds.Y[i]:.17g}"]
            fh.write(",".join(vals) + "\n")

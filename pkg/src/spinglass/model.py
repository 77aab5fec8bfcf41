"""Spin configurations, covariance models, Gaussian disorder, Hamiltonians.

A spin configuration on N sites is a length-N ndarray with entries in
{-1, +1}.  The Hamiltonian is the Gaussian field

    H(sigma) = sum_p sqrt(c_p) N^{-(p-1)/2} sum_{i_1..i_p} J^(p)_{i_1..i_p}
               sigma_{i_1} ... sigma_{i_p}

with one iid standard Gaussian per ordered p-tuple (repeats allowed), which
makes the covariance exactly E[H(a)H(b)] = N xi(q_ab) with
xi(q) = sum_p c_p q^p and q_ab the overlap.  The perturbation field K uses
the extra 1/sqrt(N) so that E[K(a)K(b)] = xi(q_ab).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError
from .seeding import rng_from

N_CAP = 24
P_CAP = 3


def random_spins(n, rng, size=None):
    """Uniform random configurations, shape (n,) or (size, n), int8."""
    shape = (n,) if size is None else (size, n)
    return (rng.integers(0, 2, size=shape, dtype=np.int8) * 2 - 1).astype(np.int8)


def spins_from_code(code, n):
    """Decode configuration bit-codes: bit i set <-> spin i = +1.

    `code` may be a scalar or an array; output has shape (*code.shape, n).
    """
    codes = np.asarray(code, dtype=np.uint64)
    bits = (codes[..., None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)
    return (bits.astype(np.int8) * 2 - 1).astype(np.int8)


def code_from_spins(spins):
    """Inverse of spins_from_code."""
    spins = np.asarray(spins)
    n = spins.shape[-1]
    bits = (spins > 0).astype(np.uint64)
    return (bits << np.arange(n, dtype=np.uint64)).sum(axis=-1, dtype=np.uint64)


def _check_spins(spins):
    spins = np.asarray(spins)
    if spins.ndim not in (1, 2) or spins.shape[-1] < 1:
        raise ValueError(f"expected spins of shape (n,) or (batch, n), got {spins.shape}")
    if not np.all(np.abs(spins) == 1):
        raise ValueError("spin entries must be exactly -1 or +1")
    return spins


def overlap(a, b):
    """Normalized inner product q = (1/N) sum_i a_i b_i of two configurations.

    Satisfies #{i: a_i != b_i} = (N/2)(1 - q).
    """
    a = _check_spins(a)
    b = _check_spins(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"size mismatch: {a.shape} vs {b.shape}")
    n = a.shape[0]
    return float(np.dot(a.astype(np.int64), b.astype(np.int64))) / n


@dataclass(frozen=True)
class CovarianceFunction:
    """xi(q) = sum_p c_p q^p with integer p >= 1 and c_p >= 0.

    The SK model is the preset c_2 = 1.
    """

    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        cleaned = {}
        for p, c in self.coefficients.items():
            p = int(p)
            c = float(c)
            if p < 1:
                raise ValueError(f"power p must be >= 1, got {p}")
            if c < 0:
                raise ValueError(f"coefficient c_{p} must be >= 0, got {c}")
            if c > 0:
                cleaned[p] = c
        if not cleaned:
            raise ValueError("at least one coefficient must be positive")
        object.__setattr__(self, "coefficients", dict(sorted(cleaned.items())))

    @classmethod
    def sk(cls):
        return cls({2: 1.0})

    @property
    def powers(self):
        return tuple(self.coefficients)

    def xi(self, q):
        """Evaluate xi(q); q scalar or array in [-1, 1]."""
        q = np.asarray(q, dtype=float)
        out = np.zeros_like(q)
        for p, c in self.coefficients.items():
            out = out + c * q**p
        return float(out) if out.ndim == 0 else out

    def to_manifest(self):
        return {str(p): c for p, c in self.coefficients.items()}

    @classmethod
    def from_manifest(cls, xi):
        return cls({int(p): float(c) for p, c in xi.items()})


@dataclass(frozen=True)
class DisorderRealization:
    """Gaussian couplings for one sample of the random Hamiltonian.

    `couplings[p]` is the dense tensor of iid N(0,1) variables indexed by
    ordered p-tuples, drawn in ascending-p order from a single Philox
    stream keyed by (seed, "disorder"), so the realization is bit
    reproducible from (seed, n, covariance).
    """

    seed: int
    n: int
    covariance: CovarianceFunction
    couplings: dict

    def to_manifest(self):
        """Manifest entry; disorder itself is never serialized."""
        return {"seed": int(self.seed), "n": int(self.n), "xi": self.covariance.to_manifest()}


def draw_disorder(covariance, n, seed, stream="disorder") -> DisorderRealization:
    """Sample a DisorderRealization for `covariance` on n sites.

    Refuses n > 24 or p > 3 (tensors are stored densely at desk scale).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > N_CAP:
        raise CapacityError(f"n = {n} exceeds the dense-storage cap {N_CAP}")
    bad = [p for p in covariance.powers if p > P_CAP]
    if bad:
        raise CapacityError(f"powers {bad} exceed the dense-storage cap p <= {P_CAP}")
    rng = rng_from(seed, stream, n)
    couplings = {p: rng.standard_normal((n,) * p) for p in covariance.powers}
    return DisorderRealization(seed=int(seed), n=n, covariance=covariance, couplings=couplings)


def _contract(couplings_p, p, spins):
    s = spins.astype(float)
    if p == 1:
        return s @ couplings_p
    if p == 2:
        return np.einsum("...i,ij,...j->...", s, couplings_p, s)
    if p == 3:
        return np.einsum("...i,ijk,...j,...k->...", s, couplings_p, s, s)
    raise CapacityError(f"p = {p} beyond dense cap")


def _gaussian_field(d, spins, norm_shift):
    spins = _check_spins(spins)
    if spins.shape[-1] != d.n:
        raise ValueError(f"size mismatch: disorder has n={d.n}, spins have n={spins.shape[-1]}")
    total = 0.0
    for p, c in d.covariance.coefficients.items():
        scale = np.sqrt(c) * d.n ** (-(p - 1 + norm_shift) / 2)
        total = total + scale * _contract(d.couplings[p], p, spins)
    return total if np.ndim(total) else float(total)


def hamiltonian(d, spins):
    """H(sigma); accepts a single configuration (n,) or a batch (b, n).

    Over the disorder distribution, E[H(a)H(b)] = N xi(q_ab) exactly.
    """
    return _gaussian_field(d, spins, norm_shift=0)


def perturbation_field(d, spins):
    """K(sigma), the stochastic-stability perturbation.

    Same construction as `hamiltonian` with one extra 1/sqrt(N), so
    E[K(a)K(b)] = xi(q_ab) = (1/N) E[H(a)H(b)].
    """
    return _gaussian_field(d, spins, norm_shift=1)


def scaled_tensors(d, kind="hamiltonian"):
    """Couplings with the per-p prefactors folded in (enumeration input).

    kind = "hamiltonian": scale sqrt(c_p) N^{-(p-1)/2};
    kind = "perturbation": scale sqrt(c_p) N^{-p/2}.
    """
    shift = {"hamiltonian": 0, "perturbation": 1}[kind]
    out = {}
    for p, c in d.covariance.coefficients.items():
        out[p] = np.sqrt(c) * d.n ** (-(p - 1 + shift) / 2) * d.couplings[p]
    return out

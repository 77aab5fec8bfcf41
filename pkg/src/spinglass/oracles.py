"""Overlap-sample oracles: the bridges between measures and statistics.

An oracle produces blocks of overlap matrices.  One `sample_block` call
corresponds to one fresh draw of the measure's own randomness (disorder
realization, cascade weights, ...) and returns n_inner replica-set
matrices from it, matching the nested error model of
observables.estimate_observable.  Oracles also expose `quantize`, which
rounds overlaps to the model's exact value lattice so that coincidence
events can be tested without floating-point false negatives.
"""

import numpy as np

from . import gibbs, model, rpc
from .coalescent import simulate_bs_coalescent
from .errors import ConfigError
from .observables import iter_overlap_samples, overlap_matrix


class GibbsOracle:
    """Exact-enumeration Gibbs oracle for a mixed p-spin model.

    Each block draws a fresh disorder realization (and an independent
    perturbation realization when lam > 0), builds the exact table(s), and
    samples iid replicas.  With a beta window, inner draws are spread
    round-robin over n_betas equally spaced values in
    [beta - half_width, beta + half_width], which implements the
    "almost all beta" averaging used for Ghirlanda-Guerra trend checks.
    sort_replicas=True emits replicas sorted by energy, an intentionally
    non-exchangeable stream for negative controls.
    """

    def __init__(
        self,
        covariance,
        n,
        beta,
        lam=0.0,
        beta_window=0.0,
        n_betas=5,
        sort_replicas=False,
    ):
        self.covariance = covariance
        self.n = n
        self.beta = float(beta)
        self.lam = float(lam)
        self.beta_window = float(beta_window)
        self.n_betas = int(n_betas)
        self.sort_replicas = bool(sort_replicas)

    def _betas(self):
        if self.beta_window == 0.0:
            return [self.beta]
        lo, hi = self.beta - self.beta_window, self.beta + self.beta_window
        return list(np.linspace(lo, hi, self.n_betas))

    def sample_block(self, rng, s, n_inner):
        seed = int(rng.integers(0, 2**63))
        d = model.draw_disorder(self.covariance, self.n, seed, stream="disorder")
        d_prime = None
        if self.lam > 0:
            d_prime = model.draw_disorder(self.covariance, self.n, seed, stream="perturbation")
        out = np.empty((n_inner, s, s))
        betas = self._betas()
        tables = {}
        for t in range(n_inner):
            beta = betas[t % len(betas)]
            if beta not in tables:
                if d_prime is None:
                    tables[beta] = gibbs.build_gibbs(d, beta)
                else:
                    tables[beta] = gibbs.build_perturbed_gibbs(d, d_prime, beta, self.lam)
            replicas = gibbs.sample_replicas(tables[beta], s, rng)
            if self.sort_replicas:
                order = np.argsort(model.hamiltonian(d, replicas), kind="stable")
                replicas = replicas[order]
            out[t] = overlap_matrix(replicas)
        return out

    def quantize(self, q):
        return np.rint(np.asarray(q) * self.n) / self.n


class RpcOracle:
    """Time-change oracle: each matrix comes from a fresh coalescent run.

    The measure randomness and the replica randomness are entangled in the
    coalescent, so every matrix is its own outer draw; blocks are plain
    groups of n_inner iid matrices.
    """

    def __init__(self, x):
        self.x = x

    def sample_block(self, rng, s, n_inner):
        out = np.empty((n_inner, s, s))
        for t in range(n_inner):
            out[t] = rpc.rpc_overlaps(self.x, s, rng)
        return out

    def quantize(self, q):
        return np.asarray(q)  # entries are exact breakpoint copies


class CascadeOracle:
    """Poisson-Dirichlet cascade oracle: one cascade per block (outer
    randomness), n_inner atom-sampled matrices from it."""

    def __init__(self, x, truncation=10_000):
        self.x = x
        self.truncation = int(truncation)

    def sample_block(self, rng, s, n_inner):
        mu = rpc.pd_cascade(self.x, self.truncation, rng)
        out = np.empty((n_inner, s, s))
        for t in range(n_inner):
            out[t] = rpc.sample_from_directing(mu, s, rng)
        return out

    def quantize(self, q):
        return np.asarray(q)


class SphereOracle:
    """Continuous baseline: replicas are iid uniform unit vectors in R^dim,
    so overlap coincidences have probability zero."""

    def __init__(self, dim=50):
        self.dim = int(dim)

    def sample_block(self, rng, s, n_inner):
        v = rng.standard_normal((n_inner, s, self.dim))
        v /= np.linalg.norm(v, axis=-1, keepdims=True)
        q = np.einsum("tik,tjk->tij", v, v)
        for t in range(n_inner):
            np.fill_diagonal(q[t], 1.0)
        return q

    def quantize(self, q):
        return np.asarray(q)


class ReplayOracle:
    """Serves recorded overlap matrices (JSONL exchange format) as blocks.

    Records are consumed sequentially; a request for s replicas takes the
    top-left s x s corner of the next record, so identity checks that
    interleave (s+1)- and 2-replica draws read disjoint records.  The rng
    argument is accepted for protocol compatibility and ignored.
    """

    def __init__(self, matrices):
        self._matrices = [np.asarray(q, dtype=float) for q in matrices]
        self._cursor = 0

    @classmethod
    def from_jsonl(cls, path):
        return cls(list(iter_overlap_samples(path)))

    def sample_block(self, rng, s, n_inner):
        del rng
        if self._cursor + n_inner > len(self._matrices):
            raise ValueError(
                f"replay exhausted: need {n_inner} more records, "
                f"{len(self._matrices) - self._cursor} left"
            )
        out = np.empty((n_inner, s, s))
        for t in range(n_inner):
            q = self._matrices[self._cursor + t]
            if q.shape[0] < s:
                raise ValueError(f"record has {q.shape[0]} replicas, need {s}")
            out[t] = q[:s, :s]
        self._cursor += n_inner
        return out

    def quantize(self, q):
        return np.asarray(q)


def coalescent_tau_oracle(rng, s, n_inner):
    """Blocks of exp(-tau) matrices (diagonal 1), for exchangeability tests
    of the raw coalescence times."""
    out = np.empty((n_inner, s, s))
    for t in range(n_inner):
        run = simulate_bs_coalescent(s, rng)
        out[t] = np.exp(-run.tau)
    return out


def oracle_from_config(spec):
    """Build an oracle from a config dict with a "type" discriminator."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"oracle spec must be a dict with a 'type' key, got {spec!r}")
    spec = dict(spec)
    kind = spec.pop("type")
    try:
        if kind == "sk":
            xi = spec.pop("xi", {"2": 1.0})
            cov = model.CovarianceFunction.from_manifest(xi)
            return GibbsOracle(cov, **spec)
        if kind == "rpc":
            x = _x_from_config(spec.pop("x"))
            return RpcOracle(x, **spec)
        if kind == "cascade":
            x = _x_from_config(spec.pop("x"))
            return CascadeOracle(x, **spec)
        if kind == "sphere":
            return SphereOracle(**spec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad oracle spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown oracle type {kind!r}")


def _x_from_config(data):
    if not isinstance(data, dict):
        raise ConfigError(f"parameter function must be a dict, got {data!r}")
    try:
        return rpc.ParameterFunction(
            tuple(data["breakpoints"]), tuple(data["values"])
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad parameter function {data!r}: {exc}") from exc

"""Bolthausen-Sznitman coalescent restricted to n labels.

The process starts from singleton blocks {1}..{n}.  With b blocks alive,
each k-subset of blocks merges at rate lambda_{b,k} = (k-2)!(b-k)!/(b-1)!
(the Lambda-coalescent rates for Lambda = uniform on [0,1]), which gives
the closed forms used here: total merge rate b-1 and merger-size law
P(k) = b / (k(k-1)(b-1)).  Both are re-derived by brute force in the test
suite before use.  Pairwise coalescence times tau_ij satisfy the
ultrametric inequality tau_ij <= max(tau_ik, tau_jk) exactly because the
partitions are nested.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError

N_CAP = 10_000


@dataclass(frozen=True)
class Partition:
    """Partition of {1..n} into disjoint blocks covering all labels.

    Blocks are sorted tuples, listed in order of their smallest label
    (the canonical block identity).
    """

    n: int
    blocks: tuple

    def __post_init__(self):
        seen = set()
        for block in self.blocks:
            if not block:
                raise ValueError("blocks must be nonempty")
            if seen.intersection(block):
                raise ValueError("blocks must be disjoint")
            seen.update(block)
        if seen != set(range(1, self.n + 1)):
            raise ValueError(f"blocks must cover 1..{self.n} exactly")
        canon = tuple(tuple(sorted(b)) for b in self.blocks)
        object.__setattr__(self, "blocks", tuple(sorted(canon, key=lambda b: b[0])))

    @classmethod
    def singletons(cls, n):
        return cls(n, tuple((i,) for i in range(1, n + 1)))

    def block_of(self, label):
        for block in self.blocks:
            if label in block:
                return block
        raise KeyError(label)


@dataclass(frozen=True)
class CoalescentRun:
    """One realization: events are (time, labels of the merged blocks).

    Each event records the smallest labels (canonical representatives) of
    the blocks merged at that time.  tau is the n x n matrix of pairwise
    coalescence times (tau[i, j] refers to labels i+1, j+1).
    """

    n: int
    events: tuple
    tau: np.ndarray


def merger_rate(b, k):
    """lambda_{b,k} = (k-2)!(b-k)!/(b-1)! for 2 <= k <= b."""
    if not 2 <= k <= b:
        raise ValueError(f"need 2 <= k <= b, got k={k}, b={b}")
    return math.factorial(k - 2) * math.factorial(b - k) / math.factorial(b - 1)


def merger_size_pmf(b):
    """P(merger of size k | b blocks) = b/(k(k-1)(b-1)) for k = 2..b."""
    k = np.arange(2, b + 1)
    return b / (k * (k - 1) * (b - 1))


def _sample_merger_size(b, u):
    # exact inverse CDF: F(k) = b(k-1) / ((b-1)k)
    k = math.ceil(b / (b - u * (b - 1)))
    return min(max(k, 2), b)


def _partial_fisher_yates(b, k, rng):
    idx = list(range(b))
    u = rng.random(k)
    for i in range(k):
        j = i + int(u[i] * (b - i))
        idx[i], idx[j] = idx[j], idx[i]
    return sorted(idx[:k])


def simulate_bs_coalescent(n, rng) -> CoalescentRun:
    """Run the coalescent on labels {1..n} until a single block remains."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > N_CAP:
        raise CapacityError(f"n = {n} exceeds the cap {N_CAP}")
    blocks = [[i] for i in range(1, n + 1)]  # kept sorted by smallest label
    events = []
    rows, cols, times = [], [], []
    t = 0.0
    while len(blocks) >= 2:
        b = len(blocks)
        u = rng.random(2)
        t += -np.log1p(-u[0]) / (b - 1)
        k = _sample_merger_size(b, u[1])
        chosen = _partial_fisher_yates(b, k, rng)
        merged_blocks = [blocks[i] for i in chosen]
        events.append((t, tuple(blk[0] for blk in merged_blocks)))
        for a in range(k):
            for c in range(a + 1, k):
                for i in merged_blocks[a]:
                    rows.extend([i - 1] * len(merged_blocks[c]))
                    cols.extend(j - 1 for j in merged_blocks[c])
                    times.extend([t] * len(merged_blocks[c]))
        new_block = sorted(x for blk in merged_blocks for x in blk)
        blocks = [blk for i, blk in enumerate(blocks) if i not in chosen]
        blocks.append(new_block)
        blocks.sort(key=lambda blk: blk[0])
    tau = np.zeros((n, n))
    tau[rows, cols] = times
    tau[cols, rows] = times
    return CoalescentRun(n=n, events=tuple(events), tau=tau)


def coalescence_times(run) -> np.ndarray:
    """Recompute tau from the event log: tau_ij = first time i and j share
    a block.  Independent of the matrix filled during simulation."""
    tau = np.zeros((run.n, run.n))
    blocks = {i: [i] for i in range(1, run.n + 1)}
    for t, reps in run.events:
        merged_members = [blocks.pop(r) for r in reps]
        for a in range(len(merged_members)):
            ia = np.asarray(merged_members[a]) - 1
            for c in range(a + 1, len(merged_members)):
                ic = np.asarray(merged_members[c]) - 1
                tau[np.ix_(ia, ic)] = t
                tau[np.ix_(ic, ia)] = t
        merged = sorted(x for m in merged_members for x in m)
        blocks[merged[0]] = merged
    return tau


def partition_at(run, t) -> Partition:
    """Partition after all events with time <= t (right-continuous)."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    blocks = {i: [i] for i in range(1, run.n + 1)}
    for et, reps in run.events:
        if et > t:
            break
        merged = sorted(x for r in reps for x in blocks.pop(r))
        blocks[merged[0]] = merged
    return Partition(run.n, tuple(tuple(b) for b in blocks.values()))


def ultrametric_violations(tau):
    """Number of triples (i,j,k) with tau_ij > max(tau_ik, tau_jk)."""
    tau = np.asarray(tau)
    upper = np.maximum(tau[:, None, :], tau[None, :, :])  # [i, j, k]
    return int(np.sum(tau[:, :, None] > upper))


def run_to_json(run) -> str:
    events = [[t, list(reps)] for t, reps in run.events]
    return json.dumps({"n": run.n, "events": events})


def run_from_json(text) -> CoalescentRun:
    data = json.loads(text)
    events = tuple((float(t), tuple(int(r) for r in reps)) for t, reps in data["events"])
    run = CoalescentRun(n=int(data["n"]), events=events, tau=np.zeros((data["n"], data["n"])))
    return CoalescentRun(n=run.n, events=run.events, tau=coalescence_times(run))

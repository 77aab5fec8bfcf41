"""The Bolthausen-Sznitman coalescent: partitions, times, rates.

Simulates the merging-partition process, reads off pairwise coalescence
times, checks the ultrametric inequality exactly, and compares empirical
transition statistics against the closed forms (total rate b-1,
merger-size law b/(k(k-1)(b-1))).
"""

import numpy as np

from spinglass import (
    coalescence_times,
    merger_size_pmf,
    partition_at,
    rng_from,
    simulate_bs_coalescent,
    ultrametric_violations,
)

print("=" * 64)
print("1. One realization on 8 labels")
print("=" * 64)
run = simulate_bs_coalescent(8, rng_from(7, "demo2"))
for t, reps in run.events:
    print(f"  t = {t:6.3f}: blocks {reps} merge")
mid = run.events[len(run.events) // 2][0]
print(f"partition at t = {mid:.3f}: {partition_at(run, mid).blocks}")
print(f"tau matrix (first 4 labels):")
print(np.array2string(run.tau[:4, :4], precision=3))
print(f"replay from event log matches: {np.array_equal(coalescence_times(run), run.tau)}")

print()
print("=" * 64)
print("2. Ultrametricity, exactly")
print("=" * 64)
total = sum(
    ultrametric_violations(simulate_bs_coalescent(15, rng_from(7, "demo2-u", i)).tau)
    for i in range(2000)
)
print(f"violations of tau_ij <= max(tau_ik, tau_jk) over 2000 runs, n=15: {total}")

print()
print("=" * 64)
print("3. Waiting times and merger sizes vs closed forms")
print("=" * 64)
waits, sizes = {}, {}
for i in range(4000):
    r = simulate_bs_coalescent(12, rng_from(7, "demo2-s", i))
    b, prev = 12, 0.0
    for t, reps in r.events:
        waits.setdefault(b, []).append(t - prev)
        sizes.setdefault(b, []).append(len(reps))
        prev = t
        b -= len(reps) - 1
print(" b   visits   mean wait   expected 1/(b-1)")
for b in (12, 8, 5, 3, 2):
    ws = np.asarray(waits[b])
    print(f"{b:2d}  {ws.size:7d}   {ws.mean():9.4f}   {1 / (b - 1):9.4f}")
ks = np.asarray(sizes[12])
pmf = merger_size_pmf(12)
print("merger-size law at b = 12 (first four k):")
print("  k    freq     expected")
for k in (2, 3, 4, 5):
    print(f"  {k}   {np.mean(ks == k):.4f}   {pmf[k - 2]:.4f}")

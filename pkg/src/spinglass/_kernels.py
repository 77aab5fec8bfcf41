"""Gray-code enumeration of mixed p-spin energies over the hypercube.

The kernel walks all 2^n configurations in Gray-code order (one spin flip
per step), maintains the energy by incremental updates, and stores it at
the configuration bit-code (bit i set <-> spin i = +1).  The flip update
for site k isolates the terms that are odd in sigma_k:

    p=1:  dH = -2 s_k a1[k]
    p=2:  dH = -2 s_k ( sum_j (a2[k,j]+a2[j,k]) sigma_j - 2 a2[k,k] s_k )
    p=3:  dH = -2 s_k ( B_k + a3[k,k,k] ),
          B_k = sum_{j,l != k} (a3[k,j,l]+a3[j,k,l]+a3[j,l,k]) sigma_j sigma_l

computed here with the symmetrized slice matrices m3[k] precomputed in
numpy.  Compiled with numba when available; the pure-Python body is the
fallback (slow, same results).
"""

import numpy as np

try:
    from numba import njit

    _jit = njit(cache=True)
except ImportError:  # pragma: no cover - numba is a declared dependency
    def _jit(f):
        return f


def _gray_energies(n, a1, a2, r2, a3, m3, use1, use2, use3):
    size = 1 << n
    out = np.empty(size, dtype=np.float64)
    sigma = np.full(n, -1.0)

    e = 0.0
    if use1:
        for i in range(n):
            e += a1[i] * sigma[i]
    if use2:
        for i in range(n):
            for j in range(n):
                e += a2[i, j] * sigma[i] * sigma[j]
    if use3:
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    e += a3[i, j, k] * sigma[i] * sigma[j] * sigma[k]
    out[0] = e

    for t in range(1, size):
        # flip site = index of the lowest set bit of t
        k = 0
        tt = t
        while tt & 1 == 0:
            tt >>= 1
            k += 1
        s_old = sigma[k]
        delta = 0.0
        if use1:
            delta += a1[k]
        if use2:
            acc = 0.0
            for j in range(n):
                acc += r2[k, j] * sigma[j]
            delta += acc - r2[k, k] * s_old
        if use3:
            quad = 0.0
            row = 0.0
            col = 0.0
            for j in range(n):
                sj = sigma[j]
                for l in range(n):
                    quad += m3[k, j, l] * sj * sigma[l]
                row += m3[k, k, j] * sigma[j]
                col += m3[k, j, k] * sigma[j]
            b = quad - s_old * row - s_old * col + m3[k, k, k]
            delta += b + a3[k, k, k]
        e += -2.0 * s_old * delta
        sigma[k] = -s_old
        out[t ^ (t >> 1)] = e
    return out


_gray_energies = _jit(_gray_energies)


def enumerate_energies(n, tensors):
    """Energies of all 2^n configurations, indexed by bit-code.

    `tensors` maps p in {1,2,3} to the coupling tensor with its prefactor
    already folded in (see model.scaled_tensors).
    """
    zero1 = np.zeros(1)
    zero2 = np.zeros((1, 1))
    zero3 = np.zeros((1, 1, 1))
    a1 = np.ascontiguousarray(tensors.get(1, zero1), dtype=np.float64)
    a2 = np.ascontiguousarray(tensors.get(2, zero2), dtype=np.float64)
    a3 = np.ascontiguousarray(tensors.get(3, zero3), dtype=np.float64)
    use1, use2, use3 = (p in tensors for p in (1, 2, 3))
    r2 = np.ascontiguousarray(a2 + a2.T)
    # m3[k, j, l] = a3[k,j,l] + a3[j,k,l] + a3[j,l,k]
    m3 = np.ascontiguousarray(a3 + np.transpose(a3, (1, 0, 2)) + np.transpose(a3, (2, 0, 1)))
    return _gray_energies(n, a1, a2, r2, a3, m3, use1, use2, use3)

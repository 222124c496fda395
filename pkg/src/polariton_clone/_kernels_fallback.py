"""Pure-numpy implementations of the hot kernels.

Signatures and results match ``_kernels.pyx`` exactly; ``kernels`` picks one
of the two at import time.
"""

import numpy as np


def fock_mode_sums(psi3):
    """Single-mode ladder sums of a state tensor reshaped to ``(L, d, R)``.

    Returns ``(<a>, <a^2>, <a^dag a>, <psi|psi>)`` with the mode occupying the
    middle axis.
    """
    psi3 = np.ascontiguousarray(psi3, dtype=np.complex128)
    d = psi3.shape[1]
    n = np.arange(d, dtype=np.float64)
    prob = (psi3.real ** 2 + psi3.imag ** 2).sum(axis=(0, 2))
    norm2 = float(prob.sum())
    n_mean = float(n @ prob)
    if d < 2:
        return 0j, 0j, n_mean, norm2
    w1 = np.sqrt(n[1:])
    ea = np.einsum("ijk,ijk,j->", psi3[:, :-1, :].conj(), psi3[:, 1:, :], w1)
    if d < 3:
        return complex(ea), 0j, n_mean, norm2
    w2 = np.sqrt(n[2:] * n[1:-1])
    ea2 = np.einsum("ijk,ijk,j->", psi3[:, :-2, :].conj(), psi3[:, 2:, :], w2)
    return complex(ea), complex(ea2), n_mean, norm2


def congruence_batch(S, means, cov):
    """Batched ``S m`` and ``S C S^T`` for stacks of real matrices."""
    S = np.asarray(S, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    cov = np.asarray(cov, dtype=np.float64)
    out_means = np.einsum("nij,nj->ni", S, means)
    out_cov = S @ cov @ np.swapaxes(S, 1, 2)
    return out_means, out_cov

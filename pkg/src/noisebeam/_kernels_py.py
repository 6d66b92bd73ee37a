"""Pure numpy implementation of the mixture-posterior kernel."""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def posterior_mean(v, corpus, alpha, inv_two_sigma_sq):
    """Exact posterior mean of clean data under a finite-corpus prior.

    All arrays are float64; v, alpha, inv_two_sigma_sq have shape (E,),
    corpus has shape (N, E). Weight of corpus row j is proportional to
    exp(-sum_e (v_e - alpha_e x_je)^2 * inv_two_sigma_sq_e), normalized
    with log-sum-exp. Entries with inv_two_sigma_sq == 0 contribute
    nothing to the weights (used for zero-noise frames).

    Returns (mean (E,), weights (N,)).
    """
    diff = v[None, :] - alpha[None, :] * corpus
    logw = -np.einsum("ne,ne,e->n", diff, diff, inv_two_sigma_sq)
    logw -= logw.max()
    w = np.exp(logw)
    w /= w.sum()
    return w @ corpus, w

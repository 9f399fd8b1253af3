"""Pure-NumPy implementations of the hot kernels.

Reference implementations for the compiled extension; always available.
Loops run per half-symbol column (overlap-add / windowed fold) or per
training epoch (LMS), with the inner arithmetic vectorized.
"""

from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def synth_accumulate(columns: np.ndarray, taps: np.ndarray, stride: int) -> np.ndarray:
    """Overlap-add the per-column filter-bank blocks into one sample stream.

    ``columns`` is (n_cols, M) of inverse-DFT outputs; the block emitted for
    column c is ``columns[c, i % M] * taps[i]`` placed at offset c*stride.
    """
    n_cols, m = columns.shape
    lp = taps.size
    reps = -(-lp // m)
    blocks = np.tile(columns, (1, reps))[:, :lp] * taps
    out = np.zeros((n_cols - 1) * stride + lp, dtype=np.complex128)
    for c in range(n_cols):
        out[c * stride : c * stride + lp] += blocks[c]
    return out


def fold_windows(
    stream: np.ndarray, taps: np.ndarray, m: int, stride: int, n_cols: int
) -> np.ndarray:
    """Windowed fold feeding the analysis DFT.

    For each column c, multiplies the length-Lp window starting at c*stride
    by ``taps`` and folds the product modulo M:
    ``out[c, q] = sum_j stream[c*stride + q + j*M] * taps[q + j*M]``.
    """
    lp = taps.size
    reps = -(-lp // m)
    pad = reps * m - lp
    windows = np.lib.stride_tricks.sliding_window_view(stream, lp)[::stride][:n_cols]
    prod = windows * taps
    if pad:
        prod = np.pad(prod, ((0, 0), (0, pad)))
    return prod.reshape(n_cols, reps, m).sum(axis=1)


def lms_train(
    x: np.ndarray,
    d: np.ndarray,
    delta: float,
    max_epochs: int,
    tol: float,
    rule: int,
    act: int,
    weights: np.ndarray,
    bias: np.ndarray,
):
    """Per-carrier perceptron-pair training.

    x, d: (C, T, 2) real input/desired pairs.  weights (C, 2, 2) and bias
    (C, 2) are updated in place on a copy.  rule 0 is the delta rule
    (w += delta*(d-y)*x), rule 1 the literal squared-error rule
    (w -= delta*0.5*(d-y)**2*x); act 0 is linear, 1 logistic.  Each carrier
    trains until its mean squared-error criterion over the set drops to
    ``tol`` or the epoch budget runs out.

    Returns (weights, epochs_used, converged, final_err).
    """
    n_car, n_sym, _ = x.shape
    w = np.array(weights, dtype=np.float64, copy=True)
    b = np.asarray(bias, dtype=np.float64)
    epochs_used = np.zeros(n_car, dtype=np.int64)
    converged = np.zeros(n_car, dtype=bool)
    final_err = np.full(n_car, np.inf)
    active = np.ones(n_car, dtype=bool)

    def _forward(wa, xa, ba):
        y = np.einsum("aij,aj->ai", wa, xa) + ba
        if act == 1:
            y = 1.0 / (1.0 + np.exp(-y))
        return y

    for epoch in range(max_epochs):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        wa, ba = w[idx], b[idx]
        for t in range(n_sym):
            xa = x[idx, t]
            e = d[idx, t] - _forward(wa, xa, ba)
            if rule == 0:
                wa += delta * e[:, :, None] * xa[:, None, :]
            else:
                wa -= delta * (0.5 * e * e)[:, :, None] * xa[:, None, :]
        w[idx] = wa
        epochs_used[idx] = epoch + 1
        err = np.zeros(idx.size)
        for t in range(n_sym):
            e = d[idx, t] - _forward(wa, x[idx, t], ba)
            err += 0.5 * (e * e).sum(axis=1)
        err /= 2.0 * n_sym
        final_err[idx] = err
        bad = ~np.isfinite(err)
        done = err <= tol
        converged[idx[done]] = True
        active[idx[done | bad]] = False

    return w, epochs_used, converged, final_err

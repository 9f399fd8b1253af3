"""Channel estimators and equalizers.

Three estimators working on recombined complex symbols:

- linear: per-symbol pilot division followed by piecewise-linear
  interpolation across the occupied band;
- cubic: same pilot division, natural cubic-spline interpolation (second
  derivatives from the standard tridiagonal system, zero at the band
  edges; real and imaginary parts splined independently);
- neural: one pair of two-input perceptrons per occupied carrier, trained
  on four known symbols, realizing a general real 2x2 map per carrier.

Plus the one-tap zero-forcing division used with the interpolated (or
exact) channel estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

ESTIMATORS = ("linear", "cubic", "neural", "ideal")

#: carriers with |H| at or below this are flagged as erased, not divided
EQ_EPSILON = 1e-9


class TrainingDivergenceError(RuntimeError):
    """Raised when perceptron training produces non-finite weights."""

    def __init__(self, carriers, hyper):
        self.carriers = list(carriers)
        self.hyper = hyper
        super().__init__(
            f"training diverged on carriers {self.carriers[:8]}"
            f"{'...' if len(self.carriers) > 8 else ''} with {hyper}"
        )


def raw_pilot_estimates(rx_pilots: np.ndarray, tx_pilots: np.ndarray) -> np.ndarray:
    """Per-pilot channel samples, rx/tx, averaged over the symbol window.

    ``rx_pilots`` is (P,) or (P, W); multiple symbols average the
    per-symbol quotients.
    """
    tx = np.asarray(tx_pilots, dtype=np.float64)
    if np.any(np.abs(tx) == 0):
        raise ValueError("transmitted pilot values must be nonzero")
    rx = np.asarray(rx_pilots, dtype=np.complex128)
    if rx.ndim == 1:
        return rx / tx
    return np.mean(rx / tx[:, None], axis=1)


def _locate(positions: np.ndarray, occupied_count: int):
    """Interval index m and fractional offset a for every occupied carrier."""
    k = np.arange(occupied_count)
    m = np.clip(np.searchsorted(positions, k, side="right") - 1, 0, positions.size - 2)
    a = (k - positions[m]) / (positions[m + 1] - positions[m])
    return m, a


def interpolate_linear(
    h_p: np.ndarray, pilot_positions: np.ndarray, occupied_count: int
) -> np.ndarray:
    """H(k) = (1-a) Hp(m) + a Hp(m+1) between consecutive pilots."""
    h_p = np.asarray(h_p, dtype=np.complex128)
    positions = np.asarray(pilot_positions)
    if h_p.size < 2:
        raise ValueError("linear interpolation needs at least 2 pilots")
    m, a = _locate(positions, occupied_count)
    return (1.0 - a) * h_p[m] + a * h_p[m + 1]


def spline_second_derivatives(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Natural-spline second derivatives via the tridiagonal (Thomas) solve.

    Boundary values are zero; interior rows are
    (h_{i-1}/6) z_{i-1} + ((h_{i-1}+h_i)/3) z_i + (h_i/6) z_{i+1}
      = (y_{i+1}-y_i)/h_i - (y_i-y_{i-1})/h_{i-1}.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y)
    n = x.size
    if n < 3:
        return np.zeros(n, dtype=y.dtype)
    h = np.diff(x)
    diag = (h[:-1] + h[1:]) / 3.0
    upper = h[1:-1] / 6.0
    lower = h[1:-1] / 6.0
    rhs = np.diff(y) / h
    rhs = rhs[1:] - rhs[:-1]

    # forward sweep
    n_int = n - 2
    cp = np.empty(n_int - 1) if n_int > 1 else np.empty(0)
    dp = np.empty(n_int, dtype=rhs.dtype)
    denom = diag[0]
    dp[0] = rhs[0] / denom
    for i in range(1, n_int):
        cp[i - 1] = upper[i - 1] / denom
        denom = diag[i] - lower[i - 1] * cp[i - 1]
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / denom
    z_int = np.empty(n_int, dtype=rhs.dtype)
    z_int[-1] = dp[-1]
    for i in range(n_int - 2, -1, -1):
        z_int[i] = dp[i] - cp[i] * z_int[i + 1]

    z = np.zeros(n, dtype=rhs.dtype)
    z[1:-1] = z_int
    return z


def interpolate_cubic(
    h_p: np.ndarray, pilot_positions: np.ndarray, occupied_count: int
) -> np.ndarray:
    """Natural cubic-spline estimate across the occupied band.

    H(k) = A Hp(m) + B Hp(m+1) + C z(m) + D z(m+1) with A = 1-a, B = a,
    C = (A^3-A) h^2/6, D = (B^3-B) h^2/6 on each pilot interval.
    """
    h_p = np.asarray(h_p, dtype=np.complex128)
    positions = np.asarray(pilot_positions, dtype=np.float64)
    if h_p.size < 3:
        raise ValueError("cubic interpolation needs at least 3 pilots")
    z = spline_second_derivatives(positions, h_p)
    m, a = _locate(positions, occupied_count)
    h = positions[m + 1] - positions[m]
    b = a
    a1 = 1.0 - a
    c = (a1**3 - a1) * h**2 / 6.0
    dco = (b**3 - b) * h**2 / 6.0
    return a1 * h_p[m] + b * h_p[m + 1] + c * z[m] + dco * z[m + 1]


def equalize(rx: np.ndarray, estimate: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One-tap zero forcing, rx/H, guarding near-zero estimates.

    Carriers with |H| <= EQ_EPSILON are zeroed and flagged erased instead
    of dividing; the demapper then decides them blind.
    """
    rx = np.asarray(rx, dtype=np.complex128)
    h = np.asarray(estimate, dtype=np.complex128)
    erased = np.abs(h) <= EQ_EPSILON
    safe = np.where(erased, 1.0, h)
    out = rx / (safe if rx.ndim == 1 else safe[:, None])
    if rx.ndim == 1:
        out[erased] = 0.0
    else:
        out[erased, :] = 0.0
    return out, erased


def activation(a, kind: str = "linear"):
    if kind == "linear":
        return a
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-np.asarray(a, dtype=np.float64)))
    raise ValueError(f"unknown activation {kind!r}")


def training_error(d, y):
    """Half squared error, 0.5 (d - y)^2."""
    return 0.5 * (np.asarray(d, dtype=float) - np.asarray(y, dtype=float)) ** 2


def weight_update(w, x, d, y, delta: float, rule: str = "delta"):
    """Single perceptron weight step.

    rule "delta": w + delta*(d-y)*x, the squared-error gradient step for a
    linear unit; rule "literal": w - delta*(0.5*(d-y)**2)*x, which feeds
    the error magnitude instead of its signed value.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    w = np.asarray(w, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if rule == "delta":
        return w + delta * (d - y) * x
    if rule == "literal":
        return w - delta * (0.5 * (d - y) ** 2) * x
    raise ValueError(f"unknown update rule {rule!r}")


@dataclass(frozen=True)
class NnHyper:
    delta: float = 0.1
    epochs: int = 500
    tolerance: float = 1e-6
    activation: str = "linear"
    rule: str = "delta"

    def __post_init__(self):
        if self.delta <= 0 or self.epochs < 1 or self.tolerance < 0:
            raise ValueError("invalid training hyperparameters")
        if self.activation not in ("linear", "sigmoid"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.rule not in ("delta", "literal"):
            raise ValueError(f"unknown update rule {self.rule!r}")


@dataclass
class NeuralEqualizer:
    """Per-carrier 2x2 weight matrices (plus frozen bias pair)."""

    weights: np.ndarray
    bias: np.ndarray
    hyper: NnHyper
    converged: np.ndarray = field(repr=False)
    epochs_used: np.ndarray = field(repr=False)
    final_error: np.ndarray = field(repr=False)

    @property
    def n_carriers(self) -> int:
        return self.weights.shape[0]

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())


def nn_train(
    rx: np.ndarray, tx: np.ndarray, hyper: NnHyper = NnHyper()
) -> NeuralEqualizer:
    """Train one perceptron pair per carrier on aligned (C, T) symbol grids.

    Inputs are the received (Re, Im); desired outputs the transmitted
    (Re, Im).  Carriers train independently until the mean half-squared
    error over the training set reaches the tolerance or the epoch budget
    runs out.
    """
    rx = np.asarray(rx, dtype=np.complex128)
    tx = np.asarray(tx, dtype=np.complex128)
    if rx.shape != tx.shape or rx.ndim != 2 or rx.shape[1] < 1:
        raise ValueError("rx/tx training grids must be equal (C, T>=1) matrices")
    x = np.ascontiguousarray(np.stack([rx.real, rx.imag], axis=2))
    d = np.ascontiguousarray(np.stack([tx.real, tx.imag], axis=2))
    n_car = x.shape[0]
    w0 = np.zeros((n_car, 2, 2))
    bias = np.zeros((n_car, 2))
    rule = 0 if hyper.rule == "delta" else 1
    act = 0 if hyper.activation == "linear" else 1
    w, epochs, conv, err = _kernels.lms_train(
        x, d, hyper.delta, hyper.epochs, hyper.tolerance, rule, act, w0, bias
    )
    if not np.isfinite(w).all():
        bad = np.flatnonzero(~np.isfinite(w).all(axis=(1, 2)))
        raise TrainingDivergenceError(bad, hyper)
    return NeuralEqualizer(
        weights=w,
        bias=bias,
        hyper=hyper,
        converged=np.asarray(conv, dtype=bool),
        epochs_used=epochs,
        final_error=err,
    )


def nn_equalize(rx: np.ndarray, eq: NeuralEqualizer) -> np.ndarray:
    """Apply the trained per-carrier maps to (C,) or (C, N) symbols."""
    rx = np.asarray(rx, dtype=np.complex128)
    squeeze = rx.ndim == 1
    if squeeze:
        rx = rx[:, None]
    if rx.shape[0] != eq.n_carriers:
        raise ValueError(
            f"equalizer trained for {eq.n_carriers} carriers, got {rx.shape[0]}"
        )
    x = np.stack([rx.real, rx.imag], axis=1)
    y = np.einsum("cij,cjn->cin", eq.weights, x) + eq.bias[:, :, None]
    if eq.hyper.activation == "sigmoid":
        y = 1.0 / (1.0 + np.exp(-y))
    out = y[:, 0, :] + 1j * y[:, 1, :]
    return out[:, 0] if squeeze else out

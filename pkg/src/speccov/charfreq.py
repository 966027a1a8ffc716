"""Empirical characteristic functions and the probe-frequency geometry.

The covariance estimators in :mod:`speccov.spectral` only ever evaluate the
empirical characteristic function (ECF) at frequencies ``U * u_ij`` where the
unit directions ``u_ij`` are standard basis vectors (i == j) or normalized
sums of two basis vectors (i != j). :func:`probe_log_moduli` evaluates all
p*(p+1)/2 of them in one pass over the data.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = [
    "SampleMatrix",
    "CfValue",
    "empirical_cf",
    "log_modulus_cf",
    "direction_vector",
    "probe_log_moduli",
    "ZERO_MODULUS_TOL",
]

# |ecf| below this is treated as an exact zero and log|ecf| is set to 0.
ZERO_MODULUS_TOL = 1e-300


@dataclass(frozen=True)
class SampleMatrix:
    """n observations of a p-vector, rows are observations."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=float)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("sample must be a 2-d array with n >= 1, p >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("sample contains non-finite entries")
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def p(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class CfValue:
    """A characteristic function value with its modulus cached."""

    value: complex
    modulus: float


def _as_data(Y) -> np.ndarray:
    if isinstance(Y, SampleMatrix):
        return Y.data
    return SampleMatrix(np.asarray(Y, dtype=float)).data


def empirical_cf(Y, u) -> CfValue:
    """ECF at frequency ``u``: the sample mean of exp(i<u, Y_k>).

    The modulus is at most 1 up to float rounding.
    """
    data = _as_data(Y)
    u = np.asarray(u, dtype=float)
    if u.shape != (data.shape[1],):
        raise ValueError(
            f"frequency has length {u.shape}, expected ({data.shape[1]},)"
        )
    val = complex(_kernels.ecf(data, u[None, :])[0])
    return CfValue(value=val, modulus=abs(val))


def log_modulus_cf(Y, u, zero_tol: float = ZERO_MODULUS_TOL) -> float:
    """log|ecf(u)|, with the convention that an exact zero maps to 0.

    A vanishing ECF carries no usable magnitude information; returning 0
    (rather than -inf) keeps downstream estimates finite.
    """
    m = empirical_cf(Y, u).modulus
    if m <= zero_tol:
        return 0.0
    return float(np.log(m))


def direction_vector(i: int, j: int, p: int) -> np.ndarray:
    """Unit probe direction for the (i, j) covariance entry, 1-based indices.

    Returns e_i when i == j and (e_i + e_j)/sqrt(2) otherwise.
    """
    if not (1 <= i <= p and 1 <= j <= p):
        raise IndexError(f"indices ({i}, {j}) out of range for p={p}")
    u = np.zeros(p)
    if i == j:
        u[i - 1] = 1.0
    else:
        u[i - 1] = u[j - 1] = 1.0 / np.sqrt(2.0)
    return u


def probe_log_moduli(Y, U: float, zero_tol: float = ZERO_MODULUS_TOL):
    """log|ecf| at all probe frequencies ``U * u_ij`` in a single data pass.

    Returns
    -------
    diag : ndarray, shape (p,)
        log|ecf(U * e_i)|.
    pair : ndarray, shape (p, p)
        log|ecf(U * u_ij)| for i != j; the diagonal of ``pair`` is unused
        filler. Exactly symmetric.
    """
    data = _as_data(Y)
    if U <= 0:
        raise ValueError("spectral radius U must be positive")
    cf_diag, cf_pair = _kernels.probe_cf(data, float(U))
    mod_diag = np.abs(cf_diag)
    mod_pair = np.abs(cf_pair)
    # mirror the upper triangle so symmetry is exact, not just up to BLAS
    iu = np.triu_indices(mod_pair.shape[0], k=1)
    sym = np.zeros_like(mod_pair)
    sym[iu] = mod_pair[iu]
    sym = sym + sym.T
    np.fill_diagonal(sym, np.diag(mod_pair))
    with np.errstate(divide="ignore"):
        diag = np.where(mod_diag <= zero_tol, 0.0, np.log(mod_diag))
        pair = np.where(sym <= zero_tol, 0.0, np.log(sym))
    return diag, pair

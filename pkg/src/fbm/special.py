"""Bessel functions of the first kind and the scaled cylindrical-wave basis.

Evaluation strategy
-------------------
    J_n(t), t < 12 : power series J_n(t) = (t/2)^n/n! * h_n(t) with
                     h_n(t) = sum_p (-t^2/4)^p / (p! (n+1)...(n+p)).
                     The leading factor is taken through log space so
                     large orders neither overflow nor underflow early.
    J_n(t), t >= 12: backward (Miller) recurrence from a start order
                     above the turning point, normalized with
                     J_0 + 2*sum_p J_{2p} = 1. Forward recurrence is
                     unstable for n > t and is never used.

Basis functions
---------------
    phi_n(x) = pref_n * J_n(k r) * exp(i n theta),
    pref_n   = 2^|n| |n|! / (k M)^|n|.

pref_n and J_n(kr) separately overflow/underflow for large |n|; their
product is O((r/M)^n) and is always computed jointly.  The radial
profile R_n(r) = pref_n J_n(kr) satisfies R_n(r) ~ (r/M)^n near r = 0,
and is what all basis evaluation is built on:

    series path : R_n = exp(n ln(r/M)) * h_n(kr)
    Miller path : R_n = sign(J_n) * exp(ln|J_n| + n ln(2/(kM)) + lgamma(n+1))

    R_n'(r) = (n/r) R_n(r) - k^2 M / (2(n+1)) * R_{n+1}(r)

All functions here are pure; nothing is cached or mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Hard cap on the basis order. Parameter selection stays below ~40 at
# desk scale; the headroom is for order sweeps.
N_MAX = 128

_SERIES_CUTOFF = 12.0   # switch point between power series and Miller
_MILLER_SEED = 1e-30
_RESCALE_LIMIT = 1e200


@dataclass(frozen=True)
class BasisContext:
    """Wavenumber and scaling radius defining the basis normalization.

    The constraint M > r_D (circumscribed radius of the active domain)
    is enforced where the domain is known, at problem construction.
    """

    k: float
    M: float

    def __post_init__(self):
        if not (self.k > 0.0):
            raise ValueError(f"wavenumber k must be positive, got {self.k}")
        if not (self.M > 0.0):
            raise ValueError(f"scaling radius M must be positive, got {self.M}")


def _check_order(n: int) -> int:
    m = abs(int(n))
    if m > N_MAX:
        raise ValueError(f"order |n|={m} exceeds the implementation cap {N_MAX}")
    return m


# ---------------------------------------------------------------------------
# Plain J_n(t), scalar
# ---------------------------------------------------------------------------
def _jn_series(n: int, t: float) -> float:
    """Power series for J_n(t), n >= 0, intended for t < 12."""
    if t == 0.0:
        return 1.0 if n == 0 else 0.0
    z = 0.25 * t * t
    term = 1.0
    h = 1.0
    for p in range(1, 400):
        term *= -z / (p * (n + p))
        h += term
        if abs(term) <= 1e-18 * max(1.0, abs(h)) and p * (n + p) > z:
            break
    log_lead = n * math.log(0.5 * t) - math.lgamma(n + 1)
    return h * math.exp(log_lead)


def _miller_start(n_max: int, t: float) -> int:
    # Start safely above both the requested order and the turning point;
    # the sqrt term keeps full accuracy when n_max is close to t.
    top = max(n_max, t)
    return int(math.ceil(top)) + 24 + int(4.0 * math.sqrt(top))


def _jn_miller(n_max: int, t: float) -> np.ndarray:
    """J_0(t)..J_{n_max}(t) via normalized backward recurrence, t >= ~12."""
    m_start = _miller_start(n_max, t)
    out = np.zeros(n_max + 1)
    jp = 0.0              # J_{m+1}, unnormalized
    jc = _MILLER_SEED     # J_m
    even_sum = 0.0        # sum of J_{2p}, p >= 1
    for m in range(m_start, 0, -1):
        jm = (2.0 * m / t) * jc - jp   # J_{m-1}
        jp, jc = jc, jm
        if abs(jc) > _RESCALE_LIMIT:
            scale = 1.0 / _RESCALE_LIMIT
            jp *= scale
            jc *= scale
            even_sum *= scale
            out *= scale
        order = m - 1
        if order <= n_max:
            out[order] = jc
        if order > 0 and order % 2 == 0:
            even_sum += jc
    norm = jc + 2.0 * even_sum   # equals 1 after normalization
    return out / norm


def bessel_j(n: int, t: float) -> float:
    """Bessel function of the first kind J_n(t) for integer n, t >= 0.

    Negative orders delegate to positive ones through
    J_{-n}(t) = (-1)^n J_n(t), so the reflection identity holds exactly.
    Absolute accuracy is ~1e-13 for t <= 64, |n| <= 64.
    """
    m = _check_order(n)
    if t < 0.0:
        raise ValueError(f"argument t must be nonnegative, got {t}")
    if t < _SERIES_CUTOFF:
        value = _jn_series(m, t)
    else:
        value = float(_jn_miller(m, t)[m])
    if n < 0 and m % 2 == 1:
        return -value
    return value


def bessel_j_prime(n: int, t: float) -> float:
    """Derivative J_n'(t), using J_n'(t) = n J_n(t)/t - J_{n+1}(t) for n >= 0.

    At t = 0 the analytic limits apply: J_0'(0) = 0, J_{+-1}'(0) = +-1/2,
    and 0 for |n| >= 2.
    """
    m = _check_order(n)
    if t < 0.0:
        raise ValueError(f"argument t must be nonnegative, got {t}")
    sign = -1.0 if (n < 0 and m % 2 == 1) else 1.0
    if t == 0.0:
        if m == 0:
            return 0.0
        if m == 1:
            return 0.5 * sign
        return 0.0
    if t < _SERIES_CUTOFF:
        jm = _jn_series(m, t)
        jm1 = _jn_series(m + 1, t)
    else:
        both = _jn_miller(m + 1, t)
        jm, jm1 = float(both[m]), float(both[m + 1])
    return sign * (m * jm / t - jm1)


# ---------------------------------------------------------------------------
# Scaled radial profiles R_n(r) = pref_n * J_n(k r), vectorized over points
# ---------------------------------------------------------------------------
def _radial_series(n_max: int, r: np.ndarray, k: float, M: float) -> np.ndarray:
    """R_0..R_{n_max} on points with k*r < 12. Shape (n_max+1, P)."""
    npts = r.shape[0]
    z = 0.25 * (k * r) ** 2                      # (P,)
    with np.errstate(divide="ignore"):
        logq = np.log(r / M)                     # -inf at r = 0
    out = np.empty((n_max + 1, npts))
    zmax = float(z.max()) if npts else 0.0
    for n in range(n_max + 1):
        term = np.ones(npts)
        h = np.ones(npts)
        hmax = np.ones(npts)
        for p in range(1, 400):
            term = term * (-z / (p * (n + p)))
            h = h + term
            np.maximum(hmax, np.abs(h), out=hmax)
            if p * (n + p) > zmax and np.all(np.abs(term) <= 1e-18 * hmax):
                break
        if n == 0:
            out[0] = h
        else:
            out[n] = np.exp(n * logq) * h        # exp(n * -inf) = 0 at r = 0
    return out


def _radial_miller(n_max: int, r: np.ndarray, k: float, M: float) -> np.ndarray:
    """R_0..R_{n_max} on points with k*r >= 12. Shape (n_max+1, P)."""
    npts = r.shape[0]
    t = k * r                                    # (P,), all >= 12
    m_start = _miller_start(n_max, float(t.max()))
    jsc = np.zeros((n_max + 1, npts))
    jp = np.zeros(npts)
    jc = np.full(npts, _MILLER_SEED)
    even_sum = np.zeros(npts)
    for m in range(m_start, 0, -1):
        jm = (2.0 * m / t) * jc - jp
        jp, jc = jc, jm
        big = np.abs(jc) > _RESCALE_LIMIT
        if big.any():
            scale = 1.0 / _RESCALE_LIMIT
            jp[big] *= scale
            jc[big] *= scale
            even_sum[big] *= scale
            jsc[:, big] *= scale
        order = m - 1
        if order <= n_max:
            jsc[order] = jc
        if order > 0 and order % 2 == 0:
            even_sum += jc
    jsc /= jc + 2.0 * even_sum                   # now true J_n(t)

    out = np.empty_like(jsc)
    log_beta = math.log(2.0 / (k * M))
    with np.errstate(divide="ignore"):
        for n in range(n_max + 1):
            log_pref = n * log_beta + math.lgamma(n + 1)
            # combine through logs so a huge prefactor cannot overflow
            # against a tiny J_n
            out[n] = np.sign(jsc[n]) * np.exp(np.log(np.abs(jsc[n])) + log_pref)
    return out


def radial_profiles(ctx: BasisContext, n_max: int, r: np.ndarray) -> np.ndarray:
    """Scaled radial profiles R_n(r) for n = 0..n_max at points r >= 0.

    R_n(r) = [2^n n!/(kM)^n] J_n(k r); returns shape (n_max+1, len(r)).
    """
    if n_max > N_MAX + 1:
        raise ValueError(f"order cap exceeded: {n_max} > {N_MAX + 1}")
    r = np.asarray(r, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("radii must be nonnegative")
    out = np.empty((n_max + 1, r.shape[0]))
    small = ctx.k * r < _SERIES_CUTOFF
    if small.any():
        out[:, small] = _radial_series(n_max, r[small], ctx.k, ctx.M)
    large = ~small
    if large.any():
        out[:, large] = _radial_miller(n_max, r[large], ctx.k, ctx.M)
    return out


def _radial_derivatives(ctx: BasisContext, profiles: np.ndarray,
                        r: np.ndarray) -> np.ndarray:
    """dR_n/dr for n = 0..n_max-1 given profiles for n = 0..n_max.

    Uses R_n' = (n/r) R_n - k^2 M/(2(n+1)) R_{n+1}; r = 0 entries are
    filled with the analytic limits (0 except 1/M at n = 1).
    """
    n_top = profiles.shape[0] - 1
    orders = np.arange(n_top)[:, None]           # (n_top, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = orders * profiles[:-1] / r[None, :]
    d -= (ctx.k * ctx.k * ctx.M) / (2.0 * (orders + 1.0)) * profiles[1:]
    origin = r == 0.0
    if origin.any():
        d[:, origin] = 0.0
        if n_top > 1:
            d[1, origin] = 1.0 / ctx.M
    return d


# ---------------------------------------------------------------------------
# Basis values and gradients
# ---------------------------------------------------------------------------
def basis_matrix(ctx: BasisContext, N: int, points: np.ndarray,
                 gradients: bool = True):
    """Evaluate all basis functions phi_n, n = -N..N, at the given points.

    Parameters
    ----------
    points : np.ndarray, shape (P, 2)

    Returns
    -------
    values : np.ndarray, complex128, shape (P, 2N+1)
        Column j holds phi_n with n = j - N (monotone order ordering).
    grads : np.ndarray, complex128, shape (P, 2N+1, 2), or None
        Cartesian gradients, if requested.
    """
    if N < 0 or N > N_MAX:
        raise ValueError(f"truncation order N={N} outside [0, {N_MAX}]")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x1, x2 = pts[:, 0], pts[:, 1]
    r = np.hypot(x1, x2)                         # (P,)
    theta = np.arctan2(x2, x1)
    npts = pts.shape[0]

    n_top = N + 1 if gradients else N
    prof = radial_profiles(ctx, n_top, r)        # (n_top+1, P)
    dprof = _radial_derivatives(ctx, prof, r) if gradients else None

    values = np.empty((npts, 2 * N + 1), dtype=np.complex128)
    grads = np.empty((npts, 2 * N + 1, 2), dtype=np.complex128) if gradients else None

    origin = r == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_r = np.where(origin, 0.0, 1.0 / np.where(origin, 1.0, r))
    cos_t = np.where(origin, 1.0, x1 * inv_r)
    sin_t = np.where(origin, 0.0, x2 * inv_r)

    for n in range(-N, N + 1):
        m = abs(n)
        sign = -1.0 if (n < 0 and m % 2 == 1) else 1.0
        phase = np.exp(1j * n * theta)           # (P,)
        col = N + n
        values[:, col] = sign * prof[m] * phase
        if not gradients:
            continue
        radial = sign * dprof[m]                 # d/dr component
        angular = sign * (1j * n) * prof[m] * inv_r
        gx = phase * (radial * cos_t - angular * sin_t)
        gy = phase * (radial * sin_t + angular * cos_t)
        if origin.any():
            gx[origin] = 0.0
            gy[origin] = 0.0
            if n == 1:
                gx[origin] = 1.0 / ctx.M
                gy[origin] = 1j / ctx.M
            elif n == -1:
                gx[origin] = -1.0 / ctx.M
                gy[origin] = 1j / ctx.M
        grads[:, col, 0] = gx
        grads[:, col, 1] = gy

    return values, grads


def basis_value(ctx: BasisContext, n: int, point) -> complex:
    """Single basis function phi_n at a single point anywhere in the plane."""
    _check_order(n)
    N = abs(n)
    values, _ = basis_matrix(ctx, N, np.asarray(point, dtype=float)[None, :],
                             gradients=False)
    return complex(values[0, N + n])


def basis_gradient(ctx: BasisContext, n: int, point) -> np.ndarray:
    """Cartesian gradient of phi_n at a single point, complex shape (2,)."""
    _check_order(n)
    N = abs(n)
    _, grads = basis_matrix(ctx, N, np.asarray(point, dtype=float)[None, :],
                            gradients=True)
    return grads[0, N + n]

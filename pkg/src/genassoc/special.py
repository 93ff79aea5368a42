"""Normal and chi-square special functions, plus adaptive Gauss-Kronrod quadrature.

Everything here is compiled with numba so the statistic and p-value kernels
can call it from inside hot loops.  The thin Python wrappers at the bottom
validate arguments and are what the rest of the package exposes publicly.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

SQRT2 = math.sqrt(2.0)
INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
LOG_SQRT_PI = 0.5 * math.log(math.pi)


@njit(cache=True)
def norm_pdf(x):
    return INV_SQRT_2PI * math.exp(-0.5 * x * x)


@njit(cache=True)
def norm_cdf(x):
    return 0.5 * math.erfc(-x / SQRT2)


@njit(cache=True)
def norm_sf(x):
    return 0.5 * math.erfc(x / SQRT2)


@njit(cache=True)
def two_sided_normal_p(z):
    """2(1 - Phi(|z|)), evaluated through erfc to keep tail accuracy."""
    return math.erfc(abs(z) / SQRT2)


@njit(cache=True)
def log_erfc(x):
    """ln erfc(x) for x >= 0, finite even where erfc itself underflows."""
    if x < 25.0:
        return math.log(math.erfc(x))
    x2 = x * x
    inv = 1.0 / (2.0 * x2)
    series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv * inv * inv
    return -x2 - math.log(x) - LOG_SQRT_PI + math.log(series)


@njit(cache=True)
def norm_ppf(p):
    """Inverse standard normal cdf (Wichura, AS 241 PPND16).

    Relative accuracy is about 1e-16 over (0, 1).  Returns -inf/inf at the
    endpoints and nan outside [0, 1].
    """
    if p <= 0.0:
        return -np.inf if p == 0.0 else np.nan
    if p >= 1.0:
        return np.inf if p == 1.0 else np.nan
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        num = (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                    + 67265.770927008700853) * r + 45921.953931549871457) * r
                  + 13731.693765509461125) * r + 1971.5909503065514427) * r
                + 133.14166789178437745) * r + 3.387132872796366608)
        den = (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                    + 39307.89580009271061) * r + 21213.794301586595867) * r
                  + 5394.1960214247511077) * r + 687.1870074920579083) * r
                + 42.313330701600911252) * r + 1.0)
        return q * num / den
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        num = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                    + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                  + 3.64784832476320460504) * r + 5.7694972214606914055) * r
                + 4.6303378461565452959) * r + 1.42343711074968357734)
        den = (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                    + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                  + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                + 2.05319162663775882187) * r + 1.0)
    else:
        r -= 5.0
        num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                    + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                  + 0.29656057182850489123) * r + 1.7848265399172913358) * r
                + 5.4637849111641143699) * r + 6.6579046435011037772)
        den = (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                    + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                  + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                + 0.59983220655588793769) * r + 1.0)
    val = num / den
    return -val if q < 0.0 else val


@njit(cache=True)
def chi2_1_cdf(x):
    if x <= 0.0:
        return 0.0
    return math.erf(math.sqrt(0.5 * x))


@njit(cache=True)
def chi2_1_sf(x):
    if x <= 0.0:
        return 1.0
    return math.erfc(math.sqrt(0.5 * x))


@njit(cache=True)
def chi2_2_cdf(x):
    if x <= 0.0:
        return 0.0
    return -math.expm1(-0.5 * x)


@njit(cache=True)
def chi2_2_sf(x):
    if x <= 0.0:
        return 1.0
    return math.exp(-0.5 * x)


@njit(cache=True)
def chi2_1_isf(t):
    """Upper-t quantile of chi-square(1): (Phi^-1(1 - t/2))^2, via the lower tail."""
    z = norm_ppf(0.5 * t)
    return z * z


# --------------------------------------------------------------------------
# Adaptive Gauss-Kronrod (7, 15)
# --------------------------------------------------------------------------

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# integrand selectors
F_MAX3_INNER = 0
F_MAX3_OUTER = 1
F_CMAX_BOX = 2
F_MIN2 = 3


@njit(cache=True)
def _integrand(which, x, par):
    if which == F_MIN2:
        # par = (q,)
        arg = 2.0 * par[0] / x - 1.0
        if arg > 1.0:
            arg = 1.0
        elif arg < -1.0:
            arg = -1.0
        return math.exp(-0.5 * x) * math.asin(arg)
    # par = (t, rho, sqrt(1 - rho^2), omega0, omega1); the integrand is the
    # conditional mass of Z1 outside [lower, upper] given Z0 = x
    t = par[0]
    rho = par[1]
    r = par[2]
    below = norm_cdf((-t - rho * x) / r)
    if which == F_MAX3_OUTER:
        above = norm_sf(((t - par[3] * x) / par[4] - rho * x) / r)
    else:
        above = norm_sf((t - rho * x) / r)
    return norm_pdf(x) * (above + below)


@njit(cache=True)
def _gk15(which, par, a, b):
    centr = 0.5 * (a + b)
    hlgth = 0.5 * (b - a)
    fc = _integrand(which, centr, par)
    resk = fc * _WGK[7]
    resg = fc * _WG[3]
    for j in range(7):
        dx = hlgth * _XGK[j]
        f1 = _integrand(which, centr - dx, par)
        f2 = _integrand(which, centr + dx, par)
        resk += _WGK[j] * (f1 + f2)
        if j % 2 == 1:
            resg += _WG[j // 2] * (f1 + f2)
    return resk * hlgth, abs((resk - resg) * hlgth)


@njit(cache=True)
def _grow(a, cap):
    b = np.empty(cap)
    b[:a.shape[0]] = a
    return b


@njit(cache=True)
def integrate(which, par, a, b, rel_tol, abs_tol, max_sub):
    """Globally adaptive bisection on the panel with the largest error estimate.

    Returns (integral, error_estimate).  A reversed range (a > b) yields the
    signed integral.
    """
    if a == b:
        return 0.0, 0.0
    cap = min(max_sub, 32)
    lo = np.empty(cap)
    hi = np.empty(cap)
    val = np.empty(cap)
    err = np.empty(cap)
    v, e = _gk15(which, par, a, b)
    lo[0] = a
    hi[0] = b
    val[0] = v
    err[0] = e
    n = 1
    total = v
    total_err = e
    while total_err > max(abs_tol, rel_tol * abs(total)) and n < max_sub:
        if n == cap:
            cap = min(2 * cap, max_sub)
            lo = _grow(lo, cap)
            hi = _grow(hi, cap)
            val = _grow(val, cap)
            err = _grow(err, cap)
        k = 0
        for i in range(1, n):
            if err[i] > err[k]:
                k = i
        mid = 0.5 * (lo[k] + hi[k])
        v1, e1 = _gk15(which, par, lo[k], mid)
        v2, e2 = _gk15(which, par, mid, hi[k])
        total += v1 + v2 - val[k]
        total_err += e1 + e2 - err[k]
        lo[n] = mid
        hi[n] = hi[k]
        val[n] = v2
        err[n] = e2
        hi[k] = mid
        val[k] = v1
        err[k] = e1
        n += 1
    # re-sum to shed accumulated update rounding
    total = 0.0
    total_err = 0.0
    for i in range(n):
        total += val[i]
        total_err += err[i]
    return total, total_err


# --------------------------------------------------------------------------
# Python-facing wrappers
# --------------------------------------------------------------------------


def inverse_normal_cdf(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0, 1), got {p!r}")
    return float(norm_ppf(p))


def normal_cdf(x: float) -> float:
    return float(norm_cdf(x))


def normal_pdf(x: float) -> float:
    return float(norm_pdf(x))


def chi2_cdf(x: float, df: int) -> float:
    if x < 0:
        raise ValueError("chi-square argument must be non-negative")
    if df == 1:
        return float(chi2_1_cdf(x))
    if df == 2:
        return float(chi2_2_cdf(x))
    raise ValueError("only 1 and 2 degrees of freedom are supported")


def chi2_sf(x: float, df: int) -> float:
    if x < 0:
        raise ValueError("chi-square argument must be non-negative")
    if df == 1:
        return float(chi2_1_sf(x))
    if df == 2:
        return float(chi2_2_sf(x))
    raise ValueError("only 1 and 2 degrees of freedom are supported")


def chi2_1_quantile(upper_tail: float) -> float:
    """Value q with P(chi2_1 > q) = upper_tail."""
    if not 0.0 < upper_tail <= 1.0:
        raise ValueError(f"tail probability must lie in (0, 1], got {upper_tail!r}")
    return float(chi2_1_isf(upper_tail))

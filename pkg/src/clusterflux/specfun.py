"""Spherical Bessel/Hankel functions of complex argument and Legendre polynomials.

All ``*_all`` routines return every order ``0..L`` at once, stacked along the
last axis, which is what the series code consumes. Scalar convenience wrappers
are provided for single orders.

Regular functions ``j_n`` are computed by Miller's backward recurrence,
normalised against the closed forms of ``j_0`` or ``j_1``; outgoing functions
``h_n`` by forward recurrence, which is stable for the dominant solution.
"""
from __future__ import annotations

import numpy as np

from .media import DomainError

L_MAX_DEFAULT = 120
_SMALL_Z = 1e-6
_RESCALE = 1e250
# sin/cos of z overflow once |Im z| exceeds ~709
_IM_LIMIT = 700.0


class SingularityError(DomainError):
    """Raised when a function is evaluated at its singular point."""


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _check_im(z):
    if z.size and np.max(np.abs(z.imag)) > _IM_LIMIT:
        raise OverflowError("|Im z| too large for double-precision spherical "
                            "Bessel evaluation")


def _double_factorials(L):
    # (2n+1)!! for n = 0..L, as floats (overflow to inf is harmless here:
    # the matching power of z has already underflowed)
    out = np.empty(L + 1)
    acc = 1.0
    for n in range(L + 1):
        acc *= 2 * n + 1
        out[n] = acc
    return out


def _jn_taylor(L, z):
    n = np.arange(L + 1)
    df = _double_factorials(L)
    zz = z[..., None]
    with np.errstate(under="ignore", over="ignore", invalid="ignore"):
        lead = zz ** n / df
        z2 = zz * zz
        val = lead * (1 - z2 / (2 * (2 * n + 3))
                      + z2 * z2 / (8 * (2 * n + 3) * (2 * n + 5)))
    val = np.where(np.isfinite(val), val, 0)
    return val


def _jn_taylor_prime(L, z):
    n = np.arange(L + 1)
    df = _double_factorials(L)
    zz = z[..., None]
    with np.errstate(under="ignore", over="ignore", invalid="ignore",
                     divide="ignore"):
        zn1 = np.where(n >= 1, zz ** np.maximum(n - 1, 0), 0)
        val = (n * zn1 - (n + 2) * zz ** (n + 1) / (2 * (2 * n + 3))
               + (n + 4) * zz ** (n + 3) / (8 * (2 * n + 3) * (2 * n + 5))) / df
    return np.where(np.isfinite(val), val, 0)


def _miller(L, z):
    """Backward recurrence for j_0..j_L at nonzero z (1-D array)."""
    zabs = np.abs(z)
    top = int(max(L, np.max(zabs))) + int(np.sqrt(40 * max(L, np.max(zabs), 1))) + 20
    out = np.zeros(z.shape + (L + 1,), dtype=complex)
    f_next = np.zeros_like(z)
    f_cur = np.full_like(z, 1e-300)
    for n in range(top, 0, -1):
        # f_{n-1} = (2n+1)/z f_n - f_{n+1}
        f_prev = (2 * n + 1) / z * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        if n - 1 <= L:
            out[..., n - 1] = f_cur
        big = np.abs(f_cur) > _RESCALE
        if np.any(big):
            f_cur[big] /= _RESCALE
            f_next[big] /= _RESCALE
            with np.errstate(under="ignore"):
                out[big] /= _RESCALE
    j0 = np.sin(z) / z
    j1 = np.sin(z) / z**2 - np.cos(z) / z
    use0 = np.abs(j0) >= np.abs(j1)
    scale = np.where(use0, j0 / out[..., 0], j1 / out[..., 1])
    with np.errstate(under="ignore"):
        return out * scale[..., None]


def sph_jn_all(L: int, z) -> np.ndarray:
    """Spherical Bessel functions j_0(z)..j_L(z), shape ``z.shape + (L+1,)``."""
    if L < 0:
        raise DomainError("order must be non-negative")
    z = _as_complex(z)
    _check_im(z)
    flat = z.ravel()
    out = np.empty(flat.shape + (L + 1,), dtype=complex)
    small = np.abs(flat) < _SMALL_Z
    if np.any(small):
        out[small] = _jn_taylor(L, flat[small])
    if np.any(~small):
        out[~small] = _miller(max(L, 1), flat[~small])[..., :L + 1]
    return out.reshape(z.shape + (L + 1,))


def sph_h1_all(L: int, z) -> np.ndarray:
    """Spherical Hankel functions h_0^(1)..h_L^(1), shape ``z.shape + (L+1,)``."""
    if L < 0:
        raise DomainError("order must be non-negative")
    z = _as_complex(z)
    if np.any(z == 0):
        raise SingularityError("spherical Hankel function is singular at z = 0")
    _check_im(z)
    out = np.empty(z.shape + (L + 1,), dtype=complex)
    e = np.exp(1j * z)
    out[..., 0] = -1j * e / z
    if L >= 1:
        out[..., 1] = -e * (z + 1j) / z**2
    with np.errstate(over="raise", invalid="raise"):
        try:
            for n in range(1, L):
                out[..., n + 1] = (2 * n + 1) / z * out[..., n] - out[..., n - 1]
        except FloatingPointError as exc:
            raise OverflowError("spherical Hankel recurrence overflowed; "
                                "argument too small for the requested order") from exc
    if not np.all(np.isfinite(out)):
        raise OverflowError("spherical Hankel recurrence overflowed")
    return out


def _prime_from(values, z):
    # f_n' = f_{n-1} - (n+1)/z f_n ; f_0' = -f_1.  values hold orders 0..L+1
    L = values.shape[-1] - 2
    n = np.arange(1, L + 1)
    out = np.empty(values.shape[:-1] + (L + 1,), dtype=complex)
    out[..., 0] = -values[..., 1]
    zz = z[..., None]
    out[..., 1:] = values[..., :L] - (n + 1) / zz * values[..., 1:L + 1]
    return out


def sph_jn_and_prime(L: int, z):
    """Return ``(j, j')`` for orders 0..L."""
    z = _as_complex(z)
    vals = sph_jn_all(L + 1, z)
    small = np.abs(z) < _SMALL_Z
    if np.any(small):
        with np.errstate(divide="ignore", invalid="ignore"):
            prime = _prime_from(vals, np.where(small, 1.0, z))
        prime[small] = _jn_taylor_prime(L, z[small])
    else:
        prime = _prime_from(vals, z)
    return vals[..., :L + 1], prime


def sph_h1_and_prime(L: int, z):
    """Return ``(h, h')`` for orders 0..L."""
    z = _as_complex(z)
    vals = sph_h1_all(L + 1, z)
    return vals[..., :L + 1], _prime_from(vals, z)


def _check_order(n, L_max):
    if int(n) != n or n < 0:
        raise DomainError(f"order must be a non-negative integer, got {n!r}")
    if n > L_max:
        raise DomainError(f"order {n} exceeds L_max={L_max}")


def sph_bessel_j(n: int, z, *, L_max: int = L_MAX_DEFAULT):
    """Spherical Bessel function j_n(z) of complex argument."""
    _check_order(n, L_max)
    out = sph_jn_all(int(n), z)[..., int(n)]
    return out[()] if out.ndim == 0 else out


def sph_hankel1(n: int, z, *, L_max: int = L_MAX_DEFAULT):
    """Spherical Hankel function of the first kind h_n^(1)(z)."""
    _check_order(n, L_max)
    out = sph_h1_all(int(n), z)[..., int(n)]
    return out[()] if out.ndim == 0 else out


def sph_bessel_j_prime(n: int, z, *, L_max: int = L_MAX_DEFAULT):
    _check_order(n, L_max)
    out = sph_jn_and_prime(int(n), z)[1][..., int(n)]
    return out[()] if out.ndim == 0 else out


def sph_hankel1_prime(n: int, z, *, L_max: int = L_MAX_DEFAULT):
    _check_order(n, L_max)
    out = sph_h1_and_prime(int(n), z)[1][..., int(n)]
    return out[()] if out.ndim == 0 else out


def legendre_all(L: int, x, derivative: bool = False):
    """Legendre polynomials P_0..P_L at ``x`` (and optionally P_n').

    Uses the three-term recurrence; derivatives use
    ``P'_{n+1} = P'_{n-1} + (2n+1) P_n`` which stays finite at ``x = +-1``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise DomainError("Legendre argument must lie in [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    # degree-major layout keeps every recurrence step a contiguous write
    P = np.empty((L + 1,) + x.shape)
    P[0] = 1.0
    if L >= 1:
        P[1] = x
    for n in range(1, L):
        P[n + 1] = ((2 * n + 1) * x * P[n] - n * P[n - 1]) / (n + 1)
    if not derivative:
        return np.moveaxis(P, 0, -1)
    dP = np.zeros_like(P)
    if L >= 1:
        dP[1] = 1.0
    for n in range(1, L):
        dP[n + 1] = dP[n - 1] + (2 * n + 1) * P[n]
    return np.moveaxis(P, 0, -1), np.moveaxis(dP, 0, -1)


def legendre_series(coeffs, x):
    """``sum_n c_n P_n(x)`` by Clenshaw's recurrence (complex coefficients allowed)."""
    c = np.asarray(coeffs)
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-12):
        raise DomainError("Legendre argument must lie in [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    b1 = np.zeros(x.shape, dtype=np.result_type(c, float))
    b2 = np.zeros_like(b1)
    for n in range(c.size - 1, 0, -1):
        # alpha_n = (2n+1) x/(n+1), beta_{n+1} = -(n+1)/(n+2)
        b1, b2 = c[n] + (2 * n + 1) / (n + 1) * x * b1 - (n + 1) / (n + 2) * b2, b1
    return c[0] + x * b1 - 0.5 * b2


def legendre_p(n: int, x):
    """Legendre polynomial P_n(x) for |x| <= 1."""
    if int(n) != n or n < 0:
        raise DomainError(f"order must be a non-negative integer, got {n!r}")
    out = legendre_all(int(n), x)[..., int(n)]
    return out[()] if out.ndim == 0 else out

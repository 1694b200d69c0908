"""Seeded random variate generation.

Every sampler takes an explicit :class:`numpy.random.Generator`; one chain
owns one generator, and parallel work gets independent streams from
:func:`split_rng`.

Parameterizations: ``Gamma(shape, rate)``, ``InvGamma(shape, scale)`` (the
reciprocal of a ``Gamma(shape, rate=scale)`` draw) and ``GIG(lam, chi, psi)``
with density proportional to ``x**(lam - 1) * exp(-(chi / x + psi * x) / 2)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import kve

from .exceptions import DomainError

__all__ = [
    "make_rng",
    "split_rng",
    "sample_gamma",
    "sample_inverse_gamma",
    "sample_gig",
    "sample_mvn",
    "gig_logpdf",
    "gig_mean",
]

# below this omega = sqrt(chi * psi) the GIG is a gamma / inverse gamma to
# double precision
_OMEGA_TINY = 1e-12


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def split_rng(seed: int | np.random.SeedSequence, count: int) -> list[np.random.Generator]:
    """Independent child streams derived from one seed."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.PCG64(child)) for child in ss.spawn(count)]


def sample_gamma(shape, rate, rng: np.random.Generator, size=None):
    shape = np.asarray(shape, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if np.any(~(shape > 0)) or np.any(~(rate > 0)):
        raise DomainError(f"gamma needs shape > 0 and rate > 0, got {shape}, {rate}")
    return rng.gamma(shape, 1.0 / rate, size)


def sample_inverse_gamma(shape, scale, rng: np.random.Generator, size=None):
    shape = np.asarray(shape, dtype=float)
    scale = np.asarray(scale, dtype=float)
    if np.any(~(shape > 0)) or np.any(~(scale > 0)):
        raise DomainError(f"inverse gamma needs shape > 0 and scale > 0, got {shape}, {scale}")
    return scale / rng.gamma(shape, 1.0, size)


def sample_mvn(mean, cov, rng: np.random.Generator) -> np.ndarray:
    """One draw from ``N(mean, cov)`` through the Cholesky factor of ``cov``."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    if cov.shape != (mean.size, mean.size):
        raise DomainError(f"covariance shape {cov.shape} does not match mean of length {mean.size}")
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise DomainError("covariance is not positive definite") from exc
    return mean + chol @ rng.standard_normal(mean.size)


def _check_gig(lam: float, chi: float, psi: float) -> None:
    ok = (
        math.isfinite(lam) and math.isfinite(chi) and math.isfinite(psi)
        and chi >= 0 and psi >= 0 and not (chi == 0 and psi == 0)
        and not (chi == 0 and lam <= 0) and not (psi == 0 and lam >= 0)
    )
    if not ok:
        raise DomainError(f"invalid GIG parameters lam={lam}, chi={chi}, psi={psi}")


def _gig_mode(lam: float, omega: float) -> float:
    if lam >= 1.0:
        return (math.sqrt((lam - 1.0) ** 2 + omega * omega) + (lam - 1.0)) / omega
    return omega / (math.sqrt((1.0 - lam) ** 2 + omega * omega) + (1.0 - lam))


def _fill(size: int, draw_batch) -> np.ndarray:
    out = np.empty(size)
    done = 0
    while done < size:
        need = size - done
        acc = draw_batch(max(16, int(need * 1.4) + 4))
        take = min(acc.size, need)
        out[done:done + take] = acc[:take]
        done += take
    return out


def _rou_noshift(lam: float, omega: float, rng: np.random.Generator, size: int) -> np.ndarray:
    t = 0.5 * (lam - 1.0)
    s = 0.25 * omega
    xm = _gig_mode(lam, omega)
    nc = t * math.log(xm) - s * (xm + 1.0 / xm)
    ym = ((lam + 1.0) + math.sqrt((lam + 1.0) ** 2 + omega * omega)) / omega
    um = math.exp(0.5 * (lam + 1.0) * math.log(ym) - s * (ym + 1.0 / ym) - nc)

    def batch(m):
        u = um * rng.random(m)
        v = rng.random(m)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = u / v
            ok = (x > 0) & np.isfinite(x) & (np.log(v) <= t * np.log(x) - s * (x + 1.0 / x) - nc)
        return x[ok]

    return _fill(size, batch)


def _rou_shift(lam: float, omega: float, rng: np.random.Generator, size: int) -> np.ndarray:
    t = 0.5 * (lam - 1.0)
    s = 0.25 * omega
    xm = _gig_mode(lam, omega)
    nc = t * math.log(xm) - s * (xm + 1.0 / xm)

    # extremes of (x - xm) * sqrt(f(x)) are roots of a cubic (Cardano, three real roots)
    a = -(2.0 * (lam + 1.0) / omega + xm)
    b = 2.0 * (lam - 1.0) * xm / omega - 1.0
    c = xm
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    fi = math.acos(-q / (2.0 * math.sqrt(-(p ** 3) / 27.0)))
    fak = 2.0 * math.sqrt(-p / 3.0)
    y1 = fak * math.cos(fi / 3.0) - a / 3.0
    y2 = fak * math.cos(fi / 3.0 + 4.0 / 3.0 * math.pi) - a / 3.0
    uplus = (y1 - xm) * math.exp(t * math.log(y1) - s * (y1 + 1.0 / y1) - nc)
    uminus = (y2 - xm) * math.exp(t * math.log(y2) - s * (y2 + 1.0 / y2) - nc)

    def batch(m):
        u = uminus + rng.random(m) * (uplus - uminus)
        v = rng.random(m)
        with np.errstate(divide="ignore", invalid="ignore"):
            x = u / v + xm
            ok = (x > 0) & np.isfinite(x)
            ok[ok] = np.log(v[ok]) <= t * np.log(x[ok]) - s * (x[ok] + 1.0 / x[ok]) - nc
        return x[ok]

    return _fill(size, batch)


def _rejection_small_omega(lam: float, omega: float, rng: np.random.Generator, size: int) -> np.ndarray:
    # 0 <= lam < 1, omega <= 1: constant hat on [0, x0], power hat on [x0, 2/omega],
    # exponential hat beyond
    xm = _gig_mode(lam, omega)
    x0 = omega / (1.0 - lam)
    k0 = math.exp((lam - 1.0) * math.log(xm) - 0.5 * omega * (xm + 1.0 / xm))
    a0 = k0 * x0
    if x0 >= 2.0 / omega:
        k1 = 0.0
        a1 = 0.0
        k2 = x0 ** (lam - 1.0)
        a2 = k2 * 2.0 * math.exp(-omega * x0 / 2.0) / omega
    else:
        k1 = math.exp(-omega)
        a1 = k1 * math.log(2.0 / (omega * omega)) if lam == 0 \
            else k1 / lam * ((2.0 / omega) ** lam - x0 ** lam)
        k2 = (2.0 / omega) ** (lam - 1.0)
        a2 = k2 * 2.0 * math.exp(-1.0) / omega
    total = a0 + a1 + a2
    tail_start = max(x0, 2.0 / omega)

    def batch(m):
        v = total * rng.random(m)
        x = np.empty(m)
        hx = np.empty(m)
        seg0 = v <= a0
        seg1 = ~seg0 & (v <= a0 + a1)
        seg2 = ~seg0 & ~seg1
        x[seg0] = x0 * v[seg0] / a0
        hx[seg0] = k0
        if seg1.any():
            w = v[seg1] - a0
            if lam == 0:
                x[seg1] = omega * np.exp(math.exp(omega) * w)
                hx[seg1] = k1 / x[seg1]
            else:
                x[seg1] = (x0 ** lam + lam / k1 * w) ** (1.0 / lam)
                hx[seg1] = k1 * x[seg1] ** (lam - 1.0)
        if seg2.any():
            w = v[seg2] - a0 - a1
            with np.errstate(divide="ignore", invalid="ignore"):
                x[seg2] = -2.0 / omega * np.log(math.exp(-omega / 2.0 * tail_start) - omega / (2.0 * k2) * w)
            hx[seg2] = k2 * np.exp(-omega / 2.0 * x[seg2])
        u = rng.random(m) * hx
        with np.errstate(divide="ignore", invalid="ignore"):
            ok = (x > 0) & np.isfinite(x)
            ok[ok] = np.log(u[ok]) <= (lam - 1.0) * np.log(x[ok]) - omega / 2.0 * (x[ok] + 1.0 / x[ok])
        return x[ok]

    return _fill(size, batch)


def sample_gig(lam: float, chi: float, psi: float, rng: np.random.Generator, size=None):
    """Generalized inverse Gaussian variates.

    Ratio-of-uniforms (with a mode shift for large ``lam`` or ``omega``) or,
    for ``0 <= lam < 1`` and small ``omega``, rejection from a three-piece hat;
    negative ``lam`` goes through ``1 / GIG(-lam, psi, chi)``.

    Raises
    ------
    DomainError
        ``chi == psi == 0``, ``chi == 0`` with ``lam <= 0``, or ``psi == 0``
        with ``lam >= 0``.
    """
    lam, chi, psi = float(lam), float(chi), float(psi)
    _check_gig(lam, chi, psi)
    n = 1 if size is None else int(np.prod(size))
    omega = math.sqrt(chi * psi)
    if omega < _OMEGA_TINY and lam != 0:
        if lam > 0:
            out = rng.gamma(lam, 2.0 / psi, n)
        else:
            out = (0.5 * chi) / rng.gamma(-lam, 1.0, n)
    else:
        a = abs(lam)
        if a > 2.0 or omega > 3.0:
            x = _rou_shift(a, omega, rng, n)
        elif a >= 1.0 - 2.25 * omega * omega or omega > 0.2:
            x = _rou_noshift(a, omega, rng, n)
        else:
            x = _rejection_small_omega(a, omega, rng, n)
        scale = math.sqrt(chi / psi)
        out = scale / x if lam < 0 else scale * x
    if size is None:
        return float(out[0])
    return out.reshape(size)


def gig_logpdf(x, lam: float, chi: float, psi: float) -> np.ndarray:
    """Normalized GIG log-density (for ``chi, psi > 0``)."""
    x = np.asarray(x, dtype=float)
    omega = math.sqrt(chi * psi)
    log_norm = 0.5 * lam * math.log(psi / chi) - math.log(2.0) - (math.log(kve(lam, omega)) - omega)
    return log_norm + (lam - 1.0) * np.log(x) - 0.5 * (chi / x + psi * x)


def gig_mean(lam: float, chi: float, psi: float) -> float:
    """``sqrt(chi / psi) * K_{lam+1}(omega) / K_lam(omega)``."""
    omega = math.sqrt(chi * psi)
    return math.sqrt(chi / psi) * kve(lam + 1.0, omega) / kve(lam, omega)

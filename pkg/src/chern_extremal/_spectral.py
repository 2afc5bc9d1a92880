"""Shared FFT plumbing: wavenumbers, derivative multipliers, projections.

Everything here works on raw numpy arrays of shape (N,)*2n.  The public
field types live in ``grid``; operators compose these kernels so that the
discrete adjoint relations hold to machine precision (each factor of every
composition is either a pointwise multiplication or a spectral derivative
with an exactly skew-adjoint multiplier).
"""
from __future__ import annotations

import os
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

_THREAD_ENV = "CHERN_EXTREMAL_THREADS"


def workers() -> int:
    """FFT worker count, capped by the CHERN_EXTREMAL_THREADS variable."""
    raw = os.environ.get(_THREAD_ENV, "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = os.cpu_count() or 1
    return cap


def fftn(a):
    return sfft.fftn(a, workers=workers())


def ifftn(a):
    return sfft.ifftn(a, workers=workers())


@lru_cache(maxsize=32)
def wavenumbers(N: int) -> np.ndarray:
    """Integer wavenumbers with the Nyquist entry zeroed.

    Zeroing the Nyquist column keeps first derivatives real-to-real and the
    multiplier purely imaginary, hence exactly skew-adjoint.  The price is a
    2^(2n)-dimensional spurious kernel of modes whose axes all sit at
    frequency 0 or N/2; solvers remove it with nyquist_project.
    """
    k = np.fft.fftfreq(N, d=1.0 / N)
    k[N // 2] = 0.0
    k.setflags(write=False)
    return k


def axis_pair(j: int) -> tuple[int, int]:
    # x_j is array axis 2j, y_j is axis 2j+1 (j counted from 0 here)
    return 2 * j, 2 * j + 1


def _k_along(N: int, naxes: int, ax: int) -> np.ndarray:
    shape = [1] * naxes
    shape[ax] = N
    return wavenumbers(N).reshape(shape)


@lru_cache(maxsize=64)
def holo_multiplier(n: int, N: int, j: int) -> np.ndarray:
    """Fourier symbol of d/dz_j = (d/dx_j - i d/dy_j)/2, broadcastable."""
    ax, ay = axis_pair(j)
    kx = _k_along(N, 2 * n, ax)
    ky = _k_along(N, 2 * n, ay)
    m = np.pi * (1j * kx + ky)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def antiholo_multiplier(n: int, N: int, j: int) -> np.ndarray:
    """Fourier symbol of d/dzbar_j = (d/dx_j + i d/dy_j)/2."""
    ax, ay = axis_pair(j)
    kx = _k_along(N, 2 * n, ax)
    ky = _k_along(N, 2 * n, ay)
    m = np.pi * (1j * kx - ky)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def second_multiplier(n: int, N: int, i: int, j: int) -> np.ndarray:
    """Symbol of d/dz_i d/dzbar_j on the full grid (materialized once)."""
    m = (holo_multiplier(n, N, i) * antiholo_multiplier(n, N, j))
    m = np.ascontiguousarray(np.broadcast_to(m, (N,) * (2 * n)))
    m.setflags(write=False)
    return m


def nyquist_project(u: np.ndarray, n: int, N: int) -> np.ndarray:
    """Zero every Fourier plane with an axis at the Nyquist frequency.

    Removes the spurious checkerboard kernel shared by all derivative-built
    operators.  For smooth data this changes nothing above roundoff.
    """
    uh = fftn(np.asarray(u, dtype=complex))
    for ax in range(2 * n):
        sl = [slice(None)] * (2 * n)
        sl[ax] = N // 2
        uh[tuple(sl)] = 0.0
    out = ifftn(uh)
    return out.real if np.isrealobj(u) else out


@lru_cache(maxsize=32)
def flat_symbol(n: int, N: int) -> np.ndarray:
    """Symbol of the flat-metric complex Laplacian, -pi^2 sum_a k_a^2."""
    sym = np.zeros((N,) * (2 * n))
    for ax in range(2 * n):
        sym = sym + _k_along(N, 2 * n, ax) ** 2
    sym = -np.pi**2 * sym
    sym.setflags(write=False)
    return sym


def flat_inverse(u: np.ndarray, n: int, N: int, scale: float) -> np.ndarray:
    """Apply the inverse of scale * flat Laplacian spectrally.

    Modes where the symbol vanishes (the constant and the checkerboards)
    are passed through unchanged; iterates carry no content there.
    """
    sym = flat_symbol(n, N) * scale
    mul = np.where(sym == 0.0, 1.0, 1.0 / np.where(sym == 0.0, 1.0, sym))
    out = ifftn(mul * fftn(np.asarray(u, dtype=complex)))
    return out.real if np.isrealobj(u) else out


# ---------------------------------------------------------------------------
# operator kernels; Binv is the pointwise inverse metric, shape (...,n,n)

def box_raw(Binv: np.ndarray, u: np.ndarray, n: int, N: int) -> np.ndarray:
    """sum_ij Binv[j,i] dz_i dzbar_j u, complex output."""
    uh = fftn(np.asarray(u, dtype=complex))
    acc = None
    for i in range(n):
        for j in range(n):
            term = Binv[..., j, i] * ifftn(second_multiplier(n, N, i, j) * uh)
            acc = term if acc is None else acc + term
    return acc


def box_transpose_raw(Binv: np.ndarray, u: np.ndarray, n: int, N: int) -> np.ndarray:
    """Plain-l2 adjoint of box_raw: sum_ij dz_i dzbar_j (Binv[j,i] u)."""
    acc = None
    for i in range(n):
        for j in range(n):
            term = second_multiplier(n, N, i, j) * fftn(Binv[..., j, i] * np.asarray(u, dtype=complex))
            acc = term if acc is None else acc + term
    return ifftn(acc)


def hodge_raw(Binv: np.ndarray, w: np.ndarray, u: np.ndarray, n: int, N: int) -> np.ndarray:
    """Divergence-form Laplacian -(2/w) Re sum_j dzbar_j(w Binv[j,:] . du)."""
    uh = fftn(np.asarray(u, dtype=complex))
    du = [ifftn(np.broadcast_to(holo_multiplier(n, N, i), uh.shape) * uh) for i in range(n)]
    acc = None
    for j in range(n):
        qj = None
        for i in range(n):
            term = (w * Binv[..., j, i]) * du[i]
            qj = term if qj is None else qj + term
        term = np.broadcast_to(antiholo_multiplier(n, N, j), uh.shape) * fftn(qj)
        acc = term if acc is None else acc + term
    return -(2.0 / w) * ifftn(acc).real

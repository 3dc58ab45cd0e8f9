"""Inner loops for piecewise-constant SU(2) propagation.

Every propagator in the package reduces to the same operation: a long,
time-ordered product of 2x2 exponentials ``exp(-i (hx sx + hy sy + hz sz) dt)``.
Two implementations are kept side by side:

* ``numba`` -- fused scalar loops compiled with ``@njit`` (default when
  numba imports cleanly),
* ``numpy`` -- vectorised exponentials followed by a pairwise tree
  reduction of the matrix product.

The active backend is chosen once at import time from the ``SAGQG_BACKEND``
environment variable (``numba`` or ``numpy``). Both backends are always
importable as ``NUMBA`` and ``NUMPY`` so benchmarks and tests can compare
them directly. They agree to rounding (~1e-13), not bit-for-bit.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


# --------------------------------------------------------------------------
# numpy backend
# --------------------------------------------------------------------------


def _np_steps(hx, hy, hz, dt):
    """Stack of closed-form step exponentials, shape (n, 2, 2)."""
    hx = np.asarray(hx, dtype=np.float64)
    hy = np.asarray(hy, dtype=np.float64)
    hz = np.asarray(hz, dtype=np.float64)
    dt = np.broadcast_to(np.asarray(dt, dtype=np.float64), hx.shape)
    norm = np.sqrt(hx * hx + hy * hy + hz * hz)
    theta = norm * dt
    c = np.cos(theta)
    safe = np.where(norm > 0.0, norm, 1.0)
    s = np.where(norm > 0.0, np.sin(theta) / safe, dt)
    out = np.empty(hx.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c - 1j * s * hz
    out[..., 1, 1] = c + 1j * s * hz
    out[..., 0, 1] = -1j * s * hx - s * hy
    out[..., 1, 0] = -1j * s * hx + s * hy
    return out


def _np_ordered_product(mats):
    """``mats[n-1] @ ... @ mats[0]`` by pairwise reduction."""
    mats = np.asarray(mats, dtype=np.complex128)
    if mats.shape[0] == 0:
        return np.eye(2, dtype=np.complex128)
    while mats.shape[0] > 1:
        if mats.shape[0] % 2:
            mats = np.concatenate([mats, np.eye(2, dtype=np.complex128)[None]])
        mats = np.matmul(mats[1::2], mats[0::2])
    return mats[0].copy()


def _np_propagate(hx, hy, hz, dt):
    return _np_ordered_product(_np_steps(hx, hy, hz, dt))


def _np_propagate_intervals(hx, hy, hz, dt, counts):
    steps = _np_steps(hx, hy, hz, dt)
    out = np.empty((len(counts), 2, 2), dtype=np.complex128)
    start = 0
    for k, n in enumerate(counts):
        out[k] = _np_ordered_product(steps[start:start + n])
        start += n
    return out


def _np_evolve(hx, hy, hz, dt, counts, psi0):
    props = _np_propagate_intervals(hx, hy, hz, dt, counts)
    states = np.empty((len(counts) + 1, 2), dtype=np.complex128)
    states[0] = psi0
    for k in range(len(counts)):
        states[k + 1] = props[k] @ states[k]
    return states


def _np_chain(unitaries, indices):
    indices = np.asarray(indices, dtype=np.int64)
    return _np_ordered_product(np.asarray(unitaries)[indices])


NUMPY = SimpleNamespace(
    name="numpy",
    steps=_np_steps,
    propagate=_np_propagate,
    propagate_intervals=_np_propagate_intervals,
    evolve=_np_evolve,
    chain=_np_chain,
)


# --------------------------------------------------------------------------
# numba backend
# --------------------------------------------------------------------------

if numba is not None:
    _jit = numba.njit(cache=True, nogil=True)

    @_jit
    def _nb_mul_step(hx, hy, hz, dt, a00, a01, a10, a11):
        # returns exp(-i h.sigma dt) @ A
        norm = np.sqrt(hx * hx + hy * hy + hz * hz)
        theta = norm * dt
        c = np.cos(theta)
        if norm > 0.0:
            s = np.sin(theta) / norm
        else:
            s = dt
        e00 = complex(c, -s * hz)
        e11 = complex(c, s * hz)
        e01 = complex(-s * hy, -s * hx)
        e10 = complex(s * hy, -s * hx)
        return (
            e00 * a00 + e01 * a10,
            e00 * a01 + e01 * a11,
            e10 * a00 + e11 * a10,
            e10 * a01 + e11 * a11,
        )

    @_jit
    def _nb_steps(hx, hy, hz, dt):
        n = hx.shape[0]
        out = np.empty((n, 2, 2), dtype=np.complex128)
        one = complex(1.0, 0.0)
        zero = complex(0.0, 0.0)
        for k in range(n):
            a00, a01, a10, a11 = _nb_mul_step(hx[k], hy[k], hz[k], dt[k], one, zero, zero, one)
            out[k, 0, 0] = a00
            out[k, 0, 1] = a01
            out[k, 1, 0] = a10
            out[k, 1, 1] = a11
        return out

    @_jit
    def _nb_propagate(hx, hy, hz, dt):
        a00 = complex(1.0, 0.0)
        a01 = complex(0.0, 0.0)
        a10 = complex(0.0, 0.0)
        a11 = complex(1.0, 0.0)
        for k in range(hx.shape[0]):
            a00, a01, a10, a11 = _nb_mul_step(hx[k], hy[k], hz[k], dt[k], a00, a01, a10, a11)
        out = np.empty((2, 2), dtype=np.complex128)
        out[0, 0] = a00
        out[0, 1] = a01
        out[1, 0] = a10
        out[1, 1] = a11
        return out

    @_jit
    def _nb_propagate_intervals(hx, hy, hz, dt, counts):
        out = np.empty((counts.shape[0], 2, 2), dtype=np.complex128)
        k = 0
        for j in range(counts.shape[0]):
            a00 = complex(1.0, 0.0)
            a01 = complex(0.0, 0.0)
            a10 = complex(0.0, 0.0)
            a11 = complex(1.0, 0.0)
            for _ in range(counts[j]):
                a00, a01, a10, a11 = _nb_mul_step(hx[k], hy[k], hz[k], dt[k], a00, a01, a10, a11)
                k += 1
            out[j, 0, 0] = a00
            out[j, 0, 1] = a01
            out[j, 1, 0] = a10
            out[j, 1, 1] = a11
        return out

    @_jit
    def _nb_evolve(hx, hy, hz, dt, counts, psi0):
        props = _nb_propagate_intervals(hx, hy, hz, dt, counts)
        states = np.empty((counts.shape[0] + 1, 2), dtype=np.complex128)
        states[0, 0] = psi0[0]
        states[0, 1] = psi0[1]
        for j in range(counts.shape[0]):
            states[j + 1, 0] = props[j, 0, 0] * states[j, 0] + props[j, 0, 1] * states[j, 1]
            states[j + 1, 1] = props[j, 1, 0] * states[j, 0] + props[j, 1, 1] * states[j, 1]
        return states

    @_jit
    def _nb_chain(unitaries, indices):
        a00 = complex(1.0, 0.0)
        a01 = complex(0.0, 0.0)
        a10 = complex(0.0, 0.0)
        a11 = complex(1.0, 0.0)
        for j in range(indices.shape[0]):
            u = unitaries[indices[j]]
            b00 = u[0, 0] * a00 + u[0, 1] * a10
            b01 = u[0, 0] * a01 + u[0, 1] * a11
            b10 = u[1, 0] * a00 + u[1, 1] * a10
            b11 = u[1, 0] * a01 + u[1, 1] * a11
            a00, a01, a10, a11 = b00, b01, b10, b11
        out = np.empty((2, 2), dtype=np.complex128)
        out[0, 0] = a00
        out[0, 1] = a01
        out[1, 0] = a10
        out[1, 1] = a11
        return out

    def _f64(*arrays):
        return tuple(np.ascontiguousarray(a, dtype=np.float64) for a in arrays)

    def _dt_like(dt, hx):
        return np.ascontiguousarray(np.broadcast_to(np.asarray(dt, dtype=np.float64), hx.shape))

    def _wrap_steps(hx, hy, hz, dt):
        hx, hy, hz = _f64(hx, hy, hz)
        return _nb_steps(hx, hy, hz, _dt_like(dt, hx))

    def _wrap_propagate(hx, hy, hz, dt):
        hx, hy, hz = _f64(hx, hy, hz)
        return _nb_propagate(hx, hy, hz, _dt_like(dt, hx))

    def _wrap_intervals(hx, hy, hz, dt, counts):
        hx, hy, hz = _f64(hx, hy, hz)
        counts = np.ascontiguousarray(counts, dtype=np.int64)
        return _nb_propagate_intervals(hx, hy, hz, _dt_like(dt, hx), counts)

    def _wrap_evolve(hx, hy, hz, dt, counts, psi0):
        hx, hy, hz = _f64(hx, hy, hz)
        counts = np.ascontiguousarray(counts, dtype=np.int64)
        psi0 = np.ascontiguousarray(psi0, dtype=np.complex128)
        return _nb_evolve(hx, hy, hz, _dt_like(dt, hx), counts, psi0)

    def _wrap_chain(unitaries, indices):
        unitaries = np.ascontiguousarray(unitaries, dtype=np.complex128)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        return _nb_chain(unitaries, indices)

    NUMBA = SimpleNamespace(
        name="numba",
        steps=_wrap_steps,
        propagate=_wrap_propagate,
        propagate_intervals=_wrap_intervals,
        evolve=_wrap_evolve,
        chain=_wrap_chain,
    )
else:  # pragma: no cover
    NUMBA = None


def select(name: str | None = None) -> SimpleNamespace:
    """Return the backend named ``name`` (or the one picked by the environment)."""
    if name is None:
        name = os.environ.get("SAGQG_BACKEND", "numba")
    name = name.strip().lower()
    if name == "numpy":
        return NUMPY
    if name == "numba":
        return NUMBA if NUMBA is not None else NUMPY
    raise ValueError(f"unknown SAGQG_BACKEND {name!r}; expected 'numba' or 'numpy'")


backend = select()

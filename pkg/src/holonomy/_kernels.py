"""Hot inner loops of the integrators.

Every kernel exists twice: a loop form compiled with ``numba.njit`` and a
vectorised pure-numpy form. ``HOLONOMY_DISABLE_JIT=1`` (or a missing numba)
selects the numpy forms. Both forms take and return plain ``complex128``
arrays so callers never see which one ran.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

JIT_REQUESTED = os.environ.get("HOLONOMY_DISABLE_JIT", "").strip().lower() not in (
    "1", "true", "yes", "on")
USE_JIT = JIT_REQUESTED and numba is not None


def _dagger(a):
    return np.ascontiguousarray(np.conj(a).T)


if numba is not None:
    _dagger = numba.njit(cache=True, nogil=True)(_dagger)


# --------------------------------------------------------------------------
# loop forms (numba targets)
# --------------------------------------------------------------------------

def _expm_hermitian_stack_loop(H, c):
    N, n, _ = H.shape
    out = np.empty_like(H)
    for k in range(N):
        w, v = np.linalg.eigh(H[k])
        f = np.exp(c * w)
        out[k] = (v * f) @ _dagger(v)
    return out


def _left_cumprod_loop(F):
    N, n, _ = F.shape
    out = np.empty((N + 1, n, n), dtype=F.dtype)
    out[0] = np.eye(n, dtype=F.dtype)
    for k in range(N):
        out[k + 1] = F[k] @ out[k]
    return out


def _unitary_logs_loop(Y):
    N, n, _ = Y.shape
    out = np.empty_like(Y)
    for k in range(N):
        h = (Y[k] - _dagger(Y[k])) / 2j
        h = (h + _dagger(h)) / 2
        w, v = np.linalg.eigh(h)
        a = np.arcsin(np.minimum(np.maximum(w, -1.0), 1.0))
        out[k] = (v * (1j * a)) @ _dagger(v)
    return out


def _connection_increments_loop(psi, evecs, inv_p, cluster_of):
    N = psi.shape[0] - 1
    n = psi.shape[1]
    out = np.empty((N, n, n), dtype=np.complex128)
    evh = _dagger(evecs)
    for i in range(N):
        m = _dagger(psi[i]) @ psi[i + 1]
        s = (m - _dagger(m)) / 2
        t = evh @ s @ evecs
        for a in range(n):
            for b in range(n):
                if cluster_of[a] != cluster_of[b]:
                    t[a, b] = 0.0
                else:
                    t[a, b] = t[a, b] * inv_p[b]
        t = (t - _dagger(t)) / 2
        out[i] = evecs @ t @ evh
    return out


def _polar_connection_steps_loop(psi, evecs, starts, sizes):
    N = psi.shape[0] - 1
    n = psi.shape[1]
    out = np.empty((N, n, n), dtype=np.complex128)
    evh = _dagger(evecs)
    for i in range(N):
        if not np.any(psi[i] != psi[i + 1]):
            out[i] = np.eye(n, dtype=np.complex128)
            continue
        t = evh @ (_dagger(psi[i]) @ psi[i + 1]) @ evecs
        f = np.zeros((n, n), dtype=np.complex128)
        for c in range(starts.shape[0]):
            s = starts[c]
            m = sizes[c]
            u, _, vh = np.linalg.svd(np.ascontiguousarray(t[s:s + m, s:s + m]))
            f[s:s + m, s:s + m] = _dagger(u @ vh)
        out[i] = evecs @ f @ evh
    return out


def _uhlmann_propagate_loop(rhos, psi0, dt, proj_tol, pd_floor):
    N = rhos.shape[0] - 1
    n = rhos.shape[1]
    psi = np.empty_like(rhos)
    psi[0] = psi0
    cur = psi0.copy()
    corrections = 0
    status = 0
    for i in range(N):
        rm = (rhos[i] + rhos[i + 1]) / 2
        rd = (rhos[i + 1] - rhos[i]) / dt
        w, v = np.linalg.eigh(rm)
        if w[0] <= pd_floor:
            status = i + 1
            break
        if not np.any(rd != 0):
            psi[i + 1] = cur
            continue
        g = _dagger(v) @ rd @ v
        for a in range(n):
            for b in range(n):
                g[a, b] = g[a, b] / (w[a] + w[b])
        g = v @ g @ _dagger(v)
        g = (g + _dagger(g)) / 2
        wg, vg = np.linalg.eigh(g)
        prev = cur
        cur = ((vg * np.exp(dt * wg)) @ _dagger(vg)) @ prev
        cur = cur / np.sqrt(np.sum(np.abs(cur) ** 2))
        drift = np.sqrt(np.sum(np.abs(cur @ _dagger(cur) - rhos[i + 1]) ** 2))
        if drift > proj_tol / 10:
            # the point over rho_i+1 whose overlap with prev is positive Hermitian
            wr, vr = np.linalg.eigh(rhos[i + 1])
            sr = np.sqrt(np.maximum(wr, pd_floor))
            sq = (vr * sr) @ _dagger(vr)
            u, _, vh = np.linalg.svd(sq @ prev)
            cur = sq @ (u @ vh)
            corrections += 1
        psi[i + 1] = cur
    return psi, corrections, status


def _align_frames_loop(V, starts, sizes):
    N1 = V.shape[0]
    out = V.copy()
    for i in range(1, N1):
        for c in range(starts.shape[0]):
            s = starts[c]
            m = sizes[c]
            b = np.ascontiguousarray(out[i][:, s:s + m])
            a = np.ascontiguousarray(out[i - 1][:, s:s + m])
            if not np.any(V[i][:, s:s + m] != V[i - 1][:, s:s + m]):
                out[i][:, s:s + m] = a
                continue
            u, _, vh = np.linalg.svd(_dagger(b) @ a)
            out[i][:, s:s + m] = b @ (u @ vh)
    return out


# --------------------------------------------------------------------------
# numpy forms
# --------------------------------------------------------------------------

def _H(a):
    return np.conj(np.swapaxes(a, -1, -2))


def _expm_hermitian_stack_numpy(H, c):
    w, v = np.linalg.eigh(H)
    return (v * np.exp(c * w)[..., None, :]) @ _H(v)


def _left_cumprod_numpy(F):
    N, n, _ = F.shape
    out = np.empty((N + 1, n, n), dtype=F.dtype)
    out[0] = np.eye(n, dtype=F.dtype)
    for k in range(N):
        np.matmul(F[k], out[k], out=out[k + 1])
    return out


def _unitary_logs_numpy(Y):
    h = (Y - _H(Y)) / 2j
    h = (h + _H(h)) / 2
    w, v = np.linalg.eigh(h)
    a = np.arcsin(np.clip(w, -1.0, 1.0))
    return (v * (1j * a)[..., None, :]) @ _H(v)


def _connection_increments_numpy(psi, evecs, inv_p, cluster_of):
    m = _H(psi[:-1]) @ psi[1:]
    s = (m - _H(m)) / 2
    t = _H(evecs) @ s @ evecs
    mask = cluster_of[:, None] == cluster_of[None, :]
    t = np.where(mask, t, 0.0) * inv_p[None, None, :]
    t = (t - _H(t)) / 2
    return evecs @ t @ _H(evecs)


def _polar_connection_steps_numpy(psi, evecs, starts, sizes):
    N = psi.shape[0] - 1
    n = psi.shape[1]
    t = _H(evecs) @ (_H(psi[:-1]) @ psi[1:]) @ evecs
    f = np.zeros((N, n, n), dtype=np.complex128)
    for s, m in zip(starts, sizes):
        u, _, vh = np.linalg.svd(t[:, s:s + m, s:s + m])
        f[:, s:s + m, s:s + m] = _H(u @ vh)
    out = evecs @ f @ _H(evecs)
    still = ~np.any(psi[:-1] != psi[1:], axis=(1, 2))
    out[still] = np.eye(n)
    return out


def _uhlmann_propagate_numpy(rhos, psi0, dt, proj_tol, pd_floor):
    N = rhos.shape[0] - 1
    rm = (rhos[:-1] + rhos[1:]) / 2
    rd = (rhos[1:] - rhos[:-1]) / dt
    w, v = np.linalg.eigh(rm)
    bad = np.nonzero(w[:, 0] <= pd_floor)[0]
    stop = N if bad.size == 0 else int(bad[0])
    g = _H(v) @ rd @ v / (w[:, :, None] + w[:, None, :])
    g = v @ g @ _H(v)
    g = (g + _H(g)) / 2
    steps = _expm_hermitian_stack_numpy(g[:stop], dt)
    wr, vr = np.linalg.eigh(rhos[1:stop + 1])
    sr = np.sqrt(np.maximum(wr, pd_floor))
    sq = (vr * sr[:, None, :]) @ _H(vr)
    psi = np.empty_like(rhos)
    psi[0] = psi0
    cur = psi0.copy()
    corrections = 0
    still = ~np.any(rd != 0, axis=(1, 2))
    for i in range(stop):
        if still[i]:
            psi[i + 1] = cur
            continue
        prev = cur
        cur = steps[i] @ prev
        cur = cur / np.linalg.norm(cur)
        drift = np.linalg.norm(cur @ cur.conj().T - rhos[i + 1])
        if drift > proj_tol / 10:
            u, _, vh = np.linalg.svd(sq[i] @ prev)
            cur = sq[i] @ (u @ vh)
            corrections += 1
        psi[i + 1] = cur
    status = 0 if bad.size == 0 else stop + 1
    return psi, corrections, status


def _align_frames_numpy(V, starts, sizes):
    out = V.copy()
    for i in range(1, out.shape[0]):
        for s, m in zip(starts, sizes):
            b = out[i][:, s:s + m]
            a = out[i - 1][:, s:s + m]
            if np.array_equal(V[i][:, s:s + m], V[i - 1][:, s:s + m]):
                out[i][:, s:s + m] = a
                continue
            u, _, vh = np.linalg.svd(b.conj().T @ a)
            out[i][:, s:s + m] = b @ (u @ vh)
    return out


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

_LOOP_FORMS = {
    "expm_hermitian_stack": _expm_hermitian_stack_loop,
    "left_cumprod": _left_cumprod_loop,
    "unitary_logs": _unitary_logs_loop,
    "connection_increments": _connection_increments_loop,
    "polar_connection_steps": _polar_connection_steps_loop,
    "uhlmann_propagate": _uhlmann_propagate_loop,
    "align_frames": _align_frames_loop,
}

NUMPY_IMPL = {
    "expm_hermitian_stack": _expm_hermitian_stack_numpy,
    "left_cumprod": _left_cumprod_numpy,
    "unitary_logs": _unitary_logs_numpy,
    "connection_increments": _connection_increments_numpy,
    "polar_connection_steps": _polar_connection_steps_numpy,
    "uhlmann_propagate": _uhlmann_propagate_numpy,
    "align_frames": _align_frames_numpy,
}

if numba is not None:
    JIT_IMPL = {name: numba.njit(cache=True, nogil=True)(fn)
                for name, fn in _LOOP_FORMS.items()}
else:  # pragma: no cover
    JIT_IMPL = {}

ACTIVE = JIT_IMPL if USE_JIT else NUMPY_IMPL


def _c(a):
    return np.ascontiguousarray(a, dtype=np.complex128)


def expm_hermitian_stack(H, c):
    """exp(c * H[k]) for a stack of Hermitian matrices and a complex scalar c."""
    return ACTIVE["expm_hermitian_stack"](_c(H), complex(c))


def left_cumprod(F):
    """Running products ``[I, F0, F1 F0, F2 F1 F0, ...]``."""
    return ACTIVE["left_cumprod"](_c(F))


def unitary_logs(Y):
    """Principal skew-Hermitian logarithms of near-identity unitaries.

    Valid while every eigen-angle stays inside (-pi/2, pi/2).
    """
    return ACTIVE["unitary_logs"](_c(Y))


def connection_increments(psi, evecs, inv_p, cluster_of):
    return ACTIVE["connection_increments"](
        _c(psi), _c(evecs), np.ascontiguousarray(inv_p, dtype=np.float64),
        np.ascontiguousarray(cluster_of, dtype=np.int64))


def polar_connection_steps(psi, evecs, starts, sizes):
    """Per-step isotropy factors that make every overlap block Hermitian positive.

    For each step and each eigenvalue cluster of the reference momentum the
    block of psi_i^dagger psi_i+1 (in the reference eigenbasis) is polar
    decomposed as Q P; the returned factor is the block-diagonal Q^dagger.
    """
    return ACTIVE["polar_connection_steps"](
        _c(psi), _c(evecs), np.ascontiguousarray(starts, dtype=np.int64),
        np.ascontiguousarray(sizes, dtype=np.int64))


def uhlmann_propagate(rhos, psi0, dt, proj_tol, pd_floor):
    psi, corrections, status = ACTIVE["uhlmann_propagate"](
        _c(rhos), _c(psi0), float(dt), float(proj_tol), float(pd_floor))
    return psi, int(corrections), int(status)


def align_frames(V, starts, sizes):
    return ACTIVE["align_frames"](
        _c(V), np.ascontiguousarray(starts, dtype=np.int64),
        np.ascontiguousarray(sizes, dtype=np.int64))

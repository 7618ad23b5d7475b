# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled time loops mirroring ``_pykernels`` (same arithmetic order per node)."""
from libc.stdlib cimport malloc, free


cdef inline void _d(double[::1] u, double* out, Py_ssize_t n, double inv2h) noexcept nogil:
    cdef Py_ssize_t i
    out[0] = (u[1] - u[n - 1]) * inv2h
    for i in range(1, n - 1):
        out[i] = (u[i + 1] - u[i - 1]) * inv2h
    out[n - 1] = (u[0] - u[n - 2]) * inv2h


cdef inline void _dp(double* u, double* out, Py_ssize_t n, double inv2h) noexcept nogil:
    cdef Py_ssize_t i
    out[0] = (u[1] - u[n - 1]) * inv2h
    for i in range(1, n - 1):
        out[i] = (u[i + 1] - u[i - 1]) * inv2h
    out[n - 1] = (u[0] - u[n - 2]) * inv2h


def kg_hamiltonian_steps(double[::1] phi, double[::1] P0, double[::1] Pphi,
                         double h, double dt, double m2, Py_ssize_t nsteps):
    cdef Py_ssize_t n = phi.shape[0], i, s
    cdef double inv2h = 1.0 / (2.0 * h)
    cdef double half
    cdef double* P1 = <double*> malloc(n * sizeof(double))
    cdef double* DP1 = <double*> malloc(n * sizeof(double))
    cdef double* P1n = <double*> malloc(n * sizeof(double))
    cdef double* DP1n = <double*> malloc(n * sizeof(double))
    cdef double* hv = <double*> malloc(n * sizeof(double))
    cdef double* tmp
    if not (P1 and DP1 and P1n and DP1n and hv):
        raise MemoryError()
    try:
        with nogil:
            _d(phi, P1, n, inv2h)
            _dp(P1, DP1, n, inv2h)
            for s in range(nsteps):
                for i in range(n):
                    hv[i] = P0[i] + 0.5 * dt * (DP1[i] - m2 * phi[i])
                    phi[i] = phi[i] + dt * hv[i]
                _d(phi, P1n, n, inv2h)
                _dp(P1n, DP1n, n, inv2h)
                for i in range(n):
                    P0[i] = hv[i] + 0.5 * dt * (DP1n[i] - m2 * phi[i])
                    Pphi[i] = Pphi[i] + (0.5 * (P1n[i] - P1[i]) * (P1n[i] + P1[i])
                                         - dt * hv[i] * 0.5 * (DP1[i] + DP1n[i]))
                tmp = P1; P1 = P1n; P1n = tmp
                tmp = DP1; DP1 = DP1n; DP1n = tmp
    finally:
        free(P1); free(DP1); free(P1n); free(DP1n); free(hv)


def kg_reference_steps(double[::1] phi, double[::1] phi_prev,
                       double h, double dt, double m2, Py_ssize_t nsteps):
    cdef Py_ssize_t n = phi.shape[0], i, s, ip, im
    cdef double c = dt * dt, lap
    cdef double* nxt = <double*> malloc(n * sizeof(double))
    if not nxt:
        raise MemoryError()
    try:
        with nogil:
            for s in range(nsteps):
                for i in range(n):
                    ip = i + 1 if i + 1 < n else 0
                    im = i - 1 if i > 0 else n - 1
                    lap = (phi[ip] - 2.0 * phi[i] + phi[im]) / (h * h)
                    nxt[i] = 2.0 * phi[i] - phi_prev[i] + c * (lap - m2 * phi[i])
                for i in range(n):
                    phi_prev[i] = phi[i]
                    phi[i] = nxt[i]
    finally:
        free(nxt)

"""Pure numpy time loops for the 1+1 Klein-Gordon field (mass potential only).

Arrays are updated in place.  ``m2`` is the squared mass, so the force is
``dPsi/dphi = -m2 * phi``.
"""
import numpy as np


def _d(u, h):
    return (np.roll(u, -1) - np.roll(u, 1)) / (2.0 * h)


def kg_hamiltonian_steps(phi, P0, Pphi, h, dt, m2, nsteps):
    """Velocity-Verlet steps of ``d0 phi = P0``, ``d0 P0 = d1 P1 - m2 phi`` with ``P1 = d1 phi``.

    ``Pphi`` follows ``d0 Pphi = (d0 P1) P1 - (d1 P1) P0`` with midpoint averages.
    """
    P1 = _d(phi, h)
    DP1 = _d(P1, h)
    for _ in range(nsteps):
        half = P0 + 0.5 * dt * (DP1 - m2 * phi)
        phi += dt * half
        P1n = _d(phi, h)
        DP1n = _d(P1n, h)
        P0[:] = half + 0.5 * dt * (DP1n - m2 * phi)
        Pphi += 0.5 * (P1n - P1) * (P1n + P1) - dt * half * 0.5 * (DP1 + DP1n)
        P1, DP1 = P1n, DP1n


def kg_reference_steps(phi, phi_prev, h, dt, m2, nsteps):
    """Three-level leapfrog for ``phi_tt = phi_xx - m2 phi`` with the compact Laplacian."""
    c = dt * dt
    for _ in range(nsteps):
        lap = (np.roll(phi, -1) - 2.0 * phi + np.roll(phi, 1)) / (h * h)
        nxt = 2.0 * phi - phi_prev + c * (lap - m2 * phi)
        phi_prev[:] = phi
        phi[:] = nxt

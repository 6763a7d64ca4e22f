"""Birth-death rate equation for the trap populations."""

import numpy as np
from scipy.linalg import expm

from cavity_cooler.dynamics import Trajectory


def rate_generator(a_plus, a_minus, n_trap):
    """Generator G with ṗ = G p; the top level reflects (no transitions above n_trap − 1)."""
    g = np.zeros((n_trap, n_trap))
    for n in range(n_trap):
        up = (n + 1) * a_plus if n < n_trap - 1 else 0.0
        down = n * a_minus
        g[n, n] = -(up + down)
        if n < n_trap - 1:
            g[n + 1, n] = up
        if n > 0:
            g[n - 1, n] = down
    return g


def rate_equation_evolve(a_plus, a_minus, p0, t_end, record_every=200) -> Trajectory:
    if a_plus < 0 or a_minus < 0:
        raise ValueError("rates must be non-negative")
    p0 = np.asarray(p0, dtype=float)
    if abs(p0.sum() - 1.0) > 1e-10:
        raise ValueError("initial populations must be normalized")
    n_trap = p0.size
    times = np.linspace(0.0, t_end, record_every + 1)
    step = expm(rate_generator(a_plus, a_minus, n_trap) * (t_end / record_every))

    populations = np.empty((record_every + 1, n_trap))
    populations[0] = p0
    for i in range(1, record_every + 1):
        populations[i] = step @ populations[i - 1]
    zeros = np.zeros(record_every + 1)
    traj = Trajectory(
        times=times,
        populations=populations,
        mean_n=populations @ np.arange(n_trap),
        trace_drift=np.abs(populations.sum(axis=1) - 1.0),
        pop_excited=zeros,
        pop_photon=zeros.copy(),
        min_eigenvalue=populations.min(axis=1),
    )
    return traj.check()


def rate_equation_steady_state(a_plus, a_minus, n_trap):
    """Detailed balance: p_{n+1} / p_n = A₊ / A₋ on the truncated ladder."""
    if a_minus == 0:
        p = np.zeros(n_trap)
        p[-1 if a_plus > 0 else 0] = 1.0
        return p
    p = (a_plus / a_minus) ** np.arange(n_trap)
    return p / p.sum()

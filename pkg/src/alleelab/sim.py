"""Adaptive time integration of the model fields.

Raw-field orbits stop at a prey floor (the field is singular at x = 0);
rescaled-field orbits extend to the closed quadrant and are used to study
the extinction corner.  Trial steps of the adaptive integrator may probe
slightly below the floor, so the raw field is evaluated with the prey
density clamped at half the floor; the terminal event fires first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import model
from .errors import DomainError
from .model import Params


@dataclass
class Orbit:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    terminated_at_floor: bool

    def states(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])


def orbit(p: Params, u0, t_span, rescaled: bool = False, x_floor: float | None = None,
          rtol: float = 1e-9, atol_scale: float = 1e-12, max_points: int | None = None,
          t_eval=None) -> Orbit:
    """Integrate one trajectory with RK45.

    Raw-field runs require x0 > 0 and stop when x crosses ``x_floor``
    (default 1e-9 k).  Rescaled runs have no floor.
    """
    x0, y0 = float(u0[0]), float(u0[1])
    if not rescaled:
        if x0 <= 0.0:
            raise DomainError(f"raw-field orbit needs x0 > 0, got {x0}")
        floor = 1e-9 * p.k if x_floor is None else x_floor
        clamp = 0.5 * floor

        def f(t, u):
            x = u[0] if u[0] > clamp else clamp
            f1, f2 = model.rhs_vec(x, u[1], p)
            return (f1, f2)

        def hit_floor(t, u):
            return u[0] - floor

        hit_floor.terminal = True
        hit_floor.direction = -1
        events = [hit_floor]
    else:
        def f(t, u):
            return model.rhs_rescaled_vec(u[0], u[1], p)

        events = None
    atol = atol_scale * max(p.k, p.n * p.k)
    sol = solve_ivp(f, t_span, [x0, y0], rtol=rtol, atol=atol, events=events,
                    dense_output=False, t_eval=t_eval)
    if sol.status == -1:
        raise DomainError(f"integration failed: {sol.message}")
    t, xs, ys = sol.t, sol.y[0], sol.y[1]
    if max_points is not None and len(t) > max_points:
        idx = np.linspace(0, len(t) - 1, max_points).astype(int)
        t, xs, ys = t[idx], xs[idx], ys[idx]
    return Orbit(t=t, x=xs, y=ys, terminated_at_floor=(sol.status == 1))

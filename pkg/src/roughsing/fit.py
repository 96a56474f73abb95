"""Least-squares line fits shared by the decay reports."""
from __future__ import annotations

import numpy as np


def linear_fit(x, y) -> tuple[float, float, float]:
    """Slope, intercept and r**2 of the least-squares line through ``(x, y)``.

    A perfect fit (including constant ``y``) has ``r**2 = 1``.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-30 * max(1.0, float(np.sum(y ** 2))) else max(0.0, 1.0 - ss_res / ss_tot)
    return float(slope), float(intercept), float(min(r2, 1.0))

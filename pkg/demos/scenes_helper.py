"""Build scenes from a target disparity model instead of rig geometry."""

import numpy as np

from roadstereo import SceneSpec


def scene_for(alpha0, alpha1, f=350.0, v_o=120.0, t_c=0.2, beta=1.6, **kw):
    """Scene whose roll-free disparity model is alpha0 + alpha1 * v."""
    tan_theta = (alpha0 + v_o * alpha1) / (f * alpha1)
    theta = float(np.arctan(tan_theta))
    k = alpha1 / np.cos(theta)
    return SceneSpec(
        theta=theta, n_x=float(k * beta / t_c), t_c=t_c, beta=beta, f=f, v_o=v_o, **kw
    )

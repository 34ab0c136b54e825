import numpy as np

from ozd.objectives import Objective


def constant(d, value=3.0):
    return Objective("constant", d, lambda x: np.full(np.shape(x)[:-1], value))


def half_sq(d):
    return Objective("half-sq", d, lambda x: 0.5 * np.sum(x * x, axis=-1), L1=1.0, f_star=0.0,
                     x_star=np.zeros(d), grad=lambda x: np.asarray(x, dtype=float))


def l1(d):
    return Objective("l1", d, lambda x: np.sum(np.abs(x), axis=-1), L0=float(np.sqrt(d)),
                     f_star=0.0, x_star=np.zeros(d))

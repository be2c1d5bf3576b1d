"""Pure-numpy fallback for the polynomial jet kernel."""

import numpy as np


def _powers(z, e):
    # z**e with the convention that negative exponents contribute 0
    safe = np.where(e >= 0, e, 0)
    return np.where(e >= 0, z ** safe, 0.0)


def poly_jet_batch(coeffs, powers, comp, points, val, d1, d2):
    """Same contract as the compiled kernel: accumulate into zeroed buffers."""
    P, m = points.shape
    if len(coeffs) == 0:
        return
    z = points[:, None, :]  # P x 1 x m
    e = powers[None, :, :]  # 1 x T x m
    p0 = _powers(z, e)
    p1 = e * _powers(z, e - 1)
    p2 = e * (e - 1) * _powers(z, e - 2)
    ncomp = val.shape[1]
    onehot = np.zeros((len(coeffs), ncomp))
    onehot[np.arange(len(coeffs)), comp] = 1.0
    cw = coeffs[None, :] * 1.0

    def others(skip):
        mask = np.ones(m, dtype=bool)
        mask[list(skip)] = False
        return np.prod(p0[:, :, mask], axis=2)

    val += (cw * np.prod(p0, axis=2)) @ onehot
    for k in range(m):
        rest_k = others([k])
        d1[:, :, k] += (cw * p1[:, :, k] * rest_k) @ onehot
        for l in range(m):
            if l == k:
                term = cw * p2[:, :, k] * rest_k
            else:
                term = cw * p1[:, :, k] * p1[:, :, l] * others([k, l])
            d2[:, :, k, l] += term @ onehot

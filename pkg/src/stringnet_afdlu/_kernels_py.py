"""Pure-Python reference implementations of the hot kernels."""
import numpy as np


def merge_sorted(keys, amps, prune):
    if len(keys) == 0:
        return keys, amps
    uk, inv = np.unique(keys, return_inverse=True)
    re = np.bincount(inv, weights=amps.real, minlength=len(uk))
    im = np.bincount(inv, weights=amps.imag, minlength=len(uk))
    out = re + 1j * im
    mask = np.abs(out) > prune
    return uk[mask], out[mask]


def ring_fuse(F, fusion_out_s, x, j, s, prune):
    """Slide a loop ``s`` onto a ring of labels.

    ``x[k]`` is the ring label leaving ring vertex k, ``j[k]`` the outward
    leg there.  Returns ``(ys, coeffs)`` with
    ``coeff(y) = prod_k F[j_k, x_k, s, y_{k-1}, x_{k-1}, y_k]``.
    """
    n = len(x)
    ys = []
    cs = []
    y = [0] * n
    choices = [fusion_out_s[x[k]] for k in range(n)]

    def rec(k, acc):
        if k == n:
            c = acc * F[j[0], x[0], s, y[n - 1], x[n - 1], y[0]]
            if abs(c) > prune:
                ys.append(tuple(y))
                cs.append(c)
            return
        for yk in choices[k]:
            y[k] = yk
            if k == 0:
                rec(1, acc)
            else:
                c = acc * F[j[k], x[k], s, y[k - 1], x[k - 1], yk]
                if abs(c) > prune:
                    rec(k + 1, c)

    rec(0, 1.0 + 0j)
    return ys, cs

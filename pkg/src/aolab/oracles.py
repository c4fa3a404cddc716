"""Slow, independent reference computations for small grids.

Nothing here calls the FFT backend or the fast kernels: transforms are dense
DFT matrices, increments are direct trigonometric sums, and the defect
integral uses a uniform lattice over the epsilon-ball instead of spherical
quadrature.  Intended for n <= 16.
"""

import numpy as np

TWO_PI = 2.0 * np.pi


def _k(n):
    k = np.fft.fftfreq(n, 1.0 / n)
    k[n // 2] = 0.0  # the Nyquist mode carries no derivative
    return k


def _x(n):
    return TWO_PI * np.arange(n) / n


def dense_forward(samples):
    """Full-lattice coefficients c(k) = n^-3 sum_x f(x) exp(-i k.x)."""
    n = samples.shape[-1]
    w = np.exp(-1j * np.outer(np.fft.fftfreq(n, 1.0 / n), _x(n))) / n
    c = np.asarray(samples, dtype=complex)
    for ax in (-3, -2, -1):
        c = np.moveaxis(np.tensordot(c, w, axes=([ax], [1])), -1, ax)
    return c


def dense_inverse(coeffs):
    """Real part of sum_k c(k) exp(i k.x) on the grid."""
    n = coeffs.shape[-1]
    w = np.exp(1j * np.outer(_x(n), np.fft.fftfreq(n, 1.0 / n)))
    c = coeffs
    for ax in (-3, -2, -1):
        c = np.moveaxis(np.tensordot(c, w, axes=([ax], [1])), -1, ax)
    return c.real


def _kgrid(n):
    k = _k(n)
    return np.meshgrid(k, k, k, indexing="ij")


def _truncate(c):
    n = c.shape[-1]
    k = np.abs(np.fft.fftfreq(n, 1.0 / n))
    cut = n // 3
    keep = (k[:, None, None] <= cut) & (k[None, :, None] <= cut) & (k[None, None, :] <= cut)
    return c * keep


def _project(c):
    kx, ky, kz = _kgrid(c.shape[-1])
    k2 = kx**2 + ky**2 + kz**2
    k2[k2 == 0] = 1.0
    kdotc = (kx * c[0] + ky * c[1] + kz * c[2]) / k2
    return np.stack([c[0] - kx * kdotc, c[1] - ky * kdotc, c[2] - kz * kdotc])


def _div_tensor(t_hat):
    """(div T)_j = d_i T_ij in coefficient space."""
    ks = _kgrid(t_hat.shape[-1])
    return sum(1j * ks[i] * t_hat[i] for i in range(3))


def _grad(c):
    """g[a, b] = d_a w_b in coefficient space."""
    ks = _kgrid(c.shape[-1])
    return np.stack([1j * ks[a] * c for a in range(3)])


def filter_symbol(n, kind, alpha, theta=1.0):
    kx, ky, kz = _kgrid(n)
    kk = kx**2 + ky**2 + kz**2
    if kind == "identity":
        return np.ones_like(kk)
    if kind == "helmholtz":
        return 1.0 + alpha**2 * kk
    return 1.0 + alpha ** (2 * theta) * kk**theta


def rhs_oracle(kind, v_samples, alpha=0.0, b_samples=None, filter_kind="helmholtz"):
    """Tendency of each model from its textbook form, on the full lattice.

    Products are pointwise on the grid, truncated by the two-thirds rule and
    then projected.  Returns full-lattice coefficients (dv[, db]).
    """
    n = v_samples.shape[-1]
    vh = dense_forward(v_samples)
    if kind == "euler":
        uh = vh
    else:
        uh = vh / filter_symbol(n, filter_kind, alpha)
    u = dense_inverse(uh)
    v = dense_inverse(vh)

    def dv_of(t):
        return dense_forward(t)

    if kind == "euler":
        n_hat = _div_tensor(dv_of(v[:, None] * v[None, :]))
    elif kind == "leray_alpha":
        n_hat = _div_tensor(dv_of(u[:, None] * v[None, :]))
    elif kind == "modified_leray_alpha":
        n_hat = _div_tensor(dv_of(v[:, None] * u[None, :]))
    elif kind == "euler_alpha":
        g = dense_inverse(_grad(uh))  # g[j, i] = d_j u_i
        extra = np.einsum("i...,ji...->j...", v, g)  # sum_i v_i grad u_i
        n_hat = _div_tensor(dv_of(u[:, None] * v[None, :])) + dv_of(extra)
    elif kind == "clark_alpha":
        g = dense_inverse(_grad(uh))
        t = u[:, None] * v[None, :] + v[:, None] * u[None, :] - u[:, None] * u[None, :]
        t = t - alpha**2 * np.einsum("ik...,jk...->ij...", g, g)
        n_hat = _div_tensor(dv_of(t))
    elif kind == "mhd_leray_alpha":
        b = b_samples
        n_v = _div_tensor(dv_of(u[:, None] * v[None, :] - b[:, None] * b[None, :]))
        n_b = _div_tensor(dv_of(u[:, None] * b[None, :] - b[:, None] * v[None, :]))
        return -_project(_truncate(n_v)), -_project(_truncate(n_b))
    else:
        raise ValueError(kind)
    return -_project(_truncate(n_hat))


def pressure_oracle(u_samples, v_samples):
    """Mean-zero p solving Laplacian(p) = -div div (u v), mode by mode."""
    t = u_samples[:, None] * v_samples[None, :]
    ks = _kgrid(u_samples.shape[-1])
    rhs = np.zeros(u_samples.shape[-3:], dtype=complex)
    th = _truncate(dense_forward(t))
    for i in range(3):
        for j in range(3):
            rhs += -(1j * ks[i]) * (1j * ks[j]) * th[i, j]
    k2 = ks[0] ** 2 + ks[1] ** 2 + ks[2] ** 2
    p = np.zeros_like(rhs)
    nz = k2 > 0
    p[nz] = -rhs[nz] / k2[nz]
    return p


# -- defect lattice oracle ------------------------------------------------------


def _bump(s):
    out = np.zeros_like(s)
    m = s < 1
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


def _bump_slope(s):
    out = np.zeros_like(s)
    m = s < 1
    q = 1.0 - s[m] ** 2
    out[m] = np.exp(-1.0 / q) * (-2.0 * s[m] / q**2)
    return out


def _poly(s):
    return np.where(s < 1, (1.0 - np.minimum(s, 1.0) ** 2) ** 4, 0.0)


def _poly_slope(s):
    sc = np.minimum(s, 1.0)
    return np.where(s < 1, -8.0 * sc * (1.0 - sc**2) ** 3, 0.0)


_PROFILES = {"bump": (_bump, _bump_slope), "polynomial": (_poly, _poly_slope)}


def _mass(profile, nodes=400):
    x, w = np.polynomial.legendre.leggauss(nodes)
    s = 0.5 * (x + 1.0)
    return float(np.sum(0.5 * w * 4.0 * np.pi * s**2 * _PROFILES[profile][0](s)))


def grad_mollifier(xi, epsilon, profile="bump"):
    r = np.linalg.norm(xi, axis=-1)
    c = 1.0 / _mass(profile)
    slope = _PROFILES[profile][1](r / epsilon) * c / epsilon**4
    unit = np.where(r[:, None] > 0, xi / np.where(r > 0, r, 1.0)[:, None], 0.0)
    return slope[:, None] * unit


def _shifted(coeffs, xis):
    """Samples of sum_k c(k) exp(i k.(x + xi)) for a batch of xi."""
    n = coeffs.shape[-1]
    kf = np.fft.fftfreq(n, 1.0 / n)
    e = np.exp(1j * np.outer(kf, _x(n)))  # (k, x)
    px = np.exp(1j * xis[:, 0:1] * kf)  # (B, k)
    py = np.exp(1j * xis[:, 1:2] * kf)
    pz = np.exp(1j * xis[:, 2:3] * kf)
    t = (coeffs[None] * px[:, None, :, None, None] * py[:, None, None, :, None]
         * pz[:, None, None, None, :])
    t = t @ e  # z
    t = np.swapaxes(np.swapaxes(t, -1, -2) @ e, -1, -2)  # y
    t = np.moveaxis(np.moveaxis(t, -3, -1) @ e, -1, -3)  # x
    return t.real


_LABELS = {
    "D1": ("P1", "u", "v", "v", 0.5),
    "D2": ("P1", "u", "u", "u", 0.5),
    "D3": ("P1", "u", "g", "g", 1.0),
    "D4": ("P1", "u", "u", "u", 0.5),
    "D5": ("P3",),
    "D6": ("P1", "u", "u", "u", 0.5),
    "D7": ("P3",),
    "D8": ("P1", "u", "g", "g", 1.0),
    "D9": ("P1", "u", "v", "v", 0.5),
    "D10": ("P1", "u", "B", "B", 0.5),
    "D11": ("P1", "B", "B", "v", 1.0),
}


def defect_lattice_oracle(samples, epsilon, lattice=48, profile="bump", labels=None,
                          batch=64):
    """Brute-force D_k at scale epsilon from real samples of u, v and B.

    The xi-integral is a trapezoidal sum over a ``lattice``^3 grid spanning
    the cube [-eps, eps]^3 and the x-integral is a direct grid sum.  Returns
    ``{label: value}``.
    """
    labels = list(_LABELS) if labels is None else labels
    n = samples["u"].shape[-1]
    ch = {r: dense_forward(s) for r, s in samples.items()}
    ch["g"] = _grad(ch["u"]).reshape((9, n, n, n))
    names = [r for r in ("u", "v", "B", "g") if r in ch]
    stack = np.concatenate([ch[r] for r in names])
    offsets, start = {}, 0
    for r in names:
        offsets[r] = slice(start, start + len(ch[r]))
        start += len(ch[r])
    base = dense_inverse(stack)

    h = 2.0 * epsilon / (lattice - 1)
    ax = -epsilon + h * np.arange(lattice)
    wt = np.full(lattice, h)
    wt[[0, -1]] *= 0.5
    gx, gy, gz = np.meshgrid(ax, ax, ax, indexing="ij")
    wx, wy, wz = np.meshgrid(wt, wt, wt, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel(), gz.ravel()], axis=1)
    wts = (wx * wy * wz).ravel()
    inside = np.linalg.norm(pts, axis=1) < epsilon
    pts, wts = pts[inside], wts[inside]
    gphi = grad_mollifier(pts, epsilon, profile) * wts[:, None]

    dx3 = (TWO_PI / n) ** 3
    totals = {lab: 0.0 for lab in labels}
    for b0 in range(0, len(pts), batch):
        xi = pts[b0:b0 + batch]
        inc = _shifted(stack, xi) - base[None]
        f = {r: inc[:, sl] for r, sl in offsets.items()}
        for lab in labels:
            spec = _LABELS[lab]
            if spec[0] == "P1":
                _, a, b, c, pre = spec
                if b == "g":
                    bc = np.einsum("nc...,nc...->n...", f["g"], f["g"])
                else:
                    bc = np.einsum("nc...,nc...->n...", f[b], f[c])
                flux = pre * (f[a] * bc[:, None]).sum(axis=(-3, -2, -1)) * dx3
            else:
                du = f["u"]
                dg = f["g"].reshape((len(xi), 3, 3) + du.shape[-3:])
                gu = np.einsum("nkj...,nj...->nk...", dg, du)
                flux = (dg * gu[:, :, None]).sum(axis=(1, -3, -2, -1)) * dx3
            totals[lab] += float(np.sum(gphi[b0:b0 + batch] * flux))
    return totals


__all__ = [
    "defect_lattice_oracle",
    "dense_forward",
    "dense_inverse",
    "grad_mollifier",
    "pressure_oracle",
    "rhs_oracle",
]

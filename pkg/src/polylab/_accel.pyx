# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops.  Semantics match :mod:`polylab._fallback` exactly."""
import numpy as np
cimport numpy as cnp
from libc.math cimport log, pow, sqrt, fabs

cnp.import_array()


def aberth(const double complex[::1] coeffs, double complex[::1] z0, int maxiter, double tol):
    """Simultaneous Aberth-Ehrlich iteration (Jacobi sweep) in double precision.

    ``coeffs`` are ascending monomial coefficients with nonzero leading entry.
    Returns (roots, iterations).
    """
    cdef Py_ssize_t n = coeffs.shape[0] - 1
    cdef Py_ssize_t i, j, k
    cdef int it
    cdef double complex p, dp, zi, ratio, s, w
    cdef double step, biggest, scale
    z_arr = np.array(z0, dtype=np.complex128, copy=True)
    new_arr = np.empty_like(z_arr)
    cdef double complex[::1] z = z_arr
    cdef double complex[::1] znew = new_arr
    for it in range(1, maxiter + 1):
        biggest = 0.0
        for i in range(n):
            zi = z[i]
            p = coeffs[n]
            dp = 0.0
            for k in range(n - 1, -1, -1):
                dp = dp * zi + p
                p = p * zi + coeffs[k]
            if p == 0:
                znew[i] = zi
                continue
            ratio = p / dp if dp != 0 else 1e-3
            s = 0.0
            for j in range(n):
                if j != i:
                    s = s + 1.0 / (zi - z[j])
            w = ratio / (1.0 - ratio * s)
            znew[i] = zi - w
            scale = sqrt(zi.real * zi.real + zi.imag * zi.imag)
            if scale < 1.0:
                scale = 1.0
            step = sqrt(w.real * w.real + w.imag * w.imag) / scale
            if step > biggest:
                biggest = step
        for i in range(n):
            z[i] = znew[i]
        if biggest <= tol:
            return z_arr, it
    return z_arr, maxiter


def riesz_energy_grad(const double[:, ::1] x, double s):
    """Sum of K_s over ordered pairs i != j, and the gradient of the unordered-pair sum (half that of the ordered sum)."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, a
    cdef double r2, r, e, f, diff
    cdef double energy = 0.0
    grad_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] g = grad_arr
    for i in range(n):
        for j in range(i + 1, n):
            r2 = 0.0
            for a in range(d):
                diff = x[i, a] - x[j, a]
                r2 += diff * diff
            r = sqrt(r2)
            if s == 0.0:
                e = -log(r)
            else:
                e = pow(r, -s) / s
            energy += 2.0 * e
            f = pow(r, -s - 2.0)
            for a in range(d):
                diff = (x[i, a] - x[j, a]) * f
                g[i, a] -= diff
                g[j, a] += diff
    return energy, grad_arr


def coulomb_grad_hess(const double[:, ::1] y, const double[:, ::1] pos,
                      const double[::1] q, double s):
    """Gradient and Hessian of sum_i q_i K_s(y - pos_i) at each row of ``y``."""
    cdef Py_ssize_t m = y.shape[0], n = pos.shape[0], d = y.shape[1]
    cdef Py_ssize_t t, i, a, b
    cdef double r2, f1, f2, diff[16]
    if d > 16:
        raise ValueError("dimension above 16 not supported by the compiled kernel")
    grad_arr = np.zeros((m, d), dtype=np.float64)
    hess_arr = np.zeros((m, d, d), dtype=np.float64)
    cdef double[:, ::1] g = grad_arr
    cdef double[:, :, ::1] h = hess_arr
    for t in range(m):
        for i in range(n):
            r2 = 0.0
            for a in range(d):
                diff[a] = y[t, a] - pos[i, a]
                r2 += diff[a] * diff[a]
            f1 = q[i] * pow(r2, -0.5 * s - 1.0)
            f2 = q[i] * (s + 2.0) * pow(r2, -0.5 * s - 2.0)
            for a in range(d):
                g[t, a] -= diff[a] * f1
                h[t, a, a] -= f1
                for b in range(d):
                    h[t, a, b] += f2 * diff[a] * diff[b]
    return grad_arr, hess_arr

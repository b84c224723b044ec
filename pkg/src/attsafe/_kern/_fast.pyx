# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled integration kernels; mirrors _numpy.py operation for operation."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef inline void _cross(const double* a, const double* b, double* out) noexcept nogil:
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


cdef inline void _matvec(const double* M, const double* v, double* out) noexcept nogil:
    out[0] = M[0] * v[0] + M[1] * v[1] + M[2] * v[2]
    out[1] = M[3] * v[0] + M[4] * v[1] + M[5] * v[2]
    out[2] = M[6] * v[0] + M[7] * v[1] + M[8] * v[2]


cdef void _f(const double* J, const double* Jinv, const double* x,
             const double* u, double* out) noexcept nogil:
    cdef double s2, sw
    cdef double L[3]
    cdef double c[3]
    cdef double t[3]
    cdef int i
    # sigma_dot = 1/4 ((1 - s.s) w + 2 s x w + 2 (s.w) s)
    s2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    sw = x[0] * x[3] + x[1] * x[4] + x[2] * x[5]
    _cross(x, x + 3, c)
    for i in range(3):
        out[i] = 0.25 * ((1.0 - s2) * x[3 + i] + 2.0 * c[i] + 2.0 * sw * x[i])
    # omega_dot = Jinv (u - w x (J w + h))
    _matvec(J, x + 3, L)
    for i in range(3):
        L[i] += x[6 + i]
    _cross(x + 3, L, c)
    for i in range(3):
        t[i] = u[i] - c[i]
    _matvec(Jinv, t, out + 3)
    # h_dot = -u
    for i in range(3):
        out[6 + i] = -u[i]


cdef void _rk4(const double* J, const double* Jinv, const double* x,
               const double* u, double dt, double* out) noexcept nogil:
    cdef double k1[9]
    cdef double k2[9]
    cdef double k3[9]
    cdef double k4[9]
    cdef double tmp[9]
    cdef int i
    _f(J, Jinv, x, u, k1)
    for i in range(9):
        tmp[i] = x[i] + 0.5 * dt * k1[i]
    _f(J, Jinv, tmp, u, k2)
    for i in range(9):
        tmp[i] = x[i] + 0.5 * dt * k2[i]
    _f(J, Jinv, tmp, u, k3)
    for i in range(9):
        tmp[i] = x[i] + dt * k3[i]
    _f(J, Jinv, tmp, u, k4)
    for i in range(9):
        out[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


def step_zoh(J, Jinv, x, u, double dt, int nsub):
    cdef cnp.ndarray[double, ndim=2, mode="c"] Jc = np.ascontiguousarray(J, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Jic = np.ascontiguousarray(Jinv, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] xc = np.array(x, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] uc = np.ascontiguousarray(u, dtype=np.float64)
    cdef double buf[9]
    cdef double* xp = <double*> xc.data
    cdef int j, i
    for j in range(nsub):
        _rk4(<double*> Jc.data, <double*> Jic.data, xp, <double*> uc.data, dt, buf)
        for i in range(9):
            xp[i] = buf[i]
    return xc


def shoot_nodes(J, Jinv, x0, U, double dt_seg, int nsub):
    cdef cnp.ndarray[double, ndim=2, mode="c"] Jc = np.ascontiguousarray(J, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Jic = np.ascontiguousarray(Jinv, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Uc = np.ascontiguousarray(U, dtype=np.float64)
    cdef int n = Uc.shape[0]
    cdef cnp.ndarray[double, ndim=2, mode="c"] X = np.empty((n + 1, 9))
    cdef cnp.ndarray[double, ndim=1, mode="c"] x0c = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double dt = dt_seg / nsub
    cdef double cur[9]
    cdef double nxt[9]
    cdef int k, j, i
    cdef double* Xp = <double*> X.data
    for i in range(9):
        cur[i] = (<double*> x0c.data)[i]
        Xp[i] = cur[i]
    for k in range(n):
        for j in range(nsub):
            _rk4(<double*> Jc.data, <double*> Jic.data, cur, <double*> Uc.data + 3 * k, dt, nxt)
            for i in range(9):
                cur[i] = nxt[i]
        for i in range(9):
            Xp[(k + 1) * 9 + i] = cur[i]
    return X


cdef void _jac_t_vec(const double* J, const double* Jinv, const double* x,
                     const double* v, double* out) noexcept nogil:
    cdef double s2, sw, wv, svv
    cdef double L[3]
    cdef double t[3]
    cdef double c[3]
    cdef double c2[3]
    cdef int i
    s2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2]
    sw = x[0] * x[3] + x[1] * x[4] + x[2] * x[5]
    wv = x[3] * v[0] + x[4] * v[1] + x[5] * v[2]
    svv = x[0] * v[0] + x[1] * v[1] + x[2] * v[2]
    # out_sigma = 1/2 (-(w.vs) s + w x vs + (s.w) vs + (s.vs) w)
    _cross(x + 3, v, c)
    for i in range(3):
        out[i] = 0.5 * (-wv * x[i] + c[i] + sw * v[i] + svv * x[3 + i])
    # out_omega = M' vs = 1/4 ((1-s2) vs - 2 s x vs + 2 (s.vs) s)
    _cross(x, v, c)
    for i in range(3):
        out[3 + i] = 0.25 * ((1.0 - s2) * v[i] - 2.0 * c[i] + 2.0 * svv * x[i])
    # t = Jinv v_w;  out_omega += -L x t + J (w x t);  out_h = w x t
    _matvec(Jinv, v + 3, t)
    _matvec(J, x + 3, L)
    for i in range(3):
        L[i] += x[6 + i]
    _cross(L, t, c)
    _cross(x + 3, t, c2)
    _matvec(J, c2, out + 6)  # reuse out_h slot as scratch for J (w x t)
    for i in range(3):
        out[3 + i] += -c[i] + out[6 + i]
    for i in range(3):
        out[6 + i] = c2[i]


cdef void _step_vjp(const double* J, const double* Jinv, const double* x,
                    const double* u, double dt, const double* xbar,
                    double* xin, double* ub) noexcept nogil:
    cdef double k1[9]
    cdef double k2[9]
    cdef double k3[9]
    cdef double x2[9]
    cdef double x3[9]
    cdef double x4[9]
    cdef double c1[9]
    cdef double c2[9]
    cdef double c3[9]
    cdef double c4[9]
    cdef double g[9]
    cdef double t[3]
    cdef int i
    _f(J, Jinv, x, u, k1)
    for i in range(9):
        x2[i] = x[i] + 0.5 * dt * k1[i]
    _f(J, Jinv, x2, u, k2)
    for i in range(9):
        x3[i] = x[i] + 0.5 * dt * k2[i]
    _f(J, Jinv, x3, u, k3)
    for i in range(9):
        x4[i] = x[i] + dt * k3[i]

    for i in range(9):
        c1[i] = (dt / 6.0) * xbar[i]
        c2[i] = (dt / 3.0) * xbar[i]
        c3[i] = (dt / 3.0) * xbar[i]
        c4[i] = (dt / 6.0) * xbar[i]
        xin[i] = xbar[i]

    # k4 stage
    _jac_t_vec(J, Jinv, x4, c4, g)
    _matvec(Jinv, c4 + 3, t)
    for i in range(3):
        ub[i] += t[i] - c4[6 + i]
    for i in range(9):
        xin[i] += g[i]
        c3[i] += dt * g[i]
    # k3 stage
    _jac_t_vec(J, Jinv, x3, c3, g)
    _matvec(Jinv, c3 + 3, t)
    for i in range(3):
        ub[i] += t[i] - c3[6 + i]
    for i in range(9):
        xin[i] += g[i]
        c2[i] += 0.5 * dt * g[i]
    # k2 stage
    _jac_t_vec(J, Jinv, x2, c2, g)
    _matvec(Jinv, c2 + 3, t)
    for i in range(3):
        ub[i] += t[i] - c2[6 + i]
    for i in range(9):
        xin[i] += g[i]
        c1[i] += 0.5 * dt * g[i]
    # k1 stage
    _jac_t_vec(J, Jinv, x, c1, g)
    _matvec(Jinv, c1 + 3, t)
    for i in range(3):
        ub[i] += t[i] - c1[6 + i]
    for i in range(9):
        xin[i] += g[i]


def shoot_vjp(J, Jinv, x0, U, double dt_seg, int nsub, xbar_nodes):
    cdef cnp.ndarray[double, ndim=2, mode="c"] Jc = np.ascontiguousarray(J, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Jic = np.ascontiguousarray(Jinv, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Uc = np.ascontiguousarray(U, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=2, mode="c"] Xb = np.ascontiguousarray(xbar_nodes, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1, mode="c"] x0c = np.ascontiguousarray(x0, dtype=np.float64)
    cdef int n = Uc.shape[0]
    cdef double dt = dt_seg / nsub
    cdef cnp.ndarray[double, ndim=3, mode="c"] sub = np.empty((n, nsub, 9))
    cdef cnp.ndarray[double, ndim=2, mode="c"] Ubar = np.zeros((n, 3))
    cdef double cur[9]
    cdef double nxt[9]
    cdef double xbar[9]
    cdef double xin[9]
    cdef int k, j, i
    cdef double* subp = <double*> sub.data
    cdef double* Up = <double*> Uc.data
    cdef double* Xbp = <double*> Xb.data
    cdef double* Ubp = <double*> Ubar.data

    for i in range(9):
        cur[i] = (<double*> x0c.data)[i]
    for k in range(n):
        for j in range(nsub):
            for i in range(9):
                subp[(k * nsub + j) * 9 + i] = cur[i]
            _rk4(<double*> Jc.data, <double*> Jic.data, cur, Up + 3 * k, dt, nxt)
            for i in range(9):
                cur[i] = nxt[i]

    for i in range(9):
        xbar[i] = Xbp[n * 9 + i]
    for k in range(n - 1, -1, -1):
        for j in range(nsub - 1, -1, -1):
            _step_vjp(<double*> Jc.data, <double*> Jic.data,
                      subp + (k * nsub + j) * 9, Up + 3 * k, dt, xbar, xin, Ubp + 3 * k)
            for i in range(9):
                xbar[i] = xin[i]
        for i in range(9):
            xbar[i] += Xbp[k * 9 + i]
    return Ubar

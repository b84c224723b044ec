"""NumPy reference implementation of the integration kernels.

State layout: x = [sigma(3), omega(3), h_w(3)].  Dynamics:
    sigma_dot = M(sigma) omega
    omega_dot = Jinv (-omega x (J omega + h_w) + u)
    h_w_dot   = -u
The compiled backend mirrors this operation order exactly.
"""

import numpy as np

BACKEND = "numpy"


def _f(J, Jinv, x, u, out):
    s = x[0:3]
    w = x[3:6]
    hw = x[6:9]
    s2 = s @ s
    # M(sigma) @ omega without forming M
    out[0:3] = 0.25 * ((1.0 - s2) * w + 2.0 * np.cross(s, w) + 2.0 * (s @ w) * s)
    L = J @ w + hw
    out[3:6] = Jinv @ (u - np.cross(w, L))
    out[6:9] = -u


def _rk4(J, Jinv, x, u, dt):
    k1 = np.empty(9)
    k2 = np.empty(9)
    k3 = np.empty(9)
    k4 = np.empty(9)
    _f(J, Jinv, x, u, k1)
    _f(J, Jinv, x + (0.5 * dt) * k1, u, k2)
    _f(J, Jinv, x + (0.5 * dt) * k2, u, k3)
    _f(J, Jinv, x + dt * k3, u, k4)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_zoh(J, Jinv, x, u, dt, nsub):
    """Hold u constant and take nsub RK4 substeps of size dt."""
    x = np.array(x, dtype=float)
    u = np.asarray(u, dtype=float)
    for _ in range(nsub):
        x = _rk4(J, Jinv, x, u, dt)
    return x


def shoot_nodes(J, Jinv, x0, U, dt_seg, nsub):
    """Propagate N ZOH segments; returns the (N+1) x 9 node states."""
    U = np.asarray(U, dtype=float)
    n = U.shape[0]
    X = np.empty((n + 1, 9))
    X[0] = x0
    dt = dt_seg / nsub
    for k in range(n):
        X[k + 1] = step_zoh(J, Jinv, X[k], U[k], dt, nsub)
    return X


def _jac_t_vec(J, Jinv, x, v, out):
    """out = A(x)' v where A = df/dx (u-independent part)."""
    s = x[0:3]
    w = x[3:6]
    hw = x[6:9]
    vs = v[0:3]
    vw = v[3:6]
    s2 = s @ s
    sw = s @ w
    # A11 = d(M w)/ds = 1/4 (-2 w s' - 2 [w]x + 2 (s'w) I + 2 s w')
    # A11' vs = 1/4 (-2 s (w.vs) + 2 w x vs + 2 sw vs + 2 w (s.vs))
    out[0:3] = 0.5 * (-(w @ vs) * s + np.cross(w, vs) + sw * vs + (s @ vs) * w)
    # A12 = M(sigma); M' vs
    out[3:6] = 0.25 * ((1.0 - s2) * vs - 2.0 * np.cross(s, vs) + 2.0 * (s @ vs) * s)
    # A22 = Jinv ([L]x - [w]x J), L = J w + h_w
    L = J @ w + hw
    t = Jinv @ vw  # Jinv symmetric
    out[3:6] += -np.cross(L, t) + J @ np.cross(w, t)
    # A23 = -Jinv [w]x  ->  A23' vw = [w]x Jinv vw
    out[6:9] = np.cross(w, t)


def _step_vjp(J, Jinv, x, u, dt, xbar):
    """Adjoint of one RK4 step: returns (xbar_in, ubar)."""
    k1 = np.empty(9)
    k2 = np.empty(9)
    k3 = np.empty(9)
    _f(J, Jinv, x, u, k1)
    x2 = x + (0.5 * dt) * k1
    _f(J, Jinv, x2, u, k2)
    x3 = x + (0.5 * dt) * k2
    _f(J, Jinv, x3, u, k3)
    x4 = x + dt * k3

    c1 = (dt / 6.0) * xbar
    c2 = (dt / 3.0) * xbar
    c3 = (dt / 3.0) * xbar
    c4 = (dt / 6.0) * xbar
    xin = xbar.copy()
    g = np.empty(9)
    ub = np.zeros(3)

    def bu(c):
        # B' c with B = [0; Jinv; -I]
        return Jinv @ c[3:6] - c[6:9]

    _jac_t_vec(J, Jinv, x4, c4, g)
    ub += bu(c4)
    xin += g
    c3 = c3 + dt * g

    _jac_t_vec(J, Jinv, x3, c3, g)
    ub += bu(c3)
    xin += g
    c2 = c2 + (0.5 * dt) * g

    _jac_t_vec(J, Jinv, x2, c2, g)
    ub += bu(c2)
    xin += g
    c1 = c1 + (0.5 * dt) * g

    _jac_t_vec(J, Jinv, x, c1, g)
    ub += bu(c1)
    xin += g
    return xin, ub


def shoot_vjp(J, Jinv, x0, U, dt_seg, nsub, xbar_nodes):
    """Gradient of sum_k <xbar_nodes[k], X[k]> with respect to U.

    Recomputes the forward substep states, then runs the RK4 adjoint
    backwards through every segment.
    """
    U = np.asarray(U, dtype=float)
    xbar_nodes = np.asarray(xbar_nodes, dtype=float)
    n = U.shape[0]
    dt = dt_seg / nsub

    # forward pass: store every substep entry state
    sub = np.empty((n, nsub, 9))
    x = np.array(x0, dtype=float)
    for k in range(n):
        for j in range(nsub):
            sub[k, j] = x
            x = _rk4(J, Jinv, x, U[k], dt)

    Ubar = np.zeros((n, 3))
    xbar = xbar_nodes[n].copy()
    for k in range(n - 1, -1, -1):
        for j in range(nsub - 1, -1, -1):
            xbar, ub = _step_vjp(J, Jinv, sub[k, j], U[k], dt, xbar)
            Ubar[k] += ub
        xbar += xbar_nodes[k]
    return Ubar

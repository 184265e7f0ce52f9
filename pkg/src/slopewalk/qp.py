"""Dense primal active-set QP for the small contact-force problems.

Solves ``min 0.5 x'Hx + g'x  s.t.  G x <= h`` from a feasible start, with
``H`` positive definite. Problems here have at most 8 variables and 28
inequalities, so everything is done with dense KKT solves.
"""

from __future__ import annotations

import itertools

import numpy as np


class QPError(RuntimeError):
    pass


def _independent(rows: np.ndarray, new: np.ndarray) -> bool:
    if rows.shape[0] == 0:
        return np.linalg.norm(new) > 0
    m = np.vstack([rows, new])
    return np.linalg.matrix_rank(m, tol=1e-10 * max(1.0, np.abs(m).max())) == m.shape[0]


def active_set_qp(H, g, G, h, x0, max_iter: int = 500, tol: float = 1e-10):
    """Return (x, active) where ``active`` is the final working set."""
    H = np.asarray(H, float)
    g = np.asarray(g, float)
    G = np.asarray(G, float)
    h = np.asarray(h, float)
    n = H.shape[0]
    x = np.array(x0, dtype=float)
    scale = 1.0 + np.abs(h)
    row_norm = np.linalg.norm(G, axis=1)

    viol = G @ x - h
    if np.any(viol > 1e-7 * scale):
        raise QPError("starting point is infeasible")

    W: list[int] = []
    for i in np.argsort(-viol):
        if viol[i] >= -tol * scale[i] and len(W) < n and _independent(G[W], G[i]):
            W.append(int(i))

    converged = False
    for _ in range(max_iter):
        grad = H @ x + g
        m = len(W)
        if m:
            Gw = G[W]
            K = np.block([[H, Gw.T], [Gw, np.zeros((m, m))]])
            rhs = np.concatenate([-grad, np.zeros(m)])
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            p, nu = sol[:n], sol[n:]
        else:
            p = np.linalg.solve(H, -grad)
            nu = np.zeros(0)

        # after an unblocked full step x already minimizes on the working set;
        # with a nearly singular H the recomputed step is only rounding noise
        if converged or np.linalg.norm(p) <= tol * (1.0 + np.linalg.norm(x)):
            converged = False
            if m == 0 or nu.min() >= -1e-9 * (1.0 + np.abs(nu).max()):
                return x, W
            W.pop(int(np.argmin(nu)))
            continue

        Gp = G @ p
        pnorm = np.linalg.norm(p)
        alpha, block = 1.0, -1
        for i in range(G.shape[0]):
            # rows spanned by the working set see p only through rounding
            if i in W or Gp[i] <= 1e-11 * row_norm[i] * pnorm:
                continue
            a = (h[i] - G[i] @ x) / Gp[i]
            if a < alpha:
                alpha, block = max(a, 0.0), i
        x = x + alpha * p
        converged = block < 0
        # G[block] @ p > 0 with p in null(G[W]) already implies independence
        if block >= 0 and _independent(G[W], G[block]):
            W.append(block)
    raise QPError("active-set iteration limit reached")


def polygon_vertices(G2: np.ndarray, h2: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vertices of the 2-D polyhedron ``G2 x <= h2`` by pairwise line intersection."""
    verts = []
    scale = 1.0 + np.abs(h2)
    for i, j in itertools.combinations(range(G2.shape[0]), 2):
        M = G2[[i, j]]
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) < 1e-12 * (1.0 + np.abs(M).max() ** 2):
            continue
        v = np.linalg.solve(M, h2[[i, j]])
        if np.all(G2 @ v - h2 <= tol * scale):
            verts.append(v)
    return np.array(verts).reshape(-1, 2)

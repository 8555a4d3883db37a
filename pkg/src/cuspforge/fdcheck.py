"""Finite-difference curvature oracles.

These routines see only a metric-tensor callback, never the closed-form
curvature, so they serve as independent checks of :mod:`cuspforge.curvature`.
Central differences with step ``h`` are combined with one level of
Richardson extrapolation, ``(4 K(h/2) - K(h)) / 3``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

FD_STEP = 1e-4

MetricFn = Callable[[np.ndarray], np.ndarray]


def _christoffel(metric: MetricFn, p: np.ndarray, h: float) -> np.ndarray:
    """``Gamma[k, i, j]`` from central differences of the metric."""
    d = p.size
    g = metric(p)
    ginv = np.linalg.inv(g)
    dg = np.empty((d, d, d))  # dg[l, i, j] = d_l g_ij
    for l in range(d):
        e = np.zeros(d)
        e[l] = h
        dg[l] = (metric(p + e) - metric(p - e)) / (2 * h)
    # Gamma_{l,ij} (first kind) = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    first = 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)
    return np.einsum("kl,lij->kij", ginv, first)


def _riemann_lower(metric: MetricFn, p: np.ndarray, h: float) -> np.ndarray:
    """Curvature tensor with its upper index lowered.

    ``R[a, b, i, j] = g_ak R^k_{b i j}``; the sectional curvature of the
    plane (e_i, e_j) is ``R[i, j, i, j] / (g_ii g_jj - g_ij^2)``.
    """
    d = p.size
    G = _christoffel(metric, p, h)
    dG = np.empty((d, d, d, d))  # dG[m, k, i, j] = d_m Gamma^k_ij
    for m in range(d):
        e = np.zeros(d)
        e[m] = h
        dG[m] = (_christoffel(metric, p + e, h) - _christoffel(metric, p - e, h)) / (2 * h)
    # R^k_{l i j} = d_i Gamma^k_jl - d_j Gamma^k_il + Gamma^k_im Gamma^m_jl - Gamma^k_jm Gamma^m_il
    Rup = (
        np.einsum("ikjl->klij", dG)
        - np.einsum("jkil->klij", dG)
        + np.einsum("kim,mjl->klij", G, G)
        - np.einsum("kjm,mil->klij", G, G)
    )
    g = metric(p)
    return np.einsum("ak,klij->alij", g, Rup)


def _sectional_once(metric: MetricFn, p: np.ndarray, i: int, j: int, h: float) -> float:
    R = _riemann_lower(metric, p, h)
    g = metric(p)
    # K(e_i, e_j) = <R(e_i, e_j) e_j, e_i> / |e_i ^ e_j|^2
    num = R[i, j, i, j]
    den = g[i, i] * g[j, j] - g[i, j] ** 2
    return float(num / den)


def fd_sectional_curvature(
    metric: MetricFn, p, i: int, j: int, h: float = FD_STEP, richardson: bool = True
) -> float:
    """Sectional curvature of the coordinate plane ``(e_i, e_j)`` at ``p``."""
    p = np.asarray(p, dtype=float)
    k1 = _sectional_once(metric, p, i, j, h)
    if not richardson:
        return k1
    k2 = _sectional_once(metric, p, i, j, h / 2)
    return (4 * k2 - k1) / 3


def _brioschi_once(efg: Callable[[float, float], tuple[float, float, float]], u: float, v: float, h: float) -> float:
    def at(du, dv):
        return np.array(efg(u + du, v + dv))

    c = at(0, 0)
    pu, mu = at(h, 0), at(-h, 0)
    pv, mv = at(0, h), at(0, -h)
    d_u = (pu - mu) / (2 * h)
    d_v = (pv - mv) / (2 * h)
    d_uu = (pu - 2 * c + mu) / (h * h)
    d_vv = (pv - 2 * c + mv) / (h * h)
    d_uv = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h)
    E, F, G = c
    Eu, Fu, Gu = d_u
    Ev, Fv, Gv = d_v
    Evv = d_vv[0]
    Fuv = d_uv[1]
    Guu = d_uu[2]
    M1 = np.array(
        [
            [-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev],
            [Fv - 0.5 * Gu, E, F],
            [0.5 * Gv, F, G],
        ]
    )
    M2 = np.array([[0.0, 0.5 * Ev, 0.5 * Gu], [0.5 * Ev, E, F], [0.5 * Gu, F, G]])
    return float((np.linalg.det(M1) - np.linalg.det(M2)) / (E * G - F * F) ** 2)


def brioschi_curvature(
    efg: Callable[[float, float], tuple[float, float, float]],
    u: float,
    v: float,
    h: float = FD_STEP,
    richardson: bool = True,
) -> float:
    """Gaussian curvature from the first fundamental form alone (Brioschi formula)."""
    k1 = _brioschi_once(efg, u, v, h)
    if not richardson:
        return k1
    k2 = _brioschi_once(efg, u, v, h / 2)
    return (4 * k2 - k1) / 3

"""Quadratic-triangle elasticity assembly.

Isoparametric 6-node triangles, 7-point Gauss rule (degree 5, exact for the
products of quadratic-element gradients on affine elements), plane-strain
stiffness from the bilinear form

    a(u, w) = int lam (div u)(div w) + 2 mu e(u):e(w).

Assembly is numpy-vectorized over elements and deterministic: the COO
triplets are emitted in a fixed element order, so repeated runs produce
identical matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh, REGIONS


class AssemblyError(ValueError):
    pass


# 7-point rule on the reference triangle {xi>=0, eta>=0, xi+eta<=1}, degree 5
_A1 = 0.0597158717897698
_B1 = 0.4701420641051151
_A2 = 0.7974269853530873
_B2 = 0.1012865073234563
QP = np.array(
    [
        [1 / 3, 1 / 3],
        [_A1, _B1],
        [_B1, _A1],
        [_B1, _B1],
        [_A2, _B2],
        [_B2, _A2],
        [_B2, _B2],
    ]
)
QW = np.array(
    [
        0.225,
        0.1323941527885062,
        0.1323941527885062,
        0.1323941527885062,
        0.1259391805448271,
        0.1259391805448271,
        0.1259391805448271,
    ]
) * 0.5  # reference triangle area factor


def shape_functions(xi: float, eta: float) -> np.ndarray:
    l0 = 1 - xi - eta
    return np.array(
        [
            l0 * (2 * l0 - 1),
            xi * (2 * xi - 1),
            eta * (2 * eta - 1),
            4 * l0 * xi,
            4 * xi * eta,
            4 * eta * l0,
        ]
    )


def shape_gradients(xi: float, eta: float) -> np.ndarray:
    """d N_a / d(xi, eta), shape (6, 2)."""
    l0 = 1 - xi - eta
    return np.array(
        [
            [1 - 4 * l0, 1 - 4 * l0],
            [4 * xi - 1, 0.0],
            [0.0, 4 * eta - 1],
            [4 * (l0 - xi), -4 * xi],
            [4 * eta, 4 * xi],
            [-4 * eta, 4 * (l0 - eta)],
        ]
    )


def check_ellipticity(lam: float, mu: float) -> None:
    if not (mu > 0 and lam + 2 * mu > 0 and lam + mu >= 0):
        raise AssemblyError(
            f"non-elliptic parameters lam={lam}, mu={mu}: need mu>0, "
            "lam+2mu>0 and lam+mu>=0"
        )


@dataclass
class ElasticitySystem:
    """Assembled stiffness with its mesh and material table."""

    mesh: Mesh
    K: sp.csr_matrix
    lam: float
    mu: float
    materials: dict[str, tuple[float, float]]

    @property
    def n_dofs(self) -> int:
        return 2 * self.mesh.n_nodes

    def energy(self, u: np.ndarray) -> float:
        return 0.5 * float(u @ (self.K @ u))


def assemble(
    mesh: Mesh,
    lam: float,
    mu: float,
    materials: dict[str, tuple[float, float]] | None = None,
) -> ElasticitySystem:
    """Assemble the global stiffness matrix.

    `materials` optionally overrides (lam, mu) per region name, used by the
    large-contrast cross-check for the inclusion interiors.
    """
    check_ellipticity(lam, mu)
    materials = materials or {}
    for name, (la, m) in materials.items():
        if name not in REGIONS:
            raise AssemblyError(f"unknown region {name!r}")
        check_ellipticity(la, m)

    lam_e = np.full(mesh.n_elements, float(lam))
    mu_e = np.full(mesh.n_elements, float(mu))
    for name, (la, m) in materials.items():
        sel = mesh.region == REGIONS.index(name)
        lam_e[sel] = la
        mu_e[sel] = m

    coords = mesh.nodes[mesh.tris]  # (nE, 6, 2)
    n_el = mesh.n_elements
    ke = np.zeros((n_el, 12, 12))
    for (xi, eta), w in zip(QP, QW):
        dn = shape_gradients(xi, eta)  # (6, 2)
        jac = np.einsum("eai,aj->eij", coords, dn)  # (nE, 2, 2)
        det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
        if np.any(det <= 0):
            raise AssemblyError("non-positive Jacobian in assembly")
        inv = np.empty_like(jac)
        inv[:, 0, 0] = jac[:, 1, 1]
        inv[:, 1, 1] = jac[:, 0, 0]
        inv[:, 0, 1] = -jac[:, 0, 1]
        inv[:, 1, 0] = -jac[:, 1, 0]
        inv /= det[:, None, None]
        g = np.einsum("aj,eji->eai", dn, inv)  # (nE, 6, 2): dN_a/dx_i
        gg = np.einsum("eai,ebi->eab", g, g)  # grad(N_a) . grad(N_b)
        wdet = w * det
        # K[2a+i, 2b+j] += wdet (lam g_a,i g_b,j + mu (g_a,j g_b,i + delta_ij gg_ab))
        blk = (
            lam_e[:, None, None, None, None] * np.einsum("eai,ebj->eaibj", g, g)
            + mu_e[:, None, None, None, None] * np.einsum("eaj,ebi->eaibj", g, g)
        )
        blk += (
            mu_e[:, None, None, None, None]
            * gg[:, :, None, :, None]
            * np.eye(2)[None, None, :, None, :]
        )
        ke += wdet[:, None, None] * blk.reshape(n_el, 12, 12)

    dofs = np.empty((n_el, 12), dtype=np.int64)
    dofs[:, 0::2] = 2 * mesh.tris
    dofs[:, 1::2] = 2 * mesh.tris + 1
    rows = np.repeat(dofs, 12, axis=1).ravel()
    cols = np.tile(dofs, (1, 12)).ravel()
    n = 2 * mesh.n_nodes
    K = sp.coo_matrix((ke.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return ElasticitySystem(mesh=mesh, K=K, lam=lam, mu=mu, materials=dict(materials))

"""Shared fixtures and independent oracles for the test suite.

Oracles here are deliberately written from scratch (plain loops, BFS, dense
linear algebra) so they share no code path with the package implementations
they check.
"""

from collections import deque

import numpy as np
import pytest

from kaclab import DisorderConfig, DisorderRealization, build_realization


def brute_force_mask(config, centers):
    """Node-by-node distance check, the slow reference for the vacancy mask."""
    L = config.box_side
    h = config.grid_spacing
    coords = [-L / 2.0 + h * (i + 1) for i in range(config.n_cells - 1)]
    dims = config.grid_dims
    mask = np.zeros(dims, dtype=bool)
    for idx in np.ndindex(dims):
        x = np.array([coords[i] for i in idx])
        vacant = True
        for c in np.atleast_2d(centers):
            if len(c) and np.sqrt(np.sum((x - c) ** 2)) <= config.r:
                vacant = False
                break
        mask[idx] = vacant
    return mask


def flood_fill_components(mask):
    """Independent BFS labeling over face-adjacent vacant nodes."""
    dims = mask.shape
    labels = np.zeros(dims, dtype=int)
    K = 0
    for start in np.ndindex(dims):
        if not mask[start] or labels[start]:
            continue
        K += 1
        queue = deque([start])
        labels[start] = K
        while queue:
            node = queue.popleft()
            for ax in range(len(dims)):
                for step in (-1, 1):
                    nb = list(node)
                    nb[ax] += step
                    if 0 <= nb[ax] < dims[ax]:
                        nb = tuple(nb)
                        if mask[nb] and not labels[nb]:
                            labels[nb] = K
                            queue.append(nb)
    return labels, K


def dense_laplacian(mask, h):
    """Dense stencil assembly by explicit loops, the eigenvalue oracle."""
    dims = mask.shape
    d = mask.ndim
    nodes = [idx for idx in np.ndindex(dims) if mask[idx]]
    index = {idx: i for i, idx in enumerate(nodes)}
    n = len(nodes)
    A = np.zeros((n, n))
    for idx, i in index.items():
        A[i, i] = 2.0 * d / h**2
        for ax in range(d):
            for step in (-1, 1):
                nb = list(idx)
                nb[ax] += step
                nb = tuple(nb)
                if all(0 <= nb[k] < dims[k] for k in range(d)) and mask[nb]:
                    A[i, index[nb]] = -1.0 / h**2
    return A, nodes


def box_eigenvalue(modes, h, L):
    """Closed-form eigenvalue of the discrete Dirichlet box, (4/h^2) sum sin^2."""
    return (4.0 / h**2) * sum(np.sin(np.pi * p * h / (2.0 * L)) ** 2 for p in modes)


def tiny_box_config(N=2, L=2.0, h=0.5, d=2, seed=0, nu=0.0, r=0.7):
    """Config whose box side is exactly L (rho adjusts to N)."""
    rho = N / L**d
    return DisorderConfig(d=d, rho=rho, N=N, nu=nu, r=r, h=h, seed=seed)


@pytest.fixture
def free_3x3():
    """Obstacle-free 3x3-node fixture (L=2, h=0.5), the smallest workhorse."""
    return build_realization(tiny_box_config(N=2), centers=np.zeros((0, 2)))


@pytest.fixture
def corner_blocked_6():
    """Six-site fixture: one center at a box corner node blocks 3 nodes."""
    config = tiny_box_config(N=2)
    # center on the node at (-0.5, -0.5): blocks it and its two face neighbors
    centers = np.array([[-0.5, -0.5]])
    real = build_realization(config, centers=centers)
    assert real.n_vacant == 6 and real.K == 1
    return real


@pytest.fixture
def two_strip_5():
    """Two-component fixture: a 2-node strip and a 3-node strip (M=5)."""
    config = tiny_box_config(N=2)
    mask = np.array(
        [
            [False, True, True],
            [False, False, False],
            [True, True, True],
        ]
    )
    real = DisorderRealization.from_mask(config, mask)
    assert real.K == 2
    return real

"""Hot loops: exact incremental grid traversal for ray casting and map carving.

Both kernels walk cells with the same Amanatides-Woo DDA (identical statement
order, strict IEEE, no fastmath), so a noise-free range measured by
``cast_rays`` reproduces bit-identical boundary-crossing distances inside
``carve_beams``. Ties (crossing a cell corner) step x before y in both.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from .core import L_MAX, L_MIN

# Absolute slack (meters) when matching a measured range against a
# boundary-crossing distance; >> float64 ulp at any plausible range.
HIT_EPS = 1e-9


@njit(cache=True)
def _cast_one(occ, ox, oy, dirx, diry, max_range, res, gx0, gy0):  # pragma: no cover - thin jit wrapper
    h, w = occ.shape
    col = int(math.floor((ox - gx0) / res))
    row = int(math.floor((oy - gy0) / res))
    if col < 0 or col >= w or row < 0 or row >= h:
        return np.nan
    if occ[row, col]:
        return 0.0

    if dirx > 0.0:
        step_x = 1
        t_max_x = (gx0 + (col + 1) * res - ox) / dirx
        t_delta_x = res / dirx
    elif dirx < 0.0:
        step_x = -1
        t_max_x = (gx0 + col * res - ox) / dirx
        t_delta_x = -res / dirx
    else:
        step_x = 0
        t_max_x = math.inf
        t_delta_x = math.inf

    if diry > 0.0:
        step_y = 1
        t_max_y = (gy0 + (row + 1) * res - oy) / diry
        t_delta_y = res / diry
    elif diry < 0.0:
        step_y = -1
        t_max_y = (gy0 + row * res - oy) / diry
        t_delta_y = -res / diry
    else:
        step_y = 0
        t_max_y = math.inf
        t_delta_y = math.inf

    while True:
        if t_max_x < t_max_y:
            t = t_max_x
            col += step_x
            t_max_x += t_delta_x
        else:
            t = t_max_y
            row += step_y
            t_max_y += t_delta_y
        if t > max_range:
            return np.nan
        if col < 0 or col >= w or row < 0 or row >= h:
            return np.nan
        if occ[row, col]:
            return t


@njit(cache=True)
def cast_rays(occ, ox, oy, dirx, diry, max_range, res, gx0, gy0, out):  # pragma: no cover
    """Hit distance per ray (NaN = no hit) against a uint8 occupancy mask."""
    for i in range(dirx.shape[0]):
        out[i] = _cast_one(occ, ox, oy, dirx[i], diry[i], max_range, res, gx0, gy0)


@njit(cache=True)
def carve_beams(cells, ox, oy, dirx, diry, ranges, max_range, l_occ, l_free, res, gx0, gy0):  # pragma: no cover
    """Apply the inverse sensor model for one frame, in beam order.

    Beams with a finite range add l_free to every traversed cell and l_occ to
    the cell containing the endpoint; NaN ranges carve l_free out to
    max_range. The sensor's own cell is never updated. Every update clamps to
    [L_MIN, L_MAX] immediately, so in-frame ordering is the contract.
    """
    h, w = cells.shape
    for i in range(dirx.shape[0]):
        dx = dirx[i]
        dy = diry[i]
        r = ranges[i]
        has_return = not math.isnan(r)

        col = int(math.floor((ox - gx0) / res))
        row = int(math.floor((oy - gy0) / res))
        if col < 0 or col >= w or row < 0 or row >= h:
            continue

        if dx > 0.0:
            step_x = 1
            t_max_x = (gx0 + (col + 1) * res - ox) / dx
            t_delta_x = res / dx
        elif dx < 0.0:
            step_x = -1
            t_max_x = (gx0 + col * res - ox) / dx
            t_delta_x = -res / dx
        else:
            step_x = 0
            t_max_x = math.inf
            t_delta_x = math.inf

        if dy > 0.0:
            step_y = 1
            t_max_y = (gy0 + (row + 1) * res - oy) / dy
            t_delta_y = res / dy
        elif dy < 0.0:
            step_y = -1
            t_max_y = (gy0 + row * res - oy) / dy
            t_delta_y = -res / dy
        else:
            step_y = 0
            t_max_y = math.inf
            t_delta_y = math.inf

        while True:
            if t_max_x < t_max_y:
                t = t_max_x
                col += step_x
                t_max_x += t_delta_x
            else:
                t = t_max_y
                row += step_y
                t_max_y += t_delta_y
            if col < 0 or col >= w or row < 0 or row >= h:
                break
            if has_return:
                if r < t - HIT_EPS:
                    # endpoint fell inside the sensor's own cell: no update
                    break
                t_next = t_max_x if t_max_x < t_max_y else t_max_y
                if r < t_next - HIT_EPS:
                    v = cells[row, col] + l_occ
                    if v > L_MAX:
                        v = L_MAX
                    elif v < L_MIN:
                        v = L_MIN
                    cells[row, col] = v
                    break
                v = cells[row, col] + l_free
            else:
                if t > max_range:
                    break
                v = cells[row, col] + l_free
            if v > L_MAX:
                v = L_MAX
            elif v < L_MIN:
                v = L_MIN
            cells[row, col] = v

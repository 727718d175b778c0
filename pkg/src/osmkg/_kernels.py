"""Distance kernels for the query engine.

The haversine loops are numba-jitted by default. Set OSMKG_DISABLE_NUMBA=1
to select the pure-numpy path (same formula, vectorized); both paths stay
importable as ``*_numpy`` / ``*_numba`` for the benchmark and tests.
"""

from __future__ import annotations

import math
import os

import numpy as np

EARTH_RADIUS_M = 6_371_000.0

_DISABLED = os.environ.get("OSMKG_DISABLE_NUMBA", "") not in ("", "0")


def haversine_numpy(lon0: float, lat0: float,
                    lons: np.ndarray, lats: np.ndarray) -> np.ndarray:
    phi0 = math.radians(lat0)
    lam0 = math.radians(lon0)
    phi = np.radians(lats)
    dlam = np.radians(lons) - lam0
    a = (np.sin((phi - phi0) * 0.5) ** 2
         + math.cos(phi0) * np.cos(phi) * np.sin(dlam * 0.5) ** 2)
    np.clip(a, 0.0, 1.0, out=a)
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(a))


def within_numpy(lon0: float, lat0: float, lons: np.ndarray, lats: np.ndarray,
                 radius_m: float) -> np.ndarray:
    return haversine_numpy(lon0, lat0, lons, lats) <= radius_m


haversine_numba = None
within_numba = None

if not _DISABLED:
    try:
        from numba import njit
    except ImportError:
        pass
    else:
        @njit(cache=True)
        def _haversine_jit(lon0, lat0, lons, lats):  # pragma: no cover - jitted
            n = lons.shape[0]
            out = np.empty(n, dtype=np.float64)
            phi0 = math.radians(lat0)
            lam0 = math.radians(lon0)
            cos0 = math.cos(phi0)
            for i in range(n):
                phi = math.radians(lats[i])
                dlam = math.radians(lons[i]) - lam0
                a = (math.sin((phi - phi0) * 0.5) ** 2
                     + cos0 * math.cos(phi) * math.sin(dlam * 0.5) ** 2)
                if a > 1.0:
                    a = 1.0
                elif a < 0.0:
                    a = 0.0
                out[i] = 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(a))
            return out

        @njit(cache=True)
        def _within_jit(lon0, lat0, lons, lats, radius_m):  # pragma: no cover - jitted
            n = lons.shape[0]
            out = np.empty(n, dtype=np.bool_)
            phi0 = math.radians(lat0)
            lam0 = math.radians(lon0)
            cos0 = math.cos(phi0)
            for i in range(n):
                phi = math.radians(lats[i])
                dlam = math.radians(lons[i]) - lam0
                a = (math.sin((phi - phi0) * 0.5) ** 2
                     + cos0 * math.cos(phi) * math.sin(dlam * 0.5) ** 2)
                if a > 1.0:
                    a = 1.0
                elif a < 0.0:
                    a = 0.0
                out[i] = 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(a)) <= radius_m
            return out

        haversine_numba = _haversine_jit
        within_numba = _within_jit

NUMBA_ENABLED = haversine_numba is not None

haversine_arrays = haversine_numba if NUMBA_ENABLED else haversine_numpy
within_arrays = within_numba if NUMBA_ENABLED else within_numpy

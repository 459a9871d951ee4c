"""Random mm-Wave channel generation.

Finite-scattering geometric model: each user's row of the K x N_T channel
matrix is a sum of N_ray plane waves with i.i.d. complex-Gaussian gains and
uniform azimuth/elevation, scaled by a distance/shadowing large-scale factor

    h_k = sqrt(N_T * beta_k / N_ray) * sum_i rho_ki * u(psi_i, theta_i)

with u the unit-norm uniform-planar-array response at half-wavelength
spacing. All randomness flows through numpy Generators derived from a master
seed, so parallel drops are order-independent and bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .params import ChannelParams, SystemGeometry

# Purpose tags for derived substreams (see substream()).
PURPOSE_USERS = 1
PURPOSE_CHANNEL = 2


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (master_seed, key...), stable across runs."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=tuple(key)))


def array_response(psi, theta, rows_l: int, cols_r: int) -> np.ndarray:
    """Uniform-planar-array response for azimuth psi / elevation theta (radians).

    Element (l, r) carries phase pi*(l*sin(psi)*sin(theta) + r*cos(theta))
    (half-wavelength spacing), normalized by 1/sqrt(L*R). The array is
    flattened row-major: index = l*cols_r + r.

    Scalar angles give a vector of length L*R; arrays of angles of shape S
    give shape (L*R,) + S.
    """
    psi = np.asarray(psi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    l_idx = np.arange(rows_l, dtype=float)
    r_idx = np.arange(cols_r, dtype=float)
    l_part = np.multiply.outer(l_idx, np.sin(psi) * np.sin(theta))   # (L,) + S
    r_part = np.multiply.outer(r_idx, np.cos(theta))                 # (R,) + S
    phase = np.pi * (l_part[:, None, ...] + r_part[None, :, ...])    # (L, R) + S
    u = np.exp(1j * phase) / math.sqrt(rows_l * cols_r)
    return u.reshape((rows_l * cols_r,) + psi.shape)


@dataclass(frozen=True)
class UserDrop:
    """Large-scale state for one drop of K users."""

    distances_m: np.ndarray   # (K,)
    shadowing: np.ndarray     # (K,) linear-scale zeta
    beta: np.ndarray          # (K,) zeta / distance^path_loss_exp


@dataclass(frozen=True)
class ChannelRealization:
    """One drop's channel: H^H (row k is h_k^H) plus the rays that built it."""

    h_matrix: np.ndarray      # (K, N_T) complex
    ray_gains: np.ndarray     # (K, N_ray) complex rho
    azimuths: np.ndarray      # (K, N_ray) psi, radians
    elevations: np.ndarray    # (K, N_ray) theta, radians
    beta: np.ndarray          # (K,)

    @property
    def k_users(self) -> int:
        return self.h_matrix.shape[0]

    @property
    def n_t(self) -> int:
        return self.h_matrix.shape[1]


def draw_user_drop(k_users: int, params: ChannelParams, rng: np.random.Generator) -> UserDrop:
    """Sample distances uniform on the annulus and lognormal shadowing."""
    if k_users < 1:
        raise ValueError("k_users must be >= 1")
    distances = rng.uniform(params.user_dist_min_m, params.user_dist_max_m, k_users)
    shadow_db = rng.normal(0.0, params.shadowing_sigma_db, k_users)
    shadowing = 10.0 ** (shadow_db / 10.0)
    beta = shadowing * distances ** (-params.path_loss_exp)
    return UserDrop(distances_m=distances, shadowing=shadowing, beta=beta)


def draw_channel(
    drop: UserDrop,
    geom: SystemGeometry,
    params: ChannelParams,
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw one channel realization for a user drop.

    Per user: N_ray angles uniform on [0, 2pi] (elevation optionally [0, pi]),
    ray gains circularly-symmetric complex Gaussian with unit variance. Each
    user consumes its own child stream, so the realization does not depend on
    how many users were drawn before it.
    """
    k_users = drop.beta.shape[0]
    theta_hi = 2.0 * np.pi if params.elevation_range == "0-2pi" else np.pi
    h_rows = np.empty((k_users, geom.n_t), dtype=complex)
    gains = np.empty((k_users, params.n_ray), dtype=complex)
    azimuths = np.empty((k_users, params.n_ray))
    elevations = np.empty((k_users, params.n_ray))
    for k, user_rng in enumerate(rng.spawn(k_users)):
        psi = user_rng.uniform(0.0, 2.0 * np.pi, params.n_ray)
        theta = user_rng.uniform(0.0, theta_hi, params.n_ray)
        rho = (user_rng.standard_normal(params.n_ray)
               + 1j * user_rng.standard_normal(params.n_ray)) / math.sqrt(2.0)
        u = array_response(psi, theta, geom.rows_l, geom.cols_r)  # (N_T, N_ray)
        h_k = math.sqrt(geom.n_t * drop.beta[k] / params.n_ray) * (u @ rho)
        h_rows[k] = h_k.conj()
        gains[k] = rho
        azimuths[k] = psi
        elevations[k] = theta
    return ChannelRealization(
        h_matrix=h_rows, ray_gains=gains, azimuths=azimuths,
        elevations=elevations, beta=np.array(drop.beta, copy=True),
    )


def dump_rays(path: str | Path, realizations) -> None:
    """Write ray-level channel state as columnar text for cross-checks.

    realizations: iterable of (drop_index, ChannelRealization). Columns:
    drop user ray re_rho im_rho psi theta beta, full double precision.
    """
    with open(path, "w", newline="\n") as fh:
        fh.write("drop user ray re_rho im_rho psi theta beta\n")
        for drop_index, real in realizations:
            n_ray = real.ray_gains.shape[1]
            for k in range(real.k_users):
                for i in range(n_ray):
                    rho = real.ray_gains[k, i]
                    fh.write(
                        f"{drop_index} {k} {i} {rho.real:.17g} {rho.imag:.17g} "
                        f"{real.azimuths[k, i]:.17g} {real.elevations[k, i]:.17g} "
                        f"{real.beta[k]:.17g}\n"
                    )

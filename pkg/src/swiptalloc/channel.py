"""Scenario parameters and random downlink channel generation.

Receivers are placed uniformly in distance between d_min and d_max from the
transmitter.  Large-scale attenuation follows a free-space model at the
carrier frequency with the receive antenna gain folded in; small-scale fading
is Rician with unit average power.  The line-of-sight component is a unit
zero-phase phasor per entry (no array geometry is imposed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, InvalidDistance

SPEED_OF_LIGHT = 3.0e8  # m/s, nominal


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0) * 1e-3


def watts_to_dbm(x_w: float) -> float:
    return 10.0 * np.log10(x_w * 1e3)


@dataclass(frozen=True)
class ScenarioParams:
    """System configuration, all quantities in linear units (watts, Hz, m)."""

    n_tx: int
    n_rx: int
    n_info: int
    n_eh: int
    noise_power: float
    p_max: float
    sinr_req: tuple[float, ...]          # per information receiver, linear
    cap_limit: tuple[tuple[float, ...], ...]  # (n_eh, n_info), bit/s/Hz
    efficiency: tuple[float, ...]        # per energy harvester, in [0, 1]
    carrier_hz: float = 915e6
    rician_k: float = db_to_linear(3.0)
    d_min_m: float = 2.0
    d_max_m: float = 50.0
    rx_gain_db: float = 6.0

    def __post_init__(self):
        # n_tx > n_rx is the standard operating regime; equality is tolerated
        # so degenerate single-antenna test instances remain expressible.
        if not (self.n_tx >= self.n_rx >= 1):
            raise InvalidConfig(f"need n_tx >= n_rx >= 1, got {self.n_tx}, {self.n_rx}")
        if self.n_info < 1 or self.n_eh < 0:
            raise InvalidConfig("need n_info >= 1 and n_eh >= 0")
        if self.p_max <= 0 or self.noise_power <= 0:
            raise InvalidConfig("powers must be positive")
        if len(self.sinr_req) != self.n_info or any(g <= 0 for g in self.sinr_req):
            raise InvalidConfig("sinr_req must be n_info positive values")
        if len(self.cap_limit) != self.n_eh or any(
            len(row) != self.n_info or any(r <= 0 for r in row) for row in self.cap_limit
        ):
            raise InvalidConfig("cap_limit must be an n_eh x n_info matrix of positive rates")
        if len(self.efficiency) != self.n_eh or any(not 0 <= e <= 1 for e in self.efficiency):
            raise InvalidConfig("efficiency must be n_eh values in [0, 1]")
        if self.d_min_m > self.d_max_m:  # equal is allowed: fixed distance
            raise InvalidConfig("need d_min_m <= d_max_m")
        if self.rician_k < 0 or self.carrier_hz <= 0:
            raise InvalidConfig("rician_k must be >= 0 and carrier_hz > 0")


def reference_scenario(
    n_tx: int = 6,
    n_info: int = 3,
    n_eh: int = 2,
    gamma_req_db: float = 10.0,
    cap_limit_bps_hz: float = 1.0,
) -> ScenarioParams:
    """Default 915 MHz downlink configuration used by the experiments.

    Noise -23 dBm, budget 46 dBm, two receive antennas per harvester,
    6 dB receive gain, Rician factor 3 dB, conversion efficiency 0.5.
    """
    gamma = db_to_linear(gamma_req_db)
    return ScenarioParams(
        n_tx=n_tx,
        n_rx=2,
        n_info=n_info,
        n_eh=n_eh,
        noise_power=dbm_to_watts(-23.0),
        p_max=dbm_to_watts(46.0),
        sinr_req=(gamma,) * n_info,
        cap_limit=((cap_limit_bps_hz,) * n_info,) * n_eh,
        efficiency=(0.5,) * n_eh,
    )


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of the downlink channels.

    h[k] is the (n_tx,) vector to information receiver k; g[j] the
    (n_tx, n_rx) matrix to energy harvester j.  Entries carry both path loss
    and small-scale fading.
    """

    h: np.ndarray               # (n_info, n_tx) complex
    g: np.ndarray               # (n_eh, n_tx, n_rx) complex
    distances_info: np.ndarray  # (n_info,) meters
    distances_eh: np.ndarray    # (n_eh,) meters

    @property
    def n_info(self) -> int:
        return self.h.shape[0]

    @property
    def n_eh(self) -> int:
        return self.g.shape[0]


def pathloss_linear(d_m: float, params: ScenarioParams) -> float:
    """Free-space power attenuation at distance d_m, receive gain included."""
    if d_m <= 0:
        raise InvalidDistance(f"distance must be positive, got {d_m}")
    pl_db = 20.0 * np.log10(4.0 * np.pi * d_m * params.carrier_hz / SPEED_OF_LIGHT)
    pl_db -= params.rx_gain_db
    return float(10.0 ** (-pl_db / 10.0))


def rician_sample(rng: np.random.Generator, k_factor: float, size=None) -> np.ndarray:
    """Unit-power Rician fading draw(s): sqrt(k/(k+1)) + sqrt(1/(k+1)) * CN(0,1)."""
    if k_factor < 0:
        raise InvalidConfig("Rician factor must be nonnegative")
    scatter = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
    los = np.sqrt(k_factor / (k_factor + 1.0))
    return los + np.sqrt(1.0 / (k_factor + 1.0)) * scatter


def draw_realization(params: ScenarioParams, rng_seed: int) -> ChannelRealization:
    """Deterministic channel draw for the given seed."""
    rng = np.random.default_rng(rng_seed)
    d_info = rng.uniform(params.d_min_m, params.d_max_m, size=params.n_info)
    d_eh = rng.uniform(params.d_min_m, params.d_max_m, size=params.n_eh)

    h = np.empty((params.n_info, params.n_tx), dtype=complex)
    for k in range(params.n_info):
        amp = np.sqrt(pathloss_linear(d_info[k], params))
        h[k] = amp * rician_sample(rng, params.rician_k, size=params.n_tx)

    g = np.empty((params.n_eh, params.n_tx, params.n_rx), dtype=complex)
    for j in range(params.n_eh):
        amp = np.sqrt(pathloss_linear(d_eh[j], params))
        g[j] = amp * rician_sample(rng, params.rician_k, size=(params.n_tx, params.n_rx))

    return ChannelRealization(h=h, g=g, distances_info=d_info, distances_eh=d_eh)

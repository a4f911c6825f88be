"""Closed-form performance figures: harvested power, SINR, capacities.

Two evaluation paths exist for most quantities: a beam-vector path used for
rank-one policies, and a covariance path used when a scheme produces beam
covariances of rank greater than one.  Energy harvesters are assumed to
cancel all multiuser interference before eavesdropping, so their effective
interference covariance contains only artificial noise and thermal noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, ScenarioParams
from .errors import DimError, InvalidMatrix, NumericalError
from .linalg import hermitian_part, trace_inner


@dataclass(frozen=True)
class AllocationPolicy:
    """Transmit strategy: one beam per information receiver plus noise covariance."""

    beams: tuple[np.ndarray, ...]   # each (n_tx,) complex
    noise_cov: np.ndarray           # (n_tx, n_tx) Hermitian PSD
    objective_tau: float            # watts

    def beam_cov(self, k: int) -> np.ndarray:
        w = self.beams[k]
        return np.outer(w, w.conj())

    def total_cov(self) -> np.ndarray:
        t = np.array(self.noise_cov, dtype=complex)
        for w in self.beams:
            t += np.outer(w, w.conj())
        return hermitian_part(t)

    def total_power(self) -> float:
        return float(np.real(np.trace(self.noise_cov)) + sum(np.vdot(w, w).real for w in self.beams))


@dataclass(frozen=True)
class PerformanceReport:
    harvested_w: np.ndarray      # (n_eh,)
    min_harvested_w: float
    sinr: np.ndarray             # (n_info,)
    eaves_cap: np.ndarray        # (n_eh, n_info) bit/s/Hz
    secrecy_cap: np.ndarray      # (n_info,) bit/s/Hz


def harvested_power(g_j: np.ndarray, policy: AllocationPolicy, eta_j: float) -> float:
    """eta_j * Tr(G^H (sum_k w_k w_k^H + V) G), in watts."""
    return harvested_power_cov(g_j, [policy.beam_cov(k) for k in range(len(policy.beams))],
                               policy.noise_cov, eta_j)


def harvested_power_cov(g_j: np.ndarray, w_covs, noise_cov: np.ndarray, eta_j: float) -> float:
    g_j = np.asarray(g_j, dtype=complex)
    if g_j.shape[0] != noise_cov.shape[0]:
        raise DimError("channel/covariance dimension mismatch")
    total = np.array(noise_cov, dtype=complex)
    for w_cov in w_covs:
        total += w_cov
    val = float(np.real(np.trace(g_j.conj().T @ total @ g_j)))
    return eta_j * val


def sinr(k: int, channels: ChannelRealization, policy: AllocationPolicy,
         noise_power: float) -> float:
    """Receive SINR of information receiver k under a beam-vector policy."""
    h_k = channels.h[k]
    sig = abs(np.vdot(h_k, policy.beams[k])) ** 2
    interf = sum(abs(np.vdot(h_k, policy.beams[m])) ** 2
                 for m in range(len(policy.beams)) if m != k)
    an = float(np.real(h_k.conj() @ policy.noise_cov @ h_k))
    return sig / (interf + an + noise_power)


def sinr_cov(k: int, channels: ChannelRealization, w_covs, noise_cov: np.ndarray,
             noise_power: float) -> float:
    """SINR with Tr(H_k W_k) as the useful power (covariance policies)."""
    h_k = channels.h[k]
    quad = lambda m: float(np.real(h_k.conj() @ m @ h_k))
    sig = quad(w_covs[k])
    interf = sum(quad(w_covs[m]) for m in range(len(w_covs)) if m != k)
    return sig / (interf + quad(noise_cov) + noise_power)


def _eaves_gram(g_j: np.ndarray, noise_cov: np.ndarray, noise_power: float) -> np.ndarray:
    q = g_j.conj().T @ noise_cov @ g_j + noise_power * np.eye(g_j.shape[1])
    return hermitian_part(q)


def eaves_capacity(g_j: np.ndarray, w_k: np.ndarray, noise_cov: np.ndarray,
                   noise_power: float) -> float:
    """log2 det(I + Q^{-1} G^H w w^H G) via the rank-one determinant identity."""
    q = _eaves_gram(g_j, noise_cov, noise_power)
    a = g_j.conj().T @ w_k
    val = 1.0 + float(np.real(a.conj() @ np.linalg.solve(q, a)))
    if not np.isfinite(val) or val <= 0:
        raise NumericalError("eavesdropper capacity evaluation failed")
    return float(np.log2(val))


def eaves_capacity_cov(g_j: np.ndarray, w_cov: np.ndarray, noise_cov: np.ndarray,
                       noise_power: float) -> float:
    """log2 det(I + Q^{-1} G^H W G) for a general PSD beam covariance W."""
    q = _eaves_gram(g_j, noise_cov, noise_power)
    m = np.eye(g_j.shape[1]) + np.linalg.solve(q, g_j.conj().T @ w_cov @ g_j)
    sign, logdet = np.linalg.slogdet(m)
    if sign <= 0 or not np.isfinite(logdet):
        raise NumericalError("eavesdropper capacity evaluation failed")
    return float(logdet / np.log(2.0))


def secrecy_capacity(k: int, channels: ChannelRealization, policy: AllocationPolicy,
                     noise_power: float) -> float:
    """[log2(1 + SINR_k) - max_j C_ER_{j,k}]^+ in bit/s/Hz."""
    own = np.log2(1.0 + sinr(k, channels, policy, noise_power))
    worst = 0.0
    for j in range(channels.n_eh):
        worst = max(worst, eaves_capacity(channels.g[j], policy.beams[k],
                                          policy.noise_cov, noise_power))
    return max(0.0, own - worst) if channels.n_eh else float(own)


def lemma_det_trace_gap(a: np.ndarray) -> float:
    """det(I + A) - (1 + Tr A) for PSD A; zero exactly when rank(A) <= 1."""
    a = np.asarray(a, dtype=complex)
    w = np.linalg.eigvalsh(hermitian_part(a))
    if w.min(initial=0.0) < -1e-9 * max(1.0, abs(w).max(initial=0.0)):
        raise InvalidMatrix("matrix must be positive semidefinite")
    return float(np.prod(1.0 + w) - (1.0 + w.sum()))


def performance_report(channels: ChannelRealization, policy: AllocationPolicy,
                       params: ScenarioParams) -> PerformanceReport:
    w_covs = [policy.beam_cov(k) for k in range(len(policy.beams))]
    return performance_report_cov(channels, w_covs, policy.noise_cov, params,
                                  beams=policy.beams)


def performance_report_cov(channels: ChannelRealization, w_covs, noise_cov: np.ndarray,
                           params: ScenarioParams, beams=None) -> PerformanceReport:
    """Full report; uses beam-vector formulas when beams are provided."""
    nk, nj = params.n_info, params.n_eh
    harv = np.array([
        harvested_power_cov(channels.g[j], w_covs, noise_cov, params.efficiency[j])
        for j in range(nj)
    ])
    if beams is not None:
        pol = AllocationPolicy(beams=tuple(beams), noise_cov=noise_cov, objective_tau=0.0)
        snr = np.array([sinr(k, channels, pol, params.noise_power) for k in range(nk)])
        cap = np.array([[eaves_capacity(channels.g[j], beams[k], noise_cov, params.noise_power)
                         for k in range(nk)] for j in range(nj)])
    else:
        snr = np.array([sinr_cov(k, channels, w_covs, noise_cov, params.noise_power)
                        for k in range(nk)])
        cap = np.array([[eaves_capacity_cov(channels.g[j], w_covs[k], noise_cov,
                                            params.noise_power)
                         for k in range(nk)] for j in range(nj)])
    cap = cap.reshape(nj, nk)
    own = np.log2(1.0 + snr)
    worst = cap.max(axis=0) if nj else np.zeros(nk)
    sec = np.maximum(0.0, own - worst)
    return PerformanceReport(
        harvested_w=harv,
        min_harvested_w=float(harv.min()) if nj else 0.0,
        sinr=snr,
        eaves_cap=cap,
        secrecy_cap=sec,
    )

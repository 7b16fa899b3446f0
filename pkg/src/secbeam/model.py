"""System model: channels, secrecy rate, harvested power, feasibility.

A transmitter with N_T antennas broadcasts to an information receiver (IR,
N_I antennas) and a dual-function energy receiver (ER, N_E antennas) that
can also decode, hence the secrecy constraint. Channels are stored raw (in
linear gain units) together with the per-receiver noise powers; solvers
work with the noise-normalized matrices H = H_raw / sigma.

All rates are computed internally in nats (natural log) and reported in
bits; all powers are watts internally, dBm at the interfaces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .linalg import check_finite, hermitian_eig, hermitize, logdet_hpd

LN2 = float(np.log(2.0))


def dbm_to_watts(x_dbm: float) -> float:
    """Convert a power from dBm to watts: 10^((x - 30)/10)."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w: float) -> float:
    """Convert a power from watts to dBm."""
    return 10.0 * np.log10(x_w) + 30.0


def matrix_to_json(a: np.ndarray) -> dict:
    """Serialize a complex matrix as {"rows", "cols", "re", "im"}."""
    a = np.atleast_2d(np.asarray(a, dtype=complex))
    return {
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": a.real.tolist(),
        "im": a.imag.tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    """Deserialize a complex matrix from {"rows", "cols", "re", "im"}."""
    a = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    if a.shape != (obj["rows"], obj["cols"]):
        raise DimensionError(
            f"matrix payload shape {a.shape} does not match "
            f"({obj['rows']}, {obj['cols']})"
        )
    return a


@dataclass
class ChannelPair:
    """Raw channels to the IR and ER plus noise powers and conversion efficiency.

    h_i_raw : (N_I, N_T) complex channel to the information receiver
    h_e_raw : (N_E, N_T) complex channel to the energy receiver
    sigma2_i, sigma2_e : noise powers in watts (> 0)
    zeta : energy conversion efficiency in (0, 1]
    """

    h_i_raw: np.ndarray
    h_e_raw: np.ndarray
    sigma2_i: float
    sigma2_e: float
    zeta: float = 0.5

    def __post_init__(self):
        self.h_i_raw = check_finite(
            np.array(self.h_i_raw, dtype=complex), "h_i_raw"
        )
        self.h_e_raw = check_finite(
            np.array(self.h_e_raw, dtype=complex), "h_e_raw"
        )
        if self.h_i_raw.ndim != 2 or self.h_e_raw.ndim != 2:
            raise DimensionError("channel matrices must be 2-D")
        if self.h_i_raw.shape[1] != self.h_e_raw.shape[1]:
            raise DimensionError(
                "channel matrices disagree on the transmit antenna count: "
                f"{self.h_i_raw.shape} vs {self.h_e_raw.shape}"
            )
        if not (self.sigma2_i > 0 and self.sigma2_e > 0):
            raise ValueError("noise powers must be positive")
        if not (0.0 < self.zeta <= 1.0):
            raise ValueError("zeta must lie in (0, 1]")
        # noise-normalized channels, fixed at construction
        self.h_i = self.h_i_raw / np.sqrt(self.sigma2_i)
        self.h_e = self.h_e_raw / np.sqrt(self.sigma2_e)

    @property
    def n_t(self) -> int:
        return self.h_i_raw.shape[1]

    @property
    def n_i(self) -> int:
        return self.h_i_raw.shape[0]

    @property
    def n_e(self) -> int:
        return self.h_e_raw.shape[0]

    def eh_gram(self) -> np.ndarray:
        """Normalized ER Gram matrix H_E^H H_E (N_T x N_T)."""
        return hermitize(self.h_e.conj().T @ self.h_e)

    def ir_gram(self) -> np.ndarray:
        """Normalized IR Gram matrix H_I^H H_I (N_T x N_T)."""
        return hermitize(self.h_i.conj().T @ self.h_i)

    def to_json_dict(self) -> dict:
        return {
            "h_i": matrix_to_json(self.h_i_raw),
            "h_e": matrix_to_json(self.h_e_raw),
            "sigma2_i_dbm": watts_to_dbm(self.sigma2_i),
            "sigma2_e_dbm": watts_to_dbm(self.sigma2_e),
            "zeta": self.zeta,
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "ChannelPair":
        return cls(
            h_i_raw=matrix_from_json(obj["h_i"]),
            h_e_raw=matrix_from_json(obj["h_e"]),
            sigma2_i=dbm_to_watts(obj["sigma2_i_dbm"]),
            sigma2_e=dbm_to_watts(obj["sigma2_e_dbm"]),
            zeta=obj["zeta"],
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)

    @classmethod
    def load(cls, path) -> "ChannelPair":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class DesignBudget:
    """Total transmit power and harvested-power target, both in watts."""

    p_t: float
    p_e: float

    def __post_init__(self):
        if not self.p_t > 0:
            raise ValueError("transmit power budget must be positive")
        if self.p_e < 0:
            raise ValueError("harvested-power target must be nonnegative")


def _as_beamformer(ch: ChannelPair, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    if v.ndim != 2 or v.shape[0] != ch.n_t:
        raise DimensionError(
            f"beamformer shape {v.shape} does not match N_T = {ch.n_t}"
        )
    check_finite(v, "beamformer")
    return v


def secrecy_rate_nats(ch: ChannelPair, v) -> float:
    """Secrecy rate in nats: logdet(I + H_I VV^H H_I^H) - logdet(I + H_E VV^H H_E^H)."""
    v = _as_beamformer(ch, v)
    gi = ch.h_i @ v
    ge = ch.h_e @ v
    term_i = logdet_hpd(np.eye(ch.n_i) + gi @ gi.conj().T)
    term_e = logdet_hpd(np.eye(ch.n_e) + ge @ ge.conj().T)
    return term_i - term_e


def secrecy_rate(ch: ChannelPair, v) -> float:
    """Secrecy rate in bits (nats / ln 2). May be negative."""
    return secrecy_rate_nats(ch, v) / LN2


def an_secrecy_rate_nats(ch: ChannelPair, v, v_e) -> float:
    """Artificial-noise-aided secrecy rate in nats.

    The AN covariance Z = V_E V_E^H raises the noise floor at both
    receivers: each log-det term becomes
    logdet(I + H V V^H H^H (I + H Z H^H)^{-1}), evaluated stably as
    logdet(N + S) - logdet(N).
    """
    v = _as_beamformer(ch, v)
    v_e = _as_beamformer(ch, v_e)
    gi = ch.h_i @ v
    gie = ch.h_i @ v_e
    ge = ch.h_e @ v
    gee = ch.h_e @ v_e
    n_i = np.eye(ch.n_i) + gie @ gie.conj().T
    n_e = np.eye(ch.n_e) + gee @ gee.conj().T
    term_i = logdet_hpd(n_i + gi @ gi.conj().T) - logdet_hpd(n_i)
    term_e = logdet_hpd(n_e + ge @ ge.conj().T) - logdet_hpd(n_e)
    return term_i - term_e


def an_secrecy_rate(ch: ChannelPair, v, v_e) -> float:
    """Artificial-noise-aided secrecy rate in bits."""
    return an_secrecy_rate_nats(ch, v, v_e) / LN2


def harvested_power(ch: ChannelPair, cov) -> float:
    """Harvested power in watts at the ER for transmit covariance ``cov``.

    cov is the total N_T x N_T transmit covariance (V V^H, plus the AN
    covariance when present). Equals zeta * tr(H_E_raw cov H_E_raw^H).
    """
    cov = np.asarray(cov, dtype=complex)
    if cov.shape != (ch.n_t, ch.n_t):
        raise DimensionError(
            f"covariance shape {cov.shape} does not match N_T = {ch.n_t}"
        )
    val = np.real(np.sum(np.conj(ch.h_e) * (ch.h_e @ cov)))
    return float(ch.zeta * ch.sigma2_e * val)


def feasibility(ch: ChannelPair, budget: DesignBudget):
    """Whether the harvested-power target is attainable at full power.

    Feasible iff zeta sigma_E^2 P_T lambda_max(H_E^H H_E) >= P_E. Returns
    (feasible, margin) with margin = left side - P_E in watts.
    """
    lam_max = hermitian_eig(ch.eh_gram()).eigenvalues[-1]
    margin = ch.zeta * ch.sigma2_e * budget.p_t * float(lam_max) - budget.p_e
    return margin >= 0.0, float(margin)


def eh_vacuous(ch: ChannelPair, budget: DesignBudget) -> bool:
    """Whether every full-power beamformer meets the harvested-power target.

    True iff zeta sigma_E^2 P_T lambda_min(H_E^H H_E) >= P_E; the
    harvesting constraint then never binds and can be dropped.
    """
    lam_min = hermitian_eig(ch.eh_gram()).eigenvalues[0]
    return bool(ch.zeta * ch.sigma2_e * budget.p_t * float(lam_min) >= budget.p_e)

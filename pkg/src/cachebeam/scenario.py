"""Problem-instance generation for the cache-enabled CRAN simulator.

A :class:`Scenario` bundles everything a single optimization run needs:
BS/user geometry, estimated channels with ellipsoidal CSI uncertainty,
the content catalog with per-user requests, the cache placement, and the
system parameters.  All randomness is driven by explicit seeds so that
scenarios are bit-reproducible.

Unit convention: channel gains are stored relative to the noise standard
deviation (so the stored noise power is 1).  SINR is invariant under this
rescaling, per-BS powers stay in watts, and the CSI accuracy matrix
``E_u = (1/a) I`` acts on the noise-normalized error vector.
"""

import json
from dataclasses import dataclass, field, replace

import numpy as np

# Path-loss clamp: distances below this are treated as D_MIN_KM (avoids the
# log singularity when a user is generated on top of a BS).
D_MIN_KM = 0.01


def _as_vector(x, n, name):
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = np.full(n, float(v))
    if v.shape != (n,):
        raise ValueError(f"{name}: expected scalar or length-{n} vector, got shape {v.shape}")
    return v


@dataclass
class SystemParams:
    """Static system parameters.

    Per-BS and per-user quantities accept scalars and are broadcast.
    """

    num_bs: int
    num_users: int
    max_tx_power: np.ndarray = 1.0          # watts, per BS
    backhaul_capacity: np.ndarray = 10.0    # normalized rate units, per BS
    amplifier_efficiency: np.ndarray = 2.5  # dimensionless, per BS
    relative_power: np.ndarray = 38.0       # watts, per BS
    sleep_power: np.ndarray = 1.0           # watts, per BS
    noise_power: np.ndarray = 1.0           # per user, in stored channel units
    target_sinr: np.ndarray = 10.0          # linear ratio, per user
    csi_accuracy: float = 0.01              # a; E_u = (1/a) I
    smoothing: float = 1e-6                 # epsilon
    active_threshold: float = 1e-6          # tau, watts
    region_size: float = 1000.0             # meters

    def __post_init__(self):
        B, U = int(self.num_bs), int(self.num_users)
        if B < 1 or U < 1:
            raise ValueError("num_bs and num_users must be >= 1")
        self.num_bs, self.num_users = B, U
        self.max_tx_power = _as_vector(self.max_tx_power, B, "max_tx_power")
        self.backhaul_capacity = _as_vector(self.backhaul_capacity, B, "backhaul_capacity")
        self.amplifier_efficiency = _as_vector(self.amplifier_efficiency, B, "amplifier_efficiency")
        self.relative_power = _as_vector(self.relative_power, B, "relative_power")
        self.sleep_power = _as_vector(self.sleep_power, B, "sleep_power")
        self.noise_power = _as_vector(self.noise_power, U, "noise_power")
        self.target_sinr = _as_vector(self.target_sinr, U, "target_sinr")
        for name in ("max_tx_power", "backhaul_capacity", "amplifier_efficiency",
                     "relative_power", "sleep_power", "noise_power", "target_sinr"):
            if not np.all(getattr(self, name) > 0):
                raise ValueError(f"{name} must be strictly positive")
        for name in ("csi_accuracy", "smoothing", "active_threshold", "region_size"):
            if not float(getattr(self, name)) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class Topology:
    bs_positions: np.ndarray    # (B, 2) meters
    user_positions: np.ndarray  # (U, 2) meters
    seed: int

    def distances_km(self, d_min_km=D_MIN_KM):
        """Pairwise BS-user distances in km, clamped below at d_min_km.

        Returns a (U, B) array.
        """
        d = np.linalg.norm(
            self.user_positions[:, None, :] - self.bs_positions[None, :, :], axis=2
        ) / 1000.0
        return np.maximum(d, d_min_km)


@dataclass
class ChannelEstimate:
    """Estimated channel of one user with its ellipsoidal error shape.

    The true channel is h = h_tilde + e with e'Ee < 1.
    """

    h_tilde: np.ndarray      # (B,) complex
    error_shape: np.ndarray  # (B, B) Hermitian positive definite

    def __post_init__(self):
        self.h_tilde = np.asarray(self.h_tilde, dtype=complex)
        self.error_shape = np.asarray(self.error_shape, dtype=complex)
        if not np.all(np.isfinite(self.h_tilde.view(float))):
            raise ValueError("h_tilde must be finite")
        E = self.error_shape
        if E.shape != (self.h_tilde.size,) * 2:
            raise ValueError("error_shape dimension mismatch")
        if np.max(np.abs(E - E.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(E))):
            raise ValueError("error_shape must be Hermitian")
        if np.linalg.eigvalsh(E).min() <= 0:
            raise ValueError("error_shape must be positive definite")


@dataclass
class ContentModel:
    num_files: int
    popularity: np.ndarray    # (F,), sums to 1
    requests: np.ndarray      # (U,) file indices, 0-based
    cache_matrix: np.ndarray  # (B, F) binary
    cache_size: np.ndarray    # (B,)
    alpha: np.ndarray         # (B,) binary

    def __post_init__(self):
        self.popularity = np.asarray(self.popularity, dtype=float)
        self.requests = np.asarray(self.requests, dtype=int)
        self.cache_matrix = np.asarray(self.cache_matrix, dtype=int)
        self.cache_size = np.asarray(self.cache_size, dtype=int)
        self.alpha = np.asarray(self.alpha, dtype=int)
        if abs(self.popularity.sum() - 1.0) > 1e-12:
            raise ValueError("popularity must sum to 1 within 1e-12")
        if np.any(self.cache_matrix.sum(axis=1) > self.cache_size):
            raise ValueError("cache placement exceeds cache size")


@dataclass
class Scenario:
    params: SystemParams
    topology: Topology
    channels: list  # list[ChannelEstimate], one per user
    content: ContentModel
    seed: int

    def __post_init__(self):
        B, U = self.params.num_bs, self.params.num_users
        if self.topology.bs_positions.shape != (B, 2):
            raise ValueError("topology BS count inconsistent with params")
        if self.topology.user_positions.shape != (U, 2):
            raise ValueError("topology user count inconsistent with params")
        if len(self.channels) != U:
            raise ValueError("need one ChannelEstimate per user")
        for ch in self.channels:
            if ch.h_tilde.shape != (B,):
                raise ValueError("channel dimension inconsistent with params")
        if self.content.requests.shape != (U,):
            raise ValueError("requests inconsistent with user count")
        if self.content.cache_matrix.shape != (B, self.content.num_files):
            raise ValueError("cache matrix shape inconsistent")

    # -- serialization ----------------------------------------------------
    # Schema documented in docs/scenario_schema.md.

    def to_dict(self):
        p = self.params
        return {
            "params": {
                "num_bs": p.num_bs,
                "num_users": p.num_users,
                "max_tx_power": p.max_tx_power.tolist(),
                "backhaul_capacity": p.backhaul_capacity.tolist(),
                "amplifier_efficiency": p.amplifier_efficiency.tolist(),
                "relative_power": p.relative_power.tolist(),
                "sleep_power": p.sleep_power.tolist(),
                "noise_power": p.noise_power.tolist(),
                "target_sinr": p.target_sinr.tolist(),
                "csi_accuracy": p.csi_accuracy,
                "smoothing": p.smoothing,
                "active_threshold": p.active_threshold,
                "region_size": p.region_size,
            },
            "topology": {
                "bs_positions": self.topology.bs_positions.tolist(),
                "user_positions": self.topology.user_positions.tolist(),
                "seed": self.topology.seed,
            },
            "channels": [
                {
                    "h_tilde": [[z.real, z.imag] for z in ch.h_tilde],
                    "error_shape": [
                        [[z.real, z.imag] for z in row] for row in ch.error_shape
                    ],
                }
                for ch in self.channels
            ],
            "content": {
                "num_files": self.content.num_files,
                "popularity": self.content.popularity.tolist(),
                "requests": self.content.requests.tolist(),
                "cache_matrix": self.content.cache_matrix.tolist(),
                "cache_size": self.content.cache_size.tolist(),
                "alpha": self.content.alpha.tolist(),
            },
            "seed": self.seed,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        p = d["params"]
        params = SystemParams(**p)
        t = d["topology"]
        topology = Topology(
            bs_positions=np.asarray(t["bs_positions"], dtype=float),
            user_positions=np.asarray(t["user_positions"], dtype=float),
            seed=int(t["seed"]),
        )
        channels = []
        for ch in d["channels"]:
            h = np.array([complex(re, im) for re, im in ch["h_tilde"]])
            E = np.array([[complex(re, im) for re, im in row] for row in ch["error_shape"]])
            channels.append(ChannelEstimate(h_tilde=h, error_shape=E))
        c = d["content"]
        content = ContentModel(
            num_files=int(c["num_files"]),
            popularity=np.asarray(c["popularity"], dtype=float),
            requests=np.asarray(c["requests"], dtype=int),
            cache_matrix=np.asarray(c["cache_matrix"], dtype=int),
            cache_size=np.asarray(c["cache_size"], dtype=int),
            alpha=np.asarray(c["alpha"], dtype=int),
        )
        return cls(params=params, topology=topology, channels=channels,
                   content=content, seed=int(d["seed"]))

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


# -- generation operations ------------------------------------------------

def generate_topology(num_bs, num_users, region_size, seed):
    """Drop BSs and users i.i.d. uniformly in the square region."""
    if num_bs < 1 or num_users < 1:
        raise ValueError("num_bs and num_users must be >= 1")
    if region_size <= 0:
        raise ValueError("region_size must be positive")
    rng = np.random.default_rng(seed)
    bs = rng.uniform(0.0, region_size, size=(num_bs, 2))
    users = rng.uniform(0.0, region_size, size=(num_users, 2))
    return Topology(bs_positions=bs, user_positions=users, seed=int(seed))


def path_loss_db(distance_km):
    """Log-distance path loss 128.1 + 37.6 log10(d), d in km."""
    d = np.asarray(distance_km, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    return 128.1 + 37.6 * np.log10(d)


def generate_channel_estimates(topology, params, seed):
    """Rayleigh-faded channel estimates with distance-dependent path loss.

    h_tilde[b] = g_b * 10^(-L(d_b)/20) with g_b circularly-symmetric complex
    Gaussian of unit variance; every user's error shape is (1/a) I.  Gains
    are in raw linear units; see build_scenario for the stored normalization.
    """
    rng = np.random.default_rng(seed)
    d = topology.distances_km()                      # (U, B)
    amp = 10.0 ** (-path_loss_db(d) / 20.0)
    U, B = d.shape
    g = (rng.standard_normal((U, B)) + 1j * rng.standard_normal((U, B))) / np.sqrt(2.0)
    E = (1.0 / params.csi_accuracy) * np.eye(B)
    return [ChannelEstimate(h_tilde=g[u] * amp[u], error_shape=E.copy()) for u in range(U)]


def zipf_popularity(num_files, skew):
    """popularity(f) proportional to f^(-skew), f = 1..F."""
    if num_files < 1:
        raise ValueError("num_files must be >= 1")
    if skew < 0:
        raise ValueError("skew must be nonnegative")
    w = np.arange(1, num_files + 1, dtype=float) ** (-float(skew))
    return w / w.sum()


def sample_requests(num_files, zipf_skew, num_users, seed, mode="iid"):
    """Draw per-user file requests.

    mode:
      "iid"    -- every user draws independently from the Zipf popularity;
      "common" -- every user requests file 0;
      "split"  -- the first half of the users request file 0, the rest draw
                  i.i.d. from the popularity.
    Returns (requests, popularity).
    """
    pop = zipf_popularity(num_files, zipf_skew)
    rng = np.random.default_rng(seed)
    if mode == "common":
        req = np.zeros(num_users, dtype=int)
    elif mode == "iid":
        req = rng.choice(num_files, size=num_users, p=pop)
    elif mode == "split":
        half = num_users // 2
        req = np.concatenate([
            np.zeros(half, dtype=int),
            rng.choice(num_files, size=num_users - half, p=pop),
        ])
    else:
        raise ValueError(f"unknown request mode {mode!r}")
    return req.astype(int), pop


def build_cache_placement(popularity, cache_size, num_bs, policy="most_popular"):
    """Cache the cache_size[b] most popular files at each BS.

    Ties are broken toward the lower file index.  Returns the binary
    (B, F) placement matrix.
    """
    pop = np.asarray(popularity, dtype=float)
    F = pop.size
    sizes = np.asarray(cache_size, dtype=int)
    if sizes.ndim == 0:
        sizes = np.full(num_bs, int(sizes))
    if np.any(sizes > F):
        raise ValueError("cache_size exceeds catalog size")
    if np.any(sizes < 0):
        raise ValueError("cache_size must be nonnegative")
    if policy != "most_popular":
        raise ValueError(f"unknown cache policy {policy!r}")
    # stable sort on -popularity keeps lower indices first among ties
    order = np.argsort(-pop, kind="stable")
    P = np.zeros((num_bs, F), dtype=int)
    for b in range(num_bs):
        P[b, order[: sizes[b]]] = 1
    return P


def compute_alpha(cache_matrix, requests):
    """alpha[b] = 0 iff every requested file is cached at BS b, else 1."""
    P = np.asarray(cache_matrix, dtype=int)
    req = np.asarray(requests, dtype=int)
    cached_all = np.all(P[:, req] == 1, axis=1)
    return np.where(cached_all, 0, 1).astype(int)


def sample_csi_error(error_shape, rng):
    """One error vector drawn uniformly from the open ellipsoid e'Ee < 1."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    E = np.asarray(error_shape, dtype=complex)
    B = E.shape[0]
    w, V = np.linalg.eigh(E)
    if w.min() <= 0:
        raise ValueError("error_shape must be positive definite")
    z = rng.standard_normal(B) + 1j * rng.standard_normal(B)
    u = z / np.linalg.norm(z)
    r = rng.random() ** (1.0 / (2 * B))       # uniform in the 2B-dim ball
    x = r * u                                  # ||x|| < 1
    return V @ ((1.0 / np.sqrt(w)) * (V.conj().T @ x))


def sample_csi_errors_boundary_biased(error_shape, n_samples, seed):
    """Error samples for worst-case search: half interior, half on the shell.

    Shell samples sit at e'Ee = 1 - 1e-9; worst cases of the SINR are
    generically attained on the ellipsoid boundary.
    """
    E = np.asarray(error_shape, dtype=complex)
    B = E.shape[0]
    rng = np.random.default_rng(seed)
    w, V = np.linalg.eigh(E)
    z = rng.standard_normal((n_samples, B)) + 1j * rng.standard_normal((n_samples, B))
    u = z / np.linalg.norm(z, axis=1, keepdims=True)
    r = rng.random(n_samples) ** (1.0 / (2 * B))
    n_shell = n_samples // 2
    r[:n_shell] = np.sqrt(1.0 - 1e-9)
    x = r[:, None] * u
    e_inv_sqrt = V @ ((1.0 / np.sqrt(w))[:, None] * V.conj().T)
    return (e_inv_sqrt @ x.T).T


def build_scenario(params, seed, request_mode="iid", num_files=10, zipf_skew=1.0,
                   cache_size=0, noise_normalize=True):
    """Assemble a full Scenario from SystemParams and a seed.

    Seeds for topology, fading, and requests are derived from ``seed`` so a
    single integer reproduces the whole instance.  With ``noise_normalize``
    the stored channels are divided by the per-user noise standard deviation
    and the stored noise power becomes 1 (the SINR is invariant under this
    change of units).
    """
    topo = generate_topology(params.num_bs, params.num_users, params.region_size,
                             np.random.default_rng([seed, 0]).integers(2**63))
    chan_seed = np.random.default_rng([seed, 1]).integers(2**63)
    channels = generate_channel_estimates(topo, params, chan_seed)
    if noise_normalize:
        scale = np.sqrt(params.noise_power)
        channels = [
            ChannelEstimate(h_tilde=ch.h_tilde / scale[u], error_shape=ch.error_shape)
            for u, ch in enumerate(channels)
        ]
        params = replace(params, noise_power=np.ones(params.num_users))
    req_seed = np.random.default_rng([seed, 2]).integers(2**63)
    requests, pop = sample_requests(num_files, zipf_skew, params.num_users,
                                    req_seed, mode=request_mode)
    P = build_cache_placement(pop, cache_size, params.num_bs)
    alpha = compute_alpha(P, requests)
    sizes = np.asarray(cache_size, dtype=int)
    if sizes.ndim == 0:
        sizes = np.full(params.num_bs, int(sizes))
    content = ContentModel(num_files=num_files, popularity=pop, requests=requests,
                           cache_matrix=P, cache_size=sizes, alpha=alpha)
    return Scenario(params=params, topology=topo, channels=channels,
                    content=content, seed=int(seed))

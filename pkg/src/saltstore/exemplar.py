"""Read-path exemplar selection: k-means++ seeding, Lloyd clustering and a
two-threshold drift classifier."""

import enum
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import DecodeError, InvalidInputError

MIN_TAU = 1e-9


class DriftCase(enum.Enum):
    KNOWN = "known"
    DRIFTED = "drifted"
    NOVEL = "novel"


def _as_points(points):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InvalidInputError("need a non-empty (count, dims) point array")
    if not np.isfinite(pts).all():
        raise InvalidInputError("feature vectors must be finite")
    return pts


def _sq_dists(pts, centers):
    diff = pts[:, None, :] - centers[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def kmeanspp_seed(points, k, seed=0):
    """Pick ``k`` rows of ``points`` by D^2 sampling.

    When every remaining point coincides with a chosen center the D^2 mass
    is zero and the next pick falls back to uniform.
    """
    pts = _as_points(points)
    if not 1 <= k <= len(pts):
        raise InvalidInputError(f"cannot seed {k} centers from {len(pts)} points")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(len(pts)))]
    d2 = _sq_dists(pts, pts[chosen]).min(axis=1)
    while len(chosen) < k:
        total = d2.sum()
        if total > 0:
            idx = int(rng.choice(len(pts), p=d2 / total))
        else:
            idx = int(rng.integers(len(pts)))
        chosen.append(idx)
        d2 = np.minimum(d2, _sq_dists(pts, pts[idx:idx + 1])[:, 0])
    return pts[chosen].copy()


@dataclass(frozen=True, eq=False)
class ClusterModel:
    centers: np.ndarray
    tau1: float
    tau2: float
    counts: np.ndarray = None
    mean_distance: np.ndarray = None
    iterations: int = 0
    cost_history: tuple = field(default=())

    def __post_init__(self):
        c = np.array(self.centers, dtype=np.float64, copy=True)
        if c.ndim != 2 or c.shape[0] < 1:
            raise InvalidInputError("a model needs at least one center")
        if not 0 < self.tau1 < self.tau2:
            raise InvalidInputError("thresholds must satisfy 0 < tau1 < tau2")
        c.setflags(write=False)
        object.__setattr__(self, "centers", c)

    @property
    def k(self):
        return self.centers.shape[0]

    @property
    def cost(self):
        return self.cost_history[-1] if self.cost_history else None

    def with_thresholds(self, tau1=None, tau2=None):
        return ClusterModel(self.centers, self.tau1 if tau1 is None else tau1,
                            self.tau2 if tau2 is None else tau2, self.counts,
                            self.mean_distance, self.iterations, self.cost_history)

    def to_bytes(self):
        k, dims = self.centers.shape
        return (b"SKMN" + struct.pack("<BII", 1, k, dims)
                + self.centers.astype("<f8").tobytes()
                + struct.pack("<dd", self.tau1, self.tau2))

    @classmethod
    def from_bytes(cls, data):
        data = bytes(data)
        if data[:4] != b"SKMN" or len(data) < 13:
            raise DecodeError("not a cluster model")
        version, k, dims = struct.unpack_from("<BII", data, 4)
        if version != 1:
            raise DecodeError(f"unsupported model version {version}")
        need = 13 + 8 * k * dims + 16
        if len(data) != need:
            raise DecodeError(f"model is {len(data)} bytes, expected {need}")
        centers = np.frombuffer(data, dtype="<f8", count=k * dims, offset=13)
        tau1, tau2 = struct.unpack_from("<dd", data, 13 + 8 * k * dims)
        try:
            return cls(centers.reshape(k, dims), tau1, tau2)
        except InvalidInputError as exc:
            raise DecodeError(str(exc)) from exc


def default_thresholds(distances):
    """``mean + 2 std`` and ``mean + 4 std`` of nearest-center distances,
    floored so that ``0 < tau1 < tau2`` holds on degenerate data."""
    d = np.asarray(distances, dtype=np.float64)
    mean, std = float(d.mean()), float(d.std())
    tau1 = max(mean + 2 * std, MIN_TAU)
    tau2 = mean + 4 * std
    if not tau2 > tau1:
        tau2 = 2 * tau1
    return tau1, tau2


def kmeans_cluster(points, init_centers, tol=1e-6, max_iter=100, tau1=None, tau2=None):
    """Lloyd iterations from ``init_centers``.

    Stops once no center moves by ``tol`` or more, or after ``max_iter``
    rounds.  A center left without points is moved onto the point farthest
    from its assigned center.  ``cost_history`` records the clustering cost
    after each assignment.
    """
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    pts = _as_points(points)
    centers = np.array(_as_points(init_centers), copy=True)
    if centers.shape[1] != pts.shape[1]:
        raise InvalidInputError("centers and points differ in dimension")
    k = len(centers)
    costs = []
    iterations = 0
    for _ in range(max(max_iter, 1)):
        iterations += 1
        d2 = _sq_dists(pts, centers)
        labels = d2.argmin(axis=1)
        costs.append(float(d2[np.arange(len(pts)), labels].sum()))
        new = centers.copy()
        taken = set()
        for j in range(k):
            members = labels == j
            if members.any():
                new[j] = pts[members].mean(axis=0)
                continue
            far = d2[np.arange(len(pts)), labels].copy()
            if taken:
                far[list(taken)] = -1.0
            idx = int(np.argmax(far))
            taken.add(idx)
            new[j] = pts[idx]
        shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
        centers = new
        if shift < tol:
            break

    d2 = _sq_dists(pts, centers)
    labels = d2.argmin(axis=1)
    dist = np.sqrt(d2[np.arange(len(pts)), labels])
    final_cost = float((dist ** 2).sum())
    if final_cost != costs[-1]:
        costs.append(final_cost)
    counts = np.bincount(labels, minlength=k)
    mean_distance = np.array([dist[labels == j].mean() if counts[j] else 0.0
                              for j in range(k)])
    t1, t2 = default_thresholds(dist)
    tau1 = t1 if tau1 is None else tau1
    tau2 = t2 if tau2 is None else tau2
    return ClusterModel(centers, tau1, tau2, counts, mean_distance, iterations, tuple(costs))


def fit(points, k, seed=0, restarts=1, tol=1e-6, max_iter=100):
    """Best-of-``restarts`` k-means++ / Lloyd fit by final cost."""
    best = None
    for r in range(restarts):
        init = kmeanspp_seed(points, k, seed + r)
        model = kmeans_cluster(points, init, tol, max_iter)
        if best is None or model.cost < best.cost:
            best = model
    return best


def nearest_center(f, m):
    """``(index, distance)`` of the closest center; ties go to the lower index."""
    v = np.asarray(f, dtype=np.float64).ravel()
    d = np.sqrt(((m.centers - v) ** 2).sum(axis=1))
    j = int(np.argmin(d))
    return j, float(d[j])


def case_for_distance(d, tau1, tau2):
    if d <= tau1:
        return DriftCase.KNOWN
    if d <= tau2:
        return DriftCase.DRIFTED
    return DriftCase.NOVEL


def classify_drift(f, m):
    _, d = nearest_center(f, m)
    return case_for_distance(d, m.tau1, m.tau2)


def select_exemplars(features, m):
    """Indices (in input order) of items classified Drifted or Novel."""
    return [i for i, f in enumerate(features) if classify_drift(f, m) is not DriftCase.KNOWN]

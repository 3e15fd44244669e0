"""
Linear soft-margin SVMs trained by sequential minimal optimization (SMO), bootstrap bagging of
them, ensemble prediction and classification metrics.

Labels are +1 (feasible dispatch) and -1 (infeasible). A false negative is an infeasible point
predicted feasible; that is the error that matters when the ensemble is used as a constraint.

SVM training, for a labelled set (x_i, y_i):
  * features are standardized internally, z = (x - mean) / scale (scale 1 for constant columns);
  * the primal is  min 1/2 |w|^2 + C sum(xi_i)  s.t.  y_i (w . z_i + b) >= 1 - xi_i, xi_i >= 0,
    with the bias b free and unregularized;
  * its dual  max  sum(a) - 1/2 |sum a_i y_i z_i|^2,  0 <= a_i <= C,  sum a_i y_i = 0  is solved
    two multipliers at a time: the pair is the most violating index i with a second-order
    choice of j, and the step moves a_i and a_j along sum a_i y_i = 0 to the clipped exact
    maximizer, so the dual objective never decreases;
  * training stops when the maximal KKT violation m(a) - M(a) is <= tol, or after
    max_epochs * n pair steps;
  * b is the mean of -y_i g_i over the free multipliers (midpoint of the feasible interval when
    there are none), and the returned (w, b) are in raw feature units: w = w_z / scale,
    b = b_z - w . mean.

sign(0) is +1 everywhere: a point on a plane, or a tied vote, is predicted feasible.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .scenarios import Stream, substream

logger = logging.getLogger(__name__)

ENSEMBLE_FORMAT = "jcc.ensemble/1"
PREDICT_MODES = ("vote_sign", "mean_affine")
MAX_REDRAWS = 10
_TAU = 1e-12                              # curvature floor for duplicate points


@dataclass(frozen=True)
class LabeledSet:
    features: np.ndarray                  # (n, d)
    labels: np.ndarray                    # (n,) in {-1, +1}
    feature_names: tuple = ()
    origin: tuple = ()                    # per-row provenance, e.g. (run id, alpha)

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=int)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ValueError(f"features {x.shape} and labels {y.shape} do not line up")
        if np.isnan(x).any():
            raise ValueError("features contain NaN")
        if not np.isin(y, (-1, 1)).all():
            raise ValueError("labels must be -1 or +1")
        if self.feature_names and len(self.feature_names) != x.shape[1]:
            raise ValueError("one feature name per column expected")
        if self.origin and len(self.origin) != x.shape[0]:
            raise ValueError("one origin entry per row expected")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def counts(self) -> dict:
        return {-1: int(np.sum(self.labels == -1)), 1: int(np.sum(self.labels == 1))}

    def subset(self, idx) -> "LabeledSet":
        idx = np.asarray(idx, dtype=int)
        origin = tuple(self.origin[i] for i in idx) if self.origin else ()
        return LabeledSet(self.features[idx], self.labels[idx], self.feature_names, origin)


@dataclass
class Hyperplane:
    w: np.ndarray
    b: float
    meta: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return int(np.asarray(self.w).shape[0])

    def scaled(self, factor: float) -> "Hyperplane":
        return Hyperplane(np.asarray(self.w) * factor, self.b * factor, dict(self.meta))


@dataclass
class Ensemble:
    planes: tuple
    weights: np.ndarray = None            # default uniform
    feature_order: tuple = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.planes = tuple(self.planes)
        if not self.planes:
            raise ValueError("an ensemble needs at least one plane")
        dims = {h.dim for h in self.planes}
        if len(dims) != 1:
            raise ValueError(f"planes disagree on dimension: {sorted(dims)}")
        if self.feature_order and len(self.feature_order) != self.dim:
            raise ValueError("feature_order length differs from the plane dimension")
        if self.weights is None:
            self.weights = np.full(len(self.planes), 1.0 / len(self.planes))
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (len(self.planes),) or (w < 0).any() or w.sum() <= 0:
            raise ValueError("weights must be one non-negative value per plane, not all zero")
        self.weights = w / w.sum()

    @property
    def dim(self) -> int:
        return self.planes[0].dim

    @property
    def size(self) -> int:
        return len(self.planes)

    def head(self, m: int) -> "Ensemble":
        """The first m planes, re-weighted uniformly."""
        return Ensemble(self.planes[:m], None, self.feature_order, dict(self.meta))

    def to_json(self) -> dict:
        return {"format": ENSEMBLE_FORMAT,
                "feature_order": list(self.feature_order),
                "weights": self.weights.tolist(),
                "planes": [{"w": np.asarray(h.w, dtype=float).tolist(), "b": float(h.b),
                            "meta": _plain(h.meta)} for h in self.planes],
                "training_meta": _plain(self.meta)}

    @classmethod
    def from_json(cls, obj: dict) -> "Ensemble":
        if obj.get("format") != ENSEMBLE_FORMAT:
            raise ValueError(f"unsupported ensemble format {obj.get('format')!r}")
        planes = [Hyperplane(np.asarray(p["w"], dtype=float), float(p["b"]), dict(p.get("meta", {})))
                  for p in obj["planes"]]
        return cls(tuple(planes), np.asarray(obj["weights"], dtype=float),
                   tuple(obj["feature_order"]), dict(obj.get("training_meta", {})))


_META_ARRAYS = ("alphas", "dual_history", "mean", "scale", "bootstrap")


def _plain(meta: dict) -> dict:
    """JSON-safe scalars of a meta dict; the per-sample arrays stay in memory only."""
    out = {}
    for k, v in meta.items():
        if k in _META_ARRAYS:
            continue
        if isinstance(v, (np.floating, np.integer, np.bool_)):
            v = v.item()
        if isinstance(v, float) and not np.isfinite(v):
            v = None
        if isinstance(v, (list, tuple)):
            v = [x.item() if isinstance(x, np.generic) else x for x in v]
        out[k] = v
    return out


# ---------------------------------------------------------------------------------------------
# Single SVM
# ---------------------------------------------------------------------------------------------

def train_svm(data: LabeledSet, C: float = 1.0, tol: float = 1e-4, max_epochs: int = 1000,
              rng: Optional[np.random.Generator] = None) -> Hyperplane:
    """Soft-margin linear SVM with a free bias, solved by SMO (see module docstring)."""
    if not C > 0:
        raise ValueError(f"C must be > 0, got {C}")
    n = len(data)
    if n < 2:
        raise ValueError("need at least two samples")
    counts = data.counts()
    if counts[-1] == 0 or counts[1] == 0:
        raise ValueError(f"single-class training data: {counts}")
    rng = rng if rng is not None else substream(0)

    x = data.features
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale <= 1e-12] = 1.0
    order = rng.permutation(n)
    z = ((x - mean) / scale)[order]
    y = data.labels.astype(float)[order]
    q_diag = np.einsum("ij,ij->i", z, z)

    alpha = np.zeros(n)
    w = np.zeros(z.shape[1])
    grad = -np.ones(n)                     # gradient of 1/2 a'Qa - sum(a)
    history = []
    converged = False
    gap = float("inf")
    steps = 0
    for _ in range(max_epochs * n):
        yg = -y * grad
        up = np.where(y > 0, alpha < C, alpha > 0)
        low = np.where(y > 0, alpha > 0, alpha < C)
        i = int(np.flatnonzero(up)[np.argmax(yg[up])])
        m_up, m_low = yg[i], float(yg[low].min())
        gap = float(m_up - m_low)
        if gap <= tol:
            converged = True
            break
        cand = np.flatnonzero(low & (yg < m_up))
        curv = q_diag[i] + q_diag[cand] - 2.0 * (z[cand] @ z[i])
        curv = np.maximum(curv, _TAU)
        drop = m_up - yg[cand]
        k = int(np.argmax(drop * drop / curv))
        j = int(cand[k])
        cap_i = C - alpha[i] if y[i] > 0 else alpha[i]
        cap_j = alpha[j] if y[j] > 0 else C - alpha[j]
        t = min(drop[k] / curv[k], cap_i, cap_j)
        alpha[i] = (C if y[i] > 0 else 0.0) if t == cap_i else alpha[i] + y[i] * t
        alpha[j] = (0.0 if y[j] > 0 else C) if t == cap_j else alpha[j] - y[j] * t
        steps += 1
        w += t * (z[i] - z[j])
        grad = y * (z @ w) - 1.0
        if steps % n == 0:
            history.append(float(alpha.sum() - 0.5 * w @ w))
    epochs = max(1, -(-steps // n))
    history.append(float(alpha.sum() - 0.5 * w @ w))
    if not converged:
        logger.warning("SVM did not converge in %d epochs (C=%g, tol=%g, gap %.3g)",
                       max_epochs, C, tol, gap)
    else:
        logger.debug("SVM converged after %d pair steps, dual %.6g", steps, history[-1])

    yg = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b_z = float(yg[free].mean())
    else:
        up = np.where(y > 0, alpha < C, alpha > 0)
        low = np.where(y > 0, alpha > 0, alpha < C)
        b_z = 0.5 * (float(yg[up].max()) + float(yg[low].min()))

    alphas = np.empty(n)
    alphas[order] = alpha
    w_raw = w / scale
    b_raw = float(b_z - w_raw @ mean)
    meta = {"C": float(C), "tol": float(tol), "epochs": epochs, "steps": steps,
            "converged": converged, "kkt_gap": gap, "n_train": n,
            "support_vectors": int(np.sum(alpha > 0)), "b_z": b_z,
            "alphas": alphas, "dual_history": history, "mean": mean, "scale": scale}
    return Hyperplane(w_raw, b_raw, meta)


def _as_matrix(x, dim: int):
    a = np.asarray(x, dtype=float)
    if a.ndim not in (1, 2) or a.shape[-1] != dim:
        raise ValueError(f"input has shape {a.shape}, expected ({dim},) or (k, {dim})")
    return a


def decision(h: Hyperplane, x):
    """w . x + b for one point (float) or a (k, d) batch (array)."""
    a = _as_matrix(x, h.dim)
    score = a @ np.asarray(h.w, dtype=float) + h.b
    return float(score) if a.ndim == 1 else score


def sign(score):
    """+1 for score >= 0, else -1."""
    out = np.where(np.asarray(score) >= 0.0, 1, -1)
    return int(out) if out.ndim == 0 else out


def predict(h: Hyperplane, x):
    return sign(decision(h, x))


# ---------------------------------------------------------------------------------------------
# Bagging
# ---------------------------------------------------------------------------------------------

def bootstrap(data, rng: np.random.Generator) -> np.ndarray:
    """n indices drawn uniformly with replacement, n = len(data) (or data itself if an int)."""
    n = data if isinstance(data, (int, np.integer)) else len(data)
    if n < 1:
        raise ValueError("cannot bootstrap an empty set")
    return rng.integers(0, n, size=n)


def out_of_bag(indices, n: int) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(indices, dtype=int)] = False
    return np.flatnonzero(mask)


def _train_plane(args):
    data, m, C, seed, tol, max_epochs = args
    rng = substream(seed, Stream.BAGGING, m)
    for attempt in range(MAX_REDRAWS):
        idx = bootstrap(data, rng)
        labels = data.labels[idx]
        if (labels == 1).any() and (labels == -1).any():
            break
        logger.debug("plane %d: single-class bootstrap, redrawing (%d)", m, attempt + 1)
    else:
        raise ValueError(f"plane {m}: {MAX_REDRAWS} bootstrap draws in a row held a single class")
    h = train_svm(data.subset(idx), C, tol, max_epochs, substream(seed, Stream.BAGGING, m, 1))
    oob = out_of_bag(idx, len(data))
    h.meta["bootstrap"] = idx
    h.meta["unique_fraction"] = float(np.unique(idx).size / len(data))
    h.meta["oob_size"] = int(oob.size)
    h.meta["oob_accuracy"] = (float(np.mean(predict(h, data.features[oob]) == data.labels[oob]))
                              if oob.size else float("nan"))
    return h


def train_bagging(data: LabeledSet, M: int = 8, C: float = 1.0, seed: int = 0, tol: float = 1e-4,
                  max_epochs: int = 1000, jobs: int = 1) -> Ensemble:
    """
    M SVMs on independent bootstrap draws, uniformly weighted.

    Plane m draws from its own substream (seed, BAGGING, m), so the first M planes of a larger
    ensemble with the same seed are exactly the planes of the size-M ensemble.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    tasks = [(data, m, C, seed, tol, max_epochs) for m in range(M)]
    if jobs > 1 and M > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, M)) as pool:
            planes = list(pool.map(_train_plane, tasks))
    else:
        planes = [_train_plane(t) for t in tasks]
    oob = [h.meta["oob_accuracy"] for h in planes]
    meta = {"M": M, "C": float(C), "seed": int(seed), "tol": float(tol), "n_train": len(data),
            "oob_accuracy": oob,
            "converged": all(h.meta["converged"] for h in planes)}
    logger.info("bagged %d SVMs on %d samples (mean OOB accuracy %.3f)", M, len(data),
                float(np.nanmean(oob)) if not np.all(np.isnan(oob)) else float("nan"))
    return Ensemble(tuple(planes), None, data.feature_names, meta)


def as_ensemble(model) -> Ensemble:
    return model if isinstance(model, Ensemble) else Ensemble((model,))


def plane_scores(ens: Ensemble, x) -> np.ndarray:
    """(k, M) raw scores of every plane (k = 1 for a single point)."""
    a = np.atleast_2d(_as_matrix(x, ens.dim))
    w = np.stack([np.asarray(h.w, dtype=float) for h in ens.planes], axis=1)   # (d, M)
    b = np.array([h.b for h in ens.planes])
    return a @ w + b


def ensemble_predict(ens, x, mode: str = "vote_sign"):
    """
    vote_sign:    sign(sum_m weight_m * sign(score_m))
    mean_affine:  sign(sum_m weight_m * score_m)
    Ties go to +1. Returns an int for one point, an array for a batch.
    """
    if mode not in PREDICT_MODES:
        raise ValueError(f"mode must be one of {PREDICT_MODES}, got {mode!r}")
    ens = as_ensemble(ens)
    single = np.asarray(x).ndim == 1
    scores = plane_scores(ens, x)
    if mode == "vote_sign":
        agg = sign(scores) @ ens.weights
    else:
        agg = scores @ ens.weights
    labels = sign(agg)
    return int(labels[0]) if single else labels


def metrics(ens, test: LabeledSet, mode: str = "vote_sign") -> dict:
    if len(test) == 0:
        raise ValueError("empty test set")
    pred = np.atleast_1d(ensemble_predict(ens, test.features, mode))
    y = test.labels
    tp = int(np.sum((y == 1) & (pred == 1)))
    tn = int(np.sum((y == -1) & (pred == -1)))
    fp = int(np.sum((y == 1) & (pred == -1)))      # feasible point rejected
    fn = int(np.sum((y == -1) & (pred == 1)))      # infeasible point accepted
    return {"n": len(test), "accuracy": (tp + tn) / len(test), "false_negatives": fn,
            "false_positives": fp, "true_positives": tp, "true_negatives": tn,
            # rows: true label (-1, +1); columns: predicted (-1, +1)
            "confusion": [[tn, fn], [fp, tp]]}


def bagging_diagnostics(ens: Ensemble, data: LabeledSet) -> dict:
    """
    Individual error eps, mean pairwise correlation rho of the planes' error indicators, and the
    approximate ensemble error rho*eps + (1 - rho)*eps/M. Descriptive only.
    """
    errors = (sign(plane_scores(ens, data.features)) != data.labels[:, None]).astype(float)
    eps = float(errors.mean())
    pairs = []
    for i, j in combinations(range(ens.size), 2):
        a, b = errors[:, i], errors[:, j]
        if a.std() > 0 and b.std() > 0:
            pairs.append(float(np.corrcoef(a, b)[0, 1]))
    rho = float(np.mean(pairs)) if pairs else float("nan")
    approx = rho * eps + (1 - rho) * eps / ens.size if pairs else eps
    return {"M": ens.size, "individual_error": eps, "per_plane_error": errors.mean(axis=0).tolist(),
            "rho": rho, "approx_ensemble_error": float(approx),
            "ensemble_error": 1.0 - metrics(ens, data)["accuracy"]}

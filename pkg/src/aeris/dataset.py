"""Supervised corpus for the OP predictor.

Each row holds 13 features, in the fixed order of :data:`FEATURE_NAMES`,
plus the Monte-Carlo OP label. The per-hop pairs ``(m_s, m_d)``,
``(alpha_s, alpha_d)`` and ``(beta_s, beta_d)`` are drawn independently
from the same range.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._jit import thread_count
from .analytic import SystemConfig
from .distributions import RngHandle
from .errors import DatasetFormatError, DatasetGenerationError, ParameterError
from .geometry import CylindricalPosition, link_spreads, sample_position
from .matching import HopPairParams
from .simulator import TrialBudget, estimate_op

__all__ = [
    "FEATURE_NAMES",
    "LABEL_NAME",
    "FeatureRanges",
    "DatasetRow",
    "Dataset",
    "DatasetSplit",
    "sample_features",
    "config_from_features",
    "label_row",
    "generate_dataset",
    "split_dataset",
    "write_rows",
    "read_rows",
]

FEATURE_NAMES = (
    "gamma_db", "n", "omega_r", "r_r", "h_r",
    "m_s", "m_d", "alpha_s", "alpha_d", "beta_s", "beta_d",
    "eta", "r_th",
)
LABEL_NAME = "op_sim"
HEADER = FEATURE_NAMES + (LABEL_NAME,)
N_FEATURES = len(FEATURE_NAMES)

# stream tags under the master seed
_FEATURE_STREAM = 0
_LABEL_STREAM = 1


@dataclass(frozen=True)
class FeatureRanges:
    """Centres and half-widths of the scalar features.

    Defaults follow the training setup: SNR 5 +/- 15 dB, N 20 +/- 10,
    m 2 +/- 0.5, alpha 2.5 +/- 0.5, beta 1 +/- 0.2, eta 2.7 +/- 0.3,
    R_th 5 +/- 3 b/s/Hz.
    """

    gamma_db: tuple[float, float] = (5.0, 15.0)
    n: tuple[float, float] = (20.0, 10.0)
    m: tuple[float, float] = (2.0, 0.5)
    alpha: tuple[float, float] = (2.5, 0.5)
    beta: tuple[float, float] = (1.0, 0.2)
    eta: tuple[float, float] = (2.7, 0.3)
    r_th: tuple[float, float] = (5.0, 3.0)

    def __post_init__(self):
        for name in ("gamma_db", "n", "m", "alpha", "beta", "eta", "r_th"):
            c, eps = getattr(self, name)
            if not (math.isfinite(c) and math.isfinite(eps) and eps >= 0.0):
                raise ParameterError(f"range {name} must have finite centre and non-negative width")
        if self.n[0] - self.n[1] < 0.5:
            raise ParameterError("N range must stay >= 1 after rounding")
        if self.m[0] - self.m[1] < 0.5:
            raise ParameterError("m range must stay >= 0.5")
        if self.alpha[0] - self.alpha[1] <= 1.0:
            raise ParameterError("alpha range must stay > 1")
        if self.beta[0] - self.beta[1] <= 0.0 or self.eta[0] - self.eta[1] <= 0.0:
            raise ParameterError("beta and eta ranges must stay positive")
        if self.r_th[0] - self.r_th[1] <= 0.0:
            raise ParameterError("R_th range must stay positive")

    @classmethod
    def fixed(cls) -> "FeatureRanges":
        """Zero-width ranges at the default centres."""
        d = cls()
        return cls(**{k: (getattr(d, k)[0], 0.0) for k in ("gamma_db", "n", "m", "alpha", "beta", "eta", "r_th")})


@dataclass(frozen=True)
class DatasetRow:
    features: tuple
    label: float


class Dataset:
    """Rows as a ``(n, 13)`` feature matrix and a length-``n`` label vector."""

    def __init__(self, features, labels):
        features = np.asarray(features, dtype=float).reshape(-1, N_FEATURES)
        labels = np.asarray(labels, dtype=float).reshape(-1)
        if features.shape[0] != labels.shape[0]:
            raise ParameterError("features and labels have different row counts")
        self.features = features
        self.labels = labels

    @classmethod
    def from_rows(cls, rows):
        rows = list(rows)
        return cls([r.features for r in rows], [r.label for r in rows])

    def __len__(self):
        return self.labels.shape[0]

    def __getitem__(self, i):
        return DatasetRow(tuple(self.features[i].tolist()), float(self.labels[i]))

    def subset(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx])

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


@dataclass(frozen=True)
class DatasetSplit:
    train: Dataset
    validation: Dataset
    test: Dataset


def _uniform(g, centre_eps):
    c, eps = centre_eps
    return c if eps == 0.0 else float(g.uniform(c - eps, c + eps))


def sample_features(ranges: FeatureRanges, rng: RngHandle) -> np.ndarray:
    """One 13-feature vector; N is rounded to the nearest integer."""
    g = rng.generator
    pos = sample_position(rng)
    gamma_db = _uniform(g, ranges.gamma_db)
    n = float(max(1, round(_uniform(g, ranges.n))))
    m_s, m_d = _uniform(g, ranges.m), _uniform(g, ranges.m)
    a_s, a_d = _uniform(g, ranges.alpha), _uniform(g, ranges.alpha)
    b_s, b_d = _uniform(g, ranges.beta), _uniform(g, ranges.beta)
    eta = _uniform(g, ranges.eta)
    r_th = _uniform(g, ranges.r_th)
    return np.array([gamma_db, n, pos.azimuth, pos.radial, pos.height,
                     m_s, m_d, a_s, a_d, b_s, b_d, eta, r_th])


def config_from_features(features, *, kappa: float = 1.0, quadrature_order: int = 30) -> SystemConfig:
    """Scenario for one feature vector; spreads come from the RIS position."""
    f = [float(v) for v in features]
    if len(f) != N_FEATURES:
        raise ParameterError(f"expected {N_FEATURES} features, got {len(f)}")
    gamma_db, n, omega, r, h, m_s, m_d, a_s, a_d, b_s, b_d, eta, r_th = f
    om_s, om_d = link_spreads(CylindricalPosition(omega, r, h), eta)
    hop = HopPairParams.from_values(m_s, m_d, om_s, om_d, a_s, a_d, b_s, b_d)
    return SystemConfig(
        n_elements=int(round(n)), avg_snr_db=gamma_db, target_se=r_th, hop_params=hop,
        kappa=kappa, quadrature_order=quadrature_order,
    )


def label_row(features, budget: TrialBudget) -> DatasetRow:
    """Label a feature vector with its Monte-Carlo outage probability."""
    op, _ = estimate_op(config_from_features(features), budget)
    return DatasetRow(tuple(float(v) for v in features), op)


def generate_dataset(count: int, ranges: FeatureRanges, budget: TrialBudget, master_seed: int) -> Dataset:
    """``count`` labelled rows, fully determined by the arguments.

    Row ``i`` draws its features from stream ``(0, i)`` and its channels from
    stream ``(1, i)`` of ``master_seed``; ``budget.seed`` is not used.
    """
    if isinstance(count, bool) or int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count!r}")
    count = int(count)
    root = RngHandle(master_seed)
    label_seq = np.random.SeedSequence(root.seed, spawn_key=(_LABEL_STREAM,))
    row_seeds = label_seq.generate_state(count, dtype=np.uint64)

    def work(i):
        feats = sample_features(ranges, root.child(_FEATURE_STREAM).child(i))
        return label_row(feats, TrialBudget(budget.trials, int(row_seeds[i])))

    features = np.empty((count, N_FEATURES))
    labels = np.empty(count)
    failed = []
    workers = min(thread_count(), count)

    def collect(i, fut_or_fn):
        try:
            row = fut_or_fn()
        except Exception:  # noqa: BLE001 - reported with the row index below
            failed.append(i)
            return
        features[i] = row.features
        labels[i] = row.label

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(work, i) for i in range(count)]
            for i, fut in enumerate(futures):
                collect(i, fut.result)
    else:
        for i in range(count):
            collect(i, lambda i=i: work(i))
    if failed:
        raise DatasetGenerationError(f"{len(failed)} of {count} rows failed to label", failed)
    return Dataset(features, labels)


def split_dataset(rows: Dataset, seed: int) -> DatasetSplit:
    """Shuffled 80/10/10 train/validation/test split."""
    n = len(rows)
    if n < 10:
        raise ParameterError(f"need at least 10 rows to split, got {n}")
    perm = RngHandle(seed).generator.permutation(n)
    n_train = int(round(0.8 * n))
    n_val = int(round(0.1 * n))
    return DatasetSplit(
        train=rows.subset(perm[:n_train]),
        validation=rows.subset(perm[n_train:n_train + n_val]),
        test=rows.subset(perm[n_train + n_val:]),
    )


def write_rows(path, rows: Dataset) -> None:
    """Write a comma-separated corpus with a header; floats use ``repr`` (round-trip exact)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(HEADER)
        for feats, label in zip(rows.features, rows.labels):
            w.writerow([repr(float(v)) for v in feats] + [repr(float(label))])


def read_rows(path) -> Dataset:
    """Parse a corpus written by :func:`write_rows`."""
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("empty corpus file", line=1) from None
        header = [h.strip() for h in header]
        for i, expected in enumerate(HEADER):
            got = header[i] if i < len(header) else None
            if got != expected:
                raise DatasetFormatError(
                    f"header column {i + 1} should be {expected!r}, found {got!r}", line=1, column=expected
                )
        if len(header) != len(HEADER):
            raise DatasetFormatError(f"unexpected extra header column {header[len(HEADER)]!r}", line=1)
        values = []
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) != len(HEADER):
                raise DatasetFormatError(f"expected {len(HEADER)} fields, found {len(row)}", line=line)
            try:
                values.append([float(v) for v in row])
            except ValueError as exc:
                raise DatasetFormatError(str(exc), line=line) from None
    if not values:
        raise DatasetFormatError("corpus has a header but no rows", line=2)
    arr = np.array(values)
    return Dataset(arr[:, :N_FEATURES], arr[:, N_FEATURES])

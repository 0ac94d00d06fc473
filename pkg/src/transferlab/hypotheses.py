"""Hypothesis representations, empirical risks, and ERM over enumerable classes.

Two kinds of classifiers are supported: finite-enumerated classes given by
explicit 0/1 label patterns over a finite support, and the one-sided threshold
class on the line (label 1 iff x <= t).  Every optimization in the package is
exact: threshold classes are reduced to finite classes by projection onto the
relevant points, so sup/argmin computations never rely on numeric search.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

FINITE = "finite-enumerated"
THRESHOLD = "one-sided-threshold"


@dataclass(frozen=True)
class SupportPoint:
    """A point of a finite support: contiguous integer id plus a coordinate."""

    index: int
    coordinate: float = 0.0


@dataclass(frozen=True)
class Hypothesis:
    """A classifier: either a label pattern over a finite support or a threshold.

    Threshold form labels 1 on x <= threshold.  A projected threshold member
    carries both its representative threshold and the labels it induces.
    """

    kind: str
    labels: tuple[int, ...] | None = None
    threshold: float | None = None

    def predict(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs)
        if self.kind == THRESHOLD and self.labels is None:
            return (xs <= self.threshold).astype(np.int8)
        if np.issubdtype(xs.dtype, np.integer):
            return np.asarray(self.labels, dtype=np.int8)[xs]
        if self.threshold is not None:
            return (xs <= self.threshold).astype(np.int8)
        raise TypeError("finite hypothesis cannot label raw coordinates")

    def __call__(self, xs):
        return self.predict(xs)


def finite_hypothesis(labels) -> Hypothesis:
    return Hypothesis(kind=FINITE, labels=tuple(int(b) for b in labels))


def threshold_hypothesis(t: float, labels=None) -> Hypothesis:
    lab = None if labels is None else tuple(int(b) for b in labels)
    return Hypothesis(kind=THRESHOLD, labels=lab, threshold=float(t))


@dataclass(frozen=True)
class LabeledSample:
    """Ordered i.i.d. draws (x, y) plus the seed that generated them.

    xs holds support indices (integer dtype) for draws from a finite-support
    joint, or raw coordinates (float dtype) for draws from a line scenario.
    """

    xs: np.ndarray
    ys: np.ndarray
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "xs", np.atleast_1d(np.asarray(self.xs)))
        object.__setattr__(self, "ys", np.atleast_1d(np.asarray(self.ys, dtype=np.int8)))
        if self.xs.shape != self.ys.shape:
            raise ValueError("xs and ys must have equal length")

    def __len__(self) -> int:
        return int(self.xs.size)

    @property
    def points(self) -> list[tuple]:
        return [(x, int(y)) for x, y in zip(self.xs.tolist(), self.ys.tolist())]


@dataclass(frozen=True)
class UnlabeledSample:
    xs: np.ndarray
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "xs", np.atleast_1d(np.asarray(self.xs)))

    def __len__(self) -> int:
        return int(self.xs.size)


def empty_labeled(seed: int = 0, discrete: bool = True) -> LabeledSample:
    dtype = np.int64 if discrete else np.float64
    return LabeledSample(np.empty(0, dtype=dtype), np.empty(0, dtype=np.int8), seed)


@dataclass
class HypothesisClass:
    """An enumerable hypothesis class.

    kind FINITE: `members` lists every label pattern (no duplicates), over a
    support of size `support_size`.  kind THRESHOLD: the un-projected one-sided
    threshold class on the line; enumeration happens through `project_class`.
    """

    kind: str
    members: list[Hypothesis] | None = None
    vc_dim: int = 1
    support_size: int | None = None
    support_coords: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == FINITE:
            if not self.members:
                raise ValueError("finite class needs at least one member")
            if self.support_size is None:
                self.support_size = len(self.members[0].labels)
            seen = set()
            for h in self.members:
                if h.labels is None or len(h.labels) != self.support_size:
                    raise ValueError("member label length differs from support size")
                if h.labels in seen:
                    raise ValueError("duplicate label pattern in enumeration")
                seen.add(h.labels)
        if self.vc_dim < 1:
            raise ValueError("vc_dim must be >= 1")

    def __len__(self) -> int:
        if self.members is None:
            raise TypeError("threshold class is not enumerated; project it first")
        return len(self.members)

    @cached_property
    def label_matrix(self) -> np.ndarray:
        """Member labels stacked as a (members, support) float array."""
        if self.members is None:
            raise TypeError("threshold class is not enumerated; project it first")
        return np.array([h.labels for h in self.members], dtype=np.float64)


def finite_class(patterns, vc_dim: int | None = None,
                 support_coords=None) -> HypothesisClass:
    members = [finite_hypothesis(p) for p in patterns]
    size = len(members[0].labels)
    if vc_dim is None:
        # a full enumeration over s points shatters all of them
        vc_dim = size if len(members) == 2 ** size else max(1, int(np.log2(len(members))))
    coords = None if support_coords is None else np.asarray(support_coords, dtype=np.float64)
    return HypothesisClass(kind=FINITE, members=members, vc_dim=vc_dim,
                           support_size=size, support_coords=coords)


def full_cube_class(n_points: int, support_coords=None) -> HypothesisClass:
    """All 2^n label patterns over n support points."""
    if n_points > 16:
        raise ValueError("full enumeration beyond 2^16 patterns refused")
    patterns = ((i >> np.arange(n_points)) & 1 for i in range(2 ** n_points))
    return finite_class([tuple(int(b) for b in p) for p in patterns],
                        vc_dim=n_points, support_coords=support_coords)


def threshold_class() -> HypothesisClass:
    return HypothesisClass(kind=THRESHOLD, members=None, vc_dim=1)


def project_class(cls: HypothesisClass, points) -> HypothesisClass:
    """Finite reduction of the threshold class onto a point set.

    Returns the n+1 label patterns the one-sided threshold class induces on n
    distinct points, each realized by a representative threshold: one below all
    points, midpoints between neighbors, one above all points.  Duplicate
    points collapse.  A finite class projects to itself.
    """
    if cls.kind == FINITE:
        return cls
    pts = np.unique(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        raise ValueError("cannot project onto an empty point set")
    n = pts.size
    reps = np.empty(n + 1)
    reps[0] = pts[0] - 1.0
    reps[1:n] = 0.5 * (pts[:-1] + pts[1:])
    reps[n] = pts[-1] + 1.0
    members = []
    for i, t in enumerate(reps):
        labels = tuple(1 if j < i else 0 for j in range(n))
        members.append(threshold_hypothesis(t, labels))
    return HypothesisClass(kind=FINITE, members=members, vc_dim=1,
                           support_size=n, support_coords=pts)


def empirical_risk(h: Hypothesis, sample: LabeledSample) -> float:
    """Fraction of sample pairs (x, y) with h(x) != y; 0 on an empty sample."""
    if len(sample) == 0:
        return 0.0
    return float(np.mean(h.predict(sample.xs) != sample.ys))


def empirical_disagreement(h: Hypothesis, h2: Hypothesis, sample) -> float:
    """Fraction of sample points where the two hypotheses disagree."""
    if len(sample) == 0:
        return 0.0
    return float(np.mean(h.predict(sample.xs) != h2.predict(sample.xs)))


def erm(cls: HypothesisClass, sample: LabeledSample) -> Hypothesis:
    """Empirical risk minimizer with deterministic tie-breaking.

    Ties go to the lowest enumeration index; for the threshold class that is
    the smallest representative threshold.  An empty sample returns the
    tie-break member.
    """
    if cls.kind == THRESHOLD:
        if len(sample) == 0:
            return erm(project_class(cls, [0.0]), sample)
        return _threshold_erm(sample)
    if len(sample) == 0:
        return cls.members[0]
    risks = member_risks(cls, sample)
    return cls.members[int(np.argmin(risks))]


def member_risks(cls: HypothesisClass, sample: LabeledSample) -> np.ndarray:
    """Empirical risk of every member, exactly, as one matrix product."""
    if len(sample) == 0:
        return np.zeros(len(cls))
    n0, n1 = _label_counts(cls, sample)
    lab = cls.label_matrix
    n = len(sample)
    return (lab @ (n0 - n1) + n1.sum()) / n


def member_disagreements(cls: HypothesisClass, ref: Hypothesis, sample) -> np.ndarray:
    """Empirical disagreement of every member with `ref` on the sample points."""
    if len(sample) == 0:
        return np.zeros(len(cls))
    counts = _point_counts(cls, sample)
    lab = cls.label_matrix
    ref_lab = _labels_on_support(cls, ref)
    n = counts.sum()
    # 1[h != ref] = h + ref - 2 h ref; counts are integers, so folding the
    # reference into the weight vector keeps every sum exact
    return (lab @ (counts * (1.0 - 2.0 * ref_lab)) + np.dot(ref_lab, counts)) / n


def _labels_on_support(cls: HypothesisClass, h: Hypothesis) -> np.ndarray:
    if h.labels is not None and len(h.labels) == cls.support_size:
        return np.asarray(h.labels, dtype=np.float64)
    if h.threshold is not None and cls.support_coords is not None:
        return (cls.support_coords <= h.threshold).astype(np.float64)
    raise TypeError("hypothesis is not expressible over this class's support")


def _sample_indices(cls: HypothesisClass, xs: np.ndarray) -> np.ndarray:
    if np.issubdtype(xs.dtype, np.integer):
        return xs.astype(np.int64)
    if cls.support_coords is None:
        raise TypeError("float-coordinate sample over a class without coordinates")
    idx = np.searchsorted(cls.support_coords, xs)
    idx = np.clip(idx, 0, cls.support_coords.size - 1)
    if not np.array_equal(cls.support_coords[idx], xs):
        raise ValueError("sample contains points outside the projected support")
    return idx


def _label_counts(cls: HypothesisClass, sample: LabeledSample):
    idx = _sample_indices(cls, sample.xs)
    s = cls.support_size
    n1 = np.bincount(idx[sample.ys == 1], minlength=s).astype(np.float64)
    n0 = np.bincount(idx[sample.ys == 0], minlength=s).astype(np.float64)
    return n0, n1


def _point_counts(cls: HypothesisClass, sample) -> np.ndarray:
    idx = _sample_indices(cls, sample.xs)
    return np.bincount(idx, minlength=cls.support_size).astype(np.float64)


def _threshold_erm(sample: LabeledSample) -> Hypothesis:
    """Exact threshold ERM via prefix sums over the sorted unique points."""
    xs = np.asarray(sample.xs, dtype=np.float64)
    ys = np.asarray(sample.ys)
    pts, inv = np.unique(xs, return_inverse=True)
    ones = np.bincount(inv, weights=(ys == 1), minlength=pts.size)
    zeros = np.bincount(inv, weights=(ys == 0), minlength=pts.size)
    # cut i labels the first i unique points 1: errors = zeros left + ones right
    errors = np.concatenate(([0.0], np.cumsum(zeros))) + \
        np.concatenate((np.cumsum(ones[::-1])[::-1], [0.0]))
    cut = int(np.argmin(errors))
    n = pts.size
    if cut == 0:
        t = pts[0] - 1.0
    elif cut == n:
        t = pts[-1] + 1.0
    else:
        t = 0.5 * (pts[cut - 1] + pts[cut])
    labels = tuple(1 if j < cut else 0 for j in range(n))
    return threshold_hypothesis(t, labels)

"""Synthetic multi-site aging cohorts with known ground truth.

Feature construction per visit: the subject's chronological age at the
visit is baseline age plus visit_time. Diagnosis shifts an unobserved
effective age by a baseline offset plus a progression rate times
visit_time; features are a fixed random linear read of smooth basis
functions of effective age, plus a site-specific offset direction, plus
white noise. The recorded label is always chronological age, so group
effects are recoverable as brain-age gaps rather than label noise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CohortParseError, InvalidArgumentError, InvalidFoldError

GROUPS = ("HC", "sMCI", "pMCI", "AD")

FIXED_COLUMNS = ("subject_id", "visit_index", "visit_time", "site", "age", "group")

DEFAULT_GROUP_FRACTIONS = {"HC": 0.36, "sMCI": 0.28, "pMCI": 0.13, "AD": 0.23}
DEFAULT_BASELINE_OFFSETS = {"HC": 0.0, "sMCI": 0.5, "pMCI": 2.5, "AD": 5.0}
DEFAULT_PROGRESSION_RATES = {"HC": 0.0, "sMCI": 0.0, "pMCI": 0.8, "AD": 1.0}


@dataclass(frozen=True)
class SyntheticSpec:
    n_subjects: int = 500
    n_sites: int = 5
    age_range: tuple = (20.0, 90.0)
    feature_dim: int = 32
    site_effect_strength: float = 1.0
    noise_std: float = 0.5
    group_fractions: dict = field(default_factory=lambda: dict(DEFAULT_GROUP_FRACTIONS))
    baseline_offsets: dict = field(default_factory=lambda: dict(DEFAULT_BASELINE_OFFSETS))
    progression_rates: dict = field(default_factory=lambda: dict(DEFAULT_PROGRESSION_RATES))
    visits_per_subject: int = 1
    visit_spacing: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_subjects < 1:
            raise InvalidArgumentError("n_subjects must be >= 1")
        if self.n_sites < 1:
            raise InvalidArgumentError("n_sites must be >= 1")
        lo, hi = self.age_range
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise InvalidArgumentError(f"age_range must be finite with lo < hi, got {self.age_range}")
        if self.feature_dim < 1:
            raise InvalidArgumentError("feature_dim must be >= 1")
        if self.site_effect_strength < 0:
            raise InvalidArgumentError("site_effect_strength must be >= 0")
        if self.noise_std < 0:
            raise InvalidArgumentError("noise_std must be >= 0")
        if self.visits_per_subject < 1:
            raise InvalidArgumentError("visits_per_subject must be >= 1")
        if self.visit_spacing < 0:
            raise InvalidArgumentError("visit_spacing must be >= 0")
        if set(self.group_fractions) - set(GROUPS):
            raise InvalidArgumentError(f"unknown groups in fractions: {self.group_fractions}")
        total = sum(self.group_fractions.values())
        if abs(total - 1.0) > 1e-9:
            raise InvalidArgumentError(f"group fractions must sum to 1, got {total}")
        if any(v < 0 for v in self.group_fractions.values()):
            raise InvalidArgumentError("group fractions must be non-negative")


@dataclass
class Cohort:
    subject_id: np.ndarray  # str per row
    visit_index: np.ndarray  # int per row
    visit_time: np.ndarray  # years since baseline
    site: np.ndarray  # str per row
    age: np.ndarray  # chronological age at the visit
    group: np.ndarray  # str per row
    features: np.ndarray  # (n_rows, feature_dim)

    @property
    def n_rows(self) -> int:
        return self.age.size

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def select(self, mask) -> "Cohort":
        mask = np.asarray(mask)
        return Cohort(
            subject_id=self.subject_id[mask],
            visit_index=self.visit_index[mask],
            visit_time=self.visit_time[mask],
            site=self.site[mask],
            age=self.age[mask],
            group=self.group[mask],
            features=self.features[mask],
        )

    def subjects(self) -> np.ndarray:
        """Unique subject ids in first-appearance order."""
        _, first = np.unique(self.subject_id, return_index=True)
        return self.subject_id[np.sort(first)]

    def baseline_ages(self) -> dict:
        """Subject id -> age at the smallest visit index."""
        out = {}
        order = np.lexsort((self.visit_index, self.subject_id))
        for i in order:
            out.setdefault(str(self.subject_id[i]), float(self.age[i]))
        return out


def age_basis(effective_age, mid_age: float) -> np.ndarray:
    """Smooth basis [u, u^2, sin u, cos u] with u = effective_age / mid_age."""
    u = np.asarray(effective_age, dtype=np.float64) / mid_age
    return np.stack([u, u**2, np.sin(u), np.cos(u)], axis=-1)


def generate_cohort(spec: SyntheticSpec) -> Cohort:
    """Draw a cohort; identical spec (seed included) gives identical rows.

    Draw order is fixed: mixing matrix, site directions, then per-subject
    age, site, group, and finally one noise block for all rows.
    """
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.age_range
    mid = (lo + hi) / 2.0
    p = spec.feature_dim
    mixing = rng.standard_normal((p, 4))
    site_dirs = rng.standard_normal((spec.n_sites, p))
    site_dirs /= np.linalg.norm(site_dirs, axis=1, keepdims=True)
    group_names = list(GROUPS)
    group_p = np.array([spec.group_fractions.get(g, 0.0) for g in group_names])
    base_age = rng.uniform(lo, hi, size=spec.n_subjects)
    site_idx = rng.integers(0, spec.n_sites, size=spec.n_subjects)
    group_idx = rng.choice(len(group_names), size=spec.n_subjects, p=group_p)
    v = spec.visits_per_subject
    n_rows = spec.n_subjects * v
    subject_id = np.empty(n_rows, dtype=object)
    visit_index = np.empty(n_rows, dtype=np.int64)
    visit_time = np.empty(n_rows)
    site = np.empty(n_rows, dtype=object)
    age = np.empty(n_rows)
    group = np.empty(n_rows, dtype=object)
    effective = np.empty(n_rows)
    row = 0
    for s in range(spec.n_subjects):
        g = group_names[group_idx[s]]
        delta0 = float(spec.baseline_offsets.get(g, 0.0))
        delta1 = float(spec.progression_rates.get(g, 0.0))
        for k in range(v):
            t = k * spec.visit_spacing
            subject_id[row] = f"s{s:05d}"
            visit_index[row] = k
            visit_time[row] = t
            site[row] = f"site{site_idx[s]:02d}"
            age[row] = base_age[s] + t
            group[row] = g
            effective[row] = base_age[s] + t + delta0 + delta1 * t
            row += 1
    features = age_basis(effective, mid) @ mixing.T
    features += spec.site_effect_strength * site_dirs[np.repeat(site_idx, v)]
    features += rng.standard_normal((n_rows, p)) * spec.noise_std
    return Cohort(
        subject_id=subject_id,
        visit_index=visit_index,
        visit_time=visit_time,
        site=site,
        age=age,
        group=group,
        features=features,
    )


def external_sites(cohort: Cohort, fraction: float = 0.2) -> tuple:
    """Reserve the last ceil(fraction * n_sites) sites (sorted by name)."""
    names = sorted(set(str(s) for s in cohort.site))
    if not (0 <= fraction < 1):
        raise InvalidArgumentError("fraction must be in [0, 1)")
    k = math.ceil(fraction * len(names))
    return tuple(names[len(names) - k :]) if k else ()


def stratified_subject_folds(cohort: Cohort, k: int, seed: int = 0) -> dict:
    """Patient-level folds balanced in age.

    Subjects are sorted by baseline age and dealt round-robin into k folds
    starting from a seeded offset, so every visit of a subject lands in
    one fold and fold age means stay close to the cohort mean.
    """
    if k < 2:
        raise InvalidFoldError("need at least 2 folds")
    baselines = cohort.baseline_ages()
    subjects = sorted(baselines, key=lambda s: (baselines[s], s))
    if len(subjects) < k:
        raise InvalidFoldError(f"cannot split {len(subjects)} subjects into {k} folds")
    offset = int(np.random.default_rng(seed).integers(k))
    return {s: (rank + offset) % k for rank, s in enumerate(subjects)}


def fold_of_rows(cohort: Cohort, assignment: dict) -> np.ndarray:
    return np.array([assignment[str(s)] for s in cohort.subject_id], dtype=np.int64)


# ---------------------------------------------------------------------------
# CSV io
#
# Exact column order: subject_id, visit_index, visit_time, site, age, group,
# f0..f{p-1}. UTF-8, comma separated, header required, '.' decimal point.
# Floats are written with repr so a round trip reproduces the doubles.


def write_cohort_csv(cohort: Cohort, path) -> None:
    p = cohort.feature_dim
    header = list(FIXED_COLUMNS) + [f"f{j}" for j in range(p)]
    lines = [",".join(header)]
    for i in range(cohort.n_rows):
        row = [
            str(cohort.subject_id[i]),
            str(int(cohort.visit_index[i])),
            repr(float(cohort.visit_time[i])),
            str(cohort.site[i]),
            repr(float(cohort.age[i])),
            str(cohort.group[i]),
        ]
        row.extend(repr(float(x)) for x in cohort.features[i])
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_float(text: str, line: int, column: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise CohortParseError(f"malformed number {text!r} in column {column}", line) from None
    if not np.isfinite(v):
        raise CohortParseError(f"non-finite value {text!r} in column {column}", line)
    return v


def read_cohort_csv(path) -> Cohort:
    """Parse a cohort CSV, reporting the 1-based line of the first problem."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CohortParseError("empty file, header required", 1) from None
        if header[: len(FIXED_COLUMNS)] != list(FIXED_COLUMNS):
            raise CohortParseError(
                f"header must start with {','.join(FIXED_COLUMNS)}, got {','.join(header[:6])}",
                1,
            )
        feat_cols = header[len(FIXED_COLUMNS) :]
        expected = [f"f{j}" for j in range(len(feat_cols))]
        if feat_cols != expected or not feat_cols:
            raise CohortParseError("feature columns must be f0..f{p-1} with p >= 1", 1)
        p = len(feat_cols)
        rows = {k: [] for k in FIXED_COLUMNS}
        features = []
        seen_keys = {}
        subject_site = {}
        subject_group = {}
        for line_no, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise CohortParseError(
                    f"expected {len(header)} columns, got {len(rec)}", line_no
                )
            sid = rec[0]
            try:
                vidx = int(rec[1])
            except ValueError:
                raise CohortParseError(
                    f"malformed number {rec[1]!r} in column visit_index", line_no
                ) from None
            key = (sid, vidx)
            if key in seen_keys:
                raise CohortParseError(
                    f"duplicate (subject_id, visit_index) {key!r}, first seen at line {seen_keys[key]}",
                    line_no,
                )
            seen_keys[key] = line_no
            vtime = _parse_float(rec[2], line_no, "visit_time")
            site_name = rec[3]
            age = _parse_float(rec[4], line_no, "age")
            group_name = rec[5]
            if group_name not in GROUPS:
                raise CohortParseError(f"unknown group {group_name!r}", line_no)
            if subject_site.setdefault(sid, site_name) != site_name:
                raise CohortParseError(
                    f"subject {sid!r} changes site from {subject_site[sid]!r} to {site_name!r}",
                    line_no,
                )
            if subject_group.setdefault(sid, group_name) != group_name:
                raise CohortParseError(
                    f"subject {sid!r} changes group from {subject_group[sid]!r} to {group_name!r}",
                    line_no,
                )
            rows["subject_id"].append(sid)
            rows["visit_index"].append(vidx)
            rows["visit_time"].append(vtime)
            rows["site"].append(site_name)
            rows["age"].append(age)
            rows["group"].append(group_name)
            features.append([_parse_float(rec[6 + j], line_no, f"f{j}") for j in range(p)])
    if not rows["subject_id"]:
        raise CohortParseError("no data rows", 2)
    return Cohort(
        subject_id=np.array(rows["subject_id"], dtype=object),
        visit_index=np.array(rows["visit_index"], dtype=np.int64),
        visit_time=np.array(rows["visit_time"]),
        site=np.array(rows["site"], dtype=object),
        age=np.array(rows["age"]),
        group=np.array(rows["group"], dtype=object),
        features=np.array(features),
    )


def synthetic_spec_to_dict(spec: SyntheticSpec) -> dict:
    d = {k: getattr(spec, k) for k in spec.__dataclass_fields__}
    d["age_range"] = list(spec.age_range)
    return d


def synthetic_spec_from_dict(d: dict) -> SyntheticSpec:
    d = dict(d)
    if "age_range" in d:
        d["age_range"] = tuple(d["age_range"])
    return SyntheticSpec(**d)

"""Dataset ingestion, censoring application, and marginal fit diagnostics.

CSV input format: a header row naming the columns, optional ``#`` comment
lines, and one row per unit. A cell containing ``---`` marks a unit whose
failure pair was not recorded (right-censored in the source listing).

Two reference datasets ship with the package:

* ``locomotive``: traction-motor field failures, age in years and mileage
  in 1e5 km, 34 recorded pairs plus two censored-marker rows.
* ``starter``: automobile starter-motor claims, age in years and usage in
  1e4 km, 43 recorded pairs.
"""

import csv
import importlib.resources
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import pearsonr, weibull_min

from .errors import DataError
from .inference import Dataset, Observation

__all__ = [
    "RawRecord", "FitDiagnostics",
    "load_dataset", "apply_censoring", "marginal_diagnostics",
    "load_locomotive", "load_starter",
    "save_dataset", "read_dataset",
    "weibull_mle_1d", "anderson_darling_weibull",
]


@dataclass(frozen=True)
class RawRecord:
    """One source row: a lifetime pair, or a censored-marker row."""

    age: "float | None"
    usage: "float | None"
    censored_marker: bool = False

    def __post_init__(self):
        if self.censored_marker:
            return
        for name in ("age", "usage"):
            v = getattr(self, name)
            if v is None or not math.isfinite(v) or v < 0.0:
                raise DataError(f"{name} must be a finite nonnegative "
                                f"number, got {v!r}")


@dataclass(frozen=True)
class FitDiagnostics:
    """Marginal Weibull fits and association summary for failure pairs.

    ``marginal_mles`` holds ((scale, shape) for age, (scale, shape) for
    usage). QQ point sets pair empirical order statistics with fitted
    quantiles at the usual (i - 0.5)/n plotting positions.
    """

    ad_stat_age: float
    ad_p_age: float
    ad_stat_usage: float
    ad_p_usage: float
    pearson_r: float
    marginal_mles: tuple
    qq_age: np.ndarray
    qq_usage: np.ndarray

    def __post_init__(self):
        for name in ("ad_p_age", "ad_p_usage"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise DataError(f"{name}={p} outside [0, 1]")
        if not -1.0 <= self.pearson_r <= 1.0 + 1e-12:
            raise DataError(f"pearson_r={self.pearson_r} outside [-1, 1]")


def load_dataset(path, age_col="age", usage_col="usage", scale_factor=1.0):
    """Read lifetime pairs from a CSV file.

    Parameters
    ----------
    path : str or Path
    age_col, usage_col : str
        Header names of the two lifetime columns.
    scale_factor : float
        Multiplier applied to both coordinates on read (source listings
        sometimes store rescaled values).

    Returns
    -------
    list of RawRecord, in file order. ``---`` cells produce
    censored-marker records. Malformed rows raise DataError with the
    1-based line number.
    """
    path = Path(path)
    records = []
    with path.open(newline="") as fh:
        filtered = ((lineno, line) for lineno, line in enumerate(fh, start=1)
                    if not line.lstrip().startswith("#") and line.strip())
        rows = list(filtered)
    if not rows:
        return records
    header_line, body = rows[0], rows[1:]
    header = next(csv.reader([header_line[1]]))
    header = [h.strip() for h in header]
    try:
        ia, iu = header.index(age_col), header.index(usage_col)
    except ValueError:
        raise DataError(f"{path}: header {header} is missing "
                        f"'{age_col}' or '{usage_col}'") from None
    for lineno, line in body:
        cells = [c.strip() for c in next(csv.reader([line]))]
        if len(cells) <= max(ia, iu):
            raise DataError(f"{path}:{lineno}: expected at least "
                            f"{max(ia, iu) + 1} columns, got {len(cells)}")
        pair = []
        n_marks = 0
        for cell in (cells[ia], cells[iu]):
            if cell == "---":
                n_marks += 1
                pair.append(None)
                continue
            try:
                pair.append(float(cell) * scale_factor)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric cell "
                                f"{cell!r}") from None
        if n_marks == 1:
            raise DataError(f"{path}:{lineno}: censored marker must "
                            f"cover both columns")
        try:
            records.append(RawRecord(pair[0], pair[1],
                                     censored_marker=n_marks == 2))
        except DataError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from None
    return records


def load_locomotive():
    """Bundled traction-motor data: 34 pairs + 2 censored markers."""
    res = importlib.resources.files("warranty2d.datasets") / "locomotive.csv"
    with importlib.resources.as_file(res) as p:
        return load_dataset(p, age_col="age", usage_col="mileage")


def load_starter():
    """Bundled starter-motor claims: 43 pairs, no markers."""
    res = importlib.resources.files("warranty2d.datasets") / "starter.csv"
    with importlib.resources.as_file(res) as p:
        return load_dataset(p, age_col="age", usage_col="usage")


def apply_censoring(records, t0, u0, pad_to_n=None):
    """Turn raw records into a Dataset censored at (t0, u0).

    Records with age >= t0 or usage >= u0, and explicit marker rows,
    become censored observations at the corner. ``pad_to_n`` appends
    further censored units when the study size exceeds the listing.
    """
    if t0 <= 0.0 or u0 <= 0.0:
        raise DataError(f"censoring bounds must be positive, got ({t0}, {u0})")
    obs = []
    for rec in records:
        if rec.censored_marker or rec.age >= t0 or rec.usage >= u0:
            obs.append(Observation(t0, u0, failed=False))
        else:
            obs.append(Observation(rec.age, rec.usage, failed=True))
    if pad_to_n is not None:
        if pad_to_n < len(obs):
            raise DataError(f"pad_to_n={pad_to_n} is below the record "
                            f"count {len(obs)}")
        obs.extend(Observation(t0, u0, failed=False)
                   for _ in range(pad_to_n - len(obs)))
    return Dataset(tuple(obs), t0, u0)


def save_dataset(data, csv_path):
    """Write a Dataset as CSV (t,u,failed) plus a JSON sidecar.

    The sidecar (same stem, .json suffix) records {t0, u0, n, d}. Floats
    round-trip exactly via repr.
    """
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "u", "failed"])
        for ob in data.observations:
            w.writerow([repr(ob.t), repr(ob.u), int(ob.failed)])
    side = {"t0": data.t0, "u0": data.u0, "n": data.n, "d": data.d}
    csv_path.with_suffix(".json").write_text(json.dumps(side, indent=2) + "\n")


def read_dataset(csv_path):
    """Inverse of save_dataset."""
    csv_path = Path(csv_path)
    side = json.loads(csv_path.with_suffix(".json").read_text())
    obs = []
    with csv_path.open(newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header != ["t", "u", "failed"]:
            raise DataError(f"{csv_path}: unexpected header {header}")
        for lineno, row in enumerate(rd, start=2):
            try:
                obs.append(Observation(float(row[0]), float(row[1]),
                                       failed=bool(int(row[2]))))
            except (ValueError, IndexError):
                raise DataError(f"{csv_path}:{lineno}: malformed row "
                                f"{row}") from None
    data = Dataset(tuple(obs), float(side["t0"]), float(side["u0"]))
    if data.n != side["n"] or data.d != side["d"]:
        raise DataError(f"{csv_path}: sidecar counts (n={side['n']}, "
                        f"d={side['d']}) disagree with rows "
                        f"(n={data.n}, d={data.d})")
    return data


def weibull_mle_1d(x):
    """Weibull (scale, shape) MLE of a positive sample."""
    x = np.asarray(x, dtype=float)
    if x.size < 2 or np.any(x <= 0.0):
        raise DataError("need >= 2 strictly positive values")
    shape, _, scale = weibull_min.fit(x, floc=0.0)
    return float(scale), float(shape)


def _ad_asymptotic_cdf(z):
    """P(A^2 < z) under the asymptotic null distribution (Marsaglia series)."""
    if z <= 0.0:
        return 0.0
    if z < 2.0:
        return (z ** -0.5 * math.exp(-1.2337141 / z)
                * (2.00012 + (0.247105 - (0.0649821 - (0.0347962
                   - (0.0116720 - 0.00168691 * z) * z) * z) * z) * z))
    return math.exp(-math.exp(1.0776 - (2.30695 - (0.43424 - (0.082433
                    - (0.008056 - 0.0003146 * z) * z) * z) * z) * z))


def anderson_darling_weibull(x, scale, shape):
    """AD statistic and p-value against a fitted Weibull.

    Returns (A2, p). The p-value comes from the asymptotic distribution of
    A^2 with the null treated as fully specified, i.e. the fitted (scale,
    shape) are plugged in as if known. The composite-null tables with their
    finite-n modification would give much smaller p-values for the same
    statistic; the simple-null convention is the one our reference values
    follow.
    """
    x = np.sort(np.asarray(x, dtype=float))
    n = x.size
    z = weibull_min.cdf(x, shape, scale=scale)
    z = np.clip(z, 1e-12, 1.0 - 1e-12)
    i = np.arange(1, n + 1)
    a2 = -n - np.mean((2 * i - 1) * (np.log(z) + np.log1p(-z[::-1])))
    p = 1.0 - _ad_asymptotic_cdf(float(a2))
    return float(a2), float(min(max(p, 0.0), 1.0))


def marginal_diagnostics(data):
    """Marginal Weibull fits, AD tests, and Pearson r on failure pairs."""
    t, u = data.failures
    if t.size < 8:
        raise DataError(f"need >= 8 failure records for the AD test, "
                        f"have {t.size}")
    fits = []
    stats = []
    qqs = []
    for x in (t, u):
        scale, shape = weibull_mle_1d(x)
        fits.append((scale, shape))
        stats.append(anderson_darling_weibull(x, scale, shape))
        pp = (np.arange(1, x.size + 1) - 0.5) / x.size
        fitted_q = weibull_min.ppf(pp, shape, scale=scale)
        qqs.append(np.column_stack([fitted_q, np.sort(x)]))
    r = float(pearsonr(t, u)[0])
    return FitDiagnostics(
        ad_stat_age=stats[0][0], ad_p_age=stats[0][1],
        ad_stat_usage=stats[1][0], ad_p_usage=stats[1][1],
        pearson_r=r, marginal_mles=(fits[0], fits[1]),
        qq_age=qqs[0], qq_usage=qqs[1],
    )

"""Monthly series ingestion and preprocessing.

Covers the steps applied to the production/leading-indicator pair before
model fitting: CSV loading with date alignment, log-differencing with
standardization, symmetric outlier clipping, and cross-correlation
diagnostics.  Frames are immutable after construction; every transform
returns a new object.
"""

from __future__ import annotations

import io
import urllib.request
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError, ValidationError

# Public monthly series used by the nowcast experiment; the fetch helper is
# strictly opt-in (tests and default runs use bundled CSV snapshots).
FRED_CSV_URL = "https://fred.stlouisfed.org/graph/fredgraph.csv?id={series}"
KNOWN_SERIES = {
    "INDPRO": "INDPRO",
    "CLI": "USALOLITOAASTSAM",
}


@dataclass(frozen=True)
class SeriesFrame:
    """Aligned monthly multi-series container.

    ``values`` is indexed by month-start timestamps, one column per series,
    with no gaps inside the common range.  ``provenance`` records where each
    column came from (file path or URL), ``clip_counts`` how many points a
    trim step affected (zero until :func:`trim_outliers` runs).
    """

    values: pd.DataFrame
    provenance: dict = field(default_factory=dict)
    clip_counts: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = self.values.index
        if len(idx) and not idx.is_monotonic_increasing:
            raise ValidationError("date index must be strictly increasing")
        if len(idx) != len(idx.unique()):
            raise ValidationError("date index contains duplicate months")
        if self.values.isna().any().any():
            raise ValidationError("frame contains missing values after alignment")

    @property
    def n_obs(self):
        return len(self.values)

    @property
    def columns(self):
        return list(self.values.columns)

    def column(self, name):
        """One series as a float array."""
        if name not in self.values.columns:
            raise ValidationError("unknown series %r; have %s" % (name, self.columns))
        return self.values[name].to_numpy(dtype=float)

    def with_values(self, values, clip_counts=None):
        return SeriesFrame(values, dict(self.provenance),
                           dict(clip_counts if clip_counts is not None else self.clip_counts))


def _read_one_csv(path_or_buf, date_column, value_column, label):
    try:
        raw = pd.read_csv(path_or_buf)
    except Exception as exc:  # parse failure -> DataError with context
        raise DataError("could not parse CSV %r: %s" % (label, exc))
    for col in (date_column, value_column):
        if col not in raw.columns:
            raise DataError("CSV %r lacks column %r (has %s)"
                            % (label, col, list(raw.columns)))
    dates = pd.to_datetime(raw[date_column], errors="coerce")
    if dates.isna().any():
        row = int(np.argmax(dates.isna().to_numpy()))
        raise DataError("CSV %r: unparseable date in row %d" % (label, row + 2))
    vals = pd.to_numeric(raw[value_column], errors="coerce")
    if vals.isna().any():
        row = int(np.argmax(vals.isna().to_numpy()))
        raise DataError("CSV %r: missing/non-numeric value in row %d" % (label, row + 2))
    s = pd.Series(vals.to_numpy(dtype=float),
                  index=dates.dt.to_period("M").dt.to_timestamp())
    return s[~s.index.duplicated(keep="first")].sort_index()


def load_csv(paths, date_column="date", value_columns=None, names=None):
    """Load one or more single-series CSVs and align them on the common range.

    Parameters
    ----------
    paths : str or sequence of str
        CSV files, one series each.
    date_column : str
        Name of the date column (ISO dates).
    value_columns : str or sequence of str, optional
        Value column per file; defaults to the lone non-date column.
    names : sequence of str, optional
        Output column names; default stems from the value columns.

    Returns
    -------
    SeriesFrame over the intersection of the date ranges.
    """
    if isinstance(paths, (str, bytes)) or hasattr(paths, "read"):
        paths = [paths]
    paths = list(paths)
    if value_columns is None:
        value_columns = [None] * len(paths)
    elif isinstance(value_columns, str):
        value_columns = [value_columns]
    if len(value_columns) != len(paths):
        raise ValidationError("need one value column per path")
    series, provenance = [], {}
    for i, (p, vc) in enumerate(zip(paths, value_columns)):
        label = getattr(p, "name", None) or str(p)
        if vc is None:
            try:
                head = pd.read_csv(p, nrows=0)
            except Exception as exc:
                raise DataError("could not read CSV %r: %s" % (label, exc))
            if hasattr(p, "seek"):
                p.seek(0)
            cand = [c for c in head.columns if c != date_column]
            if len(cand) != 1:
                raise DataError("CSV %r: cannot infer value column from %s"
                                % (label, list(head.columns)))
            vc = cand[0]
        s = _read_one_csv(p, date_column, vc, label)
        name = names[i] if names else vc
        s.name = name
        provenance[name] = label
        series.append(s)
    joined = pd.concat(series, axis=1, join="inner")
    if joined.empty:
        raise DataError("date ranges of the input series do not overlap")
    # no silent gaps: month steps inside the common range must be complete
    expect = pd.date_range(joined.index[0], joined.index[-1], freq="MS")
    if len(expect) != len(joined.index):
        missing = expect.difference(joined.index)[:3]
        raise DataError("monthly index has gaps, first missing: %s"
                        % ", ".join(str(m.date()) for m in missing))
    return SeriesFrame(joined, provenance)


def fetch_series(names=("INDPRO", "CLI"), timeout=30):
    """Download fresh vintages of the known monthly series (network opt-in).

    Only used behind an explicit CLI flag; everything else reads bundled
    snapshots.  Returns a SeriesFrame aligned on the common range.
    """
    frames = []
    for nm in names:
        if nm not in KNOWN_SERIES:
            raise ValidationError("unknown fetchable series %r; have %s"
                                  % (nm, sorted(KNOWN_SERIES)))
        url = FRED_CSV_URL.format(series=KNOWN_SERIES[nm])
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                text = resp.read().decode("utf-8")
        except Exception as exc:
            raise DataError("fetching %s failed: %s" % (nm, exc))
        buf = io.StringIO(text)
        head = pd.read_csv(buf, nrows=0)
        buf.seek(0)
        cols = list(head.columns)
        date_col = cols[0]
        s = _read_one_csv(buf, date_col, cols[1], url)
        s.name = nm
        frames.append(s)
    joined = pd.concat(frames, axis=1, join="inner").dropna()
    return SeriesFrame(joined, {nm: FRED_CSV_URL.format(series=KNOWN_SERIES[nm])
                                for nm in names})


def log_diff_standardize(frame):
    """Per series: first differences of logs, then centre/scale to unit variance.

    Drops the first observation (lost to differencing).  Raises on
    non-positive levels and on zero-variance diffs (constant or exactly
    geometric series), which would make standardization meaningless.
    """
    vals = frame.values
    out = {}
    for col in vals.columns:
        v = vals[col].to_numpy(dtype=float)
        if np.any(v <= 0):
            row = int(np.argmax(v <= 0))
            raise ValidationError("series %r has non-positive level at %s"
                                  % (col, vals.index[row].date()))
        d = np.diff(np.log(v))
        sd = d.std(ddof=0)
        if sd < 1e-14 * max(1.0, np.abs(d).max(initial=0.0)) or sd == 0.0:
            raise ValidationError("series %r has zero variance after log-differencing" % col)
        out[col] = (d - d.mean()) / sd
    values = pd.DataFrame(out, index=vals.index[1:])
    return frame.with_values(values)


def trim_outliers(frame, k_sigma=5.0):
    """Clip standardized values to ``[-k_sigma, +k_sigma]``.

    Winsorizing keeps the date alignment intact (no deleted rows) and is
    idempotent.  Per-series clip counts are recorded on the result.
    """
    if k_sigma < 0:
        raise ValidationError("k_sigma must be non-negative")
    vals = frame.values
    clipped = vals.clip(lower=-k_sigma, upper=k_sigma)
    counts = {col: int((vals[col] != clipped[col]).sum()) for col in vals.columns}
    return frame.with_values(clipped, counts)


def cross_correlation(frame, a, b, max_lag=12):
    """Sample CCF corr(a_t, b_{t+lag}) for lags in ``[-max_lag, max_lag]``.

    A negative peak lag means ``b`` leads ``a``.  Returns (lags, ccf).
    """
    x = frame.column(a)
    y = frame.column(b)
    if max_lag >= len(x):
        raise ValidationError("max_lag %d too large for %d observations"
                              % (max_lag, len(x)))
    x = (x - x.mean()) / x.std(ddof=0)
    y = (y - y.mean()) / y.std(ddof=0)
    lags = np.arange(-max_lag, max_lag + 1)
    ccf = np.empty(lags.size)
    n = len(x)
    for i, lag in enumerate(lags):
        if lag < 0:
            ccf[i] = np.mean(x[-lag:] * y[: n + lag])
        else:
            ccf[i] = np.mean(x[: n - lag] * y[lag:])
    return lags, ccf


def ccf_peak_lag(frame, a, b, max_lag=12):
    """Lag with the largest CCF value (ties broken toward zero)."""
    lags, ccf = cross_correlation(frame, a, b, max_lag)
    order = np.lexsort((np.abs(lags), -ccf))
    return int(lags[order[0]])

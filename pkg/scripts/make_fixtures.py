"""Regenerate the bundled monthly data snapshots under src/mssa/data/.

The repository does not ship the raw source vintages, so the snapshots
are synthetic stand-ins built from the shipped two-series model: a
seeded draw rebuilt into level series, with a >5-sigma collapse/rebound
pair injected in spring 2020 so the outlier trimming has something to
do.  The model's own cross-correlation peaks at lag -1, so the
indicator column is given two extra months of lead before levels are
built; together with a seed search this pins the snapshot's stylised
fact that the indicator leads production by one quarter
(cross-correlation peak at lag -3), with both series clipped at least
twice.

Point estimates on these snapshots are therefore *not* comparable to
estimates on real vintages; drop real CSVs into tests/data/real/ (same
two-column layout) to evaluate those.

Run from the repository root:  python3 scripts/make_fixtures.py
"""

import io
import sys
from pathlib import Path

import numpy as np
import pandas as pd

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from mssa.config import bundled_config  # noqa: E402
from mssa.datapipe import ccf_peak_lag, load_csv, log_diff_standardize, trim_outliers  # noqa: E402
from mssa.processes import simulate  # noqa: E402

OUT = Path(__file__).resolve().parents[1] / "src" / "mssa" / "data"
START = "1955-01-01"
PERIODS = 837  # level observations; one is lost to differencing
SCALE = (0.012, 0.009)
DRIFT = (0.002, 0.001)


LEAD_SHIFT = 2  # extra months of lead given to the indicator column


def build_levels(model, seed):
    dates = pd.date_range(START, periods=PERIODS, freq="MS")
    x = simulate(model, PERIODS - 1 + LEAD_SHIFT, seed=seed)
    g = np.column_stack([x[: PERIODS - 1, 0], x[LEAD_SHIFT :, 1]])
    # collapse/rebound pair in observed time: growth g[t] lands on level
    # date t+1
    i = dates.get_loc("2020-03-01") - 1
    g[i, 0], g[i + 1, 0] = -9.0, 7.0
    g[i, 1], g[i + 1, 1] = -6.5, 5.5
    lev = np.empty((PERIODS, 2))
    lev[0] = 100.0
    for t in range(1, PERIODS):
        lev[t] = lev[t - 1] * np.exp(np.asarray(SCALE) * g[t - 1] + DRIFT)
    return dates, lev


def frame_from_levels(dates, lev):
    bufs = []
    for j, name in enumerate(("INDPRO", "CLI")):
        buf = io.StringIO()
        pd.DataFrame({"date": dates.strftime("%Y-%m-%d"),
                      name: ["%.4f" % v for v in lev[:, j]]}).to_csv(buf, index=False)
        buf.seek(0)
        buf.name = name.lower() + ".csv"
        bufs.append(buf)
    return load_csv(bufs, names=["INDPRO", "CLI"])


def main():
    model = bundled_config("indpro-nowcast").model
    for seed in range(500):
        dates, lev = build_levels(model, seed)
        frame = frame_from_levels(dates, lev)
        t = trim_outliers(log_diff_standardize(frame), 5.0)
        peak = ccf_peak_lag(t, "INDPRO", "CLI", 12)
        clips = t.clip_counts
        if peak == -3 and clips["INDPRO"] >= 2 and clips["CLI"] >= 2:
            break
    else:
        raise SystemExit("no seed in range produced the wanted snapshot shape")

    print("seed=%d peak=%d clips=%s n_obs=%d"
          % (seed, peak, clips, t.n_obs))
    for j, name in enumerate(("indpro", "cli")):
        col = ("INDPRO", "CLI")[j]
        df = pd.DataFrame({"date": dates.strftime("%Y-%m-%d"),
                           col: ["%.4f" % v for v in lev[:, j]]})
        path = OUT / (name + ".csv")
        df.to_csv(path, index=False, lineterminator="\n")
        print("wrote", path)


if __name__ == "__main__":
    main()

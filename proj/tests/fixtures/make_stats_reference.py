"""Regenerates stats_reference.json with numpy/scipy (not used by the build)."""
import json

import numpy as np
from scipy import stats

rng = np.random.default_rng(20240611)
cases = []
for i in range(100):
    na, nb = int(rng.integers(2, 41)), int(rng.integers(2, 41))
    scale = 10.0 ** rng.uniform(-2, 3)
    a = rng.normal(rng.uniform(-5, 5) * scale, rng.uniform(0.1, 3) * scale, na)
    b = rng.normal(rng.uniform(-5, 5) * scale, rng.uniform(0.1, 3) * scale, nb)
    if i % 10 == 0:  # ties for the rank test
        a, b = np.round(a / scale) * scale, np.round(b / scale) * scale
    welch = stats.ttest_ind(a, b, equal_var=False)
    sp = np.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2))
    mw = stats.mannwhitneyu(a, b, alternative="less", method="asymptotic", use_continuity=True)

    def summary(x):
        m, s = float(np.mean(x)), float(np.std(x, ddof=1))
        return {"mean": m, "std": s, "min": float(x.min()), "max": float(x.max()),
                "median": float(np.median(x)), "cv": s / m}

    cases.append({
        "a": a.tolist(), "b": b.tolist(),
        "summary_a": summary(a), "summary_b": summary(b),
        "welch_t": float(welch.statistic), "welch_p": float(welch.pvalue), "welch_dof": float(welch.df),
        "cohens_d": float((a.mean() - b.mean()) / sp),
        "mann_whitney_u": float(mw.statistic), "mann_whitney_p_less": float(mw.pvalue),
    })

with open("stats_reference.json", "w") as f:
    json.dump({"generator": "numpy/scipy " + np.__version__ + "/" + __import__("scipy").__version__,
               "cases": cases}, f, indent=1)

"""Figures for the numeric reports.  Files only; no display backend."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .gadgets.numeric import IdentityReport, NumericFn  # noqa: E402

FLOOR = 1e-60


def identity_error_plot(report: IdentityReport, path: str, tol: float = None) -> str:
    fig, ax = plt.subplots(figsize=(6, 4))
    errs = [max(e, FLOOR) for e in report.errors]
    ax.scatter(report.points, errs, s=6)
    if tol is not None:
        ax.axhline(tol, color="tab:red", linestyle="--", label=f"tol {tol:g}")
        ax.legend(loc="upper right")
    ax.set_yscale("log")
    ax.set_xlabel("x")
    ax.set_ylabel("relative error")
    verdict = "pass" if report.passed else "fail"
    ax.set_title(f"{report.tag}: {report.lhs} vs {report.rhs} ({verdict})", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def fbar_plot(f: NumericFn, fbar: NumericFn, c, d, path: str, points: int = 201) -> str:
    xs = [i / (points - 1) for i in range(points)]
    ys = [float(fbar(x)) for x in xs]
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.6))
    lo, hi = float(c), float(d)
    span = [lo + (hi - lo) * x for x in xs]
    left.plot(span, [float(f(t)) for t in span])
    mid = (lo + hi) / 2
    left.plot([lo, hi], [float(f(lo)), float(f(hi))], "--", color="gray")
    left.plot([mid], [float(f(mid))], "o", color="tab:red")
    left.set_title(f"{f.tag} on [{c}, {d}]", fontsize=9)
    right.plot(xs, ys)
    right.axhline(0, color="gray", linewidth=0.8)
    right.plot([0, 0.5, 1], [float(fbar(0)), float(fbar(0.5)), float(fbar(1))], "o",
               color="tab:red")
    right.set_title("fbar on [0, 1]", fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path

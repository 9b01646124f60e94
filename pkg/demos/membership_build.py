"""Build a small universal-series candidate and audit it.

Dilating a fixed analytic function along a radius ladder should sweep past
prescribed targets on prescribed arcs.  The builder adds one polynomial
correction per stage: pin the partial sum near the target on the dilated
arc, stay small on the disc already built.  Each stage's error budget
telescopes, so later stages cannot undo earlier ones.
"""

import math

from abeluniv import (BuildConfig, EpsilonSchedule, RadiiSchedule,
                      TargetEnumeration, UnitCircleArc,
                      build_membership_series, telescoping_errors,
                      universality_scan)
from abeluniv.polyfit import ComplexPolynomial

targets = [ComplexPolynomial([0.2 + 0j]), ComplexPolynomial([-0.3j])]
arcs = [UnitCircleArc(0.30, 0.32), UnitCircleArc(3.60, 3.62)]
# the schedule must cover all 4 (target, arc) pairs; the build then walks
# the first 3 entries of it
cfg = BuildConfig(RadiiSchedule.default(5), EpsilonSchedule.default(5),
                  TargetEnumeration.cyclic(targets, arcs, 4))

series = build_membership_series(cfg, 3)
print("build succeeded:", series.succeeded)
for rec in series.stages:
    print(f"  stage {rec.n}: degree {rec.fit.degree:>3}, "
          f"fit error {rec.fit.sup_error:.3e} vs budget {cfg.eps.eps[rec.n] / 2:.3e}")

print("\ntelescoped bounds (stage error + tail of later budgets):")
for row in telescoping_errors(series):
    print(f"  stage {row['n']}: measured {row['sup']:.3e} <= bound {row['bound']:.3e}")

# scan the finished series as a black box: for each (target, arc) pair,
# which ladder radius approximates best?
report = universality_scan(series.total(), targets, arcs, cfg.rho, 3)
for ti in range(len(targets)):
    for ai in range(len(arcs)):
        best = report.best_for(ti, ai)
        print(f"target {ti} on arc {ai}: best at stage {best['best_n']}, "
              f"error {best['best_error']:.3e}")

# the same machinery refuses schedules it cannot honor: degree caps turn
# into recorded failures, not corrupted series
tight = BuildConfig(RadiiSchedule.default(6), EpsilonSchedule.default(6),
                    TargetEnumeration.cyclic(targets, arcs, 4), max_degree=64)
failed = build_membership_series(tight, 4)
f = failed.failure
print(f"\ncapped at degree 64 the build stops at stage {f.n}: {f.reason}; "
      f"{len(failed.stages)} stages kept")
print("degree ladder tried:", [d for d, _ in f.detail["history"]])
print("best fit on that ladder:", f"{min(e for _, e in f.detail['history']):.3f}",
      "vs budget", f.detail["tol"])

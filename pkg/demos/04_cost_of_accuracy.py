"""Cheaper steps or fewer steps?

On a 300-element rod the compensated scheme pays for dense modified
matrices in every step, while generalized-alpha keeps the sparse ones. The
benchmark refines each method until it reaches an error of 1e-6 and reports
steps and wall time. Fewer, more expensive steps win here.
"""
from newmark_bea.harness import accuracy_runtime_benchmark, builtin_scenario, steps_to_target

scn = builtin_scenario("fe-benchmark")
rows = accuracy_runtime_benchmark(scn)
for r in rows:
    print(f"{r.method:>18s} steps={r.steps:6d} error={r.error:.2e} "
          f"wall={r.wall_time:.3f}s per-step={r.per_step * 1e6:.1f}us")

for m in dict.fromkeys(r.method for r in rows):
    hit = steps_to_target(rows, m, scn.target_error)
    print(m, "->", "target not reached" if hit is None else f"{hit.steps} steps")

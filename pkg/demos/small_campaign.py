"""A small Monte Carlo run of the second eigenvalue.

Run with ``python demos/small_campaign.py``; it takes about a minute.
"""
from alonlab.experiments import ExperimentConfig, rows_to_csv, run_campaign

cfg = ExperimentConfig("g", 4, [50, 100, 200], 200, epsilon=0.3, seed=3)
rows = run_campaign(cfg)
print(rows_to_csv(rows))
for r in rows:
    print(f"n={r['n']:4d}: P(lambda_2 > {cfg.bare:.3f}) = {r['p_bare']:.3f} "
          f"[{r['wilson_lo']:.3f}, {r['wilson_hi']:.3f}], median lambda_2 {r['median_lambda2']:.3f}")

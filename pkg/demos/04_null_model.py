# Shuffle-based null model: how far do observed within-group characteristic
# ratios sit from what random reassignment would produce?

from aidisrupt.stats import null_model_zscores, pearson_with_outlier_exclusion, two_prop_test

# 30 tasks; the 10 "impacted" ones are deliberately mental-heavy while the
# global pool is balanced, so the mental ratio should stand out.
labels = {}
chars = {}
for i in range(30):
    tid = f"T{i:02d}"
    labels[tid] = "impacted" if i < 10 else "rest"
    mental = (i < 9) or (i in (12, 15, 18, 21, 24, 27))
    chars[tid] = {"nature": "M" if mental else "P"}

results = null_model_zscores(labels, chars, n_iter=2000, seed=2024)
for r in results:
    flag = "" if r.z_defined else " (degenerate null)"
    print(
        f"{r.group:9s} {r.characteristic}={r.value}: observed={r.observed_ratio:.3f} "
        f"null={r.null_mean:.3f}+-{r.null_std:.3f}  z={r.z:+.2f}{flag}"
    )

# The same module carries the rest of the toolkit's statistics.
tp = two_prop_test(30, 100, 20, 100)
print(f"\ntwo-proportion test 30/100 vs 20/100: z={tp.z:.4f}  p={tp.p_value:.4f}")

# A vacancy-style correlation with one planted outlier: the point far off
# the regression line is excluded before the final fit.
x = [2.0, 3.5, 4.1, 5.2, 6.3, 7.9, 8.6, 9.4]
y = [0.05, 0.08, 0.10, 0.13, 0.15, 0.90, 0.21, 0.23]  # index 5 is way off the line
res = pearson_with_outlier_exclusion(x, y, sigma_mult=2.0, ids=[f"s{i}" for i in range(8)])
print(f"pearson after exclusion: r={res.r:.3f}  p={res.p_value:.4f}  excluded={list(res.excluded)}")

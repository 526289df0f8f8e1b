"""Does more data find the true list? A miniature recovery study.

Plants a known rule list, simulates datasets of growing size, reruns the
search on each, and reports the edit distance between the found and planted
lists. The full-scale version (ten replicates, lists of six, pool of one
hundred) lives in the acceptance suite; this one is sized to finish with
the coffee still warm.
"""

from cfrl.recovery import RecoveryConfig, run_recovery_study

config = RecoveryConfig(
    sizes=(80, 320, 1280),
    n_replicates=4,
    n_steps=250,
    temperature=1.0,
    pool_size=40,
    n_true_rules=3,
    n_confounders=5,
)
print(f"planting lists of {config.n_true_rules} rules + default from a pool "
      f"of {config.pool_size}, {config.n_replicates} replicates per size\n")

result = run_recovery_study(config, seed=4)

width = 30
for n, mean in zip(result.sizes, result.mean_distance):
    reps = ", ".join(str(int(d)) for d in result.distances[n])
    bar = "#" * round(width * mean / (config.n_true_rules + 1))
    print(f"n={n:5d}  distances [{reps}]  mean {mean:.2f}  |{bar}")

print("\nedit distance to the planted list shrinks as the sample grows;"
      "\nwith enough rows the search pins the exact list")

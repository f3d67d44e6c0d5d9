# Shrinking the regularization on one fixed path.
#
# A film that touches zero is lifted by eps**theta.  As eps decreases the
# lift and the minimum height shrink together, consecutive trajectories
# get closer, and the dissipation correction term goes to zero.

from thinfilm import RunConfig, epsilon_sweep

cfg = RunConfig(n=128, T=1e-3, intervals=64, mean_level=0.5, amplitude=0.5, epsilon_sweep=(0.1, 0.01, 0.001))
rep = epsilon_sweep(cfg)

print(f"common height bound K = {rep.K_bound:.4f}")
for i, eps in enumerate(rep.epsilons):
    gap = f"{rep.gaps[i]:.3e}" if i < len(rep.gaps) else "-"
    print(f"eps={eps:<6g} floor={rep.floors[i]:.4f}  correction={rep.correction_terms[i]:.3e}  gap to next={gap}")
print("gaps shrink:", rep.gaps_shrink, " floors decrease:", rep.floors_decrease)

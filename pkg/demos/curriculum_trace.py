# %% [markdown]
# Which source frames does the curriculum hand the optimizer, epoch by epoch?
# Warmup grows the threshold slowly from the stereo baseline; boosting with
# tri-minimisation jumps to wide monocular separations.

# %%
from boostdepth.curriculum import BOOST, WARMUP, BaselineModel, expand_sources, schedule_for_epoch, select_source

model = BaselineModel(b=0.12)

# %%
for stage, epochs in ((WARMUP, range(10)), (BOOST, range(10, 20))):
    for e in epochs:
        sched = schedule_for_epoch(e, stage, tri_min=True)
        sel = expand_sources(select_source(model, sched), tri_min=True)
        print(f"{stage:6s} epoch {e:2d}  tau={sched.tau:5.2f}  chosen={sel.chosen!s:>2}  sources={sel.sources}")

# %% [markdown]
# Near the end of a sequence only frames that exist can be chosen, and the
# expanded set is clipped rather than clamped.

# %%
available = set(range(-12, 3)) - {0} | {"s"}  # frame 12 of 15
sched = schedule_for_epoch(16, BOOST, tri_min=True)
print(expand_sources(select_source(model, sched, available), True, available))

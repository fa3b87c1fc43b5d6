"""
Synthetic imbalanced tasks
==========================

Builds the arc-and-blob toy datasets at several overlap levels and shows
how class geometry, stratified splitting, and label noise behave.
"""
import numpy as np

from metasampler import (
    DecisionTree,
    SplitSpec,
    ToySpec,
    aucprc,
    inject_flip_noise,
    make_toy,
    stratified_split,
)

# The generator places the majority class on a noisy arc and the minority
# class in a small blob beneath it. `overlap` slides the blob toward the
# arc: 0 is cleanly separable, 1 puts the blob center on the band. A single
# tree's held-out AUCPRC tracks that difficulty knob.
for overlap in (0.0, 0.5, 1.0):
    ds = make_toy(ToySpec(n_majority=2000, n_minority=200, overlap=overlap, seed=11))
    tr, _, te = stratified_split(ds, SplitSpec(), seed=0)
    tree = DecisionTree().fit(tr)
    auc = aucprc(tree.predict_proba(te.features), te.labels)
    print(
        f"overlap {overlap:.1f}: |N|={ds.majority_count} |P|={ds.minority_count}"
        f" IR={ds.imbalance_ratio:.0f} single-tree test AUCPRC {auc:.3f}"
    )

# Splitting is class-wise, so every split keeps the original imbalance ratio.
ds = make_toy(ToySpec(2000, 200, overlap=0.5, seed=11))
train, valid, test = stratified_split(ds, SplitSpec(), seed=0)
print()
for name, part in (("train", train), ("valid", valid), ("test", test)):
    print(
        f"{name}: {part.majority_count}/{part.minority_count}"
        f" (IR {part.imbalance_ratio:.1f})"
    )

# Flip noise swaps equal numbers of labels in each direction, so the class
# counts (and IR) survive while the decision boundary gets dirtier.
noisy = inject_flip_noise(train, ratio=0.25, seed=0)
changed = int(np.sum(noisy.labels != train.labels))
print()
print(
    f"25% flip noise: {changed} labels changed,"
    f" counts {noisy.majority_count}/{noisy.minority_count} (unchanged)"
)

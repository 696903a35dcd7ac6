"""Small-scale cross-validated training on the bundled benchmark.

Uses a reduced network (M=32 grid, 2 stack layers, 8 channels) and a
40-graph slice so the whole run takes well under a minute; the
full-scale configuration is `TrainConfig()` with the 188-graph
dataset, driven the same way.
"""

import time

import numpy as np

from qwgrid.graphs import Dataset
from qwgrid.synth import make_two_class_dataset
from qwgrid.training import TrainConfig, train

full = make_two_class_dataset()
keep = list(range(0, 20)) + list(range(125, 145))  # 20 per class
dataset = Dataset(
    name="demo40",
    graphs=[full.graphs[i] for i in keep],
    class_labels=full.class_labels[keep],
    label_alphabet=full.label_alphabet,
)

config = TrainConfig(
    M=32,
    T=2,
    conv_channels=8,
    L=4,
    learning_rate=1e-3,
    epochs=20,
    batch_size=8,
    folds=4,
    seed=0,
    head_conv_channels=(8, 8),
    head_pool_after=(True, False),
    head_dense_units=16,
)

start = time.perf_counter()
result = train(dataset, config)
elapsed = time.perf_counter() - start

for fm in result.fold_metrics:
    print(f"fold {fm.fold}: accuracy {fm.accuracy:.3f} "
          f"(final loss {fm.loss_final:.3f})")
print(f"mean accuracy {result.mean_accuracy:.3f} "
      f"± {result.stderr_accuracy:.3f} in {elapsed:.1f}s")

worst = np.argmin([fm.accuracy for fm in result.fold_metrics])
print(f"confusion matrix of the weakest fold ({worst}):")
print(result.confusions[worst])

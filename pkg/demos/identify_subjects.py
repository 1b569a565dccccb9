"""Identify who is walking from two-step gait samples.

Builds a small labelled corpus, trains the convolutional variant for a
few epochs, and prints per-subject accuracy with a confusion table.
"""

import numpy as np

from gaitkit.data import build_ident_dataset, random_profile, synth_recording
from gaitkit.recognition import ident_forward, init_ident_model, train_ident


def main():
    rng = np.random.default_rng(5)
    recordings = []
    for i in range(4):
        profile = random_profile(rng, f"s{i}")
        for k in range(2):
            rec = synth_recording(
                profile, [("walk", 50.0)], seed=50 + 10 * i + k, t0=k * 80.0
            )
            recordings.append((profile.subject, rec.series))

    ds = build_ident_dataset(recordings, recipe="interp", overlap="1step", seed=0)
    cm = ds.class_map
    train_v = np.stack([s.values for s in ds.train])
    train_y = np.array([cm[s.subject] for s in ds.train])
    test_v = np.stack([s.values for s in ds.test])
    test_y = np.array([cm[s.subject] for s in ds.test])
    print(f"{len(train_v)} train / {len(test_v)} test samples, "
          f"{len(cm)} subjects")

    model = init_ident_model("cnn", len(cm), seed=0)
    history = train_ident(
        model, train_v, train_y, epochs=3, batch=128, seed=0,
        log=lambda e, loss: print(f"  epoch {e}  loss {loss:.4f}"),
    )

    pred = ident_forward(model, test_v).data.argmax(axis=1)
    print(f"\ntest accuracy {np.mean(pred == test_y):.1%} "
          f"(final loss {history[-1]:.4f})")

    names = sorted(cm, key=cm.get)
    confusion = np.zeros((len(cm), len(cm)), dtype=int)
    for t, p in zip(test_y, pred):
        confusion[t, p] += 1
    print("\ntruth \\ predicted  " + "  ".join(f"{n:>4}" for n in names))
    for i, name in enumerate(names):
        print(f"{name:>17}  " + "  ".join(f"{c:4d}" for c in confusion[i]))


if __name__ == "__main__":
    main()

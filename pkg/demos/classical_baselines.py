"""Race the classical feature families against a deep model.

Fourier, wavelet-energy, and principal-component features each feed the
same margin classifier; a small convolutional network trains on the raw
samples. On a corpus this small the richer fixed features keep up with
the network; the fourier magnitudes, deliberately blind to cadence and
amplitude, trail behind. The acceptance suite runs the same race at ten
subjects, where the ordering becomes strict.
"""

import numpy as np

from gaitkit.baselines import (
    eigengait_features,
    eigengait_fit,
    fourier_features,
    margin_predict,
    margin_train,
    wavelet_energy_features,
)
from gaitkit.data import build_ident_dataset, random_profile, synth_recording
from gaitkit.recognition import ident_forward, init_ident_model, train_ident


def main():
    rng = np.random.default_rng(11)
    recordings = []
    for i in range(6):
        profile = random_profile(rng, f"s{i}")
        for k in range(2):
            rec = synth_recording(
                profile, [("walk", 60.0)], seed=110 + 10 * i + k, t0=k * 90.0
            )
            recordings.append((profile.subject, rec.series))
    ds = build_ident_dataset(recordings, recipe="interp", overlap="1step", seed=0)
    cm = ds.class_map
    train_v = np.stack([s.values for s in ds.train])
    train_y = np.array([cm[s.subject] for s in ds.train])
    test_v = np.stack([s.values for s in ds.test])
    test_y = np.array([cm[s.subject] for s in ds.test])
    print(f"{len(train_v)} train / {len(test_v)} test samples, {len(cm)} subjects\n")

    def margin_run(name, featurize):
        ftr = np.stack([featurize(v) for v in train_v])
        fte = np.stack([featurize(v) for v in test_v])
        model = margin_train(ftr, train_y, seed=0)
        acc = np.mean(margin_predict(model, fte) == test_y)
        print(f"  {name:<22} {ftr.shape[1]:4d} dims  accuracy {acc:.1%}")
        return acc

    print("classical features + margin classifier:")
    best = margin_run("fourier magnitudes", fourier_features)
    best = max(best, margin_run("wavelet energies", wavelet_energy_features))
    basis = eigengait_fit(train_v, k=40)
    best = max(best, margin_run(
        "principal components", lambda v: eigengait_features(basis, v[None])[0]
    ))

    cnn = init_ident_model("cnn", len(cm), seed=0)
    train_ident(cnn, train_v, train_y, epochs=3, batch=128, seed=0)
    acc = np.mean(ident_forward(cnn, test_v).data.argmax(axis=1) == test_y)
    print(f"\nconvolutional network       accuracy {acc:.1%} "
          f"({acc - best:+.1%} over the best classical run)")


if __name__ == "__main__":
    main()

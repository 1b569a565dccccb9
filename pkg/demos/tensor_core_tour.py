"""A lap around the reverse-mode engine that trains every model here.

Builds a two-layer network out of raw ops, records it on a tape, pulls
gradients back through it, and checks one of them against central
differences. Then takes ten hand-rolled optimizer steps to show the
loss actually falls.
"""

import numpy as np

from gaitkit.autodiff import GradTape, Tensor, affine, backward, relu, softmax
from gaitkit.nn import Adam, cross_entropy


def main():
    rng = np.random.default_rng(1)
    x = Tensor(rng.normal(size=(8, 3)))
    targets = np.eye(2)[rng.integers(0, 2, size=8)]

    w1, b1 = Tensor(rng.normal(scale=0.5, size=(3, 16))), Tensor(np.zeros(16))
    w2, b2 = Tensor(rng.normal(scale=0.5, size=(16, 2))), Tensor(np.zeros(2))
    params = [w1, b1, w2, b2]

    def loss_fn():
        hidden = relu(affine(x, w1, b1))
        return cross_entropy(softmax(affine(hidden, w2, b2)), Tensor(targets))

    with GradTape() as tape:
        loss = loss_fn()
    grads = backward(loss, tape)
    print(f"loss {float(loss.data):.4f}")
    print(f"gradient shapes: {[grads[p].shape for p in params]}")

    # nudge one weight both ways; the slope should match the tape
    eps, (i, j) = 1e-5, (0, 0)
    keep = w1.data[i, j]
    w1.data[i, j] = keep + eps
    up = float(loss_fn().data)
    w1.data[i, j] = keep - eps
    down = float(loss_fn().data)
    w1.data[i, j] = keep
    numeric = (up - down) / (2 * eps)
    analytic = grads[w1][i, j]
    print(f"dloss/dw1[0,0]: tape {analytic:.8f}  central diff {numeric:.8f}  "
          f"delta {abs(analytic - numeric):.2e}")

    opt = Adam(lr=0.05)
    for step in range(1, 11):
        with GradTape() as tape:
            loss = loss_fn()
        opt.step(params, backward(loss, tape))
        if step % 2 == 0:
            print(f"  step {step:2d}  loss {float(loss.data):.4f}")


if __name__ == "__main__":
    main()

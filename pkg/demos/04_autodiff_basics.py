"""The reverse-mode autodiff core the whole model runs on.

Everything is float64 numpy: Tensors record the ops that produced them,
backward() walks the graph once in topological order, and gradients
accumulate wherever a value is reused.  A finite-difference checker keeps
the hand-written backward passes honest.
"""

import numpy as np

import prosoparse.autodiff as ad

rng = np.random.default_rng(0)

# A small computation: y = mean(tanh(x @ w + b) * x @ w)
x = ad.Tensor(rng.normal(size=(4, 3)), requires_grad=True, name="x")
w = ad.Tensor(rng.normal(size=(3, 2)), requires_grad=True, name="w")
b = ad.Tensor(rng.normal(size=(2,)), requires_grad=True, name="b")

h = ad.add(ad.matmul(x, w), b)
y = ad.mean_all(ad.mul(ad.tanh(h), h))
print("loss:", y.item())

y.backward()
print("dL/dw:\n", w.grad)

# Reuse accumulates: d(x + x)/dx = 2 everywhere.
a = ad.Tensor(np.ones(3), requires_grad=True)
ad.tsum(ad.add(a, a)).backward()
print("\ngradient of sum(a + a):", a.grad)

# The checker perturbs sampled coordinates and compares against the taped
# gradients; the training loop runs it on the full parser in its tests.
def loss_fn():
    h = ad.add(ad.matmul(x, w), b)
    return ad.mean_all(ad.mul(ad.tanh(h), h))

err = ad.finite_difference_check(loss_fn, {"x": x, "w": w, "b": b},
                                 rng=np.random.default_rng(1))
print("\nfinite-difference relative error: %.2e" % err)

# The same machinery drives an LSTM step and Adam updates.
params = {"w": w, "b": b}
adam = ad.AdamState(lr=0.05)
for step in range(25):
    ad.zero_grads(params)
    loss = loss_fn()
    loss.backward()
    ad.adam_step(params, adam)
print("\nloss after 25 Adam steps on w, b:", loss_fn().item())

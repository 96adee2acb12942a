#!/usr/bin/env python3
"""Finite-difference verification of every layer's backward pass.

Each layer is probed with ``sum(output * mask)`` for a fixed random mask and
its analytic gradients are compared with central differences in double
precision.  A deliberately broken layer (angle gradient with the wrong sign)
shows what a failure looks like, so a passing run means something.

Run:  python demos/gradient_check_tour.py
"""

import numpy as np

from qcnn import gradcheck
from qcnn.layers import modules as M


class WrongSignQConv(M.QConv2D):
    def backward(self, grad_out):
        dx = super().backward(grad_out)
        self.grads["theta"] = -self.grads["theta"]
        return dx


def main():
    reports = gradcheck.run_suite(seeds=(0,))
    for r in reports:
        print(r)
    print(f"{sum(r.passed for r in reports)}/{len(reports)} checks passed\n")

    broken = WrongSignQConv((1, 3, 6, 6), 2, 3, padding="valid")
    broken.allocate(np.float64)
    print("negative control, angle gradient sign flipped:")
    rep = gradcheck.check_layer(broken, np.random.default_rng(0), name="qconv with flipped theta gradient")
    print(rep)
    for group, err in rep.max_rel.items():
        print(f"  {group:<6} max relative error {err:.2e}")


if __name__ == "__main__":
    main()

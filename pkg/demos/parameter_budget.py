#!/usr/bin/env python3
"""Parameter and multiplication budgets of the real and quaternion presets.

A quaternion conv layer with K filters over C quaternion channels stores an
``(s, theta)`` pair per tap, so 2*K*C*L^2 numbers, against K*C*L^2 for a real
layer with the same counts.  At equal widths the quaternion network is
therefore close to twice the size, though not exactly: its first layer reads
one quaternion channel where the real one reads three colour channels.
Shrinking quaternion widths by 1/sqrt(2) brings the budgets back in line.

Run:  python demos/parameter_budget.py
"""

from qcnn.network import Network
from qcnn.presets import INV_SQRT2, build_preset


def conv_budget(name, quaternion, ratio=None, **kw):
    net = Network(build_preset(name, quaternion, ratio, **kw), allocate=False)
    rows = [r for r in net.audit() if "conv" in r[1]]
    return sum(r[2] for r in rows), sum(r[3] for r in rows), rows


def main():
    for name in ("shallow-cifar", "denoiser", "vgg-s"):
        real, real_mults, rows = conv_budget(name, False)
        equal, equal_mults, qrows = conv_budget(name, True, 1.0)
        reduced, reduced_mults, _ = conv_budget(name, True, INV_SQRT2)
        print(f"{name}")
        print(f"  real                 {real:>11,d} conv params {real_mults:>16,d} mults")
        print(f"  quaternion, ratio 1  {equal:>11,d} conv params {equal_mults:>16,d} mults  ({equal / real:.4f}x)")
        print(f"  quaternion, 1/sqrt2  {reduced:>11,d} conv params {reduced_mults:>16,d} mults  ({reduced / real:.4f}x)")
        print(f"  first layer: real {rows[0][2]:,d} vs quaternion {qrows[0][2]:,d}\n")


if __name__ == "__main__":
    main()

"""Independent oracles: central finite differences and a Hamilton-product convolution.

The layer checks use the probe loss ``sum(output * mask)`` for a fixed random
mask, so the probe gradient w.r.t. the output is exactly ``mask`` and the check
isolates the layer's own Jacobian.
"""

from dataclasses import dataclass, field

import numpy as np

from . import quat
from .layers import modules as M
from .layers._conv import resolve_padding
from .layers.functional import ConvConfig, softmax_head
from .training import cross_entropy_loss, mse_loss

KINK_MARGIN = 1e-3


def finite_diff_grad(probe, params, eps=1e-5):
    """Central differences of scalar ``probe()`` w.r.t. every entry of ``params``.

    ``params`` is an array or a list of arrays that ``probe`` reads; entries are
    perturbed in place and restored.
    """
    single = isinstance(params, np.ndarray)
    arrays = [params] if single else list(params)
    grads = []
    for p in arrays:
        g = np.zeros(p.shape, dtype=np.float64)
        flat = p.reshape(-1)
        if not np.shares_memory(flat, p):
            raise ValueError("parameters must be contiguous to be perturbed in place")
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            fp = probe()
            flat[i] = orig - eps
            fm = probe()
            flat[i] = orig
            g.flat[i] = (fp - fm) / (2 * eps)
        grads.append(g)
    return grads[0] if single else grads


def relative_error(analytic, numeric):
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    return np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-8)


@dataclass
class GradCheckReport:
    probe: str
    tolerance: float
    max_rel: dict = field(default_factory=dict)
    max_abs: dict = field(default_factory=dict)

    def add(self, group, analytic, numeric):
        self.max_rel[group] = float(relative_error(analytic, numeric).max(initial=0.0))
        self.max_abs[group] = float(np.abs(np.asarray(analytic) - numeric).max(initial=0.0))

    @property
    def worst(self):
        return max(self.max_rel.items(), key=lambda kv: kv[1]) if self.max_rel else ("-", 0.0)

    @property
    def passed(self):
        return all(v < self.tolerance for v in self.max_rel.values())

    def __str__(self):
        group, err = self.worst
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.probe:<40} worst {group:<8} rel {err:.2e}  (tol {self.tolerance:g})"


# -- oracle convolution ------------------------------------------------------


def oracle_qconv(x, k, cfg=ConvConfig()):
    """Quaternion convolution computed literally with Hamilton products.

    Each tap rotates the patch quaternion by the unit rotor about the gray axis
    and scales it once by ``s``.  ``x`` is ``(C, 3, H, W)``; the kernel is
    ``(K, C, L, L)``.
    """
    x = np.asarray(x, dtype=np.float64)
    c, _, h, w = x.shape
    kk, kc, kh, kw = k.s.shape
    if kc != c:
        raise ValueError(f"input has {c} channels, kernel expects {kc}")
    ph = resolve_padding(cfg.padding, h, kh, cfg.stride)
    pw = resolve_padding(cfg.padding, w, kw, cfg.stride)
    xp = np.pad(x, ((0, 0), (0, 0), ph, pw))
    ho = (xp.shape[2] - kh) // cfg.stride + 1
    wo = (xp.shape[3] - kw) // cfg.stride + 1
    # pure quaternions, (C, H, W, 4)
    q = quat.to_pure(np.moveaxis(xp, 1, -1))
    out = np.zeros((kk, ho, wo, 4))
    for o in range(kk):
        for ci in range(c):
            for i in range(kh):
                for j in range(kw):
                    patch = q[ci, i : i + cfg.stride * (ho - 1) + 1 : cfg.stride, j : j + cfg.stride * (wo - 1) + 1 : cfg.stride]
                    u = quat.rotor(quat.GRAY_AXIS, k.theta[o, ci, i, j])
                    rotated = quat.hamilton_product(quat.hamilton_product(u, patch), quat.conjugate(u))
                    out[o] += k.s[o, ci, i, j] * rotated
    return np.moveaxis(out[..., 1:], -1, 1), out[..., 0]


# -- layer checks ------------------------------------------------------------


def _kink_free(layer, x):
    if isinstance(layer, (M.ReLU,)):
        return np.abs(x).min() >= KINK_MARGIN
    if isinstance(layer, M.MaxPool2D):
        win = layer._real(x)
        n, c, h, w = win.shape
        s = layer.size
        win = win.reshape(n, c, h // s, s, w // s, s).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h // s, w // s, -1)
        top2 = np.sort(win, axis=-1)[..., -2:]
        return (top2[..., 1] - top2[..., 0]).min() >= KINK_MARGIN
    return True


def sample_input(layer, rng, batch=1, max_tries=1000):
    """Standard-normal input for ``layer``, resampled away from ReLU kinks and max-pool ties."""
    for _ in range(max_tries):
        x = rng.standard_normal((batch,) + layer.in_shape)
        if _kink_free(layer, x):
            return x
    raise RuntimeError(f"could not sample a kink-free input for {layer.kind}")


def check_layer(layer, rng, tolerance=1e-4, eps=1e-5, batch=1, name=None):
    """Compare a layer's analytic backward with finite differences.

    The layer must be allocated in float64.  Parameters are drawn from a
    standard normal so no entry sits at a special value.
    """
    for arr in layer.params.values():
        arr[...] = rng.standard_normal(arr.shape)
    x = sample_input(layer, rng, batch)
    mask = rng.standard_normal((batch,) + tuple(layer.out_shape))

    def probe():
        return float(np.sum(layer.forward(x) * mask))

    layer.forward(x)
    dx = layer.backward(mask.copy())
    grads = {k: np.array(v) for k, v in layer.grads.items()}
    report = GradCheckReport(name or f"{layer.kind} {layer.in_shape}", tolerance)
    report.add("input", dx, finite_diff_grad(probe, x, eps))
    for pname, arr in layer.params.items():
        report.add(pname, grads[pname], finite_diff_grad(probe, arr, eps))
    return report


def check_loss(kind, rng, tolerance=1e-6, eps=1e-5, batch=3, classes=5):
    """Finite-difference check of a loss gradient w.r.t. its input."""
    if kind == "cross_entropy":
        z = rng.standard_normal((batch, classes))
        y = rng.integers(0, classes, batch)

        def probe():
            return cross_entropy_loss(softmax_head(z), y)[0]

        analytic = cross_entropy_loss(softmax_head(z), y)[1]
    elif kind == "mse":
        # quadratic, so central differences are exact; a wide step keeps rounding out
        eps = max(eps, 1e-3)
        z = rng.standard_normal((batch, 3, 4, 4))
        y = rng.uniform(0, 1, z.shape)

        def probe():
            return mse_loss(z, y)[0]

        analytic = mse_loss(z, y)[1]
    else:
        raise ValueError(f"unknown loss {kind!r}")
    report = GradCheckReport(f"{kind} loss", tolerance)
    report.add("input", analytic, finite_diff_grad(probe, z, eps))
    return report


def check_softmax_head(rng, tolerance=1e-6, eps=1e-5, features=12, classes=10):
    """Dense layer + softmax + cross entropy, checked end to end on one sample.

    The difference quotient carries roughly 1e-10 of absolute rounding noise,
    so the probe is kept well conditioned: small weights (no vanishing class
    probabilities) and inputs at least 0.1 from zero (no vanishing weight
    gradients).
    """
    layer = M.Dense((features,), classes, bias=True)
    layer.allocate(np.float64)
    for arr in layer.params.values():
        arr[...] = 0.1 * rng.standard_normal(arr.shape)
    x = rng.standard_normal((1, features))
    x = np.where(np.abs(x) < 0.1, np.copysign(0.1, x) + x, x)
    y = rng.integers(0, classes, 1)

    def probe():
        return cross_entropy_loss(softmax_head(layer.forward(x)), y)[0]

    _, g = cross_entropy_loss(softmax_head(layer.forward(x)), y)
    dx = layer.backward(g)
    report = GradCheckReport("dense + softmax + cross entropy", tolerance)
    report.add("input", dx, finite_diff_grad(probe, x, eps))
    for pname, arr in layer.params.items():
        report.add(pname, layer.grads[pname].copy(), finite_diff_grad(probe, arr, eps))
    return report


def _suite_layers():
    """(description, factory) pairs covering every shipped layer kind."""
    q = (2, 3, 8, 8)
    r = (3, 8, 8)
    return [
        ("qconv valid K=3 L=3", lambda: M.QConv2D(q, 3, 3, padding="valid")),
        ("qconv same stride 2", lambda: M.QConv2D(q, 3, 3, stride=2, padding="same")),
        ("qconv_t same stride 2", lambda: M.QConvTranspose2D((2, 3, 4, 4), 3, 3, stride=2, padding="same")),
        ("qconv_t valid", lambda: M.QConvTranspose2D((2, 3, 4, 4), 2, 3, padding="valid")),
        ("qdense N=12 M=5", lambda: M.QDense((12, 3), 5)),
        ("qmaxpool", lambda: M.MaxPool2D(q)),
        ("qavgpool", lambda: M.AvgPool2D(q)),
        ("qrelu", lambda: M.ReLU(q)),
        ("tanh (quaternion)", lambda: M.Tanh(q)),
        ("upsample (quaternion)", lambda: M.Upsample2D((2, 3, 4, 4))),
        ("split", lambda: M.Split(q)),
        ("qflatten", lambda: M.QFlatten((2, 3, 4, 4))),
        ("flatten (quaternion)", lambda: M.Flatten((2, 3, 4, 4))),
        ("conv same + bias", lambda: M.Conv2D(r, 3, 3, padding="same", bias=True)),
        ("conv valid stride 2", lambda: M.Conv2D(r, 2, 3, stride=2, padding="valid")),
        ("conv_t same stride 2", lambda: M.ConvTranspose2D((3, 4, 4), 2, 3, stride=2, padding="same", bias=True)),
        ("dense + bias", lambda: M.Dense((12,), 5, bias=True)),
        ("maxpool", lambda: M.MaxPool2D(r)),
        ("avgpool", lambda: M.AvgPool2D(r)),
        ("relu", lambda: M.ReLU(r)),
        ("tanh", lambda: M.Tanh(r)),
    ]


def run_suite(seeds=(0, 1, 2), tolerance=1e-4, eps=1e-5):
    """Every layer kind and both losses, once per seed; returns all reports.

    Layer checks use ``tolerance``/``eps``; the loss and softmax-head checks are
    smooth and use their own tighter defaults (1e-6).
    """
    reports = []
    for seed in seeds:
        rng = np.random.default_rng(seed)
        for desc, factory in _suite_layers():
            layer = factory()
            layer.allocate(np.float64)
            reports.append(check_layer(layer, rng, tolerance, eps, name=f"{desc} [seed {seed}]"))
        for kind in ("cross_entropy", "mse"):
            rep = check_loss(kind, rng)
            rep.probe += f" [seed {seed}]"
            reports.append(rep)
        rep = check_softmax_head(rng)
        rep.probe += f" [seed {seed}]"
        reports.append(rep)
    return reports

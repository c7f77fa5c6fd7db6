"""Hierarchical span encoder: gather tokens into spans, CNN-ReLU-Maxpool twice,
concatenate with the special-token vector. All gradients are hand-written and
checked against central finite differences.

Variants (for ablation):
  cnn_cnn   conv+maxpool over tokens, then conv+maxpool over spans
  cnn_max   conv+maxpool over tokens, then elementwise max over spans
  attn_max  self-attentive pool over tokens, then elementwise max over spans
  attn_attn self-attentive pool in both stages (shared attention parameters)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CacheError, EmptySpansError, ShapeError

VARIANTS = ("cnn_cnn", "cnn_max", "attn_max", "attn_attn")


@dataclass
class SpanTensor:
    """Padded r x l x d container of token vectors grouped by span."""

    data: np.ndarray  # (r, l, d), zero where mask is false
    mask: np.ndarray  # (r, l) bool, valid slots form a prefix per row
    span_count: int
    span_lengths: np.ndarray  # (r,) ints, <= l


@dataclass
class EncoderParams:
    w1: np.ndarray  # (d, d, k) token-stage conv kernel
    b1: np.ndarray  # (d,)
    w2: np.ndarray  # (d, d, k) span-stage conv kernel
    b2: np.ndarray  # (d,)
    attn_w: np.ndarray  # (d, d)
    attn_v: np.ndarray  # (d,)
    k: int = 3

    def __post_init__(self):
        if self.k % 2 != 1:
            raise ShapeError(f"kernel width must be odd, got {self.k}")
        d = self.b1.shape[0]
        expect = {
            "w1": (d, d, self.k),
            "b1": (d,),
            "w2": (d, d, self.k),
            "b2": (d,),
            "attn_w": (d, d),
            "attn_v": (d,),
        }
        for name, shape in expect.items():
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ShapeError(f"{name} has shape {arr.shape}, expected {shape}")

    @property
    def d(self) -> int:
        return self.b1.shape[0]

    @classmethod
    def init(cls, d: int, k: int = 3, rng: np.random.Generator | None = None) -> "EncoderParams":
        rng = rng or np.random.default_rng(0)
        u = lambda *shape: rng.uniform(-0.05, 0.05, shape)
        return cls(u(d, d, k), u(d), u(d, d, k), u(d), u(d, d), u(d), k)

    def arrays(self) -> dict[str, np.ndarray]:
        return {
            "w1": self.w1,
            "b1": self.b1,
            "w2": self.w2,
            "b2": self.b2,
            "attn_w": self.attn_w,
            "attn_v": self.attn_v,
        }


def zero_grads(params: EncoderParams) -> dict[str, np.ndarray]:
    return {name: np.zeros_like(arr) for name, arr in params.arrays().items()}


# ---------------------------------------------------------------------------
# building the span tensor


def gather_spans(T: np.ndarray, boundaries, r: int, l: int) -> SpanTensor:
    """Copy T rows into an (r, l, d) tensor, truncating extra spans ("tail")
    and extra tokens, zero-padding the rest."""
    T = np.asarray(T, dtype=np.float64)
    if T.ndim != 2 or T.shape[0] < 2:
        raise ShapeError("T must be (m, d) with m >= 2")
    if r < 1 or l < 1:
        raise ShapeError("r and l must be >= 1")
    boundaries = list(boundaries)
    if not boundaries:
        raise EmptySpansError("no spans to gather")
    m, d = T.shape
    for s, e in boundaries:
        if s < 1:
            raise ShapeError(f"span [{s},{e}) includes the special-token position 0")
        if e > m:
            raise ShapeError(f"span [{s},{e}) exceeds sequence length {m}")
    span_count = min(len(boundaries), r)
    data = np.zeros((r, l, d))
    mask = np.zeros((r, l), dtype=bool)
    lengths = np.zeros(r, dtype=np.int64)
    for i in range(span_count):
        s, e = boundaries[i]
        n = min(e - s, l)
        if n > 0:
            data[i, :n] = T[s : s + n]
            mask[i, :n] = True
            lengths[i] = n
    if not mask.any():
        raise EmptySpansError("all gathered spans are empty")
    return SpanTensor(data, mask, span_count, lengths)


# ---------------------------------------------------------------------------
# shared primitives


def _conv1d(x: np.ndarray, w: np.ndarray, b: np.ndarray):
    """Same-padded 1-D convolution over axis 1. x: (n, L, din) -> (n, L, dout)."""
    n, L, din = x.shape
    dout, din_w, k = w.shape
    if din_w != din:
        raise ShapeError(f"conv kernel expects input width {din_w}, got {din}")
    pad = (k - 1) // 2
    xpad = np.zeros((n, L + k - 1, din), dtype=x.dtype)
    xpad[:, pad : pad + L] = x
    pre = np.tile(b, (n, L, 1))
    for u in range(k):
        pre += xpad[:, u : u + L] @ w[:, :, u].T
    return pre, xpad


def _conv1d_backward(dpre: np.ndarray, xpad: np.ndarray, w: np.ndarray):
    n, L, _ = dpre.shape
    k = w.shape[2]
    pad = (k - 1) // 2
    dxpad = np.zeros_like(xpad)
    dw = np.zeros_like(w)
    db = dpre.sum(axis=(0, 1))
    for u in range(k):
        dxpad[:, u : u + L] += dpre @ w[:, :, u]
        dw[:, :, u] += np.einsum("nlo,nli->oi", dpre, xpad[:, u : u + L])
    return dxpad[:, pad : pad + L], dw, db


def _masked_max(act: np.ndarray, mask: np.ndarray):
    """Max over axis 1 restricted to masked-true slots; empty rows give zeros.

    Ties route to the first maximal index, which is also where the gradient
    goes in the adjoint.
    """
    neg = np.where(mask[:, :, None], act, -np.inf)
    arg = np.argmax(neg, axis=1)  # (n, d)
    out = np.take_along_axis(act, arg[:, None, :], axis=1)[:, 0, :]
    valid = mask.any(axis=1)
    out[~valid] = 0.0
    return out, arg, valid


def _masked_max_backward(dout: np.ndarray, arg: np.ndarray, valid: np.ndarray, shape):
    dact = np.zeros(shape)
    n, L, d = shape
    rows = np.arange(n)[:, None]
    cols = np.arange(d)[None, :]
    contrib = np.where(valid[:, None], dout, 0.0)
    np.add.at(dact, (rows, arg, cols), contrib)
    return dact


# ---------------------------------------------------------------------------
# stage 1: within-span pooling


def token_stage(C: SpanTensor, params: EncoderParams):
    """Conv + ReLU over token positions per span, masked max over valid ones.

    Returns (c, valid, cache): c is (r, d), fully masked spans give zeros.
    """
    if C.data.shape[2] != params.d:
        raise ShapeError(f"span tensor width {C.data.shape[2]} != params width {params.d}")
    pre, xpad = _conv1d(C.data, params.w1, params.b1)
    act = np.maximum(pre, 0.0)
    c, arg, valid = _masked_max(act, C.mask)
    cache = {"xpad": xpad, "pre": pre, "arg": arg, "valid": valid, "mask": C.mask}
    return c, valid, cache


def _token_stage_backward(dc: np.ndarray, cache, params: EncoderParams):
    dact = _masked_max_backward(
        dc, cache["arg"], cache["valid"], cache["pre"].shape
    )
    dpre = dact * (cache["pre"] > 0.0)
    ddata, dw1, db1 = _conv1d_backward(dpre, cache["xpad"], params.w1)
    ddata[~cache["mask"]] = 0.0
    return ddata, dw1, db1


# ---------------------------------------------------------------------------
# stage 2: across-span pooling


def span_stage(c: np.ndarray, valid: np.ndarray, params: EncoderParams):
    """Conv + ReLU over the span axis, masked max over valid spans."""
    if not valid.any():
        raise EmptySpansError("span_stage requires at least one valid span")
    pre, xpad = _conv1d(c[None], params.w2, params.b2)
    act = np.maximum(pre, 0.0)
    s, arg, _ = _masked_max(act, valid[None])
    cache = {"xpad": xpad, "pre": pre, "arg": arg, "valid_rows": valid}
    return s[0], cache


def _span_stage_backward(ds: np.ndarray, cache, params: EncoderParams):
    r, d = cache["pre"].shape[1], cache["pre"].shape[2]
    dact = _masked_max_backward(
        ds[None], cache["arg"], np.array([True]), (1, r, d)
    )
    dpre = dact * (cache["pre"] > 0.0)
    dc, dw2, db2 = _conv1d_backward(dpre, cache["xpad"], params.w2)
    dc = dc[0]
    dc[~cache["valid_rows"]] = 0.0
    return dc, dw2, db2


# ---------------------------------------------------------------------------
# self-attentive pooling (ablation variants)


def self_attentive_pool(H: np.ndarray, params: EncoderParams, mask: np.ndarray | None = None):
    """Masked softmax(v . tanh(W h_i)) weighted sum of rows of H."""
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] < 1:
        raise ShapeError("H must be (n, d) with n >= 1")
    if H.shape[1] != params.d:
        raise ShapeError(f"row width {H.shape[1]} != params width {params.d}")
    if mask is None:
        mask = np.ones(H.shape[0], dtype=bool)
    # compute over the compressed valid rows so padded rows cannot perturb
    # floating-point summation order (padding invariance is bit-exact)
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise EmptySpansError("self_attentive_pool needs at least one valid row")
    Hv = H[idx]
    th = np.tanh(Hv @ params.attn_w.T)  # (nv, d)
    scores = th @ params.attn_v  # (nv,)
    z = scores - scores.max()
    ez = np.exp(z)
    a = ez / ez.sum()
    out = a @ Hv
    cache = {"Hv": Hv, "th": th, "a": a, "idx": idx, "n": H.shape[0]}
    return out, cache


def _self_attentive_backward(dout: np.ndarray, cache, params: EncoderParams):
    Hv, th, a, idx = cache["Hv"], cache["th"], cache["a"], cache["idx"]
    dHv = a[:, None] * dout[None, :]
    da = Hv @ dout
    dscores = a * (da - float(a @ da))
    dv = th.T @ dscores
    dth = dscores[:, None] * params.attn_v[None, :]
    du = dth * (1.0 - th * th)
    dw = du.T @ Hv
    dHv += du @ params.attn_w
    dH = np.zeros((cache["n"], Hv.shape[1]))
    dH[idx] = dHv
    return dH, dw, dv


# ---------------------------------------------------------------------------
# composition


def concat_cls(s: np.ndarray, T: np.ndarray) -> np.ndarray:
    """s* = [s ; t1], length 2d."""
    T = np.asarray(T, dtype=np.float64)
    if s.shape != (T.shape[1],):
        raise ShapeError(f"s has shape {s.shape}, T rows have width {T.shape[1]}")
    return np.concatenate([s, T[0]])


def encode_token_level(C: SpanTensor, params: EncoderParams) -> np.ndarray:
    """Stage-1 span vectors without the final pooling, for sequence heads."""
    c, _, _ = token_stage(C, params)
    return c


def forward(T, boundaries, params: EncoderParams, variant: str, r: int, l: int):
    """Full encoder pass. Returns (s_star, cache) with cache for backward()."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    T = np.asarray(T, dtype=np.float64)
    C = gather_spans(T, boundaries, r, l)
    cache: dict = {"variant": variant, "C": C, "T_shape": T.shape, "boundaries": list(boundaries)}

    if variant.startswith("cnn"):
        c, valid, cache["stage1"] = token_stage(C, params)
    else:
        c = np.zeros((r, params.d))
        valid = C.span_lengths > 0
        attn_caches = []
        for i in range(r):
            if valid[i]:
                n = int(C.span_lengths[i])
                c[i], ac = self_attentive_pool(C.data[i, :n], params)
                attn_caches.append((i, n, ac))
        cache["stage1"] = attn_caches
    cache["c"] = c
    cache["valid"] = valid
    if not valid.any():
        raise EmptySpansError("no valid spans after gathering")

    if variant == "cnn_cnn":
        s, cache["stage2"] = span_stage(c, valid, params)
    elif variant == "attn_attn":
        s, cache["stage2"] = self_attentive_pool(c, params, mask=valid)
    else:  # *_max: masked elementwise max over span vectors
        s, arg, _ = _masked_max(c[None], valid[None])
        s = s[0]
        cache["stage2"] = {"arg": arg}
    s_star = concat_cls(s, T)
    cache["params"] = params
    cache["done"] = True
    return s_star, cache


def backward(cache, grad_s_star: np.ndarray) -> dict[str, np.ndarray]:
    """Exact adjoint of forward(). Returns gradients for every parameter
    array plus "t" (gradient on the contextual embeddings)."""
    if not isinstance(cache, dict) or not cache.get("done"):
        raise CacheError("backward requires the cache returned by forward()")
    variant = cache["variant"]
    C: SpanTensor = cache["C"]
    params: EncoderParams = cache["params"]
    d = params.d
    if grad_s_star.shape != (2 * d,):
        raise ShapeError(f"upstream gradient must have length {2 * d}")
    grads = zero_grads(params)
    m, _ = cache["T_shape"]
    dT = np.zeros((m, d))
    ds = grad_s_star[:d]
    dT[0] += grad_s_star[d:]

    valid = cache["valid"]
    c = cache["c"]
    if variant == "cnn_cnn":
        dc, dw2, db2 = _span_stage_backward(ds, cache["stage2"], params)
        grads["w2"] += dw2
        grads["b2"] += db2
    elif variant == "attn_attn":
        dc, dw, dv = _self_attentive_backward(ds, cache["stage2"], params)
        grads["attn_w"] += dw
        grads["attn_v"] += dv
    else:
        dc = _masked_max_backward(
            ds[None], cache["stage2"]["arg"], np.array([True]), (1,) + c.shape
        )[0]
        dc[~valid] = 0.0

    if variant.startswith("cnn"):
        ddata, dw1, db1 = _token_stage_backward(dc, cache["stage1"], params)
        grads["w1"] += dw1
        grads["b1"] += db1
    else:
        ddata = np.zeros_like(C.data)
        for i, n, ac in cache["stage1"]:
            dH, dw, dv = _self_attentive_backward(dc[i], ac, params)
            ddata[i, :n] = dH
            grads["attn_w"] += dw
            grads["attn_v"] += dv

    # scatter span-token gradients back onto T (truncated tokens get none)
    for i in range(C.span_count):
        s0, _ = cache["boundaries"][i]
        n = int(C.span_lengths[i])
        if n > 0:
            dT[s0 : s0 + n] += ddata[i, :n]
    grads["t"] = dT
    return grads


# ---------------------------------------------------------------------------
# gradient verification


@dataclass
class GradCheckReport:
    max_rel_err: float
    per_array: dict[str, float] = field(default_factory=dict)
    passed: bool = False
    tolerance: float = 1e-4


def grad_check(
    d: int,
    r: int,
    l: int,
    variant: str,
    k: int = 3,
    seed: int = 0,
    epsilon: float = 1e-5,
    tolerance: float = 1e-4,
) -> GradCheckReport:
    """Compare analytic gradients to central finite differences on a random
    instance, using a fixed scalar projection of s*."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rng = np.random.default_rng(seed)
    n_spans = int(rng.integers(1, r + 1))
    lengths = [int(rng.integers(1, l + 1)) for _ in range(n_spans)]
    m = 1 + sum(lengths)
    boundaries = []
    pos = 1
    for n in lengths:
        boundaries.append((pos, pos + n))
        pos += n
    T = rng.standard_normal((m, d))
    g = lambda *shape: 0.5 * rng.standard_normal(shape)
    params = EncoderParams(g(d, d, k), g(d), g(d, d, k), g(d), g(d, d), g(d), k)
    proj = rng.standard_normal(2 * d)

    def f() -> float:
        s_star, _ = forward(T, boundaries, params, variant, r, l)
        return float(proj @ s_star)

    s_star, cache = forward(T, boundaries, params, variant, r, l)
    grads = backward(cache, proj)

    per_array: dict[str, float] = {}
    targets = dict(params.arrays())
    targets["t"] = T
    for name, arr in targets.items():
        worst = 0.0
        flat = arr.reshape(-1)
        gflat = grads[name].reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + epsilon
            fp = f()
            flat[idx] = orig - epsilon
            fm = f()
            flat[idx] = orig
            fd = (fp - fm) / (2.0 * epsilon)
            err = abs(gflat[idx] - fd) / max(1e-6, abs(gflat[idx]), abs(fd))
            worst = max(worst, err)
        per_array[name] = worst
    max_err = max(per_array.values())
    return GradCheckReport(max_err, per_array, max_err < tolerance, tolerance)

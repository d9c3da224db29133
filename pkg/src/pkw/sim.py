"""Recursive polar transform, successive-cancellation decoding and channel measurements.

Conventions: a polar code of length N = l^m splits u into l^(m-1) blocks of l
bits.  Block i is mapped by the kernel to gamma_i, and the j-th bits of all
gamma_i form the input of the j-th copy of the length l^(m-1) transform,
whose output occupies positions j*l^(m-1) .. (j+1)*l^(m-1)-1.

The decoder works on log-likelihood pairs (log W(y|0), log W(y|1)) in natural
log units and on batches of words at once.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .bitcode import BitWord
from .kernel import KernelTable

# Decoder ties (equal likelihoods) decide 0.
TIE_BIT = 0
# Floor on log-likelihoods so that impossible symbols stay finite in sums.
LL_FLOOR = -1.0e4
# Upper bound on batch * 2^l entries held by one kernel metric.
_METRIC_BUDGET = 1 << 22


class SimulationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# channels
# ---------------------------------------------------------------------------

ERASURE = 2


@dataclass(frozen=True)
class Channel:
    kind: str
    parameter: Fraction

    def __post_init__(self) -> None:
        kind = self.kind.lower()
        if kind not in ("bec", "bsc"):
            raise SimulationError(f"unknown channel kind {self.kind!r}")
        p = Fraction(self.parameter)
        if not 0 <= p <= 1:
            raise SimulationError("channel parameter must lie in [0, 1]")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "parameter", p)

    @classmethod
    def parse(cls, text: str) -> Channel:
        """``bec:0.5`` or ``bsc:1/10``."""
        try:
            kind, value = text.split(":", 1)
            return cls(kind, Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise SimulationError(f"bad channel spec {text!r}") from exc

    def __str__(self) -> str:
        return f"{self.kind}:{self.parameter}"

    @property
    def capacity(self) -> float:
        p = float(self.parameter)
        if self.kind == "bec":
            return 1.0 - p
        if p in (0.0, 1.0):
            return 1.0
        return 1.0 + p * math.log2(p) + (1 - p) * math.log2(1 - p)

    @property
    def bhattacharyya(self) -> float:
        p = float(self.parameter)
        return p if self.kind == "bec" else 2.0 * math.sqrt(p * (1 - p))

    def transmit(self, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        x = np.asarray(x, dtype=np.uint8)
        hit = rng.random(x.shape) < float(self.parameter)
        if self.kind == "bec":
            return np.where(hit, ERASURE, x).astype(np.uint8)
        return (x ^ hit).astype(np.uint8)

    def loglik(self, y: np.ndarray) -> np.ndarray:
        """Array of shape y.shape + (2,) holding log W(y|0), log W(y|1), floored."""
        y = np.asarray(y)
        p = float(self.parameter)
        with np.errstate(divide="ignore"):
            lp, lq = np.log(p), np.log1p(-p)
        out = np.empty(y.shape + (2,), dtype=np.float64)
        if self.kind == "bec":
            out[..., 0] = np.where(y == ERASURE, lp, np.where(y == 0, lq, -np.inf))
            out[..., 1] = np.where(y == ERASURE, lp, np.where(y == 1, lq, -np.inf))
        else:
            out[..., 0] = np.where(y == 0, lq, lp)
            out[..., 1] = np.where(y == 1, lq, lp)
        return np.maximum(out, LL_FLOOR)


# ---------------------------------------------------------------------------
# codes and encoding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolarCode:
    kernel: KernelTable
    levels: int
    frozen: frozenset[int] = frozenset()
    frozen_values: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.levels < 1:
            raise SimulationError("levels must be at least 1")
        frozen = frozenset(int(i) for i in self.frozen)
        if any(not 0 <= i < self.length for i in frozen):
            raise SimulationError("frozen index out of range")
        values = tuple(int(v) for v in self.frozen_values) or (0,) * len(frozen)
        if len(values) != len(frozen) or any(v not in (0, 1) for v in values):
            raise SimulationError("need one binary frozen value per frozen index (in index order)")
        object.__setattr__(self, "frozen", frozen)
        object.__setattr__(self, "frozen_values", values)

    @property
    def length(self) -> int:
        return self.kernel.ell**self.levels

    @property
    def information_set(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.length) if i not in self.frozen)

    def frozen_map(self) -> dict[int, int]:
        return dict(zip(sorted(self.frozen), self.frozen_values))


def polar_transform(kernel: KernelTable, levels: int, u: np.ndarray) -> np.ndarray:
    """Batch g^(m): ``u`` has shape (..., l^m) with 0/1 entries."""
    u = np.asarray(u, dtype=np.uint8)
    ell = kernel.ell
    n = ell**levels
    if u.shape[-1] != n:
        raise SimulationError(f"input length {u.shape[-1]} != {n}")
    lead = u.shape[:-1]
    flat = u.reshape(-1, n)
    out = _transform(kernel, levels, flat)
    return out.reshape(lead + (n,))


def _transform(kernel: KernelTable, levels: int, u: np.ndarray) -> np.ndarray:
    ell = kernel.ell
    b = u.shape[0]
    inner = ell ** (levels - 1)
    weights = (1 << np.arange(ell - 1, -1, -1)).astype(np.int64)
    idx = u.reshape(b, inner, ell).astype(np.int64) @ weights
    gamma = _bits(kernel.table[idx], ell)
    if levels == 1:
        return gamma.reshape(b, ell)
    v = gamma.transpose(0, 2, 1).reshape(b * ell, inner)
    return _transform(kernel, levels - 1, v).reshape(b, ell * inner)


def _bits(values: np.ndarray, ell: int) -> np.ndarray:
    shifts = np.arange(ell - 1, -1, -1, dtype=np.int64)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def polar_encode(code: PolarCode, u: BitWord | np.ndarray) -> BitWord | np.ndarray:
    if isinstance(u, BitWord):
        if u.length != code.length:
            raise SimulationError("input length does not match the code")
        x = polar_transform(code.kernel, code.levels, np.array(u.to_list(), dtype=np.uint8))
        return BitWord.from_bits(x.tolist())
    return polar_transform(code.kernel, code.levels, u)


# ---------------------------------------------------------------------------
# SC decoding
# ---------------------------------------------------------------------------


@dataclass
class OpCounter:
    """Per-word count of log-likelihood additions and max* operations."""

    additions: int = 0
    maxstar: int = 0

    @property
    def total(self) -> int:
        return self.additions + self.maxstar


def _pair_lse(m: np.ndarray) -> np.ndarray:
    """m has shape (B, 2, h); returns log of the sums over the last axis."""
    top = m.max(axis=(1, 2), keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        return np.log(np.exp(m - top).sum(axis=2)) + top[:, :, 0]


def _sc_node(kernel: KernelTable, levels: int, ll: np.ndarray, xbits: np.ndarray, ops: OpCounter) -> Iterator[np.ndarray]:
    """Coroutine over the inputs of one sub-transform.

    Yields a (B, 2) array of log-likelihoods for the next input bit given the
    bits already sent, and receives the decided bits as a (B,) array.
    """
    if levels == 0:
        yield ll[:, 0, :]
        return
    ell = kernel.ell
    inner = ell ** (levels - 1)
    subs = [_sc_node(kernel, levels - 1, ll[:, j * inner : (j + 1) * inner, :], xbits, ops) for j in range(ell)]
    pending = [next(g) for g in subs]
    b = ll.shape[0]
    rows = np.arange(b)
    for _ in range(inner):
        coord = np.stack(pending, axis=1)  # (B, l, 2)
        base = coord[:, :, 0].sum(axis=1)
        metric = base[:, None] + (coord[:, :, 1] - coord[:, :, 0]) @ xbits.T
        ops.additions += (1 << ell) * (ell - 1)
        prefix = np.zeros(b, dtype=np.int64)
        for t in range(ell):
            half = 1 << (ell - t - 1)
            view = metric.reshape(b, 2, half)
            pair = np.maximum(_pair_lse(view) - (ell - 1) * math.log(2.0), LL_FLOOR)
            ops.maxstar += 2 * (half - 1)
            bit = (yield pair).astype(np.int64)
            metric = view[rows, bit]
            prefix = (prefix << 1) | bit
        gamma = kernel.table[prefix]
        for j, g in enumerate(subs):
            try:
                pending[j] = g.send(((gamma >> (ell - 1 - j)) & 1).astype(np.uint8))
            except StopIteration:
                pending[j] = None


def _decide(pair: np.ndarray) -> np.ndarray:
    return np.where(pair[:, 1] > pair[:, 0], 1, TIE_BIT).astype(np.uint8)


def _chunk_size(kernel: KernelTable) -> int:
    return max(1, _METRIC_BUDGET >> kernel.ell)


def _run_decoder(
    code: PolarCode, ll: np.ndarray, genie: np.ndarray | None, ops: OpCounter | None
) -> tuple[np.ndarray, np.ndarray]:
    """Decode a batch; returns (bits (B, N), per-index likelihood pairs (B, N, 2))."""
    n = code.length
    b = ll.shape[0]
    xbits = code.kernel.output_bits().astype(np.float64)
    counter = ops if ops is not None else OpCounter()
    frozen = code.frozen_map()
    bits = np.zeros((b, n), dtype=np.uint8)
    pairs = np.zeros((b, n, 2))
    gen = _sc_node(code.kernel, code.levels, ll, xbits, counter)
    pair = next(gen)
    for i in range(n):
        pairs[:, i] = pair
        if genie is not None:
            bit = genie[:, i]
        elif i in frozen:
            bit = np.full(b, frozen[i], dtype=np.uint8)
        else:
            bit = _decide(pair)
        bits[:, i] = bit
        try:
            pair = gen.send(bit)
        except StopIteration:
            pass
    return bits, pairs


def sc_decode_ll(code: PolarCode, ll: np.ndarray, ops: OpCounter | None = None) -> np.ndarray:
    """SC decoding from log-likelihood pairs of shape (N, 2) or (B, N, 2)."""
    ll = np.asarray(ll, dtype=np.float64)
    single = ll.ndim == 2
    if single:
        ll = ll[None]
    if ll.shape[1:] != (code.length, 2):
        raise SimulationError("observation length does not match the code")
    step = _chunk_size(code.kernel)
    out = []
    for s in range(0, ll.shape[0], step):
        counter = ops if (ops is not None and s == 0) else None
        out.append(_run_decoder(code, ll[s : s + step], None, counter)[0])
    bits = np.concatenate(out)
    return bits[0] if single else bits


def sc_decode(code: PolarCode, y: np.ndarray, channel: Channel, ops: OpCounter | None = None) -> np.ndarray:
    """Decode channel outputs ``y`` (shape (N,) or (B, N)); returns the estimate of u."""
    return sc_decode_ll(code, channel.loglik(np.asarray(y)), ops)


def sc_likelihood(kernel: KernelTable, ll: np.ndarray, prefix: Sequence[int], b: int) -> float:
    """W^(i)(y, prefix | u_i = b) for a single kernel from per-coordinate log-likelihoods (l, 2)."""
    return math.exp(sc_log_likelihood(kernel, ll, prefix, b))


def sc_log_likelihood(kernel: KernelTable, ll: np.ndarray, prefix: Sequence[int], b: int) -> float:
    ell = kernel.ell
    i = len(prefix)
    if i >= ell or b not in (0, 1):
        raise SimulationError("prefix must be shorter than the kernel and b binary")
    ll = np.asarray(ll, dtype=np.float64)
    head = 0
    for bit in list(prefix) + [b]:
        head = (head << 1) | int(bit)
    rest = ell - i - 1
    us = (head << rest) + np.arange(1 << rest)
    xb = _bits(kernel.table[us], ell)
    terms = ll[np.arange(ell), xb].sum(axis=1)
    top = terms.max()
    if not np.isfinite(top):
        return -math.inf
    return float(top + np.log(np.exp(terms - top).sum()) - (ell - 1) * math.log(2.0))


# ---------------------------------------------------------------------------
# channel estimates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChannelEstimate:
    index: int
    bhattacharyya: float
    error_probability: float
    capacity: float
    trials: int
    exact: bool


def linear_subgroup(kernel: KernelTable, samples: int = 32, seed: int = 0) -> list[int]:
    """Echelon basis of {w : g(u ^ w) = g(u) ^ g(w) for every u}."""
    t = kernel.table
    if t[0] != 0:
        return []
    n = kernel.size
    rng = np.random.default_rng(seed)
    probe = rng.integers(0, n, size=min(samples, n))
    w = np.arange(n)
    ok = ((t[w[:, None] ^ probe[None, :]] ^ t[probe][None, :]) == t[w][:, None]).all(axis=1)
    basis: list[int] = []  # reduced echelon form, distinct leading bits
    for cand in np.nonzero(ok)[0][1:]:
        v = int(cand)
        for r in basis:
            if v & _lead(r):
                v ^= r
        if v == 0 or not np.array_equal(t[w ^ v], t ^ t[v]):
            continue
        basis = [r ^ v if r & _lead(v) else r for r in basis]
        basis.append(v)
        basis.sort(reverse=True)
        if len(basis) == kernel.ell:
            break
    return basis


def _lead(v: int) -> int:
    return 1 << (v.bit_length() - 1)


def _zeta(h: np.ndarray, ell: int) -> np.ndarray:
    """Subset sums: out[E] = sum over masks v contained in E of h[v]."""
    a = h.astype(np.int64).copy()
    for k in range(ell):
        v = a.reshape(-1, 2, 1 << k)
        v[:, 1, :] += v[:, 0, :]
    return a


def _coset_reps(ell: int, basis: Sequence[int]) -> tuple[list[int], int]:
    pivots = 0
    for r in basis:
        pivots |= _lead(r)
    free = [k for k in range(ell) if not (pivots >> k) & 1]
    reps = []
    for c in range(1 << len(free)):
        u = 0
        for j, k in enumerate(free):
            if (c >> j) & 1:
                u |= 1 << k
        reps.append(u)
    return reps, 1 << len(basis)


def exact_bec_kernel(kernel: KernelTable, eps: float) -> list[ChannelEstimate]:
    """Exact synthesized-channel statistics of one kernel over BEC(eps).

    For each transmitted u and erasure mask E the posterior of u_i given the
    output and u_0..u_{i-1} is a/(a+o), with a and o the numbers of inputs
    sharing u_0..u_i (resp. u_0..u_{i-1} but not u_i) whose images agree
    with g(u) outside E.  Both counts are subset sums of difference-mask
    histograms.  Inputs in one coset of the linear subgroup share all counts.
    """
    ell = kernel.ell
    n = kernel.size
    t = kernel.table
    masks = np.arange(n)
    wt = np.bitwise_count(masks.astype(np.uint64)).astype(np.int64)
    prob = np.power(eps, wt) * np.power(1.0 - eps, ell - wt)
    basis = linear_subgroup(kernel)
    reps, csize = _coset_reps(ell, basis)
    span_bits = 0
    for r in basis:
        span_bits |= r
    z = np.zeros(ell)
    err = np.zeros(ell)
    cap = np.zeros(ell)
    weight = csize / n
    for u in reps:
        counts = []
        for i in range(ell + 1):
            d = np.arange(1 << (ell - i))
            h = np.bincount(t[u ^ d] ^ t[u], minlength=n)
            counts.append(_zeta(h, ell))
        for i in range(ell):
            a = counts[i + 1]
            o = counts[i] - a
            ratio = o / a
            bitpos = ell - 1 - i
            frac_one = 0.5 if (span_bits >> bitpos) & 1 else float((u >> bitpos) & 1)
            z[i] += weight * float(prob @ np.sqrt(ratio))
            cap[i] += weight * float(prob @ np.log2(1.0 + ratio))
            tie = prob[o == a].sum()
            err[i] += weight * (float(prob[o > a].sum()) + tie * (frac_one if TIE_BIT == 0 else 1 - frac_one))
    return [ChannelEstimate(i, float(z[i]), float(err[i]), 1.0 - float(cap[i]), 0, True) for i in range(ell)]


def erasure_polynomials(kernel: KernelTable) -> np.ndarray:
    """For a linear kernel: A[s, w] = number of weight-w erasure masks leaving u_s undetermined."""
    ell = kernel.ell
    if len(linear_subgroup(kernel)) != ell:
        raise SimulationError("erasure polynomials need a linear kernel")
    n = kernel.size
    t = kernel.table
    wt = np.bitwise_count(np.arange(n, dtype=np.uint64)).astype(np.int64)
    counts = [_zeta(np.bincount(t[np.arange(1 << (ell - i))], minlength=n), ell) for i in range(ell + 1)]
    out = np.zeros((ell, ell + 1), dtype=np.int64)
    for s in range(ell):
        amb = (counts[s] - counts[s + 1]) > 0
        out[s] = np.bincount(wt[amb], minlength=ell + 1)
    return out


def _apply_polys(polys: np.ndarray, z: np.ndarray) -> np.ndarray:
    ell = polys.shape[0]
    w = np.arange(ell + 1)
    zz = z[:, None, None]
    vals = (polys[None, :, :] * zz**w * (1.0 - zz) ** (ell - w)).sum(axis=2)  # (n, l)
    return vals.reshape(-1)


def _exact_estimates(code: PolarCode, channel: Channel) -> list[ChannelEstimate]:
    if channel.kind != "bec":
        raise SimulationError("exact mode is only available for the BEC")
    eps = float(channel.parameter)
    if code.levels == 1:
        return exact_bec_kernel(code.kernel, eps)
    if len(linear_subgroup(code.kernel)) != code.kernel.ell:
        raise SimulationError("exact mode for more than one level needs a linear kernel; use Monte Carlo")
    polys = erasure_polynomials(code.kernel)
    z = np.array([eps])
    for _ in range(code.levels):
        z = _apply_polys(polys, z)
    return [ChannelEstimate(i, float(v), float(v) / 2.0, 1.0 - float(v), 0, True) for i, v in enumerate(z)]


@dataclass
class _Tally:
    z: np.ndarray
    err: np.ndarray
    info: np.ndarray
    trials: int


def _mc_chunk(args: tuple[PolarCode, Channel, int, int, int]) -> _Tally:
    code, channel, seed, index, size = args
    rng = np.random.default_rng([seed, index])
    n = code.length
    u = rng.integers(0, 2, size=(size, n), dtype=np.uint8)
    y = channel.transmit(polar_transform(code.kernel, code.levels, u), rng)
    _, pairs = _run_decoder(code, channel.loglik(y), u, None)
    truth = u.astype(np.int64)
    l_true = np.take_along_axis(pairs, truth[..., None], axis=2)[..., 0]
    l_other = np.take_along_axis(pairs, 1 - truth[..., None], axis=2)[..., 0]
    dec = np.where(pairs[..., 1] > pairs[..., 0], 1, TIE_BIT)
    delta = np.minimum(l_other - l_true, 700.0)
    return _Tally(
        np.exp(delta / 2.0).sum(axis=0),
        (dec != truth).sum(axis=0).astype(np.float64),
        np.logaddexp(0.0, delta).sum(axis=0) / math.log(2.0),
        size,
    )


def estimate_channels(
    code: PolarCode, channel: Channel, trials: int = 0, seed: int = 0, workers: int = 1
) -> list[ChannelEstimate]:
    """Per-index Bhattacharyya, error probability and capacity.

    ``trials == 0`` selects exact mode (BEC only).  Otherwise genie-aided SC
    runs on uniformly random inputs; trials are cut into fixed chunks seeded
    by (seed, chunk index), so results do not depend on ``workers``.
    """
    if trials < 0:
        raise SimulationError("trials must be non-negative")
    if trials == 0:
        return _exact_estimates(code, channel)
    step = min(_chunk_size(code.kernel), 256)
    jobs = [(code, channel, seed, k, min(step, trials - s)) for k, s in enumerate(range(0, trials, step))]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_mc_chunk, jobs))
    else:
        parts = [_mc_chunk(j) for j in jobs]
    z = sum(p.z for p in parts) / trials
    err = sum(p.err for p in parts) / trials
    info = sum(p.info for p in parts) / trials
    return [
        ChannelEstimate(i, float(min(z[i], 1.0)), float(err[i]), float(1.0 - info[i]), trials, False)
        for i in range(code.length)
    ]
